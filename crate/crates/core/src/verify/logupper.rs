//! The short description of `A↾m`: one flag per interval meeting `[0, m)`
//! and one per early `G_e` node, decoded by re-running the construction
//! until its state shows the same flags.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::{floor_log2, BitString};
use crate::complexity::Census;
use crate::config::RunConfig;
use crate::construction::{Construction, Event, EventKind, IntervalState};

use super::{CheckResult, Margin, Run, Witness};

/// `L_m = log m + 1 + (log log m)²`, logarithms rounded down.
pub fn l_m(m: u64) -> u64 {
    let log = floor_log2(m) as u64;
    let loglog = floor_log2(log.max(1)) as u64;
    log + 1 + loglog * loglog
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogUpperCode {
    pub m: u64,
    /// `I_j` ended moved in, for `j ≤ log m`.
    pub intervals: Vec<bool>,
    /// Whether the `k`-th `G_e` node to be initialised acted, for
    /// `e, k < log log m`; absent nodes read as `false`.
    pub nodes: Vec<bool>,
}

impl LogUpperCode {
    pub fn bits(&self) -> BitString {
        BitString::from_bits(self.intervals.iter().chain(&self.nodes).copied().collect())
    }

    pub fn len(&self) -> usize {
        self.intervals.len() + self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn widths(m: u64) -> (u32, usize) {
    let log = floor_log2(m);
    (log, floor_log2(log.max(1) as u64) as usize)
}

fn code_from(m: u64, events: &[Event], state: impl Fn(u32) -> IntervalState) -> LogUpperCode {
    let (log, loglog) = widths(m);
    let intervals = (0..=log).map(|j| state(j) == IntervalState::MovedIn).collect();
    // each initialisation is a fresh node; an act belongs to the latest one at its path
    let mut inits: Vec<Vec<bool>> = vec![Vec::new(); loglog];
    let mut current: HashMap<&str, (usize, usize)> = HashMap::new();
    for ev in events {
        match &ev.kind {
            EventKind::NodeInit { requirement, .. } => {
                current.remove(ev.node_path.as_str());
                let e = requirement
                    .strip_prefix('G')
                    .and_then(|e| e.parse::<usize>().ok());
                if let Some(list) = e.and_then(|e| inits.get_mut(e)) {
                    if list.len() < loglog {
                        let e = e.expect("matched");
                        current.insert(ev.node_path.as_str(), (e, list.len()));
                        list.push(false);
                    }
                }
            }
            EventKind::Act { .. } => {
                if let Some(&(e, k)) = current.get(ev.node_path.as_str()) {
                    inits[e][k] = true;
                }
            }
            _ => {}
        }
    }
    let nodes = inits
        .into_iter()
        .flat_map(|mut list| {
            list.resize(loglog, false);
            list
        })
        .collect();
    LogUpperCode { m, intervals, nodes }
}

/// The code of `A↾m` read off a finished run.
pub fn encode(run: &Run, m: u64) -> LogUpperCode {
    code_from(m, &run.trace.events, |j| {
        run.replay
            .intervals
            .get(&j)
            .map_or(IntervalState::Untouched, |iv| iv.state)
    })
}

/// Re-run the construction from scratch and return `A_s↾m` at the first
/// stage `s ≤ max_stage` whose state has code `code`.
pub fn decode(
    config: &RunConfig,
    census: Arc<Census>,
    code: &LogUpperCode,
    max_stage: u64,
) -> Option<(u64, BitString)> {
    let mut c = Construction::with_census(config.clone(), census);
    loop {
        let stage = c.next_stage();
        if code_from(code.m, c.events(), |j| c.interval_state(j)) == *code {
            return Some((stage, c.a().prefix(code.m)));
        }
        if stage > max_stage {
            return None;
        }
        c.run_stage();
    }
}

#[derive(Debug, Serialize)]
struct LogUpperData {
    m: u64,
    code: String,
    length: usize,
    bound: u64,
    decoded_at: Option<u64>,
}

pub fn check_logupper(run: &Run, m: u64) -> CheckResult {
    let mut result = CheckResult::asserting(&format!("logupper_m{m}"));
    let code = encode(run, m);
    let target = run.replay.prefix(m);
    let decoded = decode(run.config, run.census.clone(), &code, run.replay.stages);
    match &decoded {
        None => result.fail(Witness::new(
            None,
            None,
            format!("no stage up to {} has code {}", run.replay.stages, code.bits()),
        )),
        Some((s, a)) if *a != target => result.fail(Witness::new(
            Some(*s),
            None,
            format!("code {} decodes to {a} at stage {s}, not A↾{m} = {target}", code.bits()),
        )),
        Some(_) => {}
    }
    let bound = l_m(m);
    if code.len() as u64 > bound {
        result.fail(Witness::new(None, None, format!("code length {} exceeds L_{m} = {bound}", code.len())));
    }
    result.margins.push(Margin::new("L_m − length", Some(bound as f64 - code.len() as f64)));
    result.with_data(LogUpperData {
        m,
        code: code.bits().to_string(),
        length: code.len(),
        bound,
        decoded_at: decoded.map(|(s, _)| s),
    })
}
