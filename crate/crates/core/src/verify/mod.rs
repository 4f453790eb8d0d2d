//! Post-hoc checks over a trace, the request set and the final state.
//!
//! Every check is a pure function of its inputs. A check either asserts
//! (its failure fails the run) or only reports margins; see
//! [`CheckResult::asserting`]. Failures carry a witness locating the first
//! offending stage, node or string.

mod genericity;
mod limit;
mod logupper;
mod moves;
mod pi2;
mod weights;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::Census;
use crate::config::RunConfig;
use crate::construction::{
    construction_census, path_from_str, EventKind, IntervalState, NodePath, Outcome, Trace,
};
use crate::error::TraceError;
use crate::intervals::interval_bounds;
use crate::kc::RequestSet;

pub use genericity::{check_genericity, resolve_sets, Resolution};
pub use limit::{check_moves_and_limit, check_non_injury, check_replay, stable_path, window_start};
pub use logupper::{check_logupper, decode, encode, l_m, LogUpperCode};
pub use moves::{check_depth_margins, check_move_incompressibility, depth_constant};
pub use pi2::check_pi2;
pub use weights::{check_weights, kc_install_index};

/// Where a failure happened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    pub detail: String,
}

impl Witness {
    pub fn new(stage: Option<u64>, node: Option<&str>, detail: impl Into<String>) -> Self {
        Witness {
            stage,
            node: node.map(str::to_string),
            detail: detail.into(),
        }
    }
}

/// A named number; `None` when the quantity is infinite at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub label: String,
    pub value: Option<f64>,
}

impl Margin {
    pub fn new(label: impl Into<String>, value: Option<f64>) -> Self {
        Margin {
            label: label.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Whether a failure of this check fails the run.
    pub asserting: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<Margin>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl CheckResult {
    pub fn asserting(name: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            asserting: true,
            passed: true,
            witness: None,
            margins: Vec::new(),
            notes: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn reporting(name: &str) -> Self {
        CheckResult {
            asserting: false,
            ..CheckResult::asserting(name)
        }
    }

    /// Record a failure; only the first witness is kept.
    pub fn fail(&mut self, witness: Witness) {
        if self.passed {
            self.witness = Some(witness);
        }
        self.passed = false;
    }

    pub fn with_data(mut self, data: impl Serialize) -> Self {
        self.data = serde_json::to_value(data).expect("report data serializes");
        self
    }

    /// Fails the run.
    pub fn is_failure(&self) -> bool {
        self.asserting && !self.passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Horizon {
    pub stages: u64,
    pub step_horizon: u64,
    pub program_length_cap: usize,
    pub stability_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config_hash: String,
    pub horizon: Horizon,
    pub results: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| !r.is_failure())
    }

    pub fn result(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "config {}\nstages {} (step horizon {}, program length cap {}, window {})\n",
            self.config_hash,
            self.horizon.stages,
            self.horizon.step_horizon,
            self.horizon.program_length_cap,
            self.horizon.stability_window
        );
        for r in &self.results {
            let status = match (r.asserting, r.passed) {
                (_, true) => "pass",
                (true, false) => "FAIL",
                (false, false) => "flag",
            };
            out.push_str(&format!("{status:5} {}\n", r.name));
            if let Some(w) = &r.witness {
                let mut at = Vec::new();
                if let Some(s) = w.stage {
                    at.push(format!("stage {s}"));
                }
                if let Some(n) = &w.node {
                    at.push(format!("node {n:?}"));
                }
                out.push_str(&format!("      witness [{}] {}\n", at.join(", "), w.detail));
            }
            for m in &r.margins {
                match m.value {
                    Some(v) => out.push_str(&format!("      {} = {v}\n", m.label)),
                    None => out.push_str(&format!("      {} = inf\n", m.label)),
                }
            }
            for n in &r.notes {
                out.push_str(&format!("      {n}\n"));
            }
        }
        out
    }
}

/// A write to `A` recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Write {
    pub stage: u64,
    pub node: String,
    pub start: u64,
    pub bits: BitString,
    pub source: WriteSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteSource {
    MoveIn { j: u32 },
    Act,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActRecord {
    pub stage: u64,
    pub node: String,
    pub e: u32,
    pub c: u32,
    pub n: u64,
    pub sigma: BitString,
    pub member: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayedInterval {
    pub state: IntervalState,
    pub move_count: u64,
    pub last_move_stage: Option<u64>,
}

/// Everything the checks derive from a trace by replaying its events.
#[derive(Debug, Clone)]
pub struct Replay {
    pub stages: u64,
    pub writes: Vec<Write>,
    pub acts: Vec<ActRecord>,
    pub intervals: BTreeMap<u32, ReplayedInterval>,
    /// `(stage, f_s, A_s snapshot)` per stage-end event.
    pub stage_ends: Vec<(u64, NodePath, BitString)>,
    /// `G` nodes in initialization order, as `(path, e)`.
    pub g_nodes: Vec<(String, u32)>,
    /// The first event that disagrees with the replayed state.
    pub inconsistency: Option<Witness>,
    a: Vec<bool>,
}

impl Replay {
    pub fn new(trace: &Trace) -> Self {
        let mut r = Replay {
            stages: trace.header.stages,
            writes: Vec::new(),
            acts: Vec::new(),
            intervals: BTreeMap::new(),
            stage_ends: Vec::new(),
            g_nodes: Vec::new(),
            inconsistency: None,
            a: Vec::new(),
        };
        let snapshot_len = trace.header.snapshot_len as u64;
        for ev in &trace.events {
            let node = ev.node_path.as_str();
            match &ev.kind {
                EventKind::NodeInit { requirement, .. } => {
                    if let Some(e) = requirement.strip_prefix('G').and_then(|e| e.parse().ok()) {
                        r.g_nodes.push((ev.node_path.clone(), e));
                    }
                }
                EventKind::MoveIn { j, tau, .. } => {
                    let Some((min, max)) = interval_bounds(*j) else {
                        r.inconsistent(ev.stage, node, format!("interval index {j} out of range"));
                        continue;
                    };
                    if tau.len() as u64 != max - min + 1 {
                        r.inconsistent(
                            ev.stage,
                            node,
                            format!("τ has {} bits but I_{j} has {}", tau.len(), max - min + 1),
                        );
                    }
                    r.write(ev.stage, node, min, tau.clone(), WriteSource::MoveIn { j: *j });
                    let iv = r.intervals.entry(*j).or_insert(ReplayedInterval {
                        state: IntervalState::Untouched,
                        move_count: 0,
                        last_move_stage: None,
                    });
                    iv.state = IntervalState::MovedIn;
                    iv.move_count += 1;
                    iv.last_move_stage = Some(ev.stage);
                }
                EventKind::Fresh { j } => match r.intervals.get_mut(j) {
                    Some(iv) if iv.state == IntervalState::MovedIn => iv.state = IntervalState::Fresh,
                    _ => r.inconsistent(ev.stage, node, format!("I_{j} marked fresh while not moved in")),
                },
                EventKind::Act {
                    e,
                    c,
                    n,
                    sigma,
                    member,
                    l_prime,
                    ..
                } => {
                    let prefix = r.prefix(*n);
                    if prefix.concat(sigma) != *member {
                        r.inconsistent(ev.stage, node, "A↾n⌢σ is not the recorded member");
                    }
                    if *l_prime != n + sigma.len() as u64 {
                        r.inconsistent(ev.stage, node, "l′ ≠ n + |σ|");
                    }
                    r.write(ev.stage, node, *n, sigma.clone(), WriteSource::Act);
                    r.acts.push(ActRecord {
                        stage: ev.stage,
                        node: ev.node_path.clone(),
                        e: *e,
                        c: *c,
                        n: *n,
                        sigma: sigma.clone(),
                        member: member.clone(),
                    });
                }
                EventKind::StageEnd { f, snapshot } => {
                    let expected_stage = r.stage_ends.len() as u64;
                    if ev.stage != expected_stage {
                        r.inconsistent(
                            ev.stage,
                            node,
                            format!("stage end for {} where {expected_stage} was due", ev.stage),
                        );
                    }
                    let replayed = r.prefix(snapshot_len);
                    if *snapshot != replayed {
                        r.inconsistent(
                            ev.stage,
                            node,
                            format!("snapshot {snapshot} but replayed writes give {replayed}"),
                        );
                    }
                    let f = path_from_str(f).unwrap_or_else(|err| {
                        r.inconsistent(ev.stage, node, err.to_string());
                        Vec::new()
                    });
                    r.stage_ends.push((ev.stage, f, snapshot.clone()));
                }
                EventKind::Visit { .. } | EventKind::Request { .. } | EventKind::CapHit { .. } => {}
            }
        }
        if !trace.events.is_empty() && r.stage_ends.len() as u64 != r.stages + 1 {
            r.inconsistent(
                None,
                "",
                format!(
                    "header announces stages 0..={} but the trace ends {} stages",
                    r.stages,
                    r.stage_ends.len()
                ),
            );
        }
        r
    }

    fn inconsistent(&mut self, stage: impl Into<Option<u64>>, node: &str, detail: impl Into<String>) {
        if self.inconsistency.is_none() {
            self.inconsistency = Some(Witness::new(stage.into(), Some(node), detail));
        }
    }

    fn write(&mut self, stage: u64, node: &str, start: u64, bits: BitString, source: WriteSource) {
        let end = start as usize + bits.len();
        if self.a.len() < end {
            self.a.resize(end, false);
        }
        self.a[start as usize..end].copy_from_slice(bits.as_bits());
        self.writes.push(Write {
            stage,
            node: node.to_string(),
            start,
            bits,
            source,
        });
    }

    pub fn prefix(&self, n: u64) -> BitString {
        BitString::from_bits(
            (0..n as usize)
                .map(|x| self.a.get(x).copied().unwrap_or(false))
                .collect(),
        )
    }

    /// The explicit part of the final `A`; zero beyond it.
    pub fn final_a(&self) -> BitString {
        BitString::from_bits(self.a.clone())
    }

    pub fn final_f(&self) -> Option<&NodePath> {
        self.stage_ends.last().map(|(_, f, _)| f)
    }

    /// `A_s↾n` right after the write with index `upto` (inclusive).
    pub fn prefix_after(&self, upto: usize, n: u64) -> BitString {
        let mut a = vec![false; n as usize];
        for w in &self.writes[..=upto] {
            for (k, &bit) in w.bits.as_bits().iter().enumerate() {
                let x = w.start as usize + k;
                if x < a.len() {
                    a[x] = bit;
                }
            }
        }
        BitString::from_bits(a)
    }
}

/// Per-node visit outcomes in stage order.
pub(crate) fn visits_by_node(trace: &Trace) -> BTreeMap<String, Vec<(u64, Outcome, Option<u64>)>> {
    let mut visits: BTreeMap<String, Vec<(u64, Outcome, Option<u64>)>> = BTreeMap::new();
    for ev in &trace.events {
        if let EventKind::Visit { outcome, x, .. } = &ev.kind {
            visits
                .entry(ev.node_path.clone())
                .or_default()
                .push((ev.stage, *outcome, *x));
        }
    }
    visits
}

/// Refuse a trace produced from a different config.
pub fn check_config_hash(trace: &Trace, config: &RunConfig) -> Result<(), TraceError> {
    let config_hash = config.hash();
    if trace.header.config_hash != config_hash {
        return Err(TraceError::ConfigMismatch {
            trace_hash: trace.header.config_hash.clone(),
            config_hash,
        });
    }
    Ok(())
}

/// Inputs shared by all checks.
pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub trace: &'a Trace,
    pub requests: &'a RequestSet,
    pub replay: Replay,
    pub census: Arc<Census>,
}

impl<'a> Run<'a> {
    pub fn new(config: &'a RunConfig, trace: &'a Trace, requests: &'a RequestSet) -> Self {
        Run {
            config,
            trace,
            requests,
            replay: Replay::new(trace),
            census: Arc::new(construction_census(config)),
        }
    }
}

/// The `m` values the upper-bound code is checked at.
pub const LOGUPPER_LENGTHS: [u64; 4] = [4, 8, 16, 32];

/// Run every suite. Refuses a trace whose header names another config.
pub fn verify_run(
    config: &RunConfig,
    trace: &Trace,
    requests: &RequestSet,
) -> Result<VerificationReport, TraceError> {
    check_config_hash(trace, config)?;
    let run = Run::new(config, trace, requests);
    let mut results = vec![
        check_replay(&run),
        check_pi2(trace),
        check_moves_and_limit(&run),
        check_non_injury(&run),
        check_weights(&run),
        check_move_incompressibility(&run),
        check_depth_margins(&run),
        check_genericity(&run),
    ];
    for m in LOGUPPER_LENGTHS {
        results.push(check_logupper(&run, m));
    }
    Ok(VerificationReport {
        config_hash: trace.header.config_hash.clone(),
        horizon: Horizon {
            stages: trace.header.stages,
            step_horizon: config.caps.step_horizon,
            program_length_cap: config.caps.program_length_cap,
            stability_window: config.stability_window,
        },
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::run;
    use crate::reference::{reference_config, seeded_configs};

    #[test]
    fn every_seeded_run_verifies() {
        for (name, config) in seeded_configs() {
            let out = run(&config, 200);
            let report = verify_run(&config, &out.trace, &out.requests).unwrap();
            assert!(report.passed(), "{name}:\n{}", report.to_text());
            assert_eq!(report.results.len(), 8 + LOGUPPER_LENGTHS.len());
        }
    }

    #[test]
    fn mismatched_config_is_refused() {
        let config = reference_config();
        let out = run(&config, 10);
        let mut other = config.clone();
        other.caps.position_cap += 1;
        let err = verify_run(&other, &out.trace, &out.requests).unwrap_err();
        assert!(matches!(err, TraceError::ConfigMismatch { .. }));
    }

    #[test]
    fn stage_and_snapshot_length_do_not_enter_the_hash() {
        let config = reference_config();
        let mut other = config.clone();
        other.max_stage = 7;
        other.snapshot_len = 8;
        assert_eq!(config.hash(), other.hash());
    }

    #[test]
    fn reporting_failures_do_not_fail_the_report() {
        let mut config = reference_config();
        config.stability_window = 1.0;
        let out = run(&config, 100);
        let report = verify_run(&config, &out.trace, &out.requests).unwrap();
        let limit = report.result("moves_and_limit").unwrap();
        assert!(!limit.passed && !limit.asserting);
        assert!(!limit.is_failure());
        assert!(report.passed());
        assert!(report.to_text().contains("flag  moves_and_limit"));
    }

    #[test]
    fn replay_prefix_after_a_write() {
        let out = run(&reference_config(), 200);
        let replay = Replay::new(&out.trace);
        assert_eq!(replay.writes.len(), 2);
        assert_eq!(replay.prefix_after(0, 8), crate::bits::bs("00000010"));
        assert_eq!(replay.prefix(17), out.final_a.prefix(17));
    }
}
