//! Incompressibility of moved-in strings at their recorded budget, and the
//! depth margins `K^{φ_i}(A↾m+1) − K(A↾m+1)` over the moved-in intervals.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{enumerate_outputs, leftmost_missing, Complexity, OutputTable};
use crate::construction::{EventKind, IntervalState};
use crate::intervals::{assigned_phi, end_of, interval_bounds, phi_period};
use crate::machines::Builtin;

use super::limit::window_start;
use super::{CheckResult, Margin, Run, Witness, WriteSource};

/// `c_i = 2^{−2^{i+1}−3}`.
pub fn depth_constant(i: u32) -> f64 {
    (-(2f64.powi(i as i32 + 1)) - 3.0).exp2()
}

#[derive(Debug, Serialize)]
struct MoveRow {
    stage: u64,
    j: u32,
    budget: u64,
    outputs: usize,
    /// `|I_j| − 1 − (max I_j/3 + d_chop)`; non-negative once `j` is large
    /// enough for the counting argument.
    threshold_margin: f64,
}

/// Re-enumerate `𝕌` at each recorded budget and confirm `τ` is absent; also
/// confirm no program of length `≤ |I_j| − 1 − d_chop` prints
/// `A_s↾max I_j+1` within the inner budget, since chopping it would print `τ`.
pub fn check_move_incompressibility(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("move_incompressibility");
    let um = &run.config.roster;
    let chop = um.builtin_index(Builtin::ChopM).expect("validated roster");
    let mut tables: HashMap<(usize, u64), OutputTable> = HashMap::new();
    let mut table = |maxlen: usize, steps: u64| -> OutputTable {
        tables
            .entry((maxlen, steps))
            .or_insert_with(|| enumerate_outputs(um, maxlen, steps))
            .clone()
    };
    let move_writes = run
        .replay
        .writes
        .iter()
        .enumerate()
        .filter(|(_, w)| matches!(w.source, WriteSource::MoveIn { .. }))
        .map(|(k, _)| k);
    let move_events = run.trace.events.iter().filter_map(|ev| match &ev.kind {
        EventKind::MoveIn {
            j,
            i,
            tau,
            b,
            budget,
            maxlen,
            ..
        } => Some((ev, *j, *i, tau, *b, *budget, *maxlen)),
        _ => None,
    });
    let mut rows = Vec::new();
    for (write_index, (ev, j, i, tau, b, budget, maxlen)) in move_writes.zip(move_events) {
        let stage = Some(ev.stage);
        let node = Some(ev.node_path.as_str());
        let (_, max) = interval_bounds(j).expect("replayed interval");
        let len = 1usize << j;
        if assigned_phi(j) != i {
            result.fail(Witness::new(stage, node, format!("I_{j} belongs to φ_{}, not φ_{i}", assigned_phi(j))));
        }
        let phi = run.config.phi(i);
        let arg = end_of(j + phi_period(i));
        if phi.at_stage(arg, ev.stage) != Some(b) {
            result.fail(Witness::new(stage, node, format!("b = {b} but φ_{i}({arg}) at stage {} is {:?}", ev.stage, phi.at_stage(arg, ev.stage))));
        }
        let trunc = um.builtin_index(Builtin::TruncateN { i }).expect("validated roster");
        let inner = um.overhead_g(trunc, b).expect("in roster");
        let expected = um.overhead_g(chop, inner).expect("in roster");
        if budget != expected || maxlen != len - 1 {
            result.fail(Witness::new(stage, node, format!("budget {budget}, maxlen {maxlen}; expected {expected}, {}", len - 1)));
        }
        let outputs = table(maxlen, budget);
        if outputs.contains(tau) {
            let program = &outputs.get(tau).expect("present").program;
            result.fail(Witness::new(stage, node, format!("τ = {tau} is printed by {program} within {budget} steps")));
        } else if leftmost_missing(len, &outputs) != *tau {
            result.fail(Witness::new(stage, node, format!("τ = {tau} is not the leftmost missing string")));
        }
        if let Some(short) = (len - 1).checked_sub(chop as usize) {
            let segment = run.replay.prefix_after(write_index, max + 1);
            if let Some(w) = table(short, inner).get(&segment) {
                result.fail(Witness::new(stage, node, format!("{} prints A_s↾{} within {inner} steps; chopping it prints τ", w.program, max + 1)));
            }
        }
        rows.push(MoveRow {
            stage: ev.stage,
            j,
            budget,
            outputs: outputs.len(),
            threshold_margin: (len - 1) as f64 - (max as f64 / 3.0 + chop as f64),
        });
    }
    if let Some(worst) = rows.iter().map(|r| r.threshold_margin).reduce(f64::min) {
        result.margins.push(Margin::new("least threshold margin", Some(worst)));
    }
    result.notes.push(format!("{} move-ins re-enumerated; d_chop = {chop}", rows.len()));
    result.with_data(rows)
}

#[derive(Debug, Serialize)]
struct DepthRow {
    i: u32,
    j: u32,
    m: u64,
    time_bound: Option<u64>,
    time_bounded: Complexity,
    horizon: Complexity,
    margin: Option<i64>,
}

#[derive(Debug, Serialize)]
struct DepthSummary {
    i: u32,
    c_i: f64,
    /// Least `d_i` with `margin ≥ c_i·m − d_i` on every finite row.
    d_i: Option<f64>,
    rows: usize,
    finite_rows: usize,
}

#[derive(Debug, Serialize)]
struct DepthData {
    summaries: Vec<DepthSummary>,
    rows: Vec<DepthRow>,
}

/// Margins over every `m` in a `φ_i`-interval (declared order `φ_i`) that
/// ends the run moved in, was not moved in the final window, and meets no
/// act segment. Asserts only `K^{φ_i} ≥ K` at the horizon.
pub fn check_depth_margins(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("depth_margins");
    let config = run.config;
    let replay = &run.replay;
    let final_a = replay.final_a();
    let start = window_start(replay.stages, config.stability_window);
    let horizon = config.caps.step_horizon;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (i, phi) in config.phi.iter().enumerate() {
        let i = i as u32;
        if !phi.order {
            continue;
        }
        let c_i = depth_constant(i);
        let mut d_i: Option<f64> = None;
        let first_row = rows.len();
        for (&j, iv) in &replay.intervals {
            if assigned_phi(j) != i
                || iv.state != IntervalState::MovedIn
                || iv.last_move_stage.is_some_and(|s| s >= start)
            {
                continue;
            }
            let (min, max) = interval_bounds(j).expect("replayed interval");
            let overlapped = replay
                .acts
                .iter()
                .any(|a| a.n <= max && a.n + a.sigma.len() as u64 > min);
            if overlapped {
                result.notes.push(format!("I_{j} skipped: an act segment overlaps it"));
                continue;
            }
            for m in min..=max {
                let x = prefix(&final_a, m + 1);
                let time_bound = phi.value(m + 1);
                let time_bounded = match time_bound {
                    Some(t) => run.census.k_at(&x, t),
                    None => Complexity::Infinite,
                };
                let at_horizon = run.census.k(&x);
                if time_bound.is_some_and(|t| t <= horizon) && time_bounded < at_horizon {
                    result.fail(Witness::new(None, None, format!("K^φ_{i}(A↾{}) = {time_bounded} below K = {at_horizon}", m + 1)));
                }
                let margin = match (time_bounded, at_horizon) {
                    (Complexity::Finite(a), Complexity::Finite(b)) => Some(a as i64 - b as i64),
                    _ => None,
                };
                if let Some(margin) = margin {
                    let needed = c_i * m as f64 - margin as f64;
                    d_i = Some(d_i.map_or(needed, |d| d.max(needed)));
                }
                rows.push(DepthRow {
                    i,
                    j,
                    m,
                    time_bound,
                    time_bounded,
                    horizon: at_horizon,
                    margin,
                });
            }
        }
        let finite_rows = rows[first_row..].iter().filter(|r| r.margin.is_some()).count();
        result.margins.push(Margin::new(format!("c_{i}"), Some(c_i)));
        result.margins.push(Margin::new(format!("measured d_{i}"), d_i));
        summaries.push(DepthSummary {
            i,
            c_i,
            d_i,
            rows: rows.len() - first_row,
            finite_rows,
        });
    }
    if let Some(least) = rows.iter().filter_map(|r| r.margin).min() {
        result.margins.push(Margin::new("least finite margin", Some(least as f64)));
    }
    let infinite = rows.iter().filter(|r| r.margin.is_none()).count();
    if infinite > 0 {
        result.notes.push(format!(
            "{infinite} of {} rows have a term beyond program length {}",
            rows.len(),
            config.caps.program_length_cap
        ));
    }
    result.with_data(DepthData { summaries, rows })
}

fn prefix(a: &BitString, n: u64) -> BitString {
    let mut p = a.prefix((n as usize).min(a.len()));
    while (p.len() as u64) < n {
        p.push(false);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::run;
    use crate::reference::reference_config;

    #[test]
    fn depth_constants() {
        assert_eq!(depth_constant(0), 1.0 / 32.0);
        assert_eq!(depth_constant(1), 1.0 / 128.0);
    }

    #[test]
    fn reference_moves_are_incompressible() {
        let config = reference_config();
        let out = run(&config, 200);
        let r = Run::new(&config, &out.trace, &out.requests);
        let res = check_move_incompressibility(&r);
        assert!(res.passed, "{res:?}");
        assert_eq!(res.data.as_array().unwrap().len(), 2);
        let depth = check_depth_margins(&r);
        assert!(depth.passed, "{depth:?}");
    }

    #[test]
    fn enumerated_tau_fails() {
        let config = reference_config();
        let mut out = run(&config, 40);
        for ev in &mut out.trace.events {
            if let EventKind::MoveIn { tau, .. } = &mut ev.kind {
                // the table machine prints 0000 through 10
                *tau = crate::bits::bs("0000");
            }
        }
        let r = Run::new(&config, &out.trace, &out.requests);
        let res = check_move_incompressibility(&r);
        assert!(!res.passed);
        assert_eq!(res.witness.unwrap().stage, Some(31));
    }

    #[test]
    fn zero_budget_is_vacuous() {
        let um = reference_config().roster;
        let table = enumerate_outputs(&um, 3, 0);
        assert!(table.is_empty());
        assert_eq!(leftmost_missing(4, &table), crate::bits::bs("0000"));
    }
}
