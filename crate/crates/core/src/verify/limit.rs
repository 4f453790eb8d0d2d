//! Replay consistency, move counts, per-position settling, and the
//! protection of acted segments.

use serde::Serialize;

use crate::construction::{is_prefix_path, path_from_str, path_to_string, NodePath};
use crate::intervals::{assigned_phi, interval_bounds};

use super::{CheckResult, Margin, Replay, Run, Witness, WriteSource};

/// First stage of the final `fraction` of stages `0..=stages`.
pub fn window_start(stages: u64, fraction: f64) -> u64 {
    let total = stages + 1;
    let len = ((fraction * total as f64).ceil() as u64).clamp(1, total);
    total - len
}

/// The longest common prefix of every `f_s` in the final window.
pub fn stable_path(replay: &Replay, fraction: f64) -> NodePath {
    let start = window_start(replay.stages, fraction);
    let mut window = replay
        .stage_ends
        .iter()
        .filter(|(s, _, _)| *s >= start)
        .map(|(_, f, _)| f);
    let Some(first) = window.next() else {
        return Vec::new();
    };
    let mut common = first.clone();
    for f in window {
        let k = common.iter().zip(f).take_while(|(a, b)| a == b).count();
        common.truncate(k);
    }
    common
}

/// The snapshots and interval marks agree with a replay of the writes.
pub fn check_replay(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("trace_replay");
    if let Some(w) = &run.replay.inconsistency {
        result.fail(w.clone());
    }
    result.notes.push(format!(
        "{} writes replayed over {} stage records",
        run.replay.writes.len(),
        run.replay.stage_ends.len()
    ));
    result
}

#[derive(Debug, Serialize)]
struct IntervalRow {
    j: u32,
    phi: u32,
    moves: u64,
    last_move_stage: Option<u64>,
    state: crate::construction::IntervalState,
}

#[derive(Debug, Serialize)]
struct LimitData {
    window_start: u64,
    intervals: Vec<IntervalRow>,
    /// Per position `x < snapshot_len`: the stage from which `A_s(x)`
    /// stays constant.
    settled_from: Vec<u64>,
    window_events: Vec<String>,
    window_positions: Vec<u64>,
}

/// Move counts and settling stages; flags any activity in the final
/// stability window. Reports only.
pub fn check_moves_and_limit(run: &Run) -> CheckResult {
    let mut result = CheckResult::reporting("moves_and_limit");
    let replay = &run.replay;
    let start = window_start(replay.stages, run.config.stability_window);
    let snapshot_len = run.trace.header.snapshot_len;
    let mut settled_from = vec![0u64; snapshot_len];
    for pair in replay.stage_ends.windows(2) {
        let (_, _, before) = &pair[0];
        let (s, _, after) = &pair[1];
        for (x, settled) in settled_from.iter_mut().enumerate() {
            if before.get(x) != after.get(x) {
                *settled = *s;
            }
        }
    }
    let window_positions: Vec<u64> = settled_from
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > start)
        .map(|(x, _)| x as u64)
        .collect();
    let window_events: Vec<String> = replay
        .writes
        .iter()
        .filter(|w| w.stage >= start)
        .map(|w| match w.source {
            WriteSource::MoveIn { j } => format!("stage {}: move in I_{j}", w.stage),
            WriteSource::Act => format!("stage {}: act by {:?} at {}", w.stage, w.node, w.start),
        })
        .collect();
    if let Some(first) = window_events.first() {
        result.fail(Witness::new(None, None, format!("activity in the final window: {first}")));
    }
    if let Some(&x) = window_positions.first() {
        result.fail(Witness::new(
            Some(settled_from[x as usize]),
            None,
            format!("A_s({x}) changes inside the final window"),
        ));
    }
    let intervals: Vec<IntervalRow> = replay
        .intervals
        .iter()
        .map(|(&j, iv)| IntervalRow {
            j,
            phi: assigned_phi(j),
            moves: iv.move_count,
            last_move_stage: iv.last_move_stage,
            state: iv.state,
        })
        .collect();
    result.margins.push(Margin::new(
        "positions settled by the window",
        Some((settled_from.len() - window_positions.len()) as f64),
    ));
    result.margins.push(Margin::new(
        "moves",
        Some(intervals.iter().map(|r| r.moves as f64).sum()),
    ));
    result.with_data(LimitData {
        window_start: start,
        intervals,
        settled_from,
        window_events,
        window_positions,
    })
}

/// A segment `[n, n+|σ|)` written by an act is never changed afterwards,
/// by any node.
pub fn check_non_injury(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("non_injury");
    let replay = &run.replay;
    let stable = stable_path(replay, run.config.stability_window);
    let mut acts = 0;
    let mut on_path = 0;
    for (k, w) in replay.writes.iter().enumerate() {
        if w.source != WriteSource::Act || w.bits.is_empty() {
            continue;
        }
        acts += 1;
        on_path += path_from_str(&w.node).is_ok_and(|p| is_prefix_path(&p, &stable)) as usize;
        let injury = replay.writes[k + 1..].iter().find_map(|later| {
            (0..later.bits.len()).find_map(|d| {
                let x = later.start + d as u64;
                let own = x.checked_sub(w.start).and_then(|o| w.bits.get(o as usize))?;
                (later.bits.get(d) != Some(own)).then_some((later, x))
            })
        });
        if let Some((later, x)) = injury {
            let what = match later.source {
                WriteSource::MoveIn { j } => {
                    let (min, max) = interval_bounds(j).expect("replayed interval");
                    format!("move-in of I_{j} = [{min}, {max}]")
                }
                WriteSource::Act => format!("act by {:?}", later.node),
            };
            result.fail(Witness::new(
                Some(later.stage),
                Some(&w.node),
                format!(
                    "position {x} of the act at stage {} by {:?} changed at stage {} by the {what}",
                    w.stage, w.node, later.stage
                ),
            ));
        }
    }
    result.notes.push(format!(
        "{acts} acts, {on_path} by nodes on the stable path {:?}",
        path_to_string(&stable)
    ));
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::construction::{run, Event, EventKind};
    use crate::kc::RequestSet;
    use crate::reference::{reference_config, seeded_configs};

    #[test]
    fn window_bounds() {
        assert_eq!(window_start(500, 0.2), 400);
        assert_eq!(window_start(500, 1.0), 0);
        assert_eq!(window_start(0, 0.2), 0);
        assert_eq!(window_start(9, 0.2), 8);
    }

    #[test]
    fn reference_settles_and_is_quiet() {
        let config = reference_config();
        let out = run(&config, 500);
        let reqs = RequestSet::new();
        let r = Run::new(&config, &out.trace, &reqs);
        assert!(check_replay(&r).passed);
        let limit = check_moves_and_limit(&r);
        assert!(limit.passed, "{limit:?}");
        let settled = limit.data["settled_from"].as_array().unwrap();
        assert!(settled[..16].iter().all(|s| s.as_u64().unwrap() < 400));
        assert!(check_non_injury(&r).passed);
    }

    #[test]
    fn full_window_sees_the_whole_history() {
        let mut config = reference_config();
        config.stability_window = 1.0;
        let out = run(&config, 200);
        let reqs = RequestSet::new();
        let r = Run::new(&config, &out.trace, &reqs);
        let limit = check_moves_and_limit(&r);
        assert_eq!(limit.data["window_start"], 0);
        assert_eq!(limit.data["window_events"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn divergent_phi_never_moves() {
        let (_, config) = seeded_configs()
            .into_iter()
            .find(|(n, _)| *n == "divergent-phi")
            .unwrap();
        let out = run(&config, 100);
        let reqs = RequestSet::new();
        let r = Run::new(&config, &out.trace, &reqs);
        let limit = check_moves_and_limit(&r);
        assert!(limit.passed);
        assert!(limit.data["intervals"].as_array().unwrap().is_empty());
    }

    #[test]
    fn tampered_snapshot_is_located() {
        let config = reference_config();
        let mut out = run(&config, 40);
        for ev in &mut out.trace.events {
            if let crate::construction::EventKind::MoveIn { tau, .. } = &mut ev.kind {
                *tau = crate::bits::bs("0000");
            }
        }
        let reqs = RequestSet::new();
        let r = Run::new(&config, &out.trace, &reqs);
        let res = check_replay(&r);
        assert!(!res.passed);
        assert_eq!(res.witness.unwrap().stage, Some(31));
    }

    #[test]
    fn overwritten_act_is_an_injury() {
        let (_, config) = seeded_configs()
            .into_iter()
            .find(|(n, _)| *n == "acting-set")
            .unwrap();
        let mut out = run(&config, 500);
        let act = out
            .trace
            .events
            .iter()
            .find(|ev| matches!(ev.kind, EventKind::Act { .. }))
            .unwrap()
            .clone();
        let EventKind::Act { n, sigma, .. } = &act.kind else {
            unreachable!()
        };
        // a later node rewrites the act's last bit
        let flipped = BitString::from_bits(vec![!sigma.get(sigma.len() - 1).unwrap()]);
        let start = n + sigma.len() as u64 - 1;
        let forged = Event {
            stage: 499,
            substage: Some(0),
            node_path: "inf.w".into(),
            kind: EventKind::Act {
                e: 1,
                c: 0,
                n: start,
                sigma: flipped.clone(),
                member: out.final_a.prefix(start as usize).concat(&flipped),
                l_prime: start + 1,
                v: Vec::new(),
            },
        };
        let at = out.trace.events.iter().position(|ev| ev.stage == 499).unwrap();
        out.trace.events.insert(at, forged);
        let r = Run::new(&config, &out.trace, &out.requests);
        let res = check_non_injury(&r);
        assert!(!res.passed);
        let w = res.witness.unwrap();
        assert_eq!(w.stage, Some(499));
        assert!(w.detail.contains(&format!("position {start}")), "{}", w.detail);
    }
}
