//! Current-outcome patterns: each finitary outcome of a node is current on
//! one contiguous block of its visits, `x` never decreases, `stop` is
//! permanent, and no prefix of the final `f_s` is ever left of the later
//! `f_s`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::construction::{is_left_of, is_prefix_path, path_to_string, Outcome, Trace};

use super::{visits_by_node, CheckResult, Replay, Witness};

#[derive(Debug, Serialize)]
struct Pi2Data {
    nodes: usize,
    visits: usize,
    final_f: String,
}

pub fn check_pi2(trace: &Trace) -> CheckResult {
    let mut result = CheckResult::asserting("pi2");
    let visits = visits_by_node(trace);
    for (node, list) in &visits {
        check_node(&mut result, node, list);
    }
    let replay = Replay::new(trace);
    for (s, f, _) in &replay.stage_ends {
        if f.len() as u64 > s + 1 {
            result.fail(Witness::new(
                Some(*s),
                Some(&path_to_string(f)),
                format!("|f_s| = {} exceeds s + 1", f.len()),
            ));
        }
    }
    if let Some(final_f) = replay.final_f() {
        for len in 0..=final_f.len() {
            let alpha = &final_f[..len];
            let Some(first) = replay
                .stage_ends
                .iter()
                .position(|(_, f, _)| is_prefix_path(alpha, f))
            else {
                continue;
            };
            for (s, f, _) in &replay.stage_ends[first..] {
                if !is_prefix_path(alpha, f) && !is_left_of(alpha, f) {
                    result.fail(Witness::new(
                        Some(*s),
                        Some(&path_to_string(alpha)),
                        format!(
                            "f_s = {:?} is left of a prefix of the final f, which was current from stage {}",
                            path_to_string(f),
                            replay.stage_ends[first].0
                        ),
                    ));
                }
            }
        }
    }
    let data = Pi2Data {
        nodes: visits.len(),
        visits: visits.values().map(Vec::len).sum(),
        final_f: replay.final_f().map(|f| path_to_string(f)).unwrap_or_default(),
    };
    result.with_data(data)
}

fn check_node(result: &mut CheckResult, node: &str, list: &[(u64, Outcome, Option<u64>)]) {
    // index of the last visit showing each finitary outcome
    let mut last_seen: BTreeMap<Outcome, usize> = BTreeMap::new();
    let mut last_x: Option<(u64, u64)> = None;
    let mut stopped_at: Option<u64> = None;
    for (k, &(s, outcome, x)) in list.iter().enumerate() {
        if outcome != Outcome::Infinite {
            if let Some(&prev) = last_seen.get(&outcome) {
                if prev + 1 != k {
                    result.fail(Witness::new(
                        Some(s),
                        Some(node),
                        format!(
                            "outcome {outcome} current again after stage {}, having given way at stage {}",
                            list[prev].0,
                            list[prev + 1].0
                        ),
                    ));
                }
            }
            last_seen.insert(outcome, k);
        }
        if let Some(x) = x {
            if let Outcome::Finite(shown) = outcome {
                if shown != x {
                    result.fail(Witness::new(
                        Some(s),
                        Some(node),
                        format!("outcome w{shown} with x = {x}"),
                    ));
                }
            }
            if let Some((ps, px)) = last_x {
                if x < px {
                    result.fail(Witness::new(
                        Some(s),
                        Some(node),
                        format!("x fell from {px} (stage {ps}) to {x}"),
                    ));
                }
            }
            last_x = Some((s, x));
        }
        match (stopped_at, outcome) {
            (Some(ps), o) if o != Outcome::Stop => result.fail(Witness::new(
                Some(s),
                Some(node),
                format!("outcome {o} after stop at stage {ps}"),
            )),
            (None, Outcome::Stop) => stopped_at = Some(s),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{run, Event, EventKind};
    use crate::reference::reference_config;

    fn visit(stage: u64, node: &str, outcome: Outcome, x: Option<u64>) -> Event {
        Event {
            stage,
            substage: Some(0),
            node_path: node.into(),
            kind: EventKind::Visit {
                requirement: "D0".into(),
                outcome,
                x,
            },
        }
    }

    fn bare_trace(events: Vec<Event>) -> Trace {
        let mut t = run(&reference_config(), 0).trace;
        t.events = events;
        t
    }

    #[test]
    fn reference_trace_passes() {
        let out = run(&reference_config(), 200);
        let r = check_pi2(&out.trace);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn empty_trace_passes() {
        assert!(check_pi2(&bare_trace(vec![])).passed);
    }

    #[test]
    fn recurring_finitary_outcome_fails_with_stage_pair() {
        let t = bare_trace(vec![
            visit(1, "", Outcome::Finite(2), None),
            visit(2, "", Outcome::Finite(1), None),
            visit(3, "", Outcome::Finite(2), None),
        ]);
        let r = check_pi2(&t);
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert_eq!(w.stage, Some(3));
        assert!(w.detail.contains("stage 1") && w.detail.contains("stage 2"), "{}", w.detail);
    }

    #[test]
    fn decreasing_x_and_unstopping_fail() {
        let t = bare_trace(vec![
            visit(1, "", Outcome::Infinite, Some(5)),
            visit(2, "", Outcome::Infinite, Some(4)),
        ]);
        assert!(check_pi2(&t).witness.unwrap().detail.contains("fell"));
        let t = bare_trace(vec![
            visit(1, "w0", Outcome::Stop, None),
            visit(2, "w0", Outcome::Wait, None),
        ]);
        assert!(check_pi2(&t).witness.unwrap().detail.contains("after stop"));
    }
}
