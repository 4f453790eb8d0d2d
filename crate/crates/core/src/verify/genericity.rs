//! Each finite `S_e` is met or avoided by the final `A`.

use serde::Serialize;

use crate::bits::BitString;
use crate::config::SetSpec;

use super::{CheckResult, Margin, Run, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "resolution", rename_all = "snake_case")]
pub enum Resolution {
    /// `A↾n ∈ S_e`.
    Meets { n: u64, member: BitString },
    /// No member of `S_e` extends `A↾n`.
    Avoids { n: u64 },
}

/// Resolve every configured `S_e` (all members, whatever their stage)
/// against `a`, zero beyond its explicit bits.
pub fn resolve_sets(sets: &[SetSpec], a: &BitString) -> Vec<Resolution> {
    sets.iter().map(|set| resolve(set, a)).collect()
}

fn resolve(set: &SetSpec, a: &BitString) -> Resolution {
    let bit = |x: usize| a.get(x).unwrap_or(false);
    let matches = |m: &BitString, n: usize| (0..n).all(|x| m.get(x) == Some(bit(x)));
    let mut members: Vec<&BitString> = set.members.iter().map(|m| &m.string).collect();
    members.sort_by(|x, y| x.cmp_length_lex(y));
    if let Some(m) = members.iter().find(|m| matches(m, m.len())) {
        return Resolution::Meets {
            n: m.len() as u64,
            member: (*m).clone(),
        };
    }
    // a finite set has no member extending A↾n once n passes its longest member
    let longest = members.iter().map(|m| m.len()).max().unwrap_or(0);
    let n = (0..=longest + 1)
        .find(|&n| !members.iter().any(|m| m.len() >= n && matches(m, n)))
        .expect("n = longest + 1 qualifies");
    Resolution::Avoids { n: n as u64 }
}

/// Every set resolves by finiteness; asserted is that every set some node
/// acted on ends up met.
pub fn check_genericity(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("genericity");
    let resolutions = resolve_sets(&run.config.sets, &run.replay.final_a());
    for (e, r) in resolutions.iter().enumerate() {
        result.notes.push(format!("S_{e}: {r:?}"));
    }
    for act in &run.replay.acts {
        if matches!(resolutions.get(act.e as usize), Some(Resolution::Avoids { .. })) {
            result.fail(Witness::new(
                Some(act.stage),
                Some(&act.node),
                format!(
                    "S_{} avoided although the act at stage {} extended A to {}",
                    act.e, act.stage, act.member
                ),
            ));
        }
    }
    let met = resolutions
        .iter()
        .filter(|r| matches!(r, Resolution::Meets { .. }))
        .count();
    result.margins.push(Margin::new("sets met", Some(met as f64)));
    result.with_data(resolutions)
}
