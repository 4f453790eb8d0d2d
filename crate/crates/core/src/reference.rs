//! The reference roster, the reference run config and the seeded config
//! suite. `configs/` holds the same data as TOML; tests keep them equal.

use crate::bits::{bs, BitString};
use crate::config::{Caps, GBound, RunConfig, SetSpec};
use crate::machines::{
    Builtin, MachineKind, MachineSpec, Table, TableEntry, Template, UniversalMachine,
};
use crate::phi::{PhiRule, PhiSpec};

pub const REFERENCE_ROSTER_TOML: &str = include_str!("../../../configs/reference_roster.toml");

/// Indices of the machines other code needs by role.
pub mod index {
    pub const TABLE: u32 = 1;
    pub const SELF_DELIMITING_COPY: u32 = 2;
    pub const SOLOVAY: u32 = 3;
    pub const LENGTH_OF: u32 = 4;
    pub const UNPAIR_FIRST: u32 = 5;
    pub const CHOP: u32 = 6;
    pub const TRUNCATE_0: u32 = 7;
}

pub fn reference_roster() -> UniversalMachine {
    let entry = |input: &str, output: &str, cost| TableEntry {
        input: bs(input),
        output: bs(output),
        cost,
    };
    let kinds = vec![
        MachineKind::Table(
            Table::new(vec![
                entry("0", "0", 1),
                entry("10", "0000", 1),
                entry("110", "0000000000000000", 1),
                entry("1110", "0001", 40),
            ])
            .expect("prefix-free"),
        ),
        MachineKind::Template(Template::SelfDelimitingCopy),
        MachineKind::Builtin(Builtin::SolovayM),
        MachineKind::Builtin(Builtin::LengthOf),
        MachineKind::Builtin(Builtin::UnpairFirst),
        MachineKind::Builtin(Builtin::ChopM),
        MachineKind::Builtin(Builtin::TruncateN { i: 0 }),
        MachineKind::Builtin(Builtin::TruncateN { i: 1 }),
        MachineKind::Builtin(Builtin::TruncateN { i: 2 }),
        MachineKind::Builtin(Builtin::TruncateN { i: 3 }),
        MachineKind::Template(Template::Copy { width: 4 }),
        MachineKind::Template(Template::Pad { width: 4, zeros: 12 }),
        MachineKind::Template(Template::Constant { output: bs("0110") }),
    ];
    let roster = kinds
        .into_iter()
        .enumerate()
        .map(|(k, kind)| MachineSpec {
            index: k as u32 + 1,
            kind,
            overhead: 1,
        })
        .collect();
    UniversalMachine::new(roster).expect("indices in order")
}

pub fn reference_caps() -> Caps {
    Caps {
        position_cap: 256,
        program_length_cap: 15,
        step_horizon: 100_000,
        x_cap: 4096,
        max_interval: 4,
        tree_depth: None,
    }
}

/// `φ_0(x) = x + 1` converging at stage `x`; `S_0 = {ε}`; 500 stages.
pub fn reference_config() -> RunConfig {
    RunConfig {
        roster: reference_roster(),
        phi: vec![PhiSpec::successor(1)],
        sets: vec![SetSpec::new([(BitString::empty(), 0)])],
        caps: reference_caps(),
        g_bound: GBound::DoublyExponential,
        stability_window: 0.2,
        snapshot_len: 64,
        max_stage: 500,
    }
}

fn affine(slope: u64, intercept: u64, stage_slope: u64, domain_limit: Option<u64>) -> PhiSpec {
    PhiSpec {
        rule: PhiRule::Affine {
            slope,
            intercept,
            stage_slope,
            stage_intercept: 0,
            domain_limit,
        },
        order: slope >= 1 && domain_limit.is_none(),
    }
}

fn log2(intercept: u64) -> PhiSpec {
    PhiSpec {
        rule: PhiRule::Log2 {
            intercept,
            stage_slope: 1,
            stage_intercept: 0,
        },
        order: true,
    }
}

fn set(members: &[(&str, u64)]) -> SetSpec {
    SetSpec::new(members.iter().map(|&(s, stage)| (bs(s), stage)))
}

/// `A↾17` of the reference run once `I_2` and `I_4` are moved in.
const PREFIX_17: &str = "00000010000000000";

/// The seeded suite: deterministic configs that vary the φ-roster (fast,
/// slow, partial, divergent, non-order, logarithmic, tabulated) and the
/// sets `S_e` (empty, `{ε}`, late, and members reachable by an act).
pub fn seeded_configs() -> Vec<(&'static str, RunConfig)> {
    let base = reference_config();
    let with = |phi: Vec<PhiSpec>, sets: Vec<SetSpec>| RunConfig {
        phi,
        sets,
        ..base.clone()
    };
    let linear = |phi: Vec<PhiSpec>, sets: Vec<SetSpec>| RunConfig {
        phi,
        sets,
        g_bound: GBound::Linear,
        ..base.clone()
    };
    let act17 = format!("{PREFIX_17}1");
    let act17_long = format!("{PREFIX_17}0101");
    vec![
        ("reference", base.clone()),
        ("empty-set", with(vec![PhiSpec::successor(1)], vec![set(&[])])),
        ("divergent-phi", with(vec![PhiSpec::divergent()], vec![set(&[("", 0)])])),
        ("slow-phi", with(vec![PhiSpec::successor(4)], vec![set(&[])])),
        (
            "partial-phi",
            with(vec![affine(1, 1, 1, Some(40))], vec![set(&[("", 0)])]),
        ),
        (
            "constant-phi",
            with(vec![affine(0, 3, 1, None)], vec![set(&[("1", 5)])]),
        ),
        ("log2-phi", with(vec![log2(1)], vec![set(&[("", 0)])])),
        (
            "table-phi",
            with(
                vec![PhiSpec::table([(0, 2, 0), (1, 2, 3), (7, 9, 9), (31, 40, 60)])],
                vec![set(&[("0", 2)])],
            ),
        ),
        (
            "late-set",
            with(vec![PhiSpec::successor(1)], vec![set(&[(act17.as_str(), 300)])]),
        ),
        (
            "acting-set",
            with(vec![PhiSpec::successor(1)], vec![set(&[(act17_long.as_str(), 0)])]),
        ),
        (
            "linear-acting",
            linear(vec![PhiSpec::successor(1)], vec![set(&[("0000011", 0)])]),
        ),
        (
            "two-phis",
            with(
                vec![PhiSpec::successor(1), PhiSpec::successor(2)],
                vec![set(&[("", 0)]), set(&[])],
            ),
        ),
        (
            "two-phis-partial",
            linear(
                vec![PhiSpec::successor(1), affine(1, 2, 1, Some(20))],
                vec![set(&[("000001", 10)]), set(&[("00000011111", 50)])],
            ),
        ),
        (
            "three-phis",
            with(
                vec![PhiSpec::successor(1), log2(2), PhiSpec::successor(3)],
                vec![set(&[]), set(&[("", 0)]), set(&[])],
            ),
        ),
        (
            "divergent-acting",
            linear(vec![PhiSpec::divergent()], vec![set(&[("00000101", 0), ("1", 0)])]),
        ),
        (
            "eager-phi",
            with(vec![affine(1, 1, 0, None)], vec![set(&[])]),
        ),
        (
            "many-members",
            linear(
                vec![PhiSpec::successor(1)],
                vec![set(&[
                    ("111", 0),
                    ("0000001001", 40),
                    ("00000010000001", 80),
                    ("000000100000000000000000000000101", 200),
                ])],
            ),
        ),
        (
            "linear-two-sets",
            linear(
                vec![PhiSpec::successor(1), PhiSpec::successor(1)],
                vec![set(&[("00000010011", 0)]), set(&[("000000100000000000000110", 0)])],
            ),
        ),
        ("no-phi", with(vec![], vec![set(&[("", 0)])])),
        ("steep-phi", with(vec![affine(3, 0, 1, None)], vec![set(&[])])),
        (
            "log2-linear-acting",
            linear(vec![log2(0)], vec![set(&[("00000000000000011", 0)])]),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn roster_file_matches_builder() {
        let from_file =
            UniversalMachine::from_toml(REFERENCE_ROSTER_TOML, Path::new("reference_roster.toml"))
                .unwrap();
        assert_eq!(from_file, reference_roster());
    }

    #[test]
    fn role_indices() {
        let um = reference_roster();
        assert_eq!(um.builtin_index(Builtin::SolovayM), Some(index::SOLOVAY));
        assert_eq!(um.builtin_index(Builtin::LengthOf), Some(index::LENGTH_OF));
        assert_eq!(um.builtin_index(Builtin::UnpairFirst), Some(index::UNPAIR_FIRST));
        assert_eq!(um.builtin_index(Builtin::ChopM), Some(index::CHOP));
        assert_eq!(
            um.builtin_index(Builtin::TruncateN { i: 0 }),
            Some(index::TRUNCATE_0)
        );
        assert_eq!(
            um.machine(index::SELF_DELIMITING_COPY).unwrap().kind,
            MachineKind::Template(Template::SelfDelimitingCopy)
        );
    }

    #[test]
    fn seeded_suite_is_valid_and_distinct() {
        let configs = seeded_configs();
        assert!(configs.len() >= 20);
        let mut hashes: Vec<String> = configs.iter().map(|(_, c)| c.hash()).collect();
        for (name, c) in &configs {
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        hashes.sort();
        hashes.dedup();
        assert_eq!(hashes.len(), configs.len());
    }
}
