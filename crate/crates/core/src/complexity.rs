//! Step-bounded prefix-free complexity by exhaustive program enumeration.
//!
//! True `K` is not computable; everything here is relative to a step horizon
//! and a program-length cap. Two routes compute the same quantities:
//!
//! * the direct route ([`k_bounded`], [`enumerate_outputs`]) runs `𝕌` on
//!   every program for the requested number of steps;
//! * the [`Census`] runs every program once at a large horizon and answers
//!   later queries by filtering on the recorded step counts. This is exact
//!   because a run that halts within `h` steps halts with the same output
//!   and step count at every larger horizon.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::machines::{RunOutcome, UniversalMachine};

/// A complexity value at some horizon: a length, or "no description found".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complexity {
    Finite(u32),
    #[serde(with = "infinity_text")]
    Infinite,
}

mod infinity_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            Ok(())
        } else {
            Err(serde::de::Error::custom("expected \"inf\""))
        }
    }
}

impl Complexity {
    pub fn finite(self) -> Option<u32> {
        match self {
            Complexity::Finite(k) => Some(k),
            Complexity::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Complexity::Finite(_))
    }

    /// `2^{-K}`, which is zero for an infinite value.
    pub fn weight(self) -> Dyadic {
        match self {
            Complexity::Finite(k) => Dyadic::pow2_neg(k),
            Complexity::Infinite => Dyadic::zero(),
        }
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Complexity::Finite(k) => write!(f, "{k}"),
            Complexity::Infinite => f.write_str("inf"),
        }
    }
}

/// The time bound of a `K^t` query is not (yet) defined at the needed length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("time bound unavailable at length {length}")]
pub struct TimeBoundUnavailable {
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub length: u32,
    pub program: BitString,
}

/// Halting outputs with their shortest (then lex-least) witness program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputTable {
    pub outputs: BTreeMap<BitString, Witness>,
}

impl OutputTable {
    pub fn insert(&mut self, output: BitString, program: BitString) {
        let cand = Witness {
            length: program.len() as u32,
            program,
        };
        match self.outputs.get_mut(&output) {
            Some(w) if (w.length, &w.program) <= (cand.length, &cand.program) => {}
            Some(w) => *w = cand,
            None => {
                self.outputs.insert(output, cand);
            }
        }
    }

    /// Pointwise minimum; associative and commutative.
    pub fn merge(mut self, other: OutputTable) -> OutputTable {
        for (out, w) in other.outputs {
            self.insert(out, w.program);
        }
        self
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.outputs.contains_key(x)
    }

    pub fn get(&self, x: &BitString) -> Option<&Witness> {
        self.outputs.get(x)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

fn programs_of_length(len: usize) -> impl IndexedParallelIterator<Item = BitString> {
    assert!(len < 32, "program length {len} is beyond enumeration range");
    (0..1u32 << len)
        .into_par_iter()
        .map(move |v| BitString::from_uint(v as u64, len))
}

/// Run `𝕌` for `steps` steps on every program of length `≤ maxlen` and
/// collect the halting outputs.
pub fn enumerate_outputs(um: &UniversalMachine, maxlen: usize, steps: u64) -> OutputTable {
    (0..=maxlen)
        .map(|len| {
            programs_of_length(len)
                .fold(OutputTable::default, |mut table, p| {
                    if let RunOutcome::Halted { output, .. } = um.universal_run(&p, steps) {
                        table.insert(output, p);
                    }
                    table
                })
                .reduce(OutputTable::default, OutputTable::merge)
        })
        .fold(OutputTable::default(), OutputTable::merge)
}

/// `K_s(x)` restricted to programs of length `≤ cap`.
pub fn k_bounded(um: &UniversalMachine, x: &BitString, s: u64, cap: usize) -> Complexity {
    for len in 0..=cap {
        let hit = programs_of_length(len)
            .any(|p| um.universal_run(&p, s).output() == Some(x));
        if hit {
            return Complexity::Finite(len as u32);
        }
    }
    Complexity::Infinite
}

/// `K^t(x) = K_{t(|x|)}(x)`; `t` returns `None` where it is not defined.
pub fn k_timebound(
    um: &UniversalMachine,
    x: &BitString,
    t: impl Fn(u64) -> Option<u64>,
    cap: usize,
) -> Result<Complexity, TimeBoundUnavailable> {
    let length = x.len() as u64;
    let s = t(length).ok_or(TimeBoundUnavailable { length })?;
    Ok(k_bounded(um, x, s, cap))
}

/// The lexicographically least string of `length` bits that is not an
/// output in `table`.
///
/// Panics if every such string is present, which cannot happen for a table
/// built from programs shorter than `length`.
pub fn leftmost_missing(length: usize, table: &OutputTable) -> BitString {
    let present: HashSet<&BitString> = table
        .outputs
        .keys()
        .filter(|k| k.len() == length)
        .collect();
    BitString::all_of_length(length)
        .find(|s| !present.contains(s))
        .unwrap_or_else(|| panic!("all strings of length {length} are outputs"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
}

/// Every program of length `≤ cap` that halts within `horizon` steps.
#[derive(Debug, Clone)]
pub struct Census {
    cap: usize,
    horizon: u64,
    entries: Vec<CensusEntry>,
    /// Per output: entry indices sorted by steps, with the running best
    /// `(length, entry)` so far.
    by_output: HashMap<BitString, Vec<(u64, u32, usize)>>,
}

impl Census {
    pub fn build(um: &UniversalMachine, cap: usize, horizon: u64) -> Census {
        let mut entries = Vec::new();
        for len in 0..=cap {
            let found: Vec<CensusEntry> = programs_of_length(len)
                .filter_map(|p| match um.universal_run(&p, horizon) {
                    RunOutcome::Halted { output, steps } => Some(CensusEntry {
                        program: p,
                        output,
                        steps,
                    }),
                    RunOutcome::Diverged { .. } => None,
                })
                .collect();
            entries.extend(found);
        }
        let mut by_output: HashMap<BitString, Vec<(u64, u32, usize)>> = HashMap::new();
        for (k, e) in entries.iter().enumerate() {
            by_output
                .entry(e.output.clone())
                .or_default()
                .push((e.steps, e.program.len() as u32, k));
        }
        for list in by_output.values_mut() {
            // entries are in length-lex program order, so a stable sort by
            // steps keeps the lex-least program first among equal keys.
            list.sort_by_key(|&(steps, _, _)| steps);
            let mut best: Option<(u32, usize)> = None;
            for item in list.iter_mut() {
                let cur = (item.1, item.2);
                let b = match best {
                    Some(b) if b <= cur => b,
                    _ => cur,
                };
                best = Some(b);
                item.1 = b.0;
                item.2 = b.1;
            }
        }
        Census {
            cap,
            horizon,
            entries,
            by_output,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn entries(&self) -> &[CensusEntry] {
        &self.entries
    }

    /// Whether a query at `(maxlen, steps)` can be answered exactly.
    pub fn covers(&self, maxlen: usize, steps: u64) -> bool {
        maxlen <= self.cap && steps <= self.horizon
    }

    /// Shortest witness for `x` halting within `s` steps, as
    /// `(length, census entry)`. Steps beyond the census horizon are
    /// clamped to it.
    pub fn best_at(&self, x: &BitString, s: u64) -> Option<(u32, &CensusEntry)> {
        let list = self.by_output.get(x)?;
        let s = s.min(self.horizon);
        let pos = list.partition_point(|&(steps, _, _)| steps <= s);
        let &(_, len, k) = list.get(pos.checked_sub(1)?)?;
        Some((len, &self.entries[k]))
    }

    /// `K_s(x)` over programs of length `≤ cap`.
    pub fn k_at(&self, x: &BitString, s: u64) -> Complexity {
        match self.best_at(x, s) {
            Some((len, _)) => Complexity::Finite(len),
            None => Complexity::Infinite,
        }
    }

    /// `(K(x), s)` with `s` the least step count at which `K_s(x) = K(x)`,
    /// both at the census horizon.
    pub fn settling(&self, x: &BitString) -> Option<(u32, u64)> {
        let list = self.by_output.get(x)?;
        let (_, k, _) = *list.last()?;
        list.iter()
            .find(|&&(_, len, _)| len == k)
            .map(|&(steps, _, _)| (k, steps))
    }

    /// `K` at the census horizon.
    pub fn k(&self, x: &BitString) -> Complexity {
        self.k_at(x, self.horizon)
    }

    /// Same as [`enumerate_outputs`] when [`Census::covers`] holds.
    pub fn output_table(&self, maxlen: usize, steps: u64) -> OutputTable {
        let mut table = OutputTable::default();
        for e in &self.entries {
            if e.program.len() <= maxlen && e.steps <= steps {
                table.insert(e.output.clone(), e.program.clone());
            }
        }
        table
    }

    /// Distinct outputs whose length lies in `lengths`.
    pub fn outputs_with_length(
        &self,
        lengths: std::ops::RangeInclusive<usize>,
    ) -> impl Iterator<Item = &BitString> {
        let mut seen: Vec<&BitString> = self
            .by_output
            .keys()
            .filter(|o| lengths.contains(&o.len()))
            .collect();
        seen.sort();
        seen.into_iter()
    }

    /// Kraft sum `Σ 2^{−|ρ|}` over the halting programs.
    pub fn kraft_sum(&self) -> Dyadic {
        self.entries
            .iter()
            .map(|e| Dyadic::pow2_neg(e.program.len() as u32))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::machines::{MachineKind, Table, TableEntry, Template};

    fn m1_roster() -> UniversalMachine {
        let mut um = UniversalMachine::default();
        um.install(
            MachineKind::Table(
                Table::new(vec![TableEntry {
                    input: bs("0"),
                    output: bs("0"),
                    cost: 1,
                }])
                .unwrap(),
            ),
            1,
        );
        um
    }

    fn richer_roster() -> UniversalMachine {
        let mut um = m1_roster();
        um.install(MachineKind::Template(Template::SelfDelimitingCopy), 1);
        um.install(MachineKind::Template(Template::Copy { width: 2 }), 2);
        um.install(
            MachineKind::Template(Template::Constant { output: bs("0") }),
            1,
        );
        um
    }

    #[test]
    fn empty_roster_describes_nothing() {
        let um = UniversalMachine::default();
        assert_eq!(k_bounded(&um, &bs("0"), 1000, 6), Complexity::Infinite);
        assert!(enumerate_outputs(&um, 6, 1000).is_empty());
    }

    #[test]
    fn k_bounded_examples() {
        let um = m1_roster();
        assert_eq!(k_bounded(&um, &bs("0"), 3, 4), Complexity::Finite(2));
        assert_eq!(k_bounded(&um, &bs("0"), 2, 4), Complexity::Infinite);
    }

    #[test]
    fn k_timebound_examples() {
        let um = m1_roster();
        assert_eq!(k_timebound(&um, &bs("0"), |_| Some(3), 4), Ok(Complexity::Finite(2)));
        assert_eq!(k_timebound(&um, &bs("0"), |_| Some(2), 4), Ok(Complexity::Infinite));
        assert_eq!(
            k_timebound(&um, &bs("0"), |_| None, 4),
            Err(TimeBoundUnavailable { length: 1 })
        );
    }

    #[test]
    fn enumerate_examples() {
        let um = m1_roster();
        assert!(enumerate_outputs(&um, 0, 100).is_empty());
        let t = enumerate_outputs(&um, 2, 3);
        assert_eq!(t.len(), 1);
        assert_eq!(
            t.get(&bs("0")),
            Some(&Witness {
                length: 2,
                program: bs("10")
            })
        );
    }

    #[test]
    fn leftmost_missing_examples() {
        let mut t = OutputTable::default();
        assert_eq!(leftmost_missing(2, &t), bs("00"));
        t.insert(bs("000"), bs("1"));
        t.insert(bs("001"), bs("01"));
        assert_eq!(leftmost_missing(3, &t), bs("010"));
        let mut t1 = OutputTable::default();
        t1.insert(bs("0"), bs("10"));
        assert_eq!(leftmost_missing(1, &t1), bs("1"));
    }

    #[test]
    fn census_agrees_with_direct_route() {
        let um = richer_roster();
        let census = Census::build(&um, 8, 1000);
        for steps in [0, 3, 4, 5, 7, 9, 12, 1000] {
            for maxlen in 0..=8 {
                assert_eq!(
                    census.output_table(maxlen, steps),
                    enumerate_outputs(&um, maxlen, steps),
                    "maxlen {maxlen}, steps {steps}"
                );
            }
            for x in BitString::all_up_to(3) {
                assert_eq!(census.k_at(&x, steps), k_bounded(&um, &x, steps, 8), "{x:?}");
            }
        }
    }

    #[test]
    fn settling_is_the_first_step_of_the_final_value() {
        let um = richer_roster();
        let census = Census::build(&um, 8, 1000);
        for x in BitString::all_up_to(3) {
            let Some((k, s)) = census.settling(&x) else {
                assert_eq!(census.k(&x), Complexity::Infinite);
                continue;
            };
            assert_eq!(k_bounded(&um, &x, s, 8), Complexity::Finite(k));
            assert_ne!(k_bounded(&um, &x, s - 1, 8), Complexity::Finite(k));
        }
    }

    #[test]
    fn monotone_in_steps_and_cap() {
        let um = richer_roster();
        for x in BitString::all_up_to(2) {
            let mut grid = Vec::new();
            for s in [2, 4, 6, 8, 20] {
                for cap in [2, 4, 6, 8] {
                    grid.push((s, cap, k_bounded(&um, &x, s, cap)));
                }
            }
            for &(s, c, k) in &grid {
                for &(s2, c2, k2) in &grid {
                    if s <= s2 && c <= c2 {
                        assert!(k >= k2, "{x:?}: K({s},{c})={k} < K({s2},{c2})={k2}");
                    }
                }
            }
        }
    }

    #[test]
    fn witness_lengths_agree_with_k_bounded() {
        let um = richer_roster();
        let table = enumerate_outputs(&um, 7, 9);
        for (x, w) in &table.outputs {
            assert_eq!(k_bounded(&um, x, 9, 7), Complexity::Finite(w.length));
        }
    }

    #[test]
    fn leftmost_missing_is_incompressible() {
        let um = richer_roster();
        for len in 1..=6 {
            let table = enumerate_outputs(&um, len - 1, 50);
            let tau = leftmost_missing(len, &table);
            assert!(!table.contains(&tau));
        }
    }

    #[test]
    fn infinity_orders_last_and_weighs_nothing() {
        assert!(Complexity::Finite(u32::MAX) < Complexity::Infinite);
        assert!(Complexity::Infinite.weight().is_zero());
        assert_eq!(serde_json::to_string(&Complexity::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Complexity::Finite(3)).unwrap(), "3");
        let back: Complexity = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, Complexity::Infinite);
    }
}
