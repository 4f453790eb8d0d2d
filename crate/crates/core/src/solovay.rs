//! The Solovay function `h`, settling times `s_n`, the strings
//! `τ_n = σ_n 0^{⟨n,s_n⟩−|σ_n|}` and the inequality chain
//!
//! ```text
//! K^t(τ_n) ≤ h(⟨n,s_n⟩) + c₁,   K(n) ≤ K(⟨n,s_n⟩) + c₂,   K(|τ_n|) ≤ K(τ_n) + c₃
//! ```
//!
//! The halting oracle is replaced by a census at a fixed program-length cap
//! and step horizon, so every value here is relative to that pair. Numbers
//! `n` are identified with `σ_n = nth_string(n)`.

use serde::{Deserialize, Serialize};

use crate::bits::{nth_string, pair, unpair, BitString};
use crate::complexity::{Census, Complexity};
use crate::machines::{Builtin, UniversalMachine};

pub const DEFAULT_CAP: usize = 20;
pub const DEFAULT_HORIZON: u64 = 100_000;

/// A value of `h`: a stage where `K_s(n)` changed, or the coarse bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolovayValue {
    Changed(u32),
    Marker(u32),
}

impl SolovayValue {
    pub fn value(self) -> u32 {
        match self {
            SolovayValue::Changed(k) | SolovayValue::Marker(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettlingRecord {
    pub n: u64,
    pub s_n: u64,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VEntry {
    pub n: u64,
    pub s_n: u64,
    pub tau: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VSet {
    pub entries: Vec<VEntry>,
    /// `n` with no program of length `≤ cap` halting within the horizon.
    pub unsettled: Vec<u64>,
}

/// One row of the chain. `None` marks a term that is infinite at the
/// horizon or a time bound beyond it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRow {
    pub n: u64,
    pub s_n: u64,
    pub tau_len: u64,
    /// `t(|τ_n|)`.
    pub time_bound: u64,
    pub kt_tau: Option<u32>,
    pub h: u32,
    pub k_n: u32,
    /// `K(⟨n,s_n⟩)`, which is also `K(|τ_n|)`.
    pub k_pair: Option<u32>,
    pub k_tau: Option<u32>,
    pub c1: Option<i64>,
    pub c2: Option<i64>,
    pub c3: Option<i64>,
    pub gaps: Vec<String>,
}

/// Constants of the three chain links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub c1: i64,
    pub c2: i64,
    pub c3: i64,
}

impl Triple {
    pub fn dominates(&self, other: &Triple) -> bool {
        self.c1 >= other.c1 && self.c2 >= other.c2 && self.c3 >= other.c3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSweep {
    pub cap: usize,
    pub horizon: u64,
    pub rows: Vec<ChainRow>,
    pub unsettled: Vec<u64>,
    /// Componentwise maximum of the per-row constants.
    pub measured: Triple,
    /// Program prefix lengths of the machines that witness each link.
    pub coding: Triple,
    /// Rows with a gap in some term.
    pub gapped: Vec<u64>,
}

impl ChainSweep {
    /// One triple (the coding constants) covers every row, and no row
    /// has a gap.
    pub fn holds(&self) -> bool {
        self.gapped.is_empty() && self.coding.dominates(&self.measured)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("n = {n} is unsettled at horizon {horizon} (no program of length ≤ {cap})")]
pub struct Unsettled {
    pub n: u64,
    pub cap: usize,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("roster has no {0} builtin")]
pub struct MissingBuiltin(pub &'static str);

/// A roster with its census, answering every query of this module.
#[derive(Debug, Clone)]
pub struct Solovay {
    um: UniversalMachine,
    census: Census,
}

impl Solovay {
    pub fn new(um: UniversalMachine, cap: usize, horizon: u64) -> Self {
        let census = Census::build(&um, cap, horizon);
        Solovay { um, census }
    }

    pub fn census(&self) -> &Census {
        &self.census
    }

    /// `2·cap + 1`: above every finite complexity the census can report.
    pub fn marker(&self) -> u32 {
        2 * self.census.cap() as u32 + 1
    }

    fn k_num_at(&self, n: u64, s: u64) -> Complexity {
        self.census.k_at(&nth_string(n), s)
    }

    /// `h(⟨n,s⟩)`: `K_s(n)` when it differs from `K_{s−1}(n)`.
    pub fn h(&self, code: u64) -> SolovayValue {
        let (n, s) = unpair(code);
        let marker = SolovayValue::Marker(self.marker());
        if s == 0 || s > self.census.horizon() {
            return marker;
        }
        match (self.k_num_at(n, s), self.k_num_at(n, s - 1)) {
            (Complexity::Finite(k), before) if before != Complexity::Finite(k) => {
                SolovayValue::Changed(k)
            }
            _ => marker,
        }
    }

    pub fn settling_time(&self, n: u64) -> Result<SettlingRecord, Unsettled> {
        self.census
            .settling(&nth_string(n))
            .map(|(k, s_n)| SettlingRecord { n, s_n, k })
            .ok_or(Unsettled {
                n,
                cap: self.census.cap(),
                horizon: self.census.horizon(),
            })
    }

    /// `τ_n` for every settled `n < n_max`.
    pub fn build_v(&self, n_max: u64) -> VSet {
        let mut entries = Vec::new();
        let mut unsettled = Vec::new();
        for n in 0..n_max {
            match self.settling_time(n) {
                Ok(rec) => entries.push(VEntry {
                    n,
                    s_n: rec.s_n,
                    tau: tau(n, rec.s_n),
                }),
                Err(_) => unsettled.push(n),
            }
        }
        VSet { entries, unsettled }
    }

    /// `t(ℓ) = g_M(ℓ)` for the solovay machine `M`. A witness for `τ_n`
    /// runs `𝕌` for `s_n ≤ ⟨n,s_n⟩ = |τ_n|` inner steps, so `t(|τ_n|)`
    /// covers it.
    pub fn time_bound(&self, length: u64) -> Result<u64, MissingBuiltin> {
        let m = self
            .um
            .builtin_index(Builtin::SolovayM)
            .ok_or(MissingBuiltin("solovay_m"))?;
        Ok(self.um.overhead_g(m, length).expect("index in roster"))
    }

    pub fn check_chain(&self, entry: &VEntry) -> Result<ChainRow, MissingBuiltin> {
        let n = entry.n;
        let tau_len = entry.tau.len() as u64;
        let time_bound = self.time_bound(tau_len)?;
        let mut gaps = Vec::new();
        let h = self.h(pair(n, entry.s_n).expect("s_n within horizon"));
        let k_n = self.census.k(&nth_string(n)).finite().expect("settled");
        let kt_tau = if time_bound > self.census.horizon() {
            gaps.push(format!("t(|τ|) = {time_bound} beyond horizon"));
            None
        } else {
            self.census.k_at(&entry.tau, time_bound).finite()
        };
        let k_pair = self.census.k(&nth_string(tau_len)).finite();
        let k_tau = self.census.k(&entry.tau).finite();
        for (name, v) in [("K^t(τ)", kt_tau), ("K(⟨n,s⟩)", k_pair), ("K(τ)", k_tau)] {
            if v.is_none() {
                gaps.push(format!("{name} infinite at cap {}", self.census.cap()));
            }
        }
        let diff = |a: Option<u32>, b: Option<u32>| Some(a? as i64 - b? as i64);
        Ok(ChainRow {
            n,
            s_n: entry.s_n,
            tau_len,
            time_bound,
            kt_tau,
            h: h.value(),
            k_n,
            k_pair,
            k_tau,
            c1: diff(kt_tau, Some(h.value())),
            c2: diff(Some(k_n), k_pair),
            c3: diff(k_pair, k_tau),
            gaps,
        })
    }

    /// Build `V` for `n < n_max` and check every chain.
    pub fn sweep(&self, n_max: u64) -> Result<ChainSweep, MissingBuiltin> {
        let v = self.build_v(n_max);
        let rows: Vec<ChainRow> = v
            .entries
            .iter()
            .map(|e| self.check_chain(e))
            .collect::<Result<_, _>>()?;
        let max_of = |f: fn(&ChainRow) -> Option<i64>| rows.iter().filter_map(f).max().unwrap_or(0);
        let measured = Triple {
            c1: max_of(|r| r.c1),
            c2: max_of(|r| r.c2),
            c3: max_of(|r| r.c3),
        };
        let prefix = |b: Builtin, name| {
            self.um
                .builtin_index(b)
                .map(|e| e as i64)
                .ok_or(MissingBuiltin(name))
        };
        let coding = Triple {
            c1: prefix(Builtin::SolovayM, "solovay_m")?,
            c2: prefix(Builtin::UnpairFirst, "unpair_first")?,
            c3: prefix(Builtin::LengthOf, "length_of")?,
        };
        let gapped = rows.iter().filter(|r| !r.gaps.is_empty()).map(|r| r.n).collect();
        Ok(ChainSweep {
            cap: self.census.cap(),
            horizon: self.census.horizon(),
            rows,
            unsettled: v.unsettled,
            measured,
            coding,
            gapped,
        })
    }
}

/// `σ_n 0^{⟨n,s⟩−|σ_n|}`.
pub fn tau(n: u64, s: u64) -> BitString {
    let sigma = nth_string(n);
    let len = pair(n, s).expect("pair fits") as usize;
    sigma.concat(&BitString::zeros(len - sigma.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::reference::reference_roster;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn small() -> &'static Solovay {
        static S: OnceLock<Solovay> = OnceLock::new();
        S.get_or_init(|| Solovay::new(reference_roster(), 14, 10_000))
    }

    #[test]
    fn settling_examples() {
        // "0" has the single two-bit program 1·0 (table, cost 1, dispatch 2).
        assert_eq!(
            small().settling_time(1).unwrap(),
            SettlingRecord { n: 1, s_n: 3, k: 2 }
        );
        // ε only through the self-delimiting copy 01·0: 3 bits, 3 + 2 steps.
        assert_eq!(
            small().settling_time(0).unwrap(),
            SettlingRecord { n: 0, s_n: 5, k: 3 }
        );
        let empty = Solovay::new(UniversalMachine::default(), 6, 100);
        assert!(empty.settling_time(0).is_err());
    }

    #[test]
    fn h_examples() {
        let s = small();
        assert_eq!(s.marker(), 29);
        assert_eq!(s.h(pair(1, 0).unwrap()), SolovayValue::Marker(29));
        assert_eq!(s.h(pair(1, 3).unwrap()), SolovayValue::Changed(2));
        assert_eq!(s.h(pair(1, 4).unwrap()), SolovayValue::Marker(29));
        assert_eq!(s.h(pair(0, 5).unwrap()), SolovayValue::Changed(3));
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(0, 5), BitString::zeros(20));
        assert_eq!(tau(1, 3), BitString::zeros(13));
        assert_eq!(tau(2, 0), bs("100"));
        let v = small().build_v(8);
        assert_eq!(v.entries.len() + v.unsettled.len(), 8);
        for e in &v.entries {
            assert!(nth_string(e.n).is_prefix_of(&e.tau));
            assert_eq!(e.tau.len() as u64, pair(e.n, e.s_n).unwrap());
        }
    }

    #[test]
    fn chain_row_for_one() {
        let s = small();
        let entry = &s.build_v(2).entries[1];
        let row = s.check_chain(entry).unwrap();
        // 001·10 runs the table inside the solovay machine: 5 bits, 7 steps.
        assert_eq!((row.h, row.kt_tau, row.c1), (2, Some(5), Some(3)));
        assert_eq!(row.time_bound, 17);
        assert_eq!(row.k_n, 2);
    }

    #[test]
    fn sweep_constants_stay_below_coding_prefixes() {
        let sweep = small().sweep(8).unwrap();
        assert_eq!(sweep.coding, Triple { c1: 3, c2: 5, c3: 4 });
        assert!(sweep.coding.dominates(&sweep.measured), "{sweep:?}");
        for r in &sweep.rows {
            assert_eq!(r.h, r.k_n);
        }
    }

    proptest! {
        #[test]
        fn h_majorizes_horizon_complexity(n in 0u64..40, s in 0u64..60) {
            let sv = small();
            let code = pair(n, s).unwrap();
            match sv.census().k(&nth_string(n)) {
                Complexity::Finite(k) => prop_assert!(sv.h(code).value() >= k),
                Complexity::Infinite => prop_assert_eq!(sv.h(code), SolovayValue::Marker(sv.marker())),
            }
        }

        #[test]
        fn h_attains_at_settling(n in 0u64..40) {
            let sv = small();
            if let Ok(rec) = sv.settling_time(n) {
                prop_assert_eq!(sv.h(pair(n, rec.s_n).unwrap()), SolovayValue::Changed(rec.k));
            }
        }
    }
}
