//! Bounded request sets and their compilation into a prefix-free machine.
//!
//! A request `(w, θ)` asks for a description of `θ` of length `w`. When the
//! total weight `Σ 2^{−w}` is at most one, [`RequestSet::compile`] assigns
//! codes of exactly the requested lengths, online and in arrival order,
//! keeping the code set prefix-free.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::error::KcError;
use crate::machines::{MachineBody, MachineEntry, MachineKind, Table, TableEntry};

/// Which strategy node enumerated a request, and on whose behalf. Empty for
/// hand-written request files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RequestSource {
    pub node: String,
    pub e: u32,
    pub c: u32,
    pub i: u32,
    pub stage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub w: u32,
    pub target: BitString,
    #[serde(default)]
    pub source: RequestSource,
    /// The exponent would have been negative and was raised to zero.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clamped: bool,
}

impl Request {
    pub fn weight(&self) -> Dyadic {
        Dyadic::pow2_neg(self.w)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestSet {
    requests: Vec<Request>,
    weight: Dyadic,
}

/// `code ↦ target`, in request order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    pub codes: Vec<(BitString, BitString)>,
}

impl CodeTable {
    /// A table machine `code ↦ target`, each entry costing `cost` steps.
    pub fn to_machine(&self, cost: u64) -> MachineKind {
        let entries = self.entries(cost);
        MachineKind::Table(Table::new(entries).expect("compiled codes are prefix-free"))
    }

    /// A roster fragment that installs the compiled machine at `index`.
    pub fn to_roster_entry(&self, index: u32, cost: u64) -> MachineEntry {
        MachineEntry {
            index,
            overhead: 1,
            body: MachineBody::Table {
                entries: self.entries(cost),
            },
        }
    }

    fn entries(&self, cost: u64) -> Vec<TableEntry> {
        self.codes
            .iter()
            .map(|(code, target)| TableEntry {
                input: code.clone(),
                output: target.clone(),
                cost,
            })
            .collect()
    }
}

/// Per `(e, node, i)` sums of `2^{−w}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightBreakdown {
    pub total: Dyadic,
    pub parts: BTreeMap<(u32, String, u32), Dyadic>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("running request weight {running} disagrees with recomputed weight {recomputed}")]
pub struct WeightMismatch {
    pub running: Dyadic,
    pub recomputed: Dyadic,
}

impl RequestSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_requests(requests: impl IntoIterator<Item = Request>) -> Self {
        let mut set = RequestSet::new();
        for r in requests {
            set.add_request(r);
        }
        set
    }

    pub fn add_request(&mut self, r: Request) {
        self.weight += &r.weight();
        self.requests.push(r);
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn weight(&self) -> &Dyadic {
        &self.weight
    }

    pub fn is_bounded(&self) -> bool {
        self.weight <= Dyadic::one()
    }

    /// Kraft–Chaitin assignment. The free part of the code tree is kept as
    /// at most one free string per length (the binary expansion of the
    /// unused weight); a request of length `w` takes the free string of
    /// that length, or splits the longest free string shorter than `w`.
    pub fn compile(&self) -> Result<CodeTable, KcError> {
        let mut running = Dyadic::zero();
        for (k, r) in self.requests.iter().enumerate() {
            running += &r.weight();
            if running > Dyadic::one() {
                return Err(KcError::Overweight {
                    prefix_len: k + 1,
                    weight: running,
                });
            }
        }
        let mut free: BTreeMap<u32, BitString> = BTreeMap::new();
        free.insert(0, BitString::empty());
        let mut codes = Vec::with_capacity(self.requests.len());
        for r in &self.requests {
            let code = if let Some(code) = free.remove(&r.w) {
                code
            } else {
                let (&k, _) = free
                    .range(..r.w)
                    .next_back()
                    .expect("weight ≤ 1 leaves a shorter free string");
                let base = free.remove(&k).expect("present");
                // base 0^{w−k} is the code; base 0^{d}1 becomes free for
                // every d < w − k.
                let mut zeros = base.clone();
                for depth in k..r.w {
                    let mut sibling = zeros.clone();
                    sibling.push(true);
                    let previous = free.insert(depth + 1, sibling);
                    debug_assert!(previous.is_none());
                    zeros.push(false);
                }
                zeros
            };
            codes.push((code, r.target.clone()));
        }
        Ok(CodeTable { codes })
    }

    /// Recompute the weight from the provenance tags, grouped by
    /// `(e, node, i)`, and check it against the running weight.
    pub fn weight_of_construction(&self) -> Result<WeightBreakdown, WeightMismatch> {
        let mut parts: BTreeMap<(u32, String, u32), Dyadic> = BTreeMap::new();
        for r in &self.requests {
            let key = (r.source.e, r.source.node.clone(), r.source.i);
            *parts.entry(key).or_default() += &r.weight();
        }
        let total: Dyadic = parts.values().cloned().sum();
        if total != self.weight {
            return Err(WeightMismatch {
                running: self.weight.clone(),
                recomputed: total,
            });
        }
        Ok(WeightBreakdown { total, parts })
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.requests {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Self, crate::error::Error> {
        let mut set = RequestSet::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            set.add_request(serde_json::from_str(&line)?);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use proptest::prelude::*;

    fn req(w: u32, target: &str) -> Request {
        Request {
            w,
            target: bs(target),
            source: RequestSource {
                node: String::new(),
                e: 0,
                c: 0,
                i: 0,
                stage: 0,
            },
            clamped: false,
        }
    }

    fn assert_prefix_free(codes: &[(BitString, BitString)]) {
        for (a, (ca, _)) in codes.iter().enumerate() {
            for (b, (cb, _)) in codes.iter().enumerate() {
                assert!(a == b || !ca.is_prefix_of(cb), "{ca:?} ⊑ {cb:?}");
            }
        }
    }

    #[test]
    fn weights_accumulate_exactly() {
        let mut set = RequestSet::new();
        assert_eq!(set.weight(), &Dyadic::zero());
        set.add_request(req(1, "0"));
        assert_eq!(set.weight(), &Dyadic::pow2_neg(1));
        set.add_request(req(1, "1"));
        assert_eq!(set.weight(), &Dyadic::one());
        assert!(set.is_bounded());
        set.add_request(req(1, "00"));
        assert_eq!(set.weight().to_string(), "3/2");
        assert!(!set.is_bounded());
        assert_eq!(
            set.compile(),
            Err(KcError::Overweight {
                prefix_len: 3,
                weight: "3/2".parse().unwrap()
            })
        );
    }

    #[test]
    fn compile_examples() {
        let full = RequestSet::from_requests([req(1, "0"), req(1, "1")]);
        let codes = full.compile().unwrap().codes;
        assert_eq!(codes.iter().map(|c| c.0.len()).collect::<Vec<_>>(), vec![1, 1]);
        assert_prefix_free(&codes);

        let mixed = RequestSet::from_requests([req(2, "0"), req(1, "1"), req(2, "11")]);
        let codes = mixed.compile().unwrap().codes;
        // Hand run: ε splits into 00 (used), 01 and 1 free; then 1, then 01.
        assert_eq!(
            codes.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
            vec![bs("00"), bs("1"), bs("01")]
        );

        let single = RequestSet::from_requests([req(0, "101")]);
        assert_eq!(single.compile().unwrap().codes, vec![(BitString::empty(), bs("101"))]);
    }

    #[test]
    fn breakdown_matches_running_weight() {
        let mut a = req(3, "0");
        a.source.node = "inf".into();
        a.source.i = 1;
        let set = RequestSet::from_requests([a, req(2, "1"), req(2, "11")]);
        let b = set.weight_of_construction().unwrap();
        assert_eq!(b.total, "5/8".parse().unwrap());
        assert_eq!(b.parts.len(), 2);
        assert_eq!(RequestSet::new().weight_of_construction().unwrap().total, Dyadic::zero());
    }

    #[test]
    fn jsonl_roundtrip_preserves_weight() {
        let set = RequestSet::from_requests([req(3, "0"), req(5, "1101"), req(40, "")]);
        let mut buf = Vec::new();
        set.write_jsonl(&mut buf).unwrap();
        let back = RequestSet::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.weight(), set.weight());
    }

    proptest! {
        #[test]
        fn bounded_sets_compile_to_exact_prefix_free_codes(ws in proptest::collection::vec(0u32..10, 1..40)) {
            let mut set = RequestSet::new();
            for (k, &w) in ws.iter().enumerate() {
                let r = req(w, &format!("{:b}", k));
                let mut trial = set.clone();
                trial.add_request(r.clone());
                if trial.is_bounded() {
                    set = trial;
                }
            }
            let codes = set.compile().unwrap().codes;
            for ((code, _), r) in codes.iter().zip(set.requests()) {
                prop_assert_eq!(code.len() as u32, r.w);
            }
            assert_prefix_free(&codes);
        }
    }
}
