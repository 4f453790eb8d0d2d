//! The stage/substage construction of a deep, generic sequence `A`.
//!
//! At stage `s` the substages `t = 0, 1, …, s` visit the node of length `t`
//! selected by the outcomes produced earlier in the same stage; a node of
//! even length `2i` runs the `D_i` strategy, a node of odd length `2e+1`
//! runs the `G_e` strategy. `f_s` is the last node visited.
//!
//! Nodes exist only at depths below [`RunConfig::tree_depth`]; requirements
//! past the configured φ-roster use a divergent `φ_i`, and past the
//! configured sets an empty `S_e`. Caps never stop a run: reaching one is
//! recorded as a `cap_hit` event, once per node and cap.

pub mod outcome;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{enumerate_outputs, leftmost_missing, Census, Complexity, OutputTable};
use crate::config::RunConfig;
use crate::dyadic::Dyadic;
use crate::intervals::{
    assigned_phi, end_of, interval_bounds, intervals_overlapping, phi_intervals, phi_period,
};
use crate::kc::{Request, RequestSet, RequestSource};
use crate::machines::Builtin;

pub use outcome::{
    is_left_of, is_prefix_path, path_from_str, path_to_string, NodePath, Outcome, Requirement,
};
pub use trace::{ActWeight, Event, EventKind, Trace, TraceHeader, TRACE_SCHEMA};

/// Interval indices at or beyond this overflow `u64` positions.
const INTERVAL_LIMIT: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalState {
    Untouched,
    MovedIn,
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub j: u32,
    pub min: u64,
    pub max: u64,
    pub assigned_phi: u32,
    pub state: IntervalState,
    pub move_count: u64,
    pub last_move_stage: Option<u64>,
}

impl Interval {
    fn new(j: u32) -> Self {
        let (min, max) = interval_bounds(j).expect("interval index in range");
        Interval {
            j,
            min,
            max,
            assigned_phi: assigned_phi(j),
            state: IntervalState::Untouched,
            move_count: 0,
            last_move_stage: None,
        }
    }
}

/// `A_s`: explicit bits, zero beyond them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Approximation {
    bits: Vec<bool>,
}

impl Approximation {
    pub fn get(&self, x: u64) -> bool {
        self.bits.get(x as usize).copied().unwrap_or(false)
    }

    pub fn prefix(&self, n: u64) -> BitString {
        BitString::from_bits((0..n).map(|x| self.get(x)).collect())
    }

    /// Overwrite positions `[start, start + |segment|)`.
    pub fn splice(&mut self, start: u64, segment: &BitString) {
        let end = start as usize + segment.len();
        if self.bits.len() < end {
            self.bits.resize(end, false);
        }
        self.bits[start as usize..end].copy_from_slice(segment.as_bits());
    }

    pub fn explicit(&self) -> BitString {
        BitString::from_bits(self.bits.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "requirement", rename_all = "snake_case")]
pub enum NodeState {
    D {
        i: u32,
        l: u64,
        x: u64,
    },
    G {
        e: u32,
        c: u32,
        l: u64,
        l_prime: Option<u64>,
        satisfied: bool,
    },
}

impl NodeState {
    pub fn l(&self) -> u64 {
        match *self {
            NodeState::D { l, .. } | NodeState::G { l, .. } => l,
        }
    }

    pub fn l_prime(&self) -> Option<u64> {
        match *self {
            NodeState::G { l_prime, .. } => l_prime,
            NodeState::D { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub path: NodePath,
    pub init_order: u64,
    pub init_stage: u64,
    pub state: NodeState,
}

/// One candidate `θ ∈ N_{α,i}` with a finite time-bounded description.
struct Described {
    theta: BitString,
    k: u32,
}

/// Everything a finished run hands to the verifier and the CLI.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub final_a: BitString,
    pub requests: RequestSet,
    pub intervals: Vec<Interval>,
    pub nodes: Vec<Node>,
}

/// The construction state between stages.
#[derive(Debug, Clone)]
pub struct Construction {
    config: RunConfig,
    census: Arc<Census>,
    next_stage: u64,
    a: Approximation,
    intervals: Vec<Interval>,
    nodes: BTreeMap<NodePath, Node>,
    init_count: u64,
    requests: RequestSet,
    events: Vec<Event>,
    cap_hits: BTreeSet<(NodePath, &'static str)>,
    f_history: Vec<NodePath>,
}

/// The census the construction consults: programs up to the configured
/// length cap at the configured step horizon.
pub fn construction_census(config: &RunConfig) -> Census {
    Census::build(
        &config.roster,
        config.caps.program_length_cap,
        config.caps.step_horizon,
    )
}

impl Construction {
    pub fn new(config: RunConfig) -> Self {
        let census = Arc::new(construction_census(&config));
        Construction::with_census(config, census)
    }

    pub fn with_census(config: RunConfig, census: Arc<Census>) -> Self {
        Construction {
            config,
            census,
            next_stage: 0,
            a: Approximation::default(),
            intervals: Vec::new(),
            nodes: BTreeMap::new(),
            init_count: 0,
            requests: RequestSet::new(),
            events: Vec::new(),
            cap_hits: BTreeSet::new(),
            f_history: Vec::new(),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn census(&self) -> &Arc<Census> {
        &self.census
    }

    /// The stage [`Construction::run_stage`] will execute next.
    pub fn next_stage(&self) -> u64 {
        self.next_stage
    }

    pub fn a(&self) -> &Approximation {
        &self.a
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval_state(&self, j: u32) -> IntervalState {
        self.intervals
            .get(j as usize)
            .map_or(IntervalState::Untouched, |iv| iv.state)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn requests(&self) -> &RequestSet {
        &self.requests
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn f_history(&self) -> &[NodePath] {
        &self.f_history
    }

    /// Run stages until `max_stage` has been executed.
    pub fn run_until(&mut self, max_stage: u64) {
        while self.next_stage <= max_stage {
            self.run_stage();
        }
    }

    pub fn run_stage(&mut self) {
        let s = self.next_stage;
        let depth = self.config.tree_depth() as u64;
        let mut path: NodePath = Vec::new();
        let mut f = Vec::new();
        for t in 0..=s.min(depth - 1) {
            let outcome = match Requirement::of_len(path.len()) {
                Requirement::D(i) => self.visit_d(&path, i, s, t),
                Requirement::G(e) => self.visit_g(&path, e, s, t),
            };
            f = path.clone();
            path.push(outcome);
        }
        let snapshot = self.a.prefix(self.config.snapshot_len as u64);
        self.emit(
            s,
            None,
            &[],
            EventKind::StageEnd {
                f: path_to_string(&f),
                snapshot,
            },
        );
        self.f_history.push(f);
        self.next_stage += 1;
    }

    pub fn finish(self) -> RunOutput {
        let header = TraceHeader {
            schema: TRACE_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.config.hash(),
            stages: self.next_stage.saturating_sub(1),
            snapshot_len: self.config.snapshot_len,
        };
        RunOutput {
            trace: Trace {
                header,
                events: self.events,
            },
            final_a: self.a.explicit(),
            requests: self.requests,
            intervals: self.intervals,
            nodes: self.nodes.into_values().collect(),
        }
    }

    fn emit(&mut self, stage: u64, substage: Option<u64>, path: &[Outcome], kind: EventKind) {
        self.events.push(Event {
            stage,
            substage,
            node_path: path_to_string(path),
            kind,
        });
    }

    fn cap_hit(&mut self, path: &[Outcome], cap: &'static str, s: u64, t: u64, detail: String) {
        if self.cap_hits.insert((path.to_vec(), cap)) {
            self.emit(
                s,
                Some(t),
                path,
                EventKind::CapHit {
                    cap: cap.to_string(),
                    detail,
                },
            );
        }
    }

    fn interval_mut(&mut self, j: u32) -> &mut Interval {
        while self.intervals.len() <= j as usize {
            let next = self.intervals.len() as u32;
            self.intervals.push(Interval::new(next));
        }
        &mut self.intervals[j as usize]
    }

    fn max_l_and_l_prime(&self) -> (u64, u64) {
        let max_l = self.nodes.values().map(|n| n.state.l()).max().unwrap_or(0);
        let max_lp = self
            .nodes
            .values()
            .filter_map(|n| n.state.l_prime())
            .max()
            .unwrap_or(0);
        (max_l, max_lp)
    }

    fn init_node(&mut self, path: &[Outcome], state: NodeState, s: u64, t: u64) {
        let (requirement, l, c) = match &state {
            NodeState::D { i, l, .. } => (format!("D{i}"), *l, None),
            NodeState::G { e, c, l, .. } => (format!("G{e}"), *l, Some(*c)),
        };
        self.nodes.insert(
            path.to_vec(),
            Node {
                path: path.to_vec(),
                init_order: self.init_count,
                init_stage: s,
                state,
            },
        );
        self.init_count += 1;
        self.emit(s, Some(t), path, EventKind::NodeInit { requirement, l, c });
    }

    fn visit_d(&mut self, path: &NodePath, i: u32, s: u64, t: u64) -> Outcome {
        if !self.nodes.contains_key(path) {
            let l = if path.is_empty() {
                0
            } else {
                let (max_l, max_lp) = self.max_l_and_l_prime();
                max_l.max(max_lp) + 1
            };
            self.init_node(path, NodeState::D { i, l, x: 0 }, s, t);
        }
        let NodeState::D { l, x: start, .. } = self.nodes[path].state else {
            unreachable!("even-length nodes carry D requirements")
        };
        let phi = self.config.phi(i);
        let x_cap = self.config.caps.x_cap;
        let mut x = start;
        loop {
            if x >= x_cap {
                self.cap_hit(path, "x_cap", s, t, format!("x reached {x_cap}"));
                break;
            }
            if phi.at_stage(x, s).is_none() {
                break;
            }
            self.scan_and_move(path, i, l, x, s, t);
            x += 1;
        }
        if let NodeState::D { x: stored, .. } = &mut self.nodes.get_mut(path).expect("present").state
        {
            *stored = x;
        }
        let outcome = if x > start {
            Outcome::Infinite
        } else {
            Outcome::Finite(x)
        };
        self.emit(
            s,
            Some(t),
            path,
            EventKind::Visit {
                requirement: format!("D{i}"),
                outcome,
                x: Some(x),
            },
        );
        outcome
    }

    /// D-strategy step 4 at argument `x`.
    fn scan_and_move(&mut self, path: &[Outcome], i: u32, l: u64, x: u64, s: u64, t: u64) {
        let phi = self.config.phi(i);
        let period = phi_period(i);
        let mut chosen = None;
        for j in phi_intervals(i) {
            let target = j + period;
            if target >= INTERVAL_LIMIT || end_of(target) > x {
                break;
            }
            let min = interval_bounds(j).expect("in range").0;
            let open = self.interval_state(j) != IntervalState::MovedIn;
            if open && min > l {
                if let Some(b) = phi.at_stage(end_of(target), s) {
                    chosen = Some((j, b));
                    break;
                }
            }
        }
        let Some((j, b)) = chosen else { return };
        if j > self.config.caps.max_interval {
            self.cap_hit(
                path,
                "max_interval",
                s,
                t,
                format!("I_{j} qualifies at x = {x}"),
            );
            return;
        }
        let um = &self.config.roster;
        let trunc = um
            .builtin_index(Builtin::TruncateN { i })
            .expect("validated roster");
        let chop = um.builtin_index(Builtin::ChopM).expect("validated roster");
        let budget = um
            .overhead_g(trunc, b)
            .and_then(|g| um.overhead_g(chop, g))
            .expect("indices in roster");
        let maxlen = (1usize << j) - 1;
        let table = self.output_table(maxlen, budget);
        let tau = leftmost_missing(1 << j, &table);
        let iv = self.interval_mut(j);
        let (min, max) = (iv.min, iv.max);
        iv.state = IntervalState::MovedIn;
        iv.move_count += 1;
        iv.last_move_stage = Some(s);
        let move_count = iv.move_count;
        self.a.splice(min, &tau);
        self.emit(
            s,
            Some(t),
            path,
            EventKind::MoveIn {
                j,
                i,
                tau,
                b,
                budget,
                maxlen,
                move_count,
            },
        );
        let refreshed: Vec<u32> = self
            .intervals
            .iter()
            .filter(|iv| iv.state == IntervalState::MovedIn && iv.min > max)
            .map(|iv| iv.j)
            .collect();
        for k in refreshed {
            self.intervals[k as usize].state = IntervalState::Fresh;
            self.emit(s, Some(t), path, EventKind::Fresh { j: k });
        }
    }

    fn output_table(&self, maxlen: usize, steps: u64) -> OutputTable {
        if self.census.covers(maxlen, steps) {
            self.census.output_table(maxlen, steps)
        } else {
            enumerate_outputs(&self.config.roster, maxlen, steps)
        }
    }

    fn visit_g(&mut self, path: &NodePath, e: u32, s: u64, t: u64) -> Outcome {
        if !self.nodes.contains_key(path) {
            let state = self.fresh_g_state(path, e);
            self.init_node(path, state, s, t);
        }
        let NodeState::G {
            c, l, satisfied, ..
        } = self.nodes[path].state
        else {
            unreachable!("odd-length nodes carry G requirements")
        };
        let outcome = if satisfied || self.try_act(path, e, c, l, s, t) {
            Outcome::Stop
        } else {
            Outcome::Wait
        };
        self.emit(
            s,
            Some(t),
            path,
            EventKind::Visit {
                requirement: format!("G{e}"),
                outcome,
                x: None,
            },
        );
        outcome
    }

    fn fresh_g_state(&self, path: &[Outcome], e: u32) -> NodeState {
        let c = self
            .nodes
            .values()
            .filter(|n| matches!(n.state, NodeState::G { e: other, .. } if other == e))
            .count() as u32;
        let mut l = self.config.g_bound.eval(e, c).saturating_add(1);
        for iv in &self.intervals {
            let i = iv.assigned_phi;
            let finitary = path
                .get(2 * i as usize)
                .is_some_and(|o| o.is_finitary_d());
            if iv.move_count > 0 && i <= e && finitary {
                let beyond = iv.j + phi_period(i);
                if beyond < INTERVAL_LIMIT {
                    l = l.max(end_of(beyond));
                }
            }
        }
        for n in self.nodes.values() {
            if let Some(lp) = n.state.l_prime() {
                l = l.max(lp + 1);
            }
        }
        NodeState::G {
            e,
            c,
            l,
            l_prime: None,
            satisfied: false,
        }
    }

    /// Search `n ∈ [l_α, position_cap]` and members of `S_e[s]`; act on the
    /// first pair meeting both side conditions.
    fn try_act(&mut self, path: &NodePath, e: u32, c: u32, l: u64, s: u64, t: u64) -> bool {
        let set = self.config.set(e);
        let members: Vec<BitString> = set.at_stage(s).cloned().collect();
        let longest = members.iter().map(|m| m.len() as u64).max();
        let Some(longest) = longest else {
            return false;
        };
        let cap = self.config.caps.position_cap;
        let mut n = l;
        while n <= cap.min(longest) {
            let prefix = self.a.prefix(n);
            for m in &members {
                if (m.len() as u64) < n || !prefix.is_prefix_of(m) {
                    continue;
                }
                let sigma = m.suffix_from(n as usize);
                let end = n + sigma.len() as u64;
                if !self.overlaps_settled(path, e, n, end) {
                    continue;
                }
                let weights = self.weights(e, c, n, end, s);
                if weights.iter().all(|(w, _)| w.v <= w.bound) {
                    self.act(path, e, c, n, sigma, m.clone(), weights, s, t);
                    return true;
                }
            }
            n += 1;
        }
        if longest > cap {
            let prefix = self.a.prefix(cap + 1);
            if members
                .iter()
                .any(|m| m.len() as u64 > cap && prefix.is_prefix_of(m))
            {
                self.cap_hit(
                    path,
                    "position_cap",
                    s,
                    t,
                    format!("members extend A↾{} beyond the search range", cap + 1),
                );
            }
        }
        false
    }

    /// Condition (a): every interval meeting `[n, end)` whose `φ_i` (`i ≤ e`)
    /// has outcome `∞` on this path is moved in.
    fn overlaps_settled(&self, path: &[Outcome], e: u32, n: u64, end: u64) -> bool {
        intervals_overlapping(n, end).all(|j| {
            let i = assigned_phi(j);
            let infinite = i <= e && path.get(2 * i as usize) == Some(&Outcome::Infinite);
            !infinite || self.interval_state(j) == IntervalState::MovedIn
        })
    }

    /// `v_{α,i}` for `i ≤ e` with the described members of `N_{α,i}`.
    fn weights(&self, e: u32, c: u32, n: u64, end: u64, s: u64) -> Vec<(ActWeight, Vec<Described>)> {
        (0..=e)
            .map(|i| {
                let bound = Dyadic::pow2_neg(2 * e + i + 2 * c + 3);
                let Some((lo, hi)) = n_lengths(i, n, end) else {
                    return (
                        ActWeight {
                            i,
                            v: Dyadic::zero(),
                            bound,
                            lengths: None,
                        },
                        Vec::new(),
                    );
                };
                let phi = self.config.phi(i);
                let described: Vec<Described> = self
                    .census
                    .outputs_with_length(lo as usize..=hi as usize)
                    .filter_map(|theta| {
                        let time = phi.at_stage(theta.len() as u64, s)?;
                        match self.census.k_at(theta, time) {
                            Complexity::Finite(k) => Some(Described {
                                theta: theta.clone(),
                                k,
                            }),
                            Complexity::Infinite => None,
                        }
                    })
                    .collect();
                let v = described.iter().map(|d| Dyadic::pow2_neg(d.k)).sum();
                (
                    ActWeight {
                        i,
                        v,
                        bound,
                        lengths: Some((lo, hi)),
                    },
                    described,
                )
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn act(
        &mut self,
        path: &NodePath,
        e: u32,
        c: u32,
        n: u64,
        sigma: BitString,
        member: BitString,
        weights: Vec<(ActWeight, Vec<Described>)>,
        s: u64,
        t: u64,
    ) {
        let l_prime = n + sigma.len() as u64;
        self.a.splice(n, &sigma);
        if let NodeState::G {
            l_prime: lp,
            satisfied,
            ..
        } = &mut self.nodes.get_mut(path).expect("present").state
        {
            *lp = Some(l_prime);
            *satisfied = true;
        }
        let (v, described): (Vec<ActWeight>, Vec<Vec<Described>>) = weights.into_iter().unzip();
        self.emit(
            s,
            Some(t),
            path,
            EventKind::Act {
                e,
                c,
                n,
                sigma,
                member,
                l_prime,
                v,
            },
        );
        let node = path_to_string(path);
        for (i, list) in described.into_iter().enumerate() {
            let i = i as u32;
            for d in list {
                let exponent = d.k as i64 - e as i64 - c as i64;
                let clamped = exponent < 0;
                let w = exponent.max(0) as u32;
                self.requests.add_request(Request {
                    w,
                    target: d.theta.clone(),
                    source: RequestSource {
                        node: node.clone(),
                        e,
                        c,
                        i,
                        stage: s,
                    },
                    clamped,
                });
                self.emit(
                    s,
                    Some(t),
                    path,
                    EventKind::Request {
                        e,
                        c,
                        i,
                        w,
                        k: d.k,
                        target: d.theta,
                        clamped,
                    },
                );
            }
        }
    }
}

/// Lengths `[max I_{j0} + 1, max I_{j1} + 1]` of `N_{α,i}` for a
/// concatenating segment on positions `[n, end)`: `I_{j0}` is the first
/// `φ_i`-interval the segment overlaps and `I_{j1}` the least `φ_i`-interval
/// starting at or after `end`. `None` when the segment overlaps no
/// `φ_i`-interval.
pub fn n_lengths(i: u32, n: u64, end: u64) -> Option<(u64, u64)> {
    let j0 = intervals_overlapping(n, end).find(|&j| assigned_phi(j) == i)?;
    let j1 = phi_intervals(i)
        .take_while(|&j| j < INTERVAL_LIMIT)
        .find(|&j| interval_bounds(j).is_some_and(|(min, _)| min >= end))?;
    Some((end_of(j0), end_of(j1)))
}

/// Execute stages `0..=max_stage` of `config`.
pub fn run(config: &RunConfig, max_stage: u64) -> RunOutput {
    let mut c = Construction::new(config.clone());
    c.run_until(max_stage);
    c.finish()
}

/// [`run`] with a prebuilt census.
pub fn run_with_census(config: &RunConfig, census: Arc<Census>, max_stage: u64) -> RunOutput {
    let mut c = Construction::with_census(config.clone(), census);
    c.run_until(max_stage);
    c.finish()
}
