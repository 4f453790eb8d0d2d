//! Weight discipline: act-time `v_{α,i}` against `2^{−2e−i−2c−3}`, the
//! total request weight against one, and the compiled machine against the
//! requested description lengths.

use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::Complexity;
use crate::config::RunConfig;
use crate::construction::{n_lengths, EventKind};
use crate::dyadic::Dyadic;
use crate::kc::RequestSet;
use crate::machines::UniversalMachine;

use super::{CheckResult, Margin, Run, Witness};

/// The roster index the compiled request machine is installed at.
pub fn kc_install_index(config: &RunConfig) -> u32 {
    config.roster.len() as u32 + 1
}

#[derive(Debug, Serialize)]
struct WeightData {
    total: Dyadic,
    requests: usize,
    acts: usize,
    /// `d` in `K(θ) ≤ w + d` for the installed machine.
    install_constant: u32,
}

pub fn check_weights(run: &Run) -> CheckResult {
    let mut result = CheckResult::asserting("weights");
    let trace_requests = check_acts(run, &mut result);
    check_request_file(run.requests, &trace_requests, &mut result);
    let total = match run.requests.weight_of_construction() {
        Ok(b) => b.total,
        Err(err) => {
            result.fail(Witness::new(None, None, err.to_string()));
            run.requests.weight().clone()
        }
    };
    if let Some(r) = run.requests.requests().iter().find(|r| r.clamped) {
        result.fail(Witness::new(
            Some(r.source.stage),
            Some(&r.source.node),
            format!("request for {} had a negative exponent and was clamped", r.target),
        ));
    }
    let d = kc_install_index(run.config);
    match run.requests.compile() {
        Err(err) => result.fail(Witness::new(None, None, err.to_string())),
        Ok(table) => {
            for ((code, target), r) in table.codes.iter().zip(run.requests.requests()) {
                if code.len() as u32 != r.w {
                    result.fail(Witness::new(
                        Some(r.source.stage),
                        Some(&r.source.node),
                        format!("code {code} for {target} has length {} ≠ {}", code.len(), r.w),
                    ));
                }
            }
            if let Some((a, b)) = prefix_pair(table.codes.iter().map(|(c, _)| c)) {
                result.fail(Witness::new(None, None, format!("code {a} is a prefix of {b}")));
            }
            let mut um = run.config.roster.clone();
            let index = um.install(table.to_machine(1), 1);
            debug_assert_eq!(index, d);
            check_installed(&um, d, &table.codes, &mut result);
        }
    }
    result.margins.push(Margin::new("total weight", Some(total.to_f64())));
    result.margins.push(Margin::new("install constant d", Some(d as f64)));
    result.with_data(WeightData {
        total,
        requests: run.requests.len(),
        acts: run.replay.acts.len(),
        install_constant: d,
    })
}

/// Every act's `v` and the requests it enumerates. Returns the requests
/// found in the trace as `(w, target)`.
fn check_acts(run: &Run, result: &mut CheckResult) -> Vec<(u32, BitString)> {
    let mut trace_requests = Vec::new();
    let mut current: Option<(u64, String, u32, u32, Vec<Dyadic>)> = None;
    for ev in &run.trace.events {
        match &ev.kind {
            EventKind::Act {
                e, c, n, sigma, v, ..
            } => {
                close_act(current.take(), result);
                let end = n + sigma.len() as u64;
                let node = Some(ev.node_path.as_str());
                if v.len() != *e as usize + 1 {
                    result.fail(Witness::new(Some(ev.stage), node, format!("{} weights for e = {e}", v.len())));
                }
                let mut recorded = Vec::new();
                for aw in v {
                    let bound = Dyadic::pow2_neg(2 * e + aw.i + 2 * c + 3);
                    if aw.bound != bound {
                        result.fail(Witness::new(Some(ev.stage), node, format!("i = {}: bound {} ≠ {bound}", aw.i, aw.bound)));
                    }
                    if aw.v > bound {
                        result.fail(Witness::new(Some(ev.stage), node, format!("i = {}: v = {} exceeds {bound}", aw.i, aw.v)));
                    }
                    let lengths = n_lengths(aw.i, *n, end);
                    if aw.lengths != lengths {
                        result.fail(Witness::new(Some(ev.stage), node, format!("i = {}: lengths {:?} ≠ {lengths:?}", aw.i, aw.lengths)));
                    }
                    let recomputed = recompute_v(run, aw.i, lengths, ev.stage);
                    if recomputed != aw.v {
                        result.fail(Witness::new(Some(ev.stage), node, format!("i = {}: v = {} but the census gives {recomputed}", aw.i, aw.v)));
                    }
                    recorded.push(aw.v.clone());
                }
                current = Some((ev.stage, ev.node_path.clone(), *e, *c, recorded));
            }
            EventKind::Request {
                e, c, i, w, k, target, ..
            } => {
                trace_requests.push((*w, target.clone()));
                let node = Some(ev.node_path.as_str());
                if *k as i64 - *e as i64 - *c as i64 != *w as i64 {
                    result.fail(Witness::new(Some(ev.stage), node, format!("w = {w} but K^φ(θ) − e − c = {}", *k as i64 - *e as i64 - *c as i64)));
                }
                match &mut current {
                    Some((s, path, ae, _, sums)) if *s == ev.stage && *path == ev.node_path && ae == e => {
                        if let Some(sum) = sums.get_mut(*i as usize) {
                            *sum = subtract(sum, &Dyadic::pow2_neg(*k));
                        }
                    }
                    _ => result.fail(Witness::new(Some(ev.stage), node, "request outside an act")),
                }
            }
            _ => {}
        }
    }
    close_act(current, result);
    trace_requests
}

/// After an act's requests, each recorded `v` must be used up exactly.
fn close_act(act: Option<(u64, String, u32, u32, Vec<Dyadic>)>, result: &mut CheckResult) {
    let Some((s, node, _, _, rest)) = act else {
        return;
    };
    for (i, r) in rest.iter().enumerate() {
        if !r.is_zero() {
            result.fail(Witness::new(Some(s), Some(&node), format!("i = {i}: requests do not add up to v (left {r})")));
        }
    }
}

/// `a − b`, or a marker above any weight when `b > a`.
fn subtract(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if b > a {
        return Dyadic::from_integer(u64::MAX);
    }
    // a − b = (a·2^k − b·2^k) / 2^k with a shared exponent
    let k = a.exponent().max(b.exponent());
    let an = a.numerator() << (k - a.exponent());
    let bn = b.numerator() << (k - b.exponent());
    Dyadic::new(an - bn, k)
}

/// `v_{α,i}` at stage `s` from the census.
fn recompute_v(run: &Run, i: u32, lengths: Option<(u64, u64)>, s: u64) -> Dyadic {
    let Some((lo, hi)) = lengths else {
        return Dyadic::zero();
    };
    let phi = run.config.phi(i);
    run.census
        .outputs_with_length(lo as usize..=hi as usize)
        .filter_map(|theta| {
            let time = phi.at_stage(theta.len() as u64, s)?;
            match run.census.k_at(theta, time) {
                Complexity::Finite(k) => Some(Dyadic::pow2_neg(k)),
                Complexity::Infinite => None,
            }
        })
        .sum()
}

fn check_request_file(requests: &RequestSet, from_trace: &[(u32, BitString)], result: &mut CheckResult) {
    if requests.len() != from_trace.len() {
        result.fail(Witness::new(
            None,
            None,
            format!("request file has {} requests, the trace {}", requests.len(), from_trace.len()),
        ));
        return;
    }
    for (k, (r, (w, target))) in requests.requests().iter().zip(from_trace).enumerate() {
        if r.w != *w || r.target != *target {
            result.fail(Witness::new(
                Some(r.source.stage),
                Some(&r.source.node),
                format!("request {k} differs from the trace"),
            ));
        }
    }
}

/// Run `0^{d−1}1·code` for every code and compare with its target.
fn check_installed(um: &UniversalMachine, d: u32, codes: &[(BitString, BitString)], result: &mut CheckResult) {
    let mut prefix = BitString::zeros(d as usize - 1);
    prefix.push(true);
    for (code, target) in codes {
        let program = prefix.concat(code);
        let out = um.universal_run(&program, d as u64 + 2);
        if out.output() != Some(target) {
            result.fail(Witness::new(
                None,
                None,
                format!("installed machine maps {program} to {:?}, not {target}", out.output()),
            ));
        }
    }
}

/// Some code that is a prefix of another, if any.
fn prefix_pair<'a>(codes: impl Iterator<Item = &'a BitString>) -> Option<(BitString, BitString)> {
    let mut sorted: Vec<&BitString> = codes.collect();
    sorted.sort();
    // in lexicographic order a prefix sorts right before some extension of it
    sorted
        .windows(2)
        .find(|w| w[0].is_prefix_of(w[1]))
        .map(|w| (w[0].clone(), w[1].clone()))
}
