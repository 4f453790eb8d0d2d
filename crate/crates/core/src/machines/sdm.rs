//! The dovetailing wrapper that turns a partial function on strings into a
//! self-delimiting machine, plus the step bound it satisfies.

use crate::bits::{nth_string, BitString};
use crate::machines::RunOutcome;
use crate::phi::PhiSpec;

/// Result of [`sdm_wrap_run`]: the outcome plus the input bits read and the
/// number of `φ`-substeps spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdmRun {
    pub outcome: RunOutcome,
    pub consumed: BitString,
    pub substeps: u64,
}

/// Run the self-delimiting wrapper of `phi` on `input`, spending at most
/// `horizon` substeps.
///
/// Stage by stage the wrapper keeps a read prefix `τ`. In substage `t` it
/// advances `φ(τγ_i)` by one step for every `i ≤ t` (`γ_i` the `i`th
/// string), so the computation on `τγ_i` started in substage `i` converges
/// in substage `i + steps − 1`. On the first convergence, at `γ_{i0}`: if
/// `γ_{i0} = ε` it outputs `φ(τ)`, otherwise it reads one more input bit.
/// Arguments are strings through the length-lex numbering; the output is
/// the string numbered by `φ`'s value.
pub fn sdm_wrap_run(phi: &PhiSpec, input: &BitString, horizon: u64) -> SdmRun {
    let mut tau = BitString::empty();
    let mut substeps: u64 = 0;
    let diverged = |tau: BitString, substeps: u64| SdmRun {
        outcome: RunOutcome::Diverged { steps: substeps },
        consumed: tau,
        substeps,
    };
    loop {
        // (convergence substage, i) of the earliest computation so far.
        let mut first: Option<(u64, u64)> = None;
        let mut t: u64 = 0;
        let i0 = loop {
            let cost = t + 1;
            if substeps + cost > horizon {
                return diverged(tau, horizon);
            }
            substeps += cost;
            let candidate = tau.concat(&nth_string(t));
            if let Some(steps) = candidate.index().and_then(|x| phi.steps(x)) {
                let done_at = t + steps - 1;
                if first.is_none_or(|best| (done_at, t) < best) {
                    first = Some((done_at, t));
                }
            }
            if let Some((done_at, i)) = first {
                if done_at == t {
                    break i;
                }
            }
            t += 1;
        };
        if i0 == 0 {
            let value = tau
                .index()
                .and_then(|x| phi.value(x))
                .expect("converged computation has a value");
            return SdmRun {
                outcome: RunOutcome::Halted {
                    output: nth_string(value),
                    steps: substeps,
                },
                consumed: tau,
                substeps,
            };
        }
        match input.get(tau.len()) {
            Some(bit) => tau.push(bit),
            None => return diverged(tau, substeps),
        }
    }
}

/// `Σ_{i=1}^{σ+1} Σ_{j=1}^{2^i+s−2} j`: the number of `φ`-substeps within
/// which the wrapper reproduces a run of `φ` on an input of length `σ` that
/// takes `s ≥ 1` steps. `None` on overflow.
pub fn sdm_step_bound(sigma_len: u32, s: u64) -> Option<u128> {
    let mut total: u128 = 0;
    for i in 1..=sigma_len + 1 {
        let upper = 1u128
            .checked_shl(i)?
            .checked_add(s as u128)?
            .checked_sub(2)?;
        total = total.checked_add(upper.checked_mul(upper + 1)? / 2)?;
    }
    Some(total)
}
