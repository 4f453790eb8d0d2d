//! Clocked partial functions `ℕ → ℕ`.
//!
//! A [`PhiSpec`] stands in for one entry `φ_i` of a listing of partial
//! computable functions: every argument either diverges or converges to a
//! value at a definite stage. `φ_{i,s}(x)` is defined exactly when the
//! convergence stage of `x` is at most `s`.

use serde::{Deserialize, Serialize};

use crate::bits::{floor_log2, BitString};
use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiEntry {
    pub arg: u64,
    pub value: u64,
    #[serde(default)]
    pub stage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiRule {
    /// Nowhere defined.
    Divergent,
    /// `x ↦ slope·x + intercept`, converging at stage
    /// `stage_slope·x + stage_intercept`; undefined from `domain_limit` on.
    Affine {
        slope: u64,
        intercept: u64,
        #[serde(default = "one")]
        stage_slope: u64,
        #[serde(default)]
        stage_intercept: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain_limit: Option<u64>,
    },
    /// `x ↦ ⌊log₂(x+1)⌋ + intercept`, a slowly growing order function.
    Log2 {
        intercept: u64,
        #[serde(default = "one")]
        stage_slope: u64,
        #[serde(default)]
        stage_intercept: u64,
    },
    /// Finitely many explicit values; divergent elsewhere.
    Table { entries: Vec<PhiEntry> },
}

fn one() -> u64 {
    1
}

/// One clocked function together with its declared properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiSpec {
    #[serde(flatten)]
    pub rule: PhiRule,
    /// Declared to be an order function (total, non-decreasing, unbounded).
    #[serde(default)]
    pub order: bool,
}

impl PhiSpec {
    pub fn divergent() -> Self {
        PhiSpec {
            rule: PhiRule::Divergent,
            order: false,
        }
    }

    /// `x ↦ x + 1`, converging at stage `stage_slope·x`.
    pub fn successor(stage_slope: u64) -> Self {
        PhiSpec {
            rule: PhiRule::Affine {
                slope: 1,
                intercept: 1,
                stage_slope,
                stage_intercept: 0,
                domain_limit: None,
            },
            order: true,
        }
    }

    pub fn table(entries: impl IntoIterator<Item = (u64, u64, u64)>) -> Self {
        PhiSpec {
            rule: PhiRule::Table {
                entries: entries
                    .into_iter()
                    .map(|(arg, value, stage)| PhiEntry { arg, value, stage })
                    .collect(),
            },
            order: false,
        }
    }

    /// Value and convergence stage of `φ(x)`, or `None` if `φ(x)` diverges.
    pub fn eval(&self, x: u64) -> Option<(u64, u64)> {
        match &self.rule {
            PhiRule::Divergent => None,
            PhiRule::Affine {
                slope,
                intercept,
                stage_slope,
                stage_intercept,
                domain_limit,
            } => {
                if domain_limit.is_some_and(|lim| x >= lim) {
                    return None;
                }
                let v = slope.saturating_mul(x).saturating_add(*intercept);
                let s = stage_slope.saturating_mul(x).saturating_add(*stage_intercept);
                Some((v, s))
            }
            PhiRule::Log2 {
                intercept,
                stage_slope,
                stage_intercept,
            } => {
                let v = (floor_log2(x.saturating_add(1)) as u64).saturating_add(*intercept);
                let s = stage_slope.saturating_mul(x).saturating_add(*stage_intercept);
                Some((v, s))
            }
            PhiRule::Table { entries } => entries
                .iter()
                .find(|e| e.arg == x)
                .map(|e| (e.value, e.stage)),
        }
    }

    /// `φ(x)` regardless of the clock.
    pub fn value(&self, x: u64) -> Option<u64> {
        self.eval(x).map(|(v, _)| v)
    }

    /// `φ_s(x)`: the value if it has converged by stage `s`.
    pub fn at_stage(&self, x: u64, s: u64) -> Option<u64> {
        self.eval(x).filter(|&(_, c)| c <= s).map(|(v, _)| v)
    }

    /// Number of computation steps `φ(x)` takes when dovetailed; a
    /// convergence stage of zero still costs one step.
    pub fn steps(&self, x: u64) -> Option<u64> {
        self.eval(x).map(|(_, c)| c.max(1))
    }

    /// `φ` applied to a string argument through the length-lex numbering.
    pub fn eval_string(&self, tau: &BitString) -> Option<(u64, u64)> {
        tau.index().and_then(|x| self.eval(x))
    }

    pub fn is_divergent(&self) -> bool {
        match &self.rule {
            PhiRule::Divergent => true,
            PhiRule::Table { entries } => entries.is_empty(),
            PhiRule::Affine { domain_limit, .. } => *domain_limit == Some(0),
            PhiRule::Log2 { .. } => false,
        }
    }

    pub fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if let PhiRule::Table { entries } = &self.rule {
            for (k, e) in entries.iter().enumerate() {
                if entries[..k].iter().any(|p| p.arg == e.arg) {
                    return Err(ConfigError::invalid(
                        field,
                        format!("argument {} listed twice", e.arg),
                    ));
                }
            }
        }
        if self.order {
            let ok = match &self.rule {
                PhiRule::Affine {
                    slope,
                    domain_limit,
                    ..
                } => *slope >= 1 && domain_limit.is_none(),
                PhiRule::Log2 { .. } => true,
                PhiRule::Divergent | PhiRule::Table { .. } => false,
            };
            if !ok {
                return Err(ConfigError::invalid(
                    field,
                    "declared an order function but is not total, non-decreasing and unbounded",
                ));
            }
        }
        Ok(())
    }
}
