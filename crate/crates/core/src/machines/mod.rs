//! Toy prefix-free machines and the fixed optimal machine `𝕌`.
//!
//! Machines are interpreted rather than simulated on a tape: each roster
//! member is a finite table, a parameterised template, or a builtin that
//! post-processes a run of `𝕌`. Only inputs, outputs and step counts are
//! observable, which is all the complexity notions need.
//!
//! `𝕌(0^{e−1}1σ) = M_e(σ)`. Dispatching to `M_e` costs `e + κ_e` steps on
//! top of the member's own cost, so the simulation overhead of member `e` is
//! `g_e(t) = t + e + κ_e` (see [`UniversalMachine::overhead_g`]).

mod sdm;

pub use sdm::{sdm_step_bound, sdm_wrap_run, SdmRun};

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{nth_string, pair, unpair, BitString};
use crate::error::ConfigError;
use crate::intervals::{end_of, interval_bounds, phi_intervals, phi_period};

/// Outputs longer than this are treated as divergence. Only the Solovay
/// builtin can produce them (its output length is a pairing code).
pub const MAX_OUTPUT_BITS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunOutcome {
    Halted { output: BitString, steps: u64 },
    /// No output within the horizon; `steps` is the horizon that was spent.
    Diverged { steps: u64 },
}

impl RunOutcome {
    pub fn output(&self) -> Option<&BitString> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            RunOutcome::Diverged { .. } => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RunOutcome::Halted { steps, .. } | RunOutcome::Diverged { steps } => *steps,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub input: BitString,
    pub output: BitString,
    pub cost: u64,
}

/// Parameterised machines with prefix-free domains.
///
/// | template | domain | output | cost |
/// |---|---|---|---|
/// | `constant` | `{ε}` | `output` | 1 |
/// | `copy` | `{0,1}^width` | input | `\|input\| + 1` |
/// | `self_delimiting_copy` | `1^k 0 x`, `\|x\| = k` | `x` | `\|input\| + 1` |
/// | `pad` | `{0,1}^width` | input `⌢ 0^zeros` | `\|input\| + zeros` |
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum Template {
    Constant { output: BitString },
    Copy { width: usize },
    SelfDelimitingCopy,
    Pad { width: usize, zeros: usize },
}

/// Machines that run `𝕌` on their input and transform the result. Their
/// own cost is exactly the number of steps of the inner run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum Builtin {
    /// If `𝕌(ρ) = γ` with `|γ| = max I_j + 1`, output the last `|I_j|` bits.
    ChopM,
    /// If `𝕌(ρ) = γ` and `max I_k + 1 < |γ| ≤ max I_{k+2^{i+1}} + 1` for a
    /// `φ_i`-interval `I_k`, output `γ↾max I_k+1`.
    TruncateN { i: u32 },
    /// If `𝕌(ρ)` outputs the number `n` in exactly `s` steps, output
    /// `σ_n 0^{⟨n,s⟩−|σ_n|}`.
    SolovayM,
    /// Output the number `|𝕌(ρ)|`.
    LengthOf,
    /// If `𝕌(ρ)` outputs the number `⟨a,b⟩`, output `a`.
    UnpairFirst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineKind {
    Table(Table),
    Template(Template),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    entries: Vec<TableEntry>,
    lookup: HashMap<BitString, usize>,
}

impl Table {
    pub fn new(entries: Vec<TableEntry>) -> Result<Self, ConfigError> {
        let mut lookup = HashMap::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            if e.cost == 0 {
                return Err(ConfigError::invalid(
                    format!("entries[{k}].cost"),
                    "costs must be at least one step",
                ));
            }
            if lookup.insert(e.input.clone(), k).is_some() {
                return Err(ConfigError::invalid(
                    format!("entries[{k}].input"),
                    format!("input {} listed twice", e.input),
                ));
            }
        }
        for (a, ea) in entries.iter().enumerate() {
            for (b, eb) in entries.iter().enumerate() {
                if a != b && ea.input.is_prefix_of(&eb.input) {
                    return Err(ConfigError::invalid(
                        format!("entries[{a}].input"),
                        format!(
                            "domain is not prefix-free: {:?} is a prefix of {:?}",
                            ea.input, eb.input
                        ),
                    ));
                }
            }
        }
        Ok(Table { entries, lookup })
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn get(&self, input: &BitString) -> Option<&TableEntry> {
        self.lookup.get(input).map(|&k| &self.entries[k])
    }
}

/// One roster member `M_e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub index: u32,
    pub kind: MachineKind,
    /// Dispatch overhead `κ_e ≥ 1`.
    pub overhead: u64,
}

/// The on-disk shape of a roster entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MachineBody {
    Table { entries: Vec<TableEntry> },
    Template(Template),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineEntry {
    pub index: u32,
    #[serde(default = "default_overhead")]
    pub overhead: u64,
    #[serde(flatten)]
    pub body: MachineBody,
}

fn default_overhead() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RosterFile {
    #[serde(default, rename = "machine")]
    pub machines: Vec<MachineEntry>,
}

impl MachineSpec {
    pub fn from_entry(entry: MachineEntry) -> Result<Self, ConfigError> {
        let field = |f: &str| format!("machine[{}].{f}", entry.index);
        if entry.overhead == 0 {
            return Err(ConfigError::invalid(field("overhead"), "κ must be at least 1"));
        }
        let kind = match entry.body {
            MachineBody::Table { entries } => MachineKind::Table(Table::new(entries).map_err(
                |e| match e {
                    ConfigError::Invalid { field: f, message } => {
                        ConfigError::invalid(field(&f), message)
                    }
                    other => other,
                },
            )?),
            MachineBody::Template(t) => {
                if let Template::Pad { width, zeros } = t {
                    if width + zeros == 0 {
                        return Err(ConfigError::invalid(
                            field("template"),
                            "pad with width 0 and zeros 0 would cost 0 steps",
                        ));
                    }
                }
                MachineKind::Template(t)
            }
            MachineBody::Builtin(b) => MachineKind::Builtin(b),
        };
        Ok(MachineSpec {
            index: entry.index,
            kind,
            overhead: entry.overhead,
        })
    }

    pub fn to_entry(&self) -> MachineEntry {
        let body = match &self.kind {
            MachineKind::Table(t) => MachineBody::Table {
                entries: t.entries.clone(),
            },
            MachineKind::Template(t) => MachineBody::Template(t.clone()),
            MachineKind::Builtin(b) => MachineBody::Builtin(*b),
        };
        MachineEntry {
            index: self.index,
            overhead: self.overhead,
            body,
        }
    }

    /// The prefix `0^{e−1}1` that selects this machine inside `𝕌`.
    pub fn program_prefix(&self) -> BitString {
        let mut p = BitString::zeros(self.index as usize - 1);
        p.push(true);
        p
    }
}

/// The roster `M_1, M_2, …` together with the dispatcher `𝕌`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UniversalMachine {
    roster: Vec<MachineSpec>,
}

impl UniversalMachine {
    pub fn new(roster: Vec<MachineSpec>) -> Result<Self, ConfigError> {
        for (k, m) in roster.iter().enumerate() {
            if m.index as usize != k + 1 {
                return Err(ConfigError::invalid(
                    format!("machine[{}].index", m.index),
                    format!("roster indices must be 1, 2, 3, … in order; expected {}", k + 1),
                ));
            }
        }
        Ok(UniversalMachine { roster })
    }

    pub fn from_file(file: RosterFile) -> Result<Self, ConfigError> {
        let roster = file
            .machines
            .into_iter()
            .map(MachineSpec::from_entry)
            .collect::<Result<Vec<_>, _>>()?;
        UniversalMachine::new(roster)
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let file: RosterFile = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        UniversalMachine::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        UniversalMachine::from_toml(&text, path)
    }

    pub fn to_file(&self) -> RosterFile {
        RosterFile {
            machines: self.roster.iter().map(MachineSpec::to_entry).collect(),
        }
    }

    pub fn roster(&self) -> &[MachineSpec] {
        &self.roster
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    pub fn machine(&self, e: u32) -> Option<&MachineSpec> {
        (e as usize).checked_sub(1).and_then(|k| self.roster.get(k))
    }

    /// Appends `kind` as the next roster member and returns its index.
    pub fn install(&mut self, kind: MachineKind, overhead: u64) -> u32 {
        let index = self.roster.len() as u32 + 1;
        self.roster.push(MachineSpec {
            index,
            kind,
            overhead,
        });
        index
    }

    pub fn builtin_index(&self, b: Builtin) -> Option<u32> {
        self.roster
            .iter()
            .find(|m| m.kind == MachineKind::Builtin(b))
            .map(|m| m.index)
    }

    /// `g_e(t) = t + e + κ_e`: the horizon `𝕌` needs to finish a run of
    /// member `e` that itself takes `t` steps. Saturates instead of wrapping.
    pub fn overhead_g(&self, e: u32, t: u64) -> Option<u64> {
        self.machine(e)
            .map(|m| t.saturating_add(e as u64).saturating_add(m.overhead))
    }

    /// Run `𝕌` on `program` for at most `horizon` steps.
    pub fn universal_run(&self, program: &BitString, horizon: u64) -> RunOutcome {
        let diverged = RunOutcome::Diverged { steps: horizon };
        let zeros = program.count_leading_zeros();
        if zeros == program.len() {
            return diverged;
        }
        let e = zeros as u32 + 1;
        let Some(m) = self.machine(e) else {
            return diverged;
        };
        let dispatch = e as u64 + m.overhead;
        if horizon < dispatch {
            return diverged;
        }
        let sigma = program.suffix_from(zeros + 1);
        match self.run_machine(m, &sigma, horizon - dispatch) {
            RunOutcome::Halted { output, steps } => RunOutcome::Halted {
                output,
                steps: steps + dispatch,
            },
            RunOutcome::Diverged { .. } => diverged,
        }
    }

    /// Run a single machine (not necessarily a roster member) directly.
    pub fn run_machine(&self, m: &MachineSpec, input: &BitString, horizon: u64) -> RunOutcome {
        let diverged = RunOutcome::Diverged { steps: horizon };
        let (output, cost) = match &m.kind {
            MachineKind::Table(t) => match t.get(input) {
                Some(entry) => (entry.output.clone(), entry.cost),
                None => return diverged,
            },
            MachineKind::Template(t) => match run_template(t, input) {
                Some(r) => r,
                None => return diverged,
            },
            MachineKind::Builtin(b) => {
                return match self.universal_run(input, horizon) {
                    RunOutcome::Halted { output, steps } => match apply_builtin(*b, &output, steps)
                    {
                        Some(out) => RunOutcome::Halted { output: out, steps },
                        None => diverged,
                    },
                    RunOutcome::Diverged { .. } => diverged,
                };
            }
        };
        if cost <= horizon {
            RunOutcome::Halted {
                output,
                steps: cost,
            }
        } else {
            diverged
        }
    }
}

fn run_template(t: &Template, input: &BitString) -> Option<(BitString, u64)> {
    let n = input.len();
    match t {
        Template::Constant { output } => input.is_empty().then(|| (output.clone(), 1)),
        Template::Copy { width } => (n == *width).then(|| (input.clone(), n as u64 + 1)),
        Template::SelfDelimitingCopy => {
            let k = input.as_bits().iter().take_while(|b| **b).count();
            // 1^k 0 x with |x| = k
            (n == 2 * k + 1 && input.get(k) == Some(false))
                .then(|| (input.suffix_from(k + 1), n as u64 + 1))
        }
        Template::Pad { width, zeros } => (n == *width).then(|| {
            let out = input.concat(&BitString::zeros(*zeros));
            (out, (n + zeros) as u64)
        }),
    }
}

fn apply_builtin(b: Builtin, gamma: &BitString, steps: u64) -> Option<BitString> {
    let len = gamma.len() as u64;
    match b {
        Builtin::ChopM => {
            // |γ| = 2^{j+1} − 1
            if len == 0 || !(len + 1).is_power_of_two() {
                return None;
            }
            let j = (len + 1).trailing_zeros() - 1;
            let (lo, _) = interval_bounds(j)?;
            Some(gamma.suffix_from(lo as usize))
        }
        Builtin::TruncateN { i } => {
            let k = truncation_interval(i, len)?;
            Some(gamma.prefix(end_of(k) as usize))
        }
        Builtin::SolovayM => {
            let n = gamma.index()?;
            let target = pair(n, steps)?;
            if target > MAX_OUTPUT_BITS {
                return None;
            }
            let sigma = nth_string(n);
            let pad = target.checked_sub(sigma.len() as u64)?;
            Some(sigma.concat(&BitString::zeros(pad as usize)))
        }
        Builtin::LengthOf => Some(nth_string(len)),
        Builtin::UnpairFirst => {
            let (a, _) = unpair(gamma.index()?);
            Some(nth_string(a))
        }
    }
}

/// The `φ_i`-interval `I_k` with `max I_k + 1 < len ≤ max I_{k+2^{i+1}} + 1`.
pub fn truncation_interval(i: u32, len: u64) -> Option<u32> {
    let period = phi_period(i);
    phi_intervals(i)
        .take_while(|&k| k < 62)
        .find(|&k| end_of(k) < len && k + period < 62 && len <= end_of(k + period))
}
