//! Scenario files (TOML).
//!
//! ```toml
//! mode = "vqss"            # codec | vqss | mpqc | selftest
//! trials = 10
//! k_sweep = [1, 2, 3, 4]   # optional; defaults to [network.k]
//! backend = "auto"         # auto | tableau | sparse | dense
//!
//! [network]                # any field may be omitted (mode defaults)
//! n = 5
//! t = 1
//! p = 7
//! k = 4
//! corrupt = [1]            # players, numbered from 1
//! seed = 0
//!
//! [strategy]
//! name = "bad_branch_dealer"
//! params = { error = 1 }
//!
//! [input]
//! values = [0, 1, "plus"]  # basis values or named states, cycled over trials
//! dealer = 1
//! receiver = 2
//! kind = "plain"           # plain | proved_zero | proved_uniform
//!
//! [expect]                 # checked assertions; all optional
//! accept_rate = 1.0
//! min_fidelity = 1.0
//! catch_rate_nondecreasing = true
//! outputs_match = true
//! honest_agree = true
//! ```
//!
//! In mpqc mode `circuit` names a circuit file, relative to the scenario
//! file. Input values are given per declared circuit input; without them
//! each trial draws uniform basis values. In codec mode `delta` sets the
//! code degree (default `2t`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qss_core::Fe;
use qss_protocol::adversary::{strategy_by_name, Strategy, STRATEGIES};
use qss_protocol::circuit::LogicalCircuit;
use qss_protocol::vqss::SharingKind;
use qss_protocol::{NetworkConfig, Regime};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Codec,
    Vqss,
    Mpqc,
    Selftest,
}

impl Mode {
    fn regime(self) -> Option<Regime> {
        match self {
            Mode::Vqss => Some(Regime::Vqss),
            Mode::Mpqc => Some(Regime::Mpqc),
            Mode::Codec | Mode::Selftest => None,
        }
    }

    pub fn default_network(self) -> NetworkConfig {
        match self {
            Mode::Mpqc => NetworkConfig::mpqc_default(),
            _ => NetworkConfig::vqss_default(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Codec => "codec",
            Mode::Vqss => "vqss",
            Mode::Mpqc => "mpqc",
            Mode::Selftest => "selftest",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    #[default]
    Auto,
    Tableau,
    Sparse,
    /// Amplitude vector over all wires; only usable for tiny states.
    Dense,
}

impl FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "tableau" => Ok(Self::Tableau),
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            _ => Err(format!("unknown backend {s:?} (auto, tableau, sparse, dense)")),
        }
    }
}

/// A logical input: a basis value or a named stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Basis(Fe),
    Named(NamedState),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    /// `F|0⟩ = Σ_a |a⟩ / √p`
    #[serde(alias = "fourier_zero")]
    Plus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
}

impl StrategySpec {
    pub fn honest() -> Self {
        Self { name: "honest".into(), params: BTreeMap::new() }
    }

    pub fn build(&self) -> Result<Box<dyn Strategy>> {
        Ok(strategy_by_name(&self.name, &self.params)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub accept_rate: Option<f64>,
    pub min_fidelity: Option<f64>,
    #[serde(default)]
    pub catch_rate_nondecreasing: bool,
    #[serde(default)]
    pub outputs_match: bool,
    #[serde(default)]
    pub honest_agree: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    n: Option<usize>,
    t: Option<usize>,
    p: Option<u32>,
    k: Option<usize>,
    #[serde(default)]
    corrupt: Vec<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawInput {
    #[serde(default)]
    values: Vec<InputValue>,
    dealer: Option<usize>,
    receiver: Option<usize>,
    kind: Option<SharingKind>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    mode: Mode,
    network: Option<RawNetwork>,
    strategy: Option<StrategySpec>,
    input: Option<RawInput>,
    circuit: Option<PathBuf>,
    trials: Option<usize>,
    k_sweep: Option<Vec<usize>>,
    backend: Option<BackendChoice>,
    delta: Option<usize>,
    expect: Option<Expectations>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub mode: Mode,
    pub network: NetworkConfig,
    pub strategy: StrategySpec,
    pub inputs: Vec<InputValue>,
    pub dealer: usize,
    pub receiver: usize,
    pub kind: SharingKind,
    pub circuit: Option<LogicalCircuit>,
    pub circuit_path: Option<PathBuf>,
    pub trials: usize,
    pub k_sweep: Vec<usize>,
    pub backend: BackendChoice,
    pub delta: Option<usize>,
    pub expect: Expectations,
}

fn field_err(field: &str, message: impl Into<String>) -> Error {
    Error::Field { field: field.into(), message: message.into() }
}

impl Scenario {
    /// Defaults for `mode` with no file.
    pub fn defaults(mode: Mode) -> Self {
        let network = mode.default_network();
        Self {
            mode,
            k_sweep: vec![network.k],
            network,
            strategy: StrategySpec::honest(),
            inputs: Vec::new(),
            dealer: 1,
            receiver: 2,
            kind: SharingKind::Plain,
            circuit: None,
            circuit_path: None,
            trials: 1,
            backend: BackendChoice::Auto,
            delta: None,
            expect: Expectations::default(),
        }
    }

    /// Parses scenario text; `base` resolves relative circuit paths.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
            path: base.display().to_string(),
            message: e.to_string(),
        })?;
        let mut s = Self::defaults(raw.mode);
        if let Some(net) = raw.network {
            let d = &mut s.network;
            d.n = net.n.unwrap_or(d.n);
            d.t = net.t.unwrap_or(d.t);
            d.p = net.p.unwrap_or(d.p);
            d.k = net.k.unwrap_or(d.k);
            d.seed = net.seed.unwrap_or(d.seed);
            let corrupt = net.corrupt;
            s.network = s.network.clone().with_corrupt(&corrupt);
        }
        if let Some(st) = raw.strategy {
            s.strategy = st;
        }
        if let Some(input) = raw.input {
            s.inputs = input.values;
            s.dealer = input.dealer.unwrap_or(s.dealer);
            s.receiver = input.receiver.unwrap_or(s.receiver);
            s.kind = input.kind.unwrap_or(s.kind);
        }
        s.trials = raw.trials.unwrap_or(s.trials);
        s.k_sweep = raw.k_sweep.unwrap_or_else(|| vec![s.network.k]);
        s.backend = raw.backend.unwrap_or_default();
        s.delta = raw.delta;
        s.expect = raw.expect.unwrap_or_default();
        if let Some(rel) = raw.circuit {
            let dir = base.parent().unwrap_or(Path::new("."));
            s.load_circuit(&dir.join(rel))?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load_circuit(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field_err("circuit", format!("{}: {e}", path.display())))?;
        let c = LogicalCircuit::parse(&text).map_err(|e| field_err("circuit", format!("{}: {e}", path.display())))?;
        self.circuit = Some(c);
        self.circuit_path = Some(path.to_path_buf());
        Ok(())
    }

    /// Checks cross-field constraints; run again after overrides.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(field_err("trials", "must be at least 1"));
        }
        if !STRATEGIES.contains(&self.strategy.name.as_str()) {
            return Err(field_err("strategy.name", format!("unknown strategy {:?}; known: {}", self.strategy.name, STRATEGIES.join(", "))));
        }
        self.strategy.build().map_err(|e| field_err("strategy.params", e.to_string()))?;
        let mut sweep = self.network.clone();
        for &k in &self.k_sweep {
            sweep.k = k;
            match self.mode.regime() {
                Some(r) => sweep.validate(r).map_err(|e| field_err("network", e.to_string()))?,
                None => {
                    let f = sweep.field().map_err(|e| field_err("network.p", e.to_string()))?;
                    if f.p() as usize <= self.network.n {
                        return Err(field_err("network.p", format!("p = {} must exceed n = {}", f.p(), self.network.n)));
                    }
                }
            }
        }
        if self.k_sweep.is_empty() {
            return Err(field_err("k_sweep", "must not be empty"));
        }
        let p = self.network.p;
        for v in &self.inputs {
            if let InputValue::Basis(a) = v {
                if *a >= p {
                    return Err(field_err("input.values", format!("{a} is not a residue mod {p}")));
                }
            }
        }
        match self.mode {
            Mode::Vqss => {
                for (name, who) in [("input.dealer", self.dealer), ("input.receiver", self.receiver)] {
                    if who == 0 || who > self.network.n {
                        return Err(field_err(name, format!("player {who} out of range 1..={}", self.network.n)));
                    }
                }
            }
            Mode::Mpqc => {
                let c = self.circuit.as_ref().ok_or_else(|| field_err("circuit", "mpqc mode needs a circuit file"))?;
                let f = self.network.field()?;
                c.validate(&f, self.network.n).map_err(|e| field_err("circuit", e.to_string()))?;
                let declared = c.inputs().len();
                if !self.inputs.is_empty() {
                    if self.inputs.len() != declared {
                        return Err(field_err("input.values", format!("circuit declares {declared} inputs, {} given", self.inputs.len())));
                    }
                    if self.inputs.iter().any(|v| matches!(v, InputValue::Named(_))) {
                        return Err(field_err("input.values", "mpqc inputs are basis values"));
                    }
                }
            }
            Mode::Codec => {
                let delta = self.codec_delta();
                if delta == 0 || delta >= self.network.n {
                    return Err(field_err("delta", format!("degree {delta} outside 1..{}", self.network.n)));
                }
            }
            Mode::Selftest => {}
        }
        Ok(())
    }

    pub fn codec_delta(&self) -> usize {
        self.delta.unwrap_or(2 * self.network.t)
    }

    pub fn corrupt(&self) -> BTreeSet<usize> {
        self.network.corrupt.iter().map(|p| p.index()).collect()
    }
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Scenario::from_toml(&text, path)
}
