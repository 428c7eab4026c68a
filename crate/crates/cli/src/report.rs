//! Run reports.

use std::fmt::Write as _;

use qss_core::Fe;
use qss_protocol::vqss::CheaterSets;
use serde::Serialize;

use crate::scenario::Mode;

#[derive(Clone, Debug, Default, Serialize)]
pub struct TrialRecord {
    pub k: usize,
    pub trial: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
    /// A corrupt player was identified (rejection or a cheater set hit).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caught: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cheater_sets: Option<CheaterSets>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<Fe>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<(usize, Fe)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<(usize, Fe)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub honest_agree: Option<bool>,
    pub rounds: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatchRate {
    pub k: usize,
    pub trials: usize,
    pub caught: usize,
    pub rate: f64,
    pub std_err: f64,
}

impl CatchRate {
    pub fn new(k: usize, trials: usize, caught: usize) -> Self {
        let rate = if trials == 0 { 0.0 } else { caught as f64 / trials as f64 };
        let std_err = if trials == 0 { 0.0 } else { (rate * (1.0 - rate) / trials as f64).sqrt() };
        Self { k, trials, caught, rate, std_err }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Verdicts {
    pub accepted: usize,
    pub rejected: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub strategy: String,
    pub backend: String,
    pub verdicts: Verdicts,
    pub catch_rates: Vec<CatchRate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    pub assertions: Vec<Assertion>,
    pub trials: Vec<TrialRecord>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(mode: Mode, seed: u64, strategy: &str, backend: &str) -> Self {
        Self {
            mode,
            seed,
            strategy: strategy.into(),
            backend: backend.into(),
            verdicts: Verdicts::default(),
            catch_rates: Vec::new(),
            min_fidelity: None,
            assertions: Vec::new(),
            trials: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn assert(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let v = &self.verdicts;
        let _ = writeln!(
            s,
            "{} run, seed {}, strategy {}, backend {}: {} trials ({} accepted, {} rejected, {} errors) in {:.2} s",
            self.mode,
            self.seed,
            self.strategy,
            self.backend,
            self.trials.len(),
            v.accepted,
            v.rejected,
            v.errors,
            self.wall_time_s
        );
        for c in &self.catch_rates {
            let _ = writeln!(s, "  k={}: caught {}/{} = {:.3} ± {:.3}", c.k, c.caught, c.trials, c.rate, c.std_err);
        }
        if let Some(f) = self.min_fidelity {
            let _ = writeln!(s, "  min fidelity {f:.12}");
        }
        for a in &self.assertions {
            let _ = writeln!(s, "  [{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.name, a.detail);
        }
        s
    }
}
