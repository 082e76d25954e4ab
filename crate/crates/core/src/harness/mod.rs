//! Experiment orchestration: configuration, seeded Monte Carlo runs, the exact
//! invariant suites, and persistence.

pub mod config;
pub mod output;
pub mod parallel;
pub mod runs;
pub mod stats;
pub mod suites;

use std::collections::BTreeMap;

use serde::Serialize;

pub use config::{default_grid, geometric_grid, parse_flat, Experiment, ExperimentConfig, OutputFormat, WORKERS_ENV};
pub use output::{write_csv, write_summary};
pub use parallel::map_seeds;
pub use runs::{
    iid_oracle_sample, property_b_defect, run_phi_concentration, run_property_b, run_trimmed_law,
    run_weak_convergence, DefectEstimate, IidDigits, OrbitPlan, OrbitRun, PhiRow, PropBRow, RunRow,
};
pub use suites::{run_lemma_suite, run_spectral_suite, InvariantReport, LemmaSizes, SpectralSizes};

/// Version string written into every summary.
pub const VERSION: &str = concat!("trimlab ", env!("CARGO_PKG_VERSION"));

/// One named pass/fail check of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Criterion {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Criterion {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// A seed whose run raised an error; the run continues without it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

/// The JSON summary of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub version: &'static str,
    pub experiment: String,
    pub config: BTreeMap<&'static str, String>,
    pub checkpoints: Vec<serde_json::Value>,
    pub criteria: Vec<Criterion>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<serde_json::Value>,
    pub failures: Vec<SeedFailure>,
}

impl Summary {
    pub fn new(
        cfg: &ExperimentConfig,
        checkpoints: Vec<serde_json::Value>,
        criteria: Vec<Criterion>,
        failures: Vec<SeedFailure>,
    ) -> Self {
        Summary {
            version: VERSION,
            experiment: cfg.experiment.to_string(),
            config: cfg.echo(),
            checkpoints,
            criteria,
            extra: Vec::new(),
            failures,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }
}
