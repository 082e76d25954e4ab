use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use trimlab::harness::output::{INVARIANT_COLUMNS, PHI_COLUMNS, PROPB_COLUMNS, RUN_COLUMNS};
use trimlab::harness::suites::suite_summary;
use trimlab::harness::{
    run_lemma_suite, run_phi_concentration, run_property_b, run_spectral_suite, run_trimmed_law,
    run_weak_convergence, write_csv, write_summary, Experiment, ExperimentConfig, LemmaSizes, OutputFormat,
    SpectralSizes, Summary,
};

#[derive(Parser)]
#[command(name = "trimlab", version, about = "Trimmed sums of ⌊1/x⌋ along doubling-map orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// S_n/(n log n) across seeds, against the i.i.d. oracle.
    Weak(Common),
    /// The trimmed ratio S_n^{b_n}/(n log n), optionally for a second ψ on the same orbits.
    Trim(Common),
    /// Concentration of the induced times φ_n around 2n.
    Phi(Common),
    /// The exact digit, envelope, closed-form, ledger and b_n checks.
    Lemmas(Common),
    /// Transfer-operator identities, induced independence and α-mixing bounds.
    Spectral(Common),
    /// The Property B characteristic-function defect at (n/2, n/2).
    Propb(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key=value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of seeds N (for `lemmas`: number of random points).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    seed_base: Option<String>,
    /// Truncates the grid at this n and adds it as the last checkpoint.
    #[arg(long)]
    n_max: Option<String>,
    /// `geometric`, `geometric:LO:HI`, or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    /// ψ as an expression in n, e.g. `n*log(n)^2`.
    #[arg(long)]
    psi: Option<String>,
    #[arg(long, value_parser = ["summable", "divergent"])]
    psi_class: Option<String>,
    /// A second ψ run on the same orbits (`trim` only).
    #[arg(long)]
    contrast_psi: Option<String>,
    #[arg(long, value_parser = ["summable", "divergent"])]
    contrast_class: Option<String>,
    /// Exceedance threshold factor: counts a_k > ε·n·log n.
    #[arg(long)]
    epsilon: Option<String>,
    /// Characteristic-function argument (`propb`).
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    max_bits: Option<String>,
    #[arg(long)]
    tail_from: Option<String>,
    #[arg(long)]
    reference_n: Option<String>,
    /// Sample the i.i.d. oracle alongside the orbits (`weak`).
    #[arg(long)]
    oracle: Option<bool>,
    /// Include runtimes in suite summaries (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with status 1 when a criterion fails.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("seeds", &self.seeds);
        put("seed-base", &self.seed_base);
        put("n-max", &self.n_max);
        put("grid", &self.grid);
        put("psi", &self.psi);
        put("psi-class", &self.psi_class);
        put("contrast-psi", &self.contrast_psi);
        put("contrast-class", &self.contrast_class);
        put("epsilon", &self.epsilon);
        put("t", &self.t);
        put("max-bits", &self.max_bits);
        put("tail-from", &self.tail_from);
        put("reference-n", &self.reference_n);
        put("format", &self.format);
        put("oracle", &self.oracle.map(|b| b.to_string()));
        put("out", &self.out.as_ref().map(|p| p.display().to_string()));
        if self.timings {
            m.insert("timings".into(), "true".into());
        }
        m
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `runs/trim.csv` → `runs/trim.contrast.csv`.
fn contrast_path(p: &Path) -> PathBuf {
    let stem = p.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let ext = p.extension().map_or_else(String::new, |e| format!(".{}", e.to_string_lossy()));
    p.with_file_name(format!("{stem}.contrast{ext}"))
}

fn report(summary: &Summary) {
    for c in &summary.criteria {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &summary.failures {
        eprintln!("seed {} failed: {}", f.seed, f.error);
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (experiment, common) = match cli.command {
        Command::Weak(c) => (Experiment::WeakConvergence, c),
        Command::Trim(c) => (Experiment::TrimmedLaw, c),
        Command::Phi(c) => (Experiment::PhiConcentration, c),
        Command::Lemmas(c) => (Experiment::LemmaSuite, c),
        Command::Spectral(c) => (Experiment::SpectralSuite, c),
        Command::Propb(c) => (Experiment::PropertyB, c),
    };
    let file_text = match &common.config {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let cfg = ExperimentConfig::from_file_and_overrides(experiment, file_text.as_deref(), &common.overrides())?;
    let workers = cfg.resolve_workers(common.workers)?;
    let out = cfg.out.clone();
    let csv = cfg.format == OutputFormat::Csv;

    let summary = match cfg.experiment {
        Experiment::WeakConvergence | Experiment::TrimmedLaw => {
            let run = if cfg.experiment == Experiment::WeakConvergence {
                run_weak_convergence(&cfg, workers)?
            } else {
                run_trimmed_law(&cfg, workers)?
            };
            if csv {
                write_csv(open_out(out.as_deref())?, &RUN_COLUMNS, &run.rows)?;
                if !run.contrast_rows.is_empty() {
                    match &out {
                        Some(p) => write_csv(open_out(Some(&contrast_path(p)))?, &RUN_COLUMNS, &run.contrast_rows)?,
                        None => eprintln!("contrast rows need --out; only the primary ψ was written"),
                    }
                }
            }
            run.summary
        }
        Experiment::PhiConcentration => {
            let (rows, s) = run_phi_concentration(&cfg, workers)?;
            if csv {
                write_csv(open_out(out.as_deref())?, &PHI_COLUMNS, &rows)?;
            }
            s
        }
        Experiment::PropertyB => {
            let (rows, s) = run_property_b(&cfg, workers)?;
            if csv {
                write_csv(open_out(out.as_deref())?, &PROPB_COLUMNS, &rows)?;
            }
            s
        }
        Experiment::LemmaSuite | Experiment::SpectralSuite => {
            let reports = if cfg.experiment == Experiment::LemmaSuite {
                let mut sizes = LemmaSizes::default();
                if common.seeds.is_some() {
                    sizes.halving_points = cfg.seeds;
                    sizes.sandwich_points = cfg.seeds;
                }
                run_lemma_suite(&cfg, &sizes, workers)?
            } else {
                run_spectral_suite(&SpectralSizes::default(), cfg.piece_cap)?
            };
            for r in &reports {
                eprintln!("{:<34} {:>10} checked {:>8} defects {:>9.1} ms", r.name, r.checked, r.defects, r.runtime_ms);
            }
            if csv {
                write_csv(open_out(out.as_deref())?, &INVARIANT_COLUMNS, &reports)?;
            }
            suite_summary(&cfg, &reports)
        }
    };
    if !csv {
        write_summary(open_out(out.as_deref())?, &summary)?;
    }
    report(&summary);
    Ok(summary.all_pass() || !common.strict)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
