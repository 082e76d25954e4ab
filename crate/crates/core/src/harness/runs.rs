//! Monte Carlo runs over seeded orbits and the i.i.d. oracle.

use serde::Serialize;

use crate::dynamics::{chi_with_depth, OrbitState};
use crate::error::{Error, Result};
use crate::exactnum::{BitPoint, Rational};
use crate::observables::expect_chi_trunc_f64;
use crate::trimming::{b_of_n, eps_threshold, thresholds, PsiSpec, SumLedger, Thresholds};

use super::config::ExperimentConfig;
use super::parallel::map_seeds;
use super::stats::{ks_distance, mean, sign_test_p, Quantiles};
use super::{Criterion, SeedFailure, Summary};

/// XOR mask separating oracle seeds from orbit seeds.
pub const ORACLE_DOMAIN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One `(seed, n)` row of an orbit run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub n: u64,
    /// `b_n` as defined, possibly negative; trimming uses `max(b_n, 0)`.
    pub b_n: i64,
    #[serde(rename = "S_n")]
    pub s_n: u128,
    #[serde(rename = "S_n_bn")]
    pub s_n_bn: u128,
    #[serde(rename = "T_n_tn")]
    pub t_n_tn: u128,
    #[serde(rename = "T_n_rn")]
    pub t_n_rn: u128,
    pub ratio_trimmed: f64,
    pub ratio_raw: f64,
    pub max_digit: u64,
    /// `#{k ≤ n : a_k > ⌊ε·n·log n⌋}`.
    pub exceed_eps: u64,
    /// `φ_{⌈n/2⌉}`, the τ-time of the `⌈n/2⌉`-th induced step.
    pub phi_half_n: u64,
}

/// I.i.d. digits with the law of `a₁`, read from consecutive disjoint stretches
/// of one bit stream.
#[derive(Clone, Debug)]
pub struct IidDigits {
    point: BitPoint,
    max_bits: usize,
}

impl IidDigits {
    pub fn new(seed: u64, max_bits: usize) -> Self {
        IidDigits {
            point: BitPoint::new(seed ^ ORACLE_DOMAIN),
            max_bits,
        }
    }

    #[inline]
    pub fn next_digit(&mut self) -> Result<u64> {
        let (a, used) = chi_with_depth(&mut self.point, 0, self.max_bits)?;
        self.point.shift_by(used);
        Ok(a)
    }
}

/// `n` i.i.d. draws with `P(a = k) = 1/k − 1/(k+1)`.
pub fn iid_oracle_sample(seed: u64, n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::Domain("oracle sample needs n ≥ 1".into()));
    }
    let mut src = IidDigits::new(seed, crate::dynamics::DEFAULT_MAX_BITS);
    (0..n).map(|_| src.next_digit()).collect()
}

struct Checkpoint {
    n: u64,
    th: Thresholds,
    eps_c: u64,
    /// `b_n` per ψ.
    b: Vec<i64>,
}

/// Everything about an orbit run that does not depend on the seed.
pub struct OrbitPlan {
    checkpoints: Vec<Checkpoint>,
    capacity: usize,
    watched: Vec<u64>,
    max_bits: usize,
}

impl OrbitPlan {
    pub fn new(grid: &[u64], psis: &[PsiSpec], eps: &Rational, slack: usize, max_bits: usize) -> Result<Self> {
        let mut checkpoints = Vec::with_capacity(grid.len());
        let mut capacity = slack;
        let mut watched = Vec::new();
        for &n in grid {
            let th = thresholds(n)?;
            let eps_c = eps_threshold(n, eps)?;
            let b = psis.iter().map(|p| b_of_n(n, p)).collect::<Result<Vec<_>>>()?;
            for &bn in &b {
                capacity = capacity.max(bn.max(0) as usize + slack);
            }
            watched.extend([th.t_floor, th.r_floor, eps_c]);
            checkpoints.push(Checkpoint { n, th, eps_c, b });
        }
        Ok(OrbitPlan {
            checkpoints,
            capacity,
            watched,
            max_bits,
        })
    }

    /// `K = max b_n + slack`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn b_values(&self, psi_index: usize) -> Vec<(u64, i64)> {
        self.checkpoints.iter().map(|c| (c.n, c.b[psi_index])).collect()
    }

    /// Rows for one seed, indexed `[ψ][checkpoint]`.
    pub fn run(&self, seed: u64) -> Result<Vec<Vec<RunRow>>> {
        let psis = self.checkpoints.first().map_or(0, |c| c.b.len());
        let mut rows: Vec<Vec<RunRow>> = vec![Vec::with_capacity(self.checkpoints.len()); psis];
        let mut orbit = OrbitState::with_max_bits(BitPoint::new(seed), self.max_bits);
        let mut induced = OrbitState::with_max_bits(BitPoint::new(seed), self.max_bits);
        let mut ledger = SumLedger::new(self.capacity, &self.watched);
        for cp in &self.checkpoints {
            while orbit.step < cp.n {
                let a = orbit.next_digit()?;
                ledger.push(a);
            }
            let half = cp.n.div_ceil(2);
            while induced.induced_step < half {
                induced.induced_step().map_err(|e| e.at_index(induced.induced_step + 1))?;
            }
            let d = cp.th.d_f64();
            let s_n = ledger.total();
            for (k, &b) in cp.b.iter().enumerate() {
                let s_n_bn = ledger.trimmed_sum(b.max(0) as usize)?;
                rows[k].push(RunRow {
                    seed,
                    n: cp.n,
                    b_n: b,
                    s_n,
                    s_n_bn,
                    t_n_tn: ledger.truncated_sum(cp.th.t_floor)?,
                    t_n_rn: ledger.truncated_sum(cp.th.r_floor)?,
                    ratio_trimmed: s_n_bn as f64 / d,
                    ratio_raw: s_n as f64 / d,
                    max_digit: ledger.max_digit(),
                    exceed_eps: ledger.count_exceed(cp.eps_c)?,
                    phi_half_n: induced.phi_total,
                });
            }
        }
        Ok(rows)
    }
}

fn collect_rows<T>(
    seeds: &[u64],
    results: Vec<Result<T>>,
    failures: &mut Vec<SeedFailure>,
) -> Vec<(u64, T)> {
    let mut ok = Vec::with_capacity(results.len());
    for (&seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(v) => ok.push((seed, v)),
            Err(e) => failures.push(SeedFailure {
                seed,
                error: e.to_string(),
            }),
        }
    }
    ok
}

/// The checkpoint the pass/fail summary refers to: `reference_n`, or the
/// nearest grid point below it.
fn reference_index(grid: &[u64], reference_n: u64) -> usize {
    grid.iter().rposition(|&n| n <= reference_n).unwrap_or(0)
}

/// Output of an orbit experiment.
#[derive(Clone, Debug)]
pub struct OrbitRun {
    pub rows: Vec<RunRow>,
    /// Rows for the contrast ψ on the same seeds, when configured.
    pub contrast_rows: Vec<RunRow>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakCheckpoint {
    pub n: u64,
    pub count: usize,
    pub ratio_raw: Quantiles,
    pub iqr: f64,
    /// `E(χ^{⌊r_n⌋})/log n`.
    pub predicted_location: f64,
    /// Fraction of orbits with `max_{k≤n} a_k > ⌊r_n⌋`, and its standard error.
    pub truncation_rate: f64,
    pub truncation_se: f64,
    /// KS distance between orbit and oracle samples of `S_n/(n log n)`.
    pub ks_oracle: Option<f64>,
}

/// Weak convergence of `S_n/(n log n)`.
pub fn run_weak_convergence(cfg: &ExperimentConfig, workers: usize) -> Result<OrbitRun> {
    let psi = cfg.psi_spec()?;
    let plan = OrbitPlan::new(&cfg.n_grid, std::slice::from_ref(&psi), &cfg.epsilon, cfg.top_k_slack, cfg.max_bits)?;
    let seeds = cfg.seed_list();
    let results = map_seeds(&seeds, workers, |s| plan.run(s).map(|mut r| r.swap_remove(0)))?;
    let mut failures = Vec::new();
    let per_seed = collect_rows(&seeds, results, &mut failures);

    let oracle: Option<Vec<Vec<f64>>> = if cfg.oracle {
        let th: Vec<Thresholds> = cfg.n_grid.iter().map(|&n| thresholds(n)).collect::<Result<_>>()?;
        let grid = cfg.n_grid.clone();
        let max_bits = cfg.max_bits;
        let res = map_seeds(&seeds, workers, |s| -> Result<Vec<f64>> {
            let mut src = IidDigits::new(s, max_bits);
            let mut total = 0u128;
            let mut k = 0u64;
            let mut out = Vec::with_capacity(grid.len());
            for (n, t) in grid.iter().zip(&th) {
                while k < *n {
                    total += u128::from(src.next_digit()?);
                    k += 1;
                }
                out.push(total as f64 / t.d_f64());
            }
            Ok(out)
        })?;
        let mut fails = Vec::new();
        let ok = collect_rows(&seeds, res, &mut fails);
        failures.extend(fails.into_iter().map(|f| SeedFailure {
            seed: f.seed,
            error: format!("oracle: {}", f.error),
        }));
        Some(ok.into_iter().map(|(_, v)| v).collect())
    } else {
        None
    };

    let rows: Vec<RunRow> = per_seed.into_iter().flat_map(|(_, r)| r).collect();
    let summary = weak_summary(cfg, &rows, oracle.as_deref(), failures)?;
    Ok(OrbitRun {
        rows,
        contrast_rows: Vec::new(),
        summary,
    })
}

/// Rebuilds the weak-convergence summary from rows (and oracle ratios, indexed
/// `[seed][checkpoint]`).
pub fn weak_summary(
    cfg: &ExperimentConfig,
    rows: &[RunRow],
    oracle: Option<&[Vec<f64>]>,
    failures: Vec<SeedFailure>,
) -> Result<Summary> {
    let mut checkpoints = Vec::new();
    for (idx, &n) in cfg.n_grid.iter().enumerate() {
        let th = thresholds(n)?;
        let at: Vec<&RunRow> = rows.iter().filter(|r| r.n == n).collect();
        let ratios: Vec<f64> = at.iter().map(|r| r.ratio_raw).collect();
        let q = Quantiles::of(&ratios);
        let count = at.len();
        let rate = at.iter().filter(|r| r.max_digit > th.r_floor).count() as f64 / count.max(1) as f64;
        let ks = oracle.map(|o| {
            let col: Vec<f64> = o.iter().map(|v| v[idx]).collect();
            ks_distance(&ratios, &col)
        });
        checkpoints.push(WeakCheckpoint {
            n,
            count,
            iqr: q.iqr(),
            ratio_raw: q,
            predicted_location: expect_chi_trunc_f64(th.r_floor) / (n as f64).ln(),
            truncation_rate: rate,
            truncation_se: (rate * (1.0 - rate) / count.max(1) as f64).sqrt(),
            ks_oracle: ks,
        });
    }
    let r = reference_index(&cfg.n_grid, cfg.reference_n);
    let (first, refc) = (&checkpoints[0], &checkpoints[r]);
    let criteria = vec![
        Criterion::new(
            "weak.iqr_shrinks",
            refc.iqr < first.iqr,
            format!("IQR {} at n={} vs {} at n={}", refc.iqr, refc.n, first.iqr, first.n),
        ),
        Criterion::new(
            "weak.median_location",
            (refc.ratio_raw.q50 - refc.predicted_location).abs() <= 0.15,
            format!("median {} vs predicted {} (tolerance 0.15)", refc.ratio_raw.q50, refc.predicted_location),
        ),
        Criterion::new(
            "weak.truncation_rate",
            refc.truncation_rate <= 0.10 + 3.0 * refc.truncation_se,
            format!("rate {} ≤ 0.10 + 3·{}", refc.truncation_rate, refc.truncation_se),
        ),
    ];
    Ok(Summary::new(
        cfg,
        checkpoints.iter().map(|c| serde_json::to_value(c).expect("plain data")).collect(),
        criteria,
        failures,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrimCheckpoint {
    pub n: u64,
    pub psi: String,
    pub b_n: i64,
    pub ratio_trimmed: Quantiles,
    pub iqr: f64,
}

/// Per-seed trajectory statistics of the trimmed ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub final_ratio: f64,
    /// Extremes over the grid tail `n ≥ tail_from`.
    pub running_max: f64,
    pub running_min: f64,
}

/// Final ratio and tail extremes per seed, from rows sorted by seed then n.
pub fn trajectories(rows: &[RunRow], tail_from: u64) -> Vec<Trajectory> {
    let mut out: Vec<Trajectory> = Vec::new();
    for r in rows {
        if out.last().is_none_or(|t| t.seed != r.seed) {
            out.push(Trajectory {
                seed: r.seed,
                final_ratio: f64::NAN,
                running_max: f64::NEG_INFINITY,
                running_min: f64::INFINITY,
            });
        }
        let t = out.last_mut().expect("pushed");
        t.final_ratio = r.ratio_trimmed;
        if r.n >= tail_from {
            t.running_max = t.running_max.max(r.ratio_trimmed);
            t.running_min = t.running_min.min(r.ratio_trimmed);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SignTest {
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
    pub p_value: f64,
}

/// One-sided sign test that `a` exceeds `b` seed by seed; ties are dropped.
pub fn sign_test(a: &[Trajectory], b: &[Trajectory]) -> SignTest {
    let (mut wins, mut ties, mut losses) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        debug_assert_eq!(x.seed, y.seed);
        match x.running_max.partial_cmp(&y.running_max) {
            Some(std::cmp::Ordering::Greater) => wins += 1,
            Some(std::cmp::Ordering::Less) => losses += 1,
            _ => ties += 1,
        }
    }
    SignTest {
        wins,
        ties,
        losses,
        p_value: sign_test_p(wins, wins + losses),
    }
}

/// The trimmed ratio `S_n^{b_n}/(n log n)`, optionally for two ψ on shared orbits.
pub fn run_trimmed_law(cfg: &ExperimentConfig, workers: usize) -> Result<OrbitRun> {
    let mut psis = vec![cfg.psi_spec()?];
    if let Some(c) = cfg.contrast_spec()? {
        psis.push(c);
    }
    let plan = OrbitPlan::new(&cfg.n_grid, &psis, &cfg.epsilon, cfg.top_k_slack, cfg.max_bits)?;
    let seeds = cfg.seed_list();
    let results = map_seeds(&seeds, workers, |s| plan.run(s))?;
    let mut failures = Vec::new();
    let per_seed = collect_rows(&seeds, results, &mut failures);
    let mut rows = Vec::new();
    let mut contrast_rows = Vec::new();
    for (_, mut r) in per_seed {
        if r.len() > 1 {
            contrast_rows.extend(r.pop().expect("two ψ"));
        }
        rows.extend(r.pop().expect("one ψ"));
    }
    let summary = trim_summary(cfg, &plan, &psis, &rows, &contrast_rows, failures)?;
    Ok(OrbitRun {
        rows,
        contrast_rows,
        summary,
    })
}

fn trim_summary(
    cfg: &ExperimentConfig,
    plan: &OrbitPlan,
    psis: &[PsiSpec],
    rows: &[RunRow],
    contrast_rows: &[RunRow],
    failures: Vec<SeedFailure>,
) -> Result<Summary> {
    let mut checkpoints = Vec::new();
    let sets: Vec<&[RunRow]> = if psis.len() > 1 { vec![rows, contrast_rows] } else { vec![rows] };
    for (k, set) in sets.iter().enumerate() {
        for (n, b) in plan.b_values(k) {
            let ratios: Vec<f64> = set.iter().filter(|r| r.n == n).map(|r| r.ratio_trimmed).collect();
            let q = Quantiles::of(&ratios);
            checkpoints.push(TrimCheckpoint {
                n,
                psi: psis[k].label.clone(),
                b_n: b,
                iqr: q.iqr(),
                ratio_trimmed: q,
            });
        }
    }
    let traj = trajectories(rows, cfg.tail_from);
    let finals: Vec<f64> = traj.iter().map(|t| t.final_ratio).collect();
    let final_median = Quantiles::of(&finals).q50;
    let g = cfg.n_grid.len();
    let iqr_at = |n: u64| checkpoints[..g].iter().find(|c| c.n == n).map(|c| c.iqr);
    let start = cfg.n_grid.iter().copied().find(|&n| n >= cfg.tail_from).unwrap_or(cfg.n_grid[0]);
    let (iqr_start, iqr_end) = (iqr_at(start).unwrap_or(f64::NAN), checkpoints[g - 1].iqr);
    let logged_ok = rows.iter().all(|r| {
        plan.b_values(0).iter().any(|&(n, b)| n == r.n && b == r.b_n)
    });
    let mut criteria = vec![
        Criterion::new(
            "trim.median_final_band",
            (0.8..=1.6).contains(&final_median),
            format!("median final ratio {final_median} in [0.8, 1.6] (surrogate for the a.s. limit 1)"),
        ),
        Criterion::new(
            "trim.band_shrinks",
            iqr_end < iqr_start,
            format!("IQR {iqr_end} at n={} vs {iqr_start} at n={start}", cfg.n_max()),
        ),
        Criterion::new("trim.b_n_logged", logged_ok, "logged b_n equal b_of_n on the grid".to_string()),
    ];
    let mut extra = Vec::new();
    if !contrast_rows.is_empty() {
        let ct = trajectories(contrast_rows, cfg.tail_from);
        let test = sign_test(&ct, &traj);
        criteria.push(Criterion::new(
            "trim.contrast_sign_test",
            2 * test.wins > traj.len() as u64 && test.p_value < 0.05,
            format!(
                "contrast running max exceeds primary on {} of {} seeds ({} ties), p = {} (surrogate for limsup = ∞)",
                test.wins,
                traj.len(),
                test.ties,
                test.p_value
            ),
        ));
        extra.push(serde_json::to_value(&test).expect("plain data"));
    }
    let mut s = Summary::new(
        cfg,
        checkpoints.iter().map(|c| serde_json::to_value(c).expect("plain data")).collect(),
        criteria,
        failures,
    );
    s.extra = extra;
    Ok(s)
}

/// One `(seed, n)` row of the first-exit concentration run; `n` counts induced steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiRow {
    pub seed: u64,
    pub n: u64,
    /// `φ_n = Σ_{k<n} φ∘τ_B^k`.
    pub phi_n: u64,
    /// `Σ_{k<n} (φ∘τ_B^k)²`.
    pub phi_sq_sum: u64,
    /// `|φ_n − 2n|/n^{3/4}`.
    pub dev_scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiCheckpoint {
    pub n: u64,
    pub mean_phi_over_n: f64,
    /// Pooled variance of the single-step values.
    pub step_variance: f64,
    pub dev_scaled: Quantiles,
}

fn phi_rows(seed: u64, grid: &[u64], max_bits: usize) -> Result<Vec<PhiRow>> {
    let mut orbit = OrbitState::with_max_bits(BitPoint::new(seed), max_bits);
    let mut sq = 0u64;
    let mut out = Vec::with_capacity(grid.len());
    for &n in grid {
        while orbit.induced_step < n {
            let phi = orbit.induced_step()?;
            sq += phi * phi;
        }
        let dev = (orbit.phi_total as f64 - 2.0 * n as f64).abs() / (n as f64).powf(0.75);
        out.push(PhiRow {
            seed,
            n,
            phi_n: orbit.phi_total,
            phi_sq_sum: sq,
            dev_scaled: dev,
        });
    }
    Ok(out)
}

/// Concentration of `φ_n` around `2n`.
pub fn run_phi_concentration(cfg: &ExperimentConfig, workers: usize) -> Result<(Vec<PhiRow>, Summary)> {
    let seeds = cfg.seed_list();
    let res = map_seeds(&seeds, workers, |s| phi_rows(s, &cfg.n_grid, cfg.max_bits))?;
    let mut failures = Vec::new();
    let rows: Vec<PhiRow> = collect_rows(&seeds, res, &mut failures).into_iter().flat_map(|(_, r)| r).collect();
    let summary = phi_summary(cfg, &rows, failures);
    Ok((rows, summary))
}

pub fn phi_summary(cfg: &ExperimentConfig, rows: &[PhiRow], failures: Vec<SeedFailure>) -> Summary {
    let mut checkpoints = Vec::new();
    for &n in &cfg.n_grid {
        let at: Vec<&PhiRow> = rows.iter().filter(|r| r.n == n).collect();
        let steps = (at.len() as u64 * n) as f64;
        let m1 = at.iter().map(|r| r.phi_n as f64).sum::<f64>() / steps;
        let m2 = at.iter().map(|r| r.phi_sq_sum as f64).sum::<f64>() / steps;
        checkpoints.push(PhiCheckpoint {
            n,
            mean_phi_over_n: mean(&at.iter().map(|r| r.phi_n as f64 / n as f64).collect::<Vec<_>>()),
            step_variance: m2 - m1 * m1,
            dev_scaled: Quantiles::of(&at.iter().map(|r| r.dev_scaled).collect::<Vec<_>>()),
        });
    }
    // seeds whose tail maximum of the scaled deviation exceeds 1
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.dedup();
    let exceed = seeds
        .iter()
        .filter(|&&s| {
            rows.iter()
                .filter(|r| r.seed == s && r.n >= cfg.tail_from)
                .any(|r| r.dev_scaled > 1.0)
        })
        .count() as f64
        / seeds.len().max(1) as f64;
    let r = reference_index(&cfg.n_grid, cfg.reference_n);
    let c = &checkpoints[r];
    let criteria = vec![
        Criterion::new(
            "phi.mean",
            (c.mean_phi_over_n - 2.0).abs() <= 0.02,
            format!("mean φ_n/n = {} at n={} (2 ± 0.02)", c.mean_phi_over_n, c.n),
        ),
        Criterion::new(
            "phi.step_variance",
            (c.step_variance - 2.0).abs() <= 0.1,
            format!("per-step variance {} at n={} (2 ± 0.1)", c.step_variance, c.n),
        ),
        Criterion::new(
            "phi.tail_exceedance",
            exceed <= 0.05,
            format!("fraction of seeds with max_(n≥{}) |φ_n−2n|/n^(3/4) > 1: {exceed} (≤ 0.05)", cfg.tail_from),
        ),
    ];
    Summary::new(
        cfg,
        checkpoints.iter().map(|c| serde_json::to_value(c).expect("plain data")).collect(),
        criteria,
        failures,
    )
}

/// Which sequence a Property B sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Orbit,
    Iid,
}

/// Partial sums `Z_k, Z_ℓ, Z_{k+ℓ}` of one sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropBRow {
    pub seed: u64,
    pub source: Source,
    pub k: u64,
    pub l: u64,
    pub z_k: u128,
    pub z_l: u128,
    pub z_kl: u128,
}

/// A Monte Carlo defect `|E e^{itZ_{k+ℓ}/B} − E e^{itZ_k/B}·E e^{itZ_ℓ/B}|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectEstimate {
    pub n: u64,
    pub scale: f64,
    pub defect: f64,
    /// Root mean square error of the complex estimator (delta method).
    pub se: f64,
}

fn cis(x: f64) -> (f64, f64) {
    (x.cos(), x.sin())
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// `n·E(χ^{⌊r_n⌋})`.
pub fn property_b_scale(n: u64) -> Result<f64> {
    Ok(n as f64 * expect_chi_trunc_f64(thresholds(n)?.r_floor))
}

/// The defect estimate from the partial sums of independent samples.
pub fn defect_from_rows(rows: &[&PropBRow], t: f64, scale: f64) -> DefectEstimate {
    let n = rows.len() as f64;
    let arg = |z: u128| t * (z as f64) / scale;
    let ek: Vec<(f64, f64)> = rows.iter().map(|r| cis(arg(r.z_k))).collect();
    let el: Vec<(f64, f64)> = rows.iter().map(|r| cis(arg(r.z_l))).collect();
    let ekl: Vec<(f64, f64)> = rows.iter().map(|r| cis(arg(r.z_kl))).collect();
    let avg = |v: &[(f64, f64)]| (v.iter().map(|c| c.0).sum::<f64>() / n, v.iter().map(|c| c.1).sum::<f64>() / n);
    let (mk, ml, mkl) = (avg(&ek), avg(&el), avg(&ekl));
    let prod = cmul(mk, ml);
    let d = (mkl.0 - prod.0, mkl.1 - prod.1);
    // influence of one sample on the estimator
    let h: Vec<(f64, f64)> = (0..rows.len())
        .map(|i| {
            let a = cmul(ml, ek[i]);
            let b = cmul(mk, el[i]);
            (ekl[i].0 - a.0 - b.0, ekl[i].1 - a.1 - b.1)
        })
        .collect();
    let mh = avg(&h);
    let ss: f64 = h.iter().map(|c| (c.0 - mh.0).powi(2) + (c.1 - mh.1).powi(2)).sum();
    DefectEstimate {
        n: rows.first().map_or(0, |r| r.k + r.l),
        scale,
        defect: d.0.hypot(d.1),
        se: if rows.len() > 1 { (ss / (n * (n - 1.0))).sqrt() } else { f64::NAN },
    }
}

fn partial_sums(
    next: &mut dyn FnMut() -> Result<u64>,
    seed: u64,
    source: Source,
    pairs: &[(u64, u64)],
) -> Result<Vec<PropBRow>> {
    let mut marks: Vec<u64> = pairs.iter().flat_map(|&(k, l)| [k, l, k + l]).collect();
    marks.sort_unstable();
    marks.dedup();
    let mut sums = Vec::with_capacity(marks.len());
    let (mut total, mut i) = (0u128, 0u64);
    for &m in &marks {
        while i < m {
            total += u128::from(next()?);
            i += 1;
        }
        sums.push(total);
    }
    let at = |m: u64| sums[marks.binary_search(&m).expect("marked")];
    Ok(pairs
        .iter()
        .map(|&(k, l)| PropBRow {
            seed,
            source,
            k,
            l,
            z_k: at(k),
            z_l: at(l),
            z_kl: at(k + l),
        })
        .collect())
}

fn propb_rows(seed: u64, pairs: &[(u64, u64)], max_bits: usize) -> Result<Vec<PropBRow>> {
    let mut orbit = OrbitState::with_max_bits(BitPoint::new(seed), max_bits);
    let mut rows = partial_sums(&mut || orbit.next_digit(), seed, Source::Orbit, pairs)?;
    let mut iid = IidDigits::new(seed, max_bits);
    rows.extend(partial_sums(&mut || iid.next_digit(), seed, Source::Iid, pairs)?);
    Ok(rows)
}

/// Property B defect at `(k, ℓ)` and `t`, for orbit digits and the i.i.d.
/// oracle, with `B = (k+ℓ)·E(χ^{⌊r_{k+ℓ}⌋})`.
pub fn property_b_defect(
    cfg: &ExperimentConfig,
    k: u64,
    l: u64,
    t: f64,
    workers: usize,
) -> Result<(DefectEstimate, DefectEstimate)> {
    let seeds = cfg.seed_list();
    let res = map_seeds(&seeds, workers, |s| propb_rows(s, &[(k, l)], cfg.max_bits))?;
    let rows: Vec<PropBRow> = res.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let scale = property_b_scale(k + l)?;
    let pick = |src: Source| rows.iter().filter(|r| r.source == src).collect::<Vec<_>>();
    Ok((
        defect_from_rows(&pick(Source::Orbit), t, scale),
        defect_from_rows(&pick(Source::Iid), t, scale),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct PropBCheckpoint {
    pub orbit: DefectEstimate,
    pub iid: DefectEstimate,
}

/// Property B at `(k, ℓ) = (⌊n/2⌋, ⌈n/2⌉)` for every grid point `n`, sharing orbits.
pub fn run_property_b(cfg: &ExperimentConfig, workers: usize) -> Result<(Vec<PropBRow>, Summary)> {
    let pairs: Vec<(u64, u64)> = cfg.n_grid.iter().map(|&n| (n / 2, n - n / 2)).collect();
    let seeds = cfg.seed_list();
    let res = map_seeds(&seeds, workers, |s| propb_rows(s, &pairs, cfg.max_bits))?;
    let mut failures = Vec::new();
    let rows: Vec<PropBRow> = collect_rows(&seeds, res, &mut failures).into_iter().flat_map(|(_, r)| r).collect();
    let summary = propb_summary(cfg, &rows, failures)?;
    Ok((rows, summary))
}

pub fn propb_summary(cfg: &ExperimentConfig, rows: &[PropBRow], failures: Vec<SeedFailure>) -> Result<Summary> {
    let t: f64 = num_traits::ToPrimitive::to_f64(&cfg.t).unwrap_or(f64::NAN);
    let mut checkpoints = Vec::new();
    for &n in &cfg.n_grid {
        let scale = property_b_scale(n)?;
        let pick = |src: Source| {
            rows.iter()
                .filter(|r| r.source == src && r.k + r.l == n)
                .collect::<Vec<_>>()
        };
        checkpoints.push(PropBCheckpoint {
            orbit: defect_from_rows(&pick(Source::Orbit), t, scale),
            iid: defect_from_rows(&pick(Source::Iid), t, scale),
        });
    }
    let decreasing = checkpoints.windows(2).all(|w| w[1].orbit.defect < w[0].orbit.defect);
    let trail = |f: &dyn Fn(&PropBCheckpoint) -> String| checkpoints.iter().map(f).collect::<Vec<_>>().join(", ");
    let iid_ok = checkpoints.iter().all(|c| c.iid.defect <= 2.0 * c.iid.se);
    let criteria = vec![
        Criterion::new(
            "propb.defect_decreasing",
            decreasing,
            format!("orbit defects {}", trail(&|c| format!("{}@{} (se {})", c.orbit.defect, c.orbit.n, c.orbit.se))),
        ),
        Criterion::new(
            "propb.iid_consistent_with_zero",
            iid_ok,
            format!("oracle defects {}", trail(&|c| format!("{}@{} (se {})", c.iid.defect, c.iid.n, c.iid.se))),
        ),
    ];
    Ok(Summary::new(
        cfg,
        checkpoints.iter().map(|c| serde_json::to_value(c).expect("plain data")).collect(),
        criteria,
        failures,
    ))
}
