//! The exact invariant suites. Every check counts the cases it examined and the
//! defects it found; failures are data, never panics.

use std::time::Instant;

use num_traits::{ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::dynamics::{chi_u64, digit_halving_defect, induced_affine_pair, verify_beta_indexing, OrbitState};
use crate::error::Result;
use crate::exactnum::{int, pow2_inv, rat, BitPoint, Rational, StepFunction};
use crate::observables::{
    cell_of, chi_trunc_step, eta_lower_sharp, eta_lower_stated, eta_trunc, eta_upper, expect_chi_trunc, expect_vm,
    partition_mass, vm_cell, wm_cell, CellIndex,
};
use crate::spectral::{
    alpha_bound_holds, alpha_coefficient, bernstein_simple, correlation, correlation_bound, correlation_transfer,
    digit_event, duality_check, joint_measure_tau, joint_measure_tau_b, joint_measure_tau_b_unchecked,
    second_moment_tn, variation_decay_check, DigitCondition, InducedEvent,
};
use crate::trimming::{b_asymptote, b_of_n, PsiClass, PsiSpec, SumLedger};

use super::config::{geometric_grid, ExperimentConfig};
use super::parallel::map_seeds;
use super::{Criterion, Summary};

/// One invariant: how many cases were checked and how many failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub suite: &'static str,
    pub name: String,
    pub checked: u64,
    pub defects: u64,
    pub pass: bool,
    /// First failing case, if any.
    pub witness: String,
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl InvariantReport {
    fn new(suite: &'static str, name: impl Into<String>, checked: u64, defects: u64, witness: Option<String>, t0: Instant) -> Self {
        InvariantReport {
            suite,
            name: name.into(),
            checked,
            defects,
            pass: defects == 0,
            witness: witness.unwrap_or_default(),
            runtime_ms: t0.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// A negative control: passes when the checker did flag the planted defect.
    fn control(suite: &'static str, name: &str, detected: bool, witness: String, t0: Instant) -> Self {
        let mut r = Self::new(suite, name, 1, u64::from(!detected), Some(witness), t0);
        r.pass = detected;
        r
    }
}

/// Sizes of the lemma suite; the defaults are the acceptance sizes.
#[derive(Clone, Debug)]
pub struct LemmaSizes {
    pub halving_points: u64,
    pub halving_len: u64,
    pub beta_orbits: u64,
    pub beta_len: u64,
    pub affine_fixtures: u64,
    pub sandwich_points: u64,
    pub sandwich_r: Vec<u64>,
    pub closed_form_max_r: u64,
    pub ledger_sequences: u64,
    pub ledger_max_len: u64,
    pub ledger_max_b: usize,
    pub b_grid_max: u64,
}

impl Default for LemmaSizes {
    fn default() -> Self {
        LemmaSizes {
            halving_points: 100_000,
            halving_len: 1_000,
            beta_orbits: 1_000,
            beta_len: 1_000,
            affine_fixtures: 1_000,
            sandwich_points: 100_000,
            sandwich_r: vec![4, 64, 1024],
            closed_form_max_r: 1_000,
            ledger_sequences: 1_000,
            ledger_max_len: 10_000,
            ledger_max_b: 32,
            b_grid_max: 1_000_000_000_000,
        }
    }
}

impl LemmaSizes {
    /// A small configuration for smoke tests.
    pub fn quick() -> Self {
        LemmaSizes {
            halving_points: 200,
            halving_len: 200,
            beta_orbits: 20,
            beta_len: 100,
            affine_fixtures: 50,
            sandwich_points: 300,
            sandwich_r: vec![4, 64],
            closed_form_max_r: 40,
            ledger_sequences: 20,
            ledger_max_len: 500,
            ledger_max_b: 32,
            b_grid_max: 1_000_000,
        }
    }
}

const LEMMAS: &str = "lemmas";
const SPECTRAL: &str = "spectral";

/// Tallies per-case outcomes, keeping the first witness.
#[derive(Default)]
struct Tally {
    checked: u64,
    defects: u64,
    witness: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.defects += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.defects += other.defects;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
    }

    fn report(self, suite: &'static str, name: impl Into<String>, t0: Instant) -> InvariantReport {
        InvariantReport::new(suite, name, self.checked, self.defects, self.witness, t0)
    }
}

fn error_tally(seed: u64, e: crate::error::Error) -> Tally {
    Tally {
        checked: 1,
        defects: 1,
        witness: Some(format!("seed {seed}: {e}")),
    }
}

fn orbit_digits(seed: u64, len: u64, max_bits: usize) -> Result<Vec<u64>> {
    let mut o = OrbitState::with_max_bits(BitPoint::new(seed), max_bits);
    (0..len).map(|_| o.next_digit()).collect()
}

/// Deterministic rationals in (0,1) with assorted denominators.
pub fn rational_fixtures(count: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1C5);
    (0..count)
        .map(|_| {
            let q = 3 + rng.next_u64() % 1_000_003;
            let p = 1 + rng.next_u64() % (q - 1);
            rat(p as i64, q as i64)
        })
        .collect()
}

/// The deterministic lemma suite.
pub fn run_lemma_suite(cfg: &ExperimentConfig, sizes: &LemmaSizes, workers: usize) -> Result<Vec<InvariantReport>> {
    let mut out = Vec::new();
    let mb = cfg.max_bits;
    let seeds_of = |count: u64| (0..count).map(|i| cfg.seed_base.wrapping_add(i)).collect::<Vec<_>>();

    // a_{i+k} = ⌊a_i/2^k⌋ for k ≤ ⌊log₂ a_i⌋
    let t0 = Instant::now();
    let seeds = seeds_of(sizes.halving_points);
    let parts = map_seeds(&seeds, workers, |s| match orbit_digits(s, sizes.halving_len, mb) {
        Ok(d) => {
            let defect = digit_halving_defect(&d);
            Tally {
                checked: d.len() as u64,
                defects: defect,
                witness: (defect > 0).then(|| format!("seed {s}")),
            }
        }
        Err(e) => error_tally(s, e),
    })?;
    let mut t = Tally::default();
    parts.into_iter().for_each(|p| t.merge(p));
    out.push(t.report(LEMMAS, "digit_halving", t0));

    // the checker must notice one planted defect
    let t0 = Instant::now();
    let mut d = orbit_digits(cfg.seed_base, 1_000, mb)?;
    let clean = digit_halving_defect(&d);
    let pos = d.iter().position(|&a| a >= 2).filter(|&i| i + 1 < d.len());
    let detected = match pos {
        Some(i) => {
            d[i + 1] += 1;
            clean == 0 && digit_halving_defect(&d) > 0
        }
        None => false,
    };
    out.push(InvariantReport::control(
        LEMMAS,
        "digit_halving_mutation_control",
        detected,
        format!("mutated digit {:?}, clean defect {clean}", pos.map(|i| i + 2)),
        t0,
    ));

    // β_k = a_{φ_{k−1}+1}
    let t0 = Instant::now();
    let seeds = seeds_of(sizes.beta_orbits);
    let parts = map_seeds(&seeds, workers, |s| match verify_beta_indexing(s, sizes.beta_len, mb) {
        Ok(defect) => Tally {
            checked: sizes.beta_len,
            defects: defect,
            witness: (defect > 0).then(|| format!("seed {s}")),
        },
        Err(e) => error_tally(s, e),
    })?;
    let mut t = Tally::default();
    parts.into_iter().for_each(|p| t.merge(p));
    out.push(t.report(LEMMAS, "beta_indexing", t0));

    // τ_B x = 2^φ x − 1
    let t0 = Instant::now();
    let mut t = Tally::default();
    for x in rational_fixtures(sizes.affine_fixtures) {
        match induced_affine_pair(&x, mb) {
            Ok((got, want)) => t.record(got == want, || format!("x = {x}: {got} vs {want}")),
            Err(e) => t.record(false, || format!("x = {x}: {e}")),
        }
    }
    out.push(t.report(LEMMAS, "induced_affine", t0));

    out.extend(sandwich_checks(cfg, sizes, workers)?);
    out.extend(closed_form_checks(sizes));

    // streaming ledger against sort-and-drop
    let t0 = Instant::now();
    let seeds = seeds_of(sizes.ledger_sequences);
    let parts = map_seeds(&seeds, workers, |s| {
        let len = 1 + ChaCha8Rng::seed_from_u64(s ^ 0x1ED6E).next_u64() % sizes.ledger_max_len;
        let digits = match orbit_digits(s, len, mb) {
            Ok(d) => d,
            Err(e) => return error_tally(s, e),
        };
        let mut ledger = SumLedger::new(sizes.ledger_max_b, &[]);
        digits.iter().for_each(|&a| ledger.push(a));
        let mut sorted = digits.clone();
        sorted.sort_unstable();
        let mut t = Tally::default();
        for b in 0..=sizes.ledger_max_b.min(digits.len()) {
            let want: u128 = sorted[..sorted.len() - b].iter().map(|&a| u128::from(a)).sum();
            let got = ledger.trimmed_sum(b);
            t.record(got.as_ref() == Ok(&want), || format!("seed {s}, b {b}: {got:?} vs {want}"));
        }
        t
    })?;
    let mut t = Tally::default();
    parts.into_iter().for_each(|p| t.merge(p));
    out.push(t.report(LEMMAS, "ledger_vs_sort", t0));

    out.push(b_asymptote_check(sizes.b_grid_max)?);
    Ok(out)
}

/// `w_m^r ≤ η^r ≤ v_m^r` and the two forms of the η bracket.
fn sandwich_checks(cfg: &ExperimentConfig, sizes: &LemmaSizes, workers: usize) -> Result<Vec<InvariantReport>> {
    let t0 = Instant::now();
    let mb = cfg.max_bits;
    let rs = &sizes.sandwich_r;
    let seeds: Vec<u64> = (0..sizes.sandwich_points).map(|i| cfg.seed_base.wrapping_add(i)).collect();
    // per point: [lower, upper] per (m, r), then stated, sharp
    let slots = 2 * 3 * rs.len() + 2;
    let parts = map_seeds(&seeds, workers, |s| -> Vec<Tally> {
        let mut tallies: Vec<Tally> = (0..slots).map(|_| Tally::default()).collect();
        let mut p = BitPoint::new(s);
        let mut run = || -> Result<()> {
            let etas: Vec<u64> = rs.iter().map(|&r| eta_trunc(&mut p, r, mb)).collect::<Result<_>>()?;
            for m in 1..=3u32 {
                let cell = cell_of(&mut p, m, mb)?;
                for (k, (&r, &e)) in rs.iter().zip(&etas).enumerate() {
                    let er = int(e as i64);
                    let w = wm_cell(&cell, r);
                    let v = vm_cell(&cell, r);
                    let base = 2 * ((m as usize - 1) * rs.len() + k);
                    tallies[base].record(w <= er, || format!("seed {s}: w = {w} > η^r = {e} on {cell:?}"));
                    tallies[base + 1].record(er <= v, || format!("seed {s}: η^r = {e} > v = {v} on {cell:?}"));
                }
            }
            let chi = chi_u64(&mut p, mb)?;
            let eta = eta_trunc(&mut p, u64::MAX, mb)? as i128;
            let up = eta_upper(chi);
            let lo = eta_lower_stated(chi);
            tallies[slots - 2].record(lo <= eta && eta <= up, || format!("seed {s}: χ = {chi}, η = {eta}, bracket [{lo}, {up}]"));
            let lo = eta_lower_sharp(chi);
            tallies[slots - 1].record(lo <= eta && eta <= up, || format!("seed {s}: χ = {chi}, η = {eta}, bracket [{lo}, {up}]"));
            Ok(())
        };
        if let Err(e) = run() {
            for t in tallies.iter_mut() {
                t.record(false, || format!("seed {s}: {e}"));
            }
        }
        tallies
    })?;
    let mut total: Vec<Tally> = (0..slots).map(|_| Tally::default()).collect();
    for part in parts {
        for (acc, t) in total.iter_mut().zip(part) {
            acc.merge(t);
        }
    }
    let mut names = Vec::new();
    for m in 1..=3 {
        for r in rs {
            names.push(format!("sandwich_lower_m{m}_r{r}"));
            names.push(format!("sandwich_upper_m{m}_r{r}"));
        }
    }
    names.push("eta_bracket_stated".into());
    names.push("eta_bracket_sharp".into());
    Ok(total.into_iter().zip(names).map(|(t, n)| t.report(LEMMAS, n, t0)).collect())
}

fn closed_form_checks(sizes: &LemmaSizes) -> Vec<InvariantReport> {
    let mut out = Vec::new();
    let t0 = Instant::now();
    let mut t = Tally::default();
    for r in 1..=sizes.closed_form_max_r {
        let a = expect_chi_trunc(r);
        let b = chi_trunc_step(r).integral();
        t.record(a == b, || format!("r = {r}: {a} vs {b}"));
    }
    out.push(t.report(LEMMAS, "expect_chi_trunc_vs_integral", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for r in 1..=sizes.closed_form_max_r {
        let q = 63 - r.leading_zeros() as i64;
        let a = expect_vm(1, r);
        t.record(a == int(2 * (q + 2)), || format!("r = {r}: {a}"));
    }
    out.push(t.report(LEMMAS, "expect_v1_closed_form", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for m in 1..=3 {
        for cap in 0..=24u32 {
            let (finite, tail) = partition_mass(m, cap);
            let below = StepFunction::indicator(int(0), pow2_inv(cap + 1)).expect("dyadic").integral();
            t.record(&finite + &tail == int(1) && tail == below, || format!("m = {m}, cap = {cap}: {finite} + {tail}"));
        }
    }
    out.push(t.report(LEMMAS, "partition_mass", t0));
    out
}

/// `|b_n − (1+ε)/log 2 · log log log n| ≤ 2` for `ψ(k) = k (log k)^{1+ε}`.
fn b_asymptote_check(n_max: u64) -> Result<InvariantReport> {
    let t0 = Instant::now();
    let mut t = Tally::default();
    for (eps, exp) in [("0.1", "1.1"), ("1", "2")] {
        let psi = PsiSpec::n_log_pow(exp, PsiClass::Summable)?;
        let e = crate::trimming::psi::parse_decimal(eps)?;
        for n in geometric_grid(1_000, n_max) {
            let b = b_of_n(n, &psi)?;
            let a = b_asymptote(n, &e)?;
            t.record((b as f64 - a).abs() <= 2.0, || format!("ε = {eps}, n = {n}: b_n = {b}, asymptote {a}"));
        }
    }
    Ok(t.report(LEMMAS, "b_n_asymptote", t0))
}

/// Sizes of the spectral suite.
#[derive(Clone, Debug)]
pub struct SpectralSizes {
    pub duality_functions: usize,
    pub decay_functions: usize,
    pub decay_max_n: u32,
    pub corr_max_r: u64,
    pub corr_max_n: u32,
    /// `r` values also checked through the pullback route.
    pub corr_cross_r: Vec<u64>,
    pub alpha_max_len: u32,
    pub alpha_max_cap: u64,
    pub alpha_max_gap: u32,
}

impl Default for SpectralSizes {
    fn default() -> Self {
        SpectralSizes {
            duality_functions: 10,
            decay_functions: 50,
            decay_max_n: 10,
            corr_max_r: 64,
            corr_max_n: 12,
            corr_cross_r: vec![1, 2, 4, 8, 16, 32, 64],
            alpha_max_len: 2,
            alpha_max_cap: 6,
            alpha_max_gap: 12,
        }
    }
}

impl SpectralSizes {
    pub fn quick() -> Self {
        SpectralSizes {
            duality_functions: 4,
            decay_functions: 8,
            decay_max_n: 6,
            corr_max_r: 8,
            corr_max_n: 6,
            corr_cross_r: vec![4],
            alpha_max_len: 1,
            alpha_max_cap: 3,
            alpha_max_gap: 6,
        }
    }
}

/// Deterministic step-function fixtures: random rational breakpoints with
/// small integer values, plus truncated χ and digit-event indicators.
pub fn step_fixtures(count: usize) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EC7);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let f = match idx % 5 {
            3 => chi_trunc_step(1 + (idx as u64 % 9)),
            4 => {
                let a = 1 + rng.next_u64() % 6;
                digit_event(&DigitCondition::Eq(a), 6).expect("digit cell").indicator()
            }
            _ => {
                let q = 2 + (rng.next_u64() % 40) as i64;
                let pieces = 1 + rng.next_u64() % 6;
                let mut cuts: Vec<i64> = (0..pieces).map(|_| 1 + (rng.next_u64() % (q as u64 - 1).max(1)) as i64).collect();
                cuts.sort_unstable();
                cuts.dedup();
                cuts.retain(|&c| c < q);
                let mut breaks = vec![int(0)];
                breaks.extend(cuts.iter().map(|&c| rat(c, q)));
                breaks.push(int(1));
                let values = (0..breaks.len() - 1).map(|_| int((rng.next_u64() % 7) as i64 - 3)).collect();
                StepFunction::new(breaks, values).expect("sorted breakpoints")
            }
        };
        out.push(f);
    }
    out
}

/// Enumerated stride-respecting τ_B event tuples: `(stride, offset, tuple)`.
pub fn induced_event_family() -> Vec<(u32, u64, Vec<(u64, InducedEvent)>)> {
    let mut out = Vec::new();
    let patterns: [&[u64]; 6] = [&[0], &[0, 1], &[0, 2], &[0, 1, 2], &[1, 3], &[0, 1, 3]];
    for m in 1..=3u32 {
        let mut pool: Vec<InducedEvent> = CellIndex::enumerate(m, 8).map(InducedEvent::cell).collect();
        pool.extend((1..=8).map(InducedEvent::level_tail));
        let cells: Vec<CellIndex> = CellIndex::enumerate(m, 3).collect();
        for w in cells.windows(2).step_by(2) {
            pool.push(InducedEvent::cells(w.to_vec()));
        }
        pool.push(InducedEvent::cells(vec![cells[0]]).with_tail(5));
        let mut pick = 0usize;
        for offset in 0..2u64 {
            for pat in patterns {
                for _ in 0..6 {
                    let tuple = pat
                        .iter()
                        .map(|&t| {
                            pick = (pick * 7 + 3) % pool.len();
                            (offset + t * u64::from(m), pool[pick].clone())
                        })
                        .collect();
                    out.push((m, offset, tuple));
                }
            }
        }
    }
    out
}

/// The deterministic spectral suite.
pub fn run_spectral_suite(sizes: &SpectralSizes, piece_cap: u64) -> Result<Vec<InvariantReport>> {
    let mut out = Vec::new();
    let fixtures = step_fixtures(sizes.decay_functions.max(sizes.duality_functions));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for (i, phi) in fixtures[..sizes.duality_functions].iter().enumerate() {
        for (j, z) in fixtures[..sizes.duality_functions].iter().enumerate() {
            let d = duality_check(phi, z, piece_cap)?;
            t.record(d.is_zero(), || format!("pair ({i}, {j}): defect {d}"));
        }
    }
    out.push(t.report(SPECTRAL, "duality", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for (i, z) in fixtures[..sizes.decay_functions].iter().enumerate() {
        for n in 0..=sizes.decay_max_n {
            let (v, b) = variation_decay_check(z, n)?;
            t.record(v <= b, || format!("fixture {i}, n = {n}: V = {v} > {b}"));
        }
    }
    out.push(t.report(SPECTRAL, "variation_decay", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for r in 1..=sizes.corr_max_r {
        let c = chi_trunc_step(r);
        for n in 0..=sizes.corr_max_n {
            let cor = correlation_transfer(&c, &c, n)?;
            let bound = correlation_bound(&c, &c, n);
            t.record(cor <= bound, || format!("r = {r}, n = {n}: {cor} > {bound}"));
        }
    }
    out.push(t.report(SPECTRAL, "correlation_bound", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for &r in &sizes.corr_cross_r {
        let c = chi_trunc_step(r);
        for n in 0..=sizes.corr_max_n {
            let a = correlation(&c, &c, n, piece_cap)?;
            let b = correlation_transfer(&c, &c, n)?;
            t.record(a == b, || format!("r = {r}, n = {n}: pullback {a} vs transfer {b}"));
        }
    }
    out.push(t.report(SPECTRAL, "correlation_routes_agree", t0));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for (m, offset, tuple) in induced_event_family() {
        let joint = joint_measure_tau_b(&tuple, m, offset, 8)?;
        let mut prod = int(1);
        for (_, e) in &tuple {
            prod *= e.to_event()?.measure();
        }
        t.record(joint == prod, || format!("m = {m}, offset {offset}, {tuple:?}: {joint} vs {prod}"));
    }
    out.push(t.report(SPECTRAL, "induced_independence", t0));

    // resolution-2 cells one induced step apart are dependent
    let t0 = Instant::now();
    let a = InducedEvent::cell(CellIndex { j: 0, i: 0, m: 2 });
    let b = InducedEvent::level(0);
    let rejected = joint_measure_tau_b(&[(0, a.clone()), (1, b.clone())], 2, 0, 8).is_err();
    let joint = joint_measure_tau_b_unchecked(&[(0, a.to_event()?), (1, b.to_event()?)])?;
    let prod = a.to_event()?.measure() * b.to_event()?.measure();
    out.push(InvariantReport::control(
        SPECTRAL,
        "induced_stride_control",
        rejected && joint != prod,
        format!("rejected {rejected}, joint {joint} vs product {prod}"),
        t0,
    ));

    let t0 = Instant::now();
    let e2 = digit_event(&DigitCondition::Eq(2), 6)?;
    let e1 = digit_event(&DigitCondition::Eq(1), 6)?;
    let defect = joint_measure_tau(&[(0, e2.clone()), (1, e1.clone())], piece_cap)? - e2.measure() * e1.measure();
    let ok = defect == rat(1, 12);
    out.push(InvariantReport::new(
        SPECTRAL,
        "tau_dependence_witness",
        1,
        u64::from(!ok),
        (!ok).then(|| format!("defect {defect}")),
        t0,
    ));

    let t0 = Instant::now();
    let mut t = Tally::default();
    for k in 1..=sizes.alpha_max_len {
        for f in 1..=sizes.alpha_max_len {
            for d in 1..=sizes.alpha_max_cap {
                for n in 1..=sizes.alpha_max_gap {
                    let a = alpha_coefficient(k, n, f, d)?;
                    t.record(alpha_bound_holds(&a, n), || format!("k {k}, f {f}, D {d}, n {n}: α = {a}"));
                }
            }
        }
    }
    out.push(t.report(SPECTRAL, "alpha_bound", t0));

    let t0 = Instant::now();
    let n = 64u64;
    let r = crate::trimming::thresholds(n)?.r_floor;
    let (_, hi) = second_moment_tn(n, r, crate::spectral::MAX_EXACT_LAG)?;
    let ln = (n as f64).ln();
    let hi_f = hi.to_f64().unwrap_or(f64::INFINITY);
    let ok = hi_f <= 9.0 * (n * n) as f64 * ln * ln;
    out.push(InvariantReport::new(
        SPECTRAL,
        "second_moment_bound_n64",
        1,
        u64::from(!ok),
        (!ok).then(|| format!("upper {hi_f}")),
        t0,
    ));

    let t0 = Instant::now();
    let b = bernstein_simple(&int(1), &int(60), &int(10), 128)?;
    let want = 2.0 * (-2.25f64).exp();
    let ok = (b.to_f64() - want).abs() <= 1e-12 * want;
    out.push(InvariantReport::new(
        SPECTRAL,
        "bernstein_example",
        1,
        u64::from(!ok),
        (!ok).then(|| format!("{} vs {want}", b.to_f64())),
        t0,
    ));
    Ok(out)
}

/// Summary of a suite run: one criterion per invariant.
pub fn suite_summary(cfg: &ExperimentConfig, reports: &[InvariantReport]) -> Summary {
    let criteria = reports
        .iter()
        .map(|r| {
            Criterion::new(
                &format!("{}.{}", r.suite, r.name),
                r.pass,
                format!("{} checked, {} defects{}", r.checked, r.defects, if r.witness.is_empty() { String::new() } else { format!("; {}", r.witness) }),
            )
        })
        .collect();
    let mut s = Summary::new(cfg, Vec::new(), criteria, Vec::new());
    if cfg.timings {
        s.extra = reports
            .iter()
            .map(|r| serde_json::json!({ "name": r.name, "runtime_ms": r.runtime_ms }))
            .collect();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Experiment;

    #[test]
    fn quick_lemma_suite() {
        let cfg = ExperimentConfig::new(Experiment::LemmaSuite);
        let reports = run_lemma_suite(&cfg, &LemmaSizes::quick(), 1).unwrap();
        let get = |n: &str| reports.iter().find(|r| r.name == n).unwrap();
        for name in [
            "digit_halving",
            "digit_halving_mutation_control",
            "beta_indexing",
            "induced_affine",
            "sandwich_upper_m2_r64",
            "sandwich_lower_m1_r4",
            "eta_bracket_sharp",
            "expect_chi_trunc_vs_integral",
            "expect_v1_closed_form",
            "partition_mass",
            "ledger_vs_sort",
            "b_n_asymptote",
        ] {
            assert!(get(name).pass, "{:?}", get(name));
        }
        // χ = 1 already breaks the stated bracket (η = 1 < 2)
        assert!(!get("eta_bracket_stated").pass);
        assert!(get("digit_halving").checked >= 200 * 200);
    }

    #[test]
    fn quick_spectral_suite() {
        let reports = run_spectral_suite(&SpectralSizes::quick(), crate::exactnum::DEFAULT_PIECE_CAP).unwrap();
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn family_is_large_enough() {
        let fam = induced_event_family();
        assert!(fam.len() >= 200);
        assert!(fam.iter().all(|(m, _, t)| *m <= 3 && t.len() <= 3 && t.iter().all(|(_, e)| e.max_level() <= 8)));
    }
}
