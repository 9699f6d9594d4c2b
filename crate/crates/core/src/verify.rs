//! End-to-end verification: one entry per acceptance criterion, each with
//! its statistics, bounds and pass flag.
//!
//! Thresholds are pinned here, in code. Wall-clock timings are returned
//! separately so the report bytes depend only on `(config, master_seed)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_elliptic_matrix_with, sample_factors, EnsembleSpec, EntryDist};
use crate::error::{Error, Result};
use crate::harness::{
    appendix_diagnostics, ks_two_sample, limit_law_experiment, non_increasing_within_ci,
    ExperimentConfig,
};
use crate::io::config_hash;
use crate::limitlaw::{fuss_catalan_moment_f64, symmetrized_support_edge, LimitLaw};
use crate::potential::{
    laplacian_density, mean_potential_grid, smallest_sv_tail, GridSpec, PotentialGrid,
    TailDiagnostics,
};
use crate::rng::{derive_seed, stream_rng, StreamKind};
use crate::spectra::{build_linearization, shifted_singular_values, symmetrized_spectrum};
use crate::stieltjes::{
    density_from_inversion, form_discrimination, solve_system, StieltjesQuery, SystemForm,
};
use crate::C64;

/// Scale knobs of the verification run. Defaults are the acceptance sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub master_seed: u64,
    pub limit_n: usize,
    pub limit_trials: usize,
    pub delta_n: usize,
    pub delta_trials: usize,
    pub potential_n: usize,
    pub potential_trials: usize,
    pub potential_step: f64,
    pub tail_trials: usize,
    pub tail_ladder: Vec<usize>,
    pub appendix_trials: usize,
    pub appendix_ladder: Vec<usize>,
    pub linearization_instances: usize,
    pub prod1_instances: usize,
    /// Run the determinism double-execution (criterion 10).
    pub check_determinism: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            master_seed: 0x5EED_CAFE,
            limit_n: 256,
            limit_trials: 20,
            delta_n: 512,
            delta_trials: 10,
            potential_n: 256,
            potential_trials: 40,
            potential_step: 0.05,
            tail_trials: 500,
            tail_ladder: vec![64, 128, 256],
            appendix_trials: 100,
            appendix_ladder: vec![32, 64, 128, 256],
            linearization_instances: 100,
            prod1_instances: 1000,
            check_determinism: true,
        }
    }
}

impl VerifyConfig {
    /// Small configuration exercising every code path; used by the
    /// determinism double-run and by quick smoke tests.
    pub fn reduced(master_seed: u64) -> Self {
        VerifyConfig {
            master_seed,
            limit_n: 48,
            limit_trials: 6,
            delta_n: 48,
            delta_trials: 3,
            potential_n: 48,
            potential_trials: 6,
            potential_step: 0.1,
            tail_trials: 40,
            tail_ladder: vec![24, 48],
            appendix_trials: 24,
            appendix_ladder: vec![16, 32, 64],
            linearization_instances: 12,
            prod1_instances: 60,
            check_determinism: false,
        }
    }

    fn seed_for(&self, tag: u64) -> u64 {
        derive_seed(self.master_seed, StreamKind::Auxiliary, 0xC0DE + tag, 0)
    }
}

/// One measured quantity with its pinned bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub statistic: f64,
    pub bound: String,
    pub pass: bool,
}

impl CheckOutcome {
    fn le(name: &str, statistic: f64, bound: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            statistic,
            bound: format!("<= {bound}"),
            pass: statistic <= bound,
        }
    }

    fn ge(name: &str, statistic: f64, bound: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            statistic,
            bound: format!(">= {bound}"),
            pass: statistic >= bound,
        }
    }

    fn in_range(name: &str, statistic: f64, lo: f64, hi: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            statistic,
            bound: format!("in [{lo}, {hi}]"),
            pass: (lo..=hi).contains(&statistic),
        }
    }

    fn flag(name: &str, pass: bool) -> Self {
        CheckOutcome {
            name: name.into(),
            statistic: if pass { 1.0 } else { 0.0 },
            bound: "= 1".into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

impl CriterionResult {
    fn new(id: u32, title: &str, checks: Vec<CheckOutcome>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        CriterionResult {
            id,
            title: title.into(),
            checks,
            pass,
        }
    }

    /// One line per criterion for console output.
    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub config_hash: String,
    pub criteria: Vec<CriterionResult>,
    pub all_pass: bool,
}

/// Wall-clock per criterion in milliseconds, kept out of the report.
pub type Timings = Vec<(String, u64)>;

fn gaussian_spec(seed: u64, n: usize, rho: f64) -> EnsembleSpec {
    EnsembleSpec::new(n, 2, rho, EntryDist::Gaussian, seed)
}

fn experiment(spec: EnsembleSpec, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        ensemble: spec,
        trials,
        z_list: vec![C64::new(0.5, 0.2)],
        alpha_grid: vec![C64::new(0.0, 1.0)],
        ladder: vec![64],
    }
}

// ---------------------------------------------------------------------------
// criteria 1-3: limit law, rho independence, entry-law universality

struct LimitRuns {
    gaussian_half: crate::harness::LimitLawReport,
    gaussian_zero: crate::harness::LimitLawReport,
    rademacher: crate::harness::LimitLawReport,
}

fn limit_runs(config: &VerifyConfig) -> Result<LimitRuns> {
    let gaussian_half = limit_law_experiment(&experiment(
        gaussian_spec(config.seed_for(1), config.limit_n, 0.5),
        config.limit_trials,
    ))?;
    let gaussian_zero = limit_law_experiment(&experiment(
        gaussian_spec(config.seed_for(2), config.limit_n, 0.0),
        config.limit_trials,
    ))?;
    let rademacher = limit_law_experiment(&experiment(
        EnsembleSpec::new(
            config.limit_n,
            2,
            0.5,
            EntryDist::Rademacher,
            config.seed_for(3),
        ),
        config.limit_trials,
    ))?;
    Ok(LimitRuns {
        gaussian_half,
        gaussian_zero,
        rademacher,
    })
}

fn criterion_1(runs: &LimitRuns, config: &VerifyConfig) -> CriterionResult {
    let kuiper_bound = 1.9 / ((config.limit_trials * config.limit_n) as f64).sqrt();
    CriterionResult::new(
        1,
        "limit law: radial KS and angular Kuiper (Gaussian, rho = 0.5)",
        vec![
            CheckOutcome::le("mean radial KS", runs.gaussian_half.mean_radial_ks, 0.05),
            CheckOutcome::le(
                "pooled Kuiper vs uniform angles",
                runs.gaussian_half.pooled_kuiper,
                kuiper_bound,
            ),
        ],
    )
}

fn criterion_2(runs: &LimitRuns) -> Result<CriterionResult> {
    let d = ks_two_sample(
        &runs.gaussian_half.pooled_radii,
        &runs.gaussian_zero.pooled_radii,
    )?;
    Ok(CriterionResult::new(
        2,
        "rho independence: two-sample KS of pooled radii (rho 0.5 vs 0)",
        vec![CheckOutcome::le("two-sample KS", d, 0.03)],
    ))
}

fn criterion_3(runs: &LimitRuns, config: &VerifyConfig) -> CriterionResult {
    let kuiper_bound = 1.9 / ((config.limit_trials * config.limit_n) as f64).sqrt();
    CriterionResult::new(
        3,
        "entry-law universality: limit law under Rademacher entries",
        vec![
            CheckOutcome::le("mean radial KS", runs.rademacher.mean_radial_ks, 0.06),
            CheckOutcome::le(
                "pooled Kuiper vs uniform angles",
                runs.rademacher.pooled_kuiper,
                kuiper_bound,
            ),
        ],
    )
}

// ---------------------------------------------------------------------------
// criterion 4: linearization exactness

fn criterion_4(config: &VerifyConfig) -> Result<CriterionResult> {
    use rand::Rng;
    let outcomes: Vec<Result<(f64, f64)>> = (0..config.linearization_instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed_for(4), StreamKind::Auxiliary, i, 0);
            let n = rng.random_range(4..=64usize);
            let m = rng.random_range(2..=3usize);
            let rho = rng.random_range(-0.9..0.9);
            let z = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let factors: Vec<_> = (0..m)
                .map(|_| sample_elliptic_matrix_with(n, rho, EntryDist::Gaussian, &mut rng))
                .collect::<Result<_>>()?;
            let w = crate::spectra::product(&factors)?;
            let lin = build_linearization(&factors, z)?;
            let sym = symmetrized_spectrum(&lin)?;
            let radius = sym.spectral_radius().max(1e-8);
            let pairing_rel = sym.pairing_residual() / radius;
            let half = sym.positive_half_desc();
            let sv = shifted_singular_values(&w, z)?;
            let svd_dev = half
                .iter()
                .zip(sv.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            Ok((pairing_rel, svd_dev))
        })
        .collect();
    let mut max_pairing = 0.0f64;
    let mut max_dev = 0.0f64;
    for o in outcomes {
        let (p, d) = o?;
        max_pairing = max_pairing.max(p);
        max_dev = max_dev.max(d);
    }
    Ok(CriterionResult::new(
        4,
        "linearization exactness: ± symmetry and SVD agreement",
        vec![
            CheckOutcome::le("max relative pairing residual", max_pairing, 1e-8),
            CheckOutcome::le("max |positive half - singular values|", max_dev, 1e-6),
        ],
    ))
}

// ---------------------------------------------------------------------------
// criterion 5: Stieltjes solver

fn uniform_grid(xmax: f64, h: f64) -> Vec<f64> {
    let count = (2.0 * xmax / h).round() as usize + 1;
    (0..count).map(|i| -xmax + i as f64 * h).collect()
}

fn criterion_5(_config: &VerifyConfig) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    let z_values = [C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.5)];

    // residual / Nevanlinna / branch checks on a 200-point alpha grid per
    // (m, z, form): 100 abscissas at v = 1 and 100 at v = 0.5
    let mut worst_residual = 0.0f64;
    let mut min_im_s = f64::INFINITY;
    let mut branch_ok = true;
    let mut solved = 0usize;
    for m in [2u32, 3] {
        for z in z_values {
            for form in [SystemForm::Statement, SystemForm::Theorem] {
                let queries: Vec<StieltjesQuery> = (0..200)
                    .map(|i| {
                        let u = -4.0 + 8.0 * (i % 100) as f64 / 99.0;
                        let v = if i < 100 { 1.0 } else { 0.5 };
                        StieltjesQuery {
                            alpha: C64::new(u, v),
                            z,
                            m,
                            form,
                        }
                    })
                    .collect();
                let solutions: Vec<Result<crate::stieltjes::StieltjesSolution>> = queries
                    .par_iter()
                    .map(|q| solve_system(q, None, 1e-12, 400))
                    .collect();
                for s in solutions {
                    let sol = s?;
                    solved += 1;
                    worst_residual = worst_residual.max(sol.residuals[0]).max(sol.residuals[1]);
                    min_im_s = min_im_s.min(sol.s.im);
                    branch_ok &= sol.branch_ok;
                }
            }
        }
    }
    checks.push(CheckOutcome::flag(
        &format!("all {solved} grid solves converged"),
        solved == 2 * 3 * 2 * 200,
    ));
    checks.push(CheckOutcome::le(
        "max residual of both printed equations",
        worst_residual,
        1e-12,
    ));
    checks.push(CheckOutcome::ge("min Im(s)", min_im_s, f64::MIN_POSITIVE));
    checks.push(CheckOutcome::flag("Im(w - alpha) > 0 at every point", branch_ok));

    // recovered density mass within 3% of 1 (physical form)
    for m in [2u32, 3] {
        let edge = symmetrized_support_edge(m);
        for z in z_values {
            let ext = edge + z.norm() + 1.2;
            let grid = density_from_inversion(
                z,
                m,
                SystemForm::Statement,
                &uniform_grid(ext, 0.01),
                0.01,
                1e-8,
                300,
            )?;
            checks.push(CheckOutcome::in_range(
                &format!("density mass (m = {m}, z = {z})"),
                grid.mass(),
                0.97,
                1.03,
            ));
        }
    }

    // Fuss-Catalan moments at z = 0, m = 2, eps = 0.005
    let grid = density_from_inversion(
        C64::new(0.0, 0.0),
        2,
        SystemForm::Statement,
        &uniform_grid(symmetrized_support_edge(2) + 0.3, 0.004),
        0.005,
        1e-9,
        300,
    )?;
    for p in [1u32, 2, 3] {
        let expect = fuss_catalan_moment_f64(2, p);
        let got = grid.normalized_moment(2 * p);
        checks.push(CheckOutcome::in_range(
            &format!("even moment 2p = {} vs Fuss-Catalan", 2 * p),
            got / expect,
            0.98,
            1.02,
        ));
    }
    Ok(CriterionResult::new(
        5,
        "Stieltjes solver: residuals, branch, mass, moments",
        checks,
    ))
}

// ---------------------------------------------------------------------------
// criterion 6: distance between solver CDF and empirical spectra

fn criterion_6(config: &VerifyConfig) -> Result<CriterionResult> {
    let z = C64::new(0.5, 0.2);
    let spec = gaussian_spec(config.seed_for(6), config.delta_n, 0.5);
    let spectra: Vec<crate::spectra::SymmetrizedSpectrum> = (0..config.delta_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let factors = sample_factors(&spec, trial)?;
            symmetrized_spectrum(&build_linearization(&factors, z)?)
        })
        .collect::<Result<_>>()?;
    let edge = symmetrized_support_edge(2);
    let report = form_discrimination(z, 2, &spectra, &uniform_grid(edge + 1.0, 0.01), 0.01, 1e-8)?;
    let winner_delta = report.statement_delta.min(report.theorem_delta);
    Ok(CriterionResult::new(
        6,
        "winning system form matches the symmetrized empirical spectrum",
        vec![
            CheckOutcome::le("winning form mean Delta_n", winner_delta, 0.08),
            CheckOutcome::flag(
                &format!(
                    "form discrimination resolved (statement {:.4}, theorem {:.4}, winner {:?})",
                    report.statement_delta, report.theorem_delta, report.winner
                ),
                report.resolved,
            ),
        ],
    ))
}

// ---------------------------------------------------------------------------
// criterion 7: potential pipeline

fn criterion_7(config: &VerifyConfig) -> Result<CriterionResult> {
    let mut checks = Vec::new();

    // analytic round-trip: 5-point Laplacian of the closed-form potential
    // recovers the density within 1% on the annulus
    for m in [1u32, 2] {
        let law = LimitLaw::new(m)?;
        let h = 1e-3;
        let mut max_rel = 0.0f64;
        for k in 0..40 {
            let r = 0.42 + 0.40 * (k % 8) as f64 / 7.0;
            let theta = 2.0 * std::f64::consts::PI * (k / 8) as f64 / 5.0;
            let center = C64::from_polar(r, theta);
            let mini = GridSpec {
                x_min: center.re - h,
                x_max: center.re + h,
                y_min: center.im - h,
                y_max: center.im + h,
                step: h,
            };
            let grid = PotentialGrid::from_function(mini, |w| law.potential(w))?;
            let field = laplacian_density(&grid)?;
            let got = field.values[0];
            let expect = law.density(center.re, center.im);
            max_rel = max_rel.max((got - expect).abs() / expect);
        }
        checks.push(CheckOutcome::le(
            &format!("analytic round-trip max relative error (m = {m})"),
            max_rel,
            0.01,
        ));
    }

    // Monte Carlo round-trip at the pinned desk scale
    let spec = gaussian_spec(config.seed_for(7), config.potential_n, 0.5);
    let extent = (0.85f64 + 2.0 * config.potential_step).min(0.95);
    let steps = (extent / config.potential_step).floor();
    let grid_spec = GridSpec::centered_square(steps * config.potential_step, config.potential_step);
    let grid = mean_potential_grid(&spec, &grid_spec, config.potential_trials)?;
    checks.push(CheckOutcome::le(
        "masked point fraction",
        grid.masked_fraction(),
        1e-3,
    ));
    let field = laplacian_density(&grid)?;
    let law = LimitLaw::new(2)?;
    let mut rels = Vec::new();
    let mut ring: Vec<(f64, f64, usize)> = vec![(0.0, 0.0, 0); 9];
    for iy in 0..field.spec.ny() {
        for ix in 0..field.spec.nx() {
            let zpt = field.spec.point(ix, iy);
            let r = zpt.norm();
            if !(0.4..=0.85).contains(&r) {
                continue;
            }
            let got = field.values[field.index(ix, iy)];
            let g = law.density(zpt.re, zpt.im);
            rels.push((got - g).abs() / g);
            let bin = (((r - 0.4) / 0.05) as usize).min(8);
            ring[bin].0 += got;
            ring[bin].1 += g;
            ring[bin].2 += 1;
        }
    }
    let max_rel = rels.iter().cloned().fold(0.0, f64::max);
    let mean_rel = rels.iter().sum::<f64>() / rels.len().max(1) as f64;
    let ring_rel = ring
        .iter()
        .filter(|(_, _, c)| *c > 0)
        .map(|(got, g, c)| ((got - g) / *c as f64).abs() / (g / *c as f64))
        .fold(0.0f64, f64::max);
    checks.push(CheckOutcome::le(
        "Monte Carlo round-trip max relative error on annulus",
        max_rel,
        0.15,
    ));
    checks.push(CheckOutcome::le(
        "Monte Carlo round-trip mean relative error on annulus",
        mean_rel,
        0.15,
    ));
    checks.push(CheckOutcome::le(
        "azimuthally averaged profile max relative error",
        ring_rel,
        0.15,
    ));
    Ok(CriterionResult::new(
        7,
        "potential pipeline: analytic and Monte Carlo density round-trips",
        checks,
    ))
}

// ---------------------------------------------------------------------------
// criterion 8: singular-value safeguards

fn criterion_8(config: &VerifyConfig) -> Result<CriterionResult> {
    let mut freqs = Vec::new();
    let mut trials = Vec::new();
    let diag = TailDiagnostics::default();
    for &n in &config.tail_ladder {
        let spec = gaussian_spec(config.seed_for(8), n, 0.5);
        let report = smallest_sv_tail(&spec, &diag, config.tail_trials)?;
        freqs.push(report.frequency);
        trials.push(report.trials);
    }
    let monotone = non_increasing_within_ci(&freqs, &trials);

    // product inequality over random 8x8 pairs, in the log domain
    let outcomes: Vec<(f64, f64)> = (0..config.prod1_instances as u64)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            use rand_distr::StandardNormal;
            let mut rng = stream_rng(config.seed_for(88), StreamKind::Auxiliary, i, 0);
            let n = 8;
            let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let b = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let sv = |m: &nalgebra::DMatrix<f64>| -> Vec<f64> {
                let mut s: Vec<f64> = m.clone().svd_unordered(false, false).singular_values.iter().copied().collect();
                s.sort_by(|x, y| y.partial_cmp(x).unwrap());
                s
            };
            let sa = sv(&a);
            let sb = sv(&b);
            let sab = sv(&(a * b));
            let mut min_slack = f64::INFINITY;
            for k in 0..n {
                let lhs: f64 = sab[k..].iter().map(|s| s.ln()).sum();
                let rhs: f64 = sa[k..].iter().zip(&sb[k..]).map(|(x, y)| x.ln() + y.ln()).sum();
                min_slack = min_slack.min(lhs - rhs);
            }
            let lhs: f64 = sab.iter().map(|s| s.ln()).sum();
            let rhs: f64 = sa.iter().zip(&sb).map(|(x, y)| x.ln() + y.ln()).sum();
            (min_slack, (lhs - rhs).abs())
        })
        .collect();
    let min_slack = outcomes.iter().map(|(s, _)| *s).fold(f64::INFINITY, f64::min);
    let max_eq_dev = outcomes.iter().map(|(_, d)| *d).fold(0.0f64, f64::max);

    Ok(CriterionResult::new(
        8,
        "singular-value safeguards: tail monotonicity and product inequality",
        vec![
            CheckOutcome::flag(
                &format!("exceedance frequency non-increasing in n {:?}", freqs),
                monotone,
            ),
            CheckOutcome::ge("min log-slack of the product inequality", min_slack, -1e-9),
            CheckOutcome::le("max |log equality defect| at k = 1", max_eq_dev, 1e-6),
        ],
    ))
}

// ---------------------------------------------------------------------------
// criterion 9: appendix diagnostics

fn criterion_9(config: &VerifyConfig) -> Result<CriterionResult> {
    let mut exp = experiment(
        gaussian_spec(config.seed_for(9), 64, 0.5),
        config.appendix_trials,
    );
    exp.ladder = config.appendix_ladder.clone();
    exp.z_list = vec![C64::new(0.5, 0.0)];
    let report = appendix_diagnostics(&exp)?;
    Ok(CriterionResult::new(
        9,
        "appendix diagnostics: Frobenius growth and trace-variance decay",
        vec![
            CheckOutcome::in_range("Frobenius scaling slope", report.frobenius_slope, 0.9, 1.1),
            CheckOutcome::in_range(
                "trace-variance decay slope at v = 2",
                report.trace_variance_slope,
                -1.35,
                -0.65,
            ),
            CheckOutcome::le(
                "|grand mean z-score| of partial products",
                report.mean_zscore_single.abs().max(report.mean_zscore_full.abs()),
                4.0,
            ),
            CheckOutcome::le("Frobenius max/min ratio across ladder", report.frobenius_ratio, 3.0),
        ],
    ))
}

// ---------------------------------------------------------------------------
// criterion 10: determinism

fn criterion_10(config: &VerifyConfig) -> Result<CriterionResult> {
    let reduced = VerifyConfig::reduced(config.master_seed ^ 0xD17E);
    let run_in_pool = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let (report, _) = pool.install(|| run_verification(&reduced))?;
        Ok(serde_json::to_string(&report)?)
    };
    let one = run_in_pool(1)?;
    let four = run_in_pool(4)?;
    let again = run_in_pool(4)?;
    Ok(CriterionResult::new(
        10,
        "determinism: byte-identical reports across thread counts and reruns",
        vec![
            CheckOutcome::flag("1-thread vs 4-thread bytes equal", one == four),
            CheckOutcome::flag("repeated 4-thread run bytes equal", four == again),
        ],
    ))
}

/// Run every criterion and assemble the report.
pub fn run_verification(config: &VerifyConfig) -> Result<(VerifyReport, Timings)> {
    let mut criteria = Vec::new();
    let mut timings: Timings = Vec::new();
    let mut record = |name: &str, start: std::time::Instant| {
        timings.push((name.into(), start.elapsed().as_millis() as u64));
    };

    let t = std::time::Instant::now();
    let runs = limit_runs(config)?;
    criteria.push(criterion_1(&runs, config));
    criteria.push(criterion_2(&runs)?);
    criteria.push(criterion_3(&runs, config));
    record("criteria 1-3 (limit law runs)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_4(config)?);
    record("criterion 4 (linearization)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_5(config)?);
    record("criterion 5 (stieltjes)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_6(config)?);
    record("criterion 6 (delta_n)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_7(config)?);
    record("criterion 7 (potential)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_8(config)?);
    record("criterion 8 (singular values)", t);

    let t = std::time::Instant::now();
    criteria.push(criterion_9(config)?);
    record("criterion 9 (appendix)", t);

    if config.check_determinism {
        let t = std::time::Instant::now();
        criteria.push(criterion_10(config)?);
        record("criterion 10 (determinism)", t);
    }

    let all_pass = criteria.iter().all(|c| c.pass);
    let report = VerifyReport {
        config: config.clone(),
        config_hash: config_hash(config)?,
        criteria,
        all_pass,
    };
    Ok((report, timings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_verification_runs_and_is_deterministic() {
        let config = VerifyConfig::reduced(7);
        let (a, _) = run_verification(&config).unwrap();
        let (b, _) = run_verification(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.criteria.len(), 9, "determinism criterion is skipped in reduced runs");
        // structural criteria hold even at the reduced scale
        for c in &a.criteria {
            if [4, 5].contains(&c.id) {
                assert!(c.pass, "criterion {} failed at reduced scale: {:?}", c.id, c.checks);
            }
        }
    }
}
