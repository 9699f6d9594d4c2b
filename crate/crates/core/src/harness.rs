//! Seeded Monte Carlo experiments and the statistics they aggregate.
//!
//! Trials are the unit of parallelism. Every trial draws its matrices from
//! streams addressed by `(master_seed, trial, factor)`, results are
//! collected in trial order and reduced sequentially, so reports are
//! byte-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{
    interpolate, lindeberg_ratio, sample_elliptic_matrix_with, sample_factors,
    truncate_and_center, EnsembleSpec, EntryDist, RealMatrix,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng, StreamKind};
use crate::spectra::{
    block_partial_product, build_linearization, eigenvalues, hermitian_eigenvalues, product,
    radial_angular_split,
};
use crate::C64;

// ---------------------------------------------------------------------------
// statistics

/// Kolmogorov distance between a sample and a target CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("ks_distance needs a nonempty sample"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("ks_two_sample needs nonempty samples"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        // advance both CDFs through every tie of the current value
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Kuiper statistic `D+ + D-` of angles against the uniform law on [0, 2π).
pub fn kuiper_statistic(angles: &[f64]) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::domain("kuiper_statistic needs a nonempty sample"));
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let (mut dp, mut dm): (f64, f64) = (0.0, 0.0);
    for (i, t) in sorted.iter().enumerate() {
        let f = t / (2.0 * std::f64::consts::PI);
        dp = dp.max((i as f64 + 1.0) / n - f);
        dm = dm.max(f - i as f64 / n);
    }
    Ok(dp + dm)
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Wald 95% half-width for a binomial frequency.
pub fn binomial_ci_halfwidth(freq: f64, trials: usize) -> f64 {
    1.96 * (freq * (1.0 - freq) / trials.max(1) as f64).sqrt()
}

/// Non-increasing within overlapping 95% confidence intervals: each step up
/// must stay inside the joint noise band.
pub fn non_increasing_within_ci(freqs: &[f64], trials: &[usize]) -> bool {
    freqs.windows(2).zip(trials.windows(2)).all(|(f, t)| {
        let band = binomial_ci_halfwidth(f[0], t[0]).hypot(binomial_ci_halfwidth(f[1], t[1]));
        f[1] <= f[0] + band
    })
}

// ---------------------------------------------------------------------------
// configuration

/// Umbrella configuration for the experiment operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub trials: usize,
    #[serde(default = "default_z_list")]
    pub z_list: Vec<C64>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<C64>,
    /// Dimension ladder for trend experiments.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
}

fn default_z_list() -> Vec<C64> {
    vec![C64::new(0.5, 0.2)]
}

fn default_alpha_grid() -> Vec<C64> {
    (0..16).map(|i| C64::new(-3.0 + 0.4 * i as f64, 1.0)).collect()
}

fn default_ladder() -> Vec<usize> {
    vec![64, 128, 256]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.alpha_grid.iter().any(|a| !(a.im > 0.0)) {
            return Err(Error::domain("every alpha must have positive imaginary part"));
        }
        if self.ladder.is_empty() {
            return Err(Error::domain("the dimension ladder must be nonempty"));
        }
        Ok(())
    }

    /// Rung spec: same ensemble at dimension `n`, on decoupled streams.
    pub fn with_n(&self, n: usize) -> EnsembleSpec {
        let mut spec = self.ensemble.clone();
        spec.n = n;
        spec.master_seed =
            derive_seed(self.ensemble.master_seed, StreamKind::Auxiliary, n as u64, 0);
        spec
    }
}

// ---------------------------------------------------------------------------
// limit-law experiment

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitLawReport {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub trials: usize,
    pub excluded: usize,
    pub mean_radial_ks: f64,
    pub radial_ks_ci_halfwidth: f64,
    pub per_trial_radial_ks: Vec<f64>,
    /// Kuiper statistic of all pooled eigenvalue angles against uniform.
    pub pooled_kuiper: f64,
    pub pooled_count: usize,
    /// Pooled moduli, kept for cross-run comparisons; not serialized.
    #[serde(skip)]
    pub pooled_radii: Vec<f64>,
}

/// Sample products, collect eigenvalue radii and angles, and compare the
/// radial law against `r^(2/m)` and the angles against uniform.
pub fn limit_law_experiment(config: &ExperimentConfig) -> Result<LimitLawReport> {
    config.validate()?;
    config.ensemble.validate_strict()?;
    let spec = &config.ensemble;
    let m = spec.m as f64;

    let outcomes: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let factors = sample_factors(spec, trial)?;
            let w = product(&factors)?;
            let eig = eigenvalues(&w)?;
            Ok(radial_angular_split(&eig))
        })
        .collect();

    let mut per_trial_radial_ks = Vec::new();
    let mut pooled_radii = Vec::new();
    let mut pooled_angles = Vec::new();
    let mut excluded = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok((radii, angles)) => {
                let ks = ks_distance(&radii, |r| r.powf(2.0 / m).min(1.0))?;
                per_trial_radial_ks.push(ks);
                pooled_radii.extend(radii);
                pooled_angles.extend(angles);
            }
            Err(Error::Eigensolver(_)) | Err(Error::Validation(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if excluded * 100 > config.trials {
        return Err(Error::Eigensolver(format!(
            "{excluded} of {} trials failed the eigensolver (cap is 1%)",
            config.trials
        )));
    }
    let count = per_trial_radial_ks.len().max(1) as f64;
    let mean = per_trial_radial_ks.iter().sum::<f64>() / count;
    let sd = (per_trial_radial_ks
        .iter()
        .map(|k| (k - mean) * (k - mean))
        .sum::<f64>()
        / (count - 1.0).max(1.0))
    .sqrt();
    Ok(LimitLawReport {
        n: spec.n,
        m: spec.m,
        rho: spec.rho,
        trials: config.trials,
        excluded,
        mean_radial_ks: mean,
        radial_ks_ci_halfwidth: 1.96 * sd / count.sqrt(),
        per_trial_radial_ks,
        pooled_kuiper: kuiper_statistic(&pooled_angles)?,
        pooled_count: pooled_angles.len(),
        pooled_radii,
    })
}

// ---------------------------------------------------------------------------
// universality sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniversalityAtN {
    pub n: usize,
    pub phi: Vec<f64>,
    /// Per angle: max over the alpha grid of |mean trace difference to
    /// phi = 0| and the matching Monte Carlo standard error.
    pub max_diff: Vec<f64>,
    pub max_se: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub z: C64,
    pub trials: usize,
    pub per_n: Vec<UniversalityAtN>,
    /// Regression slope of `ln max_diff` at the last angle against `ln n`.
    pub slope_at_endpoint: f64,
}

/// Resolvent trace `(1/2n) sum 1/(lambda_i - alpha)` from the 2n
/// eigenvalues of a linearization.
pub fn resolvent_trace(eigs: &[f64], alpha: C64) -> C64 {
    let sum: C64 = eigs.iter().map(|l| (C64::new(*l, 0.0) - alpha).inv()).sum();
    sum / eigs.len() as f64
}

/// Interpolate the ensemble toward its Gaussian companion and track the
/// resolvent trace `s_n(alpha, z, phi)` across the dimension ladder.
pub fn universality_sweep(
    config: &ExperimentConfig,
    phi_list: &[f64],
) -> Result<UniversalityReport> {
    config.validate()?;
    if phi_list.is_empty() || phi_list[0] != 0.0 {
        return Err(Error::domain("phi_list must start at 0"));
    }
    let z = config.z_list.first().copied().unwrap_or(C64::new(0.0, 0.0));
    let mut per_n = Vec::new();
    let mut ln_n = Vec::new();
    let mut ln_diff = Vec::new();
    for &n in &config.ladder {
        let spec = config.with_n(n);
        // traces[trial][phi][alpha]
        let traces: Vec<Result<Vec<Vec<C64>>>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let x = sample_factors(&spec, trial)?;
                let y: Vec<RealMatrix> = (1..=spec.m)
                    .map(|q| {
                        let mut rng = stream_rng(
                            spec.master_seed,
                            StreamKind::GaussianCompanion,
                            trial,
                            q as u64,
                        );
                        sample_elliptic_matrix_with(spec.n, spec.rho, EntryDist::Gaussian, &mut rng)
                    })
                    .collect::<Result<_>>()?;
                let mut rows = Vec::with_capacity(phi_list.len());
                for &phi in phi_list {
                    let blended: Vec<RealMatrix> = x
                        .iter()
                        .zip(y.iter())
                        .map(|(xq, yq)| interpolate(xq, yq, phi))
                        .collect::<Result<_>>()?;
                    let lin = build_linearization(&blended, z)?;
                    let eigs = hermitian_eigenvalues(&lin.matrix)?;
                    rows.push(
                        config
                            .alpha_grid
                            .iter()
                            .map(|alpha| resolvent_trace(&eigs, *alpha))
                            .collect(),
                    );
                }
                Ok(rows)
            })
            .collect();

        let mut collected = Vec::with_capacity(config.trials);
        for t in traces {
            collected.push(t?);
        }
        let trials = collected.len() as f64;
        let mut max_diff = vec![0.0f64; phi_list.len()];
        let mut max_se = vec![0.0f64; phi_list.len()];
        for pi in 0..phi_list.len() {
            for ai in 0..config.alpha_grid.len() {
                let diffs: Vec<C64> = collected
                    .iter()
                    .map(|rows| rows[pi][ai] - rows[0][ai])
                    .collect();
                let mean: C64 = diffs.iter().sum::<C64>() / trials;
                let var = diffs.iter().map(|d| (d - mean).norm_sqr()).sum::<f64>()
                    / (trials - 1.0).max(1.0);
                max_diff[pi] = max_diff[pi].max(mean.norm());
                max_se[pi] = max_se[pi].max((var / trials).sqrt());
            }
        }
        let endpoint = *max_diff.last().unwrap();
        ln_n.push((n as f64).ln());
        ln_diff.push(endpoint.max(1e-300).ln());
        per_n.push(UniversalityAtN {
            n,
            phi: phi_list.to_vec(),
            max_diff,
            max_se,
        });
    }
    Ok(UniversalityReport {
        z,
        trials: config.trials,
        slope_at_endpoint: regression_slope(&ln_n, &ln_diff),
        per_n,
    })
}

// ---------------------------------------------------------------------------
// truncation stability

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationAtN {
    pub n: usize,
    pub tau_n: f64,
    pub lindeberg: f64,
    /// |mean resolvent trace raw - truncated| at the probe alpha.
    pub diff: f64,
    /// `sqrt(L_n(tau_n)) / v^2`.
    pub bound_shape: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub z: C64,
    pub alpha: C64,
    pub per_n: Vec<TruncationAtN>,
    /// Fitted constant `max diff / bound_shape` over the ladder and the
    /// doubled-v probe jointly; absent when truncation never bites and the
    /// bound shape vanishes.
    pub fitted_c: Option<f64>,
    /// Same probe at doubled v on the largest rung.
    pub doubled_v_diff: f64,
    pub doubled_v_bound_shape: f64,
}

fn trace_pair_at(
    spec: &EnsembleSpec,
    trials: usize,
    c: f64,
    tau_n: f64,
    z: C64,
    alpha: C64,
) -> Result<(f64, f64)> {
    let rows: Vec<Result<(C64, C64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let raw = sample_factors(spec, trial)?;
            let trunc: Vec<RealMatrix> = raw
                .iter()
                .map(|f| truncate_and_center(f, c, tau_n))
                .collect::<Result<_>>()?;
            let t_raw = resolvent_trace(
                &hermitian_eigenvalues(&build_linearization(&raw, z)?.matrix)?,
                alpha,
            );
            let t_trunc = resolvent_trace(
                &hermitian_eigenvalues(&build_linearization(&trunc, z)?.matrix)?,
                alpha,
            );
            let l_n = lindeberg_ratio(&raw, c * tau_n)?;
            Ok((t_raw, t_trunc, l_n))
        })
        .collect();
    let mut mean_raw = C64::new(0.0, 0.0);
    let mut mean_trunc = C64::new(0.0, 0.0);
    let mut lindeberg = 0.0f64;
    let mut count = 0.0f64;
    for row in rows {
        let (a, b, l) = row?;
        mean_raw += a;
        mean_trunc += b;
        lindeberg = lindeberg.max(l);
        count += 1.0;
    }
    Ok(((mean_raw / count - mean_trunc / count).norm(), lindeberg))
}

/// Compare resolvent traces before and after truncation at matched draws.
pub fn truncation_stability(config: &ExperimentConfig) -> Result<TruncationReport> {
    config.validate()?;
    let truncation = config.ensemble.truncation.ok_or_else(|| {
        Error::Config("truncation_stability needs a truncation policy in the ensemble".into())
    })?;
    let z = config.z_list.first().copied().unwrap_or(C64::new(0.5, 0.0));
    let alpha = config
        .alpha_grid
        .first()
        .copied()
        .unwrap_or(C64::new(0.0, 1.0));

    let mut per_n = Vec::new();
    for &n in &config.ladder {
        let spec = config.with_n(n);
        let tau_n = truncation.tau_n(n);
        let (diff, lindeberg) =
            trace_pair_at(&spec, config.trials, truncation.c, tau_n, z, alpha)?;
        per_n.push(TruncationAtN {
            n,
            tau_n,
            lindeberg,
            diff,
            bound_shape: lindeberg.sqrt() / (alpha.im * alpha.im),
        });
    }

    let n_top = *config.ladder.last().unwrap();
    let spec_top = config.with_n(n_top);
    let tau_top = truncation.tau_n(n_top);
    let alpha2 = C64::new(alpha.re, 2.0 * alpha.im);
    let (doubled_v_diff, lind_top) =
        trace_pair_at(&spec_top, config.trials, truncation.c, tau_top, z, alpha2)?;
    let doubled_v_bound_shape = lind_top.sqrt() / (alpha2.im * alpha2.im);
    let fitted_c = per_n
        .iter()
        .map(|row| (row.diff, row.bound_shape))
        .chain(std::iter::once((doubled_v_diff, doubled_v_bound_shape)))
        .filter(|(_, shape)| *shape > 0.0)
        .map(|(diff, shape)| diff / shape)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(TruncationReport {
        z,
        alpha,
        per_n,
        fitted_c,
        doubled_v_diff,
        doubled_v_bound_shape,
    })
}

// ---------------------------------------------------------------------------
// appendix diagnostics

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppendixReport {
    /// Grand-mean z-scores of the entries of `V_{1,1}` and `V_{1,m}`.
    pub mean_zscore_single: f64,
    pub mean_zscore_full: f64,
    /// Per rung: `E ||V_{1,m}||_F^2 / n`.
    pub frobenius_over_n: Vec<(usize, f64)>,
    /// Slope of `ln E||V||_F^2` against `ln n`.
    pub frobenius_slope: f64,
    /// max/min of the `/n` sequence.
    pub frobenius_ratio: f64,
    /// Per rung: `Var (1/n) Tr R` at the probe alpha.
    pub trace_variance: Vec<(usize, f64)>,
    pub trace_variance_slope: f64,
    pub probe_alpha: C64,
}

/// Monte Carlo checks of the moment structure behind the variance bounds:
/// centered partial products, linear Frobenius growth, and 1/n decay of the
/// resolvent-trace variance.
pub fn appendix_diagnostics(config: &ExperimentConfig) -> Result<AppendixReport> {
    config.validate()?;
    let z = config.z_list.first().copied().unwrap_or(C64::new(0.5, 0.0));
    let probe_alpha = C64::new(0.0, 2.0);
    let m = config.ensemble.m;

    // grand means of partial products at the base dimension
    let spec = config.ensemble.clone();
    let per_trial: Vec<Result<(f64, f64)>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let factors = sample_factors(&spec, trial)?;
            let single = block_partial_product(&factors, 1, 1)?;
            let full = block_partial_product(&factors, 1, m)?;
            let grand = |mat: &nalgebra::DMatrix<f64>| mat.iter().sum::<f64>() / mat.len() as f64;
            Ok((grand(&single), grand(&full)))
        })
        .collect();
    let mut singles = Vec::new();
    let mut fulls = Vec::new();
    for row in per_trial {
        let (s, f) = row?;
        singles.push(s);
        fulls.push(f);
    }
    let zscore = |v: &[f64]| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        if sd == 0.0 {
            0.0
        } else {
            mean / (sd / n.sqrt())
        }
    };

    // Frobenius growth and trace variance across the ladder
    let mut frobenius_over_n = Vec::new();
    let mut trace_variance = Vec::new();
    let mut ln_n = Vec::new();
    let mut ln_frob = Vec::new();
    let mut ln_var = Vec::new();
    for &n in &config.ladder {
        let spec_n = config.with_n(n);
        let rows: Vec<Result<(f64, C64)>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let factors = sample_factors(&spec_n, trial)?;
                let full = block_partial_product(&factors, 1, m)?;
                let frob2 = full.iter().map(|x| x * x).sum::<f64>();
                let lin = build_linearization(&factors, z)?;
                let eigs = hermitian_eigenvalues(&lin.matrix)?;
                // (1/n) Tr R is twice the symmetrized trace
                let trace = resolvent_trace(&eigs, probe_alpha) * 2.0;
                Ok((frob2, trace))
            })
            .collect();
        let mut frob_acc = 0.0;
        let mut traces = Vec::new();
        for row in rows {
            let (f, t) = row?;
            frob_acc += f;
            traces.push(t);
        }
        let count = traces.len() as f64;
        let frob_mean = frob_acc / count;
        let t_mean: C64 = traces.iter().sum::<C64>() / count;
        let t_var =
            traces.iter().map(|t| (t - t_mean).norm_sqr()).sum::<f64>() / (count - 1.0).max(1.0);
        frobenius_over_n.push((n, frob_mean / n as f64));
        trace_variance.push((n, t_var));
        ln_n.push((n as f64).ln());
        ln_frob.push(frob_mean.ln());
        ln_var.push(t_var.max(1e-300).ln());
    }
    let ratios: Vec<f64> = frobenius_over_n.iter().map(|(_, v)| *v).collect();
    let ratio = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);

    Ok(AppendixReport {
        mean_zscore_single: zscore(&singles),
        mean_zscore_full: zscore(&fulls),
        frobenius_over_n,
        frobenius_slope: regression_slope(&ln_n, &ln_frob),
        frobenius_ratio: ratio,
        trace_variance,
        trace_variance_slope: regression_slope(&ln_n, &ln_var),
        probe_alpha,
    })
}
