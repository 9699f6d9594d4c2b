//! Logarithmic potentials of empirical spectra and the singular-value
//! safeguards that keep them integrable.
//!
//! The empirical potential of a product `W` at `z` is
//! `-(1/n) sum ln s_i(W - zI) = -(1/n) ln |det(W - zI)|`. Averaged over
//! trials on a grid and hit with a discrete Laplacian it reconstructs the
//! eigenvalue density. The tail diagnostics monitor the smallest singular
//! values that the reconstruction implicitly relies on.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_factors, EnsembleSpec, RealMatrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, StreamKind};
use crate::spectra::{
    self, eigenvalues, product, shifted_singular_values, SymmetrizedSpectrum,
};
use crate::C64;

/// Rectangular evaluation grid with uniform step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn centered_square(extent: f64, step: f64) -> Self {
        GridSpec {
            x_min: -extent,
            x_max: extent,
            y_min: -extent,
            y_max: extent,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::domain("grid step must be positive"));
        }
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::domain("grid extents must be nonempty"));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) / self.step).round() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y_max - self.y_min) / self.step).round() as usize + 1
    }

    pub fn point(&self, ix: usize, iy: usize) -> C64 {
        C64::new(
            self.x_min + ix as f64 * self.step,
            self.y_min + iy as f64 * self.step,
        )
    }
}

/// Mean empirical potential over trials on a grid, with per-point variance
/// and mask counts. Layout is row-major in `iy`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialGrid {
    pub spec: GridSpec,
    pub n: usize,
    pub trials: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub masked: Vec<u32>,
}

impl PotentialGrid {
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.spec.nx() + ix
    }

    /// Evaluate a closed-form potential on a grid (no Monte Carlo noise).
    pub fn from_function(spec: GridSpec, f: impl Fn(C64) -> f64) -> Result<Self> {
        spec.validate()?;
        let (nx, ny) = (spec.nx(), spec.ny());
        let mut mean = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                mean.push(f(spec.point(ix, iy)));
            }
        }
        Ok(PotentialGrid {
            spec,
            n: 0,
            trials: 1,
            variance: vec![0.0; nx * ny],
            masked: vec![0; nx * ny],
            mean,
        })
    }

    pub fn masked_fraction(&self) -> f64 {
        let total = (self.trials * self.mean.len()).max(1);
        self.masked.iter().map(|m| *m as usize).sum::<usize>() as f64 / total as f64
    }
}

/// Density field reconstructed on the interior of a potential grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityField {
    /// Grid of the interior points (one ring smaller than the source).
    pub spec: GridSpec,
    pub values: Vec<f64>,
    /// True where the stencil touched a masked point.
    pub masked: Vec<bool>,
}

impl DensityField {
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.spec.nx() + ix
    }
}

/// One empirical potential evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialSample {
    pub value: f64,
    /// Set when a singular value vanished; `value` is `+inf`.
    pub singular: bool,
}

/// `-(1/n) sum ln s_i(W - zI)` from the singular values.
pub fn empirical_potential(w: &RealMatrix, z: C64) -> Result<PotentialSample> {
    if !w.is_square() {
        return Err(Error::contract("empirical_potential needs a square matrix"));
    }
    let sv = shifted_singular_values(w, z)?;
    let n = sv.len() as f64;
    if sv.iter().any(|s| *s <= f64::MIN_POSITIVE) {
        return Ok(PotentialSample {
            value: f64::INFINITY,
            singular: true,
        });
    }
    Ok(PotentialSample {
        value: -sv.iter().map(|s| s.ln()).sum::<f64>() / n,
        singular: false,
    })
}

/// Mask floor for the distance between a grid point and an eigenvalue.
const EIGEN_DISTANCE_FLOOR: f64 = 1e-290;

/// Average the empirical potential over independent trials on a grid.
///
/// Per trial the product spectrum is computed once and the potential is
/// evaluated as `-(1/n) sum ln |lambda_i - z|`, which equals the
/// singular-value form through `|det(W - zI)| = prod s_i = prod |lambda_i - z|`.
/// Points whose distance to an eigenvalue underflows are masked and
/// excluded from that trial's average, with counts recorded.
pub fn mean_potential_grid(
    spec: &EnsembleSpec,
    grid: &GridSpec,
    trials: usize,
) -> Result<PotentialGrid> {
    spec.validate()?;
    grid.validate()?;
    if trials == 0 {
        return Err(Error::domain("mean_potential_grid needs at least one trial"));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let per_trial: Vec<Result<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let factors = sample_factors(spec, trial)?;
            let w = product(&factors)?;
            let eig = eigenvalues(&w)?;
            let mut values = Vec::with_capacity(nx * ny);
            for iy in 0..ny {
                for ix in 0..nx {
                    let z = grid.point(ix, iy);
                    let mut acc = 0.0;
                    let mut ok = true;
                    for lambda in &eig.values {
                        let dist = (lambda - z).norm();
                        if dist <= EIGEN_DISTANCE_FLOOR {
                            ok = false;
                            break;
                        }
                        acc += dist.ln();
                    }
                    values.push(if ok { -acc / spec.n as f64 } else { f64::INFINITY });
                }
            }
            Ok(values)
        })
        .collect();

    let mut mean = vec![0.0f64; nx * ny];
    let mut m2 = vec![0.0f64; nx * ny];
    let mut count = vec![0u32; nx * ny];
    let mut masked = vec![0u32; nx * ny];
    for trial in per_trial {
        let values = trial?;
        for (i, v) in values.into_iter().enumerate() {
            if v.is_finite() {
                // Welford, deterministic because trials arrive in order
                count[i] += 1;
                let delta = v - mean[i];
                mean[i] += delta / count[i] as f64;
                m2[i] += delta * (v - mean[i]);
            } else {
                masked[i] += 1;
            }
        }
    }
    let variance = m2
        .iter()
        .zip(count.iter())
        .map(|(m, c)| if *c > 1 { m / (*c as f64 - 1.0) } else { 0.0 })
        .collect();
    Ok(PotentialGrid {
        spec: *grid,
        n: spec.n,
        trials,
        mean,
        variance,
        masked,
    })
}

/// `-(1/2π)` times the 5-point discrete Laplacian of the grid interior.
pub fn laplacian_density(grid: &PotentialGrid) -> Result<DensityField> {
    let (nx, ny) = (grid.spec.nx(), grid.spec.ny());
    if nx < 3 || ny < 3 {
        return Err(Error::domain("laplacian_density needs at least a 3x3 grid"));
    }
    let h = grid.spec.step;
    let inner = GridSpec {
        x_min: grid.spec.x_min + h,
        x_max: grid.spec.x_max - h,
        y_min: grid.spec.y_min + h,
        y_max: grid.spec.y_max - h,
        step: h,
    };
    let mut values = Vec::with_capacity((nx - 2) * (ny - 2));
    let mut masked = Vec::with_capacity((nx - 2) * (ny - 2));
    let at = |ix: usize, iy: usize| grid.mean[iy * nx + ix];
    let masked_at = |ix: usize, iy: usize| grid.masked[iy * nx + ix] > 0;
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let stencil_masked = masked_at(ix, iy)
                || masked_at(ix + 1, iy)
                || masked_at(ix - 1, iy)
                || masked_at(ix, iy + 1)
                || masked_at(ix, iy - 1);
            let lap = (at(ix + 1, iy) + at(ix - 1, iy) + at(ix, iy + 1) + at(ix, iy - 1)
                - 4.0 * at(ix, iy))
                / (h * h);
            values.push(-lap / (2.0 * std::f64::consts::PI));
            masked.push(stencil_masked);
        }
    }
    Ok(DensityField {
        spec: inner,
        values,
        masked,
    })
}

/// Configuration of the smallest-singular-value diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailDiagnostics {
    /// Exponent in the threshold `n^(-b)`.
    pub b_exponent: f64,
    /// Profile exponent, in (8/15, 1).
    pub gamma: f64,
    /// Constant in the quantile index `k = n(1 - c delta^(1/(m+1)))`.
    pub quantile_c: f64,
    /// Norm-bound constants: flag trials with `||M_n||_F > k_norm * n^q_exponent`.
    pub k_norm: f64,
    pub q_exponent: f64,
    /// Shift applied to the product.
    pub z: C64,
}

impl Default for TailDiagnostics {
    fn default() -> Self {
        TailDiagnostics {
            b_exponent: 2.0,
            gamma: 0.7,
            quantile_c: 1.0,
            k_norm: 1.0,
            q_exponent: 2.0,
            z: C64::new(0.5, 0.0),
        }
    }
}

impl TailDiagnostics {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 8.0 / 15.0 && self.gamma < 1.0) {
            return Err(Error::domain(format!(
                "gamma must lie in (8/15, 1), got {}",
                self.gamma
            )));
        }
        if !(self.b_exponent > 0.0) {
            return Err(Error::domain("b_exponent must be positive"));
        }
        Ok(())
    }
}

/// Frequency report of `s_min(X^(m) + M_n) <= n^(-b)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallestSvReport {
    pub n: usize,
    pub trials: usize,
    pub threshold: f64,
    pub exceed_count: usize,
    pub frequency: f64,
    /// Trials whose prefix product was numerically singular and were redrawn.
    pub resampled: usize,
    /// Trials where `||M_n||_F` exceeded `k_norm * n^q_exponent`.
    pub m_norm_violations: usize,
    pub min_singular_values: Vec<f64>,
}

/// Smallest singular value of a complex matrix.
pub fn smallest_singular_value(a: &DMatrix<C64>) -> Result<f64> {
    let dim = a.nrows();
    let svd = nalgebra::SVD::try_new_unordered(a.clone(), false, false, f64::EPSILON, 60 * dim + 1024)
        .ok_or_else(|| Error::Eigensolver("SVD failed in smallest_singular_value".into()))?;
    Ok(svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Monte Carlo tail frequencies of the shifted final factor
/// `X^(m) + M_n`, `M_n = -z (X^(1) ... X^(m-1))^(-1)` (all factors scaled).
pub fn smallest_sv_tail(
    spec: &EnsembleSpec,
    diag: &TailDiagnostics,
    trials: usize,
) -> Result<SmallestSvReport> {
    spec.validate()?;
    diag.validate()?;
    if trials == 0 {
        return Err(Error::domain("smallest_sv_tail needs at least one trial"));
    }
    let n = spec.n;
    let threshold = (n as f64).powf(-diag.b_exponent);
    let norm_cap = diag.k_norm * (n as f64).powf(diag.q_exponent);
    let scale = 1.0 / (n as f64).sqrt();

    struct TrialOutcome {
        s_min: f64,
        resampled: usize,
        norm_violation: bool,
    }

    let outcomes: Vec<Result<TrialOutcome>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut resampled = 0usize;
            // redraw on a numerically singular prefix, on a derived stream
            for attempt in 0..8u64 {
                let effective_trial = if attempt == 0 {
                    trial
                } else {
                    derive_seed(spec.master_seed, StreamKind::Auxiliary, trial, attempt)
                };
                let factors = sample_factors(spec, effective_trial)?;
                let mut prefix = DMatrix::<f64>::identity(n, n);
                for f in factors.iter().take(spec.m - 1) {
                    prefix = prefix * (&f.data * scale);
                }
                let lu = prefix.clone().lu();
                let min_pivot = (0..n)
                    .map(|i| lu.u()[(i, i)].abs())
                    .fold(f64::INFINITY, f64::min);
                if min_pivot <= 1e-13 * prefix.norm().max(f64::MIN_POSITIVE) {
                    resampled += 1;
                    continue;
                }
                let inverse = lu
                    .try_inverse()
                    .ok_or_else(|| Error::Eigensolver("prefix inversion failed".into()))?;
                let m_n = inverse.map(|x| -diag.z * x);
                let norm_violation = m_n.norm() > norm_cap;
                let mut a = factors[spec.m - 1].data.map(|x| C64::new(x * scale, 0.0));
                a += &m_n;
                let s_min = smallest_singular_value(&a)?;
                return Ok(TrialOutcome {
                    s_min,
                    resampled,
                    norm_violation,
                });
            }
            Err(Error::Eigensolver(
                "prefix product stayed singular after 8 redraws".into(),
            ))
        })
        .collect();

    let mut min_singular_values = Vec::with_capacity(trials);
    let mut exceed_count = 0usize;
    let mut resampled = 0usize;
    let mut m_norm_violations = 0usize;
    for outcome in outcomes {
        let o = outcome?;
        if o.s_min <= threshold {
            exceed_count += 1;
        }
        resampled += o.resampled;
        if o.norm_violation {
            m_norm_violations += 1;
        }
        min_singular_values.push(o.s_min);
    }
    Ok(SmallestSvReport {
        n,
        trials,
        threshold,
        exceed_count,
        frequency: exceed_count as f64 / trials as f64,
        resampled,
        m_norm_violations,
        min_singular_values,
    })
}

/// Largest `c` with `s_j >= c (n - j)/n` over `j <= n - n^gamma`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SvProfile {
    pub c: f64,
    /// 1-based index achieving the minimum ratio.
    pub argmin_j: usize,
    /// Last index checked.
    pub j_end: usize,
}

/// Fit the profile constant from singular values sorted descending.
pub fn sv_profile_from_values(values_desc: &[f64], gamma: f64) -> Result<SvProfile> {
    if !(gamma > 8.0 / 15.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (8/15, 1), got {gamma}")));
    }
    let n = values_desc.len();
    let j_end = (n as f64 - (n as f64).powf(gamma)).floor() as usize;
    if j_end == 0 {
        return Err(Error::domain(format!(
            "profile range is empty at n = {n}, gamma = {gamma}"
        )));
    }
    let mut c = f64::INFINITY;
    let mut argmin_j = 1;
    for j in 1..=j_end.min(n) {
        let floor = (n - j) as f64 / n as f64;
        let ratio = values_desc[j - 1] / floor;
        if ratio < c {
            c = ratio;
            argmin_j = j;
        }
    }
    Ok(SvProfile { c, argmin_j, j_end })
}

/// Profile check for a matrix (singular values computed internally).
pub fn sv_profile_check(matrix: &RealMatrix, gamma: f64) -> Result<SvProfile> {
    let sv = shifted_singular_values(matrix, C64::new(0.0, 0.0))?;
    sv_profile_from_values(&sv, gamma)
}

/// Outcome of the quantile floor `s_k > delta` with
/// `k = floor(n (1 - c delta^(1/(m+1))))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuantileFloorOutcome {
    pub k: i64,
    /// False when `k` fell outside `1..=n`; `pass` is then vacuous.
    pub checked: bool,
    pub pass: bool,
    pub s_k: f64,
}

pub fn quantile_floor_check(
    spectrum: &SymmetrizedSpectrum,
    delta: f64,
    m: u32,
    c: f64,
) -> Result<QuantileFloorOutcome> {
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    let n = spectrum.n;
    let k = ((n as f64) * (1.0 - c * delta.powf(1.0 / (m as f64 + 1.0)))).floor() as i64;
    if k < 1 || k > n as i64 {
        return Ok(QuantileFloorOutcome {
            k,
            checked: false,
            pass: true,
            s_k: f64::NAN,
        });
    }
    let half = spectrum.positive_half_desc();
    let s_k = half[(k - 1) as usize];
    Ok(QuantileFloorOutcome {
        k,
        checked: true,
        pass: s_k > delta,
        s_k,
    })
}

/// `(1/n) sum |ln s_i^2|` over the positive half, and whether it exceeds `t`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogTail {
    pub integral: f64,
    pub exceeds: bool,
    /// A vanished singular value makes the integral infinite.
    pub infinite: bool,
}

pub fn log_integrability_tail(spectrum: &SymmetrizedSpectrum, t: f64) -> Result<LogTail> {
    if !(t > 0.0) {
        return Err(Error::domain("t must be positive"));
    }
    let half = spectrum.positive_half_desc();
    let n = half.len() as f64;
    let mut acc = 0.0;
    for s in &half {
        if *s <= f64::MIN_POSITIVE {
            return Ok(LogTail {
                integral: f64::INFINITY,
                exceeds: true,
                infinite: true,
            });
        }
        acc += (s * s).ln().abs();
    }
    let integral = acc / n;
    Ok(LogTail {
        integral,
        exceeds: integral > t,
        infinite: false,
    })
}

/// Log-determinant consistency helper used by the validation suite.
pub fn log_abs_det_of_shift(w: &RealMatrix, z: C64) -> Option<f64> {
    spectra::log_abs_det_complex(&spectra::shifted_matrix(w, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EntryDist;
    use crate::limitlaw::LimitLaw;
    use nalgebra::dmatrix;

    #[test]
    fn potential_of_zero_matrix_at_unit_shift() {
        let w = RealMatrix::normalized(DMatrix::zeros(4, 4));
        let p = empirical_potential(&w, C64::new(1.0, 0.0)).unwrap();
        assert!(!p.singular);
        assert!(p.value.abs() < 1e-12);
    }

    #[test]
    fn potential_flags_singular_shift() {
        let w = RealMatrix::normalized(dmatrix![2.0, 0.0; 0.0, 0.0]);
        let p = empirical_potential(&w, C64::new(0.0, 0.0)).unwrap();
        assert!(p.singular);
        assert!(p.value.is_infinite());
    }

    #[test]
    fn potential_matches_determinant_oracle() {
        let spec = EnsembleSpec::new(16, 2, 0.3, EntryDist::Gaussian, 9);
        let w = product(&sample_factors(&spec, 0).unwrap()).unwrap();
        let z = C64::new(0.3, -0.4);
        let p = empirical_potential(&w, z).unwrap();
        let oracle = -log_abs_det_of_shift(&w, z).unwrap() / 16.0;
        assert!(
            (p.value - oracle).abs() <= 1e-6 * oracle.abs().max(1.0),
            "{} vs {}",
            p.value,
            oracle
        );
    }

    #[test]
    fn grid_mean_is_deterministic_and_matches_eigen_route() {
        let spec = EnsembleSpec::new(32, 2, 0.5, EntryDist::Gaussian, 123);
        let grid = GridSpec {
            x_min: -0.2,
            x_max: 0.2,
            y_min: -0.2,
            y_max: 0.2,
            step: 0.2,
        };
        let a = mean_potential_grid(&spec, &grid, 3).unwrap();
        let b = mean_potential_grid(&spec, &grid, 3).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.variance, b.variance);

        // single-trial grid equals the singular-value definition pointwise
        let single = mean_potential_grid(&spec, &grid, 1).unwrap();
        let w = product(&sample_factors(&spec, 0).unwrap()).unwrap();
        for iy in 0..grid.ny() {
            for ix in 0..grid.nx() {
                let z = grid.point(ix, iy);
                let direct = empirical_potential(&w, z).unwrap().value;
                let via_grid = single.mean[single.index(ix, iy)];
                assert!(
                    (direct - via_grid).abs() <= 1e-6 * direct.abs().max(1.0),
                    "at {z}: {direct} vs {via_grid}"
                );
            }
        }
    }

    #[test]
    fn grid_mean_approaches_limit_potential() {
        let spec = EnsembleSpec::new(256, 2, 0.5, EntryDist::Gaussian, 2024);
        let grid = GridSpec {
            x_min: 2.0,
            x_max: 2.0 + 1e-9,
            y_min: 0.0,
            y_max: 1e-9,
            step: 1e-9,
        };
        let g = mean_potential_grid(&spec, &grid, 10).unwrap();
        let limit = LimitLaw::new(2).unwrap().potential(C64::new(2.0, 0.0));
        assert!((limit + 2.0f64.ln()).abs() < 1e-12);
        assert!(
            (g.mean[0] - limit).abs() < 0.05,
            "potential {} vs limit {}",
            g.mean[0],
            limit
        );

        let grid0 = GridSpec {
            x_min: 0.0,
            x_max: 1e-9,
            y_min: 0.0,
            y_max: 1e-9,
            step: 1e-9,
        };
        let g0 = mean_potential_grid(&spec, &grid0, 10).unwrap();
        assert!(
            (g0.mean[0] - 1.0).abs() < 0.05,
            "potential at origin {} vs m/2 = 1",
            g0.mean[0]
        );
    }

    #[test]
    fn laplacian_recovers_density_from_closed_form_potential() {
        let law = LimitLaw::new(1).unwrap();
        let spec = GridSpec::centered_square(0.7, 0.01);
        let grid = PotentialGrid::from_function(spec, |z| law.potential(z)).unwrap();
        let field = laplacian_density(&grid).unwrap();
        let uniform = 1.0 / std::f64::consts::PI;
        for iy in 0..field.spec.ny() {
            for ix in 0..field.spec.nx() {
                let z = field.spec.point(ix, iy);
                if z.norm() < 0.55 {
                    let got = field.values[field.index(ix, iy)];
                    assert!(
                        (got - uniform).abs() <= 0.01 * uniform,
                        "at {z}: {got} vs {uniform}"
                    );
                }
            }
        }
    }

    #[test]
    fn laplacian_vanishes_on_harmonic_region() {
        let law = LimitLaw::new(2).unwrap();
        let spec = GridSpec {
            x_min: 1.2,
            x_max: 1.8,
            y_min: 1.2,
            y_max: 1.8,
            step: 0.01,
        };
        let grid = PotentialGrid::from_function(spec, |z| law.potential(z)).unwrap();
        let field = laplacian_density(&grid).unwrap();
        for v in &field.values {
            assert!(v.abs() < 1e-3, "harmonic region density {v}");
        }
    }

    #[test]
    fn laplacian_rejects_small_grids() {
        let spec = GridSpec::centered_square(0.1, 0.1);
        let grid = PotentialGrid::from_function(spec, |_| 0.0).unwrap();
        assert_eq!(grid.spec.nx(), 3);
        assert!(laplacian_density(&grid).is_ok());
        let tiny = GridSpec {
            x_min: 0.0,
            x_max: 0.1,
            y_min: 0.0,
            y_max: 0.1,
            step: 0.1,
        };
        let grid = PotentialGrid::from_function(tiny, |_| 0.0).unwrap();
        assert!(laplacian_density(&grid).is_err());
    }

    #[test]
    fn smallest_sv_indicator_paths() {
        // identity: s_min = 1 stays above n^(-b)
        let id = DMatrix::<C64>::identity(8, 8);
        let s = smallest_singular_value(&id).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(s > 8.0f64.powf(-2.0));

        // duplicated rows: exactly singular, indicator trips
        let mut m = DMatrix::<C64>::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64, 0.0));
        for j in 0..4 {
            let v = m[(0, j)];
            m[(1, j)] = v;
        }
        let s = smallest_singular_value(&m).unwrap();
        assert!(s <= 4.0f64.powf(-2.0));
    }

    #[test]
    fn tail_report_runs_at_small_scale() {
        let spec = EnsembleSpec::new(24, 2, 0.2, EntryDist::Gaussian, 5);
        let report = smallest_sv_tail(&spec, &TailDiagnostics::default(), 20).unwrap();
        assert_eq!(report.trials, 20);
        assert_eq!(report.min_singular_values.len(), 20);
        assert!(report.frequency <= 1.0);
        assert!((report.threshold - 24.0f64.powf(-2.0)).abs() < 1e-15);
    }

    #[test]
    fn sv_profile_of_identity() {
        let values = vec![1.0; 16];
        let p = sv_profile_from_values(&values, 0.7).unwrap();
        assert_eq!(p.argmin_j, 1);
        assert!((p.c - 16.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn sv_profile_of_rank_one() {
        // n = 16, gamma = 0.9: checks j <= 3 where a rank-1 matrix has
        // vanished singular values
        let mut values = vec![0.0; 16];
        values[0] = 5.0;
        let p = sv_profile_from_values(&values, 0.9).unwrap();
        assert_eq!(p.j_end, 3);
        assert_eq!(p.c, 0.0);
    }

    #[test]
    fn quantile_floor_paths() {
        let spectrum = SymmetrizedSpectrum {
            values: vec![-3.0, -2.0, -1.5, 1.5, 2.0, 3.0],
            z: C64::new(0.0, 0.0),
            n: 3,
        };
        // all singular values >= 1.5 > delta (delta small enough that k >= 1)
        let out = quantile_floor_check(&spectrum, 0.05, 2, 1.0).unwrap();
        assert!(out.checked && out.pass);

        // constructed failure: k = 1 and s_1 <= delta
        let tiny = SymmetrizedSpectrum {
            values: vec![-0.04, -0.02, -0.01, 0.01, 0.02, 0.04],
            z: C64::new(0.0, 0.0),
            n: 3,
        };
        let out = quantile_floor_check(&tiny, 0.05, 2, 1.0).unwrap();
        assert!(out.checked && !out.pass);

        // k out of range is skipped
        let out = quantile_floor_check(&spectrum, 0.9999, 2, 1.0).unwrap();
        assert!(!out.checked);
    }

    #[test]
    fn log_tail_values() {
        let unit = SymmetrizedSpectrum {
            values: vec![-1.0, -1.0, 1.0, 1.0],
            z: C64::new(0.0, 0.0),
            n: 2,
        };
        let t = log_integrability_tail(&unit, 0.5).unwrap();
        assert_eq!(t.integral, 0.0);
        assert!(!t.exceeds && !t.infinite);

        let single = SymmetrizedSpectrum {
            values: vec![-std::f64::consts::E, std::f64::consts::E],
            z: C64::new(0.0, 0.0),
            n: 1,
        };
        let t = log_integrability_tail(&single, 1.0).unwrap();
        assert!((t.integral - 2.0).abs() < 1e-12);
        assert!(t.exceeds);

        let degenerate = SymmetrizedSpectrum {
            values: vec![-1.0, 0.0, 0.0, 1.0],
            z: C64::new(0.0, 0.0),
            n: 2,
        };
        let t = log_integrability_tail(&degenerate, 1.0).unwrap();
        assert!(t.infinite && t.exceeds);
    }
}
