//! Products, eigenvalues, singular values and the Hermitian linearization.
//!
//! The central object is the 2n×2n matrix `V(z) = V J - J(z)` built from
//! block factors `H^(q) = diag(X^(q), (X^(m-q+1))^T)` (scaled by 1/sqrt(n)):
//! it is Hermitian and its spectrum is `{-s_i} ∪ {s_i}` where `s_i` are the
//! singular values of `W - zI`. Eigenvalues of the product itself come from
//! a real Schur decomposition; singular values from a complex SVD. The two
//! routes are algorithmically independent and cross-check each other in the
//! test suite.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::ensemble::{RealMatrix, Scale};
use crate::error::{Error, Result};
use crate::C64;

/// Iteration cap for dense spectral decompositions, scaled by dimension.
fn iteration_cap(dim: usize) -> usize {
    60 * dim + 1024
}

/// Eigenvalues of a product matrix, with multiplicity.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub values: Vec<C64>,
    pub n: usize,
}

impl ComplexSpectrum {
    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Worst unpaired mass among non-real eigenvalues: every eigenvalue with
    /// positive imaginary part must have a conjugate partner.
    pub fn conjugate_pairing_residual(&self) -> f64 {
        let mut upper: Vec<C64> = self.values.iter().copied().filter(|v| v.im > 0.0).collect();
        let mut lower: Vec<C64> = self.values.iter().copied().filter(|v| v.im < 0.0).collect();
        let key = |v: &C64| (v.re, v.im.abs());
        upper.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        lower.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        if upper.len() != lower.len() {
            return f64::INFINITY;
        }
        upper
            .iter()
            .zip(lower.iter())
            .map(|(u, l)| (u - l.conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Sorted eigenvalues of the Hermitian linearization `V(z)`.
#[derive(Debug, Clone)]
pub struct SymmetrizedSpectrum {
    /// Ascending; length `2n`.
    pub values: Vec<f64>,
    pub z: C64,
    pub n: usize,
}

impl SymmetrizedSpectrum {
    /// Construct from raw eigenvalues, enforcing the ± pairing invariant.
    pub fn new(mut values: Vec<f64>, z: C64, n: usize) -> Result<Self> {
        if values.len() != 2 * n {
            return Err(Error::contract(format!(
                "symmetrized spectrum needs 2n = {} values, got {}",
                2 * n,
                values.len()
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let spectrum = SymmetrizedSpectrum { values, z, n };
        let radius = spectrum.spectral_radius();
        let tol = 1e-8 * radius.max(1e-8);
        let residual = spectrum.pairing_residual();
        if residual > tol {
            return Err(Error::Validation(format!(
                "± pairing violated: residual {residual:.3e} exceeds {tol:.3e}"
            )));
        }
        Ok(spectrum)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// `max_i |values[i] + values[2n-1-i]|`.
    pub fn pairing_residual(&self) -> f64 {
        let len = self.values.len();
        (0..len / 2)
            .map(|i| (self.values[i] + self.values[len - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Non-negative half in descending order (the singular values).
    pub fn positive_half_desc(&self) -> Vec<f64> {
        self.values.iter().rev().take(self.n).copied().collect()
    }
}

/// The Hermitian matrix `V(z) = V J - J(z)` together with its real block
/// product `V`.
#[derive(Debug, Clone)]
pub struct HermitianLinearization {
    pub n: usize,
    pub z: C64,
    /// Product of the block factors `H^(1) ... H^(m)` (real, 2n×2n).
    pub v: DMatrix<f64>,
    /// `V J - J(z)`.
    pub matrix: DMatrix<C64>,
}

impl HermitianLinearization {
    /// `J`: identity blocks on the anti-diagonal.
    pub fn j_matrix(n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = 1.0;
        }
        j
    }

    /// `J(z)`: `zI` upper-right, `conj(z)I` lower-left.
    pub fn j_shift_matrix(n: usize, z: C64) -> DMatrix<C64> {
        let mut j = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = z;
            j[(n + i, i)] = z.conj();
        }
        j
    }

    /// Hermitian defect `max |A - A*|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let d = self.matrix.nrows();
        for i in 0..d {
            for k in i..d {
                worst = worst.max((self.matrix[(i, k)] - self.matrix[(k, i)].conj()).norm());
            }
        }
        worst
    }
}

fn require_square_raw_factors(factors: &[RealMatrix], op: &str) -> Result<usize> {
    if factors.is_empty() {
        return Err(Error::contract(format!("{op} needs at least one factor")));
    }
    let n = factors[0].rows();
    for f in factors {
        f.require_raw(op)?;
        if !f.is_square() || f.rows() != n {
            return Err(Error::contract(format!("{op} needs square factors of equal size")));
        }
    }
    Ok(n)
}

/// Scaled product `W = prod_q X^(q) / sqrt(n)` in the given order.
pub fn product(factors: &[RealMatrix]) -> Result<RealMatrix> {
    let n = require_square_raw_factors(factors, "product")?;
    let scale = 1.0 / (n as f64).sqrt();
    let mut w = DMatrix::<f64>::identity(n, n);
    for f in factors {
        w = w * (&f.data * scale);
    }
    Ok(RealMatrix {
        data: w,
        scale: Scale::Normalized,
    })
}

/// Natural log of `|det|` via LU, or `None` when a pivot vanishes.
pub fn log_abs_det(matrix: &DMatrix<f64>) -> Option<f64> {
    let lu = matrix.clone().lu();
    let mut acc = 0.0;
    for i in 0..matrix.nrows() {
        let p = lu.u()[(i, i)].abs();
        if p == 0.0 {
            return None;
        }
        acc += p.ln();
    }
    Some(acc)
}

/// Natural log of `|det|` of a complex matrix via LU.
pub fn log_abs_det_complex(matrix: &DMatrix<C64>) -> Option<f64> {
    let lu = matrix.clone().lu();
    let mut acc = 0.0;
    for i in 0..matrix.nrows() {
        let p = lu.u()[(i, i)].norm();
        if p == 0.0 {
            return None;
        }
        acc += p.ln();
    }
    Some(acc)
}

/// All eigenvalues of a real square matrix via Schur decomposition, with
/// trace and determinant residual checks.
pub fn eigenvalues_of(matrix: &DMatrix<f64>) -> Result<ComplexSpectrum> {
    if !matrix.is_square() {
        return Err(Error::contract("eigenvalues need a square matrix"));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("eigenvalues need finite entries"));
    }
    let n = matrix.nrows();
    let schur = nalgebra::Schur::try_new(matrix.clone(), f64::EPSILON, iteration_cap(n))
        .ok_or_else(|| {
            Error::Eigensolver(format!(
                "Schur iteration exceeded the cap of {} sweeps at n = {n}",
                iteration_cap(n)
            ))
        })?;
    let values: Vec<C64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex::new(c.re, c.im))
        .collect();
    let spectrum = ComplexSpectrum { values, n };

    let frob = matrix.norm();
    let trace: f64 = matrix.trace();
    let sum: C64 = spectrum.values.iter().sum();
    let trace_tol = 1e-8 * (n as f64) * frob.max(f64::EPSILON);
    if (sum - C64::new(trace, 0.0)).norm() > trace_tol {
        return Err(Error::Validation(format!(
            "eigenvalue sum {sum} deviates from trace {trace} beyond {trace_tol:.3e}"
        )));
    }

    // determinant identity in the log domain; skipped when the matrix is
    // numerically singular and the relative comparison is meaningless
    let singular_floor = 1e-12 * frob.max(f64::EPSILON);
    let min_mod = spectrum.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    match log_abs_det(matrix) {
        Some(log_det) if min_mod > singular_floor => {
            let log_prod: f64 = spectrum.values.iter().map(|v| v.norm().ln()).sum();
            if (log_det - log_prod).abs() > 1e-6 {
                return Err(Error::Validation(format!(
                    "eigenvalue product log {log_prod:.12e} deviates from determinant log {log_det:.12e}"
                )));
            }
        }
        _ => {}
    }

    let radius = spectrum.spectral_radius();
    if spectrum.conjugate_pairing_residual() > 1e-8 * radius.max(1e-8) {
        return Err(Error::Validation("conjugate pairing violated".into()));
    }
    Ok(spectrum)
}

/// Eigenvalues of a [`RealMatrix`], ignoring its scale annotation.
pub fn eigenvalues(matrix: &RealMatrix) -> Result<ComplexSpectrum> {
    eigenvalues_of(&matrix.data)
}

/// Scaled block factor `H^(q) = diag(X^(q), (X^(m-q+1))^T) / sqrt(n)`
/// (`q` zero-based here).
pub fn block_factor(factors: &[RealMatrix], q: usize) -> DMatrix<f64> {
    let n = factors[0].rows();
    let m = factors.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&(&factors[q].data * scale));
    h.view_mut((n, n), (n, n))
        .copy_from(&(factors[m - q - 1].data.transpose() * scale));
    h
}

/// Partial product `V_{a,b} = H^(a) ... H^(b)` with 1-based inclusive
/// bounds; the empty product (`a > b`) is the identity.
pub fn block_partial_product(factors: &[RealMatrix], a: usize, b: usize) -> Result<DMatrix<f64>> {
    let n = require_square_raw_factors(factors, "block_partial_product")?;
    let mut v = DMatrix::<f64>::identity(2 * n, 2 * n);
    for q in a..=b.min(factors.len()) {
        if q >= 1 {
            v = v * block_factor(factors, q - 1);
        }
    }
    Ok(v)
}

/// Assemble the block linearization from raw factors.
pub fn build_linearization(factors: &[RealMatrix], z: C64) -> Result<HermitianLinearization> {
    let n = require_square_raw_factors(factors, "build_linearization")?;
    let m = factors.len();
    let mut v = DMatrix::<f64>::identity(2 * n, 2 * n);
    for q in 0..m {
        v = v * block_factor(factors, q);
    }
    // V J swaps the column blocks of V; subtracting J(z) shifts the
    // anti-diagonal blocks
    let mut matrix = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for k in 0..n {
            matrix[(i, k)] = C64::new(v[(i, n + k)], 0.0);
            matrix[(i, n + k)] = C64::new(v[(i, k)], 0.0);
        }
    }
    for i in 0..n {
        matrix[(i, n + i)] -= z;
        matrix[(n + i, i)] -= z.conj();
    }
    let lin = HermitianLinearization { n, z, v, matrix };
    let scale_ref = lin
        .matrix
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    if lin.hermitian_residual() > 1e-12 * scale_ref {
        return Err(Error::Validation("linearization is not Hermitian".into()));
    }
    Ok(lin)
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(matrix: &DMatrix<C64>) -> Result<Vec<f64>> {
    let dim = matrix.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, iteration_cap(dim))
        .ok_or_else(|| {
            Error::Eigensolver(format!(
                "Hermitian eigensolver exceeded the cap of {} sweeps at dim = {dim}",
                iteration_cap(dim)
            ))
        })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values)
}

/// Spectrum of the linearization, sorted, with the ± pairing enforced.
pub fn symmetrized_spectrum(lin: &HermitianLinearization) -> Result<SymmetrizedSpectrum> {
    let values = hermitian_eigenvalues(&lin.matrix)?;
    SymmetrizedSpectrum::new(values, lin.z, lin.n)
}

/// Complex shift `W - zI` of a normalized product.
pub fn shifted_matrix(w: &RealMatrix, z: C64) -> DMatrix<C64> {
    let n = w.rows();
    let mut a = w.data.map(|x| C64::new(x, 0.0));
    for i in 0..n {
        a[(i, i)] -= z;
    }
    a
}

/// Singular values of `W - zI`, descending.
pub fn shifted_singular_values(w: &RealMatrix, z: C64) -> Result<Vec<f64>> {
    if !w.is_square() {
        return Err(Error::contract("shifted_singular_values needs a square matrix"));
    }
    let a = shifted_matrix(w, z);
    let dim = a.nrows();
    let svd = nalgebra::SVD::try_new_unordered(a, false, false, f64::EPSILON, iteration_cap(dim))
        .ok_or_else(|| {
            Error::Eigensolver(format!(
                "SVD iteration exceeded the cap of {} sweeps at n = {dim}",
                iteration_cap(dim)
            ))
        })?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical CDF needs a nonempty sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("empirical CDF needs finite values"));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalCdf { sorted: values })
    }

    pub fn value(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|v| *v <= x);
        count as f64 / self.sorted.len() as f64
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Moduli and angles (in `[0, 2π)`) of a complex spectrum.
pub fn radial_angular_split(spectrum: &ComplexSpectrum) -> (Vec<f64>, Vec<f64>) {
    let radii = spectrum.values.iter().map(|v| v.norm()).collect();
    let angles = spectrum
        .values
        .iter()
        .map(|v| {
            let a = v.im.atan2(v.re);
            if a < 0.0 {
                a + 2.0 * std::f64::consts::PI
            } else {
                a
            }
        })
        .collect();
    (radii, angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_factors, EnsembleSpec, EntryDist};
    use nalgebra::dmatrix;

    fn gaussian_spec(n: usize, m: usize, rho: f64, seed: u64) -> EnsembleSpec {
        EnsembleSpec::new(n, m, rho, EntryDist::Gaussian, seed)
    }

    #[test]
    fn product_of_scaled_identities_is_identity() {
        let n = 9;
        let id = RealMatrix::raw(DMatrix::<f64>::identity(n, n) * (n as f64).sqrt());
        let w = product(&[id.clone(), id]).unwrap();
        assert!((&w.data - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-14);
        assert_eq!(w.scale, Scale::Normalized);
    }

    #[test]
    fn product_matches_hand_multiplication() {
        let a = RealMatrix::raw(dmatrix![1.0, 2.0; 3.0, 4.0]);
        let b = RealMatrix::raw(dmatrix![0.0, 1.0; 1.0, 1.0]);
        // (A/sqrt(2)) (B/sqrt(2)) = AB / 2
        let w = product(&[a, b]).unwrap();
        let expect = dmatrix![2.0, 3.0; 4.0, 7.0] / 2.0;
        assert!((w.data - expect).abs().max() < 1e-15);
    }

    #[test]
    fn product_of_single_factor_scales_by_inv_sqrt_n() {
        let a = RealMatrix::raw(dmatrix![2.0, 0.0; 0.0, 2.0]);
        let w = product(&[a]).unwrap();
        assert!((w.data - dmatrix![2.0, 0.0; 0.0, 2.0] / 2.0f64.sqrt()).abs().max() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_identity_and_nilpotent() {
        let id = eigenvalues_of(&DMatrix::identity(2, 2)).unwrap();
        assert!(id.values.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-12));
        let nil = eigenvalues_of(&dmatrix![0.0, 1.0; 0.0, 0.0]).unwrap();
        assert!(nil.values.iter().all(|v| v.norm() < 1e-8));
    }

    #[test]
    fn eigenvalues_of_companion_matrix_are_cube_roots_of_unity() {
        // companion of x^3 - 1
        let c = dmatrix![
            0.0, 0.0, 1.0;
            1.0, 0.0, 0.0;
            0.0, 1.0, 0.0
        ];
        let spec = eigenvalues_of(&c).unwrap();
        let mut found = [false; 3];
        for v in &spec.values {
            for (i, root) in [
                C64::new(1.0, 0.0),
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
                C64::from_polar(1.0, -2.0 * std::f64::consts::PI / 3.0),
            ]
            .iter()
            .enumerate()
            {
                if (v - root).norm() < 1e-8 {
                    found[i] = true;
                }
            }
        }
        assert!(found.iter().all(|f| *f), "missing roots: {:?}", spec.values);
    }

    #[test]
    fn eigenvalues_close_under_conjugation() {
        let spec = gaussian_spec(48, 2, 0.4, 11);
        let w = product(&sample_factors(&spec, 0).unwrap()).unwrap();
        let eig = eigenvalues(&w).unwrap();
        let radius = eig.spectral_radius();
        assert!(eig.conjugate_pairing_residual() <= 1e-8 * radius);
    }

    #[test]
    fn linearization_of_scaled_identities_at_zero_shift() {
        // m = 2, both factors sqrt(n) I, z = 0: V(0) = J, eigenvalues ±1
        let n = 6;
        let id = RealMatrix::raw(DMatrix::<f64>::identity(n, n) * (n as f64).sqrt());
        let lin = build_linearization(&[id.clone(), id], C64::new(0.0, 0.0)).unwrap();
        let j = HermitianLinearization::j_matrix(n).map(|x| C64::new(x, 0.0));
        assert!((&lin.matrix - j).iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-14);
        let sym = symmetrized_spectrum(&lin).unwrap();
        for (i, v) in sym.values.iter().enumerate() {
            let expect = if i < n { -1.0 } else { 1.0 };
            assert!((v - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn linearization_is_hermitian_and_matches_vj_minus_jz() {
        let spec = gaussian_spec(10, 3, 0.2, 3);
        let factors = sample_factors(&spec, 1).unwrap();
        let z = C64::new(0.4, -0.7);
        let lin = build_linearization(&factors, z).unwrap();
        assert!(lin.hermitian_residual() < 1e-12);
        let vj = (&lin.v * HermitianLinearization::j_matrix(10)).map(|x| C64::new(x, 0.0));
        let rebuilt = vj - HermitianLinearization::j_shift_matrix(10, z);
        let dev = (&lin.matrix - rebuilt).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert_eq!(dev, 0.0, "V(z) is VJ - J(z) by construction");
    }

    #[test]
    fn one_by_one_linearization_closed_form() {
        // n = 1, m = 2, raw factors [a], [b]: W = ab (scale 1/sqrt(1) = 1),
        // V(z) = [[0, ab - z], [conj(ab - z), 0]], eigenvalues ±|ab - z|
        let a = RealMatrix::raw(dmatrix![3.0]);
        let b = RealMatrix::raw(dmatrix![-2.0]);
        let z = C64::new(0.5, 0.25);
        let lin = build_linearization(&[a, b], z).unwrap();
        let s = (C64::new(-6.0, 0.0) - z).norm();
        let sym = symmetrized_spectrum(&lin).unwrap();
        assert!((sym.values[0] + s).abs() < 1e-12);
        assert!((sym.values[1] - s).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_spectrum_matches_svd_oracle() {
        let spec = gaussian_spec(8, 2, 0.5, 21);
        let factors = sample_factors(&spec, 2).unwrap();
        let z = C64::new(0.3, 0.1);
        let w = product(&factors).unwrap();
        let lin = build_linearization(&factors, z).unwrap();
        let sym = symmetrized_spectrum(&lin).unwrap();
        let sv = shifted_singular_values(&w, z).unwrap();
        let half = sym.positive_half_desc();
        for (a, b) in half.iter().zip(sv.iter()) {
            assert!((a - b).abs() < 1e-8, "linearization {a} vs svd {b}");
        }
    }

    #[test]
    fn symmetrized_spectrum_is_negation_closed() {
        let spec = gaussian_spec(16, 3, -0.3, 8);
        let factors = sample_factors(&spec, 0).unwrap();
        let lin = build_linearization(&factors, C64::new(-0.2, 0.9)).unwrap();
        let sym = symmetrized_spectrum(&lin).unwrap();
        assert!(sym.pairing_residual() <= 1e-8 * sym.spectral_radius());
    }

    #[test]
    fn shifted_singular_values_of_zero_matrix() {
        let w = RealMatrix::normalized(DMatrix::zeros(5, 5));
        let sv = shifted_singular_values(&w, C64::new(1.0, 0.0)).unwrap();
        assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn shifted_singular_values_of_diagonal() {
        let w = RealMatrix::normalized(dmatrix![2.0, 0.0; 0.0, 0.0]);
        let sv = shifted_singular_values(&w, C64::new(0.0, 0.0)).unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-12 && sv[1].abs() < 1e-12);
    }

    #[test]
    fn singular_value_product_equals_abs_determinant() {
        let spec = gaussian_spec(6, 2, 0.0, 77);
        let w = product(&sample_factors(&spec, 3).unwrap()).unwrap();
        let z = C64::new(0.2, 0.4);
        let sv = shifted_singular_values(&w, z).unwrap();
        let log_prod: f64 = sv.iter().map(|s| s.ln()).sum();
        let log_det = log_abs_det_complex(&shifted_matrix(&w, z)).unwrap();
        assert!(
            (log_prod - log_det).abs() < 1e-6,
            "log prod {log_prod} vs log det {log_det}"
        );
    }

    #[test]
    fn squared_positive_half_matches_normal_matrix_eigenvalues() {
        // relative 1e-6 against an independent Hermitian solve of (W-z)*(W-z)
        let spec = gaussian_spec(12, 2, 0.6, 5);
        let factors = sample_factors(&spec, 0).unwrap();
        let w = product(&factors).unwrap();
        let z = C64::new(0.1, -0.3);
        let lin = build_linearization(&factors, z).unwrap();
        let half = symmetrized_spectrum(&lin).unwrap().positive_half_desc();
        let a = shifted_matrix(&w, z);
        let normal = a.adjoint() * &a;
        let mut eigs = hermitian_eigenvalues(&normal).unwrap();
        eigs.reverse();
        let scale = eigs[0].max(1e-12);
        for (h, e) in half.iter().zip(eigs.iter()) {
            assert!((h * h - e).abs() <= 1e-6 * scale, "{} vs {}", h * h, e);
        }
    }

    #[test]
    fn empirical_cdf_basics() {
        let cdf = EmpiricalCdf::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(cdf.value(2.0), 2.0 / 3.0);
        assert_eq!(cdf.value(0.5), 0.0);
        assert_eq!(cdf.value(3.0), 1.0);
        assert!(EmpiricalCdf::new(vec![]).is_err());
    }

    #[test]
    fn radial_angular_split_conventions() {
        let spec = ComplexSpectrum {
            values: vec![C64::new(0.0, 1.0), C64::new(0.0, -1.0)],
            n: 2,
        };
        let (radii, angles) = radial_angular_split(&spec);
        assert_eq!(radii, vec![1.0, 1.0]);
        assert!((angles[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((angles[1] - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
