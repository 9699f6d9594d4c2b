//! Fixed-point solver for the two-equation Stieltjes system of the
//! symmetrized singular-value limit, plus density recovery and comparison
//! against simulated spectra.
//!
//! Both printed versions of the system ship as first-class citizens:
//!
//! - `Statement`: `1 + w s + (-1)^(m+1) w^(m-1) s^(m+1) = 0` and
//!   `s (w-a)^2 + (w-a) - s |z|^2 = 0`;
//! - `Theorem`:   `1 + w s + (-1)^(m+1) w^m s^(m+1) = 0` and
//!   `(w-a)^2 + (w-a) - 4 |z|^2 s = 0`.
//!
//! They are not algebraically equivalent; [`form_discrimination`] measures
//! which one matches simulation.
//!
//! The solver runs a damped fixed-point iteration per rung of a geometric
//! continuation ladder in `v = Im(alpha)`, anchored at `v = 10` where the
//! solution is unambiguous (`s ~ -1/alpha`, `w - alpha` small). The branch
//! of the quadratic for `w - alpha` is tracked by continuity along the
//! ladder: both roots always share the sign of `Im(s)`, so a sign rule
//! cannot discriminate, and the physical branch provably crosses from the
//! smaller-modulus to the larger-modulus root inside the bulk. A coupled
//! Newton step on `(s, w)` kicks in whenever the damped iteration stalls.
//! `w - alpha` is stored exactly; reconstructing it from `w` would lose the
//! imaginary part to absorption at `z = 0`, where it is of order 1e-30.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::SymmetrizedSpectrum;
use crate::C64;

const ONE: C64 = C64::new(1.0, 0.0);

/// Floor for `|z|^2`: keeps the quadratic branch structure non-degenerate at
/// `z = 0` while perturbing the equations by less than 1e-30.
const Z_SQ_FLOOR: f64 = 1e-30;

/// Anchor and ratio of the continuation ladder.
const V_ANCHOR: f64 = 10.0;
const V_RATIO: f64 = 0.85;
const V_RATIO_FINE: f64 = 0.97;

/// Which printed version of the system to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemForm {
    Theorem,
    Statement,
}

/// One point query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesQuery {
    /// Spectral parameter, `Im(alpha) > 0`.
    pub alpha: C64,
    /// Shift of the product.
    pub z: C64,
    /// Number of factors, at least 2.
    pub m: u32,
    pub form: SystemForm,
}

impl StieltjesQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.im > 0.0) {
            return Err(Error::domain(format!(
                "alpha must have positive imaginary part, got {}",
                self.alpha
            )));
        }
        if self.m < 2 {
            return Err(Error::domain(format!("m must be at least 2, got {}", self.m)));
        }
        Ok(())
    }
}

/// Converged solution of the system at one `alpha`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StieltjesSolution {
    pub s: C64,
    pub w: C64,
    /// `w - alpha`, carried exactly.
    pub d: C64,
    /// Residuals of the two printed equations.
    pub residuals: [f64; 2],
    pub iterations: usize,
    /// `Im(w - alpha) > 0`.
    pub branch_ok: bool,
}

struct FormOps {
    m: u32,
    sign: f64,
    zsq: f64,
    form: SystemForm,
}

impl FormOps {
    fn new(m: u32, z: C64, form: SystemForm) -> Self {
        FormOps {
            m,
            sign: if m % 2 == 0 { -1.0 } else { 1.0 },
            zsq: z.norm_sqr().max(Z_SQ_FLOOR),
            form,
        }
    }

    /// Power of `w` in the first equation's trailing term.
    fn w_power(&self) -> u32 {
        match self.form {
            SystemForm::Statement => self.m - 1,
            SystemForm::Theorem => self.m,
        }
    }

    fn f1(&self, s: C64, w: C64) -> C64 {
        ONE + w * s + self.sign * w.powu(self.w_power()) * s.powu(self.m + 1)
    }

    /// Second equation evaluated in `d = w - alpha` directly.
    fn f2(&self, s: C64, d: C64) -> C64 {
        match self.form {
            SystemForm::Statement => s * d * d + d - s * self.zsq,
            SystemForm::Theorem => d * d + d - 4.0 * self.zsq * s,
        }
    }

    /// Both roots of the quadratic for `d`, cancellation-free.
    fn roots(&self, s: C64) -> (C64, C64) {
        match self.form {
            SystemForm::Statement => {
                // s d^2 + d - s zsq = 0
                let disc = (ONE + 4.0 * s * s * self.zsq).sqrt();
                let q = -(ONE + disc) / 2.0;
                (q / s, -s * self.zsq / q)
            }
            SystemForm::Theorem => {
                // d^2 + d - 4 zsq s = 0
                let disc = (ONE + 16.0 * self.zsq * s).sqrt();
                let q = -(ONE + disc) / 2.0;
                (q, -4.0 * self.zsq * s / q)
            }
        }
    }

    fn smaller_root(&self, s: C64) -> C64 {
        let (a, b) = self.roots(s);
        if a.norm_sqr() <= b.norm_sqr() {
            a
        } else {
            b
        }
    }

    fn nearest_root(&self, s: C64, d_prev: C64) -> C64 {
        let (a, b) = self.roots(s);
        if (a - d_prev).norm_sqr() <= (b - d_prev).norm_sqr() {
            a
        } else {
            b
        }
    }

    /// Contraction rearrangement of the first equation.
    fn s_update(&self, s: C64, w: C64) -> C64 {
        -ONE / (w + self.sign * w.powu(self.w_power()) * s.powu(self.m))
    }

    fn jacobian(&self, alpha: C64, s: C64, d: C64) -> [[C64; 2]; 2] {
        let w = alpha + d;
        let p = self.w_power();
        let df1_ds = w + self.sign * (self.m + 1) as f64 * w.powu(p) * s.powu(self.m);
        let df1_dw = s + if p >= 1 {
            self.sign * p as f64 * w.powu(p - 1) * s.powu(self.m + 1)
        } else {
            C64::new(0.0, 0.0)
        };
        let (df2_ds, df2_dw) = match self.form {
            SystemForm::Statement => (d * d - self.zsq, 2.0 * s * d + ONE),
            SystemForm::Theorem => (C64::new(-4.0 * self.zsq, 0.0), 2.0 * d + ONE),
        };
        [[df1_ds, df1_dw], [df2_ds, df2_dw]]
    }
}

/// Damped coupled Newton on `(s, d)`, used when the fixed point stalls.
fn newton_polish(
    ops: &FormOps,
    alpha: C64,
    mut s: C64,
    mut d: C64,
    tol: f64,
    iters: usize,
) -> Option<(C64, C64)> {
    let mut f1 = ops.f1(s, alpha + d);
    let mut f2 = ops.f2(s, d);
    let mut best = f1.norm().max(f2.norm());
    for _ in 0..iters {
        if best <= tol {
            return Some((s, d));
        }
        let j = ops.jacobian(alpha, s, d);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            return None;
        }
        let ds = -(f1 * j[1][1] - j[0][1] * f2) / det;
        let dd = -(j[0][0] * f2 - f1 * j[1][0]) / det;
        let mut accepted = false;
        let mut t = 1.0f64;
        for _ in 0..50 {
            let (sc, dc) = (s + ds * t, d + dd * t);
            let g1 = ops.f1(sc, alpha + dc);
            let g2 = ops.f2(sc, dc);
            let gn = g1.norm().max(g2.norm());
            if gn < best {
                s = sc;
                d = dc;
                f1 = g1;
                f2 = g2;
                best = gn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if best <= tol {
        Some((s, d))
    } else {
        None
    }
}

struct RungResult {
    s: C64,
    d: C64,
    residuals: [f64; 2],
    iterations: usize,
}

/// One ladder rung: damped fixed point with branch tracking, Newton rescue.
fn solve_rung(
    ops: &FormOps,
    alpha: C64,
    s0: C64,
    d0: C64,
    tol: f64,
    max_iter: usize,
) -> Option<RungResult> {
    let mut s = s0;
    let mut d = d0;
    let mut damping = 0.5f64;
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        d = ops.nearest_root(s, d);
        let w = alpha + d;
        let proposal = ops.s_update(s, w);
        let s_new = s + damping * (proposal - s);
        let d_new = ops.nearest_root(s_new, d);
        let r1 = ops.f1(s_new, alpha + d_new).norm();
        let r2 = ops.f2(s_new, d_new).norm();
        let r = r1.max(r2);
        if r <= tol && s_new.im > 0.0 {
            return Some(RungResult {
                s: s_new,
                d: d_new,
                residuals: [r1, r2],
                iterations: it + 1,
            });
        }
        if r > last {
            damping = (damping * 0.5).max(1e-3);
        } else {
            damping = (damping * 1.2).min(0.9);
        }
        last = r;
        s = s_new;
        d = d_new;
        if it >= 25 && it % 25 == 0 {
            if let Some((sn, dn)) = newton_polish(ops, alpha, s, d, tol, 80) {
                if sn.im > 0.0 {
                    let r1 = ops.f1(sn, alpha + dn).norm();
                    let r2 = ops.f2(sn, dn).norm();
                    if r1.max(r2) <= tol {
                        return Some(RungResult {
                            s: sn,
                            d: dn,
                            residuals: [r1, r2],
                            iterations: it + 1,
                        });
                    }
                }
            }
        }
    }
    None
}

fn solve_ladder(
    ops: &FormOps,
    u: f64,
    v_target: f64,
    tol: f64,
    max_iter: usize,
    init: Option<C64>,
    ratio: f64,
) -> Result<StieltjesSolution> {
    let mut v = v_target.max(V_ANCHOR);
    let mut s = init.unwrap_or(-ONE / C64::new(u, v));
    let mut d = ops.smaller_root(s);
    let mut total = 0usize;
    let mut last_residuals = [f64::INFINITY; 2];
    for _ in 0..4000 {
        let alpha = C64::new(u, v);
        let rung_tol = if v > v_target {
            (tol * 1e3).clamp(1e-12, 1e-7)
        } else {
            tol
        };
        match solve_rung(ops, alpha, s, d, rung_tol, max_iter) {
            Some(r) => {
                s = r.s;
                d = r.d;
                total += r.iterations;
                last_residuals = r.residuals;
                if v <= v_target {
                    return Ok(StieltjesSolution {
                        s,
                        w: alpha + d,
                        d,
                        residuals: last_residuals,
                        iterations: total,
                        branch_ok: d.im > 0.0,
                    });
                }
                v = (v * ratio).max(v_target);
            }
            None => {
                // halve the geometric step back toward the last good rung
                let v_prev = (v / ratio).min(V_ANCHOR);
                let v_mid = (v * v_prev).sqrt();
                if (v_mid - v).abs() < 1e-13 {
                    break;
                }
                v = v_mid;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: total,
        residual_system: last_residuals[0],
        residual_branch: last_residuals[1],
    })
}

/// Solve the system at one query point.
///
/// `max_iter` bounds the damped iteration per continuation rung. The
/// returned solution satisfies both residuals at `tol` and the Nevanlinna
/// constraints `Im(s) > 0`, `|s| <= 1/Im(alpha)`.
pub fn solve_system(
    query: &StieltjesQuery,
    init: Option<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<StieltjesSolution> {
    query.validate()?;
    if !(tol > 0.0) {
        return Err(Error::domain("tol must be positive"));
    }
    let ops = FormOps::new(query.m, query.z, query.form);
    let u = query.alpha.re;
    let v = query.alpha.im;
    let solution = solve_ladder(&ops, u, v, tol, max_iter, init, V_RATIO)
        .or_else(|_| solve_ladder(&ops, u, v, tol, max_iter, init, V_RATIO_FINE))?;
    if !(solution.s.im > 0.0) {
        return Err(Error::Branch(format!(
            "converged to a non-Nevanlinna point: s = {}",
            solution.s
        )));
    }
    if solution.s.norm() > (1.0 + 1e-9) / v + 1e-12 {
        return Err(Error::Branch(format!(
            "converged |s| = {} exceeds the Stieltjes bound 1/v = {}",
            solution.s.norm(),
            1.0 / v
        )));
    }
    Ok(solution)
}

/// Recovered density on a grid, `rho(x) = Im s(x + i eps, z) / pi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub eps: f64,
    pub z: C64,
    pub m: u32,
    pub form: SystemForm,
    pub solutions: Vec<Option<StieltjesSolution>>,
    /// Indices whose solves failed; their density is interpolated from the
    /// neighbors and flagged here.
    pub failures: Vec<usize>,
}

impl DensityGrid {
    /// Trapezoid mass over the grid.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.x, &self.density)
    }

    /// Trapezoid moment `∫ x^p rho(x) dx`, normalized by the mass.
    pub fn normalized_moment(&self, p: u32) -> f64 {
        let weighted: Vec<f64> = self
            .x
            .iter()
            .zip(self.density.iter())
            .map(|(x, d)| x.powi(p as i32) * d)
            .collect();
        trapezoid(&self.x, &weighted) / self.mass()
    }

    /// Piecewise-linear CDF normalized to total mass one.
    pub fn cdf(&self) -> CdfInterpolant {
        let mut cumulative = vec![0.0; self.x.len()];
        for i in 1..self.x.len() {
            cumulative[i] = cumulative[i - 1]
                + 0.5 * (self.density[i - 1] + self.density[i]) * (self.x[i] - self.x[i - 1]);
        }
        let total = cumulative.last().copied().unwrap_or(0.0);
        if total > 0.0 {
            for c in &mut cumulative {
                *c /= total;
            }
        }
        CdfInterpolant {
            x: self.x.clone(),
            f: cumulative,
        }
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i - 1] + y[i]) * (x[i] - x[i - 1]);
    }
    acc
}

/// Monotone piecewise-linear CDF with inverse.
#[derive(Debug, Clone)]
pub struct CdfInterpolant {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl CdfInterpolant {
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= *self.x.last().unwrap() {
            return 1.0;
        }
        let i = self.x.partition_point(|v| *v <= x) - 1;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        (f0 + t * (f1 - f0)).clamp(0.0, 1.0)
    }

    /// Generalized inverse; binary search on the knots.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let i = self.f.partition_point(|v| *v < p);
        if i == 0 {
            return self.x[0];
        }
        if i >= self.x.len() {
            return *self.x.last().unwrap();
        }
        let (f0, f1) = (self.f[i - 1], self.f[i]);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        if f1 > f0 {
            x0 + (p - f0) / (f1 - f0) * (x1 - x0)
        } else {
            x0
        }
    }
}

/// Solve along a grid of real abscissas at height `eps`, warm-starting each
/// point from its left neighbor.
pub fn density_from_inversion(
    z: C64,
    m: u32,
    form: SystemForm,
    x_grid: &[f64],
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DensityGrid> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps must be positive"));
    }
    if x_grid.is_empty() {
        return Err(Error::domain("x_grid must be nonempty"));
    }
    let mut density = vec![f64::NAN; x_grid.len()];
    let mut solutions: Vec<Option<StieltjesSolution>> = vec![None; x_grid.len()];
    let mut failures = Vec::new();
    let mut warm: Option<C64> = None;
    for (i, &x) in x_grid.iter().enumerate() {
        let query = StieltjesQuery {
            alpha: C64::new(x, eps),
            z,
            m,
            form,
        };
        match solve_system(&query, warm, tol, max_iter) {
            Ok(sol) => {
                warm = Some(sol.s);
                let raw = sol.s.im / std::f64::consts::PI;
                density[i] = if raw.abs() < 1e-12 { 0.0 } else { raw.max(0.0) };
                solutions[i] = Some(sol);
            }
            Err(_) => {
                failures.push(i);
                warm = None;
            }
        }
    }
    // fill failed points by linear interpolation between valid neighbors
    for &i in &failures {
        let left = (0..i).rev().find(|j| !density[*j].is_nan());
        let right = ((i + 1)..x_grid.len()).find(|j| !density[*j].is_nan());
        density[i] = match (left, right) {
            (Some(l), Some(r)) => {
                let t = (x_grid[i] - x_grid[l]) / (x_grid[r] - x_grid[l]);
                density[l] + t * (density[r] - density[l])
            }
            (Some(l), None) => density[l],
            (None, Some(r)) => density[r],
            (None, None) => {
                return Err(Error::NonConvergence {
                    iterations: 0,
                    residual_system: f64::INFINITY,
                    residual_branch: f64::INFINITY,
                })
            }
        };
    }
    Ok(DensityGrid {
        x: x_grid.to_vec(),
        density,
        eps,
        z,
        m,
        form,
        solutions,
        failures,
    })
}

/// Kolmogorov distance between the solver CDF and the empirical CDF of a
/// symmetrized spectrum.
pub fn compare_with_empirical(grid: &DensityGrid, spectrum: &SymmetrizedSpectrum) -> Result<f64> {
    if spectrum.values.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    let cdf = grid.cdf();
    let n = spectrum.values.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in spectrum.values.iter().enumerate() {
        let f = cdf.value(*v);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    Ok(d)
}

/// Outcome of running both system forms against the same spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormDiscrimination {
    pub statement_delta: f64,
    pub theorem_delta: f64,
    pub winner: SystemForm,
    pub margin: f64,
    /// False when both distances exceed the resolution guard of 0.2.
    pub resolved: bool,
}

/// Run [`compare_with_empirical`] under both forms and report the winner.
pub fn form_discrimination(
    z: C64,
    m: u32,
    spectra: &[SymmetrizedSpectrum],
    x_grid: &[f64],
    eps: f64,
    tol: f64,
) -> Result<FormDiscrimination> {
    if spectra.is_empty() {
        return Err(Error::domain("form discrimination needs at least one spectrum"));
    }
    let mut deltas = [0.0f64; 2];
    for (slot, form) in [SystemForm::Statement, SystemForm::Theorem].iter().enumerate() {
        let grid = density_from_inversion(z, m, *form, x_grid, eps, tol, 300)?;
        let mut acc = 0.0;
        for spectrum in spectra {
            acc += compare_with_empirical(&grid, spectrum)?;
        }
        deltas[slot] = acc / spectra.len() as f64;
    }
    let (statement_delta, theorem_delta) = (deltas[0], deltas[1]);
    let winner = if statement_delta <= theorem_delta {
        SystemForm::Statement
    } else {
        SystemForm::Theorem
    };
    Ok(FormDiscrimination {
        statement_delta,
        theorem_delta,
        winner,
        margin: (statement_delta - theorem_delta).abs(),
        resolved: statement_delta.min(theorem_delta) <= 0.2,
    })
}

/// Inverse-transform sample from a solver CDF (testing aid).
pub fn sample_from_cdf(cdf: &CdfInterpolant, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..count).map(|_| cdf.quantile(rng.random::<f64>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitlaw::{fuss_catalan_moment_f64, symmetrized_support_edge};
    use rand_chacha::rand_core::SeedableRng;

    fn grid(xmax: f64, h: f64) -> Vec<f64> {
        let n = (2.0 * xmax / h).round() as usize + 1;
        (0..n).map(|i| -xmax + i as f64 * h).collect()
    }

    #[test]
    fn large_v_asymptotics() {
        let q = StieltjesQuery {
            alpha: C64::new(0.0, 10.0),
            z: C64::new(0.0, 0.0),
            m: 2,
            form: SystemForm::Statement,
        };
        let sol = solve_system(&q, None, 1e-13, 300).unwrap();
        assert!((sol.s - C64::new(0.0, 0.1)).norm() < 5e-2);
        assert!(sol.branch_ok);
    }

    #[test]
    fn nevanlinna_and_branch_on_a_query_grid() {
        for m in [2u32, 3] {
            for z in [C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.5)] {
                for form in [SystemForm::Statement, SystemForm::Theorem] {
                    for u in [-2.0, -0.3, 0.0, 1.1, 2.7] {
                        for v in [0.5, 1.0, 3.0] {
                            let q = StieltjesQuery {
                                alpha: C64::new(u, v),
                                z,
                                m,
                                form,
                            };
                            let sol = solve_system(&q, None, 1e-12, 300).unwrap();
                            assert!(sol.s.im > 0.0);
                            assert!(sol.s.norm() <= 1.0 / v + 1e-9);
                            assert!(sol.branch_ok, "Im(w-a) must be positive at {u}+{v}i");
                            assert!(sol.residuals[0] <= 1e-12 && sol.residuals[1] <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_queries() {
        let q = StieltjesQuery {
            alpha: C64::new(0.0, -1.0),
            z: C64::new(0.0, 0.0),
            m: 2,
            form: SystemForm::Statement,
        };
        assert!(solve_system(&q, None, 1e-10, 100).is_err());
        let q2 = StieltjesQuery {
            alpha: C64::new(0.0, 1.0),
            z: C64::new(0.0, 0.0),
            m: 1,
            form: SystemForm::Statement,
        };
        assert!(solve_system(&q2, None, 1e-10, 100).is_err());
    }

    #[test]
    fn zero_shift_branch_degenerates_to_w_equals_alpha() {
        // at z = 0 the physical root of the branch quadratic collapses to
        // w - alpha -> 0 (the -1/s root leads to no Stieltjes solution);
        // the floor keeps its imaginary part strictly positive
        let q = StieltjesQuery {
            alpha: C64::new(0.5, 0.8),
            z: C64::new(0.0, 0.0),
            m: 2,
            form: SystemForm::Statement,
        };
        let sol = solve_system(&q, None, 1e-12, 300).unwrap();
        assert!(sol.d.norm() < 1e-28, "|w - alpha| = {}", sol.d.norm());
        assert!(sol.d.im > 0.0);
    }

    #[test]
    fn statement_form_recovers_fuss_catalan_moments() {
        // moments of the recovered density at z = 0, m = 2, eps = 0.005 on
        // the frozen grid [-2.9, 2.9], h = 0.004: within 2% of {1, 3, 12}
        let g = density_from_inversion(
            C64::new(0.0, 0.0),
            2,
            SystemForm::Statement,
            &grid(2.9, 0.004),
            0.005,
            1e-9,
            300,
        )
        .unwrap();
        assert!(g.failures.is_empty());
        for (p, expect) in [(2u32, 1.0), (4, 3.0), (6, 12.0)] {
            let got = g.normalized_moment(p);
            assert!(
                (got / expect - 1.0).abs() <= 0.02,
                "moment {p}: {got} vs {expect}"
            );
        }
        for (p, expect) in [(2u32, 1.0), (4, 3.0), (6, 12.0)] {
            assert_eq!(expect, fuss_catalan_moment_f64(2, p / 2));
        }
    }

    #[test]
    fn recovered_density_is_even_and_normalized_at_zero_shift() {
        let xs = grid(3.2, 0.01);
        let g = density_from_inversion(
            C64::new(0.0, 0.0),
            2,
            SystemForm::Statement,
            &xs,
            0.01,
            1e-9,
            300,
        )
        .unwrap();
        let mass = g.mass();
        assert!((mass - 1.0).abs() <= 0.03, "mass {mass}");
        let n = xs.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert!(
                (g.density[i] - g.density[j]).abs() < 1e-6,
                "x = {}: {} vs {}",
                xs[i],
                g.density[i],
                g.density[j]
            );
        }
    }

    #[test]
    fn mirror_symmetry_of_the_transform() {
        // s(-conj(alpha)) = -conj(s(alpha))
        for z in [C64::new(0.0, 0.0), C64::new(0.5, 0.2)] {
            for u in [0.3, 1.1, 2.0] {
                let v = 0.05;
                let lhs = solve_system(
                    &StieltjesQuery {
                        alpha: C64::new(-u, v),
                        z,
                        m: 2,
                        form: SystemForm::Statement,
                    },
                    None,
                    1e-11,
                    300,
                )
                .unwrap()
                .s;
                let rhs = -solve_system(
                    &StieltjesQuery {
                        alpha: C64::new(u, v),
                        z,
                        m: 2,
                        form: SystemForm::Statement,
                    },
                    None,
                    1e-11,
                    300,
                )
                .unwrap()
                .s
                .conj();
                assert!((lhs - rhs).norm() < 1e-8, "u={u} z={z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn density_vanishes_beyond_the_support_edge() {
        // edge oracle from moment growth; density at edge + 1.4 is below
        // 1e-3 even through the Cauchy smoothing at eps = 0.005
        let edge = symmetrized_support_edge(2);
        assert!((edge - 2.598).abs() < 0.01, "edge {edge}");
        let x = edge + 1.4;
        let sol = solve_system(
            &StieltjesQuery {
                alpha: C64::new(x, 0.005),
                z: C64::new(0.0, 0.0),
                m: 2,
                form: SystemForm::Statement,
            },
            None,
            1e-11,
            300,
        )
        .unwrap();
        let density = sol.s.im / std::f64::consts::PI;
        assert!(density < 1e-3, "density {density} at x = {x}");
    }

    #[test]
    fn ks_null_for_samples_drawn_from_solver_cdf() {
        let g = density_from_inversion(
            C64::new(0.0, 0.0),
            2,
            SystemForm::Statement,
            &grid(3.2, 0.01),
            0.01,
            1e-9,
            300,
        )
        .unwrap();
        let cdf = g.cdf();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 10_000usize;
        let mut sample = sample_from_cdf(&cdf, n, &mut rng);
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, v) in sample.iter().enumerate() {
            let f = cdf.value(*v);
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max((f - (i as f64 + 1.0) / n as f64).abs());
        }
        assert!(d <= 1.63 / (n as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn identical_cdfs_have_zero_distance() {
        let g = density_from_inversion(
            C64::new(0.0, 0.0),
            2,
            SystemForm::Statement,
            &grid(3.2, 0.02),
            0.01,
            1e-9,
            300,
        )
        .unwrap();
        let cdf = g.cdf();
        // a "spectrum" placed exactly at the CDF quantile midpoints keeps the
        // sup distance at the plug-in floor 1/(2N)
        let n = 64usize;
        let values: Vec<f64> = (0..2 * n)
            .map(|i| cdf.quantile((i as f64 + 0.5) / (2 * n) as f64))
            .collect();
        let spectrum = SymmetrizedSpectrum {
            values,
            z: C64::new(0.0, 0.0),
            n,
        };
        let d = compare_with_empirical(&g, &spectrum).unwrap();
        assert!(d <= 0.5 / (2 * n) as f64 + 1e-9, "distance {d}");
    }
}
