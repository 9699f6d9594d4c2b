//! The limiting eigenvalue law of the product and its derived objects.
//!
//! The limit measure is the law of `u^m` for `u` uniform on the unit disc:
//! density `1/(pi m (x^2+y^2)^((m-1)/m))` inside the disc, radial CDF
//! `r^(2/m)`, logarithmic potential `(m/2)(1 - |z|^(2/m))` inside and
//! `-ln|z|` outside. The closed forms for the CDF and the potential are
//! cross-checked permanently against quadrature oracles in the test suite.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

/// The limit law for a product of `m` factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitLaw {
    pub m: u32,
}

impl LimitLaw {
    pub fn new(m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::domain("limit law needs m >= 1"));
        }
        Ok(LimitLaw { m })
    }

    /// Density at `(x, y)`. Returns `+inf` at the origin for `m >= 2`,
    /// where the singularity is integrable.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        if r2 > 1.0 {
            return 0.0;
        }
        let m = self.m as f64;
        if r2 == 0.0 {
            return if self.m == 1 {
                1.0 / std::f64::consts::PI
            } else {
                f64::INFINITY
            };
        }
        1.0 / (std::f64::consts::PI * m * r2.powf((m - 1.0) / m))
    }

    /// Mass of the disc of radius `r`.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
        }
        Ok(r.powf(2.0 / self.m as f64).min(1.0))
    }

    /// One draw: modulus `U^(m/2)`, angle uniform.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> C64 {
        let u: f64 = rng.random();
        let radius = u.powf(self.m as f64 / 2.0);
        let angle = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
        C64::from_polar(radius, angle)
    }

    /// Logarithmic potential `-∫ ln|w - z| dμ(w)`.
    pub fn potential(&self, z: C64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            let m = self.m as f64;
            (m / 2.0) * (1.0 - r.powf(2.0 / m))
        } else {
            -r.ln()
        }
    }
}

/// Exact `p`-th moment of the squared-singular-value limit of the product
/// at `z = 0`: `binom((m+1)p, p) / (mp + 1)`.
pub fn fuss_catalan_moment(m: u32, p: u32) -> BigUint {
    let top = (m as u64 + 1) * p as u64;
    let mut binom = BigUint::one();
    for i in 0..p as u64 {
        binom = binom * BigUint::from(top - i) / BigUint::from(i + 1);
    }
    let divisor = BigUint::from(m as u64 * p as u64 + 1);
    let quotient = &binom / &divisor;
    debug_assert!(
        (&binom % &divisor).is_zero(),
        "Fuss-Catalan numbers are integers"
    );
    quotient
}

/// `fuss_catalan_moment` as a float (valid while the value fits in f64).
pub fn fuss_catalan_moment_f64(m: u32, p: u32) -> f64 {
    fuss_catalan_moment(m, p).to_f64().unwrap_or(f64::INFINITY)
}

/// Numerical estimate of the right edge of the squared-singular-value limit
/// at `z = 0`, extrapolated from the growth of the moment ratios
/// `m_{p+1}/m_p` with a quadratic fit in `1/p`.
pub fn squared_support_edge(m: u32) -> f64 {
    // least squares of r_p against (1, 1/p, 1/p^2) for p in 20..=90
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for p in 20u32..=90 {
        let r = fuss_catalan_moment_f64(m, p + 1) / fuss_catalan_moment_f64(m, p);
        let x = [1.0, 1.0 / p as f64, 1.0 / (p as f64 * p as f64)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
            atb[i] += x[i] * r;
        }
    }
    solve3(ata, atb)[0]
}

/// Right edge of the symmetrized singular-value limit at `z = 0`.
pub fn symmetrized_support_edge(m: u32) -> f64 {
    squared_support_edge(m).sqrt()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|i, j| a[*i][col].abs().partial_cmp(&a[*j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}
