//! Chebyshev collocation on the truncated half-line.
//!
//! The half-line `r in [0, inf)` is handled through `s = r^2`, truncated at
//! `s0` and mapped affinely onto `[-1, 1]` via `s = s0 (1 + l) / 2`. All
//! operators act on samples at the Chebyshev–Lobatto points
//! `l_n = cos(n pi / N)`, ordered from `l_0 = 1` (i.e. `s = s0`) down to
//! `l_N = -1` (`s = 0`). Differentiation-matrix and quadrature formulas
//! follow Trefethen, *Spectral Methods in MATLAB* (SIAM, 2000).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Spatial dimension of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(Error::InvalidDimension(other)),
        }
    }

    pub fn value(self) -> u32 {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Surface measure of the unit sphere: `2 pi` in 2D, `4 pi` in 3D.
    pub fn sphere_surface(self) -> f64 {
        match self {
            Dimension::Two => 2.0 * PI,
            Dimension::Three => 4.0 * PI,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Collocation geometry, differentiation matrices and quadrature weights
/// for a given `(d, N, s0)`.
///
/// Immutable after construction; share between workers with [`Arc`].
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub d: Dimension,
    pub degree: usize,
    pub s0: f64,
    /// Chebyshev points `l_n = cos(n pi / N)`, decreasing from 1 to -1.
    pub ell_nodes: DVector<f64>,
    /// Mapped nodes `s_n = s0 (1 + l_n) / 2`, decreasing from `s0` to 0.
    pub s_nodes: DVector<f64>,
    /// First-derivative collocation matrix in `l`.
    pub d_ell: DMatrix<f64>,
    /// First-derivative matrix in `s` (chain rule, factor `2/s0`).
    pub d_s: DMatrix<f64>,
    /// Second-derivative matrix in `s`, computed as `d_s * d_s`.
    pub d2_s: DMatrix<f64>,
    /// Clenshaw–Curtis weights in `l`; positive, sum to 2.
    pub quad_weights: DVector<f64>,
    /// Weights such that `sum_n radial_weights[n] * g(s_n)` approximates
    /// `int_{R^d} g(|x|) dx = (sigma_d / 2) int_0^{s0} g(s) s^{(d-2)/2} ds`.
    pub radial_weights: DVector<f64>,
}

impl RadialGrid {
    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }
}

/// Chebyshev–Lobatto points `cos(n pi / N)`, `n = 0..=N`.
fn chebyshev_points(n: usize) -> DVector<f64> {
    DVector::from_fn(n + 1, |j, _| (j as f64 * PI / n as f64).cos())
}

/// First-derivative collocation matrix on the Chebyshev points.
///
/// Off-diagonal entries use the classical closed form; diagonal entries
/// come from the negative-sum trick, so the matrix annihilates constants
/// exactly.
pub fn differentiation_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::DegenerateGrid(format!(
            "differentiation needs degree >= 1, got {n}"
        )));
    }
    let x = chebyshev_points(n);
    let np1 = n + 1;
    let c = |i: usize| -> f64 {
        if i == 0 || i == n {
            2.0
        } else {
            1.0
        }
    };
    let mut d = DMatrix::zeros(np1, np1);
    for i in 0..np1 {
        for j in 0..np1 {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = (c(i) / c(j)) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..np1 {
        let mut row_sum = 0.0;
        for j in 0..np1 {
            if j != i {
                row_sum += d[(i, j)];
            }
        }
        d[(i, i)] = -row_sum;
    }
    Ok(d)
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the `N+1` Chebyshev points.
///
/// Exact for polynomials of degree `<= N`; all weights positive and
/// summing to 2.
pub fn clenshaw_curtis_weights(n: usize) -> Result<DVector<f64>> {
    if n < 2 {
        return Err(Error::DegenerateGrid(format!(
            "quadrature needs degree >= 2, got {n}"
        )));
    }
    let mut w = DVector::zeros(n + 1);
    let theta = |j: usize| j as f64 * PI / n as f64;
    if n % 2 == 0 {
        let end = 1.0 / (n * n - 1) as f64;
        w[0] = end;
        w[n] = end;
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta(j)).cos() / (4 * k * k - 1) as f64;
            }
            v -= (n as f64 * theta(j)).cos() / (n * n - 1) as f64;
            w[j] = 2.0 * v / n as f64;
        }
    } else {
        let end = 1.0 / (n * n) as f64;
        w[0] = end;
        w[n] = end;
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta(j)).cos() / (4 * k * k - 1) as f64;
            }
            w[j] = 2.0 * v / n as f64;
        }
    }
    Ok(w)
}

/// Moments `int_{-1}^{1} T_k(l) (1 + l)^{(d-2)/2} dl` of the radial
/// measure in the mapped variable.
///
/// For d = 2 these are the plain Chebyshev moments; for d = 3 the factor
/// `sqrt(1 + l)` is integrated in closed form, so the resulting weights
/// integrate `p(l) sqrt(1 + l)` exactly for every polynomial `p` of degree
/// `<= N`. Folding the square root into the moments keeps the d = 3
/// quadrature spectrally accurate; multiplying plain Clenshaw–Curtis
/// weights by `sqrt(s_n)` would only converge algebraically because of the
/// branch point at `s = 0`.
fn measure_moments(d: Dimension, n: usize) -> DVector<f64> {
    let mut mu = DVector::zeros(n + 1);
    match d {
        Dimension::Two => {
            for k in (0..=n).step_by(2) {
                mu[k] = 2.0 / (1.0 - (k * k) as f64);
            }
        }
        Dimension::Three => {
            let root2 = std::f64::consts::SQRT_2;
            for k in 0..=n {
                let k2 = (4 * k * k) as f64;
                mu[k] = root2 * (3.0 / (9.0 - k2) + 1.0 / (1.0 - k2));
            }
        }
    }
    mu
}

/// Interpolatory quadrature weights in `l` for the measure
/// `(1 + l)^{(d-2)/2} dl`, via the discrete Chebyshev transform.
fn measure_weights(d: Dimension, n: usize) -> DVector<f64> {
    let mu = measure_moments(d, n);
    let half = |m: usize| -> f64 {
        if m == 0 || m == n {
            0.5
        } else {
            1.0
        }
    };
    DVector::from_fn(n + 1, |j, _| {
        let mut acc = 0.0;
        for k in 0..=n {
            acc += half(k) * mu[k] * (k as f64 * j as f64 * PI / n as f64).cos();
        }
        2.0 * half(j) * acc / n as f64
    })
}

/// Build the collocation grid for `(d, N, s0)`.
///
/// `N` must be even and at least 8 so that `s = 0` is a node and the
/// quadrature rules have their classical closed forms.
pub fn build_grid(d: Dimension, n: usize, s0: f64) -> Result<RadialGrid> {
    if n < 8 {
        return Err(Error::DegenerateGrid(format!(
            "grid needs degree >= 8, got {n}"
        )));
    }
    if n % 2 != 0 {
        return Err(Error::DegenerateGrid(format!(
            "grid degree must be even, got {n}"
        )));
    }
    if !s0.is_finite() || s0 <= 0.0 {
        return Err(Error::DegenerateGrid(format!(
            "truncation radius must be positive, got {s0}"
        )));
    }

    let ell_nodes = chebyshev_points(n);
    let s_nodes = ell_nodes.map(|l| s0 * (1.0 + l) / 2.0);
    let d_ell = differentiation_matrix(n)?;
    let d_s = &d_ell * (2.0 / s0);
    let d2_s = &d_s * &d_s;
    let quad_weights = clenshaw_curtis_weights(n)?;

    // (sigma_d / 2) (s0 / 2)^(d/2) is the Jacobian of x -> l combined with
    // the angular integration.
    let dim = d.as_f64();
    let scale = d.sphere_surface() / 2.0 * (s0 / 2.0).powf(dim / 2.0);
    let radial_weights = measure_weights(d, n) * scale;
    if radial_weights.iter().any(|&w| w < 0.0) {
        return Err(Error::DegenerateGrid(format!(
            "negative radial quadrature weight at N = {n}"
        )));
    }

    Ok(RadialGrid {
        d,
        degree: n,
        s0,
        ell_nodes,
        s_nodes,
        d_ell,
        d_s,
        d2_s,
        quad_weights,
        radial_weights,
    })
}

/// Convenience wrapper returning a shareable grid.
pub fn build_shared_grid(d: Dimension, n: usize, s0: f64) -> Result<Arc<RadialGrid>> {
    build_grid(d, n, s0).map(Arc::new)
}

impl RadialGrid {
    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: self.n_nodes(),
                got: len,
            });
        }
        Ok(())
    }

    /// `int_{R^d} g(|x|) dx` from samples of a real integrand at the nodes.
    pub fn radial_integral(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(self
            .radial_weights
            .iter()
            .zip(samples)
            .map(|(w, g)| w * g)
            .sum())
    }

    /// Barycentric evaluation of the degree-N interpolant at `s_star`.
    pub fn interpolate(&self, samples: &[f64], s_star: f64) -> Result<f64> {
        self.check_len(samples.len())?;
        if !(0.0..=self.s0).contains(&s_star) {
            return Err(Error::OutOfDomain {
                s: s_star,
                s0: self.s0,
            });
        }
        let l_star = 2.0 * s_star / self.s0 - 1.0;
        let n = self.degree;
        // Chebyshev–Lobatto barycentric weights: (-1)^j, halved at the ends.
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..=n {
            let diff = l_star - self.ell_nodes[j];
            if diff.abs() < 1e-14 {
                return Ok(samples[j]);
            }
            let mut lam = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                lam *= 0.5;
            }
            let ratio = lam / diff;
            num += ratio * samples[j];
            den += ratio;
        }
        Ok(num / den)
    }

    /// Interpolate complex samples (barycentric, same nodes).
    pub fn interpolate_complex(
        &self,
        samples: &[num_complex::Complex64],
        s_star: f64,
    ) -> Result<num_complex::Complex64> {
        self.check_len(samples.len())?;
        if !(0.0..=self.s0).contains(&s_star) {
            return Err(Error::OutOfDomain {
                s: s_star,
                s0: self.s0,
            });
        }
        let l_star = 2.0 * s_star / self.s0 - 1.0;
        let n = self.degree;
        let mut num = num_complex::Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..=n {
            let diff = l_star - self.ell_nodes[j];
            if diff.abs() < 1e-14 {
                return Ok(samples[j]);
            }
            let mut lam = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                lam *= 0.5;
            }
            let ratio = lam / diff;
            num += samples[j] * ratio;
            den += ratio;
        }
        Ok(num / den)
    }

    /// Derivative samples `(d/ds) u` at the nodes.
    pub fn derivative(&self, samples: &[f64]) -> Result<DVector<f64>> {
        self.check_len(samples.len())?;
        let v = DVector::from_column_slice(samples);
        Ok(&self.d_s * v)
    }
}
