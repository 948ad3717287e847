//! Conserved quantities and norms of radial fields.
//!
//! Mass is the squared L2 norm, energy is
//! `E = 1/2 ||grad u||^2 - 1/2 ||u||_4^4 + 1/3 ||u||_6^6`, and the action
//! at frequency `omega` is `S = E + omega M`. The gradient term is
//! evaluated on the `s = r^2` grid through `|grad u|^2 = 4 s |du/ds|^2`,
//! which avoids differentiating in `r` near the origin.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::RadialGrid;

/// Snapshot of the conserved quantities and norms of one field.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostics {
    /// `M(u) = ||u||_2^2`.
    pub mass: f64,
    pub energy: f64,
    /// `S_omega = E + omega M` for the supplied omega.
    pub action_omega: f64,
    /// `||u||_4^4`.
    pub l4: f64,
    /// `||u||_6^6`.
    pub l6: f64,
    /// Node maximum of `|u|`; exact for origin-peaked profiles since
    /// `s = 0` is a node.
    pub linf: f64,
    /// `||grad u||_2^2`.
    pub grad_sq: f64,
    /// `P(u) = Im int conj(u) grad u`; identically zero for radial fields.
    pub momentum: Vec<f64>,
}

fn abs_pow(field: &[Complex64], p: i32) -> Vec<f64> {
    field.iter().map(|u| u.norm_sqr().powi(p / 2)).collect()
}

/// `||u||_2^2` by radial quadrature.
pub fn mass(grid: &RadialGrid, field: &[Complex64]) -> Result<f64> {
    grid.radial_integral(&abs_pow(field, 2))
}

/// `||grad u||_2^2` via `4 s |du/ds|^2`.
pub fn gradient_sq(grid: &RadialGrid, field: &[Complex64]) -> Result<f64> {
    if field.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: field.len(),
        });
    }
    let re: Vec<f64> = field.iter().map(|u| u.re).collect();
    let im: Vec<f64> = field.iter().map(|u| u.im).collect();
    let dre = grid.derivative(&re)?;
    let dim = grid.derivative(&im)?;
    let integrand: Vec<f64> = (0..grid.n_nodes())
        .map(|i| 4.0 * grid.s_nodes[i] * (dre[i] * dre[i] + dim[i] * dim[i]))
        .collect();
    grid.radial_integral(&integrand)
}

/// `E(u) = 1/2 ||grad u||^2 - 1/2 ||u||_4^4 + 1/3 ||u||_6^6`.
pub fn energy(grid: &RadialGrid, field: &[Complex64]) -> Result<f64> {
    let g = gradient_sq(grid, field)?;
    let f4 = grid.radial_integral(&abs_pow(field, 4))?;
    let f6 = grid.radial_integral(&abs_pow(field, 6))?;
    Ok(0.5 * g - 0.5 * f4 + f6 / 3.0)
}

/// Action `S_omega(u) = E(u) + omega M(u)`.
pub fn action(grid: &RadialGrid, field: &[Complex64], omega: f64) -> Result<f64> {
    Ok(energy(grid, field)? + omega * mass(grid, field)?)
}

/// Momentum of a radial field.
///
/// The angular integration of `x/r` forces `P = 0` identically for any
/// radial field, so this returns exact zeros rather than integrating
/// round-off noise. It exists so conservation reports are complete.
pub fn momentum(grid: &RadialGrid, _field: &[Complex64]) -> Vec<f64> {
    vec![0.0; grid.d.value() as usize]
}

/// p-th power integral `||u||_p^p` for p in {2, 4, 6}.
pub fn lp_norm(grid: &RadialGrid, field: &[Complex64], p: u32) -> Result<f64> {
    match p {
        2 | 4 | 6 => grid.radial_integral(&abs_pow(field, p as i32)),
        other => Err(Error::UnsupportedExponent(other)),
    }
}

/// Node maximum of `|u|`.
pub fn linf(field: &[Complex64]) -> f64 {
    field.iter().map(|u| u.norm()).fold(0.0, f64::max)
}

impl Diagnostics {
    /// Compute the full diagnostic set of `field` at frequency `omega`.
    pub fn compute(grid: &RadialGrid, field: &[Complex64], omega: f64) -> Result<Self> {
        let mass_v = mass(grid, field)?;
        let grad_sq = gradient_sq(grid, field)?;
        let l4 = lp_norm(grid, field, 4)?;
        let l6 = lp_norm(grid, field, 6)?;
        let energy_v = 0.5 * grad_sq - 0.5 * l4 + l6 / 3.0;
        Ok(Diagnostics {
            mass: mass_v,
            energy: energy_v,
            action_omega: energy_v + omega * mass_v,
            l4,
            l6,
            linf: linf(field),
            grad_sq,
            momentum: momentum(grid, field),
        })
    }

    /// Same for a real-valued profile.
    pub fn compute_real(grid: &RadialGrid, values: &[f64], omega: f64) -> Result<Self> {
        let field: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::compute(grid, &field, omega)
    }
}

/// Convenience: complex view of a real profile.
pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, Dimension};
    use std::f64::consts::PI;

    fn gaussian_field(grid: &RadialGrid, a: f64, b: f64) -> Vec<Complex64> {
        grid.s_nodes
            .iter()
            .map(|&s| Complex64::new(a * (-b * s).exp(), 0.0))
            .collect()
    }

    #[test]
    fn zero_field_has_zero_diagnostics() {
        let g = build_grid(Dimension::Three, 32, 50.0).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); g.n_nodes()];
        let d = Diagnostics::compute(&g, &zero, 0.1).unwrap();
        assert_eq!(d.mass, 0.0);
        assert_eq!(d.energy, 0.0);
        assert_eq!(d.action_omega, 0.0);
        assert_eq!(d.linf, 0.0);
        assert_eq!(d.momentum, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn gaussian_mass_and_gradient_match_closed_forms() {
        // u = e^{-s/2} => |u|^2 = e^{-s}: mass = pi^{d/2};
        // |grad u|^2 = 4s * (1/4) e^{-s} = s e^{-s}:
        //   d=2: 2pi * (1/2) int_0^inf s e^{-s} ds = pi,
        //   d=3: 4pi/2 * int s^{3/2} e^{-s} ds = 2pi * Gamma(5/2) = 3 pi^{3/2} / 2.
        let g2 = build_grid(Dimension::Two, 200, 300.0).unwrap();
        let u2 = gaussian_field(&g2, 1.0, 0.5);
        assert!((mass(&g2, &u2).unwrap() - PI).abs() < 1e-12);
        assert!((gradient_sq(&g2, &u2).unwrap() - PI).abs() < 1e-10);

        let g3 = build_grid(Dimension::Three, 200, 300.0).unwrap();
        let u3 = gaussian_field(&g3, 1.0, 0.5);
        assert!((mass(&g3, &u3).unwrap() - PI.powf(1.5)).abs() < 1e-11);
        let exact = 1.5 * PI.powf(1.5);
        let got = gradient_sq(&g3, &u3).unwrap();
        assert!((got - exact).abs() / exact < 1e-10, "{got} vs {exact}");
    }

    #[test]
    fn action_composes_energy_and_mass() {
        let g = build_grid(Dimension::Two, 100, 100.0).unwrap();
        let u = gaussian_field(&g, 0.7, 0.3);
        let e = energy(&g, &u).unwrap();
        assert_eq!(action(&g, &u, 0.0).unwrap(), e);
        let m = mass(&g, &u).unwrap();
        let s = action(&g, &u, 0.05).unwrap();
        assert!((s - (e + 0.05 * m)).abs() < 1e-14);
    }

    #[test]
    fn lp_rejects_odd_exponents() {
        let g = build_grid(Dimension::Two, 16, 10.0).unwrap();
        let u = gaussian_field(&g, 1.0, 1.0);
        assert!(matches!(
            lp_norm(&g, &u, 3),
            Err(Error::UnsupportedExponent(3))
        ));
    }

    #[test]
    fn holder_inequality_on_gaussians() {
        // ||u||_4^4 <= ||u||_2 ||u||_6^3, i.e. l4 <= sqrt(mass) * sqrt(l6).
        for d in [Dimension::Two, Dimension::Three] {
            let g = build_grid(d, 128, 150.0).unwrap();
            let u = gaussian_field(&g, 1.3, 0.4);
            let m = mass(&g, &u).unwrap();
            let l4 = lp_norm(&g, &u, 4).unwrap();
            let l6 = lp_norm(&g, &u, 6).unwrap();
            assert!(l4 <= m.sqrt() * l6.sqrt() * (1.0 + 1e-8));
        }
    }

    #[test]
    fn complex_phase_leaves_norms_invariant() {
        let g = build_grid(Dimension::Three, 64, 80.0).unwrap();
        let u = gaussian_field(&g, 1.0, 0.6);
        let rotated: Vec<Complex64> = u
            .iter()
            .map(|&v| v * Complex64::from_polar(1.0, 0.9))
            .collect();
        let d0 = Diagnostics::compute(&g, &u, 0.1).unwrap();
        let d1 = Diagnostics::compute(&g, &rotated, 0.1).unwrap();
        assert!((d0.mass - d1.mass).abs() < 1e-13);
        assert!((d0.energy - d1.energy).abs() < 1e-13);
        assert!((d0.linf - d1.linf).abs() < 1e-13);
    }
}
