//! Ground-state profiles of the stationary cubic-quintic equation.
//!
//! In the mapped variable `s = r^2` the positive radial solution
//! `Q = Q_omega` of the stationary equation satisfies
//!
//! ```text
//! 2 s Q'' + d Q' - omega Q + Q^3 - alpha Q^5 = 0,      Q(s0) = 0,
//! ```
//!
//! where `alpha in [0, 1]` deforms the pure cubic problem (`alpha = 0`,
//! numerically known) into the full cubic-quintic one (`alpha = 1`). The
//! discrete system on the collocation grid is solved by a damped Newton
//! iteration; the Dirichlet condition is imposed by eliminating the row
//! and column of the `s = s0` node. Solutions are continued first in
//! `alpha` (tracing) and then in `omega` (branch walks).

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::observables::Diagnostics;
use crate::spectral::{Dimension, RadialGrid};

/// Solitary waves exist exactly for `0 < omega < 3/16`.
pub const OMEGA_MAX: f64 = 3.0 / 16.0;

/// Default absolute residual max-norm target.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 50;

/// Iterates whose max-norm falls below this are sliding into `Q = 0`;
/// genuine ground states in the admissible range all peak above 0.05.
const TRIVIAL_THRESHOLD: f64 = 1e-3;

/// Smallest admissible alpha-continuation step (1/320).
const MIN_ALPHA_STEP: f64 = 1.0 / 320.0;
/// Base omega-continuation step, pre-halved near the branch ends where
/// profiles change rapidly.
const OMEGA_STEP: f64 = 0.0025;
const MIN_OMEGA_STEP: f64 = 1e-5;

pub fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < OMEGA_MAX {
        Ok(())
    } else {
        Err(Error::OmegaOutOfRange(omega))
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// A converged real soliton profile on a grid.
#[derive(Debug, Clone)]
pub struct GroundStateProfile {
    pub d: Dimension,
    pub omega: f64,
    pub alpha: f64,
    pub grid: Arc<RadialGrid>,
    /// Samples `Q(s_n)` at all nodes; the `s = s0` entry is exactly zero.
    pub values: DVector<f64>,
    /// Max-norm of the discrete stationary residual at the interior nodes.
    pub residual_norm: f64,
    pub newton_iters: usize,
}

impl GroundStateProfile {
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn diagnostics(&self) -> Result<Diagnostics> {
        Diagnostics::compute_real(&self.grid, self.values.as_slice(), self.omega)
    }
}

/// One point of a ground-state branch.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BranchPoint {
    pub omega: f64,
    pub mass: f64,
    pub energy: f64,
    pub linf: f64,
    /// Identifier of the stored profile backing this point.
    pub profile_ref: String,
}

/// An ordered family of ground states at fixed dimension.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Branch {
    pub d: u32,
    /// Points with strictly increasing omega.
    pub points: Vec<BranchPoint>,
}

impl Branch {
    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass).collect()
    }

    pub fn linfs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.linf).collect()
    }
}

/// A branch together with its backing profiles and any continuation gaps.
#[derive(Debug, Clone)]
pub struct BranchLibrary {
    pub branch: Branch,
    pub profiles: BTreeMap<String, Arc<GroundStateProfile>>,
    /// Requested omegas that could not be reached by continuation.
    pub gaps: Vec<f64>,
}

impl BranchLibrary {
    pub fn profile(&self, point: &BranchPoint) -> Option<&Arc<GroundStateProfile>> {
        self.profiles.get(&point.profile_ref)
    }

    /// Profile whose omega is closest to the requested one.
    pub fn nearest_profile(&self, omega: f64) -> Option<&Arc<GroundStateProfile>> {
        self.branch
            .points
            .iter()
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
            .and_then(|p| self.profile(p))
    }
}

/// Full linear part `2 diag(s) D2 + d D` of the stationary operator.
fn linear_operator(grid: &RadialGrid) -> DMatrix<f64> {
    let n1 = grid.n_nodes();
    let mut op = grid.d2_s.clone();
    for i in 0..n1 {
        let row_scale = 2.0 * grid.s_nodes[i];
        for j in 0..n1 {
            op[(i, j)] = row_scale * op[(i, j)] + grid.d.as_f64() * grid.d_s[(i, j)];
        }
    }
    op
}

/// Discrete stationary residual at the interior nodes (the `s = s0` row is
/// eliminated by the Dirichlet condition; the `s = 0` node keeps its
/// equation since the `2s` coefficient vanishes there on its own).
pub fn stationary_residual(
    grid: &RadialGrid,
    q: &[f64],
    omega: f64,
    alpha: f64,
) -> Result<DVector<f64>> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    if q.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: q.len(),
        });
    }
    let op = linear_operator(grid);
    Ok(residual_with_operator(&op, q, omega, alpha))
}

fn residual_with_operator(op: &DMatrix<f64>, q: &[f64], omega: f64, alpha: f64) -> DVector<f64> {
    let qv = DVector::from_column_slice(q);
    let lin = op * &qv;
    let n = q.len() - 1;
    DVector::from_fn(n, |i, _| {
        let v = q[i + 1];
        lin[i + 1] - omega * v + v.powi(3) - alpha * v.powi(5)
    })
}

/// Jacobian of the reduced system:
/// `2 diag(s) D2 + d D - omega I + diag(3 Q^2 - 5 alpha Q^4)` with the
/// `s0` row and column eliminated.
pub fn stationary_jacobian(
    grid: &RadialGrid,
    q: &[f64],
    omega: f64,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    if q.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: q.len(),
        });
    }
    let op = linear_operator(grid);
    let n = grid.degree;
    let mut jac = op.view((1, 1), (n, n)).into_owned();
    for i in 0..n {
        let v = q[i + 1];
        jac[(i, i)] += -omega + 3.0 * v * v - 5.0 * alpha * v.powi(4);
    }
    Ok(jac)
}

/// Damped Newton iteration for the stationary equation.
///
/// `q0` must carry a zero Dirichlet value at `s0`. The step is halved (up
/// to 10 times, counted as one iteration) whenever it would increase the
/// residual max-norm.
pub fn newton_solve(
    grid: &Arc<RadialGrid>,
    q0: &[f64],
    omega: f64,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateProfile> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    if q0.len() != grid.n_nodes() {
        return Err(Error::ShapeMismatch {
            expected: grid.n_nodes(),
            got: q0.len(),
        });
    }

    let op = linear_operator(grid);
    let n = grid.degree;
    let op_reduced = op.view((1, 1), (n, n)).into_owned();

    let mut q = DVector::from_column_slice(q0);
    q[0] = 0.0;
    let mut res = residual_with_operator(&op, q.as_slice(), omega, alpha);
    let mut res_norm = res.abs().max();

    for iter in 0..max_iter {
        if res_norm <= tol {
            return Ok(GroundStateProfile {
                d: grid.d,
                omega,
                alpha,
                grid: Arc::clone(grid),
                values: q,
                residual_norm: res_norm,
                newton_iters: iter,
            });
        }

        let mut jac = op_reduced.clone();
        for i in 0..n {
            let v = q[i + 1];
            jac[(i, i)] += -omega + 3.0 * v * v - 5.0 * alpha * v.powi(4);
        }
        let delta = jac
            .lu()
            .solve(&res)
            .ok_or(Error::SingularJacobian { omega, alpha })?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=10 {
            let mut q_try = q.clone();
            for i in 0..n {
                q_try[i + 1] -= step * delta[i];
            }
            let res_try = residual_with_operator(&op, q_try.as_slice(), omega, alpha);
            let norm_try = res_try.abs().max();
            if norm_try <= res_norm {
                accepted = Some((q_try, res_try, norm_try));
                break;
            }
            step *= 0.5;
        }
        let Some((q_next, res_next, norm_next)) = accepted else {
            return Err(Error::NoConvergence {
                omega,
                alpha,
                iters: iter,
                residual: res_norm,
            });
        };
        q = q_next;
        res = res_next;
        res_norm = norm_next;

        if q.abs().max() < TRIVIAL_THRESHOLD {
            return Err(Error::TrivialCollapse { omega, alpha });
        }
    }

    if res_norm <= tol {
        return Ok(GroundStateProfile {
            d: grid.d,
            omega,
            alpha,
            grid: Arc::clone(grid),
            values: q,
            residual_norm: res_norm,
            newton_iters: max_iter,
        });
    }
    Err(Error::NoConvergence {
        omega,
        alpha,
        iters: max_iter,
        residual: res_norm,
    })
}

/// Gaussian initial iterate `a sqrt(omega) exp(-b omega s)` for the pure
/// cubic problem, with per-dimension `(a, b)` chosen so Newton converges
/// from it. The construction keeps the cubic scaling
/// `seed_omega(s) = sqrt(omega/omega') seed_omega'(s omega/omega')` exact.
pub fn cubic_seed(grid: &RadialGrid, omega: f64) -> DVector<f64> {
    let (a, b) = match grid.d {
        Dimension::Two => (2.2, 1.5),
        Dimension::Three => (4.3, 4.3),
    };
    let mut seed = grid
        .s_nodes
        .map(|s| a * omega.sqrt() * (-b * omega * s).exp());
    seed[0] = 0.0;
    seed
}

/// March the deformation parameter along `schedule` (starting at the pure
/// cubic problem), each converged profile seeding the next solve; halve
/// the alpha step on failure, down to 1/320.
pub fn trace_alpha(
    grid: &Arc<RadialGrid>,
    omega: f64,
    schedule: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateProfile> {
    assert!(
        schedule.len() >= 2
            && schedule[0] == 0.0
            && *schedule.last().unwrap() == 1.0
            && schedule.windows(2).all(|w| w[0] < w[1]),
        "alpha schedule must increase strictly from 0 to 1"
    );
    check_omega(omega)?;

    let seed = cubic_seed(grid, omega);
    let mut current = newton_solve(grid, seed.as_slice(), omega, 0.0, tol, max_iter)?;

    for &target in &schedule[1..] {
        while current.alpha < target {
            let mut step = target - current.alpha;
            loop {
                let attempt = newton_solve(
                    grid,
                    current.values.as_slice(),
                    omega,
                    current.alpha + step,
                    tol,
                    max_iter,
                );
                match attempt {
                    Ok(profile) => {
                        current = profile;
                        break;
                    }
                    Err(Error::NoConvergence { .. }) | Err(Error::TrivialCollapse { .. }) => {
                        step *= 0.5;
                        if step < MIN_ALPHA_STEP {
                            return Err(Error::AdaptiveFail {
                                omega,
                                alpha: current.alpha,
                            });
                        }
                    }
                    Err(other) => return Err(other),
                }
            }
        }
    }
    Ok(current)
}

/// Uniform alpha schedule with `steps` entries from 0 to 1.
pub fn uniform_alpha_schedule(steps: usize) -> Vec<f64> {
    assert!(steps >= 2);
    (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect()
}

fn base_omega_step(omega: f64) -> f64 {
    if !(0.01..=0.16).contains(&omega) {
        OMEGA_STEP / 2.0
    } else {
        OMEGA_STEP
    }
}

/// Walk outward from `seed` to every omega in `omega_list`, recording a
/// branch point per requested omega. Intermediate solves are inserted so
/// no single Newton hop exceeds the base continuation step; on failure the
/// hop is halved, and a target that stays unreachable is recorded as a gap
/// (the remaining targets in that direction are abandoned).
pub fn continue_branch(
    grid: &Arc<RadialGrid>,
    omega_list: &[f64],
    seed: &GroundStateProfile,
    tol: f64,
    max_iter: usize,
) -> Result<BranchLibrary> {
    assert!(
        omega_list.windows(2).all(|w| w[0] < w[1]),
        "omega list must be strictly increasing"
    );
    for &w in omega_list {
        check_omega(w)?;
    }

    let mut collected: Vec<(f64, Arc<GroundStateProfile>)> = Vec::new();
    let mut gaps = Vec::new();

    let upward: Vec<f64> = omega_list
        .iter()
        .copied()
        .filter(|&w| w >= seed.omega)
        .collect();
    let downward: Vec<f64> = omega_list
        .iter()
        .copied()
        .filter(|&w| w < seed.omega)
        .rev()
        .collect();

    for targets in [upward, downward] {
        let mut cursor = seed.clone();
        'target: for &target in &targets {
            while cursor.omega != target {
                let remaining = target - cursor.omega;
                let mut step = remaining
                    .abs()
                    .min(base_omega_step(cursor.omega.min(target)))
                    * remaining.signum();
                loop {
                    match newton_solve(
                        grid,
                        cursor.values.as_slice(),
                        cursor.omega + step,
                        cursor.alpha,
                        tol,
                        max_iter,
                    ) {
                        Ok(profile) => {
                            cursor = profile;
                            break;
                        }
                        Err(Error::NoConvergence { .. })
                        | Err(Error::TrivialCollapse { .. })
                        | Err(Error::SingularJacobian { .. }) => {
                            step *= 0.5;
                            if step.abs() < MIN_OMEGA_STEP {
                                gaps.push(target);
                                // Everything further out is unreachable too.
                                let rest = targets.iter().skip_while(|&&w| w != target).skip(1);
                                gaps.extend(rest);
                                break 'target;
                            }
                        }
                        Err(other) => return Err(other),
                    }
                }
            }
            collected.push((target, Arc::new(cursor.clone())));
        }
    }

    collected.sort_by(|a, b| a.0.total_cmp(&b.0));
    collected.dedup_by(|a, b| a.0 == b.0);
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();

    let mut points = Vec::with_capacity(collected.len());
    let mut profiles = BTreeMap::new();
    for (idx, (omega, profile)) in collected.into_iter().enumerate() {
        let diag = profile.diagnostics()?;
        let profile_ref = format!("Q{:03}_d{}_omega{:.6}", idx, grid.d, omega);
        points.push(BranchPoint {
            omega,
            mass: diag.mass,
            energy: diag.energy,
            linf: diag.linf,
            profile_ref: profile_ref.clone(),
        });
        profiles.insert(profile_ref, profile);
    }

    Ok(BranchLibrary {
        branch: Branch {
            d: grid.d.value(),
            points,
        },
        profiles,
        gaps,
    })
}

/// Normalized residuals of the two integral identities every solitary
/// wave satisfies:
///
/// ```text
/// r1 = 1/2 ||grad Q||^2 - ||Q||_4^4 + ||Q||_6^6 + omega ||Q||_2^2,
/// r2 = (d-2)/2 ||grad Q||^2 - d/2 ||Q||_4^4 + d/3 ||Q||_6^6 + omega d ||Q||_2^2,
/// ```
///
/// each divided by its largest constituent term. Defined for the
/// undeformed equation only (`alpha = 1`).
pub fn pohozaev_residuals(profile: &GroundStateProfile) -> Result<(f64, f64)> {
    if profile.alpha != 1.0 {
        return Err(Error::AlphaOutOfRange(profile.alpha));
    }
    let diag = profile.diagnostics()?;
    let d = profile.d.as_f64();
    let (g, f4, f6, m) = (diag.grad_sq, diag.l4, diag.l6, diag.mass);
    let omega = profile.omega;

    let normalize = |terms: [f64; 4]| -> f64 {
        let sum: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        if scale < 1e-300 {
            0.0
        } else {
            sum / scale
        }
    };

    let r1 = normalize([0.5 * g, -f4, f6, omega * m]);
    let r2 = normalize([
        (d - 2.0) / 2.0 * g,
        -d / 2.0 * f4,
        d / 3.0 * f6,
        omega * d * m,
    ]);
    Ok((r1, r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Minimum,
    Maximum,
}

/// Location of an interior extremum of `values(omega)` along a branch,
/// refined by the quadratic through the three bracketing points.
pub fn interior_extremum(omegas: &[f64], values: &[f64], kind: Extremum) -> Result<f64> {
    assert_eq!(omegas.len(), values.len());
    if omegas.len() < 5 {
        return Err(Error::NoInteriorExtremum);
    }
    let better = |a: f64, b: f64| match kind {
        Extremum::Minimum => a < b,
        Extremum::Maximum => a > b,
    };
    let mut best: Option<usize> = None;
    for i in 1..omegas.len() - 1 {
        if better(values[i], values[i - 1]) && !better(values[i + 1], values[i]) {
            best = Some(i);
            break;
        }
    }
    let Some(i) = best else {
        return Err(Error::NoInteriorExtremum);
    };

    let (x1, x2, x3) = (omegas[i - 1], omegas[i], omegas[i + 1]);
    let (y1, y2, y3) = (values[i - 1], values[i], values[i + 1]);
    let d1 = (y2 - y1) / (x2 - x1);
    let d2 = (y3 - y2) / (x3 - x2);
    let a = (d2 - d1) / (x3 - x1);
    if a.abs() < 1e-300 {
        return Ok(x2);
    }
    let b = d1 - a * (x1 + x2);
    let vertex = -b / (2.0 * a);
    if vertex < x1 || vertex > x3 {
        return Ok(x2);
    }
    Ok(vertex)
}

/// Frequency at which the branch mass attains its interior minimum.
///
/// Errors with [`Error::NoInteriorExtremum`] when the mass is monotone
/// over the branch, as it is in 2D.
pub fn find_critical_omega(branch: &Branch) -> Result<f64> {
    interior_extremum(&branch.omegas(), &branch.masses(), Extremum::Minimum)
}
