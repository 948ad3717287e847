//! Perturbed-soliton experiments: build initial data, evolve, classify
//! the outcome, and match final states against a ground-state branch.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig, Trajectory, WaveField};
use crate::groundstate::{
    self, find_critical_omega, newton_solve, Branch, BranchLibrary, GroundStateProfile,
};

use crate::spectral::{build_shared_grid, Dimension};

/// How the unperturbed profile is disturbed at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    /// `u0 = lambda Q`.
    Multiplicative { lambda: f64 },
    /// `u0 = Q ± lambda exp(-(r - r0)^2 / width^2)`.
    AdditiveGaussian {
        positive: bool,
        lambda: f64,
        center: f64,
        width: f64,
    },
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PerturbationSpec::Multiplicative { lambda } => lambda > 0.0,
            PerturbationSpec::AdditiveGaussian {
                lambda,
                center,
                width,
                ..
            } => lambda > 0.0 && center >= 0.0 && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPerturbation(self.to_string()))
        }
    }
}

impl std::fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            PerturbationSpec::Multiplicative { lambda } => write!(f, "mult:{lambda}"),
            PerturbationSpec::AdditiveGaussian {
                positive,
                lambda,
                center,
                width,
            } => {
                let sign = if positive { '+' } else { '-' };
                write!(f, "gauss:{sign}:{lambda}:{center}:{width}")
            }
        }
    }
}

impl FromStr for PerturbationSpec {
    type Err = Error;

    /// Grammar: `mult:LAMBDA` | `gauss:SIGN:LAMBDA[:R0[:WIDTH]]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPerturbation(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["mult", lam] => PerturbationSpec::Multiplicative {
                lambda: lam.parse().map_err(|_| bad())?,
            },
            ["gauss", sign, rest @ ..] if !rest.is_empty() && rest.len() <= 3 => {
                let positive = match *sign {
                    "+" => true,
                    "-" => false,
                    _ => return Err(bad()),
                };
                let lambda: f64 = rest[0].parse().map_err(|_| bad())?;
                let center: f64 = match rest.get(1) {
                    Some(v) => v.parse().map_err(|_| bad())?,
                    None => 0.0,
                };
                let width: f64 = match rest.get(2) {
                    Some(v) => v.parse().map_err(|_| bad())?,
                    None => 1.0,
                };
                PerturbationSpec::AdditiveGaussian {
                    positive,
                    lambda,
                    center,
                    width,
                }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sample the perturbed initial state on the profile's grid.
pub fn build_initial(profile: &GroundStateProfile, spec: &PerturbationSpec) -> Result<WaveField> {
    spec.validate()?;
    let grid = &profile.grid;
    let mut values: Vec<Complex64> = match *spec {
        PerturbationSpec::Multiplicative { lambda } => profile
            .values
            .iter()
            .map(|&q| Complex64::new(lambda * q, 0.0))
            .collect(),
        PerturbationSpec::AdditiveGaussian {
            positive,
            lambda,
            center,
            width,
        } => {
            let sign = if positive { 1.0 } else { -1.0 };
            grid.s_nodes
                .iter()
                .zip(profile.values.iter())
                .map(|(&s, &q)| {
                    let r = s.sqrt();
                    let bump = lambda * (-((r - center) / width).powi(2)).exp();
                    Complex64::new(q + sign * bump, 0.0)
                })
                .collect()
        }
    };
    values[0] = Complex64::new(0.0, 0.0);
    WaveField::new(Arc::clone(grid), nalgebra::DVector::from_vec(values), 0.0)
}

/// Detection thresholds; configuration rather than constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Dispersive when the final max-norm falls below this fraction of the
    /// initial one ...
    pub dispersion_drop: f64,
    /// ... with no rebound above this fraction in the trailing window.
    pub dispersion_rebound: f64,
    /// Stable when the trailing max-norm stays within this relative band
    /// around the unperturbed profile's max-norm.
    pub stable_band: f64,
    /// Settled when the oscillation amplitude over the settle window is
    /// below this fraction of its mean.
    pub settle_oscillation: f64,
    /// Fraction of records forming the trailing window used by the
    /// dispersion-rebound and stability checks.
    pub trailing_fraction: f64,
    /// Fraction of records forming the settle window; shorter than the
    /// trailing window so a decaying approach trend does not read as
    /// oscillation.
    pub settle_fraction: f64,
    /// A settled state must sit at least this far from the initial omega.
    pub min_omega_shift: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            dispersion_drop: 0.2,
            dispersion_rebound: 0.3,
            stable_band: 0.01,
            settle_oscillation: 0.05,
            trailing_fraction: 0.2,
            settle_fraction: 0.1,
            min_omega_shift: 0.005,
        }
    }
}

/// The unperturbed state a run is measured against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceState {
    pub omega: f64,
    pub linf: f64,
}

/// Trailing-window statistics backing a verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evidence {
    pub initial_linf: f64,
    pub final_linf: f64,
    pub reference_linf: f64,
    pub trailing_mean_linf: f64,
    pub trailing_oscillation: f64,
    pub trailing_records: usize,
    pub settle_mean_linf: f64,
    pub settle_oscillation: f64,
    pub settle_records: usize,
    /// Max-norm-matched branch frequency, when a match was attempted.
    pub omega_hat_linf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Dispersive,
    Settled {
        omega_hat: f64,
        match_residual: f64,
        mass_radiated: f64,
    },
    Undecided,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Stable => VerdictKind::Stable,
            Verdict::Dispersive => VerdictKind::Dispersive,
            Verdict::Settled { .. } => VerdictKind::Settled,
            Verdict::Undecided => VerdictKind::Undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Stable,
    Dispersive,
    Settled,
    Undecided,
}

impl FromStr for VerdictKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stable" => Ok(VerdictKind::Stable),
            "dispersive" => Ok(VerdictKind::Dispersive),
            "settled" => Ok(VerdictKind::Settled),
            "undecided" => Ok(VerdictKind::Undecided),
            _ => Err(Error::InvalidPerturbation(format!("unknown verdict `{s}`"))),
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictKind::Stable => "stable",
            VerdictKind::Dispersive => "dispersive",
            VerdictKind::Settled => "settled",
            VerdictKind::Undecided => "undecided",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Result of matching a field's modulus against a branch.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MatchResult {
    /// L2-matched frequency, refined by a local quadratic fit.
    pub omega_hat: f64,
    /// Attained relative L2 distance at the best branch point.
    pub match_residual: f64,
    /// Max-norm-matched frequency (reported as evidence).
    pub omega_hat_linf: f64,
}

fn modulus_on_profile_grid(field: &WaveField, profile: &GroundStateProfile) -> Result<Vec<f64>> {
    let modulus: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
    profile
        .grid
        .s_nodes
        .iter()
        .map(|&s| {
            if s > field.grid.s0 {
                Ok(0.0)
            } else {
                field.grid.interpolate(&modulus, s)
            }
        })
        .collect()
}

/// Squared relative L2 distance between `|u|` and the profile, evaluated
/// with the profile grid's radial quadrature.
fn profile_distance_sq(field: &WaveField, profile: &GroundStateProfile) -> Result<f64> {
    let sampled = modulus_on_profile_grid(field, profile)?;
    let diff_sq: Vec<f64> = sampled
        .iter()
        .zip(profile.values.iter())
        .map(|(u, q)| (u - q) * (u - q))
        .collect();
    let q_sq: Vec<f64> = profile.values.iter().map(|q| q * q).collect();
    let num = profile.grid.radial_integral(&diff_sq)?;
    let den = profile.grid.radial_integral(&q_sq)?;
    Ok(num / den)
}

/// Match `|u|` against every profile of the branch; the minimizer over the
/// weighted L2 distance defines `omega_hat`, refined by the quadratic
/// through the three bracketing points. The max-norm match is reported
/// alongside as evidence.
pub fn match_final_state(field: &WaveField, library: &BranchLibrary) -> Result<MatchResult> {
    let points = &library.branch.points;
    if points.is_empty() {
        return Err(Error::EmptyBranch);
    }
    let mut dist2 = Vec::with_capacity(points.len());
    for point in points {
        let profile = library.profile(point).ok_or_else(|| {
            Error::MalformedRecord(format!("missing profile {}", point.profile_ref))
        })?;
        dist2.push(profile_distance_sq(field, profile)?);
    }
    let best = dist2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();

    let omega_hat = if dist2[best] < 1e-20 || best == 0 || best == points.len() - 1 {
        points[best].omega
    } else {
        let omegas = [
            points[best - 1].omega,
            points[best].omega,
            points[best + 1].omega,
        ];
        let vals = [dist2[best - 1], dist2[best], dist2[best + 1]];
        quadratic_vertex(&omegas, &vals).unwrap_or(points[best].omega)
    };

    // Max-norm match: nearest crossing of linf(omega) through max|u|.
    let target = field.linf();
    let linfs = library.branch.linfs();
    let omegas = library.branch.omegas();
    let mut best_linf = points[0].omega;
    let mut best_gap = f64::INFINITY;
    for i in 0..points.len() {
        let gap = (linfs[i] - target).abs();
        if gap < best_gap {
            best_gap = gap;
            best_linf = omegas[i];
        }
    }
    for i in 0..points.len() - 1 {
        let (a, b) = (linfs[i] - target, linfs[i + 1] - target);
        if a == 0.0 {
            continue;
        }
        if a * b < 0.0 {
            let t = a / (a - b);
            let crossing = omegas[i] + t * (omegas[i + 1] - omegas[i]);
            if (crossing - omega_hat).abs() < (best_linf - omega_hat).abs() {
                best_linf = crossing;
            }
        }
    }

    Ok(MatchResult {
        omega_hat,
        match_residual: dist2[best].sqrt(),
        omega_hat_linf: best_linf,
    })
}

/// Frequency whose branch max-norm equals `level`: the crossing of the
/// (possibly non-monotone) `linf(omega)` curve closest to `anchor`, or
/// the closest branch point when the level never crosses.
fn linf_level_to_omega(branch: &Branch, level: f64, anchor: f64) -> f64 {
    let omegas = branch.omegas();
    let linfs = branch.linfs();
    let mut best = omegas[0];
    let mut best_key = (f64::INFINITY, f64::INFINITY);
    for i in 0..omegas.len() {
        let key = ((linfs[i] - level).abs(), (omegas[i] - anchor).abs());
        if key < best_key {
            best_key = key;
            best = omegas[i];
        }
    }
    let mut best_crossing: Option<f64> = None;
    for i in 0..omegas.len() - 1 {
        let (a, b) = (linfs[i] - level, linfs[i + 1] - level);
        if a == 0.0 {
            continue;
        }
        if a * b < 0.0 {
            let t = a / (a - b);
            let crossing = omegas[i] + t * (omegas[i + 1] - omegas[i]);
            let better = best_crossing
                .map(|c| (crossing - anchor).abs() < (c - anchor).abs())
                .unwrap_or(true);
            if better {
                best_crossing = Some(crossing);
            }
        }
    }
    best_crossing.unwrap_or(best)
}

fn quadratic_vertex(x: &[f64; 3], y: &[f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a.abs() < 1e-300 {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let v = -b / (2.0 * a);
    (v >= x[0] && v <= x[2]).then_some(v)
}

/// Mass of `|u|` restricted to the bulk region `s <= s_bulk`, where
/// `s_bulk` is where the matched profile falls below `1e-6` of its peak.
fn bulk_mass(field: &WaveField, matched: &GroundStateProfile) -> Result<f64> {
    let threshold = 1e-6 * matched.linf();
    let mut s_bulk = matched.grid.s0;
    for (i, &q) in matched.values.iter().enumerate() {
        if q >= threshold {
            s_bulk = matched.grid.s_nodes[i];
            break;
        }
    }
    let restricted: Vec<f64> = field
        .grid
        .s_nodes
        .iter()
        .zip(field.values.iter())
        .map(|(&s, v)| if s <= s_bulk { v.norm_sqr() } else { 0.0 })
        .collect();
    field.grid.radial_integral(&restricted)
}

/// Classify a completed trajectory as stable / dispersive / settled, with
/// `Undecided` as the fallback (never an error).
pub fn classify(
    trajectory: &Trajectory,
    library: &BranchLibrary,
    reference: &ReferenceState,
    config: &ClassifierConfig,
) -> Result<Outcome> {
    let linf = &trajectory.linf_series;
    assert!(linf.len() >= 2, "trajectory must hold at least two records");
    let initial = linf[0];
    let final_linf = *linf.last().unwrap();
    let window_stats = |fraction: f64| {
        let window = ((linf.len() as f64 * fraction).ceil() as usize).clamp(2, linf.len());
        let slice = &linf[linf.len() - window..];
        let hi = slice.iter().copied().fold(f64::MIN, f64::max);
        let lo = slice.iter().copied().fold(f64::MAX, f64::min);
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        (window, mean, (hi - lo) / 2.0, hi)
    };
    let (window, t_mean, oscillation, t_max) = window_stats(config.trailing_fraction);
    let (s_window, s_mean, s_osc, _) = window_stats(config.settle_fraction);
    let trailing = &linf[linf.len() - window..];

    let mut evidence = Evidence {
        initial_linf: initial,
        final_linf,
        reference_linf: reference.linf,
        trailing_mean_linf: t_mean,
        trailing_oscillation: oscillation,
        trailing_records: window,
        settle_mean_linf: s_mean,
        settle_oscillation: s_osc,
        settle_records: s_window,
        omega_hat_linf: None,
    };

    // Dispersive: the max-norm collapsed and stayed down.
    if final_linf < config.dispersion_drop * initial && t_max < config.dispersion_rebound * initial
    {
        return Ok(Outcome {
            verdict: Verdict::Dispersive,
            evidence,
        });
    }

    // Stable: trailing window pinned to the unperturbed profile.
    let band = config.stable_band * reference.linf;
    if trailing.iter().all(|&x| (x - reference.linf).abs() <= band) {
        return Ok(Outcome {
            verdict: Verdict::Stable,
            evidence,
        });
    }

    // Settled: small oscillation over the settle window around a level
    // inside the branch's max-norm range, away from the initial omega and
    // on the stable side of the mass minimum. The settled frequency is
    // read off the settle-window mean of the max-norm (a ringing final
    // state sweeps the instantaneous profile back and forth, so matching
    // the last snapshot alone would be sensitive to the ring phase); the
    // final-field match supplies the residual and disambiguates between
    // multiple crossings of the branch's max-norm curve.
    let linfs = library.branch.linfs();
    if !linfs.is_empty() {
        let lo = linfs.iter().copied().fold(f64::MAX, f64::min);
        let hi = linfs.iter().copied().fold(f64::MIN, f64::max);
        if s_osc < config.settle_oscillation * s_mean && s_mean >= lo && s_mean <= hi {
            let matched = match_final_state(&trajectory.final_field, library)?;
            evidence.omega_hat_linf = Some(matched.omega_hat_linf);
            let omega_hat =
                linf_level_to_omega(&library.branch, s_mean, matched.omega_hat);
            let shifted = (omega_hat - reference.omega).abs() > config.min_omega_shift;
            let stable_side = match find_critical_omega(&library.branch) {
                Ok(omega_crit) => omega_hat > omega_crit,
                Err(Error::NoInteriorExtremum) => true,
                Err(e) => return Err(e),
            };
            if shifted && stable_side {
                let nearest = library
                    .nearest_profile(omega_hat)
                    .ok_or(Error::EmptyBranch)?;
                let bulk = bulk_mass(&trajectory.final_field, nearest)?;
                let mass_radiated = trajectory.mass_series[0] - bulk;
                return Ok(Outcome {
                    verdict: Verdict::Settled {
                        omega_hat,
                        match_residual: matched.match_residual,
                        mass_radiated,
                    },
                    evidence,
                });
            }
        }
    }

    Ok(Outcome {
        verdict: Verdict::Undecided,
        evidence,
    })
}

/// Everything needed to reproduce one perturbation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub label: String,
    pub d: u32,
    pub omega: f64,
    pub perturbation: PerturbationSpec,
    pub t_final: f64,
    pub n_steps: usize,
    pub grid_degree: usize,
    pub s0: f64,
    pub record_stride: usize,
    pub expected: Option<VerdictKind>,
}

/// Structured result of one scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub params: ScenarioParams,
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// Final-time max-norm distance between `|u|` and the unperturbed
    /// profile on the run grid.
    pub final_profile_deviation: f64,
    pub max_delta_e: f64,
    /// Filled by the persistence layer when series are written out.
    pub trajectory_csv: Option<String>,
    pub final_field_file: Option<String>,
}

pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub trajectory: Trajectory,
    pub profile: GroundStateProfile,
}

/// Solve (or re-solve) the unperturbed profile on the run grid, seeding
/// Newton with the nearest library profile interpolated onto it.
pub fn profile_on_grid(
    params: &ScenarioParams,
    library: &BranchLibrary,
) -> Result<GroundStateProfile> {
    let d = Dimension::new(params.d)?;
    let grid = build_shared_grid(d, params.grid_degree, params.s0)?;
    let nearest = library
        .nearest_profile(params.omega)
        .ok_or(Error::EmptyBranch)?;
    if nearest.omega == params.omega && Arc::ptr_eq(&nearest.grid, &grid) {
        return Ok(nearest.as_ref().clone());
    }
    let seed: Vec<f64> = grid
        .s_nodes
        .iter()
        .map(|&s| {
            if s > nearest.grid.s0 {
                Ok(0.0)
            } else {
                nearest.grid.interpolate(nearest.values.as_slice(), s)
            }
        })
        .collect::<Result<_>>()?;
    // Walk in omega from the library anchor if the direct solve misses.
    match newton_solve(
        &grid,
        &seed,
        params.omega,
        1.0,
        groundstate::DEFAULT_TOL,
        groundstate::DEFAULT_MAX_ITER,
    ) {
        Ok(p) => Ok(p),
        Err(Error::NoConvergence { .. }) | Err(Error::TrivialCollapse { .. }) => {
            let anchor = newton_solve(
                &grid,
                &seed,
                nearest.omega,
                1.0,
                groundstate::DEFAULT_TOL,
                groundstate::DEFAULT_MAX_ITER,
            )?;
            let lib = groundstate::continue_branch(
                &grid,
                &[params.omega],
                &anchor,
                groundstate::DEFAULT_TOL,
                groundstate::DEFAULT_MAX_ITER,
            )?;
            let point = &lib.branch.points[0];
            if !lib.gaps.is_empty() {
                return Err(Error::BranchGap(lib.gaps));
            }
            Ok(lib
                .profile(point)
                .ok_or(Error::EmptyBranch)?
                .as_ref()
                .clone())
        }
        Err(e) => Err(e),
    }
}

/// Build initial data, evolve, classify, and assemble the report.
pub fn run_scenario(params: &ScenarioParams, library: &BranchLibrary) -> Result<ScenarioRun> {
    params.perturbation.validate()?;
    groundstate::check_omega(params.omega)?;

    let profile = profile_on_grid(params, library)?;
    let u0 = build_initial(&profile, &params.perturbation)?;

    let mut config = EvolutionConfig::new(params.t_final, params.n_steps);
    config.record_stride = params.record_stride.max(1);
    let trajectory = evolve(&u0, &config)?;

    let reference = ReferenceState {
        omega: params.omega,
        linf: profile.linf(),
    };
    let outcome = classify(
        &trajectory,
        library,
        &reference,
        &ClassifierConfig::default(),
    )?;

    let final_profile_deviation = trajectory
        .final_field
        .values
        .iter()
        .zip(profile.values.iter())
        .map(|(u, q)| (u.norm() - q).abs())
        .fold(0.0, f64::max);

    let report = ScenarioReport {
        params: params.clone(),
        verdict: outcome.verdict,
        evidence: outcome.evidence,
        mass_initial: trajectory.mass_series[0],
        mass_final: *trajectory.mass_series.last().unwrap(),
        final_profile_deviation,
        max_delta_e: trajectory.max_delta_e(),
        trajectory_csv: None,
        final_field_file: None,
    };

    Ok(ScenarioRun {
        report,
        trajectory,
        profile,
    })
}

/// A named suite from the experiment registry.
pub struct ScenarioSuite {
    pub name: &'static str,
    pub runs: Vec<ScenarioParams>,
}

#[allow(clippy::too_many_arguments)]
fn params(
    label: &str,
    d: u32,
    omega: f64,
    perturbation: PerturbationSpec,
    t_final: f64,
    n_steps: usize,
    grid_degree: usize,
    s0: f64,
    expected: VerdictKind,
) -> ScenarioParams {
    ScenarioParams {
        label: label.to_string(),
        d,
        omega,
        perturbation,
        t_final,
        n_steps,
        grid_degree,
        s0,
        record_stride: (n_steps / 2000).max(1),
        expected: Some(expected),
    }
}

fn mult(lambda: f64) -> PerturbationSpec {
    PerturbationSpec::Multiplicative { lambda }
}

fn gauss(positive: bool, lambda: f64, center: f64) -> PerturbationSpec {
    PerturbationSpec::AdditiveGaussian {
        positive,
        lambda,
        center,
        width: 1.0,
    }
}

/// Built-in parameter sets covering the reference perturbation runs.
pub fn scenario_registry() -> Vec<ScenarioSuite> {
    use VerdictKind::*;
    vec![
        ScenarioSuite {
            name: "2d-stable-down",
            runs: vec![params(
                "2d-stable-down",
                2,
                0.1,
                mult(0.99),
                20.0,
                10_000,
                300,
                1e3,
                Stable,
            )],
        },
        ScenarioSuite {
            name: "2d-stable-up",
            runs: vec![params(
                "2d-stable-up",
                2,
                0.1,
                mult(1.001),
                20.0,
                10_000,
                300,
                1e3,
                Stable,
            )],
        },
        ScenarioSuite {
            name: "2d-gauss-pm",
            runs: vec![
                params(
                    "2d-gauss-plus",
                    2,
                    0.1,
                    gauss(true, 0.001, 0.0),
                    20.0,
                    10_000,
                    300,
                    1e3,
                    Stable,
                ),
                params(
                    "2d-gauss-minus",
                    2,
                    0.1,
                    gauss(false, 0.001, 0.0),
                    20.0,
                    10_000,
                    300,
                    1e3,
                    Stable,
                ),
            ],
        },
        ScenarioSuite {
            name: "2d-slow-0.05",
            runs: vec![
                params(
                    "2d-slow-plus",
                    2,
                    0.05,
                    gauss(true, 0.001, 0.0),
                    400.0,
                    100_000,
                    300,
                    1e3,
                    Undecided,
                ),
                params(
                    "2d-slow-minus",
                    2,
                    0.05,
                    gauss(false, 0.001, 0.0),
                    400.0,
                    100_000,
                    300,
                    1e3,
                    Undecided,
                ),
            ],
        },
        ScenarioSuite {
            name: "3d-stable-down",
            runs: vec![params(
                "3d-stable-down",
                3,
                0.1,
                mult(0.99),
                20.0,
                13_334,
                300,
                1e3,
                Stable,
            )],
        },
        ScenarioSuite {
            name: "3d-stable-up",
            runs: vec![params(
                "3d-stable-up",
                3,
                0.1,
                mult(1.001),
                20.0,
                13_334,
                300,
                1e3,
                Stable,
            )],
        },
        ScenarioSuite {
            name: "3d-unstable-down",
            runs: vec![params(
                "3d-unstable-down",
                3,
                0.01,
                mult(0.999),
                300.0,
                60_000,
                400,
                1e4,
                Dispersive,
            )],
        },
        ScenarioSuite {
            name: "3d-unstable-up",
            runs: vec![params(
                "3d-unstable-up",
                3,
                0.01,
                mult(1.001),
                500.0,
                100_000,
                400,
                1e4,
                Settled,
            )],
        },
        ScenarioSuite {
            name: "3d-gauss-suite",
            runs: vec![
                params(
                    "3d-gauss-minus-r0",
                    3,
                    0.01,
                    gauss(false, 0.001, 0.0),
                    500.0,
                    100_000,
                    400,
                    1e4,
                    Dispersive,
                ),
                params(
                    "3d-gauss-minus-r1",
                    3,
                    0.01,
                    gauss(false, 0.001, 1.0),
                    500.0,
                    100_000,
                    400,
                    1e4,
                    Dispersive,
                ),
                params(
                    "3d-gauss-plus-r1",
                    3,
                    0.01,
                    gauss(true, 0.001, 1.0),
                    600.0,
                    120_000,
                    400,
                    1e4,
                    Settled,
                ),
            ],
        },
        ScenarioSuite {
            name: "3d-omega-0.007",
            runs: vec![params(
                "3d-omega-0.007",
                3,
                0.007,
                gauss(true, 0.001, 0.0),
                500.0,
                100_000,
                400,
                1e4,
                Settled,
            )],
        },
    ]
}

pub fn find_scenario(name: &str) -> Option<ScenarioSuite> {
    scenario_registry().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{Branch, BranchPoint};
    use crate::observables;
    use crate::spectral::RadialGrid;
    use std::collections::BTreeMap;

    fn spec_roundtrip(s: &str) -> PerturbationSpec {
        let spec: PerturbationSpec = s.parse().unwrap();
        let again: PerturbationSpec = spec.to_string().parse().unwrap();
        assert_eq!(spec, again);
        spec
    }

    #[test]
    fn perturbation_grammar() {
        assert_eq!(
            spec_roundtrip("mult:0.99"),
            PerturbationSpec::Multiplicative { lambda: 0.99 }
        );
        assert_eq!(
            spec_roundtrip("gauss:-:0.001"),
            PerturbationSpec::AdditiveGaussian {
                positive: false,
                lambda: 0.001,
                center: 0.0,
                width: 1.0
            }
        );
        assert_eq!(
            spec_roundtrip("gauss:+:0.001:1"),
            PerturbationSpec::AdditiveGaussian {
                positive: true,
                lambda: 0.001,
                center: 1.0,
                width: 1.0
            }
        );
        assert_eq!(
            spec_roundtrip("gauss:+:0.01:2:0.5"),
            PerturbationSpec::AdditiveGaussian {
                positive: true,
                lambda: 0.01,
                center: 2.0,
                width: 0.5
            }
        );
        assert!("mult:-1".parse::<PerturbationSpec>().is_err());
        assert!("gauss:0.001".parse::<PerturbationSpec>().is_err());
        assert!("bogus:1".parse::<PerturbationSpec>().is_err());
    }

    fn toy_profile(omega: f64, scale: f64) -> GroundStateProfile {
        let grid = crate::spectral::build_shared_grid(Dimension::Three, 64, 100.0).unwrap();
        let mut values = grid.s_nodes.map(|s| scale * (-0.3 * s).exp());
        values[0] = 0.0;
        GroundStateProfile {
            d: Dimension::Three,
            omega,
            alpha: 1.0,
            grid,
            values,
            residual_norm: 0.0,
            newton_iters: 0,
        }
    }

    fn toy_library(omegas: &[f64]) -> BranchLibrary {
        let mut points = Vec::new();
        let mut profiles = BTreeMap::new();
        for (i, &omega) in omegas.iter().enumerate() {
            let profile = toy_profile(omega, 0.2 + omega);
            let diag = profile.diagnostics().unwrap();
            let r = format!("p{i}");
            points.push(BranchPoint {
                omega,
                mass: diag.mass,
                energy: diag.energy,
                linf: diag.linf,
                profile_ref: r.clone(),
            });
            profiles.insert(r, Arc::new(profile));
        }
        BranchLibrary {
            branch: Branch { d: 3, points },
            profiles,
            gaps: vec![],
        }
    }

    #[test]
    fn multiplicative_identity_and_mass_scaling() {
        let profile = toy_profile(0.1, 0.4);
        let u = build_initial(&profile, &mult(1.0)).unwrap();
        for (a, b) in u.values.iter().zip(profile.values.iter()) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }

        let u99 = build_initial(&profile, &mult(0.99)).unwrap();
        let m_ref = observables::mass(&profile.grid, u.values.as_slice()).unwrap();
        let m_99 = observables::mass(&profile.grid, u99.values.as_slice()).unwrap();
        assert!((m_99 / m_ref - 0.99f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn negative_gaussian_lowers_mass() {
        let profile = toy_profile(0.1, 0.4);
        let u_minus = build_initial(&profile, &gauss(false, 0.001, 0.0)).unwrap();
        let m0 = profile.diagnostics().unwrap().mass;
        let m = observables::mass(&profile.grid, u_minus.values.as_slice()).unwrap();
        assert!(m < m0);
    }

    #[test]
    fn self_match_recovers_the_branch_point() {
        let lib = toy_library(&[0.03, 0.04, 0.05, 0.06, 0.07]);
        let point = &lib.branch.points[2];
        let profile = lib.profile(point).unwrap();
        let field = WaveField::from_real(Arc::clone(&profile.grid), profile.values.as_slice(), 0.0)
            .unwrap();
        let m = match_final_state(&field, &lib).unwrap();
        assert_eq!(m.omega_hat, 0.05);
        assert!(
            m.match_residual <= 1e-10,
            "residual {:.3e}",
            m.match_residual
        );
    }

    #[test]
    fn empty_branch_is_an_error() {
        let lib = BranchLibrary {
            branch: Branch {
                d: 3,
                points: vec![],
            },
            profiles: BTreeMap::new(),
            gaps: vec![],
        };
        let profile = toy_profile(0.1, 0.3);
        let field = WaveField::from_real(Arc::clone(&profile.grid), profile.values.as_slice(), 0.0)
            .unwrap();
        assert!(matches!(
            match_final_state(&field, &lib),
            Err(Error::EmptyBranch)
        ));
    }

    fn synthetic_trajectory(
        grid: &Arc<RadialGrid>,
        linf_series: Vec<f64>,
        final_scale: f64,
    ) -> Trajectory {
        let n = linf_series.len();
        let values = grid
            .s_nodes
            .map(|s| num_complex::Complex64::new(final_scale * (-0.3 * s).exp(), 0.0));
        let final_field = WaveField::new(Arc::clone(grid), values, 1.0).unwrap();
        Trajectory {
            times: (0..n).map(|i| i as f64).collect(),
            mass_series: vec![1.0; n],
            energy_series: vec![0.5; n],
            delta_e_series: vec![0.0; n],
            linf_series,
            snapshots: vec![],
            final_field,
            delta_e_warning: false,
        }
    }

    #[test]
    fn classifier_detects_the_three_regimes() {
        let lib = toy_library(&[0.03, 0.04, 0.05, 0.06, 0.07]);
        let grid = lib.profiles.values().next().unwrap().grid.clone();
        let config = ClassifierConfig::default();

        // Collapsing max-norm: dispersive.
        let series: Vec<f64> = (0..100).map(|i| 0.4 * (-0.05 * i as f64).exp()).collect();
        let traj = synthetic_trajectory(&grid, series, 1e-3);
        let reference = ReferenceState {
            omega: 0.01,
            linf: 0.4,
        };
        let out = classify(&traj, &lib, &reference, &config).unwrap();
        assert_eq!(out.verdict.kind(), VerdictKind::Dispersive);

        // Pinned to the reference: stable.
        let series = vec![0.4; 100];
        let traj = synthetic_trajectory(&grid, series, 0.4);
        let reference = ReferenceState {
            omega: 0.05,
            linf: 0.4,
        };
        let out = classify(&traj, &lib, &reference, &config).unwrap();
        assert_eq!(out.verdict.kind(), VerdictKind::Stable);

        // Settles onto a different branch level: settled, with omega_hat on
        // the matched profile.
        let target = lib.branch.points[2].linf;
        let mut series = vec![0.4; 80];
        series.extend(vec![target; 20]);
        let traj = synthetic_trajectory(&grid, series, 0.2 + 0.05);
        let reference = ReferenceState {
            omega: 0.03,
            linf: 0.4,
        };
        let out = classify(&traj, &lib, &reference, &config).unwrap();
        match out.verdict {
            Verdict::Settled { omega_hat, .. } => {
                assert!((omega_hat - 0.05).abs() < 5e-3, "omega_hat {omega_hat}");
            }
            other => panic!("expected settled, got {other:?}"),
        }
    }

    #[test]
    fn registry_covers_the_reference_runs() {
        let names: Vec<&str> = scenario_registry().iter().map(|s| s.name).collect();
        for expect in [
            "2d-stable-down",
            "2d-stable-up",
            "2d-gauss-pm",
            "2d-slow-0.05",
            "3d-stable-down",
            "3d-stable-up",
            "3d-unstable-down",
            "3d-unstable-up",
            "3d-gauss-suite",
            "3d-omega-0.007",
        ] {
            assert!(names.contains(&expect), "missing scenario {expect}");
        }
        // Unstable-branch runs use the wide domain.
        for suite in scenario_registry() {
            for run in &suite.runs {
                if run.omega < 0.02 {
                    assert_eq!(run.s0, 1e4, "{}", run.label);
                    assert_eq!(run.grid_degree, 400, "{}", run.label);
                }
            }
        }
        assert!(find_scenario("3d-unstable-up").is_some());
        assert!(find_scenario("nope").is_none());
    }
}
