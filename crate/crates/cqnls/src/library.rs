//! Plain-text persistence: profile records, field snapshots, CSV series
//! and scenario reports.
//!
//! Profiles are stored as line-oriented text with a small header and one
//! node value per line, printed with 17 significant digits so a
//! save/load round trip is bit-identical. Grids are rebuilt from
//! `(d, N, s0)` on load, which reproduces them exactly. All writes go
//! through a temp-file-then-rename so partial files never appear under
//! the final name.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{Trajectory, WaveField};
use crate::experiments::{ScenarioReport, ScenarioRun};
use crate::groundstate::{Branch, BranchLibrary, GroundStateProfile};
use crate::spectral::{build_shared_grid, Dimension};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Header of a stored profile, kept so diagnostics can be re-checked
/// against the stored values after a reload.
#[derive(Debug, Clone)]
pub struct ProfileRecord {
    pub profile: GroundStateProfile,
    pub mass: f64,
    pub energy: f64,
    pub linf: f64,
    pub tool_version: String,
}

pub fn write_profile(path: &Path, profile: &GroundStateProfile) -> Result<()> {
    let diag = profile.diagnostics()?;
    let mut out = String::new();
    out.push_str("cqnls profile v1\n");
    out.push_str(&format!("d {}\n", profile.d.value()));
    out.push_str(&format!("omega {}\n", fmt_f64(profile.omega)));
    out.push_str(&format!("alpha {}\n", fmt_f64(profile.alpha)));
    out.push_str(&format!("degree {}\n", profile.grid.degree));
    out.push_str(&format!("s0 {}\n", fmt_f64(profile.grid.s0)));
    out.push_str(&format!("mass {}\n", fmt_f64(diag.mass)));
    out.push_str(&format!("energy {}\n", fmt_f64(diag.energy)));
    out.push_str(&format!("linf {}\n", fmt_f64(diag.linf)));
    out.push_str(&format!(
        "residual_norm {}\n",
        fmt_f64(profile.residual_norm)
    ));
    out.push_str(&format!("newton_iters {}\n", profile.newton_iters));
    out.push_str(&format!("tool_version {TOOL_VERSION}\n"));
    out.push_str(&format!("values {}\n", profile.values.len()));
    for v in profile.values.iter() {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    atomic_write(path, &out)
}

struct RecordLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> RecordLines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::MalformedRecord("unexpected end of file".into()))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| Error::MalformedRecord(format!("expected `{key} <value>`")))?;
        if k != key {
            return Err(Error::MalformedRecord(format!(
                "expected field `{key}`, found `{k}`"
            )));
        }
        Ok(v)
    }

    fn f64_field(&mut self, key: &str) -> Result<f64> {
        self.field(key)?
            .parse()
            .map_err(|_| Error::MalformedRecord(format!("bad float in field `{key}`")))
    }

    fn usize_field(&mut self, key: &str) -> Result<usize> {
        self.field(key)?
            .parse()
            .map_err(|_| Error::MalformedRecord(format!("bad integer in field `{key}`")))
    }
}

pub fn read_profile(path: &Path) -> Result<ProfileRecord> {
    let text = fs::read_to_string(path)?;
    let mut r = RecordLines {
        lines: text.lines().enumerate(),
    };
    if r.next_line()? != "cqnls profile v1" {
        return Err(Error::MalformedRecord("not a profile record".into()));
    }
    let d = Dimension::new(r.usize_field("d")? as u32)?;
    let omega = r.f64_field("omega")?;
    let alpha = r.f64_field("alpha")?;
    let degree = r.usize_field("degree")?;
    let s0 = r.f64_field("s0")?;
    let mass = r.f64_field("mass")?;
    let energy = r.f64_field("energy")?;
    let linf = r.f64_field("linf")?;
    let residual_norm = r.f64_field("residual_norm")?;
    let newton_iters = r.usize_field("newton_iters")?;
    let tool_version = r.field("tool_version")?.to_string();
    let count = r.usize_field("values")?;
    if count != degree + 1 {
        return Err(Error::MalformedRecord(format!(
            "value count {count} does not match degree {degree}"
        )));
    }
    let mut values = DVector::zeros(count);
    for i in 0..count {
        values[i] = r
            .next_line()?
            .trim()
            .parse()
            .map_err(|_| Error::MalformedRecord(format!("bad value on node {i}")))?;
    }
    let grid = build_shared_grid(d, degree, s0)?;
    Ok(ProfileRecord {
        profile: GroundStateProfile {
            d,
            omega,
            alpha,
            grid,
            values,
            residual_norm,
            newton_iters,
        },
        mass,
        energy,
        linf,
        tool_version,
    })
}

pub fn write_field(path: &Path, field: &WaveField) -> Result<()> {
    let mut out = String::new();
    out.push_str("cqnls field v1\n");
    out.push_str(&format!("d {}\n", field.grid.d.value()));
    out.push_str(&format!("degree {}\n", field.grid.degree));
    out.push_str(&format!("s0 {}\n", fmt_f64(field.grid.s0)));
    out.push_str(&format!("time {}\n", fmt_f64(field.time)));
    out.push_str(&format!("values {}\n", field.values.len()));
    for v in field.values.iter() {
        out.push_str(&format!("{} {}\n", fmt_f64(v.re), fmt_f64(v.im)));
    }
    atomic_write(path, &out)
}

pub fn read_field(path: &Path) -> Result<WaveField> {
    let text = fs::read_to_string(path)?;
    let mut r = RecordLines {
        lines: text.lines().enumerate(),
    };
    if r.next_line()? != "cqnls field v1" {
        return Err(Error::MalformedRecord("not a field record".into()));
    }
    let d = Dimension::new(r.usize_field("d")? as u32)?;
    let degree = r.usize_field("degree")?;
    let s0 = r.f64_field("s0")?;
    let time = r.f64_field("time")?;
    let count = r.usize_field("values")?;
    let mut values = DVector::from_element(count, Complex64::new(0.0, 0.0));
    for i in 0..count {
        let line = r.next_line()?;
        let (re, im) = line
            .split_once(' ')
            .ok_or_else(|| Error::MalformedRecord(format!("bad complex value on node {i}")))?;
        values[i] = Complex64::new(
            re.trim()
                .parse()
                .map_err(|_| Error::MalformedRecord(format!("bad value on node {i}")))?,
            im.trim()
                .parse()
                .map_err(|_| Error::MalformedRecord(format!("bad value on node {i}")))?,
        );
    }
    let grid = build_shared_grid(d, degree, s0)?;
    WaveField::new(grid, values, time)
}

/// CSV with columns `omega,mass,energy,linf`, one row per branch point in
/// ascending omega, all values at 17 significant digits.
pub fn write_branch_csv(path: &Path, branch: &Branch) -> Result<()> {
    let mut out = String::from("omega,mass,energy,linf\n");
    for p in &branch.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(p.omega),
            fmt_f64(p.mass),
            fmt_f64(p.energy),
            fmt_f64(p.linf)
        ));
    }
    atomic_write(path, &out)
}

/// Parse a branch CSV back into `(omega, mass, energy, linf)` rows.
pub fn read_branch_csv(path: &Path) -> Result<Vec<(f64, f64, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("omega,mass,energy,linf") => {}
        _ => return Err(Error::MalformedRecord("bad branch CSV header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::MalformedRecord(format!("bad CSV row {i}")));
        }
        let mut vals = [0.0; 4];
        for (j, c) in cols.iter().enumerate() {
            vals[j] = c
                .parse()
                .map_err(|_| Error::MalformedRecord(format!("bad CSV value in row {i}")))?;
        }
        rows.push((vals[0], vals[1], vals[2], vals[3]));
    }
    Ok(rows)
}

/// CSV with columns `t,linf,mass,energy,delta_E`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,linf,mass,energy,delta_E\n");
    for i in 0..traj.times.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(traj.times[i]),
            fmt_f64(traj.linf_series[i]),
            fmt_f64(traj.mass_series[i]),
            fmt_f64(traj.energy_series[i]),
            fmt_f64(traj.delta_e_series[i])
        ));
    }
    atomic_write(path, &out)
}

/// Write branch CSV plus one profile record per point into `dir`; profile
/// files are named by their `profile_ref`. Returns the CSV path.
pub fn write_branch_library(dir: &Path, library: &BranchLibrary) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    for point in &library.branch.points {
        if let Some(profile) = library.profile(point) {
            write_profile(&dir.join(format!("{}.txt", point.profile_ref)), profile)?;
        }
    }
    let csv = dir.join(format!("branch_d{}.csv", library.branch.d));
    write_branch_csv(&csv, &library.branch)?;
    Ok(csv)
}

/// Rebuild a branch library from the profile records in `dir`.
///
/// Any `.txt` file that parses as a profile of dimension `d` becomes one
/// branch point (diagnostics recomputed on the rebuilt grid); other files
/// are ignored.
pub fn load_branch_library(dir: &Path, d: Dimension) -> Result<BranchLibrary> {
    let mut entries: Vec<(String, Arc<GroundStateProfile>)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let Ok(rec) = read_profile(&path) else {
            continue;
        };
        if rec.profile.d != d {
            continue;
        }
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        entries.push((stem, Arc::new(rec.profile)));
    }
    entries.sort_by(|a, b| a.1.omega.total_cmp(&b.1.omega));

    let mut points = Vec::with_capacity(entries.len());
    let mut profiles = std::collections::BTreeMap::new();
    for (stem, profile) in entries {
        let diag = profile.diagnostics()?;
        points.push(crate::groundstate::BranchPoint {
            omega: profile.omega,
            mass: diag.mass,
            energy: diag.energy,
            linf: diag.linf,
            profile_ref: stem.clone(),
        });
        profiles.insert(stem, profile);
    }
    Ok(BranchLibrary {
        branch: Branch {
            d: d.value(),
            points,
        },
        profiles,
        gaps: vec![],
    })
}

/// Persist a scenario run: trajectory CSV, snapshots, final field, and the
/// JSON report referencing them. Returns the report path.
pub fn write_scenario(dir: &Path, run: &ScenarioRun) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let label = &run.report.params.label;
    let csv_name = format!("{label}_trajectory.csv");
    let field_name = format!("{label}_final.txt");
    write_trajectory_csv(&dir.join(&csv_name), &run.trajectory)?;
    write_field(&dir.join(&field_name), &run.trajectory.final_field)?;
    for (i, snap) in run.trajectory.snapshots.iter().enumerate() {
        write_field(&dir.join(format!("{label}_snapshot{i}.txt")), snap)?;
    }

    let mut report: ScenarioReport = run.report.clone();
    report.trajectory_csv = Some(csv_name);
    report.final_field_file = Some(field_name);
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| Error::MalformedRecord(e.to_string()))?;
    let path = dir.join(format!("{label}_report.json"));
    atomic_write(&path, &json)?;
    Ok(path)
}
