//! Sweep harness: run one pipeline over a swept scenario parameter,
//! collect truth/recovered pairs into a deterministic `aggregate.csv`,
//! and optionally gate the run on a tolerance file.
//!
//! Output layout under `--out`:
//! - `aggregate.csv` — one row per (point, quantity), byte-identical
//!   across reruns of the same plan;
//! - `point_NNN.csv` — key/value details per sweep point (diagnostics,
//!   warnings, the resolved frequency, ...);
//! - `manifest.json` — the plan, per-point status and wall time (the
//!   only file allowed to differ between reruns).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use napa_core::acoustic::{
    forward_pressure_poisson, invert_case1, invert_case2, InitialPressureMap,
};
use napa_core::forward_em::{background_field, resolve_omega, solve_lse};
use napa_core::invert_em::{
    effective_residual, recover_k_abs_dimer, recover_u0_abs_one_particle, DataSource,
    InternalData,
};
use napa_core::model::{contrast_tau, Drive, OmegaDomain, Scenario, SigmaRule};

use crate::commands::{
    driven_mode, int_u_sq, keep_one_particle, load, particle_radius, spectrum, CmdError,
    CmdResult,
};
use crate::output::{ensure_dir, num, write_file, CsvWriter};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    /// Particle radius `a` (all particles).
    Radius,
    /// Dimer separation `d` (recenters both particles about their
    /// midpoint along the original axis).
    Separation,
    /// Detuning exponent `h` of the drive.
    Detuning,
    /// Conductivity contrast exponent `s`.
    ContrastExponent,
    /// Radial quadrature resolution of the disc spectrum.
    Mesh,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Radius => "a",
            Axis::Separation => "d",
            Axis::Detuning => "h",
            Axis::ContrastExponent => "s",
            Axis::Mesh => "mesh",
        }
    }
}

fn parse_sweep(spec: &str) -> Result<(Axis, Vec<f64>), CmdError> {
    let bad = |msg: String| CmdError::Input(format!("--sweep {spec:?}: {msg}"));
    let (axis, list) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected AXIS=v1,v2,...".to_string()))?;
    let axis = match axis.trim() {
        "a" => Axis::Radius,
        "d" => Axis::Separation,
        "h" => Axis::Detuning,
        "s" => Axis::ContrastExponent,
        "mesh" => Axis::Mesh,
        other => return Err(bad(format!("unknown axis {other:?} (want a|d|h|s|mesh)"))),
    };
    let values: Vec<f64> = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("bad value {v:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(bad("no values".to_string()));
    }
    for &v in &values {
        if !v.is_finite() {
            return Err(bad(format!("non-finite value {v}")));
        }
        if axis == Axis::Mesh && (v <= 0.0 || v.fract() != 0.0) {
            return Err(bad(format!("mesh wants a positive integer, got {v}")));
        }
    }
    Ok((axis, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pipeline {
    /// Forward solve only: measured ∫|v|² against its resonant
    /// asymptotic prediction.
    ForwardOnly,
    /// Electromagnetic + acoustic forward, then acoustic inversion:
    /// total recovered source against the initial-pressure total.
    AcousticRoundtrip,
    /// Forward data pushed through the electromagnetic recovery
    /// formulas: |u₀| (and |k| for a dimer) against scenario truth.
    FullInversion,
}

fn parse_pipeline(name: &str) -> Result<Pipeline, CmdError> {
    match name {
        "forward-only" => Ok(Pipeline::ForwardOnly),
        "acoustic-roundtrip" => Ok(Pipeline::AcousticRoundtrip),
        "full-inversion" => Ok(Pipeline::FullInversion),
        other => Err(CmdError::Input(format!(
            "unknown pipeline {other:?} (want forward-only|acoustic-roundtrip|full-inversion)"
        ))),
    }
}

/// One truth/recovered pair emitted by a pipeline at one sweep point.
struct Quantity {
    name: &'static str,
    truth: f64,
    recovered: f64,
}

impl Quantity {
    fn relative_error(&self) -> f64 {
        if self.truth == 0.0 {
            self.recovered.abs()
        } else {
            (self.recovered - self.truth).abs() / self.truth.abs()
        }
    }
}

struct PointOutcome {
    quantities: Vec<Quantity>,
    /// key/value rows for `point_NNN.csv`.
    details: Vec<(String, String)>,
}

fn apply_axis(base: &Scenario, axis: Axis, value: f64) -> Result<Scenario, String> {
    let mut s = base.clone();
    match axis {
        Axis::Radius => {
            for p in &mut s.particles {
                p.radius = value;
            }
        }
        Axis::Separation => {
            if s.particles.len() != 2 {
                return Err(format!(
                    "d sweep needs exactly 2 particles, scenario has {}",
                    s.particles.len()
                ));
            }
            let (z1, z2) = (s.particles[0].center, s.particles[1].center);
            let gap = napa_core::dist(z1, z2);
            if gap <= 0.0 {
                return Err("d sweep needs distinct particle centers".to_string());
            }
            let mid = [(z1[0] + z2[0]) / 2.0, (z1[1] + z2[1]) / 2.0];
            let u = [(z2[0] - z1[0]) / gap, (z2[1] - z1[1]) / gap];
            s.particles[0].center = [mid[0] - u[0] * value / 2.0, mid[1] - u[1] * value / 2.0];
            s.particles[1].center = [mid[0] + u[0] * value / 2.0, mid[1] + u[1] * value / 2.0];
        }
        Axis::Detuning => match s.wave.drive {
            Drive::Detuned { n0, sign, .. } => {
                s.wave.drive = Drive::Detuned { n0, h: value, sign };
            }
            Drive::Explicit { .. } => {
                return Err("h sweep needs a detuned drive (wave.mode/h)".to_string())
            }
        },
        Axis::ContrastExponent => {
            let mut hit = false;
            for p in &mut s.particles {
                if matches!(p.sigma_m, SigmaRule::Contrasted { .. }) {
                    p.sigma_m = SigmaRule::Contrasted { s: value };
                    hit = true;
                }
            }
            if !hit {
                return Err(
                    "s sweep needs at least one particle with sigma_m = \"contrasted\"".to_string(),
                );
            }
        }
        Axis::Mesh => {
            s.numerics.mesh_cells = value as usize;
        }
    }
    s.validate().map_err(|e| e.to_string())?;
    Ok(s)
}

fn run_pipeline(s: &Scenario, pipeline: Pipeline) -> Result<PointOutcome, String> {
    match pipeline {
        Pipeline::ForwardOnly => forward_only(s),
        Pipeline::AcousticRoundtrip => acoustic_roundtrip(s),
        Pipeline::FullInversion => full_inversion(s),
    }
    .map_err(|e| match e {
        CmdError::Input(m) | CmdError::Criterion(m) => m,
    })
}

fn forward_only(s: &Scenario) -> Result<PointOutcome, CmdError> {
    let a = particle_radius(s)?;
    let spec = spectrum(s, a)?;
    let omega = resolve_omega(s, &spec)?;
    let n0 = driven_mode(s, &spec)?;
    let tau = contrast_tau(s, 0, omega)?;
    let k = s.medium.wavenumber(omega);
    let f = solve_lse(s, &spec, omega)?;

    let measured = int_u_sq(&f, 0);
    let u0 = background_field(s, omega, &[s.particles[0].center])?[0].norm();
    let res = effective_residual(&spec, a, s.medium.mu0, tau, omega, n0, k)?;
    let predicted = u0.powi(2) * (a * spec.means[n0]).powi(2) / res.norm_sqr();
    Ok(PointOutcome {
        quantities: vec![Quantity {
            name: "int_u_sq",
            truth: predicted,
            recovered: measured,
        }],
        details: vec![
            ("omega".to_string(), num(omega)),
            ("lse_residual".to_string(), num(f.residual)),
            ("residual_abs".to_string(), num(res.norm())),
        ],
    })
}

fn acoustic_roundtrip(s: &Scenario) -> Result<PointOutcome, CmdError> {
    let a = particle_radius(s)?;
    let spec = spectrum(s, a)?;
    let omega = resolve_omega(s, &spec)?;
    let f = solve_lse(s, &spec, omega)?;
    let map = InitialPressureMap::from_field(s, &f, 64)?;
    let rec = forward_pressure_poisson(
        &map,
        &s.medium.domain,
        &s.sensors.points,
        &s.sensors.times,
        s.medium.c_s,
    )?;
    // Radial resolution follows the time sampling: the circular means
    // are read off the trace, so extra radii beyond it add nothing.
    let n_radii = s.sensors.times.len().clamp(128, 1024);
    let grid = match s.medium.domain {
        OmegaDomain::Disc { .. } => invert_case1(&rec, &s.medium.domain, 48, n_radii)?,
        OmegaDomain::Rectangle { .. } => invert_case2(&rec, &s.medium.domain, 24, 24)?.grid,
    };
    let recovered: f64 = grid.values.iter().sum::<f64>() * grid.cell * grid.cell;
    let mut details = vec![
        ("omega".to_string(), num(omega)),
        ("map_total".to_string(), num(map.total())),
    ];
    for (i, w) in grid.warnings.iter().enumerate() {
        details.push((format!("warning_{i}"), w.replace(',', ";")));
    }
    Ok(PointOutcome {
        quantities: vec![Quantity {
            name: "total_source",
            truth: map.total(),
            recovered,
        }],
        details,
    })
}

fn full_inversion(s: &Scenario) -> Result<PointOutcome, CmdError> {
    let a = particle_radius(s)?;
    let spec = spectrum(s, a)?;
    let omega = resolve_omega(s, &spec)?;
    let n0 = driven_mode(s, &spec)?;
    let tau = contrast_tau(s, 0, omega)?;
    let k = s.medium.wavenumber(omega);

    let (single, f1) = if s.particles.len() == 1 {
        (s.clone(), solve_lse(s, &spec, omega)?)
    } else {
        let s1 = keep_one_particle(s, 0);
        let f1 = solve_lse(&s1, &spec, omega)?;
        (s1, f1)
    };
    let one = InternalData::new(
        vec![int_u_sq(&f1, 0)],
        DataSource::DirectPressureFormula,
        "O(a^2)",
    )?;
    let u0_true = background_field(&single, omega, &[single.particles[0].center])?[0].norm();
    let rep_u0 =
        recover_u0_abs_one_particle(&one, &spec, a, s.medium.mu0, tau, omega, n0, k)?;

    let mut quantities = vec![Quantity {
        name: "u0_abs",
        truth: u0_true,
        recovered: rep_u0.u0_abs.expect("one-particle report carries |u0|"),
    }];
    let mut details = vec![("omega".to_string(), num(omega))];
    for (key, v) in &rep_u0.diagnostics {
        details.push((format!("u0_diag_{key}"), num(*v)));
    }

    if s.particles.len() == 2 {
        let h = s.wave.h().ok_or_else(|| {
            CmdError::Input("dimer |k| inversion needs a detuned drive (wave.h)".to_string())
        })?;
        let f2 = solve_lse(s, &spec, omega)?;
        let two = InternalData::new(
            vec![int_u_sq(&f2, 0), int_u_sq(&f2, 1)],
            DataSource::DirectPressureFormula,
            "O(|log a|^{max(h-1,1-2h)})",
        )?;
        let rep_k = recover_k_abs_dimer(
            &one,
            &two,
            &spec,
            a,
            s.medium.mu0,
            tau,
            omega,
            n0,
            s.particles[0].center,
            s.particles[1].center,
            h,
        )?;
        quantities.push(Quantity {
            name: "k_abs",
            truth: k.norm(),
            recovered: rep_k.k_abs.expect("dimer report carries |k|"),
        });
        for (key, v) in &rep_k.diagnostics {
            details.push((format!("k_diag_{key}"), num(*v)));
        }
        for (i, w) in rep_k.warnings.iter().enumerate() {
            details.push((format!("k_warning_{i}"), w.replace(',', ";")));
        }
    } else if s.particles.len() > 2 {
        return Err(CmdError::Input(format!(
            "full-inversion handles 1 or 2 particles, scenario has {}",
            s.particles.len()
        )));
    }
    Ok(PointOutcome { quantities, details })
}

#[derive(Deserialize)]
struct ToleranceFile {
    /// quantity name → maximum admissible relative error.
    tolerances: BTreeMap<String, f64>,
}

struct PointResult {
    value: Option<f64>,
    outcome: Result<PointOutcome, String>,
}

pub fn experiment(
    common: &Common,
    sweep: Option<&str>,
    pipeline: &str,
    tolerance_file: Option<&Path>,
) -> CmdResult {
    let started = Instant::now();
    let base = load(common)?;
    let pipe = parse_pipeline(pipeline)?;
    let plan = sweep.map(parse_sweep).transpose()?;
    let tolerances = tolerance_file
        .map(|p| -> Result<ToleranceFile, CmdError> {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CmdError::Input(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CmdError::Input(format!("{}: {e}", p.display())))
        })
        .transpose()?;
    ensure_dir(&common.out)?;

    let results: Vec<PointResult> = match &plan {
        None => Vec::new(),
        Some((axis, values)) => values
            .par_iter()
            .map(|&v| PointResult {
                value: Some(v),
                outcome: apply_axis(&base, *axis, v).and_then(|s| run_pipeline(&s, pipe)),
            })
            .collect(),
    };

    let axis_name = plan.as_ref().map(|(a, _)| a.name()).unwrap_or("");
    let mut aggregate = CsvWriter::new(&[
        "axis",
        "value",
        "quantity",
        "truth",
        "recovered",
        "relative_error",
        "status",
        "message",
    ]);
    let mut point_statuses = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let value = r.value.map(num).unwrap_or_default();
        match &r.outcome {
            Ok(out) => {
                point_statuses.push("ok");
                for q in &out.quantities {
                    aggregate.row(&[
                        axis_name.to_string(),
                        value.clone(),
                        q.name.to_string(),
                        num(q.truth),
                        num(q.recovered),
                        num(q.relative_error()),
                        "ok".to_string(),
                        String::new(),
                    ]);
                }
                let mut point = CsvWriter::new(&["key", "value"]);
                for (k, v) in &out.details {
                    point.row(&[k.clone(), v.clone()]);
                }
                point.write(&common.out, &format!("point_{i:03}.csv"))?;
            }
            Err(msg) => {
                point_statuses.push("error");
                aggregate.row(&[
                    axis_name.to_string(),
                    value,
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "error".to_string(),
                    msg.replace(',', ";").replace('\n', " "),
                ]);
            }
        }
    }
    aggregate.write(&common.out, "aggregate.csv")?;

    let manifest = serde_json::json!({
        "generator": { "name": "napa", "version": env!("CARGO_PKG_VERSION") },
        "scenario": common.scenario.display().to_string(),
        "pipeline": pipeline,
        "sweep": plan.as_ref().map(|(a, vs)| serde_json::json!({
            "axis": a.name(),
            "values": vs,
        })),
        "tolerances": tolerances.as_ref().map(|t| &t.tolerances),
        "points": point_statuses,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    write_file(
        &common.out.join("manifest.json"),
        &format!("{:#}\n", manifest),
    )?;

    println!(
        "experiment: {} point(s), pipeline {pipeline} -> {}",
        results.len(),
        common.out.display()
    );

    if let Some(tols) = &tolerances {
        check_tolerances(&results, &tols.tolerances)?;
    }
    Ok(())
}

fn check_tolerances(
    results: &[PointResult],
    tolerances: &BTreeMap<String, f64>,
) -> CmdResult {
    let mut failures = Vec::new();
    for (i, r) in results.iter().enumerate() {
        if let Err(msg) = &r.outcome {
            failures.push(format!("point {i} failed: {msg}"));
            println!("tolerance point {i}: FAIL — {msg}");
        }
    }
    for (name, &tol) in tolerances {
        let errs: Vec<f64> = results
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .flat_map(|o| &o.quantities)
            .filter(|q| q.name == name)
            .map(Quantity::relative_error)
            .collect();
        let worst = errs.iter().cloned().fold(0.0f64, f64::max);
        if errs.is_empty() {
            println!("tolerance {name} (max {tol}): pass — no samples");
        } else if worst <= tol {
            println!("tolerance {name} (max {tol}): pass — worst {worst:.3e}");
        } else {
            println!("tolerance {name} (max {tol}): FAIL — worst {worst:.3e}");
            failures.push(format!("{name}: worst relative error {worst:.3e} > {tol}"));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CmdError::Criterion(failures.join("; ")))
    }
}
