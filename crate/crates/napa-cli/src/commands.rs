//! Single-run subcommands: each loads the scenario, runs one pipeline
//! stage and writes CSV files into the output directory.

use std::path::Path;

use napa_core::acoustic::{
    forward_pressure_poisson, invert_case1, invert_case2, symmetric_combination,
    InitialPressureMap, PressureRecord, ReconstructionGrid,
};
use napa_core::forward_em::{
    fourier_coefficient, resolve_omega, solve_lse, FieldSolution,
};
use napa_core::invert_em::{
    localize_from_pressure, recover_k_abs_dimer, recover_u0_abs_one_particle, DataSource,
    InternalData, InversionReport, TwoTimeMeasurement,
};
use napa_core::model::{contrast_tau, load_scenario, Drive, OmegaDomain, Scenario};
use napa_core::resonance::{
    disc_spectrum, resonance_frequency, ResonanceTable, SpectralData,
};
use napa_core::Complex;

use crate::output::{ensure_dir, num, CsvWriter};
use crate::Common;

#[derive(Debug)]
pub enum CmdError {
    /// Bad scenario, bad flags, unusable configuration → exit 2.
    Input(String),
    /// A checked tolerance was violated → exit 1.
    Criterion(String),
}

pub type CmdResult = Result<(), CmdError>;

impl From<napa_core::Error> for CmdError {
    fn from(e: napa_core::Error) -> Self {
        CmdError::Input(e.to_string())
    }
}

pub fn load(common: &Common) -> Result<Scenario, CmdError> {
    load_scenario(&common.scenario)
        .map_err(|e| CmdError::Input(format!("{}: {e}", common.scenario.display())))
}

/// Disc spectrum with the scenario's numerical knobs, for particle radius `a`.
pub fn spectrum(s: &Scenario, a: f64) -> Result<SpectralData, CmdError> {
    let n = &s.numerics;
    Ok(disc_spectrum(a, n.modes_k_max, n.modes_per_order, n.mesh_cells)?)
}

/// Spectrum index of the driven mode (the n₀-th mode satisfying the
/// resonance hypotheses, mirroring the frequency resolution); explicit
/// drives fall back to the first admissible mode.
pub fn driven_mode(s: &Scenario, spec: &SpectralData) -> Result<usize, CmdError> {
    let n0 = match s.wave.drive {
        Drive::Detuned { n0, .. } => n0,
        Drive::Explicit { .. } => 1,
    };
    let a = particle_radius(s)?;
    let re_tau = contrast_tau(s, 0, 1.0)?.re;
    let table = ResonanceTable::build(spec, a, s.medium.mu0, Complex::new(re_tau, 0.0))?;
    let mut seen = 0usize;
    for (idx, &ok) in table.mode_flags.iter().enumerate() {
        if ok {
            seen += 1;
            if seen == n0 {
                return Ok(idx);
            }
        }
    }
    Err(CmdError::Input(format!(
        "mode {n0} requested but only {seen} modes satisfy the resonance hypotheses"
    )))
}

pub fn particle_radius(s: &Scenario) -> Result<f64, CmdError> {
    s.particles
        .first()
        .map(|p| p.radius)
        .ok_or_else(|| CmdError::Input("scenario has no particles".to_string()))
}

pub fn int_u_sq(f: &FieldSolution, m: usize) -> f64 {
    f.particle_meshes[m]
        .cells
        .iter()
        .zip(&f.v[m])
        .map(|(c, v)| c.area * v.norm_sqr())
        .sum()
}

fn solve(s: &Scenario) -> Result<(SpectralData, f64, FieldSolution), CmdError> {
    let a = particle_radius(s)?;
    let spec = spectrum(s, a)?;
    let omega = resolve_omega(s, &spec)?;
    let f = solve_lse(s, &spec, omega)?;
    Ok((spec, omega, f))
}

pub fn resonance(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let a = particle_radius(&s)?;
    let spec = spectrum(&s, a)?;
    let re_tau = contrast_tau(&s, 0, 1.0)?.re;
    let table = ResonanceTable::build(&spec, a, s.medium.mu0, Complex::new(re_tau, 0.0))?;

    let mut csv = CsvWriter::new(&[
        "mode",
        "lambda_tilde",
        "lambda",
        "mean",
        "omega_n",
        "admissible",
    ]);
    for n in 0..spec.n_modes() {
        csv.row(&[
            n.to_string(),
            num(spec.eigenvalues_tilde[n]),
            num(spec.lambda(n, a)),
            num(spec.means[n]),
            num(table.omega_n[n]),
            table.mode_flags[n].to_string(),
        ]);
    }
    csv.write(&c.out, "resonance.csv")?;

    let mut freq = CsvWriter::new(&["quantity", "value"]);
    if let Drive::Detuned { h, .. } = s.wave.drive {
        let n0 = driven_mode(&s, &spec)?;
        let f = resonance_frequency(&spec, a, s.medium.mu0, Complex::new(re_tau, 0.0), n0, h)?;
        freq.row(&["omega_n0".to_string(), num(f.omega_n0)]);
        freq.row(&["omega_minus".to_string(), num(f.omega_minus)]);
        freq.row(&["omega_plus".to_string(), num(f.omega_plus)]);
    }
    freq.row(&["omega_used".to_string(), num(resolve_omega(&s, &spec)?)]);
    freq.write(&c.out, "frequencies.csv")?;
    println!("resonance: {} modes -> {}", spec.n_modes(), c.out.display());
    Ok(())
}

pub fn forward_em(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let (spec, omega, f) = solve(&s)?;
    let n0 = driven_mode(&s, &spec)?;

    let mut field = CsvWriter::new(&["particle", "x", "y", "re", "im", "abs"]);
    for (m, mesh) in f.particle_meshes.iter().enumerate() {
        for (cell, v) in mesh.cells.iter().zip(&f.v[m]) {
            field.row(&[
                m.to_string(),
                num(cell.centroid[0]),
                num(cell.centroid[1]),
                num(v.re),
                num(v.im),
                num(v.norm()),
            ]);
        }
    }
    field.write(&c.out, "field.csv")?;

    let mut summary = CsvWriter::new(&["particle", "int_u_sq", "coeff_abs", "residual", "omega"]);
    for m in 0..s.particles.len() {
        summary.row(&[
            m.to_string(),
            num(int_u_sq(&f, m)),
            num(fourier_coefficient(&f, &spec, m, n0)?.norm()),
            num(f.residual),
            num(omega),
        ]);
    }
    summary.write(&c.out, "summary.csv")?;
    println!("forward-em: omega = {omega} -> {}", c.out.display());
    Ok(())
}

fn pressure_record(s: &Scenario) -> Result<PressureRecord, CmdError> {
    let (_, _, f) = solve(s)?;
    let map = InitialPressureMap::from_field(s, &f, 64)?;
    Ok(forward_pressure_poisson(
        &map,
        &s.medium.domain,
        &s.sensors.points,
        &s.sensors.times,
        s.medium.c_s,
    )?)
}

fn write_pressure(rec: &PressureRecord, dir: &Path, name: &str) -> CmdResult {
    let mut csv = CsvWriter::new(&["sensor", "x", "y", "t", "p"]);
    for (i, sp) in rec.sensors.iter().enumerate() {
        for (t, p) in rec.times.iter().zip(&rec.values[i]) {
            csv.row(&[
                i.to_string(),
                num(sp[0]),
                num(sp[1]),
                num(*t),
                num(*p),
            ]);
        }
    }
    csv.write(dir, name)
}

pub fn forward_pa(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let rec = pressure_record(&s)?;
    write_pressure(&rec, &c.out, "pressure.csv")?;
    println!(
        "forward-pa: {} sensors x {} times -> {}",
        rec.sensors.len(),
        rec.times.len(),
        c.out.display()
    );
    Ok(())
}

fn write_grid(grid: &ReconstructionGrid, dir: &Path, name: &str) -> CmdResult {
    let mut csv = CsvWriter::new(&["x", "y", "value"]);
    for (p, v) in grid.points.iter().zip(&grid.values) {
        csv.row(&[num(p[0]), num(p[1]), num(*v)]);
    }
    csv.write(dir, name)
}

pub fn invert_acoustic(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let rec = pressure_record(&s)?;
    let grid = match s.medium.domain {
        OmegaDomain::Disc { .. } => invert_case1(&rec, &s.medium.domain, 40, 128)?,
        OmegaDomain::Rectangle { .. } => invert_case2(&rec, &s.medium.domain, 24, 24)?.grid,
    };
    write_grid(&grid, &c.out, "map.csv")?;
    let peak = grid.argmax();
    let mut summary = CsvWriter::new(&["quantity", "value"]);
    summary.row(&["peak_x".to_string(), num(peak[0])]);
    summary.row(&["peak_y".to_string(), num(peak[1])]);
    summary.row(&["peak_value".to_string(), num(grid.value_near(peak))]);
    summary.write(&c.out, "summary.csv")?;
    for w in &grid.warnings {
        eprintln!("warning: {w}");
    }
    println!("invert-acoustic: peak at [{}, {}] -> {}", peak[0], peak[1], c.out.display());
    Ok(())
}

fn write_report(rep: &InversionReport, dir: &Path, name: &str) -> CmdResult {
    let mut csv = CsvWriter::new(&["quantity", "value"]);
    for (i, z) in rep.z_hat.iter().enumerate() {
        csv.row(&[format!("z_hat_{i}_x"), num(z[0])]);
        csv.row(&[format!("z_hat_{i}_y"), num(z[1])]);
    }
    if let Some(v) = rep.u0_abs {
        csv.row(&["u0_abs".to_string(), num(v)]);
    }
    if let Some(v) = rep.k_abs {
        csv.row(&["k_abs".to_string(), num(v)]);
    }
    if let Some(v) = rep.log_k_abs {
        csv.row(&["log_k_abs".to_string(), num(v)]);
    }
    if let Some(v) = rep.eps_r_hat {
        csv.row(&["eps_r_hat".to_string(), num(v)]);
    }
    if let Some(v) = rep.sigma_hat {
        csv.row(&["sigma_hat".to_string(), num(v)]);
    }
    for (k, v) in &rep.diagnostics {
        csv.row(&[format!("diag_{k}"), num(*v)]);
    }
    csv.write(dir, name)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Scenario with only particle `keep` (for the dimer's one-particle
/// reference run at the same frequency).
pub fn keep_one_particle(s: &Scenario, keep: usize) -> Scenario {
    let mut s1 = s.clone();
    s1.particles = vec![s.particles[keep].clone()];
    s1
}

pub fn invert_em(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let a = particle_radius(&s)?;
    let spec = spectrum(&s, a)?;
    let omega = resolve_omega(&s, &spec)?;
    let n0 = driven_mode(&s, &spec)?;
    let tau = contrast_tau(&s, 0, omega)?;
    let k = s.medium.wavenumber(omega);
    let f = solve_lse(&s, &spec, omega)?;

    let rep = match s.particles.len() {
        1 => {
            let mut data = InternalData::new(
                vec![int_u_sq(&f, 0)],
                DataSource::DirectPressureFormula,
                "O(a^2)",
            )?;
            data.coeff_abs_sq = Some(fourier_coefficient(&f, &spec, 0, n0)?.norm_sqr());
            recover_u0_abs_one_particle(&data, &spec, a, s.medium.mu0, tau, omega, n0, k)?
        }
        2 => {
            let h = s.wave.h().ok_or_else(|| {
                CmdError::Input("dimer |k| inversion needs a detuned drive (wave.h)".to_string())
            })?;
            let f1 = solve_lse(&keep_one_particle(&s, 0), &spec, omega)?;
            let one = InternalData::new(
                vec![int_u_sq(&f1, 0)],
                DataSource::DirectPressureFormula,
                "O(|log a|^{max(h-1,1-2h)})",
            )?;
            let two = InternalData::new(
                vec![int_u_sq(&f, 0), int_u_sq(&f, 1)],
                DataSource::DirectPressureFormula,
                "O(|log a|^{max(h-1,1-2h)})",
            )?;
            recover_k_abs_dimer(
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
            )?
        }
        n => {
            return Err(CmdError::Input(format!(
                "invert-em handles 1 (|u₀|) or 2 (|k|) particles, scenario has {n}"
            )))
        }
    };
    write_report(&rep, &c.out, "inversion.csv")?;
    println!("invert-em: report -> {}", c.out.display());
    Ok(())
}

pub fn localize(c: &Common) -> CmdResult {
    let s = load(c)?;
    ensure_dir(&c.out)?;
    let rep = localize_pipeline(&s)?;
    write_report(&rep, &c.out, "localization.csv")?;
    let zs: Vec<String> = rep
        .z_hat
        .iter()
        .map(|z| format!("[{}, {}]", z[0], z[1]))
        .collect();
    println!("localize: candidates {} -> {}", zs.join(" "), c.out.display());
    Ok(())
}

/// Full localization pipeline: fields at the detuned pair and the
/// off-resonance control, Poisson forward to the scenario sensors at
/// the first and last scenario times, resonant combination, two-circle
/// triangulation.
pub fn localize_pipeline(s: &Scenario) -> Result<InversionReport, CmdError> {
    let a = particle_radius(s)?;
    let spec = spectrum(s, a)?;
    let h = s
        .wave
        .h()
        .ok_or_else(|| CmdError::Input("localization needs a detuned drive (wave.h)".to_string()))?;
    let n0 = driven_mode(s, &spec)?;
    let re_tau = contrast_tau(s, 0, 1.0)?.re;
    let freqs = resonance_frequency(&spec, a, s.medium.mu0, Complex::new(re_tau, 0.0), n0, h)?;
    if s.sensors.points.len() < 2 {
        return Err(CmdError::Input("localization needs at least 2 sensors".to_string()));
    }
    if s.sensors.times.len() < 2 {
        return Err(CmdError::Input("localization needs at least 2 sample times".to_string()));
    }
    let times = [
        s.sensors.times[0],
        *s.sensors.times.last().expect("nonempty times"),
    ];
    let mut records = Vec::new();
    for &omega in &[freqs.omega_plus, freqs.omega_minus, 2.0 * freqs.omega_plus] {
        let f = solve_lse(s, &spec, omega)?;
        let map = InitialPressureMap::from_field(s, &f, 0)?;
        records.push(forward_pressure_poisson(
            &map,
            &s.medium.domain,
            &s.sensors.points,
            &times,
            s.medium.c_s,
        )?);
    }
    let sym = symmetric_combination(&records[0], &records[1], &records[2])?;
    let ms: Vec<TwoTimeMeasurement> = s
        .sensors
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| TwoTimeMeasurement {
            sensor: x,
            t1: times[0],
            p1: sym.values[i][0],
            t2: times[1],
            p2: sym.values[i][1],
        })
        .collect();
    Ok(localize_from_pressure(&ms, &s.medium.domain)?)
}
