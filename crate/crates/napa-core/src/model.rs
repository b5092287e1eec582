//! Domain model: media, particles, incident waves, sensors, scenarios.
//!
//! A [`Scenario`] is the complete description of one experiment:
//! background tissue parameters on the bounded region Ω, the injected
//! nanoparticles, the incident plane wave (either an explicit frequency
//! or a detuning prescription relative to a particle resonance), and the
//! acoustic sensors on ∂Ω.
//!
//! Scenario files are TOML (`schema_version = 1`); the reference schema
//! is documented in `docs/scenario.md`. [`load_scenario`] parses and
//! fully validates a file; every invariant violation carries the name of
//! the invariant and the offending values.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{Complex, Error, Point, Result};

/// The bounded observation region Ω.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaDomain {
    Disc { center: Point, radius: f64 },
    Rectangle { corner: Point, size: [f64; 2] },
}

impl OmegaDomain {
    /// Diameter of Ω.
    pub fn diam(&self) -> f64 {
        match self {
            OmegaDomain::Disc { radius, .. } => 2.0 * radius,
            OmegaDomain::Rectangle { size, .. } => (size[0].powi(2) + size[1].powi(2)).sqrt(),
        }
    }

    /// Signed distance-ish containment test with margin ≥ 0 meaning the
    /// disc `B(p, margin)` fits inside Ω.
    pub fn contains_disc(&self, p: Point, margin: f64) -> bool {
        match self {
            OmegaDomain::Disc { center, radius } => {
                crate::dist(p, *center) + margin <= *radius
            }
            OmegaDomain::Rectangle { corner, size } => {
                p[0] - margin >= corner[0]
                    && p[1] - margin >= corner[1]
                    && p[0] + margin <= corner[0] + size[0]
                    && p[1] + margin <= corner[1] + size[1]
            }
        }
    }

    /// Distance from a point to ∂Ω (zero when on the boundary).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self {
            OmegaDomain::Disc { center, radius } => (crate::dist(p, *center) - radius).abs(),
            OmegaDomain::Rectangle { corner, size } => {
                let dx = (p[0] - corner[0]).min(corner[0] + size[0] - p[0]);
                let dy = (p[1] - corner[1]).min(corner[1] + size[1] - p[1]);
                if dx >= 0.0 && dy >= 0.0 {
                    dx.min(dy)
                } else {
                    // Outside: Euclidean distance to the rectangle.
                    let cx = p[0].clamp(corner[0], corner[0] + size[0]);
                    let cy = p[1].clamp(corner[1], corner[1] + size[1]);
                    crate::dist(p, [cx, cy])
                }
            }
        }
    }

    /// `n` uniformly spaced points on ∂Ω (by angle for the disc, by arc
    /// length along the perimeter for the rectangle).
    pub fn boundary_points(&self, n: usize) -> Vec<Point> {
        match self {
            OmegaDomain::Disc { center, radius } => (0..n)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect(),
            OmegaDomain::Rectangle { corner, size } => {
                let perim = 2.0 * (size[0] + size[1]);
                (0..n)
                    .map(|i| {
                        let mut s = perim * i as f64 / n as f64;
                        if s < size[0] {
                            return [corner[0] + s, corner[1]];
                        }
                        s -= size[0];
                        if s < size[1] {
                            return [corner[0] + size[0], corner[1] + s];
                        }
                        s -= size[1];
                        if s < size[0] {
                            return [corner[0] + size[0] - s, corner[1] + size[1]];
                        }
                        s -= size[0];
                        [corner[0], corner[1] + size[1] - s]
                    })
                    .collect()
            }
        }
    }

    /// Outward unit normal at a boundary point (rectangle corners snap to
    /// the nearest edge normal).
    pub fn outward_normal(&self, p: Point) -> Point {
        match self {
            OmegaDomain::Disc { center, radius: _ } => {
                let d = crate::dist(p, *center).max(1e-300);
                [(p[0] - center[0]) / d, (p[1] - center[1]) / d]
            }
            OmegaDomain::Rectangle { corner, size } => {
                let dl = p[0] - corner[0];
                let dr = corner[0] + size[0] - p[0];
                let db = p[1] - corner[1];
                let dt = corner[1] + size[1] - p[1];
                let m = dl.min(dr).min(db).min(dt);
                if m == dl {
                    [-1.0, 0.0]
                } else if m == dr {
                    [1.0, 0.0]
                } else if m == db {
                    [0.0, -1.0]
                } else {
                    [0.0, 1.0]
                }
            }
        }
    }
}

/// Homogeneous background tissue on Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundMedium {
    /// Relative permittivity ε_r (> 0, constant over Ω).
    pub eps_r: f64,
    /// Conductivity σ_Ω (≥ 0, constant over Ω).
    pub sigma_omega: f64,
    /// Vacuum permittivity constant (scenario units; default 1).
    pub eps_vac: f64,
    /// Permeability μ₀ > 0.
    pub mu0: f64,
    /// Acoustic speed c_s > 0 (constant).
    pub c_s: f64,
    /// Thermal expansion coefficient β₀.
    pub beta0: f64,
    /// Heat capacity c_p.
    pub c_p: f64,
    /// The observation region Ω.
    pub domain: OmegaDomain,
    /// When true, pressure outputs drop the multiplicative constant
    /// ωβ₀/(2π c_p) (formula-level comparisons); the flag is recorded in
    /// every PressureRecord.
    pub normalize_pressure_constant: bool,
}

impl BackgroundMedium {
    /// Complex background permittivity ε₀(ω) = ε_vac·ε_r + i σ_Ω/ω.
    pub fn eps0(&self, omega: f64) -> Complex {
        Complex::new(self.eps_vac * self.eps_r, self.sigma_omega / omega)
    }

    /// Background wavenumber k(ω) = ω √(ε₀ μ₀), branch with Im k ≥ 0.
    pub fn wavenumber(&self, omega: f64) -> Complex {
        let k = omega * (self.eps0(omega) * self.mu0).sqrt();
        if k.im < 0.0 {
            -k
        } else {
            k
        }
    }

    /// Pressure prefactor ωβ₀/c_p of the initial condition
    /// `p(x,0) = (ωβ₀/c_p)·Im(ε)|u|²`, or 1 in normalized mode.
    pub fn pressure_prefactor(&self, omega: f64) -> f64 {
        if self.normalize_pressure_constant {
            1.0
        } else {
            omega * self.beta0 / self.c_p
        }
    }
}

/// Particle permittivity scaling rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// Fixed relative permittivity value.
    Value(f64),
    /// The resonant scaling ε ≃ 1/(a²|log a|).
    Auto,
}

/// Particle conductivity scaling rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// Fixed conductivity value.
    Value(f64),
    /// The moderate regime σ_m ~ 1 (value 1 in scenario units).
    Moderate,
    /// The contrasted regime Im τ = 1/(a²|log a|^{1+h+s}), i.e.
    /// σ_m = ω/(a²|log a|^{1+h+s}); `s ≥ 0` is the extra damping exponent.
    Contrasted { s: f64 },
}

/// Particle reference shape B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleShape {
    Disc,
    /// Area-preserving ellipse with semi-axis scales `(aspect, 1/aspect)`.
    Ellipse { aspect: f64 },
}

/// One injected nanoparticle `D_m = z_m + a·B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nanoparticle {
    pub center: Point,
    pub radius: f64,
    pub shape: ParticleShape,
    pub eps_rel: EpsRule,
    pub sigma_m: SigmaRule,
}

/// Incident-wave drive: explicit frequency or detuning around a resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Explicit { omega: f64 },
    /// ω²_± = ω²_{n₀}(1 ± |log a|^{−h}) around resonant mode `n0` (index
    /// into the Hypotheses-1-satisfying modes, 1-based).
    Detuned { n0: usize, h: f64, sign: i8 },
}

/// Incident plane wave `u^i = e^{iωn₀ d·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentWave {
    pub direction: Point,
    pub drive: Drive,
}

impl IncidentWave {
    /// Detuning exponent h when the drive is detuned.
    pub fn h(&self) -> Option<f64> {
        match self.drive {
            Drive::Detuned { h, .. } => Some(h),
            Drive::Explicit { .. } => None,
        }
    }
}

/// Acoustic sensors on ∂Ω with a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    pub points: Vec<Point>,
    pub times: Vec<f64>,
}

/// Numerical knobs (all deterministic; the seed feeds any randomized
/// meshing or noise injection downstream).
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub seed: u64,
    /// Cells per particle mesh.
    pub mesh_cells: usize,
    /// Radial modes kept per angular order in the disc spectrum.
    pub modes_per_order: usize,
    /// Max angular order k of disc modes.
    pub modes_k_max: i32,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            seed: 0,
            mesh_cells: 512,
            modes_per_order: 6,
            modes_k_max: 4,
        }
    }
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: BackgroundMedium,
    pub particles: Vec<Nanoparticle>,
    pub wave: IncidentWave,
    pub sensors: SensorLayout,
    pub numerics: Numerics,
}

impl Scenario {
    /// Validates every model invariant; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let m = &self.medium;
        if !(m.eps_r > 0.0) {
            return Err(Error::invariant("eps_r > 0", format!("eps_r = {}", m.eps_r)));
        }
        if m.sigma_omega < 0.0 {
            return Err(Error::invariant(
                "sigma_omega >= 0",
                format!("sigma_omega = {}", m.sigma_omega),
            ));
        }
        if !(m.mu0 > 0.0) {
            return Err(Error::invariant("mu0 > 0", format!("mu0 = {}", m.mu0)));
        }
        if !(m.c_s > 0.0) {
            return Err(Error::invariant("c_s > 0", format!("c_s = {}", m.c_s)));
        }
        let diam = m.domain.diam();
        if !(diam.is_finite() && diam > 0.0) {
            return Err(Error::invariant("Omega bounded", format!("diam = {diam}")));
        }

        let d = self.wave.direction;
        let nd = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if (nd - 1.0).abs() > 1e-10 {
            return Err(Error::invariant(
                "|direction| = 1",
                format!("|d| = {nd}"),
            ));
        }
        match self.wave.drive {
            Drive::Explicit { omega } => {
                if !(omega > 0.0) {
                    return Err(Error::invariant("omega > 0", format!("omega = {omega}")));
                }
            }
            Drive::Detuned { h, sign, n0 } => {
                if !(h > 0.0 && h < 1.0) {
                    return Err(Error::invariant("0 < h < 1", format!("h = {h}")));
                }
                if sign != 1 && sign != -1 {
                    return Err(Error::invariant("detuning sign ∈ {+, −}", format!("sign = {sign}")));
                }
                if n0 == 0 {
                    return Err(Error::invariant("mode index n0 ≥ 1", "n0 = 0".to_string()));
                }
            }
        }

        for (i, p) in self.particles.iter().enumerate() {
            if !(p.radius > 0.0) {
                return Err(Error::invariant(
                    "particle radius > 0",
                    format!("particle {i}: a = {}", p.radius),
                ));
            }
            if p.radius > diam / 100.0 {
                return Err(Error::invariant(
                    "a <= diam(Omega)/100",
                    format!("particle {i}: a = {}, diam(Omega) = {diam}", p.radius),
                ));
            }
            if !m.domain.contains_disc(p.center, p.radius) {
                return Err(Error::invariant(
                    "disc(z, a) ⊂ Omega",
                    format!("particle {i} at {:?} with a = {}", p.center, p.radius),
                ));
            }
            if let ParticleShape::Ellipse { aspect } = p.shape {
                if !(aspect > 0.0) {
                    return Err(Error::invariant(
                        "ellipse aspect > 0",
                        format!("particle {i}: aspect = {aspect}"),
                    ));
                }
            }
            if let SigmaRule::Contrasted { s } = p.sigma_m {
                if s < 0.0 {
                    return Err(Error::invariant(
                        "contrast exponent s >= 0",
                        format!("particle {i}: s = {s}"),
                    ));
                }
            }
        }

        // Identical materials across particles (paper assumption).
        if let Some(first) = self.particles.first() {
            for (i, p) in self.particles.iter().enumerate().skip(1) {
                if p.eps_rel != first.eps_rel
                    || p.sigma_m != first.sigma_m
                    || p.radius != first.radius
                {
                    return Err(Error::invariant(
                        "identical particle materials (ε₁ = ⋯ = ε_M, same a)",
                        format!("particle {i} differs from particle 0"),
                    ));
                }
            }
        }

        // Pairwise separation vs the Foldy–Lax invertibility condition
        // d ≥ exp(−|log a|^{1−h}) (only meaningful with detuning).
        if let Some(h) = self.wave.h() {
            for i in 0..self.particles.len() {
                for j in i + 1..self.particles.len() {
                    let a = self.particles[i].radius;
                    let dmin = (-(a.ln().abs().powf(1.0 - h))).exp();
                    let dij = crate::dist(self.particles[i].center, self.particles[j].center);
                    if dij < dmin {
                        return Err(Error::invariant(
                            "pairwise distance ≥ exp(−|log a|^{1−h}) (invertibility condition)",
                            format!("particles {i},{j}: d = {dij:.3e} < {dmin:.3e}"),
                        ));
                    }
                }
            }
        }

        // Sensors on ∂Ω; times nonnegative, strictly increasing.
        for (i, p) in self.sensors.points.iter().enumerate() {
            let dist = m.domain.boundary_distance(*p);
            if dist > 1e-10 * diam {
                return Err(Error::invariant(
                    "sensor points on ∂Omega (to 1e-10 relative)",
                    format!("sensor {i} at {:?} is {dist:.3e} from ∂Omega", p),
                ));
            }
        }
        for w in self.sensors.times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invariant(
                    "sensor times strictly increasing",
                    format!("{} !< {}", w[0], w[1]),
                ));
            }
        }
        if let Some(&t0) = self.sensors.times.first() {
            if t0 < 0.0 {
                return Err(Error::invariant(
                    "sensor times nonnegative",
                    format!("t₀ = {t0}"),
                ));
            }
        }
        Ok(())
    }
}

/// Permittivity contrast τ = ε_p − ε₀(z) of one particle, with
/// ε_p = ε_{m,r} + i σ_m/ω and scaling rules expanded using the
/// particle's radius and the scenario's (h, s).
pub fn contrast_tau(scenario: &Scenario, particle_index: usize, omega: f64) -> Result<Complex> {
    let p = scenario
        .particles
        .get(particle_index)
        .ok_or_else(|| Error::invalid(format!("no particle with index {particle_index}")))?;
    if omega == 0.0 {
        return Err(Error::invalid(
            "contrast_tau requires omega != 0 (sigma/omega undefined)".to_string(),
        ));
    }
    let a = p.radius;
    let la = a.ln().abs();
    let eps_p_re = match p.eps_rel {
        EpsRule::Value(v) => v,
        EpsRule::Auto => 1.0 / (a * a * la),
    };
    let sigma = match p.sigma_m {
        SigmaRule::Value(v) => v,
        SigmaRule::Moderate => 1.0,
        SigmaRule::Contrasted { s } => {
            let h = scenario.wave.h().ok_or_else(|| {
                Error::invalid(
                    "contrasted sigma rule needs a detuned drive (it uses the exponent h)"
                        .to_string(),
                )
            })?;
            // Im τ = σ_m/ω = 1/(a²|log a|^{1+h+s})  ⇒  σ_m = ω/(a²|log a|^{1+h+s})
            omega / (a * a * la.powf(1.0 + h + s))
        }
    };
    let eps_p = Complex::new(eps_p_re, sigma / omega);
    Ok(eps_p - scenario.medium.eps0(omega))
}

// ---------------------------------------------------------------------------
// Scenario file schema (TOML, schema_version = 1)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    medium: MediumFile,
    #[serde(default)]
    particles: Vec<ParticleFile>,
    wave: WaveFile,
    sensors: SensorsFile,
    #[serde(default)]
    numerics: NumericsFile,
}

#[derive(Debug, Serialize, Deserialize)]
struct MediumFile {
    shape: String,
    #[serde(default)]
    center: Option<[f64; 2]>,
    #[serde(default)]
    radius: Option<f64>,
    #[serde(default)]
    corner: Option<[f64; 2]>,
    #[serde(default)]
    size: Option<[f64; 2]>,
    eps_r: f64,
    sigma: f64,
    #[serde(default = "one")]
    eps_vac: f64,
    #[serde(default = "one")]
    mu0: f64,
    #[serde(default = "one")]
    c_s: f64,
    #[serde(default = "one")]
    beta0: f64,
    #[serde(default = "one")]
    c_p: f64,
    #[serde(default)]
    normalize_pressure_constant: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct ParticleFile {
    center: [f64; 2],
    radius: f64,
    #[serde(default = "disc_str")]
    shape: String,
    #[serde(default)]
    aspect: Option<f64>,
    eps_rel: NumOrStr,
    sigma_m: NumOrStr,
    #[serde(default)]
    s: Option<f64>,
}

fn disc_str() -> String {
    "disc".to_string()
}

#[derive(Debug, Serialize, Deserialize)]
struct WaveFile {
    direction: [f64; 2],
    #[serde(default)]
    omega: Option<f64>,
    #[serde(default)]
    mode: Option<usize>,
    #[serde(default)]
    h: Option<f64>,
    #[serde(default)]
    sign: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PointsSpec {
    Uniform(String),
    Explicit(Vec<[f64; 2]>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TimesSpec {
    Grid { start: f64, stop: f64, count: usize },
    Explicit(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
struct SensorsFile {
    points: PointsSpec,
    times: TimesSpec,
}

#[derive(Debug, Serialize, Deserialize, Default)]
struct NumericsFile {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    mesh_cells: Option<usize>,
    #[serde(default)]
    modes_per_order: Option<usize>,
    #[serde(default)]
    modes_k_max: Option<i32>,
}

fn build_scenario(file: ScenarioFile) -> Result<Scenario> {
    if file.schema_version != 1 {
        return Err(Error::ScenarioParse(format!(
            "unsupported schema_version {} (expected 1)",
            file.schema_version
        )));
    }
    let domain = match file.medium.shape.as_str() {
        "disc" => OmegaDomain::Disc {
            center: file.medium.center.ok_or_else(|| {
                Error::ScenarioParse("[medium] shape = \"disc\" requires `center`".to_string())
            })?,
            radius: file.medium.radius.ok_or_else(|| {
                Error::ScenarioParse("[medium] shape = \"disc\" requires `radius`".to_string())
            })?,
        },
        "rectangle" => OmegaDomain::Rectangle {
            corner: file.medium.corner.ok_or_else(|| {
                Error::ScenarioParse("[medium] shape = \"rectangle\" requires `corner`".to_string())
            })?,
            size: file.medium.size.ok_or_else(|| {
                Error::ScenarioParse("[medium] shape = \"rectangle\" requires `size`".to_string())
            })?,
        },
        other => {
            return Err(Error::ScenarioParse(format!(
                "[medium] shape must be \"disc\" or \"rectangle\", got \"{other}\""
            )))
        }
    };
    let medium = BackgroundMedium {
        eps_r: file.medium.eps_r,
        sigma_omega: file.medium.sigma,
        eps_vac: file.medium.eps_vac,
        mu0: file.medium.mu0,
        c_s: file.medium.c_s,
        beta0: file.medium.beta0,
        c_p: file.medium.c_p,
        domain,
        normalize_pressure_constant: file.medium.normalize_pressure_constant,
    };

    let mut particles = Vec::with_capacity(file.particles.len());
    for (i, p) in file.particles.iter().enumerate() {
        let shape = match p.shape.as_str() {
            "disc" => ParticleShape::Disc,
            "ellipse" => ParticleShape::Ellipse {
                aspect: p.aspect.ok_or_else(|| {
                    Error::ScenarioParse(format!(
                        "particle {i}: shape = \"ellipse\" requires `aspect`"
                    ))
                })?,
            },
            other => {
                return Err(Error::ScenarioParse(format!(
                    "particle {i}: shape must be \"disc\" or \"ellipse\", got \"{other}\""
                )))
            }
        };
        let eps_rel = match &p.eps_rel {
            NumOrStr::Num(v) => EpsRule::Value(*v),
            NumOrStr::Str(s) if s == "auto" => EpsRule::Auto,
            NumOrStr::Str(s) => {
                return Err(Error::ScenarioParse(format!(
                    "particle {i}: eps_rel must be a number or \"auto\", got \"{s}\""
                )))
            }
        };
        let sigma_m = match &p.sigma_m {
            NumOrStr::Num(v) => SigmaRule::Value(*v),
            NumOrStr::Str(s) if s == "moderate" => SigmaRule::Moderate,
            NumOrStr::Str(s) if s == "contrasted" => SigmaRule::Contrasted {
                s: p.s.unwrap_or(0.0),
            },
            NumOrStr::Str(s) => {
                return Err(Error::ScenarioParse(format!(
                    "particle {i}: sigma_m must be a number, \"moderate\", or \"contrasted\", got \"{s}\""
                )))
            }
        };
        particles.push(Nanoparticle {
            center: p.center,
            radius: p.radius,
            shape,
            eps_rel,
            sigma_m,
        });
    }

    let drive = match (file.wave.omega, file.wave.mode) {
        (Some(omega), None) => Drive::Explicit { omega },
        (None, Some(mode)) => {
            let h = file.wave.h.ok_or_else(|| {
                Error::ScenarioParse("[wave] detuned drive requires `h`".to_string())
            })?;
            let sign = match file.wave.sign.as_deref() {
                Some("+") | None => 1,
                Some("-") => -1,
                Some(other) => {
                    return Err(Error::ScenarioParse(format!(
                        "[wave] sign must be \"+\" or \"-\", got \"{other}\""
                    )))
                }
            };
            Drive::Detuned { n0: mode, h, sign }
        }
        (Some(_), Some(_)) => {
            return Err(Error::ScenarioParse(
                "[wave] give either `omega` or `mode`, not both".to_string(),
            ))
        }
        (None, None) => {
            return Err(Error::ScenarioParse(
                "[wave] requires `omega` (explicit) or `mode` (detuned)".to_string(),
            ))
        }
    };
    let wave = IncidentWave {
        direction: file.wave.direction,
        drive,
    };

    let points = match file.sensors.points {
        PointsSpec::Explicit(v) => v,
        PointsSpec::Uniform(s) => {
            let n: usize = s
                .strip_prefix("uniform:")
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| {
                    Error::ScenarioParse(format!(
                        "[sensors] points must be \"uniform:N\" or a point list, got \"{s}\""
                    ))
                })?;
            medium.domain.boundary_points(n)
        }
    };
    let times = match file.sensors.times {
        TimesSpec::Explicit(v) => v,
        TimesSpec::Grid { start, stop, count } => {
            if count < 2 || !(stop > start) {
                return Err(Error::ScenarioParse(format!(
                    "[sensors] time grid needs stop > start and count ≥ 2 (start {start}, stop {stop}, count {count})"
                )));
            }
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    };
    let sensors = SensorLayout { points, times };

    let defaults = Numerics::default();
    let numerics = Numerics {
        seed: file.numerics.seed.unwrap_or(defaults.seed),
        mesh_cells: file.numerics.mesh_cells.unwrap_or(defaults.mesh_cells),
        modes_per_order: file
            .numerics
            .modes_per_order
            .unwrap_or(defaults.modes_per_order),
        modes_k_max: file.numerics.modes_k_max.unwrap_or(defaults.modes_k_max),
    };

    let scenario = Scenario {
        medium,
        particles,
        wave,
        sensors,
        numerics,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn to_file(s: &Scenario) -> ScenarioFile {
    let (shape, center, radius, corner, size) = match s.medium.domain {
        OmegaDomain::Disc { center, radius } => {
            ("disc".to_string(), Some(center), Some(radius), None, None)
        }
        OmegaDomain::Rectangle { corner, size } => {
            ("rectangle".to_string(), None, None, Some(corner), Some(size))
        }
    };
    ScenarioFile {
        schema_version: 1,
        medium: MediumFile {
            shape,
            center,
            radius,
            corner,
            size,
            eps_r: s.medium.eps_r,
            sigma: s.medium.sigma_omega,
            eps_vac: s.medium.eps_vac,
            mu0: s.medium.mu0,
            c_s: s.medium.c_s,
            beta0: s.medium.beta0,
            c_p: s.medium.c_p,
            normalize_pressure_constant: s.medium.normalize_pressure_constant,
        },
        particles: s
            .particles
            .iter()
            .map(|p| ParticleFile {
                center: p.center,
                radius: p.radius,
                shape: match p.shape {
                    ParticleShape::Disc => "disc".to_string(),
                    ParticleShape::Ellipse { .. } => "ellipse".to_string(),
                },
                aspect: match p.shape {
                    ParticleShape::Ellipse { aspect } => Some(aspect),
                    ParticleShape::Disc => None,
                },
                eps_rel: match p.eps_rel {
                    EpsRule::Value(v) => NumOrStr::Num(v),
                    EpsRule::Auto => NumOrStr::Str("auto".to_string()),
                },
                sigma_m: match p.sigma_m {
                    SigmaRule::Value(v) => NumOrStr::Num(v),
                    SigmaRule::Moderate => NumOrStr::Str("moderate".to_string()),
                    SigmaRule::Contrasted { .. } => NumOrStr::Str("contrasted".to_string()),
                },
                s: match p.sigma_m {
                    SigmaRule::Contrasted { s } => Some(s),
                    _ => None,
                },
            })
            .collect(),
        wave: WaveFile {
            direction: s.wave.direction,
            omega: match s.wave.drive {
                Drive::Explicit { omega } => Some(omega),
                _ => None,
            },
            mode: match s.wave.drive {
                Drive::Detuned { n0, .. } => Some(n0),
                _ => None,
            },
            h: match s.wave.drive {
                Drive::Detuned { h, .. } => Some(h),
                _ => None,
            },
            sign: match s.wave.drive {
                Drive::Detuned { sign, .. } => Some(if sign >= 0 { "+" } else { "-" }.to_string()),
                _ => None,
            },
        },
        sensors: SensorsFile {
            points: PointsSpec::Explicit(s.sensors.points.clone()),
            times: TimesSpec::Explicit(s.sensors.times.clone()),
        },
        numerics: NumericsFile {
            seed: Some(s.numerics.seed),
            mesh_cells: Some(s.numerics.mesh_cells),
            modes_per_order: Some(s.numerics.modes_per_order),
            modes_k_max: Some(s.numerics.modes_k_max),
        },
    }
}

/// Loads and validates a scenario file (TOML, `schema_version = 1`).
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io {
        context: format!("reading scenario {}", path.as_ref().display()),
        source: e,
    })?;
    load_scenario_str(&text)
}

/// Parses and validates scenario TOML from a string.
pub fn load_scenario_str(text: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    build_scenario(file)
}

/// Serializes a scenario back to TOML (explicit sensor lists; the
/// round trip `load(save(S)) = S` holds field-for-field).
pub fn save_scenario(s: &Scenario) -> Result<String> {
    toml::to_string_pretty(&to_file(s)).map_err(|e| Error::ScenarioParse(e.to_string()))
}
