//! Acoustic forward model and the two acoustic inversion procedures.
//!
//! The pressure solves the free-space wave equation with initial data
//! `p(·,0) = (ωβ₀/c_p)·Im(ε)|u|²` and `∂_t p(·,0) = 0`; for constant
//! speed it is given by the Poisson formula
//!
//! ```text
//! p(x,t) = (ωβ₀/(2π c_s c_p)) ∂_t ∫_{|x−y|<c_s t} H(y)/√(c_s²t²−|x−y|²) dy,
//! ```
//!
//! with `H = Im(ε)|u|²`. Writing the volume integral through circular
//! means `M(H)(x,r)` and composing two Abel-type operators yields the
//! exact inversion pair used here (all constants re-derived from the
//! Poisson formula itself; the printed circular-means constant in the
//! source material is dimensionally inconsistent and is not used):
//!
//! ```text
//! M(H)(x,r) = (1/(P π²)) ∫_0^{r/c_s} p(x,t)/√(r² − c_s²t²) dt,
//! ```
//!
//! where `P` is the prefactor actually applied in the forward map
//! (`ωβ₀/(2π c_s c_p)`, or `1/c_s` in the constants-normalized mode that
//! omits `ωβ₀/(2π c_p)`). The filtered backprojection
//!
//! ```text
//! H(x) = (1/2πR₀) ∫_{∂Ω} ∫_0^{2R₀} (∂_r r ∂_r M)(p,r) log|r² − |x−p|²| dr dσ(p)
//! ```
//!
//! recovers `H` on a disc (Case 1); the Dirichlet sine eigenbasis of the
//! rectangle recovers it from boundary traces through time-resolved modal
//! coefficients (Case 2).
//!
//! The numerical forward map reconstructs, per sensor, the radial mass
//! density μ(ρ) of the source on a fine node grid (annular-overlap
//! deposition, mollified at the cell scale), and evaluates the exact
//! `ρ = c_s t sin θ` form of the Poisson integral,
//! `p(t) = P·c_s ∫₀^{π/2} μ′(c_s t sin θ) sin θ dθ`, in closed form for
//! the piecewise-linear density — the time derivative is analytic and
//! free of wavefront singularities; no differencing of discrete data.

use rayon::prelude::*;

use crate::forward_em::FieldSolution;
use crate::model::{OmegaDomain, Scenario};
use crate::{Error, Point, Result};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

/// One cell of an initial-pressure map.
#[derive(Debug, Clone, Copy)]
pub struct MapCell {
    pub center: Point,
    pub area: f64,
    /// Radial half-extent used when binning (half the cell diameter).
    pub radius: f64,
    /// Raw source value `Im(ε)|u|²` (the ωβ₀/c_p constant is applied by
    /// the forward map, not stored here).
    pub value: f64,
    pub inside_particle: bool,
}

/// Cell-wise initial pressure `H = Im(ε)|u|²` over Ω.
#[derive(Debug, Clone)]
pub struct InitialPressureMap {
    pub cells: Vec<MapCell>,
    /// The constant ωβ₀/c_p of the scenario.
    pub constant: f64,
    /// When set, the forward map omits ωβ₀/(2π c_p) (formula-level
    /// comparisons); recorded in every derived PressureRecord.
    pub normalized: bool,
}

impl InitialPressureMap {
    /// Builds the map from a solved electromagnetic field: particle
    /// cells carry `Im(ε_p)|v|²`, the background carries
    /// `Im(ε₀)|u|²` on a `bg_grid × bg_grid` grid over Ω (points closer
    /// than 1.5 particle radii to a particle are covered by the particle
    /// mesh and skipped).
    pub fn from_field(
        scenario: &Scenario,
        field: &FieldSolution,
        bg_grid: usize,
    ) -> Result<Self> {
        let omega = field.omega;
        let im_eps0 = scenario.medium.eps0(omega).im;
        let mut cells = Vec::new();
        for (m, mesh) in field.particle_meshes.iter().enumerate() {
            let tau = crate::model::contrast_tau(scenario, m, omega)?;
            let im_eps_p = tau.im + im_eps0;
            for (c, &v) in mesh.cells.iter().zip(&field.v[m]) {
                cells.push(MapCell {
                    center: c.centroid,
                    area: c.area,
                    radius: 0.5 * c.diameter(),
                    value: im_eps_p * v.norm_sqr(),
                    inside_particle: true,
                });
            }
        }
        if im_eps0 > 0.0 && bg_grid > 0 {
            let (lo, hi) = bounding_box(&scenario.medium.domain);
            let hx = (hi[0] - lo[0]) / bg_grid as f64;
            let hy = (hi[1] - lo[1]) / bg_grid as f64;
            let mut pts = Vec::new();
            for i in 0..bg_grid {
                for j in 0..bg_grid {
                    let p = [lo[0] + (i as f64 + 0.5) * hx, lo[1] + (j as f64 + 0.5) * hy];
                    if !inside(&scenario.medium.domain, p) {
                        continue;
                    }
                    if field
                        .particle_meshes
                        .iter()
                        .any(|m| crate::dist(p, m.center) < 1.6 * m.radius)
                    {
                        continue;
                    }
                    pts.push(p);
                }
            }
            let u = field.exterior_field(scenario, &pts)?;
            for (p, u) in pts.iter().zip(&u) {
                cells.push(MapCell {
                    center: *p,
                    area: hx * hy,
                    radius: 0.5 * (hx * hx + hy * hy).sqrt(),
                    value: im_eps0 * u.norm_sqr(),
                    inside_particle: false,
                });
            }
        }
        Ok(InitialPressureMap {
            cells,
            constant: omega * scenario.medium.beta0 / scenario.medium.c_p,
            normalized: scenario.medium.normalize_pressure_constant,
        })
    }

    /// Phantom constructor: samples `f` on a `grid × grid` grid over the
    /// bounding box of Ω, keeping cells whose centers lie inside.
    pub fn from_fn(
        domain: &OmegaDomain,
        grid: usize,
        f: impl Fn(Point) -> f64,
        constant: f64,
        normalized: bool,
    ) -> Result<Self> {
        if grid < 4 {
            return Err(Error::invalid(format!("phantom grid {grid} too coarse")));
        }
        let (lo, hi) = bounding_box(domain);
        let hx = (hi[0] - lo[0]) / grid as f64;
        let hy = (hi[1] - lo[1]) / grid as f64;
        let mut cells = Vec::new();
        for i in 0..grid {
            for j in 0..grid {
                let p = [lo[0] + (i as f64 + 0.5) * hx, lo[1] + (j as f64 + 0.5) * hy];
                if inside(domain, p) {
                    cells.push(MapCell {
                        center: p,
                        area: hx * hy,
                        radius: 0.5 * (hx * hx + hy * hy).sqrt(),
                        value: f(p),
                        inside_particle: false,
                    });
                }
            }
        }
        Ok(InitialPressureMap {
            cells,
            constant,
            normalized,
        })
    }

    /// `∫ H dy`.
    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.area * c.value).sum()
    }

    /// Nearest-cell lookup of the raw source value (0 outside the map).
    pub fn value_at(&self, x: Point) -> f64 {
        self.cells
            .iter()
            .filter(|c| crate::dist(c.center, x) <= 1.5 * c.radius.max(1e-300))
            .map(|c| (crate::dist(c.center, x), c.value))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .map(|(_, v)| v)
            .unwrap_or(0.0)
    }

    /// Map with all values scaled (linearity checks).
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.value *= alpha;
        }
        out
    }
}

fn bounding_box(domain: &OmegaDomain) -> (Point, Point) {
    match domain {
        OmegaDomain::Disc { center, radius } => (
            [center[0] - radius, center[1] - radius],
            [center[0] + radius, center[1] + radius],
        ),
        OmegaDomain::Rectangle { corner, size } => {
            (*corner, [corner[0] + size[0], corner[1] + size[1]])
        }
    }
}

fn inside(domain: &OmegaDomain, p: Point) -> bool {
    match domain {
        OmegaDomain::Disc { center, radius } => crate::dist(p, *center) < *radius,
        OmegaDomain::Rectangle { corner, size } => {
            p[0] > corner[0]
                && p[0] < corner[0] + size[0]
                && p[1] > corner[1]
                && p[1] < corner[1] + size[1]
        }
    }
}

/// How a pressure record was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Poisson,
    FdOracle,
    AsymptoticModel,
}

/// Boundary pressure traces `p(x_i, t_j)`.
#[derive(Debug, Clone)]
pub struct PressureRecord {
    pub sensors: Vec<Point>,
    pub times: Vec<f64>,
    /// `values[i][j] = p(sensors[i], times[j])`.
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
    /// Constants-normalized flag (ωβ₀/(2π c_p) omitted when set).
    pub normalized: bool,
    /// The prefactor `P` with `p = P·∂_t ∫ H/√(c_s²t²−r²) dy` actually
    /// applied; the inversion formulas divide by it.
    pub prefactor: f64,
    pub c_s: f64,
}

impl PressureRecord {
    pub fn value(&self, sensor: usize, time_idx: usize) -> f64 {
        self.values[sensor][time_idx]
    }

    /// Linear interpolation in time (t inside the grid span).
    pub fn interp(&self, sensor: usize, t: f64) -> Result<f64> {
        let ts = &self.times;
        if t < ts[0] - 1e-12 || t > *ts.last().unwrap() + 1e-12 {
            return Err(Error::invalid(format!(
                "time {t} outside record span [{}, {}]",
                ts[0],
                ts.last().unwrap()
            )));
        }
        let t = t.clamp(ts[0], *ts.last().unwrap());
        let j = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(j) => return Ok(self.values[sensor][j]),
            Err(j) => j.clamp(1, ts.len() - 1),
        };
        let (t0, t1) = (ts[j - 1], ts[j]);
        let w = (t - t0) / (t1 - t0);
        Ok((1.0 - w) * self.values[sensor][j - 1] + w * self.values[sensor][j])
    }
}

/// Linear combination of records on identical sensor/time grids.
pub fn combine_records(terms: &[(f64, &PressureRecord)]) -> Result<PressureRecord> {
    let first = terms
        .first()
        .ok_or_else(|| Error::invalid("empty combination".to_string()))?
        .1;
    for (_, r) in terms {
        if r.sensors.len() != first.sensors.len()
            || r.times.len() != first.times.len()
            || r.normalized != first.normalized
            || (r.c_s - first.c_s).abs() > 1e-14
        {
            return Err(Error::invalid(
                "pressure records must share sensors, times, c_s, and normalization".to_string(),
            ));
        }
    }
    let mut out = first.clone();
    for row in &mut out.values {
        for v in row.iter_mut() {
            *v = 0.0;
        }
    }
    for (w, r) in terms {
        for (o, rv) in out.values.iter_mut().zip(&r.values) {
            for (a, b) in o.iter_mut().zip(rv) {
                *a += w * b;
            }
        }
    }
    Ok(out)
}

/// `p⁺ + p⁻ − 2p₀` (the one-particle combination).
pub fn symmetric_combination(
    p_plus: &PressureRecord,
    p_minus: &PressureRecord,
    p_zero: &PressureRecord,
) -> Result<PressureRecord> {
    combine_records(&[(1.0, p_plus), (1.0, p_minus), (-2.0, p_zero)])
}

/// `p̃ = (p⁺ − p₀) + ((1−ω²_{n₀})/(1+ω²_{n₀}))(p⁻ − p₀)` (the dimer
/// combination).
pub fn tilde_combination(
    p_plus: &PressureRecord,
    p_minus: &PressureRecord,
    p_zero: &PressureRecord,
    omega_n0_sq: f64,
) -> Result<PressureRecord> {
    let w = (1.0 - omega_n0_sq) / (1.0 + omega_n0_sq);
    combine_records(&[(1.0, p_plus), (w, p_minus), (-1.0 - w, p_zero)])
}

fn prefactor(map: &InitialPressureMap, c_s: f64) -> f64 {
    if map.normalized {
        1.0 / c_s
    } else {
        map.constant / (TWO_PI * c_s)
    }
}

/// Free-space Poisson-formula evaluation at arbitrary points (used by
/// the boundary forward map and by interior invariant checks).
pub fn forward_pressure_free(
    map: &InitialPressureMap,
    points: &[Point],
    times: &[f64],
    c_s: f64,
) -> Result<PressureRecord> {
    if !(c_s > 0.0) {
        return Err(Error::invalid(format!("c_s must be positive, got {c_s}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|&t| t < 0.0) {
        return Err(Error::invalid("times must be nonnegative and increasing".to_string()));
    }
    let pref = prefactor(map, c_s);
    let n_bins = 3000usize.max(2 * (map.cells.len() as f64).sqrt() as usize);
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&x| {
            // Bin the map into radial annuli around the sensor. The
            // grid extends past the support so the mollified density
            // tapers to zero inside it (a clamped edge would bias the
            // outer slope).
            let max_radius = map.cells.iter().map(|c| c.radius).fold(0.0f64, f64::max);
            let rho_hi = map
                .cells
                .iter()
                .map(|c| crate::dist(c.center, x) + c.radius)
                .fold(0.0f64, f64::max)
                .max(1e-12)
                * 1.01
                + 8.0 * max_radius;
            let dr = rho_hi / n_bins as f64;
            // Node-based radial mass density μ(ρ) (piecewise linear
            // between nodes ρ_j = j·dr). Each cell is treated as a disc
            // of its half-diameter; its mass is spread with the exact
            // annular-overlap profile w(ρ) = ρ·θ(ρ) (θ the subtended
            // angle), which preserves the local slope of the density —
            // a uniform spread would flatten it and corrupt the
            // analytic time derivative near the sensor.
            let mut dens = vec![0.0f64; n_bins + 1];
            let mut wbuf = Vec::new();
            // Deposit a mass at radius ρ onto the two adjacent nodes
            // with linear weights: exact total mass and first moment in
            // the hat-function (piecewise-linear) representation.
            let deposit = |dens: &mut Vec<f64>, rho: f64, m: f64| {
                let s = (rho / dr).min(n_bins as f64 - 1e-9);
                let j = s as usize;
                let f = s - j as f64;
                dens[j] += m * (1.0 - f) / dr;
                dens[j + 1] += m * f / dr;
            };
            for c in &map.cells {
                if c.value == 0.0 {
                    continue;
                }
                let rho_c = crate::dist(c.center, x);
                let delta = c.radius;
                let m = c.area * c.value;
                let (ra, rb) = ((rho_c - delta).max(0.0), rho_c + delta);
                // Sub-slice the band and weight slices by the overlap
                // profile w(ρ) = ρ·θ(ρ) (θ the angle subtended by the
                // cell disc on the circle of radius ρ).
                let n_s = (4.0 * (rb - ra) / dr).ceil().clamp(4.0, 64.0) as usize;
                let ds = (rb - ra) / n_s as f64;
                wbuf.clear();
                let mut wsum = 0.0;
                for s in 0..n_s {
                    let rho = ra + (s as f64 + 0.5) * ds;
                    let w = if rho <= delta - rho_c {
                        TWO_PI * rho
                    } else {
                        let cosang =
                            ((rho * rho + rho_c * rho_c - delta * delta) / (2.0 * rho * rho_c))
                                .clamp(-1.0, 1.0);
                        2.0 * rho * cosang.acos()
                    };
                    wbuf.push(w);
                    wsum += w;
                }
                if wsum <= 0.0 {
                    deposit(&mut dens, rho_c, m);
                } else {
                    for (s, w) in wbuf.iter().enumerate() {
                        let rho = ra + (s as f64 + 0.5) * ds;
                        deposit(&mut dens, rho, m * w / wsum);
                    }
                }
            }
            // Mollify the density at the cell scale: the pressure reads
            // off μ′ near the wavefront, and the cell-by-cell overlap
            // reconstruction is only meaningful above the cell size.
            // Odd reflection at ρ = 0 keeps the exact origin slope
            // (μ = 2πρ·H(x) + O(ρ³) is odd to leading order).
            let sigma_s = max_radius;
            if sigma_s > dr {
                let half = ((3.0 * sigma_s / dr).ceil() as i64).min(n_bins as i64);
                let kern: Vec<f64> = (-half..=half)
                    .map(|q| (-0.5 * (q as f64 * dr / sigma_s).powi(2)).exp())
                    .collect();
                let ksum: f64 = kern.iter().sum();
                let raw = dens.clone();
                let fetch = |j: i64| -> f64 {
                    if j >= 0 {
                        raw[(j as usize).min(n_bins)]
                    } else {
                        -raw[((-j) as usize).min(n_bins)]
                    }
                };
                for (j, d) in dens.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (q, kw) in (-half..=half).zip(&kern) {
                        acc += kw * fetch(j as i64 + q);
                    }
                    *d = acc / ksum;
                }
            }
            // With ρ = c t sin θ the volume term becomes
            //   ∫ μ(ρ)/√(c²t²−ρ²) dρ = ∫₀^{π/2} μ(c t sin θ) dθ,
            // so the time derivative is analytic and singularity-free:
            //   p(t) = P·c·∫₀^{π/2} μ′(c t sin θ) sin θ dθ.
            // For the piecewise-linear μ the integral is exact:
            //   p(t) = P·c·Σ_j β_j [√(c²t²−r_j²) − √(c²t²−r̂_{j+1}²)]/(ct)
            // (β_j the interval slope, radii clamped at c t); the
            // weights are nonnegative and sum to 1, so p is a weighted
            // average of the density slopes — no wavefront blow-up.
            times
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return TWO_PI * c_s * pref * map.value_at(x);
                    }
                    let ct = c_s * t;
                    let root = |rho: f64| (ct * ct - rho * rho).max(0.0).sqrt();
                    let mut acc = 0.0;
                    for j in 0..n_bins {
                        let r0 = j as f64 * dr;
                        if r0 >= ct {
                            break;
                        }
                        let r1 = (r0 + dr).min(ct);
                        let beta = (dens[j + 1] - dens[j]) / dr;
                        if beta != 0.0 {
                            acc += beta * (root(r0) - root(r1));
                        }
                    }
                    pref * c_s * acc / ct
                })
                .collect()
        })
        .collect();
    Ok(PressureRecord {
        sensors: points.to_vec(),
        times: times.to_vec(),
        values,
        provenance: Provenance::Poisson,
        normalized: map.normalized,
        prefactor: pref,
        c_s,
    })
}

/// Boundary forward map: sensors must lie on ∂Ω.
pub fn forward_pressure_poisson(
    map: &InitialPressureMap,
    domain: &OmegaDomain,
    sensors: &[Point],
    times: &[f64],
    c_s: f64,
) -> Result<PressureRecord> {
    let tol = 1e-8 * domain.diam().max(1.0);
    for (i, &s) in sensors.iter().enumerate() {
        if domain.boundary_distance(s) > tol {
            return Err(Error::invalid(format!(
                "sensor {i} at {s:?} is off ∂Ω (distance {:.3e})",
                domain.boundary_distance(s)
            )));
        }
    }
    forward_pressure_free(map, sensors, times, c_s)
}

/// Recovers circular means `M(H)(x, r)` of the initial source around a
/// boundary sensor from its pressure trace.
pub fn circular_means_from_pressure(
    record: &PressureRecord,
    domain: &OmegaDomain,
    sensor: usize,
    radii: &[f64],
) -> Result<Vec<f64>> {
    if sensor >= record.sensors.len() {
        return Err(Error::invalid(format!("no sensor {sensor}")));
    }
    let r_max = domain.diam();
    let (nodes, weights) = crate::specfun::gauss_legendre(48);
    radii
        .iter()
        .map(|&r| {
            if r < 0.0 || r > r_max {
                return Err(Error::invalid(format!(
                    "radius {r} outside [0, {r_max}] (twice the disc radius)"
                )));
            }
            if r == 0.0 {
                return Ok(0.0);
            }
            // (1/(Pπ²)) ∫₀^{r/c_s} p/√(r²−c_s²t²) dt with c_s t = r sin θ.
            let mut acc = 0.0;
            for (&xi, &w) in nodes.iter().zip(&weights) {
                let theta = 0.5 * PI * xi; // nodes on [0,1] → θ ∈ [0, π/2]
                let t = (r / record.c_s) * theta.sin();
                acc += w * record.interp(sensor, t)?;
            }
            acc *= 0.5 * PI;
            Ok(acc / (record.prefactor * PI * PI * record.c_s))
        })
        .collect()
}

/// Square-grid reconstruction over Ω (values 0 outside).
#[derive(Debug, Clone)]
pub struct ReconstructionGrid {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// Grid resolution per axis and cell size.
    pub n: usize,
    pub cell: f64,
    pub warnings: Vec<String>,
}

impl ReconstructionGrid {
    /// Value at the grid point nearest to `x` (0 if none within a cell).
    pub fn value_near(&self, x: Point) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| crate::dist(**p, x) <= self.cell)
            .min_by(|a, b| {
                crate::dist(*a.0, x)
                    .partial_cmp(&crate::dist(*b.0, x))
                    .unwrap()
            })
            .map(|(_, &v)| v)
            .unwrap_or(0.0)
    }

    /// Location of the maximum value.
    pub fn argmax(&self) -> Point {
        self.points
            .iter()
            .zip(&self.values)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(p, _)| *p)
            .unwrap_or([0.0, 0.0])
    }
}

/// Case 1 inversion (disc Ω, constant speed): circular means by the
/// Abel-type integral, then the filtered backprojection with the
/// log kernel integrated in closed form per radial cell.
pub fn invert_case1(
    record: &PressureRecord,
    domain: &OmegaDomain,
    grid_n: usize,
    n_radii: usize,
) -> Result<ReconstructionGrid> {
    let (center, r0) = match domain {
        OmegaDomain::Disc { center, radius } => (*center, *radius),
        OmegaDomain::Rectangle { .. } => {
            return Err(Error::invalid(
                "Case 1 inversion requires a disc observation domain".to_string(),
            ))
        }
    };
    let ns = record.sensors.len();
    let mut warnings = Vec::new();
    if ns < 32 {
        warnings.push(format!(
            "only {ns} sensors; angular resolution of the backprojection is degraded"
        ));
    }
    if n_radii < 16 {
        return Err(Error::invalid(format!("radial grid {n_radii} too coarse")));
    }
    let dr = 2.0 * r0 / n_radii as f64;
    let radii: Vec<f64> = (0..=n_radii).map(|j| j as f64 * dr).collect();

    // The Abel integrals for M(r) read the trace on [0, diam/c_s].
    let t_need = 2.0 * r0 / record.c_s;
    let (t0, t1) = (record.times[0], *record.times.last().expect("times"));
    if t0 > 0.0 || t1 < t_need {
        return Err(Error::invalid(format!(
            "Case 1 inversion needs the pressure record to span [0, {t_need}] \
             (diam/c_s), got [{t0}, {t1}]"
        )));
    }

    // Per sensor: M(r), then W = ∂_r (r ∂_r M) by 4th-order stencils.
    let w_rows: Vec<Vec<f64>> = (0..ns)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let m = circular_means_from_pressure(record, domain, i, &radii)?;
            let dm = derivative_grid(&m, dr);
            let rdm: Vec<f64> = radii.iter().zip(&dm).map(|(r, d)| r * d).collect();
            Ok(derivative_grid(&rdm, dr))
        })
        .collect::<Result<_>>()?;

    let (lo, _) = bounding_box(domain);
    let cell = 2.0 * r0 / grid_n as f64;
    let mut points = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let p = [
                lo[0] + (i as f64 + 0.5) * cell,
                lo[1] + (j as f64 + 0.5) * cell,
            ];
            if crate::dist(p, center) < r0 {
                points.push(p);
            }
        }
    }
    let values: Vec<f64> = points
        .par_iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (sensor, w_r) in record.sensors.iter().zip(&w_rows) {
                let d = crate::dist(x, *sensor);
                for (j, &w) in w_r.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let (a, b) = (
                        (radii[j] - 0.5 * dr).max(0.0),
                        (radii[j] + 0.5 * dr).min(2.0 * r0),
                    );
                    acc += w * (int_log_abs(a, b, d) + int_log_abs(a, b, -d));
                }
            }
            // Uniform sensor arc weight 2πR₀/Ns against the 1/(2πR₀)
            // prefactor of the backprojection formula.
            acc / ns as f64
        })
        .collect();

    Ok(ReconstructionGrid {
        points,
        values,
        n: grid_n,
        cell,
        warnings,
    })
}

/// `∫_a^b log|r − d| dr` (integrable across the singularity).
fn int_log_abs(a: f64, b: f64, d: f64) -> f64 {
    let f = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    f(b - d) - f(a - d)
}

/// First derivative on a uniform grid: 4th-order centered in the
/// interior, 2nd-order one-sided at the edges.
fn derivative_grid(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = if i >= 2 && i + 2 < n {
            (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h)
        } else if i == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
        } else if i == 1 {
            (v[2] - v[0]) / (2.0 * h)
        } else {
            (v[n - 1] - v[n - 3]) / (2.0 * h)
        };
    }
    out
}

/// Case 2 reconstruction output: modal coefficients of the raw source
/// in the rectangle sine basis plus the synthesized grid.
#[derive(Debug, Clone)]
pub struct Case2Reconstruction {
    /// `coeffs[(m−1)·modes + (n−1)]` is the coefficient of
    /// `φ_{mn}(x) = 2/√(LxLy)·sin(mπξ)sin(nπη)`.
    pub coeffs: Vec<f64>,
    pub modes: usize,
    pub grid: ReconstructionGrid,
}

/// Case 2 inversion (rectangle Ω, constant speed, Dirichlet sine
/// eigenbasis of −c_s²Δ): for each mode,
///
/// ```text
/// H_k = −c_s² s_k^{−2} p_k(0) + c_s² s_k^{−3} ∫₀^∞ sin(s_k t) p_k''(t) dt,
/// p_k(t) = ∫_{∂Ω} p ∂_ν φ_k dσ,
/// ```
///
/// with `s_k = c_s·μ_k` (outward-normal convention; this is the sign the
/// Green-identity derivation produces, validated by the modal round
/// trip). `p_k''` by centered differences, the t-integral by Filon-type
/// quadrature, truncated at the record span.
pub fn invert_case2(
    record: &PressureRecord,
    domain: &OmegaDomain,
    modes: usize,
    grid_n: usize,
) -> Result<Case2Reconstruction> {
    let (corner, size) = match domain {
        OmegaDomain::Rectangle { corner, size } => (*corner, *size),
        OmegaDomain::Disc { .. } => {
            return Err(Error::invalid(
                "Case 2 inversion requires a rectangular observation domain".to_string(),
            ))
        }
    };
    if record.times.len() < 8 || record.times[0] != 0.0 {
        return Err(Error::invalid(
            "Case 2 needs a dense time grid starting at t = 0".to_string(),
        ));
    }
    let c = record.c_s;
    let t_span = *record.times.last().unwrap();
    let mut warnings = Vec::new();
    if t_span < 4.0 * domain.diam() / c {
        // Crude tail bound: the 2D wave amplitude decays like t^{−2}
        // after the source leaves Ω, so the dropped sin-weighted tail is
        // of relative order (T·c/diam)^{−1}.
        warnings.push(format!(
            "time span {t_span:.3} < 4·diam/c_s = {:.3}; truncated-tail relative error ~{:.1e}",
            4.0 * domain.diam() / c,
            domain.diam() / (c * t_span)
        ));
    }
    let (lx, ly) = (size[0], size[1]);
    let perim = 2.0 * (lx + ly);
    let wgt = perim / record.sensors.len() as f64;
    let nt = record.times.len();
    let dt = record.times[1] - record.times[0];
    if record
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::invalid("Case 2 needs a uniform time grid".to_string()));
    }

    let coeffs: Vec<f64> = (0..modes * modes)
        .into_par_iter()
        .map(|idx| {
            let m = idx / modes + 1;
            let n = idx % modes + 1;
            let mu2 = PI * PI * ((m * m) as f64 / (lx * lx) + (n * n) as f64 / (ly * ly));
            let s = c * mu2.sqrt();
            // p_k(t) over the record.
            let mut pk = vec![0.0f64; nt];
            for (sensor, row) in record.sensors.iter().zip(&record.values) {
                let dn = dnu_phi(corner, size, m, n, *sensor);
                if dn != 0.0 {
                    for (a, &p) in pk.iter_mut().zip(row) {
                        *a += wgt * dn * p;
                    }
                }
            }
            // Centered second differences (copy ends from neighbors).
            let mut pk2 = vec![0.0f64; nt];
            for j in 1..nt - 1 {
                pk2[j] = (pk[j + 1] - 2.0 * pk[j] + pk[j - 1]) / (dt * dt);
            }
            pk2[0] = pk2[1];
            pk2[nt - 1] = pk2[nt - 2];
            let integral = filon_sin(&record.times, &pk2, s);
            c * c * (-pk[0] / (s * s) + integral / (s * s * s))
        })
        .collect();

    // Raw-source coefficients: the record's initial condition is
    // 2π c_s P · H_raw.
    let scale = 1.0 / (TWO_PI * c * record.prefactor);

    let cell = lx.max(ly) / grid_n as f64;
    let mut points = Vec::new();
    let mut values = Vec::new();
    let norm = 2.0 / (lx * ly).sqrt();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let p = [
                corner[0] + (i as f64 + 0.5) * lx / grid_n as f64,
                corner[1] + (j as f64 + 0.5) * ly / grid_n as f64,
            ];
            let (xi, eta) = ((p[0] - corner[0]) / lx, (p[1] - corner[1]) / ly);
            let mut v = 0.0;
            for m in 1..=modes {
                let sm = (m as f64 * PI * xi).sin();
                if sm == 0.0 {
                    continue;
                }
                for n in 1..=modes {
                    v += coeffs[(m - 1) * modes + (n - 1)]
                        * norm
                        * sm
                        * (n as f64 * PI * eta).sin();
                }
            }
            points.push(p);
            values.push(scale * v);
        }
    }

    Ok(Case2Reconstruction {
        coeffs: coeffs.iter().map(|&c0| c0 * scale).collect(),
        modes,
        grid: ReconstructionGrid {
            points,
            values,
            n: grid_n,
            cell,
            warnings,
        },
    })
}

/// Outward normal derivative of the L²-normalized sine mode on the
/// rectangle boundary (0 off the boundary sides within tolerance).
fn dnu_phi(corner: Point, size: [f64; 2], m: usize, n: usize, x: Point) -> f64 {
    let (lx, ly) = (size[0], size[1]);
    let norm = 2.0 / (lx * ly).sqrt();
    let (xi, eta) = ((x[0] - corner[0]) / lx, (x[1] - corner[1]) / ly);
    let tol = 1e-9 * (lx + ly);
    let (mf, nf) = (m as f64, n as f64);
    if (x[0] - corner[0]).abs() < tol {
        // left: ν = (−1, 0), ∂ν = −∂x; cos(0) = 1
        -norm * mf * PI / lx * (nf * PI * eta).sin()
    } else if (x[0] - corner[0] - lx).abs() < tol {
        // right: ∂ν = +∂x; cos(mπ) = (−1)^m
        norm * mf * PI / lx * if m % 2 == 0 { 1.0 } else { -1.0 } * (nf * PI * eta).sin()
    } else if (x[1] - corner[1]).abs() < tol {
        -norm * nf * PI / ly * (mf * PI * xi).sin()
    } else if (x[1] - corner[1] - ly).abs() < tol {
        norm * nf * PI / ly * if n % 2 == 0 { 1.0 } else { -1.0 } * (mf * PI * xi).sin()
    } else {
        0.0
    }
}

/// `∫ f(t) sin(s t) dt` over a uniform grid with f piecewise linear
/// (Filon-type: the oscillation is integrated exactly per interval).
fn filon_sin(times: &[f64], f: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..times.len() - 1 {
        let (t0, t1) = (times[j], times[j + 1]);
        let (f0, f1) = (f[j], f[j + 1]);
        let dt = t1 - t0;
        // f(t) = f0 + (f1−f0)(t−t0)/dt; ∫(α+βt)sin(st)dt closed form.
        let beta = (f1 - f0) / dt;
        let alpha = f0 - beta * t0;
        let prim = |t: f64| -> f64 {
            // ∫ sin = −cos/s; ∫ t sin = sin/s² − t cos/s
            -alpha * (s * t).cos() / s + beta * ((s * t).sin() / (s * s) - t * (s * t).cos() / s)
        };
        acc += prim(t1) - prim(t0);
    }
    acc
}

/// One-particle asymptotic combination
/// `(p⁺+p⁻−2p₀)(t,x) = P₂·(−2 t Im τ |⟨u₁,e_{n₀}⟩|²)/(t²−|x−z|²)^{3/2}`
/// with `P₂ = ωβ₀/(2π c_p)` (or 1 in normalized mode), valid for
/// `t > diam(Ω)` and unit sound speed.
pub fn asymptotic_one_particle(
    im_tau: f64,
    coeff_abs_sq: f64,
    z: Point,
    sensors: &[Point],
    times: &[f64],
    constant: f64,
    normalized: bool,
    diam: f64,
) -> Result<PressureRecord> {
    let p2 = if normalized { 1.0 } else { constant / TWO_PI };
    let values = asymptotic_values(sensors, times, z, diam, |t, d| {
        p2 * (-2.0 * t * im_tau * coeff_abs_sq) / (t * t - d * d).powf(1.5)
    })?;
    Ok(PressureRecord {
        sensors: sensors.to_vec(),
        times: times.to_vec(),
        values,
        provenance: Provenance::AsymptoticModel,
        normalized,
        prefactor: if normalized { 1.0 } else { constant / TWO_PI },
        c_s: 1.0,
    })
}

/// Dimer asymptotic expansion of `p̃`:
/// `P₂·(−t/(t²−|x−z|²)^{3/2})·(4 Im τ/(1+ω²_{n₀}))·(∫_D u₂ e_{n₀})²`,
/// with the squared coefficient passed as its real part (`z` is either
/// dimer center; the expansion does not distinguish them).
pub fn asymptotic_dimer_tilde(
    im_tau: f64,
    coeff_sq_re: f64,
    omega_n0_sq: f64,
    z: Point,
    sensors: &[Point],
    times: &[f64],
    constant: f64,
    normalized: bool,
    diam: f64,
) -> Result<PressureRecord> {
    let p2 = if normalized { 1.0 } else { constant / TWO_PI };
    let values = asymptotic_values(sensors, times, z, diam, |t, d| {
        p2 * (-t) / (t * t - d * d).powf(1.5) * 4.0 * im_tau / (1.0 + omega_n0_sq) * coeff_sq_re
    })?;
    Ok(PressureRecord {
        sensors: sensors.to_vec(),
        times: times.to_vec(),
        values,
        provenance: Provenance::AsymptoticModel,
        normalized,
        prefactor: p2,
        c_s: 1.0,
    })
}

fn asymptotic_values(
    sensors: &[Point],
    times: &[f64],
    z: Point,
    diam: f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Vec<Vec<f64>>> {
    for &t in times {
        if t <= diam {
            return Err(Error::invalid(format!(
                "asymptotic pressure requires t > diam(Ω) = {diam}, got t = {t}"
            )));
        }
    }
    sensors
        .iter()
        .map(|&x| {
            let d = crate::dist(x, z);
            times
                .iter()
                .map(|&t| {
                    if t <= d {
                        Err(Error::invalid(format!(
                            "evaluation outside the light cone: t = {t} ≤ |x−z| = {d}"
                        )))
                    } else {
                        Ok(f(t, d))
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc() -> OmegaDomain {
        OmegaDomain::Disc {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    fn gaussian_map(sigma: f64, center: Point, grid: usize) -> InitialPressureMap {
        InitialPressureMap::from_fn(
            &disc(),
            grid,
            |p| {
                let r2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
                (-r2 / (2.0 * sigma * sigma)).exp()
            },
            1.0,
            false,
        )
        .unwrap()
    }

    #[test]
    fn zero_source_zero_pressure() {
        let map = InitialPressureMap::from_fn(&disc(), 32, |_| 0.0, 1.0, false).unwrap();
        let sensors = disc().boundary_points(4);
        let times: Vec<f64> = (1..10).map(|j| 0.3 * j as f64).collect();
        let rec = forward_pressure_poisson(&map, &disc(), &sensors, &times, 1.0).unwrap();
        assert!(rec.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn sensors_off_boundary_rejected() {
        let map = gaussian_map(0.2, [0.0, 0.0], 32);
        let err = forward_pressure_poisson(&map, &disc(), &[[0.5, 0.0]], &[1.0], 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn tiny_disc_source_leading_term() {
        // p(x,t) ≈ −P t ∫H / (t²−|x−z|²)^{3/2} for t past the particle.
        let z = [0.2, 0.1];
        let a = 5e-3;
        let map = InitialPressureMap::from_fn(
            &OmegaDomain::Disc { center: z, radius: a },
            24,
            |_| 3.0,
            1.0,
            false,
        )
        .unwrap();
        let x = [1.0, 0.0];
        let d = crate::dist(x, z);
        let t = 1.7;
        let rec = forward_pressure_free(&map, &[x], &[t], 1.0).unwrap();
        let expect = -rec.prefactor * t * map.total() / (t * t - d * d).powf(1.5);
        assert!(
            (rec.values[0][0] - expect).abs() < 2e-3 * expect.abs(),
            "p = {} vs leading {expect}",
            rec.values[0][0]
        );
    }

    #[test]
    fn initial_conditions_recovered() {
        // p(x,0) = C·H(x) and ∂_t p(x,0) = 0 by extrapolating small
        // times (probed above the map's cell scale, at a cell center so
        // the nearest-cell t = 0 lookup is exact).
        let map = gaussian_map(0.25, [0.0, 0.0], 160);
        let x = [0.10625, -0.04375];
        let times = [0.0, 0.05, 0.1];
        let rec = forward_pressure_free(&map, &[x], &times, 1.0).unwrap();
        let h = map.value_at(x);
        let p0 = TWO_PI * rec.prefactor * h;
        assert!((rec.values[0][0] - p0).abs() < 1e-12 * p0.abs());
        for &j in &[1usize, 2] {
            assert!(
                (rec.values[0][j] - p0).abs() < 0.15 * p0.abs(),
                "p at t={} drifted: {} vs {}",
                times[j],
                rec.values[0][j],
                p0
            );
        }
        // p is even in t (∂_t p(·,0) = 0), so p(t) = p0 + O(t²) and the
        // Richardson value (4p(t) − p(2t))/3 recovers p0 within 1%.
        let extrap = (4.0 * rec.values[0][1] - rec.values[0][2]) / 3.0;
        assert!(
            (extrap - p0).abs() < 0.01 * p0.abs(),
            "extrapolated initial pressure {extrap} vs {p0}"
        );
    }

    #[test]
    fn wave_equation_residual() {
        // 2nd-order FD residual of p_tt = Δp at interior points, smooth H.
        let map = gaussian_map(0.3, [0.0, 0.0], 200);
        let x0 = [0.25, 0.1];
        // FD steps above the map's cell scale (0.01): below it the
        // stencil reads reconstruction noise, not the field.
        let (ht, hx) = (5e-2, 5e-2);
        let pts = [
            x0,
            [x0[0] + hx, x0[1]],
            [x0[0] - hx, x0[1]],
            [x0[0], x0[1] + hx],
            [x0[0], x0[1] - hx],
        ];
        let t0 = 0.6;
        let times = [t0 - ht, t0, t0 + ht];
        let rec = forward_pressure_free(&map, &pts, &times, 1.0).unwrap();
        let ptt = (rec.values[0][2] - 2.0 * rec.values[0][1] + rec.values[0][0]) / (ht * ht);
        let lap = (rec.values[1][1] + rec.values[2][1] + rec.values[3][1] + rec.values[4][1]
            - 4.0 * rec.values[0][1])
            / (hx * hx);
        let scale = ptt.abs().max(lap.abs()).max(1e-12);
        assert!(
            (ptt - lap).abs() <= 0.02 * scale,
            "wave residual {} vs scale {scale}",
            ptt - lap
        );
    }

    #[test]
    fn linearity_in_source() {
        let map = gaussian_map(0.2, [0.2, 0.0], 64);
        let sensors = disc().boundary_points(3);
        let times = [0.5, 0.9, 1.4];
        let r1 = forward_pressure_poisson(&map, &disc(), &sensors, &times, 1.0).unwrap();
        let r2 =
            forward_pressure_poisson(&map.scaled(2.5), &disc(), &sensors, &times, 1.0).unwrap();
        for (a, b) in r1.values.iter().flatten().zip(r2.values.iter().flatten()) {
            assert!((2.5 * a - b).abs() < 1e-12 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn circular_means_round_trip() {
        // M recovered from p matches the directly computed circular mean
        // of H — this pins the Abel-pair constants to the Poisson formula.
        let sigma = 0.18;
        let zc = [0.15, 0.0];
        let map = gaussian_map(sigma, zc, 220);
        let sensor = [1.0, 0.0];
        let nt = 900;
        let times: Vec<f64> = (0..nt).map(|j| 2.2 * j as f64 / (nt - 1) as f64).collect();
        let rec = forward_pressure_poisson(&map, &disc(), &[sensor], &times, 1.0).unwrap();
        let radii: Vec<f64> = (1..40).map(|j| 0.05 * j as f64).collect();
        let m_rec = circular_means_from_pressure(&rec, &disc(), 0, &radii).unwrap();
        // Direct circular means by angular quadrature of the Gaussian.
        let h = |p: [f64; 2]| {
            let r2 = (p[0] - zc[0]).powi(2) + (p[1] - zc[1]).powi(2);
            (-r2 / (2.0 * sigma * sigma)).exp()
        };
        let peak = crate::dist(sensor, zc);
        let mut max_err = 0.0f64;
        let mut max_val = 0.0f64;
        let mut best_r = 0.0;
        let mut best_m = 0.0;
        for (r, mr) in radii.iter().zip(&m_rec) {
            let n_ang = 256;
            let direct: f64 = (0..n_ang)
                .map(|q| {
                    let th = TWO_PI * q as f64 / n_ang as f64;
                    h([sensor[0] + r * th.cos(), sensor[1] + r * th.sin()])
                })
                .sum::<f64>()
                / n_ang as f64;
            max_err = max_err.max((mr - direct).abs());
            max_val = max_val.max(direct.abs());
            if *mr > best_m {
                best_m = *mr;
                best_r = *r;
            }
        }
        assert!(
            max_err <= 0.03 * max_val,
            "circular-mean mismatch {max_err} vs scale {max_val}"
        );
        // The mean peaks where the circle passes through the bump.
        assert!(
            (best_r - peak).abs() <= 0.075,
            "peak at r = {best_r}, expected ≈ {peak}"
        );
    }

    #[test]
    fn circular_means_trivial_cases() {
        let map = gaussian_map(0.15, [0.0, 0.0], 64);
        let sensor = [0.0, 1.0];
        let times: Vec<f64> = (0..200).map(|j| 2.2 * j as f64 / 199.0).collect();
        let rec = forward_pressure_poisson(&map, &disc(), &[sensor], &times, 1.0).unwrap();
        // r = 0: boundary point outside the support.
        let m0 = circular_means_from_pressure(&rec, &disc(), 0, &[0.0]).unwrap();
        assert_eq!(m0[0], 0.0);
        // r beyond the domain diameter rejected.
        assert!(circular_means_from_pressure(&rec, &disc(), 0, &[2.5]).is_err());
        // Linearity in p.
        let mut rec2 = rec.clone();
        for row in &mut rec2.values {
            for v in row.iter_mut() {
                *v *= 3.0;
            }
        }
        let m1 = circular_means_from_pressure(&rec, &disc(), 0, &[0.8]).unwrap();
        let m2 = circular_means_from_pressure(&rec2, &disc(), 0, &[0.8]).unwrap();
        assert!((3.0 * m1[0] - m2[0]).abs() < 1e-12 * m2[0].abs().max(1e-12));
    }

    #[test]
    fn invert_case1_trivial_zero() {
        let map = InitialPressureMap::from_fn(&disc(), 32, |_| 0.0, 1.0, false).unwrap();
        let sensors = disc().boundary_points(48);
        let times: Vec<f64> = (0..128).map(|j| 2.2 * j as f64 / 127.0).collect();
        let rec = forward_pressure_poisson(&map, &disc(), &sensors, &times, 1.0).unwrap();
        let grid = invert_case1(&rec, &disc(), 24, 64).unwrap();
        assert!(grid.values.iter().all(|&v| v.abs() < 1e-12));
        assert!(grid.warnings.is_empty());
    }

    #[test]
    fn invert_case1_sensor_warning_and_domain_check() {
        let map = gaussian_map(0.2, [0.0, 0.0], 32);
        let sensors = disc().boundary_points(8);
        let times: Vec<f64> = (0..64).map(|j| 2.2 * j as f64 / 63.0).collect();
        let rec = forward_pressure_poisson(&map, &disc(), &sensors, &times, 1.0).unwrap();
        let grid = invert_case1(&rec, &disc(), 12, 32).unwrap();
        assert!(!grid.warnings.is_empty());
        let rect = OmegaDomain::Rectangle {
            corner: [0.0, 0.0],
            size: [1.0, 1.0],
        };
        assert!(invert_case1(&rec, &rect, 12, 32).is_err());
    }

    #[test]
    fn invert_case2_trivial_zero_and_warning() {
        let rect = OmegaDomain::Rectangle {
            corner: [0.0, 0.0],
            size: [1.0, 1.0],
        };
        let sensors = rect.boundary_points(64);
        let nt = 128;
        // Short span triggers the tail warning.
        let times: Vec<f64> = (0..nt).map(|j| 2.0 * j as f64 / (nt - 1) as f64).collect();
        let rec = PressureRecord {
            sensors: sensors.clone(),
            times: times.clone(),
            values: vec![vec![0.0; nt]; sensors.len()],
            provenance: Provenance::Poisson,
            normalized: false,
            prefactor: 1.0 / TWO_PI,
            c_s: 1.0,
        };
        let out = invert_case2(&rec, &rect, 6, 16).unwrap();
        assert!(out.coeffs.iter().all(|&c| c == 0.0));
        assert!(!out.grid.warnings.is_empty());
    }

    #[test]
    fn asymptotic_synthetic_substitution() {
        // ⟨u₁,e⟩ = 1, t = 3, |x−z| = 2 → −6 Im τ/5^{3/2} (normalized).
        let im_tau = 0.7;
        let rec = asymptotic_one_particle(
            im_tau,
            1.0,
            [0.0, 0.0],
            &[[2.0, 0.0]],
            &[3.0],
            1.0,
            true,
            1.0,
        )
        .unwrap();
        let expect = -6.0 * im_tau / 5.0f64.powf(1.5);
        assert!((rec.values[0][0] - expect).abs() < 1e-14 * expect.abs());
        // Im τ = 0 → identically zero.
        let rec0 = asymptotic_one_particle(
            0.0,
            1.0,
            [0.0, 0.0],
            &[[2.0, 0.0]],
            &[3.0],
            1.0,
            true,
            1.0,
        )
        .unwrap();
        assert_eq!(rec0.values[0][0], 0.0);
        // Light-cone / diam preconditions.
        assert!(asymptotic_one_particle(
            0.1,
            1.0,
            [0.0, 0.0],
            &[[2.0, 0.0]],
            &[1.5],
            1.0,
            true,
            2.0
        )
        .is_err());
    }

    #[test]
    fn combinations_are_linear() {
        let base = gaussian_map(0.2, [0.0, 0.0], 48);
        let sensors = disc().boundary_points(3);
        let times = [0.7, 1.1];
        let p0 = forward_pressure_poisson(&base, &disc(), &sensors, &times, 1.0).unwrap();
        let pp = forward_pressure_poisson(&base.scaled(1.4), &disc(), &sensors, &times, 1.0)
            .unwrap();
        let pm = forward_pressure_poisson(&base.scaled(0.8), &disc(), &sensors, &times, 1.0)
            .unwrap();
        let sym = symmetric_combination(&pp, &pm, &p0).unwrap();
        // (1.4 + 0.8 − 2)·p0 = 0.2·p0 by linearity of the forward map.
        for (s, z) in sym.values.iter().flatten().zip(p0.values.iter().flatten()) {
            assert!((s - 0.2 * z).abs() < 1e-10 * z.abs().max(1e-12));
        }
        let om2 = 2.0;
        let til = tilde_combination(&pp, &pm, &p0, om2).unwrap();
        let w = (1.0 - om2) / (1.0 + om2);
        for (s, z) in til.values.iter().flatten().zip(p0.values.iter().flatten()) {
            let expect = (1.4 - 1.0 + w * (0.8 - 1.0)) * z;
            assert!((s - expect).abs() < 1e-10 * z.abs().max(1e-12));
        }
    }

    #[test]
    fn filon_matches_closed_form() {
        // ∫₀^T sin(st)·t dt = (sin sT − sT cos sT)/s².
        let s = 7.3;
        let t_max = 4.0;
        let n = 2000;
        let times: Vec<f64> = (0..n).map(|j| t_max * j as f64 / (n - 1) as f64).collect();
        let f: Vec<f64> = times.iter().map(|&t| t).collect();
        let got = filon_sin(&times, &f, s);
        let expect = ((s * t_max).sin() - s * t_max * (s * t_max).cos()) / (s * s);
        assert!((got - expect).abs() < 1e-8);
    }
}
