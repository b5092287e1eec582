//! Frequency-domain electromagnetic forward solvers.
//!
//! The 2D TM scattering problem with particles `D_m = z_m + aB` and
//! contrast `τ = ε_p − ε₀` reduces to the Lippmann–Schwinger equation
//!
//! ```text
//! u(x) − ω²μ₀ τ ∫_D G_k(x,y) u(y) dy = u₀(x),   x ∈ D = ∪D_m,
//! ```
//!
//! with the outgoing kernel `G_k(x,y) = (i/4)H₀⁽¹⁾(k|x−y|)` and the
//! homogeneous background field `u₀(x) = e^{iω n₀ d·x}`. Two solvers are
//! provided:
//!
//! * [`solve_lse`] — piecewise-constant Nyström discretization on the
//!   particle meshes, with the log singularity of the kernel integrated
//!   by [`crate::specfun::quad_log_singular`] on near cells and the
//!   smooth remainder `G_k + (1/2π)log r` (which tends to
//!   `−(1/2π)log k + Γ`) evaluated pointwise.
//! * [`assemble_foldy_lax`]/[`solve_foldy_lax`] — the reduced
//!   point-scatterer system `(I − B)Q = u₀(z)` with
//!   `B_{mj} = G_k(z_m, z_j)·C*_j`, valid when the particles are farther
//!   apart than the invertibility threshold; zeroth-order, first-order
//!   (one Neumann step), and full solves are all exposed.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use rayon::prelude::*;

use crate::mesh::Mesh;
use crate::model::{Drive, Scenario};
use crate::resonance::{
    c_star, resonance_frequency, scattering_coefficient_c, ResonanceTable, SpectralData,
};
use crate::specfun::{hankel1_0, quad_log_singular};
use crate::{kernel_gamma, Complex, Error, Point, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// The outgoing Helmholtz kernel `G_k(x,y) = (i/4)H₀⁽¹⁾(k|x−y|)` for a
/// fixed complex wavenumber with `Im k ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct GreenKernel {
    pub k: Complex,
}

impl GreenKernel {
    pub fn new(k: Complex) -> Result<Self> {
        if k.norm() == 0.0 || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::invalid(format!("kernel wavenumber must be nonzero finite, got {k}")));
        }
        if k.im < -1e-14 * k.norm() {
            return Err(Error::invalid(
                "outgoing kernel requires Im k ≥ 0 (absorbing background)".to_string(),
            ));
        }
        Ok(GreenKernel { k })
    }

    /// `G_k(x, y)`; the points must be distinct.
    pub fn eval(&self, x: Point, y: Point) -> Result<Complex> {
        let r = crate::dist(x, y);
        if r == 0.0 {
            return Err(Error::invalid("Green kernel evaluated on its singularity".to_string()));
        }
        Ok(Complex::new(0.0, 0.25) * hankel1_0(self.k * r)?)
    }

    /// The free log potential `Φ₀(x,y) = −(1/2π) log|x−y|`.
    pub fn phi0(x: Point, y: Point) -> f64 {
        -crate::dist(x, y).ln() / TWO_PI
    }

    /// The constant part of the small-argument expansion,
    /// `−(1/2π)log k + Γ`.
    pub fn expansion_const(&self) -> Complex {
        -self.k.ln() / TWO_PI + kernel_gamma()
    }

    /// Leading small-separation expansion `Φ₀(x,y) − (1/2π)log k + Γ`.
    pub fn expansion(&self, x: Point, y: Point) -> Complex {
        Complex::new(Self::phi0(x, y), 0.0) + self.expansion_const()
    }

    /// Smooth remainder `R(r) = G_k + (1/2π)log r`; `R(0) = −(1/2π)log k + Γ`.
    /// Analytic in r² log r, so safe to evaluate at cell centroids even
    /// on the diagonal.
    pub fn smooth_remainder(&self, r: f64) -> Result<Complex> {
        if r == 0.0 || (self.k * r).norm() < 1e-150 {
            return Ok(self.expansion_const());
        }
        Ok(Complex::new(0.0, 0.25) * hankel1_0(self.k * r)? + r.ln() / TWO_PI)
    }
}

/// Background (incident) plane-wave field `u₀(x) = e^{iω n₀ d·x}` with
/// `n₀ = √(ε₀ μ₀)` for the homogeneous background.
pub fn background_field(scenario: &Scenario, omega: f64, points: &[Point]) -> Result<Vec<Complex>> {
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("background field needs ω > 0, got {omega}")));
    }
    let k = scenario.medium.wavenumber(omega); // ω n₀, branch Im ≥ 0
    let d = scenario.wave.direction;
    Ok(points
        .iter()
        .map(|&p| (Complex::new(0.0, 1.0) * k * (d[0] * p[0] + d[1] * p[1])).exp())
        .collect())
}

/// Which solver produced a [`FieldSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    FullLse,
    FoldyLax,
}

/// Complex field samples on the particle meshes.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub solver: SolverKind,
    pub omega: f64,
    pub k: Complex,
    pub tau: Complex,
    pub mu0: f64,
    /// One mesh per particle (shared cell layout with the reference
    /// spectrum's mesh).
    pub particle_meshes: Vec<Mesh>,
    /// Field samples v_m at the cell centroids, per particle.
    pub v: Vec<Vec<Complex>>,
    /// Incident samples u₀ at the same points.
    pub u0: Vec<Vec<Complex>>,
    /// Relative residual of the discrete integral equation.
    pub residual: f64,
    /// Rough condition estimate of the discrete system.
    pub condition_estimate: f64,
    /// Set when the condition estimate exceeds 1e12 (driving too close
    /// to a resonance for the discretization to be trustworthy).
    pub near_resonance: bool,
}

impl FieldSolution {
    /// `∫_{D_m} v dx` by the centroid rule.
    pub fn particle_average(&self, m: usize) -> Result<Complex> {
        let mesh = self
            .particle_meshes
            .get(m)
            .ok_or_else(|| Error::invalid(format!("no particle {m}")))?;
        Ok(mesh
            .cells
            .iter()
            .zip(&self.v[m])
            .map(|(c, &v)| c.area * v)
            .sum())
    }

    /// Discrete `L²(D_m)` norm of the field on particle `m`.
    pub fn norm_on_particle(&self, m: usize) -> f64 {
        self.particle_meshes[m]
            .cells
            .iter()
            .zip(&self.v[m])
            .map(|(c, v)| c.area * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates the total field at exterior points through the
    /// representation formula `u(x) = u₀(x) + ω²μ₀τ Σ∫ G_k(x,y)v(y)dy`
    /// (centroid rule; `x` must stay away from all particles).
    pub fn exterior_field(&self, scenario: &Scenario, points: &[Point]) -> Result<Vec<Complex>> {
        let kernel = GreenKernel::new(self.k)?;
        let u0 = background_field(scenario, self.omega, points)?;
        let pref = self.omega * self.omega * self.mu0 * self.tau;
        let mut out = Vec::with_capacity(points.len());
        for (i, &x) in points.iter().enumerate() {
            let mut scat = Complex::new(0.0, 0.0);
            for (mesh, vm) in self.particle_meshes.iter().zip(&self.v) {
                if crate::dist(x, mesh.center) < 1.5 * mesh.radius {
                    return Err(Error::invalid(format!(
                        "exterior evaluation point {x:?} too close to a particle"
                    )));
                }
                for (c, &v) in mesh.cells.iter().zip(vm) {
                    scat += kernel.eval(x, c.centroid)? * c.area * v;
                }
            }
            out.push(u0[i] + pref * scat);
        }
        Ok(out)
    }
}

/// Solves the Lippmann–Schwinger equation on all particles of the
/// scenario at frequency `omega`, on meshes obtained by rescaling the
/// reference spectrum's mesh (so modal projections stay consistent).
pub fn solve_lse(scenario: &Scenario, spec: &SpectralData, omega: f64) -> Result<FieldSolution> {
    let n_b = spec.mesh.len();
    if n_b < 16 {
        return Err(Error::invalid(format!(
            "LSE mesh too coarse: {n_b} cells (≥ 16 required)"
        )));
    }
    if scenario.particles.is_empty() {
        return Err(Error::invalid("scenario has no particles".to_string()));
    }
    let mu0 = scenario.medium.mu0;
    let tau = crate::model::contrast_tau(scenario, 0, omega)?;
    let k = scenario.medium.wavenumber(omega);
    let kernel = GreenKernel::new(k)?;
    let pref = omega * omega * mu0 * tau;

    // Particle meshes share the reference layout.
    let meshes: Vec<Mesh> = scenario
        .particles
        .iter()
        .map(|p| spec.mesh.rescaled(p.center, p.radius))
        .collect::<Result<_>>()?;
    let m_particles = meshes.len();
    let n_tot = m_particles * n_b;

    let centroids: Vec<Point> = meshes.iter().flat_map(|m| m.centroids()).collect();
    let areas: Vec<f64> = meshes
        .iter()
        .flat_map(|m| m.cells.iter().map(|c| c.area))
        .collect();
    let diams: Vec<f64> = meshes
        .iter()
        .flat_map(|m| m.cells.iter().map(|c| c.diameter()))
        .collect();

    // Row i: v_i − pref Σ_j K_ij v_j = u₀(x_i) with
    // K_ij ≈ ∫_{cell_j} G_k(x_i, y) dy.
    let rows: Vec<Vec<Complex>> = (0..n_tot)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![Complex::new(0.0, 0.0); n_tot];
            let xi = centroids[i];
            for j in 0..n_tot {
                let r = crate::dist(xi, centroids[j]);
                let near = r < 3.0 * (diams[i] + diams[j]);
                let kij = if near {
                    // Exact log part + pointwise smooth remainder.
                    let cell = &meshes[j / n_b].cells[j % n_b];
                    let q = quad_log_singular(|_| 1.0, cell, xi).unwrap_or(f64::NAN);
                    Complex::new(-q / TWO_PI, 0.0)
                        + areas[j] * kernel.smooth_remainder(r).unwrap_or(Complex::new(f64::NAN, 0.0))
                } else {
                    areas[j] * kernel.eval(xi, centroids[j]).unwrap_or(Complex::new(f64::NAN, 0.0))
                };
                row[j] = -pref * kij;
            }
            row[i] += 1.0;
            row
        })
        .collect();

    let mut a_mat = Array2::<Complex>::zeros((n_tot, n_tot));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a_mat[[i, j]] = v;
        }
    }
    if a_mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("non-finite entries in the LSE matrix".to_string()));
    }

    let u0_flat = background_field(scenario, omega, &centroids)?;
    let b = Array1::from_vec(u0_flat.clone());
    let sol = a_mat
        .solve(&b)
        .map_err(|e| Error::invalid(format!("LSE dense solve failed: {e}")))?;

    // Residual of the discrete system, relative to ‖u₀‖.
    let av = a_mat.dot(&sol);
    let res_num: f64 = av
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr() * 1.0)
        .sum::<f64>()
        .sqrt();
    let res_den: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let residual = res_num / res_den.max(1e-300);

    // Cheap condition estimate: ‖A‖_∞ times ‖A⁻¹w‖_∞/‖w‖_∞ for an
    // alternating-sign probe (captures the resonant blow-up direction
    // well enough for the near-resonance warning).
    let a_norm = (0..n_tot)
        .map(|i| (0..n_tot).map(|j| a_mat[[i, j]].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let probe = Array1::from_vec(
        (0..n_tot)
            .map(|i| Complex::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
    );
    let inv_probe = a_mat
        .solve(&probe)
        .map_err(|e| Error::invalid(format!("condition probe failed: {e}")))?;
    let inv_norm = inv_probe.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let condition_estimate = a_norm * inv_norm;

    let mut v = Vec::with_capacity(m_particles);
    let mut u0 = Vec::with_capacity(m_particles);
    for m in 0..m_particles {
        v.push(sol.slice(ndarray::s![m * n_b..(m + 1) * n_b]).to_vec());
        u0.push(u0_flat[m * n_b..(m + 1) * n_b].to_vec());
    }

    Ok(FieldSolution {
        solver: SolverKind::FullLse,
        omega,
        k,
        tau,
        mu0,
        particle_meshes: meshes,
        v,
        u0,
        residual,
        condition_estimate,
        near_resonance: condition_estimate > 1e12,
    })
}

/// Discrete `L²(D_m)` projection `⟨v_m, e_n⟩` of the solved field onto
/// mode `n` of the reference spectrum (`e_n(x) = ē_n((x−z)/a)/a`).
pub fn fourier_coefficient(
    field: &FieldSolution,
    spec: &SpectralData,
    particle: usize,
    mode: usize,
) -> Result<Complex> {
    let mesh = field
        .particle_meshes
        .get(particle)
        .ok_or_else(|| Error::invalid(format!("no particle {particle}")))?;
    if mesh.len() != spec.mesh.len() {
        return Err(Error::invalid(format!(
            "mesh mismatch: field particle mesh has {} cells, spectrum {}",
            mesh.len(),
            spec.mesh.len()
        )));
    }
    if mode >= spec.n_modes() {
        return Err(Error::invalid(format!("mode {mode} out of range")));
    }
    let a = mesh.radius / spec.mesh.radius;
    // ⟨v, e_n⟩_{D} = Σ A_i^D v_i ē_i / a = a Σ A_i^B v_i ē_i.
    let e = &spec.eigenfunctions[mode];
    let s: Complex = spec
        .mesh
        .cells
        .iter()
        .zip(field.v[particle].iter().zip(e))
        .map(|(c, (&v, &ei))| c.area * v * ei)
        .sum();
    Ok(a * s)
}

/// The reduced Foldy–Lax point-scatterer system `(I − B)Q = V`.
#[derive(Debug, Clone)]
pub struct FoldyLaxSystem {
    pub centers: Vec<Point>,
    /// Effective scattering coefficients C*_m.
    pub c_star: Vec<Complex>,
    /// Off-diagonal interaction matrix entries `B_{mj} = G_k(z_m,z_j)C*_j`.
    pub b: Array2<Complex>,
    /// Incident values `V_m = u₀(z_m)`.
    pub v_incident: Vec<Complex>,
    /// `‖B‖_∞` (must be < 1 to solve).
    pub norm_bound: f64,
    pub omega: f64,
    pub k: Complex,
    pub tau: Complex,
    pub mu0: f64,
}

/// Assembles the Foldy–Lax system from the scenario and the reference
/// spectrum at frequency `omega`, using resonant mode `n0` for the
/// scattering coefficients.
pub fn assemble_foldy_lax(
    scenario: &Scenario,
    spec: &SpectralData,
    omega: f64,
    n0: usize,
) -> Result<FoldyLaxSystem> {
    let m = scenario.particles.len();
    if m == 0 {
        return Err(Error::invalid("scenario has no particles".to_string()));
    }
    let mu0 = scenario.medium.mu0;
    let tau = crate::model::contrast_tau(scenario, 0, omega)?;
    let k = scenario.medium.wavenumber(omega);
    let kernel = GreenKernel::new(k)?;

    let mut c_star_v = Vec::with_capacity(m);
    for p in 0..m {
        let a = scenario.particles[p].radius;
        let c = scattering_coefficient_c(spec, a, mu0, tau, omega, n0)?;
        c_star_v.push(c_star(c.series, k)?);
    }

    let centers: Vec<Point> = scenario.particles.iter().map(|p| p.center).collect();
    let mut b = Array2::<Complex>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            if i != j {
                b[[i, j]] = kernel.eval(centers[i], centers[j])? * c_star_v[j];
            }
        }
    }
    let norm_bound = (0..m)
        .map(|i| (0..m).map(|j| b[[i, j]].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);

    let v_incident = background_field(scenario, omega, &centers)?;
    Ok(FoldyLaxSystem {
        centers,
        c_star: c_star_v,
        b,
        v_incident,
        norm_bound,
        omega,
        k,
        tau,
        mu0,
    })
}

/// Truncation order for the Foldy–Lax solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldyLaxOrder {
    /// `Q = V` (interactions ignored).
    Zeroth,
    /// One Neumann step, `Q = V + BV`.
    First,
    /// Direct dense solve of `(I − B)Q = V`.
    Full,
    /// Neumann iteration to convergence (geometric under ‖B‖ < 1).
    Neumann,
}

/// The solved point amplitudes and reduced field averages
/// `∫_{D_m} v dx = Q_m·C*_m/(ω²μ₀τ)`.
#[derive(Debug, Clone)]
pub struct FoldyLaxSolution {
    pub q: Vec<Complex>,
    pub averages: Vec<Complex>,
    pub order: FoldyLaxOrder,
    pub iterations: usize,
}

/// Solves the assembled system at the requested truncation order.
pub fn solve_foldy_lax(system: &FoldyLaxSystem, order: FoldyLaxOrder) -> Result<FoldyLaxSolution> {
    let m = system.centers.len();
    if system.norm_bound >= 1.0 && !matches!(order, FoldyLaxOrder::Zeroth | FoldyLaxOrder::First) {
        // Name the closest offending pair for the diagnostic.
        let mut worst = (0usize, 1usize, f64::INFINITY);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let d = crate::dist(system.centers[i], system.centers[j]);
                    if d < worst.2 {
                        worst = (i, j, d);
                    }
                }
            }
        }
        return Err(Error::invariant(
            "Foldy–Lax invertibility ‖B‖_∞ < 1",
            format!(
                "‖B‖_∞ = {:.3e}; closest pair ({}, {}) at distance {:.3e}",
                system.norm_bound, worst.0, worst.1, worst.2
            ),
        ));
    }
    let v = Array1::from_vec(system.v_incident.clone());
    let (q, iterations) = match order {
        FoldyLaxOrder::Zeroth => (v.clone(), 0),
        FoldyLaxOrder::First => (&v + &system.b.dot(&v), 1),
        FoldyLaxOrder::Full => {
            let mut a = Array2::<Complex>::eye(m);
            a -= &system.b;
            (
                a.solve(&v)
                    .map_err(|e| Error::invalid(format!("Foldy–Lax solve failed: {e}")))?,
                0,
            )
        }
        FoldyLaxOrder::Neumann => {
            let mut q = v.clone();
            let mut it = 0;
            loop {
                let next = &v + &system.b.dot(&q);
                let diff: f64 = next
                    .iter()
                    .zip(q.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                q = next;
                it += 1;
                if diff < 1e-14 * (1.0 + q.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
                    break;
                }
                if it >= 200 {
                    return Err(Error::invalid(
                        "Foldy–Lax Neumann iteration did not converge in 200 steps".to_string(),
                    ));
                }
            }
            (q, it)
        }
    };
    let pref = system.omega * system.omega * system.mu0 * system.tau;
    let averages = q
        .iter()
        .zip(&system.c_star)
        .map(|(&qm, &cs)| qm * cs / pref)
        .collect();
    Ok(FoldyLaxSolution {
        q: q.to_vec(),
        averages,
        order,
        iterations,
    })
}

/// Resolves the scenario's drive to a concrete frequency: explicit ω, or
/// the detuned frequency around the `n0`-th flagged resonant mode
/// (1-based among Hypotheses-1-satisfying modes).
pub fn resolve_omega(scenario: &Scenario, spec: &SpectralData) -> Result<f64> {
    match scenario.wave.drive {
        Drive::Explicit { omega } => Ok(omega),
        Drive::Detuned { n0, h, sign } => {
            let p = scenario
                .particles
                .first()
                .ok_or_else(|| Error::invalid("detuned drive needs at least one particle".to_string()))?;
            let a = p.radius;
            let re_tau = crate::model::contrast_tau(scenario, 0, 1.0)?.re;
            let tau = Complex::new(re_tau, 0.0);
            let table = ResonanceTable::build(spec, a, scenario.medium.mu0, tau)?;
            let mut seen = 0usize;
            let mut target = None;
            for (idx, &ok) in table.mode_flags.iter().enumerate() {
                if ok {
                    seen += 1;
                    if seen == n0 {
                        target = Some(idx);
                        break;
                    }
                }
            }
            let idx = target.ok_or_else(|| {
                Error::invalid(format!(
                    "drive requests flagged mode {n0} but only {seen} modes satisfy the hypotheses"
                ))
            })?;
            let f = resonance_frequency(spec, a, scenario.medium.mu0, tau, idx, h)?;
            Ok(if sign >= 0 { f.omega_plus } else { f.omega_minus })
        }
    }
}
