//! Polar meshes for particle shapes and the unit reference shapes.
//!
//! Particles are discs (optionally ellipses for the shape-comparison
//! tests), meshed in polar rings with the sector count growing linearly
//! with the ring index so cells stay close to unit aspect ratio. Cells
//! carry exact boundary edges (segments + arcs), so areas, centroids,
//! and the log-singular self-integrals are all evaluated on the true
//! curved geometry.

use crate::specfun::Cell;
use crate::{Error, Point, Result};

/// A cell decomposition of a disc or ellipse.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub cells: Vec<Cell>,
    /// Center the mesh was built around.
    pub center: Point,
    /// Nominal radius (disc) or max semi-axis (ellipse).
    pub radius: f64,
    /// Per-axis scale: `[1, 1]` for a disc, `[p, q]` for an ellipse
    /// `x²/p² + y²/q² ≤ r²`.
    pub scale: [f64; 2],
    /// Ring/sector structure: `(n_rings, sectors_per_ring)`.
    pub rings: Vec<usize>,
}

impl Mesh {
    /// Polar mesh of the disc `|x − center| ≤ radius` with approximately
    /// `n_target` cells.
    pub fn disc(center: Point, radius: f64, n_target: usize) -> Result<Self> {
        Self::scaled_disc(center, radius, n_target, [1.0, 1.0])
    }

    /// Polar mesh of the ellipse `((x−c)/p)² + ((y−c)/q)² ≤ radius²`
    /// (affine image of the disc mesh).
    pub fn ellipse(center: Point, radius: f64, scale: [f64; 2], n_target: usize) -> Result<Self> {
        Self::scaled_disc(center, radius, n_target, scale)
    }

    fn scaled_disc(center: Point, radius: f64, n_target: usize, scale: [f64; 2]) -> Result<Self> {
        if !(radius > 0.0) || n_target < 4 {
            return Err(Error::invalid(format!(
                "mesh requires radius > 0 and ≥ 4 cells (radius {radius}, cells {n_target})"
            )));
        }
        // Ring count so that Σ sectors ≈ n_target with sectors ∝ (2i−1).
        let n_rings = ((n_target as f64 / std::f64::consts::PI).sqrt().round() as usize).max(1);
        let mut rings = Vec::with_capacity(n_rings);
        let mut cells = Vec::with_capacity(n_target + n_rings);
        for i in 1..=n_rings {
            // sectors ≈ n_target · (2i−1)/n_rings², keeping aspect ≈ 1.
            let frac = (2 * i - 1) as f64 / (n_rings * n_rings) as f64;
            let n_sec = ((n_target as f64 * frac).round() as usize).max(4);
            rings.push(n_sec);
            let r0 = radius * (i - 1) as f64 / n_rings as f64;
            let r1 = radius * i as f64 / n_rings as f64;
            for s in 0..n_sec {
                let th0 = 2.0 * std::f64::consts::PI * s as f64 / n_sec as f64;
                let th1 = 2.0 * std::f64::consts::PI * (s + 1) as f64 / n_sec as f64;
                if r0 == 0.0 {
                    // Innermost ring: pie wedges.
                    cells.push(Cell::new(vec![
                        crate::specfun::Edge::Segment {
                            a: center,
                            b: [
                                center[0] + scale[0] * r1 * th0.cos(),
                                center[1] + scale[1] * r1 * th0.sin(),
                            ],
                        },
                        crate::specfun::Edge::Arc {
                            center,
                            radius: r1,
                            th0,
                            th1,
                            scale,
                        },
                        crate::specfun::Edge::Segment {
                            a: [
                                center[0] + scale[0] * r1 * th1.cos(),
                                center[1] + scale[1] * r1 * th1.sin(),
                            ],
                            b: center,
                        },
                    ])?);
                } else {
                    cells.push(Cell::annular_sector(center, r0, r1, th0, th1, scale)?);
                }
            }
        }
        Ok(Mesh {
            cells,
            center,
            radius,
            scale,
            rings,
        })
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// True when the mesh has no cells (never happens for valid builds).
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Total mesh area.
    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Cell centroids.
    pub fn centroids(&self) -> Vec<Point> {
        self.cells.iter().map(|c| c.centroid).collect()
    }

    /// Maps this mesh by `y ↦ z + a·(y − center)`: the reference-shape
    /// mesh on `B` becomes the particle mesh on `D = z + a·B`. Ring
    /// structure and cell ordering are preserved, which is what makes
    /// discrete `L²(B)` eigenfunction samples reusable on `D`.
    pub fn rescaled(&self, z: Point, a: f64) -> Result<Self> {
        let map = |p: Point| -> Point {
            [
                z[0] + a * (p[0] - self.center[0]),
                z[1] + a * (p[1] - self.center[1]),
            ]
        };
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let edges = c
                .edges
                .iter()
                .map(|e| match e {
                    crate::specfun::Edge::Segment { a: p, b: q } => crate::specfun::Edge::Segment {
                        a: map(*p),
                        b: map(*q),
                    },
                    crate::specfun::Edge::Arc {
                        center,
                        radius,
                        th0,
                        th1,
                        scale,
                    } => crate::specfun::Edge::Arc {
                        center: map(*center),
                        radius: radius * a,
                        th0: *th0,
                        th1: *th1,
                        scale: *scale,
                    },
                })
                .collect();
            cells.push(Cell::new(edges)?);
        }
        Ok(Mesh {
            cells,
            center: z,
            radius: self.radius * a,
            scale: self.scale,
            rings: self.rings.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_mesh_area_and_count() {
        let m = Mesh::disc([0.0, 0.0], 1.0, 500).unwrap();
        let n = m.len();
        assert!(n >= 400 && n <= 620, "cell count {n}");
        assert!((m.area() - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn ellipse_mesh_area() {
        let m = Mesh::ellipse([1.0, -2.0], 1.0, [2.0, 0.5], 300).unwrap();
        // Area πpq·r² = π·1.
        assert!((m.area() - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn rescaled_mesh_scales_area_quadratically() {
        let m = Mesh::disc([0.0, 0.0], 1.0, 200).unwrap();
        let s = m.rescaled([3.0, 4.0], 1e-3).unwrap();
        assert!((s.area() - std::f64::consts::PI * 1e-6).abs() < 1e-16);
        assert_eq!(s.len(), m.len());
        // Centroids map affinely.
        let c0 = m.cells[7].centroid;
        let c1 = s.cells[7].centroid;
        assert!((c1[0] - (3.0 + 1e-3 * c0[0])).abs() < 1e-12);
        assert!((c1[1] - (4.0 + 1e-3 * c0[1])).abs() < 1e-12);
    }

    #[test]
    fn cells_tile_without_overlap() {
        // Sum of areas equals disc area (already checked) and every cell
        // centroid lies inside the disc.
        let m = Mesh::disc([0.0, 0.0], 2.0, 128).unwrap();
        for c in &m.cells {
            let d = crate::dist(c.centroid, [0.0, 0.0]);
            assert!(d < 2.0);
            assert!(c.area > 0.0);
        }
    }
}
