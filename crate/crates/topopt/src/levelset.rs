//! The level set field, its smoothed characteristic functions, initialization,
//! clamping, and volume measurement.
//!
//! The field lives in [-1, 1] on the mesh nodes. `chi_x` is a C^1 quintic step
//! of half-width `matw`; `chi_p` adds the ersatz stiffness floor `matd`;
//! `chi_v` is the unit-half-width variant used for volume integrals. All three
//! are evaluated pointwise at quadrature points from the P1 interpolant.

use crate::mesh2d::TriMesh;
use crate::par;

/// Smoothing parameters for the characteristic functions.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingParams {
    /// smoothing half-width for material interpolation
    pub matw: f64,
    /// ersatz stiffness floor
    pub matd: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            matw: 0.8,
            matd: 1e-3,
        }
    }
}

/// Quintic smoothed step: 0 below -matw, 1 above +matw, C^1 across the band.
pub fn chi_x(phi: f64, matw: f64) -> f64 {
    let s = phi / matw;
    if s > 1.0 {
        1.0
    } else if s < -1.0 {
        0.0
    } else {
        0.5 + s * (15.0 / 16.0 - s * s * (5.0 / 8.0 - 3.0 / 16.0 * s * s))
    }
}

/// Material interpolation with the ersatz floor: values in [matd, 1].
pub fn chi_p(phi: f64, smoothing: &SmoothingParams) -> f64 {
    ((1.0 - smoothing.matd) * chi_x(phi, smoothing.matw) + smoothing.matd).max(smoothing.matd)
}

/// Smoothed indicator with unit half-width, used for the volume integral.
pub fn chi_v(phi: f64) -> f64 {
    chi_x(phi, 1.0)
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Nodal level set field on a [`TriMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField {
    pub values: Vec<f64>,
}

impl LevelSetField {
    pub fn constant(mesh: &TriMesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Initial configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// periodically perforated: clamp(4 (max(cos 10 pi x, cos 10 pi y) - 1/2))
    Perforated,
    /// whole domain: phi = 1
    Full,
    /// material above a horizontal threshold only
    Upper,
}

/// Build the initial level set, already clamped to [-1, 1].
pub fn init_phi(kind: InitKind, mesh: &TriMesh, upper_threshold: f64) -> LevelSetField {
    let nodes = mesh.nodes();
    let values = par::map_indexed(nodes.len(), |i| {
        let [x, y] = nodes[i];
        let raw = match kind {
            InitKind::Perforated => {
                let pi = std::f64::consts::PI;
                4.0 * ((10.0 * pi * x).cos().max((10.0 * pi * y).cos()) - 0.5)
            }
            InitKind::Full => 1.0,
            InitKind::Upper => 2.0 * (f64::from(y > upper_threshold) - 0.5),
        };
        clamp_unit(raw)
    });
    LevelSetField { values }
}

/// Clamp a raw evolved field into [-1, 1] and report the nodewise change
/// against the previous clamped field.
pub fn clamp_phi(phi_raw: &[f64], phi_prev: &[f64]) -> (LevelSetField, Vec<f64>) {
    assert_eq!(phi_raw.len(), phi_prev.len());
    let clamped: Vec<f64> = par::map_indexed(phi_raw.len(), |i| clamp_unit(phi_raw[i]));
    let diff: Vec<f64> = par::map_indexed(clamped.len(), |i| (clamped[i] - phi_prev[i]).abs());
    (LevelSetField { values: clamped }, diff)
}

/// Three-point edge-midpoint quadrature weights on the P1 interpolant; exact
/// for quadratics, which covers P1 x P1 products.
pub(crate) fn quad_values(phi: &[f64], tri: [usize; 3]) -> [f64; 3] {
    let [a, b, c] = tri;
    [
        0.5 * (phi[a] + phi[b]),
        0.5 * (phi[b] + phi[c]),
        0.5 * (phi[c] + phi[a]),
    ]
}

/// Integral of chi_v(phi) over the design domain.
pub fn volume(mesh: &TriMesh, phi: &LevelSetField) -> f64 {
    let tris = mesh.triangles();
    let areas = mesh.areas();
    let per_element = par::map_indexed(tris.len(), |t| {
        let q = quad_values(&phi.values, tris[t]);
        areas[t] * (chi_v(q[0]) + chi_v(q[1]) + chi_v(q[2])) / 3.0
    });
    par::sum(&per_element)
}

/// Integral of 1 over the design domain (volFDD in the logs).
pub fn domain_area(mesh: &TriMesh) -> f64 {
    mesh.total_area()
}
