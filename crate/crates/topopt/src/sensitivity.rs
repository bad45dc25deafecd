//! Topological-derivative reaction field of the compliance Lagrangian and its
//! dimensionless normalizer.
//!
//! The sensitivity per element is (A e(u)) . e(u) * chi_p(phi) with the
//! polarization matrix A built from the material constants. Strains are
//! constant per element; nodal values come from area-weighted averaging of the
//! adjacent elements. The Lagrange multiplier is not folded in here; it enters
//! the reaction term downstream.

use crate::error::{Error, Result};
use crate::fem::{self, DisplacementField};
use crate::levelset::{self, LevelSetField, SmoothingParams};
use crate::mesh2d::TriMesh;
use crate::par;

#[derive(Debug, Clone, Copy)]
pub struct PolarizationData {
    pub a1: f64,
    pub a2: f64,
    pub matrix: [[f64; 3]; 3],
}

/// Polarization coefficients for circular inclusions in plane elasticity.
pub fn polarization(youngs: f64, poisson: f64) -> PolarizationData {
    let a1 = youngs
        * (-3.0 * (1.0 - poisson) / (2.0 * (1.0 + poisson) * (7.0 - 5.0 * poisson)))
        * ((1.0 - 14.0 * poisson + 15.0 * poisson * poisson) / (1.0 - 2.0 * poisson).powi(2));
    let a2 = youngs * (15.0 * (1.0 - poisson) / (2.0 * (1.0 + poisson) * (7.0 - 5.0 * poisson)));
    PolarizationData {
        a1,
        a2,
        matrix: [
            [a1 + 2.0 * a2, a1, 0.0],
            [a1, a1 + 2.0 * a2, 0.0],
            [0.0, 0.0, a2],
        ],
    }
}

/// Sensitivity values: per element (quadrature form) and projected to nodes.
#[derive(Debug, Clone)]
pub struct SensitivityField {
    pub element: Vec<f64>,
    pub nodal: Vec<f64>,
}

/// (A e(u)) . e(u) * chi_p(phi) per element, projected to nodes by
/// area-weighted averaging.
pub fn topological_derivative(
    mesh: &TriMesh,
    u: &DisplacementField,
    phi: &LevelSetField,
    pol: &PolarizationData,
    smoothing: &SmoothingParams,
) -> SensitivityField {
    let tris = mesh.triangles();
    let areas = mesh.areas();
    let element = par::map_indexed(tris.len(), |t| {
        let e = fem::element_strain(mesh, t, u);
        let a = &pol.matrix;
        let ae = [
            a[0][0] * e[0] + a[0][1] * e[1] + a[0][2] * e[2],
            a[1][0] * e[0] + a[1][1] * e[1] + a[1][2] * e[2],
            a[2][0] * e[0] + a[2][1] * e[1] + a[2][2] * e[2],
        ];
        let q = levelset::quad_values(&phi.values, tris[t]);
        let chi = (levelset::chi_p(q[0], smoothing)
            + levelset::chi_p(q[1], smoothing)
            + levelset::chi_p(q[2], smoothing))
            / 3.0;
        (ae[0] * e[0] + ae[1] * e[1] + ae[2] * e[2]) * chi
    });

    let n = mesh.node_count();
    let mut weighted = vec![0.0f64; n];
    let mut weight = vec![0.0f64; n];
    for (t, &nodes) in tris.iter().enumerate() {
        for nid in nodes {
            weighted[nid] += areas[t] * element[t];
            weight[nid] += areas[t];
        }
    }
    let nodal = par::map_indexed(n, |i| weighted[i] / weight[i]);
    SensitivityField { element, nodal }
}

/// Mean of |Td| over the design domain: integral of the element values divided
/// by the domain area. Guards against a vanished state field.
pub fn abs_td_normalizer(mesh: &TriMesh, td: &SensitivityField) -> Result<f64> {
    let areas = mesh.areas();
    let per_element = par::map_indexed(td.element.len(), |t| areas[t] * td.element[t].abs());
    let total = par::sum(&per_element);
    let normalized = total / mesh.total_area();
    if normalized == 0.0 {
        return Err(Error::ZeroSensitivity);
    }
    Ok(normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::material_data;
    use crate::mesh2d;

    #[test]
    fn polarization_reference_values() {
        let p = polarization(2.1e11, 0.3);
        assert!((p.a1 - 3.5658e11).abs() < 1e8, "a1 = {}", p.a1);
        assert!((p.a2 - 1.5420e11).abs() < 1e8, "a2 = {}", p.a2);
        // the quadratic factor is negative at nu = 0.3, which makes a1 positive
        let nu = 0.3f64;
        assert!((1.0 - 14.0 * nu + 15.0 * nu * nu - (-1.85)).abs() < 1e-12);
        assert!(p.a1 > 0.0 && p.a2 > 0.0);
    }

    fn strain_field(mesh: &TriMesh, e11: f64, e22: f64, gamma: f64) -> DisplacementField {
        let mut u = DisplacementField::zeros(mesh);
        for (i, &[x, y]) in mesh.nodes().iter().enumerate() {
            u.dof[2 * i] = e11 * x + gamma * y;
            u.dof[2 * i + 1] = e22 * y;
        }
        u
    }

    #[test]
    fn zero_state_gives_zero_td_and_a_guard_error() {
        let (_, mesh) = mesh2d::cantilever_model(1).unwrap();
        let phi = LevelSetField::constant(&mesh, 1.0);
        let pol = polarization(2.1e11, 0.3);
        let u = DisplacementField::zeros(&mesh);
        let td = topological_derivative(&mesh, &u, &phi, &pol, &SmoothingParams::default());
        assert!(td.nodal.iter().all(|&v| v == 0.0));
        assert!(matches!(
            abs_td_normalizer(&mesh, &td),
            Err(Error::ZeroSensitivity)
        ));
    }

    #[test]
    fn uniform_strain_matches_matrix_form_oracle() {
        let (_, mesh) = mesh2d::cantilever_model(1).unwrap();
        let phi = LevelSetField::constant(&mesh, 1.0); // chi_p = 1
        let pol = polarization(2.1e11, 0.3);
        let s = SmoothingParams::default();

        let e = 1e-3;
        let uniaxial = strain_field(&mesh, e, 0.0, 0.0);
        let td = topological_derivative(&mesh, &uniaxial, &phi, &pol, &s);
        let want = (pol.a1 + 2.0 * pol.a2) * e * e;
        for &v in &td.nodal {
            assert!((v - want).abs() < 1e-9 * want);
        }
        // mean of a constant is the constant
        assert!((abs_td_normalizer(&mesh, &td).unwrap() - want).abs() < 1e-9 * want);

        let gamma = 2e-3;
        let shear = strain_field(&mesh, 0.0, 0.0, gamma);
        let td = topological_derivative(&mesh, &shear, &phi, &pol, &s);
        let want = pol.a2 * gamma * gamma;
        for &v in &td.nodal {
            assert!((v - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn td_is_quadratic_in_u() {
        let (spec, mesh) = mesh2d::cantilever_model(1).unwrap();
        let phi = crate::levelset::init_phi(crate::levelset::InitKind::Perforated, &mesh, 0.4);
        let mat = material_data(2.1e11, 0.3);
        let s = SmoothingParams::default();
        let pol = polarization(mat.youngs, mat.poisson);
        let solved = crate::fem::solve_state(&mesh, &spec, &phi, &mat, &s).unwrap();
        let u = solved.displacement;
        let mut u2 = u.clone();
        for v in &mut u2.dof {
            *v *= 2.0;
        }
        let td1 = topological_derivative(&mesh, &u, &phi, &pol, &s);
        let td2 = topological_derivative(&mesh, &u2, &phi, &pol, &s);
        for (a, b) in td1.nodal.iter().zip(&td2.nodal) {
            assert!((b - 4.0 * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn normalized_td_invariant_under_load_scaling() {
        let (spec, mesh) = mesh2d::cantilever_model(1).unwrap();
        let phi = LevelSetField::constant(&mesh, 1.0);
        let s = SmoothingParams::default();
        let mut mat = material_data(2.1e11, 0.3);
        let pol = polarization(mat.youngs, mat.poisson);

        let solved = crate::fem::solve_state(&mesh, &spec, &phi, &mat, &s).unwrap();
        let td = topological_derivative(&mesh, &solved.displacement, &phi, &pol, &s);
        let norm = abs_td_normalizer(&mesh, &td).unwrap();
        let ratio: Vec<f64> = td.nodal.iter().map(|v| v / norm).collect();

        mat.traction = [0.0, -3.0e3];
        let solved3 = crate::fem::solve_state(&mesh, &spec, &phi, &mat, &s).unwrap();
        let td3 = topological_derivative(&mesh, &solved3.displacement, &phi, &pol, &s);
        let norm3 = abs_td_normalizer(&mesh, &td3).unwrap();
        for (r, (v, _)) in ratio.iter().zip(td3.nodal.iter().zip(0..)) {
            assert!((v / norm3 - r).abs() < 1e-6 * r.abs().max(1e-6));
        }
    }

    #[test]
    fn mixed_sign_normalizer_uses_absolute_values() {
        let (_, mesh) = mesh2d::cantilever_model(1).unwrap();
        let nt = mesh.triangle_count();
        // synthetic element field alternating +1 / -1
        let element: Vec<f64> = (0..nt)
            .map(|t| if t % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let td = SensitivityField {
            element,
            nodal: vec![0.0; mesh.node_count()],
        };
        // quadrature oracle: sum of area * |v| / total area
        let oracle: f64 = mesh
            .areas()
            .iter()
            .zip(&td.element)
            .map(|(a, v)| a * v.abs())
            .sum::<f64>()
            / mesh.total_area();
        let got = abs_td_normalizer(&mesh, &td).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        assert!((got - 1.0).abs() < 1e-12);
    }
}
