//! Linearized elasticity on the fixed design domain with ersatz material.
//!
//! P1 displacements, per-element constant strain, plane-strain constitutive
//! matrix acting on the Voigt strain (e11, e22, dy u1 + dx u2). The material
//! coefficient chi_p varies inside elements through the P1 interpolant of the
//! level set, integrated with the three-point edge-midpoint rule. Dirichlet
//! conditions are applied by symmetric elimination (identity rows/columns with
//! right-hand-side correction), which keeps the reduced operator SPD.

use crate::error::{Error, Result};
use crate::levelset::{self, LevelSetField, SmoothingParams};
use crate::mesh2d::{ModelSpec, TriMesh};
use crate::par;
use crate::sparse::{self, Precond, SparseSymMatrix};

/// Default relative residual for state solves.
pub const STATE_TOL: f64 = 1e-10;

/// Isotropic material data and the constant surface traction.
#[derive(Debug, Clone, Copy)]
pub struct MaterialData {
    pub youngs: f64,
    pub poisson: f64,
    pub lambda: f64,
    pub mu: f64,
    /// plane-strain elasticity matrix on Voigt strain
    pub d: [[f64; 3]; 3],
    /// traction vector on the loaded boundary
    pub traction: [f64; 2],
}

/// Lame coefficients and the elasticity matrix from (E, nu). The traction
/// defaults to (0, -1.0e3).
pub fn material_data(youngs: f64, poisson: f64) -> MaterialData {
    let lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = youngs / (2.0 * (1.0 + poisson));
    MaterialData {
        youngs,
        poisson,
        lambda,
        mu,
        d: [
            [lambda + 2.0 * mu, lambda, 0.0],
            [lambda, lambda + 2.0 * mu, 0.0],
            [0.0, 0.0, mu],
        ],
        traction: [0.0, -1.0e3],
    }
}

/// Nodal displacement field, two dof per node, stored flat as
/// [u1_0, u2_0, u1_1, u2_1, ...].
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub dof: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(mesh: &TriMesh) -> Self {
        Self {
            dof: vec![0.0; 2 * mesh.node_count()],
        }
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        [self.dof[2 * i], self.dof[2 * i + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.dof.len() / 2
    }
}

/// P1 shape-function gradients and area for one triangle.
pub(crate) fn shape_gradients(coords: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [p0, p1, p2] = coords;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let area = 0.5 * det;
    let grads = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (grads, area)
}

/// Element stiffness B' D B * weight, exactly symmetric (upper triangle
/// mirrored). `weight` carries area times the quadrature mean of chi_p.
pub(crate) fn element_stiffness(
    coords: [[f64; 2]; 3],
    d: &[[f64; 3]; 3],
    weight: f64,
) -> [[f64; 6]; 6] {
    let (grads, _) = shape_gradients(coords);
    // columns of B per dof: node i, component 0 -> (bx, 0, by); component 1 -> (0, by, bx)
    let mut b = [[0.0f64; 6]; 3];
    for i in 0..3 {
        let [bx, by] = grads[i];
        b[0][2 * i] = bx;
        b[1][2 * i + 1] = by;
        b[2][2 * i] = by;
        b[2][2 * i + 1] = bx;
    }
    let mut db = [[0.0f64; 6]; 3];
    for r in 0..3 {
        for c in 0..6 {
            db[r][c] = d[r][0] * b[0][c] + d[r][1] * b[1][c] + d[r][2] * b[2][c];
        }
    }
    let mut k = [[0.0f64; 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            let mut acc = 0.0;
            for r in 0..3 {
                acc += b[r][i] * db[r][j];
            }
            let v = acc * weight;
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Constant Voigt strain of a P1 displacement on one element.
pub fn element_strain(mesh: &TriMesh, tri: usize, u: &DisplacementField) -> [f64; 3] {
    let nodes = mesh.triangles()[tri];
    let (grads, _) = shape_gradients(mesh.triangle_coords(tri));
    let mut e = [0.0f64; 3];
    for (k, &n) in nodes.iter().enumerate() {
        let [bx, by] = grads[k];
        let [u1, u2] = u.node(n);
        e[0] += bx * u1;
        e[1] += by * u2;
        e[2] += by * u1 + bx * u2;
    }
    e
}

/// Global stiffness triplets for the chi_p-weighted elasticity operator.
pub fn stiffness_triplets(
    mesh: &TriMesh,
    phi: &LevelSetField,
    mat: &MaterialData,
    smoothing: &SmoothingParams,
) -> Vec<(usize, usize, f64)> {
    let tris = mesh.triangles();
    let areas = mesh.areas();
    let n_tri = tris.len();
    let locals = par::map_indexed(n_tri, |t| {
        let q = levelset::quad_values(&phi.values, tris[t]);
        let coeff = (levelset::chi_p(q[0], smoothing)
            + levelset::chi_p(q[1], smoothing)
            + levelset::chi_p(q[2], smoothing))
            / 3.0;
        (
            tris[t],
            element_stiffness(mesh.triangle_coords(t), &mat.d, coeff * areas[t]),
        )
    });
    let mut triplets = Vec::with_capacity(36 * n_tri);
    for (nodes, k) in &locals {
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        triplets.push((
                            2 * nodes[i] + a,
                            2 * nodes[j] + b,
                            k[2 * i + a][2 * j + b],
                        ));
                    }
                }
            }
        }
    }
    triplets
}

/// Load vector from the constant traction on the labeled boundary edges;
/// trapezoid rule is exact for P1 test functions.
pub fn traction_load(mesh: &TriMesh, traction: [f64; 2], labels: &[i32]) -> Vec<f64> {
    let mut f = vec![0.0; 2 * mesh.node_count()];
    for e in mesh.boundary_edges_with_labels(labels) {
        let p = mesh.nodes()[e.nodes[0]];
        let q = mesh.nodes()[e.nodes[1]];
        let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        for nid in e.nodes {
            f[2 * nid] += 0.5 * len * traction[0];
            f[2 * nid + 1] += 0.5 * len * traction[1];
        }
    }
    f
}

/// Symmetric Dirichlet elimination: drop coupled entries, correct the load,
/// put a unit diagonal on fixed dof, set the load there to the fixed value.
pub fn eliminate_dirichlet(
    n: usize,
    triplets: &[(usize, usize, f64)],
    load: &[f64],
    fixed: &[(usize, f64)],
) -> Result<(SparseSymMatrix, Vec<f64>)> {
    let mut fixed_value: Vec<Option<f64>> = vec![None; n];
    for &(dof, v) in fixed {
        if dof >= n {
            return Err(Error::IndexOutOfRange { index: dof, n });
        }
        fixed_value[dof] = Some(v);
    }
    let mut b = load.to_vec();
    let mut reduced = Vec::with_capacity(triplets.len() + fixed.len());
    for &(i, j, v) in triplets {
        match (fixed_value[i], fixed_value[j]) {
            (None, None) => reduced.push((i, j, v)),
            (None, Some(d)) => b[i] -= v * d,
            (Some(_), _) => {}
        }
    }
    for &(dof, v) in fixed {
        reduced.push((dof, dof, 1.0));
        b[dof] = v;
    }
    Ok((SparseSymMatrix::from_triplets(n, &reduced)?, b))
}

/// Assembled state system after Dirichlet elimination.
#[derive(Debug)]
pub struct StateSystem {
    pub matrix: SparseSymMatrix,
    pub load: Vec<f64>,
    pub fixed_dofs: Vec<usize>,
}

pub fn assemble_state_system(
    mesh: &TriMesh,
    model: &ModelSpec,
    phi: &LevelSetField,
    mat: &MaterialData,
    smoothing: &SmoothingParams,
) -> Result<StateSystem> {
    let wall_nodes = mesh.boundary_nodes_with_labels(&model.wall_labels);
    if wall_nodes.is_empty() {
        return Err(Error::SingularSystem(
            "no wall boundary; the elasticity operator has rigid-body modes".into(),
        ));
    }
    let n = 2 * mesh.node_count();
    let triplets = stiffness_triplets(mesh, phi, mat, smoothing);
    let load = traction_load(mesh, mat.traction, &model.traction_labels);
    let fixed: Vec<(usize, f64)> = wall_nodes
        .iter()
        .flat_map(|&nid| [(2 * nid, 0.0), (2 * nid + 1, 0.0)])
        .collect();
    let (matrix, load) = eliminate_dirichlet(n, &triplets, &load, &fixed)?;
    Ok(StateSystem {
        matrix,
        load,
        fixed_dofs: fixed.iter().map(|&(d, _)| d).collect(),
    })
}

pub struct SolvedState {
    pub displacement: DisplacementField,
    pub cg_iterations: usize,
}

/// Solve the state equation with CG (Jacobi preconditioner), optionally warm
/// started from a previous displacement.
pub fn solve_state_warm(
    mesh: &TriMesh,
    model: &ModelSpec,
    phi: &LevelSetField,
    mat: &MaterialData,
    smoothing: &SmoothingParams,
    tol: f64,
    warm: Option<&DisplacementField>,
) -> Result<(SolvedState, StateSystem)> {
    let system = assemble_state_system(mesh, model, phi, mat, smoothing)?;
    let n = system.matrix.n();
    let x0 = warm.map(|w| {
        let mut x = w.dof.clone();
        for &d in &system.fixed_dofs {
            x[d] = system.load[d];
        }
        x
    });
    // incomplete Cholesky: the ersatz contrast makes plain Jacobi crawl
    let out = sparse::cg_solve_warm(
        &system.matrix,
        &system.load,
        x0.as_deref(),
        tol,
        10 * n,
        Precond::Ic0,
    )?;
    Ok((
        SolvedState {
            displacement: DisplacementField { dof: out.x },
            cg_iterations: out.iterations,
        },
        system,
    ))
}

pub fn solve_state(
    mesh: &TriMesh,
    model: &ModelSpec,
    phi: &LevelSetField,
    mat: &MaterialData,
    smoothing: &SmoothingParams,
) -> Result<SolvedState> {
    solve_state_warm(mesh, model, phi, mat, smoothing, STATE_TOL, None).map(|(s, _)| s)
}

/// Solve with prescribed displacement values (used for verification problems
/// driven entirely by boundary data). Zero traction load.
pub fn solve_with_dirichlet(
    mesh: &TriMesh,
    phi: &LevelSetField,
    mat: &MaterialData,
    smoothing: &SmoothingParams,
    fixed: &[(usize, f64)],
    tol: f64,
) -> Result<DisplacementField> {
    let n = 2 * mesh.node_count();
    let triplets = stiffness_triplets(mesh, phi, mat, smoothing);
    let load = vec![0.0; n];
    let (matrix, b) = eliminate_dirichlet(n, &triplets, &load, fixed)?;
    let out = sparse::cg_solve(&matrix, &b, tol, 10 * n, Precond::Jacobi)?;
    Ok(DisplacementField { dof: out.x })
}

/// Mean compliance: integral of t . u over the traction boundary (trapezoid
/// rule, exact for P1).
pub fn compliance(
    mesh: &TriMesh,
    u: &DisplacementField,
    traction: [f64; 2],
    labels: &[i32],
) -> f64 {
    let mut total = 0.0;
    for e in mesh.boundary_edges_with_labels(labels) {
        let p = mesh.nodes()[e.nodes[0]];
        let q = mesh.nodes()[e.nodes[1]];
        let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        let ua = u.node(e.nodes[0]);
        let ub = u.node(e.nodes[1]);
        total += 0.5 * len * (traction[0] * (ua[0] + ub[0]) + traction[1] * (ua[1] + ub[1]));
    }
    total
}
