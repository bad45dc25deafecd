//! Semi-implicit time stepping of the level set field.
//!
//! Both schemes solve the same linear operator
//!
//!   (M / dt + tau L^2 K) phi = M (r + history)
//!
//! with consistent P1 mass M and scalar stiffness K; only the load differs.
//! The plain reaction-diffusion step uses history = ophi / dt (a regularized
//! gradient flow); the accelerated step uses (2 ophi - oophi) / dt, the
//! first-order memory that turns the flow into the discrete shadow of a damped
//! wave equation and adds Nesterov-style momentum. The left-hand matrix is
//! assembled once and reused across schemes and iterations.

use crate::error::Result;
use crate::fem;
use crate::mesh2d::TriMesh;
use crate::par;
use crate::sparse::{self, Ic0Factor, SparseSymMatrix};

/// Default relative residual for evolution solves.
pub const EVOLUTION_TOL: f64 = 1e-10;

/// Boundary condition for the evolution solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionBc {
    /// pin phi = 1 on the phione-labeled boundary (default)
    PhiOne,
    /// homogeneous Dirichlet on the whole boundary
    ZeroWholeBoundary,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolutionParams {
    /// fictitious time increment
    pub dt: f64,
    /// regularization coefficient
    pub tau: f64,
    /// characteristic length
    pub length_scale: f64,
    /// sensitivity scaling in the reaction term
    pub cdf: f64,
    /// iteration at which acceleration begins
    pub stat_it: usize,
    /// optional iteration at which the accelerated scheme reverts to plain
    /// reaction-diffusion
    pub switch_back_it: Option<usize>,
    pub bc: EvolutionBc,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            dt: 0.7,
            tau: 5e-4,
            length_scale: 1.0,
            cdf: 1.2,
            stat_it: 5,
            switch_back_it: None,
            bc: EvolutionBc::PhiOne,
        }
    }
}

/// r = cdf (Td / AbsTd1 - LagGv), nodewise.
pub fn reaction_field(td_nodal: &[f64], abs_td1: f64, lag_gv: f64, cdf: f64) -> Vec<f64> {
    par::map_indexed(td_nodal.len(), |i| cdf * (td_nodal[i] / abs_td1 - lag_gv))
}

fn scalar_mass_triplets(mesh: &TriMesh) -> Vec<(usize, usize, f64)> {
    let tris = mesh.triangles();
    let areas = mesh.areas();
    let mut t = Vec::with_capacity(9 * tris.len());
    for (e, &nodes) in tris.iter().enumerate() {
        let a = areas[e];
        for i in 0..3 {
            for j in 0..3 {
                let v = if i == j { a / 6.0 } else { a / 12.0 };
                t.push((nodes[i], nodes[j], v));
            }
        }
    }
    t
}

fn scalar_stiffness_triplets(mesh: &TriMesh) -> Vec<(usize, usize, f64)> {
    let tris = mesh.triangles();
    let mut t = Vec::with_capacity(9 * tris.len());
    for (e, &nodes) in tris.iter().enumerate() {
        let (grads, area) = fem::shape_gradients(mesh.triangle_coords(e));
        for i in 0..3 {
            for j in i..3 {
                let v = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                t.push((nodes[i], nodes[j], v));
                if i != j {
                    t.push((nodes[j], nodes[i], v));
                }
            }
        }
    }
    t
}

pub struct StepOutcome {
    pub phi_raw: Vec<f64>,
    pub cg_iterations: usize,
}

/// Pre-assembled evolution operator: reduced left-hand matrix, consistent mass
/// for the load, and the Dirichlet bookkeeping for the pinned nodes.
pub struct EvolutionOperator {
    lhs: SparseSymMatrix,
    factor: Ic0Factor,
    mass: SparseSymMatrix,
    dt: f64,
    tol: f64,
    /// (node, pinned value), sorted by node
    pinned: Vec<(usize, f64)>,
    /// per-node correction subtracted from free rows of the load
    correction: Vec<f64>,
}

impl EvolutionOperator {
    pub fn new(
        mesh: &TriMesh,
        params: &EvolutionParams,
        pinned: Vec<(usize, f64)>,
        tol: f64,
    ) -> Result<Self> {
        let n = mesh.node_count();
        let mass_t = scalar_mass_triplets(mesh);
        let stiff_t = scalar_stiffness_triplets(mesh);
        let coeff = params.tau * params.length_scale * params.length_scale;
        let mut lhs_t = Vec::with_capacity(mass_t.len() + stiff_t.len());
        lhs_t.extend(mass_t.iter().map(|&(i, j, v)| (i, j, v / params.dt)));
        lhs_t.extend(stiff_t.iter().map(|&(i, j, v)| (i, j, coeff * v)));

        let zeros = vec![0.0; n];
        let (lhs, neg_corr) = fem::eliminate_dirichlet(n, &lhs_t, &zeros, &pinned)?;
        // eliminate_dirichlet stores -sum_j A[i][j] d_j in the load slot of
        // free rows; flip sign to get the additive correction.
        let mut correction: Vec<f64> = neg_corr.iter().map(|v| -v).collect();
        for &(node, _) in &pinned {
            correction[node] = 0.0;
        }
        let mass = SparseSymMatrix::from_triplets(n, &mass_t)?;
        let factor = Ic0Factor::new(&lhs)?;
        Ok(Self {
            lhs,
            factor,
            mass,
            dt: params.dt,
            tol,
            pinned,
            correction,
        })
    }

    fn solve(&self, ophi: &[f64], rhs_field: Vec<f64>) -> Result<StepOutcome> {
        let n = self.mass.n();
        let mut b = self.mass.matvec(&rhs_field);
        for (bi, c) in b.iter_mut().zip(&self.correction) {
            *bi -= c;
        }
        let mut x0 = ophi.to_vec();
        for &(node, value) in &self.pinned {
            b[node] = value;
            x0[node] = value;
        }
        let out = sparse::cg_solve_prefactored(
            &self.lhs,
            &b,
            Some(&x0),
            self.tol,
            10 * n,
            &self.factor,
            |_| {},
        )?;
        Ok(StepOutcome {
            phi_raw: out.x,
            cg_iterations: out.iterations,
        })
    }

    /// Reaction-diffusion step: history term ophi / dt.
    pub fn rd_step(&self, ophi: &[f64], r: &[f64]) -> Result<StepOutcome> {
        let dt = self.dt;
        let rhs = par::map_indexed(ophi.len(), |i| r[i] + ophi[i] / dt);
        self.solve(ophi, rhs)
    }

    /// Accelerated step: history term (2 ophi - oophi) / dt.
    pub fn nlhp_step(&self, ophi: &[f64], oophi: &[f64], r: &[f64]) -> Result<StepOutcome> {
        let dt = self.dt;
        let rhs = par::map_indexed(ophi.len(), |i| r[i] + (2.0 * ophi[i] - oophi[i]) / dt);
        self.solve(ophi, rhs)
    }
}

/// One-off reaction-diffusion step (assembles the operator on the fly).
pub fn rd_step(
    mesh: &TriMesh,
    ophi: &[f64],
    r: &[f64],
    params: &EvolutionParams,
    pinned: Vec<(usize, f64)>,
) -> Result<Vec<f64>> {
    let op = EvolutionOperator::new(mesh, params, pinned, EVOLUTION_TOL)?;
    Ok(op.rd_step(ophi, r)?.phi_raw)
}

/// One-off accelerated step (assembles the operator on the fly).
pub fn nlhp_step(
    mesh: &TriMesh,
    ophi: &[f64],
    oophi: &[f64],
    r: &[f64],
    params: &EvolutionParams,
    pinned: Vec<(usize, f64)>,
) -> Result<Vec<f64>> {
    let op = EvolutionOperator::new(mesh, params, pinned, EVOLUTION_TOL)?;
    Ok(op.nlhp_step(ophi, oophi, r)?.phi_raw)
}

/// Pinned node set for a boundary-condition choice.
pub fn pinned_nodes(mesh: &TriMesh, bc: EvolutionBc, phione_labels: &[i32]) -> Vec<(usize, f64)> {
    match bc {
        EvolutionBc::PhiOne => mesh
            .boundary_nodes_with_labels(phione_labels)
            .into_iter()
            .map(|n| (n, 1.0))
            .collect(),
        EvolutionBc::ZeroWholeBoundary => {
            let all: Vec<i32> = {
                let mut l: Vec<i32> = mesh.boundary_edges().iter().map(|e| e.label).collect();
                l.sort_unstable();
                l.dedup();
                l
            };
            mesh.boundary_nodes_with_labels(&all)
                .into_iter()
                .map(|n| (n, 0.0))
                .collect()
        }
    }
}
