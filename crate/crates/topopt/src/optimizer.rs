//! The outer optimization loop: solve the state, evaluate functionals, check
//! convergence, update the multiplier, evolve the level set, clamp, repeat.

use std::time::Instant;

use crate::error::Result;
use crate::evolution::{self, EvolutionOperator, EvolutionParams};
use crate::fem::{self, DisplacementField, MaterialData};
use crate::levelset::{self, InitKind, LevelSetField, SmoothingParams};
use crate::mesh2d::{ModelSpec, TriMesh};
use crate::multiplier::{self, MultiplierParams, MultiplierState};
use crate::sensitivity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rd,
    Nlhp,
}

#[derive(Debug, Clone)]
pub struct OptParams {
    pub max_loop: usize,
    pub eps_opt: f64,
    pub flag_opt_max: u32,
    pub method: Method,
    pub material: MaterialData,
    pub smoothing: SmoothingParams,
    pub evolution: EvolutionParams,
    pub multiplier: MultiplierParams,
    /// threshold for the `Upper` initial configuration
    pub upper_threshold: f64,
    pub state_tol: f64,
    pub evolution_tol: f64,
}

impl Default for OptParams {
    fn default() -> Self {
        Self {
            max_loop: 50000,
            eps_opt: 1e-3,
            flag_opt_max: 10,
            method: Method::Rd,
            material: fem::material_data(2.1e11, 0.3),
            smoothing: SmoothingParams::default(),
            evolution: EvolutionParams::default(),
            multiplier: MultiplierParams::default(),
            upper_threshold: 0.4,
            state_tol: fem::STATE_TOL,
            evolution_tol: evolution::EVOLUTION_TOL,
        }
    }
}

/// One row of the run history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub compliance: f64,
    pub vol_frac: f64,
    pub gv: f64,
    pub gv_max_ex: f64,
    pub lag_gv: f64,
    pub lsf_diff_max: f64,
    pub abs_td1: f64,
    pub cg_iters: usize,
    pub wall_ms: f64,
}

/// Convergence test of the outer loop: the level set must have stopped
/// moving, the ramp must be over, and the volume constraint must hold to the
/// same tolerance, for flag_opt_max + 1 consecutive iterations.
pub fn check_convergence(
    lsf_diff_max: f64,
    gv: f64,
    iter: usize,
    flag: u32,
    eps_opt: f64,
    gv_loop: usize,
    flag_opt_max: u32,
) -> (bool, u32) {
    if lsf_diff_max <= eps_opt && iter > gv_loop && gv <= eps_opt {
        let flag = flag + 1;
        (flag > flag_opt_max, flag)
    } else {
        (false, 0)
    }
}

/// Everything an observer may want at the end of a completed iteration.
pub struct IterationSnapshot<'a> {
    pub iter: usize,
    pub record: &'a IterationRecord,
    /// clamped field produced by this iteration
    pub phi: &'a LevelSetField,
    /// clamped field this iteration started from
    pub phi_prev: &'a LevelSetField,
    pub displacement: &'a DisplacementField,
    /// u' K u on the reduced state system of this iteration
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub history: Vec<IterationRecord>,
    /// iteration index at which the convergence test fired; None if max_loop
    /// was exhausted
    pub converged_at: Option<usize>,
    pub phi: LevelSetField,
    pub displacement: DisplacementField,
    pub compliance: f64,
    pub vol_frac: f64,
}

pub fn run(
    model: &ModelSpec,
    mesh: &TriMesh,
    params: &OptParams,
    init: InitKind,
) -> Result<RunResult> {
    run_with_observer(model, mesh, params, init, |_| {})
}

pub fn run_with_observer(
    model: &ModelSpec,
    mesh: &TriMesh,
    params: &OptParams,
    init: InitKind,
    mut observer: impl FnMut(&IterationSnapshot),
) -> Result<RunResult> {
    let pol = sensitivity::polarization(params.material.youngs, params.material.poisson);
    let pinned = evolution::pinned_nodes(mesh, params.evolution.bc, &model.phione_labels);
    let operator = EvolutionOperator::new(mesh, &params.evolution, pinned, params.evolution_tol)?;

    let mut ophi = levelset::init_phi(init, mesh, params.upper_threshold);
    let mut oophi = ophi.clone();
    let vol_fdd = levelset::domain_area(mesh);
    let vol_init = levelset::volume(mesh, &ophi);

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut flag_opt = 0u32;
    let mut lsf_diff_max = f64::INFINITY;
    let mut mult = MultiplierState::default();
    let mut warm: Option<DisplacementField> = None;
    let mut converged_at = None;
    let mut last = (0.0f64, 0.0f64); // (compliance, vol fraction)

    for iter in 0..params.max_loop {
        let tick = Instant::now();

        let (solved, system) = fem::solve_state_warm(
            mesh,
            model,
            &ophi,
            &params.material,
            &params.smoothing,
            params.state_tol,
            warm.as_ref(),
        )?;
        let compliance = fem::compliance(
            mesh,
            &solved.displacement,
            params.material.traction,
            &model.traction_labels,
        );
        let vol = levelset::volume(mesh, &ophi);
        let vol_frac = vol / vol_fdd;
        let gv_max_ex = multiplier::extended_upper_limit(
            iter,
            vol_init,
            vol_fdd,
            params.multiplier.gv_max,
            params.multiplier.gv_loop,
        );
        let gv = vol_frac - params.multiplier.gv_max;
        last = (compliance, vol_frac);

        let (converged, new_flag) = check_convergence(
            lsf_diff_max,
            gv,
            iter,
            flag_opt,
            params.eps_opt,
            params.multiplier.gv_loop,
            params.flag_opt_max,
        );
        flag_opt = new_flag;
        if converged {
            // the loop stops before updating the multiplier or evolving;
            // record the functionals of this final state, carrying the
            // previous multiplier/normalizer values
            let carried = history
                .last()
                .map(|r| (r.lag_gv, r.abs_td1))
                .unwrap_or((0.0, 0.0));
            history.push(IterationRecord {
                iter,
                compliance,
                vol_frac,
                gv,
                gv_max_ex,
                lag_gv: carried.0,
                lsf_diff_max,
                abs_td1: carried.1,
                cg_iters: solved.cg_iterations,
                wall_ms: tick.elapsed().as_secs_f64() * 1e3,
            });
            converged_at = Some(iter);
            warm = Some(solved.displacement);
            break;
        }

        let td = sensitivity::topological_derivative(
            mesh,
            &solved.displacement,
            &ophi,
            &pol,
            &params.smoothing,
        );
        let abs_td1 = sensitivity::abs_td_normalizer(mesh, &td)?;
        mult =
            multiplier::update_multiplier(mult, vol, vol_fdd, gv_max_ex, &params.multiplier, iter);

        let r = evolution::reaction_field(&td.nodal, abs_td1, mult.lag_gv, params.evolution.cdf);
        let accelerate = params.method == Method::Nlhp
            && iter > params.evolution.stat_it
            && params.evolution.switch_back_it.is_none_or(|s| iter < s);
        let step = if accelerate {
            operator.nlhp_step(&ophi.values, &oophi.values, &r)?
        } else {
            operator.rd_step(&ophi.values, &r)?
        };

        let (phi_new, diff) = levelset::clamp_phi(&step.phi_raw, &ophi.values);
        lsf_diff_max = diff.iter().cloned().fold(0.0, f64::max);
        oophi = std::mem::replace(&mut ophi, phi_new);

        let record = IterationRecord {
            iter,
            compliance,
            vol_frac,
            gv,
            gv_max_ex,
            lag_gv: mult.lag_gv,
            lsf_diff_max,
            abs_td1,
            cg_iters: solved.cg_iterations + step.cg_iterations,
            wall_ms: tick.elapsed().as_secs_f64() * 1e3,
        };
        let energy = system.matrix.quadratic_form(&solved.displacement.dof);
        observer(&IterationSnapshot {
            iter,
            record: &record,
            phi: &ophi,
            phi_prev: &oophi,
            displacement: &solved.displacement,
            energy,
        });
        history.push(record);
        warm = Some(solved.displacement);
    }

    Ok(RunResult {
        history,
        converged_at,
        phi: ophi,
        displacement: warm.unwrap_or_else(|| DisplacementField::zeros(mesh)),
        compliance: last.0,
        vol_frac: last.1,
    })
}
