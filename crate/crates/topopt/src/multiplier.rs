//! Augmented-Lagrangian multiplier for the volume constraint, with the ramped
//! (extended) upper limit used during the first iterations.
//!
//! Only the stored multiplier `lag_gvp` is clamped to its box; the extended
//! multiplier entering the reaction term goes through a linear modification
//! factor afterwards and may leave the box or turn negative.

#[derive(Debug, Clone, Copy)]
pub struct MultiplierParams {
    /// volume-fraction limit
    pub gv_max: f64,
    /// ramp length for the extended upper limit
    pub gv_loop: usize,
    /// coefficient of the linear modification factor
    pub lag_gv_a: f64,
    /// initial multiplier
    pub lag_gv_init: f64,
    /// step coefficient for the multiplier update
    pub lag_gv_c: f64,
    pub lag_gv_max: f64,
    pub lag_gv_min: f64,
}

impl Default for MultiplierParams {
    fn default() -> Self {
        Self {
            gv_max: 0.45,
            gv_loop: 15,
            lag_gv_a: 2.0,
            lag_gv_init: 1.0,
            lag_gv_c: 1.0,
            lag_gv_max: 5.0,
            lag_gv_min: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MultiplierState {
    /// stored (pre-extension) multiplier, kept within its box
    pub lag_gvp: f64,
    /// extended multiplier used in the reaction term
    pub lag_gv: f64,
}

/// Linear ramp of the volume limit from the initial fraction down to gv_max
/// over the first gv_loop iterations.
pub fn extended_upper_limit(
    iter: usize,
    vol_init: f64,
    vol_fdd: f64,
    gv_max: f64,
    gv_loop: usize,
) -> f64 {
    if iter < gv_loop {
        let start = vol_init / vol_fdd;
        start - ((start - gv_max) / gv_loop as f64) * iter as f64
    } else {
        gv_max
    }
}

/// One multiplier update. At iteration 0 the stored multiplier is reset to its
/// initial value before updating.
pub fn update_multiplier(
    state: MultiplierState,
    vol: f64,
    vol_fdd: f64,
    gv_max_ex: f64,
    params: &MultiplierParams,
    iter: usize,
) -> MultiplierState {
    let mut lag_gvp = state.lag_gvp;
    if iter == 0 {
        lag_gvp = params.lag_gv_init;
    }
    let r = (vol / vol_fdd - gv_max_ex) / gv_max_ex;
    let lag_gv_d = if vol / vol_fdd - gv_max_ex < 0.0 {
        -params.lag_gv_c * r.abs()
    } else {
        params.lag_gv_c * r.abs()
    };
    // min/max chain rather than clamp: an inverted box pins to the lower
    // bound instead of panicking
    #[allow(clippy::manual_clamp)]
    let clamped = (lag_gvp + lag_gv_d)
        .min(params.lag_gv_max)
        .max(params.lag_gv_min);
    MultiplierState {
        lag_gvp: clamped,
        lag_gv: clamped * (1.0 + params.lag_gv_a * r),
    }
}
