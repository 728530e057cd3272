//! Brute-force quasi-static oracle: which contact modes are consistent
//! with a hybrid action, and how robust a fixed action stays as the
//! contact geometry varies.
//!
//! The oracle deliberately shares no machinery with the stamping
//! pipeline's cone projections: consistency is decided by standalone
//! feasibility LPs per mode, so it can serve as an independent check of
//! the stamped action's uniqueness claim — an action is sound when the
//! oracle finds exactly the goal mode consistent among all
//! velocity-feasible modes.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::geometry::{Scene, SceneParam};
use crate::hfvc::{v_feasible, HfvcAction};
use crate::lp::LinearProgram;
use crate::modes::{enumerate_modes, mode_cones, mode_constraints, ContactMode};
use crate::stamping::{clearance, f_filter};

/// Whether some wrench reachable by the action balances both contact
/// sets of the mode.
///
/// The hybrid action commands forces only along its `n_af` axes; the
/// velocity-controlled axes are infinitely stiff and can exert any
/// reaction, so the reachable object wrenches form the affine set
/// `w = −R_aᵀ [η_af; η_av]` over free `η_av`. The mode balances when
/// some such `w` is simultaneously a nonnegative combination of the
/// mode's environment wrench rays and of its (negated) hand wrench
/// rays.
fn force_consistent(scene: &Scene, mode: &ContactMode, action: &HfvcAction) -> bool {
    let eta_af = action.eta_af.as_ref().expect("action carries a force command");
    let cones = mode_cones(scene, mode);
    let gens_e = cones.c_e.generators();
    let gens_h = cones.c_h.generators();
    let p = action.force_rows();
    let q = action.velocity_rows();

    // Variables: τ_e (≥ 0), τ_h (≥ 0), η_av (free).
    let ne = gens_e.len();
    let nh = gens_h.len();
    let nv = action.n_av;
    let mut lp = LinearProgram::new(ne + nh + nv);
    for i in 0..ne + nh {
        lp.require_nonneg(i);
    }
    // −Pᵀ η_af: the fixed part of the commanded wrench.
    let mut rhs = [0.0; 3];
    for k in 0..3 {
        for r in 0..action.n_af {
            rhs[k] -= p[(r, k)] * eta_af[r];
        }
    }
    // Σ τ_e g_e + Qᵀ η_av = −Pᵀ η_af, and the same for the hand side.
    for k in 0..3 {
        let mut row_e = vec![0.0; ne + nh + nv];
        let mut row_h = vec![0.0; ne + nh + nv];
        for (i, g) in gens_e.iter().enumerate() {
            row_e[i] = g[k];
        }
        for (j, g) in gens_h.iter().enumerate() {
            row_h[ne + j] = g[k];
        }
        for l in 0..nv {
            row_e[ne + nh + l] = q[(l, k)];
            row_h[ne + nh + l] = q[(l, k)];
        }
        lp.add_eq(&row_e, rhs[k]);
        lp.add_eq(&row_h, rhs[k]);
    }
    lp.is_feasible()
}

/// Every enumerated mode both kinematically and statically consistent
/// with the action: velocity-feasible under the commanded velocity, and
/// force-balanced by some reachable wrench. A sound stamped action
/// yields exactly its goal mode.
pub fn consistent_modes(scene: &Scene, action: &HfvcAction) -> Vec<ContactMode> {
    let modes = enumerate_modes(scene).expect("scene within the contact cap");
    modes
        .into_iter()
        .filter(|m| {
            let mc = mode_constraints(scene, m);
            v_feasible(&mc, action) && force_consistent(scene, m, action)
        })
        .collect()
}

/// One sweep sample: the drawn parameter values and the margins the
/// fixed action retains at that geometry.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepSample {
    /// Drawn values, one per swept parameter, in parameter order.
    pub values: Vec<f64>,
    /// Geometric margin of the goal mode at this geometry (radians).
    pub phi_g: f64,
    /// Clearance of the fixed force direction from the surviving
    /// competitor projections (radians).
    pub phi_c: f64,
    /// `min(Φ_g, Φ_c)`, zeroed when any feasibility gate fails.
    pub psi: f64,
    /// Whether the fixed action still robustly holds the mode here.
    pub feasible: bool,
}

fn infeasible_sample(values: Vec<f64>, phi_g: f64) -> SweepSample {
    SweepSample { values, phi_g, phi_c: 0.0, psi: 0.0, feasible: false }
}

/// Re-evaluate a fixed stamped action across random geometry samples.
///
/// Each sample draws every swept parameter uniformly from its range,
/// rebuilds the scene, and re-runs the mode filters with the action
/// held fixed: the goal mode must stay enumerable, force-feasible, and
/// velocity-consistent, and the fixed force direction must stay inside
/// the goal projection; `Φ_c` is then its clearance from the surviving
/// competitors. Sampling is seeded and the table is ordered by sample
/// index, so a given seed always produces the identical table.
pub fn sweep_parameter(
    scene: &Scene,
    mode: &ContactMode,
    action: &HfvcAction,
    params: &[SceneParam],
    ranges: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
) -> Vec<SweepSample> {
    assert_eq!(params.len(), ranges.len(), "one range per swept parameter");
    let eta_af = action.eta_af.as_ref().expect("action carries a force command");
    // Wrench-coordinate direction of the command (η_af is its negation).
    let direction = if eta_af.norm() > 0.0 { Some(-eta_af / eta_af.norm()) } else { None };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let values: Vec<f64> =
            ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        let mut sample_scene = scene.clone();
        for (param, &v) in params.iter().zip(&values) {
            param.set(&mut sample_scene, v);
        }
        out.push(evaluate_sample(&sample_scene, mode, action, direction.as_ref(), values));
    }
    out
}

fn evaluate_sample(
    scene: &Scene,
    mode: &ContactMode,
    action: &HfvcAction,
    direction: Option<&DVector<f64>>,
    values: Vec<f64>,
) -> SweepSample {
    let modes = match enumerate_modes(scene) {
        Ok(m) => m,
        Err(_) => return infeasible_sample(values, 0.0),
    };
    if !modes.contains(mode) {
        return infeasible_sample(values, 0.0);
    }
    if !v_feasible(&mode_constraints(scene, mode), action) {
        return infeasible_sample(values, 0.0);
    }
    let filter = f_filter(scene, &modes);
    let competitor_projs: Vec<_> = filter
        .iter()
        .filter(|e| {
            e.f_feasible
                && e.mode != *mode
                && v_feasible(&mode_constraints(scene, &e.mode), action)
        })
        .map(|e| {
            let inter = &e.margin.as_ref().expect("feasible entries carry margins").intersection;
            inter.project(&action.force_rows())
        })
        .collect();
    let star = filter.iter().find(|e| e.mode == *mode).expect("mode is enumerated");

    if mode.is_all_separate() {
        // No wrench flows: the mode holds exactly when nothing else
        // competes for the commanded velocity.
        let phi_c = if competitor_projs.iter().all(|p| p.is_zero()) { PI } else { 0.0 };
        let feasible = phi_c > 0.0;
        return SweepSample { values, phi_g: PI, phi_c, psi: if feasible { PI } else { 0.0 }, feasible };
    }

    let phi_g = star.margin.as_ref().map_or(0.0, |m| m.value);
    if !star.f_feasible {
        return infeasible_sample(values, phi_g);
    }
    let Some(direction) = direction else {
        return infeasible_sample(values, phi_g);
    };
    let goal_proj = star
        .margin
        .as_ref()
        .expect("f_feasible implies margin")
        .intersection
        .project(&action.force_rows());
    if !goal_proj.contains(direction) {
        return infeasible_sample(values, phi_g);
    }
    let phi_c = clearance(direction, &competitor_projs);
    let psi = phi_g.min(phi_c);
    SweepSample { values, phi_g, phi_c, psi, feasible: psi > 0.0 }
}
