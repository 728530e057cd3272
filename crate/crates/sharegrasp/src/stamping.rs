//! Wrench stamping: pick a force command that keeps the system in one
//! chosen contact mode, and score its robustness.
//!
//! Given a goal velocity and a target mode `m*`, the pipeline
//!
//! 1. solves the velocity half of the control (`velocity_decomposition`),
//! 2. rejects commands that ram a force-closure direction (crash check),
//! 3. filters all modes by **F-feasibility**: a mode survives when its
//!    environment and hand wrench cones intersect nontrivially *and* its
//!    geometric margin `Φ_g` is positive,
//! 4. filters the survivors (other than `m*`) by **V-feasibility** under
//!    the velocity command,
//! 5. projects the surviving mode cones onto the force-controlled
//!    subspace (rows `R_a^{(n_af)}`) and picks the force command `η_af`
//!    inside the goal mode's projection, as far as possible from every
//!    competitor's projection.
//!
//! The margins: `Φ_g` (how deep the mode's wrench intersection sits
//! inside its own cones), `Φ_c` (angular clearance of `η_af` from
//! competitor projections), and `Ψ = min(Φ_g, Φ_c)`. Scaled by the
//! nominal force magnitude `K_F`, `K_F·Ψ` bounds the smallest
//! disturbance force that can change the contact mode.

use nalgebra::DVector;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

use crate::cone::{sigma, ConeError, Pcc, SigmaDetail};
use crate::geometry::Scene;
use crate::hfvc::{
    crashing_check, v_feasible, velocity_decomposition, CrashCheck, GoalSpec, HfvcAction,
    HfvcError,
};
use crate::modes::{
    enumerate_modes, mode_cones, mode_constraints, ContactMode, ModeCones, ModeError,
};

/// Positive-margin threshold for the F-filter: modes at or below it are
/// treated as `Φ_g = 0` (boundary-degenerate) and dropped.
pub use crate::tol::MARGIN_ZERO;

/// Which cone attained the geometric margin's outer minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginSide {
    Environment,
    Hand,
}

/// The geometric stability margin of one mode, with the attaining
/// facet/edge recorded for gradient-based geometry optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMargin {
    /// `Φ_g = min(σ(C_e, C_e∩C_h), σ(C_h, C_e∩C_h))`, radians.
    pub value: f64,
    /// Side whose σ attained the min (ties break to the environment);
    /// `None` when the intersection is trivial (margin 0).
    pub side: Option<MarginSide>,
    /// Argmin facet/edge of that side's σ computation, when available.
    pub detail: Option<SigmaDetail>,
    /// The intersection cone the margin was measured against.
    pub intersection: Pcc,
}

/// Depth of one cone pair's intersection inside an outer cone; treats a
/// non-pointed outer cone as unbounded depth (no facet can be crossed).
fn sigma_or_flat(outer: &Pcc, inner: &Pcc) -> (f64, Option<SigmaDetail>) {
    match sigma(outer, inner) {
        Ok(res) => (res.value, res.detail),
        Err(ConeError::NonPointed) => (PI / 2.0, None),
        Err(e) => panic!("σ on a contained intersection cannot fail: {e}"),
    }
}

/// `Φ_g` of a mode from its two wrench cones.
///
/// Zero when the cones intersect only at the origin; otherwise the
/// min-max angular depth of the intersection inside each cone. Both
/// cones must be nonzero (an all-separating side has no margin to
/// measure).
pub fn geometric_margin(c_e: &Pcc, c_h: &Pcc) -> GeometricMargin {
    assert!(!c_e.is_zero() && !c_h.is_zero(), "margin needs wrenches on both sides");
    let intersection = c_e.intersect(c_h).expect("same-dimension cones");
    if intersection.is_zero() {
        return GeometricMargin { value: 0.0, side: None, detail: None, intersection };
    }
    let (val_e, det_e) = sigma_or_flat(c_e, &intersection);
    let (val_h, det_h) = sigma_or_flat(c_h, &intersection);
    if val_e <= val_h {
        GeometricMargin {
            value: val_e.max(0.0),
            side: Some(MarginSide::Environment),
            detail: det_e,
            intersection,
        }
    } else {
        GeometricMargin {
            value: val_h.max(0.0),
            side: Some(MarginSide::Hand),
            detail: det_h,
            intersection,
        }
    }
}

/// A closed angular arc on the unit circle: CCW from `start` (radians,
/// normalized to `[0, 2π)`) spanning `width ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

fn norm_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a < 0.0 {
        a += TAU;
    }
    a
}

impl Arc {
    /// Circular distance from an angle to this closed arc (0 inside).
    pub fn distance_to(&self, theta: f64) -> f64 {
        let d = norm_angle(theta - self.start);
        if d <= self.width {
            0.0
        } else {
            (TAU - d).min(d - self.width)
        }
    }
}

/// The angular sector(s) a 2-D cone covers. A line yields its two
/// antipodal zero-width arcs; the full plane yields one full-circle arc.
pub fn sectors_of(cone: &Pcc) -> Vec<Arc> {
    assert_eq!(cone.dim(), 2);
    if cone.is_zero() {
        return Vec::new();
    }
    if cone.is_full() {
        return vec![Arc { start: 0.0, width: TAU }];
    }
    let angle = |g: &DVector<f64>| norm_angle(g[1].atan2(g[0]));
    if cone.span_dim() == 1 {
        let mut arcs: Vec<Arc> = cone
            .generators()
            .iter()
            .map(|g| Arc { start: angle(g), width: 0.0 })
            .collect();
        arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
        arcs.dedup_by(|a, b| (a.start - b.start).abs() < 1e-12);
        return arcs;
    }
    if !cone.is_pointed() {
        // A half-plane {x : n·x ≥ 0}: one π-wide sector centered on n.
        let halfspaces = cone.halfspaces();
        assert_eq!(halfspaces.len(), 1, "non-pointed planar cone short of full is a half-plane");
        let n = &halfspaces[0];
        return vec![Arc { start: norm_angle(n[1].atan2(n[0]) - PI / 2.0), width: PI }];
    }
    // Pointed with span 2: the two extreme generators bound a sector
    // narrower than π; take the short way around.
    let canon = Pcc::canonical(2, cone.generators().iter().cloned());
    let gens = canon.generators();
    assert_eq!(gens.len(), 2, "pointed planar cone has two extreme rays");
    let (a, b) = (angle(&gens[0]), angle(&gens[1]));
    let d = norm_angle(b - a);
    if d <= PI {
        vec![Arc { start: a, width: d }]
    } else {
        vec![Arc { start: b, width: TAU - d }]
    }
}

/// Open remnants of a goal arc after removing a union of closed arcs.
fn subtract_arcs(goal: Arc, cuts: &[Arc]) -> Vec<Arc> {
    // Work in goal-local coordinates: the goal is [0, w].
    let w = goal.width;
    let mut cut_ivs: Vec<(f64, f64)> = Vec::new();
    for c in cuts {
        let s = norm_angle(c.start - goal.start);
        let pieces: &[(f64, f64)] = &[(s, s + c.width)];
        for &(lo, hi) in pieces {
            if hi <= TAU {
                cut_ivs.push((lo, hi));
            } else {
                cut_ivs.push((lo, TAU));
                cut_ivs.push((0.0, hi - TAU));
            }
        }
    }
    // Clip to [0, w], merge, and complement.
    let mut clipped: Vec<(f64, f64)> = cut_ivs
        .into_iter()
        .filter(|&(lo, _)| lo <= w)
        .map(|(lo, hi)| (lo, hi.min(w)))
        .collect();
    clipped.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in clipped {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut out = Vec::new();
    let mut cursor = 0.0;
    let mut covered_start = false;
    for (lo, hi) in &merged {
        if *lo <= 0.0 {
            covered_start = true;
        }
        if *lo > cursor {
            out.push(Arc { start: norm_angle(goal.start + cursor), width: lo - cursor });
        }
        cursor = cursor.max(*hi);
    }
    if cursor < w || (w == 0.0 && merged.is_empty()) {
        out.push(Arc { start: norm_angle(goal.start + cursor), width: w - cursor });
    }
    // A zero-width goal arc survives only when nothing covered it.
    if w == 0.0 && covered_start {
        out.clear();
    }
    out
}

/// Wrench-stamping failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum StampError {
    #[error("commanded velocity rams a force-closure direction")]
    Crash,
    #[error(transparent)]
    Goal(#[from] HfvcError),
    #[error("mode enumeration failed: {0}")]
    Modes(#[from] ModeError),
    #[error("the requested mode is not kinematically consistent for this scene")]
    ModeNotEnumerated,
    #[error("the goal mode fails its own force-feasibility filter")]
    FInfeasibleGoal,
    #[error("the goal velocity contradicts the goal mode's sliding/separation signs")]
    GoalModeVInfeasible,
    #[error("no force command can distinguish the goal mode from its competitors")]
    Indistinguishable,
}

/// How one enumerated mode fared in the filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeDisposition {
    /// The mode being stamped.
    GoalMode,
    /// F-infeasible: wrench cones intersect only at the origin (or one
    /// side has no wrench at all).
    EmptyIntersection,
    /// F-infeasible: boundary-degenerate intersection, `Φ_g = 0`.
    ZeroMargin,
    /// F-feasible but incompatible with the velocity command.
    VInfeasible,
    /// Survived both filters: constrains the force command.
    Competitor,
}

/// Per-mode ledger entry of the filters.
#[derive(Debug, Clone)]
pub struct ModeDiagnostic {
    pub mode: ContactMode,
    pub disposition: ModeDisposition,
    /// `Φ_g` where the F-filter computed it.
    pub phi_g: Option<f64>,
}

/// A stamped action with its margins and the full filter ledger.
#[derive(Debug, Clone)]
pub struct StampingResult {
    pub mode: ContactMode,
    /// The hybrid action; `eta_af` is set. The commanded force is the
    /// negated projected-wrench pick: `η_af = −K_F · force_direction`,
    /// because the force-subspace coordinates of the balancing object
    /// wrench `w = −R_aᵀ[η_af; η_av]` are `−η_af`.
    pub action: HfvcAction,
    /// Unit direction of the chosen balancing wrench in force-subspace
    /// coordinates: inside the goal projection, outside every surviving
    /// competitor projection. Zero for the wrenchless all-separate mode.
    pub force_direction: DVector<f64>,
    /// Geometric margin of the stamped mode, radians.
    pub phi_g: f64,
    /// Clearance of the force command from competitor projections.
    pub phi_c: f64,
    /// `Ψ = min(Φ_g, Φ_c)`.
    pub psi: f64,
    /// `K_F · Ψ`: disturbance-force bound at the scene's nominal force.
    pub disturbance_bound: f64,
    /// Goal-mode cone projected on the force subspace.
    pub goal_projection: Pcc,
    /// Surviving competitors and their projections.
    pub competitor_projections: Vec<(ContactMode, Pcc)>,
    /// Every enumerated mode with its filter outcome.
    pub diagnostics: Vec<ModeDiagnostic>,
}

/// Precomputed per-mode cone data shared by stamping and mode listing.
#[derive(Debug, Clone)]
pub struct FilterEntry {
    pub mode: ContactMode,
    pub cones: ModeCones,
    pub margin: Option<GeometricMargin>,
    /// Nonzero intersection and positive margin.
    pub f_feasible: bool,
}

/// Run the F-filter across all enumerated modes (cones, intersections,
/// margins). Shared by [`wrench_stamp`] and the mode-selection loop so
/// the cone work happens once per scene.
pub fn f_filter(scene: &Scene, modes: &[ContactMode]) -> Vec<FilterEntry> {
    modes
        .iter()
        .map(|mode| {
            let cones = mode_cones(scene, mode);
            if cones.c_e.is_zero() || cones.c_h.is_zero() {
                return FilterEntry { mode: mode.clone(), cones, margin: None, f_feasible: false };
            }
            let margin = geometric_margin(&cones.c_e, &cones.c_h);
            let f_feasible = !margin.intersection.is_zero() && margin.value > MARGIN_ZERO;
            FilterEntry { mode: mode.clone(), cones, margin: Some(margin), f_feasible }
        })
        .collect()
}

/// Pick the force command inside the goal projection, as far as
/// possible from every competitor projection.
///
/// For a 2-D force subspace the projections are angular sectors: the
/// goal sector minus the union of closed competitor sectors leaves open
/// remnant arcs; the command is the midpoint direction of the widest
/// remnant (ties break to the smallest start angle). For a 1-D force
/// subspace directions are signs; the positive sign is preferred when
/// both are free. The clearance `Φ_c` is the angular distance from the
/// chosen direction to the nearest competitor sector, `π` when no
/// competitor constrains the subspace.
pub fn pick_force_control(
    goal_proj: &Pcc,
    other_projs: &[Pcc],
) -> Result<(DVector<f64>, f64), StampError> {
    assert!(!goal_proj.is_zero(), "goal projection carries no direction");
    match goal_proj.dim() {
        2 => {
            let goal_arcs = sectors_of(goal_proj);
            let cuts: Vec<Arc> = other_projs.iter().flat_map(|p| sectors_of(p)).collect();
            let mut remnants: Vec<Arc> = goal_arcs
                .iter()
                .flat_map(|&g| subtract_arcs(g, &cuts))
                .collect();
            if remnants.is_empty() {
                return Err(StampError::Indistinguishable);
            }
            remnants.sort_by(|a, b| {
                b.width.total_cmp(&a.width).then(a.start.total_cmp(&b.start))
            });
            let best = remnants[0];
            let theta = norm_angle(best.start + best.width / 2.0);
            let direction = DVector::from_row_slice(&[theta.cos(), theta.sin()]);
            let phi_c = clearance(&direction, other_projs);
            Ok((direction, phi_c))
        }
        1 => {
            let has = |cone: &Pcc, sign: f64| cone.generators().iter().any(|g| g[0] * sign > 0.0);
            let covered = |sign: f64| other_projs.iter().any(|p| has(p, sign));
            let candidate = [1.0, -1.0]
                .into_iter()
                .find(|&s| has(goal_proj, s) && !covered(s));
            match candidate {
                Some(s) => Ok((DVector::from_row_slice(&[s]), PI)),
                None => Err(StampError::Indistinguishable),
            }
        }
        d => unreachable!("force subspace of dimension {d}"),
    }
}

/// Angular clearance of a force direction from competitor projections:
/// the minimum circular distance from the direction to any competitor
/// sector, `π` when none constrains the subspace, 0 when the direction
/// lies inside one. 1-D subspaces use sign membership.
pub fn clearance(direction: &DVector<f64>, other_projs: &[Pcc]) -> f64 {
    match direction.len() {
        2 => {
            let theta = norm_angle(direction[1].atan2(direction[0]));
            other_projs
                .iter()
                .flat_map(|p| sectors_of(p))
                .map(|a| a.distance_to(theta))
                .fold(PI, f64::min)
        }
        1 => {
            let sign = direction[0].signum();
            let covered = other_projs
                .iter()
                .any(|p| p.generators().iter().any(|g| g[0] * sign > 0.0));
            if covered {
                0.0
            } else {
                PI
            }
        }
        d => unreachable!("force subspace of dimension {d}"),
    }
}

/// Stamp a goal mode: run the full filter pipeline and pick the hybrid
/// action. See the module docs for the stages; errors are returned for
/// crashes, goal/mode incompatibilities, and indistinguishable setups.
pub fn wrench_stamp(
    scene: &Scene,
    m_star: &ContactMode,
    goal: &GoalSpec,
) -> Result<StampingResult, StampError> {
    let modes = enumerate_modes(scene)?;
    if !modes.contains(m_star) {
        return Err(StampError::ModeNotEnumerated);
    }
    let filter = f_filter(scene, &modes);
    stamp_with_filter(scene, m_star, goal, &filter)
}

/// [`wrench_stamp`] on a precomputed filter (mode-selection reuses one
/// filter across every candidate mode).
pub fn stamp_with_filter(
    scene: &Scene,
    m_star: &ContactMode,
    goal: &GoalSpec,
    filter: &[FilterEntry],
) -> Result<StampingResult, StampError> {
    let mc_star = mode_constraints(scene, m_star);
    let mut action = velocity_decomposition(&mc_star.n, goal, scene.char_length)?;

    // Crash check against the all-fixed wrench cone.
    let all_fixed = ContactMode::all_fixed(scene.num_contacts());
    let c_af = filter
        .iter()
        .find(|e| e.mode == all_fixed)
        .map(|e| match &e.margin {
            Some(m) => m.intersection.clone(),
            None => Pcc::zero(3),
        })
        .unwrap_or_else(|| Pcc::zero(3));
    if crashing_check(&c_af, &action) == CrashCheck::CrashRisk {
        return Err(StampError::Crash);
    }

    // V-filter: which F-survivors are compatible with the velocity
    // command (computed for every mode, for the ledger).
    let v_ok: Vec<bool> = filter
        .iter()
        .map(|e| {
            e.f_feasible && {
                let mc = mode_constraints(scene, &e.mode);
                v_feasible(&mc, &action)
            }
        })
        .collect();

    let diagnostics: Vec<ModeDiagnostic> = filter
        .iter()
        .zip(&v_ok)
        .map(|(e, &v)| {
            let disposition = if e.mode == *m_star {
                ModeDisposition::GoalMode
            } else if !e.f_feasible {
                match &e.margin {
                    Some(_) => ModeDisposition::ZeroMargin,
                    None => ModeDisposition::EmptyIntersection,
                }
            } else if !v {
                ModeDisposition::VInfeasible
            } else {
                ModeDisposition::Competitor
            };
            ModeDiagnostic {
                mode: e.mode.clone(),
                disposition,
                phi_g: e.margin.as_ref().map(|m| m.value),
            }
        })
        .collect();

    let competitors: Vec<&FilterEntry> = filter
        .iter()
        .zip(&v_ok)
        .filter(|(e, &v)| v && e.mode != *m_star)
        .map(|(e, _)| e)
        .collect();

    if m_star.is_all_separate() {
        // No contact transmits wrench: nothing to stamp. The mode stands
        // on the velocity command alone, so it is only tenable when no
        // wrench-carrying mode survives the filters; the force command
        // is zero and both margins are vacuous (reported as π).
        if !competitors.is_empty() {
            return Err(StampError::Indistinguishable);
        }
        let n_af = action.n_af;
        action.eta_af = Some(DVector::zeros(n_af));
        return Ok(StampingResult {
            mode: m_star.clone(),
            action,
            force_direction: DVector::zeros(n_af),
            phi_g: PI,
            phi_c: PI,
            psi: PI,
            disturbance_bound: scene.nominal_force * PI,
            goal_projection: Pcc::zero(n_af.max(1)),
            competitor_projections: Vec::new(),
            diagnostics,
        });
    }

    let star_entry = filter
        .iter()
        .find(|e| e.mode == *m_star)
        .ok_or(StampError::ModeNotEnumerated)?;
    if !star_entry.f_feasible {
        return Err(StampError::FInfeasibleGoal);
    }
    if !v_feasible(&mc_star, &action) {
        return Err(StampError::GoalModeVInfeasible);
    }
    if action.n_af == 0 {
        // Pure velocity control leaves no force freedom to separate the
        // goal mode from competitors.
        return Err(StampError::Indistinguishable);
    }

    let p = action.force_rows();
    let star_margin = star_entry.margin.as_ref().expect("f_feasible implies margin");
    let goal_projection = star_margin.intersection.project(&p);
    if goal_projection.is_zero() {
        return Err(StampError::Indistinguishable);
    }
    let competitor_projections: Vec<(ContactMode, Pcc)> = competitors
        .iter()
        .map(|e| {
            let inter = &e.margin.as_ref().expect("f_feasible implies margin").intersection;
            (e.mode.clone(), inter.project(&p))
        })
        .collect();
    let other_projs: Vec<Pcc> =
        competitor_projections.iter().map(|(_, p)| p.clone()).collect();
    let (direction, phi_c) = pick_force_control(&goal_projection, &other_projs)?;

    // The one sign flip of the pipeline: the command coordinates are
    // the negated wrench coordinates (see `StampingResult::action`).
    action.eta_af = Some(-&direction * scene.nominal_force);
    let phi_g = star_margin.value;
    let psi = phi_g.min(phi_c);
    debug_assert!(psi > 0.0);
    Ok(StampingResult {
        mode: m_star.clone(),
        action,
        force_direction: direction,
        phi_g,
        phi_c,
        psi,
        disturbance_bound: scene.nominal_force * psi,
        goal_projection,
        competitor_projections,
        diagnostics,
    })
}
