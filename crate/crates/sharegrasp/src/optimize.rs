//! Gradient ascent on the geometric stability margin over contact
//! geometry.
//!
//! The margin of a mode is an angular min–max: the depth of the two
//! wrench cones' intersection behind the facets of the shallower cone.
//! At a non-degenerate geometry the bottleneck is a single facet `F`
//! (one boundary ray `Cᵢ` for a planar cone, or a generator pair
//! `Cᵢ, Cⱼ` for a full cone) against a single intersection edge `E`
//! (either a generator `Cₖ` of one parent cone, or the crossing line of
//! one facet from each cone). Restricted to that bottleneck the margin
//! is a closed-form angle between unit screws:
//!
//! * ray facet, generator edge:   `Φ = arccos(Cᵢ · Cₖ)`
//! * ray facet, crossing edge:    `Φ = arccos(Cᵢ · ŵ)`
//! * plane facet, generator edge: `Φ = arcsin(n̂ · Cₖ)`
//! * plane facet, crossing edge:  `Φ = arcsin(n̂ · ŵ)`
//!
//! with `n̂ = s_F (Cᵢ×Cⱼ)/‖Cᵢ×Cⱼ‖` the inward facet normal and
//! `w = (C₁×C₂)×(C₃×C₄)` the crossing line of the two facets, signed to
//! point along the actual edge. Every screw is the normalized
//! friction-edge wrench of one contact — an explicit function of the
//! contact point, normal angle and friction coefficient — so the
//! gradient chains through those expressions in closed form. The raw
//! per-screw gradients are projected onto each screw's tangent plane
//! (`Φ_t · C_t = 0` afterwards), which removes the meaningless radial
//! component and makes the chain rule through the unit normalization
//! exact; finite differences reproduce the result to first order.
//!
//! [`optimize_geometry`] runs fixed-step ascent with box clamping,
//! re-identifying the bottleneck from scratch every iteration. Near a
//! plateau the active screw set alternates between iterations and the
//! margin zig-zags by `O(step · slope²)`; that is expected behavior, not
//! an error, and the step default is sized so the zig-zag stays well
//! below the margins it climbs.

use nalgebra::{DVector, Vector3};

use crate::cone::{Facet, Pcc};
use crate::geometry::{cross2, raw_friction_edge, tangent, Contact, Edge, Scene, SceneParam};
use crate::modes::{mode_cones, ContactMode, ModeCones};
use crate::stamping::{geometric_margin, MarginSide};
use crate::tol;

/// Unit-vector distance below which a cone generator and an intersection
/// edge are identified as the same ray during backtracking.
const DIRECTION_MATCH: f64 = 1e-7;

/// `|n̂ · ê|` below which an edge is taken to lie on a facet plane.
const PLANE_MATCH: f64 = 1e-7;

/// Ascent stops when every gradient entry is below this magnitude.
const GRAD_CONVERGED: f64 = 1e-8;

/// Errors of the margin-anatomy and ascent operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OptError {
    /// The mode's margin is zero, flat or has no identifiable bottleneck
    /// screws, so there is no usable gradient anchor.
    #[error("margin is zero or has no differentiable bottleneck")]
    DegenerateMargin,
    /// The starting geometry already has a degenerate margin.
    #[error("starting geometry has no positive margin to ascend")]
    DegenerateStart,
}

/// Dimension of the bottleneck facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetCase {
    /// Boundary ray of a planar cone; angles are ray-to-ray (`arccos`).
    Ray,
    /// Two-generator facet of a full cone; angles are ray-to-plane
    /// (`arcsin`).
    Plane,
}

/// Provenance of the bottleneck intersection edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCase {
    /// The edge is a generator of one parent cone.
    Generator,
    /// The edge is the crossing line of one facet from each cone,
    /// `(C₁×C₂)×(C₃×C₄)`.
    Intersection,
}

/// One contact screw: a friction-cone edge of one contact on one side of
/// the grasp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ScrewId {
    pub side: MarginSide,
    pub contact: usize,
    pub edge: Edge,
}

/// The screws the margin currently depends on. Equality of two active
/// sets across nearby geometries certifies that the margin is locally a
/// single smooth branch.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ActiveSet {
    /// Side whose facet is the bottleneck.
    pub side: MarginSide,
    pub facet_case: FacetCase,
    pub edge_case: EdgeCase,
    /// Facet screws: one for a ray facet, two for a plane facet.
    pub facet: Vec<ScrewId>,
    /// Edge screws: one generator, or the two facet pairs (environment
    /// pair first) whose crossing is the edge.
    pub edge: Vec<ScrewId>,
}

/// Margin value plus everything the gradient chain needs: which screws
/// form the bottleneck and with what signs.
#[derive(Debug, Clone)]
pub struct MarginAnatomy {
    /// The margin of the mode (radians), as the stamping filter computes
    /// it.
    pub phi_g: f64,
    /// Bottleneck screws by identity.
    pub active: ActiveSet,
    facet_units: Vec<Vector3<f64>>,
    facet_sign: f64,
    edge_unit: Vector3<f64>,
    edge_units: Vec<Vector3<f64>>,
    edge_sign: f64,
}

/// The geometry degrees of freedom to ascend over, with a box and the
/// ascent schedule.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    /// Scene attributes to vary.
    pub entries: Vec<SceneParam>,
    /// Per-entry inclusive `(low, high)` box. For a contact coordinate
    /// constrained to a face of the object, the box is its arc-length
    /// extent along that face.
    pub bounds: Vec<(f64, f64)>,
    /// Fixed ascent step (parameter units per unit gradient).
    #[serde(default = "default_step")]
    pub step: f64,
    /// Iteration cap.
    #[serde(default = "default_cap")]
    pub cap: usize,
}

/// Default ascent step. Sized for metric parameters on decimeter-scale
/// scenes, where margin slopes reach ~10 rad/m: the plateau zig-zag
/// amplitude scales as `step · slope²`, and this default keeps it below
/// 1e-2 rad while still crossing a whole face in well under the default
/// iteration cap.
pub const DEFAULT_STEP: f64 = 5e-5;

/// Default iteration cap.
pub const DEFAULT_CAP: usize = 200;

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

impl ParamSpec {
    /// A spec with the default step and cap.
    pub fn new(entries: Vec<SceneParam>, bounds: Vec<(f64, f64)>) -> Self {
        ParamSpec { entries, bounds, step: DEFAULT_STEP, cap: DEFAULT_CAP }
    }

    /// Panic unless the spec is well-formed for `scene`: every entry
    /// addresses an existing contact, every bound is a finite ordered
    /// pair, the step is positive and the cap nonzero.
    fn check(&self, scene: &Scene) {
        assert!(!self.entries.is_empty(), "parameter spec has no entries");
        assert_eq!(self.entries.len(), self.bounds.len(), "one bound pair per entry");
        for e in &self.entries {
            assert!(
                e.contact_index() < scene.num_contacts(),
                "parameter references contact {} of a {}-contact scene",
                e.contact_index(),
                scene.num_contacts()
            );
        }
        for &(lo, hi) in &self.bounds {
            assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "bounds must be finite and ordered");
        }
        assert!(self.step > 0.0, "step must be positive");
        assert!(self.cap > 0, "iteration cap must be positive");
    }

    fn clamp(&self, p: &mut [f64]) {
        for (v, &(lo, hi)) in p.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Write a parameter vector into a scene (entry order).
    pub fn apply(&self, scene: &mut Scene, p: &[f64]) {
        for (e, &v) in self.entries.iter().zip(p) {
            e.set(scene, v);
        }
    }
}

/// One evaluated iterate of the ascent.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OptIteration {
    pub params: Vec<f64>,
    pub phi_g: f64,
    pub active: ActiveSet,
}

/// The full ascent trajectory. The last iteration is the final evaluated
/// geometry; a step whose result was never evaluated is not reported.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OptTrace {
    pub iterations: Vec<OptIteration>,
    pub final_params: Vec<f64>,
}

impl OptTrace {
    pub fn initial_phi_g(&self) -> f64 {
        self.iterations.first().expect("trace is never empty").phi_g
    }

    pub fn final_phi_g(&self) -> f64 {
        self.iterations.last().expect("trace is never empty").phi_g
    }
}

fn v3(g: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(g[0], g[1], g[2])
}

/// Ordering key for canonicalizing screw pairs inside an active set.
fn screw_key(r: &crate::geometry::EdgeRef) -> (usize, u8) {
    (r.contact, match r.edge { Edge::Left => 0, Edge::Right => 1 })
}

/// Compute the margin of a mode together with its bottleneck anatomy:
/// which facet of which cone, against which intersection edge, each
/// backtracked to the friction-edge screws of specific contacts.
///
/// Fails with [`OptError::DegenerateMargin`] when the margin is zero,
/// when it is flat (non-pointed outer cone), or when the bottleneck
/// cannot be anchored to screws (single-generator intersection of a
/// single-generator cone, numerically unresolvable backtracking).
pub fn margin_value_and_screws(
    scene: &Scene,
    mode: &ContactMode,
) -> Result<MarginAnatomy, OptError> {
    let cones = mode_cones(scene, mode);
    if cones.c_e.is_zero() || cones.c_h.is_zero() {
        return Err(OptError::DegenerateMargin);
    }
    let margin = geometric_margin(&cones.c_e, &cones.c_h);
    if margin.value <= tol::MARGIN_ZERO {
        return Err(OptError::DegenerateMargin);
    }
    let (Some(side), Some(detail)) = (margin.side, margin.detail) else {
        return Err(OptError::DegenerateMargin);
    };
    let (outer, outer_sources) = match side {
        MarginSide::Environment => (&cones.c_e, &cones.e_sources),
        MarginSide::Hand => (&cones.c_h, &cones.h_sources),
    };
    let screw = |s: MarginSide, sources: &[crate::geometry::EdgeRef], k: usize| ScrewId {
        side: s,
        contact: sources[k].contact,
        edge: sources[k].edge,
    };
    let (facet_case, facet_units, facet_ids, facet_sign) = match &detail.facet {
        Facet::Ray { index, direction } => (
            FacetCase::Ray,
            vec![v3(direction)],
            vec![screw(side, outer_sources, *index)],
            1.0,
        ),
        Facet::Plane { anchor: Some((i, j)), orientation, .. } => {
            // Canonicalize the pair order so equal active sets compare
            // equal; swapping flips the cross product, hence the sign.
            let (i, j, s) = if screw_key(&outer_sources[*j]) < screw_key(&outer_sources[*i]) {
                (*j, *i, -*orientation)
            } else {
                (*i, *j, *orientation)
            };
            (
                FacetCase::Plane,
                vec![v3(&outer.generators()[i]), v3(&outer.generators()[j])],
                vec![screw(side, outer_sources, i), screw(side, outer_sources, j)],
                s,
            )
        }
        Facet::Plane { anchor: None, .. } => return Err(OptError::DegenerateMargin),
    };
    let edge_unit = v3(&margin.intersection.generators()[detail.edge_index]);
    let (edge_case, edge_units, edge_ids, edge_sign) = backtrack_edge(&cones, edge_unit)?;
    Ok(MarginAnatomy {
        phi_g: margin.value,
        active: ActiveSet {
            side,
            facet_case,
            edge_case,
            facet: facet_ids,
            edge: edge_ids,
        },
        facet_units,
        facet_sign,
        edge_unit,
        edge_units,
        edge_sign,
    })
}

/// Trace an intersection edge back to parent-cone screws: a coinciding
/// generator of either cone, else the crossing of one facet plane from
/// each cone.
fn backtrack_edge(
    cones: &ModeCones,
    e_hat: Vector3<f64>,
) -> Result<(EdgeCase, Vec<Vector3<f64>>, Vec<ScrewId>, f64), OptError> {
    let sides = [
        (MarginSide::Environment, &cones.c_e, &cones.e_sources),
        (MarginSide::Hand, &cones.c_h, &cones.h_sources),
    ];
    for (side, cone, sources) in sides {
        for (k, g) in cone.generators().iter().enumerate() {
            if (v3(g) - e_hat).norm() <= DIRECTION_MATCH {
                let id = ScrewId { side, contact: sources[k].contact, edge: sources[k].edge };
                return Ok((EdgeCase::Generator, vec![v3(g)], vec![id], 1.0));
            }
        }
    }
    let (e_units, e_ids) =
        plane_pair(&cones.c_e, &cones.e_sources, MarginSide::Environment, e_hat)
            .ok_or(OptError::DegenerateMargin)?;
    let (h_units, h_ids) = plane_pair(&cones.c_h, &cones.h_sources, MarginSide::Hand, e_hat)
        .ok_or(OptError::DegenerateMargin)?;
    let w = e_units[0].cross(&e_units[1]).cross(&h_units[0].cross(&h_units[1]));
    if w.norm() <= 1e-12 {
        return Err(OptError::DegenerateMargin);
    }
    let sign = if w.dot(&e_hat) >= 0.0 { 1.0 } else { -1.0 };
    if (sign * w.normalize() - e_hat).norm() > 1e-6 {
        // The matched planes do not actually cross along the edge.
        return Err(OptError::DegenerateMargin);
    }
    Ok((
        EdgeCase::Intersection,
        vec![e_units[0], e_units[1], h_units[0], h_units[1]],
        vec![e_ids[0], e_ids[1], h_ids[0], h_ids[1]],
        sign,
    ))
}

/// A generator pair of `cone` spanning a facet plane that contains
/// `e_hat`: a two-generator facet of a full cone, or the whole span
/// plane of a planar cone.
fn plane_pair(
    cone: &Pcc,
    sources: &[crate::geometry::EdgeRef],
    side: MarginSide,
    e_hat: Vector3<f64>,
) -> Option<([Vector3<f64>; 2], [ScrewId; 2])> {
    let facets = cone.facets().ok()?;
    let pick = |i: usize, j: usize| {
        // Canonical pair order; the crossing edge's sign is resolved
        // against the actual edge afterwards, so no bookkeeping here.
        let (i, j) = if screw_key(&sources[j]) < screw_key(&sources[i]) { (j, i) } else { (i, j) };
        let units = [v3(&cone.generators()[i]), v3(&cone.generators()[j])];
        let ids = [
            ScrewId { side, contact: sources[i].contact, edge: sources[i].edge },
            ScrewId { side, contact: sources[j].contact, edge: sources[j].edge },
        ];
        (units, ids)
    };
    let mut ray_indices = Vec::new();
    for f in &facets {
        match f {
            Facet::Plane { normal, anchor: Some((i, j)), .. } => {
                if normal.dot(&DVector::from_column_slice(e_hat.as_slice())).abs() <= PLANE_MATCH {
                    return Some(pick(*i, *j));
                }
            }
            Facet::Plane { anchor: None, .. } => {}
            Facet::Ray { index, .. } => ray_indices.push(*index),
        }
    }
    if ray_indices.len() == 2 {
        let (i, j) = (ray_indices[0], ray_indices[1]);
        let n = v3(&cone.generators()[i]).cross(&v3(&cone.generators()[j]));
        if n.norm() > 1e-12 && n.normalize().dot(&e_hat).abs() <= PLANE_MATCH {
            return Some(pick(i, j));
        }
    }
    None
}

/// The projected margin gradient with respect to each distinct bottleneck
/// screw's unit vector: `(screw, Φ_t)` with `Φ_t · C_t = 0`.
fn screw_gradients(anatomy: &MarginAnatomy) -> Vec<(ScrewId, Vector3<f64>, Vector3<f64>)> {
    let e_hat = anatomy.edge_unit;
    // Accumulate raw (unprojected) gradients per distinct screw; a screw
    // serving both a facet and an edge role sums its contributions.
    let mut acc: Vec<(ScrewId, Vector3<f64>, Vector3<f64>)> = Vec::new();
    let mut add = |id: ScrewId, unit: Vector3<f64>, grad: Vector3<f64>| {
        if let Some(entry) = acc.iter_mut().find(|(i, _, _)| *i == id) {
            entry.2 += grad;
        } else {
            acc.push((id, unit, grad));
        }
    };
    // Facet part: Φ = arccos(x) for a ray facet (x = Cᵢ·ê) or
    // Φ = arcsin(x) for a plane facet (x = n̂·ê, n̂ = s_F â). `g_e` is
    // dΦ/dê for chaining through the edge expression below.
    let g_e: Vector3<f64>;
    match anatomy.active.facet_case {
        FacetCase::Ray => {
            let u_i = anatomy.facet_units[0];
            let x = u_i.dot(&e_hat).clamp(-1.0, 1.0);
            let arcd = -1.0 / (1.0 - x * x).max(1e-30).sqrt();
            add(anatomy.active.facet[0], u_i, arcd * e_hat);
            g_e = arcd * u_i;
        }
        FacetCase::Plane => {
            let (u_i, u_j) = (anatomy.facet_units[0], anatomy.facet_units[1]);
            let a = anatomy.facet_sign * u_i.cross(&u_j);
            let na = a.norm();
            let a_hat = a / na;
            let x = a_hat.dot(&e_hat).clamp(-1.0, 1.0);
            let arcd = 1.0 / (1.0 - x * x).max(1e-30).sqrt();
            let q = (e_hat - x * a_hat) / na;
            add(anatomy.active.facet[0], u_i, arcd * anatomy.facet_sign * u_j.cross(&q));
            add(anatomy.active.facet[1], u_j, arcd * anatomy.facet_sign * q.cross(&u_i));
            g_e = arcd * a_hat;
        }
    }
    // Edge part: chain dΦ/dê into the screws that generate the edge.
    match anatomy.active.edge_case {
        EdgeCase::Generator => {
            add(anatomy.active.edge[0], anatomy.edge_units[0], g_e);
        }
        EdgeCase::Intersection => {
            let [u1, u2, u3, u4] =
                [anatomy.edge_units[0], anatomy.edge_units[1], anatomy.edge_units[2], anatomy.edge_units[3]];
            let b = u1.cross(&u2);
            let c = u3.cross(&u4);
            let w = b.cross(&c);
            // ê = s_E w/‖w‖ ⇒ dΦ/dw = s_E (I − êêᵀ) g_e / ‖w‖.
            let h = anatomy.edge_sign * (g_e - g_e.dot(&e_hat) * e_hat) / w.norm();
            let ch = c.cross(&h);
            let hb = h.cross(&b);
            add(anatomy.active.edge[0], u1, u2.cross(&ch));
            add(anatomy.active.edge[1], u2, ch.cross(&u1));
            add(anatomy.active.edge[2], u3, u4.cross(&hb));
            add(anatomy.active.edge[3], u4, hb.cross(&u3));
        }
    }
    // Project every accumulated gradient onto its screw's tangent plane.
    for (_, unit, grad) in &mut acc {
        *grad -= grad.dot(unit) * *unit;
        debug_assert!(
            grad.dot(unit).abs() <= 1e-9 * (1.0 + grad.norm()),
            "projected screw gradient must be tangential"
        );
    }
    acc
}

/// Derivative of the raw (unnormalized, un-negated) friction-edge wrench
/// of `contact` with respect to one scene parameter of the same contact.
fn raw_edge_jacobian(c: &Contact, edge: Edge, char_length: f64, param: SceneParam) -> Vector3<f64> {
    let t = tangent(c.normal);
    let e = match edge {
        Edge::Left => c.normal - c.mu * t,
        Edge::Right => c.normal + c.mu * t,
    };
    let torque_of = |f: nalgebra::Vector2<f64>| cross2(c.point, f) / char_length;
    match param {
        SceneParam::ContactX(_) => Vector3::new(0.0, 0.0, e.y / char_length),
        SceneParam::ContactY(_) => Vector3::new(0.0, 0.0, -e.x / char_length),
        SceneParam::NormalAngle(_) => {
            // dn̂/dθ = t̂, dt̂/dθ = −n̂ ⇒ d(n̂ ∓ μt̂)/dθ = t̂ ± μn̂.
            let de = match edge {
                Edge::Left => t + c.mu * c.normal,
                Edge::Right => t - c.mu * c.normal,
            };
            Vector3::new(de.x, de.y, torque_of(de))
        }
        SceneParam::Mu(_) => {
            let de = match edge {
                Edge::Left => -t,
                Edge::Right => t,
            };
            Vector3::new(de.x, de.y, torque_of(de))
        }
    }
}

/// Chain the projected screw gradients into the spec's parameters:
/// `dΦ/dp = Σ_t Φ_t · dC_t/dp`, where each unit screw is
/// `C = ±r/‖r‖` with `r` the raw friction-edge wrench (the sign is the
/// hand-side negation). Tangency of `Φ_t` reduces the normalization
/// chain to `Φ_t · (dr/dp) / ‖r‖`.
fn chain_to_params(scene: &Scene, anatomy: &MarginAnatomy, spec: &ParamSpec) -> DVector<f64> {
    let screws = screw_gradients(anatomy);
    DVector::from_fn(spec.entries.len(), |row, _| {
        let param = spec.entries[row];
        let mut g = 0.0;
        for (id, _, phi_t) in &screws {
            if id.contact != param.contact_index() {
                continue;
            }
            let contact = &scene.contacts[id.contact];
            let r = raw_friction_edge(contact, id.edge, scene.char_length);
            let dr = raw_edge_jacobian(contact, id.edge, scene.char_length, param);
            let side_sign = match id.side {
                MarginSide::Environment => 1.0,
                MarginSide::Hand => -1.0,
            };
            g += side_sign * phi_t.dot(&dr) / r.norm();
        }
        g
    })
}

/// The analytic gradient of the margin with respect to the spec's
/// parameters at the scene's current geometry.
///
/// Entries whose contact carries no bottleneck screw are exactly zero.
pub fn margin_gradient(
    scene: &Scene,
    mode: &ContactMode,
    spec: &ParamSpec,
) -> Result<DVector<f64>, OptError> {
    spec.check(scene);
    let anatomy = margin_value_and_screws(scene, mode)?;
    Ok(chain_to_params(scene, &anatomy, spec))
}

/// Fixed-step gradient ascent of the margin over the spec's parameters,
/// clamped to the box every step.
///
/// Each iteration re-identifies the bottleneck screws, so the trace
/// shows the active set migrating as the geometry improves and
/// alternating once a plateau is reached. The ascent stops at the
/// iteration cap, when the gradient magnitude falls below `1e-8`, when
/// the box pins every parameter, or when a step lands on a degenerate
/// margin (the trace then ends at the last healthy iterate).
pub fn optimize_geometry(
    scene: &Scene,
    mode: &ContactMode,
    spec: &ParamSpec,
) -> Result<OptTrace, OptError> {
    spec.check(scene);
    let mut p: Vec<f64> = spec.entries.iter().map(|e| e.get(scene)).collect();
    spec.clamp(&mut p);
    let mut iterations: Vec<OptIteration> = Vec::new();
    for _ in 0..spec.cap {
        let mut s = scene.clone();
        spec.apply(&mut s, &p);
        let anatomy = match margin_value_and_screws(&s, mode) {
            Ok(a) => a,
            Err(_) if iterations.is_empty() => return Err(OptError::DegenerateStart),
            Err(_) => break,
        };
        let g = chain_to_params(&s, &anatomy, spec);
        iterations.push(OptIteration {
            params: p.clone(),
            phi_g: anatomy.phi_g,
            active: anatomy.active,
        });
        if g.amax() < GRAD_CONVERGED {
            break;
        }
        let mut next: Vec<f64> =
            p.iter().zip(g.iter()).map(|(pi, gi)| pi + spec.step * gi).collect();
        spec.clamp(&mut next);
        if next == p {
            break;
        }
        p = next;
    }
    let final_params = iterations.last().expect("at least one iterate").params.clone();
    Ok(OptTrace { iterations, final_params })
}
