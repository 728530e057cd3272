//! Planar rigid-body kinematics for shared grasps: frames, contacts,
//! friction-cone edges, contact Jacobians, and contact-point velocity maps.
//!
//! # Coordinate conventions
//!
//! Everything is expressed in the hand frame `H`. Wrenches are 3-vectors
//! `(f_x, f_y, τ/L)` with the torque scaled by the characteristic length
//! `L`, and twists are 3-vectors `(v_x, v_y, L·ω)` with the angular
//! velocity scaled by the same `L`. Under this pairing `w·t` is a true
//! power product, wrench space and twist space carry the same metric, and
//! every angular quantity downstream (cone margins) is invariant under a
//! uniform rescaling of the scene. The generalized velocity stacks the
//! object twist over the hand twist, `V = (v_O; v_H) ∈ R⁶`, both absolute
//! (relative to the world) in `H` coordinates.
//!
//! Contact normals point *into* the object — the direction in which the
//! contact can push — so contact force magnitudes are nonnegative. The
//! tangent is the normal rotated +90° (counter-clockwise); "right sliding"
//! (mode letter `r`) means the object moves along `+t̂` relative to the
//! other body, which leaves only the *left* friction-cone edge
//! `n̂ − μ t̂` able to transmit force; left sliding activates only the
//! right edge `n̂ + μ t̂`.

use nalgebra::{DMatrix, Matrix2, Vector2, Vector3, Vector6};
use thiserror::Error;

/// Which body owns a contact (the other party is always the object).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactOwner {
    /// Environment-object contact (the environment is static).
    Environment,
    /// Hand-object contact (the hand moves with the commanded twist).
    Hand,
}

/// A point contact with Coulomb friction, in hand-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Contact {
    pub owner: ContactOwner,
    /// Contact point, meters, hand frame.
    pub point: Vector2<f64>,
    /// Unit contact normal pointing into the object, hand frame.
    pub normal: Vector2<f64>,
    /// Coulomb friction coefficient, ≥ 0.
    pub mu: f64,
}

/// A planar pose (x, y, θ): the frame's origin and orientation in its
/// parent frame.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn identity() -> Self {
        Pose2 { x: 0.0, y: 0.0, theta: 0.0 }
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn translation(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Express a point given in the parent frame in this frame's
    /// coordinates.
    pub fn point_to_local(&self, p_parent: Vector2<f64>) -> Vector2<f64> {
        self.rotation().transpose() * (p_parent - self.translation())
    }

    /// Express a direction given in the parent frame in this frame's
    /// coordinates.
    pub fn direction_to_local(&self, d_parent: Vector2<f64>) -> Vector2<f64> {
        self.rotation().transpose() * d_parent
    }

    /// Planar twist adjoint: maps a raw twist (v_x, v_y, ω) expressed in
    /// this frame to the same spatial motion expressed in the parent
    /// frame. With R the frame rotation and t its origin in the parent,
    ///
    /// ```text
    ///   v_parent = R v_local + ω (t_y, −t_x),    ω_parent = ω,
    /// ```
    ///
    /// i.e. the 3×3 block matrix [[R, (t_y, −t_x)ᵀ], [0 0 1]]. The linear
    /// part is the velocity of the body material point at the parent
    /// origin; the ω column is the parent-origin lever arm.
    pub fn twist_adjoint_to_parent(&self) -> nalgebra::Matrix3<f64> {
        let r = self.rotation();
        nalgebra::Matrix3::new(
            r[(0, 0)], r[(0, 1)], self.y,
            r[(1, 0)], r[(1, 1)], -self.x,
            0.0, 0.0, 1.0,
        )
    }
}

/// A shared-grasping system: an object held jointly by hand contacts and
/// environment contacts.
///
/// Contact order is stable and index-addressable: mode strings assign one
/// letter per contact in this order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scene {
    /// Pose of the object frame O in the world W (metadata; contact data
    /// below is already in hand-frame coordinates).
    pub object_pose: Pose2,
    /// Pose of the hand frame H in the world W.
    pub hand_pose: Pose2,
    /// Ordered contact list, hand frame.
    pub contacts: Vec<Contact>,
    /// Characteristic length L (meters): torque-to-force and
    /// angular-velocity scaling.
    pub char_length: f64,
    /// Nominal force magnitude K_F (Newtons) used to scale commanded
    /// force directions and disturbance margins.
    pub nominal_force: f64,
}

/// Violations of the structural invariants of [`Scene`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SceneError {
    #[error("characteristic length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("nominal force must be positive, got {0}")]
    NonPositiveForce(f64),
    #[error("scene needs at least one environment contact and one hand contact")]
    MissingContactKind,
    #[error("contact {index}: normal has norm {norm}, expected a unit vector")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("contact {index}: friction coefficient {mu} is negative")]
    NegativeFriction { index: usize, mu: f64 },
    #[error("contact {index}: non-finite coordinate")]
    NonFinite { index: usize },
}

impl Scene {
    /// Check all structural invariants. Every public entry point that
    /// consumes a scene assumes this has passed.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.char_length > 0.0) || !self.char_length.is_finite() {
            return Err(SceneError::NonPositiveLength(self.char_length));
        }
        if !(self.nominal_force > 0.0) || !self.nominal_force.is_finite() {
            return Err(SceneError::NonPositiveForce(self.nominal_force));
        }
        let mut has_env = false;
        let mut has_hand = false;
        for (index, c) in self.contacts.iter().enumerate() {
            if !c.point.iter().chain(c.normal.iter()).all(|v| v.is_finite())
                || !c.mu.is_finite()
            {
                return Err(SceneError::NonFinite { index });
            }
            let norm = c.normal.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(SceneError::NonUnitNormal { index, norm });
            }
            if c.mu < 0.0 {
                return Err(SceneError::NegativeFriction { index, mu: c.mu });
            }
            match c.owner {
                ContactOwner::Environment => has_env = true,
                ContactOwner::Hand => has_hand = true,
            }
        }
        if !has_env || !has_hand {
            return Err(SceneError::MissingContactKind);
        }
        Ok(())
    }

    pub fn num_contacts(&self) -> usize {
        self.contacts.len()
    }
}

/// A scalar degree of freedom of a scene's contact geometry, usable as
/// an optimization variable or a sweep axis. Normal angles use
/// `n̂(θ) = (cos θ, sin θ)` with the tangent its +90° rotation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "contact")]
pub enum SceneParam {
    ContactX(usize),
    ContactY(usize),
    NormalAngle(usize),
    Mu(usize),
}

impl SceneParam {
    /// Contact index this parameter addresses.
    pub fn contact_index(self) -> usize {
        match self {
            SceneParam::ContactX(i)
            | SceneParam::ContactY(i)
            | SceneParam::NormalAngle(i)
            | SceneParam::Mu(i) => i,
        }
    }

    /// Read the parameter's current value from a scene.
    pub fn get(self, scene: &Scene) -> f64 {
        let c = &scene.contacts[self.contact_index()];
        match self {
            SceneParam::ContactX(_) => c.point.x,
            SceneParam::ContactY(_) => c.point.y,
            SceneParam::NormalAngle(_) => c.normal.y.atan2(c.normal.x),
            SceneParam::Mu(_) => c.mu,
        }
    }

    /// Write a value into a scene (normals re-normalized by
    /// construction; μ clamped at 0).
    pub fn set(self, scene: &mut Scene, value: f64) {
        let c = &mut scene.contacts[self.contact_index()];
        match self {
            SceneParam::ContactX(_) => c.point.x = value,
            SceneParam::ContactY(_) => c.point.y = value,
            SceneParam::NormalAngle(_) => c.normal = Vector2::new(value.cos(), value.sin()),
            SceneParam::Mu(_) => c.mu = value.max(0.0),
        }
    }
}

/// Scalar 2D cross product `a × b = a_x b_y − a_y b_x`.
pub fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// The contact tangent: the normal rotated +90° counter-clockwise.
pub fn tangent(normal: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-normal.y, normal.x)
}

/// Friction-cone edge label. Left is the edge `n̂ − μ t̂` (the force
/// direction of a contact whose object slides along `+t̂`), right is
/// `n̂ + μ t̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
}

/// Which contact and which friction-cone edge a wrench-space row came
/// from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct EdgeRef {
    pub contact: usize,
    pub edge: Edge,
}

/// A unit ray in scaled wrench space `(f_x, f_y, τ/L)` with its
/// provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchRay {
    pub direction: Vector3<f64>,
    pub source: EdgeRef,
}

fn wrench_of_force(point: Vector2<f64>, force: Vector2<f64>, char_length: f64) -> Vector3<f64> {
    Vector3::new(force.x, force.y, cross2(point, force) / char_length)
}

/// The unnormalized friction-edge wrench of a contact: the generator of
/// [`friction_edges`] before unit scaling (and before the hand-side
/// negation). Gradient code differentiates this raw expression and chains
/// through the normalization analytically.
pub(crate) fn raw_friction_edge(contact: &Contact, edge: Edge, char_length: f64) -> Vector3<f64> {
    let t = tangent(contact.normal);
    let e = match edge {
        Edge::Left => contact.normal - contact.mu * t,
        Edge::Right => contact.normal + contact.mu * t,
    };
    wrench_of_force(contact.point, e, char_length)
}

/// The two friction-cone edge wrenches of a contact, as unit rays in
/// scaled wrench space, pointing into the object.
///
/// With μ = 0 the two rays coincide (a frictionless contact has a
/// degenerate cone).
pub fn friction_edges(contact: &Contact, index: usize, char_length: f64) -> (WrenchRay, WrenchRay) {
    let make = |edge: Edge| WrenchRay {
        direction: raw_friction_edge(contact, edge, char_length).normalize(),
        source: EdgeRef { contact: index, edge },
    };
    (make(Edge::Left), make(Edge::Right))
}

/// Contact Jacobians of a scene in row form.
///
/// `j_e` has one row per environment-contact friction edge: the wrench the
/// environment can apply to the object through that edge. `j_h` has one
/// row per hand-contact edge: the wrench the *object* applies to the
/// *hand* through that edge (the negated into-object edge), so that with
/// edge force magnitudes `τ_e, τ_h ≥ 0` quasi-static balance of object
/// and hand reads
///
/// ```text
///   J_eᵀ τ_e = J_hᵀ τ_h = −f_H
/// ```
///
/// where `f_H` is the external wrench on the hand. Row order is contact
/// order restricted to the owner, times (left, right); `env_edges` /
/// `hand_edges` record the provenance of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobians {
    pub j_e: DMatrix<f64>,
    pub j_h: DMatrix<f64>,
    pub env_edges: Vec<EdgeRef>,
    pub hand_edges: Vec<EdgeRef>,
}

/// Assemble the contact Jacobians of a scene.
pub fn build_jacobians(scene: &Scene) -> Jacobians {
    let mut e_rows: Vec<Vector3<f64>> = Vec::new();
    let mut h_rows: Vec<Vector3<f64>> = Vec::new();
    let mut env_edges = Vec::new();
    let mut hand_edges = Vec::new();
    for (i, c) in scene.contacts.iter().enumerate() {
        let (left, right) = friction_edges(c, i, scene.char_length);
        match c.owner {
            ContactOwner::Environment => {
                e_rows.push(left.direction);
                env_edges.push(left.source);
                e_rows.push(right.direction);
                env_edges.push(right.source);
            }
            ContactOwner::Hand => {
                h_rows.push(-left.direction);
                hand_edges.push(left.source);
                h_rows.push(-right.direction);
                hand_edges.push(right.source);
            }
        }
    }
    let pack = |rows: &[Vector3<f64>]| {
        DMatrix::from_fn(rows.len(), 3, |r, c| rows[r][c])
    };
    Jacobians {
        j_e: pack(&e_rows),
        j_h: pack(&h_rows),
        env_edges,
        hand_edges,
    }
}

/// Velocity-map rows of one contact over the generalized velocity
/// `V = (v_O; v_H)` in scaled twist coordinates.
///
/// `normal_row · V` is the separation rate `n̂·v_rel` and
/// `tangent_row · V` the sliding rate `t̂·v_rel`, where `v_rel` is the
/// velocity of the object surface point relative to the other body at the
/// contact (the environment is static; a hand contact subtracts the hand
/// point velocity).
pub fn contact_velocity_rows(scene: &Scene, contact_index: usize) -> (Vector6<f64>, Vector6<f64>) {
    let c = &scene.contacts[contact_index];
    let l = scene.char_length;
    let row = |d: Vector2<f64>| {
        let object = Vector3::new(d.x, d.y, cross2(c.point, d) / l);
        let mut out = Vector6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&object);
        if c.owner == ContactOwner::Hand {
            out.fixed_rows_mut::<3>(3).copy_from(&(-object));
        }
        out
    };
    (row(c.normal), row(tangent(c.normal)))
}
