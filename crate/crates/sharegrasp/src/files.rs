//! On-disk scene and goal descriptions.
//!
//! Both formats are strict, versioned JSON: a `schema` tag names the
//! format revision this build understands, a `units` block pins the
//! physical units (only meters and newtons are accepted — the reader
//! refuses to guess conversion factors), and unknown fields are errors
//! rather than silently ignored, so a typo in an optional key cannot
//! masquerade as a default.
//!
//! # Scene files
//!
//! Scene files describe geometry in the **world frame**, the frame a
//! scene is naturally measured in: object and hand poses as `(x, y, θ)`
//! triples, contact points and normals as world-coordinate pairs. The
//! runtime [`Scene`] keeps contacts in hand coordinates, so loading
//! converts through the hand pose, normalizing each normal on the way
//! in (a zero normal is rejected). The characteristic length `L` —
//! the torque scale that makes wrench angles meaningful — defaults to
//! the largest side of the axis-aligned bounding box of the contact
//! points when the file does not state one, a stand-in for the object's
//! bounding dimension.
//!
//! # Goal files
//!
//! A goal file assembles the rows of a motion goal `G·V = b` over the
//! generalized velocity `V = (v_O; v_H)` (raw, unscaled twists in hand
//! coordinates). Two builders cover the common cases and may be combined
//! with raw rows; blocks stack in the order listed:
//!
//! 1. `hold_object_static: true` — three rows pinning the object twist
//!    to zero, written in world coordinates through the hand pose's
//!    twist adjoint (the solution set is the same either way since the
//!    adjoint is invertible; world coordinates are the convention for
//!    "the object does not move").
//! 2. `object_twist: [vx, vy, ω]` — three rows commanding the object
//!    twist, world-aligned hand coordinates, meters/second and
//!    radians/second.
//! 3. `rows` — raw six-column rows `g·V = b` for goals that constrain
//!    the hand as well.
//!
//! The two builders are mutually exclusive (one pins the object, the
//! other drives it); a goal file must produce at least one row.
//!
//! Emission ([`SceneFile::to_json`]) uses shortest round-trip float
//! formatting, so parse → emit → parse is the identity on every finite
//! input — re-emitted files are stable under further round trips.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Contact, ContactOwner, Pose2, Scene};
use crate::hfvc::GoalSpec;

/// Schema tag accepted in scene files.
pub const SCENE_SCHEMA: &str = "sharegrasp-scene/1";
/// Schema tag accepted in goal files.
pub const GOAL_SCHEMA: &str = "sharegrasp-goal/1";

/// Physical units a file declares. Only SI (`"m"`, `"N"`) is accepted;
/// the block exists so a file in other units fails loudly instead of
/// being misread by a factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub force: String,
}

impl Units {
    pub fn si() -> Self {
        Units { length: "m".to_string(), force: "N".to_string() }
    }

    fn check(&self) -> Result<(), LoadError> {
        if self.length != "m" || self.force != "N" {
            return Err(LoadError::Parse(format!(
                "unsupported units (length \"{}\", force \"{}\"); lengths must be \"m\" and forces \"N\"",
                self.length, self.force
            )));
        }
        Ok(())
    }
}

/// One contact in a scene file, world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactFile {
    pub owner: ContactOwner,
    /// Contact point `[x, y]`, meters, world frame.
    pub point: [f64; 2],
    /// Normal direction `[x, y]` pointing into the object, world frame.
    /// Normalized on load; need not be unit length in the file.
    pub normal: [f64; 2],
    /// Coulomb friction coefficient.
    pub mu: f64,
}

/// A scene as stored on disk: world-frame poses and contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema: String,
    pub units: Units,
    /// Object pose `(x, y, θ)` in the world frame, meters and radians.
    pub object_pose: [f64; 3],
    /// Hand pose `(x, y, θ)` in the world frame.
    pub hand_pose: [f64; 3],
    pub contacts: Vec<ContactFile>,
    /// Characteristic length `L`, meters. Defaults to the largest side
    /// of the contact points' bounding box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_length: Option<f64>,
    /// Nominal force command magnitude `K_F`, newtons.
    pub nominal_force: f64,
}

/// One raw goal row: `g · V = b` with `V = (v_O; v_H)` raw twists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalRow {
    pub g: [f64; 6],
    pub b: f64,
}

/// A motion goal as stored on disk. See the module docs for the block
/// assembly order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalFile {
    pub schema: String,
    pub units: Units,
    /// Pin the object twist to zero (e.g. retracting the hand while the
    /// object rests).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hold_object_static: bool,
    /// Command an object twist `[vx, vy, ω]` (m/s, m/s, rad/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_twist: Option<[f64; 3]>,
    /// Raw goal rows, appended after the builder blocks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<GoalRow>,
}

/// Why an input file was rejected.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LoadError {
    /// The file is malformed: JSON syntax, unknown or missing fields,
    /// an unsupported schema revision or unit system, or a goal
    /// description that assembles to nothing.
    #[error("{0}")]
    Parse(String),
    /// The file is well-formed JSON but describes a physically invalid
    /// scene (zero normal, negative friction, missing contact kind, …).
    #[error("{0}")]
    Invalid(String),
}

/// Parse and schema-check a scene file. Frame conversion and physical
/// validation happen in [`SceneFile::to_scene`].
pub fn parse_scene(text: &str) -> Result<SceneFile, LoadError> {
    let file: SceneFile =
        serde_json::from_str(text).map_err(|e| LoadError::Parse(format!("scene file: {e}")))?;
    if file.schema != SCENE_SCHEMA {
        return Err(LoadError::Parse(format!(
            "scene schema \"{}\" is not supported; this build reads \"{SCENE_SCHEMA}\"",
            file.schema
        )));
    }
    file.units.check()?;
    Ok(file)
}

/// Parse and schema-check a goal file. Row assembly happens in
/// [`GoalFile::to_goal`], which needs the scene for frame conversion.
pub fn parse_goal(text: &str) -> Result<GoalFile, LoadError> {
    let file: GoalFile =
        serde_json::from_str(text).map_err(|e| LoadError::Parse(format!("goal file: {e}")))?;
    if file.schema != GOAL_SCHEMA {
        return Err(LoadError::Parse(format!(
            "goal schema \"{}\" is not supported; this build reads \"{GOAL_SCHEMA}\"",
            file.schema
        )));
    }
    file.units.check()?;
    Ok(file)
}

fn pose(p: [f64; 3]) -> Pose2 {
    Pose2 { x: p[0], y: p[1], theta: p[2] }
}

/// Largest side of the contact points' axis-aligned bounding box,
/// world frame. `None` when the contacts span no extent.
fn default_char_length(contacts: &[ContactFile]) -> Option<f64> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in contacts {
        for k in 0..2 {
            lo[k] = lo[k].min(c.point[k]);
            hi[k] = hi[k].max(c.point[k]);
        }
    }
    let extent = f64::max(hi[0] - lo[0], hi[1] - lo[1]);
    (extent.is_finite() && extent > 1e-12).then_some(extent)
}

impl SceneFile {
    /// Convert to the runtime representation: contacts into hand
    /// coordinates, normals normalized, characteristic length defaulted,
    /// physical invariants checked.
    pub fn to_scene(&self) -> Result<Scene, LoadError> {
        let hand_pose = pose(self.hand_pose);
        let mut contacts = Vec::with_capacity(self.contacts.len());
        for (i, c) in self.contacts.iter().enumerate() {
            let n_world = Vector2::new(c.normal[0], c.normal[1]);
            let norm = n_world.norm();
            if !norm.is_finite() || norm < 1e-9 {
                return Err(LoadError::Invalid(format!(
                    "contact {i}: normal [{}, {}] cannot be normalized",
                    c.normal[0], c.normal[1]
                )));
            }
            contacts.push(Contact {
                owner: c.owner,
                point: hand_pose.point_to_local(Vector2::new(c.point[0], c.point[1])),
                normal: hand_pose.direction_to_local(n_world / norm),
                mu: c.mu,
            });
        }
        let char_length = match self.char_length {
            Some(l) => l,
            None => default_char_length(&self.contacts).ok_or_else(|| {
                LoadError::Invalid(
                    "contact points span no extent; state char_length explicitly".to_string(),
                )
            })?,
        };
        let scene = Scene {
            object_pose: pose(self.object_pose),
            hand_pose,
            contacts,
            char_length,
            nominal_force: self.nominal_force,
        };
        scene.validate().map_err(|e| LoadError::Invalid(e.to_string()))?;
        Ok(scene)
    }

    /// Express a runtime scene back in file form (hand-frame contacts
    /// out to world coordinates). The characteristic length is always
    /// written explicitly.
    pub fn from_scene(scene: &Scene) -> SceneFile {
        let r = scene.hand_pose.rotation();
        let t = scene.hand_pose.translation();
        SceneFile {
            schema: SCENE_SCHEMA.to_string(),
            units: Units::si(),
            object_pose: [scene.object_pose.x, scene.object_pose.y, scene.object_pose.theta],
            hand_pose: [scene.hand_pose.x, scene.hand_pose.y, scene.hand_pose.theta],
            contacts: scene
                .contacts
                .iter()
                .map(|c| {
                    let p = r * c.point + t;
                    let n = r * c.normal;
                    ContactFile { owner: c.owner, point: [p.x, p.y], normal: [n.x, n.y], mu: c.mu }
                })
                .collect(),
            char_length: Some(scene.char_length),
            nominal_force: scene.nominal_force,
        }
    }

    /// Pretty-printed JSON with a trailing newline. Floats use shortest
    /// round-trip formatting, so re-parsing yields this exact value.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene files serialize");
        s.push('\n');
        s
    }
}

impl GoalFile {
    /// Assemble the goal rows against a loaded scene (the hand pose
    /// feeds the static-object block). Fails on contradictory builders,
    /// an empty assembly, or rows with no rank.
    pub fn to_goal(&self, scene: &Scene) -> Result<GoalSpec, LoadError> {
        if self.hold_object_static && self.object_twist.is_some() {
            return Err(LoadError::Parse(
                "hold_object_static and object_twist are mutually exclusive".to_string(),
            ));
        }
        let mut rows: Vec<[f64; 6]> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        if self.hold_object_static {
            let adj = scene.hand_pose.twist_adjoint_to_parent();
            for r in 0..3 {
                let mut row = [0.0; 6];
                for c in 0..3 {
                    row[c] = adj[(r, c)];
                }
                rows.push(row);
                rhs.push(0.0);
            }
        }
        if let Some(twist) = self.object_twist {
            for r in 0..3 {
                let mut row = [0.0; 6];
                row[r] = 1.0;
                rows.push(row);
                rhs.push(twist[r]);
            }
        }
        for gr in &self.rows {
            rows.push(gr.g);
            rhs.push(gr.b);
        }
        if rows.is_empty() {
            return Err(LoadError::Parse(
                "goal file contains no constraints: set hold_object_static, object_twist, or rows"
                    .to_string(),
            ));
        }
        let g = DMatrix::from_fn(rows.len(), 6, |r, c| rows[r][c]);
        let b = DVector::from_vec(rhs);
        GoalSpec::new(g, b).map_err(|e| LoadError::Parse(format!("goal rows: {e}")))
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("goal files serialize");
        s.push('\n');
        s
    }
}
