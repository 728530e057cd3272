//! Quasi-static analysis and hybrid force-velocity control synthesis for
//! planar shared grasps.
//!
//! A *shared grasp* is an object held jointly by a robot hand and its
//! environment: every contact is either hand-object or environment-object.
//! Under Coulomb friction and quasi-static motion, each assignment of a
//! per-contact interaction mode (fixed / left-slide / right-slide /
//! separate) carves out a polyhedral convex cone of balanced contact
//! wrenches. This crate builds those cones, enumerates the kinematically
//! consistent modes, synthesizes hybrid force-velocity controls that select
//! a goal mode against its competitors, scores the selection with geometric
//! stability margins, and differentiates the margins for contact-geometry
//! optimization.
//!
//! Module map:
//!
//! - [`tol`]: shared numeric tolerances.
//! - [`lp`]: dense two-phase simplex used by feasibility oracles.
//! - [`linalg`]: SVD-backed subspace helpers.
//! - [`geometry`]: scenes, contacts, friction edges, contact Jacobians.
//! - [`cone`]: polyhedral convex cones in wrench space (dims 1-3).
//! - [`modes`]: contact-mode strings, per-mode constraints, enumeration.
//! - [`hfvc`]: velocity decomposition and crash checking.
//! - [`stamping`]: margins and force-control selection ("wrench stamping").
//! - [`verify`]: LP-oracle cross-checks and parameter sweeps.
//! - [`control`]: goal-mode selection over whole scenes.
//! - [`optimize`]: margin gradients and contact-geometry ascent.
//! - [`files`]: on-disk scene/goal formats.
//! - [`report`]: versioned, hash-stamped analysis reports.
//! - [`cli`]: command-line entry points.

pub mod cli;
pub mod cone;
pub mod geometry;
pub mod control;
pub mod files;
pub mod hfvc;
pub mod linalg;
pub mod lp;
pub mod modes;
pub mod optimize;
pub mod report;
pub mod stamping;
pub mod verify;
pub mod tol;
