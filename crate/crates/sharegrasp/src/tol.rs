//! Centralized numerical tolerances.
//!
//! Every threshold used by the geometric and algebraic routines lives here
//! with a note on what it protects. Keeping them in one place makes the
//! accept/reject behaviour of the whole pipeline auditable: a cone membership
//! query, an LP feasibility certificate and a rank decision all degrade in
//! known ways when these move.

/// Membership and feasibility tolerance.
///
/// A ray is inside a half-space when the inward normal dot product is
/// `>= -MEMBERSHIP`; an LP is feasible when the phase-1 objective reaches
/// `<= MEMBERSHIP`. All inputs are normalized (unit rays, unit facet
/// normals, velocities boxed to unit magnitude) so this is an absolute
/// geometric tolerance, far above f64 noise for the 6-dimensional systems
/// handled here.
pub const MEMBERSHIP: f64 = 1e-9;

/// Deduplication distance for unit vectors.
///
/// Two unit rays are the same generator when `|a - b| < DEDUPE`. For unit
/// vectors this equals the subtended angle to first order, so it doubles as
/// the angular dedupe tolerance.
pub const DEDUPE: f64 = 1e-9;

/// Relative rank cutoff for SVD-based subspace extraction.
///
/// Singular values below `RANK_REL * sigma_max` are treated as zero when
/// computing null spaces, row spaces and pseudo-inverses.
pub const RANK_REL: f64 = 1e-9;

/// Strictness slack for sliding and separating contacts during mode
/// enumeration.
///
/// A sliding (or separating) contact must achieve at least this much signed
/// velocity after the generalized velocity is boxed to unit magnitude;
/// without it, every sliding mode would be satisfied by the all-zero
/// velocity of the all-fixed mode. Documented and configurable through
/// [`crate::modes::EnumerationOptions`].
pub const SLIDING_SLACK: f64 = 1e-6;

/// Step for central finite differences in the self-check oracles.
pub const FD_STEP: f64 = 1e-6;

/// A margin (radians) below this is treated as degenerate: the mode's cone
/// intersection touches a facet and there is no usable gradient anchor.
pub const MARGIN_ZERO: f64 = 1e-9;
