//! Hybrid force-velocity control: goal specification, the velocity-half
//! decomposition, V-feasibility filtering, and the crashing check.
//!
//! A hybrid force-velocity action on the 3-DOF hand splits the hand
//! twist space by an orthonormal matrix `R_a` into `n_af`
//! force-controlled directions (first rows) and `n_av`
//! velocity-controlled directions (last rows), with velocity command
//! `ω_av` and force command `η_af`. Because `R_a` is orthonormal,
//! `R_a⁻¹ = R_aᵀ` and the same rows serve as coordinates for both hand
//! twists and (scaled) wrenches — the projection map used downstream for
//! wrench selection is `R_a^{(n_af)}`, the force rows.
//!
//! The decomposition solves the velocity side only: given the goal rows
//! `G V = b_G` and a mode's equality constraints `N_m V = 0`, it finds
//! the smallest set of hand velocity directions whose control pins the
//! goal down, leaving the remaining directions free for force control.
//!
//! Goal rows are written against the *raw* generalized velocity
//! `(v_O; v_H)` with angular rates in rad/s; they are rescaled
//! internally onto the length-scaled coordinates used everywhere else
//! (`ω ↦ L·ω`, so that wrench · twist is a power pairing).

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};
use thiserror::Error;

use crate::cone::Pcc;
use crate::linalg;
use crate::modes::ModeConstraints;

/// Residual above which the stacked system `[N_m; G] V = [0; b_G]` is
/// declared inconsistent.
pub const GOAL_RESIDUAL: f64 = 1e-8;

/// A velocity goal: `G V = b` over the raw generalized velocity
/// `V = (v_O; v_H) ∈ R⁶` (angular components in rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Decomposition and goal-validation failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum HfvcError {
    #[error("goal rows are inconsistent with the mode's contact constraints (residual {0:.3e})")]
    GoalInfeasible(f64),
    #[error("goal is not controllable through the hand velocity")]
    GoalNotVelocityControllable,
    #[error("goal matrix is empty or has zero rank")]
    DegenerateGoal,
    #[error("goal dimensions mismatch: G is {rows}x{cols}, b has {b_len} entries")]
    BadShape { rows: usize, cols: usize, b_len: usize },
}

impl GoalSpec {
    /// Build a goal from raw rows, validating shape and rank.
    pub fn new(g: DMatrix<f64>, b: DVector<f64>) -> Result<GoalSpec, HfvcError> {
        if g.ncols() != 6 || g.nrows() != b.len() || g.nrows() == 0 {
            return Err(HfvcError::BadShape { rows: g.nrows(), cols: g.ncols(), b_len: b.len() });
        }
        if linalg::rank(&g) == 0 {
            return Err(HfvcError::DegenerateGoal);
        }
        Ok(GoalSpec { g, b })
    }

    /// The goal matrix over length-scaled velocity coordinates: angular
    /// columns (index 2 and 5) divided by the characteristic length.
    pub fn scaled_g(&self, char_length: f64) -> DMatrix<f64> {
        let mut g = self.g.clone();
        for r in 0..g.nrows() {
            g[(r, 2)] /= char_length;
            g[(r, 5)] /= char_length;
        }
        g
    }
}

/// A hybrid force-velocity action (force command optional until the
/// wrench-selection stage fills it).
#[derive(Debug, Clone, PartialEq)]
pub struct HfvcAction {
    /// Number of force-controlled hand directions (first rows of `R_a`).
    pub n_af: usize,
    /// Number of velocity-controlled hand directions (last rows).
    pub n_av: usize,
    /// Orthonormal direction basis; `R_a R_aᵀ = I`.
    pub r_a: Matrix3<f64>,
    /// Velocity command in the controlled directions, length `n_av`.
    pub omega_av: DVector<f64>,
    /// Force command in the force directions (scaled wrench
    /// coordinates), length `n_af`; set by wrench selection.
    pub eta_af: Option<DVector<f64>>,
    /// The commanded system velocity (length-scaled coordinates) the
    /// decomposition solved for.
    pub v_star: Vector6<f64>,
}

impl HfvcAction {
    /// The force-controlled rows of `R_a` (`n_af × 3`).
    pub fn force_rows(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_af, 3, |r, c| self.r_a[(r, c)])
    }

    /// The velocity-controlled rows of `R_a` (`n_av × 3`).
    pub fn velocity_rows(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_av, 3, |r, c| self.r_a[(self.n_af + r, c)])
    }

    /// The velocity constraint `C_v V = ω_av` as rows over the full
    /// generalized velocity: `C_v = [0 | R_a^{(n_av)}]` (`n_av × 6`).
    pub fn velocity_constraint_rows(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_av, 6, |r, c| {
            if c >= 3 {
                self.r_a[(self.n_af + r, c - 3)]
            } else {
                0.0
            }
        })
    }

    /// The commanded wrench for given force/velocity coordinates:
    /// `w = −R_a⁻¹ [η_af; η_av]` (orthonormality gives `R_a⁻¹ = R_aᵀ`).
    pub fn wrench_of_commands(&self, eta_af: &DVector<f64>, eta_av: &DVector<f64>) -> Vector3<f64> {
        let mut stacked = Vector3::zeros();
        for i in 0..self.n_af {
            stacked[i] = eta_af[i];
        }
        for i in 0..self.n_av {
            stacked[self.n_af + i] = eta_av[i];
        }
        -(self.r_a.transpose() * stacked)
    }
}

/// Extract the hand half of a generalized velocity.
fn hand_part(v: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(v[3], v[4], v[5])
}

/// Sensitivity of the goal values to the hand velocity inside the
/// mode's motion space: `C₀ = (G U) pinv(M_h U)`-style map whose row
/// space is the set of hand directions that must be velocity-controlled.
///
/// Solve the velocity half of the control synthesis for one mode:
///
/// 1. `V*` = minimum-norm solution of the stacked system
///    `[N_m; G] V = [0; b_G]` (inconsistent → [`HfvcError::GoalInfeasible`]).
/// 2. With `U` an orthonormal basis of `null(N_m)`, form `A = G U` and
///    `M_h = [0 I₃] U` (how the free motion coordinates move the hand).
/// 3. The goal must be expressible through the hand:
///    `rowspace(A) ⊆ rowspace(M_h)`, else
///    [`HfvcError::GoalNotVelocityControllable`].
/// 4. `C₀ = A pinv(M_h)`, `n_av = rank(C₀)`; the velocity rows of `R_a`
///    are an orthonormal basis of `rowspace(C₀)`, the force rows its
///    orthonormal complement.
/// 5. `ω_av = R_a^{(n_av)} · v_H(V*)`.
///
/// Any `V` with `N_m V = 0` and `C_v V = ω_av` then satisfies
/// `G V = b_G`. A goal with `n_av = 0` (no hand direction influences it)
/// is rejected: a motion goal needs velocity control.
pub fn velocity_decomposition(
    n_m: &DMatrix<f64>,
    goal: &GoalSpec,
    char_length: f64,
) -> Result<HfvcAction, HfvcError> {
    let g = goal.scaled_g(char_length);
    if g.nrows() == 0 || linalg::rank(&g) == 0 {
        return Err(HfvcError::DegenerateGoal);
    }
    assert!(n_m.nrows() == 0 || n_m.ncols() == 6, "mode constraints over V in R^6");

    // Step 1: minimum-norm V*.
    let mut stacked = DMatrix::zeros(n_m.nrows() + g.nrows(), 6);
    stacked.rows_mut(0, n_m.nrows()).copy_from(n_m);
    stacked.rows_mut(n_m.nrows(), g.nrows()).copy_from(&g);
    let mut rhs = DVector::zeros(stacked.nrows());
    rhs.rows_mut(n_m.nrows(), g.nrows()).copy_from(&goal.b);
    let (v_star, residual) = linalg::min_norm_solve(&stacked, &rhs);
    if residual > GOAL_RESIDUAL * (1.0 + rhs.norm()) {
        return Err(HfvcError::GoalInfeasible(residual));
    }
    let v_star = Vector6::from_iterator(v_star.iter().cloned());

    // Step 2: motion space of the mode and its images.
    let u = linalg::null_space(n_m); // 6 × k, columns
    let a = &g * &u; // g × k
    let mut h_sel = DMatrix::zeros(3, 6);
    for i in 0..3 {
        h_sel[(i, 3 + i)] = 1.0;
    }
    let m_h = &h_sel * &u; // 3 × k

    // Step 3: the goal image must lie in the hand image.
    let m_h_rows = linalg::row_space(&m_h);
    let mut test = DMatrix::zeros(a.nrows() + m_h_rows.nrows(), u.ncols());
    test.rows_mut(0, a.nrows()).copy_from(&a);
    test.rows_mut(a.nrows(), m_h_rows.nrows()).copy_from(&m_h_rows);
    if linalg::rank(&test) != m_h_rows.nrows() {
        return Err(HfvcError::GoalNotVelocityControllable);
    }

    // Step 4: minimal velocity-controlled subspace.
    let c0 = &a * linalg::pinv(&m_h); // g × 3
    let vel_rows = linalg::row_space(&c0);
    let n_av = vel_rows.nrows();
    if n_av == 0 {
        return Err(HfvcError::GoalNotVelocityControllable);
    }
    let force_rows = linalg::orthonormal_complement(&vel_rows);
    let n_af = force_rows.nrows();
    debug_assert_eq!(n_af + n_av, 3);
    let mut r_a = Matrix3::zeros();
    for r in 0..n_af {
        for c in 0..3 {
            r_a[(r, c)] = force_rows[(r, c)];
        }
    }
    for r in 0..n_av {
        for c in 0..3 {
            r_a[(n_af + r, c)] = vel_rows[(r, c)];
        }
    }

    // Step 5: velocity command realizing the goal. Velocity rows are
    // sign-normalized so every command component is nonnegative: the
    // commanded direction is then encoded in the rows themselves, which
    // is what makes the crash check direction-sensitive (the velocity
    // cone generated from the negated rows contains the reaction
    // direction of the commanded motion, not of an arbitrary basis
    // choice). Rows with zero command keep their canonical sign.
    let mut omega_av = DVector::from_fn(n_av, |r, _| {
        vel_rows.row(r).transpose().dot(&hand_part(&v_star))
    });
    for r in 0..n_av {
        if omega_av[r] < -1e-12 {
            omega_av[r] = -omega_av[r];
            for c in 0..3 {
                r_a[(n_af + r, c)] = -r_a[(n_af + r, c)];
            }
        } else if omega_av[r] < 0.0 {
            omega_av[r] = 0.0;
        }
    }

    Ok(HfvcAction { n_af, n_av, r_a, omega_av, eta_af: None, v_star })
}

/// The cone of hand motions the velocity controller spans: generated by
/// the negated velocity-controlled directions.
pub fn velocity_cone(action: &HfvcAction) -> Pcc {
    assert!(action.n_av >= 1, "velocity cone needs at least one controlled direction");
    let gens = (0..action.n_av).map(|r| {
        DVector::from_iterator(3, action.r_a.row(action.n_af + r).iter().map(|&x| -x))
    });
    Pcc::from_generators(3, gens)
}

/// Outcome of the crash check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrashCheck {
    Safe,
    CrashRisk,
}

/// A commanded velocity that pushes along a direction the all-fixed
/// contacts can resist builds unbounded internal force. Safe iff the
/// velocity cone meets the all-fixed wrench cone `C_AF` only at the
/// origin.
pub fn crashing_check(c_af: &Pcc, action: &HfvcAction) -> CrashCheck {
    let v_cone = velocity_cone(action);
    match c_af.intersect(&v_cone) {
        Ok(inter) if inter.is_zero() => CrashCheck::Safe,
        _ => CrashCheck::CrashRisk,
    }
}

/// V-feasibility: can the mode's contact constraints hold under the
/// action's velocity command? LP feasibility of
/// `{N_m V = 0, M_m V ≤ 0, C_v V = ω_av}`.
pub fn v_feasible(mc: &ModeConstraints, action: &HfvcAction) -> bool {
    let c_v = action.velocity_constraint_rows();
    let mut lp = crate::lp::LinearProgram::new(6);
    for r in 0..mc.n.nrows() {
        lp.add_eq(mc.n.row(r).transpose().as_slice(), 0.0);
    }
    for r in 0..mc.m.nrows() {
        lp.add_le(mc.m.row(r).transpose().as_slice(), 0.0);
    }
    for r in 0..c_v.nrows() {
        lp.add_eq(c_v.row(r).transpose().as_slice(), action.omega_av[r]);
    }
    lp.is_feasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::cube_palm_scene;
    use crate::modes::{mode_constraints, ContactMode};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn goal_rows(rows: &[[f64; 6]], b: &[f64]) -> GoalSpec {
        GoalSpec::new(
            DMatrix::from_fn(rows.len(), 6, |r, c| rows[r][c]),
            DVector::from_row_slice(b),
        )
        .unwrap()
    }

    /// Sample velocities satisfying `N V = 0 ∧ C_v V = ω_av` and check
    /// they all meet the goal.
    fn assert_contract(
        n_m: &DMatrix<f64>,
        goal: &GoalSpec,
        char_length: f64,
        action: &HfvcAction,
        rng: &mut ChaCha8Rng,
    ) {
        let c_v = action.velocity_constraint_rows();
        let mut stacked = DMatrix::zeros(n_m.nrows() + c_v.nrows(), 6);
        stacked.rows_mut(0, n_m.nrows()).copy_from(n_m);
        stacked.rows_mut(n_m.nrows(), c_v.nrows()).copy_from(&c_v);
        let mut rhs = DVector::zeros(stacked.nrows());
        rhs.rows_mut(n_m.nrows(), c_v.nrows()).copy_from(&action.omega_av);
        let (particular, res) = linalg::min_norm_solve(&stacked, &rhs);
        assert!(res < 1e-9, "constraint system solvable");
        let null = linalg::null_space(&stacked);
        let g = goal.scaled_g(char_length);
        for _ in 0..20 {
            let z = DVector::from_fn(null.ncols(), |_, _| rng.gen_range(-2.0..2.0));
            let v = &particular + &null * z;
            let err = (&g * &v - &goal.b).norm();
            assert!(err < 1e-8, "goal satisfied on the constrained set (err {err:.3e})");
        }
    }

    #[test]
    fn free_hand_goal_is_pure_velocity_control() {
        let goal = goal_rows(
            &[
                [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            ],
            &[0.0, 0.0, -0.1],
        );
        let empty = DMatrix::zeros(0, 6);
        let action = velocity_decomposition(&empty, &goal, 1.0).unwrap();
        assert_eq!(action.n_av, 3);
        assert_eq!(action.n_af, 0);
        // The rows of R_a^{(3)} are an orthonormal basis (sign-normalized
        // so ω_av ≥ 0), not necessarily the identity; the physical
        // command is recovered by mapping back to hand coordinates.
        let back = action.velocity_rows().transpose() * &action.omega_av;
        assert_relative_eq!(back[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(back[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(back[2], -0.1, epsilon = 1e-12);
        for w in action.omega_av.iter() {
            assert!(*w >= 0.0, "command components normalized nonnegative");
        }
    }

    #[test]
    fn rotation_goal_on_pivot_mode_decomposes() {
        let scene = cube_palm_scene();
        let mode = ContactMode::parse("sfff", 4).unwrap();
        let mc = mode_constraints(&scene, &mode);
        let goal = goal_rows(&[[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]], &[-0.1]);
        let action = velocity_decomposition(&mc.n, &goal, scene.char_length).unwrap();
        assert!(action.n_av == 1 || action.n_av == 2, "n_av = {}", action.n_av);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_contract(&mc.n, &goal, scene.char_length, &action, &mut rng);
        // Orthonormality.
        let gram = action.r_a * action.r_a.transpose();
        assert!((gram - Matrix3::identity()).abs().max() < 1e-10);
    }

    #[test]
    fn inconsistent_goal_is_rejected() {
        let scene = cube_palm_scene();
        // All-fixed pins everything to the ground: V = 0 only.
        let mc = mode_constraints(&scene, &ContactMode::all_fixed(4));
        let goal = goal_rows(&[[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]], &[-0.1]);
        match velocity_decomposition(&mc.n, &goal, scene.char_length) {
            Err(HfvcError::GoalInfeasible(_)) => {}
            other => panic!("expected GoalInfeasible, got {other:?}"),
        }
    }

    #[test]
    fn object_only_goal_on_free_body_is_not_velocity_controllable() {
        // No contacts: the hand cannot influence the object at all, so an
        // object-motion goal cannot be pinned by hand velocity control.
        let goal = goal_rows(&[[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]], &[-0.1]);
        let empty = DMatrix::zeros(0, 6);
        match velocity_decomposition(&empty, &goal, 1.0) {
            Err(HfvcError::GoalNotVelocityControllable) => {}
            other => panic!("expected GoalNotVelocityControllable, got {other:?}"),
        }
    }

    fn random_consistent_instance(
        rng: &mut ChaCha8Rng,
    ) -> Option<(DMatrix<f64>, GoalSpec)> {
        let k = rng.gen_range(0..5);
        let n_m = DMatrix::from_fn(k, 6, |_, _| rng.gen_range(-1.0..1.0));
        let null = linalg::null_space(&n_m);
        if null.ncols() == 0 {
            return None;
        }
        let z = DVector::from_fn(null.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let v0 = &null * z;
        let rows = rng.gen_range(1..3);
        let g = DMatrix::from_fn(rows, 6, |_, _| rng.gen_range(-1.0..1.0));
        let b = &g * &v0;
        Some((n_m, GoalSpec::new(g, b).ok()?))
    }

    #[test]
    fn random_consistent_goals_satisfy_the_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut successes = 0;
        let mut attempts = 0;
        while successes < 100 && attempts < 600 {
            attempts += 1;
            let Some((n_m, goal)) = random_consistent_instance(&mut rng) else {
                continue;
            };
            match velocity_decomposition(&n_m, &goal, 1.0) {
                Ok(action) => {
                    assert_contract(&n_m, &goal, 1.0, &action, &mut rng);
                    let gram = action.r_a * action.r_a.transpose();
                    assert!((gram - Matrix3::identity()).abs().max() < 1e-10);
                    successes += 1;
                }
                Err(HfvcError::GoalNotVelocityControllable) => {}
                Err(e) => panic!("unexpected error on consistent instance: {e}"),
            }
        }
        assert!(successes >= 100, "exercised {successes} decompositions");
    }

    #[test]
    fn dropping_any_velocity_row_breaks_the_goal_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut exercised = 0;
        while exercised < 40 {
            let Some((n_m, goal)) = random_consistent_instance(&mut rng) else {
                continue;
            };
            let Ok(action) = velocity_decomposition(&n_m, &goal, 1.0) else {
                continue;
            };
            let c_v = action.velocity_constraint_rows();
            for drop in 0..action.n_av {
                let kept: Vec<usize> = (0..action.n_av).filter(|&r| r != drop).collect();
                let mut stacked = DMatrix::zeros(n_m.nrows() + kept.len(), 6);
                stacked.rows_mut(0, n_m.nrows()).copy_from(&n_m);
                for (i, &r) in kept.iter().enumerate() {
                    stacked.row_mut(n_m.nrows() + i).copy_from(&c_v.row(r));
                }
                // The reduced constraint set must contain a direction
                // that moves the goal values: some null vector of the
                // reduced system maps to a nonzero goal change.
                let null = linalg::null_space(&stacked);
                let g = goal.scaled_g(1.0);
                let worst = (0..null.ncols())
                    .map(|c| (&g * null.column(c).into_owned()).norm())
                    .fold(0.0_f64, f64::max);
                assert!(
                    worst > 1e-8,
                    "dropping velocity row {drop} should break the contract"
                );
            }
            exercised += 1;
        }
    }

    #[test]
    fn velocity_cone_shapes() {
        let action = HfvcAction {
            n_af: 2,
            n_av: 1,
            r_a: Matrix3::identity(),
            omega_av: DVector::from_row_slice(&[0.5]),
            eta_af: None,
            v_star: Vector6::zeros(),
        };
        let cone = velocity_cone(&action);
        assert_eq!(cone.generators().len(), 1);
        assert_relative_eq!(cone.generators()[0][2], -1.0, epsilon = 1e-12);

        let full = HfvcAction {
            n_af: 0,
            n_av: 3,
            r_a: Matrix3::identity(),
            omega_av: DVector::from_row_slice(&[0.1, 0.2, 0.3]),
            eta_af: None,
            v_star: Vector6::zeros(),
        };
        let octant = velocity_cone(&full);
        // Three orthogonal generators span an octant, not the whole
        // space.
        assert_eq!(octant.generators().len(), 3);
        assert!(!octant.is_full());
    }

    #[test]
    fn velocity_cone_is_orthogonal_to_force_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            // Random orthonormal R_a from QR of a random matrix.
            let m = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let qr = m.qr();
            let q = qr.q();
            // n_af ≥ 1 so the force projection map is nonempty.
            let n_av = rng.gen_range(1..3usize);
            let action = HfvcAction {
                n_af: 3 - n_av,
                n_av,
                r_a: q,
                omega_av: DVector::zeros(n_av),
                eta_af: None,
                v_star: Vector6::zeros(),
            };
            let cone = velocity_cone(&action);
            let projected = cone.project(&action.force_rows());
            assert!(projected.is_zero());
        }
    }

    #[test]
    fn crash_check_triviality_and_containment() {
        let action = HfvcAction {
            n_af: 2,
            n_av: 1,
            r_a: Matrix3::identity(),
            omega_av: DVector::from_row_slice(&[1.0]),
            eta_af: None,
            v_star: Vector6::zeros(),
        };
        // No force closure anywhere: safe.
        assert_eq!(crashing_check(&Pcc::zero(3), &action), CrashCheck::Safe);
        // The commanded direction −e₃ sits inside this wide cone: risk.
        let wide = Pcc::from_generators(
            3,
            [
                DVector::from_row_slice(&[1.0, 0.0, -1.0]),
                DVector::from_row_slice(&[-1.0, 0.0, -1.0]),
                DVector::from_row_slice(&[0.0, 1.0, -1.0]),
                DVector::from_row_slice(&[0.0, -1.0, -1.0]),
            ],
        );
        assert_eq!(crashing_check(&wide, &action), CrashCheck::CrashRisk);
    }

    #[test]
    fn crash_check_is_monotone_in_c_af() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..40 {
            let m = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let q = m.qr().q();
            let n_av = rng.gen_range(1..3usize);
            let action = HfvcAction {
                n_af: 3 - n_av,
                n_av,
                r_a: q,
                omega_av: DVector::zeros(n_av),
                eta_af: None,
                v_star: Vector6::zeros(),
            };
            let mut gens: Vec<DVector<f64>> = (0..3)
                .map(|_| {
                    DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)).normalize()
                })
                .collect();
            let small = Pcc::from_generators(3, gens.clone());
            let verdict_small = crashing_check(&small, &action);
            gens.push(DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)).normalize());
            let big = Pcc::from_generators(3, gens);
            let verdict_big = crashing_check(&big, &action);
            if verdict_small == CrashCheck::CrashRisk {
                assert_eq!(verdict_big, CrashCheck::CrashRisk);
            }
        }
    }

    #[test]
    fn v_feasibility_examples() {
        let scene = cube_palm_scene();
        // A free body: no contacts at all.
        let free = crate::geometry::Scene {
            contacts: vec![],
            ..scene.clone()
        };
        let all_s_empty = mode_constraints(&free, &ContactMode::from_letters(vec![]));
        let action = HfvcAction {
            n_af: 2,
            n_av: 1,
            r_a: Matrix3::identity(),
            omega_av: DVector::from_row_slice(&[0.7]),
            eta_af: None,
            v_star: Vector6::zeros(),
        };
        assert!(v_feasible(&all_s_empty, &action));

        // All-fixed on the cube-palm scene forces V = 0; a nonzero
        // velocity command contradicts it.
        let all_f = mode_constraints(&scene, &ContactMode::all_fixed(4));
        assert!(!v_feasible(&all_f, &action));
        let zero_action = HfvcAction {
            omega_av: DVector::from_row_slice(&[0.0]),
            ..action
        };
        assert!(v_feasible(&all_f, &zero_action));
    }
}
