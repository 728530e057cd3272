//! Contact-mode strings, per-mode velocity constraints and wrench cones,
//! and kinematic mode enumeration.
//!
//! A contact mode assigns each contact one letter:
//!
//! - `s` — separation: bodies move apart, no wrench.
//! - `f` — fixed (sticking): no relative motion, both friction-cone edges
//!   can transmit force.
//! - `l` — left sliding: the object moves along `−t̂` relative to the
//!   other body; friction acts along `+t̂`, so only the *right* edge
//!   `n̂ + μ t̂` transmits force.
//! - `r` — right sliding: motion along `+t̂`, only the *left* edge
//!   `n̂ − μ t̂` transmits force.
//!
//! Modes are written as strings over `{s,f,l,r}` in scene contact order,
//! e.g. `"sfff"`. A mode is *kinematically consistent* when some system
//! velocity satisfies its equality constraints with strictly realized
//! sliding/separation; enumeration brute-forces all `4^n` strings through
//! an LP filter, which is exact at the contact counts this toolkit
//! targets.

use nalgebra::{DMatrix, DVector, Vector6};
use thiserror::Error;

use crate::cone::Pcc;
use crate::geometry::{build_jacobians, contact_velocity_rows, ContactOwner, EdgeRef, Scene};
use crate::tol;

/// One per-contact motion letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// `f` — sticking contact.
    Fixed,
    /// `l` — left sliding (object moves along `−t̂` relative to the other
    /// body).
    LeftSlide,
    /// `r` — right sliding (motion along `+t̂`).
    RightSlide,
    /// `s` — separation.
    Separate,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::Fixed => 'f',
            Letter::LeftSlide => 'l',
            Letter::RightSlide => 'r',
            Letter::Separate => 's',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'f' => Some(Letter::Fixed),
            'l' => Some(Letter::LeftSlide),
            'r' => Some(Letter::RightSlide),
            's' => Some(Letter::Separate),
            _ => None,
        }
    }
}

/// A contact mode: one letter per contact, in scene contact order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContactMode {
    letters: Vec<Letter>,
}

/// Mode-string validation failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModeError {
    #[error("invalid mode letter {0:?}; expected one of s, f, l, r")]
    BadLetter(char),
    #[error("mode string has {got} letters but the scene has {expected} contacts")]
    WrongLength { expected: usize, got: usize },
    #[error("mode enumeration supports at most {max} contacts, scene has {got}")]
    TooManyContacts { max: usize, got: usize },
}

impl ContactMode {
    /// Parse a mode string, checking the alphabet and the expected
    /// contact count.
    pub fn parse(s: &str, num_contacts: usize) -> Result<ContactMode, ModeError> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(c).ok_or(ModeError::BadLetter(c))?);
        }
        if letters.len() != num_contacts {
            return Err(ModeError::WrongLength { expected: num_contacts, got: letters.len() });
        }
        Ok(ContactMode { letters })
    }

    pub fn from_letters(letters: Vec<Letter>) -> ContactMode {
        ContactMode { letters }
    }

    pub fn all_fixed(n: usize) -> ContactMode {
        ContactMode { letters: vec![Letter::Fixed; n] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True when every contact separates (the mode transmits no wrench).
    pub fn is_all_separate(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::Separate)
    }
}

impl std::fmt::Display for ContactMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl serde::Serialize for ContactMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The velocity constraints of a mode over the generalized velocity `V`:
/// `n` rows must vanish (`n V = 0`) and `m` rows must be nonpositive
/// (`m V ≤ 0`).
///
/// Each `f` contributes its normal and tangent rows to `n`; each `l`/`r`
/// contributes its normal row to `n` and its signed tangent row to `m`
/// (`+t̂` row for `l`, `−t̂` row for `r` — sliding must not reverse);
/// each `s` contributes its negated normal row to `m` (separation speed
/// must be nonnegative).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeConstraints {
    pub n: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

/// Assemble the constraint matrices of a mode.
pub fn mode_constraints(scene: &Scene, mode: &ContactMode) -> ModeConstraints {
    assert_eq!(mode.len(), scene.num_contacts(), "mode length matches contact count");
    let mut n_rows: Vec<Vector6<f64>> = Vec::new();
    let mut m_rows: Vec<Vector6<f64>> = Vec::new();
    for (i, &letter) in mode.letters().iter().enumerate() {
        let (n_row, t_row) = contact_velocity_rows(scene, i);
        match letter {
            Letter::Fixed => {
                n_rows.push(n_row);
                n_rows.push(t_row);
            }
            Letter::LeftSlide => {
                n_rows.push(n_row);
                m_rows.push(t_row);
            }
            Letter::RightSlide => {
                n_rows.push(n_row);
                m_rows.push(-t_row);
            }
            Letter::Separate => {
                m_rows.push(-n_row);
            }
        }
    }
    let pack = |rows: &[Vector6<f64>]| DMatrix::from_fn(rows.len(), 6, |r, c| rows[r][c]);
    ModeConstraints { n: pack(&n_rows), m: pack(&m_rows) }
}

/// The per-mode wrench cones with generator provenance: which contact and
/// which friction-cone edge produced each generator (after deduplication,
/// e.g. of a frictionless contact's coinciding edges).
#[derive(Debug, Clone)]
pub struct ModeCones {
    /// Wrenches the environment can transmit to the object in this mode.
    pub c_e: Pcc,
    /// Wrenches the object can transmit to the hand in this mode.
    pub c_h: Pcc,
    /// Provenance of each `c_e` generator.
    pub e_sources: Vec<EdgeRef>,
    /// Provenance of each `c_h` generator.
    pub h_sources: Vec<EdgeRef>,
}

/// Assemble the environment and hand wrench cones of a mode from the
/// active friction-cone edges: none for `s`, both for `f`, only the
/// right edge for `l`, only the left for `r`.
pub fn mode_cones(scene: &Scene, mode: &ContactMode) -> ModeCones {
    assert_eq!(mode.len(), scene.num_contacts());
    let jac = build_jacobians(scene);
    let mut e_rays: Vec<(DVector<f64>, EdgeRef)> = Vec::new();
    let mut h_rays: Vec<(DVector<f64>, EdgeRef)> = Vec::new();
    let collect = |rows: &DMatrix<f64>, edges: &[EdgeRef], out: &mut Vec<(DVector<f64>, EdgeRef)>| {
        for (r, &edge_ref) in edges.iter().enumerate() {
            let active = match mode.letters()[edge_ref.contact] {
                Letter::Separate => false,
                Letter::Fixed => true,
                Letter::LeftSlide => edge_ref.edge == crate::geometry::Edge::Right,
                Letter::RightSlide => edge_ref.edge == crate::geometry::Edge::Left,
            };
            if active {
                let ray = rows.row(r).transpose();
                // Deduplicate (a frictionless contact lists the same ray
                // twice); keep the first occurrence's provenance.
                if out.iter().all(|(g, _)| (g - &ray).norm() > tol::DEDUPE) {
                    out.push((ray, edge_ref));
                }
            }
        }
    };
    collect(&jac.j_e, &jac.env_edges, &mut e_rays);
    collect(&jac.j_h, &jac.hand_edges, &mut h_rays);
    let build = |rays: Vec<(DVector<f64>, EdgeRef)>| {
        let (gens, sources): (Vec<_>, Vec<_>) = rays.into_iter().unzip();
        let cone = Pcc::from_generators(3, gens);
        debug_assert_eq!(cone.generators().len(), sources.len());
        (cone, sources)
    };
    let (c_e, e_sources) = build(e_rays);
    let (c_h, h_sources) = build(h_rays);
    ModeCones { c_e, c_h, e_sources, h_sources }
}

/// Tunables of the enumeration LP filter.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    /// Hard cap on contact count (the filter visits `4^n` strings).
    pub max_contacts: usize,
    /// Minimal strictly-realized sliding/separation speed, after box
    /// normalization `‖V‖∞ ≤ 1`, for a mode to count as consistent.
    pub strict_slack: f64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { max_contacts: 8, strict_slack: tol::SLIDING_SLACK }
    }
}

/// Largest strictness slack `s ∈ [0, 1]` such that some `V` with
/// `‖V‖∞ ≤ 1` satisfies `n V = 0` and `m V ≤ −s`. Zero when even the
/// nonstrict system is infeasible.
fn strictness_slack(mc: &ModeConstraints) -> f64 {
    let mut lp = crate::lp::LinearProgram::new(7); // V (free) then s
    lp.require_nonneg(6);
    lp.minimize(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    for r in 0..mc.n.nrows() {
        let mut row = [0.0; 7];
        row[..6].copy_from_slice(mc.n.row(r).transpose().as_slice());
        lp.add_eq(&row, 0.0);
    }
    for r in 0..mc.m.nrows() {
        let mut row = [0.0; 7];
        row[..6].copy_from_slice(mc.m.row(r).transpose().as_slice());
        row[6] = 1.0;
        lp.add_le(&row, 0.0);
    }
    for v in 0..6 {
        let mut row = [0.0; 7];
        row[v] = 1.0;
        lp.add_le(&row, 1.0);
        row[v] = -1.0;
        lp.add_le(&row, 1.0);
    }
    let mut cap = [0.0; 7];
    cap[6] = 1.0;
    lp.add_le(&cap, 1.0);
    match lp.solve() {
        crate::lp::LpOutcome::Optimal { x, .. } => x[6],
        _ => 0.0,
    }
}

/// Enumerate the kinematically consistent contact modes of a scene, in
/// lexicographic order (`f < l < r < s`). The all-fixed mode is always
/// consistent (the zero velocity realizes it).
pub fn enumerate_modes(scene: &Scene) -> Result<Vec<ContactMode>, ModeError> {
    enumerate_modes_with(scene, &EnumerationOptions::default())
}

/// [`enumerate_modes`] with explicit options.
pub fn enumerate_modes_with(
    scene: &Scene,
    options: &EnumerationOptions,
) -> Result<Vec<ContactMode>, ModeError> {
    let n = scene.num_contacts();
    if n > options.max_contacts {
        return Err(ModeError::TooManyContacts { max: options.max_contacts, got: n });
    }
    let alphabet = [Letter::Fixed, Letter::LeftSlide, Letter::RightSlide, Letter::Separate];
    let total = 4usize.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        // Most-significant digit = first contact, so the visit order is
        // already lexicographic in the f < l < r < s letter order.
        let mut letters = Vec::with_capacity(n);
        let mut rest = code;
        for place in (0..n).rev() {
            let digit = rest / 4usize.pow(place as u32);
            rest %= 4usize.pow(place as u32);
            letters.push(alphabet[digit]);
        }
        let mode = ContactMode::from_letters(letters);
        let mc = mode_constraints(scene, &mode);
        if mc.m.nrows() == 0 || strictness_slack(&mc) >= options.strict_slack {
            out.push(mode);
        }
    }
    Ok(out)
}

/// True when the mode keeps at least one non-separating contact on the
/// environment side *and* on the hand side — the defining property of a
/// shared grasp (the object stays in contact with both).
///
/// Equivalently: both mode wrench cones are nonzero, which is exactly
/// the precondition for the stability margins to be defined. Modes that
/// fully detach one side are still kinematically consistent (the hand
/// can lift the object off the table, or leave it behind), but they
/// exit the shared-grasping regime and carry no margin.
pub fn preserves_shared_grasp(scene: &Scene, mode: &ContactMode) -> bool {
    let mut env = false;
    let mut hand = false;
    for (contact, &letter) in scene.contacts.iter().zip(mode.letters()) {
        if letter != Letter::Separate {
            match contact.owner {
                ContactOwner::Environment => env = true,
                ContactOwner::Hand => hand = true,
            }
        }
    }
    env && hand
}

/// Coarse motion classification of a mode's velocity set
/// `{V : n V = 0, m V ≤ 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KinematicClass {
    /// Some consistent velocity moves the object.
    ObjectMotion,
    /// The object is pinned but the hand can still move.
    HandMotion,
    /// Only the zero velocity is consistent.
    Rigid,
}

/// Classify how much motion a mode's constraint set admits.
pub fn kinematic_class(scene: &Scene, mode: &ContactMode) -> KinematicClass {
    let mc = mode_constraints(scene, mode);
    let reachable = |coord: usize, sign: f64| -> bool {
        let mut lp = crate::lp::LinearProgram::new(6);
        let mut obj = [0.0; 6];
        obj[coord] = -sign; // maximize sign·V_coord
        lp.minimize(&obj);
        for r in 0..mc.n.nrows() {
            lp.add_eq(mc.n.row(r).transpose().as_slice(), 0.0);
        }
        for r in 0..mc.m.nrows() {
            lp.add_le(mc.m.row(r).transpose().as_slice(), 0.0);
        }
        for v in 0..6 {
            let mut row = [0.0; 6];
            row[v] = 1.0;
            lp.add_le(&row, 1.0);
            row[v] = -1.0;
            lp.add_le(&row, 1.0);
        }
        match lp.solve() {
            crate::lp::LpOutcome::Optimal { x, .. } => sign * x[coord] > 1e-7,
            _ => false,
        }
    };
    for coord in 0..3 {
        if reachable(coord, 1.0) || reachable(coord, -1.0) {
            return KinematicClass::ObjectMotion;
        }
    }
    for coord in 3..6 {
        if reachable(coord, 1.0) || reachable(coord, -1.0) {
            return KinematicClass::HandMotion;
        }
    }
    KinematicClass::Rigid
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{Contact, Pose2};
    use nalgebra::Vector2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube_palm() -> Scene {
        crate::geometry::tests::cube_palm_scene()
    }

    #[test]
    fn mode_string_round_trip_and_validation() {
        let m = ContactMode::parse("sflr", 4).unwrap();
        assert_eq!(m.to_string(), "sflr");
        assert_eq!(ContactMode::parse("sfx", 3), Err(ModeError::BadLetter('x')));
        assert_eq!(
            ContactMode::parse("sf", 3),
            Err(ModeError::WrongLength { expected: 3, got: 2 })
        );
        assert!(ContactMode::parse("ssss", 4).unwrap().is_all_separate());
    }

    #[test]
    fn constraint_row_counts_follow_letters() {
        let scene = cube_palm();
        let all_f = mode_constraints(&scene, &ContactMode::all_fixed(4));
        assert_eq!(all_f.n.nrows(), 8);
        assert_eq!(all_f.m.nrows(), 0);

        let sfff = mode_constraints(&scene, &ContactMode::parse("sfff", 4).unwrap());
        assert_eq!(sfff.n.nrows(), 6);
        assert_eq!(sfff.m.nrows(), 1);

        let slrs = mode_constraints(&scene, &ContactMode::parse("slrs", 4).unwrap());
        assert_eq!(slrs.n.nrows(), 2);
        assert_eq!(slrs.m.nrows(), 4);
    }

    #[test]
    fn all_separate_mode_has_zero_cones() {
        let scene = cube_palm();
        let mc = mode_cones(&scene, &ContactMode::parse("ssss", 4).unwrap());
        assert!(mc.c_e.is_zero());
        assert!(mc.c_h.is_zero());
    }

    #[test]
    fn all_fixed_cones_have_every_edge() {
        let scene = cube_palm();
        let mc = mode_cones(&scene, &ContactMode::all_fixed(4));
        assert_eq!(mc.c_e.generators().len(), 4);
        assert_eq!(mc.c_h.generators().len(), 4);
        assert_eq!(mc.e_sources.len(), 4);
        assert_eq!(mc.h_sources.len(), 4);
    }

    #[test]
    fn sliding_modes_keep_the_opposing_edge() {
        use crate::geometry::Edge;
        let scene = cube_palm();
        let mc = mode_cones(&scene, &ContactMode::parse("lrff", 4).unwrap());
        // Contact 0 slides left → right edge; contact 1 slides right →
        // left edge.
        assert_eq!(mc.e_sources[0], EdgeRef { contact: 0, edge: Edge::Right });
        assert_eq!(mc.e_sources[1], EdgeRef { contact: 1, edge: Edge::Left });
        assert_eq!(mc.c_e.generators().len(), 2);
    }

    #[test]
    fn frictionless_contact_edges_deduplicate() {
        let mut scene = cube_palm();
        scene.contacts[0].mu = 0.0;
        let mc = mode_cones(&scene, &ContactMode::all_fixed(4));
        assert_eq!(mc.c_e.generators().len(), 3);
        assert_eq!(mc.e_sources.len(), 3);
    }

    #[test]
    fn single_contact_free_body_realizes_all_four_letters() {
        // Library-level check on an enumeration-only scene (validation,
        // which demands both contact kinds, is a CLI concern).
        let scene = Scene {
            object_pose: Pose2::identity(),
            hand_pose: Pose2::identity(),
            contacts: vec![Contact {
                owner: ContactOwner::Environment,
                point: Vector2::new(0.0, 0.0),
                normal: Vector2::new(0.0, 1.0),
                mu: 0.5,
            }],
            char_length: 1.0,
            nominal_force: 1.0,
        };
        let modes = enumerate_modes(&scene).unwrap();
        let strings: Vec<String> = modes.iter().map(|m| m.to_string()).collect();
        assert_eq!(strings, vec!["f", "l", "r", "s"]);
    }

    #[test]
    fn cube_palm_mode_counts() {
        // Each collinear contact pair (the two table contacts share a
        // tangent line, as do the two palm contacts) admits exactly ten
        // letter pairs — {ff, ll, rr} plus any pair involving one or two
        // separations — and the two pairs decouple through the free hand
        // twist, so the kinematic filter yields 10 × 10 = 100 strings.
        // Dropping the 19 strings that fully detach one side (10 with
        // the table pair ss, 10 with the palm pair ss, 1 counted twice)
        // leaves the 81 shared-grasping modes.
        let scene = cube_palm();
        let modes = enumerate_modes(&scene).unwrap();
        assert_eq!(modes.len(), 100, "kinematically consistent strings");
        let preserving: Vec<&ContactMode> = modes
            .iter()
            .filter(|m| preserves_shared_grasp(&scene, m))
            .collect();
        assert_eq!(preserving.len(), 81, "shared-grasp-preserving modes");
        // Every excluded mode has a zero wrench cone on the detached
        // side, so no stability margin is lost by the restriction.
        for m in &modes {
            if !preserves_shared_grasp(&scene, m) {
                let mc = mode_cones(&scene, m);
                assert!(mc.c_e.is_zero() || mc.c_h.is_zero(), "mode {m}");
            }
        }
        // Sorted lexicographically and unique.
        let strings: Vec<String> = modes.iter().map(|m| m.to_string()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(strings, sorted);
        // The all-fixed mode is always present.
        assert_eq!(strings[0], "ffff");
    }

    #[test]
    fn contact_count_cap_is_enforced() {
        let mut scene = cube_palm();
        let c = scene.contacts[0];
        while scene.contacts.len() <= 8 {
            scene.contacts.push(c);
        }
        assert!(matches!(
            enumerate_modes(&scene),
            Err(ModeError::TooManyContacts { .. })
        ));
    }

    #[test]
    fn mode_cones_are_contained_in_all_fixed_cones() {
        let scene = cube_palm();
        let af = mode_cones(&scene, &ContactMode::all_fixed(4));
        for mode in enumerate_modes(&scene).unwrap() {
            let mc = mode_cones(&scene, &mode);
            assert!(af.c_e.contains_cone(&mc.c_e), "mode {mode}");
            assert!(af.c_h.contains_cone(&mc.c_h), "mode {mode}");
        }
    }

    /// Independent enumeration filter with a different normalization:
    /// strictness measured inside the L1 ball `Σ|V_i| ≤ 1` instead of
    /// the box.
    fn oracle_consistent(scene: &Scene, mode: &ContactMode, slack: f64) -> bool {
        let mc = mode_constraints(scene, mode);
        if mc.m.nrows() == 0 {
            return true;
        }
        // Vars: V (6 free), u (6, bounds |V| ≤ u), s.
        let mut lp = crate::lp::LinearProgram::new(13);
        for v in 6..13 {
            lp.require_nonneg(v);
        }
        let mut obj = [0.0; 13];
        obj[12] = -1.0;
        lp.minimize(&obj);
        for r in 0..mc.n.nrows() {
            let mut row = [0.0; 13];
            row[..6].copy_from_slice(mc.n.row(r).transpose().as_slice());
            lp.add_eq(&row, 0.0);
        }
        for r in 0..mc.m.nrows() {
            let mut row = [0.0; 13];
            row[..6].copy_from_slice(mc.m.row(r).transpose().as_slice());
            row[12] = 1.0;
            lp.add_le(&row, 0.0);
        }
        for v in 0..6 {
            let mut row = [0.0; 13];
            row[v] = 1.0;
            row[6 + v] = -1.0;
            lp.add_le(&row, 0.0); // V_i − u_i ≤ 0
            row[v] = -1.0;
            lp.add_le(&row, 0.0); // −V_i − u_i ≤ 0
        }
        let mut l1 = [0.0; 13];
        for v in 6..12 {
            l1[v] = 1.0;
        }
        lp.add_le(&l1, 1.0);
        let mut cap = [0.0; 13];
        cap[12] = 1.0;
        lp.add_le(&cap, 1.0);
        match lp.solve() {
            crate::lp::LpOutcome::Optimal { x, .. } => x[12] >= slack,
            _ => false,
        }
    }

    pub(crate) fn random_two_contact_scene(rng: &mut ChaCha8Rng) -> Scene {
        let mut contact = |owner| {
            let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            Contact {
                owner,
                point: Vector2::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)),
                normal: Vector2::new(angle.cos(), angle.sin()),
                mu: rng.gen_range(0.05..1.5),
            }
        };
        Scene {
            object_pose: Pose2::identity(),
            hand_pose: Pose2::identity(),
            contacts: vec![contact(ContactOwner::Environment), contact(ContactOwner::Hand)],
            char_length: 0.1,
            nominal_force: 10.0,
        }
    }

    #[test]
    fn enumeration_agrees_with_l1_normalized_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let scene = random_two_contact_scene(&mut rng);
            let enumerated: Vec<String> = enumerate_modes(&scene)
                .unwrap()
                .iter()
                .map(|m| m.to_string())
                .collect();
            // The L1 ball is smaller than the box, so the same physical
            // slack is scaled; use a slack low enough for both.
            let alphabet = ['f', 'l', 'r', 's'];
            let mut oracle = Vec::new();
            for a in alphabet {
                for b in alphabet {
                    let mode = ContactMode::parse(&format!("{a}{b}"), 2).unwrap();
                    if oracle_consistent(&scene, &mode, tol::SLIDING_SLACK / 6.0) {
                        oracle.push(mode.to_string());
                    }
                }
            }
            assert_eq!(enumerated, oracle, "scene {scene:?}");
        }
    }

    /// Read the mode a velocity realizes off the constraint rows.
    fn classify_velocity(scene: &Scene, v: &Vector6<f64>, tol: f64) -> Option<ContactMode> {
        let mut letters = Vec::new();
        for i in 0..scene.num_contacts() {
            let (n_row, t_row) = contact_velocity_rows(scene, i);
            let vn = n_row.dot(v);
            let vt = t_row.dot(v);
            if vn > tol {
                letters.push(Letter::Separate);
            } else if vn < -tol {
                return None; // penetration
            } else if vt > tol {
                letters.push(Letter::RightSlide);
            } else if vt < -tol {
                letters.push(Letter::LeftSlide);
            } else {
                letters.push(Letter::Fixed);
            }
        }
        Some(ContactMode::from_letters(letters))
    }

    #[test]
    fn strictly_feasible_velocities_classify_back_to_their_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut checked = 0;
        for _ in 0..20 {
            let scene = random_two_contact_scene(&mut rng);
            for mode in enumerate_modes(&scene).unwrap() {
                let mc = mode_constraints(&scene, &mode);
                if strictness_slack(&mc) < 1e-3 {
                    continue; // keep clearly-realized modes only
                }
                // Recover a strictly-realizing velocity from the filter
                // LP and classify it.
                let mut lp = crate::lp::LinearProgram::new(7);
                lp.require_nonneg(6);
                lp.minimize(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
                for r in 0..mc.n.nrows() {
                    let mut row = [0.0; 7];
                    row[..6].copy_from_slice(mc.n.row(r).transpose().as_slice());
                    lp.add_eq(&row, 0.0);
                }
                for r in 0..mc.m.nrows() {
                    let mut row = [0.0; 7];
                    row[..6].copy_from_slice(mc.m.row(r).transpose().as_slice());
                    row[6] = 1.0;
                    lp.add_le(&row, 0.0);
                }
                for v in 0..6 {
                    let mut row = [0.0; 7];
                    row[v] = 1.0;
                    lp.add_le(&row, 1.0);
                    row[v] = -1.0;
                    lp.add_le(&row, 1.0);
                }
                let mut cap = [0.0; 7];
                cap[6] = 1.0;
                lp.add_le(&cap, 1.0);
                let crate::lp::LpOutcome::Optimal { x, .. } = lp.solve() else {
                    panic!("slack LP is always feasible");
                };
                let v = Vector6::from_iterator(x[..6].iter().cloned());
                assert_eq!(
                    classify_velocity(&scene, &v, 1e-6),
                    Some(mode.clone()),
                    "scene {scene:?}"
                );
                checked += 1;
            }
        }
        assert!(checked > 50, "exercised {checked} mode instances");
    }

    #[test]
    fn kinematic_classes_on_the_cube_palm() {
        let scene = cube_palm();
        // All fixed: the object is pinned to the table through sticking
        // contacts and the hand is pinned to the object.
        assert_eq!(
            kinematic_class(&scene, &ContactMode::all_fixed(4)),
            KinematicClass::Rigid
        );
        // Hand slides on a static object.
        assert_eq!(
            kinematic_class(&scene, &ContactMode::parse("ffll", 4).unwrap()),
            KinematicClass::HandMotion
        );
        // Everything separates: the object is free.
        assert_eq!(
            kinematic_class(&scene, &ContactMode::parse("ssss", 4).unwrap()),
            KinematicClass::ObjectMotion
        );
    }
}
