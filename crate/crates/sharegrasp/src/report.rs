//! Report structures emitted by the command-line front end.
//!
//! Every command produces exactly one report, rendered either as pretty
//! JSON or as terminal text. Shared conventions:
//!
//! - every angle carries radians *and* degrees,
//! - every torque carries the length-scaled value (newtons, `τ/L`) *and*
//!   the raw newton-meters,
//! - input files are echoed with their SHA-256 digests so a report can
//!   be traced to the exact bytes that produced it,
//! - wall-clock timing stays out of the report unless explicitly
//!   requested, so identical inputs yield byte-identical reports.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::control::CandidateDisposition;
use crate::files::SceneFile;
use crate::modes::KinematicClass;
use crate::stamping::ModeDisposition;

/// Schema tag stamped on every report.
pub const REPORT_SCHEMA: &str = "sharegrasp-report/1";

/// Hex SHA-256 of raw input bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// An angle in both radians and degrees.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Angle {
    pub rad: f64,
    pub deg: f64,
}

impl Angle {
    pub fn from_rad(rad: f64) -> Self {
        Angle { rad, deg: rad.to_degrees() }
    }
}

impl std::fmt::Display for Angle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6} rad ({:.3}°)", self.rad, self.deg)
    }
}

/// A torque in scaled units (`τ/L`, newtons) and raw newton-meters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Torque {
    pub scaled_n: f64,
    pub raw_nm: f64,
}

/// A planar wrench: forces in newtons, torque in both conventions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Wrench {
    pub fx_n: f64,
    pub fy_n: f64,
    pub torque: Torque,
}

impl Wrench {
    /// From scaled coordinates `(f_x, f_y, τ/L)` at characteristic
    /// length `l`.
    pub fn from_scaled(w: [f64; 3], l: f64) -> Self {
        Wrench { fx_n: w[0], fy_n: w[1], torque: Torque { scaled_n: w[2], raw_nm: w[2] * l } }
    }
}

/// A planar twist: linear velocity and angular rate in both units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Twist {
    pub vx_m_s: f64,
    pub vy_m_s: f64,
    pub omega_rad_s: f64,
    pub omega_deg_s: f64,
}

impl Twist {
    /// From scaled coordinates `(v_x, v_y, L·ω)` at characteristic
    /// length `l`.
    pub fn from_scaled(t: [f64; 3], l: f64) -> Self {
        let omega = t[2] / l;
        Twist { vx_m_s: t[0], vy_m_s: t[1], omega_rad_s: omega, omega_deg_s: omega.to_degrees() }
    }
}

/// One input file: its role, path, and content digest.
#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// The envelope every command emits.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub schema: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub results: T,
}

/// Text rendering for the terminal (the non-JSON output mode).
pub trait Render {
    fn render(&self, out: &mut String);
}

impl<T: Serialize + Render> Report<T> {
    pub fn new(command: &'static str, inputs: Vec<InputEcho>, results: T) -> Self {
        Report { schema: REPORT_SCHEMA, command, inputs, timing_ms: None, results }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.command));
        for i in &self.inputs {
            out.push_str(&format!("input {}: {} (sha256 {})\n", i.role, i.path, i.sha256));
        }
        if let Some(ms) = self.timing_ms {
            out.push_str(&format!("timing: {ms:.1} ms\n"));
        }
        out.push('\n');
        self.results.render(&mut out);
        out
    }
}

// ---------------------------------------------------------------------
// `modes`

/// Tallies over the enumerated contact modes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeCounts {
    /// Kinematically consistent modes.
    pub enumerated: usize,
    /// Modes keeping at least one active contact on each side.
    pub shared_grasp_preserving: usize,
    /// Modes whose environment and hand cones share a nonzero wrench.
    pub balance_capable: usize,
    /// Balance-capable modes with a strictly positive margin.
    pub margin_positive: usize,
}

/// One enumerated mode and its filter verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub mode: String,
    pub kinematic_class: KinematicClass,
    pub preserves_shared_grasp: bool,
    pub balance_capable: bool,
    /// Balance-capable with a strictly positive margin.
    pub f_feasible: bool,
    /// Geometric margin; zero when the cones do not intersect.
    pub phi_g: Angle,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModesBody {
    pub counts: ModeCounts,
    pub modes: Vec<ModeRow>,
}

impl Render for ModesBody {
    fn render(&self, out: &mut String) {
        let c = &self.counts;
        out.push_str(&format!(
            "{} modes enumerated: {} preserve the shared grasp, {} can balance force, {} with positive margin\n\n",
            c.enumerated, c.shared_grasp_preserving, c.balance_capable, c.margin_positive
        ));
        out.push_str("mode        class          shared  balance  feasible  phi_g\n");
        for m in &self.modes {
            let class = match m.kinematic_class {
                KinematicClass::ObjectMotion => "object-motion",
                KinematicClass::HandMotion => "hand-motion",
                KinematicClass::Rigid => "rigid",
            };
            out.push_str(&format!(
                "{:<10}  {:<13}  {:<6}  {:<7}  {:<8}  {}\n",
                m.mode,
                class,
                if m.preserves_shared_grasp { "yes" } else { "no" },
                if m.balance_capable { "yes" } else { "no" },
                if m.f_feasible { "yes" } else { "no" },
                m.phi_g,
            ));
        }
    }
}

// ---------------------------------------------------------------------
// `stamp`

/// The synthesized hybrid action, fully numeric.
#[derive(Debug, Clone, Serialize)]
pub struct ActionOut {
    /// Force-controlled subspace dimension.
    pub n_af: usize,
    /// Velocity-controlled subspace dimension.
    pub n_av: usize,
    /// Orthonormal action frame (rows: force block then velocity block).
    pub r_a: [[f64; 3]; 3],
    /// Velocity commands in the velocity subspace.
    pub omega_av: Vec<f64>,
    /// Force commands in the force subspace (newtons).
    pub eta_af: Vec<f64>,
    /// Commanded generalized velocity `(v_O; v_H)`, scaled coordinates.
    pub v_star_scaled: [f64; 6],
    /// Object twist the command realizes, raw units.
    pub object_twist: Twist,
    /// Hand twist the command realizes, raw units.
    pub hand_twist: Twist,
}

/// The stability margins of a stamped action.
#[derive(Debug, Clone, Serialize)]
pub struct MarginsOut {
    /// Geometric margin of the goal mode.
    pub phi_g: Angle,
    /// Clearance of the force command from competitor projections.
    pub phi_c: Angle,
    /// `Ψ = min(Φ_g, Φ_c)`.
    pub psi: Angle,
    /// `K_F · Ψ`: disturbance-force bound, newtons.
    pub disturbance_bound_n: f64,
}

/// One angular sector of a projected cone.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArcOut {
    pub start: Angle,
    pub width: Angle,
}

/// Cone geometry of one enumerated mode. Wrench-space generators are
/// unit 3-vectors in scaled coordinates; the projection (present for
/// the goal mode and surviving competitors) lives in the force
/// subspace, with its angular sectors when that subspace is planar.
#[derive(Debug, Clone, Serialize)]
pub struct ConeOut {
    pub mode: String,
    pub disposition: ModeDisposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_g: Option<Angle>,
    pub environment_generators: Vec<[f64; 3]>,
    pub hand_generators: Vec<[f64; 3]>,
    pub intersection_generators: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_generators: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_arcs: Option<Vec<ArcOut>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StampBody {
    pub mode: String,
    pub action: ActionOut,
    /// Unit force direction in force-subspace coordinates.
    pub force_direction: Vec<f64>,
    /// The balancing object wrench the force command realizes,
    /// `K_F · R_af^T · force_direction`.
    pub balance_wrench: Wrench,
    pub margins: MarginsOut,
    pub cones: Vec<ConeOut>,
}

impl Render for StampBody {
    fn render(&self, out: &mut String) {
        out.push_str(&format!("stamped mode: {}\n", self.mode));
        let a = &self.action;
        out.push_str(&format!(
            "action: n_af = {}, n_av = {}\n",
            a.n_af, a.n_av
        ));
        for (r, row) in a.r_a.iter().enumerate() {
            let tag = if r < a.n_af { "force   " } else { "velocity" };
            out.push_str(&format!(
                "  R_a[{r}] ({tag}): [{:+.6}, {:+.6}, {:+.6}]\n",
                row[0], row[1], row[2]
            ));
        }
        out.push_str(&format!("  omega_av = {:?}\n", a.omega_av));
        out.push_str(&format!("  eta_af   = {:?} N\n", a.eta_af));
        let t = &a.object_twist;
        out.push_str(&format!(
            "  object twist: v = ({:+.6}, {:+.6}) m/s, omega = {:+.6} rad/s ({:+.3}°/s)\n",
            t.vx_m_s, t.vy_m_s, t.omega_rad_s, t.omega_deg_s
        ));
        let t = &a.hand_twist;
        out.push_str(&format!(
            "  hand twist:   v = ({:+.6}, {:+.6}) m/s, omega = {:+.6} rad/s ({:+.3}°/s)\n",
            t.vx_m_s, t.vy_m_s, t.omega_rad_s, t.omega_deg_s
        ));
        let w = &self.balance_wrench;
        out.push_str(&format!(
            "balance wrench: f = ({:+.4}, {:+.4}) N, torque = {:+.4} N (scaled) = {:+.6} N·m\n",
            w.fx_n, w.fy_n, w.torque.scaled_n, w.torque.raw_nm
        ));
        let m = &self.margins;
        out.push_str(&format!("margins: phi_g = {}\n", m.phi_g));
        out.push_str(&format!("         phi_c = {}\n", m.phi_c));
        out.push_str(&format!("         psi   = {}\n", m.psi));
        out.push_str(&format!(
            "disturbance bound: {:.4} N at nominal force\n",
            m.disturbance_bound_n
        ));
        let competitors: Vec<&ConeOut> = self
            .cones
            .iter()
            .filter(|c| c.disposition == ModeDisposition::Competitor)
            .collect();
        out.push_str(&format!("competitors: {}\n", competitors.len()));
        for c in competitors {
            let arcs = c
                .projection_arcs
                .as_ref()
                .map(|a| {
                    a.iter()
                        .map(|arc| {
                            format!("[{:.4} rad, +{:.4} rad]", arc.start.rad, arc.width.rad)
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!("  {}  sectors {}\n", c.mode, arcs));
        }
    }
}

// ---------------------------------------------------------------------
// `control`

/// One candidate mode in the selection ledger.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub mode: String,
    pub disposition: CandidateDisposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_g: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<Angle>,
    /// Whether the stamped command moves the object; only evaluated
    /// when selection filters on object motion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object_moves: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlBody {
    pub object_motion_only: bool,
    pub winner: StampBody,
    pub ledger: Vec<LedgerRow>,
}

impl Render for ControlBody {
    fn render(&self, out: &mut String) {
        if self.object_motion_only {
            out.push_str("selection restricted to modes that move the object\n");
        }
        out.push_str(&format!("ledger ({} candidate modes):\n", self.ledger.len()));
        out.push_str("mode        disposition        phi_g               psi\n");
        for row in &self.ledger {
            let fmt = |a: &Option<Angle>| match a {
                Some(angle) => format!("{angle}"),
                None => "-".to_string(),
            };
            let disp = serde_json::to_value(row.disposition)
                .expect("disposition serializes")
                .as_str()
                .expect("disposition is a string")
                .to_string();
            out.push_str(&format!(
                "{:<10}  {:<17}  {:<18}  {}{}\n",
                row.mode,
                disp,
                fmt(&row.phi_g),
                fmt(&row.psi),
                match row.object_moves {
                    Some(true) => "  (moves object)",
                    Some(false) => "  (object static)",
                    None => "",
                }
            ));
        }
        out.push('\n');
        self.winner.render(out);
    }
}

// ---------------------------------------------------------------------
// `optimize` and `sweep`

/// One tunable parameter: which attribute of which contact, and its box.
#[derive(Debug, Clone, Serialize)]
pub struct ParamOut {
    /// `contact_x`, `contact_y`, `normal_angle`, or `mu`, with the
    /// contact index (e.g. `normal_angle[2]`).
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// One ascent iterate.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub params: Vec<f64>,
    pub phi_g: Angle,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeBody {
    pub mode: String,
    pub parameters: Vec<ParamOut>,
    pub step: f64,
    /// Evaluated iterations (including the initial point).
    pub iterations: usize,
    pub initial_phi_g: Angle,
    pub final_phi_g: Angle,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    /// The scene with the optimized parameters applied, in file form.
    pub optimized_scene: SceneFile,
    pub trace: Vec<TraceRow>,
    /// Where the trace CSV was written, if requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
    /// Where the optimized scene file was written, if requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene_out: Option<String>,
}

impl Render for OptimizeBody {
    fn render(&self, out: &mut String) {
        out.push_str(&format!("mode: {}\n", self.mode));
        for (p, (a, b)) in
            self.parameters.iter().zip(self.initial_params.iter().zip(&self.final_params))
        {
            out.push_str(&format!(
                "param {} in [{}, {}]: {a} -> {b}\n",
                p.name, p.lower, p.upper
            ));
        }
        out.push_str(&format!(
            "phi_g: {} -> {} over {} iterations (step {})\n",
            self.initial_phi_g, self.final_phi_g, self.iterations, self.step
        ));
        if let Some(p) = &self.trace_csv {
            out.push_str(&format!("trace written to {p}\n"));
        }
        if let Some(p) = &self.scene_out {
            out.push_str(&format!("optimized scene written to {p}\n"));
        }
    }
}

/// One sweep sample row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub phi_g: Angle,
    pub phi_c: Angle,
    pub psi: Angle,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBody {
    pub mode: String,
    pub parameters: Vec<ParamOut>,
    pub seed: u64,
    pub samples: usize,
    pub feasible_count: usize,
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

impl Render for SweepBody {
    fn render(&self, out: &mut String) {
        out.push_str(&format!(
            "mode {}: {} of {} samples keep the action feasible (seed {})\n",
            self.mode, self.feasible_count, self.samples, self.seed
        ));
        for p in &self.parameters {
            out.push_str(&format!("param {} in [{}, {}]\n", p.name, p.lower, p.upper));
        }
        if let Some(p) = &self.csv_path {
            out.push_str(&format!("samples written to {p}\n"));
        } else {
            out.push('\n');
            out.push_str(&sweep_csv(&self.parameters, &self.rows));
        }
    }
}

/// CSV rendering of an ascent trace: one row per iterate, shortest
/// round-trip float formatting.
pub fn trace_csv(params: &[ParamOut], trace: &[TraceRow]) -> String {
    let mut out = String::from("iter");
    for p in params {
        out.push_str(&format!(",{}", p.name));
    }
    out.push_str(",phi_g_rad,phi_g_deg\n");
    for row in trace {
        out.push_str(&format!("{}", row.iter));
        for v in &row.params {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{},{}\n", row.phi_g.rad, row.phi_g.deg));
    }
    out
}

/// CSV rendering of sweep samples.
pub fn sweep_csv(params: &[ParamOut], rows: &[SweepRow]) -> String {
    let mut out = String::from("index");
    for p in params {
        out.push_str(&format!(",{}", p.name));
    }
    out.push_str(",phi_g_rad,phi_g_deg,phi_c_rad,phi_c_deg,psi_rad,psi_deg,feasible\n");
    for r in rows {
        out.push_str(&format!("{}", r.index));
        for v in &r.values {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(
            ",{},{},{},{},{},{},{}\n",
            r.phi_g.rad, r.phi_g.deg, r.phi_c.rad, r.phi_c.deg, r.psi.rad, r.psi.deg, r.feasible
        ));
    }
    out
}
