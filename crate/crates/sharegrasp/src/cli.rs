//! Command-line front end.
//!
//! Five subcommands over the library pipeline:
//!
//! - `modes <scene>` — enumerate every contact mode with its kinematic
//!   class, shared-grasp flag, and margin.
//! - `stamp <scene> --mode <m> --goal <goal>` — synthesize the hybrid
//!   force-velocity action for one goal mode, with margins and cone
//!   geometry.
//! - `control <scene> --goal <goal>` — rank every mode by the combined
//!   margin `Ψ` and stamp the winner, emitting the full selection
//!   ledger. `--object-motion-only` restricts the ranking to modes
//!   whose command actually moves the object.
//! - `optimize <scene> --mode <m> --param kind:contact:lo:hi …` —
//!   fixed-step gradient ascent of the margin over contact parameters.
//! - `sweep <scene> --mode <m> --goal <goal> --param …` — sample
//!   parameters uniformly at random and tabulate the margins the
//!   nominal action retains.
//!
//! # Output conventions
//!
//! The report goes to stdout — pretty JSON under `--json`, terminal
//! text otherwise; diagnostics (including a timing line) go to stderr.
//! Identical inputs produce byte-identical stdout: nothing
//! time-, locale-, or thread-dependent is printed unless `--timing`
//! explicitly embeds the wall clock in the report. Requested output
//! files are written atomically (temp file + rename), so a crashed run
//! never leaves a half-written file behind.
//!
//! # Exit codes
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success                                                    |
//! | 1    | failed to write a requested output file                    |
//! | 2    | malformed input: file syntax/schema/units, unreadable path, bad mode string or parameter description |
//! | 3    | well-formed scene violating a physical invariant           |
//! | 4    | velocity command risks a crash (jams against the all-fixed cone) |
//! | 5    | goal mode cannot be distinguished from competitors by any force |
//! | 6    | goal infeasible for the requested mode (kinematics or force) |
//! | 7    | no enumerated mode can execute the goal                    |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cone::Pcc;
use crate::control::{self, CandidateDisposition, SelectError};
use crate::files::{parse_goal, parse_scene, LoadError, SceneFile};
use crate::geometry::{Scene, SceneParam};
use crate::hfvc::GoalSpec;
use crate::modes::{
    enumerate_modes, kinematic_class, preserves_shared_grasp, ContactMode, ModeError,
};
use crate::optimize::{self, optimize_geometry, ParamSpec};
use crate::report::{
    self, sha256_hex, ActionOut, Angle, ArcOut, ConeOut, ControlBody, InputEcho, LedgerRow,
    MarginsOut, ModeCounts, ModeRow, ModesBody, OptimizeBody, ParamOut, Render, Report,
    StampBody, SweepBody, SweepRow, TraceRow, Twist, Wrench,
};
use crate::stamping::{
    f_filter, sectors_of, stamp_with_filter, FilterEntry, StampError, StampingResult,
};
use crate::verify::sweep_parameter;

pub const EXIT_IO: u8 = 1;
pub const EXIT_BAD_INPUT: u8 = 2;
pub const EXIT_INVALID_SCENE: u8 = 3;
pub const EXIT_CRASH: u8 = 4;
pub const EXIT_INDISTINGUISHABLE: u8 = 5;
pub const EXIT_GOAL_INFEASIBLE: u8 = 6;
pub const EXIT_NO_FEASIBLE_MODE: u8 = 7;

/// A failed command: exit code and the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

#[derive(Parser)]
#[command(
    name = "sharegrasp",
    version,
    about = "Planar shared-grasping analysis: contact modes, hybrid force-velocity actions, stability margins"
)]
pub struct Cli {
    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Embed wall-clock timing in the report (makes output differ
    /// between runs; timing always appears on stderr regardless).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Enumerate every contact mode of a scene with filter verdicts
    Modes(ModesArgs),
    /// Synthesize the hybrid action for one goal mode
    Stamp(StampArgs),
    /// Rank all modes for a goal and stamp the best one
    Control(ControlArgs),
    /// Gradient-ascend contact parameters to maximize a mode's margin
    Optimize(OptimizeArgs),
    /// Randomly sample contact parameters and tabulate margins
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct ModesArgs {
    /// Scene file (JSON)
    pub scene: PathBuf,
}

#[derive(Args)]
pub struct StampArgs {
    /// Scene file (JSON)
    pub scene: PathBuf,
    /// Goal contact mode: one letter per contact (f fixed, l/r sliding,
    /// s separate)
    #[arg(long)]
    pub mode: String,
    /// Goal file (JSON)
    #[arg(long)]
    pub goal: PathBuf,
}

#[derive(Args)]
pub struct ControlArgs {
    /// Scene file (JSON)
    pub scene: PathBuf,
    /// Goal file (JSON)
    #[arg(long)]
    pub goal: PathBuf,
    /// Only rank modes whose command moves the object
    #[arg(long)]
    pub object_motion_only: bool,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Scene file (JSON)
    pub scene: PathBuf,
    /// Contact mode whose margin is maximized
    #[arg(long)]
    pub mode: String,
    /// Tunable parameter as kind:contact:lo:hi (kinds: contact_x,
    /// contact_y, normal_angle, mu); repeat or comma-separate
    #[arg(long = "param", value_delimiter = ',', required = true)]
    pub params: Vec<String>,
    /// Iteration cap; 0 evaluates the start point only
    #[arg(long, default_value_t = optimize::DEFAULT_CAP)]
    pub iters: usize,
    /// Fixed ascent step (parameter units per unit gradient)
    #[arg(long, default_value_t = optimize::DEFAULT_STEP)]
    pub step: f64,
    /// Write the iterate trace as CSV to this path
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    /// Write the optimized scene as a scene file to this path
    #[arg(long)]
    pub out_scene: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Scene file (JSON)
    pub scene: PathBuf,
    /// Goal contact mode the action is stamped for
    #[arg(long)]
    pub mode: String,
    /// Goal file (JSON)
    #[arg(long)]
    pub goal: PathBuf,
    /// Swept parameter as kind:contact[:lo:hi]; bounds default to
    /// --range; repeat or comma-separate
    #[arg(long = "param", value_delimiter = ',', required = true)]
    pub params: Vec<String>,
    /// Default bounds lo:hi for parameters without embedded bounds
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Number of random samples
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// RNG seed (same seed, same samples)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the samples as CSV to this path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Binary entry point: parse, dispatch, print, map errors to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Dispatch a parsed invocation; returns the full stdout payload.
pub fn run(cli: &Cli) -> Result<String, Failure> {
    let t0 = Instant::now();
    match &cli.command {
        Command::Modes(a) => finish(cli, t0, cmd_modes(a)?),
        Command::Stamp(a) => finish(cli, t0, cmd_stamp(a)?),
        Command::Control(a) => finish(cli, t0, cmd_control(a)?),
        Command::Optimize(a) => finish(cli, t0, cmd_optimize(a)?),
        Command::Sweep(a) => finish(cli, t0, cmd_sweep(a)?),
    }
}

fn finish<T: serde::Serialize + Render>(
    cli: &Cli,
    t0: Instant,
    mut report: Report<T>,
) -> Result<String, Failure> {
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    eprintln!("timing: {ms:.1} ms");
    if cli.timing {
        report.timing_ms = Some(ms);
    }
    Ok(if cli.json { report.to_json() } else { report.to_text() })
}

// ---------------------------------------------------------------------
// Input loading

fn read_input(path: &Path, role: &str) -> Result<(String, InputEcho), Failure> {
    let bytes = fs::read(path)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("reading {}: {e}", path.display())))?;
    let echo = InputEcho {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    let text = String::from_utf8(bytes)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", path.display())))?;
    Ok((text, echo))
}

fn load_failure(e: LoadError) -> Failure {
    match e {
        LoadError::Parse(m) => fail(EXIT_BAD_INPUT, m),
        LoadError::Invalid(m) => fail(EXIT_INVALID_SCENE, m),
    }
}

fn load_scene(path: &Path) -> Result<(SceneFile, Scene, InputEcho), Failure> {
    let (text, echo) = read_input(path, "scene")?;
    let file = parse_scene(&text).map_err(load_failure)?;
    let scene = file.to_scene().map_err(load_failure)?;
    Ok((file, scene, echo))
}

fn load_goal(path: &Path, scene: &Scene) -> Result<(GoalSpec, InputEcho), Failure> {
    let (text, echo) = read_input(path, "goal")?;
    let goal = parse_goal(&text).map_err(load_failure)?.to_goal(scene).map_err(load_failure)?;
    Ok((goal, echo))
}

fn parse_mode(s: &str, scene: &Scene) -> Result<ContactMode, Failure> {
    ContactMode::parse(s, scene.num_contacts())
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("mode \"{s}\": {e}")))
}

fn enumerate(scene: &Scene) -> Result<Vec<ContactMode>, Failure> {
    enumerate_modes(scene).map_err(|e| match e {
        ModeError::TooManyContacts { .. } => fail(EXIT_INVALID_SCENE, e.to_string()),
        other => fail(EXIT_BAD_INPUT, other.to_string()),
    })
}

// ---------------------------------------------------------------------
// Error mapping

fn stamp_failure(e: StampError) -> Failure {
    let code = match &e {
        StampError::Crash => EXIT_CRASH,
        StampError::Indistinguishable => EXIT_INDISTINGUISHABLE,
        StampError::Goal(_) | StampError::FInfeasibleGoal | StampError::GoalModeVInfeasible => {
            EXIT_GOAL_INFEASIBLE
        }
        StampError::ModeNotEnumerated => EXIT_BAD_INPUT,
        StampError::Modes(ModeError::TooManyContacts { .. }) => EXIT_INVALID_SCENE,
        StampError::Modes(_) => EXIT_BAD_INPUT,
    };
    fail(code, e.to_string())
}

// ---------------------------------------------------------------------
// Parameter descriptions

fn parse_param_desc(
    desc: &str,
    scene: &Scene,
) -> Result<(SceneParam, Option<(f64, f64)>), Failure> {
    let bad = |why: &str| fail(EXIT_BAD_INPUT, format!("parameter \"{desc}\": {why}"));
    let parts: Vec<&str> = desc.split(':').collect();
    if parts.len() != 2 && parts.len() != 4 {
        return Err(bad("expected kind:contact or kind:contact:lo:hi"));
    }
    let index: usize =
        parts[1].parse().map_err(|_| bad("contact index is not a whole number"))?;
    if index >= scene.num_contacts() {
        return Err(bad(&format!(
            "contact index {index} out of range; the scene has {} contacts",
            scene.num_contacts()
        )));
    }
    let param = match parts[0] {
        "contact_x" => SceneParam::ContactX(index),
        "contact_y" => SceneParam::ContactY(index),
        "normal_angle" => SceneParam::NormalAngle(index),
        "mu" => SceneParam::Mu(index),
        other => {
            return Err(bad(&format!(
                "unknown kind \"{other}\"; expected contact_x, contact_y, normal_angle, or mu"
            )))
        }
    };
    let bounds = if parts.len() == 4 {
        let lo: f64 = parts[2].parse().map_err(|_| bad("lower bound is not a number"))?;
        let hi: f64 = parts[3].parse().map_err(|_| bad("upper bound is not a number"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad("bounds must be finite with lo <= hi"));
        }
        Some((lo, hi))
    } else {
        None
    };
    Ok((param, bounds))
}

fn param_name(p: SceneParam) -> String {
    match p {
        SceneParam::ContactX(i) => format!("contact_x[{i}]"),
        SceneParam::ContactY(i) => format!("contact_y[{i}]"),
        SceneParam::NormalAngle(i) => format!("normal_angle[{i}]"),
        SceneParam::Mu(i) => format!("mu[{i}]"),
    }
}

/// Parse every `--param`, reject duplicates, and resolve bounds (from
/// the description or the shared default).
fn parse_params(
    descs: &[String],
    scene: &Scene,
    default_bounds: Option<(f64, f64)>,
) -> Result<(Vec<SceneParam>, Vec<(f64, f64)>), Failure> {
    let mut entries = Vec::with_capacity(descs.len());
    let mut bounds = Vec::with_capacity(descs.len());
    for desc in descs {
        let (param, b) = parse_param_desc(desc, scene)?;
        if entries.contains(&param) {
            return Err(fail(
                EXIT_BAD_INPUT,
                format!("parameter {} given twice", param_name(param)),
            ));
        }
        let b = b.or(default_bounds).ok_or_else(|| {
            fail(
                EXIT_BAD_INPUT,
                format!(
                    "parameter \"{desc}\" has no bounds; use kind:contact:lo:hi or --range lo:hi"
                ),
            )
        })?;
        entries.push(param);
        bounds.push(b);
    }
    Ok((entries, bounds))
}

// ---------------------------------------------------------------------
// Output files

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    let io_fail =
        |e: std::io::Error| fail(EXIT_IO, format!("writing {}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(io_fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_fail(e)
    })
}

// ---------------------------------------------------------------------
// modes

fn cmd_modes(args: &ModesArgs) -> Result<Report<ModesBody>, Failure> {
    let (_, scene, echo) = load_scene(&args.scene)?;
    let modes = enumerate(&scene)?;
    let filter = f_filter(&scene, &modes);
    let rows: Vec<ModeRow> = filter
        .iter()
        .map(|e| {
            let balance = e.margin.as_ref().is_some_and(|m| !m.intersection.is_zero());
            ModeRow {
                mode: e.mode.to_string(),
                kinematic_class: kinematic_class(&scene, &e.mode),
                preserves_shared_grasp: preserves_shared_grasp(&scene, &e.mode),
                balance_capable: balance,
                f_feasible: e.f_feasible,
                phi_g: Angle::from_rad(e.margin.as_ref().map_or(0.0, |m| m.value)),
            }
        })
        .collect();
    let counts = ModeCounts {
        enumerated: rows.len(),
        shared_grasp_preserving: rows.iter().filter(|r| r.preserves_shared_grasp).count(),
        balance_capable: rows.iter().filter(|r| r.balance_capable).count(),
        margin_positive: rows.iter().filter(|r| r.f_feasible).count(),
    };
    Ok(Report::new("modes", vec![echo], ModesBody { counts, modes: rows }))
}

// ---------------------------------------------------------------------
// stamp

fn gens3(cone: &Pcc) -> Vec<[f64; 3]> {
    cone.generators().iter().map(|g| [g[0], g[1], g[2]]).collect()
}

fn stamp_body(scene: &Scene, result: &StampingResult, filter: &[FilterEntry]) -> StampBody {
    let a = &result.action;
    let mut r_a = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            r_a[r][c] = a.r_a[(r, c)];
        }
    }
    // Balancing wrench in scaled coordinates: K_F · R_af^T · direction.
    let mut w = [0.0; 3];
    for (k, d) in result.force_direction.iter().enumerate() {
        for c in 0..3 {
            w[c] += scene.nominal_force * d * a.r_a[(k, c)];
        }
    }
    let l = scene.char_length;
    let action = ActionOut {
        n_af: a.n_af,
        n_av: a.n_av,
        r_a,
        omega_av: a.omega_av.iter().copied().collect(),
        eta_af: a.eta_af.as_ref().map_or_else(Vec::new, |e| e.iter().copied().collect()),
        v_star_scaled: [
            a.v_star[0], a.v_star[1], a.v_star[2], a.v_star[3], a.v_star[4], a.v_star[5],
        ],
        object_twist: Twist::from_scaled([a.v_star[0], a.v_star[1], a.v_star[2]], l),
        hand_twist: Twist::from_scaled([a.v_star[3], a.v_star[4], a.v_star[5]], l),
    };
    let projection_out = |p: &Pcc| -> (Option<Vec<Vec<f64>>>, Option<Vec<ArcOut>>) {
        let gens = p.generators().iter().map(|g| g.iter().copied().collect()).collect();
        let arcs = (p.dim() == 2).then(|| {
            sectors_of(p)
                .iter()
                .map(|arc| ArcOut {
                    start: Angle::from_rad(arc.start),
                    width: Angle::from_rad(arc.width),
                })
                .collect()
        });
        (Some(gens), arcs)
    };
    let cones: Vec<ConeOut> = result
        .diagnostics
        .iter()
        .map(|d| {
            let entry = filter
                .iter()
                .find(|e| e.mode == d.mode)
                .expect("diagnostics cover exactly the filtered modes");
            let proj = if d.mode == result.mode {
                Some(&result.goal_projection)
            } else {
                result
                    .competitor_projections
                    .iter()
                    .find(|(m, _)| *m == d.mode)
                    .map(|(_, p)| p)
            };
            let (projection_generators, projection_arcs) =
                proj.map_or((None, None), |p| projection_out(p));
            ConeOut {
                mode: d.mode.to_string(),
                disposition: d.disposition,
                phi_g: d.phi_g.map(Angle::from_rad),
                environment_generators: gens3(&entry.cones.c_e),
                hand_generators: gens3(&entry.cones.c_h),
                intersection_generators: entry
                    .margin
                    .as_ref()
                    .map_or_else(Vec::new, |m| gens3(&m.intersection)),
                projection_generators,
                projection_arcs,
            }
        })
        .collect();
    StampBody {
        mode: result.mode.to_string(),
        action,
        force_direction: result.force_direction.iter().copied().collect(),
        balance_wrench: Wrench::from_scaled(w, l),
        margins: MarginsOut {
            phi_g: Angle::from_rad(result.phi_g),
            phi_c: Angle::from_rad(result.phi_c),
            psi: Angle::from_rad(result.psi),
            disturbance_bound_n: result.disturbance_bound,
        },
        cones,
    }
}

fn cmd_stamp(args: &StampArgs) -> Result<Report<StampBody>, Failure> {
    let (_, scene, escene) = load_scene(&args.scene)?;
    let mode = parse_mode(&args.mode, &scene)?;
    let (goal, egoal) = load_goal(&args.goal, &scene)?;
    let modes = enumerate(&scene)?;
    if !modes.contains(&mode) {
        return Err(stamp_failure(StampError::ModeNotEnumerated));
    }
    let filter = f_filter(&scene, &modes);
    let result = stamp_with_filter(&scene, &mode, &goal, &filter).map_err(stamp_failure)?;
    Ok(Report::new("stamp", vec![escene, egoal], stamp_body(&scene, &result, &filter)))
}

// ---------------------------------------------------------------------
// control

/// Object part of the commanded velocity, scaled coordinates.
fn moves_object(result: &StampingResult) -> bool {
    let v = &result.action.v_star;
    v[0].abs().max(v[1].abs()).max(v[2].abs()) > 1e-9
}

fn cmd_control(args: &ControlArgs) -> Result<Report<ControlBody>, Failure> {
    let (_, scene, escene) = load_scene(&args.scene)?;
    let (goal, egoal) = load_goal(&args.goal, &scene)?;
    let selection = control::select_mode(&scene, &goal).map_err(|e| match e {
        SelectError::NoFeasibleMode => fail(EXIT_NO_FEASIBLE_MODE, e.to_string()),
        SelectError::Modes(ModeError::TooManyContacts { .. }) => {
            fail(EXIT_INVALID_SCENE, e.to_string())
        }
        SelectError::Modes(err) => fail(EXIT_BAD_INPUT, err.to_string()),
    })?;

    let modes = enumerate(&scene)?;
    let filter = f_filter(&scene, &modes);

    let mut ledger: Vec<LedgerRow> = selection
        .ledger
        .iter()
        .map(|e| LedgerRow {
            mode: e.mode.to_string(),
            disposition: e.disposition,
            phi_g: e.phi_g.map(Angle::from_rad),
            psi: e.psi.map(Angle::from_rad),
            object_moves: None,
        })
        .collect();

    let winner = if args.object_motion_only {
        // Re-stamp every ranked candidate to test its commanded motion,
        // then re-rank among the movers.
        let mut best: Option<(usize, StampingResult)> = None;
        for (i, entry) in selection.ledger.iter().enumerate() {
            if entry.psi.is_none() {
                continue;
            }
            let result = stamp_with_filter(&scene, &entry.mode, &goal, &filter)
                .expect("ranked candidates stamp");
            let moves = moves_object(&result);
            ledger[i].object_moves = Some(moves);
            if moves && best.as_ref().is_none_or(|(_, b)| result.psi > b.psi) {
                best = Some((i, result));
            }
        }
        let (winner_idx, result) = best.ok_or_else(|| {
            fail(EXIT_NO_FEASIBLE_MODE, "no feasible mode moves the object under this goal")
        })?;
        // The unrestricted winner may have been filtered out; relabel.
        for (i, row) in ledger.iter_mut().enumerate() {
            if row.disposition == CandidateDisposition::Winner && i != winner_idx {
                row.disposition = CandidateDisposition::LowerPsi;
            }
        }
        ledger[winner_idx].disposition = CandidateDisposition::Winner;
        result
    } else {
        selection.best
    };

    let body = ControlBody {
        object_motion_only: args.object_motion_only,
        winner: stamp_body(&scene, &winner, &filter),
        ledger,
    };
    Ok(Report::new("control", vec![escene, egoal], body))
}

// ---------------------------------------------------------------------
// optimize

fn cmd_optimize(args: &OptimizeArgs) -> Result<Report<OptimizeBody>, Failure> {
    let (_, scene, escene) = load_scene(&args.scene)?;
    let mode = parse_mode(&args.mode, &scene)?;
    let (entries, bounds) = parse_params(&args.params, &scene, None)?;
    if !(args.step.is_finite() && args.step > 0.0) {
        return Err(fail(EXIT_BAD_INPUT, "--step must be positive"));
    }
    let spec = ParamSpec {
        entries: entries.clone(),
        bounds: bounds.clone(),
        step: args.step,
        // Iteration 0 still evaluates the start point.
        cap: args.iters.max(1),
    };
    let trace = optimize_geometry(&scene, &mode, &spec)
        .map_err(|e| fail(EXIT_GOAL_INFEASIBLE, e.to_string()))?;

    let parameters: Vec<ParamOut> = entries
        .iter()
        .zip(&bounds)
        .map(|(p, &(lo, hi))| ParamOut { name: param_name(*p), lower: lo, upper: hi })
        .collect();
    let rows: Vec<TraceRow> = trace
        .iterations
        .iter()
        .enumerate()
        .map(|(i, it)| TraceRow {
            iter: i,
            params: it.params.clone(),
            phi_g: Angle::from_rad(it.phi_g),
        })
        .collect();

    let mut optimized = scene.clone();
    spec.apply(&mut optimized, &trace.final_params);
    let optimized_file = SceneFile::from_scene(&optimized);

    let trace_csv_path = match &args.trace_csv {
        Some(p) => {
            write_atomic(p, &report::trace_csv(&parameters, &rows))?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let scene_out_path = match &args.out_scene {
        Some(p) => {
            write_atomic(p, &optimized_file.to_json())?;
            Some(p.display().to_string())
        }
        None => None,
    };

    let body = OptimizeBody {
        mode: mode.to_string(),
        parameters,
        step: spec.step,
        iterations: rows.len(),
        initial_phi_g: Angle::from_rad(trace.initial_phi_g()),
        final_phi_g: Angle::from_rad(trace.final_phi_g()),
        initial_params: rows.first().expect("at least one iterate").params.clone(),
        final_params: trace.final_params.clone(),
        optimized_scene: optimized_file,
        trace: rows,
        trace_csv: trace_csv_path,
        scene_out: scene_out_path,
    };
    Ok(Report::new("optimize", vec![escene], body))
}

// ---------------------------------------------------------------------
// sweep

fn cmd_sweep(args: &SweepArgs) -> Result<Report<SweepBody>, Failure> {
    let (_, scene, escene) = load_scene(&args.scene)?;
    let mode = parse_mode(&args.mode, &scene)?;
    let (goal, egoal) = load_goal(&args.goal, &scene)?;
    let default_bounds = match &args.range {
        Some(r) => {
            let bad = || fail(EXIT_BAD_INPUT, format!("--range \"{r}\": expected lo:hi"));
            let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(bad());
            }
            Some((lo, hi))
        }
        None => None,
    };
    let (entries, bounds) = parse_params(&args.params, &scene, default_bounds)?;

    let modes = enumerate(&scene)?;
    if !modes.contains(&mode) {
        return Err(stamp_failure(StampError::ModeNotEnumerated));
    }
    let filter = f_filter(&scene, &modes);
    let result = stamp_with_filter(&scene, &mode, &goal, &filter).map_err(stamp_failure)?;
    if result.force_direction.iter().all(|&d| d == 0.0) {
        return Err(fail(
            EXIT_GOAL_INFEASIBLE,
            "the stamped action carries no force command to sweep",
        ));
    }

    let samples =
        sweep_parameter(&scene, &mode, &result.action, &entries, &bounds, args.samples, args.seed);
    let rows: Vec<SweepRow> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| SweepRow {
            index: i,
            values: s.values.clone(),
            phi_g: Angle::from_rad(s.phi_g),
            phi_c: Angle::from_rad(s.phi_c),
            psi: Angle::from_rad(s.psi),
            feasible: s.feasible,
        })
        .collect();
    let parameters: Vec<ParamOut> = entries
        .iter()
        .zip(&bounds)
        .map(|(p, &(lo, hi))| ParamOut { name: param_name(*p), lower: lo, upper: hi })
        .collect();

    let csv_path = match &args.out {
        Some(p) => {
            write_atomic(p, &report::sweep_csv(&parameters, &rows))?;
            Some(p.display().to_string())
        }
        None => None,
    };

    let body = SweepBody {
        mode: mode.to_string(),
        parameters,
        seed: args.seed,
        samples: rows.len(),
        feasible_count: rows.iter().filter(|r| r.feasible).count(),
        rows,
        csv_path,
    };
    Ok(Report::new("sweep", vec![escene, egoal], body))
}

// ---------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::cube_palm_scene;

    #[test]
    fn parameter_descriptions_parse_and_reject_garbage() {
        let scene = cube_palm_scene();
        let (p, b) = parse_param_desc("contact_x:2:-0.05:0.05", &scene).unwrap();
        assert_eq!(p, SceneParam::ContactX(2));
        assert_eq!(b, Some((-0.05, 0.05)));
        let (p, b) = parse_param_desc("mu:0", &scene).unwrap();
        assert_eq!(p, SceneParam::Mu(0));
        assert_eq!(b, None);

        for bad in [
            "contact_x",
            "contact_x:9",
            "contact_x:two",
            "warp:1",
            "contact_x:1:3",
            "contact_x:1:0.1:0.0",
            "contact_x:1:lo:hi",
        ] {
            let err = parse_param_desc(bad, &scene).unwrap_err();
            assert_eq!(err.code, EXIT_BAD_INPUT, "{bad}");
        }
    }

    #[test]
    fn duplicate_parameters_are_rejected() {
        let scene = cube_palm_scene();
        let descs = vec!["contact_x:2:0:1".to_string(), "contact_x:2:0:1".to_string()];
        let err = parse_params(&descs, &scene, None).unwrap_err();
        assert_eq!(err.code, EXIT_BAD_INPUT);
        assert!(err.message.contains("twice"));
    }

    #[test]
    fn range_fallback_fills_missing_bounds_only() {
        let scene = cube_palm_scene();
        let descs = vec!["contact_x:2:-1:1".to_string(), "contact_y:2".to_string()];
        let (_, bounds) = parse_params(&descs, &scene, Some((0.0, 0.5))).unwrap();
        assert_eq!(bounds, vec![(-1.0, 1.0), (0.0, 0.5)]);
        let err = parse_params(&descs, &scene, None).unwrap_err();
        assert!(err.message.contains("no bounds"));
    }

    #[test]
    fn exit_codes_partition_the_failure_modes() {
        // The mapping from library errors to exit codes is part of the
        // interface; pin the table.
        assert_eq!(stamp_failure(StampError::Crash).code, EXIT_CRASH);
        assert_eq!(
            stamp_failure(StampError::Indistinguishable).code,
            EXIT_INDISTINGUISHABLE
        );
        assert_eq!(stamp_failure(StampError::FInfeasibleGoal).code, EXIT_GOAL_INFEASIBLE);
        assert_eq!(stamp_failure(StampError::GoalModeVInfeasible).code, EXIT_GOAL_INFEASIBLE);
        assert_eq!(stamp_failure(StampError::ModeNotEnumerated).code, EXIT_BAD_INPUT);
        assert_eq!(
            load_failure(LoadError::Parse("x".into())).code,
            EXIT_BAD_INPUT
        );
        assert_eq!(
            load_failure(LoadError::Invalid("x".into())).code,
            EXIT_INVALID_SCENE
        );
    }
}
