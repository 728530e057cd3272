//! Mode selection: stamp every force-feasible contact mode for the
//! goal and keep the most robust action.
//!
//! The selection loop shares one F-filter pass across all candidates
//! (the per-mode wrench cones do not depend on the goal), runs the
//! stamping pipeline on each survivor with that mode as the target, and
//! returns the result with the largest combined margin `Ψ`. Every
//! enumerated mode appears in the ledger with the reason it won, lost,
//! or dropped out — nothing is silently discarded. Ties on `Ψ` break to
//! the lexicographically smallest mode string, and the whole loop is
//! deterministic, so identical inputs yield identical ledgers.

use thiserror::Error;

use crate::geometry::Scene;
use crate::hfvc::GoalSpec;
use crate::modes::{enumerate_modes, ContactMode, ModeError};
use crate::stamping::{f_filter, stamp_with_filter, StampError, StampingResult};

/// Why a candidate mode ended up where it did in the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateDisposition {
    /// Stamped successfully with the highest `Ψ`.
    Winner,
    /// Stamped successfully but beaten on `Ψ` (or on the tie-break).
    LowerPsi,
    /// Dropped by the F-filter: wrench cones with trivial intersection
    /// or zero geometric margin.
    FInfeasible,
    /// Its own velocity decomposition rejected the goal.
    GoalInfeasible,
    /// Its own sliding/separation signs contradict the goal velocity.
    VInfeasible,
    /// The goal velocity rams a force-closure direction.
    Crash,
    /// No force command separates it from its competitors.
    Indistinguishable,
}

/// One row of the selection ledger.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SelectionEntry {
    pub mode: ContactMode,
    pub disposition: CandidateDisposition,
    /// Combined margin for stamped candidates.
    pub psi: Option<f64>,
    /// Geometric margin where the F-filter computed one.
    pub phi_g: Option<f64>,
}

/// The winning action plus the full ranking.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// The stamped action with the highest `Ψ`.
    pub best: StampingResult,
    /// Every enumerated mode, in enumeration order.
    pub ledger: Vec<SelectionEntry>,
}

/// Mode-selection failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SelectError {
    #[error("no contact mode admits a robust action for this goal")]
    NoFeasibleMode,
    #[error(transparent)]
    Modes(#[from] ModeError),
}

fn disposition_of(err: &StampError) -> CandidateDisposition {
    match err {
        StampError::Crash => CandidateDisposition::Crash,
        StampError::Goal(_) => CandidateDisposition::GoalInfeasible,
        StampError::GoalModeVInfeasible => CandidateDisposition::VInfeasible,
        StampError::Indistinguishable => CandidateDisposition::Indistinguishable,
        // The loop only stamps F-survivors it enumerated itself.
        StampError::FInfeasibleGoal
        | StampError::ModeNotEnumerated
        | StampError::Modes(_) => unreachable!("filtered before stamping: {err}"),
    }
}

/// Stamp every force-feasible mode and return the max-`Ψ` action with
/// the complete candidate ledger.
///
/// Modes whose wrench cones cannot sustain any contested wrench (the
/// F-filter) are never stamped — in particular the all-separate mode;
/// a goal only achievable without wrench-carrying contact therefore
/// reports `NoFeasibleMode` here and is the province of stamping that
/// mode directly.
pub fn select_mode(scene: &Scene, goal: &GoalSpec) -> Result<SelectionResult, SelectError> {
    let modes = enumerate_modes(scene)?;
    let filter = f_filter(scene, &modes);

    let mut ledger: Vec<SelectionEntry> = Vec::with_capacity(filter.len());
    let mut stamped: Vec<(usize, StampingResult)> = Vec::new();
    for (i, entry) in filter.iter().enumerate() {
        let phi_g = entry.margin.as_ref().map(|m| m.value);
        if !entry.f_feasible {
            ledger.push(SelectionEntry {
                mode: entry.mode.clone(),
                disposition: CandidateDisposition::FInfeasible,
                psi: None,
                phi_g,
            });
            continue;
        }
        match stamp_with_filter(scene, &entry.mode, goal, &filter) {
            Ok(result) => {
                ledger.push(SelectionEntry {
                    mode: entry.mode.clone(),
                    disposition: CandidateDisposition::LowerPsi,
                    psi: Some(result.psi),
                    phi_g,
                });
                stamped.push((i, result));
            }
            Err(e) => ledger.push(SelectionEntry {
                mode: entry.mode.clone(),
                disposition: disposition_of(&e),
                psi: None,
                phi_g,
            }),
        }
    }

    // Enumeration order is lexicographic, so strict improvement keeps
    // the smallest mode string among Ψ ties.
    let best_index = stamped
        .iter()
        .enumerate()
        .max_by(|(_, (_, a)), (_, (_, b))| a.psi.partial_cmp(&b.psi).expect("finite margins"))
        .map(|(pos, _)| pos);
    let Some(pos) = best_index else {
        return Err(SelectError::NoFeasibleMode);
    };
    // max_by keeps the LAST maximum; rescan for the first.
    let best_psi = stamped[pos].1.psi;
    let (ledger_index, best) = stamped
        .into_iter()
        .find(|(_, r)| r.psi == best_psi)
        .expect("a maximum exists");
    ledger[ledger_index].disposition = CandidateDisposition::Winner;
    Ok(SelectionResult { best, ledger })
}
