use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TUpdate,
    KinGrow,
    KoutCut,
    XStep,
    Terminate,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TUpdate => "t_update",
            EventKind::KinGrow => "kin_grow",
            EventKind::KoutCut => "kout_cut",
            EventKind::XStep => "x_step",
            EventKind::Terminate => "terminate",
        }
    }
}

/// One row of the solver's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub iter: usize,
    pub kind: EventKind,
    pub block: Option<usize>,
    pub t: f64,
    /// `c·x` after the event.
    pub objective: f64,
    /// `c·x*_out` after the event.
    pub outer_objective: f64,
    /// Cumulative separation calls.
    pub sep_calls: u64,
    pub wall_ms: f64,
    /// For cuts: fraction of the previous outer samples kept by the cut.
    pub survival: Option<f64>,
}
