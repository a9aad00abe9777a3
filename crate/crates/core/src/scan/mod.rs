//! Tree-aware selective scan.
//!
//! The operator runs two passes over a rooted spanning tree. The upward pass
//! accumulates gated child states into each parent; the downward pass blends
//! every node with its parent so that sibling information reaches it. An
//! output gain projects the final state. All stages are linear in the input
//! features for fixed gates, which the dense oracle exploits.

mod backward;
mod forward;
mod gradcheck;
mod oracle;
mod params;

pub use backward::{scan_backward, ScanGradients};
pub use forward::{project_output, scan_down, scan_up, tree_scan, ScanState};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport, DEFAULT_FD_STEP, REL_ERROR_FLOOR};
pub use oracle::{
    convergence_report, oracle_operator, oracle_scan, oracle_scan_with_cap, ConvergenceReport, DEFAULT_ORACLE_NODE_CAP,
};
pub use params::{make_params, normalize_gates, ParamWeights, ScanParams, GATE_EPSILON};

/// How the downward pass reads the parent state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ScanVariant {
    /// `h_i = a_i * h_parent + (1 - a_i) * h_lr_i`, using the parent's final
    /// state. This is the system the solvability argument is stated over.
    #[default]
    MatrixConsistent,
    /// `h_i = a_i * (h_lr_parent - h_lr_i) + h_lr_i`, using the parent's
    /// upward-pass state.
    LiteralEq9,
}

impl std::str::FromStr for ScanVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "matrix" => Ok(Self::MatrixConsistent),
            "literal" => Ok(Self::LiteralEq9),
            other => Err(crate::Error::Data(format!("unknown scan variant {other:?} (expected matrix or literal)"))),
        }
    }
}
