//! Shared verdict and CSV formatting conventions for check reports.

use std::fmt;

/// Outcome of one verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    /// The check's own hypothesis was violated by the data, so the claim it
    /// verifies does not apply.
    NotApplicable,
}

impl CheckVerdict {
    pub fn passed(self) -> bool {
        self == CheckVerdict::Pass
    }
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::Pass => write!(f, "PASS"),
            CheckVerdict::Fail => write!(f, "FAIL"),
            CheckVerdict::NotApplicable => write!(f, "N-A"),
        }
    }
}

/// Format a float with 17 significant digits, the fidelity needed to
/// round-trip an f64 through text.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
