//! Spec ingestion, report emission and the verification runner.

mod json;
mod report;
pub mod sampling;
mod spec;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::forms::NumericsConfig;
use crate::models::HolonomyConvention;
use crate::numerics::QuadratureRule;
use crate::quantisation::QuantiseOptions;

pub use json::{to_canonical_json, CanonicalFormatter};
pub use report::{
    bs_csv, emit_report, parse_report, run_quantise, ReportDocument, REPORT_SCHEMA_VERSION,
};
pub use spec::{parse_spec, parse_window, ParsedSpec, SPEC_SCHEMA_VERSION};
pub use verify::{run_verify, Suite, VerifyCase, VerifyReport};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub fd_step: f64,
    pub fd_richardson: bool,
    pub quadrature_steps: usize,
    pub quadrature_rule: QuadratureRule,
    pub ode_tol: f64,
    pub eq_tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub disk_convention: HolonomyConvention,
    /// Pass threshold for verification residuals.
    pub tol: f64,
    pub output: Option<String>,
    pub csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let n = NumericsConfig::default();
        Self {
            fd_step: n.fd_step,
            fd_richardson: n.fd_richardson,
            quadrature_steps: n.quadrature_steps,
            quadrature_rule: n.quadrature_rule,
            ode_tol: n.ode_tol,
            eq_tol: n.eq_tol,
            seed: 0,
            samples: 100,
            disk_convention: HolonomyConvention::TransportOracle,
            tol: 1e-6,
            output: None,
            csv: false,
        }
    }
}

impl RunConfig {
    pub fn numerics(&self) -> NumericsConfig {
        NumericsConfig {
            fd_step: self.fd_step,
            fd_richardson: self.fd_richardson,
            quadrature_steps: self.quadrature_steps,
            quadrature_rule: self.quadrature_rule,
            ode_tol: self.ode_tol,
            eq_tol: self.eq_tol,
            convention: self.disk_convention,
        }
    }

    pub fn quantise_options(&self) -> QuantiseOptions {
        QuantiseOptions {
            convention: self.disk_convention,
            seed: self.seed,
            ..QuantiseOptions::default()
        }
    }
}
