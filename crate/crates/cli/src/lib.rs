//! File formats, scenarios and command handlers behind the `l0stable` binary.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario;

use serde_json::{json, Value};

use crate::commands::{RunConfig, Sections};
use crate::error::CliResult;

/// Wraps a command outcome into the report printed on stdout, together
/// with the process exit code.
pub fn report(command: &str, cfg: &RunConfig, outcome: CliResult<Sections>) -> (Value, i32) {
    match outcome {
        Ok(s) => (
            json!({
                "command": command,
                "seed": cfg.seed,
                "status": "ok",
                "inputs": s.inputs,
                "outputs": s.outputs,
                "audits": s.audits,
            }),
            0,
        ),
        Err(e) => {
            let status = if e.exit_code() == error::EXIT_MATH { "failed" } else { "invalid" };
            (
                json!({"command": command, "seed": cfg.seed, "status": status, "error": e.to_json()}),
                e.exit_code(),
            )
        }
    }
}
