use mems_core::verify::Check;
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub checks: Vec<Check>,
    pub exit_code: i32,
}

impl RunReport {
    /// Exit code follows from the checks: 0 if all pass, 1 otherwise.
    pub fn finished(command: &str, inputs: Value, outputs: Value, checks: Vec<Check>) -> Self {
        let exit_code = if checks.iter().all(|c| c.pass) {
            EXIT_PASS
        } else {
            EXIT_VERIFY_FAILED
        };
        RunReport {
            command: command.to_string(),
            inputs,
            outputs,
            checks,
            exit_code,
        }
    }

    pub fn invalid(command: &str, inputs: Value, message: String) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            outputs: serde_json::json!({ "error": message }),
            checks: Vec::new(),
            exit_code: EXIT_INVALID_INPUT,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Write `text` to `out`, or standard output when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
