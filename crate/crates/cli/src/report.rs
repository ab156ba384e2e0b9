//! Report assembly and the exit-code contract.

use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use zuslab::json::SCHEMA_VERSION;

pub const EXIT_HOLDS: u8 = 0;
pub const EXIT_FAILS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

/// Input or validation problem; always exits with [`EXIT_INPUT`].
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

impl From<zuslab::Error> for Failure {
    fn from(e: zuslab::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

pub struct Report {
    pub command: &'static str,
    pub body: Map<String, Value>,
    pub text: Vec<String>,
    pub exit: u8,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            body: Map::new(),
            text: Vec::new(),
            exit: EXIT_HOLDS,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.body.insert(key.to_string(), value.into());
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn failure(command: &'static str, f: &Failure) -> Self {
        let mut r = Self::new(command);
        r.set("error", json!({ "kind": f.kind, "message": f.message }));
        r.line(format!("error [{}]: {}", f.kind, f.message));
        r.exit = EXIT_INPUT;
        r
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema".into(), SCHEMA_VERSION.into());
        root.insert("command".into(), self.command.into());
        root.insert(
            "timestamp".into(),
            chrono::Utc::now()
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
                .into(),
        );
        root.insert("exit_code".into(), self.exit.into());
        root.extend(self.body.clone());
        serde_json::to_string_pretty(&Value::Object(root)).expect("reports serialize")
    }
}

/// Where and how a report is written.
pub struct Sink {
    pub json: bool,
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn emit(&self, r: &Report) -> u8 {
        let text = if self.json {
            r.to_json() + "\n"
        } else {
            r.text.iter().map(|l| format!("{l}\n")).collect()
        };
        let to_stderr = !self.json && r.exit == EXIT_INPUT;
        match &self.out {
            Some(path) if !to_stderr => {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error [Io]: cannot write {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            _ if to_stderr => {
                let _ = std::io::stderr().write_all(text.as_bytes());
            }
            _ => {
                let _ = std::io::stdout().write_all(text.as_bytes());
            }
        }
        r.exit
    }
}

/// `M₂`-style subscripts.
pub fn subscript(n: usize) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32('₀' as u32 + c.to_digit(10).expect("decimal digit")).expect("subscript digit"))
        .collect()
}

/// Fixed-point value with negative zero folded away.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fixed(x)).collect::<Vec<_>>().join(", ")
}
