//! Line-oriented reports and error mapping.

use std::fmt::Display;

use serde_json::{Map, Value};

use crate::Context;

/// Ordered `key=value` lines, mirrored into an optional JSON object.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
    json: Map<String, Value>,
    extra: Vec<String>,
    negative: bool,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        let s = value.to_string();
        self.json.insert(key.to_string(), Value::String(s.clone()));
        self.lines.push((key.to_string(), s));
        self
    }

    pub fn num(&mut self, key: &str, value: impl Into<serde_json::Number> + Display + Copy) -> &mut Self {
        self.json.insert(key.to_string(), Value::Number(value.into()));
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    /// A structured value that only the JSON block carries.
    pub fn json(&mut self, key: &str, value: Value) -> &mut Self {
        self.json.insert(key.to_string(), value);
        self
    }

    /// Free-form lines (tables, matrices) printed after the key/value lines.
    pub fn text(&mut self, line: impl Into<String>) -> &mut Self {
        self.extra.push(line.into());
        self
    }

    /// Marks a zero/singular verdict for a run that asked for a witness.
    pub fn set_negative(&mut self) {
        self.negative = true;
    }

    pub fn exit_code(&self) -> u8 {
        u8::from(self.negative)
    }

    pub(crate) fn prepend_params(&mut self, name: &str, ctx: &Context) {
        let mut head = Report::new();
        head.kv("command", name)
            .num("prime", ctx.field.modulus())
            .num("seed", ctx.seed)
            .kv("seed_source", if ctx.seed_derived { "derived" } else { "explicit" });
        head.lines.append(&mut self.lines);
        self.lines = head.lines;
        for (k, v) in head.json {
            self.json.entry(k).or_insert(v);
        }
    }

    pub fn render(&self, with_json: bool) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        for l in &self.extra {
            s.push_str(l);
            s.push('\n');
        }
        if with_json {
            s.push_str("--- json\n");
            s.push_str(&serde_json::to_string_pretty(&Value::Object(self.json.clone())).expect("serializable"));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit status 2.
    Input(String),
    /// A computation that could not produce the requested result; exit status 1.
    Failed(String),
}

impl CliError {
    pub fn input(msg: impl Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn failed(msg: impl Display) -> Self {
        CliError::Failed(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }

    pub fn render(&self, name: &str) -> String {
        match self {
            CliError::Input(m) => format!("ncrat {name}: input error: {m}\n"),
            CliError::Failed(m) => format!("command={name}\nerror={m}\n"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(format!("{e:#}"))
    }
}
