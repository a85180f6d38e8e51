//! JSON-lines fact files: one `{"relation": ..., "args": [...]}` per line.

use serde::Deserialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::engine::{EngineError, Fact, Solver};

#[derive(Debug, Error)]
pub enum FactFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Rejected { line: usize, source: EngineError },
}

/// One raw fact before typing against a program.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFact {
    pub relation: String,
    pub args: Vec<Json>,
}

/// Parses a JSONL document. Blank lines and lines starting with `#` are
/// skipped. Returns facts paired with their 1-based line numbers.
pub fn parse_facts(text: &str) -> Result<Vec<(usize, RawFact)>, FactFileError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let raw: RawFact = serde_json::from_str(t).map_err(|e| {
            let text = e.to_string();
            let cut = text.rfind(" at line ").unwrap_or(text.len());
            FactFileError::Syntax {
                line: i + 1,
                message: format!("{} (column {})", &text[..cut], e.column()),
            }
        })?;
        out.push((i + 1, raw));
    }
    Ok(out)
}

/// Parses `text` and inserts every fact. Returns how many were new.
pub fn load_facts(solver: &mut Solver, text: &str) -> Result<usize, FactFileError> {
    let mut fresh = 0;
    for (line, raw) in parse_facts(text)? {
        if solver
            .insert_json(&raw.relation, &raw.args)
            .map_err(|source| FactFileError::Rejected { line, source })?
        {
            fresh += 1;
        }
    }
    Ok(fresh)
}

pub fn write_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let mut s = String::new();
    for f in facts {
        s.push_str(&f.to_json_line());
        s.push('\n');
    }
    s
}
