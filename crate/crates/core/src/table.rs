//! Plain-text record tables used for the material and improvement data files.
//!
//! ```text
//! # comment
//! [record_name]
//! key = 1.5e-3      # trailing comments name the source of a value
//! label = "free text"
//! ```

use crate::error::{Error, Result};
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub line: usize,
    pub fields: Vec<Field>,
}

impl Record {
    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.key == key)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(f) => f.value.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line: f.line,
                reason: format!("{key}: expected a number, got {:?}", f.value),
            }),
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|f| f.value.as_str())
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(f) => match f.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::Parse {
                    line: f.line,
                    reason: format!("{key}: expected true or false, got {other:?}"),
                }),
            },
        }
    }

    /// Errors on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for f in &self.fields {
            if !allowed.contains(&f.key.as_str()) {
                return Err(Error::Parse {
                    line: f.line,
                    reason: format!("unknown key {:?} in [{}]", f.key, self.name),
                });
            }
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

pub fn parse(text: &str) -> Result<Vec<Record>> {
    let mut records: Vec<Record> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                reason: "unterminated record header".into(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Parse { line, reason: "empty record name".into() });
            }
            if records.iter().any(|r| r.name.eq_ignore_ascii_case(name)) {
                return Err(Error::Parse { line, reason: format!("duplicate record [{name}]") });
            }
            records.push(Record { name: name.to_string(), line, fields: Vec::new() });
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            reason: format!("expected key = value, got {body:?}"),
        })?;
        let key = key.trim();
        let mut value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, reason: "empty key".into() });
        }
        if let Some(v) = value.strip_prefix('"') {
            value = v.strip_suffix('"').ok_or_else(|| Error::Parse {
                line,
                reason: "unterminated string".into(),
            })?;
        }
        let record = records.last_mut().ok_or_else(|| Error::Parse {
            line,
            reason: "field before any [record] header".into(),
        })?;
        if record.get(key).is_some() {
            return Err(Error::Parse { line, reason: format!("duplicate key {key:?}") });
        }
        record.fields.push(Field { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(records)
}
