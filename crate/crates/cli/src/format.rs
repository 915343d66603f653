//! Spectrum CSV and JSON, the grid flag, and flat key-value reports.
//!
//! Floats are written in the shortest form that parses back to the same
//! value, so a spectrum survives a write/read cycle bit for bit.

use crate::error::{CliError, CliResult};
use piezobrill_core::spectrum::{Grid, Metadata, Spectrum, SpectrumKind};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;

/// Shortest round-trip representation.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

/// `start:stop:points`, Hz.
pub fn parse_grid(flag: &str) -> CliResult<Grid> {
    let bad = |why: &str| CliError::Usage(format!("--grid {flag:?}: {why}; expected start:stop:points"));
    let parts: Vec<&str> = flag.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad("need three fields"));
    };
    let start: f64 = a.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = b.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let points: usize = n.trim().parse().map_err(|_| bad("points is not an integer"))?;
    if points < 2 {
        return Err(bad("points must be at least 2"));
    }
    if !(stop > start) {
        return Err(bad("stop must exceed start"));
    }
    Ok(Grid::linspace(start, stop, points)?)
}

/// `start:stop`, Hz.
pub fn parse_range(flag: &str, name: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("{name} {flag:?}: expected start:stop"));
    let (a, b) = flag.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(b > a) {
        return Err(bad());
    }
    Ok((a, b))
}

fn db(p: f64) -> f64 {
    10.0 * p.log10()
}

fn comment_lines(s: &Spectrum) -> Vec<String> {
    let m = &s.metadata;
    let mut out = vec![format!("kind = {}", s.kind.name())];
    if let Some(b) = m.baseline {
        out.push(format!("baseline = {}", float(b)));
    }
    out.extend(m.params.iter().map(|(k, v)| format!("param {k} = {}", float(*v))));
    out.extend(m.warnings.iter().map(|w| format!("warning {w}")));
    out.extend(m.comments.iter().cloned());
    out
}

/// Header `freq_hz,re,im,power[,power_db]`, preceded by `#` metadata lines.
pub fn spectrum_to_csv(s: &Spectrum, with_db: bool) -> String {
    let mut out = String::new();
    for c in comment_lines(s) {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(if with_db { "freq_hz,re,im,power,power_db\n" } else { "freq_hz,re,im,power\n" });
    for ((f, a), p) in s.freq_hz().iter().zip(s.amplitude()).zip(s.power()) {
        let _ = write!(out, "{},{},{},{}", float(*f), float(a.re), float(a.im), float(*p));
        if with_db {
            let _ = write!(out, ",{}", float(db(*p)));
        }
        out.push('\n');
    }
    out
}

fn absorb_comment(line: &str, kind: &mut Option<SpectrumKind>, meta: &mut Metadata) -> CliResult<()> {
    let number = |v: &str| {
        v.trim().parse::<f64>().map_err(|_| CliError::Format(format!("comment {line:?}: bad number")))
    };
    if let Some(v) = line.strip_prefix("kind = ") {
        *kind = Some(SpectrumKind::parse(v.trim())?);
    } else if let Some(v) = line.strip_prefix("baseline = ") {
        meta.baseline = Some(number(v)?);
    } else if let Some((k, v)) = line.strip_prefix("param ").and_then(|r| r.split_once(" = ")) {
        meta.params.push((k.trim().to_string(), number(v)?));
    } else if let Some(w) = line.strip_prefix("warning ") {
        meta.warnings.push(w.to_string());
    } else {
        meta.comments.push(line.to_string());
    }
    Ok(())
}

/// Reads the CSV form. `kind` applies when the file does not name one.
/// Rows with empty `re`/`im` take sqrt(power) as a real amplitude.
pub fn spectrum_from_csv(text: &str, kind: Option<SpectrumKind>) -> CliResult<Spectrum> {
    let mut file_kind = None;
    let mut meta = Metadata::default();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(c) => absorb_comment(c.strip_prefix(' ').unwrap_or(c), &mut file_kind, &mut meta)?,
            None if line.trim().is_empty() => {}
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let kind = file_kind
        .or(kind)
        .ok_or_else(|| CliError::Format("spectrum kind not given in the file or on the command line".into()))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Format(format!("csv header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(fi), Some(pi)) = (col("freq_hz"), col("power")) else {
        return Err(CliError::Format(format!("csv header {:?} lacks freq_hz or power", headers.iter().collect::<Vec<_>>())));
    };
    let (ri, ii) = (col("re"), col("im"));
    let (mut freq, mut amp, mut power) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Format(format!("csv: {e}")))?;
        let field = |i: usize| -> CliResult<Option<f64>> {
            match rec.get(i).map(str::trim) {
                None | Some("") => Ok(None),
                Some(v) => v.parse().map(Some).map_err(|_| {
                    CliError::Format(format!("csv data row {}: {:?} is not a number", row + 1, v))
                }),
            }
        };
        let missing = |name: &str| CliError::Format(format!("csv data row {}: missing {name}", row + 1));
        let f = field(fi)?.ok_or_else(|| missing("freq_hz"))?;
        let p = field(pi)?.ok_or_else(|| missing("power"))?;
        let re = ri.map(field).transpose()?.flatten();
        let im = ii.map(field).transpose()?.flatten();
        amp.push(match (re, im) {
            (None, None) => Complex64::new(p.sqrt(), 0.0),
            (re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
        });
        freq.push(f);
        power.push(p);
    }
    Ok(Spectrum::from_parts(kind, Grid::new(freq)?, amp, power, meta)?)
}

fn metadata_json(s: &Spectrum) -> Value {
    let m = &s.metadata;
    json!({
        "baseline": m.baseline,
        "params": m.params.iter().map(|(k, v)| json!({"name": k, "value": v})).collect::<Vec<_>>(),
        "warnings": m.warnings,
        "comments": m.comments,
    })
}

/// JSON mirror of the CSV columns plus a metadata block.
pub fn spectrum_to_json(s: &Spectrum, with_db: bool) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(s.kind.name()));
    obj.insert("freq_hz".into(), json!(s.freq_hz()));
    obj.insert("re".into(), json!(s.amplitude().iter().map(|a| a.re).collect::<Vec<_>>()));
    obj.insert("im".into(), json!(s.amplitude().iter().map(|a| a.im).collect::<Vec<_>>()));
    obj.insert("power".into(), json!(s.power()));
    if with_db {
        obj.insert("power_db".into(), json!(s.power().iter().map(|p| db(*p)).collect::<Vec<_>>()));
    }
    obj.insert("metadata".into(), metadata_json(s));
    Value::Object(obj)
}

pub fn spectrum_from_json(v: &Value) -> CliResult<Spectrum> {
    let bad = |what: &str| CliError::Format(format!("spectrum json: {what}"));
    let column = |name: &str| -> CliResult<Vec<f64>> {
        v.get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| bad(&format!("missing array {name}")))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| bad(&format!("non-numeric entry in {name}"))))
            .collect()
    };
    let kind = SpectrumKind::parse(v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing kind"))?)?;
    let (freq, re, im, power) = (column("freq_hz")?, column("re")?, column("im")?, column("power")?);
    if re.len() != freq.len() || im.len() != freq.len() {
        return Err(bad("column lengths differ"));
    }
    let mut meta = Metadata::default();
    if let Some(m) = v.get("metadata") {
        meta.baseline = m.get("baseline").and_then(Value::as_f64);
        for p in m.get("params").and_then(Value::as_array).into_iter().flatten() {
            let name = p.get("name").and_then(Value::as_str).ok_or_else(|| bad("param without name"))?;
            let value = p.get("value").and_then(Value::as_f64).ok_or_else(|| bad("param without value"))?;
            meta.params.push((name.to_string(), value));
        }
        let strings = |key: &str| -> Vec<String> {
            m.get(key)
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
                .unwrap_or_default()
        };
        meta.warnings = strings("warnings");
        meta.comments = strings("comments");
    }
    let amp = re.iter().zip(&im).map(|(r, i)| Complex64::new(*r, *i)).collect();
    Ok(Spectrum::from_parts(kind, Grid::new(freq)?, amp, power, meta)?)
}

/// A value in a flat report.
#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Number(f64),
    Integer(i64),
    Flag(bool),
    Text(String),
    List(Vec<String>),
}

/// Ordered key-value report, rendered as `key = value` lines or JSON.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, Entry)>,
}

impl Report {
    pub fn number(&mut self, key: &str, v: f64) -> &mut Self {
        self.entries.push((key.into(), Entry::Number(v)));
        self
    }

    pub fn integer(&mut self, key: &str, v: i64) -> &mut Self {
        self.entries.push((key.into(), Entry::Integer(v)));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.entries.push((key.into(), Entry::Flag(v)));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.entries.push((key.into(), Entry::Text(v.into())));
        self
    }

    pub fn list(&mut self, key: &str, v: Vec<String>) -> &mut Self {
        self.entries.push((key.into(), Entry::List(v)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    pub fn to_text(&self) -> String {
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, e) in &self.entries {
            let v = match e {
                Entry::Number(x) => float(*x),
                Entry::Integer(x) => x.to_string(),
                Entry::Flag(x) => x.to_string(),
                Entry::Text(x) => x.clone(),
                Entry::List(x) => x.join(", "),
            };
            let _ = writeln!(out, "{k:<width$} = {v}");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        for (k, e) in &self.entries {
            let v = match e {
                Entry::Number(x) => json!(x),
                Entry::Integer(x) => json!(x),
                Entry::Flag(x) => json!(x),
                Entry::Text(x) => json!(x),
                Entry::List(x) => json!(x),
            };
            obj.insert(k.clone(), v);
        }
        Value::Object(obj)
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Spectrum {
        let grid = Grid::linspace(11.30e9, 11.45e9, 7).unwrap();
        let amp = (0..7).map(|i| Complex64::new(0.1 * i as f64 + 1e-9, -1.0 / 3.0 * i as f64)).collect();
        let mut meta = Metadata::default();
        meta.baseline = Some(0.12345678901234568);
        meta.set_param("gamma_hz", 5e5);
        meta.set_param("g_em_hz", 347.0);
        meta.warnings.push("grid span is small".into());
        meta.comments.push("measured 2024-05-01".into());
        Spectrum::new(SpectrumKind::Omit, grid, amp, meta).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample();
        let text = spectrum_to_csv(&s, false);
        assert!(text.lines().any(|l| l == "freq_hz,re,im,power"));
        assert_eq!(spectrum_from_csv(&text, None).unwrap(), s);
        let with_db = spectrum_to_csv(&s, true);
        assert_eq!(spectrum_from_csv(&with_db, None).unwrap(), s);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = sample();
        let v: Value = serde_json::from_str(&json_text(&spectrum_to_json(&s, true))).unwrap();
        assert_eq!(spectrum_from_json(&v).unwrap(), s);
    }

    #[test]
    fn power_only_csv() {
        let text = "freq_hz,power\n1.0,4.0\n2.0,9.0\n";
        assert!(spectrum_from_csv(text, None).is_err());
        let s = spectrum_from_csv(text, Some(SpectrumKind::Moc)).unwrap();
        assert_eq!(s.amplitude()[1], Complex64::new(3.0, 0.0));
        assert!(spectrum_from_csv("freq_hz,power\n2.0,1.0\n1.0,1.0\n", Some(SpectrumKind::Moc)).is_err());
    }

    #[test]
    fn grid_flag() {
        let g = parse_grid("11.30e9:11.45e9:4001").unwrap();
        assert_eq!(g.len(), 4001);
        assert_eq!(g.hz()[4000], 11.45e9);
        for bad in ["1:2", "2:1:10", "1:2:1", "a:2:3", "1:2:3.5"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn report_renders_in_order() {
        let mut r = Report::default();
        r.number("c_om", 1.48).text("material", "quartz_xcut").integer("index", 1989);
        assert_eq!(r.to_text(), "c_om     = 1.48\nmaterial = quartz_xcut\nindex    = 1989\n");
        let keys: Vec<String> = r.to_json().as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["c_om", "material", "index"]);
    }
}
