//! Verification reports and their json / csv / text encodings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::registry::CaseDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Skipped => "skipped",
        })
    }
}

/// Predicted or measured value: a number or a categorical verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Label(String),
    None,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Number(v) => write!(f, "{v}"),
            Quantity::Label(s) => f.write_str(s),
            Quantity::None => f.write_str("-"),
        }
    }
}

/// One checked claim. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub case_id: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub predicted: Quantity,
    pub measured: Quantity,
    pub tolerance: f64,
    pub std_error: Option<f64>,
    pub verdict: Verdict,
    pub seed: Option<u64>,
    pub runtime_seconds: f64,
    /// Statement of the checked identity.
    pub anchor: String,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn new(claim_id: &str, case: &CaseDescriptor) -> Self {
        let mut r = VerificationReport::bare(claim_id, &case.case_id.to_string());
        r.parameters.insert("n".into(), case.n.into());
        r
    }

    pub fn bare(claim_id: &str, case_id: &str) -> Self {
        VerificationReport {
            claim_id: claim_id.into(),
            case_id: case_id.into(),
            parameters: BTreeMap::new(),
            predicted: Quantity::None,
            measured: Quantity::None,
            tolerance: 0.0,
            std_error: None,
            verdict: Verdict::Inconclusive,
            seed: None,
            runtime_seconds: 0.0,
            anchor: String::new(),
            note: None,
        }
    }

    pub fn param<V: Serialize>(mut self, key: &str, value: V) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.into(), v);
        self
    }

    pub fn with_quantities(mut self, predicted: Quantity, measured: Quantity, tolerance: f64) -> Self {
        self.predicted = predicted;
        self.measured = measured;
        self.tolerance = tolerance;
        self
    }

    pub fn with_std_error(mut self, e: Option<f64>) -> Self {
        self.std_error = e.filter(|v| v.is_finite());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_anchor(mut self, anchor: &str) -> Self {
        self.anchor = anchor.into();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    /// Sets the verdict from `|measured / predicted - 1| <= tolerance`.
    pub fn judge_ratio(mut self) -> Self {
        self.verdict = match (&self.predicted, &self.measured) {
            (Quantity::Number(p), Quantity::Number(m)) if *p != 0.0 => {
                if (m / p - 1.0).abs() <= self.tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            (Quantity::Number(p), Quantity::Number(m)) => {
                if m.abs() <= self.tolerance && *p == 0.0 {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            _ => Verdict::Inconclusive,
        };
        self
    }

    /// Sets the verdict from equality of two labels; an inconclusive
    /// measurement stays inconclusive.
    pub fn judge_labels(mut self) -> Self {
        self.verdict = match (&self.predicted, &self.measured) {
            (_, Quantity::Label(m)) if m == "inconclusive" => Verdict::Inconclusive,
            (Quantity::Label(p), Quantity::Label(m)) if p == m => Verdict::Pass,
            (Quantity::Label(_), Quantity::Label(_)) => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };
        self
    }

    /// A failed computation, recorded rather than propagated.
    pub fn failure(claim_id: &str, case_id: &str, err: impl std::fmt::Display) -> Self {
        VerificationReport::bare(claim_id, case_id)
            .with_verdict(Verdict::Fail)
            .with_note(format!("error: {err}"))
    }

    pub fn skipped(claim_id: &str, case_id: &str, why: &str) -> Self {
        VerificationReport::bare(claim_id, case_id)
            .with_verdict(Verdict::Skipped)
            .with_note(why)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(crate::error::Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

/// Overall exit status: 0 if every non-skipped report passes, 1 on any
/// failure, 2 when the only problems are inconclusive reports.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        2
    } else {
        0
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub const CSV_HEADER: &str =
    "claim_id,case_id,parameters,predicted,measured,tolerance,std_error,verdict,seed,runtime_seconds,anchor,note";

pub fn emit_report(reports: &[VerificationReport], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(reports)? + "\n"),
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in reports {
                let row = [
                    csv_field(&r.claim_id),
                    csv_field(&r.case_id),
                    csv_field(&serde_json::to_string(&r.parameters)?),
                    csv_field(&r.predicted.to_string()),
                    csv_field(&r.measured.to_string()),
                    r.tolerance.to_string(),
                    opt(&r.std_error),
                    r.verdict.to_string(),
                    opt(&r.seed),
                    r.runtime_seconds.to_string(),
                    csv_field(&r.anchor),
                    csv_field(r.note.as_deref().unwrap_or("")),
                ];
                out.push_str(&row.join(","));
                out.push('\n');
            }
            Ok(out)
        }
        Format::Text => {
            let mut out = String::new();
            let w_claim = reports.iter().map(|r| r.claim_id.len()).max().unwrap_or(5).max(5);
            let w_case = reports.iter().map(|r| r.case_id.len()).max().unwrap_or(4).max(4);
            let _ = writeln!(
                out,
                "{:<w_claim$}  {:<w_case$}  {:<12}  {:>22}  {:>22}  {:>9}",
                "claim", "case", "verdict", "predicted", "measured", "tol"
            );
            for r in reports {
                let _ = writeln!(
                    out,
                    "{:<w_claim$}  {:<w_case$}  {:<12}  {:>22}  {:>22}  {:>9.2e}",
                    r.claim_id,
                    r.case_id,
                    r.verdict.to_string(),
                    r.predicted.to_string(),
                    r.measured.to_string(),
                    r.tolerance
                );
                if let Some(note) = &r.note {
                    let _ = writeln!(out, "    {note}");
                }
            }
            Ok(out)
        }
    }
}

pub fn parse_reports(json: &str) -> Result<Vec<VerificationReport>> {
    Ok(serde_json::from_str(json)?)
}

/// JSON with every `runtime_seconds` zeroed, for byte comparisons.
pub fn normalized_json(reports: &[VerificationReport]) -> Result<String> {
    let mut copy = reports.to_vec();
    copy.iter_mut().for_each(|r| r.runtime_seconds = 0.0);
    emit_report(&copy, Format::Json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::lookup_case;

    fn sample() -> Vec<VerificationReport> {
        let gl = lookup_case("gl_r", 2).unwrap();
        vec![
            VerificationReport::new("polar-open", &gl)
                .param("k", 2)
                .with_quantities(Quantity::Number(1.0), Quantity::Number(1.0000001), 1e-3)
                .with_std_error(Some(0.0))
                .with_seed(7)
                .with_anchor("polar formula")
                .judge_ratio(),
            VerificationReport::new("phi-l2-threshold", &gl)
                .param("t", -1.4)
                .with_quantities(
                    Quantity::Label("divergent".into()),
                    Quantity::Label("divergent".into()),
                    0.0,
                )
                .with_note("comma, \"quote\"")
                .judge_labels(),
        ]
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let s = emit_report(&r, Format::Json).unwrap();
        assert_eq!(parse_reports(&s).unwrap(), r);
        assert_eq!(emit_report(&[], Format::Json).unwrap().trim(), "[]");
        assert!(parse_reports(&emit_report(&[], Format::Json).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn field_order_fixed() {
        let s = emit_report(&sample(), Format::Json).unwrap();
        let a = s.find("\"claim_id\"").unwrap();
        let b = s.find("\"parameters\"").unwrap();
        let c = s.find("\"verdict\"").unwrap();
        let d = s.find("\"anchor\"").unwrap();
        assert!(a < b && b < c && c < d);
    }

    #[test]
    fn csv_rows() {
        let r = sample();
        let s = emit_report(&r, Format::Csv).unwrap();
        assert_eq!(s.lines().count(), r.len() + 1);
        assert_eq!(emit_report(&[], Format::Csv).unwrap().lines().count(), 1);
    }

    #[test]
    fn text_mentions_every_claim() {
        let s = emit_report(&sample(), Format::Text).unwrap();
        assert!(s.contains("polar-open") && s.contains("phi-l2-threshold"));
    }

    #[test]
    fn verdict_rules() {
        let r = sample();
        assert_eq!(r[0].verdict, Verdict::Pass);
        assert_eq!(r[1].verdict, Verdict::Pass);
        let bad = r[0]
            .clone()
            .with_quantities(Quantity::Number(1.0), Quantity::Number(1.1), 1e-3)
            .judge_ratio();
        assert_eq!(bad.verdict, Verdict::Fail);
        let inc = r[1]
            .clone()
            .with_quantities(
                Quantity::Label("finite".into()),
                Quantity::Label("inconclusive".into()),
                0.0,
            )
            .judge_labels();
        assert_eq!(inc.verdict, Verdict::Inconclusive);
        assert_eq!(exit_code(&r), 0);
        assert_eq!(exit_code(&[inc.clone()]), 2);
        assert_eq!(exit_code(&[inc, bad]), 1);
        assert_eq!(exit_code(&[VerificationReport::skipped("x", "y", "z")]), 0);
    }

    #[test]
    fn normalized_json_ignores_runtime() {
        let mut a = sample();
        let b = sample();
        a[0].runtime_seconds = 3.5;
        assert_ne!(emit_report(&a, Format::Json).unwrap(), emit_report(&b, Format::Json).unwrap());
        assert_eq!(normalized_json(&a).unwrap(), normalized_json(&b).unwrap());
    }
}
