//! Experiment reports: every reference value carries a provenance string
//! (the mathematical source of the number or the name of the oracle that
//! computed it); serialization rejects reports with unreferenced values.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    /// Reference value when the statistic has one.
    pub reference: Option<f64>,
    /// Acceptance tolerance (absolute) when asserted.
    pub tolerance: Option<f64>,
    /// Where the reference comes from; never empty.
    pub provenance: String,
    /// Pass/fail when asserted against the tolerance.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub inputs: Vec<(String, String)>,
    pub measurements: Vec<Measurement>,
    pub wall_seconds: f64,
}

impl Report {
    pub fn new(experiment: &str) -> Report {
        Report {
            experiment: experiment.to_string(),
            inputs: Vec::new(),
            measurements: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub fn echo_input(&mut self, key: &str, value: impl std::fmt::Display) {
        self.inputs.push((key.to_string(), value.to_string()));
    }

    /// Records a plain observation with its provenance.
    pub fn observe(&mut self, name: &str, value: f64, provenance: &str) {
        assert!(!provenance.is_empty(), "unreferenced value in report");
        self.measurements.push(Measurement {
            name: name.to_string(),
            value,
            reference: None,
            tolerance: None,
            provenance: provenance.to_string(),
            pass: None,
        });
    }

    /// Records a criterion: |value - reference| <= tolerance.
    pub fn assert_close(
        &mut self,
        name: &str,
        value: f64,
        reference: f64,
        tolerance: f64,
        provenance: &str,
    ) -> bool {
        assert!(!provenance.is_empty(), "unreferenced value in report");
        let pass = (value - reference).abs() <= tolerance;
        self.measurements.push(Measurement {
            name: name.to_string(),
            value,
            reference: Some(reference),
            tolerance: Some(tolerance),
            provenance: provenance.to_string(),
            pass: Some(pass),
        });
        pass
    }

    /// Records a boolean criterion (value 1.0 = holds).
    pub fn assert_true(&mut self, name: &str, ok: bool, provenance: &str) -> bool {
        assert!(!provenance.is_empty(), "unreferenced value in report");
        self.measurements.push(Measurement {
            name: name.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            reference: Some(1.0),
            tolerance: Some(0.0),
            provenance: provenance.to_string(),
            pass: Some(ok),
        });
        ok
    }

    /// Records an upper-bound criterion: value <= bound.
    pub fn assert_at_most(&mut self, name: &str, value: f64, bound: f64, provenance: &str) -> bool {
        assert!(!provenance.is_empty(), "unreferenced value in report");
        let pass = value <= bound;
        self.measurements.push(Measurement {
            name: name.to_string(),
            value,
            reference: Some(bound),
            tolerance: Some(0.0),
            provenance: provenance.to_string(),
            pass: Some(pass),
        });
        pass
    }

    pub fn all_passed(&self) -> bool {
        self.measurements.iter().all(|m| m.pass.unwrap_or(true))
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.measurements
            .iter()
            .filter(|m| m.pass == Some(false))
            .map(|m| m.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        // schema check: no empty provenance can arise through the typed
        // constructors, but re-validate before emitting
        for m in &self.measurements {
            assert!(!m.provenance.is_empty(), "unreferenced value in report");
        }
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Minimal CSV writer: numeric tables with a header row, `\n` line
/// endings, deterministic float formatting.
pub struct Csv {
    buf: String,
    cols: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv { buf: header.join(",") + "\n", cols: header.len() }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.cols, "csv row width mismatch");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn row_display(&mut self, fields: &[&dyn std::fmt::Display]) {
        let v: Vec<String> = fields.iter().map(|f| f.to_string()).collect();
        self.row(&v);
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Deterministic float formatting for CSV output.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{:.12e}", x)
    }
}
