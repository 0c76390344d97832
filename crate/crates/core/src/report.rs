//! Run reports and their JSON / CSV encodings.
//!
//! JSON: one top-level object with `schema_version`, `artifact_version`,
//! `generator`, `config`, `metrics`, optional `trials`, and `duration_ms`.
//!
//! CSV: header `kind,key,value`, then `meta` rows, `config` rows, one
//! `metric` row per metric and, when trials are emitted, one `trial` row per
//! trial whose value is `field=value` pairs joined by `;`. Numbers use the
//! same shortest round-trip formatting as the JSON output; absent values are
//! empty.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::experiment::ExperimentConfig;
use crate::stream::GENERATOR;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ordered flat metric block. `None` marks a metric with no value (for
/// example a conditional mean over zero accepted trials).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics(Vec<(String, Option<f64>)>);

impl Metrics {
    pub fn push(&mut self, name: &str, value: f64) {
        self.0.push((name.to_owned(), Some(value)));
    }

    pub fn push_owned(&mut self, name: String, value: f64) {
        self.0.push((name, Some(value)));
    }

    pub fn push_opt(&mut self, name: &str, value: Option<f64>) {
        self.0.push((name.to_owned(), value));
    }

    /// Value of `name`, if present and not absent.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == name).and_then(|(_, v)| *v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|(k, _)| k == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<f64>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for Metrics {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            // non-finite values have no JSON form
            map.serialize_entry(k, &v.filter(|x| x.is_finite()))?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub generator: &'static str,
    pub config: Value,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<Map<String, Value>>>,
    pub duration_ms: f64,
}

impl RunReport {
    pub fn new(
        config: &ExperimentConfig,
        metrics: Metrics,
        trials: Option<Vec<Map<String, Value>>>,
        duration_ms: f64,
    ) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION,
            generator: GENERATOR,
            config: serde_json::to_value(config).expect("config serializes"),
            metrics,
            trials,
            duration_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The metric block alone, as compact JSON. Identical configs give
    /// byte-identical output here; `duration_ms` is deliberately outside it.
    pub fn metrics_json(&self) -> String {
        serde_json::to_string(&self.metrics).expect("metrics serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,key,value\n");
        let mut row = |kind: &str, key: &str, value: &str| {
            out.push_str(&csv_field(kind));
            out.push(',');
            out.push_str(&csv_field(key));
            out.push(',');
            out.push_str(&csv_field(value));
            out.push('\n');
        };
        row("meta", "schema_version", &self.schema_version.to_string());
        row("meta", "artifact_version", self.artifact_version);
        row("meta", "generator", self.generator);
        if let Value::Object(cfg) = &self.config {
            for (k, v) in cfg {
                row("config", k, &scalar_text(v));
            }
        }
        for (k, v) in self.metrics.iter() {
            row("metric", k, &number_text(v));
        }
        if let Some(trials) = &self.trials {
            for (i, t) in trials.iter().enumerate() {
                let joined = t
                    .iter()
                    .map(|(k, v)| format!("{k}={}", scalar_text(v)))
                    .collect::<Vec<_>>()
                    .join(";");
                row("trial", &i.to_string(), &joined);
            }
        }
        row("meta", "duration_ms", &number_text(Some(self.duration_ms)));
        out
    }
}

/// Shortest round-trip text, shared with the JSON encoder.
pub fn number_text(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => serde_json::to_string(&x).expect("finite"),
        _ => String::new(),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{Experiment, ExperimentConfig};

    fn sample() -> RunReport {
        let mut m = Metrics::default();
        m.push("a", 0.1);
        m.push("tiny", 1e-20);
        m.push_opt("missing", None);
        RunReport::new(&ExperimentConfig::new(Experiment::Isotropy), m, None, 1.5)
    }

    #[test]
    fn json_keeps_metric_order_and_nulls() {
        let r = sample();
        assert_eq!(r.metrics_json(), r#"{"a":0.1,"tiny":1e-20,"missing":null}"#);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["experiment"], "isotropy");
    }

    #[test]
    fn csv_rows() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("kind,key,value"));
        assert!(csv.contains("metric,a,0.1\n"));
        assert!(csv.contains("metric,tiny,1e-20\n"));
        assert!(csv.contains("metric,missing,\n"));
        assert!(csv.contains("config,experiment,isotropy\n"));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("q\""), "\"q\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
