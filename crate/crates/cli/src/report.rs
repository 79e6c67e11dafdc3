use entcert::correct::{ApproxReport, Certificate, RecoveryMethod};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::files::ChannelSpecFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Inputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<Measures>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoverySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomoSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
    /// Wall-clock milliseconds; only with `--timing`, so reports stay byte-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub skip_eof: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedValue {
    /// Upper bound in bits.
    pub value: f64,
    pub converged: bool,
    pub restarts_used: usize,
    pub ensemble_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub s_q: f64,
    pub s_q_out: f64,
    pub s_rq_out: f64,
    pub coherent_info: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eof: Option<OptimizedValue>,
    pub re_mutual_info: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub method: RecoveryMethod,
    pub fidelity: f64,
    pub petz_fidelity: f64,
    pub kraus: ChannelSpecFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomoSummary {
    pub dims: Vec<usize>,
    pub settings: usize,
    pub gram_rank: usize,
    pub reconstruction_error: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub coherent_info: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eof: Option<f64>,
    /// `S^Q − I`.
    pub epsilon: f64,
    pub bound: f64,
    pub fidelity: f64,
    /// `S^Q − E`, paired with `fidelity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_eof: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 7] = ["p", "I", "E", "eps", "bound", "F", "eps_E"];

impl SweepRow {
    pub fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        vec![
            self.p.to_string(),
            self.coherent_info.to_string(),
            opt(self.eof),
            self.epsilon.to_string(),
            self.bound.to_string(),
            self.fidelity.to_string(),
            opt(self.epsilon_eof),
        ]
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Sweeps become one row per grid point; other reports become
    /// `key<TAB>value` lines with dotted keys.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        if let Some(rows) = &self.sweep {
            out.push_str(&SWEEP_COLUMNS.join("\t"));
            out.push('\n');
            for row in rows {
                out.push_str(&row.cells().join("\t"));
                out.push('\n');
            }
            return out;
        }
        let value = serde_json::to_value(self).expect("report serializes");
        flatten("", &value, &mut out);
        out
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}\t{s}\n")),
        other => out.push_str(&format!("{prefix}\t{other}\n")),
    }
}
