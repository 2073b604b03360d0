use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{family_total, ErrorTable};
use crate::interp::ErrorClass;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
    /// Loaded from an existing artifact instead of recomputed.
    pub resumed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionSummary {
    pub model: String,
    pub test_accuracy: f64,
    pub test_units: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvasionSummary {
    pub method: String,
    /// Evasion rate of the search outputs under each attributor.
    pub rate: BTreeMap<String, f64>,
    pub samples: usize,
    pub mean_sequence_len: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuralSummary {
    pub transformation_success_rate: f64,
    pub samples: usize,
    pub error_table: ErrorTable,
    pub evasion_success_rate: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Over the search outputs of every evasion method.
    pub transformation_success_rate: f64,
    pub transformation_samples: usize,
    pub error_table: ErrorTable,
    pub attribution: Vec<AttributionSummary>,
    pub evasion: Vec<EvasionSummary>,
    pub pairs: Option<usize>,
    pub neural: Option<NeuralSummary>,
    pub timing: Vec<StageTiming>,
    pub config: ExperimentConfig,
}

impl MetricsReport {
    /// Everything except wall-clock timing.
    pub fn without_timing(&self) -> MetricsReport {
        MetricsReport { timing: Vec::new(), ..self.clone() }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let pct = |x: f64| format!("{:.2}%", 100.0 * x);
        let _ = writeln!(s, "Attribution accuracy");
        for a in &self.attribution {
            let _ = writeln!(s, "  {:<12} {:>8}  ({} test units)", a.model, pct(a.test_accuracy), a.test_units);
        }
        let _ = writeln!(s, "\nTransformation success");
        let _ = writeln!(
            s,
            "  search outputs {:>8}  ({} samples)",
            pct(self.transformation_success_rate),
            self.transformation_samples
        );
        if let Some(n) = &self.neural {
            let _ = writeln!(s, "  neural outputs {:>8}  ({} samples)", pct(n.transformation_success_rate), n.samples);
        }
        let _ = writeln!(s, "\nEvasion success");
        for e in &self.evasion {
            for (model, rate) in &e.rate {
                let _ = writeln!(
                    s,
                    "  {:<8} vs {:<10} {:>8}  ({} samples, mean length {:.2})",
                    e.method,
                    model,
                    pct(*rate),
                    e.samples,
                    e.mean_sequence_len
                );
            }
        }
        if let Some(n) = &self.neural {
            for (model, rate) in &n.evasion_success_rate {
                let _ = writeln!(s, "  {:<8} vs {:<10} {:>8}  ({} samples)", "neural", model, pct(*rate), n.samples);
            }
        }
        let mut tables = vec![("search", &self.error_table)];
        if let Some(n) = &self.neural {
            tables.push(("neural", &n.error_table));
        }
        for (name, table) in tables {
            let _ = writeln!(s, "\nErrors ({name})");
            for family in ["syntax", "semantic"] {
                for class in ErrorClass::all().into_iter().filter(|c| c.family() == family) {
                    let _ = writeln!(
                        s,
                        "  {:<40} {:>5}",
                        class.to_string(),
                        table.get(&class.to_string()).copied().unwrap_or(0)
                    );
                }
                let _ = writeln!(s, "  {:<40} {:>5}", format!("{family} total"), family_total(table, family));
            }
        }
        if let Some(p) = self.pairs {
            let _ = writeln!(s, "\nPairs exported: {p}");
        }
        let _ = writeln!(s, "\nStage timing");
        for t in &self.timing {
            let _ = writeln!(s, "  {:<12} {:>10.3}s{}", t.stage, t.seconds, if t.resumed { "  (resumed)" } else { "" });
        }
        s
    }
}
