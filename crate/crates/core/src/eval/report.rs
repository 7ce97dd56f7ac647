use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::classify::ClassifierConfig;
use crate::error::{Result, StemError};
use crate::miner::MinSupport;

/// Process CPU seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub symbolize: f64,
    pub mine: f64,
    pub featurize: f64,
    pub classify: f64,
    pub total: f64,
}

impl Timings {
    pub fn stage_sum(&self) -> f64 {
        self.symbolize + self.mine + self.featurize + self.classify
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub delta: f64,
    pub min_support: Option<MinSupport>,
    pub resolved_min_support: Option<u32>,
    pub max_len: Option<usize>,
    pub gain_gamma: Option<f64>,
    pub classifier: ClassifierConfig,
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
    pub resubstitution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    /// Row/column order of `confusion`.
    pub labels: Vec<String>,
    pub accuracy: f64,
    /// Recall per true label, for labels present in the test set.
    pub per_class_accuracy: BTreeMap<String, f64>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub config: ConfigEcho,
    pub timings: Timings,
}

impl EvalReport {
    /// Builds accuracy figures from parallel slices of true and predicted labels.
    #[allow(clippy::too_many_arguments)]
    pub fn from_predictions(
        method: impl Into<String>,
        labels: &[String],
        truth: &[String],
        predicted: &[String],
        n_train: usize,
        n_features: usize,
        config: ConfigEcho,
        timings: Timings,
    ) -> Result<Self> {
        assert_eq!(truth.len(), predicted.len());
        let position: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let index = |l: &str| {
            position
                .get(l)
                .copied()
                .ok_or_else(|| StemError::DegenerateTask(format!("label `{l}` missing from label set")))
        };
        let mut confusion = vec![vec![0u64; labels.len()]; labels.len()];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[index(t)?][index(p)?] += 1;
        }
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..labels.len()).map(|i| confusion[i][i]).sum();
        let accuracy = if total == 0 { 0.0 } else { trace as f64 / total as f64 };
        let per_class_accuracy = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                let row: u64 = confusion[i].iter().sum();
                (row > 0).then(|| (l.clone(), confusion[i][i] as f64 / row as f64))
            })
            .collect();
        Ok(Self {
            method: method.into(),
            labels: labels.to_vec(),
            accuracy,
            per_class_accuracy,
            confusion,
            n_train,
            n_test: truth.len(),
            n_features,
            config,
            timings,
        })
    }
}

fn find_report<'a>(d: &'a DatasetReport, method: &str) -> Option<&'a EvalReport> {
    d.reports.iter().find(|r| r.method == method)
}

/// All methods evaluated on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub reports: Vec<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub datasets: Vec<DatasetReport>,
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Two text tables, accuracy then CPU seconds: one row per method, one
    /// column per dataset.
    pub fn render_tables(&self) -> String {
        let mut methods: Vec<&str> = Vec::new();
        for d in &self.datasets {
            for r in &d.reports {
                if !methods.contains(&r.method.as_str()) {
                    methods.push(&r.method);
                }
            }
        }

        let mut out = String::new();
        let accuracy: Vec<Vec<String>> = methods
            .iter()
            .map(|m| {
                self.datasets
                    .iter()
                    .map(|d| find_report(d, m).map_or("-".into(), |r| format!("{:.4}", r.accuracy)))
                    .collect()
            })
            .collect();
        self.table(&mut out, "Average accuracy", &methods, &accuracy);
        out.push('\n');
        let cpu: Vec<Vec<String>> = methods
            .iter()
            .map(|m| {
                self.datasets
                    .iter()
                    .map(|d| find_report(d, m).map_or("-".into(), |r| format!("{:.4}", r.timings.total)))
                    .collect()
            })
            .collect();
        self.table(&mut out, "CPU time (seconds)", &methods, &cpu);
        out
    }

    fn table(&self, out: &mut String, title: &str, methods: &[&str], cells: &[Vec<String>]) {
        let first = methods
            .iter()
            .map(|m| m.len())
            .chain(["Model".len()])
            .max()
            .unwrap_or(5);
        let widths: Vec<usize> = self
            .datasets
            .iter()
            .enumerate()
            .map(|(j, d)| {
                cells
                    .iter()
                    .map(|row| row[j].len())
                    .chain([d.dataset.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<first$}", "Model");
        for (d, w) in self.datasets.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", d.dataset, w = w);
        }
        out.push('\n');
        for (m, row) in methods.iter().zip(cells) {
            let _ = write!(out, "{m:<first$}");
            for (c, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}", w = w);
            }
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo() -> ConfigEcho {
        ConfigEcho {
            delta: 0.05,
            min_support: None,
            resolved_min_support: None,
            max_len: None,
            gain_gamma: None,
            classifier: ClassifierConfig::default(),
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
            resubstitution: false,
        }
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn accuracy_is_confusion_trace() {
        let labels = s(&["a", "b", "c"]);
        let r = EvalReport::from_predictions(
            "m",
            &labels,
            &s(&["a", "a", "b", "b", "c"]),
            &s(&["a", "b", "b", "b", "a"]),
            10,
            3,
            echo(),
            Timings::default(),
        )
        .unwrap();
        assert_eq!(r.confusion, vec![vec![1, 1, 0], vec![0, 2, 0], vec![1, 0, 0]]);
        assert_eq!(r.accuracy, 3.0 / 5.0);
        assert_eq!(r.per_class_accuracy["a"], 0.5);
        assert_eq!(r.per_class_accuracy["c"], 0.0);
        assert_eq!(r.n_test, 5);
    }

    #[test]
    fn tables_have_one_row_per_method() {
        let labels = s(&["a"]);
        let mk = |m: &str, acc_hits: usize| {
            let truth = s(&["a", "a"]);
            let mut pred = s(&["a", "a"]);
            pred.truncate(acc_hits);
            while pred.len() < 2 {
                pred.push("a".into());
            }
            EvalReport::from_predictions(m, &labels, &truth, &pred, 1, 1, echo(), Timings::default()).unwrap()
        };
        let file = ReportFile {
            datasets: vec![DatasetReport {
                dataset: "toy".into(),
                reports: vec![mk("STEM", 2), mk("1-gram histogram", 2)],
            }],
        };
        let text = file.render_tables();
        assert!(text.starts_with("Average accuracy\n"));
        assert!(text.contains("CPU time (seconds)"));
        assert_eq!(text.matches("1-gram histogram").count(), 2);
        assert_eq!(ReportFile::from_json(&file.to_json().unwrap()).unwrap(), file);
    }
}
