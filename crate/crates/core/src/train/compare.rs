use std::path::Path;

use super::attributes::AttributeTable;
use super::plan::ExperimentPlan;
use super::stage::{run_stage, MetricsTable};
use crate::sketch::Drawing;
use crate::{Error, Result};

/// Test-loss curves of several plans that share one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// One label per plan; duplicates get a `#k` suffix.
    pub labels: Vec<String>,
    /// `test_loss[epoch][plan]`.
    pub test_loss: Vec<Vec<f64>>,
    pub metrics: Vec<MetricsTable>,
}

impl ComparisonReport {
    /// One column per plan, one row per epoch.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.labels)?;
        for row in &self.test_loss {
            w.write_record(row.iter().map(f64::to_string))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    /// `(label, final test loss)` from best to worst.
    pub fn ranking(&self) -> Vec<(String, f64)> {
        let Some(last) = self.test_loss.last() else {
            return Vec::new();
        };
        let mut r: Vec<(String, f64)> = self.labels.iter().cloned().zip(last.iter().copied()).collect();
        r.sort_by(|a, b| a.1.total_cmp(&b.1));
        r
    }
}

/// Runs every plan on the same drawings and collects per-epoch test loss.
///
/// Plans may differ only in format, ordering and configuration.
pub fn compare_matrix(plans: &[ExperimentPlan], drawings: &[Drawing], table: &AttributeTable) -> Result<ComparisonReport> {
    let Some(first) = plans.first() else {
        return Err(Error::InvalidConfig("no plans to compare".into()));
    };
    for p in &plans[1..] {
        if p.protocol_key() != first.protocol_key() {
            return Err(Error::PlansDiffer(format!(
                "{:?} has {} but {:?} has {}",
                first.name,
                first.protocol_key(),
                p.name,
                p.protocol_key()
            )));
        }
    }
    if first.split.test == 0.0 {
        return Err(Error::InvalidConfig("comparison needs a non-empty test split".into()));
    }

    let mut labels: Vec<String> = Vec::with_capacity(plans.len());
    for p in plans {
        let base = p.label();
        let dupes = labels.iter().filter(|l| **l == base || l.starts_with(&format!("{base}#"))).count();
        labels.push(if dupes == 0 { base } else { format!("{base}#{}", dupes + 1) });
    }

    let metrics = plans
        .iter()
        .map(|p| run_stage(p, drawings, table).map(|o| o.metrics))
        .collect::<Result<Vec<_>>>()?;
    let test_loss = (0..first.epochs)
        .map(|e| {
            metrics
                .iter()
                .map(|m| m.split_rows("test").nth(e).map_or(f64::NAN, |r| r.loss))
                .collect()
        })
        .collect();
    Ok(ComparisonReport {
        labels,
        test_loss,
        metrics,
    })
}
