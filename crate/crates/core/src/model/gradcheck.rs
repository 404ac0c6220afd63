use rayon::prelude::*;

use super::batch::SequenceBatch;
use super::network::Model;
use crate::Result;

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor for the relative error. Below it the comparison is
/// effectively absolute (tolerance `1e-5 * REL_FLOOR`), which sits above the
/// roundoff of a central difference at `FD_STEP`.
pub const REL_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
    /// Parameters whose `±step` evaluations flip a ReLU, so the central
    /// difference straddles a kink. Excluded from the error maxima.
    pub at_kinks: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central finite differences against the analytic gradient for every
/// parameter of `model` on `batch`.
pub fn gradient_check(model: &Model, batch: &SequenceBatch, step: f64) -> Result<GradCheckReport> {
    let (_, analytic) = model.loss_and_grad(batch)?;
    let cache: Vec<Vec<Vec<f64>>> = (0..batch.len())
        .map(|b| model.hidden_sequences(batch.sequence(b)))
        .collect::<Result<_>>()?;
    let layout = &model.params.layout;
    let layers = layout.lstm.len();
    let (_, base_signs) = model.loss_from_cache(batch, &cache, layers);
    // First LSTM layer whose output depends on parameter `i`.
    let layer_of = |i: usize| {
        layout
            .lstm
            .iter()
            .position(|dirs| dirs.iter().any(|d| i >= d.w_input && i < d.bias + 4 * d.cells))
            .unwrap_or(layers)
    };

    let numeric: Vec<Option<f64>> = (0..analytic.len())
        .into_par_iter()
        .map_init(
            || model.clone(),
            |m, i| {
                let from = layer_of(i);
                let orig = m.params.values[i];
                m.params.values[i] = orig + step;
                let (up, s_up) = m.loss_from_cache(batch, &cache, from);
                m.params.values[i] = orig - step;
                let (down, s_down) = m.loss_from_cache(batch, &cache, from);
                m.params.values[i] = orig;
                (s_up == base_signs && s_down == base_signs).then(|| (up - down) / (2.0 * step))
            },
        )
        .collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
        at_kinks: 0,
    };
    for (i, (&a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let Some(n) = *n else {
            report.at_kinks += 1;
            continue;
        };
        report.checked += 1;
        report.max_abs_error = report.max_abs_error.max((a - n).abs());
        let e = relative_error(a, n);
        if e > report.max_rel_error || report.checked == 1 {
            report.max_rel_error = e;
            report.worst_index = i;
            report.analytic = a;
            report.numeric = n;
        }
    }
    report.worst_param = model.params.name_of(report.worst_index).to_string();
    Ok(report)
}
