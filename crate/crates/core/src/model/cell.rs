/// Borrowed weights of one LSTM direction.
///
/// `w_input` is `4H x I`, `w_recurrent` is `4H x H`, `bias` has `4H`
/// entries, all row-major with gate blocks ordered i, f, g, o.
#[derive(Debug, Clone, Copy)]
pub struct CellParams<'a> {
    pub w_input: &'a [f64],
    pub w_recurrent: &'a [f64],
    pub bias: &'a [f64],
    pub inputs: usize,
    pub cells: usize,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Computes post-activation gates `[i, f, g, o]` (length `4H`), then the new
/// cell and hidden state in place of `c` and `h`.
pub(crate) fn step_into(p: &CellParams, x: &[f64], h_prev: &[f64], c_prev: &[f64], gates: &mut [f64], h: &mut [f64], c: &mut [f64]) {
    let (n, inp) = (p.cells, p.inputs);
    for r in 0..4 * n {
        let wi = &p.w_input[r * inp..(r + 1) * inp];
        let wr = &p.w_recurrent[r * n..(r + 1) * n];
        let mut a = p.bias[r];
        for (w, v) in wi.iter().zip(x) {
            a += w * v;
        }
        for (w, v) in wr.iter().zip(h_prev) {
            a += w * v;
        }
        gates[r] = if (2 * n..3 * n).contains(&r) { a.tanh() } else { sigmoid(a) };
    }
    for j in 0..n {
        let (i, f, g, o) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
}

/// One LSTM step: returns `(h, c)`.
pub fn lstm_cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], params: &CellParams) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(x.len(), params.inputs, "input width");
    assert_eq!(h_prev.len(), params.cells, "hidden width");
    assert_eq!(c_prev.len(), params.cells, "cell width");
    let n = params.cells;
    let mut gates = vec![0.0; 4 * n];
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    step_into(params, x, h_prev, c_prev, &mut gates, &mut h, &mut c);
    (h, c)
}
