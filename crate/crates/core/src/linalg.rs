pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `out = Mᵀ v` for a row-major `rows × cols` matrix.
pub(crate) fn mat_t_vec(m: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    out[..cols].fill(0.0);
    for (i, &vi) in v.iter().enumerate().take(rows) {
        if vi == 0.0 {
            continue;
        }
        axpy(&mut out[..cols], vi, &m[i * cols..(i + 1) * cols]);
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
