//! Small dense linear-algebra helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-9;

/// Singular values, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Spectral norm (largest singular value); zero for an empty matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Rank with singular values compared against `RANK_TOL * scale`.
///
/// Pass the norm of the operator that produced `m` as `scale` when columns of
/// `m` may legitimately be numerically zero (e.g. nulled streams); a scale
/// taken from `m` itself would promote rounding noise to full rank.
pub fn rank_with_scale(m: &DMatrix<f64>, scale: f64) -> usize {
    let threshold = RANK_TOL * scale;
    singular_values(m).into_iter().filter(|&s| s > threshold).count()
}

/// Rank relative to the matrix's own largest singular value.
pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_with_scale(m, spectral_norm(m))
}

/// Smallest singular value exceeds `RANK_TOL` times the largest.
pub fn is_full_rank(m: &DMatrix<f64>) -> bool {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) => hi > 0.0 && lo > RANK_TOL * hi,
        _ => true,
    }
}

/// Orthonormal basis of the kernel of `m`, `cols - rank` vectors.
pub fn null_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // Pad to at least square so the SVD returns a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.rows_mut(0, m.nrows()).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let threshold = RANK_TOL * hi;
    let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= threshold).collect();
    // order by column of smallest singular value first for determinism
    idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]).then(a.cmp(&b)));
    idx.into_iter().map(|i| v_t.row(i).transpose()).collect()
}

/// Orthonormal basis of the column space, using `scale` as in [`rank_with_scale`].
pub fn column_basis(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let threshold = RANK_TOL * scale;
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > threshold).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Horizontal concatenation of two matrices with equal row counts.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "hstack row mismatch");
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Matrix whose columns are the given vectors, with `rows` rows when empty.
pub fn columns(vectors: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(vectors)
}
