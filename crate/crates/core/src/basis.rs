//! Orthonormal Hermitian operator bases with the identity listed first.

use crate::error::{Error, Result};
use crate::linalg::{product, split_index, trace, CMatrix, DensityMatrix, C64};
use crate::tensor::RealTensor;

/// Largest imaginary part tolerated in an expectation value before it is dropped.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

/// `d^2` Hermitian `d x d` matrices, orthonormal in the Hilbert-Schmidt inner
/// product, with `ops[0] = 1/sqrt(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl OperatorBasis {
    /// Wraps a user-built list after checking orthonormality, Hermiticity and
    /// the identity-first convention.
    pub fn new(dim: usize, ops: Vec<CMatrix>) -> Result<Self> {
        if ops.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "a basis for d = {dim} needs {} operators, got {}",
                dim * dim,
                ops.len()
            )));
        }
        let basis = Self { dim, ops };
        let tol = 1e-10;
        let gram = basis.gram();
        for r in 0..gram.nrows() {
            for c in 0..gram.ncols() {
                let expected = if r == c { 1.0 } else { 0.0 };
                if (gram[(r, c)] - C64::new(expected, 0.0)).norm() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "basis is not orthonormal at ({r}, {c})"
                    )));
                }
            }
        }
        let identity = CMatrix::identity(dim, dim) / C64::new((dim as f64).sqrt(), 0.0);
        if crate::linalg::max_abs(&(&basis.ops[0] - identity)) > tol {
            return Err(Error::InvalidArgument(
                "first basis element must be 1/sqrt(d)".into(),
            ));
        }
        if basis
            .ops
            .iter()
            .any(|op| crate::linalg::max_abs(&(op - op.adjoint())) > tol)
        {
            return Err(Error::InvalidArgument(
                "basis elements must be Hermitian".into(),
            ));
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `G[i, j] = tr(ops[i] ops[j])`.
    pub fn gram(&self) -> CMatrix {
        let n = self.ops.len();
        CMatrix::from_fn(n, n, |i, j| trace(&(&self.ops[i] * &self.ops[j])))
    }

    /// Expansion coefficients `tr(rho_local ops[i])` of a single-party operator.
    pub fn expectations(&self, m: &CMatrix) -> Vec<f64> {
        self.ops.iter().map(|op| trace(&(m * op)).re).collect()
    }
}

/// Identity first, then symmetric generators for pairs `j < k` ascending, then
/// antisymmetric generators in the same order, then diagonal generators; every
/// element has unit Hilbert-Schmidt norm. For `d = 2` this is
/// `{1, X, Y, Z} / sqrt(2)`.
pub fn normalized_generalized_gell_mann(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "operator bases need d >= 2, got {d}"
        )));
    }
    let unit = |r: usize, c: usize, z: C64| {
        let mut m = CMatrix::zeros(d, d);
        m[(r, c)] = z;
        m
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut ops = Vec::with_capacity(d * d);
    ops.push(CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0));
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        ops.push(unit(j, k, C64::new(s, 0.0)) + unit(k, j, C64::new(s, 0.0)));
    }
    for &(j, k) in &pairs {
        ops.push(unit(j, k, C64::new(0.0, -s)) + unit(k, j, C64::new(0.0, s)));
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        ops.push(m);
    }
    Ok(OperatorBasis { dim: d, ops })
}

/// Contracts axis `mode` of a dense complex tensor with `g` (`rows x shape[mode]`).
fn mode_product(
    data: &[C64],
    shape: &[usize],
    mode: usize,
    g: &[Vec<C64>],
) -> (Vec<C64>, Vec<usize>) {
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    let n_in = shape[mode];
    let n_out = g.len();
    let mut out = vec![C64::ZERO; outer * n_out * inner];
    for o in 0..outer {
        for (r, g_row) in g.iter().enumerate() {
            let dst = &mut out[(o * n_out + r) * inner..(o * n_out + r + 1) * inner];
            for (c, &weight) in g_row.iter().enumerate() {
                if weight == C64::ZERO {
                    continue;
                }
                let src = &data[(o * n_in + c) * inner..(o * n_in + c + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += weight * s;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[mode] = n_out;
    (out, new_shape)
}

/// Correlation tensor entries `tr(rho · ⊗_k bases[k].ops[i_k])`.
///
/// The density matrix is realigned so that party `k` owns a single axis of
/// length `d_k^2` indexed by `(row, col)` pairs, then each axis is contracted
/// against the transposed basis elements.
pub fn basis_expectations(rho: &DensityMatrix, bases: &[OperatorBasis]) -> Result<RealTensor> {
    let dims = rho.dims();
    if bases.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} bases supplied for {} parties",
            bases.len(),
            dims.len()
        )));
    }
    for (k, (basis, &d)) in bases.iter().zip(dims).enumerate() {
        if basis.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "basis for party {k} has dimension {}, party has {d}",
                basis.dim()
            )));
        }
    }
    let n = dims.len();
    let total = product(dims);
    let shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let mut realigned = vec![C64::ZERO; total * total];
    let mut row = vec![0; n];
    let mut col = vec![0; n];
    let data = rho.data();
    for i in 0..total {
        split_index(i, dims, &mut row);
        for j in 0..total {
            split_index(j, dims, &mut col);
            let at = (0..n).fold(0, |acc, k| acc * shape[k] + row[k] * dims[k] + col[k]);
            realigned[at] = data[(i, j)];
        }
    }
    let mut current = realigned;
    let mut current_shape = shape.clone();
    for (k, basis) in bases.iter().enumerate() {
        let d = dims[k];
        let g: Vec<Vec<C64>> = basis
            .ops()
            .iter()
            .map(|op| (0..d * d).map(|pair| op[(pair % d, pair / d)]).collect())
            .collect();
        let (next, next_shape) = mode_product(&current, &current_shape, k, &g);
        current = next;
        current_shape = next_shape;
    }
    let residue = current.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
    if residue > IMAGINARY_RESIDUE_TOL {
        return Err(Error::Numerical(format!(
            "correlation entries have imaginary residue {residue:.3e}"
        )));
    }
    RealTensor::new(current_shape, current.into_iter().map(|z| z.re).collect())
}
