//! Dense complex/real linear algebra for finite-dimensional multipartite states.
//!
//! Composite Hilbert-space indices follow the Kronecker convention: party 0 is
//! the most significant digit, the last party varies fastest.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

/// Max-abs tolerance on `rho - rho^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `|tr(rho) - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on state-vector and Bloch-vector norms.
pub const NORM_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as nonnegative.
pub const PSD_TOL: f64 = 1e-9;

pub(crate) fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Splits a composite index into per-party digits (last party fastest).
pub(crate) fn split_index(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

pub(crate) fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&digit, &d)| acc * d + digit)
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one party is required".into(),
        ));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "party dimensions must be >= 2, got {d}"
        )));
    }
    Ok(())
}

/// Standard Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_real(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `(m + m^dagger) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Applies `f` to the spectrum of the Hermitian part of `m`.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let scaled = DMatrix::from_fn(values.len(), values.len(), |r, c| {
        vectors[(r, c)] * C64::new(f(values[c]), 0.0)
    });
    &scaled * vectors.adjoint()
}

/// `m^{-1/2}` for a positive-definite Hermitian matrix.
pub fn inv_sqrt_psd(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let min = min_eigenvalue(m);
    if min <= rank_tol {
        return Err(Error::Numerical(format!(
            "inverse square root of a singular matrix (min eigenvalue {min:.3e})"
        )));
    }
    Ok(hermitian_function(m, |x| 1.0 / x.sqrt()))
}

/// Trace distance `||a - b||_1 / 2` between Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Full singular spectrum in descending order, `min(rows, cols)` values.
pub fn singular_values(m: &RMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.max(0.0))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Complex Hermitian positive-semidefinite unit-trace matrix with a party profile.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMatrix,
}

impl DensityMatrix {
    /// Validates `data` against the Hermitian, unit-trace and PSD invariants.
    pub fn new(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        Self::validate(&dims, &data)?;
        Ok(Self { dims, data })
    }

    pub fn validate(dims: &[usize], data: &CMatrix) -> Result<()> {
        check_dims(dims)?;
        let total = product(dims);
        if data.nrows() != total || data.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} require a {total}x{total} matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let herm = max_abs(&(data - data.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = trace(data);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NotUnitTrace(tr.re));
        }
        let min = min_eigenvalue(data);
        if min < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(())
    }

    /// Hermitizes and renormalizes before validating; used after long chains
    /// of products where rounding has accumulated.
    pub fn from_unnormalized(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        let data = hermitize(&data);
        let tr = trace(&data).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::Numerical(format!("cannot normalize trace {tr}")));
        }
        Self::new(dims, data / C64::new(tr, 0.0))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let total = product(&dims);
        let data = CMatrix::identity(total, total) / C64::new(total as f64, 0.0);
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            data: kron(&self.data, &other.data),
        }
    }

    /// Convex combination `sum_i w_i rho_i`; weights are renormalized.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?
            .1;
        let total: f64 = terms.iter().map(|(w, _)| *w).sum();
        if terms.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidArgument(
                "mixture weights must be nonnegative".into(),
            ));
        }
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in terms {
            if rho.dims != first.dims {
                return Err(Error::DimensionMismatch(
                    "mixture terms have different party dimensions".into(),
                ));
            }
            acc += rho.data() * C64::new(*w / total, 0.0);
        }
        Self::from_unnormalized(first.dims.clone(), acc)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// Normalized pure state vector with a party profile.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        check_dims(&dims)?;
        if amplitudes.len() != product(&dims) {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} require {} amplitudes, got {}",
                product(&dims),
                amplitudes.len()
            )));
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Self::new(dims, amplitudes / C64::new(norm, 0.0))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            dims,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> DensityMatrix {
        let data = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            dims: self.dims.clone(),
            data: hermitize(&data),
        }
    }
}

/// Real 3-vector inside the closed unit ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        Ok(Self(r))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::ZERO, -C64::i(), C64::i(), C64::ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE])
}

/// `(1 + r . sigma) / 2`.
pub fn bloch_to_qubit(r: &BlochVector) -> DensityMatrix {
    let [x, y, z] = r.0;
    let half = C64::new(0.5, 0.0);
    let data = (CMatrix::identity(2, 2)
        + pauli_x() * C64::new(x, 0.0)
        + pauli_y() * C64::new(y, 0.0)
        + pauli_z() * C64::new(z, 0.0))
        * half;
    DensityMatrix {
        dims: vec![2],
        data,
    }
}

fn check_party_subset(n_parties: usize, parties: &[usize], what: &str) -> Result<Vec<usize>> {
    if parties.is_empty() {
        return Err(Error::InvalidArgument(format!("{what}: empty party set")));
    }
    let mut sorted = parties.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != parties.len() {
        return Err(Error::InvalidArgument(format!(
            "{what}: duplicate party in {parties:?}"
        )));
    }
    if let Some(&p) = sorted.iter().find(|&&p| p >= n_parties) {
        return Err(Error::InvalidArgument(format!(
            "{what}: party {p} out of range for {n_parties} parties"
        )));
    }
    Ok(sorted)
}

/// Per-index bookkeeping that splits composite indices into a kept group and
/// the rest.
struct GroupSplit {
    group_dims: Vec<usize>,
    rest_dims: Vec<usize>,
    group_index: Vec<usize>,
    rest_index: Vec<usize>,
}

impl GroupSplit {
    fn new(dims: &[usize], group: &[usize]) -> Self {
        let in_group: Vec<bool> = (0..dims.len()).map(|k| group.contains(&k)).collect();
        let group_dims: Vec<usize> = group.iter().map(|&k| dims[k]).collect();
        let rest_dims: Vec<usize> = (0..dims.len())
            .filter(|&k| !in_group[k])
            .map(|k| dims[k])
            .collect();
        let total = product(dims);
        let mut digits = vec![0; dims.len()];
        let mut group_index = Vec::with_capacity(total);
        let mut rest_index = Vec::with_capacity(total);
        let mut g = Vec::with_capacity(group.len());
        let mut r = Vec::with_capacity(dims.len());
        for i in 0..total {
            split_index(i, dims, &mut digits);
            g.clear();
            r.clear();
            g.extend(group.iter().map(|&k| digits[k]));
            r.extend((0..dims.len()).filter(|&k| !in_group[k]).map(|k| digits[k]));
            group_index.push(join_index(&g, &group_dims));
            rest_index.push(join_index(&r, &rest_dims));
        }
        Self {
            group_dims,
            rest_dims,
            group_index,
            rest_index,
        }
    }
}

/// Reduced state on `keep` (returned in ascending party order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = check_party_subset(rho.n_parties(), keep, "partial trace")?;
    let split = GroupSplit::new(rho.dims(), &keep);
    let d_keep = product(&split.group_dims);
    let mut out = CMatrix::zeros(d_keep, d_keep);
    let total = rho.dim();
    for i in 0..total {
        for j in 0..total {
            if split.rest_index[i] == split.rest_index[j] {
                out[(split.group_index[i], split.group_index[j])] += rho.data[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        dims: split.group_dims,
        data: out,
    })
}

/// Partial transpose over `parties`; the result is Hermitian and unit-trace
/// but not necessarily PSD, so a raw matrix is returned.
pub fn partial_transpose(rho: &DensityMatrix, parties: &[usize]) -> Result<CMatrix> {
    let parties = check_party_subset(rho.n_parties(), parties, "partial transpose")?;
    let dims = rho.dims();
    let total = rho.dim();
    let mut row = vec![0; dims.len()];
    let mut col = vec![0; dims.len()];
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            split_index(i, dims, &mut row);
            split_index(j, dims, &mut col);
            for &k in &parties {
                std::mem::swap(&mut row[k], &mut col[k]);
            }
            out[(join_index(&row, dims), join_index(&col, dims))] = rho.data[(i, j)];
        }
    }
    Ok(out)
}

/// Embeds an operator on the (ascending) party group into the full space,
/// i.e. `op ⊗ 1_rest` with the tensor factors placed at the group's positions.
pub fn embed_operator(dims: &[usize], group: &[usize], op: &CMatrix) -> Result<CMatrix> {
    let group = check_party_subset(dims.len(), group, "embed operator")?;
    let split = GroupSplit::new(dims, &group);
    let d_group = product(&split.group_dims);
    if op.nrows() != d_group || op.ncols() != d_group {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, party group {group:?} has dimension {d_group}",
            op.nrows(),
            op.ncols()
        )));
    }
    debug_assert!(split.rest_dims.iter().all(|&d| d >= 2));
    let total = product(dims);
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            if split.rest_index[i] == split.rest_index[j] {
                out[(i, j)] = op[(split.group_index[i], split.group_index[j])];
            }
        }
    }
    Ok(out)
}

/// `(op ⊗ 1) rho (op ⊗ 1)^dagger` without renormalization.
pub fn apply_local_congruence(
    rho: &CMatrix,
    dims: &[usize],
    group: &[usize],
    op: &CMatrix,
) -> Result<CMatrix> {
    let full = embed_operator(dims, group, op)?;
    Ok(&full * rho * full.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn phi_plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            vec![2, 2],
            DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]),
        )
        .unwrap()
        .projector()
    }

    #[test]
    fn kron_identity_and_projector() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let p = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        let expected =
            CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(0.0)]));
        assert_eq!(kron(&p, &p), expected);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let reduced = partial_trace(&phi_plus(), &[0]).unwrap();
        assert_eq!(reduced.dims(), &[2]);
        let expected = CMatrix::identity(2, 2) * c(0.5);
        assert!(max_abs(&(reduced.data() - expected)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_keeps_factor() {
        let a = bloch_to_qubit(&BlochVector::new([0.3, -0.2, 0.5]).unwrap());
        let b = bloch_to_qubit(&BlochVector::new([0.0, 0.6, -0.1]).unwrap());
        let ab = a.tensor(&b);
        assert!(max_abs(&(partial_trace(&ab, &[0]).unwrap().data() - a.data())) < 1e-15);
        assert!(max_abs(&(partial_trace(&ab, &[1]).unwrap().data() - b.data())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_subsets() {
        let rho = phi_plus();
        assert!(matches!(
            partial_trace(&rho, &[]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bloch_vectors_map_to_expected_qubits() {
        let mixed = bloch_to_qubit(&BlochVector::new([0.0; 3]).unwrap());
        assert!(max_abs(&(mixed.data() - CMatrix::identity(2, 2) * c(0.5))) < 1e-15);

        let up = bloch_to_qubit(&BlochVector::new([0.0, 0.0, 1.0]).unwrap());
        let expected = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        assert!(max_abs(&(up.data() - expected)) < 1e-15);

        let s = 1.0 / 3f64.sqrt();
        let sic1 = bloch_to_qubit(&BlochVector::new([s, -s, s]).unwrap());
        let r3 = 3f64.sqrt();
        let printed = CMatrix::from_row_slice(
            2,
            2,
            &[
                c((r3 + 1.0) / r3),
                C64::new(r3 / 3.0, r3 / 3.0),
                C64::new(r3 / 3.0, -r3 / 3.0),
                c((r3 - 1.0) / r3),
            ],
        ) * c(0.5);
        assert!(max_abs(&(sic1.data() - printed)) < 1e-15);

        assert!(BlochVector::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn singular_values_simple_cases() {
        assert_eq!(singular_values(&RMatrix::identity(4, 4)), vec![1.0; 4]);
        let sv = singular_values(&RMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -2.0])));
        assert!((sv[0] - 3.0).abs() < 1e-15 && (sv[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_broken_invariant() {
        let mut data = CMatrix::identity(2, 2) * c(0.45);
        assert!(matches!(
            DensityMatrix::new(vec![2], data.clone()),
            Err(Error::NotUnitTrace(_))
        ));
        data[(0, 1)] = c(0.3);
        data[(0, 0)] = c(0.5);
        data[(1, 1)] = c(0.5);
        assert!(matches!(
            DensityMatrix::new(vec![2], data.clone()),
            Err(Error::NotHermitian(_))
        ));
        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.2), c(-0.2)]));
        assert!(matches!(
            DensityMatrix::new(vec![2], neg),
            Err(Error::NotPositiveSemidefinite(_))
        ));
        assert!(matches!(
            DensityMatrix::new(vec![2, 2], CMatrix::identity(2, 2) * c(0.5)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let pt = partial_transpose(&phi_plus(), &[1]).unwrap();
        assert!((min_eigenvalue(&pt) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn embedded_operator_on_middle_party() {
        let dims = [2, 3, 2];
        let op = CMatrix::from_fn(3, 3, |r, c| C64::new((r * 3 + c) as f64, 0.0));
        let expected = kron(
            &kron(&CMatrix::identity(2, 2), &op),
            &CMatrix::identity(2, 2),
        );
        assert!(max_abs(&(embed_operator(&dims, &[1], &op).unwrap() - expected)) < 1e-15);
    }

    #[test]
    fn inverse_square_root_rejects_singular() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        assert!(inv_sqrt_psd(&m, 1e-8).is_err());
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(4.0), c(0.25)]));
        let r = inv_sqrt_psd(&m, 1e-8).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-14 && (r[(1, 1)].re - 2.0).abs() < 1e-14);
    }
}
