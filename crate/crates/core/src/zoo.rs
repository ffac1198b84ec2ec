//! Named states and seeded random state families.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    bloch_to_qubit, join_index, kron, product, split_index, BlochVector, CMatrix, DensityMatrix,
    PureState, C64,
};
use crate::tensor::Bipartition;

/// Tetrahedron vertices (times sqrt 3); the pairing with `bell` is fixed.
const SIC_VERTICES: [[f64; 3]; 4] = [
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [-1.0, -1.0, -1.0],
];

pub fn sic_bloch_vector(i: usize) -> Result<BlochVector> {
    if !(1..=4).contains(&i) {
        return Err(Error::InvalidArgument(format!(
            "SIC-POVM index must be in 1..=4, got {i}"
        )));
    }
    let s = 1.0 / 3f64.sqrt();
    let v = SIC_VERTICES[i - 1];
    BlochVector::new([v[0] * s, v[1] * s, v[2] * s])
}

/// `(1 + r_i . sigma) / 2` for the `i`-th tetrahedron vertex.
pub fn sic_povm_qubit(i: usize) -> Result<DensityMatrix> {
    Ok(bloch_to_qubit(&sic_bloch_vector(i)?))
}

/// Bell vectors in the order Phi+, Psi+, Phi-, Psi-.
pub fn bell(i: usize) -> Result<PureState> {
    let amps: [f64; 4] = match i {
        1 => [1.0, 0.0, 0.0, 1.0],
        2 => [0.0, 1.0, 1.0, 0.0],
        3 => [1.0, 0.0, 0.0, -1.0],
        4 => [0.0, 1.0, -1.0, 0.0],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Bell index must be in 1..=4, got {i}"
            )))
        }
    };
    PureState::normalized(
        vec![2, 2],
        DVector::from_iterator(4, amps.iter().map(|&a| C64::new(a, 0.0))),
    )
}

/// `(1/4) sum_i sic_i ⊗ |bell_i><bell_i|`, a three-qubit state that is
/// bi-separable across `A|BC` and sits exactly on the bi-separable bounds.
pub fn rho1() -> DensityMatrix {
    let mut acc = CMatrix::zeros(8, 8);
    for i in 1..=4 {
        let sic = sic_povm_qubit(i).expect("index in range");
        let b = bell(i).expect("index in range").projector();
        acc += kron(sic.data(), b.data()) * C64::new(0.25, 0.0);
    }
    DensityMatrix::new(vec![2, 2, 2], acc).expect("rho1 is a valid state")
}

/// `(|0...0> + ... + |d-1...d-1>) / sqrt(d)` on `n` parties.
pub fn ghz(n: usize, d: usize) -> Result<PureState> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "GHZ needs n >= 2 parties and d >= 2, got n = {n}, d = {d}"
        )));
    }
    let dims = vec![d; n];
    let mut amps = DVector::from_element(product(&dims), C64::ZERO);
    for level in 0..d {
        amps[join_index(&vec![level; n], &dims)] = C64::ONE;
    }
    PureState::normalized(dims, amps)
}

/// Equal superposition of all single-excitation qubit basis states.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "W state needs n >= 2 parties, got {n}"
        )));
    }
    let dims = vec![2; n];
    let mut amps = DVector::from_element(1 << n, C64::ZERO);
    for k in 0..n {
        amps[1 << k] = C64::ONE;
    }
    PureState::normalized(dims, amps)
}

/// `0.4|00><00| + 0.3|01><01| + 0.2|10><10| + 0.1|11><11|`.
pub fn classical_cc() -> DensityMatrix {
    let diag = DVector::from_vec(
        [0.4, 0.3, 0.2, 0.1]
            .iter()
            .map(|&p| C64::new(p, 0.0))
            .collect(),
    );
    DensityMatrix::new(vec![2, 2], CMatrix::from_diagonal(&diag)).expect("valid diagonal state")
}

/// `p |GHZ><GHZ| + (1 - p) 1/D`.
pub fn ghz_mixture(n: usize, d: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "mixing weight {p} outside [0, 1]"
        )));
    }
    let g = ghz(n, d)?.projector();
    let mixed = DensityMatrix::maximally_mixed(vec![d; n])?;
    DensityMatrix::mixture(&[(p, &g), (1.0 - p, &mixed)])
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^d`.
pub fn haar_vector(d: usize, rng: &mut impl Rng) -> DVector<C64> {
    let v = DVector::from_fn(d, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
        let x = r[(i, i)];
        if x.norm() == 0.0 {
            C64::ONE
        } else {
            x / C64::new(x.norm(), 0.0)
        }
    }));
    q * phases
}

/// Flat Dirichlet(1, ..., 1) weights.
pub fn dirichlet_weights(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn weighted_sum(dims: &[usize], terms: &[CMatrix], weights: &[f64]) -> Result<DensityMatrix> {
    let total = product(dims);
    let mut acc = CMatrix::zeros(total, total);
    for (t, &w) in terms.iter().zip(weights) {
        acc += t * C64::new(w, 0.0);
    }
    DensityMatrix::from_unnormalized(dims.to_vec(), acc)
}

fn check_terms(k_terms: usize) -> Result<()> {
    if k_terms == 0 {
        return Err(Error::InvalidArgument("k_terms must be >= 1".into()));
    }
    Ok(())
}

/// Dirichlet mixture of Haar-random fully product pure states.
pub fn random_fully_separable(dims: &[usize], k_terms: usize, seed: u64) -> Result<DensityMatrix> {
    check_terms(k_terms)?;
    DensityMatrix::maximally_mixed(dims.to_vec())?;
    let mut rng = rng_from_seed(seed);
    let terms: Vec<CMatrix> = (0..k_terms)
        .map(|_| {
            dims.iter()
                .map(|&d| haar_vector(d, &mut rng))
                .reduce(|a, b| a.kronecker(&b))
                .map(|v| &v * v.adjoint())
                .expect("at least one party")
        })
        .collect();
    let weights = dirichlet_weights(k_terms, &mut rng);
    weighted_sum(dims, &terms, &weights)
}

/// Places a vector on `side_a ⊗ side_b` into the parties' natural order.
fn interleave_product(
    dims: &[usize],
    part: &Bipartition,
    a: &DVector<C64>,
    b: &DVector<C64>,
) -> DVector<C64> {
    let dims_a: Vec<usize> = part.side_a().iter().map(|&k| dims[k]).collect();
    let dims_b: Vec<usize> = part.side_b().iter().map(|&k| dims[k]).collect();
    let total = product(dims);
    let mut digits = vec![0; dims.len()];
    let mut da = Vec::with_capacity(dims_a.len());
    let mut db = Vec::with_capacity(dims_b.len());
    DVector::from_fn(total, |i, _| {
        split_index(i, dims, &mut digits);
        da.clear();
        db.clear();
        da.extend(part.side_a().iter().map(|&k| digits[k]));
        db.extend(part.side_b().iter().map(|&k| digits[k]));
        a[join_index(&da, &dims_a)] * b[join_index(&db, &dims_b)]
    })
}

/// Dirichlet mixture of `|a><a| ⊗ |b><b|` with Haar-random vectors on the two
/// (possibly multi-party) sides of `part`.
pub fn random_biseparable(
    dims: &[usize],
    part: &Bipartition,
    k_terms: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    check_terms(k_terms)?;
    DensityMatrix::maximally_mixed(dims.to_vec())?;
    if part.n_parties() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "bipartition {part} does not match {} parties",
            dims.len()
        )));
    }
    let (d_a, d_b) = part.side_dims(dims);
    let mut rng = rng_from_seed(seed);
    let terms: Vec<CMatrix> = (0..k_terms)
        .map(|_| {
            let a = haar_vector(d_a, &mut rng);
            let b = haar_vector(d_b, &mut rng);
            let v = interleave_product(dims, part, &a, &b);
            &v * v.adjoint()
        })
        .collect();
    let weights = dirichlet_weights(k_terms, &mut rng);
    weighted_sum(dims, &terms, &weights)
}

/// Normalized Wishart state `G G^dagger / tr` with `G` a `D x rank` Ginibre matrix.
pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    DensityMatrix::maximally_mixed(dims.to_vec())?;
    let total = product(dims);
    if rank == 0 || rank > total {
        return Err(Error::InvalidArgument(format!(
            "rank must be in 1..={total}, got {rank}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let g = CMatrix::from_fn(total, rank, |_, _| complex_gaussian(&mut rng));
    DensityMatrix::from_unnormalized(dims.to_vec(), &g * g.adjoint())
}

/// Random traceless Hermitian `X` with operator norm `scale / d`, so that
/// `1/d ± X` are both positive semidefinite.
fn traceless_displacement(d: usize, scale: f64, rng: &mut impl Rng) -> CMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut h = (&z + z.adjoint()) * C64::new(0.5, 0.0);
    let tr = crate::linalg::trace(&h) / C64::new(d as f64, 0.0);
    for i in 0..d {
        h[(i, i)] -= tr;
    }
    let eig = crate::linalg::hermitian_eigenvalues(&h);
    let norm = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    h * C64::new(scale / (d as f64 * norm), 0.0)
}

/// Fully separable states whose only nonzero correlations involve every
/// party (strong filter normal form). Each term averages
/// `⊗_k (1/d_k + s_k X_k)` over sign patterns with `prod_k s_k = +1`, which
/// cancels every correlation on a proper subset of parties; the terms are
/// then mixed with Dirichlet weights.
pub fn random_sfnf_fully_separable(
    dims: &[usize],
    k_terms: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    check_terms(k_terms)?;
    DensityMatrix::maximally_mixed(dims.to_vec())?;
    let n = dims.len();
    let mut rng = rng_from_seed(seed);
    let total = product(dims);
    let mut terms = Vec::with_capacity(k_terms);
    for _ in 0..k_terms {
        let displacements: Vec<CMatrix> = dims
            .iter()
            .map(|&d| {
                let scale = if rng.random::<f64>() < 0.5 {
                    1.0
                } else {
                    rng.random::<f64>()
                };
                traceless_displacement(d, scale, &mut rng)
            })
            .collect();
        let mut term = CMatrix::zeros(total, total);
        for signs in 0u64..(1 << n) {
            if signs.count_ones() % 2 == 1 {
                continue;
            }
            let factor = dims
                .iter()
                .zip(&displacements)
                .enumerate()
                .map(|(k, (&d, x))| {
                    let s = if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
                    CMatrix::identity(d, d) / C64::new(d as f64, 0.0) + x * C64::new(s, 0.0)
                })
                .reduce(|a, b| kron(&a, &b))
                .expect("at least one party");
            term += factor;
        }
        terms.push(term / C64::new((1u64 << (n - 1)) as f64, 0.0));
    }
    let weights = dirichlet_weights(k_terms, &mut rng);
    weighted_sum(dims, &terms, &weights)
}

/// Random state diagonal in a random local product basis (zero discord).
pub fn random_classical(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    DensityMatrix::maximally_mixed(dims.to_vec())?;
    let mut rng = rng_from_seed(seed);
    let total = product(dims);
    let weights = dirichlet_weights(total, &mut rng);
    let diag = CMatrix::from_diagonal(&DVector::from_iterator(
        total,
        weights.iter().map(|&w| C64::new(w, 0.0)),
    ));
    let u = dims
        .iter()
        .map(|&d| haar_unitary(d, &mut rng))
        .reduce(|a, b| kron(&a, &b))
        .expect("at least one party");
    DensityMatrix::from_unnormalized(dims.to_vec(), &u * diag * u.adjoint())
}

/// Example identifiers accepted by [`by_name`].
pub fn names() -> Vec<&'static str> {
    vec![
        "rho1",
        "ghz-3-2",
        "ghz-2-2",
        "ghz-3-3",
        "w-3",
        "maximally-mixed-3q",
        "maximally-mixed-2q",
        "classical-cc",
        "bell-1",
        "bell-2",
        "bell-3",
        "bell-4",
    ]
}

/// Resolves a zoo identifier. Parametric forms: `ghz-<n>-<d>`, `w-<n>`,
/// `maximally-mixed-<n>q`, `bell-<i>`.
pub fn by_name(name: &str) -> Result<DensityMatrix> {
    let unknown = || {
        Error::InvalidArgument(format!(
            "unknown zoo state '{name}'; available: {}",
            names().join(", ")
        ))
    };
    let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
    match name {
        "rho1" => Ok(rho1()),
        "classical-cc" => Ok(classical_cc()),
        _ => {
            if let Some(rest) = name.strip_prefix("ghz-") {
                let (n, d) = rest.split_once('-').ok_or_else(unknown)?;
                Ok(ghz(num(n)?, num(d)?)?.projector())
            } else if let Some(rest) = name.strip_prefix("w-") {
                Ok(w_state(num(rest)?)?.projector())
            } else if let Some(rest) = name.strip_prefix("maximally-mixed-") {
                let n = num(rest.strip_suffix('q').ok_or_else(unknown)?)?;
                DensityMatrix::maximally_mixed(vec![2; n])
            } else if let Some(rest) = name.strip_prefix("bell-") {
                Ok(bell(num(rest)?)?.projector())
            } else {
                Err(unknown())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, partial_trace, trace};

    #[test]
    fn sic_states_form_a_tetrahedron() {
        let states: Vec<DensityMatrix> = (1..=4).map(|i| sic_povm_qubit(i).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let overlap = trace(&(states[i].data() * states[j].data())).re;
                let expected = if i == j { 1.0 } else { 1.0 / 3.0 };
                assert!((overlap - expected).abs() < 1e-14);
            }
        }
        let mut avg = CMatrix::zeros(2, 2);
        for s in &states {
            avg += s.data() * C64::new(0.25, 0.0);
        }
        assert!(max_abs(&(avg - CMatrix::identity(2, 2) * C64::new(0.5, 0.0))) < 1e-15);
        let r3 = 3f64.sqrt();
        let d = states[0].data();
        assert!((d[(0, 0)].re - (r3 + 1.0) / (2.0 * r3)).abs() < 1e-15);
        assert!((d[(1, 1)].re - (r3 - 1.0) / (2.0 * r3)).abs() < 1e-15);
        assert!(sic_povm_qubit(0).is_err() && sic_povm_qubit(5).is_err());
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for i in 1..=4 {
            for j in 1..=4 {
                let ip = bell(i).unwrap().inner(&bell(j).unwrap());
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi_minus = bell(4).unwrap();
        assert!((psi_minus.amplitudes()[1].re - s).abs() < 1e-15);
        assert!((psi_minus.amplitudes()[2].re + s).abs() < 1e-15);
        assert!(bell(5).is_err());
    }

    #[test]
    fn ghz_and_w_amplitudes() {
        let g = ghz(2, 2).unwrap();
        assert!((g.inner(&bell(1).unwrap()).norm() - 1.0).abs() < 1e-15);
        let w = w_state(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for (i, a) in w.amplitudes().iter().enumerate() {
            let expected = if [1, 2, 4].contains(&i) { s } else { 0.0 };
            assert!((a.re - expected).abs() < 1e-15 && a.im == 0.0);
        }
        let reduced = partial_trace(&ghz(3, 2).unwrap().projector(), &[0, 1]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = C64::new(0.5, 0.0);
        expected[(3, 3)] = C64::new(0.5, 0.0);
        assert!(max_abs(&(reduced.data() - expected)) < 1e-15);
    }

    #[test]
    fn samplers_are_deterministic() {
        let a = random_density(&[2, 2, 2], 3, 11).unwrap();
        let b = random_density(&[2, 2, 2], 3, 11).unwrap();
        assert_eq!(a, b);
        let c = random_density(&[2, 2, 2], 3, 12).unwrap();
        assert_ne!(a, c);
        assert_eq!(
            random_biseparable(&[2, 2, 2], &Bipartition::new(3, &[1]).unwrap(), 5, 3).unwrap(),
            random_biseparable(&[2, 2, 2], &Bipartition::new(3, &[1]).unwrap(), 5, 3).unwrap()
        );
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(5);
        let u = haar_unitary(4, &mut rng);
        assert!(max_abs(&(&u * u.adjoint() - CMatrix::identity(4, 4))) < 1e-13);
    }

    #[test]
    fn names_resolve() {
        for name in names() {
            by_name(name).unwrap();
        }
        assert_eq!(by_name("ghz-4-2").unwrap().dims(), &[2, 2, 2, 2]);
        assert!(by_name("nope").is_err());
        assert!(by_name("ghz-3").is_err());
    }
}
