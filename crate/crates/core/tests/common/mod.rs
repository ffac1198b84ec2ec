//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the tensor or CMN code paths under test.
#![allow(dead_code)]

use cmnlab::{CMatrix, DensityMatrix, RMatrix, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(a ⊗ b)[(i*rb + k, j*cb + l)] = a[(i, j)] b[(k, l)]`, entry by entry.
pub fn kron_brute(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Normalized Gell-Mann operators in the library's documented order.
pub fn gell_mann(d: usize) -> Vec<CMatrix> {
    let mut ops = vec![CMatrix::identity(d, d) * c(1.0 / (d as f64).sqrt())];
    let h = 0.5f64.sqrt();
    let mut pairs = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            pairs.push((j, k));
        }
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = c(h);
        m[(k, j)] = c(h);
        ops.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = C64::new(0.0, -h);
        m[(k, j)] = C64::new(0.0, h);
        ops.push(m);
    }
    for l in 1..d {
        let mut m = CMatrix::zeros(d, d);
        for i in 0..=l {
            m[(i, i)] = c(if i < l { 1.0 } else { -(l as f64) });
        }
        let norm = m.norm();
        ops.push(m * c(1.0 / norm));
    }
    ops
}

pub fn re_trace(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Digits of `index` in mixed radix `radices`, first digit fastest.
fn digits_first_fastest(mut index: usize, radices: &[usize]) -> Vec<usize> {
    radices
        .iter()
        .map(|&r| {
            let digit = index % r;
            index /= r;
            digit
        })
        .collect()
}

/// Correlation matrix across `side_a | side_b`, built by forming every
/// operator `⊗_k A_{i_k}` explicitly. Within a side the first listed party
/// varies fastest.
pub fn correlation_matrix_brute(
    rho: &DensityMatrix,
    side_a: &[usize],
    side_b: &[usize],
) -> RMatrix {
    let dims = rho.dims();
    let bases: Vec<Vec<CMatrix>> = dims.iter().map(|&d| gell_mann(d)).collect();
    let radix = |side: &[usize]| side.iter().map(|&k| dims[k] * dims[k]).collect::<Vec<_>>();
    let (ra, rb) = (radix(side_a), radix(side_b));
    let rows: usize = ra.iter().product();
    let cols: usize = rb.iter().product();
    RMatrix::from_fn(rows, cols, |r, col| {
        let mut index = vec![0; dims.len()];
        for (&k, i) in side_a.iter().zip(digits_first_fastest(r, &ra)) {
            index[k] = i;
        }
        for (&k, i) in side_b.iter().zip(digits_first_fastest(col, &rb)) {
            index[k] = i;
        }
        let op = index
            .iter()
            .enumerate()
            .map(|(k, &i)| bases[k][i].clone())
            .reduce(|a, b| kron_brute(&a, &b))
            .unwrap();
        re_trace(rho.data(), &op)
    })
}

/// `S_h` by explicit enumeration of `h`-subsets.
pub fn elementary_symmetric_brute(h: usize, xs: &[f64]) -> f64 {
    fn rec(xs: &[f64], h: usize, start: usize, acc: f64) -> f64 {
        if h == 0 {
            return acc;
        }
        (start..xs.len())
            .map(|i| rec(xs, h - 1, i + 1, acc * xs[i]))
            .sum()
    }
    rec(xs, h, 0, 1.0)
}

/// Partial trace by summing over the traced digits directly.
pub fn partial_trace_brute(rho: &DensityMatrix, keep: &[usize]) -> CMatrix {
    let dims = rho.dims();
    let n = dims.len();
    let total: usize = dims.iter().product();
    let kept: usize = keep.iter().map(|&k| dims[k]).product();
    let digits = |mut i: usize| {
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = i % dims[k];
            i /= dims[k];
        }
        out
    };
    let key = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
    let mut out = CMatrix::zeros(kept, kept);
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (digits(i), digits(j));
            let traced_equal = (0..n).filter(|k| !keep.contains(k)).all(|k| di[k] == dj[k]);
            if traced_equal {
                out[(key(&di), key(&dj))] += rho.data()[(i, j)];
            }
        }
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
