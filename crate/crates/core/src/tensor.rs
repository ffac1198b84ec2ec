//! Correlation tensors and their structural surgery.
//!
//! Tensors are stored densely with the last axis varying fastest. Matricization
//! follows the flattening layout in which, within each side of the cut, the
//! first listed party varies fastest: for a three-party tensor split as
//! `A | BC`, entry `(i, j, k)` lands at row `i`, column `j + d_B^2 * k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis::{basis_expectations, normalized_generalized_gell_mann, OperatorBasis};
use crate::error::{Error, Result};
use crate::linalg::{split_index, DensityMatrix, RMatrix};

/// Dense real N-way array.
#[derive(Clone, Debug, PartialEq)]
pub struct RealTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl RealTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n);
            acc * n + i
        })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let at = self.offset(index);
        self.data[at] = value;
    }

    /// Visits every entry with its multi-index.
    pub fn for_each_indexed(&self, mut f: impl FnMut(&[usize], f64)) {
        let mut index = vec![0; self.shape.len()];
        for (flat, &value) in self.data.iter().enumerate() {
            split_index(flat, &self.shape, &mut index);
            f(&index, value);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Unfolds into a matrix with `part.side_a` on the rows.
    pub fn matricize(&self, part: &Bipartition) -> Result<RMatrix> {
        if part.n_parties() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "bipartition over {} parties applied to an order-{} tensor",
                part.n_parties(),
                self.order()
            )));
        }
        let radix = |side: &[usize]| -> Vec<usize> {
            let mut weights = Vec::with_capacity(side.len());
            let mut w = 1;
            for &k in side {
                weights.push(w);
                w *= self.shape[k];
            }
            weights
        };
        let row_weights = radix(part.side_a());
        let col_weights = radix(part.side_b());
        let rows: usize = part.side_a().iter().map(|&k| self.shape[k]).product();
        let cols: usize = part.side_b().iter().map(|&k| self.shape[k]).product();
        let mut out = RMatrix::zeros(rows, cols);
        self.for_each_indexed(|index, value| {
            let r: usize = part
                .side_a()
                .iter()
                .zip(&row_weights)
                .map(|(&k, &w)| index[k] * w)
                .sum();
            let c: usize = part
                .side_b()
                .iter()
                .zip(&col_weights)
                .map(|(&k, &w)| index[k] * w)
                .sum();
            out[(r, c)] = value;
        });
        Ok(out)
    }
}

/// Split of `{0..n}` into two nonempty complementary sides.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_parties: usize, side_a: &[usize]) -> Result<Self> {
        let mut a = side_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != side_a.len() {
            return Err(Error::InvalidArgument(format!(
                "duplicate party in bipartition side {side_a:?}"
            )));
        }
        if a.is_empty() || a.len() >= n_parties {
            return Err(Error::InvalidArgument(format!(
                "bipartition side {side_a:?} must be a nonempty proper subset of {n_parties} parties"
            )));
        }
        if let Some(&p) = a.iter().find(|&&p| p >= n_parties) {
            return Err(Error::InvalidArgument(format!(
                "party {p} out of range for {n_parties} parties"
            )));
        }
        let b = (0..n_parties).filter(|k| !a.contains(k)).collect();
        Ok(Self {
            side_a: a,
            side_b: b,
        })
    }

    /// Every cut of `n` parties once, up to exchanging the sides: smaller side
    /// first, and for even halves the side holding party 0.
    pub fn all(n_parties: usize) -> Vec<Bipartition> {
        let mut out = Vec::new();
        for size in 1..=n_parties / 2 {
            for mask in 0u64..(1u64 << n_parties) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                if 2 * size == n_parties && mask & 1 == 0 {
                    continue;
                }
                let side: Vec<usize> = (0..n_parties).filter(|k| mask >> k & 1 == 1).collect();
                out.push(Bipartition::new(n_parties, &side).expect("valid by construction"));
            }
        }
        out
    }

    /// Parses labels such as `A|BC` (letters name parties in order).
    pub fn parse(n_parties: usize, label: &str) -> Result<Self> {
        let (left, right) = label
            .split_once('|')
            .ok_or_else(|| Error::InvalidArgument(format!("bipartition '{label}' lacks '|'")))?;
        let letters = |s: &str| -> Result<Vec<usize>> {
            s.trim()
                .chars()
                .map(|ch| {
                    let upper = ch.to_ascii_uppercase();
                    if upper.is_ascii_uppercase() {
                        Ok(upper as usize - 'A' as usize)
                    } else {
                        Err(Error::InvalidArgument(format!(
                            "bad party letter '{ch}' in '{label}'"
                        )))
                    }
                })
                .collect()
        };
        let a = letters(left)?;
        let b = letters(right)?;
        let part = Self::new(n_parties, &a)?;
        let mut b_sorted = b.clone();
        b_sorted.sort_unstable();
        if b_sorted != part.side_b {
            return Err(Error::InvalidArgument(format!(
                "'{label}' is not a bipartition of {n_parties} parties"
            )));
        }
        Ok(part)
    }

    pub fn n_parties(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    /// Hilbert-space dimensions `(d_A, d_B)` of the two sides.
    pub fn side_dims(&self, dims: &[usize]) -> (usize, usize) {
        (
            self.side_a.iter().map(|&k| dims[k]).product(),
            self.side_b.iter().map(|&k| dims[k]).product(),
        )
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }
}

pub(crate) fn party_label(k: usize) -> String {
    if k < 26 {
        ((b'A' + k as u8) as char).to_string()
    } else {
        format!("P{k}")
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &[usize]| s.iter().map(|&k| party_label(k)).collect::<String>();
        write!(f, "{}|{}", side(&self.side_a), side(&self.side_b))
    }
}

/// Cross-correlations `<A_i ⊗ B_j ⊗ ... >` over the canonical bases.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    dims: Vec<usize>,
    values: RealTensor,
}

impl CorrelationTensor {
    pub fn build(rho: &DensityMatrix) -> Result<Self> {
        let bases: Vec<OperatorBasis> = rho
            .dims()
            .iter()
            .map(|&d| normalized_generalized_gell_mann(d))
            .collect::<Result<_>>()?;
        Self::build_with_bases(rho, &bases)
    }

    pub fn build_with_bases(rho: &DensityMatrix, bases: &[OperatorBasis]) -> Result<Self> {
        let values = basis_expectations(rho, bases)?;
        Ok(Self {
            dims: rho.dims().to_vec(),
            values,
        })
    }

    pub fn from_parts(dims: Vec<usize>, values: RealTensor) -> Result<Self> {
        let shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
        if shape != values.shape() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need tensor shape {shape:?}, got {:?}",
                values.shape()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn values(&self) -> &RealTensor {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values.get(index)
    }

    /// The all-identity entry, `prod 1/sqrt(d_i)` for unit-trace states.
    pub fn vertex(&self) -> f64 {
        self.values.data[0]
    }

    pub fn matricize(&self, part: &Bipartition) -> Result<RMatrix> {
        self.values.matricize(part)
    }

    /// Subarray with every index >= 1 (all identity hyperplanes removed).
    pub fn interior(&self) -> InteriorTensor {
        let shape: Vec<usize> = self.dims.iter().map(|d| d * d - 1).collect();
        let mut values = RealTensor::zeros(shape);
        let mut shifted = vec![0; self.dims.len()];
        let interior_shape = values.shape.clone();
        let mut index = vec![0; interior_shape.len()];
        for flat in 0..values.data.len() {
            split_index(flat, &interior_shape, &mut index);
            for (s, &i) in shifted.iter_mut().zip(&index) {
                *s = i + 1;
            }
            values.data[flat] = self.values.get(&shifted);
        }
        InteriorTensor {
            dims: self.dims.clone(),
            values,
        }
    }

    /// Slice at the identity index of axis `dropped`.
    pub fn face(&self, dropped: usize) -> Result<RealTensor> {
        let n = self.n_parties();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "faces need at least two parties".into(),
            ));
        }
        if dropped >= n {
            return Err(Error::InvalidArgument(format!(
                "party {dropped} out of range for {n} parties"
            )));
        }
        let shape: Vec<usize> = self
            .values
            .shape
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != dropped)
            .map(|(_, &s)| s)
            .collect();
        let mut out = RealTensor::zeros(shape.clone());
        let mut sub = vec![0; shape.len()];
        let mut full = vec![0; n];
        for flat in 0..out.data.len() {
            split_index(flat, &shape, &mut sub);
            let mut it = sub.iter();
            for (k, slot) in full.iter_mut().enumerate() {
                *slot = if k == dropped { 0 } else { *it.next().unwrap() };
            }
            out.data[flat] = self.values.get(&full);
        }
        Ok(out)
    }
}

/// Correlation tensor with every entry involving an identity operator removed.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorTensor {
    dims: Vec<usize>,
    values: RealTensor,
}

impl InteriorTensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &RealTensor {
        &self.values
    }

    pub fn matricize(&self, part: &Bipartition) -> Result<RMatrix> {
        self.values.matricize(part)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bipartitions_counts() {
        assert_eq!(Bipartition::all(2).len(), 1);
        assert_eq!(Bipartition::all(3).len(), 3);
        assert_eq!(Bipartition::all(4).len(), 7);
        let labels: Vec<String> = Bipartition::all(3).iter().map(|p| p.to_string()).collect();
        assert_eq!(labels, ["A|BC", "B|AC", "C|AB"]);
    }

    #[test]
    fn bipartition_validation_and_parse() {
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[3]).is_err());
        let p = Bipartition::parse(3, "b|ac").unwrap();
        assert_eq!(p.side_a(), &[1]);
        assert_eq!(p.side_b(), &[0, 2]);
        assert!(Bipartition::parse(3, "A|B").is_err());
        assert!(Bipartition::parse(3, "AB").is_err());
    }

    #[test]
    fn flattening_layout_matches_column_formula() {
        let shape = vec![4, 4, 4];
        let data: Vec<f64> = (0..64).map(|x| x as f64).collect();
        let t = RealTensor::new(shape, data).unwrap();
        let m = t.matricize(&Bipartition::new(3, &[0]).unwrap()).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (4, 16));
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(m[(i, 4 * k + j)], t.get(&[i, j, k]));
                }
            }
        }
    }

    #[test]
    fn face_rejects_out_of_range() {
        let t = CorrelationTensor::from_parts(vec![2, 2], RealTensor::zeros(vec![4, 4])).unwrap();
        assert!(t.face(2).is_err());
        assert_eq!(t.face(1).unwrap().shape(), &[4]);
    }
}
