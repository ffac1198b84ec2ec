//! Closed-form separability bounds on the CMN and on the trace norm of the
//! interior tensor.
//!
//! Every bound returns `Err(Inconclusive)` when its hypotheses are not met;
//! callers turn that into a report rather than an error.

use serde::{Deserialize, Serialize};

use crate::cmn::elementary_symmetric;
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::linalg::RMatrix;

/// Relative tolerance separating "violated" from "saturated".
pub const COMPARISON_TOL: f64 = 1e-9;

/// Why a bound could not be applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inconclusive {
    pub reason: String,
}

impl Inconclusive {
    pub fn new(reason: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
        }
    }
}

pub type BoundResult = std::result::Result<f64, Inconclusive>;

/// Outcome of comparing a value against a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Saturated,
    Violated,
    Inconclusive,
}

pub fn compare(value: f64, bound: f64) -> Verdict {
    let scale = bound.abs().max(f64::MIN_POSITIVE);
    let gap = value - bound;
    if gap.abs() <= COMPARISON_TOL * scale {
        Verdict::Saturated
    } else if gap > 0.0 {
        Verdict::Violated
    } else {
        Verdict::Satisfied
    }
}

/// `1/sqrt(d_A d_B) · [(d_A-1)/(d_A(h-1)) · (d_B-1)/(d_B(h-1))]^{(h-1)/2}` for
/// states bi-separable across the cut and in filter normal form; needs
/// `h >= sqrt(d_A d_B)` and `h <= min(d_A, d_B)^2`.
pub fn bisep_bound_inf(d_a: usize, d_b: usize, h: usize) -> BoundResult {
    if h * h < d_a * d_b {
        return Err(Inconclusive::new(format!(
            "requires h >= sqrt(d_A d_B) = {:.4}, got h = {h}",
            ((d_a * d_b) as f64).sqrt()
        )));
    }
    let d = d_a.min(d_b);
    if h > d * d {
        return Err(Inconclusive::new(format!(
            "requires h <= d^2 = {}, got h = {h}",
            d * d
        )));
    }
    let (da, db, hm1) = (d_a as f64, d_b as f64, (h - 1) as f64);
    let ratio = (da - 1.0) / (da * hm1) * (db - 1.0) / (db * hm1);
    Ok(ratio.powf(hm1 / 2.0) / (da * db).sqrt())
}

/// `S_h(alpha, beta/(m-1), ..., beta/(m-1))` with `m - 1` copies of the second argument.
fn symmetric_bound(alpha: f64, beta: f64, m: usize, h: usize) -> f64 {
    let mut args = Vec::with_capacity(m);
    args.push(alpha);
    args.extend(std::iter::repeat_n(beta / (m - 1) as f64, m - 1));
    elementary_symmetric(h, &args).expect("1 <= h <= m checked by callers")
}

/// Whether the p = 1 bi-separable bound is tight (`D <= d^3`).
pub fn bisep_p1_is_tight(d_a: usize, d_b: usize) -> bool {
    let (d, big) = (d_a.min(d_b), d_a.max(d_b));
    big <= d * d * d
}

/// `S_h(alpha, beta/(d^2-1), ...)` with `alpha = 1/sqrt(d_A d_B)` and
/// `beta = sqrt((d_A-1)(d_B-1)/(d_A d_B))`; needs `1 < h <= d^2`.
pub fn bisep_bound_p1(d_a: usize, d_b: usize, h: usize) -> BoundResult {
    if h <= 1 {
        return Err(Inconclusive::new(format!("requires h > 1, got h = {h}")));
    }
    let d = d_a.min(d_b);
    if h > d * d {
        return Err(Inconclusive::new(format!(
            "requires h <= d^2 = {}, got h = {h}",
            d * d
        )));
    }
    let (da, db) = (d_a as f64, d_b as f64);
    let alpha = 1.0 / (da * db).sqrt();
    let beta = ((da - 1.0) * (db - 1.0) / (da * db)).sqrt();
    Ok(symmetric_bound(alpha, beta, d * d, h))
}

/// `(prod 1/sqrt(d_i), prod sqrt((d_i-1)/d_i))`.
pub fn full_alpha_beta(dims: &[usize]) -> (f64, f64) {
    dims.iter().fold((1.0, 1.0), |(a, b), &d| {
        let d = d as f64;
        (a / d.sqrt(), b * ((d - 1.0) / d).sqrt())
    })
}

/// `alpha (beta/(h-1))^{h-1}` for fully separable states in strong filter
/// normal form; needs `h >= prod sqrt(d_i - 1)`. The caller checks
/// `h <= d^2` for its matricization.
pub fn fullsep_bound_inf(dims: &[usize], h: usize) -> BoundResult {
    if h == 0 {
        return Err(Inconclusive::new("requires h >= 1"));
    }
    let threshold: usize = dims.iter().map(|d| d - 1).product();
    if h * h < threshold {
        return Err(Inconclusive::new(format!(
            "requires h >= prod sqrt(d_i - 1) = {:.4}, got h = {h}",
            (threshold as f64).sqrt()
        )));
    }
    let (alpha, beta) = full_alpha_beta(dims);
    if h == 1 {
        return Ok(alpha);
    }
    let hm1 = (h - 1) as f64;
    Ok(alpha * (beta / hm1).powf(hm1))
}

/// `S_h(alpha, beta/(d^2-1), ...)` with `alpha`, `beta` over all parties and
/// `d = min(d_A, d_B)` of the matricization `side_dims`.
pub fn fullsep_bound_p1(dims: &[usize], side_dims: (usize, usize), h: usize) -> BoundResult {
    let d = side_dims.0.min(side_dims.1);
    if h == 0 || h > d * d {
        return Err(Inconclusive::new(format!(
            "requires 1 <= h <= d^2 = {}, got h = {h}",
            d * d
        )));
    }
    let (alpha, beta) = full_alpha_beta(dims);
    Ok(symmetric_bound(alpha, beta, d * d, h))
}

/// Interior trace-norm bound for fully separable states, any matricization.
pub fn dvh_fullsep_bound(dims: &[usize]) -> f64 {
    full_alpha_beta(dims).1
}

/// Trace norm of a matricized interior tensor.
pub fn dvh_interior_sum(w: &RMatrix) -> f64 {
    singular_values(w).iter().sum()
}

/// Interior trace-norm bound `sqrt(3/8)` for three-qubit states bi-separable
/// across the matricized cut. No general-dimension form exists.
pub fn dvh_bisep_bound_3qubit(dims: &[usize]) -> Result<f64> {
    if dims != [2, 2, 2] {
        return Err(Error::Unsupported(format!(
            "interior bi-separable bound is only known for three qubits, got dims {dims:?}"
        )));
    }
    Ok((3.0f64 / 8.0).sqrt())
}
