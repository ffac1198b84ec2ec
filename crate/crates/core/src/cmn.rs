//! Correlation Minor Norm `M_{h,p}`: the Schatten `p`-norm of the `h`-th
//! compound of a (matricized) correlation matrix, evaluated through its
//! singular values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, RMatrix};

/// Singular values below this fraction of the largest are treated as zero.
pub const RELATIVE_CLAMP: f64 = 1e-12;

/// Schatten exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchattenP {
    One,
    Infinity,
    Finite(f64),
}

impl SchattenP {
    pub fn finite(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Schatten exponent must be positive, got {p}"
            )));
        }
        Ok(if p == 1.0 {
            SchattenP::One
        } else {
            SchattenP::Finite(p)
        })
    }

    /// Exponent used when forming `M^p`; `None` for infinity.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            SchattenP::One => Some(1.0),
            SchattenP::Finite(p) => Some(*p),
            SchattenP::Infinity => None,
        }
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenP::One => write!(f, "1"),
            SchattenP::Infinity => write!(f, "inf"),
            SchattenP::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for SchattenP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(SchattenP::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse p = '{s}'")))
                .and_then(SchattenP::finite),
        }
    }
}

/// Minor order `h` and Schatten exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmnParams {
    pub h: usize,
    pub p: SchattenP,
}

impl CmnParams {
    pub fn new(h: usize, p: SchattenP) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidArgument("minor order h must be >= 1".into()));
        }
        if let SchattenP::Finite(x) = p {
            SchattenP::finite(x)?;
        }
        Ok(Self { h, p })
    }

    /// Checks `h <= d^2` for a matricization with `d^2` singular values.
    pub fn check_against(&self, spectrum_len: usize) -> Result<()> {
        if self.h > spectrum_len {
            return Err(Error::InvalidArgument(format!(
                "minor order h = {} exceeds the {spectrum_len} available singular values",
                self.h
            )));
        }
        Ok(())
    }
}

/// `S_h(xs)` by the one-pass recurrence `e_k <- e_k + x e_{k-1}`.
pub fn elementary_symmetric(h: usize, xs: &[f64]) -> Result<f64> {
    if h == 0 || h > xs.len() {
        return Err(Error::InvalidArgument(format!(
            "elementary symmetric polynomial S_{h} undefined for {} variables",
            xs.len()
        )));
    }
    Ok(elementary_symmetric_all(xs, h)[h])
}

/// `[S_0, S_1, ..., S_max]` of `xs`.
pub fn elementary_symmetric_all(xs: &[f64], max_order: usize) -> Vec<f64> {
    let mut e = vec![0.0; max_order + 1];
    e[0] = 1.0;
    for (seen, &x) in xs.iter().enumerate() {
        for k in (1..=max_order.min(seen + 1)).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// Zeroes singular values below `RELATIVE_CLAMP * sigma_max`.
pub fn clamp_spectrum(sigma: &[f64]) -> Vec<f64> {
    let top = sigma.iter().copied().fold(0.0, f64::max);
    sigma
        .iter()
        .map(|&s| if s < RELATIVE_CLAMP * top { 0.0 } else { s })
        .collect()
}

/// CMN from a singular spectrum (any order; padded entries are zeros).
pub fn cmn_from_spectrum(sigma: &[f64], params: &CmnParams) -> Result<f64> {
    params.check_against(sigma.len())?;
    let mut sigma = clamp_spectrum(sigma);
    sigma.sort_by(|a, b| b.total_cmp(a));
    let h = params.h;
    Ok(match params.p {
        SchattenP::Infinity => sigma[..h].iter().product(),
        SchattenP::One => elementary_symmetric(h, &sigma)?,
        SchattenP::Finite(p) => {
            let powered: Vec<f64> = sigma.iter().map(|s| s.powf(p)).collect();
            elementary_symmetric(h, &powered)?.powf(1.0 / p)
        }
    })
}

/// `M_{h,p}` of a real matrix; the spectrum has `min(rows, cols)` entries.
pub fn cmn(m: &RMatrix, params: &CmnParams) -> Result<f64> {
    cmn_from_spectrum(&singular_values(m), params)
}

/// `M^p` as used in the discord measures; for `p = inf` the plain value.
pub fn cmn_powered(value: f64, p: SchattenP) -> f64 {
    match p.exponent() {
        Some(e) => value.powf(e),
        None => value,
    }
}

/// Product of all singular values, i.e. `|det|` for square matrices.
pub fn full_product(m: &RMatrix) -> f64 {
    clamp_spectrum(&singular_values(m)).iter().product()
}

/// Signed determinant for square matrices (diagnostics only).
pub fn signed_determinant(m: &RMatrix) -> Option<f64> {
    m.is_square().then(|| m.clone().determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn elementary_symmetric_small_cases() {
        assert_eq!(elementary_symmetric(1, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(elementary_symmetric(3, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(elementary_symmetric(2, &[1.0, 2.0, 3.0]).unwrap(), 11.0);
        assert!(elementary_symmetric(0, &[1.0]).is_err());
        assert!(elementary_symmetric(4, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn zero_matrix_has_zero_cmn() {
        let z = RMatrix::zeros(4, 4);
        for h in 1..=4 {
            let v = cmn(&z, &CmnParams::new(h, SchattenP::Infinity).unwrap()).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn bell_correlation_matrix_full_product() {
        let m = RMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, -0.5, 0.5]));
        let v = cmn(&m, &CmnParams::new(4, SchattenP::Infinity).unwrap()).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        assert!((full_product(&m) - 1.0 / 16.0).abs() < 1e-15);
        assert!((signed_determinant(&m).unwrap() + 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn h_beyond_spectrum_is_rejected() {
        let m = RMatrix::identity(2, 5);
        assert!(cmn(&m, &CmnParams::new(3, SchattenP::One).unwrap()).is_err());
        assert!(CmnParams::new(0, SchattenP::One).is_err());
        assert!(SchattenP::finite(-1.0).is_err());
    }

    #[test]
    fn finite_p_interpolates() {
        let sigma: [f64; 4] = [0.9, 0.4, 0.2, 0.05];
        let params = CmnParams::new(2, SchattenP::Finite(2.0)).unwrap();
        let brute: f64 = {
            let mut acc: f64 = 0.0;
            for i in 0..4 {
                for j in i + 1..4 {
                    acc += (sigma[i] * sigma[j]).powi(2);
                }
            }
            acc.sqrt()
        };
        assert!((cmn_from_spectrum(&sigma, &params).unwrap() - brute).abs() < 1e-15);
    }

    #[test]
    fn parse_schatten() {
        assert_eq!("inf".parse::<SchattenP>().unwrap(), SchattenP::Infinity);
        assert_eq!("1".parse::<SchattenP>().unwrap(), SchattenP::One);
        assert_eq!("2.5".parse::<SchattenP>().unwrap(), SchattenP::Finite(2.5));
        assert!("x".parse::<SchattenP>().is_err());
        assert!("0".parse::<SchattenP>().is_err());
    }
}
