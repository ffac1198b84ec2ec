//! CMN-based discord: how much the Correlation Minor Norm of a matricization
//! drops under the least disturbing local projective measurement.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{normalized_generalized_gell_mann, OperatorBasis};
use crate::cmn::{cmn, cmn_powered, CmnParams};
use crate::error::{Error, Result};
use crate::linalg::{
    embed_operator, kron_real, max_abs, product, split_index, trace, CMatrix, DensityMatrix,
    RMatrix, C64,
};
use crate::tensor::{Bipartition, CorrelationTensor};
use crate::zoo::rng_from_seed;

const PROJECTOR_TOL: f64 = 1e-10;

/// Rank-one projective measurement on each selected party, stored as the
/// columns of a unitary (column `j` spans projector `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFamily {
    parties: Vec<usize>,
    bases: Vec<CMatrix>,
}

impl MeasurementFamily {
    /// `parties` ascending, one basis per party with the party's dimension.
    pub fn new(dims: &[usize], parties: Vec<usize>, bases: Vec<CMatrix>) -> Result<Self> {
        if parties.len() != bases.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} parties but {} measurement bases",
                parties.len(),
                bases.len()
            )));
        }
        if parties.windows(2).any(|w| w[0] >= w[1]) || parties.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidArgument(format!(
                "measured parties {parties:?} must be ascending and below {}",
                dims.len()
            )));
        }
        for (&k, u) in parties.iter().zip(&bases) {
            let d = dims[k];
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "basis for party {k} is {}x{}, party dimension is {d}",
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        let family = Self { parties, bases };
        family.validate()?;
        Ok(family)
    }

    /// Computational-basis measurement on `parties`.
    pub fn computational(dims: &[usize], parties: &[usize]) -> Result<Self> {
        let bases = parties
            .iter()
            .map(|&k| dims.get(k).map(|&d| CMatrix::identity(d, d)))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument(format!("parties {parties:?} out of range")))?;
        Self::new(dims, parties.to_vec(), bases)
    }

    /// Builds the family from the flat parameter vector used by the optimizer.
    pub fn from_angles(dims: &[usize], parties: &[usize], params: &[f64]) -> Result<Self> {
        let needed: usize = parties.iter().map(|&k| n_angles(dims[k])).sum();
        if params.len() != needed {
            return Err(Error::DimensionMismatch(format!(
                "expected {needed} measurement parameters, got {}",
                params.len()
            )));
        }
        let mut offset = 0;
        let mut bases = Vec::with_capacity(parties.len());
        for &k in parties {
            let n = n_angles(dims[k]);
            bases.push(unitary_from_angles(dims[k], &params[offset..offset + n])?);
            offset += n;
        }
        Self::new(dims, parties.to_vec(), bases)
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn bases(&self) -> &[CMatrix] {
        &self.bases
    }

    /// The rank-one projectors of the `i`-th measured party.
    pub fn projectors(&self, i: usize) -> Vec<CMatrix> {
        let u = &self.bases[i];
        (0..u.ncols())
            .map(|j| {
                let v = u.column(j);
                v * v.adjoint()
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.parties.len() {
            let ps = self.projectors(i);
            let d = ps.len();
            let mut sum = CMatrix::zeros(d, d);
            for (a, p) in ps.iter().enumerate() {
                let idempotent = max_abs(&(p * p - p));
                let hermitian = max_abs(&(p - p.adjoint()));
                if idempotent > PROJECTOR_TOL || hermitian > PROJECTOR_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "measurement on party {} is not a projector family",
                        self.parties[i]
                    )));
                }
                for q in &ps[a + 1..] {
                    if max_abs(&(p * q)) > PROJECTOR_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "projectors on party {} are not mutually orthogonal",
                            self.parties[i]
                        )));
                    }
                }
                sum += p;
            }
            if max_abs(&(sum - CMatrix::identity(d, d))) > PROJECTOR_TOL {
                return Err(Error::InvalidArgument(format!(
                    "projectors on party {} do not sum to the identity",
                    self.parties[i]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexEntry {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasurementRepr {
    parties: Vec<usize>,
    /// Per party, per outcome, the basis vector.
    vectors: Vec<Vec<Vec<ComplexEntry>>>,
}

impl Serialize for MeasurementFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let vectors = self
            .bases
            .iter()
            .map(|u| {
                (0..u.ncols())
                    .map(|j| {
                        u.column(j)
                            .iter()
                            .map(|z| ComplexEntry { re: z.re, im: z.im })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MeasurementRepr {
            parties: self.parties.clone(),
            vectors,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementFamily {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasurementRepr::deserialize(de)?;
        let bases = repr
            .vectors
            .iter()
            .map(|cols| {
                let d = cols.len();
                CMatrix::from_fn(d, d, |r, c| {
                    cols[c].get(r).map_or(C64::ZERO, |z| C64::new(z.re, z.im))
                })
            })
            .collect::<Vec<_>>();
        let dims: Vec<usize> = {
            let n = repr.parties.iter().max().map_or(0, |m| m + 1);
            let mut dims = vec![2; n];
            for (&k, u) in repr.parties.iter().zip(&bases) {
                dims[k] = u.nrows();
            }
            dims
        };
        MeasurementFamily::new(&dims, repr.parties, bases).map_err(serde::de::Error::custom)
    }
}

/// Number of real parameters of a projective basis in dimension `d`.
pub fn n_angles(d: usize) -> usize {
    d * (d - 1)
}

/// Basis unitary from `d(d-1)` angles. For a qubit `(theta, phi)` are the
/// Bloch angles of the first basis vector; for larger `d` the unitary is a
/// product of phased Givens rotations over all pairs `j < k`.
pub fn unitary_from_angles(d: usize, params: &[f64]) -> Result<CMatrix> {
    if d < 2 || params.len() != n_angles(d) {
        return Err(Error::DimensionMismatch(format!(
            "dimension {d} needs {} angles, got {}",
            n_angles(d),
            params.len()
        )));
    }
    let mut u = CMatrix::identity(d, d);
    let mut it = params.chunks_exact(2);
    for j in 0..d {
        for k in j + 1..d {
            let pair = it.next().expect("length checked");
            let theta = if d == 2 { pair[0] / 2.0 } else { pair[0] };
            let (c, s) = (theta.cos(), theta.sin());
            let phase = C64::from_polar(1.0, pair[1]);
            let mut g = CMatrix::identity(d, d);
            g[(j, j)] = C64::new(c, 0.0);
            g[(k, k)] = C64::new(c, 0.0);
            g[(k, j)] = phase * s;
            g[(j, k)] = -phase.conj() * s;
            u *= g;
        }
    }
    Ok(u)
}

/// `sum_i Pi_i rho Pi_i` over product projectors of the measured parties.
pub fn measure_state(rho: &DensityMatrix, family: &MeasurementFamily) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if let Some(&k) = family.parties.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "measured party {k} does not exist in a {}-party state",
            dims.len()
        )));
    }
    for (&k, u) in family.parties.iter().zip(&family.bases) {
        if u.nrows() != dims[k] {
            return Err(Error::DimensionMismatch(format!(
                "measurement on party {k} has dimension {}, party has {}",
                u.nrows(),
                dims[k]
            )));
        }
    }
    // Rotate into the measurement basis, dephase the measured digits, rotate back.
    let mut w = CMatrix::identity(rho.dim(), rho.dim());
    for (&k, u) in family.parties.iter().zip(&family.bases) {
        w = embed_operator(dims, &[k], u)? * w;
    }
    let mut sigma = w.adjoint() * rho.data() * &w;
    let total = product(dims);
    let keys: Vec<usize> = (0..total)
        .map(|i| {
            let mut digits = vec![0; dims.len()];
            split_index(i, dims, &mut digits);
            family
                .parties
                .iter()
                .fold(0, |acc, &k| acc * dims[k] + digits[k])
        })
        .collect();
    for i in 0..total {
        for j in 0..total {
            if keys[i] != keys[j] {
                sigma[(i, j)] = C64::ZERO;
            }
        }
    }
    DensityMatrix::from_unnormalized(dims.to_vec(), &w * sigma * w.adjoint())
}

/// Action of a single-party dephasing channel on the correlation vector:
/// `M[mu, nu] = Re tr(A_mu sum_j P_j A_nu P_j)`.
pub fn channel_correlation_map(basis: &OperatorBasis, projectors: &[CMatrix]) -> RMatrix {
    let ops = basis.ops();
    let images: Vec<CMatrix> = ops
        .iter()
        .map(|a| {
            projectors
                .iter()
                .fold(CMatrix::zeros(a.nrows(), a.ncols()), |acc, p| {
                    acc + p * a * p
                })
        })
        .collect();
    RMatrix::from_fn(ops.len(), ops.len(), |mu, nu| {
        trace(&(&ops[mu] * &images[nu])).re
    })
}

/// Left and right maps with `C' = L C R^T` for the matricization `part`,
/// unmeasured parties contributing identities.
pub fn measurement_transfer(
    dims: &[usize],
    family: &MeasurementFamily,
    part: &Bipartition,
) -> Result<(RMatrix, RMatrix)> {
    let party_map = |k: usize| -> Result<RMatrix> {
        let d = dims[k];
        match family.parties.iter().position(|&m| m == k) {
            Some(i) => Ok(channel_correlation_map(
                &normalized_generalized_gell_mann(d)?,
                &family.projectors(i),
            )),
            None => Ok(RMatrix::identity(d * d, d * d)),
        }
    };
    // The first listed party varies fastest, so it is the innermost factor.
    let side = |parties: &[usize]| -> Result<RMatrix> {
        let mut acc = RMatrix::identity(1, 1);
        for &k in parties {
            acc = kron_real(&party_map(k)?, &acc);
        }
        Ok(acc)
    };
    Ok((side(part.side_a())?, side(part.side_b())?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerCfg {
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub opt_tol: f64,
    /// Budget per restart.
    pub max_evaluations: usize,
}

impl Default for OptimizerCfg {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            initial_step: 0.3,
            min_step: 1e-5,
            opt_tol: 1e-6,
            max_evaluations: 200_000,
        }
    }
}

/// Which side of the cut is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub partition: String,
    /// `"a"`, `"b"` or `"global"`.
    pub measured: String,
    pub params: CmnParams,
    pub value: f64,
    /// `M(rho)^p`; the discord is this minus `best_measured`.
    pub unmeasured: f64,
    pub best_measured: f64,
    pub best_measurement: MeasurementFamily,
    pub evaluations: usize,
    pub converged: bool,
}

struct Restart {
    best: f64,
    params: Vec<f64>,
    evaluations: usize,
    exhausted: bool,
}

fn coordinate_search(
    objective: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    mut x: Vec<f64>,
    cfg: &OptimizerCfg,
) -> Result<Restart> {
    let mut best = objective(&x)?;
    let mut evaluations = 1;
    let mut step = cfg.initial_step;
    while step >= cfg.min_step {
        if evaluations >= cfg.max_evaluations {
            return Ok(Restart {
                best,
                params: x,
                evaluations,
                exhausted: true,
            });
        }
        let mut improved = false;
        for c in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[c];
                x[c] = old + dir * step;
                let value = objective(&x)?;
                evaluations += 1;
                if value > best {
                    best = value;
                    improved = true;
                    break;
                }
                x[c] = old;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(Restart {
        best,
        params: x,
        evaluations,
        exhausted: false,
    })
}

fn random_angles(dims: &[usize], parties: &[usize], rng: &mut impl Rng) -> Vec<f64> {
    let mut x = Vec::new();
    for &k in parties {
        for _ in 0..n_angles(dims[k]) / 2 {
            x.push(rng.random::<f64>() * std::f64::consts::PI);
            x.push(rng.random::<f64>() * std::f64::consts::TAU);
        }
    }
    x
}

fn discord_over(
    rho: &DensityMatrix,
    part: &Bipartition,
    measured: &[usize],
    label: String,
    params: &CmnParams,
    cfg: &OptimizerCfg,
) -> Result<DiscordResult> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument(
            "optimizer needs at least one restart".into(),
        ));
    }
    let dims = rho.dims();
    if part.n_parties() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "partition {part} does not match a {}-party state",
            dims.len()
        )));
    }
    let t = CorrelationTensor::build(rho)?;
    let unmeasured = cmn_powered(cmn(&t.matricize(part)?, params)?, params.p);
    let objective = |x: &[f64]| -> Result<f64> {
        let family = MeasurementFamily::from_angles(dims, measured, x)?;
        let after = measure_state(rho, &family)?;
        let m = CorrelationTensor::build(&after)?.matricize(part)?;
        Ok(cmn_powered(cmn(&m, params)?, params.p))
    };
    let restarts: Vec<Restart> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(cfg.seed.wrapping_add(i as u64));
            let x0 = random_angles(dims, measured, &mut rng);
            coordinate_search(&objective, x0, cfg)
        })
        .collect::<Result<_>>()?;

    // Best value, ties to the lowest restart index.
    let mut order: Vec<usize> = (0..restarts.len()).collect();
    order.sort_by(|&a, &b| {
        restarts[b]
            .best
            .total_cmp(&restarts[a].best)
            .then(a.cmp(&b))
    });
    let top = &restarts[order[0]];
    let agree = order
        .get(1)
        .is_none_or(|&second| top.best - restarts[second].best <= cfg.opt_tol);
    let exhausted = restarts.iter().any(|r| r.exhausted);
    Ok(DiscordResult {
        partition: part.to_string(),
        measured: label,
        params: *params,
        value: unmeasured - top.best,
        unmeasured,
        best_measured: top.best,
        best_measurement: MeasurementFamily::from_angles(dims, measured, &top.params)?,
        evaluations: restarts.iter().map(|r| r.evaluations).sum(),
        converged: agree && !exhausted,
    })
}

/// Discord with projective measurements on one side of the cut.
pub fn bipartite_discord_cmn(
    rho: &DensityMatrix,
    part: &Bipartition,
    side: Side,
    params: &CmnParams,
    cfg: &OptimizerCfg,
) -> Result<DiscordResult> {
    let measured = match side {
        Side::A => part.side_a(),
        Side::B => part.side_b(),
    };
    discord_over(rho, part, measured, side.to_string(), params, cfg)
}

/// Discord with product projective measurements on every party, the CMN
/// taken on the matricization `part`.
pub fn global_discord_cmn(
    rho: &DensityMatrix,
    part: &Bipartition,
    params: &CmnParams,
    cfg: &OptimizerCfg,
) -> Result<DiscordResult> {
    let all: Vec<usize> = (0..rho.n_parties()).collect();
    discord_over(rho, part, &all, "global".into(), params, cfg)
}
