//! Filter normal form (FNF) and strong filter normal form (SFNF) predicates,
//! plus the local filtering sweep that drives full-rank states to FNF.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_local_congruence, hermitian_eigenvalues, inv_sqrt_psd, partial_trace, trace_distance,
    CMatrix, DensityMatrix, C64,
};
use crate::tensor::{Bipartition, CorrelationTensor};

pub const DEFAULT_FILTER_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_SWEEPS: usize = 500;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Largest one-sided correlation `<A_i ⊗ 1>` or `<1 ⊗ B_j>` across the cut.
pub fn fnf_residual(t: &CorrelationTensor, part: &Bipartition) -> Result<f64> {
    let m = t.matricize(part)?;
    let row = (1..m.ncols()).map(|c| m[(0, c)].abs());
    let col = (1..m.nrows()).map(|r| m[(r, 0)].abs());
    Ok(row.chain(col).fold(0.0, f64::max))
}

/// FNF across `part`: both reduced states of the cut are maximally mixed.
pub fn is_fnf(t: &CorrelationTensor, part: &Bipartition, tol: f64) -> Result<bool> {
    Ok(fnf_residual(t, part)? <= tol)
}

/// Largest correlation having at least one identity index, vertex excluded.
pub fn sfnf_residual(t: &CorrelationTensor) -> f64 {
    let mut worst: f64 = 0.0;
    t.values().for_each_indexed(|index, value| {
        let has_identity = index.contains(&0);
        let vertex = index.iter().all(|&i| i == 0);
        if has_identity && !vertex {
            worst = worst.max(value.abs());
        }
    });
    worst
}

pub fn is_sfnf(t: &CorrelationTensor, tol: f64) -> bool {
    sfnf_residual(t) <= tol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormStatus {
    /// Keyed by bipartition label, e.g. `A|BC`.
    pub is_fnf_per_partition: BTreeMap<String, bool>,
    pub is_sfnf: bool,
    pub max_residual: f64,
}

pub fn normal_form_status(t: &CorrelationTensor, tol: f64) -> Result<NormalFormStatus> {
    let mut is_fnf_per_partition = BTreeMap::new();
    let mut max_residual: f64 = 0.0;
    for part in Bipartition::all(t.n_parties()) {
        let r = fnf_residual(t, &part)?;
        max_residual = max_residual.max(r);
        is_fnf_per_partition.insert(part.to_string(), r <= tol);
    }
    let sfnf = sfnf_residual(t);
    Ok(NormalFormStatus {
        is_fnf_per_partition,
        is_sfnf: sfnf <= tol,
        max_residual: max_residual.max(sfnf),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterOptions {
    pub max_sweeps: usize,
    /// Target max trace distance of each group reduction from `1/d`.
    pub tol: f64,
    /// Smallest admissible eigenvalue of a group reduction.
    pub rank_tol: f64,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tol: DEFAULT_FILTER_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FilterOutcome {
    pub state: DensityMatrix,
    pub sweeps: usize,
    pub residual: f64,
    /// `prod_g det(rho_g)` before filtering and after every local step.
    pub determinant_products: Vec<f64>,
    /// `ln det(rho)` of the whole state at the same points. Each
    /// trace-preserving step multiplies `det(rho)` by
    /// `(d^d det rho_g)^{-D/d} >= 1`, so this sequence never decreases.
    pub log_determinants: Vec<f64>,
}

struct Reductions {
    residual: f64,
    det_product: f64,
    log_det: f64,
    min_eigen: Vec<f64>,
    reduced: Vec<CMatrix>,
}

fn reductions(data: &CMatrix, dims: &[usize], groups: &[Vec<usize>]) -> Result<Reductions> {
    let rho = DensityMatrix::from_unnormalized(dims.to_vec(), data.clone())?;
    let mut out = Reductions {
        residual: 0.0,
        det_product: 1.0,
        log_det: hermitian_eigenvalues(data)
            .iter()
            .map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY })
            .sum(),
        min_eigen: Vec::with_capacity(groups.len()),
        reduced: Vec::with_capacity(groups.len()),
    };
    for group in groups {
        let r = partial_trace(&rho, group)?.into_data();
        let d = r.nrows();
        let eig = hermitian_eigenvalues(&r);
        out.det_product *= eig.iter().product::<f64>();
        out.min_eigen.push(eig[0]);
        let target = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        out.residual = out.residual.max(trace_distance(&r, &target));
        out.reduced.push(r);
    }
    Ok(out)
}

/// Local filtering with every party as its own group.
pub fn filter_to_fnf(rho: &DensityMatrix, opts: &FilterOptions) -> Result<FilterOutcome> {
    let groups: Vec<Vec<usize>> = (0..rho.n_parties()).map(|k| vec![k]).collect();
    filter_groups_to_fnf(rho, &groups, opts)
}

/// Filters toward FNF across a cut, treating each side as one party.
pub fn filter_bipartition_to_fnf(
    rho: &DensityMatrix,
    part: &Bipartition,
    opts: &FilterOptions,
) -> Result<FilterOutcome> {
    let groups = vec![part.side_a().to_vec(), part.side_b().to_vec()];
    filter_groups_to_fnf(rho, &groups, opts)
}

/// Cyclic sweep over disjoint party groups: on each group `g` apply
/// `F_g = (d_g rho_g)^{-1/2}`, which leaves the trace unchanged and makes
/// `rho_g` maximally mixed, until every reduction is within `opts.tol`.
pub fn filter_groups_to_fnf(
    rho: &DensityMatrix,
    groups: &[Vec<usize>],
    opts: &FilterOptions,
) -> Result<FilterOutcome> {
    let dims = rho.dims().to_vec();
    let mut covered: Vec<usize> = groups.iter().flatten().copied().collect();
    covered.sort_unstable();
    let total_parties = covered.len();
    covered.dedup();
    if covered.len() != total_parties || covered.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "filter groups {groups:?} must be disjoint subsets of {} parties",
            dims.len()
        )));
    }

    let mut data = rho.data().clone();
    let mut state = reductions(&data, &dims, groups)?;
    for (group, &min) in groups.iter().zip(&state.min_eigen) {
        if min <= opts.rank_tol {
            return Err(Error::FilteringNotPossible {
                parties: group.clone(),
                min_eigenvalue: min,
            });
        }
    }
    let mut history = vec![state.det_product];
    let mut log_dets = vec![state.log_det];
    let mut sweeps = 0;
    while state.residual > opts.tol {
        if sweeps == opts.max_sweeps {
            return Err(Error::FilteringNotConverged {
                iterations: sweeps,
                residual: state.residual,
            });
        }
        for (g, group) in groups.iter().enumerate() {
            let reduced = &state.reduced[g];
            let d = reduced.nrows() as f64;
            let filter =
                inv_sqrt_psd(&(reduced * C64::new(d, 0.0)), opts.rank_tol * d).map_err(|_| {
                    Error::FilteringNotPossible {
                        parties: group.clone(),
                        min_eigenvalue: state.min_eigen[g],
                    }
                })?;
            data = apply_local_congruence(&data, &dims, group, &filter)?;
            state = reductions(&data, &dims, groups)?;
            history.push(state.det_product);
            log_dets.push(state.log_det);
        }
        sweeps += 1;
    }
    Ok(FilterOutcome {
        state: DensityMatrix::from_unnormalized(dims, data)?,
        sweeps,
        residual: state.residual,
        determinant_products: history,
        log_determinants: log_dets,
    })
}
