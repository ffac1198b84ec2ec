//! Brute-force oracles and Monte Carlo soundness audits of the bounds.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{compare, full_alpha_beta, Verdict};
use crate::cmn::{elementary_symmetric, SchattenP};
use crate::detect::{evaluate_criterion, BoundReport, Criterion};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, partial_transpose, singular_values, DensityMatrix, RMatrix};
use crate::normal_form::{filter_bipartition_to_fnf, FilterOptions};
use crate::tensor::{Bipartition, CorrelationTensor};
use crate::zoo::{ghz_mixture, random_biseparable, random_sfnf_fully_separable, rng_from_seed};

pub const PPT_TOL: f64 = 1e-10;

/// All `h`-subsets of `0..n` in lexicographic order.
pub fn lex_subsets(n: usize, h: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == h {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, h, &mut Vec::with_capacity(h), &mut out);
    out
}

/// Matrix of all `h x h` minors, rows and columns indexed by lexicographic subsets.
pub fn compound_matrix(m: &RMatrix, h: usize) -> Result<RMatrix> {
    if h == 0 || h > m.nrows().min(m.ncols()) {
        return Err(Error::InvalidArgument(format!(
            "compound order {h} out of range for a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let rows = lex_subsets(m.nrows(), h);
    let cols = lex_subsets(m.ncols(), h);
    Ok(RMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        m.select_rows(&rows[r])
            .select_columns(&cols[c])
            .determinant()
    }))
}

/// Schatten `p`-norm from the singular values.
pub fn schatten_norm(m: &RMatrix, p: SchattenP) -> f64 {
    let sigma = singular_values(m);
    match p {
        SchattenP::Infinity => sigma.first().copied().unwrap_or(0.0),
        SchattenP::One => sigma.iter().sum(),
        SchattenP::Finite(p) => sigma.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Smallest eigenvalue of the partial transpose over `side_b`.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    Ok(min_eigenvalue(&partial_transpose(rho, part.side_b())?))
}

/// Peres-Horodecki test across `part`.
pub fn ppt_check(rho: &DensityMatrix, part: &Bipartition) -> Result<bool> {
    Ok(ppt_min_eigenvalue(rho, part)? >= -PPT_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditFamily {
    /// Constructed fully separable states in strong filter normal form.
    #[serde(rename = "fully-separable")]
    FullySeparable,
    /// Random bi-separable states filtered to FNF across their cut.
    #[serde(rename = "bi-separable")]
    Biseparable,
    /// `p |GHZ><GHZ| + (1-p) 1/D`, filtered across the cut.
    #[serde(rename = "ghz-mixtures")]
    GhzMixtures,
}

impl AuditFamily {
    pub const ALL: [AuditFamily; 3] = [
        AuditFamily::FullySeparable,
        AuditFamily::Biseparable,
        AuditFamily::GhzMixtures,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AuditFamily::FullySeparable => "fully-separable",
            AuditFamily::Biseparable => "bi-separable",
            AuditFamily::GhzMixtures => "ghz-mixtures",
        }
    }
}

impl fmt::Display for AuditFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AuditFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fully-separable" | "fully-separable-sfnf" => Ok(AuditFamily::FullySeparable),
            "bi-separable" | "bi-separable-filtered" => Ok(AuditFamily::Biseparable),
            "ghz-mixtures" => Ok(AuditFamily::GhzMixtures),
            _ => Err(Error::InvalidArgument(format!(
                "unknown audit family '{s}'; available: {}",
                Self::ALL.map(|f| f.name()).join(", ")
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub family: AuditFamily,
    pub criterion: Criterion,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Minor order; `None` uses `d^2` of each matricization.
    pub h: Option<usize>,
    pub filter_options: FilterOptions,
}

impl AuditConfig {
    pub fn new(
        family: AuditFamily,
        criterion: Criterion,
        dims: Vec<usize>,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            family,
            criterion,
            dims,
            trials,
            seed,
            h: None,
            filter_options: FilterOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub family: AuditFamily,
    pub criterion: Criterion,
    pub dims: Vec<usize>,
    pub h: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub saturations: usize,
    pub inconclusive: usize,
    /// Largest `value - bound` seen; negative when every bound held.
    pub worst_margin: f64,
    /// Largest `(value - bound) / bound`.
    pub worst_relative_margin: f64,
    pub worst_trial: Option<usize>,
    /// Intermediate inequalities of the full-separability proof checked
    /// on fully separable samples.
    pub witness_checks: usize,
    pub witness_failures: usize,
}

struct Trial {
    report: Option<BoundReport>,
    witness_checks: usize,
    witness_failures: usize,
}

/// AM-GM and Schur-concavity steps that bound the CMN of an SFNF state by
/// the interior trace norm. Returns (checks, failures).
pub fn full_separability_witnesses(
    rho: &DensityMatrix,
    part: &Bipartition,
    h: usize,
) -> Result<(usize, usize)> {
    let t = CorrelationTensor::build(rho)?;
    let sigma_c = singular_values(&t.matricize(part)?);
    let m = sigma_c.len();
    if h < 2 || h > m {
        return Ok((0, 0));
    }
    let mut w = singular_values(&t.interior().matricize(part)?);
    w.resize(m - 1, 0.0);
    w.truncate(m - 1);
    let (alpha, _) = full_alpha_beta(t.dims());
    let slack = |rhs: f64| 1e-12 * rhs.abs().max(1e-300);
    let mut failures = 0;

    // prod of the top h-1 interior values <= their mean to the power h-1.
    let top = &w[..h - 1];
    let lhs: f64 = top.iter().product();
    let mean = top.iter().sum::<f64>() / (h - 1) as f64;
    let rhs = mean.powi((h - 1) as i32);
    if lhs > rhs + slack(rhs) {
        failures += 1;
    }

    // S_h(alpha, w) <= S_h(alpha, mean(w), ..., mean(w)).
    let mut xs = vec![alpha];
    xs.extend_from_slice(&w);
    let lhs = elementary_symmetric(h, &xs)?;
    let avg = w.iter().sum::<f64>() / w.len() as f64;
    let mut ys = vec![alpha];
    ys.extend(std::iter::repeat_n(avg, w.len()));
    let rhs = elementary_symmetric(h, &ys)?;
    if lhs > rhs + slack(rhs) {
        failures += 1;
    }
    Ok((2, failures))
}

fn run_trial(cfg: &AuditConfig, trial: usize) -> Result<Trial> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let parts = Bipartition::all(cfg.dims.len());
    let part = &parts[trial % parts.len()];
    let mut rng = rng_from_seed(seed ^ 0x5eed_a0d1);
    let mut witness = (0, 0);
    let report = match cfg.family {
        AuditFamily::FullySeparable => {
            let k = rng.random_range(1..=8);
            let rho = random_sfnf_fully_separable(&cfg.dims, k, seed)?;
            if matches!(cfg.criterion, Criterion::CmnFullInf | Criterion::CmnFullP1) {
                let (d_a, d_b) = part.side_dims(&cfg.dims);
                let h = cfg.h.unwrap_or(d_a.min(d_b).pow(2));
                witness = full_separability_witnesses(&rho, part, h)?;
            }
            Some(evaluate_criterion(
                &rho,
                part,
                cfg.criterion,
                cfg.h,
                false,
                &cfg.filter_options,
            )?)
        }
        AuditFamily::Biseparable | AuditFamily::GhzMixtures => {
            let rho = if cfg.family == AuditFamily::Biseparable {
                let (d_a, d_b) = part.side_dims(&cfg.dims);
                let k = d_a.max(d_b) + rng.random_range(0..=4);
                random_biseparable(&cfg.dims, part, k, seed)?
            } else {
                let d = cfg.dims[0];
                if cfg.dims.iter().any(|&x| x != d) {
                    return Err(Error::Unsupported(format!(
                        "GHZ mixtures need equal local dimensions, got {:?}",
                        cfg.dims
                    )));
                }
                ghz_mixture(cfg.dims.len(), d, rng.random::<f64>())?
            };
            match filter_bipartition_to_fnf(&rho, part, &cfg.filter_options) {
                Ok(out) => Some(evaluate_criterion(
                    &out.state,
                    part,
                    cfg.criterion,
                    cfg.h,
                    false,
                    &cfg.filter_options,
                )?),
                Err(Error::FilteringNotPossible { .. } | Error::FilteringNotConverged { .. }) => {
                    None
                }
                Err(e) => return Err(e),
            }
        }
    };
    Ok(Trial {
        report,
        witness_checks: witness.0,
        witness_failures: witness.1,
    })
}

/// Samples `trials` states from the family (trial `i` uses seed `seed + i`
/// and cycles through the bipartitions), applies the family's normal-form
/// preprocessing and compares the criterion against its bound.
pub fn separability_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    let outcomes: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<Result<_>>()?;
    let mut report = AuditReport {
        family: cfg.family,
        criterion: cfg.criterion,
        dims: cfg.dims.clone(),
        h: cfg.h,
        seed: cfg.seed,
        trials: cfg.trials,
        violations: 0,
        saturations: 0,
        inconclusive: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_relative_margin: f64::NEG_INFINITY,
        worst_trial: None,
        witness_checks: 0,
        witness_failures: 0,
    };
    for (i, trial) in outcomes.iter().enumerate() {
        report.witness_checks += trial.witness_checks;
        report.witness_failures += trial.witness_failures;
        let Some(r) = &trial.report else {
            report.inconclusive += 1;
            continue;
        };
        let (Some(value), Some(bound)) = (r.value, r.bound) else {
            report.inconclusive += 1;
            continue;
        };
        match compare(value, bound) {
            Verdict::Violated => report.violations += 1,
            Verdict::Saturated => report.saturations += 1,
            _ => {}
        }
        let margin = value - bound;
        if margin > report.worst_margin {
            report.worst_margin = margin;
            report.worst_trial = Some(i);
        }
        report.worst_relative_margin = report.worst_relative_margin.max(margin / bound.abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn compound_edge_cases() {
        let m = RMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        assert_eq!(compound_matrix(&m, 1).unwrap(), m);
        let top = compound_matrix(&m, 3).unwrap();
        assert_eq!(top.shape(), (1, 1));
        assert!((top[(0, 0)] - m.determinant()).abs() < 1e-12);
        assert!(compound_matrix(&m, 4).is_err());
        assert_eq!(
            lex_subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn ppt_on_textbook_states() {
        let part = Bipartition::new(2, &[0]).unwrap();
        assert!(!ppt_check(&zoo::bell(1).unwrap().projector(), &part).unwrap());
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(ppt_check(&mixed, &part).unwrap());
    }

    #[test]
    fn family_names_parse() {
        for f in AuditFamily::ALL {
            assert_eq!(f.name().parse::<AuditFamily>().unwrap(), f);
        }
        assert!("nope".parse::<AuditFamily>().is_err());
    }

    #[test]
    fn small_full_audit_is_clean() {
        let cfg = AuditConfig::new(
            AuditFamily::FullySeparable,
            Criterion::CmnFullInf,
            vec![2, 2, 2],
            30,
            1,
        );
        let r = separability_audit(&cfg).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.inconclusive, 0);
        assert!(r.witness_checks > 0);
        assert_eq!(r.witness_failures, 0);
    }
}
