//! Detection pipeline: every matricization is checked against the CMN and
//! interior trace-norm bounds, then (optionally) every reduced state of two
//! or more parties is analyzed the same way.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bisep_bound_inf, bisep_bound_p1, bisep_p1_is_tight, compare, dvh_bisep_bound_3qubit,
    dvh_fullsep_bound, dvh_interior_sum, fullsep_bound_inf, fullsep_bound_p1, BoundResult, Verdict,
};
use crate::cmn::{cmn, CmnParams, SchattenP};
use crate::error::Result;
use crate::linalg::{partial_trace, DensityMatrix, RMatrix};
use crate::normal_form::{
    filter_bipartition_to_fnf, is_fnf, is_sfnf, normal_form_status, FilterOptions, NormalFormStatus,
};
use crate::tensor::{party_label, Bipartition, CorrelationTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "cmn-bisep-inf")]
    CmnBisepInf,
    #[serde(rename = "cmn-bisep-p1")]
    CmnBisepP1,
    #[serde(rename = "cmn-full-inf")]
    CmnFullInf,
    #[serde(rename = "cmn-full-p1")]
    CmnFullP1,
    #[serde(rename = "dvh-full")]
    DvhFull,
    #[serde(rename = "dvh-bisep")]
    DvhBisep,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::CmnBisepInf,
        Criterion::CmnBisepP1,
        Criterion::CmnFullInf,
        Criterion::CmnFullP1,
        Criterion::DvhFull,
        Criterion::DvhBisep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::CmnBisepInf => "cmn-bisep-inf",
            Criterion::CmnBisepP1 => "cmn-bisep-p1",
            Criterion::CmnFullInf => "cmn-full-inf",
            Criterion::CmnFullP1 => "cmn-full-p1",
            Criterion::DvhFull => "dvh-full",
            Criterion::DvhBisep => "dvh-bisep",
        }
    }

    pub fn parse(name: &str) -> Option<Criterion> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Bounds that only hold for states bi-separable across the cut.
    pub fn is_biseparable(&self) -> bool {
        matches!(
            self,
            Criterion::CmnBisepInf | Criterion::CmnBisepP1 | Criterion::DvhBisep
        )
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value-versus-bound comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub partition: String,
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    pub criterion: Criterion,
    pub h: Option<usize>,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    pub violated: bool,
    pub saturated: bool,
    pub preconditions_met: bool,
    pub reason: Option<String>,
    /// Value computed on the state after local filtering across the cut.
    pub filtered: bool,
}

impl BoundReport {
    fn new(part: &Bipartition, names: &[usize], criterion: Criterion, h: Option<usize>) -> Self {
        let map = |side: &[usize]| side.iter().map(|&k| names[k]).collect::<Vec<_>>();
        Self {
            partition: label(part, names),
            side_a: map(part.side_a()),
            side_b: map(part.side_b()),
            criterion,
            h,
            value: None,
            bound: None,
            verdict: Verdict::Inconclusive,
            violated: false,
            saturated: false,
            preconditions_met: false,
            reason: None,
            filtered: false,
        }
    }

    fn inconclusive(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    fn compared(mut self, value: f64, bound: BoundResult) -> Self {
        self.value = Some(value);
        match bound {
            Ok(b) => {
                self.bound = Some(b);
                self.preconditions_met = true;
                self.verdict = compare(value, b);
                self.violated = self.verdict == Verdict::Violated;
                self.saturated = self.verdict == Verdict::Saturated;
            }
            Err(why) => self.reason = Some(why.reason),
        }
        self
    }

    fn note(mut self, note: &str) -> Self {
        self.reason = Some(match self.reason.take() {
            Some(r) => format!("{r}; {note}"),
            None => note.to_string(),
        });
        self
    }
}

fn label(part: &Bipartition, names: &[usize]) -> String {
    let side = |s: &[usize]| s.iter().map(|&k| party_label(names[k])).collect::<String>();
    format!("{}|{}", side(part.side_a()), side(part.side_b()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectConfig {
    /// Minor order; `None` uses `h = d^2` for each matricization.
    pub h: Option<usize>,
    pub ps: Vec<SchattenP>,
    /// Filter to FNF across a cut when the state is not already there.
    pub filter: bool,
    /// Also analyze every reduced state of two or more parties.
    pub recursive: bool,
    /// Tolerance for the FNF/SFNF predicates.
    pub normal_form_tol: f64,
    pub filter_options: FilterOptions,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            h: None,
            ps: vec![SchattenP::Infinity, SchattenP::One],
            filter: false,
            recursive: false,
            normal_form_tol: 1e-8,
            filter_options: FilterOptions::default(),
        }
    }
}

impl DetectConfig {
    /// Filtering and reduced-state recursion both enabled.
    pub fn full_scheme() -> Self {
        Self {
            filter: true,
            recursive: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedStateReport {
    /// Original party indices kept in the reduction.
    pub parties: Vec<usize>,
    pub label: String,
    pub partition_reports: Vec<BoundReport>,
    pub interior_reports: Vec<BoundReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub not_fully_separable: bool,
    pub bi_entangled_partitions: Vec<String>,
    /// `criterion@partition` for every violated report, reduced states
    /// prefixed by their party label.
    pub fired: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub dims: Vec<usize>,
    pub normal_form: NormalFormStatus,
    pub partition_reports: Vec<BoundReport>,
    pub interior_reports: Vec<BoundReport>,
    pub reduced_states: Vec<ReducedStateReport>,
    pub summary: DetectionSummary,
}

impl DetectionVerdict {
    pub fn reports(&self) -> impl Iterator<Item = &BoundReport> {
        self.partition_reports.iter().chain(&self.interior_reports)
    }
}

fn criterion_for(p: SchattenP, bisep: bool) -> Option<Criterion> {
    match (p, bisep) {
        (SchattenP::Infinity, true) => Some(Criterion::CmnBisepInf),
        (SchattenP::One, true) => Some(Criterion::CmnBisepP1),
        (SchattenP::Infinity, false) => Some(Criterion::CmnFullInf),
        (SchattenP::One, false) => Some(Criterion::CmnFullP1),
        (SchattenP::Finite(_), _) => None,
    }
}

struct Analysis {
    partition_reports: Vec<BoundReport>,
    interior_reports: Vec<BoundReport>,
}

fn cmn_report(
    base: BoundReport,
    m: &RMatrix,
    h: usize,
    p: SchattenP,
    bound: impl FnOnce() -> BoundResult,
) -> BoundReport {
    let params = match CmnParams::new(h, p) {
        Ok(params) => params,
        Err(e) => return base.inconclusive(e.to_string()),
    };
    match cmn(m, &params) {
        Ok(value) => base.compared(value, bound()),
        Err(e) => base.inconclusive(e.to_string()),
    }
}

fn analyze_partition(
    rho: &DensityMatrix,
    t: &CorrelationTensor,
    part: &Bipartition,
    names: &[usize],
    cfg: &DetectConfig,
    filter: bool,
) -> Result<Analysis> {
    let dims = rho.dims();
    let (d_a, d_b) = part.side_dims(dims);
    let d2 = d_a.min(d_b).pow(2);
    let hs: Vec<usize> = cfg.h.map_or_else(|| vec![d2], |h| vec![h]);
    let mut partition_reports = Vec::new();

    // Bi-separable CMN bounds need FNF across the cut, reached by filtering if allowed.
    let bisep_tensor: std::result::Result<(CorrelationTensor, bool), String> =
        if is_fnf(t, part, cfg.normal_form_tol)? {
            Ok((t.clone(), false))
        } else if filter {
            match filter_bipartition_to_fnf(rho, part, &cfg.filter_options) {
                Ok(out) => CorrelationTensor::build(&out.state)
                    .map(|t| (t, true))
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            }
        } else {
            Err(format!(
                "state is not in filter normal form across {}",
                label(part, names)
            ))
        };
    let bisep_matrix = match &bisep_tensor {
        Ok((tf, filtered)) => Ok((tf.matricize(part)?, *filtered)),
        Err(reason) => Err(reason.clone()),
    };
    let sfnf = is_sfnf(t, cfg.normal_form_tol);
    let full_matrix = t.matricize(part)?;

    for &p in &cfg.ps {
        for &h in &hs {
            for bisep in [true, false] {
                let Some(criterion) = criterion_for(p, bisep) else {
                    let crit = if bisep {
                        Criterion::CmnBisepP1
                    } else {
                        Criterion::CmnFullP1
                    };
                    partition_reports.push(
                        BoundReport::new(part, names, crit, Some(h))
                            .inconclusive(format!("no closed-form bound for p = {p}")),
                    );
                    continue;
                };
                let base = BoundReport::new(part, names, criterion, Some(h));
                let report = if bisep {
                    match &bisep_matrix {
                        Ok((m, filtered)) => {
                            let mut r = match p {
                                SchattenP::Infinity => {
                                    cmn_report(base, m, h, p, || bisep_bound_inf(d_a, d_b, h))
                                }
                                _ => {
                                    let r =
                                        cmn_report(base, m, h, p, || bisep_bound_p1(d_a, d_b, h));
                                    if bisep_p1_is_tight(d_a, d_b) {
                                        r
                                    } else {
                                        r.note("bound not tight: max(d_A, d_B) > min(d_A, d_B)^3")
                                    }
                                }
                            };
                            r.filtered = *filtered;
                            r
                        }
                        Err(reason) => base.inconclusive(reason.clone()),
                    }
                } else if !sfnf {
                    base.inconclusive("state is not in strong filter normal form")
                } else {
                    match p {
                        SchattenP::Infinity => {
                            cmn_report(base, &full_matrix, h, p, || fullsep_bound_inf(dims, h))
                        }
                        _ => cmn_report(base, &full_matrix, h, p, || {
                            fullsep_bound_p1(dims, (d_a, d_b), h)
                        }),
                    }
                };
                partition_reports.push(report);
            }
        }
    }

    let w = t.interior().matricize(part)?;
    let interior_sum = dvh_interior_sum(&w);
    let mut interior_reports = vec![BoundReport::new(part, names, Criterion::DvhFull, None)
        .compared(interior_sum, Ok(dvh_fullsep_bound(dims)))];
    let bisep = BoundReport::new(part, names, Criterion::DvhBisep, None);
    interior_reports.push(match dvh_bisep_bound_3qubit(dims) {
        Ok(bound) => bisep.compared(interior_sum, Ok(bound)),
        Err(e) => {
            let mut r = bisep.inconclusive(e.to_string());
            r.value = Some(interior_sum);
            r
        }
    });
    Ok(Analysis {
        partition_reports,
        interior_reports,
    })
}

fn analyze_state(
    rho: &DensityMatrix,
    names: &[usize],
    cfg: &DetectConfig,
    filter: bool,
) -> Result<(CorrelationTensor, Analysis)> {
    let t = CorrelationTensor::build(rho)?;
    let parts = Bipartition::all(rho.n_parties());
    let analyses: Vec<Analysis> = parts
        .par_iter()
        .map(|part| analyze_partition(rho, &t, part, names, cfg, filter))
        .collect::<Result<_>>()?;
    let mut merged = Analysis {
        partition_reports: Vec::new(),
        interior_reports: Vec::new(),
    };
    for a in analyses {
        merged.partition_reports.extend(a.partition_reports);
        merged.interior_reports.extend(a.interior_reports);
    }
    Ok((t, merged))
}

/// Evaluates one criterion on one matricization. Bi-separable CMN criteria
/// filter across the cut first when `filter` is set.
pub fn evaluate_criterion(
    rho: &DensityMatrix,
    part: &Bipartition,
    criterion: Criterion,
    h: Option<usize>,
    filter: bool,
    opts: &FilterOptions,
) -> Result<BoundReport> {
    let p = match criterion {
        Criterion::CmnBisepInf | Criterion::CmnFullInf => SchattenP::Infinity,
        _ => SchattenP::One,
    };
    let cfg = DetectConfig {
        h,
        ps: vec![p],
        filter,
        recursive: false,
        filter_options: *opts,
        ..DetectConfig::default()
    };
    let names: Vec<usize> = (0..rho.n_parties()).collect();
    let t = CorrelationTensor::build(rho)?;
    let a = analyze_partition(
        rho,
        &t,
        part,
        &names,
        &cfg,
        filter && criterion.is_biseparable(),
    )?;
    Ok(a.partition_reports
        .into_iter()
        .chain(a.interior_reports)
        .find(|r| r.criterion == criterion)
        .expect("every criterion is reported"))
}

/// Every subset of `0..n` with between 2 and `n - 1` members, largest first.
fn reduced_party_sets(n: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0u64..(1 << n))
        .filter(|m| {
            let c = m.count_ones() as usize;
            c >= 2 && c < n
        })
        .map(|m| (0..n).filter(|k| m >> k & 1 == 1).collect())
        .collect();
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sets
}

pub fn detect(rho: &DensityMatrix, cfg: &DetectConfig) -> Result<DetectionVerdict> {
    let n = rho.n_parties();
    let names: Vec<usize> = (0..n).collect();
    let (t, top) = if n >= 2 {
        analyze_state(rho, &names, cfg, cfg.filter)?
    } else {
        (
            CorrelationTensor::build(rho)?,
            Analysis {
                partition_reports: Vec::new(),
                interior_reports: Vec::new(),
            },
        )
    };
    let normal_form = normal_form_status(&t, cfg.normal_form_tol)?;

    let mut reduced_states = Vec::new();
    if cfg.recursive && n >= 3 {
        let sets = reduced_party_sets(n);
        reduced_states = sets
            .par_iter()
            .map(|keep| -> Result<ReducedStateReport> {
                let reduced = partial_trace(rho, keep)?;
                // Reduced states are always filtered when their reductions allow it.
                let (_, a) = analyze_state(&reduced, keep, cfg, true)?;
                Ok(ReducedStateReport {
                    parties: keep.clone(),
                    label: keep.iter().map(|&k| party_label(k)).collect(),
                    partition_reports: a.partition_reports,
                    interior_reports: a.interior_reports,
                })
            })
            .collect::<Result<_>>()?;
    }

    let mut fired = Vec::new();
    let mut bi_entangled_partitions: Vec<String> = Vec::new();
    for r in top.partition_reports.iter().chain(&top.interior_reports) {
        if r.violated {
            fired.push(format!("{}@{}", r.criterion, r.partition));
            if r.criterion.is_biseparable() && !bi_entangled_partitions.contains(&r.partition) {
                bi_entangled_partitions.push(r.partition.clone());
            }
        }
    }
    for red in &reduced_states {
        for r in red.partition_reports.iter().chain(&red.interior_reports) {
            if r.violated {
                fired.push(format!("{}:{}@{}", red.label, r.criterion, r.partition));
            }
        }
    }
    let summary = DetectionSummary {
        not_fully_separable: !fired.is_empty(),
        bi_entangled_partitions,
        fired,
    };
    Ok(DetectionVerdict {
        dims: rho.dims().to_vec(),
        normal_form,
        partition_reports: top.partition_reports,
        interior_reports: top.interior_reports,
        reduced_states,
        summary,
    })
}
