//! Repeated-sampling experiments and their comparison with theory.
//!
//! Trial `t` samples with the child seed `seed.child(t)`, so trials can run on
//! any number of workers. Results are collected in trial order and reduced
//! sequentially, which keeps reports bit-identical across thread counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SizeConfiguration;
use crate::graph::{connected_components, degree_histogram};
use crate::rng::Seed;
use crate::sampler::{resolve_p, sample_direct, ModelParams, Regime, SamplerError};
use crate::theory::{
    self, expected_isolated, limit_connectivity_probability, poisson_pmf, variance_isolated,
    ConnectivityRegime, TheoryError,
};

/// Theoretical tail mass below which degrees are lumped into one bucket.
pub const DEGREE_TAIL_EPS: f64 = 1e-9;
/// Runs with at least this many trials check the isolated-count mean.
pub const SANITY_MIN_TRIALS: u64 = 500;
/// Allowed distance of the isolated-count mean from `E[X]`, in standard errors.
pub const SANITY_STANDARD_ERRORS: f64 = 4.0;

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("trials must be >= 1")]
    NoTrials,
    #[error(transparent)]
    Params(#[from] SamplerError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("pmf has invalid mass at index {index}: {value}")]
    NegativeMass { index: usize, value: f64 },
    #[error("pmf total mass {0} exceeds 1")]
    ExcessMass(f64),
    #[error(
        "sanity check failed: mean isolated count {mean} is {distance:.2} standard errors \
         (se {standard_error:e}) from E[X] = {expected} over {trials} trials"
    )]
    SanityCheck {
        mean: f64,
        expected: f64,
        standard_error: f64,
        distance: f64,
        trials: u64,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Connectivity,
    Giant,
    Degree,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Connectivity => "connectivity",
            ExperimentKind::Giant => "giant",
            ExperimentKind::Degree => "degree",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "connectivity" => Ok(ExperimentKind::Connectivity),
            "giant" => Ok(ExperimentKind::Giant),
            "degree" => Ok(ExperimentKind::Degree),
            _ => Err(format!("unknown experiment {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: SizeConfiguration,
    pub regime: Regime,
    pub c: f64,
    pub trials: u64,
    pub seed: Seed,
    pub experiment: ExperimentKind,
}

impl ExperimentPlan {
    pub fn resolve(&self) -> Result<ModelParams, MonteCarloError> {
        if self.trials == 0 {
            return Err(MonteCarloError::NoTrials);
        }
        Ok(resolve_p(self.regime, self.c, &self.config)?)
    }
}

/// A Monte Carlo estimate. `standard_error` is `sample_std / sqrt(trials)`
/// for means; it is absent for derived statistics such as distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: Option<f64>,
    pub trials: u64,
}

/// An empirical pmf (or tail function) indexed by `k`, optionally paired with
/// its prediction. A trailing lumped bucket is described by `lumped_from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub empirical: Vec<f64>,
    pub theory: Option<Vec<f64>>,
    pub lumped_from: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    #[serde(rename = "N")]
    pub n_super: u64,
    #[serde(rename = "n")]
    pub n_vertices: u64,
    pub config: String,
    pub regime: Regime,
    pub c: f64,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub wall_time: f64,
}

/// Per-trial observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub connected: bool,
    pub isolated: u64,
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub estimates: BTreeMap<String, Estimate>,
    pub theory: BTreeMap<String, f64>,
    pub distributions: BTreeMap<String, Distribution>,
    pub meta: ReportMeta,
    #[serde(skip)]
    pub trial_records: Vec<TrialRecord>,
}

/// `(1/2) sum_k |a_k - b_k|`, missing entries read as zero.
pub fn total_variation(a: &[f64], b: &[f64]) -> Result<f64, MonteCarloError> {
    for pmf in [a, b] {
        if let Some((index, &value)) = pmf
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(MonteCarloError::NegativeMass { index, value });
        }
        let total: f64 = pmf.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(MonteCarloError::ExcessMass(total));
        }
    }
    let len = a.len().max(b.len());
    let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let l1: f64 = (0..len).map(|k| (get(a, k) - get(b, k)).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

struct TrialOutcome {
    record: TrialRecord,
    degrees: Option<BTreeMap<usize, u64>>,
}

fn run_trials(
    plan: &ExperimentPlan,
    params: &ModelParams,
    want_degrees: bool,
) -> Vec<TrialOutcome> {
    (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let g = sample_direct(&plan.config, params, plan.seed.child(t));
            let summary = connected_components(&g);
            TrialOutcome {
                record: TrialRecord {
                    trial: t,
                    connected: summary.is_connected(),
                    isolated: summary.isolated_count as u64,
                    l1: summary.largest(1) as u64,
                    l2: summary.largest(2) as u64,
                },
                degrees: want_degrees.then(|| degree_histogram(&g)),
            }
        })
        .collect()
}

/// Sample mean, unbiased sample variance and `sqrt(var / T)`.
struct Moments {
    mean: f64,
    var: f64,
    se: f64,
    /// Standard error of `var`, from the fourth central moment.
    var_se: f64,
}

fn moments(xs: &[f64]) -> Moments {
    let t = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / t;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / t;
    let var = if xs.len() > 1 {
        m2 * t / (t - 1.0)
    } else {
        0.0
    };
    Moments {
        mean,
        var,
        se: (var / t).sqrt(),
        var_se: ((m4 - m2 * m2).max(0.0) / t).sqrt(),
    }
}

fn mean_estimate(xs: &[f64]) -> Estimate {
    let m = moments(xs);
    Estimate {
        value: m.mean,
        standard_error: Some(m.se),
        trials: xs.len() as u64,
    }
}

/// `c` such that `p = (ln N + c) / N`.
fn connectivity_c(params: &ModelParams, n_super: u64) -> f64 {
    match params.regime {
        Regime::Connectivity => params.c,
        _ => params.p * n_super as f64 - (n_super as f64).ln(),
    }
}

/// `c` such that `p = c / n`.
fn sparse_c(params: &ModelParams, n_vertices: u64) -> f64 {
    match params.regime {
        Regime::Sparse => params.c,
        _ => params.p * n_vertices as f64,
    }
}

fn empirical_pmf(values: impl Iterator<Item = u64>, trials: u64) -> Vec<f64> {
    let mut counts: Vec<u64> = Vec::new();
    for v in values {
        let v = v as usize;
        if v >= counts.len() {
            counts.resize(v + 1, 0);
        }
        counts[v] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / trials as f64)
        .collect()
}

/// Runs the plan's experiment on a pool of `threads` workers (all cores when
/// `None`).
pub fn run_experiment(
    plan: &ExperimentPlan,
    threads: Option<usize>,
) -> Result<ExperimentReport, MonteCarloError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| MonteCarloError::ThreadPool(e.to_string()))?;
    pool.install(|| match plan.experiment {
        ExperimentKind::Connectivity => run_connectivity_experiment(plan),
        ExperimentKind::Giant => run_giant_experiment(plan),
        ExperimentKind::Degree => run_degree_experiment(plan),
    })
}

struct Common {
    params: ModelParams,
    outcomes: Vec<TrialOutcome>,
    estimates: BTreeMap<String, Estimate>,
    theory: BTreeMap<String, f64>,
    meta: ReportMeta,
    isolated: Vec<f64>,
}

fn run_common(plan: &ExperimentPlan, want_degrees: bool) -> Result<Common, MonteCarloError> {
    let params = plan.resolve()?;
    let started = Instant::now();
    let outcomes = run_trials(plan, &params, want_degrees);
    let wall_time = started.elapsed().as_secs_f64();

    let (n_super, n_vertices) = plan.config.derive_counts();
    let column = |f: fn(&TrialRecord) -> f64| -> Vec<f64> {
        outcomes.iter().map(|o| f(&o.record)).collect()
    };
    let big_n = n_super as f64;
    let connected = column(|r| if r.connected { 1.0 } else { 0.0 });
    let isolated = column(|r| r.isolated as f64);
    let l1: Vec<f64> = column(|r| r.l1 as f64).iter().map(|v| v / big_n).collect();
    let l2: Vec<f64> = column(|r| r.l2 as f64).iter().map(|v| v / big_n).collect();

    let mut estimates = BTreeMap::new();
    estimates.insert("P_connected".to_string(), mean_estimate(&connected));
    estimates.insert("isolated".to_string(), mean_estimate(&isolated));
    estimates.insert("L1".to_string(), mean_estimate(&l1));
    estimates.insert("L2".to_string(), mean_estimate(&l2));

    let mut theory = BTreeMap::new();
    let e_isolated = expected_isolated(&plan.config, params.p)?;
    let v_isolated = variance_isolated(&plan.config, params.p)?;
    theory.insert("E_isolated".to_string(), e_isolated);
    theory.insert("Var_isolated".to_string(), v_isolated);

    if plan.trials >= SANITY_MIN_TRIALS {
        let m = moments(&isolated);
        let theory_se = (v_isolated / plan.trials as f64).sqrt();
        let se = m.se.max(theory_se);
        let slack = 1e-9 * e_isolated.max(1.0);
        let gap = (m.mean - e_isolated).abs();
        if gap > SANITY_STANDARD_ERRORS * se + slack {
            return Err(MonteCarloError::SanityCheck {
                mean: m.mean,
                expected: e_isolated,
                standard_error: se,
                distance: gap / se,
                trials: plan.trials,
            });
        }
    }

    let meta = ReportMeta {
        n_super,
        n_vertices,
        config: plan.config.to_inline(),
        regime: params.regime,
        c: params.c,
        p: params.p,
        trials: plan.trials,
        seed: plan.seed.0,
        wall_time,
    };
    Ok(Common {
        params,
        outcomes,
        estimates,
        theory,
        meta,
        isolated,
    })
}

fn finish(
    plan: &ExperimentPlan,
    common: Common,
    distributions: BTreeMap<String, Distribution>,
) -> ExperimentReport {
    ExperimentReport {
        experiment: plan.experiment,
        estimates: common.estimates,
        theory: common.theory,
        distributions,
        meta: common.meta,
        trial_records: common.outcomes.into_iter().map(|o| o.record).collect(),
    }
}

/// Connectivity probability and the law of the isolated count X, against the
/// connectivity limit and Poisson(E[X]).
pub fn run_connectivity_experiment(
    plan: &ExperimentPlan,
) -> Result<ExperimentReport, MonteCarloError> {
    let mut common = run_common(plan, false)?;
    let profile = plan.config.empirical_profile();
    let c = connectivity_c(&common.params, common.meta.n_super);
    common.theory.insert("c".to_string(), c);
    common.theory.insert("exp_minus_c".to_string(), (-c).exp());
    common.theory.insert(
        "P_connected_limit".to_string(),
        limit_connectivity_probability(ConnectivityRegime::FixedC(c), profile.u)?,
    );

    let m = moments(&common.isolated);
    common.estimates.insert(
        "isolated_var".to_string(),
        Estimate {
            value: m.var,
            standard_error: Some(m.var_se),
            trials: plan.trials,
        },
    );

    let lambda = common.theory["E_isolated"];
    let pmf = empirical_pmf(
        common.outcomes.iter().map(|o| o.record.isolated),
        plan.trials,
    );
    let mut predicted: Vec<f64> = (0..pmf.len() as u64)
        .map(|k| poisson_pmf(lambda, k))
        .collect();
    let covered: f64 = predicted.iter().sum();
    // Poisson mass beyond the largest observed count, as one extra bucket
    let mut lumped_emp = pmf.clone();
    lumped_emp.push(0.0);
    let mut lumped_th = predicted.clone();
    lumped_th.push((1.0 - covered).max(0.0));
    let tv = total_variation(&lumped_emp, &lumped_th)?;
    common.estimates.insert(
        "tv_isolated_poisson".to_string(),
        Estimate {
            value: tv,
            standard_error: None,
            trials: plan.trials,
        },
    );
    predicted.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));

    let mut distributions = BTreeMap::new();
    distributions.insert(
        "isolated".to_string(),
        Distribution {
            empirical: pmf,
            theory: Some(predicted),
            lumped_from: None,
        },
    );
    Ok(finish(plan, common, distributions))
}

/// Largest and second-largest component fractions against the fixed point.
pub fn run_giant_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport, MonteCarloError> {
    let mut common = run_common(plan, false)?;
    let profile = plan.config.empirical_profile();
    let c = sparse_c(&common.params, common.meta.n_vertices);
    let solution = theory::solve_giant_fraction(
        &profile,
        c,
        theory::DEFAULT_TOLERANCE,
        theory::DEFAULT_MAX_ITER,
    )?;
    common.theory.insert("c".to_string(), c);
    common
        .theory
        .insert("c_star".to_string(), theory::critical_threshold(&profile));
    common.theory.insert("rho".to_string(), solution.rho);
    for (size, rho) in &solution.rho_by_size {
        common.theory.insert(format!("rho_size_{size}"), *rho);
    }
    Ok(finish(plan, common, BTreeMap::new()))
}

/// Averaged degree pmf `Z_k / N` and tail `Z_{>=k} / N` against the mixed
/// Poisson law.
pub fn run_degree_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport, MonteCarloError> {
    let mut common = run_common(plan, true)?;
    let profile = plan.config.empirical_profile();
    let c = sparse_c(&common.params, common.meta.n_vertices);
    let k_max = theory::degree_truncation(&profile, c, DEGREE_TAIL_EPS);
    let bins = k_max as usize + 1;
    let big_n = common.meta.n_super as f64;

    // per-trial Z_k / N on 0..=k_max plus one lumped bucket
    let per_trial: Vec<Vec<f64>> = common
        .outcomes
        .iter()
        .map(|o| {
            let mut row = vec![0.0; bins + 1];
            for (&d, &z) in o.degrees.as_ref().expect("degree histogram") {
                row[d.min(bins)] += z as f64 / big_n;
            }
            row
        })
        .collect();
    let column = |k: usize| -> Vec<f64> { per_trial.iter().map(|r| r[k]).collect() };
    let empirical: Vec<f64> = (0..=bins).map(|k| moments(&column(k)).mean).collect();

    let mut predicted = theory::degree_pmf(&profile, c, k_max);
    predicted.push(theory::mixed_poisson_tail(&profile, c, k_max + 1));
    let tv = total_variation(&empirical, &predicted)?;

    common.theory.insert("c".to_string(), c);
    common.theory.insert("K_max".to_string(), k_max as f64);
    common.theory.insert("pmf_0".to_string(), predicted[0]);
    common
        .estimates
        .insert("pmf_0".to_string(), mean_estimate(&column(0)));
    common.estimates.insert(
        "tv_degree".to_string(),
        Estimate {
            value: tv,
            standard_error: None,
            trials: plan.trials,
        },
    );

    let mut tail_emp = vec![0.0; bins + 1];
    let mut acc = 0.0;
    for k in (0..=bins).rev() {
        acc += empirical[k];
        tail_emp[k] = acc.min(1.0);
    }
    let tail_th: Vec<f64> = (0..=bins as u64)
        .map(|k| theory::mixed_poisson_tail(&profile, c, k))
        .collect();
    let ratio: Vec<f64> = tail_emp
        .iter()
        .zip(&tail_th)
        .map(|(e, t)| if *t > 0.0 { e / t } else { 0.0 })
        .collect();

    let mut distributions = BTreeMap::new();
    distributions.insert(
        "degree_hist".to_string(),
        Distribution {
            empirical,
            theory: Some(predicted),
            lumped_from: Some(k_max + 1),
        },
    );
    distributions.insert(
        "degree_tail".to_string(),
        Distribution {
            empirical: tail_emp,
            theory: Some(tail_th),
            lumped_from: None,
        },
    );
    distributions.insert(
        "degree_tail_ratio".to_string(),
        Distribution {
            empirical: ratio,
            theory: None,
            lumped_from: None,
        },
    );
    Ok(finish(plan, common, distributions))
}
