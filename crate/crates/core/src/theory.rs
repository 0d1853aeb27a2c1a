//! Closed-form and limit predictions for G(N, K, p).
//!
//! Exact finite-N moments of the isolated count, the connectivity limit, the
//! rank-1 limit kernel `(c/u) i j`, the giant-component threshold and fixed
//! point, and the mixed Poisson degree law.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::config::{LimitProfile, SizeConfiguration};
use crate::sampler::edge_probability;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// `|u - 1|` below this counts as `u = 1` when picking the connectivity clause.
pub const UNIT_MEAN_SIZE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `(1-p)^e` from `ln(1-p)`, with `0^0 = 1`.
fn pow_complement(ln_q: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        (exponent * ln_q).exp()
    }
}

fn check_probability(p: f64) -> Result<(), TheoryError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(TheoryError::InvalidArgument(format!(
            "p = {p} is not in [0, 1]"
        )))
    }
}

/// `E[X] = sum_i k_i (1-p)^(i(n-i))`, X the number of isolated super-vertices.
pub fn expected_isolated(config: &SizeConfiguration, p: f64) -> Result<f64, TheoryError> {
    check_probability(p)?;
    let n = config.n_vertices() as f64;
    let ln_q = (-p).ln_1p();
    Ok(config
        .iter()
        .map(|(i, k)| {
            let i = i as f64;
            k as f64 * pow_complement(ln_q, i * (n - i))
        })
        .sum())
}

/// Exact `Var[X]`.
///
/// Evaluated as the sum over single super-vertices of `a_i (1 - a_i)`, with
/// `a_i = (1-p)^(i(n-i))`, plus the covariance of every ordered pair of
/// distinct super-vertices, `(1-p)^(i(n-i) + j(n-j) - ij) (1 - (1-p)^(ij))`.
/// Expanding gives
/// `E[X] + sum_{i,j} k_i k_j (1-p)^(i(n-i)+j(n-j)) [(1-p)^(-ij) - 1]
///  - sum_i k_i (1-p)^(2i(n-i) - i^2)`,
/// but this arrangement keeps every exponent nonnegative, so no term blows up
/// as `p -> 1`, and the powers stay in log space.
pub fn variance_isolated(config: &SizeConfiguration, p: f64) -> Result<f64, TheoryError> {
    check_probability(p)?;
    if p == 1.0 {
        // X is deterministic: 0 for N >= 2, 1 for N = 1
        return Ok(0.0);
    }
    let n = config.n_vertices() as f64;
    let ln_q = (-p).ln_1p();
    let classes: Vec<(f64, f64, f64)> = config
        .iter()
        .map(|(i, k)| {
            let i_f = i as f64;
            (i_f, k as f64, i_f * (n - i_f))
        })
        .collect();

    let mut var = 0.0;
    for &(_, k, e) in &classes {
        let a = pow_complement(ln_q, e);
        var += k * a * (1.0 - a);
    }
    for (ai, &(i, ki, ei)) in classes.iter().enumerate() {
        for (aj, &(j, kj, ej)) in classes.iter().enumerate() {
            let pairs = if ai == aj { ki * (ki - 1.0) } else { ki * kj };
            if pairs == 0.0 {
                continue;
            }
            let joint = pow_complement(ln_q, ei + ej - i * j);
            var += pairs * joint * edge_probability(i as u64, j as u64, p);
        }
    }
    Ok(var)
}

/// Which clause of the connectivity limit applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "c", rename_all = "snake_case")]
pub enum ConnectivityRegime {
    /// `c = c(N) -> -inf`.
    CToMinusInfinity,
    /// `c` fixed.
    FixedC(f64),
    /// `c = c(N) -> +inf`.
    CToPlusInfinity,
}

/// Limit of `P[G(N, K, p) connected]` for `p = (ln N + c)/N`: 0 when
/// `c -> -inf`, `exp(-exp(-c))` for fixed `c` and `u = 1`, and 1 for fixed
/// `c` with `u > 1` or when `c -> +inf`.
pub fn limit_connectivity_probability(
    regime: ConnectivityRegime,
    u: f64,
) -> Result<f64, TheoryError> {
    if !(u >= 1.0 - UNIT_MEAN_SIZE_TOLERANCE) {
        return Err(TheoryError::InvalidArgument(format!(
            "mean size u = {u} < 1"
        )));
    }
    Ok(match regime {
        ConnectivityRegime::CToMinusInfinity => 0.0,
        ConnectivityRegime::CToPlusInfinity => 1.0,
        ConnectivityRegime::FixedC(c) if (u - 1.0).abs() <= UNIT_MEAN_SIZE_TOLERANCE => {
            (-(-c).exp()).exp()
        }
        ConnectivityRegime::FixedC(_) => 1.0,
    })
}

/// `kappa(i, j) = (c/u) i j`.
pub fn limit_kernel(i: u64, j: u64, c: f64, u: f64) -> f64 {
    c / u * i as f64 * j as f64
}

/// `c* = 1 / s2`: the giant component exists iff `c > c*`.
pub fn critical_threshold(profile: &LimitProfile) -> f64 {
    1.0 / profile.s2
}

/// `c s2 > 1`, with the boundary counted as subcritical.
pub fn is_supercritical(profile: &LimitProfile, c: f64) -> bool {
    c > critical_threshold(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantSolution {
    /// Survival probability of a size-`i` super-vertex.
    pub rho_by_size: BTreeMap<u64, f64>,
    /// `sum_i rho(i) mu_i`, the limit of `L1 / N`.
    pub rho: f64,
    pub iterations: usize,
    /// `|F(S) - S|` at the returned point.
    pub residual: f64,
}

/// Giant-component fraction from the fixed point of `f = 1 - exp(-T f)`,
/// where `T` is the integral operator of the kernel `(c/u) i j` on the size
/// profile.
///
/// The kernel is rank one, so `f(i) = 1 - exp(-(c i / u) S)` with the scalar
/// `S = sum_j j mu_j f(j)`. We iterate `S <- sum_j j mu_j (1 - exp(-(c j/u) S))`
/// down from `S = u`, which converges monotonically to the largest fixed
/// point. Subcritical `c` returns exactly zero.
pub fn solve_giant_fraction(
    profile: &LimitProfile,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GiantSolution, TheoryError> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(TheoryError::InvalidArgument(format!(
            "c = {c} must be finite and >= 0"
        )));
    }
    if !(tol > 0.0) {
        return Err(TheoryError::InvalidArgument(format!(
            "tol = {tol} must be > 0"
        )));
    }
    if !is_supercritical(profile, c) {
        return Ok(GiantSolution {
            rho_by_size: profile.mu.keys().map(|&i| (i, 0.0)).collect(),
            rho: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    let scale = c / profile.u;
    let step = |s: f64| -> f64 {
        profile
            .mu
            .iter()
            .map(|(&j, &m)| {
                let j = j as f64;
                j * m * -(-scale * j * s).exp_m1()
            })
            .sum()
    };

    let mut s = profile.u;
    let mut iterations = 0;
    loop {
        let next = step(s);
        iterations += 1;
        let delta = (next - s).abs();
        s = next;
        if delta <= tol {
            break;
        }
        if iterations >= max_iter {
            return Err(TheoryError::NonConvergence {
                iterations,
                residual: delta,
            });
        }
    }
    let residual = (step(s) - s).abs();
    let rho_by_size: BTreeMap<u64, f64> = profile
        .mu
        .keys()
        .map(|&i| (i, -(-scale * i as f64 * s).exp_m1()))
        .collect();
    let rho = profile.mu.iter().map(|(i, m)| rho_by_size[i] * m).sum();
    Ok(GiantSolution {
        rho_by_size,
        rho,
        iterations,
        residual,
    })
}

/// `P(Po(lambda) = k)` in log space.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k_f = k as f64;
    (k_f * lambda.ln() - lambda - ln_gamma(k_f + 1.0)).exp()
}

/// `P(Xi = k) = sum_i mu_i P(Po(i c) = k)`.
pub fn mixed_poisson_pmf(profile: &LimitProfile, c: f64, k: u64) -> f64 {
    profile
        .mu
        .iter()
        .map(|(&i, &m)| m * poisson_pmf(i as f64 * c, k))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// `P(Xi >= k) = 1 - sum_{j<k} P(Xi = j)`.
pub fn mixed_poisson_tail(profile: &LimitProfile, c: f64, k: u64) -> f64 {
    let head: f64 = (0..k).map(|j| mixed_poisson_pmf(profile, c, j)).sum();
    (1.0 - head).clamp(0.0, 1.0)
}

/// Smallest `k` with `P(Xi >= k) < eps`.
pub fn degree_truncation(profile: &LimitProfile, c: f64, eps: f64) -> u64 {
    let mut head = 0.0;
    let mut k = 0;
    while 1.0 - head >= eps {
        head += mixed_poisson_pmf(profile, c, k);
        k += 1;
        // the mixture mean is c u, so this bound is never reached in practice
        if k > 100 + (100.0 * c * profile.max_size() as f64) as u64 {
            break;
        }
    }
    k
}

/// `[P(Xi = 0), ..., P(Xi = k_max)]`.
pub fn degree_pmf(profile: &LimitProfile, c: f64, k_max: u64) -> Vec<f64> {
    (0..=k_max)
        .map(|k| mixed_poisson_pmf(profile, c, k))
        .collect()
}
