//! Super-vertex size configurations and their scalar summaries.
//!
//! A configuration is the multiset of super-vertex sizes, stored sparsely as
//! `size -> count`. Everything the closed forms need (N, n, the size profile
//! `mu`, the mean size `u` and the size-biased mean `s2`) is derived here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for the profile identities (sum of `mu`, `u`, `s2`).
pub const PROFILE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("malformed configuration document: {0}")]
    Malformed(String),
    #[error("configuration is empty")]
    Empty,
    #[error("super-vertex size must be >= 1, got {0}")]
    InvalidSize(String),
    #[error("count for size {size} must be >= 1, got {count}")]
    InvalidCount { size: String, count: String },
    #[error("size {0} listed more than once")]
    DuplicateSize(u64),
    #[error("power-law exponent must be > 1, got {0}")]
    InvalidExponent(f64),
    #[error("max_size {max_size} must be in 1..={n_super}")]
    InvalidMaxSize { max_size: u64, n_super: u64 },
    #[error("profile weights must be nonnegative and sum to 1 (sum = {0})")]
    InvalidProfile(f64),
    #[error("configuration too large: {0}")]
    Overflow(&'static str),
}

/// The multiset K: how many super-vertices there are of each size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SizeConfiguration {
    counts: BTreeMap<u64, u64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigDocument {
    sizes: BTreeMap<String, serde_json::Value>,
}

impl SizeConfiguration {
    /// Builds a configuration from `(size, count)` pairs, rejecting zero
    /// sizes or counts and repeated sizes.
    pub fn new<I>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut counts = BTreeMap::new();
        for (size, count) in pairs {
            if size == 0 {
                return Err(ConfigError::InvalidSize(size.to_string()));
            }
            if count == 0 {
                return Err(ConfigError::InvalidCount {
                    size: size.to_string(),
                    count: count.to_string(),
                });
            }
            if counts.insert(size, count).is_some() {
                return Err(ConfigError::DuplicateSize(size));
            }
        }
        let config = SizeConfiguration { counts };
        config.check_totals()?;
        Ok(config)
    }

    /// `n0` super-vertices of size 1, i.e. plain G(n0, p).
    pub fn homogeneous(n0: u64) -> Result<Self, ConfigError> {
        Self::new([(1, n0)])
    }

    fn check_totals(&self) -> Result<(), ConfigError> {
        if self.counts.is_empty() {
            return Err(ConfigError::Empty);
        }
        let mut n_super: u64 = 0;
        let mut n_vertices: u64 = 0;
        for (&size, &count) in &self.counts {
            n_super = n_super
                .checked_add(count)
                .ok_or(ConfigError::Overflow("super-vertex count"))?;
            let mass = size
                .checked_mul(count)
                .ok_or(ConfigError::Overflow("vertex count"))?;
            n_vertices = n_vertices
                .checked_add(mass)
                .ok_or(ConfigError::Overflow("vertex count"))?;
        }
        if n_super > usize::MAX as u64 || n_vertices > usize::MAX as u64 {
            return Err(ConfigError::Overflow("exceeds address space"));
        }
        Ok(())
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Iterates `(size, count)` in increasing size order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    /// Number of super-vertices N.
    pub fn n_super(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of underlying vertices n.
    pub fn n_vertices(&self) -> u64 {
        self.counts.iter().map(|(s, c)| s * c).sum()
    }

    /// Largest super-vertex size r.
    pub fn max_size(&self) -> u64 {
        *self
            .counts
            .keys()
            .next_back()
            .expect("nonempty configuration")
    }

    /// `(N, n)`.
    pub fn derive_counts(&self) -> (u64, u64) {
        (self.n_super(), self.n_vertices())
    }

    pub fn empirical_profile(&self) -> LimitProfile {
        let (n_super, n_vertices) = self.derive_counts();
        let big_n = n_super as f64;
        let mu = self
            .counts
            .iter()
            .map(|(&s, &c)| (s, c as f64 / big_n))
            .collect();
        // u and s2 straight from integer sums, so u * N = n exactly before division.
        let second: f64 = self
            .counts
            .iter()
            .map(|(&s, &c)| (s as f64) * (s as f64) * (c as f64))
            .sum();
        LimitProfile {
            mu,
            u: n_vertices as f64 / big_n,
            s2: second / n_vertices as f64,
        }
    }

    /// Sizes of the super-vertices in canonical index order: sizes ascending,
    /// each repeated by its count.
    pub fn expand_sizes(&self) -> Vec<u64> {
        let mut sizes = Vec::with_capacity(self.n_super() as usize);
        for (&s, &c) in &self.counts {
            sizes.extend(std::iter::repeat_n(s, c as usize));
        }
        sizes
    }

    /// Parses the JSON document `{"sizes": {"<i>": <k_i>, ...}}`.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let doc: ConfigDocument =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        let mut pairs = Vec::with_capacity(doc.sizes.len());
        for (key, value) in &doc.sizes {
            let size = parse_positive(key).map_err(|_| ConfigError::InvalidSize(key.clone()))?;
            let count =
                value
                    .as_u64()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| ConfigError::InvalidCount {
                        size: key.clone(),
                        count: value.to_string(),
                    })?;
            pairs.push((size, count));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(s, _) in &pairs {
            // "01" and "1" both parse to 1
            if !seen.insert(s) {
                return Err(ConfigError::DuplicateSize(s));
            }
        }
        Self::new(pairs)
    }

    pub fn to_json(&self) -> String {
        let doc = ConfigDocument {
            sizes: self
                .counts
                .iter()
                .map(|(s, c)| (s.to_string(), serde_json::Value::from(*c)))
                .collect(),
        };
        serde_json::to_string(&doc).expect("config serializes")
    }

    /// Parses the inline shorthand `"1x500,2x250"` (sizeXcount, comma-separated).
    pub fn from_inline(text: &str) -> Result<Self, ConfigError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ConfigError::Empty);
        }
        let mut pairs = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            let (size, count) = item.split_once(['x', 'X']).ok_or_else(|| {
                ConfigError::Malformed(format!("expected sizeXcount, got {item:?}"))
            })?;
            let size =
                parse_positive(size).map_err(|_| ConfigError::InvalidSize(size.to_string()))?;
            let count = parse_positive(count).map_err(|_| ConfigError::InvalidCount {
                size: size.to_string(),
                count: count.to_string(),
            })?;
            pairs.push((size, count));
        }
        Self::new(pairs)
    }

    pub fn to_inline(&self) -> String {
        self.counts
            .iter()
            .map(|(s, c)| format!("{s}x{c}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Power-law configuration with the [`PowerLawScheme::Density`] weights.
    pub fn power_law(n_super: u64, alpha: f64, max_size: u64) -> Result<Self, ConfigError> {
        Self::power_law_with(n_super, alpha, max_size, PowerLawScheme::Density)
    }

    /// Power-law configuration on sizes `1..=max_size` whose tail mass
    /// `sum_{i >= k} mu_i` decays like `k^-alpha`. Counts are rounded down per
    /// size and the integer remainder goes to size 1, so they sum to exactly
    /// `n_super`. Sizes whose rounded count is zero are omitted.
    pub fn power_law_with(
        n_super: u64,
        alpha: f64,
        max_size: u64,
        scheme: PowerLawScheme,
    ) -> Result<Self, ConfigError> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(ConfigError::InvalidExponent(alpha));
        }
        if max_size == 0 || max_size > n_super {
            return Err(ConfigError::InvalidMaxSize { max_size, n_super });
        }
        let weights = scheme.weights(alpha, max_size);
        let total: f64 = weights.iter().sum();
        let mut counts: Vec<u64> = weights
            .iter()
            .map(|w| (n_super as f64 * w / total).floor() as u64)
            .collect();
        let assigned: u64 = counts.iter().sum();
        counts[0] += n_super.saturating_sub(assigned);
        Self::new(
            counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(i, c)| (i as u64 + 1, c)),
        )
    }
}

/// How a power law is discretized onto the finite support `1..=r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLawScheme {
    /// `mu_i ∝ i^-(alpha+1)`. Counts are non-increasing in `i`; the tail only
    /// approaches `C k^-alpha` for `1 << k << r`.
    #[default]
    Density,
    /// `mu_i = i^-alpha - (i+1)^-alpha` for `i < r` and `mu_r = r^-alpha`, so
    /// the tail mass is exactly `k^-alpha` for every `k <= r`. Size `r`
    /// carries the mass of all sizes beyond it.
    TailMatched,
}

impl PowerLawScheme {
    /// Unnormalized weights for sizes `1..=max_size`.
    pub fn weights(self, alpha: f64, max_size: u64) -> Vec<f64> {
        let tail = |k: u64| (k as f64).powf(-alpha);
        match self {
            PowerLawScheme::Density => (1..=max_size)
                .map(|i| (i as f64).powf(-(alpha + 1.0)))
                .collect(),
            PowerLawScheme::TailMatched => (1..=max_size)
                .map(|i| {
                    if i < max_size {
                        tail(i) - tail(i + 1)
                    } else {
                        tail(i)
                    }
                })
                .collect(),
        }
    }

    /// Exact limit profile of the scheme, before rounding to counts.
    pub fn profile(self, alpha: f64, max_size: u64) -> Result<LimitProfile, ConfigError> {
        let weights = self.weights(alpha, max_size);
        let total: f64 = weights.iter().sum();
        let mut mu: Vec<(u64, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i as u64 + 1, w / total))
            .collect();
        // absorb summation rounding into size 1
        let drift = 1.0 - mu.iter().map(|(_, m)| m).sum::<f64>();
        mu[0].1 += drift;
        LimitProfile::from_weights(mu)
    }
}

impl FromStr for PowerLawScheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "density" => Ok(PowerLawScheme::Density),
            "tail" | "tail-matched" => Ok(PowerLawScheme::TailMatched),
            _ => Err(ConfigError::Malformed(format!(
                "unknown power-law scheme {s:?} (expected density or tail)"
            ))),
        }
    }
}

impl fmt::Display for SizeConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_inline())
    }
}

impl FromStr for SizeConfiguration {
    type Err = ConfigError;

    /// Accepts either a JSON document or the inline shorthand.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim_start().starts_with('{') {
            Self::from_json(s)
        } else {
            Self::from_inline(s)
        }
    }
}

fn parse_positive(s: &str) -> Result<u64, ()> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(());
    }
    match s.parse::<u64>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(()),
    }
}

/// Size profile of a configuration: `mu_i = k_i / N`, `u = n / N` and
/// `s2 = sum_j j^2 k_j / n`. At finite N these stand in for the limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitProfile {
    pub mu: BTreeMap<u64, f64>,
    pub u: f64,
    pub s2: f64,
}

impl LimitProfile {
    /// Builds a profile from size weights that sum to one.
    pub fn from_weights<I>(weights: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut mu = BTreeMap::new();
        for (size, w) in weights {
            if size == 0 {
                return Err(ConfigError::InvalidSize(size.to_string()));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(ConfigError::InvalidProfile(w));
            }
            if w > 0.0 && mu.insert(size, w).is_some() {
                return Err(ConfigError::DuplicateSize(size));
            }
        }
        if mu.is_empty() {
            return Err(ConfigError::Empty);
        }
        let total: f64 = mu.values().sum();
        if (total - 1.0).abs() > PROFILE_TOLERANCE {
            return Err(ConfigError::InvalidProfile(total));
        }
        let u: f64 = mu.iter().map(|(&i, &m)| i as f64 * m).sum();
        let s2 = mu
            .iter()
            .map(|(&i, &m)| (i as f64).powi(2) * m)
            .sum::<f64>()
            / u;
        Ok(LimitProfile { mu, u, s2 })
    }

    /// Largest size with positive weight.
    pub fn max_size(&self) -> u64 {
        *self.mu.keys().next_back().expect("nonempty profile")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_documents() {
        let c = SizeConfiguration::from_json(r#"{"sizes": {"1": 3}}"#).unwrap();
        assert_eq!(c.counts(), &BTreeMap::from([(1, 3)]));
        let c = SizeConfiguration::from_json(r#"{"sizes": {"1": 2, "3": 1}}"#).unwrap();
        assert_eq!(c.counts(), &BTreeMap::from([(1, 2), (3, 1)]));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": {"0": 5}}"#),
            Err(ConfigError::InvalidSize(_))
        ));
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": {"2": 0}}"#),
            Err(ConfigError::InvalidCount { .. })
        ));
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": {"2": 1.5}}"#),
            Err(ConfigError::InvalidCount { .. })
        ));
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": {"-2": 1}}"#),
            Err(ConfigError::InvalidSize(_))
        ));
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": {"a": 1}}"#),
            Err(ConfigError::InvalidSize(_))
        ));
        assert_eq!(
            SizeConfiguration::from_json(r#"{"sizes": {}}"#),
            Err(ConfigError::Empty)
        );
        assert!(matches!(
            SizeConfiguration::from_json(r#"{"sizes": [1, 2]}"#),
            Err(ConfigError::Malformed(_))
        ));
        assert!(matches!(
            SizeConfiguration::from_json("not json"),
            Err(ConfigError::Malformed(_))
        ));
        assert_eq!(
            SizeConfiguration::from_json(r#"{"sizes": {"1": 1, "01": 2}}"#),
            Err(ConfigError::DuplicateSize(1))
        );
    }

    #[test]
    fn parses_inline_shorthand() {
        let c = SizeConfiguration::from_inline("1x500,2x250").unwrap();
        assert_eq!(c.counts(), &BTreeMap::from([(1, 500), (2, 250)]));
        assert_eq!(c.to_inline(), "1x500,2x250");
        assert!(SizeConfiguration::from_inline("").is_err());
        assert!(SizeConfiguration::from_inline("1x").is_err());
        assert!(SizeConfiguration::from_inline("0x3").is_err());
        assert!(SizeConfiguration::from_inline("2x0").is_err());
        assert!(SizeConfiguration::from_inline("1x2,1x3").is_err());
        assert!(SizeConfiguration::from_inline("1.5x2").is_err());
        let parsed: SizeConfiguration = "3x4".parse().unwrap();
        assert_eq!(parsed.derive_counts(), (4, 12));
    }

    #[test]
    fn derives_counts() {
        let c = SizeConfiguration::new([(1, 2), (3, 1)]).unwrap();
        assert_eq!(c.derive_counts(), (3, 5));
        assert_eq!(
            SizeConfiguration::homogeneous(17).unwrap().derive_counts(),
            (17, 17)
        );
        let c = SizeConfiguration::new([(2, 1000)]).unwrap();
        assert_eq!(c.derive_counts(), (1000, 2000));
        assert_eq!(c.max_size(), 2);
    }

    #[test]
    fn empirical_profiles() {
        let p = SizeConfiguration::homogeneous(40)
            .unwrap()
            .empirical_profile();
        assert_eq!(p.mu, BTreeMap::from([(1, 1.0)]));
        assert_eq!((p.u, p.s2), (1.0, 1.0));

        let p = SizeConfiguration::new([(1, 500), (2, 500)])
            .unwrap()
            .empirical_profile();
        assert_eq!(p.mu, BTreeMap::from([(1, 0.5), (2, 0.5)]));
        assert!((p.u - 1.5).abs() < 1e-15);
        assert!((p.s2 - 5.0 / 3.0).abs() < 1e-15);

        let p = SizeConfiguration::new([(3, 300)])
            .unwrap()
            .empirical_profile();
        assert_eq!((p.u, p.s2), (3.0, 3.0));
    }

    #[test]
    fn profile_from_weights_matches_configuration() {
        let a = LimitProfile::from_weights([(1, 0.5), (2, 0.5)]).unwrap();
        let b = SizeConfiguration::new([(1, 7), (2, 7)])
            .unwrap()
            .empirical_profile();
        assert_eq!(a.mu, b.mu);
        assert!((a.u - b.u).abs() < 1e-15 && (a.s2 - b.s2).abs() < 1e-15);
        assert!(LimitProfile::from_weights([(1, 0.5), (2, 0.4)]).is_err());
        assert!(LimitProfile::from_weights([(1, -0.5), (2, 1.5)]).is_err());
        assert!(LimitProfile::from_weights([(0, 1.0)]).is_err());
    }

    #[test]
    fn expand_sizes_is_block_ordered() {
        let c = SizeConfiguration::new([(3, 1), (1, 2)]).unwrap();
        assert_eq!(c.expand_sizes(), vec![1, 1, 3]);
    }

    #[test]
    fn power_law_degenerate_support() {
        let c = SizeConfiguration::power_law(100, 2.0, 1).unwrap();
        assert_eq!(c.counts(), &BTreeMap::from([(1, 100)]));
    }

    #[test]
    fn power_law_rejects_bad_parameters() {
        assert_eq!(
            SizeConfiguration::power_law(100, 1.0, 5),
            Err(ConfigError::InvalidExponent(1.0))
        );
        assert!(SizeConfiguration::power_law(100, f64::NAN, 5).is_err());
        assert!(SizeConfiguration::power_law(10, 2.0, 11).is_err());
        assert!(SizeConfiguration::power_law(10, 2.0, 0).is_err());
    }

    #[test]
    fn power_law_thousand_over_ten_sizes() {
        let c = SizeConfiguration::power_law(1000, 2.0, 10).unwrap();
        assert_eq!(c.n_super(), 1000);
        // floor(1000 mu_10) = 0, so size 10 drops out
        assert_eq!(c.max_size(), 9);
        let counts: Vec<u64> = c.counts().values().copied().collect();
        assert_eq!(counts, vec![840, 104, 30, 13, 6, 3, 2, 1, 1]);
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));

        // Oracle: exact tail of the normalized weights.
        let total: f64 = (1..=10).map(|i| (i as f64).powi(-3)).sum();
        let exact_tail: f64 = (3..=10).map(|i| (i as f64).powi(-3)).sum::<f64>() / total;
        let mu = c.empirical_profile().mu;
        let tail: f64 = mu.range(3..).map(|(_, m)| m).sum();
        assert!((tail - exact_tail).abs() <= 10.0 / 1000.0);
    }

    #[test]
    fn tail_matched_scheme_has_exact_tails() {
        let w = PowerLawScheme::TailMatched.weights(2.0, 50);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        for k in 1..=50usize {
            let tail: f64 = w[k - 1..].iter().sum();
            assert!((tail - (k as f64).powi(-2)).abs() < 1e-14, "k = {k}");
        }
        let c = SizeConfiguration::power_law_with(100_000, 2.0, 50, PowerLawScheme::TailMatched)
            .unwrap();
        assert_eq!(c.n_super(), 100_000);
        let counts: Vec<u64> = (1..50).map(|i| c.counts()[&i]).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(c.counts()[&50], 40);
    }

    #[test]
    fn scheme_profiles_are_normalized() {
        for scheme in [PowerLawScheme::Density, PowerLawScheme::TailMatched] {
            let p = scheme.profile(2.5, 30).unwrap();
            assert!((p.mu.values().sum::<f64>() - 1.0).abs() <= PROFILE_TOLERANCE);
            assert!(p.s2 >= p.u && p.u >= 1.0);
        }
        assert_eq!(
            "tail".parse::<PowerLawScheme>().unwrap(),
            PowerLawScheme::TailMatched
        );
        assert!("zipf".parse::<PowerLawScheme>().is_err());
    }
}
