//! Realizations of G(N, K, p).
//!
//! Two independent mechanisms produce the same law:
//!
//! * [`sample_direct`] draws each super-vertex pair `{k, l}` directly with
//!   probability `1 - (1 - p)^(size_k * size_l)`, skipping geometrically
//!   through blocks of pairs that share a size class.
//! * [`sample_constructive`] samples the underlying G(n, p) on the `n`
//!   vertices and joins two super-vertices when any underlying edge runs
//!   between them.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::Geometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SizeConfiguration;
use crate::rng::{self, domain, Seed};

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("resolved edge probability {p} is outside [0, 1] ({regime} regime, c = {c})")]
    ProbabilityOutOfRange { regime: Regime, c: f64, p: f64 },
    #[error("connectivity regime needs ln N + c >= 0 (ln N = {ln_n}, c = {c})")]
    BelowConnectivityRange { ln_n: f64, c: f64 },
    #[error("sparse regime needs 0 <= c <= n (n = {n}, c = {c})")]
    SparseOutOfRange { n: u64, c: f64 },
    #[error("unknown regime {0:?} (expected raw, connectivity or sparse)")]
    UnknownRegime(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

/// How the scalar `c` is turned into the edge probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p = c`.
    Raw,
    /// `p = (ln N + c) / N`.
    Connectivity,
    /// `p = c / n`.
    Sparse,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Raw => "raw",
            Regime::Connectivity => "connectivity",
            Regime::Sparse => "sparse",
        })
    }
}

impl FromStr for Regime {
    type Err = SamplerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Regime::Raw),
            "connectivity" => Ok(Regime::Connectivity),
            "sparse" => Ok(Regime::Sparse),
            _ => Err(SamplerError::UnknownRegime(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub regime: Regime,
    pub c: f64,
    pub p: f64,
}

impl ModelParams {
    pub fn resolve(
        regime: Regime,
        c: f64,
        config: &SizeConfiguration,
    ) -> Result<ModelParams, SamplerError> {
        resolve_p(regime, c, config)
    }

    /// Shorthand for the raw regime.
    pub fn raw(p: f64) -> Result<ModelParams, SamplerError> {
        check_probability(Regime::Raw, p, p)?;
        Ok(ModelParams {
            regime: Regime::Raw,
            c: p,
            p,
        })
    }
}

fn check_probability(regime: Regime, c: f64, p: f64) -> Result<(), SamplerError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SamplerError::ProbabilityOutOfRange { regime, c, p })
    }
}

pub fn resolve_p(
    regime: Regime,
    c: f64,
    config: &SizeConfiguration,
) -> Result<ModelParams, SamplerError> {
    let (n_super, n_vertices) = config.derive_counts();
    let p = match regime {
        Regime::Raw => c,
        Regime::Connectivity => {
            let ln_n = (n_super as f64).ln();
            if !(ln_n + c >= 0.0) {
                return Err(SamplerError::BelowConnectivityRange { ln_n, c });
            }
            (ln_n + c) / n_super as f64
        }
        Regime::Sparse => {
            if !(c >= 0.0 && c <= n_vertices as f64) {
                return Err(SamplerError::SparseOutOfRange { n: n_vertices, c });
            }
            c / n_vertices as f64
        }
    };
    check_probability(regime, c, p)?;
    Ok(ModelParams { regime, c, p })
}

/// Probability that super-vertices of sizes `i` and `j` are adjacent:
/// `1 - (1 - p)^(i*j)`, evaluated as `-expm1(i*j*ln(1-p))`.
pub fn edge_probability(i: u64, j: u64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    -((i as f64) * (j as f64) * (-p).ln_1p()).exp_m1()
}

/// A sampled graph on the N super-vertices. Edges are unordered pairs stored
/// as `(u, v)` with `u < v`; there are no loops or repeated pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperGraph {
    sizes: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl SuperGraph {
    /// Validating constructor. Pairs are normalized to `u < v`.
    pub fn new(sizes: Vec<u64>, edges: Vec<(usize, usize)>) -> Result<Self, SamplerError> {
        if sizes.contains(&0) {
            return Err(SamplerError::InvalidGraph("super-vertex of size 0".into()));
        }
        let n = sizes.len();
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(SamplerError::InvalidGraph(format!("self-loop at {a}")));
            }
            if a >= n || b >= n {
                return Err(SamplerError::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for N = {n}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(SamplerError::InvalidGraph(format!("duplicate edge {e:?}")));
            }
            normalized.push(e);
        }
        Ok(SuperGraph {
            sizes,
            edges: normalized,
        })
    }

    /// Graph with no edges on the configuration's super-vertices.
    pub fn empty(config: &SizeConfiguration) -> Self {
        SuperGraph {
            sizes: config.expand_sizes(),
            edges: Vec::new(),
        }
    }

    pub fn n_super(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.sizes.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Writes the edge list: a `# N=<N> sizes=<i>x<k_i>,...` header followed
    /// by one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for &s in &self.sizes {
            match runs.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => runs.push((s, 1)),
            }
        }
        let sizes = runs
            .iter()
            .map(|(s, c)| format!("{s}x{c}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "# N={} sizes={}", self.sizes.len(), sizes)?;
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the format produced by [`SuperGraph::write_edge_list`].
    pub fn from_edge_list(text: &str) -> Result<Self, SamplerError> {
        let bad = |msg: String| SamplerError::InvalidGraph(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let rest = header
            .strip_prefix("# N=")
            .ok_or_else(|| bad(format!("bad header {header:?}")))?;
        let (n_str, sizes_str) = rest
            .split_once(" sizes=")
            .ok_or_else(|| bad(format!("bad header {header:?}")))?;
        let n: usize = n_str.parse().map_err(|_| bad(format!("bad N {n_str:?}")))?;
        let mut sizes = Vec::with_capacity(n);
        for run in sizes_str.split(',') {
            let (s, c) = run
                .split_once('x')
                .ok_or_else(|| bad(format!("bad size run {run:?}")))?;
            let s: u64 = s.parse().map_err(|_| bad(format!("bad size {s:?}")))?;
            let c: usize = c.parse().map_err(|_| bad(format!("bad count {c:?}")))?;
            sizes.extend(std::iter::repeat_n(s, c));
        }
        if sizes.len() != n {
            return Err(bad(format!("header N={n} but sizes cover {}", sizes.len())));
        }
        let mut edges = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad(format!("bad edge line {line:?}")));
            };
            let a = a.parse().map_err(|_| bad(format!("bad index {a:?}")))?;
            let b = b.parse().map_err(|_| bad(format!("bad index {b:?}")))?;
            edges.push((a, b));
        }
        SuperGraph::new(sizes, edges)
    }
}

/// Contiguous run of super-vertices sharing one size.
#[derive(Debug, Clone, Copy)]
struct SizeClass {
    size: u64,
    count: usize,
    offset: usize,
}

fn size_classes(config: &SizeConfiguration) -> Vec<SizeClass> {
    let mut offset = 0;
    config
        .iter()
        .map(|(size, count)| {
            let class = SizeClass {
                size,
                count: count as usize,
                offset,
            };
            offset += count as usize;
            class
        })
        .collect()
}

/// Samples by independent Bernoulli trials over super-vertex pairs.
///
/// Pairs are grouped into blocks `(a, b)`, `a <= b`, of size classes. All
/// pairs in a block share one probability, so the sampler jumps between
/// successes with Geometric gaps. Each block reads its own random stream,
/// keyed by its position in the canonical block order, so the output does not
/// depend on the thread pool.
pub fn sample_direct(config: &SizeConfiguration, params: &ModelParams, seed: Seed) -> SuperGraph {
    let classes = size_classes(config);
    let mut blocks = Vec::with_capacity(classes.len() * (classes.len() + 1) / 2);
    for a in 0..classes.len() {
        for b in a..classes.len() {
            blocks.push((a, b));
        }
    }
    let per_block: Vec<Vec<(usize, usize)>> = blocks
        .par_iter()
        .enumerate()
        .map(|(id, &(a, b))| {
            let (ca, cb) = (classes[a], classes[b]);
            let q = edge_probability(ca.size, cb.size, params.p);
            let mut rng = rng::stream(seed, domain::DIRECT_BLOCK, id as u64);
            if a == b {
                sample_triangle_block(ca, q, &mut rng)
            } else {
                sample_rect_block(ca, cb, q, &mut rng)
            }
        })
        .collect();
    let total = per_block.iter().map(Vec::len).sum();
    let mut edges = Vec::with_capacity(total);
    for block in per_block {
        edges.extend(block);
    }
    SuperGraph {
        sizes: config.expand_sizes(),
        edges,
    }
}

/// Pairs `u < v` inside one class, visited in lexicographic order.
fn sample_triangle_block<R: Rng>(class: SizeClass, q: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let m = class.count;
    let mut edges = Vec::new();
    if m < 2 || q <= 0.0 {
        return edges;
    }
    let gap = Geometric::new(q).expect("q in (0, 1]");
    // (u, v) is the next candidate pair; v ranges over u+1..m.
    let (mut u, mut v) = (0usize, 1usize);
    'outer: loop {
        let mut skip = rng.sample(gap);
        loop {
            let left_in_row = (m - v) as u64;
            if skip < left_in_row {
                v += skip as usize;
                break;
            }
            skip -= left_in_row;
            u += 1;
            if u + 1 >= m {
                break 'outer;
            }
            v = u + 1;
        }
        edges.push((class.offset + u, class.offset + v));
        v += 1;
        if v == m {
            u += 1;
            if u + 1 >= m {
                break;
            }
            v = u + 1;
        }
    }
    edges
}

/// All `count_a * count_b` pairs between two distinct classes, row-major.
fn sample_rect_block<R: Rng>(
    a: SizeClass,
    b: SizeClass,
    q: f64,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if q <= 0.0 {
        return edges;
    }
    let gap = Geometric::new(q).expect("q in (0, 1]");
    let total = a.count as u64 * b.count as u64;
    let width = b.count as u64;
    let mut pos = 0u64;
    loop {
        pos = match pos.checked_add(rng.sample(gap)) {
            Some(x) if x < total => x,
            _ => break,
        };
        edges.push((
            a.offset + (pos / width) as usize,
            b.offset + (pos % width) as usize,
        ));
        pos += 1;
    }
    edges
}

/// Samples the underlying G(n, p) and collapses it onto super-vertices.
///
/// Super-vertex `k` owns a contiguous range of underlying vertices. For each
/// vertex `x` only partners `y` beyond the end of its own super-vertex are
/// visited, so pairs inside a super-vertex are never drawn.
pub fn sample_constructive(
    config: &SizeConfiguration,
    params: &ModelParams,
    seed: Seed,
) -> SuperGraph {
    let sizes = config.expand_sizes();
    let n = config.n_vertices() as usize;
    let mut owner = Vec::with_capacity(n);
    let mut owner_end = Vec::with_capacity(sizes.len());
    for (k, &s) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat_n(k, s as usize));
        owner_end.push(owner.len());
    }

    let mut edges = Vec::new();
    if params.p > 0.0 {
        let gap = Geometric::new(params.p.min(1.0)).expect("p in (0, 1]");
        let mut rng = rng::stream(seed, domain::CONSTRUCTIVE, 0);
        for x in 0..n {
            let k = owner[x];
            let mut y = owner_end[k];
            while y < n {
                match (y as u64).checked_add(rng.sample(gap)) {
                    Some(t) if t < n as u64 => y = t as usize,
                    _ => break,
                }
                edges.push((k, owner[y]));
                y += 1;
            }
        }
        edges.sort_unstable();
        edges.dedup();
    }
    SuperGraph { sizes, edges }
}
