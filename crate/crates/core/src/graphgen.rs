//! Graph sampling conditioned on a weight vector, and block coarse-graining.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::heavytail::{TailIndex, WeightVector};
use crate::rng::UniformStream;

/// ChaCha stream used by [`sample_graph`]: one uniform per pair, row-major over `i < j`.
pub const NAIVE_STREAM: u64 = 0;
/// ChaCha stream used by [`sample_graph_fast`].
pub const FAST_STREAM: u64 = 1;

/// How the connection scale is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EpsilonRule {
    Explicit {
        epsilon: f64,
    },
    /// `eps = k * n^(-1/alpha)`.
    Critical {
        k: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub alpha: TailIndex,
    pub epsilon_rule: EpsilonRule,
}

impl ModelParams {
    pub fn new(n: usize, alpha: TailIndex, epsilon_rule: EpsilonRule) -> Result<Self> {
        let params = Self {
            n,
            alpha,
            epsilon_rule,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn explicit(n: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        Self::new(n, TailIndex::new(alpha)?, EpsilonRule::Explicit { epsilon })
    }

    pub fn critical(n: usize, alpha: f64, k: f64) -> Result<Self> {
        Self::new(n, TailIndex::new(alpha)?, EpsilonRule::Critical { k })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        match self.epsilon_rule {
            EpsilonRule::Explicit { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                Err(invalid(format!(
                    "epsilon must be positive and finite, got {epsilon}"
                )))
            }
            EpsilonRule::Critical { k } if !(k > 0.0 && k.is_finite()) => Err(invalid(format!(
                "critical-scale factor must be positive, got {k}"
            ))),
            _ if !(self.epsilon() > 0.0) => Err(invalid("resolved epsilon underflows to zero")),
            _ => Ok(()),
        }
    }

    /// Resolved connection scale.
    pub fn epsilon(&self) -> f64 {
        match self.epsilon_rule {
            EpsilonRule::Explicit { epsilon } => epsilon,
            EpsilonRule::Critical { k } => k * (self.n as f64).powf(-1.0 / self.alpha.get()),
        }
    }
}

/// `1 - exp(-eps * w_i * w_j)`.
pub fn connection_prob(w_i: f64, w_j: f64, epsilon: f64) -> Result<f64> {
    if !(w_i >= 1.0 && w_j >= 1.0) {
        return Err(invalid(format!("weights must be >= 1, got {w_i}, {w_j}")));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(prob(epsilon * w_i * w_j))
}

#[inline]
fn prob(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// A simple undirected graph with sorted neighbour lists and its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    adjacency: Vec<Vec<u32>>,
    params: ModelParams,
    weight_seed: u64,
    graph_seed: u64,
    replica_id: u64,
}

impl GraphSample {
    /// Builds a graph from an edge list. Rejects loops, duplicates and out-of-range endpoints.
    pub fn from_edges(
        params: ModelParams,
        edges: &[(usize, usize)],
        weight_seed: u64,
        graph_seed: u64,
    ) -> Result<Self> {
        let n = params.n;
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at {i}")));
            }
            adjacency[i].push(j as u32);
            adjacency[j].push(i as u32);
        }
        let graph = Self::from_unsorted(adjacency, params, weight_seed, graph_seed);
        graph.validate()?;
        Ok(graph)
    }

    fn from_unsorted(
        mut adjacency: Vec<Vec<u32>>,
        params: ModelParams,
        weight_seed: u64,
        graph_seed: u64,
    ) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            adjacency,
            params,
            weight_seed,
            graph_seed,
            replica_id: 0,
        }
    }

    pub fn with_replica_id(mut self, replica_id: u64) -> Self {
        self.replica_id = replica_id;
        self
    }

    /// Checks symmetry, absence of loops and duplicates, and sorted neighbour lists.
    pub fn validate(&self) -> Result<()> {
        if self.adjacency.len() != self.params.n {
            return Err(invalid("adjacency size does not match n"));
        }
        for (i, list) in self.adjacency.iter().enumerate() {
            for pair in list.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(invalid(format!(
                        "neighbour list of {i} not strictly increasing"
                    )));
                }
            }
            for &j in list {
                let j = j as usize;
                if j == i {
                    return Err(invalid(format!("self-loop at {i}")));
                }
                if j >= self.adjacency.len()
                    || self.adjacency[j].binary_search(&(i as u32)).is_err()
                {
                    return Err(invalid(format!("edge ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn weight_seed(&self) -> u64 {
        self.weight_seed
    }

    pub fn graph_seed(&self) -> u64 {
        self.graph_seed
    }

    pub fn replica_id(&self) -> u64 {
        self.replica_id
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&(j as u32)).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# n={} alpha={} eps={} weight_seed={} graph_seed={} replica={}",
            self.n(),
            fmt_f64(self.params.alpha.get()),
            fmt_f64(self.params.epsilon()),
            self.weight_seed,
            self.graph_seed,
            self.replica_id
        )?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    /// Reads the edge-list format written by [`Self::write_edge_list`].
    /// The scale comes back as an explicit rule.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))??;
        let body = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse(format!("missing header line: {header}")))?;
        let mut fields = std::collections::HashMap::new();
        for token in body.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {token}")))?;
            fields.insert(key, value);
        }
        fn get<T: std::str::FromStr>(
            fields: &std::collections::HashMap<&str, &str>,
            key: &str,
        ) -> Result<T> {
            fields
                .get(key)
                .ok_or_else(|| Error::Parse(format!("header lacks {key}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for {key}")))
        }
        let params = ModelParams::explicit(
            get(&fields, "n")?,
            get(&fields, "alpha")?,
            get(&fields, "eps")?,
        )?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("bad edge line: {line}")))?
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad edge line: {line}")))
            };
            let (i, j) = (next()?, next()?);
            if i >= j {
                return Err(Error::Parse(format!("edge lines need i < j: {line}")));
            }
            edges.push((i, j));
        }
        Ok(Self::from_edges(
            params,
            &edges,
            get(&fields, "weight_seed")?,
            get(&fields, "graph_seed")?,
        )?
        .with_replica_id(get(&fields, "replica")?))
    }
}

fn check_sizes(params: &ModelParams, weights: &WeightVector) -> Result<()> {
    params.validate()?;
    if weights.n() != params.n {
        return Err(invalid(format!(
            "weight vector has {} entries, model expects {}",
            weights.n(),
            params.n
        )));
    }
    Ok(())
}

/// Samples every pair independently, drawing one uniform per pair in row-major
/// order over `i < j` from stream [`NAIVE_STREAM`]. Runs in `O(n^2)`.
pub fn sample_graph(
    params: &ModelParams,
    weights: &WeightVector,
    graph_seed: u64,
) -> Result<GraphSample> {
    check_sizes(params, weights)?;
    let eps = params.epsilon();
    let w = weights.values();
    let n = params.n;
    let mut rng = UniformStream::with_stream(graph_seed, NAIVE_STREAM);
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        let scaled = eps * w[i];
        for j in i + 1..n {
            if rng.next_f64() < prob(scaled * w[j]) {
                adjacency[i].push(j as u32);
                adjacency[j].push(i as u32);
            }
        }
    }
    Ok(GraphSample::from_unsorted(
        adjacency,
        *params,
        weights.seed(),
        graph_seed,
    ))
}

/// Same law as [`sample_graph`], sampled by skip-and-accept over vertices sorted
/// by decreasing weight, from stream [`FAST_STREAM`].
///
/// Row `i` jumps over a geometric number of candidates under the bound
/// `pbar = p(w_i, w_next)`, accepts a candidate with probability `p / pbar`, and
/// then tightens the bound to that candidate's probability.
pub fn sample_graph_fast(
    params: &ModelParams,
    weights: &WeightVector,
    graph_seed: u64,
) -> Result<GraphSample> {
    check_sizes(params, weights)?;
    let eps = params.epsilon();
    let n = params.n;
    let mut order: Vec<u32> = (0..n as u32).collect();
    let w = weights.values();
    order.sort_by(|&a, &b| w[b as usize].total_cmp(&w[a as usize]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&v| w[v as usize]).collect();

    let mut rng = UniformStream::with_stream(graph_seed, FAST_STREAM);
    let mut adjacency = vec![Vec::new(); n];
    for a in 0..n {
        let scaled = eps * sorted[a];
        let mut b = a + 1;
        if b >= n {
            break;
        }
        let mut bound_x = scaled * sorted[b];
        let mut bound_p = prob(bound_x);
        loop {
            // Failures before the next success of a Bernoulli(bound_p) sequence;
            // ln(1 - bound_p) = -bound_x exactly.
            let skip = -rng.next_open_closed().ln() / bound_x;
            if skip >= (n - b) as f64 {
                break;
            }
            b += skip as usize;
            let x = scaled * sorted[b];
            let p = prob(x);
            if p >= bound_p || rng.next_f64() * bound_p < p {
                let (u, v) = (order[a], order[b]);
                adjacency[u as usize].push(v);
                adjacency[v as usize].push(u);
            }
            bound_x = x;
            bound_p = p;
            b += 1;
            if b >= n {
                break;
            }
        }
    }
    Ok(GraphSample::from_unsorted(
        adjacency,
        *params,
        weights.seed(),
        graph_seed,
    ))
}

/// Merges consecutive blocks of `block_size` vertices. Block weights are sums;
/// two blocks are adjacent iff some cross pair was adjacent.
pub fn coarse_grain(
    graph: &GraphSample,
    weights: &WeightVector,
    block_size: usize,
) -> Result<(GraphSample, WeightVector)> {
    let n = graph.n();
    if weights.n() != n {
        return Err(invalid("weight vector does not match graph size"));
    }
    if block_size == 0 || !n.is_multiple_of(block_size) {
        return Err(invalid(format!(
            "block size {block_size} does not divide n = {n}"
        )));
    }
    let blocks = n / block_size;
    let block_weights: Vec<f64> = weights
        .values()
        .chunks(block_size)
        .map(|c| c.iter().sum())
        .collect();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); blocks];
    for (i, j) in graph.edges() {
        let (bi, bj) = (i / block_size, j / block_size);
        if bi != bj {
            adjacency[bi].push(bj as u32);
            adjacency[bj].push(bi as u32);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let params = ModelParams {
        n: blocks,
        alpha: graph.params.alpha,
        epsilon_rule: EpsilonRule::Explicit {
            epsilon: graph.params.epsilon(),
        },
    };
    let coarse = GraphSample {
        adjacency,
        params,
        weight_seed: graph.weight_seed,
        graph_seed: graph.graph_seed,
        replica_id: graph.replica_id,
    };
    let coarse_weights = WeightVector::from_values(block_weights, weights.alpha(), weights.seed())?;
    Ok((coarse, coarse_weights))
}
