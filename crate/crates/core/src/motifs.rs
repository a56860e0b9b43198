//! Per-node and global statistics of a sampled graph, plus tail and PGF estimators.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graphgen::GraphSample;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub degrees: Vec<usize>,
}

impl DegreeRecord {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn total(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.degrees.is_empty() {
            return 0.0;
        }
        self.total() as f64 / self.degrees.len() as f64
    }

    pub fn max(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// `(d, fraction of nodes with degree > d)` at every distinct observed degree, ascending.
    pub fn ccdf_points(&self) -> Vec<(usize, f64)> {
        let mut sorted = self.degrees.clone();
        sorted.sort_unstable();
        let n = sorted.len() as f64;
        let mut out = Vec::new();
        let mut idx = 0;
        while idx < sorted.len() {
            let d = sorted[idx];
            while idx < sorted.len() && sorted[idx] == d {
                idx += 1;
            }
            out.push((d, (sorted.len() - idx) as f64 / n));
        }
        out
    }
}

pub fn degree_sequence(graph: &GraphSample) -> DegreeRecord {
    DegreeRecord {
        degrees: graph.degrees(),
    }
}

/// Normalization of the per-node wedge count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WedgeConvention {
    /// Unordered neighbour pairs, `D (D - 1) / 2`.
    #[default]
    Definition,
    /// Ordered neighbour pairs, `D (D - 1)`.
    Theorem,
}

impl WedgeConvention {
    pub fn of_degree(self, d: usize) -> u64 {
        let d = d as u64;
        let ordered = d * d.saturating_sub(1);
        match self {
            Self::Definition => ordered / 2,
            Self::Theorem => ordered,
        }
    }
}

pub fn wedge_count(graph: &GraphSample, i: usize, convention: WedgeConvention) -> Result<u64> {
    if i >= graph.n() {
        return Err(invalid(format!(
            "node {i} out of range for n = {}",
            graph.n()
        )));
    }
    Ok(convention.of_degree(graph.degree(i)))
}

pub fn wedge_counts(graph: &GraphSample, convention: WedgeConvention) -> Vec<u64> {
    graph
        .adjacency()
        .iter()
        .map(|l| convention.of_degree(l.len()))
        .collect()
}

/// Triangle counts. Per-node values are kept as "triangles containing i", three
/// times the normalized per-node value, so every identity stays in integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleCounts {
    pub containing: Vec<u64>,
    pub total: u64,
}

impl TriangleCounts {
    /// Normalized per-node value, `containing / 3`.
    pub fn per_node(&self, i: usize) -> f64 {
        self.containing[i] as f64 / 3.0
    }
}

/// Counts triangles by intersecting neighbour lists oriented from lower to higher
/// `(degree, index)` rank, so each triangle is found exactly once.
pub fn triangle_counts(graph: &GraphSample) -> TriangleCounts {
    let n = graph.n();
    let adj = graph.adjacency();
    let rank = |v: usize| (adj[v].len(), v);
    let forward: Vec<Vec<u32>> = (0..n)
        .map(|u| {
            adj[u]
                .iter()
                .copied()
                .filter(|&v| rank(v as usize) > rank(u))
                .collect()
        })
        .collect();
    let mut containing = vec![0u64; n];
    let mut total = 0u64;
    for u in 0..n {
        for &v in &forward[u] {
            let (a, b) = (&forward[u], &forward[v as usize]);
            let (mut x, mut y) = (0, 0);
            while x < a.len() && y < b.len() {
                match a[x].cmp(&b[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        total += 1;
                        containing[u] += 1;
                        containing[v as usize] += 1;
                        containing[a[x] as usize] += 1;
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
    }
    TriangleCounts { containing, total }
}

pub fn isolated_count(graph: &GraphSample) -> usize {
    graph.adjacency().iter().filter(|l| l.is_empty()).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifRecord {
    pub convention: WedgeConvention,
    pub wedges: Vec<u64>,
    pub triangles: TriangleCounts,
    pub isolated: usize,
}

pub fn motif_record(graph: &GraphSample, convention: WedgeConvention) -> MotifRecord {
    MotifRecord {
        convention,
        wedges: wedge_counts(graph, convention),
        triangles: triangle_counts(graph),
        isolated: isolated_count(graph),
    }
}

/// Hill estimate of the tail index from the `k` largest order statistics:
/// the reciprocal of `(1/k) sum_{m<=k} ln(X_(m) / X_(k+1))`.
pub fn hill_estimator(sample: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= sample.len() {
        return Err(invalid(format!(
            "need 0 < k < sample size, got k = {k}, size = {}",
            sample.len()
        )));
    }
    if let Some(bad) = sample.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(invalid(format!(
            "sample values must be positive and finite, got {bad}"
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k].ln();
    let mean_excess = sorted[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    if !(mean_excess > 0.0) {
        return Err(invalid(
            "top order statistics are tied; tail index undefined",
        ));
    }
    Ok(1.0 / mean_excess)
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

fn check_pgf_args(pairs: &[(u64, u64)], t: f64, s: f64) -> Result<()> {
    if pairs.is_empty() {
        return Err(invalid("no degree pairs"));
    }
    for (name, z) in [("t", t), ("s", s)] {
        if !(z > 0.0 && z <= 1.0) {
            return Err(invalid(format!("{name} must lie in (0, 1], got {z}")));
        }
    }
    Ok(())
}

fn pow(z: f64, d: u64) -> f64 {
    z.powi(d.min(i32::MAX as u64) as i32)
}

/// Sample mean of `t^d1 s^d2`. Use `s = 1` for the marginal of the first coordinate.
pub fn empirical_joint_pgf(pairs: &[(u64, u64)], t: f64, s: f64) -> Result<Estimate> {
    check_pgf_args(pairs, t, s)?;
    let m = pairs.len() as f64;
    let values: Vec<f64> = pairs.iter().map(|&(a, b)| pow(t, a) * pow(s, b)).collect();
    let mean = values.iter().sum::<f64>() / m;
    let var = if pairs.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        value: mean,
        std_error: (var / m).sqrt(),
    })
}

/// Joint PGF, its two marginals, and the gap `joint - marginal_t * marginal_s`
/// with a delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgfGap {
    pub joint: Estimate,
    pub marginal_t: Estimate,
    pub marginal_s: Estimate,
    pub gap: Estimate,
}

pub fn joint_pgf_gap(pairs: &[(u64, u64)], t: f64, s: f64) -> Result<PgfGap> {
    check_pgf_args(pairs, t, s)?;
    let joint = empirical_joint_pgf(pairs, t, s)?;
    let marginal_t = empirical_joint_pgf(pairs, t, 1.0)?;
    let marginal_s = empirical_joint_pgf(pairs, 1.0, s)?;
    let m = pairs.len() as f64;
    // Gradient of a - b c at the means is (1, -c, -b).
    let (gb, gc) = (-marginal_s.value, -marginal_t.value);
    let centre = joint.value + gb * marginal_t.value + gc * marginal_s.value;
    let var = if pairs.len() > 1 {
        pairs
            .iter()
            .map(|&(a, b)| {
                let (ta, sb) = (pow(t, a), pow(s, b));
                (ta * sb + gb * ta + gc * sb - centre).powi(2)
            })
            .sum::<f64>()
            / (m - 1.0)
    } else {
        0.0
    };
    Ok(PgfGap {
        joint,
        marginal_t,
        marginal_s,
        gap: Estimate {
            value: joint.value - marginal_t.value * marginal_s.value,
            std_error: (var / m).sqrt(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::{sample_graph, ModelParams};
    use crate::heavytail::{pareto_quantile, sample_weights, TailIndex};
    use crate::rng::UniformStream;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> GraphSample {
        GraphSample::from_edges(ModelParams::explicit(n, 0.5, 1.0).unwrap(), edges, 0, 0).unwrap()
    }

    fn complete(n: usize) -> GraphSample {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        graph(n, &edges)
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> GraphSample {
        let mut s = UniformStream::new(seed);
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|_| s.next_f64() < p)
            .collect();
        graph(n, &edges)
    }

    fn brute_force_triangles(g: &GraphSample) -> (Vec<u64>, u64) {
        let n = g.n();
        let mut containing = vec![0; n];
        let mut total = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k) {
                        total += 1;
                        containing[i] += 1;
                        containing[j] += 1;
                        containing[k] += 1;
                    }
                }
            }
        }
        (containing, total)
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_sequence(&graph(5, &[])).degrees, vec![0; 5]);
        assert_eq!(degree_sequence(&complete(4)).degrees, vec![3; 4]);
        let params = ModelParams::critical(200, 0.5, 2.0).unwrap();
        let g = sample_graph(
            &params,
            &sample_weights(200, TailIndex::new(0.5).unwrap(), 1).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(degree_sequence(&g).total(), 2 * g.edge_count());
    }

    #[test]
    fn degree_record_summaries() {
        let rec = degree_sequence(&graph(4, &[(0, 1), (0, 2)]));
        assert_eq!(rec.max(), 2);
        assert!((rec.mean() - 1.0).abs() < 1e-15);
        assert_eq!(rec.ccdf_points(), vec![(0, 0.75), (1, 0.25), (2, 0.0)]);
    }

    #[test]
    fn wedge_examples() {
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(
            wedge_count(&star, 0, WedgeConvention::Definition).unwrap(),
            6
        );
        assert_eq!(wedge_count(&star, 0, WedgeConvention::Theorem).unwrap(), 12);
        let lonely = graph(3, &[(0, 1)]);
        assert_eq!(
            wedge_count(&lonely, 2, WedgeConvention::Definition).unwrap(),
            0
        );
        assert_eq!(
            wedge_count(&lonely, 2, WedgeConvention::Theorem).unwrap(),
            0
        );
        assert!(wedge_count(&lonely, 3, WedgeConvention::Theorem).is_err());
    }

    #[test]
    fn triangle_examples() {
        let t = triangle_counts(&complete(3));
        assert_eq!(t.total, 1);
        for i in 0..3 {
            assert!((t.per_node(i) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(triangle_counts(&complete(4)).total, 4);
        assert_eq!(triangle_counts(&complete(7)).total, 35);
    }

    #[test]
    fn triangles_match_brute_force() {
        let mut seed = 0;
        for n in (3..=50).step_by(7) {
            for p in [0.05, 0.2, 0.6] {
                seed += 1;
                let g = random_graph(n, p, seed);
                let fast = triangle_counts(&g);
                let (containing, total) = brute_force_triangles(&g);
                assert_eq!(fast.total, total);
                assert_eq!(fast.containing, containing);
            }
        }
        let params = ModelParams::critical(200, 0.3, 3.0).unwrap();
        let w = sample_weights(200, TailIndex::new(0.3).unwrap(), 8).unwrap();
        let g = sample_graph(&params, &w, 8).unwrap();
        let fast = triangle_counts(&g);
        assert!(fast.total > 0);
        assert_eq!(fast.total, brute_force_triangles(&g).1);
    }

    #[test]
    fn isolated_examples() {
        assert_eq!(isolated_count(&graph(7, &[])), 7);
        assert_eq!(isolated_count(&complete(5)), 0);
        assert_eq!(isolated_count(&graph(5, &[(1, 3)])), 3);
    }

    #[test]
    fn motif_record_is_consistent() {
        let g = random_graph(40, 0.2, 99);
        let rec = motif_record(&g, WedgeConvention::Theorem);
        assert_eq!(rec.wedges, wedge_counts(&g, WedgeConvention::Theorem));
        assert_eq!(
            rec.triangles.containing.iter().sum::<u64>(),
            3 * rec.triangles.total
        );
        assert_eq!(rec.isolated, isolated_count(&g));
    }

    fn pareto_sample(alpha: f64, m: usize, seed: u64) -> Vec<f64> {
        let a = TailIndex::new(alpha.min(0.999_999)).unwrap();
        let mut s = UniformStream::new(seed);
        if alpha >= 1.0 {
            (0..m).map(|_| 1.0 / (1.0 - s.next_f64())).collect()
        } else {
            (0..m)
                .map(|_| pareto_quantile(s.next_f64(), a).unwrap())
                .collect()
        }
    }

    #[test]
    fn hill_recovers_synthetic_tail_index() {
        let est = hill_estimator(&pareto_sample(1.0, 100_000, 3), 1000).unwrap();
        assert!((est - 1.0).abs() < 0.1, "{est}");
        let est = hill_estimator(&pareto_sample(0.5, 100_000, 4), 1000).unwrap();
        assert!((est - 0.5).abs() < 0.05, "{est}");
    }

    #[test]
    fn hill_rejects_degenerate_input() {
        assert!(hill_estimator(&[2.0; 100], 10).is_err());
        assert!(hill_estimator(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(hill_estimator(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(hill_estimator(&[1.0, 0.0, 3.0], 1).is_err());
    }

    #[test]
    fn pgf_examples() {
        let zeros = vec![(0, 0); 10];
        let e = empirical_joint_pgf(&zeros, 0.3, 0.7).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
        let pairs = vec![(3, 1), (0, 5), (2, 2)];
        assert_eq!(empirical_joint_pgf(&pairs, 1.0, 1.0).unwrap().value, 1.0);
        let e = empirical_joint_pgf(&pairs, 0.5, 0.5).unwrap();
        assert!((e.value - (1.0 / 16.0 + 1.0 / 32.0 + 1.0 / 16.0) / 3.0).abs() < 1e-15);
        assert!(empirical_joint_pgf(&[], 0.5, 0.5).is_err());
        assert!(empirical_joint_pgf(&pairs, 0.0, 0.5).is_err());
        assert!(empirical_joint_pgf(&pairs, 0.5, 1.5).is_err());
    }

    #[test]
    fn pgf_gap_vanishes_for_independent_pairs_and_se_is_calibrated() {
        // Independent geometric coordinates: the gap should be within a few SE of 0,
        // and the delta-method SE should match the spread over repetitions.
        let mut gaps = Vec::new();
        let mut ses = Vec::new();
        for rep in 0..200 {
            let mut s = UniformStream::new(1000 + rep);
            let pairs: Vec<(u64, u64)> = (0..500)
                .map(|_| {
                    let a = (s.next_open_closed().ln() / 0.5f64.ln()).floor() as u64;
                    let b = (s.next_open_closed().ln() / 0.3f64.ln()).floor() as u64;
                    (a, b)
                })
                .collect();
            let g = joint_pgf_gap(&pairs, 0.5, 0.6).unwrap();
            gaps.push(g.gap.value);
            ses.push(g.gap.std_error);
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let sd =
            (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gaps.len() - 1) as f64).sqrt();
        let mean_se = ses.iter().sum::<f64>() / ses.len() as f64;
        assert!(mean.abs() < 3.0 * sd / (gaps.len() as f64).sqrt());
        assert!((mean_se / sd - 1.0).abs() < 0.2, "se {mean_se} vs sd {sd}");
    }

    #[test]
    fn pgf_gap_detects_dependence() {
        let pairs: Vec<(u64, u64)> = (0..400).map(|i| (i % 5, i % 5)).collect();
        let g = joint_pgf_gap(&pairs, 0.5, 0.5).unwrap();
        assert!(g.gap.value > 5.0 * g.gap.std_error);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn graph_identities(n in 1usize..45, p in 0.0f64..0.7, seed in 0u64..10_000) {
            let g = random_graph(n, p, seed);
            let rec = degree_sequence(&g);
            prop_assert_eq!(rec.total(), 2 * g.edge_count());
            prop_assert!(rec.degrees.iter().all(|&d| d < n));
            let def = wedge_counts(&g, WedgeConvention::Definition);
            let thm = wedge_counts(&g, WedgeConvention::Theorem);
            let binom: u64 = rec.degrees.iter().map(|&d| (d * d.saturating_sub(1) / 2) as u64).sum();
            prop_assert_eq!(def.iter().sum::<u64>(), binom);
            prop_assert!(def.iter().zip(&thm).all(|(a, b)| 2 * a == *b));
            let tri = triangle_counts(&g);
            prop_assert_eq!(tri.containing.iter().sum::<u64>(), 3 * tri.total);
            prop_assert_eq!(tri.total, brute_force_triangles(&g).1);
            prop_assert_eq!(isolated_count(&g), rec.degrees.iter().filter(|&&d| d == 0).count());
        }
    }
}
