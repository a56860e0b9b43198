use serde::{Deserialize, Serialize};

use super::ensemble::{run_ensemble, spec_metadata, EnsembleSpec, Statistic};
use super::seeding::{derive_substream, Purpose};
use super::stats::mean_se;
use super::table::{Cell, Column, ColumnKind, StatTable};
use crate::error::{invalid, Result};
use crate::fmt_f64;
use crate::graphgen::ModelParams;
use crate::heavytail::TailIndex;
use crate::motifs::joint_pgf_gap;
use crate::oracles::{
    dust_expectation, dust_expectation_product_form, dust_thresholds, joint_pgf_limit,
    MixedPoissonLaw,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DustScanSpec {
    pub alpha: TailIndex,
    pub k_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    pub master_seed: u64,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl DustScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() || self.k_grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(invalid("k grid must be nonempty and positive"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("n grid must be nonempty and strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(invalid("n grid must start at 2 or more"));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas must be at least 1"));
        }
        Ok(())
    }
}

/// For each `(k, n)` at the critical scale `eps = k n^(-1/alpha)`: the fraction
/// of replicas with an isolated node, the mean number of isolated nodes, and
/// both analytic expectations. `in_overlap` flags `k` between the two
/// threshold constants, where no direction is predicted.
pub fn experiment_dust_scan(spec: &DustScanSpec) -> Result<StatTable> {
    use ColumnKind::*;
    spec.validate()?;
    let thresholds = dust_thresholds(spec.alpha)?;
    let mut table = StatTable::new(vec![
        Column::new("k", "", Float),
        Column::new("n", "nodes", Int),
        Column::new("epsilon", "", Float),
        Column::new("replicas", "", Int),
        Column::new("point_seed", "", Uint),
        Column::new("fraction_with_dust", "", Float),
        Column::new("fraction_se", "", Float),
        Column::new("mean_isolated", "nodes", Float),
        Column::new("mean_isolated_se", "nodes", Float),
        Column::new("oracle_exact", "nodes", Float),
        Column::new("oracle_product_form", "nodes", Float),
        Column::new("in_overlap", "", Bool),
    ]);
    spec_metadata(&mut table, "dust-scan", spec)?;
    table.metadata.insert("k1".into(), fmt_f64(thresholds.k1));
    table.metadata.insert("k2".into(), fmt_f64(thresholds.k2));
    let mut point = 0u64;
    for &k in &spec.k_grid {
        for &n in &spec.n_grid {
            let params = ModelParams::critical(n, spec.alpha.get(), k)?;
            let eps = params.epsilon();
            let point_seed = derive_substream(spec.master_seed, point, Purpose::GridPoint);
            point += 1;
            let mut ens = EnsembleSpec::new(params, spec.replicas, point_seed)
                .with_statistics(&[Statistic::Dust]);
            ens.threads = spec.threads;
            let rows = run_ensemble(&ens)?;
            let isolated = rows.column_f64("isolated")?;
            let has: Vec<f64> = isolated
                .iter()
                .map(|&x| f64::from(u8::from(x > 0.0)))
                .collect();
            let frac = has.iter().sum::<f64>() / has.len() as f64;
            let frac_se = (frac * (1.0 - frac) / has.len() as f64).sqrt();
            let (mean, mean_se) = mean_se(&isolated);
            table.push(vec![
                k.into(),
                n.into(),
                eps.into(),
                spec.replicas.into(),
                point_seed.into(),
                frac.into(),
                frac_se.into(),
                mean.into(),
                mean_se.into(),
                dust_expectation(n, eps, spec.alpha)?.into(),
                dust_expectation_product_form(n, eps, spec.alpha)?.into(),
                thresholds.in_overlap(k).into(),
            ])?;
        }
    }
    Ok(table)
}

/// Per-replica degrees of the two joint nodes, and one summary row per PGF
/// grid point comparing the empirical joint PGF with the product of the
/// empirical marginals and with the large-graph limit.
#[derive(Clone, Debug, PartialEq)]
pub struct JointExperiment {
    pub pairs: StatTable,
    pub summary: StatTable,
}

pub fn experiment_joint(spec: &EnsembleSpec) -> Result<JointExperiment> {
    use ColumnKind::*;
    let mut spec = spec.clone();
    spec.statistics.insert(Statistic::JointDegree);
    let out = spec.output_path.take();
    let pairs_table = run_ensemble(&spec)?;
    let a = pairs_table.column_f64("degree_a")?;
    let b = pairs_table.column_f64("degree_b")?;
    let pairs: Vec<(u64, u64)> = a
        .iter()
        .zip(&b)
        .map(|(&x, &y)| (x as u64, y as u64))
        .collect();

    let mut summary = StatTable::new(vec![
        Column::new("t", "", Float),
        Column::new("s", "", Float),
        Column::new("joint", "", Float),
        Column::new("joint_se", "", Float),
        Column::new("marginal_t", "", Float),
        Column::new("marginal_s", "", Float),
        Column::new("gap", "", Float),
        Column::new("gap_se", "", Float),
        Column::new("limit_joint", "", Float),
        Column::new("limit_product", "", Float),
    ]);
    spec_metadata(&mut summary, "joint-summary", &spec)?;
    for &(t, s) in &spec.pgf_grid {
        let g = joint_pgf_gap(&pairs, t, s)?;
        let limit = joint_pgf_limit(t, s, spec.params.alpha)?;
        summary.push(vec![
            t.into(),
            s.into(),
            g.joint.value.into(),
            g.joint.std_error.into(),
            g.marginal_t.value.into(),
            g.marginal_s.value.into(),
            g.gap.value.into(),
            g.gap.std_error.into(),
            limit.joint.into(),
            limit.product.into(),
        ])?;
    }
    if let Some(path) = out {
        pairs_table.save(&path)?;
        summary.save(&sibling(&path, "summary"))?;
    }
    Ok(JointExperiment {
        pairs: pairs_table,
        summary,
    })
}

/// `dir/stem.tag.ext` next to `path`.
pub(crate) fn sibling(path: &std::path::Path, tag: &str) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

/// Empirical law of the degree of the first joint node against the mixed
/// Poisson limit. Rows run over `k = 0..=max observed`; the metadata carries
/// the total-variation distance, with the oracle mass beyond the last row
/// counted in full.
pub fn experiment_degree_law(spec: &EnsembleSpec) -> Result<(StatTable, f64)> {
    use ColumnKind::*;
    let mut spec = spec.clone();
    spec.statistics.insert(Statistic::JointDegree);
    let out = spec.output_path.take();
    let rows = run_ensemble(&spec)?;
    let degrees: Vec<usize> = rows
        .column_f64("degree_a")?
        .iter()
        .map(|&d| d as usize)
        .collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for d in degrees {
        counts[d] += 1;
    }
    let law = MixedPoissonLaw::new(spec.params.alpha)?;
    let pmf = law.pmf_table(max)?;
    let total = spec.replicas as f64;
    let mut table = StatTable::new(vec![
        Column::new("k", "edges", Int),
        Column::new("count", "replicas", Int),
        Column::new("empirical", "", Float),
        Column::new("limit_pmf", "", Float),
    ]);
    spec_metadata(&mut table, "degree-law", &spec)?;
    let mut tv = 0.0;
    for (k, (&c, &p)) in counts.iter().zip(&pmf).enumerate() {
        let f = c as f64 / total;
        tv += (f - p).abs();
        table.push(vec![Cell::from(k), c.into(), f.into(), p.into()])?;
    }
    tv += law.ccdf(max as u64)?;
    let tv = tv / 2.0;
    table.metadata.insert("total_variation".into(), fmt_f64(tv));
    if let Some(path) = out {
        table.save(&path)?;
    }
    Ok((table, tv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dust_scan_shape_and_validation() {
        let spec = DustScanSpec {
            alpha: TailIndex::new(0.5).unwrap(),
            k_grid: vec![0.05, 0.5],
            n_grid: vec![50, 100],
            replicas: 20,
            master_seed: 3,
            threads: None,
        };
        let t = experiment_dust_scan(&spec).unwrap();
        assert_eq!(t.rows.len(), 4);
        let overlap: Vec<Cell> = t.rows.iter().map(|r| r[11].clone()).collect();
        assert_eq!(
            overlap,
            vec![false.into(), false.into(), true.into(), true.into()]
        );
        assert!(t.metadata.contains_key("k1") && t.metadata.contains_key("k2"));
        let seeds = t.column_f64("point_seed").unwrap();
        assert!(seeds.windows(2).all(|w| w[0] != w[1]));
        assert_eq!(experiment_dust_scan(&spec).unwrap(), t);

        let mut bad = spec.clone();
        bad.n_grid = vec![100, 50];
        assert!(experiment_dust_scan(&bad).is_err());
        let mut bad = spec;
        bad.k_grid = vec![-1.0];
        assert!(experiment_dust_scan(&bad).is_err());
    }

    #[test]
    fn joint_experiment_writes_both_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = EnsembleSpec::new(ModelParams::critical(100, 0.5, 1.0).unwrap(), 50, 9);
        spec.pgf_grid = vec![(0.5, 0.5), (0.9, 0.2)];
        spec.output_path = Some(dir.path().join("joint.csv"));
        let ex = experiment_joint(&spec).unwrap();
        assert_eq!(ex.pairs.rows.len(), 50);
        assert_eq!(ex.summary.rows.len(), 2);
        assert!(dir.path().join("joint.summary.csv").exists());
        let back = StatTable::load(&dir.path().join("joint.csv")).unwrap();
        assert_eq!(back, ex.pairs);
    }

    #[test]
    fn degree_law_total_variation_is_a_distance() {
        let spec = EnsembleSpec::new(ModelParams::critical(200, 0.5, 1.0).unwrap(), 100, 5);
        let (t, tv) = experiment_degree_law(&spec).unwrap();
        assert!((0.0..=1.0).contains(&tv));
        let total: f64 = t.column_f64("empirical").unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
