use std::collections::BTreeSet;
use std::time::Duration;

use lsi_update::eval::{n_point_avg_precision, PrecisionReport};
use lsi_update::gkl::{gkl_partial_svd, Reorthogonalization, SolverOptions};
use lsi_update::ingest::{
    apply_weighting, read_matrix_market, read_qrels, read_queries, DocumentFrequencies, Qrels, Side,
};
use lsi_update::synthetic::InstanceRng;
use lsi_update::{
    rank, score, update, LatentModel, OrthonormalBasis, ScoringParams, SparseMatrix, SparseVector,
    UpdateBatch, UpdatePolicy,
};

use crate::config::{DataSource, ExperimentConfig};
use crate::output::{emit_plot_data, CsvWriter};
use crate::{Error, Result};

/// The initial model comes from a dense SVD when `min(m, t)` is at most this.
pub const DENSE_INITIAL_LIMIT: usize = 400;

/// Cutoffs at which relevant-document counts are kept in the reports.
pub const CUTOFFS: [usize; 6] = [10, 30, 50, 100, 500, 1000];

/// Weighted term-document matrix, weighted queries (one per column; column
/// `j` is query id `j + 1`) and relevance judgments.
#[derive(Debug, Clone)]
pub struct Collection {
    pub matrix: SparseMatrix,
    pub queries: SparseMatrix,
    pub qrels: Qrels,
}

/// Results for one policy after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyStep {
    pub policy: String,
    pub map: f64,
    pub cum_time: Duration,
    pub h_rows: usize,
    pub h_cols: usize,
    pub l_effective: usize,
}

/// One appended group of documents.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub n_docs: usize,
    pub policies: Vec<PolicyStep>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<StepRecord>,
    /// `reports[s][i]`: step `s`, policy `i`.
    pub reports: Vec<Vec<PrecisionReport>>,
}

/// Reads or generates the collection and applies the weighting scheme. Query
/// weights use document frequencies of the whole matrix.
pub fn load_collection(config: &ExperimentConfig) -> Result<Collection> {
    let (tf, qtf, qrels) = match &config.source {
        DataSource::Files { matrix, queries, qrels } => {
            let tf = read_matrix_market(matrix)?;
            let qtf = read_queries(queries, tf.nrows())?;
            let qrels = read_qrels(qrels)?;
            qrels.validate(tf.ncols())?;
            (tf, qtf, qrels)
        }
        DataSource::Synthetic {
            m,
            n,
            nq,
            relevant,
            density,
        } => synthetic_collection(*m, *n, *nq, *relevant, *density, config.seed)?,
    };
    let stats = DocumentFrequencies::from_matrix(&tf);
    Ok(Collection {
        matrix: apply_weighting(&tf, &config.weighting, Side::Document, &stats)?,
        queries: apply_weighting(&qtf, &config.weighting, Side::Query, &stats)?,
        qrels,
    })
}

/// Random counts in `1..=4`; each query takes three terms of a random
/// document, and its relevant set is the documents sharing the most query
/// terms (ties to the lower index).
fn synthetic_collection(
    m: usize,
    n: usize,
    nq: usize,
    relevant: usize,
    density: f64,
    seed: u64,
) -> Result<(SparseMatrix, SparseMatrix, Qrels)> {
    let mut g = InstanceRng::new(seed);
    let tf = g.sparse(m, n, density).map_values(|_, _, v| (v * 4.0).ceil());
    let dense = tf.to_dense();
    let mut triplets = Vec::new();
    let mut qrels = Qrels::new();
    for q in 0..nq {
        let doc = g.index(0, n - 1);
        let (rows, _) = tf.column(doc);
        let mut terms: Vec<usize> = rows.to_vec();
        if terms.is_empty() {
            terms.push(g.index(0, m - 1));
        }
        let mut picked = BTreeSet::new();
        for _ in 0..3 {
            picked.insert(terms[g.index(0, terms.len() - 1)]);
        }
        triplets.extend(picked.iter().map(|&i| (i, q, 1.0)));
        let overlap = nalgebra::DVector::from_fn(n, |j, _| {
            picked.iter().map(|&i| dense[(i, j)]).sum::<f64>()
        });
        for d in rank(&overlap, relevant) {
            if overlap[d] > 0.0 {
                qrels.insert(q + 1, d);
            }
        }
    }
    let queries = SparseMatrix::from_triplets(m, nq, &triplets)?;
    Ok((tf, queries, qrels))
}

fn initial_model(a: &SparseMatrix, k: usize) -> Result<LatentModel> {
    if a.nrows().min(a.ncols()) <= DENSE_INITIAL_LIMIT {
        return Ok(LatentModel::from_dense(&a.to_dense(), k)?);
    }
    let opts = SolverOptions {
        tol: 1e-8,
        max_iter: None,
        start: None,
        reorth: Reorthogonalization::Full,
    };
    let s = gkl_partial_svd(a, k, &opts)?;
    if s.values.len() < k {
        return Err(Error::Config(format!(
            "initial matrix has only {} nonzero singular values, k = {k}",
            s.values.len()
        )));
    }
    Ok(LatentModel::new(
        s.values,
        OrthonormalBasis::with_tolerance(s.left, 1e-8)?,
        OrthonormalBasis::with_tolerance(s.right, 1e-8)?,
    )?)
}

/// A short final group may hold fewer documents than the configured `l`.
fn clamp_to_batch(policy: &UpdatePolicy, p: usize) -> UpdatePolicy {
    match policy {
        UpdatePolicy::SingularVectors { l, l2, solver } => UpdatePolicy::SingularVectors {
            l: (*l).min(p),
            l2: l2.map(|v| v.min(p)),
            solver: solver.clone(),
        },
        UpdatePolicy::Gkl { l, l2 } => UpdatePolicy::Gkl {
            l: (*l).min(p),
            l2: l2.map(|v| v.min(p)),
        },
        other => other.clone(),
    }
}

fn mean_average_precision(
    model: &LatentModel,
    collection: &Collection,
    params: &ScoringParams,
    n_points: usize,
) -> Result<PrecisionReport> {
    let ndocs = model.ndocs();
    let mut rankings = Vec::new();
    for j in 0..collection.queries.ncols() {
        let q = SparseVector::from_column(&collection.queries, j);
        let r = score(model, &q, params)?;
        let relevant = collection.qrels.relevant_within(j + 1, ndocs);
        rankings.push((j + 1, rank(&r, ndocs), relevant));
    }
    // validate n_points even when no query has judged documents
    n_point_avg_precision(&[0], &BTreeSet::from([0]), n_points)?;
    Ok(PrecisionReport::from_rankings(
        rankings.iter().map(|(q, r, rel)| (*q, r.as_slice(), rel)),
        n_points,
        &CUTOFFS,
    )?)
}

/// Runs every policy on its own copy of the initial model. If `config.out`
/// is set, `results.csv` is written there as the run progresses and the plot
/// data files once it ends.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let collection = load_collection(config)?;
    run_on_collection(config, &collection)
}

pub(crate) fn run_on_collection(config: &ExperimentConfig, collection: &Collection) -> Result<ExperimentOutput> {
    config.validate()?;
    let a = &collection.matrix;
    let (m, n_all) = a.shape();
    let n = config.max_docs.map_or(n_all, |cap| cap.min(n_all));
    let (k, t, p) = (config.k, config.t, config.p);
    if t + p > n {
        return Err(Error::Config(format!("t + p = {} exceeds the {n} available documents", t + p)));
    }
    if k > m.min(t) {
        return Err(Error::Config(format!("k = {k} exceeds min(m, t) = {}", m.min(t))));
    }
    if collection.queries.nrows() != m {
        return Err(Error::Config(format!(
            "queries have {} terms, matrix has {m}",
            collection.queries.nrows()
        )));
    }
    let params = ScoringParams {
        alpha: config.alpha,
        normalize: config.normalize,
    };

    let initial = initial_model(&a.columns(0..t)?, k)?;
    let mut models: Vec<LatentModel> = vec![initial; config.policies.len()];
    let mut elapsed = vec![Duration::ZERO; config.policies.len()];

    let mut csv = match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(CsvWriter::create(&dir.join("results.csv"), config.deterministic)?)
        }
        None => None,
    };

    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut start = t;
    let mut step = 0;
    while start < n {
        let end = (start + p).min(n);
        step += 1;
        let batch = UpdateBatch::AddDocuments(a.columns(start..end)?);
        let mut row = Vec::with_capacity(models.len());
        let mut step_reports = Vec::with_capacity(models.len());
        for (i, spec) in config.policies.iter().enumerate() {
            let policy = clamp_to_batch(spec.policy(), end - start);
            let (next, stats) = update(&models[i], &batch, &policy)?;
            elapsed[i] += stats.elapsed;
            models[i] = next;
            let report = mean_average_precision(&models[i], collection, &params, config.n_points)?;
            row.push(PolicyStep {
                policy: spec.label(),
                map: report.mean_average_precision,
                cum_time: elapsed[i],
                h_rows: stats.h_rows,
                h_cols: stats.h_cols,
                l_effective: stats.effective_l,
            });
            step_reports.push(report);
        }
        let record = StepRecord {
            step,
            n_docs: end,
            policies: row,
        };
        if let Some(w) = csv.as_mut() {
            w.write(&record)?;
        }
        records.push(record);
        reports.push(step_reports);
        start = end;
    }
    if let Some(dir) = &config.out {
        emit_plot_data(&records, dir, config.deterministic)?;
    }
    Ok(ExperimentOutput { records, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    #[test]
    fn synthetic_preset_steps() {
        let out = run_experiment(&Preset::Synthetic.config()).unwrap();
        let docs: Vec<_> = out.records.iter().map(|r| r.n_docs).collect();
        assert_eq!(docs, vec![15, 20, 25, 30]);
        for r in &out.records {
            assert_eq!(r.policies.len(), 4);
            assert!(r.policies.iter().all(|p| (0.0..=1.0).contains(&p.map)));
        }
    }

    #[test]
    fn last_group_may_be_short() {
        let mut c = Preset::Synthetic.config();
        c.max_docs = Some(27);
        let out = run_experiment(&c).unwrap();
        let docs: Vec<_> = out.records.iter().map(|r| r.n_docs).collect();
        assert_eq!(docs, vec![15, 20, 25, 27]);
    }

    #[test]
    fn rejects_infeasible_sizes() {
        let mut c = Preset::Synthetic.config();
        c.t = 28;
        assert!(run_experiment(&c).is_err());
        let mut c = Preset::Synthetic.config();
        c.max_docs = Some(12);
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn synthetic_collection_has_judgments() {
        let c = load_collection(&Preset::Synthetic.config()).unwrap();
        assert_eq!(c.matrix.shape(), (20, 30));
        assert_eq!(c.queries.ncols(), 5);
        assert_eq!(c.qrels.len(), 5);
    }
}
