//! Active-learning rounds: build a display per round (designed or via a
//! baseline picker), query the simulated oracle, retrain the classifier on
//! every label gathered so far, and record the accuracy trace.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::display::{self, DisplayProblem, GammaMode};
use crate::error::{Error, Result};
use crate::net::{self, ActivationSpec, LatentModel, TrainConfig};
use crate::numerics::{pairwise_sq_dists, SeededRng};
use crate::skeleton::Pool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DesignedAmbient,
    DesignedLatent,
    Random,
    UncertaintyMargin,
    DiversityCoreset,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::DesignedAmbient => "designed_ambient",
            Strategy::DesignedLatent => "designed_latent",
            Strategy::Random => "random",
            Strategy::UncertaintyMargin => "uncertainty_margin",
            Strategy::DiversityCoreset => "diversity_coreset",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "designed_ambient" => Ok(Strategy::DesignedAmbient),
            "designed_latent" => Ok(Strategy::DesignedLatent),
            "random" => Ok(Strategy::Random),
            "uncertainty_margin" => Ok(Strategy::UncertaintyMargin),
            "diversity_coreset" => Ok(Strategy::DiversityCoreset),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Labeling authority over the pool's hidden labels, with a ledger of
/// consumed samples.
#[derive(Debug, Clone)]
pub struct Oracle {
    labels: Vec<usize>,
    labeled: BTreeSet<usize>,
}

impl Oracle {
    pub fn new(pool: &Pool) -> Self {
        Self { labels: pool.labels.clone(), labeled: BTreeSet::new() }
    }

    /// Query a sample's label; repeat queries return the same label and
    /// do not extend the ledger.
    pub fn query(&mut self, index: usize) -> usize {
        self.labeled.insert(index);
        self.labels[index]
    }

    pub fn is_labeled(&self, index: usize) -> bool {
        self.labeled.contains(&index)
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labeled.iter().copied().collect()
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled.len()
    }
}

/// Solver and model settings shared by every round of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunParams {
    pub display_k: usize,
    pub display_tol: f64,
    pub display_max_iters: usize,
    pub sigma_ratio: f64,
    pub gamma: GammaMode,
    pub net_depth: usize,
    pub activation: ActivationSpec,
    /// None means the 1/p default
    pub lambda: Option<f64>,
    pub train: TrainConfig,
    pub certify_samples: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            display_k: 6,
            display_tol: 1e-6,
            display_max_iters: 200,
            sigma_ratio: 2.0,
            gamma: GammaMode::Adaptive,
            net_depth: 3,
            activation: ActivationSpec::default(),
            lambda: None,
            train: TrainConfig::default(),
            certify_samples: 200,
        }
    }
}

/// Per-round run record, one JSON object per round in the record file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub strategy: String,
    pub picked: Vec<usize>,
    pub labeling_rate: f64,
    pub accuracy: f64,
    pub solver_iterations: Option<usize>,
    pub certificate_k_emp: Option<f64>,
    pub certificate_m_emp: Option<f64>,
    pub fallback_random: bool,
    pub partial_display: bool,
}

/// One active-learning run: a sequential state machine over rounds.
#[derive(Debug)]
pub struct AlRun {
    pub strategy: Strategy,
    pub params: RunParams,
    pub seed: u64,
    pub round: usize,
    pub budget_rounds: usize,
    /// ambient raw designed exemplars, one column per exemplar (ambient
    /// strategy history)
    pub designed_ambient_history: Vec<Array1<f64>>,
    /// grounded pool indices of designed exemplars (latent strategy
    /// history, re-encoded each round under the fresh network)
    pub designed_grounded: Vec<usize>,
    pub classifier: Option<LatentModel>,
    pub records: Vec<RoundRecord>,
}

impl AlRun {
    pub fn new(strategy: Strategy, params: RunParams, seed: u64, budget_rounds: usize) -> Self {
        Self {
            strategy,
            params,
            seed,
            round: 0,
            budget_rounds,
            designed_ambient_history: Vec::new(),
            designed_grounded: Vec::new(),
            classifier: None,
            records: Vec::new(),
        }
    }

    pub fn accuracy_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.accuracy).collect()
    }

    /// Round budget for a target labeling rate: T = ceil(rate * n / K).
    pub fn rounds_for_rate(rate: f64, pool_size: usize, k: usize) -> usize {
        ((rate * pool_size as f64) / k as f64).ceil() as usize
    }
}

/// Map each designed exemplar to its nearest unlabeled pool sample
/// (ambient squared Euclidean); exemplars are assigned greedily in order
/// of ascending nearest distance, each taking its next-nearest if the
/// closest is already taken.
pub fn ground_exemplars(
    exemplars: &Array2<f64>,
    pool: &Pool,
    unlabeled: &[usize],
) -> Result<(Vec<usize>, bool)> {
    let candidates = pool.columns(unlabeled);
    let d = pairwise_sq_dists(exemplars, &candidates)?; // K x |unlabeled|
    let k = exemplars.ncols();
    let partial = unlabeled.len() < k;
    // order exemplars by ascending nearest distance
    let mut order: Vec<usize> = (0..k).collect();
    let nearest: Vec<f64> = (0..k)
        .map(|e| d.row(e).iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    order.sort_by(|&a, &b| nearest[a].partial_cmp(&nearest[b]).unwrap().then(a.cmp(&b)));
    let mut taken = vec![false; unlabeled.len()];
    let mut picks = Vec::new();
    for &e in &order {
        let mut candidates_sorted: Vec<usize> = (0..unlabeled.len()).collect();
        candidates_sorted.sort_by(|&a, &b| {
            d[(e, a)].partial_cmp(&d[(e, b)]).unwrap().then(a.cmp(&b))
        });
        if let Some(&c) = candidates_sorted.iter().find(|&&c| !taken[c]) {
            taken[c] = true;
            picks.push(unlabeled[c]);
        }
    }
    picks.sort_unstable();
    Ok((picks, partial))
}

/// The K unlabeled samples with the smallest top1-top2 score margin.
pub fn uncertainty_margin_pick(
    model: &LatentModel,
    pool: &Pool,
    k: usize,
    unlabeled: &[usize],
) -> Vec<usize> {
    let mut margins: Vec<(f64, usize)> = unlabeled
        .iter()
        .map(|&i| {
            let scores = model.scores(&pool.flat.column(i).to_owned());
            let mut top1 = f64::NEG_INFINITY;
            let mut top2 = f64::NEG_INFINITY;
            for &s in scores.iter() {
                if s > top1 {
                    top2 = top1;
                    top1 = s;
                } else if s > top2 {
                    top2 = s;
                }
            }
            (top1 - top2, i)
        })
        .collect();
    margins.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    margins.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Greedy k-center over the unlabeled pool: repeatedly take the sample
/// maximizing its distance to the nearest already-selected-or-labeled
/// sample. With nothing labeled, the first pick is the sample farthest
/// from the pool centroid. Ties break on the lowest index.
pub fn diversity_coreset_pick(
    pool: &Pool,
    k: usize,
    labeled: &[usize],
    unlabeled: &[usize],
) -> Vec<usize> {
    let mut picks = Vec::new();
    let mut covered: Vec<usize> = labeled.to_vec();
    let mut remaining: Vec<usize> = unlabeled.to_vec();
    if covered.is_empty() && !remaining.is_empty() && k > 0 {
        let train = pool.train_indices();
        let p = pool.dim();
        let mut centroid = Array1::<f64>::zeros(p);
        for &i in &train {
            centroid += &pool.flat.column(i);
        }
        centroid.mapv_inplace(|v| v / train.len() as f64);
        let mut best = remaining[0];
        let mut best_d = f64::NEG_INFINITY;
        for &i in &remaining {
            let diff = &pool.flat.column(i) - &centroid;
            let dist = diff.dot(&diff);
            if dist > best_d {
                best_d = dist;
                best = i;
            }
        }
        picks.push(best);
        covered.push(best);
        remaining.retain(|&i| i != best);
    }
    while picks.len() < k && !remaining.is_empty() {
        let mut best = remaining[0];
        let mut best_d = f64::NEG_INFINITY;
        for &i in &remaining {
            let mut nearest = f64::INFINITY;
            for &c in &covered {
                let diff = &pool.flat.column(i) - &pool.flat.column(c);
                nearest = nearest.min(diff.dot(&diff));
            }
            if nearest > best_d {
                best_d = nearest;
                best = i;
            }
        }
        picks.push(best);
        covered.push(best);
        remaining.retain(|&i| i != best);
    }
    picks
}

/// Macro-averaged accuracy over the classes present in the test split.
pub fn evaluate(model: &LatentModel, pool: &Pool) -> f64 {
    let test = pool.test_indices();
    let classes = pool.num_classes;
    let mut correct = vec![0usize; classes];
    let mut total = vec![0usize; classes];
    for &i in &test {
        let label = pool.labels[i];
        total[label] += 1;
        if model.predict(&pool.flat.column(i).to_owned()) == label {
            correct[label] += 1;
        }
    }
    let mut sum = 0.0;
    let mut present = 0;
    for c in 0..classes {
        if total[c] > 0 {
            sum += correct[c] as f64 / total[c] as f64;
            present += 1;
        }
    }
    if present == 0 {
        0.0
    } else {
        sum / present as f64
    }
}

/// Solve the display objective on `pool_repr` (ambient or latent
/// coordinates) against history `history`, with default hyperparameters.
pub fn design_display(
    pool_repr: &Array2<f64>,
    history: &Array2<f64>,
    k: usize,
    params: &RunParams,
    rng: &mut SeededRng,
) -> Result<display::DisplayState> {
    let (alpha, beta, sigma) =
        display::default_hypers(pool_repr.nrows(), k, history.ncols(), params.sigma_ratio);
    let prob = DisplayProblem {
        pool: pool_repr.clone(),
        history: history.clone(),
        k,
        alpha,
        beta,
        gamma: params.gamma,
        sigma,
    };
    display::solve(&prob, rng, params.display_max_iters, params.display_tol)
}

fn columns_matrix(cols: &[Array1<f64>], p: usize) -> Array2<f64> {
    let mut m = Array2::zeros((p, cols.len()));
    for (i, c) in cols.iter().enumerate() {
        m.column_mut(i).assign(c);
    }
    m
}

/// Run one AL round: pick or design a display, label it, retrain the
/// classifier from scratch on all labels so far, extend the history, and
/// record the test accuracy.
pub fn round(run: &mut AlRun, pool: &Pool, oracle: &mut Oracle, rng: &mut SeededRng) -> Result<()> {
    let train_idx = pool.train_indices();
    let unlabeled: Vec<usize> = train_idx
        .iter()
        .copied()
        .filter(|&i| !oracle.is_labeled(i))
        .collect();
    if unlabeled.is_empty() {
        return Err(Error::BudgetComplete);
    }
    let k = run.params.display_k.min(unlabeled.len());
    let p = pool.dim();
    let mut round_rng = rng.derive(run.round as u64 + 1);

    let mut solver_iterations = None;
    let mut cert_summary = None;
    let mut fallback_random = false;
    let mut partial_display = false;
    let mut designed_ambient: Option<Array2<f64>> = None;

    let picked: Vec<usize> = match run.strategy {
        Strategy::Random => {
            let choice = round_rng.choose_distinct(unlabeled.len(), k);
            choice.into_iter().map(|c| unlabeled[c]).collect()
        }
        Strategy::UncertaintyMargin => match &run.classifier {
            Some(model) => uncertainty_margin_pick(model, pool, k, &unlabeled),
            None => {
                fallback_random = true;
                let choice = round_rng.choose_distinct(unlabeled.len(), k);
                choice.into_iter().map(|c| unlabeled[c]).collect()
            }
        },
        Strategy::DiversityCoreset => {
            diversity_coreset_pick(pool, k, &oracle.labeled_indices(), &unlabeled)
        }
        Strategy::DesignedAmbient => {
            let x = pool.columns(&unlabeled);
            let history = columns_matrix(&run.designed_ambient_history, p);
            let state = design_display(&x, &history, k, &run.params, &mut round_rng)?;
            solver_iterations = Some(state.iteration);
            let (picks, partial) = ground_exemplars(&state.exemplars, pool, &unlabeled)?;
            partial_display = partial;
            designed_ambient = Some(state.exemplars);
            picks
        }
        Strategy::DesignedLatent => {
            // latent mapper: the current classifier's stack, re-projected
            // to exact orthonormality; a fresh seeded stack before any
            // training
            let model = match &run.classifier {
                Some(m) => m.clone(),
                None => fresh_model(pool, &run.params, run.seed)?,
            };
            let mut stack = model.stack.clone();
            stack.project_orthonormal()?;
            let cert = net::certify(&stack, &mut round_rng.derive(7), run.params.certify_samples)?;
            cert_summary = Some((cert.k_emp, cert.m_emp));
            let x = pool.columns(&unlabeled);
            let z = net::latent_map(&stack, &cert, &x)?;
            // history in the current latent coordinates: re-encode the
            // grounded ambient samples of previous designed displays
            let hist_ambient = pool.columns(&run.designed_grounded);
            let z_hist = net::latent_map(&stack, &cert, &hist_ambient)?;
            // a fixed gamma is specified in ambient units; rescale it by the
            // measured mean squared-distance ratio so the softmin sharpness
            // is the same in both spaces
            let mut latent_params = run.params.clone();
            if let GammaMode::Fixed(g) = run.params.gamma {
                let da = crate::numerics::pairwise_sq_dists(&x, &x)?;
                let dz = crate::numerics::pairwise_sq_dists(&z, &z)?;
                let ma = da.mean().unwrap_or(0.0);
                let mz = dz.mean().unwrap_or(0.0);
                if ma > 0.0 && mz > 0.0 {
                    latent_params.gamma = GammaMode::Fixed(g * mz / ma);
                }
            }
            let state = design_display(&z, &z_hist, k, &latent_params, &mut round_rng)?;
            solver_iterations = Some(state.iteration);
            let ambient_v = net::latent_unmap(&stack, &cert, &state.exemplars)?;
            let (picks, partial) = ground_exemplars(&ambient_v, pool, &unlabeled)?;
            partial_display = partial;
            picks
        }
    };

    for &i in &picked {
        oracle.query(i);
    }

    // retrain from scratch on everything labeled so far
    let labeled = oracle.labeled_indices();
    let x_train = pool.columns(&labeled);
    let y_train: Vec<usize> = labeled.iter().map(|&i| pool.labels[i]).collect();
    let mut model = fresh_model(pool, &run.params, run.seed ^ (run.round as u64 + 1))?;
    net::train_latent(
        &mut model,
        &x_train,
        &y_train,
        &run.params.train,
        &mut round_rng.derive(11),
    )?;
    let accuracy = evaluate(&model, pool);
    run.classifier = Some(model);

    match run.strategy {
        Strategy::DesignedAmbient => {
            if let Some(v) = designed_ambient {
                for col in v.columns() {
                    run.designed_ambient_history.push(col.to_owned());
                }
            }
        }
        Strategy::DesignedLatent => {
            run.designed_grounded.extend(&picked);
        }
        _ => {}
    }

    let rate = oracle.labeled_count() as f64 / train_idx.len() as f64;
    run.records.push(RoundRecord {
        round: run.round,
        strategy: run.strategy.name().to_string(),
        picked,
        labeling_rate: rate,
        accuracy,
        solver_iterations,
        certificate_k_emp: cert_summary.map(|c| c.0),
        certificate_m_emp: cert_summary.map(|c| c.1),
        fallback_random,
        partial_display,
    });
    run.round += 1;
    Ok(())
}

fn fresh_model(pool: &Pool, params: &RunParams, seed: u64) -> Result<LatentModel> {
    let p = pool.dim();
    let lambda = params.lambda.unwrap_or(1.0 / p as f64);
    LatentModel::new(
        p,
        params.net_depth,
        pool.num_classes,
        params.activation,
        lambda,
        seed,
    )
}

/// Execute the full budget of rounds.
pub fn run_all(run: &mut AlRun, pool: &Pool, oracle: &mut Oracle, rng: &mut SeededRng) -> Result<()> {
    for _ in run.round..run.budget_rounds {
        match round(run, pool, oracle, rng) {
            Ok(()) => {}
            Err(Error::BudgetComplete) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{synth_pool, SynthSpec};

    fn small_pool(seed: u64) -> Pool {
        let spec = SynthSpec {
            classes: 3,
            per_class: 8,
            test_per_class: 3,
            joints: 3,
            frames: 8,
            noise: 0.3,
            chunks: 4,
        };
        synth_pool(&spec, &mut SeededRng::new(seed)).unwrap()
    }

    fn quick_params() -> RunParams {
        RunParams {
            display_k: 3,
            train: TrainConfig { epochs: 40, batch: 8, lr0: 0.05, momentum: 0.9 },
            certify_samples: 50,
            ..RunParams::default()
        }
    }

    #[test]
    fn oracle_is_consistent_and_keeps_ledger() {
        let pool = small_pool(1);
        let mut oracle = Oracle::new(&pool);
        let a = oracle.query(3);
        let b = oracle.query(3);
        assert_eq!(a, b);
        assert_eq!(oracle.labeled_count(), 1);
        assert!(oracle.is_labeled(3));
    }

    #[test]
    fn ground_exact_match_chooses_that_index() {
        let pool = small_pool(2);
        let unlabeled = pool.train_indices();
        let v = pool.columns(&[unlabeled[5]]);
        let (picks, partial) = ground_exemplars(&v, &pool, &unlabeled).unwrap();
        assert_eq!(picks, vec![unlabeled[5]]);
        assert!(!partial);
    }

    #[test]
    fn ground_collision_takes_next_nearest() {
        let pool = small_pool(3);
        let unlabeled = pool.train_indices();
        // two identical exemplars both nearest to the same sample
        let target = pool.columns(&[unlabeled[0], unlabeled[0]]);
        let (picks, _) = ground_exemplars(&target, &pool, &unlabeled).unwrap();
        assert_eq!(picks.len(), 2);
        assert_ne!(picks[0], picks[1]);
        assert!(picks.contains(&unlabeled[0]));
    }

    #[test]
    fn margin_picks_match_sort_oracle() {
        let pool = small_pool(4);
        let model = fresh_model(&pool, &quick_params(), 9).unwrap();
        let unlabeled = pool.train_indices();
        let k = 5;
        let picks = uncertainty_margin_pick(&model, &pool, k, &unlabeled);
        // brute force: compute all margins and sort
        let mut all: Vec<(f64, usize)> = unlabeled
            .iter()
            .map(|&i| {
                let s = model.scores(&pool.flat.column(i).to_owned());
                let mut v: Vec<f64> = s.to_vec();
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                (v[0] - v[1], i)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expect: Vec<usize> = all.into_iter().take(k).map(|(_, i)| i).collect();
        assert_eq!(picks, expect);
    }

    #[test]
    fn margin_picks_everything_when_k_is_pool() {
        let pool = small_pool(5);
        let model = fresh_model(&pool, &quick_params(), 10).unwrap();
        let unlabeled = pool.train_indices();
        let picks = uncertainty_margin_pick(&model, &pool, unlabeled.len(), &unlabeled);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, unlabeled);
    }

    #[test]
    fn coreset_two_clusters_one_each() {
        // two tight clusters of flattened features
        let spec = SynthSpec {
            classes: 2,
            per_class: 6,
            test_per_class: 0,
            joints: 2,
            frames: 4,
            noise: 0.05,
            chunks: 4,
        };
        let pool = synth_pool(&spec, &mut SeededRng::new(6)).unwrap();
        let unlabeled = pool.train_indices();
        let picks = diversity_coreset_pick(&pool, 2, &[], &unlabeled);
        let classes: BTreeSet<usize> = picks.iter().map(|&i| pool.labels[i]).collect();
        assert_eq!(classes.len(), 2, "picks {picks:?} landed in one cluster");
    }

    #[test]
    fn coreset_identical_pool_picks_lowest_indices() {
        let spec = SynthSpec {
            classes: 1,
            per_class: 6,
            test_per_class: 0,
            joints: 2,
            frames: 4,
            noise: 0.0,
            chunks: 4,
        };
        let pool = synth_pool(&spec, &mut SeededRng::new(7)).unwrap();
        let unlabeled = pool.train_indices();
        let picks = diversity_coreset_pick(&pool, 3, &[], &unlabeled);
        assert_eq!(picks, vec![0, 1, 2]);
    }

    #[test]
    fn evaluate_macro_average() {
        let pool = small_pool(8);
        // a model that predicts class 0 always: class 0 right, others wrong
        let mut model = fresh_model(&pool, &quick_params(), 11).unwrap();
        model.head_w.fill(0.0);
        model.head_b.fill(0.0);
        model.head_b[0] = 1.0;
        let acc = evaluate(&model, &pool);
        assert!((acc - 1.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn rounds_accounting_and_no_double_labels() {
        let pool = small_pool(9);
        let mut oracle = Oracle::new(&pool);
        let params = quick_params();
        let mut run = AlRun::new(Strategy::Random, params, 42, 3);
        let mut rng = SeededRng::new(42);
        run_all(&mut run, &pool, &mut oracle, &mut rng).unwrap();
        assert_eq!(run.records.len(), 3);
        let total: usize = run.records.iter().map(|r| r.picked.len()).sum();
        assert_eq!(total, oracle.labeled_count());
        assert_eq!(total, 9); // 3 rounds x K=3, no duplicates
        let rate = run.records.last().unwrap().labeling_rate;
        assert!((rate - 9.0 / 24.0).abs() <= 1e-12);
    }

    #[test]
    fn strategy_runs_are_deterministic() {
        for strategy in [
            Strategy::Random,
            Strategy::UncertaintyMargin,
            Strategy::DiversityCoreset,
            Strategy::DesignedAmbient,
            Strategy::DesignedLatent,
        ] {
            let pool = small_pool(10);
            let params = quick_params();
            let mut run_a = AlRun::new(strategy, params.clone(), 7, 2);
            let mut oracle_a = Oracle::new(&pool);
            run_all(&mut run_a, &pool, &mut oracle_a, &mut SeededRng::new(7)).unwrap();
            let mut run_b = AlRun::new(strategy, params, 7, 2);
            let mut oracle_b = Oracle::new(&pool);
            run_all(&mut run_b, &pool, &mut oracle_b, &mut SeededRng::new(7)).unwrap();
            for (a, b) in run_a.records.iter().zip(run_b.records.iter()) {
                assert_eq!(a.picked, b.picked, "{strategy:?}");
                assert_eq!(a.accuracy.to_bits(), b.accuracy.to_bits(), "{strategy:?}");
            }
        }
    }

    #[test]
    fn designed_history_grows_by_k_per_round() {
        let pool = small_pool(11);
        let params = quick_params();
        let mut run = AlRun::new(Strategy::DesignedAmbient, params, 3, 2);
        let mut oracle = Oracle::new(&pool);
        run_all(&mut run, &pool, &mut oracle, &mut SeededRng::new(3)).unwrap();
        assert_eq!(run.designed_ambient_history.len(), 2 * 3);
    }

    #[test]
    fn diversity_pushes_new_displays_away_from_history() {
        // with the diversity term on, second-round exemplars sit farther
        // from the first display than an alpha=0 ablation, most seeds
        let mut wins = 0;
        for seed in 0..10u64 {
            let pool = small_pool(200 + seed);
            let unlabeled = pool.train_indices();
            let x = pool.columns(&unlabeled);
            let params = quick_params();
            let mut rng = SeededRng::new(seed);
            let first = design_display(&x, &Array2::zeros((pool.dim(), 0)), 3, &params, &mut rng).unwrap();
            let h = first.exemplars.clone();

            let mut rng_div = SeededRng::new(seed + 1000);
            let with_div = design_display(&x, &h, 3, &params, &mut rng_div).unwrap();
            let mut rng_abl = SeededRng::new(seed + 1000);
            let mut params_abl = params.clone();
            params_abl.sigma_ratio = 2.0;
            // alpha = 0 ablation: empty history
            let without =
                design_display(&x, &Array2::zeros((pool.dim(), 0)), 3, &params_abl, &mut rng_abl)
                    .unwrap();

            let min_dist = |v: &Array2<f64>| -> f64 {
                pairwise_sq_dists(&h, v)
                    .unwrap()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            };
            if min_dist(&with_div.exemplars) >= min_dist(&without.exemplars) {
                wins += 1;
            }
        }
        assert!(wins >= 8, "diversity term won only {wins}/10 seeds");
    }
}
