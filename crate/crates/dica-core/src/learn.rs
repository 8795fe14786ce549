//! Localized EM learning.
//!
//! Every learnable block is trained from its own forward/backward message
//! pairs only. One epoch presents the whole training set, then runs a fixed
//! number of multiplicative fixed-point cycles inside each block:
//!
//! ```text
//! P'(k,l) ∝ P(k,l) · Σ_n f_n(k)·b_n(l) / (f_nᵀ P b_n)      (rows renormalized)
//! ```
//!
//! which is the EM step for the per-block likelihood
//! `L(P) = Σ_n log(f_nᵀ P b_n)` and therefore never decreases it. Messages
//! are held fixed within an epoch; denominators are recomputed from the
//! current table on every cycle. Source priors get the closed-form EM
//! re-estimate (the average posterior) once per epoch.

use crate::error::{DicaError, Result};
use crate::graph::{DicaModel, Evidence, MessageState, VarEvidence};
use crate::message::{Cpt, Message};

/// Training hyper-parameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Full presentations of the training set.
    pub epochs: usize,
    /// Fixed-point cycles inside each block per epoch.
    pub inner_cycles: usize,
    /// Seed used when the caller builds the model for this run; recorded so
    /// a run is reproducible from its configuration alone.
    pub seed: u64,
    /// Inject each example's label as hard backward evidence and train the
    /// label table alongside the visible ones.
    pub supervised: bool,
    /// Prior initialization perturbation, forwarded to model construction.
    pub init_perturbation: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1,
            inner_cycles: 5,
            seed: 0,
            supervised: false,
            init_perturbation: 0.01,
        }
    }
}

/// One training example: a hard symbol for every visible variable, plus an
/// optional class label.
#[derive(Debug, Clone)]
pub struct Sample {
    pub visible: Vec<usize>,
    pub label: Option<usize>,
}

impl Sample {
    pub fn new(visible: Vec<usize>) -> Self {
        Sample { visible, label: None }
    }

    pub fn labeled(visible: Vec<usize>, label: usize) -> Self {
        Sample {
            visible,
            label: Some(label),
        }
    }

    fn evidence(&self, supervised: bool) -> Result<Evidence> {
        let mut evidence = Evidence::hard(&self.visible);
        if supervised {
            let label = self.label.ok_or_else(|| {
                DicaError::Invalid("supervised training needs a label on every example".into())
            })?;
            evidence = evidence.with_label(VarEvidence::Hard(label));
        }
        Ok(evidence)
    }
}

/// Per-example local message pairs for one block: `(f_in, b_out)`.
#[derive(Debug, Clone, Default)]
pub struct BlockStats {
    pub pairs: Vec<(Message, Message)>,
}

impl BlockStats {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Everything one statistics pass over a batch produces.
#[derive(Debug, Clone)]
pub struct BatchStats {
    /// One entry per visible block.
    pub visible: Vec<BlockStats>,
    /// Present when the pass was supervised.
    pub label: Option<BlockStats>,
    /// Per source: the posterior of every non-skipped example.
    pub source_posteriors: Vec<Vec<Message>>,
    /// Examples dropped because their evidence was contradictory.
    pub skipped_examples: usize,
}

/// Run one propagation per example and record each block's local messages:
/// the diverter replica toward the block as `f_in` and the example's
/// evidence message as `b_out`. Contradictory examples are skipped and
/// counted, not fatal.
pub fn collect_stats(
    model: &DicaModel,
    batch: &[Sample],
    supervised: bool,
) -> Result<BatchStats> {
    if batch.is_empty() {
        return Err(DicaError::Invalid("empty batch".into()));
    }
    if supervised && model.label_cpt().is_none() {
        return Err(DicaError::MissingLabelBlock);
    }
    let n = model.num_visible();
    let m = model.num_sources();
    let mut stats = BatchStats {
        visible: vec![BlockStats::default(); n],
        label: supervised.then(BlockStats::default),
        source_posteriors: vec![Vec::new(); m],
        skipped_examples: 0,
    };
    for sample in batch {
        let evidence = sample.evidence(supervised)?;
        let state = match model.propagate(&evidence, None) {
            Ok(state) => state,
            Err(DicaError::ContradictoryEvidence(_)) => {
                stats.skipped_examples += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for j in 0..n {
            stats.visible[j].pairs.push((
                state.product_toward_visible[j].clone(),
                state.visible_backward[j].clone(),
            ));
        }
        if let (Some(label_stats), Some(label_state)) = (&mut stats.label, &state.label) {
            label_stats.pairs.push((
                label_state.product_toward_label.clone(),
                label_state.label_backward.clone(),
            ));
        }
        for i in 0..m {
            stats.source_posteriors[i].push(state.source_posterior(i)?);
        }
    }
    Ok(stats)
}

/// Accumulates one cycle's numerators `Σ_n f_n(k)·b_n(l)/(f_nᵀ P b_n)`.
struct EmAccumulator {
    cols: usize,
    numer: Vec<f64>,
    skipped_terms: usize,
}

impl EmAccumulator {
    fn new(rows: usize, cols: usize) -> Self {
        EmAccumulator {
            cols,
            numer: vec![0.0; rows * cols],
            skipped_terms: 0,
        }
    }

    fn add(&mut self, cpt: &Cpt, f_in: &Message, b_out: &Message) {
        let f = f_in.values();
        let b = b_out.values();
        let mut denom = 0.0;
        for (k, &fk) in f.iter().enumerate() {
            if fk == 0.0 {
                continue;
            }
            let row = cpt.row(k);
            let mut acc = 0.0;
            for (l, &p) in row.iter().enumerate() {
                acc += p * b[l];
            }
            denom += fk * acc;
        }
        if denom == 0.0 {
            self.skipped_terms += 1;
            return;
        }
        for (k, &fk) in f.iter().enumerate() {
            if fk == 0.0 {
                continue;
            }
            let weight = fk / denom;
            let row = &mut self.numer[k * self.cols..(k + 1) * self.cols];
            for (slot, &bl) in row.iter_mut().zip(b) {
                *slot += weight * bl;
            }
        }
    }

    /// One multiplicative step: scale the current table by the accumulated
    /// numerators and renormalize each row. Rows that accumulated no mass
    /// are left unchanged.
    fn apply(&self, cpt: &Cpt) -> Cpt {
        let rows = cpt.num_rows();
        let cols = cpt.num_cols();
        let mut entries = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            let row = cpt.row(k);
            let numer = &self.numer[k * cols..(k + 1) * cols];
            let mut raw: Vec<f64> = row.iter().zip(numer).map(|(&p, &w)| p * w).collect();
            let sum: f64 = raw.iter().sum();
            if sum == 0.0 {
                entries.extend_from_slice(row);
            } else {
                for v in &mut raw {
                    *v /= sum;
                }
                entries.extend_from_slice(&raw);
            }
        }
        Cpt::new(rows, cols, entries).expect("renormalized rows stay stochastic")
    }
}

/// Result of [`update_cpt`].
#[derive(Debug, Clone)]
pub struct CptUpdate {
    pub cpt: Cpt,
    /// Pair terms dropped because `f_nᵀ P b_n` was zero (impossible while
    /// the table is strictly positive), summed over all cycles.
    pub skipped_terms: usize,
}

/// Run `cycles` multiplicative fixed-point updates of a block table against
/// fixed message statistics.
pub fn update_cpt(cpt: &Cpt, stats: &BlockStats, cycles: usize) -> Result<CptUpdate> {
    if stats.is_empty() {
        return Err(DicaError::Invalid("update needs at least one message pair".into()));
    }
    for (f_in, b_out) in &stats.pairs {
        if f_in.len() != cpt.num_rows() || b_out.len() != cpt.num_cols() {
            return Err(DicaError::Dimension(format!(
                "stats pair is {}x{}, table is {}x{}",
                f_in.len(),
                b_out.len(),
                cpt.num_rows(),
                cpt.num_cols()
            )));
        }
    }
    let mut current = cpt.clone();
    let mut skipped_terms = 0;
    for _ in 0..cycles {
        let mut acc = EmAccumulator::new(current.num_rows(), current.num_cols());
        for (f_in, b_out) in &stats.pairs {
            acc.add(&current, f_in, b_out);
        }
        skipped_terms += acc.skipped_terms;
        current = acc.apply(&current);
    }
    Ok(CptUpdate {
        cpt: current,
        skipped_terms,
    })
}

/// Closed-form prior re-estimate: the normalized sum (average) of the
/// per-example posteriors.
pub fn update_prior(prior: &Message, posteriors: &[Message]) -> Result<Message> {
    if posteriors.is_empty() {
        return Err(DicaError::Invalid("prior update needs at least one posterior".into()));
    }
    let mut sum = vec![0.0; prior.len()];
    for posterior in posteriors {
        if posterior.len() != prior.len() {
            return Err(DicaError::Dimension(format!(
                "posterior has {} entries, prior has {}",
                posterior.len(),
                prior.len()
            )));
        }
        for (slot, &v) in sum.iter_mut().zip(posterior.values()) {
            *slot += v;
        }
    }
    Message::normalize(sum)
}

/// Per-block likelihood `Σ_n log(f_nᵀ P b_n)` for fixed messages; the
/// quantity the inner cycles maximize.
pub fn local_log_likelihood(cpt: &Cpt, stats: &BlockStats) -> f64 {
    stats
        .pairs
        .iter()
        .map(|(f_in, b_out)| pair_likelihood(cpt, f_in, b_out).ln())
        .sum()
}

fn pair_likelihood(cpt: &Cpt, f_in: &Message, b_out: &Message) -> f64 {
    let b = b_out.values();
    let mut total = 0.0;
    for (k, &fk) in f_in.values().iter().enumerate() {
        if fk == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for (l, &p) in cpt.row(k).iter().enumerate() {
            acc += p * b[l];
        }
        total += fk * acc;
    }
    total
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean per-example local log-likelihood of each block (visible blocks
    /// in order, then the label block when supervised), evaluated with the
    /// epoch's final tables under the epoch's frozen messages.
    pub block_log_likelihoods: Vec<f64>,
    pub mean_log_likelihood: f64,
    pub skipped_examples: usize,
    pub skipped_terms: usize,
}

/// Training report: one entry per epoch.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochReport>,
}

impl TrainReport {
    /// CSV rendering: one line per epoch.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_local_log_likelihood,skipped_examples\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{}\n",
                e.epoch, e.mean_log_likelihood, e.skipped_examples
            ));
        }
        out
    }
}

/// Train the model in place.
///
/// Each epoch freezes the current parameters, runs `inner_cycles`
/// accumulate/update rounds for every learnable table, re-estimates the
/// priors from the same epoch's posteriors, then installs the new
/// parameters. Message statistics are recomputed from the frozen model on
/// every cycle instead of being stored, which is value-identical to keeping
/// them (propagation is deterministic) but needs memory for one example at
/// a time.
pub fn train(
    model: &mut DicaModel,
    dataset: &[Sample],
    config: &TrainConfig,
) -> Result<TrainReport> {
    if dataset.is_empty() {
        return Err(DicaError::Invalid("empty training set".into()));
    }
    if config.epochs == 0 || config.inner_cycles == 0 {
        return Err(DicaError::Invalid("epochs and inner cycles must be at least 1".into()));
    }
    if config.supervised && model.label_cpt().is_none() {
        return Err(DicaError::MissingLabelBlock);
    }
    let n = model.num_visible();
    let mut report = TrainReport::default();

    for epoch in 0..config.epochs {
        let frozen = model.clone();
        let mut visible_cpts = model.visible_cpts().to_vec();
        let mut label_cpt = if config.supervised {
            model.label_cpt().cloned()
        } else {
            None
        };
        let mut skipped_examples = 0usize;
        let mut skipped_terms = 0usize;

        for cycle in 0..config.inner_cycles {
            let mut accumulators: Vec<EmAccumulator> = visible_cpts
                .iter()
                .map(|cpt| EmAccumulator::new(cpt.num_rows(), cpt.num_cols()))
                .collect();
            let mut label_acc = label_cpt
                .as_ref()
                .map(|cpt| EmAccumulator::new(cpt.num_rows(), cpt.num_cols()));
            for sample in dataset {
                let counter = (cycle == 0).then_some(&mut skipped_examples);
                let Some(state) = propagate_or_skip(&frozen, sample, config.supervised, counter)?
                else {
                    continue;
                };
                for j in 0..n {
                    accumulators[j].add(
                        &visible_cpts[j],
                        &state.product_toward_visible[j],
                        &state.visible_backward[j],
                    );
                }
                if let (Some(acc), Some(cpt), Some(label_state)) =
                    (&mut label_acc, &label_cpt, &state.label)
                {
                    acc.add(
                        cpt,
                        &label_state.product_toward_label,
                        &label_state.label_backward,
                    );
                }
            }
            for (cpt, acc) in visible_cpts.iter_mut().zip(&accumulators) {
                skipped_terms += acc.skipped_terms;
                *cpt = acc.apply(cpt);
            }
            if let (Some(cpt), Some(acc)) = (&mut label_cpt, &label_acc) {
                skipped_terms += acc.skipped_terms;
                *cpt = acc.apply(cpt);
            }
        }

        // Final pass with the frozen messages: prior posteriors and the
        // epoch's closing per-block likelihood.
        let mut posterior_sums: Vec<Vec<f64>> = frozen
            .source_sizes()
            .iter()
            .map(|&size| vec![0.0; size])
            .collect();
        let block_count = n + usize::from(label_cpt.is_some());
        let mut likelihood_sums = vec![0.0; block_count];
        let mut used = 0usize;
        for sample in dataset {
            let Some(state) = propagate_or_skip(&frozen, sample, config.supervised, None)? else {
                continue;
            };
            used += 1;
            for (i, sums) in posterior_sums.iter_mut().enumerate() {
                let posterior = state.source_posterior(i)?;
                for (slot, &v) in sums.iter_mut().zip(posterior.values()) {
                    *slot += v;
                }
            }
            for j in 0..n {
                likelihood_sums[j] += pair_likelihood(
                    &visible_cpts[j],
                    &state.product_toward_visible[j],
                    &state.visible_backward[j],
                )
                .ln();
            }
            if let (Some(cpt), Some(label_state)) = (&label_cpt, &state.label) {
                likelihood_sums[n] += pair_likelihood(
                    cpt,
                    &label_state.product_toward_label,
                    &label_state.label_backward,
                )
                .ln();
            }
        }
        if used == 0 {
            return Err(DicaError::Invalid(
                "every training example was skipped as contradictory".into(),
            ));
        }
        let priors: Vec<Message> = posterior_sums
            .into_iter()
            .map(Message::normalize)
            .collect::<Result<_>>()?;
        let block_log_likelihoods: Vec<f64> = likelihood_sums
            .iter()
            .map(|&s| s / used as f64)
            .collect();
        let mean_log_likelihood =
            block_log_likelihoods.iter().sum::<f64>() / block_count as f64;

        let installed_label = if config.supervised {
            label_cpt
        } else {
            model.label_cpt().cloned()
        };
        model.set_parameters(priors, visible_cpts, installed_label);
        report.epochs.push(EpochReport {
            epoch,
            block_log_likelihoods,
            mean_log_likelihood,
            skipped_examples,
            skipped_terms,
        });
    }
    Ok(report)
}

fn propagate_or_skip(
    model: &DicaModel,
    sample: &Sample,
    supervised: bool,
    skip_counter: Option<&mut usize>,
) -> Result<Option<MessageState>> {
    let evidence = sample.evidence(supervised)?;
    match model.propagate(&evidence, None) {
        Ok(state) => Ok(Some(state)),
        Err(DicaError::ContradictoryEvidence(_)) => {
            if let Some(counter) = skip_counter {
                *counter += 1;
            }
            Ok(None)
        }
        Err(e) => Err(e),
    }
}
