//! The discrete independent-source graph: M hidden sources feed a product
//! space through fixed marginalizer tables; a diverter replicates the
//! product-space variable toward N visible blocks and an optional label
//! block.
//!
//! # Topology
//!
//! ```text
//!  Π_S1 ──[marginalizer 1]──┐            ┌──[visible cpt 1]── X_1
//!   ...                     ├─ diverter ─┤   ...
//!  Π_SM ──[marginalizer M]──┘     │      └──[visible cpt N]── X_N
//!                                 └──[label cpt]── C   (optional)
//! ```
//!
//! The graph is a tree, so a single inward / diverter / outward sweep
//! ([`DicaModel::propagate`]) is exact. The diverter sends toward every
//! branch the normalized product of all *other* branches' inward messages;
//! products of many factors are assembled with prefix/suffix running
//! products so the sweep stays linear in the number of branches (no
//! division is ever used, so hard deltas are safe).

use crate::error::{DicaError, Result};
use crate::message::{combine, posterior, Cpt, Message};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest supported product-space size `|S| = Π_i |S_i|`.
pub const MAX_PRODUCT_SIZE: usize = 1 << 20;

/// Mixed-radix encoding of per-source symbols into a product-space index.
/// The first coordinate is the most significant digit.
pub fn product_index(coords: &[usize], source_sizes: &[usize]) -> Result<usize> {
    if coords.len() != source_sizes.len() {
        return Err(DicaError::Dimension(format!(
            "{} coordinates for {} sources",
            coords.len(),
            source_sizes.len()
        )));
    }
    let mut index = 0usize;
    for (i, (&c, &size)) in coords.iter().zip(source_sizes).enumerate() {
        if c >= size {
            return Err(DicaError::Dimension(format!(
                "coordinate {c} out of range for source {i} of size {size}"
            )));
        }
        index = index
            .checked_mul(size)
            .and_then(|v| v.checked_add(c))
            .ok_or_else(|| DicaError::Capacity("product index overflow".into()))?;
    }
    Ok(index)
}

/// Inverse of [`product_index`].
pub fn product_coords(index: usize, source_sizes: &[usize]) -> Result<Vec<usize>> {
    let mut coords = vec![0usize; source_sizes.len()];
    let mut rest = index;
    for (i, &size) in source_sizes.iter().enumerate().rev() {
        coords[i] = rest % size;
        rest /= size;
    }
    if rest != 0 {
        return Err(DicaError::Dimension(format!(
            "product index {index} out of range"
        )));
    }
    Ok(coords)
}

/// The fixed row-stochastic table mapping source `i` into the product
/// space. Row `k` puts weight `|S_i|/|S|` on every product index whose
/// `i`-th mixed-radix coordinate is `k` and zero elsewhere, i.e. the
/// Kronecker pattern `1ᵀ⊗…⊗I_{|S_i|}⊗…⊗1ᵀ` scaled to unit row sums.
pub fn marginalizer(index: usize, source_sizes: &[usize]) -> Result<Cpt> {
    if index >= source_sizes.len() {
        return Err(DicaError::Dimension(format!(
            "source index {index} out of range for {} sources",
            source_sizes.len()
        )));
    }
    let product = checked_product(source_sizes)?;
    let rows = source_sizes[index];
    // Number of positions the i-th coordinate advances by per unit step.
    let stride: usize = source_sizes[index + 1..].iter().product();
    let weight = rows as f64 / product as f64;
    let mut entries = vec![0.0; rows * product];
    for s in 0..product {
        let k = (s / stride) % rows;
        entries[k * product + s] = weight;
    }
    Cpt::new(rows, product, entries)
}

fn checked_product(sizes: &[usize]) -> Result<usize> {
    let mut product = 1usize;
    for &size in sizes {
        if size == 0 {
            return Err(DicaError::Dimension("alphabet size 0".into()));
        }
        product = product
            .checked_mul(size)
            .filter(|&p| p <= MAX_PRODUCT_SIZE)
            .ok_or_else(|| {
                DicaError::Capacity(format!(
                    "product space exceeds the {MAX_PRODUCT_SIZE} limit"
                ))
            })?;
    }
    Ok(product)
}

/// Per-variable observation: a hard symbol, a soft backward distribution,
/// or nothing (an erasure, injected as a uniform backward message).
#[derive(Debug, Clone)]
pub enum VarEvidence {
    Hard(usize),
    Soft(Message),
    Absent,
}

impl VarEvidence {
    pub fn is_absent(&self) -> bool {
        matches!(self, VarEvidence::Absent)
    }

    fn message(&self, len: usize, what: &str) -> Result<Message> {
        match self {
            VarEvidence::Hard(symbol) => Message::delta(len, *symbol).map_err(|_| {
                DicaError::Dimension(format!(
                    "hard evidence symbol {symbol} out of range for {what} of size {len}"
                ))
            }),
            VarEvidence::Soft(msg) => {
                if msg.len() != len {
                    return Err(DicaError::Dimension(format!(
                        "soft evidence has {} entries, {what} has {len}",
                        msg.len()
                    )));
                }
                Ok(msg.clone())
            }
            VarEvidence::Absent => Ok(Message::uniform(len)),
        }
    }
}

/// Observations injected at the visible variables and optionally at the label.
#[derive(Debug, Clone)]
pub struct Evidence {
    visible: Vec<VarEvidence>,
    label: VarEvidence,
}

impl Evidence {
    /// No observations anywhere.
    pub fn none(num_visible: usize) -> Self {
        Evidence {
            visible: (0..num_visible).map(|_| VarEvidence::Absent).collect(),
            label: VarEvidence::Absent,
        }
    }

    /// Hard observations for every visible variable.
    pub fn hard(symbols: &[usize]) -> Self {
        Evidence {
            visible: symbols.iter().map(|&s| VarEvidence::Hard(s)).collect(),
            label: VarEvidence::Absent,
        }
    }

    pub fn with_label(mut self, label: VarEvidence) -> Self {
        self.label = label;
        self
    }

    pub fn set_visible(&mut self, j: usize, ev: VarEvidence) {
        self.visible[j] = ev;
    }

    pub fn visible(&self) -> &[VarEvidence] {
        &self.visible
    }

    pub fn label(&self) -> &VarEvidence {
        &self.label
    }

    /// Number of visible variables with a hard or soft observation.
    pub fn observed_count(&self) -> usize {
        self.visible.iter().filter(|e| !e.is_absent()).count()
    }
}

/// Forward and backward message on every branch after one propagation sweep.
///
/// `product_*` vectors live in the product space; the `toward` direction is
/// the diverter's outgoing replica for that branch.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub source_forward: Vec<Message>,
    pub source_backward: Vec<Message>,
    pub product_from_source: Vec<Message>,
    pub product_toward_source: Vec<Message>,
    pub product_from_visible: Vec<Message>,
    pub product_toward_visible: Vec<Message>,
    pub visible_forward: Vec<Message>,
    pub visible_backward: Vec<Message>,
    pub label: Option<LabelBranchState>,
}

/// Branch messages for the optional label block.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelBranchState {
    pub product_from_label: Message,
    pub product_toward_label: Message,
    pub label_forward: Message,
    pub label_backward: Message,
}

impl MessageState {
    /// Posterior at source `i`: normalized product of the injected (or
    /// prior) forward and the propagated backward.
    pub fn source_posterior(&self, i: usize) -> Result<Message> {
        posterior(&self.source_forward[i], &self.source_backward[i])
    }

    pub fn source_posteriors(&self) -> Result<Vec<Message>> {
        (0..self.source_forward.len())
            .map(|i| self.source_posterior(i))
            .collect()
    }

    /// Posterior at visible variable `j`.
    pub fn visible_posterior(&self, j: usize) -> Result<Message> {
        posterior(&self.visible_forward[j], &self.visible_backward[j])
    }

    /// Posterior at the label variable.
    pub fn label_posterior(&self) -> Result<Message> {
        let label = self.label.as_ref().ok_or(DicaError::MissingLabelBlock)?;
        posterior(&label.label_forward, &label.label_backward)
    }
}

/// Result of [`DicaModel::complete`] for one visible variable.
#[derive(Debug, Clone)]
pub enum CompletedVar {
    /// The variable was observed; the evidence message is echoed back.
    Observed(Message),
    /// The variable was erased; the propagated forward is the best estimate,
    /// and the posterior (here equal to the forward up to rounding) is kept
    /// alongside it.
    Missing { forward: Message, posterior: Message },
}

/// Output of [`DicaModel::complete`].
#[derive(Debug, Clone)]
pub struct Completion {
    pub variables: Vec<CompletedVar>,
    pub source_posteriors: Vec<Message>,
}

/// Output of [`DicaModel::classify`]: the class posterior together with the
/// simultaneous source code.
#[derive(Debug, Clone)]
pub struct Classification {
    pub class_posterior: Message,
    pub source_posteriors: Vec<Message>,
}

/// Output of [`DicaModel::prototype`].
#[derive(Debug, Clone)]
pub struct Prototype {
    pub visible_forwards: Vec<Message>,
    pub source_posteriors: Vec<Message>,
}

/// Configuration for [`DicaModel::build`].
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub source_sizes: Vec<usize>,
    pub visible_sizes: Vec<usize>,
    /// Alphabet size of the label variable, when a label block is wanted.
    pub label_size: Option<usize>,
    pub seed: u64,
    /// Relative magnitude of the seeded perturbation applied to the
    /// otherwise uniform initial priors. Exactly uniform priors are a
    /// symmetric fixed point of the learning updates, so this must be > 0
    /// for learning runs.
    pub init_perturbation: f64,
}

impl ModelConfig {
    pub fn new(source_sizes: Vec<usize>, visible_sizes: Vec<usize>) -> Self {
        ModelConfig {
            source_sizes,
            visible_sizes,
            label_size: None,
            seed: 0,
            init_perturbation: 0.01,
        }
    }

    pub fn with_label(mut self, label_size: usize) -> Self {
        self.label_size = Some(label_size);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The full parameterized graph: priors, fixed marginalizers, visible
/// tables and the optional label table.
#[derive(Debug, Clone, PartialEq)]
pub struct DicaModel {
    source_sizes: Vec<usize>,
    visible_sizes: Vec<usize>,
    product_size: usize,
    priors: Vec<Message>,
    marginalizers: Vec<Cpt>,
    visible_cpts: Vec<Cpt>,
    label_cpt: Option<Cpt>,
}

impl DicaModel {
    /// Build a freshly initialized model: priors are uniform plus a seeded
    /// perturbation, learnable tables get strictly positive seeded random
    /// rows. Deterministic for a given seed.
    pub fn build(config: &ModelConfig) -> Result<Self> {
        let m = config.source_sizes.len();
        if m == 0 {
            return Err(DicaError::Dimension("need at least one source".into()));
        }
        if config.visible_sizes.is_empty() {
            return Err(DicaError::Dimension("need at least one visible variable".into()));
        }
        for (j, &size) in config.visible_sizes.iter().enumerate() {
            if size < 2 {
                return Err(DicaError::Dimension(format!(
                    "visible variable {j} needs an alphabet of at least 2, got {size}"
                )));
            }
        }
        if let Some(size) = config.label_size {
            if size < 2 {
                return Err(DicaError::Dimension(format!(
                    "label alphabet needs at least 2 symbols, got {size}"
                )));
            }
        }
        let product = checked_product(&config.source_sizes)?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let priors: Vec<Message> = config
            .source_sizes
            .iter()
            .map(|&size| {
                let values: Vec<f64> = (0..size)
                    .map(|_| 1.0 + config.init_perturbation * rng.random::<f64>())
                    .collect();
                Message::normalize(values)
            })
            .collect::<Result<_>>()?;
        let visible_cpts: Vec<Cpt> = config
            .visible_sizes
            .iter()
            .map(|&size| random_cpt(&mut rng, product, size))
            .collect::<Result<_>>()?;
        let label_cpt = config
            .label_size
            .map(|size| random_cpt(&mut rng, product, size))
            .transpose()?;

        let model = DicaModel::from_parts(
            config.source_sizes.clone(),
            config.visible_sizes.clone(),
            priors,
            visible_cpts,
            label_cpt,
        )?;
        debug_assert!(
            model
                .visible_cpts
                .iter()
                .chain(model.label_cpt.iter())
                .all(|cpt| cpt.entries().iter().all(|&v| v > 0.0)),
            "initialization must be strictly positive"
        );
        Ok(model)
    }

    /// Assemble a model from explicit parameters, validating every invariant
    /// and regenerating the fixed marginalizers from the sizes.
    pub fn from_parts(
        source_sizes: Vec<usize>,
        visible_sizes: Vec<usize>,
        priors: Vec<Message>,
        visible_cpts: Vec<Cpt>,
        label_cpt: Option<Cpt>,
    ) -> Result<Self> {
        if source_sizes.is_empty() || visible_sizes.is_empty() {
            return Err(DicaError::Dimension(
                "need at least one source and one visible variable".into(),
            ));
        }
        let product = checked_product(&source_sizes)?;
        if priors.len() != source_sizes.len() {
            return Err(DicaError::Dimension(format!(
                "{} priors for {} sources",
                priors.len(),
                source_sizes.len()
            )));
        }
        for (i, (prior, &size)) in priors.iter().zip(&source_sizes).enumerate() {
            if prior.len() != size {
                return Err(DicaError::Dimension(format!(
                    "prior {i} has {} entries, source has {size}",
                    prior.len()
                )));
            }
        }
        if visible_cpts.len() != visible_sizes.len() {
            return Err(DicaError::Dimension(format!(
                "{} visible tables for {} visible variables",
                visible_cpts.len(),
                visible_sizes.len()
            )));
        }
        for (j, (cpt, &size)) in visible_cpts.iter().zip(&visible_sizes).enumerate() {
            if cpt.num_rows() != product || cpt.num_cols() != size {
                return Err(DicaError::Dimension(format!(
                    "visible table {j} is {}x{}, expected {product}x{size}",
                    cpt.num_rows(),
                    cpt.num_cols()
                )));
            }
        }
        if let Some(cpt) = &label_cpt {
            if cpt.num_rows() != product {
                return Err(DicaError::Dimension(format!(
                    "label table has {} rows, expected {product}",
                    cpt.num_rows()
                )));
            }
        }
        let marginalizers = (0..source_sizes.len())
            .map(|i| marginalizer(i, &source_sizes))
            .collect::<Result<_>>()?;
        Ok(DicaModel {
            source_sizes,
            visible_sizes,
            product_size: product,
            priors,
            marginalizers,
            visible_cpts,
            label_cpt,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.source_sizes.len()
    }

    pub fn num_visible(&self) -> usize {
        self.visible_sizes.len()
    }

    pub fn source_sizes(&self) -> &[usize] {
        &self.source_sizes
    }

    pub fn visible_sizes(&self) -> &[usize] {
        &self.visible_sizes
    }

    pub fn product_size(&self) -> usize {
        self.product_size
    }

    pub fn prior(&self, i: usize) -> &Message {
        &self.priors[i]
    }

    pub fn priors(&self) -> &[Message] {
        &self.priors
    }

    pub fn marginalizer_cpt(&self, i: usize) -> &Cpt {
        &self.marginalizers[i]
    }

    pub fn visible_cpt(&self, j: usize) -> &Cpt {
        &self.visible_cpts[j]
    }

    pub fn visible_cpts(&self) -> &[Cpt] {
        &self.visible_cpts
    }

    pub fn label_cpt(&self) -> Option<&Cpt> {
        self.label_cpt.as_ref()
    }

    pub fn label_size(&self) -> Option<usize> {
        self.label_cpt.as_ref().map(|c| c.num_cols())
    }

    pub(crate) fn set_parameters(
        &mut self,
        priors: Vec<Message>,
        visible_cpts: Vec<Cpt>,
        label_cpt: Option<Cpt>,
    ) {
        debug_assert_eq!(priors.len(), self.source_sizes.len());
        debug_assert_eq!(visible_cpts.len(), self.visible_sizes.len());
        debug_assert_eq!(label_cpt.is_some(), self.label_cpt.is_some());
        self.priors = priors;
        self.visible_cpts = visible_cpts;
        self.label_cpt = label_cpt;
    }

    /// One exact propagation sweep.
    ///
    /// Step 1 (inward): every visible block projects its evidence backward
    /// into the product space; every source side pushes its forward (the
    /// prior, unless `source_forwards` overrides it) through its
    /// marginalizer; the label block does the same when present.
    /// Step 2 (diverter): the outgoing replica toward each branch is the
    /// normalized product of all other branches' inward messages.
    /// Step 3 (outward): visible forwards, source backwards and the label
    /// forward are read out through their blocks.
    pub fn propagate(
        &self,
        evidence: &Evidence,
        source_forwards: Option<&[Message]>,
    ) -> Result<MessageState> {
        let m = self.num_sources();
        let n = self.num_visible();
        if evidence.visible.len() != n {
            return Err(DicaError::Dimension(format!(
                "evidence covers {} variables, model has {n}",
                evidence.visible.len()
            )));
        }
        if !evidence.label.is_absent() && self.label_cpt.is_none() {
            return Err(DicaError::MissingLabelBlock);
        }
        if let Some(forwards) = source_forwards {
            if forwards.len() != m {
                return Err(DicaError::Dimension(format!(
                    "{} source forwards for {m} sources",
                    forwards.len()
                )));
            }
        }

        // Step 1 — inward.
        let source_forward: Vec<Message> = match source_forwards {
            Some(forwards) => forwards.to_vec(),
            None => self.priors.clone(),
        };
        let mut product_from_source = Vec::with_capacity(m);
        for (i, forward) in source_forward.iter().enumerate() {
            product_from_source.push(self.marginalizers[i].forward(forward)?);
        }
        let mut visible_backward = Vec::with_capacity(n);
        let mut product_from_visible = Vec::with_capacity(n);
        for (j, ev) in evidence.visible.iter().enumerate() {
            let msg = ev.message(self.visible_sizes[j], &format!("visible variable {j}"))?;
            product_from_visible.push(self.visible_cpts[j].backward(&msg)?);
            visible_backward.push(msg);
        }
        let label_inward = match &self.label_cpt {
            Some(cpt) => {
                let msg = evidence.label.message(cpt.num_cols(), "label variable")?;
                Some((cpt.backward(&msg)?, msg))
            }
            None => None,
        };

        // Step 2 — diverter. Branch order: sources, visibles, label.
        let mut inward: Vec<&Message> = Vec::with_capacity(m + n + 1);
        inward.extend(product_from_source.iter());
        inward.extend(product_from_visible.iter());
        if let Some((from_label, _)) = &label_inward {
            inward.push(from_label);
        }
        let mut outgoing = diverter_outgoing(&inward, self.product_size)?;

        // Step 3 — outward.
        let product_toward_source: Vec<Message> = outgoing.drain(..m).collect();
        let product_toward_visible: Vec<Message> = outgoing.drain(..n).collect();
        let mut source_backward = Vec::with_capacity(m);
        for (i, toward) in product_toward_source.iter().enumerate() {
            source_backward.push(self.marginalizers[i].backward(toward)?);
        }
        let mut visible_forward = Vec::with_capacity(n);
        for (j, toward) in product_toward_visible.iter().enumerate() {
            visible_forward.push(self.visible_cpts[j].forward(toward)?);
        }
        let label = match (label_inward, &self.label_cpt) {
            (Some((from_label, label_backward)), Some(cpt)) => {
                let toward = outgoing.pop().expect("label branch message");
                Some(LabelBranchState {
                    label_forward: cpt.forward(&toward)?,
                    product_from_label: from_label,
                    product_toward_label: toward,
                    label_backward,
                })
            }
            _ => None,
        };

        Ok(MessageState {
            source_forward,
            source_backward,
            product_from_source,
            product_toward_source,
            product_from_visible,
            product_toward_visible,
            visible_forward,
            visible_backward,
            label,
        })
    }

    /// Generation: inject forward deltas for the given source configuration
    /// and read the forward distributions at the visible variables.
    pub fn generate(&self, config: &[usize]) -> Result<Vec<Message>> {
        if config.len() != self.num_sources() {
            return Err(DicaError::Dimension(format!(
                "{} coordinates for {} sources",
                config.len(),
                self.num_sources()
            )));
        }
        let forwards: Vec<Message> = config
            .iter()
            .zip(&self.source_sizes)
            .map(|(&c, &size)| Message::delta(size, c))
            .collect::<Result<_>>()?;
        self.generate_from_forwards(&forwards)
    }

    /// Generation from arbitrary (possibly soft) source forwards.
    pub fn generate_from_forwards(&self, forwards: &[Message]) -> Result<Vec<Message>> {
        let state = self.propagate(&Evidence::none(self.num_visible()), Some(forwards))?;
        Ok(state.visible_forward)
    }

    /// Encoding: full observations in, source posteriors out. The argmax of
    /// each posterior is the MAP code of the input.
    pub fn encode(&self, evidence: &Evidence) -> Result<Vec<Message>> {
        if evidence.observed_count() != self.num_visible() {
            return Err(DicaError::Invalid(
                "encode needs an observation for every visible variable".into(),
            ));
        }
        let state = self.propagate(evidence, None)?;
        state.source_posteriors()
    }

    /// Pattern completion: observed variables echo their evidence, erased
    /// variables report the propagated forward (and its posterior, which
    /// coincides with the forward under a uniform backward).
    pub fn complete(&self, evidence: &Evidence) -> Result<Completion> {
        if evidence.observed_count() == 0 {
            return Err(DicaError::Invalid(
                "complete needs at least one observed variable".into(),
            ));
        }
        let state = self.propagate(evidence, None)?;
        let mut variables = Vec::with_capacity(self.num_visible());
        for (j, ev) in evidence.visible.iter().enumerate() {
            if ev.is_absent() {
                variables.push(CompletedVar::Missing {
                    forward: state.visible_forward[j].clone(),
                    posterior: state.visible_posterior(j)?,
                });
            } else {
                variables.push(CompletedVar::Observed(state.visible_backward[j].clone()));
            }
        }
        Ok(Completion {
            variables,
            source_posteriors: state.source_posteriors()?,
        })
    }

    /// Error correction: full (possibly corrupted) observations in, forward
    /// distributions out. No product with the backward is taken, because no
    /// component of the input is trusted.
    pub fn correct(&self, evidence: &Evidence) -> Result<Vec<Message>> {
        if evidence.observed_count() != self.num_visible() {
            return Err(DicaError::Invalid(
                "correct needs an observation for every visible variable".into(),
            ));
        }
        let state = self.propagate(evidence, None)?;
        Ok(state.visible_forward)
    }

    /// Classification: full observations in, posterior over the label
    /// alphabet plus the simultaneous source code out.
    pub fn classify(&self, evidence: &Evidence) -> Result<Classification> {
        if self.label_cpt.is_none() {
            return Err(DicaError::MissingLabelBlock);
        }
        if evidence.observed_count() != self.num_visible() {
            return Err(DicaError::Invalid(
                "classify needs an observation for every visible variable".into(),
            ));
        }
        let state = self.propagate(evidence, None)?;
        Ok(Classification {
            class_posterior: state.label_posterior()?,
            source_posteriors: state.source_posteriors()?,
        })
    }

    /// Class prototype: inject a backward delta at the label, no visible
    /// evidence, and read the visible forwards plus the source code.
    pub fn prototype(&self, class: usize) -> Result<Prototype> {
        let label_size = self.label_size().ok_or(DicaError::MissingLabelBlock)?;
        if class >= label_size {
            return Err(DicaError::Dimension(format!(
                "class {class} out of range for label alphabet of size {label_size}"
            )));
        }
        let evidence =
            Evidence::none(self.num_visible()).with_label(VarEvidence::Hard(class));
        let state = self.propagate(&evidence, None)?;
        Ok(Prototype {
            visible_forwards: state.visible_forward.clone(),
            source_posteriors: state.source_posteriors()?,
        })
    }
}

/// Diverter sweep: `out[t] = combine(inward[..t], inward[t+1..])`, computed
/// with prefix/suffix running products (each step renormalized) so the
/// whole sweep is linear in the number of branches.
fn diverter_outgoing(inward: &[&Message], product_size: usize) -> Result<Vec<Message>> {
    let b = inward.len();
    if b == 1 {
        // A single branch receives the product of no other branches.
        return Ok(vec![Message::uniform(product_size)]);
    }
    let mut prefix: Vec<Message> = Vec::with_capacity(b - 1);
    prefix.push(inward[0].clone());
    for t in 1..b - 1 {
        let next = combine([&prefix[t - 1], inward[t]])?;
        prefix.push(next);
    }
    let mut suffix: Vec<Message> = vec![inward[b - 1].clone()];
    for t in (1..b - 1).rev() {
        let next = combine([inward[t], &suffix[0]])?;
        suffix.insert(0, next);
    }
    // suffix[t - 1] now holds the product of inward[t..b].
    let mut outgoing = Vec::with_capacity(b);
    for t in 0..b {
        let msg = if t == 0 {
            suffix[0].clone()
        } else if t == b - 1 {
            prefix[b - 2].clone()
        } else {
            combine([&prefix[t - 1], &suffix[t]])?
        };
        outgoing.push(msg);
    }
    Ok(outgoing)
}

/// Per-pixel mean of binary-alphabet forward messages: entry `j` is the
/// probability of symbol 1 at variable `j`.
pub fn mean_image(messages: &[Message]) -> Result<Vec<f64>> {
    messages
        .iter()
        .enumerate()
        .map(|(j, msg)| {
            if msg.len() != 2 {
                return Err(DicaError::Dimension(format!(
                    "mean image needs binary alphabets, variable {j} has {}",
                    msg.len()
                )));
            }
            Ok(msg.values()[1])
        })
        .collect()
}

fn random_cpt(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<Cpt> {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..cols).map(|_| 0.01 + rng.random::<f64>()).collect();
        let sum: f64 = row.iter().sum();
        for v in &mut row {
            *v /= sum;
        }
        entries.extend_from_slice(&row);
    }
    Cpt::new(rows, cols, entries)
}
