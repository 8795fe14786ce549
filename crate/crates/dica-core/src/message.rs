//! Elementary message algebra for discrete belief propagation.
//!
//! A [`Message`] is a normalized probability vector over a variable's
//! alphabet; both the forward and the backward flow of a branch are
//! messages. A [`Cpt`] is a row-stochastic conditional probability table
//! attached to a one-to-one block: the sum rule pushes messages through it
//! ([`Cpt::forward`], [`Cpt::backward`]) and the product rule combines the
//! replicas meeting at a diverter ([`combine`], [`posterior`]).
//!
//! All arithmetic is in `f64`. Values are renormalized after every product
//! so that long chains of combinations cannot underflow; a product that is
//! identically zero means the injected evidence is inconsistent and raises
//! [`DicaError::ContradictoryEvidence`].

use crate::error::{DicaError, Result};

/// Tolerance for "sums to one" checks on messages and table rows.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Normalized discrete probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    values: Vec<f64>,
}

impl Message {
    /// Normalize a non-negative vector into a message.
    ///
    /// Errors with [`DicaError::ContradictoryEvidence`] when every entry is
    /// zero, since that only happens when incompatible hard evidence met
    /// upstream.
    pub fn normalize(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(DicaError::Dimension("cannot normalize an empty vector".into()));
        }
        let mut sum = 0.0;
        for &v in &values {
            if v.is_nan() || v < 0.0 {
                return Err(DicaError::Invalid(format!(
                    "message entries must be non-negative, got {v}"
                )));
            }
            sum += v;
        }
        if sum == 0.0 {
            return Err(DicaError::ContradictoryEvidence(
                "all-zero vector cannot be normalized".into(),
            ));
        }
        if !sum.is_finite() {
            return Err(DicaError::Invalid("message entries must be finite".into()));
        }
        let mut values = values;
        for v in &mut values {
            *v /= sum;
        }
        Ok(Message { values })
    }

    /// Wrap a vector that is already normalized, validating the invariants.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(DicaError::Dimension("empty message".into()));
        }
        let mut sum = 0.0;
        for &v in &values {
            if v.is_nan() || v < 0.0 {
                return Err(DicaError::Invalid(format!(
                    "message entries must be non-negative, got {v}"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > NORM_TOLERANCE {
            return Err(DicaError::Invalid(format!(
                "message entries sum to {sum}, expected 1"
            )));
        }
        Ok(Message { values })
    }

    /// Uniform distribution over an alphabet of `len` symbols.
    pub fn uniform(len: usize) -> Self {
        assert!(len >= 1, "alphabet must have at least one symbol");
        Message {
            values: vec![1.0 / len as f64; len],
        }
    }

    /// All probability mass on one symbol.
    pub fn delta(len: usize, symbol: usize) -> Result<Self> {
        if symbol >= len {
            return Err(DicaError::Dimension(format!(
                "delta symbol {symbol} out of range for alphabet of size {len}"
            )));
        }
        let mut values = vec![0.0; len];
        values[symbol] = 1.0;
        Ok(Message { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Row-stochastic conditional probability table `P(out = l | in = k)`,
/// stored row-major with `rows` input symbols and `cols` output symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Cpt {
    /// Build a table from row-major entries, validating row-stochasticity.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(DicaError::Dimension("table dimensions must be at least 1x1".into()));
        }
        if entries.len() != rows * cols {
            return Err(DicaError::Dimension(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (k, row) in entries.chunks(cols).enumerate() {
            let mut sum = 0.0;
            for &v in row {
                if v.is_nan() || v < 0.0 {
                    return Err(DicaError::Invalid(format!(
                        "table entries must be non-negative, got {v} in row {k}"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > NORM_TOLERANCE {
                return Err(DicaError::Invalid(format!(
                    "row {k} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Cpt { rows, cols, entries })
    }

    /// Build from per-row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(DicaError::Dimension("table needs at least one row".into()));
        }
        let cols = rows[0].len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(DicaError::Dimension("ragged rows in table".into()));
            }
            entries.extend_from_slice(row);
        }
        Cpt::new(rows.len(), cols, entries)
    }

    /// The identity block: forward and backward both leave messages unchanged.
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for k in 0..n {
            entries[k * n + k] = 1.0;
        }
        Cpt {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[k * self.cols..(k + 1) * self.cols]
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.cols + l]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Sum rule in the variable direction: `f_out(l) ∝ Σ_k f_in(k)·P(l|k)`.
    ///
    /// For a row-stochastic table the raw product already sums to one; the
    /// final normalization only absorbs rounding.
    pub fn forward(&self, f_in: &Message) -> Result<Message> {
        if f_in.len() != self.rows {
            return Err(DicaError::Dimension(format!(
                "forward input has {} entries, table has {} rows",
                f_in.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (k, &fk) in f_in.values().iter().enumerate() {
            if fk == 0.0 {
                continue;
            }
            let row = self.row(k);
            for (l, &p) in row.iter().enumerate() {
                out[l] += fk * p;
            }
        }
        Message::normalize(out)
    }

    /// Sum rule in the opposite direction: `b_in(k) ∝ Σ_l P(l|k)·b_out(l)`,
    /// normalized. An all-zero projection means the evidence is impossible
    /// under this table.
    pub fn backward(&self, b_out: &Message) -> Result<Message> {
        if b_out.len() != self.cols {
            return Err(DicaError::Dimension(format!(
                "backward input has {} entries, table has {} columns",
                b_out.len(),
                self.cols
            )));
        }
        let b = b_out.values();
        let mut out = vec![0.0; self.rows];
        for (k, slot) in out.iter_mut().enumerate() {
            let row = self.row(k);
            let mut acc = 0.0;
            for (l, &p) in row.iter().enumerate() {
                acc += p * b[l];
            }
            *slot = acc;
        }
        Message::normalize(out)
    }
}

/// Product rule: normalized element-by-element product of the given
/// messages. The running product is renormalized after every factor so that
/// arbitrarily long combinations stay in `f64` range.
pub fn combine<'a, I>(messages: I) -> Result<Message>
where
    I: IntoIterator<Item = &'a Message>,
{
    let mut iter = messages.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| DicaError::Dimension("combine needs at least one message".into()))?;
    let mut acc = first.values().to_vec();
    for msg in iter {
        if msg.len() != acc.len() {
            return Err(DicaError::Dimension(format!(
                "combine over mixed lengths {} and {}",
                acc.len(),
                msg.len()
            )));
        }
        let mut sum = 0.0;
        for (a, &b) in acc.iter_mut().zip(msg.values()) {
            *a *= b;
            sum += *a;
        }
        if sum == 0.0 {
            return Err(DicaError::ContradictoryEvidence(
                "product of messages has no support".into(),
            ));
        }
        for a in &mut acc {
            *a /= sum;
        }
    }
    Message::normalize(acc)
}

/// Branch posterior: normalized product of the forward and backward message.
pub fn posterior(forward: &Message, backward: &Message) -> Result<Message> {
    combine([forward, backward])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn msg(values: &[f64]) -> Message {
        Message::normalize(values.to_vec()).unwrap()
    }

    #[test]
    fn normalize_basic_cases() {
        assert_eq!(msg(&[2.0, 2.0]).values(), &[0.5, 0.5]);
        assert_eq!(msg(&[0.0, 3.0]).values(), &[0.0, 1.0]);
        assert_eq!(msg(&[1.0, 1.0, 2.0]).values(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn normalize_rejects_all_zero() {
        assert!(matches!(
            Message::normalize(vec![0.0, 0.0]),
            Err(DicaError::ContradictoryEvidence(_))
        ));
    }

    #[test]
    fn normalize_rejects_negative_and_empty() {
        assert!(matches!(
            Message::normalize(vec![0.5, -0.1]),
            Err(DicaError::Invalid(_))
        ));
        assert!(matches!(Message::normalize(vec![]), Err(DicaError::Dimension(_))));
    }

    #[test]
    fn forward_identity_is_noop() {
        let cpt = Cpt::identity(3);
        let f = msg(&[0.2, 0.3, 0.5]);
        assert_eq!(cpt.forward(&f).unwrap(), f);
    }

    #[test]
    fn forward_hand_product() {
        let cpt = Cpt::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let f = msg(&[0.4, 0.6]);
        let out = cpt.forward(&f).unwrap();
        assert!((out.values()[0] - 0.35).abs() < 1e-15);
        assert!((out.values()[1] - 0.65).abs() < 1e-15);
    }

    #[test]
    fn forward_delta_selects_row() {
        let cpt = Cpt::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let out = cpt.forward(&Message::delta(2, 1).unwrap()).unwrap();
        assert_eq!(out.values(), cpt.row(1));
    }

    #[test]
    fn forward_dimension_mismatch() {
        let cpt = Cpt::identity(2);
        assert!(matches!(
            cpt.forward(&Message::uniform(3)),
            Err(DicaError::Dimension(_))
        ));
    }

    #[test]
    fn backward_identity_is_noop() {
        let cpt = Cpt::identity(3);
        let b = msg(&[0.1, 0.1, 0.8]);
        assert_eq!(cpt.backward(&b).unwrap(), b);
    }

    #[test]
    fn backward_hand_product() {
        let cpt = Cpt::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let out = cpt.backward(&Message::delta(2, 0).unwrap()).unwrap();
        assert!((out.values()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((out.values()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn backward_uniform_is_uniform_for_stochastic_tables() {
        let cpt = Cpt::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.7], vec![0.5, 0.5]]).unwrap();
        let out = cpt.backward(&Message::uniform(2)).unwrap();
        for &v in out.values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_zero_projection_is_contradictory() {
        // No input symbol can produce output 1.
        let cpt = Cpt::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            cpt.backward(&Message::delta(2, 1).unwrap()),
            Err(DicaError::ContradictoryEvidence(_))
        ));
    }

    #[test]
    fn combine_uniform_is_identity() {
        let out = combine([&msg(&[0.5, 0.5]), &msg(&[0.8, 0.2])]).unwrap();
        assert!((out.values()[0] - 0.8).abs() < 1e-15);
        assert!((out.values()[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn combine_agreeing_deltas() {
        let d = Message::delta(2, 0).unwrap();
        assert_eq!(combine([&d, &d]).unwrap(), d);
    }

    #[test]
    fn combine_disjoint_deltas_contradict() {
        let a = Message::delta(2, 0).unwrap();
        let b = Message::delta(2, 1).unwrap();
        assert!(matches!(
            combine([&a, &b]),
            Err(DicaError::ContradictoryEvidence(_))
        ));
    }

    #[test]
    fn posterior_hand_cases() {
        let out = posterior(&msg(&[0.5, 0.5]), &msg(&[0.9, 0.1])).unwrap();
        assert!((out.values()[0] - 0.9).abs() < 1e-12);
        let out = posterior(&msg(&[0.8, 0.2]), &msg(&[0.5, 0.5])).unwrap();
        assert!((out.values()[0] - 0.8).abs() < 1e-12);
        let out = posterior(&msg(&[0.8, 0.2]), &msg(&[0.2, 0.8])).unwrap();
        assert!((out.values()[0] - 0.5).abs() < 1e-12);
        assert!((out.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cpt_rejects_non_stochastic_rows() {
        assert!(matches!(
            Cpt::from_rows(&[vec![0.5, 0.4]]),
            Err(DicaError::Invalid(_))
        ));
        assert!(matches!(
            Cpt::from_rows(&[vec![1.2, -0.2]]),
            Err(DicaError::Invalid(_))
        ));
    }

    fn raw_message() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..6)
            .prop_filter("needs support", |v| v.iter().sum::<f64>() > 1e-3)
    }

    fn raw_cpt() -> impl Strategy<Value = Cpt> {
        (1usize..5, 1usize..5).prop_flat_map(|(rows, cols)| {
            prop::collection::vec(0.01f64..1.0, rows * cols).prop_map(move |mut entries| {
                for row in entries.chunks_mut(cols) {
                    let s: f64 = row.iter().sum();
                    for v in row {
                        *v /= s;
                    }
                }
                Cpt::new(rows, cols, entries).unwrap()
            })
        })
    }

    fn assert_valid_message(m: &Message) {
        assert!(!m.is_empty());
        assert!(m.values().iter().all(|&v| v >= 0.0));
        assert!((m.values().iter().sum::<f64>() - 1.0).abs() <= NORM_TOLERANCE);
    }

    proptest! {
        #[test]
        fn all_operations_return_valid_messages(raw in raw_message(), cpt in raw_cpt()) {
            let m = Message::normalize(raw).unwrap();
            assert_valid_message(&m);
            if m.len() == cpt.num_rows() {
                assert_valid_message(&cpt.forward(&m).unwrap());
            }
            if m.len() == cpt.num_cols() {
                if let Ok(b) = cpt.backward(&m) {
                    assert_valid_message(&b);
                }
            }
            assert_valid_message(&combine([&m, &Message::uniform(m.len())]).unwrap());
            assert_valid_message(&posterior(&m, &Message::uniform(m.len())).unwrap());
        }

        #[test]
        fn forward_preserves_total_probability(raw in raw_message(), cpt in raw_cpt()) {
            // The raw sum-rule output of a row-stochastic table is already
            // normalized; check it before any renormalization happens.
            let m = Message::normalize(raw)?;
            if m.len() == cpt.num_rows() {
                let mut out = vec![0.0; cpt.num_cols()];
                for (k, &fk) in m.values().iter().enumerate() {
                    for (l, &p) in cpt.row(k).iter().enumerate() {
                        out[l] += fk * p;
                    }
                }
                let sum: f64 = out.iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn combine_is_commutative_and_associative(
            a in raw_message(), b in raw_message(), c in raw_message()
        ) {
            let len = a.len().min(b.len()).min(c.len());
            let trim = |v: &[f64]| Message::normalize(v[..len].to_vec());
            let (Ok(a), Ok(b), Ok(c)) = (trim(&a), trim(&b), trim(&c)) else {
                return Ok(());
            };
            let abc = combine([&a, &b, &c]);
            let cba = combine([&c, &b, &a]);
            let nested = combine([&a, &b]).and_then(|ab| combine([&ab, &c]));
            if let (Ok(x), Ok(y), Ok(z)) = (abc, cba, nested) {
                for i in 0..len {
                    prop_assert!((x.values()[i] - y.values()[i]).abs() <= 1e-12);
                    prop_assert!((x.values()[i] - z.values()[i]).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn posterior_with_uniform_is_identity(raw in raw_message()) {
            let m = Message::normalize(raw)?;
            let u = Message::uniform(m.len());
            let p = posterior(&m, &u).unwrap();
            let q = posterior(&u, &m).unwrap();
            for i in 0..m.len() {
                prop_assert!((p.values()[i] - m.values()[i]).abs() <= 1e-12);
                prop_assert!((q.values()[i] - m.values()[i]).abs() <= 1e-12);
            }
        }
    }
}
