//! Shared test support: an exhaustive joint-distribution oracle that is
//! independent of the propagation code, plus dataset/model generators.

#![allow(dead_code)]

use dica_core::{Cpt, DicaModel, Evidence, Message, ModelConfig, VarEvidence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Evidence in plain weight form for the oracle: one backward weight vector
/// per observed variable, `None` for erasures.
pub struct OracleEvidence {
    pub visible: Vec<Option<Vec<f64>>>,
    pub label: Option<Vec<f64>>,
}

impl OracleEvidence {
    pub fn from_evidence(model: &DicaModel, evidence: &Evidence) -> Self {
        let visible = evidence
            .visible()
            .iter()
            .zip(model.visible_sizes())
            .map(|(ev, &size)| match ev {
                VarEvidence::Hard(symbol) => {
                    let mut w = vec![0.0; size];
                    w[*symbol] = 1.0;
                    Some(w)
                }
                VarEvidence::Soft(msg) => Some(msg.values().to_vec()),
                VarEvidence::Absent => None,
            })
            .collect();
        let label = match evidence.label() {
            VarEvidence::Hard(symbol) => {
                let size = model.label_size().expect("label evidence needs a label block");
                let mut w = vec![0.0; size];
                w[*symbol] = 1.0;
                Some(w)
            }
            VarEvidence::Soft(msg) => Some(msg.values().to_vec()),
            VarEvidence::Absent => None,
        };
        OracleEvidence { visible, label }
    }
}

/// Advance a mixed-radix odometer; returns false after the last value.
fn advance(digits: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < sizes[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Exhaustive sum over the full joint of sources, visibles and label.
/// `skip_visible`/`skip_label` drop that variable's evidence weight, which
/// is how the oracle computes forward (pre-evidence) quantities.
fn enumerate_joint<F: FnMut(&[usize], &[usize], usize, f64)>(
    model: &DicaModel,
    evidence: &OracleEvidence,
    skip_visible: Option<usize>,
    skip_label: bool,
    mut visit: F,
) {
    let source_sizes = model.source_sizes();
    let visible_sizes = model.visible_sizes();
    let label_size = model.label_size().unwrap_or(1);

    let mut coords = vec![0usize; source_sizes.len()];
    loop {
        let mut prior_weight = 1.0;
        for (i, &c) in coords.iter().enumerate() {
            prior_weight *= model.prior(i).values()[c];
        }
        // Independent mixed-radix encoding, first coordinate most significant.
        let mut s = 0usize;
        for (&c, &size) in coords.iter().zip(source_sizes) {
            s = s * size + c;
        }

        let mut symbols = vec![0usize; visible_sizes.len()];
        loop {
            let mut weight = prior_weight;
            for (j, &x) in symbols.iter().enumerate() {
                weight *= model.visible_cpt(j).entry(s, x);
                if skip_visible != Some(j) {
                    if let Some(w) = &evidence.visible[j] {
                        weight *= w[x];
                    }
                }
            }
            for label in 0..label_size {
                let mut label_weight = weight;
                if let Some(cpt) = model.label_cpt() {
                    label_weight *= cpt.entry(s, label);
                    if !skip_label {
                        if let Some(w) = &evidence.label {
                            label_weight *= w[label];
                        }
                    }
                }
                visit(&coords, &symbols, label, label_weight);
            }
            if !advance(&mut symbols, visible_sizes) {
                break;
            }
        }
        if !advance(&mut coords, source_sizes) {
            break;
        }
    }
}

fn normalized(mut values: Vec<f64>) -> Vec<f64> {
    let sum: f64 = values.iter().sum();
    assert!(sum > 0.0, "oracle distribution has no mass");
    for v in &mut values {
        *v /= sum;
    }
    values
}

/// `p(S_i | evidence)` by full enumeration.
pub fn oracle_source_posterior(
    model: &DicaModel,
    evidence: &OracleEvidence,
    i: usize,
) -> Vec<f64> {
    let mut acc = vec![0.0; model.source_sizes()[i]];
    enumerate_joint(model, evidence, None, false, |coords, _, _, w| {
        acc[coords[i]] += w;
    });
    normalized(acc)
}

/// `p(X_j | evidence at every other variable)` — the forward at `j`.
pub fn oracle_visible_forward(
    model: &DicaModel,
    evidence: &OracleEvidence,
    j: usize,
) -> Vec<f64> {
    let mut acc = vec![0.0; model.visible_sizes()[j]];
    enumerate_joint(model, evidence, Some(j), false, |_, symbols, _, w| {
        acc[symbols[j]] += w;
    });
    normalized(acc)
}

/// `p(X_j | all evidence)` — the posterior at `j`.
pub fn oracle_visible_posterior(
    model: &DicaModel,
    evidence: &OracleEvidence,
    j: usize,
) -> Vec<f64> {
    let mut acc = vec![0.0; model.visible_sizes()[j]];
    enumerate_joint(model, evidence, None, false, |_, symbols, _, w| {
        acc[symbols[j]] += w;
    });
    normalized(acc)
}

/// `p(C | visible evidence)` — the forward at the label.
pub fn oracle_label_forward(model: &DicaModel, evidence: &OracleEvidence) -> Vec<f64> {
    let mut acc = vec![0.0; model.label_size().expect("needs a label block")];
    enumerate_joint(model, evidence, None, true, |_, _, label, w| {
        acc[label] += w;
    });
    normalized(acc)
}

/// `p(C | all evidence)` — the posterior at the label.
pub fn oracle_label_posterior(model: &DicaModel, evidence: &OracleEvidence) -> Vec<f64> {
    let mut acc = vec![0.0; model.label_size().expect("needs a label block")];
    enumerate_joint(model, evidence, None, false, |_, _, label, w| {
        acc[label] += w;
    });
    normalized(acc)
}

/// Random small model within the oracle-tractable envelope.
pub fn random_small_model(rng: &mut ChaCha8Rng, with_label: bool) -> DicaModel {
    let m = rng.random_range(1..=3);
    let n = rng.random_range(1..=4);
    let source_sizes: Vec<usize> = (0..m).map(|_| rng.random_range(2..=3)).collect();
    let visible_sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
    let mut config = ModelConfig::new(source_sizes, visible_sizes).with_seed(rng.random());
    if with_label {
        config = config.with_label(rng.random_range(2..=3));
    }
    // Random (non-uniform) priors exercise the prior path in the oracle.
    let mut model = DicaModel::build(&config).unwrap();
    let priors: Vec<Message> = model
        .source_sizes()
        .iter()
        .map(|&size| {
            Message::normalize((0..size).map(|_| rng.random::<f64>() + 0.05).collect()).unwrap()
        })
        .collect();
    model = DicaModel::from_parts(
        model.source_sizes().to_vec(),
        model.visible_sizes().to_vec(),
        priors,
        model.visible_cpts().to_vec(),
        model.label_cpt().cloned(),
    )
    .unwrap();
    model
}

/// Random hard/soft/absent evidence over a model's visible variables (and
/// label, when present).
pub fn random_evidence(rng: &mut ChaCha8Rng, model: &DicaModel) -> Evidence {
    let mut evidence = Evidence::none(model.num_visible());
    for j in 0..model.num_visible() {
        let size = model.visible_sizes()[j];
        evidence.set_visible(j, random_var_evidence(rng, size));
    }
    if let Some(label_size) = model.label_size() {
        evidence = evidence.with_label(random_var_evidence(rng, label_size));
    }
    evidence
}

fn random_var_evidence(rng: &mut ChaCha8Rng, size: usize) -> VarEvidence {
    match rng.random_range(0..3) {
        0 => VarEvidence::Hard(rng.random_range(0..size)),
        1 => VarEvidence::Soft(
            Message::normalize((0..size).map(|_| rng.random::<f64>() + 0.02).collect()).unwrap(),
        ),
        _ => VarEvidence::Absent,
    }
}

// ---------------------------------------------------------------------------
// Synthetic digit dataset (MNIST geometry) for desk-scale workflows.
// ---------------------------------------------------------------------------

/// 5x7 digit glyphs, one row byte per scanline, low 5 bits used.
const DIGIT_FONT: [[u8; 7]; 10] = [
    [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110], // 0
    [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110], // 1
    [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111], // 2
    [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110], // 3
    [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010], // 4
    [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110], // 5
    [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110], // 6
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000], // 7
    [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110], // 8
    [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100], // 9
];

pub const IMAGE_SIDE: usize = 28;

/// Render digit `class` as a 28x28 grayscale image: the 5x7 glyph scaled by
/// 3, shifted by `(dx, dy)` from the centered position.
pub fn render_digit(class: usize, dx: i32, dy: i32) -> dica_core::data::GrayImage {
    const SCALE: usize = 3;
    let mut pixels = vec![0u8; IMAGE_SIDE * IMAGE_SIDE];
    let x0 = (IMAGE_SIDE as i32 - (5 * SCALE) as i32) / 2 + dx;
    let y0 = (IMAGE_SIDE as i32 - (7 * SCALE) as i32) / 2 + dy;
    for (row, bits) in DIGIT_FONT[class].iter().enumerate() {
        for col in 0..5 {
            if bits & (1 << (4 - col)) == 0 {
                continue;
            }
            for sy in 0..SCALE {
                for sx in 0..SCALE {
                    let x = x0 + (col * SCALE + sx) as i32;
                    let y = y0 + (row * SCALE + sy) as i32;
                    if (0..IMAGE_SIDE as i32).contains(&x) && (0..IMAGE_SIDE as i32).contains(&y) {
                        pixels[y as usize * IMAGE_SIDE + x as usize] = 255;
                    }
                }
            }
        }
    }
    dica_core::data::GrayImage {
        width: IMAGE_SIDE,
        height: IMAGE_SIDE,
        pixels,
    }
}

/// Digit images with per-image jitter and salt-and-pepper noise, classes
/// cycling 0..=9. Returns the images with their labels.
pub fn synthetic_digits_jittered(
    count: usize,
    seed: u64,
    noise: f64,
    jitter: i32,
) -> (Vec<dica_core::data::GrayImage>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % 10;
        let dx = rng.random_range(-jitter..=jitter);
        let dy = rng.random_range(-jitter..=jitter);
        let mut image = render_digit(class, dx, dy);
        for pixel in &mut image.pixels {
            if rng.random::<f64>() < noise {
                *pixel = 255 - *pixel;
            }
        }
        images.push(image);
        labels.push(class as u8);
    }
    (images, labels)
}

/// Centered digit images with salt-and-pepper noise only.
pub fn synthetic_digits(
    count: usize,
    seed: u64,
    noise: f64,
) -> (Vec<dica_core::data::GrayImage>, Vec<u8>) {
    synthetic_digits_jittered(count, seed, noise, 0)
}

// ---------------------------------------------------------------------------
// Deterministic pattern models for recovery experiments.
// ---------------------------------------------------------------------------

/// Four distinct 16-pixel patterns with pairwise Hamming distance >= 8.
pub fn recovery_patterns() -> Vec<Vec<usize>> {
    vec![
        vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
        vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1],
        vec![0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0],
        vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1],
    ]
}

/// A two-source binary model that paints `patterns[s]` for configuration `s`.
pub fn deterministic_pattern_model(patterns: &[Vec<usize>]) -> DicaModel {
    let n = patterns[0].len();
    let cpts: Vec<Cpt> = (0..n)
        .map(|j| {
            let rows: Vec<Vec<f64>> = patterns
                .iter()
                .map(|p| {
                    let mut row = vec![0.0, 0.0];
                    row[p[j]] = 1.0;
                    row
                })
                .collect();
            Cpt::from_rows(&rows).unwrap()
        })
        .collect();
    DicaModel::from_parts(
        vec![2, 2],
        vec![2; n],
        vec![Message::uniform(2), Message::uniform(2)],
        cpts,
        None,
    )
    .unwrap()
}
