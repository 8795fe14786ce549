//! Model persistence: a self-describing JSON document holding the sizes,
//! priors and learnable tables. The fixed marginalizers are regenerated
//! from the sizes on load rather than stored, which doubles as an
//! integrity check. Floats go through shortest-round-trip decimal
//! serialization, so a load reproduces every `f64` bit-exactly and a
//! save → load → save cycle is byte-identical.

use crate::error::{DicaError, Result};
use crate::graph::DicaModel;
use crate::message::{Cpt, Message};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    num_sources: usize,
    source_sizes: Vec<usize>,
    visible_sizes: Vec<usize>,
    priors: Vec<Vec<f64>>,
    /// One row-major table per visible variable, `product_size` rows.
    visible_cpts: Vec<Vec<f64>>,
    label_size: Option<usize>,
    label_cpt: Option<Vec<f64>>,
}

/// Serialize a model to its canonical JSON document.
pub fn model_to_json(model: &DicaModel) -> String {
    let document = ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        num_sources: model.num_sources(),
        source_sizes: model.source_sizes().to_vec(),
        visible_sizes: model.visible_sizes().to_vec(),
        priors: model.priors().iter().map(|p| p.values().to_vec()).collect(),
        visible_cpts: model
            .visible_cpts()
            .iter()
            .map(|c| c.entries().to_vec())
            .collect(),
        label_size: model.label_size(),
        label_cpt: model.label_cpt().map(|c| c.entries().to_vec()),
    };
    serde_json::to_string_pretty(&document).expect("model document always serializes")
}

/// Parse and validate a model document. Any structural or invariant
/// problem (wrong version, shape mismatch, non-stochastic row, ...) is a
/// format error.
pub fn model_from_json(json: &str) -> Result<DicaModel> {
    let document: ModelDocument = serde_json::from_str(json)
        .map_err(|e| DicaError::Format(format!("model document: {e}")))?;
    if document.format_version != MODEL_FORMAT_VERSION {
        return Err(DicaError::Format(format!(
            "unsupported model format version {}, expected {MODEL_FORMAT_VERSION}",
            document.format_version
        )));
    }
    if document.num_sources != document.source_sizes.len() {
        return Err(DicaError::Format(format!(
            "document claims {} sources but lists {} sizes",
            document.num_sources,
            document.source_sizes.len()
        )));
    }
    let product: usize = document.source_sizes.iter().product();
    let priors = document
        .priors
        .into_iter()
        .map(Message::from_values)
        .collect::<Result<Vec<_>>>()
        .map_err(as_format)?;
    let visible_cpts = document
        .visible_cpts
        .into_iter()
        .zip(&document.visible_sizes)
        .map(|(entries, &cols)| Cpt::new(product, cols, entries))
        .collect::<Result<Vec<_>>>()
        .map_err(as_format)?;
    let label_cpt = match (document.label_cpt, document.label_size) {
        (Some(entries), Some(cols)) => Some(Cpt::new(product, cols, entries).map_err(as_format)?),
        (None, None) => None,
        _ => {
            return Err(DicaError::Format(
                "label_cpt and label_size must be present together".into(),
            ))
        }
    };
    DicaModel::from_parts(
        document.source_sizes,
        document.visible_sizes,
        priors,
        visible_cpts,
        label_cpt,
    )
    .map_err(as_format)
}

fn as_format(err: DicaError) -> DicaError {
    match err {
        DicaError::Format(_) => err,
        other => DicaError::Format(other.to_string()),
    }
}

pub fn save_model(model: &DicaModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DicaModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}
