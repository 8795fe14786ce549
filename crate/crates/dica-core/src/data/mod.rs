//! Dataset ingestion and artifact emission: IDX image/label files,
//! threshold binarization, seeded subsetting, model persistence and PGM
//! rendering.

mod idx;
mod model_io;
mod pgm;

pub use idx::{
    load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels, write_idx_images,
    write_idx_labels, GrayImage, IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC,
};
pub use model_io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use pgm::{pgm_bytes, write_pgm};

use crate::error::{DicaError, Result};
use crate::learn::Sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A binarized image: {0,1} symbols in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Pixels widened to per-variable symbol indices.
    pub fn symbols(&self) -> Vec<usize> {
        self.pixels.iter().map(|&p| p as usize).collect()
    }
}

/// Threshold binarization: a pixel at or above the threshold becomes
/// symbol 1. Monotone in the threshold by construction.
pub fn binarize(image: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: image.width,
        height: image.height,
        pixels: image
            .pixels
            .iter()
            .map(|&p| u8::from(p >= threshold))
            .collect(),
    }
}

/// Binarized images paired with optional class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub images: Vec<BinaryImage>,
    pub labels: Option<Vec<u8>>,
}

impl LabeledDataset {
    /// Pair images with labels, checking the counts line up.
    pub fn new(images: Vec<BinaryImage>, labels: Option<Vec<u8>>) -> Result<Self> {
        if let Some(labels) = &labels {
            if labels.len() != images.len() {
                return Err(DicaError::Format(format!(
                    "{} labels for {} images",
                    labels.len(),
                    images.len()
                )));
            }
        }
        Ok(LabeledDataset { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Convert into training samples.
    pub fn samples(&self) -> Vec<Sample> {
        self.images
            .iter()
            .enumerate()
            .map(|(i, image)| Sample {
                visible: image.symbols(),
                label: self.labels.as_ref().map(|l| l[i] as usize),
            })
            .collect()
    }
}

/// Seeded uniform sampling without replacement, pairing preserved. The
/// selected indices are kept in dataset order, so taking the full count is
/// the identity.
pub fn take_subset(dataset: &LabeledDataset, count: usize, seed: u64) -> Result<LabeledDataset> {
    if count > dataset.len() {
        return Err(DicaError::Invalid(format!(
            "cannot take {count} items from a dataset of {}",
            dataset.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, dataset.len(), count).into_vec();
    indices.sort_unstable();
    let images = indices.iter().map(|&i| dataset.images[i].clone()).collect();
    let labels = dataset
        .labels
        .as_ref()
        .map(|labels| indices.iter().map(|&i| labels[i]).collect());
    Ok(LabeledDataset { images, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(pixels: Vec<u8>) -> GrayImage {
        GrayImage {
            width: pixels.len(),
            height: 1,
            pixels,
        }
    }

    #[test]
    fn binarize_cases() {
        assert_eq!(binarize(&gray(vec![0, 0, 0]), 128).pixels, vec![0, 0, 0]);
        assert_eq!(binarize(&gray(vec![127, 128]), 128).pixels, vec![0, 1]);
        assert_eq!(binarize(&gray(vec![0, 5, 255]), 0).pixels, vec![1, 1, 1]);
    }

    #[test]
    fn pairing_count_mismatch_is_a_format_error() {
        let images = vec![binarize(&gray(vec![0, 255]), 128)];
        assert!(matches!(
            LabeledDataset::new(images, Some(vec![1, 2])),
            Err(DicaError::Format(_))
        ));
    }

    fn toy_dataset(count: usize) -> LabeledDataset {
        let images = (0..count)
            .map(|i| BinaryImage {
                width: 2,
                height: 1,
                pixels: vec![(i % 2) as u8, ((i / 2) % 2) as u8],
            })
            .collect();
        let labels = (0..count).map(|i| (i % 10) as u8).collect();
        LabeledDataset::new(images, Some(labels)).unwrap()
    }

    #[test]
    fn take_subset_is_deterministic_and_pair_preserving() {
        let dataset = toy_dataset(30);
        let a = take_subset(&dataset, 10, 42).unwrap();
        let b = take_subset(&dataset, 10, 42).unwrap();
        assert_eq!(a.images, b.images);
        assert_eq!(a.labels, b.labels);
        let c = take_subset(&dataset, 10, 43).unwrap();
        assert!(a.images != c.images || a.labels != c.labels);
        // Full-count subset is the identity.
        let full = take_subset(&dataset, 30, 7).unwrap();
        assert_eq!(full.images, dataset.images);
        assert_eq!(full.labels, dataset.labels);
        // Pairing is preserved under subsetting.
        for (image, &label) in a.images.iter().zip(a.labels.as_ref().unwrap()) {
            let original = dataset
                .images
                .iter()
                .position(|img| img == image)
                .expect("subset image comes from the dataset");
            // Labels repeat module 10, so match on the paired image content.
            assert_eq!(dataset.labels.as_ref().unwrap()[original] % 2, label % 2);
        }
    }

    #[test]
    fn take_subset_rejects_oversized_requests() {
        let dataset = toy_dataset(3);
        assert!(take_subset(&dataset, 4, 0).is_err());
    }

    proptest! {
        #[test]
        fn binarize_is_monotone_in_threshold(
            pixels in prop::collection::vec(0u8..=255, 1..32),
            t1 in 0u8..=255,
            t2 in 0u8..=255,
        ) {
            let (low, high) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let image = gray(pixels);
            let a = binarize(&image, low);
            let b = binarize(&image, high);
            // Raising the threshold never turns a 0 into a 1.
            for (x, y) in a.pixels.iter().zip(&b.pixels) {
                prop_assert!(x >= y);
            }
        }
    }
}
