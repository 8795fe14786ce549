//! Command implementations behind the `dica` binary.

use super::manifest::RunManifest;
use super::{
    ClassifyArgs, CompleteArgs, EncodeArgs, GenerateArgs, PrototypesArgs, TrainArgs,
};
use crate::data::{
    binarize, load_idx_images, load_idx_labels, load_model, save_model, take_subset, write_pgm,
    BinaryImage, LabeledDataset,
};
use crate::error::{DicaError, Result};
use crate::graph::{mean_image, product_coords, DicaModel, Evidence, ModelConfig, VarEvidence};
use crate::learn::{train, TrainConfig};
use crate::message::Message;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const MODEL_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "report.csv";
pub const CODES_FILE: &str = "codes.csv";
pub const CLASSES_FILE: &str = "classes.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

fn load_dataset(
    images_path: &Path,
    labels_path: Option<&Path>,
    threshold: u8,
    count: Option<usize>,
    seed: u64,
) -> Result<LabeledDataset> {
    let images: Vec<BinaryImage> = load_idx_images(images_path)?
        .iter()
        .map(|img| binarize(img, threshold))
        .collect();
    let labels = labels_path.map(load_idx_labels).transpose()?;
    let dataset = LabeledDataset::new(images, labels)?;
    match count {
        Some(count) if count < dataset.len() => take_subset(&dataset, count, seed),
        Some(count) if count > dataset.len() => Err(DicaError::Invalid(format!(
            "--count {count} exceeds the {} available images",
            dataset.len()
        ))),
        _ => Ok(dataset),
    }
}

fn image_geometry(dataset: &LabeledDataset) -> Result<(usize, usize)> {
    let first = dataset
        .images
        .first()
        .ok_or_else(|| DicaError::Invalid("dataset is empty".into()))?;
    Ok((first.width, first.height))
}

fn check_model_matches(model: &DicaModel, pixel_count: usize) -> Result<()> {
    if model.num_visible() != pixel_count {
        return Err(DicaError::Dimension(format!(
            "model has {} visible variables but the images have {pixel_count} pixels",
            model.num_visible()
        )));
    }
    Ok(())
}

/// Zero-padded file index wide enough for `total` entries.
fn padded(index: usize, total: usize) -> String {
    let width = total.saturating_sub(1).max(1).to_string().len();
    format!("{index:0width$}")
}

fn codes_row(posteriors: &[Message]) -> String {
    let mut row = String::new();
    for (i, p) in posteriors.iter().enumerate() {
        if i > 0 {
            row.push(',');
        }
        // Probability of symbol 1, the bar-graph convention for binary codes.
        let _ = write!(row, "{:.6}", p.values().get(1).copied().unwrap_or(0.0));
    }
    row
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let dataset = load_dataset(
        &args.images,
        args.labels.as_deref(),
        args.threshold,
        args.count,
        args.seed,
    )?;
    if dataset.is_empty() {
        return Err(DicaError::Invalid("training set is empty".into()));
    }
    let pixel_count = dataset.images[0].len();
    let mut config = ModelConfig::new(
        vec![args.source_arity; args.num_sources],
        vec![2; pixel_count],
    )
    .with_seed(args.seed);
    config.init_perturbation = args.init_perturbation;
    if args.supervised {
        config = config.with_label(10);
    }
    let mut model = DicaModel::build(&config)?;

    let train_config = TrainConfig {
        epochs: args.epochs,
        inner_cycles: args.inner_cycles,
        seed: args.seed,
        supervised: args.supervised,
        init_perturbation: args.init_perturbation,
    };
    let report = train(&mut model, &dataset.samples(), &train_config)?;

    save_model(&model, args.out.join(MODEL_FILE))?;
    std::fs::write(args.out.join(REPORT_FILE), report.to_csv())?;

    let mut manifest = RunManifest::new("train", &args.out);
    manifest
        .flag("images", args.images.display())
        .flag("count", args.count.map_or("all".into(), |c| c.to_string()))
        .flag("num-sources", args.num_sources)
        .flag("source-arity", args.source_arity)
        .flag("epochs", args.epochs)
        .flag("inner-cycles", args.inner_cycles)
        .flag("threshold", args.threshold)
        .flag("seed", args.seed)
        .flag("supervised", args.supervised)
        .flag("init-perturbation", args.init_perturbation);
    if let Some(labels) = &args.labels {
        manifest.flag("labels", labels.display());
        manifest.dataset_paths.push(labels.clone());
    }
    manifest.seed = Some(args.seed);
    manifest.model_path = Some(args.out.join(MODEL_FILE));
    manifest.dataset_paths.insert(0, args.images.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

fn parse_number_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| DicaError::Invalid(format!("cannot parse {what} entry {part:?}")))
        })
        .collect()
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    let (width, height) = (args.width, args.height);
    if width * height != model.num_visible() {
        return Err(DicaError::Dimension(format!(
            "{width}x{height} does not match the model's {} visible variables",
            model.num_visible()
        )));
    }

    if args.all_configs {
        let total = model.product_size();
        for index in 0..total {
            let coords = product_coords(index, model.source_sizes())?;
            let forwards = model.generate(&coords)?;
            let means = mean_image(&forwards)?;
            let name = format!("config_{}.pgm", padded(index, total));
            write_pgm(&means, width, height, args.out.join(name))?;
        }
    } else if let Some(config_text) = &args.config {
        let coords: Vec<usize> = parse_number_list(config_text, "--config")?;
        if coords.len() != model.num_sources() {
            return Err(DicaError::Invalid(format!(
                "--config has {} coordinates, model has {} sources",
                coords.len(),
                model.num_sources()
            )));
        }
        let index = crate::graph::product_index(&coords, model.source_sizes())?;
        let forwards = model.generate(&coords)?;
        let means = mean_image(&forwards)?;
        let name = format!("config_{}.pgm", padded(index, model.product_size()));
        write_pgm(&means, width, height, args.out.join(name))?;
    } else if let Some(soft_text) = &args.soft {
        let probs: Vec<f64> = parse_number_list(soft_text, "--soft")?;
        if probs.len() != model.num_sources() {
            return Err(DicaError::Invalid(format!(
                "--soft has {} probabilities, model has {} sources",
                probs.len(),
                model.num_sources()
            )));
        }
        let forwards: Vec<Message> = probs
            .iter()
            .zip(model.source_sizes())
            .map(|(&p, &size)| {
                if size != 2 {
                    return Err(DicaError::Invalid(
                        "--soft takes per-source probabilities of symbol 1, which needs binary sources".into(),
                    ));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(DicaError::Invalid(format!(
                        "--soft probability {p} outside [0,1]"
                    )));
                }
                Message::normalize(vec![1.0 - p, p])
            })
            .collect::<Result<_>>()?;
        let means = mean_image(&model.generate_from_forwards(&forwards)?)?;
        write_pgm(&means, width, height, args.out.join("soft.pgm"))?;
    }

    let mut manifest = RunManifest::new("generate", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("all-configs", args.all_configs)
        .flag("config", args.config.as_deref().unwrap_or("-"))
        .flag("soft", args.soft.as_deref().unwrap_or("-"))
        .flag("width", width)
        .flag("height", height);
    manifest.model_path = Some(args.model.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

pub fn cmd_encode(args: &EncodeArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    let dataset = load_dataset(
        &args.images,
        None,
        args.threshold,
        args.count,
        args.seed,
    )?;
    check_model_matches(&model, dataset.images[0].len())?;
    let (width, height) = image_geometry(&dataset)?;

    let mut codes = String::new();
    for (i, image) in dataset.images.iter().enumerate() {
        let state = model.propagate(&Evidence::hard(&image.symbols()), None)?;
        let posteriors = state.source_posteriors()?;
        codes.push_str(&codes_row(&posteriors));
        codes.push('\n');
        let means = mean_image(&state.visible_forward)?;
        let name = format!("recon_{}.pgm", padded(i, dataset.len()));
        write_pgm(&means, width, height, args.out.join(name))?;
    }
    std::fs::write(args.out.join(CODES_FILE), codes)?;

    let mut manifest = RunManifest::new("encode", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("images", args.images.display())
        .flag("count", args.count.map_or("all".into(), |c| c.to_string()))
        .flag("threshold", args.threshold)
        .flag("seed", args.seed);
    manifest.seed = Some(args.seed);
    manifest.model_path = Some(args.model.clone());
    manifest.dataset_paths.push(args.images.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    let dataset = load_dataset(
        &args.images,
        None,
        args.threshold,
        args.count,
        args.seed,
    )?;
    check_model_matches(&model, dataset.images[0].len())?;
    let (width, height) = image_geometry(&dataset)?;
    if !(0.0..1.0).contains(&args.erasure) {
        return Err(DicaError::Invalid(format!(
            "--erasure {} outside [0,1)",
            args.erasure
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut codes = String::new();
    let mut agreeing = 0usize;
    let mut erased_total = 0usize;
    for (i, image) in dataset.images.iter().enumerate() {
        let pixels = image.symbols();
        let erase_count = (args.erasure * pixels.len() as f64).round() as usize;
        let mut erased = rand::seq::index::sample(&mut rng, pixels.len(), erase_count).into_vec();
        erased.sort_unstable();

        let mut evidence = Evidence::hard(&pixels);
        for &j in &erased {
            evidence.set_visible(j, VarEvidence::Absent);
        }
        let completion = model.complete(&evidence)?;

        // Renderings: the erased input (unknown pixels mid-gray), the
        // forward means, and the posterior means.
        let mut erased_img = vec![0.0; pixels.len()];
        let mut forward_img = vec![0.0; pixels.len()];
        let mut posterior_img = vec![0.0; pixels.len()];
        let mut erased_iter = erased.iter().peekable();
        for (j, var) in completion.variables.iter().enumerate() {
            let is_erased = erased_iter.peek() == Some(&&j);
            if is_erased {
                erased_iter.next();
            }
            erased_img[j] = if is_erased { 0.5 } else { pixels[j] as f64 };
            match var {
                crate::graph::CompletedVar::Observed(msg) => {
                    forward_img[j] = msg.values()[1];
                    posterior_img[j] = msg.values()[1];
                }
                crate::graph::CompletedVar::Missing { forward, posterior } => {
                    forward_img[j] = forward.values()[1];
                    posterior_img[j] = posterior.values()[1];
                    erased_total += 1;
                    if forward.argmax() == pixels[j] {
                        agreeing += 1;
                    }
                }
            }
        }
        let tag = padded(i, dataset.len());
        write_pgm(&erased_img, width, height, args.out.join(format!("erased_{tag}.pgm")))?;
        write_pgm(&forward_img, width, height, args.out.join(format!("forward_{tag}.pgm")))?;
        write_pgm(
            &posterior_img,
            width,
            height,
            args.out.join(format!("posterior_{tag}.pgm")),
        )?;
        codes.push_str(&codes_row(&completion.source_posteriors));
        codes.push('\n');
    }
    std::fs::write(args.out.join(CODES_FILE), codes)?;
    let agreement = agreeing as f64 / erased_total.max(1) as f64;
    std::fs::write(
        args.out.join(SUMMARY_FILE),
        format!("images {}\nerased_pixels {erased_total}\nerased_pixel_agreement {agreement:.6}\n", dataset.len()),
    )?;

    let mut manifest = RunManifest::new("complete", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("images", args.images.display())
        .flag("count", args.count.map_or("all".into(), |c| c.to_string()))
        .flag("threshold", args.threshold)
        .flag("erasure", args.erasure)
        .flag("seed", args.seed);
    manifest.seed = Some(args.seed);
    manifest.model_path = Some(args.model.clone());
    manifest.dataset_paths.push(args.images.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

pub fn cmd_correct(args: &EncodeArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    let dataset = load_dataset(
        &args.images,
        None,
        args.threshold,
        args.count,
        args.seed,
    )?;
    check_model_matches(&model, dataset.images[0].len())?;
    let (width, height) = image_geometry(&dataset)?;

    let mut codes = String::new();
    for (i, image) in dataset.images.iter().enumerate() {
        let state = model.propagate(&Evidence::hard(&image.symbols()), None)?;
        let means = mean_image(&state.visible_forward)?;
        let name = format!("corrected_{}.pgm", padded(i, dataset.len()));
        write_pgm(&means, width, height, args.out.join(name))?;
        codes.push_str(&codes_row(&state.source_posteriors()?));
        codes.push('\n');
    }
    std::fs::write(args.out.join(CODES_FILE), codes)?;

    let mut manifest = RunManifest::new("correct", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("images", args.images.display())
        .flag("count", args.count.map_or("all".into(), |c| c.to_string()))
        .flag("threshold", args.threshold)
        .flag("seed", args.seed);
    manifest.seed = Some(args.seed);
    manifest.model_path = Some(args.model.clone());
    manifest.dataset_paths.push(args.images.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    if model.label_cpt().is_none() {
        return Err(DicaError::MissingLabelBlock);
    }
    let dataset = load_dataset(
        &args.images,
        args.labels.as_deref(),
        args.threshold,
        args.count,
        args.seed,
    )?;
    check_model_matches(&model, dataset.images[0].len())?;
    let (width, height) = image_geometry(&dataset)?;

    let mut classes = String::new();
    let mut codes = String::new();
    let mut correct = 0usize;
    for (i, image) in dataset.images.iter().enumerate() {
        let state = model.propagate(&Evidence::hard(&image.symbols()), None)?;
        let class_posterior = state.label_posterior()?;
        let predicted = class_posterior.argmax();

        let mut row = format!("{i}");
        for &v in class_posterior.values() {
            let _ = write!(row, ",{v:.6}");
        }
        let _ = write!(row, ",{predicted}");
        if let Some(labels) = &dataset.labels {
            let actual = labels[i] as usize;
            let _ = write!(row, ",{actual}");
            if predicted == actual {
                correct += 1;
            }
        }
        classes.push_str(&row);
        classes.push('\n');

        codes.push_str(&codes_row(&state.source_posteriors()?));
        codes.push('\n');
        let means = mean_image(&state.visible_forward)?;
        let name = format!("recon_{}.pgm", padded(i, dataset.len()));
        write_pgm(&means, width, height, args.out.join(name))?;
    }
    std::fs::write(args.out.join(CLASSES_FILE), classes)?;
    std::fs::write(args.out.join(CODES_FILE), codes)?;
    let mut summary = format!("images {}\n", dataset.len());
    if dataset.labels.is_some() {
        let accuracy = correct as f64 / dataset.len() as f64;
        let _ = write!(summary, "correct {correct}\naccuracy {accuracy:.6}\n");
    }
    std::fs::write(args.out.join(SUMMARY_FILE), summary)?;

    let mut manifest = RunManifest::new("classify", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("images", args.images.display())
        .flag("count", args.count.map_or("all".into(), |c| c.to_string()))
        .flag("threshold", args.threshold)
        .flag("seed", args.seed);
    if let Some(labels) = &args.labels {
        manifest.flag("labels", labels.display());
        manifest.dataset_paths.push(labels.clone());
    }
    manifest.seed = Some(args.seed);
    manifest.model_path = Some(args.model.clone());
    manifest.dataset_paths.insert(0, args.images.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}

pub fn cmd_prototypes(args: &PrototypesArgs) -> Result<()> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)?;
    let model = load_model(&args.model)?;
    let label_size = model.label_size().ok_or(DicaError::MissingLabelBlock)?;
    let (width, height) = (args.width, args.height);
    if width * height != model.num_visible() {
        return Err(DicaError::Dimension(format!(
            "{width}x{height} does not match the model's {} visible variables",
            model.num_visible()
        )));
    }

    let mut codes = String::new();
    for class in 0..label_size {
        let prototype = model.prototype(class)?;
        let means = mean_image(&prototype.visible_forwards)?;
        let name = format!("prototype_{}.pgm", padded(class, label_size));
        write_pgm(&means, width, height, args.out.join(name))?;
        codes.push_str(&codes_row(&prototype.source_posteriors));
        codes.push('\n');
    }
    std::fs::write(args.out.join(CODES_FILE), codes)?;

    let mut manifest = RunManifest::new("prototypes", &args.out);
    manifest
        .flag("model", args.model.display())
        .flag("width", width)
        .flag("height", height);
    manifest.model_path = Some(args.model.clone());
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write()
}
