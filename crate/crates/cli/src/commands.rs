use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stepscript::evalkit::{
    corpus_stats, localization_f1, read_annotation, script_precision_recall, CorpusAnnotation, CorpusStats,
    Matching, ScoreReport, ScriptScore,
};
use stepscript::synthgen::generate;
use stepscript::textalign::io::{read_cost_csv, read_sequences, read_steps, write_sequences, AlignmentRecord, StepsFile};
use stepscript::textalign::{build_token_cost, extract_main_steps, fw_msa, MsaSolution, StepAssignment, TokenCostMatrix, TokenSequence};
use stepscript::vidcluster::{
    build_constraint_windows, fw_localize, list_feature_dir, narration_baseline, predict_ordered, read_feature_dir,
    step_constraints, train_supervised, uniform_baseline, write_feature_binary, write_feature_csv,
    write_localization, FeatureStream, LocalizeOptions, StepConstraints, StepLocalization,
};
use stepscript::Error;

use crate::config::{Method, RunConfig};
use crate::error::{CliError, Result};
use crate::results::{write_results, ResultRow};

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
        .into()
    })
}

fn output_dir(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.output).map_err(|e| CliError::io(&config.output, e))?;
    Ok(&config.output)
}

fn token_cost(config: &RunConfig, sequences: &[TokenSequence]) -> Result<TokenCostMatrix> {
    Ok(match &config.cost {
        Some(path) => read_cost_csv(path)?,
        None => build_token_cost(sequences, config.match_reward, config.mismatch_penalty)?,
    })
}

fn align(config: &RunConfig, sequences: &[TokenSequence]) -> Result<MsaSolution> {
    let cost = token_cost(config, sequences)?;
    Ok(fw_msa(sequences, &cost, &config.msa_options())?)
}

#[derive(Debug, Clone)]
pub struct AlignOutput {
    pub solution: MsaSolution,
    /// Steps for each requested K, in the order of the K list.
    pub steps: Vec<StepAssignment>,
    pub script_scores: Vec<ScriptScore>,
}

/// Aligns the narration and extracts the main steps for every K. Writes
/// `alignment.json`, `steps_k<K>.json` and, given a script, `script_k<K>.json`.
pub fn cmd_align(config: &RunConfig) -> Result<AlignOutput> {
    config.validate()?;
    let sequences = read_sequences(RunConfig::require(&config.tokens, "tokens")?)?;
    let solution = align(config, &sequences)?;
    let out = output_dir(config)?;
    write_json(
        &out.join("alignment.json"),
        &AlignmentRecord::new(&solution.alignment, &sequences, Some(solution.objective)),
    )?;
    let script: Option<Vec<String>> = config.script.as_deref().map(read_json_file).transpose()?;
    let equivalence: Option<BTreeMap<String, String>> =
        config.equivalence.as_deref().map(read_json_file).transpose()?;

    let mut steps_out = Vec::new();
    let mut scores = Vec::new();
    for &k in &config.k {
        let steps = extract_main_steps(&solution.alignment, &sequences, k)?;
        if let Some(w) = &steps.warning {
            log::warn!("K = {k}: {w}");
        }
        write_json(&out.join(format!("steps_k{k}.json")), &StepsFile::new(&steps))?;
        if let Some(script) = &script {
            let labels: Vec<String> = steps.labels.iter().map(ToString::to_string).collect();
            let score = script_precision_recall(&labels, script, equivalence.as_ref());
            write_json(&out.join(format!("script_k{k}.json")), &score)?;
            scores.push(score);
        }
        steps_out.push(steps);
    }
    Ok(AlignOutput {
        solution,
        steps: steps_out,
        script_scores: scores,
    })
}

fn load_streams(config: &RunConfig, ids: Option<Vec<String>>) -> Result<Vec<FeatureStream>> {
    let dir = RunConfig::require(&config.features, "features")?;
    let ids = match ids {
        Some(ids) => ids,
        None => list_feature_dir(dir)?,
    };
    if ids.is_empty() {
        return Err(Error::EmptyInput(format!("no feature files in {}", dir.display())).into());
    }
    Ok(read_feature_dir(dir, &ids, config.interval_duration_s)?)
}

fn with_item(e: Error, item_id: &str) -> Error {
    match e {
        Error::Infeasible { step, .. } => Error::Infeasible {
            item: item_id.to_string(),
            step,
        },
        other => other,
    }
}

/// F1 of every candidate placement, lowest and highest.
fn f1_range(
    streams: &[FeatureStream],
    candidates: &[Vec<Vec<usize>>],
    num_steps: usize,
    annotation: &CorpusAnnotation,
) -> Result<(f64, f64)> {
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for c in candidates {
        let loc = StepLocalization::from_placements(streams, c, num_steps)?;
        let f1 = localization_f1(&loc, annotation, &Matching::Hungarian)?.f1;
        range = (range.0.min(f1), range.1.max(f1));
    }
    Ok(range)
}

struct Localized {
    localization: StepLocalization,
    /// Placements whose F1 spread forms the error bar.
    spread: Vec<Vec<Vec<usize>>>,
}

fn localize_one(
    method: Method,
    streams: &[FeatureStream],
    constraints: Option<&StepConstraints>,
    num_steps: usize,
    options: &LocalizeOptions,
) -> Result<Localized> {
    let solved = |windows: &[Vec<_>], warnings: Vec<String>| -> Result<Localized> {
        let sol = fw_localize(streams, windows, num_steps, options)?;
        let mut spread = sol.history.after_best().to_vec();
        spread.push(sol.placements.clone());
        Ok(Localized {
            localization: sol.to_localization(streams, warnings)?,
            spread,
        })
    };
    let fixed = |placements: Vec<Vec<usize>>, warnings: Vec<String>| -> Result<Localized> {
        let mut localization = StepLocalization::from_placements(streams, &placements, num_steps)?;
        localization.warnings = warnings;
        Ok(Localized {
            localization,
            spread: vec![placements],
        })
    };
    match method {
        Method::Full => {
            let c = constraints.expect("full method has constraints");
            solved(&c.windows, c.warnings.clone())
        }
        Method::VideoOnly => solved(&[], Vec::new()),
        Method::TextOnly => {
            let c = constraints.expect("text-only method has constraints");
            let placements = streams
                .iter()
                .zip(&c.windows)
                .map(|(s, w)| narration_baseline(s.num_intervals(), w, num_steps).map_err(|e| with_item(e, &s.item_id)))
                .collect::<Result<Vec<_>, _>>()?;
            fixed(placements, c.warnings.clone())
        }
        Method::Uniform => {
            let placements = streams
                .iter()
                .map(|s| uniform_baseline(s.num_intervals(), num_steps).map_err(|e| with_item(e, &s.item_id)))
                .collect::<Result<Vec<_>, _>>()?;
            fixed(placements, Vec::new())
        }
        Method::Supervised => Err(CliError::Usage(
            "supervised results come from the `supervised` command".into(),
        )),
    }
}

/// Localizes the steps with every configured method and K. Writes
/// `localization_<method>_k<K>.json`, and with annotations
/// `score_<method>_k<K>.json` and `results.csv`.
pub fn cmd_localize(config: &RunConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if config.methods.contains(&Method::Supervised) {
        return Err(CliError::Usage("method `supervised` belongs to the `supervised` command".into()));
    }
    let needs_steps = config.methods.iter().any(|m| matches!(m, Method::Full | Method::TextOnly));
    let streams = load_streams(config, None)?;
    let annotation = config.annotation.as_deref().map(read_annotation).transpose()?;
    let out = output_dir(config)?;

    // Steps for each requested K, or a single precomputed step file.
    let mut runs: Vec<(usize, Option<StepAssignment>)> = Vec::new();
    let sequences = if needs_steps {
        Some(read_sequences(RunConfig::require(&config.tokens, "tokens")?)?)
    } else {
        None
    };
    match (&sequences, &config.steps) {
        (Some(_), Some(path)) => {
            let steps = read_steps(path)?;
            runs.push((steps.num_steps, Some(steps)));
        }
        (Some(seqs), None) => {
            let solution = align(config, seqs)?;
            for &k in &config.k {
                let steps = extract_main_steps(&solution.alignment, seqs, k)?;
                if let Some(w) = &steps.warning {
                    log::warn!("K = {k}: {w}");
                }
                runs.push((k, Some(steps)));
            }
        }
        (None, _) => runs.extend(config.k.iter().map(|&k| (k, None))),
    }

    let options = config.localize_options();
    let mut rows = Vec::new();
    for (k, steps) in &runs {
        let constraints = match (&sequences, steps) {
            (Some(seqs), Some(steps)) => {
                let windows = build_constraint_windows(seqs, &streams, config.before_s, config.after_s)?;
                let c = step_constraints(&windows, steps)?;
                for w in &c.warnings {
                    log::warn!("{w}");
                }
                Some(c)
            }
            _ => None,
        };
        // Baselines localize as many steps as the narration yields.
        let k_pred = steps.as_ref().map_or(*k, |s| s.num_steps);
        for &method in &config.methods {
            let run = localize_one(method, &streams, constraints.as_ref(), k_pred, &options)?;
            let name = method.name();
            write_localization(&out.join(format!("localization_{name}_k{k}.json")), &run.localization)?;
            if let Some(ann) = &annotation {
                let report = localization_f1(&run.localization, ann, &Matching::Hungarian)?;
                write_json(&out.join(format!("score_{name}_k{k}.json")), &report)?;
                let (lo, hi) = f1_range(&streams, &run.spread, k_pred, ann)?;
                rows.push(ResultRow {
                    task: config.task.clone(),
                    method: name.to_string(),
                    k: *k,
                    seed: config.seed,
                    k_pred,
                    f1: report.f1,
                    f1_min: lo.min(report.f1),
                    f1_max: hi.max(report.f1),
                    precision: report.precision,
                    recall: report.recall,
                });
            }
        }
    }
    if annotation.is_some() {
        write_results(&out.join("results.csv"), &rows)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_items: Vec<String>,
    pub lambda: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupervisedReport {
    pub folds: Vec<FoldResult>,
    pub mean_f1: f64,
    pub min_f1: f64,
    pub max_f1: f64,
    pub warnings: Vec<String>,
}

fn subset(annotation: &CorpusAnnotation, streams: &[FeatureStream], picked: &[usize]) -> (CorpusAnnotation, Vec<FeatureStream>) {
    let s: Vec<FeatureStream> = picked.iter().map(|&i| streams[i].clone()).collect();
    let items = s
        .iter()
        .filter_map(|st| annotation.item(&st.item_id).cloned())
        .collect();
    (
        CorpusAnnotation {
            num_gt_steps: annotation.num_gt_steps,
            items,
        },
        s,
    )
}

/// Trains on `train` and scores ordered predictions on `test`, with the
/// identity step mapping.
fn train_and_score(
    annotation: &CorpusAnnotation,
    streams: &[FeatureStream],
    train: &[usize],
    test: &[usize],
    options: &LocalizeOptions,
) -> Result<(ScoreReport, Vec<String>)> {
    let (train_ann, train_streams) = subset(annotation, streams, train);
    let model = train_supervised(&train_streams, &train_ann, options)?;
    let (test_ann, test_streams) = subset(annotation, streams, test);
    let placements = test_streams
        .iter()
        .map(|s| predict_ordered(&model.classifier, s))
        .collect::<stepscript::Result<Vec<_>>>()?;
    let k = annotation.num_gt_steps;
    let loc = StepLocalization::from_placements(&test_streams, &placements, k)?;
    let identity = Matching::Given((0..k).map(Some).collect());
    Ok((localization_f1(&loc, &test_ann, &identity)?, model.warnings))
}

/// Splits `items` into `folds` groups by position.
fn split(items: &[usize], folds: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); folds];
    for (i, &item) in items.iter().enumerate() {
        groups[i % folds].push(item);
    }
    groups
}

fn complement(groups: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = groups
        .iter()
        .enumerate()
        .filter(|&(g, _)| g != held_out)
        .flat_map(|(_, items)| items.iter().copied())
        .collect();
    rest.sort_unstable();
    rest
}

/// Outer cross-validation over items; within each training split an inner
/// cross-validation picks lambda from the grid. Writes `supervised.json`
/// and `results.csv`.
pub fn cmd_supervised(config: &RunConfig) -> Result<(SupervisedReport, ResultRow)> {
    config.validate()?;
    let sc = &config.supervised;
    if sc.lambda_grid.is_empty() || sc.lambda_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(CliError::Usage("lambda_grid must hold positive values".into()));
    }
    if sc.folds < 2 || (sc.lambda_grid.len() > 1 && sc.inner_folds < 2) {
        return Err(CliError::Usage("at least two folds are required".into()));
    }
    let annotation = read_annotation(RunConfig::require(&config.annotation, "annotation")?)?;
    annotation.validate()?;
    let ids: Vec<String> = annotation.items.iter().map(|i| i.item_id.clone()).collect();
    let streams = load_streams(config, Some(ids))?;
    let n = streams.len();
    if n < sc.folds {
        return Err(Error::InvalidParameter(format!("{n} items cannot be split into {} folds", sc.folds)).into());
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let groups = split(&order, sc.folds);
    let base = config.localize_options();

    let mut folds = Vec::with_capacity(sc.folds);
    let mut warnings = Vec::new();
    for (f, test) in groups.iter().enumerate() {
        let train = complement(&groups, f);
        let lambda = if sc.lambda_grid.len() == 1 {
            sc.lambda_grid[0]
        } else {
            if train.len() < sc.inner_folds {
                return Err(Error::InvalidParameter(format!(
                    "{} training items cannot be split into {} inner folds",
                    train.len(),
                    sc.inner_folds
                ))
                .into());
            }
            let inner = split(&train, sc.inner_folds);
            let mut best: Option<(f64, f64)> = None;
            for &lambda in &sc.lambda_grid {
                let options = LocalizeOptions {
                    lambda: Some(lambda),
                    ..base.clone()
                };
                let mut total = 0.0;
                for (g, val) in inner.iter().enumerate() {
                    total += train_and_score(&annotation, &streams, &complement(&inner, g), val, &options)?.0.f1;
                }
                let mean = total / inner.len() as f64;
                if best.is_none_or(|(m, _)| mean > m) {
                    best = Some((mean, lambda));
                }
            }
            best.expect("non-empty grid").1
        };
        let options = LocalizeOptions {
            lambda: Some(lambda),
            ..base.clone()
        };
        let mut test_sorted = test.clone();
        test_sorted.sort_unstable();
        let (report, w) = train_and_score(&annotation, &streams, &train, &test_sorted, &options)?;
        warnings.extend(w);
        folds.push(FoldResult {
            fold: f,
            test_items: test_sorted.iter().map(|&i| streams[i].item_id.clone()).collect(),
            lambda,
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
        });
    }
    warnings.sort();
    warnings.dedup();
    for w in &warnings {
        log::warn!("{w}");
    }

    let count = folds.len() as f64;
    let mean = |get: fn(&FoldResult) -> f64| folds.iter().map(get).sum::<f64>() / count;
    let report = SupervisedReport {
        mean_f1: mean(|r| r.f1),
        min_f1: folds.iter().map(|r| r.f1).fold(f64::INFINITY, f64::min),
        max_f1: folds.iter().map(|r| r.f1).fold(f64::NEG_INFINITY, f64::max),
        warnings,
        folds: folds.clone(),
    };
    let k = annotation.num_gt_steps;
    let row = ResultRow {
        task: config.task.clone(),
        method: Method::Supervised.name().to_string(),
        k,
        seed: config.seed,
        k_pred: k,
        f1: report.mean_f1,
        f1_min: report.min_f1,
        f1_max: report.max_f1,
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
    };
    let out = output_dir(config)?;
    write_json(&out.join("supervised.json"), &report)?;
    write_results(&out.join("results.csv"), std::slice::from_ref(&row))?;
    Ok((report, row))
}

pub fn cmd_stats(annotation: &Path) -> Result<CorpusStats> {
    Ok(corpus_stats(&read_annotation(annotation)?)?)
}

/// Paths written by `cmd_synth`.
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub tokens: PathBuf,
    pub annotation: PathBuf,
    pub script: PathBuf,
    pub features: PathBuf,
}

/// Writes a synthetic corpus: `tokens.json`, `annotation.json`,
/// `script.json` and one feature file per item under `features/`.
pub fn cmd_synth(config: &RunConfig, csv: bool) -> Result<SynthFiles> {
    let synth = stepscript::synthgen::SynthConfig {
        seed: config.seed,
        ..config.synth.clone()
    };
    let corpus = generate(&synth)?;
    let out = output_dir(config)?;
    let files = SynthFiles {
        tokens: out.join("tokens.json"),
        annotation: out.join("annotation.json"),
        script: out.join("script.json"),
        features: out.join("features"),
    };
    write_sequences(&files.tokens, &corpus.sequences)?;
    stepscript::evalkit::write_annotation(&files.annotation, &corpus.annotation)?;
    let script: Vec<String> = corpus.true_script.iter().map(ToString::to_string).collect();
    write_json(&files.script, &script)?;
    fs::create_dir_all(&files.features).map_err(|e| CliError::io(&files.features, e))?;
    for stream in &corpus.streams {
        if csv {
            write_feature_csv(&files.features.join(format!("{}.csv", stream.item_id)), stream)?;
        } else {
            write_feature_binary(&files.features.join(format!("{}.saln", stream.item_id)), stream)?;
        }
    }
    Ok(files)
}
