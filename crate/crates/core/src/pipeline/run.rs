use rayon::prelude::*;

use super::config::{Mode, PipelineConfig};
use super::report::{CalibrationLog, ChainLog, ConfusionRecord, Environment, IqrLog, RunReport, StageLog};
use crate::dataset::{load_ilpd, Dataset};
use crate::dimred::{reduce_chain, FittedChain};
use crate::error::{Result, StageExt};
use crate::eval::{
    brier, calibration_bins, cross_validate, holdout, isotonic_fit, learning_curve, pr_curve, roc_curve,
    stratified_kfold, stratified_split, ConfusionMatrix, CurveKind, CurveSeries, Evaluation, FoldData,
};
use crate::models::{train, ClassifierSpec, TrainedClassifier};
use crate::numerics::{Matrix, SeededRng};
use crate::preprocess::{apply_iqr, concatenate, fit_iqr, generate_synthetic, impute_ag, oversample_to};

// Substreams of the master seed.
const STREAM_OVERSAMPLE: u64 = 1;
const STREAM_SYNTHETIC: u64 = 2;
const STREAM_CHAIN: u64 = 3;
const STREAM_SPLIT: u64 = 4;
const STREAM_KFOLD: u64 = 5;
const STREAM_MODELS: u64 = 6;

/// Something to be written under the output directory.
#[derive(Debug, Clone)]
pub enum Artifact {
    Curve(CurveSeries),
    Table { header: Vec<String>, rows: Matrix },
    Json(String),
}

/// Everything a run produced, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// `(relative path, content)`, in emission order.
    pub artifacts: Vec<(String, Artifact)>,
}

/// A chain fitted on one set of training rows, plus the evaluated matrices.
struct Partition {
    data: FoldData,
    chain: FittedChain,
    iqr: IqrLog,
}

pub(crate) fn file_stem(model: &str) -> String {
    model.to_ascii_lowercase()
}

fn per_class_target(d: &Dataset, paper_total: bool) -> usize {
    let (zeros, ones) = crate::dataset::class_counts(d);
    let majority = zeros.max(ones);
    if paper_total {
        2 * majority
    } else {
        majority
    }
}

fn chain_log(partition: &str, chain: &FittedChain, placed_rows: usize) -> ChainLog {
    ChainLog {
        partition: partition.to_string(),
        train_rows: chain.output().rows(),
        placed_rows,
        widths: chain.stage_widths().into_iter().map(|(n, w)| (n.to_string(), w)).collect(),
        kl_initial: chain.kl_trace.first().map_or(f64::NAN, |k| k.1),
        kl_final: chain.kl_trace.last().map_or(f64::NAN, |k| k.1),
    }
}

fn iqr_log(partition: &str, names: &[String], counts: &[usize]) -> IqrLog {
    IqrLog {
        partition: partition.to_string(),
        replaced: names.iter().cloned().zip(counts.iter().copied()).collect(),
    }
}

/// Loads, imputes and (faithful mode) fully preprocesses and reduces the
/// data, or (sound mode) fits every transform inside each partition, then
/// evaluates all classifiers. Nothing is written to disk.
pub fn execute(cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let master = SeededRng::new(cfg.seed);
    let mut stages = Vec::new();

    let (raw, missing) = load_ilpd(&cfg.data_path).stage("load")?;
    stages.push(StageLog::of("load", &raw));
    log::info!(
        "loaded {} rows from {} ({} missing cells)",
        raw.n_rows(),
        cfg.data_path.display(),
        missing.total_missing()
    );
    let imputed = impute_ag(&raw, cfg.impute).stage("impute")?;
    stages.push(StageLog::of("impute", &imputed));

    let synthetic = generate_synthetic(&cfg.synthetic, &mut master.derive_substream(STREAM_SYNTHETIC))
        .stage("simulate")?;
    stages.push(StageLog::of("simulate", &synthetic));

    let Prepared {
        split,
        folds,
        iqr,
        chains,
        shown,
    } = match cfg.mode {
        Mode::Faithful => faithful(cfg, &master, &imputed, &synthetic, &mut stages)?,
        Mode::Sound => sound(cfg, &master, &imputed, &synthetic, &mut stages)?,
    };
    let test_rows = split.val_y.len();

    let mut report = RunReport {
        mode: cfg.mode,
        config: cfg.clone(),
        stages,
        test_rows,
        iqr,
        chains,
        metrics: Vec::new(),
        confusion: Vec::new(),
        learning_curves: Vec::new(),
        calibration: Vec::new(),
        manifest: Vec::new(),
        environment: Environment::current(),
        notes: notes(cfg, imputed.n_features()),
    };
    let mut artifacts = Vec::new();
    if cfg.output.stages {
        for (name, m) in shown.stage_matrices() {
            let header = (0..m.cols()).map(|j| format!("{name}_{j}")).collect();
            artifacts.push((format!("stage_{name}.csv"), Artifact::Table { header, rows: m.clone() }));
        }
    }

    let models = master.derive_substream(STREAM_MODELS);
    for (c, spec) in cfg.classifiers.iter().enumerate() {
        let rng = models.derive_substream(c as u64);
        evaluate_model(cfg, spec, &split, &folds, &rng, &mut report, &mut artifacts)
            .stage(&format!("evaluate {}", spec.label()))?;
    }
    Ok(RunOutput { report, artifacts })
}

fn notes(cfg: &PipelineConfig, ilpd_width: usize) -> Vec<String> {
    let mut notes = vec![
        format!(
            "synthetic cohort has {} features ({} informative, {} redundant, {} repeated) to match the {ilpd_width} ILPD features",
            cfg.synthetic.n_features(),
            cfg.synthetic.n_informative,
            cfg.synthetic.n_redundant,
            cfg.synthetic.n_repeated
        ),
        "predicted label is 1 (disease) when P(disease) >= 0.5; exact ties go to the positive class".into(),
        "cv metrics are means over folds; cv confusion counts and cv/ curves pool the out-of-fold predictions".into(),
        "isotonic calibration is fitted and scored on the hold-out predictions themselves".into(),
    ];
    match cfg.mode {
        Mode::Faithful => notes.push(
            "faithful mode: oversampling, outlier bounds and the reduction chain see every row before splitting".into(),
        ),
        Mode::Sound => notes.push(format!(
            "sound mode: A/G imputation uses all rows; oversampling, outlier bounds and the chain are fitted per partition and held-out rows are placed at the mean of their {} nearest training embeddings",
            crate::dimred::PLACEMENT_NEIGHBORS
        )),
    }
    notes
}

struct Prepared {
    split: FoldData,
    folds: Vec<FoldData>,
    iqr: Vec<IqrLog>,
    chains: Vec<ChainLog>,
    /// Chain whose stage matrices are written out (the hold-out training
    /// chain in sound mode).
    shown: FittedChain,
}

fn faithful(
    cfg: &PipelineConfig,
    master: &SeededRng,
    imputed: &Dataset,
    synthetic: &Dataset,
    stages: &mut Vec<StageLog>,
) -> Result<Prepared> {
    let per_class = per_class_target(imputed, cfg.paper_total);
    let balanced = oversample_to(imputed, per_class, &mut master.derive_substream(STREAM_OVERSAMPLE))
        .stage("oversample")?;
    stages.push(StageLog::of("oversample", &balanced));
    let combined = concatenate(&balanced, synthetic).stage("concatenate")?;
    stages.push(StageLog::of("concatenate", &combined));
    let bounds = fit_iqr(&combined, cfg.iqr_k).stage("iqr")?;
    let (cleaned, counts) = apply_iqr(&combined, &bounds).stage("iqr")?;
    stages.push(StageLog::of("iqr", &cleaned));
    let iqr = vec![iqr_log("all", &cleaned.feature_names, &counts)];

    let chain = reduce_chain(&cleaned.features, &cleaned.labels, &cfg.chain(), &master.derive_substream(STREAM_CHAIN))
        .stage("reduce")?;
    let x = chain.output();
    let y = &cleaned.labels;
    stages.push(StageLog {
        stage: "reduce".into(),
        rows: x.rows(),
        cols: x.cols(),
        class_counts: stages.last().map_or([0, 0], |s| s.class_counts),
    });
    let chains = vec![chain_log("all", &chain, 0)];

    let (train, test) =
        stratified_split(y, cfg.eval.test_fraction, &mut master.derive_substream(STREAM_SPLIT)).stage("split")?;
    let split = FoldData::from_indices(x, y, &train, &test);
    let folds = stratified_kfold(y, cfg.eval.folds, &mut master.derive_substream(STREAM_KFOLD))
        .stage("kfold")?
        .iter()
        .map(|f| FoldData::from_indices(x, y, &f.train, &f.validation))
        .collect();
    Ok(Prepared {
        split,
        folds,
        iqr,
        chains,
        shown: chain,
    })
}

/// Fits oversampling, IQR bounds and the reduction chain on `train` rows of
/// `combined` only, then places `test` rows into the fitted embedding.
/// Rows flagged in `is_ilpd` are the only ones eligible for oversampling.
#[allow(clippy::too_many_arguments)]
fn fit_partition(
    name: &str,
    cfg: &PipelineConfig,
    combined: &Dataset,
    is_ilpd: &[bool],
    train: &[usize],
    test: &[usize],
    oversample_rng: &mut SeededRng,
    chain_rng: &SeededRng,
) -> Result<Partition> {
    let (ilpd_rows, synth_rows): (Vec<usize>, Vec<usize>) = train.iter().partition(|&&i| is_ilpd[i]);
    let ilpd = combined.select_rows(&ilpd_rows);
    let per_class = per_class_target(&ilpd, cfg.paper_total);
    let balanced = oversample_to(&ilpd, per_class, oversample_rng).stage("oversample")?;
    let train_set = concatenate(&balanced, &combined.select_rows(&synth_rows)).stage("concatenate")?;
    let test_set = combined.select_rows(test);

    let bounds = fit_iqr(&train_set, cfg.iqr_k).stage("iqr")?;
    let (train_set, counts) = apply_iqr(&train_set, &bounds).stage("iqr")?;
    let (test_set, _) = apply_iqr(&test_set, &bounds).stage("iqr")?;

    let chain = reduce_chain(&train_set.features, &train_set.labels, &cfg.chain(), chain_rng).stage("reduce")?;
    let val_x = chain.embed_new(&test_set.features).stage("reduce")?;
    Ok(Partition {
        data: FoldData {
            validation_index: test.to_vec(),
            train_x: chain.output().clone(),
            train_y: train_set.labels.clone(),
            val_x,
            val_y: test_set.labels.clone(),
        },
        iqr: iqr_log(name, &train_set.feature_names, &counts),
        chain,
    })
}

fn sound(
    cfg: &PipelineConfig,
    master: &SeededRng,
    imputed: &Dataset,
    synthetic: &Dataset,
    stages: &mut Vec<StageLog>,
) -> Result<Prepared> {
    let combined = concatenate(imputed, synthetic).stage("concatenate")?;
    stages.push(StageLog::of("concatenate", &combined));
    let is_ilpd: Vec<bool> = (0..combined.n_rows()).map(|i| i < imputed.n_rows()).collect();
    let y = &combined.labels;

    let (train, test) =
        stratified_split(y, cfg.eval.test_fraction, &mut master.derive_substream(STREAM_SPLIT)).stage("split")?;
    let folds = stratified_kfold(y, cfg.eval.folds, &mut master.derive_substream(STREAM_KFOLD)).stage("kfold")?;

    let oversample = master.derive_substream(STREAM_OVERSAMPLE);
    let chain_base = master.derive_substream(STREAM_CHAIN);
    let mut jobs: Vec<(String, Vec<usize>, Vec<usize>)> = vec![("split".into(), train, test)];
    jobs.extend(
        folds
            .into_iter()
            .enumerate()
            .map(|(f, fold)| (format!("fold_{f}"), fold.train, fold.validation)),
    );
    let parts: Vec<Partition> = jobs
        .par_iter()
        .enumerate()
        .map(|(p, (name, train, test))| {
            fit_partition(
                name,
                cfg,
                &combined,
                &is_ilpd,
                train,
                test,
                &mut oversample.derive_substream(p as u64),
                &chain_base.derive_substream(p as u64),
            )
            .stage(name)
        })
        .collect::<Result<_>>()?;

    let iqr = parts.iter().map(|p| p.iqr.clone()).collect();
    let chains = parts
        .iter()
        .map(|p| chain_log(&p.iqr.partition, &p.chain, p.data.val_y.len()))
        .collect();
    let mut parts = parts.into_iter();
    let first = parts.next().expect("split partition");
    let folds = parts.map(|p| p.data).collect();
    Ok(Prepared {
        split: first.data,
        folds,
        iqr,
        chains,
        shown: first.chain,
    })
}

fn pooled(folds: &[Evaluation]) -> ConfusionMatrix {
    folds.iter().fold(ConfusionMatrix::default(), |acc, e| ConfusionMatrix {
        tp: acc.tp + e.confusion.tp,
        fp: acc.fp + e.confusion.fp,
        tn: acc.tn + e.confusion.tn,
        fn_: acc.fn_ + e.confusion.fn_,
    })
}

fn curve_set(y: &[u8], scores: &[f64], bins: usize, model: &str) -> Result<Vec<CurveSeries>> {
    Ok(vec![
        roc_curve(y, scores)?.with_model(model),
        pr_curve(y, scores)?.with_model(model),
        calibration_bins(y, scores, bins)?.with_model(model),
    ])
}

fn evaluate_model(
    cfg: &PipelineConfig,
    spec: &ClassifierSpec,
    split: &FoldData,
    folds: &[FoldData],
    rng: &SeededRng,
    report: &mut RunReport,
    artifacts: &mut Vec<(String, Artifact)>,
) -> Result<()> {
    let label = spec.label();
    let stem = file_stem(label);
    let cv_rng = rng.derive_substream(0);
    let split_rng = rng.derive_substream(1);

    let cv = cross_validate(spec, folds, &cv_rng)?;
    let hold = holdout(spec, split, &split_rng)?;
    log::info!(
        "{label}: cv accuracy {:.4}, split accuracy {:.4}, split auc {:.4}",
        cv.row.accuracy,
        hold.row.accuracy,
        hold.row.auc
    );
    let lc = learning_curve(spec, folds, &cfg.eval.learning_fractions, &cv_rng)?;

    let bins = cfg.eval.calibration_bins;
    for series in curve_set(&hold.labels, &hold.scores, bins, label)? {
        artifacts.push((format!("{}_{stem}.csv", series.kind.as_str()), Artifact::Curve(series)));
    }
    for series in curve_set(&cv.oof_labels, &cv.oof_scores, bins, label)? {
        artifacts.push((format!("cv/{}_{stem}.csv", series.kind.as_str()), Artifact::Curve(series)));
    }
    artifacts.push((format!("learning_{stem}.csv"), Artifact::Curve(lc.validation_series())));
    artifacts.push((format!("learning_train_{stem}.csv"), Artifact::Curve(lc.train_series())));

    let outcomes: Vec<f64> = hold.labels.iter().map(|&l| f64::from(l)).collect();
    let iso = isotonic_fit(&hold.scores, &outcomes)?;
    let recalibrated = iso.predict_all(&hold.scores);
    report.calibration.push(CalibrationLog {
        model: label.to_string(),
        brier_raw: hold.row.brier,
        brier_isotonic: brier(&hold.labels, &recalibrated)?,
        isotonic_levels: iso.levels.len(),
    });
    let iso_points = iso.knots.iter().copied().zip(iso.levels.iter().copied()).collect();
    artifacts.push((
        format!("isotonic_{stem}.csv"),
        Artifact::Curve(CurveSeries::new(CurveKind::Calibration, iso_points).with_model(label)),
    ));

    if cfg.output.models {
        let model: TrainedClassifier = train(spec, &split.train_x, &split.train_y, &split_rng)?;
        artifacts.push((format!("models/{stem}.json"), Artifact::Json(model.to_json()?)));
    }

    report.confusion.push(ConfusionRecord {
        model: label.to_string(),
        protocol: "split".into(),
        matrix: hold.confusion,
    });
    report.confusion.push(ConfusionRecord {
        model: label.to_string(),
        protocol: "cv".into(),
        matrix: pooled(&cv.folds),
    });
    report.metrics.push(cv.row);
    report.metrics.push(hold.row);
    report.learning_curves.push(lc);
    Ok(())
}
