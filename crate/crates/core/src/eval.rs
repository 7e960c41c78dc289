//! Bi-class and multi-class metrics, the θ × fold experiment harness and an
//! explicit-features-only softmax-regression baseline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{build_vocab, explicit_features, TokenizerConfig, Vocab};
use crate::graph::{split_folds, CredLabel, Hsn, NodeType};
use crate::numgrad::{Tape, Tensor};
use crate::train::{argmax, fit, prepare_inputs, Mode, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn of(label: CredLabel) -> Self {
        match label {
            CredLabel::True | CredLabel::MostlyTrue | CredLabel::HalfTrue => Polarity::Positive,
            CredLabel::MostlyFalse | CredLabel::False | CredLabel::PantsOnFire => Polarity::Negative,
        }
    }
}

pub fn to_polarity(label: CredLabel) -> Polarity {
    Polarity::of(label)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Bi mode scores class 0 as the positive class. Multi mode macro-averages
/// over all six classes; a class that never occurs contributes 0 to each
/// average, and macro-F1 is the mean of per-class F1.
pub fn metrics(preds: &BTreeMap<String, usize>, truth: &BTreeMap<String, usize>, mode: Mode) -> Result<Metrics> {
    if preds.len() != truth.len() || preds.keys().zip(truth.keys()).any(|(a, b)| a != b) {
        let missing: Vec<&String> = truth.keys().filter(|k| !preds.contains_key(*k)).collect();
        let extra: Vec<&String> = preds.keys().filter(|k| !truth.contains_key(*k)).collect();
        return Err(Error::usage(format!(
            "prediction keys differ from truth keys (missing {missing:?}, extra {extra:?})"
        )));
    }
    let classes = mode.classes();
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (k, &t) in truth {
        let p = preds[k];
        if t >= classes || p >= classes {
            return Err(Error::usage(format!("class index out of range for {mode} mode at {k}")));
        }
        confusion[t][p] += 1;
    }
    let n = truth.len();
    let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
    let accuracy = ratio(correct, n);
    let per_class = |c: usize| {
        let tp = confusion[c][c];
        let predicted: usize = (0..classes).map(|t| confusion[t][c]).sum();
        let actual: usize = confusion[c].iter().sum();
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        (p, r, f1_of(p, r))
    };
    Ok(match mode {
        Mode::Bi => {
            let (precision, recall, f1) = per_class(0);
            Metrics {
                accuracy,
                precision,
                recall,
                f1,
            }
        }
        Mode::Multi => {
            let k = classes as f64;
            let all: Vec<(f64, f64, f64)> = (0..classes).map(per_class).collect();
            Metrics {
                accuracy,
                precision: all.iter().map(|c| c.0).sum::<f64>() / k,
                recall: all.iter().map(|c| c.1).sum::<f64>() / k,
                f1: all.iter().map(|c| c.2).sum::<f64>() / k,
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub mode: Mode,
    pub node_type: NodeType,
    pub theta: f64,
    pub fold: usize,
    pub metrics: Metrics,
}

/// Fold means per `(mode, node type, θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub mode: Mode,
    pub node_type: NodeType,
    pub theta: f64,
    pub folds: usize,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<MetricRecord>,
}

impl ExperimentReport {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut groups: Vec<((Mode, NodeType, f64), Vec<Metrics>)> = Vec::new();
        for r in &self.records {
            let key = (r.mode, r.node_type, r.theta);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(r.metrics),
                None => groups.push((key, vec![r.metrics])),
            }
        }
        groups.sort_by(|a, b| {
            (a.0 .0, a.0 .1 as u8)
                .cmp(&(b.0 .0, b.0 .1 as u8))
                .then(a.0 .2.total_cmp(&b.0 .2))
        });
        groups
            .into_iter()
            .map(|((mode, node_type, theta), ms)| {
                let n = ms.len() as f64;
                let mean = |f: fn(&Metrics) -> f64| ms.iter().map(f).sum::<f64>() / n;
                SummaryRow {
                    mode,
                    node_type,
                    theta,
                    folds: ms.len(),
                    metrics: Metrics {
                        accuracy: mean(|m| m.accuracy),
                        precision: mean(|m| m.precision),
                        recall: mean(|m| m.recall),
                        f1: mean(|m| m.f1),
                    },
                }
            })
            .collect()
    }

    pub fn records_csv(&self) -> String {
        let mut out = String::from("mode,node_type,theta,fold,accuracy,precision,recall,f1\n");
        for r in &self.records {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.mode, r.node_type, r.theta, r.fold, m.accuracy, m.precision, m.recall, m.f1
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("mode,node_type,theta,folds,accuracy,precision,recall,f1\n");
        for r in self.summary() {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.mode, r.node_type, r.theta, r.folds, m.accuracy, m.precision, m.recall, m.f1
            );
        }
        out
    }

    /// Writes `records.csv` and `summary.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("records.csv"), self.records_csv())?;
        fs::write(dir.join("summary.csv"), self.summary_csv())?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub modes: Vec<Mode>,
    /// Worker threads for `(θ, fold)` cells; `1` runs serially.
    pub parallel: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train: TrainConfig::default(),
            modes: Mode::ALL.to_vec(),
            parallel: 1,
        }
    }
}

/// `{0.1, 0.2, …, 1.0}`.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Ground truth of the test nodes of one category, keyed by id.
fn truth_of(hsn: &Hsn, kind: NodeType, nodes: &[usize], mode: Mode) -> Result<BTreeMap<String, usize>> {
    nodes
        .iter()
        .map(|&i| {
            let label = hsn
                .label(kind, i)
                .ok_or_else(|| Error::usage(format!("{kind} {} has no label", hsn.id(kind, i))))?;
            Ok((hsn.id(kind, i).to_owned(), mode.class_of(label)))
        })
        .collect()
}

fn run_cell(hsn: &Hsn, theta: f64, fold_index: usize, k: usize, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<MetricRecord>> {
    let split = split_folds(hsn, k, theta, seed)?;
    let fold = &split.folds[fold_index];
    let tok = &cfg.train.tokenizer;
    let vocab = build_vocab(hsn, &fold.sampled, cfg.train.dims.d, tok)?;
    let inputs = prepare_inputs(hsn, &vocab, cfg.train.dims.q, tok);
    let mut records = Vec::new();
    for &mode in &cfg.modes {
        let train = TrainConfig {
            mode,
            seed,
            fold: fold_index,
            theta,
            ..cfg.train.clone()
        };
        let fitted = fit(hsn, &vocab, &fold.sampled, &train)?;
        let preds = fitted.params.predict_all(hsn, &inputs)?;
        for kind in NodeType::ALL {
            let test = fold.test.get(kind);
            let truth = truth_of(hsn, kind, test, mode)?;
            let predicted: BTreeMap<String, usize> = test
                .iter()
                .map(|&i| (hsn.id(kind, i).to_owned(), preds.class(kind, i, mode)))
                .collect();
            records.push(MetricRecord {
                mode,
                node_type: kind,
                theta,
                fold: fold_index,
                metrics: metrics(&predicted, &truth, mode)?,
            });
        }
    }
    Ok(records)
}

/// For each θ and fold: rebuild the vocabulary from the fold's sampled
/// training nodes, fit one model per requested mode, and score the held-out
/// nodes of every category.
///
/// `hsn` must carry creator and subject labels. Records are ordered by θ,
/// fold, mode and node type regardless of `parallel`.
pub fn run_experiment(hsn: &Hsn, theta_grid: &[f64], k: usize, cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentReport> {
    if theta_grid.is_empty() {
        return Err(Error::usage("theta grid is empty"));
    }
    if cfg.modes.is_empty() {
        return Err(Error::usage("no evaluation modes requested"));
    }
    if !hsn.is_fully_labeled() {
        return Err(Error::usage("creator and subject labels must be derived before evaluation"));
    }
    // validate the grid and k up front so a bad cell fails before any fit
    for &theta in theta_grid {
        split_folds(hsn, k, theta, seed)?;
    }
    let cells: Vec<(f64, usize)> = theta_grid
        .iter()
        .flat_map(|&t| (0..k).map(move |f| (t, f)))
        .collect();
    let run = |&(theta, fold): &(f64, usize)| {
        run_cell(hsn, theta, fold, k, cfg, seed)
            .map_err(|e| e.context(&format!("theta={theta} fold={fold}")))
    };
    let results: Vec<Result<Vec<MetricRecord>>> = if cfg.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .map_err(|e| Error::usage(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run).collect())
    } else {
        cells.iter().map(run).collect()
    };
    let mut records = Vec::with_capacity(cells.len() * 3 * cfg.modes.len());
    for r in results {
        records.extend(r?);
    }
    Ok(ExperimentReport { records })
}

/// Softmax regression `softmax(W x + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub w: Tensor,
    pub b: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct LinearConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub alpha: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            epochs: 300,
            learning_rate: 0.5,
            momentum: 0.9,
            alpha: 1e-4,
        }
    }
}

impl LinearModel {
    /// Full-batch gradient descent from zero weights on the mean
    /// cross-entropy plus `alpha · ‖W‖²`.
    pub fn fit(xs: &[Tensor], ys: &[usize], classes: usize, cfg: &LinearConfig) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::usage("linear baseline needs matching, non-empty inputs and labels"));
        }
        let dim = xs[0].len();
        let mut model = LinearModel {
            w: Tensor::zeros(&[classes, dim]),
            b: Tensor::zeros(&[classes]),
        };
        let mut vel_w = vec![0.0; classes * dim];
        let mut vel_b = vec![0.0; classes];
        let scale = 1.0 / xs.len() as f64;
        for _ in 0..cfg.epochs {
            let mut tape = Tape::new();
            let w = tape.param(model.w.clone());
            let b = tape.param(model.b.clone());
            let mut terms = Vec::with_capacity(xs.len());
            for (x, &y) in xs.iter().zip(ys) {
                let xv = tape.constant(x.clone());
                let logits = tape.affine(w, xv, b)?;
                let p = tape.softmax(logits)?;
                let mut truth = vec![0.0; classes];
                truth[y] = 1.0;
                terms.push(tape.cross_entropy(p, &truth)?);
            }
            let data = tape.sum(&terms)?;
            let data = tape.scale(data, scale);
            let reg = tape.sum_squares(w);
            let reg = tape.scale(reg, cfg.alpha);
            let l = tape.add(data, reg)?;
            let grads = tape.backward(l)?;
            for (param, var, vel) in [(&mut model.w, w, &mut vel_w), (&mut model.b, b, &mut vel_b)] {
                for ((p, g), v) in param.data_mut().iter_mut().zip(grads.wrt(var).data()).zip(vel.iter_mut()) {
                    *v = cfg.momentum * *v + g;
                    *p -= cfg.learning_rate * *v;
                }
            }
        }
        Ok(model)
    }

    pub fn predict(&self, x: &Tensor) -> usize {
        let cols = self.w.cols();
        let logits: Vec<f64> = self
            .w
            .data()
            .chunks_exact(cols)
            .zip(self.b.data())
            .map(|(row, b)| row.iter().zip(x.data()).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect();
        argmax(&logits)
    }
}

/// Trains the explicit-features-only baseline for one node category on
/// `train` and returns its predicted class for every node of that category.
pub fn explicit_baseline(
    hsn: &Hsn,
    vocab: &Vocab,
    kind: NodeType,
    train: &[usize],
    mode: Mode,
    tokenizer: &TokenizerConfig,
    cfg: &LinearConfig,
) -> Result<Vec<usize>> {
    let feats: Vec<Tensor> = (0..hsn.count(kind))
        .map(|i| explicit_features(hsn.text(kind, i), vocab.wordset(kind), tokenizer))
        .collect();
    let xs: Vec<Tensor> = train.iter().map(|&i| feats[i].clone()).collect();
    let ys: Vec<usize> = train
        .iter()
        .map(|&i| {
            hsn.label(kind, i)
                .map(|l| mode.class_of(l))
                .ok_or_else(|| Error::usage(format!("{kind} {} has no label", hsn.id(kind, i))))
        })
        .collect::<Result<_>>()?;
    let model = LinearModel::fit(&xs, &ys, mode.classes(), cfg)?;
    Ok(feats.iter().map(|x| model.predict(x)).collect())
}
