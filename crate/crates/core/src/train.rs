//! Output heads, the joint objective and the full-batch training loop.
//!
//! Every node category gets its own HFLU, GDU and softmax head. One epoch
//! rebuilds the whole graph on a fresh tape: latent text features, `K`
//! diffusion rounds, heads, loss, one backward sweep and one parameter step.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Polarity;
use crate::features::{hflu_prepared, HfluParams, HfluVars, NodeText, TokenizerConfig, Vocab};
use crate::gdu::{
    diffuse, isolated, read_checkpoint, write_checkpoint, CheckpointHeader, DiffusionState, GduParams,
    GduSet, GduVars, NodeVars,
};
use crate::graph::{CredLabel, Hsn, NodeSets, NodeType};
use crate::numgrad::{Tape, Tensor, Var};
use crate::params::Parameters;
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bi,
    Multi,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Bi, Mode::Multi];

    pub fn classes(self) -> usize {
        match self {
            Mode::Bi => 2,
            Mode::Multi => 6,
        }
    }

    /// Positive is class 0 in bi mode; multi mode uses
    /// [`CredLabel::class_index`].
    pub fn class_of(self, label: CredLabel) -> usize {
        match self {
            Mode::Bi => match Polarity::of(label) {
                Polarity::Positive => 0,
                Polarity::Negative => 1,
            },
            Mode::Multi => label.class_index(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bi => "bi",
            Mode::Multi => "multi",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bi" => Ok(Mode::Bi),
            "multi" => Ok(Mode::Multi),
            other => Err(format!("unknown mode {other:?} (expected bi or multi)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelDims {
    /// Explicit word-set size per category.
    pub d: usize,
    pub embed: usize,
    pub hidden: usize,
    pub latent: usize,
    pub state: usize,
    /// Token sequence length.
    pub q: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            d: 200,
            embed: 64,
            hidden: 64,
            latent: 64,
            state: 64,
            q: 48,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryParams {
    pub hflu: HfluParams,
    pub gdu: GduParams,
    pub head_w: Tensor,
    pub head_b: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct CategoryVars {
    pub hflu: HfluVars,
    pub gdu: GduVars,
    pub head_w: Var,
    pub head_b: Var,
}

impl CategoryParams {
    fn init(dims: &ModelDims, vocab_rows: usize, classes: usize, rng: &mut impl rand::Rng) -> Self {
        CategoryParams {
            hflu: HfluParams::init(vocab_rows, dims.embed, dims.hidden, dims.latent, rng),
            gdu: GduParams::init(dims.d + dims.latent, dims.state, rng),
            head_w: Tensor::glorot(classes, dims.state, rng),
            head_b: Tensor::zeros(&[classes]),
        }
    }
}

impl Parameters for CategoryParams {
    type Bound = CategoryVars;

    fn tensors(&self) -> Vec<&Tensor> {
        let mut v = self.hflu.tensors();
        v.extend(self.gdu.tensors());
        v.push(&self.head_w);
        v.push(&self.head_b);
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = self.hflu.tensors_mut();
        v.extend(self.gdu.tensors_mut());
        v.push(&mut self.head_w);
        v.push(&mut self.head_b);
        v
    }

    fn bind_from(vars: &mut dyn Iterator<Item = Var>) -> CategoryVars {
        let hflu = HfluParams::bind_from(vars);
        let gdu = GduParams::bind_from(vars);
        CategoryVars {
            hflu,
            gdu,
            head_w: vars.next().expect("too few vars for head"),
            head_b: vars.next().expect("too few vars for head"),
        }
    }
}

/// All trainable tensors plus the shape metadata stored in checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub rounds: usize,
    pub classes: usize,
    pub vocab_rows: usize,
    pub seed: u64,
    pub articles: CategoryParams,
    pub creators: CategoryParams,
    pub subjects: CategoryParams,
}

#[derive(Clone, Debug)]
pub struct ModelVars {
    pub articles: CategoryVars,
    pub creators: CategoryVars,
    pub subjects: CategoryVars,
    /// Every leaf, in [`Parameters::tensors`] order.
    pub leaves: Vec<Var>,
}

impl ModelVars {
    pub fn category(&self, kind: NodeType) -> &CategoryVars {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    fn units(&self) -> GduSet {
        GduSet {
            articles: self.articles.gdu,
            creators: self.creators.gdu,
            subjects: self.subjects.gdu,
        }
    }
}

impl ModelParams {
    pub fn init(dims: ModelDims, vocab_rows: usize, classes: usize, rounds: usize, seed: u64) -> Self {
        let mut rng = stream(seed, "init");
        let articles = CategoryParams::init(&dims, vocab_rows, classes, &mut rng);
        let creators = CategoryParams::init(&dims, vocab_rows, classes, &mut rng);
        let subjects = CategoryParams::init(&dims, vocab_rows, classes, &mut rng);
        ModelParams {
            dims,
            rounds,
            classes,
            vocab_rows,
            seed,
            articles,
            creators,
            subjects,
        }
    }

    pub fn category(&self, kind: NodeType) -> &CategoryParams {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut v = self.articles.tensors();
        v.extend(self.creators.tensors());
        v.extend(self.subjects.tensors());
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = self.articles.tensors_mut();
        v.extend(self.creators.tensors_mut());
        v.extend(self.subjects.tensors_mut());
        v
    }

    pub fn bind(&self, tape: &mut Tape) -> ModelVars {
        let leaves: Vec<Var> = self.tensors().into_iter().map(|t| tape.param(t.clone())).collect();
        Self::bind_leaves(leaves)
    }

    /// Rebuilds handles from leaves that already live on a tape, e.g. those
    /// handed out by [`crate::numgrad::finite_diff_check`].
    pub fn bind_leaves(leaves: Vec<Var>) -> ModelVars {
        let mut it = leaves.clone().into_iter();
        let articles = CategoryParams::bind_from(&mut it);
        let creators = CategoryParams::bind_from(&mut it);
        let subjects = CategoryParams::bind_from(&mut it);
        ModelVars {
            articles,
            creators,
            subjects,
            leaves,
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.tensors().iter().map(|t| t.norm()).collect()
    }

    fn header(&self) -> CheckpointHeader {
        let d = &self.dims;
        CheckpointHeader {
            d: d.d as u64,
            embed: d.embed as u64,
            hidden: d.hidden as u64,
            latent: d.latent as u64,
            state: d.state as u64,
            q: d.q as u64,
            rounds: self.rounds as u64,
            classes: self.classes as u64,
            vocab_rows: self.vocab_rows as u64,
            seed: self.seed,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_checkpoint(path, &self.header(), &self.tensors())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (h, values) = read_checkpoint(path)?;
        let usize_of = |v: u64| usize::try_from(v).map_err(|_| Error::Checkpoint(format!("header value {v} too large")));
        let dims = ModelDims {
            d: usize_of(h.d)?,
            embed: usize_of(h.embed)?,
            hidden: usize_of(h.hidden)?,
            latent: usize_of(h.latent)?,
            state: usize_of(h.state)?,
            q: usize_of(h.q)?,
        };
        let mut params = ModelParams::init(
            dims,
            usize_of(h.vocab_rows)?,
            usize_of(h.classes)?,
            usize_of(h.rounds)?,
            h.seed,
        );
        let expected: usize = params.tensors().iter().map(|t| t.len()).sum();
        if expected != values.len() {
            return Err(Error::Checkpoint(format!(
                "header implies {expected} values, file holds {}",
                values.len()
            )));
        }
        let mut rest = values.as_slice();
        for t in params.tensors_mut() {
            let (head, tail) = rest.split_at(t.len());
            t.data_mut().copy_from_slice(head);
            rest = tail;
        }
        Ok(params)
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub dims: ModelDims,
    /// Diffusion rounds; `0` is the isolated ablation with both ports zero.
    pub rounds: usize,
    pub alpha: f64,
    pub learning_rate: f64,
    /// `0` for plain gradient descent.
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Train the 6-way head even in bi mode; bi predictions then group the
    /// 6-way argmax by polarity.
    pub bi_from_multi: bool,
    pub tokenizer: TokenizerConfig,
    pub fold: usize,
    pub theta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dims: ModelDims::default(),
            rounds: 2,
            alpha: 1e-4,
            learning_rate: 0.05,
            momentum: 0.0,
            epochs: 200,
            seed: 0,
            mode: Mode::Bi,
            bi_from_multi: false,
            tokenizer: TokenizerConfig::default(),
            fold: 0,
            theta: 1.0,
        }
    }
}

impl TrainConfig {
    /// Label space the heads are trained on.
    pub fn head_mode(&self) -> Mode {
        if self.bi_from_multi {
            Mode::Multi
        } else {
            self.mode
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::usage("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::usage(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::usage(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::usage(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        let d = &self.dims;
        if [d.d, d.embed, d.hidden, d.latent, d.state, d.q].contains(&0) {
            return Err(Error::usage("all model dimensions must be positive"));
        }
        Ok(())
    }
}

/// Label-free per-node inputs, computed once per fit.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub articles: Vec<NodeText>,
    pub creators: Vec<NodeText>,
    pub subjects: Vec<NodeText>,
}

impl Inputs {
    pub fn get(&self, kind: NodeType) -> &[NodeText] {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }
}

pub fn prepare_inputs(hsn: &Hsn, vocab: &Vocab, q: usize, tokenizer: &TokenizerConfig) -> Inputs {
    let texts = |kind: NodeType| -> Vec<NodeText> {
        (0..hsn.count(kind))
            .map(|i| NodeText::new(hsn.text(kind, i), kind, vocab, q, tokenizer))
            .collect()
    };
    Inputs {
        articles: texts(NodeType::Article),
        creators: texts(NodeType::Creator),
        subjects: texts(NodeType::Subject),
    }
}

#[derive(Clone, Debug)]
pub struct Forward {
    pub features: NodeVars,
    pub states: DiffusionState,
    pub probs: NodeVars,
}

/// Features, diffusion and heads for every node. `rounds == 0` runs the
/// isolated ablation.
pub fn forward(tape: &mut Tape, hsn: &Hsn, inputs: &Inputs, vars: &ModelVars, rounds: usize) -> Result<Forward> {
    let mut features = NodeVars::default();
    for kind in NodeType::ALL {
        let p = &vars.category(kind).hflu;
        let out: Vec<Var> = inputs
            .get(kind)
            .iter()
            .map(|input| hflu_prepared(tape, input, p).map(|f| f.combined))
            .collect::<Result<_>>()?;
        match kind {
            NodeType::Article => features.articles = out,
            NodeType::Creator => features.creators = out,
            NodeType::Subject => features.subjects = out,
        }
    }
    let states = if rounds == 0 {
        isolated(tape, &features, &vars.units())?
    } else {
        diffuse(tape, hsn, &features, &vars.units(), rounds)?
    };
    let probs = predict(tape, &states, vars)?;
    Ok(Forward {
        features,
        states,
        probs,
    })
}

/// `softmax(W_cat h + b_cat)` for every node.
pub fn predict(tape: &mut Tape, states: &DiffusionState, vars: &ModelVars) -> Result<NodeVars> {
    let mut out = NodeVars::default();
    for kind in NodeType::ALL {
        let c = vars.category(kind);
        let probs: Vec<Var> = states
            .states
            .get(kind)
            .iter()
            .map(|&h| {
                let logits = tape.affine(c.head_w, h, c.head_b)?;
                tape.softmax(logits)
            })
            .collect::<Result<_>>()?;
        match kind {
            NodeType::Article => out.articles = probs,
            NodeType::Creator => out.creators = probs,
            NodeType::Subject => out.subjects = probs,
        }
    }
    Ok(out)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Sum of cross-entropies over the sampled training nodes of every category
/// plus `alpha` times the squared entries of every weight matrix.
///
/// Only labels of nodes in `sampled` are read.
pub fn loss(
    tape: &mut Tape,
    probs: &NodeVars,
    hsn: &Hsn,
    sampled: &NodeSets,
    vars: &ModelVars,
    alpha: f64,
    mode: Mode,
) -> Result<Var> {
    let classes = mode.classes();
    let mut terms = Vec::new();
    for kind in NodeType::ALL {
        for &i in sampled.get(kind) {
            let &pred = probs.get(kind).get(i).ok_or_else(|| {
                Error::usage(format!("no prediction for training {kind} at index {i}"))
            })?;
            let label = hsn
                .label(kind, i)
                .ok_or_else(|| Error::usage(format!("training {kind} {} has no label", hsn.id(kind, i))))?;
            let mut truth = vec![0.0; classes];
            truth[mode.class_of(label)] = 1.0;
            terms.push(tape.cross_entropy(pred, &truth)?);
        }
    }
    let mut data = if terms.is_empty() {
        tape.constant(Tensor::scalar(0.0))
    } else {
        tape.sum(&terms)?
    };
    if alpha != 0.0 {
        let reg = regularizer(tape, vars)?;
        let scaled = tape.scale(reg, alpha);
        data = tape.add(data, scaled)?;
    }
    Ok(data)
}

/// `Σ ‖W‖²` over every rank-2 parameter; biases are excluded.
pub fn regularizer(tape: &mut Tape, vars: &ModelVars) -> Result<Var> {
    let squares: Vec<Var> = vars
        .leaves
        .iter()
        .filter(|&&v| tape.value(v).shape().len() == 2)
        .copied()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|v| tape.sum_squares(v))
        .collect();
    tape.sum(&squares)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: ModelParams,
    pub trace: Vec<TraceRow>,
}

/// Full-batch gradient descent on the joint loss.
///
/// The update direction is the gradient divided by the number of labeled
/// training nodes, so a fixed learning rate behaves the same for small and
/// large graphs. The traced loss is the undivided sum.
pub fn fit(hsn: &Hsn, vocab: &Vocab, sampled: &NodeSets, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    fit_unchecked(hsn, vocab, sampled, config)
}

fn fit_unchecked(hsn: &Hsn, vocab: &Vocab, sampled: &NodeSets, config: &TrainConfig) -> Result<FitResult> {
    for kind in NodeType::ALL {
        if vocab.wordset(kind).len() != config.dims.d {
            return Err(Error::usage(format!(
                "{kind} word set has {} words, model expects d={}",
                vocab.wordset(kind).len(),
                config.dims.d
            )));
        }
    }
    let mode = config.head_mode();
    let inputs = prepare_inputs(hsn, vocab, config.dims.q, &config.tokenizer);
    let mut params = ModelParams::init(
        config.dims,
        vocab.embedding_rows(),
        mode.classes(),
        config.rounds,
        config.seed,
    );
    let scale = 1.0 / sampled.total().max(1) as f64;
    let mut velocity: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut tape = Tape::new();
        let vars = params.bind(&mut tape);
        let fwd = forward(&mut tape, hsn, &inputs, &vars, config.rounds)?;
        let l = loss(&mut tape, &fwd.probs, hsn, sampled, &vars, config.alpha, mode)?;
        let value = tape.value(l).data()[0];
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                norms: params.norms(),
            });
        }
        let grads = tape.backward(l)?;
        let mut sq = 0.0;
        for ((t, &v), vel) in params.tensors_mut().into_iter().zip(&vars.leaves).zip(&mut velocity) {
            let g = grads.wrt(v).data();
            for ((w, gi), m) in t.data_mut().iter_mut().zip(g).zip(vel.iter_mut()) {
                let gi = gi * scale;
                sq += gi * gi;
                *m = config.momentum * *m + gi;
                *w -= config.learning_rate * *m;
            }
        }
        trace.push(TraceRow {
            epoch,
            loss: value,
            grad_norm: sq.sqrt(),
        });
    }
    Ok(FitResult { params, trace })
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "loss", "grad_norm"])?;
    for row in trace {
        w.write_record([row.epoch.to_string(), row.loss.to_string(), row.grad_norm.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Class probabilities for every node from a fitted model.
#[derive(Clone, Debug)]
pub struct Predictions {
    pub articles: Vec<Tensor>,
    pub creators: Vec<Tensor>,
    pub subjects: Vec<Tensor>,
}

impl Predictions {
    pub fn get(&self, kind: NodeType) -> &[Tensor] {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    /// Predicted class of one node in `mode`. A 6-way model answers bi
    /// queries with the polarity of its 6-way argmax.
    pub fn class(&self, kind: NodeType, index: usize, mode: Mode) -> usize {
        let p = self.get(kind)[index].data();
        let top = argmax(p);
        match (p.len(), mode) {
            (6, Mode::Bi) => {
                Mode::Bi.class_of(CredLabel::from_class_index(top).expect("6-way head"))
            }
            _ => top,
        }
    }
}

impl ModelParams {
    pub fn predict_all(&self, hsn: &Hsn, inputs: &Inputs) -> Result<Predictions> {
        let mut tape = Tape::new();
        let vars = self.bind(&mut tape);
        let fwd = forward(&mut tape, hsn, inputs, &vars, self.rounds)?;
        Ok(Predictions {
            articles: fwd.probs.values(&tape, NodeType::Article),
            creators: fwd.probs.values(&tape, NodeType::Creator),
            subjects: fwd.probs.values(&tape, NodeType::Subject),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_vocab;
    use crate::graph::{derive_entity_labels, fixtures};

    fn tiny() -> ModelDims {
        ModelDims {
            d: 2,
            embed: 3,
            hidden: 3,
            latent: 2,
            state: 2,
            q: 6,
        }
    }

    fn setup() -> (Hsn, Vocab, NodeSets) {
        let hsn = derive_entity_labels(&fixtures::toy());
        let all = NodeSets::all(&hsn);
        let vocab = build_vocab(&hsn, &all, 2, &TokenizerConfig::default()).unwrap();
        (hsn, vocab, all)
    }

    fn config() -> TrainConfig {
        TrainConfig {
            dims: tiny(),
            rounds: 2,
            epochs: 5,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_heads_predict_uniform() {
        let (hsn, vocab, all) = setup();
        for mode in Mode::ALL {
            let mut p = ModelParams::init(tiny(), vocab.embedding_rows(), mode.classes(), 2, 0);
            for kind in [&mut p.articles, &mut p.creators, &mut p.subjects] {
                kind.head_w.data_mut().fill(0.0);
            }
            let inputs = prepare_inputs(&hsn, &vocab, 6, &TokenizerConfig::default());
            let mut tape = Tape::new();
            let vars = p.bind(&mut tape);
            let fwd = forward(&mut tape, &hsn, &inputs, &vars, 2).unwrap();
            let k = mode.classes() as f64;
            for kind in NodeType::ALL {
                for v in fwd.probs.values(&tape, kind) {
                    assert!(v.data().iter().all(|x| (x - 1.0 / k).abs() < 1e-15));
                }
            }
            let l = loss(&mut tape, &fwd.probs, &hsn, &all, &vars, 0.0, mode).unwrap();
            let n = all.total() as f64;
            assert!((tape.value(l).data()[0] - n * k.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[1.0; 6]), 0);
    }

    #[test]
    fn missing_prediction_is_an_error() {
        let (hsn, vocab, all) = setup();
        let p = ModelParams::init(tiny(), vocab.embedding_rows(), 2, 1, 0);
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let err = loss(&mut tape, &NodeVars::default(), &hsn, &all, &vars, 0.0, Mode::Bi);
        assert!(err.is_err());
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let (hsn, vocab, all) = setup();
        let mut cfg = config();
        cfg.epochs = 1;
        cfg.learning_rate = 0.0;
        assert!(fit(&hsn, &vocab, &all, &cfg).is_err(), "validation rejects lr=0");
        let out = fit_unchecked(&hsn, &vocab, &all, &cfg).unwrap();
        let fresh = ModelParams::init(tiny(), vocab.embedding_rows(), 2, 2, 3);
        assert_eq!(out.params, fresh);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let (hsn, vocab, all) = setup();
        let mut cfg = config();
        cfg.epochs = 30;
        cfg.learning_rate = 0.5;
        let a = fit(&hsn, &vocab, &all, &cfg).unwrap();
        let b = fit(&hsn, &vocab, &all, &cfg).unwrap();
        assert!(a.trace.last().unwrap().loss < a.trace[0].loss);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let (hsn, vocab, all) = setup();
        let out = fit(&hsn, &vocab, &all, &config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        out.params.save(&path).unwrap();
        let back = ModelParams::load(&path).unwrap();
        assert_eq!(back, out.params);
        let inputs = prepare_inputs(&hsn, &vocab, 6, &TokenizerConfig::default());
        let p1 = out.params.predict_all(&hsn, &inputs).unwrap();
        let p2 = back.predict_all(&hsn, &inputs).unwrap();
        assert_eq!(p1.articles, p2.articles);

        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        std::fs::write(&path, bytes).unwrap();
        assert!(ModelParams::load(&path).is_err());
    }
}
