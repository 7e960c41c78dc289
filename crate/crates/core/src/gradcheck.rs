//! Finite-difference verification of the complete training objective on a
//! five-node graph with tiny dimensions.

use crate::error::Result;
use crate::features::{build_vocab, TokenizerConfig, Vocab};
use crate::graph::{derive_entity_labels, CredLabel, Hsn, NodeSets};
use crate::numgrad::{finite_diff_check, GradCheck, Tensor};
use crate::train::{forward, loss, prepare_inputs, ModelDims, ModelParams, Mode};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Initialization seed of the standard suite.
pub const DEFAULT_SEED: u64 = 2;

/// Two articles, two creators, one subject; labels derived.
pub fn toy_graph() -> Hsn {
    let mut b = Hsn::builder();
    b.article("a1", "senate tax bill cuts rates for small business owners", CredLabel::MostlyTrue)
        .article("a2", "governor claims crime doubled since new gun law passed", CredLabel::False)
        .creator("c1", "state senator budget committee chair", None)
        .creator("c2", "radio host commentator blogger", None)
        .subject("s1", "taxes crime public safety state budget", None)
        .authorship("a1", "c1")
        .authorship("a2", "c2")
        .subject_link("a1", "s1")
        .subject_link("a2", "s1");
    derive_entity_labels(&b.build().expect("toy graph is valid"))
}

pub fn toy_dims() -> ModelDims {
    ModelDims {
        d: 3,
        embed: 2,
        hidden: 2,
        latent: 2,
        state: 2,
        q: 5,
    }
}

/// Gradient check of the full loss (features, `rounds` diffusion rounds,
/// heads, cross-entropy and L2 term) with respect to every parameter.
pub fn check_full_loss(
    hsn: &Hsn,
    vocab: &Vocab,
    sampled: &NodeSets,
    params: &ModelParams,
    alpha: f64,
    mode: Mode,
) -> Result<GradCheck> {
    let inputs = prepare_inputs(hsn, vocab, params.dims.q, &TokenizerConfig::default());
    let values: Vec<Tensor> = params.tensors().into_iter().cloned().collect();
    finite_diff_check(&values, STEP, |tape, leaves| {
        let vars = ModelParams::bind_leaves(leaves.to_vec());
        let fwd = forward(tape, hsn, &inputs, &vars, params.rounds)?;
        loss(tape, &fwd.probs, hsn, sampled, &vars, alpha, mode)
    })
}

/// The standard suite: toy graph, d=3, every width 2, one diffusion round,
/// both label modes. Returns the larger of the two maximum errors.
pub fn run_suite(seed: u64) -> Result<f64> {
    let hsn = toy_graph();
    let all = NodeSets::all(&hsn);
    let dims = toy_dims();
    let vocab = build_vocab(&hsn, &all, dims.d, &TokenizerConfig::default())?;
    let mut worst: f64 = 0.0;
    for mode in Mode::ALL {
        let params = ModelParams::init(dims, vocab.embedding_rows(), mode.classes(), 1, seed);
        let check = check_full_loss(&hsn, &vocab, &all, &params, 1e-2, mode)?;
        worst = worst.max(check.max_rel_error);
    }
    Ok(worst)
}
