mod common;

use common::{latent_oracle, max_abs_diff};
use credence::features::{latent_features, EncodedText, HfluParams, PAD};
use credence::numgrad::Tape;
use credence::params::Parameters;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 12;

/// Random encoder whose biases are non-zero too; the padding row stays zero.
fn random_hflu(seed: u64, embed: usize, hidden: usize, latent: usize) -> HfluParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = HfluParams::init(ROWS, embed, hidden, latent, &mut rng);
    for t in p.tensors_mut() {
        for v in t.data_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    p.embedding.data_mut()[PAD * embed..(PAD + 1) * embed].fill(0.0);
    p
}

fn run(p: &HfluParams, enc: &EncodedText) -> Vec<f64> {
    let mut tape = Tape::new();
    let vars = p.bind(&mut tape);
    let out = latent_features(&mut tape, enc, &vars).unwrap();
    tape.value(out).data().to_vec()
}

#[test]
fn four_tokens_match_scalar_gru() {
    let p = random_hflu(42, 3, 4, 2);
    let tokens = [5, 2, 9, 5];
    let enc = EncodedText {
        indices: vec![5, 2, 9, 5, PAD, PAD],
        true_length: 4,
    };
    let got = run(&p, &enc);
    let want = latent_oracle(&p, &tokens);
    assert!(max_abs_diff(&got, &want) < 1e-10, "{got:?} vs {want:?}");
}

#[test]
fn empty_sequence_gives_sigmoid_of_bias() {
    let p = random_hflu(1, 3, 4, 2);
    let enc = EncodedText {
        indices: vec![PAD; 4],
        true_length: 0,
    };
    let want: Vec<f64> = p.fusion_b.data().iter().map(|&b| common::sigmoid(b)).collect();
    assert_eq!(run(&p, &enc), want);
}

proptest! {
    #[test]
    fn padding_never_changes_output(
        seed in 0u64..1000,
        tokens in prop::collection::vec(1usize..ROWS, 0..6),
        extra in 1usize..8,
    ) {
        let p = random_hflu(seed, 2, 3, 2);
        let mut indices = tokens.clone();
        let short = EncodedText { indices: indices.clone(), true_length: tokens.len() };
        indices.extend(std::iter::repeat_n(PAD, extra));
        let long = EncodedText { indices, true_length: tokens.len() };
        let a = run(&p, &short);
        prop_assert_eq!(&a, &run(&p, &long));
        prop_assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn random_sequences_match_scalar_gru(
        seed in 0u64..1000,
        tokens in prop::collection::vec(1usize..ROWS, 1..8),
    ) {
        let p = random_hflu(seed, 3, 2, 3);
        let enc = EncodedText { indices: tokens.clone(), true_length: tokens.len() };
        prop_assert!(max_abs_diff(&run(&p, &enc), &latent_oracle(&p, &tokens)) < 1e-10);
    }
}
