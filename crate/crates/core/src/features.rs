//! Hybrid text features: explicit counts over a discriminative word set,
//! concatenated with a GRU-encoded, sigmoid-fused latent vector.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::eval::Polarity;
use crate::graph::{Hsn, NodeSets, NodeType};
use crate::numgrad::{Tape, Tensor, Var};
use crate::params::Parameters;

/// Embedding row reserved for padding positions.
pub const PAD: usize = 0;
/// Embedding row for tokens outside the vocabulary.
pub const UNK: usize = 1;
const FIRST_TOKEN_ROW: usize = 2;

const STOP_WORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "but", "by", "can", "could", "did", "do", "does",
    "during", "each", "for", "from", "had", "has", "have", "he", "her", "here", "him", "his",
    "how", "i", "if", "in", "into", "is", "it", "its", "just", "me", "more", "most", "my", "no",
    "nor", "not", "of", "on", "once", "only", "or", "other", "our", "out", "over", "own", "s",
    "said", "says", "she", "should", "so", "some", "such", "t", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your",
];

#[derive(Clone, Debug, PartialEq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub stop_words: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            stop_words: STOP_WORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TokenizerConfig {
    /// Lowercases, drops apostrophes, splits on any other non-alphanumeric
    /// character and removes stop words.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let text = if self.lowercase {
            text.to_lowercase()
        } else {
            text.to_owned()
        };
        text.replace(['\'', '\u{2019}'], "")
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty() && !self.stop_words.contains(*t))
            .map(str::to_owned)
            .collect()
    }
}

/// Occurrence counts of one token in the positive and negative groups.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenCounts {
    pub token: String,
    pub positive: usize,
    pub negative: usize,
}

impl TokenCounts {
    /// `ln((positive + 1) / (negative + 1))`.
    pub fn log_ratio(&self) -> f64 {
        ((self.positive + 1) as f64 / (self.negative + 1) as f64).ln()
    }
}

/// Per-token group counts over polarity-tagged documents, sorted by token.
pub fn contrast_counts<'a>(
    docs: impl IntoIterator<Item = (&'a str, Polarity)>,
    tokenizer: &TokenizerConfig,
) -> Vec<TokenCounts> {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (text, polarity) in docs {
        for tok in tokenizer.tokenize(text) {
            let entry = counts.entry(tok).or_default();
            match polarity {
                Polarity::Positive => entry.0 += 1,
                Polarity::Negative => entry.1 += 1,
            }
        }
    }
    counts
        .into_iter()
        .map(|(token, (positive, negative))| TokenCounts {
            token,
            positive,
            negative,
        })
        .collect()
}

/// Ordered word list with reverse lookup.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordSet {
    words: Vec<String>,
    position: HashMap<String, usize>,
}

impl WordSet {
    pub fn new(words: Vec<String>) -> Self {
        let position = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        WordSet { words, position }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.position.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.position.contains_key(word)
    }
}

/// Full token list plus one discriminative word set per node category.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    tokens: WordSet,
    articles: WordSet,
    creators: WordSet,
    subjects: WordSet,
}

impl Vocab {
    pub fn tokens(&self) -> &WordSet {
        &self.tokens
    }

    pub fn wordset(&self, kind: NodeType) -> &WordSet {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    /// Embedding table rows: padding, unknown, then one per token.
    pub fn embedding_rows(&self) -> usize {
        self.tokens.len() + FIRST_TOKEN_ROW
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (header, set) in [
            ("vocabulary", &self.tokens),
            ("articles", &self.articles),
            ("creators", &self.creators),
            ("subjects", &self.subjects),
        ] {
            let _ = writeln!(out, "[{header}]");
            for w in set.words() {
                let _ = writeln!(out, "{w}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (i, line) in text.lines().enumerate() {
            if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if sections.insert(h, Vec::new()).is_some() {
                    return Err(Error::usage(format!("vocab line {}: repeated section [{h}]", i + 1)));
                }
                current = Some(h);
            } else if !line.is_empty() {
                let Some(h) = current else {
                    return Err(Error::usage(format!("vocab line {}: token before any section", i + 1)));
                };
                sections.get_mut(h).expect("section exists").push(line.to_owned());
            }
        }
        let mut take = |name: &str| {
            sections
                .remove(name)
                .map(WordSet::new)
                .ok_or_else(|| Error::usage(format!("vocab file lacks section [{name}]")))
        };
        let vocab = Vocab {
            tokens: take("vocabulary")?,
            articles: take("articles")?,
            creators: take("creators")?,
            subjects: take("subjects")?,
        };
        for kind in NodeType::ALL {
            if let Some(w) = vocab.wordset(kind).words().iter().find(|w| !vocab.tokens.contains(w)) {
                return Err(Error::usage(format!("word set for {kind} holds {w:?} outside the vocabulary")));
            }
        }
        Ok(vocab)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Vocab::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Builds the vocabulary from every node text and picks, per category, the
/// `d` tokens with the largest absolute log contrast between positive and
/// negative *training* nodes. Ties go to the lexicographically smaller token.
pub fn build_vocab(hsn: &Hsn, train: &NodeSets, d: usize, tokenizer: &TokenizerConfig) -> Result<Vocab> {
    if d == 0 {
        return Err(Error::usage("word set size d must be at least 1"));
    }
    let mut all = BTreeSet::new();
    for kind in NodeType::ALL {
        for i in 0..hsn.count(kind) {
            all.extend(tokenizer.tokenize(hsn.text(kind, i)));
        }
    }
    let tokens = WordSet::new(all.into_iter().collect());

    let pick = |kind: NodeType| -> Result<WordSet> {
        let mut docs = Vec::with_capacity(train.get(kind).len());
        for &i in train.get(kind) {
            let label = hsn.label(kind, i).ok_or_else(|| {
                Error::usage(format!(
                    "{kind} {} has no label; derive entity labels first",
                    hsn.id(kind, i)
                ))
            })?;
            docs.push((hsn.text(kind, i), Polarity::of(label)));
        }
        let mut counts = contrast_counts(docs, tokenizer);
        if counts.len() < d {
            return Err(Error::usage(format!(
                "word set size d={d} exceeds the {} distinct tokens available in training {kind} texts",
                counts.len()
            )));
        }
        // stable sort keeps lexicographic order among equal scores
        counts.sort_by(|a, b| b.log_ratio().abs().total_cmp(&a.log_ratio().abs()));
        Ok(WordSet::new(counts.into_iter().take(d).map(|c| c.token).collect()))
    };
    Ok(Vocab {
        articles: pick(NodeType::Article)?,
        creators: pick(NodeType::Creator)?,
        subjects: pick(NodeType::Subject)?,
        tokens,
    })
}

/// Entry `k` counts occurrences of `wordset[k]` in the token stream.
pub fn explicit_features(text: &str, wordset: &WordSet, tokenizer: &TokenizerConfig) -> Tensor {
    let mut counts = vec![0.0; wordset.len()];
    for tok in tokenizer.tokenize(text) {
        if let Some(k) = wordset.position(&tok) {
            counts[k] += 1.0;
        }
    }
    Tensor::vector(counts)
}

/// Fixed-length index sequence for the recurrent encoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedText {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

pub fn encode_text(text: &str, vocab: &Vocab, q: usize, tokenizer: &TokenizerConfig) -> EncodedText {
    let mut indices: Vec<usize> = tokenizer
        .tokenize(text)
        .iter()
        .take(q)
        .map(|t| vocab.tokens.position(t).map_or(UNK, |i| i + FIRST_TOKEN_ROW))
        .collect();
    let true_length = indices.len();
    indices.resize(q, PAD);
    EncodedText {
        indices,
        true_length,
    }
}

/// GRU weights. Every matrix is `hidden × (embed + hidden)` and acts on
/// `[x; h]` (the candidate acts on `[x; r ⊙ h]`).
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_update: Tensor,
    pub b_update: Tensor,
    pub w_reset: Tensor,
    pub b_reset: Tensor,
    pub w_candidate: Tensor,
    pub b_candidate: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct GruVars {
    pub w_update: Var,
    pub b_update: Var,
    pub w_reset: Var,
    pub b_reset: Var,
    pub w_candidate: Var,
    pub b_candidate: Var,
}

impl GruParams {
    pub fn init<R: Rng + ?Sized>(embed: usize, hidden: usize, rng: &mut R) -> Self {
        let mut m = || Tensor::glorot(hidden, embed + hidden, rng);
        let (w_update, w_reset, w_candidate) = (m(), m(), m());
        let b = || Tensor::zeros(&[hidden]);
        GruParams {
            w_update,
            b_update: b(),
            w_reset,
            b_reset: b(),
            w_candidate,
            b_candidate: b(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_update.rows()
    }
}

impl Parameters for GruParams {
    type Bound = GruVars;

    fn tensors(&self) -> Vec<&Tensor> {
        vec![
            &self.w_update,
            &self.b_update,
            &self.w_reset,
            &self.b_reset,
            &self.w_candidate,
            &self.b_candidate,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.w_update,
            &mut self.b_update,
            &mut self.w_reset,
            &mut self.b_reset,
            &mut self.w_candidate,
            &mut self.b_candidate,
        ]
    }

    fn bind_from(vars: &mut dyn Iterator<Item = Var>) -> GruVars {
        let mut next = || vars.next().expect("too few vars for GRU");
        GruVars {
            w_update: next(),
            b_update: next(),
            w_reset: next(),
            b_reset: next(),
            w_candidate: next(),
            b_candidate: next(),
        }
    }
}

/// One GRU step: `h' = (1 − z) ⊙ h + z ⊙ tanh(W_c [x; r ⊙ h] + b_c)`.
pub fn gru_step(tape: &mut Tape, x: Var, h: Var, p: &GruVars) -> Result<Var> {
    let xh = tape.concat(&[x, h])?;
    let z_pre = tape.affine(p.w_update, xh, p.b_update)?;
    let z = tape.sigmoid(z_pre);
    let r_pre = tape.affine(p.w_reset, xh, p.b_reset)?;
    let r = tape.sigmoid(r_pre);
    let rh = tape.hadamard(r, h)?;
    let xrh = tape.concat(&[x, rh])?;
    let c_pre = tape.affine(p.w_candidate, xrh, p.b_candidate)?;
    let c = tape.tanh(c_pre);
    let keep = tape.one_minus(z);
    let old = tape.hadamard(keep, h)?;
    let new = tape.hadamard(z, c)?;
    tape.add(old, new)
}

/// Embedding table, GRU and fusion layer for one node category.
#[derive(Clone, Debug, PartialEq)]
pub struct HfluParams {
    pub embedding: Tensor,
    pub gru: GruParams,
    pub fusion_w: Tensor,
    pub fusion_b: Tensor,
}

#[derive(Clone, Copy, Debug)]
pub struct HfluVars {
    pub embedding: Var,
    pub gru: GruVars,
    pub fusion_w: Var,
    pub fusion_b: Var,
}

impl HfluParams {
    pub fn init<R: Rng + ?Sized>(rows: usize, embed: usize, hidden: usize, latent: usize, rng: &mut R) -> Self {
        let mut embedding = Tensor::glorot(rows, embed, rng);
        embedding.data_mut()[PAD * embed..(PAD + 1) * embed].fill(0.0);
        let gru = GruParams::init(embed, hidden, rng);
        HfluParams {
            embedding,
            gru,
            fusion_w: Tensor::glorot(latent, hidden, rng),
            fusion_b: Tensor::zeros(&[latent]),
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.fusion_w.rows()
    }
}

impl Parameters for HfluParams {
    type Bound = HfluVars;

    fn tensors(&self) -> Vec<&Tensor> {
        let mut v = vec![&self.embedding];
        v.extend(self.gru.tensors());
        v.push(&self.fusion_w);
        v.push(&self.fusion_b);
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![&mut self.embedding];
        v.extend(self.gru.tensors_mut());
        v.push(&mut self.fusion_w);
        v.push(&mut self.fusion_b);
        v
    }

    fn bind_from(vars: &mut dyn Iterator<Item = Var>) -> HfluVars {
        let embedding = vars.next().expect("too few vars for HFLU");
        let gru = GruParams::bind_from(vars);
        HfluVars {
            embedding,
            gru,
            fusion_w: vars.next().expect("too few vars for HFLU"),
            fusion_b: vars.next().expect("too few vars for HFLU"),
        }
    }
}

/// `σ(W_i · Σ_{t ≤ true_length} h_t + b_i)` with `h_0 = 0`; padding steps
/// are never fed to the GRU.
pub fn latent_features(tape: &mut Tape, enc: &EncodedText, p: &HfluVars) -> Result<Var> {
    let hidden = tape.value(p.gru.w_update).rows();
    let mut h = tape.constant(Tensor::zeros(&[hidden]));
    let mut states = Vec::with_capacity(enc.true_length);
    for &idx in &enc.indices[..enc.true_length] {
        let x = tape.row(p.embedding, idx)?;
        h = gru_step(tape, x, h, &p.gru)?;
        states.push(h);
    }
    let pooled = if states.is_empty() {
        h
    } else {
        tape.sum(&states)?
    };
    let fused = tape.affine(p.fusion_w, pooled, p.fusion_b)?;
    Ok(tape.sigmoid(fused))
}

/// Label-free inputs of one node, computed once per fit.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeText {
    pub explicit: Tensor,
    pub encoded: EncodedText,
}

impl NodeText {
    pub fn new(text: &str, kind: NodeType, vocab: &Vocab, q: usize, tokenizer: &TokenizerConfig) -> Self {
        NodeText {
            explicit: explicit_features(text, vocab.wordset(kind), tokenizer),
            encoded: encode_text(text, vocab, q, tokenizer),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HfluFeature {
    /// Constant on the tape.
    pub explicit: Var,
    pub latent: Var,
    pub combined: Var,
}

pub fn hflu_prepared(tape: &mut Tape, input: &NodeText, p: &HfluVars) -> Result<HfluFeature> {
    let explicit = tape.constant(input.explicit.clone());
    let latent = latent_features(tape, &input.encoded, p)?;
    let combined = tape.concat(&[explicit, latent])?;
    Ok(HfluFeature {
        explicit,
        latent,
        combined,
    })
}

/// Hybrid feature of one node of category `kind`.
#[allow(clippy::too_many_arguments)]
pub fn hflu(
    tape: &mut Tape,
    hsn: &Hsn,
    kind: NodeType,
    index: usize,
    vocab: &Vocab,
    q: usize,
    tokenizer: &TokenizerConfig,
    p: &HfluVars,
) -> Result<HfluFeature> {
    let input = NodeText::new(hsn.text(kind, index), kind, vocab, q, tokenizer);
    hflu_prepared(tape, &input, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{derive_entity_labels, CredLabel};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tok() -> TokenizerConfig {
        TokenizerConfig::default()
    }

    #[test]
    fn tokenizer_normalizes() {
        assert_eq!(
            tok().tokenize("The GUN-ban, Obama's plan!"),
            vec!["gun", "ban", "obamas", "plan"]
        );
        assert!(tok().tokenize("  ...  ").is_empty());
    }

    #[test]
    fn explicit_counts() {
        let ws = WordSet::new(vec!["tax".into(), "gun".into(), "obama".into()]);
        assert_eq!(explicit_features("tax tax gun", &ws, &tok()).data(), &[2.0, 1.0, 0.0]);
        assert_eq!(explicit_features("", &ws, &tok()).data(), &[0.0; 3]);
        assert_eq!(explicit_features("nothing relevant", &ws, &tok()).data(), &[0.0; 3]);
    }

    proptest! {
        #[test]
        fn explicit_features_are_additive(a in "[a-d ]{0,30}", b in "[a-d ]{0,30}") {
            let ws = WordSet::new(vec!["a".into(), "b".into(), "c".into(), "dd".into(), "bc".into()]);
            let joined = format!("{a} {b}");
            let fa = explicit_features(&a, &ws, &tok());
            let fb = explicit_features(&b, &ws, &tok());
            let fab = explicit_features(&joined, &ws, &tok());
            for k in 0..ws.len() {
                prop_assert_eq!(fab.data()[k], fa.data()[k] + fb.data()[k]);
            }
        }
    }

    fn corpus(gun_in_true: bool) -> Hsn {
        let mut b = Hsn::builder();
        b.creator("u", "profile words describing speaker background career history", None)
            .subject("s", "subject words covering public policy areas topics", None);
        let texts = [
            ("a1", "tax plan jobs", CredLabel::True),
            ("a2", "tax plan growth", CredLabel::MostlyTrue),
            ("a3", "gun obamacare jobs", CredLabel::False),
            ("a4", "gun obamacare growth", CredLabel::PantsOnFire),
        ];
        for (id, text, label) in texts {
            let text = if gun_in_true { "tax plan jobs growth gun obamacare" } else { text };
            b.article(id, text, label).authorship(id, "u").subject_link(id, "s");
        }
        derive_entity_labels(&b.build().unwrap())
    }

    #[test]
    fn contrastive_words_are_selected() {
        let g = corpus(false);
        let v = build_vocab(&g, &NodeSets::all(&g), 4, &tok()).unwrap();
        let ws = v.wordset(NodeType::Article);
        assert!(ws.contains("gun") && ws.contains("obamacare"));
        assert!(ws.contains("tax") && ws.contains("plan"));
        assert_eq!(v.tokens().len(), 19);
    }

    #[test]
    fn ties_break_lexicographically() {
        let g = corpus(true);
        let all = NodeSets::all(&g);
        let v = build_vocab(&g, &all, 3, &tok()).unwrap();
        assert_eq!(v.wordset(NodeType::Article).words(), &["growth", "gun", "jobs"]);
        assert_eq!(build_vocab(&g, &all, 3, &tok()).unwrap(), v);
        let v = build_vocab(&g, &all, 6, &tok()).unwrap();
        assert_eq!(v.wordset(NodeType::Article).len(), 6);
        let err = build_vocab(&g, &all, 7, &tok()).unwrap_err().to_string();
        assert!(err.contains("6 distinct tokens"), "{err}");
    }

    #[test]
    fn vocab_uses_training_labels_only() {
        let g = corpus(false);
        let mut train = NodeSets::all(&g);
        train.articles = vec![0, 2];
        let v = build_vocab(&g, &train, 3, &tok()).unwrap();
        let mut permuted = g.clone();
        permuted.set_label(NodeType::Article, 1, CredLabel::PantsOnFire);
        permuted.set_label(NodeType::Article, 3, CredLabel::True);
        assert_eq!(build_vocab(&permuted, &train, 3, &tok()).unwrap(), v);
    }

    #[test]
    fn vocab_text_roundtrip() {
        let g = corpus(false);
        let v = build_vocab(&g, &NodeSets::all(&g), 3, &tok()).unwrap();
        assert_eq!(Vocab::from_text(&v.to_text()).unwrap(), v);
        assert!(Vocab::from_text("[vocabulary]\na\n[articles]\nb\n[creators]\n[subjects]\n").is_err());
    }

    #[test]
    fn encoding_pads_and_truncates() {
        let g = corpus(false);
        let v = build_vocab(&g, &NodeSets::all(&g), 3, &tok()).unwrap();
        let e = encode_text("tax plan zebra", &v, 5, &tok());
        assert_eq!(e.true_length, 3);
        assert_eq!(&e.indices[3..], &[PAD, PAD]);
        assert_eq!(e.indices[2], UNK);
        assert!(e.indices[..2].iter().all(|&i| i >= FIRST_TOKEN_ROW));

        let e = encode_text("a1 b2 c3 d4 e5 f6 g7 h8 i9 j10", &v, 5, &tok());
        assert_eq!((e.indices.len(), e.true_length), (5, 5));

        let e = encode_text("", &v, 4, &tok());
        assert_eq!(e, EncodedText { indices: vec![PAD; 4], true_length: 0 });
    }

    fn zero_params(rows: usize, embed: usize, hidden: usize, latent: usize) -> HfluParams {
        let mut p = HfluParams::init(rows, embed, hidden, latent, &mut ChaCha8Rng::seed_from_u64(1));
        for t in p.tensors_mut() {
            t.data_mut().fill(0.0);
        }
        p
    }

    #[test]
    fn zero_weights_give_half() {
        let p = zero_params(10, 3, 4, 5);
        for enc in [
            EncodedText { indices: vec![3, 4, 5, 0], true_length: 3 },
            EncodedText { indices: vec![0; 4], true_length: 0 },
        ] {
            let mut tape = Tape::new();
            let vars = p.bind(&mut tape);
            let out = latent_features(&mut tape, &enc, &vars).unwrap();
            assert_eq!(tape.value(out).data(), &[0.5; 5]);
        }
    }

    #[test]
    fn hflu_shapes_and_determinism() {
        let g = corpus(false);
        let v = build_vocab(&g, &NodeSets::all(&g), 2, &tok()).unwrap();
        let p = zero_params(v.embedding_rows(), 3, 4, 3);
        let mut tape = Tape::new();
        let vars = p.bind(&mut tape);
        let a = hflu(&mut tape, &g, NodeType::Article, 2, &v, 6, &tok(), &vars).unwrap();
        let b = hflu(&mut tape, &g, NodeType::Article, 2, &v, 6, &tok(), &vars).unwrap();
        assert_eq!(tape.value(a.combined).len(), 5);
        assert_eq!(tape.value(a.combined), tape.value(b.combined));
        assert_eq!(&tape.value(a.combined).data()[2..], &[0.5; 3]);
        assert!(tape.value(a.explicit).data()[..2].iter().all(|c| *c >= 0.0 && c.fract() == 0.0));
    }
}
