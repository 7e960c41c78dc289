//! Planted-signal network generator.
//!
//! Creators own a power-law share of the articles and a latent reliability
//! `ρ ~ Beta(a, a)`. Each article scores `1 + Binomial(5, ρ)` for its
//! creator's `ρ`. Article words come from a polarity-conditional
//! distribution: a shared pool of common words plus a pool of marker words
//! per polarity, where each token is a marker with probability
//! `strength · marker_rate`. Profiles and subject descriptions are drawn
//! from the common pool only.

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};

use super::{CredLabel, Hsn, NodeType};
use crate::error::{Error, Result};
use crate::eval::Polarity;
use crate::rng;

/// Probabilities of 1..=5 subjects per article; mean 3.5.
const SUBJECTS_PER_ARTICLE: [f64; 5] = [0.05, 0.15, 0.25, 0.35, 0.20];

#[derive(Clone, Debug, PartialEq)]
pub struct VocabSpec {
    pub common_words: usize,
    /// Marker words per polarity.
    pub marker_words: usize,
    pub marker_rate: f64,
    pub article_len: (usize, usize),
    pub profile_len: (usize, usize),
}

impl Default for VocabSpec {
    fn default() -> Self {
        VocabSpec {
            common_words: 400,
            marker_words: 40,
            marker_rate: 0.12,
            article_len: (8, 20),
            profile_len: (12, 30),
        }
    }
}

impl VocabSpec {
    /// Common words first, then positive markers, then negative markers.
    pub fn words(&self) -> Vec<String> {
        let common = (0..self.common_words).map(|i| format!("w{i:04}"));
        let markers = (0..2 * self.marker_words).map(|i| format!("m{i:03}"));
        common.chain(markers).collect()
    }

    /// Token distribution for articles of the given polarity, aligned with
    /// [`VocabSpec::words`].
    pub fn word_distribution(&self, strength: f64, polarity: Polarity) -> Vec<f64> {
        let m = self.marker_words;
        let marker_mass = if m == 0 { 0.0 } else { strength * self.marker_rate };
        let mut probs = vec![(1.0 - marker_mass) / self.common_words as f64; self.common_words];
        let mut pos = vec![0.0; m];
        let mut neg = vec![0.0; m];
        let pool = match polarity {
            Polarity::Positive => &mut pos,
            Polarity::Negative => &mut neg,
        };
        if m > 0 {
            pool.iter_mut().for_each(|p| *p = marker_mass / m as f64);
        }
        probs.extend(pos);
        probs.extend(neg);
        probs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub articles: usize,
    pub creators: usize,
    pub subjects: usize,
    pub vocab: VocabSpec,
    pub strength: f64,
    pub zipf_exponent: f64,
    /// Both shape parameters of the reliability Beta distribution.
    pub reliability_shape: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(articles: usize, creators: usize, subjects: usize, strength: f64, seed: u64) -> Self {
        SynthConfig {
            articles,
            creators,
            subjects,
            vocab: VocabSpec::default(),
            strength,
            zipf_exponent: 1.6,
            reliability_shape: 0.5,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = &self.vocab;
        let checks = [
            (self.articles >= 1 && self.creators >= 1 && self.subjects >= 1, "node counts must be positive"),
            (self.creators <= self.articles, "more creators than articles"),
            (self.subjects <= self.articles, "more subjects than articles"),
            ((0.0..=1.0).contains(&self.strength), "strength must lie in [0, 1]"),
            (v.common_words >= 1, "need at least one common word"),
            ((0.0..=1.0).contains(&v.marker_rate), "marker rate must lie in [0, 1]"),
            (v.article_len.0 >= 1 && v.article_len.0 <= v.article_len.1, "bad article length range"),
            (v.profile_len.0 >= 1 && v.profile_len.0 <= v.profile_len.1, "bad profile length range"),
            (self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite(), "bad zipf exponent"),
            (self.reliability_shape > 0.0, "reliability shape must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::usage(format!("infeasible synthetic parameters: {msg}"))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub hsn: Hsn,
    /// Latent reliability per creator, aligned with `hsn.creators()`.
    pub reliability: Vec<f64>,
}

impl SyntheticData {
    /// Expected article label distribution given the drawn reliabilities,
    /// indexed by [`CredLabel::class_index`].
    pub fn expected_label_marginal(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        let n = self.hsn.count(NodeType::Article) as f64;
        for a in 0..self.hsn.count(NodeType::Article) {
            let rho = self.reliability[self.hsn.creator_of(a)];
            for k in 0..=5u32 {
                let pmf = binomial_coeff(5, k) * rho.powi(k as i32) * (1.0 - rho).powi(5 - k as i32);
                let label = CredLabel::from_score(1 + k as u8).expect("score in range");
                out[label.class_index()] += pmf / n;
            }
        }
        out
    }
}

fn binomial_coeff(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-exponent)).collect()
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

fn sample_text<R: Rng>(rng: &mut R, words: &[String], dist: &WeightedIndex<f64>, len: (usize, usize)) -> String {
    let n = rng.random_range(len.0..=len.1);
    (0..n)
        .map(|_| words[dist.sample(rng)].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let seed = cfg.seed;
    let words = cfg.vocab.words();
    let weighted = |p: Vec<f64>| {
        WeightedIndex::new(p).map_err(|e| Error::usage(format!("word distribution: {e}")))
    };
    let common_only = weighted(
        (0..words.len())
            .map(|i| if i < cfg.vocab.common_words { 1.0 } else { 0.0 })
            .collect(),
    )?;
    let by_polarity = [
        weighted(cfg.vocab.word_distribution(cfg.strength, Polarity::Positive))?,
        weighted(cfg.vocab.word_distribution(cfg.strength, Polarity::Negative))?,
    ];

    let beta = Beta::new(cfg.reliability_shape, cfg.reliability_shape)
        .map_err(|e| Error::usage(format!("reliability distribution: {e}")))?;
    let mut r = rng::stream(seed, "synth/reliability");
    let reliability: Vec<f64> = (0..cfg.creators).map(|_| beta.sample(&mut r)).collect();

    // every creator gets one article, the rest follow the power law
    let mut r = rng::stream(seed, "synth/authorship");
    let sizes = WeightedIndex::new(zipf_weights(cfg.creators, cfg.zipf_exponent))
        .map_err(|e| Error::usage(e.to_string()))?;
    let mut author: Vec<usize> = (0..cfg.creators).collect();
    author.extend((cfg.creators..cfg.articles).map(|_| sizes.sample(&mut r)));
    author.shuffle(&mut r);

    let mut r = rng::stream(seed, "synth/labels");
    let labels: Vec<CredLabel> = author
        .iter()
        .map(|&c| {
            let k = Binomial::new(5, reliability[c]).expect("p in [0, 1]").sample(&mut r);
            CredLabel::from_score(1 + k as u8).expect("score in range")
        })
        .collect();

    let mut r = rng::stream(seed, "synth/subjects");
    let count_dist = WeightedIndex::new(SUBJECTS_PER_ARTICLE).expect("static weights");
    let popularity = zipf_weights(cfg.subjects, 1.0);
    let mut order: Vec<usize> = (0..cfg.articles).collect();
    order.shuffle(&mut r);
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); cfg.articles];
    for (s, &a) in order.iter().take(cfg.subjects).enumerate() {
        links[a].push(s);
    }
    for tags in links.iter_mut() {
        let want = (count_dist.sample(&mut r) + 1).min(cfg.subjects);
        while tags.len() < want {
            let mut w = popularity.clone();
            for &t in tags.iter() {
                w[t] = 0.0;
            }
            let pick = WeightedIndex::new(&w).expect("some subject left").sample(&mut r);
            tags.push(pick);
        }
    }

    let mut r = rng::stream(seed, "synth/text");
    let (wa, wc, ws) = (width(cfg.articles), width(cfg.creators), width(cfg.subjects));
    let mut b = Hsn::builder();
    for c in 0..cfg.creators {
        let profile = sample_text(&mut r, &words, &common_only, cfg.vocab.profile_len);
        b.creator(&format!("c{c:0wc$}"), &profile, None);
    }
    for s in 0..cfg.subjects {
        let description = sample_text(&mut r, &words, &common_only, cfg.vocab.profile_len);
        b.subject(&format!("s{s:0ws$}"), &description, None);
    }
    for a in 0..cfg.articles {
        let dist = match Polarity::of(labels[a]) {
            Polarity::Positive => &by_polarity[0],
            Polarity::Negative => &by_polarity[1],
        };
        let text = sample_text(&mut r, &words, dist, cfg.vocab.article_len);
        let id = format!("a{a:0wa$}");
        b.article(&id, &text, labels[a])
            .authorship(&id, &format!("c{:0wc$}", author[a]));
        for &s in &links[a] {
            b.subject_link(&id, &format!("s{s:0ws$}"));
        }
    }
    let hsn = b.build()?;
    Ok(SyntheticData { hsn, reliability })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_has_identical_class_distributions() {
        let v = VocabSpec::default();
        assert_eq!(
            v.word_distribution(0.0, Polarity::Positive),
            v.word_distribution(0.0, Polarity::Negative)
        );
        assert_ne!(
            v.word_distribution(0.5, Polarity::Positive),
            v.word_distribution(0.5, Polarity::Negative)
        );
        let total: f64 = v.word_distribution(0.8, Polarity::Negative).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig::new(120, 20, 8, 0.8, 7);
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.hsn, b.hsn);
        let c = generate_synthetic(&SynthConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.hsn, c.hsn);
    }

    #[test]
    fn creator_sizes_are_skewed() {
        let data = generate_synthetic(&SynthConfig::new(600, 100, 20, 0.8, 7)).unwrap();
        let mut sizes: Vec<usize> = (0..100).map(|c| data.hsn.articles_by(c).len()).collect();
        sizes.sort_unstable();
        let median = (sizes[49] + sizes[50]) as f64 / 2.0;
        let max = *sizes.last().unwrap() as f64;
        assert!(max >= 10.0 * median, "max {max}, median {median}");
    }

    #[test]
    fn subjects_per_article_in_range() {
        let data = generate_synthetic(&SynthConfig::new(2000, 100, 20, 0.8, 1)).unwrap();
        let g = &data.hsn;
        let n = g.count(NodeType::Article);
        assert!((0..n).all(|a| (1..=5).contains(&g.subjects_of(a).len())));
        let mean = g.subject_link_count() as f64 / n as f64;
        assert!((mean - 3.5).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn label_marginal_matches_reliability_mixture() {
        let data = generate_synthetic(&SynthConfig::new(5000, 300, 30, 0.5, 11)).unwrap();
        let expected = data.expected_label_marginal();
        let mut observed = [0.0; 6];
        for a in data.hsn.articles() {
            observed[a.label.class_index()] += 1.0 / 5000.0;
        }
        for (o, e) in observed.iter().zip(expected) {
            assert!((o - e).abs() < 0.1, "{observed:?} vs {expected:?}");
        }
    }

    #[test]
    fn rejects_infeasible_parameters() {
        assert!(generate_synthetic(&SynthConfig::new(10, 20, 2, 0.5, 0)).is_err());
        assert!(generate_synthetic(&SynthConfig::new(10, 2, 20, 0.5, 0)).is_err());
        assert!(generate_synthetic(&SynthConfig::new(10, 2, 2, 1.5, 0)).is_err());
    }
}
