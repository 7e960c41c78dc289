use rand::seq::SliceRandom;

use super::{Hsn, NodeType};
use crate::error::{Error, Result};
use crate::rng;

/// Node indices per category, each list sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeSets {
    pub articles: Vec<usize>,
    pub creators: Vec<usize>,
    pub subjects: Vec<usize>,
}

impl NodeSets {
    pub fn get(&self, kind: NodeType) -> &[usize] {
        match kind {
            NodeType::Article => &self.articles,
            NodeType::Creator => &self.creators,
            NodeType::Subject => &self.subjects,
        }
    }

    fn get_mut(&mut self, kind: NodeType) -> &mut Vec<usize> {
        match kind {
            NodeType::Article => &mut self.articles,
            NodeType::Creator => &mut self.creators,
            NodeType::Subject => &mut self.subjects,
        }
    }

    pub fn total(&self) -> usize {
        self.articles.len() + self.creators.len() + self.subjects.len()
    }

    /// Every node of every category.
    pub fn all(hsn: &Hsn) -> Self {
        NodeSets {
            articles: (0..hsn.count(NodeType::Article)).collect(),
            creators: (0..hsn.count(NodeType::Creator)).collect(),
            subjects: (0..hsn.count(NodeType::Subject)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: NodeSets,
    pub test: NodeSets,
    /// The θ-subsample of `train` actually used for fitting.
    pub sampled: NodeSets,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub k: usize,
    pub theta: f64,
    pub folds: Vec<Fold>,
}

/// Partitions each node category into `k` folds and draws the θ-subsample
/// of every fold's training part.
///
/// Fold membership depends only on `seed`; subsamples for a smaller θ are
/// prefixes of those for a larger θ.
pub fn split_folds(hsn: &Hsn, k: usize, theta: f64, seed: u64) -> Result<Split> {
    if k < 2 {
        return Err(Error::usage(format!("fold count must be at least 2, got {k}")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::usage(format!("theta must lie in (0, 1], got {theta}")));
    }
    for kind in NodeType::ALL {
        let n = hsn.count(kind);
        if n < k {
            return Err(Error::usage(format!(
                "cannot split {n} {kind} nodes into {k} folds"
            )));
        }
    }

    let mut folds: Vec<Fold> = (0..k)
        .map(|_| Fold {
            train: NodeSets::default(),
            test: NodeSets::default(),
            sampled: NodeSets::default(),
        })
        .collect();

    for kind in NodeType::ALL {
        let n = hsn.count(kind);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, &format!("split/{kind}")));
        let mut fold_of = vec![0; n];
        for (pos, &node) in order.iter().enumerate() {
            fold_of[node] = pos % k;
        }
        for (f, fold) in folds.iter_mut().enumerate() {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            let take = ((theta * train.len() as f64) + 0.5).floor() as usize;
            let mut shuffled = train.clone();
            shuffled.shuffle(&mut rng::stream(seed, &format!("sample/{kind}/{f}")));
            let mut sampled: Vec<usize> = shuffled.into_iter().take(take.min(train.len())).collect();
            sampled.sort_unstable();
            *fold.test.get_mut(kind) = test;
            *fold.train.get_mut(kind) = train;
            *fold.sampled.get_mut(kind) = sampled;
        }
    }

    Ok(Split { k, theta, folds })
}
