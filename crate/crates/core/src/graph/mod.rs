//! The news heterogeneous social network: articles, creators, subjects and
//! the authorship / subject-indication edges between them.
//!
//! Node collections are stored in canonical order (sorted by id) and every
//! adjacency list is sorted by node index, so anything computed from an
//! [`Hsn`] is independent of the order records were supplied in.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod io;
mod labels;
mod split;
pub mod stats;
pub mod synth;

pub use labels::derive_entity_labels;
pub use split::{split_folds, Fold, NodeSets, Split};

/// Six-way credibility label. Scores run 6 (`True`) down to 1 (`PantsOnFire`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CredLabel {
    True,
    MostlyTrue,
    HalfTrue,
    MostlyFalse,
    False,
    PantsOnFire,
}

impl CredLabel {
    /// All labels, ordered by class index.
    pub const ALL: [CredLabel; 6] = [
        CredLabel::True,
        CredLabel::MostlyTrue,
        CredLabel::HalfTrue,
        CredLabel::MostlyFalse,
        CredLabel::False,
        CredLabel::PantsOnFire,
    ];

    pub fn score(self) -> u8 {
        6 - self.class_index() as u8
    }

    pub fn from_score(score: u8) -> Option<Self> {
        (1..=6)
            .contains(&score)
            .then(|| CredLabel::ALL[(6 - score) as usize])
    }

    /// Position in [`CredLabel::ALL`]; used as the multi-class target index.
    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn from_class_index(index: usize) -> Option<Self> {
        CredLabel::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CredLabel::True => "true",
            CredLabel::MostlyTrue => "mostly-true",
            CredLabel::HalfTrue => "half-true",
            CredLabel::MostlyFalse => "mostly-false",
            CredLabel::False => "false",
            CredLabel::PantsOnFire => "pants-on-fire",
        }
    }
}

impl fmt::Display for CredLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CredLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CredLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeType {
    Article,
    Creator,
    Subject,
}

impl NodeType {
    pub const ALL: [NodeType; 3] = [NodeType::Article, NodeType::Creator, NodeType::Subject];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::Article => "article",
            NodeType::Creator => "creator",
            NodeType::Subject => "subject",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Article {
    pub id: String,
    pub text: String,
    pub label: CredLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Creator {
    pub id: String,
    pub profile: String,
    pub label: Option<CredLabel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subject {
    pub id: String,
    pub description: String,
    pub label: Option<CredLabel>,
}

/// Validated news network.
#[derive(Clone, Debug, PartialEq)]
pub struct Hsn {
    articles: Vec<Article>,
    creators: Vec<Creator>,
    subjects: Vec<Subject>,
    article_ids: HashMap<String, usize>,
    creator_ids: HashMap<String, usize>,
    subject_ids: HashMap<String, usize>,
    author: Vec<usize>,
    article_subjects: Vec<Vec<usize>>,
    creator_articles: Vec<Vec<usize>>,
    subject_articles: Vec<Vec<usize>>,
}

impl Hsn {
    pub fn builder() -> HsnBuilder {
        HsnBuilder::default()
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn creators(&self) -> &[Creator] {
        &self.creators
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn count(&self, kind: NodeType) -> usize {
        match kind {
            NodeType::Article => self.articles.len(),
            NodeType::Creator => self.creators.len(),
            NodeType::Subject => self.subjects.len(),
        }
    }

    pub fn index_of(&self, kind: NodeType, id: &str) -> Option<usize> {
        match kind {
            NodeType::Article => self.article_ids.get(id),
            NodeType::Creator => self.creator_ids.get(id),
            NodeType::Subject => self.subject_ids.get(id),
        }
        .copied()
    }

    pub fn id(&self, kind: NodeType, index: usize) -> &str {
        match kind {
            NodeType::Article => &self.articles[index].id,
            NodeType::Creator => &self.creators[index].id,
            NodeType::Subject => &self.subjects[index].id,
        }
    }

    /// Profile, description or article body, depending on `kind`.
    pub fn text(&self, kind: NodeType, index: usize) -> &str {
        match kind {
            NodeType::Article => &self.articles[index].text,
            NodeType::Creator => &self.creators[index].profile,
            NodeType::Subject => &self.subjects[index].description,
        }
    }

    pub fn label(&self, kind: NodeType, index: usize) -> Option<CredLabel> {
        match kind {
            NodeType::Article => Some(self.articles[index].label),
            NodeType::Creator => self.creators[index].label,
            NodeType::Subject => self.subjects[index].label,
        }
    }

    pub fn set_label(&mut self, kind: NodeType, index: usize, label: CredLabel) {
        match kind {
            NodeType::Article => self.articles[index].label = label,
            NodeType::Creator => self.creators[index].label = Some(label),
            NodeType::Subject => self.subjects[index].label = Some(label),
        }
    }

    pub fn creator_of(&self, article: usize) -> usize {
        self.author[article]
    }

    pub fn subjects_of(&self, article: usize) -> &[usize] {
        &self.article_subjects[article]
    }

    pub fn articles_by(&self, creator: usize) -> &[usize] {
        &self.creator_articles[creator]
    }

    pub fn articles_about(&self, subject: usize) -> &[usize] {
        &self.subject_articles[subject]
    }

    pub fn subject_link_count(&self) -> usize {
        self.article_subjects.iter().map(Vec::len).sum()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.creators.iter().all(|c| c.label.is_some())
            && self.subjects.iter().all(|s| s.label.is_some())
    }

    /// A builder pre-filled with this network's records.
    pub fn to_builder(&self) -> HsnBuilder {
        let mut b = HsnBuilder::default();
        for a in &self.articles {
            b.article(&a.id, &a.text, a.label);
        }
        for c in &self.creators {
            b.creator(&c.id, &c.profile, c.label);
        }
        for s in &self.subjects {
            b.subject(&s.id, &s.description, s.label);
        }
        for (i, a) in self.articles.iter().enumerate() {
            b.authorship(&a.id, &self.creators[self.author[i]].id);
            for &s in &self.article_subjects[i] {
                b.subject_link(&a.id, &self.subjects[s].id);
            }
        }
        b
    }
}

/// Collects records and validates them into an [`Hsn`].
#[derive(Clone, Debug, Default)]
pub struct HsnBuilder {
    articles: Vec<Article>,
    creators: Vec<Creator>,
    subjects: Vec<Subject>,
    authorship: Vec<(String, String)>,
    subject_links: Vec<(String, String)>,
}

impl HsnBuilder {
    pub fn article(&mut self, id: &str, text: &str, label: CredLabel) -> &mut Self {
        self.articles.push(Article {
            id: id.to_owned(),
            text: text.to_owned(),
            label,
        });
        self
    }

    pub fn creator(&mut self, id: &str, profile: &str, label: Option<CredLabel>) -> &mut Self {
        self.creators.push(Creator {
            id: id.to_owned(),
            profile: profile.to_owned(),
            label,
        });
        self
    }

    pub fn subject(&mut self, id: &str, description: &str, label: Option<CredLabel>) -> &mut Self {
        self.subjects.push(Subject {
            id: id.to_owned(),
            description: description.to_owned(),
            label,
        });
        self
    }

    pub fn authorship(&mut self, article: &str, creator: &str) -> &mut Self {
        self.authorship.push((article.to_owned(), creator.to_owned()));
        self
    }

    pub fn subject_link(&mut self, article: &str, subject: &str) -> &mut Self {
        self.subject_links.push((article.to_owned(), subject.to_owned()));
        self
    }

    pub fn build(&self) -> Result<Hsn> {
        let mut articles = self.articles.clone();
        let mut creators = self.creators.clone();
        let mut subjects = self.subjects.clone();
        articles.sort_by(|a, b| a.id.cmp(&b.id));
        creators.sort_by(|a, b| a.id.cmp(&b.id));
        subjects.sort_by(|a, b| a.id.cmp(&b.id));

        let article_ids = index_ids(articles.iter().map(|a| a.id.as_str()), "article")?;
        let creator_ids = index_ids(creators.iter().map(|c| c.id.as_str()), "creator")?;
        let subject_ids = index_ids(subjects.iter().map(|s| s.id.as_str()), "subject")?;

        if let Some(a) = articles.iter().find(|a| a.text.trim().is_empty()) {
            return Err(Error::Invalid(format!("article {} has empty text", a.id)));
        }

        let mut author: Vec<Option<usize>> = vec![None; articles.len()];
        for (a, c) in &self.authorship {
            let ai = lookup(&article_ids, a, "article")?;
            let ci = lookup(&creator_ids, c, "creator")?;
            if let Some(prev) = author[ai] {
                return Err(Error::Invalid(format!(
                    "article {a} has more than one creator ({} and {c})",
                    creators[prev].id
                )));
            }
            author[ai] = Some(ci);
        }
        let author = author
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::Invalid(format!("article {} has no creator", articles[i].id)))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut article_subjects: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); articles.len()];
        for (a, s) in &self.subject_links {
            let ai = lookup(&article_ids, a, "article")?;
            let si = lookup(&subject_ids, s, "subject")?;
            article_subjects[ai].insert(si);
        }
        let article_subjects: Vec<Vec<usize>> = article_subjects
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();

        let mut creator_articles = vec![Vec::new(); creators.len()];
        let mut subject_articles = vec![Vec::new(); subjects.len()];
        for (ai, &ci) in author.iter().enumerate() {
            creator_articles[ci].push(ai);
            for &si in &article_subjects[ai] {
                subject_articles[si].push(ai);
            }
        }
        if let Some(ci) = creator_articles.iter().position(Vec::is_empty) {
            return Err(Error::Invalid(format!(
                "creator {} authors no article",
                creators[ci].id
            )));
        }
        if let Some(si) = subject_articles.iter().position(Vec::is_empty) {
            return Err(Error::Invalid(format!(
                "subject {} tags no article",
                subjects[si].id
            )));
        }

        Ok(Hsn {
            articles,
            creators,
            subjects,
            article_ids,
            creator_ids,
            subject_ids,
            author,
            article_subjects,
            creator_articles,
            subject_articles,
        })
    }
}

fn index_ids<'a>(ids: impl Iterator<Item = &'a str>, kind: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.to_owned(), i).is_some() {
            return Err(Error::Invalid(format!("duplicate {kind} id {id}")));
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<String, usize>, id: &str, kind: &str) -> Result<usize> {
    map.get(id)
        .copied()
        .ok_or_else(|| Error::Invalid(format!("edge references unknown {kind} {id}")))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Three articles, two creators, two subjects.
    pub fn toy() -> Hsn {
        let mut b = Hsn::builder();
        b.article("a1", "tax cuts help the economy grow", CredLabel::True)
            .article("a2", "obamacare gun ban destroys jobs", CredLabel::False)
            .article("a3", "gun laws and tax rates both rose", CredLabel::HalfTrue)
            .creator("u1", "senator from ohio", None)
            .creator("u2", "talk radio host", None)
            .subject("s1", "economy and taxes", None)
            .subject("s2", "guns and public safety", None)
            .authorship("a1", "u1")
            .authorship("a2", "u2")
            .authorship("a3", "u1")
            .subject_link("a1", "s1")
            .subject_link("a2", "s2")
            .subject_link("a3", "s1")
            .subject_link("a3", "s2");
        b.build().unwrap()
    }
}
