//! Dataset statistics: word contrasts between true and false articles,
//! per-creator credibility ratios, the articles-per-creator distribution and
//! per-subject label breakdowns. Written as one CSV per analysis.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{CredLabel, Hsn, NodeType};
use crate::error::Result;
use crate::eval::Polarity;
use crate::features::{contrast_counts, TokenCounts, TokenizerConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub articles: usize,
    pub creators: usize,
    pub subjects: usize,
    pub authorship_links: usize,
    pub subject_links: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CreatorRatio {
    pub creator: String,
    pub articles: usize,
    pub true_articles: usize,
    pub false_articles: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLaw {
    /// `(articles per creator, number of creators)`, ascending.
    pub buckets: Vec<(usize, usize)>,
    /// Least-squares fit of `ln(creators) = slope · ln(articles) + intercept`;
    /// absent with fewer than two buckets.
    pub fit: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubjectRow {
    pub subject: String,
    pub articles: usize,
    pub true_articles: usize,
    pub false_articles: usize,
    /// Article counts indexed by [`CredLabel::class_index`].
    pub by_label: [usize; 6],
    pub label: Option<CredLabel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub summary: Summary,
    /// Tokens most over-represented in true articles, strongest first.
    pub true_tokens: Vec<TokenCounts>,
    /// Tokens most over-represented in false articles, strongest first.
    pub false_tokens: Vec<TokenCounts>,
    pub creators: Vec<CreatorRatio>,
    pub power_law: PowerLaw,
    pub top_subjects: Vec<SubjectRow>,
}

pub const TOP_SUBJECTS: usize = 20;

pub fn stats(hsn: &Hsn, top_tokens: usize, tokenizer: &TokenizerConfig) -> StatsReport {
    let n = hsn.count(NodeType::Article);
    let summary = Summary {
        articles: n,
        creators: hsn.count(NodeType::Creator),
        subjects: hsn.count(NodeType::Subject),
        authorship_links: n,
        subject_links: hsn.subject_link_count(),
    };

    let polarity = |a: usize| Polarity::of(hsn.articles()[a].label);
    let has_true = (0..n).any(|a| polarity(a) == Polarity::Positive);
    let has_false = (0..n).any(|a| polarity(a) == Polarity::Negative);
    let (true_tokens, false_tokens) = if has_true && has_false {
        let counts = contrast_counts(
            hsn.articles().iter().map(|a| (a.text.as_str(), Polarity::of(a.label))),
            tokenizer,
        );
        let mut up = counts.clone();
        up.sort_by(|a, b| b.log_ratio().total_cmp(&a.log_ratio()));
        let mut down = counts;
        down.sort_by(|a, b| a.log_ratio().total_cmp(&b.log_ratio()));
        up.truncate(top_tokens);
        down.truncate(top_tokens);
        (up, down)
    } else {
        (Vec::new(), Vec::new())
    };

    let creators: Vec<CreatorRatio> = (0..hsn.count(NodeType::Creator))
        .map(|c| {
            let arts = hsn.articles_by(c);
            let t = arts.iter().filter(|&&a| polarity(a) == Polarity::Positive).count();
            CreatorRatio {
                creator: hsn.id(NodeType::Creator, c).to_owned(),
                articles: arts.len(),
                true_articles: t,
                false_articles: arts.len() - t,
            }
        })
        .collect();

    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &creators {
        *hist.entry(c.articles).or_default() += 1;
    }
    let buckets: Vec<(usize, usize)> = hist.into_iter().collect();
    let fit = (buckets.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = buckets
            .iter()
            .map(|&(x, y)| ((x as f64).ln(), (y as f64).ln()))
            .collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    });

    let mut subjects: Vec<SubjectRow> = (0..hsn.count(NodeType::Subject))
        .map(|s| {
            let arts = hsn.articles_about(s);
            let mut by_label = [0; 6];
            for &a in arts {
                by_label[hsn.articles()[a].label.class_index()] += 1;
            }
            let t = arts.iter().filter(|&&a| polarity(a) == Polarity::Positive).count();
            SubjectRow {
                subject: hsn.id(NodeType::Subject, s).to_owned(),
                articles: arts.len(),
                true_articles: t,
                false_articles: arts.len() - t,
                by_label,
                label: hsn.label(NodeType::Subject, s),
            }
        })
        .collect();
    subjects.sort_by(|a, b| b.articles.cmp(&a.articles).then_with(|| a.subject.cmp(&b.subject)));
    subjects.truncate(TOP_SUBJECTS);

    StatsReport {
        summary,
        true_tokens,
        false_tokens,
        creators,
        power_law: PowerLaw { buckets, fit },
        top_subjects: subjects,
    }
}

impl StatsReport {
    /// Writes `summary.csv`, `word_contrast.csv`, `creator_ratios.csv`,
    /// `power_law.csv`, `power_law_fit.csv` and `top_subjects.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;

        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(["metric", "value"])?;
        let s = &self.summary;
        for (k, v) in [
            ("articles", s.articles),
            ("creators", s.creators),
            ("subjects", s.subjects),
            ("authorship_links", s.authorship_links),
            ("subject_links", s.subject_links),
        ] {
            w.write_record([k, &v.to_string()])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("word_contrast.csv"))?;
        w.write_record(["direction", "rank", "token", "count_true", "count_false", "log_ratio"])?;
        for (dir_name, list) in [("true", &self.true_tokens), ("false", &self.false_tokens)] {
            for (rank, t) in list.iter().enumerate() {
                w.write_record([
                    dir_name,
                    &(rank + 1).to_string(),
                    &t.token,
                    &t.positive.to_string(),
                    &t.negative.to_string(),
                    &t.log_ratio().to_string(),
                ])?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("creator_ratios.csv"))?;
        w.write_record(["creator", "articles", "true", "false", "true_fraction"])?;
        for c in &self.creators {
            w.write_record([
                &c.creator,
                &c.articles.to_string(),
                &c.true_articles.to_string(),
                &c.false_articles.to_string(),
                &(c.true_articles as f64 / c.articles as f64).to_string(),
            ])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("power_law.csv"))?;
        w.write_record(["articles_per_creator", "creators"])?;
        for (x, y) in &self.power_law.buckets {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("power_law_fit.csv"))?;
        w.write_record(["slope", "intercept", "buckets"])?;
        let (slope, intercept) = match self.power_law.fit {
            Some((s, i)) => (s.to_string(), i.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([slope, intercept, self.power_law.buckets.len().to_string()])?;
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("top_subjects.csv"))?;
        let mut header = vec!["subject", "articles", "true", "false", "label"];
        header.extend(CredLabel::ALL.iter().map(|l| l.as_str()));
        w.write_record(&header)?;
        for s in &self.top_subjects {
            let mut row = vec![
                s.subject.clone(),
                s.articles.to_string(),
                s.true_articles.to_string(),
                s.false_articles.to_string(),
                s.label.map(|l| l.to_string()).unwrap_or_default(),
            ];
            row.extend(s.by_label.iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
