//! Line-delimited JSON dataset files.
//!
//! ```text
//! articles.jsonl  {"id": str, "text": str, "label": "true"|"mostly-true"|...|"pants-on-fire"}
//! creators.jsonl  {"id": str, "profile": str, "label": optional}
//! subjects.jsonl  {"id": str, "description": str, "label": optional}
//! edges.jsonl     {"kind": "authorship"|"subject", "article": str, "other": str}
//! ```

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{CredLabel, Hsn, NodeType};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ArticleRecord {
    id: String,
    text: String,
    label: CredLabel,
}

#[derive(Debug, Serialize, Deserialize)]
struct CreatorRecord {
    id: String,
    profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<CredLabel>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubjectRecord {
    id: String,
    description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<CredLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EdgeKind {
    Authorship,
    Subject,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    kind: EdgeKind,
    article: String,
    other: String,
}

/// The four files of a dataset.
#[derive(Clone, Debug)]
pub struct DatasetPaths {
    pub articles: PathBuf,
    pub creators: PathBuf,
    pub subjects: PathBuf,
    pub edges: PathBuf,
}

impl DatasetPaths {
    /// `articles.jsonl`, `creators.jsonl`, `subjects.jsonl`, `edges.jsonl` under `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        DatasetPaths {
            articles: dir.join("articles.jsonl"),
            creators: dir.join("creators.jsonl"),
            subjects: dir.join("subjects.jsonl"),
            edges: dir.join("edges.jsonl"),
        }
    }
}

fn load_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Load {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| load_err(path, 0, e.to_string()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| load_err(path, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| load_err(path, line_no, e.to_string()))?;
        out.push((line_no, rec));
    }
    Ok(out)
}

fn check_unique<'a>(
    path: &Path,
    ids: impl Iterator<Item = (usize, &'a str)>,
) -> Result<HashMap<&'a str, usize>> {
    let mut seen = HashMap::new();
    for (line, id) in ids {
        if let Some(first) = seen.insert(id, line) {
            return Err(load_err(path, line, format!("duplicate id {id:?} (first on line {first})")));
        }
    }
    Ok(seen)
}

/// Loads and validates a dataset. Record-level problems are reported with
/// the offending file and line.
pub fn load_hsn(paths: &DatasetPaths) -> Result<Hsn> {
    let articles: Vec<(usize, ArticleRecord)> = read_records(&paths.articles)?;
    let creators: Vec<(usize, CreatorRecord)> = read_records(&paths.creators)?;
    let subjects: Vec<(usize, SubjectRecord)> = read_records(&paths.subjects)?;
    let edges: Vec<(usize, EdgeRecord)> = read_records(&paths.edges)?;

    let article_lines = check_unique(&paths.articles, articles.iter().map(|(l, r)| (*l, r.id.as_str())))?;
    let creator_lines = check_unique(&paths.creators, creators.iter().map(|(l, r)| (*l, r.id.as_str())))?;
    let subject_lines = check_unique(&paths.subjects, subjects.iter().map(|(l, r)| (*l, r.id.as_str())))?;

    let mut b = Hsn::builder();
    for (line, a) in &articles {
        if a.text.trim().is_empty() {
            return Err(load_err(&paths.articles, *line, format!("article {:?} has empty text", a.id)));
        }
        b.article(&a.id, &a.text, a.label);
    }
    for (_, c) in &creators {
        b.creator(&c.id, &c.profile, c.label);
    }
    for (_, s) in &subjects {
        b.subject(&s.id, &s.description, s.label);
    }

    let mut authored: HashMap<&str, usize> = HashMap::new();
    for (line, e) in &edges {
        if !article_lines.contains_key(e.article.as_str()) {
            return Err(load_err(&paths.edges, *line, format!("unknown article {:?}", e.article)));
        }
        match e.kind {
            EdgeKind::Authorship => {
                if !creator_lines.contains_key(e.other.as_str()) {
                    return Err(load_err(&paths.edges, *line, format!("unknown creator {:?}", e.other)));
                }
                if let Some(first) = authored.insert(e.article.as_str(), *line) {
                    return Err(load_err(
                        &paths.edges,
                        *line,
                        format!("article {:?} already has a creator (line {first})", e.article),
                    ));
                }
                b.authorship(&e.article, &e.other);
            }
            EdgeKind::Subject => {
                if !subject_lines.contains_key(e.other.as_str()) {
                    return Err(load_err(&paths.edges, *line, format!("unknown subject {:?}", e.other)));
                }
                b.subject_link(&e.article, &e.other);
            }
        }
    }
    for (line, a) in &articles {
        if !authored.contains_key(a.id.as_str()) {
            return Err(load_err(&paths.articles, *line, format!("article {:?} has no creator", a.id)));
        }
    }
    b.build()
}

pub fn load_dir(dir: &Path) -> Result<Hsn> {
    load_hsn(&DatasetPaths::in_dir(dir))
}

fn write_lines<T: Serialize>(path: &Path, records: impl Iterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, &r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the four dataset files into `dir`, creating it if needed. Output
/// is a pure function of the network.
pub fn write_dir(hsn: &Hsn, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let paths = DatasetPaths::in_dir(dir);
    write_lines(
        &paths.articles,
        hsn.articles().iter().map(|a| ArticleRecord {
            id: a.id.clone(),
            text: a.text.clone(),
            label: a.label,
        }),
    )?;
    write_lines(
        &paths.creators,
        hsn.creators().iter().map(|c| CreatorRecord {
            id: c.id.clone(),
            profile: c.profile.clone(),
            label: c.label,
        }),
    )?;
    write_lines(
        &paths.subjects,
        hsn.subjects().iter().map(|s| SubjectRecord {
            id: s.id.clone(),
            description: s.description.clone(),
            label: s.label,
        }),
    )?;
    let n = hsn.count(NodeType::Article);
    let authorship = (0..n).map(|a| EdgeRecord {
        kind: EdgeKind::Authorship,
        article: hsn.id(NodeType::Article, a).to_owned(),
        other: hsn.id(NodeType::Creator, hsn.creator_of(a)).to_owned(),
    });
    let links = (0..n).flat_map(|a| {
        hsn.subjects_of(a).iter().map(move |&s| EdgeRecord {
            kind: EdgeKind::Subject,
            article: hsn.id(NodeType::Article, a).to_owned(),
            other: hsn.id(NodeType::Subject, s).to_owned(),
        })
    });
    write_lines(&paths.edges, authorship.chain(links))
}
