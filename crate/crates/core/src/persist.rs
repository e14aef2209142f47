//! Model persistence: line-delimited text formats for cluster sets,
//! proximity indices, linear models and the cascade directory tree.
//!
//! Every file is deterministic given the model (sorted maps, no
//! timestamps) and floating-point values are written with Rust's
//! shortest round-trip formatting, so retraining with the same seed
//! reproduces directories byte for byte. The cascade manifest lists a
//! SHA-256 checksum per file; loaders verify them and fail with an
//! integrity error on any mismatch.
//!
//! Formats (tab-separated, one record per line):
//! - `clusters/labels.tsv`: label id, source component, term index, phrase
//! - `clusters/memberships.tsv`: doc id, label id, similarity
//! - `clusters/other.tsv`: doc id
//! - `index/metadocs.tsv`: meta id, label, term, count (`-` 0 when empty)
//! - `index/postings.tsv`: term, meta id, tf
//! - `coarse/vocab.tsv`: `n_docs <N>` header, then term, df
//! - `coarse/model.txt`: header lines, then `class <id> <w0> <w1> ...`
//! - `manifest.txt`: format line, `group <id> <key> <vertical|none>`,
//!   `sha256 <hex> <path>`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cascade::{CascadeModel, Vertical};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::linear_svm::{LinearModel, Multiclass};
use crate::proximity_knn::{MetaDocument, ProximityIndex};
use crate::scalar::Scalar;
use crate::textprep::{StopList, TextPipeline};
use crate::title_cluster::{Cluster, ClusterLabel, ClusterMember, ClusterSet};
use crate::vectorspace::{SparseVector, TfIdfModel, Vocabulary};

const MANIFEST_HEADER: &str = "cascade-titles manifest v1";
const MODEL_HEADER: &str = "cascade-titles linear-model v1";

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io_at(parent, e))?;
    }
    fs::write(path, content).map_err(|e| Error::io_at(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io_at(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Format(format!("{}:{line}: {}", path.display(), msg.into()))
}

fn parse_float<T: Scalar>(path: &Path, line: usize, s: &str) -> Result<T> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad float {s:?}")))?;
    Ok(T::from_f64_lossy(v))
}

// ---------------------------------------------------------------------
// Cluster sets
// ---------------------------------------------------------------------

pub fn save_cluster_set<T: Scalar>(set: &ClusterSet<T>, dir: &Path) -> Result<()> {
    let mut labels = String::new();
    let mut memberships = String::new();
    for (label_id, cluster) in set.clusters.iter().enumerate() {
        let term_index = cluster
            .label
            .label_vector
            .iter()
            .next()
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Validation("cluster label has empty vector".into()))?;
        writeln!(
            labels,
            "{label_id}\t{}\t{term_index}\t{}",
            cluster.label.source_component, cluster.label.phrase
        )
        .expect("string write");
        for member in &cluster.members {
            writeln!(
                memberships,
                "{}\t{label_id}\t{}",
                member.doc_id, member.similarity
            )
            .expect("string write");
        }
    }
    let mut other = String::new();
    for id in &set.other_bucket {
        writeln!(other, "{id}").expect("string write");
    }
    write_file(&dir.join("labels.tsv"), &labels)?;
    write_file(&dir.join("memberships.tsv"), &memberships)?;
    write_file(&dir.join("other.tsv"), &other)
}

pub fn load_cluster_set<T: Scalar>(dir: &Path) -> Result<ClusterSet<T>> {
    let labels_path = dir.join("labels.tsv");
    let mut clusters: Vec<Cluster<T>> = Vec::new();
    for (no, line) in read_file(&labels_path)?.lines().enumerate() {
        let lineno = no + 1;
        let mut parts = line.splitn(4, '\t');
        let (id, comp, term_index, phrase) =
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => return Err(parse_err(&labels_path, lineno, "expected 4 fields")),
            };
        let id: usize = id
            .parse()
            .map_err(|_| parse_err(&labels_path, lineno, "bad label id"))?;
        if id != clusters.len() {
            return Err(parse_err(
                &labels_path,
                lineno,
                "label ids must be sequential",
            ));
        }
        let source_component: usize = comp
            .parse()
            .map_err(|_| parse_err(&labels_path, lineno, "bad component"))?;
        let term_index: usize = term_index
            .parse()
            .map_err(|_| parse_err(&labels_path, lineno, "bad term index"))?;
        clusters.push(Cluster {
            label: ClusterLabel {
                phrase: phrase.to_string(),
                label_vector: SparseVector::basis(term_index),
                source_component,
            },
            members: Vec::new(),
        });
    }
    let members_path = dir.join("memberships.tsv");
    for (no, line) in read_file(&members_path)?.lines().enumerate() {
        let lineno = no + 1;
        let mut parts = line.splitn(3, '\t');
        let (doc_id, label_id, sim) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(parse_err(&members_path, lineno, "expected 3 fields")),
        };
        let label_id: usize = label_id
            .parse()
            .map_err(|_| parse_err(&members_path, lineno, "bad label id"))?;
        let cluster = clusters
            .get_mut(label_id)
            .ok_or_else(|| parse_err(&members_path, lineno, "label id out of range"))?;
        cluster.members.push(ClusterMember {
            doc_id: doc_id.to_string(),
            similarity: parse_float(&members_path, lineno, sim)?,
        });
    }
    let other_bucket = read_file(&dir.join("other.tsv"))?
        .lines()
        .map(str::to_string)
        .collect();
    Ok(ClusterSet {
        clusters,
        other_bucket,
    })
}

// ---------------------------------------------------------------------
// Proximity indices
// ---------------------------------------------------------------------

pub fn save_proximity_index<T: Scalar>(index: &ProximityIndex<T>, dir: &Path) -> Result<()> {
    let mut metadocs = String::new();
    for (mid, meta) in index.meta_docs().iter().enumerate() {
        if meta.term_counts.is_empty() {
            writeln!(metadocs, "{mid}\t{}\t-\t0", meta.label).expect("string write");
        }
        for (term, count) in &meta.term_counts {
            writeln!(metadocs, "{mid}\t{}\t{term}\t{count}", meta.label).expect("string write");
        }
    }
    let mut postings = String::new();
    for (term, plist) in index.postings() {
        for (mid, tf) in plist {
            writeln!(postings, "{term}\t{mid}\t{tf}").expect("string write");
        }
    }
    write_file(&dir.join("metadocs.tsv"), &metadocs)?;
    write_file(&dir.join("postings.tsv"), &postings)
}

pub fn load_proximity_index<T: Scalar>(dir: &Path) -> Result<ProximityIndex<T>> {
    let meta_path = dir.join("metadocs.tsv");
    let mut metas: Vec<MetaDocument> = Vec::new();
    for (no, line) in read_file(&meta_path)?.lines().enumerate() {
        let lineno = no + 1;
        let mut parts = line.splitn(4, '\t');
        let (mid, label, term, count) =
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => return Err(parse_err(&meta_path, lineno, "expected 4 fields")),
            };
        let mid: usize = mid
            .parse()
            .map_err(|_| parse_err(&meta_path, lineno, "bad meta id"))?;
        if mid == metas.len() {
            metas.push(MetaDocument {
                label: label.to_string(),
                term_counts: BTreeMap::new(),
            });
        } else if mid + 1 != metas.len() {
            return Err(parse_err(&meta_path, lineno, "meta ids must be sequential"));
        }
        let count: u32 = count
            .parse()
            .map_err(|_| parse_err(&meta_path, lineno, "bad count"))?;
        if term == "-" && count == 0 {
            continue; // placeholder row for an empty meta-document
        }
        metas
            .last_mut()
            .expect("pushed above")
            .term_counts
            .insert(term.to_string(), count);
    }
    let index = ProximityIndex::from_meta_docs(metas)?;

    // Cross-check the persisted postings against the rebuilt ones.
    let postings_path = dir.join("postings.tsv");
    let mut persisted: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
    for (no, line) in read_file(&postings_path)?.lines().enumerate() {
        let lineno = no + 1;
        let mut parts = line.splitn(3, '\t');
        let (term, mid, tf) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(parse_err(&postings_path, lineno, "expected 3 fields")),
        };
        let mid: usize = mid
            .parse()
            .map_err(|_| parse_err(&postings_path, lineno, "bad meta id"))?;
        let tf: u32 = tf
            .parse()
            .map_err(|_| parse_err(&postings_path, lineno, "bad tf"))?;
        persisted
            .entry(term.to_string())
            .or_default()
            .push((mid, tf));
    }
    if &persisted != index.postings() {
        return Err(Error::Integrity(format!(
            "{}: postings disagree with meta-document term counts",
            postings_path.display()
        )));
    }
    Ok(index)
}

// ---------------------------------------------------------------------
// Linear models and vocabularies
// ---------------------------------------------------------------------

fn strategy_name(m: Multiclass) -> &'static str {
    match m {
        Multiclass::OneVsAll => "ova",
        Multiclass::CrammerSinger => "crammer-singer",
    }
}

pub fn save_linear_model<T: Scalar>(model: &LinearModel<T>, path: &Path) -> Result<()> {
    model.validate()?;
    let mut out = String::new();
    writeln!(out, "{MODEL_HEADER}").expect("string write");
    writeln!(out, "strategy {}", strategy_name(model.strategy)).expect("string write");
    writeln!(out, "c {}", model.c).expect("string write");
    writeln!(out, "bias {}", model.bias).expect("string write");
    writeln!(out, "converged {}", model.converged).expect("string write");
    writeln!(out, "n_features {}", model.n_features()).expect("string write");
    writeln!(out, "n_classes {}", model.classes.len()).expect("string write");
    for (class, w) in model.classes.iter().zip(&model.weights) {
        write!(out, "class {class}").expect("string write");
        for v in w {
            write!(out, " {v}").expect("string write");
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn load_linear_model<T: Scalar>(path: &Path) -> Result<LinearModel<T>> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    if header != MODEL_HEADER {
        return Err(Error::Format(format!(
            "{}: unrecognized model header {header:?}",
            path.display()
        )));
    }
    let mut strategy = None;
    let mut c = None;
    let mut bias = None;
    let mut converged = None;
    let mut n_features = None;
    let mut n_classes = None;
    let mut classes = Vec::new();
    let mut weights: Vec<Vec<T>> = Vec::new();
    for (no, line) in lines {
        let lineno = no + 1;
        let mut parts = line.split(' ');
        let key = parts.next().unwrap_or_default();
        match key {
            "strategy" => {
                strategy = Some(match parts.next() {
                    Some("ova") => Multiclass::OneVsAll,
                    Some("crammer-singer") => Multiclass::CrammerSinger,
                    other => {
                        return Err(parse_err(path, lineno, format!("bad strategy {other:?}")))
                    }
                })
            }
            "c" => {
                c = Some(parse_float::<T>(
                    path,
                    lineno,
                    parts.next().unwrap_or_default(),
                )?)
            }
            "bias" => {
                bias = Some(parts.next() == Some("true"));
            }
            "converged" => {
                converged = Some(parts.next() == Some("true"));
            }
            "n_features" => {
                n_features = Some(
                    parts
                        .next()
                        .unwrap_or_default()
                        .parse::<usize>()
                        .map_err(|_| parse_err(path, lineno, "bad n_features"))?,
                )
            }
            "n_classes" => {
                n_classes = Some(
                    parts
                        .next()
                        .unwrap_or_default()
                        .parse::<usize>()
                        .map_err(|_| parse_err(path, lineno, "bad n_classes"))?,
                )
            }
            "class" => {
                let id: i32 = parts
                    .next()
                    .unwrap_or_default()
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "bad class id"))?;
                let mut w = Vec::new();
                for tok in parts {
                    w.push(parse_float::<T>(path, lineno, tok)?);
                }
                classes.push(id);
                weights.push(w);
            }
            "" => continue,
            other => return Err(parse_err(path, lineno, format!("unknown key {other:?}"))),
        }
    }
    let model = LinearModel {
        classes,
        weights,
        c: c.ok_or_else(|| Error::Format(format!("{}: missing c", path.display())))?,
        bias: bias.unwrap_or(false),
        strategy: strategy
            .ok_or_else(|| Error::Format(format!("{}: missing strategy", path.display())))?,
        converged: converged.unwrap_or(true),
    };
    model.validate()?;
    if let Some(n) = n_features {
        if model.n_features() != n {
            return Err(Error::Integrity(format!(
                "{}: header says {n} features, rows have {}",
                path.display(),
                model.n_features()
            )));
        }
    }
    if let Some(n) = n_classes {
        if model.classes.len() != n {
            return Err(Error::Integrity(format!(
                "{}: header says {n} classes, found {}",
                path.display(),
                model.classes.len()
            )));
        }
    }
    Ok(model)
}

pub fn save_vocabulary(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "n_docs\t{}", vocab.n_docs()).expect("string write");
    for i in 0..vocab.len() {
        writeln!(out, "{}\t{}", vocab.term(i), vocab.document_frequency(i)).expect("string write");
    }
    write_file(path, &out)
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty vocabulary", path.display())))?;
    let n_docs: usize = header
        .strip_prefix("n_docs\t")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(path, 1, "expected n_docs header"))?;
    let mut rows = Vec::new();
    for (no, line) in lines {
        let lineno = no + 1;
        let (term, df) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, lineno, "expected 2 fields"))?;
        let df: u32 = df
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad document frequency"))?;
        rows.push((term.to_string(), df));
    }
    Vocabulary::from_rows(rows, n_docs)
}

// ---------------------------------------------------------------------
// Cascade directories
// ---------------------------------------------------------------------

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("string write");
    }
    hex
}

/// Relative paths of every cascade data file, sorted.
fn cascade_files<T>(model: &CascadeModel<T>) -> Vec<PathBuf> {
    let mut files = vec![
        PathBuf::from("config.toml"),
        PathBuf::from("stops.txt"),
        PathBuf::from("coarse/model.txt"),
        PathBuf::from("coarse/vocab.tsv"),
    ];
    for key in model.verticals.keys() {
        for name in [
            "clusters/labels.tsv",
            "clusters/memberships.tsv",
            "clusters/other.tsv",
            "index/metadocs.tsv",
            "index/postings.tsv",
        ] {
            files.push(PathBuf::from(format!("verticals/{key}/{name}")));
        }
    }
    files.sort();
    files
}

/// Writes the cascade directory tree and its checksum manifest.
pub fn save_cascade<T: Scalar>(model: &CascadeModel<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    write_file(&dir.join("config.toml"), &model.config.to_toml())?;
    let mut stops = String::new();
    for word in model.pipeline.stops.iter() {
        writeln!(stops, "{word}").expect("string write");
    }
    write_file(&dir.join("stops.txt"), &stops)?;
    save_linear_model(&model.coarse, &dir.join("coarse/model.txt"))?;
    save_vocabulary(model.features.vocabulary(), &dir.join("coarse/vocab.tsv"))?;
    for (key, vertical) in &model.verticals {
        let base = dir.join("verticals").join(key);
        save_cluster_set(&vertical.clusters, &base.join("clusters"))?;
        save_proximity_index(&vertical.index, &base.join("index"))?;
    }

    let mut manifest = String::new();
    writeln!(manifest, "{MANIFEST_HEADER}").expect("string write");
    for (class_id, key) in model.group_keys.iter().enumerate() {
        let marker = if model.verticals.contains_key(key) {
            "vertical"
        } else {
            "none"
        };
        writeln!(manifest, "group {class_id} {key} {marker}").expect("string write");
    }
    for rel in cascade_files(model) {
        let bytes = fs::read(dir.join(&rel)).map_err(|e| Error::io_at(dir.join(&rel), e))?;
        writeln!(manifest, "sha256 {} {}", sha256_hex(&bytes), rel.display())
            .expect("string write");
    }
    write_file(&dir.join("manifest.txt"), &manifest)
}

/// Loads a cascade directory, verifying every checksum in the manifest.
pub fn load_cascade<T: Scalar>(dir: &Path) -> Result<CascadeModel<T>> {
    let manifest_path = dir.join("manifest.txt");
    let manifest = read_file(&manifest_path)?;
    let mut lines = manifest.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    if header != MANIFEST_HEADER {
        return Err(Error::Integrity(format!(
            "{}: unrecognized manifest header {header:?}",
            manifest_path.display()
        )));
    }
    let mut groups: Vec<(usize, String, bool)> = Vec::new();
    let mut checked_any = false;
    for (no, line) in lines {
        let lineno = no + 1;
        let fields: Vec<&str> = line.split(' ').collect();
        match fields.as_slice() {
            ["group", id, key, marker] => {
                let id: usize = id
                    .parse()
                    .map_err(|_| parse_err(&manifest_path, lineno, "bad class id"))?;
                let vertical = match *marker {
                    "vertical" => true,
                    "none" => false,
                    other => {
                        return Err(parse_err(
                            &manifest_path,
                            lineno,
                            format!("bad vertical marker {other:?}"),
                        ))
                    }
                };
                groups.push((id, key.to_string(), vertical));
            }
            ["sha256", hex, rel] => {
                let path = dir.join(rel);
                let bytes = fs::read(&path).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => {
                        Error::Integrity(format!("{}: listed file missing", path.display()))
                    }
                    _ => Error::io_at(&path, e),
                })?;
                let actual = sha256_hex(&bytes);
                if actual != *hex {
                    return Err(Error::Integrity(format!(
                        "{}: checksum mismatch (manifest {hex}, file {actual})",
                        path.display()
                    )));
                }
                checked_any = true;
            }
            [""] => continue,
            _ => {
                return Err(parse_err(
                    &manifest_path,
                    lineno,
                    "unrecognized manifest line",
                ))
            }
        }
    }
    if !checked_any {
        return Err(Error::Integrity(format!(
            "{}: manifest lists no checksums",
            manifest_path.display()
        )));
    }
    groups.sort();
    for (expect, (id, _, _)) in groups.iter().enumerate() {
        if *id != expect {
            return Err(Error::Integrity(format!(
                "{}: group class ids are not sequential",
                manifest_path.display()
            )));
        }
    }

    let config = Config::from_toml(&read_file(&dir.join("config.toml"))?)?;
    let stops = StopList::from_file(dir.join("stops.txt"))?;
    let pipeline = TextPipeline {
        stops,
        exceptions: config.exceptions.iter().cloned().collect(),
        max_n: 2,
    };
    let coarse = load_linear_model::<T>(&dir.join("coarse/model.txt"))?;
    let vocab = load_vocabulary(&dir.join("coarse/vocab.tsv"))?;
    let expected_features = vocab.len() + usize::from(config.bias);
    if coarse.n_features() != expected_features {
        return Err(Error::Integrity(format!(
            "coarse model has {} features but the vocabulary implies {expected_features}",
            coarse.n_features()
        )));
    }
    let features = TfIdfModel::from_vocabulary(vocab);

    let mut group_keys = Vec::with_capacity(groups.len());
    let mut verticals = BTreeMap::new();
    for (_, key, has_vertical) in groups {
        if has_vertical {
            let base = dir.join("verticals").join(&key);
            let clusters = load_cluster_set::<T>(&base.join("clusters"))?;
            let index = load_proximity_index::<T>(&base.join("index"))?;
            verticals.insert(key.clone(), Vertical { clusters, index });
        }
        group_keys.push(key);
    }
    if coarse.classes.len() != group_keys.len() {
        return Err(Error::Integrity(format!(
            "coarse model has {} classes but the manifest lists {} groups",
            coarse.classes.len(),
            group_keys.len()
        )));
    }

    Ok(CascadeModel {
        coarse,
        features,
        pipeline,
        group_keys,
        verticals,
        aliases: config.aliases.clone(),
        config,
        build_notes: Vec::new(),
    })
}
