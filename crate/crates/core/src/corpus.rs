//! Document data model, dataset ingestion and the SOC/O*NET taxonomy.
//!
//! Input datasets are UTF-8 line-delimited records, one document per line,
//! with fields `id`, `title`, optional `description`, `requirements`,
//! `soc` (an O*NET code such as `15-1132.00`) and `titles` (gold title
//! labels for multi-label evaluation).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// A four-level occupational code, e.g. `15-1132.00`.
///
/// The minor group is derived from the broad group by zeroing its final
/// digit (`1132` → minor `1130`); when the final digit is already zero
/// the two coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SocCode {
    major: u8,
    broad: u16,
    minor: u16,
    detailed: String,
}

impl SocCode {
    /// Parses the canonical `MM-BBBB.DD` rendering.
    pub fn parse(text: &str) -> Result<SocCode> {
        let err = || Error::Format(format!("SOC code {text:?} does not match MM-BBBB.DD"));
        let (mm, rest) = text.split_once('-').ok_or_else(err)?;
        let (bbbb, dd) = rest.split_once('.').ok_or_else(err)?;
        let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if mm.len() != 2 || bbbb.len() != 4 || dd.len() != 2 {
            return Err(err());
        }
        if !(all_digits(mm) && all_digits(bbbb) && all_digits(dd)) {
            return Err(err());
        }
        let major: u8 = mm.parse().map_err(|_| err())?;
        if !(11..=55).contains(&major) {
            return Err(Error::Validation(format!(
                "SOC major group {major} outside the valid range 11..=55"
            )));
        }
        let broad: u16 = bbbb.parse().map_err(|_| err())?;
        let minor = broad - broad % 10;
        Ok(SocCode {
            major,
            broad,
            minor,
            detailed: dd.to_string(),
        })
    }

    /// The two-digit top-level group, the coarse classifier's target class.
    pub fn major_group(&self) -> u8 {
        self.major
    }

    pub fn broad_group(&self) -> u16 {
        self.broad
    }

    pub fn minor_group(&self) -> u16 {
        self.minor
    }

    pub fn detailed_suffix(&self) -> &str {
        &self.detailed
    }
}

impl fmt::Display for SocCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:04}.{}", self.major, self.broad, self.detailed)
    }
}

/// A job posting.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub description: String,
    pub requirements: String,
    pub gold_soc: Option<SocCode>,
    pub gold_titles: Option<Vec<String>>,
}

impl Document {
    /// Title, description and requirements joined for full-text features.
    pub fn full_text(&self) -> String {
        let mut text = self.title.clone();
        for part in [&self.description, &self.requirements] {
            if !part.is_empty() {
                text.push(' ');
                text.push_str(part);
            }
        }
        text
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    title: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    requirements: String,
    #[serde(default)]
    soc: Option<String>,
    #[serde(default)]
    titles: Option<Vec<String>>,
}

/// An immutable, ordered collection of documents with an index from gold
/// major group to document ids.
#[derive(Debug, Clone, Default)]
pub struct DocumentSet {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
    label_index: BTreeMap<u8, Vec<String>>,
}

impl DocumentSet {
    /// Builds a set from documents, enforcing id uniqueness and nonempty
    /// titles. The label index covers exactly the documents with a gold
    /// SOC code.
    pub fn new(docs: Vec<Document>) -> Result<DocumentSet> {
        let mut by_id = HashMap::with_capacity(docs.len());
        let mut label_index: BTreeMap<u8, Vec<String>> = BTreeMap::new();
        for (i, doc) in docs.iter().enumerate() {
            validate_doc(doc)?;
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate document id {:?}",
                    doc.id
                )));
            }
            if let Some(code) = &doc.gold_soc {
                label_index
                    .entry(code.major_group())
                    .or_default()
                    .push(doc.id.clone());
            }
        }
        Ok(DocumentSet {
            docs,
            by_id,
            label_index,
        })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    /// Gold major group → ids of the documents carrying that label.
    pub fn label_index(&self) -> &BTreeMap<u8, Vec<String>> {
        &self.label_index
    }

    /// The subset whose ids are in `keep`, preserving input order.
    pub fn filtered(&self, keep: &HashSet<&str>) -> Result<DocumentSet> {
        let docs = self
            .docs
            .iter()
            .filter(|d| keep.contains(d.id.as_str()))
            .cloned()
            .collect();
        DocumentSet::new(docs)
    }
}

fn validate_doc(doc: &Document) -> Result<()> {
    if doc.id.is_empty() {
        return Err(Error::Validation("document id must be nonempty".into()));
    }
    if doc.id.chars().any(|c| c.is_control() || c == '\t') {
        return Err(Error::Validation(format!(
            "document id {:?} contains control characters",
            doc.id
        )));
    }
    if doc.title.trim().is_empty() {
        return Err(Error::Validation(format!(
            "document {:?} has an empty title",
            doc.id
        )));
    }
    Ok(())
}

/// Loads a line-delimited dataset. Records are validated and returned in
/// input order; blank lines are skipped.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<DocumentSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io_at(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let gold_soc = match raw.soc {
            Some(code) => Some(SocCode::parse(&code).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?),
            None => None,
        };
        docs.push(Document {
            id: raw.id,
            title: raw.title,
            description: raw.description,
            requirements: raw.requirements,
            gold_soc,
            gold_titles: raw.titles,
        });
    }
    DocumentSet::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn parses_the_worked_example() {
        let code = SocCode::parse("15-1132.00").unwrap();
        assert_eq!(code.major_group(), 15);
        assert_eq!(code.broad_group(), 1132);
        assert_eq!(code.minor_group(), 1130);
        assert_eq!(code.detailed_suffix(), "00");
        assert_eq!(code.to_string(), "15-1132.00");
    }

    #[test]
    fn parses_zero_group_code() {
        let code = SocCode::parse("55-0000.00").unwrap();
        assert_eq!(code.major_group(), 55);
        assert_eq!(code.broad_group(), 0);
        assert_eq!(code.minor_group(), 0);
    }

    #[test]
    fn rejects_pattern_mismatch() {
        for bad in [
            "AB-12",
            "",
            "15-1132",
            "151132.00",
            "15-11320.00",
            "5-1132.00",
        ] {
            assert!(
                matches!(SocCode::parse(bad), Err(Error::Format(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn rejects_major_out_of_range() {
        assert!(matches!(
            SocCode::parse("10-1132.00"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            SocCode::parse("56-1132.00"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn major_group_examples() {
        assert_eq!(SocCode::parse("15-1132.00").unwrap().major_group(), 15);
        assert_eq!(SocCode::parse("29-1141.00").unwrap().major_group(), 29);
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_preserves_order() {
        let f = write_lines(&[
            r#"{"id":"a","title":"Java Developer"}"#,
            r#"{"id":"b","title":"Nurse","soc":"29-1141.00"}"#,
        ]);
        let set = load_jsonl(f.path()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.docs()[0].id, "a");
        assert_eq!(set.docs()[1].id, "b");
        assert_eq!(set.label_index().get(&29).unwrap(), &vec!["b".to_string()]);
    }

    #[test]
    fn load_empty_file_is_empty_set() {
        let f = write_lines(&[]);
        let set = load_jsonl(f.path()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn load_rejects_duplicate_ids() {
        let f = write_lines(&[r#"{"id":"a","title":"x"}"#, r#"{"id":"a","title":"y"}"#]);
        let err = load_jsonl(f.path()).unwrap_err();
        assert!(err.to_string().contains("\"a\""), "{err}");
    }

    #[test]
    fn load_names_the_malformed_line() {
        let f = write_lines(&[r#"{"id":"a","title":"x"}"#, "{not json"]);
        match load_jsonl(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_rejects_unknown_fields() {
        let f = write_lines(&[r#"{"id":"a","title":"x","bogus":1}"#]);
        assert!(matches!(
            load_jsonl(f.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_jsonl("/nonexistent/data.jsonl").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.jsonl"));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(major in 11u8..=55, broad in 0u16..=9999, dd in 0u8..=99) {
            let s = format!("{major:02}-{broad:04}.{dd:02}");
            let code = SocCode::parse(&s).unwrap();
            prop_assert_eq!(code.to_string(), s);
        }

        #[test]
        fn minor_derivation_rule(major in 11u8..=55, broad in 0u16..=9999) {
            let s = format!("{major:02}-{broad:04}.00");
            let code = SocCode::parse(&s).unwrap();
            let minor = code.minor_group();
            prop_assert!(minor.is_multiple_of(10) || minor == code.broad_group());
            prop_assert_eq!(minor, broad - broad % 10);
        }
    }
}
