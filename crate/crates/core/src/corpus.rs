//! Annotated documents and the label vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::text::{preprocess, TermList};

pub type LabelId = String;

/// A citation: title and abstract plus its gold labels (empty when
/// unannotated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub labels: BTreeSet<LabelId>,
}

// The wire format names the field "abstract", a reserved word in Rust.
#[derive(Serialize, Deserialize)]
struct DocumentRecord {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    labels: Vec<LabelId>,
}

impl Document {
    pub fn new(id: impl Into<String>, title: impl Into<String>, abstract_text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            labels: BTreeSet::new(),
        }
    }

    pub fn with_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<LabelId>,
    {
        self.labels = labels.into_iter().map(Into::into).collect();
        self
    }

    /// Normalized terms of title and abstract, concatenated with equal weight.
    pub fn terms(&self) -> TermList {
        preprocess(&format!("{} {}", self.title, self.abstract_text))
    }

    pub fn title_terms(&self) -> TermList {
        preprocess(&self.title)
    }

    pub fn to_json_line(&self) -> String {
        let record = DocumentRecord {
            id: self.id.clone(),
            title: self.title.clone(),
            abstract_text: self.abstract_text.clone(),
            labels: self.labels.iter().cloned().collect(),
        };
        serde_json::to_string(&record).expect("document serializes")
    }
}

/// Raw term counts of a document's title and abstract.
pub fn term_vector(doc: &Document) -> BTreeMap<String, u32> {
    count_terms(doc.terms().iter())
}

pub(crate) fn count_terms<'a>(terms: impl Iterator<Item = &'a String>) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in terms {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    counts
}

/// Parses a JSON Lines corpus. Blank lines are skipped.
pub fn parse_corpus(reader: impl BufRead) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.id.is_empty() {
            return Err(Error::MalformedLine {
                line: line_no,
                message: "empty document id".into(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateDocument(record.id));
        }
        docs.push(Document {
            id: record.id,
            title: record.title,
            abstract_text: record.abstract_text,
            labels: record.labels.into_iter().collect(),
        });
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(BufReader::new(file))
}

pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for doc in docs {
        writeln!(w, "{}", doc.to_json_line()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A controlled-vocabulary descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEntry {
    pub preferred_name: String,
    /// Synonyms; never contains the preferred name.
    pub entry_terms: Vec<String>,
    pub(crate) name_terms: Vec<String>,
    pub(crate) entry_term_terms: Vec<Vec<String>>,
}

impl LabelEntry {
    pub fn new(preferred_name: impl Into<String>, entry_terms: Vec<String>) -> Result<Self> {
        let preferred_name = preferred_name.into();
        if preferred_name.trim().is_empty() {
            return Err(Error::MalformedVocabulary("empty preferred name".into()));
        }
        let folded = preferred_name.to_lowercase();
        let mut seen = HashSet::new();
        let entry_terms: Vec<String> = entry_terms
            .into_iter()
            .filter(|e| e.to_lowercase() != folded && seen.insert(e.clone()))
            .collect();
        let name_terms = preprocess(&preferred_name).into_inner();
        // distinct normalized forms, none equal to the name's
        let mut forms = HashSet::new();
        forms.insert(name_terms.clone());
        let entry_term_terms = entry_terms
            .iter()
            .map(|e| preprocess(e).into_inner())
            .filter(|t| !t.is_empty() && forms.insert(t.clone()))
            .collect();
        Ok(LabelEntry {
            preferred_name,
            entry_terms,
            name_terms,
            entry_term_terms,
        })
    }

    /// Normalized tokens of the preferred name.
    pub fn name_terms(&self) -> &[String] {
        &self.name_terms
    }

    /// Normalized token sequences of the preferred name followed by every
    /// entry term.
    pub fn match_forms(&self) -> impl Iterator<Item = &[String]> {
        std::iter::once(self.name_terms.as_slice())
            .filter(|t| !t.is_empty())
            .chain(self.entry_term_terms.iter().map(Vec::as_slice))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelVocabulary {
    entries: BTreeMap<LabelId, LabelEntry>,
}

#[derive(Deserialize)]
struct RawEntry {
    name: String,
    #[serde(default)]
    entries: Vec<String>,
}

/// Map visitor that keeps duplicate keys so they can be reported.
struct RawVocabulary(Vec<(String, RawEntry)>);

impl<'de> Deserialize<'de> for RawVocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawVocabulary;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of label ids to {name, entries}")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, RawEntry>()? {
                    out.push((k, v));
                }
                Ok(RawVocabulary(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

impl LabelVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<LabelId>, entry: LabelEntry) -> Result<()> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::MalformedVocabulary("empty label id".into()));
        }
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateLabel(id));
        }
        self.entries.insert(id, entry);
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawVocabulary = serde_json::from_str(s).map_err(|e| Error::MalformedVocabulary(e.to_string()))?;
        let mut vocab = LabelVocabulary::new();
        for (id, entry) in raw.0 {
            let entry = LabelEntry::new(entry.name, entry.entries)
                .map_err(|_| Error::MalformedVocabulary(format!("label {id:?} has an empty name")))?;
            vocab.insert(id, entry)?;
        }
        Ok(vocab)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::Map::new();
        for (id, e) in &self.entries {
            out.insert(
                id.clone(),
                serde_json::json!({"name": e.preferred_name, "entries": e.entry_terms}),
            );
        }
        serde_json::to_string_pretty(&out).expect("vocabulary serializes")
    }

    pub fn get(&self, id: &str) -> Option<&LabelEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelId, &LabelEntry)> {
        self.entries.iter()
    }

    /// Fails on the first document label missing from the vocabulary.
    pub fn check_labels<'a>(&self, docs: impl IntoIterator<Item = &'a Document>) -> Result<()> {
        for doc in docs {
            if let Some(l) = doc.labels.iter().find(|l| !self.contains(l)) {
                return Err(Error::UnknownLabel(l.clone()));
            }
        }
        Ok(())
    }
}

pub fn load_vocabulary(path: impl AsRef<Path>) -> Result<LabelVocabulary> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LabelVocabulary::from_json_str(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_lines_in_order() {
        let input = r#"{"id":"a","title":"t","abstract":"x","labels":["L1"]}
{"id":"b","title":"u","abstract":"y"}
"#;
        let docs = parse_corpus(input.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "a");
        assert_eq!(docs[1].id, "b");
        assert!(docs[1].labels.is_empty());
    }

    #[test]
    fn empty_file() {
        assert!(parse_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let input = "{\"id\":\"a\"}\n{\"id\":\"b\"}\n{\"id\":\"a\"}\n";
        match parse_corpus(input.as_bytes()) {
            Err(Error::DuplicateDocument(id)) => assert_eq!(id, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let input = "{\"id\":\"a\"}\n{not json}\n";
        match parse_corpus(input.as_bytes()) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn term_vector_counts() {
        let d = Document::new("x", "dogs", "dog runs");
        let tv = term_vector(&d);
        assert_eq!(tv.len(), 2);
        assert_eq!(tv["dog"], 2);
        assert_eq!(tv["run"], 1);
        assert!(term_vector(&Document::new("y", "", "")).is_empty());
    }

    #[test]
    fn single_letter_term_counted() {
        // "b" is neither a stopword nor altered by the stemmer
        let tv = term_vector(&Document::new("x", "b b", ""));
        assert_eq!(tv["b"], 2);
    }

    #[test]
    fn vocabulary_single_entry() {
        let v = LabelVocabulary::from_json_str(
            r#"{"D001": {"name": "Body Mass Index", "entries": ["Quetelet Index", "body mass index"]}}"#,
        )
        .unwrap();
        assert_eq!(v.len(), 1);
        let e = v.get("D001").unwrap();
        assert_eq!(e.entry_terms, ["Quetelet Index"]);
        assert_eq!(e.name_terms(), ["bodi", "mass", "index"]);
        assert_eq!(e.match_forms().count(), 2);
    }

    #[test]
    fn vocabulary_empty() {
        assert!(LabelVocabulary::from_json_str("{}").unwrap().is_empty());
    }

    #[test]
    fn vocabulary_duplicate_id() {
        let r = LabelVocabulary::from_json_str(r#"{"D001": {"name": "A"}, "D001": {"name": "B"}}"#);
        match r {
            Err(Error::DuplicateLabel(id)) => assert_eq!(id, "D001"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vocabulary_malformed() {
        assert!(matches!(
            LabelVocabulary::from_json_str("[1,2"),
            Err(Error::MalformedVocabulary(_))
        ));
    }
}
