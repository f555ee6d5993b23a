//! Page extraction files, Western reading order and the segment table.
//!
//! A page file is the JSON unit written by the layout/OCR stage:
//!
//! ```json
//! {"page": "rg2019_123_p004",
//!  "elements": [{"bbox": [x_min, y_min, x_max, y_max], "class": "Text",
//!                "text": "...", "anonymized_text": "..."}]}
//! ```
//!
//! Filtering turns pages into [`Segment`]s: layout classes that carry no
//! running prose are dropped, then short paragraphs below a word-count
//! quantile are removed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::quantile_sorted;

/// Pixel-space box, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let coords = [x_min, y_min, x_max, y_max];
        if coords.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid(format!(
                "box {coords:?} has negative or non-finite coordinates"
            )));
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::invalid(format!(
                "degenerate box {coords:?}: need x_min < x_max and y_min < y_max"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            [a, b, c, d] => Self::new(*a, *b, *c, *d),
            _ => Err(Error::invalid(format!(
                "bbox must have 4 coordinates, got {}",
                v.len()
            ))),
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Length of the overlap of the two vertical extents (0 when disjoint).
    pub fn vertical_overlap(&self, other: &BoundingBox) -> f64 {
        (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0)
    }
}

impl Serialize for BoundingBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        BoundingBox::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

/// Layout classes produced by the document-layout model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementClass {
    Text,
    Title,
    SectionHeader,
    PageFooter,
}

impl ElementClass {
    pub const ALL: [ElementClass; 4] = [
        ElementClass::Text,
        ElementClass::Title,
        ElementClass::SectionHeader,
        ElementClass::PageFooter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementClass::Text => "Text",
            ElementClass::Title => "Title",
            ElementClass::SectionHeader => "Section-header",
            ElementClass::PageFooter => "Page-footer",
        }
    }

    /// Classes removed before topic modeling by default.
    pub fn default_dropped() -> BTreeSet<ElementClass> {
        [
            ElementClass::Title,
            ElementClass::SectionHeader,
            ElementClass::PageFooter,
        ]
        .into_iter()
        .collect()
    }
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElementClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown element class {s:?}")))
    }
}

impl Serialize for ElementClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub bbox: BoundingBox,
    pub class: ElementClass,
    pub text: String,
    pub anonymized_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageExtraction {
    pub page: String,
    pub elements: Vec<Element>,
}

impl PageExtraction {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("page serialization is infallible")
    }
}

#[derive(Deserialize)]
struct RawElement {
    bbox: Vec<f64>,
    class: String,
    text: String,
    anonymized_text: String,
}

/// Parses and validates one page file. Element errors name the element index.
pub fn parse_page(bytes: &[u8]) -> Result<PageExtraction> {
    let root: Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::invalid(format!("malformed page JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::invalid("page JSON must be an object"))?;
    let page = obj
        .get("page")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::invalid("page JSON lacks a string \"page\" field"))?
        .to_string();
    if page.is_empty() {
        return Err(Error::invalid("page name is empty"));
    }
    let raw_elements = obj
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::invalid("page JSON lacks an \"elements\" list"))?;

    let mut elements = Vec::with_capacity(raw_elements.len());
    for (i, raw) in raw_elements.iter().enumerate() {
        let raw: RawElement = serde_json::from_value(raw.clone())
            .map_err(|e| Error::invalid(format!("element {i}: {e}")))?;
        let class = raw
            .class
            .parse::<ElementClass>()
            .map_err(|e| Error::invalid(format!("element {i}: {e}")))?;
        let bbox = BoundingBox::from_slice(&raw.bbox)
            .map_err(|e| Error::invalid(format!("element {i}: {e}")))?;
        elements.push(Element {
            bbox,
            class,
            text: raw.text,
            anonymized_text: raw.anonymized_text,
        });
    }
    Ok(PageExtraction { page, elements })
}

/// Fraction of the shorter box's height that two boxes share vertically.
const ROW_OVERLAP: f64 = 0.5;

fn same_row(a: &BoundingBox, b: &BoundingBox) -> bool {
    let shorter = a.height().min(b.height());
    a.vertical_overlap(b) >= ROW_OVERLAP * shorter
}

/// Permutation that puts boxes in Western reading order.
///
/// Boxes are swept top to bottom; a box joins the current row when it
/// overlaps the row's first box by at least half of the shorter height.
/// Rows keep their top-to-bottom order, boxes inside a row go left to right.
pub fn reading_order_indices(boxes: &[BoundingBox]) -> Vec<usize> {
    let mut by_top: Vec<usize> = (0..boxes.len()).collect();
    by_top.sort_by(|&i, &j| {
        let (a, b) = (&boxes[i], &boxes[j]);
        a.y_min
            .total_cmp(&b.y_min)
            .then(a.x_min.total_cmp(&b.x_min))
    });

    let mut out = Vec::with_capacity(boxes.len());
    let mut row: Vec<usize> = Vec::new();
    for idx in by_top {
        if let Some(&anchor) = row.first() {
            if !same_row(&boxes[anchor], &boxes[idx]) {
                flush_row(&mut row, boxes, &mut out);
            }
        }
        row.push(idx);
    }
    flush_row(&mut row, boxes, &mut out);
    out
}

fn flush_row(row: &mut Vec<usize>, boxes: &[BoundingBox], out: &mut Vec<usize>) {
    row.sort_by(|&i, &j| boxes[i].x_min.total_cmp(&boxes[j].x_min));
    out.append(row);
}

/// Reorders elements in reading order.
pub fn reading_order(elements: Vec<Element>) -> Vec<Element> {
    let boxes: Vec<BoundingBox> = elements.iter().map(|e| e.bbox).collect();
    let order = reading_order_indices(&boxes);
    let mut slots: Vec<Option<Element>> = elements.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().expect("order is a permutation"))
        .collect()
}

/// One filtered paragraph: the unit fed to topic modeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub segment_id: String,
    pub doc_id: String,
    pub page_no: u32,
    pub text: String,
    pub word_count: usize,
}

impl Segment {
    pub fn new(doc_id: &str, page_no: u32, element_index: usize, text: String) -> Self {
        Segment {
            segment_id: segment_id(doc_id, page_no, element_index),
            doc_id: doc_id.to_string(),
            page_no,
            word_count: word_count(&text),
            text,
        }
    }
}

pub fn segment_id(doc_id: &str, page_no: u32, element_index: usize) -> String {
    format!("{doc_id}/p{page_no:03}/e{element_index:03}")
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// A parsed page plus its provenance inside the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct PageSource {
    pub doc_id: String,
    pub page_no: u32,
    pub page: PageExtraction,
}

#[derive(Debug, Clone)]
pub struct FilterOptions {
    pub drop_classes: BTreeSet<ElementClass>,
    /// Elements whose word count is strictly below this empirical quantile are dropped.
    pub min_quantile: f64,
    pub use_anonymized: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            drop_classes: ElementClass::default_dropped(),
            min_quantile: 0.25,
            use_anonymized: true,
        }
    }
}

/// Drops unwanted classes and short paragraphs; returns the segment table.
///
/// Elements are put in reading order first so that the `eMMM` part of a
/// segment id is the element's reading position on its page.
pub fn filter_corpus(pages: &[PageSource], opts: &FilterOptions) -> Result<Vec<Segment>> {
    if !(0.0..1.0).contains(&opts.min_quantile) {
        return Err(Error::invalid(format!(
            "min_quantile must be in [0, 1), got {}",
            opts.min_quantile
        )));
    }
    if let Some(p) = pages.iter().find(|p| p.page_no == 0) {
        return Err(Error::invalid(format!(
            "page {:?} of {:?} has page_no 0; pages are numbered from 1",
            p.page.page, p.doc_id
        )));
    }

    let mut kept = Vec::new();
    for src in pages {
        let ordered = reading_order(src.page.elements.clone());
        for (idx, el) in ordered.into_iter().enumerate() {
            if opts.drop_classes.contains(&el.class) {
                continue;
            }
            let text = if opts.use_anonymized {
                el.anonymized_text
            } else {
                el.text
            };
            kept.push(Segment::new(&src.doc_id, src.page_no, idx, text));
        }
    }
    if kept.is_empty() {
        return Err(Error::invalid("every element was filtered out: empty corpus"));
    }

    let threshold = length_threshold(&kept, opts.min_quantile);
    kept.retain(|s| s.word_count as f64 >= threshold);
    if kept.is_empty() {
        return Err(Error::invalid("every element was filtered out: empty corpus"));
    }

    let mut seen = BTreeSet::new();
    for s in &kept {
        if !seen.insert(s.segment_id.as_str()) {
            return Err(Error::invalid(format!(
                "duplicate segment id {}",
                s.segment_id
            )));
        }
    }
    Ok(kept)
}

/// The word-count value at `q` (linear interpolation over the sorted counts).
pub fn length_threshold(segments: &[Segment], q: f64) -> f64 {
    let mut counts: Vec<f64> = segments.iter().map(|s| s.word_count as f64).collect();
    counts.sort_by(f64::total_cmp);
    quantile_sorted(&counts, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot summarize an empty sample"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Summary {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub segments: usize,
    pub documents: usize,
    pub pages: usize,
    pub words_per_segment: Summary,
    pub words_per_page: Summary,
    pub pages_per_document: Summary,
}

pub fn corpus_stats(segments: &[Segment]) -> Result<CorpusStats> {
    if segments.is_empty() {
        return Err(Error::invalid("corpus is empty"));
    }
    let mut per_page: BTreeMap<(&str, u32), usize> = BTreeMap::new();
    for s in segments {
        *per_page.entry((s.doc_id.as_str(), s.page_no)).or_default() += s.word_count;
    }
    let mut per_doc: BTreeMap<&str, usize> = BTreeMap::new();
    for (doc, _) in per_page.keys() {
        *per_doc.entry(doc).or_default() += 1;
    }
    let seg_words: Vec<f64> = segments.iter().map(|s| s.word_count as f64).collect();
    let page_words: Vec<f64> = per_page.values().map(|&w| w as f64).collect();
    let doc_pages: Vec<f64> = per_doc.values().map(|&p| p as f64).collect();
    Ok(CorpusStats {
        segments: segments.len(),
        documents: per_doc.len(),
        pages: per_page.len(),
        words_per_segment: Summary::of(&seg_words)?,
        words_per_page: Summary::of(&page_words)?,
        pages_per_document: Summary::of(&doc_pages)?,
    })
}

/// Splits a page name like `rg2019_123_p004` into `("rg2019_123", Some(4))`.
///
/// The page number is the trailing digit run when it follows `_`, `-`, or one
/// of those plus `p`/`pag`/`page`. Otherwise the whole name is the document id.
pub fn split_page_name(name: &str) -> (String, Option<u32>) {
    let digits_start = name
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_digit())
        .last()
        .map(|(i, _)| i);
    let Some(start) = digits_start else {
        return (name.to_string(), None);
    };
    let Ok(page_no) = name[start..].parse::<u32>() else {
        return (name.to_string(), None);
    };
    let mut head = &name[..start];
    for marker in ["page", "pag", "p"] {
        if let Some(h) = head.strip_suffix(marker) {
            if h.ends_with(['_', '-']) {
                head = h;
                break;
            }
        }
    }
    match head.strip_suffix(['_', '-']) {
        Some(doc) if !doc.is_empty() => (doc.to_string(), Some(page_no)),
        _ => (name.to_string(), None),
    }
}

/// Loads every `*.json` page under `dir`.
///
/// Pages inside a subdirectory belong to the document named by that
/// subdirectory's relative path; pages at the top level take their document
/// id from [`split_page_name`]. Page numbers come from the page name when it
/// carries one, else from the file's position among the document's files.
pub fn load_pages(dir: &Path) -> Result<Vec<PageSource>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|x| x == "json") {
            files.push(path.to_path_buf());
        }
    }
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no page JSON files found",
            dir.display()
        )));
    }

    let mut by_doc: BTreeMap<String, Vec<(Option<u32>, PageExtraction)>> = BTreeMap::new();
    for path in files {
        let bytes = crate::io::read_bytes(&path)?;
        let page = parse_page(&bytes)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let rel_parent = path
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .filter(|p| !p.as_os_str().is_empty());
        let (doc_id, page_no) = match rel_parent {
            Some(parent) => {
                let doc = parent.to_string_lossy().replace(std::path::MAIN_SEPARATOR, "/");
                (doc, split_page_name(&page.page).1)
            }
            None => split_page_name(&page.page),
        };
        by_doc.entry(doc_id).or_default().push((page_no, page));
    }

    let mut out = Vec::new();
    for (doc_id, pages) in by_doc {
        for (pos, (page_no, page)) in pages.into_iter().enumerate() {
            out.push(PageSource {
                doc_id: doc_id.clone(),
                page_no: page_no.filter(|&n| n >= 1).unwrap_or(pos as u32 + 1),
                page,
            });
        }
    }
    Ok(out)
}
