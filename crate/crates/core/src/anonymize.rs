//! Span masking with the six placeholder tags.
//!
//! Entity spans come from an external NER pass as JSON Lines
//! (`{"segment_id","start","end","label","score"}`), with offsets counted in
//! Unicode scalar values of the segment text. Masking replaces each span with
//! `<LABEL>`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{word_count, Segment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityLabel {
    Organization,
    Person,
    Location,
    Email,
    Date,
    Id,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 6] = [
        EntityLabel::Organization,
        EntityLabel::Person,
        EntityLabel::Location,
        EntityLabel::Email,
        EntityLabel::Date,
        EntityLabel::Id,
    ];

    /// Canonical label name; the spelling `ORGANIZAZZIONE` is the established tag.
    pub fn name(self) -> &'static str {
        match self {
            EntityLabel::Organization => "ORGANIZAZZIONE",
            EntityLabel::Person => "PERSONA",
            EntityLabel::Location => "LOCALITÀ",
            EntityLabel::Email => "EMAIL",
            EntityLabel::Date => "DATA",
            EntityLabel::Id => "ID",
        }
    }

    pub fn tag(self) -> String {
        format!("<{}>", self.name())
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityLabel {
    type Err = Error;

    /// Accepts the canonical names plus common aliases (English names,
    /// `ORGANIZZAZIONE`, `LOCALITA`), case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_uppercase();
        let label = match up.as_str() {
            "ORGANIZAZZIONE" | "ORGANIZZAZIONE" | "ORGANIZATION" | "ORG" => EntityLabel::Organization,
            "PERSONA" | "PERSON" | "PER" => EntityLabel::Person,
            "LOCALITÀ" | "LOCALITA" | "LOCATION" | "LOC" => EntityLabel::Location,
            "EMAIL" | "PEC" => EntityLabel::Email,
            "DATA" | "DATE" => EntityLabel::Date,
            "ID" => EntityLabel::Id,
            _ => return Err(Error::invalid(format!("unknown entity label {s:?}"))),
        };
        Ok(label)
    }
}

impl Serialize for EntityLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EntityLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rendered tag per label. Defaults to `<NAME>`; entries can be overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct TagTable {
    tags: BTreeMap<EntityLabel, String>,
}

impl Default for TagTable {
    fn default() -> Self {
        TagTable {
            tags: EntityLabel::ALL.iter().map(|l| (*l, l.tag())).collect(),
        }
    }
}

impl TagTable {
    pub fn with_alias(mut self, label: EntityLabel, tag: impl Into<String>) -> Self {
        self.tags.insert(label, tag.into());
        self
    }

    pub fn tag(&self, label: EntityLabel) -> &str {
        &self.tags[&label]
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.values().map(String::as_str)
    }
}

/// Half-open `[start, end)` span in Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub segment_id: String,
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
    pub score: f64,
}

impl EntitySpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    fn check_bounds(&self, text_len: usize) -> Result<()> {
        if self.start >= self.end || self.end > text_len {
            return Err(Error::invalid(format!(
                "span [{}, {}) of {} is out of range for text of length {}",
                self.start, self.end, self.segment_id, text_len
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::invalid(format!(
                "span [{}, {}) of {} has score {} outside [0, 1]",
                self.start, self.end, self.segment_id, self.score
            )));
        }
        Ok(())
    }
}

/// Thresholds spans and keeps a disjoint subset, sorted by start.
///
/// Overlap conflicts are won by higher score, then the longer span, then the
/// earlier start.
pub fn resolve_overlaps(
    spans: &[EntitySpan],
    threshold: f64,
    text_len: usize,
) -> Result<Vec<EntitySpan>> {
    for s in spans {
        s.check_bounds(text_len)?;
    }
    let mut ranked: Vec<&EntitySpan> = spans.iter().filter(|s| s.score >= threshold).collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(b.len().cmp(&a.len()))
            .then(a.start.cmp(&b.start))
    });
    let mut kept: Vec<EntitySpan> = Vec::new();
    for s in ranked {
        if kept.iter().all(|k| !k.overlaps(s)) {
            kept.push(s.clone());
        }
    }
    kept.sort_by_key(|s| s.start);
    Ok(kept)
}

/// Replaces each span with its tag. Spans must be sorted, disjoint and in range.
pub fn mask(text: &str, spans: &[EntitySpan], tags: &TagTable) -> Result<String> {
    // byte offset of every char boundary, plus the end
    let boundaries: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = boundaries.len() - 1;
    for s in spans {
        s.check_bounds(n_chars)?;
    }
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::invalid(format!(
                "spans [{}, {}) and [{}, {}) overlap or are unsorted; resolve overlaps first",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    let mut out = text.to_string();
    for s in spans.iter().rev() {
        out.replace_range(boundaries[s.start]..boundaries[s.end], tags.tag(s.label));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MaskReport {
    pub segments_masked: usize,
    pub spans_applied: usize,
    pub spans_below_threshold_or_overlapping: usize,
    pub per_label: BTreeMap<String, usize>,
}

/// Masks the text of every segment that has spans; word counts are refreshed.
pub fn anonymize_segments(
    segments: &mut [Segment],
    spans: &[EntitySpan],
    threshold: f64,
    tags: &TagTable,
) -> Result<MaskReport> {
    let index: HashMap<&str, usize> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| (s.segment_id.as_str(), i))
        .collect();
    let mut grouped: BTreeMap<usize, Vec<EntitySpan>> = BTreeMap::new();
    for s in spans {
        let &i = index.get(s.segment_id.as_str()).ok_or_else(|| {
            Error::invalid(format!("span references unknown segment {:?}", s.segment_id))
        })?;
        grouped.entry(i).or_default().push(s.clone());
    }

    let mut report = MaskReport::default();
    for (i, group) in grouped {
        let seg = &mut segments[i];
        let text_len = seg.text.chars().count();
        let kept = resolve_overlaps(&group, threshold, text_len)?;
        report.spans_below_threshold_or_overlapping += group.len() - kept.len();
        if kept.is_empty() {
            continue;
        }
        seg.text = mask(&seg.text, &kept, tags)?;
        seg.word_count = word_count(&seg.text);
        report.segments_masked += 1;
        report.spans_applied += kept.len();
        for s in &kept {
            *report.per_label.entry(s.label.name().to_string()).or_default() += 1;
        }
    }
    Ok(report)
}
