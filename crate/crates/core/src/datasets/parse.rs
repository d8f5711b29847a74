use std::collections::HashMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Stream, Streams};
use crate::error::{Error, Result};
use crate::models::{EngagementLabel, EventModel, EventTopic, KnowledgeComponent, MAX_TOPICS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicColumns {
    pub id: String,
    pub coverage: String,
}

/// Names the CSV columns that hold each interaction field.
///
/// Files without a header row are read with `columns` as their header.
/// `has_header: null` detects a header by checking whether the first row
/// contains every mapped column name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    #[serde(default)]
    pub has_header: Option<bool>,
    #[serde(default)]
    pub columns: Vec<String>,
    pub learner_id: String,
    pub video_id: String,
    pub part: String,
    pub timestamp: String,
    pub topics: Vec<TopicColumns>,
    pub label: String,
}

impl Default for ColumnMapping {
    /// Layout of the published PEEK CSVs.
    fn default() -> Self {
        let mut columns: Vec<String> = ["slug", "vid_id", "part", "time", "session"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let topics: Vec<TopicColumns> = (1..=MAX_TOPICS)
            .map(|i| TopicColumns {
                id: format!("topic_{i}_id"),
                coverage: format!("topic_{i}_coverage"),
            })
            .collect();
        for t in &topics {
            columns.push(t.id.clone());
            columns.push(t.coverage.clone());
        }
        columns.push("label".to_string());
        ColumnMapping {
            has_header: None,
            columns,
            learner_id: "session".into(),
            video_id: "vid_id".into(),
            part: "part".into(),
            timestamp: "time".into(),
            topics,
            label: "label".into(),
        }
    }
}

impl ColumnMapping {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn mapped_names(&self) -> Vec<&str> {
        let mut names = vec![
            self.learner_id.as_str(),
            self.video_id.as_str(),
            self.part.as_str(),
            self.timestamp.as_str(),
            self.label.as_str(),
        ];
        for t in &self.topics {
            names.push(&t.id);
            names.push(&t.coverage);
        }
        names
    }
}

/// Knowledge-component titles (and descriptions) by id.
pub type KcTitles = HashMap<u64, (String, Option<String>)>;

/// Reads an `id,url,title,description` mapping file with a header row.
pub fn load_titles(path: &Path) -> Result<KcTitles> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| with_path(e, path))?;
    let mut titles = KcTitles::new();
    for record in reader.records() {
        let record = record?;
        let Some(id) = record.get(0).and_then(parse_id) else {
            continue;
        };
        let title = record.get(2).unwrap_or("").trim();
        if title.is_empty() {
            continue;
        }
        let description = record.get(3).map(str::trim).filter(|d| !d.is_empty()).map(String::from);
        titles.insert(id, (title.to_string(), description));
    }
    Ok(titles)
}

fn with_path(e: csv::Error, path: &Path) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::io(path, std::io::Error::new(io.kind(), io.to_string())),
        _ => Error::Csv(e),
    }
}

/// One CSV data row, before it becomes an event.
#[derive(Clone, Debug, PartialEq)]
pub struct RawInteractionRow {
    pub learner_id: String,
    pub video_id: String,
    pub part: u32,
    pub timestamp: f64,
    pub topics: Vec<(u64, f64)>,
    pub label: u8,
}

/// A rejected data row, reported as a JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_no: u64,
    pub reason: String,
    pub raw: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedFile {
    pub path: PathBuf,
    pub streams: Streams,
    pub rejects: Vec<Reject>,
    pub rows: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Parsed {
    pub streams: Streams,
    pub rejects: Vec<(PathBuf, Vec<Reject>)>,
    pub rows: usize,
}

impl Parsed {
    pub fn event_count(&self) -> usize {
        self.streams.values().map(Vec::len).sum()
    }

    pub fn reject_count(&self) -> usize {
        self.rejects.iter().map(|(_, r)| r.len()).sum()
    }
}

fn parse_id(s: &str) -> Option<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    // Ids are sometimes written as floats ("123.0").
    let f: f64 = s.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 9.0e15).then_some(f as u64)
}

fn parse_number(field: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("column `{name}`: `{field}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("column `{name}`: `{field}` is not finite"))
    }
}

struct Indices {
    learner: usize,
    video: usize,
    part: usize,
    time: usize,
    label: usize,
    topics: Vec<(usize, usize)>,
}

impl Indices {
    fn resolve(mapping: &ColumnMapping, header: &[String]) -> Result<Self> {
        let find = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
                available: header.to_vec(),
            })
        };
        Ok(Indices {
            learner: find(&mapping.learner_id)?,
            video: find(&mapping.video_id)?,
            part: find(&mapping.part)?,
            time: find(&mapping.timestamp)?,
            label: find(&mapping.label)?,
            topics: mapping
                .topics
                .iter()
                .map(|t| Ok((find(&t.id)?, find(&t.coverage)?)))
                .collect::<Result<_>>()?,
        })
    }

    fn row(&self, record: &csv::StringRecord) -> std::result::Result<RawInteractionRow, String> {
        let get = |i: usize| record.get(i).ok_or_else(|| format!("row has {} fields", record.len()));
        let learner_id = get(self.learner)?.trim().to_string();
        if learner_id.is_empty() {
            return Err("empty learner id".into());
        }
        let part = parse_number(get(self.part)?, "part")?;
        if part < 1.0 || part.fract() != 0.0 || part > u32::MAX as f64 {
            return Err(format!("part `{part}` is not a positive integer"));
        }
        let timestamp = parse_number(get(self.time)?, "timestamp")?;
        let label = match parse_number(get(self.label)?, "label")? {
            0.0 => 0,
            1.0 => 1,
            v => return Err(format!("label `{v}` is not binary")),
        };
        let mut topics = Vec::new();
        for &(id_col, cov_col) in &self.topics {
            let raw_id = get(id_col)?.trim();
            let raw_cov = get(cov_col)?.trim();
            if raw_id.is_empty() || raw_id == "-1" || raw_id == "-1.0" {
                continue;
            }
            let id = parse_id(raw_id).ok_or_else(|| format!("topic id `{raw_id}` is invalid"))?;
            let coverage = parse_number(raw_cov, "coverage")?;
            if coverage < 0.0 {
                return Err(format!("coverage `{coverage}` is negative"));
            }
            if coverage == 0.0 {
                continue;
            }
            if topics.iter().any(|&(t, _)| t == id) {
                return Err(format!("topic {id} listed twice"));
            }
            topics.push((id, coverage));
        }
        if topics.is_empty() {
            return Err("no topic with positive coverage".into());
        }
        Ok(RawInteractionRow {
            learner_id,
            video_id: get(self.video)?.trim().to_string(),
            part: part as u32,
            timestamp,
            topics,
            label,
        })
    }
}

fn to_event(row: &RawInteractionRow, titles: Option<&KcTitles>) -> Result<(EventModel, EngagementLabel)> {
    let topics = row
        .topics
        .iter()
        .map(|&(id, coverage)| {
            let kc = match titles.and_then(|t| t.get(&id)) {
                Some((title, description)) => {
                    let kc = KnowledgeComponent::new(id, title.clone())?;
                    match description {
                        Some(d) => kc.with_description(d.clone()),
                        None => kc,
                    }
                }
                None => KnowledgeComponent::new(id, format!("topic {id}"))?,
            };
            EventTopic::new(kc, 1.0, coverage)
        })
        .collect::<Result<Vec<_>>>()?;
    let event = EventModel::with_max_topics(
        row.video_id.clone(),
        row.part,
        row.timestamp,
        topics,
        row.topics.len().max(MAX_TOPICS),
    )?;
    Ok((event, EngagementLabel::from_engaged(row.label == 1)))
}

fn raw_text(record: &csv::StringRecord) -> String {
    record.iter().collect::<Vec<_>>().join(",")
}

/// Orders a stream by timestamp, then video id, then part.
pub(crate) fn sort_stream(stream: &mut Stream) {
    stream.sort_by(|(a, _), (b, _)| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then_with(|| a.resource_id.cmp(&b.resource_id))
            .then_with(|| a.part.cmp(&b.part))
    });
}

/// Parses one interaction CSV into per-learner streams.
///
/// Unparseable rows are collected as rejects; more than 1% rejects is an
/// error.
pub fn parse_file(path: &Path, mapping: &ColumnMapping, titles: Option<&KcTitles>) -> Result<ParsedFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| with_path(e, path))?;
    let mut records = reader.records();

    let mut out = ParsedFile {
        path: path.to_path_buf(),
        ..Default::default()
    };

    let first = match records.next() {
        Some(r) => Some(r?),
        None => None,
    };
    let names = mapping.mapped_names();
    let first_is_header = match (mapping.has_header, &first) {
        (Some(h), _) => h,
        (None, Some(r)) => names.iter().all(|n| r.iter().any(|f| f.trim() == *n)),
        (None, None) => false,
    };
    let header: Vec<String> = if first_is_header {
        first
            .as_ref()
            .map(|r| r.iter().map(|f| f.trim().to_string()).collect())
            .unwrap_or_default()
    } else {
        mapping.columns.clone()
    };
    let indices = Indices::resolve(mapping, &header)?;

    let pending = if first_is_header { None } else { first };
    let handle = |record: csv::StringRecord, out: &mut ParsedFile| -> Result<()> {
        out.rows += 1;
        let line_no = record.position().map(|p| p.line()).unwrap_or(0);
        match indices.row(&record).map(|row| (to_event(&row, titles), row)) {
            Ok((Ok(event), row)) => out.streams.entry(row.learner_id).or_default().push(event),
            Ok((Err(e), _)) => out.rejects.push(Reject {
                line_no,
                reason: e.to_string(),
                raw: raw_text(&record),
            }),
            Err(reason) => out.rejects.push(Reject {
                line_no,
                reason,
                raw: raw_text(&record),
            }),
        }
        Ok(())
    };
    if let Some(r) = pending {
        handle(r, &mut out)?;
    }
    for record in records {
        match record {
            Ok(r) => handle(r, &mut out)?,
            Err(e) => {
                if !matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) {
                    return Err(e.into());
                }
                out.rows += 1;
                out.rejects.push(Reject {
                    line_no: e.position().map(|p| p.line()).unwrap_or(0),
                    reason: e.to_string(),
                    raw: String::new(),
                });
            }
        }
    }

    if out.rejects.len() * 100 > out.rows {
        return Err(Error::TooManyRejects {
            rejected: out.rejects.len(),
            total: out.rows,
        });
    }
    for stream in out.streams.values_mut() {
        sort_stream(stream);
    }
    Ok(out)
}

/// Parses several files and merges their streams by learner.
pub fn parse(files: &[PathBuf], mapping: &ColumnMapping, titles: Option<&KcTitles>) -> Result<Parsed> {
    let mut parsed = Parsed::default();
    for path in files {
        let file = parse_file(path, mapping, titles)?;
        parsed.rows += file.rows;
        for (learner, events) in file.streams {
            parsed.streams.entry(learner).or_default().extend(events);
        }
        parsed.rejects.push((file.path, file.rejects));
    }
    for stream in parsed.streams.values_mut() {
        sort_stream(stream);
    }
    Ok(parsed)
}

/// Writes streams back out as CSV with a header row, using the mapping's
/// column names.
pub fn serialize_streams(streams: &Streams, mapping: &ColumnMapping) -> Result<String> {
    let mut header = vec![
        mapping.learner_id.clone(),
        mapping.video_id.clone(),
        mapping.part.clone(),
        mapping.timestamp.clone(),
    ];
    for t in &mapping.topics {
        header.push(t.id.clone());
        header.push(t.coverage.clone());
    }
    header.push(mapping.label.clone());

    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(&header)?;
    for (learner, stream) in streams {
        for (event, label) in stream {
            let mut row = vec![
                learner.clone(),
                event.resource_id.clone(),
                event.part.to_string(),
                format!("{:?}", event.timestamp),
            ];
            for i in 0..mapping.topics.len() {
                match event.topics.get(i) {
                    Some(t) => {
                        row.push(t.kc.id.to_string());
                        row.push(format!("{:?}", t.depth));
                    }
                    None => {
                        row.push("-1".into());
                        row.push("0".into());
                    }
                }
            }
            row.push(if label.is_engaged() { "1" } else { "0" }.to_string());
            writer.write_record(&row)?;
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::io("<memory>", std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes rejects as JSON lines.
pub fn write_rejects(path: &Path, rejects: &[Reject]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    for r in rejects {
        let line = serde_json::to_string(r)?;
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
