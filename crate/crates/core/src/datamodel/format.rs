//! JSON Lines corpus format: one object per user.
//!
//! ```text
//! {"user":"u1","clusters":["c1"],"converted":true,"conv_time":1200,"events":[{"a":"q:crm","t":1000,"k":"search"}]}
//! ```
//!
//! Event objects may carry an optional `"d"` description string; it is only
//! written when non-empty.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{
    ActivityId, ClusterId, ConversionLabel, CorpusError, Event, EventKind, TrailCorpus, UserId, UserRecord, UserTrail,
};

#[derive(Serialize)]
struct WireEvent<'a> {
    a: &'a str,
    t: u64,
    k: &'static str,
    #[serde(skip_serializing_if = "str::is_empty")]
    d: &'a str,
}

#[derive(Serialize)]
struct WireRecord<'a> {
    user: &'a str,
    clusters: Vec<&'a str>,
    converted: bool,
    conv_time: Option<u64>,
    events: Vec<WireEvent<'a>>,
}

impl<'a> From<&'a UserRecord> for WireRecord<'a> {
    fn from(r: &'a UserRecord) -> Self {
        WireRecord {
            user: r.user().as_str(),
            clusters: r.clusters.iter().map(ClusterId::as_str).collect(),
            converted: r.label.converted,
            conv_time: r.label.conversion_time,
            events: r
                .trail
                .events
                .iter()
                .map(|e| WireEvent { a: e.activity.as_str(), t: e.timestamp, k: e.kind.as_str(), d: &e.description })
                .collect(),
        }
    }
}

fn field_err(line: usize, field: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::Record { line, field: field.into(), message: message.into() }
}

fn get<'v>(obj: &'v Map<String, Value>, line: usize, field: &str) -> Result<&'v Value, CorpusError> {
    obj.get(field).ok_or_else(|| field_err(line, field, "missing"))
}

fn as_str<'v>(v: &'v Value, line: usize, field: &str) -> Result<&'v str, CorpusError> {
    v.as_str().ok_or_else(|| field_err(line, field, "expected a string"))
}

fn as_timestamp(v: &Value, line: usize, field: &str) -> Result<u64, CorpusError> {
    v.as_u64().ok_or_else(|| field_err(line, field, "expected a non-negative integer"))
}

/// Parses one corpus line. `line` is the 1-based line number used in errors.
pub fn parse_record(text: &str, line: usize) -> Result<UserRecord, CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| field_err(line, "<record>", e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| field_err(line, "<record>", "expected a JSON object"))?;

    let user = as_str(get(obj, line, "user")?, line, "user")?;
    let user = UserId::new(user).map_err(|e| field_err(line, "user", e.to_string()))?;

    let clusters = get(obj, line, "clusters")?
        .as_array()
        .ok_or_else(|| field_err(line, "clusters", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let name = format!("clusters[{i}]");
            let s = as_str(c, line, &name)?;
            ClusterId::new(s).map_err(|e| field_err(line, name, e.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let converted =
        get(obj, line, "converted")?.as_bool().ok_or_else(|| field_err(line, "converted", "expected a boolean"))?;
    let conversion_time = match obj.get("conv_time") {
        None | Some(Value::Null) => None,
        Some(v) => Some(as_timestamp(v, line, "conv_time")?),
    };

    let raw_events =
        get(obj, line, "events")?.as_array().ok_or_else(|| field_err(line, "events", "expected an array"))?;
    let mut events = Vec::with_capacity(raw_events.len());
    for (i, ev) in raw_events.iter().enumerate() {
        let path = |f: &str| format!("events[{i}].{f}");
        let ev = ev.as_object().ok_or_else(|| field_err(line, format!("events[{i}]"), "expected an object"))?;
        let a = ev.get("a").ok_or_else(|| field_err(line, path("a"), "missing"))?;
        let activity = ActivityId::new(as_str(a, line, &path("a"))?).map_err(|e| field_err(line, path("a"), e.to_string()))?;
        let t = ev.get("t").ok_or_else(|| field_err(line, path("t"), "missing"))?;
        let timestamp = as_timestamp(t, line, &path("t"))?;
        let k = ev.get("k").ok_or_else(|| field_err(line, path("k"), "missing"))?;
        let k = as_str(k, line, &path("k"))?;
        let kind = EventKind::parse(k).ok_or_else(|| field_err(line, path("k"), format!("unknown event kind `{k}`")))?;
        let description = match ev.get("d") {
            None | Some(Value::Null) => String::new(),
            Some(d) => as_str(d, line, &path("d"))?.to_owned(),
        };
        events.push(Event { activity, timestamp, kind, description });
    }

    let record = UserRecord {
        trail: UserTrail { user, events },
        clusters,
        label: ConversionLabel { converted, conversion_time },
    };
    record.check().map_err(|(field, message)| field_err(line, field, message))?;
    Ok(record)
}

/// Streams records from a corpus file without materializing the corpus.
pub struct RecordReader<R> {
    lines: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        Self { lines: reader.lines(), line: 0 }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    /// `(line number, record)`
    type Item = Result<(usize, UserRecord), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            return Some(parse_record(&text, self.line).map(|r| (self.line, r)));
        }
    }
}

pub fn read_records<R: BufRead>(reader: R) -> RecordReader<R> {
    RecordReader::new(reader)
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<TrailCorpus, CorpusError> {
    let mut lines = Vec::new();
    let mut records = Vec::new();
    for item in read_records(reader) {
        let (line, record) = item?;
        lines.push(line);
        records.push(record);
    }
    TrailCorpus::build(records, |i| lines[i])
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<TrailCorpus, CorpusError> {
    read_corpus(BufReader::new(File::open(path)?))
}

pub fn write_corpus<W: Write>(corpus: &TrailCorpus, mut out: W) -> io::Result<()> {
    for r in corpus.records() {
        serde_json::to_writer(&mut out, &WireRecord::from(r))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_corpus(corpus: &TrailCorpus, path: impl AsRef<Path>) -> io::Result<()> {
    write_corpus(corpus, BufWriter::new(File::create(path)?))
}
