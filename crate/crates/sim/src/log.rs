//! Append-only event log with canonical JSONL export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Honest,
    Adversary,
    System,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub time_ms: u64,
    pub entity: String,
    pub event: String,
    pub outcome: String,
    pub origin: Origin,
    pub bytes: usize,
    /// First 8 bytes of SHA-256 over the message handled, hex; empty if none.
    pub digest: String,
    pub pairings: u64,
}

impl Record {
    /// Decision records are those where an honest entity accepted or
    /// rejected something.
    pub fn is_accept(&self) -> bool {
        self.outcome == "accept"
    }

    pub fn is_reject(&self) -> bool {
        self.outcome.starts_with("reject")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    records: Vec<Record>,
}

/// Counts derived from a log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub honest_accepts: usize,
    pub honest_rejects: usize,
    pub adversary_accepts: usize,
    pub adversary_rejects: usize,
    pub traces_matched: usize,
    pub traces_failed: usize,
    pub pairings: u64,
    pub bytes: usize,
}

impl Summary {
    pub fn false_accepts(&self) -> usize {
        self.adversary_accepts
    }

    pub fn false_rejects(&self) -> usize {
        self.honest_rejects
    }
}

impl EventLog {
    pub(crate) fn push(
        &mut self,
        time_ms: u64,
        entity: impl Into<String>,
        event: &str,
        outcome: impl Into<String>,
        origin: Origin,
        data: &[u8],
        pairings: u64,
    ) {
        let digest = if data.is_empty() {
            String::new()
        } else {
            hex::encode(&Sha256::digest(data)[..8])
        };
        self.records.push(Record {
            seq: self.records.len() as u64,
            time_ms,
            entity: entity.into(),
            event: event.to_owned(),
            outcome: outcome.into(),
            origin,
            bytes: data.len(),
            digest,
            pairings,
        });
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One JSON object per line, fields in declaration order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the JSONL export, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            records: self.records.len(),
            ..Summary::default()
        };
        for r in &self.records {
            s.pairings += r.pairings;
            s.bytes += r.bytes;
            match (r.origin, r.is_accept(), r.is_reject()) {
                (Origin::Honest, true, _) => s.honest_accepts += 1,
                (Origin::Honest, _, true) => s.honest_rejects += 1,
                (Origin::Adversary, true, _) => s.adversary_accepts += 1,
                (Origin::Adversary, _, true) => s.adversary_rejects += 1,
                _ => {}
            }
            if r.event == "trace" {
                if r.outcome.starts_with("match") {
                    s.traces_matched += 1;
                } else if !r.outcome.starts_with("skipped") {
                    s.traces_failed += 1;
                }
            }
        }
        s
    }

    /// `event,outcome,origin,count,bytes,pairings` grouped and sorted.
    pub fn to_csv_summary(&self) -> String {
        let mut groups: BTreeMap<(&str, &str, Origin), (usize, usize, u64)> = BTreeMap::new();
        for r in &self.records {
            let g = groups
                .entry((r.event.as_str(), r.outcome.as_str(), r.origin))
                .or_default();
            g.0 += 1;
            g.1 += r.bytes;
            g.2 += r.pairings;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["event", "outcome", "origin", "count", "bytes", "pairings"])
            .expect("in-memory write");
        for ((event, outcome, origin), (count, bytes, pairings)) in groups {
            let origin = serde_json::to_value(origin).expect("origin serializes");
            w.write_record([
                event,
                outcome,
                origin.as_str().unwrap_or_default(),
                &count.to_string(),
                &bytes.to_string(),
                &pairings.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}
