//! Report assembly and the CSV / gnuplot renderings.

use serde::Serialize;

use crate::machine::Machine;
use crate::sizes::SizeRow;
use crate::suite::{BatchRow, OpRow, RingRow};

/// Everything one invocation measured. Sections a subcommand does not fill
/// stay empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub machine: Machine,
    pub curve: String,
    pub seed: u64,
    pub trials: usize,
    pub warmup: usize,
    pub ops: Vec<OpRow>,
    pub ring_sizes: Vec<RingRow>,
    pub batch: Vec<BatchRow>,
    pub sizes: Vec<SizeRow>,
}

/// A rectangular result with a fixed header. `series` names the column that
/// splits rows into gnuplot data blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub series: Option<usize>,
}

fn ms(x: f64) -> String {
    format!("{x:.4}")
}

impl BenchReport {
    pub fn ops_table(&self) -> Table {
        Table {
            columns: vec![
                "curve", "op", "analog", "trials", "mean_ms", "stddev_ms", "min_ms", "max_ms",
                "pairings",
            ],
            rows: self
                .ops
                .iter()
                .map(|r| {
                    vec![
                        self.curve.clone(),
                        r.op.to_owned(),
                        r.analog.to_owned(),
                        r.stats.trials.to_string(),
                        ms(r.stats.mean_ms),
                        ms(r.stats.stddev_ms),
                        ms(r.stats.min_ms),
                        ms(r.stats.max_ms),
                        r.pairings.to_string(),
                    ]
                })
                .collect(),
            series: None,
        }
    }

    pub fn ring_table(&self) -> Table {
        Table {
            columns: vec!["curve", "ring_size", "trials", "mean_ms", "stddev_ms", "pairings"],
            rows: self
                .ring_sizes
                .iter()
                .map(|r| {
                    vec![
                        self.curve.clone(),
                        r.ring_size.to_string(),
                        r.stats.trials.to_string(),
                        ms(r.stats.mean_ms),
                        ms(r.stats.stddev_ms),
                        r.pairings.to_string(),
                    ]
                })
                .collect(),
            series: None,
        }
    }

    pub fn batch_table(&self) -> Table {
        Table {
            columns: vec![
                "curve", "mode", "eta", "ring_size", "trials", "mean_ms", "stddev_ms", "pairings",
            ],
            rows: self
                .batch
                .iter()
                .map(|r| {
                    vec![
                        self.curve.clone(),
                        r.mode.as_str().to_owned(),
                        r.eta.to_string(),
                        r.ring_size.to_string(),
                        r.stats.trials.to_string(),
                        ms(r.stats.mean_ms),
                        ms(r.stats.stddev_ms),
                        r.pairings.to_string(),
                    ]
                })
                .collect(),
            series: Some(1),
        }
    }

    pub fn sizes_table(&self) -> Table {
        Table {
            columns: vec![
                "curve",
                "ring_size",
                "message_len",
                "pseudonym",
                "signature_elements",
                "signature_body",
                "signature",
                "ring",
                "tag",
                "envelope",
            ],
            rows: self
                .sizes
                .iter()
                .map(|r| {
                    let mut row = vec![self.curve.clone()];
                    row.extend(
                        [
                            r.ring_size,
                            r.message_len,
                            r.pseudonym,
                            r.signature_elements,
                            r.signature_body,
                            r.signature,
                            r.ring,
                            r.tag,
                            r.envelope,
                        ]
                        .map(|x| x.to_string()),
                    );
                    row
                })
                .collect(),
            series: None,
        }
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Whitespace-separated columns under a `#` header, one data block per
    /// series value, blocks separated by two blank lines so gnuplot's
    /// `index` selects them.
    pub fn to_gnuplot(&self, preamble: &str) -> String {
        let mut out = String::new();
        for line in preamble.lines() {
            out.push_str(&format!("# {line}\n"));
        }
        let mut blocks: Vec<(String, Vec<&Vec<String>>)> = Vec::new();
        for row in &self.rows {
            let key = self.series.map(|i| row[i].clone()).unwrap_or_default();
            match blocks.iter_mut().find(|(k, _)| *k == key) {
                Some((_, rows)) => rows.push(row),
                None => blocks.push((key, vec![row])),
            }
        }
        for (i, (key, rows)) in blocks.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            if !key.is_empty() {
                out.push_str(&format!("# index {i}: {key}\n"));
            }
            out.push_str(&format!("# {}\n", self.columns.join(" ")));
            for row in rows {
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Stats;
    use crate::suite::Mode;

    fn report() -> BenchReport {
        let stats = Stats {
            trials: 100,
            mean_ms: 1.5,
            stddev_ms: 0.25,
            min_ms: 1.0,
            max_ms: 2.0,
        };
        let row = |mode, eta, pairings| BatchRow {
            mode,
            eta,
            ring_size: 2,
            stats,
            pairings,
        };
        BenchReport {
            machine: Machine::detect(None),
            curve: "bn254".into(),
            seed: 1,
            trials: 100,
            warmup: 10,
            ops: vec![],
            ring_sizes: vec![],
            batch: vec![
                row(Mode::Single, 1, 2),
                row(Mode::Batch, 1, 2),
                row(Mode::Single, 10, 20),
                row(Mode::Batch, 10, 2),
            ],
            sizes: vec![],
        }
    }

    #[test]
    fn csv_has_fixed_header_and_one_line_per_row() {
        let csv = report().batch_table().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("curve,mode,eta,ring_size,trials,mean_ms,stddev_ms,pairings")
        );
        assert_eq!(lines.next(), Some("bn254,single,1,2,100,1.5000,0.2500,2"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn gnuplot_groups_by_mode() {
        let text = report().batch_table().to_gnuplot("machine: test");
        assert!(text.starts_with("# machine: test\n"));
        let blocks: Vec<_> = text.split("\n\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert!(blocks[0].contains("# index 0: single"));
        assert!(blocks[1].contains("bn254 batch 10 2 100 1.5000 0.2500 2"));
    }

    #[test]
    fn report_serializes_with_machine() {
        let v = serde_json::to_value(report()).unwrap();
        assert!(v["machine"]["logical_cpus"].as_u64().unwrap() >= 1);
        assert_eq!(v["batch"][3]["mode"], "batch");
    }
}
