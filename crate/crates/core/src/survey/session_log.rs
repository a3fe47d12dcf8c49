//! Append-only session log.
//!
//! ```text
//! # meta {"...": "..."}
//! iteration	id	label	score	found	reads	estimate	decision
//! 1	532	1	1	1	1	14	continue
//! ...
//! # stop manual
//! ```
//!
//! One tab-separated row per labeled comment, written when its batch is
//! submitted. `estimate` and `decision` are the values computed after that
//! batch. Replaying the labels batch by batch against a session built from the
//! same metadata reproduces the session.

#![allow(clippy::tabs_in_doc_comments)]

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{IterationReport, SurveySession};
use crate::error::{Error, Result};

pub const HEADER: &str = "iteration\tid\tlabel\tscore\tfound\treads\testimate\tdecision";
const META: &str = "# meta ";
const MANUAL_STOP: &str = "# stop manual";

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub iteration: usize,
    pub id: usize,
    pub label: bool,
    pub score: f64,
    pub found: usize,
    pub reads: usize,
    pub estimate: usize,
    pub stop: bool,
}

impl LogRecord {
    pub fn from_report(report: &IterationReport) -> Vec<LogRecord> {
        let (reads0, found0) = (
            report.reads - report.labeled.len(),
            report.found - report.labeled.iter().filter(|l| l.1).count(),
        );
        let mut found = found0;
        report
            .labeled
            .iter()
            .enumerate()
            .map(|(k, &(id, label, score))| {
                found += label as usize;
                LogRecord {
                    iteration: report.iteration,
                    id,
                    label,
                    score,
                    found,
                    reads: reads0 + k + 1,
                    estimate: report.estimate.total_positives,
                    stop: report.decision.stop,
                }
            })
            .collect()
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.iteration,
            self.id,
            self.label as u8,
            self.score,
            self.found,
            self.reads,
            self.estimate,
            if self.stop { "stop" } else { "continue" }
        )
    }

    fn parse(line: &str, lineno: usize) -> Result<Self> {
        let bad = |reason: &str| Error::Log {
            line: lineno,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 {
            return Err(bad("expected 8 tab-separated fields"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
        Ok(LogRecord {
            iteration: num(f[0])?,
            id: num(f[1])?,
            label: match f[2] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("label must be 0 or 1")),
            },
            score: f[3].parse().map_err(|_| bad("bad score"))?,
            found: num(f[4])?,
            reads: num(f[5])?,
            estimate: num(f[6])?,
            stop: match f[7] {
                "stop" => true,
                "continue" => false,
                _ => return Err(bad("decision must be stop or continue")),
            },
        })
    }
}

#[derive(Debug)]
pub struct SessionLog {
    path: PathBuf,
    file: File,
}

impl SessionLog {
    /// Creates (truncating) a log whose first line carries `meta`, a
    /// single-line description of how to rebuild the session.
    pub fn create(path: &Path, meta: &str) -> Result<Self> {
        if meta.contains('\n') {
            return Err(Error::Contract("log metadata must be a single line".into()));
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "{META}{meta}\n{HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(SessionLog {
            path: path.to_path_buf(),
            file,
        })
    }

    /// Reopens an existing log for appending.
    pub fn append_to(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(SessionLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append_report(&mut self, report: &IterationReport) -> Result<()> {
        let mut buf = String::new();
        for r in LogRecord::from_report(report) {
            buf.push_str(&r.to_line());
            buf.push('\n');
        }
        self.write(&buf)
    }

    pub fn append_manual_stop(&mut self) -> Result<()> {
        self.write(&format!("{MANUAL_STOP}\n"))
    }

    fn write(&mut self, s: &str) -> Result<()> {
        self.file
            .write_all(s.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub meta: String,
    pub records: Vec<LogRecord>,
    pub manual_stop: bool,
}

impl ParsedLog {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut meta = None;
        let mut records = Vec::new();
        let mut manual_stop = false;
        for (k, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = k + 1;
            if let Some(m) = line.strip_prefix(META) {
                meta = Some(m.to_string());
            } else if line == MANUAL_STOP {
                manual_stop = true;
            } else if line == HEADER || line.is_empty() {
                continue;
            } else {
                records.push(LogRecord::parse(&line, lineno)?);
            }
        }
        let meta = meta.ok_or(Error::Log {
            line: 1,
            reason: "missing metadata line".into(),
        })?;
        Ok(ParsedLog {
            meta,
            records,
            manual_stop,
        })
    }

    /// Labels grouped by batch, in served order.
    pub fn batches(&self) -> Vec<Vec<(usize, bool)>> {
        let mut out: Vec<Vec<(usize, bool)>> = Vec::new();
        let mut current = None;
        for r in &self.records {
            if current != Some(r.iteration) {
                out.push(Vec::new());
                current = Some(r.iteration);
            }
            out.last_mut().expect("pushed above").push((r.id, r.label));
        }
        out
    }

    /// Re-submits every logged batch to a freshly built `session` and checks
    /// that each batch is the one the session serves.
    pub fn replay(&self, session: &mut SurveySession) -> Result<()> {
        for batch in self.batches() {
            let served: Vec<usize> = session.next_batch()?.ids();
            let logged: Vec<usize> = batch.iter().map(|b| b.0).collect();
            if served != logged {
                return Err(Error::Log {
                    line: 0,
                    reason: format!(
                        "replay diverged at iteration {}: session served a different batch",
                        session.iteration() + 1
                    ),
                });
            }
            session.submit_labels(&batch)?;
        }
        if self.manual_stop {
            session.stop()?;
        }
        Ok(())
    }
}
