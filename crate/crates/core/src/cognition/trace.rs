//! Rollout-trace files.
//!
//! A trace is JSON Lines, UTF-8:
//!
//! * line 1, `"record": "header"`: format tag, agent id, tick, species,
//!   cognition parameters, chosen action, per-action sample counts and mean
//!   returns, the ego's snapshot and the initial nested world;
//! * one `"record": "rollout"` line per rollout, in rollout-index order:
//!   first action, per-tick reward trace (`tick`, `action`, `reward`,
//!   `death`), discounted return, death flag and the per-tick frames.
//!
//! Nested-world coordinates have the ego's patch at
//! `(half_width, half_width)`; `[col, row]` cells cover `[c, c+1) x [r, r+1)`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ActionStats, CognitionParams, CognitiveWorld, Decision, RolloutRecord, Snapshot};
use crate::error::{Error, Result};
use crate::model::Action;
use crate::sim::{AgentId, Species};

pub const FORMAT: &str = "acmcc-trace/1";

/// A decision together with everything needed to replay or draw it.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub agent: AgentId,
    pub tick: u64,
    pub species: Species,
    pub params: CognitionParams,
    pub snapshot: Snapshot,
    pub initial_world: CognitiveWorld,
    pub decision: Decision,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Line {
    Header(Header),
    Rollout(RolloutLine),
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    agent: AgentId,
    tick: u64,
    species: Species,
    params: CognitionParams,
    chosen: Action,
    stats: [ActionStats; 3],
    rollouts: usize,
    snapshot: Snapshot,
    initial_world: CognitiveWorld,
}

#[derive(Serialize, Deserialize)]
struct RolloutLine {
    index: usize,
    #[serde(flatten)]
    record: RolloutRecord,
}

impl Explanation {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Line::Header(Header {
            format: FORMAT.to_string(),
            agent: self.agent,
            tick: self.tick,
            species: self.species,
            params: self.params,
            chosen: self.decision.chosen,
            stats: self.decision.stats,
            rollouts: self.decision.records.len(),
            snapshot: self.snapshot.clone(),
            initial_world: self.initial_world.clone(),
        });
        write_line(&mut out, &header)?;
        for (index, record) in self.decision.records.iter().enumerate() {
            write_line(
                &mut out,
                &Line::Rollout(RolloutLine {
                    index,
                    record: record.clone(),
                }),
            )?;
        }
        out.flush().map_err(|e| Error::io("<trace>", e))
    }

    pub fn to_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines
            .next()
            .ok_or_else(|| malformed("empty trace"))?
            .map_err(|e| Error::io("<trace>", e))?;
        let header = match serde_json::from_str::<Line>(&first)? {
            Line::Header(h) => h,
            Line::Rollout(_) => return Err(malformed("first line must be the header")),
        };
        if header.format != FORMAT {
            return Err(malformed(format!("unsupported format {:?}", header.format)));
        }
        let mut records = Vec::with_capacity(header.rollouts);
        for line in lines {
            let line = line.map_err(|e| Error::io("<trace>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line)? {
                Line::Rollout(r) if r.index == records.len() => records.push(r.record),
                Line::Rollout(r) => {
                    return Err(malformed(format!(
                        "rollout index {} out of order (expected {})",
                        r.index,
                        records.len()
                    )))
                }
                Line::Header(_) => return Err(malformed("second header")),
            }
        }
        if records.len() != header.rollouts {
            return Err(malformed(format!(
                "header announces {} rollouts, found {}",
                header.rollouts,
                records.len()
            )));
        }
        Ok(Explanation {
            agent: header.agent,
            tick: header.tick,
            species: header.species,
            params: header.params,
            snapshot: header.snapshot,
            initial_world: header.initial_world,
            decision: Decision {
                chosen: header.chosen,
                stats: header.stats,
                records,
            },
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}

fn write_line<W: Write>(out: &mut W, line: &Line) -> Result<()> {
    serde_json::to_writer(&mut *out, line)?;
    out.write_all(b"\n").map_err(|e| Error::io("<trace>", e))
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::invalid("trace", msg)
}
