//! The JSON-lines trace: one header line, then one event per line.
//!
//! ```text
//! {"schema":"depthlab-trace/1","tool_version":"0.1.0","config_hash":"…","stages":500,"snapshot_len":64}
//! {"stage":31,"substage":0,"node_path":"","event_kind":"move_in","payload":{"j":2,…}}
//! ```
//!
//! Event kinds and their payloads are the variants of [`EventKind`].

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::error::TraceError;

use super::outcome::Outcome;

pub const TRACE_SCHEMA: &str = "depthlab-trace/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    pub stages: u64,
    pub snapshot_len: usize,
}

/// `v_{α,i}` at act time against its bound `2^{−2e−i−2c−3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActWeight {
    pub i: u32,
    pub v: Dyadic,
    pub bound: Dyadic,
    /// Lengths `[max I_{j0} + 1, max I_{j1} + 1]` of `N_{α,i}`; absent
    /// when the concatenating segment overlaps no `φ_i`-interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event_kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    NodeInit {
        requirement: String,
        l: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<u32>,
    },
    Visit {
        requirement: String,
        outcome: Outcome,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<u64>,
    },
    MoveIn {
        j: u32,
        i: u32,
        tau: BitString,
        b: u64,
        budget: u64,
        maxlen: usize,
        move_count: u64,
    },
    Fresh {
        j: u32,
    },
    Act {
        e: u32,
        c: u32,
        n: u64,
        sigma: BitString,
        member: BitString,
        l_prime: u64,
        v: Vec<ActWeight>,
    },
    Request {
        e: u32,
        c: u32,
        i: u32,
        w: u32,
        k: u32,
        target: BitString,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        clamped: bool,
    },
    CapHit {
        cap: String,
        detail: String,
    },
    StageEnd {
        f: String,
        snapshot: BitString,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub stage: u64,
    pub substage: Option<u64>,
    pub node_path: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        buf
    }

    pub fn read_jsonl(input: impl BufRead) -> Result<Trace, TraceError> {
        let mut lines = input.lines().enumerate();
        let header_line = loop {
            match lines.next() {
                None => return Err(TraceError::MissingHeader),
                Some((_, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
            }
        };
        let raw: serde_json::Value =
            serde_json::from_str(&header_line).map_err(|e| TraceError::Parse {
                line: 1,
                message: e.to_string(),
            })?;
        let schema = raw.get("schema").and_then(|v| v.as_str()).unwrap_or("");
        if schema != TRACE_SCHEMA {
            return Err(TraceError::Schema {
                found: schema.to_string(),
                expected: TRACE_SCHEMA.to_string(),
            });
        }
        let header: TraceHeader =
            serde_json::from_value(raw).map_err(|e| TraceError::Parse {
                line: 1,
                message: e.to_string(),
            })?;
        let mut events = Vec::new();
        for (k, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(|e| TraceError::Parse {
                line: k + 1,
                message: e.to_string(),
            })?);
        }
        Ok(Trace { header, events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    fn header() -> TraceHeader {
        TraceHeader {
            schema: TRACE_SCHEMA.into(),
            tool_version: "0".into(),
            config_hash: "ab".into(),
            stages: 1,
            snapshot_len: 4,
        }
    }

    #[test]
    fn event_line_shape() {
        let e = Event {
            stage: 3,
            substage: Some(0),
            node_path: String::new(),
            kind: EventKind::Fresh { j: 4 },
        };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"stage":3,"substage":0,"node_path":"","event_kind":"fresh","payload":{"j":4}}"#
        );
    }

    #[test]
    fn roundtrip_all_kinds() {
        let kinds = vec![
            EventKind::NodeInit {
                requirement: "G0".into(),
                l: 17,
                c: Some(0),
            },
            EventKind::Visit {
                requirement: "D0".into(),
                outcome: Outcome::Finite(3),
                x: Some(3),
            },
            EventKind::MoveIn {
                j: 2,
                i: 0,
                tau: bs("0001"),
                b: 32,
                budget: 47,
                maxlen: 3,
                move_count: 1,
            },
            EventKind::Act {
                e: 0,
                c: 0,
                n: 17,
                sigma: bs("1"),
                member: bs("01"),
                l_prime: 18,
                v: vec![ActWeight {
                    i: 0,
                    v: "1/64".parse().unwrap(),
                    bound: "1/8".parse().unwrap(),
                    lengths: Some((31, 127)),
                }],
            },
            EventKind::Request {
                e: 0,
                c: 0,
                i: 0,
                w: 7,
                k: 7,
                target: bs("0101"),
                clamped: false,
            },
            EventKind::CapHit {
                cap: "x_cap".into(),
                detail: "x".into(),
            },
            EventKind::StageEnd {
                f: "inf.w".into(),
                snapshot: BitString::empty(),
            },
        ];
        let trace = Trace {
            header: header(),
            events: kinds
                .into_iter()
                .map(|kind| Event {
                    stage: 1,
                    substage: None,
                    node_path: "inf".into(),
                    kind,
                })
                .collect(),
        };
        let bytes = trace.to_jsonl_bytes();
        assert_eq!(Trace::read_jsonl(&bytes[..]).unwrap(), trace);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            Trace::read_jsonl(&b""[..]),
            Err(TraceError::MissingHeader)
        ));
        let other = r#"{"schema":"depthlab-trace/0","tool_version":"0","config_hash":"","stages":0,"snapshot_len":0}"#;
        assert!(matches!(
            Trace::read_jsonl(other.as_bytes()),
            Err(TraceError::Schema { .. })
        ));
        let mut bytes = Trace {
            header: header(),
            events: vec![],
        }
        .to_jsonl_bytes();
        bytes.extend_from_slice(b"{\"stage\":1}\n");
        assert!(matches!(
            Trace::read_jsonl(&bytes[..]),
            Err(TraceError::Parse { line: 2, .. })
        ));
    }
}
