//! Verifier session: rounds run strictly in sequence, and a response counts
//! only if it is read strictly before `deadline` has elapsed since its
//! challenge was sent.

use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::codec::{WireMessage, PROTOCOL_VERSION};
use super::{kind_code, reason_code, FrameConn, NetError};
use crate::games::{
    round_rng, sample_challenge, verdict, Challenge, GameKind, RejectReason, Response, Transcript,
    Verdict, WinStats,
};
use crate::graph::Graph;

#[derive(Debug, Clone, Serialize)]
pub struct SessionConfig {
    pub rounds: u64,
    pub deadline: Duration,
    pub seed: u64,
    pub prover_a: String,
    pub prover_b: String,
    pub kind: GameKind,
    /// Budget for connecting and for the HELLO echo.
    pub handshake_timeout: Duration,
}

/// Nanoseconds since session start on a monotonic clock. `recv_*` is `None`
/// when no valid response was read for the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundTiming {
    pub sent_a: Option<u64>,
    pub recv_a: Option<u64>,
    pub sent_b: Option<u64>,
    pub recv_b: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub transcript: Transcript,
    pub timing: RoundTiming,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub rounds: u64,
    pub deadline_ns: u64,
    pub seed: u64,
    pub graph_hash: String,
    pub accepted: u64,
    pub rejected_check: u64,
    pub rejected_timeout: u64,
    pub session_accepted: bool,
    pub elapsed_ns: u64,
    pub records: Vec<RoundRecord>,
}

impl SessionReport {
    pub fn win_stats(&self) -> WinStats {
        WinStats::from_counts(self.rounds, self.accepted)
    }
}

enum Outcome {
    Answer(Response, u64),
    Late,
    Malformed,
}

struct Link {
    conn: Option<FrameConn>,
}

impl Link {
    fn send(&mut self, msg: &WireMessage, start: Instant) -> Option<(Instant, u64)> {
        let conn = self.conn.as_mut()?;
        let t = Instant::now();
        match conn.send(msg) {
            Ok(()) => Some((t, (t - start).as_nanos() as u64)),
            Err(_) => {
                self.conn = None;
                None
            }
        }
    }

    /// Reads frames until one for `round` arrives, skipping stale ones.
    fn collect(&mut self, round: u64, sent: Instant, deadline: Duration, start: Instant) -> Outcome {
        let Some(conn) = self.conn.as_mut() else {
            return Outcome::Late;
        };
        let until = sent.checked_add(deadline);
        loop {
            let msg = match conn.recv_until(until) {
                Ok(Some(m)) => m,
                Ok(None) => return Outcome::Late,
                Err(_) => {
                    self.conn = None;
                    return Outcome::Late;
                }
            };
            let now = Instant::now();
            match msg.round() {
                Some(r) if r < round => continue,
                Some(r) if r == round => {}
                _ => return Outcome::Malformed,
            }
            if now - sent >= deadline {
                return Outcome::Late;
            }
            let stamp = (now - start).as_nanos() as u64;
            return match msg {
                WireMessage::ResponseA { w, .. } => Outcome::Answer(Response::AltRzkpA(w), stamp),
                WireMessage::ResponseB { w, .. } => Outcome::Answer(Response::AltRzkpB(w), stamp),
                _ => Outcome::Malformed,
            };
        }
    }
}

fn connect(addr: &str, timeout: Duration, hello: &WireMessage, label: &str) -> Result<FrameConn, NetError> {
    let fail = |e: String| NetError::Hello(label.to_string(), e);
    let sock = addr
        .to_socket_addrs()
        .map_err(|e| fail(e.to_string()))?
        .next()
        .ok_or_else(|| fail(format!("cannot resolve {addr}")))?;
    let stream = TcpStream::connect_timeout(&sock, timeout).map_err(|e| fail(e.to_string()))?;
    let mut conn = FrameConn::new(stream)?;
    conn.send(hello).map_err(|e| fail(e.to_string()))?;
    match conn.recv_until(Some(Instant::now() + timeout)) {
        Ok(Some(m)) if m == *hello => Ok(conn),
        Ok(Some(m)) => Err(fail(format!("unexpected reply {m:?}"))),
        Ok(None) => Err(fail("no HELLO echo before timeout".into())),
        Err(e) => Err(fail(e.to_string())),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one session against two prover endpoints serving `g`.
pub fn run_verifier_session(cfg: &SessionConfig, g: &Graph) -> Result<SessionReport, NetError> {
    if cfg.kind != GameKind::AltRzkp {
        return Err(NetError::Unsupported(cfg.kind.name()));
    }
    if cfg.rounds == 0 {
        return Err(NetError::Config("rounds must be at least 1".into()));
    }
    if g.edge_count() == 0 {
        return Err(NetError::Config("graph has no edges".into()));
    }
    let hash = g.canonical_hash();
    let hello = WireMessage::Hello {
        version: PROTOCOL_VERSION,
        kind: kind_code(cfg.kind),
        graph_hash: hash,
    };
    let mut a = Link {
        conn: Some(connect(&cfg.prover_a, cfg.handshake_timeout, &hello, "A")?),
    };
    let mut b = Link {
        conn: Some(connect(&cfg.prover_b, cfg.handshake_timeout, &hello, "B")?),
    };

    let start = Instant::now();
    let mut records = Vec::with_capacity(cfg.rounds as usize);
    let (mut accepted, mut rejected_check, mut rejected_timeout) = (0, 0, 0);
    for round in 0..cfg.rounds {
        let mut rng = round_rng(cfg.seed, round);
        let challenge = sample_challenge(cfg.kind, g, &mut rng).map_err(|e| NetError::Config(e.to_string()))?;
        let Challenge::AltRzkp { edge_a, edge_b, bit } = challenge else {
            unreachable!("kind checked above");
        };
        let ca = WireMessage::ChallengeA {
            round,
            i: edge_a.0 as u32,
            j: edge_a.1 as u32,
        };
        let cb = WireMessage::ChallengeB {
            round,
            i: edge_b.0 as u32,
            j: edge_b.1 as u32,
            b: bit,
        };
        let sa = a.send(&ca, start);
        let sb = b.send(&cb, start);
        let oa = match sa {
            Some((t, _)) => a.collect(round, t, cfg.deadline, start),
            None => Outcome::Late,
        };
        let ob = match sb {
            Some((t, _)) => b.collect(round, t, cfg.deadline, start),
            None => Outcome::Late,
        };
        let mut timing = RoundTiming {
            sent_a: sa.map(|s| s.1),
            recv_a: None,
            sent_b: sb.map(|s| s.1),
            recv_b: None,
        };
        let (mut ra, mut rb) = (None, None);
        if let Outcome::Answer(r, t) = &oa {
            ra = Some(r.clone());
            timing.recv_a = Some(*t);
        }
        if let Outcome::Answer(r, t) = &ob {
            rb = Some(r.clone());
            timing.recv_b = Some(*t);
        }
        let v = match (&oa, &ob) {
            (Outcome::Late, _) | (_, Outcome::Late) => Verdict::Reject(RejectReason::Timeout),
            (Outcome::Answer(x, _), Outcome::Answer(y, _)) => verdict(cfg.kind, &challenge, x, y),
            _ => Verdict::Reject(RejectReason::Malformed),
        };
        match v.reason() {
            None => accepted += 1,
            Some(RejectReason::Timeout) => rejected_timeout += 1,
            Some(_) => rejected_check += 1,
        }
        let result = WireMessage::Result {
            round,
            verdict: u8::from(v.is_accept()),
            reason: reason_code(v.reason()),
        };
        a.send(&result, start);
        b.send(&result, start);
        records.push(RoundRecord {
            transcript: Transcript::new(round, challenge, ra, rb, v),
            timing,
        });
    }
    let elapsed_ns = start.elapsed().as_nanos() as u64;
    for link in [&mut a, &mut b] {
        link.send(&WireMessage::Bye, start);
        if let Some(c) = &link.conn {
            c.shutdown();
        }
    }
    Ok(SessionReport {
        rounds: cfg.rounds,
        deadline_ns: cfg.deadline.as_nanos() as u64,
        seed: cfg.seed,
        graph_hash: hex(&hash),
        accepted,
        rejected_check,
        rejected_timeout,
        session_accepted: accepted == cfg.rounds,
        elapsed_ns,
        records,
    })
}
