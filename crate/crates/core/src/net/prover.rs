//! Honest prover server. Each connection is served on its own thread and
//! answers from the round labelling derived from `(shared_seed, round)`.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::Serialize;

use super::codec::{WireMessage, PROTOCOL_VERSION};
use super::{kind_code, FrameConn, NetError};
use crate::games::{GameKind, QueryA, QueryB, Response};
use crate::graph::PlantedInstance;
use crate::strategies::RoundLabeller;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    A,
    B,
}

impl Role {
    pub fn parse(s: &str) -> Option<Role> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Some(Role::A),
            "B" => Some(Role::B),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub role: Role,
    pub instance: PlantedInstance,
    pub shared_seed: u64,
    /// Artificial delay before every response.
    pub delay: Duration,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProverStats {
    pub challenges: u64,
    pub results: u64,
}

fn answer(cfg: &ProverConfig, labeller: &RoundLabeller, msg: WireMessage) -> Result<WireMessage, NetError> {
    let g = &cfg.instance.graph;
    let edge = |i: u32, j: u32| -> Result<(usize, usize), NetError> {
        let (i, j) = (i as usize, j as usize);
        if i < g.vertex_count() && j < g.vertex_count() && g.has_edge(i, j) {
            Ok((i, j))
        } else {
            Err(NetError::Protocol(format!("challenge ({i}, {j}) is not an edge")))
        }
    };
    match (cfg.role, msg) {
        (Role::A, WireMessage::ChallengeA { round, i, j }) => {
            let (i, j) = edge(i, j)?;
            match labeller.answer_a(round, &QueryA::Edge(i, j)) {
                Some(Response::AltRzkpA(w)) => Ok(WireMessage::ResponseA { round, w }),
                _ => Err(NetError::Protocol("no answer".into())),
            }
        }
        (Role::B, WireMessage::ChallengeB { round, i, j, b }) => {
            let edge = edge(i, j)?;
            match labeller.answer_b(round, &QueryB::EdgeBit { edge, bit: b }) {
                Some(Response::AltRzkpB(w)) => Ok(WireMessage::ResponseB { round, w }),
                _ => Err(NetError::Protocol("no answer".into())),
            }
        }
        (role, m) => Err(NetError::Protocol(format!("prover {role:?} cannot answer {m:?}"))),
    }
}

/// Serves one verifier connection until BYE or disconnect.
pub fn handle_session(stream: TcpStream, cfg: &ProverConfig) -> Result<ProverStats, NetError> {
    let mut conn = FrameConn::new(stream)?;
    let expected = WireMessage::Hello {
        version: PROTOCOL_VERSION,
        kind: kind_code(GameKind::AltRzkp),
        graph_hash: cfg.instance.graph.canonical_hash(),
    };
    let hello = conn.recv()?;
    if hello != expected {
        conn.shutdown();
        return Err(NetError::Protocol("HELLO does not match this prover's instance".into()));
    }
    conn.send(&expected)?;
    let labeller = RoundLabeller::honest(cfg.instance.witness.clone(), cfg.shared_seed);
    let mut stats = ProverStats::default();
    loop {
        let msg = match conn.recv() {
            Ok(m) => m,
            Err(NetError::Closed) => return Ok(stats),
            Err(e) => return Err(e),
        };
        match msg {
            WireMessage::Bye => return Ok(stats),
            WireMessage::Result { .. } => stats.results += 1,
            m => {
                stats.challenges += 1;
                let reply = answer(cfg, &labeller, m)?;
                if !cfg.delay.is_zero() {
                    thread::sleep(cfg.delay);
                }
                match conn.send(&reply) {
                    Ok(()) => {}
                    Err(NetError::Io(_)) => return Ok(stats),
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// Accept loop; stops after `max_sessions` connections if given.
pub fn serve_prover(listener: TcpListener, cfg: ProverConfig, max_sessions: Option<usize>) -> Result<(), NetError> {
    let mut workers = Vec::new();
    for (k, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let cfg = cfg.clone();
        workers.push(thread::spawn(move || handle_session(stream, &cfg)));
        if max_sessions.is_some_and(|m| k + 1 >= m) {
            break;
        }
    }
    for w in workers {
        let _ = w.join();
    }
    Ok(())
}

/// Binds `addr` and serves in a background thread. Returns the bound address.
pub fn spawn_prover(
    addr: &str,
    cfg: ProverConfig,
    max_sessions: Option<usize>,
) -> Result<(SocketAddr, JoinHandle<Result<(), NetError>>), NetError> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    Ok((local, thread::spawn(move || serve_prover(listener, cfg, max_sessions))))
}
