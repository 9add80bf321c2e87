//! Networked execution of the Alt-RZKP game: framing, prover servers and a
//! verifier that enforces per-round response deadlines.

use std::io::{ErrorKind, Read, Write};
use std::net::TcpStream;
use std::time::Instant;

use thiserror::Error;

use crate::games::{GameKind, RejectReason};

pub mod codec;
pub mod prover;
pub mod verifier;

pub use codec::{decode, encode, CodecError, WireMessage};
pub use prover::{serve_prover, spawn_prover, ProverConfig, Role};
pub use verifier::{run_verifier_session, RoundRecord, RoundTiming, SessionConfig, SessionReport};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("connection closed by peer")]
    Closed,
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("handshake with prover {0} failed: {1}")]
    Hello(String, String),
    #[error("game {0} is not supported over the network")]
    Unsupported(&'static str),
    #[error("invalid session config: {0}")]
    Config(String),
}

pub fn kind_code(kind: GameKind) -> u8 {
    match kind {
        GameKind::AltRzkp => 0,
        GameKind::AltEdge => 1,
        GameKind::Bcs { .. } => 2,
        GameKind::Vertex { .. } => 3,
    }
}

pub fn reason_code(r: Option<RejectReason>) -> u8 {
    match r {
        None => codec::REASON_NONE,
        Some(RejectReason::EdgeVerification) => codec::REASON_EV,
        Some(RejectReason::WellDefinition) => codec::REASON_WD,
        Some(RejectReason::ConstraintSatisfaction) => codec::REASON_CS,
        Some(RejectReason::Malformed) => codec::REASON_MALFORMED,
        Some(RejectReason::Timeout) => codec::REASON_TIMEOUT,
    }
}

pub fn reason_from_code(c: u8) -> Result<Option<RejectReason>, CodecError> {
    Ok(match c {
        codec::REASON_NONE => None,
        codec::REASON_EV => Some(RejectReason::EdgeVerification),
        codec::REASON_WD => Some(RejectReason::WellDefinition),
        codec::REASON_CS => Some(RejectReason::ConstraintSatisfaction),
        codec::REASON_MALFORMED => Some(RejectReason::Malformed),
        codec::REASON_TIMEOUT => Some(RejectReason::Timeout),
        _ => return Err(CodecError::FieldRange("reason")),
    })
}

/// A framed TCP connection. Partial frames are kept across read timeouts.
pub struct FrameConn {
    stream: TcpStream,
    buf: Vec<u8>,
}

impl FrameConn {
    pub fn new(stream: TcpStream) -> Result<Self, NetError> {
        stream.set_nodelay(true)?;
        Ok(FrameConn {
            stream,
            buf: Vec::new(),
        })
    }

    pub fn send(&mut self, msg: &WireMessage) -> Result<(), NetError> {
        let bytes = encode(msg)?;
        self.stream.write_all(&bytes)?;
        Ok(())
    }

    fn buffered(&mut self) -> Result<Option<WireMessage>, NetError> {
        if self.buf.len() < 5 {
            return Ok(None);
        }
        let (_, n) = codec::parse_header(&self.buf[..5])?;
        if self.buf.len() < 5 + n {
            return Ok(None);
        }
        let (msg, used) = codec::decode_prefix(&self.buf)?;
        self.buf.drain(..used);
        Ok(Some(msg))
    }

    /// Next frame, or `None` once `deadline` passes. `None` deadline blocks.
    pub fn recv_until(&mut self, deadline: Option<Instant>) -> Result<Option<WireMessage>, NetError> {
        let mut tmp = [0u8; 4096];
        loop {
            if let Some(m) = self.buffered()? {
                return Ok(Some(m));
            }
            let timeout = match deadline {
                None => None,
                Some(d) => {
                    let now = Instant::now();
                    if now >= d {
                        return Ok(None);
                    }
                    Some(d - now)
                }
            };
            self.stream.set_read_timeout(timeout)?;
            match self.stream.read(&mut tmp) {
                Ok(0) => return Err(NetError::Closed),
                Ok(k) => self.buf.extend_from_slice(&tmp[..k]),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Ok(None)
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn recv(&mut self) -> Result<WireMessage, NetError> {
        self.recv_until(None)?.ok_or(NetError::Closed)
    }

    pub fn shutdown(&self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}
