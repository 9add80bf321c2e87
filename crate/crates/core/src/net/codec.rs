//! Length-prefixed binary framing: `len: u32 BE | type: u8 | payload`, where
//! `len` counts the type byte and the payload.

use serde::Serialize;
use thiserror::Error;

pub const MAX_FRAME: u32 = 1 << 20;
pub const PROTOCOL_VERSION: u8 = 1;

pub const T_HELLO: u8 = 1;
pub const T_CHALLENGE_A: u8 = 2;
pub const T_CHALLENGE_B: u8 = 3;
pub const T_RESPONSE_A: u8 = 4;
pub const T_RESPONSE_B: u8 = 5;
pub const T_RESULT: u8 = 6;
pub const T_BYE: u8 = 7;

pub const REASON_NONE: u8 = 0;
pub const REASON_EV: u8 = 1;
pub const REASON_WD: u8 = 2;
pub const REASON_CS: u8 = 3;
pub const REASON_MALFORMED: u8 = 4;
pub const REASON_TIMEOUT: u8 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("frame truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("unknown message type {0}")]
    BadType(u8),
    #[error("field {0} out of range")]
    FieldRange(&'static str),
    #[error("declared frame length {0} exceeds limit")]
    Oversize(u32),
    #[error("type {ty} expects payload of {expected} bytes, got {got}")]
    LengthMismatch { ty: u8, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WireMessage {
    Hello {
        version: u8,
        kind: u8,
        graph_hash: [u8; 32],
    },
    ChallengeA {
        round: u64,
        i: u32,
        j: u32,
    },
    ChallengeB {
        round: u64,
        i: u32,
        j: u32,
        b: u8,
    },
    ResponseA {
        round: u64,
        w: [u8; 4],
    },
    ResponseB {
        round: u64,
        w: [u8; 2],
    },
    Result {
        round: u64,
        verdict: u8,
        reason: u8,
    },
    Bye,
}

impl WireMessage {
    pub fn type_byte(&self) -> u8 {
        match self {
            WireMessage::Hello { .. } => T_HELLO,
            WireMessage::ChallengeA { .. } => T_CHALLENGE_A,
            WireMessage::ChallengeB { .. } => T_CHALLENGE_B,
            WireMessage::ResponseA { .. } => T_RESPONSE_A,
            WireMessage::ResponseB { .. } => T_RESPONSE_B,
            WireMessage::Result { .. } => T_RESULT,
            WireMessage::Bye => T_BYE,
        }
    }

    pub fn round(&self) -> Option<u64> {
        match *self {
            WireMessage::ChallengeA { round, .. }
            | WireMessage::ChallengeB { round, .. }
            | WireMessage::ResponseA { round, .. }
            | WireMessage::ResponseB { round, .. }
            | WireMessage::Result { round, .. } => Some(round),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        match *self {
            WireMessage::Hello { kind, .. } if kind > 3 => Err(CodecError::FieldRange("kind")),
            WireMessage::ChallengeB { b, .. } if b > 1 => Err(CodecError::FieldRange("b")),
            WireMessage::ResponseA { w, .. } if w.iter().any(|&c| c > 2) => Err(CodecError::FieldRange("w")),
            WireMessage::ResponseB { w, .. } if w.iter().any(|&c| c > 2) => Err(CodecError::FieldRange("w")),
            WireMessage::Result { verdict, .. } if verdict > 1 => Err(CodecError::FieldRange("verdict")),
            WireMessage::Result { reason, .. } if reason > REASON_TIMEOUT => Err(CodecError::FieldRange("reason")),
            _ => Ok(()),
        }
    }
}

/// Payload size for each message type.
pub fn payload_len(ty: u8) -> Result<usize, CodecError> {
    Ok(match ty {
        T_HELLO => 34,
        T_CHALLENGE_A => 16,
        T_CHALLENGE_B => 17,
        T_RESPONSE_A => 12,
        T_RESPONSE_B => 10,
        T_RESULT => 10,
        T_BYE => 0,
        t => return Err(CodecError::BadType(t)),
    })
}

pub fn encode(msg: &WireMessage) -> Result<Vec<u8>, CodecError> {
    msg.validate()?;
    let ty = msg.type_byte();
    let n = payload_len(ty)?;
    let mut out = Vec::with_capacity(5 + n);
    out.extend_from_slice(&(n as u32 + 1).to_be_bytes());
    out.push(ty);
    match *msg {
        WireMessage::Hello {
            version,
            kind,
            graph_hash,
        } => {
            out.push(version);
            out.push(kind);
            out.extend_from_slice(&graph_hash);
        }
        WireMessage::ChallengeA { round, i, j } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.extend_from_slice(&i.to_be_bytes());
            out.extend_from_slice(&j.to_be_bytes());
        }
        WireMessage::ChallengeB { round, i, j, b } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.extend_from_slice(&i.to_be_bytes());
            out.extend_from_slice(&j.to_be_bytes());
            out.push(b);
        }
        WireMessage::ResponseA { round, w } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.extend_from_slice(&w);
        }
        WireMessage::ResponseB { round, w } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.extend_from_slice(&w);
        }
        WireMessage::Result {
            round,
            verdict,
            reason,
        } => {
            out.extend_from_slice(&round.to_be_bytes());
            out.push(verdict);
            out.push(reason);
        }
        WireMessage::Bye => {}
    }
    debug_assert_eq!(out.len(), 5 + n);
    Ok(out)
}

/// Validates a 5-byte header and returns `(type, payload length)`.
pub fn parse_header(h: &[u8]) -> Result<(u8, usize), CodecError> {
    if h.len() < 5 {
        return Err(CodecError::Truncated { need: 5, have: h.len() });
    }
    let len = u32::from_be_bytes([h[0], h[1], h[2], h[3]]);
    if len > MAX_FRAME {
        return Err(CodecError::Oversize(len));
    }
    if len == 0 {
        return Err(CodecError::Truncated { need: 1, have: 0 });
    }
    let ty = h[4];
    let expected = payload_len(ty)?;
    let got = len as usize - 1;
    if got != expected {
        return Err(CodecError::LengthMismatch { ty, expected, got });
    }
    Ok((ty, expected))
}

fn be_u64(b: &[u8]) -> u64 {
    u64::from_be_bytes(b[..8].try_into().expect("8 bytes"))
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes(b[..4].try_into().expect("4 bytes"))
}

/// Decodes the frame at the start of `buf`, returning the message and the
/// number of bytes consumed.
pub fn decode_prefix(buf: &[u8]) -> Result<(WireMessage, usize), CodecError> {
    let (ty, n) = parse_header(buf)?;
    if buf.len() < 5 + n {
        return Err(CodecError::Truncated {
            need: 5 + n,
            have: buf.len(),
        });
    }
    let p = &buf[5..5 + n];
    let msg = match ty {
        T_HELLO => WireMessage::Hello {
            version: p[0],
            kind: p[1],
            graph_hash: p[2..34].try_into().expect("32 bytes"),
        },
        T_CHALLENGE_A => WireMessage::ChallengeA {
            round: be_u64(p),
            i: be_u32(&p[8..]),
            j: be_u32(&p[12..]),
        },
        T_CHALLENGE_B => WireMessage::ChallengeB {
            round: be_u64(p),
            i: be_u32(&p[8..]),
            j: be_u32(&p[12..]),
            b: p[16],
        },
        T_RESPONSE_A => WireMessage::ResponseA {
            round: be_u64(p),
            w: [p[8], p[9], p[10], p[11]],
        },
        T_RESPONSE_B => WireMessage::ResponseB {
            round: be_u64(p),
            w: [p[8], p[9]],
        },
        T_RESULT => WireMessage::Result {
            round: be_u64(p),
            verdict: p[8],
            reason: p[9],
        },
        T_BYE => WireMessage::Bye,
        t => return Err(CodecError::BadType(t)),
    };
    msg.validate()?;
    Ok((msg, 5 + n))
}

/// Decodes exactly one frame; trailing bytes are an error.
pub fn decode(buf: &[u8]) -> Result<WireMessage, CodecError> {
    let (msg, used) = decode_prefix(buf)?;
    if used != buf.len() {
        return Err(CodecError::LengthMismatch {
            ty: msg.type_byte(),
            expected: used,
            got: buf.len(),
        });
    }
    Ok(msg)
}
