//! Binary framing for protocol messages.
//!
//! ```text
//! 0x50 0x4B | version 0x01 | msg_type | fields...
//! integer field: u16 BE length | BE magnitude (0 is [0x00])
//! text field:    u16 BE length | UTF-8 bytes
//! ```
//!
//! There is no overall length prefix; the message type fixes the field list,
//! which is what lets [`read_frame`] pull frames off a stream.

use std::fmt;
use std::io::{self, Read, Write};

use num_bigint::BigUint;
use thiserror::Error;

pub const MAGIC: [u8; 2] = [0x50, 0x4B];
pub const VERSION: u8 = 0x01;
pub const MAX_FRAME_LEN: usize = 64 * 1024;

pub mod msg_type {
    pub const REGISTER: u8 = 0x01;
    pub const MSG1: u8 = 0x02;
    pub const MSG2: u8 = 0x03;
    pub const MSG3: u8 = 0x04;
    pub const MSG4: u8 = 0x05;
    pub const OK: u8 = 0x06;
    pub const ERROR: u8 = 0x07;
    pub const LKY_MSG2: u8 = 0x08;
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("unsupported protocol version {0:#04x}")]
    VersionMismatch(u8),
    #[error("frame exceeds {MAX_FRAME_LEN} bytes")]
    TooLarge,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl WireError {
    fn malformed(msg: impl Into<String>) -> Self {
        WireError::Malformed(msg.into())
    }
}

/// Stable one-byte error codes carried in ERROR frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorCode {
    MalformedFrame = 0x01,
    ParamMismatch = 0x02,
    UnknownIdentity = 0x03,
    AuthFail = 0x04,
    VersionMismatch = 0x05,
    Throttled = 0x06,
}

impl ErrorCode {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => ErrorCode::MalformedFrame,
            0x02 => ErrorCode::ParamMismatch,
            0x03 => ErrorCode::UnknownIdentity,
            0x04 => ErrorCode::AuthFail,
            0x05 => ErrorCode::VersionMismatch,
            0x06 => ErrorCode::Throttled,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorCode::MalformedFrame => "MalformedFrame",
            ErrorCode::ParamMismatch => "ParamMismatch",
            ErrorCode::UnknownIdentity => "UnknownIdentity",
            ErrorCode::AuthFail => "AuthFail",
            ErrorCode::VersionMismatch => "VersionMismatch",
            ErrorCode::Throttled => "Throttled",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x} {}", *self as u8, self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Register {
        id_a: BigUint,
        id_b: BigUint,
        verifier: BigUint,
    },
    Msg1 {
        q: BigUint,
        g: BigUint,
        id_a: BigUint,
        t_a: BigUint,
    },
    Msg2 {
        t_b: BigUint,
    },
    Msg3 {
        d_a: BigUint,
    },
    Msg4 {
        e_b: BigUint,
    },
    Ok,
    Error {
        code: ErrorCode,
        detail: String,
    },
    /// LKY's second message: masked `T_B` and `d_B`.
    LkyMsg2 {
        t_b: BigUint,
        d_b: BigUint,
    },
}

impl Frame {
    pub fn msg_type(&self) -> u8 {
        use msg_type::*;
        match self {
            Frame::Register { .. } => REGISTER,
            Frame::Msg1 { .. } => MSG1,
            Frame::Msg2 { .. } => MSG2,
            Frame::Msg3 { .. } => MSG3,
            Frame::Msg4 { .. } => MSG4,
            Frame::Ok => OK,
            Frame::Error { .. } => ERROR,
            Frame::LkyMsg2 { .. } => LKY_MSG2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Frame::Register { .. } => "REGISTER",
            Frame::Msg1 { .. } => "MSG1",
            Frame::Msg2 { .. } => "MSG2",
            Frame::Msg3 { .. } => "MSG3",
            Frame::Msg4 { .. } => "MSG4",
            Frame::Ok => "OK",
            Frame::Error { .. } => "ERROR",
            Frame::LkyMsg2 { .. } => "LKY_MSG2",
        }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        Frame::Error {
            code,
            detail: detail.into(),
        }
    }
}

struct Encoder(Vec<u8>);

impl Encoder {
    fn field(&mut self, bytes: &[u8]) -> Result<(), WireError> {
        let len = u16::try_from(bytes.len()).map_err(|_| WireError::TooLarge)?;
        self.0.extend_from_slice(&len.to_be_bytes());
        self.0.extend_from_slice(bytes);
        Ok(())
    }

    fn int(&mut self, v: &BigUint) -> Result<(), WireError> {
        self.field(&v.to_bytes_be())
    }
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, WireError> {
    let mut enc = Encoder(vec![MAGIC[0], MAGIC[1], VERSION, frame.msg_type()]);
    match frame {
        Frame::Register { id_a, id_b, verifier } => {
            enc.int(id_a)?;
            enc.int(id_b)?;
            enc.int(verifier)?;
        }
        Frame::Msg1 { q, g, id_a, t_a } => {
            enc.int(q)?;
            enc.int(g)?;
            enc.int(id_a)?;
            enc.int(t_a)?;
        }
        Frame::Msg2 { t_b } => enc.int(t_b)?,
        Frame::Msg3 { d_a } => enc.int(d_a)?,
        Frame::Msg4 { e_b } => enc.int(e_b)?,
        Frame::Ok => {}
        Frame::Error { code, detail } => {
            enc.0.push(*code as u8);
            enc.field(detail.as_bytes())?;
        }
        Frame::LkyMsg2 { t_b, d_b } => {
            enc.int(t_b)?;
            enc.int(d_b)?;
        }
    }
    if enc.0.len() > MAX_FRAME_LEN {
        return Err(WireError::TooLarge);
    }
    Ok(enc.0)
}

struct Decoder<R> {
    inner: R,
    consumed: usize,
}

impl<R: Read> Decoder<R> {
    fn bytes(&mut self, n: usize) -> Result<Vec<u8>, WireError> {
        if self.consumed + n > MAX_FRAME_LEN {
            return Err(WireError::TooLarge);
        }
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf).map_err(|e| {
            if e.kind() == io::ErrorKind::UnexpectedEof {
                WireError::malformed("truncated frame")
            } else {
                WireError::Io(e)
            }
        })?;
        self.consumed += n;
        Ok(buf)
    }

    fn field(&mut self) -> Result<Vec<u8>, WireError> {
        let len = self.bytes(2)?;
        let len = u16::from_be_bytes([len[0], len[1]]) as usize;
        self.bytes(len)
    }

    fn int(&mut self) -> Result<BigUint, WireError> {
        let raw = self.field()?;
        match raw.as_slice() {
            [] => Err(WireError::malformed("empty integer field")),
            [0, _, ..] => Err(WireError::malformed("integer with leading zero byte")),
            _ => Ok(BigUint::from_bytes_be(&raw)),
        }
    }

    fn text(&mut self) -> Result<String, WireError> {
        String::from_utf8(self.field()?).map_err(|_| WireError::malformed("text field is not UTF-8"))
    }
}

/// Reads exactly one frame from a stream.
pub fn read_frame<R: Read>(reader: R) -> Result<Frame, WireError> {
    let mut dec = Decoder {
        inner: reader,
        consumed: 0,
    };
    decode_with(&mut dec)
}

fn decode_with<R: Read>(dec: &mut Decoder<R>) -> Result<Frame, WireError> {
    use msg_type::*;
    let header = dec.bytes(4)?;
    if header[..2] != MAGIC {
        return Err(WireError::malformed("bad magic"));
    }
    if header[2] != VERSION {
        return Err(WireError::VersionMismatch(header[2]));
    }
    let frame = match header[3] {
        REGISTER => Frame::Register {
            id_a: dec.int()?,
            id_b: dec.int()?,
            verifier: dec.int()?,
        },
        MSG1 => Frame::Msg1 {
            q: dec.int()?,
            g: dec.int()?,
            id_a: dec.int()?,
            t_a: dec.int()?,
        },
        MSG2 => Frame::Msg2 { t_b: dec.int()? },
        MSG3 => Frame::Msg3 { d_a: dec.int()? },
        MSG4 => Frame::Msg4 { e_b: dec.int()? },
        OK => Frame::Ok,
        ERROR => {
            let code = dec.bytes(1)?[0];
            let code = ErrorCode::from_byte(code)
                .ok_or_else(|| WireError::malformed(format!("unknown error code {code:#04x}")))?;
            Frame::Error {
                code,
                detail: dec.text()?,
            }
        }
        LKY_MSG2 => Frame::LkyMsg2 {
            t_b: dec.int()?,
            d_b: dec.int()?,
        },
        other => return Err(WireError::malformed(format!("unknown message type {other:#04x}"))),
    };
    Ok(frame)
}

/// Decodes a complete frame; trailing bytes are an error.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, WireError> {
    let mut dec = Decoder {
        inner: bytes,
        consumed: 0,
    };
    let frame = decode_with(&mut dec)?;
    if !dec.inner.is_empty() {
        return Err(WireError::malformed("trailing bytes after frame"));
    }
    Ok(frame)
}

pub fn write_frame<W: Write>(mut writer: W, frame: &Frame) -> Result<usize, WireError> {
    let bytes = encode_frame(frame)?;
    writer.write_all(&bytes)?;
    writer.flush()?;
    Ok(bytes.len())
}
