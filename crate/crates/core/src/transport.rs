//! Parameter messages and their wire format.
//!
//! Frame layout, all integers little-endian:
//!
//! ```text
//! "HFLP" | version u8 = 1 | role u8 | sender_id u32 | round u32 | count u64
//!        | count × f32 | crc32 u32
//! ```
//!
//! The CRC-32 (IEEE) covers every byte between the magic and the checksum.

use std::sync::mpsc;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"HFLP";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 1 + 4 + 4 + 8;
const TRAILER_LEN: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported frame version {0}")]
    BadVersion(u8),
    #[error("unknown role tag {0}")]
    BadRole(u8),
    #[error("frame length {actual} does not match header (expected {expected})")]
    BadLength { expected: u64, actual: usize },
    #[error("checksum mismatch: frame says {stored:#010x}, payload hashes to {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("channel closed")]
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Role {
    Client = 0,
    Edge = 1,
    Global = 2,
}

impl TryFrom<u8> for Role {
    type Error = TransportError;

    fn try_from(tag: u8) -> Result<Self, Self::Error> {
        match tag {
            0 => Ok(Role::Client),
            1 => Ok(Role::Edge),
            2 => Ok(Role::Global),
            other => Err(TransportError::BadRole(other)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParameterMessage {
    pub role: Role,
    pub sender_id: u32,
    pub round: u32,
    pub values: Vec<f32>,
}

/// Bitwise equality, so `-0.0 != 0.0` and identical NaN payloads compare equal.
impl PartialEq for ParameterMessage {
    fn eq(&self, other: &Self) -> bool {
        self.role == other.role
            && self.sender_id == other.sender_id
            && self.round == other.round
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for ParameterMessage {}

impl ParameterMessage {
    pub fn new(role: Role, sender_id: u32, round: u32, values: Vec<f32>) -> Self {
        Self {
            role,
            sender_id,
            round,
            values,
        }
    }

    pub fn frame_len(&self) -> usize {
        HEADER_LEN + 4 * self.values.len() + TRAILER_LEN
    }
}

pub fn encode(msg: &ParameterMessage) -> Vec<u8> {
    let mut buf = Vec::with_capacity(msg.frame_len());
    buf.extend_from_slice(&MAGIC);
    buf.push(VERSION);
    buf.push(msg.role as u8);
    buf.extend_from_slice(&msg.sender_id.to_le_bytes());
    buf.extend_from_slice(&msg.round.to_le_bytes());
    buf.extend_from_slice(&(msg.values.len() as u64).to_le_bytes());
    for v in &msg.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf[MAGIC.len()..]);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

fn le_u32(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes.try_into().expect("4-byte slice"))
}

pub fn decode(frame: &[u8]) -> Result<ParameterMessage, TransportError> {
    if frame.len() < HEADER_LEN + TRAILER_LEN {
        return Err(TransportError::BadLength {
            expected: (HEADER_LEN + TRAILER_LEN) as u64,
            actual: frame.len(),
        });
    }
    let magic: [u8; 4] = frame[..4].try_into().expect("4-byte slice");
    if magic != MAGIC {
        return Err(TransportError::BadMagic(magic));
    }
    if frame[4] != VERSION {
        return Err(TransportError::BadVersion(frame[4]));
    }
    let count = u64::from_le_bytes(frame[14..22].try_into().expect("8-byte slice"));
    let expected = count
        .checked_mul(4)
        .and_then(|n| n.checked_add((HEADER_LEN + TRAILER_LEN) as u64));
    if expected != Some(frame.len() as u64) {
        return Err(TransportError::BadLength {
            expected: expected.unwrap_or(u64::MAX),
            actual: frame.len(),
        });
    }
    let body_end = frame.len() - TRAILER_LEN;
    let stored = le_u32(&frame[body_end..]);
    let computed = crc32fast::hash(&frame[MAGIC.len()..body_end]);
    if stored != computed {
        return Err(TransportError::Checksum { stored, computed });
    }
    let role = Role::try_from(frame[5])?;
    let values = frame[HEADER_LEN..body_end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();
    Ok(ParameterMessage {
        role,
        sender_id: le_u32(&frame[6..10]),
        round: le_u32(&frame[10..14]),
        values,
    })
}

/// Sending half of an ordered, at-most-once frame channel. Cloneable, so
/// many clients can feed one edge.
#[derive(Debug, Clone)]
pub struct ParamSender {
    inner: mpsc::Sender<Vec<u8>>,
}

#[derive(Debug)]
pub struct ParamReceiver {
    inner: mpsc::Receiver<Vec<u8>>,
}

pub fn channel() -> (ParamSender, ParamReceiver) {
    let (tx, rx) = mpsc::channel();
    (ParamSender { inner: tx }, ParamReceiver { inner: rx })
}

impl ParamSender {
    /// Encodes and enqueues `msg`.
    pub fn send(&self, msg: &ParameterMessage) -> Result<(), TransportError> {
        self.inner.send(encode(msg)).map_err(|_| TransportError::Closed)
    }
}

impl ParamReceiver {
    /// Blocks until a frame arrives, or fails once every sender is gone.
    pub fn recv(&self) -> Result<ParameterMessage, TransportError> {
        let frame = self.inner.recv().map_err(|_| TransportError::Closed)?;
        decode(&frame)
    }
}
