//! Letter-pair packetization and packet stream text format.
//!
//! Letters map to two-digit codes (`a` = 00 ... `z` = 25) and consecutive
//! pairs form one four-digit packet `hi * 100 + lo`, so "pa" becomes 1500.
//! ASCII spaces are dropped before pairing and are not recovered on decode.

use std::fmt;

/// Largest valid packet value ("zz").
pub const MAX_PACKET: u64 = 2525;

/// Raw benchmark blocks stay in `0..=RAW_BLOCK_MAX`.
pub const RAW_BLOCK_MAX: u64 = 800;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unsupported character at index {index}: {ch:?}")]
    UnsupportedChar { index: usize, ch: char },
    #[error("odd-length message ({0} letters after removing spaces)")]
    OddLength(usize),
    #[error("invalid packet {0}")]
    InvalidPacket(u64),
    #[error("invalid block `{0}` in packet stream")]
    BadToken(String),
}

/// Two letters packed as `hi * 100 + lo`, each half in `0..=25`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Packet(u16);

impl Packet {
    pub fn new(value: u64) -> Result<Self, CodecError> {
        if value > MAX_PACKET || value % 100 > 25 {
            return Err(CodecError::InvalidPacket(value));
        }
        Ok(Self(value as u16))
    }

    fn from_letters(hi: u8, lo: u8) -> Self {
        Self(u16::from(hi - b'a') * 100 + u16::from(lo - b'a'))
    }

    pub fn value(self) -> u64 {
        u64::from(self.0)
    }

    pub fn letters(self) -> [char; 2] {
        let hi = (self.0 / 100) as u8;
        let lo = (self.0 % 100) as u8;
        [char::from(b'a' + hi), char::from(b'a' + lo)]
    }
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.0)
    }
}

impl From<Packet> for u64 {
    fn from(p: Packet) -> u64 {
        p.value()
    }
}

pub fn encode_text(text: &str) -> Result<Vec<Packet>, CodecError> {
    let mut letters = Vec::with_capacity(text.len());
    for (index, ch) in text.chars().enumerate() {
        match ch {
            ' ' => {}
            'a'..='z' => letters.push(ch as u8),
            _ => return Err(CodecError::UnsupportedChar { index, ch }),
        }
    }
    if letters.len() % 2 != 0 {
        return Err(CodecError::OddLength(letters.len()));
    }
    Ok(letters
        .chunks_exact(2)
        .map(|pair| Packet::from_letters(pair[0], pair[1]))
        .collect())
}

pub fn decode_packets(values: &[u64]) -> Result<String, CodecError> {
    let mut out = String::with_capacity(values.len() * 2);
    for &v in values {
        out.extend(Packet::new(v)?.letters());
    }
    Ok(out)
}

/// Space-separated, zero-padded to four digits: `1500 1700 0411`.
pub fn format_packets<I>(values: I) -> String
where
    I: IntoIterator,
    I::Item: Into<u64>,
{
    let parts: Vec<String> = values
        .into_iter()
        .map(|v| format!("{:04}", v.into()))
        .collect();
    parts.join(" ")
}

/// Parses whitespace-separated decimal blocks. Leading zeros are allowed.
pub fn parse_stream(text: &str) -> Result<Vec<u64>, CodecError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| CodecError::BadToken(tok.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadMode {
    Letters,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessagePayload {
    pub blocks: Vec<u64>,
    pub mode: PayloadMode,
}

impl MessagePayload {
    pub fn from_text(text: &str) -> Result<Self, CodecError> {
        Ok(Self {
            blocks: encode_text(text)?.into_iter().map(Packet::value).collect(),
            mode: PayloadMode::Letters,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

// MMIX constants.
const LCG_MUL: u64 = 6_364_136_223_846_793_005;
const LCG_INC: u64 = 1_442_695_040_888_963_407;

/// Deterministic raw payload of `size` blocks in `0..=800`.
///
/// A 64-bit LCG seeded with `seed` is stepped once per block and the block
/// is `state mod 801`.
pub fn generate_payload(size: usize, seed: u64) -> MessagePayload {
    let mut state = seed;
    let blocks = (0..size)
        .map(|_| {
            state = state.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
            state % (RAW_BLOCK_MAX + 1)
        })
        .collect();
    MessagePayload {
        blocks,
        mode: PayloadMode::Raw,
    }
}
