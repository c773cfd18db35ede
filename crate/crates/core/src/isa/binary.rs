// SPDX-License-Identifier: Apache-2.0

//! Binary program files: 8-byte header (`D3IS`, u16 version, u16 reserved)
//! followed by little-endian 16-bit words.

use super::InstructionWord;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"D3IS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BinaryError {
    #[error("file shorter than the 8-byte header")]
    Truncated,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("payload length {0} is not a multiple of 2")]
    OddPayload(usize),
}

pub fn write_program(words: &[InstructionWord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * words.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    for w in words {
        out.extend_from_slice(&w.0.to_le_bytes());
    }
    out
}

pub fn read_program(bytes: &[u8]) -> Result<Vec<InstructionWord>, BinaryError> {
    if bytes.len() < HEADER_LEN {
        return Err(BinaryError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(BinaryError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(BinaryError::Version(version));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() % 2 != 0 {
        return Err(BinaryError::OddPayload(payload.len()));
    }
    Ok(payload
        .chunks_exact(2)
        .map(|c| InstructionWord(u16::from_le_bytes([c[0], c[1]])))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_size() {
        let words = vec![InstructionWord(0x280D), InstructionWord(0x480A)];
        let bytes = write_program(&words);
        assert_eq!(bytes.len() - HEADER_LEN, 4);
        assert_eq!(read_program(&bytes).unwrap(), words);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(read_program(b"D3IS"), Err(BinaryError::Truncated));
        assert_eq!(read_program(b"XXXX\x01\x00\x00\x00"), Err(BinaryError::BadMagic));
        assert_eq!(read_program(b"D3IS\x01\x00\x00\x00\x01"), Err(BinaryError::OddPayload(1)));
    }
}
