//! MSB-first bit packing.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Bits used in the last byte, 0 when it is full (or absent).
    used: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        if self.used == 0 {
            self.bytes.len() * 8
        } else {
            (self.bytes.len() - 1) * 8 + self.used as usize
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.used == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("pushed above") |= 0x80 >> self.used;
        }
        self.used = (self.used + 1) % 8;
    }

    /// Low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.push_bit(value >> i & 1 == 1);
        }
    }

    /// LEB128, each 8-bit group written through the bit stream.
    pub fn push_varint(&mut self, mut value: u64) {
        loop {
            let low = (value & 0x7f) as u8;
            value >>= 7;
            if value == 0 {
                self.push_bits(low as u64, 8);
                return;
            }
            self.push_bits((low | 0x80) as u64, 8);
        }
    }

    /// Pads with zero bits to a byte boundary.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    /// Offset of the next bit.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bytes.len() * 8 {
            return Err(Error::Corrupt { offset: self.pos, reason: "unexpected end of input".into() });
        }
        let bit = self.bytes[self.pos / 8] >> (7 - self.pos % 8) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = v << 1 | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_varint(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut value = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = self.read_bits(8)?;
            let part = byte & 0x7f;
            if shift == 63 && part > 1 {
                break;
            }
            value |= part << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(Error::Corrupt { offset: start, reason: "varint overflows 64 bits".into() })
    }
}

/// `'0'`/`'1'` text for a byte buffer.
pub fn to_bit_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:08b}")).collect()
}

/// Inverse of [`to_bit_string`]; whitespace is ignored and a partial last
/// byte is zero-padded.
pub fn from_bit_string(text: &str) -> Result<Vec<u8>> {
    let mut w = BitWriter::new();
    for (i, c) in text.chars().filter(|c| !c.is_whitespace()).enumerate() {
        match c {
            '0' => w.push_bit(false),
            '1' => w.push_bit(true),
            _ => return Err(Error::Input(format!("bit text has '{c}' at position {i}"))),
        }
    }
    Ok(w.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_round_trip() {
        let mut w = BitWriter::new();
        w.push_bits(0b101, 3);
        w.push_varint(300);
        w.push_bit(true);
        assert_eq!(w.bit_len(), 3 + 16 + 1);
        let bytes = w.finish();
        assert_eq!(bytes.len(), 3);
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(3).unwrap(), 0b101);
        assert_eq!(r.read_varint().unwrap(), 300);
        assert!(r.read_bit().unwrap());
        assert_eq!(r.remaining(), 4);
    }

    #[test]
    fn varint_extremes() {
        for v in [0, 1, 127, 128, u32::MAX as u64, u64::MAX] {
            let mut w = BitWriter::new();
            w.push_varint(v);
            let bytes = w.finish();
            assert_eq!(BitReader::new(&bytes).read_varint().unwrap(), v);
        }
        let bad = [0xffu8; 11];
        assert!(matches!(BitReader::new(&bad).read_varint(), Err(Error::Corrupt { offset: 0, .. })));
    }

    #[test]
    fn reading_past_end_reports_offset() {
        let mut r = BitReader::new(&[0xff]);
        r.read_bits(8).unwrap();
        assert!(matches!(r.read_bit(), Err(Error::Corrupt { offset: 8, .. })));
    }

    #[test]
    fn bit_text() {
        assert_eq!(to_bit_string(&[0x56, 0x01]), "0101011000000001");
        assert_eq!(from_bit_string("0101 0110 1").unwrap(), vec![0x56, 0x80]);
        assert!(from_bit_string("012").is_err());
    }
}
