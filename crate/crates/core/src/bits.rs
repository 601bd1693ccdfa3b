//! Packed bit sequences, LSB-first within 64-bit words.

use std::fmt;

/// A growable sequence of bits. Bit `t` lives in word `t / 64` at
/// position `t % 64`. Bits past `len` are always zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut seq = Self::new();
        for b in bits {
            seq.push(b);
        }
        seq
    }

    /// Builds a sequence from raw words, clearing any bits at or past `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut seq = Self { words, len };
        seq.clear_tail();
        seq
    }

    /// The low `len` bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self::from_words(vec![value], len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, t: usize) -> bool {
        assert!(t < self.len, "bit index {t} out of range {}", self.len);
        (self.words[t >> 6] >> (t & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, t: usize, bit: bool) {
        assert!(t < self.len, "bit index {t} out of range {}", self.len);
        let mask = 1u64 << (t & 63);
        if bit {
            self.words[t >> 6] |= mask;
        } else {
            self.words[t >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len & 63 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[self.len >> 6] |= 1 << (self.len & 63);
        }
        self.len += 1;
    }

    /// Up to 64 bits starting at `start`, bit `start` in position 0.
    /// Positions past the end read as zero.
    pub fn window(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64);
        if width == 0 || start >= self.len {
            return 0;
        }
        let w = start >> 6;
        let off = start & 63;
        let mut v = self.words[w] >> off;
        if off != 0 && w + 1 < self.words.len() {
            v |= self.words[w + 1] << (64 - off);
        }
        if width < 64 {
            v &= (1u64 << width) - 1;
        }
        v
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |t| self.get(t))
    }

    /// Copies bits `[start, start + len)` into a new sequence.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len);
        let mut out = Self::zeros(len);
        for (k, word) in out.words.iter_mut().enumerate() {
            *word = self.window(start + 64 * k, 64);
        }
        out.clear_tail();
        out
    }

    /// Packs the bits LSB-first into bytes: bit `t` is bit `t % 8` of byte `t / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect()
    }

    /// Inverse of [`BitSeq::to_bytes`]. Returns `None` if `bytes` has the
    /// wrong length or carries set padding bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        if !len.is_multiple_of(8) {
            let last = bytes[bytes.len() - 1];
            if last >> (len % 8) != 0 {
                return None;
            }
        }
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        Some(Self::from_words(words, len))
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSeq[{}](", self.len)?;
        for b in self.iter().take(128) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > 128 {
            f.write_str("…")?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bools(iter)
    }
}
