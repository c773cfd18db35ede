// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

pub const WIDTHS: [u8; 5] = [1, 2, 4, 8, 16];

/// Element width and signedness of a weight array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightFormat {
    pub bits: u8,
    pub signed: bool,
}

impl WeightFormat {
    pub fn new(bits: u8, signed: bool) -> Option<WeightFormat> {
        WIDTHS.contains(&bits).then_some(WeightFormat { bits, signed })
    }

    pub fn range(self) -> (i32, i32) {
        let b = self.bits as u32;
        if self.signed {
            (-(1i32 << (b - 1)), (1i32 << (b - 1)) - 1)
        } else {
            (0, ((1i64 << b) - 1) as i32)
        }
    }

    pub fn fits(self, w: i32) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&w)
    }

    /// Narrowest format holding all of `weights`.
    pub fn smallest_for(weights: impl IntoIterator<Item = i32> + Clone) -> Option<WeightFormat> {
        let signed = weights.clone().into_iter().any(|w| w < 0);
        WIDTHS
            .iter()
            .map(|&bits| WeightFormat { bits, signed })
            .find(|f| weights.clone().into_iter().all(|w| f.fits(w)))
    }
}

/// Densely packed weights: element `i` occupies bits `[i*w, (i+1)*w)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightArray {
    pub format: WeightFormat,
    len: usize,
    words: Vec<u64>,
}

impl WeightArray {
    pub fn new(format: WeightFormat) -> WeightArray {
        WeightArray { format, len: 0, words: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.len as u64 * self.format.bits as u64
    }

    fn mask(&self) -> u64 {
        (1u64 << self.format.bits) - 1
    }

    /// Append a weight; returns its element index, or `None` if it does not fit.
    pub fn push(&mut self, w: i32) -> Option<usize> {
        if !self.format.fits(w) {
            return None;
        }
        let idx = self.len;
        self.len += 1;
        let bit = idx * self.format.bits as usize;
        if bit / 64 >= self.words.len() {
            self.words.push(0);
        }
        self.write_raw(idx, w as u64 & self.mask());
        Some(idx)
    }

    fn write_raw(&mut self, idx: usize, raw: u64) {
        let bit = idx * self.format.bits as usize;
        let (word, off) = (bit / 64, bit % 64);
        let mask = self.mask() << off;
        self.words[word] = (self.words[word] & !mask) | (raw << off);
    }

    pub fn get(&self, idx: usize) -> i32 {
        assert!(idx < self.len, "weight index {idx} out of {}", self.len);
        let b = self.format.bits as usize;
        let bit = idx * b;
        let raw = (self.words[bit / 64] >> (bit % 64)) & self.mask();
        if self.format.signed && raw >> (b - 1) == 1 {
            (raw as i64 - (1i64 << b)) as i32
        } else {
            raw as i32
        }
    }

    /// Overwrite an element, saturating to the representable range.
    /// Returns true when the value had to be clipped.
    pub fn set_saturating(&mut self, idx: usize, w: i32) -> bool {
        assert!(idx < self.len);
        let (lo, hi) = self.format.range();
        let c = w.clamp(lo, hi);
        self.write_raw(idx, c as u64 & self.mask());
        c != w
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranges() {
        assert_eq!(WeightFormat::new(1, true).unwrap().range(), (-1, 0));
        assert_eq!(WeightFormat::new(4, false).unwrap().range(), (0, 15));
        assert_eq!(WeightFormat::new(16, true).unwrap().range(), (-32768, 32767));
        assert!(WeightFormat::new(3, true).is_none());
        assert_eq!(WeightFormat::smallest_for([0, 3, -2]), WeightFormat::new(4, true));
    }

    #[test]
    fn overflow_rejected() {
        let mut a = WeightArray::new(WeightFormat::new(2, false).unwrap());
        assert_eq!(a.push(4), None);
        assert_eq!(a.push(3), Some(0));
        assert!(a.set_saturating(0, 9));
        assert_eq!(a.get(0), 3);
    }

    proptest! {
        #[test]
        fn pack_roundtrip(width_idx in 0usize..5, signed: bool, raw in proptest::collection::vec(any::<i32>(), 0..300)) {
            let f = WeightFormat { bits: WIDTHS[width_idx], signed };
            let (lo, hi) = f.range();
            let span = hi as i64 - lo as i64 + 1;
            let vals: Vec<i32> = raw.iter().map(|&r| (lo as i64 + (r as i64).rem_euclid(span)) as i32).collect();
            let mut a = WeightArray::new(f);
            for &v in &vals {
                a.push(v).unwrap();
            }
            prop_assert_eq!(a.iter().collect::<Vec<_>>(), vals.clone());
            prop_assert_eq!(a.bits(), vals.len() as u64 * f.bits as u64);
        }
    }
}
