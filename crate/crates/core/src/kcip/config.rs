use std::fmt::Write as _;

use crate::graph::Vertex;

/// Bit-packed `{0,1}` labelling of the vertices with a cached popcount.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    words: Vec<u64>,
    n: usize,
    count: usize,
}

impl SpinConfig {
    pub fn empty(n: usize) -> Self {
        SpinConfig {
            words: vec![0; n.div_ceil(64)],
            n,
            count: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut x = Self::empty(n);
        for v in 0..n {
            x.set(v, true);
        }
        x
    }

    pub fn from_vertices(n: usize, occupied: impl IntoIterator<Item = Vertex>) -> Self {
        let mut x = Self::empty(n);
        for v in occupied {
            x.set(v, true);
        }
        x
    }

    /// Vertex `v` is bit `v` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask constructor needs n <= 64");
        let mut x = Self::empty(n);
        if n > 0 {
            let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            x.words[0] = mask & keep;
            x.count = x.words[0].count_ones() as usize;
        }
        x
    }

    /// Inverse of [`SpinConfig::from_mask`]; `None` when `n > 64`.
    pub fn to_mask(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words.first().copied().unwrap_or(0))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of occupied vertices, `|x|`.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> bool {
        (self.words[v >> 6] >> (v & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, v: Vertex, value: bool) {
        let bit = 1u64 << (v & 63);
        let w = &mut self.words[v >> 6];
        let was = *w & bit != 0;
        if was != value {
            *w ^= bit;
            if value {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub fn occupied(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }

    /// Hex of the labelling read as an integer with vertex 0 as the least
    /// significant bit, zero-padded to `ceil(n/4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.n.div_ceil(4).max(1);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let word = self.words.get(bit >> 6).copied().unwrap_or(0);
            let nibble = (word >> (bit & 63)) & 0xf;
            let _ = write!(s, "{nibble:x}");
        }
        s
    }

    pub fn from_hex(n: usize, hex: &str) -> Option<Self> {
        let mut x = Self::empty(n);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)? as usize;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let v = d * 4 + b;
                    if v >= n {
                        return None;
                    }
                    x.set(v, true);
                }
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn count_tracks_sets() {
        let mut x = SpinConfig::empty(130);
        x.set(0, true);
        x.set(129, true);
        x.set(129, true);
        assert_eq!(x.count(), 2);
        x.set(0, false);
        assert_eq!(x.count(), 1);
        assert_eq!(x.occupied().collect::<Vec<_>>(), vec![129]);
    }

    #[test]
    fn hex_layout() {
        let x = SpinConfig::from_vertices(6, [0, 5]);
        assert_eq!(x.to_hex(), "21");
        assert_eq!(SpinConfig::from_mask(4, 0b0001).to_hex(), "1");
    }

    proptest! {
        #[test]
        fn hex_roundtrip(n in 1usize..200, seed in proptest::collection::vec(any::<u16>(), 0..40)) {
            let x = SpinConfig::from_vertices(n, seed.iter().map(|&s| s as usize % n));
            let y = SpinConfig::from_hex(n, &x.to_hex()).unwrap();
            prop_assert_eq!(x.count(), x.occupied().count());
            prop_assert_eq!(y, x);
        }
    }
}
