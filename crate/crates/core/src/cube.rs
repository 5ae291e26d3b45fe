//! Ternary cubes over up to 64 boolean positions, and the frontier of
//! valuations still to be processed.
//!
//! Position `i` of a cube is formula `i` of the vocabulary. A cube fixes
//! the positions in `care` to the matching bits of `bits`; the rest are
//! free.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

pub const MAX_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub care: u64,
    pub bits: u64,
}

pub fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl Cube {
    pub const FULL: Cube = Cube { care: 0, bits: 0 };

    pub fn new(care: u64, bits: u64) -> Self {
        Cube { care, bits: bits & care }
    }

    pub fn point(n: usize, bits: u64) -> Self {
        Cube::new(mask(n), bits)
    }

    pub fn literals(&self) -> u32 {
        self.care.count_ones()
    }

    /// Number of points, as `2^(n - literals)`.
    pub fn count(&self, n: usize) -> u128 {
        1u128 << (n as u32 - (self.care & mask(n)).count_ones())
    }

    pub fn contains_point(&self, v: u64) -> bool {
        (v ^ self.bits) & self.care == 0
    }

    pub fn intersects(&self, o: &Cube) -> bool {
        (self.bits ^ o.bits) & self.care & o.care == 0
    }

    pub fn intersect(&self, o: &Cube) -> Option<Cube> {
        self.intersects(o).then(|| Cube::new(self.care | o.care, self.bits | o.bits))
    }

    /// `o` is a subset of `self`.
    pub fn contains(&self, o: &Cube) -> bool {
        self.care & !o.care == 0 && (self.bits ^ o.bits) & self.care == 0
    }

    pub fn value(&self, i: usize) -> Option<bool> {
        (self.care >> i & 1 == 1).then(|| self.bits >> i & 1 == 1)
    }

    /// The least point under [`lex_key`].
    pub fn min_point(&self) -> u64 {
        self.bits
    }

    /// `self` minus `o`, as disjoint cubes.
    pub fn sharp(&self, o: &Cube, n: usize) -> Vec<Cube> {
        if !self.intersects(o) {
            return alloc::vec![*self];
        }
        let mut out = Vec::new();
        let mut cur = *self;
        let free = o.care & !self.care & mask(n);
        for i in 0..n {
            if free >> i & 1 == 0 {
                continue;
            }
            let bit = 1u64 << i;
            let theirs = o.bits & bit;
            out.push(Cube::new(cur.care | bit, cur.bits | (theirs ^ bit)));
            cur = Cube::new(cur.care | bit, cur.bits | theirs);
        }
        out
    }

    /// Ternary string, position 0 first: `1` true, `0` false, `-` free.
    pub fn render(&self, n: usize) -> String {
        (0..n)
            .map(|i| match self.value(i) {
                Some(true) => '1',
                Some(false) => '0',
                None => '-',
            })
            .collect()
    }

    pub fn parse(s: &str) -> Option<Cube> {
        if s.len() > MAX_WIDTH {
            return None;
        }
        let mut c = Cube::FULL;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => c = Cube::new(c.care | 1 << i, c.bits | 1 << i),
                '0' => c = Cube::new(c.care | 1 << i, c.bits),
                '-' => {}
                _ => return None,
            }
        }
        Some(c)
    }

    /// Position-by-position comparison with `0 < 1 < -`.
    pub fn cmp_lex(&self, o: &Cube, n: usize) -> Ordering {
        let rank = |c: &Cube, i: usize| match c.value(i) {
            Some(false) => 0,
            Some(true) => 1,
            None => 2,
        };
        for i in 0..n {
            match rank(self, i).cmp(&rank(o, i)) {
                Ordering::Equal => continue,
                x => return x,
            }
        }
        Ordering::Equal
    }
}

/// Sort key of a point: position 0 is the most significant digit and
/// false sorts before true.
pub fn lex_key(v: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        (v & mask(n)).reverse_bits() >> (64 - n)
    }
}

/// Unprocessed points, kept as pairwise disjoint cubes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    n: usize,
    cubes: Vec<Cube>,
}

impl Frontier {
    /// All `2^n` points.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_WIDTH, "at most {MAX_WIDTH} positions");
        Frontier { n, cubes: alloc::vec![Cube::FULL] }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn count(&self) -> u128 {
        self.cubes.iter().map(|c| c.count(self.n)).sum()
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn contains(&self, v: u64) -> bool {
        self.cubes.iter().any(|c| c.contains_point(v))
    }

    /// The least remaining point under [`lex_key`].
    pub fn min_point(&self) -> Option<u64> {
        self.cubes.iter().map(Cube::min_point).min_by_key(|v| lex_key(*v, self.n))
    }

    /// Remove every point of `cube`; returns how many were present.
    pub fn remove(&mut self, cube: &Cube) -> u128 {
        let mut removed = 0;
        let mut out = Vec::with_capacity(self.cubes.len());
        for c in &self.cubes {
            match c.intersect(cube) {
                None => out.push(*c),
                Some(x) => {
                    removed += x.count(self.n);
                    out.extend(c.sharp(cube, self.n));
                }
            }
        }
        self.cubes = out;
        removed
    }

    /// Put a point back; it must not be present.
    pub fn restore(&mut self, v: u64) {
        debug_assert!(!self.contains(v));
        self.cubes.push(Cube::point(self.n, v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sharp_is_disjoint_difference() {
        let n = 4;
        let a = Cube::FULL;
        let b = Cube::parse("1-0-").unwrap();
        let parts = a.sharp(&b, n);
        let total: u128 = parts.iter().map(|c| c.count(n)).sum();
        assert_eq!(total, 16 - 4);
        for v in 0..16u64 {
            let inside = parts.iter().filter(|c| c.contains_point(v)).count();
            assert_eq!(inside, usize::from(!b.contains_point(v)));
        }
    }

    #[test]
    fn lex_order_is_position_major() {
        // position 0 false sorts first
        assert!(lex_key(0b10, 2) < lex_key(0b01, 2));
        let mut f = Frontier::full(3);
        let mut seen = alloc::vec::Vec::new();
        while let Some(v) = f.min_point() {
            f.remove(&Cube::point(3, v));
            seen.push(Cube::point(3, v).render(3));
        }
        assert_eq!(seen, ["000", "001", "010", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn render_and_parse() {
        let c = Cube::parse("01-").unwrap();
        assert_eq!(c.render(3), "01-");
        assert_eq!(c.count(3), 2);
        assert!(Cube::parse("0x").is_none());
    }

    proptest! {
        #[test]
        fn frontier_counts_are_conserved(cuts in proptest::collection::vec(("[01-]{6}", any::<bool>()), 0..20)) {
            let n = 6;
            let mut f = Frontier::full(n);
            let mut removed = 0u128;
            let mut gone = [false; 64];
            for (s, _) in &cuts {
                let c = Cube::parse(s).unwrap();
                let before: u128 = (0..64u64).filter(|v| !gone[*v as usize] && c.contains_point(*v)).count() as u128;
                let r = f.remove(&c);
                prop_assert_eq!(r, before);
                removed += r;
                for v in 0..64u64 {
                    if c.contains_point(v) { gone[v as usize] = true; }
                }
            }
            prop_assert_eq!(f.count() + removed, 64);
            for v in 0..64u64 {
                prop_assert_eq!(f.contains(v), !gone[v as usize]);
            }
            for (i, a) in f.cubes().iter().enumerate() {
                for b in &f.cubes()[i + 1..] {
                    prop_assert!(!a.intersects(b));
                }
            }
        }

        #[test]
        fn min_point_is_least(cuts in proptest::collection::vec("[01-]{5}", 0..10)) {
            let n = 5;
            let mut f = Frontier::full(n);
            for s in &cuts { f.remove(&Cube::parse(s).unwrap()); }
            let brute = (0..32u64).filter(|v| f.contains(*v)).min_by_key(|v| lex_key(*v, n));
            prop_assert_eq!(f.min_point(), brute);
        }
    }
}
