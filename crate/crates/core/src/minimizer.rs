//! Two-level minimization of covers over vocabulary positions.
//!
//! Exact mode computes the primes that cover each on-point as minimal
//! hitting sets against the off-set, then solves the covering problem by
//! branch and bound. Greedy mode expands each cube against the off-set and
//! drops redundant cubes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;
use serde::{Deserialize, Serialize};

use crate::cube::{mask, Cube};
use crate::formula::Formula;

/// Widths up to this use the exact method by default.
pub const EXACT_LIMIT: usize = 16;
/// Exact mode is refused above this width.
pub const EXACT_MAX: usize = 24;
/// Branch-and-bound nodes before settling for the best cover found.
pub const NODE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeCover {
    pub n: usize,
    pub cubes: Vec<Cube>,
}

impl CubeCover {
    pub fn new(n: usize, cubes: Vec<Cube>) -> Self {
        let mut c = CubeCover { n, cubes: Vec::new() };
        for x in cubes {
            c.push(x);
        }
        c
    }

    pub fn empty(n: usize) -> Self {
        CubeCover { n, cubes: Vec::new() }
    }

    /// Adds a cube unless it is already present.
    pub fn push(&mut self, c: Cube) {
        let c = Cube::new(c.care & mask(self.n), c.bits);
        if !self.cubes.contains(&c) {
            self.cubes.push(c);
        }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains_point(&self, v: u64) -> bool {
        self.cubes.iter().any(|c| c.contains_point(v))
    }

    pub fn literals(&self) -> u32 {
        self.cubes.iter().map(Cube::literals).sum()
    }

    /// Cubes sorted position by position with `0 < 1 < -`.
    pub fn sorted(mut self) -> Self {
        let n = self.n;
        self.cubes.sort_by(|a, b| a.cmp_lex(b, n));
        self
    }

    /// Conventional PLA text with one output. Don't-care cubes are
    /// listed with output `-` under `.type fd`.
    pub fn to_pla(&self, dontcare: Option<&CubeCover>) -> String {
        let dc = dontcare.map(|d| d.cubes.as_slice()).unwrap_or(&[]);
        let mut s = String::new();
        let _ = writeln!(s, ".i {}", self.n);
        let _ = writeln!(s, ".o 1");
        if !dc.is_empty() {
            let _ = writeln!(s, ".type fd");
        }
        let _ = writeln!(s, ".p {}", self.cubes.len() + dc.len());
        for c in &self.cubes {
            let _ = writeln!(s, "{} 1", c.render(self.n));
        }
        for c in dc {
            let _ = writeln!(s, "{} -", c.render(self.n));
        }
        s.push_str(".e\n");
        s
    }

    /// Reads what [`Self::to_pla`] writes: the on-set and don't-care set.
    pub fn from_pla(src: &str) -> Result<(CubeCover, CubeCover), String> {
        let mut n = None;
        let mut on = Vec::new();
        let mut dc = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            match head {
                ".i" => {
                    let v = parts.next().and_then(|x| x.parse().ok());
                    n = Some(v.ok_or_else(|| format!("line {}: bad .i", i + 1))?);
                }
                ".o" | ".p" | ".type" => {}
                ".e" => break,
                _ => {
                    let cube = Cube::parse(head).ok_or_else(|| format!("line {}: bad cube", i + 1))?;
                    match parts.next() {
                        Some("1") => on.push(cube),
                        Some("-") => dc.push(cube),
                        Some("0") => {}
                        _ => return Err(format!("line {}: bad output column", i + 1)),
                    }
                }
            }
        }
        let n = n.ok_or("missing .i")?;
        Ok((CubeCover::new(n, on), CubeCover::new(n, dc)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimizeMode {
    /// Exact up to [`EXACT_LIMIT`] positions, greedy above.
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minimized {
    pub cover: CubeCover,
    /// False when greedy ran or the node cap was reached.
    pub exact: bool,
}

pub fn minimize(cover: &CubeCover, dontcare: &CubeCover) -> CubeCover {
    minimize_with(cover, dontcare, MinimizeMode::Auto).cover
}

pub fn minimize_with(cover: &CubeCover, dontcare: &CubeCover, mode: MinimizeMode) -> Minimized {
    assert_eq!(cover.n, dontcare.n, "cover widths differ");
    let n = cover.n;
    let exact = match mode {
        MinimizeMode::Auto => n <= EXACT_LIMIT,
        MinimizeMode::Exact if n > EXACT_MAX => {
            log::warn!("{n} positions is too many for exact minimization; using greedy");
            false
        }
        MinimizeMode::Exact => true,
        MinimizeMode::Greedy => false,
    };
    if cover.is_empty() {
        return Minimized { cover: CubeCover::empty(n), exact: true };
    }
    let off = complement(n, cover.cubes.iter().chain(&dontcare.cubes));
    let greedy = greedy_cover(cover, dontcare, &off);
    if !exact {
        return Minimized { cover: greedy, exact: false };
    }
    let (result, complete) = exact_cover(cover, &off, greedy);
    Minimized { cover: result, exact: complete }
}

/// Disjoint cubes covering every point outside `cubes`.
pub fn complement<'a>(n: usize, cubes: impl IntoIterator<Item = &'a Cube>) -> Vec<Cube> {
    let mut rest = alloc::vec![Cube::FULL];
    for c in cubes {
        let mut next = Vec::with_capacity(rest.len());
        for r in &rest {
            next.extend(r.sharp(c, n));
        }
        rest = next;
        if rest.is_empty() {
            break;
        }
    }
    rest
}

/// `c` lies inside the union of `others`.
pub fn covered_by(c: &Cube, others: &[Cube], n: usize) -> bool {
    let mut rest = alloc::vec![*c];
    for o in others {
        let mut next = Vec::with_capacity(rest.len());
        for r in &rest {
            next.extend(r.sharp(o, n));
        }
        rest = next;
        if rest.is_empty() {
            return true;
        }
    }
    rest.is_empty()
}

fn cmp_cover(a: &[Cube], b: &[Cube], n: usize) -> Ordering {
    let la: u32 = a.iter().map(Cube::literals).sum();
    let lb: u32 = b.iter().map(Cube::literals).sum();
    a.len().cmp(&b.len()).then(la.cmp(&lb)).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            match x.cmp_lex(y, n) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

fn greedy_cover(cover: &CubeCover, dontcare: &CubeCover, off: &[Cube]) -> CubeCover {
    let n = cover.n;
    // Expand: drop literals, in position order, while the cube stays off
    // the off-set.
    let mut expanded = CubeCover::empty(n);
    let mut order = cover.cubes.clone();
    order.sort_by(|a, b| b.literals().cmp(&a.literals()).then(a.cmp_lex(b, n)));
    for c in order {
        if expanded.cubes.iter().any(|e| e.contains(&c)) {
            continue;
        }
        let mut cur = c;
        for i in 0..n {
            let bit = 1u64 << i;
            if cur.care & bit == 0 {
                continue;
            }
            let wider = Cube::new(cur.care & !bit, cur.bits);
            if !off.iter().any(|o| o.intersects(&wider)) {
                cur = wider;
            }
        }
        expanded.cubes.retain(|e| !cur.contains(e));
        expanded.push(cur);
    }
    // Irredundant: drop cubes covered by the rest, narrowest first.
    let mut cubes = expanded.cubes;
    cubes.sort_by(|a, b| b.literals().cmp(&a.literals()).then(a.cmp_lex(b, n)));
    let mut i = 0;
    while i < cubes.len() {
        let others: Vec<Cube> = cubes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| *c)
            .chain(dontcare.cubes.iter().copied())
            .collect();
        if covered_by(&cubes[i], &others, n) {
            cubes.remove(i);
        } else {
            i += 1;
        }
    }
    CubeCover { n, cubes }.sorted()
}

/// Minimal hitting sets of `sets`, each a bit mask.
fn minimal_hitting_sets(sets: &[u64]) -> Vec<u64> {
    let mut hs: Vec<u64> = alloc::vec![0];
    for &d in sets {
        let mut next: Vec<u64> = Vec::new();
        let mut grow: Vec<u64> = Vec::new();
        for &h in &hs {
            if h & d != 0 {
                next.push(h);
            } else {
                let mut rest = d;
                while rest != 0 {
                    let e = rest & rest.wrapping_neg();
                    rest &= rest - 1;
                    grow.push(h | e);
                }
            }
        }
        for g in grow {
            if !next.iter().any(|&h| h & g == h) {
                next.retain(|&h| h & g != g);
                next.push(g);
            }
        }
        next.sort_unstable();
        next.dedup();
        hs = next;
    }
    hs
}

fn on_points(cover: &CubeCover) -> Vec<u64> {
    let n = cover.n;
    let mut pts = BTreeSet::new();
    for c in &cover.cubes {
        let free = !c.care & mask(n);
        // Enumerate subsets of the free positions.
        let mut sub = 0u64;
        loop {
            pts.insert(c.bits | sub);
            if sub == free {
                break;
            }
            sub = (sub.wrapping_sub(free)) & free;
        }
    }
    pts.into_iter().collect()
}

fn exact_cover(cover: &CubeCover, off: &[Cube], fallback: CubeCover) -> (CubeCover, bool) {
    let n = cover.n;
    let points = on_points(cover);
    let mut primes: Vec<Cube> = Vec::new();
    for &m in &points {
        let mut sets: Vec<u64> = off.iter().map(|o| o.care & (o.bits ^ m)).collect();
        sets.sort_by_key(|s| s.count_ones());
        let mut reduced: Vec<u64> = Vec::new();
        for s in sets {
            if !reduced.iter().any(|&r| r & s == r) {
                reduced.push(s);
            }
        }
        for h in minimal_hitting_sets(&reduced) {
            let p = Cube::new(h, m);
            if !primes.contains(&p) {
                primes.push(p);
            }
        }
    }
    primes.sort_by(|a, b| a.cmp_lex(b, n));
    // Rows: for each point, the primes covering it.
    let rows: Vec<Vec<usize>> = points
        .iter()
        .map(|&m| (0..primes.len()).filter(|&j| primes[j].contains_point(m)).collect())
        .collect();
    let mut cols: Vec<Vec<usize>> = alloc::vec![Vec::new(); primes.len()];
    for (r, row) in rows.iter().enumerate() {
        for &j in row {
            cols[j].push(r);
        }
    }
    let mut search = CoverSearch {
        n,
        primes: &primes,
        rows: &rows,
        cols: &cols,
        best: fallback.cubes.clone(),
        nodes: 0,
        capped: false,
    };
    let mut chosen = Vec::new();
    let mut covered = alloc::vec![false; rows.len()];
    search.run(&mut chosen, &mut covered);
    let capped = search.capped;
    let best = search.best;
    (CubeCover { n, cubes: best }.sorted(), !capped)
}

struct CoverSearch<'a> {
    n: usize,
    primes: &'a [Cube],
    rows: &'a [Vec<usize>],
    cols: &'a [Vec<usize>],
    best: Vec<Cube>,
    nodes: usize,
    capped: bool,
}

impl CoverSearch<'_> {
    fn run(&mut self, chosen: &mut Vec<usize>, covered: &mut Vec<bool>) {
        self.nodes += 1;
        if self.nodes > NODE_CAP {
            self.capped = true;
            return;
        }
        // The uncovered row with the fewest candidates.
        let row = (0..self.rows.len())
            .filter(|&r| !covered[r])
            .min_by_key(|&r| self.rows[r].len());
        let Some(row) = row else {
            let mut cubes: Vec<Cube> = chosen.iter().map(|&j| self.primes[j]).collect();
            cubes.sort_by(|a, b| a.cmp_lex(b, self.n));
            if cmp_cover(&cubes, &self.best, self.n) == Ordering::Less {
                self.best = cubes;
            }
            return;
        };
        if chosen.len() + 1 > self.best.len() {
            return;
        }
        for &j in &self.rows[row] {
            let newly: Vec<usize> = self.cols[j].iter().copied().filter(|&r| !covered[r]).collect();
            for &r in &newly {
                covered[r] = true;
            }
            chosen.push(j);
            self.run(chosen, covered);
            chosen.pop();
            for &r in &newly {
                covered[r] = false;
            }
            if self.capped {
                return;
            }
        }
    }

}

/// Cubes covering every `on` point and no `off` point, with all other
/// points free. Greedy, for when the don't-care set is too large to list.
pub fn separate(n: usize, on: &[u64], off: &[u64]) -> CubeCover {
    let mut on: Vec<u64> = on.iter().map(|v| v & mask(n)).collect();
    on.sort_by_key(|v| crate::cube::lex_key(*v, n));
    on.dedup();
    let mut cubes: Vec<Cube> = Vec::new();
    for &p in &on {
        if cubes.iter().any(|c| c.contains_point(p)) {
            continue;
        }
        let mut cur = Cube::point(n, p);
        for i in 0..n {
            let wider = Cube::new(cur.care & !(1u64 << i), cur.bits);
            if !off.iter().any(|&o| wider.contains_point(o)) {
                cur = wider;
            }
        }
        cubes.push(cur);
    }
    let mut i = 0;
    while i < cubes.len() {
        let c = cubes[i];
        let redundant = on.iter().filter(|&&p| c.contains_point(p)).all(|&p| {
            cubes.iter().enumerate().any(|(j, o)| j != i && o.contains_point(p))
        });
        if redundant {
            cubes.remove(i);
        } else {
            i += 1;
        }
    }
    CubeCover { n, cubes }.sorted()
}

/// `or` of `and`s of vocabulary literals, in cover order.
pub fn cover_to_formula(cover: &CubeCover, vocabulary: &[Formula]) -> Formula {
    assert!(vocabulary.len() >= cover.n, "vocabulary narrower than cover");
    Formula::or(
        cover
            .cubes
            .iter()
            .map(|c| {
                Formula::and(
                    (0..cover.n)
                        .filter_map(|i| {
                            c.value(i).map(|v| {
                                if v {
                                    vocabulary[i].clone()
                                } else {
                                    Formula::not(vocabulary[i].clone())
                                }
                            })
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}
