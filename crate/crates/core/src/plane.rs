//! Dyadic geometry of the Walsh phase plane.
//!
//! Time intervals live in `[0,1)`, frequency intervals in `[0,inf)`; both are
//! dyadic and stored as `(level, index)` so containment, disjointness, and the
//! Fefferman order are decided in exact integer arithmetic. A tile has area 1,
//! a bitile area 2; a bitile splits into a lower child `s1` and an upper child
//! `s2` of equal frequency width.

use crate::carleson::ChoiceFunction;
use crate::error::{CoreError, Result};
use crate::signal::GridSignal;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IntervalKind {
    Time,
    Freq,
}

/// Half-open dyadic interval. Time: `[index 2^-level, (index+1) 2^-level)`.
/// Frequency: `[index 2^level, (index+1) 2^level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub kind: IntervalKind,
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn time(level: u32, index: u64) -> Result<Self> {
        if level >= 63 || index >= (1u64 << level) {
            return Err(CoreError::InvalidParameter(format!(
                "time interval index {index} out of range at level {level}"
            )));
        }
        Ok(Self {
            kind: IntervalKind::Time,
            level,
            index,
        })
    }

    pub fn freq(level: u32, index: u64) -> Result<Self> {
        if level >= 63 || index.checked_add(1).and_then(|i| i.checked_shl(level)).is_none() {
            return Err(CoreError::InvalidParameter(format!(
                "frequency interval ({level},{index}) exceeds integer range"
            )));
        }
        Ok(Self {
            kind: IntervalKind::Freq,
            level,
            index,
        })
    }

    pub fn measure(&self) -> f64 {
        match self.kind {
            IntervalKind::Time => 2f64.powi(-(self.level as i32)),
            IntervalKind::Freq => 2f64.powi(self.level as i32),
        }
    }

    /// Set containment; both intervals must be of the same kind.
    pub fn contains(&self, other: &Self) -> bool {
        assert_eq!(self.kind, other.kind, "cannot compare time with frequency");
        match self.kind {
            // Finer time intervals have higher level.
            IntervalKind::Time => {
                other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
            }
            // Finer frequency intervals have lower level.
            IntervalKind::Freq => {
                other.level <= self.level && (other.index >> (self.level - other.level)) == self.index
            }
        }
    }

    /// Dyadic intervals intersect iff one contains the other.
    pub fn intersects(&self, other: &Self) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// For frequency intervals: whether the integer frequency `n` lies inside.
    pub fn contains_freq(&self, n: u64) -> bool {
        assert_eq!(self.kind, IntervalKind::Freq);
        (n >> self.level) == self.index
    }

    /// For time intervals: whether the resolution-`n` cell lies inside.
    pub fn contains_cell(&self, cell: u64, n: u32) -> bool {
        assert_eq!(self.kind, IntervalKind::Time);
        assert!(self.level <= n, "interval finer than the grid");
        (cell >> (n - self.level)) == self.index
    }

    /// For time intervals: the range of resolution-`n` cells covered.
    pub fn cells(&self, n: u32) -> std::ops::Range<u64> {
        assert_eq!(self.kind, IntervalKind::Time);
        assert!(self.level <= n, "interval finer than the grid");
        let width = 1u64 << (n - self.level);
        (self.index * width)..((self.index + 1) * width)
    }
}

/// Area-1 rectangle: time and frequency intervals at the same level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tile {
    pub time: DyadicInterval,
    pub freq: DyadicInterval,
}

impl Tile {
    pub fn new(level: u32, time_index: u64, freq_index: u64) -> Result<Self> {
        Ok(Self {
            time: DyadicInterval::time(level, time_index)?,
            freq: DyadicInterval::freq(level, freq_index)?,
        })
    }

    /// Local Walsh frequency `n_t = |I_t| inf omega_t`.
    pub fn local_freq(&self) -> u64 {
        self.freq.index
    }
}

/// Area-2 rectangle: frequency interval one level coarser than a tile's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bitile {
    pub time: DyadicInterval,
    pub freq: DyadicInterval,
}

impl Bitile {
    pub fn new(time_level: u32, time_index: u64, freq_index: u64) -> Result<Self> {
        Ok(Self {
            time: DyadicInterval::time(time_level, time_index)?,
            freq: DyadicInterval::freq(time_level + 1, freq_index)?,
        })
    }

    /// Lower-frequency child tile `s1`.
    pub fn lower_tile(&self) -> Tile {
        Tile {
            time: self.time,
            freq: DyadicInterval {
                kind: IntervalKind::Freq,
                level: self.time.level,
                index: 2 * self.freq.index,
            },
        }
    }

    /// Upper-frequency child tile `s2`.
    pub fn upper_tile(&self) -> Tile {
        Tile {
            time: self.time,
            freq: DyadicInterval {
                kind: IntervalKind::Freq,
                level: self.time.level,
                index: 2 * self.freq.index + 1,
            },
        }
    }
}

/// Common view of tiles and bitiles for order comparisons.
pub trait PhaseRect {
    fn time_interval(&self) -> &DyadicInterval;
    fn freq_interval(&self) -> &DyadicInterval;
}

impl PhaseRect for Tile {
    fn time_interval(&self) -> &DyadicInterval {
        &self.time
    }
    fn freq_interval(&self) -> &DyadicInterval {
        &self.freq
    }
}

impl PhaseRect for Bitile {
    fn time_interval(&self) -> &DyadicInterval {
        &self.time
    }
    fn freq_interval(&self) -> &DyadicInterval {
        &self.freq
    }
}

/// Fefferman order: `a <= b` iff `I_a` nests inside `I_b` while `omega_a`
/// nests over `omega_b`.
pub fn feff_leq<R: PhaseRect>(a: &R, b: &R) -> bool {
    b.time_interval().contains(a.time_interval())
        && a.freq_interval().contains(b.freq_interval())
}

/// All bitiles with time interval of level `0..n` and frequency interval
/// inside `[0, freq_bound)`.
pub fn enumerate_bitiles(n: u32, freq_bound: u64) -> Result<BTreeSet<Bitile>> {
    if n >= 63 || freq_bound > (1u64 << n) {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: n,
            what: format!("frequency bound {freq_bound} exceeds the grid"),
        });
    }
    let mut out = BTreeSet::new();
    for level in 0..n {
        let block = 1u64 << (level + 1);
        let blocks = freq_bound / block;
        for b in 0..blocks {
            for i in 0..(1u64 << level) {
                out.insert(Bitile::new(level, i, b).expect("in range"));
            }
        }
    }
    Ok(out)
}

/// Checks each member belongs to the resolution-`n` ambient grid.
fn check_ambient(set: &BTreeSet<Bitile>, n: u32) -> Result<()> {
    for s in set {
        let hi = (s.freq.index + 1) << s.freq.level;
        if s.time.level >= n || hi > (1u64 << n) {
            return Err(CoreError::Precondition(format!(
                "bitile at time level {} with frequency top {} is not representable at resolution {}",
                s.time.level, hi, n
            )));
        }
    }
    Ok(())
}

/// Order convexity: every ambient bitile lying between two members (in the
/// Fefferman order) is itself a member.
pub fn is_convex(set: &BTreeSet<Bitile>, n: u32) -> Result<bool> {
    check_ambient(set, n)?;
    let ambient = enumerate_bitiles(n, 1u64 << n)?;
    for u in &ambient {
        if set.contains(u) {
            continue;
        }
        let above = set.iter().any(|b| feff_leq(u, b));
        if !above {
            continue;
        }
        let below = set.iter().any(|a| feff_leq(a, u));
        if below {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Members of `set` lying under `top` in the Fefferman order.
pub fn downset(set: &BTreeSet<Bitile>, top: &Bitile) -> BTreeSet<Bitile> {
    set.iter().filter(|s| feff_leq(*s, top)).copied().collect()
}

/// Bitiles all lying under a designated top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    top: Bitile,
    members: BTreeSet<Bitile>,
}

impl Tree {
    pub fn new(top: Bitile, members: BTreeSet<Bitile>) -> Result<Self> {
        if members.is_empty() {
            return Err(CoreError::InvalidParameter("tree with no members".into()));
        }
        for s in &members {
            if !feff_leq(s, &top) {
                return Err(CoreError::InvalidParameter(format!(
                    "member at time level {} not under the top",
                    s.time.level
                )));
            }
        }
        Ok(Self { top, members })
    }

    pub fn top(&self) -> &Bitile {
        &self.top
    }

    pub fn members(&self) -> &BTreeSet<Bitile> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Minimal disjoint dyadic cover of the union of upper-child frequency
/// intervals: absorb contained intervals, merge sibling pairs, repeat.
pub fn crown(tree: &Tree) -> Vec<DyadicInterval> {
    let mut set: BTreeSet<DyadicInterval> =
        tree.members.iter().map(|s| s.upper_tile().freq).collect();
    loop {
        let absorbed: BTreeSet<DyadicInterval> = set
            .iter()
            .filter(|a| !set.iter().any(|b| *a != b && b.contains(a)))
            .copied()
            .collect();
        let mut merged = BTreeSet::new();
        let mut changed = false;
        for iv in &absorbed {
            let sibling = DyadicInterval {
                kind: IntervalKind::Freq,
                level: iv.level,
                index: iv.index ^ 1,
            };
            if absorbed.contains(&sibling) {
                merged.insert(DyadicInterval {
                    kind: IntervalKind::Freq,
                    level: iv.level + 1,
                    index: iv.index >> 1,
                });
                changed = true;
            } else {
                merged.insert(*iv);
            }
        }
        let done = !changed && merged.len() == set.len();
        set = merged;
        if done {
            break;
        }
    }
    set.into_iter().collect()
}

/// Partition of a bitile collection into trees with pairwise disjoint members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn new(trees: Vec<Tree>) -> Result<Self> {
        let total: usize = trees.iter().map(Tree::len).sum();
        let union: BTreeSet<Bitile> = trees
            .iter()
            .flat_map(|t| t.members.iter().copied())
            .collect();
        if union.len() != total {
            return Err(CoreError::InvalidParameter(
                "forest trees share a bitile".into(),
            ));
        }
        Ok(Self { trees })
    }

    pub fn empty() -> Self {
        Self { trees: Vec::new() }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// All member bitiles across trees.
    pub fn union_set(&self) -> BTreeSet<Bitile> {
        self.trees
            .iter()
            .flat_map(|t| t.members.iter().copied())
            .collect()
    }

    /// `sum_T |I_T|`, the L1 norm of the counting function.
    pub fn top_measure(&self) -> f64 {
        self.trees.iter().map(|t| t.top.time.measure()).sum()
    }
}

/// Pointwise number of tree-top time intervals over each cell.
pub fn counting_function(forest: &Forest, n: u32) -> GridSignal {
    let mut counts = vec![0u32; 1usize << n];
    for tree in &forest.trees {
        for cell in tree.top.time.cells(n) {
            counts[cell as usize] += 1;
        }
    }
    GridSignal::from_fn(n, |i| Complex64::new(counts[i] as f64, 0.0))
}

/// Pointwise number of trees whose top interval contains the cell and whose
/// crown contains the chosen frequency.
pub fn crown_function(forest: &Forest, choice: &ChoiceFunction, n: u32) -> Result<GridSignal> {
    if choice.resolution() != n {
        return Err(CoreError::ResolutionMismatch {
            left: choice.resolution(),
            right: n,
        });
    }
    let mut counts = vec![0u32; 1usize << n];
    for tree in &forest.trees {
        for cell in tree.top.time.cells(n) {
            let xi = choice.value_at(cell);
            if tree
                .members
                .iter()
                .any(|s| s.upper_tile().freq.contains_freq(xi))
            {
                counts[cell as usize] += 1;
            }
        }
    }
    Ok(GridSignal::from_fn(n, |i| {
        Complex64::new(counts[i] as f64, 0.0)
    }))
}

/// Maximal dyadic time intervals contained in `{mask = true}`.
pub fn maximal_dyadic_cover(mask: &[bool]) -> Result<Vec<DyadicInterval>> {
    let m = mask.len();
    if m == 0 || !m.is_power_of_two() {
        return Err(CoreError::InvalidParameter(format!(
            "mask length must be a positive power of two, got {m}"
        )));
    }
    let n = m.trailing_zeros();
    // full[level][i] = interval (level, i) entirely inside the set.
    let mut full: Vec<Vec<bool>> = vec![Vec::new(); (n + 1) as usize];
    full[n as usize] = mask.to_vec();
    for level in (0..n).rev() {
        let fine = &full[(level + 1) as usize];
        full[level as usize] = (0..1usize << level)
            .map(|i| fine[2 * i] && fine[2 * i + 1])
            .collect();
    }
    let mut out = Vec::new();
    for level in 0..=n {
        for i in 0..1u64 << level {
            if !full[level as usize][i as usize] {
                continue;
            }
            let covered = level > 0 && full[(level - 1) as usize][(i >> 1) as usize];
            if !covered {
                out.push(DyadicInterval::time(level, i)?);
            }
        }
    }
    Ok(out)
}

/// Flat serialization record for one bitile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitileRecord {
    pub time_level: u32,
    pub time_index: u64,
    pub freq_level: u32,
    pub freq_index: u64,
}

impl From<&Bitile> for BitileRecord {
    fn from(s: &Bitile) -> Self {
        Self {
            time_level: s.time.level,
            time_index: s.time.index,
            freq_level: s.freq.level,
            freq_index: s.freq.index,
        }
    }
}

impl TryFrom<&BitileRecord> for Bitile {
    type Error = CoreError;

    fn try_from(r: &BitileRecord) -> Result<Bitile> {
        if r.freq_level != r.time_level + 1 {
            return Err(CoreError::InvalidParameter(format!(
                "bitile record with frequency level {} at time level {}",
                r.freq_level, r.time_level
            )));
        }
        Bitile::new(r.time_level, r.time_index, r.freq_index)
    }
}

pub fn bitile_records(set: &BTreeSet<Bitile>) -> Vec<BitileRecord> {
    set.iter().map(BitileRecord::from).collect()
}

pub fn set_from_records(records: &[BitileRecord]) -> Result<BTreeSet<Bitile>> {
    records.iter().map(Bitile::try_from).collect()
}

/// Forest serialization row: bitile plus tree membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestRecord {
    pub time_level: u32,
    pub time_index: u64,
    pub freq_level: u32,
    pub freq_index: u64,
    pub tree_id: usize,
    pub is_top: bool,
}

pub fn forest_records(forest: &Forest) -> Vec<ForestRecord> {
    let mut out = Vec::new();
    for (tree_id, tree) in forest.trees.iter().enumerate() {
        for s in &tree.members {
            let r = BitileRecord::from(s);
            out.push(ForestRecord {
                time_level: r.time_level,
                time_index: r.time_index,
                freq_level: r.freq_level,
                freq_index: r.freq_index,
                tree_id,
                is_top: s == tree.top(),
            });
        }
    }
    out
}

pub fn forest_from_records(records: &[ForestRecord]) -> Result<Forest> {
    let max_id = records.iter().map(|r| r.tree_id).max();
    let mut trees = Vec::new();
    if let Some(max_id) = max_id {
        for id in 0..=max_id {
            let mut top = None;
            let mut members = BTreeSet::new();
            for r in records.iter().filter(|r| r.tree_id == id) {
                let rec = BitileRecord {
                    time_level: r.time_level,
                    time_index: r.time_index,
                    freq_level: r.freq_level,
                    freq_index: r.freq_index,
                };
                let s = Bitile::try_from(&rec)?;
                if r.is_top {
                    if top.is_some() {
                        return Err(CoreError::InvalidParameter(format!(
                            "tree {id} has two tops"
                        )));
                    }
                    top = Some(s);
                }
                members.insert(s);
            }
            let top = top.ok_or_else(|| {
                CoreError::InvalidParameter(format!("tree {id} has no top row"))
            })?;
            trees.push(Tree::new(top, members)?);
        }
    }
    Forest::new(trees)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bt(level: u32, i: u64, b: u64) -> Bitile {
        Bitile::new(level, i, b).unwrap()
    }

    #[test]
    fn interval_geometry_is_exact() {
        let root = DyadicInterval::time(0, 0).unwrap();
        let left = DyadicInterval::time(1, 0).unwrap();
        let cell = DyadicInterval::time(2, 3).unwrap();
        assert!(root.contains(&left) && root.contains(&cell));
        assert!(!left.contains(&cell) && !cell.contains(&left));
        assert!(!left.intersects(&cell));
        assert!(DyadicInterval::time(1, 2).is_err());

        let wide = DyadicInterval::freq(2, 1).unwrap(); // [4,8)
        let narrow = DyadicInterval::freq(0, 5).unwrap(); // [5,6)
        assert!(wide.contains(&narrow));
        assert!(wide.contains_freq(4) && wide.contains_freq(7) && !wide.contains_freq(8));
        assert_eq!(wide.measure(), 4.0);
        assert_eq!(cell.measure(), 0.25);
    }

    #[test]
    fn bitile_children_split_the_frequency_interval() {
        let s = bt(1, 0, 1); // [0,1/2) x [4,8)
        let s1 = s.lower_tile();
        let s2 = s.upper_tile();
        assert_eq!(s1.freq, DyadicInterval::freq(1, 2).unwrap()); // [4,6)
        assert_eq!(s2.freq, DyadicInterval::freq(1, 3).unwrap()); // [6,8)
        assert!(s.freq.contains(&s1.freq) && s.freq.contains(&s2.freq));
        assert!(!s1.freq.intersects(&s2.freq));
        assert!(feff_leq(&s1, &s1));
    }

    #[test]
    fn fefferman_order_example() {
        // [0,1/2) x [2,4)  <=  [0,1) x [2,3) as tiles.
        let a = Tile::new(1, 0, 1).unwrap();
        let b = Tile::new(0, 0, 2).unwrap();
        assert!(feff_leq(&a, &b));
        assert!(!feff_leq(&b, &a));
    }

    #[test]
    fn fefferman_order_is_a_partial_order() {
        let all: Vec<Bitile> = enumerate_bitiles(4, 16).unwrap().into_iter().collect();
        for a in &all {
            assert!(feff_leq(a, a));
            for b in &all {
                if feff_leq(a, b) && feff_leq(b, a) {
                    assert_eq!(a, b);
                }
                for c in &all {
                    if feff_leq(a, b) && feff_leq(b, c) {
                        assert!(feff_leq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn nested_times_with_meeting_frequencies_are_comparable() {
        let all: Vec<Bitile> = enumerate_bitiles(4, 16).unwrap().into_iter().collect();
        for a in &all {
            for b in &all {
                if a.time.intersects(&b.time) && a.freq.intersects(&b.freq) {
                    assert!(feff_leq(a, b) || feff_leq(b, a));
                }
            }
        }
    }

    #[test]
    fn enumeration_counts_match() {
        assert_eq!(enumerate_bitiles(1, 2).unwrap().len(), 1);
        let four = enumerate_bitiles(2, 4).unwrap();
        let expected: BTreeSet<Bitile> =
            [bt(0, 0, 0), bt(0, 0, 1), bt(1, 0, 0), bt(1, 1, 0)].into();
        assert_eq!(four, expected);
        // Bound 2 leaves only the unit square's bitile.
        assert_eq!(enumerate_bitiles(2, 2).unwrap().len(), 1);
        // Sum over levels j of 2^j * 2^(N-1-j).
        assert_eq!(enumerate_bitiles(4, 16).unwrap().len(), 4 * 8);
        assert!(enumerate_bitiles(3, 16).is_err());
    }

    #[test]
    fn downsets_are_convex_and_gaps_are_not() {
        let n = 3;
        let top = bt(0, 0, 2); // [0,1) x [4,6)
        let ambient = enumerate_bitiles(n, 8).unwrap();
        let down = downset(&ambient, &top);
        assert!(is_convex(&down, n).unwrap());

        // s = [0,1/4) x [0,8)  <<  u = [0,1/2) x [4,8)  <<  top; drop u.
        let s = bt(2, 0, 0);
        let u = bt(1, 0, 1);
        assert!(feff_leq(&s, &u) && feff_leq(&u, &top));
        let gappy: BTreeSet<Bitile> = [s, top].into();
        assert!(!is_convex(&gappy, n).unwrap());
        let filled: BTreeSet<Bitile> = [s, u, top].into();
        assert!(is_convex(&filled, n).unwrap());
        assert!(is_convex(&BTreeSet::new(), n).unwrap());
        assert!(is_convex(&ambient, n).unwrap());
    }

    #[test]
    fn tree_requires_members_under_top() {
        let top = bt(0, 0, 0);
        let inside = bt(1, 0, 0);
        let outside = bt(0, 0, 1);
        assert!(Tree::new(top, [top, inside].into()).is_ok());
        assert!(Tree::new(top, [top, outside].into()).is_err());
        assert!(Tree::new(top, BTreeSet::new()).is_err());
    }

    #[test]
    fn crown_of_single_bitile_is_its_upper_child() {
        let a = bt(0, 0, 1); // omega [2,4), upper child [3,4)
        let tree = Tree::new(a, [a].into()).unwrap();
        assert_eq!(crown(&tree), vec![DyadicInterval::freq(0, 3).unwrap()]);
    }

    #[test]
    fn crown_absorbs_nested_upper_children() {
        // bt(2,0,0) has omega [0,8), upper child [4,8); bt(0,0,2) has omega
        // [4,6), upper child [5,6) sitting inside [4,8).
        let top = bt(0, 0, 2);
        let fine = bt(2, 0, 0);
        assert!(feff_leq(&fine, &top));
        let tree = Tree::new(top, [top, fine].into()).unwrap();
        assert_eq!(crown(&tree), vec![DyadicInterval::freq(2, 1).unwrap()]);
    }

    #[test]
    fn crown_keeps_disjoint_pieces() {
        // Upper children [2,4) and [4,8): disjoint, both survive.
        let top = bt(1, 0, 0); // omega [0,4), upper [2,4)
        let fine = bt(2, 0, 0); // omega [0,8), upper [4,8)
        assert!(feff_leq(&fine, &top));
        let tree = Tree::new(top, [top, fine].into()).unwrap();
        assert_eq!(
            crown(&tree),
            vec![
                DyadicInterval::freq(1, 1).unwrap(),
                DyadicInterval::freq(2, 1).unwrap()
            ]
        );
    }

    #[test]
    fn forest_rejects_shared_members() {
        let a = bt(0, 0, 0);
        let t1 = Tree::new(a, [a].into()).unwrap();
        let t2 = Tree::new(a, [a].into()).unwrap();
        assert!(Forest::new(vec![t1.clone(), t2]).is_err());
        assert!(Forest::new(vec![t1]).is_ok());
    }

    #[test]
    fn counting_function_adds_top_indicators() {
        let left = Tree::new(bt(1, 0, 0), [bt(1, 0, 0)].into()).unwrap();
        let right = Tree::new(bt(1, 1, 0), [bt(1, 1, 0)].into()).unwrap();
        let both = Forest::new(vec![left.clone(), right]).unwrap();
        let counts = counting_function(&both, 2);
        assert!(counts.values().iter().all(|v| v.re == 1.0));
        let stacked = Forest::new(vec![
            Tree::new(bt(0, 0, 0), [bt(0, 0, 0)].into()).unwrap(),
            Tree::new(bt(0, 0, 1), [bt(0, 0, 1)].into()).unwrap(),
        ])
        .unwrap();
        let counts = counting_function(&stacked, 3);
        assert!(counts.values().iter().all(|v| v.re == 2.0));
        assert_eq!(counting_function(&Forest::empty(), 2), GridSignal::zero(2));
        assert!((both.top_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crown_function_requires_both_captures() {
        let tree = Tree::new(bt(1, 0, 0), [bt(1, 0, 0)].into()).unwrap(); // I=[0,1/2), upper [2,4)
        let forest = Forest::new(vec![tree]).unwrap();
        let hit = ChoiceFunction::constant(2, 2).unwrap();
        let w = crown_function(&forest, &hit, 2).unwrap();
        assert_eq!(
            w.values().iter().map(|v| v.re).collect::<Vec<_>>(),
            [1.0, 1.0, 0.0, 0.0]
        );
        let miss = ChoiceFunction::constant(1, 2).unwrap();
        let w = crown_function(&forest, &miss, 2).unwrap();
        assert!(w.values().iter().all(|v| v.re == 0.0));
        let n = counting_function(&forest, 2);
        for (a, b) in crown_function(&forest, &hit, 2)
            .unwrap()
            .values()
            .iter()
            .zip(n.values())
        {
            assert!(a.re <= b.re);
        }
    }

    #[test]
    fn maximal_cover_finds_maximal_intervals() {
        let cover = maximal_dyadic_cover(&[true, true, true, false]).unwrap();
        assert_eq!(
            cover,
            vec![
                DyadicInterval::time(1, 0).unwrap(),
                DyadicInterval::time(2, 2).unwrap()
            ]
        );
        assert_eq!(
            maximal_dyadic_cover(&[true, true]).unwrap(),
            vec![DyadicInterval::time(0, 0).unwrap()]
        );
        assert!(maximal_dyadic_cover(&[false, false]).unwrap().is_empty());
    }

    #[test]
    fn records_round_trip() {
        let set = enumerate_bitiles(3, 8).unwrap();
        let records = bitile_records(&set);
        assert_eq!(set_from_records(&records).unwrap(), set);

        let tree = Tree::new(bt(1, 0, 0), [bt(1, 0, 0), bt(2, 0, 0)].into()).unwrap();
        let forest = Forest::new(vec![tree]).unwrap();
        let rows = forest_records(&forest);
        let back = forest_from_records(&rows).unwrap();
        assert_eq!(back, forest);

        let bad = BitileRecord {
            time_level: 1,
            time_index: 0,
            freq_level: 3,
            freq_index: 0,
        };
        assert!(Bitile::try_from(&bad).is_err());
    }
}
