//! Decomposition pipeline: bitile sizes, trees sorted into size levels,
//! crown-bounded repartition, exceptional sets for the tail estimate, and
//! the multi-frequency projection that trades an unbounded function for a
//! bounded one plus a structured remainder.

use crate::carleson::{model_sum, ChoiceFunction, LacunarySequence};
use crate::error::{CoreError, Result};
use crate::norms::{local_lp, maximal_mp};
use crate::plane::{
    downset, is_convex, maximal_dyadic_cover, Bitile, DyadicInterval, Forest, IntervalKind, Tile,
    Tree,
};
use crate::signal::GridSignal;
use crate::walsh::PacketOnGrid;
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};

fn packet_inner(f: &GridSignal, packet: &PacketOnGrid) -> Complex64 {
    packet
        .cells()
        .map(|c| f.values()[c as usize] * packet.value(c))
        .sum::<Complex64>()
        * f.cell_measure()
}

/// Root-mean-square of the two child-tile coefficients, normalized by the
/// time interval: `sqrt((|<f,w_s1>|^2 + |<f,w_s2>|^2) / |I_s|)`.
pub fn bitile_size(f: &GridSignal, s: &Bitile) -> Result<f64> {
    let n = f.resolution();
    let lower = packet_inner(f, &PacketOnGrid::new(&s.lower_tile(), n)?);
    let upper = packet_inner(f, &PacketOnGrid::new(&s.upper_tile(), n)?);
    Ok(((lower.norm_sqr() + upper.norm_sqr()) / s.time.measure()).sqrt())
}

/// Largest bitile size over the collection; zero when empty.
pub fn set_size(f: &GridSignal, set: &BTreeSet<Bitile>) -> Result<f64> {
    let mut best = 0.0f64;
    for s in set {
        best = best.max(bitile_size(f, s)?);
    }
    Ok(best)
}

/// One dyadic size level: trees whose tops exceed half the level's
/// threshold `size_bound * sigma`.
#[derive(Debug, Clone)]
pub struct SizeLevel {
    pub sigma: f64,
    pub forest: Forest,
}

#[derive(Debug, Clone)]
pub struct SizeDecomposition {
    pub levels: Vec<SizeLevel>,
    /// Zero-size members left over once the cascade empties out.
    pub residual: BTreeSet<Bitile>,
}

/// Peels trees off a convex collection level by level: at level `sigma`,
/// while some member's size exceeds `size_bound * sigma / 2`, the member
/// with the widest time interval (leftmost, then lowest frequency, on ties)
/// becomes a tree top and takes its whole downset with it.
pub fn size_decomposition(
    set: &BTreeSet<Bitile>,
    f: &GridSignal,
    size_bound: f64,
) -> Result<SizeDecomposition> {
    if !is_convex(set, f.resolution())? {
        return Err(CoreError::NotConvex(
            "size decomposition needs an order-convex collection".into(),
        ));
    }
    let mut sizes: BTreeMap<Bitile, f64> = BTreeMap::new();
    for s in set {
        sizes.insert(*s, bitile_size(f, s)?);
    }
    let total = sizes.values().cloned().fold(0.0, f64::max);
    if size_bound < total * (1.0 - 1e-12) {
        return Err(CoreError::InvalidParameter(format!(
            "size bound {size_bound} is below the collection size {total}"
        )));
    }
    let mut remainder = set.clone();
    let mut levels = Vec::new();
    let mut sigma = 1.0f64;
    let mut rounds = 0;
    loop {
        let max_size = remainder.iter().map(|s| sizes[s]).fold(0.0, f64::max);
        if max_size == 0.0 {
            break;
        }
        rounds += 1;
        if rounds > 200 {
            return Err(CoreError::Precondition(
                "size cascade exceeded 200 dyadic levels".into(),
            ));
        }
        let threshold = size_bound * sigma / 2.0;
        let mut trees = Vec::new();
        while let Some(top) = remainder
            .iter()
            .filter(|s| sizes[*s] > threshold)
            .min()
            .cloned()
        {
            let members = downset(&remainder, &top);
            for m in &members {
                remainder.remove(m);
            }
            trees.push(Tree::new(top, members)?);
        }
        levels.push(SizeLevel {
            sigma,
            forest: Forest::new(trees)?,
        });
        sigma /= 2.0;
    }
    Ok(SizeDecomposition {
        levels,
        residual: remainder,
    })
}

/// Regroups a forest's members so that every output tree is selected by one
/// sequence frequency: repeatedly take the smallest term lying in some
/// remaining member's full frequency interval, peel all members capturing
/// it, and split the peel at its maximal elements. Output trees over
/// sequence-valued choice functions overlap at most
/// `octave_depth + 1` times at any point of the phase plane.
pub fn repartition_bounded_crown(
    set: &BTreeSet<Bitile>,
    forest: &Forest,
    seq: &LacunarySequence,
) -> Result<Forest> {
    if forest.union_set() != *set {
        return Err(CoreError::Precondition(
            "forest does not partition the given collection".into(),
        ));
    }
    for s in set {
        let upper = s.upper_tile().freq;
        if !seq.terms().iter().any(|&t| upper.contains_freq(t)) {
            return Err(CoreError::Precondition(
                "member's upper frequency half misses the sequence".into(),
            ));
        }
    }
    let mut remaining = set.clone();
    let mut trees = Vec::new();
    while !remaining.is_empty() {
        let m = seq
            .terms()
            .iter()
            .copied()
            .find(|&t| remaining.iter().any(|s| s.freq.contains_freq(t)))
            .expect("upper halves meet the sequence, so full intervals do");
        let peel: BTreeSet<Bitile> = remaining
            .iter()
            .filter(|s| s.freq.contains_freq(m))
            .cloned()
            .collect();
        // Members of the peel all capture m, so those with nested time
        // intervals are comparable; maximal elements have disjoint time
        // intervals and each member sits below exactly one of them.
        let tops: Vec<Bitile> = peel
            .iter()
            .filter(|s| {
                !peel
                    .iter()
                    .any(|u| u != *s && crate::plane::feff_leq(*s, u))
            })
            .cloned()
            .collect();
        let mut assigned = 0;
        for top in tops {
            let members = downset(&peel, &top);
            assigned += members.len();
            trees.push(Tree::new(top, members)?);
        }
        if assigned != peel.len() {
            return Err(CoreError::Precondition(
                "peel did not split cleanly at its maximal elements".into(),
            ));
        }
        for s in &peel {
            remaining.remove(s);
        }
    }
    Forest::new(trees)
}

/// Model sum restricted to one tree's members.
pub fn tree_operator(tree: &Tree, f: &GridSignal, choice: &ChoiceFunction) -> Result<GridSignal> {
    model_sum(tree.members(), f, choice)
}

/// Orthogonal projection of `f` onto the span of the tree's lower-tile
/// packets, via Gram-Schmidt with a second orthogonalization pass; near-zero
/// residuals are dropped, so linearly dependent packet families are fine.
pub fn tree_projection(tree: &Tree, f: &GridSignal) -> Result<GridSignal> {
    let n = f.resolution();
    let len = f.len();
    let scale = f.cell_measure();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for s in tree.members() {
        let p = PacketOnGrid::new(&s.lower_tile(), n)?;
        let mut v = vec![0.0f64; len];
        for c in p.cells() {
            v[c as usize] = p.value(c);
        }
        for _ in 0..2 {
            for b in &basis {
                let coef: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * scale;
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= coef * y;
                }
            }
        }
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * scale).sqrt();
        if norm > 1e-10 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    let mut out = GridSignal::zero(n);
    for b in &basis {
        let coef = f
            .values()
            .iter()
            .zip(b)
            .map(|(x, y)| x * *y)
            .sum::<Complex64>()
            * scale;
        for (o, y) in out.values_mut().iter_mut().zip(b) {
            *o += coef * *y;
        }
    }
    Ok(out)
}

/// Distribution rows `(lambda, fraction of I_top where |C_T f| > lambda *
/// size)` on the grid `lambda = 0, 1/4, ..., 8`.
pub fn tree_tail_profile(
    tree: &Tree,
    f: &GridSignal,
    choice: &ChoiceFunction,
) -> Result<Vec<(f64, f64)>> {
    let sigma = set_size(f, tree.members())?;
    let ct = tree_operator(tree, f, choice)?;
    if sigma == 0.0 && ct.values().iter().any(|v| v.norm() > 0.0) {
        return Err(CoreError::Precondition(
            "tree has zero size but a nonzero operator".into(),
        ));
    }
    let n = f.resolution();
    let cells = tree.top().time.cells(n);
    let top_measure = tree.top().time.measure();
    Ok((0..=32)
        .map(|i| {
            let lam = i as f64 / 4.0;
            let count = cells
                .clone()
                .filter(|&c| ct.values()[c as usize].norm() > lam * sigma)
                .count();
            (lam, count as f64 * f.cell_measure() / top_measure)
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ExceptionalReport {
    pub lambda: f64,
    pub size_bound: f64,
    /// Threshold multiplier: outside the exceptional set the model sum
    /// stays below `k0 * lambda`.
    pub k0: f64,
    pub exceptional_fraction: f64,
    /// Reference scale `exp(-lambda / size_bound) * l2^2 / size_bound^2`.
    pub bound_fraction: f64,
    pub inclusion_holds: bool,
    /// Largest pointwise gap between the tree sum and the model sum.
    pub additivity_error: f64,
    pub level_count: usize,
    pub tree_count: usize,
}

/// Builds the exceptional set of the tail estimate: per size level and
/// repartitioned tree, the cells of `I_top` where the tree operator exceeds
/// `lambda * sigma * ln(e / sigma^4)`, then checks that the model sum
/// exceeds `k0 * lambda` only inside the union.
pub fn exceptional_set(
    set: &BTreeSet<Bitile>,
    f: &GridSignal,
    lambda: f64,
    seq: &LacunarySequence,
    choice: &ChoiceFunction,
    size_bound: Option<f64>,
) -> Result<ExceptionalReport> {
    if !(lambda > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "threshold scale must be positive, got {lambda}"
        )));
    }
    let bound = match size_bound {
        Some(a) => a,
        None => f.linf_norm(),
    };
    let sd = size_decomposition(set, f, bound)?;
    let n = f.resolution();
    let len = f.len();
    let mut mask = vec![false; len];
    let mut tree_sum = GridSignal::zero(n);
    let mut weight_sum = 0.0;
    let mut tree_count = 0;
    for level in &sd.levels {
        if level.forest.trees().is_empty() {
            continue;
        }
        let sigma = level.sigma;
        // sigma * ln(e / sigma^4); equals sigma at the top level.
        let weight = sigma * (1.0 - 4.0 * sigma.ln());
        weight_sum += weight;
        let level_set = level.forest.union_set();
        let rp = repartition_bounded_crown(&level_set, &level.forest, seq)?;
        for tree in rp.trees() {
            let ct = tree_operator(tree, f, choice)?;
            let threshold = lambda * weight;
            for c in tree.top().time.cells(n) {
                if ct.values()[c as usize].norm() > threshold {
                    mask[c as usize] = true;
                }
            }
            tree_sum = tree_sum.add(&ct)?;
            tree_count += 1;
        }
    }
    let k0 = (seq.octave_depth() + 1) as f64 * weight_sum;
    let full = model_sum(set, f, choice)?;
    let additivity_error = tree_sum
        .values()
        .iter()
        .zip(full.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let inclusion_holds = (0..len).all(|c| {
        tree_sum.values()[c].norm() <= k0 * lambda * (1.0 + 1e-9) || mask[c]
    });
    let exceptional_fraction = mask.iter().filter(|&&b| b).count() as f64 * f.cell_measure();
    let bound_fraction = if bound > 0.0 {
        (-lambda / bound).exp() * f.l2_norm().powi(2) / (bound * bound)
    } else {
        0.0
    };
    Ok(ExceptionalReport {
        lambda,
        size_bound: bound,
        k0,
        exceptional_fraction,
        bound_fraction,
        inclusion_holds,
        additivity_error,
        level_count: sd.levels.iter().filter(|l| !l.forest.trees().is_empty()).count(),
        tree_count,
    })
}

#[derive(Debug, Clone)]
pub struct MultifreqProjection {
    /// Projection of the unbounded part onto the per-interval packet spans.
    pub g: GridSignal,
    /// Measure of the region where the maximal function exceeds one.
    pub bad_fraction: f64,
    pub cover: Vec<DyadicInterval>,
    /// Members whose time interval reaches outside the bad region.
    pub retained: usize,
    pub good_part_linf: f64,
    /// Largest gap in `<g, w_s1> = <f 1_bad, w_s1>` over retained members.
    pub identity_error: f64,
    /// `l2(g)^2 / (p'^2 * bad_fraction)`.
    pub projection_constant: f64,
}

/// Splits `f` at the level set `{M_p f > 1}`: the good part is bounded by
/// one, and on each maximal dyadic piece of the bad region the bad part is
/// replaced by its projection onto the coarsened lower-tile frequency
/// blocks of the retained members. Retained coefficients are preserved
/// exactly.
pub fn multifreq_projection(
    f: &GridSignal,
    p: f64,
    set: &BTreeSet<Bitile>,
) -> Result<MultifreqProjection> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(CoreError::InvalidParameter(format!(
            "projection exponent must lie in (1, 2], got {p}"
        )));
    }
    let n = f.resolution();
    let mp = maximal_mp(f, p)?;
    let mask: Vec<bool> = mp.values().iter().map(|v| v.re > 1.0).collect();
    let bad_count = mask.iter().filter(|&&b| b).count();
    let good_part_linf = f
        .values()
        .iter()
        .zip(&mask)
        .filter(|(_, &b)| !b)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max);
    let retained_set: Vec<Bitile> = set
        .iter()
        .filter(|s| s.time.cells(n).any(|c| !mask[c as usize]))
        .cloned()
        .collect();
    if bad_count == 0 {
        return Ok(MultifreqProjection {
            g: GridSignal::zero(n),
            bad_fraction: 0.0,
            cover: Vec::new(),
            retained: retained_set.len(),
            good_part_linf,
            identity_error: 0.0,
            projection_constant: 0.0,
        });
    }
    if bad_count == mask.len() {
        return Err(CoreError::Precondition(
            "maximal function exceeds one everywhere; no good region remains".into(),
        ));
    }
    let cover = maximal_dyadic_cover(&mask)?;
    let f2 = GridSignal::from_fn(n, |i| {
        if mask[i] {
            f.values()[i]
        } else {
            Complex64::ZERO
        }
    });
    let scale = f.cell_measure();
    let mut g = GridSignal::zero(n);
    for interval in &cover {
        let mut tiles: BTreeSet<Tile> = BTreeSet::new();
        for s in &retained_set {
            if s.time.contains(interval) {
                let lower = s.lower_tile();
                let idx = lower.freq.index >> (interval.level - s.time.level);
                tiles.insert(Tile {
                    time: *interval,
                    freq: DyadicInterval {
                        kind: IntervalKind::Freq,
                        level: interval.level,
                        index: idx,
                    },
                });
            }
        }
        let packets: Vec<PacketOnGrid> = tiles
            .iter()
            .map(|t| PacketOnGrid::new(t, n))
            .collect::<Result<_>>()?;
        for (i, a) in packets.iter().enumerate() {
            for (k, b) in packets.iter().enumerate().skip(i) {
                let inner: f64 =
                    a.cells().map(|c| a.value(c) * b.value(c)).sum::<f64>() * scale;
                let want = if i == k { 1.0 } else { 0.0 };
                if (inner - want).abs() > 1e-10 {
                    return Err(CoreError::Precondition(
                        "projection packets failed orthonormality".into(),
                    ));
                }
            }
        }
        for packet in &packets {
            let coef = packet_inner(&f2, packet);
            for c in packet.cells() {
                g.values_mut()[c as usize] += coef * packet.value(c);
            }
        }
    }
    let mut identity_error = 0.0f64;
    for s in &retained_set {
        let w = PacketOnGrid::new(&s.lower_tile(), n)?;
        let gap = (packet_inner(&g, &w) - packet_inner(&f2, &w)).norm();
        identity_error = identity_error.max(gap);
    }
    let bad_fraction = bad_count as f64 * f.cell_measure();
    let p_prime = p / (p - 1.0);
    let projection_constant = g.l2_norm().powi(2) / (p_prime * p_prime * bad_fraction);
    Ok(MultifreqProjection {
        g,
        bad_fraction,
        cover,
        retained: retained_set.len(),
        good_part_linf,
        identity_error,
        projection_constant,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct JnRow {
    pub q: f64,
    /// Largest observed `local_lq / local_l2` over the trials.
    pub max_ratio: f64,
    /// The same ratio divided by `q`; flat across `q` for exponentially
    /// integrable spans.
    pub normalized: f64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn unit_f64(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// Samples random coefficient vectors in the span of same-interval packets
/// and records how the local `L^q` norms compare to `q` times the local
/// `L^2` norm, one row per `q` in {4, 8, 16}.
pub fn john_nirenberg_probe(
    interval: &DyadicInterval,
    tiles: &BTreeSet<Tile>,
    resolution: u32,
    trials: u32,
    seed: u64,
) -> Result<Vec<JnRow>> {
    if tiles.is_empty() {
        return Err(CoreError::InvalidParameter(
            "no packets to probe".into(),
        ));
    }
    if tiles.iter().any(|t| t.time != *interval) {
        return Err(CoreError::InvalidParameter(
            "probe packets must share the base interval".into(),
        ));
    }
    let packets: Vec<PacketOnGrid> = tiles
        .iter()
        .map(|t| PacketOnGrid::new(t, resolution))
        .collect::<Result<_>>()?;
    let mut state = seed ^ 0x6A09E667F3BCC909;
    let mut rows: Vec<JnRow> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&q| JnRow {
            q,
            max_ratio: 0.0,
            normalized: 0.0,
        })
        .collect();
    for _ in 0..trials {
        let mut v = GridSignal::zero(resolution);
        for p in &packets {
            let c = 2.0 * unit_f64(&mut state) - 1.0;
            for cell in p.cells() {
                v.values_mut()[cell as usize] += Complex64::new(c * p.value(cell), 0.0);
            }
        }
        let l2 = local_lp(&v, interval, 2.0)?;
        if l2 == 0.0 {
            continue;
        }
        for row in rows.iter_mut() {
            let lq = local_lp(&v, interval, row.q)?;
            row.max_ratio = row.max_ratio.max(lq / l2);
        }
    }
    for row in rows.iter_mut() {
        row.normalized = row.max_ratio / row.q;
    }
    Ok(rows)
}
