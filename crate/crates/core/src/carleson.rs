//! Lacunary maximal partial sums and their phase-plane model.
//!
//! The maximal operator takes the pointwise supremum of Walsh partial sums at
//! the sequence frequencies. The model operator sums lower-child wave-packet
//! projections over bitiles whose upper frequency half captures a per-cell
//! chosen frequency. On the finite grid the two sides agree exactly once the
//! partial-sum cutoff convention is calibrated; see
//! [`TILE_SUM_CUTOFF_IS_EXCLUSIVE`].

use crate::error::{CoreError, Result};
use crate::plane::{enumerate_bitiles, is_convex, Bitile};
use crate::signal::GridSignal;
use crate::walsh::{partial_sum_below, PacketOnGrid};
use num_complex::Complex64;
use std::collections::BTreeSet;
use std::io::{BufRead, Write};

/// Calibration verdict for the bitile-sum identity, pinned by the exhaustive
/// resolution-3 oracle in this module's tests: summing fired bitiles at
/// cutoff `n` reproduces the Walsh partial sum over frequencies strictly
/// below `n`, not the inclusive sum through `n`. The maximal operator and the
/// greedy choice use the same exclusive convention so that the model sum
/// realizes the supremum without an off-by-one mismatch.
pub const TILE_SUM_CUTOFF_IS_EXCLUSIVE: bool = true;

/// Strictly increasing positive integer frequencies with ratio gap theta > 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySequence {
    terms: Vec<u64>,
    theta: f64,
}

impl LacunarySequence {
    pub fn new(terms: Vec<u64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(CoreError::EmptySequence("no terms given".into()));
        }
        if terms[0] == 0 {
            return Err(CoreError::InvalidParameter(
                "sequence terms must be positive".into(),
            ));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidParameter(
                "sequence terms must be strictly increasing".into(),
            ));
        }
        let theta = terms
            .windows(2)
            .map(|w| w[1] as f64 / w[0] as f64)
            .fold(f64::INFINITY, f64::min);
        Ok(Self { terms, theta })
    }

    /// Powers of two `1, 2, ..., 2^j_max`.
    pub fn pow2(j_max: u32) -> Self {
        Self::new((0..=j_max).map(|j| 1u64 << j).collect()).expect("valid by construction")
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    /// Smallest consecutive ratio; infinite for a singleton.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Terms representable at resolution `n`; dropped terms are logged.
    pub fn retained(&self, n: u32) -> Result<Self> {
        let bound = 1u64 << n;
        let kept: Vec<u64> = self.terms.iter().copied().filter(|&t| t < bound).collect();
        if kept.len() < self.terms.len() {
            log::warn!(
                "dropping {} sequence terms at or above 2^{n}",
                self.terms.len() - kept.len()
            );
        }
        if kept.is_empty() {
            return Err(CoreError::EmptySequence(format!(
                "no terms below 2^{n} remain"
            )));
        }
        Self::new(kept)
    }

    /// `ceil(log 2 / log theta)`: the comparability depth the lacunarity gap
    /// allows inside one octave. Zero for a singleton.
    pub fn octave_depth(&self) -> u32 {
        if !self.theta.is_finite() {
            return 0;
        }
        (std::f64::consts::LN_2 / self.theta.ln() - 1e-9).ceil().max(0.0) as u32
    }
}

/// Per-cell frequency selection, all values below the grid's Nyquist index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceFunction {
    resolution: u32,
    values: Vec<u64>,
}

impl ChoiceFunction {
    pub fn new(resolution: u32, values: Vec<u64>) -> Result<Self> {
        if values.len() != 1usize << resolution {
            return Err(CoreError::InvalidParameter(format!(
                "choice function needs {} values, got {}",
                1usize << resolution,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= (1u64 << resolution)) {
            return Err(CoreError::ResolutionTooCoarse {
                resolution,
                what: format!("choice value {v} out of range"),
            });
        }
        Ok(Self { resolution, values })
    }

    pub fn constant(value: u64, resolution: u32) -> Result<Self> {
        Self::new(resolution, vec![value; 1usize << resolution])
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn value_at(&self, cell: u64) -> u64 {
        self.values[cell as usize]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Writes `index,frequency` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,frequency")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(CoreError::Csv(format!(
                    "line {}: expected index,frequency",
                    lineno + 1
                )));
            }
            let idx: usize = fields[0]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad index: {e}", lineno + 1)))?;
            if idx != values.len() {
                return Err(CoreError::Csv(format!(
                    "line {}: index {} out of order",
                    lineno + 1,
                    idx
                )));
            }
            let v: u64 = fields[1]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad frequency: {e}", lineno + 1)))?;
            values.push(v);
        }
        let m = values.len();
        if m == 0 || !m.is_power_of_two() {
            return Err(CoreError::Csv(format!(
                "choice function row count must be a power of two, got {m}"
            )));
        }
        Self::new(m.trailing_zeros(), values)
    }
}

fn retained_partial_sums(f: &GridSignal, seq: &LacunarySequence) -> Result<(Vec<u64>, Vec<GridSignal>)> {
    let kept = seq.retained(f.resolution())?;
    let sums = kept
        .terms()
        .iter()
        .map(|&t| partial_sum_below(f, t))
        .collect::<Result<Vec<_>>>()?;
    Ok((kept.terms().to_vec(), sums))
}

/// Pointwise supremum of |partial sums below each retained term|.
pub fn maximal_operator(f: &GridSignal, seq: &LacunarySequence) -> Result<GridSignal> {
    let (_, sums) = retained_partial_sums(f, seq)?;
    Ok(GridSignal::from_fn(f.resolution(), |i| {
        let m = sums.iter().map(|s| s.values()[i].norm()).fold(0.0, f64::max);
        Complex64::new(m, 0.0)
    }))
}

/// Retained term attaining the supremum at each cell; smallest index on ties.
pub fn greedy_choice(f: &GridSignal, seq: &LacunarySequence) -> Result<ChoiceFunction> {
    let (terms, sums) = retained_partial_sums(f, seq)?;
    let values = (0..1usize << f.resolution())
        .map(|i| {
            let mut best = 0usize;
            let mut best_mag = sums[0].values()[i].norm();
            for (j, s) in sums.iter().enumerate().skip(1) {
                let mag = s.values()[i].norm();
                if mag > best_mag {
                    best = j;
                    best_mag = mag;
                }
            }
            terms[best]
        })
        .collect();
    ChoiceFunction::new(f.resolution(), values)
}

/// Ambient bitiles whose upper frequency half contains a sequence term.
/// Convexity of the result depends on the sequence; it is checked at small
/// resolutions and a failure is logged, not raised.
pub fn lacunary_bitiles(n: u32, seq: &LacunarySequence) -> Result<BTreeSet<Bitile>> {
    let ambient = enumerate_bitiles(n, 1u64 << n)?;
    let set: BTreeSet<Bitile> = ambient
        .into_iter()
        .filter(|s| {
            let upper = s.upper_tile().freq;
            seq.terms().iter().any(|&t| upper.contains_freq(t))
        })
        .collect();
    if n <= 8 && !is_convex(&set, n)? {
        log::warn!("lacunary bitile collection at resolution {n} is not order-convex");
    }
    Ok(set)
}

fn model_sum_impl<'a>(
    set: impl IntoIterator<Item = &'a Bitile>,
    f: &GridSignal,
    choose: impl Fn(u64) -> u64,
) -> Result<GridSignal> {
    let n = f.resolution();
    let mut out = GridSignal::zero(n);
    let scale = f.cell_measure();
    for s in set {
        let packet = PacketOnGrid::new(&s.lower_tile(), n)?;
        let mut coef = Complex64::ZERO;
        for c in packet.cells() {
            coef += f.values()[c as usize] * packet.value(c);
        }
        coef *= scale;
        let upper = s.upper_tile().freq;
        for c in packet.cells() {
            if upper.contains_freq(choose(c)) {
                out.values_mut()[c as usize] += coef * packet.value(c);
            }
        }
    }
    Ok(out)
}

/// `sum_s <f, w_{s1}> w_{s1}(x)` over bitiles whose upper frequency half
/// contains the chosen frequency at `x`.
pub fn model_sum(set: &BTreeSet<Bitile>, f: &GridSignal, choice: &ChoiceFunction) -> Result<GridSignal> {
    if choice.resolution() != f.resolution() {
        return Err(CoreError::ResolutionMismatch {
            left: choice.resolution(),
            right: f.resolution(),
        });
    }
    model_sum_impl(set, f, |c| choice.value_at(c))
}

/// The ambient grid closed upward so that cutoff `2^N` fires a full
/// reconstruction: single-cell bitiles with frequency interval `[0, 2^{N+1})`.
fn closure_bitiles(n: u32) -> Result<Vec<Bitile>> {
    let mut all: Vec<Bitile> = enumerate_bitiles(n, 1u64 << n)?.into_iter().collect();
    for i in 0..1u64 << n {
        all.push(Bitile::new(n, i, 0)?);
    }
    Ok(all)
}

/// Sum over the whole (closed) bitile grid with the constant cutoff `n`:
/// fires every bitile whose upper frequency half contains `n`. Equals the
/// Walsh partial sum below `n`; see [`TILE_SUM_CUTOFF_IS_EXCLUSIVE`].
pub fn tile_sum_partial(f: &GridSignal, n: u64) -> Result<GridSignal> {
    let res = f.resolution();
    if n == 0 || n > (1u64 << res) {
        return Err(CoreError::InvalidParameter(format!(
            "tile-sum cutoff must lie in 1..=2^{res}, got {n}"
        )));
    }
    model_sum_impl(closure_bitiles(res)?.iter(), f, |_| n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::{partial_sum, walsh_function};

    fn reals(f: &GridSignal) -> Vec<f64> {
        f.values().iter().map(|v| v.re).collect()
    }

    #[test]
    fn sequence_validation() {
        assert!(LacunarySequence::new(vec![]).is_err());
        assert!(LacunarySequence::new(vec![0, 1]).is_err());
        assert!(LacunarySequence::new(vec![3, 3]).is_err());
        assert!(LacunarySequence::new(vec![4, 2]).is_err());
        let s = LacunarySequence::new(vec![1, 2, 4]).unwrap();
        assert_eq!(s.theta(), 2.0);
        assert_eq!(s.octave_depth(), 1);
        let s = LacunarySequence::new(vec![8, 12, 18, 27]).unwrap();
        assert!((s.theta() - 1.5).abs() < 1e-15);
        assert_eq!(s.octave_depth(), 2);
        let single = LacunarySequence::new(vec![7]).unwrap();
        assert!(single.theta().is_infinite());
        assert_eq!(single.octave_depth(), 0);
        assert_eq!(LacunarySequence::pow2(3).terms(), [1, 2, 4, 8]);
    }

    #[test]
    fn retention_drops_high_terms() {
        let s = LacunarySequence::new(vec![1, 2, 4, 8]).unwrap();
        assert_eq!(s.retained(2).unwrap().terms(), [1, 2]);
        assert_eq!(s.retained(1).unwrap().terms(), [1]);
        assert!(s.retained(0).is_err());
    }

    #[test]
    fn choice_function_contract() {
        assert!(ChoiceFunction::constant(3, 2).is_ok());
        assert!(ChoiceFunction::constant(4, 2).is_err());
        assert!(ChoiceFunction::new(2, vec![0, 1]).is_err());
        let c = ChoiceFunction::new(2, vec![0, 3, 1, 2]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(ChoiceFunction::read_csv(&buf[..]).unwrap(), c);
    }

    #[test]
    fn maximal_operator_on_characters() {
        let seq = LacunarySequence::new(vec![1, 2, 4]).unwrap();
        let f = walsh_function(3, 3).unwrap();
        let m = maximal_operator(&f, &seq).unwrap();
        assert!(reals(&m).iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let f = walsh_function(5, 3).unwrap();
        let m = maximal_operator(&f, &seq).unwrap();
        assert!(reals(&m).iter().all(|&v| v.abs() < 1e-12));

        let c = GridSignal::from_real(&[-2.5; 8]).unwrap();
        let m = maximal_operator(&c, &seq).unwrap();
        assert!(reals(&m).iter().all(|&v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn greedy_choice_picks_the_witness() {
        let seq = LacunarySequence::new(vec![1, 2, 4]).unwrap();
        let f = walsh_function(3, 3).unwrap();
        let g = greedy_choice(&f, &seq).unwrap();
        assert!(g.values().iter().all(|&v| v == 4));

        let zero = GridSignal::zero(3);
        let g = greedy_choice(&zero, &seq).unwrap();
        assert!(g.values().iter().all(|&v| v == 1), "tie-break to first term");
    }

    #[test]
    fn lacunary_bitiles_at_small_resolution() {
        let seq = LacunarySequence::new(vec![1, 2, 4]).unwrap();
        let set = lacunary_bitiles(2, &seq).unwrap();
        let expected: BTreeSet<Bitile> = [
            Bitile::new(0, 0, 0).unwrap(),
            Bitile::new(1, 0, 0).unwrap(),
            Bitile::new(1, 1, 0).unwrap(),
        ]
        .into();
        assert_eq!(set, expected);

        // Powers of two keep exactly the zero-frequency-block column.
        let set = lacunary_bitiles(3, &LacunarySequence::pow2(5)).unwrap();
        assert_eq!(set.len(), 7);
        assert!(set.iter().all(|s| s.freq.index == 0));
        assert!(is_convex(&set, 3).unwrap());

        // An isolated odd term leaves an order gap.
        let seq = LacunarySequence::new(vec![5]).unwrap();
        let set = lacunary_bitiles(3, &seq).unwrap();
        assert!(!is_convex(&set, 3).unwrap());
    }

    #[test]
    fn model_sum_single_bitile() {
        let f = GridSignal::from_real(&[1.0, 2.0, 3.0, 42.0]).unwrap();
        let set: BTreeSet<Bitile> = [Bitile::new(0, 0, 0).unwrap()].into();
        let fire = ChoiceFunction::constant(1, 2).unwrap();
        let out = model_sum(&set, &f, &fire).unwrap();
        let mean = 48.0 / 4.0;
        assert!(reals(&out).iter().all(|&v| (v - mean).abs() < 1e-12));

        let miss = ChoiceFunction::constant(3, 2).unwrap();
        let out = model_sum(&set, &f, &miss).unwrap();
        assert!(reals(&out).iter().all(|&v| v == 0.0));

        let empty = model_sum(&BTreeSet::new(), &f, &fire).unwrap();
        assert_eq!(empty, GridSignal::zero(2));
    }

    #[test]
    fn tile_sum_matches_exclusive_partial_sums_exhaustively() {
        // Resolution-3 calibration oracle: every cutoff, basis of deltas.
        let n = 3u32;
        for cell in 0..1usize << n {
            let mut vals = vec![0.0; 1 << n];
            vals[cell] = 1.0 + cell as f64;
            let f = GridSignal::from_real(&vals).unwrap();
            for cutoff in 1..=(1u64 << n) {
                let lhs = tile_sum_partial(&f, cutoff).unwrap();
                let rhs = partial_sum_below(&f, cutoff).unwrap();
                for (a, b) in lhs.values().iter().zip(rhs.values()) {
                    assert!((a - b).norm() < 1e-12, "cutoff {cutoff} cell {cell}");
                }
            }
        }
        assert!(TILE_SUM_CUTOFF_IS_EXCLUSIVE);
        // The inclusive convention fails: at cutoff 3 the frequency-3 mode of
        // a delta is absent from the bitile sum.
        let f = GridSignal::from_real(&[8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let lhs = tile_sum_partial(&f, 3).unwrap();
        let inclusive = partial_sum(&f, 3).unwrap();
        let diff: f64 = lhs
            .values()
            .iter()
            .zip(inclusive.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff > 0.5);
    }

    #[test]
    fn tile_sum_full_cutoff_reconstructs() {
        let f = GridSignal::from_real(&[0.5, -1.0, 3.25, 2.0]).unwrap();
        let out = tile_sum_partial(&f, 4).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(tile_sum_partial(&f, 0).is_err());
        assert!(tile_sum_partial(&f, 5).is_err());
    }

    #[test]
    fn tile_sum_of_constant_is_constant() {
        let f = GridSignal::from_real(&[2.0; 8]).unwrap();
        for cutoff in 1..=8 {
            let out = tile_sum_partial(&f, cutoff).unwrap();
            assert!(reals(&out).iter().all(|&v| (v - 2.0).abs() < 1e-12));
        }
    }

    #[test]
    fn greedy_model_sum_realizes_the_supremum() {
        let seq = LacunarySequence::pow2(6);
        let f = GridSignal::from_real(&[3.0, -1.0, 0.5, 2.0, -4.0, 0.0, 1.0, 7.0, 1.0, 1.0, -2.0,
            5.5, 0.25, -0.25, 8.0, -3.0])
        .unwrap();
        let set = lacunary_bitiles(4, &seq).unwrap();
        let greedy = greedy_choice(&f, &seq).unwrap();
        let model = model_sum(&set, &f, &greedy).unwrap();
        let sup = maximal_operator(&f, &seq).unwrap();
        for (m, s) in model.values().iter().zip(sup.values()) {
            assert!((m.norm() - s.re).abs() < 1e-12);
        }

        // Any other sequence-valued choice is dominated pointwise.
        let other = ChoiceFunction::constant(2, 4).unwrap();
        let dominated = model_sum(&set, &f, &other).unwrap();
        for (d, s) in dominated.values().iter().zip(sup.values()) {
            assert!(d.norm() <= s.re + 1e-12);
        }
    }
}
