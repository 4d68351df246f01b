//! Walsh-Paley system on the dyadic grid.
//!
//! Frequencies are indexed in Paley order: `W_n = prod r_k^{n_k}` over the
//! binary digits `n_k` of `n`, where `r_k` is the k-th Rademacher function.
//! On a grid of resolution `N` the functions `W_0, ..., W_{2^N - 1}` form an
//! orthonormal basis and the group law `W_m W_n = W_{m xor n}` holds exactly,
//! since every value is `+1` or `-1`.

use crate::error::{CoreError, Result};
use crate::plane::Tile;
use crate::signal::GridSignal;
use num_complex::Complex64;

/// Reverses the low `n` bits of `i`. Bits at position `n` and above must be zero.
pub fn bit_reverse(i: u64, n: u32) -> u64 {
    debug_assert!(n == 64 || i < (1u64 << n));
    let mut out = 0u64;
    for k in 0..n {
        out |= ((i >> k) & 1) << (n - 1 - k);
    }
    out
}

/// k-th Rademacher function at resolution `n`: `+1` where binary digit k of x
/// is 0, `-1` where it is 1. Requires `k < n` so the digit is constant on cells.
pub fn rademacher(k: u32, n: u32) -> Result<GridSignal> {
    if k >= n {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: n,
            what: format!("rademacher index {k} needs resolution > {k}"),
        });
    }
    Ok(GridSignal::from_fn(n, |i| {
        if (i >> (n - k - 1)) & 1 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    }))
}

/// Walsh-Paley function `W_freq` at resolution `n`. Requires `freq < 2^n`.
pub fn walsh_function(freq: u64, n: u32) -> Result<GridSignal> {
    if n >= 64 || freq >= (1u64 << n) {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: n,
            what: format!("frequency {freq} not constant on cells at this resolution"),
        });
    }
    Ok(GridSignal::from_fn(n, |i| {
        let sign = (freq & bit_reverse(i as u64, n)).count_ones() & 1;
        if sign == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    }))
}

/// In-place natural-order Walsh-Hadamard butterfly:
/// `X[j] = sum_i x[i] (-1)^{popcount(i & j)}`. Length must be a power of two.
pub fn fwht_natural_inplace(values: &mut [Complex64]) {
    let m = values.len();
    assert!(m.is_power_of_two(), "fwht length must be a power of two");
    let mut h = 1;
    while h < m {
        for block in (0..m).step_by(2 * h) {
            for i in block..block + h {
                let a = values[i];
                let b = values[i + h];
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// All Walsh coefficients `c_n = <f, W_n>` for `0 <= n < 2^N`, in Paley order.
pub fn walsh_coefficients(f: &GridSignal) -> Vec<Complex64> {
    let n = f.resolution();
    let mut x = f.values().to_vec();
    fwht_natural_inplace(&mut x);
    // W_n(cell i) = (-1)^{popcount(n & rev(i))} = (-1)^{popcount(rev(n) & i)},
    // so the Paley coefficient sits at the bit-reversed butterfly output.
    let scale = f.cell_measure();
    (0..x.len() as u64)
        .map(|k| x[bit_reverse(k, n) as usize] * scale)
        .collect()
}

/// Reconstructs the signal with the given Paley-order coefficients.
pub fn signal_from_coefficients(coeffs: &[Complex64]) -> Result<GridSignal> {
    let m = coeffs.len();
    if m == 0 || !m.is_power_of_two() {
        return Err(CoreError::InvalidParameter(format!(
            "coefficient count must be a positive power of two, got {m}"
        )));
    }
    let n = m.trailing_zeros();
    let mut x: Vec<Complex64> = (0..m as u64)
        .map(|k| coeffs[bit_reverse(k, n) as usize])
        .collect();
    fwht_natural_inplace(&mut x);
    GridSignal::from_values(x)
}

fn truncated_sum(f: &GridSignal, keep: impl Fn(u64) -> bool) -> GridSignal {
    let mut coeffs = walsh_coefficients(f);
    for (k, c) in coeffs.iter_mut().enumerate() {
        if !keep(k as u64) {
            *c = Complex64::ZERO;
        }
    }
    signal_from_coefficients(&coeffs).expect("coefficient count preserved")
}

/// Inclusive partial sum `S_n f = sum_{k <= n} c_k W_k`. Requires `n < 2^N`.
pub fn partial_sum(f: &GridSignal, n: u64) -> Result<GridSignal> {
    let res = f.resolution();
    if n >= (1u64 << res) {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: res,
            what: format!("partial sum frequency {n} out of range"),
        });
    }
    Ok(truncated_sum(f, |k| k <= n))
}

/// Exclusive partial sum `sum_{k < n} c_k W_k`. Allows `n = 2^N`, which
/// reproduces `f` exactly.
pub fn partial_sum_below(f: &GridSignal, n: u64) -> Result<GridSignal> {
    let res = f.resolution();
    if n > (1u64 << res) {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: res,
            what: format!("partial sum frequency {n} out of range"),
        });
    }
    Ok(truncated_sum(f, |k| k < n))
}

/// Cell-addressable evaluator for a tile's wave packet at resolution `n`,
/// avoiding a full-grid allocation per tile.
#[derive(Debug, Clone, Copy)]
pub struct PacketOnGrid {
    amp: f64,
    local_res: u32,
    time_index: u64,
    freq: u64,
}

impl PacketOnGrid {
    pub fn new(tile: &Tile, n: u32) -> Result<Self> {
        let level = tile.time.level;
        if level > n {
            return Err(CoreError::ResolutionTooCoarse {
                resolution: n,
                what: format!("tile time level {level} finer than the grid"),
            });
        }
        let local_res = n - level;
        let freq = tile.freq.index;
        if local_res >= 64 || freq >= (1u64 << local_res) {
            return Err(CoreError::ResolutionTooCoarse {
                resolution: n,
                what: format!("tile frequency {freq} not representable inside its time interval"),
            });
        }
        Ok(Self {
            amp: 2f64.powi(level as i32).sqrt(),
            local_res,
            time_index: tile.time.index,
            freq,
        })
    }

    /// Packet value on one cell; zero outside the time interval.
    pub fn value(&self, cell: u64) -> f64 {
        if (cell >> self.local_res) != self.time_index {
            return 0.0;
        }
        let local = cell & ((1u64 << self.local_res) - 1);
        let sign = (self.freq & bit_reverse(local, self.local_res)).count_ones() & 1;
        if sign == 0 {
            self.amp
        } else {
            -self.amp
        }
    }

    /// Cells of the supporting time interval.
    pub fn cells(&self) -> std::ops::Range<u64> {
        let width = 1u64 << self.local_res;
        (self.time_index * width)..((self.time_index + 1) * width)
    }
}

/// `L^2`-normalized wave packet of a tile: `|I|^{-1/2} W_{n_t}` rescaled to the
/// time interval, zero elsewhere. Requires the local frequency to be
/// representable at resolution `n - level`.
pub fn wave_packet(tile: &Tile, n: u32) -> Result<GridSignal> {
    let p = PacketOnGrid::new(tile, n)?;
    Ok(GridSignal::from_fn(n, |i| {
        Complex64::new(p.value(i as u64), 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(f: &GridSignal) -> Vec<f64> {
        f.values().iter().map(|v| v.re).collect()
    }

    #[test]
    fn rademacher_matches_digit_table() {
        assert_eq!(reals(&rademacher(0, 2).unwrap()), [1.0, 1.0, -1.0, -1.0]);
        assert_eq!(reals(&rademacher(1, 2).unwrap()), [1.0, -1.0, 1.0, -1.0]);
        assert_eq!(reals(&rademacher(0, 1).unwrap()), [1.0, -1.0]);
        assert!(rademacher(2, 2).is_err());
    }

    #[test]
    fn walsh_three_is_product_of_first_two_rademachers() {
        assert_eq!(reals(&walsh_function(3, 2).unwrap()), [1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn walsh_five_skips_middle_rademacher() {
        assert_eq!(
            reals(&walsh_function(5, 3).unwrap()),
            [1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0]
        );
    }

    #[test]
    fn walsh_equals_rademacher_product() {
        let n = 4;
        for freq in 0..(1u64 << n) {
            let mut expected = GridSignal::from_real(&vec![1.0; 1 << n]).unwrap();
            for k in 0..n {
                if (freq >> k) & 1 == 1 {
                    let r = rademacher(k, n).unwrap();
                    for (e, rv) in expected.values_mut().iter_mut().zip(r.values()) {
                        *e *= rv;
                    }
                }
            }
            assert_eq!(walsh_function(freq, n).unwrap(), expected, "freq {freq}");
        }
    }

    #[test]
    fn group_law_holds_exactly() {
        let n = 5;
        for m in [0u64, 1, 7, 13, 31] {
            for k in [0u64, 2, 5, 21, 30] {
                let wm = walsh_function(m, n).unwrap();
                let wk = walsh_function(k, n).unwrap();
                let prod: Vec<f64> = wm
                    .values()
                    .iter()
                    .zip(wk.values())
                    .map(|(a, b)| (a * b).re)
                    .collect();
                assert_eq!(prod, reals(&walsh_function(m ^ k, n).unwrap()));
            }
        }
    }

    #[test]
    fn characters_are_orthonormal() {
        let n = 4;
        for a in 0..(1u64 << n) {
            let wa = walsh_function(a, n).unwrap();
            for b in 0..(1u64 << n) {
                let wb = walsh_function(b, n).unwrap();
                let ip = wa.inner(&wb).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn delta_coefficients_are_flat() {
        let f = GridSignal::from_real(&[4.0, 0.0, 0.0, 0.0]).unwrap();
        let c = walsh_coefficients(&f);
        for v in &c {
            assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn partial_sum_of_delta() {
        let f = GridSignal::from_real(&[4.0, 0.0, 0.0, 0.0]).unwrap();
        let s = partial_sum(&f, 1).unwrap();
        assert_eq!(reals(&s), [2.0, 2.0, 0.0, 0.0]);
        assert!(partial_sum(&f, 4).is_err());
    }

    #[test]
    fn exclusive_sum_at_grid_size_reconstructs() {
        let f = GridSignal::from_real(&[0.3, -1.7, 2.5, 0.0, 1.0, 1.0, -4.0, 0.25]).unwrap();
        let s = partial_sum_below(&f, 8).unwrap();
        for (a, b) in f.values().iter().zip(s.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(
            partial_sum_below(&f, 0).unwrap(),
            GridSignal::zero(3),
            "empty sum is zero"
        );
        assert!(partial_sum_below(&f, 9).is_err());
    }

    #[test]
    fn coefficient_round_trip_and_parseval() {
        let f = GridSignal::from_values(
            (0..16)
                .map(|i| Complex64::new((i as f64).sin(), (3.0 * i as f64).cos()))
                .collect(),
        )
        .unwrap();
        let c = walsh_coefficients(&f);
        let g = signal_from_coefficients(&c).unwrap();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let energy: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        assert!((energy - f.l2_norm().powi(2)).abs() < 1e-13);
    }

    #[test]
    fn coefficients_match_direct_inner_products() {
        let f = GridSignal::from_values(
            (0..8)
                .map(|i| Complex64::new(i as f64 * 0.7 - 2.0, (i * i) as f64 * 0.1))
                .collect(),
        )
        .unwrap();
        let c = walsh_coefficients(&f);
        for freq in 0..8u64 {
            let w = walsh_function(freq, 3).unwrap();
            let direct = f.inner(&w).unwrap();
            assert!((c[freq as usize] - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn wave_packet_on_right_half() {
        let tile = Tile::new(1, 1, 0).unwrap();
        let w = wave_packet(&tile, 2).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(reals(&w), [0.0, 0.0, r2, r2]);
        assert!((w.l2_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wave_packet_rejects_unrepresentable_frequency() {
        // Frequency block [16,20) at time level 2 needs local resolution >= 3.
        let tile = Tile::new(2, 0, 4).unwrap();
        assert!(wave_packet(&tile, 4).is_err());
        assert!(wave_packet(&tile, 5).is_ok());
    }

    #[test]
    fn full_tile_packet_is_walsh_character() {
        for freq in 0..8u64 {
            let tile = Tile::new(0, 0, freq).unwrap();
            assert_eq!(
                wave_packet(&tile, 3).unwrap(),
                walsh_function(freq, 3).unwrap()
            );
        }
    }
}
