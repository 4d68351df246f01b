//! Seeded function families. Every generator draws from a ChaCha stream
//! seeded explicitly, so a family is a pure function of (kind, n, seed).
//!
//! Families: random signs, sparse spikes (heights spread over dyadic
//! scales, so sup/mean ratios reach 2^n), dyadic indicators, scaled Walsh
//! characters, random lacunary polynomials over the pow2 frequencies, and
//! kernel-aligned block functions whose partial sums overshoot their sup.

use lacuna_core::{walsh_function, GridSignal};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signs(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let vals: Vec<f64> = (0..1usize << n)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    GridSignal::from_real(&vals).expect("power-of-two length")
}

pub fn sparse_spikes(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let len = 1usize << n;
    let mut vals = vec![0.0; len];
    let spikes = rng.gen_range(1..=4usize);
    for _ in 0..spikes {
        let cell = rng.gen_range(0..len);
        let scale = rng.gen_range(0..=n);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        vals[cell] = sign * (1u64 << scale) as f64;
    }
    if vals.iter().all(|v| *v == 0.0) {
        vals[0] = 1.0;
    }
    GridSignal::from_real(&vals).expect("power-of-two length")
}

pub fn indicator(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let level = rng.gen_range(0..=n);
    let index = rng.gen_range(0..1u64 << level);
    let cells_per = 1u64 << (n - level);
    let mut vals = vec![0.0; 1usize << n];
    for c in index * cells_per..(index + 1) * cells_per {
        vals[c as usize] = 1.0;
    }
    GridSignal::from_real(&vals).expect("power-of-two length")
}

pub fn character(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let freq = rng.gen_range(0..1u64 << n);
    let scale = rng.gen_range(0.5..2.0);
    let w = walsh_function(freq, n).expect("frequency fits the grid");
    let vals: Vec<f64> = w.values().iter().map(|v| scale * v.re).collect();
    GridSignal::from_real(&vals).expect("power-of-two length")
}

pub fn lacunary_poly(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let mut vals = vec![0.0; 1usize << n];
    let terms = rng.gen_range(2..=n.max(2));
    for _ in 0..terms {
        let j = rng.gen_range(0..n);
        let c = rng.gen_range(-1.0..1.0);
        let w = walsh_function(1u64 << j, n).expect("frequency fits the grid");
        for (v, wv) in vals.iter_mut().zip(w.values()) {
            *v += c * wv.re;
        }
    }
    GridSignal::from_real(&vals).expect("power-of-two length")
}

/// Unimodular function aligned against one partial-sum kernel: +a on a
/// random level-m block B, and -a*w_B*W_{2^m-1} off B, where w_B is the
/// (constant) value of W_{2^m-1} on B. The cutoff-(2^m - 1) partial sum
/// then equals a*(2 - 2^(1-m)) on all of B, so the maximal operator
/// overshoots the sup norm by a factor approaching 2 while staying exactly
/// bounded by it in size.
pub fn block_kernel(n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    let len = 1usize << n;
    let hi = n.saturating_sub(1).clamp(1, 8);
    let m = rng.gen_range(2.min(hi)..=hi);
    let block = rng.gen_range(0..1usize << m);
    let cells_per = len >> m;
    let a = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let w = walsh_function((1u64 << m) - 1, n).expect("frequency fits the grid");
    let w_b = w.values()[block * cells_per].re;
    let vals: Vec<f64> = (0..len)
        .map(|c| {
            if c / cells_per == block {
                a
            } else {
                -a * w_b * w.values()[c].re
            }
        })
        .collect();
    GridSignal::from_real(&vals).expect("power-of-two length")
}

const KINDS: [&str; 5] = ["signs", "spikes", "indicator", "character", "poly"];

fn by_kind(kind: &str, n: u32, rng: &mut ChaCha8Rng) -> GridSignal {
    match kind {
        "signs" => random_signs(n, rng),
        "spikes" => sparse_spikes(n, rng),
        "indicator" => indicator(n, rng),
        "character" => character(n, rng),
        "poly" => lacunary_poly(n, rng),
        "kernel" => block_kernel(n, rng),
        other => unreachable!("unknown family {other}"),
    }
}

/// Cycles through all five families.
pub fn mixed_family(n: u32, count: u32, seed: u64) -> Vec<(&'static str, GridSignal)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let kind = KINDS[(i as usize) % KINDS.len()];
            (kind, by_kind(kind, n, &mut rng))
        })
        .collect()
}

/// Alternates random signs and kernel-aligned block functions: a bounded
/// family whose maximal-operator values spread over (1, 2) times the sup.
pub fn signs_and_kernels(n: u32, count: u32, seed: u64) -> Vec<(&'static str, GridSignal)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { "signs" } else { "kernel" };
            (kind, by_kind(kind, n, &mut rng))
        })
        .collect()
}

/// Alternates random signs and sparse spikes only.
pub fn signs_and_spikes(n: u32, count: u32, seed: u64) -> Vec<(&'static str, GridSignal)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { "signs" } else { "spikes" };
            (kind, by_kind(kind, n, &mut rng))
        })
        .collect()
}

/// Low noise floor plus a few unit-breaking spikes: the level set
/// `{M_p f > 1}` is nonempty but proper, which is what the projection
/// splitter needs.
pub fn projection_family(n: u32, count: u32, seed: u64) -> Vec<GridSignal> {
    let mut rng = rng(seed);
    let len = 1usize << n;
    // Spike budget keeps the global p-mean below one, so the bad region
    // never swallows the whole grid.
    let max_spikes = (len / 20).clamp(1, 3);
    (0..count)
        .map(|_| {
            let mut vals: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let spikes = rng.gen_range(1..=max_spikes);
            for _ in 0..spikes {
                let cell = rng.gen_range(0..len);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                vals[cell] = sign * rng.gen_range(2.0..3.2);
            }
            GridSignal::from_real(&vals).expect("power-of-two length")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_deterministic_per_seed() {
        let a = mixed_family(5, 10, 42);
        let b = mixed_family(5, 10, 42);
        let c = mixed_family(5, 10, 43);
        for ((ka, fa), (kb, fb)) in a.iter().zip(&b) {
            assert_eq!(ka, kb);
            assert_eq!(fa.values(), fb.values());
        }
        assert!(a.iter().zip(&c).any(|((_, fa), (_, fc))| fa.values() != fc.values()));
    }

    #[test]
    fn families_are_nonzero_and_real() {
        for (kind, f) in mixed_family(6, 20, 1) {
            assert!(f.linf_norm() > 0.0, "{kind} produced a zero signal");
            assert!(f.values().iter().all(|v| v.im == 0.0));
        }
    }

    #[test]
    fn block_kernel_partial_sum_overshoots_the_sup() {
        use lacuna_core::partial_sum_below;
        let mut r = rng(11);
        for _ in 0..10 {
            let f = block_kernel(8, &mut r);
            assert!((f.linf_norm() - 1.0).abs() < 1e-12);
            let overshoot = (2..=8)
                .map(|m| {
                    partial_sum_below(&f, (1u64 << m) - 1)
                        .expect("cutoff fits")
                        .linf_norm()
                })
                .fold(0.0f64, f64::max);
            assert!(overshoot > 1.4, "no cutoff overshoots: {overshoot}");
        }
    }

    #[test]
    fn projection_family_keeps_a_proper_level_set() {
        for f in projection_family(6, 10, 5) {
            assert!(f.linf_norm() > 1.0);
            let quiet = f.values().iter().filter(|v| v.norm() <= 1.0).count();
            assert!(quiet > 0);
        }
    }
}
