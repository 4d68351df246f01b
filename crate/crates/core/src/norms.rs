//! Norms on the grid probability space, dyadic maximal and oscillation
//! functionals, and the log-tower / Young-function scale used by the
//! endpoint estimates.

use crate::error::{CoreError, Result};
use crate::plane::{DyadicInterval, IntervalKind};
use crate::signal::GridSignal;
use num_complex::Complex64;

fn check_exponent(p: f64, allow_infinite: bool) -> Result<()> {
    if p.is_nan() || p < 1.0 || (!allow_infinite && p.is_infinite()) {
        return Err(CoreError::InvalidParameter(format!(
            "exponent {p} out of range"
        )));
    }
    Ok(())
}

/// `(mean |f|^p)^{1/p}`; `p = inf` gives the sup norm.
pub fn lp_norm(f: &GridSignal, p: f64) -> Result<f64> {
    check_exponent(p, true)?;
    if p.is_infinite() {
        return Ok(f.linf_norm());
    }
    let mean: f64 = f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>() * f.cell_measure();
    Ok(mean.powf(1.0 / p))
}

/// `sup_t t * measure(|f| > t)^{1/p}`, computed exactly from the sorted
/// magnitudes.
pub fn weak_lp(f: &GridSignal, p: f64) -> Result<f64> {
    check_exponent(p, true)?;
    if p.is_infinite() {
        return Ok(f.linf_norm());
    }
    let mut mags = f.magnitudes();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let measure = f.cell_measure();
    Ok(mags
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| v * ((i + 1) as f64 * measure).powf(1.0 / p))
        .fold(0.0, f64::max))
}

fn check_time_interval(f: &GridSignal, interval: &DyadicInterval) -> Result<()> {
    if interval.kind != IntervalKind::Time {
        return Err(CoreError::InvalidParameter(
            "local norms need a time interval".into(),
        ));
    }
    if interval.level > f.resolution() {
        return Err(CoreError::ResolutionTooCoarse {
            resolution: f.resolution(),
            what: format!("interval at level {}", interval.level),
        });
    }
    Ok(())
}

/// `p`-mean of |f| over a dyadic time interval, normalized by its measure.
pub fn local_lp(f: &GridSignal, interval: &DyadicInterval, p: f64) -> Result<f64> {
    check_exponent(p, false)?;
    check_time_interval(f, interval)?;
    let cells = interval.cells(f.resolution());
    let count = (cells.end - cells.start) as f64;
    let mean: f64 = cells
        .map(|c| f.values()[c as usize].norm().powf(p))
        .sum::<f64>()
        / count;
    Ok(mean.powf(1.0 / p))
}

/// Dyadic maximal function of the local `p`-means, over all dyadic time
/// intervals containing each cell (the cell itself through the root).
pub fn maximal_mp(f: &GridSignal, p: f64) -> Result<GridSignal> {
    check_exponent(p, false)?;
    let n = f.resolution() as usize;
    // power_means[d][j]: mean of |f|^p over the level-(N-d) interval j.
    let mut power_means: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    power_means.push(f.values().iter().map(|v| v.norm().powf(p)).collect());
    for d in 0..n {
        let prev = &power_means[d];
        let next: Vec<f64> = (0..prev.len() / 2)
            .map(|j| (prev[2 * j] + prev[2 * j + 1]) / 2.0)
            .collect();
        power_means.push(next);
    }
    Ok(GridSignal::from_fn(f.resolution(), |cell| {
        let best = (0..=n)
            .map(|d| power_means[d][cell >> d])
            .fold(0.0, f64::max);
        Complex64::new(best.powf(1.0 / p), 0.0)
    }))
}

/// Largest mean oscillation `mean_I |f - mean_I f|` over dyadic time
/// intervals.
pub fn dyadic_bmo(f: &GridSignal) -> Result<f64> {
    let n = f.resolution();
    let len = f.len();
    let mut prefix = vec![Complex64::ZERO; len + 1];
    for (i, v) in f.values().iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let mut worst = 0.0f64;
    for level in 0..=n {
        let width = 1usize << (n - level);
        for start in (0..len).step_by(width) {
            let mean = (prefix[start + width] - prefix[start]) / width as f64;
            let osc: f64 = f.values()[start..start + width]
                .iter()
                .map(|v| (v - mean).norm())
                .sum::<f64>()
                / width as f64;
            worst = worst.max(osc);
        }
    }
    Ok(worst)
}

/// Fraction of the grid where |f| exceeds `lambda`.
pub fn tail_fraction(f: &GridSignal, lambda: f64) -> f64 {
    f.values().iter().filter(|v| v.norm() > lambda).count() as f64 * f.cell_measure()
}

/// `exp^{(k)}(1)`: 1, e, e^e, e^(e^e), then overflow.
pub fn tower_exp(k: u32) -> f64 {
    let mut v = 1.0f64;
    for _ in 0..k {
        v = v.exp();
    }
    v
}

pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `k`-fold logarithm of `tower_exp(k) + t`, so the value at `t = 0` is
/// exactly 1 and the function grows like `log^(k)` for large `t`.
/// Supported for `k <= 4`; beyond that the shift is not representable.
pub fn log_tower(k: u32, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(CoreError::InvalidParameter(format!(
            "log tower needs t >= 0, got {t}"
        )));
    }
    if k == 0 {
        return Ok(1.0 + t);
    }
    Ok(log_tower_from_log(k, t.ln())?)
}

/// Same as [`log_tower`] with the argument given as `ln t`, allowing inputs
/// far beyond the overflow threshold.
pub fn log_tower_from_log(k: u32, ln_t: f64) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(CoreError::InvalidParameter(format!(
            "log tower depth {k} unsupported"
        )));
    }
    // ln(tower_exp(k) + t) = logaddexp(tower_exp(k-1), ln t).
    let mut v = logaddexp(tower_exp(k - 1), ln_t);
    for _ in 1..k {
        v = v.ln();
    }
    Ok(v)
}

/// `t * log_tower(2, t) * log_tower(b, t)`.
pub fn young_phi(b: u32, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(t * log_tower(2, t)? * log_tower(b, t)?)
}

/// Young function `phi_b(t) = t log_tower(2, t) log_tower(b, t)` for
/// `b` in {3, 4}: superlinear, convex, value above 1 at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YoungFunction {
    b: u32,
}

impl YoungFunction {
    pub fn new(b: u32) -> Result<Self> {
        if !(b == 3 || b == 4) {
            return Err(CoreError::InvalidParameter(format!(
                "young function depth {b} unsupported"
            )));
        }
        Ok(Self { b })
    }

    pub fn depth(&self) -> u32 {
        self.b
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        young_phi(self.b, t)
    }

    /// `ln phi_b(t)` from `ln t`, stable for arguments past overflow.
    pub fn eval_ln(&self, ln_t: f64) -> Result<f64> {
        Ok(ln_t
            + log_tower_from_log(2, ln_t)?.ln()
            + log_tower_from_log(self.b, ln_t)?.ln())
    }
}

/// Luxemburg norm on a dyadic time interval for an arbitrary increasing
/// integrand: the least `lam` with `mean_I integrand(|f|/lam) <= 1`,
/// located by bracketing and bisection.
pub fn local_orlicz_norm_with(
    f: &GridSignal,
    interval: &DyadicInterval,
    integrand: impl Fn(f64) -> f64,
) -> Result<f64> {
    check_time_interval(f, interval)?;
    let cells = interval.cells(f.resolution());
    let mags: Vec<f64> = cells.map(|c| f.values()[c as usize].norm()).collect();
    if mags.iter().all(|&m| m == 0.0) {
        return Ok(0.0);
    }
    let count = mags.len() as f64;
    let mean_at = |lam: f64| -> f64 { mags.iter().map(|&m| integrand(m / lam)).sum::<f64>() / count };
    let mut hi = mags.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut guard = 0;
    while mean_at(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 {
            return Err(CoreError::Precondition(
                "orlicz bracket failed to close; integrand may not be increasing".into(),
            ));
        }
    }
    let mut lo = hi;
    guard = 0;
    while mean_at(lo / 2.0) <= 1.0 {
        lo /= 2.0;
        guard += 1;
        if guard > 4000 {
            // Mean stays at or below one for every positive scale.
            return Ok(0.0);
        }
    }
    lo /= 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= 1e-10 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Luxemburg norm for a [`YoungFunction`].
pub fn local_orlicz_norm(
    f: &GridSignal,
    interval: &DyadicInterval,
    phi: &YoungFunction,
) -> Result<f64> {
    let b = phi.b;
    local_orlicz_norm_with(f, interval, move |t| young_phi(b, t).unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walsh::{rademacher, walsh_function};
    use std::f64::consts::E;

    fn fixture() -> GridSignal {
        GridSignal::from_real(&[3.0, -1.0, 0.5, 2.0, -4.0, 0.0, 1.0, 7.0]).unwrap()
    }

    #[test]
    fn lp_norm_basics() {
        let f = fixture();
        assert!(lp_norm(&f, 0.5).is_err());
        assert!(lp_norm(&f, f64::NAN).is_err());
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 7.0).abs() < 1e-15);
        let ones = GridSignal::from_real(&[1.0; 8]).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((lp_norm(&ones, p).unwrap() - 1.0).abs() < 1e-15);
        }
        let expected_l1 = (3.0 + 1.0 + 0.5 + 2.0 + 4.0 + 0.0 + 1.0 + 7.0) / 8.0;
        assert!((lp_norm(&f, 1.0).unwrap() - expected_l1).abs() < 1e-15);
        assert!((lp_norm(&f, 2.0).unwrap() - f.l2_norm()).abs() < 1e-15);
    }

    #[test]
    fn weak_lp_indicator_and_chebyshev() {
        let ind = GridSignal::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        for p in [1.0, 1.3, 2.0, 5.0] {
            let expected = 0.25f64.powf(1.0 / p);
            assert!((weak_lp(&ind, p).unwrap() - expected).abs() < 1e-15);
        }
        let f = fixture();
        for p in [1.0, 1.5, 2.0, 4.0] {
            assert!(weak_lp(&f, p).unwrap() <= lp_norm(&f, p).unwrap() + 1e-15);
        }
        assert_eq!(weak_lp(&GridSignal::zero(3), 1.5).unwrap(), 0.0);
    }

    #[test]
    fn maximal_function_oracles() {
        let f = GridSignal::from_real(&[1.0, 0.0]).unwrap();
        let m = maximal_mp(&f, 1.0).unwrap();
        assert!((m.values()[0].re - 1.0).abs() < 1e-15);
        assert!((m.values()[1].re - 0.5).abs() < 1e-15);

        let f = GridSignal::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let m = maximal_mp(&f, 1.0).unwrap();
        let expected = [1.0, 1.0, 0.5, 0.5];
        for (v, e) in m.values().iter().zip(expected) {
            assert!((v.re - e).abs() < 1e-15);
        }

        // p-means grow with p.
        let f = fixture();
        let m1 = maximal_mp(&f, 1.0).unwrap();
        let m2 = maximal_mp(&f, 2.0).unwrap();
        for (a, b) in m1.values().iter().zip(m2.values()) {
            assert!(a.re <= b.re + 1e-15);
        }
        assert!(maximal_mp(&f, f64::INFINITY).is_err());
        assert!(maximal_mp(&f, 0.9).is_err());
    }

    #[test]
    fn local_lp_means() {
        let f = fixture();
        let root = DyadicInterval::time(0, 0).unwrap();
        assert!((local_lp(&f, &root, 1.0).unwrap() - lp_norm(&f, 1.0).unwrap()).abs() < 1e-15);
        let right = DyadicInterval::time(1, 1).unwrap();
        let expected = (4.0 + 0.0 + 1.0 + 7.0) / 4.0;
        assert!((local_lp(&f, &right, 1.0).unwrap() - expected).abs() < 1e-15);
        let freq = DyadicInterval::freq(1, 1).unwrap();
        assert!(local_lp(&f, &freq, 1.0).is_err());
        let deep = DyadicInterval::time(9, 0).unwrap();
        assert!(local_lp(&f, &deep, 1.0).is_err());
    }

    #[test]
    fn bmo_of_characters_is_one() {
        assert_eq!(dyadic_bmo(&GridSignal::from_real(&[5.0; 8]).unwrap()).unwrap(), 0.0);
        let r0 = rademacher(0, 2).unwrap();
        assert!((dyadic_bmo(&r0).unwrap() - 1.0).abs() < 1e-15);
        for n in 1..8u64 {
            let w = walsh_function(n, 3).unwrap();
            assert!((dyadic_bmo(&w).unwrap() - 1.0).abs() < 1e-15, "walsh {n}");
        }
    }

    #[test]
    fn log_tower_values() {
        assert_eq!(tower_exp(0), 1.0);
        assert_eq!(tower_exp(1), E);
        assert!((tower_exp(2) - 15.154262241479262).abs() < 1e-12);
        assert!((tower_exp(3) - 3814279.1047602203).abs() < 1e-6);
        for k in 1..=4 {
            assert_eq!(log_tower(k, 0.0).unwrap(), 1.0, "depth {k}");
        }
        assert!(log_tower(2, -1.0).is_err());
        assert!(log_tower(5, 1.0).is_err());

        // Inverse identity pins the depth-2 value: exp(exp(L)) = e^e + t.
        let t = (E * E).exp();
        let l = log_tower(2, t).unwrap();
        assert!((l.exp().exp() - (tower_exp(2) + t)).abs() < 1e-9 * (tower_exp(2) + t));
        assert!((l - 2.0012).abs() < 1e-3);
        assert!(l > 2.0);

        // Log-domain form agrees where both are representable.
        for k in 1..=4u32 {
            for ln_t in [10.0f64, 50.0, 100.0, 300.0] {
                let a = log_tower(k, ln_t.exp()).unwrap();
                let b = log_tower_from_log(k, ln_t).unwrap();
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "k={k} ln_t={ln_t}");
            }
        }
        // And keeps working far past overflow, where the shift washes out.
        let huge = log_tower_from_log(2, 1e6).unwrap();
        assert!((huge - (1e6f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn young_function_shape() {
        let phi = YoungFunction::new(4).unwrap();
        assert!(YoungFunction::new(2).is_err());
        assert!(YoungFunction::new(5).is_err());
        assert_eq!(phi.eval(0.0).unwrap(), 0.0);
        let at_one = phi.eval(1.0).unwrap();
        assert!(at_one > 1.0 && at_one < 1.1, "phi(1) = {at_one}");

        // Convexity, checked through second differences on a coarse grid.
        let h = 0.05;
        let mut prev2 = phi.eval(0.0).unwrap();
        let mut prev1 = phi.eval(h).unwrap();
        for i in 2..400 {
            let cur = phi.eval(h * i as f64).unwrap();
            assert!(cur - 2.0 * prev1 + prev2 >= -1e-9, "second difference at {i}");
            prev2 = prev1;
            prev1 = cur;
        }

        for t in [0.5, 1.0, 10.0, 1e6] {
            let direct = phi.eval(t).unwrap().ln();
            let logged = phi.eval_ln(t.ln()).unwrap();
            assert!((direct - logged).abs() < 1e-10 * direct.abs().max(1.0));
        }
        assert!(phi.eval_ln(1e5).unwrap().is_finite());
    }

    #[test]
    fn orlicz_norm_reduces_to_lp_for_power_integrand() {
        let f = fixture();
        let root = DyadicInterval::time(0, 0).unwrap();
        for p in [1.0, 2.0, 3.0] {
            let orlicz = local_orlicz_norm_with(&f, &root, |t| t.powf(p)).unwrap();
            let lp = local_lp(&f, &root, p).unwrap();
            assert!((orlicz - lp).abs() < 1e-9 * lp, "p = {p}");
        }
    }

    #[test]
    fn orlicz_norm_of_young_function() {
        let phi = YoungFunction::new(3).unwrap();
        let root = DyadicInterval::time(0, 0).unwrap();
        let c = 2.75;
        let f = GridSignal::from_real(&[c; 8]).unwrap();
        let norm = local_orlicz_norm(&f, &root, &phi).unwrap();
        // At the Luxemburg scale the mean integrand sits at one.
        assert!((phi.eval(c / norm).unwrap() - 1.0).abs() < 1e-8);

        let doubled = GridSignal::from_real(&[2.0 * c; 8]).unwrap();
        let norm2 = local_orlicz_norm(&doubled, &root, &phi).unwrap();
        assert!((norm2 - 2.0 * norm).abs() < 1e-8 * norm);

        assert_eq!(local_orlicz_norm(&GridSignal::zero(3), &root, &phi).unwrap(), 0.0);
    }

    #[test]
    fn tail_fractions() {
        let f = fixture();
        assert_eq!(tail_fraction(&f, 6.9), 0.125);
        assert_eq!(tail_fraction(&f, 0.0), 0.875);
        assert_eq!(tail_fraction(&f, 100.0), 0.0);
    }
}
