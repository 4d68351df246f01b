//! The nine verification sweeps. Each takes the merged [`Settings`] and
//! returns a [`Report`]; the pass flag is the conjunction of every
//! inequality the sweep checks, each with its constant recorded.

mod decompose;
mod embedding;
mod estimate_ww;
mod exp_tail;
mod model_sum;
mod strong_lp;
mod tiles;
mod walsh;
mod weak_lp;

pub use decompose::{decompose_outcome, run_decompose, DecomposeOutcome};
pub use embedding::{run_embedding, EMBEDDING_CONSTANT_CAP};
pub use estimate_ww::{run_estimate_ww, ww_outcome, WwOutcome, VIRTUAL_RESOLUTIONS};
pub use exp_tail::{run_exp_tail, tail_outcome, TailOutcome, INCLUSION_MULTIPLIERS};
pub use model_sum::run_model_sum;
pub use strong_lp::{run_strong_lp, strong_lp_outcome, StrongLpOutcome, STRONG_CONSTANT_CAP};
pub use tiles::run_tiles;
pub use walsh::run_walsh;
pub use weak_lp::{run_weak_lp, weak_lp_outcome, WeakLpOutcome, P_GRID};

use lacuna_core::GridSignal;
use serde_json::{json, Value};

use crate::config::Settings;

/// Shared config echo for every report.
pub(crate) fn config_echo(s: &Settings) -> Value {
    json!({
        "resolution": s.resolution,
        "seq": s.seq_spec,
        "seed": s.seed,
        "trials": s.trials,
    })
}

/// Largest pointwise gap between the magnitude of `a` and the real part
/// of `b` (the maximal operator stores its sup in the real slot).
pub(crate) fn magnitude_gap(a: &GridSignal, b: &GridSignal) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x.norm() - y.re).abs())
        .fold(0.0, f64::max)
}

/// Least-squares line `y = a + b x`.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Least-squares scale for the one-parameter model `y = c * x`.
pub(crate) fn scale_fit(xs: &[f64], ys: &[f64]) -> f64 {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

pub(crate) fn residual_norm(pred: &[f64], ys: &[f64]) -> f64 {
    pred.iter()
        .zip(ys)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        .sqrt()
}
