//! Weak-type growth in p: the family maximum of
//! `weak_lp(operator output, p) / lp(input, p)` across a p-grid, fitted
//! against `a + b * log_1(p')` and against the one-parameter power law
//! `c * sqrt(p')` for comparison.

use anyhow::{bail, Result};
use lacuna_core::{
    greedy_choice, lacunary_bitiles, log_tower, lp_norm, model_sum, weak_lp, LacunarySequence,
};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::generators;
use crate::report::Report;

use super::{config_echo, line_fit, residual_norm, scale_fit};

pub const P_GRID: [f64; 6] = [1.02, 1.05, 1.1, 1.2, 1.5, 2.0];

#[derive(Debug, Clone)]
pub struct WeakLpOutcome {
    pub rows: Vec<Value>,
    /// Family maxima B(p), one per grid point.
    pub b: Vec<f64>,
    pub fit_a: f64,
    pub fit_b: f64,
    pub predicted_smallest: f64,
    pub actual_smallest: f64,
    /// actual / predicted at the smallest p.
    pub factor: f64,
    pub residual_log: f64,
    pub residual_power: f64,
}

fn p_prime(p: f64) -> f64 {
    p / (p - 1.0)
}

pub fn weak_lp_outcome(
    n: u32,
    seq: &LacunarySequence,
    seed: u64,
    trials: u32,
    p_grid: &[f64],
) -> Result<WeakLpOutcome> {
    if p_grid.iter().any(|&p| !(p > 1.0 && p <= 2.0)) {
        bail!("p-grid must lie in (1, 2], got {p_grid:?}");
    }
    if trials == 0 {
        bail!("family must hold at least one function");
    }
    let set = lacunary_bitiles(n, seq)?;

    let mut b = vec![0.0f64; p_grid.len()];
    for (_, f) in generators::signs_and_spikes(n, trials, seed) {
        let choice = greedy_choice(&f, seq)?;
        let model = model_sum(&set, &f, &choice)?;
        for (i, &p) in p_grid.iter().enumerate() {
            let denom = lp_norm(&f, p)?;
            if denom > 0.0 {
                b[i] = b[i].max(weak_lp(&model, p)? / denom);
            }
        }
    }

    let xs: Vec<f64> = p_grid
        .iter()
        .map(|&p| log_tower(1, p_prime(p)))
        .collect::<lacuna_core::Result<_>>()?;

    // Prediction fit uses only the tame part of the grid, then extrapolates
    // down to the smallest p.
    let tame: Vec<usize> = (0..p_grid.len()).filter(|&i| p_grid[i] >= 1.1).collect();
    if tame.len() < 2 || p_grid[0] >= 1.1 {
        bail!("p-grid needs at least two points >= 1.1 and one below");
    }
    let fit_xs: Vec<f64> = tame.iter().map(|&i| xs[i]).collect();
    let fit_ys: Vec<f64> = tame.iter().map(|&i| b[i]).collect();
    let (fit_a, fit_b) = line_fit(&fit_xs, &fit_ys);
    let predicted_smallest = fit_a + fit_b * xs[0];
    let actual_smallest = b[0];
    let factor = if predicted_smallest > 0.0 {
        actual_smallest / predicted_smallest
    } else {
        f64::INFINITY
    };

    // Residual comparison refits both models on the full grid.
    let (a2, b2) = line_fit(&xs, &b);
    let log_pred: Vec<f64> = xs.iter().map(|x| a2 + b2 * x).collect();
    let sqrt_xs: Vec<f64> = p_grid.iter().map(|&p| p_prime(p).sqrt()).collect();
    let c_power = scale_fit(&sqrt_xs, &b);
    let power_pred: Vec<f64> = sqrt_xs.iter().map(|x| c_power * x).collect();
    let residual_log = residual_norm(&log_pred, &b);
    let residual_power = residual_norm(&power_pred, &b);

    let rows = p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            json!({
                "p": p,
                "p_prime": p_prime(p),
                "b": b[i],
                "log_fit": log_pred[i],
                "power_fit": power_pred[i],
            })
        })
        .collect();

    Ok(WeakLpOutcome {
        rows,
        b,
        fit_a,
        fit_b,
        predicted_smallest,
        actual_smallest,
        factor,
        residual_log,
        residual_power,
    })
}

pub fn run_weak_lp(s: &Settings) -> Result<Report> {
    let seq = s.retained_sequence()?;
    let out = weak_lp_outcome(s.resolution, &seq, s.seed, s.trials, &P_GRID)?;
    let pass = out.factor <= 3.0 && out.residual_log < out.residual_power;
    Ok(Report {
        experiment: "weak-lp".into(),
        config: config_echo(s),
        rows: out.rows.clone(),
        constants: json!({
            "fit_a": out.fit_a,
            "fit_b": out.fit_b,
            "predicted_smallest": out.predicted_smallest,
            "actual_smallest": out.actual_smallest,
            "blowup_factor": out.factor,
            "residual_log": out.residual_log,
            "residual_power": out.residual_power,
        }),
        pass,
    })
}
