//! Strong-type growth in p: the family maximum of `lp(output) / lp(input)`
//! against the scale `p' * log_1(p')` across the p-grid.

use anyhow::{bail, Result};
use lacuna_core::{
    greedy_choice, lacunary_bitiles, log_tower, lp_norm, model_sum, LacunarySequence,
};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::generators;
use crate::report::Report;

use super::{config_echo, P_GRID};

/// Desk-scale cap on the strong-type constant; the observed value is
/// recorded next to it.
pub const STRONG_CONSTANT_CAP: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct StrongLpOutcome {
    pub rows: Vec<Value>,
    pub c_strong: f64,
}

pub fn strong_lp_outcome(
    n: u32,
    seq: &LacunarySequence,
    seed: u64,
    trials: u32,
    p_grid: &[f64],
) -> Result<StrongLpOutcome> {
    if p_grid.iter().any(|&p| !(p > 1.0 && p <= 2.0)) {
        bail!("p-grid must lie in (1, 2], got {p_grid:?}");
    }
    if trials == 0 {
        bail!("family must hold at least one function");
    }
    let set = lacunary_bitiles(n, seq)?;
    let mut max_ratio = vec![0.0f64; p_grid.len()];
    for (_, f) in generators::mixed_family(n, trials, seed) {
        let choice = greedy_choice(&f, seq)?;
        let model = model_sum(&set, &f, &choice)?;
        for (i, &p) in p_grid.iter().enumerate() {
            let denom = lp_norm(&f, p)?;
            if denom > 0.0 {
                max_ratio[i] = max_ratio[i].max(lp_norm(&model, p)? / denom);
            }
        }
    }

    let mut c_strong = 0.0f64;
    let mut rows = Vec::new();
    for (i, &p) in p_grid.iter().enumerate() {
        let p_prime = p / (p - 1.0);
        let scale = p_prime * log_tower(1, p_prime)?;
        let needed = max_ratio[i] / scale;
        c_strong = c_strong.max(needed);
        rows.push(json!({
            "p": p,
            "max_ratio": max_ratio[i],
            "scale": scale,
            "needed_constant": needed,
        }));
    }
    Ok(StrongLpOutcome { rows, c_strong })
}

pub fn run_strong_lp(s: &Settings) -> Result<Report> {
    let seq = s.retained_sequence()?;
    let out = strong_lp_outcome(s.resolution, &seq, s.seed, s.trials, &P_GRID)?;
    let pass = out.c_strong.is_finite() && out.c_strong <= STRONG_CONSTANT_CAP;
    Ok(Report {
        experiment: "strong-lp".into(),
        config: config_echo(s),
        rows: out.rows.clone(),
        constants: json!({
            "c_strong": out.c_strong,
            "constant_cap": STRONG_CONSTANT_CAP,
        }),
        pass,
    })
}
