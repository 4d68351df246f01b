//! Endpoint chain on the weak-L1 side. For each input the four steps are
//!
//!   weak-L1 <= weak-Lpbar <= K log_1(pbar') lp(f, pbar)
//!           <= K log_1(pbar') l1(f) ratio^{1/pbar'} <= K2 l1(f) log_2(ratio)
//!
//! with `pbar' = max(2, ln ratio)` and `ratio = sup|f| / mean|f|`. Steps
//! one and three are parameter-free inequalities checked directly; K and
//! K2 are recorded as the observed maxima. Virtual spike rows extend the
//! ratio far beyond what a desk grid can hold.

use anyhow::Result;
use lacuna_core::{
    greedy_choice, lacunary_bitiles, log_tower, lp_norm, model_sum, weak_lp, LacunarySequence,
};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::generators;
use crate::report::Report;
use crate::spike::spike_row;

use super::config_echo;

pub const VIRTUAL_RESOLUTIONS: [u32; 8] = [12, 16, 20, 24, 28, 32, 36, 40];

#[derive(Debug, Clone)]
pub struct WwOutcome {
    pub rows: Vec<Value>,
    pub k: f64,
    pub k2: f64,
    pub ratio_max: f64,
    pub steps_ok: bool,
    pub grid_count: u32,
    pub spike_count: u32,
}

fn pow2_exponent(seq: &LacunarySequence) -> Option<u32> {
    if seq.terms().iter().all(|t| t.is_power_of_two()) {
        seq.terms().last().map(|t| t.trailing_zeros())
    } else {
        None
    }
}

pub fn ww_outcome(n: u32, seq: &LacunarySequence, seed: u64, trials: u32) -> Result<WwOutcome> {
    let set = lacunary_bitiles(n, seq)?;
    let mut out = WwOutcome {
        rows: Vec::new(),
        k: 0.0,
        k2: 0.0,
        ratio_max: 0.0,
        steps_ok: true,
        grid_count: 0,
        spike_count: 0,
    };

    for (kind, f) in generators::mixed_family(n, trials.max(1), seed) {
        let l1 = lp_norm(&f, 1.0)?;
        if l1 == 0.0 {
            continue;
        }
        let linf = f.linf_norm();
        let ratio = linf / l1;
        let pbar_prime = ratio.ln().max(2.0);
        let pbar = pbar_prime / (pbar_prime - 1.0);
        let choice = greedy_choice(&f, seq)?;
        let model = model_sum(&set, &f, &choice)?;
        let t1 = weak_lp(&model, 1.0)?;
        let t2 = weak_lp(&model, pbar)?;
        let lpbar = lp_norm(&f, pbar)?;
        let log1 = log_tower(1, pbar_prime)?;
        let log2 = log_tower(2, ratio)?;
        let step1_ok = t1 <= t2 * (1.0 + 1e-9);
        let step3_ok = lpbar <= l1 * ratio.powf(1.0 / pbar_prime) * (1.0 + 1e-9);
        let k_needed = if t2 > 0.0 { t2 / (log1 * lpbar) } else { 0.0 };
        let k2_needed = if t1 > 0.0 { t1 / (l1 * log2) } else { 0.0 };
        out.k = out.k.max(k_needed);
        out.k2 = out.k2.max(k2_needed);
        out.ratio_max = out.ratio_max.max(ratio);
        out.steps_ok &= step1_ok && step3_ok;
        out.grid_count += 1;
        out.rows.push(json!({
            "kind": kind,
            "ratio": ratio,
            "t1": t1,
            "t2": t2,
            "pbar_prime": pbar_prime,
            "k_needed": k_needed,
            "k2_needed": k2_needed,
            "step1_ok": step1_ok,
            "step3_ok": step3_ok,
        }));
    }

    if let Some(j) = pow2_exponent(seq) {
        for v in VIRTUAL_RESOLUTIONS {
            let row = spike_row(v, j)?;
            let chain = row.chain_row()?;
            out.k = out.k.max(chain["k_needed"].as_f64().unwrap_or(f64::NAN));
            out.k2 = out.k2.max(chain["k2_needed"].as_f64().unwrap_or(f64::NAN));
            out.ratio_max = out.ratio_max.max(row.ratio);
            out.steps_ok &= chain["step1_ok"] == true && chain["step3_ok"] == true;
            out.spike_count += 1;
            out.rows.push(chain);
        }
    }
    Ok(out)
}

pub fn run_estimate_ww(s: &Settings) -> Result<Report> {
    let seq = s.retained_sequence()?;
    let out = ww_outcome(s.resolution, &seq, s.seed, s.trials)?;
    let pass = out.steps_ok && out.k.is_finite() && out.k2.is_finite() && out.grid_count > 0;
    Ok(Report {
        experiment: "estimate-ww".into(),
        config: config_echo(s),
        rows: out.rows.clone(),
        constants: json!({
            "k": out.k,
            "k2": out.k2,
            "ratio_max": out.ratio_max,
            "grid_functions": out.grid_count,
            "spike_rows": out.spike_count,
        }),
        pass,
    })
}
