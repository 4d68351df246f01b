//! Transform self-checks: orthonormality, the group law, round trips,
//! full reconstruction, and the coefficient energy identity.

use anyhow::Result;
use lacuna_core::{
    partial_sum, signal_from_coefficients, walsh_coefficients, walsh_function, Complex64,
    GridSignal,
};
use rand::Rng;
use serde_json::json;

use crate::config::Settings;
use crate::generators;
use crate::report::Report;

use super::config_echo;

fn random_complex(n: u32, rng: &mut rand_chacha::ChaCha8Rng) -> GridSignal {
    let vals: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridSignal::from_values(vals).expect("power-of-two length")
}

pub fn run_walsh(s: &Settings) -> Result<Report> {
    let n = s.resolution;
    let mut rng = generators::rng(s.seed);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;

    // Orthonormality: exhaustive below 2^8 characters, sampled pairs above.
    let characters: Vec<GridSignal> = if n <= 8 {
        (0..1u64 << n).map(|m| walsh_function(m, n).unwrap()).collect()
    } else {
        Vec::new()
    };
    let mut ortho_err = 0.0f64;
    if n <= 8 {
        for (a, wa) in characters.iter().enumerate() {
            for (b, wb) in characters.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                ortho_err = ortho_err.max((wa.inner(wb)?.re - want).abs());
            }
        }
    } else {
        for _ in 0..4096 {
            let a = rng.gen_range(0..1u64 << n);
            let b = rng.gen_range(0..1u64 << n);
            let wa = walsh_function(a, n)?;
            let wb = walsh_function(b, n)?;
            let want = if a == b { 1.0 } else { 0.0 };
            ortho_err = ortho_err.max((wa.inner(&wb)?.re - want).abs());
        }
    }
    push_check(&mut rows, &mut worst, "orthonormality", ortho_err, 1e-12);

    // Group law W_a W_b = W_{a xor b}; products of signs, so the error is 0.
    let mut group_err = 0.0f64;
    let pairs: Vec<(u64, u64)> = if n <= 5 {
        (0..1u64 << n)
            .flat_map(|a| (0..1u64 << n).map(move |b| (a, b)))
            .collect()
    } else {
        (0..2048)
            .map(|_| (rng.gen_range(0..1u64 << n), rng.gen_range(0..1u64 << n)))
            .collect()
    };
    for (a, b) in pairs {
        let wa = walsh_function(a, n)?;
        let wb = walsh_function(b, n)?;
        let wab = walsh_function(a ^ b, n)?;
        for ((x, y), z) in wa.values().iter().zip(wb.values()).zip(wab.values()) {
            group_err = group_err.max((x.re * y.re - z.re).abs());
        }
    }
    push_check(&mut rows, &mut worst, "group_law", group_err, 0.0);

    // Round trip, reconstruction by the last partial sum, and energy.
    let trials = s.trials.max(1);
    let mut round_err = 0.0f64;
    let mut recon_err = 0.0f64;
    let mut energy_err = 0.0f64;
    for _ in 0..trials {
        let f = random_complex(n, &mut rng);
        let coeffs = walsh_coefficients(&f);
        let back = signal_from_coefficients(&coeffs)?;
        round_err = round_err.max(back.sub(&f)?.linf_norm());
        let full = partial_sum(&f, (1u64 << n) - 1)?;
        recon_err = recon_err.max(full.sub(&f)?.linf_norm());
        let energy: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        energy_err = energy_err.max((energy - f.l2_norm().powi(2)).abs());
    }
    push_check(&mut rows, &mut worst, "round_trip", round_err, 1e-12);
    push_check(&mut rows, &mut worst, "reconstruction", recon_err, 1e-12);
    push_check(&mut rows, &mut worst, "energy_identity", energy_err, 1e-12);

    let pass = rows.iter().all(|r| r["pass"] == true);
    Ok(Report {
        experiment: "walsh".into(),
        config: config_echo(s),
        rows,
        constants: json!({ "max_error": worst }),
        pass,
    })
}

fn push_check(
    rows: &mut Vec<serde_json::Value>,
    worst: &mut f64,
    check: &str,
    err: f64,
    tol: f64,
) {
    *worst = worst.max(err);
    rows.push(json!({
        "check": check,
        "max_error": err,
        "tolerance": tol,
        "pass": err <= tol,
    }));
}
