//! Phase-plane geometry checks: enumeration counts, order axioms, downset
//! convexity, crown structure, the configured sequence's bitile
//! collection, and the calibrated tile-sum identity.

use anyhow::Result;
use lacuna_core::{
    crown, downset, enumerate_bitiles, feff_leq, is_convex, lacunary_bitiles, partial_sum_below,
    tile_sum_partial, Bitile, Tree,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use crate::config::Settings;
use crate::generators;
use crate::report::Report;

use super::config_echo;

pub fn run_tiles(s: &Settings) -> Result<Report> {
    let n = s.resolution;
    let mut rng = generators::rng(s.seed);
    let seq = s.retained_sequence()?;
    let ambient = enumerate_bitiles(n, 1u64 << n)?;
    let members: Vec<Bitile> = ambient.iter().copied().collect();
    let mut rows = Vec::new();

    // Levels 0..n each hold 2^{n-1} bitiles.
    let expected = n as u64 * (1u64 << (n - 1));
    rows.push(json!({
        "check": "enumeration_count",
        "value": ambient.len() as u64,
        "expected": expected,
        "pass": ambient.len() as u64 == expected,
    }));

    let mut order_violations = 0u64;
    for _ in 0..2000 {
        let a = *members.choose(&mut rng).unwrap();
        let b = *members.choose(&mut rng).unwrap();
        let c = *members.choose(&mut rng).unwrap();
        if !feff_leq(&a, &a) {
            order_violations += 1;
        }
        if feff_leq(&a, &b) && feff_leq(&b, &a) && a != b {
            order_violations += 1;
        }
        if feff_leq(&a, &b) && feff_leq(&b, &c) && !feff_leq(&a, &c) {
            order_violations += 1;
        }
    }
    rows.push(json!({
        "check": "order_axioms",
        "value": order_violations,
        "expected": 0,
        "pass": order_violations == 0,
    }));

    let mut downsets_convex = true;
    let mut crowns_ok = true;
    for _ in 0..30 {
        let top = *members.choose(&mut rng).unwrap();
        let tree_set = downset(&ambient, &top);
        downsets_convex &= is_convex(&tree_set, n)?;
        let tree = Tree::new(top, tree_set)?;
        let intervals = crown(&tree);
        for (i, a) in intervals.iter().enumerate() {
            for b in intervals.iter().skip(i + 1) {
                crowns_ok &= !a.intersects(b);
            }
        }
        for m in tree.members() {
            let upper = m.upper_tile().freq;
            crowns_ok &= intervals.iter().any(|i| i.contains(&upper));
        }
    }
    rows.push(json!({
        "check": "downset_convexity",
        "value": downsets_convex,
        "expected": true,
        "pass": downsets_convex,
    }));
    rows.push(json!({
        "check": "crown_disjoint_and_covering",
        "value": crowns_ok,
        "expected": true,
        "pass": crowns_ok,
    }));

    // The configured collection: size recorded; convexity is informational
    // because sparse sequences legitimately leave order gaps.
    let lac = lacunary_bitiles(n, &seq)?;
    rows.push(json!({
        "check": "sequence_collection",
        "value": lac.len() as u64,
        "convex": is_convex(&lac, n)?,
        "pass": !lac.is_empty(),
    }));

    // Tile-sum identity against the exclusive partial sum, every cutoff
    // when the grid is small.
    let mut calib_err = 0.0f64;
    let cutoffs: Vec<u64> = if n <= 8 {
        (1..=1u64 << n).collect()
    } else {
        (0..128).map(|_| rng.gen_range(1..=1u64 << n)).collect()
    };
    for (_, f) in generators::mixed_family(n, s.trials.max(1), s.seed ^ 0x7411) {
        for &cut in &cutoffs {
            let tile = tile_sum_partial(&f, cut)?;
            let direct = partial_sum_below(&f, cut)?;
            calib_err = calib_err.max(tile.sub(&direct)?.linf_norm());
        }
    }
    rows.push(json!({
        "check": "tile_sum_identity",
        "value": calib_err,
        "tolerance": 1e-10,
        "pass": calib_err <= 1e-10,
    }));

    let pass = rows.iter().all(|r| r["pass"] == true);
    Ok(Report {
        experiment: "tiles".into(),
        config: config_echo(s),
        rows,
        constants: json!({ "calibration_error": calib_err }),
        pass,
    })
}
