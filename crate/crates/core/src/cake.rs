//! Layer-cake representation of a nonnegative function: magnitudes paired
//! with masses, both kept in logarithmic form so that doubly- and
//! triply-exponential magnitudes remain workable. Bands of comparable
//! tower height feed the endpoint quasinorm estimate.

use crate::error::{CoreError, Result};
use crate::norms::{log_tower, log_tower_from_log, logaddexp, tower_exp};
use crate::signal::GridSignal;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Log-magnitude `ln t` of a layer. `Plain(l)` stores `ln t` directly;
/// `Exp(v)` stores `ln ln t`, for magnitudes whose plain logarithm would
/// itself be astronomically large. Canonical form keeps `Plain` up to
/// log-magnitude 700 and `Exp` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TowerValue {
    Plain(f64),
    Exp(f64),
}

const PLAIN_LIMIT: f64 = 700.0;

impl TowerValue {
    /// Canonical value with log-magnitude `l`.
    pub fn from_ln(l: f64) -> Self {
        if l <= PLAIN_LIMIT {
            TowerValue::Plain(l)
        } else {
            TowerValue::Exp(l.ln())
        }
    }

    pub fn canonical(self) -> Result<Self> {
        let v = match self {
            TowerValue::Plain(l) => {
                if l > PLAIN_LIMIT {
                    TowerValue::Exp(l.ln())
                } else {
                    self
                }
            }
            TowerValue::Exp(v) => {
                if v <= PLAIN_LIMIT.ln() {
                    TowerValue::Plain(v.exp())
                } else {
                    self
                }
            }
        };
        let finite = match v {
            TowerValue::Plain(l) => l.is_finite(),
            TowerValue::Exp(e) => e.is_finite(),
        };
        if !finite {
            return Err(CoreError::InvalidParameter(
                "layer magnitude must be finite and positive".into(),
            ));
        }
        Ok(v)
    }

    /// Sort key: canonical `Exp` always exceeds canonical `Plain`.
    fn key(&self) -> (u8, f64) {
        match *self {
            TowerValue::Plain(l) => (0, l),
            TowerValue::Exp(v) => (1, v),
        }
    }

    /// `ln` of the log-magnitude; caller guarantees the log-magnitude is
    /// positive (true whenever the magnitude exceeds `e^(e^1)`).
    fn ln_of_ln(&self) -> f64 {
        match *self {
            TowerValue::Plain(l) => l.ln(),
            TowerValue::Exp(v) => v,
        }
    }

    /// Log-magnitude shifted down by a moderate amount: `ln(t) - x`.
    pub fn sub_ln(&self, x: f64) -> TowerValue {
        match *self {
            TowerValue::Plain(l) => TowerValue::Plain(l - x),
            TowerValue::Exp(v) => TowerValue::Exp(v + (-x * (-v).exp()).ln_1p()),
        }
    }

    /// Shifted iterated logarithm `log_tower(b, t)` of the magnitude, for
    /// `b` in {2, 3, 4}.
    pub fn log_depth(&self, b: u32) -> Result<f64> {
        if !(2..=4).contains(&b) {
            return Err(CoreError::InvalidParameter(format!(
                "tower depth {b} unsupported here"
            )));
        }
        match *self {
            TowerValue::Plain(l) => log_tower_from_log(b, l),
            TowerValue::Exp(v) => {
                // ln ln (tower_exp(b) + t), with ln t = e^v.
                let mut acc = if v > PLAIN_LIMIT {
                    v
                } else {
                    logaddexp(tower_exp(b - 1), v.exp()).ln()
                };
                for _ in 2..b {
                    acc = acc.ln();
                }
                Ok(acc)
            }
        }
    }
}

/// One level set: log-magnitude plus `log_mass = ln(t * measure)`. The mass
/// stays moderate even when the magnitude does not, which is why the measure
/// itself is derived rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub logmag: TowerValue,
    pub log_mass: f64,
}

impl Layer {
    pub fn new(logmag: TowerValue, log_mass: f64) -> Layer {
        Layer { logmag, log_mass }
    }

    /// `ln measure`, available only when the plain log-magnitude is stored.
    pub fn log_measure(&self) -> Option<f64> {
        match self.logmag {
            TowerValue::Plain(l) => Some(self.log_mass - l),
            TowerValue::Exp(_) => None,
        }
    }
}

/// Canonical decreasing stack of layers on a probability space: magnitudes
/// strictly decreasing, equal magnitudes merged, plain-layer measures
/// summing to at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCake {
    layers: Vec<Layer>,
}

fn logsumexp(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, logaddexp)
}

impl LayerCake {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let mut canon: Vec<Layer> = layers
            .into_iter()
            .map(|l| -> Result<Layer> {
                if !l.log_mass.is_finite() {
                    return Err(CoreError::InvalidParameter(
                        "layer mass must be finite and positive".into(),
                    ));
                }
                Ok(Layer::new(l.logmag.canonical()?, l.log_mass))
            })
            .collect::<Result<_>>()?;
        canon.sort_by(|a, b| b.logmag.key().partial_cmp(&a.logmag.key()).unwrap());
        let mut merged: Vec<Layer> = Vec::with_capacity(canon.len());
        for l in canon {
            match merged.last_mut() {
                Some(prev) if prev.logmag == l.logmag => {
                    prev.log_mass = logaddexp(prev.log_mass, l.log_mass);
                }
                _ => merged.push(l),
            }
        }
        let total_measure: f64 = merged
            .iter()
            .filter_map(|l| l.log_measure())
            .map(f64::exp)
            .sum();
        if total_measure > 1.0 + 1e-9 {
            return Err(CoreError::InvalidParameter(format!(
                "layer measures sum to {total_measure}, beyond the probability space"
            )));
        }
        Ok(Self { layers: merged })
    }

    /// Level sets of |f| on the grid.
    pub fn from_signal(f: &GridSignal) -> Result<Self> {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for v in f.values() {
            let m = v.norm();
            if m > 0.0 {
                *counts.entry(m.to_bits()).or_insert(0) += 1;
            }
        }
        let ln_measure_unit = f.cell_measure().ln();
        let layers = counts
            .into_iter()
            .map(|(bits, count)| {
                let l = f64::from_bits(bits).ln();
                Layer::new(TowerValue::from_ln(l), l + (count as f64).ln() + ln_measure_unit)
            })
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Total mass `sum_layers t * measure`.
    pub fn l1_mass(&self) -> f64 {
        logsumexp(self.layers.iter().map(|l| l.log_mass)).exp()
    }

    /// Writes `logmag,logmeasure` rows; refuses cakes with magnitudes past
    /// the plain-log range, whose measures have no floating-point form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "logmag,logmeasure")?;
        for l in &self.layers {
            match (l.logmag, l.log_measure()) {
                (TowerValue::Plain(lm), Some(measure)) => {
                    writeln!(w, "{lm:.16e},{measure:.16e}")?;
                }
                _ => {
                    return Err(CoreError::InvalidParameter(
                        "cake has tower-sized magnitudes; no flat CSV form exists".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut layers = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("logmag")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(CoreError::Csv(format!(
                    "line {}: expected logmag,logmeasure",
                    lineno + 1
                )));
            }
            let logmag: f64 = fields[0]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad logmag: {e}", lineno + 1)))?;
            let logmeasure: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad logmeasure: {e}", lineno + 1)))?;
            layers.push(Layer::new(TowerValue::Plain(logmag), logmag + logmeasure));
        }
        Self::new(layers)
    }
}

/// Tower band of a magnitude: 0 when `ln ln t <= e`, otherwise the unique
/// `k >= 1` with `e^(e^k) < ln t <= e^(e^(k+1))`.
pub fn band_index(logmag: &TowerValue) -> u32 {
    if let TowerValue::Plain(l) = logmag {
        if *l <= tower_exp(2) {
            return 0;
        }
    }
    let w = logmag.ln_of_ln();
    if w <= tower_exp(1) {
        return 0;
    }
    // Here ln ln t > e, so ln ln ln t > 1 and the ceiling lands at k + 1 >= 2.
    ((w.ln().ceil()) as u32).saturating_sub(1).max(1)
}

/// Splits a cake into its tower bands, ascending in `k`.
pub fn embedding_decomposition(cake: &LayerCake) -> Result<Vec<(u32, LayerCake)>> {
    let mut bands: BTreeMap<u32, Vec<Layer>> = BTreeMap::new();
    for l in cake.layers() {
        bands.entry(band_index(&l.logmag)).or_default().push(*l);
    }
    bands
        .into_iter()
        .map(|(k, layers)| Ok((k, LayerCake::new(layers)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingBand {
    pub k: u32,
    /// 1 when the band's Young mass carries the bound, 2 when the
    /// geometric tail `e^-k` does.
    pub regime: u8,
    #[serde(rename = "A_k")]
    pub a_k: f64,
    pub term: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasinormReport {
    /// `sum_k log_tower(1, k) * l1(band) * log_tower(2, linf/l1)`.
    pub total: f64,
    /// Smallest single constant making every band obey its regime bound.
    pub constant: f64,
    pub bands: Vec<EmbeddingBand>,
}

/// Banded quasinorm estimate. Each band contributes
/// `log_tower(1, k) * l1 * log_tower(2, linf/l1)`; the report records which
/// regime bound covers it and the constant that regime needs.
pub fn quasinorm_bound(cake: &LayerCake) -> Result<QuasinormReport> {
    let mut bands = Vec::new();
    let mut total = 0.0;
    let mut constant = 0.0f64;
    for (k, band) in embedding_decomposition(cake)? {
        let ln_l1 = logsumexp(band.layers().iter().map(|l| l.log_mass));
        let ratio = band.layers()[0].logmag.sub_ln(ln_l1);
        let ln_log1_k = log_tower(1, k as f64)?.ln();
        let ln_term = ln_log1_k + ln_l1 + ratio.log_depth(2)?.ln();
        let term = ln_term.exp();
        total += term;
        let ln_a = logsumexp(band.layers().iter().map(|l| -> f64 {
            let d2 = l.logmag.log_depth(2).map(f64::ln).unwrap_or(f64::NEG_INFINITY);
            let d4 = l.logmag.log_depth(4).map(f64::ln).unwrap_or(f64::NEG_INFINITY);
            l.log_mass + d2 + d4
        }));
        // Young mass dominates when ln A_k - k - ln log1(k) >= -e^(e^(k+1)),
        // compared in log form to dodge the doubly-exponential threshold.
        let lhs = ln_a - k as f64 - ln_log1_k;
        let regime1 = lhs >= 0.0 || (-lhs).ln() <= ((k + 1) as f64).exp();
        let ln_needed = if regime1 {
            ln_term - ln_a
        } else {
            ln_term - (ln_log1_k - k as f64)
        };
        constant = constant.max(ln_needed.exp());
        bands.push(EmbeddingBand {
            k,
            regime: if regime1 { 1 } else { 2 },
            a_k: ln_a.exp(),
            term,
        });
    }
    Ok(QuasinormReport {
        total,
        constant,
        bands,
    })
}

/// Cake whose Young mass is split as given: each entry gets
/// `log_mass = ln(share) - ln log_tower(2, t) - ln log_tower(4, t)`, so the
/// shares are exactly the per-layer Young masses and must sum to at most one.
pub fn unit_ball_cake(entries: &[(TowerValue, f64)]) -> Result<LayerCake> {
    let total: f64 = entries.iter().map(|(_, s)| s).sum();
    if entries.iter().any(|&(_, s)| s <= 0.0) || total > 1.0 + 1e-9 {
        return Err(CoreError::InvalidParameter(
            "shares must be positive and sum to at most one".into(),
        ));
    }
    let layers = entries
        .iter()
        .map(|&(logmag, share)| -> Result<Layer> {
            let logmag = logmag.canonical()?;
            let log_mass =
                share.ln() - logmag.log_depth(2)?.ln() - logmag.log_depth(4)?.ln();
            Ok(Layer::new(logmag, log_mass))
        })
        .collect::<Result<_>>()?;
    LayerCake::new(layers)
}
