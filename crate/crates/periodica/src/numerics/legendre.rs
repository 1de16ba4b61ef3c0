use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rug::Float;

use super::{pow2, NumericsError, PrecisionContext};

/// Nodes in (−1, 1) and positive weights of a Gauss–Legendre rule.
#[derive(Clone, Debug)]
pub struct LegendreRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// P_n(x) and P_n'(x) via the three-term recurrence.
fn legendre_eval(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        // k P_k = (2k−1) x P_{k−1} − (k−1) P_{k−2}
        let mut t = Float::with_val(prec, x * &p1);
        t *= (2 * k - 1) as u32;
        t -= Float::with_val(prec, &p0 * ((k - 1) as u32));
        t /= k as u32;
        p0 = p1;
        p1 = t;
    }
    // (x² − 1) P_n' = n (x P_n − P_{n−1})
    let mut num = Float::with_val(prec, x * &p1);
    num -= &p0;
    num *= n as u32;
    let mut den = Float::with_val(prec, x.square_ref());
    den -= 1u32;
    (p1, num / den)
}

/// Gauss–Legendre rule of the given order at the context precision.
pub fn legendre_rule(order: usize, ctx: &PrecisionContext) -> Result<LegendreRule, NumericsError> {
    if order < 2 {
        return Err(NumericsError::InvalidInput("legendre order must be at least 2".into()));
    }
    let prec = ctx.prec() + 16;
    let stop = pow2(prec, -(ctx.prec() as i64) - 4);
    let n = order;
    let weight = |x: &Float| -> Float {
        let (_, dp) = legendre_eval(n, x);
        let mut w = Float::with_val(prec, 1) - Float::with_val(prec, x.square_ref());
        w *= Float::with_val(prec, dp.square_ref());
        Float::with_val(prec, 2) / w
    };
    let out = ctx.prec();
    let mut pairs: Vec<(Float, Float)> = Vec::with_capacity(n);
    for i in 1..=n / 2 {
        let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(prec, guess);
        let mut done = false;
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, &x);
            let step = Float::with_val(prec, &p / &dp);
            x -= &step;
            if step.abs() < stop {
                done = true;
                break;
            }
        }
        if !done {
            return Err(NumericsError::NonConvergence(format!("legendre node {} of order {}", i, n)));
        }
        let w = weight(&x);
        pairs.push((Float::with_val(out, -&x), Float::with_val(out, &w)));
        pairs.push((Float::with_val(out, &x), Float::with_val(out, &w)));
    }
    if n % 2 == 1 {
        let w = weight(&Float::new(prec));
        pairs.push((Float::new(out), Float::with_val(out, &w)));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(LegendreRule { nodes, weights })
}

/// Rules keyed by (order, precision), computed on first use.
#[derive(Default)]
pub struct LegendreCache {
    rules: Mutex<HashMap<(usize, u32), Arc<LegendreRule>>>,
}

impl LegendreCache {
    pub fn new() -> Self {
        LegendreCache::default()
    }

    pub fn get(&self, order: usize, ctx: &PrecisionContext) -> Result<Arc<LegendreRule>, NumericsError> {
        let key = (order, ctx.prec());
        if let Some(r) = self.rules.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(legendre_rule(order, ctx)?);
        self.rules.lock().unwrap().entry(key).or_insert_with(|| rule.clone());
        Ok(rule)
    }
}
