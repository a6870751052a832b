//! Random evaluation used to detect coefficients that are zero but do not
//! simplify to a zero constant.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Binding;
use crate::algebra::{Blade, Multivector};
use crate::symbolic::ScalarExpr;

pub const PROBE_SAMPLES: usize = 20;
/// A coefficient at or below this magnitude at every sample is dropped.
pub const PROBE_TOL: f64 = 1e-12;

const SEED: u64 = 0x6761_7669_735f_7072;

pub(crate) struct Probe {
    samples: Vec<HashMap<String, f64>>,
}

enum Verdict {
    Nonzero,
    Zero,
    Inconclusive,
}

impl Probe {
    /// Half the samples stay within 1% of the declared values, the rest
    /// spread over ±50%; the offset scale is `|default| + 1`.
    pub(crate) fn new(defaults: &[Binding]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let samples = (0..PROBE_SAMPLES)
            .map(|i| {
                let spread = if i < PROBE_SAMPLES / 2 { 0.01 } else { 0.5 };
                defaults
                    .iter()
                    .map(|b| {
                        let u: f64 = rng.random_range(-1.0..=1.0);
                        (b.name.clone(), b.value + spread * (b.value.abs() + 1.0) * u)
                    })
                    .collect()
            })
            .collect();
        Probe { samples }
    }

    /// Stores the value of a new temporary at every sample where it evaluates.
    pub(crate) fn record(&mut self, name: &str, expr: &ScalarExpr) {
        for sample in &mut self.samples {
            if let Ok(v) = expr.evaluate(sample) {
                if v.is_finite() {
                    sample.insert(name.to_string(), v);
                }
            }
        }
    }

    fn verdict(&self, expr: &ScalarExpr) -> Verdict {
        if let Some(c) = expr.as_const() {
            return if c.abs() > PROBE_TOL {
                Verdict::Nonzero
            } else {
                Verdict::Zero
            };
        }
        let mut failed = false;
        for sample in &self.samples {
            match expr.evaluate(sample) {
                Ok(v) if v.is_finite() => {
                    if v.abs() > PROBE_TOL {
                        return Verdict::Nonzero;
                    }
                }
                _ => failed = true,
            }
        }
        if failed {
            Verdict::Inconclusive
        } else {
            Verdict::Zero
        }
    }

    /// Drops probe-zero blades; blades that could not be decided are kept and
    /// appended to `inconclusive`.
    pub(crate) fn clean(
        &self,
        mv: Multivector<ScalarExpr>,
        inconclusive: &mut Vec<Blade>,
    ) -> Multivector<ScalarExpr> {
        let space = mv.signature();
        let kept: Vec<(Blade, ScalarExpr)> = mv
            .terms()
            .filter(|(blade, c)| match self.verdict(c) {
                Verdict::Nonzero => true,
                Verdict::Zero => false,
                Verdict::Inconclusive => {
                    inconclusive.push(*blade);
                    true
                }
            })
            .map(|(b, c)| (b, c.clone()))
            .collect();
        Multivector::from_terms(space, kept)
    }
}
