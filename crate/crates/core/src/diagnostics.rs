//! Running empirical probabilities, Hölder exponent estimates and
//! η-variation statistics of an embedding.

use crate::embedding::{Counts, Embedding};
use crate::error::{domain, Result};

/// Per-round empirical statistics, indexed by round (index 0 is round 0).
///
/// `None` marks an undefined ratio (no denominator yet), never zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalStats {
    /// Fraction of up moves among `x_1..x_n`.
    pub p1: Vec<Option<f64>>,
    /// Fraction of up moves following an up move.
    pub p11: Vec<Option<f64>>,
    /// Fraction of down moves following a down move.
    pub p00: Vec<Option<f64>>,
    /// Hölder exponent implied by `p11`.
    pub h1: Vec<Option<f64>>,
    /// Hölder exponent implied by `p00`.
    pub h0: Vec<Option<f64>>,
}

impl EmpiricalStats {
    pub fn rounds(&self) -> usize {
        self.p1.len().saturating_sub(1)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// One pass over the directions.
///
/// The conditional frequencies use pair counts: `p11 = q11 / (q11 + q10)`,
/// the denominator being the number of up moves that have a successor
/// within the prefix.
pub fn empirical_probs(embedding: &Embedding) -> EmpiricalStats {
    let n = embedding.n_star();
    let mut stats = EmpiricalStats {
        p1: Vec::with_capacity(n + 1),
        p11: Vec::with_capacity(n + 1),
        p00: Vec::with_capacity(n + 1),
        h1: Vec::with_capacity(n + 1),
        h0: Vec::with_capacity(n + 1),
    };
    let mut counts = Counts::default();
    let record = |c: &Counts, s: &mut EmpiricalStats| {
        let p11 = ratio(c.q11, c.after_up());
        let p00 = ratio(c.q00, c.after_down());
        s.p1.push(ratio(c.heads, c.rounds()));
        s.p11.push(p11);
        s.p00.push(p00);
        s.h1.push(p11.and_then(|p| holder_from_prob(p).ok()));
        s.h0.push(p00.and_then(|p| holder_from_prob(p).ok()));
    };
    record(&counts, &mut stats);
    for &x in &embedding.directions {
        counts.push(x);
        record(&counts, &mut stats);
    }
    stats
}

/// Hölder exponent `H` solving `1 / (2^{1/H} - 1) = p`.
pub fn holder_from_prob(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("continuation probability must lie in (0, 1], got {p}")));
    }
    Ok(std::f64::consts::LN_2 / (1.0 / p).ln_1p())
}

/// Inverse of [`holder_from_prob`]: `1 / (2^{1/H} - 1)`.
pub fn prob_from_holder(hurst: f64) -> Result<f64> {
    if !(hurst > 0.0 && hurst <= 1.0) {
        return Err(domain(format!("Hölder exponent must lie in (0, 1], got {hurst}")));
    }
    Ok(1.0 / (std::f64::consts::LN_2 / hurst).exp_m1())
}

/// Total η-variation, net log change at the last hit, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    pub tv: f64,
    pub l: f64,
    pub zeta: f64,
    pub n_star: usize,
}

pub fn path_stats(embedding: &Embedding) -> Result<PathStats> {
    let n = embedding.n_star();
    if n == 0 {
        return Err(domain("path statistics are undefined without any grid hit"));
    }
    let c = Counts::from_directions(&embedding.directions);
    let eta = embedding.grid.eta;
    let net = c.heads as f64 - c.tails as f64;
    Ok(PathStats { tv: n as f64 * eta, l: eta * net, zeta: net / n as f64, n_star: n })
}
