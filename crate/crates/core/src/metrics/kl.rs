use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability masses over the outcomes 0..len.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParams("distribution needs at least one outcome".into()));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParams("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("masses sum to {total}, not 1")));
        }
        Ok(DiscreteDistribution { masses })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::new(vec![1.0 / len as f64; len])
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        let mut m = vec![0.0; len];
        *m.get_mut(at)
            .ok_or_else(|| Error::InvalidParams(format!("outcome {at} out of range")))? = 1.0;
        Self::new(m)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Mass of a set of outcomes.
    pub fn event(&self, outcomes: &[usize]) -> f64 {
        outcomes.iter().map(|&i| self.masses[i]).sum()
    }
}

fn check_support(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<()> {
    if q.len() != p.len() {
        return Err(Error::Shape(format!("supports of size {} and {}", q.len(), p.len())));
    }
    Ok(())
}

/// D(q ‖ p) = Σ q log₂(q/p), with 0·log 0 = 0.
pub fn kl_divergence(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<f64> {
    check_support(q, p)?;
    let mut d = 0.0;
    for (&qx, &px) in q.masses.iter().zip(&p.masses) {
        if qx > 0.0 {
            if px == 0.0 {
                return Err(Error::InfiniteDivergence);
            }
            d += qx * (qx / px).log2();
        }
    }
    Ok(d.max(0.0))
}

/// Σᵢ q(Eᵢ) log₂(q(Eᵢ)/p(Eᵢ)) over the blocks of a partition of the outcomes;
/// never exceeds D(q ‖ p).
pub fn log_sum_lower_bound(
    q: &DiscreteDistribution,
    p: &DiscreteDistribution,
    blocks: &[Vec<usize>],
) -> Result<f64> {
    check_support(q, p)?;
    let mut total = 0.0;
    for block in blocks {
        let (qe, pe) = (q.event(block), p.event(block));
        if qe > 0.0 {
            if pe == 0.0 {
                return Err(Error::InfiniteDivergence);
            }
            total += qe * (qe / pe).log2();
        }
    }
    Ok(total)
}

/// max(2·dkl / (1 − log₂ P(E)), e·√(2·P(E))): an upper bound on Q(E) given
/// dkl = D(Q ‖ P) in bits. P(E) = 0 gives 0 when dkl is finite.
pub fn kl_event_bound(dkl: f64, p_event: f64) -> f64 {
    let first = if p_event > 0.0 {
        2.0 * dkl / (1.0 - p_event.log2())
    } else if dkl.is_finite() {
        0.0
    } else {
        f64::INFINITY
    };
    let second = std::f64::consts::E * (2.0 * p_event.max(0.0)).sqrt();
    first.max(second)
}
