use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::{Graph, Partition, SbmParams};
use crate::scalar::{dot, Scalar};
use crate::sdp::Embedding;

/// Upper bound on the Grothendieck constant.
pub const GROTHENDIECK_BOUND: f64 = 1.783;

/// Inputs shared by the closed-form bound evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub params: SbmParams,
    pub epsilon: f64,
    /// Tail parameter of the distance bound, s ≥ 1.
    #[serde(default = "one")]
    pub s: f64,
    /// Tail parameter of the high-confidence form, in [1/d, 1/2] with d = a + b(k−1).
    #[serde(default = "half")]
    pub eta: f64,
    /// Treat the η range as the open interval (1/d, 1/2).
    #[serde(default)]
    pub eta_open: bool,
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// δ₀ for the boosted guarantee; the floor k·e^{−(a−b)²/(100a)} when absent.
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default = "default_kg")]
    pub kg: f64,
    /// Unspecified absolute constant of the high-confidence form.
    #[serde(default = "one")]
    pub c_eta: f64,
    /// Unspecified absolute constant c in the boosted regime condition ≤ c/k.
    #[serde(default = "one")]
    pub c_boost: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_c0() -> f64 {
    11.0
}
fn default_kg() -> f64 {
    GROTHENDIECK_BOUND
}

impl BoundInputs {
    pub fn new(params: SbmParams, epsilon: f64) -> Self {
        BoundInputs {
            params,
            epsilon,
            s: 1.0,
            eta: 0.5,
            eta_open: false,
            c0: default_c0(),
            delta0: None,
            kg: default_kg(),
            c_eta: 1.0,
            c_boost: 1.0,
        }
    }

    /// a + b(k−1)
    pub fn degree(&self) -> f64 {
        self.params.expected_degree()
    }

    /// 6·K_G + 4
    pub fn c9(&self) -> f64 {
        6.0 * self.kg + 4.0
    }

    fn gap(&self) -> f64 {
        self.params.a - self.params.b
    }

    fn distance_regime(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.gap() <= 0.0 {
            v.push("a <= b".to_string());
        }
        if self.s < 1.0 {
            v.push(format!("s = {} < 1", self.s));
        }
        if self.degree() <= self.c0 {
            v.push(format!("a + b(k-1) = {} <= C0 = {}", self.degree(), self.c0));
        }
        v
    }

    fn eta_regime(&self) -> Option<String> {
        let lo = 1.0 / self.degree();
        let ok = if self.eta_open {
            self.eta > lo && self.eta < 0.5
        } else {
            self.eta >= lo && self.eta <= 0.5
        };
        (!ok).then(|| format!("eta = {} outside the range from {lo} to 1/2", self.eta))
    }

    pub fn delta0_floor(&self) -> f64 {
        let (a, b) = (self.params.a, self.params.b);
        if a <= 0.0 {
            return self.params.k as f64;
        }
        self.params.k as f64 * (-(a - b).powi(2) / (100.0 * a)).exp()
    }
}

fn distance_bound(b: &BoundInputs, s: f64) -> f64 {
    let d = b.degree();
    b.c9() * d.sqrt() * s / b.gap() + d * b.epsilon / b.gap()
}

/// α ≤ c₉·√d·s/(a−b) + d·ε/(a−b), with c₉ = 6K_G + 4.
pub fn alpha_bound(b: &BoundInputs) -> Result<f64> {
    let v = b.distance_regime();
    if !v.is_empty() {
        return Err(Error::InvalidParams(v.join("; ")));
    }
    Ok(distance_bound(b, b.s))
}

/// 2·exp(−9s²N / (4 + 8s/√d))
pub fn alpha_failure_probability(b: &BoundInputs) -> f64 {
    2.0 * tail_exponent(b, b.s).exp()
}

fn tail_exponent(b: &BoundInputs, s: f64) -> f64 {
    let n_total = b.params.vertex_count() as f64;
    -9.0 * s * s * n_total / (4.0 + 8.0 * s / b.degree().sqrt())
}

/// α ≤ d(ε + c·√η)/(a−b)
pub fn alpha_bound_high_confidence(b: &BoundInputs) -> Result<f64> {
    let mut v = b.distance_regime();
    v.extend(b.eta_regime());
    if !v.is_empty() {
        return Err(Error::InvalidParams(v.join("; ")));
    }
    Ok(b.degree() * (b.epsilon + b.c_eta * b.eta.sqrt()) / b.gap())
}

/// 2·e^{−ηm}
pub fn alpha_high_confidence_failure_probability(b: &BoundInputs) -> f64 {
    2.0 * (-b.eta * b.params.expected_edges()).exp()
}

/// Failure probability for graphs drawn λm-close in KL divergence to the
/// block model: max(2λ/η, 2e^{1 − ηm/2}).
pub fn kl_model_failure_bound(lambda: f64, eta: f64, m: f64) -> f64 {
    (2.0 * lambda / eta).max(2.0 * (1.0 - eta * m / 2.0).exp())
}

/// All δ-level bounds for one parameter point. Values that need a > b are
/// `None` otherwise; regime violations are listed but do not suppress values.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaBounds {
    pub recovery_delta: Option<f64>,
    pub recovery_delta_high_confidence: Option<f64>,
    /// 144·α-bound at s = 2.
    pub recovery_delta_composed: Option<f64>,
    /// 144·(high-confidence α-bound).
    pub recovery_delta_high_confidence_composed: Option<f64>,
    pub recovery_failure_probability: f64,
    pub recovery_high_confidence_failure_probability: f64,
    pub alpha_bound: Option<f64>,
    pub alpha_failure_probability: f64,
    pub alpha_bound_high_confidence: Option<f64>,
    pub boosted_delta0_floor: f64,
    pub boosted_delta0: f64,
    pub boosted_delta: Option<f64>,
    /// 4δ₀ + 80εm/((a−b)kn)
    pub boosted_delta_composed: Option<f64>,
    pub boosted_failure_probability: f64,
    /// δ₀ ≥ 1 makes the boosted guarantee empty.
    pub boosted_vacuous: bool,
    pub boost_condition_lhs: Option<f64>,
    pub boost_condition_rhs: f64,
    pub boost_condition_holds: bool,
    pub planted_cut_bound: f64,
    pub planted_cut_exceed_probability: f64,
    pub regime_violations: Vec<String>,
}

pub fn delta_bounds(b: &BoundInputs) -> DeltaBounds {
    let p = &b.params;
    let d = b.degree();
    let gap = b.gap();
    let positive = gap > 0.0;
    let (k, n) = (p.k as f64, p.n as f64);
    let n_total = p.vertex_count() as f64;
    let m = p.expected_edges();
    let mut violations = b.distance_regime();
    violations.extend(b.eta_regime());

    let floor = b.delta0_floor();
    let delta0 = match b.delta0 {
        Some(x) if x < floor => {
            violations.push(format!("delta0 = {x} below the floor {floor}"));
            x
        }
        Some(x) => x,
        None => floor,
    };
    let corruption = b.epsilon * m / (gap * k * n);
    let boost_lhs = d.sqrt() / gap + b.epsilon * d / gap;
    let boost_rhs = b.c_boost / k;
    let boost_holds = positive && boost_lhs <= boost_rhs && d >= 2.0 * b.c0;
    let cor11 = positive.then(|| d * (b.epsilon + b.c_eta * b.eta.sqrt()) / gap);

    DeltaBounds {
        recovery_delta: positive.then(|| d.sqrt() / gap + b.epsilon * d / gap),
        recovery_delta_high_confidence: positive.then(|| (b.epsilon + b.eta.sqrt()) * d / gap),
        recovery_delta_composed: positive.then(|| 144.0 * distance_bound(b, 2.0)),
        recovery_delta_high_confidence_composed: cor11.map(|x| 144.0 * x),
        recovery_failure_probability: 2.0 * (-2.0 * n_total).exp(),
        recovery_high_confidence_failure_probability: alpha_high_confidence_failure_probability(b),
        alpha_bound: positive.then(|| distance_bound(b, b.s)),
        alpha_failure_probability: alpha_failure_probability(b),
        alpha_bound_high_confidence: cor11,
        boosted_delta0_floor: floor,
        boosted_delta0: delta0,
        boosted_delta: positive.then_some(delta0 + corruption),
        boosted_delta_composed: positive.then_some(4.0 * delta0 + 80.0 * corruption),
        boosted_failure_probability: 3.0 * (-delta0 * k * n / 6.0).exp(),
        boosted_vacuous: delta0 >= 1.0,
        boost_condition_lhs: positive.then_some(boost_lhs),
        boost_condition_rhs: boost_rhs,
        boost_condition_holds: boost_holds,
        planted_cut_bound: p.b * (k - 1.0) * n_total / 2.0 + 2.0 * d.sqrt() * n_total * b.s,
        planted_cut_exceed_probability: tail_exponent(b, b.s).exp(),
        regime_violations: violations,
    }
}

/// Left side |Σ_{u<v} Δa_uv ‖u − v‖²| of the Grothendieck deviation bound
/// and its right side 6·K_G·√d·N·s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub residual: f64,
    pub rhs: f64,
    pub s: f64,
    pub violated: bool,
}

pub fn grothendieck_residual<T: Scalar>(
    g: &Graph,
    planted: &Partition,
    params: &SbmParams,
    e: &Embedding<T>,
    s: f64,
    kg: f64,
) -> Result<ResidualReport> {
    let n_total = e.vertex_count();
    if g.vertex_count() != n_total || planted.vertex_count() != n_total {
        return Err(Error::Shape("graph, partition and embedding sizes differ".into()));
    }
    // Σ_{u<v} ‖u − v‖² over a vertex set = |S|·Σ‖u‖² − ‖Σu‖²
    let pair_sum = |members: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut sum = vec![0.0f64; e.dim()];
        let mut sq = 0.0;
        let mut count = 0usize;
        for u in members {
            let row: Vec<f64> = e.row(u).iter().map(|x| x.to_f64_lossy()).collect();
            sq += dot(&row, &row);
            for (a, b) in sum.iter_mut().zip(&row) {
                *a += *b;
            }
            count += 1;
        }
        count as f64 * sq - dot(&sum, &sum)
    };
    let total = pair_sum(&mut (0..n_total));
    let within: f64 = planted
        .clusters()
        .into_iter()
        .map(|c| pair_sum(&mut c.into_iter()))
        .sum();
    let between = total - within;
    let observed: f64 = g
        .pairs()
        .map(|(u, v, m)| m as f64 * e.dist_sq(u, v).to_f64_lossy())
        .sum();
    let expected = params.p_in() * within + params.p_out() * between;
    let residual = (observed - expected).abs();
    let d = params.expected_degree();
    let rhs = 6.0 * kg * d.sqrt() * n_total as f64 * s;
    Ok(ResidualReport {
        residual,
        rhs,
        s,
        violated: residual > rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(n: usize, k: usize, a: f64, b: f64, eps: f64) -> BoundInputs {
        BoundInputs::new(SbmParams::new(n, k, a, b).unwrap(), eps)
    }

    #[test]
    fn alpha_bound_example() {
        let b = inputs(250, 2, 30.0, 5.0, 0.0);
        let v = alpha_bound(&b).unwrap();
        let expected = (6.0 * 1.783 + 4.0) * 35f64.sqrt() / 25.0;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 3.478).abs() < 5e-4);
    }

    #[test]
    fn alpha_bound_scales_inversely_with_gap() {
        // a + b = 40 fixed
        let x = alpha_bound(&inputs(100, 2, 30.0, 10.0, 0.0)).unwrap();
        let y = alpha_bound(&inputs(100, 2, 35.0, 5.0, 0.0)).unwrap();
        assert!((x * 20.0 - y * 30.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_bound_regime_errors() {
        assert!(alpha_bound(&inputs(100, 2, 5.0, 5.0, 0.0)).is_err());
        assert!(alpha_bound(&inputs(100, 2, 8.0, 2.0, 0.0)).is_err());
        let mut b = inputs(100, 2, 30.0, 5.0, 0.0);
        b.s = 0.5;
        assert!(alpha_bound(&b).is_err());
    }

    #[test]
    fn failure_probability_formula() {
        let mut b = inputs(100, 2, 10.0, 2.0, 0.0);
        b.s = 2.0;
        let expected = 2.0 * (-9.0 * 4.0 * 200.0 / (4.0 + 16.0 / 12f64.sqrt())).exp();
        assert_eq!(alpha_failure_probability(&b), expected);
    }

    #[test]
    fn recovery_delta_without_outliers() {
        let r = delta_bounds(&inputs(250, 2, 30.0, 5.0, 0.0));
        assert!((r.recovery_delta.unwrap() - 35f64.sqrt() / 25.0).abs() < 1e-15);
    }

    #[test]
    fn delta0_floor_example() {
        let r = delta_bounds(&inputs(200, 2, 40.0, 4.0, 0.0));
        let expected = 2.0 * (-0.324f64).exp();
        assert!((r.boosted_delta0_floor - expected).abs() < 1e-12);
        assert!((r.boosted_delta0_floor - 1.446).abs() < 1e-3);
        assert!(r.boosted_vacuous);
    }

    #[test]
    fn planted_cut_bound_example() {
        let r = delta_bounds(&inputs(100, 2, 10.0, 2.0, 0.0));
        let expected = 2.0 * 1.0 * 200.0 / 2.0 + 2.0 * 12f64.sqrt() * 200.0;
        assert!((r.planted_cut_bound - expected).abs() < 1e-9);
        assert!((r.planted_cut_bound - 1585.64).abs() < 0.01);
    }

    #[test]
    fn high_confidence_eta_range() {
        let mut b = inputs(100, 2, 30.0, 5.0, 0.1);
        b.eta = 0.25;
        let v = alpha_bound_high_confidence(&b).unwrap();
        assert!((v - 35.0 * (0.1 + 0.5) / 25.0).abs() < 1e-12);
        b.eta = 0.01;
        assert!(alpha_bound_high_confidence(&b).is_err());
        b.eta = 0.5;
        assert!(alpha_bound_high_confidence(&b).is_ok());
        b.eta_open = true;
        assert!(alpha_bound_high_confidence(&b).is_err());
    }

    #[test]
    fn json_keys() {
        let r = delta_bounds(&inputs(100, 2, 30.0, 5.0, 0.0));
        let v = serde_json::to_value(&r).unwrap();
        for key in ["recovery_delta", "alpha_bound", "planted_cut_bound"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn empty_graph_residual_is_zero() {
        let params = SbmParams::new(3, 2, 0.0, 0.0).unwrap();
        let p = Partition::planted(3, 2);
        let e: Embedding<f64> = Embedding::planted(&p);
        let r = grothendieck_residual(&Graph::empty(6), &p, &params, &e, 1.0, GROTHENDIECK_BOUND).unwrap();
        assert_eq!(r.residual, 0.0);
    }
}
