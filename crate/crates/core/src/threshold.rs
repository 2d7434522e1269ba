//! Level-1 threshold bound from malignant-set counts.
//!
//! The effective failure bound of an exRec with `L` locations is
//! `E(ε) = Σ_k α_k ε^k + tail(ε)`, summed over the analyzed orders. The
//! threshold `ε₀` is the largest `ε` in `(0, cap]` with `E(ε) ≤ ε`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::malignancy::{Estimate, MalignancyReport};

/// Upper end of the search interval.
pub const EPSILON_CAP: f64 = 0.1;
/// Relative width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-6;
/// Relative step used for the upper side of the certificate.
pub const CERTIFICATE_STEP: f64 = 1e-5;

/// Bound used for fault orders above the highest analyzed one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Orders above `k_max` are dropped.
    None,
    /// `C(L, k_max+1) ε^(k_max+1)`.
    Coefficient,
    /// `C(L, k_max+1) ε^(k_max+1) / (1 − Lε)`, with `ε ≤ 1/(2L)`.
    #[default]
    Binomial,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::None => "none",
            Tail::Coefficient => "coefficient",
            Tail::Binomial => "binomial",
        })
    }
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Tail::None),
            "coefficient" => Ok(Tail::Coefficient),
            "binomial" => Ok(Tail::Binomial),
            _ => Err(Error::Parse(format!(
                "unknown tail '{s}' (none, coefficient, binomial)"
            ))),
        }
    }
}

/// `C(n, k)` in floating point.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E(ε)` for explicit coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPolynomial {
    pub locations: usize,
    /// `(k, α_k)` for every analyzed order.
    pub terms: Vec<(usize, f64)>,
    pub k_max: usize,
    pub tail: Tail,
    /// `C(L, k_max+1)`; zero when `k_max ≥ L`.
    pub tail_coefficient: f64,
}

impl BoundPolynomial {
    pub fn new(locations: usize, terms: Vec<(usize, f64)>, tail: Tail) -> Self {
        let k_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let tail_coefficient = match tail {
            Tail::None => 0.0,
            _ => binomial_f64(locations, k_max + 1),
        };
        Self {
            locations,
            terms,
            k_max,
            tail,
            tail_coefficient,
        }
    }

    /// Largest admissible `ε`.
    pub fn cap(&self) -> f64 {
        if self.tail == Tail::Binomial && self.tail_coefficient > 0.0 {
            EPSILON_CAP.min(0.5 / self.locations as f64)
        } else {
            EPSILON_CAP
        }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        let main: f64 = self
            .terms
            .iter()
            .map(|&(k, a)| a * eps.powi(k as i32))
            .sum();
        let lead = self.tail_coefficient * eps.powi(self.k_max as i32 + 1);
        main + match self.tail {
            Tail::None => 0.0,
            Tail::Coefficient => lead,
            Tail::Binomial => {
                if lead == 0.0 {
                    0.0
                } else {
                    lead / (1.0 - self.locations as f64 * eps)
                }
            }
        }
    }

    /// `E(ε)/ε − 1`, non-decreasing in `ε` on `(0, cap]`.
    fn excess(&self, eps: f64) -> f64 {
        self.eval(eps) / eps - 1.0
    }

    /// Solves for `ε₀` by bisection.
    pub fn solve(&self) -> Result<(f64, Certificate)> {
        let cap = self.cap();
        let linear: f64 = self.terms.iter().filter(|t| t.0 <= 1).map(|t| t.1).sum();
        if linear >= 1.0 || self.terms.iter().any(|t| t.0 == 0 && t.1 > 0.0) {
            return Err(Error::Precondition(format!(
                "no threshold: first-order coefficient {linear} is at least 1"
            )));
        }
        if self.excess(cap) <= 0.0 {
            return Ok((cap, self.certificate(cap, true)));
        }
        let mut hi = cap;
        let mut lo = cap;
        while self.excess(lo) > 0.0 {
            hi = lo;
            lo /= 2.0;
            if lo < f64::MIN_POSITIVE {
                return Err(Error::Precondition(
                    "no threshold above the smallest positive ε".into(),
                ));
            }
        }
        while hi - lo > BISECTION_TOL * lo / 4.0 {
            let mid = 0.5 * (lo + hi);
            if self.excess(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, self.certificate(lo, false)))
    }

    fn certificate(&self, eps: f64, capped: bool) -> Certificate {
        let above = eps * (1.0 + CERTIFICATE_STEP);
        Certificate {
            epsilon: eps,
            e_at_epsilon: self.eval(eps),
            epsilon_above: above,
            e_at_epsilon_above: if capped { f64::NAN } else { self.eval(above) },
            cap: self.cap(),
            capped,
        }
    }
}

/// Bracketing evidence emitted with every threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub epsilon: f64,
    pub e_at_epsilon: f64,
    pub epsilon_above: f64,
    /// NaN when the search interval was capped.
    #[serde(with = "nan_as_null")]
    pub e_at_epsilon_above: f64,
    pub cap: f64,
    /// `E(cap) ≤ cap`; the true fixed point lies beyond the search interval.
    pub capped: bool,
}

impl Certificate {
    /// `E(ε₀) ≤ ε₀` and, unless capped, `E(ε₀(1+δ)) > ε₀(1+δ)`.
    pub fn holds(&self) -> bool {
        self.e_at_epsilon <= self.epsilon
            && (self.capped || self.e_at_epsilon_above > self.epsilon_above)
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    Exact,
    MonteCarlo,
}

/// A threshold bound together with all of its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub epsilon_0: f64,
    pub method: ThresholdMethod,
    pub t: usize,
    pub k_max: usize,
    pub polynomial: BoundPolynomial,
    /// `[low, high]` from propagating `f̂ ± σ`; Monte-Carlo only.
    pub one_sigma_interval: Option<[f64; 2]>,
    /// Some order had no malignant samples, so its `α̂` only bounds from above.
    pub one_sided: bool,
    pub certificate: Certificate,
    pub inputs: Vec<MalignancyReport>,
}

impl ThresholdResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Groups reports by order, pooling Monte-Carlo shards, and checks that
/// they describe one exRec with `locations` locations.
fn collect(
    reports: &[MalignancyReport],
    locations: usize,
    t: usize,
) -> Result<BTreeMap<usize, MalignancyReport>> {
    if reports.is_empty() {
        return Err(Error::MissingOrders(vec![t + 1]));
    }
    let hash = &reports[0].circuit_hash;
    let mut by_order: BTreeMap<usize, MalignancyReport> = BTreeMap::new();
    for r in reports {
        if &r.circuit_hash != hash {
            return Err(Error::InvalidParameter(format!(
                "reports mix exRecs ({} and {})",
                reports[0].exrec, r.exrec
            )));
        }
        if r.locations != locations {
            return Err(Error::InvalidParameter(format!(
                "report for order {} has {} locations, expected {locations}",
                r.order, r.locations
            )));
        }
        let merged = match by_order.get(&r.order) {
            Some(prev) => prev.merge(r)?,
            None => r.clone(),
        };
        by_order.insert(r.order, merged);
    }
    let k_max = *by_order.keys().next_back().expect("nonempty");
    let missing: Vec<usize> = (t + 1..=k_max.max(t + 1))
        .filter(|k| !by_order.contains_key(k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingOrders(missing));
    }
    Ok(by_order)
}

fn solve_with(
    by_order: &BTreeMap<usize, MalignancyReport>,
    locations: usize,
    tail: Tail,
    alpha: impl Fn(&MalignancyReport) -> f64,
) -> Result<(BoundPolynomial, f64, Certificate)> {
    let terms = by_order.iter().map(|(&k, r)| (k, alpha(r))).collect();
    let poly = BoundPolynomial::new(locations, terms, tail);
    let (eps, cert) = poly.solve()?;
    Ok((poly, eps, cert))
}

/// Threshold from exact counts (Monte-Carlo reports contribute `α̂`).
pub fn compute_threshold(
    reports: &[MalignancyReport],
    locations: usize,
    t: usize,
) -> Result<ThresholdResult> {
    compute_threshold_with(reports, locations, t, Tail::default())
}

pub fn compute_threshold_with(
    reports: &[MalignancyReport],
    locations: usize,
    t: usize,
    tail: Tail,
) -> Result<ThresholdResult> {
    let by_order = collect(reports, locations, t)?;
    let (polynomial, eps, certificate) = solve_with(&by_order, locations, tail, |r| r.alpha())?;
    let exact = by_order.values().all(|r| r.is_exact());
    Ok(ThresholdResult {
        epsilon_0: eps,
        method: if exact {
            ThresholdMethod::Exact
        } else {
            ThresholdMethod::MonteCarlo
        },
        t,
        k_max: polynomial.k_max,
        polynomial,
        one_sigma_interval: None,
        one_sided: false,
        certificate,
        inputs: by_order.into_values().collect(),
    })
}

/// Threshold estimate with a 1σ interval from Monte-Carlo reports.
pub fn mc_threshold(
    reports: &[MalignancyReport],
    locations: usize,
    t: usize,
) -> Result<ThresholdResult> {
    mc_threshold_with(reports, locations, t, Tail::default())
}

pub fn mc_threshold_with(
    reports: &[MalignancyReport],
    locations: usize,
    t: usize,
    tail: Tail,
) -> Result<ThresholdResult> {
    let mut res = compute_threshold_with(reports, locations, t, tail)?;
    let by_order = collect(reports, locations, t)?;
    let shifted = |sign: f64| {
        solve_with(&by_order, locations, tail, |r| {
            ((r.fraction() + sign * r.sigma()).clamp(0.0, 1.0)) * r.total_sets as f64
        })
        .map(|s| s.1)
    };
    let low = shifted(1.0)?;
    let high = shifted(-1.0)?;
    res.method = ThresholdMethod::MonteCarlo;
    res.one_sigma_interval = Some([low.min(res.epsilon_0), high.max(res.epsilon_0)]);
    res.one_sided = by_order.values().any(|r| {
        matches!(
            r.method,
            Estimate::MonteCarlo {
                upper_bound_only: true,
                ..
            }
        )
    });
    Ok(res)
}
