//! Closed-form probability bounds on `P(d_H(X, S) > eps)` for contiguous and
//! duty-cycled ("on-off") observation, the `delta1` feasibility threshold and
//! the battery-constrained schedule advisor.
//!
//! With `delta = c omega_d (eps/2)^d / 2` and `t1 = log(beta / delta) / alpha`:
//!
//! - contiguous: `C1 exp(-c omega_d (eps/2)^d p (delta1 - t1) / (2 t1))`,
//!   `C1 = (eps/4)^-d mu(S) / omega_d`
//! - on-off: the contiguous bound times
//!   `exp(-delta (p - 1) (2 - (delta/beta)^(l2 - 1)))`, `l2 = delta2 / t1`.

use serde::{Deserialize, Serialize};

use crate::geometry::unit_ball_volume;
use crate::{Error, Result};

/// Margin by which the advisor keeps `delta1` above the threshold.
pub const ADVISOR_MARGIN: f64 = 1e-9;
const INTEGRALITY_TOL: f64 = 1e-9;

/// Mixing constants of the diffusion and geometry of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityParams {
    /// Exponential mixing rate.
    pub alpha: f64,
    /// Mixing prefactor.
    pub beta: f64,
    /// Infimum of the stationary density over the domain.
    pub c_inf: f64,
    /// Area (volume) of the domain.
    pub mu_s: f64,
    pub d: u32,
}

impl ErgodicityParams {
    pub fn new(alpha: f64, beta: f64, c_inf: f64, mu_s: f64, d: u32) -> Result<Self> {
        let p = ErgodicityParams {
            alpha,
            beta,
            c_inf,
            mu_s,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("c_inf", self.c_inf),
            ("mu_s", self.mu_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        Ok(())
    }

    fn omega(&self) -> f64 {
        unit_ball_volume(self.d)
    }

    /// `c omega_d (eps/2)^d / 2`.
    pub fn delta(&self, eps: f64) -> f64 {
        self.c_inf * self.omega() * (eps / 2.0).powi(self.d as i32) / 2.0
    }

    /// Supremum of admissible `eps`: `2 (2 beta / (c omega_d))^(1/d)`.
    pub fn max_epsilon(&self) -> f64 {
        2.0 * (2.0 * self.beta / (self.c_inf * self.omega())).powf(1.0 / self.d as f64)
    }

    fn check_epsilon(&self, eps: f64) -> Result<()> {
        self.validate()?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {eps}")));
        }
        let max_epsilon = self.max_epsilon();
        if eps >= max_epsilon {
            return Err(Error::EpsilonTooLarge {
                epsilon: eps,
                max_epsilon,
            });
        }
        Ok(())
    }

    /// `log(beta / delta) / alpha`.
    fn t1(&self, eps: f64) -> f64 {
        (self.beta / self.delta(eps)).ln() / self.alpha
    }
}

/// Threshold `(1/alpha) log(2 beta / (c omega_d (eps/2)^d))` that `delta1`
/// must exceed, for admissible `eps`.
pub fn min_delta1(eps: f64, params: &ErgodicityParams) -> Result<f64> {
    params.check_epsilon(eps)?;
    Ok(params.t1(eps))
}

/// The same expression without the admissibility check on `eps`. It is
/// non-positive exactly when `eps >= max_epsilon`.
pub fn delta1_threshold(eps: f64, params: &ErgodicityParams) -> Result<f64> {
    params.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("epsilon", format!("must be positive, got {eps}")));
    }
    Ok(params.t1(eps))
}

/// A bound as computed and clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub raw: f64,
    pub value: f64,
}

impl Bound {
    fn new(raw: f64) -> Self {
        Bound {
            raw,
            value: raw.min(1.0),
        }
    }
}

fn check_schedule(p: u64, delta1: f64, delta2: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("p", "need at least one window"));
    }
    if !(delta1.is_finite() && delta1 > 0.0) {
        return Err(Error::invalid("delta1", format!("must be positive, got {delta1}")));
    }
    if !(delta2.is_finite() && delta2 >= 0.0) {
        return Err(Error::invalid("delta2", format!("must be non-negative, got {delta2}")));
    }
    Ok(())
}

fn c1(eps: f64, params: &ErgodicityParams) -> f64 {
    (eps / 4.0).powi(-(params.d as i32)) * params.mu_s / params.omega()
}

/// Bound for `p` ON windows of length `delta1` observed back to back.
/// `delta1 == t1` is accepted (the exponent vanishes); smaller values are not.
pub fn bound_contiguous(eps: f64, p: u64, delta1: f64, params: &ErgodicityParams) -> Result<Bound> {
    params.check_epsilon(eps)?;
    check_schedule(p, delta1, 0.0)?;
    let t1 = params.t1(eps);
    if delta1 < t1 {
        return Err(Error::InfeasibleDelta1 {
            delta1,
            min_delta1: t1,
        });
    }
    Ok(Bound::new(contiguous_raw(eps, p, delta1, t1, params)))
}

fn contiguous_raw(eps: f64, p: u64, delta1: f64, t1: f64, params: &ErgodicityParams) -> f64 {
    let delta = params.delta(eps);
    c1(eps, params) * (-2.0 * delta * p as f64 * (delta1 - t1) / (2.0 * t1)).exp()
}

fn onoff_factor(eps: f64, p: u64, delta2: f64, t1: f64, params: &ErgodicityParams) -> f64 {
    let delta = params.delta(eps);
    let l2 = delta2 / t1;
    (-delta * (p as f64 - 1.0) * (2.0 - (delta / params.beta).powf(l2 - 1.0))).exp()
}

/// Bound for `p` ON windows of length `delta1` separated by OFF gaps of
/// length `delta2`.
pub fn bound_onoff(eps: f64, p: u64, delta1: f64, delta2: f64, params: &ErgodicityParams) -> Result<Bound> {
    check_schedule(p, delta1, delta2)?;
    let contiguous = bound_contiguous(eps, p, delta1, params)?;
    let t1 = params.t1(eps);
    Ok(Bound::new(contiguous.raw * onoff_factor(eps, p, delta2, t1, params)))
}

/// Every intermediate quantity of the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub p: u64,
    pub delta1: f64,
    pub delta2: Option<f64>,
    pub delta: f64,
    pub t1: f64,
    pub l1: f64,
    pub l2: Option<f64>,
    #[serde(rename = "C1")]
    pub c1: f64,
    /// Effective exponent per unit of `p delta1` in the contiguous bound.
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Effective exponent per window of the on-off factor.
    #[serde(rename = "C3")]
    pub c3: Option<f64>,
    pub bound_contiguous_raw: Option<f64>,
    pub bound_contiguous: Option<f64>,
    pub bound_onoff_raw: Option<f64>,
    pub bound_onoff: Option<f64>,
    /// `delta1 > t1`.
    pub feasible: bool,
    pub l1_integral: bool,
    pub l2_integral: Option<bool>,
}

/// Full report. Infeasible `delta1` is reported (with `feasible = false`
/// and no bound values) rather than rejected; an inadmissible `eps` is an
/// error.
pub fn bound_report(
    eps: f64,
    p: u64,
    delta1: f64,
    delta2: Option<f64>,
    params: &ErgodicityParams,
) -> Result<BoundReport> {
    params.check_epsilon(eps)?;
    check_schedule(p, delta1, delta2.unwrap_or(0.0))?;
    let delta = params.delta(eps);
    let t1 = params.t1(eps);
    let l1 = delta1 / t1;
    let l2 = delta2.map(|d2| d2 / t1);
    let c2 = delta * (delta1 - t1) / (t1 * delta1);
    let c3 = l2.map(|l2| delta * (p as f64 - 1.0) * (2.0 - (delta / params.beta).powf(l2 - 1.0)) / p as f64);
    let contiguous = (delta1 >= t1).then(|| Bound::new(contiguous_raw(eps, p, delta1, t1, params)));
    let onoff = match (contiguous, delta2) {
        (Some(b), Some(d2)) => Some(Bound::new(b.raw * onoff_factor(eps, p, d2, t1, params))),
        _ => None,
    };
    let integral = |x: f64| (x - x.round()).abs() < INTEGRALITY_TOL;
    Ok(BoundReport {
        epsilon: eps,
        p,
        delta1,
        delta2,
        delta,
        t1,
        l1,
        l2,
        c1: c1(eps, params),
        c2,
        c3,
        bound_contiguous_raw: contiguous.map(|b| b.raw),
        bound_contiguous: contiguous.map(|b| b.value),
        bound_onoff_raw: onoff.map(|b| b.raw),
        bound_onoff: onoff.map(|b| b.value),
        feasible: delta1 > t1,
        l1_integral: integral(l1),
        l2_integral: l2.map(integral),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAdvice {
    pub p: u64,
    pub delta1: f64,
    pub min_delta1: f64,
    pub report: BoundReport,
}

/// Splits a total ON time `battery` into the largest number of windows
/// `p <= p_max` whose length `battery / p` still exceeds the threshold.
pub fn advise_schedule(
    battery: f64,
    eps: f64,
    params: &ErgodicityParams,
    p_max: u64,
    delta2: Option<f64>,
) -> Result<ScheduleAdvice> {
    if !(battery.is_finite() && battery > 0.0) {
        return Err(Error::invalid("battery", format!("must be positive, got {battery}")));
    }
    if p_max == 0 {
        return Err(Error::invalid("p_max", "must be at least 1"));
    }
    let m = min_delta1(eps, params)?;
    let threshold = m + ADVISOR_MARGIN;
    let mut p = if threshold <= 0.0 {
        p_max
    } else {
        ((battery / threshold).floor() as u64).min(p_max)
    };
    while p >= 1 && battery / (p as f64) <= threshold {
        p -= 1;
    }
    if p == 0 {
        return Err(Error::BatteryTooShort {
            battery,
            min_delta1: m,
        });
    }
    let delta1 = battery / p as f64;
    Ok(ScheduleAdvice {
        p,
        delta1,
        min_delta1: m,
        report: bound_report(eps, p, delta1, delta2, params)?,
    })
}

/// `(log(T)^2 / T)^(1/d)` for each `T > 1`.
pub fn rate_curve(ts: &[f64], d: u32) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    ts.iter()
        .map(|&t| {
            if !(t.is_finite() && t > 1.0) {
                return Err(Error::invalid("T", format!("must exceed 1, got {t}")));
            }
            Ok((t.ln().powi(2) / t).powf(1.0 / d as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn example() -> ErgodicityParams {
        ErgodicityParams::new(1.0, 1.0, 0.2, 4.0, 2).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn threshold_examples() {
        let p = ErgodicityParams::new(1.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert!(close(delta1_threshold(2.0, &p).unwrap(), -0.451582705289, 1e-9));
        assert!(2.0 > p.max_epsilon() && min_delta1(2.0, &p).is_err());
        let p = ErgodicityParams::new(1.0, 10.0, 0.1, 1.0, 2).unwrap();
        assert!(close(min_delta1(0.5, &p).unwrap(), 6.92617620293842, 1e-9));
        let doubled = ErgodicityParams { beta: 20.0, ..p };
        let diff = min_delta1(0.5, &doubled).unwrap() - min_delta1(0.5, &p).unwrap();
        assert!((diff - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn epsilon_constraint_names_the_maximum() {
        let p = example();
        let max = p.max_epsilon();
        match min_delta1(max * 1.01, &p) {
            Err(Error::EpsilonTooLarge { max_epsilon, .. }) => assert_eq!(max_epsilon, max),
            other => panic!("{other:?}"),
        }
        assert!(min_delta1(max * 0.99, &p).is_ok());
    }

    #[test]
    fn contiguous_example() {
        let p = example();
        let r = bound_report(1.0, 10, 20.0, None, &p).unwrap();
        assert!(close(r.delta, 0.0785398163397448, 1e-9));
        assert!(close(r.t1, 2.54414956826454, 1e-9));
        assert!(close(r.c1, 20.3718327157626, 1e-9));
        assert!(close(r.bound_contiguous_raw.unwrap(), 0.0930517482146861, 1e-9));
        let direct = r.c1 * (-r.c2 * 10.0 * 20.0).exp();
        assert!(close(direct, r.bound_contiguous_raw.unwrap(), 1e-12));
    }

    #[test]
    fn onoff_example() {
        let p = example();
        let r = bound_report(1.0, 10, 20.0, Some(10.0), &p).unwrap();
        assert!(close(r.l2.unwrap(), 3.93058652083155, 1e-9));
        let factor = r.bound_onoff_raw.unwrap() / r.bound_contiguous_raw.unwrap();
        assert!(close(factor, 0.243336968458817, 1e-9));
        assert!(close(r.bound_onoff_raw.unwrap(), 0.0226429303203548, 1e-9));
        assert!(close(factor, (-r.c3.unwrap() * 10.0).exp(), 1e-12));
        assert!(!r.l2_integral.unwrap());
    }

    #[test]
    fn threshold_delta1_gives_c1() {
        let p = example();
        let t1 = min_delta1(1.0, &p).unwrap();
        let b = bound_contiguous(1.0, 7, t1, &p).unwrap();
        assert_eq!(b.raw, c1(1.0, &p));
        assert_eq!(b.value, 1.0);
        assert!(!bound_report(1.0, 7, t1, None, &p).unwrap().feasible);
        assert!(matches!(
            bound_contiguous(1.0, 7, t1 * 0.9, &p),
            Err(Error::InfeasibleDelta1 { .. })
        ));
        let r = bound_report(1.0, 7, t1 * 0.9, Some(1.0), &p).unwrap();
        assert!(!r.feasible && r.bound_onoff.is_none());
    }

    #[test]
    fn one_window_without_gaps_matches_contiguous() {
        let p = example();
        let a = bound_onoff(1.0, 1, 20.0, 0.0, &p).unwrap();
        let b = bound_contiguous(1.0, 1, 20.0, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_gaps_approach_limit_factor() {
        let p = example();
        let delta = p.delta(1.0);
        let c = bound_contiguous(1.0, 10, 20.0, &p).unwrap().raw;
        let o = bound_onoff(1.0, 10, 20.0, 1e4, &p).unwrap().raw;
        assert!(close(o / c, (-2.0 * delta * 9.0).exp(), 1e-12));
    }

    #[test]
    fn advisor_examples() {
        let p = ErgodicityParams::new(1.0, 10.0, 0.1, 1.0, 2).unwrap();
        let a = advise_schedule(40.0, 0.5, &p, 100, None).unwrap();
        assert_eq!((a.p, a.delta1), (5, 8.0));
        assert!(matches!(
            advise_schedule(6.0, 0.5, &p, 100, None),
            Err(Error::BatteryTooShort { .. })
        ));
        // eps just below its maximum leaves a negligible threshold
        let free = ErgodicityParams::new(1.0, 1.0, 1.0, 1.0, 2).unwrap();
        let eps = free.max_epsilon() * (1.0 - 1e-6);
        let a = advise_schedule(40.0, eps, &free, 16, Some(3.0)).unwrap();
        assert_eq!((a.p, a.delta1), (16, 2.5));
        assert!(a.report.bound_onoff.is_some());
    }

    #[test]
    fn rate_curve_examples() {
        let e2 = 2f64.exp();
        let v = rate_curve(&[e2, 1e5], 2).unwrap();
        assert!(close(v[0], 0.735758882342885, 1e-12));
        assert!(close(v[1], 0.0364070670010590, 1e-12));
        assert!(rate_curve(&[1.0], 2).is_err());
        let ts: Vec<f64> = (0..50).map(|k| e2 * 1.3f64.powi(k)).collect();
        let v = rate_curve(&ts, 2).unwrap();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    fn arb_params() -> impl Strategy<Value = ErgodicityParams> {
        (0.2f64..3.0, 1.0f64..10.0, 0.05f64..1.0, 1.0f64..10.0)
            .prop_map(|(alpha, beta, c, mu)| ErgodicityParams::new(alpha, beta, c, mu, 2).unwrap())
    }

    proptest! {
        #[test]
        fn onoff_never_exceeds_contiguous(
            params in arb_params(),
            eps_frac in 0.05f64..0.95,
            extra in 0.01f64..20.0,
            p in 1u64..200,
            l2 in 1.0f64..10.0,
        ) {
            let eps = eps_frac * params.max_epsilon();
            let t1 = min_delta1(eps, &params).unwrap();
            prop_assume!(params.delta(eps) < params.beta && t1 > 0.0);
            let delta1 = t1 + extra;
            let on = bound_onoff(eps, p, delta1, l2 * t1, &params).unwrap();
            let co = bound_contiguous(eps, p, delta1, &params).unwrap();
            prop_assert!(on.raw <= co.raw);
            prop_assert!(on.raw.is_finite() && on.raw >= 0.0);
        }

        #[test]
        fn bounds_decrease_in_p_and_delta1(
            params in arb_params(),
            eps_frac in 0.05f64..0.95,
            extra in 0.01f64..20.0,
            p in 1u64..200,
            l2 in 1.0f64..10.0,
        ) {
            let eps = eps_frac * params.max_epsilon();
            let t1 = min_delta1(eps, &params).unwrap();
            let delta1 = t1 + extra;
            let delta2 = l2 * t1;
            let b = |p: u64, d1: f64| {
                (bound_contiguous(eps, p, d1, &params).unwrap().raw,
                 bound_onoff(eps, p, d1, delta2, &params).unwrap().raw)
            };
            let base = b(p, delta1);
            // strict comparisons need values clear of underflow
            prop_assume!(base.1 > 1e-280);
            let more_p = b(p + 1, delta1);
            let longer = b(p, delta1 + 1.0);
            prop_assert!(more_p.0 < base.0 && longer.0 < base.0);
            prop_assert!(more_p.1 < base.1 && longer.1 < base.1);
            let ratio = more_p.0 / base.0;
            let step = (-params.delta(eps) * (delta1 - t1) / t1).exp();
            prop_assert!((ratio - step).abs() <= 1e-9 * step);
        }

        #[test]
        fn threshold_monotonicity(params in arb_params(), eps_frac in 0.05f64..0.9) {
            let eps = eps_frac * params.max_epsilon();
            let m = min_delta1(eps, &params).unwrap();
            let richer = ErgodicityParams { c_inf: params.c_inf * 1.1, ..params };
            let slower = ErgodicityParams { beta: params.beta * 1.1, ..params };
            prop_assert!(min_delta1(eps, &richer).unwrap() < m);
            prop_assert!(min_delta1(eps * 1.05, &params).unwrap() < m);
            prop_assert!(min_delta1(eps, &slower).unwrap() > m);
        }
    }
}
