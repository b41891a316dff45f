// SPDX-License-Identifier: Apache-2.0

//! Analytic gain, QBER and key-rate model for the four-party protocol.
//!
//! The five-case decomposition is generic over the number type so the same
//! expressions can be evaluated in `f64` and in exact rationals.

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;
use thiserror::Error;

use crate::analyzer::DetectionTable;
use crate::qubit::WLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeyRateError {
    #[error("binary entropy argument {0} outside [0, 1]")]
    DomainError(f64),
    #[error("gain is zero; QBER undefined")]
    ZeroGain,
    #[error("key rate is not positive at zero distance")]
    NoPositiveRate,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Numbers the closed forms can be evaluated in.
pub trait Real: Num + Clone + FromPrimitive {}

impl<T: Num + Clone + FromPrimitive> Real for T {}

fn k<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("small integer constant")
}

fn pow<T: Real>(x: &T, n: usize) -> T {
    num_traits::pow(x.clone(), n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    /// Participant-to-analyzer distance `l` in km.
    pub arm_length_km: f64,
    pub eta_d: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(KeyRateError::InvalidParams(format!(
                "alpha = {}",
                self.alpha
            )));
        }
        if self.arm_length_km.is_nan() || self.arm_length_km < 0.0 {
            return Err(KeyRateError::InvalidParams(format!(
                "arm length = {}",
                self.arm_length_km
            )));
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return Err(KeyRateError::InvalidParams(format!(
                "eta_d = {}",
                self.eta_d
            )));
        }
        Ok(())
    }

    pub fn at_end_to_end(self, distance_km: f64) -> Self {
        ChannelParams {
            arm_length_km: distance_km / 2.0,
            ..self
        }
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            alpha: 0.2,
            arm_length_km: 0.0,
            eta_d: 0.145,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Dark-count probability per detector slot per trial.
    pub y0: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        if !(self.y0 >= 0.0 && self.y0 < 1.0) {
            return Err(KeyRateError::InvalidParams(format!("y0 = {}", self.y0)));
        }
        Ok(())
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { y0: 6.02e-6 }
    }
}

/// Per-party transmittance in the order a, b, c, d.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmittances<T = f64>(pub [T; 4]);

impl<T: Clone> Transmittances<T> {
    pub fn uniform(eta: T) -> Self {
        Transmittances([eta.clone(), eta.clone(), eta.clone(), eta])
    }
}

/// Identification probabilities of the analyzer: `dp0` for W0 / Wc, `dp1` for W1 / Wd.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerConstants<T = f64> {
    pub dp0: T,
    pub dp1: T,
}

impl AnalyzerConstants<Rational64> {
    pub fn exact_from_table(table: &DetectionTable) -> Self {
        let get = |c: char| {
            let l: WLabel = c.to_string().parse().expect("valid label");
            table
                .success_probability(l)
                .to_rational()
                .expect("table probabilities are rational")
        };
        let (dp0, dpc, dp1, dpd) = (get('0'), get('c'), get('1'), get('d'));
        assert_eq!(dp0, dpc, "W0 and Wc identification probabilities differ");
        assert_eq!(dp1, dpd, "W1 and Wd identification probabilities differ");
        AnalyzerConstants { dp0, dp1 }
    }
}

impl AnalyzerConstants<f64> {
    pub fn from_table(table: &DetectionTable) -> Self {
        let e = AnalyzerConstants::exact_from_table(table);
        let f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
        AnalyzerConstants {
            dp0: f(e.dp0),
            dp1: f(e.dp1),
        }
    }

    /// Constants of the process-wide derived table.
    pub fn derived() -> Self {
        AnalyzerConstants::from_table(crate::analyzer::detection_table())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// Basis reconciliation factor.
    pub q: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        RateParams { q: 1.0 }
    }
}

/// Gain and error-gain contributions indexed by case: index `i` holds the
/// events where `i` photons survive the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseBreakdown<T = f64> {
    pub gain: [T; 5],
    pub error: [T; 5],
}

impl<T: Real> CaseBreakdown<T> {
    pub fn total_gain(&self) -> T {
        self.gain.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn total_error(&self) -> T {
        self.error.iter().cloned().fold(T::zero(), |a, b| a + b)
    }
}

pub fn transmittance(c: &ChannelParams) -> f64 {
    10f64.powf(-c.alpha * c.arm_length_km / 10.0) * c.eta_d
}

pub fn h2(x: f64) -> Result<f64, KeyRateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KeyRateError::DomainError(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Five-case gain and error decomposition with parties a, b announcing.
pub fn case_breakdown<T: Real>(
    t: &Transmittances<T>,
    y0: &T,
    k0: &AnalyzerConstants<T>,
) -> CaseBreakdown<T> {
    let [a, b, c, d] = t.0.clone();
    let one = T::one();
    let (na, nb, nc, nd) = (
        one.clone() - a.clone(),
        one.clone() - b.clone(),
        one.clone() - c.clone(),
        one.clone() - d.clone(),
    );
    let z = pow(&(one - y0.clone()), 12);
    let y = |n: usize| pow(y0, n) * z.clone();

    let none = na.clone() * nb.clone() * nc.clone() * nd.clone();

    let single_ab = a.clone() * nb.clone() * nc.clone() * nd.clone()
        + b.clone() * na.clone() * nc.clone() * nd.clone();
    let single_cd = c.clone() * na.clone() * nb.clone() * nd.clone()
        + d.clone() * na.clone() * nb.clone() * nc.clone();

    let pair_ab = a.clone() * b.clone() * nc.clone() * nd.clone();
    let pair_ac_bd = a.clone() * c.clone() * nb.clone() * nd.clone()
        + b.clone() * d.clone() * na.clone() * nc.clone();
    let pair_ad_bc = a.clone() * d.clone() * nb.clone() * nc.clone()
        + b.clone() * c.clone() * na.clone() * nd.clone();
    let pair_cd = c.clone() * d.clone() * na.clone() * nb.clone();
    let pairs = k::<T>(16) * pair_ab
        + k::<T>(10) * pair_ac_bd
        + k::<T>(9) * pair_ad_bc
        + k::<T>(8) * pair_cd;

    let triple_ab = a.clone() * b.clone() * c.clone() * nd.clone()
        + a.clone() * b.clone() * d.clone() * nc.clone();
    let triple_cd = a.clone() * c.clone() * d.clone() * nb.clone()
        + b.clone() * c.clone() * d.clone() * na.clone();

    let all = a * b * c * d;

    let gain = [
        k::<T>(8) * none.clone() * y(4),
        (k::<T>(52) * single_ab.clone() + k::<T>(38) * single_cd.clone()) / k::<T>(16) * y(3),
        pairs.clone() / k::<T>(16) * y(2),
        (k::<T>(34) * triple_ab.clone() + k::<T>(15) * triple_cd.clone()) / k::<T>(256) * y(1),
        all * (k0.dp0.clone() + k0.dp1.clone()) / k::<T>(16) * y(0),
    ];
    let error = [
        k::<T>(4) * none * y(4),
        (k::<T>(26) * single_ab + k::<T>(19) * single_cd) / k::<T>(16) * y(3),
        pairs / k::<T>(32) * y(2),
        (k::<T>(17) * triple_ab + k::<T>(7) * triple_cd) / k::<T>(256) * y(1),
        T::zero(),
    ];
    CaseBreakdown { gain, error }
}

pub fn q1_general<T: Real>(t: &Transmittances<T>, y0: &T, k0: &AnalyzerConstants<T>) -> T {
    case_breakdown(t, y0, k0).total_gain()
}

/// Joint probability of an accepted event carrying a bit error.
pub fn error_gain_general<T: Real>(t: &Transmittances<T>, y0: &T, k0: &AnalyzerConstants<T>) -> T {
    case_breakdown(t, y0, k0).total_error()
}

/// Gain for four identical channels of transmittance `eta`.
pub fn q1_identical<T: Real>(eta: &T, y0: &T, k0: &AnalyzerConstants<T>) -> T {
    let one = T::one();
    let n = one.clone() - eta.clone();
    let z = pow(&(one - y0.clone()), 12);
    let poly = k::<T>(1024) * pow(&n, 4) * pow(y0, 4)
        + k::<T>(1440) * eta.clone() * pow(&n, 3) * pow(y0, 3)
        + k::<T>(496) * pow(eta, 2) * pow(&n, 2) * pow(y0, 2)
        + k::<T>(49) * pow(eta, 3) * n * y0.clone()
        + k::<T>(8) * (k0.dp0.clone() + k0.dp1.clone()) * pow(eta, 4);
    z * poly / k::<T>(128)
}

/// QBER for four identical channels.
pub fn e1_identical<T: Real>(
    eta: &T,
    y0: &T,
    k0: &AnalyzerConstants<T>,
) -> Result<T, KeyRateError> {
    let q1 = q1_identical(eta, y0, k0);
    if q1.is_zero() {
        return Err(KeyRateError::ZeroGain);
    }
    let one = T::one();
    let n = one.clone() - eta.clone();
    let z = pow(&(one - y0.clone()), 12);
    let poly = k::<T>(64) * pow(&n, 4) * pow(y0, 4)
        + k::<T>(90) * eta.clone() * pow(&n, 3) * pow(y0, 3)
        + k::<T>(31) * pow(eta, 2) * pow(&n, 2) * pow(y0, 2)
        + k::<T>(3) * pow(eta, 3) * n * y0.clone();
    Ok(z * poly / (k::<T>(16) * q1))
}

/// `q · Q1 · (1 − 2 H2(e1))`; may be negative.
pub fn key_rate(q1: f64, e1: f64, p: &RateParams) -> Result<f64, KeyRateError> {
    Ok(p.q * q1 * (1.0 - 2.0 * h2(e1)?))
}

/// `q · Q1 · (1 − max H2(e_x) − max H2(e_z))` over the six party pairs.
pub fn key_rate_general(
    q1: f64,
    qber_x: &[f64; 6],
    qber_z: &[f64; 6],
    p: &RateParams,
) -> Result<f64, KeyRateError> {
    let worst = |qs: &[f64; 6]| -> Result<f64, KeyRateError> {
        qs.iter().try_fold(0.0f64, |m, &e| Ok(m.max(h2(e)?)))
    };
    Ok(p.q * q1 * (1.0 - worst(qber_x)? - worst(qber_z)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub distance_km: f64,
    pub eta: f64,
    pub q1: f64,
    /// `NaN` when the gain underflows to zero.
    pub e1: f64,
    pub r0: f64,
}

/// Model evaluation at end-to-end distance `distance_km` (arm length half of it).
pub fn evaluate(
    template: &ChannelParams,
    noise: &NoiseParams,
    k0: &AnalyzerConstants,
    rate: &RateParams,
    distance_km: f64,
) -> SweepRow {
    let eta = transmittance(&template.at_end_to_end(distance_km));
    let q1 = q1_identical(&eta, &noise.y0, k0);
    let (e1, r0) = match e1_identical(&eta, &noise.y0, k0) {
        Ok(e1) => (e1, key_rate(q1, e1.clamp(0.0, 1.0), rate).expect("clamped")),
        Err(_) => (f64::NAN, 0.0),
    };
    SweepRow {
        distance_km,
        eta,
        q1,
        e1,
        r0,
    }
}

pub fn sweep(
    template: &ChannelParams,
    noise: &NoiseParams,
    k0: &AnalyzerConstants,
    rate: &RateParams,
    distances: &[f64],
) -> Vec<SweepRow> {
    distances
        .par_iter()
        .map(|&d| evaluate(template, noise, k0, rate, d))
        .collect()
}

/// Inclusive grid `dmin, dmin + step, …` up to `dmax`.
pub fn distance_grid(dmin: f64, dmax: f64, step: f64) -> Result<Vec<f64>, KeyRateError> {
    if !(dmin >= 0.0 && dmax >= dmin && step > 0.0) {
        return Err(KeyRateError::InvalidParams(format!(
            "distance range {dmin}..{dmax} step {step}"
        )));
    }
    let n = ((dmax - dmin) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| dmin + i as f64 * step).collect())
}

pub const SWEEP_HEADER: &str = "distance_km,eta,Q1,e1,R0";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            r.distance_km, r.eta, r.q1, r.e1, r.r0
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecureDistance {
    /// Largest end-to-end distance with a positive rate, to within the search tolerance.
    Crossing(f64),
    /// The rate stays positive up to the search limit.
    Unbounded { limit_km: f64 },
}

/// Bisection for the zero crossing of the key rate in end-to-end distance.
pub fn secure_distance(
    template: &ChannelParams,
    noise: &NoiseParams,
    k0: &AnalyzerConstants,
    rate: &RateParams,
    limit_km: f64,
) -> Result<SecureDistance, KeyRateError> {
    const TOL_KM: f64 = 1e-3;
    let r = |d: f64| evaluate(template, noise, k0, rate, d).r0;
    if r(0.0) <= 0.0 {
        return Err(KeyRateError::NoPositiveRate);
    }
    let mut lo = 0.0;
    let mut hi = 1.0f64.min(limit_km);
    while r(hi) > 0.0 {
        if hi >= limit_km {
            return Ok(SecureDistance::Unbounded { limit_km });
        }
        lo = hi;
        hi = (hi * 2.0).min(limit_km);
    }
    while hi - lo > TOL_KM {
        let mid = 0.5 * (lo + hi);
        if r(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SecureDistance::Crossing(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn consts() -> AnalyzerConstants {
        AnalyzerConstants::derived()
    }

    fn paper_defaults(eta_d: f64) -> (ChannelParams, NoiseParams, RateParams) {
        (
            ChannelParams {
                eta_d,
                ..ChannelParams::default()
            },
            NoiseParams::default(),
            RateParams::default(),
        )
    }

    #[test]
    fn constants_come_from_the_table() {
        let e = AnalyzerConstants::exact_from_table(crate::analyzer::detection_table());
        assert_eq!(e.dp0, Rational64::new(3, 64));
        assert_eq!(e.dp1, Rational64::new(1, 64));
    }

    #[test]
    fn transmittance_examples() {
        let c = ChannelParams::default();
        assert_relative_eq!(transmittance(&c), 0.145);
        let c = ChannelParams {
            arm_length_km: 50.0,
            ..c
        };
        assert_relative_eq!(transmittance(&c), 0.0145, max_relative = 1e-14);
        let c = ChannelParams {
            alpha: 0.2,
            arm_length_km: 90.0,
            eta_d: 1.0,
        };
        assert_relative_eq!(transmittance(&c), 10f64.powf(-1.8), max_relative = 1e-14);
        assert!((transmittance(&c) - 0.015849).abs() < 1e-6);
    }

    #[test]
    fn h2_examples() {
        assert_eq!(h2(0.5).unwrap(), 1.0);
        assert_eq!(h2(0.0).unwrap(), 0.0);
        assert_eq!(h2(1.0).unwrap(), 0.0);
        assert!((h2(0.11).unwrap() - 0.499916).abs() < 1e-6);
        assert!(matches!(h2(1.5), Err(KeyRateError::DomainError(_))));
        assert!(h2(-0.1).is_err());
    }

    #[test]
    fn case_breakdown_limits() {
        let k0 = consts();
        let y0: f64 = 1e-3;
        let z = (1.0 - y0).powi(12);
        let cb = case_breakdown(&Transmittances::uniform(0.0), &y0, &k0);
        assert_relative_eq!(cb.gain[0], 8.0 * y0.powi(4) * z);
        assert_relative_eq!(cb.error[0], 4.0 * y0.powi(4) * z);
        assert!(cb.gain[1..].iter().all(|g| *g == 0.0));
        let cb = case_breakdown(&Transmittances::uniform(1.0), &0.0, &k0);
        assert_eq!(cb.gain, [0.0, 0.0, 0.0, 0.0, 1.0 / 256.0]);
        assert_eq!(cb.error, [0.0; 5]);
    }

    #[test]
    fn case_four_reduces_to_49() {
        let k0 = consts();
        for &(eta, y0) in &[(0.3, 1e-4), (0.9, 2e-2), (0.0145, 6.02e-6)] {
            let cb = case_breakdown(&Transmittances::uniform(eta), &y0, &k0);
            let lhs = 256.0 * cb.gain[3] / (y0 * (1.0f64 - y0).powi(12));
            assert_relative_eq!(
                lhs,
                2.0 * 49.0 * eta.powi(3) * (1.0 - eta),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn general_form_edge_cases() {
        let k0 = consts();
        let t = Transmittances([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q1_general(&t, &0.0, &k0), 0.0);
        let q = q1_general(&Transmittances::uniform(0.0145), &6.02e-6, &k0);
        assert!((q - 1.8e-10).abs() < 0.05e-10, "{q}");
    }

    #[test]
    fn identical_form_examples() {
        let k0 = consts();
        assert_relative_eq!(q1_identical(&1.0, &0.0, &k0), 1.0 / 256.0);
        assert_eq!(q1_identical(&0.0, &0.0, &k0), 0.0);
        let q = q1_identical(&0.0145, &6.02e-6, &k0);
        assert!((q - 1.796e-10).abs() < 0.001e-10, "{q}");
        assert_eq!(e1_identical(&0.3, &0.0, &k0).unwrap(), 0.0);
        assert_relative_eq!(
            e1_identical(&0.0, &1e-5, &k0).unwrap(),
            0.5,
            max_relative = 1e-12
        );
        let e = e1_identical(&0.0145, &6.02e-6, &k0).unwrap();
        assert!((e - 0.019).abs() < 0.0005, "{e}");
        assert_eq!(e1_identical(&0.0, &0.0, &k0), Err(KeyRateError::ZeroGain));
    }

    #[test]
    fn key_rate_examples() {
        let p = RateParams { q: 0.8 };
        assert_relative_eq!(key_rate(1e-3, 0.0, &p).unwrap(), 0.8e-3);
        assert_relative_eq!(key_rate(1e-3, 0.5, &p).unwrap(), -0.8e-3);
        let r = key_rate(1.8e-10, 0.019, &RateParams::default()).unwrap();
        assert!((r - 1.3e-10).abs() < 0.05e-10, "{r}");
    }

    #[test]
    fn general_key_rate_uses_worst_pairs() {
        let p = RateParams::default();
        let e = 0.03;
        assert_relative_eq!(
            key_rate_general(2.0, &[e; 6], &[e; 6], &p).unwrap(),
            key_rate(2.0, e, &p).unwrap()
        );
        assert_eq!(
            key_rate_general(2.0, &[0.0; 6], &[0.0; 6], &p).unwrap(),
            2.0
        );
        let mut x = [0.0; 6];
        x[3] = 0.5;
        assert_eq!(key_rate_general(2.0, &x, &[0.0; 6], &p).unwrap(), 0.0);
        assert_eq!(key_rate_general(2.0, &x, &x, &p).unwrap(), -2.0);
        assert!(key_rate_general(2.0, &[1.2; 6], &[0.0; 6], &p).is_err());
    }

    #[test]
    fn sweep_examples() {
        let (c, n, r) = paper_defaults(0.145);
        let k0 = consts();
        let rows = sweep(&c, &n, &k0, &r, &[0.0, 100.0, 300.0]);
        assert!(rows[0].r0 > rows[1].r0);
        assert!((rows[1].r0 - 1.309e-10).abs() < 0.005e-10, "{}", rows[1].r0);
        assert!(rows[2].r0 <= 0.0);
        let csv = sweep_csv(&rows[..1]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        assert_eq!(
            lines.next().unwrap().split(',').next(),
            Some("0.00000000000e0")
        );
    }

    #[test]
    fn grid_is_inclusive() {
        assert_eq!(
            distance_grid(0.0, 10.0, 2.5).unwrap(),
            vec![0.0, 2.5, 5.0, 7.5, 10.0]
        );
        assert!(distance_grid(5.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn secure_distance_examples() {
        let k0 = consts();
        let (c, n, r) = paper_defaults(0.145);
        let SecureDistance::Crossing(d) = secure_distance(&c, &n, &k0, &r, 2000.0).unwrap() else {
            panic!("expected a crossing");
        };
        assert!((d - 184.06).abs() < 0.1, "{d}");
        let (c, n, r) = paper_defaults(0.93);
        let SecureDistance::Crossing(d) = secure_distance(&c, &n, &k0, &r, 2000.0).unwrap() else {
            panic!("expected a crossing");
        };
        assert!((d - 264.77).abs() < 0.1, "{d}");
        let n0 = NoiseParams { y0: 0.0 };
        assert_eq!(
            secure_distance(&c, &n0, &k0, &r, 1000.0).unwrap(),
            SecureDistance::Unbounded { limit_km: 1000.0 }
        );
        let noisy = NoiseParams { y0: 0.2 };
        assert_eq!(
            secure_distance(&c, &noisy, &k0, &r, 1000.0),
            Err(KeyRateError::NoPositiveRate)
        );
    }

    #[test]
    fn exact_reduction_on_rationals() {
        let k0 = AnalyzerConstants::exact_from_table(crate::analyzer::detection_table());
        let k0 = AnalyzerConstants {
            dp0: BigRational::new(BigInt::from(*k0.dp0.numer()), BigInt::from(*k0.dp0.denom())),
            dp1: BigRational::new(BigInt::from(*k0.dp1.numer()), BigInt::from(*k0.dp1.denom())),
        };
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        for (eta, y0) in [
            (r(1, 3), r(1, 1000)),
            (r(29, 2000), r(301, 50_000_000)),
            (r(1, 1), r(0, 1)),
            (r(7, 9), r(3, 7)),
        ] {
            let t = Transmittances::uniform(eta.clone());
            let cb = case_breakdown(&t, &y0, &k0);
            assert_eq!(cb.total_gain(), q1_identical(&eta, &y0, &k0));
            if !num_traits::Zero::is_zero(&cb.total_gain()) {
                assert_eq!(
                    cb.total_error() / cb.total_gain(),
                    e1_identical(&eta, &y0, &k0).unwrap()
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn general_form_reduces_at_equal_eta(eta in 1e-4f64..=1.0, y0 in 1e-8f64..1e-2) {
            let k0 = consts();
            let t = Transmittances::uniform(eta);
            let q_gen = q1_general(&t, &y0, &k0);
            let q_id = q1_identical(&eta, &y0, &k0);
            prop_assert!(((q_gen - q_id) / q_id).abs() <= 1e-12);
            let e_gen = error_gain_general(&t, &y0, &k0) / q_gen;
            let e_id = e1_identical(&eta, &y0, &k0).unwrap();
            prop_assert!(((e_gen - e_id) / e_id).abs() <= 1e-12);
        }

        #[test]
        fn per_case_error_is_at_most_half_the_gain(
            ea in 0.0f64..=1.0, eb in 0.0f64..=1.0, ec in 0.0f64..=1.0, ed in 0.0f64..=1.0,
            y0 in 0.0f64..0.5,
        ) {
            let cb = case_breakdown(&Transmittances([ea, eb, ec, ed]), &y0, &consts());
            for i in 0..5 {
                prop_assert!(cb.error[i] <= cb.gain[i] / 2.0 * (1.0 + 1e-15));
            }
            prop_assert_eq!(cb.error[4], 0.0);
            let q = cb.total_gain();
            prop_assert!((0.0..=1.0).contains(&q));
        }

        #[test]
        fn qber_is_bounded(eta in 0.0f64..=1.0, y0 in 1e-9f64..0.5) {
            let e = e1_identical(&eta, &y0, &consts()).unwrap();
            prop_assert!((0.0..=0.5 + 1e-12).contains(&e));
        }
    }

    #[test]
    fn gain_decreases_and_qber_grows_with_distance() {
        let (c, n, r) = paper_defaults(0.145);
        let grid = distance_grid(0.0, 400.0, 1.0).unwrap();
        let rows = sweep(&c, &n, &consts(), &r, &grid);
        for w in rows.windows(2) {
            assert!(w[1].q1 < w[0].q1);
            assert!(w[1].e1 >= w[0].e1);
        }
    }
}
