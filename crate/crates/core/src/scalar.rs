// SPDX-License-Identifier: Apache-2.0

//! Exact complex scalars in the ring `Z[i, 1/√2]`.
//!
//! Every coefficient produced by 50/50 beam splitters, time-bin interferometers
//! and the W/Bell state catalogs lives in this ring. A value is stored as
//!
//! ```text
//!     (x + y·√2) / 2^k        with x, y Gaussian integers, k ≥ 0
//! ```
//!
//! which is closed under addition and multiplication. The representation is
//! kept canonical: `k` is minimal, i.e. when `k > 0` the four integer
//! components are not all even. Zero is stored with `k = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    re: i64,
    im: i64,
    re_sqrt2: i64,
    im_sqrt2: i64,
    exp: u32,
}

fn checked(v: Option<i64>) -> i64 {
    v.expect("exact scalar overflowed i64")
}

fn shl(v: i64, by: u32) -> i64 {
    checked(v.checked_mul(checked(1i64.checked_shl(by).filter(|_| by < 63))))
}

impl Scalar {
    /// Builds `(re + i·im + √2·(re_sqrt2 + i·im_sqrt2)) / 2^exp`.
    pub fn new(re: i64, im: i64, re_sqrt2: i64, im_sqrt2: i64, exp: u32) -> Self {
        let mut s = Scalar {
            re,
            im,
            re_sqrt2,
            im_sqrt2,
            exp,
        };
        s.reduce();
        s
    }

    pub fn int(n: i64) -> Self {
        Scalar::new(n, 0, 0, 0, 0)
    }

    pub fn i() -> Self {
        Scalar::new(0, 1, 0, 0, 0)
    }

    /// `num / 2^log2_den`.
    pub fn dyadic(num: i64, log2_den: u32) -> Self {
        Scalar::new(num, 0, 0, 0, log2_den)
    }

    /// `(p + q·i) · 2^(-h/2)`, the half-power-of-two form.
    pub fn gaussian_half_pow(p: i64, q: i64, h: u32) -> Self {
        if h.is_multiple_of(2) {
            Scalar::new(p, q, 0, 0, h / 2)
        } else {
            // 2^(-h/2) = √2 / 2^((h+1)/2)
            Scalar::new(0, 0, p, q, h.div_ceil(2))
        }
    }

    pub fn sqrt2() -> Self {
        Scalar::new(0, 0, 1, 0, 0)
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar::new(0, 0, 1, 0, 1)
    }

    pub fn half() -> Self {
        Scalar::dyadic(1, 1)
    }

    /// `(1/√2)^n`.
    pub fn inv_sqrt2_pow(n: u32) -> Self {
        let base = Scalar::dyadic(1, n / 2);
        if n % 2 == 1 {
            base * Scalar::inv_sqrt2()
        } else {
            base
        }
    }

    fn reduce(&mut self) {
        if self.re == 0 && self.im == 0 && self.re_sqrt2 == 0 && self.im_sqrt2 == 0 {
            self.exp = 0;
            return;
        }
        while self.exp > 0
            && self.re % 2 == 0
            && self.im % 2 == 0
            && self.re_sqrt2 % 2 == 0
            && self.im_sqrt2 % 2 == 0
        {
            self.re /= 2;
            self.im /= 2;
            self.re_sqrt2 /= 2;
            self.im_sqrt2 /= 2;
            self.exp -= 1;
        }
    }

    fn raised_to(self, exp: u32) -> [i64; 4] {
        let by = exp - self.exp;
        [
            shl(self.re, by),
            shl(self.im, by),
            shl(self.re_sqrt2, by),
            shl(self.im_sqrt2, by),
        ]
    }

    pub fn components(&self) -> (i64, i64, i64, i64, u32) {
        (self.re, self.im, self.re_sqrt2, self.im_sqrt2, self.exp)
    }

    pub fn conj(&self) -> Self {
        Scalar {
            im: -self.im,
            im_sqrt2: -self.im_sqrt2,
            ..*self
        }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0 && self.im_sqrt2 == 0
    }

    /// True when the value is a rational number (no imaginary or √2 part).
    pub fn is_rational(&self) -> bool {
        self.is_real() && self.re_sqrt2 == 0
    }

    /// `|z|²`, exact. Always real; rational whenever `z` has no mixed √2 terms.
    pub fn abs2(&self) -> Self {
        *self * self.conj()
    }

    pub fn to_rational(&self) -> Option<Rational64> {
        if !self.is_rational() {
            return None;
        }
        let den = 1i64.checked_shl(self.exp).filter(|_| self.exp < 63)?;
        Some(Rational64::new(self.re, den))
    }

    pub fn to_complex(&self) -> Complex64 {
        let scale = 0.5f64.powi(self.exp as i32);
        let s2 = std::f64::consts::SQRT_2;
        Complex64::new(
            (self.re as f64 + s2 * self.re_sqrt2 as f64) * scale,
            (self.im as f64 + s2 * self.im_sqrt2 as f64) * scale,
        )
    }

    /// Real part as a float.
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    /// Sign of a real value, computed exactly. Returns `None` for non-real values.
    pub fn real_sign(&self) -> Option<Ordering> {
        if !self.is_real() {
            return None;
        }
        // sign of a + b√2
        let (a, b) = (self.re as i128, self.re_sqrt2 as i128);
        let sa = a.cmp(&0);
        let sb = b.cmp(&0);
        Some(match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            // opposite signs: compare a² with 2b²
            (x, _) => {
                let lhs = a * a;
                let rhs = 2 * b * b;
                if lhs > rhs {
                    x
                } else {
                    x.reverse()
                }
            }
        })
    }

    /// Writes the value as `(p+qi)/2^(h/2)` when it has that form.
    pub fn as_gaussian_half_pow(&self) -> Option<(i64, i64, u32)> {
        if self.re_sqrt2 == 0 && self.im_sqrt2 == 0 {
            return Some((self.re, self.im, 2 * self.exp));
        }
        if self.re == 0 && self.im == 0 {
            // y·√2 / 2^k = y · 2^(-(2k-1)/2)
            return Some(if self.exp == 0 {
                (2 * self.re_sqrt2, 2 * self.im_sqrt2, 1)
            } else {
                (self.re_sqrt2, self.im_sqrt2, 2 * self.exp - 1)
            });
        }
        None
    }
}

fn fmt_gaussian(f: &mut fmt::Formatter<'_>, re: i64, im: i64) -> fmt::Result {
    if im < 0 {
        write!(f, "({re}-{}i)", -(im as i128))
    } else {
        write!(f, "({re}+{im}i)")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_gaussian_half_pow() {
            Some((p, q, h)) => {
                fmt_gaussian(f, p, q)?;
                write!(f, "/2^({h}/2)")
            }
            None => {
                write!(f, "(")?;
                fmt_gaussian(f, self.re, self.im)?;
                write!(f, "+")?;
                fmt_gaussian(f, self.re_sqrt2, self.im_sqrt2)?;
                write!(f, "*sqrt2)/2^{}", self.exp)
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::default()
    }

    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0 && self.re_sqrt2 == 0 && self.im_sqrt2 == 0
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::int(1)
    }
}

impl Add for Scalar {
    type Output = Scalar;

    fn add(self, rhs: Scalar) -> Scalar {
        let exp = self.exp.max(rhs.exp);
        let a = self.raised_to(exp);
        let b = rhs.raised_to(exp);
        Scalar::new(
            checked(a[0].checked_add(b[0])),
            checked(a[1].checked_add(b[1])),
            checked(a[2].checked_add(b[2])),
            checked(a[3].checked_add(b[3])),
            exp,
        )
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar {
            re: -self.re,
            im: -self.im,
            re_sqrt2: -self.re_sqrt2,
            im_sqrt2: -self.im_sqrt2,
            exp: self.exp,
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;

    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

fn gmul(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    let re = checked(
        a.0.checked_mul(b.0)
            .and_then(|x| a.1.checked_mul(b.1).and_then(|y| x.checked_sub(y))),
    );
    let im = checked(
        a.0.checked_mul(b.1)
            .and_then(|x| a.1.checked_mul(b.0).and_then(|y| x.checked_add(y))),
    );
    (re, im)
}

fn gadd(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (checked(a.0.checked_add(b.0)), checked(a.1.checked_add(b.1)))
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, rhs: Scalar) -> Scalar {
        let x1 = (self.re, self.im);
        let y1 = (self.re_sqrt2, self.im_sqrt2);
        let x2 = (rhs.re, rhs.im);
        let y2 = (rhs.re_sqrt2, rhs.im_sqrt2);
        // (x1 + y1√2)(x2 + y2√2) = x1x2 + 2·y1y2 + √2(x1y2 + y1x2)
        let yy = gmul(y1, y2);
        let rational = gadd(
            gmul(x1, x2),
            (checked(yy.0.checked_mul(2)), checked(yy.1.checked_mul(2))),
        );
        let surd = gadd(gmul(x1, y2), gmul(y1, x2));
        Scalar::new(
            rational.0,
            rational.1,
            surd.0,
            surd.1,
            self.exp.checked_add(rhs.exp).expect("exponent overflow"),
        )
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self = *self + rhs;
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        *self = *self - rhs;
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = *self * rhs;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_reduces_common_powers_of_two() {
        let s = Scalar::new(4, 8, 0, -2, 3);
        assert_eq!(s.components(), (2, 4, 0, -1, 2));
        assert_eq!(Scalar::new(0, 0, 0, 0, 9).components(), (0, 0, 0, 0, 0));
        assert_eq!(Scalar::dyadic(2, 1), Scalar::one());
    }

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(Scalar::sqrt2() * Scalar::sqrt2(), Scalar::int(2));
        assert_eq!(Scalar::inv_sqrt2() * Scalar::inv_sqrt2(), Scalar::half());
        assert_eq!(
            Scalar::inv_sqrt2_pow(3) * Scalar::sqrt2(),
            Scalar::dyadic(1, 1)
        );
    }

    #[test]
    fn abs2_of_unit_phase() {
        // (1+i)/√2
        let z = (Scalar::one() + Scalar::i()) * Scalar::inv_sqrt2();
        assert_eq!(z.abs2(), Scalar::one());
        assert_eq!(z.abs2().to_rational(), Some(Rational64::new(1, 1)));
    }

    #[test]
    fn half_power_form_round_trips() {
        for h in 0..9 {
            let z = Scalar::gaussian_half_pow(3, -1, h);
            let (p, q, hh) = z.as_gaussian_half_pow().unwrap();
            assert_eq!(Scalar::gaussian_half_pow(p, q, hh), z);
        }
        assert_eq!(
            format!("{}", Scalar::gaussian_half_pow(-1, 2, 3)),
            "(-1+2i)/2^(3/2)"
        );
        assert_eq!(format!("{}", Scalar::dyadic(64, 11)), "(1+0i)/2^(10/2)");
    }

    #[test]
    fn mixed_values_print_with_explicit_surd() {
        let z = Scalar::one() + Scalar::inv_sqrt2();
        assert!(z.as_gaussian_half_pow().is_none());
        assert_eq!(format!("{z}"), "((2+0i)+(1+0i)*sqrt2)/2^1");
    }

    #[test]
    fn real_sign_handles_surds() {
        let z = Scalar::int(1) - Scalar::sqrt2(); // < 0
        assert_eq!(z.real_sign(), Some(Ordering::Less));
        let w = Scalar::int(3) - Scalar::sqrt2() * Scalar::int(2); // 3 - 2.83 > 0
        assert_eq!(w.real_sign(), Some(Ordering::Greater));
        assert_eq!(Scalar::i().real_sign(), None);
    }

    fn small() -> impl Strategy<Value = Scalar> {
        (-20i64..20, -20i64..20, -20i64..20, -20i64..20, 0u32..6)
            .prop_map(|(a, b, c, d, k)| Scalar::new(a, b, c, d, k))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a - a, Scalar::zero());
        }

        #[test]
        fn conjugation_is_multiplicative(a in small(), b in small()) {
            prop_assert_eq!((a * b).conj(), a.conj() * b.conj());
            let n = a.abs2();
            prop_assert!(n.is_real());
            prop_assert_ne!(n.real_sign(), Some(Ordering::Less));
        }

        #[test]
        fn float_image_is_a_ring_homomorphism(a in small(), b in small()) {
            let lhs = (a * b + a).to_complex();
            let rhs = a.to_complex() * b.to_complex() + a.to_complex();
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
