// SPDX-License-Identifier: Apache-2.0

//! Multi-mode bosonic states built from creation operators on spatio-temporal
//! modes, with exact amplitudes and a symbolic interferometer phase.
//!
//! A [`FockState`] is a finite sum `Σ amp · a†_{m1} a†_{m2} … |0⟩`. Creation
//! operators commute, so a [`Monomial`] is a sorted multiset of [`Mode`]s.
//! Amplitudes are Laurent polynomials in the phase unit `φ = e^{iδ}` with
//! coefficients in `Z[i, 1/√2]`; one delay traversal adds one time bin and one
//! power of `φ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error("amplitude carries several phase powers; a numeric delta is required")]
    MixedPhaseWithoutDelta,
    #[error("mode map has no image for spatial mode {0}")]
    UnmappedMode(Spatial),
    #[error("unknown spatial mode label {0:?}")]
    UnknownSpatial(String),
}

/// Spatial mode labels of the optical networks, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    J,
    K,
    L,
    M,
    S,
    U,
    V,
    W,
}

impl Spatial {
    pub const ALL: [Spatial; 16] = [
        Spatial::A,
        Spatial::B,
        Spatial::C,
        Spatial::D,
        Spatial::E,
        Spatial::F,
        Spatial::G,
        Spatial::H,
        Spatial::J,
        Spatial::K,
        Spatial::L,
        Spatial::M,
        Spatial::S,
        Spatial::U,
        Spatial::V,
        Spatial::W,
    ];

    pub fn letter(self) -> char {
        "abcdefghjklmsuvw".as_bytes()[self as usize] as char
    }

    pub fn from_letter(c: char) -> Option<Spatial> {
        Spatial::ALL.into_iter().find(|s| s.letter() == c)
    }
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Spatial {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                Spatial::from_letter(c).ok_or_else(|| FockError::UnknownSpatial(s.to_string()))
            }
            _ => Err(FockError::UnknownSpatial(s.to_string())),
        }
    }
}

/// A spatial mode at time bin `bin` (time `t0 + bin·τ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub spatial: Spatial,
    pub bin: u32,
}

impl Mode {
    pub fn new(spatial: Spatial, bin: u32) -> Self {
        Mode { spatial, bin }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a\u{2020}[{},t{}]", self.spatial, self.bin)
    }
}

/// Sorted multiset of modes: a product of creation operators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<Mode>);

impl Monomial {
    pub fn new(mut modes: Vec<Mode>) -> Self {
        modes.sort();
        Monomial(modes)
    }

    pub fn vacuum() -> Self {
        Monomial(Vec::new())
    }

    pub fn modes(&self) -> &[Mode] {
        &self.0
    }

    pub fn photon_count(&self) -> usize {
        self.0.len()
    }

    /// `(mode, occupation)` pairs in canonical order.
    pub fn occupations(&self) -> Vec<(Mode, u32)> {
        let mut out: Vec<(Mode, u32)> = Vec::new();
        for &m in &self.0 {
            match out.last_mut() {
                Some((last, n)) if *last == m => *n += 1,
                _ => out.push((m, 1)),
            }
        }
        out
    }

    /// `Π n!` over occupied modes; the squared norm of `Π a†|0⟩`.
    pub fn factorial_weight(&self) -> u64 {
        self.occupations()
            .iter()
            .map(|&(_, n)| (1..=n as u64).product::<u64>())
            .product()
    }

    /// True when some mode holds more than one photon.
    pub fn is_bunched(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == w[1])
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut modes = self.0.clone();
        modes.extend_from_slice(&other.0);
        Monomial::new(modes)
    }

    /// Compact slot notation such as `s0u1v0w2` (multiplicity repeated).
    pub fn compact(&self) -> String {
        self.0
            .iter()
            .map(|m| format!("{}{}", m.spatial, m.bin))
            .collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "|0>");
        }
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Exact amplitude `Σ_k c_k φ^k` with `φ = e^{iδ}`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Amplitude {
    terms: BTreeMap<i32, Scalar>,
}

impl Amplitude {
    pub fn zero() -> Self {
        Amplitude::default()
    }

    pub fn one() -> Self {
        Amplitude::from(Scalar::one())
    }

    /// `c · φ^power`.
    pub fn phased(c: Scalar, power: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(power, c);
        }
        Amplitude { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Scalar)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn phase_powers(&self) -> Vec<i32> {
        self.terms.keys().copied().collect()
    }

    /// The coefficient of `φ^power`.
    pub fn coefficient(&self, power: i32) -> Scalar {
        self.terms.get(&power).copied().unwrap_or_default()
    }

    /// Negates every phase power and conjugates every coefficient.
    pub fn conj(&self) -> Self {
        Amplitude {
            terms: self.terms.iter().map(|(&k, c)| (-k, c.conj())).collect(),
        }
    }

    pub fn scale(&self, c: Scalar) -> Self {
        if c.is_zero() {
            return Amplitude::zero();
        }
        Amplitude {
            terms: self.terms.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }

    pub fn shift_phase(&self, by: i32) -> Self {
        Amplitude {
            terms: self.terms.iter().map(|(&k, &v)| (k + by, v)).collect(),
        }
    }

    /// Numeric value at a given δ.
    pub fn eval(&self, delta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&k, c)| c.to_complex() * Complex64::from_polar(1.0, k as f64 * delta))
            .sum()
    }

    /// `|a|²`: exact when at most one phase power is present, numeric at `delta` otherwise.
    pub fn abs2(&self, delta: Option<f64>) -> Result<Probability, FockError> {
        match self.terms.len() {
            0 => Ok(Probability::Exact(Scalar::zero())),
            1 => {
                let c = self.terms.values().next().unwrap();
                Ok(Probability::Exact(c.abs2()))
            }
            _ => match delta {
                Some(d) => Ok(Probability::Numeric(self.eval(d).norm_sqr())),
                None => Err(FockError::MixedPhaseWithoutDelta),
            },
        }
    }
}

impl From<Scalar> for Amplitude {
    fn from(c: Scalar) -> Self {
        Amplitude::phased(c, 0)
    }
}

impl Add for &Amplitude {
    type Output = Amplitude;

    fn add(self, rhs: &Amplitude) -> Amplitude {
        let mut terms = self.terms.clone();
        for (&k, &c) in &rhs.terms {
            let slot = terms.entry(k).or_insert_with(Scalar::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(&k);
            }
        }
        Amplitude { terms }
    }
}

impl Add for Amplitude {
    type Output = Amplitude;

    fn add(self, rhs: Amplitude) -> Amplitude {
        &self + &rhs
    }
}

impl Mul for &Amplitude {
    type Output = Amplitude;

    fn mul(self, rhs: &Amplitude) -> Amplitude {
        let mut out = Amplitude::zero();
        for (&k1, &c1) in &self.terms {
            for (&k2, &c2) in &rhs.terms {
                out = &out + &Amplitude::phased(c1 * c2, k1 + k2);
            }
        }
        out
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;

    fn mul(self, rhs: Amplitude) -> Amplitude {
        &self * &rhs
    }
}

impl Neg for Amplitude {
    type Output = Amplitude;

    fn neg(self) -> Amplitude {
        self.scale(-Scalar::one())
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("{c} * phi^{k}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A probability: exact when δ-independent, otherwise evaluated at a numeric δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probability {
    Exact(Scalar),
    Numeric(f64),
}

impl Probability {
    pub fn value(&self) -> f64 {
        match self {
            Probability::Exact(s) => s.to_f64(),
            Probability::Numeric(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Scalar> {
        match self {
            Probability::Exact(s) => Some(*s),
            Probability::Numeric(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Probability::Exact(s) => s.is_zero(),
            Probability::Numeric(x) => *x == 0.0,
        }
    }
}

impl Default for Probability {
    fn default() -> Self {
        Probability::Exact(Scalar::zero())
    }
}

impl Add for Probability {
    type Output = Probability;

    fn add(self, rhs: Probability) -> Probability {
        match (self, rhs) {
            (Probability::Exact(a), Probability::Exact(b)) => Probability::Exact(a + b),
            (a, b) => Probability::Numeric(a.value() + b.value()),
        }
    }
}

impl Mul<u64> for Probability {
    type Output = Probability;

    fn mul(self, n: u64) -> Probability {
        match self {
            Probability::Exact(a) => Probability::Exact(a * Scalar::int(n as i64)),
            Probability::Numeric(x) => Probability::Numeric(x * n as f64),
        }
    }
}

impl std::iter::Sum for Probability {
    fn sum<I: Iterator<Item = Probability>>(iter: I) -> Probability {
        iter.fold(Probability::default(), |a, b| a + b)
    }
}

/// Whether all monomials of a state carry the same number of photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonNumber {
    Empty,
    Uniform(usize),
    Mixed,
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct FockState {
    terms: BTreeMap<Monomial, Amplitude>,
}

impl FockState {
    /// The zero vector.
    pub fn zero() -> Self {
        FockState::default()
    }

    pub fn vacuum() -> Self {
        FockState::from_term(Monomial::vacuum(), Amplitude::one())
    }

    /// `a†_{mode}|0⟩`.
    pub fn single(mode: Mode) -> Self {
        FockState::from_term(Monomial::new(vec![mode]), Amplitude::one())
    }

    pub fn from_term(monomial: Monomial, amp: Amplitude) -> Self {
        let mut s = FockState::zero();
        s.accumulate(monomial, amp);
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Amplitude)>) -> Self {
        let mut s = FockState::zero();
        for (m, a) in terms {
            s.accumulate(m, a);
        }
        s
    }

    fn accumulate(&mut self, monomial: Monomial, amp: Amplitude) {
        if amp.is_zero() {
            return;
        }
        match self.terms.get_mut(&monomial) {
            Some(existing) => {
                let sum = &*existing + &amp;
                if sum.is_zero() {
                    self.terms.remove(&monomial);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(monomial, amp);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Amplitude)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, monomial: &Monomial) -> Amplitude {
        self.terms.get(monomial).cloned().unwrap_or_default()
    }

    pub fn photon_number(&self) -> PhotonNumber {
        let mut sizes = self.terms.keys().map(Monomial::photon_count);
        match sizes.next() {
            None => PhotonNumber::Empty,
            Some(n) if sizes.all(|m| m == n) => PhotonNumber::Uniform(n),
            Some(_) => PhotonNumber::Mixed,
        }
    }

    pub fn add(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.accumulate(m.clone(), a.clone());
        }
        out
    }

    pub fn scale(&self, c: &Amplitude) -> FockState {
        FockState::from_terms(self.terms.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    /// Distributive product; monomials merge as multisets.
    pub fn tensor(&self, other: &FockState) -> FockState {
        let mut out = FockState::zero();
        for (m1, a1) in &self.terms {
            for (m2, a2) in &other.terms {
                out.accumulate(m1.product(m2), a1 * a2);
            }
        }
        out
    }

    /// Substitutes every creation operator by its image under `map`.
    pub fn apply(&self, map: &ModeMap) -> Result<FockState, FockError> {
        let mut out = FockState::zero();
        for (monomial, amp) in &self.terms {
            let mut partial: BTreeMap<Monomial, Amplitude> = BTreeMap::new();
            partial.insert(Monomial::vacuum(), amp.clone());
            for &mode in monomial.modes() {
                let image = map.image(mode)?;
                let mut next: BTreeMap<Monomial, Amplitude> = BTreeMap::new();
                for (m, a) in &partial {
                    for (out_mode, coeff) in &image {
                        let key = m.product(&Monomial(vec![*out_mode]));
                        let term = a * coeff;
                        let slot = next.entry(key).or_default();
                        *slot = &*slot + &term;
                    }
                }
                next.retain(|_, a| !a.is_zero());
                partial = next;
            }
            for (m, a) in partial {
                out.accumulate(m, a);
            }
        }
        Ok(out)
    }

    /// `⟨self|other⟩`, with the `Π n!` weight of each monomial.
    pub fn inner(&self, other: &FockState) -> Amplitude {
        let mut acc = Amplitude::zero();
        for (m, a) in &self.terms {
            if let Some(b) = other.terms.get(m) {
                let w = Scalar::int(m.factorial_weight() as i64);
                acc = &acc + &(&a.conj() * b).scale(w);
            }
        }
        acc
    }

    /// `|amp(pattern)|² · Π n!`.
    pub fn pattern_probability(
        &self,
        pattern: &Monomial,
        delta: Option<f64>,
    ) -> Result<Probability, FockError> {
        match self.terms.get(pattern) {
            None => Ok(Probability::default()),
            Some(a) => Ok(a.abs2(delta)? * pattern.factorial_weight()),
        }
    }

    pub fn norm_squared(&self, delta: Option<f64>) -> Result<Probability, FockError> {
        self.terms
            .keys()
            .map(|m| self.pattern_probability(m, delta))
            .sum()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, a) in &self.terms {
            writeln!(f, "{a} * {m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One output term of a mode image: `amp · a†_{spatial, t + offset}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTerm {
    pub spatial: Spatial,
    pub offset: u32,
    pub amp: Amplitude,
}

/// Time-covariant linear substitution of creation operators:
/// `a†_{x,t} ↦ Σ amp · a†_{y, t+offset}` for every input spatial mode `x`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModeMap {
    images: BTreeMap<Spatial, Vec<ImageTerm>>,
}

impl ModeMap {
    pub fn new() -> Self {
        ModeMap::default()
    }

    /// Adds `amp · a†_{out, t+offset}` to the image of `input`.
    pub fn with_term(mut self, input: Spatial, out: Spatial, offset: u32, amp: Amplitude) -> Self {
        self.push_term(input, out, offset, amp);
        self
    }

    fn push_term(&mut self, input: Spatial, out: Spatial, offset: u32, amp: Amplitude) {
        let image = self.images.entry(input).or_default();
        if let Some(t) = image
            .iter_mut()
            .find(|t| t.spatial == out && t.offset == offset)
        {
            t.amp = &t.amp + &amp;
        } else {
            image.push(ImageTerm {
                spatial: out,
                offset,
                amp,
            });
        }
        image.retain(|t| !t.amp.is_zero());
        image.sort_by_key(|t| (t.spatial, t.offset));
    }

    /// Extends the map with `a†_{x,t} ↦ a†_{x,t}` for the given modes not already mapped.
    pub fn with_passthrough(mut self, modes: impl IntoIterator<Item = Spatial>) -> Self {
        for s in modes {
            if !self.images.contains_key(&s) {
                self.push_term(s, s, 0, Amplitude::one());
            }
        }
        self
    }

    pub fn inputs(&self) -> impl Iterator<Item = Spatial> + '_ {
        self.images.keys().copied()
    }

    pub fn outputs(&self) -> Vec<Spatial> {
        let mut v: Vec<Spatial> = self
            .images
            .values()
            .flat_map(|img| img.iter().map(|t| t.spatial))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn terms(&self, input: Spatial) -> Option<&[ImageTerm]> {
        self.images.get(&input).map(Vec::as_slice)
    }

    /// Image of one creation operator as `(output mode, amplitude)` pairs.
    pub fn image(&self, mode: Mode) -> Result<Vec<(Mode, Amplitude)>, FockError> {
        let img = self
            .images
            .get(&mode.spatial)
            .ok_or(FockError::UnmappedMode(mode.spatial))?;
        Ok(img
            .iter()
            .map(|t| (Mode::new(t.spatial, mode.bin + t.offset), t.amp.clone()))
            .collect())
    }

    /// `next ∘ self`: apply `self` first, then `next`. Modes `next` leaves
    /// unmapped pass through unchanged.
    pub fn then(&self, next: &ModeMap) -> ModeMap {
        let mut out = ModeMap::new();
        for (&input, image) in &self.images {
            for t in image {
                match next.images.get(&t.spatial) {
                    Some(second) => {
                        for u in second {
                            out.push_term(input, u.spatial, t.offset + u.offset, &t.amp * &u.amp);
                        }
                    }
                    None => out.push_term(input, t.spatial, t.offset, t.amp.clone()),
                }
            }
        }
        out
    }

    /// Exact isometry check: the images of `a†_{x,t}` and `a†_{y,t'}` are
    /// orthonormal for all inputs `x, y` and all relative time shifts.
    pub fn is_isometry(&self) -> bool {
        let max_offset = self
            .images
            .values()
            .flat_map(|img| img.iter().map(|t| t.offset))
            .max()
            .unwrap_or(0) as i64;
        for (&x, img_x) in &self.images {
            for (&y, img_y) in &self.images {
                for shift in -max_offset..=max_offset {
                    // ⟨image(x, t) | image(y, t + shift)⟩
                    let mut acc = Amplitude::zero();
                    for tx in img_x {
                        for ty in img_y {
                            if tx.spatial == ty.spatial
                                && tx.offset as i64 == ty.offset as i64 + shift
                            {
                                acc = &acc + &(&tx.amp.conj() * &ty.amp);
                            }
                        }
                    }
                    let expected = if x == y && shift == 0 {
                        Amplitude::one()
                    } else {
                        Amplitude::zero()
                    };
                    if acc != expected {
                        return false;
                    }
                }
            }
        }
        true
    }
}
