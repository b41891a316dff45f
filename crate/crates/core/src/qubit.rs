// SPDX-License-Identifier: Apache-2.0

//! Exact n-qubit state vectors: the sixteen four-qubit W states, Bell states,
//! Pauli strings, W-basis and X-basis expansions, entanglement swapping, and
//! the time-bin encoding into Fock states.
//!
//! Ket strings are read left to right as qubit 1, 2, …; qubit 1 is the most
//! significant bit of the amplitude index. For the four-party protocol the
//! order is Alice, Bob, Charlie, David.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::fock::{Amplitude, FockState, Mode, Monomial, Spatial};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QubitError {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("spatial label {0} used for more than one qubit")]
    DuplicateSpatialLabel(Spatial),
    #[error("operation needs {expected} qubits, state has {found}")]
    WrongQubitCount { expected: usize, found: usize },
    #[error("invalid W label {0:?}")]
    InvalidLabel(String),
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("invalid ket {0:?}")]
    InvalidKet(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QubitState {
    n: usize,
    amps: Vec<Scalar>,
}

impl QubitState {
    pub fn zero(n: usize) -> Self {
        QubitState {
            n,
            amps: vec![Scalar::zero(); 1 << n],
        }
    }

    /// Computational basis state from a bit string such as `"0110"`.
    pub fn basis(bits: &str) -> Result<Self, QubitError> {
        let idx = parse_bits(bits)?;
        let mut s = QubitState::zero(bits.len());
        s.amps[idx] = Scalar::one();
        Ok(s)
    }

    pub fn from_kets(n: usize, kets: &[(&str, Scalar)]) -> Result<Self, QubitError> {
        let mut s = QubitState::zero(n);
        for (bits, c) in kets {
            if bits.len() != n {
                return Err(QubitError::LengthMismatch {
                    expected: n,
                    found: bits.len(),
                });
            }
            s.amps[parse_bits(bits)?] += *c;
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Scalar] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &str) -> Result<Scalar, QubitError> {
        if bits.len() != self.n {
            return Err(QubitError::LengthMismatch {
                expected: self.n,
                found: bits.len(),
            });
        }
        Ok(self.amps[parse_bits(bits)?])
    }

    /// Bit of qubit `q` (0-based from the left) in basis index `idx`.
    pub fn bit(&self, idx: usize, q: usize) -> u8 {
        ((idx >> (self.n - 1 - q)) & 1) as u8
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> Scalar {
        assert_eq!(self.n, other.n, "inner product of states of different size");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * *b)
            .sum()
    }

    pub fn norm_squared(&self) -> Scalar {
        self.inner(self)
    }

    pub fn add(&self, other: &QubitState) -> QubitState {
        assert_eq!(self.n, other.n);
        QubitState {
            n: self.n,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Scalar) -> QubitState {
        QubitState {
            n: self.n,
            amps: self.amps.iter().map(|a| *a * c).collect(),
        }
    }

    /// `|self⟩ ⊗ |other⟩`, `self` occupying the leading qubits.
    pub fn tensor(&self, other: &QubitState) -> QubitState {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        QubitState {
            n: self.n + other.n,
            amps,
        }
    }

    /// Multiplies by `2^(m/2)` when the norm is exactly `2^-m`, giving a unit vector.
    pub fn normalized(&self) -> Option<QubitState> {
        let norm = self.norm_squared();
        let r = norm.to_rational()?;
        if *r.numer() != 1 || !(*r.denom() as u64).is_power_of_two() {
            return None;
        }
        let m = r.denom().trailing_zeros();
        let mut factor = Scalar::int(1i64 << (m / 2));
        if m % 2 == 1 {
            factor *= Scalar::sqrt2();
        }
        Some(self.scale(factor))
    }

    /// Equality up to a global sign of ±1.
    pub fn equals_up_to_sign(&self, other: &QubitState) -> bool {
        self == other || *self == other.scale(-Scalar::one())
    }
}

fn parse_bits(bits: &str) -> Result<usize, QubitError> {
    let mut idx = 0usize;
    for c in bits.chars() {
        idx = (idx << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(QubitError::InvalidKet(bits.to_string())),
            };
    }
    Ok(idx)
}

fn format_bits(idx: usize, n: usize) -> String {
    (0..n)
        .map(|q| {
            if (idx >> (n - 1 - q)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, a) in self.amps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (sign, mag) = match a.real_sign() {
                Some(std::cmp::Ordering::Less) => ("-", -*a),
                _ => ("+", *a),
            };
            let coeff = match mag.to_rational() {
                Some(r) => r.to_string(),
                None => mag.to_string(),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{coeff}|{}>", format_bits(idx, self.n))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Label `0..=f` of one of the sixteen four-qubit W states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WLabel(u8);

impl WLabel {
    pub fn new(index: u8) -> Option<WLabel> {
        (index < 16).then_some(WLabel(index))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = WLabel> {
        (0..16).map(WLabel)
    }

    pub fn hex(self) -> char {
        char::from_digit(self.0 as u32, 16).unwrap()
    }
}

impl fmt::Display for WLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{}", self.hex())
    }
}

impl FromStr for WLabel {
    type Err = QubitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("W4,")
            .or_else(|| s.strip_prefix('W'))
            .unwrap_or(s);
        let mut chars = body.chars();
        match (chars.next().and_then(|c| c.to_digit(16)), chars.next()) {
            (Some(d), None) => Ok(WLabel(d as u8)),
            _ => Err(QubitError::InvalidLabel(s.to_string())),
        }
    }
}

// Support kets and signs of the catalog, four states per Hamming-weight block.
const W_SUPPORT: [[&str; 4]; 4] = [
    ["0001", "0010", "0100", "1000"],
    ["0000", "1100", "1010", "1001"],
    ["0011", "0101", "0110", "1111"],
    ["0111", "1011", "1101", "1110"],
];
const W_SIGNS: [[i64; 4]; 4] = [[1, 1, 1, 1], [1, -1, -1, 1], [1, -1, 1, -1], [1, 1, -1, -1]];

/// One of the sixteen W states.
pub fn w_state(label: WLabel) -> QubitState {
    let block = label.index() / 4;
    let signs = W_SIGNS[label.index() % 4];
    let kets: Vec<(&str, Scalar)> = W_SUPPORT[block]
        .iter()
        .zip(signs)
        .map(|(k, s)| (*k, Scalar::dyadic(s, 1)))
        .collect();
    QubitState::from_kets(4, &kets).expect("catalog kets are well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        };
        write!(f, "{s}")
    }
}

pub fn bell_state(kind: BellKind) -> QubitState {
    let r = Scalar::inv_sqrt2();
    let kets: [(&str, Scalar); 2] = match kind {
        BellKind::PhiPlus => [("00", r), ("11", r)],
        BellKind::PhiMinus => [("00", r), ("11", -r)],
        BellKind::PsiPlus => [("01", r), ("10", r)],
        BellKind::PsiMinus => [("01", r), ("10", -r)],
    };
    QubitState::from_kets(2, &kets).expect("bell kets are well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A tensor product of single-qubit Paulis with an optional global minus sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub ops: Vec<Pauli>,
    pub negative: bool,
}

impl FromStr for PauliString {
    type Err = QubitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let ops = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(QubitError::InvalidPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ops.is_empty() {
            return Err(QubitError::InvalidPauli(s.to_string()));
        }
        Ok(PauliString { ops, negative })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for p in &self.ops {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

pub fn apply_pauli(s: &QubitState, p: &PauliString) -> Result<QubitState, QubitError> {
    if p.ops.len() != s.n {
        return Err(QubitError::LengthMismatch {
            expected: s.n,
            found: p.ops.len(),
        });
    }
    let mut out = QubitState::zero(s.n);
    for (idx, a) in s.amps.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mut target = idx;
        let mut c = *a;
        for (q, op) in p.ops.iter().enumerate() {
            let shift = s.n - 1 - q;
            let bit = (idx >> shift) & 1;
            match op {
                Pauli::I => {}
                Pauli::X => target ^= 1 << shift,
                Pauli::Z => {
                    if bit == 1 {
                        c = -c;
                    }
                }
                // Y = iXZ: |0⟩ → i|1⟩, |1⟩ → -i|0⟩
                Pauli::Y => {
                    target ^= 1 << shift;
                    c *= if bit == 0 { Scalar::i() } else { -Scalar::i() };
                }
            }
        }
        if p.negative {
            c = -c;
        }
        out.amps[target] += c;
    }
    Ok(out)
}

fn require_four(s: &QubitState) -> Result<(), QubitError> {
    if s.n != 4 {
        return Err(QubitError::WrongQubitCount {
            expected: 4,
            found: s.n,
        });
    }
    Ok(())
}

/// Coefficients `c_i = ⟨W_i|s⟩` so that `s = Σ c_i |W_i⟩`.
pub fn expand_in_w_basis(s: &QubitState) -> Result<[Scalar; 16], QubitError> {
    require_four(s)?;
    let mut out = [Scalar::zero(); 16];
    for l in WLabel::all() {
        out[l.index()] = w_state(l).inner(s);
    }
    Ok(out)
}

/// Recombines W-basis coefficients into a state.
pub fn from_w_basis(coeffs: &[Scalar; 16]) -> QubitState {
    WLabel::all().fold(QubitState::zero(4), |acc, l| {
        acc.add(&w_state(l).scale(coeffs[l.index()]))
    })
}

/// Coefficients on the `|±⟩^n` product basis, keyed by strings such as `"+-++"`.
/// Zero coefficients are omitted.
pub fn x_basis_expansion(s: &QubitState) -> BTreeMap<String, Scalar> {
    let n = s.n;
    let norm = Scalar::inv_sqrt2_pow(n as u32);
    let mut out = BTreeMap::new();
    for signs in 0..(1usize << n) {
        // bit set => '-' on that qubit; ⟨-|1⟩ = -1/√2
        let mut acc = Scalar::zero();
        for (idx, a) in s.amps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let parity = (signs & idx).count_ones() % 2;
            acc += if parity == 1 { -*a } else { *a };
        }
        let c = acc * norm;
        if !c.is_zero() {
            let key: String = (0..n)
                .map(|q| {
                    if (signs >> (n - 1 - q)) & 1 == 1 {
                        '-'
                    } else {
                        '+'
                    }
                })
                .collect();
            out.insert(key, c);
        }
    }
    out
}

/// Product state from an X-basis string such as `"+-"`.
pub fn x_product_state(signs: &str) -> Result<QubitState, QubitError> {
    let mut state = QubitState::from_kets(0, &[("", Scalar::one())])?;
    let r = Scalar::inv_sqrt2();
    for c in signs.chars() {
        let single = match c {
            '+' => QubitState::from_kets(1, &[("0", r), ("1", r)])?,
            '-' => QubitState::from_kets(1, &[("0", r), ("1", -r)])?,
            _ => return Err(QubitError::InvalidKet(signs.to_string())),
        };
        state = state.tensor(&single);
    }
    Ok(state)
}

/// Four `|φ+⟩` pairs, qubits ordered `A B C D A' B' C' D'`.
pub fn swap_resource_state() -> QubitState {
    let pair = bell_state(BellKind::PhiPlus);
    // pairs ordered A A' B B' C C' D D', then permuted
    let pairs = pair.tensor(&pair).tensor(&pair).tensor(&pair);
    let mut out = QubitState::zero(8);
    for (idx, a) in pairs.amps.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mut target = 0usize;
        for party in 0..4 {
            let unprimed = pairs.bit(idx, 2 * party) as usize;
            let primed = pairs.bit(idx, 2 * party + 1) as usize;
            target |= unprimed << (7 - party);
            target |= primed << (3 - party);
        }
        out.amps[target] = *a;
    }
    out
}

/// Projects the primed qubits of [`swap_resource_state`] onto `|W_label⟩`.
/// Returns the normalized residual state of `A B C D` and the projection probability.
pub fn entanglement_swap(label: WLabel) -> (QubitState, Scalar) {
    let psi = swap_resource_state();
    let w = w_state(label);
    let mut residual = QubitState::zero(4);
    for unprimed in 0..16 {
        let mut acc = Scalar::zero();
        for primed in 0..16 {
            acc += w.amps[primed].conj() * psi.amps[(unprimed << 4) | primed];
        }
        residual.amps[unprimed] = acc;
    }
    let prob = residual.norm_squared();
    let normalized = residual
        .normalized()
        .expect("projection probabilities of the catalog are powers of two");
    (normalized, prob)
}

/// Time-bin encoding: qubit `j` in `|b⟩` becomes a photon in `(spatial[j], t_b)`.
pub fn encode_fock(s: &QubitState, spatial: &[Spatial]) -> Result<FockState, QubitError> {
    if spatial.len() != s.n {
        return Err(QubitError::LengthMismatch {
            expected: s.n,
            found: spatial.len(),
        });
    }
    for (i, a) in spatial.iter().enumerate() {
        if spatial[..i].contains(a) {
            return Err(QubitError::DuplicateSpatialLabel(*a));
        }
    }
    Ok(FockState::from_terms(
        s.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(idx, a)| {
                let modes = spatial
                    .iter()
                    .enumerate()
                    .map(|(q, &sp)| Mode::new(sp, s.bit(idx, q) as u32))
                    .collect();
                (Monomial::new(modes), Amplitude::from(*a))
            }),
    ))
}
