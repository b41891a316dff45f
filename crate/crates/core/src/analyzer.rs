// SPDX-License-Identifier: Apache-2.0

//! Time-bin interferometer and beam-splitter networks, click statistics under
//! threshold detection, and derivation of the W-state detection table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{Amplitude, FockError, FockState, Mode, ModeMap, Monomial, Probability, Spatial};
use crate::qubit::{bell_state, encode_fock, w_state, BellKind, WLabel};
use crate::scalar::Scalar;

/// Unbalanced time-bin interferometer from inputs `(in_a, in_b)` to outputs `(out_p, out_q)`.
/// The long arm delays by one bin and contributes one power of the phase unit.
pub fn interferometer_map(in_a: Spatial, in_b: Spatial, out_p: Spatial, out_q: Spatial) -> ModeMap {
    let h = Scalar::half();
    let i = Scalar::i();
    let c = |s: Scalar, k: i32| Amplitude::phased(s, k);
    ModeMap::new()
        .with_term(in_a, out_p, 0, c(-h, 0))
        .with_term(in_a, out_p, 1, c(h, 1))
        .with_term(in_a, out_q, 0, c(i * h, 0))
        .with_term(in_a, out_q, 1, c(i * h, 1))
        .with_term(in_b, out_q, 0, c(h, 0))
        .with_term(in_b, out_q, 1, c(-h, 1))
        .with_term(in_b, out_p, 0, c(i * h, 0))
        .with_term(in_b, out_p, 1, c(i * h, 1))
}

/// Symmetric 50:50 beam splitter.
pub fn splitter_map(in1: Spatial, in2: Spatial, out1: Spatial, out2: Spatial) -> ModeMap {
    let r = Scalar::inv_sqrt2();
    let i = Scalar::i();
    let c = |s: Scalar| Amplitude::from(s);
    ModeMap::new()
        .with_term(in1, out1, 0, c(-i * r))
        .with_term(in1, out2, 0, c(r))
        .with_term(in2, out1, 0, c(r))
        .with_term(in2, out2, 0, c(-i * r))
}

/// Pure delay of one bin on a single spatial mode, relabeled to `out`.
pub fn delay_map(input: Spatial, out: Spatial) -> ModeMap {
    ModeMap::new().with_term(input, out, 1, Amplitude::phased(Scalar::one(), 1))
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub name: String,
    pub map: ModeMap,
}

/// An ordered sequence of mode maps. Modes a stage does not touch pass through.
#[derive(Debug, Clone)]
pub struct OpticalNetwork {
    inputs: Vec<Spatial>,
    outputs: Vec<Spatial>,
    stages: Vec<Stage>,
    composite: ModeMap,
}

impl OpticalNetwork {
    pub fn new(inputs: Vec<Spatial>, outputs: Vec<Spatial>, stages: Vec<Stage>) -> Self {
        let mut composite = ModeMap::new().with_passthrough(inputs.iter().copied());
        for stage in &stages {
            composite = composite.then(&stage.map);
        }
        let reached = composite.outputs();
        assert!(
            reached.iter().all(|s| outputs.contains(s)),
            "network leaks into undeclared modes {reached:?}"
        );
        OpticalNetwork {
            inputs,
            outputs,
            stages,
            composite,
        }
    }

    pub fn inputs(&self) -> &[Spatial] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Spatial] {
        &self.outputs
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn composite(&self) -> &ModeMap {
        &self.composite
    }

    pub fn propagate(&self, s: &FockState) -> Result<FockState, FockError> {
        s.apply(&self.composite)
    }

    /// Stage-by-stage propagation; must agree with [`propagate`](Self::propagate).
    pub fn propagate_staged(&self, s: &FockState) -> Result<FockState, FockError> {
        let mut cur = s.clone();
        for stage in &self.stages {
            let live: BTreeSet<Spatial> = cur
                .terms()
                .flat_map(|(m, _)| m.modes().iter().map(|md| md.spatial))
                .collect();
            let map = stage.map.clone().with_passthrough(live);
            cur = cur.apply(&map)?;
        }
        Ok(cur)
    }

    pub fn stages_are_isometries(&self) -> bool {
        self.stages.iter().all(|s| s.map.is_isometry())
    }

    pub fn is_isometry(&self) -> bool {
        self.stages_are_isometries() && self.composite.is_isometry()
    }
}

/// The four-photon W-state analyzer: interferometers I to IV followed by two splitters.
pub fn w_analyzer() -> OpticalNetwork {
    use Spatial::*;
    let stage = |name: &str, map: ModeMap| Stage {
        name: name.to_string(),
        map,
    };
    OpticalNetwork::new(
        vec![A, B, C, D],
        vec![S, U, V, W],
        vec![
            stage("I", interferometer_map(A, B, E, F)),
            stage("II", interferometer_map(C, D, G, H)),
            stage("III", interferometer_map(F, G, J, K)),
            stage("IV", interferometer_map(E, H, L, M)),
            stage("BS9", splitter_map(J, K, S, U)),
            stage("BS10", splitter_map(L, M, V, W)),
        ],
    )
}

/// Two-photon Bell-state analyzer: one interferometer.
pub fn bell_analyzer() -> OpticalNetwork {
    use Spatial::*;
    OpticalNetwork::new(
        vec![A, B],
        vec![E, F],
        vec![Stage {
            name: "I".to_string(),
            map: interferometer_map(A, B, E, F),
        }],
    )
}

pub fn w_analyzer_cached() -> &'static OpticalNetwork {
    static NET: OnceLock<OpticalNetwork> = OnceLock::new();
    NET.get_or_init(w_analyzer)
}

/// Propagated `|W_label⟩` encoded on modes `a, b, c, d`.
pub fn propagate_w(label: WLabel) -> FockState {
    let input = encode_fock(
        &w_state(label),
        &[Spatial::A, Spatial::B, Spatial::C, Spatial::D],
    )
    .expect("distinct input labels");
    w_analyzer_cached()
        .propagate(&input)
        .expect("analyzer maps every input mode")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("cannot parse click pattern {0:?}")]
    Parse(String),
}

/// The set of clicked detector slots. Threshold detectors do not report how
/// many photons fell into one slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClickPattern(BTreeSet<Mode>);

impl ClickPattern {
    pub fn new(slots: impl IntoIterator<Item = Mode>) -> Self {
        ClickPattern(slots.into_iter().collect())
    }

    pub fn of(monomial: &Monomial) -> Self {
        ClickPattern::new(monomial.modes().iter().copied())
    }

    pub fn slots(&self) -> &BTreeSet<Mode> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.0.contains(m)
    }

    /// One click in each of the given spatial modes and nowhere else.
    pub fn is_coincidence(&self, spatial: &[Spatial]) -> bool {
        self.0.len() == spatial.len()
            && spatial
                .iter()
                .all(|s| self.0.iter().any(|m| m.spatial == *s))
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.0 {
            write!(f, "{}{}", m.spatial, m.bin)?;
        }
        Ok(())
    }
}

impl FromStr for ClickPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PatternError::Parse(s.to_string());
        let mut slots = BTreeSet::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let spatial = Spatial::from_letter(c).ok_or_else(err)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let bin: u32 = digits.parse().map_err(|_| err())?;
            if !slots.insert(Mode::new(spatial, bin)) {
                return Err(err());
            }
        }
        Ok(ClickPattern(slots))
    }
}

/// Probability of each observable slot set.
pub fn click_distribution(
    s: &FockState,
    delta: Option<f64>,
) -> Result<BTreeMap<ClickPattern, Probability>, FockError> {
    let mut out: BTreeMap<ClickPattern, Probability> = BTreeMap::new();
    for (m, _) in s.terms() {
        let p = s.pattern_probability(m, delta)?;
        let slot = out.entry(ClickPattern::of(m)).or_default();
        *slot = *slot + p;
    }
    Ok(out)
}

/// Slot sets with a symbolically nonzero amplitude in `s`.
pub fn click_support(s: &FockState) -> BTreeSet<ClickPattern> {
    s.terms().map(|(m, _)| ClickPattern::of(m)).collect()
}

/// Uniquely identifying coincidence patterns for the distinguishable W states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionTable {
    rows: BTreeMap<WLabel, BTreeMap<ClickPattern, Scalar>>,
}

impl DetectionTable {
    pub fn labels(&self) -> impl Iterator<Item = WLabel> + '_ {
        self.rows.keys().copied()
    }

    pub fn patterns(&self, label: WLabel) -> Option<&BTreeMap<ClickPattern, Scalar>> {
        self.rows.get(&label)
    }

    /// All `(label, pattern, probability)` rows in label then pattern order.
    pub fn rows(&self) -> impl Iterator<Item = (WLabel, &ClickPattern, Scalar)> + '_ {
        self.rows
            .iter()
            .flat_map(|(l, ps)| ps.iter().map(move |(p, q)| (*l, p, *q)))
    }

    pub fn pattern_count(&self) -> usize {
        self.rows.values().map(BTreeMap::len).sum()
    }

    /// Sum of the pattern probabilities for `label`; zero when it is not distinguishable.
    pub fn success_probability(&self, label: WLabel) -> Scalar {
        self.rows
            .get(&label)
            .map(|ps| ps.values().copied().sum())
            .unwrap_or_else(Scalar::zero)
    }

    /// Average success probability over the sixteen equally likely W states.
    pub fn overall_success(&self) -> Scalar {
        let total: Scalar = WLabel::all().map(|l| self.success_probability(l)).sum();
        total * Scalar::dyadic(1, 4)
    }

    pub fn classify(&self, observed: &ClickPattern) -> Option<WLabel> {
        self.rows
            .iter()
            .find(|(_, ps)| ps.contains_key(observed))
            .map(|(l, _)| *l)
    }

    /// CSV rendering: `state,pattern,probability` rows and a trailing `D_p` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,pattern,probability\n");
        for (l, p, q) in self.rows() {
            out.push_str(&format!("{l},{p},{}\n", format_exact(q)));
        }
        out.push_str(&format!("D_p,,{}\n", self.overall_success().to_f64()));
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, ps) in &self.rows {
            let names: Vec<String> = ps.keys().map(ToString::to_string).collect();
            let p = self.success_probability(*l);
            out.push_str(&format!(
                "{l}  {} patterns  P = {} = {:.4}\n    {}\n",
                ps.len(),
                format_exact(p),
                p.to_f64(),
                names.join(", ")
            ));
        }
        let dp = self.overall_success();
        out.push_str(&format!("D_p = {} = {}\n", format_exact(dp), dp.to_f64()));
        out
    }
}

fn format_exact(x: Scalar) -> String {
    match x.to_rational() {
        Some(r) => r.to_string(),
        None => x.to_string(),
    }
}

/// Propagates the sixteen W states and keeps, for each, the four-fold
/// coincidences on `s, u, v, w` that no other W state can produce.
pub fn derive_detection_table() -> DetectionTable {
    let coincidence = [Spatial::S, Spatial::U, Spatial::V, Spatial::W];
    let outputs: Vec<(WLabel, FockState)> = WLabel::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| (l, propagate_w(l)))
        .collect();
    let mut owners: BTreeMap<ClickPattern, Vec<WLabel>> = BTreeMap::new();
    for (l, state) in &outputs {
        for p in click_support(state) {
            if p.is_coincidence(&coincidence) {
                owners.entry(p).or_default().push(*l);
            }
        }
    }
    let mut rows: BTreeMap<WLabel, BTreeMap<ClickPattern, Scalar>> = BTreeMap::new();
    for (l, state) in &outputs {
        for (m, amp) in state.terms() {
            let p = ClickPattern::of(m);
            if owners.get(&p).map(Vec::as_slice) == Some(&[*l][..]) {
                let prob = amp
                    .abs2(None)
                    .ok()
                    .and_then(|q| q.exact())
                    .expect("unique patterns carry a single phase power");
                rows.entry(*l).or_default().insert(p, prob);
            }
        }
    }
    DetectionTable { rows }
}

/// Process-wide cached table.
pub fn detection_table() -> &'static DetectionTable {
    static TABLE: OnceLock<DetectionTable> = OnceLock::new();
    TABLE.get_or_init(derive_detection_table)
}

/// Propagated Bell state encoded on `a, b`.
pub fn propagate_bell(kind: BellKind) -> FockState {
    let input = encode_fock(&bell_state(kind), &[Spatial::A, Spatial::B]).expect("distinct labels");
    bell_analyzer()
        .propagate(&input)
        .expect("analyzer maps a and b")
}

/// Slot sets whose probability at `delta` exceeds `tol`.
pub fn click_support_at(
    s: &FockState,
    delta: f64,
    tol: f64,
) -> Result<BTreeSet<ClickPattern>, FockError> {
    Ok(click_distribution(s, Some(delta))?
        .into_iter()
        .filter(|(_, p)| p.value() > tol)
        .map(|(c, _)| c)
        .collect())
}

/// Probability that each Bell state yields a slot set no other Bell state
/// produces at the same phase `delta`.
pub fn bell_success_rates(delta: f64) -> BTreeMap<BellKind, f64> {
    const TOL: f64 = 1e-24;
    let outputs: Vec<(BellKind, BTreeMap<ClickPattern, Probability>)> = BellKind::ALL
        .iter()
        .map(|&k| {
            let dist = click_distribution(&propagate_bell(k), Some(delta))
                .expect("numeric delta supplied");
            (k, dist)
        })
        .collect();
    let mut owners: BTreeMap<&ClickPattern, usize> = BTreeMap::new();
    for (_, dist) in &outputs {
        for (p, q) in dist {
            if q.value() > TOL {
                *owners.entry(p).or_default() += 1;
            }
        }
    }
    outputs
        .iter()
        .map(|(k, dist)| {
            let rate = dist
                .iter()
                .filter(|(p, q)| q.value() > TOL && owners[*p] == 1)
                .map(|(_, q)| q.value())
                .sum();
            (*k, rate)
        })
        .collect()
}

/// Exact [`bell_success_rates`] at `φ = e^{iδ} = ±1`, i.e. `δ = 0` (`negative_phase = false`) or `δ = π`.
pub fn bell_success_rates_exact(negative_phase: bool) -> BTreeMap<BellKind, Scalar> {
    let phi = if negative_phase {
        -Scalar::one()
    } else {
        Scalar::one()
    };
    let outputs: Vec<(BellKind, BTreeMap<ClickPattern, Scalar>)> = BellKind::ALL
        .iter()
        .map(|&k| {
            let mut dist: BTreeMap<ClickPattern, Scalar> = BTreeMap::new();
            for (m, a) in propagate_bell(k).terms() {
                let value: Scalar = a
                    .terms()
                    .map(|(p, c)| if p % 2 == 0 { c } else { c * phi })
                    .sum();
                let p = value.abs2() * Scalar::int(m.factorial_weight() as i64);
                *dist.entry(ClickPattern::of(m)).or_insert_with(Scalar::zero) += p;
            }
            dist.retain(|_, p| !p.is_zero());
            (k, dist)
        })
        .collect();
    let mut owners: BTreeMap<&ClickPattern, usize> = BTreeMap::new();
    for (_, dist) in &outputs {
        for p in dist.keys() {
            *owners.entry(p).or_default() += 1;
        }
    }
    outputs
        .iter()
        .map(|(k, dist)| {
            let rate = dist
                .iter()
                .filter(|(p, _)| owners[*p] == 1)
                .map(|(_, q)| *q)
                .sum();
            (*k, rate)
        })
        .collect()
}
