// SPDX-License-Identifier: Apache-2.0

//! End-to-end model of the four-party protocol: state preparation, channel
//! loss, analyzer propagation, threshold detection with dark counts, relay
//! announcement and sifting. Provides an exact enumerator and a seeded
//! Monte-Carlo sampler over the same outcome distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analyzer::{w_analyzer_cached, DetectionTable};
use crate::fock::{Amplitude, FockState, Mode, Spatial};
use crate::keyrate::CaseBreakdown;
use crate::qubit::{w_state, x_basis_expansion, WLabel};
use crate::scalar::Scalar;

/// Detector slots: four output spatial modes times four time bins.
pub const SLOTS: usize = 16;
const OUTPUTS: [Spatial; 4] = [Spatial::S, Spatial::U, Spatial::V, Spatial::W];
const INPUTS: [Spatial; 4] = [Spatial::A, Spatial::B, Spatial::C, Spatial::D];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("label {0} is not identified by the analyzer")]
    InvalidLabel(WLabel),
    #[error("no accepted events; QBER undefined")]
    NoAcceptedEvents,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Threshold detectors with independent dark counts per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub y0: f64,
}

impl DetectorModel {
    /// Probability that exactly `pattern` clicks given photons in `photon_mask ⊆ pattern`.
    pub fn completion_probability(&self, photon_mask: u16, pattern: u16) -> f64 {
        if photon_mask & !pattern != 0 {
            return 0.0;
        }
        let missing = (pattern & !photon_mask).count_ones() as i32;
        let outside = SLOTS as i32 - pattern.count_ones() as i32;
        self.y0.powi(missing) * (1.0 - self.y0).powi(outside)
    }
}

/// Bit index of an output slot.
pub fn slot_index(m: Mode) -> Option<usize> {
    let s = OUTPUTS.iter().position(|&o| o == m.spatial)?;
    (m.bin < 4).then(|| s * 4 + m.bin as usize)
}

pub fn slot_mode(index: usize) -> Mode {
    Mode::new(OUTPUTS[index / 4], (index % 4) as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Accounting {
    /// Every clicked slot is fed by exactly one photon or one dark count.
    Paper,
    /// Raw threshold semantics: bunched photons fire one slot.
    Physical,
}

impl FromStr for Accounting {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Accounting::Paper),
            "physical" => Ok(Accounting::Physical),
            _ => Err(ProtocolError::InvalidConfig(format!(
                "accounting mode {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accounting::Paper => "paper",
            Accounting::Physical => "physical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl FromStr for Basis {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "z" | "Z" => Ok(Basis::Z),
            "x" | "X" => Ok(Basis::X),
            _ => Err(ProtocolError::InvalidConfig(format!("basis {s:?}"))),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    /// Transmittance of parties a, b, c, d.
    pub eta: [f64; 4],
    pub y0: f64,
    pub accounting: Accounting,
    pub basis: Basis,
    /// Party indices (0 = a) that announce their bits.
    pub announcers: (usize, usize),
    /// Interferometer phase used where outcome probabilities depend on it.
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
}

impl TrialConfig {
    pub fn uniform(eta: f64, y0: f64) -> Self {
        TrialConfig {
            eta: [eta; 4],
            y0,
            ..TrialConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trial count must be at least 1".into());
        }
        if self.eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad(format!("transmittances {:?}", self.eta));
        }
        if !(self.y0 >= 0.0 && self.y0 < 1.0) {
            return bad(format!("y0 = {}", self.y0));
        }
        let (i, j) = self.announcers;
        if i == j || i > 3 || j > 3 {
            return bad(format!("announcers {:?}", self.announcers));
        }
        Ok(())
    }
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            eta: [0.5; 4],
            y0: 6.02e-6,
            accounting: Accounting::Paper,
            basis: Basis::Z,
            announcers: (0, 1),
            delta: 0.0,
            trials: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiftRecord {
    pub label: WLabel,
    pub announcer_bits: (u8, u8),
    /// Key holders' bits after the flip applied by the second holder.
    pub key_bits: (u8, u8),
    pub accepted: bool,
    /// Defined only for accepted events.
    pub error: Option<bool>,
}

fn label_group(label: WLabel) -> Result<u8, ProtocolError> {
    match label.hex() {
        '0' | '1' => Ok(0),
        'c' | 'd' => Ok(1),
        _ => Err(ProtocolError::InvalidLabel(label)),
    }
}

fn split(bits: [u8; 4], announcers: (usize, usize)) -> ((u8, u8), (u8, u8)) {
    let (i, j) = announcers;
    let mut rest = (0..4).filter(|&p| p != i && p != j);
    let (h1, h2) = (rest.next().unwrap(), rest.next().unwrap());
    ((bits[i], bits[j]), (bits[h1], bits[h2]))
}

/// Z-basis sifting: the announcers must both hold 0 (labels 0, 1) or both
/// hold 1 (labels c, d); the second key holder then flips its bit.
pub fn sift(
    label: WLabel,
    bits: [u8; 4],
    announcers: (usize, usize),
) -> Result<SiftRecord, ProtocolError> {
    let want = label_group(label)?;
    let (ann, (k1, k2)) = split(bits, announcers);
    let accepted = ann == (want, want);
    let key_bits = (k1, 1 - k2);
    Ok(SiftRecord {
        label,
        announcer_bits: ann,
        key_bits,
        accepted,
        error: accepted.then_some(key_bits.0 != key_bits.1),
    })
}

/// Whether the key holders' X values are equal whenever the announcers'
/// values differ, read off the X-basis expansion of the W state.
/// `None` when both relations occur.
pub fn x_correlation(label: WLabel, announcers: (usize, usize)) -> Option<bool> {
    let (i, j) = announcers;
    let mut rest = (0..4).filter(|&p| p != i && p != j);
    let (h1, h2) = (rest.next().unwrap(), rest.next().unwrap());
    let mut seen = (false, false);
    for key in x_basis_expansion(&w_state(label)).keys() {
        let c: Vec<char> = key.chars().collect();
        if c[i] != c[j] {
            if c[h1] == c[h2] {
                seen.0 = true;
            } else {
                seen.1 = true;
            }
        }
    }
    match seen {
        (true, false) => Some(true),
        (false, true) => Some(false),
        _ => None,
    }
}

/// X-basis sifting (`0` = `|+⟩`, `1` = `|−⟩`): accepted when the announcers'
/// values differ. The error flag compares the holders' relation with
/// [`x_correlation`].
pub fn sift_x(
    label: WLabel,
    signs: [u8; 4],
    announcers: (usize, usize),
) -> Result<SiftRecord, ProtocolError> {
    label_group(label)?;
    sift_x_with(label, signs, announcers, x_correlation(label, announcers))
}

fn sift_x_with(
    label: WLabel,
    signs: [u8; 4],
    announcers: (usize, usize),
    expected_equal: Option<bool>,
) -> Result<SiftRecord, ProtocolError> {
    let (ann, key_bits) = split(signs, announcers);
    let accepted = ann.0 != ann.1;
    let error = match (accepted, expected_equal) {
        (true, Some(eq)) => Some((key_bits.0 == key_bits.1) != eq),
        _ => None,
    };
    Ok(SiftRecord {
        label,
        announcer_bits: ann,
        key_bits,
        accepted,
        error,
    })
}

/// Slot-set outcome of the surviving photons before dark counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub mask: u16,
    pub prob: f64,
    /// Some slot holds more than one photon.
    pub bunched: bool,
}

#[derive(Debug, Clone)]
struct OutcomeTable {
    outcomes: Vec<Outcome>,
    cumulative: Vec<f64>,
}

impl OutcomeTable {
    fn sample(&self, u: f64) -> &Outcome {
        let i = self.cumulative.partition_point(|&c| c <= u);
        &self.outcomes[i.min(self.outcomes.len() - 1)]
    }
}

/// Precomputed outcome distributions for every prepared input and survival subset.
#[derive(Debug, Clone)]
pub struct ProtocolModel {
    basis: Basis,
    delta: f64,
    patterns: Vec<(u16, WLabel)>,
    lookup: BTreeMap<u16, WLabel>,
    /// Indexed by `input * 16 + subset`; bit `3 - p` of each refers to party `p`.
    configs: Vec<OutcomeTable>,
}

fn party_bit(value: usize, party: usize) -> u8 {
    ((value >> (3 - party)) & 1) as u8
}

fn photon_state(party: usize, value: u8, basis: Basis) -> FockState {
    let sp = INPUTS[party];
    match basis {
        Basis::Z => FockState::single(Mode::new(sp, value as u32)),
        Basis::X => {
            let r = Scalar::inv_sqrt2();
            let s = if value == 0 { r } else { -r };
            FockState::single(Mode::new(sp, 0))
                .scale(&Amplitude::from(r))
                .add(&FockState::single(Mode::new(sp, 1)).scale(&Amplitude::from(s)))
        }
    }
}

fn outcome_table(input: usize, subset: usize, basis: Basis, delta: f64) -> OutcomeTable {
    let net = w_analyzer_cached();
    let mut state = FockState::vacuum();
    for p in 0..4 {
        if party_bit(subset, p) == 1 {
            let out = net
                .propagate(&photon_state(p, party_bit(input, p), basis))
                .expect("analyzer maps input modes");
            state = state.tensor(&out);
        }
    }
    let mut merged: BTreeMap<(u16, bool), f64> = BTreeMap::new();
    for (m, _) in state.terms() {
        let prob = state
            .pattern_probability(m, Some(delta))
            .expect("numeric delta supplied")
            .value();
        let mask = m.modes().iter().fold(0u16, |acc, &md| {
            acc | 1 << slot_index(md).expect("analyzer outputs stay within s,u,v,w bins 0..3")
        });
        *merged.entry((mask, m.is_bunched())).or_default() += prob;
    }
    let outcomes: Vec<Outcome> = merged
        .into_iter()
        .map(|((mask, bunched), prob)| Outcome {
            mask,
            prob,
            bunched,
        })
        .collect();
    let mut acc = 0.0;
    let cumulative = outcomes
        .iter()
        .map(|o| {
            acc += o.prob;
            acc
        })
        .collect();
    OutcomeTable {
        outcomes,
        cumulative,
    }
}

impl ProtocolModel {
    pub fn new(table: &DetectionTable, basis: Basis, delta: f64) -> Self {
        let patterns: Vec<(u16, WLabel)> = table
            .rows()
            .map(|(l, p, _)| {
                let mask = p.slots().iter().fold(0u16, |acc, &m| {
                    acc | 1 << slot_index(m).expect("table slots are outputs")
                });
                (mask, l)
            })
            .collect();
        let lookup = patterns.iter().copied().collect();
        let configs = (0..256)
            .into_par_iter()
            .map(|k| outcome_table(k / 16, k % 16, basis, delta))
            .collect();
        ProtocolModel {
            basis,
            delta,
            patterns,
            lookup,
            configs,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Slot-set outcomes for prepared values `input` (bit `3 - p` for party `p`) and survivors `subset`.
    pub fn outcomes(&self, input: usize, subset: usize) -> &[Outcome] {
        &self.configs[input * 16 + subset].outcomes
    }

    pub fn classify(&self, clicked: u16) -> Option<WLabel> {
        self.lookup.get(&clicked).copied()
    }

    fn sift_values(
        &self,
        label: WLabel,
        input: usize,
        cfg: &TrialConfig,
        x_rel: &[Option<bool>; 16],
    ) -> SiftRecord {
        let values = [0, 1, 2, 3].map(|p| party_bit(input, p));
        match self.basis {
            Basis::Z => sift(label, values, cfg.announcers),
            Basis::X => sift_x_with(label, values, cfg.announcers, x_rel[label.index()]),
        }
        .expect("table labels are siftable")
    }

    fn x_relations(&self, cfg: &TrialConfig) -> [Option<bool>; 16] {
        let mut rel = [None; 16];
        for &(_, l) in &self.patterns {
            rel[l.index()] = x_correlation(l, cfg.announcers);
        }
        rel
    }
}

fn survival_probability(eta: &[f64; 4], subset: usize) -> f64 {
    (0..4)
        .map(|p| {
            if party_bit(subset, p) == 1 {
                eta[p]
            } else {
                1.0 - eta[p]
            }
        })
        .product()
}

/// Exact sums over inputs, survival subsets, photon outcomes and dark-count completions.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub q1: f64,
    /// Error rate over accepted events whose error relation is defined;
    /// `None` when there are none.
    pub e1: Option<f64>,
    /// Accepted gain of events with an undefined error relation (X basis, labels 1 and d).
    pub undefined_gain: f64,
    /// Cases indexed by the number of surviving photons.
    pub breakdown: CaseBreakdown<f64>,
    /// Accepted gain per W label index.
    pub per_label_gain: [f64; 16],
    pub per_label_error: [f64; 16],
    /// Total probability of all enumerated branches; 1 up to rounding.
    pub mass: f64,
}

pub fn exact_enumerate(
    model: &ProtocolModel,
    cfg: &TrialConfig,
) -> Result<Enumeration, ProtocolError> {
    cfg.validate()?;
    let det = DetectorModel { y0: cfg.y0 };
    let x_rel = model.x_relations(cfg);
    let mut gain = [0.0; 5];
    let mut error = [0.0; 5];
    let mut per_label_gain = [0.0; 16];
    let mut per_label_error = [0.0; 16];
    let mut mass = 0.0;
    let mut undefined_gain = 0.0;
    for input in 0..16 {
        for subset in 0..16 {
            let w_config = survival_probability(&cfg.eta, subset) / 16.0;
            let case = (subset as u32).count_ones() as usize;
            for o in model.outcomes(input, subset) {
                mass += w_config * o.prob;
                if o.bunched && cfg.accounting == Accounting::Paper {
                    continue;
                }
                for &(pattern, label) in &model.patterns {
                    let c = det.completion_probability(o.mask, pattern);
                    if c == 0.0 {
                        continue;
                    }
                    let rec = model.sift_values(label, input, cfg, &x_rel);
                    if !rec.accepted {
                        continue;
                    }
                    let w = w_config * o.prob * c;
                    gain[case] += w;
                    per_label_gain[label.index()] += w;
                    match rec.error {
                        Some(true) => {
                            error[case] += w;
                            per_label_error[label.index()] += w;
                        }
                        Some(false) => {}
                        None => undefined_gain += w,
                    }
                }
            }
        }
    }
    // dark-count configurations are summed in closed form: ((1 - y0) + y0)^16
    mass *= ((1.0 - cfg.y0) + cfg.y0).powi(SLOTS as i32);
    let breakdown = CaseBreakdown { gain, error };
    let q1 = breakdown.total_gain();
    let defined = q1 - undefined_gain;
    let e1 = (defined > 0.0).then(|| breakdown.total_error() / defined);
    Ok(Enumeration {
        q1,
        e1,
        undefined_gain,
        breakdown,
        per_label_gain,
        per_label_error,
        mass,
    })
}

/// Counts from a batch of trials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Tally {
    pub trials: u64,
    pub accepted: u64,
    pub errors: u64,
    pub per_case_accepted: [u64; 5],
    pub per_case_errors: [u64; 5],
    pub per_label_accepted: [u64; 16],
    pub per_label_errors: [u64; 16],
    /// Accepted events whose error relation is undefined.
    pub undefined: u64,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.accepted += other.accepted;
        self.errors += other.errors;
        self.undefined += other.undefined;
        for i in 0..5 {
            self.per_case_accepted[i] += other.per_case_accepted[i];
            self.per_case_errors[i] += other.per_case_errors[i];
        }
        for i in 0..16 {
            self.per_label_accepted[i] += other.per_label_accepted[i];
            self.per_label_errors[i] += other.per_label_errors[i];
        }
    }
}

const BATCH: u64 = 1 << 15;

/// Dark-count mask for one trial.
struct DarkSampler {
    y0: f64,
    p_none: f64,
    ln_keep: f64,
}

impl DarkSampler {
    fn new(y0: f64) -> Self {
        DarkSampler {
            y0,
            p_none: (1.0 - y0).powi(SLOTS as i32),
            ln_keep: (1.0 - y0).ln(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u16 {
        if self.y0 == 0.0 || rng.random::<f64>() < self.p_none {
            return 0;
        }
        // first dark slot from the geometric law truncated to 16 slots
        let v: f64 = rng.random();
        let first = ((1.0 - v * (1.0 - self.p_none)).ln() / self.ln_keep).floor() as usize;
        let first = first.min(SLOTS - 1);
        let mut mask = 1u16 << first;
        for s in first + 1..SLOTS {
            if rng.random::<f64>() < self.y0 {
                mask |= 1 << s;
            }
        }
        mask
    }
}

fn run_batch(
    model: &ProtocolModel,
    cfg: &TrialConfig,
    base: &ChaCha8Rng,
    start: u64,
    end: u64,
) -> Tally {
    let darks = DarkSampler::new(cfg.y0);
    let x_rel = model.x_relations(cfg);
    let mut t = Tally::default();
    for trial in start..end {
        let mut rng = base.clone();
        rng.set_stream(trial);
        t.trials += 1;
        let input = (rng.random::<u32>() & 0xF) as usize;
        let mut subset = 0usize;
        for p in 0..4 {
            if rng.random::<f64>() < cfg.eta[p] {
                subset |= 1 << (3 - p);
            }
        }
        let outcome = model.configs[input * 16 + subset].sample(rng.random());
        let clicked = outcome.mask | darks.sample(&mut rng);
        if outcome.bunched && cfg.accounting == Accounting::Paper {
            continue;
        }
        let Some(label) = model.classify(clicked) else {
            continue;
        };
        let rec = model.sift_values(label, input, cfg, &x_rel);
        if !rec.accepted {
            continue;
        }
        let case = subset.count_ones() as usize;
        t.accepted += 1;
        t.per_case_accepted[case] += 1;
        t.per_label_accepted[label.index()] += 1;
        match rec.error {
            Some(true) => {
                t.errors += 1;
                t.per_case_errors[case] += 1;
                t.per_label_errors[label.index()] += 1;
            }
            Some(false) => {}
            None => t.undefined += 1,
        }
    }
    t
}

/// Seeded Monte-Carlo run. Trial `i` draws from its own ChaCha stream, so the
/// tally depends only on `(seed, trials)` and not on scheduling.
pub fn run_trials(model: &ProtocolModel, cfg: &TrialConfig) -> Result<Tally, ProtocolError> {
    cfg.validate()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let batches = cfg.trials.div_ceil(BATCH);
    let parts: Vec<Tally> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let start = b * BATCH;
            run_batch(model, cfg, &base, start, (start + BATCH).min(cfg.trials))
        })
        .collect();
    let mut total = Tally::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub q1_hat: f64,
    pub q1_ci: (f64, f64),
    /// Over accepted events with a defined error relation.
    pub e1_hat: Result<f64, ProtocolError>,
    pub e1_ci: Option<(f64, f64)>,
    /// Share of accepted events per case.
    pub per_case_fraction: [f64; 5],
}

pub fn estimate(t: &Tally) -> Result<Estimate, ProtocolError> {
    if t.trials == 0 {
        return Err(ProtocolError::InvalidConfig("tally has no trials".into()));
    }
    const Z: f64 = 1.96;
    let q1_hat = t.accepted as f64 / t.trials as f64;
    let defined = t.accepted - t.undefined;
    let (e1_hat, e1_ci) = if defined == 0 {
        (Err(ProtocolError::NoAcceptedEvents), None)
    } else {
        (
            Ok(t.errors as f64 / defined as f64),
            Some(wilson_interval(t.errors, defined, Z)),
        )
    };
    let per_case_fraction = if t.accepted > 0 {
        t.per_case_accepted.map(|n| n as f64 / t.accepted as f64)
    } else {
        [0.0; 5]
    };
    Ok(Estimate {
        q1_hat,
        q1_ci: wilson_interval(t.accepted, t.trials, Z),
        e1_hat,
        e1_ci,
        per_case_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::detection_table;
    use crate::keyrate::{
        case_breakdown, e1_identical, q1_identical, AnalyzerConstants, Transmittances,
    };
    use std::sync::OnceLock;

    fn z_model() -> &'static ProtocolModel {
        static M: OnceLock<ProtocolModel> = OnceLock::new();
        M.get_or_init(|| ProtocolModel::new(detection_table(), Basis::Z, 0.0))
    }

    fn label(c: char) -> WLabel {
        c.to_string().parse().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn sift_examples() {
        let r = sift(label('0'), [0, 0, 0, 1], (0, 1)).unwrap();
        assert!(r.accepted);
        assert_eq!(r.error, Some(false));
        let r = sift(label('0'), [0, 0, 0, 0], (0, 1)).unwrap();
        assert!(r.accepted);
        assert_eq!(r.error, Some(true));
        let r = sift(label('0'), [0, 1, 1, 0], (0, 1)).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.error, None);
        let r = sift(label('d'), [1, 1, 0, 1], (0, 1)).unwrap();
        assert!(r.accepted && r.error == Some(false));
        assert_eq!(
            sift(label('5'), [0; 4], (0, 1)),
            Err(ProtocolError::InvalidLabel(label('5')))
        );
    }

    #[test]
    fn x_sifting_follows_the_expansion() {
        // W0 and Wc: |+-> or |-+> on the announcers leaves the holders in |++> - |-->
        assert_eq!(x_correlation(label('0'), (0, 1)), Some(true));
        assert_eq!(x_correlation(label('c'), (0, 1)), Some(true));
        let r = sift_x(label('0'), [0, 1, 1, 1], (0, 1)).unwrap();
        assert!(r.accepted && r.error == Some(false));
        let r = sift_x(label('0'), [1, 0, 0, 1], (0, 1)).unwrap();
        assert!(r.accepted && r.error == Some(true));
        assert!(!sift_x(label('0'), [1, 1, 0, 1], (0, 1)).unwrap().accepted);
    }

    #[test]
    fn slot_indexing_round_trips() {
        for i in 0..SLOTS {
            assert_eq!(slot_index(slot_mode(i)), Some(i));
        }
        assert_eq!(slot_index(Mode::new(Spatial::E, 0)), None);
        assert_eq!(slot_index(Mode::new(Spatial::S, 4)), None);
    }

    #[test]
    fn outcome_tables_are_normalized() {
        let m = z_model();
        for k in 0..256 {
            let total: f64 = m.outcomes(k / 16, k % 16).iter().map(|o| o.prob).sum();
            assert!((total - 1.0).abs() < 1e-12, "config {k}");
        }
        assert_eq!(
            m.outcomes(3, 0),
            &[Outcome {
                mask: 0,
                prob: 1.0,
                bunched: false
            }]
        );
    }

    #[test]
    fn enumerator_matches_closed_forms() {
        let k0 = AnalyzerConstants::derived();
        for &(eta, y0) in &[(0.5, 1e-5), (0.0145, 6.02e-6), (0.9, 1e-4), (1e-3, 1e-7)] {
            let cfg = TrialConfig::uniform(eta, y0);
            let e = exact_enumerate(z_model(), &cfg).unwrap();
            assert!(rel(e.q1, q1_identical(&eta, &y0, &k0)) < 1e-12, "eta {eta}");
            assert!(rel(e.e1.unwrap(), e1_identical(&eta, &y0, &k0).unwrap()) < 1e-12);
            assert!((e.mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerator_matches_each_case_at_unequal_channels() {
        let k0 = AnalyzerConstants::derived();
        let cfg = TrialConfig {
            eta: [0.31, 0.72, 0.05, 0.44],
            y0: 3e-3,
            ..TrialConfig::default()
        };
        let e = exact_enumerate(z_model(), &cfg).unwrap();
        let analytic = case_breakdown(&Transmittances(cfg.eta), &cfg.y0, &k0);
        for i in 0..5 {
            assert!(
                rel(e.breakdown.gain[i], analytic.gain[i]) < 1e-12,
                "gain case {i}"
            );
            assert!(
                rel(e.breakdown.error[i], analytic.error[i]) < 1e-12,
                "error case {i}"
            );
        }
    }

    #[test]
    fn enumerator_limits() {
        let e = exact_enumerate(
            z_model(),
            &TrialConfig {
                accounting: Accounting::Physical,
                ..TrialConfig::uniform(1.0, 0.0)
            },
        )
        .unwrap();
        assert!(rel(e.q1, 1.0 / 256.0) < 1e-14);
        assert_eq!(e.e1, Some(0.0));
        let y0: f64 = 1e-2;
        let e = exact_enumerate(z_model(), &TrialConfig::uniform(0.0, y0)).unwrap();
        assert!(rel(e.q1, 8.0 * y0.powi(4) * (1.0 - y0).powi(12)) < 1e-12);
        assert!(rel(e.e1.unwrap(), 0.5) < 1e-12);
    }

    #[test]
    fn physical_accounting_admits_more_events() {
        for &(eta, y0) in &[(0.3, 1e-3), (0.0145, 6.02e-6)] {
            let paper = exact_enumerate(z_model(), &TrialConfig::uniform(eta, y0)).unwrap();
            let phys = exact_enumerate(
                z_model(),
                &TrialConfig {
                    accounting: Accounting::Physical,
                    ..TrialConfig::uniform(eta, y0)
                },
            )
            .unwrap();
            assert!(phys.q1 >= paper.q1);
        }
    }

    #[test]
    fn announcer_roles_pair_up_under_identical_channels() {
        let run = |ann| {
            exact_enumerate(
                z_model(),
                &TrialConfig {
                    announcers: ann,
                    ..TrialConfig::uniform(0.3, 1e-3)
                },
            )
            .unwrap()
        };
        let (ab, cd, ac, bd) = (run((0, 1)), run((2, 3)), run((0, 2)), run((1, 3)));
        assert!(rel(ab.q1, cd.q1) < 1e-12 && rel(ab.e1.unwrap(), cd.e1.unwrap()) < 1e-12);
        assert!(rel(ac.q1, bd.q1) < 1e-12 && rel(ac.e1.unwrap(), bd.e1.unwrap()) < 1e-12);
        // the analyzer pairs a with b and c with d, so mixed announcer pairs differ
        assert!(rel(ab.q1, ac.q1) > 1e-3);
    }

    #[test]
    fn x_basis_ideal_channel() {
        let xm = ProtocolModel::new(detection_table(), Basis::X, 0.0);
        let cfg = TrialConfig {
            basis: Basis::X,
            ..TrialConfig::uniform(1.0, 0.0)
        };
        let e = exact_enumerate(&xm, &cfg).unwrap();
        assert!((e.mass - 1.0).abs() < 1e-12);
        assert!(e.q1 > 0.0 && e.undefined_gain < e.q1);
        assert!(e.e1.unwrap() < 1e-12, "{:?}", e.e1);
    }

    #[test]
    fn trials_are_deterministic_and_thread_independent() {
        let cfg = TrialConfig {
            trials: 200_000,
            seed: 7,
            y0: 1e-3,
            ..TrialConfig::uniform(0.6, 1e-3)
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_trials(z_model(), &cfg).unwrap());
        let b = four.install(|| run_trials(z_model(), &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.trials, 200_000);
        let c = run_trials(
            z_model(),
            &TrialConfig {
                seed: 8,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_trial_and_zero_trials() {
        let cfg = TrialConfig {
            trials: 1,
            ..TrialConfig::default()
        };
        assert_eq!(run_trials(z_model(), &cfg).unwrap().trials, 1);
        let cfg = TrialConfig { trials: 0, ..cfg };
        assert!(run_trials(z_model(), &cfg).is_err());
    }

    #[test]
    fn ideal_channel_monte_carlo() {
        let cfg = TrialConfig {
            trials: 1_000_000,
            seed: 1,
            ..TrialConfig::uniform(1.0, 0.0)
        };
        let t = run_trials(z_model(), &cfg).unwrap();
        let p = 1.0 / 256.0;
        let sigma = (p * (1.0 - p) / t.trials as f64).sqrt();
        let q = t.accepted as f64 / t.trials as f64;
        assert!((q - p).abs() < 3.0 * sigma, "{q}");
        assert_eq!(t.errors, 0);
        assert_eq!(t.per_case_accepted[4], t.accepted);
    }

    #[test]
    fn dark_sampler_marginals() {
        let y0 = 0.05;
        let s = DarkSampler::new(y0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let mut counts = [0u64; SLOTS];
        for _ in 0..n {
            let m = s.sample(&mut rng);
            for (i, c) in counts.iter_mut().enumerate() {
                *c += ((m >> i) & 1) as u64;
            }
        }
        let sigma = (y0 * (1.0 - y0) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - y0).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn estimate_examples() {
        let t = Tally {
            trials: 10,
            ..Tally::default()
        };
        let e = estimate(&t).unwrap();
        assert_eq!(e.q1_hat, 0.0);
        assert_eq!(e.e1_hat, Err(ProtocolError::NoAcceptedEvents));
        assert!(e.q1_ci.1 > 0.0);
        let t = Tally {
            trials: 10,
            accepted: 10,
            ..Tally::default()
        };
        let e = estimate(&t).unwrap();
        assert_eq!(e.q1_hat, 1.0);
        assert_eq!(e.e1_hat, Ok(0.0));
        let t = Tally {
            trials: 1_000_000,
            accepted: 3906,
            ..Tally::default()
        };
        let e = estimate(&t).unwrap();
        assert!((e.q1_hat - 3.9e-3).abs() < 1e-5);
        assert!(e.q1_ci.0 < e.q1_hat && e.q1_hat < e.q1_ci.1);
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }
}
