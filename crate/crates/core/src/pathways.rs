//! Virtual-path amplitudes for chains of measurements between a preparation
//! and a post-selection.
//!
//! A scenario prepares the system in a pure state, lets it evolve, couples a
//! probe at each measurement step, and finally conditions on a post-selected
//! state. Each assignment of one eigenstate per step is a virtual path; its
//! amplitude is the product of the transition matrix elements along the chain.
//! Amplitudes of indistinguishable alternatives are summed before squaring,
//! probabilities of distinguishable ones after.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{eigensystem, inner, Operator, StateVector, Unitary, EPS_EIG, ZERO};
use crate::pointers::PointerSpec;

/// Relative threshold below which a path-amplitude sum counts as a dark fringe.
pub const DARK_FRINGE_REL: f64 = 1e-12;

/// An observable resolved into distinct eigenvalues, their projectors, and an
/// eigenbasis used to label virtual paths.
///
/// Eigenvalues within the clustering tolerance share one distinct value whose
/// projector spans the grouped eigenvectors. `membership[l]` maps eigenvector
/// `l` to its distinct-value index.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    observable: Operator,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<StateVector>,
    distinct_values: Vec<f64>,
    projectors: Vec<Operator>,
    membership: Vec<usize>,
}

impl SpectralDecomposition {
    /// Builds from an explicit eigenbasis, preserving the given order.
    pub fn from_eigensystem(
        eigenvectors: Vec<StateVector>,
        eigenvalues: Vec<f64>,
        degeneracy_tol: f64,
    ) -> Result<Self> {
        let n = eigenvectors.len();
        if n < 2 {
            return Err(Error::InvalidDimension { dim: n });
        }
        if eigenvalues.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: eigenvalues.len() });
        }
        if !eigenvalues.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for v in &eigenvectors {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
            }
        }
        for (i, vi) in eigenvectors.iter().enumerate() {
            for vj in eigenvectors.iter().skip(i + 1) {
                if vi.inner(vj).norm() > EPS_EIG {
                    return Err(Error::Unsupported { reason: "eigenbasis is not orthonormal" });
                }
            }
        }

        // cluster by ascending sweep over sorted values
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &idx in &order {
            match groups.last_mut() {
                Some(g)
                    if (eigenvalues[idx] - eigenvalues[*g.last().expect("nonempty")]).abs()
                        <= degeneracy_tol =>
                {
                    g.push(idx)
                }
                _ => groups.push(vec![idx]),
            }
        }

        let mut distinct_values = Vec::with_capacity(groups.len());
        let mut projectors = Vec::with_capacity(groups.len());
        let mut membership = vec![0usize; n];
        for (gi, g) in groups.iter().enumerate() {
            let mean = g.iter().map(|&i| eigenvalues[i]).sum::<f64>() / g.len() as f64;
            distinct_values.push(mean);
            let mut proj = Operator::zeros(n);
            for &i in g {
                proj = proj.add(&Operator::projector(&eigenvectors[i]))?;
                membership[i] = gi;
            }
            projectors.push(proj);
        }

        let mut observable = Operator::zeros(n);
        for (value, proj) in distinct_values.iter().zip(&projectors) {
            observable = observable.add(&proj.scale(Complex64::new(*value, 0.0)))?;
        }

        Ok(Self { observable, eigenvalues, eigenvectors, distinct_values, projectors, membership })
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn observable(&self) -> &Operator {
        &self.observable
    }

    /// Eigenvalues in eigenvector order (not clustered).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[StateVector] {
        &self.eigenvectors
    }

    /// Distinct eigenvalues, ascending.
    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct_values
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    /// Clustered eigenvalue carried by eigenvector `l`.
    pub fn value_of(&self, l: usize) -> f64 {
        self.distinct_values[self.membership[l]]
    }

    pub fn rank_of(&self, value_index: usize) -> usize {
        self.membership.iter().filter(|&&m| m == value_index).count()
    }
}

/// Spectral decomposition of a Hermitian operator with eigenvalue clustering.
pub fn spectral(observable: &Operator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    let eig = eigensystem(observable)?;
    SpectralDecomposition::from_eigensystem(eig.vectors, eig.values, degeneracy_tol)
}

/// One probe coupling: the measured observable and the pointer it displaces.
#[derive(Debug, Clone)]
pub struct MeasurementStep {
    pub observable: SpectralDecomposition,
    pub pointer: PointerSpec,
}

/// Evolution applied before a measurement, then the measurement itself.
#[derive(Debug, Clone)]
pub struct ScenarioStep {
    pub evolution: Unitary,
    pub measurement: MeasurementStep,
}

/// Final conditioning: a pure state or one distinct outcome of an observable
/// (a possibly degenerate projector).
#[derive(Debug, Clone)]
pub enum Postselection {
    State(StateVector),
    Outcome { observable: SpectralDecomposition, value_index: usize },
}

/// A prepared, measured, and post-selected run.
#[derive(Debug, Clone)]
pub struct Scenario {
    dim: usize,
    initial: StateVector,
    steps: Vec<ScenarioStep>,
    final_evolution: Unitary,
    postselect: Postselection,
}

impl Scenario {
    /// The preparation is a pure state, which also guarantees the first
    /// measured quantity behaves as non-degenerate.
    pub fn new(
        initial: StateVector,
        steps: Vec<ScenarioStep>,
        final_evolution: Unitary,
        postselect: Postselection,
    ) -> Result<Self> {
        let dim = initial.dim();
        for step in &steps {
            if step.evolution.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: step.evolution.dim() });
            }
            if step.measurement.observable.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: step.measurement.observable.dim(),
                });
            }
        }
        if final_evolution.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: final_evolution.dim() });
        }
        let ps_dim = match &postselect {
            Postselection::State(s) => s.dim(),
            Postselection::Outcome { observable, value_index } => {
                if *value_index >= observable.distinct_values().len() {
                    return Err(Error::OutcomeIndexOutOfRange {
                        index: *value_index,
                        len: observable.distinct_values().len(),
                    });
                }
                observable.dim()
            }
        };
        if ps_dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: ps_dim });
        }
        Ok(Self { dim, initial, steps, final_evolution, postselect })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn steps(&self) -> &[ScenarioStep] {
        &self.steps
    }

    pub fn final_evolution(&self) -> &Unitary {
        &self.final_evolution
    }

    pub fn postselect(&self) -> &Postselection {
        &self.postselect
    }

    pub fn postselect_state(&self) -> Result<&StateVector> {
        match &self.postselect {
            Postselection::State(s) => Ok(s),
            Postselection::Outcome { .. } => Err(Error::PostselectionNotPure),
        }
    }

    /// Copy with a different post-selected state.
    pub fn with_postselect(&self, state: StateVector) -> Result<Scenario> {
        Scenario::new(
            self.initial.clone(),
            self.steps.clone(),
            self.final_evolution.clone(),
            Postselection::State(state),
        )
    }

    /// Copy with the observable of one step replaced.
    pub fn with_step_observable(
        &self,
        step: usize,
        observable: SpectralDecomposition,
    ) -> Result<Scenario> {
        let mut steps = self.steps.clone();
        if step >= steps.len() {
            return Err(Error::OutcomeIndexOutOfRange { index: step, len: steps.len() });
        }
        steps[step].measurement.observable = observable;
        Scenario::new(
            self.initial.clone(),
            steps,
            self.final_evolution.clone(),
            self.postselect.clone(),
        )
    }

    /// Copy with the pointer of one step replaced.
    pub fn with_pointer(&self, step: usize, pointer: PointerSpec) -> Result<Scenario> {
        let mut steps = self.steps.clone();
        if step >= steps.len() {
            return Err(Error::OutcomeIndexOutOfRange { index: step, len: steps.len() });
        }
        steps[step].measurement.pointer = pointer;
        Scenario::new(
            self.initial.clone(),
            steps,
            self.final_evolution.clone(),
            self.postselect.clone(),
        )
    }

    /// Copy with a measurement appended after the existing steps.
    pub fn with_appended_step(
        &self,
        evolution: Unitary,
        measurement: MeasurementStep,
    ) -> Result<Scenario> {
        let mut steps = self.steps.clone();
        steps.push(ScenarioStep { evolution, measurement });
        Scenario::new(
            self.initial.clone(),
            steps,
            self.final_evolution.clone(),
            self.postselect.clone(),
        )
    }
}

/// Amplitudes for every virtual path of a scenario, with their sum-normalized
/// counterparts.
#[derive(Debug, Clone)]
pub struct PathAmplitudeSet {
    labels: Vec<Vec<usize>>,
    amps: Vec<Complex64>,
    normalized: Vec<Complex64>,
    total: Complex64,
}

impl PathAmplitudeSet {
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// One eigenvector index per measurement step, for each path.
    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitudes divided by their sum, so they always add up to one.
    pub fn normalized(&self) -> &[Complex64] {
        &self.normalized
    }

    pub fn total(&self) -> Complex64 {
        self.total
    }
}

/// Per-step evolved eigenvectors: `evolved[s][l] = U_{s+1} |b^(s)_l>` where
/// `U_{s+1}` is the evolution following step `s` (the final evolution for the
/// last step). Shared by the amplitude chain and the distribution evaluators.
pub(crate) fn evolved_step_vectors(s: &Scenario) -> Vec<Vec<Vec<Complex64>>> {
    let steps = s.steps();
    let mut evolved = Vec::with_capacity(steps.len());
    for (idx, step) in steps.iter().enumerate() {
        let next: &Unitary = if idx + 1 < steps.len() {
            &steps[idx + 1].evolution
        } else {
            s.final_evolution()
        };
        let vecs = step
            .measurement
            .observable
            .eigenvectors()
            .iter()
            .map(|b| next.apply_raw(b.amps()))
            .collect();
        evolved.push(vecs);
    }
    evolved
}

/// Enumerates all label tuples and their raw amplitudes toward `final_state`.
pub(crate) fn raw_path_amplitudes(
    s: &Scenario,
    final_state: &StateVector,
) -> (Vec<Vec<usize>>, Vec<Complex64>) {
    let steps = s.steps();
    debug_assert!(!steps.is_empty());
    let evolved = evolved_step_vectors(s);
    let entry = steps[0].evolution.apply_raw(s.initial().amps());

    // seed with the first step: <b_l | U_1 | a>
    let first_basis = steps[0].measurement.observable.eigenvectors();
    let mut labels: Vec<Vec<usize>> = Vec::new();
    let mut amps: Vec<Complex64> = Vec::new();
    for (l, b) in first_basis.iter().enumerate() {
        labels.push(vec![l]);
        amps.push(inner(b.amps(), &entry));
    }

    for (sidx, step) in steps.iter().enumerate().skip(1) {
        let basis = step.measurement.observable.eigenvectors();
        let mut new_labels = Vec::with_capacity(labels.len() * basis.len());
        let mut new_amps = Vec::with_capacity(labels.len() * basis.len());
        for (label, amp) in labels.iter().zip(&amps) {
            let prev = *label.last().expect("labels nonempty");
            let carried = &evolved[sidx - 1][prev];
            for (l, b) in basis.iter().enumerate() {
                let mut next = label.clone();
                next.push(l);
                new_labels.push(next);
                new_amps.push(amp * inner(b.amps(), carried));
            }
        }
        labels = new_labels;
        amps = new_amps;
    }

    // close the chain on the post-selected state
    let last = steps.len() - 1;
    for (label, amp) in labels.iter().zip(amps.iter_mut()) {
        let l = *label.last().expect("labels nonempty");
        *amp *= inner(final_state.amps(), &evolved[last][l]);
    }
    (labels, amps)
}

/// Path amplitudes toward the scenario's pure post-selected state, normalized
/// to unit sum.
///
/// Fails with [`Error::DarkFringe`] when the amplitude sum vanishes relative
/// to the largest amplitude, in which case the post-selection succeeds with
/// probability zero at leading order and the normalized amplitudes are
/// undefined.
pub fn path_amplitudes(s: &Scenario) -> Result<PathAmplitudeSet> {
    if s.steps().is_empty() {
        return Err(Error::Unsupported { reason: "scenario has no measurement steps" });
    }
    let final_state = s.postselect_state()?;
    let (labels, amps) = raw_path_amplitudes(s, final_state);
    let total = amps.iter().fold(ZERO, |acc, a| acc + a);
    let max_amp = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if total.norm() <= DARK_FRINGE_REL * max_amp {
        return Err(Error::DarkFringe);
    }
    let normalized = amps.iter().map(|a| a / total).collect();
    Ok(PathAmplitudeSet { labels, amps, normalized, total })
}

fn apply_projector(proj: &Operator, v: &[Complex64]) -> Vec<Complex64> {
    proj.apply_raw(v)
}

/// Joint probability of one distinct outcome per step together with the
/// scenario's post-selection, treating every step as accurate (strong).
///
/// Within a degenerate outcome the path amplitudes are summed before squaring;
/// distinguishable outcomes carry separately squared probabilities, and a
/// degenerate post-selection adds its probabilities over the final eigenstates
/// of the selected outcome. Summing the result over all outcome tuples and a
/// complete final basis yields one.
pub fn strong_sequence_probability(s: &Scenario, outcomes: &[usize]) -> Result<f64> {
    let steps = s.steps();
    if outcomes.len() != steps.len() {
        return Err(Error::DimensionMismatch { expected: steps.len(), got: outcomes.len() });
    }
    for (step, &m) in steps.iter().zip(outcomes) {
        let len = step.measurement.observable.distinct_values().len();
        if m >= len {
            return Err(Error::OutcomeIndexOutOfRange { index: m, len });
        }
    }
    let mut v = s.initial().amps().to_vec();
    for (step, &m) in steps.iter().zip(outcomes) {
        v = step.evolution.apply_raw(&v);
        v = apply_projector(&step.measurement.observable.projectors()[m], &v);
    }
    v = s.final_evolution().apply_raw(&v);
    let p = match s.postselect() {
        Postselection::State(c) => inner(c.amps(), &v).norm_sqr(),
        Postselection::Outcome { observable, value_index } => {
            let projected = apply_projector(&observable.projectors()[*value_index], &v);
            crate::hilbert::norm_sq(&projected)
        }
    };
    Ok(p.clamp(0.0, 1.0 + 1e-12).min(1.0))
}

/// Probability of the outcome tuple conditioned on successful post-selection.
pub fn conditional_strong_probability(s: &Scenario, outcomes: &[usize]) -> Result<f64> {
    let joint = strong_sequence_probability(s, outcomes)?;
    let counts: Vec<usize> = s
        .steps()
        .iter()
        .map(|st| st.measurement.observable.distinct_values().len())
        .collect();
    let mut total = 0.0;
    let mut tuple = vec![0usize; counts.len()];
    loop {
        total += strong_sequence_probability(s, &tuple)?;
        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == counts.len() {
                if total <= 0.0 {
                    return Err(Error::ZeroDenominator);
                }
                return Ok(joint / total);
            }
            tuple[k] += 1;
            if tuple[k] < counts[k] {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
    }
}

/// Arrival intensities per final basis state with and without an intermediate
/// which-way determination.
#[derive(Debug, Clone)]
pub struct InterferenceIntensities {
    /// Orthonormal final basis, starting with the post-selected state.
    pub basis: Vec<StateVector>,
    /// `|sum_l A_l|^2` per final state.
    pub with_interference: Vec<f64>,
    /// `sum_l |A_l|^2` per final state.
    pub without_interference: Vec<f64>,
}

/// Compares coherent and which-way arrival intensities for a scenario with a
/// single intermediate measurement.
pub fn interference_intensities(s: &Scenario) -> Result<InterferenceIntensities> {
    if s.steps().len() != 1 {
        return Err(Error::Unsupported {
            reason: "interference intensities need exactly one intermediate measurement",
        });
    }
    let c1 = s.postselect_state()?;
    let basis = crate::hilbert::complete_basis(c1);
    let mut with_interference = Vec::with_capacity(basis.len());
    let mut without_interference = Vec::with_capacity(basis.len());
    for state in &basis {
        let (_, amps) = raw_path_amplitudes(s, state);
        let total = amps.iter().fold(ZERO, |acc, a| acc + a);
        with_interference.push(total.norm_sqr());
        without_interference.push(amps.iter().map(|a| a.norm_sqr()).sum());
    }
    Ok(InterferenceIntensities { basis, with_interference, without_interference })
}

/// Coherent amplitude of every path whose clustered eigenvalue at each step
/// matches the given value, toward the pure post-selected state.
pub fn raw_amplitude_of_values(s: &Scenario, values: &[f64]) -> Result<Complex64> {
    if values.len() != s.steps().len() {
        return Err(Error::DimensionMismatch { expected: s.steps().len(), got: values.len() });
    }
    let final_state = s.postselect_state()?;
    let (labels, amps) = raw_path_amplitudes(s, final_state);
    let mut total = ZERO;
    for (label, amp) in labels.iter().zip(&amps) {
        let matches = label.iter().zip(s.steps()).zip(values).all(|((l, step), v)| {
            (step.measurement.observable.value_of(*l) - v).abs() <= 1e-9
        });
        if matches {
            total += amp;
        }
    }
    Ok(total)
}

/// Frequency with which the labeled path is taken, given that the run ends in
/// the post-selected state and the single intermediate measurement resolves
/// that path against the coherent sum of all others.
pub fn conditional_path_probability(s: &Scenario, path_label: usize) -> Result<f64> {
    if s.steps().len() != 1 {
        return Err(Error::Unsupported {
            reason: "conditional path probability needs exactly one intermediate measurement",
        });
    }
    let final_state = s.postselect_state()?;
    let (_, amps) = raw_path_amplitudes(s, final_state);
    if path_label >= amps.len() {
        return Err(Error::OutcomeIndexOutOfRange { index: path_label, len: amps.len() });
    }
    let chosen = amps[path_label].norm_sqr();
    let rest: Complex64 = amps
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != path_label)
        .map(|(_, a)| *a)
        .fold(ZERO, |acc, a| acc + a);
    let denom = chosen + rest.norm_sqr();
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(chosen / denom)
}
