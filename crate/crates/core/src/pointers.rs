//! Pointer wavefunctions, reading distributions, moments, weak values, and
//! post-selection design.
//!
//! A von Neumann pointer of width `df` starts centered at zero and is shifted
//! by the eigenvalue its probe couples to. Conditioned on post-selection, the
//! joint amplitude of the readings is the path-amplitude sum with one profile
//! factor per finite-width pointer. Delta-profile pointers are never gridded:
//! they are treated as accurate measurements whose outcomes split the
//! remaining readings into incoherent branches.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hilbert::{inner, StateVector, Unitary, ZERO};
use crate::pathways::{
    raw_path_amplitudes, PathAmplitudeSet, Postselection, Scenario, SpectralDecomposition,
};

/// Shape of the initial pointer wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Gaussian,
    Rectangular,
    /// Idealized accurate pointer; only usable analytically.
    Delta,
}

/// A pointer profile together with its width.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerSpec {
    profile: Profile,
    width: f64,
}

impl PointerSpec {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidWidth { width });
        }
        Ok(Self { profile: Profile::Gaussian, width })
    }

    pub fn rectangular(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidWidth { width });
        }
        Ok(Self { profile: Profile::Rectangular, width })
    }

    /// The zero-width limit; width is ignored.
    pub fn delta() -> Self {
        Self { profile: Profile::Delta, width: 0.0 }
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_delta(&self) -> bool {
        self.profile == Profile::Delta
    }

    /// Initial wavefunction value at coordinate `f`; real for both finite
    /// profiles, with unit squared norm.
    pub fn amplitude(&self, f: f64) -> Result<f64> {
        match self.profile {
            Profile::Gaussian => {
                let df2 = self.width * self.width;
                let norm = (core::f64::consts::PI * df2 / 2.0).powf(-0.25);
                Ok(norm * (-f * f / df2).exp())
            }
            Profile::Rectangular => {
                if f.abs() <= self.width / 2.0 {
                    Ok(1.0 / self.width.sqrt())
                } else {
                    Ok(0.0)
                }
            }
            Profile::Delta => Err(Error::DeltaNotEvaluable),
        }
    }
}

/// `G(f - shift)` for a finite-width profile.
pub fn pointer_wavefunction(p: &PointerSpec, f: f64, shift: f64) -> Result<f64> {
    p.amplitude(f - shift)
}

/// A uniform coordinate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    start: f64,
    step: f64,
    len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || len < 2 {
            return Err(Error::Unsupported { reason: "axis needs len >= 2 and positive spacing" });
        }
        Ok(Self { start, step, len })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    /// Trapezoid weight for index `i` (half at the endpoints).
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len {
            0.5
        } else {
            1.0
        }
    }
}

/// Grid construction overrides for distribution evaluation.
#[derive(Debug, Clone, Default)]
pub struct GridOptions {
    /// Grid spacing; default `min(width/40, gap/40)`.
    pub spacing: Option<f64>,
    /// Half-extent beyond the eigenvalue range; default `6 * width`.
    pub span: Option<f64>,
}

const MAX_AXIS_POINTS: usize = 1 << 22;
const MAX_TOTAL_CELLS: usize = 1 << 26;

/// Default grid for one measurement: covers every shifted profile out to six
/// widths and resolves both the envelope and the eigenvalue separation.
pub fn default_axis(values: &[f64], pointer: &PointerSpec, opts: &GridOptions) -> Result<Axis> {
    if pointer.is_delta() {
        return Err(Error::DeltaNotEvaluable);
    }
    let width = pointer.width();
    let lo_v = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = opts.span.unwrap_or(6.0 * width);
    let mut gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in values.iter().skip(i + 1) {
            let d = (a - b).abs();
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    let spacing = opts.spacing.unwrap_or_else(|| {
        let base = width / 40.0;
        if gap.is_finite() {
            base.min(gap / 40.0)
        } else {
            base
        }
    });
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Unsupported { reason: "grid spacing must be positive" });
    }
    let lo = lo_v - span;
    let hi = hi_v + span;
    let len = ((hi - lo) / spacing).ceil() as usize + 1;
    if len > MAX_AXIS_POINTS {
        return Err(Error::ResourceLimit { needed: len, limit: MAX_AXIS_POINTS });
    }
    Axis::new(lo, spacing, len)
}

/// A probability density over one grid per finite-width pointer.
#[derive(Debug, Clone)]
pub struct ReadingDistribution {
    axes: Vec<Axis>,
    density: Vec<f64>,
    normalized: bool,
}

/// Probability and per-axis means of a coordinate slab.
#[derive(Debug, Clone)]
pub struct RegionStats {
    pub weight: f64,
    pub means: Vec<f64>,
}

impl ReadingDistribution {
    pub fn new(axes: Vec<Axis>, density: Vec<f64>) -> Result<Self> {
        let cells: usize = axes.iter().map(Axis::len).product();
        if axes.is_empty() || cells != density.len() {
            return Err(Error::DimensionMismatch { expected: cells, got: density.len() });
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::NonFinite);
        }
        Ok(Self { axes, density, normalized: false })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn coords_of(&self, mut flat: usize) -> Vec<usize> {
        let mut coords = vec![0usize; self.axes.len()];
        for a in (0..self.axes.len()).rev() {
            coords[a] = flat % self.axes[a].len();
            flat /= self.axes[a].len();
        }
        coords
    }

    fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::step).product()
    }

    /// Trapezoid integral over the whole grid.
    pub fn integral(&self) -> f64 {
        let vol = self.cell_volume();
        let mut total = 0.0;
        for (flat, d) in self.density.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let coords = self.coords_of(flat);
            let w: f64 =
                coords.iter().zip(&self.axes).map(|(&i, ax)| ax.weight(i)).product();
            total += d * w;
        }
        total * vol
    }

    /// Scales the density to unit integral.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.integral();
        if !(total > 1e-300) {
            return Err(Error::ZeroTotalWeight);
        }
        for d in &mut self.density {
            *d /= total;
        }
        self.normalized = true;
        Ok(())
    }

    /// Integrates out every axis except `axis`.
    pub fn marginal(&self, axis: usize) -> Result<ReadingDistribution> {
        if axis >= self.axes.len() {
            return Err(Error::Unsupported { reason: "marginal axis out of range" });
        }
        let kept = self.axes[axis].clone();
        let mut out = vec![0.0; kept.len()];
        let other_vol: f64 = self
            .axes
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != axis)
            .map(|(_, ax)| ax.step())
            .product();
        for (flat, d) in self.density.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let coords = self.coords_of(flat);
            let mut w = 1.0;
            for (a, (&i, ax)) in coords.iter().zip(&self.axes).enumerate() {
                if a != axis {
                    w *= ax.weight(i);
                }
            }
            out[coords[axis]] += d * w;
        }
        for v in &mut out {
            *v *= other_vol;
        }
        let mut dist = ReadingDistribution::new(vec![kept], out)?;
        dist.normalized = self.normalized;
        Ok(dist)
    }

    /// First moment of the marginal on `axis`.
    pub fn mean(&self, axis: usize) -> Result<f64> {
        let marg = self.marginal(axis)?;
        let ax = &marg.axes[0];
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, d) in marg.density.iter().enumerate() {
            let w = ax.weight(i) * d;
            num += w * ax.point(i);
            den += w;
        }
        if den <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(num / den)
    }

    /// Probability mass and per-axis means of the slab
    /// `lo <= coordinate(cond_axis) <= hi`.
    pub fn region_stats(&self, cond_axis: usize, lo: f64, hi: f64) -> Result<RegionStats> {
        if cond_axis >= self.axes.len() {
            return Err(Error::Unsupported { reason: "region axis out of range" });
        }
        let vol = self.cell_volume();
        let mut weight = 0.0;
        let mut sums = vec![0.0; self.axes.len()];
        for (flat, d) in self.density.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let coords = self.coords_of(flat);
            let f = self.axes[cond_axis].point(coords[cond_axis]);
            if f < lo || f > hi {
                continue;
            }
            let w: f64 =
                coords.iter().zip(&self.axes).map(|(&i, ax)| ax.weight(i)).product();
            let mass = d * w * vol;
            weight += mass;
            for (a, &i) in coords.iter().enumerate() {
                sums[a] += mass * self.axes[a].point(i);
            }
        }
        if weight <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        let means = sums.iter().map(|s| s / weight).collect();
        Ok(RegionStats { weight, means })
    }
}

// ---------------------------------------------------------------------------
// distribution evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Term {
    amp: Complex64,
    value_ids: Vec<usize>,
}

struct DistributionPlan {
    axes: Vec<Axis>,
    /// `tables[axis][value_id][grid_index] = G(f_i - value)`
    tables: Vec<Vec<Vec<f64>>>,
    /// Each group interferes coherently; groups add incoherently.
    groups: Vec<Vec<Term>>,
}

fn finite_step_indices(s: &Scenario) -> Vec<usize> {
    s.steps()
        .iter()
        .enumerate()
        .filter(|(_, st)| !st.measurement.pointer.is_delta())
        .map(|(i, _)| i)
        .collect()
}

fn postselect_set(s: &Scenario) -> Vec<StateVector> {
    match s.postselect() {
        Postselection::State(c) => vec![c.clone()],
        Postselection::Outcome { observable, value_index } => observable
            .eigenvectors()
            .iter()
            .zip(observable.membership())
            .filter(|(_, m)| *m == value_index)
            .map(|(v, _)| v.clone())
            .collect(),
    }
}

fn plan_distribution(s: &Scenario, axes: Vec<Axis>) -> Result<DistributionPlan> {
    let finite = finite_step_indices(s);
    if finite.is_empty() {
        return Err(Error::Unsupported {
            reason: "distribution needs at least one finite-width pointer",
        });
    }
    if axes.len() != finite.len() {
        return Err(Error::DimensionMismatch { expected: finite.len(), got: axes.len() });
    }
    let cells: usize = axes.iter().map(Axis::len).product();
    if cells > MAX_TOTAL_CELLS {
        return Err(Error::ResourceLimit { needed: cells, limit: MAX_TOTAL_CELLS });
    }

    let mut tables = Vec::with_capacity(finite.len());
    for (axis, &sidx) in axes.iter().zip(&finite) {
        let step = &s.steps()[sidx].measurement;
        let mut per_value = Vec::new();
        for &v in step.observable.distinct_values() {
            let mut table = Vec::with_capacity(axis.len());
            for i in 0..axis.len() {
                table.push(step.pointer.amplitude(axis.point(i) - v)?);
            }
            per_value.push(table);
        }
        tables.push(per_value);
    }

    let delta: Vec<usize> = s
        .steps()
        .iter()
        .enumerate()
        .filter(|(_, st)| st.measurement.pointer.is_delta())
        .map(|(i, _)| i)
        .collect();

    let mut groups: BTreeMap<(usize, Vec<usize>), Vec<Term>> = BTreeMap::new();
    for (n, state) in postselect_set(s).iter().enumerate() {
        let (labels, amps) = raw_path_amplitudes(s, state);
        for (label, amp) in labels.iter().zip(&amps) {
            if amp.norm() == 0.0 {
                continue;
            }
            let class: Vec<usize> = delta
                .iter()
                .map(|&d| s.steps()[d].measurement.observable.membership()[label[d]])
                .collect();
            let value_ids: Vec<usize> = finite
                .iter()
                .map(|&fidx| s.steps()[fidx].measurement.observable.membership()[label[fidx]])
                .collect();
            groups.entry((n, class)).or_default().push(Term { amp: *amp, value_ids });
        }
    }

    Ok(DistributionPlan { axes, tables, groups: groups.into_values().collect() })
}

/// Adds `|sum_p coeff_p * prod_axes table|^2` for rows `row_range` of axis 0
/// into `out` (a slice starting at the first covered row).
fn accumulate_rows(
    tables: &[Vec<Vec<f64>>],
    lens: &[usize],
    terms: &[Term],
    rows: core::ops::Range<usize>,
    out: &mut [f64],
) {
    let inner_stride: usize = lens[1..].iter().product();
    let mut coeffs = vec![ZERO; terms.len()];
    for (local, row) in rows.enumerate() {
        for (c, t) in coeffs.iter_mut().zip(terms) {
            *c = t.amp * tables[0][t.value_ids[0]][row];
        }
        if lens.len() == 1 {
            let s = coeffs.iter().fold(ZERO, |acc, c| acc + c);
            out[local] += s.norm_sqr();
        } else {
            accumulate_inner(tables, lens, terms, 1, &coeffs, &mut out[local * inner_stride..(local + 1) * inner_stride]);
        }
    }
}

fn accumulate_inner(
    tables: &[Vec<Vec<f64>>],
    lens: &[usize],
    terms: &[Term],
    axis: usize,
    coeffs: &[Complex64],
    out: &mut [f64],
) {
    let m = lens[axis];
    if axis + 1 == lens.len() {
        for i in 0..m {
            let table = &tables[axis];
            let mut s = ZERO;
            for (c, t) in coeffs.iter().zip(terms) {
                s += c * table[t.value_ids[axis]][i];
            }
            out[i] += s.norm_sqr();
        }
        return;
    }
    let stride: usize = lens[axis + 1..].iter().product();
    let mut sub = vec![ZERO; coeffs.len()];
    for i in 0..m {
        for ((sc, c), t) in sub.iter_mut().zip(coeffs).zip(terms) {
            *sc = c * tables[axis][t.value_ids[axis]][i];
        }
        accumulate_inner(tables, lens, terms, axis + 1, &sub, &mut out[i * stride..(i + 1) * stride]);
    }
}

fn eval_density(plan: &DistributionPlan, threads: usize) -> Vec<f64> {
    let lens: Vec<usize> = plan.axes.iter().map(Axis::len).collect();
    let cells: usize = lens.iter().product();
    let mut density = vec![0.0f64; cells];

    #[cfg(feature = "std")]
    if threads > 1 && cells >= (1 << 16) && lens[0] >= 2 * threads {
        let rows = lens[0];
        let inner_stride: usize = lens[1..].iter().product();
        let chunk_rows = rows.div_ceil(threads);
        std::thread::scope(|scope| {
            for (tidx, slab) in density.chunks_mut(chunk_rows * inner_stride).enumerate() {
                let lens = &lens;
                let plan = &plan;
                scope.spawn(move || {
                    let first = tidx * chunk_rows;
                    let count = slab.len() / inner_stride;
                    for terms in &plan.groups {
                        accumulate_rows(&plan.tables, lens, terms, first..first + count, slab);
                    }
                });
            }
        });
        return density;
    }
    #[cfg(not(feature = "std"))]
    let _ = threads;

    for terms in &plan.groups {
        accumulate_rows(&plan.tables, &lens, terms, 0..lens[0], &mut density);
    }
    density
}

/// Conditional reading density on automatically chosen grids.
pub fn reading_distribution(s: &Scenario) -> Result<ReadingDistribution> {
    reading_distribution_with(s, &GridOptions::default(), 1)
}

/// Conditional reading density with grid overrides and a thread cap.
pub fn reading_distribution_with(
    s: &Scenario,
    opts: &GridOptions,
    threads: usize,
) -> Result<ReadingDistribution> {
    let axes = auto_axes(s, opts)?;
    reading_distribution_on(s, &axes, threads)
}

/// Grids matching each finite-width measurement step, using the default rule.
pub fn auto_axes(s: &Scenario, opts: &GridOptions) -> Result<Vec<Axis>> {
    finite_step_indices(s)
        .iter()
        .map(|&i| {
            let m = &s.steps()[i].measurement;
            default_axis(m.observable.distinct_values(), &m.pointer, opts)
        })
        .collect()
}

/// Conditional reading density evaluated on caller-provided grids.
pub fn reading_distribution_on(
    s: &Scenario,
    axes: &[Axis],
    threads: usize,
) -> Result<ReadingDistribution> {
    let plan = plan_distribution(s, axes.to_vec())?;
    let density = eval_density(&plan, threads.max(1));
    let mut dist = ReadingDistribution::new(plan.axes, density)?;
    dist.normalize()?;
    Ok(dist)
}

/// Joint amplitude of one reading per finite-width pointer, toward the pure
/// post-selected state.
pub fn reading_amplitude(s: &Scenario, readings: &[f64]) -> Result<Complex64> {
    let finite = finite_step_indices(s);
    if finite.len() != s.steps().len() {
        return Err(Error::DeltaNotEvaluable);
    }
    if readings.len() != finite.len() {
        return Err(Error::DimensionMismatch { expected: finite.len(), got: readings.len() });
    }
    let state = s.postselect_state()?;
    let (labels, amps) = raw_path_amplitudes(s, state);
    let mut total = ZERO;
    for (label, amp) in labels.iter().zip(&amps) {
        let mut factor = 1.0;
        for (coord, &sidx) in readings.iter().zip(&finite) {
            let m = &s.steps()[sidx].measurement;
            factor *= m.pointer.amplitude(coord - m.observable.value_of(label[sidx]))?;
        }
        total += amp * factor;
    }
    Ok(total)
}

/// First moment of the marginal on the chosen pointer coordinate.
pub fn mean_reading(s: &Scenario, which_pointer: usize) -> Result<f64> {
    mean_reading_with(s, which_pointer, &GridOptions::default())
}

pub fn mean_reading_with(s: &Scenario, which_pointer: usize, opts: &GridOptions) -> Result<f64> {
    let dist = reading_distribution_with(s, opts, 1)?;
    if which_pointer >= dist.axes().len() {
        return Err(Error::Unsupported { reason: "pointer index out of range" });
    }
    dist.mean(which_pointer)
}

/// A complex weak value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValue(pub Complex64);

impl WeakValue {
    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }
}

/// Eigenvalue-weighted sum of the normalized path amplitudes,
/// `sum_l B_l alpha_l`, with one eigenvalue per path.
pub fn weak_value(paths: &PathAmplitudeSet, eigenvalues: &[f64]) -> Result<WeakValue> {
    if eigenvalues.len() != paths.len() {
        return Err(Error::DimensionMismatch { expected: paths.len(), got: eigenvalues.len() });
    }
    let mut total = ZERO;
    for (alpha, b) in paths.normalized().iter().zip(eigenvalues) {
        total += alpha * b;
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(WeakValue(total))
}

/// Weak value of the observable measured by the single step of `s`.
pub fn scenario_weak_value(s: &Scenario) -> Result<WeakValue> {
    if s.steps().len() != 1 {
        return Err(Error::Unsupported {
            reason: "scenario weak value needs exactly one measurement step",
        });
    }
    let paths = crate::pathways::path_amplitudes(s)?;
    let obs = &s.steps()[0].measurement.observable;
    let eigenvalues: Vec<f64> =
        paths.labels().iter().map(|label| obs.value_of(label[0])).collect();
    weak_value(&paths, &eigenvalues)
}

/// Leading-order expansion of a broad-pointer reading density: the unshifted
/// baseline and the first-order correction.
#[derive(Debug, Clone)]
pub struct WeakExpansion {
    /// `|G(f)|^2 |sum A|^2`, not normalized.
    pub baseline: ReadingDistribution,
    /// Signed first-order change on the same axis.
    pub correction: Vec<f64>,
}

/// Expands the exact single-pointer density to first order in the pointer
/// shifts. Valid when the width greatly exceeds the eigenvalue spread; the
/// remainder is second order in `spread / width`.
pub fn weak_expansion(s: &Scenario, pointer: usize) -> Result<WeakExpansion> {
    let finite = finite_step_indices(s);
    if finite.len() != 1 || s.steps().len() != 1 || pointer != 0 {
        return Err(Error::Unsupported {
            reason: "weak expansion needs exactly one finite-width measurement",
        });
    }
    let m = &s.steps()[0].measurement;
    if m.pointer.is_delta() {
        return Err(Error::ProfileUnsupported { required: "gaussian or rectangular" });
    }
    let state = s.postselect_state()?;
    let (labels, amps) = raw_path_amplitudes(s, state);
    let total: Complex64 = amps.iter().fold(ZERO, |acc, a| acc + a);
    let weighted: Complex64 = labels
        .iter()
        .zip(&amps)
        .map(|(label, a)| a * m.observable.value_of(label[0]))
        .fold(ZERO, |acc, z| acc + z);

    let axis = default_axis(m.observable.distinct_values(), &m.pointer, &GridOptions::default())?;
    let mut baseline = Vec::with_capacity(axis.len());
    let mut g_sq = Vec::with_capacity(axis.len());
    for i in 0..axis.len() {
        let g = m.pointer.amplitude(axis.point(i))?;
        g_sq.push(g * g);
        baseline.push(g * g * total.norm_sqr());
    }

    let coupling = (weighted * total.conj()).re;
    let mut correction = Vec::with_capacity(axis.len());
    match m.pointer.profile() {
        Profile::Gaussian => {
            let df2 = m.pointer.width() * m.pointer.width();
            for i in 0..axis.len() {
                let f = axis.point(i);
                let dg_sq = -(4.0 * f / df2) * g_sq[i];
                correction.push(-dg_sq * coupling);
            }
        }
        Profile::Rectangular => {
            // central difference puts the shift correction at the window edges
            let h = axis.step();
            for i in 0..axis.len() {
                let up = if i + 1 < axis.len() { g_sq[i + 1] } else { 0.0 };
                let down = if i > 0 { g_sq[i - 1] } else { 0.0 };
                correction.push(-(up - down) / (2.0 * h) * coupling);
            }
        }
        Profile::Delta => unreachable!("checked above"),
    }

    Ok(WeakExpansion {
        baseline: ReadingDistribution::new(vec![axis], baseline)?,
        correction,
    })
}

/// Mean final momentum of a Gaussian pointer, the first moment of the
/// momentum-space density `|FT of Psi|^2` marginal.
///
/// Evaluated through the equivalent quadrature `Im Int Psi* dPsi/df` over the
/// position grid, which is the same moment by Parseval's identity. In the
/// broad-pointer limit it approaches `(2 / width^2) Im(weak value)`.
pub fn mean_momentum(s: &Scenario, pointer: usize) -> Result<f64> {
    let finite = finite_step_indices(s);
    if pointer >= finite.len() {
        return Err(Error::Unsupported { reason: "pointer index out of range" });
    }
    let target_step = &s.steps()[finite[pointer]].measurement;
    if target_step.pointer.profile() != Profile::Gaussian {
        return Err(Error::ProfileUnsupported { required: "gaussian" });
    }
    let axes = auto_axes(s, &GridOptions::default())?;
    let plan = plan_distribution(s, axes)?;

    // pairwise 1-D integrals per axis: overlap and derivative-overlap
    let naxes = plan.axes.len();
    let mut overlap: Vec<Vec<Vec<f64>>> = Vec::with_capacity(naxes);
    let mut doverlap: Vec<Vec<Vec<f64>>> = Vec::with_capacity(naxes);
    for (a, axis) in plan.axes.iter().enumerate() {
        let step = &s.steps()[finite[a]].measurement;
        let values = step.observable.distinct_values();
        let nv = values.len();
        let mut o = vec![vec![0.0; nv]; nv];
        let mut d = vec![vec![0.0; nv]; nv];
        let df2 = step.pointer.width() * step.pointer.width();
        for x in 0..nv {
            for y in 0..nv {
                let mut acc_o = 0.0;
                let mut acc_d = 0.0;
                for i in 0..axis.len() {
                    let f = axis.point(i);
                    let gx = plan.tables[a][x][i];
                    let gy = plan.tables[a][y][i];
                    let w = axis.weight(i);
                    acc_o += w * gx * gy;
                    if a == pointer {
                        // d/df G(f - v_y) for the Gaussian profile
                        let dgy = -(2.0 * (f - values[y]) / df2) * gy;
                        acc_d += w * gx * dgy;
                    }
                }
                o[x][y] = acc_o * axis.step();
                d[x][y] = acc_d * axis.step();
            }
        }
        overlap.push(o);
        doverlap.push(d);
    }

    let mut numerator = 0.0; // Im of Int Psi* dPsi
    let mut denominator = 0.0;
    for terms in &plan.groups {
        for p in terms {
            for q in terms {
                let coeff = p.amp.conj() * q.amp;
                let mut prod_o = 1.0;
                let mut prod_d = 1.0;
                for a in 0..naxes {
                    let x = p.value_ids[a];
                    let y = q.value_ids[a];
                    prod_o *= overlap[a][x][y];
                    prod_d *= if a == pointer { doverlap[a][x][y] } else { overlap[a][x][y] };
                }
                numerator += (coeff * prod_d).im;
                denominator += (coeff * prod_o).re;
            }
        }
    }
    if denominator <= 1e-300 {
        return Err(Error::ZeroTotalWeight);
    }
    Ok(numerator / denominator)
}

/// Decomposition of rectangular-window arrival probabilities into a mixture of
/// the interfering and which-way intensities.
#[derive(Debug, Clone)]
pub struct RectangularMixture {
    /// Fitted mixture weight of the which-way intensities.
    pub beta: f64,
    /// Largest deviation of the two-term fit from the exact probabilities.
    pub residual: f64,
    /// Fraction of the window in which the two shifted profiles do not
    /// overlap, `|B2 - B1| / width`; equals the fitted beta.
    pub overlap_fraction: f64,
    /// Exact arrival probabilities per final state.
    pub exact: Vec<f64>,
    pub interference: Vec<f64>,
    pub no_interference: Vec<f64>,
}

/// Exact rectangular-pointer arrival probabilities for a two-level scenario,
/// fitted as `beta * W(no interference) + (1 - beta) * W(interference)`.
///
/// The probabilities are integrated region by region: the window splits into
/// two exclusive stretches of length `|B2 - B1|` and one overlap stretch where
/// both paths contribute coherently, and the integrand is constant on each.
pub fn rectangular_mixture_weight(s: &Scenario) -> Result<RectangularMixture> {
    if s.dim() != 2 {
        return Err(Error::Unsupported { reason: "mixture decomposition needs a two-level system" });
    }
    if s.steps().len() != 1 {
        return Err(Error::Unsupported { reason: "mixture decomposition needs exactly one step" });
    }
    let m = &s.steps()[0].measurement;
    if m.pointer.profile() != Profile::Rectangular {
        return Err(Error::ProfileUnsupported { required: "rectangular" });
    }
    let values = m.observable.distinct_values();
    if values.len() != 2 {
        return Err(Error::Unsupported { reason: "mixture decomposition needs two distinct eigenvalues" });
    }
    let gap = (values[1] - values[0]).abs();
    let width = m.pointer.width();
    if width <= gap {
        return Err(Error::WidthTooSmall { width, needed: gap });
    }

    let basis = crate::hilbert::complete_basis(s.postselect_state()?);
    let g2 = 1.0 / width; // |G|^2 inside the window
    let mut exact = Vec::with_capacity(basis.len());
    let mut interference = Vec::with_capacity(basis.len());
    let mut no_interference = Vec::with_capacity(basis.len());
    for state in &basis {
        let (labels, amps) = raw_path_amplitudes(s, state);
        // coherent amplitude per distinct value
        let mut by_value = [ZERO; 2];
        for (label, amp) in labels.iter().zip(&amps) {
            by_value[m.observable.membership()[label[0]]] += amp;
        }
        let both = by_value[0] + by_value[1];
        // two exclusive stretches of length `gap`, overlap of `width - gap`
        let w = g2
            * (gap * by_value[0].norm_sqr()
                + gap * by_value[1].norm_sqr()
                + (width - gap) * both.norm_sqr());
        exact.push(w);
        interference.push(both.norm_sqr());
        no_interference.push(by_value[0].norm_sqr() + by_value[1].norm_sqr());
    }

    let mut num = 0.0;
    let mut den = 0.0;
    for ((w, int), noint) in exact.iter().zip(&interference).zip(&no_interference) {
        let d = w - int;
        let e = noint - int;
        num += d * e;
        den += e * e;
    }
    let beta = if den > 1e-300 { num / den } else { 0.0 };
    let mut residual: f64 = 0.0;
    for ((w, int), noint) in exact.iter().zip(&interference).zip(&no_interference) {
        residual = residual.max((w - (beta * noint + (1.0 - beta) * int)).abs());
    }
    Ok(RectangularMixture {
        beta,
        residual,
        overlap_fraction: gap / width,
        exact,
        interference,
        no_interference,
    })
}

/// Builds the post-selected state that makes the weak value of the measured
/// observable equal `target`, given a choice of normalized path amplitudes.
///
/// `alpha` must sum to one and satisfy `sum_l B_l alpha_l = target`; the
/// returned state is exact up to round-off, so the weak value round-trips to
/// the target.
pub fn design_postselection(
    initial: &StateVector,
    evolution_before: &Unitary,
    evolution_after: &Unitary,
    observable: &SpectralDecomposition,
    target: Complex64,
    alpha: &[Complex64],
) -> Result<StateVector> {
    let n = observable.dim();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    if initial.dim() != n || evolution_before.dim() != n || evolution_after.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: initial.dim() });
    }
    let alpha_sum: Complex64 = alpha.iter().sum();
    let scale: f64 = alpha.iter().map(|a| a.norm()).fold(1.0, f64::max);
    if (alpha_sum - Complex64::new(1.0, 0.0)).norm() > 1e-9 * scale {
        return Err(Error::AlphaConstraintViolated { which: "amplitudes must sum to one" });
    }
    let weighted: Complex64 = alpha
        .iter()
        .enumerate()
        .map(|(l, a)| a * observable.value_of(l))
        .sum();
    let value_scale: f64 =
        observable.distinct_values().iter().map(|v| v.abs()).fold(1.0, f64::max);
    if (weighted - target).norm() > 1e-9 * scale * value_scale {
        return Err(Error::AlphaConstraintViolated {
            which: "eigenvalue-weighted sum must equal the target",
        });
    }
    if !alpha.iter().any(|a| a.norm() > 0.0) {
        return Err(Error::ZeroReferenceAlpha);
    }

    let at_t1 = evolution_before.apply(initial);
    let mut components = Vec::with_capacity(n);
    for (l, b) in observable.eigenvectors().iter().enumerate() {
        let g = inner(b.amps(), at_t1.amps());
        if g.norm() <= 1e-12 {
            return Err(Error::VanishingOverlap { index: l });
        }
        components.push(alpha[l].conj() / g.conj());
    }
    // |c(t1)> = sum_l <b_l|c(t1)> |b_l>
    let mut amps = vec![ZERO; n];
    for (component, b) in components.iter().zip(observable.eigenvectors()) {
        for (a, bi) in amps.iter_mut().zip(b.amps()) {
            *a += component * bi;
        }
    }
    let c_t1 = StateVector::normalized(amps)?;
    Ok(evolution_after.apply(&c_t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Operator;
    use crate::pathways::{MeasurementStep, Postselection, Scenario, ScenarioStep};
    use crate::scenarios;
    use crate::testing;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_peak_value() {
        let p = PointerSpec::gaussian(1.0).unwrap();
        let expect = (core::f64::consts::PI / 2.0).powf(-0.25);
        assert!((p.amplitude(0.0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn rectangular_window_vanishes_outside() {
        let p = PointerSpec::rectangular(2.0).unwrap();
        assert_eq!(p.amplitude(0.6 * 2.0).unwrap(), 0.0);
        assert!((p.amplitude(0.0).unwrap() - (1.0 / 2.0f64.sqrt())).abs() < 1e-14);
        assert!(p.amplitude(1.0).unwrap() > 0.0); // inclusive edge
    }

    #[test]
    fn profiles_have_unit_squared_norm() {
        for width in [0.1, 1.0, 10.0] {
            let p = PointerSpec::gaussian(width).unwrap();
            let axis = default_axis(&[0.0], &p, &GridOptions::default()).unwrap();
            let mut total = 0.0;
            for i in 0..axis.len() {
                let g = p.amplitude(axis.point(i)).unwrap();
                total += g * g * axis.weight(i);
            }
            total *= axis.step();
            assert!((total - 1.0).abs() < 1e-9, "width {width}: integral {total}");
        }
    }

    #[test]
    fn delta_profile_is_not_evaluable() {
        assert!(matches!(PointerSpec::delta().amplitude(0.0), Err(Error::DeltaNotEvaluable)));
    }

    #[test]
    fn reading_amplitude_is_the_profile_weighted_path_sum() {
        let built = scenarios::build_double_slit();
        let dark = built.scenario.with_postselect(StateVector::basis_state(2, 1)).unwrap();
        let m = &dark.steps()[0].measurement;
        let p = m.pointer.clone();
        let (labels, amps) = raw_path_amplitudes(&dark, dark.postselect_state().unwrap());
        for f in [-0.5, 0.0, 0.4, 1.3] {
            let mut expect = ZERO;
            for (label, amp) in labels.iter().zip(&amps) {
                expect += amp * p.amplitude(f - m.observable.value_of(label[0])).unwrap();
            }
            let got = reading_amplitude(&dark, &[f]).unwrap();
            assert!((got - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_projectors_never_shift_both_pointers() {
        // two probes on |b1><b1| and |b2><b2| at the same time
        let built = scenarios::build_double_slit();
        let b = built.scenario.steps()[0].measurement.observable.clone();
        let b1 = b.eigenvectors()[0].clone();
        let b2 = b.eigenvectors()[1].clone();
        let proj1 = SpectralDecomposition::from_eigensystem(
            vec![b1.clone(), b2.clone()],
            vec![1.0, 0.0],
            1e-9,
        )
        .unwrap();
        let proj2 =
            SpectralDecomposition::from_eigensystem(vec![b1, b2], vec![0.0, 1.0], 1e-9).unwrap();
        let width = 4.0;
        let s = Scenario::new(
            built.scenario.initial().clone(),
            vec![
                ScenarioStep {
                    evolution: Unitary::identity(2),
                    measurement: MeasurementStep {
                        observable: proj1,
                        pointer: PointerSpec::gaussian(width).unwrap(),
                    },
                },
                ScenarioStep {
                    evolution: Unitary::identity(2),
                    measurement: MeasurementStep {
                        observable: proj2,
                        pointer: PointerSpec::gaussian(width).unwrap(),
                    },
                },
            ],
            Unitary::identity(2),
            Postselection::State(StateVector::basis_state(2, 1)),
        )
        .unwrap();
        // coefficient of G(f-1)G(f'-1): paths shifted in both steps
        let (labels, amps) = raw_path_amplitudes(&s, s.postselect_state().unwrap());
        let mut both_shifted = ZERO;
        for (label, amp) in labels.iter().zip(&amps) {
            let v1 = s.steps()[0].measurement.observable.value_of(label[0]);
            let v2 = s.steps()[1].measurement.observable.value_of(label[1]);
            if v1 == 1.0 && v2 == 1.0 {
                both_shifted += amp;
            }
        }
        assert_eq!(both_shifted, ZERO);
        // but the joint density carries an interference cross term
        let psi = reading_amplitude(&s, &[0.5, 0.5]).unwrap();
        let mut incoherent = 0.0;
        for (label, amp) in labels.iter().zip(&amps) {
            let g1 = s.steps()[0]
                .measurement
                .pointer
                .amplitude(0.5 - s.steps()[0].measurement.observable.value_of(label[0]))
                .unwrap();
            let g2 = s.steps()[1]
                .measurement
                .pointer
                .amplitude(0.5 - s.steps()[1].measurement.observable.value_of(label[1]))
                .unwrap();
            incoherent += (amp * g1 * g2).norm_sqr();
        }
        let cross = psi.norm_sqr() - incoherent;
        assert!(cross.abs() > 1e-6, "cross term {cross} should not vanish");
    }

    #[test]
    fn single_path_density_is_a_pure_translate() {
        let basis = vec![StateVector::basis_state(2, 0), StateVector::basis_state(2, 1)];
        let dec = SpectralDecomposition::from_eigensystem(basis, vec![0.0, 1.0], 1e-9).unwrap();
        let s = Scenario::new(
            StateVector::basis_state(2, 0),
            vec![ScenarioStep {
                evolution: Unitary::identity(2),
                measurement: MeasurementStep {
                    observable: dec,
                    pointer: PointerSpec::gaussian(0.7).unwrap(),
                },
            }],
            Unitary::identity(2),
            Postselection::State(StateVector::basis_state(2, 0)),
        )
        .unwrap();
        let p = PointerSpec::gaussian(0.7).unwrap();
        for f in [-0.3, 0.0, 0.5] {
            let psi = reading_amplitude(&s, &[f]).unwrap();
            let g = p.amplitude(f).unwrap();
            assert!((psi.norm_sqr() - g * g).abs() < 1e-14);
        }
    }

    #[test]
    fn crossover_branch_weights_and_means() {
        // weak first pointer, accurate second pointer on the three-box system
        let df = 10.0;
        let dfp = 0.1;
        let s = scenarios::three_box_sequential(df, dfp).unwrap();
        let dist = reading_distribution(&s).unwrap();
        // branch 1: second reading near 0; branch 2: near 1
        let b1 = dist.region_stats(1, -0.5, 0.5).unwrap();
        let b2 = dist.region_stats(1, 0.5, 1.5).unwrap();
        let ratio = b2.weight / b1.weight;
        let expect = 2.0 * (1.0 - (-1.0 / (2.0 * df * df)).exp());
        assert!((ratio - expect).abs() < 1e-4, "ratio {ratio} vs {expect}");
        assert!((ratio - 1.0 / (df * df)).abs() < 0.05 / (df * df));
        assert!(b1.means[0].abs() < 1e-9);
        assert!((b2.means[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn accurate_pointer_shows_two_spikes_with_branch_weights() {
        let built = scenarios::build_double_slit();
        let dark = built
            .scenario
            .with_postselect(StateVector::basis_state(2, 1))
            .unwrap()
            .with_pointer(0, PointerSpec::gaussian(0.01).unwrap())
            .unwrap();
        let dist = reading_distribution(&dark).unwrap();
        let spike0 = dist.region_stats(0, -0.03, 0.03).unwrap();
        let spike1 = dist.region_stats(0, 0.97, 1.03).unwrap();
        assert!((spike0.weight - 0.5).abs() < 1e-6);
        assert!((spike1.weight - 0.5).abs() < 1e-6);
        assert!((dist.mean(0).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_total_weight_is_reported() {
        let basis = vec![StateVector::basis_state(2, 0), StateVector::basis_state(2, 1)];
        let dec = SpectralDecomposition::from_eigensystem(basis, vec![0.0, 1.0], 1e-9).unwrap();
        let s = Scenario::new(
            StateVector::basis_state(2, 0),
            vec![ScenarioStep {
                evolution: Unitary::identity(2),
                measurement: MeasurementStep {
                    observable: dec,
                    pointer: PointerSpec::gaussian(1.0).unwrap(),
                },
            }],
            Unitary::identity(2),
            Postselection::State(StateVector::basis_state(2, 1)),
        )
        .unwrap();
        assert!(matches!(reading_distribution(&s), Err(Error::ZeroTotalWeight)));
    }

    #[test]
    fn weak_mean_reading_of_three_box_projector_is_one() {
        let built = scenarios::build_three_box();
        let s = built.scenario.with_pointer(0, PointerSpec::gaussian(10.0).unwrap()).unwrap();
        // the three-box amplitudes collapse the density onto a single
        // translated profile, so the mean is exact at any width
        assert!((mean_reading(&s, 0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn crossover_mean_vanishes_for_broad_first_pointer() {
        // the accurate second pointer is held at 0.1 while the first broadens
        let mut previous = f64::INFINITY;
        for df in [5.0, 10.0, 20.0] {
            let s = scenarios::three_box_sequential(df, 0.1).unwrap();
            let mean = mean_reading(&s, 0).unwrap().abs();
            assert!(mean <= 2.0 / (df * df), "width {df}: mean {mean}");
            assert!(mean < previous, "mean should decay with width");
            previous = mean;
        }
    }

    #[test]
    fn weak_limit_error_decays_second_order_across_widths() {
        let mut rng = crate::rng::CounterRng::new(1234);
        // fixed bright scenario: uniform three-path transition with unequal
        // eigenvalues so the finite-width correction is nonzero
        let basis = testing::random_basis(3, &mut rng);
        let dec = SpectralDecomposition::from_eigensystem(basis, vec![0.0, 0.7, 1.6], 1e-9)
            .unwrap();
        let s = Scenario::new(
            testing::random_state(3, &mut rng),
            vec![ScenarioStep {
                evolution: testing::random_unitary(3, &mut rng),
                measurement: MeasurementStep {
                    observable: dec,
                    pointer: PointerSpec::gaussian(5.0).unwrap(),
                },
            }],
            testing::random_unitary(3, &mut rng),
            Postselection::State(testing::random_state(3, &mut rng)),
        )
        .unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        let mut errors = Vec::new();
        for df in [5.0, 10.0, 20.0] {
            let sw = s.with_pointer(0, PointerSpec::gaussian(df).unwrap()).unwrap();
            errors.push((mean_reading(&sw, 0).unwrap() - wv.re()).abs());
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((2.8..=5.2).contains(&ratio), "decay ratio {ratio} (errors {errors:?})");
        }
    }

    #[test]
    fn strong_limit_mean_matches_conditional_path_probability() {
        let mut rng = crate::rng::CounterRng::new(57);
        let dim = 3;
        let basis = testing::random_basis(dim, &mut rng);
        let dec =
            SpectralDecomposition::from_eigensystem(basis, vec![0.0, 1.0, 0.0], 1e-9).unwrap();
        let s = Scenario::new(
            testing::random_state(dim, &mut rng),
            vec![ScenarioStep {
                evolution: testing::random_unitary(dim, &mut rng),
                measurement: MeasurementStep {
                    observable: dec,
                    pointer: PointerSpec::gaussian(0.01).unwrap(),
                },
            }],
            testing::random_unitary(dim, &mut rng),
            Postselection::State(testing::random_state(dim, &mut rng)),
        )
        .unwrap();
        let mean = mean_reading(&s, 0).unwrap();
        let expect = crate::pathways::conditional_path_probability(&s, 1).unwrap();
        assert!((mean - expect).abs() < 1e-6, "mean {mean} vs path probability {expect}");
    }

    #[test]
    fn weak_values_of_bundled_observables() {
        let three = scenarios::build_three_box();
        let wv = scenario_weak_value(&three.scenario).unwrap();
        assert!((wv.0 - c(1.0, 0.0)).norm() < 1e-12);

        let bprime = three.observable("Bprime").unwrap().clone();
        let sp = three.scenario.with_step_observable(0, bprime).unwrap();
        let wv = scenario_weak_value(&sp).unwrap();
        assert!(wv.0.norm() < 1e-12);

        let cheshire = scenarios::build_cheshire();
        let bpp = cheshire.observable("Bpp").unwrap().clone();
        let s = cheshire.scenario.with_step_observable(0, bpp).unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        assert!((wv.0 - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_observable_has_unit_weak_value() {
        let built = scenarios::build_three_box();
        let ident = crate::pathways::spectral(&Operator::identity(3), 1e-9).unwrap();
        let s = built.scenario.with_step_observable(0, ident).unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        assert!((wv.0 - c(1.0, 0.0)).norm() < 1e-12);
    }

    /// Operator-route oracle: `<c|U2 B U1|a> / <c|U2 U1|a>`.
    fn weak_value_operator_route(s: &Scenario) -> Complex64 {
        let obs = s.steps()[0].measurement.observable.observable();
        let u1 = &s.steps()[0].evolution;
        let u2 = s.final_evolution();
        let a1 = u1.apply(s.initial());
        let c_state = s.postselect_state().unwrap();
        let num = inner(c_state.amps(), &u2.apply_raw(&obs.apply_raw(a1.amps())));
        let den = inner(c_state.amps(), u2.apply_raw(a1.amps()).as_slice());
        num / den
    }

    #[test]
    fn weak_value_matches_operator_route_on_random_scenarios() {
        let mut rng = crate::rng::CounterRng::new(91);
        let mut checked = 0;
        while checked < 6 {
            let dim = 2 + (rng.next_u64() % 3) as usize;
            let basis = testing::random_basis(dim, &mut rng);
            let values: Vec<f64> = (0..dim).map(|_| rng.next_in(-2.0, 2.0)).collect();
            let dec = SpectralDecomposition::from_eigensystem(basis, values, 1e-9).unwrap();
            let s = Scenario::new(
                testing::random_state(dim, &mut rng),
                vec![ScenarioStep {
                    evolution: testing::random_unitary(dim, &mut rng),
                    measurement: MeasurementStep {
                        observable: dec,
                        pointer: PointerSpec::gaussian(1.0).unwrap(),
                    },
                }],
                testing::random_unitary(dim, &mut rng),
                Postselection::State(testing::random_state(dim, &mut rng)),
            )
            .unwrap();
            let wv = match scenario_weak_value(&s) {
                Ok(wv) => wv,
                Err(Error::DarkFringe) => continue,
                Err(e) => panic!("unexpected error {e:?}"),
            };
            let oracle = weak_value_operator_route(&s);
            assert!((wv.0 - oracle).norm() < 1e-9, "{} vs oracle {}", wv.0, oracle);
            checked += 1;
        }
    }

    #[test]
    fn weak_expansion_tracks_the_exact_density() {
        let df = 20.0;
        let built = scenarios::build_three_box();
        let s = built.scenario.with_pointer(0, PointerSpec::gaussian(df).unwrap()).unwrap();
        let expansion = weak_expansion(&s, 0).unwrap();
        let axis = expansion.baseline.axes()[0].clone();
        // exact (unnormalized) density on the same axis
        let mut max_err: f64 = 0.0;
        let mut max_w0: f64 = 0.0;
        for i in 0..axis.len() {
            let f = axis.point(i);
            let exact = reading_amplitude(&s, &[f]).unwrap().norm_sqr();
            let approx = expansion.baseline.density()[i] + expansion.correction[i];
            max_err = max_err.max((exact - approx).abs());
            max_w0 = max_w0.max(expansion.baseline.density()[i]);
        }
        assert!(max_err / max_w0 <= 5.0 / (df * df), "relative error {}", max_err / max_w0);
    }

    #[test]
    fn weak_expansion_correction_vanishes_without_shifted_paths() {
        // single surviving path with eigenvalue zero
        let basis = vec![StateVector::basis_state(2, 0), StateVector::basis_state(2, 1)];
        let dec = SpectralDecomposition::from_eigensystem(basis, vec![0.0, 1.0], 1e-9).unwrap();
        let s = Scenario::new(
            StateVector::basis_state(2, 0),
            vec![ScenarioStep {
                evolution: Unitary::identity(2),
                measurement: MeasurementStep {
                    observable: dec,
                    pointer: PointerSpec::gaussian(5.0).unwrap(),
                },
            }],
            Unitary::identity(2),
            Postselection::State(StateVector::basis_state(2, 0)),
        )
        .unwrap();
        let expansion = weak_expansion(&s, 0).unwrap();
        assert!(expansion.correction.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn weak_expansion_moment_recovers_the_weak_value() {
        let built = scenarios::build_three_box();
        let s = built.scenario.with_pointer(0, PointerSpec::gaussian(12.0).unwrap()).unwrap();
        let expansion = weak_expansion(&s, 0).unwrap();
        let axis = expansion.baseline.axes()[0].clone();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..axis.len() {
            let w = expansion.baseline.density()[i] + expansion.correction[i];
            num += axis.weight(i) * w * axis.point(i);
            den += axis.weight(i) * w;
        }
        let moment = num / den;
        let wv = scenario_weak_value(&s).unwrap();
        assert!((moment - wv.re()).abs() < 1e-9, "moment {moment} vs {}", wv.re());
    }

    /// Discrete Fourier transform oracle for the momentum mean of a
    /// single-pointer scenario.
    fn dft_momentum_mean(s: &Scenario, k_max: f64, dk: f64) -> f64 {
        let axes = auto_axes(s, &GridOptions::default()).unwrap();
        let axis = &axes[0];
        let psi: Vec<Complex64> =
            (0..axis.len()).map(|i| reading_amplitude(s, &[axis.point(i)]).unwrap()).collect();
        let steps = (2.0 * k_max / dk) as usize + 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for m in 0..steps {
            let k = -k_max + dk * m as f64;
            let mut ft = ZERO;
            for (i, amp) in psi.iter().enumerate() {
                let phase = Complex64::new(0.0, -k * axis.point(i)).exp();
                ft += amp * phase;
            }
            let w = ft.norm_sqr() * axis.step() * axis.step();
            num += k * w;
            den += w;
        }
        num / den
    }

    fn designed_imaginary_weak_value_scenario(df: f64) -> Scenario {
        // sigma_z measured between designed states with weak value i
        let obs = crate::pathways::spectral(&Operator::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
        let initial = StateVector::from_reals(&[0.6, 0.8]).unwrap();
        let u1 = Unitary::identity(2);
        let u2 = Unitary::identity(2);
        // ascending eigenvalues (-1, 1): alpha = (1/2 - i/2, 1/2 + i/2) gives target i
        let alpha = [c(0.5, -0.5), c(0.5, 0.5)];
        let post =
            design_postselection(&initial, &u1, &u2, &obs, c(0.0, 1.0), &alpha).unwrap();
        Scenario::new(
            initial,
            vec![ScenarioStep {
                evolution: u1,
                measurement: MeasurementStep {
                    observable: obs,
                    pointer: PointerSpec::gaussian(df).unwrap(),
                },
            }],
            u2,
            Postselection::State(post),
        )
        .unwrap()
    }

    #[test]
    fn momentum_mean_vanishes_for_real_weak_values() {
        let built = scenarios::build_three_box();
        let s = built.scenario.with_pointer(0, PointerSpec::gaussian(10.0).unwrap()).unwrap();
        assert!(mean_momentum(&s, 0).unwrap().abs() < 1e-6);
    }

    #[test]
    fn momentum_signal_matches_dft_oracle_and_expected_scale() {
        let df = 10.0;
        let s = designed_imaginary_weak_value_scenario(df);
        let wv = scenario_weak_value(&s).unwrap();
        assert!((wv.0 - c(0.0, 1.0)).norm() < 1e-10);
        let got = mean_momentum(&s, 0).unwrap();
        let oracle = dft_momentum_mean(&s, 1.2, 0.002);
        assert!((got - oracle).abs() < 1e-4, "quadrature {got} vs dft {oracle}");
        let kappa = 2.0 / (df * df);
        assert!((got - kappa).abs() < 0.05 * kappa, "signal {got} vs kappa {kappa}");
    }

    #[test]
    fn momentum_signal_scales_inverse_square_in_width() {
        let s10 = designed_imaginary_weak_value_scenario(10.0);
        let s20 = designed_imaginary_weak_value_scenario(20.0);
        let ratio = mean_momentum(&s20, 0).unwrap() / mean_momentum(&s10, 0).unwrap();
        assert!((ratio - 0.25).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn rectangular_mixture_decomposes_exactly() {
        let built = scenarios::build_double_slit();
        let s = built.scenario.with_pointer(0, PointerSpec::rectangular(4.0).unwrap()).unwrap();
        let mix = rectangular_mixture_weight(&s).unwrap();
        assert!(mix.residual <= 1e-9);
        assert!((mix.beta - 0.25).abs() < 1e-12);
        assert!((mix.beta - mix.overlap_fraction).abs() < 1e-12);
        assert!((mix.exact[0] - 0.875).abs() < 1e-12);
        assert!((mix.exact[1] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn rectangular_mixture_limits() {
        let built = scenarios::build_double_slit();
        let wide =
            built.scenario.with_pointer(0, PointerSpec::rectangular(1e6).unwrap()).unwrap();
        let mix = rectangular_mixture_weight(&wide).unwrap();
        assert!(mix.beta < 2e-6);
        for (w, int) in mix.exact.iter().zip(&mix.interference) {
            assert!((w - int).abs() < 2e-6);
        }
        let narrow =
            built.scenario.with_pointer(0, PointerSpec::rectangular(1.0 + 1e-9).unwrap()).unwrap();
        let mix = rectangular_mixture_weight(&narrow).unwrap();
        assert!((mix.beta - 1.0).abs() < 1e-8);
        for (w, noint) in mix.exact.iter().zip(&mix.no_interference) {
            assert!((w - noint).abs() < 1e-8);
        }
        let too_narrow =
            built.scenario.with_pointer(0, PointerSpec::rectangular(0.5).unwrap()).unwrap();
        assert!(matches!(
            rectangular_mixture_weight(&too_narrow),
            Err(Error::WidthTooSmall { .. })
        ));
    }

    #[test]
    fn design_reaches_the_showcase_targets() {
        let obs = crate::pathways::spectral(&Operator::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
        let initial = StateVector::from_reals(&[0.6, 0.8]).unwrap();
        let u1 = Unitary::identity(2);
        let u2 = Unitary::identity(2);
        // ascending eigenvalues (-1, 1)
        let cases = [
            (c(100.0, 0.0), [c(-49.5, 0.0), c(50.5, 0.0)]),
            (c(0.0, -5.0), [c(0.5, 2.5), c(0.5, -2.5)]),
        ];
        for (target, alpha) in cases {
            let post = design_postselection(&initial, &u1, &u2, &obs, target, &alpha).unwrap();
            let s = Scenario::new(
                initial.clone(),
                vec![ScenarioStep {
                    evolution: u1.clone(),
                    measurement: MeasurementStep {
                        observable: obs.clone(),
                        pointer: PointerSpec::gaussian(1.0).unwrap(),
                    },
                }],
                u2.clone(),
                Postselection::State(post),
            )
            .unwrap();
            let wv = scenario_weak_value(&s).unwrap();
            assert!((wv.0 - target).norm() < 1e-8, "target {target} got {}", wv.0);
        }
    }

    #[test]
    fn design_single_path_target_aligns_with_the_eigenstate() {
        let mut rng = crate::rng::CounterRng::new(77);
        let obs = crate::pathways::spectral(&Operator::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
        let initial = StateVector::from_reals(&[0.6, 0.8]).unwrap();
        let u1 = testing::random_unitary(2, &mut rng);
        let u2 = testing::random_unitary(2, &mut rng);
        // target the ascending-first eigenvalue -1 with alpha = (1, 0)
        let alpha = [c(1.0, 0.0), c(0.0, 0.0)];
        let post =
            design_postselection(&initial, &u1, &u2, &obs, c(-1.0, 0.0), &alpha).unwrap();
        let evolved = u2.apply(&obs.eigenvectors()[0]);
        assert!((post.inner(&evolved).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn design_validates_constraints() {
        let obs = crate::pathways::spectral(&Operator::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
        let initial = StateVector::from_reals(&[0.6, 0.8]).unwrap();
        let u = Unitary::identity(2);
        let bad_sum = [c(0.7, 0.0), c(0.7, 0.0)];
        assert!(matches!(
            design_postselection(&initial, &u, &u, &obs, c(0.0, 0.0), &bad_sum),
            Err(Error::AlphaConstraintViolated { .. })
        ));
        let bad_target = [c(0.5, 0.0), c(0.5, 0.0)];
        assert!(matches!(
            design_postselection(&initial, &u, &u, &obs, c(3.0, 0.0), &bad_target),
            Err(Error::AlphaConstraintViolated { .. })
        ));
        // initial orthogonal to one eigenstate
        let aligned = StateVector::basis_state(2, 0);
        let alpha = [c(0.5, 0.0), c(0.5, 0.0)];
        assert!(matches!(
            design_postselection(&aligned, &u, &u, &obs, c(0.0, 0.0), &alpha),
            Err(Error::VanishingOverlap { .. })
        ));
    }
}
