//! Brute-force oracle: the system and every pointer evolve together in one
//! tensor-product space, and the joint reading density is read off the final
//! composite state.
//!
//! Pointers live on uniform grids whose spacing divides every eigenvalue
//! shift, so each probe coupling is an exact index translation and the
//! evolution stays unitary on the grid. The reduced description (path
//! amplitudes dressed with profile factors) must agree with this one
//! pointwise; the crate's tests lean on that equivalence.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hilbert::{norm_sq, StateVector, Unitary, ZERO};
use crate::pathways::{Postselection, Scenario, SpectralDecomposition};
use crate::pointers::{Axis, PointerSpec, ReadingDistribution};
use crate::rng::CounterRng;

/// Guard on the total number of composite amplitudes.
pub const COMPOSITE_DIM_LIMIT: usize = 1 << 24;

/// A pointer wavefunction sampled on a uniform grid, with zero margins wide
/// enough to absorb every eigenvalue shift.
#[derive(Debug, Clone)]
pub struct DiscretizedPointer {
    axis: Axis,
    amps: Vec<Complex64>,
}

impl DiscretizedPointer {
    /// Wraps explicit amplitudes (already including the `sqrt(h)` factor);
    /// they must carry unit total probability.
    pub fn new(axis: Axis, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != axis.len() {
            return Err(Error::DimensionMismatch { expected: axis.len(), got: amps.len() });
        }
        let norm = norm_sq(&amps);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { axis, amps })
    }

    /// Samples the pointer profile on a grid commensurate with the given
    /// eigenvalue shifts: the spacing divides every shift exactly, the profile
    /// is sampled out to its support (six widths for a Gaussian), and margins
    /// of exact zeros leave room for the largest shift.
    pub fn for_measurement(
        pointer: &PointerSpec,
        shifts: &[f64],
        max_points: usize,
    ) -> Result<Self> {
        let width = pointer.width();
        let sample_half = match pointer.profile() {
            crate::pointers::Profile::Gaussian => 6.0 * width,
            crate::pointers::Profile::Rectangular => 0.5 * width,
            crate::pointers::Profile::Delta => return Err(Error::DeltaNotEvaluable),
        };

        // rationalize the shifts to a common base spacing
        let mut base = None;
        'outer: for den in 1..=4096u64 {
            for &v in shifts {
                let scaled = v * den as f64;
                if (scaled - scaled.round()).abs() > 1e-9 * den as f64 {
                    continue 'outer;
                }
            }
            base = Some(1.0 / den as f64);
            break;
        }
        let base = base.ok_or(Error::ShiftNotCommensurate {
            value: shifts.iter().copied().fold(0.0, |a, b| if a == 0.0 { b } else { a }),
            spacing: 1.0 / 4096.0,
        })?;

        let max_shift = shifts.iter().map(|v| v.abs()).fold(0.0, f64::max);
        // finest subdivision of the base spacing that fits in max_points
        let needed_span = 2.0 * (sample_half + max_shift);
        let mut subdiv = ((max_points.saturating_sub(3)) as f64 * base / needed_span) as usize;
        subdiv = subdiv.min(1 << 16);
        if subdiv < 1 {
            let needed = (needed_span / base).ceil() as usize + 1;
            return Err(Error::ResourceLimit { needed, limit: max_points });
        }
        let h = base / subdiv as f64;

        let margin = (max_shift / h).round() as usize;
        let half_cells = (sample_half / h).ceil() as usize + margin;
        let len = 2 * half_cells + 1;
        let axis = Axis::new(-(half_cells as f64) * h, h, len)?;

        let mut amps = vec![ZERO; len];
        let sqrt_h = h.sqrt();
        for (i, amp) in amps.iter_mut().enumerate() {
            let f = axis.point(i);
            if f.abs() <= sample_half {
                *amp = Complex64::new(pointer.amplitude(f)? * sqrt_h, 0.0);
            }
        }
        let norm = norm_sq(&amps).sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self { axis, amps })
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }
}

/// The full system-plus-pointers state.
#[derive(Debug, Clone)]
pub struct CompositeState {
    system_dim: usize,
    axes: Vec<Axis>,
    /// Row major over `[system, pointer_0, pointer_1, ...]`.
    amps: Vec<Complex64>,
}

impl CompositeState {
    /// Product of the system state and the initial pointer wavefunctions.
    pub fn product(system: &StateVector, pointers: &[DiscretizedPointer]) -> Result<Self> {
        let mut grid_total = 1usize;
        for p in pointers {
            grid_total = grid_total
                .checked_mul(p.axis.len())
                .ok_or(Error::ResourceLimit { needed: usize::MAX, limit: COMPOSITE_DIM_LIMIT })?;
        }
        let total = grid_total
            .checked_mul(system.dim())
            .ok_or(Error::ResourceLimit { needed: usize::MAX, limit: COMPOSITE_DIM_LIMIT })?;
        if total > COMPOSITE_DIM_LIMIT {
            return Err(Error::ResourceLimit { needed: total, limit: COMPOSITE_DIM_LIMIT });
        }
        let mut grid_part = vec![Complex64::new(1.0, 0.0)];
        for p in pointers {
            let mut next = Vec::with_capacity(grid_part.len() * p.amps.len());
            for g in &grid_part {
                for a in &p.amps {
                    next.push(g * a);
                }
            }
            grid_part = next;
        }
        let mut amps = Vec::with_capacity(total);
        for sysamp in system.amps() {
            for g in &grid_part {
                amps.push(sysamp * g);
            }
        }
        Ok(Self {
            system_dim: system.dim(),
            axes: pointers.iter().map(|p| p.axis.clone()).collect(),
            amps,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sq(&self.amps).sqrt()
    }

    fn grid_cells(&self) -> usize {
        self.amps.len() / self.system_dim
    }

    /// Applies a unitary to the system factor.
    pub fn apply_system(&mut self, u: &Unitary) -> Result<()> {
        if u.dim() != self.system_dim {
            return Err(Error::DimensionMismatch { expected: self.system_dim, got: u.dim() });
        }
        let n = self.system_dim;
        let r = self.grid_cells();
        let mut out = vec![ZERO; self.amps.len()];
        for i in 0..n {
            for j in 0..n {
                let uij = u.operator().get(i, j);
                if uij == ZERO {
                    continue;
                }
                let src = &self.amps[j * r..(j + 1) * r];
                let dst = &mut out[i * r..(i + 1) * r];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += uij * s;
                }
            }
        }
        self.amps = out;
        Ok(())
    }
}

/// Entangles pointer `pointer_index` with the system: in the eigenbasis of
/// `observable`, the component with clustered eigenvalue `B` has its pointer
/// factor translated by `B`, which must be an exact number of grid cells.
pub fn couple(
    state: &CompositeState,
    observable: &SpectralDecomposition,
    pointer_index: usize,
) -> Result<CompositeState> {
    let mut next = state.clone();
    couple_in_place(&mut next, observable, pointer_index)?;
    Ok(next)
}

fn couple_in_place(
    state: &mut CompositeState,
    observable: &SpectralDecomposition,
    pointer_index: usize,
) -> Result<()> {
    let n = state.system_dim;
    if observable.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: observable.dim() });
    }
    if pointer_index >= state.axes.len() {
        return Err(Error::Unsupported { reason: "pointer index out of range" });
    }
    let axis = state.axes[pointer_index].clone();
    let h = axis.step();
    let mut cell_shifts = Vec::with_capacity(n);
    for l in 0..n {
        let v = observable.value_of(l);
        let cells = v / h;
        if (v - cells.round() * h).abs() > 1e-9 {
            return Err(Error::ShiftNotCommensurate { value: v, spacing: h });
        }
        cell_shifts.push(cells.round() as i64);
    }

    let r = state.grid_cells();
    // into the eigenbasis: b[l] = sum_j conj(V[j][l]) x[j]
    let basis = observable.eigenvectors();
    let mut in_basis = vec![ZERO; state.amps.len()];
    for l in 0..n {
        for j in 0..n {
            let w = basis[l].amps()[j].conj();
            if w == ZERO {
                continue;
            }
            let src = &state.amps[j * r..(j + 1) * r];
            let dst = &mut in_basis[l * r..(l + 1) * r];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }

    // shift each eigencomponent along the pointer axis
    let len_k: usize = axis.len();
    let stride_k: usize = state.axes[pointer_index + 1..].iter().map(Axis::len).product();
    let block = len_k * stride_k;
    let mut line = vec![ZERO; len_k];
    for (l, &shift) in cell_shifts.iter().enumerate() {
        if shift == 0 {
            continue;
        }
        let slice = &mut in_basis[l * r..(l + 1) * r];
        for outer in 0..r / block {
            for inner in 0..stride_k {
                let base = outer * block + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = slice[base + i * stride_k];
                }
                for (i, v) in line.iter().enumerate() {
                    let target = i as i64 + shift;
                    if !(0..len_k as i64).contains(&target) {
                        if *v != ZERO {
                            return Err(Error::ShiftOffGrid { cells: shift });
                        }
                        continue;
                    }
                    slice[base + target as usize * stride_k] = *v;
                }
                // cells the shift vacated
                let vacated = if shift > 0 { 0..shift as usize } else { (len_k as i64 + shift) as usize..len_k };
                for i in vacated {
                    slice[base + i * stride_k] = ZERO;
                }
            }
        }
    }

    // back to the computational basis: x[j] = sum_l V[j][l] b[l]
    let mut out = vec![ZERO; state.amps.len()];
    for j in 0..n {
        for l in 0..n {
            let w = basis[l].amps()[j];
            if w == ZERO {
                continue;
            }
            let src = &in_basis[l * r..(l + 1) * r];
            let dst = &mut out[j * r..(j + 1) * r];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    state.amps = out;
    Ok(())
}

/// Runs the interleaved evolutions and couplings of a scenario on the full
/// composite, one grid per measurement step.
pub fn evolve_composite(
    s: &Scenario,
    grids: &[DiscretizedPointer],
) -> Result<CompositeState> {
    if grids.len() != s.steps().len() {
        return Err(Error::DimensionMismatch { expected: s.steps().len(), got: grids.len() });
    }
    let mut state = CompositeState::product(s.initial(), grids)?;
    for (k, step) in s.steps().iter().enumerate() {
        state.apply_system(&step.evolution)?;
        couple_in_place(&mut state, &step.measurement.observable, k)?;
    }
    state.apply_system(s.final_evolution())?;
    Ok(state)
}

/// Default grids for every step of a scenario, from each step's pointer
/// profile and eigenvalue shifts.
pub fn default_grids(s: &Scenario, max_points: usize) -> Result<Vec<DiscretizedPointer>> {
    s.steps()
        .iter()
        .map(|step| {
            DiscretizedPointer::for_measurement(
                &step.measurement.pointer,
                step.measurement.observable.distinct_values(),
                max_points,
            )
        })
        .collect()
}

impl CompositeState {
    /// Joint reading density conditioned on the post-selection.
    pub fn select(&self, postselect: &Postselection) -> Result<ReadingDistribution> {
        let r = self.grid_cells();
        let n = self.system_dim;
        let cell_volume: f64 = self.axes.iter().map(Axis::step).product();
        let mut density = vec![0.0f64; r];
        let finals: Vec<&StateVector> = match postselect {
            Postselection::State(c) => vec![c],
            Postselection::Outcome { observable, value_index } => observable
                .eigenvectors()
                .iter()
                .zip(observable.membership())
                .filter(|(_, m)| *m == value_index)
                .map(|(v, _)| v)
                .collect(),
        };
        if finals.iter().any(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: finals[0].dim() });
        }
        let mut projected = vec![ZERO; r];
        for c in finals {
            projected.iter_mut().for_each(|z| *z = ZERO);
            for j in 0..n {
                let w = c.amps()[j].conj();
                if w == ZERO {
                    continue;
                }
                let src = &self.amps[j * r..(j + 1) * r];
                for (p, s) in projected.iter_mut().zip(src) {
                    *p += w * s;
                }
            }
            for (d, p) in density.iter_mut().zip(&projected) {
                *d += p.norm_sqr() / cell_volume;
            }
        }
        let mut dist = ReadingDistribution::new(self.axes.clone(), density)?;
        dist.normalize()?;
        Ok(dist)
    }

    /// Joint reading density summed over a complete final system basis.
    pub fn unselected_distribution(&self) -> Result<ReadingDistribution> {
        let r = self.grid_cells();
        let cell_volume: f64 = self.axes.iter().map(Axis::step).product();
        let mut density = vec![0.0f64; r];
        for j in 0..self.system_dim {
            let src = &self.amps[j * r..(j + 1) * r];
            for (d, s) in density.iter_mut().zip(src) {
                *d += s.norm_sqr() / cell_volume;
            }
        }
        let mut dist = ReadingDistribution::new(self.axes.clone(), density)?;
        dist.normalize()?;
        Ok(dist)
    }
}

/// Full composite run: evolve, post-select, normalize.
pub fn run_composite(
    s: &Scenario,
    grids: &[DiscretizedPointer],
) -> Result<ReadingDistribution> {
    let state = evolve_composite(s, grids)?;
    state.select(s.postselect())
}

/// One sampled trial: a reading per pointer coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub readings: Vec<f64>,
    pub postselected: bool,
}

/// Empirical means and their standard errors, one per pointer coordinate.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub count: usize,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Draws `count` readings from a normalized distribution by inverse-CDF
/// sampling on the grid, using the deterministic counter stream of `seed`.
pub fn sample_trials(
    dist: &ReadingDistribution,
    count: usize,
    seed: u64,
) -> Result<(Vec<TrialRecord>, SampleStats)> {
    if count == 0 {
        return Err(Error::Unsupported { reason: "sample count must be positive" });
    }
    let total = dist.integral();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm: total });
    }
    let axes = dist.axes();
    let cell_volume: f64 = axes.iter().map(Axis::step).product();
    let lens: Vec<usize> = axes.iter().map(Axis::len).collect();

    let mut cumulative = Vec::with_capacity(dist.density().len());
    let mut acc = 0.0;
    for (flat, d) in dist.density().iter().enumerate() {
        let mut w = cell_volume;
        let mut rest = flat;
        for a in (0..lens.len()).rev() {
            let i = rest % lens[a];
            rest /= lens[a];
            w *= axes[a].weight(i);
        }
        acc += d * w;
        cumulative.push(acc);
    }
    let grand = acc;

    let mut rng = CounterRng::new(seed);
    let mut records = Vec::with_capacity(count);
    let mut sums = vec![0.0f64; axes.len()];
    let mut sq_sums = vec![0.0f64; axes.len()];
    for _ in 0..count {
        let u = rng.next_f64() * grand;
        let cell = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        let mut readings = vec![0.0f64; axes.len()];
        let mut rest = cell;
        for a in (0..lens.len()).rev() {
            let i = rest % lens[a];
            rest /= lens[a];
            readings[a] = axes[a].point(i);
        }
        for (a, &x) in readings.iter().enumerate() {
            sums[a] += x;
            sq_sums[a] += x * x;
        }
        records.push(TrialRecord { readings, postselected: true });
    }

    let kf = count as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / kf).collect();
    let std_errors: Vec<f64> = sq_sums
        .iter()
        .zip(&means)
        .map(|(sq, m)| {
            if count < 2 {
                0.0
            } else {
                let var = (sq / kf - m * m).max(0.0) * kf / (kf - 1.0);
                (var / kf).sqrt()
            }
        })
        .collect();
    Ok((records, SampleStats { count, means, std_errors }))
}
