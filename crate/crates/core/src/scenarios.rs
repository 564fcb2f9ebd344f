//! Canonical scenarios: the double slit, the three-box arrangement, and the
//! two-qubit "Cheshire cat" setup, each with its bundle of named observables.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hilbert::{StateVector, Unitary};
use crate::pathways::{
    MeasurementStep, Postselection, Scenario, ScenarioStep, SpectralDecomposition,
};
use crate::pointers::PointerSpec;

/// Default clustering tolerance for builder observables.
const TOL: f64 = 1e-9;

/// A scenario plus the observables usually measured on it. The first named
/// observable is the one installed on the measurement step.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub scenario: Scenario,
    observables: Vec<(&'static str, SpectralDecomposition)>,
}

impl BuiltScenario {
    pub fn observable(&self, name: &str) -> Option<&SpectralDecomposition> {
        self.observables.iter().find(|(n, _)| *n == name).map(|(_, d)| d)
    }

    pub fn observable_names(&self) -> Vec<&'static str> {
        self.observables.iter().map(|(n, _)| *n).collect()
    }
}

fn standard_basis(dim: usize) -> Vec<StateVector> {
    (0..dim).map(|k| StateVector::basis_state(dim, k)).collect()
}

fn diagonal_in(basis: &[StateVector], values: &[f64]) -> SpectralDecomposition {
    SpectralDecomposition::from_eigensystem(basis.to_vec(), values.to_vec(), TOL)
        .expect("orthonormal builder basis")
}

/// Two-level double slit: prepared in the first basis state, measured in the
/// superposition basis, post-selected on the bright final state (equal to the
/// initial one), so the coherent intensities are exactly (1, 0).
///
/// Observables: `B` projects on the second superposition state (eigenvalues
/// 0 and 1), `Bprime` on the first.
pub fn build_double_slit() -> BuiltScenario {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let b_basis = vec![
        StateVector::from_reals(&[s, s]).expect("unit"),
        StateVector::from_reals(&[s, -s]).expect("unit"),
    ];
    let b = diagonal_in(&b_basis, &[0.0, 1.0]);
    let bprime = diagonal_in(&b_basis, &[1.0, 0.0]);
    let scenario = Scenario::new(
        StateVector::basis_state(2, 0),
        vec![ScenarioStep {
            evolution: Unitary::identity(2),
            measurement: MeasurementStep {
                observable: b.clone(),
                pointer: PointerSpec::gaussian(1.0).expect("positive width"),
            },
        }],
        Unitary::identity(2),
        Postselection::State(StateVector::basis_state(2, 0)),
    )
    .expect("consistent dimensions");
    BuiltScenario { scenario, observables: vec![("B", b), ("Bprime", bprime)] }
}

/// Three paths with amplitudes `(A, -A, A)`: prepared in the uniform
/// superposition and post-selected on `(1, -1, 1)/sqrt(3)` over the standard
/// intermediate basis.
///
/// Observables: `B` asks for the first box (eigenvalues 1, 0, 0), `Bprime`
/// for the union of the first two boxes (1, 1, 0).
pub fn build_three_box() -> BuiltScenario {
    let basis = standard_basis(3);
    let b = diagonal_in(&basis, &[1.0, 0.0, 0.0]);
    let bprime = diagonal_in(&basis, &[1.0, 1.0, 0.0]);
    let scenario = Scenario::new(
        StateVector::from_reals(&[1.0, 1.0, 1.0]).expect("unit"),
        vec![ScenarioStep {
            evolution: Unitary::identity(3),
            measurement: MeasurementStep {
                observable: b.clone(),
                pointer: PointerSpec::gaussian(1.0).expect("positive width"),
            },
        }],
        Unitary::identity(3),
        Postselection::State(StateVector::from_reals(&[1.0, -1.0, 1.0]).expect("unit")),
    )
    .expect("consistent dimensions");
    BuiltScenario { scenario, observables: vec![("B", b), ("Bprime", bprime)] }
}

/// The three-box system measured twice in a row: first the first-box
/// projector with a pointer of width `width_b`, then the two-box projector
/// with width `width_bprime`.
pub fn three_box_sequential(width_b: f64, width_bprime: f64) -> Result<Scenario> {
    let built = build_three_box();
    let bprime = built
        .observable("Bprime")
        .ok_or(Error::Unsupported { reason: "missing builder observable" })?
        .clone();
    built
        .scenario
        .with_pointer(0, PointerSpec::gaussian(width_b)?)?
        .with_appended_step(
            Unitary::identity(3),
            MeasurementStep { observable: bprime, pointer: PointerSpec::gaussian(width_bprime)? },
        )
}

/// Two two-level systems (location left/right, property up/down) with path
/// amplitudes `(A, -A, A, A)` over the product basis (L up, L down, R up,
/// R down).
///
/// Observables: `B` is the left-location projector, `Bprime` the right
/// location weighted by the property sign, `Bpp` the left-and-up projector,
/// `Bppp` the right-and-up projector.
pub fn build_cheshire() -> BuiltScenario {
    let basis = standard_basis(4);
    let b = diagonal_in(&basis, &[1.0, 1.0, 0.0, 0.0]);
    let bprime = diagonal_in(&basis, &[0.0, 0.0, 1.0, -1.0]);
    let bpp = diagonal_in(&basis, &[1.0, 0.0, 0.0, 0.0]);
    let bppp = diagonal_in(&basis, &[0.0, 0.0, 1.0, 0.0]);
    let scenario = Scenario::new(
        StateVector::from_reals(&[1.0, 1.0, 1.0, 1.0]).expect("unit"),
        vec![ScenarioStep {
            evolution: Unitary::identity(4),
            measurement: MeasurementStep {
                observable: b.clone(),
                pointer: PointerSpec::gaussian(1.0).expect("positive width"),
            },
        }],
        Unitary::identity(4),
        Postselection::State(StateVector::from_reals(&[1.0, -1.0, 1.0, 1.0]).expect("unit")),
    )
    .expect("consistent dimensions");
    BuiltScenario {
        scenario,
        observables: vec![("B", b), ("Bprime", bprime), ("Bpp", bpp), ("Bppp", bppp)],
    }
}

/// Looks up a builder by its command-line name.
pub fn builtin(name: &str) -> Option<BuiltScenario> {
    match name {
        "double-slit" => Some(build_double_slit()),
        "three-box" => Some(build_three_box()),
        "cheshire" => Some(build_cheshire()),
        _ => None,
    }
}
