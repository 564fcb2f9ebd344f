//! Seeded generators for randomized checks.
//!
//! These helpers back both the unit tests and the acceptance suite; they are
//! deterministic functions of a [`CounterRng`] so that every randomized check
//! replays bit-identically.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::hilbert::{eigensystem, Operator, StateVector, Unitary};
use crate::rng::CounterRng;

/// Uniform complex entry with re, im in `(-1, 1)`.
pub fn random_complex(rng: &mut CounterRng) -> Complex64 {
    Complex64::new(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0))
}

/// Random normalized state.
pub fn random_state(dim: usize, rng: &mut CounterRng) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        if let Ok(v) = StateVector::normalized(amps) {
            return v;
        }
    }
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut CounterRng) -> Operator {
    let mut entries = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = Complex64::new(rng.next_in(-1.0, 1.0), 0.0);
        for j in (i + 1)..dim {
            let z = random_complex(rng);
            entries[i * dim + j] = z;
            entries[j * dim + i] = z.conj();
        }
    }
    Operator::new(dim, entries).expect("finite entries")
}

/// Random unitary, obtained as the eigenbasis of a random Hermitian matrix.
pub fn random_unitary(dim: usize, rng: &mut CounterRng) -> Unitary {
    let h = random_hermitian(dim, rng);
    let eig = eigensystem(&h).expect("hermitian by construction");
    let mut entries = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
    for (col, v) in eig.vectors.iter().enumerate() {
        for row in 0..dim {
            entries[row * dim + col] = v.amps()[row];
        }
    }
    Unitary::new(Operator::new(dim, entries).expect("finite")).expect("orthonormal columns")
}

/// Random orthonormal basis as state vectors.
pub fn random_basis(dim: usize, rng: &mut CounterRng) -> Vec<StateVector> {
    let u = random_unitary(dim, rng);
    (0..dim)
        .map(|col| {
            StateVector::normalized((0..dim).map(|row| u.operator().get(row, col)).collect())
                .expect("unit column")
        })
        .collect()
}

/// `count` real values starting near `start` with gaps in `[min_gap, 2*min_gap]`.
pub fn spaced_values(count: usize, start: f64, min_gap: f64, rng: &mut CounterRng) -> Vec<f64> {
    let mut values = Vec::with_capacity(count);
    let mut v = start + rng.next_in(0.0, min_gap);
    for _ in 0..count {
        values.push(v);
        v += min_gap * rng.next_in(1.0, 2.0);
    }
    values
}
