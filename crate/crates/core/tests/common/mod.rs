//! Shared generators for the integration suites.
#![allow(dead_code)]

use weakpath_core::hilbert::StateVector;
use weakpath_core::pathways::{
    path_amplitudes, MeasurementStep, Postselection, Scenario, ScenarioStep,
    SpectralDecomposition,
};
use weakpath_core::pointers::PointerSpec;
use weakpath_core::rng::CounterRng;
use weakpath_core::testing;

/// A random single-step scenario with well-separated eigenvalues.
pub struct RandomScenario {
    pub scenario: Scenario,
    pub spread: f64,
}

/// Draws a random pre- and post-selected single-measurement scenario whose
/// path-amplitude sum is well away from a dark fringe: the which-way weights
/// `(sum |A_l|)^2` stay within a factor four of the coherent `|sum A_l|^2`.
pub fn random_bright_scenario(rng: &mut CounterRng, width: f64) -> RandomScenario {
    loop {
        let dim = 2 + (rng.next_u64() % 3) as usize;
        let basis = testing::random_basis(dim, rng);
        let values = testing::spaced_values(dim, rng.next_in(-1.0, 0.0), 0.4, rng);
        let spread = values[dim - 1] - values[0];
        let observable =
            SpectralDecomposition::from_eigensystem(basis, values, 1e-9).expect("orthonormal");
        let scenario = Scenario::new(
            testing::random_state(dim, rng),
            vec![ScenarioStep {
                evolution: testing::random_unitary(dim, rng),
                measurement: MeasurementStep {
                    observable,
                    pointer: PointerSpec::gaussian(width).expect("positive width"),
                },
            }],
            testing::random_unitary(dim, rng),
            Postselection::State(testing::random_state(dim, rng)),
        )
        .expect("consistent dims");
        let paths = match path_amplitudes(&scenario) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let abs_sum: f64 = paths.amps().iter().map(|a| a.norm()).sum();
        if abs_sum * abs_sum > 4.0 * paths.total().norm_sqr() {
            continue;
        }
        return RandomScenario { scenario, spread };
    }
}

/// Uniform normalized amplitudes plus a two-entry correction that steers the
/// eigenvalue-weighted sum to `target`.
pub fn steering_alpha(
    eigenvalues: &[f64],
    target: weakpath_core::Complex64,
) -> Vec<weakpath_core::Complex64> {
    let n = eigenvalues.len();
    let mean: f64 = eigenvalues.iter().sum::<f64>() / n as f64;
    let i = 0;
    let j = n - 1;
    let delta = (target - mean) / (eigenvalues[i] - eigenvalues[j]);
    let mut alpha =
        vec![weakpath_core::Complex64::new(1.0 / n as f64, 0.0); n];
    alpha[i] += delta;
    alpha[j] -= delta;
    alpha
}

#[allow(dead_code)]
pub fn state_overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm()
}
