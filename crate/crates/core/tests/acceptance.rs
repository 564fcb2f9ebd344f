//! Acceptance suite: one test per quantitative claim the simulator must
//! reproduce, each at its stated tolerance. Every test prints a PASS line so
//! a `--nocapture` run reads as a checklist.

mod common;

use weakpath_core::composite::{default_grids, evolve_composite, run_composite, sample_trials};
use weakpath_core::hilbert::{propagator, Operator, StateVector, Unitary};
use weakpath_core::pathways::{
    conditional_strong_probability, interference_intensities, path_amplitudes,
    raw_amplitude_of_values, spectral, MeasurementStep, Postselection, Scenario, ScenarioStep,
    SpectralDecomposition,
};
use weakpath_core::pointers::{
    design_postselection, mean_reading, reading_amplitude, reading_distribution,
    reading_distribution_on, rectangular_mixture_weight, scenario_weak_value, Axis, PointerSpec,
};
use weakpath_core::rng::CounterRng;
use weakpath_core::scenarios::{
    build_cheshire, build_double_slit, build_three_box, three_box_sequential,
};
use weakpath_core::testing;
use weakpath_core::{Complex64, Error};

fn pass(tag: &str) {
    println!("acceptance {tag}: PASS");
}

#[test]
fn criterion_01_three_box_strong_probabilities() {
    let built = build_three_box();
    let s = &built.scenario;
    // outcome index 1 selects eigenvalue 1 (distinct values ascend)
    assert!((conditional_strong_probability(s, &[1]).unwrap() - 1.0).abs() <= 1e-9);
    let sp = s
        .with_step_observable(0, built.observable("Bprime").unwrap().clone())
        .unwrap();
    assert!(conditional_strong_probability(&sp, &[1]).unwrap() <= 1e-9);

    let seq = three_box_sequential(1.0, 1.0).unwrap();
    assert!(conditional_strong_probability(&seq, &[1, 0]).unwrap() <= 1e-9);
    for outcomes in [[0, 0], [0, 1], [1, 1]] {
        let p = conditional_strong_probability(&seq, &outcomes).unwrap();
        assert!((p - 1.0 / 3.0).abs() <= 1e-9, "P{outcomes:?} = {p}");
    }
    pass("01 (three-box strong probabilities)");
}

#[test]
fn criterion_02_three_box_weak_values() {
    let built = build_three_box();
    let wv = scenario_weak_value(&built.scenario).unwrap();
    assert!((wv.0 - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
    let sp = built
        .scenario
        .with_step_observable(0, built.observable("Bprime").unwrap().clone())
        .unwrap();
    let wv = scenario_weak_value(&sp).unwrap();
    assert!(wv.0.norm() <= 1e-12);
    pass("02 (three-box weak values 1 and 0)");
}

#[test]
fn criterion_03_crossover_with_an_accurate_second_measurement() {
    let df = 10.0;
    let s = three_box_sequential(df, 0.1).unwrap();
    let mean = mean_reading(&s, 0).unwrap();
    assert!(mean.abs() <= 2.0 / (df * df), "conditional mean {mean}");

    let dist = reading_distribution(&s).unwrap();
    let b1 = dist.region_stats(1, -0.45, 0.45).unwrap();
    let b2 = dist.region_stats(1, 0.55, 1.45).unwrap();
    let ratio = b2.weight / b1.weight;
    let expect = 1.0 / (df * df);
    assert!(
        (ratio - expect).abs() <= 0.05 * expect,
        "branch weight ratio {ratio} vs {expect}"
    );
    assert!((b2.means[0] - 0.5).abs() <= 0.01 * 0.5, "branch-2 mean {}", b2.means[0]);
    pass("03 (crossover branch weights and means)");
}

#[test]
fn criterion_04_cheshire_weak_values() {
    let built = build_cheshire();
    for (name, expect) in [("B", 0.0), ("Bprime", 0.0), ("Bpp", 0.5), ("Bppp", 0.5)] {
        let s = built
            .scenario
            .with_step_observable(0, built.observable(name).unwrap().clone())
            .unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        assert!(
            (wv.0 - Complex64::new(expect, 0.0)).norm() <= 1e-12,
            "{name}: {} vs {expect}",
            wv.0
        );
    }
    pass("04 (Cheshire-cat weak values)");
}

#[test]
fn criterion_05_double_slit_fringes() {
    let built = build_double_slit();
    let intensities = interference_intensities(&built.scenario).unwrap();
    assert!((intensities.with_interference[0] - 1.0).abs() <= 1e-12);
    assert!(intensities.with_interference[1] <= 1e-12);

    let dark = built.scenario.with_postselect(StateVector::basis_state(2, 1)).unwrap();
    assert!(matches!(path_amplitudes(&dark), Err(Error::DarkFringe)));

    // a which-way measurement repopulates the dark fringe
    assert!(intensities.without_interference[1] > 0.1);
    pass("05 (double-slit bright and dark fringes)");
}

#[test]
fn criterion_06_joint_pointer_exclusivity() {
    let built = build_double_slit();
    let b_basis = built.scenario.steps()[0].measurement.observable.eigenvectors().to_vec();
    let proj1 =
        SpectralDecomposition::from_eigensystem(b_basis.clone(), vec![1.0, 0.0], 1e-9).unwrap();
    let proj2 = SpectralDecomposition::from_eigensystem(b_basis, vec![0.0, 1.0], 1e-9).unwrap();
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

    // the doubly-shifted term G(f-1)G(f'-1) has exactly zero coefficient
    let both = raw_amplitude_of_values(&s, &[1.0, 1.0]).unwrap();
    assert_eq!(both, Complex64::new(0.0, 0.0));

    // yet the joint density keeps an interference cross term
    let psi = reading_amplitude(&s, &[0.5, 0.5]).unwrap();
    let g = PointerSpec::gaussian(width).unwrap();
    let shifted = g.amplitude(-0.5).unwrap() * g.amplitude(0.5).unwrap();
    let incoherent = 2.0 * (0.5 * shifted) * (0.5 * shifted);
    let cross = psi.norm_sqr() - incoherent;
    assert!(cross.abs() > 1e-6, "cross term {cross}");
    pass("06 (joint pointers never both displaced)");
}

#[test]
fn criterion_07_weak_limit_law() {
    let mut rng = CounterRng::new(777);
    let count = 50;
    let df = 20.0;
    let mut errors_df = Vec::with_capacity(count);
    let mut errors_2df = Vec::with_capacity(count);
    for _ in 0..count {
        let case = common::random_bright_scenario(&mut rng, df);
        let wv = scenario_weak_value(&case.scenario).unwrap();
        let bound = 5.0 * case.spread * case.spread / (df * df);
        let err = (mean_reading(&case.scenario, 0).unwrap() - wv.re()).abs();
        assert!(err <= bound, "error {err} exceeds {bound} (spread {})", case.spread);
        errors_df.push(err);

        let wider = case
            .scenario
            .with_pointer(0, PointerSpec::gaussian(2.0 * df).unwrap())
            .unwrap();
        errors_2df.push((mean_reading(&wider, 0).unwrap() - wv.re()).abs());
    }
    let mean_err: f64 = errors_df.iter().sum::<f64>() / count as f64;
    let mean_err_wide: f64 = errors_2df.iter().sum::<f64>() / count as f64;
    let shrink = mean_err / mean_err_wide;
    assert!(
        (2.8..=5.2).contains(&shrink),
        "doubling the width shrank the error by {shrink}, expected 4 +- 30%"
    );
    pass("07 (weak-limit convergence, second order in 1/width)");
}

#[test]
fn criterion_08_strong_limit_law() {
    let mut rng = CounterRng::new(4242);
    for _ in 0..5 {
        let dim = 3;
        let basis = testing::random_basis(dim, &mut rng);
        // rank-one projector with unit gap
        let obs =
            SpectralDecomposition::from_eigensystem(basis, vec![0.0, 1.0, 0.0], 1e-9).unwrap();
        let df = 0.01;
        let s = Scenario::new(
            testing::random_state(dim, &mut rng),
            vec![ScenarioStep {
                evolution: testing::random_unitary(dim, &mut rng),
                measurement: MeasurementStep {
                    observable: obs,
                    pointer: PointerSpec::gaussian(df).unwrap(),
                },
            }],
            testing::random_unitary(dim, &mut rng),
            Postselection::State(testing::random_state(dim, &mut rng)),
        )
        .unwrap();
        let (labels, amps) = {
            let paths = path_amplitudes(&s).expect("bright scenario expected");
            (paths.labels().to_vec(), paths.amps().to_vec())
        };
        let chosen: Complex64 = labels
            .iter()
            .zip(&amps)
            .filter(|(l, _)| l[0] == 1)
            .map(|(_, a)| *a)
            .sum();
        let rest: Complex64 = labels
            .iter()
            .zip(&amps)
            .filter(|(l, _)| l[0] != 1)
            .map(|(_, a)| *a)
            .sum();
        let p_path = chosen.norm_sqr() / (chosen.norm_sqr() + rest.norm_sqr());

        let dist = reading_distribution(&s).unwrap();
        let spike1 = dist.region_stats(0, 1.0 - 3.0 * df, 1.0 + 3.0 * df).unwrap();
        let spike0 = dist.region_stats(0, -3.0 * df, 3.0 * df).unwrap();
        assert!((spike1.weight - p_path).abs() <= 1e-6, "spike weight vs path rule");
        assert!((spike0.weight - (1.0 - p_path)).abs() <= 1e-6);
        let mean = dist.mean(0).unwrap();
        assert!((mean - p_path).abs() <= 1e-6, "mean {mean} vs {p_path}");
    }
    pass("08 (strong-limit spike weights and conditional mean)");
}

#[test]
fn criterion_09_arbitrary_weak_values_round_trip() {
    let mut rng = CounterRng::new(90210);
    let mut done = 0;
    while done < 100 {
        let dim = 2 + (rng.next_u64() % 3) as usize;
        let basis = testing::random_basis(dim, &mut rng);
        let values = testing::spaced_values(dim, rng.next_in(-1.0, 0.0), 0.4, &mut rng);
        let obs = SpectralDecomposition::from_eigensystem(basis, values.clone(), 1e-9).unwrap();
        let initial = testing::random_state(dim, &mut rng);
        let u1 = testing::random_unitary(dim, &mut rng);
        let u2 = testing::random_unitary(dim, &mut rng);
        // keep the transition well conditioned
        let at_t1 = u1.apply(&initial);
        if obs.eigenvectors().iter().any(|b| b.inner(&at_t1).norm() < 0.05) {
            continue;
        }
        let target = Complex64::new(rng.next_in(-10.0, 10.0), rng.next_in(-10.0, 10.0));
        let alpha = common::steering_alpha(&values, target);
        let post = design_postselection(&initial, &u1, &u2, &obs, target, &alpha).unwrap();
        let s = Scenario::new(
            initial,
            vec![ScenarioStep {
                evolution: u1,
                measurement: MeasurementStep {
                    observable: obs,
                    pointer: PointerSpec::gaussian(1.0).unwrap(),
                },
            }],
            u2,
            Postselection::State(post),
        )
        .unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        assert!((wv.0 - target).norm() <= 1e-8, "target {target} got {}", wv.0);
        done += 1;
    }

    // the showcase values on a two-level system
    let obs = spectral(&Operator::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
    let initial = StateVector::from_reals(&[0.6, 0.8]).unwrap();
    let u = Unitary::identity(2);
    for (target, alpha) in [
        (Complex64::new(100.0, 0.0), vec![Complex64::new(-49.5, 0.0), Complex64::new(50.5, 0.0)]),
        (Complex64::new(0.0, -5.0), vec![Complex64::new(0.5, 2.5), Complex64::new(0.5, -2.5)]),
    ] {
        let post = design_postselection(&initial, &u, &u, &obs, target, &alpha).unwrap();
        let s = Scenario::new(
            initial.clone(),
            vec![ScenarioStep {
                evolution: u.clone(),
                measurement: MeasurementStep {
                    observable: obs.clone(),
                    pointer: PointerSpec::gaussian(1.0).unwrap(),
                },
            }],
            u.clone(),
            Postselection::State(post),
        )
        .unwrap();
        let wv = scenario_weak_value(&s).unwrap();
        assert!((wv.0 - target).norm() <= 1e-8);
    }
    pass("09 (designed post-selections reach arbitrary weak values)");
}

#[test]
fn criterion_10_composite_oracle_equivalence() {
    let mut cases: Vec<(String, Scenario)> = Vec::new();
    for name in ["double-slit", "three-box", "cheshire"] {
        let built = weakpath_core::scenarios::builtin(name).unwrap();
        for width in [0.1, 10.0] {
            let s = built
                .scenario
                .with_pointer(0, PointerSpec::gaussian(width).unwrap())
                .unwrap();
            cases.push((format!("{name} width {width}"), s));
        }
    }
    // nonzero system Hamiltonian: the double slit evolving under sigma_x
    let sx = Operator::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ])
    .unwrap();
    let u = propagator(&sx, 0.3).unwrap();
    let built = build_double_slit();
    let evolved = Scenario::new(
        built.scenario.initial().clone(),
        vec![ScenarioStep {
            evolution: u.clone(),
            measurement: built.scenario.steps()[0].measurement.clone(),
        }],
        u,
        Postselection::State(built.scenario.postselect_state().unwrap().clone()),
    )
    .unwrap();
    cases.push(("double-slit evolving".into(), evolved));

    for (label, s) in &cases {
        let grids = default_grids(s, 1024).unwrap();
        let composite = run_composite(s, &grids).unwrap();
        let axes: Vec<Axis> = grids.iter().map(|g| g.axis().clone()).collect();
        let reduced = reading_distribution_on(s, &axes, 1).unwrap();
        let max_density = reduced.density().iter().copied().fold(0.0, f64::max);
        let mut max_err: f64 = 0.0;
        for (a, b) in composite.density().iter().zip(reduced.density()) {
            max_err = max_err.max((a - b).abs());
        }
        assert!(
            max_err <= 1e-8 * max_density,
            "{label}: deviation {max_err} vs max density {max_density}"
        );
    }
    pass("10 (composite tensor oracle matches the reduced description)");
}

#[test]
fn criterion_11_trial_complexity_scales_with_width_squared() {
    let built = build_three_box();
    let trials = 50_000;
    let mut errs = Vec::new();
    for width in [5.0, 10.0, 20.0] {
        let s = built
            .scenario
            .with_pointer(0, PointerSpec::gaussian(width).unwrap())
            .unwrap();
        let dist = reading_distribution(&s).unwrap();
        let (_, stats) = sample_trials(&dist, trials, 31337).unwrap();
        errs.push(stats.std_errors[0]);
    }
    for pair in errs.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((ratio - 2.0).abs() <= 0.4, "standard error ratio {ratio}, expected 2 +- 20%");
    }
    pass("11 (standard error grows linearly with width at fixed trials)");
}

#[test]
fn criterion_12_rectangular_mixture_decomposition() {
    let built = build_double_slit();
    let width = 4.0;
    let s = built
        .scenario
        .with_pointer(0, PointerSpec::rectangular(width).unwrap())
        .unwrap();
    let mix = rectangular_mixture_weight(&s).unwrap();
    assert!(mix.residual <= 1e-9, "residual {}", mix.residual);
    let gap = 1.0;
    assert!((mix.beta - mix.overlap_fraction).abs() <= 1e-9);
    println!(
        "acceptance 12 note: fitted beta = {:.6} = gap/width; the 2*gap/width \
         candidate would be {:.6} and does not fit (residual would be {:.3e})",
        mix.beta,
        2.0 * gap / width,
        {
            let beta2 = 2.0 * gap / width;
            mix.exact
                .iter()
                .zip(mix.interference.iter().zip(&mix.no_interference))
                .map(|(w, (i, n))| (w - (beta2 * n + (1.0 - beta2) * i)).abs())
                .fold(0.0f64, f64::max)
        }
    );
    pass("12 (rectangular window mixes which-way and coherent intensities)");
}

#[test]
fn composite_unitarity_and_broken_unbroken_equivalence() {
    // supporting invariant checks for the oracle itself
    let s = three_box_sequential(0.1, 0.1).unwrap();
    let grids = default_grids(&s, 512).unwrap();
    let state = evolve_composite(&s, &grids).unwrap();
    assert!((state.norm() - 1.0).abs() <= 1e-10);

    // strong-limit outcome weights equal the projective probabilities
    let dist = state.select(s.postselect()).unwrap();
    let quadrants = [
        ((0.5, 1.5), (0.5, 1.5), [1usize, 1usize]),
        ((-0.5, 0.5), (0.5, 1.5), [0, 1]),
        ((-0.5, 0.5), (-0.5, 0.5), [0, 0]),
    ];
    for ((f_lo, f_hi), (fp_lo, fp_hi), outcomes) in quadrants {
        let joint_mass = {
            let axes = dist.axes();
            let vol: f64 = axes.iter().map(|a| a.step()).product();
            let mut mass = 0.0;
            for (flat, d) in dist.density().iter().enumerate() {
                let ia = flat / axes[1].len();
                let ib = flat % axes[1].len();
                let f = axes[0].point(ia);
                let fp = axes[1].point(ib);
                if f >= f_lo && f <= f_hi && fp >= fp_lo && fp <= fp_hi {
                    mass += d * vol * axes[0].weight(ia) * axes[1].weight(ib);
                }
            }
            mass
        };
        let projective = conditional_strong_probability(&s, &outcomes).unwrap();
        assert!(
            (joint_mass - projective).abs() <= 1e-6,
            "outcomes {outcomes:?}: {joint_mass} vs {projective}"
        );
    }
    pass("supporting (unbroken composite evolution equals broken projective evolution)");
}
