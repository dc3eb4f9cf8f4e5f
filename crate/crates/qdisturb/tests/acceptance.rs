//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured quantities. Run with `--nocapture` to see them.

mod common;

use std::time::Instant;

use qdisturb::disturbance::{
    decide_non_disturbance, disturbance_measure, first_kind_measure, joint_measurability,
    rank1_disturbance, verify_dual_certificate, DisturbanceOptions,
};
use qdisturb::fixtures;
use qdisturb::instruments::{
    self, fixed_point_space, full_rank_fixed_state, induced_observable, luders,
    schrodinger_fixed_point_space, total_channel, trash_and_prepare,
};
use qdisturb::matrix::{commutator, operator_norm, ComplexMatrix};
use qdisturb::observables::{self, Observable};
use rand::{Rng, SeedableRng};

fn opts() -> DisturbanceOptions {
    DisturbanceOptions::default()
}

#[test]
fn criterion_01_qubit_closed_form() {
    let cases = [
        (std::f64::consts::FRAC_PI_6, "pi/6"),
        (std::f64::consts::FRAC_PI_4, "pi/4"),
        (std::f64::consts::FRAC_PI_3, "pi/3"),
        (std::f64::consts::FRAC_PI_2, "pi/2"),
    ];
    for (theta, label) in cases {
        let (a, b) = fixtures::qubit_sharp_pair(theta);
        let started = Instant::now();
        let report = disturbance_measure(&a, &b, &opts()).unwrap();
        let elapsed = started.elapsed();
        let expected = 0.5 * theta.sin();
        assert!(
            (report.value - expected).abs() < 1e-6,
            "theta = {label}: value {} vs closed form {expected}",
            report.value
        );
        assert!(elapsed.as_secs_f64() < 1.0, "theta = {label} took {elapsed:?}");
        println!(
            "criterion 1 (qubit closed form, theta={label}): PASS value={:.6} expected={:.6} in {elapsed:?}",
            report.value, expected
        );
    }
}

#[test]
fn criterion_02_three_level_nondisturbing_pair() {
    let started = Instant::now();
    let a = fixtures::three_level_source();
    let b = fixtures::three_level_target();
    let instrument = fixtures::three_level_instrument();

    // (a) induced observable reproduces A entrywise.
    let induced = induced_observable(&instrument);
    let mut worst = 0.0f64;
    for (e, f) in induced.effects().iter().zip(a.effects()) {
        worst = worst.max((e - f).max_abs());
    }
    assert!(worst <= 1e-12, "induced observable residual {worst}");

    // (b) every target effect is a fixed point of the dual channel.
    let mut fixed_residual = 0.0f64;
    for by in b.effects() {
        let moved = instrument.dual_apply_total(by);
        fixed_residual = fixed_residual.max((&moved - by).max_abs());
    }
    assert!(fixed_residual <= 1e-12, "fixed-point residual {fixed_residual}");

    // (c) the pair does not commute, with a solid margin.
    let (commuting, margin) = observables::commutes(&a, &b).unwrap();
    assert!(!commuting);
    assert!(margin > 0.1, "commutator margin {margin}");

    // (d) and the optimizer confirms zero disturbance.
    let report = disturbance_measure(&a, &b, &opts()).unwrap();
    assert!(report.value <= 1e-7, "D = {}", report.value);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 2 (three-level non-disturbing pair): PASS induced={worst:.2e} fixed={fixed_residual:.2e} margin={margin:.3} D={:.2e} in {elapsed:?}",
        report.value
    );
}

#[test]
fn criterion_03_asymmetry_of_non_disturbance() {
    let a5 = fixtures::five_outcome_extension();
    let b = fixtures::three_level_target();

    let span = observables::span_dim(&a5);
    assert_eq!(span, 5, "five-outcome span dimension");
    assert_eq!(span, (3 - 1) * (3 - 1) + 1);

    assert!(decide_non_disturbance(&a5, &b, &opts()).unwrap());

    let report = disturbance_measure(&b, &a5, &opts()).unwrap();
    assert!(report.value > 1e-3, "reverse order D = {}", report.value);
    let bound = verify_dual_certificate(
        &b,
        &a5,
        &report.certificate.h,
        &report.certificate.k,
        1e-7,
    )
    .unwrap();
    assert!((report.value - bound).abs() <= 1e-6, "gap {}", (report.value - bound).abs());
    println!(
        "criterion 3 (asymmetry): PASS span={span} D_A(B)=0 D_B(A)={:.9} certified bound={bound:.9}",
        report.value
    );
}

#[test]
fn criterion_04_jointly_measurable_yet_disturbing() {
    let (a, b) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
    let mu = 0.6;
    let am = observables::coarse_grain_pair(&a, mu).unwrap();
    let bm = observables::coarse_grain_pair(&b, mu).unwrap();

    // The explicit joint observable construction validates.
    let joint = observables::two_outcome_joint(&a, &b, mu).unwrap();
    assert!(joint.marginal_residual(&am, &bm) < 1e-12);

    // Feasibility with a positive margin from the optimizer.
    let jm = joint_measurability(&am, &bm, &opts()).unwrap();
    assert!(jm.feasible);
    assert!(jm.margin > 0.0, "margin {}", jm.margin);

    // Yet each direction of measurement disturbs the other.
    let d_ab = disturbance_measure(&am, &bm, &opts()).unwrap().value;
    let d_ba = disturbance_measure(&bm, &am, &opts()).unwrap().value;
    assert!(d_ab > 1e-3, "D(A^mu, B^mu) = {d_ab}");
    assert!(d_ba > 1e-3, "D(B^mu, A^mu) = {d_ba}");

    // The commutator scaling identity at mu = nu = 0.6.
    let base = operator_norm(&commutator(a.effect(0), b.effect(0)).unwrap());
    let scaled = operator_norm(&commutator(am.effect(0), bm.effect(0)).unwrap());
    let expected = (2.0 * mu - 1.0) * (2.0 * mu - 1.0) * base;
    assert!((scaled - expected).abs() < 1e-10);

    println!(
        "criterion 4 (jointly measurable yet disturbing): PASS margin={:.4} D_ab={d_ab:.4} D_ba={d_ba:.4} scaling residual={:.2e}",
        jm.margin,
        (scaled - expected).abs()
    );
}

#[test]
fn criterion_05_strong_duality_on_random_instances() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(505);
    let mut done = 0;
    while done < 50 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let n_a = rng.gen_range(2..=4);
        let n_b = rng.gen_range(2..=4);
        let a = common::random_observable(&mut rng, d, n_a);
        let b = common::random_observable(&mut rng, d, n_b);
        let report = disturbance_measure(&a, &b, &opts()).unwrap();
        let scale = report.value.abs().max(1.0);
        assert!(
            (report.value - report.dual_bound).abs() <= 1e-6 * scale,
            "instance {done}: gap {} at value {}",
            (report.value - report.dual_bound).abs(),
            report.value
        );
        let independent = verify_dual_certificate(
            &a,
            &b,
            &report.certificate.h,
            &report.certificate.k,
            1e-7,
        )
        .unwrap();
        assert!(
            (independent - report.dual_bound).abs() <= 1e-9,
            "instance {done}: certificate value drifted"
        );
        done += 1;
    }
    println!("criterion 5 (strong duality): PASS on {done} random instances");
}

#[test]
fn criterion_06_rank1_oracle_equivalence() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(606);
    for trial in 0..20 {
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let n_a = rng.gen_range(2..=d + 1);
        let n_b = rng.gen_range(2..=3);
        let a = common::random_rank_one_observable(&mut rng, d, n_a.max(d));
        let b = common::random_observable(&mut rng, d, n_b);
        assert!(observables::is_rank_one(&a));
        let reduced = rank1_disturbance(&a, &b, &opts()).unwrap();
        let full = disturbance_measure(&a, &b, &opts()).unwrap().value;
        assert!(
            (reduced - full).abs() < 1e-6,
            "trial {trial}: reduced {reduced} vs full {full}"
        );
    }
    println!("criterion 6 (rank-1 reduced oracle): PASS on 20 instances");
}

#[test]
fn criterion_07_qubit_equivalence() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(707);
    let options = opts();
    let mut done = 0;
    let mut commuting_count = 0;
    while done < 100 {
        // Mix generic pairs with exactly commuting ones; pairs too close to
        // the commuting boundary are skipped as numerically ill-posed for
        // any finite decision tolerance.
        let (a, b) = if done % 5 == 4 {
            common::random_commuting_pair(&mut rng, 2, 2)
        } else {
            (
                common::random_observable(&mut rng, 2, 2),
                common::random_observable(&mut rng, 2, 2),
            )
        };
        let (commuting, margin) = observables::commutes(&a, &b).unwrap();
        if !commuting && margin < 1e-3 {
            continue;
        }
        let ab = decide_non_disturbance(&a, &b, &options).unwrap();
        let ba = decide_non_disturbance(&b, &a, &options).unwrap();
        assert_eq!(ab, commuting, "pair {done}: forward decision vs commutation");
        assert_eq!(ba, commuting, "pair {done}: reverse decision vs commutation");
        commuting_count += usize::from(commuting);
        done += 1;
    }
    println!(
        "criterion 7 (qubit equivalence): PASS on {done} pairs ({commuting_count} commuting)"
    );
}

#[test]
fn criterion_08_first_kind_suite() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(808);
    let options = opts();

    // Commutative observables admit first-kind measurements.
    for d in [2usize, 3] {
        let (a, _) = common::random_commuting_pair(&mut rng, d, 3);
        let value = first_kind_measure(&a, &options).unwrap().value;
        assert!(value <= 1e-7, "commutative d={d}: D = {value}");
    }

    // The five-dimensional three-outcome construction: non-commutative, unit
    // eigenvalues, repeatable preparation, and first-kind admissible.
    let a = fixtures::three_outcome_unit_eigenvalue();
    assert!(!observables::is_commutative(&a));
    assert!(observables::has_unit_eigenvalues(&a));
    let instrument = fixtures::three_outcome_repeatable_instrument();
    assert!(instruments::is_repeatable(&instrument, 1e-9));
    let started = Instant::now();
    let value = first_kind_measure(&a, &options).unwrap().value;
    let elapsed = started.elapsed();
    assert!(value <= 1e-7, "unit-eigenvalue construction: D = {value}");

    // The informationally complete tetrahedral POVM does not.
    let tetra = fixtures::tetrahedral_qubit_povm();
    let tetra_value = first_kind_measure(&tetra, &options).unwrap().value;
    assert!(tetra_value > 1e-3, "tetrahedral POVM: D = {tetra_value}");

    println!(
        "criterion 8 (first kind): PASS unit-eigenvalue D={value:.2e} ({elapsed:?}), tetrahedral D={tetra_value:.6}"
    );
}

#[test]
fn criterion_09_repeatable_counting_bounds() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(909);
    let mut families = 0;
    for d in 2..=6usize {
        for m in 1..=d {
            // Orthonormal unit eigenvectors plus a uniform residual POVM on
            // the complement.
            let u = common::random_unitary(&mut rng, d);
            let mut effects = Vec::new();
            for x in 0..m {
                let col = u.column(x);
                effects.push(ComplexMatrix::outer(&col, &col));
            }
            if m < d {
                let mut q = ComplexMatrix::zeros(d, d);
                for x in m..d {
                    let col = u.column(x);
                    q = &q + &ComplexMatrix::outer(&col, &col);
                }
                for e in effects.iter_mut() {
                    *e = &*e + &q.scale_re(1.0 / m as f64);
                }
            }
            let obs = Observable::new(effects).unwrap();
            let states: Vec<ComplexMatrix> = (0..m)
                .map(|x| {
                    let col = u.column(x);
                    ComplexMatrix::outer(&col, &col)
                })
                .collect();
            let instrument = trash_and_prepare(&obs, &states).unwrap();
            assert!(instruments::is_repeatable(&instrument, 1e-9));

            let induced = induced_observable(&instrument);
            assert!(induced.outcome_count() <= d, "outcome bound violated");
            if induced.outcome_count() == d {
                assert!(observables::is_sharp(&induced), "d outcomes must be sharp");
            }
            if induced.outcome_count() >= d - 1 {
                assert!(
                    observables::is_commutative(&induced),
                    "d-1 outcomes must commute (d={d}, m={m})"
                );
            }
            families += 1;
        }
    }
    println!("criterion 9 (repeatable counting bounds): PASS on {families} instruments");
}

#[test]
fn criterion_10_fixed_point_consistency() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1010);
    let options = opts();
    let mut checked_pairs = 0;
    for trial in 0..30 {
        let d = 2 + trial % 3; // 2, 3, 4
        let instrument = match trial % 3 {
            0 => common::random_instrument(&mut rng, d, 1 + trial % 4),
            1 => luders(&common::random_observable(&mut rng, d, 2)).unwrap(),
            _ => {
                let obs = common::random_observable(&mut rng, d, 2);
                let states: Vec<ComplexMatrix> =
                    (0..2).map(|_| common::random_density(&mut rng, d)).collect();
                trash_and_prepare(&obs, &states).unwrap()
            }
        };
        let channel = total_channel(&instrument);
        let dual_space = fixed_point_space(&channel);
        let schrodinger_space = schrodinger_fixed_point_space(&channel);
        assert_eq!(
            dual_space.dim(),
            schrodinger_space.dim(),
            "trial {trial}: fixed-space dimensions differ"
        );

        // Whenever a full-rank fixed state exists and a target built from
        // the fixed space is undisturbed, the induced observable commutes
        // with it.
        if full_rank_fixed_state(&channel).is_some() && dual_space.dim() >= 2 {
            let identity = ComplexMatrix::identity(d);
            let candidate = dual_space
                .basis()
                .iter()
                .map(|f| {
                    let traceless = f - &identity.scale_re(f.trace().re / d as f64);
                    (traceless.clone(), operator_norm(&traceless))
                })
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if candidate.1 > 1e-6 {
                let normalized = candidate.0.scale_re(0.4 / candidate.1);
                let b1 = (&identity.scale_re(0.5) + &normalized).hermitian_part();
                let b2 = &identity - &b1;
                let b = Observable::new(vec![b1, b2]).unwrap();
                let undisturbed =
                    instruments::disturbance_of(&instrument, &b).unwrap() <= options.decision_tol;
                assert!(undisturbed, "trial {trial}: fixed-space target must be undisturbed");
                let induced = induced_observable(&instrument);
                let (_, margin) = observables::commutes(&induced, &b).unwrap();
                assert!(
                    margin <= 1e-7,
                    "trial {trial}: commutator margin {margin} despite full-rank fixed state"
                );
                checked_pairs += 1;
            }
        }
    }
    assert!(checked_pairs >= 5, "too few full-rank cases exercised: {checked_pairs}");
    println!(
        "criterion 10 (fixed points): PASS on 30 instruments ({checked_pairs} full-rank commutation checks)"
    );
}
