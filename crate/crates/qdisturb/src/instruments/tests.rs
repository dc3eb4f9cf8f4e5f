use super::*;
use crate::fixtures;
use crate::matrix::{eigh, ComplexMatrix};
use crate::observables::{self, Observable};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_density(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let psd = (&g * &g.adjoint()).hermitian_part();
    psd.scale_re(1.0 / psd.trace().re)
}

fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .hermitian_part()
}

fn sharp_basis(d: usize) -> Observable {
    let effects = (0..d)
        .map(|i| {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(i, i, c(1.0, 0.0));
            m
        })
        .collect();
    Observable::new(effects).unwrap()
}

#[test]
fn induced_observable_of_luders_is_the_original() {
    for obs in [
        fixtures::three_level_source(),
        fixtures::three_level_target(),
        fixtures::tetrahedral_qubit_povm(),
    ] {
        let instrument = luders(&obs).unwrap();
        let induced = induced_observable(&instrument);
        for (e, f) in induced.effects().iter().zip(obs.effects()) {
            assert!((e - f).max_abs() < 1e-9);
        }
    }
    // Trivial observable: Kraus operators are 1/√2 · 1.
    let half = ComplexMatrix::identity(2).scale_re(0.5);
    let obs = Observable::new(vec![half.clone(), half]).unwrap();
    let instrument = luders(&obs).unwrap();
    let expected = ComplexMatrix::identity(2).scale_re(std::f64::consts::FRAC_1_SQRT_2);
    assert!((&instrument.kraus(0)[0] - &expected).max_abs() < 1e-12);
}

#[test]
fn three_level_instrument_measures_the_two_outcome_source() {
    let instrument = fixtures::three_level_instrument();
    let induced = induced_observable(&instrument);
    let a = fixtures::three_level_source();
    for (e, f) in induced.effects().iter().zip(a.effects()) {
        assert!((e - f).max_abs() < 1e-12);
    }
}

#[test]
fn five_outcome_instrument_measures_the_extension() {
    let instrument = fixtures::five_outcome_instrument();
    let induced = induced_observable(&instrument);
    let a = fixtures::five_outcome_extension();
    for (e, f) in induced.effects().iter().zip(a.effects()) {
        assert!((e - f).max_abs() < 1e-12);
    }
}

#[test]
fn three_level_instrument_leaves_target_fixed() {
    let instrument = fixtures::three_level_instrument();
    let b = fixtures::three_level_target();
    for by in b.effects() {
        let moved = instrument.dual_apply_total(by);
        assert!((&moved - by).max_abs() < 1e-12);
    }
    assert!(disturbance_of(&instrument, &b).unwrap() < 1e-12);

    let channel = total_channel(&instrument);
    for by in b.effects() {
        let moved = channel.dual_apply(by).unwrap();
        assert!((&moved - by).max_abs() < 1e-10);
    }
}

#[test]
fn duality_of_schrodinger_and_heisenberg_actions() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let instruments = [
        fixtures::three_level_instrument(),
        luders(&fixtures::tetrahedral_qubit_povm()).unwrap(),
        fixtures::three_outcome_repeatable_instrument(),
    ];
    for instrument in &instruments {
        let d = instrument.dim();
        for _ in 0..50 {
            let rho = random_density(&mut rng, d);
            let x = random_hermitian(&mut rng, d);
            for outcome in 0..instrument.outcome_count() {
                let lhs = x.hs_inner(&instrument.apply(outcome, &rho)).re;
                let rhs = instrument.dual_apply_outcome(outcome, &x).hs_inner(&rho).re;
                assert!((lhs - rhs).abs() < 1e-10);
            }
            // Outcome probabilities come from the induced observable.
            let induced = induced_observable(instrument);
            for outcome in 0..instrument.outcome_count() {
                let p = instrument.probability(outcome, &rho);
                assert!((p - induced.probability(outcome, &rho)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn channel_representations_are_consistent() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    for instrument in [
        fixtures::three_level_instrument(),
        fixtures::five_outcome_instrument(),
        luders(&fixtures::qubit_sharp_pair(0.7).0).unwrap(),
    ] {
        let channel = total_channel(&instrument);
        assert!(channel.representation_residual() < 1e-10);
        assert!(channel.unitality_residual() < 1e-10);
        // dual_apply satisfies the trace duality against random pairs.
        let d = channel.dim();
        for _ in 0..20 {
            let rho = random_density(&mut rng, d);
            let x = random_hermitian(&mut rng, d);
            let lhs = x.hs_inner(&channel.apply(&rho)).re;
            let rhs = channel.dual_apply(&x).unwrap().hs_inner(&rho).re;
            assert!((lhs - rhs).abs() < 1e-10);
        }
        // X = 1 is always fixed in the Heisenberg picture.
        let id = ComplexMatrix::identity(d);
        assert!((&channel.dual_apply(&id).unwrap() - &id).max_abs() < 1e-10);
    }
}

#[test]
fn luders_of_sharp_basis_dephases() {
    let obs = sharp_basis(2);
    let channel = total_channel(&luders(&obs).unwrap());
    // Choi matrix diag(1,0,0,1) in the product basis.
    let expected = ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 1.0]);
    assert!((channel.choi() - &expected).max_abs() < 1e-12);

    // Identity instrument gives the identity channel.
    let id_inst = Instrument::new(vec![vec![ComplexMatrix::identity(2)]]).unwrap();
    let channel = total_channel(&id_inst);
    let mut omega = ComplexMatrix::zeros(4, 4);
    for j in 0..2 {
        for k in 0..2 {
            omega.set(j * 2 + j, k * 2 + k, c(1.0, 0.0));
        }
    }
    assert!((channel.choi() - &omega).max_abs() < 1e-12);
}

#[test]
fn trash_and_prepare_examples() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);

    // Constant target: the channel sends everything to ρ₀.
    let obs = fixtures::tetrahedral_qubit_povm();
    let rho0 = random_density(&mut rng, 2);
    let states = vec![rho0.clone(); 4];
    let instrument = trash_and_prepare(&obs, &states).unwrap();
    let induced = induced_observable(&instrument);
    for (e, f) in induced.effects().iter().zip(obs.effects()) {
        assert!((e - f).max_abs() < 1e-10);
    }
    for _ in 0..10 {
        let rho = random_density(&mut rng, 2);
        let mut out = ComplexMatrix::zeros(2, 2);
        for x in 0..4 {
            out = &out + &instrument.apply(x, &rho);
        }
        assert!((&out - &rho0).max_abs() < 1e-10);
    }

    // Trivial observable with maximally mixed preparations: the completely
    // depolarizing channel.
    let half = ComplexMatrix::identity(2).scale_re(0.5);
    let obs = Observable::new(vec![half.clone(), half.clone()]).unwrap();
    let instrument = trash_and_prepare(&obs, &[half.clone(), half]).unwrap();
    let channel = total_channel(&instrument);
    for _ in 0..5 {
        let rho = random_density(&mut rng, 2);
        let out = channel.apply(&rho);
        assert!((&out - &ComplexMatrix::identity(2).scale_re(0.5)).max_abs() < 1e-10);
    }

    // Dual of a constant channel ρ ↦ ρ₀: X ↦ tr(ρ₀ X)·1.
    let target = random_density(&mut rng, 2);
    let single = Observable::new(vec![ComplexMatrix::identity(2)]).unwrap();
    let constant = total_channel(&trash_and_prepare(&single, &[target.clone()]).unwrap());
    for _ in 0..5 {
        let x = random_hermitian(&mut rng, 2);
        let expected = ComplexMatrix::identity(2).scale_re(target.hs_inner(&x).re);
        assert!((&constant.dual_apply(&x).unwrap() - &expected).max_abs() < 1e-10);
    }

    // Rejects non-states.
    let not_state = ComplexMatrix::diag_real(&[0.9, 0.9]);
    let obs = sharp_basis(2);
    assert!(matches!(
        trash_and_prepare(&obs, &[not_state, ComplexMatrix::diag_real(&[1.0, 0.0])]),
        Err(InstrumentError::InvalidState { .. })
    ));
}

#[test]
fn repeatable_preparation_from_unit_eigenvectors() {
    let instrument = fixtures::three_outcome_repeatable_instrument();
    assert!(is_repeatable(&instrument, 1e-9));
    assert!(is_first_kind(&instrument, 1e-9));

    // Lüders of a commutative unsharp observable is first kind but not
    // repeatable.
    let unsharp = Observable::new(vec![
        ComplexMatrix::diag_real(&[0.75, 0.25]),
        ComplexMatrix::diag_real(&[0.25, 0.75]),
    ])
    .unwrap();
    let l = luders(&unsharp).unwrap();
    assert!(is_first_kind(&l, 1e-9));
    assert!(!is_repeatable(&l, 1e-7));

    // Lüders of a sharp observable is repeatable.
    let l = luders(&sharp_basis(3)).unwrap();
    assert!(is_repeatable(&l, 1e-10));

    // The identity instrument is first kind.
    let id_inst = Instrument::new(vec![vec![ComplexMatrix::identity(2)]]).unwrap();
    assert!(is_first_kind(&id_inst, 1e-12));
}

#[test]
fn luders_of_noncommutative_unit_eigenvalue_observable_is_not_first_kind() {
    let a = fixtures::three_outcome_unit_eigenvalue();
    let l = luders(&a).unwrap();
    // Direct evaluation of the fixed-point condition with raw matrix
    // arithmetic, independent of disturbance_of.
    let mut worst = 0.0f64;
    for x in a.effects() {
        let mut moved = ComplexMatrix::zeros(5, 5);
        for e in a.effects() {
            let root = crate::matrix::sqrt_psd(e, 1e-10).unwrap();
            moved = &moved + &(&(&root * x) * &root);
        }
        worst = worst.max(crate::matrix::operator_norm(&(&moved - x)));
    }
    assert!(worst > 1e-3, "Lüders fixed-point residual unexpectedly small: {worst}");
    assert!(!is_first_kind(&l, 1e-6));
}

#[test]
fn luders_of_commuting_pair_does_not_disturb() {
    // Commuting but unsharp pair, diagonal in the same basis.
    let a = Observable::new(vec![
        ComplexMatrix::diag_real(&[0.7, 0.2, 0.5]),
        ComplexMatrix::diag_real(&[0.3, 0.8, 0.5]),
    ])
    .unwrap();
    let b = Observable::new(vec![
        ComplexMatrix::diag_real(&[1.0, 0.0, 0.5]),
        ComplexMatrix::diag_real(&[0.0, 1.0, 0.5]),
    ])
    .unwrap();
    let l = luders(&a).unwrap();
    assert!(disturbance_of(&l, &b).unwrap() < 1e-12);
    assert!(is_first_kind(&l, 1e-10));
}

#[test]
fn trash_and_prepare_with_spectral_states_hits_the_qubit_optimum() {
    // For a sharp qubit pair at angle θ, preparing the eigenstates of the
    // measured observable leaves a disturbance of exactly ½ sin θ.
    for theta in [
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_3,
        std::f64::consts::FRAC_PI_2,
    ] {
        let (a, b) = fixtures::qubit_sharp_pair(theta);
        let states = vec![a.effect(0).clone(), a.effect(1).clone()];
        let instrument = trash_and_prepare(&a, &states).unwrap();
        let d = disturbance_of(&instrument, &b).unwrap();
        assert!(
            (d - 0.5 * theta.sin()).abs() < 1e-12,
            "theta={theta}: got {d}, want {}",
            0.5 * theta.sin()
        );
    }
}

#[test]
fn sequential_joint_observable_from_nondisturbing_instrument() {
    let instrument = fixtures::three_level_instrument();
    let b = fixtures::three_level_target();
    let joint = sequential_joint(&instrument, &b).unwrap();
    let a = fixtures::three_level_source();
    assert!(joint.marginal_residual(&a, &b) < 1e-10);
    for x in 0..2 {
        for y in 0..2 {
            let min = crate::matrix::min_eigenvalue(joint.effect(x, y)).unwrap();
            assert!(min > -1e-10);
        }
    }
}

#[test]
fn encode_outcomes_reproduces_column_statistics() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
    let (a, b) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
    let mu = 0.6;
    let joint = observables::two_outcome_joint(&a, &b, mu).unwrap();
    let am = observables::coarse_grain_pair(&a, mu).unwrap();
    let bm = observables::coarse_grain_pair(&b, mu).unwrap();
    let basis = ComplexMatrix::identity(2);
    let instrument = encode_outcomes(&joint, &basis).unwrap();

    // The instrument implements the row marginal A^μ.
    let induced = induced_observable(&instrument);
    for (e, f) in induced.effects().iter().zip(am.effects()) {
        assert!((e - f).max_abs() < 1e-10);
    }
    // Measuring the register afterwards reproduces the B^μ statistics.
    for _ in 0..100 {
        let rho = random_density(&mut rng, 2);
        for y in 0..2 {
            let mut reg = ComplexMatrix::zeros(2, 2);
            reg.set(y, y, c(1.0, 0.0));
            let mut prob = 0.0;
            for x in 0..instrument.outcome_count() {
                prob += reg.hs_inner(&instrument.apply(x, &rho)).re;
            }
            assert!((prob - bm.probability(y, &rho)).abs() < 1e-10);
        }
    }

    // A register that does not fit is rejected.
    let three = Observable::new(vec![
        ComplexMatrix::diag_real(&[0.4, 0.0]),
        ComplexMatrix::diag_real(&[0.3, 0.5]),
        ComplexMatrix::diag_real(&[0.3, 0.5]),
    ])
    .unwrap();
    let diag = Observable::new(vec![
        ComplexMatrix::diag_real(&[1.0, 0.0]),
        ComplexMatrix::diag_real(&[0.0, 1.0]),
    ])
    .unwrap();
    let joint3 = observables::product_joint(&diag, &three).unwrap();
    assert!(matches!(
        encode_outcomes(&joint3, &ComplexMatrix::identity(2)),
        Err(InstrumentError::EncodingTooLarge { .. })
    ));

    // Single-column joint: everything lands on the first register state.
    let one = Observable::new(vec![ComplexMatrix::identity(2)]).unwrap();
    let joint1 = observables::product_joint(&diag, &one).unwrap();
    let instrument = encode_outcomes(&joint1, &ComplexMatrix::identity(2)).unwrap();
    let rho = random_density(&mut rng, 2);
    for x in 0..2 {
        let out = instrument.apply(x, &rho);
        let p = diag.probability(x, &rho);
        let mut expected = ComplexMatrix::zeros(2, 2);
        expected.set(0, 0, c(p, 0.0));
        assert!((&out - &expected).max_abs() < 1e-10);
    }
}

#[test]
fn fixed_point_space_examples() {
    // Identity channel: the whole operator space is fixed.
    let id_inst = Instrument::new(vec![vec![ComplexMatrix::identity(3)]]).unwrap();
    let space = fixed_point_space(&total_channel(&id_inst));
    assert_eq!(space.dim(), 9);
    assert!(space.identity_residual() < 1e-10);

    // Completely depolarizing channel: only multiples of the identity.
    let half = ComplexMatrix::identity(2).scale_re(0.5);
    let obs = Observable::new(vec![half.clone(), half.clone()]).unwrap();
    let depol = trash_and_prepare(&obs, &[half.clone(), half]).unwrap();
    let space = fixed_point_space(&total_channel(&depol));
    assert_eq!(space.dim(), 1);

    // The three-level channel fixes both target effects.
    let channel = total_channel(&fixtures::three_level_instrument());
    let space = fixed_point_space(&channel);
    assert!(space.dim() >= 2);
    let b = fixtures::three_level_target();
    for by in b.effects() {
        assert!(space.membership_residual(by) < 1e-7);
    }
    for (f, r) in space.basis().iter().zip(space.residuals()) {
        assert!(f.hermiticity_deviation() < 1e-10);
        assert!(*r <= crate::tol::FIXED_POINT_RESIDUAL);
    }
}

#[test]
fn fixed_space_dimensions_match_between_pictures() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    for d in [2usize, 3] {
        for trial in 0..5 {
            let outcomes = 1 + (trial % 3);
            let mut groups = Vec::new();
            let mut raw = Vec::new();
            for _ in 0..outcomes {
                raw.push(ComplexMatrix::from_fn(d, d, |_, _| {
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }));
            }
            let mut total = ComplexMatrix::zeros(d, d);
            for g in &raw {
                total = &total + &(&g.adjoint() * g);
            }
            let decomp = eigh(&total.hermitian_part()).unwrap();
            let inv_root = decomp.recombine(
                &decomp.values.iter().map(|&v| 1.0 / v.max(1e-12).sqrt()).collect::<Vec<_>>(),
            );
            for g in raw {
                groups.push(vec![&g * &inv_root]);
            }
            let instrument = Instrument::new(groups).unwrap();
            let channel = total_channel(&instrument);
            let dual_dim = fixed_point_space(&channel).dim();
            let schrodinger_dim = schrodinger_fixed_point_space(&channel).dim();
            assert_eq!(dual_dim, schrodinger_dim, "d={d}, trial={trial}");
        }
    }
}

#[test]
fn full_rank_fixed_state_examples() {
    // Unital channel: the maximally mixed state qualifies.
    let l = luders(&fixtures::tetrahedral_qubit_povm()).unwrap();
    let rho = full_rank_fixed_state(&total_channel(&l)).expect("unital channel");
    assert!((&rho - &ComplexMatrix::identity(2).scale_re(0.5)).max_abs() < 1e-6);

    // Constant channel onto a pure state: no full-rank fixed point.
    let pure = ComplexMatrix::diag_real(&[1.0, 0.0]);
    let obs = Observable::new(vec![ComplexMatrix::identity(2)]).unwrap();
    let constant = trash_and_prepare(&obs, &[pure]).unwrap();
    assert!(full_rank_fixed_state(&total_channel(&constant)).is_none());

    // Constant channel onto a full-rank mixture: present.
    let mixed = ComplexMatrix::diag_real(&[0.6, 0.4]);
    let constant = trash_and_prepare(&obs, std::slice::from_ref(&mixed)).unwrap();
    let rho = full_rank_fixed_state(&total_channel(&constant)).expect("full-rank target");
    assert!((&rho - &mixed).max_abs() < 1e-6);
}

#[test]
fn proportional_projection_fixed_points_force_commutation() {
    // Instruments fixing an effect proportional to a projection commute with
    // it: exercised with Lüders instruments of observables diagonal in the
    // same basis as the fixed projection.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
    for _ in 0..10 {
        let d = 3;
        // Random unitary from a random Hermitian generator spectrum.
        let h = random_hermitian(&mut rng, d);
        let u = eigh(&h).unwrap().vectors;
        let diag_obs = Observable::new(vec![
            &(&u * &ComplexMatrix::diag_real(&[0.7, 0.2, 0.5])) * &u.adjoint(),
            &(&u * &ComplexMatrix::diag_real(&[0.3, 0.8, 0.5])) * &u.adjoint(),
        ])
        .unwrap();
        let p = (&(&u * &ComplexMatrix::diag_real(&[1.0, 1.0, 0.0])) * &u.adjoint())
            .hermitian_part()
            .scale_re(0.5); // c·P with c = 1/2
        let instrument = luders(&diag_obs).unwrap();
        let moved = instrument.dual_apply_total(&p);
        assert!((&moved - &p).max_abs() < 1e-10, "premise: c·P is fixed");
        let induced = induced_observable(&instrument);
        for ax in induced.effects() {
            let comm = crate::matrix::commutator(ax, &p).unwrap();
            assert!(crate::matrix::operator_norm(&comm) < 1e-7);
        }
    }
}

#[test]
fn squared_effects_in_span_force_commutation() {
    // An invertible smearing of a sharp observable keeps the projections in
    // the effect span, so every B_y² stays inside span{B_y}; any instrument
    // fixing such a target must commute with it.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
    for _ in 0..5 {
        let h = random_hermitian(&mut rng, 3);
        let u = eigh(&h).unwrap().vectors;
        let conj = |diag: &[f64]| -> ComplexMatrix {
            (&(&u * &ComplexMatrix::diag_real(diag)) * &u.adjoint()).hermitian_part()
        };
        let sharp = Observable::new(vec![conj(&[1.0, 1.0, 0.0]), conj(&[0.0, 0.0, 1.0])]).unwrap();
        let b = observables::smear(&sharp, &[vec![0.8, 0.1], vec![0.2, 0.9]]).unwrap();

        // Premise check: each B_y² projects back into span{B_y} exactly.
        for by in b.effects() {
            let sq = (by * by).hermitian_part();
            let g11 = b.effect(0).hs_inner(b.effect(0)).re;
            let g12 = b.effect(0).hs_inner(b.effect(1)).re;
            let g22 = b.effect(1).hs_inner(b.effect(1)).re;
            let r1 = b.effect(0).hs_inner(&sq).re;
            let r2 = b.effect(1).hs_inner(&sq).re;
            let det = g11 * g22 - g12 * g12;
            let c1 = (g22 * r1 - g12 * r2) / det;
            let c2 = (g11 * r2 - g12 * r1) / det;
            let proj = &b.effect(0).scale_re(c1) + &b.effect(1).scale_re(c2);
            assert!((&sq - &proj).frobenius_norm() <= 1e-9, "span premise fails");
        }

        // An instrument fixing the target: Lüders of a commuting observable.
        let a = Observable::new(vec![conj(&[0.7, 0.4, 0.2]), conj(&[0.3, 0.6, 0.8])]).unwrap();
        let instrument = luders(&a).unwrap();
        assert!(disturbance_of(&instrument, &b).unwrap() < 1e-10);
        let induced = induced_observable(&instrument);
        let (_, margin) = observables::commutes(&induced, &b).unwrap();
        assert!(margin <= 1e-7);
    }
}

#[test]
fn squared_effects_in_span_negative_control() {
    // For the three-level target, B₁² is not in span{B₁, B₂}; this is what
    // lets a non-commuting pair slip past the span criterion.
    let b = fixtures::three_level_target();
    let b1 = b.effect(0);
    let b1_sq = (b1 * b1).hermitian_part();
    // Project B₁² onto span{B₁, B₂} via the 2x2 Gram system.
    let g11 = b.effect(0).hs_inner(b.effect(0)).re;
    let g12 = b.effect(0).hs_inner(b.effect(1)).re;
    let g22 = b.effect(1).hs_inner(b.effect(1)).re;
    let r1 = b.effect(0).hs_inner(&b1_sq).re;
    let r2 = b.effect(1).hs_inner(&b1_sq).re;
    let det = g11 * g22 - g12 * g12;
    let c1 = (g22 * r1 - g12 * r2) / det;
    let c2 = (g11 * r2 - g12 * r1) / det;
    let proj = &b.effect(0).scale_re(c1) + &b.effect(1).scale_re(c2);
    assert!((&b1_sq - &proj).frobenius_norm() > 1e-2);
}

#[test]
fn prop_counting_bounds_for_repeatable_instruments() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
    // Families of repeatable instruments in d ≤ 6 built from orthonormal
    // unit eigenvectors plus residual POVMs on the complement.
    for d in [2usize, 3, 4, 5, 6] {
        for m in 1..=d {
            if m > d {
                continue;
            }
            let h = random_hermitian(&mut rng, d);
            let u = eigh(&h).unwrap().vectors;
            // m orthonormal vectors from the columns of u; residual subspace
            // spanned by the remaining columns.
            let mut effects = Vec::new();
            for x in 0..m {
                let col = u.column(x);
                effects.push(ComplexMatrix::outer(&col, &col));
            }
            if m < d {
                // Split the complement projection uniformly.
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
            assert!(observables::has_unit_eigenvalues(&obs));
            let states: Vec<ComplexMatrix> = (0..m)
                .map(|x| {
                    let col = u.column(x);
                    ComplexMatrix::outer(&col, &col)
                })
                .collect();
            let instrument = trash_and_prepare(&obs, &states).unwrap();
            assert!(is_repeatable(&instrument, 1e-9));

            let induced = induced_observable(&instrument);
            assert!(induced.outcome_count() <= d);
            if induced.outcome_count() == d {
                assert!(observables::is_sharp(&induced));
            }
            if induced.outcome_count() >= d - 1 {
                assert!(observables::is_commutative(&induced));
            }
        }
    }
}
