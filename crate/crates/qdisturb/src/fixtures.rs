//! Reference observables and instruments used throughout the tests, the CLI
//! fixtures, and the acceptance suite.
//!
//! The three-level family is the classic example of a non-commuting pair
//! admitting a non-disturbing measurement; the five-outcome extension of the
//! same Kraus family shows that non-disturbance is not symmetric.

use num_complex::Complex64;

use crate::instruments::Instrument;
use crate::matrix::ComplexMatrix;
use crate::observables::Observable;

fn re(rows: &[Vec<f64>]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).expect("fixture rows are rectangular")
}

/// Two-outcome observable on C³ that fails to commute with
/// [`three_level_target`] yet can be measured without disturbing it.
pub fn three_level_source() -> Observable {
    let s2 = 2.0f64.sqrt();
    let a1 = re(&[
        vec![2.0, 0.0, -s2],
        vec![0.0, 4.0, 0.0],
        vec![-s2, 0.0, 3.0],
    ])
    .scale_re(0.25);
    let a2 = re(&[
        vec![2.0, 0.0, s2],
        vec![0.0, 0.0, 0.0],
        vec![s2, 0.0, 1.0],
    ])
    .scale_re(0.25);
    Observable::new(vec![a1, a2]).expect("fixture is well formed")
}

/// The diagonal two-outcome observable left undisturbed by the three-level
/// instrument.
pub fn three_level_target() -> Observable {
    let b1 = ComplexMatrix::diag_real(&[1.0, 0.0, 0.5]);
    let b2 = ComplexMatrix::diag_real(&[0.0, 1.0, 0.5]);
    Observable::new(vec![b1, b2]).expect("fixture is well formed")
}

/// The five Kraus operators of the three-level instrument in the Heisenberg
/// convention, i.e. I_x*(·) = Σ K ( · ) K†.
pub fn three_level_heisenberg_kraus() -> Vec<ComplexMatrix> {
    let s2 = 2.0f64.sqrt();
    let s10 = 10.0f64.sqrt();
    vec![
        re(&[
            vec![s2, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0],
        ])
        .scale_re(0.5),
        re(&[
            vec![0.0, 0.0, 0.0],
            vec![0.0, -s10, 0.0],
            vec![0.0, 2.0 * s10, 0.0],
        ])
        .scale_re(0.1),
        re(&[
            vec![0.0, 0.0, 0.0],
            vec![0.0, s2, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .scale_re(0.5),
        re(&[
            vec![0.0, 0.0, 0.0],
            vec![0.0, 4.0 * s10, 0.0],
            vec![0.0, 2.0 * s10, 0.0],
        ])
        .scale_re(0.05),
        re(&[
            vec![s2, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .scale_re(0.5),
    ]
}

/// The two-outcome instrument {K₁…K₄ | K₅} implementing
/// [`three_level_source`] without disturbing [`three_level_target`].
/// Stored Kraus operators are the adjoints of the Heisenberg family.
pub fn three_level_instrument() -> Instrument {
    let ks = three_level_heisenberg_kraus();
    let group1: Vec<ComplexMatrix> = ks[..4].iter().map(ComplexMatrix::adjoint).collect();
    let group2 = vec![ks[4].adjoint()];
    Instrument::new(vec![group1, group2]).expect("fixture instrument is trace preserving")
}

/// Five-outcome observable A_x = K_x K_x† built from the same Kraus family;
/// it spans a 5-dimensional operator subspace, so every measurement of the
/// two-outcome target disturbs it.
pub fn five_outcome_extension() -> Observable {
    let effects = three_level_heisenberg_kraus()
        .iter()
        .map(|k| (k * &k.adjoint()).hermitian_part())
        .collect();
    Observable::new(effects).expect("fixture is well formed")
}

/// The five-outcome instrument I_x*(·) = K_x · K_x†.
pub fn five_outcome_instrument() -> Instrument {
    let kraus = three_level_heisenberg_kraus()
        .iter()
        .map(|k| vec![k.adjoint()])
        .collect();
    Instrument::new(kraus).expect("fixture instrument is trace preserving")
}

/// ½(1 + n̂·σ) for a Bloch vector n̂.
pub fn qubit_effect(n: [f64; 3]) -> ComplexMatrix {
    let (x, y, z) = (n[0], n[1], n[2]);
    ComplexMatrix::from_rows(&[
        vec![
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
        ],
        vec![
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    ])
    .expect("fixture rows are rectangular")
}

/// Sharp two-outcome qubit observable along a Bloch axis.
pub fn qubit_sharp(n: [f64; 3]) -> Observable {
    let e1 = qubit_effect(n);
    let e2 = qubit_effect([-n[0], -n[1], -n[2]]);
    Observable::new(vec![e1, e2]).expect("fixture is well formed")
}

/// A sharp qubit pair at Bloch angle θ: the first along z, the second along
/// (sin θ, 0, cos θ).
pub fn qubit_sharp_pair(theta: f64) -> (Observable, Observable) {
    (
        qubit_sharp([0.0, 0.0, 1.0]),
        qubit_sharp([theta.sin(), 0.0, theta.cos()]),
    )
}

/// Informationally complete four-outcome qubit POVM with effects
/// ¼(1 + n̂_k·σ) at the tetrahedral Bloch directions.
pub fn tetrahedral_qubit_povm() -> Observable {
    let s = 1.0 / 3.0f64.sqrt();
    let dirs = [
        [s, s, s],
        [s, -s, -s],
        [-s, s, -s],
        [-s, -s, s],
    ];
    let effects = dirs
        .iter()
        .map(|&n| qubit_effect(n).scale_re(0.5))
        .collect();
    Observable::new(effects).expect("fixture is well formed")
}

/// Non-commutative three-outcome observable on C⁵ whose effects all carry
/// eigenvalue one: A_x = P_x ⊕ (residual on the last two coordinates), with
/// the two residual projections at 45°.
pub fn three_outcome_unit_eigenvalue() -> Observable {
    let d = 5;
    let mut p = Vec::new();
    for i in 0..3 {
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(i, i, Complex64::new(1.0, 0.0));
        p.push(m);
    }
    // R₁ projects onto e₃; R₂ onto (e₃ + e₄)/√2.
    let mut r1 = ComplexMatrix::zeros(d, d);
    r1.set(3, 3, Complex64::new(1.0, 0.0));
    let mut r2 = ComplexMatrix::zeros(d, d);
    for i in 3..5 {
        for j in 3..5 {
            r2.set(i, j, Complex64::new(0.5, 0.0));
        }
    }
    let mut tail_identity = ComplexMatrix::zeros(d, d);
    tail_identity.set(3, 3, Complex64::new(1.0, 0.0));
    tail_identity.set(4, 4, Complex64::new(1.0, 0.0));

    let a1 = &p[0] + &r1.scale_re(0.5);
    let a2 = &p[1] + &r2.scale_re(0.5);
    let a3 = &p[2] + &(&tail_identity - &(&r1.scale_re(0.5) + &r2.scale_re(0.5)));
    Observable::new(vec![a1, a2, a3]).expect("fixture is well formed")
}

/// The repeatable measure-and-prepare instrument for
/// [`three_outcome_unit_eigenvalue`]: prepares the unit eigenvector of the
/// observed effect.
pub fn three_outcome_repeatable_instrument() -> Instrument {
    let obs = three_outcome_unit_eigenvalue();
    let states: Vec<ComplexMatrix> = (0..3)
        .map(|i| {
            let mut m = ComplexMatrix::zeros(5, 5);
            m.set(i, i, Complex64::new(1.0, 0.0));
            m
        })
        .collect();
    crate::instruments::trash_and_prepare(&obs, &states)
        .expect("eigenstates are valid preparation states")
}
