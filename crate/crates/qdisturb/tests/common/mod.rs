//! Deterministic random generators shared by the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use num_complex::Complex64;
use qdisturb::instruments::Instrument;
use qdisturb::matrix::{eigh, ComplexMatrix};
use qdisturb::observables::Observable;
use rand::Rng;

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    random_complex(rng, d, d).hermitian_part()
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    eigh(&random_hermitian(rng, d)).expect("random Hermitian").vectors
}

pub fn random_density(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let g = random_complex(rng, d, d);
    let psd = (&g * &g.adjoint()).hermitian_part();
    psd.scale_re(1.0 / psd.trace().re)
}

/// Random POVM from positive seeds normalized by the inverse square root of
/// their sum; effects are full rank with probability one.
pub fn random_observable(rng: &mut impl Rng, d: usize, outcomes: usize) -> Observable {
    let seeds: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = random_complex(rng, d, d);
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    normalize_to_povm(&seeds)
}

/// Random rank-1 POVM: rank-one seeds survive the symmetric normalization.
pub fn random_rank_one_observable(rng: &mut impl Rng, d: usize, outcomes: usize) -> Observable {
    let seeds: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let v: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            ComplexMatrix::outer(&v, &v)
        })
        .collect();
    normalize_to_povm(&seeds)
}

pub fn normalize_to_povm(seeds: &[ComplexMatrix]) -> Observable {
    let d = seeds[0].rows();
    let mut total = ComplexMatrix::zeros(d, d);
    for s in seeds {
        total = &total + s;
    }
    let decomp = eigh(&total).expect("seed sum is Hermitian");
    let inv_root = decomp.recombine(
        &decomp
            .values
            .iter()
            .map(|&v| 1.0 / v.max(1e-12).sqrt())
            .collect::<Vec<_>>(),
    );
    let effects = seeds
        .iter()
        .map(|s| (&(&inv_root * s) * &inv_root).hermitian_part())
        .collect();
    Observable::new(effects).expect("normalized seeds form a POVM")
}

/// A pair of observables diagonal in one random basis, hence commuting.
pub fn random_commuting_pair(
    rng: &mut impl Rng,
    d: usize,
    outcomes: usize,
) -> (Observable, Observable) {
    let u = random_unitary(rng, d);
    let mut make = |n: usize| {
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; n]; d];
        for col in cols.iter_mut() {
            let mut remaining = 1.0;
            for entry in col.iter_mut().take(n - 1) {
                let p = rng.gen_range(0.0..remaining);
                *entry = p;
                remaining -= p;
            }
            col[n - 1] = remaining;
        }
        let effects = (0..n)
            .map(|x| {
                let diag = ComplexMatrix::diag_real(
                    &(0..d).map(|i| cols[i][x]).collect::<Vec<_>>(),
                );
                (&(&u * &diag) * &u.adjoint()).hermitian_part()
            })
            .collect();
        Observable::new(effects).expect("diagonal probabilities form a POVM")
    };
    (make(outcomes), make(outcomes))
}

/// Random instrument with `outcomes` outcomes and one Kraus operator each,
/// normalized so the total channel is trace preserving.
pub fn random_instrument(rng: &mut impl Rng, d: usize, outcomes: usize) -> Instrument {
    let raw: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_complex(rng, d, d)).collect();
    let mut total = ComplexMatrix::zeros(d, d);
    for g in &raw {
        total = &total + &(&g.adjoint() * g);
    }
    let decomp = eigh(&total.hermitian_part()).expect("Gram sum is Hermitian");
    let inv_root = decomp.recombine(
        &decomp
            .values
            .iter()
            .map(|&v| 1.0 / v.max(1e-12).sqrt())
            .collect::<Vec<_>>(),
    );
    let kraus = raw.iter().map(|g| vec![g * &inv_root]).collect();
    Instrument::new(kraus).expect("normalized Kraus family is trace preserving")
}
