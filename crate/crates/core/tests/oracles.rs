use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toepblock::assembly::{
    assemble_a, compress, conjugate, flip, hankel, identity, kron, permutation_pi, toeplitz, toeplitz_rect,
    BlockStructureSpec, SizeLaw,
};
use toepblock::spectra::{eigenvalues_hermitian, singular_values, zero_distribution_profile};
use toepblock::symbol::SymbolGrid;
use toepblock::symparse::parse_scalar;
use toepblock::{CMat, Complex64};

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn tridiagonal_spectrum_closed_form() {
    let f = parse_scalar("2 - 2*cos(t)").unwrap();
    for n in 1..=64 {
        let ev = eigenvalues_hermitian(&toeplitz(&f, n).unwrap(), 0.0).unwrap();
        for (k, v) in ev.values().iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*v, exact, epsilon = 1e-10);
        }
    }
}

#[test]
fn svd_matches_gram_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let x = random_complex(&mut rng, 30, 50);
        let sv = singular_values(&x).unwrap();
        let gram = x.adjoint() * &x;
        let ev = eigenvalues_hermitian(&gram, 1e-12).unwrap();
        let top = &ev.values()[50 - 30..];
        for (s, l) in sv.values().iter().zip(top) {
            assert_abs_diff_eq!(*s, l.max(0.0).sqrt(), epsilon = 1e-8);
        }
    }
}

#[test]
fn permutation_and_flip_preserve_singular_values() {
    let p = |s| parse_scalar(s).unwrap();
    let grid = SymbolGrid::new(vec![
        vec![p("2 - 2*cos(t)"), p("1 - exp(-i*t)")],
        vec![p("1 - exp(i*t)"), p("2 - 2*cos(t) - 6*cos(2*t)")],
    ])
    .unwrap();
    let spec = BlockStructureSpec::new(grid, vec![SizeLaw::linear(1), SizeLaw::linear(1)]).unwrap();
    let a = assemble_a(&spec, 15).unwrap();
    let pi = permutation_pi(30, 2, 1).unwrap();
    let permuted = conjugate(&pi, a.data(), &pi).unwrap();
    let (s1, s2) = (singular_values(a.data()).unwrap(), singular_values(&permuted).unwrap());
    for (x, y) in s1.values().iter().zip(s2.values()) {
        assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
    }

    let f = p("1 - exp(i*t) - 3*exp(2*i*t) + exp(-i*t)");
    let x = toeplitz_rect(&f, 9, 6).unwrap();
    let xf = &x * kron(&flip(6), &identity(1));
    let (s1, s2) = (singular_values(&x).unwrap(), singular_values(&xf).unwrap());
    for (a, b) in s1.values().iter().zip(s2.values()) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
    }
}

#[test]
fn compression_counterexample() {
    let n = 200;
    let keep = n / 2;
    let x = CMat::from_fn(n, n, |i, j| Complex64::new(if i == j { (i + 1) as f64 / n as f64 } else { 0.0 }, 0.0));
    let c = compress(&x, keep, keep).unwrap();
    let ev = eigenvalues_hermitian(&c, 0.0).unwrap();
    let sup = |g: &dyn Fn(f64) -> f64| {
        ev.values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - g((i + 1) as f64 / keep as f64)).abs())
            .fold(0.0, f64::max)
    };
    assert!(sup(&|x| x / 2.0) <= 1.0 / n as f64);
    assert!(sup(&|x| x) >= 0.4);
}

#[test]
fn hankel_sequences_are_zero_distributed() {
    let single = parse_scalar("1 - exp(i*t)").unwrap();
    let sizes = [50, 100, 200, 400];
    let hs: Vec<CMat> = sizes.iter().map(|&n| hankel(&single, n).unwrap()).collect();
    let fr = zero_distribution_profile(&hs, 0.5).unwrap();
    for (f, n) in fr.iter().zip(sizes) {
        assert_eq!(*f, 1.0 / n as f64);
    }
    let several = parse_scalar("1 - exp(i*t) - 3*exp(2*i*t)").unwrap();
    let hs: Vec<CMat> = sizes.iter().map(|&n| hankel(&several, n).unwrap()).collect();
    let fr = zero_distribution_profile(&hs, 0.1).unwrap();
    assert!(fr.windows(2).all(|w| w[1] < w[0]), "{fr:?}");
    assert!(fr[3] < 0.05);
}

#[test]
fn random_symbols_permutation_identity() {
    // random trig polynomials with s = t = 2 and ν = 3
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rows = Vec::new();
    for _ in 0..3 {
        let mut row = Vec::new();
        for _ in 0..3 {
            let terms: Vec<(i64, CMat)> = (-2..=2).map(|k| (k, random_complex(&mut rng, 2, 2))).collect();
            row.push(toepblock::symbol::MatrixSymbol::trig(2, 2, terms).unwrap());
        }
        rows.push(row);
    }
    let grid = SymbolGrid::new(rows).unwrap();
    let spec = BlockStructureSpec::new(grid, vec![SizeLaw::linear(1); 3]).unwrap();
    let q = 7;
    let a = assemble_a(&spec, q).unwrap();
    let f = toepblock::symbol::build_distribution_symbol(spec.symbols(), spec.ratios()).unwrap();
    let pi = permutation_pi(3 * q, 3, 2).unwrap();
    assert_eq!(conjugate(&pi, a.data(), &pi).unwrap(), toeplitz(&f, q).unwrap());
}
