//! Structured products and power iteration against dense brute force.

use lnorm::generators::GeneratorKind;
use lnorm::normest::{norm2_power, PowerOptions};
use lnorm::{GeneratorSequence, Shape, StructuredMatrix, TruncatedVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{dense, dense_sigma_max, dot_dd, random_generator, random_shape};

#[test]
fn matvec_matches_dense_on_500_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let m = rng.gen_range(1..=512);
        let shape = random_shape(&mut rng);
        let gen = random_generator(&mut rng, m);
        let a: Vec<f64> = (0..m as u64).map(|n| gen.eval(n)).collect();
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mat = StructuredMatrix::new(shape, gen);
        let y = mat.matvec(&TruncatedVector::new(x.clone()).unwrap()).unwrap();
        for (i, row) in dense(shape, &a).iter().enumerate() {
            let want = dot_dd(row, &x);
            let got = y.as_slice()[i];
            let err = (got - want).abs();
            let ok = err <= 1e-12 * want.abs() || err <= 1e-14;
            assert!(ok, "case {case}: {shape:?} M={m} row {i}: {got} vs {want}");
            if want.abs() > 1e-2 {
                worst = worst.max(err / want.abs());
            }
        }
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn materialize_dense_matches_entry_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..40 {
        let m = rng.gen_range(1..=64);
        let shape = random_shape(&mut rng);
        let gen = random_generator(&mut rng, m);
        let a: Vec<f64> = (0..m as u64).map(|n| gen.eval(n)).collect();
        let d = StructuredMatrix::new(shape, gen).materialize_dense(m).unwrap();
        for (i, row) in dense(shape, &a).iter().enumerate() {
            assert_eq!(d.row(i), row.as_slice());
        }
    }
}

#[test]
fn norm2_power_matches_dense_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let opts = PowerOptions::new(1e-14, 100_000).unwrap();
    for case in 0..12 {
        let m = rng.gen_range(1..=64);
        let shape = random_shape(&mut rng);
        let gen = random_generator(&mut rng, m);
        if matches!(gen.kind(), GeneratorKind::Custom { .. }) && case % 2 == 1 {
            continue;
        }
        let a: Vec<f64> = (0..m as u64).map(|n| gen.eval(n)).collect();
        let want = dense_sigma_max(&dense(shape, &a));
        let got = norm2_power(&StructuredMatrix::new(shape, gen), m, opts).unwrap();
        let rel = (got.value - want).abs() / want.max(1e-300);
        assert!(rel <= 1e-8, "case {case}: {shape:?} M={m}: {} vs {want}", got.value);
    }
}

#[test]
fn small_matvec_examples() {
    let a1 = GeneratorSequence::as_sequence(1.0).unwrap();
    let l = StructuredMatrix::new(Shape::L, a1.clone());
    let y = l.matvec(&TruncatedVector::new(vec![1.0; 3]).unwrap()).unwrap();
    for (got, want) in y.as_slice().iter().zip([11.0 / 6.0, 4.0 / 3.0, 1.0]) {
        assert!((got - want).abs() < 1e-15);
    }
    let c = StructuredMatrix::new(Shape::C, a1);
    let y = c.matvec(&TruncatedVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
    assert_eq!(y.as_slice(), &[1.0, 0.5]);
}
