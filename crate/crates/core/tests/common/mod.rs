//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use lnorm::{GeneratorSequence, Shape};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Error-free `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dot product in double-double arithmetic, rounded once at the end.
pub fn dot_dd(a: &[f64], x: &[f64]) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (ai, xi) in a.iter().zip(x) {
        let p = ai * xi;
        let pe = ai.mul_add(*xi, -p);
        let (s, e) = two_sum(hi, p);
        hi = s;
        lo += e + pe;
    }
    hi + lo
}

/// Row-major dense section built straight from the entry rule.
pub fn dense(shape: Shape, a: &[f64]) -> Vec<Vec<f64>> {
    let m = a.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| match shape {
                    Shape::L => a[i.max(j)],
                    Shape::C => {
                        if j <= i {
                            a[i]
                        } else {
                            0.0
                        }
                    }
                    Shape::Ctr => {
                        if i <= j {
                            a[j]
                        } else {
                            0.0
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Dominant singular value from `1e5` plain power steps on the dense `A^T A`.
pub fn dense_sigma_max(d: &[Vec<f64>]) -> f64 {
    let m = d.len();
    let mut ata = vec![vec![0.0; m]; m];
    for (i, row) in ata.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..m).map(|k| d[k][i] * d[k][j]).sum();
        }
    }
    // fixed, non-uniform start so the oracle does not share the solver's start
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7 % 11) as f64)).collect();
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w: Vec<f64> = ata.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        lambda = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
        v = w.into_iter().map(|x| x / n).collect();
    }
    lambda.sqrt()
}

/// Lanczos approximation (g = 7, n = 9), valid for `z > 0.5`.
pub fn lanczos_gamma(z: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // reflection
        return std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * lanczos_gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * x
}

/// `sum_{j=1}^n Γ(j+b)/Γ(j+c)` by the term recurrence.
pub fn brute_gamma_ratio_sum(b: f64, c: f64, n: u64) -> f64 {
    let mut term = lanczos_gamma(1.0 + b) / lanczos_gamma(1.0 + c);
    let mut sum = 0.0;
    for j in 1..=n {
        sum += term;
        term *= (j as f64 + b) / (j as f64 + c);
    }
    sum
}

/// `B_n` in the Cauchy-Schwarz splitting, evaluated term by term.
pub fn brute_b(base: u64, t: f64, n: u32) -> f64 {
    let nn = base as f64;
    let mut b = (nn + 1.0).powf(t);
    for j in 1..n {
        b += (nn.powi(j as i32 + 1) - nn.powi(j as i32)).sqrt();
    }
    b
}

pub fn random_generator(rng: &mut ChaCha8Rng, m: usize) -> GeneratorSequence {
    match rng.gen_range(0..4) {
        0 => GeneratorSequence::as_sequence(rng.gen_range(0.05..3.0)).unwrap(),
        1 => GeneratorSequence::cesaro(rng.gen_range(0.05..3.0)).unwrap(),
        2 => GeneratorSequence::lacunary(rng.gen_range(2..7)).unwrap(),
        _ => {
            let len = rng.gen_range(1..=m);
            GeneratorSequence::custom((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
        }
    }
}

pub fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    [Shape::L, Shape::C, Shape::Ctr][rng.gen_range(0..3)]
}
