#![allow(dead_code)]

use rand::Rng;

use sspmprk::stability::third_order_s;
use sspmprk::{DenseMatrix, LinearPds, Scheme, Sspmprk2Params, Sspmprk3Params, StateVector};

/// Random conservative Metzler matrix with some zero couplings.
pub fn random_system<R: Rng>(rng: &mut R, n: usize) -> LinearPds {
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            if i != j && rng.gen_bool(0.7) {
                let v = 10f64.powf(rng.gen_range(-2.0..2.0));
                a[(i, j)] = v;
                col += v;
            }
        }
        a[(j, j)] = -col;
    }
    LinearPds::new(a).expect("column sums vanish by construction")
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    StateVector::new((0..n).map(|_| 10f64.powf(rng.gen_range(-2.0..1.5))).collect()).unwrap()
}

/// Uniformly chosen admissible `(α, β)` with `β ∈ [1/2, 5]`.
pub fn random_sspmprk2<R: Rng>(rng: &mut R) -> Sspmprk2Params {
    let beta: f64 = rng.gen_range(0.5..5.0);
    let alpha_max = ((1.0 - 1.0 / (2.0 * beta)) / beta).min(1.0);
    let alpha = rng.gen_range(0.0..=alpha_max);
    Sspmprk2Params::new(alpha, beta).unwrap()
}

pub fn random_sspmprk3<R: Rng>(rng: &mut R) -> Sspmprk3Params {
    let eta2 = rng.gen_range(0.0..=sspmprk::schemes::ETA2_MAX);
    Sspmprk3Params::new(eta2, third_order_s(eta2).unwrap()).unwrap()
}

pub fn sspmprk3_default() -> Scheme {
    Sspmprk3Params::new(1.0 / 3.0, third_order_s(1.0 / 3.0).unwrap())
        .unwrap()
        .into()
}

pub fn sspmprk2(alpha: f64, beta: f64) -> Scheme {
    Sspmprk2Params::new(alpha, beta).unwrap().into()
}

pub fn sort_complex(mut v: Vec<sspmprk::ComplexValue>) -> Vec<sspmprk::ComplexValue> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Largest distance between two spectra matched greedily by proximity.
pub fn spectrum_distance(a: &[sspmprk::ComplexValue], b: &[sspmprk::ComplexValue]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut unused: Vec<_> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = unused
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        unused.swap_remove(k);
    }
    worst
}
