use rand::Rng;

use crate::linalg::CVector;
use crate::rng;

/// `c_1 (t - a_1)(t - a_2)(t - a_3) + b_1 + sum_i d_i h(t - s_i)` on the
/// equidistant grid of `[0, 1]`, with `h` the Heaviside step. Without
/// `jumps` every `d_i` is zero.
pub fn piecewise_poly_signals(k: usize, n: usize, seed: u64, jumps: bool) -> Vec<CVector> {
    let mut r = rng::seeded(seed);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.0
            }
        })
        .collect();
    (0..k)
        .map(|_| {
            let c1 = r.random_range(0.0..10.0);
            let b1: f64 = r.random_range(0.0..1.0);
            let a: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..1.0));
            let s: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..1.0));
            let d: [f64; 3] = std::array::from_fn(|_| r.random_range(-0.5..0.5));
            let vals: Vec<f64> = grid
                .iter()
                .map(|&t| {
                    let mut v = c1 * (t - a[0]) * (t - a[1]) * (t - a[2]) + b1;
                    if jumps {
                        for i in 0..3 {
                            if t >= s[i] {
                                v += d[i];
                            }
                        }
                    }
                    v
                })
                .collect();
            CVector::from_real(&vals)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_forward;

    #[test]
    fn seeded_batches_repeat() {
        assert_eq!(
            piecewise_poly_signals(5, 64, 3, true),
            piecewise_poly_signals(5, 64, 3, true)
        );
        assert_ne!(
            piecewise_poly_signals(1, 64, 3, true),
            piecewise_poly_signals(1, 64, 4, true)
        );
        let s = piecewise_poly_signals(75, 512, 1, true);
        assert_eq!((s.len(), s[0].len()), (75, 512));
        assert!(s.iter().all(|x| x.iter().all(|z| z.im == 0.0)));
    }

    #[test]
    fn smooth_signals_have_decaying_haar_detail() {
        for x in piecewise_poly_signals(10, 256, 8, false) {
            let c = haar_forward(&x).unwrap();
            let energy = |lo: usize, hi: usize| c[lo..hi].iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!(
                energy(128, 256) < energy(16, 32),
                "{} vs {}",
                energy(128, 256),
                energy(16, 32)
            );
        }
    }
}
