//! Unitary transforms on power-of-two lengths: DFT, sequency-ordered
//! Walsh-Hadamard and the full-depth Haar wavelet transform.

use std::f64::consts::PI;

use super::{CVector, C64};
use crate::error::{size_err, Result};

fn check_pow2(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return size_err(format!("length {n} is not a power of two"));
    }
    Ok(n.trailing_zeros())
}

fn bit_reverse(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

fn fft_in_place(a: &mut [C64], inverse: bool) {
    let n = a.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = bit_reverse(i, bits);
        if i < j {
            a.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = C64::from_polar(1.0, ang * k as f64);
                let u = a[start + k];
                let v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
    let s = 1.0 / (n as f64).sqrt();
    for z in a.iter_mut() {
        *z *= s;
    }
}

/// Unitary DFT, `(Fx)_k = N^{-1/2} sum_j x_j exp(-2 pi i jk/N)`.
pub fn dft_forward(x: &[C64]) -> Result<CVector> {
    check_pow2(x.len())?;
    let mut a = x.to_vec();
    fft_in_place(&mut a, false);
    Ok(CVector(a))
}

pub fn dft_inverse(x: &[C64]) -> Result<CVector> {
    check_pow2(x.len())?;
    let mut a = x.to_vec();
    fft_in_place(&mut a, true);
    Ok(CVector(a))
}

fn fwht_natural(a: &mut [C64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let (u, v) = (a[k], a[k + h]);
                a[k] = u + v;
                a[k + h] = u - v;
            }
        }
        h <<= 1;
    }
    let s = 1.0 / (n as f64).sqrt();
    for z in a.iter_mut() {
        *z *= s;
    }
}

/// Natural (Hadamard) row index of the sequency-`k` Walsh function.
pub fn sequency_to_natural(k: usize, bits: u32) -> usize {
    bit_reverse(k ^ (k >> 1), bits)
}

/// Walsh-Hadamard transform in sequency order: row `k` has `k` sign changes.
pub fn fwht_sequency_forward(x: &[C64]) -> Result<CVector> {
    let bits = check_pow2(x.len())?;
    let mut a = x.to_vec();
    fwht_natural(&mut a);
    Ok((0..a.len())
        .map(|k| a[sequency_to_natural(k, bits)])
        .collect())
}

pub fn fwht_sequency_inverse(x: &[C64]) -> Result<CVector> {
    let bits = check_pow2(x.len())?;
    let mut a = vec![C64::new(0.0, 0.0); x.len()];
    for (k, v) in x.iter().enumerate() {
        a[sequency_to_natural(k, bits)] = *v;
    }
    fwht_natural(&mut a);
    Ok(CVector(a))
}

/// Orthonormal Haar DWT to full depth.
///
/// Output layout: index 0 is the scaling coefficient, index 1 the coarsest
/// wavelet, indices `[2^j, 2^{j+1})` the wavelets at scale `j`.
pub fn haar_forward(x: &[C64]) -> Result<CVector> {
    check_pow2(x.len())?;
    let n = x.len();
    let mut out = x.to_vec();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut len = n;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            tmp[i] = (a + b) * s;
            tmp[half + i] = (a - b) * s;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
    Ok(CVector(out))
}

pub fn haar_inverse(c: &[C64]) -> Result<CVector> {
    check_pow2(c.len())?;
    let n = c.len();
    let mut out = c.to_vec();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (out[i], out[half + i]);
            tmp[2 * i] = (a + d) * s;
            tmp[2 * i + 1] = (a - d) * s;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len <<= 1;
    }
    Ok(CVector(out))
}

/// Dense matrix of a linear transform, built column by column.
pub fn transform_matrix(n: usize, f: impl Fn(&[C64]) -> Result<CVector>) -> Result<super::CMatrix> {
    let cols = (0..n)
        .map(|j| f(&CVector::basis(n, j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(super::CMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                    .sum::<C64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dft_small_cases() {
        let y = dft_forward(&[c(0.0), c(1.0)]).unwrap();
        let s = (0.5f64).sqrt();
        assert!((y[0] - c(s)).norm() < 1e-15 && (y[1] - c(-s)).norm() < 1e-15);
        let y = dft_forward(&[c(1.0); 4]).unwrap();
        assert!((y[0] - c(2.0)).norm() < 1e-15);
        assert!(y[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn dft_matches_naive() {
        let mut rng = crate::rng::seeded(3);
        for bits in 0..=6 {
            let n = 1 << bits;
            let x = crate::rng::gaussian_cvector(&mut rng, n, 1.0);
            let fast = dft_forward(&x).unwrap();
            let slow = naive_dft(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(dft_forward(&[c(1.0); 6]).is_err());
        assert!(fwht_sequency_forward(&[c(1.0); 3]).is_err());
        assert!(haar_forward(&[]).is_err());
    }

    #[test]
    fn walsh_examples() {
        let y = fwht_sequency_forward(&[c(1.0), c(-1.0), c(1.0), c(-1.0)]).unwrap();
        let expect = [0.0, 0.0, 0.0, 2.0];
        for (a, b) in y.iter().zip(expect) {
            assert!((a - c(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn walsh_rows_have_k_sign_changes() {
        for bits in 1..=8 {
            let n = 1usize << bits;
            let w = transform_matrix(n, fwht_sequency_forward).unwrap();
            for k in 0..n {
                let changes = (1..n)
                    .filter(|&j| (w.get(k, j).re > 0.0) != (w.get(k, j - 1).re > 0.0))
                    .count();
                assert_eq!(changes, k, "n={n} row {k}");
            }
        }
    }

    #[test]
    fn haar_example() {
        let y = haar_forward(&[c(1.0), c(-1.0), c(0.0), c(0.0)]).unwrap();
        let nonzero: Vec<usize> = (0..4).filter(|&i| y[i].norm() > 1e-14).collect();
        assert_eq!(nonzero, vec![2]);
        assert!((y[2].re - 2f64.sqrt()).abs() < 1e-14);
    }

    type Pair = (fn(&[C64]) -> Result<CVector>, fn(&[C64]) -> Result<CVector>);

    #[test]
    fn round_trips() {
        let mut rng = crate::rng::seeded(11);
        for bits in 1..=10 {
            let n = 1 << bits;
            let x = crate::rng::gaussian_cvector(&mut rng, n, 1.0);
            let pairs: [Pair; 3] = [
                (dft_forward, dft_inverse),
                (fwht_sequency_forward, fwht_sequency_inverse),
                (haar_forward, haar_inverse),
            ];
            for (f, g) in pairs {
                let y = f(&x).unwrap();
                assert!((y.norm() - x.norm()).abs() < 1e-12 * x.norm().max(1.0));
                assert!(g(&y).unwrap().dist(&x) < 1e-12 * x.norm().max(1.0));
            }
        }
    }
}
