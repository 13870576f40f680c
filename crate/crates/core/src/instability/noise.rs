use crate::error::{arg_err, Result};
use crate::linalg::{dft_inverse, CVector, C64};
use crate::operators::{MeasurementOperator, Transform};
use crate::rng;

/// `v = alpha A^* e` with `e` complex Gaussian (real and imaginary parts of
/// variance 10), scaled to `||v|| = target_norm`.
///
/// Requires an unscaled subsampled Fourier operator so that `A A^* = I`.
pub fn nullspace_perp_noise(
    a: &MeasurementOperator,
    target_norm: f64,
    seed: u64,
) -> Result<CVector> {
    if a.transform() != Some(Transform::Fourier) {
        return arg_err("null-space-orthogonal noise needs a subsampled Fourier operator");
    }
    if a.row_scaling().is_some_and(|d| d.iter().any(|&s| s != 1.0)) {
        return arg_err("operator rows must be unscaled");
    }
    if !(target_norm >= 0.0) {
        return arg_err("target norm must be nonnegative");
    }
    let mut r = rng::seeded(seed);
    loop {
        let e = rng::gaussian_cvector(&mut r, a.m(), 10f64.sqrt());
        let v = a.adjoint(&e)?;
        let n = v.norm();
        if n > 0.0 {
            return Ok(v.scale(target_norm / n));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TumorMode {
    /// Spectrum on a run of `band` unsampled frequencies; `Az` vanishes.
    ExactKernel { band: usize },
    /// Modulated Gaussian bump of spatial width `sigma` at the high frequency
    /// with the smallest leakage onto the sampled rows.
    NearKernel { sigma: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct TumorParams {
    pub mode: TumorMode,
    /// Spatial centre; drawn from the seed when absent.
    pub center: Option<usize>,
    pub norm: f64,
}

impl TumorParams {
    pub fn new(mode: TumorMode) -> Self {
        TumorParams {
            mode,
            center: None,
            norm: 0.4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tumor {
    pub z: CVector,
    pub norm: f64,
    pub az_norm: f64,
    /// Length of the shortest circular window around the centre holding 99% of the energy.
    pub support_width: usize,
    pub center: usize,
    /// Frequencies carrying the spectrum (exact mode) or the modulation frequency.
    pub frequencies: Vec<usize>,
}

fn sampled_frequencies(a: &MeasurementOperator) -> Result<Vec<bool>> {
    let n = a.n();
    let omega = a.omega().ok_or_else(|| {
        crate::Error::Argument("tumor needs a structured Fourier operator".into())
    })?;
    let mut hit = vec![false; n / 2 + 1];
    for &i in omega {
        let f = crate::operators::fourier_frequency(i).unsigned_abs() as usize;
        hit[f] = true;
    }
    Ok(hit)
}

fn circular_width(z: &CVector, center: usize) -> usize {
    let n = z.len();
    let total = z.norm_sqr();
    let mut acc = z[center].norm_sqr();
    let mut w = 1;
    let mut k = 1;
    while acc < 0.99 * total && w < n {
        acc += z[(center + k) % n].norm_sqr();
        w += 1;
        if w < n {
            acc += z[(center + n - k) % n].norm_sqr();
            w += 1;
        }
        k += 1;
    }
    w
}

/// Real, spatially localized perturbation whose spectrum avoids the sampled
/// frequencies of a subsampled Fourier operator, normalized to `params.norm`.
pub fn tumor_signal(a: &MeasurementOperator, params: TumorParams, seed: u64) -> Result<Tumor> {
    if a.transform() != Some(Transform::Fourier) {
        return arg_err("tumor construction needs a Fourier operator");
    }
    let n = a.n();
    let omega = a.omega().unwrap_or(&[]);
    let mut distinct = omega.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() >= n {
        return arg_err("every frequency is sampled");
    }
    let hit = sampled_frequencies(a)?;
    let mut r = rng::seeded(seed);
    let center = match params.center {
        Some(c) if c < n => c,
        Some(_) => return arg_err("centre out of range"),
        None => rand::Rng::random_range(&mut r, 0..n),
    };
    let phase = |f: usize| -> C64 {
        let t = -2.0 * std::f64::consts::PI * (f * center) as f64 / n as f64;
        C64::new(t.cos(), t.sin())
    };
    let (z, freqs) = match params.mode {
        TumorMode::ExactKernel { band } => {
            if band == 0 {
                return arg_err("band width must be positive");
            }
            // highest run of `band` frequencies in 1..N/2 that are all unsampled
            let top = n / 2;
            let mut start = None;
            let mut f = top;
            while f >= band {
                let lo = f + 1 - band;
                if lo >= 1 && (lo..=f).all(|g| !hit[g]) {
                    start = Some(lo);
                    break;
                }
                f -= 1;
            }
            let lo = start.ok_or_else(|| {
                crate::Error::Argument(format!("no unsampled band of {band} frequencies"))
            })?;
            let mut spec = vec![C64::new(0.0, 0.0); n];
            for (j, g) in (lo..lo + band).enumerate() {
                let w = (std::f64::consts::PI * (j + 1) as f64 / (band + 1) as f64)
                    .sin()
                    .powi(2);
                let c = phase(g) * w;
                spec[g] += c;
                if g != n - g {
                    spec[n - g] += c.conj();
                } else {
                    spec[g] = C64::new(spec[g].re, 0.0);
                }
            }
            let z: CVector = dft_inverse(&spec)?
                .iter()
                .map(|v| C64::new(v.re, 0.0))
                .collect();
            (z, (lo..lo + band).collect::<Vec<_>>())
        }
        TumorMode::NearKernel { sigma } => {
            if !(sigma > 0.0) {
                return arg_err("sigma must be positive");
            }
            let mut best: Option<(f64, CVector, usize)> = None;
            for f0 in n / 4..=n / 2 {
                let z: CVector = (0..n)
                    .map(|t| {
                        let d = (t as i64 - center as i64).rem_euclid(n as i64);
                        let d = d.min(n as i64 - d) as f64;
                        let arg = 2.0 * std::f64::consts::PI * (f0 * t) as f64 / n as f64
                            - 2.0 * std::f64::consts::PI * (f0 * center) as f64 / n as f64;
                        C64::new((-d * d / (2.0 * sigma * sigma)).exp() * arg.cos(), 0.0)
                    })
                    .collect();
                let z = z.scale(1.0 / z.norm());
                let leak = a.apply(&z)?.norm();
                if best.as_ref().is_none_or(|b| leak < b.0) {
                    best = Some((leak, z, f0));
                }
            }
            let (_, z, f0) = best.expect("at least one modulation frequency");
            (z, vec![f0])
        }
    };
    let nz = z.norm();
    if nz == 0.0 {
        return arg_err("degenerate tumor");
    }
    let z = z.scale(params.norm / nz);
    let az_norm = a.apply(&z)?.norm();
    Ok(Tumor {
        support_width: circular_width(&z, center),
        norm: z.norm(),
        az_norm,
        z,
        center,
        frequencies: freqs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn low_pass(n: usize, m: usize) -> MeasurementOperator {
        MeasurementOperator::unscaled(Transform::Fourier, n, (0..m).collect()).unwrap()
    }

    #[test]
    fn noise_lies_in_cokernel() {
        let a = low_pass(64, 10);
        let v = nullspace_perp_noise(&a, 0.3, 4).unwrap();
        assert!((v.norm() - 0.3).abs() < 1e-12);
        assert!(a.project_kernel(&v).unwrap().norm() < 1e-10);
        assert!((a.apply(&v).unwrap().norm() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exact_kernel_tumor() {
        let a = low_pass(64, 21);
        let t = tumor_signal(&a, TumorParams::new(TumorMode::ExactKernel { band: 8 }), 1).unwrap();
        assert!((t.norm - 0.4).abs() < 1e-12);
        assert!(t.az_norm < 1e-14);
        assert!(t.z.iter().all(|v| v.im == 0.0));
        assert!(t.support_width < 64);
    }

    #[test]
    fn full_sampling_rejected() {
        let a = low_pass(16, 16);
        assert!(tumor_signal(&a, TumorParams::new(TumorMode::ExactKernel { band: 1 }), 0).is_err());
        let b = low_pass(16, 14);
        assert!(tumor_signal(&b, TumorParams::new(TumorMode::ExactKernel { band: 3 }), 0).is_err());
    }
}
