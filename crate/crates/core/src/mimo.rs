//! Capacity samples of an `r x t` Rayleigh MIMO channel.
//!
//! `C = log2 det(I_r + (P/t) H H^H)`, evaluated through the `t x t` form
//! `log2 det(I_t + (P/t) H^H H)` (equal by Sylvester's identity) with a
//! complex Cholesky factorization.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::stats::moments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoSamples {
    pub capacities: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Draw `n_samples` capacities (bits). `H` has i.i.d. `CN(0, 1)` entries;
/// sample `s` uses stream `s` of a ChaCha8 generator keyed by `seed`.
pub fn sample_mimo_capacity(r: usize, t: usize, power: f64, n_samples: usize, seed: u64) -> Result<MimoSamples> {
    if r < 1 || t < 1 {
        return domain(format!("need r, t >= 1, got {r}x{t}"));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return domain(format!("power must be non-negative, got {power}"));
    }
    let scale = power / t as f64;
    let mut re = vec![0.0; r * t];
    let mut im = vec![0.0; r * t];
    let mut a = vec![Complex64::new(0.0, 0.0); t * t];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5f64.sqrt();
    let mut capacities = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        rng.set_stream(s as u64);
        rng.set_word_pos(0);
        // column-major: column c occupies [c*r, (c+1)*r)
        for idx in 0..r * t {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            re[idx] = half * x;
            im[idx] = half * y;
        }
        gram(&re, &im, r, t, scale, &mut a);
        capacities.push(log2_det_cholesky(&mut a, t));
    }
    let m = moments(&capacities);
    Ok(MimoSamples {
        mean: m.mean,
        std: m.std,
        capacities,
    })
}

/// Lower triangle of `I + scale * H^H H`.
fn gram(re: &[f64], im: &[f64], r: usize, t: usize, scale: f64, a: &mut [Complex64]) {
    for i in 0..t {
        let (ar, ai) = (&re[i * r..(i + 1) * r], &im[i * r..(i + 1) * r]);
        for j in 0..=i {
            let (br, bi) = (&re[j * r..(j + 1) * r], &im[j * r..(j + 1) * r]);
            let (mut sr, mut si) = (0.0, 0.0);
            for k in 0..r {
                // conj(h_ki) h_kj, stored at (i, j) as the conjugate of (j, i)
                sr += ar[k] * br[k] + ai[k] * bi[k];
                si += ar[k] * bi[k] - ai[k] * br[k];
            }
            let mut v = Complex64::new(scale * sr, -scale * si);
            if i == j {
                v = Complex64::new(1.0 + scale * sr, 0.0);
            }
            a[i * t + j] = v;
        }
    }
}

/// `log2 det` of a Hermitian positive definite matrix from its lower triangle.
fn log2_det_cholesky(a: &mut [Complex64], n: usize) -> f64 {
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        let d = d.sqrt();
        a[j * n + j] = Complex64::new(d, 0.0);
        log_det += d.ln();
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = v / d;
        }
    }
    2.0 * log_det / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_power_is_zero_capacity() {
        let s = sample_mimo_capacity(1, 1, 0.0, 100, 3).unwrap();
        assert!(s.capacities.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_empty_dims() {
        assert!(sample_mimo_capacity(0, 1, 1.0, 1, 0).is_err());
    }

    #[test]
    fn cholesky_log_det_matches_direct_2x2() {
        // [[2, 1-i], [1+i, 3]] has det 6 - 2 = 4
        let mut a = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(3.0, 0.0),
        ];
        assert!((log2_det_cholesky(&mut a, 2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sylvester_identity_holds() {
        // H is 3x2; compare det(I_2 + s H^H H) with det(I_3 + s H H^H)
        let (r, t, s) = (3, 2, 0.7);
        let re = [0.3, -1.2, 0.5, 0.9, 0.1, -0.4];
        let im = [0.8, 0.2, -0.6, 0.0, 1.1, 0.35];
        let mut a = vec![Complex64::new(0.0, 0.0); t * t];
        gram(&re, &im, r, t, s, &mut a);
        let small = log2_det_cholesky(&mut a, t);
        // B = H^H is 2x3, column c of B is the conjugated row c of H
        let mut bre = vec![0.0; r * t];
        let mut bim = vec![0.0; r * t];
        for c in 0..r {
            for k in 0..t {
                bre[c * t + k] = re[k * r + c];
                bim[c * t + k] = -im[k * r + c];
            }
        }
        let mut big = vec![Complex64::new(0.0, 0.0); r * r];
        gram(&bre, &bim, t, r, s, &mut big);
        let large = log2_det_cholesky(&mut big, r);
        assert!((small - large).abs() < 1e-13, "{small} {large}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_mimo_capacity(4, 2, 1.0, 50, 9).unwrap();
        let b = sample_mimo_capacity(4, 2, 1.0, 50, 9).unwrap();
        assert_eq!(a, b);
    }
}
