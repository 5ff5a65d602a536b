//! Samplers for uniform, ternary, truncated Gaussian and smudging noise.
//! All of them are deterministic functions of the RNG stream they consume.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{BigCoeffs, Domain, RingElement, RingParams};
use crate::error::{Error, Result};
use crate::exact::rational_from_f64;

/// Truncated discrete Gaussian: standard deviation `sigma`, support `[-B, B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
    bound: BigRational,
}

impl NoiseSpec {
    pub fn new(sigma: f64, bound: BigRational) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParams(format!("sigma {sigma} must be finite and non-negative")));
        }
        if bound < rational_from_f64(sigma) {
            return Err(Error::InvalidParams(format!(
                "noise bound {bound} is smaller than sigma {sigma}"
            )));
        }
        Ok(Self { sigma, bound })
    }

    /// `B = 6σ`.
    pub fn with_default_bound(sigma: f64) -> Result<Self> {
        Self::new(sigma, rational_from_f64(sigma) * BigRational::from_integer(6.into()))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bound(&self) -> &BigRational {
        &self.bound
    }

    /// Largest integer inside the support.
    pub fn integer_bound(&self) -> i64 {
        self.bound.floor().to_integer().to_i64().unwrap_or(i64::MAX)
    }
}

/// Uniform integer in `[0, m)` by rejection on `bits(m)`-bit draws.
pub fn uniform_below<R: Rng + ?Sized>(m: &BigUint, rng: &mut R) -> BigUint {
    assert!(!m.is_zero(), "empty range");
    let bits = m.bits();
    if bits <= 128 {
        let m = m.to_u128().expect("fits in 128 bits");
        let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
        loop {
            let hi = rng.random::<u64>() as u128;
            let lo = rng.random::<u64>() as u128;
            let v = ((hi << 64) | lo) & mask;
            if v < m {
                return BigUint::from(v);
            }
        }
    }
    let words = bits.div_ceil(64) as usize;
    let top_bits = bits - 64 * (words as u64 - 1);
    let top_mask = if top_bits == 64 { u64::MAX } else { (1u64 << top_bits) - 1 };
    loop {
        let mut digits: Vec<u64> = (0..words).map(|_| rng.random::<u64>()).collect();
        *digits.last_mut().expect("non-empty") &= top_mask;
        let v = BigUint::new(digits.iter().flat_map(|d| [*d as u32, (*d >> 32) as u32]).collect());
        if &v < m {
            return v;
        }
    }
}

/// Element with every coefficient uniform modulo q (drawn as one big
/// integer, then decomposed into residues).
pub fn sample_uniform<R: Rng + ?Sized>(params: &Arc<RingParams>, rng: &mut R) -> RingElement {
    let n = params.n();
    let k = params.num_primes();
    let mut residues = vec![0u64; n * k];
    for i in 0..n {
        let v = uniform_below(params.q(), rng);
        for (j, r) in params.residues_of(&v).into_iter().enumerate() {
            residues[j * n + i] = r;
        }
    }
    RingElement::from_residues(params, Domain::Coefficient, residues).expect("reduced residues")
}

pub(crate) fn ternary_coeffs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(0..3i64) - 1).collect()
}

/// Coefficients uniform over {-1, 0, 1}.
pub fn sample_ternary<R: Rng + ?Sized>(params: &Arc<RingParams>, rng: &mut R) -> RingElement {
    RingElement::from_i64(params, &ternary_coeffs(params.n(), rng)).expect("length n")
}

pub(crate) fn gaussian_coeffs<R: Rng + ?Sized>(n: usize, spec: &NoiseSpec, rng: &mut R) -> Vec<i64> {
    if spec.sigma == 0.0 {
        return vec![0; n];
    }
    let normal = Normal::new(0.0, spec.sigma).expect("valid sigma");
    let bound = spec.integer_bound();
    (0..n)
        .map(|_| loop {
            let x = normal.sample(rng).round();
            // resample instead of clamping so the tails are not distorted
            if x.abs() <= bound as f64 {
                break x as i64;
            }
        })
        .collect()
}

/// Rounded Gaussian of std `sigma`, rejection-resampled into `[-B, B]`.
pub fn sample_gaussian<R: Rng + ?Sized>(
    params: &Arc<RingParams>,
    spec: &NoiseSpec,
    rng: &mut R,
) -> RingElement {
    RingElement::from_i64(params, &gaussian_coeffs(params.n(), spec, rng)).expect("length n")
}

/// Smudging noise: `n` coefficients uniform over the integers of
/// `[-b_smg, b_smg]`.
pub fn sample_smudging<R: Rng + ?Sized>(n: usize, b_smg: &BigUint, rng: &mut R) -> BigCoeffs {
    if b_smg.is_zero() {
        return BigCoeffs::zero(n);
    }
    let width = b_smg * 2u32 + 1u32;
    let offset = BigInt::from(b_smg.clone());
    BigCoeffs::new(
        (0..n)
            .map(|_| BigInt::from(uniform_below(&width, rng)) - &offset)
            .collect(),
    )
}

/// Same draws as [`sample_smudging`], reduced straight into residues without
/// materializing big integers when `2·b_smg + 1` fits in 128 bits.
pub(crate) fn sample_smudging_rns<R: Rng + ?Sized>(
    params: &Arc<RingParams>,
    b_smg: &BigUint,
    rng: &mut R,
) -> RingElement {
    let n = params.n();
    if b_smg.is_zero() {
        return RingElement::zero(params);
    }
    let width = b_smg * 2u32 + 1u32;
    if width.bits() > 128 {
        return sample_smudging(n, b_smg, rng)
            .to_ring(params)
            .expect("length n");
    }
    let bits = width.bits();
    let width = width.to_u128().expect("fits");
    let offset = b_smg.to_u128().expect("fits");
    let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
    let k = params.num_primes();
    let mut residues = vec![0u64; n * k];
    for i in 0..n {
        let v = loop {
            let hi = rng.random::<u64>() as u128;
            let lo = rng.random::<u64>() as u128;
            let v = ((hi << 64) | lo) & mask;
            if v < width {
                break v;
            }
        };
        for (j, m) in params.moduli().iter().enumerate() {
            residues[j * n + i] = if v >= offset {
                m.reduce_u128(v - offset)
            } else {
                m.neg(m.reduce_u128(offset - v))
            };
        }
    }
    RingElement::from_residues(params, Domain::Coefficient, residues).expect("reduced residues")
}

/// Empirical mean and variance of integer samples (used by statistical tests
/// and the self-test).
pub fn sample_moments(values: &[BigInt]) -> (f64, f64) {
    let sum: BigInt = values.iter().sum();
    let mean = BigRational::new(sum, BigInt::from(values.len()));
    let var = values
        .iter()
        .map(|v| {
            let d = BigRational::from_integer(v.clone()) - &mean;
            &d * &d
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
        / BigRational::from_integer(BigInt::from(values.len()));
    (
        mean.to_f64().unwrap_or(f64::NAN),
        var.to_f64().unwrap_or(f64::NAN),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{crt_lift, inf_norm, modulus::ntt_primes_below};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn params(n: usize, bits: u32, k: usize) -> Arc<RingParams> {
        RingParams::new(n, &ntt_primes_below(bits, n, k, &[]).unwrap()).unwrap()
    }

    #[test]
    fn samplers_are_reproducible() {
        let p = params(16, 40, 2);
        let spec = NoiseSpec::with_default_bound(3.2).unwrap();
        assert_eq!(sample_uniform(&p, &mut rng(7)), sample_uniform(&p, &mut rng(7)));
        assert_eq!(sample_ternary(&p, &mut rng(7)), sample_ternary(&p, &mut rng(7)));
        assert_eq!(
            sample_gaussian(&p, &spec, &mut rng(7)),
            sample_gaussian(&p, &spec, &mut rng(7))
        );
        assert_ne!(sample_uniform(&p, &mut rng(7)), sample_uniform(&p, &mut rng(8)));
    }

    #[test]
    fn default_bound_is_six_sigma() {
        let spec = NoiseSpec::with_default_bound(3.2).unwrap();
        assert_eq!(spec.bound(), &BigRational::new(96.into(), 5.into()));
        assert_eq!(spec.integer_bound(), 19);
        assert!(NoiseSpec::new(3.2, BigRational::from_integer(3.into())).is_err());
        assert!(NoiseSpec::new(-1.0, BigRational::from_integer(3.into())).is_err());
    }

    #[test]
    fn gaussian_support_and_zero_sigma() {
        let p = params(1024, 50, 1);
        let spec = NoiseSpec::with_default_bound(3.2).unwrap();
        let mut r = rng(1);
        for _ in 0..20 {
            let e = sample_gaussian(&p, &spec, &mut r);
            assert!(inf_norm(&crt_lift(&e)) <= BigUint::from(19u32));
        }
        let zero = NoiseSpec::with_default_bound(0.0).unwrap();
        assert_eq!(sample_gaussian(&p, &zero, &mut r), RingElement::zero(&p));
    }

    #[test]
    fn ternary_support() {
        let p = params(64, 50, 2);
        let mut r = rng(2);
        for _ in 0..50 {
            assert!(inf_norm(&crt_lift(&sample_ternary(&p, &mut r))) <= BigUint::from(1u32));
        }
    }

    #[test]
    fn smudging_support() {
        let mut r = rng(3);
        assert_eq!(sample_smudging(8, &BigUint::zero(), &mut r), BigCoeffs::zero(8));
        let b = BigUint::from(1u32) << 200u32;
        let s = sample_smudging(256, &b, &mut r);
        assert!(inf_norm(&s) <= b);
        let small = BigUint::from(3u32);
        let s = sample_smudging(2000, &small, &mut r);
        assert!(inf_norm(&s) <= small);
        // every value of [-3, 3] shows up
        for v in -3i64..=3 {
            assert!(s.coeffs().iter().any(|c| *c == BigInt::from(v)));
        }
    }

    #[test]
    fn rns_smudging_matches_big_path() {
        let p = params(16, 60, 3);
        for b in [BigUint::from(5u32), BigUint::from(1u32) << 100u32, BigUint::from(1u32) << 140u32] {
            let big = sample_smudging(16, &b, &mut rng(9)).to_ring(&p).unwrap();
            let fast = sample_smudging_rns(&p, &b, &mut rng(9));
            assert_eq!(big, fast);
        }
    }

    #[test]
    fn uniform_below_large_modulus() {
        let m = (BigUint::from(1u32) << 300u32) - 17u32;
        let mut r = rng(4);
        for _ in 0..100 {
            assert!(uniform_below(&m, &mut r) < m);
        }
    }
}
