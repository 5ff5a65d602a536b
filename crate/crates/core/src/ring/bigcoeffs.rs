use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use super::{RingElement, RingParams};
use crate::error::Result;

/// Coefficients as arbitrary-precision signed integers.
///
/// Values produced by [`crt_lift`] lie in the centered range `(-q/2, q/2]`.
/// Noise vectors (smudging) use the same carrier before reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigCoeffs(Vec<BigInt>);

impl BigCoeffs {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        Self(coeffs)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![BigInt::zero(); n])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<BigInt> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// RNS decomposition (each value reduced modulo q).
    pub fn to_ring(&self, params: &Arc<RingParams>) -> Result<RingElement> {
        RingElement::from_bigints(params, &self.0)
    }

    /// Coefficient-wise difference, no modular reduction.
    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Centered CRT reconstruction of every coefficient.
pub fn crt_lift(a: &RingElement) -> BigCoeffs {
    let coeff = a.to_coefficient();
    let params = coeff.params();
    let n = params.n();
    let k = params.num_primes();
    let res = coeff.residues();
    BigCoeffs(
        (0..n)
            .map(|i| params.reconstruct((0..k).map(|j| res[j * n + i])))
            .collect(),
    )
}

/// Largest absolute coefficient.
pub fn inf_norm(a: &BigCoeffs) -> BigUint {
    a.0.iter()
        .map(|c| c.abs().to_biguint().expect("absolute value is non-negative"))
        .max()
        .unwrap_or_default()
}
