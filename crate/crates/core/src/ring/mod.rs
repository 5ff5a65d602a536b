//! Exact arithmetic in `R_q = Z[x]/(x^n + 1)` in residue-number-system form.
//!
//! `q` is a product of word-sized primes `p_j ≡ 1 (mod 2n)`. Elements carry
//! one residue vector per prime and a flag telling whether the vectors hold
//! coefficients or NTT evaluations. The centered lift to `(-q/2, q/2]`
//! ([`BigCoeffs`]) is the canonical external view.

mod bigcoeffs;
pub mod modulus;
pub mod ntt;
mod sampling;
mod schoolbook;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use modulus::Modulus;
use ntt::NttTable;

pub use bigcoeffs::{crt_lift, inf_norm, BigCoeffs};
pub use sampling::{
    sample_gaussian, sample_smudging, sample_ternary, sample_uniform, uniform_below, NoiseSpec,
};
pub use schoolbook::ring_mul_schoolbook;
pub(crate) use sampling::sample_smudging_rns;
pub use sampling::sample_moments;

/// Ring degree, RNS primes and the derived CRT/NTT tables.
#[derive(Clone)]
pub struct RingParams {
    n: usize,
    moduli: Vec<Modulus>,
    ntt: Vec<NttTable>,
    q: BigUint,
    half_q: BigUint,
    // CRT reconstruction: q/p_j and (q/p_j)^{-1} mod p_j
    crt_basis: Vec<BigUint>,
    crt_inv: Vec<u64>,
}

impl fmt::Debug for RingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingParams")
            .field("n", &self.n)
            .field("primes", &self.primes())
            .field("log2_q", &self.log2_q())
            .finish()
    }
}

impl PartialEq for RingParams {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.moduli == other.moduli
    }
}

impl Eq for RingParams {}

impl RingParams {
    /// Validates `n` and the prime list and precomputes the NTT and CRT tables.
    pub fn new(n: usize, primes: &[u64]) -> Result<Arc<Self>> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidParams(format!(
                "ring degree {n} must be a power of two and at least 4"
            )));
        }
        if primes.is_empty() {
            return Err(Error::InvalidParams("at least one prime is required".into()));
        }
        if primes.len() > u8::MAX as usize {
            return Err(Error::InvalidParams("too many primes".into()));
        }
        for (i, &p) in primes.iter().enumerate() {
            if primes[..i].contains(&p) {
                return Err(Error::InvalidParams(format!("prime {p} listed twice")));
            }
            if !modulus::is_prime(p) {
                return Err(Error::InvalidParams(format!("{p} is not prime")));
            }
            if (p - 1) % (2 * n as u64) != 0 {
                return Err(Error::InvalidParams(format!(
                    "prime {p} is not congruent to 1 mod {}",
                    2 * n
                )));
            }
        }
        let moduli = primes
            .iter()
            .map(|&p| Modulus::new(p))
            .collect::<Result<Vec<_>>>()?;
        let ntt = moduli
            .iter()
            .map(|&m| NttTable::new(m, n))
            .collect::<Result<Vec<_>>>()?;
        let q = primes.iter().fold(BigUint::one(), |acc, &p| acc * p);
        let half_q = &q >> 1;
        let mut crt_basis = Vec::with_capacity(primes.len());
        let mut crt_inv = Vec::with_capacity(primes.len());
        for m in &moduli {
            let qj = &q / m.value();
            let qj_mod = (&qj % m.value()).to_u64().expect("residue fits u64");
            crt_inv.push(m.inv(qj_mod).expect("primes are coprime"));
            crt_basis.push(qj);
        }
        Ok(Arc::new(Self {
            n,
            moduli,
            ntt,
            q,
            half_q,
            crt_basis,
            crt_inv,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// Bit length of q.
    pub fn log2_q(&self) -> u64 {
        self.q.bits()
    }

    pub fn primes(&self) -> Vec<u64> {
        self.moduli.iter().map(|m| m.value()).collect()
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn num_primes(&self) -> usize {
        self.moduli.len()
    }

    /// Residues of a non-negative integer modulo each prime.
    pub fn residues_of(&self, v: &BigUint) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|m| (v % m.value()).to_u64().expect("residue fits u64"))
            .collect()
    }

    /// Centered representative in `(-q/2, q/2]` of a value in `[0, q)`.
    pub fn center(&self, v: BigUint) -> BigInt {
        if v > self.half_q {
            BigInt::from(v) - BigInt::from(self.q.clone())
        } else {
            BigInt::from(v)
        }
    }

    /// CRT reconstruction of one coefficient from its residues, centered.
    pub fn reconstruct(&self, residues: impl Iterator<Item = u64>) -> BigInt {
        if self.moduli.len() == 1 {
            let r = residues.into_iter().next().unwrap_or(0);
            return self.center(BigUint::from(r));
        }
        let mut acc = BigUint::zero();
        for ((r, m), (basis, inv)) in residues
            .zip(&self.moduli)
            .zip(self.crt_basis.iter().zip(&self.crt_inv))
        {
            let y = m.mul(r, *inv);
            acc += basis * y;
        }
        // acc < k·q
        while acc >= self.q {
            acc -= &self.q;
        }
        self.center(acc)
    }
}

/// Which representation an element's residue vectors hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Coefficient,
    Ntt,
}

/// A polynomial of `R_q` as per-prime residue vectors, prime-major.
#[derive(Clone)]
pub struct RingElement {
    params: Arc<RingParams>,
    domain: Domain,
    // residues[j * n + i] = coefficient i modulo prime j
    residues: Vec<u64>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingElement")
            .field("n", &self.params.n)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        if self.params != other.params {
            return false;
        }
        if self.domain == other.domain {
            return self.residues == other.residues;
        }
        self.to_coefficient().residues == other.to_coefficient().residues
    }
}

impl Eq for RingElement {}

fn same_params(a: &Arc<RingParams>, b: &Arc<RingParams>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl RingElement {
    pub fn zero(params: &Arc<RingParams>) -> Self {
        Self {
            params: params.clone(),
            domain: Domain::Coefficient,
            residues: vec![0; params.n * params.num_primes()],
        }
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        let mut e = Self::zero(params);
        for j in 0..params.num_primes() {
            e.residues[j * params.n] = 1;
        }
        e
    }

    /// Builds an element from raw residues (prime-major) in the given domain.
    pub fn from_residues(params: &Arc<RingParams>, domain: Domain, residues: Vec<u64>) -> Result<Self> {
        if residues.len() != params.n * params.num_primes() {
            return Err(Error::LengthMismatch(format!(
                "expected {} residues, got {}",
                params.n * params.num_primes(),
                residues.len()
            )));
        }
        for (j, m) in params.moduli.iter().enumerate() {
            if residues[j * params.n..(j + 1) * params.n]
                .iter()
                .any(|&r| r >= m.value())
            {
                return Err(Error::Decode(format!("residue not reduced modulo {}", m.value())));
            }
        }
        Ok(Self {
            params: params.clone(),
            domain,
            residues,
        })
    }

    /// Element with small signed coefficients, reduced into every prime.
    pub fn from_i64(params: &Arc<RingParams>, coeffs: &[i64]) -> Result<Self> {
        let n = params.n;
        if coeffs.len() != n {
            return Err(Error::LengthMismatch(format!("expected {n} coefficients, got {}", coeffs.len())));
        }
        let mut residues = vec![0u64; n * params.num_primes()];
        for (j, m) in params.moduli.iter().enumerate() {
            for (dst, &c) in residues[j * n..(j + 1) * n].iter_mut().zip(coeffs) {
                *dst = m.reduce_i64(c);
            }
        }
        Ok(Self {
            params: params.clone(),
            domain: Domain::Coefficient,
            residues,
        })
    }

    /// RNS decomposition of arbitrary signed integers (reduced mod q).
    pub fn from_bigints(params: &Arc<RingParams>, coeffs: &[BigInt]) -> Result<Self> {
        let n = params.n;
        if coeffs.len() != n {
            return Err(Error::LengthMismatch(format!("expected {n} coefficients, got {}", coeffs.len())));
        }
        let mut residues = vec![0u64; n * params.num_primes()];
        for (i, c) in coeffs.iter().enumerate() {
            if let Some(small) = c.to_i64() {
                for (j, m) in params.moduli.iter().enumerate() {
                    residues[j * n + i] = m.reduce_i64(small);
                }
                continue;
            }
            let (sign, mag) = (c.sign(), c.magnitude());
            let digits = mag.to_u64_digits();
            for (j, m) in params.moduli.iter().enumerate() {
                // Horner over 64-bit digits, most significant first
                let mut r = 0u64;
                for &d in digits.iter().rev() {
                    r = m.reduce_u128(((r as u128) << 64) | d as u128);
                }
                residues[j * n + i] = if sign == num_bigint::Sign::Minus { m.neg(r) } else { r };
            }
        }
        Ok(Self {
            params: params.clone(),
            domain: Domain::Coefficient,
            residues,
        })
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// Residue vector for prime `j`.
    pub fn limb(&self, j: usize) -> &[u64] {
        let n = self.params.n;
        &self.residues[j * n..(j + 1) * n]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamsMismatch);
        }
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    pub fn to_ntt(&self) -> Self {
        let mut out = self.clone();
        out.ntt_in_place();
        out
    }

    pub fn to_coefficient(&self) -> Self {
        let mut out = self.clone();
        out.intt_in_place();
        out
    }

    pub fn ntt_in_place(&mut self) {
        if self.domain == Domain::Ntt {
            return;
        }
        let n = self.params.n;
        for (j, table) in self.params.ntt.iter().enumerate() {
            table.forward(&mut self.residues[j * n..(j + 1) * n]);
        }
        self.domain = Domain::Ntt;
    }

    pub fn intt_in_place(&mut self) {
        if self.domain == Domain::Coefficient {
            return;
        }
        let n = self.params.n;
        for (j, table) in self.params.ntt.iter().enumerate() {
            table.inverse(&mut self.residues[j * n..(j + 1) * n]);
        }
        self.domain = Domain::Coefficient;
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Modulus, u64, u64) -> u64) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.params.n;
        let mut residues = Vec::with_capacity(self.residues.len());
        for (j, m) in self.params.moduli.iter().enumerate() {
            let range = j * n..(j + 1) * n;
            residues.extend(
                self.residues[range.clone()]
                    .iter()
                    .zip(&other.residues[range])
                    .map(|(&a, &b)| f(m, a, b)),
            );
        }
        Ok(Self {
            params: self.params.clone(),
            domain: self.domain,
            residues,
        })
    }

    /// Coefficient-wise sum modulo every prime.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |m, a, b| m.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |m, a, b| m.sub(a, b))
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        let n = self.params.n;
        for (j, m) in self.params.moduli.iter().enumerate() {
            let range = j * n..(j + 1) * n;
            for (a, &b) in self.residues[range.clone()].iter_mut().zip(&other.residues[range]) {
                *a = m.add(*a, b);
            }
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        let n = self.params.n;
        let mut out = self.clone();
        for (j, m) in self.params.moduli.iter().enumerate() {
            for a in &mut out.residues[j * n..(j + 1) * n] {
                *a = m.neg(*a);
            }
        }
        out
    }

    /// Negacyclic product via per-prime NTT. The result is in NTT form only
    /// when both operands are; otherwise it is returned in coefficient form.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamsMismatch);
        }
        let both_ntt = self.domain == Domain::Ntt && other.domain == Domain::Ntt;
        let a = self.to_ntt();
        let b = if other.domain == Domain::Ntt {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.to_ntt())
        };
        let mut out = a.zip_with(&b, |m, x, y| m.mul(x, y))?;
        if !both_ntt {
            out.intt_in_place();
        }
        Ok(out)
    }

    /// Multiplies every coefficient by a per-prime scalar (e.g. `Δ mod p_j`).
    pub fn mul_scalar_residues(&self, scalar: &[u64]) -> Self {
        let n = self.params.n;
        let mut out = self.clone();
        for (j, m) in self.params.moduli.iter().enumerate() {
            let s = scalar[j];
            let ss = m.shoup(s);
            for a in &mut out.residues[j * n..(j + 1) * n] {
                *a = m.mul_shoup(*a, s, ss);
            }
        }
        out
    }
}
