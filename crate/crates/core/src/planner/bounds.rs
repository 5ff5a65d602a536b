//! Closed-form noise and modulus bounds, evaluated on exact rationals.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::exact::{ceil_log2, pow2, rational};

fn r_u(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Fresh single-key ciphertext noise bound `(2n + 1)·B`.
pub fn fresh_bound(n: usize, b: &BigRational) -> BigRational {
    rational(2 * n as u64 + 1) * b
}

/// Fresh ciphertext noise under an L-party collective key: `B·(2nL + 1)`.
pub fn fresh_bound_mp(n: usize, parties: usize, b: &BigRational) -> BigRational {
    rational(2 * n as u64 * parties as u64 + 1) * b
}

/// `2^{⌈λ/2⌉}`, the ratio between smudging and ciphertext noise bounds.
pub fn smudge_factor(lambda: u32) -> BigUint {
    pow2(lambda.div_ceil(2) as u64)
}

/// Bounds on the noise of an aggregate of L fresh ciphertexts and of its
/// collective decryption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpBounds {
    /// `(2n + 1)·B`
    pub b_fresh: BigRational,
    /// `B·(2nL + 1)`
    pub b_fresh_mp: BigRational,
    /// `L·B·(2nL + 1)`
    pub b_ct: BigRational,
    /// `2^{⌈λ/2⌉}·b_ct`
    pub b_smg: BigRational,
    /// `b_ct + L·b_smg = (1 + L·2^{⌈λ/2⌉})·b_ct`
    pub b_ct_mp: BigRational,
}

pub fn mp_bounds(n: usize, parties: usize, b: &BigRational, lambda: u32) -> MpBounds {
    let b_fresh = fresh_bound(n, b);
    let b_fresh_mp = fresh_bound_mp(n, parties, b);
    let b_ct = rational(parties as u64) * &b_fresh_mp;
    let b_smg = r_u(&smudge_factor(lambda)) * &b_ct;
    let b_ct_mp = &b_ct + rational(parties as u64) * &b_smg;
    MpBounds {
        b_fresh,
        b_fresh_mp,
        b_ct,
        b_smg,
        b_ct_mp,
    }
}

/// Right-hand side of the BFV decryption condition, `q/(2t) − t/2`.
pub fn bfv_margin(q: &BigUint, t: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(q.clone()), BigInt::from(t * 2u32))
        - BigRational::new(BigInt::from(t.clone()), BigInt::from(2))
}

/// Exact lower bound on q for multiparty BFV: q must exceed `2t·b + t²`.
pub fn qmin_mbfv_threshold(t: &BigUint, b_ct_mp: &BigRational) -> BigRational {
    let t = r_u(t);
    rational(2) * &t * b_ct_mp + &t * &t
}

/// Exact lower bound on q for multiparty CKKS: q must exceed `2(Δ·B_m + b)`.
pub fn qmin_mckks_threshold(delta: &BigRational, b_m: &BigRational, b_ct_mp: &BigRational) -> BigRational {
    rational(2) * (delta * b_m + b_ct_mp)
}

/// Power-of-two scale `Δ = 2^{⌈log2(b·ε^{-1})⌉}`, so `b/Δ ≤ ε`.
pub fn scale_from_eps(eps_inv: &BigUint, b_ct_mp: &BigRational) -> BigUint {
    let target = b_ct_mp * r_u(eps_inv);
    if target <= BigRational::one() {
        return BigUint::one();
    }
    pow2(ceil_log2(&target))
}

/// Analytic scale `Δ = b·ε^{-1} / B_m` that makes the error margin exactly ε.
pub fn analytic_scale(eps_inv: &BigUint, b_m: &BigRational, b_ct_mp: &BigRational) -> BigRational {
    b_ct_mp * r_u(eps_inv) / b_m
}

/// Left-hand side `t²/(2b) + t − 1` of the MCKKS-vs-MBFV comparison.
pub fn comparison_lhs(t: &BigUint, b_ct_mp: &BigRational) -> BigRational {
    let t = r_u(t);
    &t * &t / (rational(2) * b_ct_mp) + &t - rational(1)
}

/// True iff `t²/(2b) + t − 1 > ε^{-1}`, i.e. MCKKS needs a smaller q.
pub fn mckks_wins_closed_form(t: &BigUint, eps_inv: &BigUint, b_ct_mp: &BigRational) -> bool {
    comparison_lhs(t, b_ct_mp) > r_u(eps_inv)
}

/// True iff `b > (2Δ·B_m − t²) / (2(t − 1))` for `t ≥ 2`.
pub fn mckks_wins_by_scale(t: &BigUint, delta: &BigRational, b_m: &BigRational, b_ct_mp: &BigRational) -> bool {
    assert!(t > &BigUint::one(), "t must be at least 2");
    let t = r_u(t);
    let rhs = (rational(2) * delta * b_m - &t * &t) / (rational(2) * (&t - rational(1)));
    b_ct_mp > &rhs
}

pub fn to_rational(x: &BigUint) -> BigRational {
    r_u(x)
}
