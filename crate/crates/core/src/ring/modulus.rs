//! Word-sized prime moduli: Barrett reduction, Shoup multiplication and
//! generation of primes `p ≡ 1 (mod 2n)`.

use crate::error::{Error, Result};

/// Largest supported prime bit length. Keeps `a + b` below 2^63 for reduced
/// operands so lazy additions never overflow a `u64`.
pub const MAX_PRIME_BITS: u32 = 62;

/// A prime modulus below 2^62 with precomputed Barrett constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    p: u64,
    // floor(2^128 / p), split into 64-bit halves
    mu_hi: u64,
    mu_lo: u64,
}

impl Modulus {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || 64 - p.leading_zeros() > MAX_PRIME_BITS {
            return Err(Error::InvalidParams(format!(
                "modulus {p} must be in [2, 2^{MAX_PRIME_BITS})"
            )));
        }
        // floor((2^128 - 1) / p): a lower bound on 2^128 / p, so the quotient
        // estimate never overshoots and the final loop fixes the remainder.
        let mu = u128::MAX / p as u128;
        Ok(Self {
            p,
            mu_hi: (mu >> 64) as u64,
            mu_lo: mu as u64,
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        64 - self.p.leading_zeros()
    }

    /// Reduces any `u128` modulo p.
    #[inline]
    pub fn reduce_u128(&self, a: u128) -> u64 {
        let a_lo = a as u64;
        let a_hi = (a >> 64) as u64;
        let lo_lo = ((a_lo as u128) * (self.mu_lo as u128)) >> 64;
        let hi_lo = (a_hi as u128) * (self.mu_lo as u128);
        let lo_hi = (a_lo as u128) * (self.mu_hi as u128);
        let hi_hi = (a_hi as u128) * (self.mu_hi as u128);
        let mid = lo_lo + (hi_lo as u64 as u128) + (lo_hi as u64 as u128);
        let quot = hi_hi + (hi_lo >> 64) + (lo_hi >> 64) + (mid >> 64);
        let mut r = a.wrapping_sub(quot.wrapping_mul(self.p as u128)) as u64;
        while r >= self.p {
            r -= self.p;
        }
        r
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        if a < self.p {
            a
        } else {
            a % self.p
        }
    }

    /// Reduces a signed value into `[0, p)`.
    #[inline]
    pub fn reduce_i64(&self, a: i64) -> u64 {
        let r = self.reduce(a.unsigned_abs());
        if a < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce_u128(a as u128 * b as u128)
    }

    /// Shoup companion `floor(w * 2^64 / p)` for a fixed multiplicand `w < p`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// `a * w mod p` using the Shoup companion of `w`.
    #[inline]
    pub fn mul_shoup(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((a as u128 * w_shoup as u128) >> 64) as u64;
        let r = a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base = self.reduce(base);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via Fermat; p must be prime and `a ≠ 0 mod p`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = self.reduce(a);
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest primes `p < 2^bits` with `p ≡ 1 (mod 2n)`, in descending order,
/// skipping any value in `exclude`.
pub fn ntt_primes_below(bits: u32, n: usize, count: usize, exclude: &[u64]) -> Result<Vec<u64>> {
    let two_n = 2 * n as u64;
    if bits > MAX_PRIME_BITS || bits < 2 || (1u64 << bits) <= two_n {
        return Err(Error::NoPrimesFound { bits, n });
    }
    let upper = 1u64 << bits;
    // largest candidate k·2n + 1 below 2^bits
    let mut cand = ((upper - 2) / two_n) * two_n + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if cand <= two_n {
            return Err(Error::NoPrimesFound { bits, n });
        }
        if !exclude.contains(&cand) && is_prime(cand) {
            out.push(cand);
        }
        cand -= two_n;
    }
    Ok(out)
}

/// The fewest word-sized NTT primes for degree `n` whose product has about
/// `bits` bits: `⌈bits/62⌉` limbs with the bit budget split evenly, each the
/// largest unused prime `≡ 1 (mod 2n)` below its size.
pub fn select_primes(n: usize, bits: u32) -> Result<Vec<u64>> {
    let min_size = (2 * n as u64).ilog2() + 2;
    let k = bits.div_ceil(MAX_PRIME_BITS).max(1);
    let (base, extra) = (bits / k, bits % k);
    let mut out: Vec<u64> = Vec::with_capacity(k as usize);
    for i in 0..k {
        let mut size = (base + u32::from(i < extra)).max(min_size);
        // small sizes may hold no prime ≡ 1 mod 2n at all
        let p = loop {
            match ntt_primes_below(size, n, 1, &out) {
                Ok(ps) => break ps[0],
                Err(e) if size >= MAX_PRIME_BITS => return Err(e),
                Err(_) => size += 1,
            }
        };
        out.push(p);
    }
    Ok(out)
}

/// A primitive 2n-th root of unity modulo `m` (requires `m ≡ 1 mod 2n`).
/// Returns the smallest such root, so the choice is reproducible.
pub fn primitive_2n_root(m: &Modulus, n: usize) -> Option<u64> {
    let p = m.value();
    let two_n = 2 * n as u64;
    if (p - 1) % two_n != 0 {
        return None;
    }
    let cofactor = (p - 1) / two_n;
    let mut best: Option<u64> = None;
    for g in 2..p.min(1 << 16) {
        let psi = m.pow(g, cofactor);
        if m.pow(psi, n as u64) == p - 1 {
            // all primitive roots are odd powers of psi; take the minimum
            let psi_sq = m.mul(psi, psi);
            let mut cur = psi;
            let mut min = psi;
            for _ in 0..n {
                min = min.min(cur);
                cur = m.mul(cur, psi_sq);
            }
            best = Some(min);
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (0..60).filter(|&x| is_prime(x)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn ntt_primes_are_congruent() {
        let ps = ntt_primes_below(62, 16384, 4, &[]).unwrap();
        assert_eq!(ps.len(), 4);
        for w in ps.windows(2) {
            assert!(w[0] > w[1]);
        }
        for &p in &ps {
            assert!(is_prime(p));
            assert_eq!(p % 32768, 1);
            assert_eq!(64 - p.leading_zeros(), 62);
        }
    }

    #[test]
    fn select_primes_splits_bits() {
        let ps = select_primes(16384, 142).unwrap();
        assert_eq!(ps.len(), 3);
        let sizes: Vec<u32> = ps.iter().map(|p| 64 - p.leading_zeros()).collect();
        assert_eq!(sizes, vec![48, 47, 47]);
        assert_ne!(ps[1], ps[2]);
        assert_eq!(select_primes(1024, 30).unwrap().len(), 1);
        // tiny targets are raised to the smallest usable prime size
        let p = select_primes(1024, 4).unwrap()[0];
        assert_eq!(p % 2048, 1);
    }

    #[test]
    fn root_has_order_2n() {
        let p = ntt_primes_below(40, 8, 1, &[]).unwrap()[0];
        let m = Modulus::new(p).unwrap();
        let psi = primitive_2n_root(&m, 8).unwrap();
        assert_eq!(m.pow(psi, 8), p - 1);
        assert_eq!(m.pow(psi, 16), 1);
    }

    proptest! {
        #[test]
        fn barrett_matches_u128_rem(a in any::<u128>(), p in (3u64..(1u64 << 62))) {
            let m = Modulus::new(p).unwrap();
            prop_assert_eq!(m.reduce_u128(a) as u128, a % p as u128);
        }

        #[test]
        fn shoup_matches_mul(a in any::<u64>(), w in any::<u64>(), p in (3u64..(1u64 << 62))) {
            let m = Modulus::new(p).unwrap();
            let (a, w) = (a % p, w % p);
            prop_assert_eq!(m.mul_shoup(a, w, m.shoup(w)), m.mul(a, w));
        }
    }
}
