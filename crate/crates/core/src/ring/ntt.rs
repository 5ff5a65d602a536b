//! Negacyclic NTT over Z_p[x]/(x^n + 1).
//!
//! The twist by powers of a primitive 2n-th root ψ is merged into the
//! butterflies (Cooley-Tukey forward, Gentleman-Sande inverse), with twiddles
//! stored in bit-reversed order together with their Shoup companions.
//! The forward transform leaves its output in bit-reversed order; pointwise
//! products are order-agnostic and the inverse transform undoes it.

use super::modulus::{primitive_2n_root, Modulus};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NttTable {
    modulus: Modulus,
    n: usize,
    psi_rev: Vec<u64>,
    psi_rev_shoup: Vec<u64>,
    psi_inv_rev: Vec<u64>,
    psi_inv_rev_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

fn bit_reverse(mut x: usize, log_n: u32) -> usize {
    let mut r = 0;
    for _ in 0..log_n {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

impl NttTable {
    pub fn new(modulus: Modulus, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidParams(format!("NTT size {n} must be a power of two")));
        }
        let p = modulus.value();
        let psi = primitive_2n_root(&modulus, n).ok_or_else(|| {
            Error::InvalidParams(format!("{p} is not congruent to 1 mod {}", 2 * n))
        })?;
        let psi_inv = modulus.inv(psi).expect("root is invertible");
        let log_n = n.trailing_zeros();

        let mut psi_rev = vec![0u64; n];
        let mut psi_inv_rev = vec![0u64; n];
        let (mut pw, mut pw_inv) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, log_n);
            psi_rev[r] = pw;
            psi_inv_rev[r] = pw_inv;
            pw = modulus.mul(pw, psi);
            pw_inv = modulus.mul(pw_inv, psi_inv);
        }
        let psi_rev_shoup = psi_rev.iter().map(|&w| modulus.shoup(w)).collect();
        let psi_inv_rev_shoup = psi_inv_rev.iter().map(|&w| modulus.shoup(w)).collect();
        let n_inv = modulus.inv(n as u64).expect("n invertible mod p");
        Ok(Self {
            modulus,
            n,
            psi_rev,
            psi_rev_shoup,
            psi_inv_rev,
            psi_inv_rev_shoup,
            n_inv,
            n_inv_shoup: modulus.shoup(n_inv),
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        let n = self.n;
        let mut t = n;
        let mut groups = 1;
        while groups < n {
            t >>= 1;
            for i in 0..groups {
                let w = self.psi_rev[groups + i];
                let ws = self.psi_rev_shoup[groups + i];
                let start = 2 * i * t;
                let (lo, hi) = a[start..start + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = m.mul_shoup(*y, w, ws);
                    *x = m.add(u, v);
                    *y = m.sub(u, v);
                }
            }
            groups <<= 1;
        }
    }

    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        let n = self.n;
        let mut t = 1;
        let mut groups = n;
        while groups > 1 {
            let half = groups >> 1;
            for i in 0..half {
                let w = self.psi_inv_rev[half + i];
                let ws = self.psi_inv_rev_shoup[half + i];
                let start = 2 * i * t;
                let (lo, hi) = a[start..start + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = *y;
                    *x = m.add(u, v);
                    *y = m.mul_shoup(m.sub(u, v), w, ws);
                }
            }
            t <<= 1;
            groups = half;
        }
        for x in a.iter_mut() {
            *x = m.mul_shoup(*x, self.n_inv, self.n_inv_shoup);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::modulus::ntt_primes_below;

    #[test]
    fn forward_inverse_roundtrip() {
        for &n in &[2usize, 4, 8, 64, 1024] {
            let p = ntt_primes_below(50, n, 1, &[]).unwrap()[0];
            let table = NttTable::new(Modulus::new(p).unwrap(), n).unwrap();
            let orig: Vec<u64> = (0..n as u64).map(|i| (i * 7919 + 13) % p).collect();
            let mut a = orig.clone();
            table.forward(&mut a);
            table.inverse(&mut a);
            assert_eq!(a, orig);
        }
    }

    #[test]
    fn rejects_incompatible_prime() {
        // 97 ≡ 1 mod 32 but not mod 256
        let m = Modulus::new(97).unwrap();
        assert!(NttTable::new(m, 128).is_err());
        assert!(NttTable::new(m, 16).is_ok());
    }
}
