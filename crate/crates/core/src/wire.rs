//! Versioned binary formats for ciphertexts and threshold shares.
//!
//! Ciphertext:
//! `"THAG" | version u16 | scheme u8 | n u32 | k u8 | primes u64×k | c0 | c1 | adds u32`
//!
//! Shares:
//! `"THAG" | version u16 | kind u8 | party u16 | n u32 | k u8 | primes u64×k | element`
//!
//! Ring elements are written in coefficient form as little-endian u64
//! residues, prime-major and coefficient-minor. All integers are little-endian.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::he::{Ciphertext, Scheme};
use crate::ring::{Domain, RingElement, RingParams};
use crate::threshold::{PartialDecryption, PkShare};

pub const MAGIC: &[u8; 4] = b"THAG";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ShareKind {
    PkShare = 0x10,
    PartialDecryption = 0x11,
}

impl ShareKind {
    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0x10 => Ok(ShareKind::PkShare),
            0x11 => Ok(ShareKind::PartialDecryption),
            _ => Err(Error::Decode(format!("unknown share kind 0x{tag:02x}"))),
        }
    }
}

fn put_header(out: &mut Vec<u8>, tag: u8) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(tag);
}

fn put_ring(out: &mut Vec<u8>, params: &RingParams) {
    out.extend_from_slice(&(params.n() as u32).to_le_bytes());
    out.push(params.num_primes() as u8);
    for p in params.primes() {
        out.extend_from_slice(&p.to_le_bytes());
    }
}

fn put_element(out: &mut Vec<u8>, e: &RingElement) {
    let coeff;
    let e = if e.domain() == Domain::Coefficient {
        e
    } else {
        coeff = e.to_coefficient();
        &coeff
    };
    out.reserve(e.residues().len() * 8);
    for r in e.residues() {
        out.extend_from_slice(&r.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.buf.len() < len {
            return Err(Error::Decode(format!(
                "truncated: wanted {len} bytes, {} left",
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(len);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self) -> Result<u8> {
        if self.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let v = self.u16()?;
        if v != VERSION {
            return Err(Error::Decode(format!("unsupported version {v}")));
        }
        self.u8()
    }

    fn ring(&mut self, params: &Arc<RingParams>) -> Result<()> {
        let n = self.u32()? as usize;
        let k = self.u8()? as usize;
        let mut primes = Vec::with_capacity(k);
        for _ in 0..k {
            primes.push(self.u64()?);
        }
        if n != params.n() || primes != params.primes() {
            return Err(Error::ParamsMismatch);
        }
        Ok(())
    }

    fn element(&mut self, params: &Arc<RingParams>) -> Result<RingElement> {
        let len = params.n() * params.num_primes();
        let bytes = self.take(len * 8)?;
        let residues = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        RingElement::from_residues(params, Domain::Coefficient, residues)
            .map_err(|e| Error::Decode(format!("bad residues: {e}")))
    }

    fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Decode(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

pub fn encode_ciphertext(ct: &Ciphertext) -> Vec<u8> {
    let params = ct.c0().params();
    let mut out = Vec::with_capacity(16 + params.num_primes() * (8 + 16 * params.n()));
    put_header(&mut out, ct.scheme().tag());
    put_ring(&mut out, params);
    put_element(&mut out, ct.c0());
    put_element(&mut out, ct.c1());
    out.extend_from_slice(&ct.adds_consumed().to_le_bytes());
    out
}

/// Decodes a ciphertext that must have been produced under `params`.
pub fn decode_ciphertext(params: &Arc<RingParams>, bytes: &[u8]) -> Result<Ciphertext> {
    let mut r = Reader { buf: bytes };
    let scheme = Scheme::from_tag(r.header()?)?;
    r.ring(params)?;
    let c0 = r.element(params)?;
    let c1 = r.element(params)?;
    let adds = r.u32()?;
    r.finish()?;
    Ciphertext::from_parts(c0, c1, scheme, adds)
}

fn encode_share(kind: ShareKind, party: u16, e: &RingElement) -> Vec<u8> {
    let params = e.params();
    let mut out = Vec::with_capacity(16 + params.num_primes() * (8 + 8 * params.n()));
    put_header(&mut out, kind as u8);
    out.extend_from_slice(&party.to_le_bytes());
    put_ring(&mut out, params);
    put_element(&mut out, e);
    out
}

fn decode_share(params: &Arc<RingParams>, bytes: &[u8], want: ShareKind) -> Result<(u16, RingElement)> {
    let mut r = Reader { buf: bytes };
    let kind = ShareKind::from_tag(r.header()?)?;
    if kind != want {
        return Err(Error::Decode(format!("expected {want:?}, found {kind:?}")));
    }
    let party = r.u16()?;
    r.ring(params)?;
    let e = r.element(params)?;
    r.finish()?;
    Ok((party, e))
}

pub fn encode_pk_share(s: &PkShare) -> Vec<u8> {
    encode_share(ShareKind::PkShare, s.index, &s.p0)
}

pub fn decode_pk_share(params: &Arc<RingParams>, bytes: &[u8]) -> Result<PkShare> {
    let (index, p0) = decode_share(params, bytes, ShareKind::PkShare)?;
    Ok(PkShare { index, p0 })
}

pub fn encode_partial(p: &PartialDecryption) -> Vec<u8> {
    encode_share(ShareKind::PartialDecryption, p.index, &p.h)
}

pub fn decode_partial(params: &Arc<RingParams>, bytes: &[u8]) -> Result<PartialDecryption> {
    let (index, h) = decode_share(params, bytes, ShareKind::PartialDecryption)?;
    Ok(PartialDecryption { index, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{encrypt, pubkeygen, seckeygen, setup, ModulusChoice, Plaintext, SchemeConfig};
    use crate::ring::NoiseSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture() -> (Arc<crate::he::SchemeParams>, Ciphertext) {
        let spec = NoiseSpec::with_default_bound(3.2).unwrap();
        let p = setup(&SchemeConfig::bfv(16, ModulusChoice::Bits(70), 17u32, spec)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = seckeygen(&p, &mut rng);
        let pk = pubkeygen(&p, &sk, &mut rng);
        let ct = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[1, -2, 3]), &mut rng).unwrap();
        (p, ct)
    }

    #[test]
    fn ciphertext_layout() {
        let (p, ct) = fixture();
        let bytes = encode_ciphertext(&ct);
        let k = p.ring().num_primes();
        assert_eq!(bytes.len(), 4 + 2 + 1 + 4 + 1 + 8 * k + 2 * 8 * 16 * k + 4);
        assert_eq!(&bytes[..4], b"THAG");
        assert_eq!(bytes[6], 1);
        assert_eq!(u32::from_le_bytes(bytes[7..11].try_into().unwrap()), 16);
        // first residue of c0 follows the prime list
        let off = 12 + 8 * k;
        assert_eq!(u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), ct.c0().residues()[0]);
        assert_eq!(decode_ciphertext(p.ring(), &bytes).unwrap(), ct);
    }

    #[test]
    fn rejects_malformed() {
        let (p, ct) = fixture();
        let bytes = encode_ciphertext(&ct);
        assert!(matches!(decode_ciphertext(p.ring(), &bytes[..bytes.len() - 1]), Err(Error::Decode(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_ciphertext(p.ring(), &extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_ciphertext(p.ring(), &bad).is_err());
        let other = RingParams::new(16, &crate::ring::modulus::select_primes(16, 40).unwrap()).unwrap();
        assert_eq!(decode_ciphertext(&other, &bytes), Err(Error::ParamsMismatch));
        // residue ≥ prime
        let mut big = bytes;
        let k = p.ring().num_primes();
        big[12 + 8 * k..20 + 8 * k].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_ciphertext(p.ring(), &big).is_err());
    }

    #[test]
    fn share_round_trip() {
        let (p, ct) = fixture();
        let s = PkShare { index: 7, p0: ct.c1().clone() };
        let bytes = encode_pk_share(&s);
        assert_eq!(bytes[6], 0x10);
        assert_eq!(&bytes[7..9], &7u16.to_le_bytes());
        assert_eq!(decode_pk_share(p.ring(), &bytes).unwrap(), s);
        assert!(decode_partial(p.ring(), &bytes).is_err());
        let d = PartialDecryption { index: 3, h: ct.c0().clone() };
        assert_eq!(decode_partial(p.ring(), &encode_partial(&d)).unwrap(), d);
    }
}
