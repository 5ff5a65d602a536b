//! Root seed and derived per-party, per-purpose RNG substreams.
//!
//! A substream key is `SHA-256(domain ‖ root ‖ purpose ‖ party ‖ round)`; the
//! key seeds a ChaCha20 keystream, so every protocol transcript is a pure
//! function of the root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type StreamRng = ChaCha20Rng;

const DOMAIN: &[u8] = b"thag/substream/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootSeed([u8; 32]);

impl RootSeed {
    pub fn new(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    /// Expands a small integer seed into a 32-byte root.
    pub fn from_u64(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"thag/root-from-u64/v1");
        h.update(seed.to_le_bytes());
        Self(h.finalize().into())
    }

    /// Parses 64 hex characters, or a decimal integer.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() == 64 && s.chars().all(|c| c.is_ascii_hexdigit()) {
            let mut out = [0u8; 32];
            hex::decode_to_slice(s, &mut out).map_err(|e| Error::Config(format!("bad seed: {e}")))?;
            return Ok(Self(out));
        }
        s.parse::<u64>()
            .map(Self::from_u64)
            .map_err(|_| Error::Config(format!("seed must be 64 hex chars or an integer, got {s:?}")))
    }

    pub fn bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// 32 bytes derived for `purpose` / `party` / `round`.
    pub fn derive(&self, purpose: &str, party: u32, round: u32) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(self.0);
        h.update((purpose.len() as u32).to_le_bytes());
        h.update(purpose.as_bytes());
        h.update(party.to_le_bytes());
        h.update(round.to_le_bytes());
        h.finalize().into()
    }

    pub fn stream(&self, purpose: &str, party: u32, round: u32) -> StreamRng {
        StreamRng::from_seed(self.derive(purpose, party, round))
    }
}

/// Deterministic stream from a raw 32-byte seed under a domain label
/// (used to expand the common reference string).
pub fn labelled_stream(label: &str, seed: &[u8; 32]) -> StreamRng {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update(seed);
    StreamRng::from_seed(h.finalize().into())
}
