use std::fmt;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Client(u16),
    Aggregator,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Client(i) => write!(f, "client-{i}"),
            Party::Aggregator => f.write_str("aggregator"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    PkShare,
    Ciphertext,
    Aggregate,
    PartialDecryption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageRecord {
    pub round: u32,
    pub kind: MessageKind,
    pub sender: String,
    pub bytes: usize,
    pub sha256: String,
}

/// In-process message bus. Every payload is logged by kind, sender, size
/// and digest, then handed back for the receiver to decode.
#[derive(Debug, Default)]
pub struct Bus {
    log: Vec<MessageRecord>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn post(&mut self, round: u32, kind: MessageKind, sender: Party, payload: Vec<u8>) -> Vec<u8> {
        self.log.push(MessageRecord {
            round,
            kind,
            sender: sender.to_string(),
            bytes: payload.len(),
            sha256: hex::encode(Sha256::digest(&payload)),
        });
        payload
    }

    pub fn messages(&self) -> &[MessageRecord] {
        &self.log
    }

    pub fn into_messages(self) -> Vec<MessageRecord> {
        self.log
    }

    pub fn total_bytes(&self, kind: MessageKind) -> usize {
        self.log.iter().filter(|m| m.kind == kind).map(|m| m.bytes).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptHeader {
    pub scheme: String,
    pub n: usize,
    pub parties: usize,
    pub lambda: u32,
    pub model_size: usize,
    pub chunks: usize,
    pub fixed_point_bits: u32,
    pub rounds: u32,
    pub root_seed: String,
    pub crs_seed: String,
    pub primes: Vec<u64>,
    pub log2_q: u64,
    /// BFV plaintext modulus, decimal.
    pub t: Option<String>,
    pub delta_bits: u64,
    /// MCKKS error bound `ε`, as `num/den`.
    pub epsilon: Option<String>,
    pub kappa: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundOutcome {
    pub round: u32,
    /// SHA-256 over the exact opened average, one `num/den` per line.
    pub aggregate_sha256: String,
    pub aggregate_head: Vec<f64>,
    pub max_abs_error: f64,
    /// Coordinates that differ from the oracle (MBFV) or miss the `ε`
    /// bound (MCKKS).
    pub failures: usize,
}

/// Deterministic record of a protocol run. Wall-clock timings live in
/// [`TimingReport`] so that replays compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub outcome: Vec<RoundOutcome>,
    pub message: Vec<MessageRecord>,
    /// Opened average of the last round, as `f64`.
    #[serde(skip)]
    pub aggregate: Vec<f64>,
}

impl Transcript {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("transcript serializes")
    }

    pub fn failures(&self) -> usize {
        self.outcome.iter().map(|o| o.failures).sum()
    }

    pub fn max_abs_error(&self) -> f64 {
        self.outcome.iter().map(|o| o.max_abs_error).fold(0.0, f64::max)
    }
}

/// Wall-clock time per protocol phase, summed over rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimingReport {
    pub keygen: Duration,
    pub encryption: Duration,
    pub aggregation: Duration,
    pub decryption: Duration,
    pub total: Duration,
}

impl TimingReport {
    pub const LABELS: [&'static str; 5] = ["Col. Key Gen.", "Encryption", "Aggregation", "Col. Dec.", "Total"];

    pub fn rows(&self) -> [(&'static str, Duration); 5] {
        let v = [self.keygen, self.encryption, self.aggregation, self.decryption, self.total];
        std::array::from_fn(|i| (Self::LABELS[i], v[i]))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,seconds\n");
        for (label, d) in self.rows() {
            out.push_str(&format!("{label},{:.6}\n", d.as_secs_f64()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bus_logs_and_returns_payload() {
        let mut bus = Bus::new();
        let back = bus.post(0, MessageKind::Ciphertext, Party::Client(3), b"abc".to_vec());
        assert_eq!(back, b"abc");
        let m = &bus.messages()[0];
        assert_eq!(m.sender, "client-3");
        assert_eq!(m.bytes, 3);
        assert_eq!(m.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(bus.total_bytes(MessageKind::Ciphertext), 3);
    }

    #[test]
    fn timing_rows() {
        let r = TimingReport::default();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.contains("Col. Key Gen.,0.000000"));
    }
}
