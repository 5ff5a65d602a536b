use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::ProtocolConfig;
use super::transcript::{Bus, MessageKind, Party, RoundOutcome, TimingReport, Transcript, TranscriptHeader};
use crate::error::{Error, Result};
use crate::exact::{format_rational, rational};
use crate::he::{decode_fixed_exact, encode_fixed, encrypt, setup, Ciphertext, Plaintext, Scheme, SchemeParams};
use crate::planner::{plan, PlanReport};
use crate::threshold::{
    combine_decrypt, combine_pk, crs_expand, finalize, gen_share, partial_decrypt, pk_share, CollectivePublicKey,
    Crs, PartialDecryption, SecretShare, SmudgeParams,
};
use crate::wire;

/// One client: its key share and its current local update.
#[derive(Clone)]
pub struct ClientState {
    pub index: u16,
    share: SecretShare,
    pub update: Vec<f64>,
}

impl ClientState {
    pub fn share(&self) -> &SecretShare {
        &self.share
    }
}

pub struct SetupOutput {
    pub params: Arc<SchemeParams>,
    pub report: PlanReport,
    pub crs: Crs,
    pub clients: Vec<ClientState>,
    pub cpk: CollectivePublicKey,
}

/// Deterministic update in `[−1, 1)`; every entry is a multiple of `2^-52`.
pub fn synthetic_update(config: &ProtocolConfig, index: u16, round: u32) -> Vec<f64> {
    let mut rng = config.seed.stream("update", index as u32, round);
    let scale = (-52f64).exp2();
    (0..config.model_size)
        .map(|_| rng.random_range(-(1i64 << 52)..(1i64 << 52)) as f64 * scale)
        .collect()
}

/// Plans and sets up the parameters, expands the CRS, generates every share
/// and combines the collective public key from the broadcast shares.
pub fn run_setup(config: &ProtocolConfig, bus: &mut Bus) -> Result<SetupOutput> {
    config.validate()?;
    let mut report = plan(&config.plan)?;
    if let Some(primes) = &config.primes {
        report.primes = primes.clone();
        report.log2_q = crate::ring::RingParams::new(config.n(), primes)?.log2_q();
    }
    let params = setup(&config.plan.scheme_config(&report)?)?;
    let crs = crs_expand(config.seed.derive("crs", 0, 0), &params);
    let parties = config.parties() as u16;

    let make = |i: u16| -> Result<(ClientState, Vec<u8>)> {
        let share = gen_share(&params, i, &mut config.seed.stream("share", i as u32, 0));
        let pk = pk_share(&params, &share, &crs, &mut config.seed.stream("pk-share", i as u32, 0))?;
        let client = ClientState {
            index: i,
            share,
            update: Vec::new(),
        };
        Ok((client, wire::encode_pk_share(&pk)))
    };
    let made: Vec<(ClientState, Vec<u8>)> = if config.parallel_clients {
        (1..=parties).into_par_iter().map(make).collect::<Result<_>>()?
    } else {
        (1..=parties).map(make).collect::<Result<_>>()?
    };

    let mut clients = Vec::with_capacity(made.len());
    let mut pk_shares = Vec::with_capacity(made.len());
    for (client, bytes) in made {
        let bytes = bus.post(0, MessageKind::PkShare, Party::Client(client.index), bytes);
        pk_shares.push(wire::decode_pk_share(params.ring(), &bytes)?);
        clients.push(client);
    }
    let cpk = combine_pk(&params, &pk_shares, &crs)?;
    Ok(SetupOutput {
        params,
        report,
        crs,
        clients,
        cpk,
    })
}

fn encode_chunk(params: &SchemeParams, config: &ProtocolConfig, chunk: &[f64]) -> Result<Plaintext> {
    match params.scheme() {
        Scheme::Bfv => encode_fixed(params, chunk, config.fixed_point_bits),
        Scheme::Ckks => {
            // pre-normalized so the homomorphic sum is already the average
            let l = rational(config.parties() as u64);
            let values = chunk
                .iter()
                .map(|&w| {
                    BigRational::from_float(w)
                        .map(|v| v / &l)
                        .ok_or_else(|| Error::InvalidParams(format!("update entry {w} is not finite")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Plaintext::ckks(params, values))
        }
    }
}

/// Splits the client's update into `⌈N/n⌉` chunks and encrypts each under
/// the collective key.
pub fn client_input_step(
    client: &ClientState,
    params: &SchemeParams,
    cpk: &CollectivePublicKey,
    config: &ProtocolConfig,
    round: u32,
) -> Result<Vec<Ciphertext>> {
    let mut rng = config.seed.stream("encrypt", client.index as u32, round);
    client
        .update
        .chunks(params.n())
        .map(|chunk| {
            let pt = encode_chunk(params, config, chunk)?;
            encrypt(params, cpk.public_key(), &pt, &mut rng)
        })
        .collect()
}

/// Streaming chunk-wise sum of the clients' ciphertext lists. Holds only
/// public data.
pub struct Aggregator {
    params: Arc<SchemeParams>,
    chunks: usize,
    acc: Vec<Ciphertext>,
    seen: BTreeSet<u16>,
}

impl Aggregator {
    pub fn new(params: Arc<SchemeParams>, chunks: usize) -> Self {
        Self {
            params,
            chunks,
            acc: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    pub fn absorb(&mut self, sender: u16, cts: Vec<Ciphertext>) -> Result<()> {
        if sender == 0 || sender as usize > self.params.parties() || self.seen.contains(&sender) {
            return Err(Error::DuplicateIndex(sender));
        }
        if cts.len() != self.chunks {
            return Err(Error::LengthMismatch(format!(
                "client {sender} sent {} ciphertexts, expected {}",
                cts.len(),
                self.chunks
            )));
        }
        if self.acc.is_empty() {
            self.acc = cts;
        } else {
            for (a, c) in self.acc.iter_mut().zip(&cts) {
                a.add_assign(&self.params, c)?;
            }
        }
        self.seen.insert(sender);
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<Ciphertext>> {
        if self.seen.len() != self.params.parties() {
            return Err(Error::MissingShare {
                expected: self.params.parties(),
                got: self.seen.len(),
            });
        }
        Ok(self.acc)
    }
}

/// Sums `lists[i]` (from client `i + 1`) chunk by chunk.
pub fn aggregator_eval_step(params: &Arc<SchemeParams>, lists: Vec<Vec<Ciphertext>>) -> Result<Vec<Ciphertext>> {
    let chunks = lists.first().map_or(0, Vec::len);
    let mut agg = Aggregator::new(params.clone(), chunks);
    for (i, cts) in lists.into_iter().enumerate() {
        agg.absorb(i as u16 + 1, cts)?;
    }
    agg.finish()
}

fn partials_for(
    params: &SchemeParams,
    client: &ClientState,
    cts: &[Ciphertext],
    smudge: &SmudgeParams,
    config: &ProtocolConfig,
    round: u32,
) -> Result<Vec<Vec<u8>>> {
    let mut rng = config.seed.stream("smudge", client.index as u32, round);
    cts.iter()
        .map(|ct| Ok(wire::encode_partial(&partial_decrypt(params, &client.share, ct, smudge, &mut rng)?)))
        .collect()
}

/// Collective decryption of the aggregate: every client sends a smudged
/// partial decryption per chunk; the combined result is finalized and, for
/// MBFV, divided by `L·2^p`. Returns the exact average, trimmed to `N`.
pub fn output_step(
    params: &Arc<SchemeParams>,
    aggregate: &[Ciphertext],
    clients: &[ClientState],
    config: &ProtocolConfig,
    round: u32,
    bus: &mut Bus,
) -> Result<Vec<BigRational>> {
    let smudge = SmudgeParams::for_params(params);
    let mut by_chunk: Vec<Vec<PartialDecryption>> = vec![Vec::with_capacity(clients.len()); aggregate.len()];
    let mut deliver = |bus: &mut Bus, index: u16, msgs: Vec<Vec<u8>>| -> Result<()> {
        for (j, bytes) in msgs.into_iter().enumerate() {
            let bytes = bus.post(round, MessageKind::PartialDecryption, Party::Client(index), bytes);
            by_chunk[j].push(wire::decode_partial(params.ring(), &bytes)?);
        }
        Ok(())
    };
    if config.parallel_clients {
        let per_client: Vec<Vec<Vec<u8>>> = clients
            .par_iter()
            .map(|c| partials_for(params, c, aggregate, &smudge, config, round))
            .collect::<Result<_>>()?;
        for (c, msgs) in clients.iter().zip(per_client) {
            deliver(bus, c.index, msgs)?;
        }
    } else {
        for c in clients {
            deliver(bus, c.index, partials_for(params, c, aggregate, &smudge, config, round)?)?;
        }
    }

    let mut out = Vec::with_capacity(aggregate.len() * params.n());
    for (ct, partials) in aggregate.iter().zip(&by_chunk) {
        let d = combine_decrypt(params, ct, partials)?;
        let pt = finalize(params, &d)?;
        match params.scheme() {
            Scheme::Bfv => out.extend(decode_fixed_exact(&pt, config.fixed_point_bits, config.parties())?),
            Scheme::Ckks => out.extend(pt.ckks_values().expect("CKKS plaintext").iter().cloned()),
        }
    }
    out.truncate(config.model_size);
    Ok(out)
}

/// Cleartext average computed directly from the updates: for MBFV the
/// average of the `2^-p`-rounded inputs, for MCKKS the exact average.
pub fn oracle_average(config: &ProtocolConfig, updates: &[Vec<f64>]) -> Vec<BigRational> {
    let l = config.parties() as i64;
    match config.scheme() {
        Scheme::Bfv => {
            let scale = (config.fixed_point_bits as f64).exp2();
            let den = BigInt::from(l) << config.fixed_point_bits;
            (0..config.model_size)
                .map(|j| {
                    let sum: i64 = updates.iter().map(|w| (w[j] * scale).round() as i64).sum();
                    BigRational::new(sum.into(), den.clone())
                })
                .collect()
        }
        Scheme::Ckks => (0..config.model_size)
            .map(|j| {
                let sum: BigRational = updates.iter().map(|w| BigRational::from_float(w[j]).expect("finite")).sum();
                sum / rational(l)
            })
            .collect(),
    }
}

fn round_outcome(params: &SchemeParams, round: u32, got: &[BigRational], want: &[BigRational]) -> RoundOutcome {
    let eps = params.epsilon();
    let mut max_err = BigRational::from_integer(0.into());
    let mut failures = 0;
    let mut h = Sha256::new();
    for (g, w) in got.iter().zip(want) {
        h.update(format_rational(g).as_bytes());
        h.update(b"\n");
        let err = (g - w).abs();
        let bad = match &eps {
            None => g != w,
            Some(e) => &err >= e,
        };
        failures += bad as usize;
        if err > max_err {
            max_err = err;
        }
    }
    failures += got.len().abs_diff(want.len());
    RoundOutcome {
        round,
        aggregate_sha256: hex::encode(h.finalize()),
        aggregate_head: got.iter().take(8).map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        max_abs_error: max_err.to_f64().unwrap_or(f64::INFINITY),
        failures,
    }
}

fn header(config: &ProtocolConfig, s: &SetupOutput) -> TranscriptHeader {
    let p = &s.params;
    TranscriptHeader {
        scheme: p.scheme().name().to_string(),
        n: p.n(),
        parties: p.parties(),
        lambda: config.plan.lambda,
        model_size: config.model_size,
        chunks: config.chunks(),
        fixed_point_bits: config.fixed_point_bits,
        rounds: config.rounds,
        root_seed: config.seed.to_hex(),
        crs_seed: hex::encode(s.crs.seed()),
        primes: p.ring().primes(),
        log2_q: p.ring().log2_q(),
        t: p.t().map(|t| t.to_string()),
        delta_bits: p.delta_bits(),
        epsilon: p.epsilon().map(|e| format_rational(&e)),
        kappa: p.kappa(),
    }
}

pub struct RunOutput {
    pub transcript: Transcript,
    pub timings: TimingReport,
    pub report: PlanReport,
}

/// Setup once, then `rounds` repetitions of input, evaluation and output.
/// Keys are reused across rounds; updates, encryption randomness and
/// smudging noise are fresh per round.
pub fn run_protocol(config: &ProtocolConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let mut timings = TimingReport::default();
    let mut bus = Bus::new();

    let t = Instant::now();
    let mut s = run_setup(config, &mut bus)?;
    timings.keygen = t.elapsed();

    let mut outcomes = Vec::with_capacity(config.rounds as usize);
    let mut last = Vec::new();
    for round in 1..=config.rounds {
        for c in &mut s.clients {
            c.update = synthetic_update(config, c.index, round);
        }

        // Sequential clients are streamed into the aggregator one at a time
        // so that only one client's ciphertexts are alive besides the sum.
        let mut agg = Aggregator::new(s.params.clone(), config.chunks());
        let mut submit = |bus: &mut Bus, index: u16, cts: Vec<Ciphertext>| -> Result<()> {
            let decoded = cts
                .iter()
                .map(|ct| {
                    let bytes = bus.post(round, MessageKind::Ciphertext, Party::Client(index), wire::encode_ciphertext(ct));
                    wire::decode_ciphertext(s.params.ring(), &bytes)
                })
                .collect::<Result<Vec<_>>>()?;
            drop(cts);
            let t = Instant::now();
            agg.absorb(index, decoded)?;
            timings.aggregation += t.elapsed();
            Ok(())
        };
        if config.parallel_clients {
            let t = Instant::now();
            let lists: Vec<Vec<Ciphertext>> = s
                .clients
                .par_iter()
                .map(|c| client_input_step(c, &s.params, &s.cpk, config, round))
                .collect::<Result<_>>()?;
            timings.encryption += t.elapsed();
            for (c, cts) in s.clients.iter().zip(lists) {
                submit(&mut bus, c.index, cts)?;
            }
        } else {
            for c in &s.clients {
                let t = Instant::now();
                let cts = client_input_step(c, &s.params, &s.cpk, config, round)?;
                timings.encryption += t.elapsed();
                submit(&mut bus, c.index, cts)?;
            }
        }
        let aggregate = agg.finish()?;

        let aggregate = aggregate
            .iter()
            .map(|ct| {
                let bytes = bus.post(round, MessageKind::Aggregate, Party::Aggregator, wire::encode_ciphertext(ct));
                wire::decode_ciphertext(s.params.ring(), &bytes)
            })
            .collect::<Result<Vec<_>>>()?;

        let t = Instant::now();
        let opened = output_step(&s.params, &aggregate, &s.clients, config, round, &mut bus)?;
        timings.decryption += t.elapsed();

        let updates: Vec<Vec<f64>> = s.clients.iter().map(|c| c.update.clone()).collect();
        let oracle = oracle_average(config, &updates);
        outcomes.push(round_outcome(&s.params, round, &opened, &oracle));
        last = opened;
    }
    timings.total = start.elapsed();

    let transcript = Transcript {
        header: header(config, &s),
        outcome: outcomes,
        message: bus.into_messages(),
        aggregate: last.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
    };
    Ok(RunOutput {
        transcript,
        timings,
        report: s.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(scheme: Scheme) -> ProtocolConfig {
        ProtocolConfig::new(scheme, 256, 3, 16, 600, 11)
    }

    #[test]
    fn updates_are_dyadic_and_bounded() {
        let c = smoke(Scheme::Bfv);
        let w = synthetic_update(&c, 1, 1);
        assert_eq!(w.len(), 600);
        assert!(w.iter().all(|&x| (-1.0..1.0).contains(&x) && (x * 2f64.powi(52)).fract() == 0.0));
        assert_ne!(w, synthetic_update(&c, 2, 1));
        assert_ne!(w, synthetic_update(&c, 1, 2));
    }

    #[test]
    fn mbfv_round_is_exact() {
        let c = smoke(Scheme::Bfv);
        let out = run_protocol(&c).unwrap();
        let t = &out.transcript;
        assert_eq!(t.failures(), 0);
        assert_eq!(t.max_abs_error(), 0.0);
        assert_eq!(t.header.chunks, 3);
        assert_eq!(t.aggregate.len(), 600);
        // 3 pk shares, 3·3 ciphertexts, 3 aggregates, 3·3 partials
        assert_eq!(t.message.len(), 3 + 9 + 3 + 9);
    }

    #[test]
    fn mckks_round_within_eps() {
        let c = smoke(Scheme::Ckks);
        let out = run_protocol(&c).unwrap();
        assert_eq!(out.transcript.failures(), 0);
        assert!(out.transcript.max_abs_error() > 0.0);
    }

    #[test]
    fn aggregator_validates_inputs() {
        let mut c = smoke(Scheme::Bfv);
        c.model_size = 256;
        let mut bus = Bus::new();
        let s = run_setup(&c, &mut bus).unwrap();
        let mut clients = s.clients.clone();
        for cl in &mut clients {
            cl.update = synthetic_update(&c, cl.index, 1);
        }
        let lists: Vec<_> = clients
            .iter()
            .map(|cl| client_input_step(cl, &s.params, &s.cpk, &c, 1).unwrap())
            .collect();
        let mut agg = Aggregator::new(s.params.clone(), 1);
        agg.absorb(1, lists[0].clone()).unwrap();
        assert_eq!(agg.absorb(1, lists[0].clone()), Err(Error::DuplicateIndex(1)));
        assert!(matches!(agg.absorb(2, vec![]), Err(Error::LengthMismatch(_))));
        assert!(matches!(agg.finish(), Err(Error::MissingShare { expected: 3, got: 1 })));
        assert_eq!(aggregator_eval_step(&s.params, lists).unwrap().len(), 1);
    }
}
