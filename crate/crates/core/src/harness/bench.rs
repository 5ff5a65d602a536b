use std::time::{Duration, Instant};

use super::config::ProtocolConfig;
use super::protocol::{aggregator_eval_step, client_input_step, run_protocol, run_setup, synthetic_update};
use super::transcript::{Bus, TimingReport};
use crate::error::Result;
use crate::he::Scheme;
use crate::planner::plan;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub n: usize,
    pub parties: usize,
    pub lambda: u32,
    pub model_size: usize,
    pub log2_q: u64,
    pub timings: TimingReport,
}

/// Runs the full protocol once per `(scheme, L)` pair of the sweep.
pub fn sweep(base: &ProtocolConfig, schemes: &[Scheme], parties: &[usize]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &scheme in schemes {
        for &l in parties {
            let mut cfg = base.clone();
            cfg.plan.scheme = Some(scheme);
            cfg.plan.parties = l;
            let out = run_protocol(&cfg)?;
            rows.push(SweepRow {
                scheme,
                n: cfg.n(),
                parties: l,
                lambda: cfg.plan.lambda,
                model_size: cfg.model_size,
                log2_q: out.transcript.header.log2_q,
                timings: out.timings,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("scheme,n,parties,lambda,model_size,log2_q,keygen_s,encryption_s,aggregation_s,decryption_s,total_s\n");
    for r in rows {
        let t = &r.timings;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.scheme.name(),
            r.n,
            r.parties,
            r.lambda,
            r.model_size,
            r.log2_q,
            t.keygen.as_secs_f64(),
            t.encryption.as_secs_f64(),
            t.aggregation.as_secs_f64(),
            t.decryption.as_secs_f64(),
            t.total.as_secs_f64()
        ));
    }
    out
}

/// Median wall time of the aggregation step for each party count, with the
/// ring and model size of `base`. All points share the modulus planned for
/// the largest party count, so only the number of additions varies.
pub fn aggregation_scaling(base: &ProtocolConfig, parties: &[usize], reps: usize) -> Result<Vec<(usize, Duration)>> {
    let mut largest = base.clone();
    largest.plan.parties = parties.iter().copied().max().unwrap_or(1);
    let primes = match &base.primes {
        Some(p) => p.clone(),
        None => plan(&largest.plan)?.primes,
    };
    let mut out = Vec::with_capacity(parties.len());
    for &l in parties {
        let mut cfg = base.clone();
        cfg.plan.parties = l;
        cfg.primes = Some(primes.clone());
        let mut bus = Bus::new();
        let mut s = run_setup(&cfg, &mut bus)?;
        for c in &mut s.clients {
            c.update = synthetic_update(&cfg, c.index, 1);
        }
        let lists: Vec<_> = s
            .clients
            .iter()
            .map(|c| client_input_step(c, &s.params, &s.cpk, &cfg, 1))
            .collect::<Result<_>>()?;
        let mut times: Vec<Duration> = (0..reps.max(1))
            .map(|_| {
                let lists = lists.clone();
                let t = Instant::now();
                let agg = aggregator_eval_step(&s.params, lists);
                let d = t.elapsed();
                agg.map(|_| d)
            })
            .collect::<Result<_>>()?;
        times.sort();
        out.push((l, times[times.len() / 2]));
    }
    Ok(out)
}

/// Least-squares line through `points`: `(slope, intercept, R²)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let (m, b, r2) = linear_fit(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]);
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let (_, _, r2) = linear_fit(&[(1.0, 1.0), (2.0, 3.0), (3.0, 1.0)]);
        assert!(r2 < 0.1);
    }

    #[test]
    fn small_sweep_csv() {
        let base = ProtocolConfig::new(Scheme::Bfv, 64, 2, 0, 64, 3);
        let rows = sweep(&base, &[Scheme::Bfv, Scheme::Ckks], &[2, 3]).unwrap();
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(4).unwrap().starts_with("ckks,64,3,0,64,"));
    }
}
