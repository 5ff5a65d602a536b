use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_rational::BigRational;
use rayon::prelude::*;

use super::bounds::{analytic_scale, comparison_lhs, qmin_mbfv_threshold, qmin_mckks_threshold};
use super::{winner, PlanInputs, Verdict};
use crate::error::{Error, Result};
use crate::exact::{log2_biguint, log2_rational, min_bits_exceeding, pow2};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub log2_t: u32,
    pub log2_eps_inv: u32,
    pub verdict: Verdict,
    pub qmin_mbfv_bits: u64,
    pub qmin_mckks_bits: u64,
}

/// MBFV-vs-MCKKS verdicts over an integer grid of `(log2 t, log2 ε^{-1})`.
/// Cells are stored with `log2 t` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub n: usize,
    pub parties: usize,
    pub lambda: u32,
    pub b_ct_mp: BigRational,
    pub t_bits: RangeInclusive<u32>,
    pub eps_bits: RangeInclusive<u32>,
    pub cells: Vec<GridCell>,
}

/// Evaluates every cell exactly; the MCKKS bound uses `Δ = b·ε^{-1}/B_m`.
pub fn region_grid(
    inputs: &PlanInputs,
    t_bits: RangeInclusive<u32>,
    eps_bits: RangeInclusive<u32>,
) -> Result<RegionGrid> {
    if t_bits.is_empty() || eps_bits.is_empty() {
        return Err(Error::EmptyRange(format!("t bits {t_bits:?}, eps bits {eps_bits:?}")));
    }
    if *t_bits.start() < 1 {
        return Err(Error::EmptyRange("log2 t must start at 1 or above".into()));
    }
    let b = inputs.bounds().b_ct_mp;
    let b_m = &inputs.b_m;
    let columns: Vec<Vec<GridCell>> = t_bits
        .clone()
        .into_par_iter()
        .map(|tb| {
            let t = pow2(tb as u64);
            let qb = min_bits_exceeding(&qmin_mbfv_threshold(&t, &b));
            eps_bits
                .clone()
                .map(|eb| {
                    let eps_inv = pow2(eb as u64);
                    let delta = analytic_scale(&eps_inv, b_m, &b);
                    GridCell {
                        log2_t: tb,
                        log2_eps_inv: eb,
                        verdict: winner(&t, &eps_inv, &b),
                        qmin_mbfv_bits: qb,
                        qmin_mckks_bits: min_bits_exceeding(&qmin_mckks_threshold(&delta, b_m, &b)),
                    }
                })
                .collect()
        })
        .collect();
    Ok(RegionGrid {
        n: inputs.n,
        parties: inputs.parties,
        lambda: inputs.lambda,
        b_ct_mp: b,
        t_bits,
        eps_bits,
        cells: columns.into_iter().flatten().collect(),
    })
}

impl RegionGrid {
    fn index(&self, log2_t: u32, log2_eps: u32) -> Option<usize> {
        if !self.t_bits.contains(&log2_t) || !self.eps_bits.contains(&log2_eps) {
            return None;
        }
        let width = (self.eps_bits.end() - self.eps_bits.start() + 1) as usize;
        Some((log2_t - self.t_bits.start()) as usize * width + (log2_eps - self.eps_bits.start()) as usize)
    }

    pub fn cell(&self, log2_t: u32, log2_eps: u32) -> Option<&GridCell> {
        self.index(log2_t, log2_eps).map(|i| &self.cells[i])
    }

    pub fn mckks_count(&self) -> usize {
        self.cells.iter().filter(|c| c.verdict.mckks_wins()).count()
    }

    /// True iff every MCKKS cell of `self` is also an MCKKS cell of `other`.
    pub fn mckks_region_within(&self, other: &RegionGrid) -> bool {
        self.cells.iter().filter(|c| c.verdict.mckks_wins()).all(|c| {
            other
                .cell(c.log2_t, c.log2_eps_inv)
                .is_some_and(|o| o.verdict.mckks_wins())
        })
    }

    /// Largest `log2 ε^{-1}` in the column where MCKKS wins.
    pub fn max_winning_eps(&self, log2_t: u32) -> Option<u32> {
        self.eps_bits
            .clone()
            .rev()
            .find(|&e| self.cell(log2_t, e).is_some_and(|c| c.verdict.mckks_wins()))
    }

    /// First column where the quadratic term pushes the boundary above
    /// `log2 t`, i.e. where MCKKS wins some cell with `log2 ε^{-1} > log2 t`.
    pub fn onset_abscissa(&self) -> Option<u32> {
        self.t_bits
            .clone()
            .find(|&tb| self.max_winning_eps(tb).is_some_and(|e| e > tb))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("log2_t,log2_eps_inv,winner,qmin_mbfv_bits,qmin_mckks_bits\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.log2_t,
                c.log2_eps_inv,
                c.verdict.as_str(),
                c.qmin_mbfv_bits,
                c.qmin_mckks_bits
            );
        }
        out
    }
}

/// Per-column comparison of the exact boundary with its two linear pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnApprox {
    pub log2_t: u32,
    /// `log2(t²/(2b) + t − 1)`
    pub exact: f64,
    /// `log2(t − 1)`
    pub linear_low: f64,
    /// `2·log2 t − log2 b − 1`
    pub linear_high: f64,
    pub deviation: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    /// `log2 b + 1`, where `t²/(2b) = t`.
    pub crossover: f64,
    pub window: f64,
    pub columns: Vec<ColumnApprox>,
    pub max_deviation_outside: f64,
}

/// Compares the exact boundary `log2 ε^{-1} = log2(t²/(2b) + t − 1)` with
/// `max(log2(t − 1), 2·log2 t − log2 b − 1)` for each column of `grid`.
pub fn interval_approx_check(grid: &RegionGrid, window: f64) -> IntervalReport {
    let b = &grid.b_ct_mp;
    let log2_b = log2_rational(b);
    let crossover = log2_b + 1.0;
    let columns: Vec<ColumnApprox> = grid
        .t_bits
        .clone()
        .filter(|&tb| tb >= 1)
        .map(|tb| {
            let t = pow2(tb as u64);
            let exact = log2_rational(&comparison_lhs(&t, b));
            let linear_low = log2_biguint(&(&t - 1u32));
            let linear_high = 2.0 * tb as f64 - log2_b - 1.0;
            let deviation = exact - linear_low.max(linear_high);
            ColumnApprox {
                log2_t: tb,
                exact,
                linear_low,
                linear_high,
                deviation,
                in_window: (tb as f64 - crossover).abs() <= window,
            }
        })
        .collect();
    let max_deviation_outside = columns
        .iter()
        .filter(|c| !c.in_window)
        .map(|c| c.deviation.abs())
        .fold(0.0, f64::max);
    IntervalReport {
        crossover,
        window,
        columns,
        max_deviation_outside,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_inputs(lambda: u32, parties: usize) -> PlanInputs {
        PlanInputs::new(8192, parties, 3.2, lambda, 0, 0)
    }

    #[test]
    fn grid_shape_and_csv() {
        let g = region_grid(&fig_inputs(32, 10), 8..=12, 8..=10).unwrap();
        assert_eq!(g.cells.len(), 15);
        assert_eq!(g.cell(9, 10).unwrap().log2_t, 9);
        let csv = g.to_csv();
        assert!(csv.starts_with("log2_t,log2_eps_inv,winner,qmin_mbfv_bits,qmin_mckks_bits\n"));
        assert_eq!(csv.lines().count(), 16);
        assert!(region_grid(&fig_inputs(32, 10), 9..=8, 1..=2).is_err());
    }

    #[test]
    fn region_shrinks_with_lambda() {
        let lo = region_grid(&fig_inputs(32, 10), 8..=120, 8..=120).unwrap();
        let hi = region_grid(&fig_inputs(128, 10), 8..=120, 8..=120).unwrap();
        assert!(hi.mckks_region_within(&lo));
        assert!(hi.mckks_count() < lo.mckks_count());
        let shift = hi.onset_abscissa().unwrap() as i64 - lo.onset_abscissa().unwrap() as i64;
        assert!((shift - 48).abs() <= 2, "shift {shift}");
    }

    #[test]
    fn piecewise_approximation() {
        let g = region_grid(&fig_inputs(64, 10), 8..=120, 8..=9).unwrap();
        let r = interval_approx_check(&g, 2.0);
        assert!(r.max_deviation_outside < 1.0);
        // at the crossover both pieces are equal and the sum doubles them
        let near = r
            .columns
            .iter()
            .min_by(|a, b| (a.log2_t as f64 - r.crossover).abs().total_cmp(&(b.log2_t as f64 - r.crossover).abs()))
            .unwrap();
        assert!(near.deviation > 0.3);
    }
}
