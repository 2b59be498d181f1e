//! Sign search: minimize ‖H‖_∞ over assignments.
//!
//! The workhorse is `FlipState`, which keeps H, a histogram of |H| values,
//! the current maximum, and Σ H⁴ incrementally under single-rectangle sign
//! flips. A flip touches exactly the 2^{dm−n} cells of its rectangle and is
//! its own inverse, so candidate moves are evaluated by flip/unflip.
//!
//! The objective is the exact integer ‖H‖_∞; ties are ordered by Σ H⁴
//! (plateaus of the max are wide, and the fourth moment orders them without
//! leaving integer arithmetic).

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{row_seed, splitmix64, SeededRng};
use crate::signs::{build_hyperbolic_sum, SignAssignment};

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Hillclimb,
    Anneal,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Hillclimb => "hillclimb",
            Strategy::Anneal => "anneal",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "hillclimb" => Ok(Strategy::Hillclimb),
            "anneal" => Ok(Strategy::Anneal),
            other => Err(Error::Usage(format!(
                "unknown strategy '{}': expected exhaustive, hillclimb, or anneal",
                other
            ))),
        }
    }
}

/// H plus the incrementally maintained objective state.
pub struct FlipState {
    a: SignAssignment,
    grid: Grid<i64>,
    /// hist[v] = number of cells with |H| = v; index range 0..=#shapes.
    hist: Vec<u64>,
    max: i64,
    sum4: i128,
}

impl FlipState {
    pub fn new(a: SignAssignment, budget: u64) -> Result<Self> {
        let grid = build_hyperbolic_sum(&a, budget)?;
        let mut hist = vec![0u64; a.shapes().len() + 1];
        let mut sum4: i128 = 0;
        for v in grid.values() {
            hist[v.unsigned_abs() as usize] += 1;
            let sq = (*v as i128) * (*v as i128);
            sum4 += sq * sq;
        }
        let max = hist.iter().rposition(|c| *c > 0).unwrap_or(0) as i64;
        Ok(FlipState { a, grid, hist, max, sum4 })
    }

    pub fn assignment(&self) -> &SignAssignment {
        &self.a
    }

    pub fn grid(&self) -> &Grid<i64> {
        &self.grid
    }

    pub fn linf(&self) -> i64 {
        self.max
    }

    pub fn sum4(&self) -> i128 {
        self.sum4
    }

    pub fn objective(&self) -> (i64, i128) {
        (self.max, self.sum4)
    }

    /// Flips sign bit `i` (flat index) and updates H on the flipped
    /// rectangle's cells. Involution: flipping twice restores everything.
    pub fn flip(&mut self, i: u64) {
        let (si, p) = self.a.split_flat(i);
        let old_sign = self.a.sign(si, p);
        let r = self.a.shapes()[si].clone();
        let m = self.grid.m();
        let d = self.grid.d();
        let delta = -2 * old_sign;

        // Per-axis support geometry: cell index i_k runs over
        // base_k..base_k + 2^{w_k}, and the Haar sign along the axis is the
        // top bit of the offset.
        let mut base = vec![0u64; d];
        let mut w = vec![0u32; d];
        let mut rem = p;
        for k in (0..d).rev() {
            let rk = r.scales()[k];
            let p_k = rem & ((1u64 << rk) - 1);
            rem >>= rk;
            w[k] = m - rk;
            base[k] = p_k << w[k];
        }
        let mut off_shift = vec![0u32; d];
        for k in (0..d).rev() {
            off_shift[k] = if k + 1 < d { off_shift[k + 1] + w[k + 1] } else { 0 };
        }
        let total: u64 = 1u64 << w.iter().sum::<u32>();

        let values = self.grid.values_mut();
        for u in 0..total {
            let mut cell = 0u64;
            let mut sgn = delta;
            for k in 0..d {
                let o = (u >> off_shift[k]) & ((1u64 << w[k]) - 1);
                cell |= (base[k] + o) << ((d - 1 - k) as u32 * m);
                if (o >> (w[k] - 1)) & 1 == 0 {
                    sgn = -sgn;
                }
            }
            let v_old = values[cell as usize];
            let v_new = v_old + sgn;
            values[cell as usize] = v_new;

            self.hist[v_old.unsigned_abs() as usize] -= 1;
            self.hist[v_new.unsigned_abs() as usize] += 1;
            let so = (v_old as i128) * (v_old as i128);
            let sn = (v_new as i128) * (v_new as i128);
            self.sum4 += sn * sn - so * so;
            if v_new.abs() > self.max {
                self.max = v_new.abs();
            }
        }
        while self.max > 0 && self.hist[self.max as usize] == 0 {
            self.max -= 1;
        }
        self.a.flip(si, p);
    }

    /// From-scratch recomputation of every maintained quantity; the fuzzing
    /// oracle.
    pub fn consistent(&self, budget: u64) -> Result<bool> {
        let fresh = FlipState::new(self.a.clone(), budget)?;
        Ok(fresh.grid == self.grid
            && fresh.hist == self.hist
            && fresh.max == self.max
            && fresh.sum4 == self.sum4)
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_signs: SignAssignment,
    /// Exact ‖H‖_∞ of `best_signs`, recomputed from scratch at the end.
    pub best_value: i64,
    pub evaluations: u64,
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub restarts: u32,
    /// (evaluations, best value) at each improvement; nonincreasing values.
    pub trace: Vec<(u64, i64)>,
}

impl SearchResult {
    pub fn l2_floor(&self) -> f64 {
        (self.best_signs.shapes().len() as f64).sqrt()
    }
}

fn finalize(
    signs: SignAssignment,
    evaluations: u64,
    strategy: Strategy,
    seed: Option<u64>,
    budget: Option<u64>,
    restarts: u32,
    trace: Vec<(u64, i64)>,
    grid_budget: u64,
) -> Result<SearchResult> {
    let best_value = build_hyperbolic_sum(&signs, grid_budget)?.linf();
    Ok(SearchResult {
        best_signs: signs,
        best_value,
        evaluations,
        strategy,
        seed,
        budget,
        restarts,
        trace,
    })
}

/// Global minimum of ‖H‖_∞ by Gray-code enumeration of all 2^{#signs}
/// assignments with incremental updates. Tie-break: the lexicographically
/// smallest bit pattern among the minimizers.
pub fn exhaustive_min(n: u32, d: usize, cap: u64, grid_budget: u64) -> Result<SearchResult> {
    let a0 = SignAssignment::all_minus(n, d)?;
    let bits = a0.flat_len();
    if bits > cap {
        return Err(Error::InstanceTooLarge(format!(
            "{} signs exceed the exhaustive cap of {} (override with a larger cap)",
            bits, cap
        )));
    }
    let mut st = FlipState::new(a0, grid_budget)?;
    let mut best = st.assignment().clone();
    let mut best_val = st.linf();
    let mut evaluations = 1u64;
    let mut trace = vec![(1u64, best_val)];
    for k in 1u64..(1u64 << bits) {
        st.flip(k.trailing_zeros() as u64);
        evaluations += 1;
        let v = st.linf();
        if v < best_val
            || (v == best_val && st.assignment().pattern_cmp(&best) == Ordering::Less)
        {
            if v < best_val {
                trace.push((evaluations, v));
            }
            best_val = v;
            best = st.assignment().clone();
        }
    }
    finalize(
        best,
        evaluations,
        Strategy::Exhaustive,
        None,
        None,
        1,
        trace,
        grid_budget,
    )
}

struct RestartOutcome {
    signs: SignAssignment,
    value: i64,
    evaluations: u64,
    trace: Vec<(u64, i64)>,
}

/// Steepest-descent on (‖H‖_∞, ‖H‖₄⁴): scan all single flips, apply the best
/// strictly improving one, repeat. The scan stops early when the evaluation
/// budget runs out, still applying the best move found by then.
fn hillclimb(st: &mut FlipState, budget: u64, evals: &mut u64, trace: &mut Vec<(u64, i64)>) {
    let bits = st.assignment().flat_len();
    loop {
        if *evals >= budget {
            return;
        }
        let current = st.objective();
        let mut best_move: Option<((i64, i128), u64)> = None;
        let mut truncated = false;
        for i in 0..bits {
            if *evals >= budget {
                truncated = true;
                break;
            }
            st.flip(i);
            *evals += 1;
            let cand = st.objective();
            st.flip(i);
            if cand < current && best_move.as_ref().map_or(true, |(b, _)| cand < *b) {
                best_move = Some((cand, i));
            }
        }
        match best_move {
            Some(((v, _), i)) => {
                st.flip(i);
                if v < trace.last().map_or(i64::MAX, |(_, tv)| *tv) {
                    trace.push((*evals, v));
                }
            }
            None => return,
        }
        if truncated {
            return;
        }
    }
}

/// Simulated annealing on the same objective: T starts at n and cools by
/// 0.995 per accepted move. Integer deltas drive acceptance; a plateau move
/// that only worsens the Σ H⁴ tie-break costs a flat 1/2.
fn anneal(
    st: &mut FlipState,
    rng: &mut SeededRng,
    t0: f64,
    budget: u64,
    evals: &mut u64,
    trace: &mut Vec<(u64, i64)>,
) -> (SignAssignment, i64) {
    let bits = st.assignment().flat_len();
    let mut t = t0;
    let mut best = st.assignment().clone();
    let mut best_obj = st.objective();
    while *evals < budget {
        let i = rng.below(bits);
        let before = st.objective();
        st.flip(i);
        *evals += 1;
        let after = st.objective();
        let accept = if after <= before {
            true
        } else {
            let cost = if after.0 > before.0 {
                (after.0 - before.0) as f64
            } else {
                0.5
            };
            rng.next_f64() < (-cost / t).exp()
        };
        if accept {
            t *= 0.995;
            if after < best_obj {
                if after.0 < best_obj.0 {
                    trace.push((*evals, after.0));
                }
                best_obj = after;
                best = st.assignment().clone();
            }
        } else {
            st.flip(i);
        }
    }
    (best, best_obj.0)
}

/// Seeded multi-restart local search. Restart `i` draws its initial signs
/// from stream `seed + i` and runs under its own evaluation budget; restarts
/// run in parallel and are merged by (value, bit pattern), so the result is
/// reproducible regardless of thread count.
pub fn local_search(
    n: u32,
    d: usize,
    strategy: Strategy,
    seed: u64,
    budget: u64,
    restarts: u32,
    grid_budget: u64,
) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::InvalidParam("restarts must be >= 1".into()));
    }
    if strategy == Strategy::Exhaustive {
        return Err(Error::InvalidParam(
            "exhaustive enumeration ignores seeds and budgets; call exhaustive_min".into(),
        ));
    }
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|ri| -> Result<RestartOutcome> {
            let stream = seed.wrapping_add(ri as u64);
            let a0 = SignAssignment::random(stream, n, d)?;
            let mut st = FlipState::new(a0, grid_budget)?;
            // Proposal randomness must not replay the sign stream.
            let mut rng = SeededRng::new(splitmix64(stream));
            let mut evals = 0u64;
            let mut trace = vec![(0u64, st.linf())];
            let (signs, value) = match strategy {
                Strategy::Hillclimb => {
                    hillclimb(&mut st, budget, &mut evals, &mut trace);
                    (st.assignment().clone(), st.linf())
                }
                Strategy::Anneal => anneal(&mut st, &mut rng, n as f64, budget, &mut evals, &mut trace),
                Strategy::Exhaustive => unreachable!(),
            };
            Ok(RestartOutcome { signs, value, evaluations: evals, trace })
        })
        .collect::<Result<_>>()?;

    let mut winner = 0usize;
    for i in 1..outcomes.len() {
        let cand = &outcomes[i];
        let best = &outcomes[winner];
        if cand.value < best.value
            || (cand.value == best.value
                && cand.signs.pattern_cmp(&best.signs) == Ordering::Less)
        {
            winner = i;
        }
    }
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let trace = outcomes[winner].trace.clone();
    finalize(
        outcomes[winner].signs.clone(),
        evaluations,
        strategy,
        Some(seed),
        Some(budget),
        restarts,
        trace,
        grid_budget,
    )
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub n: u32,
    pub d: usize,
    pub trial: u32,
    pub seed: u64,
    pub linf_random: i64,
    pub linf_searched: i64,
    pub l2_floor: f64,
    pub ref_half: f64,
    pub ref_conj: f64,
    pub ref_thm: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingSummary {
    pub n: u32,
    pub median_random: f64,
    pub min_random: i64,
    pub median_searched: f64,
    pub min_searched: i64,
}

#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub summaries: Vec<ScalingSummary>,
    /// Least-squares slope of log(median ‖H‖_∞) vs log n.
    pub slope_random: f64,
    pub slope_searched: f64,
}

fn median_of(mut xs: Vec<i64>) -> f64 {
    xs.sort_unstable();
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2] as f64
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) as f64 / 2.0
    }
}

/// Random-vs-searched ‖H‖_∞ across a range of n, with the three reference
/// exponent curves. Row (n, trial) runs on its own derived seed, so the
/// table is reproducible and rows are independent of each other.
pub fn scaling_study(
    d: usize,
    n_range: &[u32],
    trials: u32,
    master_seed: u64,
    strategy: Strategy,
    budget: u64,
    restarts: u32,
    grid_budget: u64,
) -> Result<ScalingTable> {
    if n_range.is_empty() || trials == 0 {
        return Err(Error::InvalidParam("scaling needs n values and trials >= 1".into()));
    }
    let mut rows = Vec::with_capacity(n_range.len() * trials as usize);
    for &n in n_range {
        let shape_count = crate::dyadic::shape_count(n, d);
        let per_trial: Vec<(i64, i64, u64)> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<(i64, i64, u64)> {
                let seed = row_seed(master_seed, n, trial);
                let random = SignAssignment::random(seed, n, d)?;
                let linf_random = build_hyperbolic_sum(&random, grid_budget)?.linf();
                let linf_searched = if budget == 0 {
                    linf_random
                } else {
                    local_search(n, d, strategy, seed, budget, restarts, grid_budget)?
                        .best_value
                };
                Ok((linf_random, linf_searched, seed))
            })
            .collect::<Result<_>>()?;
        let nf = n as f64;
        for (trial, (linf_random, linf_searched, seed)) in per_trial.into_iter().enumerate() {
            rows.push(ScalingRow {
                n,
                d,
                trial: trial as u32,
                seed,
                linf_random,
                linf_searched,
                l2_floor: (shape_count as f64).sqrt(),
                ref_half: nf.powf((d as f64 - 1.0) / 2.0),
                ref_conj: nf.powf(d as f64 / 2.0),
                ref_thm: nf.powf((d as f64 - 1.0) / 2.0 + 1.0 / (8.0 * d as f64)),
            });
        }
    }

    let mut summaries = Vec::with_capacity(n_range.len());
    let mut fit_r = (Vec::new(), Vec::new());
    let mut fit_s = (Vec::new(), Vec::new());
    for &n in n_range {
        let rnd: Vec<i64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.linf_random)
            .collect();
        let srch: Vec<i64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.linf_searched)
            .collect();
        let s = ScalingSummary {
            n,
            median_random: median_of(rnd.clone()),
            min_random: *rnd.iter().min().unwrap(),
            median_searched: median_of(srch.clone()),
            min_searched: *srch.iter().min().unwrap(),
        };
        if n >= 1 && s.median_random > 0.0 {
            fit_r.0.push((n as f64).ln());
            fit_r.1.push(s.median_random.ln());
        }
        if n >= 1 && s.median_searched > 0.0 {
            fit_s.0.push((n as f64).ln());
            fit_s.1.push(s.median_searched.ln());
        }
        summaries.push(s);
    }
    Ok(ScalingTable {
        rows,
        summaries,
        slope_random: slope(&fit_r.0, &fit_r.1),
        slope_searched: slope(&fit_s.0, &fit_s.1),
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_CELL_BUDGET as BUDGET;

    #[test]
    fn flip_is_involution_and_consistent() {
        let a = SignAssignment::random(3, 3, 2).unwrap();
        let mut st = FlipState::new(a, BUDGET).unwrap();
        let before_grid = st.grid().clone();
        let before = st.objective();
        st.flip(5);
        st.flip(5);
        assert_eq!(st.objective(), before);
        assert_eq!(st.grid(), &before_grid);

        let mut rng = SeededRng::new(17);
        for _ in 0..200 {
            st.flip(rng.below(st.assignment().flat_len()));
        }
        assert!(st.consistent(BUDGET).unwrap());
    }

    #[test]
    fn exhaustive_tiny_instances() {
        let r = exhaustive_min(1, 1, 16, BUDGET).unwrap();
        assert_eq!(r.best_value, 1);
        assert_eq!(r.evaluations, 4);

        let r = exhaustive_min(1, 2, 16, BUDGET).unwrap();
        assert_eq!(r.best_value, 2);
        assert_eq!(r.evaluations, 16);

        assert!(matches!(
            exhaustive_min(2, 2, 8, BUDGET),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn budget_zero_returns_initial_point() {
        let r = local_search(3, 2, Strategy::Hillclimb, 1, 0, 1, BUDGET).unwrap();
        let a = SignAssignment::random(1, 3, 2).unwrap();
        let want = build_hyperbolic_sum(&a, BUDGET).unwrap().linf();
        assert_eq!(r.best_value, want);
        assert_eq!(r.evaluations, 0);
        assert_eq!(r.best_signs, a);
    }

    #[test]
    fn hillclimb_reaches_tiny_global_min() {
        for seed in [1u64, 2, 3] {
            let r = local_search(1, 2, Strategy::Hillclimb, seed, 1000, 2, BUDGET).unwrap();
            assert_eq!(r.best_value, 2, "seed {}", seed);
        }
    }

    #[test]
    fn anneal_trace_is_monotone() {
        let r = local_search(4, 2, Strategy::Anneal, 9, 3000, 2, BUDGET).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
        assert!(r.best_value <= r.trace[0].1);
    }

    #[test]
    fn search_is_reproducible() {
        let a = local_search(4, 2, Strategy::Anneal, 5, 2000, 3, BUDGET).unwrap();
        let b = local_search(4, 2, Strategy::Anneal, 5, 2000, 3, BUDGET).unwrap();
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.best_signs, b.best_signs);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn search_never_beats_exhaustive() {
        let ex = exhaustive_min(2, 2, 16, BUDGET).unwrap();
        let ls = local_search(2, 2, Strategy::Anneal, 11, 2000, 2, BUDGET).unwrap();
        assert!(ls.best_value >= ex.best_value);
    }

    #[test]
    fn scaling_rows_and_floor() {
        let t = scaling_study(2, &[2, 3, 4], 3, 7, Strategy::Hillclimb, 50, 1, BUDGET).unwrap();
        assert_eq!(t.rows.len(), 9);
        for row in &t.rows {
            assert!(row.linf_random as f64 >= row.l2_floor - 1e-12);
            assert!(row.linf_searched <= row.linf_random);
            assert_eq!(row.ref_half, (row.n as f64).sqrt());
        }
        assert_eq!(t.summaries.len(), 3);
    }
}
