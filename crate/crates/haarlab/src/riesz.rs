//! The Riesz-product certificate machinery.
//!
//! Ψ = Π_{t=1}^q (1 + ρ̃ F_t) over the first-coordinate blocks. E Ψ = 1 and
//! ⟨F_j, Ψ⟩ = ρ̃ #𝔸_j + ρ̃ ⟨Φ_j, Ψ_{≠j}⟩ hold algebraically for EVERY value
//! of ρ̃, so exact verification decouples from the asymptotic parameter
//! schedule; the schedule is still derived and reported because the
//! certificate's strength lives there.

use crate::error::{Error, Result};
use crate::exact::{Rat, Scalar};
use crate::grid::Grid;
use crate::signs::{
    build_block_sum, build_coincidence_sum, build_coincidence_sum_pairs,
    build_hyperbolic_sum, canonical_m, count_block, BlockPartition, SignAssignment,
};

/// Parameter bundle. `rho_tilde` / `rho` follow the schedule
/// ρ̃ = a q^b n^{-(d-1)/2}, ρ = √q n^{-(d-1)/2} with b = 1/4 and
/// q = ⌊a n^ε⌋, ε = 1/(2d) − κ, unless q is overridden.
#[derive(Debug, Clone)]
pub struct RieszParams {
    pub n: u32,
    pub d: usize,
    pub a: f64,
    pub kappa: f64,
    pub eps: f64,
    pub b: f64,
    pub q: u32,
    pub q_formulaic: u32,
    pub q_overridden: bool,
    pub rho_tilde: f64,
    pub rho: f64,
    /// Exact stand-in for ρ̃; required for rational-mode products.
    pub rho_tilde_exact: Option<Rat>,
    pub partition: BlockPartition,
}

impl RieszParams {
    /// ρ̃ as used by float-mode products: the exact override when one was
    /// supplied, the formulaic value otherwise.
    pub fn rho_tilde_effective(&self) -> f64 {
        self.rho_tilde_exact.as_ref().map(Scalar::to_f64).unwrap_or(self.rho_tilde)
    }

    /// Exponent diagnostic η(d) = (d−1)/2 + ε/4: the certificate targets
    /// ‖H‖_∞ ≳ n^{η(d)}.
    pub fn eta(&self) -> f64 {
        (self.d as f64 - 1.0) / 2.0 + self.eps / 4.0
    }

    /// Gain factor q^b over the n^{(d-1)/2} average-case floor.
    pub fn gain(&self) -> f64 {
        (self.q as f64).powf(self.b)
    }
}

pub fn derive_params(
    n: u32,
    d: usize,
    a: f64,
    kappa: f64,
    q_override: Option<u32>,
    rho_tilde_exact: Option<Rat>,
) -> Result<RieszParams> {
    if n < 1 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidParam("the certificate needs d >= 2".into()));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParam(format!("a = {} must lie in (0, 1]", a)));
    }
    let limit = 1.0 / (2.0 * d as f64);
    if !(kappa > 0.0 && kappa < limit) {
        return Err(Error::KappaOutOfRange { kappa, limit });
    }
    let eps = limit - kappa;
    let q_formulaic = (a * (n as f64).powf(eps)).floor() as u32;
    let (q, q_overridden) = match q_override {
        Some(q) => (q, true),
        None => (q_formulaic, false),
    };
    if q == 0 {
        return Err(Error::DegenerateQ { a, n });
    }
    let partition = BlockPartition::new(n, q)?;
    let nd = (n as f64).powf(-(d as f64 - 1.0) / 2.0);
    let b = 0.25;
    Ok(RieszParams {
        n,
        d,
        a,
        kappa,
        eps,
        b,
        q,
        q_formulaic,
        q_overridden,
        rho_tilde: a * (q as f64).powf(b) * nd,
        rho: (q as f64).sqrt() * nd,
        rho_tilde_exact,
        partition,
    })
}

/// Scalar modes that can read their ρ̃ out of the parameter bundle.
pub trait RieszScalar: Scalar {
    fn rho_tilde(p: &RieszParams) -> Result<Self>;
}

impl RieszScalar for Rat {
    fn rho_tilde(p: &RieszParams) -> Result<Self> {
        p.rho_tilde_exact.ok_or(Error::ExactNeedsRationalRho)
    }
}

impl RieszScalar for f64 {
    fn rho_tilde(p: &RieszParams) -> Result<Self> {
        Ok(p.rho_tilde_effective())
    }
}

/// Conservative i128 head-room check for exact-mode products. Worst-case
/// cell of Ψ^pow has numerator bits ~ pow · q · log2(den + num·max#𝔸) and
/// reductions over 2^{dm} cells add dm bits; abort before wrapping becomes
/// possible.
fn exact_bit_guard(p: &RieszParams, max_pow: u32) -> Result<()> {
    let rho = match p.rho_tilde_exact {
        Some(r) => r,
        None => return Err(Error::ExactNeedsRationalRho),
    };
    let max_block = (1..=p.q as usize)
        .map(|t| count_block(t, &p.partition, p.n, p.d).unwrap_or(0))
        .max()
        .unwrap_or(0);
    let num = rho.numer().unsigned_abs().max(1) as f64;
    let den = *rho.denom() as f64;
    let factor_bits = (den + num * max_block as f64).log2().max(1.0);
    let dm = p.d as f64 * canonical_m(p.n) as f64;
    let bits = max_pow as f64 * p.q as f64 * factor_bits + dm + 24.0;
    if bits > 120.0 {
        return Err(Error::ExactRangeExceeded(format!(
            "exact product needs ~{:.0} numerator bits (q={}, rho-tilde={}, 2^{} cells)",
            bits,
            p.q,
            rho,
            dm as u64
        )));
    }
    Ok(())
}

fn block_factors(p: &RieszParams, a: &SignAssignment, budget: u64) -> Result<Vec<Grid<i64>>> {
    (1..=p.q as usize)
        .map(|t| build_block_sum(t, &p.partition, a, budget))
        .collect()
}

fn product_from_factors<T: RieszScalar>(
    factors: &[Grid<i64>],
    rho: &T,
    skip: Option<usize>,
    d: usize,
    m: u32,
    budget: u64,
) -> Result<Grid<T>> {
    let mut psi = Grid::constant(d, m, T::one(), budget)?;
    for (i, f) in factors.iter().enumerate() {
        if Some(i + 1) == skip {
            continue;
        }
        psi.mul_one_plus_scaled(f, rho)?;
    }
    Ok(psi)
}

/// Ψ = Π_t (1 + ρ̃ F_t).
pub fn build_riesz_product<T: RieszScalar>(
    p: &RieszParams,
    a: &SignAssignment,
    budget: u64,
) -> Result<Grid<T>> {
    if T::EXACT {
        exact_bit_guard(p, 1)?;
    }
    let rho = T::rho_tilde(p)?;
    let factors = block_factors(p, a, budget)?;
    product_from_factors(&factors, &rho, None, p.d, canonical_m(p.n), budget)
}

/// Ψ_{≠j} = Π_{t≠j} (1 + ρ̃ F_t).
pub fn build_riesz_product_excluding<T: RieszScalar>(
    j: usize,
    p: &RieszParams,
    a: &SignAssignment,
    budget: u64,
) -> Result<Grid<T>> {
    if T::EXACT {
        exact_bit_guard(p, 1)?;
    }
    p.partition.block(j)?;
    let rho = T::rho_tilde(p)?;
    let factors = block_factors(p, a, budget)?;
    product_from_factors(&factors, &rho, Some(j), p.d, canonical_m(p.n), budget)
}

/// Both sides of ⟨F_j, Ψ⟩ = ρ̃ #𝔸_j + ρ̃ ⟨Φ_j, Ψ_{≠j}⟩ for one block.
#[derive(Debug, Clone)]
pub struct IdentityReport<T> {
    pub block: usize,
    pub lhs: T,
    pub principal: T,
    pub error_term: T,
    pub residual: T,
}

/// LHS via the full product against F_j; RHS via shape enumeration and the
/// ordered-pair coincidence sum against Ψ_{≠j}. The two sides share no
/// intermediate grids beyond the block sums themselves.
pub fn verify_main_identity<T: RieszScalar>(
    j: usize,
    p: &RieszParams,
    a: &SignAssignment,
    budget: u64,
) -> Result<IdentityReport<T>> {
    if T::EXACT {
        exact_bit_guard(p, 1)?;
    }
    let rho = T::rho_tilde(p)?;
    let f_j = build_block_sum(j, &p.partition, a, budget)?;
    let psi: Grid<T> = build_riesz_product(p, a, budget)?;
    let lhs = psi.inner_int(&f_j)?;

    let count = count_block(j, &p.partition, p.n, p.d)?;
    let principal = rho.clone() * T::from_u64(count);
    let phi = build_coincidence_sum_pairs(j, &p.partition, a, budget)?;
    let psi_excl: Grid<T> = build_riesz_product_excluding(j, p, a, budget)?;
    let error_term = rho * psi_excl.inner_int(&phi)?;

    let residual = lhs.clone() - (principal.clone() + error_term.clone());
    Ok(IdentityReport { block: j, lhs, principal, error_term, residual })
}

/// The certified bound and everything that went into it.
#[derive(Debug, Clone)]
pub struct Certificate<T> {
    pub inner: T,
    pub psi_l1: T,
    pub bound: T,
    pub linf_exact: i64,
    pub principal: T,
    pub error_terms: Vec<T>,
    pub residual: T,
    pub sound: bool,
    pub shape_count: u64,
    pub l2_floor: f64,
    pub eta: f64,
    pub n_pow_eta: f64,
    pub gain: f64,
    pub principal_reference: f64,
}

/// Computes ⟨H,Ψ⟩, ‖Ψ‖₁, the certified bound |⟨H,Ψ⟩|/‖Ψ‖₁, the exact grid
/// maximum it must not exceed, and the identity decomposition
/// inner = ρ̃#ℍ_n + Σ_j ρ̃⟨Φ_j, Ψ_{≠j}⟩ (coincidence fast path).
///
/// Soundness is checked multiplicatively, |inner| ≤ ‖H‖_∞ · ‖Ψ‖₁, which is
/// division-free and exact in rational mode; float mode gets 1e-9 relative
/// slack.
pub fn certificate<T: RieszScalar>(
    p: &RieszParams,
    a: &SignAssignment,
    budget: u64,
) -> Result<Certificate<T>> {
    if T::EXACT {
        exact_bit_guard(p, 1)?;
    }
    let rho = T::rho_tilde(p)?;
    let m = canonical_m(p.n);
    let h = build_hyperbolic_sum(a, budget)?;
    let factors = block_factors(p, a, budget)?;
    let psi = product_from_factors(&factors, &rho, None, p.d, m, budget)?;

    let inner = psi.inner_int(&h)?;
    let psi_l1 = psi.moment_abs(1);
    let linf_exact = h.linf();

    let shape_count = a.shapes().len() as u64;
    let principal = rho.clone() * T::from_u64(shape_count);
    let mut error_terms = Vec::with_capacity(p.q as usize);
    for j in 1..=p.q as usize {
        let phi = build_coincidence_sum(j, &p.partition, a, budget)?;
        let psi_excl = product_from_factors(&factors, &rho, Some(j), p.d, m, budget)?;
        error_terms.push(rho.clone() * psi_excl.inner_int(&phi)?);
    }
    let residual = inner.clone()
        - error_terms
            .iter()
            .fold(principal.clone(), |acc, e| acc + e.clone());

    // A vanishing Psi (a zero factor on every cell) certifies nothing.
    let bound = if psi_l1.is_zero() {
        T::zero()
    } else {
        inner.abs() / psi_l1.clone()
    };
    let sound = if T::EXACT {
        !(inner.abs() > psi_l1.clone() * T::from_i64(linf_exact))
    } else {
        inner.abs().to_f64() <= psi_l1.to_f64() * linf_exact as f64 * (1.0 + 1e-9)
    };

    Ok(Certificate {
        inner,
        psi_l1,
        bound,
        linf_exact,
        principal,
        error_terms,
        residual,
        sound,
        shape_count,
        l2_floor: (shape_count as f64).sqrt(),
        eta: p.eta(),
        n_pow_eta: (p.n as f64).powf(p.eta()),
        gain: p.gain(),
        principal_reference: p.a.powf(1.25) * (p.n as f64).powf(p.eta()),
    })
}

/// One coincidence-sum row of the lemma report: exact moments of the
/// integer grid Φ_t.
#[derive(Debug, Clone)]
pub struct PhiRow {
    pub t: usize,
    pub linf: i64,
    /// (p, E|Φ_t|^p) pairs; norms are the p-th roots, taken in f64 only
    /// at render time.
    pub moments: Vec<(u32, Rat)>,
}

/// Desk-scale measurements of the product and coincidence estimates.
/// Everything here is a report: the asymptotic bounds these quantities
/// feed carry unspecified constants, so nothing is asserted against them.
#[derive(Debug, Clone)]
pub struct LemmaReport<T> {
    pub psi_l1: T,
    pub psi_l2_sq: T,
    pub psi_min: T,
    pub psi_neg_cells: u64,
    pub total_cells: u64,
    /// E Ψ_{≠j}² per block j.
    pub psi_excl_l2_sq: Vec<T>,
    /// E (Π_{v≤V} factor)² per prefix length V = 1..q; the direct check
    /// standing in for the inductive ‖Ψ‖₂ bookkeeping.
    pub prefix_l2_sq: Vec<T>,
    /// Cells with ρ̃ F_t < −1 per block; Σ_t of these masses dominates
    /// P(Ψ < 0).
    pub block_neg_cells: Vec<u64>,
    pub phi: Vec<PhiRow>,
}

pub fn lemma_checks<T: RieszScalar>(
    p: &RieszParams,
    a: &SignAssignment,
    p_list: &[u32],
    budget: u64,
) -> Result<LemmaReport<T>> {
    if T::EXACT {
        exact_bit_guard(p, 2)?;
    }
    let rho = T::rho_tilde(p)?;
    let m = canonical_m(p.n);
    let factors = block_factors(p, a, budget)?;

    let mut prefix: Grid<T> = Grid::constant(p.d, m, T::one(), budget)?;
    let mut prefix_l2_sq = Vec::with_capacity(p.q as usize);
    for f in &factors {
        prefix.mul_one_plus_scaled(f, &rho)?;
        prefix_l2_sq.push(prefix.moment_abs(2));
    }
    let psi = prefix;

    let mut psi_excl_l2_sq = Vec::with_capacity(p.q as usize);
    for j in 1..=p.q as usize {
        let excl = product_from_factors(&factors, &rho, Some(j), p.d, m, budget)?;
        psi_excl_l2_sq.push(excl.moment_abs(2));
    }

    let minus_one = T::zero() - T::one();
    let block_neg_cells = factors
        .iter()
        .map(|f| {
            f.values()
                .iter()
                .filter(|v| rho.clone() * T::from_i64(**v) < minus_one)
                .count() as u64
        })
        .collect();

    let mut phi_rows = Vec::with_capacity(p.q as usize);
    for t in 1..=p.q as usize {
        let phi = build_coincidence_sum(t, &p.partition, a, budget)?;
        let mut moments = Vec::with_capacity(p_list.len());
        for &pe in p_list {
            moments.push((pe, phi.moment_abs(pe)?));
        }
        phi_rows.push(PhiRow { t, linf: phi.linf(), moments });
    }

    Ok(LemmaReport {
        psi_l1: psi.moment_abs(1),
        psi_l2_sq: psi.moment_abs(2),
        psi_min: psi.min_value(),
        psi_neg_cells: psi.count_negative(),
        total_cells: psi.len() as u64,
        psi_excl_l2_sq,
        prefix_l2_sq,
        block_neg_cells,
        phi: phi_rows,
    })
}

#[derive(Debug, Clone)]
pub struct TailRow {
    pub x: f64,
    pub cells: u64,
    /// Exact measure of {|ρ F_t| > x} as cells / 2^{dm}.
    pub mass: Rat,
    /// exp(−x²), the subgaussian reference profile.
    pub reference: f64,
}

/// Distribution of the true-normalization block sum ρF_t against the
/// subgaussian profile; exact counting, report only.
pub fn tail_profile(
    t: usize,
    p: &RieszParams,
    a: &SignAssignment,
    x_grid: &[f64],
    budget: u64,
) -> Result<Vec<TailRow>> {
    let f = build_block_sum(t, &p.partition, a, budget)?;
    let total = f.len() as i128;
    let mut rows = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x >= 0.0) {
            return Err(Error::InvalidParam(format!("tail threshold {} must be >= 0", x)));
        }
        let cut = x / p.rho;
        let cells = f.values().iter().filter(|v| (v.abs() as f64) > cut).count() as u64;
        rows.push(TailRow {
            x,
            cells,
            mass: Rat::new(cells as i128, total),
            reference: (-x * x).exp(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct LpScanRow {
    pub p: u32,
    /// E|f|^p, exact.
    pub moment: Rat,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct LpScanReport {
    pub rows: Vec<LpScanRow>,
    /// Least-squares slope of log‖f‖_p against log p.
    pub slope: f64,
}

pub fn lp_growth_scan(f: &Grid<i64>, p_list: &[u32]) -> Result<LpScanReport> {
    if p_list.len() < 3 {
        return Err(Error::InvalidParam("lp scan needs at least 3 exponents".into()));
    }
    if p_list.iter().any(|&p| p < 2) {
        return Err(Error::InvalidParam("lp scan exponents must be >= 2".into()));
    }
    let mut rows = Vec::with_capacity(p_list.len());
    let mut xs = Vec::with_capacity(p_list.len());
    let mut ys = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let moment = f.moment_abs(p)?;
        let norm = moment.to_f64().powf(1.0 / p as f64);
        if norm > 0.0 {
            xs.push((p as f64).ln());
            ys.push(norm.ln());
        }
        rows.push(LpScanRow { p, moment, norm });
    }
    Ok(LpScanReport { rows, slope: least_squares_slope(&xs, &ys) })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
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
    use crate::exact::rat;
    use crate::grid::{DEFAULT_CELL_BUDGET, DEFAULT_EXACT_CELL_BUDGET};
    use crate::signs::build_rfunction;
    use num_traits::{One, Zero};

    fn exact_params(n: u32, d: usize, q: u32, rho: Rat) -> RieszParams {
        derive_params(n, d, 1.0, 1.0 / (4.0 * d as f64), Some(q), Some(rho)).unwrap()
    }

    #[test]
    fn schedule_example() {
        let p = derive_params(64, 3, 1.0, 1.0 / 12.0, None, None).unwrap();
        assert!((p.eps - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(p.q_formulaic, 1);
        assert_eq!(p.q, 1);
        assert!((p.rho - 1.0 / 64.0).abs() < 1e-15);
        assert!((p.rho_tilde - 1.0 / 64.0).abs() < 1e-15);
        assert!(!p.q_overridden);
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!(matches!(
            derive_params(4, 3, 0.5, 1.0 / 12.0, None, None),
            Err(Error::DegenerateQ { .. })
        ));
        assert!(matches!(
            derive_params(4, 3, 1.0, 0.3, None, None),
            Err(Error::KappaOutOfRange { .. })
        ));
        assert!(derive_params(4, 1, 1.0, 0.1, None, None).is_err());
        assert!(derive_params(0, 3, 1.0, 0.1, None, None).is_err());
    }

    #[test]
    fn riesz_mean_is_one_exactly() {
        let p = exact_params(4, 3, 2, rat(1, 16));
        let a = SignAssignment::random(1, 4, 3).unwrap();
        let psi: Grid<Rat> = build_riesz_product(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        assert_eq!(psi.mean(), Rat::one());
        for j in 1..=2 {
            let excl: Grid<Rat> =
                build_riesz_product_excluding(j, &p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
            assert_eq!(excl.mean(), Rat::one());
        }
    }

    #[test]
    fn riesz_factorization() {
        let p = exact_params(3, 3, 2, rat(1, 8));
        let a = SignAssignment::random(2, 3, 3).unwrap();
        let psi: Grid<Rat> = build_riesz_product(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        for j in 1..=2usize {
            let mut excl: Grid<Rat> =
                build_riesz_product_excluding(j, &p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
            let f_j = build_block_sum(j, &p.partition, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
            excl.mul_one_plus_scaled(&f_j, &rat(1, 8)).unwrap();
            assert_eq!(excl, psi);
        }
    }

    #[test]
    fn riesz_exact_requires_rational_rho() {
        let mut p = exact_params(3, 3, 2, rat(1, 8));
        p.rho_tilde_exact = None;
        let a = SignAssignment::random(2, 3, 3).unwrap();
        let err = build_riesz_product::<Rat>(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap_err();
        assert!(matches!(err, Error::ExactNeedsRationalRho));
    }

    #[test]
    fn main_identity_residual_is_zero() {
        let p = exact_params(3, 3, 2, rat(1, 8));
        let a = SignAssignment::random(1, 3, 3).unwrap();
        for j in 1..=2 {
            let rep: IdentityReport<Rat> =
                verify_main_identity(j, &p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
            assert_eq!(rep.residual, Rat::zero(), "block {}", j);
        }
    }

    #[test]
    fn identity_in_d2_has_no_error_term() {
        let p = exact_params(4, 2, 1, rat(1, 8));
        let a = SignAssignment::random(7, 4, 2).unwrap();
        let rep: IdentityReport<Rat> =
            verify_main_identity(1, &p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        assert_eq!(rep.error_term, Rat::zero());
        assert_eq!(rep.residual, Rat::zero());
        assert_eq!(rep.lhs, rat(5, 8));
    }

    #[test]
    fn certificate_is_sound_and_decomposes() {
        let p = exact_params(4, 3, 2, rat(1, 16));
        let a = SignAssignment::random(3, 4, 3).unwrap();
        let cert: Certificate<Rat> = certificate(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        assert!(cert.sound);
        assert_eq!(cert.residual, Rat::zero());
        assert_eq!(cert.shape_count, 15);
        assert!(cert.bound <= Rat::from_integer(cert.linf_exact as i128));

        let certf: Certificate<f64> = certificate(&p, &a, DEFAULT_CELL_BUDGET).unwrap();
        assert!(certf.sound);
        assert!((certf.bound - cert.bound.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn zero_rho_gives_unit_psi_and_zero_bound() {
        let p = exact_params(3, 2, 1, rat(0, 1));
        let a = SignAssignment::random(1, 3, 2).unwrap();
        let psi: Grid<Rat> = build_riesz_product(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        assert!(psi.values().iter().all(|v| *v == Rat::one()));
        let cert: Certificate<Rat> = certificate(&p, &a, DEFAULT_EXACT_CELL_BUDGET).unwrap();
        assert_eq!(cert.bound, Rat::zero());
        assert_eq!(cert.inner, Rat::zero());
    }

    #[test]
    fn lemma_report_d2_phi_vanishes() {
        let p = exact_params(4, 2, 2, rat(1, 8));
        let a = SignAssignment::random(5, 4, 2).unwrap();
        let rep: LemmaReport<Rat> =
            lemma_checks(&p, &a, &[1, 2, 4], DEFAULT_EXACT_CELL_BUDGET).unwrap();
        for row in &rep.phi {
            assert_eq!(row.linf, 0);
            for (_, mom) in &row.moments {
                assert_eq!(*mom, Rat::zero());
            }
        }
        // 1 + rho F_t > 0 everywhere here, so |Psi| has mean exactly 1.
        assert_eq!(rep.psi_neg_cells, 0);
        assert_eq!(rep.psi_l1, Rat::one());
        assert_eq!(rep.prefix_l2_sq.len(), 2);
        assert_eq!(*rep.prefix_l2_sq.last().unwrap(), rep.psi_l2_sq);
    }

    #[test]
    fn tails_are_monotone_and_bounded() {
        let p = exact_params(6, 3, 2, rat(1, 16));
        let a = SignAssignment::random(1, 6, 3).unwrap();
        let xs = [0.0, 0.5, 1.0, 2.0, 100.0];
        let rows = tail_profile(1, &p, &a, &xs, DEFAULT_CELL_BUDGET).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].mass >= w[1].mass);
        }
        assert_eq!(rows.last().unwrap().cells, 0);
    }

    #[test]
    fn lp_scan_flat_for_unimodular() {
        let a = SignAssignment::random(1, 3, 2).unwrap();
        let r = a.shapes()[0].clone();
        let f = build_rfunction(&r, &a, DEFAULT_CELL_BUDGET).unwrap();
        let rep = lp_growth_scan(&f, &[2, 4, 6, 8]).unwrap();
        assert_eq!(rep.slope, 0.0);
        for row in &rep.rows {
            assert_eq!(row.moment, Rat::one());
        }
        assert!(lp_growth_scan(&f, &[2, 4]).is_err());
        assert!(lp_growth_scan(&f, &[1, 2, 4]).is_err());
    }

    #[test]
    fn exact_guard_trips_on_absurd_instances() {
        // q = n+1 singleton blocks with a huge denominator exceed i128 room.
        let p = exact_params(20, 3, 21, rat(1, 1 << 62));
        let a = SignAssignment::all_plus(20, 3).unwrap();
        let err = build_riesz_product::<Rat>(&p, &a, u64::MAX).unwrap_err();
        assert!(matches!(err, Error::ExactRangeExceeded(_)), "{err}");
    }
}
