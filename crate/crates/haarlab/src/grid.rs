//! Piecewise-constant functions on the uniform dyadic grid of [0,1)^d.
//!
//! A `Grid` stores one scalar per cell of the 2^m x ... x 2^m mesh, flat,
//! axis 0 most significant. Everything in scope is cell-constant once
//! m >= n+1, so grid arithmetic is exact function arithmetic.

use rayon::prelude::*;

use crate::dyadic::ShapeVector;
use crate::error::{Error, Result};
use crate::exact::{Rat, Scalar};

/// Hard ceiling on cells for integer/float grids.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 28;
/// Tighter ceiling for rational grids; Ratio cells cost ~32 bytes plus gcd time.
pub const DEFAULT_EXACT_CELL_BUDGET: u64 = 1 << 22;

/// Chunk width for parallel reductions. Partial sums are collected in slice
/// order and folded sequentially, so float results do not depend on the
/// thread count.
const REDUCE_CHUNK: usize = 1 << 16;

pub fn cell_count(d: usize, m: u32) -> u128 {
    let bits = d as u32 * m;
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

fn check_budget(d: usize, m: u32, budget: u64) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidParam("dimension must be >= 1".into()));
    }
    let cells = cell_count(d, m);
    if cells > budget as u128 {
        return Err(Error::GridTooLarge { cells, budget });
    }
    Ok(cells as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    d: usize,
    m: u32,
    values: Vec<T>,
}

impl<T> Grid<T> {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Component of flat index `cell` along `axis`.
    pub fn axis_index(&self, cell: usize, axis: usize) -> u64 {
        let shift = (self.d - 1 - axis) as u32 * self.m;
        (cell as u64 >> shift) & ((1u64 << self.m) - 1)
    }

    fn same_shape<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.d != other.d || self.m != other.m {
            return Err(Error::ShapeMismatch {
                d_a: self.d,
                m_a: self.m,
                d_b: other.d,
                m_b: other.m,
            });
        }
        Ok(())
    }
}

fn ordered_partials<T: Sync, S: Send>(
    values: &[T],
    map: impl Fn(&[T]) -> S + Sync,
) -> Vec<S> {
    values.par_chunks(REDUCE_CHUNK).map(|c| map(c)).collect()
}

fn refine_values<T: Clone>(src: &Grid<T>, m2: u32) -> Result<Vec<T>> {
    if m2 < src.m {
        return Err(Error::InvalidParam(format!(
            "refinement target m={} coarser than m={}",
            m2, src.m
        )));
    }
    let d = src.d;
    let cells = check_budget(d, m2, DEFAULT_CELL_BUDGET)?;
    let shift = m2 - src.m;
    let mask2 = (1u64 << m2) - 1;
    let mut out = Vec::with_capacity(cells);
    for c2 in 0..cells as u64 {
        let mut c = 0u64;
        for k in 0..d {
            let hi = (d - 1 - k) as u32;
            let i2 = (c2 >> (hi * m2)) & mask2;
            c |= (i2 >> shift) << (hi * src.m);
        }
        out.push(src.values[c as usize].clone());
    }
    Ok(out)
}

// Integer mode: Haar sums and their exact moments.
impl Grid<i64> {
    pub fn zeros(d: usize, m: u32, budget: u64) -> Result<Self> {
        let cells = check_budget(d, m, budget)?;
        Ok(Grid { d, m, values: vec![0; cells] })
    }

    /// Reference synthesis of one r-function: per cell, look the rectangle
    /// position and Haar sign up per axis and multiply.
    ///
    /// Cell bit rule (axis index i with m bits): position p_k = top r_k bits
    /// of i_k, sign = -1 if bit (m - r_k - 1) of i_k is 0, +1 if it is 1.
    pub fn synthesize(r: &ShapeVector, signs: &[i64], m: u32, budget: u64) -> Result<Self> {
        let mut g = Grid::zeros(r.dim(), m, budget)?;
        g.add_rfunction(r, signs)?;
        Ok(g)
    }

    /// Adds Σ_p signs[p]·h_{R(r,p)} cell-wise. `signs` entries must be ±1.
    pub fn add_rfunction(&mut self, r: &ShapeVector, signs: &[i64]) -> Result<()> {
        if r.dim() != self.d {
            return Err(Error::ShapeMismatch {
                d_a: self.d,
                m_a: self.m,
                d_b: r.dim(),
                m_b: self.m,
            });
        }
        if self.m < r.max_scale() + 1 {
            return Err(Error::ResolutionTooCoarse {
                m: self.m,
                needed: r.max_scale() + 1,
            });
        }
        let want = 1u64 << r.scale_sum();
        if signs.len() as u64 != want {
            return Err(Error::WrongSignCount {
                shape: r.to_string(),
                want,
                got: signs.len() as u64,
            });
        }
        let d = self.d;
        let m = self.m;
        let side = 1usize << m;

        // Per-axis tables: position contribution to the flattened p, and the
        // Haar sign of that axis.
        let mut pos_shift = vec![0u32; d];
        for k in 0..d {
            pos_shift[k] = r.scales()[k + 1..].iter().sum();
        }
        let mut tables: Vec<Vec<(u64, i64)>> = Vec::with_capacity(d);
        for k in 0..d {
            let rk = r.scales()[k];
            let mut t = Vec::with_capacity(side);
            for i in 0..side as u64 {
                let p_k = i >> (m - rk);
                let sgn = if (i >> (m - rk - 1)) & 1 == 1 { 1 } else { -1 };
                t.push((p_k << pos_shift[k], sgn));
            }
            tables.push(t);
        }

        let mask = (side - 1) as u64;
        for (c, v) in self.values.iter_mut().enumerate() {
            let mut p = 0u64;
            let mut sgn = 1i64;
            for k in 0..d {
                let i_k = ((c as u64) >> ((d - 1 - k) as u32 * m)) & mask;
                let (pp, s) = tables[k][i_k as usize];
                p |= pp;
                sgn *= s;
            }
            *v += sgn * signs[p as usize];
        }
        Ok(())
    }

    pub fn add_assign_grid(&mut self, other: &Grid<i64>) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += *b;
        }
        Ok(())
    }

    pub fn add_scalar(&mut self, c: i64) {
        for v in &mut self.values {
            *v += c;
        }
    }

    pub fn mul(&self, other: &Grid<i64>) -> Result<Grid<i64>> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Grid { d: self.d, m: self.m, values })
    }

    pub fn square(&self) -> Grid<i64> {
        let values = self.values.iter().map(|v| v * v).collect();
        Grid { d: self.d, m: self.m, values }
    }

    pub fn linf(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Σ_cells |v|^p in i128, erroring instead of wrapping.
    pub fn sum_abs_pow(&self, p: u32) -> Result<i128> {
        let partials = ordered_partials(&self.values, |chunk| -> Result<i128> {
            let mut acc: i128 = 0;
            for v in chunk {
                let a = (v.unsigned_abs() as i128)
                    .checked_pow(p)
                    .ok_or_else(|| power_overflow(*v, p))?;
                acc = acc
                    .checked_add(a)
                    .ok_or_else(|| power_overflow(*v, p))?;
            }
            Ok(acc)
        });
        let mut total: i128 = 0;
        for s in partials {
            total = total
                .checked_add(s?)
                .ok_or_else(|| power_overflow(0, p))?;
        }
        Ok(total)
    }

    /// Mean of |v|^p, exact.
    pub fn moment_abs(&self, p: u32) -> Result<Rat> {
        Ok(Rat::new(self.sum_abs_pow(p)?, self.len() as i128))
    }

    pub fn mean(&self) -> Rat {
        let partials = ordered_partials(&self.values, |chunk| {
            chunk.iter().map(|v| *v as i128).sum::<i128>()
        });
        Rat::new(partials.into_iter().sum::<i128>(), self.len() as i128)
    }

    /// Mean of the product, exact.
    pub fn inner(&self, other: &Grid<i64>) -> Result<Rat> {
        self.same_shape(other)?;
        let n = self.len();
        let partials: Vec<i128> = self
            .values
            .par_chunks(REDUCE_CHUNK)
            .zip(other.values.par_chunks(REDUCE_CHUNK))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| *x as i128 * *y as i128)
                    .sum::<i128>()
            })
            .collect();
        Ok(Rat::new(partials.into_iter().sum::<i128>(), n as i128))
    }

    pub fn refine(&self, m2: u32) -> Result<Grid<i64>> {
        Ok(Grid { d: self.d, m: m2, values: refine_values(self, m2)? })
    }

    pub fn to_exact(&self) -> Grid<Rat> {
        let values = self.values.iter().map(|v| Rat::from_integer(*v as i128)).collect();
        Grid { d: self.d, m: self.m, values }
    }

    pub fn to_float(&self) -> Grid<f64> {
        let values = self.values.iter().map(|v| *v as f64).collect();
        Grid { d: self.d, m: self.m, values }
    }
}

fn power_overflow(v: i64, p: u32) -> Error {
    Error::ExactRangeExceeded(format!("|{}|^{} overflows the i128 accumulator", v, p))
}

// Scalar mode (rational or float): Riesz products and their norms.
impl<T: Scalar> Grid<T> {
    pub fn constant(d: usize, m: u32, value: T, budget: u64) -> Result<Self> {
        let cells = check_budget(d, m, budget)?;
        Ok(Grid { d, m, values: vec![value; cells] })
    }

    /// Cell-wise `self *= 1 + rho * f`, the Riesz factor step.
    pub fn mul_one_plus_scaled(&mut self, f: &Grid<i64>, rho: &T) -> Result<()> {
        self.same_shape(f)?;
        let one = T::one();
        self.values
            .par_iter_mut()
            .zip(f.values.par_iter())
            .for_each(|(v, c)| {
                let factor = one.clone() + rho.clone() * T::from_i64(*c);
                *v = v.clone() * factor;
            });
        Ok(())
    }

    pub fn mean(&self) -> T {
        let n = self.len() as u64;
        let partials = ordered_partials(&self.values, |chunk| {
            chunk.iter().fold(T::zero(), |acc, v| acc + v.clone())
        });
        let total = partials.into_iter().fold(T::zero(), |acc, s| acc + s);
        total / T::from_u64(n)
    }

    /// Mean of |v|^p for integer p >= 1, exact in rational mode.
    pub fn moment_abs(&self, p: u32) -> T {
        let n = self.len() as u64;
        let partials = ordered_partials(&self.values, |chunk| {
            chunk.iter().fold(T::zero(), |acc, v| {
                let a = v.abs();
                let mut pw = a.clone();
                for _ in 1..p {
                    pw = pw * a.clone();
                }
                acc + pw
            })
        });
        let total = partials.into_iter().fold(T::zero(), |acc, s| acc + s);
        total / T::from_u64(n)
    }

    /// Mean of self * f with an integer grid, exact in rational mode.
    pub fn inner_int(&self, f: &Grid<i64>) -> Result<T> {
        self.same_shape(f)?;
        let n = self.len() as u64;
        let partials: Vec<T> = self
            .values
            .par_chunks(REDUCE_CHUNK)
            .zip(f.values.par_chunks(REDUCE_CHUNK))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .fold(T::zero(), |acc, (x, y)| acc + x.clone() * T::from_i64(*y))
            })
            .collect();
        let total = partials.into_iter().fold(T::zero(), |acc, s| acc + s);
        Ok(total / T::from_u64(n))
    }

    pub fn linf_abs(&self) -> T {
        let mut best = T::zero();
        for v in &self.values {
            let a = v.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn min_value(&self) -> T {
        let mut best = self.values[0].clone();
        for v in &self.values[1..] {
            if *v < best {
                best = v.clone();
            }
        }
        best
    }

    /// Number of strictly negative cells; measure = count / 2^{dm}.
    pub fn count_negative(&self) -> u64 {
        let zero = T::zero();
        self.values.iter().filter(|v| **v < zero).count() as u64
    }

    pub fn refine(&self, m2: u32) -> Result<Grid<T>> {
        Ok(Grid { d: self.d, m: m2, values: refine_values(self, m2)? })
    }

    pub fn to_float(&self) -> Grid<f64> {
        let values = self.values.iter().map(|v| v.to_f64()).collect();
        Grid { d: self.d, m: self.m, values }
    }
}

/// Coefficient slot of the Haar function at per-axis levels r, flattened
/// position p, in the wavelet layout used by `inverse_haar`: per axis,
/// slot w = 2^{r_k} + p_k; slot 0 holds the (unused) constant term.
pub fn haar_slot(r: &ShapeVector, p: u64, m: u32) -> usize {
    let d = r.dim();
    let mut slot = 0u64;
    let mut rem = p;
    for k in (0..d).rev() {
        let rk = r.scales()[k];
        let w = (1u64 << rk) + (rem & ((1u64 << rk) - 1));
        rem >>= rk;
        slot |= w << ((d - 1 - k) as u32 * m);
    }
    slot as usize
}

/// In-place inverse anisotropic Haar transform: the grid holds coefficients
/// in `haar_slot` layout on entry and cell values on exit.
///
/// Each axis pass rebuilds fibers level by level through a scratch pair; the
/// naive in-place butterfly would overwrite detail slots it has not read yet.
pub fn inverse_haar(g: &mut Grid<i64>) {
    let d = g.d();
    let m = g.m();
    let side = 1usize << m;
    if m == 0 {
        return;
    }
    let mut a = vec![0i64; side];
    let mut b = vec![0i64; side];
    for k in 0..d {
        let stride = 1usize << ((d - 1 - k) as u32 * m);
        let block = stride << m;
        let values = g.values_mut();
        for hi in 0..values.len() / block {
            for lo in 0..stride {
                let base = hi * block + lo;
                for t in 0..side {
                    a[t] = values[base + t * stride];
                }
                for l in 0..m {
                    let half = 1usize << l;
                    for j in 0..half {
                        let v = a[j];
                        let dd = a[half + j];
                        b[2 * j] = v - dd;
                        b[2 * j + 1] = v + dd;
                    }
                    b[2 * half..side].copy_from_slice(&a[2 * half..side]);
                    std::mem::swap(&mut a, &mut b);
                }
                for t in 0..side {
                    values[base + t * stride] = a[t];
                }
            }
        }
    }
}

/// Littlewood-Paley square function of a d=1 coefficient family:
/// pointwise sqrt of Σ_I a_I^2 1_I on the 2^m grid.
pub fn square_function(coeffs: &[(crate::dyadic::DyadicInterval, f64)], m: u32) -> Result<Grid<f64>> {
    for (i, _) in coeffs {
        if i.level() >= m {
            return Err(Error::ResolutionTooCoarse { m, needed: i.level() + 1 });
        }
    }
    let mut g: Grid<f64> = Grid::constant(1, m, 0.0, DEFAULT_CELL_BUDGET)?;
    for (i, a) in coeffs {
        let width = 1u64 << (m - i.level());
        let start = i.pos() * width;
        for c in start..start + width {
            g.values_mut()[c as usize] += a * a;
        }
    }
    for v in g.values_mut() {
        *v = v.sqrt();
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{enumerate_shapes, DyadicInterval};
    use crate::exact::rat;
    use crate::rng::SeededRng;

    fn plus(n: u32) -> Vec<i64> {
        vec![1; 1 << n]
    }

    fn random_signs(rng: &mut SeededRng, n: u32) -> Vec<i64> {
        (0..1u64 << n).map(|_| if rng.next_bit() == 1 { 1 } else { -1 }).collect()
    }

    #[test]
    fn synthesize_d1_level1() {
        let r = ShapeVector::new(vec![1]).unwrap();
        let g = Grid::synthesize(&r, &[1, 1], 2, DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(g.values(), &[-1, 1, -1, 1]);
        let g = Grid::synthesize(&r, &[1, -1], 2, DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(g.values(), &[-1, 1, 1, -1]);
    }

    #[test]
    fn synthesize_needs_resolution_and_budget() {
        let r = ShapeVector::new(vec![2]).unwrap();
        assert!(matches!(
            Grid::synthesize(&r, &plus(2), 2, DEFAULT_CELL_BUDGET),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        assert!(matches!(
            Grid::synthesize(&r, &plus(2), 5, 16),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn rfunction_is_unimodular() {
        let mut rng = SeededRng::new(7);
        for d in 1..=3usize {
            for n in 0..=4u32 {
                for r in enumerate_shapes(n, d).unwrap() {
                    let signs = random_signs(&mut rng, n);
                    let g = Grid::synthesize(&r, &signs, n + 1, DEFAULT_CELL_BUDGET).unwrap();
                    assert!(g.values().iter().all(|v| v.abs() == 1), "shape {}", r);
                }
            }
        }
    }

    #[test]
    fn inner_orthogonality() {
        let shapes = enumerate_shapes(3, 2).unwrap();
        let m = 4;
        for a in &shapes {
            for b in &shapes {
                let ga = Grid::synthesize(a, &plus(3), m, DEFAULT_CELL_BUDGET).unwrap();
                let gb = Grid::synthesize(b, &plus(3), m, DEFAULT_CELL_BUDGET).unwrap();
                let want = if a == b { Rat::from_integer(1) } else { Rat::from_integer(0) };
                assert_eq!(ga.inner(&gb).unwrap(), want);
            }
        }
    }

    #[test]
    fn butterfly_matches_direct() {
        let mut rng = SeededRng::new(11);
        for d in 1..=3usize {
            for n in 1..=4u32 {
                let m = n + 1;
                let shapes = enumerate_shapes(n, d).unwrap();
                let mut direct = Grid::zeros(d, m, DEFAULT_CELL_BUDGET).unwrap();
                let mut coeffs = Grid::zeros(d, m, DEFAULT_CELL_BUDGET).unwrap();
                for r in &shapes {
                    let signs = random_signs(&mut rng, n);
                    direct.add_rfunction(r, &signs).unwrap();
                    for (p, s) in signs.iter().enumerate() {
                        coeffs.values_mut()[haar_slot(r, p as u64, m)] += *s;
                    }
                }
                inverse_haar(&mut coeffs);
                assert_eq!(coeffs.values(), direct.values(), "d={} n={}", d, n);
            }
        }
    }

    #[test]
    fn moments_and_linf() {
        let r = ShapeVector::new(vec![1, 1]).unwrap();
        let mut g = Grid::synthesize(&r, &plus(2), 3, DEFAULT_CELL_BUDGET).unwrap();
        let s = ShapeVector::new(vec![0, 2]).unwrap();
        g.add_rfunction(&s, &plus(2)).unwrap();
        // H = f_(1,1) + f_(0,2): orthonormal pieces, so E H^2 = 2.
        assert_eq!(g.moment_abs(2).unwrap(), Rat::from_integer(2));
        assert_eq!(g.mean(), Rat::from_integer(0));
        assert_eq!(g.linf(), 2);
        assert_eq!(g.inner(&g).unwrap(), Rat::from_integer(2));
    }

    #[test]
    fn refine_preserves_norms() {
        let r = ShapeVector::new(vec![1, 2]).unwrap();
        let mut rng = SeededRng::new(3);
        let signs = random_signs(&mut rng, 3);
        let g = Grid::synthesize(&r, &signs, 4, DEFAULT_CELL_BUDGET).unwrap();
        let fine = g.refine(6).unwrap();
        assert_eq!(fine.m(), 6);
        assert_eq!(g.moment_abs(2).unwrap(), fine.moment_abs(2).unwrap());
        assert_eq!(g.mean(), fine.mean());
        assert_eq!(g.linf(), fine.linf());
    }

    #[test]
    fn scalar_grid_riesz_step() {
        let r = ShapeVector::new(vec![1, 0]).unwrap();
        let f = Grid::synthesize(&r, &plus(1), 2, DEFAULT_CELL_BUDGET).unwrap();
        let mut psi: Grid<Rat> =
            Grid::constant(2, 2, Rat::from_integer(1), DEFAULT_EXACT_CELL_BUDGET).unwrap();
        psi.mul_one_plus_scaled(&f, &rat(1, 4)).unwrap();
        // f is +-1 valued, so cells are 3/4 or 5/4 and the mean stays 1.
        assert_eq!(psi.mean(), Rat::from_integer(1));
        assert_eq!(psi.min_value(), rat(3, 4));
        assert_eq!(psi.count_negative(), 0);
        assert_eq!(psi.inner_int(&f).unwrap(), rat(1, 4));
        assert_eq!(psi.linf_abs(), rat(5, 4));
    }

    #[test]
    fn float_mean_is_deterministic_and_close() {
        let mut rng = SeededRng::new(5);
        let values: Vec<f64> = (0..(1 << 18)).map(|_| rng.next_f64() - 0.5).collect();
        let g = Grid { d: 2, m: 9, values };
        let m1 = g.mean();
        let m2 = g.mean();
        assert_eq!(m1.to_bits(), m2.to_bits());
        assert!(m1.abs() < 1e-2);
    }

    #[test]
    fn square_function_hand_case() {
        let unit = DyadicInterval::unit();
        let left = DyadicInterval::new(1, 0).unwrap();
        let g = square_function(&[(unit, 1.0), (left, 1.0)], 2).unwrap();
        let want = [2.0f64.sqrt(), 2.0f64.sqrt(), 1.0, 1.0];
        assert_eq!(g.values(), &want);
        assert!(square_function(&[(left, 1.0)], 1).is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Grid::zeros(2, 3, DEFAULT_CELL_BUDGET).unwrap();
        let b = Grid::zeros(2, 4, DEFAULT_CELL_BUDGET).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::ShapeMismatch { .. })));
    }
}
