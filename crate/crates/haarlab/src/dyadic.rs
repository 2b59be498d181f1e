//! Dyadic geometry on [0,1): intervals, rectangles, and shape vectors.
//!
//! A dyadic interval at level k is [j 2^-k, (j+1) 2^-k). A shape vector
//! lists the per-axis levels of a rectangle family; the family of a shape
//! with |r| = n tiles [0,1)^d by 2^n rectangles of volume 2^-n.

use crate::error::{Error, Result};

/// Half-open dyadic interval [pos * 2^-level, (pos+1) * 2^-level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    level: u32,
    pos: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, pos: u64) -> Result<Self> {
        if level >= 63 || pos >= (1u64 << level) {
            return Err(Error::InvalidInterval { level, pos });
        }
        Ok(DyadicInterval { level, pos })
    }

    /// The unit interval [0,1).
    pub fn unit() -> Self {
        DyadicInterval { level: 0, pos: 0 }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn pos(&self) -> u64 {
        self.pos
    }

    pub fn left(&self) -> Self {
        DyadicInterval { level: self.level + 1, pos: 2 * self.pos }
    }

    pub fn right(&self) -> Self {
        DyadicInterval { level: self.level + 1, pos: 2 * self.pos + 1 }
    }
}

impl std::fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}/{d}, {}/{d})", self.pos, self.pos + 1, d = 1u64 << self.level)
    }
}

/// Value of the L-infinity normalized Haar function of `interval` on grid
/// cell `cell` (axis index in [0, 2^m)): -1 on the left half, +1 on the
/// right half, 0 outside. Needs the grid strictly finer than the halves.
pub fn haar_value(interval: &DyadicInterval, cell: u64, m: u32) -> Result<i8> {
    let k = interval.level();
    if m <= k {
        return Err(Error::ResolutionTooCoarse { m, needed: k + 1 });
    }
    if cell >= (1u64 << m) {
        return Err(Error::InvalidParam(format!("cell {} out of range for m={}", cell, m)));
    }
    if cell >> (m - k) != interval.pos() {
        return Ok(0);
    }
    Ok(if (cell >> (m - k - 1)) & 1 == 1 { 1 } else { -1 })
}

/// Product of dyadic intervals, one per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicRectangle {
    sides: Vec<DyadicInterval>,
}

impl DyadicRectangle {
    pub fn new(sides: Vec<DyadicInterval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidParam("rectangle needs at least one side".into()));
        }
        Ok(DyadicRectangle { sides })
    }

    /// Rectangle of shape `r` at flattened position `p` (axis 1 most
    /// significant: p = ((p_1 * 2^{r_2} + p_2) * 2^{r_3} + ...)).
    pub fn from_shape_pos(r: &ShapeVector, p: u64) -> Result<Self> {
        if p >= (1u64 << r.scale_sum()) {
            return Err(Error::InvalidParam(format!(
                "position {} out of range for shape {}",
                p, r
            )));
        }
        let mut rem = p;
        let mut sides = vec![DyadicInterval::unit(); r.dim()];
        for k in (0..r.dim()).rev() {
            let bits = r.scales()[k];
            let mask = (1u64 << bits) - 1;
            sides[k] = DyadicInterval::new(bits, rem & mask)?;
            rem >>= bits;
        }
        Ok(DyadicRectangle { sides })
    }

    pub fn sides(&self) -> &[DyadicInterval] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// log2 of the volume (always nonpositive).
    pub fn volume_log2(&self) -> i64 {
        -(self.sides.iter().map(|s| s.level() as i64).sum::<i64>())
    }
}

/// Per-axis dyadic scales r = (r_1, ..., r_d); |r| = sum r_k.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShapeVector {
    r: Vec<u32>,
}

impl ShapeVector {
    pub fn new(r: Vec<u32>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::InvalidParam("shape vector needs d >= 1".into()));
        }
        Ok(ShapeVector { r })
    }

    pub fn scales(&self) -> &[u32] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// |r|, the scale budget this shape spends.
    pub fn scale_sum(&self) -> u32 {
        self.r.iter().sum()
    }

    pub fn max_scale(&self) -> u32 {
        *self.r.iter().max().unwrap()
    }

    pub fn first(&self) -> u32 {
        self.r[0]
    }
}

impl std::fmt::Display for ShapeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.r.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, ")")
    }
}

/// All shape vectors of dimension d with |r| = n, lexicographically ordered.
pub fn enumerate_shapes(n: u32, d: usize) -> Result<Vec<ShapeVector>> {
    if d == 0 {
        return Err(Error::InvalidParam("dimension must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(shape_count(n, d) as usize);
    let mut cur = vec![0u32; d];
    fill_shapes(n, 0, &mut cur, &mut out);
    Ok(out)
}

fn fill_shapes(budget: u32, axis: usize, cur: &mut [u32], out: &mut Vec<ShapeVector>) {
    if axis + 1 == cur.len() {
        cur[axis] = budget;
        out.push(ShapeVector { r: cur.to_vec() });
        return;
    }
    for v in 0..=budget {
        cur[axis] = v;
        fill_shapes(budget - v, axis + 1, cur, out);
    }
}

/// #H_n = C(n+d-1, d-1), the number of shapes.
pub fn shape_count(n: u32, d: usize) -> u64 {
    binomial(n as u64 + d as u64 - 1, d as u64 - 1)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
