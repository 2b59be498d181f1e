//! Sign assignments and the signed sums built from them.
//!
//! A `SignAssignment` fixes α(R) ∈ {±1} for every rectangle of every shape
//! in ℍ_n. From it we build the r-functions f_r, the full hyperbolic sum
//! H = Σ_r f_r, first-coordinate block sums F_t, and the coincidence sums
//! Φ_t over ordered pairs of distinct shapes sharing r_1.

use std::cmp::Ordering;
use std::path::Path;

use serde::Deserialize;

use crate::dyadic::{enumerate_shapes, ShapeVector};
use crate::error::{Error, Result};
use crate::grid::{haar_slot, inverse_haar, Grid};
use crate::rng::SeededRng;

/// ±1 coefficients for all rectangles of all shapes in ℍ_n, packed as one
/// bit array per shape (bit j = sign of flattened position j, 1 ↦ +1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignAssignment {
    d: usize,
    n: u32,
    shapes: Vec<ShapeVector>,
    bits: Vec<Vec<u8>>,
}

fn bit_bytes(n: u32) -> usize {
    (((1u64 << n) + 7) / 8) as usize
}

impl SignAssignment {
    /// Independent fair signs, one generator bit per sign: shapes in
    /// lexicographic order, positions ascending within each shape.
    pub fn random(seed: u64, n: u32, d: usize) -> Result<Self> {
        let mut a = SignAssignment::all_plus(n, d)?;
        let mut rng = SeededRng::new(seed);
        for shape_bits in &mut a.bits {
            for j in 0..1u64 << n {
                let b = rng.next_bit() as u8;
                let byte = (j / 8) as usize;
                let mask = 1u8 << (j % 8);
                if b == 1 {
                    shape_bits[byte] |= mask;
                } else {
                    shape_bits[byte] &= !mask;
                }
            }
        }
        Ok(a)
    }

    pub fn all_plus(n: u32, d: usize) -> Result<Self> {
        let shapes = enumerate_shapes(n, d)?;
        let nbytes = bit_bytes(n);
        let signs = 1u64 << n;
        // Padding bits above 2^n stay zero so serialized files are canonical.
        let mut proto = vec![0u8; nbytes];
        for j in 0..signs {
            proto[(j / 8) as usize] |= 1 << (j % 8);
        }
        let bits = vec![proto; shapes.len()];
        Ok(SignAssignment { d, n, shapes, bits })
    }

    /// All signs −1: the all-zero bit pattern, first in `pattern_cmp` order.
    pub fn all_minus(n: u32, d: usize) -> Result<Self> {
        let shapes = enumerate_shapes(n, d)?;
        let bits = vec![vec![0u8; bit_bytes(n)]; shapes.len()];
        Ok(SignAssignment { d, n, shapes, bits })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn shapes(&self) -> &[ShapeVector] {
        &self.shapes
    }

    pub fn signs_per_shape(&self) -> u64 {
        1u64 << self.n
    }

    pub fn shape_index(&self, r: &ShapeVector) -> Option<usize> {
        self.shapes.binary_search(r).ok()
    }

    pub fn sign(&self, shape_idx: usize, p: u64) -> i64 {
        let b = (self.bits[shape_idx][(p / 8) as usize] >> (p % 8)) & 1;
        if b == 1 {
            1
        } else {
            -1
        }
    }

    pub fn flip(&mut self, shape_idx: usize, p: u64) {
        self.bits[shape_idx][(p / 8) as usize] ^= 1 << (p % 8);
    }

    /// Total sign count #ℍ_n · 2^n; flat index = (shape index << n) + p.
    pub fn flat_len(&self) -> u64 {
        (self.shapes.len() as u64) << self.n
    }

    pub fn split_flat(&self, i: u64) -> (usize, u64) {
        ((i >> self.n) as usize, i & (self.signs_per_shape() - 1))
    }

    pub fn sign_flat(&self, i: u64) -> i64 {
        let (s, p) = self.split_flat(i);
        self.sign(s, p)
    }

    pub fn flip_flat(&mut self, i: u64) {
        let (s, p) = self.split_flat(i);
        self.flip(s, p);
    }

    pub fn signs_vec(&self, shape_idx: usize) -> Vec<i64> {
        (0..self.signs_per_shape()).map(|p| self.sign(shape_idx, p)).collect()
    }

    /// Bit-pattern order (shape-major, position-ascending, 0 before 1);
    /// the deterministic tie-break for search results.
    pub fn pattern_cmp(&self, other: &SignAssignment) -> Ordering {
        debug_assert_eq!((self.d, self.n), (other.d, other.n));
        for (a, b) in self.bits.iter().zip(&other.bits) {
            for (x, y) in a.iter().zip(b) {
                // reverse_bits makes byte order agree with LSB-first bit order.
                match x.reverse_bits().cmp(&y.reverse_bits()) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
        }
        Ordering::Equal
    }

    fn hex(&self, shape_idx: usize) -> String {
        let mut s = String::with_capacity(self.bits[shape_idx].len() * 2);
        for b in &self.bits[shape_idx] {
            s.push_str(&format!("{:02x}", b));
        }
        s
    }

    /// Canonical sign-file JSON. Loading this back and saving again is
    /// byte-identical.
    pub fn to_json(&self) -> String {
        self.to_json_with_extra(None)
    }

    /// Canonical JSON plus one optional extra top-level block (loaders
    /// ignore unknown keys, so readers of plain sign files accept it).
    pub fn to_json_with_extra(&self, extra: Option<(&str, String)>) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"d\": {},\n", self.d));
        out.push_str(&format!("  \"n\": {},\n", self.n));
        out.push_str("  \"shapes\": [\n");
        for (i, r) in self.shapes.iter().enumerate() {
            let rs: Vec<String> = r.scales().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "    {{ \"r\": [{}], \"signs_hex\": \"{}\" }}{}\n",
                rs.join(", "),
                self.hex(i),
                if i + 1 < self.shapes.len() { "," } else { "" }
            ));
        }
        out.push_str("  ]");
        if let Some((key, body)) = extra {
            out.push_str(&format!(",\n  \"{}\": {}", key, body));
        }
        out.push_str("\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct FileShape {
            r: Vec<u32>,
            signs_hex: String,
        }
        #[derive(Deserialize)]
        struct File {
            d: usize,
            n: u32,
            shapes: Vec<FileShape>,
        }
        let file: File = serde_json::from_str(text)?;
        if file.d == 0 {
            return Err(Error::SignFile("d must be >= 1".into()));
        }
        if file.n > 24 {
            return Err(Error::SignFile(format!("n = {} is out of range", file.n)));
        }
        let expected = enumerate_shapes(file.n, file.d)?;
        if file.shapes.len() != expected.len() {
            return Err(Error::SignFile(format!(
                "expected {} shapes for n={}, d={}, found {}",
                expected.len(),
                file.n,
                file.d,
                file.shapes.len()
            )));
        }
        let nbytes = bit_bytes(file.n);
        let signs = 1u64 << file.n;
        let mut bits = Vec::with_capacity(expected.len());
        for (want, got) in expected.iter().zip(&file.shapes) {
            let r = ShapeVector::new(got.r.clone())
                .map_err(|e| Error::SignFile(format!("bad shape entry: {}", e)))?;
            if &r != want {
                return Err(Error::SignFile(format!(
                    "shape {} out of place: expected {} (shapes must be lexicographic, \
                     no duplicates or gaps)",
                    r, want
                )));
            }
            if got.signs_hex.len() != nbytes * 2 {
                return Err(Error::SignFile(format!(
                    "shape {}: signs_hex has {} hex digits, expected {}",
                    r,
                    got.signs_hex.len(),
                    nbytes * 2
                )));
            }
            let mut arr = vec![0u8; nbytes];
            for (i, chunk) in got.signs_hex.as_bytes().chunks(2).enumerate() {
                let s = std::str::from_utf8(chunk).unwrap();
                arr[i] = u8::from_str_radix(s, 16).map_err(|_| {
                    Error::SignFile(format!("shape {}: invalid hex '{}'", r, s))
                })?;
            }
            for j in signs..(nbytes as u64 * 8) {
                if (arr[(j / 8) as usize] >> (j % 8)) & 1 != 0 {
                    return Err(Error::SignFile(format!(
                        "shape {}: nonzero padding bit {} beyond the {} signs",
                        r, j, signs
                    )));
                }
            }
            bits.push(arr);
        }
        Ok(SignAssignment { d: file.d, n: file.n, shapes: expected, bits })
    }

    pub fn load(path: &Path) -> Result<Self> {
        SignAssignment::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

/// Partition of the first-coordinate range {0, ..., n} into q consecutive
/// blocks with sizes differing by at most one, larger blocks first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    n: u32,
    blocks: Vec<(u32, u32)>,
}

impl BlockPartition {
    pub fn new(n: u32, q: u32) -> Result<Self> {
        if q == 0 || q > n + 1 {
            return Err(Error::InvalidParam(format!(
                "block count q = {} must satisfy 1 <= q <= n+1 = {}",
                q,
                n + 1
            )));
        }
        let total = n + 1;
        let base = total / q;
        let rem = total % q;
        let mut blocks = Vec::with_capacity(q as usize);
        let mut lo = 0u32;
        for t in 0..q {
            let size = base + if t < rem { 1 } else { 0 };
            blocks.push((lo, lo + size - 1));
            lo += size;
        }
        Ok(BlockPartition { n, blocks })
    }

    pub fn q(&self) -> u32 {
        self.blocks.len() as u32
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Inclusive first-coordinate range of block t (1-based).
    pub fn block(&self, t: usize) -> Result<(u32, u32)> {
        if t == 0 || t > self.blocks.len() {
            return Err(Error::InvalidBlock { t, q: self.q() });
        }
        Ok(self.blocks[t - 1])
    }

    pub fn blocks(&self) -> &[(u32, u32)] {
        &self.blocks
    }
}

/// Canonical grid resolution for scale budget n: the finest Haar
/// half-interval has length 2^{-(n+1)}.
pub fn canonical_m(n: u32) -> u32 {
    n + 1
}

/// Butterfly synthesis of Σ f_r over the given shape indices: place the ±1
/// coefficients in wavelet slots, then one inverse transform.
fn synthesize_sum(a: &SignAssignment, idxs: &[usize], budget: u64) -> Result<Grid<i64>> {
    let m = canonical_m(a.n());
    let mut g = Grid::zeros(a.d(), m, budget)?;
    for &si in idxs {
        let r = &a.shapes()[si];
        for p in 0..a.signs_per_shape() {
            g.values_mut()[haar_slot(r, p, m)] += a.sign(si, p);
        }
    }
    inverse_haar(&mut g);
    Ok(g)
}

/// One r-function f_r as a ±1-valued integer grid, by the direct
/// (reference) synthesis path.
pub fn build_rfunction(r: &ShapeVector, a: &SignAssignment, budget: u64) -> Result<Grid<i64>> {
    let si = a
        .shape_index(r)
        .ok_or_else(|| Error::ShapeNotInAssignment { shape: r.to_string() })?;
    Grid::synthesize(r, &a.signs_vec(si), canonical_m(a.n()), budget)
}

/// H = Σ_{r ∈ ℍ_n} f_r (butterfly path).
pub fn build_hyperbolic_sum(a: &SignAssignment, budget: u64) -> Result<Grid<i64>> {
    let idxs: Vec<usize> = (0..a.shapes().len()).collect();
    synthesize_sum(a, &idxs, budget)
}

/// H by per-shape direct synthesis; the oracle the butterfly is tested
/// against.
pub fn build_hyperbolic_sum_direct(a: &SignAssignment, budget: u64) -> Result<Grid<i64>> {
    let m = canonical_m(a.n());
    let mut g = Grid::zeros(a.d(), m, budget)?;
    for (si, r) in a.shapes().iter().enumerate() {
        g.add_rfunction(r, &a.signs_vec(si))?;
    }
    Ok(g)
}

fn block_shape_indices(a: &SignAssignment, part: &BlockPartition, t: usize) -> Result<Vec<usize>> {
    let (lo, hi) = part.block(t)?;
    Ok((0..a.shapes().len())
        .filter(|&si| {
            let v = a.shapes()[si].first();
            v >= lo && v <= hi
        })
        .collect())
}

/// F_t = Σ_{r: r_1 ∈ I_t} f_r.
pub fn build_block_sum(
    t: usize,
    part: &BlockPartition,
    a: &SignAssignment,
    budget: u64,
) -> Result<Grid<i64>> {
    synthesize_sum(a, &block_shape_indices(a, part, t)?, budget)
}

/// #𝔸_t by enumeration.
pub fn count_block(t: usize, part: &BlockPartition, n: u32, d: usize) -> Result<u64> {
    let (lo, hi) = part.block(t)?;
    Ok(enumerate_shapes(n, d)?
        .iter()
        .filter(|r| r.first() >= lo && r.first() <= hi)
        .count() as u64)
}

/// G_v = Σ_{r: r_1 = v} f_r.
pub fn build_first_coord_sum(v: u32, a: &SignAssignment, budget: u64) -> Result<Grid<i64>> {
    let idxs: Vec<usize> = (0..a.shapes().len())
        .filter(|&si| a.shapes()[si].first() == v)
        .collect();
    synthesize_sum(a, &idxs, budget)
}

/// Φ_t over ordered pairs, by the identity Φ_t = Σ_{v ∈ I_t} (G_v² − c_v)
/// with c_v = #{r : r_1 = v}. Fast path.
pub fn build_coincidence_sum(
    t: usize,
    part: &BlockPartition,
    a: &SignAssignment,
    budget: u64,
) -> Result<Grid<i64>> {
    let (lo, hi) = part.block(t)?;
    let mut acc = Grid::zeros(a.d(), canonical_m(a.n()), budget)?;
    for v in lo..=hi {
        let c_v = a.shapes().iter().filter(|r| r.first() == v).count() as i64;
        if c_v == 0 {
            continue;
        }
        let g_v = build_first_coord_sum(v, a, budget)?;
        acc.add_assign_grid(&g_v.square())?;
        acc.add_scalar(-c_v);
    }
    Ok(acc)
}

/// Φ_t as the literal sum over ordered pairs r ≠ s with r_1 = s_1; the
/// reference path the fast path is tested against.
pub fn build_coincidence_sum_pairs(
    t: usize,
    part: &BlockPartition,
    a: &SignAssignment,
    budget: u64,
) -> Result<Grid<i64>> {
    let (lo, hi) = part.block(t)?;
    let mut acc = Grid::zeros(a.d(), canonical_m(a.n()), budget)?;
    for v in lo..=hi {
        let idxs: Vec<usize> = (0..a.shapes().len())
            .filter(|&si| a.shapes()[si].first() == v)
            .collect();
        let grids: Vec<Grid<i64>> = idxs
            .iter()
            .map(|&si| build_rfunction(&a.shapes()[si].clone(), a, budget))
            .collect::<Result<_>>()?;
        for i in 0..grids.len() {
            for j in 0..grids.len() {
                if i != j {
                    acc.add_assign_grid(&grids[i].mul(&grids[j])?)?;
                }
            }
        }
    }
    Ok(acc)
}

/// Number of ordered coincident pairs in block t: Σ_{v∈I_t} c_v (c_v − 1).
pub fn coincidence_pair_count(t: usize, part: &BlockPartition, n: u32, d: usize) -> Result<u64> {
    let (lo, hi) = part.block(t)?;
    let shapes = enumerate_shapes(n, d)?;
    let mut total = 0u64;
    for v in lo..=hi {
        let c = shapes.iter().filter(|r| r.first() == v).count() as u64;
        total += c * c.saturating_sub(1);
    }
    Ok(total)
}
