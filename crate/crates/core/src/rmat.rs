//! Recursive-matrix (R-MAT) synthetic sparse matrices.
//!
//! Each edge descends `scale` levels of a 2×2 quadrant recursion, picking
//! quadrant a/b/c/d (top-left, top-right, bottom-left, bottom-right) with the
//! configured probabilities. Duplicate edges collapse to a single entry of
//! value 1. The random stream is ChaCha8 seeded from the 64-bit seed, so a
//! given seed produces the same matrix on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::scalar::Scalar;

/// Quadrant probabilities `(a, b, c, d)`.
pub type Skew = (f64, f64, f64, f64);

pub const UNIFORM_SKEW: Skew = (0.25, 0.25, 0.25, 0.25);
pub const MILD_SKEW: Skew = (0.45, 0.22, 0.22, 0.11);
pub const GRAPH500_SKEW: Skew = (0.57, 0.19, 0.19, 0.05);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    pub scale: u32,
    pub edge_factor: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
}

impl RmatParams {
    pub fn new(scale: u32, edge_factor: usize, skew: Skew, seed: u64) -> Self {
        let (a, b, c, d) = skew;
        Self {
            scale,
            edge_factor,
            a,
            b,
            c,
            d,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.scale
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRmatParams(m));
        if self.scale < 1 || self.scale > 30 {
            return bad(format!("scale {} outside [1, 30]", self.scale));
        }
        let probs = [self.a, self.b, self.c, self.d];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad(format!("probabilities {probs:?} must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("probabilities sum to {sum}, not 1"));
        }
        Ok(())
    }

    /// Short identifier, e.g. `rmat-s10-e16-57.19.19.05-s42`.
    pub fn name(&self) -> String {
        let pct = |p: f64| (p * 100.0).round() as u32;
        format!(
            "rmat-s{}-e{}-{:02}.{:02}.{:02}.{:02}-s{}",
            self.scale,
            self.edge_factor,
            pct(self.a),
            pct(self.b),
            pct(self.c),
            pct(self.d),
            self.seed
        )
    }
}

pub fn generate_rmat<T: Scalar>(p: &RmatParams) -> Result<CsrMatrix<T>> {
    p.validate()?;
    let dim = p.dim();
    let edges = p.edge_factor * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (ab, abc) = (p.a + p.b, p.a + p.b + p.c);

    let mut coords: Vec<(usize, usize)> = Vec::with_capacity(edges);
    for _ in 0..edges {
        let (mut row, mut col) = (0usize, 0usize);
        for _ in 0..p.scale {
            let r: f64 = rng.gen();
            let (dr, dc) = if r < p.a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            row = (row << 1) | dr;
            col = (col << 1) | dc;
        }
        coords.push((row, col));
    }
    coords.sort_unstable();
    coords.dedup();

    let mut row_ptr = vec![0usize; dim + 1];
    for &(r, _) in &coords {
        row_ptr[r + 1] += 1;
    }
    for i in 0..dim {
        row_ptr[i + 1] += row_ptr[i];
    }
    let col_idx: Vec<usize> = coords.iter().map(|&(_, c)| c).collect();
    let values = vec![T::one(); col_idx.len()];
    CsrMatrix::new(dim, dim, row_ptr, col_idx, values)
}

/// SplitMix64 finalizer; derives per-matrix seeds from a base seed.
fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One matrix per element of `scales × edge_factors × skews`, in that
/// nesting order (scales outermost).
pub fn corpus_grid<T: Scalar>(
    scales: &[u32],
    edge_factors: &[usize],
    skews: &[Skew],
    seed: u64,
) -> Result<Vec<(RmatParams, CsrMatrix<T>)>> {
    if scales.is_empty() || edge_factors.is_empty() || skews.is_empty() {
        return Err(Error::InvalidRmatParams("grid axes must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(scales.len() * edge_factors.len() * skews.len());
    for &scale in scales {
        for &edge_factor in edge_factors {
            for &skew in skews {
                let index = out.len() as u64;
                let p = RmatParams::new(scale, edge_factor, skew, mix_seed(seed, index));
                let m = generate_rmat(&p)?;
                out.push((p, m));
            }
        }
    }
    Ok(out)
}

/// The 27-matrix desk-scale grid: scales {8, 10, 12}, edge factors
/// {4, 8, 16}, and uniform / mild / Graph500 skews.
pub fn default_corpus<T: Scalar>(seed: u64) -> Result<Vec<(RmatParams, CsrMatrix<T>)>> {
    corpus_grid(
        &[8, 10, 12],
        &[4, 8, 16],
        &[UNIFORM_SKEW, MILD_SKEW, GRAPH500_SKEW],
        seed,
    )
}
