//! Arrays: the 2×2 counterexample and the randomized-sign SVD reduction.
//!
//! For a generic real matrix the SVD is unique up to flipping the sign of
//! each singular pair. Fixing a convention and then multiplying both `U`
//! and `V` by a uniform random `±1` diagonal matrix gives singular vectors
//! whose joint law only depends on the law of `X`. Row permutations of `X`
//! then act on the rows of `[Ũ | Ṽ]` (joint case) or separately on the two
//! halves of `[Ũ ; Ṽ]` (separate case), which is what
//! [`svd_equivalence_check`] tests statistically.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::rational;
use crate::space::{Alphabet, StateSpace};

/// `P(x12 = 1, x21 = 0) = P(x12 = 0, x21 = 1) = 1/2` with a zero diagonal.
pub fn intro_counterexample() -> FiniteDistribution {
    let space = StateSpace::array(2, 2, Alphabet::binary());
    FiniteDistribution::from_states(
        space,
        [(vec![0, 1, 0, 0], rational::ratio(1, 2)), (vec![0, 0, 1, 0], rational::ratio(1, 2))],
    )
    .expect("valid distribution")
}

/// Law of the listed cells of an array, as a sequence distribution.
pub fn cell_projection(p: &FiniteDistribution, cells: &[usize]) -> Result<FiniteDistribution> {
    let alphabet = match p.space() {
        StateSpace::Array { alphabet, .. } => alphabet.clone(),
        _ => return Err(Error::UnsupportedSpace("cell_projection needs an array space")),
    };
    let count = p.space().cell_count();
    if let Some(&c) = cells.iter().find(|&&c| c >= count) {
        return Err(Error::InvalidArgument(alloc::format!("cell {c} outside an array of {count} cells")));
    }
    let target = StateSpace::sequence(cells.len(), alphabet);
    p.push_forward(target, |x| cells.iter().map(|&c| x[c]).collect())
}

/// Law of `(x[0][1], x[1][0])` for an array with at least two rows and columns.
pub fn off_diagonal_pair(p: &FiniteDistribution) -> Result<FiniteDistribution> {
    match p.space() {
        StateSpace::Array { rows, cols, .. } if *rows >= 2 && *cols >= 2 => cell_projection(p, &[1, *cols]),
        _ => Err(Error::UnsupportedSpace("off_diagonal_pair needs an array of at least 2×2")),
    }
}

/// Minimum relative separation of singular values (from each other and
/// from zero) for the decomposition to count as generic.
pub const SINGULAR_GAP: f64 = 1e-8;

/// Thin SVD `X = U · diag(d) · Vᵗ` with `d` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        &self.u * d * self.v.transpose()
    }

    /// Max-abs entry of `U·D·Vᵗ − X`.
    pub fn reconstruction_error(&self, x: &DMatrix<f64>) -> f64 {
        (self.reconstruct() - x).amax()
    }

    /// Max-abs entry of `UᵗU − I` and `VᵗV − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.singular_values.len();
        let eye = DMatrix::<f64>::identity(r, r);
        let eu = (self.u.transpose() * &self.u - &eye).amax();
        let ev = (self.v.transpose() * &self.v - &eye).amax();
        eu.max(ev)
    }

    /// Multiplies column `j` of both `U` and `V` by `signs[j]`.
    pub fn with_signs(&self, signs: &[f64]) -> Result<SvdTriple> {
        let r = self.singular_values.len();
        if signs.len() != r {
            return Err(Error::DimensionMismatch { expected: r, found: signs.len() });
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidArgument("signs must be ±1".into()));
        }
        let mut out = self.clone();
        for (j, &s) in signs.iter().enumerate() {
            if s < 0.0 {
                out.u.column_mut(j).neg_mut();
                out.v.column_mut(j).neg_mut();
            }
        }
        Ok(out)
    }
}

/// SVD with a fixed sign convention: in each column of `U` the entry of
/// largest magnitude (first one on ties) is positive. Fails unless the
/// singular values are distinct and positive with relative separation
/// [`SINGULAR_GAP`].
pub fn signed_svd(x: &DMatrix<f64>) -> Result<SvdTriple> {
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSingularValues);
    }
    let svd = x.clone().svd(true, true);
    let (Some(mut u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::DegenerateSingularValues);
    };
    let mut v = v_t.transpose();
    let d: Vec<f64> = svd.singular_values.iter().copied().collect();
    let top = d[0];
    if top.is_nan() || top <= 0.0 {
        return Err(Error::DegenerateSingularValues);
    }
    let threshold = SINGULAR_GAP * top;
    if d.windows(2).any(|w| w[0] - w[1] < threshold) || d[d.len() - 1] < threshold {
        return Err(Error::DegenerateSingularValues);
    }
    for j in 0..d.len() {
        let col = u.column(j);
        let mut lead = 0;
        for i in 1..col.len() {
            if libm::fabs(col[i]) > libm::fabs(col[lead]) {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(SvdTriple { u, singular_values: d, v })
}

/// Uniform `±1` vector of length `r`.
pub fn random_signs<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Vec<f64> {
    (0..r).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// [`signed_svd`] followed by a uniformly random sign flip of each
/// singular pair; returns the randomized triple and the signs used.
pub fn svd_randomized_with<R: Rng + ?Sized>(x: &DMatrix<f64>, rng: &mut R) -> Result<(SvdTriple, Vec<f64>)> {
    let base = signed_svd(x)?;
    let signs = random_signs(base.singular_values.len(), rng);
    Ok((base.with_signs(&signs)?, signs))
}

pub fn svd_randomized(x: &DMatrix<f64>, seed: u64) -> Result<(SvdTriple, Vec<f64>)> {
    svd_randomized_with(x, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Generator of random real matrices for the Monte Carlo check.
pub trait MatrixSampler {
    /// `(rows, cols)` of every sample.
    fn shape(&self) -> (usize, usize);
    fn sample(&self, rng: &mut dyn RngCore) -> DMatrix<f64>;
}

/// `X_ij = W(a_i, b_j) + ε_ij` with i.i.d. uniform latents and noise.
///
/// In the joint case the row and column latents coincide (`b = a`), which
/// makes `X` jointly exchangeable; otherwise they are independent and `X`
/// is separately exchangeable. `row0_scale ≠ 1` multiplies the first row
/// and breaks exchangeability.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSampler {
    pub rows: usize,
    pub cols: usize,
    pub joint: bool,
    pub noise: f64,
    pub row0_scale: f64,
}

impl LatentSampler {
    pub fn exchangeable(rows: usize, cols: usize, joint: bool) -> Result<Self> {
        if rows == 0 || cols == 0 || (joint && rows != cols) {
            return Err(Error::InvalidArgument(alloc::format!("bad sampler shape {rows}×{cols} (joint = {joint})")));
        }
        Ok(Self { rows, cols, joint, noise: 0.5, row0_scale: 1.0 })
    }

    pub fn row_scaled(rows: usize, cols: usize, joint: bool, scale: f64) -> Result<Self> {
        Ok(Self { row0_scale: scale, ..Self::exchangeable(rows, cols, joint)? })
    }

    fn link(a: f64, b: f64) -> f64 {
        a * b + libm::fabs(a - b) + libm::sin(3.0 * (a + b))
    }
}

impl MatrixSampler for LatentSampler {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> DMatrix<f64> {
        let a: Vec<f64> = (0..self.rows).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = if self.joint { a.clone() } else { (0..self.cols).map(|_| rng.random::<f64>()).collect() };
        let mut x = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let eps = self.noise * (2.0 * rng.random::<f64>() - 1.0);
                x[(i, j)] = Self::link(a[i], b[j]) + eps;
            }
        }
        for j in 0..self.cols {
            x[(0, j)] *= self.row0_scale;
        }
        x
    }
}

/// Entry-wise summaries compared across row positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Value,
    Abs,
    Square,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Value, Statistic::Abs, Statistic::Square];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Value => "value",
            Statistic::Abs => "abs",
            Statistic::Square => "square",
        }
    }

    fn eval(self, z: f64) -> f64 {
        match self {
            Statistic::Value => z,
            Statistic::Abs => libm::fabs(z),
            Statistic::Square => z * z,
        }
    }
}

/// Raw moments of one entry position of `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMoments {
    pub row: usize,
    pub column: usize,
    pub mean: f64,
    pub mean_abs: f64,
    pub mean_square: f64,
}

/// Paired comparison of one statistic between two exchangeable rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RowComparison {
    pub statistic: Statistic,
    pub column: usize,
    pub row_a: usize,
    pub row_b: usize,
    pub mean_difference: f64,
    pub std_error: f64,
    /// `mean_difference / std_error`; zero when both vanish.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdCheckReport {
    pub joint: bool,
    pub rows: usize,
    pub cols: usize,
    pub draws: usize,
    pub accepted: usize,
    pub degenerate: usize,
    /// Row indices of `Z` forming each exchangeable group.
    pub row_groups: Vec<Vec<usize>>,
    pub moments: Vec<RowMoments>,
    pub comparisons: Vec<RowComparison>,
    pub max_abs_z: f64,
}

/// `Z = [Ũ | Ṽ]` when `joint`, otherwise `Z = [Ũ ; Ṽ]`.
pub fn stacked_singular_vectors(t: &SvdTriple, joint: bool) -> DMatrix<f64> {
    let r = t.singular_values.len();
    if joint {
        let m = t.u.nrows();
        let mut z = DMatrix::zeros(m, 2 * r);
        z.view_mut((0, 0), (m, r)).copy_from(&t.u);
        z.view_mut((0, r), (m, r)).copy_from(&t.v);
        z
    } else {
        let (m, n) = (t.u.nrows(), t.v.nrows());
        let mut z = DMatrix::zeros(m + n, r);
        z.view_mut((0, 0), (m, r)).copy_from(&t.u);
        z.view_mut((m, 0), (n, r)).copy_from(&t.v);
        z
    }
}

/// Per-draw generator: stream `draw` of a ChaCha8 generator keyed by `seed`.
pub fn draw_rng(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

/// Monte Carlo check that rows of `Z` are exchangeable within their groups.
///
/// Each draw samples `X`, takes its randomized SVD and forms `Z`. For every
/// column, statistic and pair of rows in one group the paired difference
/// of the statistic is averaged over accepted draws and standardized by
/// its standard error. Under exchangeability every `z` is approximately
/// standard normal. Degenerate draws are skipped and counted; more than
/// half degenerate is an error.
pub fn svd_equivalence_check(
    sampler: &dyn MatrixSampler,
    joint: bool,
    draws: usize,
    seed: u64,
) -> Result<SvdCheckReport> {
    let (rows, cols) = sampler.shape();
    if joint && rows != cols {
        return Err(Error::InvalidArgument(alloc::format!("joint check needs a square sampler, got {rows}×{cols}")));
    }
    let r = rows.min(cols);
    let (z_rows, z_cols) = if joint { (rows, 2 * r) } else { (rows + cols, r) };
    let row_groups: Vec<Vec<usize>> =
        if joint { vec![(0..rows).collect()] } else { vec![(0..rows).collect(), (rows..rows + cols).collect()] };
    let pairs: Vec<(usize, usize)> = row_groups
        .iter()
        .flat_map(|g| g.iter().enumerate().flat_map(move |(i, &a)| g[i + 1..].iter().map(move |&b| (a, b))))
        .collect();

    // running sums: per entry (value, abs, square); per comparison (Σd, Σd²)
    let mut entry_sums = vec![[0.0f64; 3]; z_rows * z_cols];
    let mut diff_sums = vec![[0.0f64; 2]; pairs.len() * z_cols * 3];
    let mut accepted = 0usize;
    let mut degenerate = 0usize;

    for draw in 0..draws {
        let mut rng = draw_rng(seed, draw as u64);
        let x = sampler.sample(&mut rng);
        let t = match svd_randomized_with(&x, &mut rng) {
            Ok((t, _)) => t,
            Err(Error::DegenerateSingularValues) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        accepted += 1;
        let z = stacked_singular_vectors(&t, joint);
        for i in 0..z_rows {
            for c in 0..z_cols {
                let v = z[(i, c)];
                let s = &mut entry_sums[i * z_cols + c];
                for (k, stat) in Statistic::ALL.iter().enumerate() {
                    s[k] += stat.eval(v);
                }
            }
        }
        for (p, &(a, b)) in pairs.iter().enumerate() {
            for c in 0..z_cols {
                for (k, stat) in Statistic::ALL.iter().enumerate() {
                    let d = stat.eval(z[(a, c)]) - stat.eval(z[(b, c)]);
                    let s = &mut diff_sums[(p * z_cols + c) * 3 + k];
                    s[0] += d;
                    s[1] += d * d;
                }
            }
        }
    }

    if draws > 0 && 2 * degenerate > draws {
        return Err(Error::SamplerUnsuitable { degenerate, total: draws });
    }

    let mut moments = Vec::new();
    let mut comparisons = Vec::new();
    let mut max_abs_z = 0.0f64;
    if accepted > 0 {
        let n = accepted as f64;
        for i in 0..z_rows {
            for c in 0..z_cols {
                let s = entry_sums[i * z_cols + c];
                moments.push(RowMoments { row: i, column: c, mean: s[0] / n, mean_abs: s[1] / n, mean_square: s[2] / n });
            }
        }
        for (p, &(a, b)) in pairs.iter().enumerate() {
            for c in 0..z_cols {
                for (k, stat) in Statistic::ALL.iter().enumerate() {
                    let [sum, sum_sq] = diff_sums[(p * z_cols + c) * 3 + k];
                    let mean = sum / n;
                    let var = if accepted > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                    let se = libm::sqrt(var / n);
                    let z = if se > 0.0 {
                        mean / se
                    } else if libm::fabs(mean) <= f64::EPSILON {
                        0.0
                    } else {
                        f64::INFINITY.copysign(mean)
                    };
                    max_abs_z = max_abs_z.max(libm::fabs(z));
                    comparisons.push(RowComparison {
                        statistic: *stat,
                        column: c,
                        row_a: a,
                        row_b: b,
                        mean_difference: mean,
                        std_error: se,
                        z,
                    });
                }
            }
        }
    }
    Ok(SvdCheckReport { joint, rows, cols, draws, accepted, degenerate, row_groups, moments, comparisons, max_abs_z })
}

impl SvdCheckReport {
    pub fn summary(&self) -> String {
        alloc::format!(
            "{} draws ({} degenerate), {} comparisons, max |z| = {:.3}",
            self.draws,
            self.degenerate,
            self.comparisons.len(),
            self.max_abs_z
        )
    }
}
