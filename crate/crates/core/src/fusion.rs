//! Feature-level fusion by regularized canonical correlation analysis.
//!
//! Each descriptor set is centred and, when it has more dimensions than
//! `n − 1` samples can span, reduced onto an orthonormal principal basis.
//! The within-set covariances are ridge-regularized by
//! `ε · trace(S) / dim`, and the projections solve
//!
//! ```text
//! Sxx⁻¹ Sxy Syy⁻¹ Syx wx = λ² wx,     wy = Syy⁻¹ Syx wx / λ
//! ```
//!
//! through the symmetric form `Lx⁻¹ Sxy Syy⁻¹ Syx Lx⁻ᵀ` with `Sxx = Lx Lxᵀ`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MAX_K: usize = 256;
pub const DEFAULT_VARIANCE_RETAINED: f64 = 0.99;
/// Canonical correlations at or below this are dropped.
pub const MIN_CORRELATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    #[default]
    Concat,
    Sum,
}

impl FusionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionMode::Concat => "concat",
            FusionMode::Sum => "sum",
        }
    }
}

/// Paired training descriptors stored column-wise.
#[derive(Debug, Clone)]
pub struct DescriptorPairSet {
    pub x: Matrix,
    pub y: Matrix,
    pub ids: Vec<String>,
}

impl DescriptorPairSet {
    pub fn new(xs: &[&[f64]], ys: &[&[f64]], ids: Vec<String>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.iter().chain(ys).flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("training descriptors must be finite"));
        }
        Ok(Self {
            x: Matrix::from_columns(xs)?,
            y: Matrix::from_columns(ys)?,
            ids,
        })
    }

    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcaOptions {
    pub epsilon: f64,
    pub max_k: usize,
    /// Fraction of variance kept by the principal pre-reduction.
    pub variance_retained: f64,
    pub fusion_mode: FusionMode,
}

impl Default for CcaOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_k: DEFAULT_MAX_K,
            variance_retained: DEFAULT_VARIANCE_RETAINED,
            fusion_mode: FusionMode::Concat,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcaModel {
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    /// `p × p'` orthonormal basis, when the set was reduced.
    pub pca_x: Option<Matrix>,
    pub pca_y: Option<Matrix>,
    /// `p' × k`.
    pub wx: Matrix,
    /// `q' × k`.
    pub wy: Matrix,
    pub lambdas: Vec<f64>,
    pub epsilon: f64,
    pub fusion_mode: FusionMode,
}

/// Centres the columns of `m` in place and returns the column mean.
fn centre_columns(m: &mut Matrix) -> Vec<f64> {
    let (p, n) = (m.rows(), m.cols());
    let mut mean = alloc::vec![0.0; p];
    for (r, mu) in mean.iter_mut().enumerate() {
        *mu = m.row(r).iter().sum::<f64>() / n as f64;
        for c in 0..n {
            m[(r, c)] -= *mu;
        }
    }
    mean
}

/// Principal reduction of centred data with more rows than `n − 1`.
/// Returns the `p × p'` basis and the reduced `p' × n` data.
fn reduce(xc: &Matrix, keep_fraction: f64) -> Result<(Matrix, Matrix)> {
    let n = xc.cols();
    let gram = xc.transpose().matmul(xc)?;
    let eig = linalg::symmetric_eigen(&gram)?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    let total: f64 = eig.values.iter().filter(|&&v| v > 0.0).sum();
    if !(top > 0.0) {
        return Err(Error::NumericalFailure("training descriptors have no variance"));
    }
    let mut keep = 0;
    let mut acc = 0.0;
    for &v in eig.values.iter().take(n - 1) {
        if v <= top * 1e-12 {
            break;
        }
        keep += 1;
        acc += v;
        if acc >= keep_fraction * total {
            break;
        }
    }
    let p = xc.rows();
    let mut basis = Matrix::zeros(p, keep);
    let mut reduced = Matrix::zeros(keep, n);
    for k in 0..keep {
        let sv = math::sqrt(eig.values[k]);
        let v = eig.vectors.column(k);
        for (j, &vj) in v.iter().enumerate() {
            reduced[(k, j)] = sv * vj;
        }
        for r in 0..p {
            let dot: f64 = xc.row(r).iter().zip(&v).map(|(a, b)| a * b).sum();
            basis[(r, k)] = dot / sv;
        }
    }
    Ok((basis, reduced))
}

fn regularized_covariance(z: &Matrix, epsilon: f64) -> Result<Matrix> {
    let n = z.cols() as f64;
    let mut s = z.matmul(&z.transpose())?;
    s.scale(1.0 / (n - 1.0));
    let dim = s.rows();
    let ridge = epsilon * s.trace() / dim as f64;
    for i in 0..dim {
        s[(i, i)] += ridge;
    }
    Ok(s)
}

pub fn fit_cca(pairs: &DescriptorPairSet, opts: &CcaOptions) -> Result<CcaModel> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            found: n,
        });
    }
    if pairs.y.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pairs.y.cols(),
        });
    }
    if !(opts.epsilon >= 0.0) {
        return Err(Error::config("cca.epsilon", "must be >= 0"));
    }
    if opts.max_k == 0 {
        return Err(Error::config("cca.max_k", "must be >= 1"));
    }
    if !(opts.variance_retained > 0.0 && opts.variance_retained <= 1.0) {
        return Err(Error::config("cca.variance_retained", "must lie in (0, 1]"));
    }

    let mut xc = pairs.x.clone();
    let mut yc = pairs.y.clone();
    let mean_x = centre_columns(&mut xc);
    let mean_y = centre_columns(&mut yc);
    let (pca_x, xr) = if xc.rows() > n - 1 {
        let (b, r) = reduce(&xc, opts.variance_retained)?;
        (Some(b), r)
    } else {
        (None, xc)
    };
    let (pca_y, yr) = if yc.rows() > n - 1 {
        let (b, r) = reduce(&yc, opts.variance_retained)?;
        (Some(b), r)
    } else {
        (None, yc)
    };

    let sxx = regularized_covariance(&xr, opts.epsilon)?;
    let syy = regularized_covariance(&yr, opts.epsilon)?;
    let mut sxy = xr.matmul(&yr.transpose())?;
    sxy.scale(1.0 / (n as f64 - 1.0));
    let syx = sxy.transpose();

    let lx = linalg::cholesky(&sxx)?;
    let ly = linalg::cholesky(&syy)?;
    // C = Lx⁻¹ Sxy Ly⁻ᵀ, so Lx⁻¹ Sxy Syy⁻¹ Syx Lx⁻ᵀ = C Cᵀ.
    let c = linalg::solve_lower(&ly, &linalg::solve_lower(&lx, &sxy).transpose()).transpose();
    let m = c.matmul(&c.transpose())?;
    let eig = linalg::symmetric_eigen(&m)?;

    let lambdas_all: Vec<f64> = eig.values.iter().map(|&v| math::sqrt(v.max(0.0))).collect();
    let k = lambdas_all
        .iter()
        .take_while(|&&l| l > MIN_CORRELATION)
        .count()
        .min(opts.max_k)
        .min(xr.rows())
        .min(yr.rows());
    if k == 0 {
        return Err(Error::NumericalFailure("no canonical correlation above threshold"));
    }
    let lambdas = lambdas_all[..k].to_vec();
    let mut wx = linalg::solve_lower_transposed(&lx, &eig.vectors.take_columns(k));
    // wy = Syy⁻¹ Syx wx / λ
    let mut wy = linalg::solve_lower_transposed(&ly, &linalg::solve_lower(&ly, &syx.matmul(&wx)?));
    for (j, &l) in lambdas.iter().enumerate() {
        let col = wx.column(j);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if math::abs(v) > math::abs(best) { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..wx.rows() {
            wx[(r, j)] *= sign;
        }
        for r in 0..wy.rows() {
            wy[(r, j)] *= sign / l;
        }
    }
    Ok(CcaModel {
        mean_x,
        mean_y,
        pca_x,
        pca_y,
        wx,
        wy,
        lambdas,
        epsilon: opts.epsilon,
        fusion_mode: opts.fusion_mode,
    })
}

fn project_one(v: &[f64], mean: &[f64], pca: Option<&Matrix>, w: &Matrix) -> Result<Vec<f64>> {
    if v.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: v.len(),
        });
    }
    let centred: Vec<f64> = v.iter().zip(mean).map(|(a, m)| a - m).collect();
    let reduced = match pca {
        Some(b) => b.tr_mul_vec(&centred)?,
        None => centred,
    };
    w.tr_mul_vec(&reduced)
}

impl CcaModel {
    pub fn p(&self) -> usize {
        self.mean_x.len()
    }

    pub fn q(&self) -> usize {
        self.mean_y.len()
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// Length of a fused vector under the model's fusion mode.
    pub fn fused_len(&self) -> usize {
        match self.fusion_mode {
            FusionMode::Concat => 2 * self.k(),
            FusionMode::Sum => self.k(),
        }
    }

    /// Canonical variates `Wxᵀ · reduce(x − mean_x)`.
    pub fn project_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        project_one(x, &self.mean_x, self.pca_x.as_ref(), &self.wx)
    }

    pub fn project_y(&self, y: &[f64]) -> Result<Vec<f64>> {
        project_one(y, &self.mean_y, self.pca_y.as_ref(), &self.wy)
    }

    pub fn project_fuse(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut xs = self.project_x(x)?;
        let ys = self.project_y(y)?;
        Ok(match self.fusion_mode {
            FusionMode::Concat => {
                xs.extend(ys);
                xs
            }
            FusionMode::Sum => {
                xs.iter_mut().zip(&ys).for_each(|(a, b)| *a += b);
                xs
            }
        })
    }

    /// Checks internal shape consistency, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        let p_red = self.pca_x.as_ref().map_or(self.p(), |b| b.cols());
        let q_red = self.pca_y.as_ref().map_or(self.q(), |b| b.cols());
        let checks = [
            (self.pca_x.as_ref().map_or(self.p(), |b| b.rows()), self.p()),
            (self.pca_y.as_ref().map_or(self.q(), |b| b.rows()), self.q()),
            (self.wx.rows(), p_red),
            (self.wy.rows(), q_red),
            (self.wx.cols(), k),
            (self.wy.cols(), k),
        ];
        for (found, expected) in checks {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        if k == 0 {
            return Err(Error::NumericalFailure("model has no components"));
        }
        Ok(())
    }

    /// SHA-256 over the model's declared fields and matrices, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.fusion_mode.as_str().as_bytes());
        for dim in [self.p(), self.q(), self.k()] {
            h.update((dim as u64).to_le_bytes());
        }
        h.update(self.epsilon.to_le_bytes());
        let mut feed = |vals: &[f64]| {
            h.update((vals.len() as u64).to_le_bytes());
            for v in vals {
                h.update(v.to_le_bytes());
            }
        };
        feed(&self.mean_x);
        feed(&self.mean_y);
        feed(self.pca_x.as_ref().map_or(&[][..], |m| m.as_slice()));
        feed(self.pca_y.as_ref().map_or(&[][..], |m| m.as_slice()));
        feed(self.wx.as_slice());
        feed(self.wy.as_slice());
        feed(&self.lambdas);
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
