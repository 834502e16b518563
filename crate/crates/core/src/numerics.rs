//! Small dense kernels shared by every other module: central-difference
//! differentials, damped Gauss-Newton, rank-revealing subspace algebra and
//! seeded sampling.
//!
//! Everything here is pure. Random generators are owned by the caller.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values below `RANK_CUTOFF * max(1, sigma_max)` count as zero.
pub const RANK_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub fd_step: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub residual_pass: f64,
    pub seed: u64,
    /// One level of Richardson extrapolation on top of the central stencil.
    pub richardson: bool,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            residual_pass: 1e-6,
            seed: 0,
            richardson: false,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0) {
            return Err(Error::ParseError("fd_step must be positive".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::ParseError("newton_tol must be positive".into()));
        }
        if self.newton_max_iter < 1 {
            return Err(Error::ParseError(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }
}

fn central(
    map: &dyn Fn(&DVector<f64>) -> Result<DVector<f64>>,
    x: &DVector<f64>,
    h: f64,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fp = map(&xp).map_err(|e| Error::StencilOutOfDomain(e.to_string()))?;
        let fm = map(&xm).map_err(|e| Error::StencilOutOfDomain(e.to_string()))?;
        if fp.len() != fm.len() {
            return Err(Error::DimError {
                expected: fp.len(),
                got: fm.len(),
            });
        }
        cols.push((fp - fm) / (2.0 * h));
    }
    if n == 0 {
        let m = map(x)?.len();
        return Ok(DMatrix::zeros(m, 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Central-difference Jacobian of `map` at `x`; entry (i, j) is
/// `(map_i(x + h e_j) - map_i(x - h e_j)) / 2h`.
pub fn differential<F>(map: F, x: &DVector<f64>, cfg: &ToleranceConfig) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let h = cfg.fd_step;
    let d1 = central(&map, x, h)?;
    if cfg.richardson {
        let d2 = central(&map, x, 0.5 * h)?;
        Ok((d2 * 4.0 - d1) / 3.0)
    } else {
        Ok(d1)
    }
}

/// Derivative of a curve `t -> map(t)` at `t = 0`.
pub fn curve_derivative<F>(map: F, cfg: &ToleranceConfig) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let jac = differential(|t: &DVector<f64>| map(t[0]), &DVector::zeros(1), cfg)?;
    Ok(jac.column(0).into_owned())
}

/// Gradient of a scalar function.
pub fn gradient<F>(f: F, x: &DVector<f64>, cfg: &ToleranceConfig) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let jac = differential(
        |z: &DVector<f64>| Ok(DVector::from_element(1, f(z)?)),
        x,
        cfg,
    )?;
    Ok(jac.row(0).transpose())
}

fn cutoff(sv: &DVector<f64>) -> f64 {
    RANK_CUTOFF * sv.iter().cloned().fold(1.0_f64, f64::max)
}

/// Numerical rank under the shared cutoff, plus a flag raised when some
/// singular value sits within a factor of ten of the cutoff.
pub fn rank_report(m: &DMatrix<f64>) -> (usize, bool) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, false);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let c = cutoff(&sv);
    let rank = sv.iter().filter(|&&s| s > c).count();
    let unstable = sv
        .iter()
        .any(|&s| s > c && s < 10.0 * c || s <= c && s > 0.1 * c);
    (rank, unstable)
}

/// Minimum-norm least-squares solution of `a x = b` through the truncated
/// pseudoinverse, together with the numerical rank of `a`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    let svd = a.clone().svd(true, true);
    let c = cutoff(&svd.singular_values);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let mut x = DVector::zeros(a.ncols());
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > c {
            rank += 1;
            let coeff = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coeff;
        }
    }
    (x, rank)
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

const MAX_HALVINGS: usize = 30;
const POLISH_STEPS: usize = 3;

/// Damped Gauss-Newton with pseudoinverse steps for `residual: R^n -> R^m`,
/// `m <= n`. Returns `x` with `max|residual(x)| < newton_tol`.
///
/// Once the tolerance is met a few extra steps are taken while they keep
/// reducing the residual, so that the returned point is converged to
/// working precision and depends smoothly on the starting guess.
pub fn newton_solve<F>(
    residual: F,
    guess: &DVector<f64>,
    cfg: &ToleranceConfig,
) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = guess.clone();
    let mut r = residual(&x)?;
    let mut norm = max_abs(&r);
    let mut polish = 0;
    for _ in 0..cfg.newton_max_iter {
        if norm < cfg.newton_tol {
            if polish >= POLISH_STEPS || norm <= f64::EPSILON {
                break;
            }
            polish += 1;
        }
        let jac = differential(&residual, &x, cfg)?;
        let (step, rank) = pinv_solve(&jac, &r);
        if rank < jac.nrows() {
            if norm < cfg.newton_tol {
                break;
            }
            return Err(Error::SingularJacobian {
                rank,
                rows: jac.nrows(),
            });
        }
        let mut t = 1.0;
        let mut accepted = false;
        // a polish step at the roundoff floor gets one try, no line search
        let tries = if norm < cfg.newton_tol {
            1
        } else {
            MAX_HALVINGS
        };
        for _ in 0..tries {
            let cand = &x - &step * t;
            if let Ok(rc) = residual(&cand) {
                let nc = max_abs(&rc);
                if nc < norm {
                    x = cand;
                    r = rc;
                    norm = nc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm < cfg.newton_tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: cfg.newton_max_iter,
            residual: norm,
        })
    }
}

/// Gauss-Newton on a possibly rank-deficient least-squares problem.
/// Never fails on rank; returns the best point found and its residual
/// (max norm). Used for orbit-membership searches, where the residual
/// itself is the verdict.
pub fn least_squares<F>(
    residual: F,
    guess: &DVector<f64>,
    cfg: &ToleranceConfig,
) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = guess.clone();
    let mut r = match residual(&x) {
        Ok(r) => r,
        Err(_) => return (x, f64::INFINITY),
    };
    let mut norm = r.norm();
    for _ in 0..cfg.newton_max_iter {
        if max_abs(&r) < cfg.newton_tol * 1e-2 {
            break;
        }
        let jac = match differential(&residual, &x, cfg) {
            Ok(j) => j,
            Err(_) => break,
        };
        let (step, _) = pinv_solve(&jac, &r);
        let mut t = 1.0;
        let mut accepted = false;
        // a polish step at the roundoff floor gets one try, no line search
        let tries = if norm < cfg.newton_tol {
            1
        } else {
            MAX_HALVINGS
        };
        for _ in 0..tries {
            let cand = &x - &step * t;
            if let Ok(rc) = residual(&cand) {
                let nc = rc.norm();
                if nc < norm {
                    x = cand;
                    r = rc;
                    norm = nc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let m = max_abs(&r);
    (x, m)
}

/// Orthonormal basis of the span of `vectors` (left singular vectors above
/// the cutoff).
pub fn orthonormal_basis(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let c = cutoff(&svd.singular_values);
    let u = svd.u.expect("svd u");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > c)
        .map(|(k, _)| u.column(k).into_owned())
        .collect()
}

/// Orthonormal basis of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    // pad to at least n rows so the SVD returns a full V
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let c = cutoff(&svd.singular_values);
    let vt = svd.v_t.expect("svd v_t");
    (0..n)
        .filter(|&k| svd.singular_values[k] <= c)
        .map(|k| vt.row(k).transpose())
        .collect()
}

/// Orthonormal basis of `span(a) ∩ span(b)`.
pub fn subspace_intersection(a: &[DVector<f64>], b: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    if qa.is_empty() || qb.is_empty() {
        return Vec::new();
    }
    let ma = DMatrix::from_columns(&qa);
    let mb = DMatrix::from_columns(&qb);
    let mut stacked = DMatrix::zeros(ma.nrows(), ma.ncols() + mb.ncols());
    stacked
        .view_mut((0, 0), (ma.nrows(), ma.ncols()))
        .copy_from(&ma);
    stacked
        .view_mut((0, ma.ncols()), (mb.nrows(), mb.ncols()))
        .copy_from(&(-&mb));
    let kernel = null_space(&stacked);
    let vecs: Vec<DVector<f64>> = kernel.iter().map(|k| &ma * k.rows(0, ma.ncols())).collect();
    orthonormal_basis(&vecs)
}

/// Largest distance from a vector of `from` to `span(to)`, with `to`
/// orthonormal.
pub fn span_defect(from: &[DVector<f64>], to: &[DVector<f64>]) -> f64 {
    from.iter()
        .map(|v| {
            let mut r = v.clone();
            for q in to {
                r -= q * q.dot(v);
            }
            r.norm()
        })
        .fold(0.0, f64::max)
}

/// Seeded sampler; identical seeds give bit-identical streams.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a named check, so adding a check never shifts
    /// the samples of another.
    pub fn for_stream(seed: u64, stream: &str) -> Self {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in stream.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        Self::new(seed ^ h)
    }

    pub fn uniform_box(&mut self, n: usize, half_width: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.rng.gen_range(-half_width..=half_width))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}
