//! Lie algebras given by structure constants, and matrix Lie groups with
//! left-translated exponential charts.
//!
//! Chart convention used everywhere in the crate: the chart at a base point
//! `p` is `z -> p * exp(sum_i z_i B_i)`, so tangent vectors at `p` are
//! written in left-trivialized algebra coordinates.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Projection residual above which a matrix is rejected as not lying in the
/// embedded algebra.
pub const ALGEBRA_TOL: f64 = 1e-8;
/// Membership residual accepted for group points.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    dim: usize,
    labels: Vec<String>,
    /// `c[(i * n + j) * n + k]` is `c^k_{ij}`.
    c: Vec<f64>,
}

impl LieAlgebraData {
    /// Builds the table from sparse `(i, j, k, value)` entries. Entries are
    /// taken literally; antisymmetry is not filled in automatically.
    pub fn from_entries(
        labels: Vec<String>,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let n = labels.len();
        let mut c = vec![0.0; n * n * n];
        for &(i, j, k, v) in entries {
            if i >= n || j >= n || k >= n {
                return Err(Error::ParseError(format!(
                    "structure constant index ({i},{j},{k}) out of range for dimension {n}"
                )));
            }
            c[(i * n + j) * n + k] = v;
        }
        Ok(Self { dim: n, labels, c })
    }

    pub fn abelian(n: usize) -> Self {
        Self {
            dim: n,
            labels: (0..n).map(|i| format!("x{}", i + 1)).collect(),
            c: vec![0.0; n * n * n],
        }
    }

    /// Structure constants read off the commutators of embedded basis
    /// matrices.
    pub fn from_matrices(labels: Vec<String>, basis: &[DMatrix<f64>]) -> Result<Self> {
        let n = basis.len();
        let proj = BasisProjector::new(basis);
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let coords = proj.project(&comm)?;
                for k in 0..n {
                    // projection roundoff is not a structure constant
                    c[(i * n + j) * n + k] = if coords[k].abs() < 1e-13 {
                        0.0
                    } else {
                        coords[k]
                    };
                }
            }
        }
        Ok(Self { dim: n, labels, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimError {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `[X, Y]^k = sum c^k_{ij} X_i Y_j`.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.c(i, j, k) * x[i] * y[j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad_X`; column `j` holds `[X, e_j]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        m
    }

    /// Worst `|c^k_{ij} + c^k_{ji}|` and the index where it occurs.
    pub fn antisymmetry_residual(&self) -> (f64, (usize, usize, usize)) {
        let n = self.dim;
        let mut worst = (0.0, (0, 0, 0));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = (self.c(i, j, k) + self.c(j, i, k)).abs();
                    if r > worst.0 {
                        worst = (r, (i, j, k));
                    }
                }
            }
        }
        worst
    }

    /// Worst Jacobi residual over all index tuples `(i, j, k, l)`.
    pub fn jacobi_residual(&self) -> (f64, (usize, usize, usize, usize)) {
        let n = self.dim;
        let mut worst = (0.0, (0, 0, 0, 0));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, l)
                                + self.c(j, k, m) * self.c(m, i, l)
                                + self.c(k, i, m) * self.c(m, j, l);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), (i, j, k, l));
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let (r, (i, j, k)) = self.antisymmetry_residual();
        if r > 0.0 {
            return Err(Error::InvariantFailure {
                invariant: format!("{name}: antisymmetry"),
                index: format!("({i},{j},{k})"),
                residual: r,
            });
        }
        let (r, (i, j, k, l)) = self.jacobi_residual();
        if r > 1e-12 {
            return Err(Error::InvariantFailure {
                invariant: format!("{name}: jacobi"),
                index: format!("({i},{j},{k},{l})"),
                residual: r,
            });
        }
        Ok(())
    }

    /// Inverse of the right Jacobian of `exp` at `z`: maps a
    /// left-trivialized velocity at `exp(z)` to chart velocity.
    pub fn right_jacobian_inv(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let a = -self.ad(z);
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..40 {
            term = &term * &a / (k as f64 + 1.0);
            sum += &term;
            if term.amax() < 1e-18 {
                break;
            }
        }
        sum.try_inverse().unwrap_or_else(|| DMatrix::identity(n, n))
    }
}

/// Least-squares projection of matrices onto the span of a basis.
#[derive(Debug, Clone)]
pub struct BasisProjector {
    pinv: DMatrix<f64>,
    basis_cols: DMatrix<f64>,
}

impl BasisProjector {
    pub fn new(basis: &[DMatrix<f64>]) -> Self {
        let cols: Vec<DVector<f64>> = basis
            .iter()
            .map(|b| DVector::from_column_slice(b.as_slice()))
            .collect();
        let basis_cols = if cols.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        let pinv = basis_cols
            .clone()
            .pseudo_inverse(1e-13)
            .expect("pseudo-inverse of basis");
        Self { pinv, basis_cols }
    }

    pub fn project(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        let v = DVector::from_column_slice(m.as_slice());
        let c = &self.pinv * &v;
        let back = &self.basis_cols * &c;
        let res = (back - &v).amax() / v.amax().max(1.0);
        if res > ALGEBRA_TOL {
            return Err(Error::NotInAlgebra(res));
        }
        Ok(c)
    }

    pub fn residual(&self, m: &DMatrix<f64>) -> f64 {
        let v = DVector::from_column_slice(m.as_slice());
        let back = &self.basis_cols * (&self.pinv * &v);
        (back - &v).amax() / v.amax().max(1.0)
    }
}

/// Group element as a real matrix in the common embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint(pub DMatrix<f64>);

impl GroupPoint {
    pub fn identity(m: usize) -> Self {
        GroupPoint(DMatrix::identity(m, m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint(&self.0 * &other.0)
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint(
            self.0
                .clone()
                .try_inverse()
                .expect("group elements are invertible"),
        )
    }

    pub fn distance(&self, other: &GroupPoint) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

/// Named polynomial membership constraints. Complex groups are realized as
/// real matrices of doubled size, each complex entry `a + ib` becoming the
/// block `[[a, -b], [b, a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    ComplexStructure,
    ComplexDetOne,
    Orthogonal,
    UpperTriangularComplex,
    PositiveRealDiagonal,
    DiagonalComplex,
    /// Principal logarithm lies in the span of the embedded algebra.
    LogSpan,
}

/// Complex matrix of half size from its real realization.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    let k = m.nrows() / 2;
    DMatrix::from_fn(k, k, |i, j| {
        Complex::new(m[(2 * i, 2 * j)], m[(2 * i + 1, 2 * j)])
    })
}

/// Real realization of a complex matrix.
pub fn from_complex(c: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let k = c.nrows();
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = c[(i, j)];
            m[(2 * i, 2 * j)] = z.re;
            m[(2 * i, 2 * j + 1)] = -z.im;
            m[(2 * i + 1, 2 * j)] = z.im;
            m[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    m
}

fn complex_structure_residual(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows() / 2;
    let mut r: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let a = m[(2 * i, 2 * j)];
            let b = m[(2 * i + 1, 2 * j)];
            r = r.max((m[(2 * i + 1, 2 * j + 1)] - a).abs());
            r = r.max((m[(2 * i, 2 * j + 1)] + b).abs());
        }
    }
    r
}

impl Membership {
    pub fn residual(&self, m: &DMatrix<f64>, group: &MatrixGroup) -> f64 {
        match self {
            Membership::ComplexStructure => complex_structure_residual(m),
            Membership::ComplexDetOne => {
                let det = to_complex(m).determinant();
                ((det.re - 1.0).powi(2) + det.im.powi(2)).sqrt()
            }
            Membership::Orthogonal => {
                let n = m.nrows();
                (m.transpose() * m - DMatrix::identity(n, n)).amax()
            }
            Membership::UpperTriangularComplex => {
                let c = to_complex(m);
                let mut r: f64 = 0.0;
                for i in 0..c.nrows() {
                    for j in 0..i {
                        r = r.max(c[(i, j)].norm());
                    }
                }
                r
            }
            Membership::PositiveRealDiagonal => {
                let c = to_complex(m);
                let mut r: f64 = 0.0;
                for i in 0..c.nrows() {
                    r = r.max(c[(i, i)].im.abs());
                    if c[(i, i)].re <= 0.0 {
                        r = r.max(1.0);
                    }
                }
                r
            }
            Membership::DiagonalComplex => {
                let c = to_complex(m);
                let mut r: f64 = 0.0;
                for i in 0..c.nrows() {
                    for j in 0..c.ncols() {
                        if i != j {
                            r = r.max(c[(i, j)].norm());
                        }
                    }
                }
                r
            }
            Membership::LogSpan => match matrix_log(m) {
                Ok(l) => group.projector.residual(&l),
                Err(_) => f64::INFINITY,
            },
        }
    }
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor
/// polynomial on the scaled matrix.
pub fn matrix_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    if norm1 > 0.5 {
        s = (norm1 / 0.5).log2().ceil() as i32;
    }
    let scaled = a / 2f64.powi(s);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn denman_beavers_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or_else(|| {
            Error::LogDomainError("square-root iteration hit a singular matrix".into())
        })?;
        let zi = z.clone().try_inverse().ok_or_else(|| {
            Error::LogDomainError("square-root iteration hit a singular matrix".into())
        })?;
        let y_next = (&y + &zi) * 0.5;
        let z_next = (&z + &yi) * 0.5;
        let delta = (&y_next - &y).amax();
        y = y_next;
        z = z_next;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::LogDomainError(
                "square-root iteration diverged".into(),
            ));
        }
        if delta <= 1e-15 * y.amax().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::LogDomainError(
        "square-root iteration did not converge".into(),
    ))
}

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// Denman-Beavers square roots until `|A - I| < 0.25`, then the Mercator
/// series.
pub fn matrix_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = a.clone();
    let mut k = 0;
    while (&m - &id).norm() > 0.25 {
        m = denman_beavers_sqrt(&m)?;
        k += 1;
        if k > 60 {
            return Err(Error::LogDomainError("too many square roots".into()));
        }
    }
    let x = &m - &id;
    let mut term = x.clone();
    let mut sum = x.clone();
    for j in 2..200 {
        term = &term * &x;
        let t = &term / j as f64;
        if j % 2 == 0 {
            sum -= &t;
        } else {
            sum += &t;
        }
        if t.amax() < 1e-19 {
            break;
        }
    }
    Ok(sum * 2f64.powi(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A matrix Lie group: an algebra given by structure constants together with
/// basis matrices realizing it and membership constraints.
#[derive(Debug, Clone)]
pub struct MatrixGroup {
    name: String,
    algebra: LieAlgebraData,
    basis: Vec<DMatrix<f64>>,
    size: usize,
    membership: Vec<Membership>,
    projector: BasisProjector,
}

impl MatrixGroup {
    /// Checks that the basis commutators reproduce the structure constants
    /// within `1e-12`.
    pub fn new(
        name: impl Into<String>,
        algebra: LieAlgebraData,
        basis: Vec<DMatrix<f64>>,
        membership: Vec<Membership>,
    ) -> Result<Self> {
        let name = name.into();
        if basis.len() != algebra.dim() {
            return Err(Error::DimError {
                expected: algebra.dim(),
                got: basis.len(),
            });
        }
        let size = basis.first().map(|b| b.nrows()).unwrap_or(1);
        for b in &basis {
            if b.nrows() != size || b.ncols() != size {
                return Err(Error::ParseError(format!(
                    "{name}: basis matrices must all be {size}x{size}"
                )));
            }
        }
        let projector = BasisProjector::new(&basis);
        let g = Self {
            name,
            algebra,
            basis,
            size,
            membership,
            projector,
        };
        let (r, idx) = g.commutator_residual();
        if r > 1e-12 {
            return Err(Error::InvariantFailure {
                invariant: format!(
                    "{}: embedded commutators reproduce structure constants",
                    g.name
                ),
                index: format!("{idx:?}"),
                residual: r,
            });
        }
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &LieAlgebraData {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn membership(&self) -> &[Membership] {
        &self.membership
    }

    /// Worst deviation between `[B_i, B_j]` and `sum_k c^k_{ij} B_k`.
    pub fn commutator_residual(&self) -> (f64, (usize, usize)) {
        let n = self.dim();
        let mut worst = (0.0, (0, 0));
        for i in 0..n {
            for j in 0..n {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let mut expect = DMatrix::zeros(self.size, self.size);
                for k in 0..n {
                    expect += &self.basis[k] * self.algebra.c(i, j, k);
                }
                let r = (comm - expect).amax();
                if r > worst.0 {
                    worst = (r, (i, j));
                }
            }
        }
        worst
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.size)
    }

    pub fn embed(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (xi, b) in x.iter().zip(&self.basis) {
            if *xi != 0.0 {
                m += b * *xi;
            }
        }
        m
    }

    pub fn project(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.projector.project(m)
    }

    pub fn exp(&self, x: &DVector<f64>) -> GroupPoint {
        GroupPoint(matrix_exp(&self.embed(x)))
    }

    pub fn log(&self, g: &GroupPoint) -> Result<DVector<f64>> {
        let l = matrix_log(&g.0)?;
        self.project(&l)
    }

    pub fn membership_residual(&self, g: &GroupPoint) -> f64 {
        self.membership
            .iter()
            .map(|m| m.residual(&g.0, self))
            .fold(0.0, f64::max)
    }

    pub fn check_member(&self, g: &GroupPoint) -> Result<()> {
        let r = self.membership_residual(g);
        if r > MEMBERSHIP_TOL {
            return Err(Error::MembershipError {
                group: self.name.clone(),
                residual: r,
            });
        }
        Ok(())
    }

    /// Chart map at `base`.
    pub fn retract(&self, base: &GroupPoint, z: &DVector<f64>) -> GroupPoint {
        base.mul(&self.exp(z))
    }

    /// Inverse chart at `base`.
    pub fn local(&self, base: &GroupPoint, y: &GroupPoint) -> Result<DVector<f64>> {
        self.log(&base.inverse().mul(y))
    }

    /// Matrix of `Ad(g)` in basis coordinates.
    pub fn ad_matrix(&self, g: &GroupPoint) -> Result<DMatrix<f64>> {
        let gi = g.inverse();
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, b) in self.basis.iter().enumerate() {
            let c = self.project(&(&g.0 * b * &gi.0))?;
            m.set_column(j, &c);
        }
        Ok(m)
    }

    pub fn adjoint(&self, g: &GroupPoint, x: &DVector<f64>) -> Result<DVector<f64>> {
        let gi = g.inverse();
        self.project(&(&g.0 * self.embed(x) * &gi.0))
    }

    /// `<Coad(g) xi, X> = <xi, Ad(g^-1) X>`.
    pub fn coadjoint(&self, g: &GroupPoint, xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.ad_matrix(&g.inverse())?.transpose() * xi)
    }

    /// Value at `u` (in the chart at `u`) of the left- or right-invariant
    /// one-form equal to `x` at the identity.
    pub fn invariant_one_form(
        &self,
        x: &DVector<f64>,
        side: Side,
        u: &GroupPoint,
    ) -> Result<DVector<f64>> {
        match side {
            Side::Left => Ok(x.clone()),
            Side::Right => Ok(self.ad_matrix(u)?.transpose() * x),
        }
    }

    /// Tangent vector at the identity of the left-invariant field generated
    /// by `y`, read at `u`; trivially `y` in the left-trivialized chart.
    pub fn left_invariant_field(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{differential, Sampler, ToleranceConfig};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    pub(crate) fn su2() -> MatrixGroup {
        let half = 0.5;
        let e1 = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -half), c(0., -half), c(0., 0.)]);
        let e2 = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(-half, 0.), c(half, 0.), c(0., 0.)]);
        let e3 = DMatrix::from_row_slice(2, 2, &[c(0., -half), c(0., 0.), c(0., 0.), c(0., half)]);
        let basis: Vec<_> = [e1, e2, e3].iter().map(from_complex).collect();
        let alg =
            LieAlgebraData::from_matrices(vec!["e1".into(), "e2".into(), "e3".into()], &basis)
                .unwrap();
        MatrixGroup::new(
            "SU(2)",
            alg,
            basis,
            vec![
                Membership::ComplexStructure,
                Membership::Orthogonal,
                Membership::ComplexDetOne,
            ],
        )
        .unwrap()
    }

    #[test]
    fn su2_bracket_e1_e2_is_e3() {
        let g = su2();
        let e = |i: usize| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        let b = g.algebra().bracket(&e(0), &e(1)).unwrap();
        assert!((b - e(2)).amax() < 1e-12);
    }

    #[test]
    fn bracket_self_and_abelian() {
        let g = su2();
        let x = DVector::from_vec(vec![0.3, -0.2, 0.7]);
        assert!(g.algebra().bracket(&x, &x).unwrap().amax() < 1e-15);
        let ab = LieAlgebraData::abelian(3);
        assert_eq!(ab.bracket(&x, &x.scale(2.0)).unwrap(), DVector::zeros(3));
        assert!(matches!(
            ab.bracket(&x, &DVector::zeros(2)),
            Err(Error::DimError { .. })
        ));
    }

    #[test]
    fn antisymmetry_violation_named() {
        let bad =
            LieAlgebraData::from_entries(vec!["a".into(), "b".into()], &[(0, 1, 0, 1.0)]).unwrap();
        match bad.validate("g") {
            Err(Error::InvariantFailure { invariant, .. }) => {
                assert!(invariant.contains("antisymmetry"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exp_zero_and_rotation() {
        let alg = LieAlgebraData::abelian(1);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let g = MatrixGroup::new("SO(2)", alg, vec![rot], vec![Membership::Orthogonal]).unwrap();
        assert_eq!(g.exp(&DVector::zeros(1)).0, DMatrix::identity(2, 2));
        let r = g.exp(&DVector::from_element(1, std::f64::consts::FRAC_PI_2));
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((r.0 - expect).amax() < 1e-12);
    }

    #[test]
    fn exp_inverse_and_log_roundtrip() {
        let g = su2();
        let mut s = Sampler::new(3);
        for _ in 0..20 {
            let x = s.uniform_box(3, 0.5);
            let p = g.exp(&x);
            let q = g.exp(&(-&x));
            assert!((p.mul(&q).0 - DMatrix::identity(4, 4)).amax() < 1e-12);
            assert!((g.log(&p).unwrap() - &x).amax() < 1e-10);
            assert!(g.membership_residual(&p) < 1e-12);
        }
        assert!(g.log(&g.identity()).unwrap().amax() < 1e-15);
    }

    #[test]
    fn log_of_antipode_fails() {
        let g = su2();
        let minus = GroupPoint(-DMatrix::identity(4, 4));
        assert!(matches!(g.log(&minus), Err(Error::LogDomainError(_))));
    }

    #[test]
    fn exp_chart_differential_is_identity() {
        let g = su2();
        let cfg = ToleranceConfig::default();
        let d = differential(
            |z: &DVector<f64>| g.local(&g.identity(), &g.exp(z)),
            &DVector::zeros(3),
            &cfg,
        )
        .unwrap();
        assert!((d - DMatrix::identity(3, 3)).amax() < 1e-9);
    }

    #[test]
    fn ad_coad_duality_and_homomorphism() {
        let g = su2();
        let mut s = Sampler::new(9);
        for _ in 0..10 {
            let a = g.exp(&s.uniform_box(3, 1.0));
            let b = g.exp(&s.uniform_box(3, 1.0));
            let x = s.uniform_box(3, 1.0);
            let xi = s.uniform_box(3, 1.0);
            let lhs = g
                .coadjoint(&a, &xi)
                .unwrap()
                .dot(&g.adjoint(&a, &x).unwrap());
            assert!((lhs - xi.dot(&x)).abs() < 1e-10);
            let ab = g.ad_matrix(&a.mul(&b)).unwrap();
            let prod = g.ad_matrix(&a).unwrap() * g.ad_matrix(&b).unwrap();
            assert!((ab - prod).amax() < 1e-10);
        }
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3]);
        assert!((g.adjoint(&g.identity(), &x).unwrap() - &x).amax() < 1e-15);
    }

    #[test]
    fn ad_derivative_is_bracket() {
        let g = su2();
        let x = DVector::from_vec(vec![0.4, -0.3, 0.2]);
        let y = DVector::from_vec(vec![-0.1, 0.5, 0.9]);
        let cfg = ToleranceConfig::default();
        let d = differential(
            |t: &DVector<f64>| g.adjoint(&g.exp(&(&x * t[0])), &y),
            &DVector::zeros(1),
            &cfg,
        )
        .unwrap();
        let b = g.algebra().bracket(&x, &y).unwrap();
        assert!((d.column(0) - b).amax() < 1e-6);
    }

    #[test]
    fn invariant_forms() {
        let g = su2();
        let x = DVector::from_vec(vec![0.4, -0.3, 0.2]);
        let e = g.identity();
        let l = g.invariant_one_form(&x, Side::Left, &e).unwrap();
        let r = g.invariant_one_form(&x, Side::Right, &e).unwrap();
        assert!((l - r).amax() < 1e-14);
        let u = g.exp(&DVector::from_vec(vec![0.3, 0.1, -0.6]));
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let pairing = g
            .invariant_one_form(&x, Side::Left, &u)
            .unwrap()
            .dot(&g.left_invariant_field(&y));
        assert!((pairing - x.dot(&y)).abs() < 1e-14);
        // right form against the right-invariant field of y at u
        let right_field = g.ad_matrix(&u.inverse()).unwrap() * &y;
        let pairing = g
            .invariant_one_form(&x, Side::Right, &u)
            .unwrap()
            .dot(&right_field);
        assert!((pairing - x.dot(&y)).abs() < 1e-12);
    }

    #[test]
    fn right_jacobian_matches_chart_transition() {
        let g = su2();
        let cfg = ToleranceConfig::default();
        let z = DVector::from_vec(vec![0.3, -0.2, 0.4]);
        let base = g.exp(&z);
        // chart velocity needed to move along base*exp(t w)
        let w = DVector::from_vec(vec![0.5, 0.1, -0.7]);
        let d = differential(
            |t: &DVector<f64>| g.log(&base.mul(&g.exp(&(&w * t[0])))),
            &DVector::zeros(1),
            &cfg,
        )
        .unwrap();
        let pred = g.algebra().right_jacobian_inv(&z) * &w;
        assert!((d.column(0) - pred).amax() < 1e-8);
    }
}
