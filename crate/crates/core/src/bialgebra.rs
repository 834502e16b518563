//! Lie bialgebras and the double algebra `d = g + g*`. The double group
//! `D = G G*` supplies factorizations, dressing actions and the bivectors
//! `pi_0`, `pi_+-`.
//!
//! Basis of `d`: `(e_1..e_n, eps^1..eps^n)`, the second half dual to the
//! first under the symmetric pairing. Left-trivialized chart coordinates on
//! `D` use the same ordering.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{
    from_complex, matrix_log, to_complex, BasisProjector, GroupPoint, LieAlgebraData, MatrixGroup,
    Membership,
};
use crate::numerics::{newton_solve, rank_report, ToleranceConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LieBialgebraData {
    pub g: LieAlgebraData,
    /// Constants `f^{ij}_k` of `g*`, stored as the structure constants of
    /// the algebra `g*` in the dual basis.
    pub gstar: LieAlgebraData,
}

impl LieBialgebraData {
    pub fn new(g: LieAlgebraData, gstar: LieAlgebraData) -> Result<Self> {
        if g.dim() != gstar.dim() {
            return Err(Error::DimError {
                expected: g.dim(),
                got: gstar.dim(),
            });
        }
        Ok(Self { g, gstar })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.g.c(i, j, k)
    }

    /// `f^{ij}_k`: `[eps^i, eps^j] = sum_k f^{ij}_k eps^k`.
    #[inline]
    pub fn f(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gstar.c(i, j, k)
    }

    pub fn is_zero_structure(&self) -> bool {
        self.gstar.entries().is_empty()
    }

    /// Worst residual of the 1-cocycle identity
    /// `delta([X, Y]) = ad_X delta(Y) - ad_Y delta(X)` over basis pairs,
    /// with `delta(e_i)^{ab} = f^{ab}_i`.
    pub fn cocycle_residual(&self) -> (f64, (usize, usize, usize, usize)) {
        let n = self.dim();
        let mut worst = (0.0, (0, 0, 0, 0));
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut lhs = 0.0;
                        let mut rhs = 0.0;
                        for m in 0..n {
                            lhs += self.f(a, b, m) * self.c(i, j, m);
                            rhs += self.c(i, m, a) * self.f(m, b, j)
                                + self.c(i, m, b) * self.f(a, m, j)
                                - self.c(j, m, a) * self.f(m, b, i)
                                - self.c(j, m, b) * self.f(a, m, i);
                        }
                        let r = (lhs - rhs).abs();
                        if r > worst.0 {
                            worst = (r, (i, j, a, b));
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        self.g.validate("g")?;
        self.gstar.validate("g*")?;
        let (r, idx) = self.cocycle_residual();
        if r > 1e-12 {
            return Err(Error::InvariantFailure {
                invariant: "cocycle".into(),
                index: format!("{idx:?}"),
                residual: r,
            });
        }
        Ok(())
    }

    /// The bialgebra of the dual group: the two tables swap roles.
    pub fn dual(&self) -> Self {
        Self {
            g: self.gstar.clone(),
            gstar: self.g.clone(),
        }
    }
}

/// Structure constants of `d = g + g*`. Mixed brackets are
/// `[e_i, eps^j] = sum_k f^{jk}_i e_k - sum_k c^j_{ik} eps^k`, the unique
/// choice for which the symmetric pairing is invariant.
pub fn double_algebra(b: &LieBialgebraData) -> LieAlgebraData {
    let n = b.dim();
    let mut labels: Vec<String> = b.g.labels().to_vec();
    labels.extend(b.gstar.labels().iter().cloned());
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = b.c(i, j, k);
                if c != 0.0 {
                    entries.push((i, j, k, c));
                }
                let f = b.f(i, j, k);
                if f != 0.0 {
                    entries.push((n + i, n + j, n + k, f));
                }
                // [e_i, eps^j]
                let fe = b.f(j, k, i);
                let ce = -b.c(i, k, j);
                if fe != 0.0 {
                    entries.push((i, n + j, k, fe));
                    entries.push((n + j, i, k, -fe));
                }
                if ce != 0.0 {
                    entries.push((i, n + j, n + k, ce));
                    entries.push((n + j, i, n + k, -ce));
                }
            }
        }
    }
    // duplicate (i, j, k) keys never occur: each mixed key is written by one term
    LieAlgebraData::from_entries(labels, &entries).expect("indices in range")
}

/// Gram matrix of `<X + xi, Y + eta> = xi(Y) + eta(X)`.
pub fn pairing_matrix(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        q[(i, n + i)] = 1.0;
        q[(n + i, i)] = 1.0;
    }
    q
}

/// Worst `|<[a, b], c> + <b, [a, c]>|` over basis triples of `d`.
pub fn pairing_invariance_residual(d: &LieAlgebraData) -> f64 {
    let n2 = d.dim();
    let q = pairing_matrix(n2 / 2);
    let mut worst: f64 = 0.0;
    for a in 0..n2 {
        let x = DVector::from_fn(n2, |k, _| if k == a { 1.0 } else { 0.0 });
        let ad = d.ad(&x);
        let m = ad.transpose() * &q + &q * &ad;
        worst = worst.max(m.amax());
    }
    worst
}

/// `pi_0 = sum_i e_i ^ eps^i` as a matrix on `d*` coordinates, where a
/// covector is split as (`g*` part pairing with `g`, `g` part pairing with
/// `g*`).
pub fn pi0_matrix(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        p[(i, n + i)] = 1.0;
        p[(n + i, i)] = -1.0;
    }
    p
}

/// `pi_0(xi_1 + X_1, xi_2 + X_2) = xi_1(X_2) - xi_2(X_1)`.
pub fn pi0(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = a.len() / 2;
    let mut s = 0.0;
    for i in 0..n {
        s += a[i] * b[n + i] - b[i] * a[n + i];
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationMode {
    /// Gram-Schmidt on the columns of the complex realization: unitary
    /// factor times upper-triangular factor with positive diagonal.
    ClosedForm,
    /// `G` acts faithfully on the diagonal block `offset..offset+size` and
    /// `G*` acts trivially there, so the block of `d` is the block of its
    /// `G`-factor.
    Block {
        offset: usize,
        size: usize,
    },
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BivectorKind {
    /// `pi_G` and `pi_G*` obtained by restricting `pi_-` of the double.
    DoubleRestriction,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOrder {
    /// `d = g u`
    GU,
    /// `d = u g`
    UG,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressKind {
    /// `lambda_u(h)`: G-factor of `h u^-1 = u' h'` (order UG).
    GstarOnGLeft,
    /// `rho_u(h)`: G-factor of `u^-1 h = h' u'` (order GU).
    GstarOnGRight,
    /// `lambda_k(u)`: G*-factor of `u k^-1 = k' u'`.
    GOnGstarLeft,
    /// `rho_g(u)`: G*-factor of `g^-1 u = u' g'`.
    GOnGstarRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublePoint {
    pub g: GroupPoint,
    pub u: GroupPoint,
    matrix: GroupPoint,
}

impl DoublePoint {
    pub fn new(g: GroupPoint, u: GroupPoint) -> Self {
        let matrix = g.mul(&u);
        Self { g, u, matrix }
    }

    pub fn matrix(&self) -> &GroupPoint {
        &self.matrix
    }

    pub fn cache_residual(&self) -> f64 {
        self.g.mul(&self.u).distance(&self.matrix)
    }
}

#[derive(Debug, Clone)]
pub struct DoubleGroup {
    bialgebra: LieBialgebraData,
    g: MatrixGroup,
    gstar: MatrixGroup,
    d: MatrixGroup,
    mode: FactorizationMode,
    bivector: BivectorKind,
    newton: ToleranceConfig,
    /// When set, `double_multiply` cross-checks the abstract law against the
    /// matrix product on every call.
    pub cross_check: bool,
}

fn gram_schmidt(
    m: &DMatrix<Complex<f64>>,
) -> Result<(DMatrix<Complex<f64>>, DMatrix<Complex<f64>>)> {
    let k = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut q = DMatrix::<Complex<f64>>::zeros(k, k);
    let mut r = DMatrix::<Complex<f64>>::zeros(k, k);
    for j in 0..k {
        let mut v = m.column(j).into_owned();
        // two passes of modified Gram-Schmidt keep q unitary to roundoff
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let proj = qi.dotc(&v);
                r[(i, j)] += proj;
                v -= qi * proj;
            }
        }
        let norm = v.norm();
        if norm <= 1e-14 * scale {
            return Err(Error::DegenerateColumn);
        }
        r[(j, j)] = Complex::new(norm, 0.0);
        q.set_column(j, &(v / Complex::new(norm, 0.0)));
    }
    Ok((q, r))
}

fn check_block(g: &MatrixGroup, gstar: &MatrixGroup, offset: usize, size: usize) -> Result<()> {
    if offset + size > g.size() || size == 0 {
        return Err(Error::DimError {
            expected: g.size(),
            got: offset + size,
        });
    }
    let block = |m: &DMatrix<f64>| m.view((offset, offset), (size, size)).into_owned();
    if let Some(b) = gstar.basis().iter().find(|b| block(b).amax() > 0.0) {
        return Err(Error::Unsupported(format!(
            "block factorization needs G* to vanish on the block, found entry {:e}",
            block(b).amax()
        )));
    }
    let cols: Vec<DVector<f64>> = g
        .basis()
        .iter()
        .map(|b| DVector::from_column_slice(block(b).as_slice()))
        .collect();
    let (rank, _) = rank_report(&DMatrix::from_columns(&cols));
    if rank < g.dim() {
        return Err(Error::Unsupported(
            "block factorization needs G to act faithfully on the block".into(),
        ));
    }
    Ok(())
}

impl DoubleGroup {
    /// Assembles the double from the two factor groups. The embedding of `d`
    /// is the concatenated basis, checked against the double-algebra
    /// constants.
    pub fn new(
        bialgebra: LieBialgebraData,
        g: MatrixGroup,
        gstar: MatrixGroup,
        d_membership: Vec<Membership>,
        mode: FactorizationMode,
        bivector: BivectorKind,
    ) -> Result<Self> {
        bialgebra.validate()?;
        if g.size() != gstar.size() {
            return Err(Error::DimError {
                expected: g.size(),
                got: gstar.size(),
            });
        }
        if mode == FactorizationMode::ClosedForm {
            let unitary = g.membership().contains(&Membership::Orthogonal)
                && g.membership().contains(&Membership::ComplexStructure);
            let triangular = gstar
                .membership()
                .contains(&Membership::UpperTriangularComplex);
            if !unitary || !triangular {
                return Err(Error::Unsupported(
                    "closed-form factorization needs a unitary G and an upper-triangular G*".into(),
                ));
            }
        }
        if let FactorizationMode::Block { offset, size } = mode {
            check_block(&g, &gstar, offset, size)?;
        }
        let alg = double_algebra(&bialgebra);
        let mut basis = g.basis().to_vec();
        basis.extend(gstar.basis().iter().cloned());
        let d = MatrixGroup::new("D", alg, basis, d_membership)?;
        Ok(Self {
            bialgebra,
            g,
            gstar,
            d,
            mode,
            bivector,
            newton: ToleranceConfig::default(),
            cross_check: cfg!(debug_assertions),
        })
    }

    pub fn bialgebra(&self) -> &LieBialgebraData {
        &self.bialgebra
    }

    pub fn g(&self) -> &MatrixGroup {
        &self.g
    }

    pub fn gstar(&self) -> &MatrixGroup {
        &self.gstar
    }

    pub fn d(&self) -> &MatrixGroup {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    pub fn mode(&self) -> FactorizationMode {
        self.mode
    }

    pub fn bivector_kind(&self) -> BivectorKind {
        self.bivector
    }

    pub fn with_mode(mut self, mode: FactorizationMode) -> Self {
        self.mode = mode;
        self
    }

    fn factor_gu(&self, d: &GroupPoint) -> Result<(GroupPoint, GroupPoint)> {
        match self.mode {
            FactorizationMode::ClosedForm => {
                let (q, r) = gram_schmidt(&to_complex(&d.0))?;
                Ok((GroupPoint(from_complex(&q)), GroupPoint(from_complex(&r))))
            }
            FactorizationMode::Block { offset, size } => {
                let a = d.0.view((offset, offset), (size, size)).into_owned();
                let x = self.block_algebra(offset, size).project(&matrix_log(&a)?)?;
                let g = self.g.exp(&x);
                let u = g.inverse().mul(d);
                // G* is the identity on the block; the full test is costly
                let off = (u.0.view((offset, offset), (size, size))
                    - DMatrix::identity(size, size))
                .amax();
                if off > 1e-9 {
                    return Err(Error::MembershipError {
                        group: self.gstar.name().into(),
                        residual: off,
                    });
                }
                if self.cross_check {
                    self.gstar.check_member(&u)?;
                }
                Ok((g, u))
            }
            FactorizationMode::Newton => self.factor_newton(d),
        }
    }

    fn block_algebra(&self, offset: usize, size: usize) -> BasisProjector {
        let blocks: Vec<_> = self
            .g
            .basis()
            .iter()
            .map(|b| b.view((offset, offset), (size, size)).into_owned())
            .collect();
        BasisProjector::new(&blocks)
    }

    fn factor_newton(&self, d: &GroupPoint) -> Result<(GroupPoint, GroupPoint)> {
        let n = self.n();
        let dinv = d.inverse();
        let guess = self.d.log(d).unwrap_or_else(|_| DVector::zeros(2 * n));
        let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
            let g = self.g.exp(&x.rows(0, n).into_owned());
            let u = self.gstar.exp(&x.rows(n, n).into_owned());
            self.d.log(&dinv.mul(&g).mul(&u))
        };
        let x = newton_solve(residual, &guess, &self.newton)?;
        Ok((
            self.g.exp(&x.rows(0, n).into_owned()),
            self.gstar.exp(&x.rows(n, n).into_owned()),
        ))
    }

    /// GU returns `(g, u)` with `d = g u`; UG returns `(u1, g1)` with
    /// `d = u1 g1`.
    pub fn factorize(
        &self,
        d: &GroupPoint,
        order: FactorOrder,
    ) -> Result<(GroupPoint, GroupPoint)> {
        match order {
            FactorOrder::GU => self.factor_gu(d),
            FactorOrder::UG => {
                let (g, u) = self.factor_gu(&d.inverse())?;
                Ok((u.inverse(), g.inverse()))
            }
        }
    }

    pub fn point(&self, d: &GroupPoint) -> Result<DoublePoint> {
        let (g, u) = self.factorize(d, FactorOrder::GU)?;
        Ok(DoublePoint::new(g, u))
    }

    pub fn dress(
        &self,
        actor: &GroupPoint,
        target: &GroupPoint,
        kind: DressKind,
    ) -> Result<GroupPoint> {
        match kind {
            DressKind::GstarOnGLeft => Ok(self
                .factorize(&target.mul(&actor.inverse()), FactorOrder::UG)?
                .1),
            DressKind::GstarOnGRight => Ok(self
                .factorize(&actor.inverse().mul(target), FactorOrder::GU)?
                .0),
            DressKind::GOnGstarLeft => Ok(self
                .factorize(&target.mul(&actor.inverse()), FactorOrder::GU)?
                .1),
            DressKind::GOnGstarRight => Ok(self
                .factorize(&actor.inverse().mul(target), FactorOrder::UG)?
                .0),
        }
    }

    /// `(g, u)(h, v) = (g rho_{u^-1}(h), lambda_{h^-1}(u) v)`.
    pub fn double_multiply(&self, a: &DoublePoint, b: &DoublePoint) -> Result<DoublePoint> {
        let uinv = a.u.inverse();
        let hinv = b.g.inverse();
        let g = a.g.mul(&self.dress(&uinv, &b.g, DressKind::GstarOnGRight)?);
        let u = self.dress(&hinv, &a.u, DressKind::GOnGstarLeft)?.mul(&b.u);
        let out = DoublePoint::new(g, u);
        if self.cross_check {
            let direct = self.point(&a.matrix().mul(b.matrix()))?;
            let drift = direct.g.distance(&out.g).max(direct.u.distance(&out.u));
            if drift > 1e-8 {
                return Err(Error::InvariantViolation {
                    what: "double law disagrees with matrix product".into(),
                    drift,
                });
            }
        }
        Ok(out)
    }

    /// `pi_+` or `pi_-` at `d`, in the left-trivialized chart at `d`:
    /// `1/2 (Ad_{d^-1} P0 Ad_{d^-1}^T +- P0)`.
    pub fn pi_pm(&self, d: &GroupPoint, sign: PmSign) -> Result<DMatrix<f64>> {
        let a = self.d.ad_matrix(&d.inverse())?;
        let p0 = pi0_matrix(self.n());
        let right = &a * &p0 * a.transpose();
        Ok(match sign {
            PmSign::Plus => (right + p0) * 0.5,
            PmSign::Minus => (right - p0) * 0.5,
        })
    }

    /// Poisson-Lie bivector of `G` at `g`, left-trivialized.
    pub fn pi_g(&self, g: &GroupPoint) -> Result<DMatrix<f64>> {
        let n = self.n();
        match self.bivector {
            BivectorKind::Zero => Ok(DMatrix::zeros(n, n)),
            BivectorKind::DoubleRestriction => {
                let p = self.pi_pm(g, PmSign::Minus)?;
                Ok(-p.view((0, 0), (n, n)).into_owned())
            }
        }
    }

    /// Poisson-Lie bivector of `G*` at `u`, left-trivialized.
    pub fn pi_gstar(&self, u: &GroupPoint) -> Result<DMatrix<f64>> {
        let n = self.n();
        let p = self.pi_pm(u, PmSign::Minus)?;
        Ok(p.view((n, n), (n, n)).into_owned())
    }
}
