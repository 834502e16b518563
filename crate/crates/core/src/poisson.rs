//! Pointwise Poisson geometry in charts: manifolds, bivectors, brackets,
//! Jacobi and Poisson-map residuals, multiplicativity, infinitesimal
//! dressing and the linearization of a multiplicative bivector.
//!
//! Points are flat vectors of ambient coordinates (a group element is its
//! matrix in column-major order, a product point is the concatenation of the
//! factors). Tangent vectors and covectors live in the chart at the point.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{GroupPoint, MatrixGroup, Side};
use crate::numerics::{curve_derivative, differential, gradient, ToleranceConfig};

pub type Point = DVector<f64>;

pub trait Manifold: Send + Sync {
    /// Chart dimension.
    fn dim(&self) -> usize;
    /// Length of the flat ambient representation of a point.
    fn ambient_dim(&self) -> usize;
    fn retract(&self, base: &Point, z: &DVector<f64>) -> Result<Point>;
    fn local(&self, base: &Point, p: &Point) -> Result<DVector<f64>>;

    /// Jacobian at `w = 0` of `w -> local(base, retract(retract(base, z), w))`:
    /// carries chart vectors at `retract(base, z)` into the chart at `base`.
    fn transition(&self, base: &Point, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let p = self.retract(base, z)?;
        differential(
            |w: &DVector<f64>| self.local(base, &self.retract(&p, w)?),
            &DVector::zeros(self.dim()),
            &ToleranceConfig::default(),
        )
    }

    fn distance(&self, a: &Point, b: &Point) -> f64 {
        (a - b).amax()
    }
}

pub trait PoissonManifold: Manifold {
    /// Bivector at `p` in the chart at `p`.
    fn bivector(&self, p: &Point) -> Result<DMatrix<f64>>;

    /// Bivector at `retract(base, z)` expressed in the chart at `base`.
    fn bivector_in_chart(&self, base: &Point, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let p = self.retract(base, z)?;
        let t = self.transition(base, z)?;
        Ok(&t * self.bivector(&p)? * t.transpose())
    }
}

/// Group structure on a Poisson manifold, as needed for momentum-map
/// targets.
pub trait GroupManifold: PoissonManifold {
    fn identity(&self) -> Point;
    fn mul(&self, a: &Point, b: &Point) -> Point;
    fn inv(&self, a: &Point) -> Point;
    /// `Ad` in chart coordinates.
    fn ad(&self, a: &Point) -> Result<DMatrix<f64>>;

    fn exp(&self, x: &DVector<f64>) -> Result<Point> {
        self.retract(&self.identity(), x)
    }

    /// Chart coordinates of `a^-1 b`, the group difference.
    fn difference(&self, a: &Point, b: &Point) -> Result<DVector<f64>> {
        self.local(a, b)
    }

    /// Value at `u` of the invariant one-form equal to `x` at the identity.
    fn invariant_form(&self, x: &DVector<f64>, side: Side, u: &Point) -> Result<DVector<f64>> {
        match side {
            Side::Left => Ok(x.clone()),
            Side::Right => Ok(self.ad(u)?.transpose() * x),
        }
    }
}

pub type VectorBivector = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// `R^n` with identity charts.
#[derive(Clone)]
pub struct EuclideanSpace {
    dim: usize,
    bivector: VectorBivector,
}

impl EuclideanSpace {
    pub fn new(dim: usize, bivector: VectorBivector) -> Self {
        Self { dim, bivector }
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        let dim = m.nrows();
        Self::new(dim, Arc::new(move |_| m.clone()))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, Arc::new(move |_| DMatrix::zeros(dim, dim)))
    }

    /// The one-point manifold.
    pub fn point() -> Self {
        Self::zero(0)
    }

    /// `R^{2k}` with `sum_i dq_i ^ dp_i`, coordinates `(q_1, p_1, q_2, ...)`.
    pub fn symplectic(k: usize) -> Self {
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            m[(2 * i, 2 * i + 1)] = 1.0;
            m[(2 * i + 1, 2 * i)] = -1.0;
        }
        Self::constant(m)
    }
}

impl Manifold for EuclideanSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn retract(&self, base: &Point, z: &DVector<f64>) -> Result<Point> {
        Ok(base + z)
    }
    fn local(&self, base: &Point, p: &Point) -> Result<DVector<f64>> {
        Ok(p - base)
    }
    fn transition(&self, _base: &Point, _z: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.dim, self.dim))
    }
}

impl PoissonManifold for EuclideanSpace {
    fn bivector(&self, p: &Point) -> Result<DMatrix<f64>> {
        Ok((self.bivector)(p))
    }
}

/// Additive vector group with the zero Poisson structure; the dual of an
/// abelian zero-structure group.
#[derive(Clone)]
pub struct AdditiveGroup {
    space: EuclideanSpace,
}

impl AdditiveGroup {
    pub fn new(dim: usize) -> Self {
        Self {
            space: EuclideanSpace::zero(dim),
        }
    }
}

impl Manifold for AdditiveGroup {
    fn dim(&self) -> usize {
        self.space.dim
    }
    fn ambient_dim(&self) -> usize {
        self.space.dim
    }
    fn retract(&self, base: &Point, z: &DVector<f64>) -> Result<Point> {
        self.space.retract(base, z)
    }
    fn local(&self, base: &Point, p: &Point) -> Result<DVector<f64>> {
        self.space.local(base, p)
    }
    fn transition(&self, base: &Point, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.space.transition(base, z)
    }
}

impl PoissonManifold for AdditiveGroup {
    fn bivector(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.space.bivector(p)
    }
}

impl GroupManifold for AdditiveGroup {
    fn identity(&self) -> Point {
        DVector::zeros(self.space.dim)
    }
    fn mul(&self, a: &Point, b: &Point) -> Point {
        a + b
    }
    fn inv(&self, a: &Point) -> Point {
        -a
    }
    fn ad(&self, _a: &Point) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.space.dim, self.space.dim))
    }
}

pub type GroupBivector = Arc<dyn Fn(&GroupPoint) -> Result<DMatrix<f64>> + Send + Sync>;

/// A matrix group with a (left-trivialized) bivector field.
#[derive(Clone)]
pub struct GroupSpace {
    group: MatrixGroup,
    bivector: GroupBivector,
}

impl GroupSpace {
    pub fn new(group: MatrixGroup, bivector: GroupBivector) -> Self {
        Self { group, bivector }
    }

    pub fn zero(group: MatrixGroup) -> Self {
        let n = group.dim();
        Self::new(group, Arc::new(move |_| Ok(DMatrix::zeros(n, n))))
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.group
    }

    pub fn to_point(&self, g: &GroupPoint) -> Point {
        DVector::from_column_slice(g.0.as_slice())
    }

    pub fn to_group(&self, p: &Point) -> GroupPoint {
        let m = self.group.size();
        GroupPoint(DMatrix::from_column_slice(m, m, p.as_slice()))
    }

    pub fn pi(&self, g: &GroupPoint) -> Result<DMatrix<f64>> {
        (self.bivector)(g)
    }
}

impl Manifold for GroupSpace {
    fn dim(&self) -> usize {
        self.group.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.group.size() * self.group.size()
    }
    fn retract(&self, base: &Point, z: &DVector<f64>) -> Result<Point> {
        Ok(self.to_point(&self.group.retract(&self.to_group(base), z)))
    }
    fn local(&self, base: &Point, p: &Point) -> Result<DVector<f64>> {
        self.group.local(&self.to_group(base), &self.to_group(p))
    }
    fn transition(&self, _base: &Point, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.group.algebra().right_jacobian_inv(z))
    }
}

impl PoissonManifold for GroupSpace {
    fn bivector(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.pi(&self.to_group(p))
    }
}

impl GroupManifold for GroupSpace {
    fn identity(&self) -> Point {
        self.to_point(&self.group.identity())
    }
    fn mul(&self, a: &Point, b: &Point) -> Point {
        self.to_point(&self.to_group(a).mul(&self.to_group(b)))
    }
    fn inv(&self, a: &Point) -> Point {
        self.to_point(&self.to_group(a).inverse())
    }
    fn ad(&self, a: &Point) -> Result<DMatrix<f64>> {
        self.group.ad_matrix(&self.to_group(a))
    }
}

/// Product of two Poisson manifolds with the block-diagonal bivector.
#[derive(Clone)]
pub struct ProductSpace {
    pub first: Arc<dyn PoissonManifold>,
    pub second: Arc<dyn PoissonManifold>,
}

impl ProductSpace {
    pub fn new(first: Arc<dyn PoissonManifold>, second: Arc<dyn PoissonManifold>) -> Self {
        Self { first, second }
    }

    pub fn split(&self, p: &Point) -> (Point, Point) {
        let a = self.first.ambient_dim();
        (
            p.rows(0, a).into_owned(),
            p.rows(a, p.len() - a).into_owned(),
        )
    }

    pub fn join(&self, a: &Point, b: &Point) -> Point {
        let mut v = DVector::zeros(a.len() + b.len());
        v.rows_mut(0, a.len()).copy_from(a);
        v.rows_mut(a.len(), b.len()).copy_from(b);
        v
    }

    fn split_chart(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let k = self.first.dim();
        (
            z.rows(0, k).into_owned(),
            z.rows(k, z.len() - k).into_owned(),
        )
    }
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

impl Manifold for ProductSpace {
    fn dim(&self) -> usize {
        self.first.dim() + self.second.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.first.ambient_dim() + self.second.ambient_dim()
    }
    fn retract(&self, base: &Point, z: &DVector<f64>) -> Result<Point> {
        let (a, b) = self.split(base);
        let (za, zb) = self.split_chart(z);
        Ok(self.join(
            &self.first.retract(&a, &za)?,
            &self.second.retract(&b, &zb)?,
        ))
    }
    fn local(&self, base: &Point, p: &Point) -> Result<DVector<f64>> {
        let (a, b) = self.split(base);
        let (pa, pb) = self.split(p);
        Ok(self.join(&self.first.local(&a, &pa)?, &self.second.local(&b, &pb)?))
    }
    fn transition(&self, base: &Point, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (a, b) = self.split(base);
        let (za, zb) = self.split_chart(z);
        Ok(block_diag(
            &self.first.transition(&a, &za)?,
            &self.second.transition(&b, &zb)?,
        ))
    }
    fn distance(&self, x: &Point, y: &Point) -> f64 {
        let (xa, xb) = self.split(x);
        let (ya, yb) = self.split(y);
        self.first
            .distance(&xa, &ya)
            .max(self.second.distance(&xb, &yb))
    }
}

impl PoissonManifold for ProductSpace {
    fn bivector(&self, p: &Point) -> Result<DMatrix<f64>> {
        let (a, b) = self.split(p);
        Ok(block_diag(
            &self.first.bivector(&a)?,
            &self.second.bivector(&b)?,
        ))
    }
}

pub type ScalarFn = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>;
pub type MapFn = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// Step used for a derivative taken of something that is itself a finite
/// difference: ten times the inner step keeps the inner roundoff from
/// dominating.
pub fn outer_cfg(cfg: &ToleranceConfig) -> ToleranceConfig {
    cfg.with_fd_step(cfg.fd_step * 10.0)
}

/// `pi^sharp(alpha)`, with `beta(pi^sharp alpha) = pi(beta, alpha)`.
pub fn sharp(m: &dyn PoissonManifold, alpha: &DVector<f64>, x: &Point) -> Result<DVector<f64>> {
    Ok(m.bivector(x)? * alpha)
}

/// Differential of `f` at `x` in the chart at `x`.
pub fn chart_gradient(
    m: &dyn PoissonManifold,
    f: &dyn Fn(&Point) -> Result<f64>,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<DVector<f64>> {
    gradient(
        |z: &DVector<f64>| f(&m.retract(x, z)?),
        &DVector::zeros(m.dim()),
        cfg,
    )
}

/// `{F, G}(x) = pi(dF, dG)`.
pub fn poisson_bracket(
    m: &dyn PoissonManifold,
    f: &dyn Fn(&Point) -> Result<f64>,
    g: &dyn Fn(&Point) -> Result<f64>,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let df = chart_gradient(m, f, x, cfg)?;
    let dg = chart_gradient(m, g, x, cfg)?;
    Ok(df.dot(&(m.bivector(x)? * dg)))
}

/// Jacobiator of the three chart-affine functions with differentials
/// `alpha, beta, gamma` at `x`, normalized by the covector norms.
pub fn jacobi_residual(
    m: &dyn PoissonManifold,
    x: &Point,
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let scale = alpha.norm() * beta.norm() * gamma.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let derivs = bivector_derivatives(m, x, cfg)?;
    let p0 = m.bivector(x)?;
    Ok(jacobiator(&derivs, &p0, alpha, beta, gamma).abs() / scale)
}

/// Largest Jacobiator over all basis triples at `x`.
pub fn jacobi_tensor_max(m: &dyn PoissonManifold, x: &Point, cfg: &ToleranceConfig) -> Result<f64> {
    let n = m.dim();
    let derivs = bivector_derivatives(m, x, cfg)?;
    let p0 = m.bivector(x)?;
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                worst = worst.max(jacobiator(&derivs, &p0, &e(i), &e(j), &e(k)).abs());
            }
        }
    }
    Ok(worst)
}

fn bivector_derivatives(
    m: &dyn PoissonManifold,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<Vec<DMatrix<f64>>> {
    let n = m.dim();
    let h = cfg.fd_step;
    (0..n)
        .map(|k| {
            let mut z = DVector::zeros(n);
            z[k] = h;
            let plus = m
                .bivector_in_chart(x, &z)
                .map_err(|e| Error::StencilOutOfDomain(e.to_string()))?;
            z[k] = -h;
            let minus = m
                .bivector_in_chart(x, &z)
                .map_err(|e| Error::StencilOutOfDomain(e.to_string()))?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

fn jacobiator(
    derivs: &[DMatrix<f64>],
    p0: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> f64 {
    // {{F, G}, H} for affine F, G, H is d(a^T pi b) . (pi c)
    let term = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>| {
        let v = p0 * c;
        derivs
            .iter()
            .enumerate()
            .map(|(k, d)| a.dot(&(d * b)) * v[k])
            .sum::<f64>()
    };
    term(a, b, c) + term(b, c, a) + term(c, a, b)
}

/// `max |T phi pi_src T phi^T - pi_tgt(phi(x))|` in the chart at `phi(x)`.
pub fn poisson_map_residual(
    phi: &dyn Fn(&Point) -> Result<Point>,
    source: &dyn PoissonManifold,
    target: &dyn PoissonManifold,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let y = phi(x)?;
    let t = differential(
        |z: &DVector<f64>| target.local(&y, &phi(&source.retract(x, z)?)?),
        &DVector::zeros(source.dim()),
        cfg,
    )?;
    let pushed = &t * source.bivector(x)? * t.transpose();
    Ok((pushed - target.bivector(&y)?).amax())
}

/// `max |pi(gh) - TL_g pi(h) TL_g^T - TR_h pi(g) TR_h^T|` in the chart at
/// `gh`, with the translation differentials taken by finite differences.
pub fn multiplicativity_residual(
    g_space: &GroupSpace,
    g: &GroupPoint,
    h: &GroupPoint,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let grp = g_space.group();
    let gh = g.mul(h);
    let zero = DVector::zeros(grp.dim());
    let tl = differential(
        |z: &DVector<f64>| grp.local(&gh, &g.mul(&grp.retract(h, z))),
        &zero,
        cfg,
    )?;
    let tr = differential(
        |z: &DVector<f64>| grp.local(&gh, &grp.retract(g, z).mul(h)),
        &zero,
        cfg,
    )?;
    let lhs = g_space.pi(&gh)?;
    let rhs = &tl * g_space.pi(h)? * tl.transpose() + &tr * g_space.pi(g)? * tr.transpose();
    Ok((lhs - rhs).amax())
}

/// `lambda(xi) = pi^sharp(xi^l)` or `rho(xi) = -pi^sharp(xi^r)` at `g`.
pub fn infinitesimal_dressing(
    g_space: &GroupSpace,
    xi: &DVector<f64>,
    side: Side,
    g: &GroupPoint,
) -> Result<DVector<f64>> {
    let p = g_space.pi(g)?;
    let form = g_space.group().invariant_one_form(xi, side, g)?;
    Ok(match side {
        Side::Left => p * form,
        Side::Right => -(p * form),
    })
}

/// `delta(X) = d/dt (TR_{g(t)^-1} pi(g(t)))` at `t = 0`, `g(t) = exp(tX)`,
/// as an antisymmetric matrix on `g*`: entry `(j, k)` is the coefficient of
/// `e_j ^ e_k`.
pub fn linearization_delta(
    g_space: &GroupSpace,
    x: &DVector<f64>,
    cfg: &ToleranceConfig,
) -> Result<DMatrix<f64>> {
    let grp = g_space.group();
    let n = grp.dim();
    let d = curve_derivative(
        |t: f64| {
            let g = grp.exp(&(x * t));
            let a = grp.ad_matrix(&g)?;
            let r = &a * g_space.pi(&g)? * a.transpose();
            Ok(DVector::from_column_slice(r.as_slice()))
        },
        cfg,
    )?;
    Ok(DMatrix::from_column_slice(n, n, d.as_slice()))
}

pub type ActionFn = Arc<dyn Fn(&GroupPoint, &Point) -> Result<Point> + Send + Sync>;

/// A group action on a Poisson manifold. Left actions evaluate
/// `eval(g, x) = g.x`; right actions evaluate `eval(g, x) = x.g`.
#[derive(Clone)]
pub struct Action {
    pub side: Side,
    pub group: MatrixGroup,
    pub space: Arc<dyn PoissonManifold>,
    pub eval: ActionFn,
}

impl Action {
    pub fn new(
        side: Side,
        group: MatrixGroup,
        space: Arc<dyn PoissonManifold>,
        eval: ActionFn,
    ) -> Self {
        Self {
            side,
            group,
            space,
            eval,
        }
    }

    pub fn apply(&self, g: &GroupPoint, x: &Point) -> Result<Point> {
        (self.eval)(g, x)
    }

    /// Infinitesimal generator `d/dt act(exp(tX), x)` in the chart at `x`.
    pub fn generator(
        &self,
        xa: &DVector<f64>,
        x: &Point,
        cfg: &ToleranceConfig,
    ) -> Result<DVector<f64>> {
        curve_derivative(
            |t: f64| {
                self.space
                    .local(x, &self.apply(&self.group.exp(&(xa * t)), x)?)
            },
            cfg,
        )
    }

    /// Generator at `retract(base, z)` carried into the chart at `base`.
    pub fn generator_in_chart(
        &self,
        xa: &DVector<f64>,
        base: &Point,
        z: &DVector<f64>,
        cfg: &ToleranceConfig,
    ) -> Result<DVector<f64>> {
        let p = self.space.retract(base, z)?;
        Ok(self.space.transition(base, z)? * self.generator(xa, &p, cfg)?)
    }

    pub fn identity_residual(&self, x: &Point) -> Result<f64> {
        Ok(self
            .space
            .distance(&self.apply(&self.group.identity(), x)?, x))
    }

    /// Left: `act(gh, x) = act(g, act(h, x))`; right: `x.(gh) = (x.g).h`.
    pub fn composition_residual(&self, g: &GroupPoint, h: &GroupPoint, x: &Point) -> Result<f64> {
        let lhs = self.apply(&g.mul(h), x)?;
        let rhs = match self.side {
            Side::Left => self.apply(g, &self.apply(h, x)?)?,
            Side::Right => self.apply(h, &self.apply(g, x)?)?,
        };
        Ok(self.space.distance(&lhs, &rhs))
    }
}

/// Residual of the Poisson-action criterion
/// `s(X){F,H} - {s(X)F, H} - {F, s(X)H} - sum_ij delta(X)_ij (s(e_i)F)(s(e_j)H)`
/// for chart-affine `F`, `H` with differentials `alpha`, `beta` at `x`,
/// normalized by `|alpha| |beta| max(1, |X|)`.
#[allow(clippy::too_many_arguments)]
pub fn poisson_action_residual(
    action: &Action,
    delta_x: &DMatrix<f64>,
    xa: &DVector<f64>,
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let m = action.space.as_ref();
    let dim = m.dim();
    let zero = DVector::zeros(dim);
    let outer = outer_cfg(cfg);
    let p0 = m.bivector(x)?;
    let v0 = action.generator(xa, x, cfg)?;
    let d_bracket = gradient(
        |z: &DVector<f64>| Ok(alpha.dot(&(m.bivector_in_chart(x, z)? * beta))),
        &zero,
        cfg,
    )?;
    let lhs = d_bracket.dot(&v0);
    let d_sf = gradient(
        |z: &DVector<f64>| Ok(alpha.dot(&action.generator_in_chart(xa, x, z, cfg)?)),
        &zero,
        &outer,
    )?;
    let d_sh = gradient(
        |z: &DVector<f64>| Ok(beta.dot(&action.generator_in_chart(xa, x, z, cfg)?)),
        &zero,
        &outer,
    )?;
    let t1 = d_sf.dot(&(&p0 * beta));
    let t2 = alpha.dot(&(&p0 * d_sh));
    let n = action.group.dim();
    let mut s_f = DVector::zeros(n);
    let mut s_h = DVector::zeros(n);
    for i in 0..n {
        let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let v = action.generator(&e, x, cfg)?;
        s_f[i] = alpha.dot(&v);
        s_h[i] = beta.dot(&v);
    }
    let dt = s_f.dot(&(delta_x * s_h));
    let scale = alpha.norm() * beta.norm() * xa.norm().max(1.0);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - t1 - t2 - dt).abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::tests::su2_double;
    use crate::bialgebra::{DoubleGroup, DressKind};
    use crate::lie::{LieAlgebraData, Membership};
    use crate::numerics::Sampler;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn su2_pl(dg: &DoubleGroup) -> GroupSpace {
        let d2 = dg.clone();
        GroupSpace::new(dg.g().clone(), Arc::new(move |g| d2.pi_g(g)))
    }

    fn gstar_pl(dg: &DoubleGroup) -> GroupSpace {
        let d2 = dg.clone();
        GroupSpace::new(dg.gstar().clone(), Arc::new(move |u| d2.pi_gstar(u)))
    }

    fn so2() -> MatrixGroup {
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        MatrixGroup::new(
            "SO(2)",
            LieAlgebraData::abelian(1),
            vec![rot],
            vec![Membership::Orthogonal],
        )
        .unwrap()
    }

    #[test]
    fn sharp_basics() {
        let m = EuclideanSpace::symplectic(2);
        let x = DVector::zeros(4);
        assert_eq!(
            sharp(&m, &DVector::zeros(4), &x).unwrap(),
            DVector::zeros(4)
        );
        let mut s = Sampler::new(1);
        let a = s.uniform_box(4, 1.0);
        let b = s.uniform_box(4, 1.0);
        let ab = a.dot(&sharp(&m, &b, &x).unwrap());
        let ba = b.dot(&sharp(&m, &a, &x).unwrap());
        assert!((ab + ba).abs() < 1e-15);
    }

    #[test]
    fn bracket_basics() {
        let dg = su2_double();
        let pl = su2_pl(&dg);
        let e = pl.identity();
        let f = |p: &Point| Ok(p[0] + 2.0 * p[5] * p[5]);
        let g = |p: &Point| Ok(p[9] - p[3]);
        assert!(poisson_bracket(&pl, &f, &f, &e, &cfg()).unwrap().abs() < 1e-10);
        assert!(poisson_bracket(&pl, &f, &g, &e, &cfg()).unwrap().abs() < 1e-12);
        // hand contraction on R^4
        let m = EuclideanSpace::symplectic(2);
        let x = DVector::from_vec(vec![0.3, 0.1, -0.2, 0.5]);
        let f = |p: &Point| Ok(p[0] * p[1]);
        let h = |p: &Point| Ok(p[1] + p[2] * p[2]);
        // df = (x1, x0, 0, 0), dh = (0, 1, 2 x2, 0): pi(df, dh) = df0 dh1 - df1 dh0 + ...
        let expect = x[1] * 1.0;
        assert!((poisson_bracket(&m, &f, &h, &x, &cfg()).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn jacobi_constant_and_perturbed() {
        let m = EuclideanSpace::symplectic(2);
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        assert!(jacobi_tensor_max(&m, &x, &cfg()).unwrap() < 1e-9);
        let bent = EuclideanSpace::new(
            4,
            Arc::new(|x: &DVector<f64>| {
                let mut p = DMatrix::zeros(4, 4);
                p[(0, 2)] = 1.0;
                p[(2, 0)] = -1.0;
                p[(1, 3)] = 1.0;
                p[(3, 1)] = -1.0;
                p[(0, 1)] = x[0];
                p[(1, 0)] = -x[0];
                p
            }),
        );
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        let r = jacobi_residual(&bent, &x, &e(0), &e(1), &e(2), &cfg()).unwrap();
        assert!(r > 1e-2, "{r}");
    }

    #[test]
    fn su2_poisson_lie_jacobi_and_multiplicativity() {
        let dg = su2_double();
        let pl = su2_pl(&dg);
        let mut s = Sampler::new(2);
        let e = dg.g().identity();
        assert!(pl.pi(&e).unwrap().amax() < 1e-15);
        for _ in 0..50 {
            let g = dg.g().exp(&s.uniform_box(3, 0.5));
            let h = dg.g().exp(&s.uniform_box(3, 0.5));
            // 3-dim: the only triple is (0, 1, 2)
            assert!(jacobi_tensor_max(&pl, &pl.to_point(&g), &cfg()).unwrap() < 1e-6);
            assert!(multiplicativity_residual(&pl, &g, &h, &cfg()).unwrap() < 1e-6);
            assert!(multiplicativity_residual(&pl, &g, &e, &cfg()).unwrap() < 1e-9);
            // left-trivialized closed form of multiplicativity
            let a = dg.g().ad_matrix(&h.inverse()).unwrap();
            let closed = pl.pi(&g.mul(&h)).unwrap()
                - pl.pi(&h).unwrap()
                - &a * pl.pi(&g).unwrap() * a.transpose();
            assert!(closed.amax() < 1e-12);
        }
        let zero = GroupSpace::zero(dg.g().clone());
        let g = dg.g().exp(&s.uniform_box(3, 0.5));
        assert_eq!(
            multiplicativity_residual(&zero, &g, &g, &cfg()).unwrap(),
            0.0
        );
    }

    #[test]
    fn gstar_poisson_lie_jacobi() {
        let dg = su2_double();
        let pl = gstar_pl(&dg);
        let mut s = Sampler::new(3);
        for _ in 0..10 {
            let u = dg.gstar().exp(&s.uniform_box(3, 0.5));
            assert!(jacobi_tensor_max(&pl, &pl.to_point(&u), &cfg()).unwrap() < 1e-6);
        }
    }

    #[test]
    fn poisson_map_trivial_cases() {
        let m = EuclideanSpace::symplectic(1);
        let x = DVector::from_vec(vec![0.2, -0.4]);
        assert!(
            poisson_map_residual(&|p: &Point| Ok(p.clone()), &m, &m, &x, &cfg()).unwrap() < 1e-10
        );
        let pt = EuclideanSpace::point();
        assert_eq!(
            poisson_map_residual(&|_p: &Point| Ok(DVector::zeros(0)), &m, &pt, &x, &cfg()).unwrap(),
            0.0
        );
    }

    #[test]
    fn linearization_matches_tables() {
        let dg = su2_double();
        let b = dg.bialgebra();
        let pl = su2_pl(&dg);
        let dual = gstar_pl(&dg);
        for i in 0..3 {
            let x = DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
            let d = linearization_delta(&pl, &x, &cfg()).unwrap();
            let dd = linearization_delta(&dual, &x, &cfg()).unwrap();
            for j in 0..3 {
                for k in 0..3 {
                    assert!((d[(j, k)] - b.f(j, k, i)).abs() < 1e-5);
                    assert!((dd[(j, k)] - b.c(j, k, i)).abs() < 1e-5);
                }
            }
        }
        let x = DVector::from_vec(vec![0.3, -0.7, 0.2]);
        let y = DVector::from_vec(vec![-0.1, 0.4, 0.9]);
        let lin = linearization_delta(&pl, &(&x * 2.0 + &y), &cfg()).unwrap()
            - linearization_delta(&pl, &x, &cfg()).unwrap() * 2.0
            - linearization_delta(&pl, &y, &cfg()).unwrap();
        assert!(lin.amax() < 1e-8);
        let zero = GroupSpace::zero(dg.g().clone());
        assert_eq!(linearization_delta(&zero, &x, &cfg()).unwrap().amax(), 0.0);
    }

    #[test]
    fn infinitesimal_vs_global_dressing() {
        let dg = su2_double();
        let pl = su2_pl(&dg);
        let dual = gstar_pl(&dg);
        let mut s = Sampler::new(4);
        let e = dg.g().identity();
        let xi = DVector::from_vec(vec![0.3, -0.5, 0.8]);
        assert!(
            infinitesimal_dressing(&pl, &xi, Side::Left, &e)
                .unwrap()
                .amax()
                < 1e-15
        );
        for _ in 0..5 {
            let g = dg.g().exp(&s.uniform_box(3, 0.5));
            let u = dg.gstar().exp(&s.uniform_box(3, 0.5));
            for (side, kind) in [
                (Side::Left, DressKind::GstarOnGLeft),
                (Side::Right, DressKind::GstarOnGRight),
            ] {
                let inf = infinitesimal_dressing(&pl, &xi, side, &g).unwrap();
                let glob = curve_derivative(
                    |t: f64| {
                        dg.g()
                            .local(&g, &dg.dress(&dg.gstar().exp(&(&xi * t)), &g, kind)?)
                    },
                    &cfg(),
                )
                .unwrap();
                assert!((inf - glob).amax() < 1e-5);
            }
            for (side, kind) in [
                (Side::Left, DressKind::GOnGstarLeft),
                (Side::Right, DressKind::GOnGstarRight),
            ] {
                let inf = infinitesimal_dressing(&dual, &xi, side, &u).unwrap();
                let glob = curve_derivative(
                    |t: f64| {
                        dg.gstar()
                            .local(&u, &dg.dress(&dg.g().exp(&(&xi * t)), &u, kind)?)
                    },
                    &cfg(),
                )
                .unwrap();
                assert!((inf - glob).amax() < 1e-5);
            }
            // rho(Coad(g) xi)(g) + lambda(xi)(g) = 0
            let coad = dg.g().coadjoint(&g, &xi).unwrap();
            let r = infinitesimal_dressing(&pl, &coad, Side::Right, &g).unwrap()
                + infinitesimal_dressing(&pl, &xi, Side::Left, &g).unwrap();
            assert!(r.amax() < 1e-10);
        }
    }

    #[test]
    fn rotation_action_is_poisson() {
        // SO(2) with zero structure rotating the symplectic plane
        let g = so2();
        let space: Arc<dyn PoissonManifold> = Arc::new(EuclideanSpace::symplectic(1));
        let act = Action::new(
            Side::Left,
            g.clone(),
            space,
            Arc::new(|r: &GroupPoint, x: &Point| Ok(&r.0 * x)),
        );
        let x = DVector::from_vec(vec![0.4, -0.3]);
        let delta = DMatrix::zeros(1, 1);
        let xa = DVector::from_element(1, 0.7);
        let a = DVector::from_vec(vec![1.0, 0.5]);
        let b = DVector::from_vec(vec![-0.2, 1.0]);
        assert!(poisson_action_residual(&act, &delta, &xa, &a, &b, &x, &cfg()).unwrap() < 1e-5);
        let h = g.exp(&DVector::from_element(1, 0.3));
        assert!(act.composition_residual(&h, &h, &x).unwrap() < 1e-12);
        assert!(act.identity_residual(&x).unwrap() < 1e-15);
        let trivial = Action::new(
            Side::Left,
            g,
            Arc::new(EuclideanSpace::symplectic(1)),
            Arc::new(|_r: &GroupPoint, x: &Point| Ok(x.clone())),
        );
        assert_eq!(
            poisson_action_residual(&trivial, &delta, &xa, &a, &b, &x, &cfg()).unwrap(),
            0.0
        );
    }

    #[test]
    fn product_chart_roundtrip() {
        let dg = su2_double();
        let d = GroupSpace::zero(dg.d().clone());
        let p = ProductSpace::new(Arc::new(EuclideanSpace::symplectic(1)), Arc::new(d.clone()));
        let base = p.join(&DVector::from_vec(vec![0.1, 0.2]), &d.identity());
        let z = DVector::from_vec(vec![0.3, -0.1, 0.2, 0.1, -0.3, 0.05, 0.1, 0.2]);
        let q = p.retract(&base, &z).unwrap();
        assert!((p.local(&base, &q).unwrap() - &z).amax() < 1e-10);
        let fd = differential(
            |w: &DVector<f64>| p.local(&base, &p.retract(&q, w)?),
            &DVector::zeros(8),
            &cfg(),
        )
        .unwrap();
        assert!((fd - p.transition(&base, &z).unwrap()).amax() < 1e-8);
    }
}
