//! Momentum maps into dual groups and how they combine under products.
//! Also home to the subgroup data and the canonical actions `r`, `l` of the
//! double on itself.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bialgebra::{DoubleGroup, DressKind, FactorOrder, PmSign};
use crate::error::{Error, Result};
use crate::lie::{GroupPoint, LieAlgebraData, MatrixGroup, Side};
use crate::numerics::{curve_derivative, differential, Sampler, ToleranceConfig};
use crate::poisson::{
    infinitesimal_dressing, poisson_map_residual, Action, AdditiveGroup, GroupManifold, GroupSpace,
    MapFn, Point, ProductSpace,
};

/// `J: P -> G*` attached to an action.
#[derive(Clone)]
pub struct MomentumMap {
    pub action: Action,
    pub dual: Arc<dyn GroupManifold>,
    pub eval: MapFn,
}

impl MomentumMap {
    pub fn new(action: Action, dual: Arc<dyn GroupManifold>, eval: MapFn) -> Self {
        Self { action, dual, eval }
    }

    pub fn value(&self, x: &Point) -> Result<Point> {
        (self.eval)(x)
    }

    /// `J^* X^l` (left) or `J^* X^r` (right) at `x`, in the chart at `x`.
    pub fn pullback(
        &self,
        xa: &DVector<f64>,
        side: Side,
        x: &Point,
        cfg: &ToleranceConfig,
    ) -> Result<DVector<f64>> {
        let space = self.action.space.as_ref();
        let u = self.value(x)?;
        let tj = differential(
            |z: &DVector<f64>| self.dual.local(&u, &self.value(&space.retract(x, z)?)?),
            &DVector::zeros(space.dim()),
            cfg,
        )?;
        Ok(tj.transpose() * self.dual.invariant_form(xa, side, &u)?)
    }
}

/// Left actions: `|s(X) - pi^sharp(J^* X^l)|`; right actions:
/// `|s(X) + pi^sharp(J^* X^r)|`; both normalized by `max(1, |X|)`.
pub fn momentum_residual(
    j: &MomentumMap,
    xa: &DVector<f64>,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let space = j.action.space.as_ref();
    let gen = j.action.generator(xa, x, cfg)?;
    let side = j.action.side;
    let beta = j.pullback(xa, side, x, cfg)?;
    let s = space.bivector(x)? * beta;
    let r = match side {
        Side::Left => gen - s,
        Side::Right => gen + s,
    };
    Ok(r.amax() / xa.norm().max(1.0))
}

/// `J` is a Poisson map into the dual group with its canonical structure.
pub fn equivariance_residual(j: &MomentumMap, x: &Point, cfg: &ToleranceConfig) -> Result<f64> {
    poisson_map_residual(
        &|p: &Point| j.value(p),
        j.action.space.as_ref(),
        j.dual.as_ref(),
        x,
        cfg,
    )
}

/// Left dressing `lambda_u(g)` of the dual group on the acting group.
pub type Dressing = Arc<dyn Fn(&Point, &GroupPoint) -> Result<GroupPoint> + Send + Sync>;

/// Dressing of a zero-structure group: trivial.
pub fn trivial_dressing() -> Dressing {
    Arc::new(|_u: &Point, g: &GroupPoint| Ok(g.clone()))
}

/// Left dressing of `G*` on `G` through the double.
pub fn double_dressing(dg: &DoubleGroup) -> Dressing {
    let dg = dg.clone();
    let gs = GroupSpace::zero(dg.gstar().clone());
    Arc::new(move |u: &Point, g: &GroupPoint| dg.dress(&gs.to_group(u), g, DressKind::GstarOnGLeft))
}

/// Right Hamiltonian action turned into a left one:
/// `s~(g, p) = s(p, [lambda_{J(p)}(g)]^-1)`, with the same momentum map.
pub fn right_to_left(
    sigma: &Action,
    j: &MomentumMap,
    dressing: Dressing,
) -> Result<(Action, MomentumMap)> {
    if sigma.side != Side::Right {
        return Err(Error::Unsupported(
            "right_to_left expects a right action".into(),
        ));
    }
    let s = sigma.clone();
    let jj = j.clone();
    let eval = Arc::new(move |g: &GroupPoint, p: &Point| {
        let gd = dressing(&jj.value(p)?, g)?;
        s.apply(&gd.inverse(), p)
    });
    let left = Action::new(Side::Left, sigma.group.clone(), sigma.space.clone(), eval);
    let mom = MomentumMap::new(left.clone(), j.dual.clone(), j.eval.clone());
    Ok((left, mom))
}

/// Product of two left Hamiltonian actions:
/// `s(g, (p1, p2)) = (s1(lambda_{J2(p2)}(g), p1), s2(g, p2))` and
/// `J = J1(p1) J2(p2)`.
pub fn product_action(
    s1: &Action,
    j1: &MomentumMap,
    s2: &Action,
    j2: &MomentumMap,
    dressing: Dressing,
) -> Result<(Action, MomentumMap, Arc<ProductSpace>)> {
    if s1.side != Side::Left || s2.side != Side::Left {
        return Err(Error::Unsupported(
            "product_action expects left actions".into(),
        ));
    }
    let space = Arc::new(ProductSpace::new(s1.space.clone(), s2.space.clone()));
    let (a1, a2, jj2, sp) = (s1.clone(), s2.clone(), j2.clone(), space.clone());
    let eval = Arc::new(move |g: &GroupPoint, p: &Point| {
        let (p1, p2) = sp.split(p);
        let g1 = dressing(&jj2.value(&p2)?, g)?;
        Ok(sp.join(&a1.apply(&g1, &p1)?, &a2.apply(g, &p2)?))
    });
    let action = Action::new(Side::Left, s1.group.clone(), space.clone(), eval);
    let (jj1, jj2, sp, dual) = (j1.clone(), j2.clone(), space.clone(), j1.dual.clone());
    let jeval = Arc::new(move |p: &Point| {
        let (p1, p2) = sp.split(p);
        Ok(dual.mul(&jj1.value(&p1)?, &jj2.value(&p2)?))
    });
    let mom = MomentumMap::new(action.clone(), j1.dual.clone(), jeval);
    Ok((action, mom, space))
}

/// Closed form of the projection `i*: G* -> H*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IStar {
    /// Component `a` is `scale_a * ln(M[row_a, col_a])` of the matrix of `u`.
    EntryLog { entries: Vec<(usize, usize, f64)> },
    /// Selected coordinates of `log(u)`; exact for additive `G*`.
    Linear { coords: Vec<usize> },
}

/// A closed subgroup `H` of `G` with zero Poisson structure. Carries the
/// projection `i*` onto the additive dual `H*` together with its kernel `H°`
/// and a section `s*`.
#[derive(Clone)]
pub struct SubgroupData {
    pub h: MatrixGroup,
    pub h_indices: Vec<usize>,
    /// `i_*: h -> g` as an `n x k` matrix.
    pub inclusion: DMatrix<f64>,
    pub istar: IStar,
    pub hstar: Arc<AdditiveGroup>,
    pub hcirc_indices: Vec<usize>,
    pub sstar_indices: Vec<usize>,
    gstar: MatrixGroup,
    g: MatrixGroup,
}

impl SubgroupData {
    pub fn new(
        g: &MatrixGroup,
        gstar: &MatrixGroup,
        h_indices: Vec<usize>,
        istar: IStar,
        hcirc_indices: Vec<usize>,
        sstar_indices: Vec<usize>,
    ) -> Result<Self> {
        let n = g.dim();
        let k = h_indices.len();
        for &i in h_indices.iter().chain(&hcirc_indices).chain(&sstar_indices) {
            if i >= n {
                return Err(Error::ParseError(format!(
                    "subgroup index {i} out of range"
                )));
            }
        }
        if sstar_indices.len() != k {
            return Err(Error::DimError {
                expected: k,
                got: sstar_indices.len(),
            });
        }
        if hcirc_indices.len() + k != n {
            return Err(Error::DimError {
                expected: n - k,
                got: hcirc_indices.len(),
            });
        }
        let basis: Vec<DMatrix<f64>> = h_indices.iter().map(|&i| g.basis()[i].clone()).collect();
        let labels = h_indices
            .iter()
            .map(|&i| g.algebra().labels()[i].clone())
            .collect();
        let alg = LieAlgebraData::from_matrices(labels, &basis)?;
        let h = MatrixGroup::new("H", alg, basis, g.membership().to_vec())?;
        let mut inclusion = DMatrix::zeros(n, k);
        for (a, &i) in h_indices.iter().enumerate() {
            inclusion[(i, a)] = 1.0;
        }
        let dim_istar = match &istar {
            IStar::EntryLog { entries } => entries.len(),
            IStar::Linear { coords } => coords.len(),
        };
        if dim_istar != k {
            return Err(Error::DimError {
                expected: k,
                got: dim_istar,
            });
        }
        Ok(Self {
            h,
            h_indices,
            inclusion,
            istar,
            hstar: Arc::new(AdditiveGroup::new(k)),
            hcirc_indices,
            sstar_indices,
            gstar: gstar.clone(),
            g: g.clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.h_indices.len()
    }

    pub fn istar(&self, u: &GroupPoint) -> Result<DVector<f64>> {
        match &self.istar {
            IStar::EntryLog { entries } => entries
                .iter()
                .map(|&(r, c, s)| {
                    let v = u.0[(r, c)];
                    if v <= 0.0 {
                        Err(Error::LogDomainError(format!(
                            "entry ({r},{c}) = {v} is not positive"
                        )))
                    } else {
                        Ok(s * v.ln())
                    }
                })
                .collect::<Result<Vec<f64>>>()
                .map(DVector::from_vec),
            IStar::Linear { coords } => {
                let l = self.gstar.log(u)?;
                Ok(DVector::from_iterator(
                    coords.len(),
                    coords.iter().map(|&i| l[i]),
                ))
            }
        }
    }

    /// Embedding of `h` in `g`.
    pub fn include(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.inclusion * y
    }

    pub fn h_exp(&self, y: &DVector<f64>) -> GroupPoint {
        self.g.exp(&self.include(y))
    }

    fn gstar_from(&self, idx: &[usize], t: &DVector<f64>) -> GroupPoint {
        let mut x = DVector::zeros(self.gstar.dim());
        for (a, &i) in idx.iter().enumerate() {
            x[i] = t[a];
        }
        self.gstar.exp(&x)
    }

    /// Point of `H°` from coordinates on its algebra.
    pub fn hcirc(&self, t: &DVector<f64>) -> GroupPoint {
        self.gstar_from(&self.hcirc_indices, t)
    }

    /// Section `s*: H* -> G*`.
    pub fn sstar(&self, t: &DVector<f64>) -> GroupPoint {
        self.gstar_from(&self.sstar_indices, t)
    }

    pub fn morphism_residual(&self, u: &GroupPoint, v: &GroupPoint) -> Result<f64> {
        Ok((self.istar(&u.mul(v))? - self.istar(u)? - self.istar(v)?).amax())
    }

    pub fn hcirc_residual(&self, t: &DVector<f64>) -> Result<f64> {
        Ok(self.istar(&self.hcirc(t))?.amax())
    }

    pub fn section_residual(&self, t: &DVector<f64>) -> Result<f64> {
        Ok((self.istar(&self.sstar(t))? - t).amax())
    }
}

/// `pi_G` on `H`: must vanish for the zero induced structure to be valid.
pub fn subgroup_zero_structure_residual(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    y: &DVector<f64>,
) -> Result<f64> {
    Ok(dg.pi_g(&sub.h_exp(y))?.amax())
}

pub fn pi_plus_space(dg: &DoubleGroup) -> Arc<GroupSpace> {
    let d2 = dg.clone();
    Arc::new(GroupSpace::new(
        dg.d().clone(),
        Arc::new(move |d| d2.pi_pm(d, PmSign::Plus)),
    ))
}

pub fn g_space(dg: &DoubleGroup) -> Arc<GroupSpace> {
    let d2 = dg.clone();
    Arc::new(GroupSpace::new(
        dg.g().clone(),
        Arc::new(move |g| d2.pi_g(g)),
    ))
}

pub fn gstar_space(dg: &DoubleGroup) -> Arc<GroupSpace> {
    let d2 = dg.clone();
    Arc::new(GroupSpace::new(
        dg.gstar().clone(),
        Arc::new(move |u| d2.pi_gstar(u)),
    ))
}

/// `r_h(d) = d h` with `J_r(d) = (i* u)^-1`, `d = g u`. Without a subgroup
/// the whole of `G` acts and `J_r(d) = u^-1`.
pub fn canonical_right_action(
    dg: &DoubleGroup,
    sub: Option<&SubgroupData>,
) -> (Action, MomentumMap) {
    let space = pi_plus_space(dg);
    let acting = sub.map(|s| s.h.clone()).unwrap_or_else(|| dg.g().clone());
    let sp = space.clone();
    let eval = Arc::new(move |h: &GroupPoint, d: &Point| Ok(sp.to_point(&sp.to_group(d).mul(h))));
    let action = Action::new(Side::Right, acting, space.clone(), eval);
    let (d2, sp) = (dg.clone(), space.clone());
    match sub {
        Some(s) => {
            let s2 = s.clone();
            let jeval = Arc::new(move |d: &Point| {
                let (_, u) = d2.factorize(&sp.to_group(d), FactorOrder::GU)?;
                Ok(-s2.istar(&u)?)
            });
            (
                action.clone(),
                MomentumMap::new(action, s.hstar.clone(), jeval),
            )
        }
        None => {
            let gs = gstar_space(dg);
            let gs2 = gs.clone();
            let jeval = Arc::new(move |d: &Point| {
                let (_, u) = d2.factorize(&sp.to_group(d), FactorOrder::GU)?;
                Ok(gs2.to_point(&u.inverse()))
            });
            (action.clone(), MomentumMap::new(action, gs, jeval))
        }
    }
}

/// `J_l(d) = rho_{g^-1}(u)` for `d = g u`.
pub fn j_l_formula(dg: &DoubleGroup, d: &GroupPoint) -> Result<GroupPoint> {
    let (g, u) = dg.factorize(d, FactorOrder::GU)?;
    dg.dress(&g.inverse(), &u, DressKind::GOnGstarRight)
}

/// `J_l(d)` as the first factor of `d = u1 g1`.
pub fn j_l_projection(dg: &DoubleGroup, d: &GroupPoint) -> Result<GroupPoint> {
    Ok(dg.factorize(d, FactorOrder::UG)?.0)
}

/// `l_k(d) = lambda_{J_l(d)}(k) g u`.
pub fn l_apply(dg: &DoubleGroup, k: &GroupPoint, d: &GroupPoint) -> Result<GroupPoint> {
    let jl = j_l_projection(dg, d)?;
    Ok(dg.dress(&jl, k, DressKind::GstarOnGLeft)?.mul(d))
}

pub fn canonical_left_action(dg: &DoubleGroup) -> (Action, MomentumMap) {
    let space = pi_plus_space(dg);
    let (d2, sp) = (dg.clone(), space.clone());
    let eval = Arc::new(move |k: &GroupPoint, d: &Point| {
        Ok(sp.to_point(&l_apply(&d2, k, &sp.to_group(d))?))
    });
    let action = Action::new(Side::Left, dg.g().clone(), space.clone(), eval);
    let gs = gstar_space(dg);
    let (d2, sp, gs2) = (dg.clone(), space, gs.clone());
    let jeval = Arc::new(move |d: &Point| Ok(gs2.to_point(&j_l_projection(&d2, &sp.to_group(d))?)));
    (action.clone(), MomentumMap::new(action, gs, jeval))
}

/// Worst residuals of the three identities
/// (1) `i_* Coad(w^-1) Y = Coad(u) i_* Y`, `w = (i* u)^-1`, with the
///     coadjoint action of the additive `H*` being the identity;
/// (2) `rho(Coad(g) xi)(g) + lambda(xi)(g) = 0`;
/// (3) `Ad_D(u)(X + 0) = T_e rho_{u^-1}(X) + (-T_u R_{u^-1} lambda(X)(u))`.
pub fn pl_identity_residuals(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    samples: &[(GroupPoint, GroupPoint, DVector<f64>, DVector<f64>)],
    cfg: &ToleranceConfig,
) -> Result<[f64; 3]> {
    let n = dg.n();
    let gsp = g_space(dg);
    let usp = gstar_space(dg);
    let mut worst = [0.0_f64; 3];
    for (g, u, v, y) in samples {
        // (1)
        let iy = sub.include(y);
        let lhs = iy.clone();
        let rhs = dg.gstar().coadjoint(u, &iy)?;
        worst[0] = worst[0].max((lhs - rhs).amax());
        // (2): v plays xi in g*
        let coad = dg.g().coadjoint(g, v)?;
        let r = infinitesimal_dressing(&gsp, &coad, Side::Right, g)?
            + infinitesimal_dressing(&gsp, v, Side::Left, g)?;
        worst[1] = worst[1].max(r.amax());
        // (3): v plays X in g
        let mut xd = DVector::zeros(2 * n);
        xd.rows_mut(0, n).copy_from(v);
        let lhs = dg.d().ad_matrix(u)? * xd;
        let uinv = u.inverse();
        let t_rho = curve_derivative(
            |t: f64| {
                dg.g()
                    .log(&dg.dress(&uinv, &dg.g().exp(&(v * t)), DressKind::GstarOnGRight)?)
            },
            cfg,
        )?;
        let lam = infinitesimal_dressing(&usp, v, Side::Left, u)?;
        let second = -(dg.gstar().ad_matrix(u)? * lam);
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(&t_rho);
        rhs.rows_mut(n, n).copy_from(&second);
        worst[2] = worst[2].max((lhs - rhs).amax());
    }
    Ok(worst)
}

/// Residuals of (1) `J_r l_k = J_r`, (2) `J_l r_h = J_l`,
/// (3) `r_h l_k = l_k r_h` on the double.
pub fn double_invariance_residuals(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    samples: &[(GroupPoint, GroupPoint, GroupPoint)],
) -> Result<[f64; 3]> {
    let mut worst = [0.0_f64; 3];
    let jr = |d: &GroupPoint| -> Result<DVector<f64>> {
        let (_, u) = dg.factorize(d, FactorOrder::GU)?;
        Ok(-sub.istar(&u)?)
    };
    for (k, h, d) in samples {
        let lk = l_apply(dg, k, d)?;
        worst[0] = worst[0].max((jr(&lk)? - jr(d)?).amax());
        let rh = d.mul(h);
        worst[1] = worst[1].max(j_l_projection(dg, &rh)?.distance(&j_l_projection(dg, d)?));
        let a = l_apply(dg, k, d)?.mul(h);
        let b = l_apply(dg, k, &rh)?;
        worst[2] = worst[2].max(a.distance(&b));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitReport {
    pub samples: usize,
    pub right_action: f64,
    pub left_action: f64,
    pub j_right: f64,
    pub j_left: f64,
    /// Deviation of the right action from the formula with `Coad(h)` in
    /// place of `Coad(h^-1)`; must be large.
    pub flipped_control: f64,
}

impl ClassicalLimitReport {
    pub fn max_deviation(&self) -> f64 {
        self.right_action
            .max(self.left_action)
            .max(self.j_right)
            .max(self.j_left)
    }
}

/// Compares the canonical actions on a zero-structure double with the
/// cotangent-lift closed forms `(gh, Coad(h^-1) mu)`, `(kg, mu)`,
/// `-i* mu`, `Coad(g) mu`.
pub fn classical_limit_oracle(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    sampler: &mut Sampler,
    count: usize,
    half_width: f64,
) -> Result<ClassicalLimitReport> {
    if !dg.bialgebra().is_zero_structure() {
        return Err(Error::Unsupported(
            "classical limit needs a zero Poisson structure on G".into(),
        ));
    }
    let n = dg.n();
    let k = sub.k();
    let (ra, jr) = canonical_right_action(dg, Some(sub));
    let (la, jl) = canonical_left_action(dg);
    let sp = pi_plus_space(dg);
    let mut rep = ClassicalLimitReport {
        samples: count,
        right_action: 0.0,
        left_action: 0.0,
        j_right: 0.0,
        j_left: 0.0,
        flipped_control: 0.0,
    };
    let mu_of = |u: &GroupPoint| dg.gstar().log(u);
    for _ in 0..count {
        let gx = sampler.uniform_box(n, half_width);
        let mu = sampler.uniform_box(n, half_width);
        let y = sampler.uniform_box(k, half_width);
        let kx = sampler.uniform_box(n, half_width);
        let g = dg.g().exp(&gx);
        let u = dg.gstar().exp(&mu);
        let h = sub.h_exp(&y);
        let kk = dg.g().exp(&kx);
        let d = sp.to_point(&g.mul(&u));

        let rd = sp.to_group(&ra.apply(&h, &d)?);
        let (g1, u1) = dg.factorize(&rd, FactorOrder::GU)?;
        let coad_hinv = dg.g().coadjoint(&h.inverse(), &mu)?;
        rep.right_action = rep
            .right_action
            .max(g1.distance(&g.mul(&h)))
            .max((mu_of(&u1)? - &coad_hinv).amax());
        let flipped = dg.g().coadjoint(&h, &mu)?;
        rep.flipped_control = rep.flipped_control.max((mu_of(&u1)? - flipped).amax());

        let ld = sp.to_group(&la.apply(&kk, &d)?);
        let (g2, u2) = dg.factorize(&ld, FactorOrder::GU)?;
        rep.left_action = rep
            .left_action
            .max(g2.distance(&kk.mul(&g)))
            .max((mu_of(&u2)? - &mu).amax());

        let i_mu = DVector::from_iterator(k, sub.h_indices.iter().map(|&i| mu[i]));
        rep.j_right = rep.j_right.max((jr.value(&d)? + i_mu).amax());
        let jl_val = GroupSpace::zero(dg.gstar().clone()).to_group(&jl.value(&d)?);
        rep.j_left = rep
            .j_left
            .max((mu_of(&jl_val)? - dg.g().coadjoint(&g, &mu)?).amax());
    }
    Ok(rep)
}
