//! Sub-characteristic distributions, the check space `P x D`, the constraint
//! set `J^-1(e*)` with its gauge slice, and the induced Poisson manifold.
//!
//! The quotient is represented pointwise: a class is stored as its canonical
//! representative, obtained by Newton projection onto the constraint set
//! followed by Newton gauge fixing along the `H`-orbit.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bialgebra::{DoubleGroup, DressKind, FactorOrder, PmSign};
use crate::error::{Error, Result};
use crate::lie::{GroupPoint, Side};
use crate::momentum::{
    canonical_right_action, double_invariance_residuals, g_space, j_l_formula, j_l_projection,
    l_apply, pi_plus_space, product_action, right_to_left, trivial_dressing, MomentumMap,
    SubgroupData,
};
use crate::numerics::{
    curve_derivative, differential, least_squares, newton_solve, null_space, orthonormal_basis,
    rank_report, span_defect, subspace_intersection, Sampler, ToleranceConfig,
};
use crate::poisson::{
    chart_gradient, linearization_delta, outer_cfg, poisson_bracket, Action, EuclideanSpace,
    GroupManifold, GroupSpace, Manifold, Point, PoissonManifold, ProductSpace,
};

/// Drift of `J` under the residual action above which conventions are wrong.
pub const CONSTRAINT_DRIFT_TOL: f64 = 1e-7;
/// Invariance residual above which a function is rejected by the bracket.
pub const INVARIANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SubcharacteristicReport {
    /// Orthonormal basis of `pi^sharp((TN)°) ∩ TN`.
    pub basis: Vec<DVector<f64>>,
    pub tangent: Vec<DVector<f64>>,
    /// A singular value sat within ten times the cutoff.
    pub unstable: bool,
}

impl SubcharacteristicReport {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// `C_x N` for `N = {c = 0}` at `x`, in the chart at `x`.
pub fn subcharacteristic_basis(
    m: &dyn PoissonManifold,
    constraint: &dyn Fn(&Point) -> Result<DVector<f64>>,
    x: &Point,
    cfg: &ToleranceConfig,
) -> Result<SubcharacteristicReport> {
    let dim = m.dim();
    let c0 = constraint(x)?;
    let off = c0.amax();
    if !c0.is_empty() && off > 1e-8 {
        return Err(Error::MembershipError {
            group: "constraint set".into(),
            residual: off,
        });
    }
    if c0.is_empty() {
        let tangent = (0..dim)
            .map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect();
        return Ok(SubcharacteristicReport {
            basis: Vec::new(),
            tangent,
            unstable: false,
        });
    }
    let a = differential(
        |z: &DVector<f64>| constraint(&m.retract(x, z)?),
        &DVector::zeros(dim),
        cfg,
    )?;
    let tangent = null_space(&a);
    let pi = m.bivector(x)?;
    let pushed = &pi * a.transpose();
    let sharp: Vec<DVector<f64>> = pushed.column_iter().map(|c| c.into_owned()).collect();
    let unstable = rank_report(&a).1 || rank_report(&pushed).1;
    Ok(SubcharacteristicReport {
        basis: subspace_intersection(&sharp, &tangent),
        tangent,
        unstable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanSample {
    pub intersection_rank: usize,
    pub leaf_rank: usize,
    pub characteristic_rank: usize,
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanIntersectionReport {
    pub samples: Vec<CleanSample>,
    /// Some rank changed across the samples.
    pub rank_jump: bool,
    pub unstable: bool,
}

/// Ranks of `TN ∩ S` (S the leaf through x) and of `C N` at each sample;
/// regularity of the induced foliation shows up as rank constancy.
pub fn clean_intersection_report(
    m: &dyn PoissonManifold,
    constraint: &dyn Fn(&Point) -> Result<DVector<f64>>,
    samples: &[Point],
    cfg: &ToleranceConfig,
) -> Result<CleanIntersectionReport> {
    let mut out = Vec::with_capacity(samples.len());
    for x in samples {
        let sc = subcharacteristic_basis(m, constraint, x, cfg)?;
        let pi = m.bivector(x)?;
        let cols: Vec<DVector<f64>> = pi.column_iter().map(|c| c.into_owned()).collect();
        let leaf = orthonormal_basis(&cols);
        let inter = subspace_intersection(&leaf, &sc.tangent);
        out.push(CleanSample {
            intersection_rank: inter.len(),
            leaf_rank: leaf.len(),
            characteristic_rank: sc.rank(),
            unstable: sc.unstable || rank_report(&pi).1,
        });
    }
    let rank_jump = out.windows(2).any(|w| {
        w[0].intersection_rank != w[1].intersection_rank
            || w[0].characteristic_rank != w[1].characteristic_rank
    });
    let unstable = out.iter().any(|s| s.unstable);
    Ok(CleanIntersectionReport {
        samples: out,
        rank_jump,
        unstable,
    })
}

/// The `H`-Hamiltonian Poisson manifold `P` fed into the induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSpace {
    /// A point with constant momentum.
    Point { momentum: Vec<f64> },
    /// `R^2` with `dq ∧ dp`, rotated by `charge . log(h)`, with momentum
    /// `offset - charge |p|^2 / 2`.
    Oscillator { charge: Vec<f64>, offset: Vec<f64> },
}

impl HamiltonianSpace {
    pub fn dim(&self) -> usize {
        match self {
            HamiltonianSpace::Point { .. } => 0,
            HamiltonianSpace::Oscillator { .. } => 2,
        }
    }

    pub fn build(&self, sub: &SubgroupData) -> Result<(Action, MomentumMap)> {
        let k = sub.k();
        let hstar: Arc<dyn GroupManifold> = sub.hstar.clone();
        match self {
            HamiltonianSpace::Point { momentum } => {
                check_len(momentum.len(), k)?;
                let space: Arc<dyn PoissonManifold> = Arc::new(EuclideanSpace::point());
                let act = Action::new(
                    Side::Left,
                    sub.h.clone(),
                    space,
                    Arc::new(|_h, p: &Point| Ok(p.clone())),
                );
                let c = DVector::from_column_slice(momentum);
                let j = MomentumMap::new(act.clone(), hstar, Arc::new(move |_p| Ok(c.clone())));
                Ok((act, j))
            }
            HamiltonianSpace::Oscillator { charge, offset } => {
                check_len(charge.len(), k)?;
                check_len(offset.len(), k)?;
                let space: Arc<dyn PoissonManifold> = Arc::new(EuclideanSpace::symplectic(1));
                let ch = DVector::from_column_slice(charge);
                let (ch1, hg) = (ch.clone(), sub.h.clone());
                let act = Action::new(
                    Side::Left,
                    sub.h.clone(),
                    space,
                    Arc::new(move |h: &GroupPoint, p: &Point| {
                        let phi = ch1.dot(&hg.log(h)?);
                        let (c, s) = (phi.cos(), phi.sin());
                        Ok(DVector::from_vec(vec![
                            c * p[0] - s * p[1],
                            s * p[0] + c * p[1],
                        ]))
                    }),
                );
                let off = DVector::from_column_slice(offset);
                let j = MomentumMap::new(
                    act.clone(),
                    hstar,
                    Arc::new(move |p: &Point| Ok(&off - &ch * (0.5 * p.norm_squared()))),
                );
                Ok((act, j))
            }
        }
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimError { expected, got })
    }
}

/// `P x D` with `s^_h(p, d) = (s(lambda_{J_r(d)}(h), p), d lambda_{J_r(d)}(h)^-1)`,
/// `J^(p, d) = J(p) J_r(d)`, and the residual `G`-action
/// `l^_k(p, d) = (p, l_k(d))` with momentum `L(p, d) = J_l(d)`.
#[derive(Clone)]
pub struct CheckSpace {
    pub space: Arc<ProductSpace>,
    pub p_dim: usize,
    pub action: Action,
    pub momentum: MomentumMap,
    pub residual_action: Action,
    pub residual_momentum: MomentumMap,
}

pub fn build_check_space(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    hs: &HamiltonianSpace,
) -> Result<CheckSpace> {
    let (sigma, j) = hs.build(sub)?;
    let (r, jr) = canonical_right_action(dg, Some(sub));
    // H carries the zero structure, so its dual acts trivially by dressing.
    let (rl, jrl) = right_to_left(&r, &jr, trivial_dressing())?;
    let (action, momentum, space) = product_action(&sigma, &j, &rl, &jrl, trivial_dressing())?;
    let dsp = pi_plus_space(dg);
    let (sp, d2, dsp2) = (space.clone(), dg.clone(), dsp.clone());
    let residual_action = Action::new(
        Side::Left,
        dg.g().clone(),
        space.clone(),
        Arc::new(move |k: &GroupPoint, x: &Point| {
            let (p, d) = sp.split(x);
            Ok(sp.join(&p, &dsp2.to_point(&l_apply(&d2, k, &dsp2.to_group(&d))?)))
        }),
    );
    let gs = crate::momentum::gstar_space(dg);
    let (sp, d2, gs2) = (space.clone(), dg.clone(), gs.clone());
    let residual_momentum = MomentumMap::new(
        residual_action.clone(),
        gs,
        Arc::new(move |x: &Point| {
            let (_, d) = sp.split(x);
            Ok(gs2.to_point(&j_l_projection(&d2, &dsp.to_group(&d))?))
        }),
    );
    Ok(CheckSpace {
        space,
        p_dim: hs.dim(),
        action,
        momentum,
        residual_action,
        residual_momentum,
    })
}

/// `J^-1(e*)/H` through canonical representatives.
#[derive(Clone)]
pub struct ConstraintQuotientModel {
    pub dg: DoubleGroup,
    pub sub: SubgroupData,
    pub check: CheckSpace,
    /// Entries of the `G`-factor matrix set to zero by the gauge.
    pub slice: Vec<(usize, usize)>,
    pub cfg: ToleranceConfig,
    dspace: Arc<GroupSpace>,
}

impl ConstraintQuotientModel {
    pub fn new(
        dg: &DoubleGroup,
        sub: &SubgroupData,
        hs: &HamiltonianSpace,
        slice: Vec<(usize, usize)>,
        cfg: ToleranceConfig,
    ) -> Result<Self> {
        check_len(slice.len(), sub.k())?;
        let m = dg.g().size();
        if slice.iter().any(|&(r, c)| r >= m || c >= m) {
            return Err(Error::ParseError(
                "gauge slice entry outside the matrix".into(),
            ));
        }
        Ok(Self {
            dg: dg.clone(),
            sub: sub.clone(),
            check: build_check_space(dg, sub, hs)?,
            slice,
            cfg,
            dspace: pi_plus_space(dg),
        })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.check.space
    }

    pub fn split(&self, x: &Point) -> (Point, GroupPoint) {
        let (p, d) = self.check.space.split(x);
        (p, self.dspace.to_group(&d))
    }

    pub fn join(&self, p: &Point, d: &GroupPoint) -> Point {
        self.check.space.join(p, &self.dspace.to_point(d))
    }

    /// `J^(x) - e*` in the additive `H*`.
    pub fn constraint(&self, x: &Point) -> Result<DVector<f64>> {
        self.check.momentum.value(x)
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        let sp = self.space();
        let z = newton_solve(
            |z: &DVector<f64>| self.constraint(&sp.retract(x, z)?),
            &DVector::zeros(sp.dim()),
            &self.cfg,
        )?;
        sp.retract(x, &z)
    }

    fn slice_values(&self, x: &Point) -> Result<DVector<f64>> {
        let (_, d) = self.split(x);
        let (g, _) = self.dg.factorize(&d, FactorOrder::GU)?;
        Ok(DVector::from_iterator(
            self.slice.len(),
            self.slice.iter().map(|&(r, c)| g.0[(r, c)]),
        ))
    }

    /// Canonical point of the `H`-orbit through `x` and the parameter `y`
    /// with `s^_{exp y}(x)` equal to it.
    pub fn gauge_with_parameter(&self, x: &Point) -> Result<(Point, DVector<f64>)> {
        let act = |y: &DVector<f64>| self.check.action.apply(&self.sub.h_exp(y), x);
        let y = newton_solve(
            |y: &DVector<f64>| self.slice_values(&act(y)?),
            &DVector::zeros(self.sub.k()),
            &self.cfg,
        )?;
        Ok((act(&y)?, y))
    }

    pub fn gauge(&self, x: &Point) -> Result<Point> {
        Ok(self.gauge_with_parameter(x)?.0)
    }

    pub fn canonical(&self, x: &Point) -> Result<Point> {
        self.gauge(&self.project(x)?)
    }

    /// Point of `J^-1(e*)`: `p` from the box, `d = g s*(J(p)) h°`.
    pub fn sample_constraint(&self, s: &mut Sampler, half_width: f64) -> Result<Point> {
        let n = self.dg.n();
        let p = s.uniform_box(self.check.p_dim, half_width);
        let jp = self.p_momentum(&p)?;
        let g = self.dg.g().exp(&s.uniform_box(n, half_width));
        let t = s.uniform_box(self.sub.hcirc_indices.len(), half_width);
        let u = self.sub.sstar(&jp).mul(&self.sub.hcirc(&t));
        Ok(self.join(&p, &g.mul(&u)))
    }

    /// `J(p)`, read off as `J^(p, e)` since `J_r(e) = e*`.
    pub fn p_momentum(&self, p: &Point) -> Result<DVector<f64>> {
        self.constraint(&self.join(p, &self.dg.d().identity()))
    }

    /// Largest rate of change of `f` along the `s^`-generators of a basis of `h`.
    pub fn invariance_residual(&self, f: &dyn Fn(&Point) -> Result<f64>, x: &Point) -> Result<f64> {
        let k = self.sub.k();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            let e = DVector::from_fn(k, |i, _| if i == a { 1.0 } else { 0.0 });
            let d = curve_derivative(
                |t: f64| {
                    Ok(DVector::from_element(
                        1,
                        f(&self.check.action.apply(&self.sub.h_exp(&(&e * t)), x)?)?,
                    ))
                },
                &self.cfg,
            )?;
            worst = worst.max(d[0].abs());
        }
        Ok(worst)
    }

    fn assert_invariant(&self, f: &dyn Fn(&Point) -> Result<f64>, x: &Point) -> Result<()> {
        let r = self.invariance_residual(f, x)?;
        if r > INVARIANCE_TOL {
            Err(Error::NotInvariant(r))
        } else {
            Ok(())
        }
    }

    /// The ambient bracket of the extensions `F o canonical`, `H o canonical`
    /// at `x`, without the invariance assertion.
    fn ambient_bracket(
        &self,
        f: &dyn Fn(&Point) -> Result<f64>,
        h: &dyn Fn(&Point) -> Result<f64>,
        x: &Point,
        cfg: &ToleranceConfig,
    ) -> Result<f64> {
        let ft = |y: &Point| f(&self.canonical(y)?);
        let ht = |y: &Point| h(&self.canonical(y)?);
        poisson_bracket(self.space(), &ft, &ht, x, cfg)
    }

    /// Induced bracket at a canonical point. Both functions must be
    /// constant along `H`-orbits near `x`.
    pub fn induced_bracket(
        &self,
        f: &dyn Fn(&Point) -> Result<f64>,
        h: &dyn Fn(&Point) -> Result<f64>,
        x: &Point,
    ) -> Result<f64> {
        self.assert_invariant(f, x)?;
        self.assert_invariant(h, x)?;
        self.ambient_bracket(f, h, x, &self.cfg)
    }

    /// `y -> {F, H}(canonical(y))`: an extension of the induced bracket
    /// function, already of the form `B o canonical`.
    fn bracket_function<'a>(
        &'a self,
        f: &'a dyn Fn(&Point) -> Result<f64>,
        h: &'a dyn Fn(&Point) -> Result<f64>,
    ) -> impl Fn(&Point) -> Result<f64> + 'a {
        move |y: &Point| self.ambient_bracket(f, h, &self.canonical(y)?, &self.cfg)
    }

    /// Jacobiator of the induced bracket by nested differences, normalized
    /// by the gradient norms of the three functions.
    pub fn induced_jacobi(
        &self,
        f: &dyn Fn(&Point) -> Result<f64>,
        h: &dyn Fn(&Point) -> Result<f64>,
        k: &dyn Fn(&Point) -> Result<f64>,
        x: &Point,
    ) -> Result<f64> {
        for a in [f, h, k] {
            self.assert_invariant(a, x)?;
        }
        let outer = outer_cfg(&self.cfg);
        let sp = self.space();
        let cyc = |a: &dyn Fn(&Point) -> Result<f64>,
                   b: &dyn Fn(&Point) -> Result<f64>,
                   c: &dyn Fn(&Point) -> Result<f64>|
         -> Result<f64> {
            let bc = self.bracket_function(b, c);
            let at = |y: &Point| a(&self.canonical(y)?);
            poisson_bracket(sp, &at, &bc, x, &outer)
        };
        let total = cyc(f, h, k)? + cyc(h, k, f)? + cyc(k, f, h)?;
        let mut scale = 1.0;
        for a in [f, h, k] {
            let at = |y: &Point| a(&self.canonical(y)?);
            scale *= chart_gradient(sp, &at, x, &self.cfg)?.norm();
        }
        Ok(total.abs() / scale.max(1.0))
    }

    /// `l^_k(x)`; asserts that `J^` is preserved.
    pub fn residual_apply(&self, k: &GroupPoint, x: &Point) -> Result<Point> {
        let y = self.check.residual_action.apply(k, x)?;
        let drift = (self.constraint(&y)? - self.constraint(x)?).amax();
        if drift > CONSTRAINT_DRIFT_TOL {
            return Err(Error::InvariantViolation {
                what: "momentum of the check space moved under the residual action".into(),
                drift,
            });
        }
        Ok(y)
    }

    /// `l_ind(k, [x]) = [l^_k(x)]`.
    pub fn induced_apply(&self, k: &GroupPoint, x: &Point) -> Result<Point> {
        self.gauge(&self.residual_apply(k, x)?)
    }

    /// `J_ind([p, d]) = J_l(d)`.
    pub fn induced_momentum(&self, x: &Point) -> Result<GroupPoint> {
        let (_, d) = self.split(x);
        j_l_projection(&self.dg, &d)
    }

    /// `y -> w . local(x0, gauge(y))`: an invariant coordinate-like function.
    pub fn coordinate_function<'a>(
        &'a self,
        x0: &'a Point,
        weights: DVector<f64>,
    ) -> impl Fn(&Point) -> Result<f64> + 'a {
        move |y: &Point| Ok(weights.dot(&self.space().local(x0, &self.gauge(y)?)?))
    }

    /// Hamiltonian condition for `(l_ind, J_ind)` tested on functions:
    /// `d/dt F(l_ind(exp tX, x)) = dF~ . pi^sharp(L^* X^l)`.
    pub fn induced_momentum_residual(
        &self,
        xa: &DVector<f64>,
        x: &Point,
        fns: &[&dyn Fn(&Point) -> Result<f64>],
    ) -> Result<f64> {
        let sp = self.space();
        let beta = self
            .check
            .residual_momentum
            .pullback(xa, Side::Left, x, &self.cfg)?;
        let v = sp.bivector(x)? * beta;
        let mut worst: f64 = 0.0;
        for f in fns {
            let lhs = curve_derivative(
                |t: f64| {
                    Ok(DVector::from_element(
                        1,
                        f(&self.induced_apply(&self.dg.g().exp(&(xa * t)), x)?)?,
                    ))
                },
                &self.cfg,
            )?[0];
            let ft = |y: &Point| f(&self.canonical(y)?);
            let df = chart_gradient(sp, &ft, x, &self.cfg)?;
            worst = worst.max((lhs - df.dot(&v)).abs() / df.norm().max(1.0));
        }
        Ok(worst / xa.norm().max(1.0))
    }

    /// Poisson-action criterion for `l_ind` against the induced bracket:
    /// `X{F,H} - {XF, H} - {F, XH} - sum delta(X)_ij (e_i F)(e_j H)`.
    pub fn induced_action_residual(
        &self,
        xa: &DVector<f64>,
        f: &dyn Fn(&Point) -> Result<f64>,
        h: &dyn Fn(&Point) -> Result<f64>,
        x: &Point,
    ) -> Result<f64> {
        self.assert_invariant(f, x)?;
        self.assert_invariant(h, x)?;
        let outer = outer_cfg(&self.cfg);
        let sp = self.space();
        let g = self.dg.g();
        let along = |v: &DVector<f64>,
                     a: &dyn Fn(&Point) -> Result<f64>,
                     y: &Point,
                     cfg: &ToleranceConfig| {
            curve_derivative(
                |t: f64| {
                    Ok(DVector::from_element(
                        1,
                        a(&self.induced_apply(&g.exp(&(v * t)), y)?)?,
                    ))
                },
                cfg,
            )
            .map(|d| d[0])
        };
        let b = self.bracket_function(f, h);
        let lhs = along(xa, &b, x, &outer)?;
        let xf = |y: &Point| along(xa, f, &self.canonical(y)?, &self.cfg);
        let xh = |y: &Point| along(xa, h, &self.canonical(y)?, &self.cfg);
        let ft = |y: &Point| f(&self.canonical(y)?);
        let ht = |y: &Point| h(&self.canonical(y)?);
        let t1 = poisson_bracket(sp, &xf, &ht, x, &outer)?;
        let t2 = poisson_bracket(sp, &ft, &xh, x, &outer)?;
        let n = self.dg.n();
        let delta = linearization_delta(&g_space(&self.dg), xa, &self.cfg)?;
        let mut sf = DVector::zeros(n);
        let mut sh = DVector::zeros(n);
        for i in 0..n {
            let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
            sf[i] = along(&e, f, x, &self.cfg)?;
            sh[i] = along(&e, h, x, &self.cfg)?;
        }
        let dt = sf.dot(&(delta * sh));
        Ok((lhs - t1 - t2 - dt).abs() / xa.norm().max(1.0))
    }

    /// `C(J^-1(e*))` at `x` and its span defect against the generators of
    /// `s^` (both directions).
    pub fn characteristic_vs_orbit(&self, x: &Point) -> Result<(SubcharacteristicReport, f64)> {
        let sc =
            subcharacteristic_basis(self.space(), &|y: &Point| self.constraint(y), x, &self.cfg)?;
        let k = self.sub.k();
        let gens: Vec<DVector<f64>> = (0..k)
            .map(|a| {
                let e = DVector::from_fn(k, |i, _| if i == a { 1.0 } else { 0.0 });
                self.check.action.generator(&e, x, &self.cfg)
            })
            .collect::<Result<_>>()?;
        let gens = orthonormal_basis(&gens);
        let defect = span_defect(&sc.basis, &gens).max(span_defect(&gens, &sc.basis));
        Ok((sc, defect))
    }

    /// The four identities: `J_r l_k = J_r`, `J_l r_h = J_l`,
    /// `r_h l_k = l_k r_h` on `D`, and `l^_k s^_h = s^_h l^_k` on `P x D`.
    pub fn invariance_residuals(
        &self,
        samples: &[(GroupPoint, GroupPoint, Point)],
    ) -> Result<[f64; 4]> {
        let dsamples: Vec<(GroupPoint, GroupPoint, GroupPoint)> = samples
            .iter()
            .map(|(k, h, x)| (k.clone(), h.clone(), self.split(x).1))
            .collect();
        let [a, b, c] = double_invariance_residuals(&self.dg, &self.sub, &dsamples)?;
        let mut d: f64 = 0.0;
        let sp = self.space();
        for (k, h, x) in samples {
            let lhs = self
                .check
                .residual_action
                .apply(k, &self.check.action.apply(h, x)?)?;
            let rhs = self
                .check
                .action
                .apply(h, &self.check.residual_action.apply(k, x)?)?;
            d = d.max(sp.distance(&lhs, &rhs));
        }
        Ok([a, b, c, d])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointInductionReport {
    pub samples: usize,
    /// `Q_* pi_+(d) - pi_+(Q d) - L_d pi_-(w0^-1)`.
    pub q_relation: f64,
    /// The same relation with `w0 = e`, where the modification term vanishes.
    pub q_relation_identity: f64,
    pub modification_identity: f64,
    pub roundtrip: f64,
    /// `i*` of the `G*`-factor of `I(x)`: zero when `I` lands in `P x G x H°`.
    pub image_in_annihilator: f64,
    pub dressing_invariance: f64,
}

/// Residual of `Ad_w pi_+(d) Ad_w^T = pi_+(d w^-1) + pi_-(w^-1)` with the
/// push-forward computed by finite differences.
pub fn q_relation_residual(
    dg: &DoubleGroup,
    d: &GroupPoint,
    w: &GroupPoint,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let grp = dg.d();
    let winv = w.inverse();
    let qd = d.mul(&winv);
    let t = differential(
        |z: &DVector<f64>| grp.local(&qd, &grp.retract(d, z).mul(&winv)),
        &DVector::zeros(grp.dim()),
        cfg,
    )?;
    let lhs = &t * dg.pi_pm(d, PmSign::Plus)? * t.transpose();
    let rhs = dg.pi_pm(&qd, PmSign::Plus)? + dg.pi_pm(&winv, PmSign::Minus)?;
    Ok((lhs - rhs).amax())
}

/// Induction from a point with momentum `u0`.
#[allow(clippy::too_many_arguments)]
pub fn point_induction(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    slice: Vec<(usize, usize)>,
    u0: &DVector<f64>,
    sampler: &mut Sampler,
    count: usize,
    half_width: f64,
    cfg: &ToleranceConfig,
) -> Result<PointInductionReport> {
    let k = sub.k();
    check_len(u0.len(), k)?;
    let w0 = sub.sstar(u0);
    let mut inv: f64 = 0.0;
    for _ in 0..count.max(5) {
        let h = sub.h_exp(&sampler.uniform_box(k, 1.0));
        inv = inv.max((sub.h.coadjoint(&h, u0)? - u0).amax());
        let dressed = dg.dress(&h, &w0, DressKind::GOnGstarLeft)?;
        inv = inv.max(dressed.distance(&w0));
    }
    if inv > 1e-8 {
        return Err(Error::NotDressingInvariant(inv));
    }
    let model = ConstraintQuotientModel::new(
        dg,
        sub,
        &HamiltonianSpace::Point {
            momentum: u0.iter().copied().collect(),
        },
        slice,
        *cfg,
    )?;
    let e = dg.gstar().identity();
    let mut rep = PointInductionReport {
        samples: count,
        q_relation: 0.0,
        q_relation_identity: 0.0,
        modification_identity: dg.pi_pm(&e, PmSign::Minus)?.amax(),
        roundtrip: 0.0,
        image_in_annihilator: 0.0,
        dressing_invariance: inv,
    };
    let w0inv = w0.inverse();
    for _ in 0..count {
        let x = model.sample_constraint(sampler, half_width)?;
        let (p, d) = model.split(&x);
        rep.q_relation = rep.q_relation.max(q_relation_residual(dg, &d, &w0, cfg)?);
        rep.q_relation_identity = rep
            .q_relation_identity
            .max(q_relation_residual(dg, &d, &e, cfg)?);
        let id = d.mul(&w0inv);
        let back = model.join(&p, &id.mul(&w0));
        rep.roundtrip = rep.roundtrip.max(model.space().distance(&back, &x));
        let (_, u) = dg.factorize(&id, FactorOrder::GU)?;
        rep.image_in_annihilator = rep.image_in_annihilator.max(sub.istar(&u)?.amax());
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitInductionReport {
    /// Largest residual of the search for `h` with `lambda_h(w) = w c`, `c` in `H°`.
    pub condition_residual: f64,
    pub condition_holds: bool,
    pub condition_samples: usize,
    /// Largest distance of `J_l(d)` from the dressing orbit `G.w`.
    pub membership_residual: f64,
    pub membership_samples: usize,
    /// Membership searches above tolerance.
    pub membership_failures: usize,
    /// `J_l(d)` against `rho_{g^-1}(u)`.
    pub class_formula: f64,
    /// Classical limit only: `J_l(d)` against `Coad(g) mu`.
    pub classical: Option<f64>,
    /// `s^_h(p, g u)` against `(p, g h^-1 rho_{h^-1}(u))`.
    pub action_coincidence: f64,
}

pub const ORBIT_MEMBERSHIP_TOL: f64 = 1e-6;

/// Distance from `target` to `{act(y)}` minimized over `y` from a few
/// seeded starts.
fn orbit_distance(
    gstar: &crate::lie::MatrixGroup,
    act: &dyn Fn(&DVector<f64>) -> Result<GroupPoint>,
    target: &GroupPoint,
    dim: usize,
    sampler: &mut Sampler,
    cfg: &ToleranceConfig,
) -> f64 {
    let tinv = target.inverse();
    let res = |y: &DVector<f64>| gstar.log(&tinv.mul(&act(y)?));
    let mut best = f64::INFINITY;
    for attempt in 0..4 {
        let guess = if attempt == 0 {
            DVector::zeros(dim)
        } else {
            sampler.uniform_box(dim, 1.5)
        };
        let (_, r) = least_squares(res, &guess, cfg);
        best = best.min(r);
        if best < cfg.newton_tol {
            break;
        }
    }
    best
}

/// Induction from the dressing orbit of `v`, landing on the orbit of `w`.
#[allow(clippy::too_many_arguments)]
pub fn orbit_induction(
    dg: &DoubleGroup,
    sub: &SubgroupData,
    slice: Vec<(usize, usize)>,
    v: &DVector<f64>,
    w: &GroupPoint,
    sampler: &mut Sampler,
    condition_samples: usize,
    membership_samples: usize,
    half_width: f64,
    cfg: &ToleranceConfig,
) -> Result<OrbitInductionReport> {
    let k = sub.k();
    let n = dg.n();
    let iw = sub.istar(w)?;
    let drift = (&iw - v).amax();
    if drift > 1e-9 {
        return Err(Error::InvariantViolation {
            what: "i*(w) differs from v".into(),
            drift,
        });
    }
    // H.v is a single point exactly when v is coadjoint-fixed.
    for _ in 0..5 {
        let h = sub.h_exp(&sampler.uniform_box(k, 1.0));
        let r = (sub.h.coadjoint(&h, v)? - v).amax();
        if r > 1e-9 {
            return Err(Error::Unsupported(format!(
                "orbit H.v is not a point (coadjoint drift {r:e})"
            )));
        }
    }
    let model = ConstraintQuotientModel::new(
        dg,
        sub,
        &HamiltonianSpace::Point {
            momentum: v.iter().copied().collect(),
        },
        slice,
        *cfg,
    )?;
    let mut rep = OrbitInductionReport {
        condition_residual: 0.0,
        condition_holds: true,
        condition_samples,
        membership_residual: 0.0,
        membership_samples,
        membership_failures: 0,
        class_formula: 0.0,
        classical: None,
        action_coincidence: 0.0,
    };
    let h_orbit = |y: &DVector<f64>| dg.dress(&sub.h_exp(y), w, DressKind::GOnGstarLeft);
    for _ in 0..condition_samples {
        let t = sampler.uniform_box(sub.hcirc_indices.len(), half_width);
        let target = w.mul(&sub.hcirc(&t));
        let r = orbit_distance(dg.gstar(), &h_orbit, &target, k, sampler, cfg);
        rep.condition_residual = rep.condition_residual.max(r);
    }
    rep.condition_holds = rep.condition_residual < ORBIT_MEMBERSHIP_TOL;
    let g_orbit = |y: &DVector<f64>| dg.dress(&dg.g().exp(y), w, DressKind::GOnGstarLeft);
    let zero = dg.bialgebra().is_zero_structure();
    let mut classical: f64 = 0.0;
    for _ in 0..membership_samples {
        let g = dg.g().exp(&sampler.uniform_box(n, half_width));
        let t = sampler.uniform_box(sub.hcirc_indices.len(), half_width);
        let u = w.mul(&sub.hcirc(&t));
        let d = g.mul(&u);
        let x = model.join(&DVector::zeros(0), &d);
        let jl = model.induced_momentum(&x)?;
        rep.class_formula = rep.class_formula.max(jl.distance(&j_l_formula(dg, &d)?));
        let r = orbit_distance(dg.gstar(), &g_orbit, &jl, n, sampler, cfg);
        if r > ORBIT_MEMBERSHIP_TOL {
            rep.membership_failures += 1;
        }
        rep.membership_residual = rep.membership_residual.max(r);
        if zero {
            let mu = dg.gstar().log(&u)?;
            classical = classical.max((dg.gstar().log(&jl)? - dg.g().coadjoint(&g, &mu)?).amax());
        }
        let h = sub.h_exp(&sampler.uniform_box(k, half_width));
        let hinv = h.inverse();
        let (_, dh) = model.split(&model.check.action.apply(&h, &x)?);
        let expect = g
            .mul(&hinv)
            .mul(&dg.dress(&hinv, &u, DressKind::GOnGstarRight)?);
        rep.action_coincidence = rep.action_coincidence.max(dh.distance(&expect));
    }
    if zero {
        rep.classical = Some(classical);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::tests::su2_double;
    use crate::momentum::tests::{semidirect_double, torus, translations};
    use crate::momentum::{equivariance_residual, momentum_residual};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn su2_model() -> ConstraintQuotientModel {
        let dg = su2_double();
        let sub = torus(&dg);
        let hs = HamiltonianSpace::Oscillator {
            charge: vec![1.0],
            offset: vec![0.2],
        };
        ConstraintQuotientModel::new(&dg, &sub, &hs, vec![(1, 0)], cfg()).unwrap()
    }

    fn se2_model() -> ConstraintQuotientModel {
        let dg = semidirect_double();
        let sub = translations(&dg);
        let hs = HamiltonianSpace::Point {
            momentum: vec![0.3, -0.2],
        };
        ConstraintQuotientModel::new(&dg, &sub, &hs, vec![(0, 2), (1, 2)], cfg()).unwrap()
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn subcharacteristic_trivial_and_symplectic() {
        let m = EuclideanSpace::symplectic(2);
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let none =
            subcharacteristic_basis(&m, &|_y: &Point| Ok(DVector::zeros(0)), &x, &cfg()).unwrap();
        assert_eq!(none.rank(), 0);
        assert_eq!(none.tangent.len(), 4);
        // level set of q1^2 + p1^2 through x: coisotropic, codim 1
        let c = |y: &Point| Ok(DVector::from_element(1, y[0] * y[0] + y[1] * y[1] - 0.05));
        let r = subcharacteristic_basis(&m, &c, &x, &cfg()).unwrap();
        assert_eq!(r.rank(), 1);
        // oracle: C N is spanned by pi (dc), i.e. the rotation field in (q1, p1)
        let v = DVector::from_vec(vec![0.2, -0.1, 0.0, 0.0]).normalize();
        assert!(span_defect(&[v], &r.basis) < 1e-8);
        assert!(!r.unstable);
        let off = DVector::from_vec(vec![1.0, 0.2, 0.3, 0.4]);
        assert!(matches!(
            subcharacteristic_basis(&m, &c, &off, &cfg()),
            Err(Error::MembershipError { .. })
        ));
    }

    #[test]
    fn clean_intersection_constant_and_jump() {
        let m = EuclideanSpace::symplectic(2);
        let c = |y: &Point| Ok(DVector::from_element(1, y[2] * y[2] + y[3] * y[3] - 0.5));
        let mut s = Sampler::new(1);
        let samples: Vec<Point> = (0..25)
            .map(|_| {
                let a = s.uniform(0.0, 6.0);
                let q = s.uniform_box(2, 1.0);
                DVector::from_vec(vec![
                    q[0],
                    q[1],
                    0.5f64.sqrt() * a.cos(),
                    0.5f64.sqrt() * a.sin(),
                ])
            })
            .collect();
        let rep = clean_intersection_report(&m, &c, &samples, &cfg()).unwrap();
        assert!(!rep.rank_jump);
        assert!(rep
            .samples
            .iter()
            .all(|s| s.intersection_rank == 3 && s.characteristic_rank == 1));

        let full =
            clean_intersection_report(&m, &|_y: &Point| Ok(DVector::zeros(0)), &samples, &cfg())
                .unwrap();
        assert!(full
            .samples
            .iter()
            .all(|s| s.intersection_rank == s.leaf_rank));

        let deg = EuclideanSpace::new(
            2,
            Arc::new(|x: &DVector<f64>| {
                nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, x[0], -x[0], 0.0])
            }),
        );
        let line = |y: &Point| Ok(DVector::from_element(1, y[1]));
        let pts: Vec<Point> = [-0.5, 0.0, 0.5]
            .iter()
            .map(|&a| DVector::from_vec(vec![a, 0.0]))
            .collect();
        let rep = clean_intersection_report(&deg, &line, &pts, &cfg()).unwrap();
        assert!(rep.rank_jump);
        assert_eq!(rep.samples[1].intersection_rank, 0);
        assert_eq!(rep.samples[0].intersection_rank, 1);
    }

    #[test]
    fn check_space_basics() {
        let m = su2_model();
        let mut s = Sampler::new(2);
        let x = m.sample_constraint(&mut s, 0.5).unwrap();
        assert!(m.check.action.identity_residual(&x).unwrap() < 1e-14);
        let p = DVector::from_vec(vec![0.3, 0.4]);
        let xe = m.join(&p, &m.dg.d().identity());
        assert!((m.constraint(&xe).unwrap()[0] - (0.2 - 0.125)).abs() < 1e-14);
        for _ in 0..5 {
            let y = m.sample_constraint(&mut s, 0.5).unwrap();
            assert!(m.constraint(&y).unwrap().amax() < 1e-12);
            let xa = s.uniform_box(1, 1.0);
            assert!(momentum_residual(&m.check.momentum, &xa, &y, &cfg()).unwrap() < 1e-4);
            assert!(
                momentum_residual(
                    &m.check.residual_momentum,
                    &s.uniform_box(3, 1.0),
                    &y,
                    &cfg()
                )
                .unwrap()
                    < 1e-4
            );
            assert!(equivariance_residual(&m.check.residual_momentum, &y, &cfg()).unwrap() < 1e-5);
            let h1 = m.sub.h_exp(&s.uniform_box(1, 0.5));
            let h2 = m.sub.h_exp(&s.uniform_box(1, 0.5));
            assert!(m.check.action.composition_residual(&h1, &h2, &y).unwrap() < 1e-10);
        }
    }

    #[test]
    fn projection_and_gauge() {
        let m = su2_model();
        let mut s = Sampler::new(3);
        let x = m.sample_constraint(&mut s, 0.5).unwrap();
        assert!(m.space().distance(&m.project(&x).unwrap(), &x) < 1e-12);
        let mut ok = 0;
        for _ in 0..100 {
            let x = m.sample_constraint(&mut s, 0.5).unwrap();
            let z = s.uniform_box(m.space().dim(), 0.1);
            let y = m.space().retract(&x, &z).unwrap();
            if let Ok(q) = m.project(&y) {
                if m.constraint(&q).unwrap().amax() < 1e-9 {
                    ok += 1;
                }
            }
        }
        assert!(ok >= 95, "{ok}");
        for _ in 0..10 {
            let x = m.sample_constraint(&mut s, 0.5).unwrap();
            let (c, yh) = m.gauge_with_parameter(&x).unwrap();
            let back = m.check.action.apply(&m.sub.h_exp(&yh), &x).unwrap();
            assert!(m.space().distance(&back, &c) < 1e-12);
            assert!(m.space().distance(&m.gauge(&c).unwrap(), &c) < 1e-9);
            assert!(m.constraint(&c).unwrap().amax() < 1e-9);
            // constraint characterization: J(p) = i*(u)
            let (p, d) = m.split(&c);
            let (_, u) = m.dg.factorize(&d, FactorOrder::GU).unwrap();
            let jp = 0.2 - 0.5 * p.norm_squared();
            assert!((m.sub.istar(&u).unwrap()[0] - jp).abs() < 1e-9);
        }
    }

    #[test]
    fn characteristic_matches_orbits_and_invariance() {
        let m = su2_model();
        let mut s = Sampler::new(4);
        let mut samples = Vec::new();
        for _ in 0..5 {
            let x = m
                .canonical(&m.sample_constraint(&mut s, 0.5).unwrap())
                .unwrap();
            let (sc, defect) = m.characteristic_vs_orbit(&x).unwrap();
            assert_eq!(sc.rank(), 1);
            assert!(defect < 1e-6, "{defect}");
            samples.push((
                m.dg.g().exp(&s.uniform_box(3, 0.5)),
                m.sub.h_exp(&s.uniform_box(1, 0.5)),
                x,
            ));
        }
        let r = m.invariance_residuals(&samples).unwrap();
        assert!(r.iter().all(|&v| v < 1e-8), "{r:?}");
        let se = se2_model();
        let mut samples = Vec::new();
        for _ in 0..5 {
            let x = se.sample_constraint(&mut s, 0.5).unwrap();
            samples.push((
                se.dg.g().exp(&s.uniform_box(3, 0.5)),
                se.sub.h_exp(&s.uniform_box(2, 0.5)),
                x,
            ));
        }
        let r = se.invariance_residuals(&samples).unwrap();
        assert!(r.iter().all(|&v| v < 1e-10), "{r:?}");
    }

    #[test]
    fn residual_action_and_induced_momentum() {
        let m = su2_model();
        let mut s = Sampler::new(5);
        let x = m
            .canonical(&m.sample_constraint(&mut s, 0.5).unwrap())
            .unwrap();
        let e = m.dg.g().identity();
        assert!(m.space().distance(&m.induced_apply(&e, &x).unwrap(), &x) < 1e-10);
        let k1 = m.dg.g().exp(&s.uniform_box(3, 0.5));
        let k2 = m.dg.g().exp(&s.uniform_box(3, 0.5));
        let a = m.induced_apply(&k1.mul(&k2), &x).unwrap();
        let b = m
            .induced_apply(&k1, &m.induced_apply(&k2, &x).unwrap())
            .unwrap();
        assert!(m.space().distance(&a, &b) < 1e-7);
        // L invariant under s^
        let h = m.sub.h_exp(&s.uniform_box(1, 0.5));
        let jl = m.induced_momentum(&x).unwrap();
        let jh = m
            .induced_momentum(&m.check.action.apply(&h, &x).unwrap())
            .unwrap();
        assert!(jl.distance(&jh) < 1e-8);
        let dim = m.space().dim();
        let fs: Vec<_> = (0..dim)
            .map(|a| m.coordinate_function(&x, e_vec(dim, a)))
            .collect();
        let refs: Vec<&dyn Fn(&Point) -> Result<f64>> = fs
            .iter()
            .map(|f| f as &dyn Fn(&Point) -> Result<f64>)
            .collect();
        let r = m
            .induced_momentum_residual(&s.uniform_box(3, 1.0), &x, &refs)
            .unwrap();
        assert!(r < 1e-4, "{r}");
    }

    fn e_vec(n: usize, i: usize) -> DVector<f64> {
        e(n, i)
    }

    #[test]
    fn induced_bracket_properties() {
        let m = su2_model();
        let mut s = Sampler::new(6);
        let x = m
            .canonical(&m.sample_constraint(&mut s, 0.5).unwrap())
            .unwrap();
        let dim = m.space().dim();
        let f = m.coordinate_function(&x, s.uniform_box(dim, 1.0));
        let h = m.coordinate_function(&x, s.uniform_box(dim, 1.0));
        let k = m.coordinate_function(&x, s.uniform_box(dim, 1.0));
        assert!(m.induced_bracket(&f, &f, &x).unwrap().abs() < 1e-8);
        let fh = m.induced_bracket(&f, &h, &x).unwrap();
        let hf = m.induced_bracket(&h, &f, &x).unwrap();
        assert!((fh + hf).abs() < 1e-8);
        let j = m.induced_jacobi(&f, &h, &k, &x).unwrap();
        assert!(j < 1e-4, "{j}");
        // a raw chart coordinate is not invariant
        let wr = s.uniform_box(dim, 1.0);
        let raw = |y: &Point| Ok(wr.dot(&m.space().local(&x, y)?));
        assert!(matches!(
            m.induced_bracket(&raw, &f, &x),
            Err(Error::NotInvariant(_))
        ));
        let r = m
            .induced_action_residual(&s.uniform_box(3, 1.0), &f, &h, &x)
            .unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn point_induction_torus() {
        let dg = su2_double();
        let sub = torus(&dg);
        let mut s = Sampler::new(7);
        let rep = point_induction(
            &dg,
            &sub,
            vec![(1, 0)],
            &DVector::from_element(1, 0.4),
            &mut s,
            10,
            0.5,
            &cfg(),
        )
        .unwrap();
        assert!(rep.q_relation < 1e-5, "{rep:?}");
        assert!(rep.q_relation_identity < 1e-5);
        assert!(rep.modification_identity < 1e-12);
        assert!(rep.roundtrip < 1e-9);
        assert!(rep.image_in_annihilator < 1e-9);
        // a wrong modification term is visible
        let d = dg.d().exp(&s.uniform_box(6, 0.5));
        let w = sub.sstar(&DVector::from_element(1, 0.4));
        let grp = dg.d();
        let t = grp.ad_matrix(&w).unwrap();
        let bad = (&t * dg.pi_pm(&d, PmSign::Plus).unwrap() * t.transpose()
            - dg.pi_pm(&d.mul(&w.inverse()), PmSign::Plus).unwrap())
        .amax();
        assert!(bad > 1e-2);
    }

    #[test]
    fn point_induction_needs_invariance() {
        let dg = semidirect_double();
        let sub = translations(&dg);
        let mut s = Sampler::new(8);
        let ok = point_induction(
            &dg,
            &sub,
            vec![(0, 2), (1, 2)],
            &DVector::zeros(2),
            &mut s,
            5,
            0.5,
            &cfg(),
        )
        .unwrap();
        assert!(ok.q_relation < 1e-5 && ok.roundtrip < 1e-9);
        let bad = point_induction(
            &dg,
            &sub,
            vec![(0, 2), (1, 2)],
            &DVector::from_vec(vec![0.3, 0.1]),
            &mut s,
            5,
            0.5,
            &cfg(),
        );
        assert!(matches!(bad, Err(Error::NotDressingInvariant(_))));
    }

    #[test]
    fn orbit_induction_both_scenarios() {
        let dg = semidirect_double();
        let sub = translations(&dg);
        let mut s = Sampler::new(9);
        let w = dg.gstar().exp(&DVector::from_vec(vec![0.2, 0.5, -0.3]));
        let v = sub.istar(&w).unwrap();
        let rep = orbit_induction(
            &dg,
            &sub,
            vec![(0, 2), (1, 2)],
            &v,
            &w,
            &mut s,
            5,
            10,
            0.5,
            &cfg(),
        )
        .unwrap();
        assert!(rep.condition_holds, "{rep:?}");
        assert!(rep.membership_residual < 1e-8, "{rep:?}");
        assert!(rep.classical.unwrap() < 1e-10);
        assert!(rep.action_coincidence < 1e-10);

        let dg = su2_double();
        let sub = torus(&dg);
        let w = dg.gstar().exp(&DVector::from_vec(vec![0.2, 0.1, 0.3]));
        let v = sub.istar(&w).unwrap();
        let rep =
            orbit_induction(&dg, &sub, vec![(1, 0)], &v, &w, &mut s, 5, 5, 0.5, &cfg()).unwrap();
        assert!(!rep.condition_holds, "{rep:?}");
        assert!(rep.class_formula < 1e-9);
        assert!(rep.action_coincidence < 1e-9, "{rep:?}");
        let bad = orbit_induction(
            &dg,
            &sub,
            vec![(1, 0)],
            &(v.clone() * 2.0),
            &w,
            &mut s,
            1,
            1,
            0.5,
            &cfg(),
        );
        assert!(matches!(bad, Err(Error::InvariantViolation { .. })));
    }
}
