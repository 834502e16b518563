//! Verification suites. Each suite is a fixed, ordered list of checks; a
//! suite first runs its prerequisites and stops with a partial report if
//! any of them fails.

use std::time::Instant;

use nalgebra::DVector;

use crate::bialgebra::{
    double_algebra, pairing_invariance_residual, DoublePoint, FactorOrder, FactorizationMode,
    PmSign,
};
use crate::error::{Error, Result};
use crate::lie::GroupPoint;
use crate::momentum::{
    canonical_left_action, canonical_right_action, classical_limit_oracle, equivariance_residual,
    g_space, gstar_space, j_l_formula, j_l_projection, momentum_residual, pi_plus_space,
    pl_identity_residuals, subgroup_zero_structure_residual,
};
use crate::numerics::{rank_report, Sampler, ToleranceConfig};
use crate::poisson::{
    jacobi_tensor_max, linearization_delta, multiplicativity_residual, Manifold, Point,
};
use crate::reduction::{
    clean_intersection_report, orbit_induction, point_induction, ConstraintQuotientModel,
    ORBIT_MEMBERSHIP_TOL,
};
use crate::report::{finite, CheckRecord, VerificationReport};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    VerifyBialgebra,
    VerifyPoissonLie,
    VerifyMomentum,
    VerifyInduction,
    InduceOrbit,
    PointInduction,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::VerifyBialgebra,
        Suite::VerifyPoissonLie,
        Suite::VerifyMomentum,
        Suite::VerifyInduction,
        Suite::InduceOrbit,
        Suite::PointInduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::VerifyBialgebra => "verify-bialgebra",
            Suite::VerifyPoissonLie => "verify-poisson-lie",
            Suite::VerifyMomentum => "verify-momentum",
            Suite::VerifyInduction => "verify-induction",
            Suite::InduceOrbit => "induce-orbit",
            Suite::PointInduction => "point-induction",
        }
    }

    /// Suites that run first, in order.
    pub fn prerequisites(self) -> &'static [Suite] {
        match self {
            Suite::VerifyBialgebra => &[],
            Suite::VerifyPoissonLie => &[Suite::VerifyBialgebra],
            Suite::VerifyMomentum => &[Suite::VerifyBialgebra, Suite::VerifyPoissonLie],
            Suite::VerifyInduction => &[
                Suite::VerifyBialgebra,
                Suite::VerifyPoissonLie,
                Suite::VerifyMomentum,
            ],
            Suite::InduceOrbit | Suite::PointInduction => &[Suite::VerifyBialgebra],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::ParseError(format!("unknown suite `{s}`")))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scenario's tolerance profile.
    pub cfg: Option<ToleranceConfig>,
    /// Rank-instability warnings fail the check that raised them.
    pub strict: bool,
    /// Fill `wall_ms`; off by default so reports are byte-stable.
    pub timing: bool,
}

#[derive(Debug, Clone, Copy)]
enum Rule {
    AtMost,
    /// Control checks: the residual must be large.
    AtLeast,
    /// Recorded for information; always passes.
    Report,
    /// Required only when the precondition held.
    Given(bool),
}

struct Spec {
    id: &'static str,
    anchor: &'static str,
    tol: f64,
    rule: Rule,
}

fn at_most(id: &'static str, anchor: &'static str, tol: f64) -> Spec {
    Spec {
        id,
        anchor,
        tol,
        rule: Rule::AtMost,
    }
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    samples: usize,
    residual: f64,
    unstable: bool,
}

fn out(samples: usize, residual: f64) -> Outcome {
    Outcome {
        samples,
        residual,
        unstable: false,
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    cfg: ToleranceConfig,
    strict: bool,
    report: VerificationReport,
}

impl Ctx<'_> {
    fn sampler(&self, stream: &str) -> Sampler {
        self.sc.sampler(stream)
    }

    fn hw(&self) -> f64 {
        self.sc.spec.samples.half_width
    }

    /// Runs `f` once and records one check per spec from its outcomes.
    /// An error fails every check of the group.
    fn group(
        &mut self,
        specs: Vec<Spec>,
        f: impl FnOnce(&mut Ctx, &mut Sampler) -> Result<Vec<Outcome>>,
    ) {
        let mut s = self.sampler(specs[0].id);
        match f(self, &mut s) {
            Ok(outs) => {
                debug_assert_eq!(outs.len(), specs.len());
                for (sp, o) in specs.into_iter().zip(outs) {
                    let r = finite(o.residual);
                    let mut pass = match sp.rule {
                        Rule::AtMost => r <= sp.tol,
                        Rule::AtLeast => r >= sp.tol,
                        Rule::Report => true,
                        Rule::Given(held) => !held || r <= sp.tol,
                    };
                    if o.unstable {
                        self.report.warnings.push(format!(
                            "{}: singular value within ten times the rank cutoff",
                            sp.id
                        ));
                        if self.strict {
                            pass = false;
                        }
                    }
                    self.report.checks.push(CheckRecord {
                        id: sp.id.into(),
                        anchor: sp.anchor.into(),
                        samples: o.samples,
                        max_residual: r,
                        tolerance: sp.tol,
                        pass,
                    });
                }
            }
            Err(e) => {
                self.report.warnings.push(format!("{}: {}", specs[0].id, e));
                for sp in specs {
                    self.report.checks.push(CheckRecord {
                        id: sp.id.into(),
                        anchor: sp.anchor.into(),
                        samples: 0,
                        max_residual: f64::MAX,
                        tolerance: sp.tol,
                        pass: false,
                    });
                }
            }
        }
    }

    fn single(&mut self, spec: Spec, f: impl FnOnce(&mut Ctx, &mut Sampler) -> Result<Outcome>) {
        self.group(vec![spec], |c, s| Ok(vec![f(c, s)?]));
    }
}

mod anchor {
    pub const ALGEBRA: &str = "value at the identity is equal to $X$";
    pub const COCYCLE: &str = "the linearization of $\\pi_{G}$ at the identity";
    pub const PAIRING: &str = "is the bivector defined by";
    pub const PRODUCT: &str = "the double group $D(G)$ is gobally isomorphic to the product";
    pub const PROJECTION: &str = "coincides with the projection";
    pub const SUBGROUP: &str = "is the canonical projection";
    pub const JACOBI: &str = "possesses a well-defined Poisson structure";
    pub const MULTIPLICATIVE: &str = "the corresponding group operation be a Poisson map";
    pub const PI_PM: &str = "two Poisson structures, $\\pi_{+}$ (symplectic)";
    pub const RIGHT: &str = "is the inversion on the dual group";
    pub const LEFT: &str = "is Hamiltonian with equivariant momentum map";
    pub const EQUIVARIANT: &str = "it is a morphism of Poisson manifolds";
    pub const GROUP_IDENTITIES: &str = "useful properties of Poisson-Lie groups";
    pub const CLASSICAL: &str = "cotangent lifts of these two actions";
    pub const IDENTITIES: &str = "the following identities are valid";
    pub const CHECK_MOMENTUM: &str = "admiting an equivariant momentum mapping";
    pub const RIGHT_TO_LEFT: &str = "is a left Poisson action";
    pub const SUBMERSION: &str = "is a submersion, so each element";
    pub const QUOTIENT: &str = "is called induced Poisson manifold";
    pub const CHARACTERISTIC: &str = "sub-characteristic distribution of $N$ as";
    pub const CLEAN: &str = "has a clean intersection with the symplectic leaves";
    pub const WELL_DEFINED: &str = "projects to a well-defined differentiable map";
    pub const EXTENSIONS: &str = "are arbitrary local extensions of";
    pub const INDUCED: &str = "there exists a Poisson manifold";
    pub const GENERATOR: &str = "is obtained by projection of";
    pub const CRITERION: &str = "is Poisson if and only if";
    pub const POINT: &str = "Poisson induction from a point";
    pub const Q_RELATION: &str = "a direct calculation shows that";
    pub const MODIFICATION: &str = "the modification term vanishes when";
    pub const SYMPLECTIC: &str = "carries a natural symplectic structure";
    pub const FIBRE: &str = "We make the assumption that the fibre";
    pub const ORBIT: &str = "is obtained by Poisson induction on the orbit";
    pub const PAIRS: &str = "consists in pairs";
    pub const COADJOINT: &str = "each coadjoint orbit of a semi-direct product";
}

fn check_requirements(sc: &Scenario, suite: Suite) -> Result<()> {
    match suite {
        Suite::VerifyBialgebra | Suite::VerifyPoissonLie => Ok(()),
        Suite::VerifyMomentum => sc.require_subgroup().map(|_| ()),
        Suite::VerifyInduction => {
            sc.require_subgroup()?;
            sc.require_hamiltonian().map(|_| ())
        }
        Suite::InduceOrbit => {
            sc.require_subgroup()?;
            sc.base_point("w")?;
            sc.base_point("v").map(|_| ())
        }
        Suite::PointInduction => {
            sc.require_subgroup()?;
            sc.base_point("u0").map(|_| ())
        }
    }
}

/// Runs `suite` with its prerequisites on a loaded scenario.
pub fn run_suite(sc: &Scenario, suite: Suite, opts: &RunOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    for s in suite.prerequisites().iter().chain(std::iter::once(&suite)) {
        check_requirements(sc, *s)?;
    }
    let cfg = opts.cfg.unwrap_or(sc.cfg);
    cfg.validate()?;
    let mut ctx = Ctx {
        sc,
        cfg,
        strict: opts.strict,
        report: VerificationReport::new(sc.name(), sc.seed()),
    };
    for &pre in suite.prerequisites() {
        run_checks(&mut ctx, pre)?;
        if !ctx.report.all_pass() {
            ctx.report.warnings.push(format!(
                "halted: prerequisite suite `{pre}` failed before `{suite}`"
            ));
            return Ok(finish(ctx, start, opts));
        }
    }
    run_checks(&mut ctx, suite)?;
    Ok(finish(ctx, start, opts))
}

fn finish(ctx: Ctx, start: Instant, opts: &RunOptions) -> VerificationReport {
    let mut r = ctx.report;
    if opts.timing {
        r.wall_ms = start.elapsed().as_millis() as u64;
    }
    r
}

fn run_checks(ctx: &mut Ctx, suite: Suite) -> Result<()> {
    match suite {
        Suite::VerifyBialgebra => bialgebra_checks(ctx),
        Suite::VerifyPoissonLie => poisson_lie_checks(ctx),
        Suite::VerifyMomentum => momentum_checks(ctx)?,
        Suite::VerifyInduction => induction_checks(ctx)?,
        Suite::InduceOrbit => orbit_checks(ctx)?,
        Suite::PointInduction => point_checks(ctx)?,
    }
    Ok(())
}

fn random_double(ctx: &Ctx, s: &mut Sampler) -> (GroupPoint, GroupPoint) {
    let dg = &ctx.sc.double;
    let n = dg.n();
    (
        dg.g().exp(&s.uniform_box(n, ctx.hw())),
        dg.gstar().exp(&s.uniform_box(n, ctx.hw())),
    )
}

fn bialgebra_checks(ctx: &mut Ctx) {
    let dg = ctx.sc.double.clone();
    let b = dg.bialgebra().clone();
    let n = b.dim();
    let d_alg = double_algebra(&b);
    let (a1, a2, a3) = (
        b.g.antisymmetry_residual().0,
        b.gstar.antisymmetry_residual().0,
        d_alg.antisymmetry_residual().0,
    );
    ctx.single(
        at_most("algebra.antisymmetry", anchor::ALGEBRA, 1e-12),
        |_, _| Ok(out(3 * n * n * n, a1.max(a2).max(a3 / 8.0_f64.max(1.0)))),
    );
    let j =
        b.g.jacobi_residual()
            .0
            .max(b.gstar.jacobi_residual().0)
            .max(d_alg.jacobi_residual().0);
    ctx.single(at_most("algebra.jacobi", anchor::ALGEBRA, 1e-12), |_, _| {
        Ok(out(3 * n.pow(4), j))
    });
    let c = b.cocycle_residual().0;
    ctx.single(
        at_most("bialgebra.cocycle", anchor::COCYCLE, 1e-12),
        |_, _| Ok(out(n.pow(4), c)),
    );
    let p = pairing_invariance_residual(&d_alg);
    ctx.single(
        at_most("double.pairing_invariance", anchor::PAIRING, 1e-12),
        |_, _| Ok(out(8 * n * n * n, p)),
    );
    let e = dg
        .g()
        .commutator_residual()
        .0
        .max(dg.gstar().commutator_residual().0)
        .max(dg.d().commutator_residual().0);
    ctx.single(
        at_most("double.embedding", anchor::PAIRING, 1e-12),
        |_, _| Ok(out(4 * n * n, e)),
    );

    let count = ctx.sc.spec.samples.factorization;
    ctx.group(
        vec![
            at_most("factorization.roundtrip", anchor::PRODUCT, 1e-9),
            at_most("factorization.gu_ug", anchor::PROJECTION, 1e-9),
        ],
        |c, s| {
            let (mut r1, mut r2) = (0.0_f64, 0.0_f64);
            for _ in 0..count {
                let (g, u) = random_double(c, s);
                let d = g.mul(&u);
                let (g1, u1) = dg.factorize(&d, FactorOrder::GU)?;
                r1 = r1.max(g1.distance(&g)).max(u1.distance(&u));
                r1 = r1
                    .max(dg.g().membership_residual(&g1))
                    .max(dg.gstar().membership_residual(&u1));
                let (u2, g2) = dg.factorize(&d, FactorOrder::UG)?;
                r2 = r2.max(u2.mul(&g2).distance(&d));
                r2 = r2
                    .max(dg.g().membership_residual(&g2))
                    .max(dg.gstar().membership_residual(&u2));
                let (g3, u3) = dg.factorize(&u2.mul(&g2), FactorOrder::GU)?;
                r2 = r2.max(g3.distance(&g)).max(u3.distance(&u));
            }
            Ok(vec![out(count, r1), out(count, r2)])
        },
    );
    if dg.mode() != FactorizationMode::Newton {
        ctx.single(
            at_most("factorization.newton_cross", anchor::PRODUCT, 1e-9),
            |c, s| {
                let newton = dg.clone().with_mode(FactorizationMode::Newton);
                let mut r = 0.0_f64;
                for _ in 0..count {
                    let (g, u) = random_double(c, s);
                    let d = g.mul(&u);
                    let (a, b) = dg.factorize(&d, FactorOrder::GU)?;
                    let (a2, b2) = newton.factorize(&d, FactorOrder::GU)?;
                    r = r.max(a.distance(&a2)).max(b.distance(&b2));
                }
                Ok(out(count, r))
            },
        );
    }
    ctx.group(
        vec![
            at_most("double.multiply", anchor::PRODUCT, 1e-9),
            at_most("double.associativity", anchor::PRODUCT, 1e-8),
        ],
        |c, s| {
            let mut abstract_only = dg.clone();
            abstract_only.cross_check = false;
            let (mut r1, mut r2) = (0.0_f64, 0.0_f64);
            for _ in 0..count {
                let (g, u) = random_double(c, s);
                let (h, v) = random_double(c, s);
                let (k, w) = random_double(c, s);
                let (a, b, cc) = (
                    DoublePoint::new(g, u),
                    DoublePoint::new(h, v),
                    DoublePoint::new(k, w),
                );
                let ab = abstract_only.double_multiply(&a, &b)?;
                let direct = dg.point(&a.matrix().mul(b.matrix()))?;
                r1 = r1
                    .max(ab.g.distance(&direct.g))
                    .max(ab.u.distance(&direct.u));
                let left = abstract_only.double_multiply(&ab, &cc)?;
                let right =
                    abstract_only.double_multiply(&a, &abstract_only.double_multiply(&b, &cc)?)?;
                r2 = r2
                    .max(left.g.distance(&right.g))
                    .max(left.u.distance(&right.u));
            }
            Ok(vec![out(count, r1), out(count, r2)])
        },
    );
    if let Some(sub) = ctx.sc.subgroup.clone() {
        let k = sub.k();
        ctx.group(
            vec![
                at_most("subgroup.istar_morphism", anchor::SUBGROUP, 1e-9),
                at_most("subgroup.annihilator", anchor::SUBGROUP, 1e-9),
                at_most("subgroup.section", anchor::SUBGROUP, 1e-9),
                at_most("subgroup.zero_structure", anchor::SUBGROUP, 1e-12),
            ],
            |c, s| {
                let m = 20;
                let mut r = [0.0_f64; 4];
                for _ in 0..m {
                    let (_, u) = random_double(c, s);
                    let (_, v) = random_double(c, s);
                    r[0] = r[0].max(sub.morphism_residual(&u, &v)?);
                    r[1] = r[1].max(sub.hcirc_residual(&s.uniform_box(n - k, c.hw()))?);
                    r[2] = r[2].max(sub.section_residual(&s.uniform_box(k, c.hw()))?);
                    r[3] = r[3].max(subgroup_zero_structure_residual(
                        &dg,
                        &sub,
                        &s.uniform_box(k, 1.0),
                    )?);
                }
                Ok(r.iter().map(|&x| out(m, x)).collect())
            },
        );
    }
}

fn poisson_lie_checks(ctx: &mut Ctx) {
    let dg = ctx.sc.double.clone();
    let n = dg.n();
    let count = ctx.sc.spec.samples.poisson;
    let gsp = g_space(&dg);
    let usp = gstar_space(&dg);
    for (jid, mid, sp) in [
        (
            "poisson.jacobi_g",
            "poisson.multiplicativity_g",
            gsp.clone(),
        ),
        (
            "poisson.jacobi_gstar",
            "poisson.multiplicativity_gstar",
            usp,
        ),
    ] {
        ctx.single(at_most(jid, anchor::JACOBI, 1e-6), |c, s| {
            let mut r = 0.0_f64;
            for _ in 0..count {
                let g = sp.group().exp(&s.uniform_box(n, c.hw()));
                r = r.max(jacobi_tensor_max(sp.as_ref(), &sp.to_point(&g), &c.cfg)?);
            }
            Ok(out(count, r))
        });
        ctx.single(at_most(mid, anchor::MULTIPLICATIVE, 1e-6), |c, s| {
            let mut r = 0.0_f64;
            for _ in 0..count {
                let g = sp.group().exp(&s.uniform_box(n, c.hw()));
                let h = sp.group().exp(&s.uniform_box(n, c.hw()));
                r = r.max(multiplicativity_residual(&sp, &g, &h, &c.cfg)?);
            }
            Ok(out(count, r))
        });
    }
    ctx.single(
        at_most("poisson.linearization", anchor::COCYCLE, 1e-6),
        |c, _| {
            let b = dg.bialgebra();
            let mut r = 0.0_f64;
            for i in 0..n {
                let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
                let d = linearization_delta(&gsp, &e, &c.cfg)?;
                for a in 0..n {
                    for bb in 0..n {
                        r = r.max((d[(a, bb)] - b.f(a, bb, i)).abs());
                    }
                }
            }
            Ok(out(n, r))
        },
    );
    let rank_count = ctx.sc.spec.samples.pi_plus_rank;
    ctx.single(
        at_most("double.pi_plus_rank", anchor::PI_PM, 0.0),
        |c, s| {
            let mut deficit = 0usize;
            let mut unstable = false;
            for _ in 0..rank_count {
                let (g, u) = random_double(c, s);
                let (rank, un) = rank_report(&dg.pi_pm(&g.mul(&u), PmSign::Plus)?);
                deficit = deficit.max(2 * n - rank);
                unstable |= un;
            }
            Ok(Outcome {
                samples: rank_count,
                residual: deficit as f64,
                unstable,
            })
        },
    );
    ctx.single(
        at_most("double.pi_minus_identity", anchor::PI_PM, 1e-12),
        |_, _| Ok(out(1, dg.pi_pm(&dg.d().identity(), PmSign::Minus)?.amax())),
    );
}

fn momentum_checks(ctx: &mut Ctx) -> Result<()> {
    let dg = ctx.sc.double.clone();
    let sub = ctx.sc.require_subgroup()?.clone();
    let n = dg.n();
    let k = sub.k();
    let count = ctx.sc.spec.samples.momentum;
    let sp = pi_plus_space(&dg);
    let (_, jr) = canonical_right_action(&dg, Some(&sub));
    let (_, jfull) = canonical_right_action(&dg, None);
    let (la, jl) = canonical_left_action(&dg);
    let point = |c: &Ctx, s: &mut Sampler| {
        let (g, u) = random_double(c, s);
        sp.to_point(&g.mul(&u))
    };
    ctx.group(
        vec![
            at_most("momentum.right", anchor::RIGHT, 1e-5),
            at_most("momentum.right_equivariance", anchor::EQUIVARIANT, 1e-5),
            at_most("momentum.right_full", anchor::RIGHT, 1e-5),
            at_most(
                "momentum.right_full_equivariance",
                anchor::EQUIVARIANT,
                1e-5,
            ),
        ],
        |c, s| {
            let mut r = [0.0_f64; 4];
            for _ in 0..count {
                let d = point(c, s);
                r[0] = r[0].max(momentum_residual(&jr, &s.uniform_box(k, 1.0), &d, &c.cfg)?);
                r[1] = r[1].max(equivariance_residual(&jr, &d, &c.cfg)?);
                r[2] = r[2].max(momentum_residual(
                    &jfull,
                    &s.uniform_box(n, 1.0),
                    &d,
                    &c.cfg,
                )?);
                r[3] = r[3].max(equivariance_residual(&jfull, &d, &c.cfg)?);
            }
            Ok(r.iter().map(|&x| out(count, x)).collect())
        },
    );
    ctx.group(
        vec![
            at_most("momentum.left", anchor::LEFT, 1e-5),
            at_most("momentum.left_equivariance", anchor::EQUIVARIANT, 1e-5),
            at_most("momentum.jl_formula", anchor::PROJECTION, 1e-9),
            at_most("momentum.left_action_law", anchor::LEFT, 1e-8),
        ],
        |c, s| {
            let mut r = [0.0_f64; 4];
            for _ in 0..count {
                let d = point(c, s);
                let dm = sp.to_group(&d);
                r[0] = r[0].max(momentum_residual(&jl, &s.uniform_box(n, 1.0), &d, &c.cfg)?);
                r[1] = r[1].max(equivariance_residual(&jl, &d, &c.cfg)?);
                r[2] = r[2].max(j_l_formula(&dg, &dm)?.distance(&j_l_projection(&dg, &dm)?));
                let k1 = dg.g().exp(&s.uniform_box(n, c.hw()));
                let k2 = dg.g().exp(&s.uniform_box(n, c.hw()));
                r[3] = r[3]
                    .max(la.composition_residual(&k1, &k2, &d)?)
                    .max(la.identity_residual(&d)?);
            }
            Ok(r.iter().map(|&x| out(count, x)).collect())
        },
    );
    let identities = ctx.sc.spec.samples.identities;
    ctx.group(
        vec![
            at_most(
                "identity.coadjoint_projection",
                anchor::GROUP_IDENTITIES,
                1e-5,
            ),
            at_most(
                "identity.dressing_coadjoint",
                anchor::GROUP_IDENTITIES,
                1e-5,
            ),
            at_most("identity.double_adjoint", anchor::GROUP_IDENTITIES, 1e-5),
        ],
        |c, s| {
            let samples: Vec<_> = (0..identities)
                .map(|_| {
                    let (g, u) = random_double(c, s);
                    (g, u, s.uniform_box(n, 1.0), s.uniform_box(k, 1.0))
                })
                .collect();
            let r = pl_identity_residuals(&dg, &sub, &samples, &c.cfg)?;
            Ok(r.iter().map(|&x| out(identities, x)).collect())
        },
    );
    if dg.bialgebra().is_zero_structure() {
        let count = ctx.sc.spec.samples.classical;
        ctx.group(
            vec![
                at_most("classical.closed_forms", anchor::CLASSICAL, 1e-10),
                Spec {
                    id: "classical.sign_control",
                    anchor: anchor::CLASSICAL,
                    tol: 1e-1,
                    rule: Rule::AtLeast,
                },
            ],
            |c, s| {
                let rep = classical_limit_oracle(&dg, &sub, s, count, c.hw())?;
                Ok(vec![
                    out(count, rep.max_deviation()),
                    out(count, rep.flipped_control),
                ])
            },
        );
    }
    Ok(())
}

fn induction_checks(ctx: &mut Ctx) -> Result<()> {
    let sc = ctx.sc;
    let dg = sc.double.clone();
    let sub = sc.require_subgroup()?.clone();
    let model = ConstraintQuotientModel::new(
        &dg,
        &sub,
        sc.require_hamiltonian()?,
        sc.gauge_slice()?,
        ctx.cfg,
    )?;
    let n = dg.n();
    let k = sub.k();
    let plan = sc.spec.samples.clone();
    let zero = dg.bialgebra().is_zero_structure();
    let id_tol = if zero { 1e-10 } else { 1e-8 };
    let sp = model.space().clone();
    let dim = sp.dim();

    ctx.group(
        vec![
            at_most("invariance.j_right", anchor::IDENTITIES, id_tol),
            at_most("invariance.j_left", anchor::IDENTITIES, id_tol),
            at_most("invariance.commute_double", anchor::IDENTITIES, id_tol),
            at_most("invariance.commute_check_space", anchor::IDENTITIES, id_tol),
        ],
        |c, s| {
            let mut samples = Vec::with_capacity(plan.invariance);
            for _ in 0..plan.invariance {
                let kk = dg.g().exp(&s.uniform_box(n, c.hw()));
                let h = sub.h_exp(&s.uniform_box(k, c.hw()));
                samples.push((kk, h, model.sample_constraint(s, c.hw())?));
            }
            let r = model.invariance_residuals(&samples)?;
            Ok(r.iter().map(|&x| out(plan.invariance, x)).collect())
        },
    );
    ctx.group(
        vec![
            at_most("induction.check_momentum", anchor::CHECK_MOMENTUM, 1e-4),
            at_most("induction.check_action_law", anchor::RIGHT_TO_LEFT, 1e-8),
            at_most("induction.residual_momentum", anchor::WELL_DEFINED, 1e-4),
        ],
        |c, s| {
            let mut r = [0.0_f64; 3];
            let count = plan.momentum;
            for _ in 0..count {
                let p = s.uniform_box(model.check.p_dim, c.hw());
                let (g, u) = random_double(c, s);
                let x = model.join(&p, &g.mul(&u));
                let y = s.uniform_box(k, 1.0);
                r[0] = r[0].max(momentum_residual(&model.check.momentum, &y, &x, &c.cfg)?);
                let h1 = sub.h_exp(&s.uniform_box(k, c.hw()));
                let h2 = sub.h_exp(&s.uniform_box(k, c.hw()));
                r[1] = r[1].max(model.check.action.composition_residual(&h1, &h2, &x)?);
                let xa = s.uniform_box(n, 1.0);
                r[2] = r[2].max(momentum_residual(
                    &model.check.residual_momentum,
                    &xa,
                    &x,
                    &c.cfg,
                )?);
            }
            Ok(r.iter().map(|&x| out(count, x)).collect())
        },
    );
    ctx.group(
        vec![
            at_most("induction.projection_fixed", anchor::SUBMERSION, 1e-12),
            at_most("induction.projection_characterization", anchor::PAIRS, 1e-9),
            at_most("induction.projection_basin", anchor::SUBMERSION, 0.05),
        ],
        |c, s| {
            let mut fixed = 0.0_f64;
            let mut charac = 0.0_f64;
            let mut failed = 0usize;
            for _ in 0..plan.projection_trials {
                let x = model.sample_constraint(s, c.hw())?;
                fixed = fixed.max(sp.distance(&model.project(&x)?, &x));
                let y = sp.retract(&x, &s.uniform_box(dim, 0.1))?;
                match model.project(&y) {
                    Ok(q) if model.constraint(&q)?.amax() < 1e-9 => {
                        let (p, d) = model.split(&q);
                        let (_, u) = dg.factorize(&d, FactorOrder::GU)?;
                        charac = charac.max((model.p_momentum(&p)? - sub.istar(&u)?).amax());
                    }
                    _ => failed += 1,
                }
            }
            let t = plan.projection_trials;
            Ok(vec![
                out(t, fixed),
                out(t, charac),
                out(t, failed as f64 / t.max(1) as f64),
            ])
        },
    );
    // canonical sample points shared by the pointwise checks below
    let canon: Vec<Point> = {
        let mut s = ctx.sampler("induction.canonical-points");
        let mut v = Vec::new();
        for _ in 0..plan.characteristic {
            match model
                .sample_constraint(&mut s, ctx.hw())
                .and_then(|x| model.canonical(&x))
            {
                Ok(x) => v.push(x),
                Err(e) => ctx
                    .report
                    .warnings
                    .push(format!("induction.canonical-points: {e}")),
            }
        }
        v
    };
    ctx.group(
        vec![
            at_most("induction.gauge_idempotent", anchor::QUOTIENT, 1e-9),
            at_most("induction.gauge_equivalence", anchor::QUOTIENT, 1e-8),
            at_most("induction.residual_drift", anchor::IDENTITIES, 1e-8),
            at_most("induction.jl_orbit_invariance", anchor::WELL_DEFINED, 1e-8),
        ],
        |c, s| {
            let mut r = [0.0_f64; 4];
            for x in &canon {
                r[0] = r[0].max(sp.distance(&model.gauge(x)?, x));
                let h = sub.h_exp(&s.uniform_box(k, c.hw()));
                let moved = model.check.action.apply(&h, x)?;
                let (g2, y) = model.gauge_with_parameter(&moved)?;
                let back = model.check.action.apply(&sub.h_exp(&y), &moved)?;
                r[1] = r[1].max(sp.distance(&back, &g2)).max(sp.distance(&g2, x));
                let kk = dg.g().exp(&s.uniform_box(n, c.hw()));
                let lk = model.check.residual_action.apply(&kk, x)?;
                r[2] = r[2].max((model.constraint(&lk)? - model.constraint(x)?).amax());
                let jl = model.induced_momentum(x)?;
                r[3] = r[3].max(jl.distance(&model.induced_momentum(&moved)?));
            }
            Ok(r.iter().map(|&x| out(canon.len(), x)).collect())
        },
    );
    ctx.group(
        vec![
            at_most("induction.characteristic_rank", anchor::CHARACTERISTIC, 0.0),
            at_most(
                "induction.characteristic_span",
                anchor::CHARACTERISTIC,
                1e-6,
            ),
            at_most("induction.clean_intersection", anchor::CLEAN, 0.0),
        ],
        |c, _| {
            let mut rank_dev = 0usize;
            let mut span = 0.0_f64;
            let mut unstable = false;
            for x in &canon {
                let (sc, defect) = model.characteristic_vs_orbit(x)?;
                rank_dev = rank_dev.max(sc.rank().abs_diff(k));
                span = span.max(defect);
                unstable |= sc.unstable;
            }
            let clean = clean_intersection_report(
                model.space(),
                &|y: &Point| model.constraint(y),
                &canon,
                &c.cfg,
            )?;
            let m = canon.len();
            Ok(vec![
                Outcome {
                    samples: m,
                    residual: rank_dev as f64,
                    unstable,
                },
                out(m, span),
                Outcome {
                    samples: m,
                    residual: if clean.rank_jump { 1.0 } else { 0.0 },
                    unstable: clean.unstable,
                },
            ])
        },
    );
    let nb = plan.bracket.min(canon.len());
    ctx.group(
        vec![
            at_most("induction.bracket_antisymmetry", anchor::EXTENSIONS, 1e-8),
            at_most("induction.bracket_jacobi", anchor::JACOBI, 1e-4),
        ],
        |_, s| {
            let (mut anti, mut jac) = (0.0_f64, 0.0_f64);
            for x in &canon[..nb] {
                let f = model.coordinate_function(x, s.uniform_box(dim, 1.0));
                let h = model.coordinate_function(x, s.uniform_box(dim, 1.0));
                let g = model.coordinate_function(x, s.uniform_box(dim, 1.0));
                let fh = model.induced_bracket(&f, &h, x)?;
                let hf = model.induced_bracket(&h, &f, x)?;
                anti = anti.max((fh + hf).abs());
                jac = jac.max(model.induced_jacobi(&f, &h, &g, x)?);
            }
            Ok(vec![out(nb, anti), out(nb, jac)])
        },
    );
    let na = plan.induced_action.min(canon.len());
    ctx.group(
        vec![
            at_most("induction.action_law", anchor::INDUCED, 1e-7),
            at_most("induction.induced_momentum", anchor::GENERATOR, 1e-4),
            at_most("induction.poisson_action", anchor::CRITERION, 1e-4),
        ],
        |c, s| {
            let mut r = [0.0_f64; 3];
            for x in &canon[..na] {
                let e = dg.g().identity();
                r[0] = r[0].max(sp.distance(&model.induced_apply(&e, x)?, x));
                let k1 = dg.g().exp(&s.uniform_box(n, c.hw()));
                let k2 = dg.g().exp(&s.uniform_box(n, c.hw()));
                let a = model.induced_apply(&k1.mul(&k2), x)?;
                let b = model.induced_apply(&k1, &model.induced_apply(&k2, x)?)?;
                r[0] = r[0].max(sp.distance(&a, &b));
                let fs: Vec<_> = (0..dim)
                    .map(|i| {
                        model.coordinate_function(
                            x,
                            DVector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 }),
                        )
                    })
                    .collect();
                let refs: Vec<&dyn Fn(&Point) -> Result<f64>> = fs
                    .iter()
                    .map(|f| f as &dyn Fn(&Point) -> Result<f64>)
                    .collect();
                r[1] =
                    r[1].max(model.induced_momentum_residual(&s.uniform_box(n, 1.0), x, &refs)?);
                let f = model.coordinate_function(x, s.uniform_box(dim, 1.0));
                let h = model.coordinate_function(x, s.uniform_box(dim, 1.0));
                r[2] =
                    r[2].max(model.induced_action_residual(&s.uniform_box(n, 1.0), &f, &h, x)?);
            }
            Ok(r.iter().map(|&x| out(na, x)).collect())
        },
    );
    Ok(())
}

fn point_checks(ctx: &mut Ctx) -> Result<()> {
    let sc = ctx.sc;
    let dg = sc.double.clone();
    let sub = sc.require_subgroup()?.clone();
    let u0 = sc.base_point("u0")?;
    let slice = sc.gauge_slice()?;
    let count = sc.spec.samples.point_induction;
    ctx.group(
        vec![
            at_most("point.dressing_invariance", anchor::POINT, 1e-8),
            at_most("point.q_relation", anchor::Q_RELATION, 1e-5),
            at_most("point.q_relation_identity", anchor::MODIFICATION, 1e-5),
            at_most("point.modification_vanishes", anchor::MODIFICATION, 1e-12),
            at_most("point.roundtrip", anchor::SYMPLECTIC, 1e-9),
            at_most("point.image_in_annihilator", anchor::SYMPLECTIC, 1e-9),
        ],
        |c, s| {
            let rep = point_induction(&dg, &sub, slice, &u0, s, count, c.hw(), &c.cfg)?;
            Ok(vec![
                out(count.max(5), rep.dressing_invariance),
                out(count, rep.q_relation),
                out(count, rep.q_relation_identity),
                out(1, rep.modification_identity),
                out(count, rep.roundtrip),
                out(count, rep.image_in_annihilator),
            ])
        },
    );
    Ok(())
}

fn orbit_checks(ctx: &mut Ctx) -> Result<()> {
    let sc = ctx.sc;
    let dg = sc.double.clone();
    let sub = sc.require_subgroup()?.clone();
    let w = dg.gstar().exp(&sc.base_point("w")?);
    let v = sc.base_point("v")?;
    let slice = sc.gauge_slice()?;
    let plan = sc.spec.samples.clone();
    let zero = dg.bialgebra().is_zero_structure();
    let mut s = ctx.sampler("orbit");
    let rep = match orbit_induction(
        &dg,
        &sub,
        slice,
        &v,
        &w,
        &mut s,
        plan.orbit_condition,
        plan.orbit_membership,
        ctx.hw(),
        &ctx.cfg,
    ) {
        Ok(r) => Some(r),
        Err(e) => {
            ctx.report.warnings.push(format!("orbit: {e}"));
            None
        }
    };
    let membership_tol = if zero { 1e-8 } else { ORBIT_MEMBERSHIP_TOL };
    let holds = rep.as_ref().map(|r| r.condition_holds).unwrap_or(true);
    if let Some(r) = &rep {
        if !r.condition_holds {
            ctx.report.warnings.push(format!(
                "orbit.condition: the sampled fibre condition fails (residual {:.3e}); orbit membership is not required",
                r.condition_residual
            ));
        }
    }
    let mut specs = vec![
        Spec {
            id: "orbit.condition",
            anchor: anchor::FIBRE,
            tol: ORBIT_MEMBERSHIP_TOL,
            rule: Rule::Report,
        },
        Spec {
            id: "orbit.membership",
            anchor: anchor::ORBIT,
            tol: membership_tol,
            rule: Rule::Given(holds),
        },
        at_most("orbit.class_formula", anchor::PAIRS, 1e-9),
        at_most("orbit.action_coincidence", anchor::PAIRS, 1e-9),
    ];
    if zero {
        specs.push(at_most("orbit.classical", anchor::COADJOINT, 1e-8));
    }
    ctx.group(specs, move |_, _| {
        let r = rep.ok_or_else(|| Error::Unsupported("orbit induction did not run".into()))?;
        let mut o = vec![
            out(r.condition_samples, r.condition_residual),
            out(r.membership_samples, r.membership_residual),
            out(r.membership_samples, r.class_formula),
            out(r.membership_samples, r.action_coincidence),
        ];
        if let Some(c) = r.classical {
            o.push(out(r.membership_samples, c));
        }
        Ok(o)
    });
    Ok(())
}
