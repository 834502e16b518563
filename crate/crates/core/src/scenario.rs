//! Scenario files: a JSON description of a bialgebra, its matrix
//! realizations, an optional subgroup block, base points, a sample plan and
//! tolerance overrides. Loading builds every object and runs the algebraic
//! invariant checks before anything else sees the scenario.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bialgebra::{
    double_algebra, pairing_invariance_residual, BivectorKind, DoubleGroup, FactorizationMode,
    LieBialgebraData,
};
use crate::error::{Error, Result};
use crate::lie::{LieAlgebraData, MatrixGroup, Membership};
use crate::momentum::{subgroup_zero_structure_residual, IStar, SubgroupData};
use crate::numerics::{Sampler, ToleranceConfig};
use crate::reduction::HamiltonianSpace;

/// Environment variable holding `key=value,...` tolerance overrides.
pub const TOLERANCE_ENV: &str = "PLIE_TOLERANCES";

/// Scenarios shipped with the crate, by name.
pub const BUILTIN: &[(&str, &str)] = &[
    ("su2-torus", include_str!("../scenarios/su2-torus.json")),
    (
        "semidirect-zero",
        include_str!("../scenarios/semidirect-zero.json"),
    ),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub labels: Vec<String>,
    /// Nonzero structure constants `(i, j, k, c^k_ij)`, both orders listed.
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BialgebraSpec {
    pub g: AlgebraSpec,
    pub gstar: AlgebraSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    /// Basis matrices as lists of rows.
    pub basis: Vec<Vec<Vec<f64>>>,
    pub membership: Vec<Membership>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSpec {
    pub membership: Vec<Membership>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupsSpec {
    pub g: GroupSpec,
    pub gstar: GroupSpec,
    pub d: DoubleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    pub h_indices: Vec<usize>,
    pub istar: IStar,
    pub hcirc_indices: Vec<usize>,
    pub sstar_indices: Vec<usize>,
    /// Entries `(row, col)` of the `G`-factor matrix fixed to zero by the gauge.
    pub gauge_slice: Vec<(usize, usize)>,
}

/// Coordinates: `w`, `w0` on the algebra of `G*` (the point is `exp`);
/// `v`, `u0` in the additive `H*`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePoints {
    #[serde(default)]
    pub w: Option<Vec<f64>>,
    #[serde(default)]
    pub v: Option<Vec<f64>>,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub w0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplePlan {
    pub seed: u64,
    /// Half-width of the coordinate box for random algebra elements.
    pub half_width: f64,
    pub poisson: usize,
    pub pi_plus_rank: usize,
    pub factorization: usize,
    pub momentum: usize,
    pub identities: usize,
    pub classical: usize,
    pub invariance: usize,
    pub characteristic: usize,
    pub projection_trials: usize,
    pub bracket: usize,
    pub induced_action: usize,
    pub point_induction: usize,
    pub orbit_condition: usize,
    pub orbit_membership: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            seed: 0,
            half_width: 0.5,
            poisson: 50,
            pi_plus_rank: 25,
            factorization: 50,
            momentum: 25,
            identities: 25,
            classical: 50,
            invariance: 25,
            characteristic: 25,
            projection_trials: 100,
            bracket: 10,
            induced_action: 10,
            point_induction: 25,
            orbit_condition: 10,
            orbit_membership: 20,
        }
    }
}

/// Standing hypotheses of the induction construction, recorded, not verified.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hypotheses {
    pub complete: bool,
    pub connected: bool,
    pub simply_connected: bool,
    pub proper_action: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub bialgebra: BialgebraSpec,
    pub groups: GroupsSpec,
    pub factorization_mode: FactorizationMode,
    pub bivector: BivectorKind,
    #[serde(default)]
    pub subgroup: Option<SubgroupSpec>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpace>,
    #[serde(default)]
    pub base_points: BasePoints,
    #[serde(default)]
    pub samples: SamplePlan,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub hypotheses: Hypotheses,
}

/// A loaded, validated scenario.
#[derive(Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub double: DoubleGroup,
    pub subgroup: Option<SubgroupData>,
    pub cfg: ToleranceConfig,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn seed(&self) -> u64 {
        self.spec.samples.seed
    }

    pub fn require_subgroup(&self) -> Result<&SubgroupData> {
        self.subgroup
            .as_ref()
            .ok_or_else(|| Error::ParseError("scenario has no `subgroup` block".into()))
    }

    pub fn gauge_slice(&self) -> Result<Vec<(usize, usize)>> {
        self.spec
            .subgroup
            .as_ref()
            .map(|s| s.gauge_slice.clone())
            .ok_or_else(|| Error::ParseError("scenario has no `subgroup` block".into()))
    }

    pub fn require_hamiltonian(&self) -> Result<&HamiltonianSpace> {
        self.spec
            .hamiltonian
            .as_ref()
            .ok_or_else(|| Error::ParseError("scenario has no `hamiltonian` block".into()))
    }

    pub fn base_point(&self, key: &str) -> Result<DVector<f64>> {
        let b = &self.spec.base_points;
        let v = match key {
            "w" => &b.w,
            "v" => &b.v,
            "u0" => &b.u0,
            "w0" => &b.w0,
            _ => &None,
        };
        v.as_ref()
            .map(|x| DVector::from_column_slice(x))
            .ok_or_else(|| {
                Error::ParseError(format!(
                    "scenario has no base point `{key}` in `base_points`"
                ))
            })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.spec.samples.seed = seed;
        self.cfg.seed = seed;
    }

    pub fn sampler(&self, stream: &str) -> Sampler {
        Sampler::for_stream(self.seed(), stream)
    }
}

fn invariant(name: &str, index: impl Into<String>, residual: f64) -> Error {
    Error::InvariantFailure {
        invariant: name.into(),
        index: index.into(),
        residual,
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::ParseError(format!(
            "{what}: basis matrix must be square and nonempty"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn build_group(spec: &GroupSpec, alg: LieAlgebraData, what: &str) -> Result<MatrixGroup> {
    if spec.basis.len() != alg.dim() {
        return Err(Error::ParseError(format!(
            "{what}: {} basis matrices for an algebra of dimension {}",
            spec.basis.len(),
            alg.dim()
        )));
    }
    let basis = spec
        .basis
        .iter()
        .map(|m| matrix(m, what))
        .collect::<Result<Vec<_>>>()?;
    if basis.iter().any(|b| b.nrows() != basis[0].nrows()) {
        return Err(Error::ParseError(format!(
            "{what}: basis matrices differ in size"
        )));
    }
    MatrixGroup::new(&spec.name, alg, basis, spec.membership.clone())
}

fn algebra(spec: &AlgebraSpec, what: &str) -> Result<LieAlgebraData> {
    let a = LieAlgebraData::from_entries(spec.labels.clone(), &spec.brackets)
        .map_err(|e| Error::ParseError(format!("{what}: {e}")))?;
    a.validate(what)?;
    Ok(a)
}

/// Parses and validates a scenario from JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let spec: ScenarioSpec =
        serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    build_scenario(spec)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

/// A shipped scenario by name.
pub fn builtin(name: &str) -> Result<Scenario> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| parse_scenario(t))
        .unwrap_or_else(|| {
            Err(Error::ParseError(format!(
                "no shipped scenario named `{name}`"
            )))
        })
}

/// A path if it exists, otherwise a shipped scenario name.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let p = Path::new(arg);
    if p.exists() {
        load_scenario(p)
    } else if BUILTIN.iter().any(|(n, _)| *n == arg) {
        builtin(arg)
    } else {
        Err(Error::Io(format!(
            "scenario `{arg}` is neither a file nor a shipped scenario"
        )))
    }
}

pub fn build_scenario(spec: ScenarioSpec) -> Result<Scenario> {
    spec.tolerances.validate()?;
    let g_alg = algebra(&spec.bialgebra.g, "g")?;
    let u_alg = algebra(&spec.bialgebra.gstar, "g*")?;
    let bialgebra = LieBialgebraData::new(g_alg.clone(), u_alg.clone())?;
    bialgebra.validate()?;
    let d_alg = double_algebra(&bialgebra);
    d_alg.validate("d")?;
    let pr = pairing_invariance_residual(&d_alg);
    if pr > 1e-12 {
        return Err(invariant("pairing ad-invariance", "d", pr));
    }
    let g = build_group(&spec.groups.g, g_alg, "G")?;
    let u = build_group(&spec.groups.gstar, u_alg, "G*")?;
    let double = DoubleGroup::new(
        bialgebra,
        g,
        u,
        spec.groups.d.membership.clone(),
        spec.factorization_mode,
        spec.bivector,
    )?;
    let n = double.n();
    let mut cfg = spec.tolerances;
    cfg.seed = spec.samples.seed;

    let subgroup = match &spec.subgroup {
        None => None,
        Some(s) => {
            let sub = SubgroupData::new(
                double.g(),
                double.gstar(),
                s.h_indices.clone(),
                s.istar.clone(),
                s.hcirc_indices.clone(),
                s.sstar_indices.clone(),
            )?;
            let m = double.g().size();
            if s.gauge_slice.len() != sub.k()
                || s.gauge_slice.iter().any(|&(r, c)| r >= m || c >= m)
            {
                return Err(Error::ParseError(
                    "subgroup: gauge_slice must list dim h entries inside G".into(),
                ));
            }
            check_subgroup(&double, &sub, spec.samples.seed)?;
            Some(sub)
        }
    };

    let b = &spec.base_points;
    for (key, val, want) in [("w", &b.w, n), ("w0", &b.w0, n)] {
        if let Some(v) = val {
            if v.len() != want {
                return Err(Error::ParseError(format!(
                    "base point `{key}` must have {want} coordinates"
                )));
            }
        }
    }
    if let Some(sub) = &subgroup {
        for (key, val) in [("v", &b.v), ("u0", &b.u0)] {
            if let Some(v) = val {
                if v.len() != sub.k() {
                    return Err(Error::ParseError(format!(
                        "base point `{key}` must have {} coordinates",
                        sub.k()
                    )));
                }
            }
        }
        if let (Some(u0), Some(w0)) = (&b.u0, &b.w0) {
            let s = double
                .gstar()
                .log(&sub.sstar(&DVector::from_column_slice(u0)))?;
            let r = (s - DVector::from_column_slice(w0)).amax();
            if r > 1e-9 {
                return Err(invariant("w0 = s*(u0)", "base_points", r));
            }
        }
    }
    Ok(Scenario {
        spec,
        double,
        subgroup,
        cfg,
    })
}

/// `i*` is a morphism killing `H°` with `s*` as a section, and `pi_G`
/// vanishes on `H`.
fn check_subgroup(dg: &DoubleGroup, sub: &SubgroupData, seed: u64) -> Result<()> {
    let mut s = Sampler::for_stream(seed, "subgroup-invariants");
    let n = dg.n();
    let k = sub.k();
    for i in 0..10 {
        let u = dg.gstar().exp(&s.uniform_box(n, 0.5));
        let v = dg.gstar().exp(&s.uniform_box(n, 0.5));
        let checks = [
            ("i* morphism", sub.morphism_residual(&u, &v)?),
            (
                "H° in kernel of i*",
                sub.hcirc_residual(&s.uniform_box(n - k, 0.5))?,
            ),
            (
                "s* section of i*",
                sub.section_residual(&s.uniform_box(k, 0.5))?,
            ),
            (
                "pi_G vanishes on H",
                subgroup_zero_structure_residual(dg, sub, &s.uniform_box(k, 1.0))?,
            ),
        ];
        for (name, r) in checks {
            if r > 1e-9 {
                return Err(invariant(name, format!("sample {i}"), r));
            }
        }
    }
    Ok(())
}

/// Applies `key=value,...` overrides to a tolerance profile.
pub fn apply_overrides(mut cfg: ToleranceConfig, text: &str) -> Result<ToleranceConfig> {
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            Error::ParseError(format!("tolerance override `{item}` is not key=value"))
        })?;
        let bad =
            |_| Error::ParseError(format!("tolerance override `{item}` has a malformed value"));
        match k.trim() {
            "fd_step" => cfg.fd_step = v.trim().parse().map_err(bad)?,
            "newton_tol" => cfg.newton_tol = v.trim().parse().map_err(bad)?,
            "newton_max_iter" => {
                cfg.newton_max_iter = v.trim().parse().map_err(|_| {
                    Error::ParseError(format!("tolerance override `{item}` has a malformed value"))
                })?
            }
            "residual_pass" => cfg.residual_pass = v.trim().parse().map_err(bad)?,
            "richardson" => {
                cfg.richardson = v.trim().parse().map_err(|_| {
                    Error::ParseError(format!("tolerance override `{item}` has a malformed value"))
                })?
            }
            other => {
                return Err(Error::ParseError(format!(
                    "unknown tolerance key `{other}`"
                )))
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// File values, then the environment profile, then explicit overrides.
pub fn effective_tolerances(
    scenario: &Scenario,
    env: Option<&str>,
    fd_step: Option<f64>,
) -> Result<ToleranceConfig> {
    let mut cfg = scenario.cfg;
    if let Some(e) = env {
        cfg = apply_overrides(cfg, e)?;
    }
    if let Some(h) = fd_step {
        cfg = cfg.with_fd_step(h);
        cfg.validate()?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_load() {
        for (name, _) in BUILTIN {
            let s = builtin(name).unwrap();
            assert_eq!(s.name(), *name);
            assert!(s.subgroup.is_some());
        }
        assert!(builtin("nope").is_err());
    }

    fn su2_json() -> serde_json::Value {
        serde_json::from_str(BUILTIN[0].1).unwrap()
    }

    #[test]
    fn broken_antisymmetry_is_named() {
        let mut v = su2_json();
        let br = v["bialgebra"]["g"]["brackets"].as_array_mut().unwrap();
        br[0][3] = serde_json::json!(7.0);
        let err = parse_scenario(&v.to_string()).err().unwrap();
        match err {
            Error::InvariantFailure { invariant, .. } => {
                assert!(invariant.contains("antisymmetry"), "{invariant}")
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bad_embedding_and_dimensions() {
        let mut v = su2_json();
        v["groups"]["g"]["basis"].as_array_mut().unwrap().pop();
        assert!(matches!(
            parse_scenario(&v.to_string()),
            Err(Error::ParseError(_))
        ));
        let mut v = su2_json();
        v["base_points"]["w"] = serde_json::json!([1.0]);
        assert!(matches!(
            parse_scenario(&v.to_string()),
            Err(Error::ParseError(_))
        ));
        let mut v = su2_json();
        v["unknown_block"] = serde_json::json!(1);
        assert!(matches!(
            parse_scenario(&v.to_string()),
            Err(Error::ParseError(_))
        ));
    }

    #[test]
    fn missing_subgroup_is_reported() {
        let mut v = su2_json();
        v.as_object_mut().unwrap().remove("subgroup");
        let s = parse_scenario(&v.to_string()).unwrap();
        let e = s.require_subgroup().err().unwrap();
        assert!(e.to_string().contains("subgroup"));
    }

    #[test]
    fn tolerance_precedence() {
        let s = builtin("su2-torus").unwrap();
        let c = effective_tolerances(&s, Some("fd_step=2e-5, newton_tol=1e-11"), None).unwrap();
        assert_eq!(c.fd_step, 2e-5);
        assert_eq!(c.newton_tol, 1e-11);
        let c = effective_tolerances(&s, Some("fd_step=2e-5"), Some(3e-5)).unwrap();
        assert_eq!(c.fd_step, 3e-5);
        assert!(apply_overrides(c, "bogus=1").is_err());
        assert!(apply_overrides(c, "fd_step=-1").is_err());
        assert!(apply_overrides(c, "fd_step").is_err());
    }
}
