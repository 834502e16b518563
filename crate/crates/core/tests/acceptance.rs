//! Acceptance criteria, one line each. Runs as a plain binary
//! (`cargo test --test acceptance`) and exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::{Command, ExitCode};

use plie::report::VerificationReport;
use plie::scenario::builtin;
use plie::suites::{run_suite, RunOptions, Suite};

const SU2: &str = "su2-torus";
const SEMI: &str = "semidirect-zero";

type Reports = HashMap<(&'static str, Suite), VerificationReport>;

fn run(name: &str, suite: Suite) -> VerificationReport {
    let sc = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
    run_suite(&sc, suite, &RunOptions::default()).unwrap_or_else(|e| panic!("{name} {suite}: {e}"))
}

/// One required bound on a check of one report.
struct Bound {
    scenario: &'static str,
    suite: Suite,
    id: &'static str,
    tol: f64,
    min_samples: usize,
    at_least: bool,
}

fn le(
    scenario: &'static str,
    suite: Suite,
    id: &'static str,
    tol: f64,
    min_samples: usize,
) -> Bound {
    Bound {
        scenario,
        suite,
        id,
        tol,
        min_samples,
        at_least: false,
    }
}

/// Returns (ok, worst description).
fn evaluate(reports: &Reports, bounds: &[Bound]) -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for b in bounds {
        let Some(c) = reports
            .get(&(b.scenario, b.suite))
            .and_then(|r| r.get(b.id))
        else {
            ok = false;
            notes.push(format!("{}:{} missing", b.scenario, b.id));
            continue;
        };
        let good = if b.at_least {
            c.max_residual >= b.tol
        } else {
            c.max_residual <= b.tol
        } && c.samples >= b.min_samples;
        if !good {
            ok = false;
            notes.push(format!(
                "{}:{} residual {:.2e} (bound {:.0e}, {} samples)",
                b.scenario, b.id, c.max_residual, b.tol, c.samples
            ));
        }
    }
    if ok {
        let worst = bounds
            .iter()
            .filter(|b| !b.at_least && b.tol > 0.0)
            .filter_map(|b| {
                let c = reports.get(&(b.scenario, b.suite))?.get(b.id)?;
                Some((c.max_residual / b.tol, b.id, c.max_residual))
            })
            .fold((0.0, "", 0.0), |a, x| if x.0 > a.0 { x } else { a });
        if worst.1.is_empty() {
            notes.push(format!("{} checks", bounds.len()));
        } else {
            notes.push(format!(
                "{} checks, tightest {} at {:.2e}",
                bounds.len(),
                worst.1,
                worst.2
            ));
        }
    }
    (ok, notes.join("; "))
}

fn main() -> ExitCode {
    use Suite::*;
    let jobs: Vec<(&'static str, Suite)> = vec![
        (SU2, VerifyInduction),
        (SU2, PointInduction),
        (SU2, InduceOrbit),
        (SEMI, VerifyInduction),
        (SEMI, InduceOrbit),
    ];
    let (reports, repeat): (Reports, VerificationReport) = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(name, suite)| s.spawn(move || ((name, suite), run(name, suite))))
            .collect();
        let again = s.spawn(|| run(SU2, VerifyInduction));
        let reports = handles
            .into_iter()
            .map(|h| h.join().expect("suite thread"))
            .collect();
        (reports, again.join().expect("repeat thread"))
    });

    let bialgebra_ids = [
        "algebra.antisymmetry",
        "algebra.jacobi",
        "bialgebra.cocycle",
        "double.pairing_invariance",
    ];
    let mut results: Vec<(u32, &str, bool, String)> = Vec::new();

    let c1: Vec<Bound> = [SU2, SEMI]
        .iter()
        .flat_map(|&sc| {
            bialgebra_ids
                .iter()
                .map(move |&id| le(sc, VerifyInduction, id, 1e-12, 1))
        })
        .collect();
    let (ok, note) = evaluate(&reports, &c1);
    results.push((1, "algebraic substrate", ok, note));

    let c2 = vec![
        le(SU2, VerifyInduction, "poisson.jacobi_g", 1e-6, 50),
        le(SU2, VerifyInduction, "poisson.multiplicativity_g", 1e-6, 50),
        le(SU2, VerifyInduction, "double.pi_plus_rank", 0.0, 25),
        le(SU2, VerifyInduction, "double.pi_minus_identity", 1e-12, 1),
    ];
    let fd_ok = builtin(SU2).map(|s| s.cfg.fd_step == 1e-5).unwrap_or(false);
    let (ok, note) = evaluate(&reports, &c2);
    results.push((2, "Poisson-Lie structure", ok && fd_ok, note));

    let c3: Vec<Bound> = [SU2, SEMI]
        .iter()
        .flat_map(|&sc| {
            [
                le(sc, VerifyInduction, "factorization.roundtrip", 1e-9, 50),
                le(sc, VerifyInduction, "factorization.gu_ug", 1e-9, 50),
                le(sc, VerifyInduction, "double.multiply", 1e-9, 50),
                le(sc, VerifyInduction, "double.associativity", 1e-8, 50),
            ]
        })
        .collect();
    let (ok, note) = evaluate(&reports, &c3);
    results.push((3, "factorization coherence", ok, note));

    let c4: Vec<Bound> = [SU2, SEMI]
        .iter()
        .flat_map(|&sc| {
            [
                le(sc, VerifyInduction, "momentum.right", 1e-5, 25),
                le(sc, VerifyInduction, "momentum.right_equivariance", 1e-5, 25),
                le(sc, VerifyInduction, "momentum.left", 1e-5, 25),
                le(sc, VerifyInduction, "momentum.left_equivariance", 1e-5, 25),
                le(sc, VerifyInduction, "momentum.jl_formula", 1e-9, 25),
            ]
        })
        .collect();
    let (ok, note) = evaluate(&reports, &c4);
    results.push((4, "momentum maps on the double", ok, note));

    let c5 = vec![
        le(
            SU2,
            VerifyInduction,
            "identity.coadjoint_projection",
            1e-5,
            25,
        ),
        le(
            SU2,
            VerifyInduction,
            "identity.dressing_coadjoint",
            1e-5,
            25,
        ),
        le(SU2, VerifyInduction, "identity.double_adjoint", 1e-5, 25),
    ];
    let (ok, note) = evaluate(&reports, &c5);
    results.push((5, "Poisson-Lie group identities", ok, note));

    let c6 = vec![
        le(SEMI, VerifyInduction, "classical.closed_forms", 1e-10, 50),
        Bound {
            at_least: true,
            ..le(SEMI, VerifyInduction, "classical.sign_control", 1e-1, 50)
        },
    ];
    let (ok, note) = evaluate(&reports, &c6);
    results.push((6, "classical limit", ok, note));

    let c7: Vec<Bound> = [SU2, SEMI]
        .iter()
        .flat_map(|&sc| {
            [
                "invariance.j_right",
                "invariance.j_left",
                "invariance.commute_double",
                "invariance.commute_check_space",
            ]
            .map(|id| le(sc, VerifyInduction, id, 1e-8, 25))
        })
        .collect();
    let (ok, note) = evaluate(&reports, &c7);
    results.push((7, "invariance identities of the momentum maps", ok, note));

    let c8 = vec![
        le(SU2, VerifyInduction, "induction.check_momentum", 1e-4, 25),
        le(
            SU2,
            VerifyInduction,
            "induction.characteristic_rank",
            0.0,
            25,
        ),
        le(
            SU2,
            VerifyInduction,
            "induction.characteristic_span",
            1e-6,
            25,
        ),
        le(
            SU2,
            VerifyInduction,
            "induction.bracket_antisymmetry",
            1e-8,
            10,
        ),
        le(SU2, VerifyInduction, "induction.bracket_jacobi", 1e-4, 10),
        le(SU2, VerifyInduction, "induction.induced_momentum", 1e-4, 10),
    ];
    let h_dim = builtin(SU2).ok().and_then(|s| s.subgroup.map(|h| h.k())) == Some(1);
    let (ok, note) = evaluate(&reports, &c8);
    results.push((8, "induction pipeline", ok && h_dim, note));

    let c9 = vec![
        le(SU2, PointInduction, "point.dressing_invariance", 1e-8, 1),
        le(SU2, PointInduction, "point.q_relation", 1e-5, 25),
        le(SU2, PointInduction, "point.q_relation_identity", 1e-5, 25),
        le(SU2, PointInduction, "point.modification_vanishes", 1e-12, 1),
        le(SU2, PointInduction, "point.roundtrip", 1e-9, 25),
    ];
    let nontrivial = builtin(SU2)
        .ok()
        .and_then(|s| s.base_point("u0").ok())
        .is_some_and(|u| u.amax() > 0.0);
    let (ok, note) = evaluate(&reports, &c9);
    results.push((9, "induction from a point", ok && nontrivial, note));

    let mut c10 = vec![
        le(SEMI, InduceOrbit, "orbit.membership", 1e-8, 20),
        le(SEMI, InduceOrbit, "orbit.classical", 1e-8, 20),
    ];
    let mut note10 = String::new();
    for sc in [SU2, SEMI] {
        let cond = reports
            .get(&(sc, InduceOrbit))
            .and_then(|r| r.get("orbit.condition"));
        match cond {
            Some(c) if c.max_residual <= 1e-6 => {
                c10.push(le(sc, InduceOrbit, "orbit.membership", 1e-6, 20));
                note10.push_str(&format!("{sc}: condition holds; "));
            }
            Some(c) => note10.push_str(&format!(
                "{sc}: condition fails ({:.2e}), membership not required; ",
                c.max_residual
            )),
            None => c10.push(le(sc, InduceOrbit, "orbit.condition", 0.0, 1)),
        }
    }
    let (ok, note) = evaluate(&reports, &c10);
    results.push((10, "induction on an orbit", ok, format!("{note10}{note}")));

    let first = reports[&(SU2, VerifyInduction)]
        .to_json()
        .unwrap_or_default();
    let second = repeat.to_json().unwrap_or_default();
    let exe = env!("CARGO_BIN_EXE_plie");
    let cli = |_: u8| {
        Command::new(exe)
            .args([
                "verify",
                SEMI,
                "--suite",
                "point-induction",
                "--format",
                "json",
            ])
            .output()
            .map(|o| o.stdout)
            .unwrap_or_default()
    };
    let (a, b) = (cli(0), cli(1));
    let ok = !first.is_empty() && first == second && !a.is_empty() && a == b;
    results.push((
        11,
        "determinism",
        ok,
        format!(
            "library {} bytes, cli {} bytes, identical: {ok}",
            first.len(),
            a.len()
        ),
    ));

    let mut all = true;
    for (n, name, ok, note) in &results {
        all &= *ok;
        println!(
            "criterion {n:>2} {:<4} {name}: {note}",
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
