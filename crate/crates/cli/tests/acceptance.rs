//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances: exact equality everywhere except the float
//! LP comparison (1e-7).

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use quadlin::bounds::{self, BoundReport, RltForm, SkewStrategy};
use quadlin::graph::{fixtures, Dag};
use quadlin::lp;
use quadlin::model::{self, random, BqpInstance, QsppInstance};
use quadlin::qspplin::{self, LinearizationOutcome};
use quadlin::{Rational, RationalMatrix, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 1 << 20;
const FLOAT_LP_TOL: f64 = 1e-7;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flow(g: &Dag) -> BqpInstance {
    let m = g.m();
    model::qspp_to_bqp(&QsppInstance::new(g.clone(), RationalMatrix::zeros(m, m)).unwrap())
}

fn linearizable_cost<R: Rng>(rng: &mut R, g: &Dag) -> RationalMatrix {
    let f = flow(g);
    let y = random::int_matrix(rng, f.rows(), g.m(), -5, 5);
    let z = random::int_vector(rng, g.m(), -5, 5);
    model::make_linearizable(&f, &y, &z, rng.gen_bool(0.5)).unwrap().0
}

fn path_identity(inst: &QsppInstance, c: &[Rational]) -> bool {
    inst.graph
        .enumerate_st_paths(CAP)
        .unwrap()
        .iter()
        .all(|p| inst.path_cost(&p.arcs) == p.arcs.iter().map(|&a| &c[a]).sum::<Rational>())
}

fn tournament_opt() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for (n, want) in [(13, "38/1"), (14, "45/1"), (15, "50/1")] {
        let start = Instant::now();
        let file = dir.path().join(format!("t{n}.txt"));
        let file = file.to_str().unwrap();
        let n_arg = n.to_string();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = quadlin_cli::run(["quadlin", "generate", "tournament", "--n", &n_arg, "-o", file], &mut out, &mut err);
        ensure(code == 0, || format!("generate n={n} exited {code}"))?;
        out.clear();
        let code = quadlin_cli::run(["quadlin", "opt", file], &mut out, &mut err);
        ensure(code == 0, || format!("opt n={n} exited {code}: {}", String::from_utf8_lossy(&err)))?;
        let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
        let got = v["opt"].as_str().unwrap_or("?").to_string();
        let secs = start.elapsed();
        ensure(got == want, || format!("n={n}: OPT {got}, expected {want}"))?;
        ensure(secs < Duration::from_secs(60), || format!("n={n} took {secs:?}"))?;
        found.push(format!("n={n}: {got} in {:.2}s", secs.as_secs_f64()));
    }
    Ok(found.join(", "))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let count = 200;
    for k in 0..count {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(n - 1..=20);
        let g = random::corridor_dag(&mut rng, n, m);
        let inst = QsppInstance::new(g.clone(), linearizable_cost(&mut rng, &g)).unwrap();
        match qspplin::linearize_qspp(&inst).map_err(|e| e.to_string())? {
            LinearizationOutcome::Linearizable(c) => {
                ensure(path_identity(&inst, &c.entries), || format!("case {k}: c fails on some path"))?
            }
            LinearizationOutcome::NotLinearizable(w) => return Err(format!("case {k}: rejected at arc {}", w.arc)),
        }
    }
    Ok(format!("{count}/{count} linearizable, identity exact on all paths"))
}

fn perturbation_soundness() -> Outcome {
    let dd = fixtures::double_diamond();
    let mut hand = RationalMatrix::zeros(8, 8);
    hand[(0, 6)] = Rational::one();
    hand[(6, 0)] = Rational::one();
    let witness = QsppInstance::new(dd.clone(), hand).unwrap();
    ensure(!qspplin::linearize_qspp(&witness).map_err(|e| e.to_string())?.is_linearizable(), || {
        "hand double-diamond instance accepted".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let count = 200;
    let (mut rejected, mut accepted) = (0, 0);
    for k in 0..count {
        let g = if k % 2 == 0 {
            dd.clone()
        } else {
            loop {
                let (n, m) = (rng.gen_range(5..=8), rng.gen_range(8..=14));
                let g = random::corridor_dag(&mut rng, n, m);
                if g.enumerate_st_paths(CAP).unwrap().len() > g.arc_basis().basic_count() {
                    break g;
                }
            }
        };
        let mut q = linearizable_cost(&mut rng, &g);
        let m = g.m();
        let (i, j) = loop {
            let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
            if i != j {
                break (i, j);
            }
        };
        q[(i, j)] += Rational::from_integer(rng.gen_range(1..=5));
        let inst = QsppInstance::new(g, q).unwrap();
        let oracle = model::linearization_by_enumeration(&inst, CAP).map_err(|e| e.to_string())?;
        match qspplin::linearize_qspp(&inst).map_err(|e| e.to_string())? {
            LinearizationOutcome::NotLinearizable(_) => {
                ensure(oracle.is_none(), || format!("case {k}: rejected but the path system is solvable"))?;
                rejected += 1;
            }
            LinearizationOutcome::Linearizable(c) => {
                ensure(oracle.is_some() && path_identity(&inst, &c.entries), || {
                    format!("case {k}: accepted but the path system disagrees")
                })?;
                accepted += 1;
            }
        }
    }
    Ok(format!(
        "{count} perturbations, {rejected} rejected (all confirmed infeasible), {accepted} still linearizable; hand witness rejected"
    ))
}

fn spanning_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let count = 50;
    let mut members = 0;
    let mut in_span = 0;
    for k in 0..count {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(n - 1..=16);
        let g = random::corridor_dag(&mut rng, n, m);
        let span = qspplin::spanning_set(&g).map_err(|e| e.to_string())?;
        let f = flow(&g);
        for (q, c) in &span.basis {
            ensure(model::is_linearization(&f, q, c, CAP).unwrap(), || format!("case {k}: basis member fails"))?;
        }
        members += span.dimension();
        let q = if k % 2 == 0 {
            linearizable_cost(&mut rng, &g)
        } else {
            random::int_matrix(&mut rng, g.m(), g.m(), -3, 3)
        };
        let inst = QsppInstance::new(g, q).unwrap();
        let verdict = qspplin::linearize_qspp(&inst).map_err(|e| e.to_string())?.is_linearizable();
        let member = span.contains(&inst.cost);
        ensure(verdict == member, || format!("case {k}: decision {verdict}, span membership {member}"))?;
        in_span += usize::from(member);
    }
    Ok(format!("{count} graphs agree ({in_span} in span), {members} basis members verified"))
}

fn chain_instances() -> Vec<BqpInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut out = Vec::new();
    for k in 0..100 {
        if k % 10 < 7 {
            let n = rng.gen_range(4..=8);
            let m = rng.gen_range(n..=16);
            out.push(model::qspp_to_bqp(&random::qspp(&mut rng, n, m, -6, 12, 0.6)));
        } else {
            let n = rng.gen_range(2..=4);
            out.push(random::qap(&mut rng, n, 9));
        }
    }
    out
}

fn bound_chain() -> Outcome {
    let instances = chain_instances();
    let (mut strict_star, mut tight) = (0, 0);
    for (k, inst) in instances.iter().enumerate() {
        let err = |e: quadlin::Error| format!("instance {k}: {e}");
        let opt = model::brute_force_opt(inst, CAP).map_err(err)?.0;
        let reports: Vec<BoundReport<Rational>> = vec![
            bounds::gl_bound(inst).map_err(err)?,
            bounds::ggl_bound(inst, SkewStrategy::UpperTriangular, bounds::GGL_DEFAULT_MAX_ITER).map_err(err)?,
            bounds::ggl_bound(inst, SkewStrategy::Symmetrize, bounds::GGL_DEFAULT_MAX_ITER).map_err(err)?,
            bounds::lbb_prime(inst, false).map_err(err)?,
            bounds::rlt1(inst, false, RltForm::Symmetric).map_err(err)?,
            bounds::lbb_star(inst, false, CAP).map_err(err)?,
        ];
        for r in &reports {
            ensure(bounds::verify_certificate(inst, r), || format!("instance {k}: {} certificate", r.label))?;
        }
        bounds::verify_chain(&reports, Some(&opt)).map_err(err)?;
        ensure(reports[3].value == reports[4].value, || {
            format!("instance {k}: LBB' {} != RLT1 {}", reports[3].value, reports[4].value)
        })?;
        strict_star += usize::from(reports[5].value > reports[4].value);
        tight += usize::from(reports[5].value == opt);
    }
    Ok(format!(
        "{} instances (70 QSPP, 30 QAP); LBB' = RLT1 exactly on all; RLT1 < LBB* on {strict_star}; LBB* = OPT on {tight}",
        instances.len()
    ))
}

fn reformulation_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut instances = Vec::new();
    for _ in 0..8 {
        let n = rng.gen_range(4..=7);
        let m = rng.gen_range(n..=14);
        instances.push(model::qspp_to_bqp(&random::qspp(&mut rng, n, m, -6, 12, 0.6)));
    }
    for _ in 0..2 {
        instances.push(random::qap(&mut rng, 3, 9));
    }
    let pairs = 50;
    for (k, inst) in instances.iter().enumerate() {
        let base = bounds::lbb_prime::<Rational>(inst, false).map_err(|e| e.to_string())?.value;
        for p in 0..pairs {
            let s = random::skew_matrix(&mut rng, inst.m(), 6);
            let d = random::int_vector(&mut rng, inst.m(), -6, 6);
            let re = model::reformulate(inst, &s, &d).map_err(|e| e.to_string())?;
            let v = bounds::lbb_prime::<Rational>(&re, false).map_err(|e| e.to_string())?.value;
            ensure(v == base, || format!("instance {k} pair {p}: {v} != {base}"))?;
        }
    }
    Ok(format!("{} instances x {pairs} (S, d) pairs, LBB' bit-identical", instances.len()))
}

fn lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let big = Rational::from_integer(1_000_000);
    let count = 100;
    let mut statuses = [0usize; 3];
    for k in 0..count {
        let prog = lp::random_small_lp(&mut rng, 4, 8);
        let (status, value) = lp::solve_by_vertex_enumeration(&prog, &big);
        statuses[status as usize] += 1;
        let exact = lp::solve::<Rational>(&prog).map_err(|e| e.to_string())?;
        let float = lp::solve::<f64>(&prog).map_err(|e| e.to_string())?;
        ensure(exact.status == status && float.status == status, || {
            format!("LP {k}: oracle {status:?}, exact {:?}, float {:?}", exact.status, float.status)
        })?;
        if let Some(v) = value {
            ensure(exact.objective == v, || format!("LP {k}: exact {} vs oracle {v}", exact.objective))?;
            ensure(float.objective.eq_tol(&v.to_f64(), FLOAT_LP_TOL), || {
                format!("LP {k}: float {} vs oracle {v}", float.objective)
            })?;
        }
    }
    Ok(format!(
        "{count} LPs ({} optimal, {} infeasible, {} unbounded) match in exact and float mode",
        statuses[0], statuses[1], statuses[2]
    ))
}

fn sdp_columns_documented() -> Outcome {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .map_err(|e| format!("README.md: {e}"))?;
    ensure(readme.contains("SDP") && readme.contains("not reproduced"), || {
        "README does not state that the SDP columns are not reproduced".into()
    })?;
    Ok("SDP hierarchy columns not reproduced (out of scope); stated in README, criteria 1-7 substitute".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("tournament OPT 38/45/50 via generate + opt", tournament_opt),
        ("linearization round-trip on 200 random DAGs", round_trip),
        ("non-linearizability soundness on 200 perturbations", perturbation_soundness),
        ("spanning-set membership equals the decision on 50 DAGs", spanning_equivalence),
        ("bound chain GL <= GGL <= LBB' = RLT1 <= LBB* <= OPT", bound_chain),
        ("LBB' invariant under skew/diagonal reformulation", reformulation_invariance),
        ("simplex equals vertex enumeration on 100 LPs", lp_oracle),
        ("SDP columns documented as not reproduced", sdp_columns_documented),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
