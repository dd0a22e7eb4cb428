use quadlin::graph::{fixtures, Dag};
use quadlin::model::{self, random, QsppInstance};
use quadlin::qspplin::{self, LinearizationOutcome};
use quadlin::{Rational, RationalMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 1 << 16;

fn random_linearizable<R: Rng>(rng: &mut R, g: &Dag) -> QsppInstance {
    let m = g.m();
    let flow = model::qspp_to_bqp(&QsppInstance::new(g.clone(), RationalMatrix::zeros(m, m)).unwrap());
    let y = random::int_matrix(rng, flow.rows(), m, -5, 5);
    let z = random::int_vector(rng, m, -5, 5);
    let (q, _) = model::make_linearizable(&flow, &y, &z, rng.gen_bool(0.5)).unwrap();
    QsppInstance::new(g.clone(), q).unwrap()
}

fn linearizes_every_path(inst: &QsppInstance, c: &[Rational]) -> bool {
    inst.graph
        .enumerate_st_paths(CAP)
        .unwrap()
        .iter()
        .all(|p| inst.path_cost(&p.arcs) == p.arcs.iter().map(|&a| &c[a]).sum::<Rational>())
}

#[test]
fn generated_linearizable_costs_are_recognized() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..40 {
        let n = rng.gen_range(2..=9);
        let m = rng.gen_range(n - 1..=18);
        let g = random::corridor_dag(&mut rng, n, m);
        let inst = random_linearizable(&mut rng, &g);
        match qspplin::linearize_qspp(&inst).unwrap() {
            LinearizationOutcome::Linearizable(c) => {
                assert!(linearizes_every_path(&inst, &c.entries));
                assert!(c.non_basic.iter().all(|&a| c.entries[a].is_zero()));
            }
            LinearizationOutcome::NotLinearizable(w) => panic!("rejected at arc {}", w.arc),
        }
    }
}

#[test]
fn verdicts_agree_with_the_path_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut rejected = 0;
    for k in 0..60 {
        let g = if k % 2 == 0 {
            fixtures::double_diamond()
        } else {
            random::corridor_dag(&mut rng, 7, 13)
        };
        let mut inst = random_linearizable(&mut rng, &g);
        let m = g.m();
        let (i, j) = loop {
            let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
            if i != j {
                break (i, j);
            }
        };
        inst.cost[(i, j)] += Rational::from_integer(rng.gen_range(1..=4));
        let oracle = model::linearization_by_enumeration(&inst, CAP).unwrap();
        match qspplin::linearize_qspp(&inst).unwrap() {
            LinearizationOutcome::Linearizable(c) => {
                assert!(oracle.is_some());
                assert!(linearizes_every_path(&inst, &c.entries));
            }
            LinearizationOutcome::NotLinearizable(w) => {
                assert!(oracle.is_none());
                assert_ne!(w.left, w.right);
                rejected += 1;
            }
        }
    }
    assert!(rejected > 20);
}

#[test]
fn spanning_set_membership_matches_the_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for k in 0..15 {
        let (n, m) = (rng.gen_range(3..=7), rng.gen_range(6..=16));
        let g = random::corridor_dag(&mut rng, n, m);
        let span = qspplin::spanning_set(&g).unwrap();
        assert_eq!(span.dimension(), model::spanning_dimension_by_enumeration(&g, CAP).unwrap());
        let flow = model::qspp_to_bqp(&QsppInstance::new(g.clone(), RationalMatrix::zeros(g.m(), g.m())).unwrap());
        assert!(span.to_family().verify(&flow, CAP).unwrap());
        let inst = if k % 2 == 0 {
            random_linearizable(&mut rng, &g)
        } else {
            QsppInstance::new(g.clone(), random::int_matrix(&mut rng, g.m(), g.m(), -3, 3)).unwrap()
        };
        let verdict = qspplin::linearize_qspp(&inst).unwrap().is_linearizable();
        assert_eq!(span.contains(&inst.cost), verdict);
    }
}

#[test]
fn pseudo_linearization_is_the_linearization_when_one_exists() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let g = random::corridor_dag(&mut rng, 6, 11);
        let inst = random_linearizable(&mut rng, &g);
        let LinearizationOutcome::Linearizable(c) = qspplin::linearize_qspp(&inst).unwrap() else {
            panic!("generated matrix rejected")
        };
        let mut off = inst.cost.clone();
        let mut diag = vec![Rational::zero(); g.m()];
        for (a, d) in diag.iter_mut().enumerate() {
            *d = off[(a, a)].clone();
            off[(a, a)] = Rational::zero();
        }
        let p = qspplin::pseudo_linearization(&g, &off).unwrap();
        let with_diag: Vec<Rational> = p.entries.iter().zip(&diag).map(|(a, b)| a + b).collect();
        let reduced = qspplin::reduce_cost_vector(&g, &with_diag).unwrap();
        assert_eq!(reduced.entries, c.entries);
    }
}

#[test]
fn tournament_13_optimum() {
    let t = model::generate_tournament(13).unwrap();
    let (best, path) = t.brute_force_opt(CAP).unwrap();
    assert_eq!(best, Rational::from_integer(38));
    assert_eq!(t.path_cost(&path), best);
}
