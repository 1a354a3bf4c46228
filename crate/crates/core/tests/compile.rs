mod common;

use common::*;
use drbem_core::compile::{robustify, Mode};
use drbem_core::dist_model::AmbiguityBounds;
use drbem_core::lp::{solve, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn counterpart_agrees_with_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..60 {
        let inst = random_robust_instance(&mut rng);
        let mut layout = inst.layout.clone();
        let robust = match robustify(&inst.rows, &inst.center, &inst.radius, &mut layout) {
            Ok(r) => r,
            Err(_) => {
                // Only equalities that no decision can hold fixed fail here.
                assert_eq!(lp_optimum(vertex_lp(&inst)), None);
                infeasible += 1;
                continue;
            }
        };
        match (lp_optimum(counterpart_lp(&inst, &robust, &layout)), lp_optimum(vertex_lp(&inst))) {
            (Some(a), Some(b)) => {
                feasible += 1;
                assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "{a} vs {b}");
            }
            (None, None) => infeasible += 1,
            (a, b) => panic!("counterpart {a:?}, vertices {b:?}"),
        }
        let verts = vertices(&inst.center, &inst.radius);
        for _ in 0..20 {
            let z: Vec<f64> = (0..inst.n_z).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for (name, lhs) in counterpart_worst(&robust, &layout, inst.n_z, &z) {
                let src = inst.rows.iter().find(|r| r.name == name).unwrap();
                let worst = verts.iter().map(|w| src.expr.eval(&z, w)).fold(f64::NEG_INFINITY, f64::max);
                assert!((lhs - worst).abs() <= 1e-9 * (1.0 + worst.abs()), "{name}: {lhs} vs {worst}");
            }
        }
    }
    assert!(feasible > 5 && infeasible > 5, "{feasible} feasible, {infeasible} infeasible");
}

#[test]
fn adr_is_never_worse_than_open_loop() {
    for seed in 0..4 {
        let inst = instance(seed);
        let olp = tau(&compiled(&inst, Mode::Olp, 4));
        let adr = tau(&compiled(&inst, Mode::Adr, 4));
        assert!(adr <= olp + 1e-6 * olp.abs(), "seed {seed}: {adr} > {olp}");
    }
}

#[test]
fn point_boxes_collapse_the_policies() {
    let mut inst = instance(7);
    for spec in &mut inst.ambiguity {
        for b in &mut spec.bounds {
            *b = AmbiguityBounds::point(b.mean_hat, b.delta_chi, b.delta_st);
        }
    }
    let taus: Vec<f64> = [Mode::Cep, Mode::Olp, Mode::Adr].iter().map(|m| tau(&compiled(&inst, *m, 4))).collect();
    for t in &taus[1..] {
        assert!((t - taus[0]).abs() <= 1e-6 * taus[0].abs().max(1.0), "{taus:?}");
    }
}

#[test]
fn adr_plan_holds_on_sampled_residuals() {
    let inst = instance(3);
    let c = compiled(&inst, Mode::Adr, 4);
    let s = solve(&c.lp, &SolveOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let w: Vec<f64> = c.w_center.iter().zip(&c.w_radius).map(|(m, r)| m + r * rng.gen_range(-1.0..=1.0)).collect();
        let (v, row) = c.max_violation(&s.x, &w);
        assert!(v <= 1e-6, "{row:?} violated by {v}");
    }
}

#[test]
fn epigraph_is_the_worst_mean_cost() {
    let inst = instance(5);
    let c = compiled(&inst, Mode::Adr, 2);
    let s = solve(&c.lp, &SolveOptions::default()).unwrap();
    let worst = vertices(
        &c.mu_lower.iter().zip(&c.mu_upper).map(|(l, u)| 0.5 * (l + u)).collect::<Vec<_>>(),
        &c.mu_lower.iter().zip(&c.mu_upper).map(|(l, u)| 0.5 * (u - l)).collect::<Vec<_>>(),
    )
    .iter()
    .map(|mu| c.cost.eval(&s.x, mu))
    .fold(f64::NEG_INFINITY, f64::max);
    assert!((s.x[c.tau] - worst).abs() <= 1e-6 * worst.abs().max(1.0), "{} vs {worst}", s.x[c.tau]);
}

#[test]
fn wider_boxes_never_lower_the_bound() {
    let inst = instance(9);
    let base = tau(&compiled(&inst, Mode::Adr, 4));
    let mut wide = inst;
    for spec in &mut wide.ambiguity {
        for b in &mut spec.bounds {
            b.var_hi *= 2.0;
        }
    }
    let widened = tau(&compiled(&wide, Mode::Adr, 4));
    assert!(widened >= base - 1e-6 * base.abs(), "{widened} < {base}");
}

#[test]
fn unreachable_comfort_is_paid_as_slack() {
    let mut inst = instance(2);
    inst.state.buildings[0].fill(5.0);
    inst.hour = 6;
    let c = compiled(&inst, Mode::Adr, 4);
    let s = solve(&c.lp, &SolveOptions::default()).unwrap();
    assert!(s.is_optimal());
    let slack: f64 = c.layout.s.iter().flatten().flatten().map(|col| s.x[*col]).sum();
    assert!(slack > 1.0);
    assert!(s.x[c.tau] >= 1e3 * slack * 0.99);
}
