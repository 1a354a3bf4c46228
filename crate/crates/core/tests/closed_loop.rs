mod common;

use common::*;
use drbem_core::compile::Mode;
use drbem_core::sim::{policy, run_receding_horizon, tune_cep, GeneratorParams, RunOptions, Scenario, HOURS_PER_WEEK};

fn opts(hours: usize) -> RunOptions {
    RunOptions {
        hours: Some(hours),
        ..Default::default()
    }
}

#[test]
fn noiseless_adr_matches_certainty_equivalence() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let (sc, amb) = fitted(&GeneratorParams::winter().noiseless(), &HEATED, 4, 48, 8);
    let cep = run_receding_horizon(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &opts(36)).unwrap();
    let adr = run_receding_horizon(&d, &policy(Mode::Adr, 8, &d), &amb, &sc, &opts(36)).unwrap();
    assert!(cep.failures.is_empty() && adr.failures.is_empty());
    for (a, b) in cep.records.iter().zip(&adr.records) {
        assert!((a.grid - b.grid).abs() < 1e-6, "hour {}: {} vs {}", a.hour, a.grid, b.grid);
        for (x, y) in a.building_states.iter().flatten().zip(b.building_states.iter().flatten()) {
            assert!((x - y).abs() < 1e-6);
        }
    }
    assert!(cep.total_violation() < 1e-6);
}

#[test]
fn purchased_energy_balances_every_hour() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let (sc, amb) = fitted(&GeneratorParams::winter(), &HEATED, 6, 72, 8);
    let tr = run_receding_horizon(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &opts(72)).unwrap();
    for r in &tr.records {
        assert!(r.balance_residual <= 1e-6, "hour {}: {}", r.hour, r.balance_residual);
        assert!(r.grid >= -1e-9);
    }
}

#[test]
fn adr_rarely_violates_comfort() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let (sc, amb) = fitted(&GeneratorParams::winter(), &HEATED, 8, 48, 8);
    let tr = run_receding_horizon(&d, &policy(Mode::Adr, 8, &d), &amb, &sc, &opts(48)).unwrap();
    assert!(tr.failures.is_empty(), "{:?}", tr.failures);
    assert!(tr.violation_frequency() <= 0.05, "{}", tr.violation_frequency());
}

/// The same noiseless week twice in a row.
fn repeated_week() -> Scenario {
    let (one, _) = fitted(&GeneratorParams::winter().noiseless(), &HEATED, 2, HOURS_PER_WEEK, 8);
    let twice = |s: &[Vec<f64>]| -> Vec<Vec<f64>> {
        s.iter()
            .map(|x| x[..HOURS_PER_WEEK].iter().chain(&x[..HOURS_PER_WEEK + 8]).copied().collect())
            .collect()
    };
    Scenario {
        forecast: twice(&one.forecast),
        realization: twice(&one.realization),
        ..one
    }
}

#[test]
fn weekly_restart_resets_the_state() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let sc = repeated_week();
    let (_, amb) = fitted(&GeneratorParams::winter().noiseless(), &HEATED, 2, 24, 8);
    let run = |restart: bool| {
        let o = RunOptions {
            weeks: 2,
            restart_weekly: restart,
            ..Default::default()
        };
        run_receding_horizon(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &o).unwrap()
    };
    let tr = run(true);
    assert_eq!(tr.weeks.len(), 2);
    for k in 0..HOURS_PER_WEEK {
        let (a, b) = (&tr.records[k], &tr.records[k + HOURS_PER_WEEK]);
        for (x, y) in a.building_states.iter().flatten().zip(b.building_states.iter().flatten()) {
            assert!((x - y).abs() < 1e-9, "hour {k}");
        }
    }
    assert!((tr.weeks[0].cost - tr.weeks[1].cost).abs() < 1e-9);
    let carried = run(false);
    assert!((carried.weeks[0].cost - carried.weeks[1].cost).abs() > 1e-9);
}

#[test]
fn tuning_stops_at_zero_when_nothing_to_fix() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let (sc, amb) = fitted(&GeneratorParams::winter(), &HEATED, 3, 48, 8);
    let base = run_receding_horizon(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &opts(24)).unwrap();
    let t = tune_cep(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &opts(24), base.total_violation()).unwrap();
    assert_eq!(t.comfort_tightening, 0.0);
    assert_eq!(t.evaluations.len(), 1);
    assert_eq!(t.trace.method, "tuned-cep");
}

#[test]
fn trace_csv_has_a_row_per_hour() {
    let d = district(vec![zone("b", "winter")], &HEATED);
    let (sc, amb) = fitted(&GeneratorParams::winter(), &HEATED, 1, 24, 8);
    let tr = run_receding_horizon(&d, &policy(Mode::Cep, 8, &d), &amb, &sc, &opts(12)).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("method,hour,grid"));
}
