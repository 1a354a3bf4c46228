use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use drbem_core::dist_model::{AmbiguitySpec, DisturbanceHistory};
use drbem_core::lp::{export_lp, solve, SolveOptions};
use drbem_core::sim::{compile_hour, report, run_receding_horizon, synth_scenario, tune_cep, Report, SimulationTrace};

use crate::config::{Experiment, Method, RunConfig};
use crate::Failure;

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::runtime(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, contents).map_err(io(path))
}

/// Worker count from `DRBEM_THREADS`, else the available parallelism.
fn threads() -> usize {
    std::env::var("DRBEM_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n: &usize| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads().min(items.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("every item mapped")).collect()
}

/// Fits every `*.csv` history in `dir` and writes the ambiguity JSON.
pub fn fit(cfg: &RunConfig, dir: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::usage(format!("{}: no .csv histories", dir.display())));
    }
    let histories = files
        .iter()
        .map(|p| DisturbanceHistory::read_csv_file(p).map_err(|e| Failure::usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let specs = histories
        .iter()
        .map(|h| cfg.fit(h, histories.len()))
        .collect::<Result<Vec<AmbiguitySpec<f64>>, _>>()?;
    for s in &specs {
        let (lo, hi) = s
            .model
            .alpha
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| (l.min(*a), h.max(*a)));
        let zero = s.model.zero_energy.iter().filter(|z| **z).count();
        eprintln!(
            "{}: {} days, alpha in [{lo:.3}, {hi:.3}], {zero} zero-error hours",
            s.disturbance_id, s.days
        );
    }
    let json = serde_json::to_string_pretty(&specs).expect("ambiguity serializes");
    match out {
        Some(p) => write(p, json + "\n"),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

/// Writes a synthetic training history per disturbance and a test scenario.
pub fn synth(cfg: &RunConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let district = cfg.district_config()?;
    let data = synth_scenario(&cfg.generator(), &district.disturbances, seed, cfg.hours_needed())
        .map_err(|e| Failure::runtime(e.to_string()))?;
    for h in &data.training {
        let path = out.join("history").join(format!("{}.csv", h.disturbance_id));
        let mut buf = Vec::new();
        h.write_csv(&mut buf).map_err(|e| Failure::runtime(e.to_string()))?;
        write(&path, buf)?;
    }
    let mut buf = Vec::new();
    data.scenario.write_csv(&mut buf).map_err(|e| Failure::runtime(e.to_string()))?;
    write(&out.join("scenario.csv"), buf)
}

struct SeedResult {
    seed: u64,
    traces: Vec<SimulationTrace>,
    tuning: Option<(f64, f64, f64)>,
}

fn run_seed(cfg: &RunConfig, seed: u64) -> Result<SeedResult, Failure> {
    let exp = Experiment::prepare(cfg, seed)?;
    let opts = cfg.run_options();
    let run = |m: Method| -> Result<SimulationTrace, Failure> {
        run_receding_horizon(&exp.district, &cfg.policy(m, &exp.district), &exp.ambiguity, &exp.scenario, &opts)
            .map_err(|e| Failure::runtime(format!("seed {seed}, {}: {e}", m.name())))
    };
    let mut traces: Vec<SimulationTrace> = Vec::new();
    let mut tuning = None;
    for &m in &cfg.methods {
        if m != Method::TunedCep {
            traces.push(run(m)?);
            continue;
        }
        // Tuned to the violation level of the robust controller.
        let target = match traces.iter().find(|t| t.method == "adr") {
            Some(t) => t.total_violation(),
            None => run(Method::Adr)?.total_violation(),
        };
        let base = cfg.policy(Method::Cep, &exp.district);
        let tuned = tune_cep(&exp.district, &base, &exp.ambiguity, &exp.scenario, &opts, target)
            .map_err(|e| Failure::runtime(format!("seed {seed}, tuned-cep: {e}")))?;
        tuning = Some((tuned.comfort_tightening, target, tuned.trace.total_violation()));
        traces.push(tuned.trace);
    }
    Ok(SeedResult { seed, traces, tuning })
}

fn summary_csv(r: &Report) -> String {
    let mut s = String::from("method,weeks,cost_mean,cost_std,cost_pu_mean,cost_pu_std,kh_mean,kh_std,fallbacks\n");
    for m in &r.methods {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            m.method, m.weeks, m.cost_mean, m.cost_std, m.cost_pu_mean, m.cost_pu_std, m.kh_mean, m.kh_std, m.fallbacks
        );
    }
    s
}

/// Runs every (seed, method) pair and writes traces plus the summary.
///
/// Solve times go to `timing.csv` only, so every other file is
/// byte-identical across reruns.
pub fn simulate(cfg: &RunConfig) -> Result<Report, Failure> {
    cfg.validate()?;
    let results = par_map(&cfg.seeds, |s| run_seed(cfg, *s));
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let dir = &cfg.output_dir;
    let mut timing = String::from("method,seed,hours,mean_solve_seconds,total_solve_seconds\n");
    let mut weeks = String::from("method,seed,week,cost,violation_kh,fallbacks\n");
    let mut tuning = String::from("seed,comfort_tightening,target_kh,achieved_kh\n");
    let mut all = Vec::new();
    for r in results {
        for t in r.traces {
            let total: f64 = t.records.iter().map(|x| x.solve_seconds).sum();
            let _ = writeln!(timing, "{},{},{},{},{total}", t.method, r.seed, t.records.len(), t.mean_solve_seconds());
            let mut t = t;
            for rec in &mut t.records {
                rec.solve_seconds = 0.0;
            }
            for w in &mut t.weeks {
                w.solve_seconds = 0.0;
            }
            for w in &t.weeks {
                let _ = writeln!(weeks, "{},{},{},{},{},{}", t.method, r.seed, w.week, w.cost, w.violation_kh, w.fallbacks);
            }
            let stem = format!("{}_seed{}", t.method, r.seed);
            let mut buf = Vec::new();
            t.write_csv(&mut buf).map_err(|e| Failure::runtime(e.to_string()))?;
            write(&dir.join("traces").join(format!("{stem}.csv")), buf)?;
            let json = serde_json::to_string(&t).expect("trace serializes");
            write(&dir.join("traces").join(format!("{stem}.json")), json)?;
            all.push(t);
        }
        if let Some((c, target, got)) = r.tuning {
            let _ = writeln!(tuning, "{},{c},{target},{got}", r.seed);
        }
    }
    let rep = report(&all).map_err(|e| Failure::runtime(e.to_string()))?;
    write(&dir.join("summary.csv"), summary_csv(&rep))?;
    write(&dir.join("summary.txt"), rep.to_table())?;
    write(&dir.join("weeks.csv"), weeks)?;
    write(&dir.join("timing.csv"), timing)?;
    if cfg.methods.contains(&Method::TunedCep) {
        write(&dir.join("tuning.csv"), tuning)?;
    }
    write(
        &dir.join("config.json"),
        serde_json::to_string_pretty(cfg).expect("config serializes") + "\n",
    )?;
    Ok(rep)
}

/// Rebuilds the summary from the trace JSON files in `dir`.
pub fn report_dir(dir: &Path) -> Result<Report, Failure> {
    let traces_dir = if dir.join("traces").is_dir() { dir.join("traces") } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = fs::read_dir(&traces_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", traces_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let traces = files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io(p))?;
            serde_json::from_str::<SimulationTrace>(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if traces.is_empty() {
        return Err(Failure::usage(format!("{}: no trace files", traces_dir.display())));
    }
    report(&traces).map_err(|e| Failure::runtime(e.to_string()))
}

/// Writes the program the controller would solve at `hour` from the
/// initial state, and optionally solves it.
pub fn export(cfg: &RunConfig, seed: u64, method: Method, hour: usize, out: &Path, solve_it: bool) -> Result<(), Failure> {
    cfg.validate()?;
    if method == Method::TunedCep {
        return Err(Failure::usage("tuned-cep is a sequence of runs, export cep instead"));
    }
    let exp = Experiment::prepare(cfg, seed)?;
    if hour + cfg.horizon > exp.scenario.hours() {
        return Err(Failure::usage(format!(
            "hour {hour} out of range: the scenario allows 0..={} with horizon {}",
            exp.scenario.hours().saturating_sub(cfg.horizon),
            cfg.horizon
        )));
    }
    let spec = cfg.policy(method, &exp.district);
    let state = exp.district.initial_state();
    let c = compile_hour(&exp.district, &spec, &exp.ambiguity, &exp.scenario, &state, hour, &cfg.allocation)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    write(out, export_lp(&c.lp))?;
    eprintln!("{}: {} columns, {} rows", out.display(), c.lp.n_cols(), c.lp.n_rows());
    if solve_it {
        let s = solve(&c.lp, &SolveOptions::default()).map_err(|e| Failure::runtime(e.to_string()))?;
        println!("status {:?} objective {}", s.status, s.objective);
    }
    Ok(())
}
