use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{SimError, SimulationTrace};

/// Sample mean and standard deviation (N − 1); a single value has zero
/// spread.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub weeks: usize,
    pub cost_mean: f64,
    pub cost_std: f64,
    pub cost_pu_mean: f64,
    pub cost_pu_std: f64,
    pub kh_mean: f64,
    pub kh_std: f64,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Mean weekly certainty-equivalent cost; 1 p.u.
    pub basis: f64,
    pub methods: Vec<MethodSummary>,
}

fn group(traces: &[SimulationTrace]) -> Vec<(String, Vec<&SimulationTrace>)> {
    let mut out: Vec<(String, Vec<&SimulationTrace>)> = Vec::new();
    for t in traces {
        match out.iter_mut().find(|(m, _)| *m == t.method) {
            Some((_, v)) => v.push(t),
            None => out.push((t.method.clone(), vec![t])),
        }
    }
    out
}

fn weekly(traces: &[&SimulationTrace]) -> (Vec<f64>, Vec<f64>) {
    let weeks = traces.iter().flat_map(|t| &t.weeks);
    (weeks.clone().map(|w| w.cost).collect(), weeks.map(|w| w.violation_kh).collect())
}

/// Per-method weekly statistics. Costs are normalized by the mean weekly
/// cost of the `cep` traces, or of the first method if there are none.
pub fn report(traces: &[SimulationTrace]) -> Result<Report, SimError> {
    let groups = group(traces);
    let Some(first) = groups.first() else {
        return Err(SimError::Scenario("report needs at least one trace".into()));
    };
    let basis_group = groups.iter().find(|(m, _)| m == "cep").unwrap_or(first);
    let basis = mean_std(&weekly(&basis_group.1).0).0;
    let methods = groups
        .iter()
        .map(|(method, ts)| {
            let (cost, kh) = weekly(ts);
            let pu: Vec<f64> = cost.iter().map(|c| c / basis).collect();
            let (cost_mean, cost_std) = mean_std(&cost);
            let (cost_pu_mean, cost_pu_std) = mean_std(&pu);
            let (kh_mean, kh_std) = mean_std(&kh);
            MethodSummary {
                method: method.clone(),
                weeks: cost.len(),
                cost_mean,
                cost_std,
                cost_pu_mean,
                cost_pu_std,
                kh_mean,
                kh_std,
                fallbacks: ts.iter().map(|t| t.failures.len()).sum(),
            }
        })
        .collect();
    Ok(Report { basis, methods })
}

impl Report {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>18} {:>20} {:>10}", "method", "cost (p.u.)", "violations (Kh/week)", "fallbacks");
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{:<10} ({:>6.2}, {:>6.2})    ({:>7.2}, {:>7.2}) {:>10}",
                m.method, m.cost_pu_mean, m.cost_pu_std, m.kh_mean, m.kh_std, m.fallbacks
            );
        }
        let _ = writeln!(s, "basis: {:.2} CHF/week", self.basis);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictRow {
    pub label: String,
    /// `(method, mean weekly cost in p.u.)`
    pub costs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictTable {
    pub basis: f64,
    pub rows: Vec<DistrictRow>,
}

/// Cost of each district configuration per method. The basis is the mean
/// weekly `cep` cost of the first configuration (or its first method).
pub fn district_table(configs: &[(String, Vec<SimulationTrace>)]) -> Result<DistrictTable, SimError> {
    let Some((_, first)) = configs.first() else {
        return Err(SimError::Scenario("district table needs a configuration".into()));
    };
    let basis = report(first)?.basis;
    let rows = configs
        .iter()
        .map(|(label, traces)| {
            let costs = group(traces)
                .into_iter()
                .map(|(m, ts)| (m, mean_std(&weekly(&ts).0).0 / basis))
                .collect();
            DistrictRow {
                label: label.clone(),
                costs,
            }
        })
        .collect();
    Ok(DistrictTable { basis, rows })
}

impl DistrictTable {
    pub fn cost(&self, label: &str, method: &str) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.label == label)?;
        row.costs.iter().find(|(m, _)| m == method).map(|(_, c)| *c)
    }

    pub fn to_table(&self) -> String {
        let mut methods: Vec<&str> = Vec::new();
        for r in &self.rows {
            for (m, _) in &r.costs {
                if !methods.contains(&m.as_str()) {
                    methods.push(m);
                }
            }
        }
        let mut s = format!("{:<16}", "configuration");
        for m in &methods {
            let _ = write!(s, " {m:>10}");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:<16}", r.label);
            for m in &methods {
                match r.costs.iter().find(|(x, _)| x == m) {
                    Some((_, c)) => {
                        let _ = write!(s, " {c:>10.2}");
                    }
                    None => {
                        let _ = write!(s, " {:>10}", "-");
                    }
                }
            }
            s.push('\n');
        }
        let _ = writeln!(s, "basis: {:.2} CHF/week", self.basis);
        s
    }
}
