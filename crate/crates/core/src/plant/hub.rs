use ndarray::{array, Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{DemandStream, DisturbanceKind, PlantError};
use crate::linalg::matvec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Chiller,
    Boiler,
    HeatPump,
    Photovoltaic,
    Battery,
}

/// A hub device `x' = A x + B u + C ξ` subject to `F_x x + F_u u + F_ξ ξ ≤ h`.
///
/// Inputs are generated from a smaller set of free actuation variables,
/// `u = input_map · a`, which is how the fixed conversion ratio of a
/// converter is imposed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Device<S> {
    pub id: String,
    pub kind: DeviceKind,
    pub input_names: Vec<String>,
    pub state_dim: usize,
    pub input_dim: usize,
    pub a: Array2<S>,
    pub b: Array2<S>,
    pub c: Array2<S>,
    pub f_x: Array2<S>,
    pub f_u: Array2<S>,
    pub f_xi: Array2<S>,
    pub h: Array1<S>,
    pub input_map: Array2<S>,
    pub x0: Array1<S>,
    pub scale: S,
}

impl<S: Scalar> Device<S> {
    pub fn n_free(&self) -> usize {
        self.input_map.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.h.len()
    }

    /// Next state. Pure converters return an empty vector.
    pub fn step(&self, x: &Array1<S>, u: &Array1<S>, xi: &Array1<S>) -> Array1<S> {
        if self.state_dim == 0 {
            return Array1::from_elem(0, S::zero());
        }
        matvec(self.a.view(), x.view()) + matvec(self.b.view(), u.view()) + matvec(self.c.view(), xi.view())
    }

    /// `F_x x + F_u u + F_ξ ξ − h`; feasible iff every entry is ≤ 0.
    pub fn constraint_values(&self, x: &Array1<S>, u: &Array1<S>, xi: &Array1<S>) -> Array1<S> {
        let mut r = matvec(self.f_u.view(), u.view()) + matvec(self.f_xi.view(), xi.view()) - &self.h;
        if self.state_dim > 0 {
            r = r + matvec(self.f_x.view(), x.view());
        }
        r
    }

    pub fn inputs_from_free(&self, a: &Array1<S>) -> Array1<S> {
        matvec(self.input_map.view(), a.view())
    }
}

fn zeros<S: Scalar>(r: usize, c: usize) -> Array2<S> {
    Array2::from_elem((r, c), S::zero())
}

fn lit_rows<S: Scalar>(rows: &[&[f64]]) -> Array2<S> {
    let n = rows.first().map_or(0, |r| r.len());
    let mut m = zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[[i, j]] = S::lit(*v);
        }
    }
    m
}

fn converter<S: Scalar>(
    id: &str,
    kind: DeviceKind,
    cop: f64,
    cap_per_building: f64,
    scale: S,
    n_dist: usize,
) -> Device<S> {
    // u = (in, out); rows: −in ≤ 0, −out ≤ 0, out ≤ cap.
    Device {
        id: id.to_string(),
        kind,
        input_names: vec!["in".into(), "out".into()],
        state_dim: 0,
        input_dim: 2,
        a: zeros(0, 0),
        b: zeros(0, 2),
        c: zeros(0, n_dist),
        f_x: zeros(3, 0),
        f_u: lit_rows(&[&[-1.0, 0.0], &[0.0, -1.0], &[0.0, 1.0]]),
        f_xi: zeros(3, n_dist),
        h: array![S::zero(), S::zero(), S::lit(cap_per_building) * scale],
        input_map: lit_rows(&[&[1.0], &[cop]]),
        x0: Array1::from_elem(0, S::zero()),
        scale,
    }
}

fn photovoltaic<S: Scalar>(scale: S, disturbances: &[DisturbanceKind]) -> Device<S> {
    let n_dist = disturbances.len();
    let mut f_xi = zeros(2, n_dist);
    for (j, k) in disturbances.iter().enumerate() {
        match k {
            DisturbanceKind::AmbientTemp => f_xi[[1, j]] = S::lit(0.0019) * scale,
            DisturbanceKind::SolarSouth => f_xi[[1, j]] = S::lit(-3.7) * scale,
            _ => {}
        }
    }
    Device {
        id: "pv".into(),
        kind: DeviceKind::Photovoltaic,
        input_names: vec!["out".into()],
        state_dim: 0,
        input_dim: 1,
        a: zeros(0, 0),
        b: zeros(0, 1),
        c: zeros(0, n_dist),
        f_x: zeros(2, 0),
        f_u: lit_rows(&[&[-1.0], &[1.0]]),
        f_xi,
        h: array![S::zero(), S::lit(0.128) * scale],
        input_map: lit_rows(&[&[1.0]]),
        x0: Array1::from_elem(0, S::zero()),
        scale,
    }
}

fn battery<S: Scalar>(scale: S, n_dist: usize) -> Device<S> {
    // u = (charge, discharge), x = two-well charge model in kWh.
    let f_x = lit_rows(&[
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[-1.0, -1.0],
        &[1.0, 1.0],
        &[-1.0, 0.0],
        &[0.0, -1.0],
        &[-0.62, -0.27],
        &[0.84, 0.37],
        &[0.73, 0.73],
    ]);
    let f_u = lit_rows(&[
        &[-1.0, 0.0],
        &[1.0, 0.0],
        &[0.0, -1.0],
        &[0.0, 1.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[0.0, 1.0],
        &[1.0, 0.0],
        &[1.0, 0.0],
    ]);
    let h: Array1<S> = [0.0, 8.0, 0.0, 8.0, -1.0, 5.0, 0.0, 0.0, 0.0, 2.58, 3.66]
        .iter()
        .map(|v| S::lit(*v) * scale)
        .collect();
    Device {
        id: "battery".into(),
        kind: DeviceKind::Battery,
        input_names: vec!["in".into(), "out".into()],
        state_dim: 2,
        input_dim: 2,
        a: lit_rows(&[&[0.51, 0.22], &[0.47, 0.78]]),
        b: lit_rows(&[&[0.61, -0.83], &[0.25, -0.39]]),
        c: zeros(2, n_dist),
        f_x,
        f_u,
        f_xi: zeros(11, n_dist),
        h,
        input_map: lit_rows(&[&[1.0, 0.0], &[0.0, 1.0]]),
        x0: array![S::one(), S::one()] * scale,
        scale,
    }
}

/// Balance `H_p p + H_u u + H_d d = 0` over grid purchases, all hub device
/// inputs (device-major) and the three demand streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceNode<S> {
    pub name: String,
    pub h_p: Vec<S>,
    pub h_u: Vec<S>,
    pub h_d: Vec<S>,
}

impl<S: Scalar> BalanceNode<S> {
    pub fn residual(&self, p: &[S], u: &[S], d: &[S]) -> S {
        let dot = |a: &[S], b: &[S]| a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + *x * *y);
        dot(&self.h_p, p) + dot(&self.h_u, u) + dot(&self.h_d, d)
    }
}

/// Shared conversion and storage devices plus their balance nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hub<S> {
    pub devices: Vec<Device<S>>,
    pub nodes: Vec<BalanceNode<S>>,
    pub n_grid: usize,
}

impl<S: Scalar> Hub<S> {
    pub fn n_inputs(&self) -> usize {
        self.devices.iter().map(|d| d.input_dim).sum()
    }

    pub fn n_free(&self) -> usize {
        self.devices.iter().map(|d| d.n_free()).sum()
    }

    pub fn n_states(&self) -> usize {
        self.devices.iter().map(|d| d.state_dim).sum()
    }

    /// Offset of each device's inputs in the flattened hub input vector.
    pub fn input_offsets(&self) -> Vec<usize> {
        offsets(self.devices.iter().map(|d| d.input_dim))
    }

    pub fn free_offsets(&self) -> Vec<usize> {
        offsets(self.devices.iter().map(|d| d.n_free()))
    }

    pub fn state_offsets(&self) -> Vec<usize> {
        offsets(self.devices.iter().map(|d| d.state_dim))
    }

    pub fn device(&self, kind: DeviceKind) -> Option<(usize, &Device<S>)> {
        self.devices.iter().enumerate().find(|(_, d)| d.kind == kind)
    }
}

fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .map(|n| {
            let o = acc;
            acc += n;
            o
        })
        .collect()
}

/// Chiller, boiler, heat pump, PV and battery sized for `n_buildings`, with
/// electricity, heating and cooling balances. Electricity can only be
/// bought; the boiler is electric.
pub fn make_hub<S: Scalar>(
    n_buildings: usize,
    disturbances: &[DisturbanceKind],
) -> Result<Hub<S>, PlantError> {
    if n_buildings == 0 {
        return Err(PlantError::District("hub needs at least one building".into()));
    }
    let scale = S::of_usize(n_buildings);
    let nd = disturbances.len();
    let devices = vec![
        converter("chiller", DeviceKind::Chiller, 0.7, 20.0, scale, nd),
        converter("boiler", DeviceKind::Boiler, 0.9, 25.0, scale, nd),
        converter("heat_pump", DeviceKind::HeatPump, 3.0, 5.0, scale, nd),
        photovoltaic(scale, disturbances),
        battery(scale, nd),
    ];
    let n_u: usize = devices.iter().map(|d| d.input_dim).sum();
    let off = offsets(devices.iter().map(|d| d.input_dim));
    let idx = |kind: DeviceKind, port: usize| {
        let k = devices.iter().position(|d| d.kind == kind).unwrap();
        off[k] + port
    };
    let one = S::one();
    let mut elec = vec![S::zero(); n_u];
    elec[idx(DeviceKind::Photovoltaic, 0)] = one;
    elec[idx(DeviceKind::Battery, 1)] = one;
    elec[idx(DeviceKind::Battery, 0)] = -one;
    elec[idx(DeviceKind::HeatPump, 0)] = -one;
    elec[idx(DeviceKind::Chiller, 0)] = -one;
    elec[idx(DeviceKind::Boiler, 0)] = -one;
    let mut heat = vec![S::zero(); n_u];
    heat[idx(DeviceKind::HeatPump, 1)] = one;
    heat[idx(DeviceKind::Boiler, 1)] = one;
    let mut cool = vec![S::zero(); n_u];
    cool[idx(DeviceKind::Chiller, 1)] = one;
    let demand = |s: DemandStream| {
        let mut d = vec![S::zero(); DemandStream::ALL.len()];
        d[s.index()] = -one;
        d
    };
    let nodes = vec![
        BalanceNode {
            name: "electricity".into(),
            h_p: vec![one],
            h_u: elec,
            h_d: demand(DemandStream::Electricity),
        },
        BalanceNode {
            name: "cooling".into(),
            h_p: vec![S::zero()],
            h_u: cool,
            h_d: demand(DemandStream::Cooling),
        },
        BalanceNode {
            name: "heating".into(),
            h_p: vec![S::zero()],
            h_u: heat,
            h_d: demand(DemandStream::Heating),
        },
    ];
    Ok(Hub {
        devices,
        nodes,
        n_grid: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIST: [DisturbanceKind; 3] = [
        DisturbanceKind::AmbientTemp,
        DisturbanceKind::SolarSouth,
        DisturbanceKind::InternalGains,
    ];

    fn hub(n: usize) -> Hub<f64> {
        make_hub(n, &DIST).unwrap()
    }

    #[test]
    fn heat_pump_cop() {
        let h = hub(1);
        let (_, hp) = h.device(DeviceKind::HeatPump).unwrap();
        let u = hp.inputs_from_free(&array![1.0]);
        assert_eq!(u, array![1.0, 3.0]);
        let (_, ch) = h.device(DeviceKind::Chiller).unwrap();
        assert!((ch.inputs_from_free(&array![2.0])[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn battery_step_from_empty() {
        let h = hub(1);
        let (_, b) = h.device(DeviceKind::Battery).unwrap();
        let x = b.step(&array![0.0, 0.0], &array![1.0, 0.0], &Array1::zeros(3));
        assert!((x[0] - 0.61).abs() < 1e-15 && (x[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pv_bound_at_zero_weather() {
        let h = hub(1);
        let (_, pv) = h.device(DeviceKind::Photovoltaic).unwrap();
        let at_bound = pv.constraint_values(&array![], &array![0.128], &Array1::zeros(3));
        assert!(at_bound.iter().all(|v| *v <= 1e-15));
        assert!(at_bound[1].abs() < 1e-15);
        // 10 °C and 0.1 kW/m² raise the bound to 0.128 − 0.019 + 0.37.
        let r = pv.constraint_values(&array![], &array![0.479], &array![10.0, 0.1, 0.0]);
        assert!(r[1].abs() < 1e-12);
    }

    #[test]
    fn capacities_scale() {
        let one = hub(1);
        let five = hub(5);
        for (a, b) in one.devices.iter().zip(&five.devices) {
            for (x, y) in a.h.iter().zip(&b.h) {
                assert!((5.0 * x - y).abs() < 1e-12);
            }
        }
        let (_, hp) = five.device(DeviceKind::HeatPump).unwrap();
        assert_eq!(hp.h[2], 25.0);
    }

    #[test]
    fn battery_initial_state_feasible() {
        let h = hub(2);
        let (_, b) = h.device(DeviceKind::Battery).unwrap();
        let r = b.constraint_values(&b.x0, &array![0.0, 0.0], &Array1::zeros(3));
        assert!(r.iter().all(|v| *v <= 0.0));
    }

    #[test]
    fn nodes_nonzero_and_balance() {
        let h = hub(1);
        assert_eq!(h.n_inputs(), 9);
        assert_eq!(h.n_free(), 6);
        for n in &h.nodes {
            assert!(n.h_p.iter().chain(&n.h_u).chain(&n.h_d).any(|v| *v != 0.0));
        }
        // Heat pump covers 3 kW of heat from 1 kW bought.
        let mut u = vec![0.0; 9];
        let off = h.input_offsets();
        u[off[2]] = 1.0;
        u[off[2] + 1] = 3.0;
        let d = [0.0, 0.0, 3.0];
        assert!(h.nodes[0].residual(&[1.0], &u, &d).abs() < 1e-15);
        assert!(h.nodes[2].residual(&[1.0], &u, &d).abs() < 1e-15);
    }

    #[test]
    fn zero_buildings_rejected() {
        assert!(make_hub::<f64>(0, &DIST).is_err());
    }
}
