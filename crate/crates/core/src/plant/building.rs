use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{ComfortSchedule, DemandStream, DisturbanceKind, PlantError};
use crate::linalg::{expm_with_integral, matmul, matvec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassClass {
    Heavy,
    Light,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuator {
    Radiator,
    Ahu,
    Tabs,
    Blinds,
}

/// One column of the building input vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "room")]
pub enum InputKind {
    Radiator(usize),
    Ahu(usize),
    TabsHeat(usize),
    TabsCool(usize),
}

impl InputKind {
    pub fn stream(self) -> DemandStream {
        match self {
            InputKind::Radiator(_) | InputKind::TabsHeat(_) => DemandStream::Heating,
            InputKind::Ahu(_) => DemandStream::Electricity,
            InputKind::TabsCool(_) => DemandStream::Cooling,
        }
    }

    pub fn room(self) -> usize {
        match self {
            InputKind::Radiator(r) | InputKind::Ahu(r) | InputKind::TabsHeat(r) | InputKind::TabsCool(r) => r,
        }
    }
}

fn default_floor_area() -> f64 {
    84.0
}

fn default_initial_temp() -> f64 {
    21.0
}

/// Parameters of the synthetic RC building generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub id: String,
    pub rooms: usize,
    pub mass: MassClass,
    pub window_fraction: f64,
    pub actuators: Vec<Actuator>,
    #[serde(default = "default_floor_area")]
    pub floor_area_per_room: f64,
    #[serde(default = "default_initial_temp")]
    pub initial_temp: f64,
}

impl BuildingSpec {
    pub fn new(id: &str, rooms: usize, mass: MassClass, actuators: &[Actuator]) -> Self {
        Self {
            id: id.to_string(),
            rooms,
            mass,
            window_fraction: 0.3,
            actuators: actuators.to_vec(),
            floor_area_per_room: default_floor_area(),
            initial_temp: default_initial_temp(),
        }
    }
}

/// Hourly bilinear building model
/// `x' = A x + (B + Σ_l x_l E_l) u + (D + Σ_l v_l C_l) ξ`
/// with `F_x x + F_u u + F_v v + F_ξ ξ ≤ h` and comfort bands on room nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Building<S> {
    pub id: String,
    pub n_rooms: usize,
    pub mass: MassClass,
    pub state_dim: usize,
    pub input_dim: usize,
    pub blind_dim: usize,
    pub a: Array2<S>,
    pub b: Array2<S>,
    pub d: Array2<S>,
    /// One `n × m` slice per state.
    pub e: Vec<Array2<S>>,
    /// One `n × |ξ|` slice per blind.
    pub c: Vec<Array2<S>>,
    pub f_x: Array2<S>,
    pub f_u: Array2<S>,
    pub f_v: Array2<S>,
    pub f_xi: Array2<S>,
    pub h: Array1<S>,
    pub comfort: ComfortSchedule<S>,
    pub room_states: Vec<usize>,
    pub inputs: Vec<InputKind>,
    pub actuators: Vec<Actuator>,
    pub x0: Array1<S>,
}

/// Building with the state-input product frozen at an expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBuilding<S> {
    pub a: Array2<S>,
    pub b: Array2<S>,
    pub d: Array2<S>,
    pub c: Vec<Array2<S>>,
}

impl<S: Scalar> LinearBuilding<S> {
    pub fn disturbance_gain(&self, v: &Array1<S>) -> Array2<S> {
        let mut g = self.d.clone();
        for (l, cl) in self.c.iter().enumerate() {
            g.scaled_add(v[l], cl);
        }
        g
    }

    pub fn predict(&self, x: &Array1<S>, u: &Array1<S>, v: &Array1<S>, xi: &Array1<S>) -> Array1<S> {
        matvec(self.a.view(), x.view())
            + matvec(self.b.view(), u.view())
            + matvec(self.disturbance_gain(v).view(), xi.view())
    }
}

struct Thermal {
    c_room: f64,
    c_wall: f64,
    k_room_wall: f64,
    k_wall_out: f64,
}

fn thermal(mass: MassClass) -> Thermal {
    match mass {
        MassClass::Heavy => Thermal {
            c_room: 2.0,
            c_wall: 30.0,
            k_room_wall: 0.4,
            k_wall_out: 0.08,
        },
        MassClass::Light => Thermal {
            c_room: 1.2,
            c_wall: 8.0,
            k_room_wall: 0.4,
            k_wall_out: 0.08,
        },
    }
}

const SUPPLY_TEMP: f64 = 40.0;
const AHU_REF_DELTA: f64 = 19.0;
const FACADE_PER_FLOOR: f64 = 1.0 / 3.0;
const WINDOW_U: f64 = 0.0011;
const INFILTRATION: f64 = 0.02;
const SOLAR_TRANSMITTANCE: f64 = 0.6;
const SOLAR_TO_ROOM: f64 = 0.7;
const BLIND_CUT: f64 = 0.8;
const GROUND_SHARE: f64 = 0.25;
const RADIATOR_CAP: f64 = 2.0;
const AHU_CAP: f64 = 1.5;
const TABS_CAP: f64 = 3.0;

fn facade_column(room: usize, disturbances: &[DisturbanceKind]) -> Option<usize> {
    const ORDER: [DisturbanceKind; 4] = [
        DisturbanceKind::SolarSouth,
        DisturbanceKind::SolarEast,
        DisturbanceKind::SolarWest,
        DisturbanceKind::SolarNorth,
    ];
    let pos = |k| disturbances.iter().position(|d| *d == k);
    pos(ORDER[room % 4]).or_else(|| pos(DisturbanceKind::SolarSouth))
}

/// Synthetic RC network: one room node and one wall node per room, each
/// room coupled to ambient through windows and to its wall; walls lose to
/// ambient (and ground, if tracked). Discretised with a zero-order hold on
/// a one-hour step.
pub fn make_building<S: Scalar>(
    spec: &BuildingSpec,
    disturbances: &[DisturbanceKind],
) -> Result<Building<S>, PlantError> {
    if spec.actuators.is_empty() {
        return Err(PlantError::Spec(format!("building {} has no actuators", spec.id)));
    }
    if !(1..=5).contains(&spec.rooms) {
        return Err(PlantError::Spec(format!("building {} needs 1 to 5 rooms", spec.id)));
    }
    if !(0.0..=1.0).contains(&spec.window_fraction) {
        return Err(PlantError::Spec("window fraction must lie in [0, 1]".into()));
    }
    if !(spec.floor_area_per_room > 0.0 && spec.floor_area_per_room.is_finite()) {
        return Err(PlantError::Spec("floor area must be positive".into()));
    }
    let has = |a: Actuator| spec.actuators.contains(&a);
    let rooms = spec.rooms;
    let n = 2 * rooms;
    let nd = disturbances.len();
    let area = spec.floor_area_per_room / default_floor_area();
    let th = thermal(spec.mass);
    let window = spec.window_fraction * spec.floor_area_per_room * FACADE_PER_FLOOR;
    let k_room_out = (INFILTRATION + WINDOW_U * window / area) * area;
    let col = |k| disturbances.iter().position(|d| *d == k);
    let at = col(DisturbanceKind::AmbientTemp);
    let gt = col(DisturbanceKind::GroundTemp);
    let ig = col(DisturbanceKind::InternalGains);

    let mut inputs = Vec::new();
    for r in 0..rooms {
        if has(Actuator::Radiator) {
            inputs.push(InputKind::Radiator(r));
        }
        if has(Actuator::Ahu) {
            inputs.push(InputKind::Ahu(r));
        }
        if has(Actuator::Tabs) {
            inputs.push(InputKind::TabsHeat(r));
            inputs.push(InputKind::TabsCool(r));
        }
    }
    let m = inputs.len();
    let nv = if has(Actuator::Blinds) { rooms } else { 0 };

    let mut ac = Array2::<f64>::zeros((n, n));
    let mut bc = Array2::<f64>::zeros((n, m));
    let mut dc = Array2::<f64>::zeros((n, nd));
    let mut ec = vec![Array2::<f64>::zeros((n, m)); n];
    let mut cc = vec![Array2::<f64>::zeros((n, nd)); nv];
    for r in 0..rooms {
        let (ri, wi) = (2 * r, 2 * r + 1);
        let cr = th.c_room * area;
        let cw = th.c_wall * area;
        let krw = th.k_room_wall * area;
        let kwo = th.k_wall_out * area;
        ac[[ri, ri]] = -(krw + k_room_out) / cr;
        ac[[ri, wi]] = krw / cr;
        ac[[wi, ri]] = krw / cw;
        ac[[wi, wi]] = -(krw + kwo) / cw;
        // Losses to an untracked source fall back to ambient.
        match (at, gt) {
            (Some(a), Some(g)) => {
                dc[[ri, a]] += k_room_out / cr;
                dc[[wi, a]] += (1.0 - GROUND_SHARE) * kwo / cw;
                dc[[wi, g]] += GROUND_SHARE * kwo / cw;
            }
            (Some(a), None) => {
                dc[[ri, a]] += k_room_out / cr;
                dc[[wi, a]] += kwo / cw;
            }
            (None, Some(g)) => {
                dc[[ri, g]] += k_room_out / cr;
                dc[[wi, g]] += kwo / cw;
            }
            (None, None) => {}
        }
        if let Some(s) = facade_column(r, disturbances) {
            let gain = SOLAR_TRANSMITTANCE * window;
            dc[[ri, s]] += SOLAR_TO_ROOM * gain / cr;
            dc[[wi, s]] += (1.0 - SOLAR_TO_ROOM) * gain / cw;
            if nv > 0 {
                cc[r][[ri, s]] -= BLIND_CUT * SOLAR_TO_ROOM * gain / cr;
                cc[r][[wi, s]] -= BLIND_CUT * (1.0 - SOLAR_TO_ROOM) * gain / cw;
            }
        }
        if let Some(g) = ig {
            dc[[ri, g]] += area / cr;
        }
    }
    let mut caps = Vec::with_capacity(m);
    for (j, inp) in inputs.iter().enumerate() {
        let r = inp.room();
        let (ri, wi) = (2 * r, 2 * r + 1);
        let cr = th.c_room * area;
        let cw = th.c_wall * area;
        match inp {
            InputKind::Radiator(_) => {
                bc[[ri, j]] = 1.0 / cr;
                caps.push(RADIATOR_CAP * area);
            }
            InputKind::Ahu(_) => {
                // Supply air heats the room in proportion to its temperature gap.
                bc[[ri, j]] = SUPPLY_TEMP / AHU_REF_DELTA / cr;
                ec[ri][[ri, j]] = -1.0 / AHU_REF_DELTA / cr;
                caps.push(AHU_CAP * area);
            }
            InputKind::TabsHeat(_) => {
                bc[[wi, j]] = 1.0 / cw;
                caps.push(TABS_CAP * area);
            }
            InputKind::TabsCool(_) => {
                bc[[wi, j]] = -1.0 / cw;
                caps.push(TABS_CAP * area);
            }
        }
    }

    let to_s = |a: &Array2<f64>| a.mapv(S::lit);
    let acs = to_s(&ac);
    let (a, gamma) = expm_with_integral(acs.view());
    let b = matmul(gamma.view(), to_s(&bc).view());
    let d = matmul(gamma.view(), to_s(&dc).view());
    let e = ec.iter().map(|el| matmul(gamma.view(), to_s(el).view())).collect();
    let c = cc.iter().map(|cl| matmul(gamma.view(), to_s(cl).view())).collect();

    let rows = 2 * m + 2 * nv;
    let mut f_u = Array2::from_elem((rows, m), S::zero());
    let mut f_v = Array2::from_elem((rows, nv), S::zero());
    let mut h = Array1::from_elem(rows, S::zero());
    for j in 0..m {
        f_u[[2 * j, j]] = -S::one();
        f_u[[2 * j + 1, j]] = S::one();
        h[2 * j + 1] = S::lit(caps[j]);
    }
    for l in 0..nv {
        f_v[[2 * m + 2 * l, l]] = -S::one();
        f_v[[2 * m + 2 * l + 1, l]] = S::one();
        h[2 * m + 2 * l + 1] = S::one();
    }
    Ok(Building {
        id: spec.id.clone(),
        n_rooms: rooms,
        mass: spec.mass,
        state_dim: n,
        input_dim: m,
        blind_dim: nv,
        a,
        b,
        d,
        e,
        c,
        f_x: Array2::from_elem((rows, n), S::zero()),
        f_u,
        f_v,
        f_xi: Array2::from_elem((rows, nd), S::zero()),
        h,
        comfort: ComfortSchedule::winter(),
        room_states: (0..rooms).map(|r| 2 * r).collect(),
        inputs,
        actuators: spec.actuators.clone(),
        x0: Array1::from_elem(n, S::lit(spec.initial_temp)),
    })
}

fn check_len<S>(what: &str, v: &Array1<S>, n: usize) -> Result<(), PlantError> {
    if v.len() != n {
        return Err(PlantError::Shape(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

impl<S: Scalar> Building<S> {
    pub fn n_disturbances(&self) -> usize {
        self.d.ncols()
    }

    /// `B + Σ_l x_l E_l`.
    pub fn input_gain(&self, x: &Array1<S>) -> Array2<S> {
        let mut g = self.b.clone();
        for (l, el) in self.e.iter().enumerate() {
            if x[l] != S::zero() {
                g.scaled_add(x[l], el);
            }
        }
        g
    }

    /// Coupling matrix: row per demand stream, column per input.
    pub fn coupling(&self) -> Array2<S> {
        let mut eta = Array2::from_elem((DemandStream::ALL.len(), self.input_dim), S::zero());
        for (j, inp) in self.inputs.iter().enumerate() {
            eta[[inp.stream().index(), j]] = S::one();
        }
        eta
    }

    /// Per-room Kelvin violation of the comfort band at `hour`.
    pub fn room_violations(&self, hour: usize, x: &Array1<S>) -> Vec<S> {
        self.room_states
            .iter()
            .map(|&i| self.comfort.violation(hour, x[i]))
            .collect()
    }

    pub fn is_consistent(&self) -> bool {
        let n = self.state_dim;
        let m = self.input_dim;
        let nd = self.n_disturbances();
        self.a.dim() == (n, n)
            && self.b.dim() == (n, m)
            && self.e.len() == n
            && self.e.iter().all(|e| e.dim() == (n, m))
            && self.c.len() == self.blind_dim
            && self.c.iter().all(|c| c.dim() == (n, nd))
            && self.comfort.is_valid()
            && self.h.iter().all(|v| v.is_finite())
    }
}

pub fn linearize_building<S: Scalar>(
    b: &Building<S>,
    x_hat: &Array1<S>,
) -> Result<LinearBuilding<S>, PlantError> {
    check_len("expansion point", x_hat, b.state_dim)?;
    if x_hat.iter().any(|v| !v.is_finite()) {
        return Err(PlantError::Shape("expansion point is not finite".into()));
    }
    Ok(LinearBuilding {
        a: b.a.clone(),
        b: b.input_gain(x_hat),
        d: b.d.clone(),
        c: b.c.clone(),
    })
}

/// One step of the bilinear model.
pub fn simulate_true_step<S: Scalar>(
    b: &Building<S>,
    x: &Array1<S>,
    u: &Array1<S>,
    v: &Array1<S>,
    xi: &Array1<S>,
) -> Result<Array1<S>, PlantError> {
    check_len("state", x, b.state_dim)?;
    check_len("input", u, b.input_dim)?;
    check_len("blinds", v, b.blind_dim)?;
    check_len("disturbance", xi, b.n_disturbances())?;
    let mut dist = b.d.clone();
    for (l, cl) in b.c.iter().enumerate() {
        dist.scaled_add(v[l], cl);
    }
    Ok(matvec(b.a.view(), x.view())
        + matvec(b.input_gain(x).view(), u.view())
        + matvec(dist.view(), xi.view()))
}
