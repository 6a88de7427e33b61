//! Radial feeder model, forward-backward-sweep power flow, voltage-load
//! sensitivity matrices by perturbation, and tree distances.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Source,
    Load,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    #[serde(default)]
    pub p_kw: f64,
    #[serde(default)]
    pub q_kvar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub length_km: f64,
}

fn default_source_voltage() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
struct RawNetwork {
    base_kv: f64,
    #[serde(default = "default_source_voltage")]
    source_voltage_pu: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
}

/// A validated radial feeder: one source, a spanning tree of lines.
#[derive(Debug, Clone)]
pub struct FeederNetwork {
    base_kv: f64,
    source_voltage_pu: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    index_of: BTreeMap<usize, usize>,
    source_idx: usize,
    /// Per bus index: parent bus index and the connecting line index.
    parent: Vec<Option<(usize, usize)>>,
    /// Breadth-first order from the source, children visited in id order.
    order: Vec<usize>,
}

impl FeederNetwork {
    pub fn new(
        base_kv: f64,
        source_voltage_pu: f64,
        buses: Vec<Bus>,
        lines: Vec<Line>,
    ) -> Result<Self> {
        if buses.is_empty() {
            return Err(Error::InvalidNetwork("no buses".into()));
        }
        if !base_kv.is_finite() || base_kv <= 0.0 {
            return Err(Error::InvalidNetwork(format!("base_kv must be positive, got {base_kv}")));
        }
        if !source_voltage_pu.is_finite() || source_voltage_pu <= 0.0 {
            return Err(Error::InvalidNetwork(format!(
                "source_voltage_pu must be positive, got {source_voltage_pu}"
            )));
        }

        let mut index_of = BTreeMap::new();
        for (i, bus) in buses.iter().enumerate() {
            if index_of.insert(bus.id, i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate bus id {}", bus.id)));
            }
            if !bus.p_kw.is_finite() || !bus.q_kvar.is_finite() {
                return Err(Error::InvalidNetwork(format!("non-finite load at bus {}", bus.id)));
            }
        }

        let sources: Vec<usize> = buses
            .iter()
            .filter(|b| b.kind == BusKind::Source)
            .map(|b| b.id)
            .collect();
        if sources.len() != 1 {
            return Err(Error::InvalidNetwork(format!(
                "expected exactly one source bus, found {:?}",
                sources
            )));
        }
        let source_idx = index_of[&sources[0]];

        let mut seen_pairs = std::collections::BTreeSet::new();
        for line in &lines {
            if line.from == line.to {
                return Err(Error::InvalidNetwork(format!("self-loop at bus {}", line.from)));
            }
            for end in [line.from, line.to] {
                if !index_of.contains_key(&end) {
                    return Err(Error::InvalidNetwork(format!(
                        "line {}-{} references unknown bus {end}",
                        line.from, line.to
                    )));
                }
            }
            let key = (line.from.min(line.to), line.from.max(line.to));
            if !seen_pairs.insert(key) {
                return Err(Error::InvalidNetwork(format!(
                    "parallel lines between buses {} and {}",
                    key.0, key.1
                )));
            }
            if line.r_ohm < 0.0 || line.x_ohm < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "negative impedance on line {}-{}",
                    line.from, line.to
                )));
            }
            if line.r_ohm == 0.0 && line.x_ohm == 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "line {}-{} has zero impedance",
                    line.from, line.to
                )));
            }
            if !line.length_km.is_finite() || line.length_km <= 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "line {}-{} must have positive length",
                    line.from, line.to
                )));
            }
        }

        if lines.len() != buses.len() - 1 {
            return Err(Error::NotRadial(format!(
                "{} buses need exactly {} lines for a tree, found {}",
                buses.len(),
                buses.len() - 1,
                lines.len()
            )));
        }

        // Adjacency with children visited in ascending bus-id order keeps
        // traversal deterministic.
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); buses.len()];
        for (li, line) in lines.iter().enumerate() {
            let a = index_of[&line.from];
            let b = index_of[&line.to];
            adjacency[a].push((b, li));
            adjacency[b].push((a, li));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|(idx, _)| buses[*idx].id);
        }

        let mut parent = vec![None; buses.len()];
        let mut order = Vec::with_capacity(buses.len());
        let mut visited = vec![false; buses.len()];
        let mut queue = std::collections::VecDeque::from([source_idx]);
        visited[source_idx] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, li) in &adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = Some((u, li));
                    queue.push_back(v);
                }
            }
        }
        if let Some(i) = visited.iter().position(|v| !v) {
            return Err(Error::NotRadial(format!(
                "bus {} is not connected to the source",
                buses[i].id
            )));
        }

        Ok(Self {
            base_kv,
            source_voltage_pu,
            buses,
            lines,
            index_of,
            source_idx,
            parent,
            order,
        })
    }

    pub fn base_kv(&self) -> f64 {
        self.base_kv
    }

    pub fn source_voltage_pu(&self) -> f64 {
        self.source_voltage_pu
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn n_node(&self) -> usize {
        self.buses.len()
    }

    pub fn source_id(&self) -> usize {
        self.buses[self.source_idx].id
    }

    pub fn bus_index(&self, id: usize) -> Result<usize> {
        self.index_of.get(&id).copied().ok_or(Error::UnknownBus(id))
    }

    /// Total connected load magnitude in kVA, used to scale the power-flow
    /// mismatch tolerance.
    fn base_power_kva(&self) -> f64 {
        let total: f64 = self
            .buses
            .iter()
            .map(|b| (b.p_kw * b.p_kw + b.q_kvar * b.q_kvar).sqrt())
            .sum();
        total.max(1.0)
    }
}

/// Relative power-flow mismatch tolerance: 1e-6 of total feeder load.
pub const POWER_FLOW_TOLERANCE: f64 = 1e-6;
pub const POWER_FLOW_MAX_ITERATIONS: usize = 100;

/// Power-flow result; voltages are per-unit magnitudes aligned with
/// [`FeederNetwork::buses`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub v_pu: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch_kw: f64,
}

impl PowerFlowSolution {
    pub fn v_pu_of(&self, net: &FeederNetwork, bus_id: usize) -> Result<f64> {
        Ok(self.v_pu[net.bus_index(bus_id)?])
    }
}

/// Solves the radial power flow by forward-backward sweep with constant-power
/// loads and a flat start. A non-converged run is reported, never hidden.
pub fn solve_power_flow(net: &FeederNetwork) -> PowerFlowSolution {
    solve_with_delta(net, None)
}

fn solve_with_delta(net: &FeederNetwork, delta: Option<(usize, f64, f64)>) -> PowerFlowSolution {
    let n = net.n_node();
    let v_base = net.base_kv * 1e3;
    let v_source = Complex64::new(net.source_voltage_pu * v_base, 0.0);

    // Complex load per bus in VA.
    let mut s_va: Vec<Complex64> = net
        .buses
        .iter()
        .map(|b| Complex64::new(b.p_kw * 1e3, b.q_kvar * 1e3))
        .collect();
    if let Some((idx, dp_kw, dq_kvar)) = delta {
        s_va[idx] += Complex64::new(dp_kw * 1e3, dq_kvar * 1e3);
    }
    s_va[net.source_idx] = Complex64::new(0.0, 0.0);

    let tol_va = POWER_FLOW_TOLERANCE * net.base_power_kva() * 1e3;
    let mut v: Vec<Complex64> = vec![v_source; n];
    let mut injections: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    let mut branch: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); net.lines.len()];

    let mut iterations = 0;
    let mut max_mismatch_va = f64::INFINITY;
    while iterations < POWER_FLOW_MAX_ITERATIONS {
        iterations += 1;

        // Backward: accumulate branch currents from the leaves up. Reverse
        // BFS order guarantees every child is folded in before its parent.
        for i in 0..n {
            injections[i] = (s_va[i] / v[i]).conj();
        }
        let mut downstream = injections.clone();
        for &u in net.order.iter().rev() {
            if let Some((p, li)) = net.parent[u] {
                branch[li] = downstream[u];
                let add = downstream[u];
                downstream[p] += add;
            }
        }

        // Forward: apply voltage drops from the source down.
        for &u in &net.order {
            if let Some((p, li)) = net.parent[u] {
                let z = Complex64::new(net.lines[li].r_ohm, net.lines[li].x_ohm);
                v[u] = v[p] - z * branch[li];
            }
        }

        // Mismatch: specified load vs power implied by the updated voltages
        // and the currents just used. A non-finite residual means the sweep
        // is diverging (voltage collapse), never convergence.
        max_mismatch_va = 0.0;
        for i in 0..n {
            if i == net.source_idx {
                continue;
            }
            let residual = (v[i] * injections[i].conj() - s_va[i]).norm();
            if !residual.is_finite() {
                max_mismatch_va = f64::INFINITY;
                break;
            }
            max_mismatch_va = max_mismatch_va.max(residual);
        }
        if max_mismatch_va < tol_va {
            break;
        }
    }

    let mut v_pu: Vec<f64> = v.iter().map(|vi| vi.norm() / v_base).collect();
    // The source magnitude is a boundary condition, not a computed value.
    v_pu[net.source_idx] = net.source_voltage_pu;

    PowerFlowSolution {
        v_pu,
        converged: max_mismatch_va < tol_va,
        iterations,
        max_mismatch_kw: max_mismatch_va / 1e3,
    }
}

/// Voltage sensitivities to per-bus real and reactive load changes, built by
/// perturbing one bus at a time. Entries are signed under the convention
/// "positive delta = load increase", so they are nonpositive on a passive
/// radial feeder; the source row and column are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMatrices {
    bus_ids: Vec<usize>,
    index_of: BTreeMap<usize, usize>,
    /// vlsmp[a][b]: voltage change at bus a per kW of load added at bus b.
    vlsmp: Vec<Vec<f64>>,
    /// vlsmq[a][b]: voltage change at bus a per kvar added at bus b.
    vlsmq: Vec<Vec<f64>>,
}

impl SensitivityMatrices {
    pub fn bus_ids(&self) -> &[usize] {
        &self.bus_ids
    }

    pub fn index_of(&self, bus_id: usize) -> Result<usize> {
        self.index_of.get(&bus_id).copied().ok_or(Error::UnknownBus(bus_id))
    }

    pub fn vlsmp(&self) -> &[Vec<f64>] {
        &self.vlsmp
    }

    pub fn vlsmq(&self) -> &[Vec<f64>] {
        &self.vlsmq
    }

    pub fn vlsmp_entry(&self, observe_bus: usize, change_bus: usize) -> Result<f64> {
        Ok(self.vlsmp[self.index_of(observe_bus)?][self.index_of(change_bus)?])
    }

    pub fn vlsmq_entry(&self, observe_bus: usize, change_bus: usize) -> Result<f64> {
        Ok(self.vlsmq[self.index_of(observe_bus)?][self.index_of(change_bus)?])
    }
}

pub const DEFAULT_DELTA_P_KW: f64 = 1.0;
pub const DEFAULT_DELTA_Q_KVAR: f64 = 1.0;

/// Builds both sensitivity matrices by re-solving the feeder with one bus
/// load increased at a time.
pub fn compute_vlsm(
    net: &FeederNetwork,
    delta_p_kw: f64,
    delta_q_kvar: f64,
) -> Result<SensitivityMatrices> {
    if !delta_p_kw.is_finite() || delta_p_kw <= 0.0 || !delta_q_kvar.is_finite() || delta_q_kvar <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "perturbations must be positive, got {delta_p_kw} kW / {delta_q_kvar} kvar"
        )));
    }
    let base = solve_power_flow(net);
    if !base.converged {
        return Err(Error::PowerFlowDiverged { bus: None });
    }

    let n = net.n_node();
    let mut vlsmp = vec![vec![0.0; n]; n];
    let mut vlsmq = vec![vec![0.0; n]; n];
    for b in 0..n {
        if b == net.source_idx {
            continue; // the source column stays zero: its voltage is fixed
        }
        let pert_p = solve_with_delta(net, Some((b, delta_p_kw, 0.0)));
        if !pert_p.converged {
            return Err(Error::PowerFlowDiverged { bus: Some(net.buses[b].id) });
        }
        let pert_q = solve_with_delta(net, Some((b, 0.0, delta_q_kvar)));
        if !pert_q.converged {
            return Err(Error::PowerFlowDiverged { bus: Some(net.buses[b].id) });
        }
        for a in 0..n {
            if a == net.source_idx {
                continue; // fixed source voltage: zero row
            }
            vlsmp[a][b] = (pert_p.v_pu[a] - base.v_pu[a]) / delta_p_kw;
            vlsmq[a][b] = (pert_q.v_pu[a] - base.v_pu[a]) / delta_q_kvar;
        }
    }

    Ok(SensitivityMatrices {
        bus_ids: net.buses.iter().map(|b| b.id).collect(),
        index_of: net.index_of.clone(),
        vlsmp,
        vlsmq,
    })
}

/// Conductor kilometres along the unique tree path between two buses.
pub fn electrical_distance(net: &FeederNetwork, b: usize, l: usize) -> Result<f64> {
    let mut i = net.bus_index(b)?;
    let mut j = net.bus_index(l)?;
    if i == j {
        return Ok(0.0);
    }
    // Walk the deeper node up until the paths meet.
    let mut dist = 0.0;
    let depth = |idx: usize| {
        let mut d = 0usize;
        let mut cur = idx;
        while let Some((p, _)) = net.parent[cur] {
            cur = p;
            d += 1;
        }
        d
    };
    let (mut di, mut dj) = (depth(i), depth(j));
    while di > dj {
        let (p, li) = net.parent[i].expect("non-root has a parent");
        dist += net.lines[li].length_km;
        i = p;
        di -= 1;
    }
    while dj > di {
        let (p, li) = net.parent[j].expect("non-root has a parent");
        dist += net.lines[li].length_km;
        j = p;
        dj -= 1;
    }
    while i != j {
        let (pi, li) = net.parent[i].expect("non-root has a parent");
        let (pj, lj) = net.parent[j].expect("non-root has a parent");
        dist += net.lines[li].length_km + net.lines[lj].length_km;
        i = pi;
        j = pj;
    }
    Ok(dist)
}

/// Sum of absolute voltage sensitivities over all buses for a load change at
/// bus `l`: the magnitude of the feeder-wide voltage impact.
pub fn column_sensitivity_sum(m: &SensitivityMatrices, l: usize) -> Result<f64> {
    let col = m.index_of(l)?;
    Ok(m.vlsmp.iter().map(|row| row[col].abs()).sum())
}

/// Reads the network JSON format:
///
/// ```json
/// { "base_kv": 12.47, "source_voltage_pu": 1.0,
///   "buses": [{"id": 1, "kind": "source", "p_kw": 0.0, "q_kvar": 0.0}],
///   "lines": [{"from": 1, "to": 2, "r_ohm": 0.3, "x_ohm": 0.2, "length_km": 0.5}] }
/// ```
pub fn load_network_json(path: impl AsRef<Path>) -> Result<FeederNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawNetwork = serde_json::from_str(&text)?;
    FeederNetwork::new(raw.base_kv, raw.source_voltage_pu, raw.buses, raw.lines)
}

/// Writes a sensitivity matrix as CSV with bus ids on the header row and the
/// leading column.
pub fn write_vlsm_csv(m: &SensitivityMatrices, matrix: &[Vec<f64>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("bus_id");
    for id in &m.bus_ids {
        out.push_str(&format!(",{id}"));
    }
    out.push('\n');
    for (a, row) in matrix.iter().enumerate() {
        out.push_str(&format!("{}", m.bus_ids[a]));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus(p_kw: f64, q_kvar: f64, r: f64, x: f64) -> FeederNetwork {
        FeederNetwork::new(
            12.47,
            1.0,
            vec![
                Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 },
                Bus { id: 2, kind: BusKind::Load, p_kw, q_kvar },
            ],
            vec![Line { from: 1, to: 2, r_ohm: r, x_ohm: x, length_km: 1.0 }],
        )
        .unwrap()
    }

    fn fixture_path() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ten_bus_feeder.json")
    }

    /// High-voltage root of the two-bus drop equation: with source magnitude
    /// E and load P + jQ behind R + jX,
    /// |V2|^2 = (E^2/2 - (PR + QX)) + sqrt((E^2/2 - (PR+QX))^2 - (P^2+Q^2)(R^2+X^2)).
    fn two_bus_voltage(e: f64, p_w: f64, q_var: f64, r: f64, x: f64) -> f64 {
        let half = e * e / 2.0 - (p_w * r + q_var * x);
        let disc = half * half - (p_w * p_w + q_var * q_var) * (r * r + x * x);
        (half + disc.sqrt()).sqrt()
    }

    #[test]
    fn parse_two_bus_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        std::fs::write(
            &path,
            r#"{ "base_kv": 12.47,
                 "buses": [ {"id": 1, "kind": "source"},
                            {"id": 2, "kind": "load", "p_kw": 100.0, "q_kvar": 30.0} ],
                 "lines": [ {"from": 1, "to": 2, "r_ohm": 0.3, "x_ohm": 0.2, "length_km": 0.5} ] }"#,
        )
        .unwrap();
        let net = load_network_json(&path).unwrap();
        assert_eq!(net.n_node(), 2);
        assert_eq!(net.source_voltage_pu(), 1.0);
    }

    #[test]
    fn cycle_is_rejected() {
        let err = FeederNetwork::new(
            12.47,
            1.0,
            vec![
                Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 },
                Bus { id: 2, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
                Bus { id: 3, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
            ],
            vec![
                Line { from: 1, to: 2, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
                Line { from: 2, to: 3, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
                Line { from: 3, to: 1, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotRadial(_)));
    }

    #[test]
    fn disconnected_bus_is_rejected() {
        let err = FeederNetwork::new(
            12.47,
            1.0,
            vec![
                Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 },
                Bus { id: 2, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
                Bus { id: 3, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
                Bus { id: 4, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
            ],
            vec![
                Line { from: 1, to: 2, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
                Line { from: 3, to: 4, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotRadial(_)));
    }

    #[test]
    fn bundled_fixture_parses() {
        let net = load_network_json(fixture_path()).unwrap();
        assert_eq!(net.n_node(), 10);
        let flow = solve_power_flow(&net);
        assert!(flow.converged);
        // Radial feeder under load: every non-source bus sits below the head.
        for (i, bus) in net.buses().iter().enumerate() {
            if bus.kind == BusKind::Load {
                assert!(flow.v_pu[i] < 1.0);
                assert!(flow.v_pu[i] > 0.9);
            }
        }
    }

    #[test]
    fn zero_load_gives_flat_voltage() {
        let net = two_bus(0.0, 0.0, 0.3, 0.2);
        let flow = solve_power_flow(&net);
        assert!(flow.converged);
        assert_eq!(flow.v_pu, vec![1.0, 1.0]);
    }

    #[test]
    fn source_voltage_is_the_boundary_condition_exactly() {
        let net = FeederNetwork::new(
            12.47,
            1.03,
            vec![
                Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 },
                Bus { id: 2, kind: BusKind::Load, p_kw: 150.0, q_kvar: 40.0 },
            ],
            vec![Line { from: 1, to: 2, r_ohm: 0.3, x_ohm: 0.2, length_km: 1.0 }],
        )
        .unwrap();
        let flow = solve_power_flow(&net);
        assert!(flow.converged);
        assert_eq!(flow.v_pu[0], 1.03);
    }

    #[test]
    fn power_flow_is_bit_deterministic() {
        let net = load_network_json(fixture_path()).unwrap();
        let a = solve_power_flow(&net);
        let b = solve_power_flow(&net);
        assert_eq!(a, b);
        let ma = compute_vlsm(&net, 1.0, 1.0).unwrap();
        let mb = compute_vlsm(&net, 1.0, 1.0).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn voltage_collapse_reports_divergence() {
        // Load far beyond the feeder's maximum loadability: the sweep must
        // report non-convergence, never a silent NaN "solution".
        let net = two_bus(1e9, 3e8, 0.8, 0.6);
        let flow = solve_power_flow(&net);
        assert!(!flow.converged);
        assert!(compute_vlsm(&net, 1.0, 1.0).is_err());
    }

    #[test]
    fn two_bus_matches_closed_form() {
        let net = two_bus(500.0, 150.0, 0.8, 0.6);
        let flow = solve_power_flow(&net);
        assert!(flow.converged);
        let expected = two_bus_voltage(12_470.0, 500e3, 150e3, 0.8, 0.6) / 12_470.0;
        assert!(
            (flow.v_pu[1] - expected).abs() < 1e-8,
            "got {}, closed form {}",
            flow.v_pu[1],
            expected
        );
    }

    #[test]
    fn doubling_impedance_roughly_doubles_drop() {
        let net = load_network_json(fixture_path()).unwrap();
        let base = solve_power_flow(&net);
        let doubled = FeederNetwork::new(
            net.base_kv(),
            net.source_voltage_pu(),
            net.buses().to_vec(),
            net.lines()
                .iter()
                .map(|l| Line { r_ohm: 2.0 * l.r_ohm, x_ohm: 2.0 * l.x_ohm, ..*l })
                .collect(),
        )
        .unwrap();
        let flow2 = solve_power_flow(&doubled);
        assert!(flow2.converged);
        for i in 0..net.n_node() {
            let d1 = 1.0 - base.v_pu[i];
            let d2 = 1.0 - flow2.v_pu[i];
            if d1 > 1e-6 {
                assert!(
                    (d2 - 2.0 * d1).abs() < 0.05 * (2.0 * d1),
                    "bus {i}: drops {d1} vs {d2}"
                );
            }
        }
    }

    #[test]
    fn vlsm_source_column_and_row_are_zero() {
        let net = load_network_json(fixture_path()).unwrap();
        let m = compute_vlsm(&net, 1.0, 1.0).unwrap();
        let s = m.index_of(net.source_id()).unwrap();
        for a in 0..net.n_node() {
            assert_eq!(m.vlsmp()[a][s], 0.0);
            assert_eq!(m.vlsmp()[s][a], 0.0);
        }
        assert_eq!(column_sensitivity_sum(&m, net.source_id()).unwrap(), 0.0);
    }

    #[test]
    fn vlsm_entries_nonpositive_under_load_increase() {
        let net = load_network_json(fixture_path()).unwrap();
        let m = compute_vlsm(&net, 1.0, 1.0).unwrap();
        for row in m.vlsmp() {
            for v in row {
                assert!(*v <= 0.0, "load increase must not raise any voltage");
            }
        }
    }

    #[test]
    fn vlsm_two_bus_matches_analytic_derivative() {
        let net = two_bus(500.0, 150.0, 0.8, 0.6);
        let m = compute_vlsm(&net, 1.0, 1.0).unwrap();
        // d|V2|/dP of the closed form, by exact differentiation:
        // |V2|^2 = u + sqrt(u^2 - w), u = E^2/2 - (PR + QX),
        // w = (P^2 + Q^2)|Z|^2; du/dP = -R, dw/dP = 2P|Z|^2.
        let (e, p, q, r, x) = (12_470.0f64, 500e3, 150e3, 0.8, 0.6);
        let z2 = r * r + x * x;
        let u = e * e / 2.0 - (p * r + q * x);
        let disc = (u * u - (p * p + q * q) * z2).sqrt();
        let v2 = (u + disc).sqrt();
        let dv2_dp = (-r + (u * (-r) - p * z2) / disc) / (2.0 * v2);
        // per kW of load and in per-unit
        let analytic = dv2_dp * 1e3 / e;
        let entry = m.vlsmp_entry(2, 2).unwrap();
        assert!(
            (entry - analytic).abs() <= 0.01 * analytic.abs(),
            "perturbation {entry} vs analytic {analytic}"
        );
    }

    #[test]
    fn vlsm_richardson_step_halving() {
        let net = load_network_json(fixture_path()).unwrap();
        let m_h = compute_vlsm(&net, 2.0, 2.0).unwrap();
        let m_h2 = compute_vlsm(&net, 1.0, 1.0).unwrap();
        for a in 0..net.n_node() {
            for b in 0..net.n_node() {
                let eh = m_h.vlsmp()[a][b];
                let eh2 = m_h2.vlsmp()[a][b];
                if eh == 0.0 && eh2 == 0.0 {
                    continue;
                }
                // Consistency: halving the step moves the estimate by no
                // more than a small fraction of the entry itself (the
                // finite-difference truncation is far below the signal).
                assert!(
                    (eh2 - eh).abs() <= 0.05 * eh.abs().max(eh2.abs()),
                    "entry ({a},{b}): {eh} vs {eh2}"
                );
            }
        }
    }

    #[test]
    fn distance_identity_and_chain() {
        let net = FeederNetwork::new(
            12.47,
            1.0,
            vec![
                Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 },
                Bus { id: 2, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
                Bus { id: 3, kind: BusKind::Load, p_kw: 10.0, q_kvar: 0.0 },
            ],
            vec![
                Line { from: 1, to: 2, r_ohm: 0.1, x_ohm: 0.1, length_km: 1.0 },
                Line { from: 2, to: 3, r_ohm: 0.1, x_ohm: 0.1, length_km: 2.0 },
            ],
        )
        .unwrap();
        assert_eq!(electrical_distance(&net, 2, 2).unwrap(), 0.0);
        assert_eq!(electrical_distance(&net, 1, 3).unwrap(), 3.0);
        assert_eq!(electrical_distance(&net, 3, 1).unwrap(), 3.0);
        assert!(electrical_distance(&net, 1, 99).is_err());
    }

    /// Brute-force BFS oracle over the undirected line graph.
    fn bfs_distance(net: &FeederNetwork, from: usize, to: usize) -> f64 {
        use std::collections::VecDeque;
        let mut dist: BTreeMap<usize, f64> = BTreeMap::new();
        dist.insert(from, 0.0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                return dist[&u];
            }
            for line in net.lines() {
                for (a, b) in [(line.from, line.to), (line.to, line.from)] {
                    if a == u && !dist.contains_key(&b) {
                        dist.insert(b, dist[&u] + line.length_km);
                        queue.push_back(b);
                    }
                }
            }
        }
        unreachable!("tree is connected")
    }

    #[test]
    fn distance_matches_bfs_oracle_on_random_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let n = rng.gen_range(3..30);
            let mut buses = vec![Bus { id: 1, kind: BusKind::Source, p_kw: 0.0, q_kvar: 0.0 }];
            let mut lines = Vec::new();
            for id in 2..=n {
                buses.push(Bus { id, kind: BusKind::Load, p_kw: 10.0, q_kvar: 2.0 });
                let parent = rng.gen_range(1..id);
                // Dyadic lengths keep path sums exactly representable.
                let length = rng.gen_range(1..=32) as f64 / 4.0;
                lines.push(Line { from: parent, to: id, r_ohm: 0.1, x_ohm: 0.1, length_km: length });
            }
            let net = FeederNetwork::new(12.47, 1.0, buses, lines).unwrap();
            for _ in 0..20 {
                let a = rng.gen_range(1..=n);
                let b = rng.gen_range(1..=n);
                let d = electrical_distance(&net, a, b).unwrap();
                assert_eq!(d, bfs_distance(&net, a, b));
                assert_eq!(d, electrical_distance(&net, b, a).unwrap());
            }
        }
    }

    #[test]
    fn column_sum_matches_direct_resummation() {
        let net = load_network_json(fixture_path()).unwrap();
        let m = compute_vlsm(&net, 1.0, 1.0).unwrap();
        for bus in net.buses() {
            let col = m.index_of(bus.id).unwrap();
            let direct: f64 = (0..net.n_node()).map(|a| m.vlsmp()[a][col].abs()).sum();
            assert_eq!(column_sensitivity_sum(&m, bus.id).unwrap(), direct);
        }
    }

    #[test]
    fn linear_prediction_matches_full_resolve() {
        // VLSMP * dP vs a full re-solve for a simultaneous perturbation of
        // 1% of each bus load.
        let net = load_network_json(fixture_path()).unwrap();
        let base = solve_power_flow(&net);
        let m = compute_vlsm(&net, 1.0, 1.0).unwrap();

        let deltas: Vec<f64> = net.buses().iter().map(|b| 0.01 * b.p_kw).collect();
        let perturbed = FeederNetwork::new(
            net.base_kv(),
            net.source_voltage_pu(),
            net.buses()
                .iter()
                .zip(&deltas)
                .map(|(b, d)| Bus { p_kw: b.p_kw + d, ..b.clone() })
                .collect(),
            net.lines().to_vec(),
        )
        .unwrap();
        let resolved = solve_power_flow(&perturbed);
        assert!(resolved.converged);

        for a in 0..net.n_node() {
            let predicted: f64 = (0..net.n_node()).map(|b| m.vlsmp()[a][b] * deltas[b]).sum();
            let actual = resolved.v_pu[a] - base.v_pu[a];
            if actual.abs() > 1e-9 {
                assert!(
                    (predicted - actual).abs() <= 0.05 * actual.abs(),
                    "bus row {a}: predicted {predicted}, actual {actual}"
                );
            }
        }
    }
}
