//! Newmark (β = 1/4, γ = 1/2) time integration of a fixed-bottom strip.

use serde::{Deserialize, Serialize};

use super::banded::BandedSpd;
use super::excitation::{Excitation, ExcitationMode};
use crate::error::{Error, Result};
use crate::fem::assembly::assemble;
use crate::fem::mesh::{Mesh, NodeOrdering};
use crate::fem::sparse::CsrMatrix;
use crate::material::Material;

const BETA: f64 = 0.25;
const GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Strip length L_sim, m.
    pub strip_length: f64,
    /// Element size of the strip mesh, m.
    pub element_size: f64,
    /// Time step, s.
    pub dt: f64,
    /// Simulated time τ, s.
    pub total_time: f64,
    /// Mass-proportional damping, 1/s.
    pub rayleigh_alpha: f64,
    /// Stiffness-proportional damping, s.
    pub rayleigh_beta: f64,
    /// Node rows recorded from the top surface down (≥ 1).
    #[serde(default = "one")]
    pub recorded_rows: usize,
    /// Record total discrete energy every step.
    #[serde(default)]
    pub track_energy: bool,
}

fn one() -> usize {
    1
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            strip_length: 0.8,
            element_size: 0.0005,
            dt: 1.0 / 4800.0,
            total_time: 1.0,
            rayleigh_alpha: 0.0,
            rayleigh_beta: 2e-5,
            recorded_rows: 1,
            track_energy: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, thickness: f64, excitation: &Excitation) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.strip_length) && pos(self.element_size) && pos(self.dt) && pos(self.total_time)) {
            return Err(Error::Config(
                "strip length, element size, dt and total time must be positive".into(),
            ));
        }
        if !(pos(thickness) && self.element_size <= thickness.min(self.strip_length)) {
            return Err(Error::Config(format!(
                "element size {} must not exceed thickness {thickness} or strip length {}",
                self.element_size, self.strip_length
            )));
        }
        if self.rayleigh_alpha < 0.0 || self.rayleigh_beta < 0.0 {
            return Err(Error::Config("rayleigh damping coefficients must be ≥ 0".into()));
        }
        excitation.validate(self.strip_length)?;
        let dt_max = 1.0 / (10.0 * excitation.f_end);
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} s exceeds 1/(10·f_end) = {dt_max} s",
                self.dt
            )));
        }
        if self.total_time < excitation.duration {
            return Err(Error::Config(format!(
                "total time {} s shorter than the chirp duration {} s",
                self.total_time, excitation.duration
            )));
        }
        if self.recorded_rows == 0 {
            return Err(Error::Config("at least the surface row must be recorded".into()));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.total_time / self.dt - 1e-9).ceil() as usize
    }
}

/// Recorded node-row histories of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimHistory {
    pub dt: f64,
    /// Number of stored time samples (steps + 1, including t = 0).
    pub samples: usize,
    pub strip_length: f64,
    pub thickness: f64,
    /// x of the nodes along each recorded row, m.
    pub x: Vec<f64>,
    /// Depth below the surface of each recorded row, m.
    pub depths: Vec<f64>,
    /// `u[r][s * x.len() + i]`: horizontal displacement of node i of row r at sample s.
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// ½vᵀMv + ½uᵀKu per sample when tracked.
    pub energy: Option<Vec<f64>>,
}

impl SimHistory {
    pub fn total_time(&self) -> f64 {
        (self.samples - 1) as f64 * self.dt
    }

    /// Horizontal history of node `node` on recorded row `row`.
    pub fn u_at(&self, row: usize, node: usize) -> Vec<f64> {
        let n = self.x.len();
        (0..self.samples).map(|s| self.u[row][s * n + node]).collect()
    }

    pub fn v_at(&self, row: usize, node: usize) -> Vec<f64> {
        let n = self.x.len();
        (0..self.samples).map(|s| self.v[row][s * n + node]).collect()
    }

    /// Index of the surface node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let h = self.strip_length / (self.x.len() - 1) as f64;
        ((x / h).round().max(0.0) as usize).min(self.x.len() - 1)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum DofKind {
    Free(usize),
    Prescribed(f64),
    Fixed,
}

fn loaded_nodes(mesh: &Mesh, exc: &Excitation) -> Vec<(usize, f64)> {
    let (x0, x1) = exc.location;
    let top = &mesh.top;
    let x = |n: usize| mesh.nodes[n][0];
    let nearest = || {
        let mid = 0.5 * (x0 + x1);
        let n = *top
            .iter()
            .min_by(|&&a, &&b| (x(a) - mid).abs().total_cmp(&(x(b) - mid).abs()))
            .expect("mesh has a top edge");
        vec![(n, 1.0)]
    };
    if x1 - x0 <= 0.0 {
        return nearest();
    }
    match exc.mode {
        ExcitationMode::Displacement => {
            let tol = 1e-9 * mesh.nodes[*top.last().unwrap()][0];
            let nodes: Vec<(usize, f64)> = top
                .iter()
                .filter(|&&n| x(n) >= x0 - tol && x(n) <= x1 + tol)
                .map(|&n| (n, 1.0))
                .collect();
            if nodes.is_empty() {
                nearest()
            } else {
                nodes
            }
        }
        ExcitationMode::Force => {
            // consistent nodal loads of a unit line load over [x0, x1]
            let mut w = vec![0.0; top.len()];
            for k in 0..top.len() - 1 {
                let (xa, xb) = (x(top[k]), x(top[k + 1]));
                let (p, q) = (x0.max(xa), x1.min(xb));
                if q <= p {
                    continue;
                }
                let h = xb - xa;
                w[k] += ((xb - p).powi(2) - (xb - q).powi(2)) / (2.0 * h);
                w[k + 1] += ((q - xa).powi(2) - (p - xa).powi(2)) / (2.0 * h);
            }
            top.iter()
                .zip(w)
                .filter(|(_, w)| *w != 0.0)
                .map(|(&n, w)| (n, w))
                .collect()
        }
    }
}

/// Time-domain response of a strip of thickness `thickness` on a rigid base
/// to the chirp. Left and right ends and the top are traction free.
pub fn simulate(
    thickness: f64,
    material: &Material,
    excitation: &Excitation,
    config: &SimConfig,
) -> Result<SimHistory> {
    material.validate()?;
    config.validate(thickness, excitation)?;
    let nx = (config.strip_length / config.element_size).round().max(1.0) as usize;
    let ny = (thickness / config.element_size).round().max(1.0) as usize;
    if config.recorded_rows > ny {
        return Err(Error::Config(format!(
            "cannot record {} rows of a {ny}-element-thick strip",
            config.recorded_rows
        )));
    }
    let mesh = Mesh::structured(config.strip_length, thickness, nx, ny, NodeOrdering::ColumnMajor)?;
    let (k, m) = assemble(&mesh, material)?;
    let ndof = mesh.dof_count();

    let dt = config.dt;
    let a0 = 1.0 / (BETA * dt * dt);
    let a1 = GAMMA / (BETA * dt);
    let a2 = 1.0 / (BETA * dt);
    let a3 = 1.0 / (2.0 * BETA) - 1.0;
    let a4 = GAMMA / BETA - 1.0;
    let a5 = dt * (GAMMA / (2.0 * BETA) - 1.0);
    let (alpha, beta) = (config.rayleigh_alpha, config.rayleigh_beta);
    let k_eff = CsrMatrix::lin_comb(1.0 + a1 * beta, &k, a0 + a1 * alpha, &m);

    let loads = loaded_nodes(&mesh, excitation);
    let mut kinds = vec![DofKind::Fixed; ndof];
    let mut is_fixed = vec![false; ndof];
    for &b in &mesh.bottom {
        is_fixed[2 * b] = true;
        is_fixed[2 * b + 1] = true;
    }
    let prescribed_mode = excitation.mode == ExcitationMode::Displacement;
    let mut weight = vec![0.0; ndof];
    for &(n, w) in &loads {
        weight[2 * n + 1] = w;
    }
    let mut n_free = 0;
    for d in 0..ndof {
        kinds[d] = if is_fixed[d] {
            DofKind::Fixed
        } else if prescribed_mode && weight[d] != 0.0 {
            DofKind::Prescribed(weight[d])
        } else {
            n_free += 1;
            DofKind::Free(n_free - 1)
        };
    }
    let mut free_dofs = Vec::with_capacity(n_free);
    for (d, kd) in kinds.iter().enumerate() {
        if let DofKind::Free(_) = kd {
            free_dofs.push(d);
        }
    }
    let mut bw = 0;
    for &d in &free_dofs {
        let DofKind::Free(p) = kinds[d] else { unreachable!() };
        for (j, _) in k_eff.row(d) {
            if let DofKind::Free(q) = kinds[j] {
                bw = bw.max(p.abs_diff(q));
            }
        }
    }
    let mut band = BandedSpd::zeros(n_free, bw);
    for &d in &free_dofs {
        let DofKind::Free(p) = kinds[d] else { unreachable!() };
        for (j, v) in k_eff.row(d) {
            if let DofKind::Free(q) = kinds[j] {
                band.add(p, q, v);
            }
        }
    }
    let chol = band
        .cholesky()
        .ok_or_else(|| Error::Config("effective stiffness is not positive definite".into()))?;

    let steps = config.step_count();
    let rows: Vec<usize> = (0..config.recorded_rows).map(|r| ny - r).collect();
    let row_nodes: Vec<Vec<usize>> = rows
        .iter()
        .map(|&j| (0..=nx).map(|i| mesh.node_id(i, j)).collect())
        .collect();
    let n_row = nx + 1;
    let mut hist_u = vec![vec![0.0; (steps + 1) * n_row]; rows.len()];
    let mut hist_v = vec![vec![0.0; (steps + 1) * n_row]; rows.len()];
    let mut energy = config.track_energy.then(|| vec![0.0; steps + 1]);

    let mut u = vec![0.0; ndof];
    let mut vel = vec![0.0; ndof];
    let mut acc = vec![0.0; ndof];
    let mut x1 = vec![0.0; ndof];
    let mut x2 = vec![0.0; ndof];
    let mut rhs = vec![0.0; ndof];
    let mut tmp = vec![0.0; ndof];
    let mut sol = vec![0.0; n_free];

    for step in 1..=steps {
        let t = step as f64 * dt;
        let s = excitation.signal(t);
        for d in 0..ndof {
            x1[d] = a0 * u[d] + a2 * vel[d] + a3 * acc[d];
            x2[d] = a1 * u[d] + a4 * vel[d] + a5 * acc[d];
            tmp[d] = x1[d] + alpha * x2[d];
        }
        m.mul_vec(&tmp, &mut rhs);
        if beta != 0.0 {
            k.mul_vec_add(beta, &x2, &mut rhs);
        }
        let mut u_new = vec![0.0; ndof];
        if prescribed_mode {
            for d in 0..ndof {
                if let DofKind::Prescribed(w) = kinds[d] {
                    let up = w * s;
                    u_new[d] = up;
                    if up != 0.0 {
                        for (j, kv) in k_eff.row(d) {
                            rhs[j] -= kv * up;
                        }
                    }
                }
            }
        } else {
            for d in 0..ndof {
                rhs[d] += weight[d] * s;
            }
        }
        for (p, &d) in free_dofs.iter().enumerate() {
            sol[p] = rhs[d];
        }
        chol.solve_in_place(&mut sol);
        if !sol.iter().all(|x| x.is_finite()) {
            return Err(Error::Instability { step, time: t });
        }
        for (p, &d) in free_dofs.iter().enumerate() {
            u_new[d] = sol[p];
        }
        for d in 0..ndof {
            if is_fixed[d] {
                continue;
            }
            let a_new = a0 * (u_new[d] - u[d]) - a2 * vel[d] - a3 * acc[d];
            vel[d] += dt * ((1.0 - GAMMA) * acc[d] + GAMMA * a_new);
            acc[d] = a_new;
        }
        u = u_new;
        for (r, nodes) in row_nodes.iter().enumerate() {
            let base = step * n_row;
            for (i, &n) in nodes.iter().enumerate() {
                hist_u[r][base + i] = u[2 * n];
                hist_v[r][base + i] = u[2 * n + 1];
            }
        }
        if let Some(e) = energy.as_mut() {
            e[step] = 0.5 * m.bilinear(&vel, &vel) + 0.5 * k.bilinear(&u, &u);
        }
    }

    Ok(SimHistory {
        dt,
        samples: steps + 1,
        strip_length: config.strip_length,
        thickness,
        x: row_nodes[0].iter().map(|&n| mesh.nodes[n][0]).collect(),
        depths: rows
            .iter()
            .map(|&j| thickness - mesh.nodes[mesh.node_id(0, j)][1])
            .collect(),
        u: hist_u,
        v: hist_v,
        energy,
    })
}
