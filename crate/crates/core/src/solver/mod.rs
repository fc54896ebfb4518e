//! 2D FDTD in TM polarization: `Ez` out of plane, `Hx`/`Hy` in plane.
//!
//! Yee staggering on a uniform square grid. `Ez[i, j]` sits at the cell
//! center, `Hx[i, j]` on the edge above it (`y + dx/2`) and `Hy[i, j]` on the
//! edge to its right (`x + dx/2`). The outermost ring of `Ez` is held at zero
//! behind a convolutional PML. Every update is elementwise over rows, so the
//! result does not depend on how rows are distributed over threads.

mod field_map;
pub mod pml;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

pub use field_map::{probe_line, FieldMap, FieldMeta, FieldUnit};

use crate::error::{Error, Result};
use crate::geometry::{MaterialGrid, SourceSpec};
use crate::medium::{C0, EPS0, MU0};
use pml::{strip_indices, AxisProfile};

/// Storage precision of the field and auxiliary arrays.
pub type Real = f32;

/// Fields above this multiple of the source amplitude are treated as divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
const GUARD_INTERVAL: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Courant number S in (0, 1].
    pub courant: f64,
    /// End-to-end transits of the domain simulated before measuring.
    pub settle_traversals: f64,
    /// Carrier cycles in the peak-hold window.
    pub measure_cycles: f64,
    pub pml_thickness: usize,
    pub pml_target_reflection: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            courant: 0.95,
            settle_traversals: 2.0,
            measure_cycles: 10.0,
            pml_thickness: 20,
            pml_target_reflection: 1e-5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return Err(Error::domain(format!(
                "courant must lie in (0, 1], got {}",
                self.courant
            )));
        }
        if !(self.settle_traversals >= 1.0) {
            return Err(Error::domain("settle_traversals must be at least 1"));
        }
        if !(self.measure_cycles >= 4.0) {
            return Err(Error::domain("measure_cycles must be at least 4"));
        }
        if !(self.pml_target_reflection > 0.0 && self.pml_target_reflection < 1.0) {
            return Err(Error::domain("pml_target_reflection must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Time step for `grid`: `S·dx/(c·√2)` with `c` the fastest phase velocity
/// on the grid, capped at `dt_request` when one is given.
pub fn time_step(grid: &MaterialGrid, courant: f64, dt_request: Option<f64>) -> f64 {
    let c_max = C0 / grid.min_eps().sqrt();
    let dt = courant * grid.dx / (c_max * 2f64.sqrt());
    match dt_request {
        Some(req) if req > 0.0 && req < dt => req,
        _ => dt,
    }
}

/// Per-cell weights of a line aperture along `y` at the column holding the
/// aperture center. Uniform with a one-cell raised-cosine taper at each end.
pub fn aperture_cells(grid: &MaterialGrid, source: &SourceSpec) -> Result<Vec<(usize, f64)>> {
    let (sx, sy) = source.position;
    let (i, _) = grid
        .locate(sx, sy)
        .ok_or_else(|| Error::geometry("source lies outside the grid"))?;
    let half = source.aperture_width / 2.0;
    let dx = grid.dx;
    let mut cells = Vec::new();
    for j in 0..grid.ny {
        if grid.in_pml(i, j) {
            continue;
        }
        let (_, y) = grid.cell_center(i, j);
        let off = (y - sy).abs();
        let w = if off <= half - dx / 2.0 {
            1.0
        } else if off >= half + dx / 2.0 {
            0.0
        } else {
            0.5 * (1.0 + (PI * (off - (half - dx / 2.0)) / dx).cos())
        };
        if w > 0.0 {
            cells.push((grid.index(i, j), w));
        }
    }
    if cells.is_empty() {
        return Err(Error::geometry("source aperture covers no grid cell"));
    }
    Ok(cells)
}

/// Raised-cosine turn-on over `ramp` seconds.
fn ramp(t: f64, ramp: f64) -> f64 {
    if t >= ramp {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        0.5 * (1.0 - (PI * t / ramp).cos())
    }
}

/// Leapfrog state over one material grid.
pub struct Solver<'g> {
    grid: &'g MaterialGrid,
    dt: f64,
    step: u64,
    ez: Vec<Real>,
    hx: Vec<Real>,
    hy: Vec<Real>,
    /// Semi-implicit E update: `Ez = ca·Ez + cb·curl H`.
    ca: Vec<Real>,
    cb: Vec<Real>,
    ch: Real,
    px: AxisProfile,
    py: AxisProfile,
    /// ∂Hy/∂x memory at Ez, `ny` rows of the 2p strip columns.
    psi_ez_x: Vec<Real>,
    /// ∂Hx/∂y memory at Ez, 2p strip rows of `nx` columns.
    psi_ez_y: Vec<Real>,
    /// ∂Ez/∂x memory at Hy.
    psi_hy_x: Vec<Real>,
    /// ∂Ez/∂y memory at Hx.
    psi_hx_y: Vec<Real>,
    strip_cols: Vec<usize>,
    strip_rows: Vec<usize>,
}

impl<'g> Solver<'g> {
    pub fn new(grid: &'g MaterialGrid, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        grid.validate()?;
        let dt = time_step(grid, config.courant, None);
        let n = grid.nx * grid.ny;
        let mut ca = Vec::with_capacity(n);
        let mut cb = Vec::with_capacity(n);
        for k in 0..n {
            // Conduction current averaged across the half step.
            let eps = EPS0 * grid.eps_rel[k];
            let loss = grid.sigma[k] * dt / (2.0 * eps);
            ca.push(((1.0 - loss) / (1.0 + loss)) as Real);
            cb.push((dt / eps / (1.0 + loss) / grid.dx) as Real);
        }
        let p = grid.pml_thickness;
        let profile = |len| {
            AxisProfile::new(
                len,
                p,
                grid.dx,
                dt,
                grid.eps_background,
                config.pml_target_reflection,
            )
        };
        let strip_cols: Vec<usize> = strip_indices(grid.nx, p).collect();
        let strip_rows: Vec<usize> = strip_indices(grid.ny, p).collect();
        Ok(Solver {
            grid,
            dt,
            step: 0,
            ez: vec![0.0; n],
            hx: vec![0.0; n],
            hy: vec![0.0; n],
            ca,
            cb,
            ch: (dt / (MU0 * grid.dx)) as Real,
            px: profile(grid.nx),
            py: profile(grid.ny),
            psi_ez_x: vec![0.0; grid.ny * strip_cols.len()],
            psi_ez_y: vec![0.0; strip_rows.len() * grid.nx],
            psi_hy_x: vec![0.0; grid.ny * strip_cols.len()],
            psi_hx_y: vec![0.0; strip_rows.len() * grid.nx],
            strip_cols,
            strip_rows,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Time at which the current `Ez` is defined.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn grid(&self) -> &MaterialGrid {
        self.grid
    }

    pub fn ez(&self) -> &[Real] {
        &self.ez
    }

    /// `Hx` at the latest half step.
    pub fn hx(&self) -> &[Real] {
        &self.hx
    }

    pub fn hy(&self) -> &[Real] {
        &self.hy
    }

    /// Soft excitation: adds `value` to `Ez` at flat index `k`.
    pub fn add_ez(&mut self, k: usize, value: f64) {
        self.ez[k] += value as Real;
    }

    /// Electromagnetic energy per unit length, summed over the grid interior
    /// (J/m, up to the constant cell area).
    pub fn energy(&self) -> f64 {
        let g = self.grid;
        let p = g.pml_thickness;
        (p..g.ny - p)
            .map(|j| {
                (p..g.nx - p)
                    .map(|i| {
                        let k = g.index(i, j);
                        let (e, hx, hy) = (self.ez[k] as f64, self.hx[k] as f64, self.hy[k] as f64);
                        EPS0 * g.eps_rel[k] * e * e + MU0 * (hx * hx + hy * hy)
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            * 0.5
    }

    /// Sum of `Ez²` over the grid interior.
    pub fn electric_sum(&self) -> f64 {
        let g = self.grid;
        let p = g.pml_thickness;
        (p..g.ny - p)
            .map(|j| {
                (p..g.nx - p)
                    .map(|i| (self.ez[g.index(i, j)] as f64).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Advances H by half a step and E by the following half step.
    pub fn step(&mut self) {
        self.update_h();
        self.update_e();
        self.step += 1;
    }

    fn update_h(&mut self) {
        let nx = self.grid.nx;
        let ny = self.grid.ny;
        let ch = self.ch;
        let ez = &self.ez;

        self.hx
            .par_chunks_mut(nx)
            .zip(self.hy.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(j, (hx_row, hy_row))| {
                let row = &ez[j * nx..(j + 1) * nx];
                if j + 1 < ny {
                    let above = &ez[(j + 1) * nx..(j + 2) * nx];
                    for ((h, a), e) in hx_row.iter_mut().zip(above).zip(row) {
                        *h -= ch * (a - e);
                    }
                }
                for (h, e) in hy_row[..nx - 1].iter_mut().zip(row.windows(2)) {
                    *h += ch * (e[1] - e[0]);
                }
            });

        if self.grid.pml_thickness == 0 {
            return;
        }

        // x-directed absorber memory, every row.
        let px = &self.px;
        let cols = &self.strip_cols;
        self.hy
            .par_chunks_mut(nx)
            .zip(self.psi_hy_x.par_chunks_mut(cols.len()))
            .enumerate()
            .for_each(|(j, (hy_row, psi_row))| {
                let row = &ez[j * nx..(j + 1) * nx];
                for (psi, &i) in psi_row.iter_mut().zip(cols) {
                    if i + 1 < nx {
                        *psi = px.b_h[i] * *psi + px.c_h[i] * (row[i + 1] - row[i]);
                        hy_row[i] += ch * *psi;
                    }
                }
            });

        // y-directed absorber memory, strip rows only.
        let py = &self.py;
        let rows = &self.strip_rows;
        let p = rows.len() / 2;
        let (head, rest) = self.hx.split_at_mut(p * nx);
        let tail = &mut rest[(ny - 2 * p) * nx..];
        let (psi_head, psi_tail) = self.psi_hx_y.split_at_mut(p * nx);
        for (strip, psi, first) in [(head, psi_head, 0), (tail, psi_tail, ny - p)] {
            strip
                .par_chunks_mut(nx)
                .zip(psi.par_chunks_mut(nx))
                .enumerate()
                .for_each(|(r, (hx_row, psi_row))| {
                    let j = first + r;
                    if j + 1 >= ny {
                        return;
                    }
                    let row = &ez[j * nx..(j + 1) * nx];
                    let above = &ez[(j + 1) * nx..(j + 2) * nx];
                    let (b, c) = (py.b_h[j], py.c_h[j]);
                    for i in 0..nx {
                        psi_row[i] = b * psi_row[i] + c * (above[i] - row[i]);
                        hx_row[i] -= ch * psi_row[i];
                    }
                });
        }
    }

    fn update_e(&mut self) {
        let nx = self.grid.nx;
        let ny = self.grid.ny;
        let hx = &self.hx;
        let hy = &self.hy;
        let ca = &self.ca;
        let cb = &self.cb;

        self.ez
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(j, ez_row)| {
                if j == 0 || j + 1 == ny {
                    return;
                }
                let hy_row = &hy[j * nx..(j + 1) * nx];
                let hx_row = &hx[j * nx..(j + 1) * nx];
                let hx_below = &hx[(j - 1) * nx..j * nx];
                let row = j * nx + 1..(j + 1) * nx - 1;
                let cells = ez_row[1..nx - 1]
                    .iter_mut()
                    .zip(hy_row.windows(2))
                    .zip(&hx_row[1..nx - 1])
                    .zip(&hx_below[1..nx - 1])
                    .zip(ca[row.clone()].iter().zip(&cb[row]));
                for ((((e, hy), hx), hx_b), (a, b)) in cells {
                    let curl = (hy[1] - hy[0]) - (hx - hx_b);
                    *e = a * *e + b * curl;
                }
            });

        if self.grid.pml_thickness == 0 {
            return;
        }

        let px = &self.px;
        let cols = &self.strip_cols;
        self.ez
            .par_chunks_mut(nx)
            .zip(self.psi_ez_x.par_chunks_mut(cols.len()))
            .enumerate()
            .for_each(|(j, (ez_row, psi_row))| {
                if j == 0 || j + 1 == ny {
                    return;
                }
                let hy_row = &hy[j * nx..(j + 1) * nx];
                let cb_row = &cb[j * nx..(j + 1) * nx];
                for (psi, &i) in psi_row.iter_mut().zip(cols) {
                    if i == 0 || i + 1 == nx {
                        continue;
                    }
                    *psi = px.b_e[i] * *psi + px.c_e[i] * (hy_row[i] - hy_row[i - 1]);
                    ez_row[i] += cb_row[i] * *psi;
                }
            });

        let py = &self.py;
        let p = self.strip_rows.len() / 2;
        let (head, rest) = self.ez.split_at_mut(p * nx);
        let tail = &mut rest[(ny - 2 * p) * nx..];
        let (psi_head, psi_tail) = self.psi_ez_y.split_at_mut(p * nx);
        for (strip, psi, first) in [(head, psi_head, 0), (tail, psi_tail, ny - p)] {
            strip
                .par_chunks_mut(nx)
                .zip(psi.par_chunks_mut(nx))
                .enumerate()
                .for_each(|(r, (ez_row, psi_row))| {
                    let j = first + r;
                    if j == 0 || j + 1 == ny {
                        return;
                    }
                    let hx_row = &hx[j * nx..(j + 1) * nx];
                    let hx_below = &hx[(j - 1) * nx..j * nx];
                    let cb_row = &cb[j * nx..(j + 1) * nx];
                    let (b, c) = (py.b_e[j], py.c_e[j]);
                    for i in 1..nx - 1 {
                        psi_row[i] = b * psi_row[i] + c * (hx_row[i] - hx_below[i]);
                        ez_row[i] -= cb_row[i] * psi_row[i];
                    }
                });
        }
    }

    /// Largest `|Ez|`, or an error if any value is not finite.
    pub fn check_fields(&self, limit: f64) -> Result<f64> {
        if self.ez.par_iter().any(|v| !v.is_finite()) {
            return Err(Error::Instability {
                step: self.step,
                message: "non-finite field value".into(),
            });
        }
        let peak = self
            .ez
            .par_iter()
            .map(|v| v.abs() as f64)
            .reduce(|| 0.0, f64::max);
        if peak > limit {
            return Err(Error::Instability {
                step: self.step,
                message: format!(
                    "|Ez| reached {peak:e}, above the divergence limit {limit:e}; \
                     reduce the Courant number"
                ),
            });
        }
        Ok(peak)
    }
}

/// Drives `grid` with a CW line aperture at `f` until steady state and
/// returns the peak-hold envelope of `Ez` over the final carrier cycles.
pub fn run(
    grid: &MaterialGrid,
    source: &SourceSpec,
    f: f64,
    config: &SolverConfig,
) -> Result<FieldMap> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::domain(format!(
            "frequency must be positive, got {f}"
        )));
    }
    source.validate()?;
    let mut solver = Solver::new(grid, config)?;
    let dt = solver.dt();
    let aperture = aperture_cells(grid, source)?;

    let omega = 2.0 * PI * f;
    let ramp_time = source.ramp_cycles / f;
    let extent = grid.nx.max(grid.ny) as f64 * grid.dx;
    let transit = grid.eps_background.sqrt() * extent / C0;
    let settle = (config.settle_traversals * transit).max(ramp_time);
    let measure_start = (settle / dt).ceil() as u64;
    let total = measure_start + (config.measure_cycles / f / dt).ceil() as u64;
    let limit = DIVERGENCE_FACTOR * source.amplitude.abs();

    let mut envelope: Vec<f64> = vec![0.0; grid.nx * grid.ny];
    while solver.steps_taken() < total {
        solver.step();
        let t = solver.time();
        let drive = source.amplitude * ramp(t, ramp_time) * (omega * t).sin();
        for &(k, w) in &aperture {
            solver.add_ez(k, w * drive);
        }
        if solver.steps_taken() % GUARD_INTERVAL == 0 {
            solver.check_fields(limit)?;
        }
        if solver.steps_taken() > measure_start {
            envelope
                .par_iter_mut()
                .zip(solver.ez().par_iter())
                .for_each(|(env, e)| *env = (*env).max(e.abs() as f64));
        }
    }
    solver.check_fields(limit)?;

    Ok(FieldMap {
        dx: grid.dx,
        nx: grid.nx,
        ny: grid.ny,
        x0: grid.x0,
        y0: grid.y0,
        pml_thickness: grid.pml_thickness,
        unit: FieldUnit::Linear,
        envelope,
        meta: FieldMeta {
            f,
            steps: total,
            dt,
            source: source.describe(),
            scenario_hash: String::new(),
        },
    })
}
