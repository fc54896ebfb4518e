//! Oracle experiments shared by the solver tests and the acceptance suite.
#![allow(dead_code)]

use lmsurf_core::geometry::{MaterialGrid, SourceSpec};
use lmsurf_core::medium::C0;
use lmsurf_core::solver::{self, probe_line, Solver, SolverConfig};

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Log-log slope of the CW envelope of a single-cell source in a uniform
/// lossless vacuum grid, fitted from 5 to 9 wavelengths along both axes.
pub fn spreading_exponent() -> f64 {
    let f = 30e9;
    let wavelength = C0 / f;
    let dx = wavelength / 20.0;
    let n = 420;
    let pml = 20;
    let grid = MaterialGrid::uniform(n, n, dx, 1.0, 0.0, pml).unwrap();
    let c = n / 2;
    let center = grid.cell_center(c, c);
    let src = SourceSpec {
        position: center,
        aperture_width: dx,
        amplitude: 1.0,
        ramp_cycles: 3.0,
    };
    let map = solver::run(&grid, &src, f, &SolverConfig::default()).unwrap();

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for dir in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
        let start = (
            center.0 + dir.0 * 5.0 * wavelength,
            center.1 + dir.1 * 5.0 * wavelength,
        );
        let end = (
            center.0 + dir.0 * 9.0 * wavelength,
            center.1 + dir.1 * 9.0 * wavelength,
        );
        for (d, amp) in probe_line(&map, start, end, 81).unwrap() {
            xs.push((5.0 * wavelength + d).ln());
            ys.push(amp.ln());
        }
    }
    fit_slope(&xs, &ys)
}

fn pulse_trace(n: usize, steps: usize) -> Vec<f64> {
    let dx = 0.25e-3;
    let grid = MaterialGrid::uniform(n, n, dx, 1.0, 0.0, 20).unwrap();
    let mut s = Solver::new(&grid, &SolverConfig::default()).unwrap();
    let k = grid.index(n / 2, n / 2);
    // Differentiated Gaussian centred on 30 GHz; zero mean, so no static charge.
    let tau = 1.0 / (2.0 * std::f64::consts::PI * 30e9) * 2f64.sqrt();
    let t0 = 4.0 * tau;
    (0..steps)
        .map(|_| {
            s.step();
            let t = (s.time() - t0) / tau;
            s.add_ez(k, -t * (-t * t).exp());
            s.ez()[k] as f64
        })
        .collect()
}

/// Peak echo returned to the launch point from the absorber, in dB relative
/// to the outgoing peak there. The echo is isolated by subtracting a run in
/// a grid large enough that nothing returns within the window.
pub fn pulse_echo_db(n_small: usize) -> f64 {
    let steps = 700;
    // Farthest travel in the window must stay inside the reference grid.
    let travel_cells = steps as f64 / 2f64.sqrt() * 0.95;
    let n_large = n_small.max(2 * (travel_cells as usize / 2 + 30) + 40);
    let small = pulse_trace(n_small, steps);
    let large = pulse_trace(n_large, steps);
    let peak = large.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let echo = small
        .iter()
        .zip(&large)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    20.0 * (echo / peak).log10()
}

pub fn pml_echo_db() -> f64 {
    pulse_echo_db(200)
}
