//! End-to-end runs: layout, rasterization, FDTD, metrics.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, IsolationReport, PathLossCurve};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{self, Domain, FillPattern, RasterOptions};
use crate::medium::MediumReport;
use crate::solver::{self, FieldMap};

/// Metrics derived from one field map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub isolation: IsolationReport,
    pub path_loss: PathLossCurve,
    /// Smoothed centerline level at the channel end, dB re entrance.
    pub level_at_d_db: f64,
}

pub struct Simulation {
    pub config: RunConfig,
    pub medium: MediumReport,
    pub pattern: FillPattern,
    pub field_map: FieldMap,
    pub metrics: Metrics,
}

impl RunConfig {
    pub fn raster_options(&self) -> RasterOptions {
        RasterOptions {
            pml_thickness: self.solver.pml_thickness,
            cell_budget: self.cell_budget,
        }
    }

    /// The same scenario with no cavities filled.
    pub fn baseline(&self) -> RunConfig {
        let mut cfg = *self;
        cfg.scenario.n_layers = 0;
        cfg
    }
}

pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    let scenario = &config.scenario;
    let medium = scenario.medium()?;
    let pattern = geometry::channel_layout(scenario)?;
    let grid = geometry::rasterize(&pattern, scenario, config.dx, &config.raster_options())?;
    let mut field_map = solver::run(&grid, &scenario.source, scenario.f, &config.solver)?;
    field_map.meta.scenario_hash = config.content_hash();
    let metrics = analyze(&field_map, config)?;
    Ok(Simulation {
        config: *config,
        medium,
        pattern,
        field_map,
        metrics,
    })
}

/// Checks that `map` was produced on the grid `config` describes.
pub fn check_dimensions(map: &FieldMap, config: &RunConfig) -> Result<()> {
    let dom = Domain::for_scenario(&config.scenario, map.dx, map.pml_thickness)?;
    let tol = 1e-9 * map.dx;
    if dom.nx != map.nx
        || dom.ny != map.ny
        || (dom.x0 - map.x0).abs() > tol
        || (dom.y0 - map.y0).abs() > tol
    {
        return Err(Error::DimensionMismatch(format!(
            "field map is {}x{} cells from ({}, {}), the scenario needs {}x{} from ({}, {})",
            map.nx, map.ny, map.x0, map.y0, dom.nx, dom.ny, dom.x0, dom.y0
        )));
    }
    if (map.meta.f - config.scenario.f).abs() > 1e-9 * config.scenario.f {
        return Err(Error::DimensionMismatch(format!(
            "field map frequency {} Hz differs from the scenario's {} Hz",
            map.meta.f, config.scenario.f
        )));
    }
    Ok(())
}

/// Isolation and smoothed path loss for a map of `config`'s scenario.
pub fn analyze(map: &FieldMap, config: &RunConfig) -> Result<Metrics> {
    check_dimensions(map, config)?;
    let scenario = &config.scenario;
    let isolation = analysis::isolation(map, scenario)?;
    let window = analysis::default_smoothing_window(scenario)?;
    let path_loss = analysis::path_loss_curve(map, scenario, window)?;
    let level_at_d_db = path_loss
        .level_at(scenario.d)
        .ok_or_else(|| Error::geometry("path-loss curve does not reach d"))?;
    Ok(Metrics {
        isolation,
        path_loss,
        level_at_d_db,
    })
}

/// Guided minus baseline smoothed level at the channel end.
pub fn gain_at_d(guided: &Simulation, baseline: &Simulation) -> Result<f64> {
    analysis::gain_vs_baseline(
        &guided.metrics.path_loss,
        &baseline.metrics.path_loss,
        guided.config.scenario.d,
    )
}
