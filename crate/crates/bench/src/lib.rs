//! Shared fixtures for the benchmarks.

use lmsurf_core::config::{Preset, RunConfig};
use lmsurf_core::geometry::Domain;
use lmsurf_core::{channel_layout, rasterize, FieldMap, MaterialGrid};

/// Rasterized `fast` preset scenario.
pub fn fast_grid() -> (RunConfig, MaterialGrid) {
    let cfg = Preset::Fast.config();
    let pattern = channel_layout(&cfg.scenario).expect("preset layout");
    let grid =
        rasterize(&pattern, &cfg.scenario, cfg.dx, &cfg.raster_options()).expect("preset grid");
    (cfg, grid)
}

/// A field map on the `fast` preset's grid whose envelope decays away
/// from the centerline, standing in for a solver result.
pub fn synthetic_map(cfg: &RunConfig) -> FieldMap {
    let s = &cfg.scenario;
    let dom = Domain::for_scenario(s, cfg.dx, cfg.solver.pml_thickness).expect("preset domain");
    let mut map = FieldMap::filled(dom.nx, dom.ny, dom.dx, 0.0);
    map.x0 = dom.x0;
    map.y0 = dom.y0;
    map.pml_thickness = dom.pml_thickness;
    map.meta.f = s.f;
    for j in 0..dom.ny {
        for i in 0..dom.nx {
            let (x, y) = map.cell_center(i, j);
            let k = map.index(i, j);
            map.envelope[k] = (-(y / s.l_c).powi(2)).exp() * (-x.max(0.0) * 2.0).exp() + 1e-3;
        }
    }
    map
}
