//! Cavity lattice, channel fill patterns and rasterization onto the solver grid.
//!
//! Coordinates are in the scenario frame: the channel entrance lies on `x = 0`,
//! the channel centerline on `y = 0`, and waves travel toward `+x`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::{self, SurfaceSpec, EPS0};

/// Free space between the source aperture and the absorber behind it.
pub const SOURCE_BACKOFF: f64 = 5.0e-3;
/// Free space between the channel exit and the absorber.
pub const EXIT_GAP: f64 = 5.0e-3;
/// Distance from the source aperture to the channel entrance.
pub const SOURCE_STANDOFF: f64 = 10.0e-3;
pub const DEFAULT_CELL_BUDGET: usize = 50_000_000;

const COMMENSURATE_TOL: f64 = 1e-6;

/// Which homogenized index the in-plane background takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundIndex {
    /// Relative permittivity of the perforated slab.
    #[default]
    EpsEff,
    /// Square of the TM surface-wave effective index.
    TmNeff,
}

impl BackgroundIndex {
    pub fn as_str(self) -> &'static str {
        match self {
            BackgroundIndex::EpsEff => "eps_eff",
            BackgroundIndex::TmNeff => "tm_neff",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eps_eff" => Some(BackgroundIndex::EpsEff),
            "tm_neff" => Some(BackgroundIndex::TmNeff),
            _ => None,
        }
    }
}

/// CW line aperture driving the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    /// Aperture center (x, y), m.
    pub position: (f64, f64),
    pub aperture_width: f64,
    pub amplitude: f64,
    /// Raised-cosine turn-on duration, in carrier cycles.
    pub ramp_cycles: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            position: (-SOURCE_STANDOFF, 0.0),
            aperture_width: 9.6e-3,
            amplitude: 1.0,
            ramp_cycles: 5.0,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.aperture_width > 0.0) {
            return Err(Error::geometry("aperture_width must be positive"));
        }
        if !(self.ramp_cycles >= 1.0) {
            return Err(Error::geometry("ramp_cycles must be at least 1"));
        }
        if !self.amplitude.is_finite()
            || !self.position.0.is_finite()
            || !self.position.1.is_finite()
        {
            return Err(Error::geometry(
                "source position and amplitude must be finite",
            ));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "line aperture x={} y={} width={} amplitude={} ramp_cycles={}",
            self.position.0, self.position.1, self.aperture_width, self.amplitude, self.ramp_cycles
        )
    }
}

/// A straight channel experiment on the punctured surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelScenario {
    pub surface: SurfaceSpec,
    /// Operating frequency, Hz.
    pub f: f64,
    /// Clear width between the inner wall faces, m.
    pub l_c: f64,
    /// Propagation distance covered by the walls, m.
    pub d: f64,
    /// Wall thickness in cavity rows; 0 is the unfilled baseline surface.
    pub n_layers: u32,
    /// Lateral lattice extent beyond the outer wall faces, m.
    pub margin: f64,
    pub source: SourceSpec,
    pub background_index: BackgroundIndex,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        ChannelScenario {
            surface: SurfaceSpec::default(),
            f: 30e9,
            l_c: 12e-3,
            d: 600e-3,
            n_layers: 3,
            margin: 20e-3,
            source: SourceSpec::default(),
            background_index: BackgroundIndex::EpsEff,
        }
    }
}

fn whole_multiple(value: f64, unit: f64) -> Option<usize> {
    let k = value / unit;
    let rounded = k.round();
    if rounded >= 1.0 && (k - rounded).abs() <= COMMENSURATE_TOL {
        Some(rounded as usize)
    } else {
        None
    }
}

impl ChannelScenario {
    pub fn pitch(&self) -> f64 {
        self.surface.w
    }

    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        self.source.validate()?;
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::geometry("frequency must be positive"));
        }
        if !(self.d > 0.0) {
            return Err(Error::geometry("channel distance d must be positive"));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::geometry("margin must be non-negative"));
        }
        self.clear_rows()?;
        Ok(())
    }

    /// Number of unfilled lattice rows between the two walls.
    pub fn clear_rows(&self) -> Result<usize> {
        whole_multiple(self.l_c, self.pitch()).ok_or_else(|| {
            Error::geometry(format!(
                "channel width l_c = {} m is not a whole multiple of the pitch {} m",
                self.l_c,
                self.pitch()
            ))
        })
    }

    /// Lattice columns spanning the channel length.
    pub fn length_sites(&self) -> usize {
        ((self.d / self.pitch()) - COMMENSURATE_TOL).ceil().max(1.0) as usize
    }

    pub fn margin_rows(&self) -> usize {
        ((self.margin / self.pitch()) - COMMENSURATE_TOL)
            .ceil()
            .max(0.0) as usize
    }

    /// |y| of the inner wall faces.
    pub fn inner_face(&self) -> f64 {
        self.l_c / 2.0
    }

    /// |y| of the outer wall faces (equals the inner face without walls).
    pub fn outer_face(&self) -> f64 {
        self.l_c / 2.0 + self.n_layers as f64 * self.pitch()
    }

    /// Medium properties at the operating frequency.
    pub fn medium(&self) -> Result<medium::MediumReport> {
        medium::surface_impedance(&self.surface, self.f)
    }

    /// Relative permittivity of the in-plane background medium.
    pub fn background_permittivity(&self) -> Result<f64> {
        let report = self.medium()?;
        Ok(match self.background_index {
            BackgroundIndex::EpsEff => report.eps_eff,
            BackgroundIndex::TmNeff => {
                let n = medium::tm_wave_parameters(&report).n_eff;
                n * n
            }
        })
    }

    /// Wavelength in the background medium.
    pub fn background_wavelength(&self) -> Result<f64> {
        Ok(medium::C0 / self.f / self.background_permittivity()?.sqrt())
    }
}

/// Which lattice sites hold liquid metal.
#[derive(Debug, Clone, PartialEq)]
pub struct FillPattern {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
    /// Center of site (0, 0), m.
    pub origin: (f64, f64),
    /// Row-major, `occupancy[j * nx + i]`.
    pub occupancy: Vec<bool>,
}

impl FillPattern {
    pub fn empty(nx: usize, ny: usize, pitch: f64, origin: (f64, f64)) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::geometry("pattern dimensions must be at least 1x1"));
        }
        if !(pitch > 0.0) {
            return Err(Error::geometry("pattern pitch must be positive"));
        }
        Ok(FillPattern {
            nx,
            ny,
            pitch,
            origin,
            occupancy: vec![false; nx * ny],
        })
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.occupancy[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, filled: bool) {
        self.occupancy[j * self.nx + i] = filled;
    }

    pub fn site_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + i as f64 * self.pitch,
            self.origin.1 + j as f64 * self.pitch,
        )
    }

    pub fn filled_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn filled_sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k % self.nx, k / self.nx))
    }
}

/// Two straight walls of `n_layers` filled rows running the full channel
/// length, with `l_c / pitch` clear rows between them.
pub fn channel_layout(scenario: &ChannelScenario) -> Result<FillPattern> {
    scenario.validate()?;
    let pitch = scenario.pitch();
    let clear = scenario.clear_rows()?;
    let layers = scenario.n_layers as usize;
    let margin = scenario.margin_rows();
    let nx = scenario.length_sites();
    let ny = 2 * margin + 2 * layers + clear;
    let origin = (pitch / 2.0, -((ny - 1) as f64) * pitch / 2.0);
    let mut pattern = FillPattern::empty(nx, ny, pitch, origin)?;

    let lower = margin..margin + layers;
    let upper = margin + layers + clear..margin + 2 * layers + clear;
    for j in lower.chain(upper) {
        for i in 0..nx {
            pattern.set(i, j, true);
        }
    }
    Ok(pattern)
}

/// Placement of the finite-difference grid in the scenario frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
    /// Lower-left grid corner, m.
    pub x0: f64,
    pub y0: f64,
    pub pml_thickness: usize,
}

impl Domain {
    /// Grid covering the source, the channel and its lateral margin, with
    /// `pml_thickness` absorber cells added on every side.
    pub fn for_scenario(scenario: &ChannelScenario, dx: f64, pml_thickness: usize) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::geometry("cell size must be positive"));
        }
        let src = &scenario.source;
        let x_lo = src.position.0.min(0.0) - SOURCE_BACKOFF;
        let x_hi = (scenario.d + EXIT_GAP).max(src.position.0 + SOURCE_BACKOFF);

        let rows =
            2 * scenario.margin_rows() + 2 * scenario.n_layers as usize + scenario.clear_rows()?;
        let half = (rows as f64 * scenario.pitch() / 2.0)
            .max(src.position.1.abs() + src.aperture_width / 2.0 + SOURCE_BACKOFF);

        let nx_in = ((x_hi - x_lo) / dx - COMMENSURATE_TOL).ceil() as usize;
        let ny_in = ((2.0 * half) / dx - COMMENSURATE_TOL).ceil() as usize;
        let pad = pml_thickness as f64 * dx;
        Ok(Domain {
            dx,
            nx: nx_in + 2 * pml_thickness,
            ny: ny_in + 2 * pml_thickness,
            x0: x_lo - pad,
            y0: -(ny_in as f64) * dx / 2.0 - pad,
            pml_thickness,
        })
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dx,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub pml_thickness: usize,
    pub cell_budget: usize,
}

impl Default for RasterOptions {
    fn default() -> Self {
        RasterOptions {
            pml_thickness: 20,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

/// Per-cell material map consumed by the solver. Row-major, `[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialGrid {
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub eps_rel: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Absorber width on each edge, cells.
    pub pml_thickness: usize,
    /// Relative permittivity the absorber is matched to.
    pub eps_background: f64,
}

impl MaterialGrid {
    /// Uniform grid with its corner at the origin.
    pub fn uniform(
        nx: usize,
        ny: usize,
        dx: f64,
        eps_rel: f64,
        sigma: f64,
        pml_thickness: usize,
    ) -> Result<Self> {
        let grid = MaterialGrid {
            dx,
            nx,
            ny,
            x0: 0.0,
            y0: 0.0,
            eps_rel: vec![eps_rel; nx * ny],
            sigma: vec![sigma; nx * ny],
            pml_thickness,
            eps_background: eps_rel,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::geometry("grid must be at least 3x3 cells"));
        }
        if !(self.dx > 0.0) {
            return Err(Error::geometry("cell size must be positive"));
        }
        if self.eps_rel.len() != self.nx * self.ny || self.sigma.len() != self.nx * self.ny {
            return Err(Error::geometry(
                "material arrays do not match grid dimensions",
            ));
        }
        if 2 * self.pml_thickness + 1 > self.nx.min(self.ny) {
            return Err(Error::geometry("absorber leaves no interior"));
        }
        if self.eps_rel.iter().any(|&e| !(e >= 1.0) || !e.is_finite()) {
            return Err(Error::geometry(
                "relative permittivity must be >= 1 everywhere",
            ));
        }
        if self.sigma.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::geometry("conductivity must be >= 0 everywhere"));
        }
        Ok(())
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dx,
        )
    }

    /// Cell containing the point, if any.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let u = ((x - self.x0) / self.dx).floor();
        let v = ((y - self.y0) / self.dx).floor();
        if u < 0.0 || v < 0.0 || u >= self.nx as f64 || v >= self.ny as f64 {
            None
        } else {
            Some((u as usize, v as usize))
        }
    }

    pub fn in_pml(&self, i: usize, j: usize) -> bool {
        let p = self.pml_thickness;
        i < p || j < p || i >= self.nx - p || j >= self.ny - p
    }

    pub fn max_eps(&self) -> f64 {
        self.eps_rel.iter().copied().fold(1.0, f64::max)
    }

    pub fn min_eps(&self) -> f64 {
        self.eps_rel.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cells carrying a conductivity above `threshold`.
    pub fn count_conductive(&self, threshold: f64) -> usize {
        self.sigma.iter().filter(|&&s| s > threshold).count()
    }
}

/// Stair-cased material map: background cells carry the homogenized slab
/// and its dielectric loss, cells whose centers lie inside a filled cavity
/// carry the liquid metal.
pub fn rasterize(
    pattern: &FillPattern,
    scenario: &ChannelScenario,
    dx: f64,
    options: &RasterOptions,
) -> Result<MaterialGrid> {
    scenario.validate()?;
    let r = scenario.surface.r;
    if !(dx > 0.0) || dx > r / 2.0 * (1.0 + 1e-9) {
        return Err(Error::geometry(format!(
            "cell size {dx} m is too coarse: cavities of radius {r} m need dx <= {} m",
            r / 2.0
        )));
    }
    let domain = Domain::for_scenario(scenario, dx, options.pml_thickness)?;
    if domain.cells() > options.cell_budget {
        return Err(Error::CellBudget {
            cells: domain.cells(),
            budget: options.cell_budget,
        });
    }

    let eps_bg = scenario.background_permittivity()?;
    let sigma_d = 2.0 * PI * scenario.f * EPS0 * eps_bg * scenario.surface.tan_delta;
    let n = domain.cells();
    let mut grid = MaterialGrid {
        dx,
        nx: domain.nx,
        ny: domain.ny,
        x0: domain.x0,
        y0: domain.y0,
        eps_rel: vec![eps_bg; n],
        sigma: vec![sigma_d; n],
        pml_thickness: domain.pml_thickness,
        eps_background: eps_bg,
    };

    let r2 = r * r;
    let reach = (r / dx).ceil() as isize + 1;
    for (si, sj) in pattern.filled_sites() {
        let (sx, sy) = pattern.site_center(si, sj);
        let ci = ((sx - grid.x0) / dx).floor() as isize;
        let cj = ((sy - grid.y0) / dx).floor() as isize;
        for j in (cj - reach)..=(cj + reach) {
            if j < 0 || j >= grid.ny as isize {
                continue;
            }
            for i in (ci - reach)..=(ci + reach) {
                if i < 0 || i >= grid.nx as isize {
                    continue;
                }
                let (x, y) = grid.cell_center(i as usize, j as usize);
                if (x - sx).powi(2) + (y - sy).powi(2) < r2 {
                    let k = grid.index(i as usize, j as usize);
                    grid.eps_rel[k] = 1.0;
                    grid.sigma[k] = scenario.surface.sigma_fill;
                }
            }
        }
    }
    grid.validate()?;
    Ok(grid)
}

/// Text form: `pattern <nx> <ny> <pitch_mm> <x0_mm> <y0_mm>`, then `ny` rows
/// of `nx` characters (`.` empty, `#` filled), top row (largest `j`) first.
pub fn serialize_pattern(pattern: &FillPattern) -> String {
    let mut out = String::with_capacity((pattern.nx + 1) * pattern.ny + 64);
    writeln!(
        out,
        "pattern {} {} {} {} {}",
        pattern.nx,
        pattern.ny,
        pattern.pitch * 1e3,
        pattern.origin.0 * 1e3,
        pattern.origin.1 * 1e3
    )
    .unwrap();
    for j in (0..pattern.ny).rev() {
        for i in 0..pattern.nx {
            out.push(if pattern.get(i, j) { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: None,
        line,
        column,
        message: message.into(),
    }
}

/// Inverse of [`serialize_pattern`]. The origin fields are optional and
/// default to zero.
pub fn parse_pattern(text: &str) -> Result<FillPattern> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"pattern") {
        return Err(parse_err(
            1,
            1,
            "expected header `pattern <nx> <ny> <pitch_mm>`",
        ));
    }
    if fields.len() != 4 && fields.len() != 6 {
        return Err(parse_err(
            1,
            1,
            format!("header has {} fields, expected 4 or 6", fields.len()),
        ));
    }
    let column_of = |k: usize| header.find(fields[k]).map_or(1, |c| c + 1);
    let nx: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(1, column_of(1), format!("bad nx `{}`", fields[1])))?;
    let ny: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(1, column_of(2), format!("bad ny `{}`", fields[2])))?;
    let mm = |k: usize| -> Result<f64> {
        fields[k]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| v / 1e3)
            .ok_or_else(|| parse_err(1, column_of(k), format!("bad number `{}`", fields[k])))
    };
    let pitch = mm(3)?;
    let origin = if fields.len() == 6 {
        (mm(4)?, mm(5)?)
    } else {
        (0.0, 0.0)
    };
    let mut pattern =
        FillPattern::empty(nx, ny, pitch, origin).map_err(|e| parse_err(1, 1, e.to_string()))?;

    let mut row = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if row == ny {
            return Err(parse_err(
                lineno,
                1,
                format!("more than the declared {ny} rows"),
            ));
        }
        let count = line.chars().count();
        if count != nx {
            return Err(parse_err(
                lineno,
                count.min(nx) + 1,
                format!("row {} has {count} cells, expected {nx}", row + 1),
            ));
        }
        let j = ny - 1 - row;
        for (i, ch) in line.chars().enumerate() {
            match ch {
                '#' => pattern.set(i, j, true),
                '.' => {}
                other => {
                    return Err(parse_err(
                        lineno,
                        i + 1,
                        format!("unexpected character `{other}` in row {}", row + 1),
                    ))
                }
            }
        }
        row += 1;
    }
    if row != ny {
        return Err(parse_err(
            text.lines().count().max(1),
            1,
            format!("found {row} rows, expected {ny}"),
        ));
    }
    Ok(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(l_c: f64, n_layers: u32, d: f64) -> ChannelScenario {
        ChannelScenario {
            l_c,
            n_layers,
            d,
            margin: 12e-3,
            ..ChannelScenario::default()
        }
    }

    /// Independent count: a site is filled iff its center lies within the
    /// wall bands |y| in (l_c/2, l_c/2 + n p).
    fn count_by_coordinates(p: &FillPattern, s: &ChannelScenario) -> (usize, usize) {
        let (mut lower, mut upper) = (0, 0);
        for j in 0..p.ny {
            for i in 0..p.nx {
                let (_, y) = p.site_center(i, j);
                let in_band = y.abs() > s.inner_face() && y.abs() < s.outer_face();
                assert_eq!(p.get(i, j), in_band, "site ({i}, {j}) at y = {y}");
                if in_band {
                    if y < 0.0 {
                        lower += 1
                    } else {
                        upper += 1
                    }
                }
            }
        }
        (lower, upper)
    }

    #[test]
    fn three_layer_walls_for_twelve_mm_channel() {
        let s = scenario(12e-3, 3, 600e-3);
        let p = channel_layout(&s).unwrap();
        assert_eq!(p.nx, 300);
        assert_eq!(count_by_coordinates(&p, &s), (900, 900));
        // six clear rows between the inner faces
        let clear = (0..p.ny)
            .filter(|&j| p.site_center(0, j).1.abs() < s.inner_face())
            .count();
        assert_eq!(clear, 6);
    }

    #[test]
    fn one_layer_short_channel() {
        let s = scenario(16e-3, 1, 20e-3);
        let p = channel_layout(&s).unwrap();
        assert_eq!(count_by_coordinates(&p, &s), (10, 10));
    }

    #[test]
    fn baseline_has_no_filled_sites() {
        let p = channel_layout(&scenario(12e-3, 0, 600e-3)).unwrap();
        assert_eq!(p.filled_count(), 0);
    }

    #[test]
    fn rejects_incommensurate_width() {
        let err = channel_layout(&scenario(13e-3, 2, 100e-3)).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)), "{err}");
    }

    #[test]
    fn layout_is_mirror_symmetric() {
        for (l_c, n) in [(12e-3, 1), (14e-3, 2), (20e-3, 3), (16e-3, 0)] {
            let p = channel_layout(&scenario(l_c, n, 40e-3)).unwrap();
            for j in 0..p.ny {
                for i in 0..p.nx {
                    assert_eq!(p.get(i, j), p.get(i, p.ny - 1 - j));
                }
            }
        }
    }

    #[test]
    fn uniform_raster_without_fill() {
        let s = scenario(12e-3, 0, 20e-3);
        let p = channel_layout(&s).unwrap();
        let g = rasterize(&p, &s, 0.125e-3, &RasterOptions::default()).unwrap();
        let eps = s.medium().unwrap().eps_eff;
        assert!(g.eps_rel.iter().all(|&e| e == eps));
        assert_eq!(g.count_conductive(1.0), 0);
    }

    fn disk_pixels(center: (f64, f64), r: f64, grid: &MaterialGrid) -> usize {
        let mut n = 0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                if (x - center.0).hypot(y - center.1) < r {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn single_cavity_pixel_count() {
        let s = scenario(12e-3, 0, 20e-3);
        let mut p = channel_layout(&s).unwrap();
        let (i, j) = (4, p.ny / 2);
        p.set(i, j, true);
        let g = rasterize(&p, &s, 0.125e-3, &RasterOptions::default()).unwrap();
        let n = g.count_conductive(1.0);
        assert!((44..=52).contains(&n), "{n} cells");
        assert_eq!(n, disk_pixels(p.site_center(i, j), s.surface.r, &g));
    }

    #[test]
    fn three_layer_pixel_count() {
        let s = scenario(12e-3, 3, 40e-3);
        let p = channel_layout(&s).unwrap();
        let g = rasterize(&p, &s, 0.125e-3, &RasterOptions::default()).unwrap();
        let n = g.count_conductive(1.0) as f64;
        let per = n / p.filled_count() as f64;
        assert!((per - 50.0).abs() <= 4.0, "{per} cells per cavity");
        let disk = PI * s.surface.r.powi(2) / 0.125e-3f64.powi(2);
        assert!((per - disk).abs() <= 0.1 * disk);
    }

    #[test]
    fn refinement_changes_area_little() {
        let s = scenario(12e-3, 1, 20e-3);
        let p = channel_layout(&s).unwrap();
        let area = |dx: f64| {
            let g = rasterize(&p, &s, dx, &RasterOptions::default()).unwrap();
            g.count_conductive(1.0) as f64 * dx * dx / p.filled_count() as f64
        };
        let exact = PI * s.surface.r.powi(2);
        let (a1, a2) = (area(0.125e-3), area(0.0625e-3));
        assert!((a1 - a2).abs() / exact < 0.05, "{a1} vs {a2}");
    }

    #[test]
    fn metal_cells_carry_fill_conductivity() {
        let s = scenario(12e-3, 1, 20e-3);
        let p = channel_layout(&s).unwrap();
        let g = rasterize(&p, &s, 0.125e-3, &RasterOptions::default()).unwrap();
        for k in 0..g.eps_rel.len() {
            if g.sigma[k] > 1.0 {
                assert_eq!(g.sigma[k], s.surface.sigma_fill);
                assert_eq!(g.eps_rel[k], 1.0);
            } else {
                let eps = g.eps_background;
                let sd = 2.0 * PI * s.f * EPS0 * eps * s.surface.tan_delta;
                assert_eq!(g.sigma[k], sd);
            }
        }
        // nothing conductive inside the absorber
        for j in 0..g.ny {
            for i in 0..g.nx {
                if g.in_pml(i, j) {
                    assert!(g.sigma[g.index(i, j)] < 1.0);
                }
            }
        }
    }

    #[test]
    fn rasterize_guards() {
        let s = scenario(12e-3, 1, 20e-3);
        let p = channel_layout(&s).unwrap();
        assert!(matches!(
            rasterize(&p, &s, 0.3e-3, &RasterOptions::default()),
            Err(Error::Geometry(_))
        ));
        let tight = RasterOptions {
            cell_budget: 1000,
            ..RasterOptions::default()
        };
        assert!(matches!(
            rasterize(&p, &s, 0.125e-3, &tight),
            Err(Error::CellBudget { .. })
        ));
    }

    #[test]
    fn domain_covers_channel_and_absorber() {
        let s = scenario(12e-3, 3, 600e-3);
        let dom = Domain::for_scenario(&s, 0.125e-3, 20).unwrap();
        let needed = s.d + SOURCE_STANDOFF + 2.0 * 20.0 * dom.dx;
        assert!(dom.nx as f64 * dom.dx >= needed);
    }

    #[test]
    fn smallest_pattern_text() {
        let mut p = FillPattern::empty(2, 2, 2e-3, (0.0, 0.0)).unwrap();
        p.set(1, 0, true);
        let text = serialize_pattern(&p);
        assert_eq!(text, "pattern 2 2 2 0 0\n..\n.#\n");
        assert_eq!(text.matches('#').count(), 1);
        assert_eq!(parse_pattern(&text).unwrap(), p);
        // the short header form is accepted too
        assert_eq!(parse_pattern("pattern 2 2 2\n..\n.#\n").unwrap(), p);
    }

    #[test]
    fn channel_pattern_round_trips() {
        let p = channel_layout(&scenario(12e-3, 3, 600e-3)).unwrap();
        assert_eq!(parse_pattern(&serialize_pattern(&p)).unwrap(), p);
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let err = parse_pattern("pattern 3 2 2\n...\n..\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("row 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors() {
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("grid 2 2 2\n..\n..\n").is_err());
        assert!(parse_pattern("pattern 2 3 2\n..\n..\n").is_err());
        assert!(parse_pattern("pattern 2 1 2\n..\n..\n").is_err());
        let err = parse_pattern("pattern 2 1 2\n.x\n").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                line: 2,
                column: 2,
                ..
            }
        ));
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        fn pattern() -> impl Strategy<Value = FillPattern> {
            (
                1usize..=64,
                1usize..=64,
                1u32..=400,
                -500i32..500,
                -500i32..500,
            )
                .prop_flat_map(|(nx, ny, pitch_tenths, ox, oy)| {
                    proptest::collection::vec(any::<bool>(), nx * ny).prop_map(move |occ| {
                        FillPattern {
                            nx,
                            ny,
                            pitch: pitch_tenths as f64 / 10.0 / 1e3,
                            origin: (ox as f64 / 1e3, oy as f64 / 1e3),
                            occupancy: occ,
                        }
                    })
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn text_round_trip(p in pattern()) {
                let back = parse_pattern(&serialize_pattern(&p)).unwrap();
                prop_assert_eq!(back, p);
            }
        }
    }
}
