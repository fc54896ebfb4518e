//! Metrics over steady-state field maps: dB maps, inside/outside isolation
//! of a channel, and path-loss curves along its centerline.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChannelScenario;
use crate::solver::{probe_line, FieldMap, FieldUnit};

/// Level assigned to cells with zero envelope.
pub const DB_FLOOR: f64 = -120.0;

/// Fraction of `d` excluded at each end of the measurement regions.
pub const END_INSET_FRACTION: f64 = 0.1;

/// Channel entrance on the centerline, where levels are referenced.
pub const REFERENCE_POINT: (f64, f64) = (0.0, 0.0);

fn amplitude_db(value: f64, reference: f64) -> f64 {
    if value > 0.0 {
        (20.0 * (value / reference).log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Map of `20·log10(envelope / envelope(reference_point))`.
pub fn to_db(map: &FieldMap, reference_point: (f64, f64)) -> Result<FieldMap> {
    let reference = map.sample(reference_point.0, reference_point.1)?;
    to_db_with_reference(map, reference)
}

pub fn to_db_with_reference(map: &FieldMap, reference: f64) -> Result<FieldMap> {
    if map.unit != FieldUnit::Linear {
        return Err(Error::domain("map is already in dB"));
    }
    if !(reference > 0.0) {
        return Err(Error::domain(format!(
            "reference envelope must be positive, got {reference}"
        )));
    }
    let mut out = map.clone();
    out.unit = FieldUnit::Db;
    for v in &mut out.envelope {
        *v = amplitude_db(*v, reference);
    }
    Ok(out)
}

/// Axis-aligned rectangle in the scenario frame, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationRegions {
    pub inside: Rect,
    pub outside: [Rect; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    /// Mean power over the channel interior, dB re the entrance reference.
    pub inside_mean_db: f64,
    /// Mean power over both exterior strips, dB re the entrance reference.
    pub outside_mean_db: f64,
    pub isolation_db: f64,
    pub regions: IsolationRegions,
}

impl IsolationReport {
    /// Flat `key = value` block.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let r = &self.regions;
        writeln!(
            s,
            "# levels in dB re envelope at the channel entrance on the centerline"
        )
        .unwrap();
        writeln!(s, "inside_mean_db = {:?}", self.inside_mean_db).unwrap();
        writeln!(s, "outside_mean_db = {:?}", self.outside_mean_db).unwrap();
        writeln!(s, "isolation_db = {:?}", self.isolation_db).unwrap();
        for (name, rect) in [
            ("inside", &r.inside),
            ("outside_lower", &r.outside[0]),
            ("outside_upper", &r.outside[1]),
        ] {
            writeln!(
                s,
                "{name}_m = {:?},{:?},{:?},{:?}",
                rect.x_min, rect.x_max, rect.y_min, rect.y_max
            )
            .unwrap();
        }
        s
    }
}

/// Interior region inset by one pitch from the walls and by a tenth of `d`
/// from each end; exterior strips of the same length starting one pitch
/// beyond the outer wall faces, as wide as the interior region where the
/// grid allows (both strips always equal).
pub fn isolation_regions(map: &FieldMap, scenario: &ChannelScenario) -> Result<IsolationRegions> {
    let p = scenario.pitch();
    let x_min = END_INSET_FRACTION * scenario.d;
    let x_max = (1.0 - END_INSET_FRACTION) * scenario.d;
    let half_in = scenario.inner_face() - p;
    if !(half_in > 0.0) || !(x_max > x_min) {
        return Err(Error::geometry(
            "channel interior region is degenerate (l_c must exceed two pitches)",
        ));
    }
    let start = scenario.outer_face() + p;
    let interior_top = map.y0 + (map.ny - map.pml_thickness) as f64 * map.dx - map.dx / 2.0;
    let interior_bottom = map.y0 + map.pml_thickness as f64 * map.dx + map.dx / 2.0;
    let room = interior_top.min(-interior_bottom) - start;
    let width = (2.0 * half_in).min(room);
    if !(width > 0.0) {
        return Err(Error::geometry(
            "no room for exterior regions between the walls and the absorber",
        ));
    }
    Ok(IsolationRegions {
        inside: Rect {
            x_min,
            x_max,
            y_min: -half_in,
            y_max: half_in,
        },
        outside: [
            Rect {
                x_min,
                x_max,
                y_min: -start - width,
                y_max: -start,
            },
            Rect {
                x_min,
                x_max,
                y_min: start,
                y_max: start + width,
            },
        ],
    })
}

/// Sum of envelope² and cell count over cell centers inside the rectangles.
fn power_sum(map: &FieldMap, rects: &[Rect]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for j in 0..map.ny {
        let (_, y) = map.cell_center(0, j);
        if !rects.iter().any(|r| y >= r.y_min && y <= r.y_max) {
            continue;
        }
        for i in 0..map.nx {
            let (x, y) = map.cell_center(i, j);
            if rects.iter().any(|r| r.contains(x, y)) {
                sum += map.get(i, j).powi(2);
                n += 1;
            }
        }
    }
    (sum, n)
}

fn power_db(mean_power: f64, reference: f64) -> f64 {
    if mean_power > 0.0 {
        10.0 * (mean_power / (reference * reference)).log10()
    } else {
        DB_FLOOR
    }
}

/// Mean power inside the channel against mean power outside it.
pub fn isolation(map: &FieldMap, scenario: &ChannelScenario) -> Result<IsolationReport> {
    if map.unit != FieldUnit::Linear {
        return Err(Error::domain("isolation needs a linear envelope map"));
    }
    let regions = isolation_regions(map, scenario)?;
    let reference = map.sample(REFERENCE_POINT.0, REFERENCE_POINT.1)?;
    if !(reference > 0.0) {
        return Err(Error::domain("envelope at the channel entrance is zero"));
    }
    let (inside_sum, inside_n) = power_sum(map, &[regions.inside]);
    let (outside_sum, outside_n) = power_sum(map, &regions.outside);
    if inside_n == 0 || outside_n == 0 {
        return Err(Error::geometry("measurement region covers no grid cell"));
    }
    let inside_mean_db = power_db(inside_sum / inside_n as f64, reference);
    let outside_mean_db = power_db(outside_sum / outside_n as f64, reference);
    Ok(IsolationReport {
        inside_mean_db,
        outside_mean_db,
        isolation_db: inside_mean_db - outside_mean_db,
        regions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossCurve {
    /// `(distance from entrance in m, level in dB re entrance)`.
    pub samples: Vec<(f64, f64)>,
    pub smoothing_window: f64,
}

impl PathLossCurve {
    /// Linear interpolation; `None` outside the sampled range.
    pub fn level_at(&self, distance: f64) -> Option<f64> {
        let s = &self.samples;
        let tol = 1e-9;
        if s.is_empty() || distance < s[0].0 - tol || distance > s[s.len() - 1].0 + tol {
            return None;
        }
        let k = s.partition_point(|&(x, _)| x < distance);
        if k == 0 {
            return Some(s[0].1);
        }
        if k == s.len() {
            return Some(s[s.len() - 1].1);
        }
        let (x0, y0) = s[k - 1];
        let (x1, y1) = s[k];
        Some(y0 + (y1 - y0) * (distance - x0) / (x1 - x0))
    }

    pub fn mean_level(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum::<f64>() / self.samples.len() as f64
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "# level_db re envelope at the channel entrance; smoothing window {:?} m",
            self.smoothing_window
        )?;
        writeln!(w, "distance_m,level_db")?;
        for (x, l) in &self.samples {
            writeln!(w, "{x:?},{l:?}")?;
        }
        Ok(())
    }
}

/// One background wavelength at the operating frequency.
pub fn default_smoothing_window(scenario: &ChannelScenario) -> Result<f64> {
    scenario.background_wavelength()
}

/// Centered moving average over samples within `window / 2` of each
/// position; the window is truncated at the ends.
pub fn moving_average(samples: &[(f64, f64)], window: f64) -> Vec<(f64, f64)> {
    if window <= 0.0 {
        return samples.to_vec();
    }
    let half = window / 2.0 + 1e-12;
    let mut prefix = Vec::with_capacity(samples.len() + 1);
    prefix.push(0.0);
    for (_, v) in samples {
        prefix.push(prefix.last().unwrap() + v);
    }
    samples
        .iter()
        .map(|&(x, _)| {
            let lo = samples.partition_point(|s| s.0 < x - half);
            let hi = samples.partition_point(|s| s.0 <= x + half);
            (x, (prefix[hi] - prefix[lo]) / (hi - lo) as f64)
        })
        .collect()
}

/// Centerline level from the entrance to `d`, normalized to the entrance
/// sample, then smoothed over `smoothing_window` (0 keeps the raw curve).
pub fn path_loss_curve(
    map: &FieldMap,
    scenario: &ChannelScenario,
    smoothing_window: f64,
) -> Result<PathLossCurve> {
    if !(smoothing_window >= 0.0) {
        return Err(Error::domain("smoothing window must be non-negative"));
    }
    if map.unit != FieldUnit::Linear {
        return Err(Error::domain("path loss needs a linear envelope map"));
    }
    let n = (scenario.d / map.dx).round() as usize + 1;
    let raw = probe_line(
        map,
        REFERENCE_POINT,
        (REFERENCE_POINT.0 + scenario.d, REFERENCE_POINT.1),
        n,
    )
    .map_err(|_| Error::geometry("channel centerline leaves the field map interior"))?;
    let reference = raw[0].1;
    if !(reference > 0.0) {
        return Err(Error::domain("envelope at the channel entrance is zero"));
    }
    let levels: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(x, a)| (x, amplitude_db(a, reference)))
        .collect();
    Ok(PathLossCurve {
        samples: moving_average(&levels, smoothing_window),
        smoothing_window,
    })
}

/// Guided level minus baseline level at `at_distance`.
pub fn gain_vs_baseline(
    guided: &PathLossCurve,
    baseline: &PathLossCurve,
    at_distance: f64,
) -> Result<f64> {
    let g = guided.level_at(at_distance);
    let b = baseline.level_at(at_distance);
    match (g, b) {
        (Some(g), Some(b)) => Ok(g - b),
        _ => Err(Error::domain(format!(
            "distance {at_distance} m lies outside a curve's range; extrapolation refused"
        ))),
    }
}
