use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8] = b"SWFMAP1\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    /// Envelope amplitude in arbitrary linear units.
    Linear,
    /// Level in dB relative to a reference envelope.
    Db,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMeta {
    pub f: f64,
    pub steps: u64,
    pub dt: f64,
    pub source: String,
    pub scenario_hash: String,
}

/// Steady-state `Ez` envelope over the simulation plane, row-major
/// (`[j * nx + i]`), cell `(i, j)` centered at `(x0 + (i + ½)dx, y0 + (j + ½)dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub pml_thickness: usize,
    pub unit: FieldUnit,
    pub envelope: Vec<f64>,
    pub meta: FieldMeta,
}

impl FieldMap {
    /// A map with every cell set to `value`, for tests and tooling.
    pub fn filled(nx: usize, ny: usize, dx: f64, value: f64) -> Self {
        FieldMap {
            dx,
            nx,
            ny,
            x0: 0.0,
            y0: 0.0,
            pml_thickness: 0,
            unit: FieldUnit::Linear,
            envelope: vec![value; nx * ny],
            meta: FieldMeta {
                f: 0.0,
                steps: 0,
                dt: 0.0,
                source: String::new(),
                scenario_hash: String::new(),
            },
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.envelope[j * self.nx + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dx,
        )
    }

    /// Fractional cell-center coordinates of a physical point.
    fn fractional(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / self.dx - 0.5, (y - self.y0) / self.dx - 0.5)
    }

    /// Whether bilinear sampling at the point stays clear of the absorber.
    pub fn in_interior(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.fractional(x, y);
        let p = self.pml_thickness as f64;
        let tol = 1e-9;
        u >= p - tol
            && v >= p - tol
            && u <= (self.nx - 1) as f64 - p + tol
            && v <= (self.ny - 1) as f64 - p + tol
    }

    /// Bilinear interpolation between cell centers.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        if !self.in_interior(x, y) {
            return Err(Error::geometry(format!(
                "point ({x}, {y}) lies outside the interior of the field map"
            )));
        }
        let (u, v) = self.fractional(x, y);
        let clamp = |t: f64, n: usize| -> (usize, f64) {
            if n == 1 {
                return (0, 0.0);
            }
            let t = t.clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (i, tu) = clamp(u, self.nx);
        let (j, tv) = clamp(v, self.ny);
        let at = |di: usize, dj: usize| -> f64 {
            let ii = (i + di).min(self.nx - 1);
            let jj = (j + dj).min(self.ny - 1);
            self.get(ii, jj)
        };
        let lower = at(0, 0) * (1.0 - tu) + at(1, 0) * tu;
        let upper = at(0, 1) * (1.0 - tu) + at(1, 1) * tu;
        Ok(lower * (1.0 - tv) + upper * tv)
    }

    /// Writes the binary grid format.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        writeln!(w, "nx {}", self.nx)?;
        writeln!(w, "ny {}", self.ny)?;
        writeln!(w, "dx_m {:?}", self.dx)?;
        writeln!(w, "f_hz {:?}", self.meta.f)?;
        writeln!(w, "x0_m {:?}", self.x0)?;
        writeln!(w, "y0_m {:?}", self.y0)?;
        writeln!(w, "pml_cells {}", self.pml_thickness)?;
        writeln!(w, "steps {}", self.meta.steps)?;
        writeln!(w, "dt_s {:?}", self.meta.dt)?;
        if !self.meta.scenario_hash.is_empty() {
            writeln!(w, "scenario_hash {}", self.meta.scenario_hash)?;
        }
        if !self.meta.source.is_empty() {
            writeln!(w, "source {}", self.meta.source.replace('\n', " "))?;
        }
        if self.unit == FieldUnit::Db {
            writeln!(w, "unit db")?;
        }
        w.write_all(b"end\n")?;
        let mut buf = Vec::with_capacity(self.envelope.len() * 8);
        for v in &self.envelope {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    /// Reads the binary grid format.
    pub fn read_from(mut r: impl BufRead) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("file too short for the SWFMAP1 magic".into()))?;
        if magic != MAGIC {
            return Err(Error::Format("missing SWFMAP1 magic".into()));
        }
        let mut map = FieldMap::filled(0, 0, 0.0, 0.0);
        let (mut nx, mut ny, mut dx, mut f) = (None, None, None, None);
        let mut line = String::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Format("header ended without `end`".into()));
            }
            let text = line.trim_end_matches('\n');
            if text == "end" {
                break;
            }
            let (key, value) = text.split_once(' ').unwrap_or((text, ""));
            let num = |v: &str| -> Result<f64> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad value for `{key}`: `{v}`")))
            };
            let int = |v: &str| -> Result<u64> {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Format(format!("bad value for `{key}`: `{v}`")))
            };
            match key {
                "nx" => nx = Some(int(value)? as usize),
                "ny" => ny = Some(int(value)? as usize),
                "dx_m" => dx = Some(num(value)?),
                "f_hz" => f = Some(num(value)?),
                "x0_m" => map.x0 = num(value)?,
                "y0_m" => map.y0 = num(value)?,
                "pml_cells" => map.pml_thickness = int(value)? as usize,
                "steps" => map.meta.steps = int(value)?,
                "dt_s" => map.meta.dt = num(value)?,
                "scenario_hash" => map.meta.scenario_hash = value.to_string(),
                "source" => map.meta.source = value.to_string(),
                "unit" => {
                    map.unit = match value {
                        "db" => FieldUnit::Db,
                        "linear" => FieldUnit::Linear,
                        other => return Err(Error::Format(format!("unknown unit `{other}`"))),
                    }
                }
                _ => {}
            }
        }
        let missing = |k: &str| Error::Format(format!("header lacks `{k}`"));
        map.nx = nx.ok_or_else(|| missing("nx"))?;
        map.ny = ny.ok_or_else(|| missing("ny"))?;
        map.dx = dx.ok_or_else(|| missing("dx_m"))?;
        map.meta.f = f.ok_or_else(|| missing("f_hz"))?;

        let expected = map.nx * map.ny * 8;
        let mut data = Vec::with_capacity(expected);
        r.read_to_end(&mut data)?;
        if data.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} bytes of field data for {}x{} cells, found {}",
                map.nx,
                map.ny,
                data.len()
            )));
        }
        map.envelope = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(map)
    }

    /// `x_m,y_m,amplitude` per cell.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let label = match self.unit {
            FieldUnit::Linear => "amplitude",
            FieldUnit::Db => "level_db",
        };
        writeln!(w, "x_m,y_m,{label}")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.cell_center(i, j);
                writeln!(w, "{x:?},{y:?},{:?}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// `n_samples` equispaced bilinear samples of the map along a segment, as
/// `(distance from start, value)`.
pub fn probe_line(
    map: &FieldMap,
    start: (f64, f64),
    end: (f64, f64),
    n_samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if n_samples == 0 {
        return Err(Error::geometry("probe needs at least one sample"));
    }
    if !map.in_interior(start.0, start.1) || !map.in_interior(end.0, end.1) {
        return Err(Error::geometry(
            "probe line leaves the grid interior or enters the absorber",
        ));
    }
    let length = (end.0 - start.0).hypot(end.1 - start.1);
    (0..n_samples)
        .map(|k| {
            let t = if n_samples == 1 {
                0.0
            } else {
                k as f64 / (n_samples - 1) as f64
            };
            let x = start.0 + t * (end.0 - start.0);
            let y = start.1 + t * (end.1 - start.1);
            Ok((t * length, map.sample(x, y)?))
        })
        .collect()
}
