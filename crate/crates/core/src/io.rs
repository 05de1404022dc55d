//! Plain-text output: snapshot and series CSV files, `key=value` sidecar
//! metadata, and checkpoints from which a run can be resumed.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{BoxDomain, Grid, GridFunction, ProblemSpec, Variant};
use crate::kernel::Kernel;
use crate::trajectory::{Scheme, SeriesRow, Trajectory};

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{what}: cannot parse '{field}'")))
}

/// Writes `x,u` (1D) or `x,y,u` (2D) rows, one per grid point.
pub fn write_grid_csv<W: Write>(out: W, f: &GridFunction) -> Result<()> {
    let g = f.grid();
    let mut w = csv::Writer::from_writer(out);
    if g.dim() == 1 {
        w.write_record(["x", "u"]).map_err(csv_err)?;
    } else {
        w.write_record(["x", "y", "u"]).map_err(csv_err)?;
    }
    for (k, v) in f.values().iter().enumerate() {
        let pt = g.point(k);
        if g.dim() == 1 {
            w.write_record([pt[0].to_string(), v.to_string()]).map_err(csv_err)?;
        } else {
            w.write_record([pt[0].to_string(), pt[1].to_string(), v.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_grid_csv`] onto `grid`, checking
/// that the coordinates match point by point.
pub fn read_grid_csv<R: Read>(input: R, grid: Grid) -> Result<GridFunction> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let expected: &[&str] = if grid.dim() == 1 { &["x", "u"] } else { &["x", "y", "u"] };
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse(format!("snapshot header {:?}, expected {expected:?}", header)));
    }
    let tol = 1e-9 * grid.h();
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if k >= grid.len() {
            return Err(Error::GridMismatch(format!("snapshot has more than {} rows", grid.len())));
        }
        let pt = grid.point(k);
        for (axis, c) in pt.iter().enumerate().take(grid.dim()) {
            let x = parse_f64(&rec[axis], "coordinate")?;
            if (x - c).abs() > tol {
                return Err(Error::GridMismatch(format!("row {k}: coordinate {x} but grid has {c}")));
            }
        }
        values.push(parse_f64(&rec[grid.dim()], "value")?);
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("snapshot has {} rows, grid has {}", values.len(), grid.len())));
    }
    GridFunction::new(grid, values)
}

pub const SERIES_HEADER: [&str; 7] = ["t", "l1", "l2", "linf", "energy", "mass", "dt"];

pub fn write_series_csv<W: Write>(out: W, rows: &[SeriesRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.t, r.l1, r.l2, r.linf, r.energy, r.mass, r.dt].map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<SeriesRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
        return Err(Error::Parse(format!("series header {:?}", header)));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let v: Vec<f64> = rec.iter().map(|f| parse_f64(f, "series")).collect::<Result<_>>()?;
            if v.len() != 7 {
                return Err(Error::Parse(format!("series row has {} fields", v.len())));
            }
            Ok(SeriesRow { t: v[0], l1: v[1], l2: v[2], linf: v[3], energy: v[4], mass: v[5], dt: v[6] })
        })
        .collect()
}

/// Ordered `key=value` lines; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse(format!("metadata is missing '{key}'")))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.require(key)?, key)
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        let v = self.require(key)?;
        v.trim().parse().map_err(|_| Error::Parse(format!("{key}: cannot parse '{v}'")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are ignored;
    /// a line without `=` or a repeated key is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
            let k = k.trim();
            if m.entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key '{k}'", n + 1)));
            }
        }
        Ok(m)
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Everything needed to restart a run from a saved state.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub p: f64,
    pub kernel: Kernel,
    pub spec: ProblemSpec,
    pub scheme: Scheme,
    pub dt: f64,
    pub t: f64,
    pub step: usize,
    pub u: GridFunction,
}

impl Checkpoint {
    pub fn from_trajectory(traj: &Trajectory, dt: f64) -> Self {
        let step = traj.start_step + traj.accepted_steps();
        Self {
            p: traj.p,
            kernel: traj.kernel,
            spec: traj.spec,
            scheme: traj.scheme,
            dt,
            t: traj.series.last().map_or(traj.start_time, |r| r.t),
            step,
            u: traj.final_state.clone(),
        }
    }

    pub fn metadata(&self) -> Metadata {
        let g = self.u.grid();
        let mut m = Metadata::new();
        m.set("p", self.p);
        m.set("kernel.family", self.kernel.profile().family());
        m.set("kernel.radius", self.kernel.radius());
        if let Some(a) = self.kernel.profile().exponent() {
            m.set("kernel.exponent", a);
        }
        m.set("problem", self.spec.name());
        match self.spec.variant {
            Variant::Cauchy { padding_layers } => m.set("padding_layers", padding_layers),
            Variant::Dirichlet { domain } | Variant::Neumann { domain } => {
                m.set("domain.min", domain.lower);
                m.set("domain.max", domain.upper);
            }
        }
        m.set("grid.dimension", g.dim());
        m.set("grid.half_width", g.half_width());
        m.set("grid.h", g.h());
        m.set("scheme", self.scheme.name());
        m.set("dt", self.dt);
        m.set("t", self.t);
        m.set("step", self.step);
        m
    }

    pub fn from_metadata(m: &Metadata, snapshot: impl Read) -> Result<Self> {
        let dim = m.require_usize("grid.dimension")?;
        let grid = Grid::new(dim, m.require_f64("grid.half_width")?, m.require_f64("grid.h")?)?;
        let exponent = match m.get("kernel.exponent") {
            Some(v) => parse_f64(v, "kernel.exponent")?,
            None => 0.0,
        };
        let kernel = Kernel::from_family(m.require("kernel.family")?, m.require_f64("kernel.radius")?, exponent, dim)?;
        let spec = match m.require("problem")? {
            "cauchy" => ProblemSpec::cauchy(m.require_usize("padding_layers")?),
            name @ ("dirichlet" | "neumann") => {
                let d = BoxDomain::new(m.require_f64("domain.min")?, m.require_f64("domain.max")?)?;
                if name == "dirichlet" {
                    ProblemSpec::dirichlet(d)
                } else {
                    ProblemSpec::neumann(d)
                }
            }
            other => return Err(Error::Parse(format!("unknown problem '{other}'"))),
        };
        let scheme_name = m.require("scheme")?;
        let scheme =
            Scheme::parse(scheme_name).ok_or_else(|| Error::Parse(format!("unknown scheme '{scheme_name}'")))?;
        Ok(Self {
            p: m.require_f64("p")?,
            kernel,
            spec,
            scheme,
            dt: m.require_f64("dt")?,
            t: m.require_f64("t")?,
            step: m.require_usize("step")?,
            u: read_grid_csv(snapshot, grid)?,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.meta` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_grid_csv(fs::File::create(dir.join(format!("{stem}.csv")))?, &self.u)?;
        fs::write(dir.join(format!("{stem}.meta")), self.metadata().render())?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let meta = Metadata::parse(&fs::read_to_string(dir.join(format!("{stem}.meta")))?)?;
        Self::from_metadata(&meta, fs::File::open(dir.join(format!("{stem}.csv")))?)
    }
}

/// File stem of the `k`-th snapshot.
pub fn snapshot_stem(k: usize) -> String {
    format!("snapshot_{k:04}")
}

/// Writes every snapshot (with a sidecar holding its time), the series and
/// a final-state checkpoint into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, dt: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        let stem = snapshot_stem(k);
        write_grid_csv(fs::File::create(dir.join(format!("{stem}.csv")))?, &s.u)?;
        let mut m = Metadata::new();
        m.set("t", s.t);
        m.set("requested", s.requested);
        m.set("step", s.step);
        if let Some(a) = s.boundary_activity {
            m.set("boundary_activity", a);
        }
        fs::write(dir.join(format!("{stem}.meta")), m.render())?;
    }
    write_series_csv(fs::File::create(dir.join("series.csv"))?, &traj.series)?;
    Checkpoint::from_trajectory(traj, dt).save(dir, "final")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_csv_round_trip_1d_and_2d() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 1.0, 0.25).unwrap();
            let f = GridFunction::from_fn(g, |x| (x[0] * 3.1).sin() + x[1] / 7.0).unwrap();
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &f).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with(if dim == 1 { "x,u\n" } else { "x,y,u\n" }));
            assert_eq!(read_grid_csv(buf.as_slice(), g).unwrap(), f);
        }
    }

    #[test]
    fn grid_csv_rejects_other_grids() {
        let g = Grid::new(1, 1.0, 0.25).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &GridFunction::zeros(g)).unwrap();
        let other = Grid::new(1, 1.0, 0.125).unwrap();
        assert!(matches!(read_grid_csv(buf.as_slice(), other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn series_round_trip() {
        let rows = vec![
            SeriesRow { t: 0.0, dt: 0.0, l1: 1.0, l2: 0.1 + 0.2, linf: 3.0, energy: 1e-300, mass: -0.5 },
            SeriesRow { t: 0.1, dt: 0.1, l1: 0.9, l2: 1.0 / 3.0, linf: 2.0, energy: 0.0, mass: -0.5 },
        ];
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("t,l1,l2,linf,energy,mass,dt\n"));
        assert_eq!(read_series_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn metadata_parsing() {
        let m = Metadata::parse("# comment\np = 3\n\nkernel.family=step # trailing\n").unwrap();
        assert_eq!(m.get("p"), Some("3"));
        assert_eq!(m.get("kernel.family"), Some("step"));
        assert!(Metadata::parse("p=3\np=4\n").is_err());
        assert!(Metadata::parse("nonsense\n").is_err());
        assert_eq!(Metadata::parse(&m.render()).unwrap(), m);
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid::new(1, 2.0, 0.125).unwrap();
        let u = GridFunction::from_fn(g, |x| (x[0] / 3.0).exp()).unwrap();
        for spec in [
            ProblemSpec::cauchy(2),
            ProblemSpec::dirichlet(BoxDomain::new(-1.0, 1.5).unwrap()),
            ProblemSpec::neumann(BoxDomain::new(-1.0, 1.0).unwrap()),
        ] {
            let c = Checkpoint {
                p: 2.5,
                kernel: Kernel::bump(0.5, 4.0, 1).unwrap(),
                spec,
                scheme: Scheme::Proximal,
                dt: 0.1,
                t: 0.1 + 0.2,
                step: 3,
                u: u.clone(),
            };
            let dir = tempfile::tempdir().unwrap();
            c.save(dir.path(), "state").unwrap();
            let back = Checkpoint::load(dir.path(), "state").unwrap();
            assert_eq!(back.u, c.u);
            assert_eq!(back.spec, c.spec);
            assert_eq!(back.kernel, c.kernel);
            assert_eq!((back.p, back.t, back.dt, back.step), (c.p, c.t, c.dt, c.step));
        }
    }
}
