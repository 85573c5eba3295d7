//! Trajectory files: `x,y[,t]` CSV and a GPX subset (trk/trkseg/trkpt).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Trajectory};

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".into())
}

/// Parses CSV text with a header containing `x` and `y` (and optionally `t`).
/// Lines starting with `#` are comments.
pub fn parse_trajectory_csv(text: &str, path: &Path) -> Result<Trajectory> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(cx), Some(cy)) = (col("x"), col("y")) else {
        let line = rdr.position().line();
        return Err(parse_err(line, format!("header must contain x and y columns, got '{}'", headers.iter().collect::<Vec<_>>().join(","))));
    };
    let ct = col("t");

    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |k: usize, name: &str| -> Result<f64> {
            let raw = rec.get(k).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("invalid {name} value '{raw}'")))
        };
        let x = field(cx, "x")?;
        let y = field(cy, "y")?;
        let t = match ct {
            Some(k) if !rec.get(k).unwrap_or("").is_empty() => Some(field(k, "t")?),
            _ => None,
        };
        points.push(Point { x, y, t });
    }
    Trajectory::cleaned(stem(path), points).map_err(|e| parse_err(0, e.to_string()))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text, path)
}

pub fn trajectory_csv_string(traj: &Trajectory, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let timed = traj.has_timestamps();
    out.push_str(if timed { "x,y,t\n" } else { "x,y\n" });
    for p in traj.points() {
        match p.t {
            Some(t) if timed => {
                let _ = writeln!(out, "{},{},{}", p.x, p.y, t);
            }
            _ => {
                let _ = writeln!(out, "{},{}", p.x, p.y);
            }
        }
    }
    out
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, comments: &[String]) -> Result<()> {
    fs::write(path, trajectory_csv_string(traj, comments)).map_err(|e| Error::io(path, e))
}

/// Spherical transverse Mercator centered on a geographic origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub lat0_deg: f64,
    pub lon0_deg: f64,
}

const EARTH_RADIUS_M: f64 = 6_371_008.8;

impl LocalProjection {
    pub fn forward(&self, lat_deg: f64, lon_deg: f64) -> (f64, f64) {
        let phi = lat_deg.to_radians();
        let phi0 = self.lat0_deg.to_radians();
        let dl = (lon_deg - self.lon0_deg).to_radians();
        let b = phi.cos() * dl.sin();
        let x = EARTH_RADIUS_M * b.atanh();
        let y = EARTH_RADIUS_M * (phi.tan().atan2(dl.cos()) - phi0);
        (x, y)
    }

    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let d = y / EARTH_RADIUS_M + self.lat0_deg.to_radians();
        let xr = x / EARTH_RADIUS_M;
        let phi = (d.sin() / xr.cosh()).asin();
        let dl = xr.sinh().atan2(d.cos());
        (phi.to_degrees(), self.lon0_deg + dl.to_degrees())
    }
}

#[derive(Debug, Clone)]
pub struct GpxData {
    pub projection: LocalProjection,
    /// One per `trkseg`, in document order.
    pub trajectories: Vec<Trajectory>,
}

struct RawPoint {
    lat: f64,
    lon: f64,
    t: Option<f64>,
}

pub fn parse_gpx_str(text: &str, path: &Path) -> Result<GpxData> {
    let gpx_err = |element: String, message: String| Error::Gpx {
        path: path.to_path_buf(),
        element,
        message,
    };
    let doc = roxmltree::Document::parse(text)
        .map_err(|e| gpx_err("document".into(), format!("malformed XML: {e}")))?;
    let root = doc.root_element();
    if root.tag_name().name() != "gpx" {
        return Err(gpx_err(
            root.tag_name().name().into(),
            "root element must be <gpx>".into(),
        ));
    }
    let mut segments: Vec<(String, Vec<RawPoint>)> = Vec::new();
    for (ti, trk) in root.children().filter(|n| n.has_tag_name("trk")).enumerate() {
        for (si, seg) in trk.children().filter(|n| n.has_tag_name("trkseg")).enumerate() {
            let seg_path = format!("gpx/trk[{ti}]/trkseg[{si}]");
            let mut pts = Vec::new();
            for (pi, pt) in seg.children().filter(|n| n.has_tag_name("trkpt")).enumerate() {
                let el = format!("{seg_path}/trkpt[{pi}]");
                let attr = |name: &str, limit: f64| -> Result<f64> {
                    let raw = pt
                        .attribute(name)
                        .ok_or_else(|| gpx_err(el.clone(), format!("missing {name} attribute")))?;
                    let v: f64 = raw
                        .trim()
                        .parse()
                        .map_err(|_| gpx_err(el.clone(), format!("invalid {name} '{raw}'")))?;
                    if !v.is_finite() || v.abs() > limit {
                        return Err(gpx_err(el.clone(), format!("{name} {v} out of range")));
                    }
                    Ok(v)
                };
                let lat = attr("lat", 90.0)?;
                let lon = attr("lon", 180.0)?;
                let t = match pt.children().find(|n| n.has_tag_name("time")) {
                    None => None,
                    Some(node) => {
                        let raw = node.text().unwrap_or("").trim();
                        let when = chrono::DateTime::parse_from_rfc3339(raw).map_err(|e| {
                            gpx_err(format!("{el}/time"), format!("invalid time '{raw}': {e}"))
                        })?;
                        Some(when.timestamp() as f64 + when.timestamp_subsec_nanos() as f64 * 1e-9)
                    }
                };
                pts.push(RawPoint { lat, lon, t });
            }
            if pts.is_empty() {
                return Err(gpx_err(seg_path, "segment has no trkpt".into()));
            }
            segments.push((seg_path, pts));
        }
    }
    if segments.is_empty() {
        return Err(gpx_err("gpx".into(), "no trk/trkseg found".into()));
    }

    let all = segments.iter().flat_map(|(_, p)| p);
    let (mut lat_lo, mut lat_hi, mut lon_lo, mut lon_hi) = (90.0f64, -90.0f64, 180.0f64, -180.0f64);
    for p in all {
        lat_lo = lat_lo.min(p.lat);
        lat_hi = lat_hi.max(p.lat);
        lon_lo = lon_lo.min(p.lon);
        lon_hi = lon_hi.max(p.lon);
    }
    let projection = LocalProjection {
        lat0_deg: (lat_lo + lat_hi) / 2.0,
        lon0_deg: (lon_lo + lon_hi) / 2.0,
    };
    let base = stem(path);
    let mut trajectories = Vec::with_capacity(segments.len());
    for (k, (seg_path, raw)) in segments.into_iter().enumerate() {
        let points = raw
            .iter()
            .map(|r| {
                let (x, y) = projection.forward(r.lat, r.lon);
                Point { x, y, t: r.t }
            })
            .collect();
        let id = format!("{base}_{k}");
        trajectories.push(Trajectory::cleaned(id, points).map_err(|e| gpx_err(seg_path, e.to_string()))?);
    }
    Ok(GpxData {
        projection,
        trajectories,
    })
}

pub fn parse_gpx(path: &Path) -> Result<GpxData> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gpx_str(&text, path)
}

/// One `trk` with one `trkseg` per trajectory, unprojected with `projection`.
pub fn gpx_string(trajectories: &[Trajectory], projection: &LocalProjection) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<gpx version=\"1.1\" creator=\"miaa\" xmlns=\"http://www.topografix.com/GPX/1/1\">\n  <trk>\n",
    );
    for t in trajectories {
        out.push_str("    <trkseg>\n");
        for p in t.points() {
            let (lat, lon) = projection.inverse(p.x, p.y);
            let _ = write!(out, "      <trkpt lat=\"{lat:.10}\" lon=\"{lon:.10}\"");
            match p.t.and_then(|t| chrono::DateTime::from_timestamp_millis((t * 1000.0).round() as i64)) {
                Some(when) => {
                    let _ = writeln!(
                        out,
                        "><time>{}</time></trkpt>",
                        when.to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
                    );
                }
                None => out.push_str("/>\n"),
            }
        }
        out.push_str("    </trkseg>\n");
    }
    out.push_str("  </trk>\n</gpx>\n");
    out
}

/// Reads `.gpx` files (all segments) or CSV files (one trajectory).
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let is_gpx = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gpx"));
    if is_gpx {
        Ok(parse_gpx(path)?.trajectories)
    } else {
        Ok(vec![read_trajectory_csv(path)?])
    }
}
