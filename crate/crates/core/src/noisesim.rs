//! Synthetic ground-truth paths and correlated GNSS error.
//!
//! Errors are stationary Gaussian processes indexed by curvilinear abscissa:
//! a covariance matrix is built from a kernel, factored by Cholesky, and
//! applied to i.i.d. standard normal draws.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvilinear_abscissa, resample, Point, Trajectory};

/// Relative diagonal jitter added before factorization.
pub const JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelKind {
    Dirac,
    Exponential,
    Gaussian,
    Triangular,
    Sinc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    /// Length parameter in meters; unused by `DIRAC`.
    pub scope: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, scope: f64) -> Result<Self> {
        if kind != KernelKind::Dirac && !(scope.is_finite() && scope > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel scope must be finite and positive, got {scope}"
            )));
        }
        Ok(Kernel { kind, scope })
    }

    pub fn dirac() -> Self {
        Kernel {
            kind: KernelKind::Dirac,
            scope: 0.0,
        }
    }

    fn correlation(&self, h: f64) -> f64 {
        let u = h / self.scope;
        match self.kind {
            KernelKind::Dirac => {
                if h == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Exponential => (-u).exp(),
            KernelKind::Gaussian => (-u * u).exp(),
            KernelKind::Triangular => (1.0 - u).max(0.0),
            KernelKind::Sinc => {
                if h == 0.0 {
                    1.0
                } else {
                    (PI * u).sin() / (PI * u)
                }
            }
        }
    }
}

/// Correlation at lag `h` meters.
pub fn kernel_eval(k: &Kernel, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "kernel lag must be non-negative, got {h}"
        )));
    }
    Ok(k.correlation(h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// Independent realizations on x and y.
    #[default]
    BothAxes,
    /// One realization along the local normal of the path.
    Orthogonal,
}

/// One additive error component, as written in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseLayer {
    pub amplitude_m: f64,
    pub kernel: KernelKind,
    #[serde(default)]
    pub scope_m: f64,
    #[serde(default)]
    pub direction: Direction,
}

impl NoiseLayer {
    pub fn new(amplitude_m: f64, kernel: KernelKind, scope_m: f64, direction: Direction) -> Self {
        NoiseLayer {
            amplitude_m,
            kernel,
            scope_m,
            direction,
        }
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::new(self.kernel, self.scope_m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_m.is_finite() && self.amplitude_m >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise amplitude must be finite and non-negative, got {}",
                self.amplitude_m
            )));
        }
        self.kernel().map(|_| ())
    }
}

/// The three-component stack used for realistic simulations: 0.5 m
/// Gaussian(100 m) datum error, 5 m Exponential(50 m) GNSS error and 1 m
/// white noise.
pub fn realistic_stack() -> Vec<NoiseLayer> {
    vec![
        NoiseLayer::new(0.5, KernelKind::Gaussian, 100.0, Direction::BothAxes),
        NoiseLayer::new(5.0, KernelKind::Exponential, 50.0, Direction::BothAxes),
        NoiseLayer::new(1.0, KernelKind::Dirac, 0.0, Direction::BothAxes),
    ]
}

/// The calibration-notebook stack: 5 m Exponential(1 m) plus 1 m Gaussian(0.5 m).
pub fn calibration_stack() -> Vec<NoiseLayer> {
    vec![
        NoiseLayer::new(5.0, KernelKind::Exponential, 1.0, Direction::BothAxes),
        NoiseLayer::new(1.0, KernelKind::Gaussian, 0.5, Direction::BothAxes),
    ]
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("covariance matrix must be square".into()));
        }
        Ok(CovarianceMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// `Sigma_ij = amplitude^2 * gamma(|s_j - s_i|)`, plus diagonal jitter.
pub fn build_covariance(layer: &NoiseLayer, abscissas: &[f64]) -> Result<CovarianceMatrix> {
    layer.validate()?;
    let a2 = layer.amplitude_m * layer.amplitude_m;
    let mut m = correlation_matrix(&layer.kernel()?, abscissas)?;
    for v in &mut m.data {
        *v *= a2;
    }
    Ok(m)
}

fn correlation_matrix(kernel: &Kernel, s: &[f64]) -> Result<CovarianceMatrix> {
    if let Some(k) = s.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "abscissas must be strictly increasing (index {k} to {})",
            k + 1
        )));
    }
    let n = s.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0 + JITTER;
        for j in i + 1..n {
            let v = kernel.correlation(s[j] - s[i]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(CovarianceMatrix { n, data })
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn zeros(n: usize) -> Self {
        CholeskyFactor {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut f = Self::zeros(n);
        for i in 0..n {
            f.data[i * n + i] = 1.0;
        }
        f
    }

    /// `A x` for the lower-triangular `A`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..i * n + i + 1]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `A A^T` as a covariance matrix.
    pub fn reconstruct(&self) -> CovarianceMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        CovarianceMatrix { n, data }
    }
}

pub fn cholesky_factor(sigma: &CovarianceMatrix) -> Result<CholeskyFactor> {
    let n = sigma.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = sigma.data[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::Factorization { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = sigma.data[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(CholeskyFactor { n, data: l })
}

/// `A x` with `x` i.i.d. standard normal drawn from `rng`.
pub fn sample_correlated<R: Rng + ?Sized>(a: &CholeskyFactor, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..a.n).map(|_| rng.sample(StandardNormal)).collect();
    a.mul_vec(&x)
}

/// Unit normals at each vertex, rotated +90 degrees from the local tangent.
fn vertex_normals(traj: &Trajectory) -> Vec<(f64, f64)> {
    let pts = traj.points();
    let unit = |a: &Point, b: &Point| {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let l = dx.hypot(dy);
        if l > 0.0 {
            (dx / l, dy / l)
        } else {
            (0.0, 0.0)
        }
    };
    let dirs: Vec<(f64, f64)> = pts.windows(2).map(|w| unit(&w[0], &w[1])).collect();
    (0..pts.len())
        .map(|k| {
            let t = if k == 0 {
                dirs[0]
            } else if k == pts.len() - 1 {
                dirs[k - 1]
            } else {
                let (a, b) = (dirs[k - 1], dirs[k]);
                let (sx, sy) = (a.0 + b.0, a.1 + b.1);
                let l = sx.hypot(sy);
                if l > 1e-12 {
                    (sx / l, sy / l)
                } else {
                    a
                }
            };
            (-t.1, t.0)
        })
        .collect()
}

/// Precomputed factors for repeatedly noising one base track with a stack
/// of layers. Layers add their displacement fields on the base geometry.
#[derive(Debug, Clone)]
pub struct TrackNoiser {
    base: Trajectory,
    normals: Vec<(f64, f64)>,
    layers: Vec<(NoiseLayer, Option<CholeskyFactor>)>,
}

impl TrackNoiser {
    pub fn new(base: &Trajectory, layers: &[NoiseLayer]) -> Result<Self> {
        let s = curvilinear_abscissa(base);
        let mut factored = Vec::with_capacity(layers.len());
        for layer in layers {
            layer.validate()?;
            let factor = if layer.amplitude_m == 0.0 {
                None
            } else {
                Some(cholesky_factor(&correlation_matrix(&layer.kernel()?, &s)?)?)
            };
            factored.push((*layer, factor));
        }
        Ok(TrackNoiser {
            base: base.clone(),
            normals: vertex_normals(base),
            layers: factored,
        })
    }

    /// Displacement `(dx, dy)` per vertex for one realization.
    pub fn displacement<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(f64, f64)> {
        let n = self.base.len();
        let mut disp = vec![(0.0, 0.0); n];
        for (layer, factor) in &self.layers {
            let Some(f) = factor else { continue };
            let a = layer.amplitude_m;
            match layer.direction {
                Direction::BothAxes => {
                    let ex = sample_correlated(f, rng);
                    let ey = sample_correlated(f, rng);
                    for k in 0..n {
                        disp[k].0 += a * ex[k];
                        disp[k].1 += a * ey[k];
                    }
                }
                Direction::Orthogonal => {
                    let e = sample_correlated(f, rng);
                    for k in 0..n {
                        let (nx, ny) = self.normals[k];
                        disp[k].0 += a * e[k] * nx;
                        disp[k].1 += a * e[k] * ny;
                    }
                }
            }
        }
        disp
    }

    pub fn apply<R: Rng + ?Sized>(&self, rng: &mut R) -> Trajectory {
        let disp = self.displacement(rng);
        let pts = self
            .base
            .points()
            .iter()
            .zip(disp)
            .map(|(p, (dx, dy))| p.translated(dx, dy))
            .collect();
        Trajectory::new(self.base.id.clone(), pts).expect("finite displacement keeps a valid trajectory")
    }
}

pub fn noise_track<R: Rng + ?Sized>(traj: &Trajectory, layer: &NoiseLayer, rng: &mut R) -> Result<Trajectory> {
    Ok(TrackNoiser::new(traj, std::slice::from_ref(layer))?.apply(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Shape {
    Straight,
    Moderate,
    Switchbacks,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Straight, Shape::Moderate, Shape::Switchbacks];

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Straight => "STRAIGHT",
            Shape::Moderate => "MODERATE",
            Shape::Switchbacks => "SWITCHBACKS",
        }
    }

    fn heading_sigma(&self) -> f64 {
        match self {
            Shape::Straight => 0.02,
            Shape::Moderate => 0.1,
            Shape::Switchbacks => 0.08,
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "STRAIGHT" => Ok(Shape::Straight),
            "MODERATE" => Ok(Shape::Moderate),
            "SWITCHBACKS" => Ok(Shape::Switchbacks),
            _ => Err(Error::InvalidInput(format!(
                "unknown shape '{s}' (expected STRAIGHT, MODERATE or SWITCHBACKS)"
            ))),
        }
    }
}

pub const BASE_STEP_M: f64 = 3.0;

/// Heading random walk with 3 m steps, rescaled to the target length and
/// resampled at uniform spacing. Switchbacks get an orthogonal sinc
/// perturbation before rescaling.
pub fn generate_base_track<R: Rng + ?Sized>(shape: Shape, length_target: f64, rng: &mut R) -> Result<Trajectory> {
    if !(length_target.is_finite() && length_target > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target length must be positive, got {length_target}"
        )));
    }
    let steps = ((length_target / BASE_STEP_M).round() as usize).max(2);
    let sigma = shape.heading_sigma();
    let mut heading: f64 = rng.random_range(0.0..2.0 * PI);
    let mut pts = Vec::with_capacity(steps + 1);
    let (mut x, mut y) = (0.0, 0.0);
    pts.push(Point::new(x, y));
    for _ in 0..steps {
        x += BASE_STEP_M * heading.cos();
        y += BASE_STEP_M * heading.sin();
        pts.push(Point::new(x, y));
        let dh: f64 = rng.sample(StandardNormal);
        heading += sigma * dh;
    }
    let mut track = Trajectory::new(shape.name().to_ascii_lowercase(), pts)?;
    if shape == Shape::Switchbacks {
        let hairpins = NoiseLayer::new(20.0, KernelKind::Sinc, 20.0, Direction::Orthogonal);
        track = noise_track(&track, &hairpins, rng)?;
    }
    let scaled = track.scaled(length_target / track.length());
    resample(&scaled, steps + 1)
}
