//! Poisson point processes on bounded windows.
//!
//! Two kinds of state space are supported: spatial windows (boxes and
//! centered balls in dimension `d ≤ 3`, base measure Lebesgue) and the set of
//! lines of the plane that hit a centered disk. Lines are parameterized as
//! `(φ, p)` with `φ ∈ [0, π)` and `p ∈ [−r, r]`, the line being
//! `{x : x₁ cos φ + x₂ sin φ = p}`; the base measure is `dφ dp`, so the angle
//! factor carries total mass `π` and `θ([W]) = 2πr`.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, StreamRng};
use crate::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A point of the state space: spatial coordinates (unused axes are zero) or
/// line parameters `(φ, p, 0)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; MAX_DIM]);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point(c)
    }

    pub fn line(phi: f64, p: f64) -> Self {
        Point([phi, p, 0.0])
    }

    pub fn phi(&self) -> f64 {
        self.0[0]
    }

    pub fn offset(&self) -> f64 {
        self.0[1]
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialWindow {
    /// Axis-aligned box `Π [lower_i, upper_i]`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Ball of the given radius centered at the origin.
    Ball { dim: usize, radius: f64 },
}

impl SpatialWindow {
    pub fn cuboid(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let w = SpatialWindow::Box {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::cuboid(&vec![0.0; dim], &vec![1.0; dim])
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::cuboid(&[a], &[b])
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        let w = SpatialWindow::Ball { dim, radius };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidWindow(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        match self {
            SpatialWindow::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::InvalidWindow(
                        "lower and upper corners differ in dimension".into(),
                    ));
                }
                for (a, b) in lower.iter().zip(upper) {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::InvalidWindow(format!(
                            "degenerate or non-finite side [{a}, {b}]"
                        )));
                    }
                }
            }
            SpatialWindow::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidWindow(format!("ball radius {radius}")));
                }
            }
        }
        let m = self.measure();
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidWindow(format!("window measure {m}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SpatialWindow::Box { lower, .. } => lower.len(),
            SpatialWindow::Ball { dim, .. } => *dim,
        }
    }

    /// Lebesgue measure of the window.
    pub fn measure(&self) -> f64 {
        match self {
            SpatialWindow::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(a, b)| b - a).product()
            }
            SpatialWindow::Ball { dim, radius } => ball_volume(*dim, *radius),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            SpatialWindow::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(p.0.iter())
                .all(|((a, b), x)| *a <= *x && *x <= *b),
            SpatialWindow::Ball { radius, .. } => p.dist2(&Point::default()) <= radius * radius,
        }
    }

    /// Bounding box `(lower, upper)`; unused axes are `[0, 0]`.
    pub fn bounding_box(&self) -> ([f64; MAX_DIM], [f64; MAX_DIM]) {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        match self {
            SpatialWindow::Box { lower, upper } => {
                lo[..lower.len()].copy_from_slice(lower);
                hi[..upper.len()].copy_from_slice(upper);
            }
            SpatialWindow::Ball { dim, radius } => {
                for a in 0..*dim {
                    lo[a] = -radius;
                    hi[a] = *radius;
                }
            }
        }
        (lo, hi)
    }

    /// A uniform point of the window (balls by rejection from the bounding box).
    pub fn sample_uniform(&self, rng: &mut StreamRng) -> Point {
        let (lo, hi) = self.bounding_box();
        let dim = self.dim();
        loop {
            let mut c = [0.0; MAX_DIM];
            for a in 0..dim {
                c[a] = rng.gen_range(lo[a]..=hi[a]);
            }
            let p = Point(c);
            if self.contains(&p) {
                return p;
            }
        }
    }
}

/// Volume of the `d`-dimensional ball of radius `r`, `d ≤ 3`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        _ => f64::NAN,
    }
}

/// Lines of the plane hitting the centered disk of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineWindow {
    pub radius: f64,
}

impl LineWindow {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidWindow(format!("line disk radius {radius}")));
        }
        Ok(LineWindow { radius })
    }

    /// `θ([W]) = π · 2r`.
    pub fn measure(&self) -> f64 {
        std::f64::consts::PI * 2.0 * self.radius
    }

    pub fn contains(&self, line: &Point) -> bool {
        (0.0..std::f64::consts::PI).contains(&line.phi()) && line.offset().abs() <= self.radius
    }

    pub fn sample_uniform(&self, rng: &mut StreamRng) -> Point {
        let phi = rng.gen_range(0.0..std::f64::consts::PI);
        let p = rng.gen_range(-self.radius..=self.radius);
        Point::line(phi, p)
    }
}

/// Reference state space carrying the base measure `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Spatial(SpatialWindow),
    Lines(LineWindow),
}

impl Window {
    pub fn measure(&self) -> f64 {
        match self {
            Window::Spatial(w) => w.measure(),
            Window::Lines(w) => w.measure(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Window::Spatial(w) => w.contains(p),
            Window::Lines(w) => w.contains(p),
        }
    }

    pub fn sample_uniform(&self, rng: &mut StreamRng) -> Point {
        match self {
            Window::Spatial(w) => w.sample_uniform(rng),
            Window::Lines(w) => w.sample_uniform(rng),
        }
    }

    /// Number of coordinates stored per point.
    pub fn coords(&self) -> usize {
        match self {
            Window::Spatial(w) => w.dim(),
            Window::Lines(_) => 2,
        }
    }

    pub fn as_spatial(&self) -> Option<&SpatialWindow> {
        match self {
            Window::Spatial(w) => Some(w),
            Window::Lines(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Window::Spatial(w) => w.validate(),
            Window::Lines(w) => LineWindow::new(w.radius).map(|_| ()),
        }
    }
}

/// The closed form `θ(W)` of a window.
pub fn window_measure(window: &Window) -> f64 {
    window.measure()
}

/// `μ = λθ` on a reference window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityModel {
    lambda: f64,
    window: Window,
}

impl IntensityModel {
    pub fn new(lambda: f64, window: Window) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidIntensity(format!("lambda = {lambda}")));
        }
        window.validate()?;
        Ok(IntensityModel { lambda, window })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(lambda: f64, window: Window) -> Self {
        IntensityModel { lambda, window }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `μ(W) = λθ(W)`.
    pub fn total_mass(&self) -> f64 {
        self.lambda * self.window.measure()
    }

    /// Same window, different rate.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        IntensityModel::new(lambda, self.window.clone())
    }

    /// Rejects `λ < 1`, the standing assumption of the rate theorems.
    pub fn require_rate_regime(&self) -> Result<()> {
        if self.lambda < 1.0 {
            return Err(Error::InvalidIntensity(format!(
                "rate bounds need lambda >= 1, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    Spatial { dim: usize },
    Lines,
}

/// A finite realization of the process.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    pub points: Vec<Point>,
    pub kind: ConfigKind,
    pub seed: u64,
}

impl PointConfiguration {
    pub fn new(points: Vec<Point>, kind: ConfigKind) -> Self {
        PointConfiguration {
            points,
            kind,
            seed: 0,
        }
    }

    pub fn spatial(points: Vec<Point>, dim: usize) -> Self {
        Self::new(points, ConfigKind::Spatial { dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coords(&self) -> usize {
        match self.kind {
            ConfigKind::Spatial { dim } => dim,
            ConfigKind::Lines => 2,
        }
    }

    /// `η + δ_y`.
    pub fn with_point(&self, y: Point) -> Self {
        let mut next = self.clone();
        next.points.push(y);
        next
    }

    /// `η − δ_x` for the point at `index`.
    pub fn without(&self, index: usize) -> Self {
        let mut next = self.clone();
        next.points.remove(index);
        next
    }

    /// Number of points in a spatial box `Π [lower_i, upper_i]`.
    pub fn count_in(&self, lower: &[f64], upper: &[f64]) -> usize {
        self.points
            .iter()
            .filter(|p| {
                lower
                    .iter()
                    .zip(upper)
                    .zip(p.0.iter())
                    .all(|((a, b), x)| *a <= *x && *x <= *b)
            })
            .count()
    }

    fn header(&self) -> Vec<String> {
        match self.kind {
            ConfigKind::Spatial { dim } => (1..=dim).map(|i| format!("x{i}")).collect(),
            ConfigKind::Lines => vec!["phi".into(), "p".into()],
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let n = self.coords();
        for p in &self.points {
            w.write_record(p.0[..n].iter().map(|x| fmt_f64(*x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> std::result::Result<Self, String> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let kind = if header == ["phi", "p"] {
            ConfigKind::Lines
        } else {
            let dim = header.len();
            let expected: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
            if dim == 0 || dim > MAX_DIM || header != expected {
                return Err(format!("unrecognized header {header:?}"));
            }
            ConfigKind::Spatial { dim }
        };
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let coords: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
                .collect::<std::result::Result<_, _>>()?;
            points.push(Point::new(&coords));
        }
        Ok(PointConfiguration::new(points, kind))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file).map_err(|e| Error::parse(path, e))
    }
}

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn poisson_count(mean: f64, rng: &mut StreamRng) -> Result<usize> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::InvalidWindow(format!(
            "expected point count {mean} is not a finite non-negative number"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidIntensity(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

fn sample_with(
    intensity: &IntensityModel,
    seed: u64,
    kind: ConfigKind,
    draw: impl Fn(&mut StreamRng) -> Point,
) -> Result<PointConfiguration> {
    let mut rng = rng_from_seed(seed);
    let n = poisson_count(intensity.total_mass(), &mut rng)?;
    let points = (0..n).map(|_| draw(&mut rng)).collect();
    Ok(PointConfiguration { points, kind, seed })
}

/// Poisson process with intensity `λ·Lebesgue` on a spatial window.
pub fn sample_points(intensity: &IntensityModel, seed: u64) -> Result<PointConfiguration> {
    let Window::Spatial(w) = intensity.window() else {
        return Err(Error::InvalidWindow(
            "sample_points needs a spatial window".into(),
        ));
    };
    w.validate()?;
    sample_with(
        intensity,
        seed,
        ConfigKind::Spatial { dim: w.dim() },
        |rng| w.sample_uniform(rng),
    )
}

/// Isotropic Poisson line process restricted to lines hitting the disk.
pub fn sample_lines(intensity: &IntensityModel, seed: u64) -> Result<PointConfiguration> {
    let Window::Lines(w) = intensity.window() else {
        return Err(Error::InvalidWindow(
            "sample_lines needs a line window".into(),
        ));
    };
    let w = LineWindow::new(w.radius)?;
    sample_with(intensity, seed, ConfigKind::Lines, |rng| {
        w.sample_uniform(rng)
    })
}

/// Dispatches on the window kind.
pub fn sample(intensity: &IntensityModel, seed: u64) -> Result<PointConfiguration> {
    match intensity.window() {
        Window::Spatial(_) => sample_points(intensity, seed),
        Window::Lines(_) => sample_lines(intensity, seed),
    }
}
