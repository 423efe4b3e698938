//! 2D geometric-optics ray tracing over segment scenes.
//!
//! A [`Scene`] is a set of directed segments (mirrors, refracting interfaces,
//! absorbers), one source ray, and one target disc. [`trace`](trace::trace)
//! answers whether the ray ever reaches the target, under a bounce-count and
//! path-length [`Budget`] so every trace terminates.
//! [`trace_ball`](trace::trace_ball) runs the same engine with positional and
//! angular uncertainty radii and reports `UNKNOWN` whenever the uncertainty
//! makes the outcome ambiguous.

mod scene_io;
mod trace;

pub use scene_io::SceneTemplate;
pub use trace::{
    manufacturing_sensitivity, trace, trace_ball, BallRadii, FirstOrderGrowth,
    InteractionGeometry, RadiusGrowth, SensitivityReport, SensitivityRow,
};

use std::fmt;

use thiserror::Error;

/// Intersections must advance at least this far along the ray, so a ray never
/// re-hits the surface it just left.
pub const T_MIN: f64 = 1e-9;

/// Incidences with |d·n̂| below this are tangential: the geometric model is
/// singular there. Exact traces pass through; ball traces report UNKNOWN.
pub const GRAZING_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{0}` is referenced but has no value")]
    UnresolvedParam(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("no approximation values given")]
    NoValues,
}

/// Plain 2D vector / point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise perpendicular (the left normal of a direction).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    pub dir: Vec2,
}

impl Ray {
    /// Normalizes the direction; it must be non-zero and finite.
    pub fn new(origin: Vec2, dir: Vec2) -> Result<Self, OpticsError> {
        if !origin.is_finite() || !dir.is_finite() || dir.norm() == 0.0 {
            return Err(OpticsError::InvalidScene("ray needs a finite origin and a non-zero direction".into()));
        }
        Ok(Ray { origin, dir: dir.normalized() })
    }

    pub fn from_angle(origin: Vec2, angle: f64) -> Result<Self, OpticsError> {
        if !angle.is_finite() {
            return Err(OpticsError::InvalidScene("source angle must be finite".into()));
        }
        Ray::new(origin, Vec2::new(angle.cos(), angle.sin()))
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    Mirror,
    /// `eta` is the refractive index on the left of the directed segment
    /// divided by the index on the right.
    Refract { eta: f64 },
    Absorb,
}

/// A directed segment surface from `a` to `b`; the normal is on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub a: Vec2,
    pub b: Vec2,
}

impl Surface {
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Unit normal on the left of a→b.
    pub fn left_normal(&self) -> Vec2 {
        (self.b - self.a).normalized().perp()
    }
}

/// The point the ray is asked to reach, with hit tolerance `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub center: Vec2,
    pub radius: f64,
}

/// A validated, fully numeric optical configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub surfaces: Vec<Surface>,
    pub source: Ray,
    pub target: Target,
}

impl Scene {
    pub fn new(surfaces: Vec<Surface>, source: Ray, target: Target) -> Result<Self, OpticsError> {
        for (i, s) in surfaces.iter().enumerate() {
            if !s.a.is_finite() || !s.b.is_finite() {
                return Err(OpticsError::InvalidScene(format!("surface {i}: non-finite coordinates")));
            }
            if s.length() == 0.0 {
                return Err(OpticsError::InvalidScene(format!("surface {i}: degenerate segment")));
            }
            if let SurfaceKind::Refract { eta } = s.kind {
                if !eta.is_finite() || eta <= 0.0 {
                    return Err(OpticsError::InvalidScene(format!("surface {i}: eta must be positive, got {eta}")));
                }
            }
        }
        if !target.center.is_finite() || !target.radius.is_finite() || target.radius <= 0.0 {
            return Err(OpticsError::InvalidScene("target needs finite center and positive radius".into()));
        }
        Ok(Scene { surfaces, source, target })
    }

    /// Axis-aligned box around everything in the scene, padded by one unit.
    /// A ray outside it with no intersection ahead has escaped.
    pub(crate) fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut take = |p: Vec2| {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        };
        for s in &self.surfaces {
            take(s.a);
            take(s.b);
        }
        let r = self.target.radius;
        take(self.target.center + Vec2::new(r, r));
        take(self.target.center - Vec2::new(r, r));
        take(self.source.origin);
        (lo - Vec2::new(1.0, 1.0), hi + Vec2::new(1.0, 1.0))
    }
}

/// Caps that make every trace terminate: an interaction count and a total
/// path length (the time proxy; light is not infinitely fast).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_bounces: usize,
    pub max_path_length: f64,
}

impl Budget {
    pub fn new(max_bounces: usize, max_path_length: f64) -> Result<Self, OpticsError> {
        if max_bounces == 0 {
            return Err(OpticsError::InvalidBudget("max_bounces must be positive".into()));
        }
        if !max_path_length.is_finite() || max_path_length <= 0.0 {
            return Err(OpticsError::InvalidBudget(format!(
                "max_path_length must be positive and finite, got {max_path_length}"
            )));
        }
        Ok(Budget { max_bounces, max_path_length })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Hit,
    MissEscaped,
    BudgetExhausted,
    /// Ball traces only: the uncertainty straddles a decision boundary.
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Hit => "HIT",
            Verdict::MissEscaped => "MISS_ESCAPED",
            Verdict::BudgetExhausted => "BUDGET_EXHAUSTED",
            Verdict::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

/// Outcome of a trace: verdict plus the polyline actually travelled.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub verdict: Verdict,
    /// Source point, every interaction point, and the terminal point.
    pub path: Vec<Vec2>,
    /// Direction-changing surface interactions.
    pub bounces: usize,
    pub path_length: f64,
    /// Uncertainty radii on arrival (zero for exact traces).
    pub final_radii: BallRadii,
}

/// `d − 2(d·n̂)n̂`. Works with either normal orientation.
pub fn reflect(dir: Vec2, normal: Vec2) -> Vec2 {
    dir - normal * (2.0 * dir.dot(normal))
}

/// Snell refraction of `dir` at a surface with unit normal `normal`;
/// `eta_ratio` is incident index over transmitted index. Falls back to
/// [`reflect`] under total internal reflection.
pub fn refract(dir: Vec2, normal: Vec2, eta_ratio: f64) -> Vec2 {
    let n = if dir.dot(normal) > 0.0 { -normal } else { normal };
    let cos_i = -dir.dot(n);
    let k = 1.0 - eta_ratio * eta_ratio * (1.0 - cos_i * cos_i);
    if k < 0.0 {
        return reflect(dir, normal);
    }
    dir * eta_ratio + n * (eta_ratio * cos_i - k.sqrt())
}

/// One ray-surface intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub index: usize,
    pub point: Vec2,
    pub distance: f64,
    /// Parameter along the surface segment in [0, 1].
    pub along: f64,
}

/// All intersections ahead of the ray (t > [`T_MIN`]), sorted by distance
/// with ties broken by surface order.
pub fn ray_hits(ray: &Ray, scene: &Scene) -> Vec<SurfaceHit> {
    let mut hits = Vec::new();
    for (index, surface) in scene.surfaces.iter().enumerate() {
        let e = surface.b - surface.a;
        let den = ray.dir.cross(e);
        if den == 0.0 {
            continue; // parallel or degenerate
        }
        let r = surface.a - ray.origin;
        let t = r.cross(e) / den;
        let s = r.cross(ray.dir) / den;
        if t > T_MIN && t.is_finite() && (0.0..=1.0).contains(&s) {
            hits.push(SurfaceHit { index, point: ray.at(t), distance: t, along: s });
        }
    }
    hits.sort_unstable_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .expect("finite intersection distances")
            .then(a.index.cmp(&b.index))
    });
    hits
}

/// The closest surface ahead of the ray, if any.
pub fn nearest_intersection(ray: &Ray, scene: &Scene) -> Option<SurfaceHit> {
    ray_hits(ray, scene).into_iter().next()
}

/// Distance from a point to a segment.
pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len2 = e.dot(e);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(e) / len2).clamp(0.0, 1.0);
    p.dist(a + e * t)
}

/// Distance between two segments (zero when they cross).
pub(crate) fn segment_segment_distance(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let denom = d1.cross(d2);
    if denom != 0.0 {
        let r = q0 - p0;
        let t = r.cross(d2) / denom;
        let s = r.cross(d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s) {
            return 0.0;
        }
    }
    point_segment_distance(p0, q0, q1)
        .min(point_segment_distance(p1, q0, q1))
        .min(point_segment_distance(q0, p0, p1))
        .min(point_segment_distance(q1, p0, p1))
}
