//! The trace engine: exact and uncertainty-ball reachability.
//!
//! Both semantics run through one loop. An exact trace is a ball trace with
//! zero radii: every ambiguity predicate below is gated on the ball being
//! non-degenerate, so the two agree bit for bit in the degenerate case.
//!
//! Ball semantics is conservative first-order error propagation. Positional
//! uncertainty grows with distance travelled (`pos + t·2sin(ang/2)`, the
//! chord bound), and each surface interaction inflates the radii (obliquity
//! of the footprint, the endpoint-proximity surrogate `κ = 1/dist`, and the
//! worst-case Snell angular gain).
//! Whenever the ball could change the discrete course of events (it covers a
//! segment endpoint, another surface crosses the uncertainty wedge, the
//! incidence is near grazing or near the total-internal-reflection threshold,
//! or the ball only partially overlaps the target disc) the verdict is
//! `UNKNOWN` rather than a guess.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::scene_io::SceneTemplate;
use super::{
    point_segment_distance, ray_hits, reflect, refract, segment_segment_distance, Budget,
    OpticsError, Ray, Scene, Surface, SurfaceHit, SurfaceKind, TraceResult, Vec2, Verdict,
    GRAZING_EPS,
};

/// Positional and angular uncertainty radii carried by a ball ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallRadii {
    /// Positional radius, scene units.
    pub pos: f64,
    /// Angular radius, radians.
    pub ang: f64,
}

impl BallRadii {
    pub const ZERO: BallRadii = BallRadii { pos: 0.0, ang: 0.0 };

    pub fn new(pos: f64, ang: f64) -> Result<Self, OpticsError> {
        if !pos.is_finite() || !ang.is_finite() || pos < 0.0 || ang < 0.0 {
            return Err(OpticsError::InvalidScene(format!(
                "ball radii must be finite and non-negative, got ({pos}, {ang})"
            )));
        }
        Ok(BallRadii { pos, ang })
    }

    pub fn is_exact(&self) -> bool {
        self.pos == 0.0 && self.ang == 0.0
    }

    /// Positional extent after travelling `t` along the center ray. Uses the
    /// chord bound `2·sin(ang/2)`, which dominates the displacement of any
    /// direction within the angular spread.
    fn at(&self, t: f64) -> f64 {
        self.pos + t * 2.0 * (self.ang.min(PI) * 0.5).sin()
    }
}

/// Geometry of one surface interaction, as seen by a growth rule.
#[derive(Debug, Clone, Copy)]
pub struct InteractionGeometry {
    /// |d·n̂| at the hit point.
    pub cos_incidence: f64,
    /// Distance from the hit point to the nearer segment endpoint.
    pub endpoint_distance: f64,
    /// First-order angular amplification of the interaction:
    /// `eta·cosθᵢ/cosθₜ` for transmission, 1 for reflection.
    pub angular_gain: f64,
}

/// Per-step radius update rule for ball traces.
///
/// The engine clamps every update to be non-decreasing, so radii stay
/// monotone along a trace no matter what the rule returns.
pub trait RadiusGrowth: Sync {
    fn after_travel(&self, radii: BallRadii, distance: f64) -> BallRadii;
    fn after_interaction(&self, radii: BallRadii, geometry: &InteractionGeometry) -> BallRadii;
}

/// The default first-order rule.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderGrowth {
    /// Cap on the endpoint surrogate `κ = 1/endpoint_distance`.
    pub kappa_cap: f64,
    /// Floor on the incidence cosine in the footprint inflation (caps the
    /// obliquity blow-up; incidences that flat go to UNKNOWN anyway).
    pub obliquity_floor: f64,
    /// Cap on the Snell angular gain.
    pub gain_cap: f64,
}

impl Default for FirstOrderGrowth {
    fn default() -> Self {
        FirstOrderGrowth { kappa_cap: 1e3, obliquity_floor: 1e-2, gain_cap: 1e3 }
    }
}

impl RadiusGrowth for FirstOrderGrowth {
    fn after_travel(&self, radii: BallRadii, distance: f64) -> BallRadii {
        BallRadii { pos: radii.at(distance), ang: radii.ang }
    }

    fn after_interaction(&self, radii: BallRadii, geometry: &InteractionGeometry) -> BallRadii {
        let pos = radii.pos / geometry.cos_incidence.max(self.obliquity_floor);
        let kappa = (1.0 / geometry.endpoint_distance).min(self.kappa_cap);
        let ang = (radii.ang * geometry.angular_gain.min(self.gain_cap) + kappa * pos).min(PI);
        BallRadii { pos, ang }
    }
}

fn monotone(old: BallRadii, new: BallRadii) -> BallRadii {
    BallRadii { pos: new.pos.max(old.pos), ang: new.ang.max(old.ang) }
}

/// Exit parameter of a ray from an axis-aligned box (0 if already past it).
fn bbox_exit(ray: &Ray, lo: Vec2, hi: Vec2) -> f64 {
    let mut t_far = f64::INFINITY;
    for (o, d, l, h) in [
        (ray.origin.x, ray.dir.x, lo.x, hi.x),
        (ray.origin.y, ray.dir.y, lo.y, hi.y),
    ] {
        if d == 0.0 {
            continue;
        }
        let t0 = (l - o) / d;
        let t1 = (h - o) / d;
        t_far = t_far.min(t0.max(t1));
    }
    if t_far.is_finite() {
        t_far.max(0.0)
    } else {
        0.0
    }
}

/// Could any ray within the uncertainty wedge reach the segment `a`-`b`
/// within `t_end` of travel? Conservative: the radius is taken at the far end
/// of the segment's projection onto the ray, so `true` may be spurious but
/// `false` is reliable.
fn wedge_reaches_segment(ray: &Ray, ball: BallRadii, t_end: f64, a: Vec2, b: Vec2) -> bool {
    let ta = (a - ray.origin).dot(ray.dir).clamp(0.0, t_end);
    let tb = (b - ray.origin).dot(ray.dir).clamp(0.0, t_end);
    let reach = ball.at(ta.max(tb));
    segment_segment_distance(ray.origin, ray.at(t_end), a, b) <= reach
}

fn wedge_reaches_disc(ray: &Ray, ball: BallRadii, t_end: f64, center: Vec2, radius: f64) -> bool {
    let tc = (center - ray.origin).dot(ray.dir).clamp(0.0, t_end);
    point_segment_distance(center, ray.origin, ray.at(t_end)) <= radius + ball.at(tc)
}

/// What one step of the engine decided.
enum Step {
    /// The ray interacted or passed through a surface and keeps going.
    Continue,
    /// The trace ends: verdict, terminal point, and the distance travelled
    /// in this final step.
    Done(Verdict, Vec2, f64),
}

struct Tracer<'a> {
    scene: &'a Scene,
    budget: &'a Budget,
    growth: &'a dyn RadiusGrowth,
    ray: Ray,
    ball: BallRadii,
    bounces: usize,
    path: Vec<Vec2>,
    length: f64,
    remaining: f64,
    bbox: (Vec2, Vec2),
    /// Surface the ray just left, when the departing bundle provably cannot
    /// re-hit it (its angular spread is smaller than the exit angle). Exempt
    /// from wedge vetoes; without this every post-bounce ball verdict would
    /// be UNKNOWN merely because the origin sits on that surface.
    departed: Option<usize>,
}

impl<'a> Tracer<'a> {
    fn run(mut self) -> TraceResult {
        // A straight flight crosses each segment's supporting line at most
        // once, so pass-through events between bounces are bounded; anything
        // past this is float pathology and charged to the budget.
        let surfaces = self.scene.surfaces.len() + 1;
        let max_steps = self.budget.max_bounces * (surfaces + 1) + surfaces + 1;
        for _ in 0..max_steps {
            match self.step() {
                Step::Continue => continue,
                Step::Done(verdict, terminal, travelled) => {
                    return self.finish(verdict, terminal, travelled)
                }
            }
        }
        let origin = self.ray.origin;
        self.finish(Verdict::BudgetExhausted, origin, 0.0)
    }

    fn finish(mut self, verdict: Verdict, terminal: Vec2, travelled: f64) -> TraceResult {
        self.ball = monotone(self.ball, self.growth.after_travel(self.ball, travelled));
        if travelled > 0.0 {
            self.path.push(terminal);
        }
        TraceResult {
            verdict,
            path: self.path,
            bounces: self.bounces,
            path_length: self.length + travelled,
            final_radii: self.ball,
        }
    }

    fn step(&mut self) -> Step {
        let scene = self.scene;
        let exact = self.ball.is_exact();
        let hits = ray_hits(&self.ray, scene);
        let t_hit = hits.first().map(|h| h.distance).unwrap_or(f64::INFINITY);
        let window = t_hit.min(self.remaining);

        // Target first: a pass within the target radius mid-segment precedes
        // any surface event.
        let t_c = (scene.target.center - self.ray.origin).dot(self.ray.dir).clamp(0.0, window);
        let d_c = self.ray.at(t_c).dist(scene.target.center);
        if d_c + self.ball.at(t_c) <= scene.target.radius {
            // Whole ball inside the disc; definite unless a surface could
            // intercept a perturbed ray on the way, or the remaining path
            // budget is too tight to cover a perturbed ray's extra length.
            let blocked = !exact
                && (self.remaining - t_c < 2.0 * self.ball.at(t_c)
                    || scene.surfaces.iter().enumerate().any(|(i, s)| {
                        self.departed != Some(i)
                            && wedge_reaches_segment(&self.ray, self.ball, t_c, s.a, s.b)
                    }));
            let verdict = if blocked { Verdict::Unknown } else { Verdict::Hit };
            return Step::Done(verdict, self.ray.at(t_c), t_c);
        }
        if !exact && d_c - self.ball.at(window) <= scene.target.radius {
            // Some perturbed ray may touch the target, but not all do.
            return Step::Done(Verdict::Unknown, self.ray.at(t_c), t_c);
        }

        if t_hit.is_infinite() {
            // Nothing ahead on the center line.
            let t_exit = bbox_exit(&self.ray, self.bbox.0, self.bbox.1);
            if t_exit > self.remaining {
                return Step::Done(Verdict::BudgetExhausted, self.ray.at(self.remaining), self.remaining);
            }
            // Escape is definite only if no perturbed ray can reach anything.
            let blocked = !exact
                && (scene.surfaces.iter().enumerate().any(|(i, s)| {
                    self.departed != Some(i)
                        && wedge_reaches_segment(&self.ray, self.ball, self.remaining, s.a, s.b)
                }) || wedge_reaches_disc(
                    &self.ray,
                    self.ball,
                    self.remaining,
                    scene.target.center,
                    scene.target.radius,
                ));
            let verdict = if blocked { Verdict::Unknown } else { Verdict::MissEscaped };
            return Step::Done(verdict, self.ray.at(t_exit), t_exit);
        }

        if self.remaining < t_hit {
            return Step::Done(Verdict::BudgetExhausted, self.ray.at(self.remaining), self.remaining);
        }

        // Surface interaction at t_hit.
        let hit = hits[0];
        let surface = scene.surfaces[hit.index];
        let normal = surface.left_normal();
        let d_dot_n = self.ray.dir.dot(normal);
        let cos_inc = d_dot_n.abs();
        let end_dist = hit.point.dist(surface.a).min(hit.point.dist(surface.b));
        let r1 = self.ball.at(t_hit);

        if !exact && self.ambiguous_interaction(&hit, &surface, cos_inc, end_dist, r1, t_hit) {
            return Step::Done(Verdict::Unknown, hit.point, t_hit);
        }

        if cos_inc < GRAZING_EPS {
            // Tangential: pass through without interacting. Not a bounce and
            // not a path vertex; the budget still pays for the distance.
            self.advance(hit.point, self.ray.dir, t_hit);
            self.departed = None;
            return Step::Continue;
        }

        if let SurfaceKind::Absorb = surface.kind {
            return Step::Done(Verdict::MissEscaped, hit.point, t_hit);
        }

        if self.bounces + 1 > self.budget.max_bounces {
            return Step::Done(Verdict::BudgetExhausted, hit.point, t_hit);
        }

        let (new_dir, angular_gain) = match surface.kind {
            SurfaceKind::Mirror => (reflect(self.ray.dir, normal), 1.0),
            SurfaceKind::Refract { eta } => {
                let eta_ratio = if d_dot_n < 0.0 { eta } else { 1.0 / eta };
                let k = 1.0 - eta_ratio * eta_ratio * (1.0 - cos_inc * cos_inc);
                let out = refract(self.ray.dir, normal, eta_ratio);
                let gain = if k < 0.0 {
                    1.0 // total internal reflection preserves the spread
                } else {
                    // Worst-case first-order amplification dθₜ/dθᵢ over the
                    // bundle's incidence spread; the TIR veto guarantees the
                    // critical angle is not inside it.
                    let theta_i = cos_inc.clamp(-1.0, 1.0).acos();
                    let spread = self.ball.ang.min(FRAC_PI_2);
                    [theta_i - spread, theta_i, theta_i + spread]
                        .into_iter()
                        .map(|th| {
                            let th = th.clamp(0.0, FRAC_PI_2);
                            let s = (eta_ratio * th.sin()).min(1.0 - 1e-12);
                            eta_ratio * th.cos() / (1.0 - s * s).sqrt()
                        })
                        .fold(1.0f64, f64::max)
                };
                (out, gain)
            }
            SurfaceKind::Absorb => unreachable!("absorb handled above"),
        };

        let geometry = InteractionGeometry {
            cos_incidence: cos_inc,
            endpoint_distance: end_dist,
            angular_gain,
        };
        let after_travel = self.growth.after_travel(self.ball, t_hit);
        let after_touch = self.growth.after_interaction(after_travel, &geometry);
        self.ball = monotone(monotone(self.ball, after_travel), after_touch);
        self.path.push(hit.point);
        self.bounces += 1;
        self.length += t_hit;
        self.remaining -= t_hit;
        self.ray = Ray { origin: hit.point, dir: new_dir };
        // A flat surface cannot be re-hit by a bundle departing faster than
        // it spreads.
        let exit_cos = new_dir.dot(normal).abs();
        self.departed = (exit_cos > self.ball.ang.min(FRAC_PI_2).sin() + GRAZING_EPS)
            .then_some(hit.index);
        Step::Continue
    }

    /// Advance past a tangential crossing without recording an interaction.
    fn advance(&mut self, point: Vec2, dir: Vec2, travelled: f64) {
        self.ball = monotone(self.ball, self.growth.after_travel(self.ball, travelled));
        self.length += travelled;
        self.remaining -= travelled;
        self.ray = Ray { origin: point, dir };
    }

    /// Ambiguity checks for a pending surface interaction.
    fn ambiguous_interaction(
        &self,
        hit: &SurfaceHit,
        surface: &Surface,
        cos_inc: f64,
        end_dist: f64,
        r1: f64,
        t_hit: f64,
    ) -> bool {
        // Footprint of the ball on the surface, obliquity included (uncapped:
        // this is a veto, not a growth estimate).
        let footprint = if cos_inc >= GRAZING_EPS { r1 / cos_inc } else { f64::INFINITY };
        if end_dist < footprint {
            return true; // ball straddles a segment endpoint
        }
        if cos_inc < GRAZING_EPS + self.ball.ang.min(FRAC_PI_2).sin() {
            return true; // grazing band under angular uncertainty
        }
        let other_in_wedge = self.scene.surfaces.iter().enumerate().any(|(i, s)| {
            i != hit.index
                && self.departed != Some(i)
                && wedge_reaches_segment(&self.ray, self.ball, t_hit, s.a, s.b)
        });
        if other_in_wedge {
            return true; // a perturbed ray might hit a different surface first
        }
        if let SurfaceKind::Refract { eta } = surface.kind {
            // Positional offsets do not change incidence on a flat surface;
            // only the angular spread can push the hit across the critical
            // angle.
            if self.ball.ang > 0.0 {
                let eta_ratio =
                    if self.ray.dir.dot(surface.left_normal()) < 0.0 { eta } else { 1.0 / eta };
                let theta_i = cos_inc.clamp(-1.0, 1.0).acos();
                let spread = self.ball.ang.min(FRAC_PI_2);
                let s_lo = eta_ratio * (theta_i - spread).max(0.0).sin();
                let s_hi = eta_ratio * (theta_i + spread).min(FRAC_PI_2).sin();
                if s_lo <= 1.0 && 1.0 <= s_hi {
                    return true; // total internal reflection is in doubt
                }
            }
        }
        false
    }
}

/// Exact reachability: does the source ray ever pass within the target
/// radius, under the budget? Always terminates.
pub fn trace(scene: &Scene, budget: &Budget) -> TraceResult {
    trace_ball(scene, BallRadii::ZERO, &FirstOrderGrowth::default(), budget)
}

/// Finite-precision reachability. With zero radii this is exactly [`trace`];
/// with positive radii the verdict may be `UNKNOWN`, and definite verdicts
/// are conservative with respect to the uncertainty wedge.
pub fn trace_ball(
    scene: &Scene,
    initial: BallRadii,
    growth: &dyn RadiusGrowth,
    budget: &Budget,
) -> TraceResult {
    let bbox = scene.bounding_box();
    Tracer {
        scene,
        budget,
        growth,
        ray: scene.source,
        ball: initial,
        bounces: 0,
        path: vec![scene.source.origin],
        length: 0.0,
        remaining: budget.max_path_length,
        bbox,
        departed: None,
    }
    .run()
}

/// One row of a manufacturing-sensitivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub value: f64,
    pub result: TraceResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub rows: Vec<SensitivityRow>,
    /// Number of adjacent verdict changes across the value sequence.
    pub flips: usize,
}

/// Substitutes each approximation for the named parameter, runs an exact
/// trace per value (in parallel, output order preserved), and counts verdict
/// flips between adjacent approximations.
pub fn manufacturing_sensitivity(
    template: &SceneTemplate,
    param: &str,
    values: &[f64],
    budget: &Budget,
) -> Result<SensitivityReport, OpticsError> {
    if values.is_empty() {
        return Err(OpticsError::NoValues);
    }
    if !template.knows_param(param) {
        return Err(OpticsError::UnknownParam(param.to_string()));
    }
    let rows: Vec<SensitivityRow> = values
        .par_iter()
        .map(|&value| {
            let scene = template.resolve_with(param, value)?;
            Ok(SensitivityRow { value, result: trace(&scene, budget) })
        })
        .collect::<Result<_, OpticsError>>()?;
    let flips = rows
        .windows(2)
        .filter(|w| w[0].result.verdict != w[1].result.verdict)
        .count();
    Ok(SensitivityReport { rows, flips })
}
