//! Event-driven propagation of a unit-speed ray between specular reflections,
//! and its exact linearization.
//!
//! Between collisions the ray moves in a straight line. A collision is found
//! as the earliest admissible root over the four arcs; the same arc stays
//! eligible for the next hit because a concave mirror can reflect a ray onto
//! itself.

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{ArcMirror, CavityGeometry, SurfaceId};

/// Minimum advance before a root counts as the next collision.
pub const T_EPS: f64 = 1e-12;

/// `|n·v|` below which the tangent map is refused.
pub const GRAZING_EPS: f64 = 1e-10;

/// Two simultaneous hits closer than this are the same (lens edge) point.
const SAME_POINT: f64 = 1e-14;

/// Default separation of the shadow trajectory used by the finite-difference
/// tangent map.
pub const SHADOW_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    pub pos: Point2<f64>,
    pub vel: Vector2<f64>,
    pub t: f64,
    pub bounces: u64,
}

impl RayState {
    pub fn new(pos: Point2<f64>, vel: Vector2<f64>) -> Self {
        RayState {
            pos,
            vel,
            t: 0.0,
            bounces: 0,
        }
    }

    /// A ray leaving the left concave mirror at height `y0`, heading at
    /// `angle0` radians from the `+z` axis.
    pub fn launch(geom: &CavityGeometry, y0: f64, angle0: f64) -> Self {
        let pos = geom.arc(SurfaceId::LeftConcave).point_at(y0);
        RayState::new(pos, Vector2::new(angle0.cos(), angle0.sin()))
    }

    /// Position after free flight for `dt`.
    pub fn advanced(&self, dt: f64) -> Point2<f64> {
        self.pos + self.vel * dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Flight time from the query position.
    pub t: f64,
    pub point: Point2<f64>,
    pub normal: Vector2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceEvent {
    pub surface: SurfaceId,
    /// Absolute collision time.
    pub t: f64,
    pub point: Point2<f64>,
    /// Unit normal on the reflective side.
    pub normal: Vector2<f64>,
    /// Signed curvature of the surface, see [`ArcMirror::curvature`].
    pub curvature: f64,
    pub v_in: Vector2<f64>,
    pub v_out: Vector2<f64>,
}

/// Earliest admissible collision of the ray `pos + t vel` with `arc`.
///
/// A root is admissible when `t > T_EPS`, the point lies within the arc's
/// aperture on the arc's half of the circle, and the ray approaches the
/// reflective side.
pub fn intersect_ray_arc(pos: &Point2<f64>, vel: &Vector2<f64>, arc: &ArcMirror) -> Option<Hit> {
    // |w - d|² - ρ² with w, d measured from the vertex keeps c accurate near
    // the (small) vertex region instead of near the (distant) centre
    let w = pos - arc.vertex;
    let d = arc.center - arc.vertex;
    let a = vel.norm_squared();
    let half_b = (w - d).dot(vel);
    let c = w.norm_squared() - 2.0 * w.dot(&d);
    let disc = half_b * half_b - a * c;
    if disc < 0.0 {
        return None;
    }
    // larger-magnitude root first, the other from the product of roots
    let q = -(half_b + disc.sqrt().copysign(half_b));
    if q == 0.0 {
        return None;
    }
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };

    [lo, hi].into_iter().find_map(|t| {
        if t <= T_EPS {
            return None;
        }
        let point = pos + vel * t;
        if !arc.contains(&point) {
            return None;
        }
        let normal = arc.normal_at(&point);
        (normal.dot(vel) < 0.0).then_some(Hit { t, point, normal })
    })
}

/// Specular reflection `v - 2 (n·v) n`.
///
/// Divides by `n·n` so a normal that is unit only to round-off still gives
/// a mirror image, then restores the incoming speed exactly. Without the
/// rescale the rounding is slightly one-sided and the speed drifts by about
/// 1e-11 per million bounces.
pub fn reflect(v_in: &Vector2<f64>, n: &Vector2<f64>) -> Result<Vector2<f64>> {
    let vn = n.dot(v_in);
    if vn >= 0.0 {
        return Err(Error::NonApproaching(vn));
    }
    let out = v_in - n * (2.0 * vn / n.norm_squared());
    Ok(out * (v_in.norm() / out.norm()))
}

/// Advance to the next collision.
///
/// Returns the unchanged state and `None` when no arc is ever hit again.
pub fn step(state: &RayState, geom: &CavityGeometry) -> Result<(RayState, Option<BounceEvent>)> {
    let mut best: Option<(&ArcMirror, Hit)> = None;
    for arc in &geom.arcs {
        let Some(hit) = intersect_ray_arc(&state.pos, &state.vel, arc) else {
            continue;
        };
        match best {
            Some((prev, ref prev_hit)) => {
                let dt = (hit.t - prev_hit.t).abs();
                if dt < T_EPS && (hit.point - prev_hit.point).norm() > SAME_POINT {
                    return Err(Error::AmbiguousCollision {
                        first: prev.id,
                        second: arc.id,
                        dt,
                    });
                }
                if hit.t < prev_hit.t {
                    best = Some((arc, hit));
                }
            }
            None => best = Some((arc, hit)),
        }
    }

    let Some((arc, hit)) = best else {
        return Ok((*state, None));
    };
    let v_out = reflect(&state.vel, &hit.normal)?;
    let event = BounceEvent {
        surface: arc.id,
        t: state.t + hit.t,
        point: hit.point,
        normal: hit.normal,
        curvature: arc.curvature(),
        v_in: state.vel,
        v_out,
    };
    let next = RayState {
        pos: hit.point,
        vel: v_out,
        t: event.t,
        bounces: state.bounces + 1,
    };
    Ok((next, Some(event)))
}

/// Iterator over the bounces of a ray. Ends when the ray escapes or after the
/// first error.
pub struct Trajectory<'g> {
    geom: &'g CavityGeometry,
    state: RayState,
    done: bool,
}

impl<'g> Trajectory<'g> {
    pub fn new(geom: &'g CavityGeometry, initial: RayState) -> Self {
        Trajectory {
            geom,
            state: initial,
            done: false,
        }
    }

    /// State just after the most recent bounce.
    pub fn state(&self) -> &RayState {
        &self.state
    }

    /// True once the ray has left the cavity (or failed).
    pub fn finished(&self) -> bool {
        self.done
    }
}

impl Iterator for Trajectory<'_> {
    type Item = Result<BounceEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match step(&self.state, self.geom) {
            Ok((next, Some(event))) => {
                self.state = next;
                Some(Ok(event))
            }
            Ok((_, None)) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// No further collision after the last bounce at `t_last_bounce`.
    Escaped { t_last_bounce: f64 },
    /// Stopped at the bounce cap.
    CapReached { cap: u64 },
}

impl Outcome {
    pub fn is_capped(&self) -> bool {
        matches!(self, Outcome::CapReached { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub events: Vec<BounceEvent>,
    pub outcome: Outcome,
    /// Distance travelled up to the last bounce.
    pub path_length: f64,
}

impl TraceResult {
    /// Time of the last bounce (zero if the ray never bounced).
    pub fn last_bounce_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.t)
    }
}

/// Summary of a trajectory without the event list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub final_state: RayState,
    pub outcome: Outcome,
}

/// Propagate until escape or `cap` bounces, calling `on_event` for every
/// bounce with the state just after it.
pub fn run<F>(initial: RayState, geom: &CavityGeometry, cap: u64, mut on_event: F) -> Result<RunSummary>
where
    F: FnMut(&RayState, &BounceEvent),
{
    let mut state = initial;
    let start = initial.bounces;
    while state.bounces - start < cap {
        match step(&state, geom)? {
            (next, Some(event)) => {
                state = next;
                on_event(&state, &event);
            }
            (_, None) => {
                return Ok(RunSummary {
                    final_state: state,
                    outcome: Outcome::Escaped { t_last_bounce: state.t },
                })
            }
        }
    }
    Ok(RunSummary {
        final_state: state,
        outcome: Outcome::CapReached { cap },
    })
}

/// Trace with the full event record.
pub fn trace(initial: RayState, geom: &CavityGeometry, cap: u64) -> Result<TraceResult> {
    let mut events = Vec::new();
    let summary = run(initial, geom, cap, |_, e| events.push(*e))?;
    Ok(TraceResult {
        path_length: (summary.final_state.t - initial.t) * initial.vel.norm(),
        events,
        outcome: summary.outcome,
    })
}

/// A phase-space perturbation `(δq, δv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub d_pos: Vector2<f64>,
    pub d_vel: Vector2<f64>,
}

impl TangentVector {
    pub fn new(d_pos: Vector2<f64>, d_vel: Vector2<f64>) -> Self {
        TangentVector { d_pos, d_vel }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        TangentVector::new(Vector2::new(v[0], v[1]), Vector2::new(v[2], v[3]))
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.d_pos.x, self.d_pos.y, self.d_vel.x, self.d_vel.y]
    }

    pub fn norm(&self) -> f64 {
        (self.d_pos.norm_squared() + self.d_vel.norm_squared()).sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        TangentVector::new(self.d_pos * k, self.d_vel * k)
    }

    /// Unit perturbation transverse to the flow and on the energy shell:
    /// both components perpendicular to `vel`.
    pub fn transverse(vel: &Vector2<f64>, pos_weight: f64, vel_weight: f64) -> Self {
        let perp = Vector2::new(-vel.y, vel.x).normalize();
        let tv = TangentVector::new(perp * pos_weight, perp * vel_weight);
        tv.scaled(1.0 / tv.norm())
    }
}

/// Exact linearization of free flight from `state` to `event` followed by the
/// reflection, applied to `tv`.
///
/// The collision-time variation is `δτ = -(n·δq)/(n·v)`, the impact point
/// moves by `δQ = δq + v δτ` along the surface, and the normal turns by
/// `δn = κ δQ`. The result lives just after the collision:
///
/// ```text
/// δq' = δq - 2 (n·δq) n
/// δv' = δv - 2 (n·δv) n - 2 [ (v·δn) n + (n·v) δn ]
/// ```
pub fn tangent_step(state: &RayState, tv: &TangentVector, event: &BounceEvent) -> Result<TangentVector> {
    let n = event.normal;
    let v = event.v_in;
    let nv = n.dot(&v);
    if nv.abs() < GRAZING_EPS {
        return Err(Error::Grazing {
            surface: event.surface,
            cos_incidence: nv.abs(),
        });
    }
    let flight = event.t - state.t;
    let dq = tv.d_pos + tv.d_vel * flight;
    let dtau = -n.dot(&dq) / nv;
    let d_impact = dq + v * dtau;
    let dn = d_impact * event.curvature;

    let d_pos = dq - n * (2.0 * n.dot(&dq));
    let d_vel = tv.d_vel - n * (2.0 * n.dot(&tv.d_vel)) - (n * v.dot(&dn) + dn * nv) * 2.0;
    Ok(TangentVector::new(d_pos, d_vel))
}

/// Finite-difference counterpart of [`tangent_step`]: launch shadow rays
/// displaced by `±separation · tv`, let them collide, carry them to the
/// reference collision time and take the central difference.
pub fn shadow_step(
    state: &RayState,
    tv: &TangentVector,
    event: &BounceEvent,
    geom: &CavityGeometry,
    separation: f64,
) -> Result<TangentVector> {
    let (pos_plus, vel_plus) = shadow_image(state, tv, event, geom, separation)?;
    let (pos_minus, vel_minus) = shadow_image(state, tv, event, geom, -separation)?;
    let inv = 0.5 / separation;
    Ok(TangentVector::new(
        (pos_plus - pos_minus) * inv,
        (vel_plus - vel_minus) * inv,
    ))
}

/// Post-collision position and velocity of the ray displaced by
/// `offset · tv`, propagated to the reference collision time.
fn shadow_image(
    state: &RayState,
    tv: &TangentVector,
    event: &BounceEvent,
    geom: &CavityGeometry,
    offset: f64,
) -> Result<(Point2<f64>, Vector2<f64>)> {
    let shadow = RayState {
        pos: state.pos + tv.d_pos * offset,
        vel: state.vel + tv.d_vel * offset,
        ..*state
    };
    let (_, shadow_event) = step(&shadow, geom)?;
    let shadow_event = match shadow_event {
        Some(e) if e.surface == event.surface => e,
        _ => {
            return Err(Error::ShadowDiverged {
                bounce: state.bounces + 1,
            })
        }
    };
    // flight times are taken relative to `state` to avoid absolute-time rounding
    let reference_flight =
        intersect_ray_arc(&state.pos, &state.vel, geom.arc(event.surface)).map_or(event.t - state.t, |h| h.t);
    let shadow_flight =
        intersect_ray_arc(&shadow.pos, &shadow.vel, geom.arc(event.surface)).map_or(shadow_event.t - state.t, |h| h.t);
    let pos = shadow_event.point + shadow_event.v_out * (reference_flight - shadow_flight);
    Ok((pos, shadow_event.v_out))
}
