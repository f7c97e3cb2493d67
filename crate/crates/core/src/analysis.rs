//! Chaos diagnostics on top of the bounce map: surfaces of section,
//! escape-time scans, search for long-lived (repeller) orbits, and averaged
//! Lyapunov exponents.
//!
//! Work over initial conditions runs on the current rayon pool. Results are
//! always merged by grid or orbit index, so the output does not depend on the
//! number of worker threads.

use std::ops::Range;

use log::{debug, warn};
use nalgebra::{Vector2, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    run, shadow_step, step, tangent_step, BounceEvent, Outcome, RayState, TangentVector, SHADOW_SEPARATION,
};
use crate::error::{Error, Result};
use crate::geometry::{CavityGeometry, SurfaceId};

/// Bounces allowed per requested section point before giving up on a ray
/// that never returns to the left mirror.
const SOS_BOUNCE_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SosPoint {
    /// Global bounce count at this reflection.
    pub bounce_index: u64,
    pub y: f64,
    /// Transverse velocity just after the reflection.
    pub v_y: f64,
}

/// Record `(y, v_y)` after each reflection at the left concave mirror, until
/// `n_points` are collected or the ray escapes.
pub fn sos_collect(geom: &CavityGeometry, y0: f64, angle0: f64, n_points: usize) -> Result<Vec<SosPoint>> {
    let mut points = Vec::with_capacity(n_points);
    if n_points == 0 {
        return Ok(points);
    }
    let budget = SOS_BOUNCE_BUDGET.saturating_mul(n_points as u64);
    let mut state = RayState::launch(geom, y0, angle0);
    while points.len() < n_points && state.bounces < budget {
        let (next, event) = step(&state, geom).map_err(|e| e.at_launch(y0, angle0))?;
        let Some(event) = event else { break };
        if event.surface == SurfaceId::LeftConcave {
            points.push(SosPoint {
                bounce_index: next.bounces,
                y: event.point.y,
                v_y: event.v_out.y,
            });
        }
        state = next;
    }
    Ok(points)
}

/// Uniform grid of launch heights on the left mirror, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub n_samples: usize,
    /// Launch direction, radians from `+z`.
    pub angle0: f64,
}

impl ScanGrid {
    pub fn new(y_min: f64, y_max: f64, n_samples: usize) -> Self {
        ScanGrid {
            y_min,
            y_max,
            n_samples,
            angle0: 0.0,
        }
    }

    /// Height of sample `i`.
    ///
    /// Written symmetrically in the endpoints, so a reversed grid visits
    /// bit-identical heights.
    pub fn y(&self, i: usize) -> f64 {
        let last = self.n_samples - 1;
        if i == 0 {
            return self.y_min;
        }
        if i == last {
            return self.y_max;
        }
        (self.y_min * (last - i) as f64 + self.y_max * i as f64) / last as f64
    }

    pub fn spacing(&self) -> f64 {
        (self.y_max - self.y_min).abs() / (self.n_samples - 1) as f64
    }

    pub fn reversed(&self) -> Self {
        ScanGrid {
            y_min: self.y_max,
            y_max: self.y_min,
            ..*self
        }
    }

    /// Same number of samples over a window `magnification` times narrower,
    /// centred on `center` and clamped to this grid's range.
    pub fn magnified(&self, center: f64, magnification: f64) -> Self {
        let (lo, hi) = self.bounds();
        let half = 0.5 * (hi - lo) / magnification;
        let center = center.clamp(lo + half, hi - half);
        ScanGrid {
            y_min: center - half,
            y_max: center + half,
            ..*self
        }
    }

    fn bounds(&self) -> (f64, f64) {
        (self.y_min.min(self.y_max), self.y_min.max(self.y_max))
    }

    fn validate(&self, geom: &CavityGeometry) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::config("n_samples", "must be at least 2"));
        }
        let b = geom.config.mirror_aperture;
        for (key, y) in [("y_min", self.y_min), ("y_max", self.y_max)] {
            if y.is_nan() || y.abs() > b {
                return Err(Error::config(
                    key,
                    format!("{y} outside the end-mirror aperture [-{b}, {b}]"),
                ));
            }
        }
        if !self.angle0.is_finite() {
            return Err(Error::config("angle0", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeRecord {
    pub y0: f64,
    pub angle0: f64,
    pub n_bounces: u64,
    /// Time of the last bounce; for capped rays, the time of the cap-th bounce.
    pub escape_time: f64,
    pub capped: bool,
}

/// Trace one ray per grid point; records come back in grid order.
pub fn escape_scan(geom: &CavityGeometry, grid: &ScanGrid, cap: u64) -> Result<Vec<EscapeRecord>> {
    grid.validate(geom)?;
    let results: Vec<Result<EscapeRecord>> = (0..grid.n_samples)
        .into_par_iter()
        .map(|i| escape_record(geom, grid.y(i), grid.angle0, cap))
        .collect();
    results.into_iter().collect()
}

fn escape_record(geom: &CavityGeometry, y0: f64, angle0: f64, cap: u64) -> Result<EscapeRecord> {
    let summary = run(RayState::launch(geom, y0, angle0), geom, cap, |_, _| {}).map_err(|e| e.at_launch(y0, angle0))?;
    Ok(EscapeRecord {
        y0,
        angle0,
        n_bounces: summary.final_state.bounces,
        escape_time: summary.final_state.t,
        capped: summary.outcome.is_capped(),
    })
}

/// Index ranges of at least `min_len` consecutive uncapped records whose
/// escape time stays below `threshold`.
pub fn windows_of_continuity(records: &[EscapeRecord], threshold: f64, min_len: usize) -> Vec<Range<usize>> {
    let mut windows = Vec::new();
    let mut start = None;
    for (i, r) in records.iter().enumerate() {
        let low = !r.capped && r.escape_time < threshold;
        match (low, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_len {
                    windows.push(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if records.len() - s >= min_len {
            windows.push(s..records.len());
        }
    }
    windows
}

/// Capped records per unit launch height.
pub fn capped_density(records: &[EscapeRecord]) -> f64 {
    let capped = records.iter().filter(|r| r.capped).count();
    let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.y0), hi.max(r.y0))
    });
    if hi > lo {
        capped as f64 / (hi - lo)
    } else {
        0.0
    }
}

/// Fraction of initial conditions still inside the cavity after time `t`,
/// sampled at `t = 0` and at every distinct escape time. Capped records
/// never leave.
pub fn survival_curve(records: &[EscapeRecord]) -> Result<Vec<(f64, f64)>> {
    if records.is_empty() {
        return Err(Error::NoData);
    }
    let total = records.len() as f64;
    let mut times: Vec<f64> = records.iter().filter(|r| !r.capped).map(|r| r.escape_time).collect();
    times.sort_by(f64::total_cmp);

    let mut curve = Vec::with_capacity(times.len() + 1);
    let mut remaining = records.len();
    let mut i = 0;
    // rays that never bounced leave at t = 0
    while i < times.len() && times[i] <= 0.0 {
        remaining -= 1;
        i += 1;
    }
    curve.push((0.0, remaining as f64 / total));
    while i < times.len() {
        let t = times[i];
        while i < times.len() && times[i] == t {
            remaining -= 1;
            i += 1;
        }
        curve.push((t, remaining as f64 / total));
    }
    Ok(curve)
}

/// Parameters for [`find_long_lived`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepellerSearch {
    pub grid: ScanGrid,
    pub cap: u64,
    /// Number of refinement levels after the seed scan.
    pub depth: u32,
    /// Resolution gain per refinement level.
    pub factor: usize,
    /// Escape-time maxima refined per level.
    pub candidates: usize,
}

impl RepellerSearch {
    pub fn new(grid: ScanGrid, cap: u64, depth: u32) -> Self {
        RepellerSearch {
            grid,
            cap,
            depth,
            factor: 10,
            candidates: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepellerMember {
    pub y0: f64,
    pub angle0: f64,
    /// Time of the cap-th bounce.
    pub survival_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepellerSample {
    pub members: Vec<RepellerMember>,
    pub refinement_depth: u32,
    pub cap: u64,
}

impl RepellerSample {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// At most `n` members, evenly spaced through the (height-sorted) sample.
    pub fn thinned(mut self, n: usize) -> Self {
        let len = self.members.len();
        if n < len {
            self.members = (0..n).map(|k| self.members[k * len / n]).collect();
        }
        self
    }

    /// Drop members lying on invariant tori (see [`classify_orbit`]).
    pub fn retain_chaotic(self, geom: &CavityGeometry) -> Result<Self> {
        let kinds = self.classify(geom, &self.members)?;
        let members = self
            .members
            .iter()
            .zip(kinds)
            .filter(|(_, k)| *k == OrbitKind::Chaotic)
            .map(|(m, _)| *m)
            .collect();
        Ok(RepellerSample { members, ..self })
    }

    /// At most `n` chaotic members, spread through the sample like
    /// [`thinned`](Self::thinned). Members are classified in batches of `n`,
    /// coarse spacing first, so large samples are not classified in full.
    pub fn chaotic_subset(self, geom: &CavityGeometry, n: usize) -> Result<Self> {
        let mut picked: Vec<usize> = Vec::with_capacity(n);
        let order = spread_order(self.members.len(), n);
        for batch in order.chunks(n.max(1)) {
            let members: Vec<RepellerMember> = batch.iter().map(|&i| self.members[i]).collect();
            let kinds = self.classify(geom, &members)?;
            picked.extend(
                batch
                    .iter()
                    .zip(kinds)
                    .filter(|(_, k)| *k == OrbitKind::Chaotic)
                    .map(|(&i, _)| i),
            );
            if picked.len() >= n {
                break;
            }
        }
        picked.truncate(n);
        picked.sort_unstable();
        let members = picked.into_iter().map(|i| self.members[i]).collect();
        Ok(RepellerSample { members, ..self })
    }

    fn classify(&self, geom: &CavityGeometry, members: &[RepellerMember]) -> Result<Vec<OrbitKind>> {
        members
            .par_iter()
            .map(|m| classify_orbit(geom, m.y0, m.angle0, self.cap).map_err(|e| e.at_launch(m.y0, m.angle0)))
            .collect()
    }
}

/// Every index below `len`, ordered so that each prefix of length `n`,
/// `2n`, `4n`, ... is spread evenly over the range.
fn spread_order(len: usize, n: usize) -> Vec<usize> {
    let mut seen = vec![false; len];
    let mut order = Vec::with_capacity(len);
    let mut stride = n.max(1);
    while order.len() < len {
        for k in 0..stride.min(len) {
            let i = k * len / stride.min(len);
            if !seen[i] {
                seen[i] = true;
                order.push(i);
            }
        }
        stride = stride.saturating_mul(2);
    }
    order
}

/// Seed scan followed by `depth` levels of refinement around the largest
/// escape-time maxima. Every launch that reaches the cap is collected.
pub fn find_long_lived(geom: &CavityGeometry, search: &RepellerSearch) -> Result<RepellerSample> {
    if search.depth < 1 {
        return Err(Error::config("depth", "must be at least 1"));
    }
    if search.factor < 2 {
        return Err(Error::config("factor", "must be at least 2"));
    }
    let (lo, hi) = search.grid.bounds();
    let mut members: Vec<RepellerMember> = Vec::new();

    let seed = escape_scan(geom, &search.grid, search.cap)?;
    let mut candidates: Vec<(f64, f64)> = collect_level(&seed, search.grid.spacing(), search.candidates, &mut members)
        .into_iter()
        .map(|(y, h, _)| (y, h))
        .collect();

    for _ in 0..search.depth {
        if candidates.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (y, h) in candidates {
            let grid = ScanGrid {
                y_min: (y - h).max(lo),
                y_max: (y + h).min(hi),
                n_samples: 2 * search.factor + 1,
                angle0: search.grid.angle0,
            };
            if grid.y_max <= grid.y_min {
                continue;
            }
            let records = escape_scan(geom, &grid, search.cap)?;
            next.extend(collect_level(&records, grid.spacing(), usize::MAX, &mut members));
        }
        next.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.total_cmp(&b.0)));
        next.truncate(search.candidates);
        candidates = next.into_iter().map(|(y, h, _)| (y, h)).collect();
    }

    members.sort_by(|a, b| a.y0.total_cmp(&b.y0));
    members.dedup_by(|a, b| a.y0 == b.y0);
    Ok(RepellerSample {
        members,
        refinement_depth: search.depth,
        cap: search.cap,
    })
}

/// Store capped records and return the top uncapped local maxima of escape
/// time as `(y0, spacing, escape_time)`; `spacing` is the refined step.
fn collect_level(
    records: &[EscapeRecord],
    spacing: f64,
    keep: usize,
    members: &mut Vec<RepellerMember>,
) -> Vec<(f64, f64, f64)> {
    members.extend(records.iter().filter(|r| r.capped).map(|r| RepellerMember {
        y0: r.y0,
        angle0: r.angle0,
        survival_time: r.escape_time,
    }));
    let mut maxima: Vec<(f64, f64, f64)> = (0..records.len())
        .filter(|&i| {
            let r = &records[i];
            let left = i.checked_sub(1).is_none_or(|j| records[j].escape_time <= r.escape_time);
            let right = records.get(i + 1).is_none_or(|n| n.escape_time <= r.escape_time);
            !r.capped && left && right
        })
        .map(|i| (records[i].y0, spacing, records[i].escape_time))
        .collect();
    maxima.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.total_cmp(&b.0)));
    maxima.truncate(keep);
    maxima
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    /// Exponential tangent growth.
    Chaotic,
    /// At most polynomial tangent growth: the orbit lies on a KAM torus (or
    /// escapes before `bounces`).
    Regular,
}

/// Growth faster than `bounces^REGULAR_GROWTH_POWER` counts as exponential.
pub const REGULAR_GROWTH_POWER: f64 = 3.0;

/// Tangent growth along a torus is at most linear in time, so a total
/// log-stretch below `3 ln(bounces)` marks an orbit as regular.
pub fn classify_orbit(geom: &CavityGeometry, y0: f64, angle0: f64, bounces: u64) -> Result<OrbitKind> {
    let initial = RayState::launch(geom, y0, angle0);
    let mut tv = TangentVector::transverse(&initial.vel, 1.0, 1.0);
    let mut stretch = 0.0;
    let summary = run_with_tangent(initial, geom, bounces, |state, event| {
        tv = tangent_step(state, &tv, event)?;
        let k = tv.norm();
        stretch += k.ln();
        tv = tv.scaled(1.0 / k);
        Ok(())
    })?;
    if !summary.is_capped() {
        return Ok(OrbitKind::Regular);
    }
    Ok(if stretch > REGULAR_GROWTH_POWER * (bounces as f64).ln() {
        OrbitKind::Chaotic
    } else {
        OrbitKind::Regular
    })
}

/// Like [`run`], but hands the callback the state *before* each bounce so a
/// tangent vector can be carried along.
fn run_with_tangent<F>(initial: RayState, geom: &CavityGeometry, bounces: u64, mut f: F) -> Result<Outcome>
where
    F: FnMut(&RayState, &BounceEvent) -> Result<()>,
{
    let mut state = initial;
    for _ in 0..bounces {
        let (next, event) = step(&state, geom)?;
        let Some(event) = event else {
            return Ok(Outcome::Escaped { t_last_bounce: state.t });
        };
        f(&state, &event)?;
        state = next;
    }
    Ok(Outcome::CapReached { cap: bounces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentMethod {
    /// Analytic linearization of the bounce map.
    Exact,
    /// Two-trajectory finite differences, separation [`SHADOW_SEPARATION`].
    Shadow,
}

impl std::str::FromStr for TangentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TangentMethod::Exact),
            "shadow" => Ok(TangentMethod::Shadow),
            other => Err(Error::config(
                "method",
                format!("unknown method `{other}` (exact | shadow)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovParams {
    /// Bounces measured per orbit.
    pub bounces: u64,
    /// Bounces discarded before measuring.
    pub transient: u64,
    pub method: TangentMethod,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        LyapunovParams {
            bounces: 10_000,
            transient: 100,
            method: TangentMethod::Exact,
        }
    }
}

/// Finite-time Lyapunov spectrum of one orbit, from a Gram-Schmidt
/// orthonormalized basis of four tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitExponents {
    pub y0: f64,
    pub angle0: f64,
    /// Exponents in basis order: the first vector is transverse to the flow.
    pub exponents: [f64; 4],
    pub flow_time: f64,
}

impl OrbitExponents {
    pub fn lambda1(&self) -> f64 {
        self.exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Mean largest exponent over orbits (1/s).
    pub lambda1: f64,
    /// Standard deviation over orbits divided by `sqrt(n_orbits)`.
    pub stderr: f64,
    /// Mean sum of all four exponents.
    pub exponent_sum: f64,
    pub n_orbits: usize,
    pub bounces_per_orbit: u64,
    pub orbits: Vec<OrbitExponents>,
}

/// Propagates one tangent vector across one bounce.
type TangentMap<'a> = dyn Fn(&RayState, &TangentVector, &BounceEvent) -> Result<TangentVector> + Sync + 'a;

/// Lyapunov spectrum along the orbit starting at `initial`. `Ok(None)` if
/// the ray escapes first.
pub fn orbit_exponents(
    geom: &CavityGeometry,
    initial: RayState,
    params: &LyapunovParams,
) -> Result<Option<OrbitExponents>> {
    match params.method {
        TangentMethod::Exact => spectrum_with(geom, initial, params, &|s, tv, e| tangent_step(s, tv, e)),
        TangentMethod::Shadow => spectrum_with(geom, initial, params, &|s, tv, e| {
            shadow_step(s, tv, e, geom, SHADOW_SEPARATION)
        }),
    }
}

fn spectrum_with(
    geom: &CavityGeometry,
    initial: RayState,
    params: &LyapunovParams,
    map: &TangentMap<'_>,
) -> Result<Option<OrbitExponents>> {
    let mut state = initial;
    for _ in 0..params.transient {
        match step(&state, geom)? {
            (next, Some(_)) => state = next,
            (_, None) => return Ok(None),
        }
    }

    let mut basis = initial_basis(&state.vel);
    let mut log_stretch = [0.0; 4];
    let start = state.t;
    for _ in 0..params.bounces {
        let (next, event) = step(&state, geom)?;
        let Some(event) = event else { return Ok(None) };
        for tv in basis.iter_mut() {
            *tv = map(&state, tv, &event)?;
        }
        for (acc, norm) in log_stretch.iter_mut().zip(orthonormalize(&mut basis)) {
            *acc += norm.ln();
        }
        state = next;
    }

    let flow_time = state.t - start;
    Ok(Some(OrbitExponents {
        y0: initial.pos.y,
        angle0: initial.vel.y.atan2(initial.vel.x),
        exponents: log_stretch.map(|s| s / flow_time),
        flow_time,
    }))
}

/// Transverse pair first, then the flow and energy directions.
fn initial_basis(vel: &Vector2<f64>) -> [TangentVector; 4] {
    let u = vel.normalize();
    let perp = Vector2::new(-u.y, u.x);
    let zero = Vector2::zeros();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        TangentVector::new(perp * h, perp * h),
        TangentVector::new(perp * h, -perp * h),
        TangentVector::new(u, zero),
        TangentVector::new(zero, u),
    ]
}

/// Modified Gram-Schmidt in place; returns the norms removed.
fn orthonormalize(basis: &mut [TangentVector; 4]) -> [f64; 4] {
    let mut vs = basis.map(|tv| Vector4::from(tv.to_array()));
    let mut norms = [0.0; 4];
    for i in 0..4 {
        for j in 0..i {
            let proj = vs[i].dot(&vs[j]);
            vs[i] -= vs[j] * proj;
        }
        norms[i] = vs[i].norm();
        vs[i] /= norms[i];
    }
    *basis = vs.map(|v| TangentVector::from_array(v.into()));
    norms
}

/// Average the largest exponent over the orbits of `sample`. Orbits that
/// escape early (or whose shadow loses the reference orbit) are dropped.
pub fn lyapunov_estimate(
    geom: &CavityGeometry,
    sample: &RepellerSample,
    params: &LyapunovParams,
) -> Result<LyapunovEstimate> {
    if sample.is_empty() {
        return Err(Error::NoData);
    }
    let per_orbit: Vec<Result<Option<OrbitExponents>>> = sample
        .members
        .par_iter()
        .map(|m| orbit_exponents(geom, RayState::launch(geom, m.y0, m.angle0), params))
        .collect();

    let mut orbits = Vec::with_capacity(per_orbit.len());
    for (member, result) in sample.members.iter().zip(per_orbit) {
        match result {
            Ok(Some(o)) => orbits.push(o),
            Ok(None) => warn!(
                "orbit y0 = {} escaped before {} bounces; dropped",
                member.y0,
                params.transient + params.bounces
            ),
            Err(e @ Error::ShadowDiverged { .. }) => warn!("orbit y0 = {}: {e}; dropped", member.y0),
            Err(e) => return Err(e.at_launch(member.y0, member.angle0)),
        }
    }
    summarize(orbits, params.bounces, sample.len())
}

/// Search the repeller, optionally discard regular orbits, keep at most
/// `n_orbits` members and average their exponents.
pub fn repeller_lyapunov(
    geom: &CavityGeometry,
    search: &RepellerSearch,
    n_orbits: usize,
    exclude_regular: bool,
    params: &LyapunovParams,
) -> Result<LyapunovEstimate> {
    let sample = find_long_lived(geom, search)?;
    debug!("repeller search: {} capped launches", sample.len());
    let sample = if exclude_regular {
        sample.chaotic_subset(geom, n_orbits)?
    } else {
        sample.thinned(n_orbits)
    };
    lyapunov_estimate(geom, &sample, params)
}

fn summarize(orbits: Vec<OrbitExponents>, bounces: u64, attempted: usize) -> Result<LyapunovEstimate> {
    if orbits.is_empty() {
        return Err(Error::AllOrbitsEscaped(attempted));
    }
    let n = orbits.len() as f64;
    let lambdas: Vec<f64> = orbits.iter().map(OrbitExponents::lambda1).collect();
    let mean = lambdas.iter().sum::<f64>() / n;
    let stderr = if orbits.len() > 1 {
        let var = lambdas.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovEstimate {
        lambda1: mean,
        stderr,
        exponent_sum: orbits.iter().map(OrbitExponents::sum).sum::<f64>() / n,
        n_orbits: orbits.len(),
        bounces_per_orbit: bounces,
        orbits,
    })
}

/// Default pairs-rule tolerance as a fraction of `lambda1`.
pub const PAIRS_RULE_FRACTION: f64 = 0.05;

/// Whether the exponents sum to zero within `tol`.
pub fn pairs_check(estimate: &LyapunovEstimate, tol: f64) -> Result<bool> {
    if estimate.n_orbits == 0 {
        return Err(Error::NoData);
    }
    Ok(estimate.exponent_sum.abs() <= tol)
}

/// [`pairs_check`] with tolerance `PAIRS_RULE_FRACTION · lambda1`.
pub fn pairs_check_default(estimate: &LyapunovEstimate) -> Result<bool> {
    pairs_check(estimate, PAIRS_RULE_FRACTION * estimate.lambda1)
}

/// Tangent growth rate along the axial orbit between the left concave mirror
/// and the central element, over `bounces` bounces.
pub fn axial_growth_rate(geom: &CavityGeometry, bounces: u64, method: TangentMethod) -> Result<f64> {
    let params = LyapunovParams {
        bounces,
        transient: 0,
        method,
    };
    let orbit = orbit_exponents(geom, RayState::launch(geom, 0.0, 0.0), &params)?;
    orbit.map(|o| o.lambda1()).ok_or(Error::NoData)
}

/// Birkhoff coordinates `(s, p)` at the left concave mirror: arc length from
/// the vertex and tangential velocity just after reflection.
pub fn left_mirror_state(geom: &CavityGeometry, s: f64, p: f64) -> RayState {
    let arc = geom.arc(SurfaceId::LeftConcave);
    let point = arc.point_at_arc_length(s);
    let n = arc.normal_at(&point);
    let t = arc.tangent_at(&point);
    RayState::new(point, t * p + n * (1.0 - p * p).sqrt())
}

/// Next return to the left concave mirror in Birkhoff coordinates, within
/// `max_bounces`. `None` if the ray escapes or never returns.
pub fn left_mirror_return(geom: &CavityGeometry, s: f64, p: f64, max_bounces: u64) -> Result<Option<(f64, f64)>> {
    let arc = geom.arc(SurfaceId::LeftConcave);
    let mut state = left_mirror_state(geom, s, p);
    for _ in 0..max_bounces {
        let (next, event) = step(&state, geom)?;
        let Some(event) = event else { return Ok(None) };
        if event.surface == SurfaceId::LeftConcave {
            let t = arc.tangent_at(&event.point);
            return Ok(Some((arc.arc_length(&event.point), event.v_out.dot(&t))));
        }
        state = next;
    }
    Ok(None)
}

/// Central-difference Jacobian of [`left_mirror_return`] at `(s, p)`.
pub fn return_map_jacobian(geom: &CavityGeometry, s: f64, p: f64, h: f64) -> Result<Option<[[f64; 2]; 2]>> {
    let eval = |ds: f64, dp: f64| left_mirror_return(geom, s + ds, p + dp, 1_000);
    let (Some(sp), Some(sm), Some(pp), Some(pm)) = (eval(h, 0.0)?, eval(-h, 0.0)?, eval(0.0, h)?, eval(0.0, -h)?)
    else {
        return Ok(None);
    };
    let inv = 0.5 / h;
    Ok(Some([
        [(sp.0 - sm.0) * inv, (pp.0 - pm.0) * inv],
        [(sp.1 - sm.1) * inv, (pp.1 - pm.1) * inv],
    ]))
}
