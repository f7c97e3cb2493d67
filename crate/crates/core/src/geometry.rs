//! Cavity construction and closed-form paraxial analysis.
//!
//! Coordinates: `z` runs along the optical axis with the left concave vertex
//! at the origin, `y` is transverse. All lengths are in metres and the ray
//! speed is fixed at 1 m/s, so times in seconds equal path lengths.
//!
//! The cavity is four circular arcs. The two end mirrors are concave with
//! radius `R` and half-aperture `b`. The central element is a closed biconvex
//! lens made of two arcs of radius `r` that meet at `(l_left + s, ±a)`, where
//! `s = r - sqrt(r² - a²)` is the sagitta of one arc.

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ray speed used throughout, in m/s.
pub const SPEED: f64 = 1.0;

/// `|m - 1|` below this is classified as marginally stable.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Radius of curvature of the two concave end mirrors (`R`).
    pub concave_radius: f64,
    /// Radius of curvature of the two convex faces of the central element (`r`).
    pub convex_radius: f64,
    /// Vertex-to-vertex length of the left sub-cavity.
    pub l_left: f64,
    /// Vertex-to-vertex length of the right sub-cavity.
    pub l_right: f64,
    /// Half-aperture of the central element (`a`).
    pub element_aperture: f64,
    /// Half-aperture of the end mirrors (`b`).
    pub mirror_aperture: f64,
}

impl CavityConfig {
    pub const DEFAULT_ELEMENT_APERTURE: f64 = 0.003;
    pub const DEFAULT_MIRROR_APERTURE: f64 = 0.025;

    /// A cavity with the default apertures `a = 0.003`, `b = 0.025`.
    pub fn new(concave_radius: f64, convex_radius: f64, l_left: f64, l_right: f64) -> Self {
        CavityConfig {
            concave_radius,
            convex_radius,
            l_left,
            l_right,
            element_aperture: Self::DEFAULT_ELEMENT_APERTURE,
            mirror_aperture: Self::DEFAULT_MIRROR_APERTURE,
        }
    }

    /// Axial depth of one convex face.
    pub fn sagitta(&self) -> f64 {
        sagitta(self.convex_radius, self.element_aperture)
    }

    /// Vertex-to-vertex distance between the two concave mirrors.
    pub fn total_length(&self) -> f64 {
        self.l_left + self.l_right + 2.0 * self.sagitta()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.concave_radius,
            self.convex_radius,
            self.l_left,
            self.l_right,
            self.element_aperture,
            self.mirror_aperture,
        ];
        if !fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidCavity("all parameters > 0"));
        }
        if self.element_aperture >= self.convex_radius {
            return Err(Error::InvalidCavity("a < r"));
        }
        if self.mirror_aperture >= self.concave_radius {
            return Err(Error::InvalidCavity("b < R"));
        }
        if self.element_aperture >= self.mirror_aperture {
            return Err(Error::InvalidCavity("a < b"));
        }
        if self.l_left >= self.concave_radius {
            return Err(Error::InvalidCavity("l_left < R"));
        }
        if self.l_right >= self.concave_radius {
            return Err(Error::InvalidCavity("l_right < R"));
        }
        if self.total_length() >= 2.0 * self.concave_radius {
            return Err(Error::InvalidCavity("L < 2R"));
        }
        Ok(())
    }

    /// The same cavity seen from the other end.
    pub fn mirrored(&self) -> Self {
        CavityConfig {
            l_left: self.l_right,
            l_right: self.l_left,
            ..*self
        }
    }
}

/// `r - sqrt(r² - a²)`, evaluated without cancellation for small `a`.
pub fn sagitta(radius: f64, half_aperture: f64) -> f64 {
    let a2 = half_aperture * half_aperture;
    a2 / (radius + (radius * radius - a2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SurfaceId {
    LeftConcave,
    LeftConvex,
    RightConvex,
    RightConcave,
}

impl SurfaceId {
    pub const ALL: [SurfaceId; 4] = [
        SurfaceId::LeftConcave,
        SurfaceId::LeftConvex,
        SurfaceId::RightConvex,
        SurfaceId::RightConcave,
    ];

    pub fn is_concave(self) -> bool {
        matches!(self, SurfaceId::LeftConcave | SurfaceId::RightConcave)
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceId::LeftConcave => "LeftConcave",
            SurfaceId::LeftConvex => "LeftConvex",
            SurfaceId::RightConvex => "RightConvex",
            SurfaceId::RightConcave => "RightConcave",
        }
    }
}

/// Axial direction a reflective surface faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    PlusZ,
    MinusZ,
}

impl Facing {
    pub fn sign(self) -> f64 {
        match self {
            Facing::PlusZ => 1.0,
            Facing::MinusZ => -1.0,
        }
    }
}

/// One reflective circular arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcMirror {
    pub id: SurfaceId,
    pub center: Point2<f64>,
    pub radius: f64,
    /// Largest `|y|` of a valid impact point.
    pub aperture_half: f64,
    pub facing: Facing,
    /// Axial extreme point of the arc, on the optical axis.
    pub vertex: Point2<f64>,
}

impl ArcMirror {
    /// Which half of the circle carries the arc, as the sign of `z - center.z`.
    ///
    /// A concave arc sits on the side opposite to the one it faces, a convex
    /// arc on the same side.
    pub fn side(&self) -> f64 {
        if self.id.is_concave() {
            -self.facing.sign()
        } else {
            self.facing.sign()
        }
    }

    /// Signed curvature `κ` such that the reflective normal is `κ (p - center)`.
    pub fn curvature(&self) -> f64 {
        if self.id.is_concave() {
            -1.0 / self.radius
        } else {
            1.0 / self.radius
        }
    }

    /// Point of the arc at transverse height `y`.
    pub fn point_at(&self, y: f64) -> Point2<f64> {
        let dz = (self.radius * self.radius - y * y).sqrt();
        Point2::new(self.center.x + self.side() * dz, y)
    }

    /// Unit normal on the reflective side at a point of the arc.
    pub fn normal_at(&self, p: &Point2<f64>) -> Vector2<f64> {
        let radial = (p - self.center).normalize();
        if self.id.is_concave() {
            -radial
        } else {
            radial
        }
    }

    /// Unit tangent with positive `y` component.
    pub fn tangent_at(&self, p: &Point2<f64>) -> Vector2<f64> {
        let n = self.normal_at(p);
        let t = Vector2::new(-n.y, n.x);
        if t.y < 0.0 {
            -t
        } else {
            t
        }
    }

    /// Whether `p`, assumed on the circle, lies on the arc itself.
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.y.abs() <= self.aperture_half && (p.x - self.center.x) * self.side() > 0.0
    }

    /// Signed arc length from the vertex, positive toward `+y`.
    pub fn arc_length(&self, p: &Point2<f64>) -> f64 {
        self.radius * (p.y / self.radius).asin()
    }

    /// Inverse of [`ArcMirror::arc_length`].
    pub fn point_at_arc_length(&self, s: f64) -> Point2<f64> {
        self.point_at(self.radius * (s / self.radius).sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityGeometry {
    pub config: CavityConfig,
    /// Ordered as [`SurfaceId::ALL`].
    pub arcs: [ArcMirror; 4],
    pub total_length: f64,
    pub sagitta: f64,
}

impl CavityGeometry {
    pub fn arc(&self, id: SurfaceId) -> &ArcMirror {
        &self.arcs[id as usize]
    }

    /// z of the plane through the lens edge points.
    pub fn element_plane(&self) -> f64 {
        self.config.l_left + self.sagitta
    }
}

pub fn build_cavity(config: &CavityConfig) -> Result<CavityGeometry> {
    config.validate()?;
    let big_r = config.concave_radius;
    let r = config.convex_radius;
    let s = config.sagitta();
    let length = config.total_length();
    let right_vertex = config.l_left + 2.0 * s;

    let arcs = [
        ArcMirror {
            id: SurfaceId::LeftConcave,
            center: Point2::new(big_r, 0.0),
            radius: big_r,
            aperture_half: config.mirror_aperture,
            facing: Facing::PlusZ,
            vertex: Point2::origin(),
        },
        ArcMirror {
            id: SurfaceId::LeftConvex,
            center: Point2::new(config.l_left + r, 0.0),
            radius: r,
            aperture_half: config.element_aperture,
            facing: Facing::MinusZ,
            vertex: Point2::new(config.l_left, 0.0),
        },
        ArcMirror {
            id: SurfaceId::RightConvex,
            center: Point2::new(right_vertex - r, 0.0),
            radius: r,
            aperture_half: config.element_aperture,
            facing: Facing::PlusZ,
            vertex: Point2::new(right_vertex, 0.0),
        },
        ArcMirror {
            id: SurfaceId::RightConcave,
            center: Point2::new(length - big_r, 0.0),
            radius: big_r,
            aperture_half: config.mirror_aperture,
            facing: Facing::MinusZ,
            vertex: Point2::new(length, 0.0),
        },
    ];

    Ok(CavityGeometry {
        config: *config,
        arcs,
        total_length: length,
        sagitta: s,
    })
}

/// Half-trace of the round-trip ABCD matrix of a concave/convex sub-cavity.
pub fn half_trace(concave_radius: f64, convex_radius: f64, length: f64) -> f64 {
    2.0 * (1.0 - length / concave_radius) * (1.0 + length / convex_radius) - 1.0
}

/// Round-trip transverse magnification `m + sqrt(m² - 1)` of an unstable
/// (or marginal) sub-cavity.
pub fn magnification(m: f64) -> Result<f64> {
    if m.is_nan() || m < 1.0 {
        return Err(Error::StableSubCavity(m));
    }
    Ok(m + (m * m - 1.0).sqrt())
}

/// Lyapunov exponent of the axial orbit of a sub-cavity of length `length`:
/// one round trip takes `2 length / speed` and stretches by `magnification`.
pub fn lyapunov_axial(magnification: f64, length: f64, speed: f64) -> f64 {
    speed / (2.0 * length) * magnification.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Unstable,
    Marginal,
    Stable,
}

impl Stability {
    pub fn from_half_trace(m: f64) -> Self {
        if (m - 1.0).abs() <= MARGINAL_TOLERANCE {
            Stability::Marginal
        } else if m > 1.0 {
            Stability::Unstable
        } else {
            Stability::Stable
        }
    }

    pub fn code(self) -> char {
        match self {
            Stability::Unstable => 'U',
            Stability::Marginal => 'M',
            Stability::Stable => 'S',
        }
    }
}

/// Paraxial stability of one sub-cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubCavity {
    pub half_trace: f64,
    pub stability: Stability,
    pub magnification: Option<f64>,
    pub lambda0: Option<f64>,
}

impl SubCavity {
    fn analyse(concave_radius: f64, convex_radius: f64, length: f64) -> Self {
        let m = half_trace(concave_radius, convex_radius, length);
        let stability = Stability::from_half_trace(m);
        let magnification = match stability {
            Stability::Unstable => magnification(m).ok(),
            _ => None,
        };
        SubCavity {
            half_trace: m,
            stability,
            magnification,
            lambda0: magnification.map(|mag| lyapunov_axial(mag, length, SPEED)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParaxialReport {
    pub left: SubCavity,
    pub right: SubCavity,
}

impl ParaxialReport {
    /// Two-letter code such as `"US"`: left sub-cavity first.
    pub fn label(&self) -> String {
        [self.left.stability.code(), self.right.stability.code()]
            .iter()
            .collect()
    }
}

pub fn classify(config: &CavityConfig) -> ParaxialReport {
    ParaxialReport {
        left: SubCavity::analyse(config.concave_radius, config.convex_radius, config.l_left),
        right: SubCavity::analyse(config.concave_radius, config.convex_radius, config.l_right),
    }
}
