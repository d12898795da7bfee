//! Balls, regions, rigid motions, and the canonical two-ball normalization.
//!
//! Regions form a small closed algebra — balls, half-spaces, slabs, boolean
//! combinations, and preimages under stored maps — which is enough to
//! describe every domain the extension pipelines produce.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::map::SmoothMap;

/// Ambient points are dynamically sized column vectors.
pub type Point = DVector<f64>;

/// Width of the band around region boundaries inside which membership is
/// reported as undecidable. Well above the evaluation noise of composed
/// double-precision maps.
pub const SEAM_TOL: f64 = 1e-9;

/// k-th standard basis vector of ℝⁿ.
pub fn unit_vec(dim: usize, axis: usize) -> Point {
    let mut v = DVector::zeros(dim);
    v[axis] = 1.0;
    v
}

/// Last basis vector eₙ.
pub fn e_last(dim: usize) -> Point {
    unit_vec(dim, dim - 1)
}

/// Open ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("ball center has non-finite coordinates".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &Point) -> bool {
        (x - &self.center).norm() < self.radius
    }

    pub fn region(&self) -> Region {
        Region::Ball(self.clone())
    }

    /// Unit ball of ℝⁿ.
    pub fn unit(dim: usize) -> Ball {
        Ball {
            center: DVector::zeros(dim),
            radius: 1.0,
        }
    }
}

/// South pole `center − radius·eₙ` of a ball.
pub fn south_pole(b: &Ball) -> Point {
    &b.center - b.radius * e_last(b.dim())
}

/// Membership classification against a tolerance band around the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}

/// A region of ℝⁿ with a signed margin function: positive inside, negative
/// outside, approximately the distance to the boundary for the analytic
/// kinds. Preimage regions evaluate their stored map and delegate, so their
/// margin is distorted by the map but keeps its sign.
#[derive(Clone, Debug)]
pub enum Region {
    /// All of ℝⁿ.
    All,
    Ball(Ball),
    BallComplement(Ball),
    /// `{x : x·normal > offset}` for a unit normal.
    HalfSpace { normal: Point, offset: f64 },
    /// `{x : low < x·normal < high}` for a unit normal.
    Slab { normal: Point, low: f64, high: f64 },
    /// `{x : map(x) ∈ target}`. Points where the map is singular belong to
    /// the region iff `singular_inside` (e.g. the origin for a region bounded
    /// by the inversion image of a sphere).
    Preimage {
        map: SmoothMap,
        target: Box<Region>,
        singular_inside: bool,
    },
    Intersection(Vec<Region>),
    Union(Vec<Region>),
    Difference(Box<Region>, Box<Region>),
    /// `inner` with a cheap enclosing-ball rejection test: points outside the
    /// hull are classified by the hull margin alone. The hull must contain
    /// the inner region.
    Guarded { hull: Ball, inner: Box<Region> },
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Region {
        Region::Ball(Ball { center, radius })
    }

    pub fn half_space_above(dim: usize, axis: usize, level: f64) -> Region {
        Region::HalfSpace {
            normal: unit_vec(dim, axis),
            offset: level,
        }
    }

    pub fn half_space_below(dim: usize, axis: usize, level: f64) -> Region {
        Region::HalfSpace {
            normal: -unit_vec(dim, axis),
            offset: -level,
        }
    }

    pub fn slab_along_last(dim: usize, low: f64, high: f64) -> Region {
        Region::Slab {
            normal: e_last(dim),
            low,
            high,
        }
    }

    /// `{x : map(x) ∈ target}` with singular points excluded.
    pub fn preimage(map: SmoothMap, target: Region) -> Region {
        Region::Preimage {
            map,
            target: Box::new(target),
            singular_inside: false,
        }
    }

    /// Translate of a region: `{x : x − shift ∈ self}`.
    pub fn translated(&self, shift: &Point) -> Region {
        Region::preimage(crate::map::translation(&(-shift)), self.clone())
    }

    /// Signed margin: positive inside, negative outside.
    pub fn margin(&self, x: &Point) -> f64 {
        match self {
            Region::All => f64::INFINITY,
            Region::Ball(b) => b.radius - (x - &b.center).norm(),
            Region::BallComplement(b) => (x - &b.center).norm() - b.radius,
            Region::HalfSpace { normal, offset } => x.dot(normal) - offset,
            Region::Slab { normal, low, high } => {
                let t = x.dot(normal);
                (t - low).min(high - t)
            }
            Region::Preimage {
                map,
                target,
                singular_inside,
            } => {
                if map.is_singular_at(x) {
                    if *singular_inside {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    target.margin(&map.eval(x))
                }
            }
            Region::Intersection(parts) => parts
                .iter()
                .map(|r| r.margin(x))
                .fold(f64::INFINITY, f64::min),
            Region::Union(parts) => parts
                .iter()
                .map(|r| r.margin(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Region::Difference(a, b) => a.margin(x).min(-b.margin(x)),
            Region::Guarded { hull, inner } => {
                let hm = hull.radius - (x - &hull.center).norm();
                if hm <= 0.0 {
                    hm
                } else {
                    inner.margin(x)
                }
            }
        }
    }

    /// Wrap in an enclosing-ball guard (cheap rejection for expensive
    /// preimage membership tests).
    pub fn guarded(self, hull: Ball) -> Region {
        Region::Guarded {
            hull,
            inner: Box::new(self),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.margin(x) > 0.0
    }

    pub fn classify(&self, x: &Point, tol: f64) -> Containment {
        let m = self.margin(x);
        if m.abs() <= tol {
            Containment::Boundary
        } else if m > 0.0 {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Strict membership that refuses to decide within `tol` of the boundary.
    pub fn contains_checked(&self, x: &Point, tol: f64) -> Result<bool> {
        match self.classify(x, tol) {
            Containment::Inside => Ok(true),
            Containment::Outside => Ok(false),
            Containment::Boundary => Err(Error::BoundaryUndecidable { tolerance: tol }),
        }
    }

    /// Axis-aligned bounding box, when one is derivable.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            Region::Ball(b) => {
                let r = DVector::from_element(b.dim(), b.radius);
                Some((&b.center - &r, &b.center + &r))
            }
            Region::Intersection(parts) => {
                let boxes: Vec<_> = parts.iter().filter_map(|r| r.bounding_box()).collect();
                let first = boxes.first()?;
                let mut lo = first.0.clone();
                let mut hi = first.1.clone();
                for (l, h) in boxes.iter().skip(1) {
                    lo.zip_apply(l, |a, b| *a = a.max(b));
                    hi.zip_apply(h, |a, b| *a = a.min(b));
                }
                Some((lo, hi))
            }
            Region::Union(parts) => {
                let mut boxes = parts.iter().map(|r| r.bounding_box());
                let (mut lo, mut hi) = boxes.next()??;
                for b in boxes {
                    let (l, h) = b?;
                    lo.zip_apply(&l, |a, b| *a = a.min(b));
                    hi.zip_apply(&h, |a, b| *a = a.max(b));
                }
                Some((lo, hi))
            }
            Region::Difference(a, _) => a.bounding_box(),
            Region::Guarded { hull, .. } => Region::Ball(hull.clone()).bounding_box(),
            _ => None,
        }
    }

    /// Points on (or numerically on) the region boundary. `window` bounds the
    /// patch radius used for unbounded kinds. Preimage boundaries are pulled
    /// back through the stored map's inverse when available.
    pub fn sample_boundary<R: Rng>(&self, rng: &mut R, count: usize, window: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(count);
        self.boundary_into(rng, count, window, &mut out);
        out
    }

    fn boundary_into<R: Rng>(&self, rng: &mut R, count: usize, window: f64, out: &mut Vec<Point>) {
        match self {
            Region::All => {}
            Region::Ball(b) | Region::BallComplement(b) => {
                for _ in 0..count {
                    let u = sphere_dir(rng, b.dim());
                    out.push(&b.center + b.radius * u);
                }
            }
            Region::HalfSpace { normal, offset } => {
                for _ in 0..count {
                    out.push(plane_point(rng, normal, *offset, window));
                }
            }
            Region::Slab { normal, low, high } => {
                for i in 0..count {
                    let level = if i % 2 == 0 { *low } else { *high };
                    out.push(plane_point(rng, normal, level, window));
                }
            }
            Region::Preimage { map, target, .. } => {
                if let Ok(inv) = map.inverse() {
                    let inner = target.sample_boundary(rng, count, window);
                    for y in inner {
                        if let Ok(x) = inv.evaluate(&y) {
                            out.push(x);
                        }
                    }
                }
            }
            Region::Intersection(parts) | Region::Union(parts) => {
                // Keep child-boundary points that remain on the compound boundary.
                let per = (count / parts.len().max(1)).max(1);
                for p in parts {
                    let cand = p.sample_boundary(rng, per * 2, window);
                    for x in cand {
                        if self.margin(&x).abs() <= 1e-7 {
                            out.push(x);
                        }
                    }
                }
            }
            Region::Difference(a, b) => {
                for p in [a.as_ref(), b.as_ref()] {
                    let cand = p.sample_boundary(rng, count, window);
                    for x in cand {
                        if self.margin(&x).abs() <= 1e-7 {
                            out.push(x);
                        }
                    }
                }
            }
            Region::Guarded { inner, .. } => {
                inner.boundary_into(rng, count, window, out);
            }
        }
    }
}

/// Uniform direction on the unit sphere (Box–Muller normals, normalized).
pub fn sphere_dir<R: Rng>(rng: &mut R, dim: usize) -> Point {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn plane_point<R: Rng>(rng: &mut R, normal: &Point, level: f64, window: f64) -> Point {
    let dim = normal.len();
    let raw = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0) * window;
    let tangential = &raw - normal * raw.dot(normal);
    tangential + normal * level
}

/// Orientation-preserving similarity `x ↦ scale·Q·x + shift` with Q a rotation.
#[derive(Clone, Debug)]
pub struct Similarity {
    pub rotation: DMatrix<f64>,
    pub shift: Point,
    pub scale: f64,
}

impl Similarity {
    pub fn identity(dim: usize) -> Similarity {
        Similarity {
            rotation: DMatrix::identity(dim, dim),
            shift: DVector::zeros(dim),
            scale: 1.0,
        }
    }

    pub fn translation(shift: Point) -> Similarity {
        let dim = shift.len();
        Similarity {
            rotation: DMatrix::identity(dim, dim),
            shift,
            scale: 1.0,
        }
    }

    pub fn dilation(dim: usize, scale: f64) -> Similarity {
        Similarity {
            rotation: DMatrix::identity(dim, dim),
            shift: DVector::zeros(dim),
            scale,
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.scale * (&self.rotation * x) + &self.shift
    }

    pub fn apply_ball(&self, b: &Ball) -> Ball {
        Ball {
            center: self.apply(&b.center),
            radius: self.scale.abs() * b.radius,
        }
    }

    pub fn inverse(&self) -> Similarity {
        let rot_t = self.rotation.transpose();
        let shift = -(&rot_t * &self.shift) / self.scale;
        Similarity {
            rotation: rot_t,
            shift,
            scale: 1.0 / self.scale,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        Similarity {
            rotation: &self.rotation * &other.rotation,
            shift: self.scale * (&self.rotation * &other.shift) + &self.shift,
            scale: self.scale * other.scale,
        }
    }
}

/// Rotation taking the unit vector `from` to the unit vector `to`, acting in
/// their common plane and fixing its orthogonal complement.
pub fn rotation_between(from: &Point, to: &Point) -> DMatrix<f64> {
    let dim = from.len();
    let c = from.dot(to);
    let ident = DMatrix::identity(dim, dim);
    if c > 1.0 - 1e-14 {
        return ident;
    }
    if c < -1.0 + 1e-14 {
        // Rotation by pi in a plane containing `from`: from → −from, w → −w.
        let mut other = unit_vec(dim, 0);
        if from[0].abs() > 0.9 {
            other = unit_vec(dim, 1.min(dim - 1));
        }
        let w0 = &other - from * from.dot(&other);
        let w = &w0 / w0.norm();
        return ident - 2.0 * (from * from.transpose()) - 2.0 * (&w * w.transpose());
    }
    let w0 = to - from * c;
    let s = w0.norm();
    let w = w0 / s;
    ident + s * (&w * from.transpose() - from * w.transpose())
        + (c - 1.0) * (from * from.transpose() + &w * w.transpose())
}

/// Canonical placement of two nested balls: both centers on the xₙ-axis, at
/// non-positive heights, with the sphere `∂B(0,r)` tangent to both boundary
/// spheres from inside the collar.
#[derive(Clone, Debug)]
pub struct NormalizedPair {
    /// Rigid motion carrying the input balls onto `ball1`, `ball2`.
    pub similarity: Similarity,
    pub ball1: Ball,
    pub ball2: Ball,
    /// Radius r of the tangent sphere centered at the origin.
    pub tangent_radius: f64,
    /// South pole of `ball1` after normalization.
    pub south_pole_1: Point,
    /// South pole of `ball2` after normalization.
    pub south_pole_2: Point,
}

/// Place strictly nested balls `closure(b1) ⊂ b2` in the canonical tangent
/// configuration. The tangent radius is `r = (d + r₂ − r₁)/2` with
/// `d = |center₂ − center₁|`, and centers land at `−(r+r₁)eₙ`, `−(r₂−r)eₙ`.
pub fn normalize_balls(b1: &Ball, b2: &Ball) -> Result<NormalizedPair> {
    let dim = b1.dim();
    if dim != b2.dim() {
        return Err(Error::InvalidGeometry("balls live in different dimensions".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidGeometry("ambient dimension must be at least 2".into()));
    }
    let d = (&b2.center - &b1.center).norm();
    if d + b1.radius >= b2.radius {
        return Err(Error::InvalidGeometry(format!(
            "closure(b1) must lie strictly inside b2: |c2-c1| + r1 = {} >= r2 = {}",
            d + b1.radius,
            b2.radius
        )));
    }
    let r = (d + b2.radius - b1.radius) / 2.0;
    let en = e_last(dim);
    let t = -(r + b1.radius) * &en;
    let z = -(b2.radius - r) * &en;

    // Rigid motion: rotate the center axis onto eₙ, then translate c1 to t.
    let rotation = if d > 1e-14 {
        let u = (&b2.center - &b1.center) / d;
        rotation_between(&u, &en)
    } else {
        DMatrix::identity(dim, dim)
    };
    let shift = &t - &rotation * &b1.center;
    let similarity = Similarity {
        rotation,
        shift,
        scale: 1.0,
    };

    let ball1 = Ball {
        center: t.clone(),
        radius: b1.radius,
    };
    let ball2 = Ball {
        center: z.clone(),
        radius: b2.radius,
    };
    let south_pole_1 = south_pole(&ball1);
    let south_pole_2 = south_pole(&ball2);
    Ok(NormalizedPair {
        similarity,
        ball1,
        ball2,
        tangent_radius: r,
        south_pole_1,
        south_pole_2,
    })
}
