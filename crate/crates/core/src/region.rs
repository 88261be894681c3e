//! Exact two-dimensional polytopes over the rationals.
//!
//! A [`Region2D`] is stored both as integer halfspaces `a1*d1 + a2*d2 <= b`
//! and as its canonical vertex list: extreme points only, counterclockwise,
//! starting from the lexicographically smallest `(d1, d2)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region is empty")]
    Empty,
    #[error("region is unbounded")]
    Unbounded,
    #[error("halfspace with zero normal")]
    ZeroNormal,
}

/// `a1*d1 + a2*d2 <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    pub a1: i64,
    pub a2: i64,
    pub b: i64,
}

impl Halfspace {
    pub const fn new(a1: i64, a2: i64, b: i64) -> Self {
        Halfspace { a1, a2, b }
    }

    /// Same halfspace with coefficients divided by their gcd.
    pub fn reduced(self) -> Self {
        let g = self.a1.gcd(&self.a2).gcd(&self.b);
        if g <= 1 {
            self
        } else {
            Halfspace::new(self.a1 / g, self.a2 / g, self.b / g)
        }
    }

    pub fn lhs(&self, p: &DofPoint) -> BigRational {
        rat(self.a1) * &p.d1 + rat(self.a2) * &p.d2
    }

    pub fn contains(&self, p: &DofPoint) -> bool {
        self.lhs(p) <= rat(self.b)
    }

    pub fn is_tight(&self, p: &DofPoint) -> bool {
        self.lhs(p) == rat(self.b)
    }
}

impl fmt::Display for Halfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*d1 + {}*d2 <= {}", self.a1, self.a2, self.b)
    }
}

pub(crate) fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// A DOF pair `(d1, d2)` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DofPoint {
    pub d1: BigRational,
    pub d2: BigRational,
}

impl DofPoint {
    pub fn new(d1: BigRational, d2: BigRational) -> Self {
        DofPoint { d1, d2 }
    }

    pub fn int(d1: i64, d2: i64) -> Self {
        DofPoint { d1: rat(d1), d2: rat(d2) }
    }

    pub fn sum(&self) -> BigRational {
        &self.d1 + &self.d2
    }

    pub fn is_integral(&self) -> bool {
        self.d1.is_integer() && self.d2.is_integer()
    }

    /// `"p/q"` strings, always with an explicit denominator.
    pub fn to_strings(&self) -> [String; 2] {
        [rational_string(&self.d1), rational_string(&self.d2)]
    }
}

impl fmt::Display for DofPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.d1, self.d2)
    }
}

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    (!q.is_zero()).then(|| BigRational::new(p, q))
}

fn cross(o: &DofPoint, a: &DofPoint, b: &DofPoint) -> BigRational {
    (&a.d1 - &o.d1) * (&b.d2 - &o.d2) - (&a.d2 - &o.d2) * (&b.d1 - &o.d1)
}

/// Extreme points of a finite point set, counterclockwise from the
/// lexicographically smallest one. Collinear interior points are dropped.
pub fn convex_hull(points: &[DofPoint]) -> Vec<DofPoint> {
    let mut pts: Vec<DofPoint> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<DofPoint> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<DofPoint> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Intersection of two boundary lines, if they are not parallel.
fn boundary_intersection(h: &Halfspace, g: &Halfspace) -> Option<DofPoint> {
    let det = h.a1 as i128 * g.a2 as i128 - h.a2 as i128 * g.a1 as i128;
    if det == 0 {
        return None;
    }
    let x = h.b as i128 * g.a2 as i128 - h.a2 as i128 * g.b as i128;
    let y = h.a1 as i128 * g.b as i128 - h.b as i128 * g.a1 as i128;
    let det = BigInt::from(det);
    Some(DofPoint::new(
        BigRational::new(BigInt::from(x), det.clone()),
        BigRational::new(BigInt::from(y), det),
    ))
}

/// A bounded convex polygon (possibly degenerate) in the nonnegative quadrant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region2D {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<DofPoint>,
}

impl Region2D {
    pub const NONNEGATIVE: [Halfspace; 2] = [Halfspace::new(-1, 0, 0), Halfspace::new(0, -1, 0)];

    /// Intersects the given halfspaces with the nonnegative quadrant and
    /// enumerates its vertices by pairwise boundary intersection.
    pub fn from_halfspaces(halfspaces: &[Halfspace]) -> Result<Region2D, RegionError> {
        let mut hs: Vec<Halfspace> = Self::NONNEGATIVE.to_vec();
        for h in halfspaces {
            if h.a1 == 0 && h.a2 == 0 {
                if h.b < 0 {
                    return Err(RegionError::Empty);
                }
                // 0 <= b: trivially satisfied
                continue;
            }
            let h = h.reduced();
            if !hs.contains(&h) {
                hs.push(h);
            }
        }
        if !recession_is_trivial(&hs) {
            return Err(RegionError::Unbounded);
        }
        let mut candidates = Vec::new();
        for (i, h) in hs.iter().enumerate() {
            for g in &hs[i + 1..] {
                if let Some(p) = boundary_intersection(h, g) {
                    if hs.iter().all(|k| k.contains(&p)) {
                        candidates.push(p);
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Err(RegionError::Empty);
        }
        Ok(Region2D { halfspaces: hs, vertices: convex_hull(&candidates) })
    }

    /// Convex hull of a nonempty set of integer points, with integer
    /// halfspaces read off the hull edges.
    pub fn from_integer_points(points: &[(i64, i64)]) -> Result<Region2D, RegionError> {
        if points.is_empty() {
            return Err(RegionError::Empty);
        }
        let pts: Vec<DofPoint> = points.iter().map(|&(a, b)| DofPoint::int(a, b)).collect();
        let hull = convex_hull(&pts);
        let int = |p: &DofPoint| -> (i64, i64) {
            let conv = |r: &BigRational| -> i64 {
                i64::try_from(r.to_integer()).expect("hull of integer points has integer vertices")
            };
            (conv(&p.d1), conv(&p.d2))
        };
        let corners: Vec<(i64, i64)> = hull.iter().map(int).collect();
        let mut hs: Vec<Halfspace> = Self::NONNEGATIVE.to_vec();
        let mut push = |h: Halfspace| {
            let h = h.reduced();
            if !hs.contains(&h) {
                hs.push(h);
            }
        };
        match corners.len() {
            1 => {
                let (x, y) = corners[0];
                push(Halfspace::new(1, 0, x));
                push(Halfspace::new(-1, 0, -x));
                push(Halfspace::new(0, 1, y));
                push(Halfspace::new(0, -1, -y));
            }
            2 => {
                let ((x0, y0), (x1, y1)) = (corners[0], corners[1]);
                let (dx, dy) = (x1 - x0, y1 - y0);
                // the supporting line, both orientations, then the two end caps
                push(Halfspace::new(dy, -dx, dy * x0 - dx * y0));
                push(Halfspace::new(-dy, dx, -(dy * x0 - dx * y0)));
                push(Halfspace::new(dx, dy, dx * x1 + dy * y1));
                push(Halfspace::new(-dx, -dy, -(dx * x0 + dy * y0)));
            }
            n => {
                for i in 0..n {
                    let (x0, y0) = corners[i];
                    let (x1, y1) = corners[(i + 1) % n];
                    let (dx, dy) = (x1 - x0, y1 - y0);
                    // outward normal of a counterclockwise edge
                    push(Halfspace::new(dy, -dx, dy * x0 - dx * y0));
                }
            }
        }
        Ok(Region2D { halfspaces: hs, vertices: hull })
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[DofPoint] {
        &self.vertices
    }

    pub fn contains(&self, p: &DofPoint) -> bool {
        self.halfspaces.iter().all(|h| h.contains(p))
    }

    /// Every vertex of `other` lies in `self`.
    pub fn contains_region(&self, other: &Region2D) -> bool {
        other.vertices.iter().all(|v| self.contains(v))
    }

    pub fn is_bounded(&self) -> bool {
        recession_is_trivial(&self.halfspaces)
    }

    /// Maximum of `w1*d1 + w2*d2` over the vertices.
    pub fn maximize(&self, w1: &BigRational, w2: &BigRational) -> Result<BigRational, RegionError> {
        if !self.is_bounded() {
            return Err(RegionError::Unbounded);
        }
        self.vertices
            .iter()
            .map(|v| w1 * &v.d1 + w2 * &v.d2)
            .max()
            .ok_or(RegionError::Empty)
    }
}

/// True when the only direction `r` with `a.r <= 0` for every halfspace is 0.
fn recession_is_trivial(hs: &[Halfspace]) -> bool {
    // Any nonzero recession cone in the plane has a boundary ray that is
    // orthogonal to one of the normals, so those directions suffice.
    hs.iter().all(|h| {
        [(-h.a2, h.a1), (h.a2, -h.a1)]
            .into_iter()
            .all(|(rx, ry)| hs.iter().any(|g| (g.a1 as i128) * (rx as i128) + (g.a2 as i128) * (ry as i128) > 0))
    })
}

/// Vertex-set equality of two canonical regions.
pub fn regions_equal(a: &Region2D, b: &Region2D) -> bool {
    a.vertices == b.vertices
}

/// Exact maximum of `d1 + d2` over a bounded region.
pub fn sum_dof_lp(region: &Region2D) -> Result<BigRational, RegionError> {
    region.maximize(&rat(1), &rat(1))
}

/// Order two points counterclockwise about a centre; used only in tests.
#[allow(dead_code)]
pub(crate) fn angular_cmp(c: &DofPoint, a: &DofPoint, b: &DofPoint) -> Ordering {
    let ax = (&a.d1 - &c.d1, &a.d2 - &c.d2);
    let bx = (&b.d1 - &c.d1, &b.d2 - &c.d2);
    let half = |p: &(BigRational, BigRational)| p.1.is_negative() || (p.1.is_zero() && p.0.is_negative());
    half(&ax).cmp(&half(&bx)).then_with(|| {
        let cr = &ax.0 * &bx.1 - &ax.1 * &bx.0;
        BigRational::zero().cmp(&cr)
    })
}
