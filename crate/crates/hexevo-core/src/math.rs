//! Small geometry kit: 3-vectors, unit quaternions, planar rigid fits and a
//! least-squares support plane. Enough for the quasi-static simulator without
//! pulling in a linear-algebra dependency.
//!
//! Scalar transcendentals go through the [`scalar`] shim so the crate builds
//! both with `std` intrinsics and with `libm` under `no_std`.

/// f64 transcendentals usable from `no_std` builds.
pub mod scalar {
    #[cfg(feature = "std")]
    #[inline]
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn tan(x: f64) -> f64 {
        x.tan()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn atan(x: f64) -> f64 {
        x.atan()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn atan2(y: f64, x: f64) -> f64 {
        y.atan2(x)
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn asin(x: f64) -> f64 {
        x.asin()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
    #[cfg(feature = "std")]
    #[inline]
    pub fn round(x: f64) -> f64 {
        x.round()
    }

    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn tan(x: f64) -> f64 {
        libm::tan(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn atan(x: f64) -> f64 {
        libm::atan(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn atan2(y: f64, x: f64) -> f64 {
        libm::atan2(y, x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn asin(x: f64) -> f64 {
        libm::asin(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
}

/// Plain 3-vector in meters (x forward along the course, y left, z up).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    #[inline]
    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        scalar::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Unit quaternion (w, x, y, z) encoding body orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn mul(self, o: Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        scalar::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        Quat { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    pub fn neg(self) -> Quat {
        Quat { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotate a vector by this quaternion (active rotation).
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // q * (0, v) * q^-1 expanded.
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let tx = 2.0 * (y * v.z - z * v.y);
        let ty = 2.0 * (z * v.x - x * v.z);
        let tz = 2.0 * (x * v.y - y * v.x);
        Vec3::new(
            v.x + w * tx + (y * tz - z * ty),
            v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx),
        )
    }

    /// Build from intrinsic Z-Y-X angles: yaw about z, then pitch about the
    /// new y, then roll about the new x.
    pub fn from_zyx(yaw: f64, pitch: f64, roll: f64) -> Quat {
        let qz = Quat {
            w: scalar::cos(yaw * 0.5),
            x: 0.0,
            y: 0.0,
            z: scalar::sin(yaw * 0.5),
        };
        let qy = Quat {
            w: scalar::cos(pitch * 0.5),
            x: 0.0,
            y: scalar::sin(pitch * 0.5),
            z: 0.0,
        };
        let qx = Quat {
            w: scalar::cos(roll * 0.5),
            x: scalar::sin(roll * 0.5),
            y: 0.0,
            z: 0.0,
        };
        qz.mul(qy).mul(qx)
    }

    /// Decompose into intrinsic Z-Y-X (yaw, pitch, roll).
    ///
    /// Positive pitch tips the nose down; positive roll lifts the left side.
    pub fn to_zyx(self) -> (f64, f64, f64) {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let r20 = 2.0 * (x * z - w * y);
        let r10 = 2.0 * (x * y + w * z);
        let r00 = 1.0 - 2.0 * (y * y + z * z);
        let r21 = 2.0 * (y * z + w * x);
        let r22 = 1.0 - 2.0 * (x * x + y * y);
        let sp = (-r20).clamp(-1.0, 1.0);
        let pitch = scalar::asin(sp);
        let yaw = scalar::atan2(r10, r00);
        let roll = scalar::atan2(r21, r22);
        (yaw, pitch, roll)
    }
}

/// Optimal planar rigid motion (rotation `theta` about the source centroid
/// plus translation) mapping `from` points onto `to` points in least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFit {
    pub theta: f64,
    pub from_centroid: (f64, f64),
    pub to_centroid: (f64, f64),
}

impl PlanarFit {
    pub fn identity() -> PlanarFit {
        PlanarFit { theta: 0.0, from_centroid: (0.0, 0.0), to_centroid: (0.0, 0.0) }
    }

    /// Apply the fitted motion to an arbitrary point.
    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        let (cx, cy) = self.from_centroid;
        let (dx, dy) = (p.0 - cx, p.1 - cy);
        let (c, s) = (scalar::cos(self.theta), scalar::sin(self.theta));
        (self.to_centroid.0 + c * dx - s * dy, self.to_centroid.1 + s * dx + c * dy)
    }
}

/// Closed-form planar least-squares rigid fit over paired points.
///
/// One pair degenerates to pure translation; zero pairs to the identity.
pub fn planar_rigid_fit(pairs: &[((f64, f64), (f64, f64))]) -> PlanarFit {
    if pairs.is_empty() {
        return PlanarFit::identity();
    }
    let n = pairs.len() as f64;
    let mut fc = (0.0, 0.0);
    let mut tc = (0.0, 0.0);
    for ((fx, fy), (tx, ty)) in pairs {
        fc.0 += fx;
        fc.1 += fy;
        tc.0 += tx;
        tc.1 += ty;
    }
    fc = (fc.0 / n, fc.1 / n);
    tc = (tc.0 / n, tc.1 / n);
    let mut cross = 0.0;
    let mut dot = 0.0;
    for ((fx, fy), (tx, ty)) in pairs {
        let (ax, ay) = (fx - fc.0, fy - fc.1);
        let (bx, by) = (tx - tc.0, ty - tc.1);
        cross += ax * by - ay * bx;
        dot += ax * bx + ay * by;
    }
    let theta = if cross == 0.0 && dot == 0.0 { 0.0 } else { scalar::atan2(cross, dot) };
    PlanarFit { theta, from_centroid: fc, to_centroid: tc }
}

/// Least-squares plane `z = z0 + a*x + b*y` through 3D points.
/// Returns `None` when the points do not span a plane (fewer than three, or
/// collinear in the horizontal projection).
pub fn support_plane(points: &[Vec3]) -> Option<(f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    for p in points {
        mx += p.x;
        my += p.y;
        mz += p.z;
    }
    mx /= n;
    my /= n;
    mz /= n;
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy, dz) = (p.x - mx, p.y - my, p.z - mz);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    if det.abs() < 1e-9 {
        return None;
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;
    Some((a, b))
}

/// Where a point sits relative to the convex hull of up to a handful of
/// planar support points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportQuery {
    /// Inside the hull or on its boundary (including degenerate hulls).
    Inside,
    /// Outside; carries the unit direction from the nearest hull feature
    /// toward the query point.
    Outside(f64, f64),
    /// No support points at all.
    Empty,
}

/// Classify `com` against the convex hull of `pts`.
///
/// Handles the degenerate cases (single point, segment, collinear sets) that
/// a tripod walker routinely produces. A query point lying on the hull
/// boundary itself counts as `Inside` (marginally supported), so callers
/// never receive a noise-directed outside vector.
pub fn support_query(pts: &[(f64, f64)], com: (f64, f64)) -> SupportQuery {
    if pts.is_empty() {
        return SupportQuery::Empty;
    }
    // Nearest point on the hull boundary == nearest point over all edges of
    // the convex hull; for <= 6 points checking all pairwise segments is
    // equivalent because the nearest hull point lies on some pairwise segment
    // or vertex, and interior classification is done separately.
    if separating_direction(pts, com).is_some() {
        let (nx, ny) = nearest_on_segments(pts, com);
        let (dx, dy) = (com.0 - nx, com.1 - ny);
        let d = scalar::sqrt(dx * dx + dy * dy);
        if d > 1e-9 {
            return SupportQuery::Outside(dx / d, dy / d);
        }
    }
    SupportQuery::Inside
}

/// Find a unit direction `d` with `d . (p - com) <= eps` for every support
/// point, i.e. a witness that `com` is outside (or on the fringe of) the
/// hull. Returns `None` when `com` is strictly inside.
fn separating_direction(pts: &[(f64, f64)], com: (f64, f64)) -> Option<(f64, f64)> {
    const EPS: f64 = 1e-12;
    let rel: alloc::vec::Vec<(f64, f64)> =
        pts.iter().map(|p| (p.0 - com.0, p.1 - com.1)).collect();
    // Candidate separating normals: each edge normal plus each vertex
    // direction (covers degenerate hulls).
    let mut candidates: alloc::vec::Vec<(f64, f64)> = alloc::vec::Vec::new();
    for i in 0..rel.len() {
        for j in (i + 1)..rel.len() {
            let (ex, ey) = (rel[j].0 - rel[i].0, rel[j].1 - rel[i].1);
            let n = scalar::sqrt(ex * ex + ey * ey);
            if n > EPS {
                candidates.push((ey / n, -ex / n));
                candidates.push((-ey / n, ex / n));
            }
        }
        let n = scalar::sqrt(rel[i].0 * rel[i].0 + rel[i].1 * rel[i].1);
        if n > EPS {
            candidates.push((-rel[i].0 / n, -rel[i].1 / n));
        }
    }
    if candidates.is_empty() {
        // All support points coincide with the query point.
        return Some((1.0, 0.0));
    }
    for (cx, cy) in candidates {
        if rel.iter().all(|(px, py)| cx * px + cy * py <= EPS) {
            return Some((-cx, -cy));
        }
    }
    None
}

fn nearest_on_segments(pts: &[(f64, f64)], com: (f64, f64)) -> (f64, f64) {
    let mut best = pts[0];
    let mut best_d2 = f64::INFINITY;
    let mut consider = |p: (f64, f64)| {
        let d2 = (p.0 - com.0) * (p.0 - com.0) + (p.1 - com.1) * (p.1 - com.1);
        if d2 < best_d2 {
            best_d2 = d2;
            best = p;
        }
    };
    for i in 0..pts.len() {
        consider(pts[i]);
        for j in (i + 1)..pts.len() {
            let (ax, ay) = pts[i];
            let (ex, ey) = (pts[j].0 - ax, pts[j].1 - ay);
            let len2 = ex * ex + ey * ey;
            if len2 > 1e-24 {
                let t = (((com.0 - ax) * ex + (com.1 - ay) * ey) / len2).clamp(0.0, 1.0);
                consider((ax + t * ex, ay + t * ey));
            }
        }
    }
    best
}

/// Standard normal draw via Box-Muller; consumes exactly two uniforms.
pub fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1], keeps ln finite
    let u2: f64 = rng.gen();
    scalar::sqrt(-2.0 * scalar::ln(u1)) * scalar::cos(core::f64::consts::TAU * u2)
}

/// Sample covariance (n - 1 normalization) of two equally long series.
/// Returns 0 for series shorter than two points.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mx: f64 = xs[..n].iter().sum::<f64>() / nf;
    let my: f64 = ys[..n].iter().sum::<f64>() / nf;
    let mut acc = 0.0;
    for i in 0..n {
        acc += (xs[i] - mx) * (ys[i] - my);
    }
    acc / (nf - 1.0)
}
