//! Smooth obstacle primitives: balls, axis-aligned ellipsoids and capsules.
//!
//! Every primitive reports a signed distance that is positive outside the
//! primitive, an outward unit normal, and principal curvatures with respect
//! to the normal pointing *into* the primitive (so convex shapes have
//! non-negative curvatures).

use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::scalar::Real;

/// Points are stored padded to three components; unused trailing
/// components are zero.
pub type Point<T> = [T; 3];

pub fn dot<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub<T: Real>(a: &Point<T>, b: &Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add_scaled<T: Real>(a: &Point<T>, s: T, b: &Point<T>) -> Point<T> {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

pub fn norm<T: Real>(a: &Point<T>) -> T {
    dot(a, a).sqrt()
}

pub fn point_from_slice<T: Real>(xs: &[T]) -> Point<T> {
    let mut p = [T::zero(); 3];
    for (dst, src) in p.iter_mut().zip(xs) {
        *dst = *src;
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub enum Primitive<T> {
    Ball { center: Point<T>, radius: T },
    /// Axis-aligned ellipse (2D) or ellipsoid (3D).
    Ellipsoid { center: Point<T>, semi_axes: Point<T> },
    /// Points within `radius` of the segment `a`–`b`.
    ///
    /// The boundary is only C^{1,1} where the caps meet the sides.
    Capsule { a: Point<T>, b: Point<T>, radius: T },
}

impl<T: Real> Primitive<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Primitive::Ball { .. } => "ball",
            Primitive::Ellipsoid { .. } => "ellipsoid",
            Primitive::Capsule { .. } => "capsule",
        }
    }

    /// Interior reference point the primitive is star-shaped about.
    pub fn center(&self) -> Point<T> {
        match self {
            Primitive::Ball { center, .. } | Primitive::Ellipsoid { center, .. } => *center,
            Primitive::Capsule { a, b, .. } => [
                (a[0] + b[0]) * T::half(),
                (a[1] + b[1]) * T::half(),
                (a[2] + b[2]) * T::half(),
            ],
        }
    }

    /// Smallest length scale of the primitive (used for resolution checks).
    pub fn min_radius(&self, dim: usize) -> T {
        match self {
            Primitive::Ball { radius, .. } | Primitive::Capsule { radius, .. } => *radius,
            Primitive::Ellipsoid { semi_axes, .. } => {
                semi_axes[..dim].iter().copied().fold(T::infinity(), T::min)
            }
        }
    }

    /// Radius of a ball about [`Self::center`] containing the primitive.
    pub fn extent(&self, dim: usize) -> T {
        match self {
            Primitive::Ball { radius, .. } => *radius,
            Primitive::Ellipsoid { semi_axes, .. } => {
                semi_axes[..dim].iter().copied().fold(T::zero(), T::max)
            }
            Primitive::Capsule { a, b, radius } => norm(&sub(b, a)) * T::half() + *radius,
        }
    }

    /// Largest principal curvature over the whole surface.
    pub fn max_curvature(&self, dim: usize) -> T {
        match self {
            Primitive::Ball { radius, .. } | Primitive::Capsule { radius, .. } => T::one() / *radius,
            Primitive::Ellipsoid { semi_axes, .. } => {
                let axes = &semi_axes[..dim];
                let lo = axes.iter().copied().fold(T::infinity(), T::min);
                let hi = axes.iter().copied().fold(T::zero(), T::max);
                hi / (lo * lo)
            }
        }
    }

    /// Signed distance to the surface, positive outside.
    pub fn signed_distance(&self, x: &Point<T>, dim: usize) -> T {
        match self {
            Primitive::Ball { center, radius } => norm(&sub(x, center)) - *radius,
            Primitive::Ellipsoid { center, semi_axes } => {
                let y = sub(x, center);
                ellipsoid_signed_distance(&y, semi_axes, dim)
            }
            Primitive::Capsule { a, b, radius } => {
                let c = closest_on_segment(x, a, b);
                norm(&sub(x, &c)) - *radius
            }
        }
    }

    /// Outward unit normal at (or near) a surface point.
    pub fn outward_normal(&self, x: &Point<T>, dim: usize) -> Point<T> {
        let n = match self {
            Primitive::Ball { center, .. } => sub(x, center),
            Primitive::Ellipsoid { center, semi_axes } => {
                let y = sub(x, center);
                let mut g = [T::zero(); 3];
                for k in 0..dim {
                    g[k] = y[k] / (semi_axes[k] * semi_axes[k]);
                }
                g
            }
            Primitive::Capsule { a, b, .. } => sub(x, &closest_on_segment(x, a, b)),
        };
        let len = norm(&n);
        [n[0] / len, n[1] / len, n[2] / len]
    }

    /// Principal curvatures at surface point `x` (dim − 1 values), taken
    /// with respect to the normal pointing into the primitive.
    pub fn principal_curvatures(&self, x: &Point<T>, dim: usize) -> Vec<T> {
        match self {
            Primitive::Ball { radius, .. } => vec![T::one() / *radius; dim.saturating_sub(1)],
            Primitive::Ellipsoid { center, semi_axes } => {
                let y = sub(x, center);
                let mut grad = [T::zero(); 3];
                let mut hess = [T::zero(); 3];
                for k in 0..dim {
                    let e2 = semi_axes[k] * semi_axes[k];
                    grad[k] = T::two() * y[k] / e2;
                    hess[k] = T::two() / e2;
                }
                let g = norm(&grad);
                let n = [grad[0] / g, grad[1] / g, grad[2] / g];
                let basis = tangent_basis(&n, dim);
                let form = |u: &Point<T>, v: &Point<T>| {
                    (u[0] * hess[0] * v[0] + u[1] * hess[1] * v[1] + u[2] * hess[2] * v[2]) / g
                };
                match basis.len() {
                    0 => vec![],
                    1 => vec![form(&basis[0], &basis[0])],
                    _ => {
                        let a = form(&basis[0], &basis[0]);
                        let b = form(&basis[0], &basis[1]);
                        let c = form(&basis[1], &basis[1]);
                        let mean = (a + c) * T::half();
                        let disc = (((a - c) * T::half()).powi(2) + b * b).sqrt();
                        vec![mean + disc, mean - disc]
                    }
                }
            }
            Primitive::Capsule { a, b, radius } => {
                let axis = sub(b, a);
                let len2 = dot(&axis, &axis);
                let s = if len2 > T::zero() { dot(&sub(x, a), &axis) / len2 } else { T::zero() };
                let on_cap = s <= T::zero() || s >= T::one();
                let k = T::one() / *radius;
                match dim {
                    2 => vec![if on_cap { k } else { T::zero() }],
                    3 => {
                        if on_cap {
                            vec![k, k]
                        } else {
                            vec![k, T::zero()]
                        }
                    }
                    _ => vec![],
                }
            }
        }
    }

    /// Point where the ray from [`Self::center`] in direction `dir` leaves the
    /// primitive.
    pub fn ray_exit(&self, dir: &Point<T>, dim: usize) -> Result<Point<T>> {
        let c = self.center();
        match self {
            Primitive::Ball { radius, .. } => Ok(add_scaled(&c, *radius, dir)),
            Primitive::Ellipsoid { semi_axes, .. } => {
                let mut q = T::zero();
                for k in 0..dim {
                    q = q + (dir[k] / semi_axes[k]).powi(2);
                }
                Ok(add_scaled(&c, T::one() / q.sqrt(), dir))
            }
            Primitive::Capsule { .. } => {
                let hi = self.extent(dim) * T::two();
                let t = bisect(
                    |t| self.signed_distance(&add_scaled(&c, t, dir), dim),
                    T::zero(),
                    hi,
                    T::epsilon() * hi * T::lit(4.0),
                )?;
                Ok(add_scaled(&c, t, dir))
            }
        }
    }
}

fn closest_on_segment<T: Real>(x: &Point<T>, a: &Point<T>, b: &Point<T>) -> Point<T> {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == T::zero() {
        return *a;
    }
    let s = (dot(&sub(x, a), &ab) / len2).max(T::zero()).min(T::one());
    add_scaled(a, s, &ab)
}

/// Orthonormal basis of the plane orthogonal to unit `n` within the first
/// `dim` coordinates.
pub fn tangent_basis<T: Real>(n: &Point<T>, dim: usize) -> Vec<Point<T>> {
    match dim {
        2 => vec![[-n[1], n[0], T::zero()]],
        3 => {
            let helper = if n[0].abs() < T::lit(0.9) {
                [T::one(), T::zero(), T::zero()]
            } else {
                [T::zero(), T::one(), T::zero()]
            };
            let d = dot(&helper, n);
            let t1 = add_scaled(&helper, -d, n);
            let l1 = norm(&t1);
            let t1 = [t1[0] / l1, t1[1] / l1, t1[2] / l1];
            let t2 = [
                n[1] * t1[2] - n[2] * t1[1],
                n[2] * t1[0] - n[0] * t1[2],
                n[0] * t1[1] - n[1] * t1[0],
            ];
            vec![t1, t2]
        }
        _ => vec![],
    }
}

/// Signed distance from `y` (relative to the center) to the axis-aligned
/// ellipsoid with semi-axes `e`.
///
/// The closest point is `x_k = e_k² y_k / (t + e_k²)` where `t` is the root
/// of `Σ (e_k y_k / (t + e_k²))² = 1`; the root is unique on
/// `(−e_min², ∞)`. When the component along the shortest axis vanishes the
/// root may sit at the pole of that range, which is handled separately.
fn ellipsoid_signed_distance<T: Real>(y: &Point<T>, e: &Point<T>, dim: usize) -> T {
    let ay: Vec<T> = (0..dim).map(|k| y[k].abs()).collect();
    let ax: Vec<T> = (0..dim).map(|k| e[k]).collect();
    let level: T = (0..dim).map(|k| (ay[k] / ax[k]).powi(2)).fold(T::zero(), |a, b| a + b);
    let inside = level < T::one();
    let (kmin, emin) = ax
        .iter()
        .copied()
        .enumerate()
        .fold((0usize, T::infinity()), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let scale = ax.iter().copied().fold(T::zero(), T::max);
    let tiny = T::epsilon() * scale;
    let f = |t: T| -> T {
        let mut s = T::zero();
        for k in 0..dim {
            if ay[k] > T::zero() {
                s = s + (ax[k] * ay[k] / (t + ax[k] * ax[k])).powi(2);
            }
        }
        s - T::one()
    };
    let closest: Vec<T>;
    if ay[kmin] <= tiny && inside {
        // Closest point may have zero normal component along the shortest axis.
        let mut partial = T::zero();
        let mut ok = true;
        let mut xs = vec![T::zero(); dim];
        for k in 0..dim {
            if k == kmin || ay[k] == T::zero() {
                continue;
            }
            let denom = ax[k] * ax[k] - emin * emin;
            if denom <= T::zero() {
                ok = false;
                break;
            }
            xs[k] = ax[k] * ax[k] * ay[k] / denom;
            partial = partial + (xs[k] / ax[k]).powi(2);
        }
        if ok && partial < T::one() {
            xs[kmin] = emin * (T::one() - partial).sqrt();
            closest = xs;
            let d: T = (0..dim).map(|k| (closest[k] - ay[k]).powi(2)).fold(T::zero(), |a, b| a + b).sqrt();
            return -d;
        }
    }
    let norm_y: T = ay.iter().map(|v| *v * *v).fold(T::zero(), |a, b| a + b).sqrt();
    let lo = -emin * emin + emin * emin * T::lit(1e-15);
    let hi = (scale * norm_y).max(scale * scale * T::lit(1e-12));
    let t = if f(lo) <= T::zero() {
        lo
    } else {
        bisect(f, lo, hi, T::epsilon() * (hi.abs() + emin * emin)).unwrap_or(lo)
    };
    closest = (0..dim).map(|k| ax[k] * ax[k] * ay[k] / (t + ax[k] * ax[k])).collect();
    let d: T = (0..dim).map(|k| (closest[k] - ay[k]).powi(2)).fold(T::zero(), |a, b| a + b).sqrt();
    if inside {
        -d
    } else {
        d
    }
}

/// Checks primitive parameters for a given ambient dimension.
pub fn validate_primitive<T: Real>(p: &Primitive<T>, dim: usize) -> Result<()> {
    let bad = |msg: String| Err(Error::Config(msg));
    match p {
        Primitive::Ball { radius, .. } => {
            if !(*radius > T::zero()) {
                return bad(format!("ball radius must be positive, got {radius}"));
            }
        }
        Primitive::Ellipsoid { semi_axes, .. } => {
            if dim < 2 {
                return bad("ellipsoids need dimension 2 or 3".into());
            }
            if semi_axes[..dim].iter().any(|a| !(*a > T::zero())) {
                return bad("ellipsoid semi-axes must be positive".into());
            }
        }
        Primitive::Capsule { radius, .. } => {
            if dim < 2 {
                return bad("capsules need dimension 2 or 3".into());
            }
            if !(*radius > T::zero()) {
                return bad(format!("capsule radius must be positive, got {radius}"));
            }
        }
    }
    Ok(())
}
