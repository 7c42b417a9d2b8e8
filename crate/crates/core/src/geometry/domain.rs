use serde::{Deserialize, Serialize};

use super::primitives::{add_scaled, norm, point_from_slice, validate_primitive, Point, Primitive};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// Ω is the inside of a single primitive.
    Interior,
    /// Ω is the complement of the union of the (disjoint) primitives.
    Exterior,
    /// Ω lies inside `primitives[0]` and outside `primitives[1]`.
    Annulus,
}

/// Analytic description of a domain built from catalogue primitives.
///
/// Sign convention for the signed distance: positive in Ω, negative
/// outside. Curvatures of ∂Ω are taken with respect to the unit normal
/// pointing into Ω, so the boundary of a ball of radius ρ has curvature
/// `1/ρ` when Ω is the ball and `−1/ρ` when Ω is its exterior.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec<T> {
    pub kind: DomainKind,
    pub dim: usize,
    pub primitives: Vec<Primitive<T>>,
}

/// Concentric ball configurations that reduce to a radial problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialShape {
    Exterior { radius: f64 },
    Interior { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialStructure {
    pub center: Point<f64>,
    pub shape: RadialShape,
}

impl<T: Real> DomainSpec<T> {
    pub fn new(kind: DomainKind, dim: usize, primitives: Vec<Primitive<T>>) -> Result<Self> {
        let spec = DomainSpec { kind, dim, primitives };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ball_exterior(center: &[T], radius: T) -> Result<Self> {
        let dim = center.len();
        Self::new(DomainKind::Exterior, dim, vec![Primitive::Ball { center: point_from_slice(center), radius }])
    }

    pub fn ball_interior(center: &[T], radius: T) -> Result<Self> {
        let dim = center.len();
        Self::new(DomainKind::Interior, dim, vec![Primitive::Ball { center: point_from_slice(center), radius }])
    }

    pub fn annulus(center: &[T], inner: T, outer: T) -> Result<Self> {
        let dim = center.len();
        let c = point_from_slice(center);
        Self::new(
            DomainKind::Annulus,
            dim,
            vec![Primitive::Ball { center: c, radius: outer }, Primitive::Ball { center: c, radius: inner }],
        )
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {}", self.dim)));
        }
        for p in &self.primitives {
            validate_primitive(p, self.dim)?;
        }
        match self.kind {
            DomainKind::Interior if self.primitives.len() != 1 => {
                return Err(Error::Config("interior domains take exactly one primitive".into()))
            }
            DomainKind::Annulus if self.primitives.len() != 2 => {
                return Err(Error::Config("annulus domains take exactly two primitives (outer, inner)".into()))
            }
            DomainKind::Exterior if self.primitives.is_empty() => {
                return Err(Error::Config("exterior domains need at least one obstacle".into()))
            }
            _ => {}
        }
        let samples = if self.dim == 1 { 2 } else { 720 };
        match self.kind {
            DomainKind::Exterior => {
                for (i, a) in self.primitives.iter().enumerate() {
                    for (j, b) in self.primitives.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        if !closures_disjoint(a, b, self.dim, samples)? {
                            return Err(Error::Geometry(format!(
                                "obstacles {i} ({}) and {j} ({}) have intersecting closures",
                                a.kind_name(),
                                b.kind_name()
                            )));
                        }
                    }
                }
            }
            DomainKind::Annulus => {
                let outer = &self.primitives[0];
                let inner = &self.primitives[1];
                for p in surface_samples(inner, self.dim, samples)? {
                    if !(outer.signed_distance(&p, self.dim) < T::zero()) {
                        return Err(Error::Geometry(
                            "inner primitive of an annulus must lie strictly inside the outer one".into(),
                        ));
                    }
                }
            }
            DomainKind::Interior => {}
        }
        Ok(())
    }

    /// +1 when Ω lies outside primitive `j`, −1 when Ω lies inside it.
    pub fn side(&self, j: usize) -> T {
        match (self.kind, j) {
            (DomainKind::Exterior, _) => T::one(),
            (DomainKind::Interior, _) => -T::one(),
            (DomainKind::Annulus, 0) => -T::one(),
            (DomainKind::Annulus, _) => T::one(),
        }
    }

    /// Signed distance d* to ∂Ω, positive in Ω.
    pub fn signed_distance(&self, x: &Point<T>) -> T {
        self.component_distances(x).into_iter().fold(T::infinity(), T::min)
    }

    /// Signed distance to each boundary component, each positive on the Ω side.
    pub fn component_distances(&self, x: &Point<T>) -> Vec<T> {
        self.primitives
            .iter()
            .enumerate()
            .map(|(j, p)| self.side(j) * p.signed_distance(x, self.dim))
            .collect()
    }

    /// Index of the boundary component closest to `x`.
    pub fn nearest_component(&self, x: &Point<T>) -> usize {
        let ds = self.component_distances(x);
        let mut best = 0;
        for (j, d) in ds.iter().enumerate() {
            if d.abs() < ds[best].abs() {
                best = j;
            }
        }
        best
    }

    pub fn contains(&self, x: &Point<T>) -> bool {
        self.signed_distance(x) > T::zero()
    }

    /// Distance from `x` to the complement of Ω.
    pub fn distance_to_complement(&self, x: &Point<T>) -> T {
        self.signed_distance(x).max(T::zero())
    }

    /// Hopf–Lax value `dist(x, ℝᴺ∖Ω)² / (4t)`.
    pub fn hopf_lax_value(&self, x: &Point<T>, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("Hopf-Lax time must be positive, got {t}")));
        }
        let d = self.distance_to_complement(x);
        Ok(d * d / (T::lit(4.0) * t))
    }

    /// Unit normal to component `j` at boundary point `p`, pointing into Ω.
    pub fn inward_normal(&self, j: usize, p: &Point<T>) -> Point<T> {
        let n = self.primitives[j].outward_normal(p, self.dim);
        let s = self.side(j);
        [s * n[0], s * n[1], s * n[2]]
    }

    /// Principal curvatures of ∂Ω at boundary point `p`, signed with respect
    /// to the normal pointing into Ω.
    pub fn principal_curvatures(&self, p: &Point<T>) -> Result<Vec<T>> {
        let j = self.nearest_component(p);
        let d = self.primitives[j].signed_distance(p, self.dim);
        let scale = self.primitives[j].extent(self.dim);
        if d.abs() > T::lit(1e-8) * (T::one() + scale) {
            return Err(Error::Geometry(format!("point {p:?} is not on the boundary (distance {d})")));
        }
        let s = self.side(j);
        Ok(self.primitives[j]
            .principal_curvatures(p, self.dim)
            .into_iter()
            .map(|k| -s * k)
            .collect())
    }

    /// `∏ (1/R − κ_j(p))` over the principal curvatures of ∂Ω at `p`.
    pub fn curvature_product(&self, p: &Point<T>, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::Domain(format!("offset distance must be positive, got {r}")));
        }
        let ks = self.principal_curvatures(p)?;
        let inv = T::one() / r;
        let kmax = ks.iter().copied().fold(T::neg_infinity(), T::max);
        if ks.iter().any(|k| inv <= *k) {
            return Err(Error::DegenerateOffset {
                inv_r: inv.to_f64_lossy(),
                kappa: kmax.to_f64_lossy(),
            });
        }
        Ok(ks.iter().fold(T::one(), |acc, k| acc * (inv - *k)))
    }

    /// Samples `n` points of ∂Ω, split across components as evenly as possible.
    pub fn boundary_samples(&self, n: usize) -> Result<Vec<(usize, Point<T>)>> {
        let m = self.primitives.len();
        let mut out = Vec::with_capacity(n);
        for (j, p) in self.primitives.iter().enumerate() {
            let count = n / m + usize::from(j < n % m);
            for q in surface_samples(p, self.dim, count)? {
                out.push((j, q));
            }
        }
        Ok(out)
    }

    /// Points at distance `r` from ∂Ω inside Ω, obtained by moving boundary
    /// samples along the inward normal.
    pub fn parallel_surface(&self, r: T, n: usize) -> Result<Vec<Point<T>>> {
        if !(r > T::zero()) {
            return Err(Error::Domain(format!("offset distance must be positive, got {r}")));
        }
        for (j, p) in self.primitives.iter().enumerate() {
            if self.side(j) < T::zero() {
                let focal = T::one() / p.max_curvature(self.dim);
                if r >= focal {
                    return Err(Error::Caustic {
                        distance: r.to_f64_lossy(),
                        detail: format!(
                            "component {j} ({}) has focal distance {}",
                            p.kind_name(),
                            focal.to_f64_lossy()
                        ),
                    });
                }
            }
        }
        let tol = T::lit(1e-10);
        let mut out = Vec::with_capacity(n);
        for (j, p) in self.boundary_samples(n)? {
            let x = add_scaled(&p, r, &self.inward_normal(j, &p));
            let d = self.signed_distance(&x);
            if (d - r).abs() > tol * (T::one() + r) {
                return Err(Error::Caustic {
                    distance: r.to_f64_lossy(),
                    detail: format!(
                        "offset of component {j} reaches distance {} instead of {}",
                        d.to_f64_lossy(),
                        r.to_f64_lossy()
                    ),
                });
            }
            out.push(x);
        }
        Ok(out)
    }

    /// Laplacian of d* by central differences with step `step`.
    pub fn laplacian_signed_distance(&self, x: &Point<T>, step: T) -> T {
        let d0 = self.signed_distance(x);
        let mut acc = T::zero();
        for k in 0..self.dim {
            let mut xp = *x;
            let mut xm = *x;
            xp[k] = xp[k] + step;
            xm[k] = xm[k] - step;
            acc = acc + self.signed_distance(&xp) - T::two() * d0 + self.signed_distance(&xm);
        }
        acc / (step * step)
    }

    /// Radius of a ball about the origin containing every primitive.
    pub fn bounding_radius(&self) -> T {
        self.primitives
            .iter()
            .map(|p| norm(&p.center()) + p.extent(self.dim))
            .fold(T::zero(), T::max)
    }

    /// Smallest length scale among the primitives.
    pub fn min_feature(&self) -> T {
        self.primitives.iter().map(|p| p.min_radius(self.dim)).fold(T::infinity(), T::min)
    }
}

impl DomainSpec<f64> {
    /// Detects concentric-ball configurations solvable on a radial grid.
    pub fn radial_structure(&self) -> Option<RadialStructure> {
        let balls: Vec<(Point<f64>, f64)> = self
            .primitives
            .iter()
            .filter_map(|p| match p {
                Primitive::Ball { center, radius } => Some((*center, *radius)),
                _ => None,
            })
            .collect();
        if balls.len() != self.primitives.len() {
            return None;
        }
        let shape = match (self.kind, balls.as_slice()) {
            (DomainKind::Exterior, [(_, r)]) => RadialShape::Exterior { radius: *r },
            (DomainKind::Interior, [(_, r)]) => RadialShape::Interior { radius: *r },
            (DomainKind::Annulus, [(c0, r1), (c1, r0)]) if c0 == c1 => {
                RadialShape::Annulus { inner: *r0, outer: *r1 }
            }
            _ => return None,
        };
        Some(RadialStructure { center: balls[0].0, shape })
    }
}

/// Direction set: uniform angles in 2D, a Fibonacci lattice in 3D, ±1 in 1D.
pub fn directions<T: Real>(dim: usize, n: usize) -> Vec<Point<T>> {
    match dim {
        1 => [T::one(), -T::one()].into_iter().take(n.max(1)).map(|s| [s, T::zero(), T::zero()]).collect(),
        2 => (0..n)
            .map(|k| {
                let th = T::lit(std::f64::consts::TAU * k as f64 / n as f64);
                [th.cos(), th.sin(), T::zero()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    [T::lit(rho * th.cos()), T::lit(rho * th.sin()), T::lit(z)]
                })
                .collect()
        }
    }
}

fn surface_samples<T: Real>(p: &Primitive<T>, dim: usize, n: usize) -> Result<Vec<Point<T>>> {
    if n == 0 {
        return Ok(vec![]);
    }
    let count = if dim == 1 { n.min(2) } else { n };
    directions::<T>(dim, count).iter().map(|d| p.ray_exit(d, dim)).collect()
}

fn closures_disjoint<T: Real>(a: &Primitive<T>, b: &Primitive<T>, dim: usize, n: usize) -> Result<bool> {
    if let (Primitive::Ball { center: c1, radius: r1 }, Primitive::Ball { center: c2, radius: r2 }) = (a, b) {
        let gap = norm(&super::primitives::sub(c1, c2));
        return Ok(gap > *r1 + *r2);
    }
    for q in surface_samples(a, dim, n)? {
        if !(b.signed_distance(&q, dim) > T::zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Serializable primitive description used in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PrimitiveConfig {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(alias = "ellipse")]
    Ellipsoid {
        center: Vec<f64>,
        radii: Vec<f64>,
    },
    Capsule {
        segment: [Vec<f64>; 2],
        radius: f64,
    },
}

/// Serializable domain description: `{kind, primitives, bbox, h}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub primitives: Vec<PrimitiveConfig>,
    /// `[lo, hi]` per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

impl DomainConfig {
    pub fn dimension(&self) -> Result<usize> {
        let dims: Vec<usize> = self
            .primitives
            .iter()
            .map(|p| match p {
                PrimitiveConfig::Ball { center, .. } | PrimitiveConfig::Ellipsoid { center, .. } => center.len(),
                PrimitiveConfig::Capsule { segment, .. } => segment[0].len(),
            })
            .collect();
        match dims.first() {
            Some(&d) if dims.iter().all(|&e| e == d) => Ok(d),
            Some(_) => Err(Error::Config("primitives disagree on dimension".into())),
            None => Err(Error::Config("domain has no primitives".into())),
        }
    }

    pub fn build(&self) -> Result<DomainSpec<f64>> {
        let dim = self.dimension()?;
        let prims = self
            .primitives
            .iter()
            .map(|p| match p {
                PrimitiveConfig::Ball { center, radius } => {
                    Ok(Primitive::Ball { center: point_from_slice(center), radius: *radius })
                }
                PrimitiveConfig::Ellipsoid { center, radii } => {
                    if radii.len() != dim {
                        return Err(Error::Config("ellipsoid radii must match the dimension".into()));
                    }
                    Ok(Primitive::Ellipsoid { center: point_from_slice(center), semi_axes: point_from_slice(radii) })
                }
                PrimitiveConfig::Capsule { segment, radius } => {
                    if segment[1].len() != dim {
                        return Err(Error::Config("capsule endpoints must match the dimension".into()));
                    }
                    Ok(Primitive::Capsule {
                        a: point_from_slice(&segment[0]),
                        b: point_from_slice(&segment[1]),
                        radius: *radius,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DomainSpec::new(self.kind, dim, prims)
    }

    pub fn from_spec(spec: &DomainSpec<f64>) -> Self {
        let dim = spec.dim;
        let primitives = spec
            .primitives
            .iter()
            .map(|p| match p {
                Primitive::Ball { center, radius } => {
                    PrimitiveConfig::Ball { center: center[..dim].to_vec(), radius: *radius }
                }
                Primitive::Ellipsoid { center, semi_axes } => PrimitiveConfig::Ellipsoid {
                    center: center[..dim].to_vec(),
                    radii: semi_axes[..dim].to_vec(),
                },
                Primitive::Capsule { a, b, radius } => PrimitiveConfig::Capsule {
                    segment: [a[..dim].to_vec(), b[..dim].to_vec()],
                    radius: *radius,
                },
            })
            .collect();
        DomainConfig { kind: spec.kind, primitives, bbox: None, h: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse_exterior() -> DomainSpec<f64> {
        DomainSpec::new(
            DomainKind::Exterior,
            2,
            vec![Primitive::Ellipsoid { center: [0.0; 3], semi_axes: [2.0, 1.0, 0.0] }],
        )
        .unwrap()
    }

    #[test]
    fn exterior_ball_sign_convention() {
        let s = DomainSpec::<f64>::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(s.signed_distance(&[2.0, 0.0, 0.0]), 1.0);
        assert_eq!(s.signed_distance(&[0.5, 0.0, 0.0]), -0.5);
    }

    #[test]
    fn overlapping_obstacles_rejected() {
        let r = DomainSpec::new(
            DomainKind::Exterior,
            2,
            vec![
                Primitive::Ball { center: [0.0; 3], radius: 1.0 },
                Primitive::Ball { center: [1.5, 0.0, 0.0], radius: 1.0 },
            ],
        );
        assert!(matches!(r, Err(Error::Geometry(_))));
    }

    #[test]
    fn hopf_lax_examples() {
        let s = DomainSpec::<f64>::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(s.hopf_lax_value(&[2.0, 0.0, 0.0], 0.25).unwrap(), 1.0);
        assert_eq!(s.hopf_lax_value(&[0.3, 0.1, 0.0], 0.7).unwrap(), 0.0);
    }

    #[test]
    fn parallel_surfaces_of_circles() {
        let s = DomainSpec::<f64>::ball_exterior(&[0.0, 0.0], 1.0).unwrap();
        for p in s.parallel_surface(0.5, 64).unwrap() {
            assert!((norm(&p) - 1.5).abs() < 1e-12);
        }
        let s = DomainSpec::<f64>::ball_interior(&[0.0, 0.0], 2.0).unwrap();
        for p in s.parallel_surface(0.5, 64).unwrap() {
            assert!((norm(&p) - 1.5).abs() < 1e-12);
        }
        assert!(matches!(s.parallel_surface(2.0, 8), Err(Error::Caustic { .. })));
    }

    #[test]
    fn ellipse_parallel_surface_is_at_requested_distance() {
        let s = ellipse_exterior();
        let pts = s.parallel_surface(0.3, 200).unwrap();
        assert_eq!(pts.len(), 200);
        for p in pts {
            assert!((s.signed_distance(&p) - 0.3).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_products() {
        let s = DomainSpec::<f64>::ball_interior(&[0.0, 0.0], 2.0).unwrap();
        assert!((s.curvature_product(&[0.0, 2.0, 0.0], 1.0).unwrap() - 0.5).abs() < 1e-14);
        let s = DomainSpec::<f64>::ball_interior(&[0.0, 0.0, 0.0], 2.0).unwrap();
        assert!((s.curvature_product(&[0.0, 0.0, 2.0], 1.0).unwrap() - 0.25).abs() < 1e-14);
        let s = DomainSpec::<f64>::new(
            DomainKind::Interior,
            2,
            vec![Primitive::Ellipsoid { center: [0.0; 3], semi_axes: [2.0, 1.0, 0.0] }],
        )
        .unwrap();
        assert!((s.curvature_product(&[2.0, 0.0, 0.0], 0.25).unwrap() - 2.0).abs() < 1e-12);
        assert!((s.curvature_product(&[0.0, 1.0, 0.0], 0.25).unwrap() - 3.75).abs() < 1e-12);
        assert!(matches!(
            s.curvature_product(&[2.0, 0.0, 0.0], 0.6),
            Err(Error::DegenerateOffset { .. })
        ));
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"kind":"exterior","primitives":[{"type":"ellipse","center":[0,0],"radii":[2,1]}],"h":0.02}"#;
        let cfg: DomainConfig = serde_json::from_str(json).unwrap();
        let spec = cfg.build().unwrap();
        assert_eq!(spec, ellipse_exterior());
        assert_eq!(DomainConfig::from_spec(&spec).build().unwrap(), spec);
    }

    #[test]
    fn radial_detection() {
        let s = DomainSpec::<f64>::annulus(&[0.0, 0.0], 1.0, 3.0).unwrap();
        assert_eq!(s.radial_structure().unwrap().shape, RadialShape::Annulus { inner: 1.0, outer: 3.0 });
        assert!(ellipse_exterior().radial_structure().is_none());
    }
}
