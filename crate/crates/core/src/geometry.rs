//! Computational domains: membership, collocation sampling and test grids.
//!
//! Every domain is a closed set. Boundary samples come with outward unit
//! normals; on hole surfaces the outward direction of the domain points into
//! the hole.

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, UnitCircle, UnitSphere};

use crate::error::{Error, Result};

/// Boundary samples never land closer than this to a corner, edge or vertex.
pub const CORNER_MARGIN: f64 = 1e-9;

const MIN_ACCEPTANCE: f64 = 1e-4;

/// A round hole (disc in 2D, ball in 3D).
#[derive(Clone, Debug, PartialEq)]
pub struct Hole {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Hole {
    pub fn new(center: impl Into<Vec<f64>>, radius: f64) -> Self {
        Hole {
            center: center.into(),
            radius,
        }
    }

    fn contains_strictly(&self, x: &[f64]) -> bool {
        dist(x, &self.center) < self.radius * (1.0 - 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Union of two triangles inscribed in the box `lo..hi`.
    Hexagram {
        lo: [f64; 2],
        hi: [f64; 2],
        triangles: [[[f64; 2]; 3]; 2],
    },
    PorousPlate {
        lo: [f64; 2],
        hi: [f64; 2],
        holes: Vec<Hole>,
    },
    HoledCube {
        lo: [f64; 3],
        hi: [f64; 3],
        holes: Vec<Hole>,
    },
    SphericalShell {
        center: [f64; 3],
        r_inner: f64,
        r_outer: f64,
    },
}

/// Interior and boundary collocation points; `normals` is aligned row-wise
/// with `boundary`.
#[derive(Clone, Debug)]
pub struct CollocationSet {
    pub interior: Mat<f64>,
    pub boundary: Mat<f64>,
    pub normals: Mat<f64>,
}

impl CollocationSet {
    pub fn dim(&self) -> usize {
        self.interior.ncols().max(self.boundary.ncols())
    }
}

/// A single piece of the boundary, sampled uniformly by measure.
#[derive(Clone, Debug)]
enum Patch {
    Face { axis: usize, at_hi: bool },
    Segment { a: [f64; 2], b: [f64; 2], normal: [f64; 2] },
    /// Circle or sphere; `into_center` flips the normal towards the center.
    Round { center: Vec<f64>, radius: f64, into_center: bool },
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
        return Err(Error::Geometry(format!(
            "box corners must both have dimension 2 or 3 (got {} and {})",
            lo.len(),
            hi.len()
        )));
    }
    if lo.iter().chain(hi).any(|v| !v.is_finite()) {
        return Err(Error::Geometry("box corners must be finite".into()));
    }
    if lo.iter().zip(hi).any(|(l, h)| l >= h) {
        return Err(Error::Geometry(format!("box needs lo < hi componentwise: {lo:?} {hi:?}")));
    }
    Ok(())
}

fn check_holes(lo: &[f64], hi: &[f64], holes: &[Hole]) -> Result<()> {
    for (i, h) in holes.iter().enumerate() {
        if h.center.len() != lo.len() {
            return Err(Error::Geometry(format!("hole {i} has the wrong dimension")));
        }
        if !(h.radius > 0.0) {
            return Err(Error::Geometry(format!("hole {i} needs a positive radius")));
        }
        let inside = h
            .center
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(c, (l, u))| c - h.radius > *l && c + h.radius < *u);
        if !inside {
            return Err(Error::Geometry(format!("hole {i} is not strictly inside the box")));
        }
        for (j, g) in holes.iter().enumerate().take(i) {
            if dist(&h.center, &g.center) <= h.radius + g.radius {
                return Err(Error::Geometry(format!("holes {j} and {i} overlap")));
            }
        }
    }
    Ok(())
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Triangles are stored counterclockwise. Points within rounding of an edge
/// count as inside, so sampled edge points are members.
fn in_triangle(t: &[[f64; 2]; 3], p: [f64; 2]) -> bool {
    (0..3).all(|i| {
        let (o, a) = (t[i], t[(i + 1) % 3]);
        let scale = dist(&o, &a) * (dist(&o, &p) + dist(&a, &p));
        cross(o, a, p) >= -1e-12 * scale
    })
}

fn segment_intersection(p: [f64; 2], p2: [f64; 2], q: [f64; 2], q2: [f64; 2]) -> Option<[f64; 2]> {
    let r = [p2[0] - p[0], p2[1] - p[1]];
    let s = [q2[0] - q[0], q2[1] - q[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom.abs() < 1e-300 {
        return None;
    }
    let qp = [q[0] - p[0], q[1] - p[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some([p[0] + t * r[0], p[1] + t * r[1]])
    } else {
        None
    }
}

impl Domain {
    pub fn new_box(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Result<Self> {
        let (lo, hi) = (lo.into(), hi.into());
        check_box(&lo, &hi)?;
        Ok(Domain::Box { lo, hi })
    }

    /// Hexagram inscribed in `lo..hi`: an apex-up triangle with its base at a
    /// quarter of the height and the mirrored apex-down triangle.
    pub fn hexagram(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        check_box(&lo, &hi)?;
        let h = hi[1] - lo[1];
        let cx = 0.5 * (lo[0] + hi[0]);
        let up = [[lo[0], lo[1] + 0.25 * h], [hi[0], lo[1] + 0.25 * h], [cx, hi[1]]];
        let down = [[hi[0], hi[1] - 0.25 * h], [lo[0], hi[1] - 0.25 * h], [cx, lo[1]]];
        Self::hexagram_from_triangles(lo, hi, [up, down])
    }

    /// Hexagram from explicit triangles; they must lie in the box and overlap
    /// so that their outlines cross at six points.
    pub fn hexagram_from_triangles(
        lo: [f64; 2],
        hi: [f64; 2],
        triangles: [[[f64; 2]; 3]; 2],
    ) -> Result<Self> {
        check_box(&lo, &hi)?;
        let mut triangles = triangles;
        for t in triangles.iter_mut() {
            let area = cross(t[0], t[1], t[2]);
            if area.abs() < 1e-14 {
                return Err(Error::Geometry("degenerate hexagram triangle".into()));
            }
            if area < 0.0 {
                t.swap(1, 2);
            }
            for v in t.iter() {
                if v[0] < lo[0] || v[0] > hi[0] || v[1] < lo[1] || v[1] > hi[1] {
                    return Err(Error::Geometry("hexagram vertex outside its box".into()));
                }
            }
        }
        let domain = Domain::Hexagram { lo, hi, triangles };
        let outline = domain.star_outline();
        if outline.len() != 12 {
            return Err(Error::Geometry(format!(
                "hexagram triangles must cross at six points (outline has {} vertices)",
                outline.len()
            )));
        }
        Ok(domain)
    }

    pub fn porous_plate(lo: [f64; 2], hi: [f64; 2], holes: Vec<Hole>) -> Result<Self> {
        check_box(&lo, &hi)?;
        check_holes(&lo, &hi, &holes)?;
        Ok(Domain::PorousPlate { lo, hi, holes })
    }

    /// A 3 x 3 array of holes of radius 0.1 * shortest side at the quarter points.
    pub fn default_porous_plate(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        check_box(&lo, &hi)?;
        let r = 0.1 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
        let mut holes = Vec::with_capacity(9);
        for i in 1..=3 {
            for j in 1..=3 {
                let cx = lo[0] + (hi[0] - lo[0]) * i as f64 / 4.0;
                let cy = lo[1] + (hi[1] - lo[1]) * j as f64 / 4.0;
                holes.push(Hole::new(vec![cx, cy], r));
            }
        }
        Self::porous_plate(lo, hi, holes)
    }

    pub fn holed_cube(lo: [f64; 3], hi: [f64; 3], holes: Vec<Hole>) -> Result<Self> {
        check_box(&lo, &hi)?;
        check_holes(&lo, &hi, &holes)?;
        Ok(Domain::HoledCube { lo, hi, holes })
    }

    /// `[1,3]^3` with a central ball of radius 0.5 and eight balls of radius
    /// 0.15 at `(2 ± 0.6, 2 ± 0.6, 2 ± 0.6)`.
    pub fn default_holed_cube() -> Self {
        let mut holes = vec![Hole::new(vec![2.0, 2.0, 2.0], 0.5)];
        for sx in [-0.6, 0.6] {
            for sy in [-0.6, 0.6] {
                for sz in [-0.6, 0.6] {
                    holes.push(Hole::new(vec![2.0 + sx, 2.0 + sy, 2.0 + sz], 0.15));
                }
            }
        }
        Self::holed_cube([1.0; 3], [3.0; 3], holes).expect("default holed cube is valid")
    }

    pub fn spherical_shell(center: [f64; 3], r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
            return Err(Error::Geometry(format!(
                "spherical shell needs 0 < r_inner < r_outer (got {r_inner}, {r_outer})"
            )));
        }
        Ok(Domain::SphericalShell {
            center,
            r_inner,
            r_outer,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Domain::Box { .. } => "box",
            Domain::Hexagram { .. } => "hexagram",
            Domain::PorousPlate { .. } => "porous",
            Domain::HoledCube { .. } => "holed-cube",
            Domain::SphericalShell { .. } => "shell",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Hexagram { .. } | Domain::PorousPlate { .. } => 2,
            Domain::HoledCube { .. } | Domain::SphericalShell { .. } => 3,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Hexagram { lo, hi, .. } | Domain::PorousPlate { lo, hi, .. } => {
                (lo.to_vec(), hi.to_vec())
            }
            Domain::HoledCube { lo, hi, .. } => (lo.to_vec(), hi.to_vec()),
            Domain::SphericalShell {
                center, r_outer, ..
            } => (
                center.iter().map(|c| c - r_outer).collect(),
                center.iter().map(|c| c + r_outer).collect(),
            ),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        let in_box = |lo: &[f64], hi: &[f64]| {
            x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
        };
        match self {
            Domain::Box { lo, hi } => in_box(lo, hi),
            Domain::Hexagram { triangles, .. } => {
                let p = [x[0], x[1]];
                triangles.iter().any(|t| in_triangle(t, p))
            }
            Domain::PorousPlate { lo, hi, holes } => {
                in_box(lo, hi) && !holes.iter().any(|h| h.contains_strictly(x))
            }
            Domain::HoledCube { lo, hi, holes } => {
                in_box(lo, hi) && !holes.iter().any(|h| h.contains_strictly(x))
            }
            Domain::SphericalShell {
                center,
                r_inner,
                r_outer,
            } => {
                let r = dist(x, center);
                r_inner * (1.0 - 1e-12) <= r && r <= r_outer * (1.0 + 1e-12)
            }
        }
    }

    /// The twelve vertices of the star outline, counterclockwise.
    fn star_outline(&self) -> Vec<[f64; 2]> {
        let Domain::Hexagram { triangles, .. } = self else {
            return Vec::new();
        };
        let mut verts: Vec<[f64; 2]> = triangles.iter().flatten().copied().collect();
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (triangles[0][i], triangles[0][(i + 1) % 3]);
                let (c, d) = (triangles[1][j], triangles[1][(j + 1) % 3]);
                if let Some(p) = segment_intersection(a, b, c, d) {
                    verts.push(p);
                }
            }
        }
        let n = verts.len() as f64;
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / n;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / n;
        verts.sort_by(|a, b| {
            let ta = (a[1] - cy).atan2(a[0] - cx);
            let tb = (b[1] - cy).atan2(b[0] - cx);
            ta.total_cmp(&tb)
        });
        verts.dedup_by(|a, b| dist(a, b) < 1e-12);
        verts
    }

    fn patches(&self) -> Vec<Patch> {
        let faces = |d: usize| {
            (0..d).flat_map(|axis| [false, true].map(|at_hi| Patch::Face { axis, at_hi }))
        };
        let holes_as_patches = |holes: &[Hole]| {
            holes
                .iter()
                .map(|h| Patch::Round {
                    center: h.center.clone(),
                    radius: h.radius,
                    into_center: true,
                })
                .collect::<Vec<_>>()
        };
        match self {
            Domain::Box { lo, .. } => faces(lo.len()).collect(),
            Domain::Hexagram { .. } => {
                let v = self.star_outline();
                (0..v.len())
                    .map(|i| {
                        let (a, b) = (v[i], v[(i + 1) % v.len()]);
                        let len = dist(&a, &b);
                        Patch::Segment {
                            a,
                            b,
                            normal: [(b[1] - a[1]) / len, -(b[0] - a[0]) / len],
                        }
                    })
                    .collect()
            }
            Domain::PorousPlate { holes, .. } => {
                faces(2).chain(holes_as_patches(holes)).collect()
            }
            Domain::HoledCube { holes, .. } => faces(3).chain(holes_as_patches(holes)).collect(),
            Domain::SphericalShell {
                center,
                r_inner,
                r_outer,
            } => vec![
                Patch::Round {
                    center: center.to_vec(),
                    radius: *r_outer,
                    into_center: false,
                },
                Patch::Round {
                    center: center.to_vec(),
                    radius: *r_inner,
                    into_center: true,
                },
            ],
        }
    }

    fn patch_measure(&self, patch: &Patch) -> f64 {
        let d = self.dim();
        match patch {
            Patch::Face { axis, .. } => {
                let (lo, hi) = self.bounding_box();
                (0..d).filter(|k| k != axis).map(|k| hi[k] - lo[k]).product()
            }
            Patch::Segment { a, b, .. } => dist(a, b),
            Patch::Round { radius, .. } => {
                if d == 2 {
                    2.0 * std::f64::consts::PI * radius
                } else {
                    4.0 * std::f64::consts::PI * radius * radius
                }
            }
        }
    }

    fn sample_patch<R: Rng + ?Sized>(&self, patch: &Patch, rng: &mut R, x: &mut [f64], n: &mut [f64]) {
        n.fill(0.0);
        match patch {
            Patch::Face { axis, at_hi } => {
                let (lo, hi) = self.bounding_box();
                for k in 0..x.len() {
                    if k == *axis {
                        x[k] = if *at_hi { hi[k] } else { lo[k] };
                    } else {
                        x[k] = rng.random_range(lo[k] + CORNER_MARGIN..hi[k] - CORNER_MARGIN);
                    }
                }
                n[*axis] = if *at_hi { 1.0 } else { -1.0 };
            }
            Patch::Segment { a, b, normal } => {
                let len = dist(a, b);
                let margin = CORNER_MARGIN / len;
                let t: f64 = rng.random_range(margin..1.0 - margin);
                x[0] = a[0] + t * (b[0] - a[0]);
                x[1] = a[1] + t * (b[1] - a[1]);
                n.copy_from_slice(normal);
            }
            Patch::Round {
                center,
                radius,
                into_center,
            } => {
                let dir: Vec<f64> = if x.len() == 2 {
                    let v: [f64; 2] = UnitCircle.sample(rng);
                    v.to_vec()
                } else {
                    let v: [f64; 3] = UnitSphere.sample(rng);
                    v.to_vec()
                };
                // Renormalize so the unit-norm invariant holds to rounding.
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let sign = if *into_center { -1.0 } else { 1.0 };
                for k in 0..x.len() {
                    let u = dir[k] / norm;
                    x[k] = center[k] + radius * u;
                    n[k] = sign * u;
                }
            }
        }
    }

    /// Number of boundary pieces sampled independently.
    pub fn boundary_components(&self) -> usize {
        self.patches().len()
    }

    /// Uniform interior points; rejection against the bounding box for
    /// anything other than a plain box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Result<Mat<f64>> {
        if q == 0 {
            return Err(Error::Contract("interior sample count must be positive".into()));
        }
        let d = self.dim();
        let (lo, hi) = self.bounding_box();
        let mut out = Mat::zeros(q, d);
        let mut x = vec![0.0; d];
        let (mut accepted, mut attempts) = (0usize, 0usize);
        while accepted < q {
            for k in 0..d {
                x[k] = rng.random_range(lo[k]..hi[k]);
            }
            attempts += 1;
            if self.contains(&x) {
                for k in 0..d {
                    out[(accepted, k)] = x[k];
                }
                accepted += 1;
            } else if attempts >= 100_000 && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
                return Err(Error::Geometry(format!(
                    "rejection sampling accepted {accepted} of {attempts} proposals"
                )));
            }
        }
        Ok(out)
    }

    /// Boundary points and outward normals. Each boundary piece receives a
    /// share of `p` proportional to its measure, and at least one point.
    pub fn sample_boundary<R: Rng + ?Sized>(
        &self,
        p: usize,
        rng: &mut R,
    ) -> Result<(Mat<f64>, Mat<f64>)> {
        let patches = self.patches();
        if p < patches.len() {
            return Err(Error::Undercoverage {
                points: p,
                components: patches.len(),
            });
        }
        let measures: Vec<f64> = patches.iter().map(|pt| self.patch_measure(pt)).collect();
        let counts = apportion(p, &measures);
        let d = self.dim();
        let mut points = Mat::zeros(p, d);
        let mut normals = Mat::zeros(p, d);
        let (mut x, mut n) = (vec![0.0; d], vec![0.0; d]);
        let mut row = 0;
        for (patch, &count) in patches.iter().zip(&counts) {
            for _ in 0..count {
                self.sample_patch(patch, rng, &mut x, &mut n);
                for k in 0..d {
                    points[(row, k)] = x[k];
                    normals[(row, k)] = n[k];
                }
                row += 1;
            }
        }
        Ok((points, normals))
    }

    /// Interior points first, then boundary points, from the same generator.
    pub fn collocation<R: Rng + ?Sized>(&self, q: usize, p: usize, rng: &mut R) -> Result<CollocationSet> {
        let interior = self.sample_interior(q, rng)?;
        let (boundary, normals) = self.sample_boundary(p, rng)?;
        Ok(CollocationSet {
            interior,
            boundary,
            normals,
        })
    }

    /// Equidistant tensor grid over the bounding box (end points included),
    /// keeping only points inside the domain. The first axis varies slowest.
    pub fn grid(&self, resolution: &[usize]) -> Result<Mat<f64>> {
        let d = self.dim();
        if resolution.len() != d || resolution.iter().any(|&r| r < 2) {
            return Err(Error::Contract(format!(
                "grid needs {d} per-axis counts of at least 2, got {resolution:?}"
            )));
        }
        let (lo, hi) = self.bounding_box();
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let n = resolution[k];
                (0..n)
                    .map(|i| lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64)
                    .collect()
            })
            .collect();
        let total: usize = resolution.iter().product();
        let mut kept: Vec<f64> = Vec::with_capacity(total * d);
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        for _ in 0..total {
            for k in 0..d {
                x[k] = axes[k][idx[k]];
            }
            if self.contains(&x) {
                kept.extend_from_slice(&x);
            }
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < resolution[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let m = kept.len() / d;
        Ok(Mat::from_fn(m, d, |i, k| kept[i * d + k]))
    }
}

/// Largest-remainder split of `total` by `weights`, giving every part at least one.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    for i in 0..counts.len() {
        if counts[i] == 0 {
            let donor = (0..counts.len()).max_by_key(|&j| (counts[j], usize::MAX - j)).unwrap();
            counts[donor] -= 1;
            counts[i] = 1;
        }
    }
    counts
}
