//! Manufactured biharmonic problems with closed-form solutions.
//!
//! Each problem knows its exact solution, gradient, Laplacian and source
//! term `f = Δ²u`, so every kind of boundary data can be evaluated at any
//! point: `g = u`, `h = ∇u·n` (clamped/Dirichlet) and `k = Δu` (Navier).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::geometry::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryRegime {
    /// Value `g` and normal derivative `h` prescribed.
    Dirichlet,
    /// Value `g` and Laplacian `k` prescribed.
    Navier,
}

impl fmt::Display for BoundaryRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryRegime::Dirichlet => "dirichlet",
            BoundaryRegime::Navier => "navier",
        })
    }
}

impl FromStr for BoundaryRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryRegime::Dirichlet),
            "navier" => Ok(BoundaryRegime::Navier),
            _ => Err(Error::Lookup {
                kind: "boundary regime",
                name: s.into(),
            }),
        }
    }
}

/// The closed-form exact solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solution {
    /// `[(x-a)(b-x)]² [(y-c)(d-y)]²` on the box `[a,b]×[c,d]`.
    BoxBubble { lo: [f64; 2], hi: [f64; 2] },
    /// `sin(x) e^{cos y}`.
    SinExpCos,
    /// `50 e^{-(x+y+z)/4}`.
    ExpDecay,
    /// `sin(x² + y²)`.
    SinRadiusSquared,
    /// `e^x sin(y)`, harmonic.
    ExpSin,
    /// `sin(πx) sin(πy) sin(πz)`.
    TripleSine,
}

impl Solution {
    pub fn dim(&self) -> usize {
        match self {
            Solution::ExpDecay | Solution::TripleSine => 3,
            _ => 2,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Solution::BoxBubble { lo, hi } => {
                let a = bubble(x[0], lo[0], hi[0]);
                let b = bubble(x[1], lo[1], hi[1]);
                a * a * b * b
            }
            Solution::SinExpCos => x[0].sin() * x[1].cos().exp(),
            Solution::ExpDecay => 50.0 * (-0.25 * (x[0] + x[1] + x[2])).exp(),
            Solution::SinRadiusSquared => (x[0] * x[0] + x[1] * x[1]).sin(),
            Solution::ExpSin => x[0].exp() * x[1].sin(),
            Solution::TripleSine => x.iter().map(|v| (PI * v).sin()).product(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            Solution::BoxBubble { lo, hi } => {
                let (a, da) = (bubble(x[0], lo[0], hi[0]), lo[0] + hi[0] - 2.0 * x[0]);
                let (b, db) = (bubble(x[1], lo[1], hi[1]), lo[1] + hi[1] - 2.0 * x[1]);
                vec![2.0 * a * da * b * b, 2.0 * b * db * a * a]
            }
            Solution::SinExpCos => {
                let e = x[1].cos().exp();
                vec![x[0].cos() * e, -x[0].sin() * x[1].sin() * e]
            }
            Solution::ExpDecay => {
                let g = -0.25 * self.value(x);
                vec![g; 3]
            }
            Solution::SinRadiusSquared => {
                let c = 2.0 * (x[0] * x[0] + x[1] * x[1]).cos();
                vec![c * x[0], c * x[1]]
            }
            Solution::ExpSin => {
                let e = x[0].exp();
                vec![e * x[1].sin(), e * x[1].cos()]
            }
            Solution::TripleSine => {
                let s: Vec<f64> = x.iter().map(|v| (PI * v).sin()).collect();
                (0..3)
                    .map(|k| {
                        let others: f64 = (0..3).filter(|&j| j != k).map(|j| s[j]).product();
                        PI * (PI * x[k]).cos() * others
                    })
                    .collect()
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match *self {
            Solution::BoxBubble { lo, hi } => {
                let (a, da) = (bubble(x[0], lo[0], hi[0]), lo[0] + hi[0] - 2.0 * x[0]);
                let (b, db) = (bubble(x[1], lo[1], hi[1]), lo[1] + hi[1] - 2.0 * x[1]);
                2.0 * (da * da - 2.0 * a) * b * b + 2.0 * (db * db - 2.0 * b) * a * a
            }
            Solution::SinExpCos => {
                let (s, c) = x[1].sin_cos();
                x[0].sin() * c.exp() * (s * s - c - 1.0)
            }
            Solution::ExpDecay => 3.0 / 16.0 * self.value(x),
            Solution::SinRadiusSquared => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                4.0 * r2.cos() - 4.0 * r2 * r2.sin()
            }
            Solution::ExpSin => 0.0,
            Solution::TripleSine => -3.0 * PI * PI * self.value(x),
        }
    }

    /// `Δ²u`, in the closed forms of the original examples.
    pub fn bilaplacian(&self, x: &[f64]) -> f64 {
        match *self {
            Solution::BoxBubble { lo, hi } => {
                let (a, da) = (bubble(x[0], lo[0], hi[0]), lo[0] + hi[0] - 2.0 * x[0]);
                let (b, db) = (bubble(x[1], lo[1], hi[1]), lo[1] + hi[1] - 2.0 * x[1]);
                24.0 * b * b
                    + 24.0 * a * a
                    + 2.0 * (2.0 * da * da - 4.0 * a) * (2.0 * db * db - 4.0 * b)
            }
            Solution::SinExpCos => {
                let (s, c) = x[1].sin_cos();
                let u = x[0].sin() * c.exp();
                let s2 = s * s;
                u - 2.0 * u * (s2 - c)
                    + u * (s2 * s2 - 6.0 * s2 * c + 3.0 * c * c - 4.0 * s2 + c)
            }
            Solution::ExpDecay => 225.0 / 128.0 * (-0.25 * (x[0] + x[1] + x[2])).exp(),
            Solution::SinRadiusSquared => {
                let (x1, x2) = (x[0], x[1]);
                let r2 = x1 * x1 + x2 * x2;
                let (s, c) = r2.sin_cos();
                16.0 * x1.powi(4) * s + 16.0 * x2.powi(4) * s
                    - 64.0 * x1 * x1 * c
                    - 64.0 * x2 * x2 * c
                    + 32.0 * x1 * x1 * x2 * x2 * s
                    - 32.0 * s
            }
            Solution::ExpSin => 0.0,
            Solution::TripleSine => 9.0 * PI.powi(4) * self.value(x),
        }
    }
}

fn bubble(x: f64, lo: f64, hi: f64) -> f64 {
    (x - lo) * (hi - x)
}

/// A domain the examples were run on, with the scale factor each activation
/// used there.
#[derive(Clone, Debug)]
pub struct ReferenceSetting {
    pub domain: Domain,
    pub deltas: [(ActivationKind, f64); 4],
}

impl ReferenceSetting {
    pub fn delta(&self, kind: ActivationKind) -> f64 {
        self.deltas.iter().find(|(k, _)| *k == kind).map(|(_, d)| *d).unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub regime: BoundaryRegime,
    pub solution: Solution,
    pub domain: Domain,
}

pub const PROBLEM_NAMES: [&str; 6] = [
    "dirichlet-poly2d",
    "dirichlet-hexagram2d",
    "dirichlet-holes3d",
    "navier-sinsq2d",
    "navier-porous2d",
    "navier-shell3d",
];

fn deltas(sigmoid: f64, gaussian: f64, tanh: f64, sine: f64) -> [(ActivationKind, f64); 4] {
    [
        (ActivationKind::Sigmoid, sigmoid),
        (ActivationKind::Gaussian, gaussian),
        (ActivationKind::Tanh, tanh),
        (ActivationKind::Sine, sine),
    ]
}

fn boxed(lo: [f64; 2], hi: [f64; 2]) -> Domain {
    Domain::new_box(lo, hi).expect("valid reference box")
}

/// Every domain a problem was benchmarked on; the first is the default.
pub fn reference_settings(name: &str) -> Result<Vec<ReferenceSetting>> {
    let s = |domain, deltas| ReferenceSetting { domain, deltas };
    Ok(match name {
        "dirichlet-poly2d" => vec![
            s(boxed([-1.0, -1.0], [1.0, 1.0]), deltas(6.0, 1.5, 1.4, 8.0)),
            s(boxed([0.0, 0.0], [5.0, 5.0]), deltas(2.0, 0.8, 1.4, 5.0)),
            s(boxed([-4.0, -3.0], [6.0, 7.0]), deltas(0.5, 0.3, 0.2, 1.0)),
            s(boxed([5.0, 0.0], [15.0, 10.0]), deltas(0.1, 0.2, 0.12, 0.8)),
        ],
        "dirichlet-hexagram2d" => vec![
            s(Domain::hexagram([-PI, -PI], [PI, PI])?, deltas(1.2, 1.4, 0.6, 8.5)),
            s(Domain::hexagram([0.0, PI], [3.0 * PI, 2.0 * PI])?, deltas(0.6, 0.6, 0.3, 8.5)),
        ],
        // Scale factors are only shown graphically for the 3D examples; these
        // sit inside the plotted stable ranges.
        "dirichlet-holes3d" => vec![s(Domain::default_holed_cube(), deltas(1.0, 0.5, 0.5, 2.0))],
        "navier-sinsq2d" => vec![
            s(boxed([0.0, 0.0], [1.0, 1.0]), deltas(6.5, 4.1, 3.2, 9.0)),
            s(boxed([0.0, 0.0], [4.0, 4.0]), deltas(3.0, 1.5, 4.0, 11.0)),
        ],
        "navier-porous2d" => vec![
            s(Domain::default_porous_plate([-1.0, -PI], [1.0, PI])?, deltas(0.7, 0.4, 0.4, 2.5)),
            s(Domain::default_porous_plate([0.0, 0.0], [4.0, 4.0 * PI])?, deltas(0.6, 0.4, 0.3, 1.2)),
        ],
        "navier-shell3d" => vec![s(Domain::spherical_shell([0.0; 3], 0.2, 1.0)?, deltas(1.0, 1.0, 1.0, 3.0))],
        other => {
            return Err(Error::Lookup {
                kind: "problem",
                name: other.into(),
            })
        }
    })
}

/// Looks up a registered problem, optionally on a different domain than its default.
pub fn get_problem(name: &str, domain: Option<Domain>) -> Result<ProblemSpec> {
    let settings = reference_settings(name)?;
    let name = PROBLEM_NAMES.iter().copied().find(|n| *n == name).unwrap();
    let domain = domain.unwrap_or_else(|| settings[0].domain.clone());
    let (regime, solution) = match name {
        "dirichlet-poly2d" => {
            let Domain::Box { lo, hi } = &domain else {
                return Err(Error::UnsupportedGeometry(format!(
                    "{name} is defined on a box, not a {}",
                    domain.kind_name()
                )));
            };
            if lo.len() != 2 {
                return Err(Error::UnsupportedGeometry(format!("{name} needs a 2D box")));
            }
            (
                BoundaryRegime::Dirichlet,
                Solution::BoxBubble {
                    lo: [lo[0], lo[1]],
                    hi: [hi[0], hi[1]],
                },
            )
        }
        "dirichlet-hexagram2d" => (BoundaryRegime::Dirichlet, Solution::SinExpCos),
        "dirichlet-holes3d" => (BoundaryRegime::Dirichlet, Solution::ExpDecay),
        "navier-sinsq2d" => (BoundaryRegime::Navier, Solution::SinRadiusSquared),
        "navier-porous2d" => (BoundaryRegime::Navier, Solution::ExpSin),
        "navier-shell3d" => (BoundaryRegime::Navier, Solution::TripleSine),
        _ => unreachable!(),
    };
    if domain.dim() != solution.dim() {
        return Err(Error::UnsupportedGeometry(format!(
            "{name} is {}-dimensional but the domain is {}-dimensional",
            solution.dim(),
            domain.dim()
        )));
    }
    Ok(ProblemSpec {
        name,
        regime,
        solution,
        domain,
    })
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.solution.dim()
    }

    pub fn exact_u(&self, x: &[f64]) -> f64 {
        self.solution.value(x)
    }

    pub fn source_f(&self, x: &[f64]) -> f64 {
        self.solution.bilaplacian(x)
    }

    pub fn boundary_g(&self, x: &[f64]) -> f64 {
        self.solution.value(x)
    }

    /// Normal-derivative data; only Dirichlet problems carry it.
    pub fn boundary_h(&self, x: &[f64], normal: &[f64]) -> Option<f64> {
        (self.regime == BoundaryRegime::Dirichlet).then(|| {
            self.solution
                .gradient(x)
                .iter()
                .zip(normal)
                .map(|(g, n)| g * n)
                .sum()
        })
    }

    /// Laplacian data; only Navier problems carry it.
    pub fn boundary_k(&self, x: &[f64]) -> Option<f64> {
        (self.regime == BoundaryRegime::Navier).then(|| self.solution.laplacian(x))
    }

    /// `Δu*`, available for every problem.
    pub fn exact_laplacian(&self, x: &[f64]) -> f64 {
        self.solution.laplacian(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_values() {
        let p = get_problem("dirichlet-poly2d", None).unwrap();
        assert_eq!(p.exact_u(&[0.0, 0.0]), 1.0);
        assert_eq!(p.source_f(&[0.0, 0.0]), 80.0);

        let p = get_problem("navier-sinsq2d", None).unwrap();
        assert_eq!(p.source_f(&[0.0, 0.0]), 0.0);
        assert_eq!(p.boundary_k(&[0.0, 0.0]), Some(4.0));
        assert_eq!(p.boundary_h(&[0.0, 0.0], &[1.0, 0.0]), None);
    }

    #[test]
    fn exp_decay_source_is_the_closed_form() {
        let p = get_problem("dirichlet-holes3d", None).unwrap();
        let x = [1.3, 2.1, 2.9];
        let e = (-0.25f64 * (x[0] + x[1] + x[2])).exp();
        assert!((p.source_f(&x) - 225.0 / 128.0 * e).abs() < 1e-15);
        // 50 * 9 * (1/4)^4 = 225/128
        assert!((50.0 * 9.0 / 256.0 - 225.0 / 128.0f64).abs() < 1e-15);
    }

    #[test]
    fn triple_sine_relations() {
        let p = get_problem("navier-shell3d", None).unwrap();
        let x = [0.3, -0.4, 0.5];
        let u = p.exact_u(&x);
        assert!((p.boundary_k(&x).unwrap() + 3.0 * PI * PI * u).abs() < 1e-12);
        assert!((p.source_f(&x) - 9.0 * PI.powi(4) * u).abs() < 1e-10);
    }

    #[test]
    fn harmonic_problem_has_zero_data() {
        let p = get_problem("navier-porous2d", None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = p.domain.sample_interior(100, &mut rng).unwrap();
        for i in 0..100 {
            let x = [pts[(i, 0)], pts[(i, 1)]];
            assert_eq!(p.source_f(&x), 0.0);
            assert_eq!(p.boundary_k(&x), Some(0.0));
        }
    }

    #[test]
    fn lookups_and_overrides() {
        assert!(matches!(get_problem("nope", None), Err(Error::Lookup { .. })));
        let b = Domain::new_box([0.0, 0.0], [5.0, 5.0]).unwrap();
        let p = get_problem("dirichlet-poly2d", Some(b)).unwrap();
        assert_eq!(p.exact_u(&[0.0, 2.0]), 0.0);
        assert_eq!(p.exact_u(&[2.5, 2.5]), 2.5f64.powi(8));
        let cube = Domain::default_holed_cube();
        assert!(get_problem("navier-sinsq2d", Some(cube)).is_err());
        let star = Domain::hexagram([-1.0, -1.0], [1.0, 1.0]).unwrap();
        assert!(get_problem("dirichlet-poly2d", Some(star)).is_err());
        for name in PROBLEM_NAMES {
            assert_eq!(get_problem(name, None).unwrap().name, name);
        }
    }

    fn fd_laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
        let mut y = x.to_vec();
        let mut sum = 0.0;
        for k in 0..x.len() {
            y[k] = x[k] + h;
            let fp = f(&y);
            y[k] = x[k] - h;
            let fm = f(&y);
            y[k] = x[k];
            sum += (fp - 2.0 * f(x) + fm) / (h * h);
        }
        sum
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for name in PROBLEM_NAMES {
            for setting in reference_settings(name).unwrap() {
                let p = get_problem(name, Some(setting.domain.clone())).unwrap();
                let pts = p.domain.sample_interior(100, &mut rng).unwrap();
                let (lo, hi) = p.domain.bounding_box();
                let scale = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
                let h = 1e-2 * scale;
                let u = |x: &[f64]| p.exact_u(x);
                let (mut err, mut reference) = (0.0f64, 0.0f64);
                let (mut lap_err, mut lap_ref) = (0.0f64, 0.0f64);
                for i in 0..100 {
                    let x: Vec<f64> = (0..p.dim()).map(|k| pts[(i, k)]).collect();
                    let bilap = |h: f64| fd_laplacian(&|y: &[f64]| fd_laplacian(&u, y, h), &x, h);
                    let fd = (4.0 * bilap(0.5 * h) - bilap(h)) / 3.0;
                    err = err.max((fd - p.source_f(&x)).abs());
                    reference = reference.max(p.source_f(&x).abs());
                    let hl = 1e-3 * scale;
                    let fd_lap = (4.0 * fd_laplacian(&u, &x, 0.5 * hl) - fd_laplacian(&u, &x, hl)) / 3.0;
                    lap_err = lap_err.max((fd_lap - p.exact_laplacian(&x)).abs());
                    lap_ref = lap_ref.max(p.exact_laplacian(&x).abs());
                }
                let rel = if reference > 0.0 { err / reference } else { err };
                assert!(rel < 1e-3, "{name} on {:?}: {rel}", p.domain.bounding_box());
                let lap_rel = if lap_ref > 0.0 { lap_err / lap_ref } else { lap_err };
                assert!(lap_rel < 1e-5, "{name} laplacian: {lap_rel}");
            }
        }
    }

    #[test]
    fn normal_derivative_data_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["dirichlet-poly2d", "dirichlet-hexagram2d", "dirichlet-holes3d"] {
            let p = get_problem(name, None).unwrap();
            let (pts, normals) = p.domain.sample_boundary(200, &mut rng).unwrap();
            for i in 0..pts.nrows() {
                let x: Vec<f64> = (0..p.dim()).map(|k| pts[(i, k)]).collect();
                let n: Vec<f64> = (0..p.dim()).map(|k| normals[(i, k)]).collect();
                let step = 1e-5;
                let xp: Vec<f64> = x.iter().zip(&n).map(|(a, b)| a + step * b).collect();
                let xm: Vec<f64> = x.iter().zip(&n).map(|(a, b)| a - step * b).collect();
                let fd = (p.exact_u(&xp) - p.exact_u(&xm)) / (2.0 * step);
                let h = p.boundary_h(&x, &n).unwrap();
                assert!((fd - h).abs() <= 1e-4 * h.abs().max(1.0), "{name}: {fd} vs {h}");
                assert_eq!(p.boundary_g(&x), p.exact_u(&x));
            }
        }
    }
}
