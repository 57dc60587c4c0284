//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! problem = dirichlet-poly2d
//! activation = sine
//! hidden = 1000
//! delta = 8
//! domain.kind = box
//! domain.lo = -1, -1
//! domain.hi = 1, 1
//! sweep.parameter = delta
//! sweep.values = 1, 2, 3
//! ```
//!
//! `hole = c1, ..., cd, r` and `triangle = x1, y1, x2, y2, x3, y3` may be
//! repeated; each line adds one hole or hexagram triangle. Later lines
//! override earlier ones for every other key.

use std::fmt;
use std::str::FromStr;

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Hole};
use crate::problems::{reference_settings, PROBLEM_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    HiddenN,
    Delta,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::HiddenN => "hidden",
            SweepParameter::Delta => "delta",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hidden" | "hidden_n" | "n" => Ok(SweepParameter::HiddenN),
            "delta" => Ok(SweepParameter::Delta),
            other => Err(Error::Lookup {
                kind: "sweep parameter",
                name: other.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Geometry keys as read from a file, turned into a [`Domain`] on demand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DomainParams {
    pub kind: Option<String>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub r_inner: Option<f64>,
    pub r_outer: Option<f64>,
    pub holes: Vec<Hole>,
    pub triangles: Vec<[[f64; 2]; 3]>,
}

fn two(v: &[f64], key: &str) -> Result<[f64; 2]> {
    v.try_into().map_err(|_| Error::Config(format!("{key} needs 2 coordinates, got {}", v.len())))
}

fn three(v: &[f64], key: &str) -> Result<[f64; 3]> {
    v.try_into().map_err(|_| Error::Config(format!("{key} needs 3 coordinates, got {}", v.len())))
}

impl DomainParams {
    /// `None` when no kind was given, meaning the problem's default domain.
    pub fn build(&self) -> Result<Option<Domain>> {
        let Some(kind) = self.kind.as_deref() else {
            return Ok(None);
        };
        let need = |v: &Option<Vec<f64>>, key: &str| {
            v.clone().ok_or_else(|| Error::Config(format!("domain kind {kind} needs domain.{key}")))
        };
        let domain = match kind {
            "box" => Domain::new_box(need(&self.lo, "lo")?, need(&self.hi, "hi")?)?,
            "hexagram" => {
                let lo = two(&need(&self.lo, "lo")?, "domain.lo")?;
                let hi = two(&need(&self.hi, "hi")?, "domain.hi")?;
                match self.triangles.len() {
                    0 => Domain::hexagram(lo, hi)?,
                    2 => Domain::hexagram_from_triangles(lo, hi, [self.triangles[0], self.triangles[1]])?,
                    n => return Err(Error::Config(format!("a hexagram takes 0 or 2 triangles, got {n}"))),
                }
            }
            "porous" => {
                let lo = two(&need(&self.lo, "lo")?, "domain.lo")?;
                let hi = two(&need(&self.hi, "hi")?, "domain.hi")?;
                if self.holes.is_empty() {
                    Domain::default_porous_plate(lo, hi)?
                } else {
                    Domain::porous_plate(lo, hi, self.holes.clone())?
                }
            }
            "holed-cube" => {
                if self.lo.is_none() && self.hi.is_none() && self.holes.is_empty() {
                    Domain::default_holed_cube()
                } else {
                    let lo = three(&need(&self.lo, "lo")?, "domain.lo")?;
                    let hi = three(&need(&self.hi, "hi")?, "domain.hi")?;
                    Domain::holed_cube(lo, hi, self.holes.clone())?
                }
            }
            "shell" => {
                let center = match &self.center {
                    Some(c) => three(c, "domain.center")?,
                    None => [0.0; 3],
                };
                let r_inner = self.r_inner.ok_or_else(|| Error::Config("shell needs domain.r_inner".into()))?;
                let r_outer = self.r_outer.ok_or_else(|| Error::Config("shell needs domain.r_outer".into()))?;
                Domain::spherical_shell(center, r_inner, r_outer)?
            }
            other => {
                return Err(Error::Lookup {
                    kind: "domain kind",
                    name: other.into(),
                })
            }
        };
        Ok(Some(domain))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub domain: DomainParams,
    pub activation: ActivationKind,
    pub hidden_n: usize,
    /// `None` picks the reference scale factor for the problem's domain.
    pub delta: Option<f64>,
    pub q_interior: usize,
    pub p_boundary: usize,
    pub ridge_lambda: f64,
    pub seed: u64,
    pub replicates: usize,
    /// Per-axis test grid; empty means 128 per axis in 2D and 30 in 3D.
    pub test_grid: Vec<usize>,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: PROBLEM_NAMES[0].into(),
            domain: DomainParams::default(),
            activation: ActivationKind::Sine,
            hidden_n: 1000,
            delta: None,
            q_interior: 10_000,
            p_boundary: 4_000,
            ridge_lambda: 0.0,
            seed: 0,
            replicates: 5,
            test_grid: Vec::new(),
            sweep: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

impl ExperimentConfig {
    /// Parses a config file body, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Applies one setting; flags and file lines share this.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "activation" => self.activation = value.parse()?,
            "hidden" | "hidden_n" => self.hidden_n = parse_num(key, value)?,
            "delta" => self.delta = Some(parse_num(key, value)?),
            "q" | "q_interior" => self.q_interior = parse_num(key, value)?,
            "p" | "p_boundary" => self.p_boundary = parse_num(key, value)?,
            "lambda" | "ridge_lambda" => self.ridge_lambda = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "replicates" => self.replicates = parse_num(key, value)?,
            "grid" | "test_grid" => {
                self.test_grid = value.split(',').map(|v| parse_num(key, v)).collect::<Result<_>>()?
            }
            "domain.kind" => self.domain.kind = Some(value.to_string()),
            "domain.lo" => self.domain.lo = Some(parse_list(key, value)?),
            "domain.hi" => self.domain.hi = Some(parse_list(key, value)?),
            "domain.center" => self.domain.center = Some(parse_list(key, value)?),
            "domain.r_inner" => self.domain.r_inner = Some(parse_num(key, value)?),
            "domain.r_outer" => self.domain.r_outer = Some(parse_num(key, value)?),
            "hole" | "domain.hole" => {
                let mut v = parse_list(key, value)?;
                if v.len() < 3 {
                    return Err(Error::Config(format!("{key} needs center coordinates and a radius")));
                }
                let radius = v.pop().unwrap();
                self.domain.holes.push(Hole::new(v, radius));
            }
            "triangle" | "domain.triangle" => {
                let v = parse_list(key, value)?;
                if v.len() != 6 {
                    return Err(Error::Config(format!("{key} needs 6 numbers, got {}", v.len())));
                }
                self.domain.triangles.push([[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]]);
            }
            "sweep.parameter" => {
                let parameter = value.parse()?;
                match &mut self.sweep {
                    Some(s) => s.parameter = parameter,
                    None => {
                        self.sweep = Some(Sweep {
                            parameter,
                            values: Vec::new(),
                        })
                    }
                }
            }
            "sweep.values" => {
                let values = if value.is_empty() { Vec::new() } else { parse_list(key, value)? };
                match &mut self.sweep {
                    Some(s) => s.values = values,
                    None => {
                        self.sweep = Some(Sweep {
                            parameter: SweepParameter::Delta,
                            values,
                        })
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        reference_settings(&self.problem)?;
        for (name, v) in [
            ("hidden", self.hidden_n),
            ("q", self.q_interior),
            ("p", self.p_boundary),
            ("replicates", self.replicates),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("delta must be positive, got {d}")));
            }
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be non-negative, got {}", self.ridge_lambda)));
        }
        if self.test_grid.iter().any(|&r| r < 2) {
            return Err(Error::Config("grid counts must be at least 2".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep values are empty".into()));
            }
            for &v in &sweep.values {
                let ok = match sweep.parameter {
                    SweepParameter::Delta => v > 0.0 && v.is_finite(),
                    SweepParameter::HiddenN => v >= 1.0 && v.fract() == 0.0,
                };
                if !ok {
                    return Err(Error::Config(format!("invalid {} sweep value {v}", sweep.parameter)));
                }
            }
        }
        Ok(())
    }

    /// The configured scale factor, or the reference one for this problem,
    /// domain and activation.
    pub fn resolved_delta(&self, domain: &Domain) -> Result<f64> {
        if let Some(d) = self.delta {
            return Ok(d);
        }
        reference_settings(&self.problem)?
            .iter()
            .find(|s| s.domain == *domain)
            .map(|s| s.delta(self.activation))
            .ok_or_else(|| Error::Config("no reference delta for this domain; set `delta`".into()))
    }

    /// Per-axis test grid for a `dim`-dimensional problem.
    pub fn resolved_grid(&self, dim: usize) -> Result<Vec<usize>> {
        match self.test_grid.len() {
            0 => Ok(vec![if dim == 2 { 128 } else { 30 }; dim]),
            1 => Ok(vec![self.test_grid[0]; dim]),
            n if n == dim => Ok(self.test_grid.clone()),
            n => Err(Error::Config(format!("grid has {n} counts for a {dim}-dimensional problem"))),
        }
    }
}
