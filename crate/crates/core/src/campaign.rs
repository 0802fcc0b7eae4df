//! Experiment runner: build or load a mesh, then repeatedly select elements
//! and refine them locally, recording quality statistics per iteration.
//!
//! Configuration is a flat `key = value` file (`#` starts a comment); the
//! same keys can be overridden one by one with [`CampaignConfig::set`].

use std::path::PathBuf;
use std::str::FromStr;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::{
    select_by_curvature, select_by_hypersphere, select_random, CylinderRegion, GravitationalPotential, Halfspace,
};
use crate::driver::{get_non_conformal_simplices, local_refine_with, RefineOptions, RefinementSet};
use crate::error::{Error, Result};
use crate::io::{read_mesh, write_mesh};
use crate::marking::mark_mesh;
use crate::mesh::{Element, Mesh};
use crate::meshgen::{kuhn_mesh, random_simplex_mesh, regular_simplex_mesh, GridSpec};
use crate::quality::{quality_stats, QualityReport};
use crate::verify::{is_mesh_conformal, is_reflected};

/// Source of the initial mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Kuhn,
    Regular,
    Random,
    File(PathBuf),
}

/// How the refinement set of each iteration is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    Uniform,
    Hypersphere,
    Curvature,
    Random,
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Criterion::Uniform),
            "hypersphere" => Ok(Criterion::Hypersphere),
            "curvature" => Ok(Criterion::Curvature),
            "random" => Ok(Criterion::Random),
            _ => Err(Error::InvalidArgument(format!(
                "unknown criterion '{s}' (uniform, hypersphere, curvature, random)"
            ))),
        }
    }
}

/// Verification run after every iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Checks {
    pub conformity: bool,
    pub reflectivity: bool,
}

impl FromStr for Checks {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Checks::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "none" => {}
                "conformity" => c.conformity = true,
                "reflectivity" => c.reflectivity = true,
                "all" => {
                    c.conformity = true;
                    c.reflectivity = true;
                }
                _ => return Err(Error::InvalidArgument(format!("unknown check '{part}'"))),
            }
        }
        Ok(c)
    }
}

/// All campaign settings. See the README for the meaning of every key.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub generator: Generator,
    pub dim: usize,
    pub divisions: usize,
    pub edge: f64,
    pub min_quality: f64,
    pub seed: u64,
    pub criterion: Criterion,
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub halfspace_axis: Option<usize>,
    pub halfspace_bound: Option<f64>,
    pub fraction: f64,
    pub count: Option<usize>,
    pub cylinder: CylinderRegion,
    pub potential: GravitationalPotential,
    pub iterations: usize,
    /// Run the conformal closure after each iteration. `None` means off for
    /// the uniform criterion (every element is bisected once per iteration,
    /// which is conformal again after every `n` iterations) and on otherwise.
    pub conform: Option<bool>,
    pub max_closure_rounds: usize,
    pub checks: Checks,
    pub csv: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            generator: Generator::Kuhn,
            dim: 2,
            divisions: 2,
            edge: 1.0,
            min_quality: 0.01,
            seed: 0,
            criterion: Criterion::Uniform,
            center: None,
            radius: 0.25,
            halfspace_axis: None,
            halfspace_bound: None,
            fraction: 0.1,
            count: None,
            cylinder: CylinderRegion::default(),
            potential: GravitationalPotential::default(),
            iterations: 1,
            conform: None,
            max_closure_rounds: RefineOptions::default().max_closure_rounds,
            checks: Checks::default(),
            csv: None,
            output: None,
        }
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid value '{v}' for '{key}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| value(key, t.trim())).collect()
}

fn triple(key: &str, v: &str) -> Result<[f64; 3]> {
    list(key, v)?
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("'{key}' needs three comma-separated numbers")))
}

impl CampaignConfig {
    /// Parses a configuration file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = CampaignConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected 'key = value'".into(),
            })?;
            c.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(c)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "generator" => {
                self.generator = match v {
                    "kuhn" => Generator::Kuhn,
                    "regular" => Generator::Regular,
                    "random" => Generator::Random,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown generator '{v}' (kuhn, regular, random)"
                        )))
                    }
                }
            }
            "input" => self.generator = Generator::File(PathBuf::from(v)),
            "dim" => self.dim = value(key, v)?,
            "divisions" => self.divisions = value(key, v)?,
            "edge" => self.edge = value(key, v)?,
            "min_quality" => self.min_quality = value(key, v)?,
            "seed" => self.seed = value(key, v)?,
            "criterion" => self.criterion = v.parse()?,
            "center" => self.center = Some(list(key, v)?),
            "radius" => self.radius = value(key, v)?,
            "halfspace_axis" => self.halfspace_axis = Some(value(key, v)?),
            "halfspace_bound" => self.halfspace_bound = Some(value(key, v)?),
            "fraction" => self.fraction = value(key, v)?,
            "count" => self.count = Some(value(key, v)?),
            "cylinder_center" => self.cylinder.center = list(key, v)?,
            "cylinder_radius" => self.cylinder.radius = value(key, v)?,
            "t_min" => self.cylinder.t_min = value(key, v)?,
            "t_max" => self.cylinder.t_max = value(key, v)?,
            "g" => self.potential.g = value(key, v)?,
            "m1" => self.potential.m1 = value(key, v)?,
            "m2" => self.potential.m2 = value(key, v)?,
            "p1" => self.potential.p1 = triple(key, v)?,
            "p2" => self.potential.p2 = triple(key, v)?,
            "velocity" => self.potential.v = value(key, v)?,
            "iterations" => self.iterations = value(key, v)?,
            "conform" => self.conform = Some(value(key, v)?),
            "max_closure_rounds" => self.max_closure_rounds = value(key, v)?,
            "check" => self.checks = v.parse()?,
            "csv" => self.csv = Some(PathBuf::from(v)),
            "output" => self.output = Some(PathBuf::from(v)),
            _ => return Err(Error::InvalidArgument(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Builds or loads the initial mesh.
    pub fn initial_mesh(&self) -> Result<Mesh> {
        match &self.generator {
            Generator::Kuhn => kuhn_mesh(&GridSpec::unit(self.dim, self.divisions)),
            Generator::Regular => regular_simplex_mesh(self.dim, self.edge),
            Generator::Random => random_simplex_mesh(self.dim, self.seed, self.min_quality),
            Generator::File(p) => read_mesh(p),
        }
    }

    fn halfspace(&self) -> Result<Option<Halfspace>> {
        match (self.halfspace_axis, self.halfspace_bound) {
            (None, None) => Ok(None),
            (Some(axis), Some(bound)) => Ok(Some(Halfspace { axis, bound })),
            _ => Err(Error::InvalidArgument(
                "halfspace_axis and halfspace_bound must be given together".into(),
            )),
        }
    }
}

/// A verification that failed during a campaign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub iteration: usize,
    pub check: &'static str,
}

/// Everything a campaign produced. Reports start with iteration 0, the
/// initial mesh.
#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub reports: Vec<QualityReport>,
    pub mesh: Mesh,
    pub failure: Option<CheckFailure>,
}

/// Runs the campaign and writes the CSV and final mesh if configured.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome> {
    let initial = config.initial_mesh()?;
    let root = initial.clone();
    let mut mesh = if initial.elements().iter().any(Element::is_marked) {
        initial
    } else {
        mark_mesh(initial)?
    };
    let halfspace = config.halfspace()?;
    let center = config
        .center
        .clone()
        .unwrap_or_else(|| vec![0.5; mesh.dim()]);
    let conform = config.conform.unwrap_or(config.criterion != Criterion::Uniform);
    let options = RefineOptions {
        max_closure_rounds: config.max_closure_rounds,
        renumber: true,
        conform,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut reports = vec![quality_stats(&mesh)?];
    let mut failure = None;
    for iteration in 1..=config.iterations {
        let set = match config.criterion {
            Criterion::Uniform => RefinementSet::all(&mesh),
            Criterion::Hypersphere => select_by_hypersphere(&mesh, &center, config.radius, halfspace)?,
            Criterion::Curvature => {
                select_by_curvature(&mesh, &config.potential, &config.cylinder, config.fraction)?
            }
            Criterion::Random => {
                let count = config
                    .count
                    .unwrap_or_else(|| (config.fraction * mesh.element_count() as f64).ceil() as usize);
                select_random(&mesh, &mut rng, count)
            }
        };
        let selected = set.len();
        mesh = local_refine_with(mesh, &set, &options, &mut ())?.mesh;
        let mut report = quality_stats(&mesh)?;
        report.iteration = iteration;
        info!(
            "iteration {iteration}: {selected} selected, {} elements, {} vertices, q in [{:.4}, {:.4}]",
            report.elements, report.vertices, report.min_q, report.max_q
        );
        reports.push(report);

        // Without closure, hanging vertices are expected between the
        // passes, so the checks only run every `n` iterations.
        let due = conform || iteration % mesh.dim() == 0;
        if !due {
            continue;
        }
        if config.checks.conformity
            && (!is_mesh_conformal(&mesh, &root)? || !get_non_conformal_simplices(&mesh).is_empty())
        {
            failure = Some(CheckFailure {
                iteration,
                check: "conformity",
            });
        } else if config.checks.reflectivity && !is_reflected(&mesh)? {
            failure = Some(CheckFailure {
                iteration,
                check: "reflectivity",
            });
        }
        if failure.is_some() {
            break;
        }
    }

    if let Some(path) = &config.csv {
        let file = std::fs::File::create(path)?;
        crate::quality::write_csv(std::io::BufWriter::new(file), &reports)?;
    }
    if let Some(path) = &config.output {
        write_mesh(&mesh, path)?;
    }
    Ok(CampaignOutcome {
        reports,
        mesh,
        failure,
    })
}
