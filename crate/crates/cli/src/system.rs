use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use otbcd::mmot::{self, Density, DiscreteSystem, DiscretizeOptions, MeshStyle, Normalization, Term};
use otbcd::multigrid::MeshHierarchy;

use crate::settings::KeyValues;
use crate::Usage;

pub const DENSITY_SCHEMA: &str = "otbcd-density/1";

#[derive(Args, Clone, Debug, Default)]
pub struct SystemArgs {
    /// Catalog system number (1-8).
    #[arg(long)]
    pub system: Option<usize>,
    /// Custom density file instead of a catalog system.
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Number of mesh elements before truncation.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// equimass or equisize.
    #[arg(long)]
    pub style: Option<MeshStyle>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// unit or electrons.
    #[arg(long)]
    pub normalization: Option<Normalization>,
}

/// Everything needed to rebuild a discrete system.
#[derive(Clone, Debug)]
pub struct SystemSetup {
    pub source: Source,
    pub k: usize,
    pub style: MeshStyle,
    pub opts: DiscretizeOptions,
}

#[derive(Clone, Debug)]
pub enum Source {
    Catalog(usize),
    File(PathBuf),
}

impl SystemSetup {
    pub fn resolve(a: &SystemArgs, cfg: &KeyValues) -> Result<Self> {
        if a.system.is_some() && a.density.is_some() {
            return Err(Usage("give either --system or --density, not both".into()).into());
        }
        let source = if let Some(id) = a.system {
            Source::Catalog(id)
        } else if let Some(p) = &a.density {
            Source::File(p.clone())
        } else if let Some(id) = cfg.get::<usize>("system")? {
            Source::Catalog(id)
        } else if let Some(p) = cfg.get_str("density") {
            Source::File(PathBuf::from(p))
        } else {
            return Err(Usage("no system given: pass --system N or --density FILE".into()).into());
        };
        let k = cfg.pick_opt(a.k, "K")?.ok_or_else(|| Usage("missing --K".into()))?;
        let defaults = DiscretizeOptions::default();
        let dim = density_of(&source)?.dim;
        let style_default = if dim == 1 { MeshStyle::Equimass } else { MeshStyle::Equisize };
        Ok(Self {
            source,
            k,
            style: cfg.pick(a.style, "style", style_default)?,
            opts: DiscretizeOptions {
                threshold: cfg.pick(a.threshold, "threshold", defaults.threshold)?,
                beta: cfg.pick(a.beta, "beta", defaults.beta)?,
                normalization: cfg.pick(a.normalization, "normalization", defaults.normalization)?,
                dense_cost_limit: defaults.dense_cost_limit,
            },
        })
    }

    pub fn density(&self) -> Result<Density> {
        density_of(&self.source)
    }

    pub fn build(&self) -> Result<DiscreteSystem> {
        self.build_levels(1)
    }

    /// Finest system of an `levels`-deep hierarchy.
    pub fn build_levels(&self, levels: usize) -> Result<DiscreteSystem> {
        let h = MeshHierarchy::build(self.density()?, self.k, self.style, self.opts, levels.max(1))?;
        Ok(h.level(h.len() - 1).system.clone())
    }

    pub fn record(&self, kv: &mut KeyValues) {
        match &self.source {
            Source::Catalog(id) => kv.set("system", id),
            Source::File(p) => kv.set("density", p.display()),
        }
        kv.set("K", self.k);
        kv.set("style", self.style);
        kv.set("threshold", self.opts.threshold);
        kv.set("beta", self.opts.beta);
        kv.set("normalization", self.opts.normalization);
    }

    pub fn from_manifest(kv: &KeyValues) -> Result<Self> {
        let source = match (kv.get::<usize>("system")?, kv.get_str("density")) {
            (Some(id), _) => Source::Catalog(id),
            (None, Some(p)) => Source::File(PathBuf::from(p)),
            (None, None) => bail!("manifest names neither `system` nor `density`"),
        };
        Ok(Self {
            source,
            k: kv.require("K")?,
            style: kv.require("style")?,
            opts: DiscretizeOptions {
                threshold: kv.require("threshold")?,
                beta: kv.require("beta")?,
                normalization: kv.require("normalization")?,
                ..DiscretizeOptions::default()
            },
        })
    }
}

fn density_of(source: &Source) -> Result<Density> {
    match source {
        Source::Catalog(id) => Ok(mmot::system(*id)?),
        Source::File(p) => read_density(p),
    }
}

pub fn read_density(path: &Path) -> Result<Density> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_density(&text).with_context(|| format!("in {}", path.display()))
}

fn numbers(field: &str, v: &str) -> Result<Vec<f64>> {
    v.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| anyhow::anyhow!("field `{field}`: `{t}` is not a number")))
        .collect()
}

pub fn parse_density(text: &str) -> Result<Density> {
    let mut dim = None;
    let mut n_electrons = None;
    let mut domain = None;
    let mut terms = Vec::new();
    let mut schema = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').with_context(|| format!("line {}: expected `key = value`", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "schema" if v == DENSITY_SCHEMA => schema = true,
            "schema" => bail!("field `schema`: expected {DENSITY_SCHEMA}, found {v}"),
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| anyhow::anyhow!("field `dim`: `{v}` is not an integer"))?),
            "n_electrons" => n_electrons = Some(v.parse::<usize>().map_err(|_| anyhow::anyhow!("field `n_electrons`: `{v}` is not an integer"))?),
            "domain" => {
                let x = numbers(k, v)?;
                if x.len() % 2 != 0 || x.is_empty() {
                    bail!("field `domain`: expected lo hi pairs");
                }
                domain = Some(x.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>());
            }
            "gaussian" => {
                let x = numbers(k, v)?;
                if x.len() < 3 {
                    bail!("field `gaussian`: expected weight alpha center...");
                }
                terms.push(Term::Gaussian { weight: x[0], alpha: x[1], center: x[2..].to_vec() });
            }
            "cosine" => terms.push(Term::CosineBump { weight: single(k, v)? }),
            "constant" => terms.push(Term::Constant { weight: single(k, v)? }),
            other => bail!("line {}: unknown field `{other}`", n + 1),
        }
    }
    if !schema {
        bail!("field `schema`: missing");
    }
    let domain = domain.context("field `domain`: missing")?;
    let n_electrons = n_electrons.context("field `n_electrons`: missing")?;
    if let Some(d) = dim {
        if d != domain.len() {
            bail!("field `dim`: {d} disagrees with a {}-dimensional domain", domain.len());
        }
    }
    Density::new(terms, domain, n_electrons).map_err(|e| anyhow::anyhow!("field `gaussian`/`cosine`/`domain`: {e}"))
}

fn single(field: &str, v: &str) -> Result<f64> {
    match numbers(field, v)?.as_slice() {
        [w] => Ok(*w),
        _ => bail!("field `{field}`: expected one number"),
    }
}

pub fn render_density(d: &Density) -> String {
    let mut s = format!("schema = {DENSITY_SCHEMA}\ndim = {}\nn_electrons = {}\ndomain =", d.dim, d.n_electrons);
    for (lo, hi) in &d.domain {
        s.push_str(&format!(" {lo} {hi}"));
    }
    s.push('\n');
    for t in &d.terms {
        match t {
            Term::Gaussian { weight, alpha, center } => {
                s.push_str(&format!("gaussian = {weight} {alpha}"));
                for c in center {
                    s.push_str(&format!(" {c}"));
                }
                s.push('\n');
            }
            Term::CosineBump { weight } => s.push_str(&format!("cosine = {weight}\n")),
            Term::Constant { weight } => s.push_str(&format!("constant = {weight}\n")),
        }
    }
    s
}
