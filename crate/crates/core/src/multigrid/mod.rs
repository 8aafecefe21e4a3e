//! Cascadic multigrid: solve on a coarse mesh, refine, prolongate, repeat.

use std::time::Instant;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::methods::{run, MethodConfig, MethodKind, RunRecord};
use crate::mmot::{build_mesh, discretize_masked, refine, Density, DiscreteSystem, DiscretizeOptions, Mesh, MeshStyle, MmotOracle};
use crate::polytope::{Csr, Marginal, ObjectiveOracle, Pattern, Plan, Storage};

/// One mesh with its truncated system.
#[derive(Clone, Debug)]
pub struct Level {
    pub mesh: Mesh,
    pub system: DiscreteSystem,
}

/// Nested meshes. A child survives truncation only if its parent did.
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    density: Density,
    opts: DiscretizeOptions,
    levels: Vec<Level>,
}

impl MeshHierarchy {
    pub fn new(density: Density, k0: usize, style: MeshStyle, opts: DiscretizeOptions) -> Result<Self> {
        let mesh = build_mesh(&density, k0, style)?;
        let system = discretize_masked(&density, &mesh, &opts, None)?;
        Ok(Self { density, opts, levels: vec![Level { mesh, system }] })
    }

    pub fn build(density: Density, k0: usize, style: MeshStyle, opts: DiscretizeOptions, n_levels: usize) -> Result<Self> {
        let mut h = Self::new(density, k0, style, opts)?;
        while h.len() < n_levels {
            h.push_refined()?;
        }
        Ok(h)
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, l: usize) -> &Level {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Refines the finest mesh and discretizes it.
    pub fn push_refined(&mut self) -> Result<()> {
        let coarse = self.levels.last().expect("hierarchy is never empty");
        let mesh = refine(&coarse.mesh, &self.density)?;
        let mut parent_kept = vec![false; coarse.mesh.len()];
        for &p in &coarse.system.kept {
            parent_kept[p] = true;
        }
        let parents = mesh.parents.as_ref().expect("refined meshes carry parent links");
        let allowed: Vec<bool> = parents.iter().map(|&p| parent_kept[p]).collect();
        let system = discretize_masked(&self.density, &mesh, &self.opts, Some(&allowed))?;
        let level = self.levels.len();
        self.levels.push(Level { mesh, system });
        // Every surviving parent must keep at least one child, or its mass is lost.
        let map = self.parent_map(level)?;
        let mut seen = vec![false; self.levels[level - 1].system.len()];
        for p in map {
            seen[p] = true;
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            self.levels.pop();
            return Err(Error::Domain(format!("level {level}: element {p} of level {} has no surviving child", level - 1)));
        }
        Ok(())
    }

    /// Truncated parent index of each truncated atom on level `l ≥ 1`.
    pub fn parent_map(&self, l: usize) -> Result<Vec<usize>> {
        if l == 0 || l >= self.levels.len() {
            return Err(Error::Domain(format!("no parent level for level {l}")));
        }
        let (coarse, fine) = (&self.levels[l - 1], &self.levels[l]);
        let mut position = vec![usize::MAX; coarse.mesh.len()];
        for (i, &m) in coarse.system.kept.iter().enumerate() {
            position[m] = i;
        }
        let parents = fine.mesh.parents.as_ref().ok_or_else(|| Error::Domain(format!("level {l} has no parent links")))?;
        fine.system
            .kept
            .iter()
            .map(|&c| {
                let p = parents[c];
                match position[p] {
                    usize::MAX => Err(Error::Orphan { child: c, parent: p }),
                    i => Ok(i),
                }
            })
            .collect()
    }
}

/// y_kl = y_{k′l′} / (n_{k′} n_{l′}) with n counting surviving children.
pub fn prolongate_with(y: &Plan, parent: &[usize], target: &Marginal) -> Result<Plan> {
    let (m, n) = y.shape();
    if m != n {
        return Err(Error::Shape { expected: (m, m), got: (m, n) });
    }
    if parent.len() != target.len() {
        return Err(Error::Shape { expected: (parent.len(), 1), got: (target.len(), 1) });
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, &p) in parent.iter().enumerate() {
        if p >= m {
            return Err(Error::Orphan { child: c, parent: p });
        }
        children[p].push(c);
    }
    let k = parent.len();
    let storage = match y.storage() {
        Storage::Dense(d) => Storage::Dense(Array2::from_shape_fn((k, k), |(a, b)| {
            let (pa, pb) = (parent[a], parent[b]);
            d[(pa, pb)] / (children[pa].len() * children[pb].len()) as f64
        })),
        Storage::Sparse(s) => {
            let mut pairs = Vec::new();
            for (pa, pb) in s.pattern().iter() {
                for &a in &children[pa] {
                    for &b in &children[pb] {
                        pairs.push((a, b));
                    }
                }
            }
            let pattern = Pattern::from_pairs(k, k, &pairs)?;
            let values = pattern
                .iter()
                .map(|(a, b)| {
                    let (pa, pb) = (parent[a], parent[b]);
                    s.get(pa, pb) / (children[pa].len() * children[pb].len()) as f64
                })
                .collect();
            Storage::Sparse(Csr::new(pattern, values)?)
        }
    };
    Plan::new(storage, target.clone(), target.clone())
}

/// Prolongates level `l − 1` plans onto level `l`.
pub fn prolongate(y_prev: &[Plan], hierarchy: &MeshHierarchy, l: usize) -> Result<Vec<Plan>> {
    let parent = hierarchy.parent_map(l)?;
    let target = hierarchy.level(l).system.marginal();
    y_prev.iter().map(|y| prolongate_with(y, &parent, &target)).collect()
}

/// Stopping tolerance per level.
#[derive(Clone, Debug, PartialEq)]
pub enum TolSchedule {
    /// tol_ℓ = tol₀ · (√(2^d))^{log₂(K_ℓ / K₀)}, K counted before truncation.
    Growth { tol0: f64 },
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelConfig {
    pub levels: usize,
    pub tol: TolSchedule,
}

impl LevelConfig {
    pub fn growth(levels: usize, tol0: f64) -> Self {
        Self { levels, tol: TolSchedule::Growth { tol0 } }
    }

    pub fn tol(&self, level: usize, k0: usize, k: usize, dim: usize) -> Result<f64> {
        let t = match &self.tol {
            TolSchedule::Growth { tol0 } => tol0 * (2f64.powi(dim as i32).sqrt()).powf((k as f64 / k0 as f64).log2()),
            TolSchedule::Explicit(v) => *v.get(level).ok_or_else(|| Error::Domain(format!("no tolerance given for level {level}")))?,
        };
        if !(t > 0.0) {
            return Err(Error::Domain(format!("tolerance {t} for level {level} is not positive")));
        }
        Ok(t)
    }
}

/// Outcome of one level.
#[derive(Clone, Debug)]
pub struct LevelRun {
    pub level: usize,
    pub k: usize,
    pub k_trunc: usize,
    pub tol: f64,
    pub record: RunRecord,
}

#[derive(Clone, Debug)]
pub struct CmgRun {
    pub hierarchy: MeshHierarchy,
    pub levels: Vec<LevelRun>,
    pub wall_ms: f64,
}

impl CmgRun {
    /// `level,K,K_trunc,tol,iterations,obj` rows, plus `wall_ms` when `timing`.
    pub fn write_summary(&self, mut out: impl std::io::Write, timing: bool) -> Result<()> {
        write!(out, "level,K,K_trunc,tol,iterations,obj")?;
        writeln!(out, "{}", if timing { ",wall_ms" } else { "" })?;
        for l in &self.levels {
            write!(
                out,
                "{},{},{},{:e},{},{:.10}",
                l.level,
                l.k,
                l.k_trunc,
                l.tol,
                l.record.iterations.len(),
                l.record.final_objective()
            )?;
            if timing {
                write!(out, ",{:.3}", l.record.wall_ms)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn last(&self) -> &LevelRun {
        self.levels.last().expect("at least one level")
    }
}

/// Level 0 with `accurate` from a random start, later levels with `cheap` from
/// the prolongated plans. Level tolerances replace the configs' own.
pub fn run_cmg(
    density: Density,
    k0: usize,
    style: MeshStyle,
    opts: DiscretizeOptions,
    levels: &LevelConfig,
    accurate: &MethodConfig,
    cheap: &MethodConfig,
) -> Result<CmgRun> {
    run_cmg_guarded(density, k0, style, opts, levels, accurate, cheap, &mut |_, _| Ok(()))
}

/// As [`run_cmg`]; `guard` sees each level's system before it is solved and may abort.
#[allow(clippy::too_many_arguments)]
pub fn run_cmg_guarded(
    density: Density,
    k0: usize,
    style: MeshStyle,
    opts: DiscretizeOptions,
    levels: &LevelConfig,
    accurate: &MethodConfig,
    cheap: &MethodConfig,
    guard: &mut dyn FnMut(usize, &DiscreteSystem) -> Result<()>,
) -> Result<CmgRun> {
    if levels.levels == 0 {
        return Err(Error::Domain("need at least one level".into()));
    }
    let start = Instant::now();
    let dim = density.dim;
    let mut hierarchy = MeshHierarchy::new(density, k0, style, opts)?;
    let mut runs: Vec<LevelRun> = Vec::with_capacity(levels.levels);
    for l in 0..levels.levels {
        let annotate = |e: Error| Error::Level { level: l, source: Box::new(e) };
        if l > 0 {
            hierarchy.push_refined().map_err(annotate)?;
        }
        let k = hierarchy.level(l).mesh.len();
        let tol = levels.tol(l, k0, k, dim)?;
        let init = match runs.last() {
            Some(prev) => Some(prolongate(&prev.record.plans, &hierarchy, l).map_err(annotate)?),
            None => None,
        };
        let mut cfg = if l == 0 { accurate.clone() } else { cheap.clone() };
        cfg.tol = tol;
        cfg.seed = cfg.seed.wrapping_add(l as u64);
        let sys = &hierarchy.level(l).system;
        guard(l, sys)?;
        let oracle = MmotOracle::new(sys);
        let m = sys.marginal();
        let marginals = vec![(m.clone(), m); oracle.block_count()];
        let record = run(&oracle, &marginals, &cfg, init, None).map_err(annotate)?;
        runs.push(LevelRun { level: l, k, k_trunc: sys.len(), tol, record });
    }
    Ok(CmgRun { hierarchy, levels: runs, wall_ms: start.elapsed().as_secs_f64() * 1e3 })
}

/// Defaults: KLALM on level 0, S-KLALM above.
pub fn default_configs(seed: u64) -> (MethodConfig, MethodConfig) {
    let mut a = MethodConfig::new(MethodKind::Klalm);
    let mut c = MethodConfig::new(MethodKind::SKlalm);
    a.seed = seed;
    c.seed = seed;
    (a, c)
}
