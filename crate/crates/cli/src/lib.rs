//! Experiment harness behind the `sparsereg` binary: benchmark sweeps with
//! deterministic seeding, a flat key=value config format, and CSV emission
//! with provenance columns. All output is byte-deterministic for a fixed
//! config and seed (timings go to stderr, never into CSV).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use sparsereg::linalg::{GaussianSampler, SampleSet};
use sparsereg::peel::iterative_peeling;
use sparsereg::rng::derive_seed;
use sparsereg::solvers::{basis_pursuit, SolverConfig};
use sparsereg::synth::{gen_figure1_instance, gen_suppfig_instance, PlantedInstance};
use sparsereg::Vector;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Figure1,
    SuppFig,
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Experiment::Figure1 => "figure1",
            Experiment::SuppFig => "suppfig",
        })
    }
}

impl std::str::FromStr for Experiment {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure1" => Ok(Experiment::Figure1),
            "suppfig" => Ok(Experiment::SuppFig),
            other => bail!("unknown experiment {other:?} (expected figure1 or suppfig)"),
        }
    }
}

/// Sweep configuration. `grid` must be strictly increasing and `seeds >= 1`.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub scale: f64,
    pub grid: Vec<usize>,
    pub seeds: u64,
    pub seed: u64,
    pub noise_var: f64,
    pub holdout: usize,
    pub max_iter: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            experiment: Experiment::Figure1,
            scale: 0.2,
            grid: vec![40, 80, 120, 159],
            seeds: 10,
            seed: 0,
            noise_var: 0.0,
            holdout: 10_000,
            max_iter: SolverConfig::default().max_iter,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            bail!("need at least one seed");
        }
        if self.grid.is_empty() {
            bail!("empty sample-size grid");
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            bail!("sample-size grid must be strictly increasing: {:?}", self.grid);
        }
        Ok(())
    }

    /// Canonical key=value form (also the config-hash input).
    pub fn canonical(&self) -> String {
        let grid = self
            .grid
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "experiment={}\nscale={}\ngrid={}\nseeds={}\nseed={}\nnoise_var={}\nholdout={}\nmax_iter={}\n",
            self.experiment, self.scale, grid, self.seeds, self.seed, self.noise_var,
            self.holdout, self.max_iter
        )
    }

    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        let out = h.finalize();
        let mut s = String::new();
        for b in out.iter().take(6) {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    /// Parses the flat key=value format ('#' starts a comment). Errors carry
    /// the 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = BenchConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {lineno}: expected key=value, got {line:?}"))?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |what: &str| format!("line {lineno}: bad value for {what}");
            match key {
                "experiment" => cfg.experiment = value.parse().with_context(|| ctx("experiment"))?,
                "scale" => cfg.scale = value.parse().with_context(|| ctx("scale"))?,
                "grid" => {
                    cfg.grid = value
                        .split(',')
                        .map(|v| v.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .with_context(|| ctx("grid"))?;
                }
                "seeds" => cfg.seeds = value.parse().with_context(|| ctx("seeds"))?,
                "seed" => cfg.seed = value.parse().with_context(|| ctx("seed"))?,
                "noise_var" => cfg.noise_var = value.parse().with_context(|| ctx("noise_var"))?,
                "holdout" => cfg.holdout = value.parse().with_context(|| ctx("holdout"))?,
                "max_iter" => cfg.max_iter = value.parse().with_context(|| ctx("max_iter"))?,
                other => bail!("line {lineno}: unknown key `{other}`"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One sweep cell.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: String,
    pub m: usize,
    pub seed_index: u64,
    /// Monte-Carlo out-of-sample prediction error on the holdout.
    pub error_oos: f64,
    /// Exact `||v_hat - v*||_Sigma^2` from the known covariance.
    pub error_sigma: f64,
    pub solver_converged: bool,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub config: BenchConfig,
}

impl BenchOutcome {
    /// Median of `error_oos` over seeds for a `(method, m)` cell.
    pub fn median_oos(&self, method: &str, m: usize) -> Option<f64> {
        let mut vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.m == m)
            .map(|r| r.error_oos)
            .collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(|a, b| a.total_cmp(b));
        Some(vals[vals.len() / 2])
    }

    /// Deterministic CSV bytes: per-run rows then mean/std summary rows.
    pub fn to_csv(&self) -> String {
        let hash = self.config.config_hash();
        let mut out = String::new();
        out.push_str("kind,method,m,seed,error_oos,error_sigma,converged,version,config\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "run,{},{},{},{},{},{},{VERSION},{hash}",
                r.method, r.m, r.seed_index, r.error_oos, r.error_sigma, r.solver_converged
            );
        }
        // summaries in deterministic (method, m) order
        let mut cells: Vec<(String, usize)> = Vec::new();
        for r in &self.rows {
            let key = (r.method.clone(), r.m);
            if !cells.contains(&key) {
                cells.push(key);
            }
        }
        for (method, m) in cells {
            let vals: Vec<f64> = self
                .rows
                .iter()
                .filter(|r| r.method == method && r.m == m)
                .map(|r| r.error_oos)
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let _ = writeln!(
                out,
                "summary,{method},{m},,{mean},{},,{VERSION},{hash}",
                var.sqrt()
            );
        }
        out
    }
}

fn instance_for(cfg: &BenchConfig) -> Result<PlantedInstance> {
    let inst = match cfg.experiment {
        Experiment::Figure1 => gen_figure1_instance(cfg.scale, cfg.seed)?,
        Experiment::SuppFig => {
            let n = ((1000.0 * cfg.scale).round() as usize).max(4);
            gen_suppfig_instance(n, cfg.seed)?
        }
    };
    Ok(inst)
}

fn holdout_error(holdout: &SampleSet, v_hat: &Vector) -> f64 {
    let r = &holdout.x * v_hat - &holdout.y;
    r.norm_squared() / holdout.m() as f64
}

/// Runs the sweep: for every grid size and seed, draw samples, fit the
/// methods, and score on a per-seed holdout of `cfg.holdout` fresh samples.
/// `figure1` fits plain and adapted basis pursuit; `suppfig` fits plain basis
/// pursuit only. Solver failures are recorded in the row and the sweep
/// continues.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    let inst = instance_for(cfg)?;
    let solver_cfg = SolverConfig {
        max_iter: cfg.max_iter,
        ..SolverConfig::default()
    };

    // Peeled set is a property of the covariance alone.
    let (d, t) = (inst.d_l, inst.t);
    let peel = iterative_peeling(&inst.sigma, d, t)?;
    let exempt: BTreeSet<usize> = peel.s.iter().copied().collect();
    let no_exempt: BTreeSet<usize> = BTreeSet::new();

    let methods: Vec<(&str, &BTreeSet<usize>)> = match cfg.experiment {
        Experiment::Figure1 => vec![("bp", &no_exempt), ("adapted-bp", &exempt)],
        Experiment::SuppFig => vec![("bp", &no_exempt)],
    };

    let sampler = GaussianSampler::new(&inst.sigma)?;
    let mut rows = Vec::new();
    for s in 0..cfg.seeds {
        let holdout_seed = derive_seed(cfg.seed, &format!("holdout/{s}"));
        let holdout = sampler.sample(cfg.holdout, cfg.noise_var, &inst.v_star, holdout_seed)?;
        for &m in &cfg.grid {
            let sample_seed = derive_seed(cfg.seed, &format!("samples/{s}/{m}"));
            let samples = sampler.sample(m, cfg.noise_var, &inst.v_star, sample_seed)?;
            for (name, ex) in &methods {
                let started = std::time::Instant::now();
                match basis_pursuit(&samples.x, &samples.y, ex, &solver_cfg) {
                    Ok(rep) => {
                        let diff = &rep.v_hat - &inst.v_star;
                        rows.push(BenchRow {
                            method: name.to_string(),
                            m,
                            seed_index: s,
                            error_oos: holdout_error(&holdout, &rep.v_hat),
                            error_sigma: inst.sigma.quad_form(&diff)?,
                            solver_converged: rep.converged,
                        });
                        eprintln!(
                            "bench {name} m={m} seed={s}: oos={:.3e} ({:.2}s)",
                            rows.last().unwrap().error_oos,
                            started.elapsed().as_secs_f64()
                        );
                    }
                    Err(err) => {
                        eprintln!("bench {name} m={m} seed={s}: solver failed: {err}");
                        rows.push(BenchRow {
                            method: name.to_string(),
                            m,
                            seed_index: s,
                            error_oos: f64::NAN,
                            error_sigma: f64::NAN,
                            solver_converged: false,
                        });
                    }
                }
            }
        }
    }
    Ok(BenchOutcome {
        rows,
        config: cfg.clone(),
    })
}
