//! Named experiments, their configuration files, and CSV output.
//!
//! A configuration is a small TOML file:
//!
//! ```toml
//! experiment = "mixed-limit-cycle"
//! purities = [0.5, 0.625, 0.75]
//! optimizer = "gda"
//! turns = 250
//! seeds = [0, 1, 2]
//! ```
//!
//! Missing keys take the experiment's defaults (see
//! [`ExperimentConfig::defaults_for`]).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blochgame::{
    limit_cycle_predicate, run_bloch_game, BlochGameConfig, BlochRule, BlochState, BlochTrajectory,
    Vec3,
};
use crate::circuits::{default_layers, DiscriminatorModel, GeneratorModel};
use crate::convexqgan::{run_convex_qgan_from, ConvexState, UpdateVariant, VariantKind};
use crate::optim::{
    convergence_predicate, non_convergence_predicate, train_qgan, OptimizerKind, QganGame,
    TrainSchedule, TurnRecord, CONVERGENCE_TOL, NON_CONVERGENCE_THRESHOLD, NON_CONVERGENCE_WINDOW,
};
use crate::qcore::{helstrom_measurement, target_state_purity, DensityMatrix, PovmElement};
use crate::{Error, Result, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    BlochLimitCycle,
    PureConvergence,
    MixedLimitCycle,
    MixedOmd,
    ConvexCompare,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 5] = [
        ExperimentName::BlochLimitCycle,
        ExperimentName::PureConvergence,
        ExperimentName::MixedLimitCycle,
        ExperimentName::MixedOmd,
        ExperimentName::ConvexCompare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::BlochLimitCycle => "bloch-limit-cycle",
            ExperimentName::PureConvergence => "pure-convergence",
            ExperimentName::MixedLimitCycle => "mixed-limit-cycle",
            ExperimentName::MixedOmd => "mixed-omd",
            ExperimentName::ConvexCompare => "convex-compare",
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Circuits used by the parametrized experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitFamily {
    /// Staggered SU(4) blocks.
    Layered,
    /// The three-parameter generator and four-parameter discriminator.
    Minimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub n_qubits: usize,
    pub purities: Vec<f64>,
    /// `gda`, `adam` or `omd`; for convex-compare, ignored.
    pub optimizer: String,
    pub lr_d: f64,
    pub lr_g: f64,
    pub turns: usize,
    pub d_steps: usize,
    pub g_steps: usize,
    pub seeds: Vec<u64>,
    pub layers: Option<usize>,
    pub circuit: CircuitFamily,
    pub output: Option<PathBuf>,
}

/// Same fields, all optional, as read from a file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    experiment: Option<String>,
    n_qubits: Option<usize>,
    purities: Option<Vec<f64>>,
    optimizer: Option<String>,
    lr_d: Option<f64>,
    lr_g: Option<f64>,
    turns: Option<usize>,
    d_steps: Option<usize>,
    g_steps: Option<usize>,
    seeds: Option<Vec<u64>>,
    layers: Option<usize>,
    circuit: Option<CircuitFamily>,
    output: Option<PathBuf>,
}

/// Command-line overrides, applied after the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub turns: Option<usize>,
    pub purity: Option<f64>,
    pub optimizer: Option<String>,
    pub lr_d: Option<f64>,
    pub lr_g: Option<f64>,
    pub out: Option<PathBuf>,
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

impl ExperimentConfig {
    /// Defaults follow the figure settings where they exist; learning rates
    /// for pure-state and optimistic runs were chosen empirically.
    pub fn defaults_for(experiment: ExperimentName) -> Self {
        let base = Self {
            experiment,
            n_qubits: 1,
            purities: vec![0.75],
            optimizer: "gda".into(),
            lr_d: 0.1,
            lr_g: 0.1,
            turns: 250,
            d_steps: 10,
            g_steps: 1,
            seeds: seeds(10),
            layers: None,
            circuit: CircuitFamily::Layered,
            output: None,
        };
        match experiment {
            ExperimentName::BlochLimitCycle => Self {
                turns: 1000,
                d_steps: 5,
                seeds: vec![0],
                ..base
            },
            ExperimentName::PureConvergence => Self {
                purities: vec![1.0],
                lr_d: 1.0,
                lr_g: 0.05,
                turns: 500,
                d_steps: 1,
                ..base
            },
            ExperimentName::MixedLimitCycle => Self {
                purities: vec![0.5, 0.625, 0.75],
                ..base
            },
            ExperimentName::MixedOmd => Self {
                purities: vec![0.5, 0.625, 0.75],
                optimizer: "omd".into(),
                lr_d: 0.3,
                lr_g: 0.3,
                ..base
            },
            ExperimentName::ConvexCompare => Self {
                n_qubits: 5,
                purities: vec![],
                optimizer: "helstrom".into(),
                turns: 1000,
                d_steps: 1,
                seeds: seeds(20),
                ..base
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let partial: PartialConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        Self::from_partial(partial, &Overrides::default())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::load(Some(path), &Overrides::default())
    }

    /// Reads `path` if given, then applies `overrides`. The experiment
    /// name must come from one of the two.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let partial = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => PartialConfig::default(),
        };
        Self::from_partial(partial, overrides)
    }

    fn from_partial(p: PartialConfig, o: &Overrides) -> Result<Self> {
        let name = o
            .experiment
            .clone()
            .or(p.experiment)
            .ok_or_else(|| Error::Config("no experiment named".into()))?;
        let mut c = Self::defaults_for(name.parse()?);
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = p.$f { c.$f = v; })* };
        }
        take!(n_qubits, purities, optimizer, lr_d, lr_g, turns, d_steps, g_steps, seeds, circuit);
        if p.layers.is_some() {
            c.layers = p.layers;
        }
        if p.output.is_some() {
            c.output = p.output;
        }
        if let Some(s) = o.seed {
            c.seeds = vec![s];
        }
        if let Some(t) = o.turns {
            c.turns = t;
        }
        if let Some(pu) = o.purity {
            c.purities = vec![pu];
        }
        if let Some(opt) = &o.optimizer {
            c.optimizer = opt.clone();
        }
        if let Some(v) = o.lr_d {
            c.lr_d = v;
        }
        if let Some(v) = o.lr_g {
            c.lr_g = v;
        }
        if o.out.is_some() {
            c.output = o.out.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("seed list is empty");
        }
        if self.turns == 0 || self.d_steps == 0 || self.g_steps == 0 {
            return bad("turns and steps per turn must be positive");
        }
        if !(self.lr_d > 0.0 && self.lr_g > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.n_qubits == 0 || self.n_qubits > 8 {
            return bad("n_qubits must be in 1..=8");
        }
        if self.layers == Some(0) {
            return bad("layers must be positive");
        }
        match self.experiment {
            ExperimentName::ConvexCompare => {}
            ExperimentName::PureConvergence => {
                self.optimizer_kind()?;
            }
            _ => {
                self.optimizer_kind()?;
                if self.purities.is_empty() {
                    return bad("purity list is empty");
                }
                if self.n_qubits != 1 {
                    return bad("mixed-state experiments are single-qubit");
                }
                for &p in &self.purities {
                    if !(0.5..=1.0).contains(&p) {
                        return Err(Error::Config(format!("purity {p} outside [0.5, 1]")));
                    }
                }
            }
        }
        if self.experiment == ExperimentName::BlochLimitCycle
            && self.optimizer_kind()? == OptimizerKind::Adam
        {
            return bad("the Bloch game supports gda and omd only");
        }
        Ok(())
    }

    pub fn optimizer_kind(&self) -> Result<OptimizerKind> {
        self.optimizer.parse()
    }

    /// Canonical TOML text; the hash input.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Configured depth, or the default for a register of `n` qubits.
    fn layers_for(&self, n: usize) -> usize {
        self.layers.unwrap_or_else(|| default_layers(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_hash: String,
    pub label: String,
    pub seed: u64,
    pub rows: Vec<TurnRecord>,
    pub wall_clock: Duration,
    pub version: String,
}

impl RunRecord {
    pub fn trace_distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.trace_distance).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Purity(f64),
    Variant(VariantKind),
    None,
}

fn purity_label(p: f64) -> String {
    format!("P={p}")
}

/// Runs every (seed, purity) cell of `config` in parallel. Records come
/// back sorted by (label, seed).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let hash = config.hash();
    let cells: Vec<Cell> = match config.experiment {
        ExperimentName::ConvexCompare => VariantKind::ALL.into_iter().map(Cell::Variant).collect(),
        ExperimentName::PureConvergence => vec![Cell::None],
        _ => config.purities.iter().map(|&p| Cell::Purity(p)).collect(),
    };
    let jobs: Vec<(Cell, u64)> = cells
        .iter()
        .flat_map(|&c| config.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(cell, seed)| {
            let start = Instant::now();
            let (label, rows) = run_cell(config, cell, seed)?;
            Ok(RunRecord {
                config_hash: hash.clone(),
                label,
                seed,
                rows,
                wall_clock: start.elapsed(),
                version: VERSION.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.label.cmp(&b.label).then(a.seed.cmp(&b.seed)));
    Ok(records)
}

fn run_cell(config: &ExperimentConfig, cell: Cell, seed: u64) -> Result<(String, Vec<TurnRecord>)> {
    match (config.experiment, cell) {
        (ExperimentName::BlochLimitCycle, Cell::Purity(p)) => bloch_cell(config, p, seed),
        (ExperimentName::PureConvergence, _) => pure_cell(config, seed),
        (ExperimentName::MixedLimitCycle | ExperimentName::MixedOmd, Cell::Purity(p)) => {
            mixed_cell(config, p, seed)
        }
        (ExperimentName::ConvexCompare, Cell::Variant(kind)) => convex_cell(config, kind, seed),
        _ => Err(Error::Config("inconsistent experiment cell".into())),
    }
}

/// Bloch vector of the purity-`p` target.
pub fn target_bloch(p: f64) -> Result<Vec3> {
    let r = target_state_purity(p)?.bloch_vector().unwrap_or([0.0; 3]);
    Ok(Vec3::new(r[0], r[1], r[2]))
}

/// Per-turn rows of a Bloch trajectory. The trace distance is `|g - r|/2`;
/// fidelity uses the qubit formula with determinants clipped at zero, so a
/// generator pushed outside the ball by the soft constraint stays finite.
pub fn bloch_rows(traj: &BlochTrajectory, r: &Vec3) -> Vec<TurnRecord> {
    let det_r = (1.0 - r.norm_squared()).max(0.0);
    traj.turn_ends()
        .iter()
        .map(|rec| {
            let det_g = (1.0 - rec.g.norm_squared()).max(0.0);
            TurnRecord {
                turn: rec.turn + 1,
                score: rec.score,
                p_r_given_g: (rec.d0 + rec.d.dot(&rec.g)) / 2.0,
                trace_distance: (rec.g - r).norm() / 2.0,
                fidelity: ((1.0 + rec.g.dot(r)) / 2.0 + (det_g * det_r).sqrt() / 2.0)
                    .clamp(0.0, 1.0),
                params: None,
            }
        })
        .collect()
}

fn bloch_cell(config: &ExperimentConfig, p: f64, seed: u64) -> Result<(String, Vec<TurnRecord>)> {
    let r = target_bloch(p)?;
    let game = BlochGameConfig {
        eta_d: config.lr_d,
        eta_g: config.lr_g,
        d_steps_per_turn: config.d_steps,
        g_steps_per_turn: config.g_steps,
        ..BlochGameConfig::limit_cycle(r)
    };
    // seed 0 is the documented start; other seeds draw a random one
    let start = if seed == 0 {
        BlochState::limit_cycle_start(r)
    } else {
        BlochState::random(seed)
    };
    let rule = match config.optimizer_kind()? {
        OptimizerKind::Omd => BlochRule::Omd,
        _ => BlochRule::Gda,
    };
    let traj = run_bloch_game(&game, start, config.turns, rule)?;
    Ok((
        format!("{}/{}", config.optimizer, purity_label(p)),
        bloch_rows(&traj, &r),
    ))
}

fn schedule(config: &ExperimentConfig) -> Result<TrainSchedule> {
    TrainSchedule::new(
        config.turns,
        config.d_steps,
        config.g_steps,
        config.lr_d,
        config.lr_g,
    )
}

fn pure_cell(config: &ExperimentConfig, seed: u64) -> Result<(String, Vec<TurnRecord>)> {
    let n = config.n_qubits;
    let generator = GeneratorModel::pure(n, config.layers_for(n))?;
    let discriminator = DiscriminatorModel::layered(n, config.layers_for(n + 1))?;
    let target = pure_target(&generator, seed)?;
    let game = QganGame::new(generator, discriminator, target)?;
    let traj = train_qgan(&game, &schedule(config)?, config.optimizer_kind()?, seed)?;
    Ok((format!("{}/n={n}", config.optimizer), traj.records))
}

/// Output of the generator's own circuit at seeded random angles, so the
/// target is reachable. The stream is offset from the training seed.
pub fn pure_target(generator: &GeneratorModel, seed: u64) -> Result<DensityMatrix> {
    use rand::Rng;
    let mut rng = crate::qcore::random::rng_from_seed(seed ^ 0x7461_7267_6574);
    let theta: Vec<f64> = (0..generator.n_params())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    generator.generator_state(&theta)
}

/// Models for a single-qubit mixed-state game.
pub fn mixed_models(config: &ExperimentConfig) -> Result<(GeneratorModel, DiscriminatorModel)> {
    Ok(match config.circuit {
        CircuitFamily::Minimal => (GeneratorModel::minimal(), DiscriminatorModel::minimal()),
        CircuitFamily::Layered => (
            GeneratorModel::mixed(1, config.layers_for(2))?,
            DiscriminatorModel::layered(1, config.layers_for(2))?,
        ),
    })
}

fn mixed_cell(config: &ExperimentConfig, p: f64, seed: u64) -> Result<(String, Vec<TurnRecord>)> {
    let (g, d) = mixed_models(config)?;
    let game = QganGame::new(g, d, target_state_purity(p)?)?;
    let traj = train_qgan(&game, &schedule(config)?, config.optimizer_kind()?, seed)?;
    Ok((
        format!("{}/{}", config.optimizer, purity_label(p)),
        traj.records,
    ))
}

/// Target and initial generator state of a convex run: both full-rank
/// random states from one seeded stream.
pub fn convex_instance(n_qubits: usize, seed: u64) -> Result<(DensityMatrix, DensityMatrix)> {
    let mut rng = crate::qcore::random::rng_from_seed(seed);
    let dim = 1 << n_qubits;
    let target = crate::qcore::random::random_density_matrix_with(n_qubits, dim, &mut rng)?;
    let start = crate::qcore::random::random_density_matrix_with(n_qubits, dim, &mut rng)?;
    Ok((target, start))
}

fn convex_cell(
    config: &ExperimentConfig,
    kind: VariantKind,
    seed: u64,
) -> Result<(String, Vec<TurnRecord>)> {
    let (target, rho_g) = convex_instance(config.n_qubits, seed)?;
    let pi_d = match kind {
        VariantKind::FrankWolfe => PovmElement::scaled_identity(config.n_qubits, 0.5)?,
        _ => helstrom_measurement(&target, &rho_g)?,
    };
    let init = ConvexState::new(rho_g, pi_d)?;
    let (traj, _) = run_convex_qgan_from(
        &target,
        &UpdateVariant::default_for(kind),
        config.turns,
        init,
    )?;
    Ok((kind.name().to_string(), traj.records))
}

/// Twelve significant digits, in scientific notation.
fn fmt_value(x: f64) -> String {
    format!("{x:.11e}")
}

pub const CSV_HEADER: &str = "turn,score,p_r_given_g,trace_distance,fidelity,seed,label";

/// CSV text of `records`, sorted by (label, seed, turn).
pub fn csv_string(records: &[RunRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Argument("no records to write".into()));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label).then(a.seed.cmp(&b.seed)));
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rec in sorted {
        for row in &rec.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.turn,
                fmt_value(row.score),
                fmt_value(row.p_r_given_g),
                fmt_value(row.trace_distance),
                fmt_value(row.fidelity),
                rec.seed,
                rec.label
            );
        }
    }
    Ok(out)
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let text = csv_string(records)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub seed: u64,
    pub final_trace_distance: f64,
    pub min_trace_distance: f64,
    pub final_fidelity: f64,
    pub max_fidelity: f64,
    /// Final trace distance at most 0.01.
    pub converged: bool,
    /// Bloch runs: the limit-cycle predicate on `|g - r|`. Circuit and
    /// convex runs: minimum trace distance over the last 50 turns above
    /// 0.05.
    pub limit_cycle: bool,
}

pub fn summarize(experiment: ExperimentName, records: &[RunRecord]) -> Vec<SummaryRow> {
    records
        .iter()
        .map(|rec| {
            let tds = rec.trace_distances();
            let limit_cycle = match experiment {
                ExperimentName::BlochLimitCycle => {
                    let dist: Vec<f64> = tds.iter().map(|t| 2.0 * t).collect();
                    limit_cycle_predicate(&dist, 1e-3)
                }
                _ => non_convergence_predicate(
                    &tds,
                    NON_CONVERGENCE_WINDOW,
                    NON_CONVERGENCE_THRESHOLD,
                ),
            };
            SummaryRow {
                label: rec.label.clone(),
                seed: rec.seed,
                final_trace_distance: tds.last().copied().unwrap_or(f64::NAN),
                min_trace_distance: tds.iter().copied().fold(f64::INFINITY, f64::min),
                final_fidelity: rec.rows.last().map_or(f64::NAN, |r| r.fidelity),
                max_fidelity: rec.rows.iter().map(|r| r.fidelity).fold(f64::NAN, f64::max),
                converged: convergence_predicate(&tds, CONVERGENCE_TOL),
                limit_cycle,
            }
        })
        .collect()
}

/// Median of the final trace distances per label, in label order.
pub fn median_final_by_label(records: &[RunRecord]) -> Vec<(String, f64)> {
    let mut labels: Vec<String> = records.iter().map(|r| r.label.clone()).collect();
    labels.sort();
    labels.dedup();
    labels
        .into_iter()
        .map(|l| {
            let mut v: Vec<f64> = records
                .iter()
                .filter(|r| r.label == l)
                .filter_map(|r| r.rows.last().map(|x| x.trace_distance))
                .collect();
            v.sort_by(f64::total_cmp);
            let m = if v.is_empty() {
                f64::NAN
            } else if v.len() % 2 == 1 {
                v[v.len() / 2]
            } else {
                (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0
            };
            (l, m)
        })
        .collect()
}

/// Summary as CSV text.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("label,seed,final_trace_distance,min_trace_distance,final_fidelity,max_fidelity,converged,limit_cycle\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.seed,
            fmt_value(r.final_trace_distance),
            fmt_value(r.min_trace_distance),
            fmt_value(r.final_fidelity),
            fmt_value(r.max_fidelity),
            r.converged,
            r.limit_cycle
        );
    }
    out
}
