//! GDA, Adam and optimistic mirror descent on circuit parameters, and the
//! adversarial training loop.
//!
//! The discriminator maximizes and the generator minimizes the score
//! `S = Tr[Pi_D (rho_R - rho_G)]`.

use rand::Rng;

use crate::circuits::{DiscriminatorModel, GeneratorModel};
use crate::error::check_dims;
use crate::gradients::parameter_shift_gradient;
use crate::qcore::metrics::real_trace_of_product;
use crate::qcore::random::rng_from_seed;
use crate::qcore::{fidelity, trace_distance, DensityMatrix, PovmElement};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Ascent,
    Descent,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Ascent => 1.0,
            Direction::Descent => -1.0,
        }
    }
}

fn check_len(params: &[f64], grad: &[f64]) -> Result<()> {
    check_dims(params.len(), grad.len())
}

/// `params + eta grad` (ascent) or `params - eta grad` (descent).
pub fn gda_update(
    params: &[f64],
    grad: &[f64],
    eta: f64,
    direction: Direction,
) -> Result<Vec<f64>> {
    check_len(params, grad)?;
    let s = direction.sign() * eta;
    Ok(params.iter().zip(grad).map(|(p, g)| p + s * g).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self::with_constants(n, 0.9, 0.999, 1e-8)
    }

    pub fn with_constants(n: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }
}

/// Bias-corrected Adam step. Ascent feeds the negated gradient to the
/// descent-form update.
pub fn adam_update(
    state: &mut AdamState,
    params: &[f64],
    grad: &[f64],
    eta: f64,
    direction: Direction,
) -> Result<Vec<f64>> {
    check_len(params, grad)?;
    check_dims(state.m.len(), params.len())?;
    state.t += 1;
    let b1t = 1.0 - state.beta1.powi(state.t as i32);
    let b2t = 1.0 - state.beta2.powi(state.t as i32);
    let sign = -direction.sign();
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let g = sign * grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let mhat = state.m[i] / b1t;
        let vhat = state.v[i] / b2t;
        out.push(params[i] - eta * mhat / (vhat.sqrt() + state.eps));
    }
    Ok(out)
}

/// Generator, discriminator and target of one adversarial game.
#[derive(Debug, Clone)]
pub struct QganGame {
    pub generator: GeneratorModel,
    pub discriminator: DiscriminatorModel,
    pub target: DensityMatrix,
}

impl QganGame {
    pub fn new(
        generator: GeneratorModel,
        discriminator: DiscriminatorModel,
        target: DensityMatrix,
    ) -> Result<Self> {
        check_dims(generator.n_system(), target.n_qubits())?;
        check_dims(discriminator.n_system(), target.n_qubits())?;
        Ok(Self {
            generator,
            discriminator,
            target,
        })
    }

    pub fn score(&self, theta_d: &[f64], theta_g: &[f64]) -> Result<f64> {
        let pi = self.discriminator.povm(theta_d)?;
        let rho = self.generator.generator_state(theta_g)?;
        crate::qcore::score(&pi, &rho, &self.target)
    }

    /// `dS/dtheta_D` at `(theta_d, theta_g)`.
    pub fn grad_d(&self, theta_d: &[f64], theta_g: &[f64]) -> Result<Vec<f64>> {
        let rho = self.generator.generator_state(theta_g)?;
        let diff = self.target.mat() - rho.mat();
        let obj = |t: &[f64]| real_trace_of_product(self.discriminator.povm(t)?.mat(), &diff);
        parameter_shift_gradient(&obj, theta_d)
    }

    /// `dS/dtheta_G` at `(theta_d, theta_g)`.
    pub fn grad_g(&self, theta_d: &[f64], theta_g: &[f64]) -> Result<Vec<f64>> {
        let pi = self.discriminator.povm(theta_d)?;
        self.grad_g_with(&pi, theta_g)
    }

    fn grad_g_with(&self, pi: &PovmElement, theta_g: &[f64]) -> Result<Vec<f64>> {
        let obj = |t: &[f64]| {
            let rho = self.generator.generator_state(t)?;
            Ok(-real_trace_of_product(pi.mat(), rho.mat())?)
        };
        parameter_shift_gradient(&obj, theta_g)
    }

    pub fn metrics(&self, turn: usize, theta_d: &[f64], theta_g: &[f64]) -> Result<TurnRecord> {
        let pi = self.discriminator.povm(theta_d)?;
        let rho = self.generator.generator_state(theta_g)?;
        let p_r_given_g = real_trace_of_product(pi.mat(), rho.mat())?;
        let p_r_given_r = real_trace_of_product(pi.mat(), self.target.mat())?;
        Ok(TurnRecord {
            turn,
            score: p_r_given_r - p_r_given_g,
            p_r_given_g,
            trace_distance: trace_distance(&rho, &self.target)?,
            fidelity: fidelity(&rho, &self.target)?,
            params: None,
        })
    }
}

/// Gradients remembered between optimistic steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OmdState {
    pub prev_d: Option<Vec<f64>>,
    pub prev_g: Option<Vec<f64>>,
}

impl OmdState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// One optimistic turn. The discriminator moves along
/// `2 grad_D S(D_t, G_t) - grad_D S(D_{t-1}, G_{t-1})`, then the generator
/// along `2 grad_G S(D_{t+1}, G_t) - grad_G S(D_t, G_{t-1})`. The second
/// term of each is the fresh gradient cached by the previous call; a cold
/// cache takes it equal to the current one.
pub fn omd_update_pair(
    state: &mut OmdState,
    theta_d: &[f64],
    theta_g: &[f64],
    game: &QganGame,
    eta_d: f64,
    eta_g: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let gd = game.grad_d(theta_d, theta_g)?;
    let comb_d = optimistic(&gd, state.prev_d.as_deref())?;
    let new_d = gda_update(theta_d, &comb_d, eta_d, Direction::Ascent)?;

    let gg = game.grad_g(&new_d, theta_g)?;
    let comb_g = optimistic(&gg, state.prev_g.as_deref())?;
    let new_g = gda_update(theta_g, &comb_g, eta_g, Direction::Descent)?;

    state.prev_d = Some(gd);
    state.prev_g = Some(gg);
    Ok((new_d, new_g))
}

/// One OMD turn on the schedule: every discriminator step moves along
/// `2 grad - grad_prev` of its own fresh gradients, then every generator step
/// does the same. With one step each this is [`omd_update_pair`].
fn omd_turn(
    state: &mut OmdState,
    mut theta_d: Vec<f64>,
    mut theta_g: Vec<f64>,
    game: &QganGame,
    schedule: &TrainSchedule,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for _ in 0..schedule.d_steps_per_turn {
        let gd = game.grad_d(&theta_d, &theta_g)?;
        theta_d = gda_update(
            &theta_d,
            &optimistic(&gd, state.prev_d.as_deref())?,
            schedule.eta_d,
            Direction::Ascent,
        )?;
        state.prev_d = Some(gd);
    }
    let pi = game.discriminator.povm(&theta_d)?;
    for _ in 0..schedule.g_steps_per_turn {
        let gg = game.grad_g_with(&pi, &theta_g)?;
        theta_g = gda_update(
            &theta_g,
            &optimistic(&gg, state.prev_g.as_deref())?,
            schedule.eta_g,
            Direction::Descent,
        )?;
        state.prev_g = Some(gg);
    }
    Ok((theta_d, theta_g))
}

fn optimistic(now: &[f64], prev: Option<&[f64]>) -> Result<Vec<f64>> {
    match prev {
        None => Ok(now.to_vec()),
        Some(p) => {
            check_dims(now.len(), p.len())?;
            Ok(now.iter().zip(p).map(|(a, b)| 2.0 * a - b).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    pub turns: usize,
    pub d_steps_per_turn: usize,
    pub g_steps_per_turn: usize,
    pub eta_d: f64,
    pub eta_g: f64,
}

impl TrainSchedule {
    pub fn new(
        turns: usize,
        d_steps: usize,
        g_steps: usize,
        eta_d: f64,
        eta_g: f64,
    ) -> Result<Self> {
        let s = Self {
            turns,
            d_steps_per_turn: d_steps,
            g_steps_per_turn: g_steps,
            eta_d,
            eta_g,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.turns == 0 || self.d_steps_per_turn == 0 || self.g_steps_per_turn == 0 {
            return Err(Error::Argument(
                "turns and steps per turn must be positive".into(),
            ));
        }
        if !(self.eta_d > 0.0
            && self.eta_g > 0.0
            && self.eta_d.is_finite()
            && self.eta_g.is_finite())
        {
            return Err(Error::Argument("learning rates must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Gda,
    Adam,
    Omd,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Gda => "gda",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Omd => "omd",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gda" => Ok(OptimizerKind::Gda),
            "adam" => Ok(OptimizerKind::Adam),
            "omd" => Ok(OptimizerKind::Omd),
            other => Err(Error::Config(format!("unknown optimizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnRecord {
    /// One-based index of the completed turn.
    pub turn: usize,
    pub score: f64,
    pub p_r_given_g: f64,
    pub trace_distance: f64,
    pub fidelity: f64,
    /// `(theta_D, theta_G)` after the turn, when snapshots are requested.
    pub params: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TurnRecord>,
}

impl Trajectory {
    pub fn trace_distances(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.trace_distance).collect()
    }

    pub fn final_trace_distance(&self) -> Option<f64> {
        self.records.last().map(|r| r.trace_distance)
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.records.last().map(|r| r.fidelity)
    }
}

/// Uniform angles in `[0, 2pi)`: discriminator parameters first, then the
/// generator's, from one seeded stream.
pub fn init_params(game: &QganGame, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect()
    };
    let d = draw(game.discriminator.n_params());
    let g = draw(game.generator.n_params());
    (d, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainOptions {
    pub snapshot_params: bool,
}

/// Training from seeded random parameters.
pub fn train_qgan(
    game: &QganGame,
    schedule: &TrainSchedule,
    optimizer: OptimizerKind,
    seed: u64,
) -> Result<Trajectory> {
    let (d, g) = init_params(game, seed);
    train_qgan_from(game, schedule, optimizer, d, g, TrainOptions::default())
}

/// Training from given parameters. Each turn runs the scheduled
/// discriminator ascent steps with G frozen, then the generator descent
/// steps with D frozen.
pub fn train_qgan_from(
    game: &QganGame,
    schedule: &TrainSchedule,
    optimizer: OptimizerKind,
    mut theta_d: Vec<f64>,
    mut theta_g: Vec<f64>,
    options: TrainOptions,
) -> Result<Trajectory> {
    schedule.validate()?;
    check_dims(theta_d.len(), game.discriminator.n_params())?;
    check_dims(theta_g.len(), game.generator.n_params())?;
    let mut adam_d = AdamState::new(theta_d.len());
    let mut adam_g = AdamState::new(theta_g.len());
    let mut omd = OmdState::new();
    let mut traj = Trajectory::default();

    for turn in 1..=schedule.turns {
        match optimizer {
            OptimizerKind::Omd => {
                (theta_d, theta_g) = omd_turn(&mut omd, theta_d, theta_g, game, schedule)?;
            }
            OptimizerKind::Gda | OptimizerKind::Adam => {
                for _ in 0..schedule.d_steps_per_turn {
                    let grad = game.grad_d(&theta_d, &theta_g)?;
                    theta_d = match optimizer {
                        OptimizerKind::Adam => adam_update(
                            &mut adam_d,
                            &theta_d,
                            &grad,
                            schedule.eta_d,
                            Direction::Ascent,
                        )?,
                        _ => gda_update(&theta_d, &grad, schedule.eta_d, Direction::Ascent)?,
                    };
                }
                let pi = game.discriminator.povm(&theta_d)?;
                for _ in 0..schedule.g_steps_per_turn {
                    let grad = game.grad_g_with(&pi, &theta_g)?;
                    theta_g = match optimizer {
                        OptimizerKind::Adam => adam_update(
                            &mut adam_g,
                            &theta_g,
                            &grad,
                            schedule.eta_g,
                            Direction::Descent,
                        )?,
                        _ => gda_update(&theta_g, &grad, schedule.eta_g, Direction::Descent)?,
                    };
                }
            }
        }
        let mut rec = game.metrics(turn, &theta_d, &theta_g)?;
        if !(rec.score.is_finite() && rec.trace_distance.is_finite() && rec.fidelity.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite metrics at turn {turn}"
            )));
        }
        if options.snapshot_params {
            rec.params = Some((theta_d.clone(), theta_g.clone()));
        }
        traj.records.push(rec);
    }
    Ok(traj)
}

/// Minimum trace distance over the last `window` turns exceeds `threshold`.
pub fn non_convergence_predicate(trace_distances: &[f64], window: usize, threshold: f64) -> bool {
    if trace_distances.is_empty() || window == 0 {
        return false;
    }
    let start = trace_distances.len().saturating_sub(window);
    trace_distances[start..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        > threshold
}

/// Final trace distance at most `tol`.
pub fn convergence_predicate(trace_distances: &[f64], tol: f64) -> bool {
    trace_distances.last().is_some_and(|&d| d <= tol)
}

/// Window and threshold of the non-convergence predicate.
pub const NON_CONVERGENCE_WINDOW: usize = 50;
pub const NON_CONVERGENCE_THRESHOLD: f64 = 0.05;
/// Final trace distance regarded as converged.
pub const CONVERGENCE_TOL: f64 = 0.01;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::target_state_purity;

    #[test]
    fn gda_examples() {
        assert_eq!(
            gda_update(&[1.0, 2.0], &[0.0, 0.0], 0.3, Direction::Ascent).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            gda_update(&[0.0, 0.0], &[1.0, 0.0], 0.1, Direction::Ascent).unwrap(),
            vec![0.1, 0.0]
        );
        let p = [0.3, -0.2];
        let g = [0.7, 1.1];
        let down = gda_update(&p, &g, 0.25, Direction::Descent).unwrap();
        let back = gda_update(&down, &g, 0.25, Direction::Ascent).unwrap();
        assert_eq!(back, p.to_vec());
        assert!(gda_update(&p, &[1.0], 0.1, Direction::Ascent).is_err());
    }

    #[test]
    fn adam_first_step_has_magnitude_eta() {
        let mut s = AdamState::new(3);
        let out = adam_update(
            &mut s,
            &[0.0; 3],
            &[2.0, -0.5, 1e-3],
            0.05,
            Direction::Descent,
        )
        .unwrap();
        assert!((out[0] + 0.05).abs() < 1e-8);
        assert!((out[1] - 0.05).abs() < 1e-8);
        assert!((out[2] + 0.05).abs() < 1e-6);
        let mut s = AdamState::new(2);
        let out = adam_update(&mut s, &[1.0, 2.0], &[0.0, 0.0], 0.05, Direction::Ascent).unwrap();
        assert_eq!(out, vec![1.0, 2.0]);
        assert!(adam_update(
            &mut AdamState::new(1),
            &[0.0; 2],
            &[0.0; 2],
            0.1,
            Direction::Ascent
        )
        .is_err());
    }

    #[test]
    fn adam_ascent_mirrors_descent() {
        let mut a = AdamState::new(1);
        let mut b = AdamState::new(1);
        let up = adam_update(&mut a, &[0.0], &[0.4], 0.1, Direction::Ascent).unwrap();
        let down = adam_update(&mut b, &[0.0], &[-0.4], 0.1, Direction::Descent).unwrap();
        assert_eq!(up, down);
    }

    fn minimal_game(p: f64) -> QganGame {
        QganGame::new(
            GeneratorModel::minimal(),
            DiscriminatorModel::minimal(),
            target_state_purity(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let two = crate::qcore::random_density_matrix(2, 4, 0).unwrap();
        assert!(QganGame::new(
            GeneratorModel::minimal(),
            DiscriminatorModel::minimal(),
            two
        )
        .is_err());
    }

    #[test]
    fn omd_cold_start_is_alternating_gda() {
        let game = minimal_game(0.75);
        let (d, g) = init_params(&game, 5);
        let mut st = OmdState::new();
        let (d1, g1) = omd_update_pair(&mut st, &d, &g, &game, 0.1, 0.1).unwrap();
        let gd = game.grad_d(&d, &g).unwrap();
        let d_gda = gda_update(&d, &gd, 0.1, Direction::Ascent).unwrap();
        let gg = game.grad_g(&d_gda, &g).unwrap();
        let g_gda = gda_update(&g, &gg, 0.1, Direction::Descent).unwrap();
        assert_eq!(d1, d_gda);
        assert_eq!(g1, g_gda);
    }

    #[test]
    fn one_to_one_omd_turns_are_paired_updates() {
        let game = minimal_game(0.625);
        let (d, g) = init_params(&game, 8);
        let sched = TrainSchedule::new(6, 1, 1, 0.2, 0.1).unwrap();
        let opts = TrainOptions {
            snapshot_params: true,
        };
        let traj = train_qgan_from(
            &game,
            &sched,
            OptimizerKind::Omd,
            d.clone(),
            g.clone(),
            opts,
        )
        .unwrap();
        let mut st = OmdState::new();
        let (mut d, mut g) = (d, g);
        for rec in &traj.records {
            (d, g) = omd_update_pair(&mut st, &d, &g, &game, 0.2, 0.1).unwrap();
            assert_eq!(rec.params.as_ref().unwrap(), &(d.clone(), g.clone()));
        }
    }

    #[test]
    fn optimistic_combination() {
        assert_eq!(
            optimistic(&[1.0, 2.0], Some(&[1.0, 2.0])).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(optimistic(&[1.0], Some(&[3.0])).unwrap(), vec![-1.0]);
        assert_eq!(optimistic(&[1.0], None).unwrap(), vec![1.0]);
    }

    #[test]
    fn equilibrium_start_stays_put() {
        // rho_G = I/2 at t1 = pi/2, Pi_D = I with zero angles and no gates
        let game = QganGame::new(
            GeneratorModel::minimal(),
            DiscriminatorModel::new(
                1,
                crate::circuits::CircuitAnsatz::new(2, vec![crate::circuits::Gate::rz(1, 0)])
                    .unwrap(),
            )
            .unwrap(),
            target_state_purity(0.5).unwrap(),
        )
        .unwrap();
        let sched = TrainSchedule::new(20, 10, 1, 0.1, 0.1).unwrap();
        for opt in [OptimizerKind::Gda, OptimizerKind::Adam, OptimizerKind::Omd] {
            let traj = train_qgan_from(
                &game,
                &sched,
                opt,
                vec![0.3],
                vec![std::f64::consts::FRAC_PI_2, 0.4, 1.0],
                TrainOptions::default(),
            )
            .unwrap();
            for r in &traj.records {
                assert!(r.score.abs() < 1e-12);
                assert!(r.fidelity > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let game = minimal_game(0.75);
        let sched = TrainSchedule::new(5, 3, 1, 0.1, 0.1).unwrap();
        for opt in [OptimizerKind::Gda, OptimizerKind::Adam, OptimizerKind::Omd] {
            let a = train_qgan(&game, &sched, opt, 11).unwrap();
            let b = train_qgan(&game, &sched, opt, 11).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.records.len(), 5);
            assert!(a.records.windows(2).all(|w| w[0].turn < w[1].turn));
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(TrainSchedule::new(0, 1, 1, 0.1, 0.1).is_err());
        assert!(TrainSchedule::new(1, 0, 1, 0.1, 0.1).is_err());
        assert!(TrainSchedule::new(1, 1, 1, -0.1, 0.1).is_err());
        assert!("sgd".parse::<OptimizerKind>().is_err());
        assert_eq!("OMD".parse::<OptimizerKind>().unwrap(), OptimizerKind::Omd);
    }

    #[test]
    fn predicates() {
        let flat = vec![0.2; 100];
        assert!(non_convergence_predicate(&flat, 50, 0.05));
        let mut dip = flat.clone();
        dip[90] = 0.01;
        assert!(!non_convergence_predicate(&dip, 50, 0.05));
        assert!(convergence_predicate(&[0.5, 0.005], 0.01));
        assert!(!convergence_predicate(&[], 0.01));
    }
}
