//! The single-qubit adversarial game in Bloch coordinates.
//!
//! The generator holds `rho_G = (I + g.sigma)/2`, the discriminator holds
//! `Pi_D = (d0 I + d.sigma)/2`, and the score is the bilinear form
//! `d.(r - g)/2`. Update rules follow the gradient of `d.(r - g)` (the factor
//! one half is folded into the learning rate), which is the form under which
//! unconstrained simultaneous GDA obeys `Delta_{t+1} = (1 + eta^2) Delta_t`.
//!
//! Physical constraints `|g| <= 1` and `|d| <= d0 <= 2 - |d|` are enforced
//! softly, by a quadratic hinge penalty that vanishes inside the feasible set.

use nalgebra::Vector3;
use rand::Rng;

use crate::qcore::random::rng_from_seed;
use crate::qcore::{DensityMatrix, PovmElement};
use crate::Result;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator {
    pub g: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDiscriminator {
    pub d0: f64,
    pub d: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub generator: BlochGenerator,
    pub discriminator: BlochDiscriminator,
}

impl BlochState {
    pub fn new(g: Vec3, d0: f64, d: Vec3) -> Self {
        Self {
            generator: BlochGenerator { g },
            discriminator: BlochDiscriminator { d0, d },
        }
    }

    /// The equilibrium `g = r`, `d = 0`, `d0 = 1`.
    pub fn equilibrium(r: Vec3) -> Self {
        Self::new(r, 1.0, Vec3::zeros())
    }

    /// Documented start for limit-cycle runs: maximally mixed generator,
    /// unbiased discriminator (`d0 = 1`) with `|d| = 1/2` orthogonal to `r`.
    pub fn limit_cycle_start(r: Vec3) -> Self {
        let mut axis = r.cross(&Vec3::z());
        if axis.norm() < 1e-12 {
            axis = Vec3::x();
        }
        Self::new(Vec3::zeros(), 1.0, axis.normalize() * 0.5)
    }

    /// `g` uniform in the Bloch ball, `d0 = 1`, `d` uniform in the unit ball.
    pub fn random(seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let g = uniform_ball(&mut rng);
        let d = uniform_ball(&mut rng);
        Self::new(g, 1.0, d)
    }

    pub fn g(&self) -> Vec3 {
        self.generator.g
    }

    pub fn d(&self) -> Vec3 {
        self.discriminator.d
    }

    pub fn d0(&self) -> f64 {
        self.discriminator.d0
    }

    pub fn generator_state(&self) -> Result<DensityMatrix> {
        let g = self.g();
        DensityMatrix::from_bloch([g.x, g.y, g.z])
    }

    pub fn discriminator_element(&self) -> Result<PovmElement> {
        let d = self.d();
        PovmElement::from_bloch(self.d0(), [d.x, d.y, d.z])
    }
}

fn uniform_ball(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochGameConfig {
    /// Target Bloch vector, `|r| <= 1`.
    pub r: Vec3,
    pub eta_d: f64,
    pub eta_g: f64,
    pub d_steps_per_turn: usize,
    pub g_steps_per_turn: usize,
    pub penalty_weight: f64,
    pub constrained: bool,
}

impl BlochGameConfig {
    /// Constrained game with `eta = 0.1` for both players and a 5:1
    /// discriminator:generator schedule.
    pub fn limit_cycle(r: Vec3) -> Self {
        Self {
            r,
            eta_d: 0.1,
            eta_g: 0.1,
            d_steps_per_turn: 5,
            g_steps_per_turn: 1,
            penalty_weight: 10.0,
            constrained: true,
        }
    }

    /// Penalty-free game with a common learning rate and a 1:1 schedule.
    pub fn unconstrained(r: Vec3, eta: f64) -> Self {
        Self {
            r,
            eta_d: eta,
            eta_g: eta,
            d_steps_per_turn: 1,
            g_steps_per_turn: 1,
            penalty_weight: 0.0,
            constrained: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::Error;
        if !(self.eta_d > 0.0 && self.eta_g > 0.0) {
            return Err(Error::Argument("learning rates must be positive".into()));
        }
        if self.d_steps_per_turn == 0 || self.g_steps_per_turn == 0 {
            return Err(Error::Argument("steps per turn must be positive".into()));
        }
        if self.r.norm() > 1.0 + 1e-12 {
            return Err(Error::Argument(
                "target Bloch vector outside the ball".into(),
            ));
        }
        if self.penalty_weight < 0.0 {
            return Err(Error::Argument(
                "penalty weight must be non-negative".into(),
            ));
        }
        Ok(())
    }

    fn weight(&self) -> f64 {
        if self.constrained {
            self.penalty_weight
        } else {
            0.0
        }
    }
}

/// `d.(r - g)/2`
pub fn bloch_score(d: &Vec3, g: &Vec3, r: &Vec3) -> f64 {
    d.dot(&(r - g)) / 2.0
}

/// `|d|^2 + |r - g|^2`, the squared distance from the equilibrium.
pub fn divergence_delta(state: &BlochState, r: &Vec3) -> f64 {
    state.d().norm_squared() + (r - state.g()).norm_squared()
}

#[inline]
fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn unit_or_zero(v: &Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vec3::zeros()
    }
}

/// Gradient of the penalty with respect to `g`.
pub fn generator_penalty_grad(g: &Vec3, weight: f64) -> Vec3 {
    unit_or_zero(g) * (2.0 * weight * relu(g.norm() - 1.0))
}

/// Gradient of the penalty with respect to `(d0, d)`.
pub fn discriminator_penalty_grad(d0: f64, d: &Vec3, weight: f64) -> (f64, Vec3) {
    let nd = d.norm();
    let below = relu(nd - d0);
    let above = relu(d0 - 2.0 + nd);
    let grad_d0 = 2.0 * weight * (above - below);
    let grad_d = unit_or_zero(d) * (2.0 * weight * (below + above));
    (grad_d0, grad_d)
}

/// Ascent direction for the discriminator: `grad_d S - grad P`, paired
/// with the `d0` component `-dP/dd0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DiscriminatorGrad {
    d0: f64,
    d: Vec3,
}

fn discriminator_grad(state: &BlochState, config: &BlochGameConfig) -> DiscriminatorGrad {
    let (p0, pd) = discriminator_penalty_grad(state.d0(), &state.d(), config.weight());
    DiscriminatorGrad {
        d0: -p0,
        d: (config.r - state.g()) - pd,
    }
}

/// Descent direction for the generator: `grad_g S + grad P`.
fn generator_grad(state: &BlochState, config: &BlochGameConfig) -> Vec3 {
    -state.d() + generator_penalty_grad(&state.g(), config.weight())
}

fn apply_discriminator(state: &mut BlochState, grad: DiscriminatorGrad, eta: f64) {
    state.discriminator.d += grad.d * eta;
    state.discriminator.d0 += grad.d0 * eta;
}

fn apply_generator(state: &mut BlochState, grad: Vec3, eta: f64) {
    state.generator.g -= grad * eta;
}

/// One simultaneous gradient descent/ascent step on both players. Without
/// constraints this is exactly `d += eta (r - g)`, `g += eta d`.
pub fn gda_step(state: &BlochState, config: &BlochGameConfig) -> BlochState {
    let dg = discriminator_grad(state, config);
    let gg = generator_grad(state, config);
    let mut next = *state;
    apply_discriminator(&mut next, dg, config.eta_d);
    apply_generator(&mut next, gg, config.eta_g);
    next
}

/// One ascent step of the discriminator alone.
pub fn discriminator_step(state: &BlochState, config: &BlochGameConfig) -> BlochState {
    let mut next = *state;
    apply_discriminator(&mut next, discriminator_grad(state, config), config.eta_d);
    next
}

/// One descent step of the generator alone.
pub fn generator_step(state: &BlochState, config: &BlochGameConfig) -> BlochState {
    let mut next = *state;
    apply_generator(&mut next, generator_grad(state, config), config.eta_g);
    next
}

/// Gradients remembered from the previous optimistic step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OmdBlochCache {
    prev_d: Option<DiscriminatorGrad>,
    prev_g: Option<Vec3>,
}

impl OmdBlochCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_cold(&self) -> bool {
        self.prev_d.is_none()
    }
}

/// Optimistic step: the discriminator moves first along
/// `2 grad(t) - grad(t-1)`, then the generator does the same using the
/// gradient at the fresh discriminator. On a cold cache the previous
/// gradient is taken equal to the current one, so the first step is plain
/// alternating GDA.
pub fn omd_bloch_step(
    state: &BlochState,
    cache: &mut OmdBlochCache,
    config: &BlochGameConfig,
) -> BlochState {
    let mut next = *state;
    let dg = discriminator_grad(state, config);
    let prev_d = cache.prev_d.unwrap_or(dg);
    let combined = DiscriminatorGrad {
        d0: 2.0 * dg.d0 - prev_d.d0,
        d: dg.d * 2.0 - prev_d.d,
    };
    apply_discriminator(&mut next, combined, config.eta_d);

    let gg = generator_grad(&next, config);
    let prev_g = cache.prev_g.unwrap_or(gg);
    apply_generator(&mut next, gg * 2.0 - prev_g, config.eta_g);

    cache.prev_d = Some(dg);
    cache.prev_g = Some(gg);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochRule {
    /// Alternating GDA following the config's D:G schedule.
    Gda,
    /// One paired optimistic step per turn.
    Omd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Discriminator,
    Generator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRecord {
    /// Zero-based turn the step belongs to.
    pub turn: usize,
    pub player: Player,
    pub g: Vec3,
    pub d0: f64,
    pub d: Vec3,
    pub score: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlochTrajectory {
    pub records: Vec<BlochRecord>,
}

impl BlochTrajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Last record of every turn.
    pub fn turn_ends(&self) -> Vec<BlochRecord> {
        let mut out: Vec<BlochRecord> = Vec::new();
        for rec in &self.records {
            match out.last_mut() {
                Some(last) if last.turn == rec.turn => *last = *rec,
                _ => out.push(*rec),
            }
        }
        out
    }

    /// `|g - r|` at the end of every turn.
    pub fn distances_to(&self, r: &Vec3) -> Vec<f64> {
        self.turn_ends()
            .iter()
            .map(|rec| (rec.g - r).norm())
            .collect()
    }

    pub fn max_generator_norm(&self) -> f64 {
        self.records.iter().map(|r| r.g.norm()).fold(0.0, f64::max)
    }
}

fn record(state: &BlochState, r: &Vec3, turn: usize, player: Player) -> BlochRecord {
    BlochRecord {
        turn,
        player,
        g: state.g(),
        d0: state.d0(),
        d: state.d(),
        score: bloch_score(&state.d(), &state.g(), r),
        delta: divergence_delta(state, r),
    }
}

pub fn run_bloch_game(
    config: &BlochGameConfig,
    initial: BlochState,
    turns: usize,
    rule: BlochRule,
) -> Result<BlochTrajectory> {
    config.validate()?;
    if turns == 0 {
        return Err(crate::Error::Argument("turns must be at least 1".into()));
    }
    let mut state = initial;
    let mut traj = BlochTrajectory::default();
    let mut cache = OmdBlochCache::new();
    for turn in 0..turns {
        match rule {
            BlochRule::Gda => {
                for _ in 0..config.d_steps_per_turn {
                    state = discriminator_step(&state, config);
                    traj.records
                        .push(record(&state, &config.r, turn, Player::Discriminator));
                }
                for _ in 0..config.g_steps_per_turn {
                    state = generator_step(&state, config);
                    traj.records
                        .push(record(&state, &config.r, turn, Player::Generator));
                }
            }
            BlochRule::Omd => {
                let before = state;
                state = omd_bloch_step(&state, &mut cache, config);
                let mut mid = before;
                mid.discriminator = state.discriminator;
                traj.records
                    .push(record(&mid, &config.r, turn, Player::Discriminator));
                traj.records
                    .push(record(&state, &config.r, turn, Player::Generator));
            }
        }
    }
    Ok(traj)
}

/// Limit-cycle predicate over per-turn distances `|g_t - r|`: on the final
/// 20% of the run the orbit never comes within `10 * tol` of the target and
/// its radius varies by less than 0.5.
pub fn limit_cycle_predicate(distances: &[f64], tol: f64) -> bool {
    if distances.is_empty() {
        return false;
    }
    let tail_len = (distances.len() / 5).max(1);
    let tail = &distances[distances.len() - tail_len..];
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    min > 10.0 * tol && max - min < 0.5
}
