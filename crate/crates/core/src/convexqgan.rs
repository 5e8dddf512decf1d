//! Minimax learning directly over the convex sets of states and POVM
//! elements: Frank-Wolfe, and the Helstrom-measurement variants driven by
//! imaginary-time evolution or by the partial-SWAP channel.

use crate::error::check_dims;
use crate::optim::{Trajectory, TurnRecord};
use crate::qcore::linalg::{commutator, cr, identity, ComplexMatrix};
use crate::qcore::metrics::real_trace_of_product;
use crate::qcore::{
    fidelity, helstrom_measurement, hermitian_eig, random_density_matrix, trace_distance,
    DensityMatrix, PovmElement, PureState,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexState {
    pub rho_g: DensityMatrix,
    pub pi_d: PovmElement,
    pub k: usize,
}

impl ConvexState {
    pub fn new(rho_g: DensityMatrix, pi_d: PovmElement) -> Result<Self> {
        check_dims(rho_g.dim(), pi_d.dim())?;
        Ok(Self { rho_g, pi_d, k: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    FrankWolfe,
    HelstromImaginary,
    HelstromCircuit,
}

impl VariantKind {
    pub fn name(self) -> &'static str {
        match self {
            VariantKind::FrankWolfe => "frank_wolfe",
            VariantKind::HelstromImaginary => "helstrom_imaginary",
            VariantKind::HelstromCircuit => "helstrom_circuit",
        }
    }

    pub const ALL: [VariantKind; 3] = [
        VariantKind::FrankWolfe,
        VariantKind::HelstromImaginary,
        VariantKind::HelstromCircuit,
    ];
}

impl std::str::FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown variant {s:?}")))
    }
}

/// Step size as a function of the iteration index `k >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepLaw {
    /// `2/(k+2)`
    TwoOverKPlusTwo,
    /// `scale/sqrt(k+1)`
    InverseSqrt {
        scale: f64,
    },
    Constant(f64),
}

impl StepLaw {
    pub fn value(self, k: usize) -> f64 {
        match self {
            StepLaw::TwoOverKPlusTwo => 2.0 / (k as f64 + 2.0),
            StepLaw::InverseSqrt { scale } => scale / (k as f64 + 1.0).sqrt(),
            StepLaw::Constant(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateVariant {
    pub kind: VariantKind,
    /// Law for `beta_k`; Frank-Wolfe also uses it for `alpha_k`, the
    /// Helstrom variants fix `alpha_k = 1`.
    pub law: StepLaw,
}

impl UpdateVariant {
    /// `2/(k+2)` for Frank-Wolfe, `0.5/sqrt(k+1)` for the Helstrom variants.
    pub fn default_for(kind: VariantKind) -> Self {
        let law = match kind {
            VariantKind::FrankWolfe => StepLaw::TwoOverKPlusTwo,
            _ => StepLaw::InverseSqrt { scale: 0.5 },
        };
        Self { kind, law }
    }
}

fn top_eigvec(m: &ComplexMatrix) -> Result<PureState> {
    let eig = hermitian_eig(m)?;
    Ok(PureState::from_raw(eig.vectors[0].clone()))
}

/// Top eigenvector of `Pi_D`, the minimizer of `Tr[rho (-Pi_D)]` over pure
/// states.
pub fn extreme_eigvec_g(pi_d: &PovmElement) -> Result<PureState> {
    top_eigvec(pi_d.mat())
}

/// Top eigenvector of `rho_R - rho_G`.
pub fn extreme_eigvec_d(rho_r: &DensityMatrix, rho_g: &DensityMatrix) -> Result<PureState> {
    check_dims(rho_r.dim(), rho_g.dim())?;
    top_eigvec(&(rho_r.mat() - rho_g.mat()))
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Argument(format!("{name} = {x} outside (0, 1]")));
    }
    Ok(())
}

/// Discriminator first, toward `|D_k>` from the current `rho_G`; then the
/// generator, toward `|G_k>` from the updated `Pi_D`.
pub fn frank_wolfe_step(
    state: &ConvexState,
    rho_r: &DensityMatrix,
    alpha: f64,
    beta: f64,
) -> Result<ConvexState> {
    check_rate("alpha", alpha)?;
    check_rate("beta", beta)?;
    check_dims(rho_r.dim(), state.rho_g.dim())?;
    let d = extreme_eigvec_d(rho_r, &state.rho_g)?;
    let pi = state.pi_d.mat() * cr(1.0 - alpha) + d.projector() * cr(alpha);
    let pi_d = PovmElement::from_raw(pi);
    let g = extreme_eigvec_g(&pi_d)?;
    let rho = state.rho_g.mat() * cr(1.0 - beta) + g.projector() * cr(beta);
    Ok(ConvexState {
        rho_g: DensityMatrix::from_raw(rho),
        pi_d,
        k: state.k + 1,
    })
}

/// `e^{beta H} = I + (e^beta - 1) H` for a rank-one projector `H`.
pub fn rank_one_exp(h: &ComplexMatrix, beta: f64) -> ComplexMatrix {
    identity(h.nrows()) + h * cr(beta.exp_m1())
}

/// Helstrom step with imaginary-time generator update: `Pi_D = |D><D|`
/// and `rho_G ∝ e^{beta H} rho_G e^{beta H}` with `H = |D><D|`.
pub fn imaginary_time_step(
    state: &ConvexState,
    rho_r: &DensityMatrix,
    beta: f64,
) -> Result<ConvexState> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Argument(format!(
            "beta = {beta} must be non-negative"
        )));
    }
    check_dims(rho_r.dim(), state.rho_g.dim())?;
    let h = extreme_eigvec_d(rho_r, &state.rho_g)?.projector();
    let e = rank_one_exp(&h, beta);
    let rho = &e * state.rho_g.mat() * &e;
    Ok(ConvexState {
        rho_g: DensityMatrix::from_raw_normalized(rho),
        pi_d: PovmElement::from_raw(h),
        k: state.k + 1,
    })
}

/// Partial-SWAP channel `Tr_2[e^{s i t SWAP} (rho ⊗ sigma) e^{-s i t SWAP}]`
/// for `sign = s`, in closed form
/// `cos^2 t rho + sin^2 t sigma - s (i/2) sin 2t [rho, sigma]`.
pub fn swap_channel(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
    sign: i8,
) -> Result<DensityMatrix> {
    check_dims(rho.dim(), sigma.dim())?;
    let s = match sign {
        1 => 1.0,
        -1 => -1.0,
        _ => {
            return Err(Error::Argument(format!(
                "sign must be +1 or -1, got {sign}"
            )))
        }
    };
    Ok(DensityMatrix::from_raw(swap_channel_raw(
        rho.mat(),
        sigma.mat(),
        t,
        s,
    )))
}

fn swap_channel_raw(rho: &ComplexMatrix, sigma: &ComplexMatrix, t: f64, s: f64) -> ComplexMatrix {
    let (st, ct) = t.sin_cos();
    let comm = commutator(rho, sigma);
    rho * cr(ct * ct)
        + sigma * cr(st * st)
        + comm * crate::qcore::linalg::c(0.0, -0.5 * s * (2.0 * t).sin())
}

/// `cos^4 t rho + sin^2 t (1 + cos^2 t) sigma + sin^2(2t)/4 [[rho, sigma], sigma]`
pub fn composed_swap_closed_form(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    t: f64,
) -> ComplexMatrix {
    let (st, ct) = t.sin_cos();
    let s2 = (2.0 * t).sin();
    let cc = commutator(&commutator(rho, sigma), sigma);
    rho * cr(ct.powi(4)) + sigma * cr(st * st * (1.0 + ct * ct)) + cc * cr(0.25 * s2 * s2)
}

/// `t` with `cos^4 t = 1 - beta`.
pub fn swap_time(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Argument(format!("beta = {beta} outside (0, 1)")));
    }
    Ok((1.0 - beta).powf(0.25).acos())
}

/// Helstrom step with the circuit update: the generator goes through
/// `E^{-t} ∘ E^{+t}` with resource state `H = |D><D|`.
pub fn circuit_update_step(
    state: &ConvexState,
    rho_r: &DensityMatrix,
    beta: f64,
) -> Result<ConvexState> {
    let t = swap_time(beta)?;
    check_dims(rho_r.dim(), state.rho_g.dim())?;
    let h = extreme_eigvec_d(rho_r, &state.rho_g)?.projector();
    let once = swap_channel_raw(state.rho_g.mat(), &h, t, 1.0);
    let twice = swap_channel_raw(&once, &h, t, -1.0);
    let tr = crate::qcore::linalg::trace(&twice).re;
    let rho_g = if (tr - 1.0).abs() > 1e-12 {
        DensityMatrix::from_raw_normalized(twice)
    } else {
        DensityMatrix::from_raw(twice)
    };
    Ok(ConvexState {
        rho_g,
        pi_d: PovmElement::from_raw(h),
        k: state.k + 1,
    })
}

/// One iteration of `variant` at index `state.k`.
pub fn convex_step(
    state: &ConvexState,
    rho_r: &DensityMatrix,
    variant: &UpdateVariant,
) -> Result<ConvexState> {
    let beta = variant.law.value(state.k);
    match variant.kind {
        VariantKind::FrankWolfe => frank_wolfe_step(state, rho_r, beta, beta),
        VariantKind::HelstromImaginary => imaginary_time_step(state, rho_r, beta),
        VariantKind::HelstromCircuit => circuit_update_step(state, rho_r, beta),
    }
}

/// Start of a run: full-rank random `rho_G`, and `Pi_D = I/2` for
/// Frank-Wolfe or the Helstrom projector for the other variants.
pub fn initial_state(rho_r: &DensityMatrix, kind: VariantKind, seed: u64) -> Result<ConvexState> {
    let n = rho_r.n_qubits();
    let rho_g = random_density_matrix(n, rho_r.dim(), seed)?;
    let pi_d = match kind {
        VariantKind::FrankWolfe => PovmElement::scaled_identity(n, 0.5)?,
        _ => helstrom_measurement(rho_r, &rho_g)?,
    };
    ConvexState::new(rho_g, pi_d)
}

fn record(state: &ConvexState, rho_r: &DensityMatrix) -> Result<TurnRecord> {
    let p_g = real_trace_of_product(state.pi_d.mat(), state.rho_g.mat())?;
    let p_r = real_trace_of_product(state.pi_d.mat(), rho_r.mat())?;
    Ok(TurnRecord {
        turn: state.k,
        score: p_r - p_g,
        p_r_given_g: p_g,
        trace_distance: trace_distance(&state.rho_g, rho_r)?,
        fidelity: fidelity(&state.rho_g, rho_r)?,
        params: None,
    })
}

pub fn run_convex_qgan_from(
    rho_r: &DensityMatrix,
    variant: &UpdateVariant,
    iterations: usize,
    mut state: ConvexState,
) -> Result<(Trajectory, ConvexState)> {
    if iterations == 0 {
        return Err(Error::Argument("iterations must be at least 1".into()));
    }
    let mut traj = Trajectory::default();
    for _ in 0..iterations {
        state = convex_step(&state, rho_r, variant)?;
        traj.records.push(record(&state, rho_r)?);
    }
    Ok((traj, state))
}

pub fn run_convex_qgan(
    rho_r: &DensityMatrix,
    variant: &UpdateVariant,
    iterations: usize,
    seed: u64,
) -> Result<Trajectory> {
    let init = initial_state(rho_r, variant.kind, seed)?;
    Ok(run_convex_qgan_from(rho_r, variant, iterations, init)?.0)
}
