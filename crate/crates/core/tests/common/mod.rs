#![allow(dead_code)]

use qgan_core::convexqgan::{composed_swap_closed_form, swap_channel};
use qgan_core::qcore::linalg::{c, identity, kron, max_abs_diff};
use qgan_core::qcore::{
    helstrom_measurement, partial_trace_matrix, random_density_matrix, random_pure_state, score,
    trace_distance, ComplexMatrix, DensityMatrix, C64,
};

/// Reduced matrix by explicit summation over every index of the traced
/// qubits, one bit at a time.
pub fn index_sum_partial_trace(m: &ComplexMatrix, n: usize, keep: &[usize]) -> ComplexMatrix {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let out_dim = 1 << k;
    let compose = |kv: usize, tv: usize| -> usize {
        let mut bits = vec![0usize; n];
        for (i, &q) in keep.iter().enumerate() {
            bits[q] = (kv >> (k - 1 - i)) & 1;
        }
        for (i, &q) in traced.iter().enumerate() {
            bits[q] = (tv >> (traced.len() - 1 - i)) & 1;
        }
        bits.iter().fold(0, |acc, b| (acc << 1) | b)
    };
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..(1 << traced.len()) {
                s += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = s;
        }
    }
    out
}

pub fn swap_matrix(n: usize) -> ComplexMatrix {
    let d = 1 << n;
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = C64::new(1.0, 0.0);
        }
    }
    s
}

/// `Tr_2[e^{s i t SWAP} (rho ⊗ sigma) e^{-s i t SWAP}]` on the full
/// two-register space.
pub fn two_register_swap(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
    s: f64,
) -> ComplexMatrix {
    let n = rho.n_qubits();
    let sw = swap_matrix(n);
    let u = identity(sw.nrows()) * c(t.cos(), 0.0) + sw * c(0.0, s * t.sin());
    let joint = &u * kron(rho.mat(), sigma.mat()) * u.adjoint();
    let keep: Vec<usize> = (0..n).collect();
    partial_trace_matrix(&joint, 2 * n, &keep).unwrap()
}

fn mixed_pair(seed: u64) -> (DensityMatrix, DensityMatrix) {
    let n = 1 + (seed % 3) as usize;
    let d = 1 << n;
    let rank_a = 1 + (seed as usize % d);
    let rank_b = 1 + ((seed as usize / 3) % d);
    (
        random_density_matrix(n, rank_a, 2 * seed).unwrap(),
        random_density_matrix(n, rank_b, 2 * seed + 1).unwrap(),
    )
}

fn angle(seed: u64) -> f64 {
    (seed as f64 * 0.754_877_666_246_692_7).fract() * std::f64::consts::PI
}

/// Largest deviation between the library partial trace and the index-sum
/// oracle over `count` random pure 3- and 4-qubit states with varied keep
/// sets.
pub fn partial_trace_oracle_error(count: u64) -> f64 {
    let keeps: [&[usize]; 6] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2]];
    (0..count)
        .map(|s| {
            let n = 3 + (s % 2) as usize;
            let m = random_pure_state(n, 1000 + s).unwrap().projector();
            let keep = keeps[s as usize % keeps.len()];
            let lib = partial_trace_matrix(&m, n, keep).unwrap();
            max_abs_diff(&lib, &index_sum_partial_trace(&m, n, keep))
        })
        .fold(0.0, f64::max)
}

pub fn swap_channel_oracle_error(count: u64) -> f64 {
    (0..count)
        .map(|s| {
            let (rho, sigma) = mixed_pair(s);
            let t = angle(s);
            let sign: i8 = if s % 2 == 0 { 1 } else { -1 };
            let lib = swap_channel(&rho, &sigma, t, sign).unwrap();
            max_abs_diff(lib.mat(), &two_register_swap(&rho, &sigma, t, sign as f64))
        })
        .fold(0.0, f64::max)
}

/// `|S(Helstrom) - trace distance|` over random pairs.
pub fn helstrom_identity_error(count: u64) -> f64 {
    (0..count)
        .map(|s| {
            let (r, g) = mixed_pair(s + 50_000);
            let pi = helstrom_measurement(&r, &g).unwrap();
            (score(&pi, &g, &r).unwrap() - trace_distance(&g, &r).unwrap()).abs()
        })
        .fold(0.0, f64::max)
}

/// Composition `E^{-t} ∘ E^{+t}` against the closed form.
pub fn composed_swap_error(count: u64) -> f64 {
    (0..count)
        .map(|s| {
            let (rho, sigma) = mixed_pair(s + 90_000);
            let t = angle(s + 7);
            let once = swap_channel(&rho, &sigma, t, 1).unwrap();
            let twice = swap_channel(&once, &sigma, t, -1).unwrap();
            max_abs_diff(
                twice.mat(),
                &composed_swap_closed_form(rho.mat(), sigma.mat(), t),
            )
        })
        .fold(0.0, f64::max)
}

/// Parameterized operator families covering every ansatz kind.
pub enum Family {
    Generator(qgan_core::circuits::GeneratorModel),
    Discriminator(qgan_core::circuits::DiscriminatorModel),
}

pub fn ansatz_families() -> Vec<(&'static str, Family)> {
    use qgan_core::circuits::{DiscriminatorModel as D, GeneratorModel as G};
    vec![
        ("minimal generator", Family::Generator(G::minimal())),
        ("minimal discriminator", Family::Discriminator(D::minimal())),
        (
            "mixed generator n=1",
            Family::Generator(G::mixed(1, 1).unwrap()),
        ),
        (
            "mixed generator n=2",
            Family::Generator(G::mixed(2, 1).unwrap()),
        ),
        (
            "pure generator n=2",
            Family::Generator(G::pure(2, 1).unwrap()),
        ),
        (
            "pure generator n=3",
            Family::Generator(G::pure(3, 2).unwrap()),
        ),
        (
            "layered discriminator n=1",
            Family::Discriminator(D::layered(1, 1).unwrap()),
        ),
        (
            "layered discriminator n=2",
            Family::Discriminator(D::layered(2, 3).unwrap()),
        ),
    ]
}

/// Largest `|parameter shift - central difference|` over `count` random
/// objectives `Tr[O rho_G(theta)]` or `Tr[Pi_D(theta) O]` with `O` a
/// difference of random states.
pub fn gradient_check_error(count: u64) -> f64 {
    use qgan_core::gradients::{finite_difference_gradient, parameter_shift_gradient};
    use qgan_core::qcore::linalg::trace_of_product;
    use rand::Rng;
    let families = ansatz_families();
    let mut worst: f64 = 0.0;
    for s in 0..count {
        let (_, fam) = &families[s as usize % families.len()];
        let n = match fam {
            Family::Generator(g) => g.n_system(),
            Family::Discriminator(d) => d.n_system(),
        };
        let o = random_density_matrix(n, 1 << n, 3 * s).unwrap().mat()
            - random_density_matrix(n, 1, 3 * s + 1).unwrap().mat();
        let n_params = match fam {
            Family::Generator(g) => g.n_params(),
            Family::Discriminator(d) => d.n_params(),
        };
        let mut rng = qgan_core::qcore::random::rng_from_seed(3 * s + 2);
        let theta: Vec<f64> = (0..n_params)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        let obj = |t: &[f64]| -> qgan_core::Result<f64> {
            let m = match fam {
                Family::Generator(g) => g.generator_state(t)?.into_mat(),
                Family::Discriminator(d) => d.povm(t)?.into_mat(),
            };
            Ok(trace_of_product(&m, &o).re)
        };
        let ps = parameter_shift_gradient(&obj, &theta).unwrap();
        let fd = finite_difference_gradient(&obj, &theta, 1e-5).unwrap();
        for (a, b) in ps.iter().zip(&fd) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

fn su4_output(params: &[f64]) -> qgan_core::qcore::PureState {
    let block = qgan_core::circuits::su4_block(0, 1, 0).unwrap();
    qgan_core::circuits::CircuitAnsatz::new(2, block)
        .unwrap()
        .apply_to_zero(params)
        .unwrap()
}

fn pure_trace_distance(a: &qgan_core::qcore::PureState, b: &qgan_core::qcore::PureState) -> f64 {
    (1.0 - a.inner(b).norm_sqr()).max(0.0).sqrt()
}

/// Best trace distance between one SU(4) block output at `samples` uniform
/// random angle vectors and a Haar-random two-qubit state, with the best
/// angles.
pub fn su4_sampling(samples: usize, seed: u64) -> (f64, Vec<f64>) {
    use rand::Rng;
    let target = random_pure_state(2, seed).unwrap();
    let mut rng = qgan_core::qcore::random::rng_from_seed(seed ^ 0x5eed);
    let mut best = (f64::INFINITY, Vec::new());
    for _ in 0..samples {
        let theta: Vec<f64> = (0..15)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        let d = pure_trace_distance(&su4_output(&theta), &target);
        if d < best.0 {
            best = (d, theta);
        }
    }
    best
}

/// Gradient descent on the infidelity from `start`; returns the final trace
/// distance to the same target as [`su4_sampling`].
pub fn su4_refine(start: &[f64], seed: u64, steps: usize) -> f64 {
    use qgan_core::gradients::parameter_shift_gradient;
    let target = random_pure_state(2, seed).unwrap();
    let obj =
        |t: &[f64]| -> qgan_core::Result<f64> { Ok(1.0 - su4_output(t).inner(&target).norm_sqr()) };
    let mut theta = start.to_vec();
    for _ in 0..steps {
        let g = parameter_shift_gradient(&obj, &theta).unwrap();
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= 0.5 * gi;
        }
    }
    pure_trace_distance(&su4_output(&theta), &target)
}
