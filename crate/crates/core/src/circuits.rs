//! Parametrized circuits built from single-qubit rotations and CNOTs,
//! and the generator/discriminator models built on top of them.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::qcore::linalg::{c, cr, ComplexMatrix, ComplexVector, C64};
use crate::qcore::{DensityMatrix, PovmElement, PureState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    /// `exp(-i theta sigma_axis / 2)` with `theta = params[param]`.
    Rotation {
        axis: Axis,
        qubit: usize,
        param: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn rx(qubit: usize, param: usize) -> Self {
        Gate::Rotation {
            axis: Axis::X,
            qubit,
            param,
        }
    }

    pub fn ry(qubit: usize, param: usize) -> Self {
        Gate::Rotation {
            axis: Axis::Y,
            qubit,
            param,
        }
    }

    pub fn rz(qubit: usize, param: usize) -> Self {
        Gate::Rotation {
            axis: Axis::Z,
            qubit,
            param,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
}

/// 2x2 matrix of `exp(-i theta sigma / 2)`, row-major.
pub fn rotation_matrix(axis: Axis, theta: f64) -> [[C64; 2]; 2] {
    let (s, co) = (theta / 2.0).sin_cos();
    match axis {
        Axis::X => [[cr(co), c(0.0, -s)], [c(0.0, -s), cr(co)]],
        Axis::Y => [[cr(co), cr(-s)], [cr(s), cr(co)]],
        Axis::Z => [[c(co, -s), cr(0.0)], [cr(0.0), c(co, s)]],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitAnsatz {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl CircuitAnsatz {
    /// Checks qubit ranges and that the parameter slots used are exactly
    /// `0..n_params`.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("circuit needs at least one qubit".into()));
        }
        let mut slots = BTreeSet::new();
        for gate in &gates {
            match *gate {
                Gate::Rotation { qubit, param, .. } => {
                    if qubit >= n_qubits {
                        return Err(Error::Argument(format!(
                            "rotation on qubit {qubit} outside {n_qubits}-qubit register"
                        )));
                    }
                    slots.insert(param);
                }
                Gate::Cnot { control, target } => {
                    if control >= n_qubits || target >= n_qubits {
                        return Err(Error::Argument(format!(
                            "CNOT({control}->{target}) outside {n_qubits}-qubit register"
                        )));
                    }
                    if control == target {
                        return Err(Error::Argument("CNOT control equals target".into()));
                    }
                }
            }
        }
        let n_params = slots.len();
        if slots.iter().next_back().is_some_and(|&m| m + 1 != n_params) {
            return Err(Error::Argument(
                "parameter indices are not contiguous from 0".into(),
            ));
        }
        Ok(Self {
            n_qubits,
            gates,
            n_params,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        Ok(())
    }

    /// Runs the gate list on a raw amplitude vector in place.
    fn run(&self, params: &[f64], amps: &mut [C64]) {
        let n = self.n_qubits;
        for gate in &self.gates {
            match *gate {
                Gate::Rotation { axis, qubit, param } => {
                    apply_single(amps, n, qubit, &rotation_matrix(axis, params[param]))
                }
                Gate::Cnot { control, target } => apply_cnot(amps, n, control, target),
            }
        }
    }

    pub fn apply(&self, params: &[f64], input: &PureState) -> Result<PureState> {
        self.check_params(params)?;
        crate::error::check_dims(self.dim(), input.dim())?;
        let mut amps = input.amplitudes().clone();
        self.run(params, amps.as_mut_slice());
        Ok(PureState::from_raw(amps))
    }

    /// Output of the circuit on `|0...0>`.
    pub fn apply_to_zero(&self, params: &[f64]) -> Result<PureState> {
        self.check_params(params)?;
        let mut amps = ComplexVector::zeros(self.dim());
        amps[0] = cr(1.0);
        self.run(params, amps.as_mut_slice());
        Ok(PureState::from_raw(amps))
    }

    /// Dense unitary, column `j` being the image of `|j>`.
    pub fn unitary(&self, params: &[f64]) -> Result<ComplexMatrix> {
        self.check_params(params)?;
        let dim = self.dim();
        let mut u = ComplexMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut col = ComplexVector::zeros(dim);
            col[j] = cr(1.0);
            self.run(params, col.as_mut_slice());
            u.set_column(j, &col);
        }
        Ok(u)
    }
}

#[inline]
fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

fn apply_single(amps: &mut [C64], n_qubits: usize, qubit: usize, m: &[[C64; 2]; 2]) {
    let mask = bit_mask(n_qubits, qubit);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let (a, b) = (amps[i], amps[i | mask]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i | mask] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_cnot(amps: &mut [C64], n_qubits: usize, control: usize, target: usize) {
    let cm = bit_mask(n_qubits, control);
    let tm = bit_mask(n_qubits, target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

pub fn apply_circuit(
    ansatz: &CircuitAnsatz,
    params: &[f64],
    input: &PureState,
) -> Result<PureState> {
    ansatz.apply(params, input)
}

/// Fifteen-rotation, three-CNOT two-qubit block: ZYZ on both qubits,
/// CNOT(q2->q1), Rz(q1) Ry(q2), CNOT(q1->q2), Ry(q2), CNOT(q2->q1), ZYZ on
/// both qubits. Parameters are numbered from `param_offset` in gate order.
pub fn su4_block(q1: usize, q2: usize, param_offset: usize) -> Result<Vec<Gate>> {
    if q1 == q2 {
        return Err(Error::Argument(format!("block qubits coincide ({q1})")));
    }
    let mut p = param_offset;
    let mut next = || {
        p += 1;
        p - 1
    };
    let mut gates = Vec::with_capacity(18);
    for q in [q1, q2] {
        gates.extend([
            Gate::rz(q, next()),
            Gate::ry(q, next()),
            Gate::rz(q, next()),
        ]);
    }
    gates.push(Gate::cnot(q2, q1));
    gates.push(Gate::rz(q1, next()));
    gates.push(Gate::ry(q2, next()));
    gates.push(Gate::cnot(q1, q2));
    gates.push(Gate::ry(q2, next()));
    gates.push(Gate::cnot(q2, q1));
    for q in [q1, q2] {
        gates.extend([
            Gate::rz(q, next()),
            Gate::ry(q, next()),
            Gate::rz(q, next()),
        ]);
    }
    Ok(gates)
}

/// Staggered brick pattern: even layers act on (0,1),(2,3),..., odd layers
/// on (1,2),(3,4),... A single qubit gets one Rz Ry Rz chain per layer.
pub fn layered_ansatz(n_qubits: usize, n_layers: usize) -> Result<CircuitAnsatz> {
    if n_layers < 1 {
        return Err(Error::Argument("need at least one layer".into()));
    }
    if n_qubits == 0 {
        return Err(Error::Argument("circuit needs at least one qubit".into()));
    }
    let mut gates = Vec::new();
    let mut offset = 0;
    if n_qubits == 1 {
        for _ in 0..n_layers {
            gates.extend([
                Gate::rz(0, offset),
                Gate::ry(0, offset + 1),
                Gate::rz(0, offset + 2),
            ]);
            offset += 3;
        }
        return CircuitAnsatz::new(1, gates);
    }
    for layer in 0..n_layers {
        let mut q = layer % 2;
        while q + 1 < n_qubits {
            gates.extend(su4_block(q, q + 1, offset)?);
            offset += 15;
            q += 2;
        }
    }
    CircuitAnsatz::new(n_qubits, gates)
}

/// Layers used when a depth is not given, by register size: one for one or
/// two qubits, three for larger registers. Fewer than two layers would
/// leave qubits beyond the first pair untouched.
pub fn default_layers(n_qubits: usize) -> usize {
    if n_qubits <= 2 {
        1
    } else {
        3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorMode {
    /// Circuit on `2n` qubits; the last `n` are traced out.
    Mixed,
    /// Circuit on `n` qubits producing a pure state.
    Pure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    n_system: usize,
    ansatz: CircuitAnsatz,
    mode: GeneratorMode,
}

impl GeneratorModel {
    pub fn new(n_system: usize, ansatz: CircuitAnsatz, mode: GeneratorMode) -> Result<Self> {
        let want = match mode {
            GeneratorMode::Mixed => 2 * n_system,
            GeneratorMode::Pure => n_system,
        };
        if n_system == 0 || ansatz.n_qubits() != want {
            return Err(Error::Argument(format!(
                "{mode:?} generator on {n_system} qubits needs a {want}-qubit circuit, got {}",
                ansatz.n_qubits()
            )));
        }
        Ok(Self {
            n_system,
            ansatz,
            mode,
        })
    }

    /// Layered ansatz on the doubled register.
    pub fn mixed(n_system: usize, n_layers: usize) -> Result<Self> {
        Self::new(
            n_system,
            layered_ansatz(2 * n_system, n_layers)?,
            GeneratorMode::Mixed,
        )
    }

    pub fn pure(n_system: usize, n_layers: usize) -> Result<Self> {
        Self::new(
            n_system,
            layered_ansatz(n_system, n_layers)?,
            GeneratorMode::Pure,
        )
    }

    /// Three-parameter single-qubit generator: Ry(t1) on the system,
    /// CNOT(system->ancilla), then Rx(t2) and Rz(t3) on the system.
    pub fn minimal() -> Self {
        let gates = vec![
            Gate::ry(0, 0),
            Gate::cnot(0, 1),
            Gate::rx(0, 1),
            Gate::rz(0, 2),
        ];
        Self {
            n_system: 1,
            ansatz: CircuitAnsatz::new(2, gates).expect("fixed gate list is valid"),
            mode: GeneratorMode::Mixed,
        }
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn ansatz(&self) -> &CircuitAnsatz {
        &self.ansatz
    }

    pub fn mode(&self) -> GeneratorMode {
        self.mode
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    pub fn generator_state(&self, params: &[f64]) -> Result<DensityMatrix> {
        let psi = self.ansatz.apply_to_zero(params)?;
        Ok(match self.mode {
            GeneratorMode::Pure => psi.density(),
            GeneratorMode::Mixed => {
                // rows index the system register, columns the ancillas
                let d = 1usize << self.n_system;
                let amps = psi.amplitudes();
                let m = DMatrix::from_fn(d, d, |i, j| amps[i * d + j]);
                DensityMatrix::from_raw(&m * m.adjoint())
            }
        })
    }
}

pub fn generator_state(model: &GeneratorModel, params: &[f64]) -> Result<DensityMatrix> {
    model.generator_state(params)
}

/// Circuit on `n_system + 1` qubits whose last qubit is the measured
/// ancilla. The element is the probability of reading ancilla 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorModel {
    n_system: usize,
    ansatz: CircuitAnsatz,
}

impl DiscriminatorModel {
    pub fn new(n_system: usize, ansatz: CircuitAnsatz) -> Result<Self> {
        if n_system == 0 || ansatz.n_qubits() != n_system + 1 {
            return Err(Error::Argument(format!(
                "discriminator on {n_system} qubits needs a {}-qubit circuit, got {}",
                n_system + 1,
                ansatz.n_qubits()
            )));
        }
        Ok(Self { n_system, ansatz })
    }

    pub fn layered(n_system: usize, n_layers: usize) -> Result<Self> {
        Self::new(n_system, layered_ansatz(n_system + 1, n_layers)?)
    }

    /// Four-parameter single-qubit discriminator: Ry(t2) on the ancilla,
    /// CNOT(system->ancilla), Ry(t1) on the ancilla, CNOT(ancilla->system),
    /// then Rz(t3) and Rx(t4) on the ancilla.
    pub fn minimal() -> Self {
        let gates = vec![
            Gate::ry(1, 1),
            Gate::cnot(0, 1),
            Gate::ry(1, 0),
            Gate::cnot(1, 0),
            Gate::rz(1, 2),
            Gate::rx(1, 3),
        ];
        Self {
            n_system: 1,
            ansatz: CircuitAnsatz::new(2, gates).expect("fixed gate list is valid"),
        }
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn ansatz(&self) -> &CircuitAnsatz {
        &self.ansatz
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    /// `W^dagger W` with `W = <0_a| U |0_a>`.
    pub fn povm(&self, params: &[f64]) -> Result<PovmElement> {
        self.ansatz.check_params(params)?;
        let d = 1usize << self.n_system;
        let mut w = ComplexMatrix::zeros(d, d);
        let mut amps = ComplexVector::zeros(2 * d);
        for j in 0..d {
            amps.fill(cr(0.0));
            amps[2 * j] = cr(1.0);
            self.ansatz.run(params, amps.as_mut_slice());
            for i in 0..d {
                w[(i, j)] = amps[2 * i];
            }
        }
        Ok(PovmElement::from_raw(w.adjoint() * w))
    }
}

pub fn discriminator_povm(model: &DiscriminatorModel, params: &[f64]) -> Result<PovmElement> {
    model.povm(params)
}

fn check_len<const N: usize>(theta: &[f64]) -> Result<[f64; N]> {
    theta
        .try_into()
        .map_err(|_| Error::Argument(format!("expected {N} angles, got {}", theta.len())))
}

/// Closed-form state of the three-parameter generator.
pub fn minimal_generator(theta: &[f64]) -> Result<DensityMatrix> {
    let [t1, t2, t3] = check_len::<3>(theta)?;
    let (c1, c2, c3) = (t1.cos(), t2.cos(), t3.cos());
    let (s2, s3) = (t2.sin(), t3.sin());
    let off = c1 * s2;
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            cr(1.0 + c1 * c2),
            c(off * s3, off * c3),
            c(off * s3, -off * c3),
            cr(1.0 - c1 * c2),
        ],
    ) * cr(0.5);
    Ok(DensityMatrix::from_raw(m))
}

/// Closed-form element of the four-parameter discriminator.
pub fn minimal_discriminator(theta: &[f64]) -> Result<PovmElement> {
    let [t1, t2, t3, t4] = check_len::<4>(theta)?;
    let s4 = t4.sin();
    let re = s4 * t1.cos() * t3.sin();
    let im = s4 * t2.cos() * t3.cos();
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            cr(1.0 + (t1 + t2).cos() * t4.cos()),
            c(re, -im),
            c(re, im),
            cr(1.0 - (t1 - t2).cos() * t4.cos()),
        ],
    ) * cr(0.5);
    Ok(PovmElement::from_raw(m))
}
