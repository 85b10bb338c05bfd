//! Exact gradients of single-qubit `Z` expectations of a [`Circuit`].
//!
//! Three routes are provided: the two-term parameter-shift rule, a reverse
//! (adjoint) sweep that costs a constant number of state passes per gate, and
//! central finite differences for arbitrary black-box functions. Training uses
//! the adjoint sweep; the other two exist as independent checks.

use num_complex::Complex;
use rayon::prelude::*;

use crate::num::Real;
use crate::statevec::kernels::{self, Matrix2};
use crate::statevec::{Angle, Axis, Circuit, Gate, Result, SimError, StateVector};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `<Z_qubit>` of `circuit` applied to `input`.
pub fn expectation<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    noise: &[T],
    input: &StateVector<T>,
    qubit: usize,
) -> Result<T> {
    circuit.run(input, params, noise)?.expectation_z(qubit)
}

/// Gradient of `<Z_qubit>` by the rule `(f(theta + pi/2) - f(theta - pi/2)) / 2`,
/// applied per gate occurrence and summed per parameter slot.
///
/// Fails with [`SimError::UnsupportedGate`] when a trainable angle drives a
/// gate whose generator does not have eigenvalues `+-1/2`.
pub fn parameter_shift_gradient<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    noise: &[T],
    input: &StateVector<T>,
    qubit: usize,
) -> Result<Vec<T>> {
    circuit.check_inputs(input, params, noise)?;
    input.checked_stride(qubit)?;

    let mut jobs = Vec::new();
    for (idx, gate) in circuit.gates().iter().enumerate() {
        match (gate, gate.angle()) {
            (Gate::Rotation { .. }, Some(Angle::Param(slot))) => jobs.push((idx, slot)),
            (_, Some(Angle::Param(_))) => return Err(SimError::UnsupportedGate(idx)),
            _ => {}
        }
    }

    let shift = T::FRAC_PI_2();
    let eval = |idx: usize, delta: T| {
        let mut state = input.clone();
        circuit.apply_unchecked(&mut state, params, noise, Some((idx, delta)));
        state.expectation_z(qubit).expect("qubit checked above")
    };
    let terms: Vec<(usize, T)> = jobs
        .par_iter()
        .map(|&(idx, slot)| (slot, T::half() * (eval(idx, shift) - eval(idx, -shift))))
        .collect();

    let mut grad = vec![T::zero(); circuit.n_params()];
    for (slot, term) in terms {
        grad[slot] += term;
    }
    Ok(grad)
}

/// Gradient of `<Z_qubit>` from one forward and one reverse sweep.
pub fn adjoint_gradient<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    noise: &[T],
    input: &StateVector<T>,
    qubit: usize,
) -> Result<Vec<T>> {
    let output = circuit.run(input, params, noise)?;
    let mut costate = output.clone();
    costate.apply_z(qubit)?;
    adjoint_vjp(circuit, params, noise, output, costate)
}

/// Reverse sweep for a general quadratic form.
///
/// Given the circuit output `psi` and `lambda = O psi` for a Hermitian `O`,
/// returns `d <psi|O|psi> / d theta` for every parameter slot. More generally
/// it returns `2 Re <lambda| d psi / d theta>` for any `lambda`, which is how
/// the generator gradient chains through the discriminator.
pub fn adjoint_vjp<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    noise: &[T],
    output: StateVector<T>,
    costate: StateVector<T>,
) -> Result<Vec<T>> {
    circuit.check_inputs(&output, params, noise)?;
    output.same_size(&costate)?;
    let mut grad = vec![T::zero(); circuit.n_params()];
    let mut phi = output;
    let mut lambda = costate;
    let gates = circuit.gates();
    let theta_of = |gate: &Gate<T>| {
        gate.angle()
            .map(|a| a.resolve(params, noise))
            .unwrap_or_else(T::zero)
    };
    let slot_of = |gate: &Gate<T>| match gate.angle() {
        Some(Angle::Param(slot)) => Some(slot),
        _ => None,
    };
    let mut ops: Vec<UndoOp<T>> = Vec::with_capacity(MAX_RUN);
    let mut masks: Vec<usize> = Vec::new();
    let mut end = gates.len();
    while end > 0 {
        match gates[end - 1] {
            Gate::Rotation { qubit, .. } => {
                let mut start = end - 1;
                while start > 0
                    && end - start < MAX_RUN
                    && matches!(gates[start - 1], Gate::Rotation { qubit: q, .. } if q == qubit)
                {
                    start -= 1;
                }
                ops.clear();
                for gate in gates[start..end].iter().rev() {
                    if let Gate::Rotation { axis, .. } = *gate {
                        ops.push(UndoOp {
                            axis,
                            inv: kernels::dagger(&axis.rotation(theta_of(gate))),
                            want: slot_of(gate).is_some(),
                        });
                    }
                }
                let stride = phi.stride(qubit);
                let acc = unapply_run(phi.amplitudes_mut(), lambda.amplitudes_mut(), stride, &ops);
                for (k, gate) in gates[start..end].iter().rev().enumerate() {
                    if let Some(slot) = slot_of(gate) {
                        grad[slot] += acc[k];
                    }
                }
                end = start;
            }
            Gate::Cz { .. } => {
                masks.clear();
                while end > 0 {
                    match gates[end - 1] {
                        Gate::Cz { a, b } => masks.push(phi.stride(a) | phi.stride(b)),
                        _ => break,
                    }
                    end -= 1;
                }
                kernels::apply_cz_layer(phi.amplitudes_mut(), &masks);
                kernels::apply_cz_layer(lambda.amplitudes_mut(), &masks);
            }
            Gate::ControlledRotation {
                axis,
                control,
                target,
                ..
            } => {
                let gate = &gates[end - 1];
                let (c, t) = (phi.stride(control), phi.stride(target));
                let inv = kernels::dagger(&axis.rotation(theta_of(gate)));
                let z = unapply_controlled(
                    phi.amplitudes_mut(),
                    lambda.amplitudes_mut(),
                    c,
                    t,
                    axis,
                    &inv,
                );
                if let Some(slot) = slot_of(gate) {
                    grad[slot] += z.im;
                }
                end -= 1;
            }
        }
    }
    Ok(grad)
}

/// Longest run of same-qubit rotations undone in one sweep.
const MAX_RUN: usize = 4;

/// Inverse of one rotation in a run, and whether its overlap is needed.
struct UndoOp<T: Real> {
    axis: Axis,
    inv: Matrix2<T>,
    want: bool,
}

/// `<l| sigma_axis |p>` restricted to one amplitude pair.
#[inline(always)]
fn pauli_pair<T: Real>(
    axis: Axis,
    l0: Complex<T>,
    l1: Complex<T>,
    p0: Complex<T>,
    p1: Complex<T>,
) -> Complex<T> {
    match axis {
        Axis::X => l0.conj() * p1 + l1.conj() * p0,
        Axis::Y => {
            let d = l1.conj() * p0 - l0.conj() * p1;
            Complex::new(-d.im, d.re)
        }
        Axis::Z => l0.conj() * p0 - l1.conj() * p1,
    }
}

/// `Re(conj(l) p)` and `Im(conj(l) p)`.
#[inline(always)]
fn re_dot<T: Real>(l: Complex<T>, p: Complex<T>) -> T {
    l.re * p.re + l.im * p.im
}

#[inline(always)]
fn im_dot<T: Real>(l: Complex<T>, p: Complex<T>) -> T {
    l.re * p.im - l.im * p.re
}

/// Pair amplitudes `(p0, p1)` of phi and `(l0, l1)` of lambda.
type Quad<T> = [Complex<T>; 4];

/// `Im <l|Z|p>` on a pair, then the inverse `diag(d0, d1)`.
#[inline(always)]
fn undo_z<T: Real>(q: &mut Quad<T>, d0: Complex<T>, d1: Complex<T>) -> T {
    let [p0, p1, l0, l1] = *q;
    let g = im_dot(l0, p0) - im_dot(l1, p1);
    *q = [p0 * d0, p1 * d1, l0 * d0, l1 * d1];
    g
}

/// `Im <l|Y|p>`, then the real inverse `[[c, s], [-s, c]]`.
#[inline(always)]
fn undo_y<T: Real>(q: &mut Quad<T>, c: T, s: T) -> T {
    let [p0, p1, l0, l1] = *q;
    let g = re_dot(l1, p0) - re_dot(l0, p1);
    *q = [
        p0 * c + p1 * s,
        p1 * c - p0 * s,
        l0 * c + l1 * s,
        l1 * c - l0 * s,
    ];
    g
}

/// `Im <l|X|p>`, then the inverse `[[c, i s], [i s, c]]`.
#[inline(always)]
fn undo_x<T: Real>(q: &mut Quad<T>, c: T, s: T) -> T {
    let [p0, p1, l0, l1] = *q;
    let g = im_dot(l0, p1) + im_dot(l1, p0);
    let is = |v: Complex<T>| Complex::new(-v.im * s, v.re * s);
    *q = [
        p0 * c + is(p1),
        p1 * c + is(p0),
        l0 * c + is(l1),
        l1 * c + is(l0),
    ];
    g
}

#[inline(always)]
fn undo_one<T: Real>(q: &mut Quad<T>, op: &UndoOp<T>) -> T {
    let m = &op.inv;
    match op.axis {
        Axis::Z => undo_z(q, m[0][0], m[1][1]),
        Axis::Y => undo_y(q, m[0][0].re, m[0][1].re),
        Axis::X => undo_x(q, m[0][0].re, m[0][1].im),
    }
}

fn sweep<T: Real, F>(phi: &mut [Complex<T>], lambda: &mut [Complex<T>], stride: usize, mut f: F)
where
    F: FnMut(&mut Quad<T>),
{
    kernels::for_each_pair2(phi, lambda, stride, |p0, p1, l0, l1| {
        let mut q = [*p0, *p1, *l0, *l1];
        f(&mut q);
        [*p0, *p1, *l0, *l1] = q;
    });
}

/// Undoes a run of rotations on one qubit, returning `Im <lambda|sigma|phi>`
/// taken just before each inverse. The Euler triple `Rz Ry Rz` is done in a
/// single pass; anything else gate by gate.
fn unapply_run<T: Real>(
    phi: &mut [Complex<T>],
    lambda: &mut [Complex<T>],
    stride: usize,
    ops: &[UndoOp<T>],
) -> [T; MAX_RUN] {
    let mut acc = [T::zero(); MAX_RUN];
    let euler = matches!(ops, [a, b, c] if (a.axis, b.axis, c.axis) == (Axis::Z, Axis::Y, Axis::Z));
    if euler {
        let (z1, y, z2) = (&ops[0].inv, &ops[1].inv, &ops[2].inv);
        let (c, s) = (y[0][0].re, y[0][1].re);
        let mut g = [T::zero(); 3];
        sweep(phi, lambda, stride, |q| {
            g[0] += undo_z(q, z1[0][0], z1[1][1]);
            g[1] += undo_y(q, c, s);
            g[2] += undo_z(q, z2[0][0], z2[1][1]);
        });
        acc[..3].copy_from_slice(&g);
    } else {
        for (k, op) in ops.iter().enumerate() {
            let mut g = T::zero();
            match op.axis {
                Axis::Z => {
                    let (d0, d1) = (op.inv[0][0], op.inv[1][1]);
                    sweep(phi, lambda, stride, |q| g += undo_z(q, d0, d1));
                }
                _ => sweep(phi, lambda, stride, |q| g += undo_one(q, op)),
            }
            acc[k] = g;
        }
    }
    for (a, op) in acc.iter_mut().zip(ops) {
        if !op.want {
            *a = T::zero();
        }
    }
    acc
}

fn unapply_controlled<T: Real>(
    phi: &mut [Complex<T>],
    lambda: &mut [Complex<T>],
    control: usize,
    target: usize,
    axis: Axis,
    inv: &Matrix2<T>,
) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..phi.len() {
        if i & control != 0 && i & target == 0 {
            let j = i | target;
            acc += pauli_pair(axis, lambda[i], lambda[j], phi[i], phi[j]);
            let (a, b) = kernels::mat_vec(inv, phi[i], phi[j]);
            phi[i] = a;
            phi[j] = b;
            let (a, b) = kernels::mat_vec(inv, lambda[i], lambda[j]);
            lambda[i] = a;
            lambda[j] = b;
        }
    }
    acc
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
///
/// Panics if `step` is not positive.
pub fn finite_difference_gradient<T, F>(mut f: F, params: &[T], step: T) -> Vec<T>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    assert!(step > T::zero(), "finite-difference step must be positive");
    let mut x = params.to_vec();
    (0..params.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + step;
            let up = f(&x);
            x[i] = orig - step;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (T::two() * step)
        })
        .collect()
}
