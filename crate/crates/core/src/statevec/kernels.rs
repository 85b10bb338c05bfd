//! Stride-based in-place amplitude kernels.
//!
//! Qubit `q` (1-based) of an `n`-qubit register owns the bit with weight
//! `2^(n-q)`, so qubit 1 is the most significant bit of the basis index. All
//! kernels here take that weight (`stride`) directly and assume it is valid.

use num_complex::Complex;

use crate::num::Real;

/// Dense 2x2 complex matrix, row major.
pub type Matrix2<T> = [[Complex<T>; 2]; 2];

#[inline(always)]
pub(crate) fn for_each_pair<T, F>(amps: &mut [Complex<T>], stride: usize, mut f: F)
where
    T: Real,
    F: FnMut(&mut Complex<T>, &mut Complex<T>),
{
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// Visits matching amplitude pairs of two equally sized registers.
#[inline(always)]
pub(crate) fn for_each_pair2<T, F>(
    xs: &mut [Complex<T>],
    ys: &mut [Complex<T>],
    stride: usize,
    mut f: F,
) where
    T: Real,
    F: FnMut(&mut Complex<T>, &mut Complex<T>, &mut Complex<T>, &mut Complex<T>),
{
    debug_assert_eq!(xs.len(), ys.len());
    for (cx, cy) in xs
        .chunks_exact_mut(2 * stride)
        .zip(ys.chunks_exact_mut(2 * stride))
    {
        let (x_lo, x_hi) = cx.split_at_mut(stride);
        let (y_lo, y_hi) = cy.split_at_mut(stride);
        for (((x0, x1), y0), y1) in x_lo
            .iter_mut()
            .zip(x_hi.iter_mut())
            .zip(y_lo.iter_mut())
            .zip(y_hi.iter_mut())
        {
            f(x0, x1, y0, y1);
        }
    }
}

#[inline(always)]
pub(crate) fn mat_vec<T: Real>(
    m: &Matrix2<T>,
    a: Complex<T>,
    b: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
}

pub(crate) fn apply_matrix<T: Real>(amps: &mut [Complex<T>], stride: usize, m: &Matrix2<T>) {
    for_each_pair(amps, stride, |a, b| {
        let (x, y) = mat_vec(m, *a, *b);
        *a = x;
        *b = y;
    });
}

pub(crate) fn apply_diagonal<T: Real>(
    amps: &mut [Complex<T>],
    stride: usize,
    d0: Complex<T>,
    d1: Complex<T>,
) {
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= d0);
        hi.iter_mut().for_each(|a| *a *= d1);
    }
}

/// Applies `m` to `target` only where `control` is set.
pub(crate) fn apply_controlled_matrix<T: Real>(
    amps: &mut [Complex<T>],
    control: usize,
    target: usize,
    m: &Matrix2<T>,
) {
    for i in 0..amps.len() {
        if i & control != 0 && i & target == 0 {
            let j = i | target;
            let (x, y) = mat_vec(m, amps[i], amps[j]);
            amps[i] = x;
            amps[j] = y;
        }
    }
}

/// Product of CZ gates, each given by the mask of its two qubit bits.
pub(crate) fn apply_cz_layer<T: Real>(amps: &mut [Complex<T>], masks: &[usize]) {
    for (i, amp) in amps.iter_mut().enumerate() {
        let odd = masks.iter().fold(false, |odd, &m| odd ^ (i & m == m));
        if odd {
            *amp = -*amp;
        }
    }
}

pub(crate) fn apply_cz<T: Real>(amps: &mut [Complex<T>], a: usize, b: usize) {
    let mask = a | b;
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

pub(crate) fn mat_mul<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub(crate) fn dagger<T: Real>(m: &Matrix2<T>) -> Matrix2<T> {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}
