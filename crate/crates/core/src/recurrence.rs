//! Orthonormal-polynomial evaluation, generic boundary-value solutions,
//! transfer matrices, reproducing (CD) kernels, and the rotation-angle
//! branch, all driven by a [`JacobiParams`] coefficient set.
//!
//! Conventions:
//! - orthonormal recurrence: x p_k = a_{k+1} p_{k+1} + b_{k+1} p_k + a_k p_{k-1},
//!   with p_0 = 1, p_{-1} = 0, a_0 = 1;
//! - solutions u(E, theta): a_n u_{n+1} + (b_n - E) u_n + a_{n-1} u_{n-1} = 0
//!   for n >= 1, seeded by u_0 = sin(theta), u_1 = cos(theta), so that
//!   theta = 0 gives u_n = p_{n-1}(E);
//! - the one-step matrix sends (u_n, u_{n-1}) to (u_{n+1}, u_n); the
//!   transfer matrix is the ordered product of steps 1..n and maps
//!   (u_1, u_0) to (u_{n+1}, u_n).
//!
//! Deep in the exponential-growth regime plain `f64` overflows around step
//! 1000; every routine here either carries mantissa/exponent pairs
//! ([`Scaled`]) or reports an overflow error that points at the scaled
//! variant.

use crate::error::{Error, Result};
use crate::models::JacobiParams;
use crate::scalar::{cast, pi, Real};
use crate::scaled::Scaled;

/// Rescale trigger for running recurrences: mantissas are folded back into
/// a safe band whenever they pass 2^400 (or drop below 2^-400), far enough
/// from f64's limits that squares of entries stay finite.
const RESCALE_EXP: i64 = 400;

fn rescale_threshold<R: Real>() -> R {
    cast::<R>(2.0).powi(RESCALE_EXP as i32)
}

/// Values p_0(x)..p_n(x) of the orthonormal polynomials in plain arithmetic.
///
/// Errors with [`Error::Overflow`] once values leave f64 range; callers that
/// need deep off-spectrum evaluations should use
/// [`eval_orthonormal_scaled`].
pub fn eval_orthonormal<R: Real>(params: &JacobiParams<R>, n: u32, x: R) -> Result<Vec<R>> {
    params.validate(n)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut prev = R::zero(); // p_{-1}
    let mut cur = R::one(); // p_0
    out.push(cur);
    for k in 0..n {
        let next = ((x - params.b(k + 1)) * cur - params.a(k) * prev) / params.a(k + 1);
        if !next.is_finite() {
            return Err(Error::Overflow(format!(
                "p_{}({x}) left floating-point range; use the log-scaled evaluation",
                k + 1
            )));
        }
        out.push(next);
        prev = cur;
        cur = next;
    }
    Ok(out)
}

/// Values p_0(x)..p_n(x) in mantissa/exponent form; immune to overflow.
pub fn eval_orthonormal_scaled<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    x: R,
) -> Result<Vec<Scaled<R>>> {
    let (p, _) = orthonormal_seq(params, n, x, false)?;
    Ok(p)
}

/// p_0..p_n and their x-derivatives, in mantissa/exponent form.
pub fn eval_orthonormal_with_derivative<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    x: R,
) -> Result<(Vec<Scaled<R>>, Vec<Scaled<R>>)> {
    let (p, d) = orthonormal_seq(params, n, x, true)?;
    Ok((p, d.expect("derivative requested")))
}

/// Shared core: runs the three-term recurrence with a common running
/// exponent so the polynomial and derivative sequences stay consistent
/// across rescales (the derivative recurrence feeds on the polynomial one).
fn orthonormal_seq<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    x: R,
    with_deriv: bool,
) -> Result<(Vec<Scaled<R>>, Option<Vec<Scaled<R>>>)> {
    params.validate(n)?;
    let hi = rescale_threshold::<R>();
    let lo = hi.recip();
    let mut shift: i64 = 0;
    let (mut p_prev, mut p_cur) = (R::zero(), R::one());
    let (mut d_prev, mut d_cur) = (R::zero(), R::zero());
    let mut p_out = Vec::with_capacity(n as usize + 1);
    let mut d_out = if with_deriv { Some(Vec::with_capacity(n as usize + 1)) } else { None };
    p_out.push(Scaled::from_parts(p_cur, 0));
    if let Some(d) = d_out.as_mut() {
        d.push(Scaled::from_parts(d_cur, 0));
    }
    for k in 0..n {
        let (ak, ak1, bk1) = (params.a(k), params.a(k + 1), params.b(k + 1));
        let p_next = ((x - bk1) * p_cur - ak * p_prev) / ak1;
        let d_next = ((x - bk1) * d_cur - ak * d_prev + p_cur) / ak1;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
        let mag = p_cur
            .abs()
            .max(p_prev.abs())
            .max(if with_deriv { d_cur.abs().max(d_prev.abs()) } else { R::zero() });
        if mag > hi || (mag > R::zero() && mag < lo) {
            let e = mag.abs().log2().floor().to_i64().unwrap_or(0);
            let c = cast::<R>(2.0).powi(-e as i32);
            p_prev *= c;
            p_cur *= c;
            d_prev *= c;
            d_cur *= c;
            shift += e;
        }
        p_out.push(Scaled::from_parts(p_cur, shift));
        if let Some(d) = d_out.as_mut() {
            d.push(Scaled::from_parts(d_cur, shift));
        }
    }
    Ok((p_out, d_out))
}

/// A solution of the coefficient recurrence with boundary angle `theta`.
#[derive(Debug, Clone)]
pub struct SolutionTrace<R: Real> {
    /// u_0..u_N, as mantissas when `logscale` is present.
    pub values: Vec<R>,
    /// Per-index base-2 exponents applied to keep the recurrence in range;
    /// `None` when no rescaling occurred.
    pub logscale: Option<Vec<i64>>,
    /// Boundary angle in [0, pi): u_0 = sin(theta), u_1 = cos(theta).
    pub theta: R,
    /// Energy the recurrence was driven at.
    pub energy: R,
}

impl<R: Real> SolutionTrace<R> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// u_i in mantissa/exponent form.
    pub fn scaled(&self, i: usize) -> Scaled<R> {
        match &self.logscale {
            Some(logs) => Scaled::from_parts(self.values[i], logs[i]),
            None => Scaled::from_parts(self.values[i], 0),
        }
    }

    /// u_i unscaled; saturates to +/- infinity outside f64 range.
    pub fn value(&self, i: usize) -> R {
        self.scaled(i).to_real()
    }

    /// Euclidean norm of (u_1, ..., u_L) in mantissa/exponent form.
    pub fn norm_over(&self, l: usize) -> Scaled<R> {
        let mut acc = Scaled::zero();
        for i in 1..=l {
            acc = acc.add(self.scaled(i).square());
        }
        acc.sqrt()
    }
}

/// Solution u_0..u_N for boundary angle theta at energy E.
pub fn eval_solution<R: Real>(
    params: &JacobiParams<R>,
    theta: R,
    energy: R,
    n_len: u32,
) -> Result<SolutionTrace<R>> {
    if !(theta >= R::zero() && theta < pi::<R>()) {
        return Err(Error::Precondition(format!("boundary angle {theta} outside [0, pi)")));
    }
    if n_len >= 2 {
        params.validate(n_len - 1)?;
    }
    let hi = rescale_threshold::<R>();
    let lo = hi.recip();
    let mut values = Vec::with_capacity(n_len as usize + 1);
    let mut logs = Vec::with_capacity(n_len as usize + 1);
    let mut rescaled = false;
    let mut shift: i64 = 0;
    let mut prev = theta.sin();
    let mut cur = theta.cos();
    values.push(prev);
    logs.push(0);
    if n_len >= 1 {
        values.push(cur);
        logs.push(0);
    }
    for k in 1..n_len {
        // a_k u_{k+1} + (b_k - E) u_k + a_{k-1} u_{k-1} = 0
        let next = ((energy - params.b(k)) * cur - params.a(k - 1) * prev) / params.a(k);
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > hi || (mag > R::zero() && mag < lo) {
            let e = mag.log2().floor().to_i64().unwrap_or(0);
            let c = cast::<R>(2.0).powi(-e as i32);
            prev *= c;
            cur *= c;
            shift += e;
            rescaled = true;
        }
        values.push(cur);
        logs.push(shift);
    }
    Ok(SolutionTrace {
        values,
        logscale: if rescaled { Some(logs) } else { None },
        theta,
        energy,
    })
}

/// Largest relative three-term residual of a trace: at each interior index
/// the recurrence combination is compared against the magnitude of its
/// largest term.
pub fn three_term_residual<R: Real>(params: &JacobiParams<R>, trace: &SolutionTrace<R>) -> R {
    let mut worst = R::zero();
    let e = trace.energy;
    for k in 1..trace.len().saturating_sub(1) {
        let (a_m, a_k, b_k) = (params.a(k as u32 - 1), params.a(k as u32), params.b(k as u32));
        let t1 = trace.scaled(k + 1).mul_real(a_k);
        let t2 = trace.scaled(k).mul_real(b_k - e);
        let t3 = trace.scaled(k - 1).mul_real(a_m);
        let residual = t1.add(t2).add(t3).abs();
        let scale = t1.abs().max_value(t2.abs()).max_value(t3.abs());
        if scale.is_zero() {
            continue;
        }
        let rel = residual.mul(scale.recip()).to_real();
        worst = worst.max(rel);
    }
    worst
}

/// Product of one-step recurrence matrices, stored as a mantissa matrix with
/// a shared base-2 exponent.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix<R: Real> {
    /// Row-major mantissas; the true matrix is `entries * 2^exp2`.
    pub entries: [[R; 2]; 2],
    pub exp2: i64,
    /// Step count: the matrix maps (u_1, u_0) to (u_{n+1}, u_n).
    pub n: u32,
    pub energy: R,
}

impl<R: Real> TransferMatrix<R> {
    /// Determinant as a scaled value; equals prod a_{j-1}/a_j = 1/a_n.
    pub fn det(&self) -> Scaled<R> {
        let m = &self.entries;
        Scaled::from_parts(m[0][0] * m[1][1] - m[0][1] * m[1][0], 2 * self.exp2)
    }

    /// Trace as a scaled value.
    pub fn trace(&self) -> Scaled<R> {
        Scaled::from_parts(self.entries[0][0] + self.entries[1][1], self.exp2)
    }

    /// Largest singular value as a scaled value.
    pub fn norm(&self) -> Scaled<R> {
        let m = &self.entries;
        // Factor out the largest entry before forming the singular-value
        // expression: mantissas may sit near the rescale threshold, where
        // their fourth powers would overflow.
        let g = m.iter().flatten().fold(R::zero(), |acc, &v| acc.max(v.abs()));
        if g == R::zero() {
            return Scaled::zero();
        }
        let s = |v: R| v / g;
        let (e00, e01, e10, e11) = (s(m[0][0]), s(m[0][1]), s(m[1][0]), s(m[1][1]));
        let f2 = e00 * e00 + e01 * e01 + e10 * e10 + e11 * e11;
        let det = e00 * e11 - e01 * e10;
        let disc = (f2 * f2 - cast::<R>(4.0) * det * det).max(R::zero());
        let sigma2 = (f2 + disc.sqrt()) * cast::<R>(0.5);
        Scaled::from_parts(sigma2.sqrt() * g, self.exp2)
    }

    /// Apply to initial data (u_1, u_0), returning (u_{n+1}, u_n) scaled.
    pub fn apply(&self, u1: R, u0: R) -> (Scaled<R>, Scaled<R>) {
        let m = &self.entries;
        (
            Scaled::from_parts(m[0][0] * u1 + m[0][1] * u0, self.exp2),
            Scaled::from_parts(m[1][0] * u1 + m[1][1] * u0, self.exp2),
        )
    }

    /// Entries as plain reals; `None` if they exceed floating-point range.
    pub fn entries_real(&self) -> Option<[[R; 2]; 2]> {
        let f = cast::<R>(2.0).powi(self.exp2.clamp(-1100, 1100) as i32);
        let mut out = [[R::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let v = self.entries[i][j] * f;
                if !v.is_finite() {
                    return None;
                }
                out[i][j] = v;
            }
        }
        Some(out)
    }
}

/// Transfer matrix over steps 1..n at energy E.
pub fn transfer<R: Real>(params: &JacobiParams<R>, n: u32, energy: R) -> Result<TransferMatrix<R>> {
    let seq = transfer_sequence(params, n, energy)?;
    Ok(*seq.last().expect("n >= 1 guarantees at least one step"))
}

/// All prefixes T(1,E)..T(n,E) in one sweep (O(n) work).
pub fn transfer_sequence<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    energy: R,
) -> Result<Vec<TransferMatrix<R>>> {
    if n < 1 {
        return Err(Error::Precondition("transfer matrix needs n >= 1".into()));
    }
    params.validate(n)?;
    let hi = rescale_threshold::<R>();
    let mut m = [[R::one(), R::zero()], [R::zero(), R::one()]];
    let mut exp2: i64 = 0;
    let mut out = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let (aj, aj_m, bj) = (params.a(j), params.a(j - 1), params.b(j));
        // one-step matrix ((E-b_j)/a_j, -a_{j-1}/a_j; 1, 0) applied on the left
        let r0 = [(energy - bj) / aj, -aj_m / aj];
        let new = [
            [r0[0] * m[0][0] + r0[1] * m[1][0], r0[0] * m[0][1] + r0[1] * m[1][1]],
            [m[0][0], m[0][1]],
        ];
        m = new;
        let mag = m
            .iter()
            .flatten()
            .fold(R::zero(), |acc, &v| acc.max(v.abs()));
        if mag > hi {
            let e = mag.log2().floor().to_i64().unwrap_or(0);
            let c = cast::<R>(2.0).powi(-e as i32);
            for row in m.iter_mut() {
                for v in row.iter_mut() {
                    *v *= c;
                }
            }
            exp2 += e;
        }
        out.push(TransferMatrix { entries: m, exp2, n: j, energy });
    }
    Ok(out)
}

/// Discrete Wronskian a_n (f_{n+1} g_n - f_n g_{n+1}); constant in n when
/// both traces solve the recurrence at the same energy.
pub fn wronskian<R: Real>(
    params: &JacobiParams<R>,
    f: &SolutionTrace<R>,
    g: &SolutionTrace<R>,
    n: usize,
) -> R {
    let a = params.a(n as u32);
    f.scaled(n + 1)
        .mul(g.scaled(n))
        .sub(f.scaled(n).mul(g.scaled(n + 1)))
        .mul_real(a)
        .to_real()
}

/// Evaluation strategy for the reproducing kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdMethod {
    /// Direct sum over p_j(x) p_j(y), j = 0..n. The reference method.
    Sum,
    /// Christoffel-Darboux closed form through degree n+1; switches to the
    /// confluent (derivative) form when x and y nearly coincide. Used for
    /// cross-validation.
    Formula,
}

/// Reproducing kernel K_n(x, y) = sum_{j=0}^n p_j(x) p_j(y).
pub fn cd_kernel<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    x: R,
    y: R,
    method: CdMethod,
) -> Result<R> {
    Ok(cd_kernel_scaled(params, n, x, y, method)?.to_real())
}

/// [`cd_kernel`] in mantissa/exponent form for off-spectrum arguments.
pub fn cd_kernel_scaled<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    x: R,
    y: R,
    method: CdMethod,
) -> Result<Scaled<R>> {
    match method {
        CdMethod::Sum => {
            let px = eval_orthonormal_scaled(params, n, x)?;
            let py = if x == y { px.clone() } else { eval_orthonormal_scaled(params, n, y)? };
            let mut acc = Scaled::zero();
            for j in 0..=n as usize {
                acc = acc.add(px[j].mul(py[j]));
            }
            Ok(acc)
        }
        CdMethod::Formula => {
            let scale = R::one().max(x.abs()).max(y.abs());
            let a = params.a(n + 1);
            if (x - y).abs() < cast::<R>(1e-8) * scale {
                let mid = (x + y) * cast::<R>(0.5);
                let (p, d) = eval_orthonormal_with_derivative(params, n + 1, mid)?;
                let np = n as usize;
                // confluent limit: a_{n+1} (p'_{n+1} p_n - p'_n p_{n+1})
                Ok(d[np + 1].mul(p[np]).sub(d[np].mul(p[np + 1])).mul_real(a))
            } else {
                let px = eval_orthonormal_scaled(params, n + 1, x)?;
                let py = eval_orthonormal_scaled(params, n + 1, y)?;
                let np = n as usize;
                let num = px[np + 1].mul(py[np]).sub(px[np].mul(py[np + 1])).mul_real(a);
                Ok(num.mul_real((x - y).recip()))
            }
        }
    }
}

/// Interval certain to contain every eigenvalue of the order-n truncation
/// (union of Gershgorin discs of the tridiagonal matrix).
pub fn gershgorin_bracket<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<(R, R)> {
    params.validate(n)?;
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for j in 1..=n {
        let b = params.b(j);
        let mut radius = R::zero();
        if j > 1 {
            radius += params.a(j - 1);
        }
        if j < n {
            radius += params.a(j);
        }
        lo = lo.min(b - radius);
        hi = hi.max(b + radius);
    }
    Ok((lo, hi))
}

/// Continuous rotation-angle branch theta_n along an energy grid.
///
/// tan(theta_n(E)) = p_n(E)/p_{n-1}(E), theta_n is strictly increasing in E,
/// and the branch is anchored to the arctan value in (-pi/2, 0) below the
/// eigenvalue bracket. theta_n hits k*pi exactly at the (k+1)-th zero of p_n.
#[derive(Debug, Clone)]
pub struct PruferBranch<R: Real> {
    pub grid: Vec<R>,
    pub theta: Vec<R>,
    pub n: u32,
}

/// Angle of (p_{n-1}, p_n) reduced mod pi into [0, pi).
fn projective_angle<R: Real>(p_nm1: Scaled<R>, p_n: Scaled<R>) -> R {
    let e = p_nm1.exp2().max(p_n.exp2());
    let shift = |s: Scaled<R>| {
        let d = (s.exp2() - e).clamp(-1100, 0);
        s.mantissa() * cast::<R>(2.0).powi(d as i32)
    };
    let phi = shift(p_n).atan2(shift(p_nm1));
    let phi = if phi < R::zero() { phi + pi::<R>() } else { phi };
    // atan2 can return exactly pi for (negative, +0) inputs
    if phi >= pi::<R>() {
        phi - pi::<R>()
    } else {
        phi
    }
}

/// Branch-correct rotation angle at a single energy.
///
/// The multiple-of-pi offset comes from the zero count of p_n below E, read
/// off the sign changes of the orthonormal sequence itself; the fractional
/// part is the projective angle of (p_{n-1}, p_n). Both come from the same
/// evaluation, so they stay consistent even when E sits within rounding
/// distance of a zero: if p_n(E) rounds positive the count includes that
/// zero and the angle is a hair above k*pi, if it rounds negative the count
/// excludes it and the angle is a hair below — either way the branch value
/// is correct to the evaluation's own accuracy.
pub fn prufer_theta<R: Real>(params: &JacobiParams<R>, n: u32, e: R) -> Result<R> {
    if n < 1 {
        return Err(Error::Precondition("rotation angle needs degree n >= 1".into()));
    }
    let p = eval_orthonormal_scaled(params, n, e)?;
    // Sign changes in (p_0, ..., p_n) count the zeros of p_n above E; exact
    // zeros keep the previous sign, which makes the count inclusive below.
    let mut changes = 0u32;
    let mut prev_positive = true; // p_0 = 1
    for s in p.iter().skip(1) {
        let m = s.mantissa();
        if m != R::zero() {
            let positive = m > R::zero();
            if positive != prev_positive {
                changes += 1;
            }
            prev_positive = positive;
        }
    }
    let below = n - changes;
    let phi = projective_angle(p[n as usize - 1], p[n as usize]);
    Ok(cast::<R>(below as f64 - 1.0) * pi::<R>() + phi)
}

/// Continuous branch of the rotation angle over `grid` (strictly
/// increasing energies).
pub fn prufer_branch<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    grid: &[R],
) -> Result<PruferBranch<R>> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty energy grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("energy grid must be strictly increasing".into()));
    }
    let mut theta = Vec::with_capacity(grid.len());
    for &e in grid {
        let mut t = prufer_theta(params, n, e)?;
        // Monotonicity can only be violated by sub-ulp jitter at razor-edge
        // energies; clamp rather than report a false decrease.
        if let Some(&prev) = theta.last() {
            t = t.max(prev);
        }
        theta.push(t);
    }
    Ok(PruferBranch { grid: grid.to_vec(), theta, n })
}

/// Derivative of the rotation angle:
/// d theta_n / dE = sum_{j<n} p_j(E)^2 / (a_n (p_{n-1}^2 + p_n^2)).
pub fn prufer_derivative<R: Real>(params: &JacobiParams<R>, n: u32, e: R) -> Result<R> {
    if n < 1 {
        return Err(Error::Precondition("rotation angle needs degree n >= 1".into()));
    }
    let p = eval_orthonormal_scaled(params, n, e)?;
    let mut num = Scaled::zero();
    for j in 0..n as usize {
        num = num.add(p[j].square());
    }
    let den = p[n as usize - 1]
        .square()
        .add(p[n as usize].square())
        .mul_real(params.a(n));
    Ok(num.mul(den.recip()).to_real())
}
