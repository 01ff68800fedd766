//! The unit-circle side of the zero machinery. Reflection coefficients
//! drive a two-term recursion for the orthonormal circle polynomials;
//! combining the top polynomial with a unimodular boundary parameter
//! produces a polynomial whose zeros all sit on the circle. Because the
//! ratio of the polynomial to its reversed partner winds monotonically,
//! every zero is a level crossing of one continuous increasing phase, and
//! that is how this module finds them: unwrap the phase once, then bisect
//! each level set.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::VerblunskyParams;
use crate::scalar::{cast, pi, Real};

/// Values of the degree-`n` orthonormal circle polynomial and its reversed
/// polynomial at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzegoPair<R: Real> {
    pub phi: Complex<R>,
    pub phistar: Complex<R>,
    pub n: u32,
    pub z: Complex<R>,
}

/// Zeros of a paraorthogonal polynomial. All of them lie on the unit
/// circle, so the set is stored as angles.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "R: Serialize"))]
pub struct CircleZeroSet<R: Real> {
    pub n: u32,
    /// The unimodular boundary parameter the zeros belong to.
    pub beta: Complex<R>,
    /// Strictly increasing zero angles in `[0, 2*pi)`.
    pub angles: Vec<R>,
}

impl<R: Real> CircleZeroSet<R> {
    /// Checks the structural invariants: exactly `n` angles, strictly
    /// increasing, each inside `[0, 2*pi)`.
    pub fn validate(&self) -> Result<()> {
        if self.angles.len() != self.n as usize {
            return Err(Error::Precondition(format!(
                "zero set holds {} angles for degree {}",
                self.angles.len(),
                self.n
            )));
        }
        let two_pi = cast::<R>(2.0) * pi::<R>();
        for (i, &t) in self.angles.iter().enumerate() {
            if !t.is_finite() || t < R::zero() || t >= two_pi {
                return Err(Error::Precondition(format!(
                    "angle #{i} = {t} leaves [0, 2*pi)"
                )));
            }
            if i > 0 && !(self.angles[i - 1] < t) {
                return Err(Error::Precondition(format!(
                    "angles #{} and #{i} are out of order",
                    i - 1
                )));
            }
        }
        Ok(())
    }

    /// Serializes as `index,angle,cos,sin` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,angle,cos,sin\n");
        for (i, &t) in self.angles.iter().enumerate() {
            out.push_str(&format!("{i},{t:.16e},{:.16e},{:.16e}\n", t.cos(), t.sin()));
        }
        out
    }
}

/// Continuous unwrapped branch of the circle phase over a refined grid.
///
/// `thetas` contains the caller's grid plus any midpoints inserted while
/// unwrapping; both arrays are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBranch<R: Real> {
    pub thetas: Vec<R>,
    pub etas: Vec<R>,
}

impl<R: Real> PhaseBranch<R> {
    /// Total increase of the branch across the stored grid, in full turns.
    pub fn winding_turns(&self) -> i64 {
        let two_pi = cast::<R>(2.0) * pi::<R>();
        let span = *self.etas.last().expect("branch is never empty") - self.etas[0];
        (span / two_pi).round().to_f64().expect("finite turn count") as i64
    }

    /// Branch value at a stored grid angle, if `theta` is one bit-for-bit.
    pub fn value_at(&self, theta: R) -> Option<R> {
        self.thetas
            .binary_search_by(|t| t.partial_cmp(&theta).expect("grid angles are ordered"))
            .ok()
            .map(|i| self.etas[i])
    }
}

fn require_unimodular<R: Real>(beta: Complex<R>) -> Result<()> {
    if (beta.norm() - R::one()).abs() > cast(1e-12) {
        return Err(Error::Precondition(format!(
            "|beta| = {} but the boundary parameter must have modulus 1",
            beta.norm()
        )));
    }
    Ok(())
}

fn require_positive_degree(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("degree must be at least 1".into()));
    }
    Ok(())
}

/// One step of the coefficient recursion, shared by every walker here.
#[inline]
fn szego_step<R: Real>(
    phi: Complex<R>,
    phistar: Complex<R>,
    alpha_k: Complex<R>,
    z: Complex<R>,
) -> (Complex<R>, Complex<R>) {
    let rho = (R::one() - alpha_k.norm_sqr()).sqrt();
    let zp = z * phi;
    ((zp - alpha_k.conj() * phistar) / rho, (phistar - alpha_k * zp) / rho)
}

/// Runs the recursion up to degree `n` and returns the pair of values.
///
/// Requires `|z| <= 1 + 1e-12`: the modulus balance between the two
/// polynomials, and everything built on it, lives on the closed disk.
pub fn szego_recursion<R: Real>(
    alpha: &VerblunskyParams<R>,
    n: u32,
    z: Complex<R>,
) -> Result<SzegoPair<R>> {
    if z.norm() > R::one() + cast(1e-12) {
        return Err(Error::Precondition(format!(
            "|z| = {} lies outside the closed unit disk",
            z.norm()
        )));
    }
    if n >= 1 {
        alpha.validate(n - 1)?;
    }
    let mut phi = Complex::new(R::one(), R::zero());
    let mut phistar = phi;
    for k in 0..n {
        let (p, ps) = szego_step(phi, phistar, alpha.alpha(k), z);
        phi = p;
        phistar = ps;
    }
    Ok(SzegoPair { phi, phistar, n, z })
}

/// Degree-`n` paraorthogonal polynomial `z*phi_{n-1}(z) - conj(beta)*phistar_{n-1}(z)`.
pub fn popuc_eval<R: Real>(
    alpha: &VerblunskyParams<R>,
    beta: Complex<R>,
    n: u32,
    z: Complex<R>,
) -> Result<Complex<R>> {
    require_unimodular(beta)?;
    require_positive_degree(n)?;
    let pair = szego_recursion(alpha, n - 1, z)?;
    Ok(z * pair.phi - beta.conj() * pair.phistar)
}

/// How often the ratio walker rescales by `|phistar|`. The reversed
/// polynomial never vanishes on the closed disk, so the scale is always
/// available, and dividing both values by it leaves the ratio — hence the
/// phase and the zeros — untouched.
const RENORM_STRIDE: u32 = 64;

/// Recursion to degree `m` keeping only the (renormalized) value pair.
fn ratio_pair<R: Real>(
    alpha: &VerblunskyParams<R>,
    m: u32,
    z: Complex<R>,
) -> (Complex<R>, Complex<R>) {
    let mut phi = Complex::new(R::one(), R::zero());
    let mut phistar = phi;
    for k in 0..m {
        let (p, ps) = szego_step(phi, phistar, alpha.alpha(k), z);
        phi = p;
        phistar = ps;
        if k % RENORM_STRIDE == RENORM_STRIDE - 1 {
            let s = phistar.norm();
            phi = phi / s;
            phistar = phistar / s;
        }
    }
    (phi, phistar)
}

/// Principal value of the phase `arg(z * phi_{n-1}(z) / phistar_{n-1}(z))`
/// at `z = e^{i theta}`, in `(-pi, pi]`.
fn phase_point<R: Real>(alpha: &VerblunskyParams<R>, n: u32, theta: R) -> R {
    let z = Complex::from_polar(R::one(), theta);
    let (phi, phistar) = ratio_pair(alpha, n - 1, z);
    (z * phi * phistar.conj()).arg()
}

/// Maps a phase difference into `(-pi, pi]`.
fn centered_mod<R: Real>(x: R) -> R {
    let two_pi = cast::<R>(2.0) * pi::<R>();
    let mut y = x % two_pi;
    if y > pi() {
        y = y - two_pi;
    } else if y <= -pi::<R>() {
        y = y + two_pi;
    }
    y
}

/// Largest wrapped increment accepted per unwrapping step. Steps above the
/// cap are bisected, so a jump can never be mistaken for its complement
/// modulo a full turn unless the phase moves by almost 2*pi across one
/// refined subinterval.
const STEP_CAP_DEPTH: u32 = 48;

/// Continuous increasing branch of the circle phase on `theta_grid`.
///
/// The grid must be strictly increasing inside `[0, 2*pi]`. The branch is
/// anchored at the principal value on the first grid point and unwrapped
/// left to right, bisecting any step whose wrapped increment leaves
/// `[0, pi/2]`. Across a full circle the branch rises by exactly `2*pi*n`
/// — one full turn per zero of the degree-`n` paraorthogonal polynomial,
/// whatever the boundary parameter.
///
/// Refinement reacts to observed increments, so a spike that completes a
/// whole extra turn strictly inside one grid interval wraps back to a
/// small innocent-looking step and stays invisible. Callers that rely on
/// the total winding must verify it and rerun on a denser grid, which is
/// exactly what the zero finder does.
pub fn eta_phase<R: Real>(
    alpha: &VerblunskyParams<R>,
    n: u32,
    theta_grid: &[R],
) -> Result<PhaseBranch<R>> {
    require_positive_degree(n)?;
    if n >= 2 {
        alpha.validate(n - 2)?;
    }
    if theta_grid.len() < 2 {
        return Err(Error::Precondition("phase grid needs at least two angles".into()));
    }
    let two_pi = cast::<R>(2.0) * pi::<R>();
    let slack = cast::<R>(1e-12);
    for (i, &t) in theta_grid.iter().enumerate() {
        if !t.is_finite() || t < -slack || t > two_pi + slack {
            return Err(Error::Precondition(format!("grid angle #{i} = {t} leaves [0, 2*pi]")));
        }
        if i > 0 && !(theta_grid[i - 1] < t) {
            return Err(Error::Precondition(format!(
                "grid angles #{} and #{i} are out of order",
                i - 1
            )));
        }
    }

    let cap = pi::<R>() / cast(2.0);
    let mut thetas = vec![theta_grid[0]];
    let mut wrapped = vec![phase_point(alpha, n, theta_grid[0])];
    let mut etas = vec![wrapped[0]];
    for &next in &theta_grid[1..] {
        unwrap_step(alpha, n, next, cap, 0, &mut thetas, &mut wrapped, &mut etas)?;
    }
    Ok(PhaseBranch { thetas, etas })
}

/// Below this subinterval width a step is taken as is: the phase can hold
/// genuine near-jumps (a slowly decaying non-summable coefficient sequence
/// concentrates a half turn in a layer of width `exp(-c*sqrt(n))` around
/// angle zero) and no bisection at double precision resolves them.
const WIDTH_FLOOR: f64 = 1e-14;

/// Extends the branch from its current endpoint to `next`, bisecting while
/// the wrapped increment falls outside `[0, cap]`. An increment across a
/// subinterval too narrow to split keeps its smallest consistent
/// nonnegative value — the phase only moves forward — and any full turns
/// hidden inside it are caught later by the winding check.
fn unwrap_step<R: Real>(
    alpha: &VerblunskyParams<R>,
    n: u32,
    next: R,
    cap: R,
    depth: u32,
    thetas: &mut Vec<R>,
    wrapped: &mut Vec<R>,
    etas: &mut Vec<R>,
) -> Result<()> {
    let w_next = phase_point(alpha, n, next);
    let dw = centered_mod(w_next - *wrapped.last().expect("branch is never empty"));
    let prev = *thetas.last().expect("branch is never empty");
    let accepted = if dw >= R::zero() && dw <= cap {
        Some(dw)
    } else if next - prev <= cast(WIDTH_FLOOR) {
        if dw > -cast::<R>(1e-10) && dw < R::zero() {
            Some(R::zero())
        } else if dw < R::zero() {
            Some(dw + cast::<R>(2.0) * pi())
        } else {
            Some(dw)
        }
    } else {
        None
    };
    if let Some(step) = accepted {
        thetas.push(next);
        wrapped.push(w_next);
        etas.push(*etas.last().expect("branch is never empty") + step);
        return Ok(());
    }
    if depth >= STEP_CAP_DEPTH {
        return Err(Error::RefinementCap(format!(
            "phase step into theta = {next} still moves by {dw} after {STEP_CAP_DEPTH} bisections"
        )));
    }
    let mid = (prev + next) / cast(2.0);
    if mid <= prev || mid >= next {
        return Err(Error::RefinementCap(format!(
            "phase step at theta = {next} cannot be split further"
        )));
    }
    unwrap_step(alpha, n, mid, cap, depth + 1, thetas, wrapped, etas)?;
    unwrap_step(alpha, n, next, cap, depth + 1, thetas, wrapped, etas)
}

/// Slope of the unwrapped phase: the partial sums of `|phi_j|^2` over
/// `j < n`, divided by `|phi_{n-1}|^2`. Always at least 1, which is what
/// makes the level-set zero search monotone.
pub fn eta_derivative<R: Real>(alpha: &VerblunskyParams<R>, n: u32, theta: R) -> Result<R> {
    require_positive_degree(n)?;
    if n >= 2 {
        alpha.validate(n - 2)?;
    }
    let z = Complex::from_polar(R::one(), theta);
    let mut phi = Complex::new(R::one(), R::zero());
    let mut phistar = phi;
    let mut sum = phi.norm_sqr();
    for k in 0..n - 1 {
        let (p, ps) = szego_step(phi, phistar, alpha.alpha(k), z);
        phi = p;
        phistar = ps;
        sum += phi.norm_sqr();
        if k % RENORM_STRIDE == RENORM_STRIDE - 1 {
            let s = phistar.norm_sqr();
            phi = phi / s.sqrt();
            phistar = phistar / s.sqrt();
            sum /= s;
        }
    }
    Ok(sum / phi.norm_sqr())
}

/// Reproducing-kernel sum `sum_{j<terms} conj(phi_j(z1)) * phi_j(z2)`
/// together with the scale `sum_{j<terms} |phi_j(z1)| * |phi_j(z2)|`.
///
/// At two distinct zeros of the degree-`terms` paraorthogonal polynomial
/// the sum vanishes, so `|sum| / scale` measures how orthogonal the two
/// evaluation vectors are.
pub fn cd_kernel_circle<R: Real>(
    alpha: &VerblunskyParams<R>,
    terms: u32,
    z1: Complex<R>,
    z2: Complex<R>,
) -> Result<(Complex<R>, R)> {
    require_positive_degree(terms)?;
    if terms >= 2 {
        alpha.validate(terms - 2)?;
    }
    let one = Complex::new(R::one(), R::zero());
    let (mut p1, mut ps1) = (one, one);
    let (mut p2, mut ps2) = (one, one);
    let mut sum = p1.conj() * p2;
    let mut scale = p1.norm() * p2.norm();
    for k in 0..terms - 1 {
        let a = alpha.alpha(k);
        let (q1, qs1) = szego_step(p1, ps1, a, z1);
        let (q2, qs2) = szego_step(p2, ps2, a, z2);
        p1 = q1;
        ps1 = qs1;
        p2 = q2;
        ps2 = qs2;
        sum = sum + p1.conj() * p2;
        scale += p1.norm() * p2.norm();
    }
    Ok((sum, scale))
}

/// Zeros of the degree-`n` paraorthogonal polynomial for boundary
/// parameter `beta`, each angle localized to the last bit by bisection.
///
/// A zero happens exactly where the unwrapped phase crosses
/// `arg(conj(beta))` modulo `2*pi`; the level constant carries no extra
/// offset, which the closed form for vanishing reflection coefficients
/// (`z^n = conj(beta)`) pins down. The branch is unwrapped once over the
/// full circle, the winding is checked against `n`, and the `n` level
/// crossings are then bisected independently in parallel.
pub fn popuc_zeros<R: Real>(
    alpha: &VerblunskyParams<R>,
    beta: Complex<R>,
    n: u32,
) -> Result<CircleZeroSet<R>> {
    require_unimodular(beta)?;
    require_positive_degree(n)?;
    let two_pi = cast::<R>(2.0) * pi::<R>();

    let mut intervals = (8 * n).max(64);
    let branch = loop {
        let grid: Vec<R> = (0..=intervals)
            .map(|i| two_pi * cast::<R>(f64::from(i)) / cast(f64::from(intervals)))
            .collect();
        let branch = eta_phase(alpha, n, &grid)?;
        if branch.winding_turns() == i64::from(n) {
            break branch;
        }
        if intervals >= 64 * n.max(8) {
            return Err(Error::RefinementCap(format!(
                "phase winds {} full turns instead of {n}; the grid aliases a spike",
                branch.winding_turns()
            )));
        }
        intervals *= 4;
    };

    let level = beta.conj().arg();
    let slack = cast::<R>(1e-9);
    let k0 = ((branch.etas[0] - level) / two_pi - slack).ceil();
    let levels: Vec<R> = (0..n).map(|t| level + two_pi * (k0 + cast(f64::from(t)))).collect();

    let mut angles: Vec<R> = levels
        .par_iter()
        .map(|&y| {
            let theta = bisect_level(alpha, n, &branch, y);
            if theta >= two_pi {
                theta - two_pi
            } else {
                theta
            }
        })
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).expect("zero angles are finite"));

    let set = CircleZeroSet { n, beta, angles };
    set.validate()?;
    Ok(set)
}

/// Solves `eta(theta) = y` inside the bracketing subinterval of the
/// unwrapped branch. Within one refined step the phase moves by at most a
/// quarter turn, so the wrapped increment from the left endpoint is the
/// true increment and plain bisection applies.
fn bisect_level<R: Real>(alpha: &VerblunskyParams<R>, n: u32, branch: &PhaseBranch<R>, y: R) -> R {
    let etas = &branch.etas;
    if y <= etas[0] {
        return branch.thetas[0];
    }
    if y >= *etas.last().expect("branch is never empty") {
        return *branch.thetas.last().expect("branch is never empty");
    }
    let hi_idx = etas.partition_point(|&e| e <= y);
    let lo_idx = hi_idx - 1;
    let target = y - etas[lo_idx];
    let w_lo = phase_point(alpha, n, branch.thetas[lo_idx]);
    let mut lo = branch.thetas[lo_idx];
    let mut hi = branch.thetas[hi_idx];
    loop {
        let mid = (lo + hi) / cast(2.0);
        if mid <= lo || mid >= hi {
            return lo;
        }
        let g = centered_mod(phase_point(alpha, n, mid) - w_lo);
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Largest deviation `|n * gap - 2*pi|` over successive zeros inside an
/// arc. The arc `(lo, hi)` is traversed counterclockwise from `lo`; when
/// `lo >= hi` it wraps through angle zero, and equal endpoints mean the
/// whole circle, in which case the closing gap back to the first zero is
/// included.
pub fn circle_clock_deviation<R: Real>(zeros: &CircleZeroSet<R>, arc: (R, R)) -> Result<R> {
    zeros.validate()?;
    let two_pi = cast::<R>(2.0) * pi::<R>();
    let (lo, hi) = arc;
    let slack = cast::<R>(1e-12);
    for t in [lo, hi] {
        if !t.is_finite() || t < -slack || t > two_pi + slack {
            return Err(Error::Precondition(format!("arc endpoint {t} leaves [0, 2*pi]")));
        }
    }

    let mut ordered: Vec<R> = Vec::new();
    if lo < hi {
        ordered.extend(zeros.angles.iter().copied().filter(|&t| t >= lo && t <= hi));
    } else {
        ordered.extend(zeros.angles.iter().copied().filter(|&t| t >= lo));
        ordered.extend(
            zeros.angles.iter().copied().filter(|&t| t <= hi && t < lo).map(|t| t + two_pi),
        );
        if lo == hi {
            if let Some(&first) = ordered.first() {
                ordered.push(first + two_pi);
            }
        }
    }
    if ordered.len() < 2 {
        return Err(Error::Precondition(format!(
            "arc holds {} zeros; need at least two for a gap",
            ordered.len()
        )));
    }

    let scale = cast::<R>(f64::from(zeros.n));
    let mut worst = R::zero();
    for pair in ordered.windows(2) {
        let dev = (scale * (pair[1] - pair[0]) - two_pi).abs();
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}
