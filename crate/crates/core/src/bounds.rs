//! A priori floors and ceilings on zero locations and spacings.
//!
//! Every check here compares a guaranteed value against a quantity measured
//! on the actual zero set and reports both, together with a `satisfied`
//! flag that tolerates a fixed relative slack of 1e-12. A sweep over models
//! and truncation sizes then reduces to scanning flags.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::adaptive_simpson;
use crate::models::{periodize, JacobiParams};
use crate::recurrence::{
    cd_kernel_scaled, eval_orthonormal_scaled, eval_solution, gershgorin_bracket, CdMethod,
    SolutionTrace, TransferMatrix,
};
use crate::scalar::{cast, pi, Real};
use crate::scaled::Scaled;
use crate::spectra::{self, SlopeFit};

/// Relative slack granted when deciding whether an inequality holds, so a
/// few ulps of evaluation noise cannot flip a true statement to false.
const RELATIVE_SLACK: f64 = 1e-12;

/// Outcome of one inequality check.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "R: Serialize"))]
pub struct BoundReport<R: Real> {
    /// Which check produced the report.
    pub name: String,
    /// The guaranteed value (a floor or a ceiling, depending on the check).
    #[serde(rename = "bound")]
    pub bound_value: R,
    /// The quantity measured on the zero set.
    #[serde(rename = "observed")]
    pub observed_value: R,
    /// Whether the inequality holds within the relative slack.
    pub satisfied: bool,
    /// Auxiliary quantities that entered the check, keyed by name.
    pub context: BTreeMap<String, R>,
}

impl<R: Real> BoundReport<R> {
    fn floor(name: &str, bound: Scaled<R>, observed: Scaled<R>, context: BTreeMap<String, R>) -> Self {
        BoundReport {
            name: name.to_string(),
            bound_value: bound.to_real(),
            observed_value: observed.to_real(),
            satisfied: holds(observed, bound),
            context,
        }
    }

    fn ceiling(name: &str, bound: Scaled<R>, observed: Scaled<R>, context: BTreeMap<String, R>) -> Self {
        BoundReport {
            name: name.to_string(),
            bound_value: bound.to_real(),
            observed_value: observed.to_real(),
            satisfied: holds(bound, observed),
            context,
        }
    }
}

/// `greater >= lesser` within the relative slack, evaluated in scaled
/// arithmetic so saturating conversions cannot distort the comparison.
fn holds<R: Real>(greater: Scaled<R>, lesser: Scaled<R>) -> bool {
    let scale = greater.abs().max_value(lesser.abs()).max_value(Scaled::one());
    let margin = scale.mul_real(cast::<R>(-RELATIVE_SLACK));
    greater.sub(lesser).cmp_value(&margin) != Ordering::Less
}

fn context_map<R: Real>(entries: &[(&str, R)]) -> BTreeMap<String, R> {
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Positive scaled value with natural logarithm `ln_value`.
fn scaled_from_ln<R: Real>(ln_value: R) -> Scaled<R> {
    let ln2 = cast::<R>(std::f64::consts::LN_2);
    let shift = (ln_value / ln2).floor();
    let exp2 = shift.to_i64().expect("scaled exponent fits in i64");
    Scaled::from_parts((ln_value - cast::<R>(exp2 as f64) * ln2).exp(), exp2)
}

fn min_successive_gap<R: Real>(sorted: &[R]) -> R {
    sorted.windows(2).map(|w| w[1] - w[0]).fold(R::infinity(), |m, g| m.min(g))
}

fn max_successive_gap<R: Real>(sorted: &[R]) -> R {
    sorted.windows(2).map(|w| w[1] - w[0]).fold(R::zero(), |m, g| m.max(g))
}

/// Mean of ln a_j over j = 1..=n; exp of it is the geometric mean.
fn mean_log_offdiag<R: Real>(params: &JacobiParams<R>, n: u32) -> R {
    let mut acc = R::zero();
    for j in 1..=n {
        acc += params.a(j).ln();
    }
    acc / cast::<R>(n as f64)
}

/// Size data for the coupling operator built from the two boundary
/// solutions at one energy: the lower-triangular matrix with entries
/// K(n, m) = u_n(0) u_m(pi/2) - u_n(pi/2) u_m(0) for 1 <= m < n <= l.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "R: Serialize"))]
pub struct KernelMatrixStats<R: Real> {
    /// Hilbert-Schmidt norm; saturates past the floating-point range, in
    /// which case `ln_hs` still carries the value.
    pub hs_norm: R,
    /// Natural logarithm of the Hilbert-Schmidt norm.
    pub ln_hs: R,
    /// Truncation size.
    pub l: u32,
    /// Energy the boundary solutions were driven at.
    pub e0: R,
    /// Norms over indices 1..=l of the two boundary solutions, and their
    /// inner product.
    pub solution_norms: (R, R, R),
}

fn boundary_traces<R: Real>(
    params: &JacobiParams<R>,
    l: u32,
    e0: R,
) -> Result<(SolutionTrace<R>, SolutionTrace<R>)> {
    let x = eval_solution(params, R::zero(), e0, l)?;
    let y = eval_solution(params, pi::<R>() * cast::<R>(0.5), e0, l)?;
    Ok((x, y))
}

fn hs_with_scaled<R: Real>(
    params: &JacobiParams<R>,
    l: u32,
    e0: R,
) -> Result<(KernelMatrixStats<R>, Scaled<R>)> {
    if l < 1 {
        return Err(Error::Precondition("coupling operator needs l >= 1".into()));
    }
    let (x, y) = boundary_traces(params, l, e0)?;
    let li = l as usize;
    let mut sx = Scaled::zero();
    let mut sy = Scaled::zero();
    let mut sxy = Scaled::zero();
    for i in 1..=li {
        let (xi, yi) = (x.scaled(i), y.scaled(i));
        sx = sx.add(xi.square());
        sy = sy.add(yi.square());
        sxy = sxy.add(xi.mul(yi));
    }
    // Summing K(n, m)^2 over the full square and halving collapses the
    // Hilbert-Schmidt norm to the Gram determinant
    //   hs^2 = |x|^2 |y|^2 - <x, y>^2.
    // Evaluate it as |big|^2 * |small - proj(small on big)|^2: a product of
    // nonnegative sums, immune to the cancellation the raw difference
    // suffers when the traces are nearly parallel.
    let (big, small, s_big) = if sx.cmp_value(&sy) != Ordering::Less { (&x, &y, sx) } else { (&y, &x, sy) };
    let mut s_perp = Scaled::zero();
    if !s_big.is_zero() {
        let c = sxy.mul(s_big.recip());
        for i in 1..=li {
            let r = small.scaled(i).sub(c.mul(big.scaled(i)));
            s_perp = s_perp.add(r.square());
        }
    }
    let hs = s_big.mul(s_perp).sqrt();
    let stats = KernelMatrixStats {
        hs_norm: hs.to_real(),
        ln_hs: if hs.is_zero() { R::neg_infinity() } else { hs.ln_abs() },
        l,
        e0,
        solution_norms: (sx.sqrt().to_real(), sy.sqrt().to_real(), sxy.to_real()),
    };
    Ok((stats, hs))
}

/// Hilbert-Schmidt norm of the coupling operator at `e0`, computed in O(l)
/// time and memory from the two boundary solutions; the l x l matrix is
/// never materialized.
pub fn a_operator_hs<R: Real>(params: &JacobiParams<R>, l: u32, e0: R) -> Result<KernelMatrixStats<R>> {
    Ok(hs_with_scaled(params, l, e0)?.0)
}

/// Floor on the gap between the two zeros of p_l straddling `e0`: at least
/// 1/(sqrt(2) hs), with hs the coupling operator's Hilbert-Schmidt norm.
/// Errors when `e0` has no zero on one of its sides.
pub fn spacing_lower_bound<R: Real>(params: &JacobiParams<R>, l: u32, e0: R) -> Result<BoundReport<R>> {
    if l < 2 {
        return Err(Error::Precondition("straddling gap needs l >= 2".into()));
    }
    let tol = spectra::default_zero_tol(params, l)?;
    let (below, above) = spectra::straddling_pair(params, l, e0, tol)?;
    let (stats, hs) = hs_with_scaled(params, l, e0)?;
    let bound = hs.recip().mul_real(cast::<R>(std::f64::consts::FRAC_1_SQRT_2));
    let context = context_map(&[
        ("e0", e0),
        ("l", cast::<R>(l as f64)),
        ("zero_below", below),
        ("zero_above", above),
        ("ln_hs", stats.ln_hs),
    ]);
    Ok(BoundReport::floor("straddle-gap-floor", bound, Scaled::new(above - below), context))
}

/// Floor on every gap between consecutive zeros of p_l from the bandwidth
/// of the truncation alone: with beta the diagonal spread and gamma =
/// sqrt((beta + 2 a_max)^2 + a_max^2 + 1) / a_min over the truncation's
/// entries, each gap is at least (gamma^2 - 1) / (gamma^{2l} - 1).
pub fn tunneling_bound<R: Real>(params: &JacobiParams<R>, l: u32) -> Result<BoundReport<R>> {
    if l < 2 {
        return Err(Error::Precondition("gap floor needs l >= 2".into()));
    }
    params.validate(l)?;
    let mut a_min = R::infinity();
    let mut a_max = R::zero();
    for j in 1..l {
        let a = params.a(j);
        a_min = a_min.min(a);
        a_max = a_max.max(a);
    }
    let mut b_min = R::infinity();
    let mut b_max = R::neg_infinity();
    for j in 1..=l {
        let b = params.b(j);
        b_min = b_min.min(b);
        b_max = b_max.max(b);
    }
    let beta = b_max - b_min;
    let two = cast::<R>(2.0);
    // always > 1: the numerator bracket exceeds a_max^2 + 1 > a_min^2
    let gamma2 = ((beta + two * a_max).powi(2) + a_max * a_max + R::one()) / (a_min * a_min);
    let denom = scaled_from_ln(gamma2.ln() * cast::<R>(l as f64)).sub(Scaled::one());
    let bound = denom.recip().mul_real(gamma2 - R::one());
    let zeros = spectra::zeros_auto(params, l)?.zeros;
    let context = context_map(&[
        ("gamma", gamma2.sqrt()),
        ("l", cast::<R>(l as f64)),
        ("ln_bound", bound.ln_abs()),
    ]);
    Ok(BoundReport::floor("tunneling-gap-floor", bound, Scaled::new(min_successive_gap(&zeros)), context))
}

/// Floor on the distance from `e0` to the `count`-th nearest zero of p_l:
/// at least sqrt(count) / (2 hs). Clusters of zeros cannot sit tighter than
/// the coupling operator allows. Requires 2 <= count <= l.
pub fn multiplicity_bound<R: Real>(
    params: &JacobiParams<R>,
    l: u32,
    e0: R,
    count: u32,
) -> Result<BoundReport<R>> {
    if count < 2 {
        return Err(Error::Precondition("cluster floor needs count >= 2".into()));
    }
    if count > l {
        return Err(Error::Precondition(format!(
            "cluster of {count} zeros requested but p_{l} has only {l}"
        )));
    }
    let (stats, hs) = hs_with_scaled(params, l, e0)?;
    let zeros = spectra::zeros_auto(params, l)?.zeros;
    let mut distances: Vec<R> = zeros.iter().map(|&z| (z - e0).abs()).collect();
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let observed = distances[count as usize - 1];
    let bound = hs.recip().mul_real(cast::<R>(0.5) * cast::<R>(count as f64).sqrt());
    let context = context_map(&[
        ("e0", e0),
        ("l", cast::<R>(l as f64)),
        ("count", cast::<R>(count as f64)),
        ("ln_hs", stats.ln_hs),
    ]);
    Ok(BoundReport::floor("cluster-radius-floor", bound, Scaled::new(observed), context))
}

/// One sweep of the transfer product at `energy`, handing every prefix
/// T(1, E)..T(n, E) to `visit` while holding only the current matrix.
fn walk_transfer_prefixes<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    energy: R,
    visit: &mut dyn FnMut(&TransferMatrix<R>),
) -> Result<TransferMatrix<R>> {
    if n < 1 {
        return Err(Error::Precondition("transfer product needs n >= 1".into()));
    }
    params.validate(n)?;
    let hi = cast::<R>(2.0).powi(400);
    let mut m = [[R::one(), R::zero()], [R::zero(), R::one()]];
    let mut exp2: i64 = 0;
    let mut last = None;
    for j in 1..=n {
        let (aj, ajm, bj) = (params.a(j), params.a(j - 1), params.b(j));
        let r0 = [(energy - bj) / aj, -ajm / aj];
        m = [
            [r0[0] * m[0][0] + r0[1] * m[1][0], r0[0] * m[0][1] + r0[1] * m[1][1]],
            [m[0][0], m[0][1]],
        ];
        let mag = m.iter().flatten().fold(R::zero(), |acc, &v| acc.max(v.abs()));
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
        let current = TransferMatrix { entries: m, exp2, n: j, energy };
        visit(&current);
        last = Some(current);
    }
    Ok(last.expect("n >= 1 produced at least one prefix"))
}

/// Trace of the transfer product over steps 1..n. As a degree-n polynomial
/// in the energy it plays the role of a band function: the region where its
/// magnitude stays at or below 2 is the spectrum of the period-n closure of
/// the parameters.
pub fn discriminant<R: Real>(params: &JacobiParams<R>, n: u32, e: R) -> Result<R> {
    Ok(discriminant_scaled(params, n, e)?.to_real())
}

fn discriminant_scaled<R: Real>(params: &JacobiParams<R>, n: u32, e: R) -> Result<Scaled<R>> {
    Ok(walk_transfer_prefixes(params, n, e, &mut |_| {})?.trace())
}

/// The n real zeros of the discriminant, isolated by sign changes on an
/// escalating scan and bisected to near machine width. Errors when fewer
/// than n sign changes exist at the finest scan, which happens exactly when
/// zeros coincide or touch tangentially (degenerate, closed spectral gaps).
pub fn discriminant_zeros<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<Vec<R>> {
    if n < 1 {
        return Err(Error::Precondition("discriminant needs n >= 1".into()));
    }
    let per = periodize(params, n)?;
    let (p_lo, p_hi) = gershgorin_bracket(&per, 2 * n)?;
    let (t_lo, t_hi) = gershgorin_bracket(params, n)?;
    // pad by a bandwidth: the trace's zeros track eigenvalues of corner
    // modifications of the truncation, which Gershgorin alone can miss
    let mut a_top = R::one();
    for j in 1..=n {
        a_top = a_top.max(params.a(j));
    }
    let pad = (R::one() + a_top) * cast::<R>(2.0);
    let lo = p_lo.min(t_lo) - pad;
    let hi = p_hi.max(t_hi) + pad;
    let sign_at = |e: R| -> Result<bool> { Ok(discriminant_scaled(params, n, e)?.mantissa() >= R::zero()) };
    let mut cells = (16 * n as usize).max(64);
    loop {
        let grid = chebyshev_grid(lo, hi, cells + 1);
        let signs = grid
            .par_iter()
            .map(|&e| sign_at(e))
            .collect::<Result<Vec<bool>>>()?;
        let brackets: Vec<(R, R)> = (0..cells)
            .filter(|&k| signs[k] != signs[k + 1])
            .map(|k| (grid[k], grid[k + 1]))
            .collect();
        if brackets.len() == n as usize {
            let zeros = brackets
                .par_iter()
                .map(|&(mut a, mut b)| {
                    let mut sa = sign_at(a)?;
                    for _ in 0..128 {
                        let mid = (a + b) * cast::<R>(0.5);
                        if mid <= a || mid >= b {
                            break;
                        }
                        if sign_at(mid)? == sa {
                            a = mid;
                            sa = true;
                        } else {
                            b = mid;
                        }
                        let _ = sa;
                        sa = sign_at(a)?;
                    }
                    Ok((a + b) * cast::<R>(0.5))
                })
                .collect::<Result<Vec<R>>>()?;
            return Ok(zeros);
        }
        if cells >= 1024 * n as usize {
            return Err(Error::RefinementCap(format!(
                "isolated {} of {} discriminant zeros on the finest scan; coincident or \
                 tangential zeros (closed spectral gaps) cannot be separated by sign changes",
                brackets.len(),
                n
            )));
        }
        cells *= 4;
    }
}

/// Whether each zero of p_{n-1} sits between the surrounding pair of
/// discriminant zeros. Separation is strict where the discriminant's
/// magnitude exceeds 2 at the sandwiched zero; where it equals 2 (a closed
/// band gap) touching is tolerated.
pub fn interlace_check<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<bool> {
    if n < 2 {
        return Ok(true);
    }
    let dz = discriminant_zeros(params, n)?;
    let pz = spectra::zeros_auto(params, n - 1)?.zeros;
    let closed_tol = cast::<R>(2.0) + cast::<R>(1e-9);
    for (j, &z) in pz.iter().enumerate() {
        let (lo, hi) = (dz[j], dz[j + 1]);
        let closed = discriminant(params, n, z)?.abs() <= closed_tol;
        let ok = if closed { z >= lo && z <= hi } else { z > lo && z < hi };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// At every zero of the discriminant, |d/dE| is at least n over the
/// geometric mean of a_1..a_n; verified with a centered difference whose
/// step is 1e-7 of the bracket width.
pub fn rotation_derivative_check<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<BoundReport<R>> {
    let zeros = discriminant_zeros(params, n)?;
    let per = periodize(params, n)?;
    let (b_lo, b_hi) = gershgorin_bracket(&per, 2 * n)?;
    let h = (b_hi - b_lo).max(R::one()) * cast::<R>(1e-7);
    let mut observed: Option<Scaled<R>> = None;
    for &z in &zeros {
        let up = discriminant_scaled(params, n, z + h)?;
        let dn = discriminant_scaled(params, n, z - h)?;
        let fd = up.sub(dn).mul_real(((cast::<R>(2.0)) * h).recip()).abs();
        observed = Some(match observed {
            None => fd,
            Some(cur) if fd.cmp_value(&cur) == Ordering::Less => fd,
            Some(cur) => cur,
        });
    }
    let observed = observed.expect("degree n >= 1 has at least one zero");
    let bound = scaled_from_ln(-mean_log_offdiag(params, n)).mul_real(cast::<R>(n as f64));
    let context = context_map(&[
        ("n", cast::<R>(n as f64)),
        ("step", h),
        ("zero_count", cast::<R>(zeros.len() as f64)),
    ]);
    Ok(BoundReport::floor("rotation-derivative-floor", bound, observed, context))
}

fn grid_size(n: u32) -> usize {
    (n as usize * 64).max(128)
}

fn chebyshev_grid<R: Real>(lo: R, hi: R, m: usize) -> Vec<R> {
    let mid = (lo + hi) * cast::<R>(0.5);
    let half = (hi - lo) * cast::<R>(0.5);
    (0..m)
        .map(|k| {
            let t = pi::<R>() * cast::<R>(k as f64) / cast::<R>((m - 1) as f64);
            mid - half * t.cos()
        })
        .collect()
}

/// Vertex abscissa of the parabola through three points; the middle
/// abscissa when they are collinear.
fn parabola_peak<R: Real>(x: [R; 3], f: [R; 3]) -> R {
    let d01 = x[1] - x[0];
    let d12 = x[1] - x[2];
    let num = d01 * d01 * (f[1] - f[2]) - d12 * d12 * (f[1] - f[0]);
    let den = d01 * (f[1] - f[2]) - d12 * (f[1] - f[0]);
    if den == R::zero() {
        return x[1];
    }
    x[1] - cast::<R>(0.5) * num / den
}

/// Supremum of a positive scaled-valued function over [lo, hi]: dense
/// Chebyshev-spaced sampling, then one parabolic refinement of each
/// interior local maximum of the log-values.
fn sup_on_grid<R: Real>(
    lo: R,
    hi: R,
    m: usize,
    f: &(dyn Fn(R) -> Result<Scaled<R>> + Sync),
) -> Result<Scaled<R>> {
    let grid = chebyshev_grid(lo, hi, m.max(3));
    let vals = grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<Scaled<R>>>>()?;
    let mut best = vals[0];
    for v in &vals[1..] {
        best = best.max_value(*v);
    }
    let lns: Vec<R> = vals.iter().map(|v| v.ln_abs()).collect();
    let mut candidates = Vec::new();
    for k in 1..grid.len() - 1 {
        if lns[k] >= lns[k - 1] && lns[k] >= lns[k + 1] {
            let x = parabola_peak([grid[k - 1], grid[k], grid[k + 1]], [lns[k - 1], lns[k], lns[k + 1]]);
            if x.is_finite() && x > grid[k - 1] && x < grid[k + 1] {
                candidates.push(x);
            }
        }
    }
    for v in candidates.par_iter().map(|&x| f(x)).collect::<Result<Vec<Scaled<R>>>>()? {
        best = best.max_value(v);
    }
    Ok(best)
}

/// Ceiling on the gap between successive zeros of p_n inside `interval`:
/// 8e sup_I ||T(n, .)|| (prod a_j)^{1/n} / n.
pub fn spacing_upper_bound<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    interval: (R, R),
) -> Result<BoundReport<R>> {
    let (lo, hi) = interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition("need a finite, nonempty interval".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("spacing needs n >= 2".into()));
    }
    let zeros = spectra::zeros_auto(params, n)?.zeros;
    let inside: Vec<R> = zeros.iter().copied().filter(|&z| z >= lo && z <= hi).collect();
    if inside.len() < 2 {
        return Err(Error::Precondition(format!(
            "interval too small: holds {} of the {} zeros, need at least 2",
            inside.len(),
            n
        )));
    }
    let sup = sup_on_grid(lo, hi, grid_size(n), &|e| {
        Ok(walk_transfer_prefixes(params, n, e, &mut |_| {})?.norm())
    })?;
    let nf = cast::<R>(n as f64);
    let factor = cast::<R>(8.0) * cast::<R>(std::f64::consts::E) * mean_log_offdiag(params, n).exp() / nf;
    let context = context_map(&[
        ("interval_lo", lo),
        ("interval_hi", hi),
        ("zeros_inside", cast::<R>(inside.len() as f64)),
        ("ln_sup_transfer", sup.ln_abs()),
    ]);
    Ok(BoundReport::ceiling(
        "transfer-spacing-ceiling",
        sup.mul_real(factor),
        Scaled::new(max_successive_gap(&inside)),
        context,
    ))
}

/// Two-sided spacing control from the rotation speed. With tau the largest
/// value over the window of max_{m <= n} (1 + a_m^2) ||T(m, E)||^2,
/// successive zeros inside the window are separated by at least
/// a_n pi / (tau^2 n) and at most 2 a_n pi tau^2 / n; the ceiling also
/// forces a zero within that distance of each window endpoint.
pub fn prufer_spacing_bounds<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    window: (R, R),
) -> Result<(BoundReport<R>, BoundReport<R>)> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition("need a finite, nonempty window".into()));
    }
    if n < 2 {
        return Err(Error::Precondition("spacing needs n >= 2".into()));
    }
    let zeros = spectra::zeros_auto(params, n)?.zeros;
    let inside: Vec<R> = zeros.iter().copied().filter(|&z| z >= lo && z <= hi).collect();
    if inside.len() < 2 {
        return Err(Error::Precondition(format!(
            "window too small: holds {} of the {} zeros, need at least 2",
            inside.len(),
            n
        )));
    }
    let tau = sup_on_grid(lo, hi, grid_size(n), &|e| {
        let mut t = Scaled::zero();
        walk_transfer_prefixes(params, n, e, &mut |tm| {
            let am = params.a(tm.n);
            t = t.max_value(tm.norm().square().mul_real(R::one() + am * am));
        })?;
        Ok(t)
    })?;
    let an = params.a(n);
    let nf = cast::<R>(n as f64);
    let tau2 = tau.square();
    let floor_bound = tau2.recip().mul_real(an * pi::<R>() / nf);
    let ceil_bound = tau2.mul_real(cast::<R>(2.0) * an * pi::<R>() / nf);
    let context = context_map(&[
        ("window_lo", lo),
        ("window_hi", hi),
        ("ln_tau", tau.ln_abs()),
        ("zeros_inside", cast::<R>(inside.len() as f64)),
    ]);
    let lower = BoundReport::floor(
        "rotation-spacing-floor",
        floor_bound,
        Scaled::new(min_successive_gap(&inside)),
        context.clone(),
    );
    let upper = BoundReport::ceiling(
        "rotation-spacing-ceiling",
        ceil_bound,
        Scaled::new(max_successive_gap(&inside)),
        context,
    );
    Ok((lower, upper))
}

/// How to measure the underlying measure's mass on a gap between adjacent
/// quadrature nodes.
pub enum GapMeasure<'a, R: Real> {
    /// Integrate this density over the gap (absolutely continuous measures).
    Density {
        w: &'a (dyn Fn(R) -> R + Sync),
        support: (R, R),
    },
    /// Sum the weights of the rule at this deeper level over the gap. Valid
    /// once the level reaches the node count: the two rules share all
    /// moments the squared selector polynomial needs.
    GaussLevel(u32),
}

/// The measure of the closed gap between nodes j and j+1 (0-based) of the
/// n-point rule never exceeds the sum of the two node weights.
pub fn quadrature_gap_bound<R: Real>(
    params: &JacobiParams<R>,
    measure: &GapMeasure<'_, R>,
    n: u32,
    j: u32,
) -> Result<BoundReport<R>> {
    if n < 2 {
        return Err(Error::Precondition("a gap needs n >= 2 nodes".into()));
    }
    if j + 2 > n {
        return Err(Error::Precondition(format!("gap index {j} out of range for {n} nodes")));
    }
    let rule = spectra::christoffel_numbers(params, n)?;
    let (x_lo, x_hi) = (rule.nodes[j as usize], rule.nodes[j as usize + 1]);
    let (w_lo, w_hi) = (rule.weights[j as usize], rule.weights[j as usize + 1]);
    let mut context = context_map(&[
        ("node_lo", x_lo),
        ("node_hi", x_hi),
        ("weight_lo", w_lo),
        ("weight_hi", w_hi),
        ("gap_index", cast::<R>(j as f64)),
    ]);
    let observed = match measure {
        GapMeasure::Density { w, support } => {
            let mu = adaptive_simpson(&|x| w(x), x_lo, x_hi, cast::<R>(1e-10), 48)?;
            if !mu.is_finite() || mu < -cast::<R>(1e-12) {
                return Err(Error::BadWeight {
                    x: ((x_lo + x_hi) * cast::<R>(0.5)).to_f64().unwrap_or(f64::NAN),
                    value: mu.to_f64().unwrap_or(f64::NAN),
                });
            }
            // report-only envelope for weights of interior nodes:
            // w_max pi (support width) / floor(n/2)
            let mut w_plus = R::zero();
            for &x in &chebyshev_grid(support.0, support.1, 1025) {
                w_plus = w_plus.max(w(x));
            }
            let m = (n / 2).max(1);
            let envelope = w_plus * pi::<R>() * (support.1 - support.0) / cast::<R>(m as f64);
            context.insert("weight_envelope".into(), envelope);
            context.insert("weight_max".into(), w_plus);
            mu
        }
        GapMeasure::GaussLevel(level) => {
            if *level < n {
                return Err(Error::Precondition(format!(
                    "proxy level {level} is shallower than the {n}-point rule it must dominate"
                )));
            }
            let proxy = spectra::christoffel_numbers(params, *level)?;
            let mut mu = R::zero();
            for (node, wt) in proxy.nodes.iter().zip(&proxy.weights) {
                if *node >= x_lo && *node <= x_hi {
                    mu += *wt;
                }
            }
            mu
        }
    };
    Ok(BoundReport::ceiling(
        "gap-measure-ceiling",
        Scaled::new(w_lo + w_hi),
        Scaled::new(observed),
        context,
    ))
}

/// Largest admissible trial exponents for [`kernel_gap_bound`] at degree n:
/// q grows like log n, and p takes the rest of the degree budget
/// 2q(2p - 2) <= 2n - 1.
pub fn kernel_gap_exponents(n: u32) -> (u32, u32) {
    let q = ((n.max(1) as f64).ln().floor() as u32).max(1);
    let p = 1 + (2 * n.max(1) - 1) / (4 * q);
    (p, q)
}

/// Ceiling on the gap between successive zeros of p_n from the diagonal
/// reproducing kernel at the gap midpoint: (a/p) K_p(mid, mid)^{1/(2q)},
/// where a is the width of the node-containing interval and the exponents
/// respect 2q(2p - 2) <= 2n - 1. Errors when the exponents overdraw the
/// budget or the endpoints are not successive zeros.
pub fn kernel_gap_bound<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    gap: (R, R),
    p: u32,
    q: u32,
) -> Result<BoundReport<R>> {
    if n < 2 || p < 1 || q < 1 {
        return Err(Error::Precondition("need n >= 2, p >= 1, q >= 1".into()));
    }
    let budget = 2 * u64::from(n) - 1;
    let degree = 2 * u64::from(q) * (2 * u64::from(p) - 2);
    if degree > budget {
        return Err(Error::Precondition(format!(
            "trial degree 2q(2p-2) = {degree} exceeds the exactness budget 2n-1 = {budget}"
        )));
    }
    let (e_lo, e_hi) = gap;
    if !(e_lo < e_hi) {
        return Err(Error::Precondition("gap endpoints must be distinct and ordered".into()));
    }
    let tol = spectra::default_zero_tol(params, n)?;
    let mid = (e_lo + e_hi) * cast::<R>(0.5);
    let (s_lo, s_hi) = spectra::straddling_pair(params, n, mid, tol)?;
    let match_tol = cast::<R>(1e-6) * R::one().max(e_lo.abs()).max(e_hi.abs());
    if (s_lo - e_lo).abs() > match_tol || (s_hi - e_hi).abs() > match_tol {
        return Err(Error::Precondition("gap endpoints are not successive zeros of p_n".into()));
    }
    let (g_lo, g_hi) = gershgorin_bracket(params, n)?;
    let width = g_hi - g_lo;
    let kernel = cd_kernel_scaled(params, p, mid, mid, CdMethod::Sum)?;
    let bound = scaled_from_ln(kernel.ln_abs() / cast::<R>(2.0 * q as f64))
        .mul_real(width / cast::<R>(p as f64));
    let context = context_map(&[
        ("p", cast::<R>(p as f64)),
        ("q", cast::<R>(q as f64)),
        ("midpoint", mid),
        ("interval_width", width),
        ("kernel_diag", kernel.to_real()),
    ]);
    Ok(BoundReport::ceiling("kernel-gap-ceiling", bound, Scaled::new(e_hi - e_lo), context))
}

/// Floor on the distance between two distinct zeros of p_n in terms of the
/// diagonal kernel near their midpoint: with delta exceeding half the
/// separation,
/// gap >= (delta^2 - (gap/2)^2) / (3n) * sqrt(K_n(E,E) / sup K_n(y,y)),
/// the sup running over |y - midpoint| <= delta and E the lower zero.
pub fn kernel_spacing_lower<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    pair: (R, R),
    delta: R,
) -> Result<BoundReport<R>> {
    if n < 2 {
        return Err(Error::Precondition("spacing needs n >= 2".into()));
    }
    let (e_lo, e_hi) = pair;
    if !(e_lo < e_hi) {
        return Err(Error::Precondition("pair must be two distinct, ordered energies".into()));
    }
    for e in [e_lo, e_hi] {
        let p_vals = eval_orthonormal_scaled(params, n, e)?;
        let (top, prev) = (p_vals[n as usize], p_vals[n as usize - 1]);
        let hyp = top.square().add(prev.square()).sqrt();
        let residual_cap = hyp.mul_real(cast::<R>(1e-6));
        if hyp.is_zero() || top.abs().cmp_value(&residual_cap) == Ordering::Greater {
            return Err(Error::Precondition(format!(
                "{e} is not a zero of the degree-{n} polynomial"
            )));
        }
    }
    let half = (e_hi - e_lo) * cast::<R>(0.5);
    if !(delta > half) {
        return Err(Error::Precondition(
            "window radius must exceed half the pair separation".into(),
        ));
    }
    let mid = (e_lo + e_hi) * cast::<R>(0.5);
    let sup = sup_on_grid(mid - delta, mid + delta, 1024, &|y| {
        cd_kernel_scaled(params, n, y, y, CdMethod::Sum)
    })?;
    let at_zero = cd_kernel_scaled(params, n, e_lo, e_lo, CdMethod::Sum)?;
    let scale = (delta * delta - half * half) / (cast::<R>(3.0) * cast::<R>(n as f64));
    let bound = at_zero.mul(sup.recip()).sqrt().mul_real(scale);
    let context = context_map(&[
        ("delta", delta),
        ("midpoint", mid),
        ("kernel_at_zero", at_zero.to_real()),
        ("ln_kernel_sup", sup.ln_abs()),
    ]);
    Ok(BoundReport::floor("kernel-spacing-floor", bound, Scaled::new(e_hi - e_lo), context))
}

/// Growth classification for the running sup of transfer norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthRegime {
    /// The log-sup moves by less than 0.5 across the sampled sizes.
    Flat,
    /// The fit against sqrt(n) carries the smaller residual.
    SqrtN,
    /// The fit against n carries the smaller residual.
    LinearN,
}

/// Running log-sup of transfer norms at sampled sizes, with least-squares
/// lines against sqrt(n) and against n.
#[derive(Debug, Clone)]
pub struct GrowthProfile<R: Real> {
    /// (n, ln sup_{m <= n} ||T(m, E)||) at each requested size.
    pub samples: Vec<(u32, R)>,
    pub sqrt_fit: SlopeFit<R>,
    pub linear_fit: SlopeFit<R>,
    pub dominant: GrowthRegime,
}

fn fit_line<R: Real>(xs: &[R], ys: &[R]) -> SlopeFit<R> {
    let n = cast::<R>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<R>() / n;
    let my = ys.iter().copied().sum::<R>() / n;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > R::zero() { sxy / sxx } else { R::zero() };
    let intercept = my - slope * mx;
    let mut rss = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        rss += r * r;
    }
    SlopeFit { slope, intercept, residual: (rss / n).sqrt() }
}

/// Samples ln sup_{m <= n} ||T(m, E)|| at the given strictly increasing
/// sizes in one sweep, then fits the samples against sqrt(n) and n.
pub fn transfer_growth_profile<R: Real>(
    params: &JacobiParams<R>,
    energy: R,
    sizes: &[u32],
) -> Result<GrowthProfile<R>> {
    if sizes.is_empty() {
        return Err(Error::Precondition("need at least one size to sample".into()));
    }
    if sizes[0] < 1 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("sizes must be >= 1 and strictly increasing".into()));
    }
    let mut samples = Vec::with_capacity(sizes.len());
    let mut running = R::neg_infinity();
    let mut next = 0usize;
    walk_transfer_prefixes(params, *sizes.last().unwrap(), energy, &mut |tm| {
        running = running.max(tm.norm().ln_abs());
        if next < sizes.len() && sizes[next] == tm.n {
            samples.push((tm.n, running));
            next += 1;
        }
    })?;
    let ys: Vec<R> = samples.iter().map(|&(_, v)| v).collect();
    let sqrt_xs: Vec<R> = samples.iter().map(|&(k, _)| cast::<R>((k as f64).sqrt())).collect();
    let lin_xs: Vec<R> = samples.iter().map(|&(k, _)| cast::<R>(k as f64)).collect();
    let sqrt_fit = fit_line(&sqrt_xs, &ys);
    let linear_fit = fit_line(&lin_xs, &ys);
    let top = ys.iter().fold(R::neg_infinity(), |a, &b| a.max(b));
    let bottom = ys.iter().fold(R::infinity(), |a, &b| a.min(b));
    let dominant = if top - bottom < cast::<R>(0.5) {
        GrowthRegime::Flat
    } else if sqrt_fit.residual <= linear_fit.residual {
        GrowthRegime::SqrtN
    } else {
        GrowthRegime::LinearN
    };
    Ok(GrowthProfile { samples, sqrt_fit, linear_fit, dominant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, chebyshev_t, rng, stieltjes_from_weight, ModelSpec};
    use crate::spectra::zeros_auto;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    fn free() -> JacobiParams<f64> {
        build_model(&ModelSpec::Free).unwrap()
    }

    #[test]
    fn coupling_norm_free_matches_hand_computation() {
        let stats = a_operator_hs(&free(), 4, 0.0).unwrap();
        assert!((stats.hs_norm - 2.0).abs() < 1e-12);
        assert!((stats.solution_norms.0 - 2f64.sqrt()).abs() < 1e-12);
        assert!((stats.solution_norms.1 - 2f64.sqrt()).abs() < 1e-12);
        assert!(stats.solution_norms.2.abs() < 1e-12);
        // a single index carries no strictly-lower-triangular entries
        let trivial = a_operator_hs(&free(), 1, 0.3).unwrap();
        assert!(trivial.hs_norm.abs() < 1e-12);
    }

    #[test]
    fn coupling_norm_matches_entrywise_sum() {
        let models = [free(), build_model(&ModelSpec::l1_canonical()).unwrap()];
        for p in &models {
            for &l in &[5u32, 17, 50] {
                for &e0 in &[0.0, 0.37, -1.2] {
                    let x = eval_solution(p, 0.0, e0, l).unwrap();
                    let y = eval_solution(p, FRAC_PI_2, e0, l).unwrap();
                    let mut frob2 = 0.0;
                    for m in 1..=l as usize {
                        for k in m + 1..=l as usize {
                            let entry = x.value(k) * y.value(m) - y.value(k) * x.value(m);
                            frob2 += entry * entry;
                        }
                    }
                    let hs = a_operator_hs(p, l, e0).unwrap().hs_norm;
                    let brute = frob2.sqrt();
                    assert!(
                        (hs - brute).abs() <= 1e-10 * (1.0 + brute),
                        "l={l} e0={e0}: {hs} vs {brute}"
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_invariant_under_unimodular_solution_changes() {
        let p = build_model(&ModelSpec::l1_canonical()).unwrap();
        let l = 30usize;
        let e0 = 0.3;
        let x = eval_solution(&p, 0.0, e0, l as u32).unwrap();
        let y = eval_solution(&p, FRAC_PI_2, e0, l as u32).unwrap();
        // mix the boundary pair through a determinant-one change of basis
        let (s11, s12, s21) = (1.25, -0.4, 0.7);
        let s22 = (1.0 + s12 * s21) / s11;
        let v1: Vec<f64> = (0..=l).map(|i| s11 * x.value(i) + s12 * y.value(i)).collect();
        let v2: Vec<f64> = (0..=l).map(|i| s21 * x.value(i) + s22 * y.value(i)).collect();
        let mut max_dev = 0.0f64;
        let mut frob2 = 0.0;
        let mut norm1 = 0.0;
        let mut norm2 = 0.0;
        for m in 1..=l {
            norm1 += v1[m] * v1[m];
            norm2 += v2[m] * v2[m];
            for k in m + 1..=l {
                let base = x.value(k) * y.value(m) - y.value(k) * x.value(m);
                let mixed = v1[k] * v2[m] - v2[k] * v1[m];
                max_dev = max_dev.max((mixed - base).abs());
                frob2 += base * base;
            }
        }
        assert!(max_dev < 1e-10, "entries moved by {max_dev}");
        // ... and the norm is dominated by the product of the pair's norms
        assert!(frob2.sqrt() <= (norm1 * norm2).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn straddle_gap_floor_on_the_free_model() {
        let r = spacing_lower_bound(&free(), 4, 0.0).unwrap();
        assert!(r.satisfied);
        assert!((r.bound_value - 0.5f64.sqrt() / 2.0).abs() < 1e-12);
        let inner_pair_gap = 4.0 * (2.0 * PI / 5.0).cos();
        assert!((r.observed_value - inner_pair_gap).abs() < 1e-10);
    }

    #[test]
    fn straddle_gap_floor_scaling_with_size() {
        for &l in &[400u32, 2000] {
            let r = spacing_lower_bound(&free(), l, 0.0).unwrap();
            assert!(r.satisfied);
            let lf = l as f64;
            // the floor is exactly sqrt(2)/l while the gap is ~ 2 pi / l
            assert!((r.bound_value * lf - 2f64.sqrt()).abs() < 1e-9);
            assert!((r.observed_value * lf - 2.0 * PI).abs() < 0.02);
        }
    }

    #[test]
    fn straddle_gap_floor_on_random_diagonals() {
        let p = build_model(&ModelSpec::IIDRandom { lambda: 3.0, seed: 0x5eed }).unwrap();
        let r = spacing_lower_bound(&p, 500, 0.0).unwrap();
        assert!(r.satisfied);
        assert!(r.bound_value > 0.0);
        assert!(r.observed_value >= r.bound_value);
    }

    #[test]
    fn bandwidth_gap_floor_free_and_two_site() {
        let r = tunneling_bound(&free(), 3).unwrap();
        assert!(r.satisfied);
        assert!((r.context["gamma"] - 6f64.sqrt()).abs() < 1e-12);
        assert!((r.bound_value - 5.0 / 215.0).abs() < 1e-12);
        assert!((r.observed_value - 2f64.sqrt()).abs() < 1e-10);

        // nearly decoupled two-site block: the gap floor collapses with the
        // coupling while the true gap stays at the diagonal separation
        let two = JacobiParams::from_table(vec![1e-6, 1.0], vec![0.0, 0.5], "weak two-site coupling")
            .unwrap();
        let r2 = tunneling_bound(&two, 2).unwrap();
        assert!(r2.satisfied);
        assert!(r2.observed_value > 0.5);
        assert!(r2.bound_value < 1e-11);
    }

    #[test]
    fn cluster_radius_floor_on_the_free_model() {
        let p = free();
        let r = multiplicity_bound(&p, 4, 0.0, 2).unwrap();
        assert!(r.satisfied);
        assert!((r.bound_value - 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((r.observed_value - 2.0 * (2.0 * PI / 5.0).cos()).abs() < 1e-10);

        let all = multiplicity_bound(&p, 4, 0.0, 4).unwrap();
        assert!(all.satisfied);
        assert!((all.observed_value - 2.0 * (PI / 5.0).cos()).abs() < 1e-10);

        let deep = multiplicity_bound(&p, 1000, 0.0, 10).unwrap();
        assert!(deep.satisfied);
        assert!(deep.observed_value / deep.bound_value < 20.0);

        assert!(multiplicity_bound(&p, 4, 0.0, 5).is_err());
        assert!(multiplicity_bound(&p, 4, 0.0, 1).is_err());
    }

    #[test]
    fn discriminant_matches_free_cosine_form() {
        let p = free();
        for &n in &[1u32, 2, 3, 5, 8] {
            for k in 0..40 {
                let theta = (k as f64 + 0.5) * PI / 40.0;
                let d = discriminant(&p, n, 2.0 * theta.cos()).unwrap();
                let expected = 2.0 * (n as f64 * theta).cos();
                assert!((d - expected).abs() < 1e-9, "n={n} theta={theta}: {d} vs {expected}");
            }
        }
    }

    #[test]
    fn discriminant_zero_scan_free_degree_four() {
        let zs = discriminant_zeros(&free(), 4).unwrap();
        assert_eq!(zs.len(), 4);
        let expected: Vec<f64> =
            [7.0, 5.0, 3.0, 1.0].iter().map(|&k| 2.0 * (k * PI / 8.0).cos()).collect();
        for (z, e) in zs.iter().zip(&expected) {
            assert!((z - e).abs() < 1e-9, "{z} vs {e}");
        }
        assert!(interlace_check(&free(), 4).unwrap());
    }

    #[test]
    fn discriminant_periodic_two_block() {
        let p = build_model(&ModelSpec::Periodic { a: vec![1.0, 1.0], b: vec![1.0, -1.0] }).unwrap();
        for &e in &[-2.5f64, -0.7, 0.0, 1.3, 2.9] {
            let d = discriminant(&p, 2, e).unwrap();
            assert!((d - (e * e - 3.0)).abs() < 1e-12, "{e}: {d}");
        }
        let zs = discriminant_zeros(&p, 2).unwrap();
        assert!((zs[0] + 3f64.sqrt()).abs() < 1e-10);
        assert!((zs[1] - 3f64.sqrt()).abs() < 1e-10);
        assert!(interlace_check(&p, 2).unwrap());

        let rot = rotation_derivative_check(&p, 2).unwrap();
        assert!(rot.satisfied);
        assert!((rot.bound_value - 2.0).abs() < 1e-12);
        assert!((rot.observed_value - 2.0 * 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn rotation_derivative_floor_is_tight_on_the_free_model() {
        let r1 = rotation_derivative_check(&free(), 1).unwrap();
        assert!(r1.satisfied);
        assert!((r1.bound_value - 1.0).abs() < 1e-12);
        assert!((r1.observed_value - 1.0).abs() < 1e-6);

        // the central zero achieves the floor exactly
        let r5 = rotation_derivative_check(&free(), 5).unwrap();
        assert!(r5.satisfied);
        assert!((r5.bound_value - 5.0).abs() < 1e-12);
        assert!((r5.observed_value - 5.0).abs() < 1e-4);
    }

    #[test]
    fn transfer_spacing_ceiling_free_ratio() {
        let r = spacing_upper_bound(&free(), 101, (-1.0, 1.0)).unwrap();
        assert!(r.satisfied);
        let ratio = r.bound_value / r.observed_value;
        assert!(ratio > 3.0 && ratio < 8.0, "ratio {ratio}");

        let small = spacing_upper_bound(&free(), 11, (-0.6, 0.6)).unwrap();
        assert!(small.satisfied);
    }

    #[test]
    fn transfer_spacing_ceiling_edge_decay() {
        let p = build_model(&ModelSpec::EdgeDecay { gamma: 3.0 }).unwrap();
        let r = spacing_upper_bound(&p, 400, (-1.0, 1.0)).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn spacing_ceiling_rejects_thin_intervals() {
        let err = spacing_upper_bound(&free(), 10, (1.9, 2.0)).unwrap_err();
        assert!(err.to_string().contains("interval too small"), "{err}");
    }

    #[test]
    fn rotation_spacing_bounds_bracket_free_gaps() {
        let (lower, upper) = prufer_spacing_bounds(&free(), 200, (-1.0, 1.0)).unwrap();
        assert!(lower.satisfied && upper.satisfied);
        assert!(lower.bound_value > 0.0);
        assert!(upper.bound_value < 2.0);
        // tightest interior gap sits at the window edge: 2 pi sin(theta) / (n+1)
        let edge_gap = 2.0 * PI / 201.0 * (3f64.sqrt() / 2.0);
        assert!((lower.observed_value - edge_gap).abs() < 2e-3);
        // the ceiling doubles as an endpoint-existence radius
        let zeros = zeros_auto(&free(), 200).unwrap().zeros;
        assert!(zeros.iter().any(|&z| z >= -1.0 && z <= -1.0 + upper.bound_value));
        assert!(zeros.iter().any(|&z| z <= 1.0 && z >= 1.0 - upper.bound_value));
    }

    #[test]
    fn rotation_spacing_bounds_on_summable_perturbation() {
        let p = build_model(&ModelSpec::l1_canonical()).unwrap();
        let (lower, upper) = prufer_spacing_bounds(&p, 300, (-1.0, 1.0)).unwrap();
        assert!(lower.satisfied && upper.satisfied);
    }

    #[test]
    fn gap_measure_ceiling_chebyshev_exact() {
        let p = chebyshev_t::<f64>();
        let w = |x: f64| 1.0 / (PI * (1.0 - x * x).sqrt());
        let measure = GapMeasure::Density { w: &w, support: (-1.0, 1.0) };
        for j in 0..9 {
            let r = quadrature_gap_bound(&p, &measure, 10, j).unwrap();
            assert!(r.satisfied);
            // every inter-node arc carries mass exactly 1/n, each weight 1/n
            assert!((r.observed_value - 0.1).abs() < 1e-9, "j={j}: {}", r.observed_value);
            assert!((r.bound_value - 0.2).abs() < 1e-9);
            assert!(r.context.contains_key("weight_envelope"));
        }
    }

    #[test]
    fn gap_measure_ceiling_kinked_weight() {
        let table = stieltjes_from_weight(&|x: f64| x.abs().sqrt(), (-1.0, 1.0), 60).unwrap();
        let p = table.into_params("square-root cusp weight").unwrap();
        let w = |x: f64| x.abs().sqrt();
        let measure = GapMeasure::Density { w: &w, support: (-1.0, 1.0) };
        // the central gap straddles the cusp at zero
        let r = quadrature_gap_bound(&p, &measure, 50, 24).unwrap();
        assert!(r.satisfied);
        assert!(r.observed_value > 0.0);
    }

    #[test]
    fn gap_measure_ceiling_gauss_proxy() {
        let p = free();
        for &j in &[0u32, 7, 14] {
            let r = quadrature_gap_bound(&p, &GapMeasure::GaussLevel(64), 16, j).unwrap();
            assert!(r.satisfied, "j={j}");
        }
        assert!(quadrature_gap_bound(&p, &GapMeasure::GaussLevel(8), 16, 3).is_err());
    }

    #[test]
    fn free_central_gap_measure_tracks_two_pi_over_n() {
        let p = free();
        let w = |x: f64| (4.0 - x * x).sqrt() / (2.0 * PI);
        for &n in &[400u32, 1200] {
            let rule = spectra::christoffel_numbers(&p, n).unwrap();
            let j = n / 2 - 1;
            let (x_lo, x_hi) = (rule.nodes[j as usize], rule.nodes[j as usize + 1]);
            let scaled_gap = n as f64 * (x_hi - x_lo);
            assert!((scaled_gap - 2.0 * PI).abs() < 0.05, "n={n}: {scaled_gap}");
            let measure = GapMeasure::Density { w: &w, support: (-2.0, 2.0) };
            let r = quadrature_gap_bound(&p, &measure, n, j).unwrap();
            assert!(r.satisfied);
            // ... comfortably below the universal 4 pi d(0) = 8 pi ceiling
            assert!(n as f64 * r.bound_value < 8.0 * PI);
        }
    }

    #[test]
    fn kernel_gap_exponent_budget() {
        for &n in &[1u32, 2, 10, 100, 1000, 100_000] {
            let (p, q) = kernel_gap_exponents(n);
            assert!(p >= 1 && q >= 1);
            if p > 1 {
                assert!(2 * u64::from(q) * (2 * u64::from(p) - 2) <= 2 * u64::from(n) - 1);
            }
        }
        assert_eq!(kernel_gap_exponents(10), (3, 2));
        assert_eq!(kernel_gap_exponents(100), (13, 4));
    }

    #[test]
    fn kernel_gap_ceiling_free_hand_example() {
        let p = free();
        let zs = zeros_auto(&p, 10).unwrap().zeros;
        let r = kernel_gap_bound(&p, 10, (zs[4], zs[5]), 2, 1).unwrap();
        assert!(r.satisfied);
        // K_2(0,0) = 2 inside a width-4 interval: bound (4/2) sqrt(2)
        assert!((r.bound_value - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((r.observed_value - 4.0 * (5.0 * PI / 11.0).cos()).abs() < 1e-9);
    }

    #[test]
    fn kernel_gap_ceiling_with_automatic_exponents() {
        let p = free();
        let (pp, qq) = kernel_gap_exponents(100);
        let zs = zeros_auto(&p, 100).unwrap().zeros;
        let r = kernel_gap_bound(&p, 100, (zs[49], zs[50]), pp, qq).unwrap();
        assert!(r.satisfied);
        // K_13(0,0) = 7: bound (4/13) 7^{1/8}
        assert!((r.bound_value - (4.0 / 13.0) * 7f64.powf(0.125)).abs() < 1e-6);
    }

    #[test]
    fn kernel_gap_ceiling_rejects_bad_inputs() {
        let p = free();
        let zs = zeros_auto(&p, 10).unwrap().zeros;
        let over = kernel_gap_bound(&p, 10, (zs[4], zs[5]), 6, 3).unwrap_err();
        assert!(over.to_string().contains("exceeds"), "{over}");
        let skipped = kernel_gap_bound(&p, 10, (zs[4], zs[6]), 2, 1).unwrap_err();
        assert!(skipped.to_string().contains("successive"), "{skipped}");
    }

    #[test]
    fn kernel_spacing_floor_free() {
        let p = free();
        let zs = zeros_auto(&p, 50).unwrap().zeros;
        let pair = (zs[24], zs[25]);
        let r = kernel_spacing_lower(&p, 50, pair, 0.5).unwrap();
        assert!(r.satisfied);
        assert!(r.bound_value > 1e-4);
        assert!(r.bound_value <= r.observed_value);

        assert!(kernel_spacing_lower(&p, 50, pair, 0.01).is_err());
        assert!(kernel_spacing_lower(&p, 50, (0.011, pair.1), 0.5).is_err());
    }

    #[test]
    fn kernel_spacing_floor_stays_order_one_over_n() {
        let p = chebyshev_t::<f64>();
        for &n in &[100u32, 200, 400] {
            let tol = spectra::default_zero_tol(&p, n).unwrap();
            for k in 0..9 {
                let y = -0.25 + 0.0625 * k as f64;
                let (lo, hi) = spectra::straddling_pair(&p, n, y, tol).unwrap();
                let r = kernel_spacing_lower(&p, n, (lo, hi), 0.3).unwrap();
                assert!(r.satisfied, "n={n} y={y}");
                let scaled = n as f64 * r.bound_value;
                assert!(scaled > 0.01 && scaled < 1.0, "n={n} y={y}: {scaled}");
            }
        }
    }

    #[test]
    fn growth_profile_classifies_regimes() {
        let flat = transfer_growth_profile(&free(), 1.0, &[100, 400, 1600, 6400]).unwrap();
        assert_eq!(flat.dominant, GrowthRegime::Flat);

        let l2 = JacobiParams::from_fns(
            |_| 1.0,
            |k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * f64::from(k).powf(-0.7)
            },
            "alternating square-summable diagonal",
        );
        let prof = transfer_growth_profile(&l2, 0.5, &[100, 400, 1600, 6400]).unwrap();
        assert!(prof.sqrt_fit.residual <= prof.linear_fit.residual + 1e-12);
        let &(n_last, v_last) = prof.samples.last().unwrap();
        assert!(v_last < 3.0 * (n_last as f64).sqrt(), "log-sup {v_last} at {n_last}");

        let anderson = build_model(&ModelSpec::IIDRandom { lambda: 3.0, seed: 0xfeed }).unwrap();
        let prof = transfer_growth_profile(&anderson, 0.0, &[50, 100, 200, 400, 800, 1600]).unwrap();
        assert_eq!(prof.dominant, GrowthRegime::LinearN);
        assert!(prof.linear_fit.slope > 0.05, "slope {}", prof.linear_fit.slope);
    }

    #[test]
    fn log_concavity_step_bound_on_real_rooted_polynomials() {
        let seed = 0x5eed_00b5u64;
        let mut checked = 0u32;
        let mut t = 0u64;
        while checked < 200 {
            let d = 2 + (rng::draw(seed, t) % 11) as usize;
            t += 1;
            let mut roots: Vec<f64> =
                (0..d).map(|i| 2.0 * rng::uniform_symmetric(seed, t + i as u64)).collect();
            t += d as u64;
            roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if roots.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                continue; // want simple zeros with room between them
            }
            let i0 = (rng::draw(seed, t) as usize) % (d - 1);
            t += 1;
            let e0 = roots[i0];
            let q = |x: f64| -> f64 { roots.iter().map(|r| x - r).product() };
            let dq = |x: f64| -> f64 {
                (0..d)
                    .map(|i| {
                        (0..d).filter(|&j| j != i).map(|j| x - roots[j]).product::<f64>()
                    })
                    .sum()
            };
            // locate the critical point between e0 and the next zero
            let (mut lo, mut hi) = (e0, roots[i0 + 1]);
            let s0 = dq(lo).signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if dq(mid).signum() == s0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let e1 = 0.5 * (lo + hi);
            let step = e1 - e0;
            let cap = E * q(e1).abs() / dq(e0).abs();
            assert!(step <= cap * (1.0 + 1e-9), "roots {roots:?}: step {step} cap {cap}");
            checked += 1;
        }
    }

    #[test]
    fn report_serializes_with_stable_keys() {
        let r = spacing_lower_bound(&free(), 4, 0.0).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"name\":\"straddle-gap-floor\""));
        assert!(json.contains("\"bound\":"));
        assert!(json.contains("\"observed\":"));
        assert!(json.contains("\"satisfied\":true"));
        assert!(json.contains("\"context\":{"));
    }

    #[test]
    fn bound_matrix_smoke_across_models_and_sizes() {
        let golden = crate::models::golden_ratio_frequency();
        let table_a: Vec<f64> = (1..=128).map(|k| if k == 1 { 0.5f64.sqrt() } else { 0.5 }).collect();
        let table_b = vec![0.0f64; 128];
        let specs = vec![
            ("free", ModelSpec::Free),
            ("l1", ModelSpec::l1_canonical()),
            ("bv", ModelSpec::bv_canonical()),
            ("periodic", ModelSpec::Periodic { a: vec![1.0, 0.8], b: vec![0.3, -0.3] }),
            ("edge", ModelSpec::EdgeDecay { gamma: 2.0 }),
            ("iid", ModelSpec::IIDRandom { lambda: 1.0, seed: 7 }),
            ("mathieu", ModelSpec::AlmostMathieu { lambda: 0.5, alpha: golden, theta0: 0.25 }),
            ("table", ModelSpec::WeightTable { a: table_a, b: table_b }),
        ];
        for (name, spec) in &specs {
            let params: JacobiParams<f64> = build_model(spec).unwrap();
            for &n in &[10u32, 50] {
                let zeros = zeros_auto(&params, n).unwrap().zeros;
                let tol = spectra::default_zero_tol(&params, n).unwrap();
                let quartiles: Vec<f64> = (1..=3)
                    .map(|qn| {
                        let k = qn * n as usize / 4;
                        0.5 * (zeros[k] + zeros[k + 1])
                    })
                    .collect();
                for &e0 in &quartiles {
                    let tag = format!("{name} n={n} e0={e0}");
                    let r = spacing_lower_bound(&params, n, e0).unwrap();
                    assert!(r.satisfied, "{tag} straddle floor");
                    let m = multiplicity_bound(&params, n, e0, 2).unwrap();
                    assert!(m.satisfied, "{tag} cluster floor");
                    let (lo, hi) = spectra::straddling_pair(&params, n, e0, tol).unwrap();
                    let (pp, qq) = kernel_gap_exponents(n);
                    let kg = kernel_gap_bound(&params, n, (lo, hi), pp, qq).unwrap();
                    assert!(kg.satisfied, "{tag} kernel ceiling");
                    let span = zeros[zeros.len() - 1] - zeros[0];
                    let delta = 0.75 * (hi - lo) + span / 16.0;
                    let ks = kernel_spacing_lower(&params, n, (lo, hi), delta).unwrap();
                    assert!(ks.satisfied, "{tag} kernel floor");
                }
                let tag = format!("{name} n={n}");
                let t = tunneling_bound(&params, n).unwrap();
                assert!(t.satisfied, "{tag} tunneling floor");
                let window = (zeros[n as usize / 4], zeros[3 * n as usize / 4]);
                let su = spacing_upper_bound(&params, n, window).unwrap();
                assert!(su.satisfied, "{tag} transfer ceiling");
                let (pl, pu) = prufer_spacing_bounds(&params, n, window).unwrap();
                assert!(pl.satisfied && pu.satisfied, "{tag} rotation bounds");
                let qg = quadrature_gap_bound(&params, &GapMeasure::GaussLevel(2 * n), n, n / 2).unwrap();
                assert!(qg.satisfied, "{tag} gap measure");
                let gp = transfer_growth_profile(&params, quartiles[1], &[n / 2, n]).unwrap();
                assert_eq!(gp.samples.len(), 2, "{tag} growth profile");
            }
        }
    }
}
