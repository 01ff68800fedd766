//! Zeros of the orthonormal polynomials as eigenvalues of the truncated
//! tridiagonal matrix, the counting measure built on them, Gauss quadrature
//! weights, and growth diagnostics for the reproducing kernel.
//!
//! The eigensolver is Sturm bisection: bit-reproducible, embarrassingly
//! parallel across eigenvalue indices, and its counting function is exactly
//! the object the zero-counting measure needs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::JacobiParams;
use crate::recurrence::{
    cd_kernel_scaled, eval_orthonormal_with_derivative, gershgorin_bracket, CdMethod,
};
use crate::scalar::{cast, Real};

/// The zeros of p_n, sorted ascending, with the bracket and tolerance that
/// produced them. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet<R> {
    /// Polynomial degree; `zeros` has exactly this many entries.
    pub n: u32,
    /// Strictly increasing list of the n real zeros.
    pub zeros: Vec<R>,
    /// Interval guaranteed to contain every zero.
    pub bracket: (R, R),
    /// Bisection width each zero was resolved to.
    pub tol: R,
}

impl<R: Real> ZeroSet<R> {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// CSV with one row per zero; `digits` significant digits (>= 1).
    pub fn to_csv(&self, digits: usize) -> String {
        let prec = digits.max(1) - 1;
        let mut out = String::from("index,zero\n");
        for (i, z) in self.zeros.iter().enumerate() {
            out.push_str(&format!("{i},{z:.prec$e}\n"));
        }
        out
    }
}

/// Gauss quadrature derived from a zero set: the nodes are the zeros of p_n
/// and the weights are the Christoffel numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<R> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
}

impl<R: Real> Quadrature<R> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total mass reproduced by the rule.
    pub fn mass(&self) -> R {
        self.weights.iter().copied().sum()
    }

    /// Apply the rule to a function.
    pub fn integrate(&self, f: impl Fn(R) -> R) -> R {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// CSV with one row per node; `digits` significant digits (>= 1).
    pub fn to_csv(&self, digits: usize) -> String {
        let prec = digits.max(1) - 1;
        let mut out = String::from("index,node,weight\n");
        for (i, (x, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            out.push_str(&format!("{i},{x:.prec$e},{w:.prec$e}\n"));
        }
        out
    }
}

/// Symmetric-difference estimate of the density of zeros, with a flag that
/// warns when the window is too narrow to hold even one zero on average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosEstimate<R> {
    pub value: R,
    pub window: R,
    /// True when `window` is below the mean spacing of the zero set, i.e.
    /// the estimate is dominated by counting noise.
    pub under_resolved: bool,
}

/// Least-squares line through (log n, log K_n) points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit<R> {
    pub slope: R,
    pub intercept: R,
    /// Root-mean-square deviation of the points from the fitted line.
    pub residual: R,
}

/// Cached tridiagonal data for one truncation size: coefficient arrays, the
/// containing bracket, and the zero-pivot substitute.
struct Tridiag<R> {
    offdiag: Vec<R>,
    diag: Vec<R>,
    lo: R,
    hi: R,
    pivot_floor: R,
}

impl<R: Real> Tridiag<R> {
    fn build(params: &JacobiParams<R>, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition("eigenvalue counting needs n >= 1".into()));
        }
        let (lo, hi) = gershgorin_bracket(params, n)?;
        let offdiag: Vec<R> = (1..n).map(|j| params.a(j)).collect();
        let diag: Vec<R> = (1..=n).map(|j| params.b(j)).collect();
        let width = if hi > lo { hi - lo } else { R::one() };
        Ok(Tridiag { offdiag, diag, lo, hi, pivot_floor: R::min_positive_value() * width })
    }

    /// Number of eigenvalues strictly below `x`, by the sign count of the
    /// LDL^t pivots of J - x. An exactly zero pivot is replaced by
    /// +pivot_floor, which keeps an eigenvalue lying exactly on `x` out of
    /// the strict count; division blow-ups recover on the following step
    /// because 1/inf = 0.
    fn count_below(&self, x: R) -> u32 {
        let mut count = 0u32;
        let mut d = self.diag[0] - x;
        if d == R::zero() {
            d = self.pivot_floor;
        }
        if d < R::zero() {
            count += 1;
        }
        for j in 1..self.diag.len() {
            let e = self.offdiag[j - 1];
            d = (self.diag[j] - x) - e * e / d;
            if d == R::zero() {
                d = self.pivot_floor;
            }
            if d < R::zero() {
                count += 1;
            }
        }
        count
    }

    /// Bisect the k-th (0-based) eigenvalue to width <= tol, then polish
    /// with Newton steps that are clamped to the certified bracket.
    fn eigenvalue(&self, params: &JacobiParams<R>, n: u32, k: u32, tol: R) -> Result<R> {
        let (mut lo, mut hi) = (self.lo, self.hi);
        let mut iter = 0usize;
        while hi - lo > tol && iter < 256 {
            let mid = (lo + hi) * cast::<R>(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
        }
        let mut x = (lo + hi) * cast::<R>(0.5);
        for _ in 0..3 {
            let (p, d) = eval_orthonormal_with_derivative(params, n, x)?;
            let step = p[n as usize].mul(d[n as usize].recip()).to_real();
            if !step.is_finite() {
                break;
            }
            let next = x - step;
            if next < lo || next > hi {
                break;
            }
            x = next;
            if step.abs() < tol * cast::<R>(1e-3) {
                break;
            }
        }
        Ok(x)
    }
}

/// Number of eigenvalues of the order-n truncation strictly below `x`.
pub fn sturm_count<R: Real>(params: &JacobiParams<R>, n: u32, x: R) -> Result<u32> {
    Ok(Tridiag::build(params, n)?.count_below(x))
}

/// Default bisection tolerance: 1e-12 of the bracket width.
pub fn default_zero_tol<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<R> {
    let (lo, hi) = gershgorin_bracket(params, n)?;
    let width = if hi > lo { hi - lo } else { R::one() };
    Ok(cast::<R>(1e-12) * width)
}

/// All n zeros of p_n, each bisected to `tol` and Newton-polished, computed
/// in parallel across eigenvalue indices.
pub fn zeros<R: Real>(params: &JacobiParams<R>, n: u32, tol: R) -> Result<ZeroSet<R>> {
    if !(tol > R::zero()) || !tol.is_finite() {
        return Err(Error::Precondition("zero tolerance must be positive and finite".into()));
    }
    let tri = Tridiag::build(params, n)?;
    let mut zs: Vec<R> = (0..n)
        .into_par_iter()
        .map(|k| tri.eigenvalue(params, n, k, tol))
        .collect::<Result<Vec<R>>>()?;
    // Polish inside overlapping sub-tol brackets can reorder a near-degenerate
    // pair by less than tol; restore strict order without leaving the bracket.
    for k in 1..zs.len() {
        if zs[k] <= zs[k - 1] {
            zs[k] = zs[k - 1] + R::epsilon() * (R::one() + zs[k - 1].abs());
        }
    }
    Ok(ZeroSet { n, zeros: zs, bracket: (tri.lo, tri.hi), tol })
}

/// [`zeros`] at the default tolerance.
pub fn zeros_auto<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<ZeroSet<R>> {
    zeros(params, n, default_zero_tol(params, n)?)
}

/// The k-th (0-based, ascending) zero of p_n alone; O(n log(width/tol)).
pub fn zero_by_index<R: Real>(params: &JacobiParams<R>, n: u32, k: u32, tol: R) -> Result<R> {
    if k >= n {
        return Err(Error::Precondition(format!("zero index {k} out of range for degree {n}")));
    }
    if !(tol > R::zero()) || !tol.is_finite() {
        return Err(Error::Precondition("zero tolerance must be positive and finite".into()));
    }
    let tri = Tridiag::build(params, n)?;
    tri.eigenvalue(params, n, k, tol)
}

/// Closest zeros of p_n on each side of `e0`, without computing the full
/// zero set. A zero lying exactly on `e0` is reported on the lower side.
pub fn straddling_pair<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    e0: R,
    tol: R,
) -> Result<(R, R)> {
    let tri = Tridiag::build(params, n)?;
    let k = tri.count_below(e0);
    if k == n {
        return Err(Error::Precondition(format!("no zero above {e0}")));
    }
    let up = tri.eigenvalue(params, n, k, tol)?;
    if up <= e0 + tol {
        // The count was strict and e0 sits on a zero (to within the working
        // tolerance): that zero belongs below.
        if k + 1 == n {
            return Err(Error::Precondition(format!("no zero above {e0}")));
        }
        let next = tri.eigenvalue(params, n, k + 1, tol)?;
        Ok((up, next))
    } else {
        if k == 0 {
            return Err(Error::Precondition(format!("no zero below {e0}")));
        }
        let down = tri.eigenvalue(params, n, k - 1, tol)?;
        Ok((down, up))
    }
}

/// Value of the normalized zero-counting function at `e`: the fraction of
/// zeros at or below `e`.
pub fn dos_counting<R: Real>(zs: &ZeroSet<R>, e: R) -> R {
    let count = zs.zeros.partition_point(|&z| z <= e);
    cast::<R>(count as f64) / cast::<R>(zs.n as f64)
}

/// Default window for the density estimate: n^{-1/2}, wide enough to hold
/// about sqrt(n) zeros when the spacing is of order 1/n.
pub fn default_dos_window<R: Real>(n: u32) -> R {
    cast::<R>((n.max(1) as f64).powf(-0.5))
}

/// Symmetric difference quotient of the counting function over
/// [e - window, e + window].
pub fn dos_derivative<R: Real>(zs: &ZeroSet<R>, e: R, window: R) -> DosEstimate<R> {
    let two = cast::<R>(2.0);
    let value = (dos_counting(zs, e + window) - dos_counting(zs, e - window)) / (two * window);
    let mean_spacing = if zs.n >= 2 {
        let first = zs.zeros[0];
        let last = zs.zeros[zs.zeros.len() - 1];
        (last - first) / cast::<R>((zs.n - 1) as f64)
    } else {
        R::infinity()
    };
    DosEstimate { value, window, under_resolved: window < mean_spacing }
}

/// Gauss rule on the zeros of p_n: weight at each node is the reciprocal of
/// the diagonal kernel K_{n-1}, scaled by the recorded total mass.
pub fn christoffel_numbers<R: Real>(params: &JacobiParams<R>, n: u32) -> Result<Quadrature<R>> {
    let zs = zeros_auto(params, n)?;
    let weights: Vec<R> = zs
        .zeros
        .par_iter()
        .map(|&x| {
            let k = cd_kernel_scaled(params, n - 1, x, x, CdMethod::Sum)?;
            Ok(k.recip().to_real() * params.mass)
        })
        .collect::<Result<Vec<R>>>()?;
    Ok(Quadrature { nodes: zs.zeros, weights })
}

/// k-th moment of the measure, computed by applying the tridiagonal matrix
/// k times to the first basis vector; exact in exact arithmetic for any k.
pub fn moment<R: Real>(params: &JacobiParams<R>, k: u32) -> Result<R> {
    params.ensure_len(k + 1)?;
    params.validate(k + 1)?;
    let len = k as usize + 2;
    let mut v = vec![R::zero(); len];
    let mut w = vec![R::zero(); len];
    v[0] = R::one();
    for step in 0..k as usize {
        // After `step` applications the vector is supported on 0..=step, so
        // only rows up to step+1 can become nonzero; staying inside that
        // reach also keeps every coefficient index at or below k+1.
        let reach = (step + 1).min(len - 1);
        for i in 0..len {
            w[i] = if i <= reach {
                let mut s = params.b(i as u32 + 1) * v[i];
                if i > 0 {
                    s += params.a(i as u32) * v[i - 1];
                }
                if i + 1 < len && v[i + 1] != R::zero() {
                    s += params.a(i as u32 + 1) * v[i + 1];
                }
                s
            } else {
                R::zero()
            };
        }
        std::mem::swap(&mut v, &mut w);
    }
    Ok(v[0] * params.mass)
}

/// Compare the k-th moment of the measure with the k-th moment of the
/// n-point Gauss rule; returns (measure moment, rule moment, relative
/// residual). The rule is exact through degree 2n-1.
pub fn quadrature_exactness<R: Real>(
    params: &JacobiParams<R>,
    n: u32,
    k: u32,
) -> Result<(R, R, R)> {
    if k >= 2 * n {
        return Err(Error::Precondition(format!(
            "moment order {k}: exactness not guaranteed beyond degree {}",
            2 * n - 1
        )));
    }
    let lhs = moment(params, k)?;
    let quad = christoffel_numbers(params, n)?;
    let rhs = quad.integrate(|x| x.powi(k as i32));
    // Normalize by the absolute moment: the signed sums cancel down from
    // terms of size |x|^k, so that is the scale rounding noise lives on.
    let scale = R::one().max(lhs.abs()).max(quad.integrate(|x| x.abs().powi(k as i32)));
    let residual = (lhs - rhs).abs() / scale;
    Ok((lhs, rhs, residual))
}

/// Minimum of ∫|π|² dμ over degree-n polynomials with π(x0) = 1, i.e. the
/// reciprocal of the diagonal reproducing kernel (mass included).
pub fn christoffel_function<R: Real>(params: &JacobiParams<R>, n: u32, x0: R) -> Result<R> {
    let k = cd_kernel_scaled(params, n, x0, x0, CdMethod::Sum)?;
    Ok(k.recip().to_real() * params.mass)
}

/// Least-squares slope of log K_n(x0, x0) against log n over `n_list`.
pub fn kernel_growth_exponent<R: Real>(
    params: &JacobiParams<R>,
    x0: R,
    n_list: &[u32],
) -> Result<SlopeFit<R>> {
    if n_list.len() < 4 {
        return Err(Error::Precondition("slope fit needs at least 4 sizes".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] < 1 {
        return Err(Error::Precondition("sizes must be strictly increasing and >= 1".into()));
    }
    let ln_mass = params.mass.ln();
    let pts: Vec<(R, R)> = n_list
        .iter()
        .map(|&n| {
            let k = cd_kernel_scaled(params, n, x0, x0, CdMethod::Sum)?;
            Ok((cast::<R>((n as f64).ln()), k.ln_abs() - ln_mass))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = cast::<R>(pts.len() as f64);
    let xbar = pts.iter().map(|p| p.0).sum::<R>() / m;
    let ybar = pts.iter().map(|p| p.1).sum::<R>() / m;
    let sxx = pts.iter().map(|p| (p.0 - xbar) * (p.0 - xbar)).sum::<R>();
    let sxy = pts.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum::<R>();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum::<R>();
    Ok(SlopeFit { slope, intercept, residual: (ss / m).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, chebyshev_t, legendre, ModelSpec};
    use crate::recurrence::cd_kernel;
    use std::f64::consts::PI;

    fn free() -> JacobiParams<f64> {
        build_model(&ModelSpec::Free).unwrap()
    }

    fn free_zero_set(n: u32) -> ZeroSet<f64> {
        let zeros: Vec<f64> =
            (1..=n).rev().map(|k| 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
        ZeroSet { n, zeros, bracket: (-2.0, 2.0), tol: 1e-15 }
    }

    #[test]
    fn sturm_count_brackets_and_interior() {
        let p = free();
        assert_eq!(sturm_count(&p, 3, -3.0).unwrap(), 0);
        assert_eq!(sturm_count(&p, 3, 0.0).unwrap(), 1, "strict count at an exact eigenvalue");
        assert_eq!(sturm_count(&p, 3, 3.0).unwrap(), 3);
        assert_eq!(sturm_count(&p, 3, 1.0).unwrap(), 2);
    }

    #[test]
    fn sturm_count_is_monotone_across_an_eigenvalue() {
        let p = free();
        let h = 1e-9;
        for z in [-2.0_f64.sqrt(), 0.0, 2.0_f64.sqrt()] {
            let below = sturm_count(&p, 3, z - h).unwrap();
            let above = sturm_count(&p, 3, z + h).unwrap();
            assert!(below < above, "count must step up across zero {z}");
        }
    }

    #[test]
    fn free_zeros_match_cosine_closed_form() {
        for n in [3u32, 10, 100] {
            let zs = zeros_auto(&free(), n).unwrap();
            assert_eq!(zs.zeros.len(), n as usize);
            for (i, &z) in zs.zeros.iter().enumerate() {
                let k = n as usize - i; // ascending zeros come from descending k
                let expect = 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
                assert!((z - expect).abs() < zs.tol, "n={n} zero {i}: {z} vs {expect}");
            }
        }
    }

    #[test]
    fn resonant_zeros_sit_at_half_integer_phases() {
        let params = crate::models::resonant_defect::<f64>();
        let n = 9u32;
        let zs = zeros_auto(&params, n).unwrap();
        for (i, &z) in zs.zeros.iter().enumerate() {
            let k = n as usize - i;
            let expect = 2.0 * ((k as f64 - 0.5) * PI / n as f64).cos();
            assert!((z - expect).abs() < 1e-10, "zero {i}: {z} vs {expect}");
        }
    }

    #[test]
    fn zero_sets_satisfy_their_invariants() {
        let params = build_model::<f64>(&ModelSpec::l1_canonical()).unwrap();
        let n = 40u32;
        let zs = zeros_auto(&params, n).unwrap();
        assert_eq!(zs.zeros.len(), n as usize);
        for w in zs.zeros.windows(2) {
            assert!(w[1] > w[0], "zeros must be strictly increasing");
        }
        for &z in &zs.zeros {
            assert!(z >= zs.bracket.0 && z <= zs.bracket.1);
            let below = sturm_count(&params, n, z - zs.tol).unwrap();
            let above = sturm_count(&params, n, z + zs.tol).unwrap();
            assert!(below < above, "zero {z} not certified by the count");
        }
    }

    #[test]
    fn consecutive_degrees_interlace() {
        for spec in [ModelSpec::Free, ModelSpec::l1_canonical(), ModelSpec::bv_canonical()] {
            let params = build_model::<f64>(&spec).unwrap();
            let lo = zeros_auto(&params, 24).unwrap();
            let hi = zeros_auto(&params, 25).unwrap();
            for i in 0..24usize {
                assert!(
                    hi.zeros[i] < lo.zeros[i] && lo.zeros[i] < hi.zeros[i + 1],
                    "interlacing fails at {i}"
                );
            }
        }
    }

    #[test]
    fn single_site_truncation_returns_its_diagonal() {
        let params = build_model::<f64>(&ModelSpec::Periodic { a: vec![1.0], b: vec![0.7] }).unwrap();
        let zs = zeros_auto(&params, 1).unwrap();
        assert_eq!(zs.zeros.len(), 1);
        assert!((zs.zeros[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn straddling_pair_matches_full_zero_set() {
        let p = free();
        let n = 10u32;
        let zs = zeros_auto(&p, n).unwrap();
        let tol = zs.tol;
        let e0 = 0.1;
        let (lo, hi) = straddling_pair(&p, n, e0, tol).unwrap();
        let idx = zs.zeros.partition_point(|&z| z <= e0);
        assert!((lo - zs.zeros[idx - 1]).abs() < 2.0 * tol);
        assert!((hi - zs.zeros[idx]).abs() < 2.0 * tol);
        // A zero lying exactly on e0 is reported on the lower side.
        let at_zero = zs.zeros[6];
        let (lo2, hi2) = straddling_pair(&p, n, at_zero, tol).unwrap();
        assert!((lo2 - at_zero).abs() < 100.0 * tol, "{lo2} vs {at_zero}");
        assert!(hi2 > at_zero);
        assert!(straddling_pair(&p, n, 5.0, tol).is_err());
        assert!(straddling_pair(&p, n, -5.0, tol).is_err());
    }

    #[test]
    fn counting_function_steps_from_zero_to_one() {
        let zs = free_zero_set(11);
        assert_eq!(dos_counting(&zs, -3.0), 0.0);
        assert_eq!(dos_counting(&zs, 3.0), 1.0);
        // 11 zeros with the middle one at the band center: inclusive just
        // above it, exclusive just below.
        assert!((dos_counting(&zs, 1e-12) - 6.0 / 11.0).abs() < 1e-15);
        assert!((dos_counting(&zs, -1e-12) - 5.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn density_estimate_matches_arcsine_law() {
        let n = 10_000u32;
        let zs = free_zero_set(n);
        let w = default_dos_window::<f64>(n);
        let at0 = dos_derivative(&zs, 0.0, w);
        assert!(!at0.under_resolved);
        let expect0 = 1.0 / (2.0 * PI);
        assert!((at0.value - expect0).abs() < 0.02 * expect0, "{} vs {expect0}", at0.value);
        let at1 = dos_derivative(&zs, 1.0, w);
        let expect1 = 1.0 / (PI * 3.0_f64.sqrt());
        assert!((at1.value - expect1).abs() < 0.02 * expect1, "{} vs {expect1}", at1.value);
        let outside = dos_derivative(&zs, 2.5, w);
        assert_eq!(outside.value, 0.0);
    }

    #[test]
    fn narrow_window_raises_the_resolution_flag() {
        let zs = free_zero_set(50);
        let est = dos_derivative(&zs, 0.3, 1e-6);
        assert!(est.under_resolved);
        let wide = dos_derivative(&zs, 0.3, 0.5);
        assert!(!wide.under_resolved);
    }

    #[test]
    fn free_three_point_rule_has_quarter_half_quarter_weights() {
        let quad = christoffel_numbers(&free(), 3).unwrap();
        let expect = [0.25, 0.5, 0.25];
        for (w, e) in quad.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-12, "{w} vs {e}");
        }
        assert!((quad.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_rule_has_equal_weights() {
        let params = chebyshev_t::<f64>();
        let n = 7u32;
        let quad = christoffel_numbers(&params, n).unwrap();
        for w in &quad.weights {
            assert!((w - 1.0 / n as f64).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn rule_mass_equals_recorded_measure_mass() {
        let base = build_model::<f64>(&ModelSpec::l1_canonical()).unwrap();
        let quad = christoffel_numbers(&base, 12).unwrap();
        assert!((quad.mass() - 1.0).abs() < 1e-10);
        let scaled = base.clone().with_mass(3.5);
        let quad2 = christoffel_numbers(&scaled, 12).unwrap();
        assert!((quad2.mass() - 3.5).abs() < 1e-9);
    }

    #[test]
    fn low_moments_recover_recursion_coefficients() {
        let params = build_model::<f64>(&ModelSpec::bv_canonical()).unwrap();
        let (m0, r0, res0) = quadrature_exactness(&params, 6, 0).unwrap();
        assert!((m0 - 1.0).abs() < 1e-14 && (r0 - 1.0).abs() < 1e-10);
        assert!(res0 < 1e-10);
        let (m1, _, res1) = quadrature_exactness(&params, 6, 1).unwrap();
        assert!((m1 - params.b(1)).abs() < 1e-14);
        assert!(res1 < 1e-10);
    }

    #[test]
    fn gauss_rule_is_exact_through_degree_cap() {
        let params = build_model::<f64>(&ModelSpec::l1_canonical()).unwrap();
        let n = 12u32;
        for k in 0..2 * n {
            let (_, _, res) = quadrature_exactness(&params, n, k).unwrap();
            assert!(res < 1e-10, "k={k}: residual {res}");
        }
        let err = quadrature_exactness(&params, n, 2 * n).unwrap_err();
        assert!(err.to_string().contains("exactness not guaranteed"));
    }

    #[test]
    fn free_high_moment_matches_catalan_count() {
        // Moments of the arcsine-type measure: m_{2j} = Catalan(j) for the
        // half-band normalization used here (m_2 = 1, m_4 = 2, m_6 = 5).
        let p = free();
        assert!((moment(&p, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!((moment(&p, 4).unwrap() - 2.0).abs() < 1e-14);
        assert!((moment(&p, 6).unwrap() - 5.0).abs() < 1e-14);
        let (_, _, res) = quadrature_exactness(&p, 5, 9).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn christoffel_function_closed_forms() {
        let t = chebyshev_t::<f64>();
        for n in [1u32, 4, 9] {
            let lam = christoffel_function(&t, n, 1.0).unwrap();
            assert!((lam - 1.0 / (2.0 * n as f64 + 1.0)).abs() < 1e-12);
        }
        let f = free();
        for n in [2u32, 5, 8] {
            let lam = christoffel_function(&f, n, 0.0).unwrap();
            assert!((lam - 1.0 / ((n / 2) as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_the_measure_doubles_the_christoffel_function() {
        let base = build_model::<f64>(&ModelSpec::l1_canonical()).unwrap();
        let doubled = base.clone().with_mass(2.0);
        let lam1 = christoffel_function(&base, 9, 0.2).unwrap();
        let lam2 = christoffel_function(&doubled, 9, 0.2).unwrap();
        assert!((lam2 - 2.0 * lam1).abs() < 1e-14);
    }

    #[test]
    fn kernel_at_distinct_zeros_vanishes() {
        let p = free();
        let n = 8u32;
        let zs = zeros_auto(&p, n).unwrap();
        let diag = cd_kernel(&p, n - 1, zs.zeros[0], zs.zeros[0], CdMethod::Sum).unwrap();
        for i in 1..n as usize {
            let off = cd_kernel(&p, n - 1, zs.zeros[0], zs.zeros[i], CdMethod::Sum).unwrap();
            assert!(off.abs() < 1e-9 * diag, "K(x0, x{i}) = {off}");
        }
    }

    #[test]
    fn lebesgue_weight_keeps_scaled_christoffel_function_bounded() {
        let params = legendre::<f64>();
        let mut values = Vec::new();
        for n in [10u32, 50, 100, 250, 500] {
            let lam = christoffel_function(&params, n, 0.0).unwrap();
            values.push(n as f64 * lam);
        }
        for &v in &values {
            assert!(v > 0.5, "n*lambda_n(0) = {v} lost its floor");
        }
        let spread = values.iter().cloned().fold(f64::MIN, f64::max)
            / values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1.5, "n*lambda_n(0) drifts: {values:?}");
    }

    #[test]
    fn growth_exponent_tracks_kernel_scaling() {
        let sizes = [50u32, 100, 200, 400];
        let fit_free = kernel_growth_exponent(&free(), 0.0, &sizes).unwrap();
        assert!((fit_free.slope - 1.0).abs() < 0.05, "free slope {}", fit_free.slope);
        let fit_t = kernel_growth_exponent(&chebyshev_t::<f64>(), 1.0, &sizes).unwrap();
        assert!((fit_t.slope - 1.0).abs() < 0.05, "endpoint slope {}", fit_t.slope);
        assert!(fit_t.residual < 0.05);
    }

    #[test]
    fn growth_exponent_of_vanishing_weight_exceeds_linear() {
        let table =
            crate::models::stieltjes_from_weight(&|x: f64| x.abs().sqrt(), (-1.0, 1.0), 410)
                .unwrap();
        let params = table.into_params("sqrt-abs weight").unwrap();
        let fit = kernel_growth_exponent(&params, 0.0, &[50, 100, 200, 400]).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.1, "slope {}", fit.slope);
    }

    #[test]
    fn halving_the_measure_doubles_the_diagonal_kernel() {
        // Monotonicity of the kernel in the measure, checked through the
        // mass-aware Christoffel function on a small grid.
        let base = build_model::<f64>(&ModelSpec::bv_canonical()).unwrap();
        let doubled = base.clone().with_mass(2.0);
        for x0 in [-1.3, -0.4, 0.0, 0.8, 1.6] {
            let k_base = 1.0 / christoffel_function(&base, 10, x0).unwrap();
            let k_doubled = 1.0 / christoffel_function(&doubled, 10, x0).unwrap();
            assert!(k_doubled <= k_base, "kernel must shrink when the measure grows");
        }
    }

    #[test]
    fn csv_serialization_round_trips_through_text() {
        let zs = zeros_auto(&free(), 4).unwrap();
        let csv = zs.to_csv(17);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("index,zero"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        for (i, row) in rows.iter().enumerate() {
            let mut parts = row.split(',');
            assert_eq!(parts.next().unwrap(), i.to_string());
            let val: f64 = parts.next().unwrap().parse().unwrap();
            assert_eq!(val, zs.zeros[i], "17 significant digits must round-trip");
        }
        let quad = christoffel_numbers(&free(), 3).unwrap();
        let qcsv = quad.to_csv(17);
        assert!(qcsv.starts_with("index,node,weight\n"));
        assert_eq!(qcsv.lines().count(), 4);
    }
}
