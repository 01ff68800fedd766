//! Chebyshev evaluation, concentrated trial polynomials, derivative
//! inequality checks, and the two-node trial construction behind the
//! quadrature gap bound.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cast, pi, Real};
use crate::scaled::Scaled;

/// Chebyshev polynomial of the first kind by the three-term recurrence;
/// defined for every real x (hyperbolic growth outside [-1, 1]).
pub fn cheb_t<R: Real>(n: u32, x: R) -> R {
    if n == 0 {
        return R::one();
    }
    let two = cast::<R>(2.0);
    let mut prev = R::one();
    let mut cur = x;
    for _ in 1..n {
        let next = two * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Polynomial of degree 2n-2 equal to 1 at its center and uniformly small a
/// distance ~a/n away: the alternating average of even Chebyshev
/// polynomials, rescaled from [-1, 1] to [x0 - a, x0 + a].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPoly<R> {
    /// Polynomial degree, 2n - 2.
    pub degree: u32,
    pub center: R,
    pub scale: R,
    n: u32,
}

impl<R: Real> TrialPoly<R> {
    pub fn value(&self, x: R) -> R {
        dirichlet_value(self.n, (x - self.center) / self.scale)
    }

    /// Pointwise bound min(1, 1/(2n) + a/(2n|x-x0|)), valid on
    /// |x - x0| <= a.
    pub fn envelope(&self, x: R) -> R {
        let two_n = cast::<R>(2.0 * self.n as f64);
        let dist = (x - self.center).abs();
        if dist == R::zero() {
            return R::one();
        }
        R::one().min(two_n.recip() + self.scale / (two_n * dist))
    }
}

/// Value of the unscaled trial polynomial D_n(u) = (1/n) sum of
/// (-1)^j T_{2j}(u) over j < n, by one pass of the Chebyshev recurrence.
fn dirichlet_value<R: Real>(n: u32, u: R) -> R {
    let two = cast::<R>(2.0);
    let mut acc = R::one(); // j = 0 term, T_0 = 1
    let mut prev = R::one();
    let mut cur = u;
    let mut sign = R::one();
    for k in 2..=2 * (n as usize).saturating_sub(1) {
        let next = two * u * cur - prev;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            sign = -sign;
            acc += sign * cur;
        }
    }
    acc / cast::<R>(n as f64)
}

/// Trigonometric form of the same polynomial on the band,
/// D_n(cos t) = 1/(2n) + (-1)^{n-1} cos((2n-1)t) / (2n cos t); blows up only
/// at cos t = 0, where the polynomial form stays finite.
pub fn dirichlet_cosine_form<R: Real>(n: u32, theta: R) -> R {
    let two_n = cast::<R>(2.0 * n as f64);
    let sign = if n % 2 == 1 { R::one() } else { -R::one() };
    let order = cast::<R>(2.0 * n as f64 - 1.0);
    two_n.recip() + sign * (order * theta).cos() / (two_n * theta.cos())
}

/// Concentrated trial polynomial centered at `x0` with window half-width `a`.
pub fn dirichlet_trial<R: Real>(n: u32, x0: R, a: R) -> Result<TrialPoly<R>> {
    if n < 1 {
        return Err(Error::Precondition("trial polynomial needs n >= 1".into()));
    }
    if !(a > R::zero()) || !a.is_finite() {
        return Err(Error::Precondition("trial window half-width must be positive".into()));
    }
    Ok(TrialPoly { degree: 2 * n - 2, center: x0, scale: a, n })
}

/// Where the weighted-derivative supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BernsteinMode<R> {
    /// sup |p'| <= n sup |p| over the unit circle.
    Circle,
    /// sup sqrt(a^2 - x^2) |p'| <= 3n sup |p| over [-a, a].
    Interval { half_width: R },
}

/// Measured sharpness of the derivative inequality for one polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinReport<R> {
    /// Weighted derivative supremum divided by its proven ceiling; at most 1
    /// (up to grid slack) when the inequality holds.
    pub ratio: R,
    pub sup_weighted_derivative: R,
    pub sup_value: R,
    pub degree: u32,
}

/// Evaluate `sup` estimates of a polynomial (monomial coefficients, constant
/// term first) and its derivative, and report the inequality ratio.
pub fn bernstein_check<R: Real>(coeffs: &[R], mode: BernsteinMode<R>) -> Result<BernsteinReport<R>> {
    if coeffs.is_empty() {
        return Err(Error::Precondition("empty coefficient list".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Precondition("non-finite polynomial coefficient".into()));
    }
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree] == R::zero() {
        degree -= 1;
    }
    let coeffs = &coeffs[..=degree];
    let n = cast::<R>(degree.max(1) as f64);
    const GRID: usize = 4096;
    let (sup_d, sup_v, ceiling) = match mode {
        BernsteinMode::Circle => {
            let step = cast::<R>(2.0) * pi::<R>() / cast::<R>(GRID as f64);
            let value = |t: R| horner_complex(coeffs, t).0;
            let deriv = |t: R| horner_complex(coeffs, t).1;
            let sup_v = grid_sup_periodic(&value, step, GRID);
            let sup_d = grid_sup_periodic(&deriv, step, GRID);
            (sup_d, sup_v, n * sup_v)
        }
        BernsteinMode::Interval { half_width: a } => {
            if !(a > R::zero()) || !a.is_finite() {
                return Err(Error::Precondition("interval half-width must be positive".into()));
            }
            let value = |x: R| horner_real(coeffs, x).0.abs();
            let weighted = move |x: R| {
                let w2 = (a * a - x * x).max(R::zero());
                horner_real(coeffs, x).1.abs() * w2.sqrt()
            };
            let sup_v = grid_sup_interval(&value, -a, a, GRID);
            let sup_d = grid_sup_interval(&weighted, -a, a, GRID);
            (sup_d, sup_v, cast::<R>(3.0) * n * sup_v)
        }
    };
    let ratio = if sup_d == R::zero() { R::zero() } else { sup_d / ceiling };
    Ok(BernsteinReport { ratio, sup_weighted_derivative: sup_d, sup_value: sup_v, degree: degree as u32 })
}

/// |p(e^{it})| and |p'(e^{it})| by complex Horner evaluation.
fn horner_complex<R: Real>(coeffs: &[R], t: R) -> (R, R) {
    let z = Complex::new(t.cos(), t.sin());
    let mut p = Complex::new(R::zero(), R::zero());
    let mut dp = Complex::new(R::zero(), R::zero());
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, R::zero());
    }
    (p.norm(), dp.norm())
}

/// p(x) and p'(x) by real Horner evaluation.
fn horner_real<R: Real>(coeffs: &[R], x: R) -> (R, R) {
    let mut p = R::zero();
    let mut dp = R::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Supremum of a periodic function sampled on `count` points of period
/// `step * count`, sharpened by a parabolic pass through each local maximum.
fn grid_sup_periodic<R: Real>(f: &dyn Fn(R) -> R, step: R, count: usize) -> R {
    let vals: Vec<R> = (0..count).map(|i| f(step * cast::<R>(i as f64))).collect();
    let mut sup = R::zero();
    for i in 0..count {
        let prev = vals[(i + count - 1) % count];
        let next = vals[(i + 1) % count];
        sup = sup.max(vals[i]);
        if vals[i] >= prev && vals[i] >= next {
            let x1 = step * cast::<R>(i as f64);
            let t = parabola_vertex(x1 - step, prev, x1, vals[i], x1 + step, next);
            sup = sup.max(f(t));
        }
    }
    sup
}

/// Supremum over [lo, hi] on an inclusive uniform grid, sharpened at interior
/// local maxima by a parabolic pass.
fn grid_sup_interval<R: Real>(f: &dyn Fn(R) -> R, lo: R, hi: R, count: usize) -> R {
    let step = (hi - lo) / cast::<R>(count as f64 - 1.0);
    let vals: Vec<R> = (0..count).map(|i| f(lo + step * cast::<R>(i as f64))).collect();
    let mut sup = R::neg_infinity();
    for i in 0..count {
        sup = sup.max(vals[i]);
        if i > 0 && i + 1 < count && vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let x1 = lo + step * cast::<R>(i as f64);
            let t = parabola_vertex(x1 - step, vals[i - 1], x1, vals[i], x1 + step, vals[i + 1]);
            sup = sup.max(f(t.max(lo).min(hi)));
        }
    }
    sup
}

/// Abscissa of the vertex of the parabola through three points; falls back
/// to the middle point when they are collinear.
fn parabola_vertex<R: Real>(x0: R, v0: R, x1: R, v1: R, x2: R, v2: R) -> R {
    let d0 = (v1 - v0) / (x1 - x0);
    let d1 = (v2 - v1) / (x2 - x1);
    let curature = d1 - d0;
    if curature == R::zero() {
        return x1;
    }
    let vertex = (x0 + x1) * cast::<R>(0.5) - d0 * (x2 - x0) / (cast::<R>(2.0) * curature);
    if vertex.is_finite() {
        vertex.max(x0).min(x2)
    } else {
        x1
    }
}

/// Polynomial of degree < len(nodes) that vanishes at every node except a
/// chosen adjacent pair, equals 1 at both pair nodes, and stays >= 1 between
/// them. Values are computed as scaled root products, so node sets of any
/// size stay inside the exponent budget.
#[derive(Debug, Clone)]
pub struct OffdiagTrial<R: Real> {
    nodes: Vec<R>,
    /// Indices (j, j+1) of the distinguished pair.
    pub pair: (usize, usize),
    /// The balancing root added when the bare node product is lopsided;
    /// always outside the closed pair interval.
    pub extra_root: Option<R>,
    norm: Scaled<R>,
    pub degree: u32,
}

impl<R: Real> OffdiagTrial<R> {
    pub fn value(&self, x: R) -> R {
        let mut acc = Scaled::new(R::one());
        for (l, &node) in self.nodes.iter().enumerate() {
            if l != self.pair.0 && l != self.pair.1 {
                acc = acc.mul(Scaled::new(x - node));
            }
        }
        if let Some(y) = self.extra_root {
            acc = acc.mul(Scaled::new(x - y));
        }
        acc.mul(self.norm.recip()).to_real()
    }
}

/// Build the two-node trial polynomial for the pair (xs[j], xs[j+1]).
///
/// The bare product over the other nodes already vanishes correctly; if its
/// values at the two pair nodes differ, one more root y — the solution of
/// the linear balance equation (x_j - y) p0(x_j) = (x_{j+1} - y) p0(x_{j+1})
/// — equalizes them, and the sign structure places y strictly outside
/// [x_j, x_{j+1}].
pub fn offdiag_trial<R: Real>(xs: &[R], j: usize) -> Result<OffdiagTrial<R>> {
    if xs.len() < 2 {
        return Err(Error::Precondition("need at least two nodes".into()));
    }
    if j + 1 >= xs.len() {
        return Err(Error::Precondition(format!(
            "pair index {j} out of range for {} nodes",
            xs.len()
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("nodes must be finite and strictly increasing".into()));
    }
    let product_at = |x: R| {
        let mut acc = Scaled::new(R::one());
        for (l, &node) in xs.iter().enumerate() {
            if l != j && l != j + 1 {
                acc = acc.mul(Scaled::new(x - node));
            }
        }
        acc
    };
    let at_j = product_at(xs[j]);
    let at_j1 = product_at(xs[j + 1]);
    let ratio = at_j.mul(at_j1.recip()).to_real();
    let roots = xs.len() as u32 - 2;
    if (ratio - R::one()).abs() <= cast::<R>(1e-12) {
        return Ok(OffdiagTrial {
            nodes: xs.to_vec(),
            pair: (j, j + 1),
            extra_root: None,
            norm: at_j,
            degree: roots,
        });
    }
    let y = (xs[j + 1] - xs[j] * ratio) / (R::one() - ratio);
    let norm = at_j.mul(Scaled::new(xs[j] - y));
    Ok(OffdiagTrial {
        nodes: xs.to_vec(),
        pair: (j, j + 1),
        extra_root: Some(y),
        norm,
        degree: roots + 1,
    })
}
