//! Quadrature helpers: Gauss-Legendre rules, graded composite panels, and
//! adaptive Simpson integration.

use crate::error::{Error, Result};
use crate::scalar::{cast, pi, Real};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre three-term recurrence from the usual
/// cosine initial guesses; accurate to a few ulps for the sizes used here.
pub fn gauss_legendre<R: Real>(n: usize) -> (Vec<R>, Vec<R>) {
    assert!(n >= 1);
    let mut nodes = vec![R::zero(); n];
    let mut weights = vec![R::zero(); n];
    let nf = cast::<R>(n as f64);
    for i in 0..n {
        let mut x = (pi::<R>() * (cast::<R>(i as f64) + cast(0.75)) / (nf + cast(0.5))).cos();
        let mut dp = R::one();
        for _ in 0..100 {
            // p0, p1 hold P_{k-1}, P_k after each step.
            let mut p0 = R::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = cast::<R>(k as f64);
                let p2 = ((cast::<R>(2.0) * kf - R::one()) * x * p1 - (kf - R::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - R::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= cast::<R>(1e-3) * R::epsilon() * (R::one() + x.abs()) {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = cast::<R>(2.0) / ((R::one() - x * x) * dp * dp);
    }
    // The cosine guesses enumerate nodes in descending order.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Panel layout on [c, d]: uniform base panels, with the origin inserted as a
/// breakpoint when it lies inside. Panels whose edges are both singular
/// anchors (support endpoints or the interior origin) are split so every
/// panel touches at most one anchor.
fn panel_breakpoints<R: Real>(c: R, d: R, base_panels: usize) -> Vec<R> {
    let width = d - c;
    let mut pts: Vec<R> = (0..=base_panels)
        .map(|i| {
            if i == base_panels {
                d
            } else {
                c + width * cast::<R>(i as f64 / base_panels as f64)
            }
        })
        .collect();
    let origin_inside = c < R::zero() && d > R::zero();
    if origin_inside {
        pts.push(R::zero());
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| *a == *b);
    let is_anchor = |x: R| x == c || x == d || (origin_inside && x == R::zero());
    let mut out: Vec<R> = Vec::with_capacity(pts.len() + 2);
    for (i, &p) in pts.iter().enumerate() {
        out.push(p);
        if i + 1 < pts.len() && is_anchor(p) && is_anchor(pts[i + 1]) {
            out.push((p + pts[i + 1]) * cast::<R>(0.5));
        }
    }
    out
}

/// Composite Gauss-Legendre discretization of a weight function: returns
/// (nodes, weights) of a positive discrete measure with the same moments.
///
/// Panels adjacent to the support endpoints or to an interior origin are
/// integrated under the substitution x = anchor ± u^2, which turns
/// integrable algebraic singularities like (x - c)^a (a >= -1/2) into smooth
/// bounded integrands and keeps quadrature nodes representably far from the
/// singular point. Remaining panels see a smooth weight and use the plain
/// rule.
pub fn discretize_weight<R: Real>(
    w: &dyn Fn(R) -> R,
    support: (R, R),
    base_panels: usize,
    points_per_panel: usize,
) -> Result<(Vec<R>, Vec<R>)> {
    let (c, d) = support;
    if !(d > c) || !c.is_finite() || !d.is_finite() {
        return Err(Error::Precondition(format!("empty support [{c}, {d}]")));
    }
    let origin_inside = c < R::zero() && d > R::zero();
    let is_anchor = |x: R| x == c || x == d || (origin_inside && x == R::zero());
    let breaks = panel_breakpoints(c, d, base_panels.max(2));
    let (gx, gw) = gauss_legendre::<R>(points_per_panel);
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * points_per_panel);
    let mut weights = Vec::with_capacity(nodes.capacity());
    let half = cast::<R>(0.5);
    let two = cast::<R>(2.0);
    let mut add = |node: R, weight: R| -> Result<()> {
        let value = w(node);
        if !value.is_finite() || value < R::zero() {
            return Err(Error::BadWeight {
                x: node.to_f64().unwrap_or(f64::NAN),
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
        nodes.push(node);
        weights.push(weight * value);
        Ok(())
    };
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if is_anchor(a) || is_anchor(b) {
            let (anchor, far) = if is_anchor(a) { (a, b) } else { (b, a) };
            let u_end = (b - a).abs().sqrt();
            let rad_u = u_end * half;
            for (&x, &wt) in gx.iter().zip(&gw) {
                let u = rad_u * (R::one() + x);
                let offset = u * u;
                let node = if far > anchor { anchor + offset } else { anchor - offset };
                add(node, wt * rad_u * two * u)?;
            }
        } else {
            let mid = (a + b) * half;
            let rad = (b - a) * half;
            for (&x, &wt) in gx.iter().zip(&gw) {
                add(mid + rad * x, wt * rad)?;
            }
        }
    }
    Ok((nodes, weights))
}

/// Adaptive Simpson integration to an absolute tolerance.
pub fn adaptive_simpson<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    tol: R,
    max_depth: usize,
) -> Result<R> {
    fn simpson<R: Real>(f: &dyn Fn(R) -> R, a: R, fa: R, b: R, fb: R) -> (R, R, R) {
        let m = (a + b) * cast::<R>(0.5);
        let fm = f(m);
        let s = (b - a) / cast::<R>(6.0) * (fa + cast::<R>(4.0) * fm + fb);
        (m, fm, s)
    }
    fn rec<R: Real>(
        f: &dyn Fn(R) -> R,
        a: R,
        fa: R,
        b: R,
        fb: R,
        m: R,
        fm: R,
        whole: R,
        tol: R,
        depth: usize,
    ) -> Result<R> {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= cast::<R>(15.0) * tol {
            return Ok(left + right + delta / cast::<R>(15.0));
        }
        if depth == 0 {
            return Err(Error::RefinementCap(format!(
                "adaptive Simpson on [{a}, {b}], residual {:e}",
                delta.abs()
            )));
        }
        let half_tol = tol * cast::<R>(0.5);
        let l = rec(f, a, fa, m, fm, lm, flm, left, half_tol, depth - 1)?;
        let r = rec(f, m, fm, b, fb, rm, frm, right, half_tol, depth - 1)?;
        Ok(l + r)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth)
}
