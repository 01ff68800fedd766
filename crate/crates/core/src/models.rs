//! Recursion-coefficient models.
//!
//! A [`JacobiParams`] is the pair of sequences (a_n, b_n), n >= 1, driving the
//! orthonormal three-term recurrence; a_0 is pinned to 1. Models are either
//! closed-form families ([`ModelSpec`]) or coefficient tables produced from a
//! weight function by the discretized Stieltjes procedure
//! ([`stieltjes_from_weight`]). [`VerblunskyParams`] is the unit-circle
//! analogue: a sequence of reflection coefficients with |alpha_k| < 1.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::discretize_weight;
use crate::scalar::{cast, Real};

/// Deterministic counter-based random draws.
///
/// Every draw is a pure function of (seed, index): the same pair always maps
/// to the same bits, on every platform, regardless of query order or thread
/// count.
pub mod rng {
    /// 64-bit avalanche finalizer (splitmix64).
    #[inline]
    pub fn mix64(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Raw 64 bits for (seed, index).
    #[inline]
    pub fn draw(seed: u64, index: u64) -> u64 {
        let stream = mix64(index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03));
        mix64(seed ^ stream)
    }

    /// Uniform draw in [-1, 1) for (seed, index).
    #[inline]
    pub fn uniform_symmetric(seed: u64, index: u64) -> f64 {
        let u = draw(seed, index) >> 11; // 53 random bits
        (u as f64) * (2.0 / 9_007_199_254_740_992.0) - 1.0
    }
}

type SeqFn<R> = Arc<dyn Fn(u32) -> R + Send + Sync>;

/// Off-diagonal / diagonal recursion coefficients a_n > 0, b_n (n >= 1).
///
/// Accessors are deterministic: repeated queries at the same index return
/// bit-identical values. `a(0)` is the fixed boundary constant 1.
pub struct JacobiParams<R: Real> {
    a: SeqFn<R>,
    b: SeqFn<R>,
    /// Human-readable provenance, carried into reports.
    pub descriptor: String,
    /// Total mass of the underlying measure. 1 for normalized families; the
    /// Stieltjes constructor records the original mass here after
    /// normalizing.
    pub mass: R,
    /// Highest valid index for table-backed sequences; `None` when the
    /// sequence is defined for every index.
    pub max_index: Option<u32>,
}

impl<R: Real> Clone for JacobiParams<R> {
    fn clone(&self) -> Self {
        JacobiParams {
            a: Arc::clone(&self.a),
            b: Arc::clone(&self.b),
            descriptor: self.descriptor.clone(),
            mass: self.mass,
            max_index: self.max_index,
        }
    }
}

impl<R: Real> std::fmt::Debug for JacobiParams<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiParams")
            .field("descriptor", &self.descriptor)
            .field("mass", &self.mass)
            .field("max_index", &self.max_index)
            .finish()
    }
}

impl<R: Real> JacobiParams<R> {
    /// Boundary constant a_0.
    #[inline]
    pub fn a0(&self) -> R {
        R::one()
    }

    /// Off-diagonal coefficient a_n (n >= 1); a_0 is served as the boundary
    /// constant so traces can index uniformly.
    #[inline]
    pub fn a(&self, n: u32) -> R {
        if n == 0 {
            return R::one();
        }
        self.bounds_check(n);
        (self.a)(n)
    }

    /// Diagonal coefficient b_n (n >= 1).
    #[inline]
    pub fn b(&self, n: u32) -> R {
        assert!(n >= 1, "diagonal index starts at 1");
        self.bounds_check(n);
        (self.b)(n)
    }

    #[inline]
    fn bounds_check(&self, n: u32) {
        if let Some(len) = self.max_index {
            assert!(
                n <= len,
                "parameter index {n} beyond table length {len} ({}); callers must ensure_len first",
                self.descriptor
            );
        }
    }

    /// Errors when a table-backed sequence cannot serve indices up to
    /// `needed`.
    pub fn ensure_len(&self, needed: u32) -> Result<()> {
        match self.max_index {
            Some(len) if len < needed => Err(Error::TableTooShort { needed, len }),
            _ => Ok(()),
        }
    }

    /// Checks finiteness and positivity over 1..=up_to. Operation entry
    /// points run this once so that closure-built parameters cannot smuggle
    /// a non-positive off-diagonal into a recurrence.
    pub fn validate(&self, up_to: u32) -> Result<()> {
        self.ensure_len(up_to)?;
        for n in 1..=up_to {
            let a = (self.a)(n);
            let b = (self.b)(n);
            if !(a > R::zero()) || !a.is_finite() {
                return Err(Error::InvalidModel {
                    field: "a",
                    message: format!("a({n}) = {a} must be positive and finite"),
                });
            }
            if !b.is_finite() {
                return Err(Error::InvalidModel {
                    field: "b",
                    message: format!("b({n}) = {b} must be finite"),
                });
            }
        }
        Ok(())
    }

    /// Build from closures. The constructor trusts the closures; operations
    /// validate the prefix they use.
    pub fn from_fns(
        a: impl Fn(u32) -> R + Send + Sync + 'static,
        b: impl Fn(u32) -> R + Send + Sync + 'static,
        descriptor: impl Into<String>,
    ) -> Self {
        JacobiParams {
            a: Arc::new(a),
            b: Arc::new(b),
            descriptor: descriptor.into(),
            mass: R::one(),
            max_index: None,
        }
    }

    /// Build from coefficient tables (index n served by `a[n-1]`, `b[n-1]`).
    pub fn from_table(a: Vec<R>, b: Vec<R>, descriptor: impl Into<String>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidModel {
                field: "table",
                message: format!("need equal nonempty columns, got {} and {}", a.len(), b.len()),
            });
        }
        for (i, &x) in a.iter().enumerate() {
            if !(x > R::zero()) || !x.is_finite() {
                return Err(Error::InvalidModel {
                    field: "a",
                    message: format!("a({}) = {x} must be positive and finite", i + 1),
                });
            }
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel { field: "b", message: "non-finite diagonal entry".into() });
        }
        let len = a.len() as u32;
        let (a, b) = (Arc::new(a), Arc::new(b));
        Ok(JacobiParams {
            a: Arc::new(move |n| a[(n - 1) as usize]),
            b: Arc::new(move |n| b[(n - 1) as usize]),
            descriptor: descriptor.into(),
            mass: R::one(),
            max_index: Some(len),
        })
    }

    pub fn with_mass(mut self, mass: R) -> Self {
        self.mass = mass;
        self
    }
}

/// Serializable description of the built-in model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ModelSpec {
    /// a == 1, b == 0.
    Free,
    /// Geometrically decaying perturbation of the free chain:
    /// a_n = 1 + a_coeff * a_ratio^n, b_n = b_coeff * b_ratio^n.
    L1Decay { a_coeff: f64, a_ratio: f64, b_coeff: f64, b_ratio: f64 },
    /// Monotone bounded-variation approach to fixed limits:
    /// a_n = a_limit + a_amplitude/(n + offset), likewise for b.
    BoundedVariation {
        a_limit: f64,
        a_amplitude: f64,
        b_limit: f64,
        b_amplitude: f64,
        offset: u32,
    },
    /// Period-p repetition of explicit blocks.
    Periodic { a: Vec<f64>, b: Vec<f64> },
    /// Slow approach to the free chain from below: a_n = 1 - n^{-gamma},
    /// b == 0. The n = 1 entry is clamped to the n = 2 value 1 - 2^{-gamma}
    /// (the raw formula gives a_1 = 0, which no recurrence tolerates).
    EdgeDecay { gamma: f64 },
    /// a == 1, b_n = lambda * uniform[-1, 1) drawn by the counter-based
    /// generator at (seed, n).
    IIDRandom { lambda: f64, seed: u64 },
    /// a == 1, b_n = lambda * cos(2 pi alpha n + theta0).
    AlmostMathieu { lambda: f64, alpha: f64, theta0: f64 },
    /// Explicit coefficient table, e.g. from the Stieltjes constructor.
    WeightTable { a: Vec<f64>, b: Vec<f64> },
}

impl ModelSpec {
    /// Canonical geometric-decay instance: a_n = 1 + 2^{-n}, b_n = 3^{-n}.
    pub fn l1_canonical() -> Self {
        ModelSpec::L1Decay { a_coeff: 1.0, a_ratio: 0.5, b_coeff: 1.0, b_ratio: 1.0 / 3.0 }
    }

    /// Canonical monotone instance: a_n = 1 + 1/(n + 10), b == 0.
    pub fn bv_canonical() -> Self {
        ModelSpec::BoundedVariation {
            a_limit: 1.0,
            a_amplitude: 1.0,
            b_limit: 0.0,
            b_amplitude: 0.0,
            offset: 10,
        }
    }
}

/// Materialize a model specification into a parameter set.
pub fn build_model<R: Real>(spec: &ModelSpec) -> Result<JacobiParams<R>> {
    match spec {
        ModelSpec::Free => {
            Ok(JacobiParams::from_fns(|_| R::one(), |_| R::zero(), "free"))
        }
        ModelSpec::L1Decay { a_coeff, a_ratio, b_coeff, b_ratio } => {
            for (name, r) in [("a_ratio", *a_ratio), ("b_ratio", *b_ratio)] {
                if !(r.abs() < 1.0) {
                    return Err(Error::InvalidModel {
                        field: "L1Decay",
                        message: format!("{name} = {r} must satisfy |ratio| < 1"),
                    });
                }
            }
            let (ac, ar, bc, br) = (*a_coeff, *a_ratio, *b_coeff, *b_ratio);
            // extremes of 1 + ac*ar^n over n >= 1 occur at small n
            for n in 1..=64u32 {
                let a = 1.0 + ac * ar.powi(n as i32);
                if !(a > 0.0) {
                    return Err(Error::InvalidModel {
                        field: "L1Decay",
                        message: format!("a({n}) = {a} not positive"),
                    });
                }
            }
            Ok(JacobiParams::from_fns(
                move |n| cast::<R>(1.0 + ac * ar.powi(n as i32)),
                move |n| cast::<R>(bc * br.powi(n as i32)),
                format!("l1decay(a=1{ac:+}*{ar}^n, b={bc}*{br}^n)"),
            ))
        }
        ModelSpec::BoundedVariation { a_limit, a_amplitude, b_limit, b_amplitude, offset } => {
            let (al, aa, bl, ba, off) = (*a_limit, *a_amplitude, *b_limit, *b_amplitude, *offset);
            let first = al + aa / (1.0 + off as f64);
            if !(al > 0.0) || !(first > 0.0) {
                return Err(Error::InvalidModel {
                    field: "BoundedVariation",
                    message: format!("off-diagonal range [{al}, {first}] must stay positive"),
                });
            }
            Ok(JacobiParams::from_fns(
                move |n| cast::<R>(al + aa / (n as f64 + off as f64)),
                move |n| cast::<R>(bl + ba / (n as f64 + off as f64)),
                format!("bv(a->{al}, b->{bl}, offset {off})"),
            ))
        }
        ModelSpec::Periodic { a, b } => {
            if a.is_empty() || a.len() != b.len() {
                return Err(Error::InvalidModel {
                    field: "Periodic",
                    message: format!("blocks must be equal-length and nonempty; got {} and {}", a.len(), b.len()),
                });
            }
            if let Some(bad) = a.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidModel {
                    field: "Periodic",
                    message: format!("off-diagonal block entry {bad} not positive"),
                });
            }
            let p = a.len() as u32;
            let (av, bv): (Vec<R>, Vec<R>) =
                (a.iter().map(|&x| cast(x)).collect(), b.iter().map(|&x| cast(x)).collect());
            let (av, bv) = (Arc::new(av), Arc::new(bv));
            let av2 = Arc::clone(&av);
            Ok(JacobiParams::from_fns(
                move |n| av[((n - 1) % p) as usize],
                move |n| bv[((n - 1) % p) as usize],
                format!("periodic(p={}, a={:?}, b={:?})", av2.len(), a, b),
            ))
        }
        ModelSpec::EdgeDecay { gamma } => {
            if !(*gamma > 0.0) || !gamma.is_finite() {
                return Err(Error::InvalidModel {
                    field: "EdgeDecay",
                    message: format!("gamma = {gamma} must be positive"),
                });
            }
            let g = *gamma;
            Ok(JacobiParams::from_fns(
                move |n| {
                    let m = if n == 1 { 2.0 } else { n as f64 };
                    cast::<R>(1.0 - m.powf(-g))
                },
                |_| R::zero(),
                format!("edgedecay(gamma={g})"),
            ))
        }
        ModelSpec::IIDRandom { lambda, seed } => {
            if !lambda.is_finite() || *lambda < 0.0 {
                return Err(Error::InvalidModel {
                    field: "IIDRandom",
                    message: format!("lambda = {lambda} must be finite and nonnegative"),
                });
            }
            let (lam, sd) = (*lambda, *seed);
            Ok(JacobiParams::from_fns(
                |_| R::one(),
                move |n| cast::<R>(lam * rng::uniform_symmetric(sd, n as u64)),
                format!("iid(lambda={lam}, seed={sd})"),
            ))
        }
        ModelSpec::AlmostMathieu { lambda, alpha, theta0 } => {
            if ![*lambda, *alpha, *theta0].iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidModel {
                    field: "AlmostMathieu",
                    message: "parameters must be finite".into(),
                });
            }
            let (lam, al, th) = (*lambda, *alpha, *theta0);
            Ok(JacobiParams::from_fns(
                |_| R::one(),
                move |n| {
                    let arg = 2.0 * std::f64::consts::PI * al * (n as f64) + th;
                    cast::<R>(lam * arg.cos())
                },
                format!("almost_mathieu(lambda={lam}, alpha={al}, theta0={th})"),
            ))
        }
        ModelSpec::WeightTable { a, b } => {
            let av: Vec<R> = a.iter().map(|&x| cast(x)).collect();
            let bv: Vec<R> = b.iter().map(|&x| cast(x)).collect();
            JacobiParams::from_table(av, bv, format!("table(len={})", a.len()))
        }
    }
}

/// Period-p repetition of the first p coefficients of `params`:
/// index m p + q (1 <= q <= p) maps back to q.
pub fn periodize<R: Real>(params: &JacobiParams<R>, p: u32) -> Result<JacobiParams<R>> {
    if p == 0 {
        return Err(Error::Precondition("period must be >= 1".into()));
    }
    params.ensure_len(p)?;
    let mut a_block = Vec::with_capacity(p as usize);
    let mut b_block = Vec::with_capacity(p as usize);
    for q in 1..=p {
        let a = params.a(q);
        if !(a > R::zero()) || !a.is_finite() {
            return Err(Error::InvalidModel {
                field: "periodize",
                message: format!("period block has a({q}) = {a}; off-diagonal must stay positive"),
            });
        }
        a_block.push(a);
        b_block.push(params.b(q));
    }
    let (a_block, b_block) = (Arc::new(a_block), Arc::new(b_block));
    let descriptor = format!("periodized(p={p}; {})", params.descriptor);
    Ok(JacobiParams {
        a: {
            let blk = Arc::clone(&a_block);
            Arc::new(move |n| blk[((n - 1) % p) as usize])
        },
        b: {
            let blk = Arc::clone(&b_block);
            Arc::new(move |n| blk[((n - 1) % p) as usize])
        },
        descriptor,
        mass: R::one(),
        max_index: None,
    })
}

/// Output of the discretized Stieltjes run.
#[derive(Debug, Clone)]
pub struct StieltjesTable<R: Real> {
    pub a: Vec<R>,
    pub b: Vec<R>,
    /// Total mass of the weight before normalization.
    pub mass: R,
    /// Max coefficient change over the last panel doubling.
    pub residual: f64,
    /// Node count of the accepted discretization.
    pub nodes: usize,
}

impl<R: Real> StieltjesTable<R> {
    /// Table-backed parameter set for the *normalized* measure, with the
    /// original mass recorded.
    pub fn into_params(self, descriptor: impl Into<String>) -> Result<JacobiParams<R>> {
        let mass = self.mass;
        Ok(JacobiParams::from_table(self.a, self.b, descriptor)?.with_mass(mass))
    }

    /// f64 spec for serialization.
    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec::WeightTable {
            a: self.a.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            b: self.b.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// Recursion coefficients of the weight `w` on `support`, by the discretized
/// Stieltjes procedure over graded composite Gauss-Legendre panels.
///
/// The weight is normalized to unit mass first; the original mass is
/// recorded on the result. Panel count doubles from 64 until the largest
/// coefficient change drops below 1e-10 (cap 256 panels); a change still
/// above 1e-6 at the cap is a convergence failure.
pub fn stieltjes_from_weight<R: Real>(
    w: &dyn Fn(R) -> R,
    support: (R, R),
    n_coeffs: usize,
) -> Result<StieltjesTable<R>> {
    stieltjes_from_weight_with(w, support, n_coeffs, 64, 64)
}

/// [`stieltjes_from_weight`] with explicit discretization controls
/// (`base_panels` is the starting interior panel count, doubled twice at
/// most; `points_per_panel` is the Gauss-Legendre order per panel).
pub fn stieltjes_from_weight_with<R: Real>(
    w: &dyn Fn(R) -> R,
    support: (R, R),
    n_coeffs: usize,
    base_panels: usize,
    points_per_panel: usize,
) -> Result<StieltjesTable<R>> {
    if n_coeffs == 0 {
        return Err(Error::Precondition("n_coeffs must be >= 1".into()));
    }
    let mut previous: Option<(Vec<R>, Vec<R>)> = None;
    let mut panels = base_panels;
    let cap = base_panels * 4;
    loop {
        let (nodes, weights) = discretize_weight(w, support, panels, points_per_panel)?;
        let (a, b, mass) = stieltjes_on_nodes(&nodes, &weights, n_coeffs)?;
        let residual = match &previous {
            None => f64::INFINITY,
            Some((pa, pb)) => {
                let da = a
                    .iter()
                    .zip(pa)
                    .map(|(x, y)| (*x - *y).abs().to_f64().unwrap_or(f64::INFINITY))
                    .fold(0.0, f64::max);
                let db = b
                    .iter()
                    .zip(pb)
                    .map(|(x, y)| (*x - *y).abs().to_f64().unwrap_or(f64::INFINITY))
                    .fold(0.0, f64::max);
                da.max(db)
            }
        };
        if residual < 1e-10 {
            return Ok(StieltjesTable { a, b, mass, residual, nodes: nodes.len() });
        }
        if panels >= cap {
            if residual > 1e-6 {
                return Err(Error::NonConvergent { residual, cap: panels });
            }
            return Ok(StieltjesTable { a, b, mass, residual, nodes: nodes.len() });
        }
        previous = Some((a, b));
        panels *= 2;
    }
}

/// Stieltjes procedure in orthonormal form on a discrete measure.
fn stieltjes_on_nodes<R: Real>(
    nodes: &[R],
    weights: &[R],
    n_coeffs: usize,
) -> Result<(Vec<R>, Vec<R>, R)> {
    let m = nodes.len();
    if n_coeffs >= m {
        return Err(Error::Precondition(format!(
            "discretization with {m} nodes cannot resolve {n_coeffs} coefficients"
        )));
    }
    let mass: R = weights.iter().copied().sum();
    if !(mass > R::zero()) {
        return Err(Error::Precondition("weight has zero total mass".into()));
    }
    let wn: Vec<R> = weights.iter().map(|&x| x / mass).collect();
    let mut p_prev = vec![R::zero(); m]; // p_{k-1}
    let mut p_cur = vec![R::one(); m]; // p_k, k = 0
    let mut a_out = Vec::with_capacity(n_coeffs);
    let mut b_out = Vec::with_capacity(n_coeffs);
    let mut a_k = R::zero(); // a_0 placeholder; unused in the first step
    for k in 0..n_coeffs {
        // b_{k+1} = <x p_k, p_k>
        let mut alpha = R::zero();
        for i in 0..m {
            alpha += wn[i] * nodes[i] * p_cur[i] * p_cur[i];
        }
        b_out.push(alpha);
        // t = (x - b_{k+1}) p_k - a_k p_{k-1}; a_{k+1} = ||t||
        let mut norm2 = R::zero();
        let mut t = vec![R::zero(); m];
        for i in 0..m {
            let v = (nodes[i] - alpha) * p_cur[i] - a_k * p_prev[i];
            norm2 += wn[i] * v * v;
            t[i] = v;
        }
        let a_next = norm2.sqrt();
        if !(a_next > cast::<R>(1e-200)) || !a_next.is_finite() {
            return Err(Error::Precondition(format!(
                "measure exhausted at degree {}: norm {a_next:e}",
                k + 1
            )));
        }
        a_out.push(a_next);
        for v in t.iter_mut() {
            *v = *v / a_next;
        }
        p_prev = std::mem::replace(&mut p_cur, t);
        a_k = a_next;
    }
    Ok((a_out, b_out, mass))
}

/// Chebyshev (first kind) coefficients: a_1 = sqrt(1/2), a_n = 1/2 for
/// n >= 2, b == 0. Normalized weight pi^{-1} (1-x^2)^{-1/2} on [-1, 1].
pub fn chebyshev_t<R: Real>() -> JacobiParams<R> {
    JacobiParams::from_fns(
        |n| if n == 1 { cast::<R>(0.5).sqrt() } else { cast(0.5) },
        |_| R::zero(),
        "chebyshev-t",
    )
}

/// Chebyshev (second kind) coefficients: a == 1/2, b == 0. Normalized weight
/// (2/pi) sqrt(1-x^2) on [-1, 1].
pub fn chebyshev_u<R: Real>() -> JacobiParams<R> {
    JacobiParams::from_fns(|_| cast(0.5), |_| R::zero(), "chebyshev-u")
}

/// Legendre coefficients for the normalized flat weight 1/2 on [-1, 1]:
/// a_n = n / sqrt(4n^2 - 1), b == 0.
pub fn legendre<R: Real>() -> JacobiParams<R> {
    JacobiParams::from_fns(
        |n| {
            let nf = n as f64;
            cast::<R>(nf / (4.0 * nf * nf - 1.0).sqrt())
        },
        |_| R::zero(),
        "legendre",
    )
}

/// Single off-diagonal defect: a_1 = sqrt(2), a_n = 1 otherwise, b == 0.
/// The edge phases of this chain sit exactly on half-integer multiples of
/// pi/n, making it the touchstone for the resonant edge classification.
pub fn resonant_defect<R: Real>() -> JacobiParams<R> {
    JacobiParams::from_fns(
        |n| if n == 1 { cast::<R>(2.0).sqrt() } else { R::one() },
        |_| R::zero(),
        "resonant-defect",
    )
}

/// Verblunsky (reflection) coefficients alpha_k, k >= 0, |alpha_k| < 1.
pub struct VerblunskyParams<R: Real> {
    alpha: Arc<dyn Fn(u32) -> Complex<R> + Send + Sync>,
    pub descriptor: String,
    pub max_index: Option<u32>,
}

impl<R: Real> Clone for VerblunskyParams<R> {
    fn clone(&self) -> Self {
        VerblunskyParams {
            alpha: Arc::clone(&self.alpha),
            descriptor: self.descriptor.clone(),
            max_index: self.max_index,
        }
    }
}

impl<R: Real> std::fmt::Debug for VerblunskyParams<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VerblunskyParams")
            .field("descriptor", &self.descriptor)
            .field("max_index", &self.max_index)
            .finish()
    }
}

impl<R: Real> VerblunskyParams<R> {
    #[inline]
    pub fn alpha(&self, k: u32) -> Complex<R> {
        if let Some(len) = self.max_index {
            assert!(k <= len, "reflection index {k} beyond table length {len}");
        }
        (self.alpha)(k)
    }

    pub fn ensure_len(&self, needed: u32) -> Result<()> {
        match self.max_index {
            Some(len) if len < needed => Err(Error::TableTooShort { needed, len }),
            _ => Ok(()),
        }
    }

    /// Checks |alpha_k| < 1 over 0..=up_to.
    pub fn validate(&self, up_to: u32) -> Result<()> {
        self.ensure_len(up_to)?;
        for k in 0..=up_to {
            let a = (self.alpha)(k);
            if !(a.norm_sqr() < R::one()) {
                return Err(Error::InvalidModel {
                    field: "alpha",
                    message: format!("|alpha({k})| = {} must be < 1", a.norm_sqr().sqrt()),
                });
            }
        }
        Ok(())
    }

    /// alpha == 0 (Lebesgue measure on the circle).
    pub fn zero() -> Self {
        VerblunskyParams {
            alpha: Arc::new(|_| Complex::new(R::zero(), R::zero())),
            descriptor: "alpha=0".into(),
            max_index: None,
        }
    }

    /// Real power-law decay alpha_k = (k + 2)^{-exponent}.
    pub fn power_decay(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(Error::InvalidModel {
                field: "alpha",
                message: format!("decay exponent {exponent} must be positive"),
            });
        }
        Ok(VerblunskyParams {
            alpha: Arc::new(move |k| {
                Complex::new(cast::<R>(((k + 2) as f64).powf(-exponent)), R::zero())
            }),
            descriptor: format!("alpha_k=(k+2)^-{exponent}"),
            max_index: None,
        })
    }

    pub fn from_fn(
        alpha: impl Fn(u32) -> Complex<R> + Send + Sync + 'static,
        descriptor: impl Into<String>,
    ) -> Self {
        VerblunskyParams { alpha: Arc::new(alpha), descriptor: descriptor.into(), max_index: None }
    }

    pub fn from_table(table: Vec<Complex<R>>, descriptor: impl Into<String>) -> Result<Self> {
        if table.iter().any(|a| !(a.norm_sqr() < R::one())) {
            return Err(Error::InvalidModel {
                field: "alpha",
                message: "every reflection coefficient must satisfy |alpha| < 1".into(),
            });
        }
        let len = table.len() as u32;
        if len == 0 {
            return Err(Error::InvalidModel { field: "alpha", message: "empty table".into() });
        }
        let table = Arc::new(table);
        Ok(VerblunskyParams {
            alpha: Arc::new(move |k| table[k as usize]),
            descriptor: descriptor.into(),
            max_index: Some(len - 1),
        })
    }
}

/// Serialize a coefficient table as two-column CSV with a header.
pub fn weight_table_to_csv(a: &[f64], b: &[f64]) -> String {
    let mut out = String::from("a,b\n");
    for (x, y) in a.iter().zip(b) {
        out.push_str(&format!("{x:.16e},{y:.16e}\n"));
    }
    out
}

/// Parse a two-column `a,b` CSV (header required) into a WeightTable spec.
pub fn weight_table_from_csv(text: &str) -> Result<ModelSpec> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim().eq_ignore_ascii_case("a,b") => {}
        other => {
            return Err(Error::Precondition(format!(
                "weight table CSV must start with 'a,b' header, got {other:?}"
            )))
        }
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Precondition(format!("row {} malformed", i + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Precondition(format!("row {}: {e}", i + 2)))
        };
        a.push(parse(cols.next())?);
        b.push(parse(cols.next())?);
    }
    Ok(ModelSpec::WeightTable { a, b })
}

/// Almost-periodic cosine diagonal at the inverse golden ratio.
pub fn golden_ratio_frequency() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}
