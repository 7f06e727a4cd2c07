//! Source terms `f`, their antiderivatives `F(u) = int_0^u f`, and sampled
//! checks of the structural inequalities required by the blow-up and
//! global-existence results.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};

/// Absolute tolerance of the adaptive Simpson rule behind `F` for expressions.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Default number of sample points for the hypothesis checks.
pub const DEFAULT_SAMPLES: usize = 10_001;

const CACHE_LIMIT: usize = 1 << 16;
const F0_TOL: f64 = 1e-12;
const MARGIN_TOL: f64 = 1e-12;

#[derive(Clone)]
pub enum Nonlinearity {
    /// `f(u) = c sign(u) |u|^p`
    Power { p: f64, c: f64 },
    /// User expression; `F` by adaptive quadrature, memoized per `u`.
    Expression {
        source: String,
        ast: Expr,
        cache: Arc<Mutex<HashMap<u64, f64>>>,
    },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { p, c } => write!(f, "Power {{ p: {p}, c: {c} }}"),
            Nonlinearity::Expression { source, .. } => write!(f, "Expression({source:?})"),
        }
    }
}

fn powu(a: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

impl Nonlinearity {
    pub fn power(p: f64, c: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("power exponent must be > 1, got {p}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("power coefficient must be > 0, got {c}")));
        }
        Ok(Nonlinearity::Power { p, c })
    }

    /// Parses `text` and rejects expressions with `|f(0)| > 1e-12`.
    pub fn expression(text: &str) -> Result<Self> {
        let ast = parse_expression(text)?;
        let f0 = ast.eval(0.0)?;
        if f0.abs() > F0_TOL {
            return Err(Error::invalid(format!("f(0) must vanish, got f(0) = {f0}")));
        }
        Ok(Nonlinearity::Expression {
            source: text.to_string(),
            ast,
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Nonlinearity::Power { p, c } => format!("{c}*sign(u)|u|^{p}"),
            Nonlinearity::Expression { source, .. } => source.clone(),
        }
    }

    pub fn eval_f(&self, u: f64) -> Result<f64> {
        match self {
            Nonlinearity::Power { p, c } => Ok(c * u.signum() * powu(u.abs(), *p)),
            Nonlinearity::Expression { ast, .. } => ast.eval(u),
        }
    }

    /// `F(u) = int_0^u f(s) ds`.
    pub fn eval_big_f(&self, u: f64) -> Result<f64> {
        match self {
            Nonlinearity::Power { p, c } => Ok(c * powu(u.abs(), p + 1.0) / (p + 1.0)),
            Nonlinearity::Expression { ast, cache, .. } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let key = u.to_bits();
                if let Some(&v) = cache.lock().expect("cache poisoned").get(&key) {
                    return Ok(v);
                }
                let v = adaptive_simpson(|s| ast.eval(s), 0.0, u, QUADRATURE_TOL)?;
                let mut c = cache.lock().expect("cache poisoned");
                if c.len() >= CACHE_LIMIT {
                    c.clear();
                }
                c.insert(key, v);
                Ok(v)
            }
        }
    }
}

/// Free-function form of [`Nonlinearity::eval_f`].
pub fn eval_f(nl: &Nonlinearity, u: f64) -> Result<f64> {
    nl.eval_f(u)
}

/// Free-function form of [`Nonlinearity::eval_big_f`].
#[allow(non_snake_case)]
pub fn eval_F(nl: &Nonlinearity, u: f64) -> Result<f64> {
    nl.eval_big_f(u)
}

/// Adaptive Simpson quadrature of `g` over `[a, b]` (either orientation).
pub fn adaptive_simpson<G>(g: G, a: f64, b: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<G: Fn(f64) -> Result<f64>>(
        g: &G,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm)?;
        let frm = g(rm)?;
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(g, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?
            + recurse(g, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?)
    }

    if a == b {
        return Ok(0.0);
    }
    let fa = g(a)?;
    let fb = g(b)?;
    let m = 0.5 * (a + b);
    let fm = g(m)?;
    let whole = simpson(a, fa, b, fb, fm);
    let v = recurse(&g, a, fa, b, fb, m, fm, whole, tol, 48)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            u: b,
            reason: "quadrature produced a non-finite value".into(),
        })
    }
}

/// One side condition on the parameters, with both sides printed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ConstraintCheck {
    fn new(label: &str, lhs: f64, rhs: f64, holds: bool) -> Self {
        Self {
            label: label.to_string(),
            lhs,
            rhs,
            holds,
        }
    }
}

/// `alpha > 2`, `0 < beta <= lambda1 (alpha - 2) / 2`, `theta > 0`.
pub fn blowup_constraints(alpha: f64, beta: f64, theta: f64, lambda1: f64) -> Vec<ConstraintCheck> {
    let cap = lambda1 * (alpha - 2.0) / 2.0;
    vec![
        ConstraintCheck::new("alpha > 2", alpha, 2.0, alpha > 2.0),
        ConstraintCheck::new("beta > 0", beta, 0.0, beta > 0.0),
        ConstraintCheck::new("beta <= lambda1*(alpha-2)/2", beta, cap, beta <= cap),
        ConstraintCheck::new("theta > 0", theta, 0.0, theta > 0.0),
    ]
}

/// `alpha <= 0`, `beta >= (2 - alpha) / 2`, `theta >= 0`.
pub fn global_constraints(alpha: f64, beta: f64, theta: f64) -> Vec<ConstraintCheck> {
    let floor = (2.0 - alpha) / 2.0;
    vec![
        ConstraintCheck::new("alpha <= 0", alpha, 0.0, alpha <= 0.0),
        ConstraintCheck::new("beta >= (2-alpha)/2", beta, floor, beta >= floor),
        ConstraintCheck::new("theta >= 0", theta, 0.0, theta >= 0.0),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisKind {
    Blowup,
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub kind: HypothesisKind,
    pub holds: bool,
    pub worst_margin: f64,
    pub argmin_u: f64,
    /// magnitude of the terms at `argmin_u`, used for the tolerance
    pub scale: f64,
    pub u_range: [f64; 2],
    pub samples: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    /// parameter side conditions; checked separately from the margin
    pub constraints: Vec<ConstraintCheck>,
}

impl HypothesisReport {
    pub fn constraints_hold(&self) -> bool {
        self.constraints.iter().all(|c| c.holds)
    }
}

/// Half geometric (clustered near 0), half uniform points in `(0, u_max]`.
pub fn sample_points(u_max: f64, samples: usize) -> Vec<f64> {
    let n_geo = samples / 2;
    let n_lin = samples - n_geo;
    let mut pts = Vec::with_capacity(samples);
    for i in 0..n_geo {
        let e = -8.0 + 8.0 * i as f64 / n_geo as f64;
        pts.push(u_max * 10f64.powf(e));
    }
    for i in 0..n_lin {
        pts.push(u_max * ((i + 1) as f64 / n_lin as f64));
    }
    pts
}

fn check_range(u_max: f64, samples: usize) -> Result<()> {
    if !(u_max > 0.0 && u_max.is_finite()) {
        return Err(Error::invalid(format!("u_max must be positive, got {u_max}")));
    }
    if samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

struct Terms {
    ufu: f64,
    bu2: f64,
    at: f64,
    af: f64,
}

fn terms(nl: &Nonlinearity, alpha: f64, beta: f64, theta: f64, u: f64) -> Result<Terms> {
    Ok(Terms {
        ufu: u * nl.eval_f(u)?,
        bu2: beta * u * u,
        at: alpha * theta,
        af: alpha * nl.eval_big_f(u)?,
    })
}

fn scan<M>(
    kind: HypothesisKind,
    nl: &Nonlinearity,
    (alpha, beta, theta): (f64, f64, f64),
    u_max: f64,
    samples: usize,
    margin: M,
) -> Result<HypothesisReport>
where
    M: Fn(&Terms) -> f64,
{
    check_range(u_max, samples)?;
    let mut worst = f64::INFINITY;
    let mut argmin = u_max;
    let mut scale = 0.0;
    for u in sample_points(u_max, samples) {
        let t = terms(nl, alpha, beta, theta, u)?;
        let m = margin(&t);
        if m.is_nan() {
            return Err(Error::Evaluation {
                u,
                reason: "margin is NaN".into(),
            });
        }
        if m < worst {
            worst = m;
            argmin = u;
            scale = t.ufu.abs() + t.bu2.abs() + t.at.abs() + t.af.abs();
        }
    }
    Ok(HypothesisReport {
        kind,
        holds: worst >= -MARGIN_TOL * (1.0 + scale),
        worst_margin: worst,
        argmin_u: argmin,
        scale,
        u_range: [0.0, u_max],
        samples,
        alpha,
        beta,
        theta,
        constraints: Vec::new(),
    })
}

/// Samples `u f(u) + beta u^2 + alpha theta - alpha F(u) >= 0` on `(0, u_max]`.
/// The `lambda1`-dependent side conditions are left to the caller.
pub fn check_blowup_hypothesis(
    nl: &Nonlinearity,
    alpha: f64,
    beta: f64,
    theta: f64,
    u_max: f64,
    samples: usize,
) -> Result<HypothesisReport> {
    scan(HypothesisKind::Blowup, nl, (alpha, beta, theta), u_max, samples, |t| {
        t.ufu + t.bu2 + t.at - t.af
    })
}

/// Samples `alpha F(u) - u f(u) - beta u^2 - alpha theta >= 0` on `(0, u_max]`
/// and records the parameter side conditions.
pub fn check_global_hypothesis(
    nl: &Nonlinearity,
    alpha: f64,
    beta: f64,
    theta: f64,
    u_max: f64,
    samples: usize,
) -> Result<HypothesisReport> {
    let mut r = scan(HypothesisKind::Global, nl, (alpha, beta, theta), u_max, samples, |t| {
        t.af - t.ufu - t.bu2 - t.at
    })?;
    r.constraints = global_constraints(alpha, beta, theta);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub holds: bool,
    pub min_value: f64,
    pub argmin_u: f64,
    pub u_max: f64,
}

/// Samples `f(u) > 0` on `(0, u_max]`.
pub fn check_positivity(nl: &Nonlinearity, u_max: f64, samples: usize) -> Result<PositivityReport> {
    check_range(u_max, samples)?;
    let mut min_value = f64::INFINITY;
    let mut argmin_u = u_max;
    for u in sample_points(u_max, samples) {
        let v = nl.eval_f(u)?;
        if v < min_value {
            min_value = v;
            argmin_u = u;
        }
    }
    Ok(PositivityReport {
        holds: min_value > 0.0,
        min_value,
        argmin_u,
        u_max,
    })
}
