//! Gauss-Legendre panel quadrature and composite Simpson.
//!
//! Nodes and weights come from `gauss-quad`; this module only adds composite
//! panels, refinement loops and a value-generic accumulator.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::C64;

/// Values that can be accumulated by a quadrature rule.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A fixed-order Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    fn build(order: usize) -> Rule {
        let gl = GaussLegendre::new(order).expect("order >= 2");
        let mut pairs = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule { pairs }
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: Integrand, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

/// 16-point rule, the default panel rule.
pub fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::build(16))
}

/// 10-point rule used for bisection and for convolution panels.
pub fn gl10() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::build(10))
}

/// Composite rule with `panels` equal panels on [a, b].
pub fn composite<T: Integrand, F: FnMut(f64) -> T>(
    rule: &Rule,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> T {
    let h = (b - a) / panels as f64;
    (0..panels).fold(T::zero(), |acc, k| {
        let lo = a + k as f64 * h;
        acc + rule.integrate(lo, lo + h, &mut f)
    })
}

/// Doubles the panel count of a composite rule until two successive
/// estimates differ by less than `tol * max(1, |I|)`.
///
/// Returns the estimate and the panel count it used.
pub fn composite_refined<T: Integrand, F: FnMut(f64) -> T>(
    rule: &Rule,
    a: f64,
    b: f64,
    initial_panels: usize,
    max_panels: usize,
    tol: f64,
    mut f: F,
) -> Result<(T, usize)> {
    let mut panels = initial_panels.max(1);
    let mut prev = composite(rule, a, b, panels, &mut f);
    loop {
        let next_panels = panels * 2;
        if next_panels > max_panels {
            return Err(Error::NoConvergence(format!(
                "composite rule on [{a}, {b}] exceeded {max_panels} panels"
            )));
        }
        let next = composite(rule, a, b, next_panels, &mut f);
        let diff = (next - prev).magnitude();
        if diff <= tol * next.magnitude().max(1.0) {
            return Ok((next, next_panels));
        }
        prev = next;
        panels = next_panels;
    }
}

/// Globally adaptive bisection: each panel is split until its 10-point
/// estimate agrees with the sum over its halves to within its share of `tol`.
pub fn adaptive<T: Integrand, F: FnMut(f64) -> T>(a: f64, b: f64, tol: f64, mut f: F) -> Result<T> {
    const MAX_DEPTH: u32 = 40;
    let rule = gl10();
    let width = b - a;
    if width == 0.0 {
        return Ok(T::zero());
    }
    let whole = rule.integrate(a, b, &mut f);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = T::zero();
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let refined = left + right;
        let share = tol * (hi - lo) / width;
        if (refined - est).magnitude() <= share {
            total = total + refined;
        } else if depth >= MAX_DEPTH {
            return Err(Error::NoConvergence(format!(
                "adaptive bisection hit depth {MAX_DEPTH} near [{lo}, {hi}]"
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

/// Composite Simpson on `2m` equal intervals over [a, b].
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, intervals: usize, mut f: F) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Composite Simpson over equally spaced samples `f_0..f_n` (`n` even).
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even number of intervals");
    let inner: f64 = values[1..n]
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    (values[0] + values[n] + inner) * h / 3.0
}
