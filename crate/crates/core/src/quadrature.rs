//! One-dimensional Gauss-Legendre rules, composite and graded variants, and
//! compensated summation for tensor-product cubature.

use crate::{Error, Real, Result};

/// Nodes and weights of a 1-D rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        let mut acc = Neumaier::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.total()
    }

    fn append_mapped(&mut self, base: &Rule<T>, a: T, b: T) {
        let half = T::lit(0.5) * (b - a);
        let mid = T::lit(0.5) * (a + b);
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            self.nodes.push(mid + half * x);
            self.weights.push(half * w);
        }
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<Rule<T>> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, refined in f64 then converted.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    Ok(Rule { nodes, weights })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `nodes_per_panel`-point rule repeated on `panels` equal panels of `[a, b]`.
pub fn composite<T: Real>(a: T, b: T, panels: usize, nodes_per_panel: usize) -> Result<Rule<T>> {
    if panels == 0 || !(b > a) {
        return Err(Error::Quadrature(format!(
            "composite rule on [{}, {}] with {panels} panels",
            a.to_f64_lossy(),
            b.to_f64_lossy()
        )));
    }
    let base = gauss_legendre::<T>(nodes_per_panel)?;
    let mut rule = Rule {
        nodes: Vec::with_capacity(panels * nodes_per_panel),
        weights: Vec::with_capacity(panels * nodes_per_panel),
    };
    let width = (b - a) / T::count(panels);
    for k in 0..panels {
        let lo = a + width * T::count(k);
        let hi = if k + 1 == panels { b } else { lo + width };
        rule.append_mapped(&base, lo, hi);
    }
    Ok(rule)
}

/// Composite rule on `[a, b]` whose panels shrink geometrically by `ratio`
/// toward `b`; refinement stops once the gap to `b` drops below `finest`.
pub fn graded_toward_end<T: Real>(a: T, b: T, ratio: T, finest: T, nodes_per_panel: usize) -> Result<Rule<T>> {
    if !(b > a) || !(ratio > T::zero() && ratio < T::one()) || !(finest > T::zero()) {
        return Err(Error::Quadrature(format!(
            "graded rule on [{}, {}] with ratio {}",
            a.to_f64_lossy(),
            b.to_f64_lossy(),
            ratio.to_f64_lossy()
        )));
    }
    let base = gauss_legendre::<T>(nodes_per_panel)?;
    let len = b - a;
    // Breakpoints b - len * ratio^k for k = 0, 1, ...
    let mut breaks = vec![a];
    let mut gap = len * ratio;
    while gap > finest && breaks.len() < 200 {
        breaks.push(b - gap);
        gap = gap * ratio;
    }
    breaks.push(b);
    let mut rule = Rule {
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    for w in breaks.windows(2) {
        rule.append_mapped(&base, w[0], w[1]);
    }
    Ok(rule)
}

/// Neumaier-compensated accumulator; summation order is the call order, so
/// results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Neumaier<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}
