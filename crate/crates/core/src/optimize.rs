//! Derivative-free minimization: Nelder-Mead simplex refinement started from
//! the best points of a coarse grid.

use crate::Real;

/// Simplex settings. Coefficients are the standard reflection 1, expansion
/// 2, contraction 1/2 and shrink 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead<T> {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: T,
    /// Converged once the simplex diameter drops below this.
    pub diameter_tol: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            initial_step: T::lit(0.1),
            diameter_tol: T::lit(1e-9),
            max_iterations: 5000,
        }
    }
}

/// Outcome of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn diameter<T: Real>(points: &[Vec<T>]) -> T {
    let mut d = T::zero();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let s: T = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

// NaN sorts last so it is always the first point replaced.
fn cmp<T: Real>(a: T, b: T) -> std::cmp::Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => a.partial_cmp(&b).unwrap(),
    }
}

impl<T: Real> NelderMead<T> {
    pub fn minimize(&self, f: impl Fn(&[T]) -> T, x0: &[T]) -> Minimum<T> {
        let n = x0.len();
        assert!(n >= 1, "empty starting point");
        let mut evaluations = 0usize;
        let mut eval = |x: &[T]| {
            evaluations += 1;
            f(x)
        };

        let mut pts: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] = p[i] + self.initial_step;
            pts.push(p);
        }
        let mut vals: Vec<T> = pts.iter().map(|p| eval(p)).collect();

        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let mut iterations = 0;
        let mut converged = false;
        let mut order: Vec<usize> = (0..=n).collect();

        while iterations < self.max_iterations {
            order.sort_by(|&a, &b| cmp(vals[a], vals[b]));
            let sorted_pts: Vec<Vec<T>> = order.iter().map(|&i| pts[i].clone()).collect();
            let sorted_vals: Vec<T> = order.iter().map(|&i| vals[i]).collect();
            pts = sorted_pts;
            vals = sorted_vals;
            order = (0..=n).collect();

            if diameter(&pts) < self.diameter_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let inv_n = T::one() / T::count(n);
            let centroid: Vec<T> = (0..n).map(|k| pts[..n].iter().map(|p| p[k]).sum::<T>() * inv_n).collect();
            let along = |t: T| -> Vec<T> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };

            let xr = along(-T::one());
            let fr = eval(&xr);
            if cmp(fr, vals[0]) == std::cmp::Ordering::Less {
                let xe = along(-two);
                let fe = eval(&xe);
                if cmp(fe, fr) == std::cmp::Ordering::Less {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if cmp(fr, vals[n - 1]) == std::cmp::Ordering::Less {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (xc, fc) = if cmp(fr, vals[n]) == std::cmp::Ordering::Less {
                let xc = along(-half);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(half);
                let fc = eval(&xc);
                (xc, fc)
            };
            if cmp(fc, fr.min(vals[n])) == std::cmp::Ordering::Less {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // Shrink toward the best vertex.
            for i in 1..=n {
                let p: Vec<T> = (0..n).map(|k| pts[0][k] + half * (pts[i][k] - pts[0][k])).collect();
                vals[i] = eval(&p);
                pts[i] = p;
            }
        }

        let best = (0..=n).min_by(|&a, &b| cmp(vals[a], vals[b])).unwrap();
        Minimum {
            x: pts[best].clone(),
            value: vals[best],
            iterations,
            evaluations,
            converged,
        }
    }
}

/// Summary of a grid-seeded multi-start minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStart<T> {
    pub best: Minimum<T>,
    /// Best grid value before refinement.
    pub grid_value: T,
    pub starts: usize,
    pub total_evaluations: usize,
    /// Every refinement run converged.
    pub all_converged: bool,
}

/// Evaluates `f` on every seed, refines the `restarts` lowest with
/// Nelder-Mead and returns the overall minimum, which is never worse than
/// the best seed.
pub fn grid_multistart<T: Real>(
    f: impl Fn(&[T]) -> T,
    seeds: &[Vec<T>],
    restarts: usize,
    nm: &NelderMead<T>,
) -> MultiStart<T> {
    assert!(!seeds.is_empty(), "no seed points");
    let mut scored: Vec<(T, usize)> = seeds.iter().enumerate().map(|(i, s)| (f(s), i)).collect();
    scored.sort_by(|a, b| cmp(a.0, b.0).then(a.1.cmp(&b.1)));
    let (grid_value, grid_idx) = scored[0];
    let mut best = Minimum {
        x: seeds[grid_idx].clone(),
        value: grid_value,
        iterations: 0,
        evaluations: seeds.len(),
        converged: false,
    };
    let mut total = seeds.len();
    let mut all_converged = true;
    let starts = restarts.min(scored.len());
    for &(_, idx) in scored.iter().take(starts) {
        let run = nm.minimize(&f, &seeds[idx]);
        total += run.evaluations;
        all_converged &= run.converged;
        if cmp(run.value, best.value) != std::cmp::Ordering::Greater {
            best = run;
        }
    }
    best.evaluations = total;
    MultiStart {
        best,
        grid_value,
        starts,
        total_evaluations: total,
        all_converged: all_converged && starts > 0,
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]` until the
/// bracket is narrower than `width`.
pub fn golden_section<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, width: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut guard = 0;
    while (b - a).abs() > width && guard < 500 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        guard += 1;
    }
    T::lit(0.5) * (a + b)
}
