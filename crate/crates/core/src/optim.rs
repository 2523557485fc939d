//! Derivative-free minimization (Nelder–Mead) with seeded random restarts.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iter: usize,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Initial simplex edge as a fraction of each parameter range.
    pub initial_scale: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            f_tol: 1e-12,
            initial_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<F>(f: &mut F, start: &[f64], steps: &[f64], cfg: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += steps[i];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        // stable sort keeps ties in insertion order
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[n]);
        if worst.is_finite() && (worst - best).abs() <= cfg.f_tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let anchor = simplex[0].clone();
        for i in 1..=n {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex.swap_remove(best),
        value: values[best],
        iterations,
    }
}

/// Box over which restarts draw their starting points.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Runs Nelder–Mead from each of `seed_points`, then from random points
/// in `bounds` until `restarts` runs have been made in total. The best
/// result wins; ties go to the earliest run.
pub fn minimize_with_restarts<F>(
    f: &mut F,
    seed_points: &[Vec<f64>],
    bounds: &Bounds,
    restarts: usize,
    seed: u64,
    cfg: &NelderMeadConfig,
) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let steps: Vec<f64> = bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(lo, hi)| cfg.initial_scale * (hi - lo))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Minimum> = None;
    for run in 0..restarts {
        let start: Vec<f64> = match seed_points.get(run) {
            Some(p) => p.clone(),
            None => bounds
                .lower
                .iter()
                .zip(&bounds.upper)
                .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                .collect(),
        };
        let m = nelder_mead(f, &start, &steps, cfg);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let mut f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NelderMeadConfig {
            max_iter: 2000,
            ..Default::default()
        };
        let m = nelder_mead(&mut f, &[-1.2, 1.0], &[0.1, 0.1], &cfg);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn respects_infeasible_region() {
        // minimum of x^2 + y^2 restricted to x >= 1 sits at (1, 0)
        let mut f = |x: &[f64]| {
            if x[0] < 1.0 {
                f64::INFINITY
            } else {
                x[0] * x[0] + x[1] * x[1]
            }
        };
        let m = nelder_mead(&mut f, &[2.0, 1.0], &[0.3, 0.3], &NelderMeadConfig::default());
        assert!((m.value - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn nan_counts_as_infinite() {
        let mut f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { (x[0] - 0.2).powi(2) };
        let m = nelder_mead(&mut f, &[0.0], &[0.1], &NelderMeadConfig::default());
        assert!((m.x[0] - 0.2).abs() < 1e-5);
    }

    #[test]
    fn restarts_are_deterministic_and_escape_local_minima() {
        // two wells; the deeper one is at x = 3
        let mut f = |x: &[f64]| {
            let a = (x[0] + 2.0).powi(2) - 1.0;
            let b = (x[0] - 3.0).powi(2) - 2.0;
            a.min(b)
        };
        let bounds = Bounds {
            lower: vec![-5.0],
            upper: vec![5.0],
        };
        let cfg = NelderMeadConfig::default();
        let run = |f: &mut dyn FnMut(&[f64]) -> f64| {
            minimize_with_restarts(&mut |x: &[f64]| f(x), &[vec![-2.0]], &bounds, 6, 7, &cfg).unwrap()
        };
        let a = run(&mut f);
        let b = run(&mut f);
        assert_eq!(a, b);
        assert!((a.value + 2.0).abs() < 1e-8);
    }
}
