//! Minimal Nelder-Mead simplex minimizer for the Bell objective.

/// Result of one simplex run.
#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`, with an initial simplex built by
/// stepping `step` along each coordinate. Converges when the simplex
/// diameter drops below `xtol` and the value spread below `ftol`.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    xtol: f64,
    ftol: f64,
    max_iters: usize,
) -> SimplexOutcome {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += step;
        let v = f(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        let spread = (simplex[n].1 - simplex[0].1).abs();
        if diameter < xtol && spread < ftol {
            converged = true;
            break;
        }

        // Centroid of all points but the worst.
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }

        let worst = simplex[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + GAMMA * (r - c))
                .collect();
            let f_expand = f(&expand);
            simplex[n] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[n - 1].1 {
            simplex[n] = (reflect, f_reflect);
        } else {
            let (towards, f_towards) = if f_reflect < worst.1 {
                (reflect.clone(), f_reflect)
            } else {
                (worst.0.clone(), worst.1)
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&towards)
                .map(|(c, w)| c + RHO * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < f_towards {
                simplex[n] = (contract, f_contract);
            } else {
                // Shrink everything towards the best point.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, xi)| b + SIGMA * (xi - b))
                        .collect();
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
        iterations += 1;
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexOutcome { x: simplex[0].0.clone(), value: simplex[0].1, converged }
}
