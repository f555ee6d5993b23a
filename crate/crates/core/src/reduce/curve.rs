//! Fits the low-dimensional similarity curve `1 / (1 + a·d^(2b))`.

const SAMPLES: usize = 300;

fn target(x: f64, spread: f64, min_dist: f64) -> f64 {
    if x < min_dist {
        1.0
    } else {
        (-(x - min_dist) / spread).exp()
    }
}

fn grid(spread: f64) -> Vec<f64> {
    let hi = 3.0 * spread;
    (0..SAMPLES).map(|i| hi * i as f64 / (SAMPLES - 1) as f64).collect()
}

/// Sum of squared residuals of the curve against the target on the fit grid.
pub fn curve_sse(a: f64, b: f64, spread: f64, min_dist: f64) -> f64 {
    grid(spread)
        .into_iter()
        .map(|x| {
            let r = 1.0 / (1.0 + a * x.powf(2.0 * b)) - target(x, spread, min_dist);
            r * r
        })
        .sum()
}

/// Least-squares `(a, b)` via Levenberg–Marquardt from `(1, 1)`.
pub fn fit_ab(spread: f64, min_dist: f64) -> (f64, f64) {
    let xs = grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&x| target(x, spread, min_dist)).collect();

    // residuals and Jacobian columns at (a, b)
    let eval = |a: f64, b: f64| {
        let mut res = Vec::with_capacity(SAMPLES);
        let mut ja = Vec::with_capacity(SAMPLES);
        let mut jb = Vec::with_capacity(SAMPLES);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                res.push(1.0 - y);
                ja.push(0.0);
                jb.push(0.0);
                continue;
            }
            let p = x.powf(2.0 * b);
            let den = 1.0 + a * p;
            res.push(1.0 / den - y);
            ja.push(-p / (den * den));
            jb.push(-a * p * 2.0 * x.ln() / (den * den));
        }
        (res, ja, jb)
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let (mut r, mut ja, mut jb) = eval(a, b);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for _ in 0..1000 {
        let (mut haa, mut hab, mut hbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..r.len() {
            haa += ja[i] * ja[i];
            hab += ja[i] * jb[i];
            hbb += jb[i] * jb[i];
            ga += ja[i] * r[i];
            gb += jb[i] * r[i];
        }
        let (daa, dbb) = (haa * (1.0 + lambda), hbb * (1.0 + lambda));
        let det = daa * dbb - hab * hab;
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = -(dbb * ga - hab * gb) / det;
        let step_b = -(daa * gb - hab * ga) / det;
        let (na, nb) = (a + step_a, b + step_b);
        let (nr, nja, njb) = eval(na, nb);
        let nc = cost(&nr);
        if nc.is_finite() && nc <= c {
            let converged = step_a.abs() < 1e-13 * (1.0 + a.abs()) && step_b.abs() < 1e-13 * (1.0 + b.abs());
            a = na;
            b = nb;
            r = nr;
            ja = nja;
            jb = njb;
            c = nc;
            lambda = (lambda * 0.3).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (a, b)
}
