//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

/// `Σ wᵢ 𝟙[x ≤ θᵢ]/θᵢ` by a plain loop over unsorted atoms.
pub fn direct_mixture_eval(atoms: &[f64], weights: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..atoms.len() {
        if x >= 0.0 && x <= atoms[i] {
            total += weights[i] / atoms[i];
        }
    }
    total
}

/// Least concave majorant of the ECDF from its definition: at every ECDF
/// point, the largest chord value over all pairs of points bracketing it.
/// Returns the majorant's slope on each gap between consecutive distinct
/// sample values (starting from 0).
pub fn brute_force_lcm_slopes(data: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut xs = data.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for (i, &x) in xs.iter().enumerate() {
        let y = (i + 1) as f64 / n;
        if pts.last().unwrap().0 == x {
            pts.last_mut().unwrap().1 = y;
        } else {
            pts.push((x, y));
        }
    }
    let majorant: Vec<f64> = pts
        .iter()
        .map(|&(x, y)| {
            let mut best = y;
            for &(xa, ya) in &pts {
                for &(xb, yb) in &pts {
                    if xa < x && x < xb {
                        best = best.max(ya + (yb - ya) * (x - xa) / (xb - xa));
                    }
                }
            }
            best
        })
        .collect();
    pts.windows(2)
        .zip(majorant.windows(2))
        .map(|(p, m)| (p[0].0, p[1].0, (m[1] - m[0]) / (p[1].0 - p[0].0)))
        .collect()
}

/// Midpoint-rule integral of `g` over `[0, top]` with `cells` cells.
pub fn midpoint<F: Fn(f64) -> f64>(g: F, top: f64, cells: usize) -> f64 {
    let h = top / cells as f64;
    (0..cells).map(|i| g((i as f64 + 0.5) * h)).sum::<f64>() * h
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Standard error of the mean of an autocorrelated trace, scaled by its ESS.
pub fn mcmc_mean_and_se(v: &[f64]) -> (f64, f64) {
    let (m, se) = mean_and_se(v);
    let ess = monodens::mcmc::effective_sample_size(v).map(|e| e.value).unwrap_or(v.len() as f64);
    (m, se * (v.len() as f64 / ess).sqrt())
}

/// One-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
