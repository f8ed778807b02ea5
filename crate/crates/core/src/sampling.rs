//! Exact samplers for the one-dimensional laws used by the priors and the
//! conjugate kernel-scale updates.

use rand::Rng;

/// Draws from the density proportional to `θ^(e−1)` on `[lo, hi]`, `0 ≤ lo < hi < ∞`,
/// by inverting the CDF. Written in ratio form so that large `|e|` neither
/// overflows nor loses the lower end.
pub fn truncated_power<R: Rng + ?Sized>(e: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    debug_assert!(lo >= 0.0 && hi > lo);
    let u: f64 = rng.random();
    let theta = if e == 0.0 {
        // Log-uniform on [lo, hi].
        lo * ((hi / lo).ln() * u).exp()
    } else if e > 0.0 {
        // F(θ) = (θ^e − lo^e)/(hi^e − lo^e); write q = (lo/hi)^e ∈ [0, 1].
        let q = (lo / hi).powf(e);
        hi * (q + u * (1.0 - q)).powf(1.0 / e)
    } else {
        // e < 0 needs lo > 0; with q = (hi/lo)^e ∈ (0, 1], (θ/lo)^e = 1 − u(1 − q).
        let q = (hi / lo).powf(e);
        lo * (1.0 - u * (1.0 - q)).powf(1.0 / e)
    };
    theta.clamp(lo, hi)
}

/// Draws `u` from the density proportional to `exp(s·u − r·eᵘ)` restricted to
/// `u ≥ u0`, then returns `θ = eᵘ`. The target is log-concave in `u`, so a
/// flat-top envelope with two exponential tails gives an exact rejection sampler.
pub fn truncated_log_gamma<R: Rng + ?Sized>(s: f64, r: f64, u0: f64, rng: &mut R) -> f64 {
    debug_assert!(r > 0.0);
    let phi = |u: f64| s * u - r * u.exp();
    let mode = if s > 0.0 { (s / r).ln() } else { f64::NEG_INFINITY };
    let c = mode.max(u0);
    let top = phi(c);
    let level = top - 1.0;

    // Right crossing φ(u_r) = φ(c) − 1.
    let mut step = 1.0;
    while phi(c + step) > level {
        step *= 2.0;
    }
    let u_right = bisect(&phi, level, c, c + step);
    // Left crossing, unless the truncation point comes first.
    let u_left = if c > u0 && phi(u0) < level {
        let mut step = 1.0;
        while c - step > u0 && phi(c - step) > level {
            step *= 2.0;
        }
        bisect(&phi, level, c, (c - step).max(u0))
    } else {
        u0
    };

    let right_scale = u_right - c;
    let left_scale = c - u_left;
    let flat = u_right - u_left;
    let right_mass = right_scale * (-1f64).exp();
    let left_mass = if u_left > u0 {
        left_scale * (-1f64).exp() * (1.0 - (-(u_left - u0) / left_scale).exp())
    } else {
        0.0
    };
    let total = flat + right_mass + left_mass;

    loop {
        let pick: f64 = rng.random::<f64>() * total;
        let (u, envelope) = if pick < flat {
            let u = u_left + rng.random::<f64>() * flat;
            (u, top)
        } else if pick < flat + right_mass {
            let e: f64 = -(1.0 - rng.random::<f64>()).ln();
            (u_right + e * right_scale, level - e)
        } else {
            // Exponential tail towards u0, truncated at u0.
            let span = (u_left - u0) / left_scale;
            let v: f64 = rng.random();
            let d = -(1.0 - v * (1.0 - (-span).exp())).ln();
            (u_left - d * left_scale, level - d)
        };
        if u < u0 {
            continue;
        }
        let accept: f64 = rng.random();
        if accept.ln() <= phi(u) - envelope {
            return u.exp();
        }
    }
}

/// Solves `φ(u) = level` between `inside` (where φ ≥ level) and `outside`.
fn bisect<F: Fn(f64) -> f64>(phi: &F, level: f64, inside: f64, outside: f64) -> f64 {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if phi(m) > level {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
