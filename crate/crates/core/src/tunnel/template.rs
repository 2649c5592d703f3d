//! The C∞ transition template used to smooth curvature jumps.
//!
//! `g(x) = ψ(x) / (ψ(x) + ψ(1 − x))` with `ψ(x) = e^{−1/x}` for `x > 0` and
//! `ψ(x) = 0` otherwise. It vanishes for `x ≤ 0`, equals one for `x ≥ 1`, is
//! strictly increasing in between and satisfies `g(x) + g(1 − x) = 1`, so its
//! mean over `[0, 1]` is exactly one half.

/// Mean value of the template over `[0, 1]`.
pub const TEMPLATE_MEAN: f64 = 0.5;

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step from 0 to 1 over the unit interval.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = psi(x);
        let b = psi(1.0 - x);
        a / (a + b)
    }
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub(crate) fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&t, &w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

/// `∫₀ˣ g`, clamped so that values beyond 1 continue linearly.
pub fn smoothstep_integral(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return TEMPLATE_MEAN + (x - 1.0);
    }
    const PANELS: usize = 32;
    let h = x / PANELS as f64;
    (0..PANELS)
        .map(|i| gauss_legendre(smoothstep, i as f64 * h, (i + 1) as f64 * h))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_monotone() {
        assert_eq!(smoothstep(-0.5), 0.0);
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(3.0), 1.0);
        let mut prev = 0.0;
        for i in 10..960 {
            let v = smoothstep(i as f64 / 1000.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn symmetric_about_midpoint() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((smoothstep(x) + smoothstep(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn integral_matches_mean() {
        assert!((smoothstep_integral(1.0) - TEMPLATE_MEAN).abs() < 1e-15);
        // Composite quadrature over the full interval reproduces the exact mean.
        let full: f64 = (0..64)
            .map(|i| gauss_legendre(smoothstep, i as f64 / 64.0, (i + 1) as f64 / 64.0))
            .sum();
        assert!((full - 0.5).abs() < 1e-12, "{full}");
        assert!((smoothstep_integral(0.5) - 0.25).abs() < 0.25);
        assert!(smoothstep_integral(0.3) < smoothstep_integral(0.31));
    }
}
