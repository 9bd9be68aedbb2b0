//! Uniform grids on `[0, π]` and Simpson-type quadrature.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

pub fn uniform_grid(g: usize) -> Vec<f64> {
    let h = PI / (g - 1) as f64;
    (0..g).map(|j| if j == g - 1 { PI } else { j as f64 * h }).collect()
}

pub fn check_grid(g: usize) -> Result<()> {
    if g < 65 || g % 2 == 0 {
        return Err(Error::InvalidGrid(format!(
            "grid needs an odd number of nodes >= 65, got {g}"
        )));
    }
    Ok(())
}

/// Composite Simpson over an odd number of equally spaced values.
pub fn simpson(f: &[C64], h: f64) -> C64 {
    let n = f.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut odd = C64::new(0.0, 0.0);
    let mut even = C64::new(0.0, 0.0);
    for (j, &v) in f.iter().enumerate().take(n - 1).skip(1) {
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    (f[0] + f[n - 1] + odd * 4.0 + even * 2.0) * (h / 3.0)
}

/// Quadrature weights for `n_points` equally spaced nodes with spacing `h`.
///
/// Simpson for an odd count; for an even count Simpson on the leading panels
/// and the 3/8 rule on the last three intervals. Two points fall back to the
/// trapezoid, one point to zero weight.
pub fn weights(n_points: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n_points];
    match n_points {
        0 | 1 => {}
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let intervals = n_points - 1;
            let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
            let mut j = 0;
            while j < simpson_end {
                w[j] += h / 3.0;
                w[j + 1] += 4.0 * h / 3.0;
                w[j + 2] += h / 3.0;
                j += 2;
            }
            if simpson_end < intervals {
                let s = simpson_end;
                let c = 3.0 * h / 8.0;
                w[s] += c;
                w[s + 1] += 3.0 * c;
                w[s + 2] += 3.0 * c;
                w[s + 3] += c;
            }
        }
    }
    w
}

/// Running integrals `∫₀^{x_j} f` at every node.
///
/// Even nodes use plain Simpson; odd nodes add the cubic half-panel rule
/// `h/24·(9f₀ + 19f₁ − 5f₂ + f₃)` (mirrored at the right end).
pub fn cumulative_simpson(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut j = 0;
    while j + 2 < n {
        let panel = (f[j] + f[j + 1] * 4.0 + f[j + 2]) * (h / 3.0);
        let half = if j + 3 < n {
            (f[j] * 9.0 + f[j + 1] * 19.0 - f[j + 2] * 5.0 + f[j + 3]) * (h / 24.0)
        } else if j >= 1 {
            panel - (f[j + 2] * 9.0 + f[j + 1] * 19.0 - f[j] * 5.0 + f[j - 1]) * (h / 24.0)
        } else {
            (f[j] * 5.0 + f[j + 1] * 8.0 - f[j + 2]) * (h / 12.0)
        };
        out[j + 1] = out[j] + half;
        out[j + 2] = out[j] + panel;
        j += 2;
    }
    if j + 1 < n {
        // trailing single interval on an even-length input
        let half = (f[j + 1] * 5.0 + f[j] * 8.0 - f[j - 1]) * (h / 12.0);
        out[j + 1] = out[j] + half;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_cubic_exact() {
        let xs = uniform_grid(65);
        let h = xs[1];
        let f: Vec<C64> = xs.iter().map(|&x| C64::new(x * x * x - 2.0 * x, x)).collect();
        let exact = C64::new(PI.powi(4) / 4.0 - PI * PI, PI * PI / 2.0);
        assert!((simpson(&f, h) - exact).norm() < 1e-12);
    }

    #[test]
    fn weights_integrate_cubics_for_any_length() {
        for n in 2..12usize {
            let h = 0.1;
            let w = weights(n, h);
            let len = h * (n - 1) as f64;
            let s: f64 = (0..n).map(|j| w[j] * (j as f64 * h).powi(if n > 2 { 3 } else { 1 })).sum();
            let exact = if n > 2 { len.powi(4) / 4.0 } else { len * len / 2.0 };
            assert!((s - exact).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let xs = uniform_grid(257);
        let h = xs[1];
        let f: Vec<C64> = xs.iter().map(|&x| C64::new(x.cos(), 0.0)).collect();
        let cum = cumulative_simpson(&f, h);
        for (j, &x) in xs.iter().enumerate() {
            assert!((cum[j].re - x.sin()).abs() < 1e-9, "node {j}");
        }
    }
}
