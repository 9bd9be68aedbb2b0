//! Complex potentials on `[0, π]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Pairs `(n, c_n)` for the basis `e^{2inx}`, sorted by `n`.
    Fourier(Vec<(i64, C64)>),
    /// Values on the uniform grid `x_j = jπ/(M-1)`.
    Samples(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    repr: Representation,
    mean_c: C64,
}

impl Potential {
    pub fn zero() -> Self {
        Potential {
            repr: Representation::Fourier(Vec::new()),
            mean_c: C64::new(0.0, 0.0),
        }
    }

    pub fn from_fourier(coeffs: Vec<(i64, C64)>) -> Result<Self> {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(n, _)| n);
        if let Some(w) = coeffs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPotential(format!(
                "duplicate Fourier index {}",
                w[0].0
            )));
        }
        if let Some(&(n, c)) = coeffs.iter().find(|(_, c)| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidPotential(format!("non-finite coefficient {c} at n = {n}")));
        }
        let c0 = coeffs
            .iter()
            .find(|&&(n, _)| n == 0)
            .map(|&(_, c)| c)
            .unwrap_or_default();
        Ok(Potential {
            repr: Representation::Fourier(coeffs),
            mean_c: c0 * (PI / 2.0),
        })
    }

    /// Fourier potential restricted to positive frequencies.
    pub fn gasymov(coeffs: Vec<(i64, C64)>) -> Result<Self> {
        if let Some(&(n, _)) = coeffs.iter().find(|&&(n, _)| n < 1) {
            return Err(Error::InvalidPotential(format!(
                "gasymov potentials need n >= 1, got n = {n}"
            )));
        }
        Self::from_fourier(coeffs)
    }

    pub fn from_samples(values: Vec<C64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidPotential(format!(
                "need at least 3 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        // the interpolant is piecewise linear, so its integral is the trapezoid sum
        let h = PI / (values.len() - 1) as f64;
        let inner: C64 = values[1..values.len() - 1].iter().sum();
        let integral = (inner + (values[0] + values[values.len() - 1]) * 0.5) * h;
        Ok(Potential {
            repr: Representation::Samples(values),
            mean_c: integral * 0.5,
        })
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn eval(&self, x: f64) -> C64 {
        match &self.repr {
            Representation::Fourier(coeffs) => coeffs
                .iter()
                .map(|&(n, c)| c * C64::from_polar(1.0, 2.0 * n as f64 * x))
                .sum(),
            Representation::Samples(v) => {
                let m = v.len() - 1;
                let t = (x / PI).clamp(0.0, 1.0) * m as f64;
                let r = t.round();
                if (t - r).abs() < 1e-9 {
                    return v[r as usize];
                }
                let j = (t.floor() as usize).min(m - 1);
                let th = t - j as f64;
                v[j] * (1.0 - th) + v[j + 1] * th
            }
        }
    }

    /// The constant `c = ½∫₀^π V` of the large-ζ expansion
    /// `c(ζ,x) ≈ cos ζx + c·sin ζx / ζ`.
    pub fn mean_constant(&self) -> C64 {
        self.mean_c
    }

    /// True if only strictly positive frequencies occur.
    pub fn is_gasymov(&self) -> bool {
        match &self.repr {
            Representation::Fourier(c) => c.iter().all(|&(n, _)| n >= 1),
            Representation::Samples(_) => false,
        }
    }

    /// True if `V` is real-valued on `[0, π]`.
    pub fn is_real(&self) -> bool {
        match &self.repr {
            Representation::Fourier(coeffs) => coeffs.iter().all(|&(n, c)| {
                let partner = coeffs
                    .iter()
                    .find(|&&(m, _)| m == -n)
                    .map(|&(_, d)| d)
                    .unwrap_or_default();
                (c - partner.conj()).norm() <= 1e-14 * (1.0 + c.norm())
            }),
            Representation::Samples(v) => v.iter().all(|z| z.im == 0.0),
        }
    }

    /// Fourier coefficients `c_n = (1/π)∫₀^π V e^{-2inx}` for `|n| ≤ max_mode`.
    ///
    /// Exact for Fourier potentials; sampled potentials are projected by
    /// Simpson quadrature of the interpolant.
    pub fn fourier_coefficients(&self, max_mode: usize) -> Vec<(i64, C64)> {
        let max_mode = max_mode as i64;
        match &self.repr {
            Representation::Fourier(c) => c
                .iter()
                .copied()
                .filter(|&(n, _)| n.abs() <= max_mode)
                .collect(),
            Representation::Samples(v) => {
                let nodes = {
                    let base = (v.len() - 1) * 8;
                    base.max(4096) + 1
                };
                let xs = crate::quad::uniform_grid(nodes);
                let h = PI / (nodes - 1) as f64;
                let vals: Vec<C64> = xs.iter().map(|&x| self.eval(x)).collect();
                (-max_mode..=max_mode)
                    .map(|n| {
                        let f: Vec<C64> = xs
                            .iter()
                            .zip(&vals)
                            .map(|(&x, &val)| val * C64::from_polar(1.0, -2.0 * n as f64 * x))
                            .collect();
                        (n, crate::quad::simpson(&f, h) / PI)
                    })
                    .collect()
            }
        }
    }
}

/// JSON form: `{"type":"fourier","coeffs":[[n,re,im],...]}`,
/// `{"type":"samples","values":[[re,im],...]}` or
/// `{"type":"gasymov","coeffs":[[n,re,im],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Fourier { coeffs: Vec<(i64, f64, f64)> },
    Samples { values: Vec<(f64, f64)> },
    Gasymov { coeffs: Vec<(i64, f64, f64)> },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialSpec::Fourier { coeffs } => Potential::from_fourier(
                coeffs.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect(),
            ),
            PotentialSpec::Gasymov { coeffs } => Potential::gasymov(
                coeffs.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect(),
            ),
            PotentialSpec::Samples { values } => {
                Potential::from_samples(values.iter().map(|&(re, im)| C64::new(re, im)).collect())
            }
        }
    }
}

/// Built-in test potentials.
pub mod fixtures {
    use super::*;

    pub fn zero() -> Potential {
        Potential::zero()
    }

    /// `V(x) = 2cos 2x`.
    pub fn mathieu() -> Potential {
        Potential::from_fourier(vec![(-1, C64::new(1.0, 0.0)), (1, C64::new(1.0, 0.0))]).unwrap()
    }

    /// `V(x) = 0.5e^{2ix} + 0.25e^{4ix}`.
    pub fn gasymov() -> Potential {
        Potential::gasymov(vec![(1, C64::new(0.5, 0.0)), (2, C64::new(0.25, 0.0))]).unwrap()
    }

    /// `V(x) = e^{2ix} + 0.3e^{-2ix}`, complex and not of Gasymov type.
    pub fn complex_pair() -> Potential {
        Potential::from_fourier(vec![(1, C64::new(1.0, 0.0)), (-1, C64::new(0.3, 0.0))]).unwrap()
    }

    /// `V(x) = e^{2ix}`.
    pub fn single_mode() -> Potential {
        Potential::gasymov(vec![(1, C64::new(1.0, 0.0))]).unwrap()
    }

    /// `V(x) = 1`.
    pub fn constant_one() -> Potential {
        Potential::from_fourier(vec![(0, C64::new(1.0, 0.0))]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Potential> {
        match name {
            "zero" => Some(zero()),
            "mathieu" => Some(mathieu()),
            "gasymov" => Some(gasymov()),
            "complex" => Some(complex_pair()),
            _ => None,
        }
    }
}
