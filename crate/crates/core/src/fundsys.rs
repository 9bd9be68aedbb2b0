//! Fundamental system `c(ζ,·)`, `s(ζ,·)` of `-ψ'' + Vψ = ζ²ψ` and its ζ-derivatives.
//!
//! `c(0) = s'(0) = 1`, `c'(0) = s(0) = 0`. The ζ-derivatives come from the
//! variation-of-constants identities
//! `s^•(ζ,x) = 2ζ∫₀ˣ [c(x)s(y) − s(x)c(y)] s(y) dy` (and the analogues for
//! `c^•`, `c^•′`, `s^•′`), so only the three running integrals of `c²`, `cs`
//! and `s²` are needed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::potential::Potential;
use crate::quad::{check_grid, cumulative_simpson, simpson, uniform_grid};
use crate::{Error, Result, C64};

/// One-step propagation scheme on the output grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Fourth-order Magnus with two Gauss nodes and a closed-form 2×2 exponential.
    #[default]
    Magnus4,
    /// Numerov for the node values, five-point differences for the derivatives.
    Numerov,
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
type M2 = [C64; 4];

const ID: M2 = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 1.0, im: 0.0 },
];

#[inline]
fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Potential samples cached for one grid size, reused for every ζ.
#[derive(Debug, Clone)]
pub struct Propagator {
    g: usize,
    h: f64,
    method: Integrator,
    // V at the two Gauss nodes of each interval
    samples: Vec<[C64; 2]>,
    // V at the grid nodes, Numerov only
    nodes: Vec<C64>,
}

/// Monodromy entries at `x = π` plus the bilinear integrals `∫c²`, `∫cs`, `∫s²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub zeta: C64,
    pub c: C64,
    pub cp: C64,
    pub s: C64,
    pub sp: C64,
    pub i_cc: C64,
    pub i_cs: C64,
    pub i_ss: C64,
}

impl Endpoint {
    pub fn u_plus(&self) -> C64 {
        (self.c + self.sp) * 0.5
    }

    pub fn u_minus(&self) -> C64 {
        (self.c - self.sp) * 0.5
    }

    pub fn det(&self) -> C64 {
        self.c * self.sp - self.cp * self.s
    }

    /// `s^•(ζ,π) / 2ζ`, the derivative of `s(·,π)` with respect to `λ = ζ²`.
    pub fn dlam_s(&self) -> C64 {
        self.c * self.i_ss - self.s * self.i_cs
    }

    /// `c^•(ζ,π) / 2ζ`.
    pub fn dlam_c(&self) -> C64 {
        self.c * self.i_cs - self.s * self.i_cc
    }

    /// `c^•′(ζ,π) / 2ζ`.
    pub fn dlam_cp(&self) -> C64 {
        self.cp * self.i_cs - self.sp * self.i_cc
    }

    /// `s^•′(ζ,π) / 2ζ`.
    pub fn dlam_sp(&self) -> C64 {
        self.cp * self.i_ss - self.sp * self.i_cs
    }

    /// `dΔ/dλ` for the discriminant `Δ(λ) = u₊(√λ)`.
    pub fn dlam_u_plus(&self) -> C64 {
        (self.dlam_c() + self.dlam_sp()) * 0.5
    }

    pub fn s_dot(&self) -> C64 {
        self.dlam_s() * (self.zeta * 2.0)
    }

    pub fn c_dot(&self) -> C64 {
        self.dlam_c() * (self.zeta * 2.0)
    }

    pub fn cp_dot(&self) -> C64 {
        self.dlam_cp() * (self.zeta * 2.0)
    }

    pub fn sp_dot(&self) -> C64 {
        self.dlam_sp() * (self.zeta * 2.0)
    }

    /// `u₊^• = ζ∫₀^π [−s(π)c² + (c(π)−s′(π))cs + c′(π)s²]`.
    pub fn u_plus_dot(&self) -> C64 {
        self.dlam_u_plus() * (self.zeta * 2.0)
    }

    pub fn u_minus_dot(&self) -> C64 {
        (self.dlam_c() - self.dlam_sp()) * self.zeta
    }

    fn finite(&self) -> bool {
        [self.c, self.cp, self.s, self.sp, self.i_cc, self.i_cs, self.i_ss]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Node values of the fundamental system for one ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub zeta: C64,
    pub xs: Vec<f64>,
    pub c: Vec<C64>,
    pub cprime: Vec<C64>,
    pub s: Vec<C64>,
    pub sprime: Vec<C64>,
    pub cdot: Option<Vec<C64>>,
    pub sdot: Option<Vec<C64>>,
    pub cdot_prime: Option<Vec<C64>>,
    pub sdot_prime: Option<Vec<C64>>,
}

impl SolutionGrid {
    pub fn h(&self) -> f64 {
        PI / (self.xs.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn has_derivatives(&self) -> bool {
        self.cdot.is_some() && self.sdot.is_some() && self.cdot_prime.is_some() && self.sdot_prime.is_some()
    }
}

impl Propagator {
    pub fn new(v: &Potential, g: usize) -> Result<Self> {
        Self::with_method(v, g, Integrator::Magnus4)
    }

    pub fn with_method(v: &Potential, g: usize, method: Integrator) -> Result<Self> {
        check_grid(g)?;
        let h = PI / (g - 1) as f64;
        let off = h * (0.5 - 3f64.sqrt() / 6.0);
        let samples: Vec<[C64; 2]> = (0..g - 1)
            .map(|i| {
                let x = i as f64 * h;
                [v.eval(x + off), v.eval(x + h - off)]
            })
            .collect();
        let nodes: Vec<C64> = match method {
            Integrator::Magnus4 => Vec::new(),
            Integrator::Numerov => uniform_grid(g).iter().map(|&x| v.eval(x)).collect(),
        };
        if samples
            .iter()
            .flatten()
            .chain(&nodes)
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Integration("non-finite potential value".into()));
        }
        Ok(Propagator { g, h, method, samples, nodes })
    }

    pub fn grid_points(&self) -> usize {
        self.g
    }

    pub fn method(&self) -> Integrator {
        self.method
    }

    /// Magnus step over interval `i`.
    #[inline]
    fn step(&self, i: usize, z: C64, m: &M2) -> M2 {
        let h = self.h;
        let [v1, v2] = self.samples[i];
        let a = (v1 - v2) * (3f64.sqrt() * h * h / 12.0);
        let w = ((v1 + v2) * 0.5 - z) * h;
        // Ω = [[a, h], [w, −a]], Ω² = q·I
        let q = a * a + w * h;
        let (ch, sh_d) = cosh_sinhc(q);
        let e = [ch + sh_d * a, sh_d * h, sh_d * w, ch - sh_d * a];
        mul(&e, m)
    }

    /// Numerov recursion for `y'' = (V − z) y`; the first step is taken by Magnus.
    fn numerov(&self, z: C64, y0: C64, y1: C64) -> Vec<C64> {
        let k = self.h * self.h / 12.0;
        let q: Vec<C64> = self.nodes.iter().map(|v| v - z).collect();
        let mut y = Vec::with_capacity(self.g);
        y.push(y0);
        y.push(y1);
        for n in 1..self.g - 1 {
            let next = (y[n] * (q[n] * (10.0 * k) + 2.0) - y[n - 1] * (C64::new(1.0, 0.0) - q[n - 1] * k))
                / (C64::new(1.0, 0.0) - q[n + 1] * k);
            y.push(next);
        }
        y
    }

    /// Integrate to `x = π`, accumulating Simpson sums on the fly.
    pub fn endpoint(&self, zeta: C64) -> Result<Endpoint> {
        if self.method == Integrator::Numerov {
            return endpoint_from_grid(&self.grid(zeta)?);
        }
        let z = zeta * zeta;
        let mut m = ID;
        let (mut cc, mut cs, mut ss) = (C64::default(), C64::default(), C64::default());
        for i in 0..self.g {
            if i > 0 {
                m = self.step(i - 1, z, &m);
            }
            let w = if i == 0 || i == self.g - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // M = [[c, s], [c', s']]
            cc += m[0] * m[0] * w;
            cs += m[0] * m[1] * w;
            ss += m[1] * m[1] * w;
        }
        let k = self.h / 3.0;
        let e = Endpoint {
            zeta,
            c: m[0],
            s: m[1],
            cp: m[2],
            sp: m[3],
            i_cc: cc * k,
            i_cs: cs * k,
            i_ss: ss * k,
        };
        if !e.finite() {
            return Err(Error::Integration(format!("non-finite monodromy at zeta = {zeta}")));
        }
        Ok(e)
    }

    /// Node values of `c, c', s, s'`.
    pub fn grid(&self, zeta: C64) -> Result<SolutionGrid> {
        let z = zeta * zeta;
        let g = self.g;
        let mut out = SolutionGrid {
            zeta,
            xs: uniform_grid(g),
            c: Vec::with_capacity(g),
            cprime: Vec::with_capacity(g),
            s: Vec::with_capacity(g),
            sprime: Vec::with_capacity(g),
            cdot: None,
            sdot: None,
            cdot_prime: None,
            sdot_prime: None,
        };
        if self.method == Integrator::Numerov {
            let first = self.step(0, z, &ID);
            out.c = self.numerov(z, C64::new(1.0, 0.0), first[0]);
            out.s = self.numerov(z, C64::default(), first[1]);
            out.cprime = five_point_derivative(&out.c, self.h);
            out.sprime = five_point_derivative(&out.s, self.h);
            if !out.c.iter().chain(&out.s).all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Integration(format!("non-finite solution at zeta = {zeta}")));
            }
            return Ok(out);
        }
        let mut m = ID;
        for i in 0..g {
            if i > 0 {
                m = self.step(i - 1, z, &m);
            }
            out.c.push(m[0]);
            out.s.push(m[1]);
            out.cprime.push(m[2]);
            out.sprime.push(m[3]);
        }
        if !m.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Integration(format!("non-finite solution at zeta = {zeta}")));
        }
        Ok(out)
    }

    /// Node values together with the four ζ-derivative arrays.
    pub fn grid_with_derivatives(&self, zeta: C64) -> Result<SolutionGrid> {
        zeta_derivatives(self.grid(zeta)?)
    }
}

/// `(cosh √q, sinh √q / √q)`, even in `√q`.
#[inline]
fn cosh_sinhc(q: C64) -> (C64, C64) {
    if q.norm() < 1e-6 {
        let ch = C64::new(1.0, 0.0) + q * (0.5 + q * (1.0 / 24.0 + q / 720.0));
        let sh = C64::new(1.0, 0.0) + q * (1.0 / 6.0 + q * (1.0 / 120.0 + q / 5040.0));
        return (ch, sh);
    }
    let d = q.sqrt();
    let e = d.exp();
    let ei = e.inv();
    ((e + ei) * 0.5, (e - ei) * 0.5 / d)
}

/// Fourth-order first derivative from node values; one-sided stencils at the ends.
fn five_point_derivative(y: &[C64], h: f64) -> Vec<C64> {
    let n = y.len();
    let d = 12.0 * h;
    (0..n)
        .map(|j| {
            if j == 0 {
                (y[0] * -25.0 + y[1] * 48.0 - y[2] * 36.0 + y[3] * 16.0 - y[4] * 3.0) / d
            } else if j == 1 {
                (y[0] * -3.0 - y[1] * 10.0 + y[2] * 18.0 - y[3] * 6.0 + y[4]) / d
            } else if j == n - 2 {
                -(y[n - 1] * -3.0 - y[n - 2] * 10.0 + y[n - 3] * 18.0 - y[n - 4] * 6.0 + y[n - 5]) / d
            } else if j == n - 1 {
                -(y[n - 1] * -25.0 + y[n - 2] * 48.0 - y[n - 3] * 36.0 + y[n - 4] * 16.0 - y[n - 5] * 3.0) / d
            } else {
                (y[j - 2] - y[j - 1] * 8.0 + y[j + 1] * 8.0 - y[j + 2]) / d
            }
        })
        .collect()
}

fn endpoint_from_grid(g: &SolutionGrid) -> Result<Endpoint> {
    let h = g.h();
    let prod = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let n = g.len() - 1;
    let e = Endpoint {
        zeta: g.zeta,
        c: g.c[n],
        s: g.s[n],
        cp: g.cprime[n],
        sp: g.sprime[n],
        i_cc: simpson(&prod(&g.c, &g.c), h),
        i_cs: simpson(&prod(&g.c, &g.s), h),
        i_ss: simpson(&prod(&g.s, &g.s), h),
    };
    if !e.finite() {
        return Err(Error::Integration(format!("non-finite monodromy at zeta = {}", g.zeta)));
    }
    Ok(e)
}

pub fn integrate_fundamental(v: &Potential, zeta: C64, g: usize) -> Result<SolutionGrid> {
    Propagator::new(v, g)?.grid(zeta)
}

/// Fill the ζ-derivative arrays by cumulative Simpson on the stored nodes.
pub fn zeta_derivatives(g: SolutionGrid) -> Result<SolutionGrid> {
    let n = g.xs.len();
    if n < 3 || g.c.len() != n || g.s.len() != n || g.cprime.len() != n || g.sprime.len() != n {
        return Err(Error::Rejected("solution grid lacks base arrays".into()));
    }
    let h = g.h();
    let prod = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let i_cc = cumulative_simpson(&prod(&g.c, &g.c), h);
    let i_cs = cumulative_simpson(&prod(&g.c, &g.s), h);
    let i_ss = cumulative_simpson(&prod(&g.s, &g.s), h);
    let two_z = g.zeta * 2.0;
    let mut cdot = Vec::with_capacity(n);
    let mut sdot = Vec::with_capacity(n);
    let mut cdot_prime = Vec::with_capacity(n);
    let mut sdot_prime = Vec::with_capacity(n);
    for j in 0..n {
        cdot.push(two_z * (g.c[j] * i_cs[j] - g.s[j] * i_cc[j]));
        sdot.push(two_z * (g.c[j] * i_ss[j] - g.s[j] * i_cs[j]));
        cdot_prime.push(two_z * (g.cprime[j] * i_cs[j] - g.sprime[j] * i_cc[j]));
        sdot_prime.push(two_z * (g.cprime[j] * i_ss[j] - g.sprime[j] * i_cs[j]));
    }
    Ok(SolutionGrid {
        cdot: Some(cdot),
        sdot: Some(sdot),
        cdot_prime: Some(cdot_prime),
        sdot_prime: Some(sdot_prime),
        ..g
    })
}

/// Max over nodes of `|c s′ − c′ s − 1|`.
pub fn wronskian_defect(g: &SolutionGrid) -> f64 {
    (0..g.xs.len())
        .map(|j| (g.c[j] * g.sprime[j] - g.cprime[j] * g.s[j] - 1.0).norm())
        .fold(0.0, f64::max)
}
