//! Monodromy matrix, Floquet discriminant, multipliers and Floquet solutions.

use serde::Serialize;

use crate::fundsys::{Endpoint, Propagator, SolutionGrid};
use crate::potential::Potential;
use crate::quad::simpson;
use crate::{Error, Result, C64, DEFAULT_GRID};

/// `|s(ζ,π)|` below `1e-10/(1+|ζ|)` counts as a Dirichlet eigenvalue.
pub fn dirichlet_singular(s_pi: C64, zeta: C64) -> bool {
    s_pi.norm() < 1e-10 / (1.0 + zeta.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloquetData {
    pub zeta: C64,
    pub c_pi: C64,
    pub cprime_pi: C64,
    pub s_pi: C64,
    pub sprime_pi: C64,
    pub u_plus: C64,
    pub u_minus: C64,
    pub rho_plus: C64,
    pub rho_minus: C64,
    pub m_plus: C64,
    pub m_minus: C64,
    pub u_plus_dot: C64,
    pub u_plus_ddot: C64,
}

/// `ψ± = c + m±·s` and their derivatives on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSolutions {
    pub zeta: C64,
    pub xs: Vec<f64>,
    pub psi_plus: Vec<C64>,
    pub dpsi_plus: Vec<C64>,
    pub psi_minus: Vec<C64>,
    pub dpsi_minus: Vec<C64>,
    pub m_plus: C64,
    pub m_minus: C64,
    pub rho_plus: C64,
    pub rho_minus: C64,
}

/// `(√(1−u₊²), ρ₊, ρ₋)` with the branch fixed so that `|ρ₊| ≤ 1`.
///
/// When both multipliers sit on the unit circle the principal root is kept.
pub fn multipliers(u_plus: C64) -> (C64, C64, C64) {
    let i = C64::new(0.0, 1.0);
    let mut w = (C64::new(1.0, 0.0) - u_plus * u_plus).sqrt();
    let mut rho = u_plus + i * w;
    if rho.norm() > 1.0 + 1e-13 {
        w = -w;
        rho = u_plus + i * w;
    }
    (w, rho, u_plus - i * w)
}

/// Floquet evaluator bound to one potential and one grid size.
#[derive(Debug, Clone)]
pub struct Floquet {
    prop: Propagator,
}

impl Floquet {
    pub fn new(v: &Potential, g: usize) -> Result<Self> {
        Ok(Floquet { prop: Propagator::new(v, g)? })
    }

    pub fn from_propagator(prop: Propagator) -> Self {
        Floquet { prop }
    }

    pub fn propagator(&self) -> &Propagator {
        &self.prop
    }

    pub fn grid_points(&self) -> usize {
        self.prop.grid_points()
    }

    pub fn endpoint(&self, zeta: C64) -> Result<Endpoint> {
        self.prop.endpoint(zeta)
    }

    pub fn u_plus(&self, zeta: C64) -> Result<C64> {
        Ok(self.endpoint(zeta)?.u_plus())
    }

    pub fn u_plus_dot(&self, zeta: C64) -> Result<C64> {
        Ok(self.endpoint(zeta)?.u_plus_dot())
    }

    /// Central difference of `u₊^•` with one Richardson level.
    pub fn u_plus_ddot(&self, zeta: C64) -> Result<C64> {
        let h = 1e-4 * zeta.norm().max(1.0);
        let d = |h: f64| -> Result<C64> {
            Ok((self.u_plus_dot(zeta + h)? - self.u_plus_dot(zeta - h)?) / (2.0 * h))
        };
        let coarse = d(h)?;
        let fine = d(h / 2.0)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    }

    pub fn data(&self, zeta: C64) -> Result<FloquetData> {
        let e = self.endpoint(zeta)?;
        Ok(assemble(&e, self.u_plus_ddot(zeta)?))
    }

    pub fn grid(&self, zeta: C64) -> Result<SolutionGrid> {
        self.prop.grid(zeta)
    }

    pub fn grid_with_derivatives(&self, zeta: C64) -> Result<SolutionGrid> {
        self.prop.grid_with_derivatives(zeta)
    }

    pub fn solutions(&self, zeta: C64) -> Result<FloquetSolutions> {
        let g = self.grid(zeta)?;
        let last = g.len() - 1;
        let s_pi = g.s[last];
        if dirichlet_singular(s_pi, zeta) {
            return Err(Error::DirichletSingular { zeta, s_abs: s_pi.norm() });
        }
        let u_plus = (g.c[last] + g.sprime[last]) * 0.5;
        let u_minus = (g.c[last] - g.sprime[last]) * 0.5;
        let (w, rho_plus, rho_minus) = multipliers(u_plus);
        let i = C64::new(0.0, 1.0);
        let m_plus = (-u_minus + i * w) / s_pi;
        let m_minus = (-u_minus - i * w) / s_pi;
        let comb = |a: &[C64], b: &[C64], m: C64| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + m * y).collect() };
        Ok(FloquetSolutions {
            zeta,
            psi_plus: comb(&g.c, &g.s, m_plus),
            dpsi_plus: comb(&g.cprime, &g.sprime, m_plus),
            psi_minus: comb(&g.c, &g.s, m_minus),
            dpsi_minus: comb(&g.cprime, &g.sprime, m_minus),
            xs: g.xs,
            m_plus,
            m_minus,
            rho_plus,
            rho_minus,
        })
    }

    /// Max over ± of `|M(1, m±)ᵀ − ρ±(1, m±)ᵀ| / max(1, |m±|)`.
    pub fn multiplier_relation_check(&self, zeta: C64) -> Result<f64> {
        let e = self.endpoint(zeta)?;
        if dirichlet_singular(e.s, zeta) {
            return Err(Error::DirichletSingular { zeta, s_abs: e.s.norm() });
        }
        let d = assemble(&e, C64::default());
        let defect = |m: C64, rho: C64| -> f64 {
            let r0 = e.c + e.s * m - rho;
            let r1 = e.cp + e.sp * m - rho * m;
            r0.norm().max(r1.norm()) / m.norm().max(1.0)
        };
        Ok(defect(d.m_plus, d.rho_plus).max(defect(d.m_minus, d.rho_minus)))
    }
}

fn assemble(e: &Endpoint, u_plus_ddot: C64) -> FloquetData {
    let u_plus = e.u_plus();
    let u_minus = e.u_minus();
    let (w, rho_plus, rho_minus) = multipliers(u_plus);
    let i = C64::new(0.0, 1.0);
    FloquetData {
        zeta: e.zeta,
        c_pi: e.c,
        cprime_pi: e.cp,
        s_pi: e.s,
        sprime_pi: e.sp,
        u_plus,
        u_minus,
        rho_plus,
        rho_minus,
        m_plus: (-u_minus + i * w) / e.s,
        m_minus: (-u_minus - i * w) / e.s,
        u_plus_dot: e.u_plus_dot(),
        u_plus_ddot,
    }
}

pub fn floquet_data(v: &Potential, zeta: C64) -> Result<FloquetData> {
    Floquet::new(v, DEFAULT_GRID)?.data(zeta)
}

pub fn floquet_solutions(v: &Potential, zeta: C64, g: usize) -> Result<FloquetSolutions> {
    Floquet::new(v, g)?.solutions(zeta)
}

pub fn multiplier_relation_check(v: &Potential, zeta: C64) -> Result<f64> {
    Floquet::new(v, DEFAULT_GRID)?.multiplier_relation_check(zeta)
}

/// `u₊^•(ζ)` recomputed as `−ζ s(ζ,π) ∫₀^π ψ₊ψ₋`.
pub fn u_plus_dot_from_solutions(fl: &Floquet, zeta: C64) -> Result<C64> {
    let sol = fl.solutions(zeta)?;
    let h = sol.xs[1] - sol.xs[0];
    let prod: Vec<C64> = sol.psi_plus.iter().zip(&sol.psi_minus).map(|(a, b)| a * b).collect();
    let s_pi = fl.endpoint(zeta)?.s;
    Ok(-zeta * s_pi * simpson(&prod, h))
}

/// `Σ_ξ [|∫c(ξ,·)f|² + |ξ²|·|∫s(ξ,·)f|²] / ‖f‖²` for `f = e^{2inx}`.
///
/// Stays bounded in `n` when the `ξ` run through the square roots of the
/// periodic eigenvalues.
pub fn fundamental_bessel_sum(fl: &Floquet, roots: &[C64], n: i64) -> Result<f64> {
    let grids = crate::par::map(roots, |&xi| fl.grid(xi));
    let mut total = 0.0;
    for (g, &xi) in grids.into_iter().zip(roots) {
        let g = g?;
        let h = g.h();
        let f: Vec<C64> = g.xs.iter().map(|&x| C64::from_polar(1.0, 2.0 * n as f64 * x)).collect();
        let ic: Vec<C64> = g.c.iter().zip(&f).map(|(a, b)| a * b).collect();
        let is: Vec<C64> = g.s.iter().zip(&f).map(|(a, b)| a * b).collect();
        total += simpson(&ic, h).norm_sqr() + (xi * xi).norm() * simpson(&is, h).norm_sqr();
    }
    Ok(total / std::f64::consts::PI)
}
