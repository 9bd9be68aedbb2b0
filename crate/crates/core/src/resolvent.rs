//! Green's kernel of `H(t)`, Riesz projections and Fredholm product checks.
//!
//! `H(t)` carries the boundary condition `y(π) = e^{it}y(0)`,
//! `y′(π) = e^{it}y′(0)`. With `D = 2(cos t − u₊)` its resolvent kernel is
//!
//! ```text
//! G(x,y) = [−s c(x)c(y) + (c − e^{−it}) c(x)s(y) + (e^{−it} − s′) s(x)c(y) + c′ s(x)s(y)] / D
//!          + [x > y]·(c(x)s(y) − s(x)c(y))
//! ```
//!
//! where unadorned `c, s, c′, s′` are monodromy entries at `π`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::floquet::Floquet;
use crate::potential::Potential;
use crate::quad::{cumulative_simpson, simpson, weights};
use crate::spectra::{Boundary, Operator, SpectrumCatalog};
use crate::{par, sqrt_value, Error, Result, C64};

/// `|u₊ − cos t|` below this is treated as on the spectrum.
pub const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub t: f64,
    pub zeta: C64,
    pub xs: Vec<f64>,
    /// Row-major `G(x_i, y_j)`.
    pub values: Vec<C64>,
    /// Max over nodes of the disagreement of the two branches at `x = y`.
    pub diagonal_defect: f64,
    /// `c(ζ,·)` and `s(ζ,·)` at the nodes; the branches differ by `c(x)s(y) − s(x)c(y)`.
    pub c: Vec<C64>,
    pub s: Vec<C64>,
}

impl KernelGrid {
    pub fn size(&self) -> usize {
        self.xs.len()
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.xs.len() + j]
    }
}

pub fn greens_kernel(v: &Potential, t: f64, zeta: C64, g: usize) -> Result<KernelGrid> {
    greens_kernel_with(&Floquet::new(v, g)?, t, zeta)
}

pub fn greens_kernel_with(fl: &Floquet, t: f64, zeta: C64) -> Result<KernelGrid> {
    let sg = fl.grid(zeta)?;
    let n = sg.len();
    let (c, s, cp, sp) = (sg.c[n - 1], sg.s[n - 1], sg.cprime[n - 1], sg.sprime[n - 1]);
    let u = (c + sp) * 0.5;
    if (u - t.cos()).norm() < SINGULAR_TOL {
        return Err(Error::ResolventSingular(format!(
            "zeta = {zeta} is on the spectrum of H(t), t = {t}: |u+ - cos t| = {:e}",
            (u - t.cos()).norm()
        )));
    }
    let d = (C64::new(t.cos(), 0.0) - u) * 2.0;
    let em = C64::from_polar(1.0, -t);
    let k_cc = -s / d;
    let k_cs = (c - em) / d;
    let k_sc = (em - sp) / d;
    let k_ss = cp / d;
    let mut values = vec![C64::default(); n * n];
    let mut diagonal_defect: f64 = 0.0;
    for i in 0..n {
        let (cx, sx) = (sg.c[i], sg.s[i]);
        for j in 0..n {
            let (cy, sy) = (sg.c[j], sg.s[j]);
            let upper = k_cc * cx * cy + k_cs * cx * sy + k_sc * sx * cy + k_ss * sx * sy;
            let lower = upper + cx * sy - sx * cy;
            values[i * n + j] = if i > j { lower } else { upper };
            if i == j {
                diagonal_defect = diagonal_defect.max((lower - upper).norm());
            }
        }
    }
    Ok(KernelGrid {
        t,
        zeta,
        xs: sg.xs,
        values,
        diagonal_defect,
        c: sg.c,
        s: sg.s,
    })
}

/// `g(x_i) = ∫ G(x_i, y) f(y) dy`.
///
/// The upper branch is smooth in `y` and integrated by Simpson over `[0, π]`;
/// the jump term is added through running integrals of `c·f` and `s·f`.
pub fn apply_resolvent(kern: &KernelGrid, f: &[C64]) -> Result<Vec<C64>> {
    let n = kern.size();
    if f.len() != n {
        return Err(Error::GridMismatch(format!("kernel has {n} nodes, function has {}", f.len())));
    }
    let h = PI / (n - 1) as f64;
    let w = weights(n, h);
    let cf: Vec<C64> = kern.c.iter().zip(f).map(|(a, b)| a * b).collect();
    let sf: Vec<C64> = kern.s.iter().zip(f).map(|(a, b)| a * b).collect();
    let (run_c, run_s) = (cumulative_simpson(&cf, h), cumulative_simpson(&sf, h));
    let rows = par::map_range(n, |i| {
        let mut acc = C64::default();
        for j in 0..n {
            let mut upper = kern.at(i, j);
            if i > j {
                upper -= kern.c[i] * kern.s[j] - kern.s[i] * kern.c[j];
            }
            acc += upper * f[j] * w[j];
        }
        acc + kern.c[i] * run_s[i] - kern.s[i] * run_c[i]
    });
    Ok(rows)
}

/// `max |(−d² + V − ζ²)g − f|` on interior nodes, by the five-point second difference.
pub fn resolvent_residual(v: &Potential, xs: &[f64], zeta: C64, g: &[C64], f: &[C64]) -> f64 {
    let n = xs.len();
    let h = PI / (n - 1) as f64;
    let z = zeta * zeta;
    (2..n - 2)
        .map(|i| {
            let d2 = (-g[i - 2] + g[i - 1] * 16.0 - g[i] * 30.0 + g[i + 1] * 16.0 - g[i + 2]) / (12.0 * h * h);
            (-d2 + (v.eval(xs[i]) - z) * g[i] - f[i]).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub lambda0: C64,
    pub radius: f64,
    pub n_quad: usize,
    pub t: f64,
    pub xs: Vec<f64>,
    /// Row-major kernel of `−(1/2πi)∮ (H(t) − z)⁻¹ dz`.
    pub kernel: Vec<C64>,
    pub trace: C64,
    pub multiplicity: usize,
}

impl Projection {
    pub fn size(&self) -> usize {
        self.xs.len()
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.kernel[i * self.xs.len() + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionSummary {
    pub lambda0: C64,
    pub radius: f64,
    pub n_quad: usize,
    pub trace: C64,
    pub multiplicity: usize,
    pub idempotency_defect: f64,
}

const CHUNK: usize = 8;

/// Periodic (`t = 0`) Riesz projection around `lambda0`.
pub fn riesz_projection(v: &Potential, lambda0: C64, radius: f64, n_quad: usize, g: usize) -> Result<Projection> {
    riesz_projection_with(&Floquet::new(v, g)?, 0.0, lambda0, radius, n_quad)
}

pub fn riesz_projection_with(fl: &Floquet, t: f64, lambda0: C64, radius: f64, n_quad: usize) -> Result<Projection> {
    if n_quad < 4 || !(radius > 0.0) {
        return Err(Error::Rejected(format!("contour needs n_quad >= 4 and radius > 0, got {n_quad}, {radius}")));
    }
    let chunks: Vec<usize> = (0..n_quad.div_ceil(CHUNK)).collect();
    let partial = par::collect_results(par::map(&chunks, |&ch| -> Result<(Vec<C64>, Vec<f64>)> {
        let mut acc: Vec<C64> = Vec::new();
        let mut xs = Vec::new();
        for j in ch * CHUNK..((ch + 1) * CHUNK).min(n_quad) {
            let e = C64::from_polar(radius, 2.0 * PI * j as f64 / n_quad as f64);
            let kern = greens_kernel_with(fl, t, sqrt_value(lambda0 + e))?;
            if acc.is_empty() {
                acc = vec![C64::default(); kern.values.len()];
                xs = kern.xs.clone();
            }
            for (a, k) in acc.iter_mut().zip(&kern.values) {
                *a += k * e;
            }
        }
        Ok((acc, xs))
    }))?;
    let mut xs = Vec::new();
    let mut kernel: Vec<C64> = Vec::new();
    for (acc, x) in partial {
        if kernel.is_empty() {
            kernel = acc;
            xs = x;
        } else {
            for (a, b) in kernel.iter_mut().zip(&acc) {
                *a += b;
            }
        }
    }
    let scale = -1.0 / n_quad as f64;
    for a in kernel.iter_mut() {
        *a *= scale;
    }
    let n = xs.len();
    let diag: Vec<C64> = (0..n).map(|i| kernel[i * n + i]).collect();
    let trace = simpson(&diag, PI / (n - 1) as f64);
    let rounded = trace.re.round();
    if (trace - rounded).norm() > 0.2 || rounded < 0.0 {
        return Err(Error::Projection(format!("trace {trace} is not within 0.2 of an integer")));
    }
    Ok(Projection {
        lambda0,
        radius,
        n_quad,
        t,
        xs,
        kernel,
        trace,
        multiplicity: rounded as usize,
    })
}

/// All periodic (or antiperiodic) eigenvalues of a catalog with multiplicity.
fn catalog_points(cat: &SpectrumCatalog) -> Vec<C64> {
    cat.periodic.iter().map(|r| r.value).collect()
}

/// Half the distance from `lambda0` to the nearest catalog eigenvalue outside its own group.
pub fn default_radius(cat: &SpectrumCatalog, lambda0: C64) -> f64 {
    let pts = catalog_points(cat);
    let own = pts.iter().map(|p| (p - lambda0).norm()).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * lambda0.norm().max(1.0) + own;
    pts.iter()
        .map(|p| (p - lambda0).norm())
        .filter(|&d| d > tol)
        .fold(f64::INFINITY, f64::min)
        / 2.0
}

/// Projection after checking that the circle separates one eigenvalue group.
///
/// Catalog eigenvalues closer than `radius/2` form the group; any eigenvalue at
/// distance in `[radius/2, 2·radius)` is rejected.
pub fn checked_projection(
    fl: &Floquet,
    cat: &SpectrumCatalog,
    lambda0: C64,
    radius: Option<f64>,
    n_quad: usize,
) -> Result<Projection> {
    let r = radius.unwrap_or_else(|| default_radius(cat, lambda0));
    if !r.is_finite() {
        return Err(Error::Rejected("no other catalog eigenvalue to size the contour".into()));
    }
    let periodic = cat.periodic.iter().map(|p| (p.value, p.multiplicity));
    let mut group = 0;
    for (p, m) in periodic {
        let d = (p - lambda0).norm();
        if d < r / 2.0 {
            group += m;
        } else if d < 2.0 * r {
            return Err(Error::Rejected(format!(
                "catalog eigenvalue {p} lies within 2*radius = {} of {lambda0}",
                2.0 * r
            )));
        }
    }
    let t = match cat.boundary {
        Boundary::Periodic => 0.0,
        Boundary::Antiperiodic => PI,
    };
    let proj = riesz_projection_with(fl, t, lambda0, r, n_quad)?;
    if proj.multiplicity != group {
        return Err(Error::Projection(format!(
            "projection rank {} disagrees with catalog multiplicity {group} at {lambda0}",
            proj.multiplicity
        )));
    }
    Ok(proj)
}

/// `max |P² − P|` with the composition integrated by Simpson.
pub fn idempotency_defect(p: &Projection) -> f64 {
    let n = p.size();
    let h = PI / (n - 1) as f64;
    let w = weights(n, h);
    let rows = par::map_range(n, |i| {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let mut acc = C64::default();
            for (u, wu) in w.iter().enumerate() {
                acc += p.at(i, u) * p.at(u, j) * wu;
            }
            worst = worst.max((acc - p.at(i, j)).norm());
        }
        worst
    });
    rows.into_iter().fold(0.0, f64::max)
}

pub fn summarize(p: &Projection) -> ProjectionSummary {
    ProjectionSummary {
        lambda0: p.lambda0,
        radius: p.radius,
        n_quad: p.n_quad,
        trace: p.trace,
        multiplicity: p.multiplicity,
        idempotency_defect: idempotency_defect(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FredholmCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub defect: f64,
    pub factors: usize,
}

/// Characteristic-function ratio against the truncated product over catalog eigenvalues.
pub fn fredholm_check(
    fl: &Floquet,
    which: Operator,
    zeta: C64,
    zeta0: C64,
    cat: &SpectrumCatalog,
) -> Result<FredholmCheck> {
    let (e, e0) = (fl.endpoint(zeta)?, fl.endpoint(zeta0)?);
    let (num, den, recs) = match which {
        Operator::P if cat.boundary == Boundary::Periodic => (1.0 - e.u_plus(), 1.0 - e0.u_plus(), &cat.periodic),
        Operator::D => (e.s, e0.s, &cat.dirichlet),
        Operator::N => match &cat.neumann {
            Some(n) => (e.cp, e0.cp, n),
            None => return Err(Error::Rejected("catalog has no Neumann eigenvalues".into())),
        },
        _ => return Err(Error::Rejected(format!("no product check for {which:?} on this catalog"))),
    };
    let scale = 1e-12;
    if num.norm() < scale || den.norm() < scale {
        return Err(Error::Rejected(format!("{zeta} or {zeta0} lies on the {which:?} spectrum")));
    }
    let (z, z0) = (zeta * zeta, zeta0 * zeta0);
    let mut rhs = C64::new(1.0, 0.0);
    let mut factors = 0;
    for r in recs.iter() {
        if (r.value - z0).norm() < scale * r.value.norm().max(1.0) {
            return Err(Error::Rejected(format!("{zeta0} lies on the {which:?} spectrum")));
        }
        let f = (r.value - z) / (r.value - z0);
        for _ in 0..r.multiplicity {
            rhs *= f;
            factors += 1;
        }
    }
    let lhs = num / den;
    Ok(FredholmCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).norm() / lhs.norm(),
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::fixtures;
    use crate::spectra::{build_catalog_with, SpectraOptions};

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn free_resolvent_on_eigenfunctions() {
        let k = greens_kernel(&Potential::zero(), 0.0, c64(0.0, 1.0), 257).unwrap();
        let one = vec![c64(1.0, 0.0); 257];
        let g = apply_resolvent(&k, &one).unwrap();
        assert!(g.iter().all(|v| (v - 1.0).norm() < 1e-8), "{:?}", &g[..5]);
        let f: Vec<C64> = k.xs.iter().map(|&x| C64::from_polar(1.0, 2.0 * x)).collect();
        let g = apply_resolvent(&k, &f).unwrap();
        for (a, b) in g.iter().zip(&f) {
            assert!((a - b / 5.0).norm() < 1e-8);
        }
    }

    #[test]
    fn on_spectrum_is_rejected() {
        let e = greens_kernel(&Potential::zero(), 0.0, c64(2.0, 0.0), 129).unwrap_err();
        assert!(matches!(e, Error::ResolventSingular(_)));
    }

    #[test]
    fn mathieu_kernel_diagonal() {
        let k = greens_kernel(&fixtures::mathieu(), PI / 2.0, c64(1.0, 1.0), 257).unwrap();
        assert!(k.diagonal_defect < 1e-7);
    }

    #[test]
    fn kernel_transpose_symmetry() {
        let v = fixtures::complex_pair();
        let a = greens_kernel(&v, PI / 3.0, c64(1.2, 0.7), 129).unwrap();
        let b = greens_kernel(&v, 2.0 * PI - PI / 3.0, c64(1.2, 0.7), 129).unwrap();
        for i in 0..129 {
            for j in 0..129 {
                assert!((a.at(i, j) - b.at(j, i)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn resolvent_residual_single_mode() {
        let v = fixtures::single_mode();
        let k = greens_kernel(&v, 0.0, c64(0.0, 1.3), 513).unwrap();
        let f: Vec<C64> = k.xs.iter().map(|&x| c64((3.0 * x).sin() + x * x, (2.0 * x).cos())).collect();
        let g = apply_resolvent(&k, &f).unwrap();
        let norm = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(resolvent_residual(&v, &k.xs, k.zeta, &g, &f) < 1e-4 * norm);
    }

    #[test]
    fn free_projection_traces() {
        let p0 = riesz_projection(&Potential::zero(), c64(0.0, 0.0), 1.0, 64, 129).unwrap();
        assert!((p0.trace - 1.0).norm() < 1e-6);
        let p4 = riesz_projection(&Potential::zero(), c64(4.0, 0.0), 1.0, 64, 129).unwrap();
        assert!((p4.trace - 2.0).norm() < 1e-6);
        assert_eq!(p4.multiplicity, 2);
    }

    #[test]
    fn projection_is_idempotent() {
        let p = riesz_projection(&fixtures::complex_pair(), c64(-0.145_391_088_8, 0.0), 1.0, 64, 257).unwrap();
        assert_eq!(p.multiplicity, 1);
        assert!(idempotency_defect(&p) < 1e-4);
    }

    #[test]
    fn free_fredholm_tail() {
        let v = Potential::zero();
        let fl = Floquet::new(&v, 1025).unwrap();
        let cat = build_catalog_with(&fl, &v, 40, Boundary::Periodic, &SpectraOptions::default()).unwrap();
        let (z, z0) = (c64(0.5, 0.0), c64(0.0, 0.5));
        let fc = fredholm_check(&fl, Operator::P, z, z0, &cat).unwrap();
        // omitted factors Π_{k>40} ((1 − ζ²/4k²)/(1 − ζ0²/4k²))²
        let tail: C64 = (41..200_000u64)
            .map(|k| {
                let q = 4.0 * (k * k) as f64;
                ((1.0 - z * z / q) / (1.0 - z0 * z0 / q)).powi(2)
            })
            .product();
        assert!((fc.rhs * tail - fc.lhs).norm() / fc.lhs.norm() < 1e-5, "{fc:?}");
        let fd = fredholm_check(&fl, Operator::D, z, z0, &cat).unwrap();
        assert_eq!(fd.factors, 80);
        assert!(fd.defect < 1e-2);
    }
}
