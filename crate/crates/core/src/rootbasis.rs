//! Biorthogonal root-vector systems of the periodic problem.
//!
//! Each cluster is built from closed-form expressions in the fundamental
//! system: a simple eigenvalue gets `φ = [−s(π)/(2Δ′)]^{1/2} ψ` with
//! `ψ = c − (u₋/s(π)) s`, or `s/√(∂_λ s(π))` when `s(π) = 0`; a semisimple
//! double eigenvalue gets the limiting Floquet solutions `ψ± = c + m± s`,
//! `m± = −(u₋^• ± (u₊^••)^{1/2})/s^•(π)`; a Jordan block gets `ψ` and the
//! periodic generalized vector
//! `2ξ[s(π)c^• − u₋ s^•] + 2ξ[(s^•(π)/s(π))u₋ − u₋^•] s`.
//! The adjoint side is `χ = conj(χ̃)` where `χ̃` pairs bilinearly with `φ`;
//! the local Gram matrix is then inverted so that `(χ_j, φ_k) = δ_jk`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::floquet::{dirichlet_singular, Floquet};
use crate::fundsys::{Endpoint, SolutionGrid};
use crate::potential::Potential;
use crate::quad::simpson;
use crate::resolvent::Projection;
use crate::spectra::{Boundary, ClusterClass, DiskCluster, SpectrumCatalog};
use crate::{par, sqrt_value, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Eigen,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Forward,
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootVector {
    pub k: usize,
    pub sign: Sign,
    pub kind: Kind,
    pub side: Side,
    pub lambda: C64,
    #[serde(skip)]
    pub values: Vec<C64>,
    #[serde(skip)]
    pub derivs: Vec<C64>,
    pub norm2: f64,
}

impl RootVector {
    fn new(k: usize, sign: Sign, kind: Kind, side: Side, lambda: C64, values: Vec<C64>, derivs: Vec<C64>) -> Self {
        let h = PI / (values.len() - 1) as f64;
        let sq: Vec<C64> = values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        let norm2 = simpson(&sq, h).re.sqrt();
        RootVector { k, sign, kind, side, lambda, values, derivs, norm2 }
    }

    /// `max(|φ(π) − φ(0)|, |φ′(π) − φ′(0)|)`.
    pub fn boundary_defect(&self) -> f64 {
        let n = self.values.len() - 1;
        (self.values[n] - self.values[0]).norm().max((self.derivs[n] - self.derivs[0]).norm())
    }

    fn scaled(&self, a: C64) -> RootVector {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out.derivs.iter_mut().for_each(|v| *v *= a);
        out.norm2 *= a.norm();
        out
    }

    fn conj(&self) -> RootVector {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out.derivs.iter_mut().for_each(|v| *v = v.conj());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEntry {
    pub k: usize,
    pub sign: Sign,
    pub constant: C64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterVectors {
    pub k: usize,
    pub shape: ClusterClass,
    pub phi: Vec<RootVector>,
    pub chi: Vec<RootVector>,
    pub constants: Vec<NormEntry>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiorthogonalSystem {
    #[serde(skip)]
    pub xs: Vec<f64>,
    pub clusters: Vec<ClusterVectors>,
    pub gram_defect: f64,
    pub normalization_log: Vec<NormEntry>,
    pub flags: Vec<String>,
}

impl BiorthogonalSystem {
    pub fn phi(&self) -> impl Iterator<Item = &RootVector> {
        self.clusters.iter().flat_map(|c| c.phi.iter())
    }

    pub fn chi(&self) -> impl Iterator<Item = &RootVector> {
        self.clusters.iter().flat_map(|c| c.chi.iter())
    }
}

/// `(g, f) = ∫₀^π conj(g) f dx` by composite Simpson.
pub fn inner_product(f: &[C64], g: &[C64]) -> Result<C64> {
    if f.len() != g.len() || f.len() < 3 || f.len() % 2 == 0 {
        return Err(Error::GridMismatch(format!(
            "inner product needs equal odd lengths, got {} and {}",
            f.len(),
            g.len()
        )));
    }
    let prod: Vec<C64> = f.iter().zip(g).map(|(a, b)| b.conj() * a).collect();
    Ok(simpson(&prod, PI / (f.len() - 1) as f64))
}

/// `∫₀^π f g dx`.
fn pairing(f: &[C64], g: &[C64]) -> C64 {
    let prod: Vec<C64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    simpson(&prod, PI / (f.len() - 1) as f64)
}

fn lin(a: C64, f: &[C64], b: C64, g: &[C64]) -> Vec<C64> {
    f.iter().zip(g).map(|(x, y)| a * x + b * y).collect()
}

fn cvec(v: &Option<Vec<C64>>) -> Result<&Vec<C64>> {
    v.as_ref().ok_or_else(|| Error::Rejected("solution grid lacks zeta-derivatives".into()))
}

/// Normalized eigenvector of a simple periodic eigenvalue at `xi`.
fn simple_vector(fl: &Floquet, k: usize, sign: Sign, xi: C64) -> Result<RootVector> {
    let e = fl.endpoint(xi)?;
    let g = fl.grid(xi)?;
    let lambda = xi * xi;
    if dirichlet_singular(e.s, xi) {
        // s(ξ,·) itself is periodic
        let ds = e.dlam_s();
        if ds.norm() < 1e-12 {
            return Err(Error::DegenerateCluster { k, quantity: "d s(pi)/d lambda at a Dirichlet-periodic point".into() });
        }
        let a = ds.sqrt().inv();
        let phi = RootVector::new(k, sign, Kind::Eigen, Side::Forward, lambda, scale(&g.s, a), scale(&g.sprime, a));
        return Ok(phi);
    }
    let du = e.dlam_u_plus();
    if du.norm() < 1e-12 {
        return Err(Error::DegenerateCluster { k, quantity: "u+ derivative".into() });
    }
    let m = -e.u_minus() / e.s;
    let a = (-e.s / (du * 2.0)).sqrt();
    let values = lin(a, &g.c, a * m, &g.s);
    let derivs = lin(a, &g.cprime, a * m, &g.sprime);
    Ok(RootVector::new(k, sign, Kind::Eigen, Side::Forward, lambda, values, derivs))
}

fn scale(f: &[C64], a: C64) -> Vec<C64> {
    f.iter().map(|v| v * a).collect()
}

struct Candidate {
    phi: Vec<RootVector>,
    chi_tilde: Vec<RootVector>,
}

/// Semisimple double eigenvalue (`s(ξ,π) = c′(ξ,π) = 0`).
fn nm_prime(fl: &Floquet, k: usize, xi: C64, flags: &mut Vec<String>) -> Result<Candidate> {
    let e = fl.endpoint(xi)?;
    let g = fl.grid(xi)?;
    let lambda = xi * xi;
    let sd = e.s_dot();
    let udd = fl.u_plus_ddot(xi)?;
    if sd.norm() < 1e-12 {
        return Err(Error::DegenerateCluster { k, quantity: "s-dot(xi, pi)".into() });
    }
    if udd.norm() < 1e-12 {
        return Err(Error::DegenerateCluster { k, quantity: "u+ second derivative".into() });
    }
    let root = udd.sqrt();
    let umd = e.u_minus_dot();
    let mp = -(umd + root) / sd;
    let mm = -(umd - root) / sd;
    let d = (-xi * sd / udd).sqrt();
    let a = RootVector::new(
        k,
        Sign::Plus,
        Kind::Eigen,
        Side::Forward,
        lambda,
        lin(d, &g.c, d * mp, &g.s),
        lin(d, &g.cprime, d * mp, &g.sprime),
    );
    let b = RootVector::new(
        k,
        Sign::Minus,
        Kind::Eigen,
        Side::Forward,
        lambda,
        lin(d, &g.c, d * mm, &g.s),
        lin(d, &g.cprime, d * mm, &g.sprime),
    );
    let alpha = pairing(&b.values, &b.values);
    let aa = pairing(&a.values, &a.values);
    let phi_minus_v = lin(C64::new(1.0, 0.0), &b.values, -alpha, &a.values);
    let phi_minus_d = lin(C64::new(1.0, 0.0), &b.derivs, -alpha, &a.derivs);
    let chi_minus_v = lin(C64::new(1.0, 0.0), &a.values, -aa, &b.values);
    let chi_minus_d = lin(C64::new(1.0, 0.0), &a.derivs, -aa, &b.derivs);
    let gamma = pairing(&chi_minus_v, &phi_minus_v);
    if gamma.norm() < 1e-8 {
        flags.push(format!("cluster {k}: near-degenerate Gram, |gamma| = {:e}", gamma.norm()));
        return Err(Error::DegenerateCluster { k, quantity: "gamma".into() });
    }
    let rg = gamma.sqrt().inv();
    let phi_minus = RootVector::new(k, Sign::Minus, Kind::Eigen, Side::Forward, lambda, scale(&phi_minus_v, rg), scale(&phi_minus_d, rg));
    let chi_minus = RootVector::new(k, Sign::Minus, Kind::Eigen, Side::Adjoint, lambda, scale(&chi_minus_v, rg), scale(&chi_minus_d, rg));
    let mut chi_plus = b.clone();
    chi_plus.sign = Sign::Plus;
    chi_plus.side = Side::Adjoint;
    Ok(Candidate { phi: vec![a, phi_minus], chi_tilde: vec![chi_plus, chi_minus] })
}

struct JordanPair {
    eig: RootVector,
    gen: RootVector,
}

fn jordan_pair(fl: &Floquet, k: usize, xi: C64) -> Result<JordanPair> {
    let e = fl.endpoint(xi)?;
    let g = fl.grid_with_derivatives(xi)?;
    jordan_from(&e, &g, fl.u_plus_ddot(xi)?, k)
}

fn jordan_from(e: &Endpoint, g: &SolutionGrid, udd: C64, k: usize) -> Result<JordanPair> {
    let xi = e.zeta;
    let lambda = xi * xi;
    if udd.norm() < 1e-12 {
        return Err(Error::DegenerateCluster { k, quantity: "u+ second derivative".into() });
    }
    let (s, um) = (e.s, e.u_minus());
    let m = -um / s;
    let one = C64::new(1.0, 0.0);
    let ev = scale(&lin(one, &g.c, m, &g.s), -udd.inv());
    let ed = scale(&lin(one, &g.cprime, m, &g.sprime), -udd.inv());
    let (cd, sd, cdp, sdp) = (cvec(&g.cdot)?, cvec(&g.sdot)?, cvec(&g.cdot_prime)?, cvec(&g.sdot_prime)?);
    let two_xi = xi * 2.0;
    let coef = two_xi * (e.s_dot() / s * um - e.u_minus_dot());
    let gv: Vec<C64> = (0..g.len()).map(|j| two_xi * (s * cd[j] - um * sd[j]) + coef * g.s[j]).collect();
    let gd: Vec<C64> = (0..g.len()).map(|j| two_xi * (s * cdp[j] - um * sdp[j]) + coef * g.sprime[j]).collect();
    Ok(JordanPair {
        eig: RootVector::new(k, Sign::Plus, Kind::Eigen, Side::Forward, lambda, ev, ed),
        gen: RootVector::new(k, Sign::Minus, Kind::Generalized, Side::Forward, lambda, gv, gd),
    })
}

/// Generalized eigenvector at a double periodic root with `s(ζ₀,π) ≠ 0`, `c′(ζ₀,π) ≠ 0`.
pub fn generalized_eigenvector(v: &Potential, zeta0: C64, g: usize) -> Result<RootVector> {
    let fl = Floquet::new(v, g)?;
    let e = fl.endpoint(zeta0)?;
    let scale = 1.0 + zeta0.norm();
    if (e.u_plus() - 1.0).norm() > 1e-8 {
        return Err(Error::Rejected(format!("u+({zeta0}) = {} is not 1; not a periodic eigenvalue", e.u_plus())));
    }
    if e.u_plus_dot().norm() > 1e-6 * scale {
        return Err(Error::Rejected(format!("{zeta0} is a simple zero of u+ - 1")));
    }
    if dirichlet_singular(e.s, zeta0) {
        return Err(Error::Rejected(format!("s({zeta0}, pi) = 0 violates the Jordan-block condition")));
    }
    if e.cp.norm() < 1e-8 * scale {
        return Err(Error::Rejected(format!("c'({zeta0}, pi) = 0 violates the Jordan-block condition")));
    }
    Ok(jordan_pair(&fl, 0, zeta0)?.gen)
}

/// Periodic eigenvector at a double root with nonzero `s(ζ₀,π)`, matching [`generalized_eigenvector`].
pub fn jordan_eigenvector(v: &Potential, zeta0: C64, g: usize) -> Result<RootVector> {
    let fl = Floquet::new(v, g)?;
    Ok(jordan_pair(&fl, 0, zeta0)?.eig)
}

fn nm_dprime(fl: &Floquet, k: usize, xi: C64) -> Result<Candidate> {
    let e = fl.endpoint(xi)?;
    if dirichlet_singular(e.s, xi) {
        return Err(Error::DegenerateCluster { k, quantity: "s(xi, pi)".into() });
    }
    let jp = jordan_pair(fl, k, xi)?;
    let mut chi_plus = jp.gen.clone();
    chi_plus.side = Side::Adjoint;
    chi_plus.sign = Sign::Plus;
    let mut chi_minus = jp.eig.clone();
    chi_minus.side = Side::Adjoint;
    chi_minus.sign = Sign::Minus;
    Ok(Candidate { phi: vec![jp.eig, jp.gen], chi_tilde: vec![chi_plus, chi_minus] })
}

/// Invert the local bilinear Gram matrix and conjugate into the adjoint side.
fn normalize(k: usize, cand: Candidate, shape: ClusterClass, flags: Vec<String>) -> Result<ClusterVectors> {
    let n = cand.phi.len();
    let b: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|m| pairing(&cand.chi_tilde[j].values, &cand.phi[m].values)).collect())
        .collect();
    let inv: Vec<Vec<C64>> = if n == 1 {
        vec![vec![b[0][0].inv()]]
    } else {
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        if det.norm() < 1e-14 {
            return Err(Error::DegenerateCluster { k, quantity: "local Gram determinant".into() });
        }
        vec![vec![b[1][1] / det, -b[0][1] / det], vec![-b[1][0] / det, b[0][0] / det]]
    };
    let mut chi = Vec::with_capacity(n);
    let mut constants = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = cand.chi_tilde[0].scaled(inv[j][0]);
        for m in 1..n {
            let t = cand.chi_tilde[m].scaled(inv[j][m]);
            for (a, x) in acc.values.iter_mut().zip(&t.values) {
                *a += x;
            }
            for (a, x) in acc.derivs.iter_mut().zip(&t.derivs) {
                *a += x;
            }
        }
        acc.sign = cand.chi_tilde[j].sign;
        acc.kind = cand.chi_tilde[j].kind;
        acc.side = Side::Adjoint;
        let fresh = RootVector::new(k, acc.sign, acc.kind, Side::Adjoint, acc.lambda, acc.values, acc.derivs);
        chi.push(fresh.conj());
        let c = inv[j][j];
        constants.push(NormEntry { k, sign: cand.chi_tilde[j].sign, constant: c, flagged: !(0.2..=5.0).contains(&c.norm()) });
    }
    Ok(ClusterVectors { k, shape, phi: cand.phi, chi, constants, flags })
}

/// Root vectors of one cluster, dispatched on its shape.
pub fn build_cluster_vectors(fl: &Floquet, cluster: &DiskCluster) -> Result<ClusterVectors> {
    let k = cluster.k;
    let mut flags = Vec::new();
    let cand = match cluster.shape {
        ClusterClass::NsPrime | ClusterClass::NsDprime => {
            let p = simple_vector(fl, k, Sign::Plus, cluster.xi_plus)?;
            let m = simple_vector(fl, k, Sign::Minus, cluster.xi_minus)?;
            let chi = vec![adjoint_candidate(&p), adjoint_candidate(&m)];
            Candidate { phi: vec![p, m], chi_tilde: chi }
        }
        ClusterClass::NmPrime => nm_prime(fl, k, cluster.xi_plus, &mut flags)?,
        ClusterClass::NmDprime => nm_dprime(fl, k, cluster.xi_plus)?,
        ClusterClass::Base => {
            return Err(Error::Rejected(format!("cluster {k} has no dispatch shape")));
        }
    };
    normalize(k, cand, cluster.shape, flags)
}

fn adjoint_candidate(p: &RootVector) -> RootVector {
    let mut c = p.clone();
    c.side = Side::Adjoint;
    c
}

/// The ground-state vector `λ₀` of the periodic problem.
pub fn ground_state_vectors(fl: &Floquet, lambda0: C64) -> Result<ClusterVectors> {
    let p = simple_vector(fl, 0, Sign::Plus, sqrt_value(lambda0))?;
    let cand = Candidate { chi_tilde: vec![adjoint_candidate(&p)], phi: vec![p] };
    normalize(0, cand, ClusterClass::NsPrime, Vec::new())
}

/// Full system for clusters `k ≤ k_limit`, with the global Gram defect.
pub fn build_system(fl: &Floquet, cat: &SpectrumCatalog, k_limit: usize) -> Result<BiorthogonalSystem> {
    if cat.boundary != Boundary::Periodic {
        return Err(Error::Rejected("root-vector systems are built for the periodic problem only".into()));
    }
    let mut clusters = Vec::new();
    let ground: Vec<_> = cat.periodic.iter().filter(|r| r.k == 0).collect();
    if ground.len() != 1 || ground[0].multiplicity != 1 {
        return Err(Error::Rejected("ground state is not a simple eigenvalue".into()));
    }
    clusters.push(ground_state_vectors(fl, ground[0].value)?);
    let chosen: Vec<&DiskCluster> = cat.clusters.iter().filter(|c| c.k <= k_limit).collect();
    clusters.extend(par::collect_results(par::map(&chosen, |c| build_cluster_vectors(fl, c)))?);
    let xs = fl.grid(C64::new(1.0, 0.0))?.xs;
    let phi: Vec<&RootVector> = clusters.iter().flat_map(|c| c.phi.iter()).collect();
    let chi: Vec<&RootVector> = clusters.iter().flat_map(|c| c.chi.iter()).collect();
    let gram_defect = gram_defect(&phi, &chi)?;
    let normalization_log = clusters.iter().flat_map(|c| c.constants.iter().copied()).collect();
    let flags = clusters.iter().flat_map(|c| c.flags.iter().cloned()).collect();
    Ok(BiorthogonalSystem { xs, clusters, gram_defect, normalization_log, flags })
}

/// `max |(χ_j, φ_k) − δ_jk|`.
pub fn gram_defect(phi: &[&RootVector], chi: &[&RootVector]) -> Result<f64> {
    let rows = par::map_range(chi.len(), |j| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (m, p) in phi.iter().enumerate() {
            let want = if j == m { 1.0 } else { 0.0 };
            worst = worst.max((inner_product(&p.values, &chi[j].values)? - want).norm());
        }
        Ok(worst)
    });
    Ok(par::collect_results(rows)?.into_iter().fold(0.0, f64::max))
}

/// `max_f Σ_k |(φ_k, f)|²` and the same for `χ`, over `f = π^{−1/2} e^{2inx}`, `|n| ≤ n_test`.
pub fn bessel_bound_scan(system: &BiorthogonalSystem, n_test: usize) -> Result<(f64, f64)> {
    let nt = n_test as i64;
    let modes: Vec<i64> = (-nt..=nt).collect();
    let xs = &system.xs;
    let sums = par::collect_results(par::map(&modes, |&n| -> Result<(f64, f64)> {
        let f: Vec<C64> = xs.iter().map(|&x| C64::from_polar(PI.sqrt().recip(), 2.0 * n as f64 * x)).collect();
        let mut sp = 0.0;
        for p in system.phi() {
            sp += inner_product(&f, &p.values)?.norm_sqr();
        }
        let mut sc = 0.0;
        for c in system.chi() {
            sc += inner_product(&f, &c.values)?.norm_sqr();
        }
        Ok((sp, sc))
    }))?;
    Ok(sums.into_iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}

/// `max |(L − λ)φ| / max |φ|` on interior nodes, by the five-point second difference.
pub fn eigen_residual(v: &Potential, xs: &[f64], lambda: C64, phi: &[C64]) -> f64 {
    let r = apply_shifted(v, xs, lambda, phi);
    let top = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    r.iter().map(|z| z.norm()).fold(0.0, f64::max) / top
}

/// Interior even nodes used by [`apply_shifted`].
fn even_interior(n: usize) -> impl Iterator<Item = usize> {
    (4..n.saturating_sub(4)).step_by(2)
}

/// `(L − λ)φ` on even interior nodes, five-point stencil of spacing `2h`.
pub fn apply_shifted(v: &Potential, xs: &[f64], lambda: C64, phi: &[C64]) -> Vec<C64> {
    let n = xs.len();
    let h = 2.0 * PI / (n - 1) as f64;
    even_interior(n)
        .map(|i| {
            let d2 = (-phi[i - 4] + phi[i - 2] * 16.0 - phi[i] * 30.0 + phi[i + 2] * 16.0 - phi[i + 4]) / (12.0 * h * h);
            -d2 + (v.eval(xs[i]) - lambda) * phi[i]
        })
        .collect()
}

/// Least-squares `a` with `(L − λ)φ_gen ≈ a·φ_eig`, and the relative misfit.
pub fn jordan_relation(v: &Potential, xs: &[f64], lambda: C64, gen: &[C64], eig: &[C64]) -> (C64, f64) {
    let r = apply_shifted(v, xs, lambda, gen);
    let e: Vec<C64> = even_interior(eig.len()).map(|i| eig[i]).collect();
    let num: C64 = e.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = e.iter().map(|a| a.norm_sqr()).sum();
    let a = num / den;
    let misfit = e.iter().zip(&r).map(|(x, y)| (y - a * x).norm()).fold(0.0, f64::max);
    let top = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (a, misfit / top)
}

/// Largest principal angle between `span(a)` and `span(b)` under the `L²` inner product.
pub fn principal_angle(a: &[&[C64]], b: &[&[C64]]) -> Result<f64> {
    let qa = orthonormalize(a)?;
    let qb = orthonormalize(b)?;
    let m: Vec<Vec<C64>> = qa.iter().map(|x| qb.iter().map(|y| inner_product(y, x)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    // singular values of m via the Hermitian matrix m^H m
    let mm = nalgebra::DMatrix::from_fn(qb.len(), qb.len(), |i, j| (0..qa.len()).map(|r| m[r][i].conj() * m[r][j]).sum::<C64>());
    let ev = mm.symmetric_eigenvalues();
    let smin = ev.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt().min(1.0);
    Ok(smin.acos())
}

fn orthonormalize(vs: &[&[C64]]) -> Result<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.to_vec();
        for q in &out {
            let c = inner_product(&w, q)?;
            for (a, b) in w.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
        let n = inner_product(&w, &w)?.re.sqrt();
        if n < 1e-12 {
            return Err(Error::Rejected("linearly dependent vectors in principal-angle test".into()));
        }
        w.iter_mut().for_each(|a| *a /= n);
        out.push(w);
    }
    Ok(out)
}

/// `max |P(x,y) − Σ_j φ_j(x) conj(χ_j(y))|` against a contour projection on the same grid.
pub fn residue_mismatch(p: &Projection, cv: &ClusterVectors) -> Result<f64> {
    let n = p.size();
    if cv.phi.iter().any(|f| f.values.len() != n) {
        return Err(Error::GridMismatch("projection and root vectors use different grids".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r: C64 = cv.phi.iter().zip(&cv.chi).map(|(f, c)| f.values[i] * c.values[j].conj()).sum();
            worst = worst.max((p.at(i, j) - r).norm());
        }
    }
    Ok(worst)
}

/// Export one vector as CSV rows `(x, Re, Im)`.
pub fn vector_rows(xs: &[f64], v: &RootVector) -> Vec<[f64; 3]> {
    xs.iter().zip(&v.values).map(|(&x, z)| [x, z.re, z.im]).collect()
}
