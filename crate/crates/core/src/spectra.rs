//! Eigenvalue localization and disk clustering.
//!
//! Every characteristic function is an entire function of `λ = ζ²`, so all
//! counting and Newton refinement happens in the λ-plane on disks
//! `|λ − n²| ≤ 2|c| + 1`. Each disk is checked by the argument principle
//! before its zeros are refined; disks at low index that fail the count are
//! merged into one base disk which is resolved by recursive subdivision.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::floquet::Floquet;
use crate::potential::Potential;
use crate::{par, sqrt_value, Error, Result, C64, DEFAULT_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    P,
    AP,
    D,
    N,
    CRIT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Antiperiodic,
}

impl Boundary {
    pub fn operator(self) -> Operator {
        match self {
            Boundary::Periodic => Operator::P,
            Boundary::Antiperiodic => Operator::AP,
        }
    }

    /// Disk index `n` of cluster `k` (disk centred at `n²`).
    pub fn center_index(self, k: usize) -> usize {
        match self {
            Boundary::Periodic => 2 * k,
            Boundary::Antiperiodic => 2 * k + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    pub operator: Operator,
    /// Cluster index for P/AP (value near `(2k)²` or `(2k+1)²`), otherwise `j` with value near `j²`.
    pub k: usize,
    pub value: C64,
    pub sqrt_value: C64,
    pub multiplicity: usize,
    pub residual: f64,
    pub converged: bool,
    /// Located inside the base disk rather than its own asymptotic disk.
    pub base: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterClass {
    #[serde(rename = "Ns_prime")]
    NsPrime,
    #[serde(rename = "Ns_dprime")]
    NsDprime,
    #[serde(rename = "Nm_prime")]
    NmPrime,
    #[serde(rename = "Nm_dprime")]
    NmDprime,
    #[serde(rename = "BASE")]
    Base,
}

impl ClusterClass {
    pub fn is_simple(self) -> bool {
        matches!(self, ClusterClass::NsPrime | ClusterClass::NsDprime)
    }

    pub fn is_double(self) -> bool {
        matches!(self, ClusterClass::NmPrime | ClusterClass::NmDprime)
    }

    pub fn label(self) -> &'static str {
        match self {
            ClusterClass::NsPrime => "Ns_prime",
            ClusterClass::NsDprime => "Ns_dprime",
            ClusterClass::NmPrime => "Nm_prime",
            ClusterClass::NmDprime => "Nm_dprime",
            ClusterClass::Base => "BASE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskCluster {
    pub k: usize,
    /// Disk centre index: the cluster sits near `n²`.
    pub n: usize,
    pub lam_plus: C64,
    pub lam_minus: C64,
    pub mu: C64,
    pub kappa: C64,
    pub xi_plus: C64,
    pub xi_minus: C64,
    pub zeta_mu: C64,
    pub omega: C64,
    #[serde(rename = "class")]
    pub klass: ClusterClass,
    /// Case used for root vectors; equals `klass` except inside the base disk.
    pub shape: ClusterClass,
    pub gap: C64,
    pub dirichlet_offsets: (C64, C64),
    /// Residuals of λ⁺, λ⁻, μ, κ.
    pub residuals: [f64; 4],
    /// `2|λ⁺ − κ| / |λ⁺ − λ⁻|` for split clusters.
    pub kappa_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingCheck {
    pub base_radius: f64,
    pub periodic_found: usize,
    pub periodic_expected: usize,
    pub dirichlet_found: usize,
    pub dirichlet_expected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCatalog {
    pub boundary: Boundary,
    pub k0: usize,
    pub k_max: usize,
    pub radius: f64,
    pub mean_c: C64,
    pub grid_points: usize,
    pub cluster_tol: f64,
    pub base_records: Vec<EigenvalueRecord>,
    pub clusters: Vec<DiskCluster>,
    pub periodic: Vec<EigenvalueRecord>,
    pub dirichlet: Vec<EigenvalueRecord>,
    pub critical: Vec<EigenvalueRecord>,
    pub neumann: Option<Vec<EigenvalueRecord>>,
    pub counting: CountingCheck,
}

impl SpectrumCatalog {
    pub fn cluster(&self, k: usize) -> Option<&DiskCluster> {
        self.clusters.iter().find(|c| c.k == k)
    }

    /// All periodic (or antiperiodic) eigenvalues with multiplicity.
    pub fn periodic_values(&self) -> Vec<(C64, usize)> {
        self.periodic.iter().map(|r| (r.value, r.multiplicity)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectraOptions {
    pub grid_points: usize,
    /// Newton stops once `|Δλ| ≤ root_tol·max(1, |λ|)`.
    pub root_tol: f64,
    /// Roots closer than `cluster_tol·(1+k)` in the ζ-plane are treated as equal.
    pub cluster_tol: f64,
}

impl Default for SpectraOptions {
    fn default() -> Self {
        SpectraOptions {
            grid_points: DEFAULT_GRID,
            root_tol: 1e-10,
            cluster_tol: 1e-7,
        }
    }
}

/// Disk radius `2|c| + 1`.
pub fn disk_radius(v: &Potential) -> f64 {
    2.0 * v.mean_constant().norm() + 1.0
}

/// Characteristic function in the λ-plane with its λ-derivative.
#[derive(Clone, Copy)]
pub struct CharFn<'a> {
    fl: &'a Floquet,
    which: Operator,
}

impl<'a> CharFn<'a> {
    pub fn new(fl: &'a Floquet, which: Operator) -> Self {
        CharFn { fl, which }
    }

    pub fn value(&self, lam: C64) -> Result<C64> {
        let e = self.fl.endpoint(sqrt_value(lam))?;
        Ok(match self.which {
            Operator::P => e.u_plus() - 1.0,
            Operator::AP => e.u_plus() + 1.0,
            Operator::D => e.s,
            Operator::N => e.cp,
            Operator::CRIT => e.dlam_u_plus(),
        })
    }

    pub fn value_deriv(&self, lam: C64) -> Result<(C64, C64)> {
        if self.which == Operator::CRIT {
            let f = self.value(lam)?;
            let eta = step_for(lam);
            let d = (self.value(lam + eta)? - self.value(lam - eta)?) / (2.0 * eta);
            return Ok((f, d));
        }
        let e = self.fl.endpoint(sqrt_value(lam))?;
        Ok(match self.which {
            Operator::P => (e.u_plus() - 1.0, e.dlam_u_plus()),
            Operator::AP => (e.u_plus() + 1.0, e.dlam_u_plus()),
            Operator::D => (e.s, e.dlam_s()),
            Operator::N => (e.cp, e.dlam_cp()),
            Operator::CRIT => unreachable!(),
        })
    }

    /// Second λ-derivative of `Δ(λ) = u₊(√λ)`, by Richardson-extrapolated differences of `Δ′`.
    fn discriminant_curvature(&self, lam: C64) -> Result<C64> {
        let crit = CharFn::new(self.fl, Operator::CRIT);
        let eta = 10.0 * step_for(lam);
        let d = |h: f64| -> Result<C64> { Ok((crit.value(lam + h)? - crit.value(lam - h)?) / (2.0 * h)) };
        let coarse = d(eta)?;
        let fine = d(eta / 2.0)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    }
}

/// Absolute rounding level of `u₊ ∓ 1` near a critical point.
const DELTA_NOISE: f64 = 1e-13;

fn step_for(lam: C64) -> f64 {
    1e-5 * lam.norm().sqrt().max(1.0)
}

/// Number of zeros of `f` inside `|z − center| < radius` by the argument principle.
pub fn count_zeros_in_disk<F, G>(f: F, fprime: G, center: C64, radius: f64) -> Result<usize>
where
    F: Fn(C64) -> C64 + Sync,
    G: Fn(C64) -> C64 + Sync,
{
    let fg = |z: C64| -> Result<(C64, C64)> { Ok((f(z), fprime(z))) };
    count_zeros(&fg, center, radius).map(|(n, _)| n)
}

/// Argument-principle count; returns the count and the radius actually used.
pub(crate) fn count_zeros<F>(fg: &F, center: C64, radius: f64) -> Result<(usize, f64)>
where
    F: Fn(C64) -> Result<(C64, C64)> + Sync,
{
    const MAX_REFINE: usize = 12;
    'attempt: for scale in [1.0, 1.05, 0.95, 1.10] {
        let r = radius * scale;
        let node = |j: usize, n: usize| center + C64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
        let mut n = 32usize;
        let idx: Vec<usize> = (0..n).collect();
        let mut vals: Vec<(C64, C64)> = par::collect_results(par::map(&idx, |&j| fg(node(j, n))))?;
        if on_contour(&vals) {
            continue 'attempt;
        }
        let mut prev = winding(&vals, r, n);
        for _ in 0..MAX_REFINE {
            let idx: Vec<usize> = (0..n).collect();
            let fresh: Vec<(C64, C64)> =
                par::collect_results(par::map(&idx, |&j| fg(node(2 * j + 1, 2 * n))))?;
            let mut merged = Vec::with_capacity(2 * n);
            for (a, b) in vals.iter().zip(&fresh) {
                merged.push(*a);
                merged.push(*b);
            }
            vals = merged;
            n *= 2;
            if on_contour(&vals) {
                continue 'attempt;
            }
            let w = winding(&vals, r, n);
            let rounded = w.re.round();
            if (w - prev).norm() < 0.25 && (w.re - rounded).abs() < 0.25 && w.im.abs() < 0.25 && rounded >= 0.0 {
                return Ok((rounded as usize, r));
            }
            prev = w;
        }
        return Err(Error::Contour(format!(
            "winding number did not settle on |z - {center}| = {r}"
        )));
    }
    Err(Error::Contour(format!(
        "zero on the contour around {center} after 3 perturbations of radius {radius}"
    )))
}

/// Winding number from the unwrapped phase of `f` alone.
pub(crate) fn count_by_phase<F>(f: &F, center: C64, radius: f64) -> Result<(usize, f64)>
where
    F: Fn(C64) -> Result<C64> + Sync,
{
    const MAX_NODES: usize = 1 << 16;
    'attempt: for scale in [1.0, 1.05, 0.95, 1.10] {
        let r = radius * scale;
        let node = |j: usize, n: usize| center + C64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
        let mut n = 64usize;
        let idx: Vec<usize> = (0..n).collect();
        let mut vals: Vec<C64> = par::collect_results(par::map(&idx, |&j| f(node(j, n))))?;
        let mut prev: Option<i64> = None;
        loop {
            let max = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !(max > 0.0) || vals.iter().any(|v| !v.norm().is_finite() || v.norm() < 1e-10 * max) {
                continue 'attempt;
            }
            let mut total = 0.0;
            let mut widest: f64 = 0.0;
            for j in 0..n {
                let step = (vals[(j + 1) % n] / vals[j]).arg();
                widest = widest.max(step.abs());
                total += step;
            }
            let w = (total / (2.0 * PI)).round() as i64;
            if widest < PI / 4.0 && prev == Some(w) && w >= 0 {
                return Ok((w as usize, r));
            }
            if n >= MAX_NODES {
                return Err(Error::Contour(format!("phase of f did not resolve on |z - {center}| = {r}")));
            }
            prev = Some(w);
            let idx: Vec<usize> = (0..n).collect();
            let fresh: Vec<C64> = par::collect_results(par::map(&idx, |&j| f(node(2 * j + 1, 2 * n))))?;
            vals = vals.iter().zip(&fresh).flat_map(|(a, b)| [*a, *b]).collect();
            n *= 2;
        }
    }
    Err(Error::Contour(format!(
        "zero on the contour around {center} after 3 perturbations of radius {radius}"
    )))
}

fn on_contour(vals: &[(C64, C64)]) -> bool {
    let max = vals.iter().map(|v| v.0.norm()).fold(0.0, f64::max);
    let min = vals.iter().map(|v| v.0.norm()).fold(f64::INFINITY, f64::min);
    !(max > 0.0) || min < 1e-10 * max || vals.iter().any(|v| !(v.1.re.is_finite() && v.1.im.is_finite()))
}

fn winding(vals: &[(C64, C64)], r: f64, n: usize) -> C64 {
    let mut acc = C64::default();
    for (j, (f, fp)) in vals.iter().enumerate() {
        let dz = C64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
        acc += fp / f * dz;
    }
    acc / n as f64
}

#[derive(Debug, Clone, Copy)]
struct Root {
    lam: C64,
    mult: usize,
    residual: f64,
    converged: bool,
}

fn newton(cf: &CharFn, lam0: C64, tol: f64, max_step: f64) -> Result<Root> {
    let mut lam = lam0;
    let mut converged = false;
    for _ in 0..50 {
        let (f, fp) = cf.value_deriv(lam)?;
        if f == C64::default() {
            converged = true;
            break;
        }
        if fp == C64::default() || !(fp.re.is_finite() && fp.im.is_finite()) {
            break;
        }
        let mut step = f / fp;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        lam -= step;
        if step.norm() <= tol * lam.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    let residual = cf.value(lam)?.norm();
    Ok(Root { lam, mult: 1, residual, converged })
}

fn family_indices(which: Operator, k_max: usize) -> (Vec<usize>, Vec<usize>) {
    match which {
        Operator::P => {
            let n: Vec<usize> = (0..=k_max).map(|k| 2 * k).collect();
            let e = n.iter().map(|&n| if n == 0 { 1 } else { 2 }).collect();
            (n, e)
        }
        Operator::AP => {
            let n: Vec<usize> = (0..=k_max).map(|k| 2 * k + 1).collect();
            let e = vec![2; n.len()];
            (n, e)
        }
        Operator::D | Operator::CRIT => ((1..=2 * k_max).collect(), vec![1; 2 * k_max]),
        Operator::N => ((0..=2 * k_max).collect(), vec![1; 2 * k_max + 1]),
    }
}

fn record_index(which: Operator, n: usize) -> usize {
    match which {
        Operator::P => n / 2,
        Operator::AP => (n - 1) / 2,
        _ => n,
    }
}

fn make_record(which: Operator, n: usize, r: &Root, base: bool) -> EigenvalueRecord {
    EigenvalueRecord {
        operator: which,
        k: record_index(which, n),
        value: r.lam,
        sqrt_value: sqrt_value(r.lam),
        multiplicity: r.mult,
        residual: r.residual,
        converged: r.converged,
        base,
    }
}

fn cmp_c64(a: &C64, b: &C64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

struct Locator<'a> {
    fl: &'a Floquet,
    which: Operator,
    opts: SpectraOptions,
}

impl<'a> Locator<'a> {
    fn cf(&self) -> CharFn<'a> {
        CharFn::new(self.fl, self.which)
    }

    fn count(&self, center: C64, radius: f64) -> Result<(usize, f64)> {
        let cf = self.cf();
        if self.which == Operator::CRIT {
            return count_by_phase(&|z| cf.value(z), center, radius);
        }
        count_zeros(&|z| cf.value_deriv(z), center, radius)
    }

    /// Two zeros of `u₊ ∓ 1` around the critical point of the discriminant.
    fn resolve_pair(&self, center: C64, radius: f64, k: usize) -> Result<Option<Vec<Root>>> {
        let cf = self.cf();
        let crit = CharFn::new(self.fl, Operator::CRIT);
        let kappa = newton(&crit, center, self.opts.root_tol, radius)?;
        if !kappa.converged || (kappa.lam - center).norm() > radius {
            return Ok(None);
        }
        let delta = cf.value(kappa.lam)?;
        let curv = cf.discriminant_curvature(kappa.lam)?;
        if curv == C64::default() {
            return Ok(None);
        }
        let d = (-delta * 2.0 / curv).sqrt();
        let (a, b) = (kappa.lam + d, kappa.lam - d);
        let noise = (2.0 * DELTA_NOISE / curv.norm()).sqrt() / sqrt_value(kappa.lam).norm().max(1e-3);
        let thr = (self.opts.cluster_tol * (1.0 + k as f64)).max(noise);
        if (sqrt_value(a) - sqrt_value(b)).norm() < thr {
            return Ok(Some(vec![Root {
                lam: kappa.lam,
                mult: 2,
                residual: delta.norm(),
                converged: true,
            }]));
        }
        let step = (a - b).norm().min(radius);
        let ra = newton(&cf, a, self.opts.root_tol, step)?;
        let rb = newton(&cf, b, self.opts.root_tol, step)?;
        let inside = |r: &Root| (r.lam - center).norm() <= radius;
        if ra.converged && rb.converged && inside(&ra) && inside(&rb) && (ra.lam - rb.lam).norm() > 0.5 * (a - b).norm()
        {
            return Ok(Some(vec![ra, rb]));
        }
        if (ra.lam - rb.lam).norm() <= 0.5 * (a - b).norm() {
            // polishing collapsed onto one root; keep the quadratic-model pair
            let mk = |lam: C64| -> Result<Root> {
                Ok(Root { lam, mult: 1, residual: cf.value(lam)?.norm(), converged: false })
            };
            return Ok(Some(vec![mk(a)?, mk(b)?]));
        }
        Ok(None)
    }

    /// Zeros in one asymptotic disk holding `expected` of them.
    fn resolve_disk(&self, n: usize, expected: usize, radius: f64) -> Result<Vec<Root>> {
        let center = C64::new((n * n) as f64, 0.0);
        let k = record_index(self.which, n);
        if expected == 1 {
            let r = newton(&self.cf(), center, self.opts.root_tol, radius)?;
            if r.converged && (r.lam - center).norm() <= radius {
                return Ok(vec![r]);
            }
        } else if expected == 2 && matches!(self.which, Operator::P | Operator::AP) {
            if let Some(roots) = self.resolve_pair(center, radius, k)? {
                return Ok(roots);
            }
        }
        let roots = self.subdivide(center, radius, 8)?;
        let total: usize = roots.iter().map(|r| r.mult).sum();
        if total != expected {
            return Err(Error::Clustering(format!(
                "{:?} disk at {center} resolved {total} zeros, expected {expected}",
                self.which
            )));
        }
        Ok(roots)
    }

    /// All zeros in a disk by recursive covering with seven sub-disks.
    fn subdivide(&self, center: C64, radius: f64, depth: usize) -> Result<Vec<Root>> {
        let (n, r_used) = self.count(center, radius)?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let inside = |lam: C64| (lam - center).norm() <= r_used;
        if n == 1 {
            let r = newton(&self.cf(), center, self.opts.root_tol, r_used)?;
            if r.converged && inside(r.lam) {
                return Ok(vec![r]);
            }
        }
        if n == 2 && matches!(self.which, Operator::P | Operator::AP) {
            let k = (center.norm().sqrt() / 2.0) as usize;
            if let Some(roots) = self.resolve_pair(center, r_used, k)? {
                if roots.iter().all(|r| inside(r.lam)) {
                    return Ok(roots);
                }
            }
        }
        if depth == 0 {
            return Err(Error::Contour(format!(
                "could not separate {n} zeros near {center} (radius {r_used:e})"
            )));
        }
        let sub_r = 0.55 * r_used;
        let mut centers = vec![center];
        for j in 0..6 {
            centers.push(center + C64::from_polar(r_used * 3f64.sqrt() / 2.0, PI / 3.0 * j as f64));
        }
        let found = par::collect_results(par::map(&centers, |&c| self.subdivide(c, sub_r, depth - 1)))?;
        let mut roots: Vec<Root> = Vec::new();
        for r in found.into_iter().flatten() {
            if !inside(r.lam) {
                continue;
            }
            let scale = r.lam.norm().max(1.0);
            if !roots.iter().any(|q| (q.lam - r.lam).norm() < 1e-8 * scale) {
                roots.push(r);
            }
        }
        let total: usize = roots.iter().map(|r| r.mult).sum();
        if total != n {
            return Err(Error::Contour(format!(
                "subdivision around {center} found {total} zeros, argument principle says {n}"
            )));
        }
        roots.sort_by(|a, b| cmp_c64(&a.lam, &b.lam));
        Ok(roots)
    }

    fn locate(&self, indices: &[usize], expected: &[usize], radius: f64) -> Result<Vec<EigenvalueRecord>> {
        let len = indices.len();
        let centers: Vec<C64> = indices.iter().map(|&n| C64::new((n * n) as f64, 0.0)).collect();
        let counts = par::collect_results(par::map(&centers, |&c| self.count(c, radius)))?;
        let sep = |i: usize, j: usize| (indices[j] * indices[j]) as f64 - (indices[i] * indices[i]) as f64 > 2.0 * radius;
        let mut b = 0;
        for i in 0..len {
            if counts[i].0 != expected[i] {
                b = b.max(i + 1);
            }
            if i + 1 < len && !sep(i, i + 1) {
                b = b.max(i + 2);
            }
        }
        while b > 0 && b < len {
            let big = (indices[b - 1] * indices[b - 1]) as f64 + radius;
            if (indices[b] * indices[b]) as f64 - radius > big {
                break;
            }
            b += 1;
        }
        if b >= len {
            return Err(Error::Clustering(format!(
                "{:?}: no asymptotic disk passes the counting test up to index {}; raise k_max",
                self.which,
                indices.last().copied().unwrap_or(0)
            )));
        }
        let mut out = Vec::new();
        if b > 0 {
            let big = (indices[b - 1] * indices[b - 1]) as f64 + radius;
            let want: usize = expected[..b].iter().sum();
            let roots = self.subdivide(C64::default(), big, 10)?;
            let total: usize = roots.iter().map(|r| r.mult).sum();
            if total != want {
                return Err(Error::Clustering(format!(
                    "{:?} base disk |z| <= {big} holds {total} zeros, expected {want}",
                    self.which
                )));
            }
            let mut slot = 0;
            let mut left = expected[0];
            for r in &roots {
                out.push(make_record(self.which, indices[slot], r, true));
                left = left.saturating_sub(r.mult);
                if left == 0 && slot + 1 < b {
                    slot += 1;
                    left = expected[slot];
                }
            }
        }
        let tail: Vec<usize> = (b..len).collect();
        let resolved = par::collect_results(par::map(&tail, |&i| self.resolve_disk(indices[i], expected[i], radius)))?;
        for (i, mut roots) in tail.into_iter().zip(resolved) {
            roots.sort_by(|a, b| cmp_c64(&a.lam, &b.lam));
            for r in &roots {
                out.push(make_record(self.which, indices[i], r, false));
            }
        }
        Ok(out)
    }
}

/// Eigenvalues of one operator family up to cluster index `k_max`.
pub fn locate_spectrum(v: &Potential, which: Operator, k_max: usize) -> Result<Vec<EigenvalueRecord>> {
    let opts = SpectraOptions::default();
    let fl = Floquet::new(v, opts.grid_points)?;
    locate_spectrum_with(&fl, v, which, k_max, &opts)
}

pub fn locate_spectrum_with(
    fl: &Floquet,
    v: &Potential,
    which: Operator,
    k_max: usize,
    opts: &SpectraOptions,
) -> Result<Vec<EigenvalueRecord>> {
    let (idx, exp) = family_indices(which, k_max);
    check_resolution(fl, idx.iter().copied().max().unwrap_or(0), disk_radius(v))?;
    Locator { fl, which, opts: *opts }.locate(&idx, &exp, disk_radius(v))
}

pub fn build_catalog(v: &Potential, k_max: usize) -> Result<SpectrumCatalog> {
    let opts = SpectraOptions::default();
    let fl = Floquet::new(v, opts.grid_points)?;
    build_catalog_with(&fl, v, k_max, Boundary::Periodic, &opts)
}

/// Largest `h·|ζ|` the Simpson ζ-quadratures are trusted at.
pub const MAX_H_ZETA: f64 = 1.2;

fn check_resolution(fl: &Floquet, n_top: usize, radius: f64) -> Result<()> {
    let h = PI / (fl.grid_points() - 1) as f64;
    let zeta = ((n_top * n_top) as f64 + radius).sqrt();
    if h * zeta > MAX_H_ZETA {
        return Err(Error::InvalidGrid(format!(
            "{} nodes resolve |zeta| up to {:.0}, disks reach {zeta:.0}",
            fl.grid_points(),
            MAX_H_ZETA / h
        )));
    }
    Ok(())
}

pub fn build_catalog_with(
    fl: &Floquet,
    v: &Potential,
    k_max: usize,
    boundary: Boundary,
    opts: &SpectraOptions,
) -> Result<SpectrumCatalog> {
    let radius = disk_radius(v);
    check_resolution(fl, boundary.center_index(k_max) + 2, radius)?;
    let pop = boundary.operator();
    let loc = |which: Operator| Locator { fl, which, opts: *opts };
    let (p_idx, p_exp) = family_indices(pop, k_max);
    let periodic = loc(pop).locate(&p_idx, &p_exp, radius)?;
    let (d_idx, d_exp) = family_indices(Operator::D, k_max + usize::from(boundary == Boundary::Antiperiodic));
    let dirichlet = loc(Operator::D).locate(&d_idx, &d_exp, radius)?;
    let first = usize::from(boundary == Boundary::Periodic);
    let c_idx: Vec<usize> = (1..=boundary.center_index(k_max)).collect();
    let critical: Vec<EigenvalueRecord> = loc(Operator::CRIT)
        .locate(&c_idx, &vec![1; c_idx.len()], radius)?
        .into_iter()
        .filter(|r| r.k % 2 == boundary.center_index(0))
        .collect();

    let pick = |recs: &[EigenvalueRecord], k: usize| -> Vec<EigenvalueRecord> {
        recs.iter().filter(|r| r.k == k).copied().collect()
    };
    let k_start = first;
    let mut k0 = k_start;
    for k in k_start..=k_max {
        let n = boundary.center_index(k);
        let any_base = pick(&periodic, k).iter().any(|r| r.base)
            || pick(&dirichlet, n).iter().any(|r| r.base)
            || pick(&critical, n).iter().any(|r| r.base);
        if any_base {
            k0 = k + 1;
        }
    }
    if k0 > k_max {
        return Err(Error::Clustering(format!("base index exceeds k_max = {k_max}")));
    }

    let mut counting = counting_check(fl, boundary, k0, radius, opts);
    while counting.is_err() && k0 < k_max {
        k0 += 1;
        counting = counting_check(fl, boundary, k0, radius, opts);
    }
    let counting = counting?;
    let base_records: Vec<EigenvalueRecord> = periodic.iter().filter(|r| r.base || r.k < k0).copied().collect();
    let mut clusters = Vec::new();
    for k in k_start..=k_max {
        let n = boundary.center_index(k);
        let p = pick(&periodic, k);
        let mu = pick(&dirichlet, n);
        let kap = pick(&critical, n);
        let mult: usize = p.iter().map(|r| r.multiplicity).sum();
        let complete = mult == 2 && mu.len() == 1 && kap.len() == 1;
        if !complete && k < k0 {
            continue;
        }
        if !complete {
            return Err(Error::Clustering(format!(
                "cluster {k}: {mult} periodic, {} Dirichlet, {} critical points",
                mu.len(),
                kap.len()
            )));
        }
        let c = classify(k, n, &p, &mu[0], &kap[0], opts.cluster_tol, k < k0);
        if c.klass.is_double() {
            case_check(fl, &c)?;
        }
        clusters.push(c);
    }

    Ok(SpectrumCatalog {
        boundary,
        k0,
        k_max,
        radius,
        mean_c: v.mean_constant(),
        grid_points: fl.grid_points(),
        cluster_tol: opts.cluster_tol,
        base_records,
        clusters,
        periodic,
        dirichlet,
        critical,
        neumann: None,
        counting,
    })
}

/// Add the Neumann eigenvalues, needed only for the Neumann product check.
pub fn add_neumann(cat: &mut SpectrumCatalog, fl: &Floquet, v: &Potential, opts: &SpectraOptions) -> Result<()> {
    cat.neumann = Some(locate_spectrum_with(fl, v, Operator::N, cat.k_max, opts)?);
    Ok(())
}

fn classify(
    k: usize,
    n: usize,
    p: &[EigenvalueRecord],
    mu: &EigenvalueRecord,
    kap: &EigenvalueRecord,
    tol: f64,
    in_base: bool,
) -> DiskCluster {
    let thr = tol * (1.0 + k as f64);
    let zmu = mu.sqrt_value;
    let (mut lp, mut lm, shape);
    let (mut rp, mut rm);
    if p.len() == 1 || (p[0].sqrt_value - p[1].sqrt_value).norm() < thr {
        lp = p[0].value;
        lm = p[0].value;
        rp = p[0].residual;
        rm = rp;
        shape = if (p[0].sqrt_value - zmu).norm() < thr {
            ClusterClass::NmPrime
        } else {
            ClusterClass::NmDprime
        };
    } else {
        let mut pair = [p[0], p[1]];
        pair.sort_by(|a, b| cmp_c64(&a.value, &b.value));
        lm = pair[0].value;
        lp = pair[1].value;
        rm = pair[0].residual;
        rp = pair[1].residual;
        let hit_m = (pair[0].sqrt_value - zmu).norm() < thr;
        let hit_p = (pair[1].sqrt_value - zmu).norm() < thr;
        if hit_m || hit_p {
            if hit_m && !hit_p {
                std::mem::swap(&mut lp, &mut lm);
                std::mem::swap(&mut rp, &mut rm);
            }
            shape = ClusterClass::NsDprime;
        } else {
            shape = ClusterClass::NsPrime;
        }
    }
    let gap = lp - lm;
    let kappa_ratio = if shape.is_simple() {
        Some(2.0 * (lp - kap.value).norm() / gap.norm())
    } else {
        None
    };
    DiskCluster {
        k,
        n,
        lam_plus: lp,
        lam_minus: lm,
        mu: mu.value,
        kappa: kap.value,
        xi_plus: sqrt_value(lp),
        xi_minus: sqrt_value(lm),
        zeta_mu: zmu,
        omega: kap.sqrt_value,
        klass: if in_base { ClusterClass::Base } else { shape },
        shape,
        gap,
        dirichlet_offsets: (mu.value - lp, mu.value - lm),
        residuals: [rp, rm, mu.residual, kap.residual],
        kappa_ratio,
    }
}

/// A double periodic eigenvalue outside the base disk has either both or
/// neither of `s(ξ,π)`, `c′(ξ,π)` vanishing.
fn case_check(fl: &Floquet, c: &DiskCluster) -> Result<()> {
    let e = fl.endpoint(c.xi_plus)?;
    let scale = 1.0 + c.xi_plus.norm();
    match c.shape {
        ClusterClass::NmPrime if e.cp.norm() > 1e-3 * scale => Err(Error::Clustering(format!(
            "cluster {}: double eigenvalue with s(xi,pi) = 0 but c'(xi,pi) = {:e}",
            c.k,
            e.cp.norm()
        ))),
        ClusterClass::NmDprime if e.cp.norm() < 1e-10 * scale => Err(Error::Clustering(format!(
            "cluster {}: double eigenvalue with c'(xi,pi) = 0 but s(xi,pi) != 0",
            c.k
        ))),
        _ => Ok(()),
    }
}

/// Count periodic and Dirichlet points inside the base disk `|λ| ≤ n₀² + r`.
fn counting_check(
    fl: &Floquet,
    boundary: Boundary,
    k0: usize,
    radius: f64,
    opts: &SpectraOptions,
) -> Result<CountingCheck> {
    let n0 = boundary.center_index(k0);
    let big = (n0 * n0) as f64 + radius;
    let (pe, de) = match boundary {
        Boundary::Periodic => (2 * k0 + 1, 2 * k0),
        Boundary::Antiperiodic => (2 * k0 + 2, 2 * k0 + 1),
    };
    let count = |which: Operator| -> Result<usize> {
        let loc = Locator { fl, which, opts: *opts };
        loc.count(C64::default(), big).map(|x| x.0)
    };
    let pf = count(boundary.operator())?;
    let df = count(Operator::D)?;
    if pf != pe || df != de {
        return Err(Error::Clustering(format!(
            "base disk |z| <= {big}: {pf} periodic (expected {pe}), {df} Dirichlet (expected {de})"
        )));
    }
    Ok(CountingCheck {
        base_radius: big,
        periodic_found: pf,
        periodic_expected: pe,
        dirichlet_found: df,
        dirichlet_expected: de,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::fixtures;

    fn char_fn_count(v: &Potential, op: Operator, center: f64, radius: f64) -> usize {
        let fl = Floquet::new(v, 1025).unwrap();
        let cf = CharFn::new(&fl, op);
        count_zeros_in_disk(
            |z| cf.value(z).unwrap(),
            |z| cf.value_deriv(z).unwrap().1,
            C64::new(center, 0.0),
            radius,
        )
        .unwrap()
    }

    #[test]
    fn counts_free_case() {
        // ζ-disk |ζ − 2| < 0.5 maps inside |λ − 4| < 2.2
        assert_eq!(char_fn_count(&Potential::zero(), Operator::P, 4.0, 2.2), 2);
        assert_eq!(char_fn_count(&Potential::zero(), Operator::D, 9.0, 2.5), 1);
        assert_eq!(char_fn_count(&fixtures::mathieu(), Operator::P, 4.0, 2.0), 2);
    }

    #[test]
    fn counts_polynomial() {
        let f = |z: C64| (z - 1.0) * (z - 1.0) * (z + C64::new(0.0, 3.0));
        let fp = |z: C64| (z - 1.0) * 2.0 * (z + C64::new(0.0, 3.0)) + (z - 1.0) * (z - 1.0);
        assert_eq!(count_zeros_in_disk(f, fp, C64::default(), 2.0).unwrap(), 2);
        assert_eq!(count_zeros_in_disk(f, fp, C64::default(), 4.0).unwrap(), 3);
        assert_eq!(count_zeros_in_disk(f, fp, C64::new(10.0, 0.0), 1.0).unwrap(), 0);
    }

    #[test]
    fn zero_on_contour_is_perturbed() {
        let f = |z: C64| z - 1.0;
        let fp = |_z: C64| C64::new(1.0, 0.0);
        assert_eq!(count_zeros_in_disk(f, fp, C64::default(), 1.0).unwrap(), 1);
    }

    #[test]
    fn free_periodic_spectrum() {
        let recs = locate_spectrum(&Potential::zero(), Operator::P, 20).unwrap();
        assert!(recs[0].value.norm() < 1e-8 && recs[0].multiplicity == 1);
        for k in 1..=20usize {
            let m: usize = recs.iter().filter(|r| r.k == k).map(|r| r.multiplicity).sum();
            assert_eq!(m, 2, "k = {k}");
            for r in recs.iter().filter(|r| r.k == k) {
                assert!((r.value - (4 * k * k) as f64).norm() < 1e-8, "{r:?}");
            }
        }
    }

    #[test]
    fn free_dirichlet_spectrum() {
        let recs = locate_spectrum(&Potential::zero(), Operator::D, 20).unwrap();
        assert_eq!(recs.len(), 40);
        for (j, r) in recs.iter().enumerate() {
            assert_eq!(r.k, j + 1);
            assert!((r.value - ((j + 1) * (j + 1)) as f64).norm() < 1e-8);
            assert!((r.sqrt_value - (j + 1) as f64).norm() < 1e-8);
        }
    }

    #[test]
    fn free_antiperiodic_spectrum() {
        let recs = locate_spectrum(&Potential::zero(), Operator::AP, 6).unwrap();
        for k in 0..=6usize {
            let n = (2 * k + 1) as f64;
            let m: usize = recs.iter().filter(|r| r.k == k).map(|r| r.multiplicity).sum();
            assert_eq!(m, 2);
            assert!(recs.iter().filter(|r| r.k == k).all(|r| (r.value - n * n).norm() < 1e-8), "{recs:?}");
        }
    }

    #[test]
    fn free_catalog_is_all_nm_prime() {
        let cat = build_catalog(&Potential::zero(), 10).unwrap();
        assert_eq!(cat.k0, 1);
        assert!(cat.clusters.iter().all(|c| c.klass == ClusterClass::NmPrime));
        assert_eq!(cat.counting.periodic_found, 3);
    }

    #[test]
    fn gasymov_clusters_are_double() {
        let cat = build_catalog(&fixtures::gasymov(), 10).unwrap();
        for c in cat.clusters.iter().filter(|c| c.k >= cat.k0) {
            assert!(c.klass.is_double(), "{c:?}");
            assert!((c.lam_plus - (4 * c.k * c.k) as f64).norm() < 1e-8);
        }
        assert!(cat.clusters.iter().any(|c| c.klass == ClusterClass::NmDprime));
    }

    #[test]
    fn mathieu_interlacing_and_relabel() {
        let cat = build_catalog(&fixtures::mathieu(), 10).unwrap();
        for c in &cat.clusters {
            for z in [c.lam_plus, c.lam_minus, c.mu, c.kappa] {
                assert!(z.im.abs() < 1e-9, "{c:?}");
            }
            let (lo, hi) = (c.lam_plus.re.min(c.lam_minus.re), c.lam_plus.re.max(c.lam_minus.re));
            // merged clusters carry one value; μ then sits within the clustering resolution
            let slack = if c.klass.is_double() { 2.0 * c.xi_plus.norm() * 1e-7 * (1.0 + c.k as f64) } else { 1e-9 };
            assert!(c.mu.re >= lo - slack && c.mu.re <= hi + slack, "{c:?}");
            if c.klass == ClusterClass::NsDprime {
                assert!((c.lam_plus - c.mu).norm() < 1e-8);
            }
            let r = 4.0 * (c.k * c.k) as f64;
            assert!([c.lam_plus, c.lam_minus, c.mu, c.kappa].iter().all(|z| (z - r).norm() <= cat.radius));
        }
        let c1 = cat.cluster(1).unwrap();
        assert_eq!(c1.klass, ClusterClass::NsDprime);
        assert!((c1.lam_minus.re - 4.371_300_982_7).abs() < 1e-8);
        assert!((c1.mu.re - 3.917_024_773_0).abs() < 1e-8);
    }

    #[test]
    fn complex_pair_has_real_periodic_spectrum() {
        let cat = build_catalog(&fixtures::complex_pair(), 6).unwrap();
        for r in &cat.periodic {
            assert!(r.value.im.abs() < 1e-9, "{r:?}");
            assert!(r.multiplicity <= 2);
        }
        let c1 = cat.cluster(1).unwrap();
        assert_eq!(c1.klass, ClusterClass::NsPrime);
        assert!(c1.lam_minus.re < c1.lam_plus.re);
        let ratio = c1.kappa_ratio.unwrap();
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn catalog_json_fields() {
        let cat = build_catalog(&fixtures::mathieu(), 5).unwrap();
        let v = serde_json::to_value(&cat.clusters[0]).unwrap();
        for key in ["k", "lam_plus", "lam_minus", "mu", "kappa", "class", "gap", "residuals"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["class"], "Ns_dprime");
    }
}
