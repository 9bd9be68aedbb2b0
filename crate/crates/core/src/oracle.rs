//! Brute-force spectra from dense truncations in trigonometric bases.
//!
//! `N_modes` fixes the highest frequency `2·N_modes`: the periodic basis is
//! `e^{2inx}` with `|n| ≤ N`, the antiperiodic basis `e^{i(2n+1)x}` with
//! `−N−1 ≤ n ≤ N`, Dirichlet `√(2/π) sin jx` for `1 ≤ j ≤ 2N` and Neumann the
//! normalized `cos jx` for `0 ≤ j ≤ 2N`. Matrix entries come from exact
//! product-to-sum integrals of the Fourier coefficients of `V`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::potential::{Potential, Representation};
use crate::spectra::{EigenvalueRecord, Operator, SpectrumCatalog};
use crate::{Error, Result, C64};

/// Sampled potentials are projected onto `|n| ≤ 64`.
pub const SAMPLED_MODES: usize = 64;

#[derive(Debug, Clone)]
pub struct TruncationMatrix {
    pub boundary: Operator,
    pub n_modes: usize,
    pub entries: DMatrix<C64>,
}

fn coefficients(v: &Potential, n_modes: usize) -> BTreeMap<i64, C64> {
    let max = match v.representation() {
        Representation::Fourier(_) => 2 * n_modes + 2,
        Representation::Samples(_) => SAMPLED_MODES,
    };
    v.fourier_coefficients(max).into_iter().filter(|(_, c)| c.norm() > 0.0).collect()
}

/// `∫₀^π e^{iqx} dx`.
fn e_int(q: i64) -> C64 {
    if q == 0 {
        C64::new(PI, 0.0)
    } else if q % 2 == 0 {
        C64::default()
    } else {
        C64::new(0.0, 2.0 / q as f64)
    }
}

/// `∫₀^π cos(mx) e^{2ipx} dx`.
fn cos_int(m: i64, p: i64) -> C64 {
    (e_int(m + 2 * p) + e_int(-m + 2 * p)) * 0.5
}

pub fn truncation_matrix(v: &Potential, boundary: Operator, n_modes: usize) -> Result<TruncationMatrix> {
    if n_modes == 0 {
        return Err(Error::Rejected("truncation needs at least one mode".into()));
    }
    let c = coefficients(v, n_modes);
    let nn = n_modes as i64;
    let entries = match boundary {
        Operator::P | Operator::AP => {
            let freqs: Vec<i64> = match boundary {
                Operator::P => (-nn..=nn).map(|n| 2 * n).collect(),
                _ => (-nn - 1..=nn).map(|n| 2 * n + 1).collect(),
            };
            let d = freqs.len();
            DMatrix::from_fn(d, d, |i, j| {
                let mut e = c.get(&((freqs[i] - freqs[j]) / 2)).copied().unwrap_or_default();
                if i == j {
                    e += (freqs[i] * freqs[i]) as f64;
                }
                e
            })
        }
        Operator::D => {
            let d = 2 * n_modes;
            DMatrix::from_fn(d, d, |i, j| {
                let (a, b) = (i as i64 + 1, j as i64 + 1);
                let mut e = c
                    .iter()
                    .map(|(&p, &cp)| cp * (cos_int(a - b, p) - cos_int(a + b, p)))
                    .sum::<C64>()
                    / PI;
                if i == j {
                    e += (a * a) as f64;
                }
                e
            })
        }
        Operator::N => {
            let d = 2 * n_modes + 1;
            let norm = |j: i64| if j == 0 { 1.0 / PI.sqrt() } else { (2.0 / PI).sqrt() };
            DMatrix::from_fn(d, d, |i, j| {
                let (a, b) = (i as i64, j as i64);
                let mut e = c
                    .iter()
                    .map(|(&p, &cp)| cp * (cos_int(a - b, p) + cos_int(a + b, p)))
                    .sum::<C64>()
                    * (0.5 * norm(a) * norm(b));
                if i == j {
                    e += (a * a) as f64;
                }
                e
            })
        }
        Operator::CRIT => return Err(Error::Rejected("critical points have no truncation matrix".into())),
    };
    Ok(TruncationMatrix { boundary, n_modes, entries })
}

/// The `count` eigenvalues of smallest modulus, sorted by `(Re, Im)`.
pub fn truncation_eigenvalues(v: &Potential, boundary: Operator, n_modes: usize, count: usize) -> Result<Vec<C64>> {
    let m = truncation_matrix(v, boundary, n_modes)?;
    let schur = nalgebra::Schur::try_new(m.entries, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver(format!("Schur iteration did not converge ({boundary:?}, N = {n_modes})")))?;
    let mut ev: Vec<C64> = schur.eigenvalues().ok_or_else(|| Error::Eigensolver("no eigenvalues".into()))?.iter().copied().collect();
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    ev.truncate(count);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub max_mismatch: f64,
    pub by_operator: BTreeMap<String, f64>,
    pub matched: usize,
}

/// Greedy matching of `found` (with multiplicity) against `oracle`.
///
/// Oracle values below `horizon` in modulus must all be used.
fn match_values(found: &[C64], oracle: &[C64], horizon: f64, label: &str) -> Result<f64> {
    let mut used = vec![false; oracle.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<C64> = found.to_vec();
    order.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    for z in &order {
        let best = oracle
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()));
        let Some((i, w)) = best else {
            return Err(Error::SpectrumMismatch(format!("{label}: no oracle value left for {z}")));
        };
        let d = (w - z).norm();
        if d > 1e-3 * (1.0 + z.norm()) {
            return Err(Error::SpectrumMismatch(format!("{label}: {z} unmatched (nearest oracle value {w})")));
        }
        used[i] = true;
        worst = worst.max(d);
    }
    if let Some((_, w)) = oracle.iter().enumerate().find(|(i, w)| !used[*i] && w.norm() < horizon) {
        return Err(Error::SpectrumMismatch(format!("{label}: oracle eigenvalue {w} missing from the catalog")));
    }
    Ok(worst)
}

fn expand(recs: &[EigenvalueRecord]) -> Vec<C64> {
    recs.iter().flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity)).collect()
}

/// Match catalog eigenvalues of clusters `k ≤ k_limit` against the truncation oracle.
pub fn compare_catalog(cat: &SpectrumCatalog, v: &Potential, n_modes: usize, k_limit: usize) -> Result<Comparison> {
    let k_limit = k_limit.min(cat.k_max);
    let top = cat.boundary.center_index(k_limit);
    let horizon = (top * top) as f64 - cat.radius;
    let mut by_operator = BTreeMap::new();
    let mut matched = 0;
    let mut families: Vec<(Operator, Vec<C64>)> = vec![
        (
            cat.boundary.operator(),
            expand(&cat.periodic.iter().filter(|r| r.k <= k_limit).copied().collect::<Vec<_>>()),
        ),
        (
            Operator::D,
            expand(&cat.dirichlet.iter().filter(|r| r.k <= top).copied().collect::<Vec<_>>()),
        ),
    ];
    if let Some(n) = &cat.neumann {
        families.push((Operator::N, expand(&n.iter().filter(|r| r.k <= top).copied().collect::<Vec<_>>())));
    }
    for (op, found) in families {
        let oracle = truncation_eigenvalues(v, op, n_modes, found.len() + 8)?;
        let worst = match_values(&found, &oracle, horizon, &format!("{op:?}"))?;
        matched += found.len();
        by_operator.insert(format!("{op:?}"), worst);
    }
    let max_mismatch = by_operator.values().copied().fold(0.0, f64::max);
    Ok(Comparison { max_mismatch, by_operator, matched })
}
