//! Riesz-basis criterion: Dirichlet-offset ratios over the simple clusters.
//!
//! `ratio± = |μ − λ±| / |λ⁺ − λ⁻|` on every cluster with two distinct
//! periodic eigenvalues; merged clusters are left out of the supremum. A
//! finite table cannot certify a supremum, so the verdict is labelled as
//! evidence: `bounded_evidence` when the top half of the k-range stays within
//! 1.2× the bottom half and the log-log slope is at most 0.1,
//! `growth_evidence` for slope ≥ 0.5 over at least 10 points.

use std::path::Path;

use serde::Serialize;

use crate::floquet::Floquet;
use crate::spectra::{Boundary, ClusterClass, SpectrumCatalog};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub k: usize,
    #[serde(rename = "class")]
    pub klass: ClusterClass,
    pub ratio_plus: f64,
    pub ratio_minus: f64,
    pub running_sup: f64,
}

impl RatioRow {
    pub fn max_ratio(&self) -> f64 {
        self.ratio_plus.max(self.ratio_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend {
    pub slope: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedEvidence,
    GrowthEvidence,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub boundary: Boundary,
    pub per_k: Vec<RatioRow>,
    pub running_sup: f64,
    pub excluded: Vec<usize>,
    pub trend: Trend,
    pub verdict: Verdict,
    /// The ratios are `p`-independent, so the verdict covers Schauder bases in every `L^p`, `1 < p < ∞`.
    pub applies_to_all_p: bool,
}

/// `(ratio₊, ratio₋)` for one split cluster.
pub fn cluster_ratios(lam_plus: crate::C64, lam_minus: crate::C64, mu: crate::C64) -> Result<(f64, f64)> {
    let gap = (lam_plus - lam_minus).norm();
    if gap == 0.0 || !gap.is_finite() {
        return Err(Error::Clustering(format!("split cluster with gap {gap}")));
    }
    Ok(((mu - lam_plus).norm() / gap, (mu - lam_minus).norm() / gap))
}

/// Least-squares slope of `log y` against `log x`; points with `y ≤ 0` are skipped.
pub fn log_log_slope(points: &[(f64, f64)]) -> Trend {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return Trend { slope: 0.0, count: n };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Trend { slope, count: n }
}

fn verdict(rows: &[RatioRow], trend: Trend) -> Verdict {
    if rows.is_empty() {
        return Verdict::BoundedEvidence;
    }
    let half = rows.len().div_ceil(2);
    let sup = |r: &[RatioRow]| r.iter().map(RatioRow::max_ratio).fold(0.0, f64::max);
    let bottom = sup(&rows[..half]);
    let top = sup(&rows[rows.len() - half..]);
    if top <= 1.2 * bottom && trend.slope <= 0.1 {
        Verdict::BoundedEvidence
    } else if trend.slope >= 0.5 && trend.count >= 10 {
        Verdict::GrowthEvidence
    } else {
        Verdict::Indeterminate
    }
}

pub fn riesz_ratios(cat: &SpectrumCatalog) -> Result<CriterionReport> {
    let mut per_k = Vec::new();
    let mut excluded = Vec::new();
    let mut sup: f64 = 0.0;
    for c in &cat.clusters {
        if c.klass.is_double() {
            excluded.push(c.k);
            continue;
        }
        if !c.klass.is_simple() {
            continue;
        }
        let (rp, rm) = cluster_ratios(c.lam_plus, c.lam_minus, c.mu)?;
        sup = sup.max(rp).max(rm);
        per_k.push(RatioRow { k: c.k, klass: c.klass, ratio_plus: rp, ratio_minus: rm, running_sup: sup });
    }
    let pts: Vec<(f64, f64)> = per_k.iter().map(|r| (r.k as f64, r.max_ratio())).collect();
    let trend = log_log_slope(&pts);
    let verdict = verdict(&per_k, trend);
    Ok(CriterionReport { boundary: cat.boundary, per_k, running_sup: sup, excluded, trend, verdict, applies_to_all_p: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientEntry {
    pub k: usize,
    pub plus: bool,
    pub value: f64,
    pub running_sup: f64,
    pub flagged: bool,
}

/// `|u₋(ξ)/u₊^•(ξ)|` at both roots of every simple cluster.
pub fn offset_quotients(fl: &Floquet, cat: &SpectrumCatalog) -> Result<Vec<QuotientEntry>> {
    let mut out = Vec::new();
    let mut sup: f64 = 0.0;
    for c in cat.clusters.iter().filter(|c| c.klass.is_simple()) {
        for (plus, xi) in [(true, c.xi_plus), (false, c.xi_minus)] {
            let e = fl.endpoint(xi)?;
            let du = e.u_plus_dot();
            let flagged = du.norm() < 1e-10 * (1.0 + xi.norm());
            let value = if flagged { f64::INFINITY } else { (e.u_minus() / du).norm() };
            if !flagged {
                sup = sup.max(value);
            }
            out.push(QuotientEntry { k: c.k, plus, value, running_sup: sup, flagged });
        }
    }
    Ok(out)
}

/// CSV table `k, class, ratio_plus, ratio_minus, running_sup`.
pub fn ratios_csv(report: &CriterionReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "class", "ratio_plus", "ratio_minus", "running_sup"])?;
    for r in &report.per_k {
        w.write_record([
            r.k.to_string(),
            r.klass.label().to_string(),
            format!("{:.12e}", r.ratio_plus),
            format!("{:.12e}", r.ratio_minus),
            format!("{:.12e}", r.running_sup),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Two columns `k  max(ratio₊, ratio₋)` for gnuplot.
pub fn ratios_dat(report: &CriterionReport) -> String {
    let mut out = String::from("# k max_ratio\n");
    for r in &report.per_k {
        out.push_str(&format!("{} {:.12e}\n", r.k, r.max_ratio()));
    }
    out
}

pub fn write_csv(report: &CriterionReport, path: &Path) -> Result<()> {
    std::fs::write(path, ratios_csv(report)?)?;
    Ok(())
}

pub fn write_dat(report: &CriterionReport, path: &Path) -> Result<()> {
    std::fs::write(path, ratios_dat(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{fixtures, Potential};
    use crate::spectra::{build_catalog_with, SpectraOptions};

    fn report(v: &Potential, k: usize) -> (Floquet, SpectrumCatalog, CriterionReport) {
        let fl = Floquet::new(v, 1025).unwrap();
        let cat = build_catalog_with(&fl, v, k, Boundary::Periodic, &SpectraOptions::default()).unwrap();
        let r = riesz_ratios(&cat).unwrap();
        (fl, cat, r)
    }

    #[test]
    fn free_case_is_vacuous() {
        let (fl, cat, r) = report(&Potential::zero(), 8);
        assert!(r.per_k.is_empty());
        assert_eq!(r.running_sup, 0.0);
        assert_eq!(r.verdict, Verdict::BoundedEvidence);
        assert_eq!(r.excluded.len(), 8);
        assert!(offset_quotients(&fl, &cat).unwrap().is_empty());
    }

    #[test]
    fn mathieu_ratios_are_at_most_one() {
        let (fl, cat, r) = report(&fixtures::mathieu(), 8);
        assert!(!r.per_k.is_empty());
        for row in &r.per_k {
            assert!(row.ratio_plus <= 1.0 + 1e-9 && row.ratio_minus <= 1.0 + 1e-9, "{row:?}");
        }
        assert_eq!(r.verdict, Verdict::BoundedEvidence);
        let l = offset_quotients(&fl, &cat).unwrap();
        assert!(l.iter().all(|e| e.value.is_finite() && !e.flagged));
    }

    #[test]
    fn gasymov_has_no_simple_clusters() {
        let (_, _, r) = report(&fixtures::gasymov(), 8);
        assert!(r.per_k.is_empty());
        assert_eq!(r.verdict, Verdict::BoundedEvidence);
    }

    #[test]
    fn trend_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..=12).map(|k| (k as f64, (k as f64).powf(0.75))).collect();
        let t = log_log_slope(&pts);
        assert!((t.slope - 0.75).abs() < 1e-12 && t.count == 12);
        let rows: Vec<RatioRow> = pts
            .iter()
            .map(|&(k, y)| RatioRow { k: k as usize, klass: ClusterClass::NsPrime, ratio_plus: y, ratio_minus: y, running_sup: y })
            .collect();
        assert_eq!(verdict(&rows, t), Verdict::GrowthEvidence);
    }
}
