//! Batch front end: JSON configuration in, sorted-key JSON / CSV / `.dat` out.
//!
//! Exit codes: 0 ok, 1 selftest failure, 2 clustering, 3 integration,
//! 4 construction, 64 configuration or I/O.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::criterion::{offset_quotients, ratios_csv, ratios_dat, riesz_ratios, Verdict};
use crate::floquet::Floquet;
use crate::fundsys::{wronskian_defect, Integrator, Propagator};
use crate::oracle::compare_catalog;
use crate::potential::{fixtures, Potential, PotentialSpec};
use crate::resolvent::{checked_projection, greens_kernel_with, summarize};
use crate::rootbasis::{bessel_bound_scan, build_system, vector_rows};
use crate::spectra::{add_neumann, build_catalog_with, Boundary, SpectraOptions, SpectrumCatalog};
use crate::{Error, Result, C64};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "hillriesz", version, about = "Floquet spectra and Riesz-basis diagnostics for Hill operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Periodic/antiperiodic, Dirichlet and Neumann eigenvalues with cluster classes.
    Spectrum(CommonArgs),
    /// Dirichlet-offset ratios and the basis verdict.
    Criterion(CommonArgs),
    /// Biorthogonal root-vector system, Gram defect and Bessel constants.
    Basis(CommonArgs),
    /// Green's kernel at one spectral parameter and Riesz projections of low eigenvalues.
    Greens(CommonArgs),
    /// Match the catalog against dense Fourier truncations.
    OracleCompare(CommonArgs),
    /// Invariant suite on the built-in fixtures.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_vectors: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Only `grid_points` and `tolerances` are read.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialInput {
    /// `"zero"`, `"mathieu"`, `"gasymov"` or `"complex"`.
    Named(String),
    Spec(PotentialSpec),
}

impl PotentialInput {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialInput::Named(n) => fixtures::by_name(n).ok_or_else(|| Error::Config(format!("unknown fixture {n:?}"))),
            PotentialInput::Spec(s) => s.build().map_err(|e| Error::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySelection {
    #[default]
    Periodic,
    Antiperiodic,
    Both,
}

impl BoundarySelection {
    fn list(self) -> Vec<Boundary> {
        match self {
            BoundarySelection::Periodic => vec![Boundary::Periodic],
            BoundarySelection::Antiperiodic => vec![Boundary::Antiperiodic],
            BoundarySelection::Both => vec![Boundary::Periodic, Boundary::Antiperiodic],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub root: f64,
    pub gram: f64,
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { root: 1e-10, gram: 1e-6, cluster: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensConfig {
    /// Spectral parameter `ζ` as `[re, im]`.
    pub zeta: (f64, f64),
    #[serde(default)]
    pub t: f64,
    /// Eigenvalues with cluster index up to this get a contour projection.
    #[serde(default = "default_projection_k")]
    pub projection_k: usize,
}

fn default_projection_k() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[serde(default = "default_oracle_k")]
    pub k_limit: usize,
}

fn default_modes() -> usize {
    128
}

fn default_oracle_k() -> usize {
    10
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n_modes: default_modes(), k_limit: default_oracle_k() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialInput,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default)]
    pub boundary: BoundarySelection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greens: Option<GreensConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

fn default_k_max() -> usize {
    40
}

fn default_grid() -> usize {
    crate::DEFAULT_GRID
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 5 {
            return Err(Error::Config(format!("k_max = {} is below 5", self.k_max)));
        }
        if self.grid_points < 65 || self.grid_points % 2 == 0 {
            return Err(Error::Config(format!("grid_points = {} must be odd and at least 65", self.grid_points)));
        }
        let t = &self.tolerances;
        if ![t.root, t.gram, t.cluster].iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        self.potential.build()?;
        Ok(())
    }

    fn apply(&mut self, args: &CommonArgs) -> Result<()> {
        if let Some(k) = args.k_max {
            self.k_max = k;
        }
        if let Some(o) = &args.out {
            self.outputs = o.clone();
        }
        self.validate()
    }

    fn options(&self) -> SpectraOptions {
        SpectraOptions { grid_points: self.grid_points, root_tol: self.tolerances.root, cluster_tol: self.tolerances.cluster }
    }

    /// SHA-256 of the sorted-key JSON of everything except `outputs`.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("outputs");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

struct Writer {
    dir: PathBuf,
    hash: String,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Writer {
    fn new(cfg: &RunConfig) -> Self {
        Writer { dir: cfg.outputs.clone(), hash: cfg.hash(), files: Vec::new() }
    }

    fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let mut v = serde_json::to_value(body)?;
        match &mut v {
            Value::Object(m) => {
                m.insert("config_hash".into(), Value::String(self.hash.clone()));
                m.insert("tool_version".into(), Value::String(TOOL_VERSION.into()));
            }
            _ => return Err(Error::Config("report is not a JSON object".into())),
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        self.files.push((self.dir.join(name), text.into_bytes()));
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.files.push((self.dir.join(name), bytes));
        Ok(())
    }

    fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((self.dir.join(name), bytes));
    }

    fn finish(self) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir)?;
        let mut out = Vec::new();
        for (p, bytes) in self.files {
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&p, bytes)?;
            out.push(p);
        }
        Ok(out)
    }
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn catalog(cfg: &RunConfig, v: &Potential, fl: &Floquet, b: Boundary) -> Result<SpectrumCatalog> {
    let opts = cfg.options();
    let mut cat = build_catalog_with(fl, v, cfg.k_max, b, &opts)?;
    if b == Boundary::Periodic {
        add_neumann(&mut cat, fl, v, &opts)?;
    }
    Ok(cat)
}

fn spectrum_rows(cat: &SpectrumCatalog) -> Vec<Vec<String>> {
    cat.clusters
        .iter()
        .map(|c| {
            let mut r = vec![c.k.to_string()];
            for z in [c.lam_plus, c.lam_minus, c.mu, c.kappa] {
                r.push(num(z.re));
                r.push(num(z.im));
            }
            r.push(c.klass.label().to_string());
            r
        })
        .collect()
}

const SPECTRUM_HEADER: [&str; 10] =
    ["k", "lam_plus_re", "lam_plus_im", "lam_minus_re", "lam_minus_im", "mu_re", "mu_im", "kappa_re", "kappa_im", "class"];

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Periodic => "periodic",
        Boundary::Antiperiodic => "antiperiodic",
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let v = cfg.potential.build()?;
    let fl = Floquet::new(&v, cfg.grid_points)?;
    let mut w = Writer::new(cfg);
    let mut cats = BTreeMap::new();
    for b in cfg.boundary.list() {
        let cat = catalog(cfg, &v, &fl, b)?;
        let name = match b {
            Boundary::Periodic => "spectrum.csv".to_string(),
            Boundary::Antiperiodic if cfg.boundary == BoundarySelection::Antiperiodic => "spectrum.csv".to_string(),
            Boundary::Antiperiodic => "spectrum_antiperiodic.csv".to_string(),
        };
        w.csv(&name, &SPECTRUM_HEADER, spectrum_rows(&cat))?;
        cats.insert(boundary_name(b), cat);
    }
    w.json("spectrum.json", &serde_json::json!({ "catalogs": cats }))?;
    w.finish()
}

pub fn cmd_criterion(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let v = cfg.potential.build()?;
    let fl = Floquet::new(&v, cfg.grid_points)?;
    let mut w = Writer::new(cfg);
    let mut reports = BTreeMap::new();
    for b in cfg.boundary.list() {
        let cat = build_catalog_with(&fl, &v, cfg.k_max, b, &cfg.options())?;
        let report = riesz_ratios(&cat)?;
        let quotients = if report.per_k.is_empty() { Vec::new() } else { offset_quotients(&fl, &cat)? };
        let suffix = if b == Boundary::Antiperiodic && cfg.boundary == BoundarySelection::Both { "_antiperiodic" } else { "" };
        w.raw(&format!("ratios{suffix}.csv"), ratios_csv(&report)?);
        w.raw(&format!("ratios{suffix}.dat"), ratios_dat(&report).into_bytes());
        reports.insert(boundary_name(b), serde_json::json!({ "report": report, "offset_quotients": quotients }));
    }
    w.json("criterion.json", &serde_json::json!({ "criterion": reports }))?;
    w.finish()
}

pub fn cmd_basis(cfg: &RunConfig, dump_vectors: bool) -> Result<Vec<PathBuf>> {
    let v = cfg.potential.build()?;
    let fl = Floquet::new(&v, cfg.grid_points)?;
    let cat = build_catalog_with(&fl, &v, cfg.k_max, Boundary::Periodic, &cfg.options())?;
    let sys = build_system(&fl, &cat, cfg.k_max)?;
    let (bessel_phi, bessel_chi) = bessel_bound_scan(&sys, cfg.k_max)?;
    let mut w = Writer::new(cfg);
    w.json(
        "basis.json",
        &serde_json::json!({
            "gram_defect": sys.gram_defect,
            "gram_ok": sys.gram_defect < cfg.tolerances.gram,
            "bessel_constant_phi": bessel_phi,
            "bessel_constant_chi": bessel_chi,
            "normalization_log": sys.normalization_log,
            "flags": sys.flags,
            "vectors": sys.clusters.iter().map(|c| serde_json::json!({
                "k": c.k, "shape": c.shape, "phi": c.phi, "chi": c.chi,
            })).collect::<Vec<_>>(),
        }),
    )?;
    if dump_vectors {
        for c in &sys.clusters {
            for (side, list) in [("phi", &c.phi), ("chi", &c.chi)] {
                for r in list.iter() {
                    let sign = if r.sign == crate::rootbasis::Sign::Plus { "plus" } else { "minus" };
                    let rows = vector_rows(&sys.xs, r).into_iter().map(|a| a.iter().map(|x| num(*x)).collect()).collect();
                    w.csv(&format!("vectors/{side}_k{}_{sign}.csv", c.k), &["x", "re", "im"], rows)?;
                }
            }
        }
    }
    w.finish()
}

/// Projections use at most this many nodes; the composition check is cubic in it.
pub const PROJECTION_GRID: usize = 257;

pub fn cmd_greens(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let v = cfg.potential.build()?;
    let gc = cfg.greens.ok_or_else(|| Error::Config("greens subcommand needs a \"greens\" section".into()))?;
    let fl = Floquet::new(&v, cfg.grid_points)?;
    let zeta = C64::new(gc.zeta.0, gc.zeta.1);
    let kern = greens_kernel_with(&fl, gc.t, zeta)?;
    let diag: Vec<C64> = (0..kern.size()).map(|i| kern.at(i, i)).collect();
    let g_proj = cfg.grid_points.min(PROJECTION_GRID);
    let flp = Floquet::new(&v, g_proj)?;
    let mut projections = BTreeMap::new();
    for b in cfg.boundary.list() {
        let cat = build_catalog_with(&flp, &v, cfg.k_max, b, &cfg.options())?;
        let mut done: Vec<C64> = Vec::new();
        let mut list = Vec::new();
        for r in cat.periodic.iter().filter(|r| r.k <= gc.projection_k) {
            if done.iter().any(|z| (z - r.value).norm() < 1e-6) {
                continue;
            }
            done.push(r.value);
            let p = checked_projection(&flp, &cat, r.value, None, 256)?;
            list.push(summarize(&p));
        }
        projections.insert(boundary_name(b), list);
    }
    let mut w = Writer::new(cfg);
    w.json(
        "greens.json",
        &serde_json::json!({
            "zeta": zeta,
            "t": gc.t,
            "xs": kern.xs,
            "diagonal": diag,
            "diagonal_defect": kern.diagonal_defect,
            "projection_grid": g_proj,
            "projections": projections,
        }),
    )?;
    w.finish()
}

pub fn cmd_oracle_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let v = cfg.potential.build()?;
    let oc = cfg.oracle.unwrap_or_default();
    let fl = Floquet::new(&v, cfg.grid_points)?;
    let mut results = BTreeMap::new();
    for b in cfg.boundary.list() {
        let cat = catalog(cfg, &v, &fl, b)?;
        results.insert(boundary_name(b), compare_catalog(&cat, &v, oc.n_modes, oc.k_limit)?);
    }
    let mut w = Writer::new(cfg);
    w.json("oracle.json", &serde_json::json!({ "n_modes": oc.n_modes, "k_limit": oc.k_limit, "comparisons": results }))?;
    w.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub fixture: String,
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(fixture: &str, invariant: &str, r: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
    CheckOutcome { fixture: fixture.into(), invariant: invariant.into(), passed, detail }
}

/// 100 deterministic samples in `|Re ζ| ≤ 20`, `|Im ζ| ≤ 3`.
pub fn det_samples() -> Vec<C64> {
    (0..100).map(|j| C64::new(-20.0 + 40.0 * j as f64 / 99.0, 3.0 * (1.7 * j as f64).sin())).collect()
}

/// `max |det M − 1|` over [`det_samples`], unscaled and divided by `|c s′| + |c′ s|`.
pub fn det_defects(fl: &Floquet) -> Result<(f64, f64)> {
    let mut abs: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for z in det_samples() {
        let e = fl.endpoint(z)?;
        let d = (e.det() - 1.0).norm();
        abs = abs.max(d);
        rel = rel.max(d / (1.0f64).max((e.c * e.sp).norm() + (e.cp * e.s).norm()));
    }
    Ok((abs, rel))
}

fn scaled_det_defect(fl: &Floquet) -> Result<f64> {
    Ok(det_defects(fl)?.1)
}

/// Fourth-order central difference of `s(·, π)` in ζ against the quadrature formula.
pub fn zeta_derivative_mismatch(fl: &Floquet, z: C64) -> Result<f64> {
    let h = 1e-3;
    let s = |d: f64| -> Result<(C64, C64, C64, C64)> {
        let e = fl.endpoint(z + d)?;
        Ok((e.c, e.s, e.cp, e.sp))
    };
    let (a, b, c, d) = (s(2.0 * h)?, s(h)?, s(-h)?, s(-2.0 * h)?);
    let fd = |f: fn(&(C64, C64, C64, C64)) -> C64| (-f(&a) + f(&b) * 8.0 - f(&c) * 8.0 + f(&d)) / (12.0 * h);
    let e = fl.endpoint(z)?;
    let pairs = [
        (fd(|t| t.0), e.c_dot()),
        (fd(|t| t.1), e.s_dot()),
        (fd(|t| t.2), e.cp_dot()),
        (fd(|t| t.3), e.sp_dot()),
    ];
    Ok(pairs.iter().map(|(x, y)| (x - y).norm() / (1.0 + y.norm())).fold(0.0, f64::max))
}

/// Slopes of `log₂` Wronskian defect for Numerov on grids `g, 2g−1, 4g−3`.
pub fn wronskian_slopes(v: &Potential, g: usize, z: C64) -> Result<Vec<f64>> {
    let mut d = Vec::new();
    for gg in [g, 2 * g - 1, 4 * g - 3] {
        d.push(wronskian_defect(&Propagator::with_method(v, gg, Integrator::Numerov)?.grid(z)?));
    }
    Ok(d.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

pub fn selftest(grid: usize, tol: &Tolerances) -> Vec<CheckOutcome> {
    let fx: [(&str, Potential); 3] = [("zero", fixtures::zero()), ("mathieu", fixtures::mathieu()), ("gasymov", fixtures::gasymov())];
    let opts = SpectraOptions { grid_points: grid, root_tol: tol.root, cluster_tol: tol.cluster };
    // coarse grids carry a wider slope window and h⁴-scaled quadrature tolerances
    let slope_tol = if grid < 257 { 0.6 } else { 0.3 };
    let tier = ((crate::DEFAULT_GRID - 1) as f64 / (grid - 1) as f64).powi(4).max(1.0);
    let mut out = Vec::new();
    for (name, v) in &fx {
        let fl = match Floquet::new(v, grid) {
            Ok(f) => f,
            Err(e) => {
                out.push(outcome(name, "setup", Err(e)));
                continue;
            }
        };
        out.push(outcome(name, "det_M_equals_1_scaled", (|| {
            let worst = scaled_det_defect(&fl)?;
            Ok((worst < 1e-12, format!("max |det M - 1| / (|c s'| + |c' s|) = {worst:.3e}")))
        })()));
        out.push(outcome(name, "zeta_derivatives_vs_fd", (|| {
            let mut worst: f64 = 0.0;
            for j in 0..10 {
                let z = C64::new(0.7 + 0.9 * j as f64, 0.3 * (j as f64).cos());
                worst = worst.max(zeta_derivative_mismatch(&fl, z)?);
            }
            Ok((worst < 1e-6 * tier, format!("max relative mismatch {worst:.3e}, tier x{tier:.0}")))
        })()));
        out.push(outcome(name, "wronskian_slope_numerov", (|| {
            let s = wronskian_slopes(v, grid.clamp(65, 257), C64::new(6.0, 0.5))?;
            let ok = s.iter().all(|x| (x - 4.0).abs() < slope_tol);
            Ok((ok, format!("slopes {s:.3?}, window +-{slope_tol}")))
        })()));
        let cat = build_catalog_with(&fl, v, 10, Boundary::Periodic, &opts);
        out.push(outcome(name, "counting_check", match &cat {
            Ok(c) => {
                let n = &c.counting;
                let ok = n.periodic_found == n.periodic_expected && n.dirichlet_found == n.dirichlet_expected;
                Ok((ok, format!("k0 = {}, base disk {}/{} periodic, {}/{} Dirichlet", c.k0, n.periodic_found, n.periodic_expected, n.dirichlet_found, n.dirichlet_expected)))
            }
            Err(e) => Err(Error::Clustering(e.to_string())),
        }));
        let Ok(cat) = cat else { continue };
        if *name == "zero" {
            out.push(outcome(name, "free_exactness", (|| {
                let mut worst: f64 = 0.0;
                for c in &cat.clusters {
                    let want = (4 * c.k * c.k) as f64;
                    for z in [c.lam_plus, c.lam_minus, c.mu] {
                        worst = worst.max((z - want).norm());
                    }
                }
                Ok((worst < 1e-8, format!("max error {worst:.3e}")))
            })()));
        }
        if *name == "gasymov" {
            out.push(outcome(name, "discriminant_is_cos", (|| {
                let mut worst: f64 = 0.0;
                for j in 0..=40 {
                    let z = C64::new(0.25 * j as f64, 0.5);
                    worst = worst.max((fl.u_plus(z)? - (z * PI).cos()).norm());
                }
                Ok((worst < 1e-6, format!("max |u+ - cos(pi zeta)| = {worst:.3e}")))
            })()));
        }
        out.push(outcome(name, "criterion_bounded", (|| {
            let r = riesz_ratios(&cat)?;
            Ok((r.verdict == Verdict::BoundedEvidence, format!("verdict {:?}, sup {:.4}", r.verdict, r.running_sup)))
        })()));
        out.push(outcome(name, "gram_defect", (|| {
            let sys = build_system(&fl, &cat, 5)?;
            Ok((sys.gram_defect < tol.gram * tier, format!("gram defect {:.3e}, tier x{tier:.0}", sys.gram_defect)))
        })()));
        out.push(outcome(name, "projection_traces", (|| {
            let flp = Floquet::new(v, 129)?;
            let catp = build_catalog_with(&flp, v, 6, Boundary::Periodic, &SpectraOptions { grid_points: 129, ..opts })?;
            let mut seen: Vec<C64> = Vec::new();
            let mut detail = Vec::new();
            for r in catp.periodic.iter().filter(|r| r.k <= 2) {
                if seen.iter().any(|z| (z - r.value).norm() < 1e-6) {
                    continue;
                }
                seen.push(r.value);
                let p = checked_projection(&flp, &catp, r.value, None, 128)?;
                detail.push(format!("{:.4}", p.trace.re));
            }
            Ok((seen.len() >= 2, format!("traces {}", detail.join(" "))))
        })()));
    }
    out
}

fn run_command(cli: Cli) -> Result<i32> {
    let (cfg, args, which) = match cli.command {
        Command::Selftest(a) => {
            let (grid, tol) = match &a.config {
                Some(p) => {
                    let c = RunConfig::load(p)?;
                    (c.grid_points, c.tolerances)
                }
                None => (crate::DEFAULT_GRID, Tolerances::default()),
            };
            let res = selftest(grid, &tol);
            for r in &res {
                println!("{} {}/{}: {}", if r.passed { "PASS" } else { "FAIL" }, r.fixture, r.invariant, r.detail);
            }
            return Ok(if res.iter().all(|r| r.passed) { 0 } else { 1 });
        }
        Command::Spectrum(a) => (RunConfig::load(&a.config)?, a, "spectrum"),
        Command::Criterion(a) => (RunConfig::load(&a.config)?, a, "criterion"),
        Command::Basis(a) => (RunConfig::load(&a.config)?, a, "basis"),
        Command::Greens(a) => (RunConfig::load(&a.config)?, a, "greens"),
        Command::OracleCompare(a) => (RunConfig::load(&a.config)?, a, "oracle-compare"),
    };
    let mut cfg = cfg;
    cfg.apply(&args)?;
    let files = match which {
        "spectrum" => cmd_spectrum(&cfg)?,
        "criterion" => cmd_criterion(&cfg)?,
        "basis" => cmd_basis(&cfg, args.dump_vectors)?,
        "greens" => cmd_greens(&cfg)?,
        _ => cmd_oracle_compare(&cfg)?,
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(0)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
