use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use szego::jalg::{classify, jay, orlov_modulus, polar_ju, polar_ju_expanding, JClass, CLASSIFY_TOL};
use szego::nodes::{pipeline, PipelineReport};
use szego::spectral::{EntropyOptions, SchurOptions, SumRuleOptions, SumRuleReport};
use szego::system::{arov_from_pdb, to_pdb, transfer as transfer_chain, ArovProfile, IntegratorOptions, PdBHamiltonian, Side, TransferResult};
use szego::ComplexMatrix2;

use crate::error::{CliError, CliResult};
use crate::parse::{self, Formats};
use crate::svg;
use crate::{Common, Direction, GaugeArgs, JmodArgs, NodesArgs, SumruleArgs, TransferArgs};

/// A JSON report for stdout plus the reason verification failed, if it did.
pub struct Report {
    pub json: String,
    pub failure: Option<String>,
}

/// Validated run configuration, echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tolerances: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    pub formats: Vec<&'static str>,
    /// Not part of the report, so that runs differing only in the output
    /// directory produce identical files.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub flags: Formats,
}

impl RunConfig {
    fn new(command: &'static str, common: Option<&Common>) -> CliResult<Self> {
        let flags = match common {
            Some(c) => parse::formats(&c.formats)?,
            None => Formats { json: true, ..Formats::default() },
        };
        let formats = [("csv", flags.csv), ("json", flags.json), ("svg", flags.svg)].into_iter().filter(|f| f.1).map(|f| f.0).collect();
        let cfg = Self {
            command,
            profile: None,
            ode_step: common.map(|c| c.ode_step),
            nodes: None,
            tolerances: Vec::new(),
            t_cap: None,
            formats,
            out: common.and_then(|c| c.out.clone()),
            flags,
        };
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if let Some(h) = self.ode_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::Input(format!("--ode-step must be positive, got {h}")));
            }
        }
        if let Some(n) = self.nodes {
            if n < 64 || !n.is_power_of_two() {
                return Err(CliError::Input(format!("--nodes must be a power of two ≥ 64, got {n}")));
            }
        }
        if let Some(t) = self.tolerances.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CliError::Input(format!("tolerances must be positive, got {t}")));
        }
        if let Some(t) = self.t_cap {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Input(format!("--t-cap must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions::with_step(self.ode_step.unwrap_or(IntegratorOptions::default().step))
    }

    fn with_profile(mut self, path: &Path) -> Self {
        self.profile = Some(path.display().to_string());
        self
    }

    /// Writes `contents` to `name` inside the output directory, if any.
    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

#[derive(Serialize)]
struct SumruleOutput<'a> {
    config: &'a RunConfig,
    rel_tol: f64,
    agrees: bool,
    report: &'a SumRuleReport,
}

pub fn sumrule(a: &SumruleArgs) -> CliResult<Report> {
    let mut cfg = RunConfig::new("sumrule", Some(&a.common))?.with_profile(&a.profile);
    cfg.nodes = Some(a.nodes);
    cfg.tolerances = vec![a.tol, a.rel_tol];
    cfg.t_cap = Some(a.t_cap);
    cfg.validate()?;
    let p = ArovProfile::load(&a.profile)?;
    let entropy = EntropyOptions { start_nodes: a.nodes, max_nodes: a.nodes.max(EntropyOptions::default().max_nodes), ..EntropyOptions::default() };
    let schur = SchurOptions { integrator: cfg.integrator(), t_cap: a.t_cap, ..SchurOptions::default() };
    let opts = SumRuleOptions { schur, entropy, ..SumRuleOptions::default() };
    let r = szego::spectral::sumrule(&p, &opts)?;
    let agrees = r.agrees(a.tol, a.rel_tol);
    let json = to_json(&SumruleOutput { config: &cfg, rel_tol: a.rel_tol, agrees, report: &r });
    if cfg.flags.json {
        cfg.write("sumrule.json", &json)?;
    }
    if let Some(g) = &r.grid {
        if cfg.flags.csv {
            cfg.write("schur_grid.csv", &g.to_csv())?;
        }
        if cfg.flags.svg {
            let pts: Vec<(f64, f64)> = g.theta.iter().zip(&g.values).map(|(t, w)| (*t, w.norm())).collect();
            cfg.write("w_abs.svg", &svg::polyline("|w(tan θ)|", "θ", "|w|", &pts))?;
            let est: Vec<(f64, f64)> = r.entropy.node_counts.iter().zip(&r.entropy.estimates).map(|(n, e)| ((*n as f64).log2(), *e)).collect();
            cfg.write("entropy.svg", &svg::polyline("entropy refinement", "log2 nodes", "estimate", &est))?;
        }
    }
    let failure = (!agrees).then(|| {
        format!("|entropy − rhs| = {:e} exceeds max({:e}, {:e}·rhs)", r.abs_diff, a.tol, a.rel_tol)
    });
    Ok(Report { json, failure })
}

#[derive(Serialize)]
struct TransferOutput<'a> {
    config: &'a RunConfig,
    su11: bool,
    result: &'a TransferResult,
}

/// Tolerance for the SU(1,1) membership flag.
const SU11_TOL: f64 = 1e-8;

pub fn transfer(a: &TransferArgs) -> CliResult<Report> {
    let cfg = RunConfig::new("transfer", Some(&a.common))?.with_profile(&a.profile);
    cfg.validate()?;
    let z = parse::complex(&a.z)?;
    let p = ArovProfile::load(&a.profile)?;
    let r = transfer_chain(&p, z, a.t_end, &cfg.integrator())?;
    let json = to_json(&TransferOutput { config: &cfg, su11: r.is_su11(SU11_TOL), result: &r });
    if cfg.flags.json {
        cfg.write("transfer.json", &json)?;
    }
    Ok(Report { json, failure: None })
}

#[derive(Serialize)]
struct GaugeOutput<'a> {
    config: &'a RunConfig,
    direction: &'static str,
    #[serde(rename = "T")]
    t_end: f64,
    cells: usize,
    /// `|det H − det A|` on the samples (arov2pdb only).
    #[serde(skip_serializing_if = "Option::is_none")]
    det_defect: Option<f64>,
    round_trip_residual: f64,
    within_tolerance: bool,
}

const ROUND_TRIP_POINTS: usize = 200;

/// Midpoints of a uniform grid on `[0, t_end]`, away from typical knots.
fn probe_points(t_end: f64) -> impl Iterator<Item = f64> {
    (0..ROUND_TRIP_POINTS).map(move |k| t_end * (k as f64 + 0.5) / ROUND_TRIP_POINTS as f64)
}

fn coefficient_gap(p: &ArovProfile, q: &ArovProfile, t_end: f64) -> f64 {
    probe_points(t_end)
        .map(|t| {
            let (a, b, c) = p.coeffs(t, Side::Right);
            let (a2, b2, c2) = q.coeffs(t, Side::Right);
            (a - a2).abs().max((b - b2).abs()).max((c - c2).abs())
        })
        .fold(0.0, f64::max)
}

fn hamiltonian_gap(h: &PdBHamiltonian, g: &PdBHamiltonian) -> CliResult<f64> {
    let t_end = h.t_end().min(g.t_end());
    let mut worst: f64 = 0.0;
    for t in probe_points(t_end) {
        worst = worst.max((h.eval(t, Side::Right)? - g.eval(t, Side::Right)?).max_abs());
    }
    Ok(worst)
}

pub fn gauge(a: &GaugeArgs) -> CliResult<Report> {
    let mut cfg = RunConfig::new("gauge", Some(&a.common))?.with_profile(&a.profile);
    cfg.tolerances = vec![a.tol];
    cfg.validate()?;
    let opts = cfg.integrator();
    let output = match a.direction {
        Direction::Arov2pdb => {
            let p = ArovProfile::load(&a.profile)?;
            let t_end = a.t_end.unwrap_or(p.t0);
            let h = to_pdb(&p, t_end, &opts)?;
            let back = arov_from_pdb(&h, &opts)?;
            let residual = coefficient_gap(&p, &back, t_end);
            if cfg.flags.csv {
                cfg.write("pdb.csv", &h.to_csv())?;
            }
            GaugeOutput {
                config: &cfg,
                direction: "arov2pdb",
                t_end,
                cells: h.cells.len(),
                det_defect: Some(h.det_defect(&p)),
                round_trip_residual: residual,
                within_tolerance: residual <= a.tol,
            }
        }
        Direction::Pdb2arov => {
            if a.t_end.is_some() {
                return Err(CliError::Input("--T applies to arov2pdb only; the Hamiltonian fixes its own length".into()));
            }
            let text = fs::read_to_string(&a.profile).map_err(|e| CliError::Input(format!("{}: {e}", a.profile.display())))?;
            let h = PdBHamiltonian::from_csv(&text)?;
            let p = arov_from_pdb(&h, &opts)?;
            let again = to_pdb(&p, h.t_end(), &opts)?;
            let residual = hamiltonian_gap(&h, &again)?;
            if cfg.flags.json {
                cfg.write("profile.json", &p.to_json())?;
            }
            GaugeOutput {
                config: &cfg,
                direction: "pdb2arov",
                t_end: h.t_end(),
                cells: h.cells.len(),
                det_defect: None,
                round_trip_residual: residual,
                within_tolerance: residual <= a.tol,
            }
        }
    };
    let json = to_json(&output);
    if cfg.flags.json {
        cfg.write("gauge.json", &json)?;
    }
    let failure = (!output.within_tolerance).then(|| format!("round-trip residual {:e} exceeds {:e}", output.round_trip_residual, a.tol));
    Ok(Report { json, failure })
}

#[derive(Serialize)]
struct JmodOutput<'a> {
    config: &'a RunConfig,
    w: ComplexMatrix2,
    class: JClass,
    convention: &'static str,
    r: ComplexMatrix2,
    u: ComplexMatrix2,
    /// `‖UR − W‖`.
    residual_factorization: f64,
    /// `‖U*jU − j‖`.
    residual_j_unitary: f64,
    /// `‖jR² − W*jW‖`.
    residual_modulus: f64,
}

pub fn jmod(a: &JmodArgs) -> CliResult<Report> {
    let mut cfg = RunConfig::new("jmod", None)?;
    cfg.tolerances = vec![a.tol];
    cfg.validate()?;
    let w = parse::matrix(&a.matrix)?;
    let class = classify(&w, CLASSIFY_TOL);
    let (u, r, convention) = if a.expanding {
        let (u, r) = polar_ju_expanding(&w, a.tol)?;
        (u, r, "expanding")
    } else {
        match polar_ju(&w, a.tol) {
            Ok((u, r)) => (u, r, "contractive"),
            Err(szego::Error::NotContractive { min_eig }) if class == JClass::JExpanding => {
                return Err(CliError::Verification(format!(
                    "W is j-expanding (min eigenvalue of j − W*jW is {min_eig:e}); its inverse is j-contractive, rerun with --expanding to factor through W⁻¹"
                )));
            }
            Err(e) => return Err(e.into()),
        }
    };
    // the contractive modulus comes straight from the closed formula
    let r = if convention == "contractive" { orlov_modulus(&w, a.tol)? } else { r };
    let j = jay();
    let out = JmodOutput {
        config: &cfg,
        w,
        class,
        convention,
        r,
        u,
        residual_factorization: (u * r - w).norm(),
        residual_j_unitary: (u.adjoint() * j * u - j).norm(),
        residual_modulus: (j * r * r - w.adjoint() * j * w).norm(),
    };
    Ok(Report { json: to_json(&out), failure: None })
}

#[derive(Serialize)]
struct NodesOutput<'a> {
    config: &'a RunConfig,
    seed: u64,
    dims: [usize; 2],
    worst_residual: f64,
    passed: bool,
    pipeline: &'a PipelineReport,
}

pub fn nodes_demo(a: &NodesArgs) -> CliResult<Report> {
    let mut cfg = RunConfig::new("nodes-demo", None)?;
    cfg.tolerances = vec![a.tol];
    cfg.out = a.out.clone();
    cfg.validate()?;
    let (nk, ne) = parse::dims(&a.dims)?;
    if ne == 0 {
        return Err(CliError::Input("the coefficient dimension must be at least 1".into()));
    }
    let r = pipeline(nk, ne, a.params, a.seed)?;
    let worst = r.worst();
    let passed = worst <= a.tol;
    let json = to_json(&NodesOutput { config: &cfg, seed: a.seed, dims: [nk, ne], worst_residual: worst, passed, pipeline: &r });
    cfg.write("nodes_demo.json", &json)?;
    let failure = (!passed).then(|| format!("worst pipeline residual {worst:e} exceeds {:e}", a.tol));
    Ok(Report { json, failure })
}
