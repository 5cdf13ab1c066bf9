//! Batch front-end. One JSON scenario file per run; results go to `--out`
//! (or stdout) and the exit code reports the outcome: 0 pass, 1 failed
//! verification, 2 bad input.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::borcherds::{perturb, quasi_pullback_form, verify_candidate, verify_main_theorem, QPReport};
use crate::error::{Error, Result};
use crate::fqm::FqElement;
use crate::induction::{induce, EtaQuotient, ScalarForm};
use crate::lattice::{EmbeddingData, EvenLattice, LatticeLibrary};
use crate::qexp::VVForm;
use crate::rational::{fmt_q, parse_q, Q};
use crate::theta::theta_vv;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qpullback", version, about = "Discriminant forms, theta series, induction and quasi-pullback verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (JSON)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Truncation order, overrides the scenario
    #[arg(long, global = true)]
    pub nmax: Option<String>,
    /// Output directory; results are printed when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Accept the Witt index condition for rank(M) <= 4
    #[arg(long, global = true)]
    pub assert_witt: bool,
    /// Seed of the second (random) coset transversal
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Discriminant group, signature mod 8 and level of a lattice
    LatticeInfo,
    /// Vector-valued theta series of a positive definite lattice
    Theta,
    /// Quasi-pullback verifier for an embedding and an input form
    QpVerify,
    /// Induction of a scalar eta/theta product to a vector-valued form
    Induce,
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub lattices: Vec<Value>,
    pub lattice: Option<String>,
    pub embedding: Option<EmbeddingSpec>,
    pub form: Option<FormSpec>,
    pub induce: Option<InduceSpec>,
    pub nmax: Option<String>,
    pub fault: Option<FaultSpec>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub ambient: String,
    pub sublattice: Option<String>,
    pub k_basis: Option<Vec<Vec<i64>>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FormSpec {
    /// Scalar eta/theta product; the discriminant group must be trivial.
    Eta { phi: String },
    /// Serialized vector-valued form.
    File { path: String },
    /// `ind_{A_L}(phi)` at level `d` (default: level of `A_L`).
    Induce { phi: String, d: Option<i64> },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct InduceSpec {
    /// Lattice whose discriminant form is the target module.
    pub lattice: String,
    #[serde(default)]
    pub isotropic: Vec<Vec<i64>>,
    pub d: Option<i64>,
    pub phi: String,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub component: Vec<i64>,
    pub n: String,
    pub delta: i64,
}

/// What a command produced: files to write (name, JSON) and a summary line.
pub struct Outcome {
    pub files: Vec<(String, Value)>,
    pub summary: String,
    pub pass: bool,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn library(cfg: &ScenarioConfig) -> Result<LatticeLibrary> {
    let mut lib = LatticeLibrary::new();
    for v in &cfg.lattices {
        lib.load_json(v)?;
    }
    Ok(lib)
}

fn n_max(cfg: &ScenarioConfig, common: &Common) -> Result<Q> {
    let n = match common.nmax.as_deref().or(cfg.nmax.as_deref()) {
        Some(s) => parse_q(s)?,
        None => Q::from_integer(3),
    };
    if n < Q::from_integer(0) {
        return Err(Error::Parse("nmax must be nonnegative".into()));
    }
    Ok(n)
}

fn subject(cfg: &ScenarioConfig, lib: &LatticeLibrary) -> Result<EvenLattice> {
    lib.eval(cfg.lattice.as_deref().ok_or_else(|| Error::Parse("scenario needs 'lattice'".into()))?)
}

// ---- phi syntax: eta:{1:-8,2:8,4:-8}*theta_pow:{lattice:A1,power:6,coset:[0]} ----

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '{' | '[' | '(' => depth += 1,
            '}' | ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn braced_map(s: &str) -> Result<BTreeMap<String, String>> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| Error::Parse(format!("expected {{...}}, got '{s}'")))?;
    let mut map = BTreeMap::new();
    if inner.trim().is_empty() {
        return Ok(map);
    }
    for item in split_top(inner, ',') {
        let (k, v) = item.split_once(':').ok_or_else(|| Error::Parse(format!("expected key:value, got '{item}'")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_i64(s: &str) -> Result<i64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{s}'")))
}

pub fn parse_phi(s: &str, lib: &LatticeLibrary) -> Result<ScalarForm> {
    let mut phi = ScalarForm::default();
    let mut eta = Vec::new();
    for frag in split_top(s, '*') {
        let (kind, body) = frag.split_once(':').ok_or_else(|| Error::Parse(format!("bad factor '{frag}'")))?;
        let map = braced_map(body)?;
        match kind.trim() {
            "eta" => {
                for (d, r) in &map {
                    let d = parse_i64(d)?;
                    if d < 1 {
                        return Err(Error::Parse(format!("eta level {d} must be positive")));
                    }
                    eta.push((d as u64, parse_i64(r)?));
                }
            }
            "theta_pow" => {
                let name = map.get("lattice").ok_or_else(|| Error::Parse("theta_pow needs lattice".into()))?;
                let k = lib.eval(name)?;
                if !k.is_positive_definite() {
                    return Err(Error::NotPositiveDefinite);
                }
                let power = map.get("power").map_or(Ok(1), |p| parse_i64(p))?;
                let power = u32::try_from(power).map_err(|_| Error::Parse("theta power must be >= 0".into()))?;
                let a = k.discriminant().module;
                let coset = match map.get("coset") {
                    None => a.zero(),
                    Some(c) => {
                        let coords: Vec<i64> = c
                            .trim()
                            .strip_prefix('[')
                            .and_then(|t| t.strip_suffix(']'))
                            .ok_or_else(|| Error::Parse(format!("bad coset '{c}'")))?
                            .split(',')
                            .filter(|t| !t.trim().is_empty())
                            .map(parse_i64)
                            .collect::<Result<_>>()?;
                        a.element(&coords)?
                    }
                };
                phi = phi.times_theta(&k, coset, power);
            }
            other => return Err(Error::Parse(format!("unknown factor '{other}'"))),
        }
    }
    phi.eta = EtaQuotient::new(&eta);
    Ok(phi)
}

// ---- commands ----

pub fn cmd_lattice_info(cfg: &ScenarioConfig) -> Result<Outcome> {
    let lib = library(cfg)?;
    let l = subject(cfg, &lib)?;
    let a = l.discriminant().module;
    let sigma = a.signature_mod8()?;
    let (bp, bm) = l.signature();
    let expected = (bp as i64 - bm as i64).rem_euclid(8) as u8;
    let report = json!({
        "rank": l.rank(),
        "signature": [bp, bm],
        "det": l.det().to_string(),
        "order": a.order(),
        "discriminant": a.to_json(),
        "sigma": sigma,
        "level": a.level(),
        "gauss_sum_error": a.gauss_sum_error(),
    });
    Ok(Outcome {
        summary: format!("|A| = {}, orders {:?}, sigma = {sigma}, level {}", a.order(), a.orders(), a.level()),
        pass: sigma == expected,
        files: vec![("lattice_info.json".into(), report)],
    })
}

pub fn cmd_theta(cfg: &ScenarioConfig, common: &Common) -> Result<Outcome> {
    let lib = library(cfg)?;
    let k = subject(cfg, &lib)?;
    let n = n_max(cfg, common)?;
    let th = theta_vv(&k, n)?;
    Ok(Outcome {
        summary: format!("theta series on |A| = {} up to q^{}, {} terms", th.module().order(), fmt_q(&n), th.num_terms()),
        pass: true,
        files: vec![("theta.json".into(), th.to_json())],
    })
}

fn embedding(cfg: &ScenarioConfig, lib: &LatticeLibrary, common: &Common) -> Result<EmbeddingData> {
    let spec = cfg.embedding.as_ref().ok_or_else(|| Error::Parse("scenario needs 'embedding'".into()))?;
    let l = lib.eval(&spec.ambient)?;
    let basis = match (&spec.k_basis, &spec.sublattice) {
        (Some(b), None) => b.clone(),
        (None, Some(name)) => lib
            .sublattice(&spec.ambient, name)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("unknown sublattice '{name}' of '{}'", spec.ambient)))?,
        _ => return Err(Error::Parse("embedding needs exactly one of k_basis, sublattice".into())),
    };
    EmbeddingData::build(&l, basis, common.assert_witt)
}

fn input_form(spec: &FormSpec, emb: &EmbeddingData, lib: &LatticeLibrary, n: Q, base: &Path, seed: u64) -> Result<VVForm> {
    let a_l = &emb.a_l.module;
    match spec {
        FormSpec::Eta { phi } => {
            if !a_l.is_trivial() {
                return Err(Error::ModuleMismatch("scalar input needs a unimodular lattice".into()));
            }
            let phi = parse_phi(phi, lib)?;
            Ok(VVForm::from_scalar(&phi.expand(n)?, phi.weight()))
        }
        FormSpec::File { path } => {
            let p = base.join(path);
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let f = VVForm::from_json(&v)?;
            if f.module() != a_l {
                return Err(Error::ModuleMismatch("form file does not live on A_L".into()));
            }
            Ok(f)
        }
        FormSpec::Induce { phi, d } => {
            let phi = parse_phi(phi, lib)?;
            Ok(induce(a_l, &[a_l.zero()], &phi, d.unwrap_or(a_l.level()), n, seed)?.form)
        }
    }
}

pub fn cmd_qp_verify(cfg: &ScenarioConfig, common: &Common, base: &Path) -> Result<Outcome> {
    let lib = library(cfg)?;
    let n = n_max(cfg, common)?;
    let emb = embedding(cfg, &lib, common)?;
    let spec = cfg.form.as_ref().ok_or_else(|| Error::Parse("scenario needs 'form'".into()))?;
    let f = input_form(spec, &emb, &lib, n, base, common.seed)?;
    let report: QPReport = match &cfg.fault {
        None => verify_main_theorem(&f, &emb, n),
        Some(fault) => {
            // the candidate comes from the clean input; the data from the perturbed one
            let g = quasi_pullback_form(&f, &emb, n)?;
            let x: FqElement = f.module().element(&fault.component)?;
            let bad = perturb(&f, &x, parse_q(&fault.n)?, fault.delta)?;
            verify_candidate(&bad, &emb, &g, n)
        }
    };
    let summary = format!(
        "predicted weight {}, lifted weight {}, {} checks, {} failed: {}",
        report.predicted_weight.map_or("-".into(), |w| fmt_q(&w)),
        report.lifted_weight.map_or("-".into(), |w| fmt_q(&w)),
        report.checks.len(),
        report.failures().count(),
        if report.verdict { "PASS" } else { "FAIL" }
    );
    Ok(Outcome {
        pass: report.verdict,
        summary: format!("{summary}\n{}", report.to_table()),
        files: vec![("report.json".into(), report.to_json()), ("g.json".into(), report.g.to_json())],
    })
}

pub fn cmd_induce(cfg: &ScenarioConfig, common: &Common) -> Result<Outcome> {
    let lib = library(cfg)?;
    let n = n_max(cfg, common)?;
    let spec = cfg.induce.as_ref().ok_or_else(|| Error::Parse("scenario needs 'induce'".into()))?;
    let a = lib.eval(&spec.lattice)?.discriminant().module;
    let gens = spec.isotropic.iter().map(|c| a.element(c)).collect::<Result<Vec<_>>>()?;
    let iso = crate::fqm::IsotropicSubgroup::new(&a, gens)?;
    let phi = parse_phi(&spec.phi, &lib)?;
    let d = spec.d.unwrap_or(a.level());
    let ind = induce(&a, iso.elements(), &phi, d, n, common.seed)?;
    Ok(Outcome {
        summary: format!(
            "induced at level {d}: weight {}, {} terms, residual {:.1e}, transversal deviation {:.1e}",
            fmt_q(&ind.form.weight()),
            ind.form.num_terms(),
            ind.residual,
            ind.dependence
        ),
        pass: true,
        files: vec![("induced.json".into(), ind.form.to_json())],
    })
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::RepresentativeDependence(_) | Error::Rationalization(..) | Error::InternalMismatch(..) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let common = &cli.common;
    let cfg = match &common.config {
        Some(p) => match load_config(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        },
        None => {
            eprintln!("error: --config is required");
            return EXIT_INPUT;
        }
    };
    let base = common.config.as_deref().and_then(Path::parent).unwrap_or(Path::new(".")).to_path_buf();
    let result = match cli.command {
        Command::LatticeInfo => cmd_lattice_info(&cfg),
        Command::Theta => cmd_theta(&cfg, common),
        Command::QpVerify => cmd_qp_verify(&cfg, common, &base),
        Command::Induce => cmd_induce(&cfg, common),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    // a closed stdout (e.g. piped into head) is not an error
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", outcome.summary);
    match &common.out {
        Some(dir) => {
            if let Err(e) = std::fs::create_dir_all(dir) {
                eprintln!("error: {}: {e}", dir.display());
                return EXIT_INPUT;
            }
            for (name, v) in &outcome.files {
                let p = dir.join(name);
                let text = serde_json::to_string_pretty(v).expect("serializable");
                if let Err(e) = std::fs::write(&p, text + "\n") {
                    eprintln!("error: {}: {e}", p.display());
                    return EXIT_INPUT;
                }
            }
        }
        None => {
            for (_, v) in &outcome.files {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(v).expect("serializable"));
            }
        }
    }
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
