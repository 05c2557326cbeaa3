//! Reproducible runs behind the `invis` binary: configuration, the four
//! commands and their JSON documents.
//!
//! | key        | default  |
//! |------------|----------|
//! | n          | 16       |
//! | k          | 2        |
//! | seed       | 0        |
//! | steps      | 1000000  |
//! | orbits     | 100      |
//! | delta      | 0        |
//! | grid       | 64       |
//! | norm_grid  | 1000     |
//! | base       | random   |
//! | radius     | 0.05     |
//! | targets    | 20       |
//! | trials     | 1000     |
//!
//! Every document starts with a header holding the crate version, the
//! command and the full configuration (minus `out` and `threads`, which do
//! not change results), so equal configurations give byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certificate::{all_pass, Certificate};
use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::geometry::{region_box, RegionId, RegionTest};
use crate::orbit::{Orbit, TraceRecorder, VisitStats};
use crate::params::{derive_params, Params};
use crate::perturb::{make_perturbation, measure_distance};
use crate::symbolic::{read_packed, read_text, BaseSequence, BernoulliSource};
use crate::verify::discrepancy::{check_discrepancy_bound, DiscrepancyConfig};
use crate::verify::movement::check_directional_movement;
use crate::verify::norms::{norm_certificates, scalar_certificates};
use crate::verify::strips::{backward_block_certificates, check_strip_dynamics, global_inclusions, sampled_block_certificates, BLOCK_SAMPLES};
use crate::verify::zero_run::{check_zero_run_lemma, directed_descent_base, run_crafted, start_point, LemmaCheckConfig, ZeroRunReport};
use crate::words::{build_upper_ifs, check_ifs_assumptions, critical_word_for, entry_word, negut_frequency_experiment, NegutSetup};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Norms,
    Strips,
    ZeroRun,
    Words,
    Perturbed,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Norms => "norms",
            Suite::Strips => "strips",
            Suite::ZeroRun => "zero-run",
            Suite::Words => "words",
            Suite::Perturbed => "perturbed",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Params,
    Simulate,
    Verify,
    CriticalWord,
}

/// Where simulated orbits read their letters from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseSource {
    /// Orbit `i` reads ChaCha8 stream `i` of the seed.
    Random,
    AllZero,
    AllOne,
    /// Random base with three directed-descent windows into R.
    Descent,
    /// Text (one letter per line) or packed file.
    File(PathBuf),
}

impl std::str::FromStr for BaseSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => BaseSource::Random,
            "all-zero" => BaseSource::AllZero,
            "all-one" => BaseSource::AllOne,
            "descent" => BaseSource::Descent,
            "" => return Err(Error::Parse("empty base source".into())),
            path => BaseSource::File(PathBuf::from(path)),
        })
    }
}

impl std::fmt::Display for BaseSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BaseSource::Random => write!(f, "random"),
            BaseSource::AllZero => write!(f, "all-zero"),
            BaseSource::AllOne => write!(f, "all-one"),
            BaseSource::Descent => write!(f, "descent"),
            BaseSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for BaseSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BaseSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub k: usize,
    pub seed: u64,
    pub steps: u64,
    pub orbits: usize,
    /// Perturbation size; 0 means the unperturbed family.
    pub delta: f64,
    pub grid: usize,
    pub norm_grid: usize,
    pub base: BaseSource,
    pub suite: Suite,
    /// Target point for `critical-word`.
    pub x: Option<Vec<f64>>,
    pub radius: f64,
    /// Random targets in the `words` suite.
    pub targets: usize,
    /// Word trials in the discrepancy check.
    pub trials: usize,
    /// Visit statistics skip `t <= burn_in`; defaults to `min(n^k, steps / 2)`.
    pub burn_in: Option<u64>,
    /// Write every `trace_stride`-th point of orbit 0 to `trace.jsonl`.
    pub trace_stride: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 16,
            k: 2,
            seed: 0,
            steps: 1_000_000,
            orbits: 100,
            delta: 0.0,
            grid: 64,
            norm_grid: 1000,
            base: BaseSource::Random,
            suite: Suite::All,
            x: None,
            radius: 0.05,
            targets: 20,
            trials: 1000,
            burn_in: None,
            trace_stride: None,
            out: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<Params> {
        let p = derive_params(self.n, self.k)?;
        let bad = |m: &str| Err(Error::Parse(m.to_string()));
        if self.steps == 0 {
            return bad("steps must be positive");
        }
        if self.orbits == 0 {
            return bad("orbits must be positive");
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta must be a finite non-negative number");
        }
        if self.grid < 16 || self.norm_grid < 2 {
            return bad("grid must be at least 16 and norm_grid at least 2");
        }
        if !(self.radius > 0.0) {
            return bad("radius must be positive");
        }
        if self.threads == Some(0) {
            return bad("threads must be positive");
        }
        if let Some(x) = &self.x {
            if x.len() != self.k {
                return Err(Error::Dimension { expected: self.k, got: x.len() });
            }
        }
        Ok(p)
    }

    fn burn_in(&self, p: &Params) -> u64 {
        self.burn_in.unwrap_or_else(|| p.default_burn_in().min(self.steps / 2))
    }
}

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    CertificateFailure = 1,
    BadArguments = 2,
    Anomaly = 3,
    Io = 4,
}

impl Status {
    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::InvalidN(_)
            | Error::InvalidK(_)
            | Error::Dimension { .. }
            | Error::BadSymbol(_)
            | Error::TargetOutsideQminus(_)
            | Error::WordDimension(_)
            | Error::Parse(_)
            | Error::Json(_)
            | Error::Overlap(_)
            | Error::OutOfBounds { .. } => Status::BadArguments,
            Error::Escape { .. } => Status::Anomaly,
            Error::Io(_) => Status::Io,
            _ => Status::CertificateFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// JSON document (pretty-printed) for stdout.
    pub stdout: String,
}

fn header(cmd: Command, cfg: &RunConfig) -> Value {
    json!({
        "version": VERSION,
        "command": cmd,
        "config": cfg,
        "seeds": {
            "seed": cfg.seed,
            "streams": "orbit i reads ChaCha8 stream i of the seed; start points use stream i of seed ^ 0x5eed0f5747",
        },
    })
}

fn document(cmd: Command, cfg: &RunConfig, result: Value) -> String {
    let doc = json!({ "header": header(cmd, cfg), "result": result });
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

fn error_document(cmd: Command, cfg: &RunConfig, e: &Error) -> Outcome {
    let status = Status::of_error(e);
    let result = json!({ "error": e.to_string(), "exit_code": status as i32 });
    Outcome { status, stdout: document(cmd, cfg, result) }
}

fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Runs one command, inside a thread pool of `cfg.threads` workers if set.
pub fn run(cmd: Command, cfg: &RunConfig) -> Outcome {
    let go = || match dispatch(cmd, cfg) {
        Ok(o) => o,
        Err(e) => error_document(cmd, cfg, &e),
    };
    match cfg.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(go),
            Err(e) => error_document(cmd, cfg, &Error::Parse(e.to_string())),
        },
        None => go(),
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.validate()?;
    match cmd {
        Command::Params => cmd_params(cfg, &p),
        Command::Simulate => cmd_simulate(cfg, &p),
        Command::Verify => cmd_verify(cfg, &p),
        Command::CriticalWord => cmd_critical_word(cfg, &p),
    }
}

pub fn cmd_params(cfg: &RunConfig, p: &Params) -> Result<Outcome> {
    let warnings: Vec<&str> = p.warnings().iter().map(|w| w.message()).collect();
    let result = json!({
        "params": p,
        "warnings": warnings,
        "epsilon_log2": p.epsilon_log2(),
        "burn_in": p.default_burn_in(),
    });
    let text = document(Command::Params, cfg, result);
    write_out(cfg, "params.json", &text)?;
    Ok(Outcome { status: Status::Success, stdout: text })
}

fn family(cfg: &RunConfig, p: &Params, delta: f64) -> Result<FiberFamily> {
    if delta > 0.0 {
        let pert = make_perturbation(p, delta, cfg.seed)?;
        Ok(FiberFamily::perturbed(*p, pert.spec))
    } else {
        Ok(FiberFamily::new(*p))
    }
}

fn tracked_regions(p: &Params) -> Vec<RegionId> {
    [RegionId::R, RegionId::W, RegionId::Wprime, RegionId::D, RegionId::P, RegionId::Qminus, RegionId::Kplus]
        .into_iter()
        .filter(|&r| RegionTest::new(p, r).is_ok())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct OrbitSummary {
    index: u64,
    x0: Vec<f64>,
    x_final: Vec<f64>,
    stats: VisitStats,
}

const CHUNK: usize = 1 << 16;

pub fn cmd_simulate(cfg: &RunConfig, p: &Params) -> Result<Outcome> {
    let fam = family(cfg, p, cfg.delta)?;
    let k = p.k;
    let regions = tracked_regions(p);
    let burn_in = cfg.burn_in(p);
    let file_base = match &cfg.base {
        BaseSource::File(path) => Some(read_base_file(k, path)?),
        _ => None,
    };

    let run_one = |i: u64| -> Result<OrbitSummary> {
        let x0 = start_point(&fam, cfg.seed, i);
        let mut orbit = Orbit::new(&fam, &x0, burn_in, &regions)?;
        let mut trace = match (i, cfg.trace_stride, &cfg.out) {
            (0, Some(s), Some(_)) => Some(TraceRecorder::new(s, Vec::new())),
            _ => None,
        };
        let mut feed = |letters: &[u32]| -> Result<()> {
            match trace.as_mut() {
                Some(t) => orbit.advance(letters, t),
                None => orbit.advance(letters, &mut ()),
            }
        };
        match &cfg.base {
            BaseSource::Random => {
                let mut src = BernoulliSource::new(cfg.seed, i, k);
                let mut buf = vec![0u32; CHUNK];
                let mut left = cfg.steps;
                while left > 0 {
                    let len = (left as usize).min(CHUNK);
                    src.fill(&mut buf[..len]);
                    feed(&buf[..len])?;
                    left -= len as u64;
                }
            }
            BaseSource::AllZero | BaseSource::AllOne => {
                let l = if cfg.base == BaseSource::AllZero { 0 } else { (1u32 << k) - 1 };
                let buf = vec![l; CHUNK];
                let mut left = cfg.steps;
                while left > 0 {
                    let len = (left as usize).min(CHUNK);
                    feed(&buf[..len])?;
                    left -= len as u64;
                }
            }
            BaseSource::Descent => {
                let hold = if k > 2 { p.default_burn_in() as usize } else { 0 };
                let db = directed_descent_base(&fam, &x0, cfg.seed.wrapping_add(i), cfg.steps as usize, 3, hold)?;
                feed(&db.base.letters)?;
            }
            BaseSource::File(_) => feed(&file_base.as_ref().expect("read above").letters)?,
        }
        if let (Some(t), Some(dir)) = (trace, &cfg.out) {
            if let Some(e) = t.error {
                return Err(e.into());
            }
            fs::create_dir_all(dir)?;
            fs::write(dir.join("trace.jsonl"), t.into_inner())?;
        }
        Ok(OrbitSummary { index: i, x0, x_final: orbit.x.clone(), stats: orbit.stats() })
    };

    let runs: Vec<Result<OrbitSummary>> = (0..cfg.orbits as u64).into_par_iter().map(run_one).collect();
    let runs: Vec<OrbitSummary> = runs.into_iter().collect::<Result<_>>()?;

    let mut totals = serde_json::Map::new();
    for r in &regions {
        let name = r.to_string();
        let hits: u64 = runs.iter().map(|o| o.stats.hits(*r)).sum();
        let counted: u64 = runs.iter().map(|o| o.stats.steps.saturating_sub(o.stats.burn_in)).sum();
        let freq = if counted > 0 { hits as f64 / counted as f64 } else { 0.0 };
        totals.insert(name, json!({ "hits": hits, "freq": freq }));
    }
    let steps: u64 = runs.iter().map(|o| o.stats.steps).sum();
    let summary = json!({
        "orbits": runs.len(),
        "steps": steps,
        "burn_in": burn_in,
        "base": cfg.base,
        "regions": totals,
        "x_final_orbit_0": runs.first().map(|o| o.x_final.clone()),
    });
    let stats = json!({ "summary": summary.clone(), "orbits": runs });
    write_out(cfg, "stats.json", &document(Command::Simulate, cfg, stats))?;
    Ok(Outcome { status: Status::Success, stdout: document(Command::Simulate, cfg, summary) })
}

fn read_base_file(k: usize, path: &Path) -> Result<BaseSequence> {
    let bytes = fs::read(path)?;
    let b = if bytes.starts_with(b"SKB1") { read_packed(bytes.as_slice())? } else { read_text(k, bytes.as_slice())? };
    if b.k != k {
        return Err(Error::Dimension { expected: k, got: b.k });
    }
    if b.is_empty() {
        return Err(Error::Parse(format!("{} holds no letters", path.display())));
    }
    Ok(b)
}

/// Certificates of one suite plus free-form details.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub pass: bool,
    pub certificates: Vec<Certificate>,
    pub details: Value,
}

impl SuiteResult {
    fn new(suite: Suite, certificates: Vec<Certificate>, details: Value) -> Self {
        SuiteResult { suite: suite.name(), pass: all_pass(&certificates), certificates, details }
    }
}

fn failed(claim: impl Into<String>, e: &Error) -> Certificate {
    Certificate::new(format!("{}: {e}", claim.into()), false, f64::NEG_INFINITY)
}

pub fn cmd_verify(cfg: &RunConfig, p: &Params) -> Result<Outcome> {
    let suites: Vec<Suite> = match cfg.suite {
        Suite::All => vec![Suite::Norms, Suite::Strips, Suite::ZeroRun, Suite::Words, Suite::Perturbed],
        s => vec![s],
    };
    let mut results = Vec::new();
    for s in suites {
        results.push(match s {
            Suite::Norms => suite_norms(cfg, p)?,
            Suite::Strips => suite_strips(cfg, p)?,
            Suite::ZeroRun => suite_zero_run(cfg, p)?,
            Suite::Words => suite_words(cfg, p)?,
            Suite::Perturbed => suite_perturbed(cfg, p)?,
            Suite::All => unreachable!(),
        });
    }
    let pass = results.iter().all(|r| r.pass);
    let failures: Vec<&str> = results.iter().flat_map(|r| r.certificates.iter().filter(|c| !c.pass).map(|c| c.claim.as_str())).collect();
    let count: usize = results.iter().map(|r| r.certificates.len()).sum();
    let result = json!({
        "pass": pass,
        "certificates": count,
        "failures": failures,
        "suites": results,
        "note": "instances and mechanisms are checked numerically; nothing here proves the theorem",
    });
    let text = document(Command::Verify, cfg, result);
    write_out(cfg, &format!("verify_{}.json", cfg.suite.name()), &text)?;
    let status = if pass { Status::Success } else { Status::CertificateFailure };
    Ok(Outcome { status, stdout: text })
}

fn suite_norms(cfg: &RunConfig, p: &Params) -> Result<SuiteResult> {
    let fam = FiberFamily::new(*p);
    let mut certs = norm_certificates(&fam, cfg.norm_grid);
    certs.extend(scalar_certificates(&fam, 10_000));
    Ok(SuiteResult::new(Suite::Norms, certs, json!({ "grid": cfg.norm_grid })))
}

fn suite_strips(cfg: &RunConfig, p: &Params) -> Result<SuiteResult> {
    let certs = match family(cfg, p, cfg.delta) {
        Ok(fam) => check_strip_dynamics(&fam),
        Err(e) => vec![failed(format!("perturbation of size {} keeps Q+ invariant", cfg.delta), &e)],
    };
    Ok(SuiteResult::new(Suite::Strips, certs, json!({ "delta": cfg.delta })))
}

fn zero_run_certificates(fam: &FiberFamily, cfg: &RunConfig) -> Result<(Vec<Certificate>, ZeroRunReport, Value)> {
    let p = &fam.params;
    let lc = LemmaCheckConfig { orbits: cfg.orbits, steps: cfg.steps, seed: cfg.seed };
    let rep = check_zero_run_lemma(fam, &lc)?;
    let v = rep.violations();
    let mut certs = vec![
        Certificate::new("no implication violations on random orbits", v == 0, -(v as f64)).with_values([("violations", v as f64)]),
        Certificate::new("no R visits after burn-in on random orbits", rep.random_r_visits == 0, -(rep.random_r_visits as f64)),
        Certificate::new("random orbits stay in Q+", rep.escapes == 0, -(rep.escapes as f64)),
    ];
    let horizon = p.default_burn_in() as usize;
    let (count, hold) = if p.k == 2 { (10, 0) } else { (3, horizon) };
    let len = (hold + 8 * horizon).max(8_000) * 3;
    let crafted: Vec<Result<_>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let x0 = start_point(fam, cfg.seed, 1_000_000 + i);
            let db = directed_descent_base(fam, &x0, cfg.seed.wrapping_add(i), len, 3, hold)?;
            run_crafted(fam, &db.base, &db.x0, &format!("crafted {i}"))
        })
        .collect();
    let mut runs = Vec::new();
    for c in crafted {
        let c = c?;
        let v = c.violations();
        certs.push(Certificate::new(format!("{}: visits R", c.label), c.r_visits > 0, c.r_visits as f64));
        certs.push(Certificate::new(format!("{}: implication holds at every visit", c.label), v == 0, -(v as f64)));
        runs.push(c);
    }
    let details = json!({ "random": rep, "crafted": runs });
    Ok((certs, rep, details))
}

fn suite_zero_run(cfg: &RunConfig, p: &Params) -> Result<SuiteResult> {
    let fam = family(cfg, p, cfg.delta)?;
    let (certs, _, details) = zero_run_certificates(&fam, cfg)?;
    Ok(SuiteResult::new(Suite::ZeroRun, certs, details))
}

/// Uniform targets in Q-, from the configured seed.
pub fn random_targets(p: &Params, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let qm = region_box(p, RegionId::Qminus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| (0..p.k).map(|i| rng.gen_range(qm.lo[i]..=qm.hi[i])).collect()).collect())
}

fn suite_words(cfg: &RunConfig, p: &Params) -> Result<SuiteResult> {
    if p.k != 2 {
        return Err(Error::WordDimension(p.k));
    }
    let fam = FiberFamily::new(*p);
    let mut certs = Vec::new();
    let dd = match build_upper_ifs(p) {
        Ok(dd) => dd,
        Err(e) => {
            certs.push(failed("upper IFS robust coverage", &e));
            return Ok(SuiteResult::new(Suite::Words, certs, Value::Null));
        }
    };
    certs.extend(check_ifs_assumptions(p, &dd));

    let kplus = region_box(p, RegionId::Kplus)?;
    match entry_word(&fam) {
        Ok(e) => certs.push(Certificate::from_margin("entry word maps Q+ into K+", kplus.inclusion_margin(&e.image)).with_values([("length", e.word.len() as f64)])),
        Err(e) => certs.push(failed("entry word maps Q+ into K+", &e)),
    }

    let targets = random_targets(p, cfg.seed, cfg.targets)?;
    let words: Vec<(Vec<f64>, Result<_>)> = targets.into_par_iter().map(|x| {
        let w = critical_word_for(&fam, &dd, &x, cfg.radius);
        (x, w)
    }).collect();
    let mut lengths = Vec::new();
    for (x, w) in words {
        match w {
            Ok(cw) => {
                lengths.push(cw.word.len());
                certs.push(cw.certificate);
            }
            Err(e) => certs.push(failed(format!("critical word for {x:?}"), &e)),
        }
    }
    lengths.sort_unstable();
    let median = lengths.get(lengths.len() / 2).copied();

    let setup = NegutSetup::entry(&fam)?;
    let neg = negut_frequency_experiment(&fam, &setup, cfg.steps as usize, cfg.seed)?;
    certs.push(Certificate::from_margin("word occurrence frequency within 3 sigma of 4^-m", 3.0 - neg.z_score.abs()).with_values([
        ("frequency", neg.frequency),
        ("expected", neg.expected_frequency),
        ("z", neg.z_score),
    ]));
    certs.push(Certificate::new("every occurrence after entry is followed by a visit", neg.exceptions == 0, -(neg.exceptions as f64)));
    let details = json!({ "radius": cfg.radius, "median_word_length": median, "word_lengths": lengths, "negut": neg });
    Ok(SuiteResult::new(Suite::Words, certs, details))
}

/// `r/2` unless a positive delta is configured.
pub fn perturbed_delta(cfg: &RunConfig, p: &Params) -> f64 {
    if cfg.delta > 0.0 {
        cfg.delta
    } else {
        p.r / 2.0
    }
}

fn suite_perturbed(cfg: &RunConfig, p: &Params) -> Result<SuiteResult> {
    let delta = perturbed_delta(cfg, p);
    let fam = match family(cfg, p, delta) {
        Ok(f) => f,
        Err(e) => return Ok(SuiteResult::new(Suite::Perturbed, vec![failed(format!("perturbation of size {delta} keeps Q+ invariant"), &e)], Value::Null)),
    };
    let mut certs = measure_distance(&fam, cfg.grid);
    certs.extend(global_inclusions(&fam));
    certs.extend(sampled_block_certificates(&fam, BLOCK_SAMPLES));
    certs.extend(backward_block_certificates(&fam, BLOCK_SAMPLES));
    if p.k == 2 {
        certs.extend(check_directional_movement(&fam)?);
        let kplus = region_box(p, RegionId::Kplus)?;
        match entry_word(&fam) {
            Ok(e) => certs.push(Certificate::from_margin("perturbed entry word maps Q+ into K+", kplus.inclusion_margin(&e.image))),
            Err(e) => certs.push(failed("perturbed entry word maps Q+ into K+", &e)),
        }
    }
    let (zr, _, zr_details) = zero_run_certificates(&fam, cfg)?;
    certs.extend(zr);
    certs.push(check_discrepancy_bound(&fam, &DiscrepancyConfig { trials: cfg.trials, max_len: 1000, seed: cfg.seed }));
    Ok(SuiteResult::new(Suite::Perturbed, certs, json!({ "delta": delta, "zero_run": zr_details })))
}

pub fn cmd_critical_word(cfg: &RunConfig, p: &Params) -> Result<Outcome> {
    let x = cfg.x.clone().ok_or_else(|| Error::Parse("critical-word needs a target point".into()))?;
    let fam = FiberFamily::new(*p);
    if !region_box(p, RegionId::Qminus)?.contains(&x) {
        return Err(Error::TargetOutsideQminus(x));
    }
    let dd = build_upper_ifs(p)?;
    let cw = critical_word_for(&fam, &dd, &x, cfg.radius)?;
    let text = cw.word.to_text();
    write_out(cfg, "critical_word.txt", &text)?;
    let result = json!({
        "target": x,
        "radius": cfg.radius,
        "method": cw.method,
        "length": cw.word.len(),
        "entry_len": cw.entry_len,
        "greedy_len": cw.greedy_len,
        "tail_len": cw.tail_len,
        "certificate": cw.certificate,
    });
    let status = if cw.certificate.pass { Status::Success } else { Status::CertificateFailure };
    let doc = document(Command::CriticalWord, cfg, result);
    write_out(cfg, "critical_word.json", &doc)?;
    Ok(Outcome { status, stdout: doc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(Status::of_error(&Error::InvalidN(10)), Status::BadArguments);
        assert_eq!(Status::of_error(&Error::TargetOutsideQminus(vec![2.0, 0.5])), Status::BadArguments);
        assert_eq!(Status::of_error(&Error::Escape { time: 3, point: vec![] }), Status::Anomaly);
        assert_eq!(Status::of_error(&Error::Io(std::io::Error::other("x"))), Status::Io);
        assert_eq!(Status::of_error(&Error::CoverageFails { margin: -1.0 }), Status::CertificateFailure);
        assert_eq!(Status::BadArguments as u8, 2);
    }

    #[test]
    fn base_source_parses_and_prints() {
        for s in ["random", "all-zero", "all-one", "descent", "some/file.txt"] {
            let b: BaseSource = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
        }
        assert_eq!("x.skb".parse::<BaseSource>().unwrap(), BaseSource::File("x.skb".into()));
        assert!("".parse::<BaseSource>().is_err());
    }

    #[test]
    fn config_json_roundtrip_and_unknown_keys() {
        let cfg = RunConfig { n: 40, base: BaseSource::Descent, suite: Suite::ZeroRun, x: Some(vec![0.5, 0.4]), out: Some("o".into()), ..RunConfig::default() };
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(!s.contains("\"out\"") && !s.contains("threads"));
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, RunConfig { out: None, ..cfg });
        let partial: RunConfig = serde_json::from_str(r#"{"k": 3}"#).unwrap();
        assert_eq!(partial, RunConfig { k: 3, ..RunConfig::default() });
        assert!(serde_json::from_str::<RunConfig>(r#"{"nn": 3}"#).is_err());
    }

    #[test]
    fn validate_rejects_bad_values() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { steps: 0, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { delta: -1.0, ..RunConfig::default() }.validate().is_err());
        assert!(matches!(RunConfig { n: 9, ..RunConfig::default() }.validate(), Err(Error::InvalidN(9))));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = RunConfig { steps: 20_000, orbits: 5, ..RunConfig::default() };
        let a = run(Command::Simulate, &RunConfig { threads: Some(1), ..cfg.clone() });
        let b = run(Command::Simulate, &RunConfig { threads: Some(4), ..cfg });
        assert_eq!(a, b);
    }
}
