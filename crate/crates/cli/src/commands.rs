use std::path::{Path, PathBuf};

use netcoh::classify::{classify_with, ClassifyError, ClassifyOptions};
use netcoh::coherence::{net_global_coherence, CoherenceError};
use netcoh::linalg::StateFile;
use netcoh::ndqc2::{
    privacy_audit, run_protocol_with, Injection, Ndqc2Error, ProtocolError, ProtocolOptions, Task, UnitarySpec,
};
use netcoh::suites::{run_suite, Suite, SuiteError, SuiteOptions};
use netcoh::State;
use serde::{Deserialize, Serialize};

use crate::args::{parse_basis, parse_cut, Common, Format};
use crate::output::{to_csv_row, to_csv_rows, to_json, Failure, Outputs};

/// Result of a command: text for stdout, files for `--out`, the inputs read
/// and the seed actually used.
pub struct Run {
    pub stdout: String,
    pub outputs: Outputs,
    pub inputs: Vec<(PathBuf, Vec<u8>)>,
    pub seed: u64,
    /// Directory used when `--out` is absent; `None` writes nothing.
    pub default_dir: Option<PathBuf>,
    pub failure: Option<Failure>,
}

impl Run {
    fn new(seed: u64) -> Self {
        Self {
            stdout: String::new(),
            outputs: Outputs::default(),
            inputs: Vec::new(),
            seed,
            default_dir: None,
            failure: None,
        }
    }
}

fn read_input(path: &Path, run: &mut Run) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    run.inputs.push((path.to_path_buf(), bytes));
    Ok(text)
}

fn load_state(path: &Path, run: &mut Run) -> Result<State, Failure> {
    let text = read_input(path, run)?;
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed state file {}: {e}", path.display())))?;
    file.into_state().map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn coherence_failure(e: CoherenceError) -> Failure {
    match e {
        CoherenceError::BasisMismatch { .. } | CoherenceError::InvalidCut { .. } | CoherenceError::NotBipartite(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Invalid(other.to_string()),
    }
}

fn render<T: Serialize>(value: &T, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => to_csv_row(value),
    }
}

pub fn coherence(common: &Common, state: &Path, basis: &str, cut: Option<&str>) -> Result<Run, Failure> {
    let mut run = Run::new(common.seed);
    let rho = load_state(state, &mut run)?;
    let basis = parse_basis(basis, rho.dims()).map_err(Failure::Usage)?;
    let cut = parse_cut(cut, rho.subsystem_count()).map_err(Failure::Usage)?;
    let report = net_global_coherence(&rho, &basis, &cut).map_err(coherence_failure)?;
    run.stdout = render(&report, common.format)?;
    run.outputs.add("coherence.json", to_json(&report)?);
    Ok(run)
}

pub fn classify(common: &Common, state: &Path, basis: &str) -> Result<Run, Failure> {
    let mut run = Run::new(common.seed);
    let rho = load_state(state, &mut run)?;
    let basis = parse_basis(basis, rho.dims()).map_err(Failure::Usage)?;
    let mut opts = ClassifyOptions::default();
    opts.discord.seed = common.seed;
    if let Some(t) = common.tolerance {
        opts.product_tol = t;
    }
    let verdict = classify_with(&rho, &basis, &opts).map_err(|e| match e {
        ClassifyError::Coherence(c) => coherence_failure(c),
        other => Failure::Usage(other.to_string()),
    })?;
    run.stdout = render(&verdict, common.format)?;
    run.outputs.add("classify.json", to_json(&verdict)?);
    Ok(run)
}

/// Run descriptor for `netcoh ndqc2`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub task: Task,
    pub shots: u64,
    /// Overrides `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    pub unitary_a: UnitarySpec,
    pub unitary_b: UnitarySpec,
    /// Deliberate rule break, for exercising the harness.
    #[serde(default)]
    pub injection: Option<Injection>,
}

fn ndqc2_failure(e: Ndqc2Error) -> Failure {
    match e {
        Ndqc2Error::TooFewShots { .. } | Ndqc2Error::UnknownTask(_) => Failure::Usage(e.to_string()),
        other => Failure::Invalid(other.to_string()),
    }
}

fn complex(z: netcoh::Complex64) -> String {
    format!("{:.6} {} {:.6}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

pub fn ndqc2(common: &Common, descriptor: &Path) -> Result<Run, Failure> {
    let mut run = Run::new(common.seed);
    let text = read_input(descriptor, &mut run)?;
    let d: Descriptor =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed descriptor {}: {e}", descriptor.display())))?;
    let seed = d.seed.unwrap_or(common.seed);
    run.seed = seed;
    run.default_dir = Some(PathBuf::from("."));
    let opts = ProtocolOptions {
        injection: d.injection,
        ..ProtocolOptions::default()
    };
    let result = run_protocol_with(d.task, (d.unitary_a, d.unitary_b), d.shots, seed, &opts).map_err(|e| match e {
        ProtocolError::Violation { .. } => Failure::Violation(e.to_string()),
        ProtocolError::Ndqc2(inner) => ndqc2_failure(inner),
    })?;
    let r = &result.report;
    let audit = privacy_audit(std::slice::from_ref(&result));
    let se = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    run.outputs.add("report.json", to_json(r)?);
    run.outputs.add("transcript.json", to_json(&result.transcript)?);
    if common.format == Format::Csv {
        run.outputs.add("report.csv", to_csv_row(r)?);
    }
    run.stdout = format!(
        "task {} with {} shots, seed {seed}\n\
         iota exact     {}\n\
         iota estimate  {}\n\
         se predicted   {:.6}\n\
         se empirical   {}\n\
         marginals      {}\n",
        r.task,
        r.shots,
        complex(r.iota_exact),
        complex(r.iota_est),
        r.se_predicted,
        se(r.se_empirical),
        if audit.is_private() { "private" } else { "leak detected" },
    );
    Ok(run)
}

#[derive(Serialize)]
struct SuiteSummary {
    suite: Suite,
    seed: u64,
    passed: usize,
    failed: usize,
    ok: bool,
}

#[derive(Serialize)]
struct VerifySummary {
    ok: bool,
    suites: Vec<SuiteSummary>,
}

pub fn verify(common: &Common, suite: &str, ensemble: Option<usize>) -> Result<Run, Failure> {
    let mut run = Run::new(common.seed);
    let suites = Suite::parse_selection(suite).map_err(|e| Failure::Usage(e.to_string()))?;
    let opts = SuiteOptions {
        seed: common.seed,
        ensemble,
        tolerance: common.tolerance.unwrap_or(SuiteOptions::default().tolerance),
    };
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for s in suites {
        let report = run_suite(s, &opts).map_err(|e: SuiteError| Failure::Verify(format!("{s}: {e}")))?;
        eprintln!("{s}: {} passed, {} failed", report.passed, report.failed);
        summaries.push(SuiteSummary {
            suite: s,
            seed: report.seed,
            passed: report.passed,
            failed: report.failed,
            ok: report.ok(),
        });
        rows.extend(report.rows);
    }
    let summary = VerifySummary {
        ok: summaries.iter().all(|s| s.ok),
        suites: summaries,
    };
    let csv = to_csv_rows(&rows)?;
    run.stdout = match common.format {
        Format::Json => to_json(&summary)?,
        Format::Csv => csv.clone(),
    };
    run.outputs.add("verify.json", to_json(&summary)?);
    run.outputs.add("verify.csv", csv);
    if !summary.ok {
        let failed: Vec<String> = summary.suites.iter().filter(|s| !s.ok).map(|s| s.suite.to_string()).collect();
        run.failure = Some(Failure::Verify(format!("failing suites: {}", failed.join(", "))));
    }
    Ok(run)
}
