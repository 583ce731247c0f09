use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netcoh::coherence::{Bipartition, ProductBasis};
use netcoh::{Basis, Complex64, Matrix};

#[derive(Parser, Debug)]
#[command(name = "netcoh", version, about = "Global coherence, correlation classes and two-server trace estimation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, value_parser = parse_seed, default_value = "0xC0FFEE")]
    pub seed: u64,
    /// Directory for report files and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Zero threshold for verification checks and product detection.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Global, local and net relative entropy of coherence of a state file.
    Coherence {
        state: PathBuf,
        /// `z`, `x` or `y` per subsystem (one letter applies to all), or a basis JSON file.
        #[arg(long, default_value = "z")]
        basis: String,
        /// Subsystem groups such as `0|1` or `0,1|2`; defaults to the first subsystem against the rest.
        #[arg(long)]
        cut: Option<String>,
    },
    /// Correlation predicates of a bipartite state file.
    Classify {
        state: PathBuf,
        #[arg(long, default_value = "z")]
        basis: String,
    },
    /// Runs the two-server protocol from a run descriptor.
    Ndqc2 { descriptor: PathBuf },
    /// Runs a verification suite: thm4, thm5, thm6, lemma1, isomorphism, se-scaling, privacy or all.
    Verify {
        suite: String,
        /// Main ensemble size; side ensembles scale with it.
        #[arg(long)]
        ensemble: Option<usize>,
    },
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn local_basis(letter: char, dim: usize) -> Result<Matrix, String> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match letter {
        'z' => Ok(Matrix::identity(dim)),
        // Fourier basis; the Hadamard basis for a qubit
        'x' => {
            let s = 1.0 / (dim as f64).sqrt();
            Ok(Matrix::from_fn(dim, |j, k| {
                Complex64::from_polar(s, std::f64::consts::TAU * (j * k) as f64 / dim as f64)
            }))
        }
        'y' if dim == 2 => Matrix::from_rows(&[
            vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            vec![Complex64::new(0.0, h), Complex64::new(0.0, -h)],
        ])
        .map_err(|e| e.to_string()),
        'y' => Err(format!("basis y needs a qubit, subsystem has dimension {dim}")),
        c => Err(format!("unknown basis letter {c:?}; expected z, x or y")),
    }
}

/// Basis from letters or a JSON file; `dims` are the state's subsystem dims.
pub fn parse_basis(spec: &str, dims: &[usize]) -> Result<Basis, String> {
    let letters: Vec<char> = spec.chars().collect();
    if !letters.is_empty() && letters.iter().all(|c| "zxy".contains(*c)) {
        let pick = |k: usize| if letters.len() == 1 { letters[0] } else { letters[k] };
        if letters.len() != 1 && letters.len() != dims.len() {
            return Err(format!("basis {spec:?} has {} letters for {} subsystems", letters.len(), dims.len()));
        }
        let local = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| local_basis(pick(k), d))
            .collect::<Result<Vec<_>, _>>()?;
        return ProductBasis::new(local).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(spec).map_err(|e| format!("cannot read basis file {spec:?}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid basis file {spec:?}: {e}"))
}

pub fn parse_cut(spec: Option<&str>, count: usize) -> Result<Bipartition, String> {
    let Some(spec) = spec else {
        if count < 2 {
            return Err(format!("net coherence needs at least two subsystems, state has {count}"));
        }
        return Ok(Bipartition::split_at(1, count));
    };
    let (a, b) = spec.split_once('|').ok_or_else(|| format!("cut {spec:?} must look like 0|1"))?;
    let group = |g: &str| -> Result<Vec<usize>, String> {
        g.split(',')
            .map(|x| x.trim().parse().map_err(|_| format!("bad subsystem index {x:?} in cut {spec:?}")))
            .collect()
    };
    let cut = Bipartition::new(group(a)?, group(b)?);
    cut.validate(count).map_err(|e| e.to_string())?;
    Ok(cut)
}
