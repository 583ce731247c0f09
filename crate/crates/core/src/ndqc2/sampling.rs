use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    control_coherence, control_output_state, normalized_trace, predicted_bp, predicted_se, EstimateReport, Ndqc2Error,
    Task,
};
use crate::linalg::pauli;
use crate::random::stream_rng;
use crate::{Complex64, Matrix, State};

/// Batches used for the empirical standard error.
pub const BATCHES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X,
    Y,
}

impl Observable {
    pub fn matrix(self) -> Matrix {
        match self {
            Observable::X => pauli::x(),
            Observable::Y => pauli::y(),
        }
    }
}

/// Observables measured on the two control qubits in one block of shots;
/// `None` means that server sits the block out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Setting {
    pub a: Option<Observable>,
    pub b: Option<Observable>,
}

impl Setting {
    const fn new(a: Option<Observable>, b: Option<Observable>) -> Self {
        Self { a, b }
    }

    /// Measurement schedule for a task, in allocation order.
    pub fn schedule(task: Task) -> [Setting; 4] {
        use Observable::{X, Y};
        match task {
            Task::Product => [
                Setting::new(Some(X), None),
                Setting::new(Some(Y), None),
                Setting::new(None, Some(X)),
                Setting::new(None, Some(Y)),
            ],
            Task::Correlated => [
                Setting::new(Some(X), Some(X)),
                Setting::new(Some(Y), Some(Y)),
                Setting::new(Some(X), Some(Y)),
                Setting::new(Some(Y), Some(X)),
            ],
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |o: Option<Observable>| match o {
            Some(Observable::X) => 'x',
            Some(Observable::Y) => 'y',
            None => '-',
        };
        write!(f, "{}{}", c(self.a), c(self.b))
    }
}

/// Equal split of `shots` over the four settings, remainder to the first ones.
pub(crate) fn allocate(shots: u64) -> [u64; 4] {
    let base = shots / 4;
    let rem = shots % 4;
    std::array::from_fn(|k| base + u64::from((k as u64) < rem))
}

/// Shot range `[lo, hi)` of batch `b` among `n` shots.
pub(crate) fn batch_range(n: u64, batches: usize, b: usize) -> (u64, u64) {
    let lo = n * b as u64 / batches as u64;
    let hi = n * (b as u64 + 1) / batches as u64;
    (lo, hi)
}

/// Mean of the recorded product of ±1 outcomes per setting, the per-setting
/// value being `⟨P⟩`, `⟨Q⟩` or `⟨P ⊗ Q⟩`.
pub(crate) fn combine(task: Task, means: &[f64; 4]) -> Complex64 {
    match task {
        Task::Product => Complex64::new(means[0], means[1]) * Complex64::new(means[2], means[3]),
        Task::Correlated => Complex64::new(means[0] - means[1], means[2] + means[3]),
    }
}

/// Estimate from per-setting sums and counts, plus the batch scatter. A batch
/// counts only when every setting has shots in it.
pub(crate) fn estimate(task: Task, sums: &[[i64; BATCHES]; 4], counts: &[[u64; BATCHES]; 4]) -> (Complex64, Option<f64>) {
    let mean_of = |k: usize| -> f64 {
        let n: u64 = counts[k].iter().sum();
        if n == 0 {
            0.0
        } else {
            sums[k].iter().sum::<i64>() as f64 / n as f64
        }
    };
    let overall = combine(task, &std::array::from_fn(mean_of));
    let per_batch: Vec<Complex64> = (0..BATCHES)
        .filter(|&b| (0..4).all(|k| counts[k][b] > 0))
        .map(|b| combine(task, &std::array::from_fn(|k| sums[k][b] as f64 / counts[k][b] as f64)))
        .collect();
    let nb = per_batch.len();
    if nb < 2 {
        return (overall, None);
    }
    let centre = per_batch.iter().sum::<Complex64>() / nb as f64;
    let ss: f64 = per_batch.iter().map(|e| (e - centre).norm_sqr()).sum();
    (overall, Some((ss / (nb * (nb - 1)) as f64).sqrt()))
}

/// Joint outcome distribution `p(a, b)` for `a, b ∈ {+1, −1}` (index 0 is
/// `+1`). A server that sits out contributes a deterministic `+1`.
fn outcome_distribution(state: &State, setting: Setting) -> [f64; 4] {
    let eye = Matrix::identity(2);
    let op = |o: Option<Observable>| o.map_or_else(|| eye.clone(), Observable::matrix);
    let pa = op(setting.a);
    let pb = op(setting.b);
    let ea = state.expectation(&pa.kron(&eye)).re;
    let eb = state.expectation(&eye.kron(&pb)).re;
    let eab = state.expectation(&pa.kron(&pb)).re;
    let p = |a: f64, b: f64| ((1.0 + a * ea + b * eb + a * b * eab) / 4.0).max(0.0);
    [p(1.0, 1.0), p(1.0, -1.0), p(-1.0, 1.0), p(-1.0, -1.0)]
}

/// Value recorded for one shot: the setting's observable is the product of
/// the participating outcomes.
fn shot_value(k: usize) -> (i64, i64) {
    match k {
        0 => (1, 1),
        1 => (1, -1),
        2 => (-1, 1),
        _ => (-1, -1),
    }
}

#[derive(Clone, Debug)]
pub struct SampleOptions {
    /// Minimum total shot count.
    pub min_shots: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { min_shots: 4 }
    }
}

/// Born-rule sampling of the joint control state.
pub fn sample_run(task: Task, u_a: &Matrix, u_b: &Matrix, shots: u64, seed: u64) -> Result<EstimateReport, Ndqc2Error> {
    sample_run_with(task, u_a, u_b, shots, seed, &SampleOptions::default())
}

pub fn sample_run_with(
    task: Task,
    u_a: &Matrix,
    u_b: &Matrix,
    shots: u64,
    seed: u64,
    opts: &SampleOptions,
) -> Result<EstimateReport, Ndqc2Error> {
    if shots < opts.min_shots {
        return Err(Ndqc2Error::TooFewShots {
            min: opts.min_shots,
            got: shots,
        });
    }
    let output = control_output_state(task, u_a, u_b)?;
    let schedule = Setting::schedule(task);
    let alloc = allocate(shots);

    // one substream per (setting, batch); results are gathered in index order
    let jobs: Vec<(usize, usize)> = (0..4).flat_map(|k| (0..BATCHES).map(move |b| (k, b))).collect();
    let dists: Vec<[f64; 4]> = schedule.iter().map(|&s| outcome_distribution(&output.state, s)).collect();
    let drawn: Vec<(i64, u64)> = jobs
        .par_iter()
        .map(|&(k, b)| {
            let (lo, hi) = batch_range(alloc[k], BATCHES, b);
            let mut rng = stream_rng(seed, (k * BATCHES + b) as u64);
            let setting = schedule[k];
            let p = &dists[k];
            let mut sum = 0i64;
            for _ in lo..hi {
                let u: f64 = rng.gen();
                let idx = if u < p[0] {
                    0
                } else if u < p[0] + p[1] {
                    1
                } else if u < p[0] + p[1] + p[2] {
                    2
                } else {
                    3
                };
                let (a, bb) = shot_value(idx);
                sum += match (setting.a, setting.b) {
                    (Some(_), Some(_)) => a * bb,
                    (Some(_), None) => a,
                    (None, _) => bb,
                };
            }
            (sum, hi - lo)
        })
        .collect();
    let mut sums = [[0i64; BATCHES]; 4];
    let mut counts = [[0u64; BATCHES]; 4];
    for (&(k, b), &(s, n)) in jobs.iter().zip(&drawn) {
        sums[k][b] = s;
        counts[k][b] = n;
    }
    let (iota_est, se_empirical) = estimate(task, &sums, &counts);
    report(task, u_a, u_b, shots, seed, iota_est, se_empirical, output.density_path, &alloc)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn report(
    task: Task,
    u_a: &Matrix,
    u_b: &Matrix,
    shots: u64,
    seed: u64,
    iota_est: Complex64,
    se_empirical: Option<f64>,
    density_path: bool,
    alloc: &[u64; 4],
) -> Result<EstimateReport, Ndqc2Error> {
    let iota_a = normalized_trace(u_a)?;
    let iota_b = normalized_trace(u_b)?;
    let (rec_control, rec_net) = control_coherence(task)?;
    Ok(EstimateReport {
        task,
        shots,
        iota_exact: iota_a * iota_b,
        iota_est,
        iota_a,
        iota_b,
        se_predicted: predicted_se(iota_a, iota_b, shots, rec_control)?,
        se_empirical,
        rec_control,
        rec_net,
        bp_predicted: predicted_bp(rec_control)?,
        seed,
        density_path,
        settings: Setting::schedule(task).into_iter().zip(alloc.iter().copied()).collect(),
    })
}
