use serde::{Deserialize, Serialize};

use super::protocol::{Party, ProtocolRun};
use super::sampling::Observable;

/// One server's running estimate of a local observable on its control qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalEstimate {
    pub party: Party,
    pub observable: Observable,
    pub shots: u64,
    #[serde(with = "crate::json::sig12")]
    pub mean: f64,
    #[serde(with = "crate::json::sig12")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AuditVerdict {
    /// Every marginal is compatible with zero.
    Private { marginals: Vec<MarginalEstimate> },
    /// At least one marginal is resolvably non-zero; `leaks` lists those.
    Leaks {
        leaks: Vec<MarginalEstimate>,
        marginals: Vec<MarginalEstimate>,
    },
    InsufficientData,
}

impl AuditVerdict {
    pub fn is_private(&self) -> bool {
        matches!(self, AuditVerdict::Private { .. })
    }
}

/// Default threshold: `4/√(M/4)` with `M/4` the shots of one setting.
fn default_threshold(total_shots: u64) -> f64 {
    4.0 / (total_shots as f64 / 4.0).sqrt()
}

/// Checks what each server alone can learn: the mean of its own outcomes per
/// observable, pooled over `runs`. `threshold` maps the runs' total shot
/// count to the largest deviation from zero that counts as noise.
pub fn privacy_audit_with(runs: &[ProtocolRun], threshold: impl Fn(u64) -> f64) -> AuditVerdict {
    let total: u64 = runs.iter().map(|r| r.report.shots).sum();
    if total == 0 {
        return AuditVerdict::InsufficientData;
    }
    let limit = threshold(total);
    let mut marginals = Vec::new();
    for party in [Party::Alice, Party::Bob] {
        for observable in [Observable::X, Observable::Y] {
            let (sum, n) = runs
                .iter()
                .flat_map(|r| &r.records)
                .filter(|rec| rec.party == party && rec.observable == observable)
                .fold((0i64, 0u64), |(s, n), rec| {
                    (
                        s + rec.outcomes.iter().map(|&o| i64::from(o)).sum::<i64>(),
                        n + rec.outcomes.len() as u64,
                    )
                });
            if n == 0 {
                continue;
            }
            marginals.push(MarginalEstimate {
                party,
                observable,
                shots: n,
                mean: sum as f64 / n as f64,
                threshold: limit,
            });
        }
    }
    if marginals.is_empty() {
        return AuditVerdict::InsufficientData;
    }
    let leaks: Vec<MarginalEstimate> = marginals.iter().filter(|m| m.mean.abs() > m.threshold).cloned().collect();
    if leaks.is_empty() {
        AuditVerdict::Private { marginals }
    } else {
        AuditVerdict::Leaks { leaks, marginals }
    }
}

pub fn privacy_audit(runs: &[ProtocolRun]) -> AuditVerdict {
    privacy_audit_with(runs, default_threshold)
}
