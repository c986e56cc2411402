use serde::Serialize;

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// The state reached the edge of the admissible momentum interval; the
    /// last stored sample is the last valid state.
    BoundaryReached,
}

/// Sampled solution with a per-sample log of conserved quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub invariant_names: Vec<&'static str>,
    /// One row per sample, columns in `invariant_names` order.
    pub invariants: Vec<Vec<f64>>,
    pub status: Termination,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn invariant_column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.invariant_names.iter().position(|&n| n == name)?;
        Some(self.invariants.iter().map(|row| row[k]).collect())
    }
}

/// Drift statistics of one logged invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantDrift {
    pub name: &'static str,
    pub initial: f64,
    pub max_abs_drift: f64,
    /// `max_abs_drift / |initial|`, or the absolute drift when `initial` is 0.
    pub max_rel_drift: f64,
    /// `value(t) − initial` at each sample.
    pub drift: Vec<f64>,
}

impl InvariantDrift {
    /// Largest `|drift|` over samples with `t <= t_max`.
    pub fn max_abs_drift_until(&self, times: &[f64], t_max: f64) -> f64 {
        self.drift
            .iter()
            .zip(times)
            .take_while(|(_, &t)| t <= t_max)
            .fold(0.0, |acc, (d, _)| acc.max(d.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub invariants: Vec<InvariantDrift>,
}

impl ConservationReport {
    pub fn get(&self, name: &str) -> Option<&InvariantDrift> {
        self.invariants.iter().find(|d| d.name == name)
    }
}

/// Drift of every logged invariant relative to its first sample.
///
/// # Panics
/// On an empty trajectory.
pub fn conservation_report<S>(traj: &Trajectory<S>) -> ConservationReport {
    assert!(!traj.is_empty(), "conservation report of an empty trajectory");
    let invariants = traj
        .invariant_names
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let initial = traj.invariants[0][k];
            let drift: Vec<f64> = traj.invariants.iter().map(|row| row[k] - initial).collect();
            let max_abs_drift = drift.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
            let max_rel_drift = if initial == 0.0 {
                max_abs_drift
            } else {
                max_abs_drift / initial.abs()
            };
            InvariantDrift {
                name,
                initial,
                max_abs_drift,
                max_rel_drift,
                drift,
            }
        })
        .collect();
    ConservationReport {
        times: traj.times.clone(),
        invariants,
    }
}
