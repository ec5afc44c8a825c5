//! Seeded Monte Carlo estimators over the ensembles.
//!
//! Every sample is addressed by its index, so results are computed in
//! parallel into pre-assigned slots and reduced sequentially; the report is
//! bit-identical for any worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{rescaled_field, ChartKind, ChartPoint};
use crate::ensembles::{sample, EnsembleSpec, PolynomialSample};
use crate::error::{Error, Result};
use crate::field::AmbientField;
use crate::topology::{circle_zeros, critical_points, nodal_level, resolve_nodal_topology};
use crate::umbilics::{find_umbilics, MultiplicityPattern, UmbilicChart};

/// Largest tolerated fraction of excluded samples.
pub const MAX_EXCLUSION_RATE: f64 = 0.05;

/// Batches used when no batch size is given.
pub const DEFAULT_BATCHES: usize = 20;

/// Extra mesh levels tried past [`nodal_level`] before a sample is excluded.
pub const OVAL_REFINE_LEVELS: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Ovals of the projective zero curve, n = 2.
    Ovals,
    /// Zeros on the circle, n = 1.
    Zeros,
    /// Critical points on S², n = 2.
    Critical,
    /// Umbilics of the zero surface on S³, n = 3.
    Umbilics,
    /// Indicator of the oval event for the rescaled field at the north pole.
    LocalEvent,
}

impl Task {
    pub fn required_dim(self) -> Option<usize> {
        match self {
            Task::Ovals | Task::Critical => Some(2),
            Task::Zeros => Some(1),
            Task::Umbilics => Some(3),
            Task::LocalEvent => None,
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ovals" => Ok(Task::Ovals),
            "zeros" => Ok(Task::Zeros),
            "critical" => Ok(Task::Critical),
            "umbilics" => Ok(Task::Umbilics),
            "local-event" => Ok(Task::LocalEvent),
            other => Err(Error::domain(format!("unknown task '{other}'"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Ovals => "ovals",
            Task::Zeros => "zeros",
            Task::Critical => "critical",
            Task::Umbilics => "umbilics",
            Task::LocalEvent => "local-event",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub spec: EnsembleSpec,
    pub samples: usize,
    /// Samples per batch; the remainder of `samples / batch_size` joins the
    /// last batch.
    pub batch_size: usize,
    pub task: Task,
}

impl EstimatorConfig {
    pub fn new(spec: EnsembleSpec, task: Task, samples: usize) -> Self {
        EstimatorConfig {
            spec,
            samples,
            batch_size: (samples / DEFAULT_BATCHES).max(1),
            task,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be positive"));
        }
        if self.samples / self.batch_size < 2 {
            return Err(Error::domain(format!(
                "{} samples in batches of {} give fewer than 2 batches",
                self.samples, self.batch_size
            )));
        }
        if let Some(n) = self.task.required_dim() {
            if self.spec.n != n {
                return Err(Error::precondition(format!(
                    "task {} needs n = {n}, got n = {}",
                    self.task, self.spec.n
                )));
            }
        }
        if self.spec.k != 1 {
            return Err(Error::precondition("estimators need a single polynomial (k = 1)"));
        }
        Ok(())
    }

    pub fn batches(&self) -> usize {
        self.samples / self.batch_size
    }

    fn batch_of(&self, index: usize) -> usize {
        (index / self.batch_size).min(self.batches() - 1)
    }
}

/// Per-sample statistic, or the reason the sample was excluded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub index: u64,
    pub value: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub config: EstimatorConfig,
    pub mean: f64,
    /// Standard error from batch means.
    pub std_error: f64,
    /// Samples entering the mean.
    pub n: usize,
    pub excluded: usize,
    pub exclusion_rate: f64,
    /// Excluded-sample tally by error kind.
    pub exclusion_reasons: BTreeMap<String, usize>,
    /// `mean / dⁿ`.
    pub normalized_mean: f64,
    pub normalized_std_error: f64,
    pub batch_means: Vec<f64>,
    /// Set when more than [`MAX_EXCLUSION_RATE`] of the samples were excluded.
    pub unreliable: bool,
    pub outcomes: Vec<SampleOutcome>,
}

/// Statistic of one sample under `task`.
pub fn sample_statistic(p: &PolynomialSample, task: Task) -> Result<f64> {
    let d = p.spec().d;
    match task {
        Task::Ovals => {
            let start = nodal_level(d);
            let rep = resolve_nodal_topology(p, start, start + OVAL_REFINE_LEVELS)?;
            let count = rep.projective_components.unwrap_or(rep.b0);
            Ok(count as f64)
        }
        Task::Zeros => Ok(circle_zeros(p)?.count as f64),
        Task::Critical => {
            let rep = critical_points(p)?;
            if !rep.fully_converged {
                return Err(Error::UnreliableCount(format!(
                    "{} critical-point seeds did not converge",
                    rep.unconverged_seeds
                )));
            }
            Ok(rep.count as f64)
        }
        Task::Umbilics => {
            let rep = find_umbilics(p, &MultiplicityPattern::umbilic(), UmbilicChart::Sphere)?;
            Ok(rep.count as f64)
        }
        Task::LocalEvent => {
            let grid = DiskGrid::new(p.spec().n)?;
            let z = north_pole(p.spec().n);
            let values = grid.rescaled_values(p, &z, d)?;
            Ok(if LocalEvent::Oval.occurs(&grid, &values) { 1.0 } else { 0.0 })
        }
    }
}

/// Runs the estimator on the current rayon pool.
pub fn estimate(config: &EstimatorConfig) -> Result<EstimateReport> {
    config.validate()?;
    let outcomes: Vec<SampleOutcome> = (0..config.samples as u64)
        .into_par_iter()
        .map(|i| {
            let r = sample(&config.spec, i).and_then(|p| sample_statistic(&p, config.task));
            match r {
                Ok(v) => SampleOutcome { index: i, value: Some(v), reason: None },
                Err(e) => SampleOutcome {
                    index: i,
                    value: None,
                    reason: Some(format!("{}: {e}", e.kind())),
                },
            }
        })
        .collect();
    Ok(reduce(config, outcomes))
}

/// Runs the estimator on a dedicated pool of `threads` workers.
pub fn estimate_with_threads(config: &EstimatorConfig, threads: usize) -> Result<EstimateReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
    pool.install(|| estimate(config))
}

fn reduce(config: &EstimatorConfig, outcomes: Vec<SampleOutcome>) -> EstimateReport {
    let nb = config.batches();
    let mut sums = vec![0.0; nb];
    let mut counts = vec![0usize; nb];
    let mut reasons = BTreeMap::new();
    let mut total = 0.0;
    let mut n = 0usize;
    for o in &outcomes {
        match (o.value, &o.reason) {
            (Some(v), _) => {
                let b = config.batch_of(o.index as usize);
                sums[b] += v;
                counts[b] += 1;
                total += v;
                n += 1;
            }
            (None, reason) => {
                let kind = reason
                    .as_deref()
                    .and_then(|r| r.split(':').next())
                    .unwrap_or("unknown");
                *reasons.entry(kind.to_string()).or_insert(0) += 1;
            }
        }
    }
    let batch_means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let mean = if n > 0 { total / n as f64 } else { f64::NAN };
    let std_error = batch_means_error(&batch_means);
    let excluded = outcomes.len() - n;
    let exclusion_rate = excluded as f64 / outcomes.len().max(1) as f64;
    let scale = (config.spec.d as f64).powi(config.spec.n as i32);
    EstimateReport {
        config: config.clone(),
        mean,
        std_error,
        n,
        excluded,
        exclusion_rate,
        exclusion_reasons: reasons,
        normalized_mean: mean / scale,
        normalized_std_error: std_error / scale,
        batch_means,
        unreliable: exclusion_rate > MAX_EXCLUSION_RATE,
        outcomes,
    }
}

/// Standard error of the grand mean from the spread of batch means.
pub fn batch_means_error(batch_means: &[f64]) -> f64 {
    let b = batch_means.len();
    if b < 2 {
        return f64::NAN;
    }
    let m = batch_means.iter().sum::<f64>() / b as f64;
    let var = batch_means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Leave-one-out jackknife standard error of the mean.
pub fn jackknife_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let total: f64 = values.iter().sum();
    let loo: Vec<f64> = values.iter().map(|v| (total - v) / (n - 1) as f64).collect();
    let m = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    ((n - 1) as f64 / n as f64 * var).sqrt()
}

/// Evaluation points for local events: the ball of radius ½ on a lattice of
/// spacing 1/8, and the unit sphere of the chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub n: usize,
    pub inner: Vec<Vec<f64>>,
    pub boundary: Vec<Vec<f64>>,
}

const LATTICE_STEPS: i32 = 4;
const BOUNDARY_POINTS: usize = 64;

impl DiskGrid {
    pub fn new(n: usize) -> Result<Self> {
        crate::harmonics::check_dim(n)?;
        let h = 0.5 / LATTICE_STEPS as f64;
        let mut inner = Vec::new();
        let mut idx = vec![-LATTICE_STEPS; n];
        loop {
            let v: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
            if v.iter().map(|a| a * a).sum::<f64>() <= 0.25 + 1e-12 {
                inner.push(v);
            }
            let mut k = 0;
            while k < n && idx[k] == LATTICE_STEPS {
                idx[k] = -LATTICE_STEPS;
                k += 1;
            }
            if k == n {
                break;
            }
            idx[k] += 1;
        }
        let boundary = match n {
            1 => vec![vec![-1.0], vec![1.0]],
            2 => (0..BOUNDARY_POINTS)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / BOUNDARY_POINTS as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            _ => {
                // Fibonacci lattice
                let m = 2 * BOUNDARY_POINTS;
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                (0..m)
                    .map(|i| {
                        let z = 1.0 - (2 * i + 1) as f64 / m as f64;
                        let r = (1.0 - z * z).sqrt();
                        let t = golden * i as f64;
                        vec![r * t.cos(), r * t.sin(), z]
                    })
                    .collect()
            }
        };
        Ok(DiskGrid { n, inner, boundary })
    }

    pub fn len(&self) -> usize {
        self.inner.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Is `v` the centre point?
    fn is_origin(v: &[f64]) -> bool {
        v.iter().all(|&a| a == 0.0)
    }

    /// Values of the exponentially rescaled field `f_{z,d}`, inner points
    /// first, then boundary points.
    pub fn rescaled_values<F: AmbientField>(&self, p: &F, z: &[f64], d: usize) -> Result<Vec<f64>> {
        let c = ChartPoint::new(z)?;
        self.inner
            .iter()
            .chain(&self.boundary)
            .map(|v| rescaled_field(p, &c, d, v, ChartKind::Exp))
            .collect()
    }
}

/// Events measurable from the values of the rescaled field on a [`DiskGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalEvent {
    /// `f(0) > 0`.
    PositiveAtCentre,
    /// Negative somewhere on the inner ball, positive on the whole boundary.
    Oval,
    /// `f > threshold` at every grid point.
    Exceeds(f64),
}

impl LocalEvent {
    pub fn occurs(&self, grid: &DiskGrid, values: &[f64]) -> bool {
        let (inner, boundary) = values.split_at(grid.inner.len());
        self.decide(grid, |on_boundary, i| Ok(if on_boundary { boundary[i] } else { inner[i] }))
            .expect("infallible lookup")
    }

    /// Decides the event, evaluating `value(on_boundary, index)` only at the
    /// grid points it needs.
    pub fn decide(&self, grid: &DiskGrid, mut value: impl FnMut(bool, usize) -> Result<f64>) -> Result<bool> {
        match *self {
            LocalEvent::PositiveAtCentre => match grid.inner.iter().position(|v| DiskGrid::is_origin(v)) {
                Some(i) => Ok(value(false, i)? > 0.0),
                None => Ok(false),
            },
            LocalEvent::Oval => {
                for i in 0..grid.boundary.len() {
                    if value(true, i)? <= 0.0 {
                        return Ok(false);
                    }
                }
                for i in 0..grid.inner.len() {
                    if value(false, i)? < 0.0 {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            LocalEvent::Exceeds(t) => {
                for (on_boundary, len) in [(false, grid.inner.len()), (true, grid.boundary.len())] {
                    for i in 0..len {
                        if value(on_boundary, i)? <= t {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }
}

impl std::str::FromStr for LocalEvent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-centre" | "positive-center" => Ok(LocalEvent::PositiveAtCentre),
            "oval" => Ok(LocalEvent::Oval),
            other => match other.strip_prefix("exceeds:") {
                Some(t) => t
                    .parse()
                    .map(LocalEvent::Exceeds)
                    .map_err(|_| Error::domain(format!("bad threshold in '{other}'"))),
                None => Err(Error::domain(format!("unknown event '{other}'"))),
            },
        }
    }
}

/// `e_n`, the last basis vector of R^{n+1}.
pub fn north_pole(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n + 1];
    z[n] = 1.0;
    z
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub degree: usize,
    pub samples: usize,
    pub hits: usize,
    /// `None` when the event was never observed.
    pub probability: Option<f64>,
    pub std_error: f64,
    /// `1 / samples`; a never-observed event is reported as below this.
    pub resolution: f64,
}

impl EventEstimate {
    pub fn below_resolution(&self) -> bool {
        self.hits == 0
    }
}

/// Monte Carlo probability of `event` for the rescaled field at the north
/// pole, for each degree in `degrees`; `spec.d` is ignored.
pub fn local_event_probability(
    spec: &EnsembleSpec,
    event: LocalEvent,
    degrees: &[usize],
    samples: usize,
) -> Result<Vec<EventEstimate>> {
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let grid = DiskGrid::new(spec.n)?;
    let c = ChartPoint::new(&north_pole(spec.n))?;
    degrees
        .iter()
        .map(|&d| {
            let s = EnsembleSpec { d, ..*spec };
            s.validate()?;
            let hits: Vec<bool> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let p = sample(&s, i)?;
                    event.decide(&grid, |on_boundary, i| {
                        let v = if on_boundary { &grid.boundary[i] } else { &grid.inner[i] };
                        rescaled_field(&p, &c, d, v, ChartKind::Exp)
                    })
                })
                .collect::<Result<_>>()?;
            let h = hits.iter().filter(|&&b| b).count();
            let p = h as f64 / samples as f64;
            Ok(EventEstimate {
                degree: d,
                samples,
                hits: h,
                probability: (h > 0).then_some(p),
                std_error: (p * (1.0 - p) / samples as f64).sqrt(),
                resolution: 1.0 / samples as f64,
            })
        })
        .collect()
}

/// Reverse Markov inequality: a count bounded by `c1·dⁿ` with mean at least
/// `c2·dⁿ` exceeds `c·dⁿ` with probability at least `1 − (c1 − c2)/(c1 − c)`,
/// clamped to [0, 1].
pub fn reverse_markov_bound(c1: f64, c2: f64, c: f64) -> Result<f64> {
    for (name, v) in [("c1", c1), ("c2", c2), ("c", c)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::domain(format!("{name} must be a finite nonnegative number, got {v}")));
        }
    }
    if c2 > c1 {
        return Err(Error::domain(format!("need c2 ≤ c1, got c2 = {c2} > c1 = {c1}")));
    }
    if c >= c1 {
        return Err(Error::domain(format!("need c < c1, got c = {c} ≥ c1 = {c1}")));
    }
    Ok((1.0 - (c1 - c2) / (c1 - c)).clamp(0.0, 1.0))
}

/// Difference of two estimates in units of their joint standard error.
pub fn joint_z(m1: f64, se1: f64, m2: f64, se2: f64) -> f64 {
    (m1 - m2).abs() / (se1 * se1 + se2 * se2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleKind;

    #[test]
    fn reverse_markov_examples() {
        assert_eq!(reverse_markov_bound(2.0, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(reverse_markov_bound(3.0, 3.0, 1.7).unwrap(), 1.0);
        assert_eq!(reverse_markov_bound(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(reverse_markov_bound(1.0, 0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(reverse_markov_bound(1.0, 2.0, 0.0), Err(Error::Domain(_))));
        assert!(reverse_markov_bound(1.0, 0.5, -0.1).is_err());
    }

    #[test]
    fn jackknife_of_mean_is_the_classical_error() {
        let v: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 10.0).collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((jackknife_error(&v) - sd / n.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_needs_two_batches() {
        let spec = EnsembleSpec::kostlan(1, 10, 1);
        let mut c = EstimatorConfig::new(spec, Task::Zeros, 10);
        assert!(c.validate().is_ok());
        c.batch_size = 6;
        assert!(c.validate().is_err());
        let c = EstimatorConfig::new(spec, Task::Ovals, 10);
        assert!(matches!(c.validate(), Err(Error::Precondition(_))));
    }

    #[test]
    fn estimate_is_independent_of_thread_count() {
        let spec = EnsembleSpec::kostlan(1, 30, 11);
        let mut c = EstimatorConfig::new(spec, Task::Zeros, 60);
        c.batch_size = 7;
        let a = estimate_with_threads(&c, 1).unwrap();
        let b = estimate_with_threads(&c, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.batch_means.len(), 8);
        assert_eq!(a.n + a.excluded, 60);
        assert!(a.outcomes.iter().all(|o| o.value.unwrap() % 2.0 == 0.0));
    }

    #[test]
    fn batch_error_tracks_jackknife() {
        let spec = EnsembleSpec::harmonic(1, 20, 5);
        let mut c = EstimatorConfig::new(spec, Task::Zeros, 100);
        c.batch_size = 10;
        let r = estimate(&c).unwrap();
        let vals: Vec<f64> = r.outcomes.iter().filter_map(|o| o.value).collect();
        let jk = jackknife_error(&vals);
        assert!(r.std_error < 2.0 * jk && jk < 2.0 * r.std_error, "{} vs {jk}", r.std_error);
    }

    #[test]
    fn disk_grid_shapes() {
        let g = DiskGrid::new(2).unwrap();
        assert!(g.inner.iter().any(|v| DiskGrid::is_origin(v)));
        assert!(g.inner.iter().all(|v| v[0].hypot(v[1]) <= 0.5 + 1e-12));
        assert_eq!(g.boundary.len(), BOUNDARY_POINTS);
        let g1 = DiskGrid::new(1).unwrap();
        assert_eq!(g1.inner.len(), 9);
        let g3 = DiskGrid::new(3).unwrap();
        assert!(g3.boundary.iter().all(|v| (v.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn oval_event_on_synthetic_values() {
        let g = DiskGrid::new(2).unwrap();
        let vals: Vec<f64> = g
            .inner
            .iter()
            .chain(&g.boundary)
            .map(|v| v.iter().map(|a| a * a).sum::<f64>() - 0.1)
            .collect();
        assert!(LocalEvent::Oval.occurs(&g, &vals));
        assert!(!LocalEvent::PositiveAtCentre.occurs(&g, &vals));
        let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
        assert!(!LocalEvent::Oval.occurs(&g, &neg));
        assert!(LocalEvent::PositiveAtCentre.occurs(&g, &neg));
    }

    #[test]
    fn centre_sign_is_a_fair_coin() {
        let spec = EnsembleSpec { kind: EnsembleKind::Harmonic, n: 2, k: 1, d: 10, seed: 3 };
        let est = local_event_probability(&spec, LocalEvent::PositiveAtCentre, &[8, 16], 2000).unwrap();
        for e in &est {
            let p = e.probability.unwrap();
            assert!((p - 0.5).abs() < 3.0 * e.std_error, "d={} p={p}", e.degree);
        }
        let huge = local_event_probability(&spec, LocalEvent::Exceeds(1e6), &[8], 200).unwrap();
        assert!(huge[0].below_resolution());
        assert_eq!(huge[0].probability, None);
    }
}
