//! Shepard inverse-distance-weighted interpolation and time-step selection.
//!
//! For a target `y` with neighbors `x_i` at distances `d_i`, the raw weights
//! are `w_i = 1 / d_i^p` and the interpolant is `Σ w_i f_i / Σ w_i`, applied
//! independently to every field component.
//!
//! Weights are evaluated as `(d_min / d_i)^p`, which is the same after
//! normalization but cannot overflow for large `p` or tiny distances. A target
//! within `exact_hit_tol * scale` of one or more sources takes the plain mean of
//! those sources, where `scale` is the source cloud's bounding-box diagonal.

use std::str::FromStr;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{FieldSnapshot, PointCloud, ScatteredDataset, TimeSeriesManifest};
use crate::spatial::{NeighborSet, SpatialIndex};

/// How a query time maps onto stored steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeMode {
    /// Closest stored step; exact ties go to the earlier step.
    #[default]
    Nearest,
    /// Latest stored step not after the query time.
    HoldPrevious,
    /// Linear blend of the bracketing steps.
    Linear,
}

impl FromStr for TimeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nearest" => Ok(TimeMode::Nearest),
            "hold_previous" | "holdprevious" => Ok(TimeMode::HoldPrevious),
            "linear" => Ok(TimeMode::Linear),
            _ => Err(format!(
                "unknown time mode '{s}' (expected nearest, hold_previous or linear)"
            )),
        }
    }
}

impl std::fmt::Display for TimeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TimeMode::Nearest => "nearest",
            TimeMode::HoldPrevious => "hold_previous",
            TimeMode::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpParams {
    /// Neighbor count.
    pub k: usize,
    /// Weighting exponent.
    pub p: f64,
    /// Exact-hit radius relative to the source bounding-box diagonal.
    pub exact_hit_tol: f64,
    pub time_mode: TimeMode,
}

impl Default for InterpParams {
    fn default() -> Self {
        InterpParams {
            k: 4,
            p: 2.0,
            exact_hit_tol: 1e-12,
            time_mode: TimeMode::Nearest,
        }
    }
}

impl InterpParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be positive, got {}", self.p)));
        }
        if !(self.exact_hit_tol >= 0.0 && self.exact_hit_tol.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "exact_hit_tol must be non-negative, got {}",
                self.exact_hit_tol
            )));
        }
        Ok(())
    }
}

/// Normalized Shepard weights for sorted neighbor distances.
pub fn shepard_weights(distances: &[f64], p: f64, exact_hit_tol: f64, scale: f64) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::InvalidParams("no neighbor distances".into()));
    }
    if distances.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(Error::InvalidParams("distances must be finite and non-negative".into()));
    }
    let hit_radius = exact_hit_tol * scale;
    let hits = distances.iter().filter(|&&d| d <= hit_radius).count();
    if hits > 0 {
        let share = 1.0 / hits as f64;
        return Ok(distances
            .iter()
            .map(|&d| if d <= hit_radius { share } else { 0.0 })
            .collect());
    }
    if scale == 0.0 {
        return Err(Error::DegenerateCloud);
    }
    let d_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = distances.iter().map(|&d| (d_min / d).powf(p)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// Interpolated value vector at one target from its neighbors.
///
/// Evaluated as `f_0 + Σ ŵ_i (f_i - f_0)` around the nearest neighbor `f_0`,
/// which equals the convex combination and reproduces constant fields and
/// exact hits without rounding. The result is clamped to the neighbor range.
pub fn interpolate_point(
    snapshot: &FieldSnapshot,
    neighbors: &NeighborSet,
    params: &InterpParams,
    scale: f64,
) -> Result<Vec<f64>> {
    let weights = shepard_weights(&neighbors.distances(), params.p, params.exact_hit_tol, scale)?;
    let nb = neighbors.as_slice();
    if let Some(bad) = nb.iter().find(|n| n.index >= snapshot.len()) {
        return Err(Error::InvalidParams(format!(
            "neighbor index {} out of range for {} rows",
            bad.index,
            snapshot.len()
        )));
    }
    let base = snapshot.row(nb[0].index);
    let mut out = Vec::with_capacity(base.len());
    for (c, &f0) in base.iter().enumerate() {
        let mut acc = 0.0;
        let mut lo = f0;
        let mut hi = f0;
        for (n, &w) in nb.iter().zip(&weights) {
            let f = snapshot.row(n.index)[c];
            lo = lo.min(f);
            hi = hi.max(f);
            if w != 0.0 {
                acc += w * (f - f0);
            }
        }
        out.push((f0 + acc).clamp(lo, hi));
    }
    Ok(out)
}

fn check_index(dataset: &ScatteredDataset, index: &SpatialIndex<'_>) -> Result<()> {
    if index.len() != dataset.points().len() || index.points().dim() != dataset.points().dim() {
        return Err(Error::InvalidParams(
            "spatial index was not built over the dataset points".into(),
        ));
    }
    Ok(())
}

/// Interpolates stored step `step` at every target point.
pub fn evaluate_snapshot(
    dataset: &ScatteredDataset,
    step: usize,
    targets: &PointCloud,
    index: &SpatialIndex<'_>,
    params: &InterpParams,
) -> Result<FieldSnapshot> {
    params.validate()?;
    check_index(dataset, index)?;
    let snapshot = dataset.snapshot(step)?;
    let scale = dataset.points().bbox_diagonal();
    let rows = (0..targets.len())
        .into_par_iter()
        .map(|t| {
            let neighbors = index.knn(targets.coords(t), params.k)?;
            interpolate_point(snapshot, &neighbors, params, scale)
        })
        .collect::<Result<Vec<_>>>()?;
    FieldSnapshot::new(snapshot.time(), snapshot.components(), rows.concat())
}

/// Steps and blend factor used for a query time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSelection {
    pub lower_step: usize,
    pub upper_step: usize,
    /// Weight of `upper_step`; zero whenever both steps coincide.
    pub alpha: f64,
}

impl TimeSelection {
    fn single(step: usize) -> Self {
        TimeSelection {
            lower_step: step,
            upper_step: step,
            alpha: 0.0,
        }
    }
}

/// Maps query time `t` onto the manifest. Times outside the stored range clamp
/// to the end steps with a warning.
pub fn select_time_step(manifest: &TimeSeriesManifest, t: f64, params: &InterpParams) -> TimeSelection {
    let times: Vec<f64> = manifest.times().collect();
    let last = times.len() - 1;
    if t < times[0] || t > times[last] {
        warn!(
            "query time {t} outside stored range [{}, {}]; will clamp",
            times[0], times[last]
        );
    }
    // Number of stored times <= t.
    let upto = times.partition_point(|&s| s <= t);
    if upto == 0 {
        return TimeSelection::single(0);
    }
    let prev = upto - 1;
    if times[prev] == t || prev == last {
        return TimeSelection::single(prev);
    }
    let next = prev + 1;
    match params.time_mode {
        TimeMode::HoldPrevious => TimeSelection::single(prev),
        TimeMode::Nearest => {
            if t - times[prev] <= times[next] - t {
                TimeSelection::single(prev)
            } else {
                TimeSelection::single(next)
            }
        }
        TimeMode::Linear => TimeSelection {
            lower_step: prev,
            upper_step: next,
            alpha: (t - times[prev]) / (times[next] - times[prev]),
        },
    }
}

/// Field at query time `t` under `params.time_mode`; the result carries time `t`.
pub fn evaluate_transient(
    dataset: &ScatteredDataset,
    t: f64,
    targets: &PointCloud,
    index: &SpatialIndex<'_>,
    params: &InterpParams,
) -> Result<FieldSnapshot> {
    let sel = select_time_step(dataset.manifest(), t, params);
    let lower = evaluate_snapshot(dataset, sel.lower_step, targets, index, params)?;
    if sel.lower_step == sel.upper_step {
        return Ok(lower.with_time(t));
    }
    let upper = evaluate_snapshot(dataset, sel.upper_step, targets, index, params)?;
    let a = sel.alpha;
    let blended = lower
        .values()
        .iter()
        .zip(upper.values())
        .map(|(lo, hi)| (1.0 - a) * lo + a * hi)
        .collect();
    FieldSnapshot::new(t, lower.components(), blended)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::ManifestEntry;
    use crate::spatial::{build_index, Backend};

    fn manifest(times: &[f64]) -> TimeSeriesManifest {
        TimeSeriesManifest::new(
            times
                .iter()
                .enumerate()
                .map(|(i, &t)| ManifestEntry {
                    time: t,
                    file: format!("s{i}.csv"),
                    data_path: format!("s{i}.csv").into(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn params(mode: TimeMode) -> InterpParams {
        InterpParams {
            time_mode: mode,
            ..Default::default()
        }
    }

    #[test]
    fn weights_hand_values() {
        // 1/0.25^2 = 16, 1/0.75^2 = 16/9; normalized 0.9 and 0.1.
        let w = shepard_weights(&[0.25, 0.75], 2.0, 1e-12, 1.0).unwrap();
        assert!((w[0] - 0.9).abs() < 1e-15 && (w[1] - 0.1).abs() < 1e-15, "{w:?}");
        for p in [0.5, 1.0, 3.0, 10.0] {
            assert_eq!(shepard_weights(&[0.3, 0.3], p, 1e-12, 1.0).unwrap(), vec![0.5, 0.5]);
        }
        assert_eq!(shepard_weights(&[0.0, 0.5], 2.0, 1e-12, 1.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            shepard_weights(&[0.0, 0.0, 0.5], 2.0, 1e-12, 1.0).unwrap(),
            vec![0.5, 0.5, 0.0]
        );
    }

    #[test]
    fn weights_exact_hit_is_relative() {
        let w = shepard_weights(&[1e-3, 1.0], 2.0, 1e-12, 1e10).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
        let w = shepard_weights(&[1e-3, 1.0], 2.0, 1e-12, 1.0).unwrap();
        assert!(w[0] < 1.0 && w[1] > 0.0);
    }

    #[test]
    fn weights_degenerate_and_invalid() {
        assert!(matches!(
            shepard_weights(&[0.5, 1.0], 2.0, 1e-12, 0.0),
            Err(Error::DegenerateCloud)
        ));
        assert_eq!(shepard_weights(&[0.0], 2.0, 1e-12, 0.0).unwrap(), vec![1.0]);
        assert!(shepard_weights(&[], 2.0, 1e-12, 1.0).is_err());
        assert!(shepard_weights(&[-1.0], 2.0, 1e-12, 1.0).is_err());
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let w = shepard_weights(&[1e-8, 2e-8], 64.0, 0.0, 1.0).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_source_value() {
        let cloud = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let snap = FieldSnapshot::new(0.0, 1, vec![0.0, 1.0]).unwrap();
        let idx = build_index(&cloud, Backend::KdTree).unwrap();
        let n = idx.knn(&[0.25, 0.0], 2).unwrap();
        let params = InterpParams { k: 2, ..Default::default() };
        let v = interpolate_point(&snap, &n, &params, cloud.bbox_diagonal()).unwrap();
        assert!((v[0] - 0.1).abs() <= 1e-15, "{v:?}");
    }

    #[test]
    fn unit_square_center_is_mean() {
        let cloud = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let snap = FieldSnapshot::new(0.0, 1, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let idx = build_index(&cloud, Backend::KdTree).unwrap();
        let n = idx.knn(&[0.5, 0.5], 4).unwrap();
        let v = interpolate_point(&snap, &n, &InterpParams::default(), cloud.bbox_diagonal()).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_neighbor_rejected() {
        let cloud = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let idx = build_index(&cloud, Backend::Linear).unwrap();
        let n = idx.knn(&[2.0, 0.0], 3).unwrap();
        let snap = FieldSnapshot::new(0.0, 1, vec![0.0, 1.0]).unwrap();
        assert!(interpolate_point(&snap, &n, &InterpParams::default(), 2.0).is_err());
    }

    #[test]
    fn time_selection_rules() {
        let m = manifest(&[0.0, 0.001, 0.002]);
        let nearest = params(TimeMode::Nearest);
        assert_eq!(select_time_step(&m, 0.0014, &nearest), TimeSelection::single(1));
        assert_eq!(select_time_step(&m, 0.0005, &nearest), TimeSelection::single(0));
        assert_eq!(select_time_step(&m, 0.0016, &nearest), TimeSelection::single(2));

        let lin = select_time_step(&m, 0.0015, &params(TimeMode::Linear));
        assert_eq!((lin.lower_step, lin.upper_step), (1, 2));
        assert!((lin.alpha - 0.5).abs() < 1e-12);

        let hold = params(TimeMode::HoldPrevious);
        assert_eq!(select_time_step(&m, 0.0019, &hold), TimeSelection::single(1));
        assert_eq!(select_time_step(&m, -1.0, &hold), TimeSelection::single(0));
        assert_eq!(select_time_step(&m, 5.0, &hold), TimeSelection::single(2));
    }

    #[test]
    fn time_selection_clamps_and_agrees_at_stored_times() {
        let m = manifest(&[0.0, 0.001, 0.002]);
        for mode in [TimeMode::Nearest, TimeMode::HoldPrevious, TimeMode::Linear] {
            let p = params(mode);
            assert_eq!(select_time_step(&m, -0.5, &p), TimeSelection::single(0));
            assert_eq!(select_time_step(&m, 0.5, &p), TimeSelection::single(2));
            for (i, t) in m.times().enumerate() {
                assert_eq!(select_time_step(&m, t, &p), TimeSelection::single(i));
            }
        }
        let single = manifest(&[3.0]);
        assert_eq!(
            select_time_step(&single, 4.0, &params(TimeMode::Linear)),
            TimeSelection::single(0)
        );
    }

    #[test]
    fn params_validation() {
        assert!(InterpParams::default().validate().is_ok());
        assert!(InterpParams { k: 0, ..Default::default() }.validate().is_err());
        assert!(InterpParams { p: 0.0, ..Default::default() }.validate().is_err());
        assert!(InterpParams { exact_hit_tol: -1.0, ..Default::default() }.validate().is_err());
        assert_eq!("hold-previous".parse::<TimeMode>().unwrap(), TimeMode::HoldPrevious);
        assert!("cubic".parse::<TimeMode>().is_err());
    }
}
