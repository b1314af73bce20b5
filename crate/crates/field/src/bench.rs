//! Kernel-only scaling benchmark: one outer step of a uniform field, timed
//! over a grid of particle and worker counts.

use std::io::Write;
use std::time::Instant;

use chad_core::AdmState;

use crate::engine::Engine;
use crate::field::{FieldConfig, FieldError, FieldState, SyncPolicy};

#[derive(Debug, Clone)]
pub struct BenchWorkload {
    pub field: FieldConfig,
    pub policy: SyncPolicy,
    pub initial: AdmState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchCell {
    pub n_particles: usize,
    pub workers: usize,
    /// s.
    pub mean_runtime: f64,
    /// Sample standard deviation over repetitions, s. Zero for one repetition.
    pub stddev: f64,
    /// Mean runtime at one worker divided by this cell's mean.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub repetitions: usize,
    pub cells: Vec<BenchCell>,
}

/// Least-squares line `runtime = slope * n + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl BenchReport {
    pub fn cell(&self, n: usize, w: usize) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.n_particles == n && c.workers == w)
    }

    /// Runtime against particle count at fixed `workers`.
    pub fn fit(&self, workers: usize) -> Option<LinearFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .cells
            .iter()
            .filter(|c| c.workers == workers)
            .map(|c| (c.n_particles as f64, c.mean_runtime))
            .unzip();
        linear_fit(&xs, &ys)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n_particles,workers,mean_runtime_s,stddev_s,speedup")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{:.9e},{:.9e},{:.6}",
                c.n_particles, c.workers, c.mean_runtime, c.stddev, c.speedup
            )?;
        }
        w.flush()
    }
}

/// Time one outer step for every (N, W) pair. One untimed warm-up run
/// precedes the `repetitions` timed runs of each cell; every run starts from
/// the same uniform field. W = 1 is always measured so speedups exist.
pub fn bench_scaling(
    n_list: &[usize],
    w_list: &[usize],
    repetitions: usize,
    workload: &BenchWorkload,
) -> Result<BenchReport, FieldError> {
    if n_list.is_empty() || w_list.is_empty() || repetitions == 0 {
        return Err(FieldError::Config(
            "bench needs particle counts, worker counts and repetitions >= 1".into(),
        ));
    }
    let mut workers: Vec<usize> = w_list.to_vec();
    if !workers.contains(&1) {
        workers.insert(0, 1);
    }
    let engines = workers
        .iter()
        .map(|&w| Engine::new(w).map_err(|e| FieldError::Config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::new();
    for &n in n_list {
        let pristine = FieldState::uniform(n, &workload.field, &workload.initial)?;
        let mut work = pristine.clone();
        let mut means = Vec::with_capacity(engines.len());
        for engine in &engines {
            let mut times = Vec::with_capacity(repetitions);
            for rep in 0..=repetitions {
                work.states.clone_from(&pristine.states);
                let t0 = Instant::now();
                work.step_kinetics(&workload.policy, engine)?;
                let dt = t0.elapsed().as_secs_f64();
                if rep > 0 {
                    times.push(dt);
                }
            }
            let (mean, stddev) = mean_std(&times);
            means.push((engine.workers(), mean, stddev));
        }
        let base = means
            .iter()
            .find(|m| m.0 == 1)
            .map(|m| m.1)
            .expect("one worker measured");
        for (w, mean, stddev) in means {
            cells.push(BenchCell {
                n_particles: n,
                workers: w,
                mean_runtime: mean,
                stddev,
                speedup: base / mean,
            });
        }
    }
    Ok(BenchReport { repetitions, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn exact_line_has_unit_r_squared() {
        let f = linear_fit(&[1.0, 2.0, 4.0, 8.0], &[3.0, 5.0, 9.0, 17.0]).unwrap();
        approx::assert_relative_eq!(f.slope, 2.0, max_relative = 1e-12);
        approx::assert_relative_eq!(f.intercept, 1.0, max_relative = 1e-12);
        approx::assert_relative_eq!(f.r_squared, 1.0, max_relative = 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn single_worker_report_has_unit_speedup() {
        let wl = BenchWorkload {
            field: presets::case2_field_config(),
            policy: presets::case2_policy(),
            initial: chad_core::presets::bsm2_initial_state(),
        };
        let r = bench_scaling(&[20, 40], &[1], 2, &wl).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert!(r.cells.iter().all(|c| c.speedup == 1.0 && c.mean_runtime > 0.0));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("n_particles,workers,mean_runtime_s,stddev_s,speedup\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
