use cspsa_core::{Blocking, Method, OptimizerConfig, RunTrace};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cross-run statistics of the recorded objective at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStatistics {
    pub k: u64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Cumulative evaluations per run at iteration `k`. Every run of one
    /// configuration spends the same budget.
    pub objective_evals: u64,
    pub fidelity_evals: u64,
}

impl IterationStatistics {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Type-7 quantile of ascending `sorted` data: linear interpolation at
/// position `1 + q(n − 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample standard deviation (divisor `n − 1`); zero for a single value.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

fn describe(k: u64, values: &[f64], objective_evals: u64, fidelity_evals: u64) -> IterationStatistics {
    // Sums run over sorted data so that the result is independent of run order.
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    IterationStatistics {
        k,
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        std: sample_std(&sorted),
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        objective_evals,
        fidelity_evals,
    }
}

/// Per-iteration statistics over traces of equal length. The result does
/// not depend on the order of `traces`.
pub fn iteration_statistics(traces: &[&RunTrace]) -> Result<Vec<IterationStatistics>> {
    let Some(first) = traces.first() else {
        return Err(Error::Statistics("no completed runs to summarize".into()));
    };
    let len = first.records.len();
    if traces.iter().any(|t| t.records.len() != len) {
        return Err(Error::Statistics("traces differ in length".into()));
    }
    let mut values = vec![0.0; traces.len()];
    Ok((0..len)
        .map(|i| {
            for (v, t) in values.iter_mut().zip(traces) {
                *v = t.records[i].value;
            }
            let r = &first.records[i];
            describe(r.k, &values, r.objective_evals, r.fidelity_evals)
        })
        .collect())
}

/// One row of a results table, columns in reporting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub gains: String,
    pub postprocessing: String,
    pub resampling: usize,
    pub blocking: bool,
    pub median: f64,
    pub iqr: f64,
    pub mean: f64,
    pub std: f64,
}

impl SummaryRow {
    pub const COLUMNS: [&'static str; 9] =
        ["method", "gains", "postprocessing", "resampling", "blocking", "median", "iqr", "mean", "std"];
}

fn describe_gains(config: &OptimizerConfig) -> String {
    let g = &config.gains;
    match g.matching_preset() {
        Some(p) => p.name().to_string(),
        None => format!("a={} b={} A={} s={} t={}", g.a, g.b, g.offset, g.s, g.t),
    }
}

/// Summary row at iteration `k_star` (1-indexed).
pub fn summarize_final(stats: &[IterationStatistics], k_star: u64, config: &OptimizerConfig) -> Result<SummaryRow> {
    let s = stats
        .iter()
        .find(|s| s.k == k_star)
        .ok_or_else(|| Error::Statistics(format!("no statistics recorded at iteration {k_star}")))?;
    Ok(SummaryRow {
        method: config.label(),
        gains: describe_gains(config),
        postprocessing: match config.method {
            Method::FirstOrder => "none".into(),
            _ => config.postprocessing.name().into(),
        },
        resampling: config.resamples,
        blocking: !matches!(config.blocking, Blocking::Off),
        median: s.median,
        iqr: s.iqr(),
        mean: s.mean,
        std: s.std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use cspsa_core::{Field, IterationRecord, RunStatus};
    use proptest::prelude::*;

    fn trace(values: &[f64]) -> RunTrace {
        RunTrace {
            records: values
                .iter()
                .enumerate()
                .map(|(i, &value)| IterationRecord {
                    k: i as u64 + 1,
                    value,
                    accepted: true,
                    objective_evals: 2 * (i as u64 + 1),
                    fidelity_evals: 0,
                })
                .collect(),
            final_params: vec![],
            status: RunStatus::Completed,
            blocking_tolerance: None,
        }
    }

    #[test]
    fn four_values() {
        let ts: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| trace(&[v])).collect();
        let s = iteration_statistics(&ts.iter().collect::<Vec<_>>()).unwrap()[0];
        assert_eq!((s.mean, s.median, s.q1, s.q3), (2.5, 2.5, 1.75, 3.25));
        assert_abs_diff_eq!(s.std, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn single_run_is_degenerate() {
        let t = trace(&[3.0, 2.0, 1.0]);
        for s in iteration_statistics(&[&t]).unwrap() {
            assert_eq!(s.std, 0.0);
            assert_eq!(s.iqr(), 0.0);
        }
        let row = summarize_final(
            &iteration_statistics(&[&t]).unwrap(),
            3,
            &OptimizerConfig::new(Method::FirstOrder, Field::Complex),
        )
        .unwrap();
        assert_eq!((row.iqr, row.std, row.median), (0.0, 0.0, 1.0));
        assert_eq!(row.method, "CSPSA");
        assert_eq!(row.gains, "standard");
    }

    #[test]
    fn summary_beyond_trace_is_an_error() {
        let t = trace(&[1.0]);
        let stats = iteration_statistics(&[&t]).unwrap();
        assert!(summarize_final(&stats, 2, &OptimizerConfig::new(Method::FirstOrder, Field::Real)).is_err());
    }

    #[test]
    fn summary_row_serializes_in_column_order() {
        let row = SummaryRow {
            method: "CSPSA".into(),
            gains: "asymptotic".into(),
            postprocessing: "none".into(),
            resampling: 1,
            blocking: false,
            median: 1.0,
            iqr: 2.0,
            mean: 3.0,
            std: 4.0,
        };
        let json = serde_json::to_string(&row).unwrap();
        let positions: Vec<usize> =
            SummaryRow::COLUMNS.iter().map(|c| json.find(&format!("\"{c}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn ordering_and_permutation_invariance(mut xs in prop::collection::vec(-1e6f64..1e6, 1..40), seed in any::<u64>()) {
            let traces: Vec<_> = xs.iter().map(|&v| trace(&[v])).collect();
            let a = iteration_statistics(&traces.iter().collect::<Vec<_>>()).unwrap()[0];
            prop_assert!(a.q1 <= a.median && a.median <= a.q3 && a.std >= 0.0);
            // Deterministic shuffle.
            let n = xs.len();
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                xs.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled: Vec<_> = xs.iter().map(|&v| trace(&[v])).collect();
            let b = iteration_statistics(&shuffled.iter().collect::<Vec<_>>()).unwrap()[0];
            prop_assert_eq!(a.median, b.median);
            prop_assert_eq!(a.q1, b.q1);
            prop_assert_eq!(a.q3, b.q3);
            prop_assert_eq!(a.mean, b.mean);
            prop_assert_eq!(a.std, b.std);
        }
    }
}
