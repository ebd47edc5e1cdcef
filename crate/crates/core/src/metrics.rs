//! Outcome statistics: frame loss ratio, satisfied-UE ratio, resource usage
//! and capacity extraction from a UE-count sweep.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Fraction of satisfied UEs a cell must exceed to count as serving N UEs.
pub const CAPACITY_SATISFIED_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct UeStats {
    pub ue_id: usize,
    pub distance_m: f64,
    pub frames_generated: u64,
    pub frames_on_time: u64,
}

impl UeStats {
    pub fn flr(&self) -> Option<f64> {
        flr(self.frames_generated, self.frames_on_time)
    }

    /// `None` when no frame was generated.
    pub fn satisfied(&self, flr_qos: f64) -> Option<bool> {
        self.flr().map(|f| f <= flr_qos)
    }
}

/// `1 - on_time / generated`; undefined for zero frames.
pub fn flr(frames_generated: u64, frames_on_time: u64) -> Option<f64> {
    if frames_generated == 0 {
        return None;
    }
    debug_assert!(frames_on_time <= frames_generated);
    Some((frames_generated - frames_on_time) as f64 / frames_generated as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub point: f64,
    pub seed: u64,
    pub ues: Vec<UeStats>,
    pub fr1_usage: f64,
    pub fr2_usage: f64,
}

impl RunResult {
    pub fn satisfied_ratio(&self, flr_qos: f64) -> f64 {
        satisfied_ratio(self.ues.iter().map(UeStats::flr), flr_qos)
    }
}

/// Share of UEs whose FLR does not exceed `flr_qos`. UEs with an undefined
/// FLR count as not satisfied.
pub fn satisfied_ratio<I: IntoIterator<Item = Option<f64>>>(flrs: I, flr_qos: f64) -> f64 {
    let mut n = 0usize;
    let mut ok = 0usize;
    for f in flrs {
        n += 1;
        if matches!(f, Some(v) if v <= flr_qos) {
            ok += 1;
        }
    }
    assert!(n > 0, "satisfied ratio over zero UEs");
    ok as f64 / n as f64
}

/// Largest UE count whose mean satisfied ratio exceeds 0.9; 0 if none.
/// `points` are `(n_ue, mean_ratio)` pairs in any order.
pub fn capacity_from_sweep(points: &[(usize, f64)]) -> usize {
    points
        .iter()
        .filter(|&&(_, r)| r > CAPACITY_SATISFIED_THRESHOLD)
        .map(|&(n, _)| n)
        .max()
        .unwrap_or(0)
}

/// True when the satisfied-ratio curve rises again after having dropped.
pub fn is_non_monotone(points: &[(usize, f64)]) -> bool {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.0);
    sorted.windows(2).any(|w| w[1].1 > w[0].1 + 1e-12)
}

/// Sample mean with a two-sided 95% Student-t half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: Option<f64>,
    pub n: usize,
}

pub fn mean_ci(samples: &[f64]) -> Option<MeanCi> {
    let n = samples.len();
    if n == 0 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some(MeanCi {
            mean,
            half_width: None,
            n,
        });
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(0.975);
    Some(MeanCi {
        mean,
        half_width: Some(t * (var / n as f64).sqrt()),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flr_cases() {
        assert_eq!(flr(100, 98), Some(0.02));
        assert_eq!(flr(100, 100), Some(0.0));
        assert_eq!(flr(100, 0), Some(1.0));
        assert_eq!(flr(0, 0), None);
    }

    #[test]
    fn satisfied_ratio_cases() {
        let r = satisfied_ratio([Some(0.005), Some(0.02), Some(0.0)], 0.01);
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(satisfied_ratio([Some(0.0), Some(0.001)], 0.01), 1.0);
        assert_eq!(satisfied_ratio([Some(0.01)], 0.01), 1.0);
        assert_eq!(satisfied_ratio([None, Some(0.0)], 0.01), 0.5);
    }

    #[test]
    fn capacity_cases() {
        assert_eq!(
            capacity_from_sweep(&[(1, 1.0), (2, 1.0), (3, 0.95), (4, 0.85)]),
            3
        );
        assert_eq!(capacity_from_sweep(&[(1, 0.9), (2, 0.5)]), 0);
        let bumpy = [(1, 1.0), (2, 0.8), (3, 0.95)];
        assert_eq!(capacity_from_sweep(&bumpy), 3);
        assert!(is_non_monotone(&bumpy));
        assert!(!is_non_monotone(&[(1, 1.0), (2, 0.95), (3, 0.95)]));
    }

    #[test]
    fn student_t_half_width() {
        // n = 4, s = sqrt(5/3), t(0.975, 3) = 3.182446
        let ci = mean_ci(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(ci.mean, 2.5);
        let expected = 3.182_446_305 * (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((ci.half_width.unwrap() - expected).abs() < 1e-6);
        assert_eq!(mean_ci(&[7.0]).unwrap().half_width, None);
        assert!(mean_ci(&[]).is_none());
    }
}
