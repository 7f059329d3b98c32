use serde::{Deserialize, Serialize};

use super::CompressError;

pub const SFE_WIDTH: usize = 17;

/// Summary statistics of a multiset of transferred values.
///
/// Component order: max, min, sum, mean, count, range, mid_range, p25, p50,
/// p75, variance, std_dev, mean_abs_dev, coeff_variation, kurtosis,
/// skewness, tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfeVector(pub [f64; SFE_WIDTH]);

impl SfeVector {
    pub const NAMES: [&'static str; SFE_WIDTH] = [
        "max",
        "min",
        "sum",
        "mean",
        "count",
        "range",
        "mid_range",
        "p25",
        "p50",
        "p75",
        "variance",
        "std_dev",
        "mean_abs_dev",
        "coeff_variation",
        "kurtosis",
        "skewness",
        "tilt",
    ];

    pub fn max(&self) -> f64 {
        self.0[0]
    }
    pub fn min(&self) -> f64 {
        self.0[1]
    }
    pub fn sum(&self) -> f64 {
        self.0[2]
    }
    pub fn mean(&self) -> f64 {
        self.0[3]
    }
    pub fn count(&self) -> f64 {
        self.0[4]
    }
    pub fn range(&self) -> f64 {
        self.0[5]
    }
    pub fn mid_range(&self) -> f64 {
        self.0[6]
    }
    pub fn p25(&self) -> f64 {
        self.0[7]
    }
    pub fn p50(&self) -> f64 {
        self.0[8]
    }
    pub fn p75(&self) -> f64 {
        self.0[9]
    }
    pub fn variance(&self) -> f64 {
        self.0[10]
    }
    pub fn std_dev(&self) -> f64 {
        self.0[11]
    }
    pub fn mean_abs_dev(&self) -> f64 {
        self.0[12]
    }
    pub fn coeff_variation(&self) -> f64 {
        self.0[13]
    }
    pub fn kurtosis(&self) -> f64 {
        self.0[14]
    }
    pub fn skewness(&self) -> f64 {
        self.0[15]
    }
    pub fn tilt(&self) -> f64 {
        self.0[16]
    }
}

/// Population statistics of `values`. Ratio statistics are 0 when their
/// denominator is 0; a sample whose max equals its min has zero spread.
pub fn sfe(values: &[f64]) -> Result<SfeVector, CompressError> {
    if values.is_empty() {
        return Err(CompressError::EmptyInput);
    }
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let sum: f64 = values.iter().sum();
    let mean = sum / n;

    let (m2, m3, m4, mad) = if max == min {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let mut acc = [0.0f64; 4];
        for &x in values {
            let d = x - mean;
            let d2 = d * d;
            acc[0] += d2;
            acc[1] += d2 * d;
            acc[2] += d2 * d2;
            acc[3] += d.abs();
        }
        (acc[0] / n, acc[1] / n, acc[2] / n, acc[3] / n)
    };
    let std = m2.sqrt();
    let median = percentile(&sorted, 0.5);
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };

    Ok(SfeVector([
        max,
        min,
        sum,
        mean,
        n,
        max - min,
        (max + min) / 2.0,
        percentile(&sorted, 0.25),
        median,
        percentile(&sorted, 0.75),
        m2,
        std,
        mad,
        ratio(std, mean),
        if m2 == 0.0 { 0.0 } else { m4 / (m2 * m2) - 3.0 },
        ratio(m3, m2 * std),
        ratio(mean - median, std),
    ]))
}

/// Integer-valued convenience wrapper.
pub fn sfe_u64(values: &[u64]) -> Result<SfeVector, CompressError> {
    let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    sfe(&v)
}

/// Linear interpolation between closest ranks on a sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element() {
        let s = sfe(&[5.0]).unwrap();
        for v in [
            s.max(),
            s.min(),
            s.mean(),
            s.p25(),
            s.p50(),
            s.p75(),
            s.sum(),
            s.mid_range(),
        ] {
            assert_eq!(v, 5.0);
        }
        assert_eq!(s.count(), 1.0);
        for v in [
            s.range(),
            s.variance(),
            s.std_dev(),
            s.mean_abs_dev(),
            s.coeff_variation(),
            s.kurtosis(),
            s.skewness(),
            s.tilt(),
        ] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn symmetric_sample() {
        let s = sfe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean(), 2.5);
        assert_eq!(s.p50(), 2.5);
        assert_eq!(s.p25(), 1.75);
        assert_eq!(s.p75(), 3.25);
        assert_eq!(s.variance(), 1.25);
        assert_eq!(s.mean_abs_dev(), 1.0);
        assert!(s.skewness().abs() < 1e-15);
        assert_eq!(s.tilt(), 0.0);
        // m4 = (2*5.0625 + 2*0.0625)/4 = 2.5625; 2.5625/1.5625 - 3
        assert!((s.kurtosis() - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let s = sfe(&[0.1; 7]).unwrap();
        assert_eq!(s.variance(), 0.0);
        assert_eq!(s.coeff_variation(), 0.0);
        assert_eq!(s.kurtosis(), 0.0);
        assert_eq!(s.skewness(), 0.0);
        assert_eq!(s.tilt(), 0.0);
        assert_eq!(s.range(), 0.0);
    }

    #[test]
    fn zero_mean_cv_is_zero() {
        let s = sfe(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mean(), 0.0);
        assert_eq!(s.coeff_variation(), 0.0);
        assert_eq!(s.std_dev(), 1.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(sfe(&[]), Err(CompressError::EmptyInput)));
    }
}
