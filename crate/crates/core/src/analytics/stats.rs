use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalyticsError;
use crate::qe::{QeTag, QeTagging};
use crate::scalar::Scalar;

/// Population mean and variance (divisor `n`).
pub fn mean_variance<F: Scalar>(values: &[F]) -> Option<(F, F)> {
    if values.is_empty() {
        return None;
    }
    let n = F::from_usize_lossy(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    let var = values.iter().map(|v| (*v - mean) * (*v - mean)).sum::<F>() / n;
    Some((mean, var))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest<F> {
    pub t: F,
    pub dof: usize,
    pub p_two_sided: F,
}

/// Student's paired t-test on `x - y`, sample standard deviation with
/// `n - 1`. All-equal nonzero differences have unbounded `t` and are
/// reported as [`AnalyticsError::ZeroVariance`] carrying `p = 0`.
pub fn paired_t_test<F: Scalar>(x: &[F], y: &[F]) -> Result<TTest<F>, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch {
            index: None,
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewSamples(n));
    }
    let d: Vec<F> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
    let nf = F::from_usize_lossy(n);
    let mean = d.iter().copied().sum::<F>() / nf;
    let ss = d.iter().map(|v| (*v - mean) * (*v - mean)).sum::<F>();
    let sd = (ss / F::from_usize_lossy(n - 1)).sqrt();
    let dof = n - 1;
    if sd.is_zero() {
        if mean.is_zero() {
            return Ok(TTest {
                t: F::zero(),
                dof,
                p_two_sided: F::one(),
            });
        }
        return Err(AnalyticsError::ZeroVariance {
            t: if mean > F::zero() { f64::INFINITY } else { f64::NEG_INFINITY },
            dof,
            p_two_sided: 0.0,
        });
    }
    let t = mean / (sd / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof >= 1");
    let p = (2.0 * dist.sf(t.to_f64_lossy().abs())).min(1.0);
    Ok(TTest {
        t,
        dof,
        p_two_sided: F::from_f64_lossy(p),
    })
}

/// Agreement of two OK/BAD annotations, OK being the positive class and
/// `gold` the reference. Counts plus percentages of all compared tags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfusionMatrix<F> {
    pub tp: F,
    pub fp: F,
    #[serde(rename = "fn")]
    pub fn_: F,
    pub tn: F,
    pub total: usize,
}

impl<F: Scalar> ConfusionMatrix<F> {
    /// Percentages rounded to two decimals: `(tp, fp, fn, tn)`.
    pub fn rounded(&self) -> (F, F, F, F) {
        let hundred = F::from_f64_lossy(100.0);
        let r = |v: F| (v * hundred).round() / hundred;
        (r(self.tp), r(self.fp), r(self.fn_), r(self.tn))
    }
}

pub fn confusion_matrix<F: Scalar>(
    gold: &[QeTagging],
    hyp: &[QeTagging],
) -> Result<ConfusionMatrix<F>, AnalyticsError> {
    if gold.len() != hyp.len() {
        return Err(AnalyticsError::LengthMismatch {
            index: None,
            left: gold.len(),
            right: hyp.len(),
        });
    }
    let mut counts = [0usize; 4];
    for (i, (g, h)) in gold.iter().zip(hyp).enumerate() {
        if g.len() != h.len() {
            return Err(AnalyticsError::LengthMismatch {
                index: Some(i),
                left: g.len(),
                right: h.len(),
            });
        }
        for (a, b) in g.iter().zip(h.iter()) {
            let slot = match (a, b) {
                (QeTag::Ok, QeTag::Ok) => 0,
                (QeTag::Bad, QeTag::Ok) => 1,
                (QeTag::Ok, QeTag::Bad) => 2,
                (QeTag::Bad, QeTag::Bad) => 3,
            };
            counts[slot] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(AnalyticsError::Empty("no tags to compare"));
    }
    let pct = |c: usize| F::from_usize_lossy(c) * F::from_f64_lossy(100.0) / F::from_usize_lossy(total);
    Ok(ConfusionMatrix {
        tp: pct(counts[0]),
        fp: pct(counts[1]),
        fn_: pct(counts[2]),
        tn: pct(counts[3]),
        total,
    })
}
