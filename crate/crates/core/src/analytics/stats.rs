use serde::{Deserialize, Serialize};

use super::special::{chi2_sf, kolmogorov_sf, student_t_two_sided};
use super::AnalyticsError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatTest {
    WelchT,
    StudentT,
    KS2Sample,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StatTestResult<T> {
    pub test: StatTest,
    pub statistic: T,
    pub p_value: T,
    /// Degrees of freedom for the t and chi-square tests.
    pub df: Option<T>,
    /// Sample sizes, or the table total for chi-square in `n_a`.
    pub n_a: usize,
    pub n_b: usize,
}

/// Variance estimate used by the t-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite df.
    #[default]
    Welch,
    /// Pooled variance, `n_a + n_b - 2` df.
    Student,
}

fn mean_var<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_count(xs.len());
    let mean = xs.iter().fold(T::zero(), |s, &x| s + x) / n;
    let ss = xs.iter().fold(T::zero(), |s, &x| s + (x - mean) * (x - mean));
    (mean, ss / (n - T::one()))
}

fn clamp_p<T: Scalar>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

pub fn welch_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<StatTestResult<T>, AnalyticsError> {
    t_test(a, b, TTestKind::Welch)
}

/// Two-sided two-sample t-test.
pub fn t_test<T: Scalar>(a: &[T], b: &[T], kind: TTestKind) -> Result<StatTestResult<T>, AnalyticsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalyticsError::SampleTooSmall {
            needed: 2,
            got: a.len().min(b.len()),
        });
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == T::zero() && vb == T::zero() {
        return Err(AnalyticsError::DegenerateSample);
    }
    let (na, nb) = (T::from_count(a.len()), T::from_count(b.len()));
    let one = T::one();
    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            (se2, se2 * se2 / (qa * qa / (na - one) + qb * qb / (nb - one)))
        }
        TTestKind::Student => {
            let df = na + nb - T::lit(2.0);
            let pooled = ((na - one) * va + (nb - one) * vb) / df;
            (pooled * (one / na + one / nb), df)
        }
    };
    let t = (ma - mb) / se2.sqrt();
    Ok(StatTestResult {
        test: match kind {
            TTestKind::Welch => StatTest::WelchT,
            TTestKind::Student => StatTest::StudentT,
        },
        statistic: t,
        p_value: clamp_p(student_t_two_sided(t, df)),
        df: Some(df),
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Largest gap between the two empirical CDFs.
pub fn ks_statistic<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut a: Vec<T> = a.to_vec();
    let mut b: Vec<T> = b.to_vec();
    let cmp = |x: &T, y: &T| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal);
    a.sort_by(cmp);
    b.sort_by(cmp);
    let (na, nb) = (T::from_count(a.len()), T::from_count(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let gap = (T::from_count(i) / na - T::from_count(j) / nb).abs();
        if gap > d {
            d = gap;
        }
    }
    d
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value at
/// `λ = sqrt(n_a n_b / (n_a + n_b)) D`.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<StatTestResult<T>, AnalyticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalyticsError::SampleTooSmall { needed: 1, got: 0 });
    }
    let d = ks_statistic(a, b);
    let (na, nb) = (T::from_count(a.len()), T::from_count(b.len()));
    let en = na * nb / (na + nb);
    Ok(StatTestResult {
        test: StatTest::KS2Sample,
        statistic: d,
        p_value: clamp_p(kolmogorov_sf(en.sqrt() * d)),
        df: None,
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Pearson chi-square test of independence on an `r × c` table.
pub fn chi_square_test<T: Scalar>(observed: &[Vec<T>]) -> Result<StatTestResult<T>, AnalyticsError> {
    let r = observed.len();
    let c = observed.first().map_or(0, Vec::len);
    if r < 2 || c < 2 || observed.iter().any(|row| row.len() != c) {
        return Err(AnalyticsError::BadTable { rows: r, cols: c });
    }
    let row_sums: Vec<T> = observed.iter().map(|row| row.iter().fold(T::zero(), |s, &x| s + x)).collect();
    let col_sums: Vec<T> = (0..c).map(|j| observed.iter().fold(T::zero(), |s, row| s + row[j])).collect();
    let total = row_sums.iter().fold(T::zero(), |s, &x| s + x);
    let mut stat = T::zero();
    for (i, row) in observed.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            if !(e > T::zero()) {
                return Err(AnalyticsError::ZeroExpected { row: i, col: j });
            }
            stat = stat + (o - e) * (o - e) / e;
        }
    }
    let df = T::from_count((r - 1) * (c - 1));
    Ok(StatTestResult {
        test: StatTest::ChiSquare,
        statistic: stat,
        p_value: clamp_p(chi2_sf(stat, df)),
        df: Some(df),
        n_a: total.to_usize().unwrap_or(0),
        n_b: 0,
    })
}
