use std::collections::HashMap;

use super::records::{Column, TrialRecord};
use crate::diagnostics::median;
use crate::error::{Error, Result};

/// Independent variable of an aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regressor {
    M,
    Delta,
}

impl Regressor {
    fn value(self, r: &TrialRecord) -> f64 {
        match self {
            Regressor::M => r.m as f64,
            Regressor::Delta => r.delta,
        }
    }

    fn column(self) -> Column {
        match self {
            Regressor::M => Column::M,
            Regressor::Delta => Column::Delta,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub x: f64,
    pub median: f64,
    pub mean: f64,
    pub count: usize,
}

/// Per-`x` aggregates of one group, sorted by `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub key: Vec<(Column, String)>,
    pub points: Vec<SeriesPoint>,
}

impl Series {
    pub fn label(&self) -> String {
        self.key
            .iter()
            .map(|(c, v)| format!("{c}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Groups records by `group_by` (groups in order of first appearance) and
/// reduces the errors at each regressor value to median and mean. Slope
/// fits and plots both consume this.
pub fn aggregate(records: &[TrialRecord], group_by: &[Column], regressor: Regressor) -> Vec<Series> {
    let mut order: Vec<Vec<String>> = Vec::new();
    let mut cells: HashMap<Vec<String>, Vec<(f64, Vec<f64>)>> = HashMap::new();
    for r in records {
        let key: Vec<String> = group_by
            .iter()
            .filter(|c| **c != regressor.column())
            .map(|c| c.value(r))
            .collect();
        let entry = cells.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        let x = regressor.value(r);
        match entry.iter_mut().find(|(v, _)| *v == x) {
            Some((_, errs)) => errs.push(r.error),
            None => entry.push((x, vec![r.error])),
        }
    }
    let cols: Vec<Column> = group_by
        .iter()
        .copied()
        .filter(|c| *c != regressor.column())
        .collect();
    order
        .into_iter()
        .map(|key| {
            let mut pts: Vec<SeriesPoint> = cells[&key]
                .iter()
                .map(|(x, errs)| SeriesPoint {
                    x: *x,
                    median: median(errs),
                    mean: errs.iter().sum::<f64>() / errs.len() as f64,
                    count: errs.len(),
                })
                .collect();
            pts.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series {
                key: cols.iter().copied().zip(key).collect(),
                points: pts,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `ln y` on `ln x`. `None` with fewer than two distinct
/// `x` or any nonpositive value.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<Fit> {
    if points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // a perfectly flat series is fitted exactly
    let r2 = if ss_tot <= f64::EPSILON * ss_res.max(1.0) && ss_res <= 1e-24 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(Fit {
        slope,
        intercept,
        r2,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeOptions {
    pub group_by: Vec<Column>,
    pub regressor: Regressor,
    /// Inclusive bounds on the regressor.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

impl Default for SlopeOptions {
    fn default() -> Self {
        SlopeOptions {
            group_by: vec![Column::Set, Column::Sensing, Column::Delta, Column::Dithered],
            regressor: Regressor::M,
            x_min: None,
            x_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupFit {
    pub series: Series,
    /// Fit of the median error; `None` when degenerate.
    pub median_fit: Option<Fit>,
    pub mean_fit: Option<Fit>,
    /// Why the group could not be fitted.
    pub flag: Option<String>,
}

/// Log-log slope of error against the regressor for each group.
///
/// Groups with fewer than three distinct regressor values are an error;
/// groups whose errors are all zero are flagged with undefined slope.
pub fn fit_loglog_slope(records: &[TrialRecord], opts: &SlopeOptions) -> Result<Vec<GroupFit>> {
    let in_range = |x: f64| {
        opts.x_min.map_or(true, |lo| x >= lo) && opts.x_max.map_or(true, |hi| x <= hi)
    };
    let mut fits = Vec::new();
    for mut series in aggregate(records, &opts.group_by, opts.regressor) {
        series.points.retain(|p| in_range(p.x));
        if series.points.len() < 3 {
            return Err(Error::invalid(format!(
                "group [{}] has {} distinct regressor values; at least 3 are needed",
                series.label(),
                series.points.len()
            )));
        }
        let med: Vec<(f64, f64)> = series.points.iter().map(|p| (p.x, p.median)).collect();
        let mean: Vec<(f64, f64)> = series.points.iter().map(|p| (p.x, p.mean)).collect();
        let median_fit = fit_loglog(&med);
        let mean_fit = fit_loglog(&mean);
        let flag = if series.points.iter().all(|p| p.median == 0.0 && p.mean == 0.0) {
            Some("all errors are zero; slope undefined".to_string())
        } else if median_fit.is_none() {
            Some("nonpositive median error; slope undefined".to_string())
        } else {
            None
        };
        fits.push(GroupFit {
            series,
            median_fit,
            mean_fit,
            flag,
        });
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(m: usize, delta: f64, error: f64, trial: usize) -> TrialRecord {
        TrialRecord {
            experiment_id: "x".into(),
            set: "sparse".into(),
            sensing: "gaussian".into(),
            n: 512,
            k_or_r: 4,
            m,
            delta,
            dithered: true,
            trial_index: trial,
            seed: 0,
            error,
        }
    }

    #[test]
    fn exact_power_law() {
        let f = fit_loglog(&[(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_errors_have_zero_slope() {
        let f = fit_loglog(&[(1.0, 0.3), (10.0, 0.3), (100.0, 0.3)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn median_and_mean_per_group() {
        let recs = vec![
            rec(10, 1.0, 1.0, 0),
            rec(10, 1.0, 3.0, 1),
            rec(10, 1.0, 100.0, 2),
            rec(20, 1.0, 2.0, 0),
            rec(10, 2.0, 5.0, 0),
        ];
        let s = aggregate(&recs, &SlopeOptions::default().group_by, Regressor::M);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].points[0].median, 3.0);
        assert!((s[0].points[0].mean - 104.0 / 3.0).abs() < 1e-12);
        assert_eq!(s[0].points[1].x, 20.0);
        assert_eq!(s[1].key[2], (Column::Delta, "2".to_string()));
    }

    #[test]
    fn slope_needs_three_points() {
        let recs = vec![rec(10, 1.0, 1.0, 0), rec(20, 1.0, 0.5, 0)];
        assert!(fit_loglog_slope(&recs, &SlopeOptions::default()).is_err());
    }

    #[test]
    fn zero_errors_are_flagged() {
        let recs: Vec<_> = [10, 20, 40].iter().map(|&m| rec(m, 1.0, 0.0, 0)).collect();
        let fits = fit_loglog_slope(&recs, &SlopeOptions::default()).unwrap();
        assert!(fits[0].median_fit.is_none());
        assert!(fits[0].flag.is_some());
    }

    #[test]
    fn range_restriction() {
        let recs: Vec<_> = [10usize, 20, 40, 80, 160]
            .iter()
            .map(|&m| rec(m, 1.0, if m <= 40 { 1.0 / m as f64 } else { 0.025 }, 0))
            .collect();
        let opts = SlopeOptions {
            x_min: Some(40.0),
            ..SlopeOptions::default()
        };
        let fit = fit_loglog_slope(&recs, &opts).unwrap()[0].median_fit.unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }
}
