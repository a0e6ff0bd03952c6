//! Scaling-exponent estimation from benchmark CSVs.
//!
//! For each backend in the file, the per-size repetitions collapse to their
//! median, and a least-squares line through the (ln size, ln median) points
//! gives the empirical exponent: slope ≈ 1 is linear scaling, ≈ 2 quadratic.
//! R² reports how well a pure power law explains the medians. Rows with an
//! empty seconds column (cells that did not finish) are skipped.

use std::collections::BTreeMap;

use crate::bench::CSV_HEADER;

#[derive(Debug, Clone, PartialEq)]
pub struct FitLine {
    pub backend: String,
    pub slope: f64,
    pub r_squared: f64,
    /// Number of distinct sizes behind the fit.
    pub points: usize,
}

impl std::fmt::Display for FitLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} slope={:.4} r2={:.4} sizes={}",
            self.backend, self.slope, self.r_squared, self.points
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("backend \"{backend}\" has {points} size(s) with data; need at least 3")]
    InsufficientData { backend: String, points: usize },
    #[error("cannot read CSV: {0}")]
    Source(#[from] std::io::Error),
}

/// Fits one scaling exponent per backend from benchmark CSV text.
/// Lines come back sorted by backend name.
pub fn fit_scaling(csv: &str) -> Result<Vec<FitLine>, FitError> {
    let mut lines = csv.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => {
            return Err(FitError::Parse {
                line: 1,
                message: format!("expected header \"{CSV_HEADER}\""),
            })
        }
    }

    // backend → size → seconds of every finished rep
    let mut series: BTreeMap<String, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(FitError::Parse {
                line,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let size: u64 = fields[2].parse().map_err(|_| FitError::Parse {
            line,
            message: format!("invalid size \"{}\"", fields[2]),
        })?;
        if fields[4].is_empty() {
            continue; // did-not-finish row
        }
        let seconds: f64 = fields[4].parse().map_err(|_| FitError::Parse {
            line,
            message: format!("invalid seconds \"{}\"", fields[4]),
        })?;
        if seconds <= 0.0 {
            return Err(FitError::Parse {
                line,
                message: "seconds must be positive".into(),
            });
        }
        series
            .entry(fields[0].to_owned())
            .or_default()
            .entry(size)
            .or_default()
            .push(seconds);
    }

    let mut fits = Vec::new();
    for (backend, by_size) in series {
        if by_size.len() < 3 {
            return Err(FitError::InsufficientData {
                backend,
                points: by_size.len(),
            });
        }
        let points: Vec<(f64, f64)> = by_size
            .into_iter()
            .map(|(size, mut reps)| ((size as f64).ln(), median(&mut reps).ln()))
            .collect();
        let (slope, r_squared) = least_squares(&points);
        let count = points.len();
        fits.push(FitLine {
            backend,
            slope,
            r_squared,
            points: count,
        });
    }
    Ok(fits)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Slope and R² of the least-squares line through the points.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for &(x, y) in points {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    let slope = cov / var_x;
    let r_squared = if var_y == 0.0 {
        1.0
    } else {
        (cov * cov) / (var_x * var_y)
    };
    (slope, r_squared)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(rule: impl Fn(u64) -> f64) -> String {
        let mut csv = format!("{CSV_HEADER}\n");
        for size in [100u64, 1000, 10_000, 100_000] {
            for rep in 1..=3 {
                // jitter one rep hard in each direction; the median ignores it
                let factor = match rep {
                    1 => 1.0,
                    2 => 0.2,
                    _ => 5.0,
                };
                csv.push_str(&format!("b,flatten,{size},{rep},{}\n", rule(size) * factor));
            }
        }
        csv
    }

    #[test]
    fn linear_series_fits_slope_one() {
        let fits = fit_scaling(&synthetic(|n| 3e-6 * n as f64)).unwrap();
        assert_eq!(fits.len(), 1);
        assert!((fits[0].slope - 1.0).abs() < 0.01, "{}", fits[0]);
        assert!(fits[0].r_squared > 0.999);
    }

    #[test]
    fn quadratic_series_fits_slope_two() {
        let fits = fit_scaling(&synthetic(|n| 1e-9 * (n as f64).powi(2))).unwrap();
        assert!((fits[0].slope - 2.0).abs() < 0.01, "{}", fits[0]);
    }

    #[test]
    fn dnf_rows_are_skipped_and_backends_split() {
        let csv = format!(
            "{CSV_HEADER}\na,f,10,1,0.1\na,f,20,1,0.2\na,f,40,1,0.4\n\
             d,f,10,1,0.1\nd,f,20,1,0.2\nd,f,40,1,0.4\nd,f,80,1,\n"
        );
        let fits = fit_scaling(&csv).unwrap();
        assert_eq!(fits.len(), 2);
        assert_eq!(fits[0].backend, "a");
        assert_eq!(fits[1].backend, "d");
        assert_eq!(fits[1].points, 3); // the DNF size contributes nothing
    }

    #[test]
    fn too_few_sizes_is_an_error() {
        let csv = format!("{CSV_HEADER}\nb,f,10,1,0.1\nb,f,20,1,0.2\n");
        assert!(matches!(
            fit_scaling(&csv),
            Err(FitError::InsufficientData { points: 2, .. })
        ));
    }

    #[test]
    fn header_and_field_errors_carry_line_numbers() {
        assert!(matches!(
            fit_scaling("nope\n"),
            Err(FitError::Parse { line: 1, .. })
        ));
        let csv = format!("{CSV_HEADER}\nb,f,10,1\n");
        assert!(matches!(
            fit_scaling(&csv),
            Err(FitError::Parse { line: 2, .. })
        ));
        let csv = format!("{CSV_HEADER}\nb,f,10,1,-0.5\n");
        assert!(matches!(
            fit_scaling(&csv),
            Err(FitError::Parse { line: 2, .. })
        ));
    }
}
