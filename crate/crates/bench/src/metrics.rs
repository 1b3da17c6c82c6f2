//! Error norms over an evaluation set.

use crate::BenchError;

fn check(numeric: &[f64], exact: &[f64]) -> Result<(), BenchError> {
    if numeric.len() != exact.len() || exact.is_empty() {
        return Err(BenchError::LengthMismatch {
            numeric: numeric.len(),
            exact: exact.len(),
        });
    }
    Ok(())
}

/// `√Σ(û − u)² / √Σu²`
pub fn l2_relative_error(numeric: &[f64], exact: &[f64]) -> Result<f64, BenchError> {
    check(numeric, exact)?;
    let den: f64 = exact.iter().map(|u| u * u).sum();
    if den == 0.0 {
        return Err(BenchError::ZeroReference);
    }
    let num: f64 = numeric.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((num / den).sqrt())
}

fn pointwise(numeric: &[f64], exact: &[f64]) -> Result<Vec<f64>, BenchError> {
    check(numeric, exact)?;
    let peak = exact.iter().fold(0.0, |m: f64, u| m.max(u.abs()));
    if peak == 0.0 {
        return Err(BenchError::ZeroReference);
    }
    let floor = 1e-14 * peak;
    Ok(numeric
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs() / b.abs().max(floor))
        .collect())
}

/// Mean of `|û − u| / max(|u|, 1e-14‖u‖∞)`.
pub fn average_relative_error(numeric: &[f64], exact: &[f64]) -> Result<f64, BenchError> {
    let e = pointwise(numeric, exact)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

/// Root mean square of the pointwise relative errors.
pub fn rms_relative_error(numeric: &[f64], exact: &[f64]) -> Result<f64, BenchError> {
    let e = pointwise(numeric, exact)?;
    Ok((e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn l2_examples() {
        let u = [1.0, -2.0, 3.0, 0.5];
        assert_eq!(l2_relative_error(&u, &u).unwrap(), 0.0);
        let twice: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        assert_relative_eq!(l2_relative_error(&twice, &u).unwrap(), 1.0);
        let eps = 1e-3;
        let shifted: Vec<f64> = u.iter().map(|v| v + eps).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(l2_relative_error(&shifted, &u).unwrap(), eps * 2.0 / norm, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(l2_relative_error(&[1.0], &[0.0]), Err(BenchError::ZeroReference)));
        assert!(matches!(l2_relative_error(&[1.0], &[1.0, 2.0]), Err(BenchError::LengthMismatch { .. })));
        assert!(l2_relative_error(&[], &[]).is_err());
        assert!(average_relative_error(&[0.0], &[0.0]).is_err());
    }

    #[test]
    fn pointwise_norms() {
        let u = [1.0, 2.0];
        let n = [1.1, 1.8];
        assert_relative_eq!(average_relative_error(&n, &u).unwrap(), 0.1, max_relative = 1e-12);
        assert_relative_eq!(rms_relative_error(&n, &u).unwrap(), 0.1, max_relative = 1e-12);
    }
}
