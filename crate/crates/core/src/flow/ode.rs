//! Explicit Runge–Kutta steppers for autonomous systems.

/// Classic fourth-order step of size `h`.
pub(crate) fn rk4_step<E>(
    rhs: &impl Fn(&[f64]) -> Result<Vec<f64>, E>,
    u: &[f64],
    h: f64,
) -> Result<Vec<f64>, E> {
    let k1 = rhs(u)?;
    let k2 = rhs(&offset(u, h / 2.0, &[(1.0, &k1)]))?;
    let k3 = rhs(&offset(u, h / 2.0, &[(1.0, &k2)]))?;
    let k4 = rhs(&offset(u, h, &[(1.0, &k3)]))?;
    Ok(offset(u, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]))
}

/// `u + h Σ c_i k_i`
fn offset(u: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut out = u.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step; returns the fifth-order solution and the scaled
/// error norm (accept when ≤ 1).
pub(crate) fn dp45_step<E>(
    rhs: &impl Fn(&[f64]) -> Result<Vec<f64>, E>,
    u: &[f64],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, f64), E> {
    debug_assert_eq!(C[0], 0.0);
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for row in A {
        let terms: Vec<(f64, &Vec<f64>)> = row.iter().zip(&k).map(|(&a, ki)| (a, ki)).collect();
        let stage = offset(u, h, &terms);
        k.push(rhs(&stage)?);
    }
    let high = offset(u, h, &B5.iter().zip(&k).map(|(&b, ki)| (b, ki)).collect::<Vec<_>>());
    let mut sum = 0.0;
    for i in 0..u.len() {
        let err: f64 = (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>() * h;
        let scale = atol + rtol * u[i].abs().max(high[i].abs());
        sum += (err / scale).powi(2);
    }
    Ok((high, (sum / u.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(u: &[f64]) -> Result<Vec<f64>, ()> {
        Ok(vec![-u[0]])
    }

    #[test]
    fn rk4_is_fourth_order() {
        let run = |h: f64| {
            let mut u = vec![1.0];
            for _ in 0..(1.0 / h).round() as usize {
                u = rk4_step(&decay, &u, h).unwrap();
            }
            (u[0] - (-1f64).exp()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn dp45_error_estimate_is_small_for_small_steps() {
        let (u, err) = dp45_step(&decay, &[1.0], 1e-2, 1e-10, 1e-12).unwrap();
        assert!((u[0] - (-0.01f64).exp()).abs() < 1e-14);
        assert!(err < 1.0);
    }

    #[test]
    fn tableau_rows_are_consistent() {
        for (row, c) in A.iter().zip(C) {
            assert!((row.iter().sum::<f64>() - c).abs() < 1e-15);
        }
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
