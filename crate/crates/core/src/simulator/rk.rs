//! Explicit Runge–Kutta steppers that land exactly on requested sample times.

use super::{Method, SimError, SolverConfig};

/// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
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

/// Integrates y' = f(t, y) from t = 0 and calls `record` at every sample
/// time with the state there.
pub(crate) fn integrate<F, R>(
    f: &mut F,
    y0: Vec<f64>,
    samples: &[f64],
    t_end: f64,
    cfg: &SolverConfig,
    record: &mut R,
) -> Result<(), SimError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    R: FnMut(f64, &[f64]) -> Result<(), SimError>,
{
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFiniteState { t: 0.0 });
    }
    match cfg.method {
        Method::Rk4 { step } => rk4(f, y0, samples, step, record),
        Method::DormandPrince => dopri(f, y0, samples, t_end, cfg, record),
    }
}

fn rk4<F, R>(f: &mut F, mut y: Vec<f64>, samples: &[f64], step: f64, record: &mut R) -> Result<(), SimError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    R: FnMut(f64, &[f64]) -> Result<(), SimError>,
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 4];
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    for &ts in samples {
        while t < ts {
            // snap to the sample when within rounding of it
            let h = if ts - t <= step * (1.0 + 1e-9) { ts - t } else { step };
            f(t, &y, &mut k[0]);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k[0][i];
            }
            f(t + 0.5 * h, &tmp, &mut k[1]);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k[1][i];
            }
            f(t + 0.5 * h, &tmp, &mut k[2]);
            for i in 0..n {
                tmp[i] = y[i] + h * k[2][i];
            }
            f(t + h, &tmp, &mut k[3]);
            for i in 0..n {
                y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            t = if h == ts - t { ts } else { t + h };
            if y.iter().any(|v| !v.is_finite()) {
                return Err(SimError::NonFiniteState { t });
            }
        }
        record(ts, &y)?;
    }
    Ok(())
}

fn dopri<F, R>(f: &mut F, mut y: Vec<f64>, samples: &[f64], t_end: f64, cfg: &SolverConfig, record: &mut R) -> Result<(), SimError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    R: FnMut(f64, &[f64]) -> Result<(), SimError>,
{
    let n = y.len();
    let h_max = cfg.h_max_for(t_end);
    let mut h = cfg.h_init.unwrap_or(h_max * 0.01).min(h_max);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = 0.0;
    let mut steps = 0usize;
    for &ts in samples {
        while t < ts {
            steps += 1;
            if steps > cfg.max_steps {
                return Err(SimError::StepLimit { t });
            }
            let remaining = ts - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            if h_try <= 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(SimError::StepSizeUnderflow { t });
            }

            f(t, &y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h_try * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * h_try, &tmp, &mut k[s]);
            }
            let mut err: f64 = 0.0;
            let mut finite = true;
            for i in 0..n {
                let mut hi = y[i];
                let mut lo = y[i];
                for s in 0..7 {
                    hi += h_try * B5[s] * k[s][i];
                    lo += h_try * B4[s] * k[s][i];
                }
                y_new[i] = hi;
                if !hi.is_finite() || !lo.is_finite() {
                    finite = false;
                    break;
                }
                let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(hi.abs());
                err = err.max((hi - lo).abs() / scale);
            }
            if !finite || !err.is_finite() {
                h = h_try * 0.2;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(SimError::StepSizeUnderflow { t });
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if clipped { ts } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                // a clipped step says nothing about the natural step size
                if !clipped || factor < 1.0 {
                    h = (h_try * factor).min(h_max);
                }
            } else {
                h = h_try * factor.min(1.0);
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(SimError::StepSizeUnderflow { t });
                }
            }
        }
        record(ts, &y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(cfg: &SolverConfig, samples: &[f64], y0: f64, mut f: impl FnMut(f64, f64) -> f64) -> Result<Vec<f64>, SimError> {
        let mut out = Vec::new();
        let t_end = *samples.last().unwrap();
        integrate(
            &mut |t, y: &[f64], dy: &mut [f64]| dy[0] = f(t, y[0]),
            vec![y0],
            samples,
            t_end,
            cfg,
            &mut |_, y: &[f64]| {
                out.push(y[0]);
                Ok(())
            },
        )?;
        Ok(out)
    }

    #[test]
    fn exponential_decay_adaptive() {
        let cfg = SolverConfig::default();
        let samples: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let out = run(&cfg, &samples, 1.0, |_, y| -y).unwrap();
        for (t, y) in samples.iter().zip(&out) {
            assert!((y - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let cfg = SolverConfig { method: Method::Rk4 { step: h }, ..SolverConfig::default() };
            let out = run(&cfg, &[2.0], 1.0, |t, y| y * t.cos()).unwrap();
            (out[0] - 2f64.sin().exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn blow_up_reports_frontier_time() {
        // y' = y², y(0) = 1 blows up at t = 1
        let cfg = SolverConfig::default();
        match run(&cfg, &[2.0], 1.0, |_, y| y * y) {
            Err(SimError::StepSizeUnderflow { t }) => assert!((t - 1.0).abs() < 1e-3, "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lands_exactly_on_samples() {
        let cfg = SolverConfig::default();
        let out = run(&cfg, &[0.0, 0.3, 1.7], 0.0, |_, _| 1.0).unwrap();
        for (y, t) in out.iter().zip([0.0, 0.3, 1.7]) {
            assert!((y - t).abs() < 1e-14);
        }
    }
}
