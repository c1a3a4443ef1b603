use crate::error::{Error, Result};

/// Natural log of the stopping threshold
/// f_t(x) = (x ⌈x ln t + 1⌉ 2e / K)^K e^(1 - x), K = n_actions (joint_size - 1).
///
/// Returns `-inf` for `x = +inf`.
pub fn ln_threshold_f(x: f64, t: u64, n_actions: usize, joint_size: usize) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold needs x > 0, got {x}"
        )));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("threshold needs t >= 1".into()));
    }
    let k = n_actions as f64 * (joint_size as f64 - 1.0);
    if k <= 0.0 {
        return Err(Error::InvalidArgument(
            "threshold needs at least one action and a joint domain of two or more cells".into(),
        ));
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let ceil = (x * (t as f64).ln() + 1.0).ceil();
    Ok(k * (x * ceil * 2.0 * std::f64::consts::E / k).ln() + 1.0 - x)
}

pub fn threshold_f(x: f64, t: u64, n_actions: usize, joint_size: usize) -> Result<f64> {
    ln_threshold_f(x, t, n_actions, joint_size).map(f64::exp)
}

/// The stopping rule: `d_t` lies in the validity region `d_t >= K` and
/// `f_t(d_t) < delta`.
pub fn should_stop(d: f64, t: u64, n_actions: usize, joint_size: usize, delta: f64) -> bool {
    let k = n_actions as f64 * (joint_size as f64 - 1.0);
    if !(d >= k) || d <= 0.0 {
        return false;
    }
    match ln_threshold_f(d, t, n_actions, joint_size) {
        Ok(lf) => lf < delta.ln(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_value() {
        // K = 2 from one action over a 3-cell domain.
        let f = threshold_f(5.0, 100, 1, 3).unwrap();
        let want = 15625.0 * (-2.0f64).exp();
        assert!((f - want).abs() < 1e-9 * want);
        assert!((f - 2114.6).abs() < 0.1);
    }

    #[test]
    fn decays_for_large_x() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let x = 50.0 + 10.0 * i as f64;
            let lf = ln_threshold_f(x, 1000, 1, 3).unwrap();
            assert!(lf <= prev);
            prev = lf;
        }
        assert!(threshold_f(2000.0, 1000, 1, 3).unwrap() < 1e-100);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(threshold_f(0.0, 10, 1, 3).is_err());
        assert!(threshold_f(-1.0, 10, 1, 3).is_err());
        assert!(threshold_f(1.0, 0, 1, 3).is_err());
    }

    #[test]
    fn stop_rule_needs_validity_region() {
        // K = 2 * 15 = 30; a d below 30 never stops even if f is small.
        assert!(!should_stop(29.0, 10, 2, 16, 0.5));
        assert!(should_stop(f64::INFINITY, 10, 2, 16, 0.1));
        assert!(!should_stop(0.0, 10, 2, 16, 0.1));
    }
}
