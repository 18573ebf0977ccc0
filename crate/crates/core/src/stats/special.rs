//! Tail probabilities behind the significance tests.

pub use libm::erfc;
pub use statrs::function::beta::beta_reg;

/// Two-tailed Student-t p-value P(|T| ≥ |t|) with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Two-tailed standard normal p-value P(|Z| ≥ |z|).
pub fn normal_two_tailed(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_reg_closed_forms() {
        // I_x(1, b) = 1 - (1-x)^b ; I_x(a, 1) = x^a.
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.999] {
            for &p in &[0.5, 1.0, 2.5, 40.0] {
                assert!((beta_reg(1.0, p, x) - (1.0 - (1.0 - x).powf(p))).abs() < 1e-12);
                assert!((beta_reg(p, 1.0, x) - x.powf(p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn t_distribution_one_df_is_cauchy() {
        for &t in &[0.1f64, 1.0, 3.0, 50.0] {
            let expect = 1.0 - 2.0 * t.atan() / PI;
            assert!((student_t_two_tailed(t, 1.0) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_tail_values() {
        // Reference values of 2·(1 − Φ(z)).
        assert!((normal_two_tailed(1.959_963_984_540_054) - 0.05).abs() < 1e-12);
        assert!((normal_two_tailed(0.0) - 1.0).abs() < 1e-15);
        assert!((normal_two_tailed(3.0) - 0.002_699_796_063_260_207).abs() < 1e-13);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 1e-13);
    }
}
