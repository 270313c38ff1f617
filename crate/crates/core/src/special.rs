//! Double-precision special functions backing the p-value computations.
//!
//! Everything here is implemented in-repo (Lanczos log-gamma, regularized
//! incomplete gamma via series/continued fraction, regularized incomplete
//! beta via continued fraction) so the statistics modules carry no heavy
//! numeric dependency. Verified against high-precision references in the
//! unit tests; target accuracy is 1e-10 relative for the chi-squared and
//! erfc paths and 1e-8 for the Student-t path over the argument ranges the
//! tests exercise.
//!
//! Out-of-domain arguments return NaN, mirroring the libm convention.

use crate::num::{real, Real};

const MAX_ITER: usize = 500;

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma<F: Real>(x: F) -> F {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let half: F = real(0.5);
    if x < half {
        // Reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        let pi = F::from(std::f64::consts::PI).unwrap();
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let g: F = real(7.0);
    let z = x - F::one();
    let mut acc: F = real(COEFFS[0]);
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += real::<F>(c) / (z + real(i as f64));
    }
    let t = z + g + half;
    let ln_sqrt_2pi: F = real(0.918_938_533_204_672_8); // ln√(2π)
    ln_sqrt_2pi + (z + half) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x), by series expansion.
fn gamma_p_series<F: Real>(a: F, x: F) -> F {
    let mut ap = a;
    let mut sum = a.recip();
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += F::one();
        del = del * x / ap;
        sum += del;
        if del.abs() < sum.abs() * F::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x), by continued fraction
/// (modified Lentz).
fn gamma_q_cf<F: Real>(a: F, x: F) -> F {
    let fpmin = F::min_positive_value() / F::epsilon();
    let mut b = x + F::one() - a;
    let mut c = fpmin.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -real::<F>(i as f64) * (real::<F>(i as f64) - a);
        b += real(2.0);
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = d.recip();
        let del = d * c;
        h *= del;
        if (del - F::one()).abs() < F::epsilon() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<F: Real>(a: F, x: F) -> F {
    if a <= F::zero() || x < F::zero() {
        return F::nan();
    }
    if x == F::zero() {
        return F::zero();
    }
    if x < a + F::one() {
        gamma_p_series(a, x)
    } else {
        F::one() - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q<F: Real>(a: F, x: F) -> F {
    if a <= F::zero() || x < F::zero() {
        return F::nan();
    }
    if x == F::zero() {
        return F::one();
    }
    if x < a + F::one() {
        F::one() - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Complementary error function.
pub fn erfc<F: Real>(x: F) -> F {
    let half: F = real(0.5);
    if x >= F::zero() {
        gamma_q(half, x * x)
    } else {
        real::<F>(2.0) - gamma_q(half, x * x)
    }
}

/// Continued fraction for the regularized incomplete beta.
fn beta_cf<F: Real>(a: F, b: F, x: F) -> F {
    let fpmin = F::min_positive_value() / F::epsilon();
    let one = F::one();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < fpmin {
        d = fpmin;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf: F = real(m as f64);
        let m2 = mf + mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = d.recip();
        h = h * d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = d.recip();
        let del = d * c;
        h *= del;
        if (del - one).abs() < F::epsilon() {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn beta_inc<F: Real>(a: F, b: F, x: F) -> F {
    if a <= F::zero() || b <= F::zero() || x < F::zero() || x > F::one() {
        return F::nan();
    }
    if x == F::zero() {
        return F::zero();
    }
    if x == F::one() {
        return F::one();
    }
    let one = F::one();
    let bt = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (one - x).ln()).exp();
    if x < (a + one) / (a + b + real(2.0)) {
        bt * beta_cf(a, b, x) / a
    } else {
        one - bt * beta_cf(b, a, one - x) / b
    }
}

/// Survival function of the chi-squared distribution with `dof` degrees of
/// freedom: P(X > x).
pub fn chi_squared_sf<F: Real>(x: F, dof: F) -> F {
    if x < F::zero() || dof <= F::zero() {
        return F::nan();
    }
    gamma_q(dof * real(0.5), x * real(0.5))
}

/// Two-tailed p-value of a Student-t statistic with (possibly fractional)
/// degrees of freedom.
pub fn student_t_two_tailed<F: Real>(t: F, dof: F) -> F {
    if dof <= F::zero() {
        return F::nan();
    }
    let x = dof / (dof + t * t);
    beta_inc(dof * real(0.5), real(0.5), x)
}

/// Two-tailed p-value of a standard-normal z statistic.
pub fn normal_two_tailed<F: Real>(z: F) -> F {
    erfc(z.abs() / real(std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rel(got: f64, want: f64, tol: f64) {
        let err = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        assert!(
            err <= tol,
            "got {got:e}, want {want:e}, rel err {err:e} > {tol:e}"
        );
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_rel(ln_gamma(1.0_f64), 0.0, 1e-13);
        assert_rel(ln_gamma(0.5_f64), 0.5723649429247001, 1e-13);
        assert_rel(ln_gamma(10.0_f64), 12.801827480081469, 1e-13);
        // Γ(5) = 24
        assert_rel(ln_gamma(5.0_f64).exp(), 24.0, 1e-12);
    }

    #[test]
    fn chi_squared_sf_reference_values() {
        // High-precision references computed with 50-digit arithmetic.
        let cases: &[(f64, f64, f64)] = &[
            (0.001, 1.0, 0.974_772_879_369_960_4),
            (0.5, 1.0, 0.479_500_122_186_953_5),
            (1.0, 1.0, 0.3173105078629141),
            (3.841458820694124, 1.0, 0.050_000_000_000_000_06),
            (4.0, 1.0, 0.045_500_263_896_358_42),
            (10.0, 1.0, 0.0015654022580025497),
            (25.0, 1.0, 5.733_031_437_583_878e-7),
            (100.0, 1.0, 1.523_970_604_832_105e-23),
            (1.0, 2.0, 0.606_530_659_712_633_4),
            (5.0, 2.0, 0.082_084_998_623_898_8),
            (3.0, 5.0, 0.699_985_835_878_627_5),
            (20.0, 5.0, 0.0012497305630313754),
            (5.0, 10.0, 0.891_178_018_914_151_3),
            (50.0, 10.0, 2.6690834249044956e-7),
        ];
        for &(x, k, want) in cases {
            assert_rel(chi_squared_sf(x, k), want, 1e-10);
        }
        // Far tail underflows to zero in f64; must not panic or go negative.
        let far = chi_squared_sf(15000.0_f64, 1.0);
        assert!((0.0..1e-300).contains(&far));
    }

    #[test]
    fn erfc_reference_values() {
        let cases: &[(f64, f64)] = &[
            (0.001, 0.998_871_621_209_030_7),
            (0.1, 0.887_537_083_981_715),
            (0.5, 0.479_500_122_186_953_5),
            (1.0, 0.15729920705028513),
            (2.0, 0.004_677_734_981_047_266),
            (3.0, 2.209_049_699_858_544e-5),
            (5.0, 1.537_459_794_428_035e-12),
            (10.0, 2.088_487_583_762_545e-45),
            (26.0, 5.663_192_408_856_143e-296),
            (-0.5, 1.5204998778130465),
            (-2.0, 1.9953222650189527),
        ];
        for &(x, want) in cases {
            assert_rel(erfc(x), want, 1e-10);
        }
    }

    #[test]
    fn student_t_reference_values() {
        let cases: &[(f64, f64, f64)] = &[
            (1.0, 8.0, 0.346_593_507_087_334_3),
            // published two-sided 5% critical value at 10 dof
            (2.2281388519649385, 10.0, 0.050_000_000_001_808_67),
            (0.001, 2.0, 0.999_292_893_395_590_1),
            (0.5, 1.0, 0.704_832_764_699_133_5),
            (2.0, 5.0, 0.10193947882985836),
            (5.0, 30.0, 2.3296685467007795e-5),
            (12.0, 3.0, 0.0012450158007893367),
            (3.0, 100.0, 0.0034079153433294495),
            (1.0, 1.0, 0.5),
        ];
        for &(t, df, want) in cases {
            assert_rel(student_t_two_tailed(t, df), want, 1e-8);
            // symmetry in the sign of t
            assert_rel(student_t_two_tailed(-t, df), want, 1e-8);
        }
    }

    #[test]
    fn gamma_pq_complementarity() {
        for &(a, x) in &[
            (0.5, 0.3),
            (1.0, 2.0),
            (2.5, 1.0),
            (10.0, 12.0),
            (30.0, 25.0),
        ] {
            let p: f64 = gamma_p(a, x);
            let q: f64 = gamma_q(a, x);
            assert_rel(p + q, 1.0, 1e-12);
        }
    }

    #[test]
    fn normal_two_tailed_matches_erfc() {
        let p: f64 = normal_two_tailed(1.959963984540054);
        assert_rel(p, 0.05, 1e-12);
        assert_eq!(normal_two_tailed(0.0_f64), 1.0);
    }

    #[test]
    fn out_of_domain_yields_nan() {
        assert!(chi_squared_sf(-1.0_f64, 1.0).is_nan());
        assert!(gamma_p(-0.5_f64, 1.0).is_nan());
        assert!(beta_inc(1.0_f64, 1.0, 2.0).is_nan());
    }

    #[test]
    fn works_at_f32() {
        let p: f32 = chi_squared_sf(4.0_f32, 1.0);
        assert!((p - 0.0455).abs() < 1e-3);
    }
}
