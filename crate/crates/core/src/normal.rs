//! Standard normal distribution helpers.
#![allow(clippy::excessive_precision)] // published coefficients, kept digit for digit

/// Inverse standard-normal CDF.
///
/// Wichura's AS241 (PPND16) rational approximation; relative error is
/// about 1e-16 over the open unit interval.
pub fn probit(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_461,
    45_921.953_931_549_871,
    67_265.770_927_008_7,
    33_430.575_583_588_128,
    2_509.080_928_730_122_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_595,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_545_5,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545_3,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn probit_matches_reference_quantiles() {
        let n = Normal::standard();
        let mut p = 1e-12;
        while p < 1.0 {
            let ours = probit(p);
            let reference = n.inverse_cdf(p);
            assert!(
                (ours - reference).abs() <= 1.2e-9 * reference.abs().max(1.0),
                "p={p}: {ours} vs {reference}"
            );
            p = if p < 0.01 { p * 3.0 } else { p + 0.00731 };
        }
        assert_eq!(probit(0.5), 0.0);
    }

    #[test]
    fn probit_inverts_cdf() {
        for i in 1..2000 {
            let x = -7.0 + 12.0 * i as f64 / 2000.0;
            let back = probit(normal_cdf(x));
            assert!((back - x).abs() < 1e-8, "{x} -> {back}");
        }
    }

    #[test]
    fn probit_edges() {
        assert_eq!(probit(0.0), f64::NEG_INFINITY);
        assert_eq!(probit(1.0), f64::INFINITY);
        assert!(probit(1.5).is_nan());
        assert!((probit(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
    }
}
