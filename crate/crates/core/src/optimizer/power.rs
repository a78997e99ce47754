use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result, C64};

/// Water-filling power split and its water level `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub power: Vec<f64>,
    pub water_level: f64,
}

/// Water-filling over parallel channels with gains `|h_n|^2 / sigma^2`:
/// `p_n = max(0, mu - 1/gain_n)` with `sum p_n = total_power`.
///
/// The water level is solved exactly: channels are sorted by `1/gain` and the
/// active set grows while the running level stays above the next floor.
pub fn water_filling(gains: &[f64], total_power: f64) -> Result<PowerAllocation> {
    if !(total_power > 0.0) {
        return Err(Error::NonPositiveInput("total power"));
    }
    if gains.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::InvalidParameter("gains must be finite and non-negative".into()));
    }
    let mut floors: Vec<f64> = gains.iter().filter(|&&g| g > 0.0).map(|g| 1.0 / g).collect();
    if floors.is_empty() {
        return Err(Error::AllZeroGains);
    }
    floors.sort_by(|a, b| a.total_cmp(b));

    let mut level = 0.0;
    let mut acc = 0.0;
    for (k, &floor) in floors.iter().enumerate() {
        let candidate = (total_power + acc + floor) / (k + 1) as f64;
        if candidate <= floor {
            break;
        }
        acc += floor;
        level = candidate;
    }
    let power = gains
        .iter()
        .map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    Ok(PowerAllocation {
        power,
        water_level: level,
    })
}

/// Average spectral efficiency `(1/N) sum_n log2(1 + p_n |h_n|^2 / sigma^2)` in bit/s/Hz.
///
/// Panics if `h` and `p` differ in length.
pub fn average_rate(h: &[C64], p: &[f64], sigma2: f64) -> f64 {
    assert_eq!(h.len(), p.len(), "one power per subcarrier");
    if h.is_empty() {
        return 0.0;
    }
    let total: f64 = h
        .iter()
        .zip(p)
        .map(|(h, p)| Float::ln_1p(p * h.norm_sqr() / sigma2))
        .sum();
    total / (h.len() as f64 * core::f64::consts::LN_2)
}

/// Concavity bound `log2(1 + (1/N) sum_n p_n |h_n|^2 / sigma^2)` on [`average_rate`].
pub fn jensen_bound(h: &[C64], p: &[f64], sigma2: f64) -> f64 {
    assert_eq!(h.len(), p.len(), "one power per subcarrier");
    if h.is_empty() {
        return 0.0;
    }
    let mean = h.iter().zip(p).map(|(h, p)| p * h.norm_sqr() / sigma2).sum::<f64>() / h.len() as f64;
    Float::ln_1p(mean) / core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn worked_two_channel_example() {
        let alloc = water_filling(&[1.0, 1.0 / 3.0], 4.0).unwrap();
        assert_relative_eq!(alloc.power[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(alloc.power[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(alloc.water_level, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn equal_gains_split_evenly() {
        let alloc = water_filling(&[2.5; 8], 4.0).unwrap();
        assert!(alloc.power.iter().all(|&p| (p - 0.5).abs() < 1e-14));
        assert_eq!(water_filling(&[0.3], 7.0).unwrap().power, vec![7.0]);
    }

    #[test]
    fn weak_channels_are_switched_off() {
        let alloc = water_filling(&[10.0, 0.01, 0.0], 1.0).unwrap();
        assert_eq!(alloc.power[1], 0.0);
        assert_eq!(alloc.power[2], 0.0);
        assert_relative_eq!(alloc.power[0], 1.0);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(water_filling(&[0.0, 0.0], 1.0).unwrap_err(), Error::AllZeroGains);
        assert!(water_filling(&[1.0], 0.0).is_err());
        assert!(water_filling(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let h = [C64::new(1.0, 0.0)];
        assert_eq!(average_rate(&h, &[0.0], 1.0), 0.0);
        assert_relative_eq!(average_rate(&h, &[2.0], 2.0), 1.0, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn kkt_conditions_hold(
            gains in proptest::collection::vec(0.0f64..50.0, 1..64),
            total in 1e-3f64..100.0,
        ) {
            prop_assume!(gains.iter().any(|&g| g > 0.0));
            let alloc = water_filling(&gains, total).unwrap();
            let sum: f64 = alloc.power.iter().sum();
            prop_assert!((sum - total).abs() <= 1e-9 * total);
            for (&g, &p) in gains.iter().zip(&alloc.power) {
                prop_assert!(p >= 0.0);
                if p > 0.0 {
                    prop_assert!((p + 1.0 / g - alloc.water_level).abs() <= 1e-9 * alloc.water_level);
                } else if g > 0.0 {
                    prop_assert!(1.0 / g >= alloc.water_level * (1.0 - 1e-12));
                }
            }
        }

        #[test]
        fn rate_never_exceeds_jensen_bound(
            pairs in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.0f64..5.0), 1..32),
        ) {
            let h: Vec<C64> = pairs.iter().map(|&(re, im, _)| C64::new(re, im)).collect();
            let p: Vec<f64> = pairs.iter().map(|t| t.2).collect();
            prop_assert!(average_rate(&h, &p, 0.1) <= jensen_bound(&h, &p, 0.1) + 1e-12);
        }
    }
}
