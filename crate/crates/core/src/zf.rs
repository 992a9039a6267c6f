//! Zero-forcing receive filters, per-stream rates and DoF slope estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::network::Network;
use crate::rational::Rational;

/// Largest normalized inner product allowed between a filter row and an
/// interference column.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Smallest grid accepted by [`dof_slope`].
pub const MIN_GRID_POINTS: usize = 4;

/// Lowest allowed top point of a slope grid, in dB.
pub const MIN_TOP_SNR_DB: f64 = 50.0;

#[derive(Clone, Debug)]
pub struct FilterBank {
    pub receiver: usize,
    /// `d_i x dim`, with `filter * desired = I`.
    pub filter: CMat,
    pub leakage: f64,
}

impl FilterBank {
    /// Squared norm of each row: the noise power each stream sees.
    pub fn noise_gains(&self) -> Vec<f64> {
        (0..self.filter.nrows())
            .map(|m| {
                (0..self.filter.ncols())
                    .map(|c| self.filter[(m, c)].norm_sqr())
                    .sum()
            })
            .collect()
    }
}

/// Filters for every receiver, projecting onto the complement of the
/// interference span. Refuses networks whose desired streams are not separable.
///
/// Separability is read off the projection itself: the desired block keeps full
/// column rank after projection exactly when it has full rank and meets the
/// interference span only at zero.
pub fn zf_filters<N: Network + ?Sized>(net: &N, tol: f64) -> Result<Vec<FilterBank>> {
    (0..net.users())
        .map(|rx| {
            let view = net.receiver_view(rx)?;
            if net.streams(rx) == 0 {
                return Ok(FilterBank {
                    receiver: rx,
                    filter: linalg::zeros(0, net.receive_dim()),
                    leakage: 0.0,
                });
            }
            let (q, _) = linalg::complement_space(view.interference.as_ref(), tol)?;
            let projected = q.adjoint() * &view.desired;
            // smallest singular value against the scale of the unprojected block
            let sv = linalg::singular_values(projected.as_ref())?;
            let cutoff = tol * linalg::frobenius(view.desired.as_ref()) * net.receive_dim() as f64;
            if sv.len() < net.streams(rx) || !(sv[sv.len() - 1] > cutoff) {
                return Err(Error::NotSeparable { receiver: rx });
            }
            let filter = linalg::pinv(projected.as_ref(), tol)? * q.adjoint();
            let leakage = leakage(&filter, &view.interference);
            if !(leakage < LEAKAGE_LIMIT) {
                return Err(Error::Numerical(format!(
                    "receiver {} leaks {leakage:e} into the filter output",
                    rx + 1
                )));
            }
            Ok(FilterBank {
                receiver: rx,
                filter,
                leakage,
            })
        })
        .collect()
}

/// Largest `|f . c| / (|f| |c|)` over filter rows `f` and columns `c`.
pub fn leakage(filter: &CMat, interference: &CMat) -> f64 {
    if filter.nrows() == 0 || interference.ncols() == 0 {
        return 0.0;
    }
    let prod = filter * interference;
    let row_norms: Vec<f64> = (0..filter.nrows())
        .map(|m| {
            (0..filter.ncols())
                .map(|c| filter[(m, c)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let col_norms: Vec<f64> = (0..interference.ncols())
        .map(|j| linalg::column_norm(interference.as_ref(), j))
        .collect();
    let mut worst: f64 = 0.0;
    for (m, rn) in row_norms.iter().enumerate() {
        for (j, cn) in col_norms.iter().enumerate() {
            worst = worst.max(prod[(m, j)].norm() / (rn * cn).max(f64::MIN_POSITIVE));
        }
    }
    worst
}

/// What the rate formula needs from a filtered network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub extension: usize,
    /// Per user, the noise gain `||f_m||^2` of each stream.
    pub noise_gains: Vec<Vec<f64>>,
}

impl RateModel {
    pub fn new<N: Network + ?Sized>(net: &N, filters: &[FilterBank]) -> Self {
        RateModel {
            extension: net.extension(),
            noise_gains: filters.iter().map(FilterBank::noise_gains).collect(),
        }
    }

    fn active_users(&self) -> usize {
        self.noise_gains.iter().filter(|g| !g.is_empty()).count()
    }
}

/// Sum rate in bits per channel use at total transmit power `10^(snr_db/10)`.
///
/// Each active transmitter gets `rho/K` per channel use, split equally over its
/// streams; precoder columns are unit norm and receiver noise is unit variance.
pub fn sum_rate(model: &RateModel, snr_db: f64) -> f64 {
    let rho = 10f64.powf(snr_db / 10.0);
    let k = model.active_users().max(1) as f64;
    let l = model.extension as f64;
    model
        .noise_gains
        .iter()
        .filter(|g| !g.is_empty())
        .flat_map(|gains| {
            let p = rho * l / (k * gains.len() as f64);
            gains.iter().map(move |g| (1.0 + p / g).log2())
        })
        .sum::<f64>()
        / l
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub snr_grid_db: Vec<f64>,
    pub sum_rate_bits: Vec<f64>,
    pub slope_estimate: f64,
    pub predicted_dof: Rational,
    pub scheme: String,
    pub seed: u64,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::InvalidGrid(format!(
            "{} points given, at least {MIN_GRID_POINTS} needed",
            grid.len()
        )));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("non-finite SNR value".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    let top = grid[grid.len() - 1];
    if top < MIN_TOP_SNR_DB {
        return Err(Error::InvalidGrid(format!(
            "top point {top} dB is below {MIN_TOP_SNR_DB} dB"
        )));
    }
    Ok(())
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Sum rate over the grid and its slope against `log2(rho)` over the top
/// `ceil(n/2)` grid points.
pub fn dof_slope(
    model: &RateModel,
    snr_grid_db: &[f64],
    predicted_dof: Rational,
    scheme: &str,
    seed: u64,
) -> Result<SweepResult> {
    validate_grid(snr_grid_db)?;
    let rates: Vec<f64> = snr_grid_db.iter().map(|&s| sum_rate(model, s)).collect();
    let start = snr_grid_db.len() / 2;
    let x: Vec<f64> = snr_grid_db[start..]
        .iter()
        .map(|db| db / 10.0 * std::f64::consts::LOG2_10)
        .collect();
    let slope = least_squares_slope(&x, &rates[start..]);
    Ok(SweepResult {
        snr_grid_db: snr_grid_db.to_vec(),
        sum_rate_bits: rates,
        slope_estimate: slope,
        predicted_dof,
        scheme: scheme.to_string(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channels, SystemConfig, Variation};
    use crate::mimo::{build_example1, build_zero_forcing, ConstantNetwork};
    use proptest::prelude::*;

    fn zf_2x1x2(seed: u64) -> (crate::channel::ChannelSet, crate::mimo::PrecoderSet) {
        let cfg = SystemConfig::new(2, 1, 2, Variation::Constant, seed).unwrap();
        let ch = sample_channels(&cfg, 1).unwrap();
        let set = build_zero_forcing(&ch, 2).unwrap();
        (ch, set)
    }

    #[test]
    fn two_user_filters_null_the_cross_channel() {
        let (ch, set) = zf_2x1x2(3);
        let net = ConstantNetwork::new(&ch, &set).unwrap();
        let filters = zf_filters(&net, linalg::DEFAULT_RANK_TOL).unwrap();
        for f in &filters {
            assert_eq!((f.filter.nrows(), f.filter.ncols()), (1, 2));
            let other = 1 - f.receiver;
            let cross = ch.matrix(f.receiver, other, 0) * net.precoder(other);
            assert!((&f.filter * &cross)[(0, 0)].norm() < 1e-12);
            let desired = ch.matrix(f.receiver, f.receiver, 0) * net.precoder(f.receiver);
            assert!(
                ((&f.filter * &desired)[(0, 0)] - num_complex::Complex64::new(1.0, 0.0)).norm()
                    < 1e-12
            );
        }
    }

    #[test]
    fn single_user_filter_inverts_the_channel() {
        let cfg = SystemConfig::new(1, 3, 3, Variation::Constant, 1).unwrap();
        let ch = sample_channels(&cfg, 1).unwrap();
        let set = build_zero_forcing(&ch, 1).unwrap();
        let net = ConstantNetwork::new(&ch, &set).unwrap();
        let f = &zf_filters(&net, linalg::DEFAULT_RANK_TOL).unwrap()[0];
        let eff = ch.matrix(0, 0, 0) * net.precoder(0);
        let prod = &f.filter * &eff;
        let diff = &prod - linalg::identity(3);
        assert!(linalg::frobenius(diff.as_ref()) < 1e-10);
        assert_eq!(f.leakage, 0.0);
    }

    #[test]
    fn example1_filter_shapes() {
        let cfg = SystemConfig::new(4, 4, 8, Variation::Constant, 2).unwrap();
        let ch = sample_channels(&cfg, 1).unwrap();
        let set = build_example1(&ch).unwrap();
        let net = ConstantNetwork::new(&ch, &set).unwrap();
        let filters = zf_filters(&net, linalg::DEFAULT_RANK_TOL).unwrap();
        let shapes: Vec<_> = filters
            .iter()
            .map(|f| (f.filter.nrows(), f.filter.ncols()))
            .collect();
        assert_eq!(shapes, vec![(2, 8), (2, 8), (2, 8), (3, 8)]);
        assert!(filters.iter().all(|f| f.leakage < 1e-9));
        let model = RateModel::new(&net, &filters);
        let d = sum_rate(&model, 60.0) - sum_rate(&model, 50.0);
        assert!((d / (10.0 * std::f64::consts::LOG2_10 / 10.0) - 9.0).abs() < 0.2);
    }

    #[test]
    fn non_separable_networks_are_refused() {
        struct Collapsed;
        impl Network for Collapsed {
            fn users(&self) -> usize {
                2
            }
            fn receive_dim(&self) -> usize {
                2
            }
            fn extension(&self) -> usize {
                1
            }
            fn streams(&self, _: usize) -> usize {
                1
            }
            fn effective(&self, _: usize, _: usize) -> Result<CMat> {
                Ok(CMat::from_fn(2, 1, |_, _| {
                    num_complex::Complex64::new(1.0, 0.0)
                }))
            }
        }
        assert!(matches!(
            zf_filters(&Collapsed, linalg::DEFAULT_RANK_TOL),
            Err(Error::NotSeparable { receiver: 0 })
        ));
    }

    #[test]
    fn zf_slope_is_two() {
        let (ch, set) = zf_2x1x2(9);
        let net = ConstantNetwork::new(&ch, &set).unwrap();
        let model = RateModel::new(&net, &zf_filters(&net, linalg::DEFAULT_RANK_TOL).unwrap());
        let grid = [30.0, 40.0, 50.0, 60.0];
        let sweep = dof_slope(&model, &grid, Rational::integer(2), "zero_forcing", 9).unwrap();
        assert!((sweep.slope_estimate - 2.0).abs() < 0.1, "{sweep:?}");
        assert_eq!(sweep.sum_rate_bits.len(), grid.len());
        assert!(sum_rate(&model, -300.0) < 1e-20);
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[30.0, 40.0, 50.0]).is_err());
        assert!(validate_grid(&[10.0, 20.0, 30.0, 40.0]).is_err());
        assert!(validate_grid(&[30.0, 50.0, 40.0, 60.0]).is_err());
        assert!(validate_grid(&[30.0, 40.0, 40.0, 60.0]).is_err());
        assert!(validate_grid(&[30.0, 40.0, f64::NAN, 60.0]).is_err());
        assert!(validate_grid(&[30.0, 40.0, 50.0, 60.0]).is_ok());
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.5 * v - 2.0).collect();
        assert!((least_squares_slope(&x, &y) - 3.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn slope_is_stable_under_grid_shift(gains in prop::collection::vec(0.1f64..10.0, 1..6), seed in 0u64..1000) {
            let model = RateModel { extension: 1, noise_gains: vec![gains.clone(), vec![1.0]] };
            let grid = [40.0, 50.0, 60.0, 70.0];
            let shifted: Vec<f64> = grid.iter().map(|g| g + 10.0).collect();
            let a = dof_slope(&model, &grid, Rational::integer(1), "t", seed).unwrap();
            let b = dof_slope(&model, &shifted, Rational::integer(1), "t", seed).unwrap();
            prop_assert!((a.slope_estimate - b.slope_estimate).abs() < 0.05);
            prop_assert!((b.slope_estimate - (gains.len() + 1) as f64).abs() < 0.05);
        }

        #[test]
        fn power_scaling_shifts_rate_additively(g in 0.1f64..10.0, db in 60.0f64..90.0) {
            let model = RateModel { extension: 2, noise_gains: vec![vec![g, g * 2.0]] };
            // 10 dB more power adds about log2(10) per stream per use
            let d = sum_rate(&model, db + 10.0) - sum_rate(&model, db);
            prop_assert!((d - std::f64::consts::LOG2_10).abs() < 1e-3);
        }
    }
}
