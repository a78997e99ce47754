use bdris_core::channel::{cascaded_channel, scattering_channel, to_admittance_params, DEFAULT_Y0};
use bdris_core::circuit::{fit_linear_model, CircuitParams, LinearSusceptanceModel};
use bdris_core::linalg::CMatrix;
use bdris_core::optimizer::{average_rate, jensen_bound, water_filling, SquashParams};
use bdris_core::topology::{
    assemble_admittance, f3_map, packed_index, packed_len, port_block_from_packed, scattering_from_admittance,
    unpack_symmetric, GroupTopology, SusceptanceAssignment,
};
use bdris_core::C64;
use proptest::prelude::*;

fn model() -> LinearSusceptanceModel {
    fit_linear_model(&CircuitParams::reference_varactor(), 2.25e9, 2.55e9, 31, 57).unwrap()
}

/// `(group_size, groups, packed values in [0, 1))`.
fn layout() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(m_bar, groups)| {
        (
            Just(m_bar),
            Just(groups),
            prop::collection::vec(0.0..1.0f64, groups * packed_len(m_bar)),
        )
    })
}

fn assignment(m: &LinearSusceptanceModel, m_bar: usize, unit: &[f64]) -> SusceptanceAssignment {
    let groups = unit
        .chunks(packed_len(m_bar))
        .map(|c| c.iter().map(|u| m.b_min + u * (m.b_max - m.b_min)).collect())
        .collect();
    SusceptanceAssignment::new(m_bar, groups).unwrap()
}

fn cvec(parts: &[(f64, f64)]) -> Vec<C64> {
    parts.iter().map(|&(re, im)| C64::new(re, im)).collect()
}

proptest! {
    #[test]
    fn packed_index_is_a_bijection(m_bar in 1usize..=8) {
        let mut seen = vec![false; packed_len(m_bar)];
        for i in 0..m_bar {
            for j in 0..=i {
                let l = packed_index(i, j);
                prop_assert_eq!(l, packed_index(j, i));
                prop_assert!(!seen[l]);
                seen[l] = true;
            }
        }
        prop_assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn port_block_rows_sum_to_grounding(m_bar in 1usize..=5, values in prop::collection::vec(-1.0..1.0f64, 15)) {
        let packed = &values[..packed_len(m_bar)];
        let component = unpack_symmetric(m_bar, packed);
        let block = port_block_from_packed(m_bar, packed);
        prop_assert_eq!(&block, &f3_map(&component).unwrap());
        for i in 0..m_bar {
            let row: f64 = (0..m_bar).map(|j| block[(i, j)]).sum();
            prop_assert!((row - component[(i, i)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn assembled_networks_are_lossless((m_bar, groups, unit) in layout(), t in 0.0..=1.0f64) {
        let m = model();
        let topo = GroupTopology::with_groups(m_bar * groups, groups).unwrap();
        let f = m.band.lo + t * (m.band.hi - m.band.lo);
        let y = assemble_admittance(&topo, &assignment(&m, m_bar, &unit), &m, f).unwrap();
        let dense = y.to_dense();
        prop_assert_eq!(&dense, &dense.transpose());
        prop_assert!(dense.as_slice().iter().all(|v| v.re == 0.0));
        let theta = scattering_from_admittance(&y, DEFAULT_Y0).unwrap();
        let n = topo.elements();
        let dev = theta.conj_transpose().matmul(&theta).unwrap().sub(&CMatrix::identity(n)).frobenius_norm();
        prop_assert!(dev <= 1e-10 * (n as f64).sqrt());
        prop_assert!(theta.sub(&theta.transpose()).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn admittance_and_scattering_channels_agree(
        (m_bar, groups, unit) in layout(),
        rt in (-1.0..1.0f64, -1.0..1.0f64),
        links in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 24),
    ) {
        let m = model();
        let n = m_bar * groups;
        let topo = GroupTopology::with_groups(n, groups).unwrap();
        let y = assemble_admittance(&topo, &assignment(&m, m_bar, &unit), &m, m.f_c).unwrap();
        let h_rt = C64::new(rt.0, rt.1);
        let h_ri = cvec(&links[..n]);
        let h_it = cvec(&links[12..12 + n]);
        let entry = to_admittance_params(h_rt, &h_ri, &h_it, DEFAULT_Y0, m.f_c).unwrap();
        let a = cascaded_channel(&entry, &y, DEFAULT_Y0).unwrap();
        let theta = scattering_from_admittance(&y, DEFAULT_Y0).unwrap();
        let b = scattering_channel(h_rt, &h_ri, &theta, &h_it);
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn squash_round_trips_inside_the_range(u in -0.999..0.999f64) {
        let m = model();
        let s = SquashParams::from_range(m.b_min, m.b_max).unwrap();
        let b = s.b_plus + u * s.b_minus;
        let x = s.unsquash(b).unwrap();
        prop_assert!((s.squash(x) - b).abs() <= 1e-12 * s.b_minus);
    }

    #[test]
    fn water_filled_rate_respects_jensen(
        h in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..32),
        total in 1e-3..1e3f64,
    ) {
        let h = cvec(&h);
        let gains: Vec<f64> = h.iter().map(|v| v.norm_sqr()).collect();
        prop_assume!(gains.iter().any(|&g| g > 0.0));
        let p = water_filling(&gains, total).unwrap().power;
        prop_assert!(average_rate(&h, &p, 1.0) <= jensen_bound(&h, &p, 1.0) + 1e-12);
    }
}
