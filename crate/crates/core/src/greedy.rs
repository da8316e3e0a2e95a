//! Max-gain greedy association baseline.
//!
//! Per slot, the BS side and the satellite side are filled independently: pick
//! the largest remaining gain, connect if the node still has room, otherwise
//! retire the node. Interference is ignored.

use ndarray::{s, ArrayView2, ArrayViewMut2};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelTensor;
use crate::sysmodel::{AssociationVars, CapacityProfile};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedyOptions {
    /// Gains at or below this value are never assigned. `None` keeps every
    /// entry eligible, zeros included.
    #[serde(default)]
    pub min_gain: Option<f64>,
}

pub fn greedy_assign(ch: &ChannelTensor, c: &CapacityProfile) -> AssociationVars {
    greedy_assign_with(ch, c, &GreedyOptions::default())
}

pub fn greedy_assign_with(ch: &ChannelTensor, c: &CapacityProfile, opts: &GreedyOptions) -> AssociationVars {
    let mut v = AssociationVars::zeros(ch.n_bs(), ch.n_sat(), ch.n_ue(), ch.n_slots());
    for t in 0..ch.n_slots() {
        let bs_room: Vec<u32> = (0..ch.n_bs()).map(|n| c.bs_residual(n, t)).collect();
        fill_side(ch.h.slice(s![.., .., t]), &bs_room, opts, v.alpha.slice_mut(s![.., .., t]));
        let sat_room: Vec<u32> = (0..ch.n_sat()).map(|m| c.sat_residual(m, t)).collect();
        fill_side(ch.g.slice(s![.., .., t]), &sat_room, opts, v.beta.slice_mut(s![.., .., t]));
    }
    v
}

fn fill_side(gain: ArrayView2<f64>, room: &[u32], opts: &GreedyOptions, mut out: ArrayViewMut2<u8>) {
    let (nodes, ues) = gain.dim();
    let mut row_live = vec![true; nodes];
    let mut col_live = vec![true; ues];
    let mut used = vec![0u32; nodes];
    loop {
        let mut best: Option<(usize, usize)> = None;
        for n in (0..nodes).filter(|&n| row_live[n]) {
            for k in (0..ues).filter(|&k| col_live[k]) {
                let g = gain[[n, k]];
                if opts.min_gain.is_some_and(|f| g <= f) {
                    continue;
                }
                // strict comparison keeps the smallest (n, k) on ties
                if best.map_or(true, |(bn, bk)| g > gain[[bn, bk]]) {
                    best = Some((n, k));
                }
            }
        }
        let Some((n, k)) = best else { break };
        if room[n] > used[n] {
            out[[n, k]] = 1;
            used[n] += 1;
            col_live[k] = false;
        } else {
            row_live[n] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::check_feasibility;
    use ndarray::{array, Array2, Array3};
    use proptest::prelude::*;

    fn caps(bs: Vec<u32>, sat: Vec<u32>, t: usize) -> CapacityProfile {
        CapacityProfile {
            bs_background: Array2::zeros((bs.len(), t)),
            sat_background: Array2::zeros((sat.len(), t)),
            bs_capacity: bs,
            sat_capacity: sat,
        }
    }

    fn bs_only(h: Array3<f64>) -> ChannelTensor {
        let (_, k, t) = h.dim();
        ChannelTensor::new(h, Array3::zeros((0, k, t))).unwrap()
    }

    #[test]
    fn hand_traced_example() {
        let h = array![[3.0, 2.0], [1.0, 0.5]].insert_axis(ndarray::Axis(2));
        let v = greedy_assign(&bs_only(h), &caps(vec![1, 1], vec![], 1));
        assert_eq!(v.alpha.slice(s![.., .., 0]), array![[1, 0], [0, 1]]);
    }

    #[test]
    fn zero_gains_assigned_in_index_order() {
        let v = greedy_assign(&bs_only(Array3::zeros((2, 3, 1))), &caps(vec![2, 1], vec![], 1));
        assert_eq!(v.alpha.slice(s![.., .., 0]), array![[1, 1, 0], [0, 0, 1]]);
        let masked = greedy_assign_with(
            &bs_only(Array3::zeros((2, 3, 1))),
            &caps(vec![2, 1], vec![], 1),
            &GreedyOptions { min_gain: Some(0.0) },
        );
        assert!(masked.alpha.iter().all(|&x| x == 0));
    }

    #[test]
    fn full_node_gets_nothing() {
        let mut c = caps(vec![1], vec![], 1);
        c.bs_background[[0, 0]] = 1;
        let v = greedy_assign(&bs_only(array![[[5.0]]]), &c);
        assert_eq!(v.alpha[[0, 0, 0]], 0);
    }

    fn instance() -> impl Strategy<Value = (ChannelTensor, CapacityProfile)> {
        (1usize..4, 0usize..3, 1usize..5, 1usize..3).prop_flat_map(|(n, m, k, t)| {
            (
                proptest::collection::vec(0.0f64..1.0, n * k * t),
                proptest::collection::vec(0.0f64..1.0, m * k * t),
                proptest::collection::vec(1u32..4, n),
                proptest::collection::vec(1u32..4, m),
                proptest::collection::vec(0u32..2, n * t),
                proptest::collection::vec(0u32..2, m * t),
            )
                .prop_map(move |(h, g, bc, sc, be, se)| {
                    let ch = ChannelTensor::new(
                        Array3::from_shape_vec((n, k, t), h).unwrap(),
                        Array3::from_shape_vec((m, k, t), g).unwrap(),
                    )
                    .unwrap();
                    let mut c = CapacityProfile {
                        bs_background: Array2::from_shape_vec((n, t), be).unwrap(),
                        sat_background: Array2::from_shape_vec((m, t), se).unwrap(),
                        bs_capacity: bc,
                        sat_capacity: sc,
                    };
                    c.bs_background.indexed_iter_mut().for_each(|((i, _), e)| *e = (*e).min(c.bs_capacity[i]));
                    c.sat_background.indexed_iter_mut().for_each(|((i, _), e)| *e = (*e).min(c.sat_capacity[i]));
                    (ch, c)
                })
        })
    }

    proptest! {
        #[test]
        fn never_breaks_c1_to_c4((ch, c) in instance()) {
            let v = greedy_assign(&ch, &c);
            let viol = check_feasibility(&v, &c);
            prop_assert!(viol.iter().all(|x| x.constraint == crate::sysmodel::Constraint::C5));
        }

        #[test]
        fn dual_connectivity_when_roomy((ch, mut c) in instance()) {
            let k = ch.n_ue() as u32;
            c.bs_capacity.iter_mut().for_each(|x| *x += k);
            c.sat_capacity.iter_mut().for_each(|x| *x += k);
            let v = greedy_assign(&ch, &c);
            for t in 0..ch.n_slots() {
                for u in 0..ch.n_ue() {
                    let a: u8 = v.alpha.slice(s![.., u, t]).sum();
                    let b: u8 = v.beta.slice(s![.., u, t]).sum();
                    prop_assert_eq!(a, 1);
                    prop_assert_eq!(b, if ch.n_sat() > 0 { 1 } else { 0 });
                }
            }
        }

        #[test]
        fn slot_permutation_equivariant((ch, c) in instance()) {
            let t = ch.n_slots();
            let perm: Vec<usize> = (0..t).rev().collect();
            let ch2 = ChannelTensor::new(ch.h.select(ndarray::Axis(2), &perm), ch.g.select(ndarray::Axis(2), &perm)).unwrap();
            let c2 = CapacityProfile {
                bs_background: c.bs_background.select(ndarray::Axis(1), &perm),
                sat_background: c.sat_background.select(ndarray::Axis(1), &perm),
                ..c.clone()
            };
            let v = greedy_assign(&ch, &c);
            let v2 = greedy_assign(&ch2, &c2);
            prop_assert_eq!(v2.alpha, v.alpha.select(ndarray::Axis(2), &perm));
            prop_assert_eq!(v2.beta, v.beta.select(ndarray::Axis(2), &perm));
        }
    }
}
