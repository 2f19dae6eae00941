use l0stable_core::optimization::{conditional_argmin, Builtin};
use l0stable_core::stable_set::{is_stable, stable_hull};
use l0stable_core::{L0Scalar, L0Vector, MeasureAlgebra, Partition, StableSet};
use proptest::prelude::*;

fn algebra_and_masks() -> impl Strategy<Value = (Vec<f64>, Vec<bool>, Vec<bool>, Vec<bool>)> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn event_of(alg: &MeasureAlgebra, mask: &[bool]) -> l0stable_core::Event {
    alg.event(mask.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)).unwrap()
}

fn scalars(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, n), k)
}

fn labelled(max_atoms: usize) -> impl Strategy<Value = (Vec<f64>, Vec<u8>, Vec<u8>)> {
    (1usize..max_atoms).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(0u8..4, n),
            prop::collection::vec(0u8..4, n),
        )
    })
}

proptest! {
    #[test]
    fn event_boolean_laws((w, a, b, c) in algebra_and_masks()) {
        let alg = MeasureAlgebra::from_weights(&w).unwrap();
        let (a, b, c) = (event_of(&alg, &a), event_of(&alg, &b), event_of(&alg, &c));
        prop_assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
        prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
        prop_assert_eq!(
            a.meet(&b.join(&c).unwrap()).unwrap(),
            a.meet(&b).unwrap().join(&a.meet(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.join(&b).unwrap().complement(), a.complement().meet(&b.complement()).unwrap());
        prop_assert!(a.meet(&a.complement()).unwrap().is_empty());
        prop_assert!(a.join(&a.complement()).unwrap().is_full());
        prop_assert_eq!(a.difference(&b).unwrap(), a.meet(&b.complement()).unwrap());
        prop_assert!(a.meet(&b).unwrap().leq(&a).unwrap());
        let additive = a.join(&b).unwrap().prob() + a.meet(&b).unwrap().prob();
        prop_assert!((additive - a.prob() - b.prob()).abs() < 1e-12);
    }

    #[test]
    fn scalar_ring_and_lattice_laws(vals in (1usize..10).prop_flat_map(|n| scalars(n, 3))) {
        let x = L0Scalar::new(vals[0].clone()).unwrap();
        let y = L0Scalar::new(vals[1].clone()).unwrap();
        let z = L0Scalar::new(vals[2].clone()).unwrap();
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x - &x), &L0Scalar::zero(x.atoms()));
        let lhs = &x * &(&y + &z);
        let rhs = &(&x * &y) + &(&x * &z);
        for (l, r) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((l - r).abs() <= 1e-9 * (1.0 + l.abs()));
        }
        prop_assert_eq!(x.max(&y).min(&x), x.clone());
        prop_assert_eq!(x.min(&y).max(&x), x.clone());
        prop_assert!(x.min(&y).le(&x) && x.le(&x.max(&y)));
        prop_assert_eq!(L0Scalar::ess_sup(&[x.clone(), y.clone()]).unwrap(), x.max(&y));
    }

    #[test]
    fn conditional_expectation_tower((w, l1, l2) in labelled(10), seed in any::<u64>()) {
        let alg = MeasureAlgebra::from_weights(&w).unwrap();
        let p1 = Partition::from_labels(&alg, &l1);
        let p2 = Partition::from_labels(&alg, &l2);
        let fine = Partition::common_refinement(&[p1.clone(), p2]).unwrap();
        let x = L0Scalar::from_fn(w.len(), |a| ((seed >> (a % 60)) & 0xff) as f64 - 100.0);
        let tower = x.conditional_expectation(&fine).unwrap().conditional_expectation(&p1).unwrap();
        let direct = x.conditional_expectation(&p1).unwrap();
        for (t, d) in tower.values().iter().zip(direct.values()) {
            prop_assert!((t - d).abs() <= 1e-9 * (1.0 + d.abs()));
        }
        let ex = x.expectation(&alg).unwrap();
        let ey = direct.expectation(&alg).unwrap();
        prop_assert!((ex - ey).abs() <= 1e-9 * (1.0 + ex.abs()));
    }

    #[test]
    fn refinement_is_idempotent((w, l1, l2) in labelled(10)) {
        let alg = MeasureAlgebra::from_weights(&w).unwrap();
        let p1 = Partition::from_labels(&alg, &l1);
        let p2 = Partition::from_labels(&alg, &l2);
        prop_assert_eq!(Partition::common_refinement(&[p1.clone(), p1.clone()]).unwrap(), p1.clone());
        let r = Partition::common_refinement(&[p1.clone(), p2.clone()]).unwrap();
        prop_assert!(r.refines(&p1) && r.refines(&p2));
        let c = Partition::common_coarsening(&[p1.clone(), p2.clone()]).unwrap();
        prop_assert!(p1.refines(&c) && p2.refines(&c));
        prop_assert_eq!(Partition::common_coarsening(&[p1.clone(), p1.clone()]).unwrap(), p1);
    }

    #[test]
    fn concat_is_unique((w, labels, _) in labelled(10), seed in any::<u32>()) {
        let alg = MeasureAlgebra::from_weights(&w).unwrap();
        let p = Partition::from_labels(&alg, &labels);
        let n = w.len();
        let xs: Vec<L0Scalar> = (0..p.len())
            .map(|k| L0Scalar::from_fn(n, |a| (seed as f64) * 0.001 + (k * 31 + a) as f64))
            .collect();
        let c = L0Scalar::concat(&p, &xs).unwrap();
        for a in 0..n {
            prop_assert_eq!(c.get(a), xs[p.block_of(a)].get(a));
        }
        let same: Vec<L0Scalar> = (0..p.len()).map(|_| c.clone()).collect();
        prop_assert_eq!(L0Scalar::concat(&p, &same).unwrap(), c);
    }

    #[test]
    fn stable_hull_is_a_closure_operator(
        raw in (1usize..4).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-3i8..3, n), 1..5))
    ) {
        let vs: Vec<L0Vector> = raw
            .iter()
            .map(|v| L0Vector::new(1, &v.iter().map(|x| vec![*x as f64]).collect::<Vec<_>>()).unwrap())
            .collect();
        let h = stable_hull(&vs).unwrap();
        let sels: Vec<L0Vector> = h.selectors().unwrap().collect();
        prop_assert!(is_stable(&sels));
        for v in &vs {
            prop_assert!(sels.contains(v));
        }
        prop_assert_eq!(stable_hull(&sels).unwrap(), h);
    }

    #[test]
    fn argmin_commutes_with_concatenation(
        (w, labels, _) in labelled(6),
        pts in prop::collection::vec(prop::collection::vec(-5i8..5, 2), 1..6),
        shift in prop::collection::vec(-5i8..5, 2),
    ) {
        let alg = MeasureAlgebra::from_weights(&w).unwrap();
        let p = Partition::from_labels(&alg, &labels);
        let n = w.len();
        let sets: Vec<StableSet> = (0..p.len())
            .map(|k| {
                let sec: Vec<Vec<f64>> = pts
                    .iter()
                    .map(|q| vec![q[0] as f64 + k as f64, q[1] as f64 - k as f64])
                    .collect();
                StableSet::points(2, vec![sec; n]).unwrap()
            })
            .collect();
        let center = L0Vector::constant(n, &[shift[0] as f64, shift[1] as f64]);
        let f = Builtin::Quadratic { center, scale: L0Scalar::constant(n, 1.0) };
        let glued = StableSet::concat(&p, &sets).unwrap();
        let (x, v) = conditional_argmin(&f, &glued).unwrap();
        let parts: Vec<(L0Vector, L0Scalar)> = sets.iter().map(|s| conditional_argmin(&f, s).unwrap()).collect();
        let xs: Vec<L0Vector> = parts.iter().map(|r| r.0.clone()).collect();
        let vs: Vec<L0Scalar> = parts.iter().map(|r| r.1.clone()).collect();
        prop_assert_eq!(x, L0Vector::concat(&p, &xs).unwrap());
        prop_assert_eq!(v, L0Scalar::concat(&p, &vs).unwrap());
    }
}
