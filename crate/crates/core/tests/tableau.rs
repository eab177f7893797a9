mod common;

use common::*;
use mipt_core::oracle::differential_check;
use mipt_core::pauli::{commutation_phase, MeasurementOp, PauliString, StabilizerTableau, SymplecticGate};
use mipt_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cp_examples() {
    for q in [2u32, 3, 7] {
        let q = md(q);
        for k in 0..q.get() {
            let mut t = StabilizerTableau::new_plus(3, q);
            t.apply_cp(0, 2, k).unwrap();
            assert_eq!(t.row(0), PauliString::new(q, vec![1, 0, 0], vec![0, 0, k]).unwrap());
            let z = PauliString::single(3, q, 0, 0, 1);
            let mut tz = StabilizerTableau::from_rows(
                q,
                &[z.clone(), PauliString::single(3, q, 1, 1, 0), PauliString::single(3, q, 2, 1, 0)],
            )
            .unwrap();
            tz.apply_cp(0, 1, k).unwrap();
            assert_eq!(tz.row(0), z);
        }
        let mut t = StabilizerTableau::new_plus(2, q);
        assert!(matches!(t.apply_cp(1, 1, 1), Err(Error::SameSite(1))));
        assert!(t.apply_cp(0, 2, 1).is_err());
        t.apply_cp(0, 1, 0).unwrap();
        assert_eq!(t, StabilizerTableau::new_plus(2, q));
    }
}

#[test]
fn entropy_examples() {
    let q = md(2);
    let t = StabilizerTableau::new_plus(6, q);
    for r in all_regions(6) {
        assert_eq!(t.entropy_region(&r), 0);
    }
    let mut t = StabilizerTableau::new_plus(2, q);
    t.apply_cp(0, 1, 1).unwrap();
    assert_eq!(t.entropy_region(&[0]), 1);
    for q in [2u32, 3, 5] {
        let n = 10;
        let mut t = StabilizerTableau::new_plus(n, md(q));
        for i in 0..n {
            t.apply_cp(i, (i + 1) % n, 1).unwrap();
        }
        for start in 0..n {
            for len in 2..=n - 2 {
                let region: Vec<usize> = (0..len).map(|k| (start + k) % n).collect();
                assert_eq!(t.entropy_region(&region), 2);
            }
        }
    }
}

#[test]
fn measurement_examples() {
    let q = md(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = random_tableau(q, 5, 20, &mut rng);
    // measuring something already in the group changes nothing
    let mut u = t.clone();
    u.measure_site(&MeasurementOp::z(2)).unwrap();
    let after = u.clone();
    assert!(!u.measure_site(&MeasurementOp::z(2)).unwrap());
    assert_eq!(u, after);
    let mut p = StabilizerTableau::new_plus(3, q);
    assert!(!p.measure_site(&MeasurementOp::x(1)).unwrap());
    assert_eq!(p, StabilizerTableau::new_plus(3, q));
    assert!(p.measure_site(&MeasurementOp::z(1)).unwrap());
    assert_eq!(p.row(1), PauliString::single(3, q, 1, 0, 1));
    assert!(p.measure_site(&MeasurementOp { site: 1, a: 0, b: 0 }).is_err());
    assert!(p.measure_site(&MeasurementOp::z(3)).is_err());
}

#[test]
fn from_rows_validation() {
    let q = md(2);
    let x0 = PauliString::single(2, q, 0, 1, 0);
    let z0 = PauliString::single(2, q, 0, 0, 1);
    assert!(StabilizerTableau::from_rows(q, &[x0.clone(), z0]).is_err());
    assert!(StabilizerTableau::from_rows(q, &[x0.clone(), x0.clone()]).is_err());
    let x1 = PauliString::single(2, q, 1, 1, 0);
    assert!(StabilizerTableau::from_rows(q, &[x0, x1]).is_ok());
}

#[test]
fn oracle_agrees_on_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..120 {
        let (q, n) = if case % 2 == 0 { (2, rng.random_range(2..=10)) } else { (3, rng.random_range(2..=6)) };
        let r = differential_check(md(q), n, 3 * n, &mut rng).unwrap();
        assert!(r.mismatches.is_empty(), "q={q} n={n}: {:?}", r.mismatches);
    }
}

fn state_strategy() -> impl Strategy<Value = (u32, usize, u64)> {
    (prop::sample::select(vec![2u32, 3, 5, 7]), 2usize..9, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_survive_random_operations((q, n, seed) in state_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let mut t = StabilizerTableau::new_plus(n, q);
        for _ in 0..4 * n {
            apply(&mut t, &random_op(q, n, &mut rng));
            prop_assert!(t.validate().is_ok());
        }
        for r in all_regions(n) {
            let s = t.entropy_region(&r);
            prop_assert_eq!(s, t.entropy_region(&complement(&r, n)));
            prop_assert!(s <= r.len().min(n - r.len()));
        }
    }

    #[test]
    fn cp_gate_matches_cp_update((q, n, seed) in state_strategy(), w in 0u32..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let t = random_tableau(q, n, 3 * n, &mut rng);
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        prop_assume!(i != j);
        let mut a = t.clone();
        let mut b = t.clone();
        a.apply_cp(i, j, w).unwrap();
        b.apply_symplectic(&SymplecticGate::cp(i, j, w, q).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        let mut c = t.clone();
        c.apply_symplectic(&SymplecticGate::identity(i, j, q).unwrap()).unwrap();
        prop_assert_eq!(&c, &t);
    }

    #[test]
    fn gates_preserve_commutation((q, n, seed) in state_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let t = random_tableau(q, n, 3 * n, &mut rng);
        let rows = t.rows();
        let op = loop {
            if let Op::Gate(g) = random_op(q, n, &mut rng) { break g; }
        };
        let mut u = t.clone();
        u.apply_symplectic(&op).unwrap();
        let moved = u.rows();
        for r in 0..n {
            for s in 0..n {
                prop_assert_eq!(commutation_phase(&rows[r], &rows[s]).unwrap(), commutation_phase(&moved[r], &moved[s]).unwrap());
            }
        }
        // arbitrary strings keep their phases too, not just stabilizers
        let (i, j) = op.sites();
        let rand_string = |rng: &mut ChaCha8Rng| {
            PauliString::new(q, (0..n).map(|_| rng.random_range(0..q.get())).collect(),
                (0..n).map(|_| rng.random_range(0..q.get())).collect()).unwrap()
        };
        let push = |p: &PauliString| {
            let (mut x, mut z) = (p.x_exps().to_vec(), p.z_exps().to_vec());
            let v = op.act([x[i], z[i], x[j], z[j]]);
            (x[i], z[i], x[j], z[j]) = (v[0], v[1], v[2], v[3]);
            PauliString::new(q, x, z).unwrap()
        };
        let (p1, p2) = (rand_string(&mut rng), rand_string(&mut rng));
        prop_assert_eq!(commutation_phase(&p1, &p2).unwrap(), commutation_phase(&push(&p1), &push(&p2)).unwrap());
    }

    #[test]
    fn local_gates_keep_region_entropy((q, n, seed) in state_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let t = random_tableau(q, n, 3 * n, &mut rng);
        for region in all_regions(n) {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i == j || region.contains(&i) != region.contains(&j) {
                continue;
            }
            let g = loop {
                if let Op::Gate(g) = random_op(q, n, &mut rng) { break g.on_sites(i, j).unwrap(); }
            };
            let mut u = t.clone();
            u.apply_symplectic(&g).unwrap();
            prop_assert_eq!(u.entropy_region(&region), t.entropy_region(&region));
        }
    }

    #[test]
    fn measurement_is_idempotent((q, n, seed) in state_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let t = random_tableau(q, n, 3 * n, &mut rng);
        let m = loop {
            if let Op::Measure(m) = random_op(q, n, &mut rng) { break m; }
        };
        let mut once = t.clone();
        once.measure_site(&m).unwrap();
        let mut twice = once.clone();
        prop_assert!(!twice.measure_site(&m).unwrap());
        prop_assert!(once.same_group(&twice));
        // the measured operator is now in the group
        let rows = once.rows();
        let o = PauliString::single(n, q, m.site, m.a, m.b);
        prop_assert!(rows.iter().all(|r| commutation_phase(r, &o).unwrap() == 0));
    }

    #[test]
    fn isolation_keeps_the_group((q, n, seed) in state_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = md(q);
        let t = random_tableau(q, n, 3 * n, &mut rng);
        let m = loop {
            if let Op::Measure(m) = random_op(q, n, &mut rng) { break m; }
        };
        let mut plain = t.clone();
        plain.measure_site(&m).unwrap();
        let mut iso = t.clone();
        let row = iso.measure_isolate(&m).unwrap();
        prop_assert!(plain.same_group(&iso));
        prop_assert_eq!(iso.row(row), PauliString::single(n, q, m.site, m.a, m.b));
        for r in (0..n).filter(|&r| r != row) {
            prop_assert_eq!(iso.entry(r, m.site), (0, 0));
        }
        let mut rec = t.clone();
        rec.recycle_site(&m).unwrap();
        prop_assert!(rec.validate().is_ok());
        prop_assert!(!rec.clone().measure_site(&MeasurementOp::x(m.site)).unwrap());
        for region in all_regions(n) {
            prop_assert_eq!(rec.entropy_region(&region), plain.entropy_region(&region));
        }
    }

    #[test]
    fn backends_agree_at_q2(n in 2usize..12, seed in any::<u64>()) {
        let q = md(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut packed = StabilizerTableau::new_plus(n, q);
        let mut generic = StabilizerTableau::new_plus_generic(n, q);
        for _ in 0..4 * n {
            let op = random_op(q, n, &mut rng);
            apply(&mut packed, &op);
            apply(&mut generic, &op);
            prop_assert_eq!(packed.rows(), generic.rows());
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let m = loop {
            if let Op::Measure(m) = random_op(q, n, &mut rng2) { break m; }
        };
        packed.recycle_site(&m).unwrap();
        generic.recycle_site(&m).unwrap();
        prop_assert_eq!(packed.rows(), generic.rows());
        for r in all_regions(n.min(8)) {
            prop_assert_eq!(packed.entropy_region(&r), generic.entropy_region(&r));
        }
    }
}
