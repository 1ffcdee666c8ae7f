use xmod::module::ConcreteModule;
use xmod::xfamily::{
    build_x, check_conditions, decompose_iii_failure, is_split_witness, level_module, recover_a, XParams,
};

fn xp(p: u64, n: u32, a: Vec<Option<u32>>, d: i64) -> XParams {
    let m = a.len() as u32;
    XParams::new(p, n, m, a, d).unwrap()
}

fn sorted_signatures(ms: &[&ConcreteModule]) -> Vec<String> {
    let mut v: Vec<String> = ms.iter().map(|m| format!("{:?}", m.iso_signature())).collect();
    v.sort();
    v
}

#[test]
fn dropping_a_0_changes_the_module() {
    for d in [1, 4, 7] {
        let with = build_x(&xp(3, 2, vec![Some(0), Some(1)], d)).unwrap();
        let without = build_x(&xp(3, 2, vec![None, Some(1)], d)).unwrap();
        assert_ne!(with.module.iso_signature(), without.module.iso_signature(), "d = {d}");
    }
}

#[test]
fn all_minus_infinity_gives_order_p_to_the_m() {
    for (p, n, m) in [(2, 1, 1), (2, 2, 3), (3, 1, 2), (3, 2, 2), (5, 1, 2)] {
        let x = build_x(&xp(p, n, vec![None; m], 1)).unwrap();
        assert_eq!(x.module.log_order(), m as u64, "p={p} n={n} m={m}");
        assert!(x.module.is_cyclic());
    }
}

#[test]
fn split_summands_are_the_predicted_modules() {
    let params = xp(2, 2, vec![Some(0), Some(1)], 1);
    assert!(!check_conditions(&params).iii);
    let s = decompose_iii_failure(&params, 0).unwrap();
    assert_eq!(s.hat_params.a, vec![Some(0), None]);
    let x = build_x(&params).unwrap();
    s.certificate.verify(&x.module).unwrap();
    let (e, f) = s.certificate.summands(&x.module).unwrap();
    let hat = build_x(&s.hat_params).unwrap();
    let free = level_module(params.ring(), Some(1), None).unwrap();
    assert_eq!(sorted_signatures(&[&e, &f]), sorted_signatures(&[&hat.module, &free]));
}

#[test]
fn odd_prime_witness_at_zero() {
    let params = xp(3, 2, vec![Some(1), Some(2)], 1);
    assert!(is_split_witness(&params, 0));
    let s = decompose_iii_failure(&params, 0).unwrap();
    s.certificate.verify(&build_x(&params).unwrap().module).unwrap();
}

#[test]
fn first_generator_order_for_increasing_a() {
    let x = build_x(&xp(2, 4, vec![Some(1), Some(2), Some(3), Some(4)], 1)).unwrap();
    assert!(x.relations_hold().unwrap());
    let x0 = x.module.submodule_generated(&[x.x(0)]);
    assert_eq!(x0.log_order(), 8);
}

#[test]
fn recover_trivial_levels() {
    let x = build_x(&xp(3, 1, vec![Some(0)], 1)).unwrap();
    assert_eq!(recover_a(&x.module, 3).unwrap(), vec![Some(0)]);
    let x = build_x(&xp(3, 1, vec![None, None], 1)).unwrap();
    assert_eq!(recover_a(&x.module, 3).unwrap(), vec![None, None]);
}
