//! Finite-difference sign checks of every constructed barrier.

use frontlab::closedform::{
    appendix_sub_params, check_barrier, constant_speed_super, fde_sub_params, growth_super,
    pme_bump_params_with, right_tail_super, Barrier, Overrides,
};
use frontlab::{InitialData, Model, ModelParams, ReactionFn};

fn assert_signed(name: &str, b: &dyn Barrier, f: &ReactionFn) {
    let rep = check_barrier(b, f, 200);
    println!("{name}: {rep:?}");
    assert!(rep.n_checked > rep.n_points / 2, "{name}: too few points checked {rep:?}");
    assert!(rep.passed(), "{name}: {rep:?}");
}

#[test]
fn pme_set() {
    let p = ModelParams::new(2.0, 2.0, 1.25);
    let model = Model::new(p);
    let u0 = InitialData::from_params(&p, 1.0).unwrap();
    let ov = Overrides { eta: Some(0.5), rho: Some(0.9), ..Default::default() };
    let bump = pme_bump_params_with(&model, 0.2, &u0, &ov).unwrap();
    assert_signed("pme_bump", &bump, &model.reaction);
    let g = growth_super(&model, 0.2).unwrap();
    assert_signed("growth_super", &g, &model.reaction);
    let tail = right_tail_super(2.0, 0.1, None, p.x0).unwrap();
    assert_signed("right_tail", &tail, &ReactionFn::zero());
}

#[test]
fn fde_critical_set() {
    let model = Model::new(ModelParams::new(0.5, 8.0, 1.0));
    let s = fde_sub_params(&model, 0.1, 1.0).unwrap();
    assert_signed("fde_sub", &s, &model.reaction);
    let g = growth_super(&model, 0.1).unwrap();
    assert_signed("growth_super", &g, &model.reaction);
    let tail = right_tail_super(0.5, 0.1, None, 2.0).unwrap();
    assert_signed("right_tail", &tail, &ReactionFn::zero());
}

#[test]
fn no_acceleration_set() {
    let model = Model::new(ModelParams::new(2.0, 1.0, 2.5));
    let s = constant_speed_super(&model).unwrap();
    assert_signed("constant_speed", &s, &model.reaction);
}

#[test]
fn lower_only_set() {
    let model = Model::new(ModelParams::new(0.5, 3.0, 1.2));
    let s = appendix_sub_params(&model, 0.2).unwrap();
    assert_signed("appendix_sub", &s, &model.reaction);
    let g = growth_super(&model, 0.1).unwrap();
    assert_signed("growth_super", &g, &model.reaction);
}
