use omega_pac::automata::ProductMdp;
use omega_pac::experiments::runner::{run_experiment, Experiment, ExperimentSpec};
use omega_pac::experiments::{chain, figure1, gridworld};
use omega_pac::io::{model_from_json, model_to_json};
use omega_pac::solver::optimal_policy;

#[test]
fn generators_produce_valid_models() {
    for n in 1..=10 {
        assert!(chain::mdp(n).validate().is_valid());
    }
    for p in [0.5, 0.05, 0.005, 1.0] {
        assert!(figure1::mdp(p).validate().is_valid());
    }
    let g = gridworld::mdp();
    assert!(g.validate().is_valid());
    assert_eq!(g.num_states(), gridworld::WIDTH * gridworld::HEIGHT);
    assert_eq!(g.num_actions(), 4);
}

#[test]
fn generators_survive_json_round_trip() {
    for m in [chain::mdp(8), figure1::mdp(0.05), gridworld::mdp()] {
        assert_eq!(model_from_json(&model_to_json(&m), false).unwrap(), m);
    }
}

#[test]
fn chain_optimum_is_one_half_by_jumping_first() {
    for n in [1, 2, 8] {
        let m = chain::mdp(n);
        let r = optimal_policy(&m);
        assert!((r.initial_value(&m) - 0.5).abs() < 1e-12);
        assert_eq!(r.policy.action(0), chain::JUMP);
    }
}

#[test]
fn gridworld_trap_is_losing_and_start_wins() {
    let g = gridworld::mdp();
    let p = ProductMdp::build(&g, &gridworld::automaton()).unwrap();
    let r = optimal_policy(p.mdp());
    assert_eq!(r.initial_value(p.mdp()), 1.0);
    let trap = gridworld::cell(gridworld::TRAP.0, gridworld::TRAP.1);
    for (i, &(s, _)) in p.pairs().iter().enumerate() {
        if s == trap {
            assert_eq!(r.value[i], 0.0);
        }
    }
}

#[test]
fn chain_runs_are_reproducible_and_near_optimal() {
    let mut spec = ExperimentSpec::new(Experiment::Chain { n: 8 }, 1.0 / 60.0, 0.1, 3, 4);
    spec.k_values = vec![200];
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a, b);
    assert!(a.all_terminated());
    assert_eq!(a.summary.horizon, 8);
    assert_eq!(a.summary.reported_states, 8);
    let mut x = Vec::new();
    a.write_csv(&mut x).unwrap();
    let text = String::from_utf8(x).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("experiment,run,seed,k,"));
}
