use ::omega_pac::automata::automaton::{gf_s_and_gf_g, globally, letter_props};
use ::omega_pac::automata::ltl::Letter;
use ::omega_pac::automata::{parse_ltl, LiftedPolicy, OmegaAutomaton, OnTheFlyProduct, ProductMdp};
use ::omega_pac::env::Environment;
use ::omega_pac::experiments::{figure1, gridworld};
use ::omega_pac::learner::{omega_pac, LearnerConfig};
use ::omega_pac::random::random_mdp;
use ::omega_pac::solver::optimal_policy;
use ::omega_pac::{rng_from_seed, Mdp};
use rand::Rng;

/// Every word over `letters` of length `len`.
fn words(letters: &[Letter], len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Letter>| letters.iter().map(move |l| [w.clone(), vec![l.clone()]].concat()))
            .collect();
    }
    out
}

fn check_against_ltl(aut: &OmegaAutomaton, formula: &str, max_len: usize) -> usize {
    let ap = aut.ap().to_vec();
    let f = parse_ltl(formula, Some(&ap)).unwrap();
    let letters: Vec<Letter> = (0..1u32 << ap.len()).map(|l| letter_props(&ap, l)).collect();
    let mut checked = 0;
    for total in 1..=max_len {
        for cycle_len in 1..=total {
            for prefix in words(&letters, total - cycle_len) {
                for cycle in words(&letters, cycle_len) {
                    let want = f.eval_on_lasso(&prefix, &cycle).unwrap();
                    let got = aut.accepts_lasso(&prefix, &cycle).unwrap();
                    assert_eq!(got, want, "{formula} on {prefix:?}({cycle:?})^w");
                    checked += 1;
                }
            }
        }
    }
    checked
}

#[test]
fn fixture_automata_agree_with_ltl_on_short_lassos() {
    assert!(check_against_ltl(&gf_s_and_gf_g(), "G F s & G F g", 6) > 4096);
    check_against_ltl(&globally("s0"), "G s0", 6);
}

#[test]
fn fixture_files_match_builtin_automata() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    let read = |name: &str| std::fs::read_to_string(format!("{dir}/{name}")).unwrap();
    assert_eq!(OmegaAutomaton::from_json(&read("gf_s_and_gf_g.json")).unwrap(), gf_s_and_gf_g());
    assert_eq!(OmegaAutomaton::from_json(&read("globally_s0.json")).unwrap(), globally("s0"));
    let aut = gf_s_and_gf_g();
    assert_eq!(OmegaAutomaton::from_json(&aut.to_json()).unwrap(), aut);
}

#[test]
fn gridworld_product_dimensions() {
    let m = gridworld::mdp();
    let aut = gridworld::automaton();
    let full = ProductMdp::build_full(&m, &aut).unwrap();
    assert_eq!(full.mdp().num_states(), 12);
    assert_eq!(full.mdp().num_actions(), 4);
    assert!(full.mdp().validate().is_valid());
    let reach = ProductMdp::build(&m, &aut).unwrap();
    assert_eq!(reach.mdp().num_states(), 11);
    assert_eq!(full.num_reachable(), 11);
    // the unreachable pair does not change the optimum
    assert_eq!(optimal_policy(full.mdp()).initial_value(full.mdp()), optimal_policy(reach.mdp()).initial_value(reach.mdp()));
}

/// Figure 1 and the gridworld, plus random MDPs labelled over `{s, g}`.
fn labelled_models() -> Vec<(Mdp, OmegaAutomaton)> {
    let mut out = vec![(figure1::mdp(0.3), globally("s0")), (gridworld::mdp(), gridworld::automaton())];
    let mut rng = rng_from_seed(17);
    for _ in 0..20 {
        let mut m = random_mdp(&mut rng, 5, 3);
        for s in 0..m.num_states() {
            let l: Vec<&str> = ["s", "g"].into_iter().filter(|_| rng.random_bool(0.4)).collect();
            m.set_labels(s, l);
        }
        out.push((m, gf_s_and_gf_g()));
    }
    out
}

#[test]
fn lifted_policy_reproduces_product_runs() {
    for (m, aut) in labelled_models() {
        let product = ProductMdp::build(&m, &aut).unwrap();
        let pi = optimal_policy(product.mdp()).policy;
        let lifted = LiftedPolicy::new(&product, &aut, pi.clone());
        for seed in 0..1000 {
            let a = lifted.simulate(&m, 12, &mut rng_from_seed(seed));
            let b = product.mdp().sample_trajectory(&pi, 12, &mut rng_from_seed(seed));
            let b: Vec<(usize, usize)> = b.states.iter().map(|&i| product.pair(i)).collect();
            assert_eq!(a, b, "seed {seed}");
        }
    }
}

#[test]
fn on_the_fly_product_learns_like_the_eager_one() {
    for (m, aut) in labelled_models().into_iter().take(6) {
        let eager = ProductMdp::build(&m, &aut).unwrap();
        let lazy = OnTheFlyProduct::new(m.clone(), aut.clone()).unwrap();
        let cfg = LearnerConfig::new(0.1, 0.1, 6, 20, 5);
        let a = omega_pac(eager.mdp(), &cfg).unwrap();
        let b = omega_pac(&lazy, &cfg).unwrap();
        assert_eq!(a.trace.rows, b.trace.rows);
        assert_eq!((a.episodes, a.samples, a.unknown_visits), (b.episodes, b.samples, b.unknown_visits));
        assert!(a.terminated);
        let mut pairs_a: Vec<_> = a.policy.0.iter().map(|(&i, &x)| (eager.pair(i), x)).collect();
        let mut pairs_b: Vec<_> = b.policy.0.iter().map(|(&i, &x)| (lazy.pair(i), x)).collect();
        pairs_a.sort();
        pairs_b.sort();
        assert_eq!(pairs_a, pairs_b);
        assert_eq!(lazy.initial(), 0);
    }
}
