use std::collections::BTreeSet;

use omega_pac::experiments::figure1;
use omega_pac::graph::{bsccs, mec_decomposition};
use omega_pac::random::{random_chain, random_mdp};
use omega_pac::{rng_from_seed, MarkovChain, Mdp, PositionalPolicy};
use proptest::prelude::*;
use rand::Rng;

/// Transitive closure of the positive-edge relation, reflexive.
fn closure(adj: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut r = vec![vec![false; n]; n];
    for s in 0..n {
        r[s][s] = true;
        for &t in &adj[s] {
            r[s][t] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn brute_bsccs(c: &MarkovChain) -> BTreeSet<BTreeSet<usize>> {
    let n = c.num_states();
    let adj: Vec<Vec<usize>> = (0..n).map(|s| c.successors(s).collect()).collect();
    let r = closure(&adj);
    (0..n)
        .filter(|&s| (0..n).all(|t| !r[s][t] || r[t][s]))
        .map(|s| (0..n).filter(|&t| r[s][t]).collect())
        .collect()
}

fn random_policy<R: Rng>(m: &Mdp, rng: &mut R) -> PositionalPolicy {
    PositionalPolicy(
        (0..m.num_states())
            .map(|s| {
                let acts: Vec<usize> = m.enabled(s).collect();
                acts[rng.random_range(0..acts.len())]
            })
            .collect(),
    )
}

type Pairs = BTreeSet<(usize, usize)>;

/// Whether a set of state-action pairs is an end component: closed under its
/// actions and strongly connected.
fn is_ec(m: &Mdp, pairs: &Pairs) -> bool {
    let states: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    if states.is_empty() {
        return false;
    }
    let n = m.num_states();
    let mut adj = vec![Vec::new(); n];
    for &(s, a) in pairs {
        for t in m.choice(s, a).unwrap().support() {
            if !states.contains(&t) {
                return false;
            }
            adj[s].push(t);
        }
    }
    let r = closure(&adj);
    states.iter().all(|&x| states.iter().all(|&y| r[x][y]))
}

fn brute_mecs(m: &Mdp) -> BTreeSet<Pairs> {
    let all: Vec<(usize, usize)> = (0..m.num_states()).flat_map(|s| m.enabled(s).map(move |a| (s, a))).collect();
    let ecs: Vec<Pairs> = (1u32..1 << all.len())
        .map(|mask| all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect())
        .filter(|p| is_ec(m, p))
        .collect();
    ecs.iter().filter(|e| !ecs.iter().any(|f| f.len() > e.len() && e.is_subset(f))).cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bsccs_match_closure(seed in any::<u64>()) {
        let c = random_chain(&mut rng_from_seed(seed), 8);
        let got: BTreeSet<BTreeSet<usize>> = bsccs(&c).into_iter().map(|b| b.into_iter().collect()).collect();
        prop_assert_eq!(got, brute_bsccs(&c));
    }

    #[test]
    fn mecs_match_exhaustive_enumeration(seed in any::<u64>()) {
        let m = random_mdp(&mut rng_from_seed(seed), 5, 3);
        let got: BTreeSet<Pairs> = mec_decomposition(&m)
            .into_iter()
            .map(|ec| ec.actions.iter().flat_map(|(&s, acts)| acts.iter().map(move |&a| (s, a))).collect())
            .collect();
        prop_assert_eq!(got, brute_mecs(&m));
    }

    #[test]
    fn reachable_within_is_monotone_and_saturates(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let m = random_mdp(&mut rng, 6, 3);
        let pi = random_policy(&m, &mut rng);
        let n = m.num_states();
        let mut prev = m.reachable_within(&pi, 0);
        prop_assert_eq!(&prev, &BTreeSet::from([m.initial()]));
        for t in 1..=n + 2 {
            let cur = m.reachable_within(&pi, t);
            prop_assert!(prev.is_subset(&cur));
            prev = cur;
        }
        prop_assert_eq!(m.reachable_within(&pi, n), prev);
    }

    #[test]
    fn induced_chain_is_stochastic(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let m = random_mdp(&mut rng, 6, 3);
        let pi = random_policy(&m, &mut rng);
        let c = m.induce_chain(&pi).unwrap();
        prop_assert!(c.validate().is_valid());
        for s in 0..m.num_states() {
            let sum: f64 = c.row(s).iter().map(|e| e.1).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            for t in 0..m.num_states() {
                prop_assert_eq!(c.probability(s, t), m.choice(s, pi.action(s)).unwrap().probability(t));
            }
        }
    }
}

#[test]
fn one_step_frequencies_match_probabilities() {
    let p = 0.3;
    let m = figure1::mdp(p);
    let pi = PositionalPolicy(vec![figure1::ACTION_B, figure1::ACTION_A]);
    let mut rng = rng_from_seed(11);
    let n = 10_000;
    let hits = (0..n).filter(|_| m.sample_trajectory(&pi, 1, &mut rng).terminal() == figure1::S1).count();
    assert!((hits as f64 / n as f64 - p).abs() <= 0.02, "{hits}");
}

#[test]
fn multinomial_sampling_passes_chi_square() {
    let row = vec![(0, 0.1), (1, 0.2), (2, 0.3), (3, 0.4)];
    let c = MarkovChain::new(vec![row.clone(), vec![(1, 1.0)], vec![(2, 1.0)], vec![(3, 1.0)]], 0, omega_pac::AcceptanceCondition::buchi([]));
    let mut rng = rng_from_seed(3);
    let n = 20_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[c.sample_next(0, &mut rng)] += 1;
    }
    let chi2: f64 = row
        .iter()
        .map(|&(t, p)| {
            let e = p * n as f64;
            (counts[t] as f64 - e).powi(2) / e
        })
        .sum();
    // 99.9% quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 16.27, "chi2 = {chi2}");
}
