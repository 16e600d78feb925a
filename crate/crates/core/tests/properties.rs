//! Algebraic properties of the information functionals and of OCTE over a
//! corpus of random four-variable pmfs.

use itertools::Itertools;
use octe_core::inference::{octe_exact, transfer_entropy, HyperedgeDecision, EXACT_TOLERANCE};
use octe_core::probcore::{
    cmi, empirical_distribution, entropy, plugin_cmi, DataMatrix, JointDistribution, VariableId,
};
use octe_core::systems::{sample, Builtin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vars(n: usize) -> Vec<VariableId> {
    (0..n).map(|i| VariableId::new(i, format!("V{i}"))).collect()
}

/// 100 pmfs over four binary/ternary variables: a third dense, a third
/// sparse (many exact zeros), a third with an independent factor so that
/// some information values vanish exactly.
fn corpus() -> Vec<JointDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..100)
        .map(|i| {
            let cards: Vec<usize> = (0..4).map(|_| rng.gen_range(2..=3)).collect();
            let size: usize = cards.iter().product();
            let mut w: Vec<f64> = (0..size).map(|_| -rng.gen::<f64>().ln()).collect();
            match i % 3 {
                1 => w.iter_mut().for_each(|x| {
                    if rng.gen_bool(0.5) {
                        *x = 0.0
                    }
                }),
                2 => {
                    // last variable independent of the rest
                    let last = cards[3];
                    let m: Vec<f64> = (0..last).map(|_| rng.gen::<f64>() + 0.1).collect();
                    for (j, x) in w.iter_mut().enumerate() {
                        *x = m[j % last] * (1.0 + (j / last) as f64);
                    }
                }
                _ => {}
            }
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let total: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            let drift: f64 = 1.0 - probs.iter().sum::<f64>();
            let mut probs = probs;
            let top = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap();
            probs[top] += drift;
            JointDistribution::new(vars(4), cards, probs).unwrap()
        })
        .collect()
}

#[test]
fn chain_rule_holds_to_1e10() {
    for d in corpus() {
        for roles in (0..4).permutations(4) {
            let (a, b, t, s) = (roles[0], roles[1], roles[2], roles[3]);
            for cond in [vec![], vec![s]] {
                let lhs = cmi(&d, &[a, b], &[t], &cond).unwrap();
                let mut cond_a = cond.clone();
                cond_a.push(a);
                let rhs = cmi(&d, &[a], &[t], &cond).unwrap() + cmi(&d, &[b], &[t], &cond_a).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn entropy_bounded_by_log_of_support() {
    for d in corpus() {
        let h = entropy(&d);
        assert!(h >= 0.0);
        assert!(h <= (d.len() as f64).log2() + 1e-12);
    }
}

#[test]
fn relabeling_categories_leaves_functionals_unchanged() {
    for d in corpus().into_iter().take(30) {
        // reverse the codes of variable 1
        let cards = d.cardinalities().to_vec();
        let mut probs = vec![0.0; d.len()];
        for (idx, cfg) in cards.iter().map(|&c| 0..c).multi_cartesian_product().enumerate() {
            let mut flipped = cfg.clone();
            flipped[1] = cards[1] - 1 - cfg[1];
            let j = flipped.iter().zip(&cards).fold(0, |acc, (&x, &c)| acc * c + x);
            probs[j] = d.probabilities()[idx];
        }
        let r = JointDistribution::new(d.variables().to_vec(), cards, probs).unwrap();
        assert!((entropy(&d) - entropy(&r)).abs() < 1e-12);
        for (a, b, s) in [
            (vec![1], vec![3], vec![]),
            (vec![0, 1], vec![3], vec![2]),
            (vec![0], vec![3], vec![1]),
        ] {
            let x = cmi(&d, &a, &b, &s).unwrap();
            let y = cmi(&r, &a, &b, &s).unwrap();
            assert!((x - y).abs() < 1e-12);
        }
    }
}

fn all_tails(cands: &[usize]) -> Vec<Vec<usize>> {
    (1..=cands.len())
        .flat_map(|k| cands.iter().copied().combinations(k))
        .collect()
}

#[test]
fn octe_is_monotone_under_supersets_and_causality_inherits() {
    let cands = [0, 1, 2];
    for d in corpus() {
        let decisions: Vec<(Vec<usize>, HyperedgeDecision)> = all_tails(&cands)
            .into_iter()
            .map(|t| {
                let dec = octe_exact(&d, &t, 3, &cands).unwrap();
                (t, dec)
            })
            .collect();
        for (i, di) in &decisions {
            for (j, dj) in &decisions {
                if i.iter().all(|v| j.contains(v)) {
                    assert!(dj.octe >= di.octe - 1e-12, "{j:?} {} < {i:?} {}", dj.octe, di.octe);
                    if di.causal {
                        assert!(dj.causal);
                    }
                }
            }
        }
    }
}

#[test]
fn octe_bounded_by_every_condition() {
    let cands = [0, 1, 2];
    for d in corpus() {
        for tail in all_tails(&cands) {
            let dec = octe_exact(&d, &tail, 3, &cands).unwrap();
            let rest: Vec<usize> = cands.iter().copied().filter(|v| !tail.contains(v)).collect();
            for k in 0..=rest.len() {
                for s in rest.iter().copied().combinations(k) {
                    assert!(dec.octe <= cmi(&d, &tail, &[3], &s).unwrap());
                }
            }
            assert!(dec.octe <= cmi(&d, &tail, &[3], &[]).unwrap());
            if tail.len() == 1 {
                assert!(dec.octe <= transfer_entropy(&d, tail[0], 3, &cands).unwrap());
            }
            let min = dec
                .subset_trace
                .iter()
                .map(|r| r.estimate)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(dec.octe, min);
            assert_eq!(
                dec.causal,
                dec.subset_trace.iter().all(|r| r.estimate > EXACT_TOLERANCE)
            );
        }
    }
}

#[test]
fn plugin_estimate_equals_exact_functional_on_empirical_table() {
    let (spec, _) = Builtin::MediatedXor { p: 3, n: 4 }.build().unwrap();
    let data: DataMatrix = sample(&spec, 20_000, 77).unwrap();
    let emp = empirical_distribution(&data, &[0, 1, 2, 3, 4]).unwrap();
    for (a, s) in [(vec![0], vec![3]), (vec![0, 1], vec![]), (vec![2], vec![0, 1, 3])] {
        let direct = plugin_cmi(&data, &a, &[4], &s).unwrap();
        let via_table = cmi(&emp, &a, &[4], &s).unwrap();
        assert!((direct - via_table).abs() < 1e-12);
    }
}
