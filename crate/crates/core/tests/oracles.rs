//! Worked examples checked against small brute-force computations written
//! here from the definitions, independent of the library's own code paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stable_committee::generators::{gen_cyclic, gen_random, gen_ranking_grid, ModelKind, RandomParams};
use stable_committee::lottery::{defender_response, dependent_round, exact_game, mwu_lottery, FractionalVector, MwuParams};
use stable_committee::preferences::check_monotonicity;
use stable_committee::rounding::{bad_set_member, good_set_member, select_representative};
use stable_committee::small_k::{k3_defender, SplitAttack};
use stable_committee::stability::lottery_score;
use stable_committee::{
    blocking_ratio, compare, min_deterministic_c, pairwise_score, strictly_prefers, verify_committee, verify_lottery,
    Committee, EnumerationBound, Instance, Lottery, Ordering, PreferenceModel, WeightSpec,
};

const ALL: EnumerationBound = EnumerationBound::AllCommittees;

fn c(members: &[u32]) -> Committee {
    Committee::new(members.iter().copied())
}

/// Position of candidate `j` in cyclic voter `v`'s ranking.
fn cyclic_rank(m: usize, v: usize, j: usize) -> usize {
    (j + m - v) % m
}

/// Does cyclic voter `v` strictly prefer `a` to `b`? The generator encodes
/// rankings as utilities `m - rank`, summed over members.
fn cyclic_prefers(m: usize, v: usize, a: &[usize], b: &[usize]) -> bool {
    let utility = |s: &[usize]| s.iter().map(|&j| m - cyclic_rank(m, v, j)).sum::<usize>();
    utility(a) > utility(b)
}

fn subsets(m: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m).map(|mask| (0..m).filter(|b| mask >> b & 1 == 1).collect()).collect()
}

#[test]
fn preference_examples() {
    let budget = PreferenceModel::Budget { utilities: vec![vec![3.0, 1.0]] };
    assert_eq!(compare(&budget, 0, &c(&[1]), &c(&[0])).unwrap(), Ordering::SecondStrict);
    let facility = PreferenceModel::Facility { distances: vec![vec![1.0, 2.0]] };
    assert!(!strictly_prefers(&facility, 0, &c(&[1]), &c(&[0])).unwrap());
    let ranking = PreferenceModel::Ranking { orders: vec![vec![0, 1, 2]] };
    assert_eq!(compare(&ranking, 0, &c(&[1, 2]), &c(&[2])).unwrap(), Ordering::FirstStrict);
}

#[test]
fn approval_pairwise_score() {
    let inst = Instance::new(
        2,
        3,
        1.0,
        WeightSpec::unit(2),
        PreferenceModel::Approval { sets: vec![vec![0], vec![1], vec![0, 1]] },
    )
    .unwrap();
    assert_eq!(pairwise_score(&inst, &inst.all_voters(), &c(&[0]), &c(&[1])).unwrap(), 1);
}

#[test]
fn blocking_ratio_formula() {
    // four of eight voters approve only candidate 0
    let sets = (0..8).map(|v| if v < 4 { vec![0] } else { vec![1] }).collect();
    let inst = Instance::new(3, 8, 4.0, WeightSpec::unit(3), PreferenceModel::Approval { sets }).unwrap();
    let ratio = blocking_ratio(&inst, &c(&[2]), &c(&[0])).unwrap();
    assert_eq!(ratio, 4.0 * 4.0 / (1.0 * 8.0));
}

#[test]
fn cyclic_committee_against_brute_force() {
    let m = 10;
    let inst = gen_cyclic(m, 0.2).unwrap();
    // worst singleton blocker of {c_1}, from the rankings directly
    let (best_j, best_v) = (1..m)
        .map(|j| (j, (0..m).filter(|&v| cyclic_prefers(m, v, &[j], &[0])).count()))
        .max_by_key(|&(_, v)| v)
        .unwrap();
    let ratio = best_v as f64 * inst.k() / m as f64;
    assert_eq!(best_j, m - 1);
    assert!((ratio - 1.71).abs() < 1e-9);

    let stable = verify_committee(&inst, &c(&[0]), 1.8, ALL).unwrap();
    assert!(stable.stable);
    let unstable = verify_committee(&inst, &c(&[0]), 1.5, ALL).unwrap();
    assert!(!unstable.stable);
    assert_eq!(unstable.worst_blocker, Some(c(&[best_j as u32])));
    assert!((unstable.worst_ratio - ratio).abs() < 1e-9);
}

#[test]
fn cyclic_min_c_against_brute_force() {
    for m in [4usize, 5, 7] {
        let eps = 0.2;
        let k = 2.0 - eps / 2.0;
        let all = subsets(m);
        let oracle = all
            .iter()
            .filter(|s| s.len() as f64 <= k)
            .map(|s| {
                all.iter()
                    .filter(|b| !b.is_empty())
                    .map(|b| {
                        let v = (0..m).filter(|&v| cyclic_prefers(m, v, b, s)).count() as f64;
                        v * k / (b.len() as f64 * m as f64)
                    })
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        let (measured, _) = min_deterministic_c(&gen_cyclic(m, eps).unwrap(), ALL).unwrap();
        assert!((measured - oracle).abs() < 1e-9, "m = {m}: {measured} vs {oracle}");
    }
}

/// Min over committees of size `<= r - 1` of the largest singleton
/// blocking ratio, with grid rankings rebuilt from their description.
fn grid_min_c(r: usize, ell: usize) -> f64 {
    let m = r * ell;
    let rank = |v: usize, c: usize| {
        let (vi, vj, ci, cj) = (v / ell, v % ell, c / ell, c % ell);
        ((ci + r - vi) % r) * ell + (cj + ell - vj) % ell
    };
    let k = (r - 1) as f64;
    let mut best = f64::INFINITY;
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    while let Some((s, next)) = stack.pop() {
        let worst = (0..m)
            .filter(|j| !s.contains(j))
            .map(|j| {
                let v = (0..m)
                    .filter(|&v| s.iter().all(|&x| rank(v, j) < rank(v, x)))
                    .count();
                v as f64 * k / m as f64
            })
            .fold(0.0, f64::max);
        best = best.min(worst);
        if s.len() < r - 1 {
            for x in next..m {
                let mut t = s.clone();
                t.push(x);
                stack.push((t, x + 1));
            }
        }
    }
    best
}

#[test]
fn grid_min_c_against_brute_force() {
    for (side, expected) in [(3usize, 8.0 / 9.0), (4, 1.125)] {
        let oracle = grid_min_c(side, side);
        assert!((oracle - expected).abs() < 1e-9);
        let inst = gen_ranking_grid(side, side).unwrap();
        let (measured, _) = min_deterministic_c(&inst, EnumerationBound::UpToSize(1)).unwrap();
        assert!((measured - oracle).abs() < 1e-9, "{side}: {measured} vs {oracle}");
    }
}

fn uniform_singletons(m: u32, k: f64) -> Lottery {
    Lottery::new(k, (0..m).map(|i| (c(&[i]), 1.0 / m as f64)).collect()).unwrap()
}

#[test]
fn lottery_score_cyclic_three() {
    let inst = gen_cyclic(3, 1.0).unwrap().with_k(1.0).unwrap();
    let delta = uniform_singletons(3, 1.0);
    for a in 0..3usize {
        let expected: f64 = (0..3)
            .map(|s| (0..3).filter(|&v| cyclic_prefers(3, v, &[a], &[s])).count() as f64 / 3.0)
            .sum();
        let got = lottery_score(&inst, &inst.all_voters(), &delta, &c(&[a as u32])).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 1.0).abs() < 1e-12);
    }
}

/// Value of the zero-sum game by a grid over the defender's mixed
/// strategies on {∅, {0}, {1}, {2}}.
fn cyclic_three_grid_value(c_target: f64, steps: usize) -> f64 {
    let m = 3;
    let defenders: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![2]];
    let attackers: Vec<Vec<usize>> = subsets(m).into_iter().filter(|s| !s.is_empty()).collect();
    let payoff = |d: &[usize], a: &[usize]| {
        (0..m).filter(|&v| cyclic_prefers(m, v, a, d)).count() as f64 - c_target * a.len() as f64 * m as f64
    };
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            for l in 0..=steps - i - j {
                let x = [(steps - i - j - l) as f64, i as f64, j as f64, l as f64].map(|t| t / steps as f64);
                let worst = attackers
                    .iter()
                    .map(|a| defenders.iter().zip(x).map(|(d, p)| p * payoff(d, a)).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                best = best.min(worst);
            }
        }
    }
    best
}

#[test]
fn exact_game_cyclic_three_against_grid() {
    let inst = gen_cyclic(3, 1.0).unwrap().with_k(1.0).unwrap();
    let steps = 60;
    for c_target in [0.3, 0.5, 1.0] {
        let oracle = cyclic_three_grid_value(c_target, steps);
        let sol = exact_game(&inst, 1.0, c_target, ALL, ALL).unwrap();
        // the grid contains the uniform lottery, so it can only overshoot
        assert!(sol.value <= oracle + 1e-7, "c = {c_target}: {} vs {oracle}", sol.value);
        assert!(sol.value >= oracle - 3.0 * 3.0 / steps as f64);
        assert_eq!(sol.value < 0.0, oracle < 0.0);
    }
}

#[test]
fn uniform_singletons_stable_on_cyclic_three() {
    let inst = gen_cyclic(3, 1.0).unwrap().with_k(1.0).unwrap();
    let delta = uniform_singletons(3, 1.0);
    // every nonempty attack: expected supporters over its size
    let worst = subsets(3)
        .into_iter()
        .filter(|a| !a.is_empty())
        .map(|a| {
            let v: f64 = (0..3)
                .map(|s| (0..3).filter(|&v| cyclic_prefers(3, v, &a, &[s])).count() as f64 / 3.0)
                .sum();
            v / (a.len() as f64 * 3.0)
        })
        .fold(0.0, f64::max);
    let report = verify_lottery(&inst, &delta, 1.0, ALL).unwrap();
    assert!((report.worst_ratio - worst).abs() < 1e-12);
    assert!(report.stable);
}

#[test]
fn dependent_round_half_half() {
    let p = FractionalVector::new(vec![0.5, 0.5], vec![1.0, 1.0], 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut first = 0;
    for _ in 0..20_000 {
        let x = dependent_round(&p, &mut rng);
        assert!(x == [1.0, 0.0] || x == [0.0, 1.0]);
        first += (x[0] == 1.0) as usize;
    }
    assert!((first as f64 / 20_000.0 - 0.5).abs() < 0.015);
}

#[test]
fn defender_covers_two_singleton_attack() {
    let inst = Instance::new(
        3,
        2,
        4.0,
        WeightSpec::unit(3),
        PreferenceModel::Ranking { orders: vec![vec![0, 1, 2], vec![1, 2, 0]] },
    )
    .unwrap();
    let mix = [(c(&[0]), 0.5), (c(&[1]), 0.5)];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s_d = defender_response(&inst, &mix, 4.0, &mut rng).unwrap();
    assert_eq!(s_d, c(&[0, 1]));
    for (a, _) in &mix {
        assert_eq!(pairwise_score(&inst, &inst.all_voters(), &s_d, a).unwrap(), 0);
    }
}

#[test]
fn good_and_bad_sets_by_direct_sum() {
    let model = PreferenceModel::Ranking { orders: vec![vec![0, 1, 2]] };
    let delta = uniform_singletons(3, 1.0);
    // mass weakly above {1}: {0}, {1}
    assert!(good_set_member(&delta, &model, 0, &c(&[1]), 0.25).unwrap());
    // mass weakly below {2}: {2} alone, 1/3 > 1/4
    assert!(!bad_set_member(&delta, &model, 0, &c(&[2]), 0.25).unwrap());
    // mass weakly above {2}: everything
    assert!(!good_set_member(&delta, &model, 0, &c(&[2]), 0.25).unwrap());
    // mass weakly below {0}: everything
    assert!(!bad_set_member(&delta, &model, 0, &c(&[0]), 0.25).unwrap());
    assert!(bad_set_member(&delta, &model, 0, &c(&[]), 0.25).unwrap());
}

#[test]
fn representative_is_common_top() {
    let orders = vec![vec![0, 1, 2]; 4];
    let model = PreferenceModel::Ranking { orders };
    let delta = uniform_singletons(3, 1.0);
    let rep = select_representative(&delta, &model, &[0, 1, 2, 3], 0.25).unwrap();
    assert_eq!(rep.committee, c(&[0]));
    assert_eq!(rep.covered, vec![0, 1, 2, 3]);
}

#[test]
fn k3_branches_by_trace() {
    let attack = SplitAttack::new(0.5, vec![(c(&[0]), 1.0)], vec![(c(&[1, 2]), 1.0)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 40_000;
    let small = (0..trials)
        .filter(|_| k3_defender(&attack, &mut rng).unwrap() == c(&[0]))
        .count();
    assert!((small as f64 / trials as f64 - 0.25).abs() < 0.01);
}

#[test]
fn cyclic_three_budget_admits_singletons_only() {
    let inst = gen_cyclic(3, 1.0).unwrap();
    assert_eq!(inst.k(), 1.5);
    for s in subsets(3) {
        let members: Vec<u32> = s.iter().map(|&x| x as u32).collect();
        assert_eq!(inst.is_feasible(&c(&members)), s.len() <= 1);
    }
}

#[test]
fn facility_monotone() {
    let inst = gen_random(ModelKind::Facility, 4, 4, 2.0, RandomParams::default(), 1).unwrap();
    assert!(check_monotonicity(&inst, 500, 1).unwrap().passed());
}

#[test]
fn mwu_on_cyclic_five() {
    let inst = gen_cyclic(5, 0.1).unwrap().with_k(1.0).unwrap();
    let out = mwu_lottery(&inst, &inst.all_voters(), 1.0, &MwuParams::new(1, 0.1, 3)).unwrap();
    let report = verify_lottery(&inst, &out.lottery, 2.1, EnumerationBound::UpToSize(1)).unwrap();
    assert!(report.stable);
    // the uniform lottery's worst singleton ratio, by direct count
    let m = 5;
    let uniform_worst = (0..m)
        .map(|a| {
            (0..m)
                .map(|s| (0..m).filter(|&v| cyclic_prefers(m, v, &[a], &[s])).count() as f64 / m as f64)
                .sum::<f64>()
                / m as f64
        })
        .fold(0.0, f64::max);
    assert!((uniform_worst - 0.4).abs() < 1e-12);
    let uniform = verify_lottery(&inst, &uniform_singletons(5, 1.0), 1.0, EnumerationBound::UpToSize(1)).unwrap();
    assert!((uniform.worst_ratio - uniform_worst).abs() < 1e-12);
}
