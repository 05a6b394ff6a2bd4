//! Steady-state candidate generation and the three reinsertion schemes:
//! restricted tournament selection, worst among most similar, and enhanced
//! crowding.

use rand::seq::index;
use rand::seq::SliceRandom;

use super::sharing::FitnessView;
use crate::fitness::EvaluateGenome;
use crate::ga::{hamming, mutate, CrossoverKind, Individual, RngStream};

/// Produce the reinsertion candidate `A` from a 5-solution tournament:
/// two random distinct parents, their two crossover children, and a mutant
/// of the fitter child. Returns the tournament winner (first maximal).
pub fn make_candidate_rts<E: EvaluateGenome>(
    pop: &[Individual],
    crossover: CrossoverKind,
    mutation_rate: f64,
    view: &FitnessView,
    rng: &mut RngStream,
    evaluator: &mut E,
) -> Individual {
    assert!(pop.len() >= 2, "candidate generation needs two parents");
    let picked = index::sample(rng, pop.len(), 2);
    let p1 = &pop[picked.index(0)];
    let p2 = &pop[picked.index(1)];

    let (g1, g2) = crossover.apply(&p1.genome, &p2.genome, rng);
    let c1 = evaluator.individual(g1);
    let c2 = evaluator.individual(g2);
    let fitter_child = if view.of(&c2, pop) > view.of(&c1, pop) {
        &c2
    } else {
        &c1
    };
    let mutant = evaluator.individual(mutate(&fitter_child.genome, mutation_rate, rng));

    let candidates = [p1, p2, &c1, &c2, &mutant];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if view.of(c, pop) > view.of(best, pop) {
            best = c;
        }
    }
    best.clone()
}

/// RTS reinsertion: among `window_n` members sampled without replacement,
/// the Hamming-closest to the candidate competes with it; the candidate
/// takes that slot only when strictly fitter. Distance ties go to the first
/// member in sample order.
pub fn reinsert_rts(
    pop: &mut [Individual],
    candidate: Individual,
    window_n: usize,
    view: &FitnessView,
    rng: &mut RngStream,
) {
    assert!(window_n >= 1 && window_n <= pop.len());
    let sample = index::sample(rng, pop.len(), window_n);
    let mut closest = sample.index(0);
    let mut closest_d = hamming(&candidate.genome, &pop[closest].genome);
    for k in 1..window_n {
        let i = sample.index(k);
        let d = hamming(&candidate.genome, &pop[i].genome);
        if d < closest_d {
            closest = i;
            closest_d = d;
        }
    }
    if view.of(&candidate, pop) > view.of(&pop[closest], pop) {
        pop[closest] = candidate;
    }
}

/// WAMS reinsertion: split the population into random subgroups of
/// `window_n` (the last takes any remainder), pick the closest member to the
/// candidate from each subgroup, and let the candidate compete with the
/// fitness-worst of those. `force_replace` restores the original
/// non-competitive variant that replaces unconditionally.
pub fn reinsert_wams(
    pop: &mut [Individual],
    candidate: Individual,
    window_n: usize,
    force_replace: bool,
    view: &FitnessView,
    rng: &mut RngStream,
) {
    let groups = random_partition(pop.len(), window_n, rng);
    let most_similar: Vec<usize> = groups
        .iter()
        .map(|group| {
            let mut best = group[0];
            let mut best_d = hamming(&candidate.genome, &pop[best].genome);
            for &i in &group[1..] {
                let d = hamming(&candidate.genome, &pop[i].genome);
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect();

    let mut worst = most_similar[0];
    for &i in &most_similar[1..] {
        if view.of(&pop[i], pop) < view.of(&pop[worst], pop) {
            worst = i;
        }
    }
    if force_replace || view.of(&candidate, pop) > view.of(&pop[worst], pop) {
        pop[worst] = candidate;
    }
}

/// EC reinsertion: the fitness-worst member of each random subgroup enters a
/// second-stage group; its Hamming-closest member to the candidate competes
/// with the candidate for its slot.
pub fn reinsert_ec(
    pop: &mut [Individual],
    candidate: Individual,
    window_n: usize,
    view: &FitnessView,
    rng: &mut RngStream,
) {
    let groups = random_partition(pop.len(), window_n, rng);
    let stage_two: Vec<usize> = groups
        .iter()
        .map(|group| {
            let mut worst = group[0];
            for &i in &group[1..] {
                if view.of(&pop[i], pop) < view.of(&pop[worst], pop) {
                    worst = i;
                }
            }
            worst
        })
        .collect();

    let mut closest = stage_two[0];
    let mut closest_d = hamming(&candidate.genome, &pop[closest].genome);
    for &i in &stage_two[1..] {
        let d = hamming(&candidate.genome, &pop[i].genome);
        if d < closest_d {
            closest = i;
            closest_d = d;
        }
    }
    if view.of(&candidate, pop) > view.of(&pop[closest], pop) {
        pop[closest] = candidate;
    }
}

/// Random partition of `0..n` into consecutive chunks of `group_size` after
/// a shuffle; the last chunk keeps the remainder.
pub(crate) fn random_partition(
    n: usize,
    group_size: usize,
    rng: &mut RngStream,
) -> Vec<Vec<usize>> {
    assert!(group_size >= 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(group_size).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FitnessRecord;
    use crate::ga::Genome;

    fn ind(bits: &str, f_max: f64) -> Individual {
        Individual {
            genome: Genome::from_str01(bits).unwrap(),
            fitness: FitnessRecord {
                f: 1.0 / f_max,
                f_max,
                rmse: 0.0,
                r: 1.0,
                pen: 0.0,
                n_selected: 0,
            },
        }
    }

    struct PlantedFitness<F: Fn(&Genome) -> f64>(F);

    impl<F: Fn(&Genome) -> f64> EvaluateGenome for PlantedFitness<F> {
        fn individual(&mut self, genome: Genome) -> Individual {
            let f_max = (self.0)(&genome);
            let n_selected = genome.count_ones();
            Individual {
                genome,
                fitness: FitnessRecord {
                    f: 1.0 / f_max,
                    f_max,
                    rmse: 0.0,
                    r: 1.0,
                    pen: 0.0,
                    n_selected,
                },
            }
        }
    }

    #[test]
    fn duplicate_children_make_the_fitter_parent_win() {
        // two length-2 parents; single-point crossover at the only cut
        // reproduces the parents, and a rate-0 mutant copies the fitter child
        let pop = vec![ind("00", 2.0), ind("01", 1.0)];
        let mut evaluator = PlantedFitness(|g: &Genome| match g.to_string01().as_str() {
            "00" => 2.0,
            "01" => 1.0,
            _ => unreachable!("single-point crossover of 00/01 reproduces the parents"),
        });
        let mut rng = RngStream::from_seed(1);
        let a = make_candidate_rts(
            &pop,
            CrossoverKind::SinglePoint,
            0.0,
            &FitnessView::Raw,
            &mut rng,
            &mut evaluator,
        );
        assert_eq!(a.genome.to_string01(), "00");
        assert_eq!(a.fitness.f_max, 2.0);
    }

    #[test]
    fn candidate_matches_hand_enumeration() {
        // length-2 genomes, deterministic single-point children; replaying
        // the parent draw pins the whole 5-candidate set
        let f_of = |g: &Genome| match g.to_string01().as_str() {
            "00" => 1.0,
            "01" => 4.0,
            "10" => 2.0,
            "11" => 3.0,
            _ => unreachable!(),
        };
        let genomes = ["00", "01", "10", "11"];
        let pop: Vec<Individual> = genomes.iter().map(|b| ind(b, {
            let g = Genome::from_str01(b).unwrap();
            f_of(&g)
        })).collect();

        for seed in 0..20 {
            let mut probe = RngStream::from_seed(seed);
            let picked = index::sample(&mut probe, 4, 2);
            let (i, j) = (picked.index(0), picked.index(1));
            let a = genomes[i].as_bytes();
            let b = genomes[j].as_bytes();
            let c1 = format!("{}{}", a[0] as char, b[1] as char);
            let c2 = format!("{}{}", b[0] as char, a[1] as char);
            let fitter_child = if f_of(&Genome::from_str01(&c2).unwrap())
                > f_of(&Genome::from_str01(&c1).unwrap())
            {
                c2.clone()
            } else {
                c1.clone()
            };
            // candidate order: p1, p2, c1, c2, mutant-of-fitter-child
            let five = [
                genomes[i].to_string(),
                genomes[j].to_string(),
                c1,
                c2,
                fitter_child,
            ];
            let mut expected = five[0].clone();
            for s in &five[1..] {
                if f_of(&Genome::from_str01(s).unwrap())
                    > f_of(&Genome::from_str01(&expected).unwrap())
                {
                    expected = s.clone();
                }
            }

            let mut rng = RngStream::from_seed(seed);
            let mut evaluator = PlantedFitness(f_of);
            let got = make_candidate_rts(
                &pop,
                CrossoverKind::SinglePoint,
                0.0,
                &FitnessView::Raw,
                &mut rng,
                &mut evaluator,
            );
            assert_eq!(got.genome.to_string01(), expected, "seed {seed}");
        }
    }

    #[test]
    fn candidate_set_has_five_members() {
        // count evaluator calls: 2 children + 1 mutant, plus the 2 parents
        // already evaluated = 5 candidates
        let pop = vec![ind("0011", 1.0), ind("1100", 2.0), ind("1111", 3.0)];
        let mut calls = 0;
        struct Counting<'a>(&'a mut usize);
        impl EvaluateGenome for Counting<'_> {
            fn individual(&mut self, genome: Genome) -> Individual {
                *self.0 += 1;
                let n_selected = genome.count_ones();
                Individual {
                    genome,
                    fitness: FitnessRecord {
                        f: 1.0,
                        f_max: 1.0,
                        rmse: 0.0,
                        r: 1.0,
                        pen: 0.0,
                        n_selected,
                    },
                }
            }
        }
        let mut rng = RngStream::from_seed(2);
        let _ = make_candidate_rts(
            &pop,
            CrossoverKind::Uniform,
            0.1,
            &FitnessView::Raw,
            &mut rng,
            &mut Counting(&mut calls),
        );
        assert_eq!(calls, 3);
    }

    #[test]
    fn rts_full_window_finds_the_global_closest() {
        let mut pop = vec![ind("0000", 1.0), ind("0111", 1.0), ind("1111", 1.0)];
        let a = ind("0001", 5.0);
        let mut rng = RngStream::from_seed(3);
        reinsert_rts(&mut pop, a.clone(), 3, &FitnessView::Raw, &mut rng);
        // distances 1, 2, 3: slot 0 is replaced regardless of sample order
        assert_eq!(pop[0].genome, a.genome);
        assert_eq!(pop[1].genome.to_string01(), "0111");
        assert_eq!(pop[2].genome.to_string01(), "1111");
    }

    #[test]
    fn rts_loser_candidate_changes_nothing() {
        let mut pop = vec![ind("0000", 2.0), ind("0111", 2.0)];
        let before: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        let a = ind("0001", 1.0);
        let mut rng = RngStream::from_seed(4);
        reinsert_rts(&mut pop, a, 2, &FitnessView::Raw, &mut rng);
        let after: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn rts_distance_ties_go_to_the_first_sampled() {
        // all members at distance 1 from the candidate: the winner of the
        // tie is the first index in sample order
        let members = ["000", "011", "110"];
        for seed in 0..10 {
            let mut pop: Vec<Individual> = members.iter().map(|b| ind(b, 1.0)).collect();
            let a = ind("010", 9.0);

            let mut probe = RngStream::from_seed(seed);
            let expected_slot = index::sample(&mut probe, 3, 3).index(0);

            let mut rng = RngStream::from_seed(seed);
            reinsert_rts(&mut pop, a.clone(), 3, &FitnessView::Raw, &mut rng);
            assert_eq!(pop[expected_slot].genome, a.genome, "seed {seed}");
            let replaced = pop
                .iter()
                .filter(|i| i.genome == a.genome)
                .count();
            assert_eq!(replaced, 1);
        }
    }

    #[test]
    fn wams_single_group_competes_with_the_closest() {
        // one subgroup = whole population: most-similar set is the single
        // closest member; distances to a are 3, 1, 2 (unique)
        let mut pop = vec![ind("0000", 5.0), ind("0011", 1.0), ind("1101", 4.0)];
        let a = ind("0111", 2.0);
        let mut rng = RngStream::from_seed(5);
        reinsert_wams(&mut pop, a.clone(), 3, false, &FitnessView::Raw, &mut rng);
        // closest is 0011 (d=1) with f 1.0 < 2.0: replaced
        assert_eq!(pop[1].genome, a.genome);
    }

    #[test]
    fn wams_loser_candidate_changes_nothing() {
        let mut pop = vec![ind("0000", 5.0), ind("0011", 3.0)];
        let before: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        let a = ind("0111", 2.0);
        let mut rng = RngStream::from_seed(6);
        reinsert_wams(&mut pop, a, 2, false, &FitnessView::Raw, &mut rng);
        let after: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn wams_force_replace_ignores_the_competition() {
        let mut pop = vec![ind("0000", 5.0), ind("0011", 3.0)];
        let a = ind("0111", 2.0);
        let mut rng = RngStream::from_seed(6);
        reinsert_wams(&mut pop, a.clone(), 2, true, &FitnessView::Raw, &mut rng);
        assert!(pop.iter().any(|i| i.genome == a.genome));
    }

    #[test]
    fn wams_six_member_trace_matches_the_partition() {
        let bits = ["000000", "000011", "001111", "111111", "110000", "101010"];
        let fs = [3.0, 1.0, 4.0, 2.0, 5.0, 6.0];
        for seed in 0..20 {
            let mut pop: Vec<Individual> = bits
                .iter()
                .zip(fs)
                .map(|(b, f)| ind(b, f))
                .collect();
            let a = ind("000001", 3.5);

            // independent fold over the replayed partition
            let mut probe = RngStream::from_seed(seed);
            let groups = random_partition(6, 3, &mut probe);
            let d = |i: usize| {
                bits[i]
                    .bytes()
                    .zip("000001".bytes())
                    .filter(|(p, q)| p != q)
                    .count()
            };
            // min_by_key keeps the first minimum, matching the group-order
            // tie rule
            let similar: Vec<usize> = groups
                .iter()
                .map(|g| *g.iter().min_by_key(|&&i| d(i)).unwrap())
                .collect();
            // first minimal fitness among the similar set
            let mut expected_w = similar[0];
            for &i in &similar[1..] {
                if fs[i] < fs[expected_w] {
                    expected_w = i;
                }
            }

            let mut rng = RngStream::from_seed(seed);
            reinsert_wams(&mut pop, a.clone(), 3, false, &FitnessView::Raw, &mut rng);
            if 3.5 > fs[expected_w] {
                assert_eq!(pop[expected_w].genome, a.genome, "seed {seed}");
            } else {
                assert_eq!(pop[expected_w].genome.to_string01(), bits[expected_w]);
            }
        }
    }

    #[test]
    fn ec_single_group_promotes_the_worst() {
        // one subgroup: its worst member is the sole second-stage candidate
        let mut pop = vec![ind("0000", 5.0), ind("0011", 1.0), ind("1111", 4.0)];
        let a = ind("1110", 2.0);
        let mut rng = RngStream::from_seed(7);
        reinsert_ec(&mut pop, a.clone(), 3, &FitnessView::Raw, &mut rng);
        // worst is 0011 (f=1); a is fitter and takes its slot even though
        // 1111 is closer to a
        assert_eq!(pop[1].genome, a.genome);
        assert_eq!(pop[2].genome.to_string01(), "1111");
    }

    #[test]
    fn ec_loser_candidate_changes_nothing() {
        let mut pop = vec![ind("0000", 5.0), ind("0011", 3.0)];
        let before: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        let a = ind("0111", 2.0);
        let mut rng = RngStream::from_seed(8);
        reinsert_ec(&mut pop, a, 2, &FitnessView::Raw, &mut rng);
        let after: Vec<String> = pop.iter().map(|i| i.genome.to_string01()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn ec_six_member_trace_matches_the_partition() {
        let bits = ["000000", "000011", "001111", "111111", "110000", "101010"];
        let fs = [3.0, 1.0, 4.0, 2.0, 5.0, 6.0];
        for seed in 0..20 {
            let mut pop: Vec<Individual> = bits
                .iter()
                .zip(fs)
                .map(|(b, f)| ind(b, f))
                .collect();
            let a = ind("000001", 3.5);

            let mut probe = RngStream::from_seed(seed);
            let groups = random_partition(6, 3, &mut probe);
            // second stage: first-minimal fitness per group
            let stage2: Vec<usize> = groups
                .iter()
                .map(|g| {
                    let mut w = g[0];
                    for &i in &g[1..] {
                        if fs[i] < fs[w] {
                            w = i;
                        }
                    }
                    w
                })
                .collect();
            let d = |i: usize| {
                bits[i]
                    .bytes()
                    .zip("000001".bytes())
                    .filter(|(p, q)| p != q)
                    .count()
            };
            let mut expected = stage2[0];
            for &i in &stage2[1..] {
                if d(i) < d(expected) {
                    expected = i;
                }
            }

            let mut rng = RngStream::from_seed(seed);
            reinsert_ec(&mut pop, a.clone(), 3, &FitnessView::Raw, &mut rng);
            if 3.5 > fs[expected] {
                assert_eq!(pop[expected].genome, a.genome, "seed {seed}");
            } else {
                assert_eq!(pop[expected].genome.to_string01(), bits[expected]);
            }
        }
    }

    #[test]
    fn competitive_reinsertion_never_installs_a_worse_candidate() {
        let bits = ["0000", "0011", "1100", "1111", "0101", "1010"];
        for seed in 0..50u64 {
            let mut rng = RngStream::from_seed(seed);
            let fs = [2.0, 4.0, 1.0, 3.0, 6.0, 5.0];
            let mut pop: Vec<Individual> =
                bits.iter().zip(fs).map(|(b, f)| ind(b, f)).collect();
            let a = ind("0110", 3.5);
            let before: Vec<(String, f64)> = pop
                .iter()
                .map(|i| (i.genome.to_string01(), i.fitness.f_max))
                .collect();
            match seed % 3 {
                0 => reinsert_rts(&mut pop, a.clone(), 4, &FitnessView::Raw, &mut rng),
                1 => reinsert_wams(&mut pop, a.clone(), 2, false, &FitnessView::Raw, &mut rng),
                _ => reinsert_ec(&mut pop, a.clone(), 2, &FitnessView::Raw, &mut rng),
            }
            for (i, (bits_before, f_before)) in before.iter().enumerate() {
                if pop[i].genome.to_string01() != *bits_before {
                    assert!(
                        *f_before < a.fitness.f_max,
                        "seed {seed}: replaced member had f {f_before}"
                    );
                }
            }
        }
    }

    #[test]
    fn partition_covers_everything_with_remainder() {
        let mut rng = RngStream::from_seed(9);
        let groups = random_partition(7, 3, &mut rng);
        assert_eq!(groups.len(), 3);
        assert_eq!(groups[0].len(), 3);
        assert_eq!(groups[1].len(), 3);
        assert_eq!(groups[2].len(), 1);
        let mut all: Vec<usize> = groups.concat();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }
}
