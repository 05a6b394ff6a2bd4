//! Fitness sharing: divide raw fitness by niche occupancy so overcrowded
//! niches are penalized.

use crate::ga::{hamming, Genome, Individual};

/// Fitness as seen by steady-state competitions: either the raw `f_max` or
/// the shared value against the current population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessView {
    Raw,
    Shared { radius: usize },
}

impl FitnessView {
    pub fn of(&self, individual: &Individual, pop: &[Individual]) -> f64 {
        match self {
            FitnessView::Raw => individual.fitness.f_max,
            FitnessView::Shared { radius } => {
                individual.fitness.f_max / niche_count(&individual.genome, pop, *radius) as f64
            }
        }
    }
}

/// Population members within Hamming distance `radius` of `genome`, at
/// least 1 (a candidate outside the population counts as its own niche).
pub(crate) fn niche_count(genome: &Genome, pop: &[Individual], radius: usize) -> usize {
    pop.iter()
        .filter(|m| hamming(&m.genome, genome) <= radius)
        .count()
        .max(1)
}

/// Shared fitness `f_max / m_i` for every population member, where `m_i`
/// counts members (including self) within Hamming distance `radius`.
///
/// Radius 0 disables sharing entirely (`m_i = 1` for everyone), which makes
/// the FS hybrids collapse to their base algorithms.
pub fn shared_fitness(pop: &[Individual], radius: usize) -> Vec<f64> {
    if radius == 0 {
        return pop.iter().map(|i| i.fitness.f_max).collect();
    }
    pop.iter()
        .map(|i| i.fitness.f_max / niche_count(&i.genome, pop, radius) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FitnessRecord;

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

    #[test]
    fn isolated_niches_keep_raw_fitness() {
        let pop = vec![ind("000000", 2.0), ind("111111", 3.0), ind("000111", 5.0)];
        assert_eq!(shared_fitness(&pop, 1), vec![2.0, 3.0, 5.0]);
    }

    #[test]
    fn identical_genomes_split_fitness_k_ways() {
        let pop: Vec<Individual> = (0..4).map(|_| ind("0101", 2.0)).collect();
        assert_eq!(shared_fitness(&pop, 1), vec![0.5; 4]);
    }

    #[test]
    fn doubling_occupancy_halves_shared_values() {
        let mut pop: Vec<Individual> = (0..3).map(|_| ind("0101", 2.0)).collect();
        let before = shared_fitness(&pop, 0x1)[0];
        pop.extend((0..3).map(|_| ind("0101", 2.0)));
        let after = shared_fitness(&pop, 1)[0];
        assert_eq!(after, before / 2.0);
    }

    #[test]
    fn radius_zero_disables_sharing() {
        let pop: Vec<Individual> = (0..5).map(|_| ind("0101", 2.0)).collect();
        assert_eq!(shared_fitness(&pop, 0), vec![2.0; 5]);
    }

    #[test]
    fn within_niche_ranking_is_preserved() {
        // same genome => same m_i; shared order must equal raw order
        let pop = vec![ind("0011", 1.0), ind("0011", 4.0), ind("0011", 2.5)];
        let shared = shared_fitness(&pop, 2);
        assert!(shared[1] > shared[2] && shared[2] > shared[0]);
    }

    #[test]
    fn external_candidate_counts_as_its_own_niche() {
        let pop = vec![ind("0000", 2.0)];
        let lone = Genome::from_str01("1111").unwrap();
        assert_eq!(niche_count(&lone, &pop, 1), 1);
        assert_eq!(niche_count(&pop[0].genome, &pop, 1), 1);
    }
}
