//! Crowding: random parent pairing, offspring-to-parent assignment by
//! genotype distance, and the deterministic / probabilistic substitution
//! rules.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::fitness::EvaluateGenome;
use crate::ga::{hamming, mutate, CrossoverKind, Genome, Individual, RngStream};

/// Assignment of the two children to the two parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// (p1, c1), (p2, c2)
    Straight,
    /// (p1, c2), (p2, c1)
    Crossed,
}

/// Pair each child with the parent set minimizing the total genotype
/// distance; ties resolve to the straight pairing.
pub fn pair_offspring(
    p1: &Individual,
    p2: &Individual,
    c1: &Individual,
    c2: &Individual,
) -> Pairing {
    let straight = hamming(&p1.genome, &c1.genome) + hamming(&p2.genome, &c2.genome);
    let crossed = hamming(&p1.genome, &c2.genome) + hamming(&p2.genome, &c1.genome);
    if straight <= crossed {
        Pairing::Straight
    } else {
        Pairing::Crossed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Survivor {
    Parent,
    Child,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionRule {
    Deterministic,
    Probabilistic,
}

/// Deterministic crowding: the fitter of the pair survives; exact ties are
/// broken with probability 0.5.
pub fn substitute_dc(parent: &Individual, child: &Individual, rng: &mut RngStream) -> Survivor {
    if child.fitness.f_max > parent.fitness.f_max {
        Survivor::Child
    } else if child.fitness.f_max == parent.fitness.f_max {
        if rng.gen_bool(0.5) {
            Survivor::Child
        } else {
            Survivor::Parent
        }
    } else {
        Survivor::Parent
    }
}

/// Probabilistic crowding: the child survives with probability
/// `f(c) / (f(c) + f(p))`.
pub fn substitute_pc(parent: &Individual, child: &Individual, rng: &mut RngStream) -> Survivor {
    let fc = child.fitness.f_max;
    let fp = parent.fitness.f_max;
    debug_assert!(fc > 0.0 && fp > 0.0, "f_max must be positive");
    if rng.gen_bool(fc / (fc + fp)) {
        Survivor::Child
    } else {
        Survivor::Parent
    }
}

/// One crowding generation: randomly partition the population into parent
/// pairs, produce two children per pair by crossover and mutation, assign
/// competitions by distance, and substitute per the rule. Population size is
/// unchanged.
pub fn step_crowding<E: EvaluateGenome>(
    pop: &mut [Individual],
    crossover: CrossoverKind,
    mutation_rate: f64,
    rule: SubstitutionRule,
    rng: &mut RngStream,
    evaluator: &mut E,
) {
    let n = pop.len();
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "crowding requires an even population"
    );

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    // All variation happens before any evaluation or substitution, so the
    // randomness consumed per generation does not depend on fitness values.
    let mut children: Vec<Genome> = Vec::with_capacity(n);
    for pair in order.chunks_exact(2) {
        let (c1, c2) = crossover.apply(&pop[pair[0]].genome, &pop[pair[1]].genome, rng);
        children.push(mutate(&c1, mutation_rate, rng));
        children.push(mutate(&c2, mutation_rate, rng));
    }
    let children = evaluator.individuals(children);

    for (k, pair) in order.chunks_exact(2).enumerate() {
        let (i1, i2) = (pair[0], pair[1]);
        let (c1, c2) = (&children[2 * k], &children[2 * k + 1]);
        let assignments = match pair_offspring(&pop[i1], &pop[i2], c1, c2) {
            Pairing::Straight => [(i1, c1), (i2, c2)],
            Pairing::Crossed => [(i1, c2), (i2, c1)],
        };
        for (slot, child) in assignments {
            let survivor = match rule {
                SubstitutionRule::Deterministic => substitute_dc(&pop[slot], child, rng),
                SubstitutionRule::Probabilistic => substitute_pc(&pop[slot], child, rng),
            };
            if survivor == Survivor::Child {
                pop[slot] = child.clone();
            }
        }
    }
}
