//! Binary-genome representation, variation operators, genotype distance, and
//! seeded randomness shared by all niching algorithms.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fitness::FitnessRecord;

/// Fixed-length binary genome. Bit `i` set means variable `i` is selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    bits: Vec<bool>,
}

impl Genome {
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Parse a `0`/`1` string, e.g. `"01101"`.
    pub fn from_str01(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::from_bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn to_string01(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// A genome together with its evaluated fitness record.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: FitnessRecord,
}

/// Seedable, portable random stream (ChaCha8, documented bitstream).
///
/// Identical seed + identical call sequence produce identical outputs on
/// every platform. Each run owns exactly one stream; operators never share.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream for (seed, tag) pairs, used by the harness to give
    /// each algorithm its own stream while keeping runs reproducible.
    pub fn derived(seed: u64, tag: &str) -> Self {
        Self::from_seed(mix_seed(seed, tag))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// Deterministic (seed, tag) -> seed mixing: FNV-1a over the tag folded into
/// the seed through a splitmix64 finalizer.
pub fn mix_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tag.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Crossover operator selection; uniform is the default since variable
/// positions carry no meaningful adjacency in this encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    #[default]
    Uniform,
    SinglePoint,
}

impl CrossoverKind {
    pub fn apply(self, a: &Genome, b: &Genome, rng: &mut RngStream) -> (Genome, Genome) {
        match self {
            CrossoverKind::Uniform => crossover_uniform(a, b, rng),
            CrossoverKind::SinglePoint => crossover_single_point(a, b, rng),
        }
    }
}

/// `n` genomes with each bit independently set with probability `init_density`.
pub fn init_population(
    n: usize,
    genome_len: usize,
    init_density: f64,
    rng: &mut RngStream,
) -> Vec<Genome> {
    (0..n)
        .map(|_| Genome::from_bits((0..genome_len).map(|_| rng.gen_bool(init_density)).collect()))
        .collect()
}

/// Uniform crossover: each position independently swapped with probability
/// 0.5. Children are complementary: bit `i` of child1 comes from `a` exactly
/// when bit `i` of child2 comes from `b`.
pub fn crossover_uniform(a: &Genome, b: &Genome, rng: &mut RngStream) -> (Genome, Genome) {
    assert_eq!(a.len(), b.len(), "crossover requires equal genome lengths");
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        if rng.gen_bool(0.5) {
            c1.push(b.get(i));
            c2.push(a.get(i));
        } else {
            c1.push(a.get(i));
            c2.push(b.get(i));
        }
    }
    (Genome::from_bits(c1), Genome::from_bits(c2))
}

/// Single-point crossover at a cut drawn uniformly from `1..len`.
pub fn crossover_single_point(a: &Genome, b: &Genome, rng: &mut RngStream) -> (Genome, Genome) {
    assert_eq!(a.len(), b.len(), "crossover requires equal genome lengths");
    if a.len() < 2 {
        return (a.clone(), b.clone());
    }
    let point = rng.gen_range(1..a.len());
    let mut c1 = a.bits().to_vec();
    let mut c2 = b.bits().to_vec();
    c1[point..].copy_from_slice(&b.bits()[point..]);
    c2[point..].copy_from_slice(&a.bits()[point..]);
    (Genome::from_bits(c1), Genome::from_bits(c2))
}

/// Flip each bit independently with probability `rate`.
pub fn mutate(genome: &Genome, rate: f64, rng: &mut RngStream) -> Genome {
    Genome::from_bits(
        genome
            .bits()
            .iter()
            .map(|&b| if rng.gen_bool(rate) { !b } else { b })
            .collect(),
    )
}

/// Number of differing positions.
pub fn hamming(a: &Genome, b: &Genome) -> usize {
    assert_eq!(a.len(), b.len(), "hamming requires equal genome lengths");
    a.bits()
        .iter()
        .zip(b.bits())
        .filter(|(x, y)| x != y)
        .count()
}
