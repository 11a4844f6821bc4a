//! Wiring pairwise blocks into a network: a first layer of blocks, a second
//! layer of per-unit threshold neurons, and a third layer that ORs units
//! into classes.
//!
//! A second-layer unit fires only when it wins every one of its N-1 pairwise
//! comparisons, so its threshold is always N-1. The Full topology keeps one
//! block per ordered pair; the Compressed topology keeps one block per
//! unordered pair and hands the loser side the inverted bit, halving the
//! block count.

use crate::block::{block_bit, PairBlock};
use crate::error::{Error, Result};
use crate::grid::{ClassId, Dims, ImageGrid, LabeledImage};
use crate::metric::{build_pair_weights, distance_field};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// How blocks map onto unit pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyVariant {
    /// One block per ordered pair (i, j), i != j.
    Full,
    /// One block per unordered pair {i, j}, keyed (i, j) with i < j; the
    /// (j, i) side reads the inverted bit.
    Compressed,
}

impl TopologyVariant {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyVariant::Full => "full",
            TopologyVariant::Compressed => "compressed",
        }
    }
}

impl fmt::Display for TopologyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Topology descriptor: variant plus the number of second-layer units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Topology {
    pub variant: TopologyVariant,
    pub unit_count: usize,
}

/// Key of one block: the (first, second) unit identifiers it separates.
pub type PairKey = (usize, usize);

/// Complete k != j bit matrix produced by the first layer. `get(k, j)` is
/// unit k's win bit against unit j. Entries start unset so that an
/// incompletely filled matrix is detectable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    bits: Vec<Option<bool>>,
}

impl BitMatrix {
    pub fn new(n: usize) -> BitMatrix {
        BitMatrix {
            n,
            bits: vec![None; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sets unit `k`'s bit against unit `j`. Panics on the diagonal or out
    /// of range.
    pub fn set(&mut self, k: usize, j: usize, v: bool) {
        assert!(k != j, "no bit exists for a unit against itself");
        assert!(k < self.n && j < self.n, "unit index out of range");
        self.bits[k * self.n + j] = Some(v);
    }

    pub fn get(&self, k: usize, j: usize) -> Option<bool> {
        assert!(k < self.n && j < self.n, "unit index out of range");
        if k == j {
            return None;
        }
        self.bits[k * self.n + j]
    }
}

/// Per-unit win counts of a complete matrix. Errors on any unset entry.
pub fn win_counts(b: &BitMatrix) -> Result<Vec<usize>> {
    let mut votes = vec![0; b.n];
    for (k, vote) in votes.iter_mut().enumerate() {
        for j in 0..b.n {
            if k == j {
                continue;
            }
            match b.get(k, j) {
                Some(true) => *vote += 1,
                Some(false) => {}
                None => {
                    return Err(Error::Wiring(format!(
                        "bit matrix is missing entry ({k}, {j})"
                    )))
                }
            }
        }
    }
    Ok(votes)
}

/// Units whose win count reaches `threshold`.
pub fn second_layer_fired(b: &BitMatrix, threshold: usize) -> Result<BTreeSet<usize>> {
    Ok(win_counts(b)?
        .iter()
        .enumerate()
        .filter(|(_, &wins)| wins >= threshold)
        .map(|(k, _)| k)
        .collect())
}

/// Classification outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Class(ClassId),
    /// No unit won all its comparisons (ties or a cyclic tournament).
    NoDecision,
    /// More than one class fired; possible only under the Full topology.
    Ambiguous(Vec<ClassId>),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Class(k) => write!(f, "Class({k})"),
            Outcome::NoDecision => write!(f, "NoDecision"),
            Outcome::Ambiguous(ks) => {
                write!(f, "Ambiguous(")?;
                for (i, k) in ks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Full result of one prediction: the outcome plus per-unit diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub outcome: Outcome,
    /// Win counts per unit, in unit order.
    pub votes: Vec<usize>,
    pub fired_units: BTreeSet<usize>,
}

/// Exact block count demanded by a variant: (N-1)N for Full, N(N-1)/2 for
/// Compressed.
pub fn expected_block_count(n_units: usize, variant: TopologyVariant) -> Result<usize> {
    if n_units < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 units, got {n_units}"
        )));
    }
    Ok(match variant {
        TopologyVariant::Full => (n_units - 1) * n_units,
        TopologyVariant::Compressed => n_units * (n_units - 1) / 2,
    })
}

/// Blocks added when a network of `n_units_before` units grows by one unit:
/// 2N for Full, N for Compressed.
pub fn growth_delta(n_units_before: usize, variant: TopologyVariant) -> Result<usize> {
    if n_units_before < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 units, got {n_units_before}"
        )));
    }
    Ok(match variant {
        TopologyVariant::Full => 2 * n_units_before,
        TopologyVariant::Compressed => n_units_before,
    })
}

/// The exact pair-key set a variant requires for `n` units.
pub fn required_pairs(n: usize, variant: TopologyVariant) -> BTreeSet<PairKey> {
    let mut keys = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            let wanted = match variant {
                TopologyVariant::Full => i != j,
                TopologyVariant::Compressed => i < j,
            };
            if wanted {
                keys.insert((i, j));
            }
        }
    }
    keys
}

/// The wired network. Immutable after assembly; growth returns a new value.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    topology: Topology,
    dims: Dims,
    unit_threshold: usize,
    blocks: BTreeMap<PairKey, PairBlock>,
    class_groups: BTreeMap<ClassId, BTreeSet<usize>>,
    /// Reverse of class_groups, indexed by unit.
    unit_class: Vec<ClassId>,
}

fn keys_list(keys: impl IntoIterator<Item = PairKey>) -> String {
    let parts: Vec<String> = keys
        .into_iter()
        .map(|(i, j)| format!("({i}, {j})"))
        .collect();
    parts.join(", ")
}

/// Validates blocks and class groups against a variant and builds the
/// network, with the unit threshold pinned to N-1.
pub fn assemble(
    blocks: BTreeMap<PairKey, PairBlock>,
    class_groups: BTreeMap<ClassId, BTreeSet<usize>>,
    variant: TopologyVariant,
    dims: Dims,
) -> Result<Ensemble> {
    // class groups must partition 0..N-1 and use class ids 0..K-1
    let mut total_units = 0;
    let mut all_units = BTreeSet::new();
    for (class, units) in &class_groups {
        if units.is_empty() {
            return Err(Error::Wiring(format!(
                "class {class} has an empty unit group"
            )));
        }
        total_units += units.len();
        all_units.extend(units.iter().copied());
    }
    let n = total_units;
    if all_units.len() != n {
        return Err(Error::Wiring(
            "a unit appears in more than one class group".into(),
        ));
    }
    if all_units.iter().next_back().map(|&u| u + 1).unwrap_or(0) != n {
        return Err(Error::Wiring(format!(
            "class groups must cover units 0..{} exactly",
            n.saturating_sub(1)
        )));
    }
    for (expect, &class) in class_groups.keys().enumerate() {
        if class != expect {
            return Err(Error::Wiring(format!(
                "class identifiers must be 0..{}, got {class}",
                class_groups.len() - 1
            )));
        }
    }
    if n < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 units, got {n}"
        )));
    }

    let required = required_pairs(n, variant);
    let present: BTreeSet<PairKey> = blocks.keys().copied().collect();
    if present != required {
        let missing: Vec<PairKey> = required.difference(&present).copied().collect();
        let surplus: Vec<PairKey> = present.difference(&required).copied().collect();
        let mut msg = format!("block keys do not match the {variant} pair set for {n} units");
        if !missing.is_empty() {
            msg += &format!("; missing: {}", keys_list(missing));
        }
        if !surplus.is_empty() {
            msg += &format!("; surplus: {}", keys_list(surplus));
        }
        return Err(Error::Wiring(msg));
    }

    for (&key, block) in &blocks {
        if block.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: block.dims(),
            });
        }
        if block.pair() != key {
            return Err(Error::Wiring(format!(
                "block stored at key ({}, {}) reports pair ({}, {})",
                key.0,
                key.1,
                block.pair().0,
                block.pair().1
            )));
        }
    }

    let mut unit_class = vec![0; n];
    for (&class, units) in &class_groups {
        for &u in units {
            unit_class[u] = class;
        }
    }

    Ok(Ensemble {
        topology: Topology {
            variant,
            unit_count: n,
        },
        dims,
        unit_threshold: n - 1,
        blocks,
        class_groups,
        unit_class,
    })
}

impl Ensemble {
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn variant(&self) -> TopologyVariant {
        self.topology.variant
    }

    pub fn unit_count(&self) -> usize {
        self.topology.unit_count
    }

    pub fn unit_threshold(&self) -> usize {
        self.unit_threshold
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn blocks(&self) -> &BTreeMap<PairKey, PairBlock> {
        &self.blocks
    }

    pub fn class_groups(&self) -> &BTreeMap<ClassId, BTreeSet<usize>> {
        &self.class_groups
    }

    pub fn class_count(&self) -> usize {
        self.class_groups.len()
    }

    pub fn class_of_unit(&self, unit: usize) -> ClassId {
        self.unit_class[unit]
    }

    /// Evaluates every block once and fills the complete win-bit matrix.
    /// Under Compressed, the (j, i) side of each stored (i, j) block gets
    /// the inverted bit.
    pub fn first_layer_bits(&self, input: &ImageGrid) -> Result<BitMatrix> {
        if input.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: input.dims(),
            });
        }
        let mut b = BitMatrix::new(self.unit_count());
        for (&(i, j), block) in &self.blocks {
            let y = block_bit(block, input)?;
            b.set(i, j, y);
            if self.topology.variant == TopologyVariant::Compressed {
                b.set(j, i, !y);
            }
        }
        Ok(b)
    }

    /// Second layer: units that won all N-1 comparisons.
    pub fn second_layer(&self, b: &BitMatrix) -> Result<BTreeSet<usize>> {
        if b.n() != self.unit_count() {
            return Err(Error::Wiring(format!(
                "bit matrix is for {} units, network has {}",
                b.n(),
                self.unit_count()
            )));
        }
        second_layer_fired(b, self.unit_threshold)
    }

    /// Third layer: one bit per class, set when any unit of its group fired.
    pub fn third_layer(&self, fired: &BTreeSet<usize>) -> Vec<bool> {
        self.class_groups
            .values()
            .map(|units| units.iter().any(|u| fired.contains(u)))
            .collect()
    }

    /// Runs all three layers and interprets the class bits.
    pub fn predict(&self, input: &ImageGrid) -> Result<Decision> {
        let b = self.first_layer_bits(input)?;
        let votes = win_counts(&b)?;
        let fired = second_layer_fired(&b, self.unit_threshold)?;
        let class_bits = self.third_layer(&fired);
        let active: Vec<ClassId> = class_bits
            .iter()
            .enumerate()
            .filter(|(_, &bit)| bit)
            .map(|(k, _)| k)
            .collect();
        let outcome = match active.len() {
            0 => Outcome::NoDecision,
            1 => Outcome::Class(active[0]),
            _ => Outcome::Ambiguous(active),
        };
        Ok(Decision {
            outcome,
            votes,
            fired_units: fired,
        })
    }

    /// Vote-count fallback for inputs where the strict rule abstains: the
    /// class of the unit with the most wins. Ties go to the lowest unit
    /// index and set the flag.
    pub fn predict_max_vote(&self, input: &ImageGrid) -> Result<(ClassId, bool)> {
        let votes = win_counts(&self.first_layer_bits(input)?)?;
        let best = *votes.iter().max().expect("at least 2 units");
        let winner = votes.iter().position(|&v| v == best).unwrap();
        let tie = votes.iter().filter(|&&v| v == best).count() > 1;
        Ok((self.class_of_unit(winner), tie))
    }

    /// Grows the network by one unit (id N) belonging to `class`, which is
    /// either an existing class or the next new class id.
    ///
    /// `new_blocks` must hold exactly the pairs the variant requires for the
    /// new unit: (i, N) for every old i under Compressed, plus (N, i) under
    /// Full. Every pre-existing block is carried over untouched and the unit
    /// threshold rises by 1.
    pub fn add_class(
        &self,
        new_blocks: BTreeMap<PairKey, PairBlock>,
        class: ClassId,
    ) -> Result<Ensemble> {
        let n = self.unit_count();
        let mut required: BTreeSet<PairKey> = (0..n).map(|i| (i, n)).collect();
        if self.topology.variant == TopologyVariant::Full {
            required.extend((0..n).map(|i| (n, i)));
        }
        let present: BTreeSet<PairKey> = new_blocks.keys().copied().collect();
        if present != required {
            let missing: Vec<PairKey> = required.difference(&present).copied().collect();
            let surplus: Vec<PairKey> = present.difference(&required).copied().collect();
            let mut msg = format!("new unit {n} needs exactly the pairs that involve it");
            if !missing.is_empty() {
                msg += &format!("; missing: {}", keys_list(missing));
            }
            if !surplus.is_empty() {
                msg += &format!("; surplus: {}", keys_list(surplus));
            }
            return Err(Error::Growth(msg));
        }
        if class > self.class_count() {
            return Err(Error::Growth(format!(
                "class {class} is neither an existing class nor the next id {}",
                self.class_count()
            )));
        }
        for (&key, block) in &new_blocks {
            if block.dims() != self.dims {
                return Err(Error::DimensionMismatch {
                    expected: self.dims,
                    actual: block.dims(),
                });
            }
            if block.pair() != key {
                return Err(Error::Growth(format!(
                    "block stored at key ({}, {}) reports pair ({}, {})",
                    key.0,
                    key.1,
                    block.pair().0,
                    block.pair().1
                )));
            }
        }
        let mut blocks = self.blocks.clone();
        blocks.extend(new_blocks);
        let mut class_groups = self.class_groups.clone();
        class_groups.entry(class).or_default().insert(n);
        assemble(blocks, class_groups, self.topology.variant, self.dims)
    }
}

/// Builds a fully analytic network: one unit per sample, blocks holding
/// pairwise distance-difference weights, class groups from the labels.
///
/// Labels must be 0..K-1 with every class present; samples need at least
/// one active cell each.
pub fn metric_ensemble(samples: &[LabeledImage], variant: TopologyVariant) -> Result<Ensemble> {
    if samples.len() < 2 {
        return Err(Error::Config(format!(
            "a network needs at least 2 sample units, got {}",
            samples.len()
        )));
    }
    let dims = samples[0].grid.dims();
    let class_count = samples.iter().map(|s| s.label).max().unwrap() + 1;
    for k in 0..class_count {
        if !samples.iter().any(|s| s.label == k) {
            return Err(Error::InsufficientData(format!("class {k} has no samples")));
        }
    }
    let fields: Vec<_> = samples
        .iter()
        .map(|s| {
            if s.grid.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: s.grid.dims(),
                });
            }
            distance_field(&s.grid)
        })
        .collect::<Result<_>>()?;

    let mut blocks = BTreeMap::new();
    for (i, j) in required_pairs(samples.len(), variant) {
        let w = build_pair_weights(&fields[i], &fields[j])?;
        blocks.insert((i, j), PairBlock::metric((i, j), w)?);
    }
    let mut class_groups: BTreeMap<ClassId, BTreeSet<usize>> = BTreeMap::new();
    for (unit, sample) in samples.iter().enumerate() {
        class_groups.entry(sample.label).or_default().insert(unit);
    }
    assemble(blocks, class_groups, variant, dims)
}
