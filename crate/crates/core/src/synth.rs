//! Deterministic synthetic bundles with known structure.
//!
//! Every row draws from its own ChaCha stream (`seed`, stream = row index),
//! so a row's values do not depend on how many rows precede it.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::compose::CompositionalSplit;
use crate::error::{Error, Result};
use crate::linalg::householder_qr;
use crate::store::{bind_dataset, DatasetBundle, EmbeddingTable, FactorTable, Modality};

/// Stream reserved for the rotation and code books, away from row streams.
const ROTATION_STREAM: u64 = u64::MAX;
const CODEBOOK_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BlockLayout {
    /// Each factor owns a disjoint block of dimensions.
    #[default]
    Orthogonal,
    /// Every factor writes into the same leading dimensions.
    Overlapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// `(name, cardinality)` per factor.
    pub factors: Vec<(String, usize)>,
    pub samples: usize,
    pub noise_sigma: f64,
    /// Width of the one-hot block per factor level.
    pub dims_per_level: usize,
    pub seed: u64,
    /// Enumerate every level combination (row `n` takes combination
    /// `n mod Π K_j`) instead of drawing levels uniformly.
    pub exhaustive: bool,
    pub layout: BlockLayout,
    /// Code width per factor for composed data; defaults to half the number
    /// of training levels, rounded up.
    pub code_width: Option<usize>,
}

impl SyntheticSpec {
    pub fn attribute_object(attributes: usize, objects: usize, samples: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            factors: vec![("attribute".into(), attributes), ("object".into(), objects)],
            samples,
            noise_sigma,
            dims_per_level: 1,
            seed,
            exhaustive: false,
            layout: BlockLayout::Orthogonal,
            code_width: None,
        }
    }

    pub fn combinations(&self) -> usize {
        self.factors.iter().map(|f| f.1).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::Invalid("synthetic spec needs at least one factor".into()));
        }
        if self.factors.iter().any(|(_, k)| *k < 2) {
            return Err(Error::Invalid("every factor needs at least 2 levels".into()));
        }
        if self.samples == 0 || self.dims_per_level == 0 {
            return Err(Error::Invalid("samples and dims_per_level must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Invalid("noise_sigma must be >= 0".into()));
        }
        if self.exhaustive && self.samples < self.combinations() {
            return Err(Error::Invalid(format!(
                "exhaustive sampling needs samples >= {}",
                self.combinations()
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.factors.iter().map(|f| f.1 * self.dims_per_level).sum()
    }

    fn factor_table(&self, ids: &[String], values: Vec<usize>) -> Result<FactorTable> {
        FactorTable::new(
            ids.to_vec(),
            self.factors.iter().map(|f| f.0.clone()).collect(),
            values,
            self.factors
                .iter()
                .map(|(name, k)| (0..*k).map(|l| format!("{name}{l}")).collect())
                .collect(),
        )
    }
}

fn row_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:06}")).collect()
}

fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

fn decode_combination(mut index: usize, cards: &[usize]) -> Vec<usize> {
    // last factor varies fastest
    let mut levels = vec![0; cards.len()];
    for j in (0..cards.len()).rev() {
        levels[j] = index % cards[j];
        index /= cards[j];
    }
    levels
}

/// Factorized matrix in f64 together with its factor table.
pub fn factorized_matrix(spec: &SyntheticSpec) -> Result<(Array2<f64>, FactorTable)> {
    spec.validate()?;
    let cards: Vec<usize> = spec.factors.iter().map(|f| f.1).collect();
    let dims = spec.dims();
    let n = spec.samples;
    let mut x = Array2::<f64>::zeros((n, dims));
    let mut values = Vec::with_capacity(n * cards.len());
    for row in 0..n {
        let mut rng = row_rng(spec.seed, row);
        let levels = if spec.exhaustive {
            decode_combination(row % spec.combinations(), &cards)
        } else {
            cards.iter().map(|&k| rng.random_range(0..k)).collect()
        };
        let mut offset = 0;
        for (j, &level) in levels.iter().enumerate() {
            let start = offset + level * spec.dims_per_level;
            for d in start..start + spec.dims_per_level {
                x[[row, d]] = 1.0;
            }
            offset += cards[j] * spec.dims_per_level;
        }
        if spec.noise_sigma > 0.0 {
            for d in 0..dims {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[row, d]] += spec.noise_sigma * z;
            }
        }
        values.extend(levels);
    }
    let table = spec.factor_table(&row_ids(n), values)?;
    Ok((x, table))
}

/// Concatenated per-factor one-hot blocks plus Gaussian noise.
pub fn gen_factorized(spec: &SyntheticSpec) -> Result<DatasetBundle> {
    let (x, factors) = factorized_matrix(spec)?;
    let embeddings = EmbeddingTable::from_f64(factors.ids().to_vec(), &x)?;
    bind_dataset(embeddings, factors, Modality::Text, "synthetic:factorized")
}

/// Seeded Haar-random orthogonal D×D matrix (QR of a Gaussian matrix).
pub fn rotation(dims: usize, seed: u64) -> Array2<f64> {
    let mut rng = row_rng(seed, 0);
    rng.set_stream(ROTATION_STREAM);
    let g = Array2::from_shape_simple_fn((dims, dims), || StandardNormal.sample(&mut rng));
    householder_qr(&g).0
}

/// The factorized bundle right-multiplied by a seeded random rotation.
pub fn gen_entangled(spec: &SyntheticSpec) -> Result<DatasetBundle> {
    let (x, factors) = factorized_matrix(spec)?;
    let rotated = x.dot(&rotation(x.ncols(), spec.seed));
    let embeddings = EmbeddingTable::from_f64(factors.ids().to_vec(), &rotated)?;
    bind_dataset(embeddings, factors, Modality::Text, "synthetic:entangled")
}

/// The bundle with whole factor rows permuted across samples, severing any
/// link between codes and labels while keeping every level's frequency.
pub fn shuffle_factors(bundle: &DatasetBundle, seed: u64) -> Result<DatasetBundle> {
    let factors = &bundle.factors;
    let mut order: Vec<usize> = (0..factors.rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let values = order.iter().flat_map(|&i| factors.row(i).iter().copied()).collect();
    Ok(DatasetBundle {
        embeddings: bundle.embeddings.clone(),
        factors: factors.with_values(values)?,
        modality: bundle.modality,
        source: format!("{}+shuffled", bundle.source),
    })
}

/// Combined embeddings with their aligned component parts.
#[derive(Debug, Clone)]
pub struct ComposedDataset {
    pub combined: EmbeddingTable,
    pub attribute_part: EmbeddingTable,
    pub object_part: EmbeddingTable,
    /// Attribute and object level per row.
    pub factors: FactorTable,
    pub split: CompositionalSplit,
}

/// Every attribute-object combination once. Each level of each factor gets a
/// seeded Gaussian code inside its factor's block; the combined row is the
/// sum of its two codes (plus noise when `noise_sigma > 0`). Under
/// [`BlockLayout::Overlapping`] both blocks occupy the same dimensions.
pub fn gen_composed(spec: &SyntheticSpec) -> Result<ComposedDataset> {
    if spec.factors.len() != 2 {
        return Err(Error::Invalid("composed data needs exactly two factors".into()));
    }
    let (a_levels, o_levels) = (spec.factors[0].1, spec.factors[1].1);
    if a_levels < 4 || o_levels < 4 {
        return Err(Error::Invalid("composed data needs at least 4 levels per factor".into()));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::Invalid("noise_sigma must be >= 0".into()));
    }
    let width = |k: usize| {
        spec.code_width
            .unwrap_or_else(|| CompositionalSplit::train_levels(k).div_ceil(2))
            .max(1)
    };
    let (wa, wo) = (width(a_levels), width(o_levels));
    let (o_offset, dims) = match spec.layout {
        BlockLayout::Orthogonal => (wa, wa + wo),
        BlockLayout::Overlapping => (0, wa.max(wo)),
    };

    let mut rng = row_rng(spec.seed, 0);
    rng.set_stream(CODEBOOK_STREAM);
    let mut codebook = |levels: usize, w: usize| {
        Array2::<f64>::from_shape_simple_fn((levels, w), || StandardNormal.sample(&mut rng))
    };
    let a_codes = codebook(a_levels, wa);
    let o_codes = codebook(o_levels, wo);

    let n = a_levels * o_levels;
    let mut attr = Array2::<f64>::zeros((n, dims));
    let mut obj = Array2::<f64>::zeros((n, dims));
    let mut values = Vec::with_capacity(2 * n);
    for row in 0..n {
        let (a, o) = (row / o_levels, row % o_levels);
        for d in 0..wa {
            attr[[row, d]] = a_codes[[a, d]];
        }
        for d in 0..wo {
            obj[[row, o_offset + d]] = o_codes[[o, d]];
        }
        values.extend([a, o]);
    }
    let mut combined = &attr + &obj;
    if spec.noise_sigma > 0.0 {
        for row in 0..n {
            let mut rng = row_rng(spec.seed, row);
            for d in 0..dims {
                let z: f64 = StandardNormal.sample(&mut rng);
                combined[[row, d]] += spec.noise_sigma * z;
            }
        }
    }
    let ids = row_ids(n);
    let factors = spec.factor_table(&ids, values)?;
    let split = CompositionalSplit::holdout(&factors.column(0), &factors.column(1), a_levels, o_levels)?;
    Ok(ComposedDataset {
        combined: EmbeddingTable::from_f64(ids.clone(), &combined)?,
        attribute_part: EmbeddingTable::from_f64(ids.clone(), &attr)?,
        object_part: EmbeddingTable::from_f64(ids, &obj)?,
        factors,
        split,
    })
}
