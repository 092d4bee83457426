use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{fit_linear_map, linear_map_mse, LinearMap, TrainConfig};
use crate::metrics::select;
use crate::store::EmbeddingTable;
use crate::synth::ComposedDataset;

/// Row indices of a compositional train/test split: no attribute and no
/// object of a test row occurs in any training row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionalSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl CompositionalSplit {
    /// Levels of a `k`-level factor kept for training: `ceil(3k/4)`.
    pub fn train_levels(k: usize) -> usize {
        (3 * k).div_ceil(4)
    }

    /// Trains on rows whose attribute and object both lie in the first
    /// [`train_levels`](Self::train_levels) levels and tests on rows whose
    /// attribute and object both lie outside them. Mixed rows are unused.
    pub fn holdout(attributes: &[usize], objects: &[usize], a_levels: usize, o_levels: usize) -> Result<Self> {
        if attributes.len() != objects.len() {
            return Err(Error::DimensionMismatch("attribute and object columns differ in length".into()));
        }
        let (ta, to) = (Self::train_levels(a_levels), Self::train_levels(o_levels));
        let mut split = Self {
            train: Vec::new(),
            test: Vec::new(),
        };
        for (i, (&a, &o)) in attributes.iter().zip(objects).enumerate() {
            if a < ta && o < to {
                split.train.push(i);
            } else if a >= ta && o >= to {
                split.test.push(i);
            }
        }
        split.validate(attributes, objects)?;
        Ok(split)
    }

    /// Checks that both sides are nonempty, in range, row-disjoint and that
    /// the test side shares no attribute and no object with training.
    pub fn validate(&self, attributes: &[usize], objects: &[usize]) -> Result<()> {
        if self.train.is_empty() || self.test.is_empty() {
            return Err(Error::SplitOverlap("train and test must both be nonempty".into()));
        }
        let n = attributes.len();
        if let Some(&bad) = self.train.iter().chain(&self.test).find(|&&i| i >= n) {
            return Err(Error::Invalid(format!("split row {bad} out of range for {n} rows")));
        }
        let train_rows: BTreeSet<usize> = self.train.iter().copied().collect();
        if let Some(&row) = self.test.iter().find(|i| train_rows.contains(i)) {
            return Err(Error::SplitOverlap(format!("row {row} is in both train and test")));
        }
        let train_attrs: BTreeSet<usize> = self.train.iter().map(|&i| attributes[i]).collect();
        let train_objs: BTreeSet<usize> = self.train.iter().map(|&i| objects[i]).collect();
        for &i in &self.test {
            if train_attrs.contains(&attributes[i]) {
                return Err(Error::SplitOverlap(format!("test row {i} reuses training attribute {}", attributes[i])));
            }
            if train_objs.contains(&objects[i]) {
                return Err(Error::SplitOverlap(format!("test row {i} reuses training object {}", objects[i])));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentFit {
    pub component: String,
    pub train_mse: f64,
    pub test_mse: f64,
    pub map: LinearMap,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub ridge: f64,
    pub tied: bool,
    pub train_rows: usize,
    pub test_rows: usize,
    pub components: Vec<ComponentFit>,
}

/// Fits one linear map per component from the combined embedding on the
/// training rows of `data.split` and reports train and test MSE.
pub fn decompose_linear(data: &ComposedDataset, ridge: f64, tied: bool, cfg: &TrainConfig) -> Result<DecompositionReport> {
    let n = data.combined.rows();
    if data.factors.num_factors() < 2 {
        return Err(Error::Invalid("decomposition needs attribute and object factors".into()));
    }
    for (name, part) in [("attribute", &data.attribute_part), ("object", &data.object_part)] {
        check_aligned(&data.combined, part, name)?;
    }
    if data.factors.ids() != data.combined.ids() {
        return Err(Error::IdMismatch(format!("factor rows are not aligned with {n} embedding rows")));
    }
    data.split.validate(&data.factors.column(0), &data.factors.column(1))?;

    let x = data.combined.to_array();
    let x_train = select(&x, &data.split.train);
    let x_test = select(&x, &data.split.test);
    let mut components = Vec::with_capacity(2);
    for (name, part) in [("attribute", &data.attribute_part), ("object", &data.object_part)] {
        let y = part.to_array();
        let y_train = select(&y, &data.split.train);
        let y_test = select(&y, &data.split.test);
        let (map, train_mse) = fit_linear_map(x_train.view(), y_train.view(), ridge, tied, None, cfg)?;
        let test_mse = linear_map_mse(&map.predict(x_test.view())?, y_test.view());
        components.push(ComponentFit {
            component: name.to_string(),
            train_mse,
            test_mse,
            map,
        });
    }
    Ok(DecompositionReport {
        ridge,
        tied,
        train_rows: data.split.train.len(),
        test_rows: data.split.test.len(),
        components,
    })
}

fn check_aligned(combined: &EmbeddingTable, part: &EmbeddingTable, name: &str) -> Result<()> {
    if part.rows() != combined.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{name} part has {} rows, combined {}",
            part.rows(),
            combined.rows()
        )));
    }
    if let Some((i, _)) = part.ids().iter().zip(combined.ids()).enumerate().find(|(_, (a, b))| a != b) {
        return Err(Error::IdMismatch(part.ids()[i].clone()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_is_compositional() {
        let (a, o): (Vec<usize>, Vec<usize>) = (0..8).flat_map(|a| (0..4).map(move |o| (a, o))).unzip();
        let split = CompositionalSplit::holdout(&a, &o, 8, 4).unwrap();
        assert_eq!(split.train.len(), 6 * 3);
        assert_eq!(split.test.len(), 2);
        split.validate(&a, &o).unwrap();
    }

    #[test]
    fn leaking_split_rejected() {
        let a = vec![0, 0, 1, 1];
        let o = vec![0, 1, 0, 1];
        let leak = CompositionalSplit {
            train: vec![0],
            test: vec![1],
        };
        assert!(matches!(leak.validate(&a, &o), Err(Error::SplitOverlap(_))));
        let fine = CompositionalSplit {
            train: vec![0],
            test: vec![3],
        };
        fine.validate(&a, &o).unwrap();
    }
}
