//! Embeddings paired with per-sample protected-attribute labels.

use crate::nn::one_hot;
use crate::{Error, Result};
use ndarray::Array2;

/// An `n × d` matrix of representations with one integer attribute per row.
/// Attribute values live in `[0, num_classes)`; `attribute_names` gives them
/// display names.
#[derive(Debug, Clone)]
pub struct RepresentationSet {
    representations: Array2<f64>,
    attributes: Vec<u32>,
    attribute_names: Vec<String>,
}

impl RepresentationSet {
    pub fn new(
        representations: Array2<f64>,
        attributes: Vec<u32>,
        attribute_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = representations.dim();
        if n < 2 {
            return Err(Error::Data(format!("need at least 2 samples, got {n}")));
        }
        if d < 1 {
            return Err(Error::Data(
                "representations must have at least 1 feature".into(),
            ));
        }
        if attributes.len() != n {
            return Err(Error::Dimension(format!(
                "{n} representation rows but {} attribute labels",
                attributes.len()
            )));
        }
        if representations.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(
                "representations contain a non-finite value".into(),
            ));
        }
        let m = attribute_names.len();
        if m == 0 {
            return Err(Error::Data("attribute_names must not be empty".into()));
        }
        if let Some((i, &l)) = attributes
            .iter()
            .enumerate()
            .find(|(_, &l)| l as usize >= m)
        {
            return Err(Error::Data(format!(
                "attribute {l} at row {i} is out of range for {m} classes"
            )));
        }
        Ok(Self {
            representations,
            attributes,
            attribute_names,
        })
    }

    /// Infer the class count as `max(attributes) + 1` and name classes by index.
    pub fn with_default_names(representations: Array2<f64>, attributes: Vec<u32>) -> Result<Self> {
        let m = attributes
            .iter()
            .max()
            .map(|&v| v as usize + 1)
            .ok_or_else(|| Error::Data("attributes must not be empty".into()))?;
        let names = (0..m).map(|i| i.to_string()).collect();
        Self::new(representations, attributes, names)
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Representation dimensionality d.
    pub fn dim(&self) -> usize {
        self.representations.ncols()
    }

    /// Declared attribute alphabet size m.
    pub fn num_classes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn representations(&self) -> &Array2<f64> {
        &self.representations
    }

    pub fn attributes(&self) -> &[u32] {
        &self.attributes
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    /// Per-class sample counts, indexed by attribute value.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes()];
        for &a in &self.attributes {
            counts[a as usize] += 1;
        }
        counts
    }

    /// Number of attribute values that actually occur.
    pub fn observed_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// One-hot encoding of the attribute vector, `[n × num_classes]`.
    pub fn one_hot_attributes(&self) -> Array2<f64> {
        one_hot(&self.attributes, self.num_classes()).expect("attributes validated in constructor")
    }

    /// Replace the attribute vector, keeping the representations. Used by the
    /// perturbation modes; the new labels must fit the existing alphabet.
    pub fn with_attributes(&self, attributes: Vec<u32>) -> Result<Self> {
        Self::new(
            self.representations.clone(),
            attributes,
            self.attribute_names.clone(),
        )
    }

    /// Replace the representations, keeping attributes and names.
    pub fn with_representations(&self, representations: Array2<f64>) -> Result<Self> {
        Self::new(
            representations,
            self.attributes.clone(),
            self.attribute_names.clone(),
        )
    }

    /// Row subset in the given order, keeping the attribute alphabet.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Data(format!(
                "row index {bad} out of range for {} samples",
                self.len()
            )));
        }
        Self::new(
            self.representations.select(ndarray::Axis(0), indices),
            indices.iter().map(|&i| self.attributes[i]).collect(),
            self.attribute_names.clone(),
        )
    }
}

/// Combine several attribute columns into one product-label column: the
/// combined label enumerates joint cells, unobserved combinations simply never
/// occur. Returns the combined labels and the product alphabet size.
pub fn joint_attribute(columns: &[&[u32]]) -> Result<(Vec<u32>, usize)> {
    if columns.is_empty() {
        return Err(Error::Data("need at least one attribute column".into()));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension(
            "attribute columns have differing lengths".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Data("attribute columns must not be empty".into()));
    }
    let sizes: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().max().map(|&v| v as usize + 1).unwrap_or(1))
        .collect();
    let total: usize = sizes.iter().product();
    if total > u32::MAX as usize {
        return Err(Error::Data("joint attribute alphabet too large".into()));
    }
    let mut combined = vec![0u32; n];
    for (col, &size) in columns.iter().zip(&sizes) {
        for (out, &v) in combined.iter_mut().zip(col.iter()) {
            *out = *out * size as u32 + v;
        }
    }
    Ok((combined, total))
}
