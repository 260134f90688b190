//! Flat parameter storage with a named shape table.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::NeuralError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    Zeros,
    Normal { std: f64 },
    /// LSTM bias: forget-gate block set to one, the rest zero.
    ForgetBias { hidden: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamShape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
    pub init: Init,
}

impl ParamShape {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builder for a parameter layout; each `push` returns the block's offset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub shapes: Vec<ParamShape>,
    pub len: usize,
}

impl ParamLayout {
    pub fn push(&mut self, name: impl Into<String>, rows: usize, cols: usize, init: Init) -> usize {
        let offset = self.len;
        self.shapes.push(ParamShape { name: name.into(), rows, cols, offset, init });
        self.len += rows * cols;
        offset
    }

    pub fn initialize(&self, seed: u64) -> NetworkParams {
        let mut rng = rng::seeded(seed);
        let mut values = vec![0.0; self.len];
        for shape in &self.shapes {
            let block = &mut values[shape.offset..shape.offset + shape.len()];
            match shape.init {
                Init::Zeros => {}
                Init::Normal { std } => {
                    let normal = Normal::new(0.0, std).expect("finite std");
                    for v in block.iter_mut() {
                        *v = normal.sample(&mut rng);
                    }
                }
                Init::ForgetBias { hidden } => {
                    for v in &mut block[hidden..2 * hidden] {
                        *v = 1.0;
                    }
                }
            }
        }
        NetworkParams { shapes: self.shapes.clone(), values, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub shapes: Vec<ParamShape>,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl NetworkParams {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.shapes.iter().find(|s| s.name == name).map(|s| &self.values[s.offset..s.offset + s.len()])
    }

    /// Checks the stored table against a layout built for the same architecture.
    pub fn check_layout(&self, layout: &ParamLayout) -> Result<(), NeuralError> {
        let same = self.values.len() == layout.len
            && self.shapes.len() == layout.shapes.len()
            && self
                .shapes
                .iter()
                .zip(&layout.shapes)
                .all(|(a, b)| a.name == b.name && a.rows == b.rows && a.cols == b.cols && a.offset == b.offset);
        if same {
            Ok(())
        } else {
            Err(NeuralError::ShapeMismatch(format!(
                "parameter table has {} values, architecture needs {}",
                self.values.len(),
                layout.len
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_offsets_and_init() {
        let mut layout = ParamLayout::default();
        assert_eq!(layout.push("w", 3, 2, Init::Normal { std: 0.5 }), 0);
        assert_eq!(layout.push("b", 8, 1, Init::ForgetBias { hidden: 2 }), 6);
        let p = layout.initialize(7);
        assert_eq!(p.len(), 14);
        assert_eq!(p.block("b").unwrap(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(layout.initialize(7), p);
        assert_ne!(layout.initialize(8).values, p.values);
        assert!(p.check_layout(&layout).is_ok());
    }
}
