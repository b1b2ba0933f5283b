//! Model assembly: the hybrid CNN x LSTM network and its CNN-only baseline.
//!
//! Both models share the convolutional branch:
//!
//! ```text
//! [H x W x 3] -> conv 3x3 (c1) -> relu -> conv 3x3 (c2) -> relu
//!             -> maxpool 2x2 -> dropout -> flatten -> dense(merge) relu
//! ```
//!
//! The hybrid adds a recurrent branch that reads the grayscale image row by
//! row (`H` timesteps of `W` features) through two stacked LSTM layers, and
//! joins the two branch outputs by elementwise product. Either way the head
//! is `dense(head) relu -> dropout -> dense(classes) -> softmax`.

mod exec;

pub use exec::{backward, forward, predict, ForwardTrace};

use crate::error::{Error, Result};
use crate::layers::LayerSpec;
use crate::rng::Rng;
use crate::tensor::{glorot_init, Tensor};

/// Convolution kernel edge used throughout both architectures.
pub const KERNEL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Hybrid,
    CnnOnly,
}

impl Architecture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::Hybrid => "hybrid",
            Architecture::CnnOnly => "cnn",
        }
    }
}

/// Geometry and dropout rates of a model variant. `paper()` is the full-size
/// network; smaller variants exist so gradient checks and smoke runs stay
/// cheap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDims {
    /// Input rows; also the number of LSTM timesteps.
    pub input_h: usize,
    /// Input columns; also the LSTM feature width per timestep.
    pub input_w: usize,
    pub conv1: usize,
    pub conv2: usize,
    /// LSTM hidden width, the CNN projection width, and the merge width.
    pub lstm_hidden: usize,
    pub head_units: usize,
    pub drop_conv: f64,
    pub drop_lstm: f64,
    pub drop_head: f64,
}

impl ModelDims {
    /// Full-size network: 60x80 inputs, 32/64 conv cells, 64-wide merge,
    /// 128-unit head.
    pub fn paper() -> Self {
        ModelDims {
            input_h: 60,
            input_w: 80,
            conv1: 32,
            conv2: 64,
            lstm_hidden: 64,
            head_units: 128,
            drop_conv: 0.25,
            drop_lstm: 0.25,
            drop_head: 0.5,
        }
    }

    /// Desk-scale variant used by the end-to-end gradient and overfit tests.
    pub fn tiny() -> Self {
        ModelDims {
            input_h: 12,
            input_w: 16,
            conv1: 4,
            conv2: 6,
            lstm_hidden: 8,
            head_units: 16,
            drop_conv: 0.25,
            drop_lstm: 0.25,
            drop_head: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let shrink = 2 * (KERNEL - 1);
        if self.input_h < shrink + 2 || self.input_w < shrink + 2 {
            return Err(Error::Config(format!(
                "input {}x{} too small for two {KERNEL}x{KERNEL} convolutions plus pooling",
                self.input_h, self.input_w
            )));
        }
        if self.conv1 == 0 || self.conv2 == 0 || self.lstm_hidden == 0 || self.head_units == 0 {
            return Err(Error::Config("model widths must be positive".into()));
        }
        for (name, p) in [
            ("drop_conv", self.drop_conv),
            ("drop_lstm", self.drop_lstm),
            ("drop_head", self.drop_head),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {p}")));
            }
        }
        Ok(())
    }

    /// Spatial extent after the conv stack and pooling.
    pub fn pooled(&self) -> (usize, usize) {
        let shrink = 2 * (KERNEL - 1);
        ((self.input_h - shrink) / 2, (self.input_w - shrink) / 2)
    }

    /// Flattened feature count feeding the CNN projection.
    pub fn flat_features(&self) -> usize {
        let (ph, pw) = self.pooled();
        ph * pw * self.conv2
    }
}

/// Ordered name -> tensor map. Insertion order is the canonical enumeration
/// order everywhere (gradient accumulation, checkpoints, inspection).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    entries: Vec<(String, Tensor)>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) -> Result<()> {
        if self.entries.iter().any(|(n, _)| n == name) {
            return Err(Error::Usage(format!("duplicate parameter key '{name}'")));
        }
        self.entries.push((name.to_string(), tensor));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Usage(format!("unknown parameter key '{name}'")))
    }

    /// Replace an existing entry; the new tensor must keep the shape.
    pub fn set(&mut self, name: &str, tensor: Tensor) -> Result<()> {
        let entry = self
            .entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Usage(format!("unknown parameter key '{name}'")))?;
        if entry.1.shape() != tensor.shape() {
            return Err(Error::Dimension(format!(
                "parameter '{name}' has shape {:?}, refusing to set {:?}",
                entry.1.shape(),
                tensor.shape()
            )));
        }
        entry.1 = tensor;
        Ok(())
    }

    /// Elementwise add into an existing entry (gradient accumulation).
    pub fn accumulate(&mut self, name: &str, delta: &Tensor) -> Result<()> {
        let entry = self
            .entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Usage(format!("unknown parameter key '{name}'")))?;
        entry.1 = entry.1.add(delta)?;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total scalar count across all entries.
    pub fn total_scalars(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Zero-filled store with the same keys and shapes.
    pub fn zeros_like(&self) -> ParamStore {
        ParamStore {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), Tensor::zeros(t.shape())))
                .collect(),
        }
    }
}

/// Gradients keyed exactly like the parameter store they were taken against.
pub type GradStore = ParamStore;

/// A concrete, initialized network: layer specs for each section plus the
/// parameter store.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    pub arch: Architecture,
    pub dims: ModelDims,
    pub classes: usize,
    pub cnn: Vec<LayerSpec>,
    pub rnn: Option<Vec<LayerSpec>>,
    pub head: Vec<LayerSpec>,
    pub params: ParamStore,
}

fn check_classes(classes: usize) -> Result<()> {
    if classes != 2 && classes != 4 {
        return Err(Error::Config(format!(
            "unsupported class count {classes}, expected 2 or 4"
        )));
    }
    Ok(())
}

fn cnn_branch(dims: &ModelDims) -> Result<Vec<LayerSpec>> {
    Ok(vec![
        LayerSpec::conv2d("cnn.conv1", 3, dims.conv1, KERNEL, KERNEL)?,
        LayerSpec::Relu,
        LayerSpec::conv2d("cnn.conv2", dims.conv1, dims.conv2, KERNEL, KERNEL)?,
        LayerSpec::Relu,
        LayerSpec::MaxPool2x2,
        LayerSpec::dropout(dims.drop_conv)?,
        LayerSpec::Flatten,
        LayerSpec::dense("cnn.proj", dims.flat_features(), dims.lstm_hidden, true)?,
    ])
}

fn rnn_branch(dims: &ModelDims) -> Result<Vec<LayerSpec>> {
    Ok(vec![
        LayerSpec::lstm("rnn.lstm1", dims.input_w, dims.lstm_hidden, true)?,
        LayerSpec::dropout(dims.drop_lstm)?,
        LayerSpec::lstm("rnn.lstm2", dims.lstm_hidden, dims.lstm_hidden, false)?,
        LayerSpec::dropout(dims.drop_lstm)?,
    ])
}

fn head_section(dims: &ModelDims, classes: usize, merged: bool) -> Result<Vec<LayerSpec>> {
    let mut layers = Vec::new();
    if merged {
        layers.push(LayerSpec::MergeMul);
    }
    layers.push(LayerSpec::dense(
        "head.fc",
        dims.lstm_hidden,
        dims.head_units,
        true,
    )?);
    layers.push(LayerSpec::dropout(dims.drop_head)?);
    layers.push(LayerSpec::dense(
        "head.out",
        dims.head_units,
        classes,
        false,
    )?);
    layers.push(LayerSpec::Softmax);
    Ok(layers)
}

/// Glorot-initialize every parameterized layer of a section, inserting into
/// the store in layer order (weights before biases; biases start at zero).
fn init_section(specs: &[LayerSpec], store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
    for spec in specs {
        match spec {
            LayerSpec::Conv2d {
                name,
                in_channels,
                out_channels,
                kh,
                kw,
            } => {
                let fan_in = kh * kw * in_channels;
                let fan_out = kh * kw * out_channels;
                let w = glorot_init(
                    rng,
                    &[*kh, *kw, *in_channels, *out_channels],
                    fan_in,
                    fan_out,
                )?;
                store.insert(&format!("{name}.w"), w)?;
                store.insert(&format!("{name}.b"), Tensor::zeros(&[*out_channels]))?;
            }
            LayerSpec::Dense {
                name,
                inputs,
                units,
                ..
            } => {
                let w = glorot_init(rng, &[*units, *inputs], *inputs, *units)?;
                store.insert(&format!("{name}.w"), w)?;
                store.insert(&format!("{name}.b"), Tensor::zeros(&[*units]))?;
            }
            LayerSpec::Lstm {
                name,
                input_dim,
                hidden,
                ..
            } => {
                let cols = hidden + input_dim;
                for gate in ["w_f", "w_i", "w_c", "w_o"] {
                    let w = glorot_init(rng, &[*hidden, cols], cols, *hidden)?;
                    store.insert(&format!("{name}.{gate}"), w)?;
                }
                for gate in ["b_f", "b_i", "b_c", "b_o"] {
                    store.insert(&format!("{name}.{gate}"), Tensor::zeros(&[*hidden]))?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Build the hybrid CNN x LSTM model at full paper size.
pub fn build_hybrid(rng: &mut Rng, classes: usize) -> Result<NetworkGraph> {
    build_hybrid_with(ModelDims::paper(), rng, classes)
}

/// Build the hybrid model at arbitrary dimensions.
pub fn build_hybrid_with(dims: ModelDims, rng: &mut Rng, classes: usize) -> Result<NetworkGraph> {
    dims.validate()?;
    check_classes(classes)?;
    let cnn = cnn_branch(&dims)?;
    let rnn = rnn_branch(&dims)?;
    let head = head_section(&dims, classes, true)?;
    let mut params = ParamStore::new();
    init_section(&cnn, &mut params, rng)?;
    init_section(&rnn, &mut params, rng)?;
    init_section(&head, &mut params, rng)?;
    Ok(NetworkGraph {
        arch: Architecture::Hybrid,
        dims,
        classes,
        cnn,
        rnn: Some(rnn),
        head,
        params,
    })
}

/// Build the CNN-only baseline at full paper size.
pub fn build_cnn_only(rng: &mut Rng, classes: usize) -> Result<NetworkGraph> {
    build_cnn_only_with(ModelDims::paper(), rng, classes)
}

/// Build the CNN-only baseline at arbitrary dimensions. The convolutional
/// branch and head mirror the hybrid exactly; there is no recurrent branch
/// and no merge.
pub fn build_cnn_only_with(dims: ModelDims, rng: &mut Rng, classes: usize) -> Result<NetworkGraph> {
    dims.validate()?;
    check_classes(classes)?;
    let cnn = cnn_branch(&dims)?;
    let head = head_section(&dims, classes, false)?;
    let mut params = ParamStore::new();
    init_section(&cnn, &mut params, rng)?;
    init_section(&head, &mut params, rng)?;
    Ok(NetworkGraph {
        arch: Architecture::CnnOnly,
        dims,
        classes,
        cnn,
        rnn: None,
        head,
        params,
    })
}

/// Rebuild a graph skeleton (no initialization) and fill it from an existing
/// parameter store, validating names and shapes. Used by checkpoint loading.
pub fn graph_from_params(
    arch: Architecture,
    dims: ModelDims,
    classes: usize,
    params: ParamStore,
) -> Result<NetworkGraph> {
    let mut rng = Rng::new(0);
    let mut graph = match arch {
        Architecture::Hybrid => build_hybrid_with(dims, &mut rng, classes)?,
        Architecture::CnnOnly => build_cnn_only_with(dims, &mut rng, classes)?,
    };
    let expected: Vec<String> = graph.params.names().map(str::to_string).collect();
    let got: Vec<String> = params.names().map(str::to_string).collect();
    if expected != got {
        return Err(Error::Integrity(format!(
            "parameter keys do not match the declared architecture: expected {expected:?}, got {got:?}"
        )));
    }
    for (name, tensor) in params.iter() {
        graph.params.set(name, tensor.clone())?;
    }
    Ok(graph)
}
