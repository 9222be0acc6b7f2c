//! Dense feedforward networks: representation, evaluation, JSON weight files,
//! seeded random construction and Monte Carlo output sampling.
//!
//! All randomness flows from a `u64` seed through [`seeded_rng`] (ChaCha8), so
//! every constructor and sampler here is bit-reproducible across runs.

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;

/// Default number of Monte Carlo samples used for the under-approximation.
pub const DEFAULT_SAMPLES: usize = 1000;

/// The generator behind every seeded operation in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Linear => t,
            Activation::Relu => t.max(0.0),
            Activation::Tanh => t.tanh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(ReachError::Parse(format!("unknown activation {other:?}"))),
        }
    }
}

/// One dense layer `a = act(W x + b)`; row `i` of `weights` feeds output unit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Array2<f64>,
    bias: Array1<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Result<Self> {
        Self::validated(weights, bias, activation, 0)
    }

    fn validated(weights: Array2<f64>, bias: Array1<f64>, activation: Activation, index: usize) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(ReachError::LayerDimension {
                layer: index,
                detail: format!(
                    "weights have {} rows but bias has {} entries",
                    weights.nrows(),
                    bias.len()
                ),
            });
        }
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(ReachError::LayerDimension {
                layer: index,
                detail: "empty weight matrix".into(),
            });
        }
        if let Some(((r, c), v)) = weights.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(ReachError::NonFinite {
                layer: index,
                detail: format!("weights[{r}][{c}] = {v}"),
            });
        }
        if let Some((i, v)) = bias.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ReachError::NonFinite {
                layer: index,
                detail: format!("bias[{i}] = {v}"),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }

    /// `W x + b`, summed in column order.
    pub fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .zip(self.bias.iter())
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect()
    }
}

/// A chain of dense layers. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(ReachError::InvalidArgument("network has no layers".into()));
        }
        for k in 1..layers.len() {
            if layers[k].n_in() != layers[k - 1].n_out() {
                return Err(ReachError::LayerDimension {
                    layer: k,
                    detail: format!(
                        "expects {} inputs but layer {} produces {}",
                        layers[k].n_in(),
                        k - 1,
                        layers[k - 1].n_out()
                    ),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out()
    }

    /// Widths `[n_in, hidden..., n_out]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::n_out))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(ReachError::Dimension {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut a = x.to_vec();
        for layer in &self.layers {
            let act = layer.activation;
            a = layer.pre_activation(&a).into_iter().map(|t| act.apply(t)).collect();
        }
        Ok(a)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: NetworkFile = match serde_json::from_str(text) {
            Ok(f) => f,
            Err(err) => {
                // Python's json module writes bare NaN/Infinity; quote them so the
                // layer validation can report which entry is non-finite.
                let quoted = quote_nonstandard_literals(text);
                match serde_json::from_str(&quoted) {
                    Ok(f) if quoted != text => f,
                    _ => return Err(ReachError::Parse(err.to_string())),
                }
            }
        };
        file.into_network()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ReachError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = NetworkFile {
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l
                        .weights
                        .rows()
                        .into_iter()
                        .map(|r| r.iter().map(|&v| JsonReal::Num(v)).collect())
                        .collect(),
                    bias: l.bias.iter().map(|&v| JsonReal::Num(v)).collect(),
                    activation: l.activation.name().to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }
}

/// Loads a network from a JSON weight file.
pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    Network::load(path)
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<Vec<JsonReal>>,
    bias: Vec<JsonReal>,
    activation: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonReal {
    Num(f64),
    Text(String),
}

impl JsonReal {
    fn value(&self) -> Result<f64> {
        match self {
            JsonReal::Num(v) => Ok(*v),
            JsonReal::Text(s) => match s.to_ascii_lowercase().as_str() {
                "nan" => Ok(f64::NAN),
                "infinity" | "inf" => Ok(f64::INFINITY),
                "-infinity" | "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(ReachError::Parse(format!("expected a number, got {s:?}"))),
            },
        }
    }
}

impl NetworkFile {
    fn into_network(self) -> Result<Network> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, lf) in self.layers.into_iter().enumerate() {
            let rows = lf.weights.len();
            let cols = lf.weights.first().map_or(0, Vec::len);
            if let Some(i) = lf.weights.iter().position(|r| r.len() != cols) {
                return Err(ReachError::LayerDimension {
                    layer: k,
                    detail: format!("weights row {i} has {} entries, expected {cols}", lf.weights[i].len()),
                });
            }
            let flat = lf
                .weights
                .iter()
                .flatten()
                .map(JsonReal::value)
                .collect::<Result<Vec<f64>>>()?;
            let weights = Array2::from_shape_vec((rows, cols), flat).map_err(|e| ReachError::Parse(e.to_string()))?;
            let bias = lf.bias.iter().map(JsonReal::value).collect::<Result<Vec<f64>>>()?;
            let activation = lf.activation.parse()?;
            layers.push(Layer::validated(weights, Array1::from(bias), activation, k)?);
        }
        Network::new(layers)
    }
}

fn quote_nonstandard_literals(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        let token = ["-Infinity", "Infinity", "NaN"]
            .into_iter()
            .find(|t| rest.starts_with(t));
        match token {
            Some(t) => {
                out.push('"');
                out.push_str(t);
                out.push('"');
                rest = &rest[t.len()..];
            }
            None => {
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out
}

/// Random dense network. Hidden layers use `activation`, the output layer is
/// linear. Weights are uniform on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
pub fn random_network(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Network> {
    if layer_sizes.len() < 2 {
        return Err(ReachError::InvalidArgument(format!(
            "need at least input and output sizes, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(ReachError::InvalidArgument(format!(
            "layer sizes must be positive, got {layer_sizes:?}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let n_layers = layer_sizes.len() - 1;
    let mut layers = Vec::with_capacity(n_layers);
    for k in 0..n_layers {
        let (fan_in, fan_out) = (layer_sizes[k], layer_sizes[k + 1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        let weights = Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-bound..=bound));
        let act = if k + 1 == n_layers {
            Activation::Linear
        } else {
            activation
        };
        layers.push(Layer::new(weights, Array1::zeros(fan_out), act)?);
    }
    Network::new(layers)
}

/// Exact network outputs at sampled inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub inputs: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub enclosing_box: IntervalBox,
    pub seed: u64,
}

impl SampleSet {
    fn from_inputs(net: &Network, inputs: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let points = inputs.iter().map(|x| net.forward(x)).collect::<Result<Vec<_>>>()?;
        let enclosing_box = IntervalBox::enclosing(points.iter().map(Vec::as_slice))?;
        Ok(Self {
            inputs,
            points,
            enclosing_box,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Elementwise minima of the sampled outputs.
    pub fn minima(&self) -> &[f64] {
        self.enclosing_box.lo()
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, input_box: &IntervalBox) -> Vec<f64> {
    (0..input_box.dim())
        .map(|i| {
            let (l, h) = (input_box.lo()[i], input_box.hi()[i]);
            if l == h {
                l
            } else {
                rng.random_range(l..=h)
            }
        })
        .collect()
}

/// `n` exact outputs at inputs drawn uniformly from `input_box`.
pub fn sample_outputs(net: &Network, input_box: &IntervalBox, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(ReachError::InvalidArgument("sample count must be positive".into()));
    }
    if input_box.dim() != net.input_dim() {
        return Err(ReachError::Dimension {
            expected: net.input_dim(),
            actual: input_box.dim(),
        });
    }
    let mut rng = seeded_rng(seed);
    let inputs = (0..n).map(|_| uniform_point(&mut rng, input_box)).collect();
    SampleSet::from_inputs(net, inputs, seed)
}

/// Reference "true" output set for error reporting: a regular grid with
/// `grid_per_dim` points per axis (corners included) plus `n_random` uniform draws.
pub fn truth_samples(
    net: &Network,
    input_box: &IntervalBox,
    grid_per_dim: usize,
    n_random: usize,
    seed: u64,
) -> Result<SampleSet> {
    if input_box.dim() != net.input_dim() {
        return Err(ReachError::Dimension {
            expected: net.input_dim(),
            actual: input_box.dim(),
        });
    }
    let dim = input_box.dim();
    let mut inputs = Vec::new();
    if grid_per_dim >= 2 {
        let total = grid_per_dim.pow(dim as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x = (0..dim)
                .map(|i| {
                    let k = rem % grid_per_dim;
                    rem /= grid_per_dim;
                    let t = k as f64 / (grid_per_dim - 1) as f64;
                    input_box.lo()[i] + t * input_box.width(i)
                })
                .collect();
            inputs.push(x);
        }
    }
    let mut rng = seeded_rng(seed);
    inputs.extend((0..n_random).map(|_| uniform_point(&mut rng, input_box)));
    if inputs.is_empty() {
        return Err(ReachError::InvalidArgument("truth set needs at least one point".into()));
    }
    SampleSet::from_inputs(net, inputs, seed)
}
