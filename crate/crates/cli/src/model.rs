//! Network documents: a versioned JSON schema with one entry per layer.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use sac_core::family::{ShapeFamily, ShapeKind};
use sac_core::{Activation, BlockParams, Layer, SacNetwork, SacUnit};

use crate::error::CliError;

pub const VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u64,
    layers: Vec<LayerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: ActivationDoc,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "K")]
    k: f64,
    g_family: FamilyDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    kind: KindDoc,
    #[serde(rename = "U")]
    u: f64,
    k: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ActivationDoc {
    Phi1,
    Phi2,
    Relu,
    Softplus,
    Identity,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Rectifier,
    Wi,
    Si,
    Ekv,
}

impl From<Activation> for ActivationDoc {
    fn from(a: Activation) -> Self {
        match a {
            Activation::Phi1 => Self::Phi1,
            Activation::Phi2 => Self::Phi2,
            Activation::Relu => Self::Relu,
            Activation::Softplus => Self::Softplus,
            Activation::Identity => Self::Identity,
        }
    }
}

impl From<ActivationDoc> for Activation {
    fn from(a: ActivationDoc) -> Self {
        match a {
            ActivationDoc::Phi1 => Self::Phi1,
            ActivationDoc::Phi2 => Self::Phi2,
            ActivationDoc::Relu => Self::Relu,
            ActivationDoc::Softplus => Self::Softplus,
            ActivationDoc::Identity => Self::Identity,
        }
    }
}

impl From<ShapeKind> for KindDoc {
    fn from(k: ShapeKind) -> Self {
        match k {
            ShapeKind::Rectifier => Self::Rectifier,
            ShapeKind::WeakInversion => Self::Wi,
            ShapeKind::StrongInversion => Self::Si,
            ShapeKind::ModerateInversionEkv => Self::Ekv,
        }
    }
}

impl From<KindDoc> for ShapeKind {
    fn from(k: KindDoc) -> Self {
        match k {
            KindDoc::Rectifier => Self::Rectifier,
            KindDoc::Wi => Self::WeakInversion,
            KindDoc::Si => Self::StrongInversion,
            KindDoc::Ekv => Self::ModerateInversionEkv,
        }
    }
}

fn model_err(path: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Model { path: path.into(), msg: msg.to_string() }
}

/// Canonical single-line document followed by a newline.
pub fn save_network(net: &SacNetwork) -> String {
    let layers = net
        .layers
        .iter()
        .map(|l| {
            let unit = l.params().unit();
            LayerDoc {
                weights: l.weights.clone(),
                bias: l.bias.clone(),
                activation: l.activation.into(),
                c: unit.c(),
                s: unit.spline_count(),
                k: l.params().constant_k,
                g_family: FamilyDoc { kind: unit.shape.kind.into(), u: unit.shape.thermal_scale, k: unit.shape.gain },
            }
        })
        .collect();
    let mut text = serde_json::to_string(&Document { version: VERSION, layers }).expect("document serializes");
    text.push('\n');
    text
}

pub fn load_network(text: &str) -> Result<SacNetwork, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| model_err("$", e))?;
    match value.get("version") {
        Some(v) if v.as_u64() == Some(VERSION) => {}
        Some(v) => return Err(model_err("version", format!("unsupported version {v}"))),
        None => return Err(model_err("version", "missing")),
    }
    let doc: Document = serde_path_to_error::deserialize(value).map_err(|e| model_err(e.path().to_string(), e.inner()))?;
    let layers = doc
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| build_layer(l).map_err(|e| model_err(format!("layers[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    SacNetwork::new(layers).map_err(|e| model_err("layers", e))
}

fn build_layer(l: LayerDoc) -> sac_core::Result<Layer> {
    let shape = ShapeFamily::new(l.g_family.kind.into(), l.g_family.u, l.g_family.k)?;
    let params = BlockParams::with_k(SacUnit::new(l.s, l.c, shape)?, l.k)?;
    Layer::new(l.weights, l.bias, l.activation.into(), params)
}

pub fn write_network(net: &SacNetwork, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, save_network(net)).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn read_network(path: &Path) -> Result<SacNetwork, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    load_network(&text).map_err(|e| match e {
        CliError::Model { path: p, msg } => model_err(format!("{}: {p}", path.display()), msg),
        other => other,
    })
}
