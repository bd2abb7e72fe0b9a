//! Model persistence.
//!
//! A model file is a self-describing text container: a version line, a
//! checksum line, then a payload of key/value lines, layer shape
//! declarations, and full-precision parameter rows. Floats are printed as
//! the shortest decimal that parses back to the identical bits, so a
//! save/load round trip reproduces parameters exactly. The checksum (SHA-256
//! of the payload) turns truncation or editing into a clean corruption error
//! instead of a half-loaded model.
//!
//! ```text
//! atd-model 1
//! sha256 9c0f...
//! feature_dim 6
//! embedding_dim 100
//! ...
//! layer 0 relu 6 64
//! weights 0
//! <64 rows of 6 values>
//! bias 0
//! <1 row of 64 values>
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::net::{Activation, Layer, NetworkParameters};
use crate::train::TrainConfig;

/// Format version written by this build.
pub const FORMAT_VERSION: u32 = 1;

const MAGIC: &str = "atd-model";

/// A trained model with everything needed to reuse it: parameters, data
/// shape, the training configuration that produced it, and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub parameters: NetworkParameters,
    pub category_count: usize,
    pub train_config: TrainConfig,
    /// Where the training data came from.
    pub provenance: String,
    /// Seed used for weight initialization and splitting.
    pub seed: u64,
    /// Fractions used to split the source dataset, `(test, val_of_train)`.
    pub split_fractions: (f64, f64),
}

impl ModelArtifact {
    /// Feature dimension the model expects.
    pub fn feature_dim(&self) -> usize {
        self.parameters.input_dim()
    }

    /// Embedding dimension the model produces.
    pub fn embedding_dim(&self) -> usize {
        self.parameters.embedding_dim()
    }
}

fn render_floats(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out
}

fn render_payload(artifact: &ModelArtifact) -> String {
    let mut payload = String::new();
    let c = &artifact.train_config;
    let _ = writeln!(payload, "feature_dim {}", artifact.feature_dim());
    let _ = writeln!(payload, "embedding_dim {}", artifact.embedding_dim());
    let _ = writeln!(payload, "category_count {}", artifact.category_count);
    let _ = writeln!(payload, "seed {}", artifact.seed);
    let _ = writeln!(payload, "provenance {}", artifact.provenance);
    let _ = writeln!(payload, "test_fraction {}", artifact.split_fractions.0);
    let _ = writeln!(payload, "val_fraction {}", artifact.split_fractions.1);
    let _ = writeln!(payload, "epochs {}", c.epochs);
    let _ = writeln!(payload, "batch_size {}", c.batch_size);
    match c.batches_per_epoch {
        Some(b) => {
            let _ = writeln!(payload, "batches_per_epoch {b}");
        }
        None => {
            let _ = writeln!(payload, "batches_per_epoch default");
        }
    }
    let _ = writeln!(payload, "learning_rate {}", c.learning_rate);
    let _ = writeln!(payload, "arccos_guard {}", c.arccos_guard);
    let _ = writeln!(payload, "validation_k {}", c.validation_k);

    let layers = artifact.parameters.layers();
    let _ = writeln!(payload, "layers {}", layers.len());
    for (l, layer) in layers.iter().enumerate() {
        let _ = writeln!(
            payload,
            "layer {l} {} {} {}",
            layer.activation().name(),
            layer.in_dim(),
            layer.out_dim()
        );
    }
    for (l, layer) in layers.iter().enumerate() {
        let _ = writeln!(payload, "weights {l}");
        for row in 0..layer.out_dim() {
            let start = row * layer.in_dim();
            let _ = writeln!(
                payload,
                "{}",
                render_floats(&layer.weights()[start..start + layer.in_dim()])
            );
        }
        let _ = writeln!(payload, "bias {l}");
        let _ = writeln!(payload, "{}", render_floats(layer.bias()));
    }
    payload.push_str("end\n");
    payload
}

fn sha256_hex(payload: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(payload.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Serialize an artifact to its text form.
pub fn render_model(artifact: &ModelArtifact) -> String {
    let payload = render_payload(artifact);
    format!(
        "{MAGIC} {FORMAT_VERSION}\nsha256 {}\n{payload}",
        sha256_hex(&payload)
    )
}

/// Write an artifact to a file.
pub fn save_model(artifact: &ModelArtifact, path: &Path) -> Result<()> {
    std::fs::write(path, render_model(artifact))?;
    Ok(())
}

struct PayloadParser<'a> {
    lines: std::str::Lines<'a>,
    line_number: usize,
}

impl<'a> PayloadParser<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.line_number += 1;
        self.lines
            .next()
            .ok_or_else(|| Error::Corruption(format!("unexpected end at line {}", self.line_number)))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| {
                Error::Corruption(format!(
                    "line {}: expected {key:?}, found {line:?}",
                    self.line_number
                ))
            })
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.keyed(key)?;
        raw.parse().map_err(|_| {
            Error::Corruption(format!(
                "line {}: bad value {raw:?} for {key}",
                self.line_number
            ))
        })
    }

    fn floats(&mut self, expected: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let mut out = Vec::with_capacity(expected);
        for token in line.split(' ') {
            out.push(token.parse::<f64>().map_err(|_| {
                Error::Corruption(format!(
                    "line {}: bad float {token:?}",
                    self.line_number
                ))
            })?);
        }
        if out.len() != expected {
            return Err(Error::Corruption(format!(
                "line {}: expected {expected} values, found {}",
                self.line_number,
                out.len()
            )));
        }
        Ok(out)
    }
}

/// Parse an artifact from its text form.
pub fn parse_model(text: &str) -> Result<ModelArtifact> {
    let mut header = text.lines();
    let magic_line = header
        .next()
        .ok_or_else(|| Error::Corruption("empty file".into()))?;
    match magic_line.strip_prefix(MAGIC).map(str::trim) {
        Some(version) if version == FORMAT_VERSION.to_string() => {}
        Some(version) => {
            return Err(Error::UnsupportedVersion {
                found: version.to_string(),
            })
        }
        None => {
            return Err(Error::Corruption(format!(
                "not a model file (first line {magic_line:?})"
            )))
        }
    }
    let checksum_line = header
        .next()
        .ok_or_else(|| Error::Corruption("missing checksum line".into()))?;
    let declared = checksum_line
        .strip_prefix("sha256 ")
        .ok_or_else(|| Error::Corruption("missing sha256 checksum".into()))?;

    let payload_start = text
        .find('\n')
        .and_then(|first| text[first + 1..].find('\n').map(|second| first + second + 2))
        .ok_or_else(|| Error::Corruption("truncated header".into()))?;
    let payload = &text[payload_start..];
    let actual = sha256_hex(payload);
    if actual != declared {
        return Err(Error::Corruption(format!(
            "checksum mismatch: declared {declared}, computed {actual}"
        )));
    }

    let mut parser = PayloadParser {
        lines: payload.lines(),
        line_number: 2,
    };
    let feature_dim: usize = parser.parse("feature_dim")?;
    let embedding_dim: usize = parser.parse("embedding_dim")?;
    let category_count: usize = parser.parse("category_count")?;
    let seed: u64 = parser.parse("seed")?;
    let provenance: String = parser.keyed("provenance")?.to_string();
    let test_fraction: f64 = parser.parse("test_fraction")?;
    let val_fraction: f64 = parser.parse("val_fraction")?;
    let epochs: usize = parser.parse("epochs")?;
    let batch_size: usize = parser.parse("batch_size")?;
    let batches_raw = parser.keyed("batches_per_epoch")?;
    let batches_per_epoch = if batches_raw == "default" {
        None
    } else {
        Some(batches_raw.parse::<usize>().map_err(|_| {
            Error::Corruption(format!("bad batches_per_epoch {batches_raw:?}"))
        })?)
    };
    let learning_rate: f64 = parser.parse("learning_rate")?;
    let arccos_guard: f64 = parser.parse("arccos_guard")?;
    let validation_k: usize = parser.parse("validation_k")?;

    let layer_count: usize = parser.parse("layers")?;
    let mut shapes = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        let decl = parser.keyed(&format!("layer {l}"))?;
        let parts: Vec<&str> = decl.split(' ').collect();
        if parts.len() != 3 {
            return Err(Error::Corruption(format!("bad layer declaration {decl:?}")));
        }
        let activation = Activation::from_name(parts[0])
            .ok_or_else(|| Error::Corruption(format!("unknown activation {:?}", parts[0])))?;
        let in_dim: usize = parts[1]
            .parse()
            .map_err(|_| Error::Corruption(format!("bad layer in_dim {:?}", parts[1])))?;
        let out_dim: usize = parts[2]
            .parse()
            .map_err(|_| Error::Corruption(format!("bad layer out_dim {:?}", parts[2])))?;
        shapes.push((activation, in_dim, out_dim));
    }

    let mut layers = Vec::with_capacity(layer_count);
    for (l, &(activation, in_dim, out_dim)) in shapes.iter().enumerate() {
        let marker = parser.next_line()?;
        if marker != format!("weights {l}") {
            return Err(Error::Corruption(format!(
                "expected weights marker for layer {l}, found {marker:?}"
            )));
        }
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..out_dim {
            weights.extend(parser.floats(in_dim)?);
        }
        let marker = parser.next_line()?;
        if marker != format!("bias {l}") {
            return Err(Error::Corruption(format!(
                "expected bias marker for layer {l}, found {marker:?}"
            )));
        }
        let bias = parser.floats(out_dim)?;
        layers.push(
            Layer::new(weights, bias, activation, in_dim, out_dim)
                .map_err(|e| Error::Corruption(e.to_string()))?,
        );
    }
    if parser.next_line()? != "end" {
        return Err(Error::Corruption("missing end marker".into()));
    }

    let parameters = NetworkParameters::from_layers(layers)
        .map_err(|e| Error::Corruption(e.to_string()))?;
    if parameters.input_dim() != feature_dim || parameters.embedding_dim() != embedding_dim {
        return Err(Error::Corruption(format!(
            "declared dims {feature_dim} -> {embedding_dim} do not match the layers ({} -> {})",
            parameters.input_dim(),
            parameters.embedding_dim()
        )));
    }

    Ok(ModelArtifact {
        parameters,
        category_count,
        train_config: TrainConfig {
            epochs,
            batch_size,
            batches_per_epoch,
            learning_rate,
            arccos_guard,
            seed,
            validation_k,
        },
        provenance,
        seed,
        split_fractions: (test_fraction, val_fraction),
    })
}

/// Read an artifact from a file.
pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    parse_model(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetworkParameters;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn sample_artifact(seed: u64) -> ModelArtifact {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let parameters = NetworkParameters::init(6, &[16, 8], 5, &mut rng).unwrap();
        ModelArtifact {
            parameters,
            category_count: 4,
            train_config: TrainConfig {
                epochs: 17,
                batch_size: 32,
                batches_per_epoch: Some(9),
                learning_rate: 2.5e-4,
                arccos_guard: 1e-7,
                seed,
                validation_k: 3,
            },
            provenance: "datasets/example.data".into(),
            seed,
            split_fractions: (0.2, 0.2),
        }
    }

    #[test]
    fn round_trip_is_bitwise_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.atd");
        let artifact = sample_artifact(3);
        save_model(&artifact, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, artifact);
        // Bitwise parameter equality, spelled out.
        for (a, b) in loaded
            .parameters
            .layers()
            .iter()
            .zip(artifact.parameters.layers())
        {
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn embeddings_agree_before_and_after_the_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.atd");
        let artifact = sample_artifact(11);
        let input = vec![0.1, 0.9, 0.4, 0.3, 0.7, 0.2];
        let before = crate::net::embed(&artifact.parameters, &input).unwrap();
        save_model(&artifact, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        let after = crate::net::embed(&loaded.parameters, &input).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn truncated_file_is_a_corruption_error() {
        let text = render_model(&sample_artifact(5));
        for keep in [text.len() / 3, text.len() / 2, text.len() - 2] {
            let truncated = &text[..keep];
            match parse_model(truncated) {
                Err(Error::Corruption(_)) | Err(Error::UnsupportedVersion { .. }) => {}
                other => panic!("expected corruption on truncation, got {other:?}"),
            }
        }
    }

    #[test]
    fn edited_payload_fails_the_checksum() {
        let text = render_model(&sample_artifact(7));
        let tampered = text.replace("category_count 4", "category_count 5");
        assert_eq!(parse_model(&tampered).unwrap_err().category(), "corruption");
    }

    #[test]
    fn unknown_version_is_reported_as_such() {
        let text = render_model(&sample_artifact(9));
        let future = text.replacen("atd-model 1", "atd-model 2", 1);
        assert_eq!(
            parse_model(&future).unwrap_err().category(),
            "unsupported-version"
        );
    }

    #[test]
    fn non_model_text_is_rejected() {
        assert_eq!(
            parse_model("hello world\n").unwrap_err().category(),
            "corruption"
        );
    }
}
