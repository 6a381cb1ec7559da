//! Versioned plain-text checkpoints.
//!
//! ```text
//! plantsim-dqn 1
//! hyperparams {...json...}
//! config_hash <hex>
//! observation_len <n>
//! actions <n>
//! params <count>
//! param <name> <len>
//! <values separated by spaces>
//! ...
//! end
//! ```

use std::fs;
use std::path::Path;

use super::agent::Hyperparams;
use super::network::QNetwork;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "plantsim-dqn";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub hyperparams: Hyperparams,
    /// Hash of the plant config the network was trained on.
    pub config_hash: String,
    pub observation_len: usize,
    pub actions: usize,
    pub network: QNetwork,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n");
        out += &format!(
            "hyperparams {}\n",
            serde_json::to_string(&self.hyperparams).expect("hyperparams serialize")
        );
        out += &format!("config_hash {}\n", self.config_hash);
        out += &format!("observation_len {}\n", self.observation_len);
        out += &format!("actions {}\n", self.actions);
        let names = self.network.param_names();
        let params = self.network.params();
        out += &format!("params {}\n", params.len());
        for (name, values) in names.iter().zip(params) {
            out += &format!("param {name} {}\n", values.len());
            let line: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
            out += &line.join(" ");
            out.push('\n');
        }
        out += "end\n";
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| corrupt(format!("missing {what}")))
        };

        let header = next("header")?;
        let (magic, version) = header
            .split_once(' ')
            .ok_or_else(|| corrupt("bad header".into()))?;
        if magic != CHECKPOINT_MAGIC {
            return Err(corrupt(format!("unknown format {magic:?}")));
        }
        let version: u32 = version
            .parse()
            .map_err(|_| corrupt(format!("bad version {version:?}")))?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }

        let hyperparams: Hyperparams =
            serde_json::from_str(field(next("hyperparams")?, "hyperparams")?)
                .map_err(|e| corrupt(format!("hyperparams: {e}")))?;
        let config_hash = field(next("config_hash")?, "config_hash")?.to_string();
        let observation_len = number(field(next("observation_len")?, "observation_len")?)?;
        let actions = number(field(next("actions")?, "actions")?)?;
        let count = number(field(next("params")?, "params")?)?;

        let mut network = QNetwork::new(
            &hyperparams.architecture(observation_len, actions),
            &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0),
        );
        let names = network.param_names();
        if names.len() != count {
            return Err(corrupt(format!(
                "expected {} parameter blocks, found {count}",
                names.len()
            )));
        }
        let mut blocks = Vec::with_capacity(count);
        for name in &names {
            let spec = field(next("param")?, "param")?;
            let (found, len) = spec
                .split_once(' ')
                .ok_or_else(|| corrupt(format!("bad param line {spec:?}")))?;
            if found != name {
                return Err(corrupt(format!("expected {name}, found {found}")));
            }
            let len = number(len)?;
            let values = next("values")?
                .split_ascii_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| corrupt(format!("bad value {v:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != len {
                return Err(corrupt(format!(
                    "{name}: expected {len} values, found {}",
                    values.len()
                )));
            }
            blocks.push(values);
        }
        if next("end")? != "end" {
            return Err(corrupt("missing end marker".into()));
        }
        for (dst, src) in network.params_mut().into_iter().zip(blocks) {
            if dst.len() != src.len() {
                return Err(corrupt(
                    "parameter shape does not match architecture".into(),
                ));
            }
            *dst = src;
        }
        Ok(Self {
            hyperparams,
            config_hash,
            observation_len,
            actions,
            network,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn corrupt(msg: String) -> Error {
    Error::CorruptCheckpoint(msg)
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| corrupt(format!("expected {key}")))
}

fn number(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| corrupt(format!("bad number {s:?}")))
}
