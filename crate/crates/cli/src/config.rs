//! Run configuration: defaults, the flat `key=value` file format, and the
//! canonical serialization embedded in checkpoints.
//!
//! The defaults reproduce the reference training protocol: 70 epochs,
//! batch 32, Adadelta with learning rate 1.0, 60x80 inputs, the full-size
//! architecture, and augmentation on. A `(config, dataset)` pair fully
//! determines a run, bit-exactly.

use hcrn_core::data::{AugmentSpec, ClassMap, Grouping};
use hcrn_core::error::{Error, Result};
use hcrn_core::model::{Architecture, ModelDims};
use std::path::PathBuf;

/// Classification task: the four cell types, or the two-group split
/// (mononuclear vs polymorphonuclear).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    FourWay,
    TwoWay,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::FourWay => "4way",
            Task::TwoWay => "2way",
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Task::FourWay => 4,
            Task::TwoWay => 2,
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "4way" => Ok(Task::FourWay),
            "2way" => Ok(Task::TwoWay),
            other => Err(Error::Config(format!(
                "unknown task '{other}', expected 4way or 2way"
            ))),
        }
    }

    pub fn class_map(&self) -> ClassMap {
        match self {
            Task::FourWay => ClassMap::four_way(),
            Task::TwoWay => ClassMap::two_way(Grouping::mononuclear_vs_polymorphonuclear()),
        }
    }
}

pub fn parse_arch(s: &str) -> Result<Architecture> {
    match s {
        "hybrid" => Ok(Architecture::Hybrid),
        "cnn" => Ok(Architecture::CnnOnly),
        other => Err(Error::Config(format!(
            "unknown architecture '{other}', expected hybrid or cnn"
        ))),
    }
}

/// Everything a training run needs. See the module docs for defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub arch: Architecture,
    pub task: Task,
    pub data_root: PathBuf,
    pub out_dir: PathBuf,
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub seed: u64,
    pub augment: bool,
    pub rotation_degrees: f64,
    pub reflect_prob: f64,
    pub shift_frac: f64,
    pub dims: ModelDims,
    pub ckpt_every_epoch: bool,
    /// Weight initialization scheme; recorded so runs are self-describing.
    /// Only `glorot_uniform` exists.
    pub init: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            arch: Architecture::Hybrid,
            task: Task::FourWay,
            data_root: PathBuf::from("."),
            out_dir: PathBuf::from("out"),
            epochs: 70,
            batch_size: 32,
            lr: 1.0,
            rho: 0.95,
            eps: 1e-6,
            seed: 0,
            augment: true,
            rotation_degrees: 20.0,
            reflect_prob: 0.5,
            shift_frac: 0.1,
            dims: ModelDims::paper(),
            ckpt_every_epoch: false,
            init: "glorot_uniform".into(),
        }
    }
}

impl TrainConfig {
    pub fn classes(&self) -> usize {
        self.task.classes()
    }

    pub fn class_map(&self) -> ClassMap {
        self.task.class_map()
    }

    pub fn augment_spec(&self) -> AugmentSpec {
        AugmentSpec {
            rotation_degrees: self.rotation_degrees,
            reflect_prob: self.reflect_prob,
            shift_frac: self.shift_frac,
            // augmentation stream 2 of the master seed
            seed: hcrn_core::rng::derive_seed(self.seed, 2, 0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        hcrn_core::optim::AdadeltaParams {
            rho: self.rho,
            eps: self.eps,
            lr: self.lr,
        }
        .validate()?;
        self.dims.validate()?;
        self.augment_spec().validate()?;
        if self.init != "glorot_uniform" {
            return Err(Error::Config(format!(
                "unknown init '{}', only glorot_uniform is implemented",
                self.init
            )));
        }
        Ok(())
    }

    /// Canonical `key=value` serialization: fixed key order, one per line.
    /// This text is what checkpoints embed, so it must round-trip through
    /// [`TrainConfig::apply_line`] exactly.
    pub fn to_key_values(&self) -> String {
        let d = &self.dims;
        format!(
            "arch={}\ntask={}\ndata={}\nout={}\nepochs={}\nbatch={}\nlr={}\nrho={}\neps={}\n\
             seed={}\naugment={}\nrot_degrees={}\nreflect_prob={}\nshift_frac={}\n\
             input_h={}\ninput_w={}\nconv1={}\nconv2={}\nlstm={}\nhead={}\n\
             drop_conv={}\ndrop_lstm={}\ndrop_head={}\nckpt_every_epoch={}\ninit={}\n",
            self.arch.as_str(),
            self.task.as_str(),
            self.data_root.display(),
            self.out_dir.display(),
            self.epochs,
            self.batch_size,
            self.lr,
            self.rho,
            self.eps,
            self.seed,
            self.augment,
            self.rotation_degrees,
            self.reflect_prob,
            self.shift_frac,
            d.input_h,
            d.input_w,
            d.conv1,
            d.conv2,
            d.lstm_hidden,
            d.head_units,
            d.drop_conv,
            d.drop_lstm,
            d.drop_head,
            self.ckpt_every_epoch,
            self.init,
        )
    }

    /// Apply one `key=value` line. Blank lines and `#` comments are skipped.
    pub fn apply_line(&mut self, line: &str) -> Result<()> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("malformed config line '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());

        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
        }

        match key {
            "arch" => self.arch = parse_arch(value)?,
            "task" => self.task = Task::parse(value)?,
            "data" => self.data_root = PathBuf::from(value),
            "out" => self.out_dir = PathBuf::from(value),
            "epochs" => self.epochs = num(key, value)?,
            "batch" => self.batch_size = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "augment" => self.augment = num(key, value)?,
            "rot_degrees" => self.rotation_degrees = num(key, value)?,
            "reflect_prob" => self.reflect_prob = num(key, value)?,
            "shift_frac" => self.shift_frac = num(key, value)?,
            "input_h" => self.dims.input_h = num(key, value)?,
            "input_w" => self.dims.input_w = num(key, value)?,
            "conv1" => self.dims.conv1 = num(key, value)?,
            "conv2" => self.dims.conv2 = num(key, value)?,
            "lstm" => self.dims.lstm_hidden = num(key, value)?,
            "head" => self.dims.head_units = num(key, value)?,
            "drop_conv" => self.dims.drop_conv = num(key, value)?,
            "drop_lstm" => self.dims.drop_lstm = num(key, value)?,
            "drop_head" => self.dims.drop_head = num(key, value)?,
            "ckpt_every_epoch" => self.ckpt_every_epoch = num(key, value)?,
            "init" => self.init = value.to_string(),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a full `key=value` document on top of the defaults.
    pub fn from_key_values(text: &str) -> Result<TrainConfig> {
        let mut config = TrainConfig::default();
        for line in text.lines() {
            config.apply_line(line)?;
        }
        Ok(config)
    }

    /// Read a config file from disk on top of the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<TrainConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        TrainConfig::from_key_values(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_training_protocol() {
        let c = TrainConfig::default();
        assert_eq!(c.epochs, 70);
        assert_eq!(c.batch_size, 32);
        assert_eq!(c.lr, 1.0);
        assert_eq!(c.dims, ModelDims::paper());
        assert_eq!(c.dims.input_h, 60);
        assert_eq!(c.dims.input_w, 80);
        assert!(c.augment);
        c.validate().unwrap();
    }

    #[test]
    fn key_value_round_trip_is_exact() {
        let mut c = TrainConfig::default();
        c.arch = Architecture::CnnOnly;
        c.task = Task::TwoWay;
        c.epochs = 3;
        c.lr = 0.7;
        c.eps = 1e-8;
        c.seed = 981;
        c.dims = ModelDims::tiny();
        c.augment = false;
        let text = c.to_key_values();
        let back = TrainConfig::from_key_values(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_key_values(), text);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# a comment\n\nepochs=5\n  seed = 9\n";
        let c = TrainConfig::from_key_values(text).unwrap();
        assert_eq!(c.epochs, 5);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(
            TrainConfig::from_key_values("banana=1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            TrainConfig::from_key_values("epochs=many"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            TrainConfig::from_key_values("arch=transformer"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validation_rejects_bad_hyperparameters() {
        let mut c = TrainConfig::default();
        c.batch_size = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.dims.drop_head = 1.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.init = "zeros".into();
        assert!(c.validate().is_err());
    }
}
