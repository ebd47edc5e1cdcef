//! Scenario configuration: a flat `key = value` file plus command-line
//! overrides. Every key has a default; the defaults reproduce the reference
//! deployment (50 Mbps at 60 FPS, 15 ms budget, 100 MHz FR1 and 1 GHz FR2
//! at 43 dBm).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::balancer::Policy;
use crate::engine::SimTime;
use crate::radio::LinkParams;
use crate::traffic::TrafficConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` out of range: {reason}")]
    OutOfRange { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SingleUeDistanceSweep,
    MultiUeCapacitySweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::SingleUeDistanceSweep => "single_ue_distance_sweep",
            Scenario::MultiUeCapacitySweep => "multi_ue_capacity_sweep",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single_ue_distance_sweep" => Ok(Scenario::SingleUeDistanceSweep),
            "multi_ue_capacity_sweep" => Ok(Scenario::MultiUeCapacitySweep),
            _ => Err(format!("unknown scenario `{s}`")),
        }
    }
}

/// Start offsets of the video streams within one frame period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FramePhase {
    /// Every stream emits its frames at `k / fps`.
    Aligned,
    /// Each stream gets a uniform offset in `[0, 1 / fps)`.
    Random,
}

impl FramePhase {
    pub fn name(self) -> &'static str {
        match self {
            FramePhase::Aligned => "aligned",
            FramePhase::Random => "random",
        }
    }
}

impl FromStr for FramePhase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aligned" => Ok(FramePhase::Aligned),
            "random" => Ok(FramePhase::Random),
            _ => Err(format!("unknown frame phase `{s}`")),
        }
    }
}

/// How the FR2 blockage process behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockageMode {
    /// Alternating exponential dwell times.
    Markov,
    Never,
    Always,
}

impl BlockageMode {
    pub fn name(self) -> &'static str {
        match self {
            BlockageMode::Markov => "markov",
            BlockageMode::Never => "never",
            BlockageMode::Always => "always",
        }
    }
}

impl FromStr for BlockageMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markov" => Ok(BlockageMode::Markov),
            "never" => Ok(BlockageMode::Never),
            "always" => Ok(BlockageMode::Always),
            _ => Err(format!("unknown blockage mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub policies: Vec<Policy>,
    pub distances_m: Vec<f64>,
    pub n_ues: Vec<usize>,
    pub sim_time: SimTime,
    pub runs: usize,
    pub base_seed: u64,
    pub warmup: SimTime,
    pub freeze_drops: bool,
    /// Largest gNB–UE distance in the hexagonal cell.
    pub cell_size_m: f64,

    pub traffic: TrafficConfig,
    pub frame_phase: FramePhase,
    pub d_retx: SimTime,
    pub c_est_smoothing: f64,
    pub recalc_on_ack: bool,
    pub t_reordering: SimTime,
    pub xn_latency: SimTime,
    pub measurement_period: SimTime,

    pub fr1: LinkParams,
    pub fr2: LinkParams,

    pub blockage_mode: BlockageMode,
    pub blockage_mean_unblocked: SimTime,
    pub blockage_mean_blocked: SimTime,
    pub blockage_loss_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::SingleUeDistanceSweep,
            policies: Policy::ALL.to_vec(),
            distances_m: vec![10.0, 30.0, 50.0, 70.0, 90.0, 110.0, 130.0, 133.0],
            n_ues: (1..=12).collect(),
            sim_time: 10.0,
            runs: 20,
            base_seed: 1,
            warmup: 0.5,
            freeze_drops: false,
            cell_size_m: 133.0,
            traffic: TrafficConfig::default(),
            frame_phase: FramePhase::Aligned,
            d_retx: 5e-3,
            c_est_smoothing: 0.5,
            recalc_on_ack: false,
            t_reordering: 10e-3,
            xn_latency: 1e-3,
            measurement_period: 10e-3,
            fr1: LinkParams::fr1(),
            fr2: LinkParams::fr2(),
            blockage_mode: BlockageMode::Markov,
            blockage_mean_unblocked: 0.25,
            blockage_mean_blocked: 0.05,
            blockage_loss_db: 40.0,
        }
    }
}

/// Every key accepted in a config file, in echo order.
pub const KEYS: &[&str] = &[
    "scenario",
    "policy",
    "distances_m",
    "n_ues",
    "sim_time_s",
    "runs",
    "base_seed",
    "warmup_ms",
    "freeze_drops",
    "cell_size_m",
    "bitrate_mbps",
    "fps",
    "peak_to_average",
    "mtu_payload_bytes",
    "d_qos_ms",
    "flr_qos",
    "frame_phase",
    "d_retx_ms",
    "c_est_smoothing",
    "recalc_on_ack",
    "t_reordering_ms",
    "xn_latency_ms",
    "measurement_period_ms",
    "tx_power_dbm",
    "gnb_height_m",
    "ue_height_m",
    "max_harq_attempts",
    "harq_rtt_ms",
    "fr1_carrier_ghz",
    "fr1_bandwidth_mhz",
    "fr1_antenna_gain_dbi",
    "fr1_noise_figure_db",
    "fr1_pl_intercept_db",
    "fr1_pl_exponent",
    "fr1_shadowing_db",
    "fr1_efficiency_cap",
    "fr1_slot_ms",
    "fr1_harq_success",
    "fr2_carrier_ghz",
    "fr2_bandwidth_mhz",
    "fr2_antenna_gain_dbi",
    "fr2_noise_figure_db",
    "fr2_pl_intercept_db",
    "fr2_pl_exponent",
    "fr2_shadowing_db",
    "fr2_efficiency_cap",
    "fr2_slot_ms",
    "fr2_harq_success",
    "blockage_mode",
    "blockage_mean_unblocked_ms",
    "blockage_mean_blocked_ms",
    "blockage_loss_db",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `1-12` or `1,2,5`.
fn parse_counts(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    if let Some((a, b)) = value.split_once('-') {
        let lo: usize = parse(key, a.trim())?;
        let hi: usize = parse(key, b.trim())?;
        return Ok((lo..=hi).collect());
    }
    parse_list(key, value)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ScenarioConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let ms = |k: &str| -> Result<f64, ConfigError> { Ok(parse::<f64>(k, v)? * 1e-3) };
        match key {
            "scenario" => self.scenario = parse(key, v)?,
            "policy" => self.policies = parse_list(key, v)?,
            "distances_m" => self.distances_m = parse_list(key, v)?,
            "n_ues" => self.n_ues = parse_counts(key, v)?,
            "sim_time_s" => self.sim_time = parse(key, v)?,
            "runs" => self.runs = parse(key, v)?,
            "base_seed" => self.base_seed = parse(key, v)?,
            "warmup_ms" => self.warmup = ms(key)?,
            "freeze_drops" => self.freeze_drops = parse(key, v)?,
            "cell_size_m" => self.cell_size_m = parse(key, v)?,
            "bitrate_mbps" => self.traffic.mean_bitrate_bps = parse::<f64>(key, v)? * 1e6,
            "fps" => self.traffic.fps = parse(key, v)?,
            "peak_to_average" => self.traffic.peak_to_average = parse(key, v)?,
            "mtu_payload_bytes" => self.traffic.mtu_payload_bits = parse::<u64>(key, v)? * 8,
            "d_qos_ms" => self.traffic.d_qos = ms(key)?,
            "flr_qos" => self.traffic.flr_qos = parse(key, v)?,
            "frame_phase" => self.frame_phase = parse(key, v)?,
            "d_retx_ms" => self.d_retx = ms(key)?,
            "c_est_smoothing" => self.c_est_smoothing = parse(key, v)?,
            "recalc_on_ack" => self.recalc_on_ack = parse(key, v)?,
            "t_reordering_ms" => self.t_reordering = ms(key)?,
            "xn_latency_ms" => self.xn_latency = ms(key)?,
            "measurement_period_ms" => self.measurement_period = ms(key)?,
            "tx_power_dbm" => {
                let x = parse(key, v)?;
                self.fr1.tx_power_dbm = x;
                self.fr2.tx_power_dbm = x;
            }
            "gnb_height_m" => {
                let x = parse(key, v)?;
                self.fr1.gnb_height_m = x;
                self.fr2.gnb_height_m = x;
            }
            "ue_height_m" => {
                let x = parse(key, v)?;
                self.fr1.ue_height_m = x;
                self.fr2.ue_height_m = x;
            }
            "max_harq_attempts" => {
                let x = parse(key, v)?;
                self.fr1.max_harq_attempts = x;
                self.fr2.max_harq_attempts = x;
            }
            "harq_rtt_ms" => {
                let x = ms(key)?;
                self.fr1.harq_rtt = x;
                self.fr2.harq_rtt = x;
            }
            "blockage_mode" => self.blockage_mode = parse(key, v)?,
            "blockage_mean_unblocked_ms" => self.blockage_mean_unblocked = ms(key)?,
            "blockage_mean_blocked_ms" => self.blockage_mean_blocked = ms(key)?,
            "blockage_loss_db" => self.blockage_loss_db = parse(key, v)?,
            _ => {
                let (link, field) = match key.split_once('_') {
                    Some(("fr1", f)) => (&mut self.fr1, f),
                    Some(("fr2", f)) => (&mut self.fr2, f),
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                };
                match field {
                    "carrier_ghz" => link.carrier_hz = parse::<f64>(key, v)? * 1e9,
                    "bandwidth_mhz" => link.bandwidth_hz = parse::<f64>(key, v)? * 1e6,
                    "antenna_gain_dbi" => link.antenna_gain_dbi = parse(key, v)?,
                    "noise_figure_db" => link.noise_figure_db = parse(key, v)?,
                    "pl_intercept_db" => link.pl_intercept_db = parse(key, v)?,
                    "pl_exponent" => link.pl_exponent = parse(key, v)?,
                    "shadowing_db" => link.shadowing_sigma_db = parse(key, v)?,
                    "efficiency_cap" => link.efficiency_cap = parse(key, v)?,
                    "slot_ms" => link.slot_duration = ms(key)?,
                    "harq_success" => link.per_attempt_success = parse(key, v)?,
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                }
            }
        }
        Ok(())
    }

    /// Current value of a key, formatted in file units.
    pub fn get(&self, key: &str) -> Option<String> {
        let ms = |x: f64| (x * 1e3).to_string();
        let link_field = |l: &LinkParams, f: &str| -> Option<String> {
            Some(match f {
                "carrier_ghz" => (l.carrier_hz / 1e9).to_string(),
                "bandwidth_mhz" => (l.bandwidth_hz / 1e6).to_string(),
                "antenna_gain_dbi" => l.antenna_gain_dbi.to_string(),
                "noise_figure_db" => l.noise_figure_db.to_string(),
                "pl_intercept_db" => l.pl_intercept_db.to_string(),
                "pl_exponent" => l.pl_exponent.to_string(),
                "shadowing_db" => l.shadowing_sigma_db.to_string(),
                "efficiency_cap" => l.efficiency_cap.to_string(),
                "slot_ms" => ms(l.slot_duration),
                "harq_success" => l.per_attempt_success.to_string(),
                _ => return None,
            })
        };
        Some(match key {
            "scenario" => self.scenario.name().to_string(),
            "policy" => join(&self.policies),
            "distances_m" => join(&self.distances_m),
            "n_ues" => join(&self.n_ues),
            "sim_time_s" => self.sim_time.to_string(),
            "runs" => self.runs.to_string(),
            "base_seed" => self.base_seed.to_string(),
            "warmup_ms" => ms(self.warmup),
            "freeze_drops" => self.freeze_drops.to_string(),
            "cell_size_m" => self.cell_size_m.to_string(),
            "bitrate_mbps" => (self.traffic.mean_bitrate_bps / 1e6).to_string(),
            "fps" => self.traffic.fps.to_string(),
            "peak_to_average" => self.traffic.peak_to_average.to_string(),
            "mtu_payload_bytes" => (self.traffic.mtu_payload_bits / 8).to_string(),
            "d_qos_ms" => ms(self.traffic.d_qos),
            "flr_qos" => self.traffic.flr_qos.to_string(),
            "frame_phase" => self.frame_phase.name().to_string(),
            "d_retx_ms" => ms(self.d_retx),
            "c_est_smoothing" => self.c_est_smoothing.to_string(),
            "recalc_on_ack" => self.recalc_on_ack.to_string(),
            "t_reordering_ms" => ms(self.t_reordering),
            "xn_latency_ms" => ms(self.xn_latency),
            "measurement_period_ms" => ms(self.measurement_period),
            "tx_power_dbm" => self.fr1.tx_power_dbm.to_string(),
            "gnb_height_m" => self.fr1.gnb_height_m.to_string(),
            "ue_height_m" => self.fr1.ue_height_m.to_string(),
            "max_harq_attempts" => self.fr1.max_harq_attempts.to_string(),
            "harq_rtt_ms" => ms(self.fr1.harq_rtt),
            "blockage_mode" => self.blockage_mode.name().to_string(),
            "blockage_mean_unblocked_ms" => ms(self.blockage_mean_unblocked),
            "blockage_mean_blocked_ms" => ms(self.blockage_mean_blocked),
            "blockage_loss_db" => self.blockage_loss_db.to_string(),
            _ => match key.split_once('_') {
                Some(("fr1", f)) => link_field(&self.fr1, f)?,
                Some(("fr2", f)) => link_field(&self.fr2, f)?,
                _ => return None,
            },
        })
    }

    /// All keys with their resolved values, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| (k, self.get(k).expect("every listed key has a value")))
            .collect()
    }

    /// Parses file text; later lines override earlier ones.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(o.to_string()))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key,
                    reason: reason.to_string(),
                })
            }
        }
        let t = &self.traffic;
        check(!self.policies.is_empty(), "policy", "at least one policy")?;
        check(self.sim_time > 0.0, "sim_time_s", "must be positive")?;
        check(self.runs >= 1, "runs", "at least one run")?;
        check(
            self.warmup >= 0.0 && self.warmup < self.sim_time,
            "warmup_ms",
            "must lie in [0, sim_time)",
        )?;
        check(
            self.cell_size_m > 0.0 && self.cell_size_m <= 200.0,
            "cell_size_m",
            "must lie in (0, 200]",
        )?;
        check(
            self.distances_m.iter().all(|&d| d > 0.0 && d <= 200.0) && !self.distances_m.is_empty(),
            "distances_m",
            "distances must lie in (0, 200]",
        )?;
        check(
            self.n_ues.iter().all(|&n| n >= 1) && !self.n_ues.is_empty(),
            "n_ues",
            "UE counts must be at least 1",
        )?;
        check(t.mean_bitrate_bps > 0.0, "bitrate_mbps", "must be positive")?;
        check(t.fps > 0.0, "fps", "must be positive")?;
        check(
            t.peak_to_average >= 1.0,
            "peak_to_average",
            "must be at least 1",
        )?;
        check(
            t.mtu_payload_bits > 0,
            "mtu_payload_bytes",
            "must be positive",
        )?;
        check(t.d_qos > 0.0, "d_qos_ms", "must be positive")?;
        check(
            t.flr_qos > 0.0 && t.flr_qos < 1.0,
            "flr_qos",
            "must lie in (0, 1)",
        )?;
        check(self.d_retx >= 0.0, "d_retx_ms", "must be non-negative")?;
        check(
            self.c_est_smoothing > 0.0 && self.c_est_smoothing <= 1.0,
            "c_est_smoothing",
            "must lie in (0, 1]",
        )?;
        check(
            self.t_reordering >= 0.0,
            "t_reordering_ms",
            "must be non-negative",
        )?;
        check(
            self.xn_latency >= 0.0,
            "xn_latency_ms",
            "must be non-negative",
        )?;
        check(
            self.measurement_period > 0.0,
            "measurement_period_ms",
            "must be positive",
        )?;
        check(
            self.blockage_mean_unblocked > 0.0 && self.blockage_mean_blocked > 0.0,
            "blockage_mean_blocked_ms",
            "dwell means must be positive",
        )?;
        check(
            self.blockage_loss_db >= 0.0,
            "blockage_loss_db",
            "must be non-negative",
        )?;
        for (name, l) in [("fr1", &self.fr1), ("fr2", &self.fr2)] {
            let key: &'static str = if name == "fr1" {
                "fr1_bandwidth_mhz"
            } else {
                "fr2_bandwidth_mhz"
            };
            check(
                l.bandwidth_hz > 0.0 && l.carrier_hz > 0.0,
                key,
                "bandwidth and carrier must be positive",
            )?;
            check(
                l.per_attempt_success > 0.0 && l.per_attempt_success <= 1.0,
                if name == "fr1" {
                    "fr1_harq_success"
                } else {
                    "fr2_harq_success"
                },
                "must lie in (0, 1]",
            )?;
            check(
                l.slot_duration > 0.0,
                if name == "fr1" {
                    "fr1_slot_ms"
                } else {
                    "fr2_slot_ms"
                },
                "must be positive",
            )?;
            check(
                l.efficiency_cap > 0.0,
                if name == "fr1" {
                    "fr1_efficiency_cap"
                } else {
                    "fr2_efficiency_cap"
                },
                "must be positive",
            )?;
            check(
                l.shadowing_sigma_db >= 0.0,
                if name == "fr1" {
                    "fr1_shadowing_db"
                } else {
                    "fr2_shadowing_db"
                },
                "must be non-negative",
            )?;
            check(
                l.max_harq_attempts >= 1,
                "max_harq_attempts",
                "at least one attempt",
            )?;
            check(l.harq_rtt > 0.0, "harq_rtt_ms", "must be positive")?;
        }
        Ok(())
    }
}

/// Reads `path` (if given), applies `overrides` on top and validates.
pub fn load_config<S: AsRef<str>>(
    path: Option<&Path>,
    overrides: &[S],
) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_overrides(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn from_text(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        load_config::<&str>(Some(f.path()), &[])
    }

    #[test]
    fn empty_file_gives_reference_defaults() {
        let cfg = from_text("").unwrap();
        assert_eq!(cfg.traffic.mean_bitrate_bps, 50e6);
        assert_eq!(cfg.traffic.fps, 60.0);
        assert_eq!(cfg.traffic.d_qos, 15e-3);
        assert_eq!(cfg.traffic.peak_to_average, 2.0);
        assert_eq!(cfg.fr1.bandwidth_hz, 100e6);
        assert_eq!(cfg.fr2.bandwidth_hz, 1e9);
        assert_eq!(cfg.fr1.carrier_hz, 3.6e9);
        assert_eq!(cfg.fr2.carrier_hz, 28e9);
        assert_eq!(cfg.fr1.tx_power_dbm, 43.0);
        assert_eq!(cfg.fr1.gnb_height_m, 10.0);
        assert_eq!(cfg.fr1.ue_height_m, 1.6);
        assert_eq!(cfg.d_retx, 5e-3);
        assert_eq!(cfg.cell_size_m, 133.0);
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn overrides_win_over_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "d_qos_ms = 20 # comment\n\n# full-line comment\nruns=3").unwrap();
        let cfg = load_config(Some(f.path()), &["d_qos_ms=10"]).unwrap();
        assert!((cfg.traffic.d_qos - 10e-3).abs() < 1e-15);
        assert_eq!(cfg.runs, 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = from_text("dqos_ms = 10").unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownKey(k) if k == "dqos_ms"));
        assert!(err.to_string().contains("dqos_ms"));
        assert!(matches!(
            from_text("fr3_slot_ms = 1"),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn errors_for_bad_input() {
        assert!(matches!(
            from_text("runs 3"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            from_text("runs = x"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            from_text("flr_qos = 1.5"),
            Err(ConfigError::OutOfRange { .. })
        ));
        assert!(matches!(
            load_config::<&str>(Some(Path::new("/nonexistent/cfg")), &[]),
            Err(ConfigError::Io { .. })
        ));
        assert!(matches!(
            load_config(None, &["runs"]),
            Err(ConfigError::BadOverride(_))
        ));
    }

    #[test]
    fn lists_and_ranges() {
        let cfg = load_config(
            None,
            &["n_ues=1-4", "policy=dbtb,single_fr1", "distances_m=10, 20"],
        )
        .unwrap();
        assert_eq!(cfg.n_ues, vec![1, 2, 3, 4]);
        assert_eq!(cfg.policies, vec![Policy::Dbtb, Policy::SingleFr1]);
        assert_eq!(cfg.distances_m, vec![10.0, 20.0]);
        let cfg = load_config(None, &["blockage_loss_db=inf"]).unwrap();
        assert_eq!(cfg.blockage_loss_db, f64::INFINITY);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = load_config(
            None,
            &["fr2_pl_exponent=2.7", "runs=7", "blockage_mode=always"],
        )
        .unwrap();
        let text: String = cfg
            .entries()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let mut back = ScenarioConfig::default();
        back.apply_text(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.entries().len(), KEYS.len());
    }
}
