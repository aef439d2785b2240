//! Run configuration: one JSON document, defaults filled in, then patched by
//! `--dotted.path value` flags.

use std::path::{Path, PathBuf};

use friedrichs::potential::PotentialSpec;
use friedrichs::scattering::WindingConfig;
use friedrichs::spectrum::SpectrumConfig;
use friedrichs::waveop::{BoundaryConfig, PROJECTION_PADDING};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Overrides `output_dir`, and nothing else.
pub const OUTPUT_DIR_ENV: &str = "FRIEDRICHS_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub cutoff: f64,
    pub y_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub winding: WindingConfig,
    pub spectrum: SpectrumConfig,
    pub boundary: BoundaryGeometry,
    pub projection_padding: usize,
    /// Largest relative L² gap between the stationary and Abel-averaged
    /// wave operators accepted by `waveop-verify`.
    pub wave_operator: f64,
}

impl Tolerances {
    pub fn boundary_config(&self) -> BoundaryConfig {
        BoundaryConfig {
            cutoff: self.boundary.cutoff,
            y_points: self.boundary.y_points,
            winding: self.winding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOptions {
    /// Decreasing `ε` values for the finite-ε cross-check of `I₊`.
    pub epsilon_schedule: Vec<f64>,
    /// Where the cross-check runs (snapped to the nearest grid point).
    pub oracle_points: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveOpOptions {
    /// Dense grid for `waveop-verify`; the main grid is usually too fine.
    pub grid: GridConfig,
    pub eta_schedule: Vec<f64>,
    pub packet: Packet,
    /// Also compute the even/odd residual and its singular values.
    pub formula_residual: bool,
    /// Write `Ω₋` as `omega_minus.bin`.
    pub dump_matrix: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Multipliers of `|u|²`, strictly increasing.
    pub couplings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub potential: PotentialSpec<f64>,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub scattering: ScatteringOptions,
    pub waveop: WaveOpOptions,
    pub sweep: SweepOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig { l: 20.0, n: 2048 },
            potential: PotentialSpec::gaussian(0.3, 0.0, 1.0),
            tolerances: Tolerances {
                winding: WindingConfig::default(),
                spectrum: SpectrumConfig::default(),
                boundary: BoundaryGeometry {
                    cutoff: BoundaryConfig::default().cutoff,
                    y_points: BoundaryConfig::default().y_points,
                },
                projection_padding: PROJECTION_PADDING,
                wave_operator: 5e-2,
            },
            output_dir: PathBuf::from("out"),
            scattering: ScatteringOptions {
                epsilon_schedule: vec![0.4, 0.2, 0.1, 0.05],
                oracle_points: vec![-1.0, 0.0, 0.5, 2.0],
            },
            waveop: WaveOpOptions {
                grid: GridConfig { l: 10.0, n: 512 },
                eta_schedule: vec![0.4, 0.2, 0.1],
                packet: Packet {
                    center: 2.0,
                    momentum: -1.0,
                    width: 1.0,
                },
                formula_residual: true,
                dump_matrix: false,
            },
            sweep: SweepOptions {
                couplings: vec![0.5, 1.0, 2.0, 4.0],
            },
        }
    }
}

/// Defaults, then the file, then the flags, then the environment.
pub fn load(
    path: Option<&Path>,
    overrides: &[String],
    env_output_dir: Option<String>,
) -> Result<RunConfig, ConfigError> {
    let mut doc = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| bad(format!("{} is not valid JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(bad(format!("{} must hold a JSON object", path.display())));
        }
        merge(&mut doc, file);
    }
    for (key, value) in parse_overrides(overrides)? {
        set_path(&mut doc, &key, value)?;
    }
    let mut config: RunConfig = serde_json::from_value(doc.clone()).map_err(|e| bad(e.to_string()))?;
    let typed = serde_json::to_value(&config).expect("config serializes");
    if let Some(unknown) = first_unknown_key(&doc, &typed, "") {
        return Err(bad(format!("unknown key `{unknown}`")));
    }
    if let Some(dir) = env_output_dir.filter(|d| !d.is_empty()) {
        config.output_dir = PathBuf::from(dir);
    }
    validate(&config)?;
    Ok(config)
}

/// Objects merge key by key; anything else is replaced. The potential is
/// always replaced whole, since its keys depend on its kind.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if k != "potential" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `--a.b=v` and `--a.b v`. Values are JSON when they parse as JSON and
/// strings otherwise.
fn parse_overrides(args: &[String]) -> Result<Vec<(String, Value)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(bad(format!("expected a `--dotted.path value` override, got `{arg}`")));
        };
        let (key, raw) = match flag.split_once('=') {
            Some((k, v)) => (k.to_owned(), v.to_owned()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| bad(format!("override `--{flag}` has no value")))?;
                (flag.to_owned(), v.clone())
            }
        };
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(bad(format!("malformed override path `{key}`")));
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        out.push((key, value));
    }
    Ok(out)
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| bad(format!("override `{key}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            // Switching the potential kind drops the previous shape's keys.
            if parts.len() == 2 && parts[0] == "potential" && *part == "kind" {
                let amplitude = obj.get("amplitude").cloned();
                obj.clear();
                if let Some(a) = amplitude {
                    obj.insert("amplitude".into(), a);
                }
            }
            obj.insert((*part).to_owned(), value);
            return Ok(());
        }
        node = obj.entry(*part).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("override path has at least one segment")
}

/// A key present in the document that the typed config dropped.
fn first_unknown_key(doc: &Value, typed: &Value, prefix: &str) -> Option<String> {
    let (Value::Object(d), Value::Object(t)) = (doc, typed) else {
        return None;
    };
    for (k, v) in d {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match t.get(k) {
            None => return Some(path),
            Some(tv) => {
                if let Some(found) = first_unknown_key(v, tv, &path) {
                    return Some(found);
                }
            }
        }
    }
    None
}

fn check_grid(name: &str, g: GridConfig) -> Result<(), ConfigError> {
    if !g.n.is_power_of_two() || g.n < 4 {
        return Err(bad(format!(
            "{name}.N must be a power of two (at least 4) for the FFT, got {}",
            g.n
        )));
    }
    if !(g.l > 0.0 && g.l.is_finite()) {
        return Err(bad(format!("{name}.L must be positive and finite, got {}", g.l)));
    }
    Ok(())
}

fn check_schedule(name: &str, values: &[f64], min_len: usize, decreasing: bool) -> Result<(), ConfigError> {
    if values.len() < min_len {
        return Err(bad(format!(
            "{name} needs at least {min_len} entries, got {}",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(bad(format!("{name} entries must be positive and finite, got {v}")));
    }
    let ordered = values
        .windows(2)
        .all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] });
    if !ordered {
        let how = if decreasing { "decreasing" } else { "increasing" };
        return Err(bad(format!("{name} must be strictly {how}, got {values:?}")));
    }
    Ok(())
}

/// Every number under `tolerances` must be positive.
fn check_positive(path: &str, v: &Value) -> Result<(), ConfigError> {
    match v {
        Value::Number(n) => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if !(x > 0.0) {
                return Err(bad(format!("{path} must be positive, got {n}")));
            }
        }
        Value::Object(m) => {
            for (k, child) in m {
                check_positive(&format!("{path}.{k}"), child)?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    check_grid("grid", c.grid)?;
    check_grid("waveop.grid", c.waveop.grid)?;
    c.potential.validate().map_err(|e| bad(e.to_string()))?;
    check_positive(
        "tolerances",
        &serde_json::to_value(c.tolerances).expect("tolerances serialize"),
    )?;
    if c.tolerances.boundary.y_points < 2 {
        return Err(bad(format!(
            "tolerances.boundary.y_points must be at least 2, got {}",
            c.tolerances.boundary.y_points
        )));
    }
    check_schedule("scattering.epsilon_schedule", &c.scattering.epsilon_schedule, 2, true)?;
    check_schedule("waveop.eta_schedule", &c.waveop.eta_schedule, 2, true)?;
    check_schedule("sweep.couplings", &c.sweep.couplings, 1, false)?;
    if !(c.waveop.packet.width > 0.0) {
        return Err(bad(format!(
            "waveop.packet.width must be positive, got {}",
            c.waveop.packet.width
        )));
    }
    if c.output_dir.as_os_str().is_empty() {
        return Err(bad("output_dir must not be empty"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn defaults_are_valid() {
        assert_eq!(load(None, &[], None).unwrap(), RunConfig::default());
    }

    #[test]
    fn dotted_overrides_reach_nested_fields() {
        let c = load(
            None,
            &args(&[
                "--grid.N=1024",
                "--tolerances.winding.max_phase_step",
                "0.5",
                "--output_dir=elsewhere",
            ]),
            None,
        )
        .unwrap();
        assert_eq!(c.grid.n, 1024);
        assert_eq!(c.tolerances.winding.max_phase_step, 0.5);
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn switching_the_potential_kind_drops_old_keys() {
        let c = load(
            None,
            &args(&[
                "--potential.kind=bump_power",
                "--potential.a=-1",
                "--potential.b=1",
                "--potential.power=2",
            ]),
            None,
        )
        .unwrap();
        assert_eq!(c.potential, PotentialSpec::bump(0.3, -1.0, 1.0, 2.0));
    }

    #[test]
    fn non_power_of_two_is_rejected_by_name() {
        let e = load(None, &args(&["--grid.N=1000"]), None).unwrap_err();
        assert!(e.to_string().contains("grid.N must be a power of two"), "{e}");
    }

    #[test]
    fn unknown_keys_and_bad_tolerances_are_rejected() {
        assert!(load(None, &args(&["--grid.M=4"]), None)
            .unwrap_err()
            .to_string()
            .contains("grid.M"));
        assert!(load(None, &args(&["--potential.widht=2"]), None).is_err());
        let e = load(None, &args(&["--tolerances.spectrum.bisection_width=0"]), None).unwrap_err();
        assert!(e.to_string().contains("bisection_width"), "{e}");
    }

    #[test]
    fn environment_overrides_only_the_output_dir() {
        let c = load(None, &args(&["--output_dir=a"]), Some("b".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("b"));
        assert_eq!(c.grid, RunConfig::default().grid);
    }

    #[test]
    fn file_values_sit_between_defaults_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"grid": {"N": 512}, "potential": {"kind": "zero"}}"#).unwrap();
        let c = load(Some(&path), &args(&["--grid.L=10"]), None).unwrap();
        assert_eq!(c.grid, GridConfig { l: 10.0, n: 512 });
        assert!(c.potential.is_zero());
    }
}
