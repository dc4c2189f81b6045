//! Run configuration files: `key = value` lines or a JSON object (nested
//! objects are flattened to dotted keys).

use std::collections::BTreeMap;
use std::path::Path;

use critwave::io;
use critwave::solver::{InitialData, MeshSpec, Refinement, RunConfig};

use crate::CliError;

/// Every key a config may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "mesh.h",
    "mesh.rmax",
    "mesh.refine_ratio",
    "mesh.refine_count",
    "cfl",
    "dt",
    "t_end",
    "nonlinear",
    "blowup_threshold",
    "output.every",
    "data.family",
    "data.delta",
    "data.lambda",
    "data.rcut",
    "data.amp",
    "data.sigma",
    "data.path",
    "analysis.g_radii",
    "analysis.ball_radii",
    "seed",
];

/// Raw key/value pairs, ordered by key.
pub type KeyValues = BTreeMap<String, String>;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub run: RunConfig,
    pub g_radii: Vec<f64>,
    pub ball_radii: Vec<f64>,
    pub seed: Option<u64>,
}

pub fn parse_text(text: &str) -> Result<KeyValues, CliError> {
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad JSON: {e}")))?;
        let mut out = KeyValues::new();
        flatten("", &value, &mut out)?;
        return Ok(out);
    }
    let mut out = KeyValues::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", k + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut KeyValues) -> Result<(), CliError> {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
        }
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        Value::Number(n) => {
            out.insert(prefix.to_string(), n.to_string());
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), b.to_string());
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
            out.insert(prefix.to_string(), parts.join(","));
        }
        Value::Null => {}
    }
    Ok(())
}

pub fn read_file(path: &Path) -> Result<KeyValues, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_text(&text)
}

fn num(kv: &KeyValues, key: &str) -> Result<Option<f64>, CliError> {
    kv.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{key}: not a number: {v:?}")))
        })
        .transpose()
}

fn required(kv: &KeyValues, key: &str) -> Result<f64, CliError> {
    num(kv, key)?.ok_or_else(|| CliError::Config(format!("missing key {key}")))
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("{key}: not a number: {s:?}")))
        })
        .collect()
}

/// Build a run configuration; `base` resolves a relative `data.path`.
pub fn build(kv: &KeyValues, base: &Path) -> Result<SimConfig, CliError> {
    if let Some(k) = kv.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown key {k}")));
    }
    let family = kv
        .get("data.family")
        .ok_or_else(|| CliError::Config("missing key data.family".into()))?;
    let data = match family.as_str() {
        "near_w" => InitialData::NearW {
            delta: required(kv, "data.delta")?,
            lambda: num(kv, "data.lambda")?.unwrap_or(1.0),
            r_cut: num(kv, "data.rcut")?,
        },
        "bump" => InitialData::Bump {
            amp: required(kv, "data.amp")?,
            sigma: required(kv, "data.sigma")?,
        },
        "perturbed_w" => InitialData::PerturbedW {
            lambda: num(kv, "data.lambda")?.unwrap_or(1.0),
            amp: required(kv, "data.amp")?,
            sigma: required(kv, "data.sigma")?,
        },
        "csv" => {
            let path = kv
                .get("data.path")
                .ok_or_else(|| CliError::Config("data.family = csv needs data.path".into()))?;
            let path = base.join(path);
            let file = std::fs::File::open(&path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let (r, u, ut) = io::read_snapshot_columns(std::io::BufReader::new(file))
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            InitialData::Samples { r, u, ut }
        }
        other => return Err(CliError::Config(format!("unknown data.family {other:?}"))),
    };
    let mut run = RunConfig::new(data);
    let h = num(kv, "mesh.h")?.unwrap_or(run.mesh.h);
    let r_max = num(kv, "mesh.rmax")?.unwrap_or(run.mesh.r_max);
    run.mesh = MeshSpec::uniform(h, r_max);
    match (num(kv, "mesh.refine_ratio")?, num(kv, "mesh.refine_count")?) {
        (Some(ratio), Some(count)) => {
            if count < 1.0 || count.fract() != 0.0 {
                return Err(CliError::Config("mesh.refine_count must be a positive integer".into()));
            }
            run.mesh.refine = Some(Refinement {
                ratio,
                inner_count: count as usize,
            });
        }
        (None, None) => {}
        _ => {
            return Err(CliError::Config(
                "mesh.refine_ratio and mesh.refine_count go together".into(),
            ))
        }
    }
    if let Some(v) = num(kv, "cfl")? {
        run.cfl = v;
    }
    run.dt = num(kv, "dt")?;
    if let Some(v) = num(kv, "t_end")? {
        run.t_end = v;
    }
    if let Some(v) = kv.get("nonlinear") {
        run.nonlinear = match v.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(CliError::Config(format!("nonlinear: expected true|false, got {v:?}"))),
        };
    }
    if let Some(v) = num(kv, "blowup_threshold")? {
        run.blowup_threshold = v;
    }
    if let Some(v) = num(kv, "output.every")? {
        run.output_every = v;
    }
    run.keep_frames = true;
    run.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let g_radii = match kv.get("analysis.g_radii") {
        Some(v) => parse_list("analysis.g_radii", v)?,
        None => Vec::new(),
    };
    let ball_radii = match kv.get("analysis.ball_radii") {
        Some(v) => parse_list("analysis.ball_radii", v)?,
        None => Vec::new(),
    };
    let seed = kv
        .get("seed")
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| CliError::Config(format!("seed: not an unsigned integer: {v:?}")))
        })
        .transpose()?;
    Ok(SimConfig {
        run,
        g_radii,
        ball_radii,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_and_json_agree() {
        let a = parse_text("# comment\ndata.family = near_w\ndata.delta = -0.1\nmesh.h=0.05\n").unwrap();
        let b = parse_text(r#"{"data": {"family": "near_w", "delta": -0.1}, "mesh.h": 0.05}"#).unwrap();
        assert_eq!(a, b);
        let c = build(&a, Path::new(".")).unwrap();
        assert_eq!(c.run.mesh.h, 0.05);
        assert!(matches!(c.run.data, InitialData::NearW { delta, .. } if delta == -0.1));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "data.family = near_w\n",
            "data.family = nope\n",
            "data.family = bump\ndata.amp = 1\ndata.sigma = 1\nfoo = 1\n",
            "data.family = bump\ndata.amp = x\ndata.sigma = 1\n",
            "data.family = bump\ndata.amp = 1\ndata.sigma = 1\ncfl = 0.9\n",
            "data.family = bump\ndata.amp = 1\ndata.sigma = 1\nnonlinear = yes\n",
            "just words\n",
        ] {
            let r = parse_text(text).and_then(|kv| build(&kv, Path::new(".")));
            assert!(matches!(r, Err(CliError::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("k", "1, 2.5,").unwrap(), vec![1.0, 2.5]);
        let kv = parse_text(r#"{"data.family": "bump", "data.amp": 1, "data.sigma": 1, "analysis": {"g_radii": [5, 10]}}"#).unwrap();
        assert_eq!(build(&kv, Path::new(".")).unwrap().g_radii, vec![5.0, 10.0]);
    }
}
