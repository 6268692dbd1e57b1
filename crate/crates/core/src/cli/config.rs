//! Experiment configuration.
//!
//! The text format is one `key = value` per line with `#` comments. A
//! component is given either in call form, `instance = thm4(8, 1, 0.4)`, or
//! through dotted keys, `instance.name = thm4` and `instance.delta = 0.4`.
//! Dotted keys override the call form. A JSON object with the same shape,
//! nested or dotted, is accepted too.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::CliError;

/// `name(arg, ..., key = value, ...)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecCall {
    pub name: String,
    pub positional: Vec<String>,
    pub named: BTreeMap<String, String>,
}

impl SpecCall {
    pub fn parse(text: &str) -> Result<SpecCall, CliError> {
        let text = text.trim();
        let (name, rest) = match text.find('(') {
            None => (text, None),
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| CliError::config(format!("unbalanced parentheses in `{text}`")))?;
                (&text[..open], Some(inner))
            }
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::config(format!("bad component name in `{text}`")));
        }
        let mut call = SpecCall {
            name: name.to_string(),
            ..SpecCall::default()
        };
        if let Some(inner) = rest.filter(|s| !s.trim().is_empty()) {
            for arg in inner.split(',') {
                let arg = arg.trim();
                match arg.split_once('=') {
                    Some((k, v)) => {
                        call.named.insert(k.trim().to_string(), v.trim().to_string());
                    }
                    None if call.named.is_empty() => call.positional.push(arg.to_string()),
                    None => return Err(CliError::config(format!("positional argument after named ones in `{text}`"))),
                }
            }
        }
        Ok(call)
    }

    /// Binds positional and named arguments to `params`, rejecting unknown
    /// names and surplus arguments.
    pub fn bind(&self, params: &[&str]) -> Result<Bound, CliError> {
        if self.positional.len() > params.len() {
            return Err(CliError::config(format!(
                "{} takes at most {} arguments ({}), got {}",
                self.name,
                params.len(),
                params.join(", "),
                self.positional.len()
            )));
        }
        let mut values = BTreeMap::new();
        for (p, v) in params.iter().zip(&self.positional) {
            values.insert(p.to_string(), v.clone());
        }
        for (k, v) in &self.named {
            if !params.contains(&k.as_str()) {
                return Err(CliError::config(format!(
                    "{} has no parameter `{k}` (expected one of: {})",
                    self.name,
                    params.join(", ")
                )));
            }
            if values.insert(k.clone(), v.clone()).is_some() {
                return Err(CliError::config(format!("{}: `{k}` given twice", self.name)));
            }
        }
        Ok(Bound {
            owner: self.name.clone(),
            values,
        })
    }
}

impl fmt::Display for SpecCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .positional
            .iter()
            .cloned()
            .chain(self.named.iter().map(|(k, v)| format!("{k}={v}")))
            .collect();
        if args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}({})", self.name, args.join(", "))
        }
    }
}

/// Arguments of a [`SpecCall`] keyed by parameter name.
#[derive(Clone, Debug)]
pub struct Bound {
    owner: String,
    values: BTreeMap<String, String>,
}

impl Bound {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None | Some("auto") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("{}: cannot parse {key} = `{v}`", self.owner))),
        }
    }

    pub fn req<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.opt(key)?
            .ok_or_else(|| CliError::config(format!("{}: missing parameter `{key}`", self.owner)))
    }

    pub fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn is_auto(&self, key: &str) -> bool {
        matches!(self.raw(key), None | Some("auto"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub instance: SpecCall,
    pub graph: SpecCall,
    pub policy: SpecCall,
    pub horizons: Vec<u64>,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    /// Write one CSV per (T, seed) cell.
    pub write_runs: bool,
}

const SECTIONS: [&str; 3] = ["instance", "graph", "policy"];
const TOP_KEYS: [&str; 6] = ["horizons", "seeds", "seed_list", "master_seed", "out", "write_runs"];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        let flat = if is_json { flatten_json(&text)? } else { parse_flat(&text)? };
        Self::from_map(flat)
    }

    pub fn parse_text(text: &str) -> Result<ExperimentConfig, CliError> {
        Self::from_map(parse_flat(text)?)
    }

    pub fn parse_json(text: &str) -> Result<ExperimentConfig, CliError> {
        Self::from_map(flatten_json(text)?)
    }

    fn from_map(map: BTreeMap<String, String>) -> Result<ExperimentConfig, CliError> {
        for key in map.keys() {
            let head = key.split('.').next().unwrap_or_default();
            if !SECTIONS.contains(&head) && !TOP_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!("unknown config key `{key}`")));
            }
        }
        let section = |name: &str, default: Option<&str>| -> Result<SpecCall, CliError> {
            let mut call = match (map.get(name), map.get(&format!("{name}.name"))) {
                (Some(v), None) => SpecCall::parse(v)?,
                (None, Some(n)) => SpecCall::parse(n)?,
                (Some(_), Some(_)) => {
                    return Err(CliError::config(format!("both `{name}` and `{name}.name` are set")))
                }
                (None, None) => match default {
                    Some(d) => SpecCall::parse(d)?,
                    None => return Err(CliError::config(format!("missing `{name}`"))),
                },
            };
            let prefix = format!("{name}.");
            for (k, v) in map.range(prefix.clone()..) {
                let Some(param) = k.strip_prefix(&prefix) else { break };
                if param != "name" {
                    call.named.insert(param.to_string(), v.clone());
                }
            }
            Ok(call)
        };
        let instance = section("instance", None)?;
        let graph = section("graph", Some("complete"))?;
        let policy = section("policy", None)?;

        let horizons = parse_horizons(map.get("horizons").ok_or_else(|| CliError::config("missing `horizons`"))?)?;
        let seeds = match (map.get("seeds"), map.get("seed_list")) {
            (Some(_), Some(_)) => return Err(CliError::config("set either `seeds` or `seed_list`, not both")),
            (Some(n), None) => {
                let n: u64 = n
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("`seeds` must be a count, got `{n}`")))?;
                (0..n).collect()
            }
            (None, Some(list)) => parse_list(list, "seed_list")?,
            (None, None) => vec![0],
        };
        if seeds.is_empty() {
            return Err(CliError::config("no seeds"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(CliError::config("duplicate seeds"));
        }
        let master_seed = match map.get("master_seed") {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("bad master_seed `{s}`")))?,
            None => 0,
        };
        let write_runs = match map.get("write_runs").map(|s| s.trim()) {
            None | Some("true") => true,
            Some("false") => false,
            Some(other) => return Err(CliError::config(format!("write_runs must be true or false, got `{other}`"))),
        };
        Ok(ExperimentConfig {
            instance,
            graph,
            policy,
            horizons,
            seeds,
            master_seed,
            out: map.get("out").map(PathBuf::from),
            write_runs,
        })
    }
}

fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::config(format!("line {}: `{key}` set twice", i + 1)));
        }
    }
    Ok(map)
}

fn flatten_json(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid JSON config: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(CliError::config("JSON config must be an object"));
    };
    let mut map = BTreeMap::new();
    fn walk(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) -> Result<(), CliError> {
        match v {
            Value::Object(o) => {
                for (k, v) in o {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out)?;
                }
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(CliError::config(format!("`{prefix}`: arrays may hold only numbers and strings"))),
                    })
                    .collect::<Result<_, _>>()?;
                out.insert(prefix.to_string(), parts.join(","));
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
            Value::Null => {}
        }
        Ok(())
    }
    walk("", &Value::Object(obj), &mut map)?;
    Ok(map)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<u64>, CliError> {
    text.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::config(format!("{what}: bad integer `{s}`"))))
        .collect()
}

fn parse_horizon_token(tok: &str) -> Result<u64, CliError> {
    let bad = || CliError::config(format!("horizons: bad value `{tok}`"));
    match tok.split_once('^') {
        Some(("2", e)) => {
            let e: u32 = e.trim().parse().map_err(|_| bad())?;
            if e >= 63 {
                return Err(bad());
            }
            Ok(1 << e)
        }
        Some(_) => Err(bad()),
        None => tok.parse().map_err(|_| bad()),
    }
}

/// Comma-separated horizons. `2^k` is accepted, and `2^a..2^b` expands to
/// every power of two in between.
pub fn parse_horizons(text: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for tok in text.trim().trim_start_matches('[').trim_end_matches(']').split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = tok.split_once("..") {
            let (lo, hi) = (parse_horizon_token(lo.trim())?, parse_horizon_token(hi.trim())?);
            if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
                return Err(CliError::config(format!("horizons: `{tok}` must span powers of two")));
            }
            let mut t = lo;
            while t <= hi {
                out.push(t);
                t <<= 1;
            }
        } else {
            out.push(parse_horizon_token(tok)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::config("no horizons"));
    }
    if out.contains(&0) {
        return Err(CliError::config("horizons must be positive"));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config("horizons must be strictly increasing"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_calls() {
        let c = SpecCall::parse("thm4(8, 1, delta = 0.4)").unwrap();
        assert_eq!(c.name, "thm4");
        assert_eq!(c.positional, vec!["8", "1"]);
        assert_eq!(c.named["delta"], "0.4");
        assert_eq!(c.to_string(), "thm4(8, 1, delta=0.4)");
        let b = c.bind(&["M", "Q", "delta"]).unwrap();
        assert_eq!(b.req::<usize>("M").unwrap(), 8);
        assert_eq!(b.req::<f64>("delta").unwrap(), 0.4);
        assert!(c.bind(&["M"]).is_err());
        assert!(SpecCall::parse("x(1").is_err());
        assert!(SpecCall::parse("f(a=1, 2)").is_err());
        assert_eq!(SpecCall::parse("complete").unwrap().positional.len(), 0);
        assert_eq!(SpecCall::parse("f()").unwrap().to_string(), "f");
    }

    #[test]
    fn flat_and_dotted() {
        let text = "
            # smoke
            instance = thm4(8, 1)
            instance.delta = 0.4
            graph.name = er
            graph.c = 0.3
            policy = fixed(2)
            horizons = 2^10..2^12, 10000
            seeds = 2
            master_seed = 7
        ";
        let c = ExperimentConfig::parse_text(text).unwrap();
        assert_eq!(c.instance.named["delta"], "0.4");
        assert_eq!(c.graph.name, "er");
        assert_eq!(c.graph.named["c"], "0.3");
        assert_eq!(c.horizons, vec![1024, 2048, 4096, 10000]);
        assert_eq!(c.seeds, vec![0, 1]);
        assert_eq!(c.master_seed, 7);
    }

    #[test]
    fn json_mirror_matches_text() {
        let text = "instance = thm4(8, 1, 0.4)\npolicy = gossip_ucb(2)\nhorizons = 100, 200\nseed_list = 3, 5\n";
        let json = r#"{"instance": "thm4(8, 1, 0.4)", "policy": {"name": "gossip_ucb", "C": 2},
                       "horizons": [100, 200], "seed_list": [3, 5]}"#;
        let a = ExperimentConfig::parse_text(text).unwrap();
        let b = ExperimentConfig::parse_json(json).unwrap();
        assert_eq!(a.instance, b.instance);
        assert_eq!(a.horizons, b.horizons);
        assert_eq!(a.seeds, vec![3, 5]);
        assert_eq!(b.seeds, vec![3, 5]);
        assert_eq!(b.policy.named["C"], "2");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse_text("instance = a\npolicy = b\nhorizons = 3, 2\n").is_err());
        assert!(ExperimentConfig::parse_text("instance = a\npolicy = b\nhorizons = 3\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse_text("policy = b\nhorizons = 3\n").is_err());
        assert!(ExperimentConfig::parse_text("instance = a\npolicy = b\nhorizons = 3\nseed_list = 1, 1\n").is_err());
        assert!(parse_horizons("2^3..2^1").is_err());
    }
}
