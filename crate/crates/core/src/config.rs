//! Flat `key = value` configuration over every tunable default.
//!
//! Keys are dotted paths into the serialized settings, e.g. `motion.v_max`,
//! `world.workspace.min.x`, `train.horizons.action` or `expert.lead_time`.
//! Values are JSON scalars or arrays; bare words are taken as strings.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::datagen::{DatagenConfig, GenContext};
use crate::error::{Error, Result};
use crate::expert::ExpertConfig;
use crate::motion::MotionParams;
use crate::policy::TrainConfig;
use crate::world::WorldConfig;

const SECTIONS: [&str; 5] = ["world", "motion", "expert", "datagen", "train"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub ctx: GenContext,
    pub train: TrainConfig,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("settings serialize")
}

fn from_value<T: DeserializeOwned>(section: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{section}: {e}")))
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&format!("{prefix}.{k}"), child, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

impl Settings {
    fn section(&self, name: &str) -> Value {
        match name {
            "world" => to_value(&self.ctx.world),
            "motion" => to_value(&self.ctx.params),
            "expert" => to_value(&self.ctx.expert),
            "datagen" => to_value(&self.ctx.datagen),
            _ => to_value(&self.train),
        }
    }

    /// Sets one dotted key. Unknown keys and ill-typed values are rejected.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let mut parts = key.trim().split('.');
        let section = parts.next().unwrap_or_default();
        if !SECTIONS.contains(&section) {
            return Err(Error::Config(format!(
                "unknown key '{key}' (sections: {})",
                SECTIONS.join(", ")
            )));
        }
        let path: Vec<&str> = parts.collect();
        if path.is_empty() {
            return Err(Error::Config(format!("key '{key}' names a section, not a setting")));
        }
        let mut root = self.section(section);
        let mut slot = &mut root;
        for p in &path {
            slot = slot
                .as_object_mut()
                .and_then(|m: &mut Map<String, Value>| m.get_mut(*p))
                .ok_or_else(|| Error::Config(format!("unknown key '{key}'")))?;
        }
        if slot.is_object() {
            return Err(Error::Config(format!("key '{key}' names a group, not a setting")));
        }
        let mut value = parse_value(raw.trim());
        if slot.is_f64() && value.is_u64() {
            value = Value::from(value.as_f64().unwrap_or_default());
        }
        *slot = value;
        let bad = |e: Error| Error::Config(format!("{key} = {}: {e}", raw.trim()));
        match section {
            "world" => self.ctx.world = from_value::<WorldConfig>(section, root).map_err(bad)?,
            "motion" => self.ctx.params = from_value::<MotionParams>(section, root).map_err(bad)?,
            "expert" => self.ctx.expert = from_value::<ExpertConfig>(section, root).map_err(bad)?,
            "datagen" => self.ctx.datagen = from_value::<DatagenConfig>(section, root).map_err(bad)?,
            _ => self.train = from_value::<TrainConfig>(section, root).map_err(bad)?,
        }
        Ok(())
    }

    /// Applies `key = value` lines. `#` starts a comment; blank lines are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.ctx.world.validate()?;
        self.ctx.params.validate()?;
        self.train.validate()
    }

    /// Every setting as a `(key, value)` pair, in section order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for s in SECTIONS {
            flatten(s, &self.section(s), &mut out);
        }
        out
    }

    /// The settings rendered in the file format; reading it back reproduces them.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_scalar_keys() {
        let mut s = Settings::default();
        s.set("motion.v_max", "0.1").unwrap();
        s.set("train.steps", "500").unwrap();
        s.set("world.workspace.max.x", "0.4").unwrap();
        s.set("train.horizons.action", "2").unwrap();
        s.set("train.hidden", "[64, 64]").unwrap();
        s.set("datagen.align_grasp", "false").unwrap();
        s.set("world.dt", "1").unwrap();
        assert_eq!(s.ctx.params.v_max, 0.1);
        assert_eq!(s.train.steps, 500);
        assert_eq!(s.ctx.world.workspace.max.x, 0.4);
        assert_eq!(s.train.horizons.action, 2);
        assert_eq!(s.train.hidden, vec![64, 64]);
        assert!(!s.ctx.datagen.align_grasp);
        assert_eq!(s.ctx.world.dt, 1.0);
    }

    #[test]
    fn rejects_unknown_and_mistyped() {
        let mut s = Settings::default();
        assert!(s.set("motion.nope", "1").is_err());
        assert!(s.set("bogus.v_max", "1").is_err());
        assert!(s.set("motion", "1").is_err());
        assert!(s.set("train.steps", "many").is_err());
        assert!(s.set("world.workspace", "1").is_err());
        assert_eq!(s, Settings::default());
    }

    #[test]
    fn text_round_trip() {
        let mut s = Settings::default();
        s.apply_text("# comment\nmotion.u_max = 0.3\n\ntrain.lr=0.01 # trailing\n", "t").unwrap();
        assert_eq!(s.ctx.params.u_max, 0.3);
        assert_eq!(s.train.lr, 0.01);
        let mut back = Settings::default();
        back.apply_text(&s.to_text(), "banner").unwrap();
        assert_eq!(back, s);
        assert!(s.apply_text("novalue\n", "t").is_err());
    }
}
