#![allow(dead_code)]

use std::path::PathBuf;

use cbnorm::cli::descriptor::{set_from_desc, FunctionDesc, PointDesc, SpaceDesc};
use cbnorm::cli::ExperimentConfig;
use cbnorm::{Holo, Set, Space};
use serde_json::Value;

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn shipped_configs() -> Vec<(PathBuf, ExperimentConfig)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .expect("configs directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&p).unwrap()).unwrap();
            (p, cfg)
        })
        .collect()
}

fn walk(v: &Value, key: &str, out: &mut Vec<Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k == key {
                    match x {
                        Value::Array(xs) if key == "spaces" => out.extend(xs.iter().cloned()),
                        _ => out.push(x.clone()),
                    }
                }
                walk(x, key, out);
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| walk(x, key, out)),
        _ => {}
    }
}

/// Every top-level function of the shipped configs.
pub fn shipped_functions() -> Vec<(String, Holo)> {
    let mut out = Vec::new();
    for (path, cfg) in shipped_configs() {
        for key in ["function", "f", "g"] {
            if let Some(v) = cfg.params.get(key) {
                let d: FunctionDesc = serde_json::from_value(v.clone()).unwrap();
                let name = format!("{}:{key}", path.file_stem().unwrap().to_string_lossy());
                out.push((name, d.build().unwrap()));
            }
        }
    }
    out
}

/// Every space mentioned anywhere in the shipped configs, deduplicated.
pub fn shipped_spaces() -> Vec<Space> {
    let mut raw = Vec::new();
    for (_, cfg) in shipped_configs() {
        walk(&cfg.params, "space", &mut raw);
        walk(&cfg.params, "spaces", &mut raw);
    }
    let mut descs: Vec<SpaceDesc> = Vec::new();
    for v in raw {
        let d: SpaceDesc = serde_json::from_value(v).unwrap();
        if !descs.contains(&d) {
            descs.push(d);
        }
    }
    descs.iter().map(|d| d.build().unwrap()).collect()
}

/// Generator sets of the hull and separation configs.
pub fn shipped_sets() -> Vec<(String, Set)> {
    shipped_configs()
        .into_iter()
        .filter_map(|(path, cfg)| {
            let gens = cfg.params.get("generators")?;
            let space: SpaceDesc = serde_json::from_value(cfg.params["space"].clone()).unwrap();
            let gens: Vec<PointDesc> = serde_json::from_value(gens.clone()).unwrap();
            let space = space.build().unwrap();
            Some((path.file_stem().unwrap().to_string_lossy().into_owned(), set_from_desc(&space, &gens).unwrap()))
        })
        .collect()
}
