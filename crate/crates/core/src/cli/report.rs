use std::path::Path;

use serde_json::Value;

use super::ResultRecord;

pub const REPORT_HEADER: [&str; 7] = ["record", "command", "function", "lower", "upper", "gap", "levels"];

pub struct ReportOutput {
    pub csv: String,
    /// One message per record that could not be read.
    pub warnings: Vec<String>,
}

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn fmt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `L1=v1;L2=v2;…` from a level table, empty if the record has none.
fn levels(outputs: &Value) -> String {
    let Some(table) = outputs["level_table"].as_array() else {
        return String::new();
    };
    table
        .iter()
        .filter_map(|e| Some(format!("L{}={}", e["level"].as_u64()?, e["value"].as_f64()?)))
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV summary with one row per readable record; the gap is recomputed
/// from the bounds.
pub fn report<P: AsRef<Path>>(paths: &[P]) -> ReportOutput {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).expect("in-memory write");
    let mut warnings = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let rec = std::fs::read_to_string(p)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str::<ResultRecord>(&s).map_err(|e| e.to_string()));
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("skipping {}: {e}", p.display()));
                continue;
            }
        };
        let o = &rec.outputs;
        let lower = num(&o["lower"]).or_else(|| num(&o["lower_product"]));
        let upper = num(&o["upper"]).or_else(|| num(&o["bound"]));
        let gap = lower.zip(upper).map(|(l, u)| u - l);
        let function = o["function"].as_str().unwrap_or_default();
        w.write_record([
            p.display().to_string(),
            rec.command.name().to_string(),
            function.to_string(),
            fmt(lower),
            fmt(upper),
            fmt(gap),
            levels(o),
        ])
        .expect("in-memory write");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv");
    ReportOutput { csv, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{run, ExperimentConfig};

    #[test]
    fn empty_list_is_header_only() {
        let out = report::<&str>(&[]);
        assert_eq!(out.csv, "record,command,function,lower,upper,gap,levels\n");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn rows_and_recomputed_gap() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(
            r#"{"command":"sandwich","seed":1,"params":{"function":{"type":"moebius","a":0.5},"max_level":2,"budget":300}}"#,
        )
        .unwrap();
        let rec = run(&cfg).unwrap();
        let good = dir.path().join("a.json");
        std::fs::write(&good, rec.to_json()).unwrap();
        let bad = dir.path().join("b.json");
        std::fs::write(&bad, "{not json").unwrap();
        let out = report(&[good.clone(), bad, good]);
        assert_eq!(out.warnings.len(), 1);
        let mut r = csv::Reader::from_reader(out.csv.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        let (lo, up, gap): (f64, f64, f64) = (rows[0][3].parse().unwrap(), rows[0][4].parse().unwrap(), rows[0][5].parse().unwrap());
        assert!((gap - (up - lo)).abs() <= 1e-12);
        assert!(rows[0][6].starts_with("L1="));
    }
}
