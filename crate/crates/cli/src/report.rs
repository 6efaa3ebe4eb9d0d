//! CSV report rows and the JSON summary. Column order is fixed:
//! `check,i,j,n,point,residual,scale,tolerance,pass`. All numbers print
//! with 17 significant digits so reports are byte-reproducible.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Row {
    pub check: &'static str,
    pub i: usize,
    pub j: usize,
    pub n: i64,
    pub point: usize,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Row {
    pub fn new(
        check: &'static str,
        i: usize,
        j: usize,
        n: i64,
        point: usize,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Row {
            check,
            i,
            j,
            n,
            point,
            residual,
            scale: 1.0,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, rows: &[Row]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "check,i,j,n,point,residual,scale,tolerance,pass")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.check,
            r.i,
            r.j,
            r.n,
            r.point,
            fmt17(r.residual),
            fmt17(r.scale),
            fmt17(r.tolerance),
            r.pass
        )?;
    }
    out.flush()
}

pub fn write_summary(path: &Path, rows: &[Row], error: Option<&str>) -> std::io::Result<()> {
    let mut per_check: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for r in rows {
        let e = per_check.entry(r.check).or_insert((0, 0, 0.0));
        e.0 += 1;
        if r.pass {
            e.1 += 1;
        }
        e.2 = e.2.max(r.residual);
    }
    let checks: BTreeMap<String, serde_json::Value> = per_check
        .iter()
        .map(|(name, (total, passed, max_res))| {
            (
                name.to_string(),
                serde_json::json!({
                    "rows": total,
                    "passed": passed,
                    "max_residual": format!("{max_res:.16e}"),
                }),
            )
        })
        .collect();
    let total = rows.len();
    let passed = rows.iter().filter(|r| r.pass).count();
    let summary = serde_json::json!({
        "total_rows": total,
        "passed": passed,
        "failed": total - passed,
        "all_pass": passed == total && error.is_none(),
        "error": error,
        "checks": checks,
    });
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![
            Row::new("seed", 1, 2, 0, 0, 0.0, 0.0),
            Row::new("toda", 1, 2, -1, 3, 1.25e-9, 1e-6),
        ];
        let dir = std::env::temp_dir().join("gtoda_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("a.csv");
        let p2 = dir.join("b.csv");
        write_csv(&p1, &rows).unwrap();
        write_csv(&p2, &rows).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
        let text = std::fs::read_to_string(&p1).unwrap();
        assert!(text.starts_with("check,i,j,n,point,residual,scale,tolerance,pass\n"));
        assert!(text.contains("1.2500000000000000e-9"));
    }
}
