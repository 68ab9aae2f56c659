//! Deterministic text output: CSV sweeps, key=value metadata and recipes.
//!
//! Numbers are printed with 12 significant digits in scientific notation so
//! identical configurations produce byte-identical files; every format here
//! reads back its own output.

/// 12 significant digits; `nan`/`inf` spelled out.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.11e}")
    }
}

pub const CSV_HEADER: &str = "omega_over_gamma_m,R_m,n_add,S_out,sensitivity_N_per_sqrtHz,snr";

/// One sweep row; undefined entries are carried as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub omega_over_gamma_m: f64,
    pub r_m: f64,
    pub n_add: f64,
    pub s_out: f64,
    pub sensitivity: f64,
    pub snr: f64,
}

pub fn write_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&fmt12(r.omega_over_gamma_m));
        for v in [r.r_m, r.n_add, r.s_out, r.sensitivity, r.snr] {
            out.push(',');
            out.push_str(&fmt12(v));
        }
        out.push('\n');
    }
    out
}

pub fn read_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(format!("unexpected header `{h}`")),
        None => return Err("empty file".to_string()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(format!(
                "row {}: expected 6 columns, got {}",
                i + 2,
                cells.len()
            ));
        }
        let parse = |s: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .map_err(|_| format!("row {}: bad number `{s}`", i + 2))
        };
        rows.push(CsvRow {
            omega_over_gamma_m: parse(cells[0])?,
            r_m: parse(cells[1])?,
            n_add: parse(cells[2])?,
            s_out: parse(cells[3])?,
            sensitivity: parse(cells[4])?,
            snr: parse(cells[5])?,
        });
    }
    Ok(rows)
}

/// Writes `key = value` lines.
pub fn write_kv(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

pub fn read_kv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            line.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Looks up a key in `read_kv` output.
pub fn kv_get<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}
