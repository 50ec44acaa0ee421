//! Deterministic text artifacts: CSV with 17 significant digits and
//! `\n` line endings, JSON with sorted keys, optional gnuplot script.

use std::fmt::Write as _;

/// 17 significant digits in scientific notation; parses back to the same
/// double. Non-finite values print as `NaN`, `inf` and `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(32 * self.header.len() * (self.rows.len() + 1));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Pretty JSON with a trailing newline. `serde_json` maps keep keys
/// sorted, so equal values render identically.
pub fn render_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Gnuplot script plotting columns `ys` (1-based) against column 1.
pub fn gnuplot_script(csv_path: &str, title: &str, header: &[String], ys: &[usize]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', "''"));
    let _ = writeln!(s, "set xlabel '{}'", header[0].replace('\'', "''"));
    let parts: Vec<String> = ys
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let file = if i == 0 {
                format!("'{}'", csv_path.replace('\'', "''"))
            } else {
                "''".to_string()
            };
            format!("{file} using 1:{c} with lines")
        })
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["E (a.u.)", "rho (1/a.u.)"]);
        t.push(vec![1.0, 0.5]);
        assert_eq!(t.render(), "E (a.u.),rho (1/a.u.)\n1.0000000000000000e0,5.0000000000000000e-1\n");
    }

    #[test]
    fn gnuplot_lines() {
        let header = vec!["E".to_string(), "Re S".to_string(), "Im S".to_string()];
        let s = gnuplot_script("out.csv", "scan", &header, &[2, 3]);
        assert!(s.contains("plot 'out.csv' using 1:2 with lines, \\\n     '' using 1:3 with lines"));
    }
}
