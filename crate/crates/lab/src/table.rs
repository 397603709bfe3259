//! Aligned text tables: one block per scheme and tolerance, rows by
//! decreasing `ε`, with the step ratio to the previous row in brackets.

use std::fmt::Write;

use crate::io::{Fit, TableRow};

/// `E` below this is correct to three decimal places.
pub const THREE_DIGITS: f64 = 5e-4;

pub fn render(rows: &[TableRow]) -> String {
    let mut sorted: Vec<&TableRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(b.sigma.total_cmp(&a.sigma))
            .then(b.eps.total_cmp(&a.eps))
            .then(a.n.cmp(&b.n))
    });
    let header: [String; 9] = ["scheme", "eps", "sigma", "n", "M", "", "CG", "T", "E"].map(String::from);
    let mut lines: Vec<[String; 9]> = vec![header];
    let mut prev: Option<&TableRow> = None;
    for r in sorted {
        let ratio = match prev {
            Some(p) if p.scheme == r.scheme && p.sigma == r.sigma && p.m > 0 => {
                format!("({:.2})", r.m as f64 / p.m as f64)
            }
            _ => String::new(),
        };
        let e = match r.e {
            Some(e) if e < THREE_DIGITS => format!("{e:.2e}*"),
            Some(e) => format!("{e:.2e}"),
            None => "-".to_string(),
        };
        lines.push([
            r.scheme.to_string(),
            r.eps.to_string(),
            format!("{:.0e}", r.sigma),
            r.n.to_string(),
            r.m.to_string(),
            ratio,
            r.cg.to_string(),
            format!("{:.6}", r.t),
            e,
        ]);
        prev = Some(r);
    }
    let mut widths = [0usize; 9];
    for l in &lines {
        for (w, s) in widths.iter_mut().zip(l) {
            *w = (*w).max(s.chars().count());
        }
    }
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        // A blank line separates scheme and tolerance blocks.
        if i > 1 && (lines[i - 1][0] != l[0] || lines[i - 1][2] != l[2]) {
            out.push('\n');
        }
        let mut line = format!("{:<w$}", l[0], w = widths[0]);
        for (c, (s, w)) in l.iter().zip(widths).enumerate().skip(1) {
            let sep = if c == 5 { " " } else { "  " };
            if c == 5 || c == 8 {
                line.push_str(&format!("{sep}{s:<w$}"));
            } else {
                line.push_str(&format!("{sep}{s:>w$}"));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn render_fits(fits: &[Fit]) -> String {
    let mut out = String::new();
    for f in fits {
        let _ = writeln!(
            out,
            "{:<7} M ~ {}^{:+.3}  ({} points, {} = {})",
            f.scheme.to_string(),
            f.axis,
            f.exponent,
            f.points,
            if f.axis == "eps" { "sigma" } else { "eps" },
            f.fixed
        );
    }
    out
}
