use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qheat_core::heat::HeatDistribution;
use qheat_core::validation::Check;

use crate::CliError;

/// 17 significant digits: round-trips f64 exactly through text.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// CSV with a single header line naming the columns; all floats at 17
/// significant digits.
pub fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Atom-list JSON: {"omega_drive", "omega_rabi", "t", "atoms": [{n, m, w}]},
/// atoms sorted by (n, m).
pub fn distribution_json(dist: &HeatDistribution) -> String {
    let mut atoms = dist.atoms.clone();
    atoms.sort_by_key(|a| (a.n, a.m));
    let mut s = String::with_capacity(64 * (atoms.len() + 4));
    s.push_str("{\n");
    let _ = writeln!(s, "  \"omega_drive\": {},", fmt_f(dist.omega_drive));
    let _ = writeln!(s, "  \"omega_rabi\": {},", fmt_f(dist.omega_r));
    let _ = writeln!(s, "  \"t\": {},", fmt_f(dist.t));
    s.push_str("  \"atoms\": [\n");
    for (i, a) in atoms.iter().enumerate() {
        let sep = if i + 1 == atoms.len() { "" } else { "," };
        let _ = writeln!(
            s,
            "    {{\"n\": {}, \"m\": {}, \"w\": {}}}{sep}",
            a.n,
            a.m,
            fmt_f(a.w)
        );
    }
    s.push_str("  ]\n}\n");
    s
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Validation report: seed, per-check outcomes sorted by id, overall verdict.
pub fn report_json(seed: u64, checks: &[Check]) -> String {
    let passed = checks.iter().all(|c| c.passed);
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(s, "  \"seed\": {seed},");
    let _ = writeln!(s, "  \"passed\": {passed},");
    s.push_str("  \"checks\": [\n");
    for (i, c) in checks.iter().enumerate() {
        let sep = if i + 1 == checks.len() { "" } else { "," };
        let _ = writeln!(
            s,
            "    {{\"id\": {}, \"name\": \"{}\", \"passed\": {}, \"detail\": \"{}\"}}{sep}",
            c.id,
            json_escape(c.name),
            c.passed,
            json_escape(&c.detail)
        );
    }
    s.push_str("  ]\n}\n");
    s
}
