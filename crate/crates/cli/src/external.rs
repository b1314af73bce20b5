//! Reader for particle CSVs exported by external SPH tools. Columns are
//! matched by header name; the separator is `;` when the header contains
//! one, `,` otherwise.

use std::path::Path;

use chad_field::{Particle, ParticleSnapshot, SnapshotError};

const ID: &[&str] = &["id", "idp"];
const AXES: [&[&str]; 3] = [&["x", "pos.x", "posx"], &["y", "pos.y", "posy"], &["z", "pos.z", "posz"]];
const VEL: [&[&str]; 3] = [&["vx", "vel.x", "velx"], &["vy", "vel.y", "vely"], &["vz", "vel.z", "velz"]];
const RHO: &[&str] = &["rho", "rhop", "density", "dens"];

/// Lower-case header name with any bracketed unit removed.
fn normalize(h: &str) -> String {
    h.split('[').next().unwrap_or("").trim().to_ascii_lowercase()
}

fn column(headers: &[String], names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.contains(&h.as_str()))
}

/// Parse an external CSV into a snapshot at `time`. Position and id columns
/// are required; missing velocity or density columns read as zero.
pub fn read_external(path: &Path, time: f64) -> Result<ParticleSnapshot, SnapshotError> {
    let text = std::fs::read_to_string(path)?;
    let header_line = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .ok_or(SnapshotError::Empty)?;
    let first = text.lines().nth(header_line).unwrap_or("");
    let delimiter = if first.contains(';') { b';' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |line: usize, msg: String| SnapshotError::Parse { line, msg };
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(header_line + 1, e.to_string()))?
        .iter()
        .map(normalize)
        .collect();
    let id_col = column(&headers, ID).ok_or_else(|| parse_err(header_line + 1, "no id column".into()))?;
    let mut pos_cols = [0; 3];
    for (k, names) in AXES.iter().enumerate() {
        pos_cols[k] = column(&headers, names)
            .ok_or_else(|| parse_err(header_line + 1, format!("no `{}` column", names[0])))?;
    }
    let vel_cols = VEL.map(|names| column(&headers, names));
    let rho_col = column(&headers, RHO);

    let mut particles = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |c: usize| record.get(c).unwrap_or("");
        let num = |c: usize| -> Result<f64, SnapshotError> {
            field(c)
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("column `{}`: {e}", headers[c])))
        };
        let id = field(id_col)
            .parse::<u64>()
            .map_err(|e| parse_err(line, format!("id `{}`: {e}", field(id_col))))?;
        let mut position = [0.0; 3];
        for k in 0..3 {
            position[k] = num(pos_cols[k])?;
        }
        let mut velocity = [0.0; 3];
        for k in 0..3 {
            if let Some(c) = vel_cols[k] {
                velocity[k] = num(c)?;
            }
        }
        let density = rho_col.map(num).transpose()?.unwrap_or(0.0);
        particles.push(Particle {
            id,
            position,
            velocity,
            density,
        });
    }
    ParticleSnapshot::new(time, particles)
}
