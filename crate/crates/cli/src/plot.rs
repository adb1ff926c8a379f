//! Generates a self-contained matplotlib script for recorded trajectories.
//! No rendering happens here; the artifact stays dependency-free and the
//! script is the deliverable.

use std::path::{Path, PathBuf};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;

struct RecordInfo {
    label: String,
    path: PathBuf,
    switches: usize,
}

fn fail(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_CONFIG
}

/// Validates a recorded CSV and counts its branch switches.
fn inspect(path: &Path) -> Result<RecordInfo, String> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|err| format!("{}: {err}", path.display()))?;
    let headers = reader
        .headers()
        .map_err(|err| format!("{}: {err}", path.display()))?
        .clone();
    for required in ["t", "e1", "u1", "theta_tilde1", "P", "V_L", "branch", "switching_flag"] {
        if !headers.iter().any(|h| h == required) {
            return Err(format!("{}: missing column `{required}`", path.display()));
        }
    }
    let flag_index = headers.iter().position(|h| h == "switching_flag").unwrap();
    let mut switches = 0usize;
    let mut rows = 0usize;
    for row in reader.records() {
        let row = row.map_err(|err| format!("{}: {err}", path.display()))?;
        let flag: f64 = row
            .get(flag_index)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| format!("{}: malformed switching_flag", path.display()))?;
        if flag > 0.5 {
            switches += 1;
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(format!("{}: empty record", path.display()));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "record".to_string());
    Ok(RecordInfo { label, path: path.to_path_buf(), switches })
}

pub fn cmd_plot(records: &[PathBuf], out: Option<&Path>) -> u8 {
    let mut infos = Vec::new();
    for path in records {
        match inspect(path) {
            Ok(info) => infos.push(info),
            Err(message) => return fail(message),
        }
    }

    let script_path = match out {
        Some(path) => path.to_path_buf(),
        None => {
            let first = &infos[0];
            let name = if infos.len() == 1 {
                format!("plot_{}.py", first.label)
            } else {
                "plot_compare.py".to_string()
            };
            first.path.with_file_name(name)
        }
    };
    let image_path = script_path.with_extension("png");
    let script = render_script(&infos, &image_path);
    if let Err(err) = std::fs::write(&script_path, script) {
        return fail(format!("{}: {err}", script_path.display()));
    }
    println!("wrote {}", script_path.display());
    EXIT_OK
}

fn render_script(infos: &[RecordInfo], image_path: &Path) -> String {
    let mut records_block = String::new();
    for info in infos {
        records_block.push_str(&format!(
            "    ({:?}, {:?}),\n",
            info.label,
            info.path.to_string_lossy()
        ));
    }
    let any_switches = infos.iter().any(|info| info.switches > 0);

    let mut script = format!(
        r#"#!/usr/bin/env python3
"""Six-panel trajectory plot: tracking error, estimate error, control
input, integral certificate, Lyapunov value, and the projection branch."""
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

RECORDS = [
{records_block}]


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SystemExit(f"{{path}}: empty record")
    return {{name: [float(row[name]) for row in rows] for name in rows[0]}}


def vector_norm(data, prefix):
    cols = []
    index = 1
    while f"{{prefix}}{{index}}" in data:
        cols.append(data[f"{{prefix}}{{index}}"])
        index += 1
    return [sum(v * v for v in vs) ** 0.5 for vs in zip(*cols)]


fig, axes = plt.subplots(3, 2, figsize=(12, 9), sharex=True)
for label, path in RECORDS:
    data = load(path)
    t = data["t"]
    axes[0][0].plot(t, vector_norm(data, "e"), label=label)
    axes[0][1].plot(t, vector_norm(data, "theta_tilde"), label=label)
    axes[1][0].plot(t, vector_norm(data, "u"), label=label)
    axes[1][1].plot(t, data["P"], label=label)
    axes[2][0].plot(t, data["V_L"], label=label)
    axes[2][1].step(t, data["branch"], where="post", label=label)

axes[0][0].set_ylabel("||e||")
axes[0][1].set_ylabel("||theta_tilde||")
axes[1][0].set_ylabel("||u||")
axes[1][1].set_ylabel("P")
axes[2][0].set_ylabel("V_L")
axes[2][1].set_ylabel("branch (0 interior, 1 boundary)")
axes[2][0].set_xlabel("t [s]")
axes[2][1].set_xlabel("t [s]")
for row in axes:
    for ax in row:
        ax.grid(True, alpha=0.3)
axes[0][0].legend(loc="best")
"#
    );

    if any_switches {
        script.push_str(
            r#"
# branch-switch markers
for label, path in RECORDS:
    data = load(path)
    switch_times = [
        t for t, flag in zip(data["t"], data["switching_flag"]) if flag > 0.5
    ]
    for t_switch in switch_times:
        axes[2][1].axvline(t_switch, color="crimson", alpha=0.25, linewidth=0.6)
"#,
        );
    }

    script.push_str(&format!(
        r#"
fig.tight_layout()
fig.savefig({image:?}, dpi=150)
print("wrote", {image:?})
"#,
        image = image_path.to_string_lossy()
    ));
    script
}
