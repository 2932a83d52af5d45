//! Known configuration keys, used to reject typos before deserialization.

use toml::Table;

use crate::error::CliError;

const SPECTRAL: &[&str] = &["coupling_gamma", "beta0", "omega_c", "omega_12", "spectral_exponent"];
const DECOHERENCE: &[&str] = &["regime", "dt", "n"];
const TARGET: &[&str] = &[
    "regime",
    "axis",
    "n_intermediates",
    "cycles_per_intermediate",
    "i_max",
    "dt",
    "hold_cycles",
    "fidelity_threshold",
    "interpolation",
    "arc",
    "initial_theta",
    "target_theta",
];
const FEEDBACK: &[&str] = &[
    "gamma",
    "alpha",
    "lambda",
    "eta",
    "delay",
    "phi",
    "dt",
    "master_dt",
    "sample_dt",
    "seed",
    "n_traj",
    "t_end",
    "initial_theta",
    "target_theta",
    "method",
    "with_feedback",
    "fidelity_threshold",
];

enum Node {
    Leaf,
    Section(&'static [&'static str]),
    Branch(&'static [(&'static str, Node)]),
}

const COMPOSITE: &[(&str, Node)] = &[("leg1", Node::Section(TARGET)), ("leg2", Node::Section(TARGET))];
const COMPARE: &[(&str, Node)] = &[
    ("initial_theta", Node::Leaf),
    ("target_theta", Node::Leaf),
    ("open_loop", Node::Section(TARGET)),
    ("feedback", Node::Section(FEEDBACK)),
];
const ROOT: &[(&str, Node)] = &[
    ("mode", Node::Leaf),
    ("spectral", Node::Section(SPECTRAL)),
    ("decoherence", Node::Section(DECOHERENCE)),
    ("target", Node::Section(TARGET)),
    ("composite", Node::Branch(COMPOSITE)),
    ("feedback", Node::Section(FEEDBACK)),
    ("compare", Node::Branch(COMPARE)),
];

/// Rejects any key not in the schema, suggesting the closest known key.
pub fn check_keys(table: &Table, source: &str) -> Result<(), CliError> {
    walk(table, ROOT, "", source)
}

fn walk(table: &Table, nodes: &[(&str, Node)], prefix: &str, source: &str) -> Result<(), CliError> {
    for (key, value) in table {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let Some((_, node)) = nodes.iter().find(|(k, _)| k == key) else {
            let names: Vec<&str> = nodes.iter().map(|(k, _)| *k).collect();
            return Err(unknown(&path, key, &names, source));
        };
        match node {
            Node::Leaf => {}
            Node::Section(keys) => {
                let sub = value.as_table().ok_or_else(|| CliError::Validation(format!("`{path}` must be a table")))?;
                for k in sub.keys() {
                    if !keys.contains(&k.as_str()) {
                        return Err(unknown(&format!("{path}.{k}"), k, keys, source));
                    }
                }
            }
            Node::Branch(children) => {
                let sub = value.as_table().ok_or_else(|| CliError::Validation(format!("`{path}` must be a table")))?;
                walk(sub, children, &path, source)?;
            }
        }
    }
    Ok(())
}

fn unknown(path: &str, key: &str, known: &[&str], source: &str) -> CliError {
    let suggestion = known
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string());
    CliError::UnknownKey { key: path.to_string(), line: find_line(source, key), suggestion }
}

/// 1-based line of the first `key =` assignment or `[...key]` header.
fn find_line(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|line| {
        let t = line.trim_start();
        let assigns = t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='));
        let header = t.starts_with('[') && t.trim_end().trim_end_matches(']').rsplit(['.', '[']).next() == Some(key);
        assigns || header
    })
    .map(|i| i + 1)
}
