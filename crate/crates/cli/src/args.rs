//! Parsers for the compact argument syntaxes: dims `30x30x20`, rank
//! targets `2` or `2,1,1,1`, and grid specs.

use anyhow::{anyhow, bail, Context, Result};
use tubal_core::synth::{GridSpec, Task};
use tubal_core::{Dims, RankTarget};

pub fn parse_dims(s: &str) -> Result<Dims> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        bail!("dims must look like 30x30x20, got {s:?}");
    }
    let n: Vec<usize> = parts.iter().map(|p| p.trim().parse().with_context(|| format!("bad dimension {p:?}"))).collect::<Result<_>>()?;
    Ok(Dims::new(n[0], n[1], n[2]).validate()?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|p| p.trim().parse().map_err(|_| anyhow!("bad {what} {p:?}"))).collect()
}

/// A single number applies to every Fourier slice; a list gives one target
/// per slice.
pub fn parse_target(s: &str) -> Result<RankTarget> {
    let v: Vec<usize> = parse_list(s, "rank target")?;
    Ok(match v.as_slice() {
        [n] => RankTarget::Uniform(*n),
        _ => RankTarget::PerSlice(v),
    })
}

pub fn target_json(t: &RankTarget) -> serde_json::Value {
    match t {
        RankTarget::Uniform(n) => serde_json::json!(n),
        RankTarget::PerSlice(v) => serde_json::json!(v),
    }
}

/// Default desk-scale grids: completion on 30x30x20 and robust PCA on
/// 40x40x20.
pub fn default_grid(task: Task) -> GridSpec {
    match task {
        Task::Completion => GridSpec::new(task, (30, 30, 20), vec![1, 2, 4, 8, 12], vec![0.1, 0.3, 0.5, 0.7, 0.9]),
        Task::Rpca => GridSpec::new(task, (40, 40, 20), vec![1, 2, 4, 8], vec![0.05, 0.1, 0.2, 0.3]),
    }
}

/// Grid spec `dims=30x30x20;ranks=1,2;levels=0.5,0.9`. Keys may be
/// separated by `;` or whitespace; `rates` and `sparsities` are accepted for
/// `levels`. Missing keys keep the task's default grid.
pub fn parse_grid(s: &str, task: Task) -> Result<GridSpec> {
    let mut spec = default_grid(task);
    for item in s.split([';', ' ', '\n', '\t']).filter(|p| !p.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| anyhow!("grid item {item:?} is not key=value"))?;
        match key.trim() {
            "dims" => spec.dims = parse_dims(value)?,
            "ranks" => spec.ranks = parse_list(value, "rank")?,
            "levels" | "rates" | "sparsities" => spec.levels = parse_list(value, "level")?,
            other => bail!("unknown grid key {other:?} (expected dims, ranks, levels)"),
        }
    }
    Ok(spec)
}
