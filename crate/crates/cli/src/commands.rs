use crate::{plot, Global};
use ciarlet::analysis::{degrees, degrees_with_cap, trace_spaces_with};
use ciarlet::cells::entity_name;
use ciarlet::numfmt::format_sig;
use ciarlet::verify::{verify_batch, VerifyJob, DEFAULT_RANK_TOLERANCE};
use ciarlet::{CiarletElement, ElementSpec, EntityRef, Execution, FunctionSet, SpanTestConfig};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Any failure that ends the run with exit code 2.
pub type CliResult<T> = Result<T, String>;

const DIGITS: usize = 15;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_vertices(json: Option<&str>) -> CliResult<Option<Vec<Vec<f64>>>> {
    json.map(|s| serde_json::from_str(s).map_err(|e| format!("invalid vertex list: {e}")))
        .transpose()
}

fn build(spec: &str, vertices: Option<&str>) -> CliResult<(ElementSpec, CiarletElement)> {
    let spec: ElementSpec = spec.parse().map_err(err)?;
    let el = spec.build_on(parse_vertices(vertices)?).map_err(err)?;
    Ok((spec, el))
}

fn span_config(g: &Global) -> CliResult<SpanTestConfig> {
    let mut cfg = SpanTestConfig {
        points_per_direction: g.lattice,
        ..SpanTestConfig::default()
    };
    if let Some(t) = g.tolerance {
        cfg = cfg.with_tolerance(t);
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

fn emit<T: Serialize>(g: &Global, value: &T) -> CliResult<()> {
    let text = if g.json {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    };
    write_stdout(&(text.map_err(err)? + "\n"))
}

/// Writes to standard output; a closed pipe is not an error.
fn write_stdout(text: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(err(e)),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct Info {
    spec: String,
    family: String,
    cell: String,
    degree: usize,
    variant: Option<String>,
    dofs: usize,
    /// DOF count summed over the entities of each dimension.
    dofs_per_dimension: Vec<usize>,
    /// DOF count on each entity, keyed by entity type.
    entity_dofs: Vec<EntityDofs>,
    value_shape: Vec<usize>,
    map: String,
    superdegree: usize,
}

#[derive(Serialize)]
struct EntityDofs {
    entity: String,
    dim: usize,
    counts: Vec<usize>,
}

pub fn info(g: &Global, spec: &str) -> CliResult<u8> {
    let (spec, el) = build(spec, g.cell_vertices.as_deref())?;
    let tdim = el.cell().tdim();
    let entity_dofs: Vec<EntityDofs> = el
        .entity_dofs()
        .iter()
        .enumerate()
        .map(|(d, per)| -> CliResult<EntityDofs> {
            Ok(EntityDofs {
            entity: if d == tdim {
                "interior".to_string()
            } else {
                entity_name(tdim, tdim - d).map(|n| n.by_dim.to_string()).map_err(err)?
            },
            dim: d,
            counts: per.iter().map(Vec::len).collect(),
            })
        })
        .collect::<CliResult<_>>()?;
    let report = Info {
        spec: spec.to_string(),
        family: spec.family.name().to_string(),
        cell: spec.cell.name().to_string(),
        degree: spec.degree,
        variant: el.variant().map(str::to_string),
        dofs: el.dim(),
        dofs_per_dimension: entity_dofs.iter().map(|e| e.counts.iter().sum()).collect(),
        entity_dofs,
        value_shape: el.value_shape(),
        map: el.map_kind().name().to_string(),
        superdegree: el.superdegree(),
    };
    emit(g, &report)?;
    Ok(0)
}

fn read_points(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{}:{}: {e}", path.display(), n + 1))?;
        out.push(p);
    }
    Ok(out)
}

pub fn tabulate(g: &Global, spec: &str, points: Option<&Path>) -> CliResult<u8> {
    let (_, el) = build(spec, g.cell_vertices.as_deref())?;
    let cell = el.cell();
    let pts = match points {
        Some(path) => read_points(path)?,
        None => cell.lattice_points(g.lattice.unwrap_or(el.superdegree() + 1).max(2), true),
    };
    if pts.is_empty() {
        return Err("no points to tabulate".into());
    }
    for p in &pts {
        if p.len() != cell.tdim() || !cell.contains(p, 1e-12) {
            return Err(format!("point {p:?} is not in the {} cell", cell.kind()));
        }
    }
    let t = el.tabulate_with(&pts, Execution::Parallel).map_err(err)?;
    let mut out = String::new();
    let mut header: Vec<String> = ["x", "y", "z"][..cell.tdim()].iter().map(|s| s.to_string()).collect();
    for f in 0..t.nfunctions {
        for c in 0..t.value_size {
            header.push(format!("dof{f}_c{c}"));
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, p) in pts.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|&v| format_sig(v, DIGITS)).collect();
        for f in 0..t.nfunctions {
            row.extend(t.value(i, f).iter().map(|&v| format_sig(v, DIGITS)));
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    write_stdout(&out)?;
    Ok(0)
}

pub fn verify(g: &Global, a: &str, b: &str, a_vertices: Option<&str>) -> CliResult<u8> {
    let job = VerifyJob {
        a: a.parse().map_err(err)?,
        b: b.parse().map_err(err)?,
        a_vertices: parse_vertices(a_vertices)?,
        b_vertices: parse_vertices(g.cell_vertices.as_deref())?,
        config: span_config(g)?,
    };
    let report = job.run().map_err(err)?;
    emit(g, &report)?;
    Ok(if report.result { 0 } else { 1 })
}

#[derive(Serialize)]
struct DegreeOutput {
    spec: String,
    #[serde(flatten)]
    report: ciarlet::analysis::DegreeReport,
}

pub fn degree(g: &Global, spec: &str, k_cap: Option<usize>) -> CliResult<u8> {
    let (_, el) = build(spec, g.cell_vertices.as_deref())?;
    let report = match k_cap {
        Some(k) => degrees_with_cap(&el, k),
        None => degrees(&el),
    }
    .map_err(err)?;
    emit(
        g,
        &DegreeOutput {
            spec: el.spec_string(),
            report,
        },
    )?;
    Ok(0)
}

fn parse_entity(s: &str) -> CliResult<EntityRef> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [d, i] => {
            let d = d.parse().map_err(|_| format!("bad entity dimension in {s:?}"))?;
            let i = i.parse().map_err(|_| format!("bad entity index in {s:?}"))?;
            Ok(EntityRef::new(d, i))
        }
        _ => Err(format!("entity must be `dim,index`, got {s:?}")),
    }
}

#[derive(Serialize)]
struct TraceOutput {
    spec: String,
    #[serde(flatten)]
    summary: ciarlet::analysis::TraceSummary,
}

pub fn trace(g: &Global, spec: &str, entity: &str) -> CliResult<u8> {
    let (_, el) = build(spec, g.cell_vertices.as_deref())?;
    let e = parse_entity(entity)?;
    let tol = g.tolerance.unwrap_or(DEFAULT_RANK_TOLERANCE);
    let spaces = trace_spaces_with(&el, e, tol).map_err(err)?;
    emit(
        g,
        &TraceOutput {
            spec: el.spec_string(),
            summary: spaces.summary().map_err(err)?,
        },
    )?;
    Ok(0)
}

/// One job as written in a job file; a missing `config` falls back to the global flags.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JobEntry {
    a: ElementSpec,
    b: ElementSpec,
    #[serde(default)]
    a_vertices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    b_vertices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    config: Option<SpanTestConfig>,
}

pub fn batch(g: &Global, path: &Path, sequential: bool) -> CliResult<u8> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries: Vec<JobEntry> = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if entries.is_empty() {
        return Err("job file contains no jobs".into());
    }
    let global = span_config(g)?;
    let jobs: Vec<VerifyJob> = entries
        .into_iter()
        .map(|j| VerifyJob {
            a: j.a,
            b: j.b,
            a_vertices: j.a_vertices,
            b_vertices: j.b_vertices,
            config: j.config.unwrap_or(global),
        })
        .collect();
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut reports = Vec::with_capacity(jobs.len());
    for (i, r) in verify_batch(&jobs, exec).into_iter().enumerate() {
        reports.push(r.map_err(|e| format!("job {i}: {e}"))?);
    }
    emit(g, &reports)?;
    Ok(if reports.iter().all(|r| r.result) { 0 } else { 1 })
}

pub fn plot(g: &Global, spec: &str, dof: usize, component: usize, output: &Path) -> CliResult<u8> {
    let (_, el) = build(spec, g.cell_vertices.as_deref())?;
    if dof >= el.dim() {
        return Err(format!("dof {dof} out of range: the element has {} DOFs", el.dim()));
    }
    if component >= el.value_size() {
        return Err(format!("component {component} out of range: values have {} components", el.value_size()));
    }
    let svg = plot::render(&el, dof, component, g.lattice)?;
    std::fs::write(output, svg).map_err(|e| format!("{}: {e}", output.display()))?;
    Ok(0)
}
