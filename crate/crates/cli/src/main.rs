//! `veckg`: batch front end for viewpoint-aware event graphs.
//!
//! Exit codes: 0 on success, 1 when the graph is inconsistent or a request
//! is rejected by the engine, 2 on usage, configuration or parse errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use veckg_core::consistency::{check_graph, contradicts, fact_claim_lint, CascadePolicy};
use veckg_core::fusion::{query_with, QueryOptions, QueryPattern, Slot};
use veckg_core::hierarchy::{group_stance, Ballot, ConsensusConfig, ViewpointHierarchy, DEFAULT_THRESHOLD};
use veckg_core::ids::{EventId, PredicateId, ViewpointId};
use veckg_core::rdf_io::{self, parse_statement};
use veckg_core::store::{Graph, StoreError, Triple};
use veckg_core::taxonomy::Taxonomy;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "veckg", version, about = "Check, query and edit viewpoint-aware event graphs")]
struct Cli {
    /// Taxonomy config file.
    #[arg(long, global = true, env = "VECKG_TAXONOMY")]
    taxonomy: Option<PathBuf>,
    /// Viewpoint hierarchy config file.
    #[arg(long, global = true, env = "VECKG_HIERARCHY")]
    hierarchy: Option<PathBuf>,
    /// Graph file (`.vkg`).
    #[arg(long, global = true, env = "VECKG_GRAPH")]
    graph: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report per-viewpoint consistency.
    Check {
        /// Also list claims that contradict a fact. Never affects the exit code.
        #[arg(long)]
        lint_facts: bool,
    },
    /// Insert a fact, or a claim when a viewpoint is given.
    Insert {
        /// `"<s> <p> <o>"`
        #[arg(long)]
        triple: String,
        #[arg(long)]
        viewpoint: Option<String>,
        /// Remove contradicted claims below the viewpoint instead of failing.
        #[arg(long)]
        cascade: bool,
    },
    /// Remove a fact, or a claim when a viewpoint is given.
    Delete {
        #[arg(long)]
        triple: String,
        #[arg(long)]
        viewpoint: Option<String>,
    },
    /// Replace one statement by another in a single transaction.
    Update {
        #[arg(long)]
        old: String,
        #[arg(long)]
        old_viewpoint: Option<String>,
        #[arg(long)]
        new: String,
        #[arg(long)]
        new_viewpoint: Option<String>,
        #[arg(long)]
        cascade: bool,
    },
    /// Answer `"<s> <p> <o> @ <viewpoint>"`; `?name` marks a variable.
    Query {
        pattern: String,
        /// Match the predicate literally, ignoring refinements.
        #[arg(long)]
        exact: bool,
    },
    /// Group stance of a ballot file (`member valid|invalid|neutral` lines).
    Stance {
        #[arg(long)]
        ballot: PathBuf,
        /// Hierarchy node whose weights and threshold apply.
        #[arg(long)]
        node: Option<String>,
    },
    /// Write the canonical serialization.
    Materialize {
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show why two claims (`"<s> <p> <o> @ <viewpoint>"`) contradict.
    Explain { first: String, second: String },
    /// List the viewpoints at which a claim is valid.
    Viewpoints {
        #[arg(long)]
        claim: String,
    },
}

struct Workspace {
    graph: Graph,
    graph_path: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl Workspace {
    fn load(cli: &Cli) -> Result<Self> {
        let need = |p: &Option<PathBuf>, flag: &str| {
            p.clone().ok_or_else(|| anyhow!("missing --{flag}"))
        };
        let taxonomy_path = need(&cli.taxonomy, "taxonomy")?;
        let hierarchy_path = need(&cli.hierarchy, "hierarchy")?;
        let graph_path = need(&cli.graph, "graph")?;
        let taxonomy = Taxonomy::from_config_str(&read(&taxonomy_path)?)
            .with_context(|| format!("in {}", taxonomy_path.display()))?;
        let hierarchy = ViewpointHierarchy::from_config_str(&read(&hierarchy_path)?)
            .with_context(|| format!("in {}", hierarchy_path.display()))?;
        let graph = rdf_io::parse(&read(&graph_path)?, Arc::new(taxonomy), Arc::new(hierarchy))
            .with_context(|| format!("in {}", graph_path.display()))?;
        Ok(Self { graph, graph_path })
    }

    fn save(&self) -> Result<()> {
        let text = rdf_io::to_text(&self.graph, None)?;
        fs::write(&self.graph_path, text)
            .with_context(|| format!("cannot write {}", self.graph_path.display()))
    }
}

struct Output {
    json: bool,
    color: bool,
}

impl Output {
    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        if self.json {
            let mut value = value;
            value["schema_version"] = json!(SCHEMA_VERSION);
            say(&format!("{}\n", serde_json::to_string_pretty(&value).expect("json")));
        } else {
            say(&text());
        }
    }

    fn paint(&self, ok: bool, s: &str) -> String {
        match (self.color, ok) {
            (false, _) => s.to_owned(),
            (true, true) => format!("\x1b[32m{s}\x1b[0m"),
            (true, false) => format!("\x1b[31m{s}\x1b[0m"),
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

/// Splits `"... @ V"` into the statement and its viewpoint.
fn split_viewpoint(text: &str) -> (&str, Option<&str>) {
    match text.rsplit_once(" @ ") {
        Some((statement, v)) if !v.trim().contains(char::is_whitespace) => (statement, Some(v.trim())),
        _ => (text, None),
    }
}

fn triple_from(statement: &str, viewpoint: Option<&str>) -> Result<Triple> {
    let (s, p, o) = parse_statement(statement)?;
    Ok(Triple {
        subject: EventId::from(s),
        predicate: PredicateId::from(p),
        object: o,
        viewpoint: viewpoint.map(ViewpointId::from),
    })
}

fn claim_arg(text: &str) -> Result<Triple> {
    match split_viewpoint(text) {
        (statement, Some(v)) => triple_from(statement, Some(v)),
        _ => bail!("expected `<s> <p> <o> @ <viewpoint>`, got `{text}`"),
    }
}

fn existing(g: &Graph, t: Triple) -> Result<Triple> {
    if g.contains(&t) {
        Ok(t)
    } else {
        bail!("`{t}` is not in the graph")
    }
}

fn is_rejection(e: &StoreError) -> bool {
    matches!(
        e,
        StoreError::IncompatibleClaim(_)
            | StoreError::CascadeRequired(_)
            | StoreError::DanglingInverseRole { .. }
            | StoreError::NotPermissible { .. }
    )
}

fn reject(out: &Output, e: &StoreError) -> u8 {
    let mut value = json!({ "status": "rejected", "error": e.to_string() });
    match e {
        StoreError::IncompatibleClaim(evidence) => value["evidence"] = json!(evidence),
        StoreError::CascadeRequired(victims) => value["would_remove"] = json!(victims),
        _ => {}
    }
    out.emit(value, || {
        let mut text = format!("{}: {e}\n", out.paint(false, "rejected"));
        if let StoreError::CascadeRequired(victims) = e {
            for v in victims {
                text.push_str(&format!("  would remove {v}\n"));
            }
        }
        text
    });
    1
}

/// Applies a mutation, writes the graph back on success.
fn mutate(
    ws: &mut Workspace,
    out: &Output,
    done: &str,
    f: impl FnOnce(&mut Graph) -> Result<Vec<Triple>, StoreError>,
) -> Result<u8> {
    match f(&mut ws.graph) {
        Ok(cascaded) => {
            ws.save()?;
            out.emit(json!({ "status": done, "cascaded": cascaded }), || {
                let mut text = format!("{}\n", out.paint(true, done));
                for c in &cascaded {
                    text.push_str(&format!("  cascaded {c}\n"));
                }
                text
            });
            Ok(0)
        }
        Err(e) if is_rejection(&e) => Ok(reject(out, &e)),
        Err(e) => Err(e.into()),
    }
}

fn policy(cascade: bool) -> CascadePolicy {
    if cascade {
        CascadePolicy::DeleteConflicting
    } else {
        CascadePolicy::Reject
    }
}

fn query_pattern(text: &str, exact: bool) -> Result<QueryPattern> {
    let (statement, Some(v)) = split_viewpoint(text) else {
        bail!("expected `<s> <p> <o> @ <viewpoint>`, got `{text}`");
    };
    let (s, p, o) = parse_statement(statement)?;
    let var = |t: &str| t.strip_prefix('?').map(str::to_owned);
    let subject = var(&s).map_or_else(|| Slot::Const(EventId::from(s.as_str())), Slot::Var);
    let predicate = var(&p).map_or_else(|| Slot::Const(PredicateId::from(p.as_str())), Slot::Var);
    let object = match o.as_iri().and_then(var) {
        Some(name) => Slot::Var(name),
        None => Slot::Const(o),
    };
    let pattern = QueryPattern::new(subject, predicate, object, v);
    Ok(if exact { pattern.without_refinements() } else { pattern })
}

fn run(cli: Cli) -> Result<u8> {
    let out = Output {
        json: cli.json,
        color: std::env::var("VECKG_COLOR").is_ok_and(|v| v == "1"),
    };
    let mut ws = Workspace::load(&cli)?;
    match cli.command {
        Command::Check { lint_facts } => {
            let report = check_graph(&ws.graph);
            let lint = if lint_facts { fact_claim_lint(&ws.graph) } else { Vec::new() };
            if out.json && lint_facts {
                let mut value = serde_json::to_value(&report)?;
                value["fact_lint"] = serde_json::to_value(&lint)?;
                say(&format!("{}\n", serde_json::to_string_pretty(&value)?));
            } else if out.json {
                say(&format!("{}\n", report.to_json()));
            } else {
                say(&report.render_text(out.color));
                for e in &lint {
                    say(&format!("lint: {}\n", e.explanation));
                }
            }
            Ok(if report.consistent { 0 } else { 1 })
        }
        Command::Insert {
            triple,
            viewpoint,
            cascade,
        } => {
            let t = triple_from(&triple, viewpoint.as_deref())?;
            mutate(&mut ws, &out, "inserted", |g| {
                g.insert(t, policy(cascade)).map(|r| r.cascaded)
            })
        }
        Command::Delete { triple, viewpoint } => {
            let t = triple_from(&triple, viewpoint.as_deref())?;
            mutate(&mut ws, &out, "deleted", |g| g.delete(&t).map(|_| Vec::new()))
        }
        Command::Update {
            old,
            old_viewpoint,
            new,
            new_viewpoint,
            cascade,
        } => {
            let old = triple_from(&old, old_viewpoint.as_deref())?;
            let new = triple_from(&new, new_viewpoint.as_deref())?;
            mutate(&mut ws, &out, "updated", |g| {
                g.update(&old, new, policy(cascade)).map(|r| r.cascaded)
            })
        }
        Command::Query { pattern, exact } => {
            let q = query_pattern(&pattern, exact)?;
            let result = query_with(&ws.graph, &q, QueryOptions::default())?;
            let bindings = result.bindings(&q);
            let consistent = result.verdict.is_consistent();
            out.emit(
                json!({
                    "viewpoint": q.viewpoint,
                    "bindings": bindings,
                    "matched": result.matched,
                    "verdict": result.verdict,
                }),
                || {
                    let mut text = String::new();
                    for (row, t) in bindings.iter().zip(&result.matched) {
                        let vars: Vec<String> = row.iter().map(|(k, v)| format!("?{k}={v}")).collect();
                        text.push_str(&format!("{}\t{t}\n", vars.join(" ")));
                    }
                    let verdict = if consistent { "CONSISTENT" } else { "INCOMPATIBLE" };
                    text.push_str(&format!("{} match(es), {}\n", result.matched.len(), out.paint(consistent, verdict)));
                    text
                },
            );
            Ok(if consistent { 0 } else { 1 })
        }
        Command::Stance { ballot, node } => {
            let ballot = Ballot::parse(&read(&ballot)?)?;
            let h = ws.graph.hierarchy();
            let config = match &node {
                Some(n) => h.consensus_for(&ViewpointId::from(n.as_str()), ballot.members())?,
                None => ConsensusConfig::uniform(
                    ballot.members(),
                    h.configs().global_threshold.unwrap_or(DEFAULT_THRESHOLD),
                )?,
            };
            let phi = config.support(&ballot)?;
            let stance = group_stance(&ballot, &config)?;
            let label = format!("{stance:?}").to_uppercase();
            out.emit(
                json!({ "stance": label, "support": phi, "threshold": config.threshold() }),
                || format!("{label} (support {phi:.4}, threshold {})\n", config.threshold()),
            );
            Ok(0)
        }
        Command::Materialize { out: path } => {
            let text = match rdf_io::to_text(&ws.graph, None) {
                Ok(text) => text,
                Err(e @ rdf_io::RdfError::InconsistentGraph(_)) => {
                    eprintln!("error: {e}");
                    return Ok(1);
                }
                Err(e) => return Err(e.into()),
            };
            match path {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?
                }
                None => say(&text),
            }
            Ok(0)
        }
        Command::Explain { first, second } => {
            let a = existing(&ws.graph, claim_arg(&first)?)?;
            let b = existing(&ws.graph, claim_arg(&second)?)?;
            let evidence = contradicts(&a, &b, &ws.graph);
            let code = if evidence.is_some() { 1 } else { 0 };
            out.emit(
                json!({ "contradicts": evidence.is_some(), "evidence": evidence }),
                || match &evidence {
                    Some(e) => {
                        let at: Vec<&str> = e.viewpoints.iter().map(ViewpointId::as_str).collect();
                        format!("{}\n  conflicting at: {}\n", e.explanation, at.join(", "))
                    }
                    None => "no contradiction\n".to_owned(),
                },
            );
            Ok(code)
        }
        Command::Viewpoints { claim } => {
            let c = existing(&ws.graph, claim_arg(&claim)?)?;
            let v = c.viewpoint.as_ref().expect("claim");
            let set = ws.graph.hierarchy().validity_set(v)?;
            out.emit(json!({ "claim": c, "viewpoints": set }), || {
                let names: Vec<&str> = set.iter().map(ViewpointId::as_str).collect();
                format!("{}\n", names.join("\n"))
            });
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
