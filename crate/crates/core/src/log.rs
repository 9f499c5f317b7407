//! Line-oriented optimizer log.
//!
//! ```text
//! # comment
//! JOVIS 1 TRACE <query_id>
//! SQL <json string>
//! PARAMS <one-line JSON cost parameters>
//! JOVIS 1 RUN <label> KIND <dp|geqo>
//! BASE ordinal=<int> alias=<name> relation=<name> [cte]
//! WARN <json string>
//! DP LEVEL <k>
//! DP REL relids=<i,j,...> rows=<float>
//! DP PATH id=<int> type=<name> startup=<float> total=<float> rows=<float> [outer=<int> inner=<int>] [chosen]
//! DP CHEAPEST relids=<i,j,...> total=<id> startup=<id>
//! GEQO PARAMS pool=<int> gens=<int> bias=<float> seed=<int>
//! GEQO GEN index=<int> [offspring=<int> p1=<int> p2=<int> fails=<int>]
//! GEQO GENE idx=<int> seq=<i,j,...> cost=<float>
//! PLAN <one-line JSON plan tree>
//! END RUN
//! ```
//!
//! Floats carry exactly six decimals. Names that are not plain words are
//! written as JSON strings. The header lines before the first run are
//! optional. A gene's parents and failure count are not repeated on every
//! `GENE` line; they follow from the `GEN` header, since each generation's
//! pool is the previous pool with the offspring inserted and the worst gene
//! removed.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::cost::CostParams;
use crate::dp::{DpTrace, PathNode, RelOptSet};
use crate::fixed::Fixed6;
use crate::geqo::{Gene, Generation, GeqoTrace};
use crate::trace::{
    plan_to_json_line, OptimizationTrace, PathType, PlanTree, PlannerRun, RelationRef, RunKind,
    TraceError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("log describes an invalid trace: {0}")]
    Invalid(#[from] TraceError),
}

/// Raw log text split into lines; line `i` of the file is `lines[i - 1]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogDocument {
    pub lines: Vec<String>,
}

impl LogDocument {
    pub fn from_text(text: &str) -> Self {
        LogDocument {
            lines: text
                .lines()
                .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
                .collect(),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_text(&String::from_utf8_lossy(bytes))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

fn is_word(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.-$:".contains(c))
}

fn name_token(s: &str) -> String {
    if is_word(s) {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("string serialization is infallible")
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the canonical log for a trace.
pub fn emit_optimizer_log(trace: &OptimizationTrace) -> LogDocument {
    let mut lines = vec![
        format!("JOVIS 1 TRACE {}", name_token(&trace.query_id)),
        format!("SQL {}", json_string(&trace.sql)),
        format!(
            "PARAMS {}",
            serde_json::to_string(&trace.params).expect("params serialization is infallible")
        ),
    ];
    for run in &trace.runs {
        emit_run(run, &mut lines);
    }
    LogDocument { lines }
}

fn emit_run(run: &PlannerRun, lines: &mut Vec<String>) {
    lines.push(format!(
        "JOVIS 1 RUN {} KIND {}",
        name_token(&run.label),
        run.kind.name()
    ));
    for rel in &run.relations {
        lines.push(format!(
            "BASE ordinal={} alias={} relation={}{}",
            rel.ordinal,
            name_token(&rel.alias),
            name_token(&rel.relation),
            if rel.cte { " cte" } else { "" }
        ));
    }
    for warning in &run.warnings {
        lines.push(format!("WARN {}", json_string(warning)));
    }
    if let Some(dp) = &run.dp {
        for (i, level) in dp.levels.iter().enumerate() {
            lines.push(format!("DP LEVEL {}", i + 1));
            for set in level {
                emit_set(set, lines);
            }
        }
    }
    if let Some(geqo) = &run.geqo {
        lines.push(format!(
            "GEQO PARAMS pool={} gens={} bias={} seed={}",
            geqo.pool_size,
            geqo.generation_count,
            Fixed6::from_f64(geqo.bias),
            geqo.seed
        ));
        for generation in &geqo.generations {
            let mut header = format!("GEQO GEN index={}", generation.index);
            if let Some(o) = generation.offspring_index {
                let gene = &generation.pool[o];
                let [p1, p2] = gene.parents.unwrap_or([0, 0]);
                let _ = write!(
                    header,
                    " offspring={o} p1={p1} p2={p2} fails={}",
                    gene.edge_failures
                );
            }
            lines.push(header);
            for (i, gene) in generation.pool.iter().enumerate() {
                lines.push(format!(
                    "GEQO GENE idx={i} seq={} cost={}",
                    join_ids(&gene.sequence),
                    gene.cost
                ));
            }
        }
    }
    lines.push(format!("PLAN {}", plan_to_json_line(&run.plan)));
    lines.push("END RUN".to_string());
}

fn emit_set(set: &RelOptSet, lines: &mut Vec<String>) {
    lines.push(format!(
        "DP REL relids={} rows={}",
        join_ids(&set.relids),
        set.rows
    ));
    for path in &set.paths {
        let mut line = format!(
            "DP PATH id={} type={} startup={} total={} rows={}",
            path.id, path.path_type, path.startup, path.total, path.rows
        );
        if let (Some(outer), Some(inner)) = (path.outer, path.inner) {
            let _ = write!(line, " outer={outer} inner={inner}");
        }
        if path.chosen {
            line.push_str(" chosen");
        }
        lines.push(line);
    }
    lines.push(format!(
        "DP CHEAPEST relids={} total={} startup={}",
        join_ids(&set.relids),
        set.cheapest_total,
        set.cheapest_startup
    ));
}

/// Splits on spaces, keeping JSON strings (which may contain spaces)
/// inside a single token.
fn tokens(s: &str) -> Result<Vec<&str>, String> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b' ' {
            i += 1;
            continue;
        }
        let start = i;
        let mut quoted = false;
        while i < bytes.len() {
            match (quoted, bytes[i]) {
                (true, b'\\') => i += 1,
                (true, b'"') => quoted = false,
                (false, b'"') => quoted = true,
                (false, b' ') => break,
                _ => {}
            }
            i += 1;
        }
        if quoted {
            return Err("unterminated string".into());
        }
        let end = i.min(bytes.len());
        out.push(s.get(start..end).ok_or("invalid text")?);
    }
    Ok(out)
}

fn decode_name(token: &str) -> Result<String, String> {
    if token.starts_with('"') {
        serde_json::from_str(token).map_err(|e| format!("bad quoted name {token}: {e}"))
    } else if is_word(token) {
        Ok(token.to_string())
    } else {
        Err(format!("bad name `{token}`"))
    }
}

/// `key=value` fields and bare flags of one record.
struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
    flags: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    fn parse(tokens: &[&'a str], allowed: &[&str], allowed_flags: &[&str]) -> Result<Self, String> {
        let mut fields = Fields {
            pairs: Vec::new(),
            flags: Vec::new(),
        };
        for token in tokens {
            match token.split_once('=') {
                Some((key, value)) => {
                    if !allowed.contains(&key) {
                        return Err(format!("unexpected field `{key}`"));
                    }
                    if fields.pairs.iter().any(|(k, _)| *k == key) {
                        return Err(format!("field `{key}` given twice"));
                    }
                    fields.pairs.push((key, value));
                }
                None if allowed_flags.contains(token) && !fields.flags.contains(token) => {
                    fields.flags.push(token)
                }
                None => return Err(format!("unexpected token `{token}`")),
            }
        }
        Ok(fields)
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn req(&self, key: &str) -> Result<&'a str, String> {
        self.raw(key)
            .ok_or_else(|| format!("missing field `{key}`"))
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<T, String> {
        parse_num(self.req(key)?, key)
    }

    fn opt_num<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.raw(key).map(|v| parse_num(v, key)).transpose()
    }

    fn fixed(&self, key: &str) -> Result<Fixed6, String> {
        let v = self.req(key)?;
        if v.split_once('.').is_none_or(|(_, frac)| frac.len() != 6) {
            return Err(format!("field `{key}` must have six decimals, got `{v}`"));
        }
        Fixed6::from_str(v).map_err(|e| format!("field `{key}`: {e}"))
    }

    fn ids(&self, key: &str) -> Result<Vec<usize>, String> {
        parse_ids(self.req(key)?, key)
    }

    fn flag(&self, name: &str) -> bool {
        self.flags.contains(&name)
    }
}

fn parse_num<T: FromStr>(v: &str, key: &str) -> Result<T, String> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!(
            "field `{key}` must be a non-negative integer, got `{v}`"
        ));
    }
    v.parse()
        .map_err(|_| format!("field `{key}` is out of range: `{v}`"))
}

fn parse_ids(v: &str, key: &str) -> Result<Vec<usize>, String> {
    v.split(',').map(|x| parse_num(x, key)).collect()
}

struct RunBuilder {
    label: String,
    kind: RunKind,
    relations: Vec<RelationRef>,
    warnings: Vec<String>,
    levels: Vec<Vec<RelOptSet>>,
    /// Set awaiting its `DP CHEAPEST` record.
    open_set: Option<RelOptSet>,
    path_ids: std::collections::HashSet<u32>,
    geqo: Option<GeqoTrace>,
    plan: Option<PlanTree>,
}

impl RunBuilder {
    fn close_set(&mut self) -> Result<(), String> {
        match self.open_set.take() {
            Some(set) => Err(format!(
                "relation set {} has no DP CHEAPEST record",
                join_ids(&set.relids)
            )),
            None => Ok(()),
        }
    }

    fn finish(mut self) -> Result<PlannerRun, String> {
        self.close_set()?;
        let plan = self.plan.ok_or("run has no PLAN record")?;
        let (dp, geqo) = match self.kind {
            RunKind::Dp => {
                if self.levels.is_empty() {
                    return Err("dp run has no DP LEVEL records".into());
                }
                (
                    Some(DpTrace {
                        levels: self.levels,
                    }),
                    None,
                )
            }
            RunKind::Geqo => {
                let geqo = self.geqo.ok_or("geqo run has no GEQO PARAMS")?;
                check_pool_complete(&geqo)?;
                (None, Some(geqo))
            }
        };
        Ok(PlannerRun {
            label: self.label,
            kind: self.kind,
            relations: self.relations,
            plan,
            dp,
            geqo,
            warnings: self.warnings,
        })
    }
}

#[derive(Default)]
struct Parser {
    query_id: Option<String>,
    sql: Option<String>,
    params: Option<CostParams>,
    runs: Vec<PlannerRun>,
    current: Option<RunBuilder>,
}

/// Parses a log into a validated trace. Unknown records inside a run are
/// kept as run warnings; structural problems are errors naming the line.
pub fn parse_optimizer_log(doc: &LogDocument) -> Result<OptimizationTrace, LogError> {
    let mut parser = Parser::default();
    for (i, line) in doc.lines.iter().enumerate() {
        let number = i + 1;
        parser
            .line(line, number)
            .map_err(|message| LogError::Parse {
                line: number,
                message,
            })?;
    }
    if parser.current.is_some() {
        return Err(LogError::Parse {
            line: doc.lines.len(),
            message: "log ends inside a run (missing END RUN)".into(),
        });
    }
    if !parser
        .runs
        .iter()
        .any(|r| r.label == crate::query::MAIN_LABEL)
    {
        return Err(LogError::Parse {
            line: doc.lines.len(),
            message: "log has no `main` run".into(),
        });
    }
    let trace = OptimizationTrace {
        query_id: parser.query_id.unwrap_or_default(),
        sql: parser.sql.unwrap_or_default(),
        params: parser.params.unwrap_or_default(),
        runs: parser.runs,
    };
    trace.validate()?;
    Ok(trace)
}

impl Parser {
    fn line(&mut self, line: &str, number: usize) -> Result<(), String> {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return Ok(());
        }
        let (head, rest) = match trimmed.split_once(' ') {
            Some((h, r)) => (h, r.trim_start()),
            None => (trimmed, ""),
        };
        let tokenized = tokens(trimmed);
        let words: &[&str] = tokenized.as_deref().unwrap_or(&[]);
        let tokenized = || tokenized.clone().map(|_| ());
        if words.len() >= 3 && words[0] == "JOVIS" && words[2] == "RUN" {
            if words[1] != "1" {
                return Err(format!("unsupported log version {}", words[1]));
            }
            return self.begin_run(words);
        }
        if trimmed == "END RUN" {
            let run = self
                .current
                .take()
                .ok_or("END RUN without a matching RUN")?;
            let run = run.finish()?;
            self.runs.push(run);
            return Ok(());
        }
        let Some(run) = self.current.as_mut() else {
            tokenized()?;
            return self.header(head, rest, words);
        };
        match head {
            "BASE" => tokenized().and_then(|_| base(run, &words[1..])),
            "WARN" => {
                let text: String =
                    serde_json::from_str(rest).map_err(|e| format!("bad WARN text: {e}"))?;
                run.warnings.push(text);
                Ok(())
            }
            "DP" if run.kind == RunKind::Dp => {
                tokenized().and_then(|_| dp_record(run, &words[1..]))
            }
            "GEQO" if run.kind == RunKind::Geqo => {
                tokenized().and_then(|_| geqo_record(run, &words[1..]))
            }
            "DP" | "GEQO" => Err(format!("{head} record inside a {} run", run.kind.name())),
            "PLAN" => {
                if run.plan.is_some() {
                    return Err("second PLAN record in one run".into());
                }
                let plan: PlanTree =
                    serde_json::from_str(rest).map_err(|e| format!("bad PLAN JSON: {e}"))?;
                run.plan = Some(plan);
                Ok(())
            }
            "JOVIS" | "SQL" | "PARAMS" => Err(format!("{head} record inside a run")),
            _ => {
                run.warnings
                    .push(format!("line {number}: unrecognized record `{head}`"));
                Ok(())
            }
        }
    }

    fn header(&mut self, head: &str, rest: &str, words: &[&str]) -> Result<(), String> {
        if !self.runs.is_empty() {
            return Err(format!("{head} record between runs"));
        }
        match head {
            "JOVIS" if words.len() == 4 && words[1] == "1" && words[2] == "TRACE" => {
                set_once(&mut self.query_id, decode_name(words[3])?, "TRACE")
            }
            "SQL" => {
                let sql = serde_json::from_str(rest).map_err(|e| format!("bad SQL text: {e}"))?;
                set_once(&mut self.sql, sql, "SQL")
            }
            "PARAMS" => {
                let params: CostParams =
                    serde_json::from_str(rest).map_err(|e| format!("bad PARAMS JSON: {e}"))?;
                let params = params.validated().map_err(|e| e.to_string())?;
                set_once(&mut self.params, params, "PARAMS")
            }
            _ => Err(format!("unrecognized record `{head}` outside a run")),
        }
    }

    fn begin_run(&mut self, words: &[&str]) -> Result<(), String> {
        if self.current.is_some() {
            return Err("RUN inside an unfinished run".into());
        }
        let (label, kind) = match words {
            [_, _, _, label, "KIND", kind] => (decode_name(label)?, *kind),
            _ => return Err("expected `JOVIS 1 RUN <label> KIND <dp|geqo>`".into()),
        };
        let kind = match kind {
            "dp" => RunKind::Dp,
            "geqo" => RunKind::Geqo,
            other => return Err(format!("unknown run kind `{other}`")),
        };
        if self.runs.iter().any(|r| r.label == label) {
            return Err(format!("duplicate run label `{label}`"));
        }
        self.current = Some(RunBuilder {
            label,
            kind,
            relations: Vec::new(),
            warnings: Vec::new(),
            levels: Vec::new(),
            open_set: None,
            path_ids: Default::default(),
            geqo: None,
            plan: None,
        });
        Ok(())
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, what: &str) -> Result<(), String> {
    if slot.is_some() {
        return Err(format!("{what} record given twice"));
    }
    *slot = Some(value);
    Ok(())
}

fn base(run: &mut RunBuilder, words: &[&str]) -> Result<(), String> {
    let f = Fields::parse(words, &["ordinal", "alias", "relation"], &["cte"])?;
    let ordinal: usize = f.num("ordinal")?;
    if ordinal != run.relations.len() + 1 {
        return Err(format!("BASE ordinal {ordinal} out of sequence"));
    }
    run.relations.push(RelationRef {
        ordinal,
        alias: decode_name(f.req("alias")?)?,
        relation: decode_name(f.req("relation")?)?,
        cte: f.flag("cte"),
    });
    Ok(())
}

fn dp_record(run: &mut RunBuilder, words: &[&str]) -> Result<(), String> {
    let (&kind, words) = words.split_first().ok_or("empty DP record")?;
    match kind {
        "LEVEL" => {
            run.close_set()?;
            let k: usize = match words {
                [k] => parse_num(k, "level")?,
                _ => return Err("expected `DP LEVEL <k>`".into()),
            };
            if k != run.levels.len() + 1 {
                return Err(format!("DP LEVEL {k} out of sequence"));
            }
            run.levels.push(Vec::new());
        }
        "REL" => {
            run.close_set()?;
            if run.levels.is_empty() {
                return Err("DP REL before DP LEVEL".into());
            }
            let f = Fields::parse(words, &["relids", "rows"], &[])?;
            run.open_set = Some(RelOptSet {
                relids: f.ids("relids")?,
                rows: f.fixed("rows")?,
                cheapest_total: 0,
                cheapest_startup: 0,
                paths: Vec::new(),
            });
        }
        "PATH" => {
            let f = Fields::parse(
                words,
                &["id", "type", "startup", "total", "rows", "outer", "inner"],
                &["chosen"],
            )?;
            let id: u32 = f.num("id")?;
            let type_name = f.req("type")?;
            let path_type = PathType::from_name(type_name)
                .ok_or_else(|| format!("unknown path type `{type_name}`"))?;
            let outer: Option<u32> = f.opt_num("outer")?;
            let inner: Option<u32> = f.opt_num("inner")?;
            for child in outer.iter().chain(&inner) {
                if !run.path_ids.contains(child) {
                    return Err(format!("path {id} references undefined path id {child}"));
                }
            }
            if outer.is_some() != inner.is_some() {
                return Err(format!("path {id} needs both outer and inner"));
            }
            let node = PathNode {
                id,
                path_type,
                startup: f.fixed("startup")?,
                total: f.fixed("total")?,
                rows: f.fixed("rows")?,
                outer,
                inner,
                chosen: f.flag("chosen"),
            };
            let set = run.open_set.as_mut().ok_or("DP PATH outside a DP REL")?;
            if !run.path_ids.insert(id) {
                return Err(format!("duplicate path id {id}"));
            }
            set.paths.push(node);
        }
        "CHEAPEST" => {
            let f = Fields::parse(words, &["relids", "total", "startup"], &[])?;
            let mut set = run.open_set.take().ok_or("DP CHEAPEST without a DP REL")?;
            if f.ids("relids")? != set.relids {
                return Err("DP CHEAPEST relids differ from the open DP REL".into());
            }
            set.cheapest_total = f.num("total")?;
            set.cheapest_startup = f.num("startup")?;
            for id in [set.cheapest_total, set.cheapest_startup] {
                if set.path(id).is_none() {
                    return Err(format!("cheapest path {id} is not in this relation set"));
                }
            }
            run.levels
                .last_mut()
                .expect("REL checked for a level")
                .push(set);
        }
        other => return Err(format!("unknown DP record `{other}`")),
    }
    Ok(())
}

fn geqo_record(run: &mut RunBuilder, words: &[&str]) -> Result<(), String> {
    let (&kind, words) = words.split_first().ok_or("empty GEQO record")?;
    match kind {
        "PARAMS" => {
            if run.geqo.is_some() {
                return Err("GEQO PARAMS given twice".into());
            }
            let f = Fields::parse(words, &["pool", "gens", "bias", "seed"], &[])?;
            run.geqo = Some(GeqoTrace {
                pool_size: f.num("pool")?,
                generation_count: f.num("gens")?,
                bias: f.fixed("bias")?.to_f64(),
                seed: f.num("seed")?,
                generations: Vec::new(),
            });
        }
        "GEN" => {
            let geqo = run.geqo.as_mut().ok_or("GEQO GEN before GEQO PARAMS")?;
            check_pool_complete(geqo)?;
            let f = Fields::parse(words, &["index", "offspring", "p1", "p2", "fails"], &[])?;
            let index: usize = f.num("index")?;
            if index != geqo.generations.len() {
                return Err(format!("GEQO GEN index {index} out of sequence"));
            }
            let offspring: Option<usize> = f.opt_num("offspring")?;
            if offspring.is_some() && index == 0 {
                return Err("generation 0 cannot have an offspring".into());
            }
            let extra = ["p1", "p2", "fails"].map(|k| f.raw(k).is_some());
            if extra.iter().any(|&given| given != offspring.is_some()) {
                return Err("offspring, p1, p2 and fails must appear together".into());
            }
            // Pool placeholders; GENE records fill in sequences and costs.
            let mut pool: Vec<Gene> = match geqo.generations.last() {
                None => Vec::new(),
                Some(previous) => {
                    let mut pool = previous.pool.clone();
                    if let Some(o) = offspring {
                        if o >= pool.len() {
                            return Err(format!("offspring index {o} out of range"));
                        }
                        pool.pop();
                        pool.insert(
                            o,
                            Gene {
                                sequence: Vec::new(),
                                cost: Fixed6::zero(),
                                parents: Some([f.num("p1")?, f.num("p2")?]),
                                edge_failures: f.num("fails")?,
                            },
                        );
                    }
                    pool
                }
            };
            for gene in &mut pool {
                gene.sequence.clear();
            }
            geqo.generations.push(Generation {
                index,
                offspring_index: offspring,
                pool,
            });
        }
        "GENE" => {
            let geqo = run.geqo.as_mut().ok_or("GEQO GENE before GEQO PARAMS")?;
            let generation = geqo
                .generations
                .last_mut()
                .ok_or("GEQO GENE before GEQO GEN")?;
            let f = Fields::parse(words, &["idx", "seq", "cost"], &[])?;
            let idx: usize = f.num("idx")?;
            let sequence = f.ids("seq")?;
            let cost = f.fixed("cost")?;
            if generation.index == 0 {
                if idx != generation.pool.len() {
                    return Err(format!("GEQO GENE idx {idx} out of sequence"));
                }
                generation.pool.push(Gene {
                    sequence,
                    cost,
                    parents: None,
                    edge_failures: 0,
                });
            } else {
                let filled = generation
                    .pool
                    .iter()
                    .take_while(|g| !g.sequence.is_empty())
                    .count();
                if idx != filled || idx >= generation.pool.len() {
                    return Err(format!("GEQO GENE idx {idx} out of sequence"));
                }
                let gene = &mut generation.pool[idx];
                if sequence.is_empty() {
                    return Err("empty gene sequence".into());
                }
                gene.sequence = sequence;
                gene.cost = cost;
            }
        }
        other => return Err(format!("unknown GEQO record `{other}`")),
    }
    Ok(())
}

fn check_pool_complete(geqo: &GeqoTrace) -> Result<(), String> {
    if let Some(last) = geqo.generations.last() {
        if last.pool.iter().any(|g| g.sequence.is_empty()) || last.pool.len() != geqo.pool_size {
            return Err(format!(
                "generation {} does not list all {} genes",
                last.index, geqo.pool_size
            ));
        }
    }
    Ok(())
}
