//! The hint-comment subset: `SeqScan`, `IndexScan`, `NestLoop`, `HashJoin`,
//! `MergeJoin` and a flat `Leading` list.

use std::collections::{BTreeMap, BTreeSet};

use crate::cost::{JoinMethod, ScanMethod};

use super::QueryError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HintSet {
    pub scan_hints: BTreeMap<String, ScanMethod>,
    /// Alias set → join methods allowed when joining exactly that set.
    pub join_method_hints: BTreeMap<BTreeSet<String>, BTreeSet<JoinMethod>>,
    pub leading: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

impl HintSet {
    pub fn is_empty(&self) -> bool {
        self.scan_hints.is_empty() && self.join_method_hints.is_empty() && self.leading.is_none()
    }

    /// Every alias mentioned by any hint.
    pub fn aliases(&self) -> BTreeSet<&str> {
        let mut all: BTreeSet<&str> = self.scan_hints.keys().map(String::as_str).collect();
        for set in self.join_method_hints.keys() {
            all.extend(set.iter().map(String::as_str));
        }
        if let Some(leading) = &self.leading {
            all.extend(leading.iter().map(String::as_str));
        }
        all
    }

    /// The hints whose aliases are all contained in `aliases`.
    pub(crate) fn restricted_to(&self, aliases: &BTreeSet<String>) -> HintSet {
        HintSet {
            scan_hints: self
                .scan_hints
                .iter()
                .filter(|(a, _)| aliases.contains(*a))
                .map(|(a, m)| (a.clone(), *m))
                .collect(),
            join_method_hints: self
                .join_method_hints
                .iter()
                .filter(|(set, _)| set.is_subset(aliases))
                .map(|(s, m)| (s.clone(), m.clone()))
                .collect(),
            leading: self
                .leading
                .as_ref()
                .filter(|l| l.iter().all(|a| aliases.contains(a)))
                .cloned(),
            warnings: Vec::new(),
        }
    }
}

fn split_hints(comment: &str) -> Vec<Result<(String, String), String>> {
    let mut out = Vec::new();
    let mut rest = comment.trim_start();
    while !rest.is_empty() {
        let name_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if name_len == 0 {
            let bad: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
            let skip = bad.len().max(1);
            out.push(Err(format!("unexpected text `{bad}` in hint comment")));
            rest = rest[skip..].trim_start();
            continue;
        }
        let name = &rest[..name_len];
        let after = rest[name_len..].trim_start();
        let Some(args_start) = after.strip_prefix('(') else {
            out.push(Err(format!("malformed hint {name}: expected `(`")));
            rest = after;
            continue;
        };
        // Balanced scan so that nested parentheses end up inside the args.
        let mut depth = 1;
        let mut end = None;
        for (i, c) in args_start.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        match end {
            Some(i) => {
                out.push(Ok((name.to_string(), args_start[..i].to_string())));
                rest = args_start[i + 1..].trim_start();
            }
            None => {
                out.push(Err(format!("malformed hint {name}: missing `)`")));
                rest = "";
            }
        }
    }
    out
}

/// Parses the interior of a `/*+ ... */` comment.
pub fn parse_hints(comment: &str) -> Result<HintSet, QueryError> {
    let mut hints = HintSet::default();
    for item in split_hints(comment) {
        let (name, args) = match item {
            Ok(pair) => pair,
            Err(warning) => {
                hints.warnings.push(warning);
                continue;
            }
        };
        if args.contains('(') || args.contains(')') {
            hints.warnings.push(format!(
                "hint {name} with nested parentheses is not supported"
            ));
            continue;
        }
        let aliases: Vec<String> = args
            .split_whitespace()
            .map(|a| a.to_ascii_lowercase())
            .collect();
        let scan = match name.as_str() {
            "SeqScan" => Some(ScanMethod::SeqScan),
            "IndexScan" => Some(ScanMethod::IndexScan),
            _ => None,
        };
        if let Some(method) = scan {
            let [alias] = aliases.as_slice() else {
                hints
                    .warnings
                    .push(format!("hint {name} expects exactly one alias"));
                continue;
            };
            match hints.scan_hints.get(alias) {
                Some(existing) if *existing != method => {
                    return Err(QueryError::HintConflict {
                        alias: alias.clone(),
                    })
                }
                _ => {
                    hints.scan_hints.insert(alias.clone(), method);
                }
            }
            continue;
        }
        if let Ok(method) = name.parse::<JoinMethod>() {
            let set: BTreeSet<String> = aliases.into_iter().collect();
            if set.len() < 2 {
                hints
                    .warnings
                    .push(format!("hint {name} needs at least two distinct aliases"));
                continue;
            }
            hints
                .join_method_hints
                .entry(set)
                .or_default()
                .insert(method);
            continue;
        }
        if name == "Leading" {
            let mut seen = BTreeSet::new();
            for alias in &aliases {
                if !seen.insert(alias) {
                    return Err(QueryError::InvalidHint(format!(
                        "alias `{alias}` appears twice in Leading"
                    )));
                }
            }
            if aliases.len() < 2 {
                hints
                    .warnings
                    .push("hint Leading needs at least two aliases".to_string());
                continue;
            }
            if hints.leading.is_some() {
                hints
                    .warnings
                    .push("multiple Leading hints; the last one wins".to_string());
            }
            hints.leading = Some(aliases);
            continue;
        }
        hints.warnings.push(format!("unrecognized hint {name}"));
    }
    Ok(hints)
}
