use std::collections::{BTreeSet, HashMap};

use super::hints::{parse_hints, HintSet};
use super::lexer::{tokenize, Tok, Token};
use super::{
    CmpOp, ColumnRef, FromItem, FromSource, JoinPredicate, Literal, QueryBlock, QueryError,
    QuerySpec, Restriction, MAIN_LABEL,
};

const RESERVED: &[&str] = &[
    "select",
    "from",
    "where",
    "and",
    "or",
    "not",
    "with",
    "as",
    "join",
    "inner",
    "left",
    "right",
    "full",
    "outer",
    "cross",
    "natural",
    "on",
    "using",
    "group",
    "order",
    "by",
    "having",
    "limit",
    "offset",
    "union",
    "intersect",
    "except",
    "distinct",
    "recursive",
];

/// Keywords that start a clause this dialect does not support.
fn unsupported_keyword(word: &str) -> Option<&'static str> {
    Some(match word {
        "join" | "inner" | "cross" | "natural" | "on" | "using" => "explicit JOIN syntax",
        "left" | "right" | "full" | "outer" => "outer joins",
        "group" | "having" => "aggregation",
        "order" => "ORDER BY",
        "limit" | "offset" => "LIMIT/OFFSET",
        "union" | "intersect" | "except" => "set operations",
        "or" => "disjunctive predicates",
        "not" => "negated predicates",
        "distinct" => "SELECT DISTINCT",
        "recursive" => "recursive CTEs",
        _ => return None,
    })
}

/// A predicate as written, before alias validation.
struct RawPredicate {
    kind: PredicateKind,
    line: usize,
    column: usize,
}

enum PredicateKind {
    Restriction(Restriction),
    Join(JoinPredicate),
}

struct RawBlock {
    label: String,
    from: Vec<(String, String, usize, usize)>,
    predicates: Vec<RawPredicate>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> QueryError {
        let tok = self.peek();
        if let Tok::Ident(word) = &tok.tok {
            if let Some(feature) = unsupported_keyword(word) {
                return QueryError::Unsupported {
                    feature: feature.to_string(),
                    line: tok.line,
                    column: tok.column,
                };
            }
        }
        if let Tok::Op(op @ ("<>" | "!=")) = tok.tok {
            return QueryError::Unsupported {
                feature: format!("operator {op}"),
                line: tok.line,
                column: tok.column,
            };
        }
        QueryError::Syntax {
            line: tok.line,
            column: tok.column,
            expected: expected.to_string(),
            found: tok.tok.describe(),
        }
    }

    fn unsupported(&self, feature: &str) -> QueryError {
        let tok = self.peek();
        QueryError::Unsupported {
            feature: feature.to_string(),
            line: tok.line,
            column: tok.column,
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == word)
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), QueryError> {
        if self.is_keyword(word) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", word.to_ascii_uppercase())))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), QueryError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    /// A non-reserved identifier.
    fn name(&mut self, what: &str) -> Result<(String, usize, usize), QueryError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Ident(word) if !RESERVED.contains(&word.as_str()) => {
                self.advance();
                Ok((word, tok.line, tok.column))
            }
            _ => Err(self.error(what)),
        }
    }

    fn select(&mut self, label: String) -> Result<RawBlock, QueryError> {
        self.expect_keyword("select")?;
        match &self.peek().tok {
            Tok::Star => {
                self.advance();
            }
            Tok::Ident(w) if w == "distinct" => return Err(self.error("`*`")),
            _ => return Err(self.unsupported("projection lists (only SELECT * is accepted)")),
        }
        self.expect_keyword("from")?;
        let mut from = Vec::new();
        loop {
            if self.peek().tok == Tok::LParen {
                return Err(self.unsupported("subqueries in FROM"));
            }
            let (name, line, column) = self.name("a relation name")?;
            let alias = if self.is_keyword("as") {
                self.advance();
                self.name("an alias")?.0
            } else if matches!(&self.peek().tok, Tok::Ident(w) if !RESERVED.contains(&w.as_str())) {
                self.name("an alias")?.0
            } else {
                name.clone()
            };
            from.push((name, alias, line, column));
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        let mut predicates = Vec::new();
        if self.is_keyword("where") {
            self.advance();
            loop {
                predicates.push(self.predicate()?);
                if self.is_keyword("and") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        Ok(RawBlock {
            label,
            from,
            predicates,
        })
    }

    fn column_ref(&mut self) -> Result<ColumnRef, QueryError> {
        let (alias, _, _) = self.name("a column reference `alias.column`")?;
        if self.peek().tok == Tok::LParen {
            return Err(self.unsupported("function calls"));
        }
        self.expect(Tok::Dot)?;
        let (column, _, _) = self.name("a column name")?;
        Ok(ColumnRef { alias, column })
    }

    fn literal(&mut self) -> Option<Literal> {
        match self.peek().tok.clone() {
            Tok::Number(n) => {
                self.advance();
                Some(Literal::Number(n))
            }
            Tok::Str(s) => {
                self.advance();
                Some(Literal::Text(s))
            }
            Tok::Minus => {
                if let Tok::Number(n) = &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
                {
                    let n = format!("-{n}");
                    self.advance();
                    self.advance();
                    Some(Literal::Number(n))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn operator(&mut self) -> Result<CmpOp, QueryError> {
        let op = match self.peek().tok {
            Tok::Op("=") => CmpOp::Eq,
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op("<=") => CmpOp::Le,
            Tok::Op(">=") => CmpOp::Ge,
            _ => return Err(self.error("a comparison operator")),
        };
        self.advance();
        Ok(op)
    }

    fn predicate(&mut self) -> Result<RawPredicate, QueryError> {
        let start = self.peek().clone();
        if start.tok == Tok::LParen {
            return Err(self.unsupported("parenthesized predicates"));
        }
        let make = |kind| RawPredicate {
            kind,
            line: start.line,
            column: start.column,
        };
        if let Some(value) = self.literal() {
            let op = self.operator()?;
            let column = self.column_ref()?;
            return Ok(make(PredicateKind::Restriction(Restriction {
                column,
                op: op.flipped(),
                value,
            })));
        }
        let left = self.column_ref()?;
        let op = self.operator()?;
        if let Some(value) = self.literal() {
            return Ok(make(PredicateKind::Restriction(Restriction {
                column: left,
                op,
                value,
            })));
        }
        let right = self.column_ref()?;
        if op != CmpOp::Eq {
            return Err(QueryError::Unsupported {
                feature: "non-equi join predicates".into(),
                line: start.line,
                column: start.column,
            });
        }
        if left.alias == right.alias {
            return Err(QueryError::Unsupported {
                feature: "comparisons between columns of the same relation".into(),
                line: start.line,
                column: start.column,
            });
        }
        Ok(make(PredicateKind::Join(JoinPredicate { left, right })))
    }

    fn query(&mut self) -> Result<(Option<String>, Vec<RawBlock>), QueryError> {
        let mut hint = None;
        if let Tok::Hint(text) = &self.peek().tok {
            hint = Some(text.clone());
            self.advance();
        }
        let mut blocks = Vec::new();
        if self.is_keyword("with") {
            self.advance();
            if self.is_keyword("recursive") {
                return Err(self.unsupported("recursive CTEs"));
            }
            loop {
                let (label, line, column) = self.name("a CTE name")?;
                if label == MAIN_LABEL {
                    return Err(QueryError::Syntax {
                        line,
                        column,
                        expected: "a CTE name other than `main`".into(),
                        found: "`main`".into(),
                    });
                }
                if blocks.iter().any(|b: &RawBlock| b.label == label) {
                    return Err(QueryError::Syntax {
                        line,
                        column,
                        expected: "a unique CTE name".into(),
                        found: format!("duplicate `{label}`"),
                    });
                }
                if self.peek().tok == Tok::LParen {
                    return Err(self.unsupported("CTE column lists"));
                }
                self.expect_keyword("as")?;
                self.expect(Tok::LParen)?;
                blocks.push(self.select(label)?);
                self.expect(Tok::RParen)?;
                if self.peek().tok == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        blocks.push(self.select(MAIN_LABEL.to_string())?);
        if self.peek().tok == Tok::Semicolon {
            self.advance();
        }
        if self.peek().tok != Tok::Eof {
            return Err(self.error("end of query"));
        }
        Ok((hint, blocks))
    }
}

fn resolve(raw: Vec<RawBlock>, hints: HintSet) -> Result<QuerySpec, QueryError> {
    let labels: Vec<String> = raw.iter().map(|b| b.label.clone()).collect();
    let cte_count = labels.len() - 1;
    let mut blocks = Vec::with_capacity(raw.len());
    for (index, block) in raw.into_iter().enumerate() {
        let mut from = Vec::new();
        let mut positions: HashMap<String, (usize, usize)> = HashMap::new();
        for (name, alias, line, column) in block.from {
            let source = match labels[..cte_count].iter().position(|l| *l == name) {
                Some(def) if def < index => FromSource::Cte(name),
                Some(_) => return Err(QueryError::CyclicCte { name }),
                None => FromSource::Relation(name),
            };
            if positions.insert(alias.clone(), (line, column)).is_some() {
                return Err(QueryError::DuplicateAlias {
                    alias,
                    line,
                    column,
                });
            }
            from.push(FromItem { alias, source });
        }
        let mut restrictions = Vec::new();
        let mut joins = Vec::new();
        for pred in block.predicates {
            let check = |c: &ColumnRef| {
                if positions.contains_key(&c.alias) {
                    Ok(())
                } else {
                    Err(QueryError::UnknownAlias {
                        alias: c.alias.clone(),
                        position: Some((pred.line, pred.column)),
                    })
                }
            };
            match pred.kind {
                PredicateKind::Restriction(r) => {
                    check(&r.column)?;
                    restrictions.push(r);
                }
                PredicateKind::Join(j) => {
                    check(&j.left)?;
                    check(&j.right)?;
                    joins.push(j);
                }
            }
        }
        blocks.push(QueryBlock {
            label: block.label,
            from,
            restrictions,
            joins,
            hints: HintSet::default(),
        });
    }

    // Each hint goes to every block that declares all of its aliases.
    let block_aliases: Vec<BTreeSet<String>> = blocks
        .iter()
        .map(|b| b.from.iter().map(|f| f.alias.clone()).collect())
        .collect();
    let covered = |aliases: &[&str]| {
        block_aliases
            .iter()
            .any(|set| aliases.iter().all(|a| set.contains(*a)))
    };
    for alias in hints.aliases() {
        if !covered(&[alias]) {
            return Err(QueryError::UnknownAlias {
                alias: alias.to_string(),
                position: None,
            });
        }
    }
    let groups = hints
        .join_method_hints
        .keys()
        .map(|s| s.iter().map(String::as_str).collect::<Vec<_>>())
        .chain(
            hints
                .leading
                .iter()
                .map(|l| l.iter().map(String::as_str).collect()),
        );
    for group in groups {
        if !covered(&group) {
            return Err(QueryError::UnknownAlias {
                alias: group.join(" "),
                position: None,
            });
        }
    }
    for (block, aliases) in blocks.iter_mut().zip(&block_aliases) {
        block.hints = hints.restricted_to(aliases);
    }
    if let Some(main) = blocks.last_mut() {
        main.hints.warnings = hints.warnings;
    }
    Ok(QuerySpec { blocks })
}

pub fn parse_query(sql: &str) -> Result<QuerySpec, QueryError> {
    let mut tokens = tokenize(sql)?;
    // Hint comments anywhere but the very start are ignored.
    let before = tokens.len();
    let mut index = 0;
    tokens.retain(|t| {
        index += 1;
        index == 1 || !matches!(t.tok, Tok::Hint(_))
    });
    let stray = before - tokens.len();
    let mut parser = Parser { tokens, pos: 0 };
    let (hint, raw) = parser.query()?;
    let mut hints = match hint {
        Some(text) => parse_hints(&text)?,
        None => HintSet::default(),
    };
    if stray > 0 {
        hints
            .warnings
            .push("hint comment ignored: it must precede the first keyword".into());
    }
    resolve(raw, hints)
}
