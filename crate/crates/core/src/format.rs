//! The `.econ` text format for economies and witnesses.
//!
//! ```text
//! # comment
//! agent 1 peak=0 endow=9
//! agent 3 peak=3.5 endow=0 left=2 right=1
//! ```
//!
//! A witness is a block of the same lines framed by a header:
//!
//! ```text
//! WITNESS kind=os-endow-mono rule=max-satiating agents=3
//! COMPARISON <free text>
//! BEFORE 1=0 2=4 3=4
//! AFTER 1=0 2=9 3=2
//! agent 1 peak=0 endow=3
//! ...
//! VARIANT
//! agent 1 peak=0 endow=3
//! ...
//! END
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{AgentId, Allocation, Economy, Preference};
use crate::rational::Rational;
use crate::rules::RuleId;
use crate::witness::{Witness, WitnessKind};

/// A whitespace-separated token with its 1-based column.
#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..k],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn semantic(line: usize, message: impl Into<String>) -> Error {
    Error::Semantic {
        line,
        message: message.into(),
    }
}

fn rational(line: usize, column: usize, text: &str) -> Result<Rational> {
    text.parse()
        .map_err(|err| syntax(line, column, format!("expected a number: {err}")))
}

struct AgentLine {
    id: AgentId,
    preference: Preference,
    endowment: Rational,
}

fn parse_agent_line(line_no: usize, toks: &[Token<'_>]) -> Result<AgentLine> {
    let head = toks[0];
    if head.text != "agent" {
        return Err(syntax(
            line_no,
            head.column,
            format!("expected `agent`, found `{}`", head.text),
        ));
    }
    let id_tok = toks
        .get(1)
        .ok_or_else(|| syntax(line_no, head.column + head.text.len(), "expected an agent id"))?;
    let id: u32 = id_tok.text.parse().map_err(|_| {
        syntax(
            line_no,
            id_tok.column,
            format!("expected an agent id, found `{}`", id_tok.text),
        )
    })?;
    let mut fields: BTreeMap<&str, (Rational, usize)> = BTreeMap::new();
    for tok in &toks[2..] {
        let (key, value) = tok
            .text
            .split_once('=')
            .ok_or_else(|| syntax(line_no, tok.column, format!("expected key=value, found `{}`", tok.text)))?;
        if !["peak", "endow", "left", "right"].contains(&key) {
            return Err(syntax(
                line_no,
                tok.column,
                format!("unknown key `{key}`; expected peak, endow, left or right"),
            ));
        }
        if fields.contains_key(key) {
            return Err(syntax(line_no, tok.column, format!("`{key}` given twice")));
        }
        let value_column = tok.column + key.chars().count() + 1;
        fields.insert(key, (rational(line_no, value_column, value)?, tok.column));
    }
    let end = toks.last().map_or(1, |t| t.column + t.text.chars().count());
    let required = |key: &str| {
        fields
            .get(key)
            .map(|(v, _)| *v)
            .ok_or_else(|| syntax(line_no, end, format!("expected `{key}=`")))
    };
    let peak = required("peak")?;
    let endowment = required("endow")?;
    let left = fields.get("left").map_or(Rational::ONE, |(v, _)| *v);
    let right = fields.get("right").map_or(Rational::ONE, |(v, _)| *v);
    if peak.is_negative() {
        return Err(semantic(line_no, format!("agent {id}: peak {peak} is negative")));
    }
    if endowment.is_negative() {
        return Err(semantic(
            line_no,
            format!("agent {id}: endowment {endowment} is negative"),
        ));
    }
    if !left.is_positive() || !right.is_positive() {
        return Err(semantic(
            line_no,
            format!("agent {id}: weights must be positive (left={left}, right={right})"),
        ));
    }
    Ok(AgentLine {
        id: AgentId(id),
        preference: Preference::new(peak, left, right)?,
        endowment,
    })
}

/// Collects agent lines into an economy, reporting duplicates by line.
#[derive(Default)]
struct EconomyBuilder {
    agents: Vec<(AgentId, Preference, Rational)>,
    seen: BTreeMap<AgentId, usize>,
}

impl EconomyBuilder {
    fn push(&mut self, line_no: usize, a: AgentLine) -> Result<()> {
        if let Some(first) = self.seen.insert(a.id, line_no) {
            return Err(semantic(
                line_no,
                format!("duplicate agent id {} (first defined on line {first})", a.id),
            ));
        }
        self.agents.push((a.id, a.preference, a.endowment));
        Ok(())
    }

    fn build(self) -> Result<Economy> {
        Economy::new(self.agents)
    }
}

/// Parses an economy file.
pub fn parse_economy(text: &str) -> Result<Economy> {
    let mut builder = EconomyBuilder::default();
    for (k, raw) in text.lines().enumerate() {
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        builder.push(k + 1, parse_agent_line(k + 1, &toks)?)?;
    }
    builder.build()
}

fn agent_line(id: AgentId, preference: &Preference, endowment: Rational) -> String {
    let mut line = format!("agent {id} peak={} endow={endowment}", preference.peak());
    if preference.left_weight() != Rational::ONE {
        let _ = write!(line, " left={}", preference.left_weight());
    }
    if preference.right_weight() != Rational::ONE {
        let _ = write!(line, " right={}", preference.right_weight());
    }
    line
}

/// One line per agent in id order, weights only when not 1.
pub fn serialize_economy(e: &Economy) -> String {
    e.agents()
        .map(|(id, a)| agent_line(id, &a.preference, a.endowment) + "\n")
        .collect()
}

fn allocation_record(x: &Allocation) -> String {
    x.iter()
        .map(|(id, v)| format!("{id}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn join_ids(ids: &[AgentId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(",")
}

/// The witness as a self-contained text block.
pub fn serialize_witness(w: &Witness) -> String {
    let mut out = format!("WITNESS kind={} rule={} agents={}", w.kind, w.rule, join_ids(&w.agents));
    if let Some((a, b)) = w.transfer {
        let _ = write!(out, " transfer={a},{b}");
    }
    out.push('\n');
    for line in w.comparison.lines() {
        let _ = writeln!(out, "COMPARISON {line}");
    }
    let _ = writeln!(out, "BEFORE {}", allocation_record(&w.before));
    if let Some(after) = &w.after {
        let _ = writeln!(out, "AFTER {}", allocation_record(after));
    }
    out.push_str(&serialize_economy(&w.economy));
    if let Some(v) = &w.variant {
        out.push_str("VARIANT\n");
        out.push_str(&serialize_economy(v));
    }
    out.push_str("END\n");
    out
}

fn parse_allocation_record(line_no: usize, toks: &[Token<'_>]) -> Result<BTreeMap<AgentId, Rational>> {
    let mut amounts = BTreeMap::new();
    for tok in toks {
        let (id, value) = tok
            .text
            .split_once('=')
            .ok_or_else(|| syntax(line_no, tok.column, format!("expected id=amount, found `{}`", tok.text)))?;
        let id: u32 = id
            .parse()
            .map_err(|_| syntax(line_no, tok.column, format!("expected an agent id, found `{id}`")))?;
        let value = rational(line_no, tok.column + tok.text.find('=').unwrap_or(0) + 1, value)?;
        if amounts.insert(AgentId(id), value).is_some() {
            return Err(semantic(line_no, format!("agent {id} listed twice")));
        }
    }
    Ok(amounts)
}

fn parse_ids(line_no: usize, column: usize, text: &str) -> Result<Vec<AgentId>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.parse()
                .map(AgentId)
                .map_err(|_| syntax(line_no, column, format!("expected an agent id, found `{s}`")))
        })
        .collect()
}

/// A witness block read up to, but not including, its END line.
struct Open {
    start: usize,
    header: Header,
    comparison: Vec<String>,
    before: Option<(usize, BTreeMap<AgentId, Rational>)>,
    after: Option<(usize, BTreeMap<AgentId, Rational>)>,
    base: EconomyBuilder,
    variant: Option<EconomyBuilder>,
}

#[derive(Default)]
struct Header {
    kind: Option<WitnessKind>,
    rule: Option<RuleId>,
    agents: Option<Vec<AgentId>>,
    transfer: Option<(Rational, Rational)>,
}

fn parse_header(line_no: usize, toks: &[Token<'_>]) -> Result<Header> {
    let mut header = Header::default();
    for tok in &toks[1..] {
        let (key, value) = tok
            .text
            .split_once('=')
            .ok_or_else(|| syntax(line_no, tok.column, format!("expected key=value, found `{}`", tok.text)))?;
        let value_column = tok.column + key.len() + 1;
        match key {
            "kind" => {
                header.kind = Some(
                    value
                        .parse()
                        .map_err(|_| syntax(line_no, value_column, format!("unknown witness kind `{value}`")))?,
                )
            }
            "rule" => {
                header.rule = Some(
                    value
                        .parse()
                        .map_err(|err: Error| syntax(line_no, value_column, err.to_string()))?,
                )
            }
            "agents" => header.agents = Some(parse_ids(line_no, value_column, value)?),
            "transfer" => {
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| syntax(line_no, value_column, "expected transfer=a,b"))?;
                header.transfer = Some((rational(line_no, value_column, a)?, rational(line_no, value_column, b)?));
            }
            _ => {
                return Err(syntax(
                    line_no,
                    tok.column,
                    format!("unknown key `{key}`; expected kind, rule, agents or transfer"),
                ))
            }
        }
    }
    Ok(header)
}

/// Parses every witness block in `text`, skipping any report lines between
/// blocks. Stored allocations are taken as given; call [`Witness::replay`]
/// to check them.
pub fn parse_witnesses(text: &str) -> Result<Vec<Witness>> {
    enum Section {
        Outside,
        Base,
        Variant,
    }
    let mut out = Vec::new();
    let mut section = Section::Outside;
    let mut open: Option<Open> = None;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix("COMPARISON") {
            let Some(block) = open.as_mut() else {
                return Err(syntax(line_no, 1, "COMPARISON outside a witness block"));
            };
            block.comparison.push(rest.trim().to_string());
            continue;
        }
        let toks = tokens(strip_comment(raw));
        let Some(first) = toks.first() else { continue };
        match (first.text, &section) {
            ("WITNESS", Section::Outside) => {
                open = Some(Open {
                    start: line_no,
                    header: parse_header(line_no, &toks)?,
                    comparison: Vec::new(),
                    before: None,
                    after: None,
                    base: EconomyBuilder::default(),
                    variant: None,
                });
                section = Section::Base;
            }
            ("WITNESS", _) => return Err(syntax(line_no, first.column, "expected END before a new WITNESS")),
            (_, Section::Outside) => continue,
            ("BEFORE", _) => {
                let block = open.as_mut().expect("inside a block");
                block.before = Some((line_no, parse_allocation_record(line_no, &toks[1..])?));
            }
            ("AFTER", _) => {
                let block = open.as_mut().expect("inside a block");
                block.after = Some((line_no, parse_allocation_record(line_no, &toks[1..])?));
            }
            ("VARIANT", Section::Base) => {
                open.as_mut().expect("inside a block").variant = Some(EconomyBuilder::default());
                section = Section::Variant;
            }
            ("VARIANT", _) => return Err(syntax(line_no, first.column, "VARIANT given twice")),
            ("END", _) => {
                let block = open.take().expect("inside a block");
                out.push(finish(line_no, block)?);
                section = Section::Outside;
            }
            (_, Section::Base) => {
                let a = parse_agent_line(line_no, &toks)?;
                open.as_mut().expect("inside a block").base.push(line_no, a)?;
            }
            (_, Section::Variant) => {
                let a = parse_agent_line(line_no, &toks)?;
                open.as_mut()
                    .expect("inside a block")
                    .variant
                    .as_mut()
                    .expect("variant open")
                    .push(line_no, a)?;
            }
        }
    }
    if let Some(block) = open {
        return Err(syntax(
            last_line + 1,
            1,
            format!("witness starting on line {} has no END", block.start),
        ));
    }
    Ok(out)
}

fn finish(end: usize, block: Open) -> Result<Witness> {
    let Open {
        start,
        header,
        comparison,
        before,
        after,
        base,
        variant,
    } = block;
    let missing = |what: &str| semantic(start, format!("witness header lacks {what}"));
    let kind = header.kind.ok_or_else(|| missing("kind="))?;
    let rule = header.rule.ok_or_else(|| missing("rule="))?;
    let agents = header.agents.ok_or_else(|| missing("agents="))?;
    let economy = base
        .build()
        .map_err(|err| semantic(end, format!("witness economy: {err}")))?;
    let variant = variant
        .map(EconomyBuilder::build)
        .transpose()
        .map_err(|err| semantic(end, format!("variant economy: {err}")))?;
    let (before_line, before) = before.ok_or_else(|| semantic(end, "witness lacks a BEFORE line"))?;
    let before = Allocation::for_economy(&economy, before).map_err(|err| semantic(before_line, err.to_string()))?;
    let after = match (after, &variant) {
        (Some((line, amounts)), Some(v)) => {
            Some(Allocation::for_economy(v, amounts).map_err(|err| semantic(line, err.to_string()))?)
        }
        (Some((line, _)), None) => return Err(semantic(line, "AFTER given without a VARIANT")),
        (None, _) => None,
    };
    let ids: BTreeSet<AgentId> = economy.ids().chain(variant.iter().flat_map(|v| v.ids())).collect();
    if let Some(id) = agents.iter().find(|id| !ids.contains(id)) {
        return Err(semantic(start, format!("agent {id} appears in neither economy")));
    }
    Ok(Witness {
        kind,
        rule,
        economy,
        variant,
        agents,
        before,
        after,
        transfer: header.transfer,
        comparison: comparison.join("\n"),
    })
}

/// Parses a file holding exactly one witness.
pub fn parse_witness(text: &str) -> Result<Witness> {
    let mut all = parse_witnesses(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(syntax(1, 1, "no WITNESS block found")),
        n => Err(semantic(1, format!("expected one witness, found {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn tokens_have_columns() {
        let t = tokens("  agent 3\tpeak=1");
        let cols: Vec<_> = t.iter().map(|t| (t.text, t.column)).collect();
        assert_eq!(cols, vec![("agent", 3), ("3", 9), ("peak=1", 11)]);
    }

    #[test]
    fn bad_value_column_points_at_the_value() {
        let err = parse_economy("agent 1 peak=x endow=1").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Syntax {
                    line: 1,
                    column: 14,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn comment_after_code() {
        let e = parse_economy("agent 2 peak=1/2 endow=3 # note\n").unwrap();
        assert_eq!(e.peak(AgentId(2)), rat(1, 2));
        assert_eq!(e.endowment(AgentId(2)), int(3));
    }
}
