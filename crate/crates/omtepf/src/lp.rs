//! Plain-text model interchange and solution files for the external-solver
//! path.
//!
//! The model format is an LP-style dialect with a deliberately regular
//! grammar so that small scripts can parse it without a full LP reader:
//!
//! * one row per line, label at column zero (`obj:`, `e{i}:`, `c{i}:`,
//!   `q{i}:`), every term written as `± coefficient variable` with explicit
//!   sign tokens and coefficients in scientific notation with 12 significant
//!   digits;
//! * the objective's quadratic block is written `[ ... ] / 2` with doubled
//!   coefficients (CPLEX convention); quadratic-constraint blocks are written
//!   `[ ... ]` with plain coefficients;
//! * directive comments `\ vars N` and `\ objective-constant C` carry the
//!   variable count and the objective's constant term;
//! * every variable gets an explicit `Bounds` line; binaries are listed in a
//!   `Binaries` section.
//!
//! Solution files are JSON: `{status, objective, values: {"x3": v, ...}}`.
//! Imported solutions are re-audited against the originating matrices before
//! acceptance — the file format is untrusted input.

use crate::assemble::{Objective, ProblemMatrices, QuadForm};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Parsed form of an interchange file: the same mathematical content as
/// [`ProblemMatrices`] without index/tag metadata.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub n_vars: usize,
    pub objective: Objective,
    pub eq: Vec<(Vec<(usize, f64)>, f64)>,
    pub le: Vec<(Vec<(usize, f64)>, f64)>,
    /// `(linear, quad, rhs)` with `linear + quad ≤ rhs`.
    pub quad: Vec<(Vec<(usize, f64)>, Vec<(usize, usize, f64)>, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
}

fn fmt_coef(c: f64) -> String {
    format!("{:.11e}", c.abs())
}

fn push_term(out: &mut String, coef: f64, rest: &str) {
    let sign = if coef < 0.0 { '-' } else { '+' };
    let _ = write!(out, " {sign} {} {rest}", fmt_coef(coef));
}

/// Merge duplicate linear entries into a deterministic sorted list.
pub fn merge_linear(terms: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut m: BTreeMap<usize, f64> = BTreeMap::new();
    for &(v, c) in terms {
        *m.entry(v).or_insert(0.0) += c;
    }
    m.into_iter().filter(|&(_, c)| c != 0.0).collect()
}

/// Merge quadratic entries onto canonical `(min,max)` keys.
pub fn merge_quad(terms: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(i, j, c) in terms {
        *m.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
    }
    m.into_iter()
        .filter(|&(_, c)| c != 0.0)
        .map(|((i, j), c)| (i, j, c))
        .collect()
}

fn write_linear(out: &mut String, terms: &[(usize, f64)]) {
    for &(v, c) in terms {
        push_term(out, c, &format!("x{v}"));
    }
}

fn write_quad_block(out: &mut String, terms: &[(usize, usize, f64)], double: bool) {
    if terms.is_empty() {
        return;
    }
    out.push_str(" [");
    for &(i, j, c) in terms {
        let c = if double { 2.0 * c } else { c };
        if i == j {
            push_term(out, c, &format!("x{i} ^ 2"));
        } else {
            push_term(out, c, &format!("x{i} * x{j}"));
        }
    }
    out.push_str(" ]");
    if double {
        out.push_str(" / 2");
    }
}

/// Render a problem in the interchange dialect.
pub fn write_lp(prob: &ProblemMatrices) -> String {
    let mut s = String::new();
    s.push_str("\\ model interchange v1\n");
    let _ = writeln!(s, "\\ vars {}", prob.n_vars);
    if prob.objective.constant != 0.0 {
        let sign = if prob.objective.constant < 0.0 { "-" } else { "+" };
        let _ = writeln!(s, "\\ objective-constant {sign} {}", fmt_coef(prob.objective.constant));
    }
    s.push_str("Minimize\n");
    let mut obj = String::from("obj:");
    write_linear(&mut obj, &merge_linear(&prob.objective.linear));
    write_quad_block(&mut obj, &merge_quad(&prob.objective.quad.terms), true);
    s.push_str(&obj);
    s.push('\n');
    s.push_str("Subject To\n");
    for r in 0..prob.eq_rhs.len() {
        let mut row = format!("e{r}:");
        let terms: Vec<(usize, f64)> = prob.eq.row(r).map(|(c, v)| (c, v)).collect();
        write_linear(&mut row, &merge_linear(&terms));
        let rhs = prob.eq_rhs[r];
        let sign = if rhs < 0.0 { "-" } else { "+" };
        let _ = write!(row, " = {sign} {}", fmt_coef(rhs));
        s.push_str(&row);
        s.push('\n');
    }
    for r in 0..prob.le_rhs.len() {
        let mut row = format!("c{r}:");
        let terms: Vec<(usize, f64)> = prob.le.row(r).map(|(c, v)| (c, v)).collect();
        write_linear(&mut row, &merge_linear(&terms));
        let rhs = prob.le_rhs[r];
        let sign = if rhs < 0.0 { "-" } else { "+" };
        let _ = write!(row, " <= {sign} {}", fmt_coef(rhs));
        s.push_str(&row);
        s.push('\n');
    }
    for (r, qc) in prob.quad_constraints.iter().enumerate() {
        let mut row = format!("q{r}:");
        write_linear(&mut row, &merge_linear(&qc.linear));
        write_quad_block(&mut row, &merge_quad(&qc.quad.terms), false);
        let sign = if qc.rhs < 0.0 { "-" } else { "+" };
        let _ = write!(row, " <= {sign} {}", fmt_coef(qc.rhs));
        s.push_str(&row);
        s.push('\n');
    }
    let binaries: Vec<usize> = (0..prob.n_vars).filter(|&v| prob.binary[v]).collect();
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        let mut line = String::new();
        for v in binaries {
            let _ = write!(line, " x{v}");
        }
        s.push_str(&line);
        s.push('\n');
    }
    s.push_str("Bounds\n");
    for v in 0..prob.n_vars {
        let (lo, hi) = (prob.lower[v], prob.upper[v]);
        let line = if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            format!("x{v} free")
        } else if lo == hi {
            let sign = if lo < 0.0 { "-" } else { "+" };
            format!("x{v} = {sign} {}", fmt_coef(lo))
        } else {
            let lo_s = if lo == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{} {}", if lo < 0.0 { "-" } else { "+" }, fmt_coef(lo))
            };
            let hi_s = if hi == f64::INFINITY {
                "+inf".to_string()
            } else {
                format!("{} {}", if hi < 0.0 { "-" } else { "+" }, fmt_coef(hi))
            };
            format!("{lo_s} <= x{v} <= {hi_s}")
        };
        s.push_str(&line);
        s.push('\n');
    }
    s.push_str("End\n");
    s
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Tokens<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: &'a str) -> Tokens<'a> {
        Tokens { toks: line.split_whitespace().collect(), pos: 0 }
    }
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }
    fn next(&mut self) -> Option<&'a str> {
        let t = self.peek();
        self.pos += 1;
        t
    }
    fn expect(&mut self, want: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(Error::Parse(format!("expected '{want}', found {other:?}"))),
        }
    }
}

fn parse_var(tok: &str) -> Result<usize> {
    tok.strip_prefix('x')
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("expected a variable, found '{tok}'")))
}

fn parse_signed_number(t: &mut Tokens) -> Result<f64> {
    let sign = match t.next() {
        Some("+") => 1.0,
        Some("-") => -1.0,
        other => return Err(Error::Parse(format!("expected sign, found {other:?}"))),
    };
    let mag: f64 = t
        .next()
        .ok_or_else(|| Error::Parse("missing number".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad number: {e}")))?;
    Ok(sign * mag)
}

/// Parse one row body: linear terms, optional `[ quad ] (/ 2)?`, then an
/// optional relation (`=` or `<=`) and right-hand side.
fn parse_expr(
    t: &mut Tokens,
) -> Result<(Vec<(usize, f64)>, Vec<(usize, usize, f64)>, Option<(String, f64)>)> {
    let mut linear = Vec::new();
    let mut quad = Vec::new();
    loop {
        match t.peek() {
            None => return Ok((linear, quad, None)),
            Some("=") | Some("<=") => {
                let rel = t.next().unwrap().to_string();
                let rhs = parse_signed_number(t)?;
                if t.peek().is_some() {
                    return Err(Error::Parse("trailing tokens after right-hand side".into()));
                }
                return Ok((linear, quad, Some((rel, rhs))));
            }
            Some("[") => {
                t.next();
                let mut block = Vec::new();
                while t.peek() != Some("]") {
                    let c = parse_signed_number(t)?;
                    let i = parse_var(t.next().ok_or_else(|| Error::Parse("missing var".into()))?)?;
                    match t.peek() {
                        Some("^") => {
                            t.next();
                            t.expect("2")?;
                            block.push((i, i, c));
                        }
                        Some("*") => {
                            t.next();
                            let j = parse_var(
                                t.next().ok_or_else(|| Error::Parse("missing var".into()))?,
                            )?;
                            block.push((i, j, c));
                        }
                        other => {
                            return Err(Error::Parse(format!(
                                "expected '^ 2' or '* xj' in quadratic block, found {other:?}"
                            )))
                        }
                    }
                }
                t.expect("]")?;
                let halve = if t.peek() == Some("/") {
                    t.next();
                    t.expect("2")?;
                    true
                } else {
                    false
                };
                quad.extend(
                    block.into_iter().map(|(i, j, c)| (i, j, if halve { c / 2.0 } else { c })),
                );
            }
            Some(_) => {
                let c = parse_signed_number(t)?;
                let v = parse_var(t.next().ok_or_else(|| Error::Parse("missing var".into()))?)?;
                linear.push((v, c));
            }
        }
    }
}

/// Parse the interchange dialect back into matrices.
pub fn parse_lp(text: &str) -> Result<LpModel> {
    let mut model = LpModel::default();
    let mut n_vars: Option<usize> = None;
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Binaries,
        Bounds,
        Done,
    }
    let mut section = Section::Preamble;
    let mut binaries: Vec<usize> = Vec::new();
    let mut bounds: Vec<(usize, f64, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse(format!("line {}: {m}", lineno + 1));
        if let Some(rest) = line.strip_prefix('\\') {
            let mut t = Tokens::new(rest);
            match t.peek() {
                Some("vars") => {
                    t.next();
                    n_vars = Some(
                        t.next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| err("bad vars directive".into()))?,
                    );
                }
                Some("objective-constant") => {
                    t.next();
                    model.objective.constant = parse_signed_number(&mut t)?;
                }
                _ => {}
            }
            continue;
        }
        match line {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                let body = line
                    .strip_prefix("obj:")
                    .ok_or_else(|| err("objective row must start with 'obj:'".into()))?;
                let (lin, quad, rel) = parse_expr(&mut Tokens::new(body))?;
                if rel.is_some() {
                    return Err(err("objective must not carry a relation".into()));
                }
                model.objective.linear = lin;
                model.objective.quad = QuadForm { terms: quad };
            }
            Section::Rows => {
                let colon =
                    line.find(':').ok_or_else(|| err("constraint row missing label".into()))?;
                let label = &line[..colon];
                let (lin, quad, rel) = parse_expr(&mut Tokens::new(&line[colon + 1..]))?;
                let (rel, rhs) =
                    rel.ok_or_else(|| err("constraint row missing relation".into()))?;
                match (label.chars().next(), rel.as_str()) {
                    (Some('e'), "=") => model.eq.push((lin, rhs)),
                    (Some('c'), "<=") => model.le.push((lin, rhs)),
                    (Some('q'), "<=") => model.quad.push((lin, quad, rhs)),
                    _ => return Err(err(format!("unexpected row '{label}' with '{rel}'"))),
                }
            }
            Section::Binaries => {
                for tok in line.split_whitespace() {
                    binaries.push(parse_var(tok)?);
                }
            }
            Section::Bounds => {
                let mut t = Tokens::new(line);
                let first = t.next().ok_or_else(|| err("empty bounds row".into()))?;
                if first.starts_with('x') {
                    let v = parse_var(first)?;
                    match t.next() {
                        Some("free") => bounds.push((v, f64::NEG_INFINITY, f64::INFINITY)),
                        Some("=") => {
                            let val = parse_signed_number(&mut t)?;
                            bounds.push((v, val, val));
                        }
                        other => return Err(err(format!("bad bounds row, found {other:?}"))),
                    }
                } else {
                    let lo = if first == "-inf" {
                        f64::NEG_INFINITY
                    } else {
                        let mag: f64 = t
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| err("bad lower bound".into()))?;
                        if first == "-" {
                            -mag
                        } else {
                            mag
                        }
                    };
                    t.expect("<=")?;
                    let v = parse_var(t.next().ok_or_else(|| err("missing variable".into()))?)?;
                    t.expect("<=")?;
                    let hi = match t.next() {
                        Some("+inf") => f64::INFINITY,
                        Some(sign @ ("+" | "-")) => {
                            let mag: f64 = t
                                .next()
                                .and_then(|x| x.parse().ok())
                                .ok_or_else(|| err("bad upper bound".into()))?;
                            if sign == "-" {
                                -mag
                            } else {
                                mag
                            }
                        }
                        other => return Err(err(format!("bad upper bound {other:?}"))),
                    };
                    bounds.push((v, lo, hi));
                }
            }
            Section::Preamble | Section::Done => {
                return Err(err(format!("unexpected content '{line}'")));
            }
        }
    }

    let n = n_vars.ok_or_else(|| Error::Parse("missing 'vars' directive".into()))?;
    model.n_vars = n;
    model.lower = vec![0.0; n];
    model.upper = vec![f64::INFINITY; n];
    model.binary = vec![false; n];
    for (v, lo, hi) in bounds {
        if v >= n {
            return Err(Error::Parse(format!("bounds reference x{v} beyond vars {n}")));
        }
        model.lower[v] = lo;
        model.upper[v] = hi;
    }
    for v in binaries {
        if v >= n {
            return Err(Error::Parse(format!("binaries reference x{v} beyond vars {n}")));
        }
        model.binary[v] = true;
    }
    let check_terms = |terms: &[(usize, f64)]| -> Result<()> {
        match terms.iter().find(|&&(v, _)| v >= n) {
            Some(&(v, _)) => Err(Error::Parse(format!("row references x{v} beyond vars {n}"))),
            None => Ok(()),
        }
    };
    check_terms(&model.objective.linear)?;
    for &(i, j, _) in &model.objective.quad.terms {
        check_terms(&[(i, 0.0), (j, 0.0)])?;
    }
    for (terms, _) in model.eq.iter().chain(&model.le) {
        check_terms(terms)?;
    }
    for (lin, quad, _) in &model.quad {
        check_terms(lin)?;
        for &(i, j, _) in quad {
            check_terms(&[(i, 0.0), (j, 0.0)])?;
        }
    }
    Ok(model)
}

/// Compare a parsed model against the matrices it was written from; an error
/// names the first discrepancy. Used by the round-trip tests and by the
/// import audit.
pub fn check_round_trip(prob: &ProblemMatrices, lp: &LpModel, tol: f64) -> Result<()> {
    let fail = |m: String| Err(Error::Parse(format!("round-trip mismatch: {m}")));
    if lp.n_vars != prob.n_vars {
        return fail(format!("vars {} vs {}", lp.n_vars, prob.n_vars));
    }
    let close = |a: f64, b: f64| {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
            || (a == f64::INFINITY && b == f64::INFINITY)
            || (a == f64::NEG_INFINITY && b == f64::NEG_INFINITY)
    };
    if !close(lp.objective.constant, prob.objective.constant) {
        return fail("objective constant".into());
    }
    let lin_a = merge_linear(&lp.objective.linear);
    let lin_b = merge_linear(&prob.objective.linear);
    if lin_a.len() != lin_b.len()
        || lin_a.iter().zip(&lin_b).any(|(a, b)| a.0 != b.0 || !close(a.1, b.1))
    {
        return fail("objective linear terms".into());
    }
    let quad_a = merge_quad(&lp.objective.quad.terms);
    let quad_b = merge_quad(&prob.objective.quad.terms);
    if quad_a.len() != quad_b.len()
        || quad_a
            .iter()
            .zip(&quad_b)
            .any(|(a, b)| a.0 != b.0 || a.1 != b.1 || !close(a.2, b.2))
    {
        return fail("objective quadratic terms".into());
    }
    if lp.eq.len() != prob.eq_rhs.len() || lp.le.len() != prob.le_rhs.len() {
        return fail("row counts".into());
    }
    for (r, (terms, rhs)) in lp.eq.iter().enumerate() {
        let orig: Vec<(usize, f64)> = prob.eq.row(r).collect();
        let (a, b) = (merge_linear(terms), merge_linear(&orig));
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0 || !close(x.1, y.1)) {
            return fail(format!("equality row {r}"));
        }
        if !close(*rhs, prob.eq_rhs[r]) {
            return fail(format!("equality rhs {r}"));
        }
    }
    for (r, (terms, rhs)) in lp.le.iter().enumerate() {
        let orig: Vec<(usize, f64)> = prob.le.row(r).collect();
        let (a, b) = (merge_linear(terms), merge_linear(&orig));
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0 || !close(x.1, y.1)) {
            return fail(format!("inequality row {r}"));
        }
        if !close(*rhs, prob.le_rhs[r]) {
            return fail(format!("inequality rhs {r}"));
        }
    }
    if lp.quad.len() != prob.quad_constraints.len() {
        return fail("quadratic constraint count".into());
    }
    for (r, (lin, quad, rhs)) in lp.quad.iter().enumerate() {
        let qc = &prob.quad_constraints[r];
        let (a, b) = (merge_linear(lin), merge_linear(&qc.linear));
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0 || !close(x.1, y.1)) {
            return fail(format!("quadratic constraint {r} linear part"));
        }
        let (qa, qb) = (merge_quad(quad), merge_quad(&qc.quad.terms));
        if qa.len() != qb.len()
            || qa.iter().zip(&qb).any(|(x, y)| x.0 != y.0 || x.1 != y.1 || !close(x.2, y.2))
        {
            return fail(format!("quadratic constraint {r} quadratic part"));
        }
        if !close(*rhs, qc.rhs) {
            return fail(format!("quadratic constraint {r} rhs"));
        }
    }
    for v in 0..prob.n_vars {
        if !close(lp.lower[v], prob.lower[v]) || !close(lp.upper[v], prob.upper[v]) {
            return fail(format!("bounds of x{v}"));
        }
        if lp.binary[v] != prob.binary[v] {
            return fail(format!("integrality of x{v}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------------

/// External solution file: status string, objective, and `x{j}` → value map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
}

impl SolutionFile {
    pub fn from_vector(status: &str, objective: f64, x: &[f64]) -> SolutionFile {
        SolutionFile {
            status: status.to_string(),
            objective,
            values: x.iter().enumerate().map(|(v, &val)| (format!("x{v}"), val)).collect(),
        }
    }

    /// Expand the name→value map into a dense vector of length `n`; every
    /// variable must be present exactly once.
    pub fn to_vector(&self, n: usize) -> Result<Vec<f64>> {
        let mut x = vec![f64::NAN; n];
        for (name, &val) in &self.values {
            let v = parse_var(name)?;
            if v >= n {
                return Err(Error::Parse(format!("solution references {name} beyond vars {n}")));
            }
            x[v] = val;
        }
        if let Some(v) = x.iter().position(|v| v.is_nan()) {
            return Err(Error::Parse(format!("solution missing value for x{v}")));
        }
        Ok(x)
    }
}

pub fn write_solution(path: &std::path::Path, sol: &SolutionFile) -> Result<()> {
    let text = serde_json::to_string_pretty(sol)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_solution(path: &std::path::Path) -> Result<SolutionFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{assemble_full, Assembler, QuadConstraint, RowTag};
    use crate::builder::{build_boundary, build_mini, derive_net};
    use crate::index::VariableIndex;
    use crate::model::ScenarioKind;

    fn tiny_problem() -> ProblemMatrices {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        let s = asm.add_extra("AUX".into(), 0.0, f64::INFINITY);
        asm.set_bounds(0, -1.5, 2.5);
        asm.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        asm.set_bounds(2, 0.25, 0.25);
        asm.set_binary(3);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(0, 1.0), (1, 2.0)], -3.5);
        asm.add_le(RowTag::Pin { pin: 1 }, &[(1, 1.0), (3, -0.125)], 7.0);
        asm.add_linear_cost(0, 1.0);
        asm.add_linear_cost(1, -2.0);
        asm.add_quad_cost(0, 0, 0.5);
        asm.add_quad_cost(0, 1, -0.25);
        asm.add_cost_constant(1.75);
        asm.add_quad_constraint(QuadConstraint {
            tag: RowTag::GenEpigraph { k: 1 },
            quad: QuadForm { terms: vec![(0, 0, 1.0), (1, 1, 1.0)] },
            linear: vec![(s, -1.0)],
            rhs: 0.0,
        });
        asm.finish()
    }

    #[test]
    fn round_trip_preserves_every_coefficient() {
        let prob = tiny_problem();
        let text = write_lp(&prob);
        let parsed = parse_lp(&text).unwrap();
        check_round_trip(&prob, &parsed, 1e-12)
            .unwrap_or_else(|e| panic!("FAIL: {e}"));
    }

    #[test]
    fn round_trip_on_the_small_network_problem() {
        let model = build_mini(&Default::default()).unwrap();
        let (net, catalog) = derive_net(&model).unwrap();
        let boundary = build_boundary(&model, &catalog, ScenarioKind::Coordinated).unwrap();
        let prob = assemble_full(&model, &net, &catalog, &boundary).unwrap();
        let text = write_lp(&prob);
        let parsed = parse_lp(&text).unwrap();
        check_round_trip(&prob, &parsed, 1e-12)
            .unwrap_or_else(|e| panic!("FAIL: {e}"));
    }

    #[test]
    fn twelve_significant_digits_survive() {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(0, 0.123456789012345)], 9.87654321098765e-7);
        let prob = asm.finish();
        let parsed = parse_lp(&write_lp(&prob)).unwrap();
        let (terms, rhs) = &parsed.eq[0];
        assert!((terms[0].1 - 0.123456789012345).abs() < 1e-12);
        assert!((rhs - 9.87654321098765e-7).abs() < 1e-18);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_lp("Minimize\nobj: + 1e0 x0\nEnd\n").is_err(), "missing vars directive");
        let out_of_range =
            parse_lp("\\ vars 2\nMinimize\nobj: + 1e0 x0\nSubject To\ne0: + 1e0 x9 = + 1e0\nEnd\n");
        assert!(out_of_range.is_err(), "FAIL: x9 beyond declared count must be rejected");
        let bad_rel =
            parse_lp("\\ vars 1\nMinimize\nobj: + 1e0 x0\nSubject To\ne0: + 1e0 x0 >= + 1e0\nEnd\n");
        assert!(bad_rel.is_err(), "FAIL: '>=' must be rejected");
    }

    #[test]
    fn solution_files_round_trip_and_validate() {
        let sol = SolutionFile::from_vector("optimal", 4.25, &[1.0, -2.0, 0.5]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sol.json");
        write_solution(&path, &sol).unwrap();
        let back = read_solution(&path).unwrap();
        assert_eq!(back.status, "optimal");
        assert_eq!(back.to_vector(3).unwrap(), vec![1.0, -2.0, 0.5]);
        assert!(back.to_vector(4).is_err(), "FAIL: missing variable must error");
    }
}
