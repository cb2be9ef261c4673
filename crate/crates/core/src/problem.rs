//! Problem files: a TOML document describing the phase, the kernel and the
//! harness settings, validated into a [`ProblemSpec`] with located diagnostics.
//!
//! ```toml
//! dimension = 2
//! terms = [ { exps = [2, 1], coeff = "1" }, { exps = [1, 3], coeff = "1" } ]
//!
//! [[block]]          # optional; default is one unweighted block per variable
//! vars = [1]         # 1-based
//! alpha = "1/2"
//!
//! [kernel]
//! kind = "weight-only"   # or "weight-times-bounded"
//! support = "1/4"
//!
//! [overrides]
//! o = 2
//! a0 = "1/3"
//! ```

use std::ops::Range;

use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{Diagnostic, Error, Result};
use crate::poly::{Block, BlockStructure, ExponentVector, SparsePolynomial};
use crate::rational::{parse_rational, qi, to_f64, Q};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn to_q(&self) -> std::result::Result<Q, String> {
        match self {
            Num::Int(i) => Ok(qi(*i)),
            Num::Float(f) if f.is_finite() => parse_rational(&format!("{f}")).map_err(|e| e.to_string()),
            Num::Float(_) => Err("number must be finite".into()),
            Num::Text(s) => parse_rational(s).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    dimension: Spanned<i64>,
    terms: Spanned<Vec<Spanned<RawTerm>>>,
    #[serde(default, rename = "block")]
    blocks: Vec<Spanned<RawBlock>>,
    seed: Option<Spanned<i64>>,
    kernel: Option<RawKernel>,
    overrides: Option<RawOverrides>,
    sublevel: Option<RawSublevel>,
    sharpness: Option<RawSharpness>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    exps: Spanned<Vec<i64>>,
    coeff: Spanned<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    vars: Spanned<Vec<i64>>,
    alpha: Spanned<Num>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    kind: Option<Spanned<String>>,
    factor: Option<Spanned<Num>>,
    support: Option<Spanned<Num>>,
    bounded_below: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverrides {
    o: Option<Spanned<i64>>,
    a0: Option<Spanned<Num>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSublevel {
    r: Option<Spanned<Num>>,
    r0: Option<Spanned<Num>>,
    budget: Option<Spanned<i64>>,
    eps_min: Option<Spanned<Num>>,
    eps_max: Option<Spanned<Num>>,
    points: Option<Spanned<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSharpness {
    s: Option<Spanned<Num>>,
    p: Option<Spanned<Num>>,
    q: Option<Spanned<Num>>,
    r: Option<Spanned<Vec<Num>>>,
    grid: Option<Spanned<Vec<i64>>>,
    half_widths: Option<Spanned<Vec<Num>>>,
    n_box: Option<Spanned<i64>>,
    max_doublings: Option<Spanned<i64>>,
    quad_subdiv: Option<Spanned<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    WeightOnly,
    WeightTimesBounded,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::WeightOnly => "weight-only",
            KernelKind::WeightTimesBounded => "weight-times-bounded",
        }
    }
}

/// `K(t) = factor * prod |t_k|^{-alpha_k}` for `|t_i| <= support`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDescriptor {
    pub kind: KernelKind,
    /// Constant value of the bounded factor used by the numerical harness.
    pub factor: Q,
    pub support: Q,
    /// `K >= c * prod |t_k|^{-alpha_k}` near 0.
    pub bounded_below: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub o: Option<u32>,
    pub a0: Option<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublevelConfig {
    pub r: Q,
    pub r0: Q,
    pub budget: usize,
    pub eps_min: Q,
    pub eps_max: Q,
    pub points: usize,
}

impl Default for SublevelConfig {
    fn default() -> Self {
        Self {
            r: Q::new(1.into(), 4.into()),
            r0: Q::new(1.into(), 4.into()),
            budget: 100_000,
            eps_min: Q::new(1.into(), 100_000_000.into()),
            eps_max: Q::new(1.into(), 100.into()),
            points: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessConfig {
    pub s: Q,
    pub p: Q,
    pub q: Q,
    pub r: Vec<Q>,
    /// Points per axis, `x_{n+1}` last; `None` uses the defaults of the box test.
    pub grid: Option<Vec<usize>>,
    pub half_widths: Option<Vec<Q>>,
    pub n_box: usize,
    pub max_doublings: usize,
    pub quad_subdiv: usize,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        Self {
            s: Q::new(1.into(), 10.into()),
            p: qi(2),
            q: qi(4),
            r: (3..=6).map(|j| Q::new(1.into(), (1i64 << j).into())).collect(),
            grid: None,
            half_widths: None,
            n_box: 8,
            max_doublings: 3,
            quad_subdiv: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub phase: SparsePolynomial,
    pub blocks: BlockStructure,
    pub kernel: KernelDescriptor,
    pub overrides: Overrides,
    pub sublevel: SublevelConfig,
    pub sharpness: SharpnessConfig,
    pub seed: Option<u64>,
}

struct Collector<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

impl Collector<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn push(&mut self, span: Option<Range<usize>>, field: impl Into<String>, rule: impl Into<String>) {
        let line = span.map(|s| self.line(s));
        self.diags.push(Diagnostic {
            line,
            field: field.into(),
            rule: rule.into(),
        });
    }

    fn rational(&mut self, v: &Spanned<Num>, field: &str) -> Option<Q> {
        match v.get_ref().to_q() {
            Ok(x) => Some(x),
            Err(e) => {
                self.push(Some(v.span()), field, e);
                None
            }
        }
    }

    fn positive(&mut self, v: &Spanned<Num>, field: &str) -> Option<Q> {
        let x = self.rational(v, field)?;
        if x.is_positive() {
            Some(x)
        } else {
            self.push(Some(v.span()), field, "must be positive");
            None
        }
    }

    fn count(&mut self, v: &Spanned<i64>, field: &str, min: i64) -> Option<usize> {
        let x = *v.get_ref();
        if x < min {
            self.push(Some(v.span()), field, format!("must be an integer >= {min}"));
            None
        } else {
            Some(x as usize)
        }
    }
}

/// Parses and validates a problem file; every violation found is reported.
pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let mut c = Collector { text, diags: Vec::new() };
        let message = e.message().trim().to_string();
        let field = field_from_message(&message);
        c.push(e.span(), field, message);
        Error::Validation(c.diags)
    })?;
    let mut c = Collector { text, diags: Vec::new() };

    let dim = match *raw.dimension.get_ref() {
        n if n >= 1 => n as usize,
        _ => {
            c.push(Some(raw.dimension.span()), "dimension", "must be an integer >= 1");
            return Err(Error::Validation(c.diags));
        }
    };

    // terms
    let mut terms = Vec::new();
    let mut seen = std::collections::BTreeMap::new();
    if raw.terms.get_ref().is_empty() {
        c.push(Some(raw.terms.span()), "terms", "phase must not be identically zero");
    }
    for (i, t) in raw.terms.get_ref().iter().enumerate() {
        let field = format!("terms[{i}]");
        let term = t.get_ref();
        let exps = term.exps.get_ref();
        if exps.len() != dim {
            c.push(
                Some(term.exps.span()),
                format!("{field}.exps"),
                format!("has {} entries but dimension is {dim}", exps.len()),
            );
            continue;
        }
        if exps.iter().any(|&e| e < 0 || e > i64::from(u32::MAX)) {
            c.push(Some(term.exps.span()), format!("{field}.exps"), "exponents must be nonnegative integers");
            continue;
        }
        let Some(coeff) = c.rational(&term.coeff, &format!("{field}.coeff")) else {
            continue;
        };
        if coeff.is_zero() {
            c.push(Some(term.coeff.span()), format!("{field}.coeff"), "zero coefficients are not allowed");
            continue;
        }
        let ev = ExponentVector(exps.iter().map(|&e| e as u32).collect());
        if let Some(prev) = seen.insert(ev.clone(), i) {
            c.push(Some(t.span()), field, format!("repeats the monomial of terms[{prev}]"));
            continue;
        }
        if ev.degree() <= 1 {
            c.push(
                Some(t.span()),
                field,
                "phase must vanish to second order at 0 (no constant or linear terms)",
            );
            continue;
        }
        terms.push((ev.0, coeff));
    }

    // blocks
    let mut blocks = Vec::new();
    let mut owner = vec![None; dim];
    for (i, b) in raw.blocks.iter().enumerate() {
        let field = format!("block[{i}]");
        let rb = b.get_ref();
        let mut vars = Vec::new();
        for &v in rb.vars.get_ref() {
            if v < 1 || v as usize > dim {
                c.push(Some(rb.vars.span()), format!("{field}.vars"), format!("variable {v} is outside 1..={dim}"));
                continue;
            }
            let v0 = v as usize - 1;
            if let Some(j) = owner[v0] {
                c.push(Some(rb.vars.span()), format!("{field}.vars"), format!("variable {v} already belongs to block[{j}]"));
                continue;
            }
            owner[v0] = Some(i);
            vars.push(v0);
        }
        if rb.vars.get_ref().is_empty() {
            c.push(Some(rb.vars.span()), format!("{field}.vars"), "a block needs at least one variable");
        }
        let Some(alpha) = c.rational(&rb.alpha, &format!("{field}.alpha")) else {
            continue;
        };
        let l = rb.vars.get_ref().len();
        if alpha.is_negative() || alpha >= qi(l as i64) {
            c.push(
                Some(rb.alpha.span()),
                format!("{field}.alpha"),
                format!("out of range: need 0 <= alpha < l = {l}"),
            );
            continue;
        }
        blocks.push(Block { vars, alpha });
    }
    if !raw.blocks.is_empty() {
        let missing: Vec<String> = owner
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(v, _)| (v + 1).to_string())
            .collect();
        if !missing.is_empty() {
            c.push(
                raw.blocks.first().map(|b| b.span()),
                "block",
                format!("blocks must cover every variable; missing {}", missing.join(", ")),
            );
        }
    }

    // kernel
    let mut kernel = KernelDescriptor {
        kind: KernelKind::WeightOnly,
        factor: Q::one(),
        support: Q::new(1.into(), 4.into()),
        bounded_below: true,
    };
    if let Some(k) = &raw.kernel {
        if let Some(kind) = &k.kind {
            match kind.get_ref().as_str() {
                "weight-only" => kernel.kind = KernelKind::WeightOnly,
                "weight-times-bounded" => kernel.kind = KernelKind::WeightTimesBounded,
                other => c.push(
                    Some(kind.span()),
                    "kernel.kind",
                    format!("unknown kind '{other}' (expected weight-only or weight-times-bounded)"),
                ),
            }
        }
        if let Some(f) = &k.factor {
            if let Some(x) = c.positive(f, "kernel.factor") {
                kernel.factor = x;
            }
        }
        if let Some(s) = &k.support {
            if let Some(x) = c.positive(s, "kernel.support") {
                kernel.support = x;
            }
        }
        kernel.bounded_below = k
            .bounded_below
            .unwrap_or(kernel.kind == KernelKind::WeightOnly);
    }

    // overrides
    let mut overrides = Overrides::default();
    if let Some(o) = &raw.overrides {
        if let Some(v) = &o.o {
            overrides.o = c.count(v, "overrides.o", 0).map(|x| x as u32);
        }
        if let Some(v) = &o.a0 {
            overrides.a0 = c.positive(v, "overrides.a0");
        }
    }

    // sublevel
    let mut sublevel = SublevelConfig::default();
    if let Some(s) = &raw.sublevel {
        if let Some(v) = &s.r0 {
            sublevel.r0 = c.positive(v, "sublevel.r0").unwrap_or(sublevel.r0);
        }
        match &s.r {
            Some(v) => {
                if let Some(r) = c.positive(v, "sublevel.r") {
                    if r > sublevel.r0 {
                        c.push(Some(v.span()), "sublevel.r", "must not exceed sublevel.r0");
                    }
                    sublevel.r = r;
                }
            }
            None => sublevel.r = sublevel.r0.clone(),
        }
        if let Some(v) = &s.budget {
            sublevel.budget = c.count(v, "sublevel.budget", 10_000).unwrap_or(sublevel.budget);
        }
        if let Some(v) = &s.points {
            sublevel.points = c.count(v, "sublevel.points", 6).unwrap_or(sublevel.points);
        }
        let half = Q::new(1.into(), 2.into());
        if let Some(v) = &s.eps_min {
            sublevel.eps_min = c.positive(v, "sublevel.eps_min").unwrap_or(sublevel.eps_min);
        }
        if let Some(v) = &s.eps_max {
            match c.positive(v, "sublevel.eps_max") {
                Some(x) if x >= half => c.push(Some(v.span()), "sublevel.eps_max", "must be below 1/2"),
                Some(x) => sublevel.eps_max = x,
                None => {}
            }
        }
        if sublevel.eps_min >= sublevel.eps_max {
            c.push(None, "sublevel.eps_min", "must be below sublevel.eps_max");
        }
    }

    // sharpness
    let mut sharp = SharpnessConfig::default();
    if let Some(s) = &raw.sharpness {
        if let Some(v) = &s.s {
            sharp.s = c.rational(v, "sharpness.s").unwrap_or(sharp.s);
        }
        for (v, name, slot) in [(&s.p, "sharpness.p", &mut sharp.p), (&s.q, "sharpness.q", &mut sharp.q)] {
            if let Some(v) = v {
                match c.rational(v, name) {
                    Some(x) if x > Q::one() => *slot = x,
                    Some(_) => c.push(Some(v.span()), name, "exponent must exceed 1"),
                    None => {}
                }
            }
        }
        if let Some(v) = &s.r {
            let mut rs = Vec::new();
            for x in v.get_ref() {
                match x.to_q() {
                    Ok(r) if r.is_positive() && r < Q::one() => rs.push(r),
                    Ok(_) => c.push(Some(v.span()), "sharpness.r", "values must lie in (0, 1)"),
                    Err(e) => c.push(Some(v.span()), "sharpness.r", e),
                }
            }
            sharp.r = rs;
        }
        if let Some(v) = &s.grid {
            if v.get_ref().len() != dim + 1 || v.get_ref().iter().any(|&m| m < 2) {
                c.push(
                    Some(v.span()),
                    "sharpness.grid",
                    format!("needs {} entries, each >= 2", dim + 1),
                );
            } else {
                sharp.grid = Some(v.get_ref().iter().map(|&m| m as usize).collect());
            }
        }
        if let Some(v) = &s.half_widths {
            let parsed: Vec<Q> = v.get_ref().iter().filter_map(|x| x.to_q().ok()).collect();
            if parsed.len() != dim + 1 || parsed.iter().any(|x| !x.is_positive()) {
                c.push(
                    Some(v.span()),
                    "sharpness.half_widths",
                    format!("needs {} positive entries", dim + 1),
                );
            } else {
                sharp.half_widths = Some(parsed);
            }
        }
        if let Some(v) = &s.n_box {
            sharp.n_box = c.count(v, "sharpness.n_box", 1).unwrap_or(sharp.n_box);
        }
        if let Some(v) = &s.max_doublings {
            sharp.max_doublings = c.count(v, "sharpness.max_doublings", 0).unwrap_or(sharp.max_doublings);
        }
        if let Some(v) = &s.quad_subdiv {
            sharp.quad_subdiv = c.count(v, "sharpness.quad_subdiv", 1).unwrap_or(sharp.quad_subdiv);
        }
    }

    let seed = raw.seed.as_ref().and_then(|v| c.count(v, "seed", 0)).map(|s| s as u64);

    if !c.diags.is_empty() {
        return Err(Error::Validation(c.diags));
    }
    let phase = SparsePolynomial::new(dim, terms).map_err(|e| validation(None, "terms", e))?;
    phase.validate_phase().map_err(|e| validation(Some(c.line(raw.terms.span())), "terms", e))?;
    let blocks = if raw.blocks.is_empty() {
        BlockStructure::unweighted(dim)
    } else {
        BlockStructure::new(dim, blocks).map_err(|e| validation(None, "block", e))?
    };
    Ok(ProblemSpec {
        dimension: dim,
        phase,
        blocks,
        kernel,
        overrides,
        sublevel,
        sharpness: sharp,
        seed,
    })
}

fn validation(line: Option<usize>, field: &str, e: Error) -> Error {
    Error::Validation(vec![Diagnostic {
        line,
        field: field.into(),
        rule: e.to_string(),
    }])
}

fn field_from_message(message: &str) -> String {
    if let Some(rest) = message.split('`').nth(1) {
        if message.contains("missing field") || message.contains("unknown field") {
            return rest.to_string();
        }
    }
    "document".into()
}

impl SublevelConfig {
    pub fn eps_schedule(&self) -> Result<Vec<f64>> {
        crate::sublevel::geometric_schedule(to_f64(&self.eps_min), to_f64(&self.eps_max), self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn diags(text: &str) -> Vec<Diagnostic> {
        match parse_spec(text) {
            Err(Error::Validation(d)) => d,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn weighted_cubic() {
        let spec = parse_spec(
            r#"
dimension = 1
terms = [{ exps = [3], coeff = "1" }]

[[block]]
vars = [1]
alpha = "1/2"
"#,
        )
        .unwrap();
        assert_eq!(spec.blocks.alphas(), vec![q(1, 2)]);
        assert_eq!(spec.kernel.kind, KernelKind::WeightOnly);
        assert!(spec.kernel.bounded_below);
    }

    #[test]
    fn defaults_to_unweighted_singletons() {
        let spec = parse_spec("dimension = 2\nterms = [{ exps = [2, 0], coeff = 1 }, { exps = [0, 2], coeff = 1.5 }]\n").unwrap();
        assert!(spec.blocks.all_singletons() && spec.blocks.all_alpha_zero());
        assert_eq!(spec.phase.coefficient(&ExponentVector(vec![0, 2])), Some(&q(3, 2)));
        assert_eq!(spec.sharpness, SharpnessConfig::default());
    }

    #[test]
    fn linear_term_is_rejected_with_its_line() {
        let d = diags("dimension = 2\nterms = [\n  { exps = [1, 0], coeff = \"1\" },\n  { exps = [0, 2], coeff = \"1\" },\n]\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].line, Some(3));
        assert!(d[0].rule.contains("second order"), "{}", d[0].rule);
    }

    #[test]
    fn alpha_out_of_range() {
        let d = diags("dimension = 1\nterms = [{ exps = [2], coeff = \"1\" }]\n[[block]]\nvars = [1]\nalpha = 1\n");
        assert_eq!(d[0].field, "block[0].alpha");
        assert_eq!(d[0].line, Some(5));
        assert!(d[0].rule.contains("range"));
    }

    #[test]
    fn collects_several_problems() {
        let d = diags(
            "dimension = 2\nterms = [{ exps = [2], coeff = \"1\" }, { exps = [0, 2], coeff = \"0\" }]\n[kernel]\nsupport = \"-1\"\n",
        );
        let fields: Vec<&str> = d.iter().map(|x| x.field.as_str()).collect();
        assert_eq!(fields, vec!["terms[0].exps", "terms[1].coeff", "kernel.support"]);
    }

    #[test]
    fn syntax_and_schema_errors_are_located() {
        let d = diags("dimension = 1\nterms = [{ exps = [2], coeff = \"1\" }]\ncolour = 3\n");
        assert_eq!(d[0].line, Some(3));
        let d = diags("terms = []\n");
        assert_eq!(d[0].field, "dimension");
        let d = diags("dimension = 1\nterms = [{ exps = [2], coeff = \"1/0\" }]\n");
        assert!(d[0].rule.contains("zero denominator"));
    }

    #[test]
    fn blocks_must_cover() {
        let d = diags("dimension = 2\nterms = [{ exps = [2, 2], coeff = \"1\" }]\n[[block]]\nvars = [1]\nalpha = 0\n");
        assert!(d[0].rule.contains("missing 2"));
    }

    #[test]
    fn harness_sections() {
        let spec = parse_spec(
            r#"
dimension = 1
terms = [{ exps = [3], coeff = "1" }]
seed = 9
[sublevel]
r0 = 1
budget = 1000000
eps_min = 1e-8
[sharpness]
s = "-1/10"
r = ["1/4", "1/8", "1/16", "1/32"]
grid = [512, 2048]
"#,
        )
        .unwrap();
        assert_eq!(spec.sublevel.r, qi(1));
        assert_eq!(spec.sublevel.eps_min, q(1, 100_000_000));
        assert_eq!(spec.sharpness.s, q(-1, 10));
        assert_eq!(spec.sharpness.grid, Some(vec![512, 2048]));
        assert_eq!(spec.seed, Some(9));
    }
}
