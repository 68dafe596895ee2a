//! Command implementations shared by the `towerlab` binary and the
//! acceptance tests: running `.twr` scripts, the built-in verification
//! suite, and the named example families.

use crate::arith::{binom_mod_p, FieldSpec, Mono, MultiPoly, RatFunc, DEFAULT_BUDGET};
use crate::corpus::{twisted_levels, verification_corpus, CorpusEntry};
use crate::diffops::{algebra_of_tower, frobenius_partial, restrict, DiffOperator, OperatorAlgebra};
use crate::dsl::{
    eval_expr_with, parse_expr, parse_script, print_canonical, BindKind, Expr, ScriptExpr,
    Statement,
};
use crate::error::{Error, Result};
use crate::frobenius::MonomialBasis;
use crate::jacobson::{
    extend_one_foliation, splitting_check, tower_to_sequence, unpack, JacobsonSequence,
    PLieAlgebra,
};
use crate::linalg::{fp_kernel, kernel, MatK, SubspaceK};
use crate::subfields::{
    build_tower, build_tower_explicit, exponent_step_check, first_integrals_probe, realize,
    PowerTower, SubfieldPresentation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

/// Runtime options shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub budget: usize,
    pub seed: u64,
    pub json: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            budget: budget_from_env(),
            seed: 1,
            json: false,
        }
    }
}

/// The dimension cap: TOWERLAB_BUDGET when set (and parseable), else the
/// library default. A `--budget` flag takes precedence over both.
pub fn budget_from_env() -> usize {
    std::env::var("TOWERLAB_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<CheckResult>,
    pub ok: bool,
}

impl Report {
    pub fn new(command: &str, checks: Vec<CheckResult>) -> Report {
        let ok = checks.iter().all(|c| c.status != Status::Fail);
        Report {
            command: command.to_string(),
            checks,
            ok,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            match c.status {
                Status::Info => out.push_str(&format!("{}: {}\n", c.name, c.detail)),
                Status::Pass => out.push_str(&format!("PASS {} ({} ms)\n", c.name, c.millis)),
                Status::Fail => {
                    out.push_str(&format!("FAIL {}: {} ({} ms)\n", c.name, c.detail, c.millis))
                }
                Status::Skip => out.push_str(&format!("SKIP {}: {}\n", c.name, c.detail)),
            }
        }
        out.push_str(if self.ok { "ok\n" } else { "FAILED\n" });
        out
    }
}

/// Process exit code for a command outcome: 0 all checks passed, 1 a check
/// or assertion failed, 2 usage/parse errors, 3 budget exhaustion.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) => {
            if r.ok {
                0
            } else {
                1
            }
        }
        Err(Error::BudgetExceeded { .. }) => 3,
        Err(
            Error::Parse { .. }
            | Error::Script { .. }
            | Error::InvalidParams(_)
            | Error::Io(_)
            | Error::BadPrime(_)
            | Error::BadFieldSpec(_),
        ) => 2,
        Err(_) => 1,
    }
}

fn timed<F: FnOnce() -> Result<(Status, String)>>(name: String, f: F) -> CheckResult {
    let start = Instant::now();
    let (status, detail) = match f() {
        Ok(x) => x,
        Err(Error::BudgetExceeded { needed, cap }) => (
            Status::Skip,
            format!("budget exceeded: needs dimension {needed}, cap {cap}"),
        ),
        Err(e) => (Status::Fail, e.to_string()),
    };
    CheckResult {
        name,
        status,
        detail,
        millis: start.elapsed().as_millis(),
    }
}

fn pass_or_fail(ok: bool, detail: String) -> (Status, String) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

// ---------------------------------------------------------------------------
// Script runner
// ---------------------------------------------------------------------------

/// A runtime value in a `.twr` script.
#[derive(Debug, Clone)]
pub enum Value {
    Element(RatFunc),
    Subfield(SubfieldPresentation),
    Tower(PowerTower),
    Seq(JacobsonSequence),
    Alg(OperatorAlgebra),
    Probe(Vec<MultiPoly>),
    Degrees(Vec<u64>),
    Ranks(Vec<u32>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Element(_) => "element",
            Value::Subfield(_) => "subfield",
            Value::Tower(_) => "tower",
            Value::Seq(_) => "seq",
            Value::Alg(_) => "alg",
            Value::Probe(_) => "probe",
            Value::Degrees(_) => "degrees",
            Value::Ranks(_) => "ranks",
        }
    }

    pub fn render(&self) -> String {
        match self {
            Value::Element(f) => print_canonical(f),
            Value::Subfield(w) => {
                let gens: Vec<String> = w.generators().iter().map(print_canonical).collect();
                format!("<{}>", gens.join(", "))
            }
            Value::Tower(t) => format!("tower(depth {}, degrees {:?})", t.depth(), t.degrees()),
            Value::Seq(s) => format!("jacobson(depth {}, ranks {:?})", s.depth(), s.ranks()),
            Value::Alg(a) => format!("diffalg(depth {}, dims {:?})", a.depth(), a.dims()),
            Value::Probe(ps) => {
                let mut strs: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                strs.sort();
                format!("{{{}}}", strs.join(", "))
            }
            Value::Degrees(d) => format!("{d:?}"),
            Value::Ranks(r) => format!("{r:?}"),
        }
    }
}

fn kind_matches(kind: BindKind, v: &Value) -> bool {
    matches!(
        (kind, v),
        (BindKind::Element, Value::Element(_))
            | (BindKind::Subfield, Value::Subfield(_))
            | (BindKind::Tower, Value::Tower(_))
            | (BindKind::Seq, Value::Seq(_))
            | (BindKind::Alg, Value::Alg(_))
            | (BindKind::Probe, Value::Probe(_))
    )
}

/// Equality of two derivation algebras over the same carrier subfield,
/// possibly computed in different coordinate systems: each side's generators
/// must lie in the other side's span after transporting by images on the
/// other p-basis.
pub fn algebras_equal(a: &PLieAlgebra, b: &PLieAlgebra) -> Result<bool> {
    if a.carrier().level() != b.carrier().level()
        || !a.carrier().space().equals(b.carrier().space())
        || a.rank() != b.rank()
    {
        return Ok(false);
    }
    for (src, dst) in [(a, b), (b, a)] {
        for t in src.generators() {
            let images: Vec<RatFunc> = dst
                .module()
                .p_basis()
                .iter()
                .map(|u| src.module().apply(t, u))
                .collect::<Result<_>>()?;
            let transported = dst.module().derivation_from_images(images)?;
            if !dst
                .space()
                .contains_vector(&dst.module().coords(&transported)?)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn sequences_equal(a: &JacobsonSequence, b: &JacobsonSequence) -> Result<bool> {
    if a.depth() != b.depth() {
        return Ok(false);
    }
    for i in 1..=a.depth() {
        if !algebras_equal(a.algebra(i), b.algebra(i))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn towers_equal(a: &PowerTower, b: &PowerTower) -> bool {
    a.depth() == b.depth()
        && a.spec() == b.spec()
        && (0..=a.depth()).all(|n| a.level(n).space().equals(b.level(n).space()))
}

fn operator_algebras_equal(a: &OperatorAlgebra, b: &OperatorAlgebra) -> Result<bool> {
    if a.depth() != b.depth() || a.dims() != b.dims() {
        return Ok(false);
    }
    let spec = a.tower().spec();
    if spec != b.tower().spec() {
        return Ok(false);
    }
    for n in 0..=a.depth() {
        let basis = MonomialBasis::new(spec, n as u32)?;
        if !a.level_span(n, &basis).equals(&b.level_span(n, &basis)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Value equality as used by `assert`. Subfield presentations are compared
/// by the spans they generate at realization levels 1 and 2 (the finite
/// truncation this library computes with).
pub fn values_equal(a: &Value, b: &Value) -> Result<bool> {
    match (a, b) {
        (Value::Element(x), Value::Element(y)) => Ok(x == y),
        (Value::Subfield(x), Value::Subfield(y)) => {
            for h in [1, 2] {
                if !realize(x, h)?.space().equals(realize(y, h)?.space()) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (Value::Tower(x), Value::Tower(y)) => Ok(towers_equal(x, y)),
        (Value::Seq(x), Value::Seq(y)) => sequences_equal(x, y),
        (Value::Alg(x), Value::Alg(y)) => operator_algebras_equal(x, y),
        (Value::Probe(x), Value::Probe(y)) => {
            let key = |ps: &Vec<MultiPoly>| {
                let mut v: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                v.sort();
                v
            };
            Ok(key(x) == key(y))
        }
        (Value::Degrees(x), Value::Degrees(y)) => Ok(x == y),
        (Value::Ranks(x), Value::Ranks(y)) => Ok(x == y),
        _ => Err(Error::InvalidParams(format!(
            "cannot compare a {} with a {}",
            a.kind(),
            b.kind()
        ))),
    }
}

fn eval_script_expr(
    e: &ScriptExpr,
    spec: &Arc<FieldSpec>,
    env: &HashMap<String, Value>,
) -> Result<Value> {
    let eval_elem = |x: &Expr| -> Result<RatFunc> {
        eval_expr_with(x, spec, &|name| {
            if let Some(Value::Element(f)) = env.get(name) {
                return Some(f.clone());
            }
            spec.var_index(name).map(|i| RatFunc::var(spec, i))
        })
    };
    let pres_of = |gens: &[Expr]| -> Result<SubfieldPresentation> {
        let g: Vec<RatFunc> = gens.iter().map(eval_elem).collect::<Result<_>>()?;
        SubfieldPresentation::new(spec, g)
    };
    match e {
        // A bare name may refer to any bound value, not just an element.
        ScriptExpr::Element(Expr::Ident(name)) if env.contains_key(name) => {
            Ok(env[name].clone())
        }
        ScriptExpr::Element(x) => Ok(Value::Element(eval_elem(x)?)),
        ScriptExpr::Gens(gens) => Ok(Value::Subfield(pres_of(gens)?)),
        ScriptExpr::Tower { base, depth } => {
            match eval_script_expr(base, spec, env)? {
                Value::Subfield(p) => Ok(Value::Tower(build_tower(&p, *depth)?)),
                v => Err(Error::InvalidParams(format!(
                    "tower(...) expects a subfield, got a {}",
                    v.kind()
                ))),
            }
        }
        ScriptExpr::Levels(levels) => {
            let per: Vec<SubfieldPresentation> = levels
                .iter()
                .map(|g| pres_of(g))
                .collect::<Result<_>>()?;
            Ok(Value::Tower(build_tower_explicit(&per)?))
        }
        ScriptExpr::Degrees(v) => match eval_script_expr(v, spec, env)? {
            Value::Tower(t) => Ok(Value::Degrees(t.degrees().to_vec())),
            v => Err(Error::InvalidParams(format!(
                "degrees(...) expects a tower, got a {}",
                v.kind()
            ))),
        },
        ScriptExpr::Ranks(v) => match eval_script_expr(v, spec, env)? {
            Value::Seq(s) => Ok(Value::Ranks(s.ranks())),
            Value::Tower(t) => Ok(Value::Ranks(tower_to_sequence(&t)?.ranks())),
            v => Err(Error::InvalidParams(format!(
                "ranks(...) expects a sequence or tower, got a {}",
                v.kind()
            ))),
        },
        ScriptExpr::Jacobson(v) => match eval_script_expr(v, spec, env)? {
            Value::Tower(t) => Ok(Value::Seq(tower_to_sequence(&t)?)),
            v => Err(Error::InvalidParams(format!(
                "jacobson(...) expects a tower, got a {}",
                v.kind()
            ))),
        },
        ScriptExpr::Diffalg(v) => match eval_script_expr(v, spec, env)? {
            Value::Tower(t) => Ok(Value::Alg(algebra_of_tower(&t)?)),
            v => Err(Error::InvalidParams(format!(
                "diffalg(...) expects a tower, got a {}",
                v.kind()
            ))),
        },
        ScriptExpr::Unpack(v) => match eval_script_expr(v, spec, env)? {
            Value::Alg(a) => Ok(Value::Seq(unpack(&a)?)),
            v => Err(Error::InvalidParams(format!(
                "unpack(...) expects an operator algebra, got a {}",
                v.kind()
            ))),
        },
        ScriptExpr::Integrals { tower, bound } => {
            match eval_script_expr(tower, spec, env)? {
                Value::Tower(t) => Ok(Value::Probe(first_integrals_probe(&t, *bound)?)),
                v => Err(Error::InvalidParams(format!(
                    "integrals(...) expects a tower, got a {}",
                    v.kind()
                ))),
            }
        }
        ScriptExpr::Extend(v) => match eval_script_expr(v, spec, env)? {
            Value::Subfield(p) => Ok(Value::Subfield(extend_one_foliation(&p)?)),
            v => Err(Error::InvalidParams(format!(
                "extend(...) expects a subfield, got a {}",
                v.kind()
            ))),
        },
    }
}

/// Execute a parsed script. `print` statements become info entries in the
/// report; `assert` statements become pass/fail checks.
pub fn run_script(src: &str, config: &RunConfig) -> Result<Report> {
    let script = parse_script(src)?;
    let decl = script.field_decl();
    let vars: Vec<&str> = decl.vars.iter().map(String::as_str).collect();
    let spec = FieldSpec::with_budget(decl.p, &vars, config.budget)?;
    let mut env: HashMap<String, Value> = HashMap::new();
    let mut checks = Vec::new();

    for stmt in script.statements() {
        match stmt {
            Statement::Field(_) => {}
            Statement::Bind {
                kind,
                name,
                value,
                line,
            } => {
                let v = eval_script_expr(value, &spec, &env)?;
                if !kind_matches(*kind, &v) {
                    return Err(Error::Script {
                        line: *line,
                        col: 1,
                        msg: format!(
                            "`{name}` is declared as a {kind:?} but the value is a {}",
                            v.kind()
                        ),
                    });
                }
                env.insert(name.clone(), v);
            }
            Statement::Print { value, line } => {
                let v = eval_script_expr(value, &spec, &env)?;
                checks.push(CheckResult {
                    name: format!("print:{line}"),
                    status: Status::Info,
                    detail: v.render(),
                    millis: 0,
                });
            }
            Statement::Assert {
                lhs,
                rhs,
                negated,
                line,
            } => {
                let start = Instant::now();
                let a = eval_script_expr(lhs, &spec, &env)?;
                let b = eval_script_expr(rhs, &spec, &env)?;
                let equal = values_equal(&a, &b)?;
                let holds = equal != *negated;
                checks.push(CheckResult {
                    name: format!("assert:{line}"),
                    status: if holds { Status::Pass } else { Status::Fail },
                    detail: format!(
                        "{} {} {}",
                        a.render(),
                        if *negated { "!=" } else { "==" },
                        b.render()
                    ),
                    millis: start.elapsed().as_millis(),
                });
            }
        }
    }
    Ok(Report::new("run", checks))
}

/// `towerlab run <file>`: parse and execute a `.twr` script.
pub fn cmd_run(path: &str, config: &RunConfig) -> Result<Report> {
    let src = std::fs::read_to_string(path)?;
    run_script(&src, config)
}

// ---------------------------------------------------------------------------
// Named verification checks (shared with the acceptance tests)
// ---------------------------------------------------------------------------

/// The generator x + A_1 y^p + ... + A_{n-1} y^(p^(n-1)).
fn graph_generator(spec: &Arc<FieldSpec>, a: &[u32]) -> RatFunc {
    crate::corpus::shifted_graph_generator(spec, a)
}

/// Closed-form generator operator predicted for level n of the graph family:
/// symbol(y, p^(n-1)) - sum_j A_j^(p^(n-1-j)) symbol(x, p^(n-1-j)).
pub fn graph_expected_operator(spec: &Arc<FieldSpec>, a: &[u32], n: usize) -> DiffOperator {
    let p = spec.p();
    let mut d = DiffOperator::symbol(spec, 1, p.pow(n as u32 - 1));
    for j in 1..n {
        let power = p.pow((n - 1 - j) as u32);
        let c = spec.fp_pow(a[j - 1] % p, power);
        let term = DiffOperator::symbol(spec, 0, power)
            .scale(&RatFunc::constant(spec, c));
        d = d.sub(&term).expect("same spec");
    }
    d
}

/// Does the single derivation obtained by restricting `op` to the carrier of
/// `alg` generate `alg` as a module over the carrier? This is span equality
/// up to multiplication by units.
pub fn operator_generates(op: &DiffOperator, alg: &PLieAlgebra) -> Result<bool> {
    let module = alg.module();
    let images: Vec<RatFunc> = module
        .p_basis()
        .iter()
        .map(|b| op.apply(b))
        .collect::<Result<_>>()?;
    let t = module.derivation_from_images(images)?;
    let rows: Vec<Vec<RatFunc>> = module
        .products()
        .iter()
        .map(|u| module.coords(&module.scale(u, &t)?))
        .collect::<Result<_>>()?;
    let span = SubspaceK::from_rows(module.spec(), module.coord_dim(), rows);
    Ok(span.equals(alg.space()))
}

/// Criterion group 1: the unpacked sequence of the graph family is generated
/// level-by-level by the predicted closed-form operators.
pub fn check_closed_form_generators() -> Vec<CheckResult> {
    let cases: [(u32, &[u32], usize); 2] = [(2, &[1, 1], 3), (3, &[1, 2], 2)];
    let mut out = Vec::new();
    for (p, a, depth) in cases {
        out.push(timed(format!("closed-form-generators/p{p}"), || {
            let spec = FieldSpec::new(p, &["x", "y"])?;
            let levels = crate::corpus::shifted_graph_levels(&spec, a, depth);
            let t = build_tower_explicit(&levels)?;
            let alg = algebra_of_tower(&t)?;
            let seq = unpack(&alg)?;
            let mut details = Vec::new();
            for n in 1..=depth {
                let expected = graph_expected_operator(&spec, a, n);
                if !operator_generates(&expected, seq.algebra(n))? {
                    return Ok((
                        Status::Fail,
                        format!("level {n}: {expected} does not generate the unpacked algebra"),
                    ));
                }
                details.push(format!("level {n}: {expected}"));
            }
            Ok((Status::Pass, details.join("; ")))
        }));
    }
    out
}

fn fp_row_rank(p: u32, cols: usize, rows: &[Vec<u32>]) -> usize {
    cols - fp_kernel(p, cols, rows).len()
}

/// Criterion group 2: the all-ones graph tower at p = 2 has constant degree
/// 2 and its truncated first integrals are exactly the polynomials in
/// f = x^2 + x + y^2, certified member-by-member and at depth 5.
pub fn check_first_integrals() -> Vec<CheckResult> {
    vec![timed("first-integrals/artin-schreier".into(), || {
        let spec = FieldSpec::new(2, &["x", "y"])?;
        let t = build_tower_explicit(&twisted_levels(&spec, 3))?;
        if t.degrees() != [2, 2, 2] {
            return Ok((Status::Fail, format!("degrees {:?}", t.degrees())));
        }
        let probe = first_integrals_probe(&t, 8)?;
        for b in &probe {
            let f = RatFunc::from_poly(b.clone());
            for n in 1..=t.depth() {
                if !t.level(n).contains(&f) {
                    return Ok((
                        Status::Fail,
                        format!("probe element {b} is not in level {n}"),
                    ));
                }
            }
        }
        // f = x^2 + x + y^2 (an Artin-Schreier first integral) and its
        // powers must survive to any depth; check depth 5 independently.
        let x = RatFunc::var(&spec, 0);
        let y = RatFunc::var(&spec, 1);
        let f = x.pow(2).add(&x)?.add(&y.pow(2))?;
        let t5 = build_tower_explicit(&twisted_levels(&spec, 5))?;
        let probe5 = first_integrals_probe(&t5, 8)?;
        // Expected basis: f^k for k = 0..4 (degrees 0, 2, 4, 6, 8).
        let expected: Vec<MultiPoly> = (0..5).map(|k| f.pow(k).num().clone()).collect();
        let mut support: Vec<Mono> = Vec::new();
        for poly in probe5.iter().chain(&expected) {
            for (m, _) in poly.terms() {
                if !support.contains(m) {
                    support.push(m.clone());
                }
            }
        }
        let vec_of = |poly: &MultiPoly| -> Vec<u32> {
            support
                .iter()
                .map(|m| poly.terms().find(|(mm, _)| *mm == m).map_or(0, |(_, v)| v))
                .collect()
        };
        let got_rows: Vec<Vec<u32>> = probe5.iter().map(&vec_of).collect();
        let want_rows: Vec<Vec<u32>> = expected.iter().map(&vec_of).collect();
        let both: Vec<Vec<u32>> = got_rows.iter().chain(&want_rows).cloned().collect();
        let (rg, rw, rb) = (
            fp_row_rank(2, support.len(), &got_rows),
            fp_row_rank(2, support.len(), &want_rows),
            fp_row_rank(2, support.len(), &both),
        );
        let same_span = rg == 5 && rw == 5 && rb == 5;
        Ok(pass_or_fail(
            same_span,
            format!(
                "depth-5 probe spans {} dims, powers of x^2 + x + y^2 span {rw}, union {rb}",
                rg
            ),
        ))
    })]
}

fn corpus_or_fail(seed: u64) -> std::result::Result<Vec<CorpusEntry>, Vec<CheckResult>> {
    verification_corpus(seed).map_err(|e| {
        vec![CheckResult {
            name: "corpus".into(),
            status: Status::Fail,
            detail: e.to_string(),
            millis: 0,
        }]
    })
}

/// Criterion group 3: tower -> sequence -> tower and algebra -> unpack
/// round trips over the whole corpus.
pub fn check_round_trips(seed: u64) -> Vec<CheckResult> {
    let corpus = match corpus_or_fail(seed) {
        Ok(c) => c,
        Err(v) => return v,
    };
    corpus
        .iter()
        .map(|entry| {
            timed(format!("round-trip/{}", entry.label), || {
                let t = entry.build()?;
                let seq = tower_to_sequence(&t)?;
                let t2 = crate::jacobson::sequence_to_tower(&seq)?;
                if !towers_equal(&t, &t2) {
                    return Ok((Status::Fail, "recovered tower differs".into()));
                }
                let alg = algebra_of_tower(&t)?;
                let seq2 = unpack(&alg)?;
                if !sequences_equal(&seq, &seq2)? {
                    return Ok((Status::Fail, "unpacked sequence differs".into()));
                }
                Ok((Status::Pass, format!("degrees {:?}", t.degrees())))
            })
        })
        .collect()
}

/// Criterion group 4: dim_K(D_n) = [K : W_n] and p^rank(F_m) = [W_{m-1} : W_m]
/// across the corpus.
pub fn check_dimension_laws(seed: u64) -> Vec<CheckResult> {
    let corpus = match corpus_or_fail(seed) {
        Ok(c) => c,
        Err(v) => return v,
    };
    corpus
        .iter()
        .map(|entry| {
            timed(format!("dimension-law/{}", entry.label), || {
                let t = entry.build()?;
                let p = t.spec().p() as u64;
                let alg = algebra_of_tower(&t)?;
                let mut index = 1u64;
                for n in 0..=t.depth() {
                    if n > 0 {
                        index *= t.degrees()[n - 1];
                    }
                    if alg.dims()[n] as u64 != index {
                        return Ok((
                            Status::Fail,
                            format!("dim D_{n} = {} but [K : W_{n}] = {index}", alg.dims()[n]),
                        ));
                    }
                }
                let seq = tower_to_sequence(&t)?;
                for m in 1..=t.depth() {
                    let expected = t.degrees()[m - 1];
                    let got = p.pow(seq.algebra(m).rank());
                    if got != expected {
                        return Ok((
                            Status::Fail,
                            format!("p^rank(F_{m}) = {got} but the step degree is {expected}"),
                        ));
                    }
                }
                Ok((Status::Pass, format!("dims {:?}", alg.dims())))
            })
        })
        .collect()
}

/// Criterion group 5: step degrees are nonincreasing powers of p and every
/// step has exponent at most one.
pub fn check_degree_monotonicity(seed: u64) -> Vec<CheckResult> {
    let corpus = match corpus_or_fail(seed) {
        Ok(c) => c,
        Err(v) => return v,
    };
    corpus
        .iter()
        .map(|entry| {
            timed(format!("degree-monotonicity/{}", entry.label), || {
                let t = entry.build()?;
                let p = t.spec().p() as u64;
                let degrees = t.degrees();
                for w in degrees.windows(2) {
                    if w[1] > w[0] {
                        return Ok((Status::Fail, format!("degrees increase: {degrees:?}")));
                    }
                }
                for &d in degrees {
                    let mut v = d;
                    while v > 1 && v % p == 0 {
                        v /= p;
                    }
                    if v != 1 {
                        return Ok((Status::Fail, format!("{d} is not a power of {p}")));
                    }
                }
                if !exponent_step_check(&t) {
                    return Ok((Status::Fail, "a step has exponent above one".into()));
                }
                Ok((Status::Pass, format!("degrees {degrees:?}")))
            })
        })
        .collect()
}

/// Criterion group 6: restricting the divided-power symbol of order p^m to
/// K^(p^m) agrees with the Frobenius-twisted partial derivative.
pub fn check_frobenius_partials() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for p in [2u32, 3] {
        for m in [1u32, 2] {
            for i in 0..2usize {
                out.push(timed(
                    format!("frobenius-partial/p{p}-m{m}-var{i}"),
                    move || {
                        let spec = FieldSpec::new(p, &["x", "y"])?;
                        let w = realize(&SubfieldPresentation::new(&spec, vec![])?, m)?;
                        let sym = DiffOperator::symbol(&spec, i, p.pow(m));
                        let a = restrict(&sym, &w)?;
                        let b = frobenius_partial(&w.relevel(a.source().level())?, i, m)?;
                        Ok(pass_or_fail(
                            a == b,
                            format!("symbol of order {}^{m} on variable {i}", p),
                        ))
                    },
                ));
            }
        }
    }
    out
}

fn rand_poly(rng: &mut ChaCha8Rng, spec: &Arc<FieldSpec>, max_exp: u32, max_terms: u32) -> MultiPoly {
    let n = spec.num_vars();
    let p = spec.p();
    let terms = rng.gen_range(1..=max_terms);
    let mut out = MultiPoly::zero(spec);
    for _ in 0..terms {
        let mono = Mono((0..n).map(|_| rng.gen_range(0..=max_exp)).collect());
        out = out
            .add(&MultiPoly::monomial(spec, mono, rng.gen_range(1..p)))
            .expect("same spec");
    }
    out
}

fn rand_ratfunc(rng: &mut ChaCha8Rng, spec: &Arc<FieldSpec>) -> RatFunc {
    let num = rand_poly(rng, spec, 2, 2);
    if rng.gen_bool(0.4) {
        let mut den = rand_poly(rng, spec, 1, 2);
        if den.is_zero() {
            den = MultiPoly::one(spec);
        }
        RatFunc::new(num, den).expect("den nonzero")
    } else {
        RatFunc::from_poly(num)
    }
}

fn rand_operator(rng: &mut ChaCha8Rng, spec: &Arc<FieldSpec>) -> DiffOperator {
    let n = spec.num_vars();
    let mut d = DiffOperator::zero(spec);
    for _ in 0..2 {
        let e = Mono((0..n).map(|_| rng.gen_range(0..=2u32)).collect());
        let mut sym = DiffOperator::identity(spec);
        for (i, &a) in e.0.iter().enumerate() {
            if a > 0 {
                sym = sym.compose(&DiffOperator::symbol(spec, i, a)).expect("same spec");
            }
        }
        d = d
            .add(&sym.scale(&RatFunc::from_poly(rand_poly(rng, spec, 1, 2))))
            .expect("same spec");
    }
    d
}

/// Criterion group 7: randomized consistency oracles — composition versus
/// iterated application, the mod-p binomial table against Pascal's triangle,
/// and rank-nullity for the exact linear algebra.
pub fn check_arithmetic_oracles(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(timed("oracle/compose-apply".into(), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f6d70);
        for p in [2u32, 3] {
            let spec = FieldSpec::new(p, &["x", "y"])?;
            for _ in 0..100 {
                let d1 = rand_operator(&mut rng, &spec);
                let d2 = rand_operator(&mut rng, &spec);
                let f = rand_ratfunc(&mut rng, &spec);
                let lhs = d1.compose(&d2)?.apply(&f)?;
                let rhs = d1.apply(&d2.apply(&f)?)?;
                if lhs != rhs {
                    return Ok((
                        Status::Fail,
                        format!("({d1}) o ({d2}) disagrees with iterated application on {f}"),
                    ));
                }
            }
        }
        Ok((Status::Pass, "200 random composition triples".into()))
    }));
    out.push(timed("oracle/binomial".into(), || {
        for p in [2u32, 3, 5, 7] {
            // Pascal's triangle mod p as the independent oracle.
            let mut row = vec![1u32];
            for b in 0..=50u64 {
                for (a, &c) in row.iter().enumerate() {
                    if binom_mod_p(b, a as u64, p) != c {
                        return Ok((
                            Status::Fail,
                            format!("binom({b}, {a}) mod {p} disagrees with Pascal"),
                        ));
                    }
                }
                let mut next = vec![1u32];
                for k in 1..row.len() {
                    next.push((row[k - 1] + row[k]) % p);
                }
                next.push(1);
                row = next;
            }
        }
        Ok((Status::Pass, "binomials up to 50 at p in {2, 3, 5, 7}".into()))
    }));
    out.push(timed("oracle/rank-nullity".into(), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x72616e6b);
        for p in [2u32, 3] {
            let spec = FieldSpec::new(p, &["x", "y"])?;
            for _ in 0..25 {
                let rows: Vec<Vec<RatFunc>> = (0..3)
                    .map(|_| (0..5).map(|_| rand_ratfunc(&mut rng, &spec)).collect())
                    .collect();
                let m = MatK::from_rows(&spec, 5, rows);
                let rank =
                    SubspaceK::from_rows(&spec, 5, m.rows_iter().map(<[_]>::to_vec).collect())
                        .dim();
                let nullity = kernel(&m).dim();
                if rank + nullity != 5 {
                    return Ok((
                        Status::Fail,
                        format!("rank {rank} + nullity {nullity} != 5"),
                    ));
                }
            }
        }
        Ok((Status::Pass, "50 random matrices".into()))
    }));
    out
}

/// Criterion group 8: one-step foliation extension and the splitting check
/// on every proper corpus subfield.
pub fn check_foliation_extension(seed: u64) -> Vec<CheckResult> {
    let corpus = match corpus_or_fail(seed) {
        Ok(c) => c,
        Err(v) => return v,
    };
    let mut out = Vec::new();
    for entry in &corpus {
        let pres = match (&entry.presentation, &entry.explicit_levels) {
            (Some(p), _) => p.clone(),
            (None, Some(levels)) => levels[0].clone(),
            _ => continue,
        };
        out.push(timed(format!("foliation-extension/{}", entry.label), || {
            let w1 = realize(&pres, 1)?;
            if w1.codegree() == 1 {
                return Ok((
                    Status::Pass,
                    "codegree 1 at level 1; nothing to extend".into(),
                ));
            }
            let pres2 = extend_one_foliation(&pres)?;
            let w2 = realize(&pres2, 2)?;
            let split = splitting_check(&w1, &w2)?;
            Ok(pass_or_fail(
                split,
                format!(
                    "[W_1 : W_2] = {}",
                    (w2.codegree() / w1.relevel(2)?.codegree())
                ),
            ))
        }));
    }
    out
}

/// The bundled example scripts, embedded so the verifier does not depend on
/// the working directory.
pub fn golden_scripts() -> &'static [(&'static str, &'static str)] {
    &[
        ("tutorial", include_str!("../scripts/tutorial.twr")),
        ("twisted", include_str!("../scripts/twisted.twr")),
    ]
}

/// Criterion group 9: print-then-parse identity on fuzzed elements and on
/// the bundled scripts, which must also execute cleanly.
pub fn check_parser_round_trip(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(timed("parser/element-round-trip".into(), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70727365);
        for p in [2u32, 3] {
            let spec = FieldSpec::new(p, &["x", "y"])?;
            for _ in 0..250 {
                let f = rand_ratfunc(&mut rng, &spec);
                let text = print_canonical(&f);
                let back = crate::dsl::eval_expr(&parse_expr(&text, &spec)?, &spec)?;
                if back != f {
                    return Ok((Status::Fail, format!("`{text}` reparsed differently")));
                }
                if print_canonical(&back) != text {
                    return Ok((Status::Fail, format!("printer unstable on `{text}`")));
                }
            }
        }
        Ok((Status::Pass, "500 fuzzed elements".into()))
    }));
    for (name, src) in golden_scripts() {
        out.push(timed(format!("parser/script-{name}"), || {
            let once = parse_script(src)?;
            let printed = once.to_string();
            let twice = parse_script(&printed)?;
            if twice.to_string() != printed {
                return Ok((Status::Fail, "printed script is not a fixpoint".into()));
            }
            let report = run_script(src, &RunConfig::default())?;
            Ok(pass_or_fail(
                report.ok,
                format!("{} statements, script checks ok", once.statements().len()),
            ))
        }));
    }
    out
}

/// `towerlab verify`: every named check group, in a fixed order.
pub fn cmd_verify(config: &RunConfig) -> Result<Report> {
    let mut checks = Vec::new();
    checks.extend(check_closed_form_generators());
    checks.extend(check_first_integrals());
    checks.extend(check_round_trips(config.seed));
    checks.extend(check_dimension_laws(config.seed));
    checks.extend(check_degree_monotonicity(config.seed));
    checks.extend(check_frobenius_partials());
    checks.extend(check_arithmetic_oracles(config.seed));
    checks.extend(check_foliation_extension(config.seed));
    checks.extend(check_parser_round_trip(config.seed));
    Ok(Report::new("verify", checks))
}

// ---------------------------------------------------------------------------
// Example families
// ---------------------------------------------------------------------------

/// Parameters accepted by `towerlab example`.
#[derive(Debug, Clone, Default)]
pub struct ExampleParams {
    pub p: Option<u32>,
    pub depth: Option<usize>,
    pub a: Option<Vec<u32>>,
}

fn info(name: &str, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: Status::Info,
        detail,
        millis: 0,
    }
}

fn example_ekedahl(params: &ExampleParams, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let p = params.p.unwrap_or(2);
    let depth = params.depth.unwrap_or(if p == 2 { 3 } else { 2 });
    let a = params
        .a
        .clone()
        .unwrap_or_else(|| vec![1; depth.saturating_sub(1)]);
    if depth == 0 || a.len() < depth - 1 {
        return Err(Error::InvalidParams(format!(
            "the graph family at depth {depth} needs at least {} coefficients",
            depth.saturating_sub(1)
        )));
    }
    let spec = FieldSpec::with_budget(p, &["x", "y"], config.budget)?;
    let levels = crate::corpus::shifted_graph_levels(&spec, &a, depth);
    let t = build_tower_explicit(&levels)?;
    let alg = algebra_of_tower(&t)?;
    let seq = unpack(&alg)?;
    let mut checks = vec![info(
        "tower",
        format!(
            "W_n = k({}, y^(p^n)) at p = {p}, degrees {:?}",
            print_canonical(&graph_generator(&spec, &a[..depth - 1])),
            t.degrees()
        ),
    )];
    for n in 1..=depth {
        let expected = graph_expected_operator(&spec, &a, n);
        let start = Instant::now();
        let ok = operator_generates(&expected, seq.algebra(n))?;
        checks.push(CheckResult {
            name: format!("level-{n}-generator"),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: format!("F_{n} is generated by {expected}"),
            millis: start.elapsed().as_millis(),
        });
    }
    Ok(checks)
}

fn example_nonintegrable(params: &ExampleParams, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let p = params.p.unwrap_or(2);
    let depth = params.depth.unwrap_or(3);
    let spec = FieldSpec::with_budget(p, &["x", "y"], config.budget)?;
    let t = build_tower_explicit(&twisted_levels(&spec, depth))?;
    let mut checks = vec![info(
        "tower",
        format!("all-ones graph family at p = {p}, degrees {:?}", t.degrees()),
    )];
    checks.push(timed("constant-degree".into(), || {
        Ok(pass_or_fail(
            t.degrees().iter().all(|&d| d == p as u64),
            format!("degrees {:?}", t.degrees()),
        ))
    }));
    // Contrary to the family's name, it carries the polynomial first
    // integral f = x^p - x - y^p: every level contains f.
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);
    let f = x.pow(p).sub(&x)?.sub(&y.pow(p))?;
    checks.push(timed("artin-schreier-integral".into(), || {
        for n in 1..=t.depth() {
            if !t.level(n).contains(&f) {
                return Ok((
                    Status::Fail,
                    format!("{} is not in level {n}", print_canonical(&f)),
                ));
            }
        }
        Ok((
            Status::Pass,
            format!("{} lies in every level", print_canonical(&f)),
        ))
    }));
    let probe = first_integrals_probe(&t, 2 * p)?;
    let mut strs: Vec<String> = probe.iter().map(|b| b.to_string()).collect();
    strs.sort();
    checks.push(info(
        "first-integrals-probe",
        format!("degree <= {}: {{{}}}", 2 * p, strs.join(", ")),
    ));
    Ok(checks)
}

fn example_transcendental(params: &ExampleParams, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let p = params.p.unwrap_or(2);
    let depth = params.depth.unwrap_or(if p == 2 { 3 } else { 2 });
    let spec = FieldSpec::with_budget(p, &["x", "y"], config.budget)?;
    let pres = SubfieldPresentation::new(&spec, vec![RatFunc::var(&spec, 0)])?;
    let t = build_tower(&pres, depth)?;
    let seq = tower_to_sequence(&t)?;
    let mut checks = vec![info(
        "tower",
        format!("tower of k(x) inside k(x, y) at p = {p}"),
    )];
    checks.push(timed("constant-degree-p".into(), || {
        Ok(pass_or_fail(
            t.degrees() == vec![p as u64; depth],
            format!("degrees {:?}", t.degrees()),
        ))
    }));
    checks.push(timed("rank-one".into(), || {
        Ok(pass_or_fail(
            seq.ranks() == vec![1; depth],
            format!("ranks {:?}", seq.ranks()),
        ))
    }));
    Ok(checks)
}

fn example_ppower(params: &ExampleParams, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let p = params.p.unwrap_or(2);
    let depth = params.depth.unwrap_or(if p == 2 { 3 } else { 2 });
    let spec = FieldSpec::with_budget(p, &["x", "y"], config.budget)?;
    let pres = SubfieldPresentation::new(&spec, vec![])?;
    let t = build_tower(&pres, depth)?;
    let seq = tower_to_sequence(&t)?;
    let n = spec.num_vars() as u32;
    let mut checks = vec![info(
        "tower",
        format!("iterated Frobenius tower K, K^p, K^(p^2), ... at p = {p}"),
    )];
    checks.push(timed("full-degree-steps".into(), || {
        Ok(pass_or_fail(
            t.degrees() == vec![(p as u64).pow(n); depth],
            format!("degrees {:?}", t.degrees()),
        ))
    }));
    checks.push(timed("full-rank".into(), || {
        Ok(pass_or_fail(
            seq.ranks() == vec![n; depth],
            format!("ranks {:?}", seq.ranks()),
        ))
    }));
    Ok(checks)
}

/// `towerlab example <name>`: run one of the bundled families with optional
/// p / depth / coefficient overrides.
pub fn cmd_example(name: &str, params: &ExampleParams, config: &RunConfig) -> Result<Report> {
    let checks = match name {
        "ekedahl" => example_ekedahl(params, config)?,
        "nonintegrable" => example_nonintegrable(params, config)?,
        "transcendental" => example_transcendental(params, config)?,
        "ppower" => example_ppower(params, config)?,
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown example `{other}`; available: ekedahl, nonintegrable, transcendental, ppower"
            )))
        }
    };
    Ok(Report::new(&format!("example {name}"), checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_runner_executes_the_tutorial() {
        let (_, src) = golden_scripts()[0];
        let report = run_script(src, &RunConfig::default()).unwrap();
        assert!(report.ok, "{}", report.render_human());
        assert!(report.checks.iter().any(|c| c.status == Status::Info));
        // The report serializes to a single JSON document.
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(parsed["ok"], serde_json::Value::Bool(true));
    }

    #[test]
    fn assert_failure_flips_ok_and_exit_code() {
        let src = "field K = GF(2)(x, y)\nassert x == y\n";
        let outcome = run_script(src, &RunConfig::default());
        let report = outcome.as_ref().unwrap();
        assert!(!report.ok);
        assert_eq!(exit_code(&outcome), 1);
    }

    #[test]
    fn parse_errors_exit_with_usage_code() {
        let outcome = run_script("field K = GF(2)(x, y)\nprint x +\n", &RunConfig::default());
        assert!(outcome.is_err());
        assert_eq!(exit_code(&outcome), 2);
    }

    #[test]
    fn budget_errors_exit_with_budget_code() {
        let config = RunConfig {
            budget: 4,
            ..RunConfig::default()
        };
        let src = "field K = GF(2)(x, y)\ntower T = tower(<x>, depth = 3)\nprint degrees(T)\n";
        let outcome = run_script(src, &config);
        assert!(matches!(outcome, Err(Error::BudgetExceeded { .. })));
        assert_eq!(exit_code(&outcome), 3);
    }

    #[test]
    fn example_families_pass_with_defaults() {
        let config = RunConfig::default();
        for name in ["ekedahl", "nonintegrable", "transcendental", "ppower"] {
            let report = cmd_example(name, &ExampleParams::default(), &config).unwrap();
            assert!(report.ok, "example {name}:\n{}", report.render_human());
        }
        assert!(matches!(
            cmd_example("bogus", &ExampleParams::default(), &config),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn script_value_equalities() {
        let src = "\
field K = GF(2)(x, y)
subfield W = <x + y^2>
subfield W2 = <x + y^2, frob(x + y^2, 1)>
assert W == W2
tower T = tower(W, depth = 2)
tower T2 = levels(<x + y^2>, <x + y^2, frob(x, 2), frob(y, 2)>)
assert T == T2
seq S = jacobson(T)
alg A = diffalg(T)
assert unpack(A) == S
assert ranks(S) == ranks(T)
";
        let report = run_script(src, &RunConfig::default()).unwrap();
        assert!(report.ok, "{}", report.render_human());
    }
}
