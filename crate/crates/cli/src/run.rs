//! Subcommand pipelines.

use crate::report::{golden_compare, parse_golden, section_of, Report};
use crate::scenario::{Mode, Scenario};
use crate::{CliError, Command, ModeArg, RunArgs};
use effcon::constraint_factory::{
    check_first_class, close_constraint_set, hierarchy, vocabulary, ConstraintSet, Label,
};
use effcon::moment_space::parse_bracket_expr;
use effcon::reduction_engine::{
    check_uncertainty, detect_inconsistency, find_observables, flow_rank, gauge_fix_and_dirac, gauge_flow,
    in_span, reality_condition, truncate_system, verify_observable, DiracStructure, ElimPolicy,
    ObservableAnsatz, ReductionConfig, Status, TruncatedSystem, TruncationMode,
};
use effcon::symbolic_ring::{Labels, ScalarExpr};
use effcon::weyl_algebra::{parse_operator, OperatorPoly};

/// Closure gives up after this many rounds.
const MAX_ROUNDS: u32 = 4;

pub struct Outcome {
    pub report: Report,
    /// 0 success, 1 inconsistency or golden mismatch.
    pub code: i32,
}

struct Ctx {
    sc: Scenario,
    labels: Labels,
    op: OperatorPoly,
    cfg: ReductionConfig,
    kmax: u32,
    goldens: Vec<(String, String)>,
}

impl Ctx {
    fn new(args: &RunArgs, sharp: Option<u32>) -> Result<Ctx, CliError> {
        let mut sc = Scenario::load(&args.scenario)?;
        if let Some(t) = &args.time {
            sc.time = Some(t.clone());
        }
        let labels = sc.labels();
        let op = parse_operator(&sc.constraint, &labels).map_err(|e| CliError::Parse(format!("constraint: {e}")))?;
        let mut order = args.order.unwrap_or(sc.order);
        let mut mode = match args.mode {
            Some(ModeArg::Sharp) => Mode::Sharp,
            Some(ModeArg::Graded) => Mode::Graded,
            None => sc.mode.clone(),
        };
        if let Some(n) = sharp {
            order = n;
            mode = Mode::Sharp;
        }
        let policy = match sc.time_pair()? {
            Some(i) => ElimPolicy::time(i),
            None => ElimPolicy { pairs: (0..sc.pairs.len()).collect(), physical: None },
        };
        let mode = match mode {
            Mode::Graded => TruncationMode::Graded,
            Mode::Sharp => TruncationMode::Sharp,
        };
        let mut goldens = sc.golden.clone();
        if let Some(g) = &args.golden {
            let text = std::fs::read_to_string(g)
                .map_err(|e| CliError::Usage(format!("cannot read golden file {}: {e}", g.display())))?;
            for (k, v) in parse_golden(&text)? {
                goldens.retain(|(a, _)| *a != k);
                goldens.push((k, v));
            }
        }
        let kmax = args.kmax.unwrap_or(sc.kmax);
        Ok(Ctx { sc, labels, op, cfg: ReductionConfig { order, mode, policy }, kmax, goldens })
    }

    fn header(&self, command: &str) -> Report {
        let mut r = Report::default();
        r.head("scenario", if self.sc.name.is_empty() { "unnamed" } else { &self.sc.name });
        r.head("hash", self.sc.hash.clone());
        r.head("command", command);
        r.head("order", self.cfg.order.to_string());
        r.head("mode", self.cfg.mode.name());
        r.head("time", self.sc.time.clone().unwrap_or_else(|| "none".into()));
        r.head("kmax", self.kmax.to_string());
        r.head("weight", self.sc.weight.to_string());
        r
    }

    fn set(&self) -> Result<ConstraintSet, CliError> {
        let words = vocabulary(self.sc.pairs.len(), self.sc.power_var()?, self.kmax);
        Ok(ConstraintSet::from_labels(&self.op, &hierarchy(&words, self.sc.weight), self.cfg.order)?)
    }

    fn system(&self) -> Result<TruncatedSystem, CliError> {
        Ok(TruncatedSystem::build(&self.set()?, &self.cfg)?)
    }

    fn lt(&self, l: &Label) -> String {
        l.to_text(&self.labels)
    }

    fn named(&self) -> Result<Vec<(String, ScalarExpr)>, CliError> {
        self.sc.named.iter().map(|(k, v)| Ok((k.clone(), self.sc.expr(v)?))).collect()
    }
}

fn status_text(s: &Status, labels: &Labels) -> String {
    match s {
        Status::Pending => "pending".into(),
        Status::Solved(v) => format!("solved {}", labels.var_text(v)),
        Status::Dependent => "dependent".into(),
        Status::Duplicate(l) => format!("duplicate of {}", l.to_text(labels)),
        Status::Hard(e) => format!("hard {}", e.to_text(labels)),
        Status::Soft(v, _) => format!("soft {}", labels.var_text(v)),
        Status::Unresolved(e) => format!("unresolved {}", e.to_text(labels)),
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Bracket { expr, scenario, .. } => bracket(expr, scenario.as_deref()),
        Command::Generate(a) => generate(&Ctx::new(a, None)?),
        Command::Close(a) => close(&Ctx::new(a, None)?),
        Command::Truncate(a) => truncate(&Ctx::new(a, None)?),
        Command::Solve(a) => {
            let c = Ctx::new(a, None)?;
            let mut r = c.header("solve");
            let sys = c.system()?;
            let code = solve_into(&c, &sys, &mut r);
            finish(&c, r, code, Some(&sys), None)
        }
        Command::Flows(a) => {
            let c = Ctx::new(a, None)?;
            let mut r = c.header("flows");
            let sys = c.system()?;
            flows_into(&c, &sys, &mut r)?;
            finish(&c, r, 0, Some(&sys), None)
        }
        Command::Observables(a) => {
            let c = Ctx::new(a, None)?;
            let mut r = c.header("observables");
            let sys = c.system()?;
            observables_into(&c, &sys, &mut r, true)?;
            finish(&c, r, 0, Some(&sys), None)
        }
        Command::Dirac(a) => {
            let c = Ctx::new(a, None)?;
            let mut r = c.header("dirac");
            let sys = c.system()?;
            let d = dirac_into(&c, &sys, &mut r)?;
            finish(&c, r, 0, Some(&sys), Some(&d))
        }
        Command::Check { run, sharp } => check(&Ctx::new(run, *sharp)?),
    }
}

fn bracket(expr: &str, scenario: Option<&std::path::Path>) -> Result<Outcome, CliError> {
    let labels = match scenario {
        Some(p) => Scenario::load(p)?.labels(),
        None => Labels::numbered(1),
    };
    let v = parse_bracket_expr(expr, &labels)?;
    let mut r = Report::default();
    r.head("command", "bracket");
    r.head("input", expr);
    r.expr("bracket.value", &v, &labels);
    Ok(Outcome { report: r, code: 0 })
}

fn generate(c: &Ctx) -> Result<Outcome, CliError> {
    let mut r = c.header("generate");
    let set = c.set()?;
    r.text("count.constraints", set.len());
    for x in &set.constraints {
        r.expr(format!("constraint.{}", c.lt(&x.label)), &x.expr, &c.labels);
    }
    Ok(Outcome { report: r, code: 0 })
}

fn close(c: &Ctx) -> Result<Outcome, CliError> {
    let mut r = c.header("close");
    let rep = close_constraint_set(&c.set()?, &c.cfg, MAX_ROUNDS)?;
    r.text("closure.closed", rep.closed);
    r.text("closure.rounds", rep.rounds);
    r.text("closure.size", rep.set.len());
    for (i, l) in rep.added.iter().enumerate() {
        r.text(format!("closure.added.{}", i + 1), c.lt(l));
    }
    let fails = check_first_class(&rep.set, &c.cfg)?;
    r.text("first_class.failures", fails.len());
    for f in &fails {
        r.expr(format!("first_class.{{{},{}}}", c.lt(&f.a), c.lt(&f.b)), &f.residue, &c.labels);
    }
    let code = i32::from(!rep.closed || !fails.is_empty());
    if code != 0 {
        r.message(format!("constraint set is not closed and first class ({} failing brackets)", fails.len()));
    }
    Ok(Outcome { report: r, code })
}

fn truncate(c: &Ctx) -> Result<Outcome, CliError> {
    let mut r = c.header("truncate");
    let sys = truncate_system(&c.set()?, c.cfg.order, c.cfg.mode)?;
    for e in &sys.entries {
        r.expr(format!("truncated.{}", c.lt(&e.label)), &e.truncated, &c.labels);
    }
    for e in &sys.entries {
        r.text(format!("status.{}", c.lt(&e.label)), status_text(&e.status, &c.labels));
    }
    Ok(Outcome { report: r, code: 0 })
}

/// Returns 1 when a hard or soft inconsistency is found.
fn solve_into(c: &Ctx, sys: &TruncatedSystem, r: &mut Report) -> i32 {
    for e in &sys.entries {
        r.text(format!("status.{}", c.lt(&e.label)), status_text(&e.status, &c.labels));
    }
    r.text("count.independent", sys.independent().len());
    for s in &sys.table {
        r.expr(format!("solution.{}", c.labels.var_text(&s.var)), &s.rhs, &c.labels);
    }
    for (i, a) in sys.assumptions.iter().enumerate() {
        r.expr(format!("assumption.{}", i + 1), a, &c.labels);
    }
    let inc = detect_inconsistency(sys);
    for line in inc.lines(&c.labels) {
        r.message(line);
    }
    i32::from(!inc.is_consistent())
}

fn flows_into(c: &Ctx, sys: &TruncatedSystem, r: &mut Report) -> Result<(), CliError> {
    let gens = sys.free_generators(sys.order());
    let gens_all: Vec<(String, Label, i64)> = if c.sc.flows.is_empty() {
        sys.independent().iter().map(|e| (c.lt(&e.label), e.label, 1)).collect()
    } else {
        c.sc.flows
            .iter()
            .map(|(k, v)| c.sc.signed_label(v).map(|(l, s)| (k.clone(), l, s)))
            .collect::<Result<_, _>>()?
    };
    for (name, label, sign) in &gens_all {
        let rec = gauge_flow(sys, label, &gens).map_err(|e| CliError::Usage(format!("flow {name}: {e}")))?;
        for (v, e) in rec.flows {
            r.expr(format!("flow.{name}.{}", c.labels.var_text(&v)), &e.mul(&ScalarExpr::int(*sign)), &c.labels);
        }
    }
    let labels: Vec<Label> = sys.independent().iter().map(|e| e.label).collect();
    r.text("flow_rank.independent", flow_rank(sys, &labels, &gens)?);
    Ok(())
}

fn observables_into(c: &Ctx, sys: &TruncatedSystem, r: &mut Report, search: bool) -> Result<(), CliError> {
    let multipliers = c.sc.multipliers.iter().map(|m| c.sc.expr(m)).collect::<Result<Vec<_>, _>>()?;
    let ansatz = ObservableAnsatz { grade: c.sc.obs_grade.unwrap_or(c.cfg.order), multipliers };
    let basis: Vec<ScalarExpr> = find_observables(sys, &ansatz)?.into_iter().map(|o| o.expr).collect();
    if search {
        r.text("count.observables", basis.len());
        for (i, b) in basis.iter().enumerate() {
            r.expr(format!("basis.O{}", i + 1), b, &c.labels);
        }
    }
    let mut found = Vec::new();
    for (name, e) in c.named()? {
        let bad = verify_observable(sys, &e)?;
        if bad.is_empty() && in_span(sys, &basis, &e)? {
            r.expr(format!("observable.{name}"), &sys.weak_reduce(&e)?, &c.labels);
            found.push((name, e));
        } else if !bad.is_empty() {
            let which: Vec<String> = bad.iter().map(|(l, _)| c.lt(l)).collect();
            r.text(format!("rejected.{name}"), format!("fails against {}", which.join(", ")));
        } else {
            r.text(format!("rejected.{name}"), "outside the search space");
        }
    }
    for (i, (a, ea)) in found.iter().enumerate() {
        for (b, eb) in &found[i + 1..] {
            r.expr(format!("algebra.{{{a},{b}}}"), &sys.weak_reduce(&sys.bracket(ea, eb)?)?, &c.labels);
        }
    }
    Ok(())
}

fn dirac_into(c: &Ctx, sys: &TruncatedSystem, r: &mut Report) -> Result<DiracStructure, CliError> {
    if c.sc.dirac.is_empty() || c.sc.gauge.is_empty() {
        return Err(CliError::Usage("dirac needs [dirac] and [gauge] sections".into()));
    }
    let mut second = Vec::new();
    for (k, v) in &c.sc.dirac {
        let (l, s) = c.sc.signed_label(v)?;
        let e = sys.entry(&l).ok_or_else(|| CliError::Usage(format!("{k}: {} is not in the hierarchy", c.lt(&l))))?;
        second.push((k.clone(), e.truncated.mul(&ScalarExpr::int(s))));
    }
    let gauge = c.sc.gauge.iter().map(|(k, v)| Ok((k.clone(), c.sc.expr(v)?))).collect::<Result<Vec<_>, CliError>>()?;
    let d = gauge_fix_and_dirac(sys, &second, &gauge)?;
    let n = d.phis.len();
    for i in 0..n {
        for j in 0..n {
            r.expr(format!("delta.{}.{}", i + 1, j + 1), d.delta.get(i, j), &c.labels);
        }
    }
    let named = c.named()?;
    for (i, (a, ea)) in named.iter().enumerate() {
        for (b, eb) in &named[i + 1..] {
            r.expr(format!("dirac.{{{a},{b}}}"), &d.bracket(ea, eb)?, &c.labels);
        }
    }
    Ok(d)
}

fn check(c: &Ctx) -> Result<Outcome, CliError> {
    let mut r = c.header("check");
    let sys = c.system()?;
    if solve_into(c, &sys, &mut r) != 0 {
        return Ok(Outcome { report: r, code: 1 });
    }
    for pair in 0..sys.npairs {
        if c.cfg.policy.pairs.contains(&pair) && c.sc.time.is_some() {
            continue;
        }
        let u = check_uncertainty(&sys, pair)?;
        r.expr(format!("uncertainty.{}", c.sc.pairs[pair].0), &u.value, &c.labels);
        r.text(format!("uncertainty_class.{}", c.sc.pairs[pair].0), format!("{:?}", u.class).to_lowercase());
    }
    if c.cfg.mode == TruncationMode::Sharp {
        return finish(c, r, 0, Some(&sys), None);
    }
    if !c.sc.named.is_empty() {
        observables_into(c, &sys, &mut r, false)?;
        for (name, e) in c.named()? {
            if r.get(&format!("observable.{name}")).is_some() {
                let re = reality_condition(&sys, &e)?;
                r.expr(format!("reality.{name}"), &re.required_imaginary, &c.labels);
            }
        }
    }
    let wants = |s: &str| c.goldens.iter().any(|(k, _)| section_of(k) == s);
    if wants("flow") {
        flows_into(c, &sys, &mut r)?;
    }
    let d = if !c.sc.dirac.is_empty() { Some(dirac_into(c, &sys, &mut r)?) } else { None };
    finish(c, r, 0, Some(&sys), d.as_ref())
}

/// Apply golden expectations and settle the exit code.
fn finish(
    c: &Ctx,
    mut r: Report,
    code: i32,
    sys: Option<&TruncatedSystem>,
    dirac: Option<&DiracStructure>,
) -> Result<Outcome, CliError> {
    if c.goldens.is_empty() {
        return Ok(Outcome { report: r, code });
    }
    let norm = |k: &str, e: &ScalarExpr| -> Result<ScalarExpr, effcon::Error> {
        match (section_of(k), dirac, sys) {
            ("delta" | "dirac", Some(d), _) => d.surface.reduce_exact(e),
            (_, _, Some(s)) => s.weak_reduce(e),
            _ => Ok(e.clone()),
        }
    };
    let diff = golden_compare(&r, &c.goldens, &c.labels, &norm)?;
    r.text("golden.matched", diff.matched.len());
    r.text("golden.mismatched", diff.mismatched.len());
    r.text("golden.missing", diff.missing.len());
    r.text("golden.skipped", diff.skipped.len());
    for (k, want, got) in &diff.mismatched {
        r.message(format!("golden mismatch {k}: expected {want}, got {got}"));
    }
    for k in &diff.missing {
        r.message(format!("golden missing {k}"));
    }
    let code = if diff.is_clean() { code } else { code.max(1) };
    Ok(Outcome { report: r, code })
}
