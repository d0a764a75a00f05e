"""Problem-file DSL, command dispatch, and report emission.

A problem file declares a chart, optional metric and parameters, one
operator, and a list of queries:

    base m = 2;
    fiber n = 1;
    order k = 2;
    # metric { g[1][1] = 1; g[2][2] = -1; }
    # param a = 3/4;
    operator h = u[(2,0)] - u[(0,2)];
    query integrability();

Rational literals stay exact; a decimal literal anywhere switches the
whole file to float mode (and conflicts with an explicit --mode exact).
Reports are emitted as text or as canonical JSON whose bytes depend
only on the input file, the flags, and the seed; timings appear in the
text rendering only.  Exit codes: 0 when every check passed, 1 when a
check failed or a computation was obstructed, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, dim_F
from . import symexpr as sx
from .symexpr import Expr, ParseError, ParamVar, JetVar
from . import jetcalc as jc
from . import spencer as sp
from . import symbols as sy
from . import integrability as ig
from . import formal as fm
from . import pfd

SCHEMA = "jetforge-report/1"

COMMANDS = ("prolong", "symbol", "spencer", "integrability", "solve", "tower")

_COMMAND_QUERIES = {
    "prolong": ("prolong",),
    "symbol": ("symbol",),
    "spencer": ("spencer",),
    "integrability": ("integrability", "codim"),
    "solve": ("solve",),
    "tower": ("tower",),
}


class ProblemError(ValueError):
    """Semantic error in a problem file."""


@dataclass(frozen=True)
class Query:
    name: str
    args: tuple = ()
    kwargs: tuple = ()

    def arg_dict(self):
        return dict(self.kwargs)


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    n: int
    k: int
    metric: object = None
    params: tuple = ()
    operator_kind: str = "expr"
    operator_exprs: tuple = ()
    kg_fields: tuple = ()
    queries: tuple = ()
    float_literals: bool = False

    def build_operator(self):
        if self.operator_kind == "klein_gordon":
            F1, F2, Kpoly = self.kg_fields
            K = None
            if Kpoly is not None:
                K = lambda e: sx.substitute(Kpoly, {ParamVar("z"): sx.as_expr(e)})
            return ig.make_klein_gordon(self.metric, F1=F1, F2=F2, K=K)
        return jc.DiffOp(self.m, self.n, self.k, list(self.operator_exprs))


# ---------------------------------------------------------------------------
# parsing


class _Lines:
    """Statement splitter: strips comments, tracks positions."""

    def __init__(self, text):
        self.text = text

    def statements(self):
        out = []
        buf = []
        start = None
        pos = 0
        in_comment = False
        depth = 0
        for pos, ch in enumerate(self.text):
            if in_comment:
                if ch == "\n":
                    in_comment = False
                continue
            if ch == "#":
                in_comment = True
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    raise ParseError("unbalanced '}'", self.text, pos)
                if depth == 0:
                    buf.append(ch)
                    stmt = "".join(buf).strip()
                    if stmt:
                        out.append((stmt, start))
                    buf = []
                    start = None
                    continue
            if ch == ";" and depth == 0:
                stmt = "".join(buf).strip()
                if stmt:
                    out.append((stmt, start))
                buf = []
                start = None
                continue
            if start is None:
                if ch.isspace():
                    continue
                start = pos
            buf.append(ch)
        tail = "".join(buf).strip()
        if depth != 0:
            raise ParseError("unbalanced '{'", self.text, pos)
        if tail:
            raise ParseError("missing ';' after final statement", self.text, start or 0)
        return out


def _expect_int(text, value, pos):
    try:
        return int(value)
    except ValueError:
        raise ParseError("expected an integer, got %r" % value, text, pos)


def _sub_params(e, params):
    if not params:
        return e
    bindings = {ParamVar(name): expr for name, expr in params}
    return sx.substitute(e, bindings)


def parse_problem_file(text):
    """Parse a problem file into a ProblemSpec.

    Raises ParseError with a position for syntax errors and
    ProblemError for semantic ones (missing declarations, order
    overflow, unknown query names).
    """
    m = n = k = None
    metric_entries = None
    params = []
    op_kind = None
    op_exprs = None
    kg_fields = None
    queries = []
    saw_decimal = False

    def ctx(order, extra_params=()):
        names = tuple(name for name, _ in params) + tuple(extra_params)
        return sx.ExprContext(m, n=n, order=order, params=names)

    def parse_e(src, order, extra_params=(), pos=0):
        nonlocal saw_decimal
        try:
            e, dec = sx.parse_expr_flagged(src, ctx(order, extra_params))
        except ParseError as err:
            raise ParseError("%s in %r" % (err, src), text, pos)
        saw_decimal = saw_decimal or dec
        return _sub_params(e, params)

    for stmt, pos in _Lines(text).statements():
        head = stmt.split(None, 1)[0]
        if head == "base":
            body = stmt[len("base"):].strip()
            if not body.startswith("m"):
                raise ParseError("expected 'base m = <int>'", text, pos)
            m = _expect_int(text, body.split("=", 1)[1].strip(), pos)
        elif head == "fiber":
            body = stmt[len("fiber"):].strip()
            if not body.startswith("n"):
                raise ParseError("expected 'fiber n = <int>'", text, pos)
            n = _expect_int(text, body.split("=", 1)[1].strip(), pos)
        elif head == "order":
            body = stmt[len("order"):].strip()
            if not body.startswith("k"):
                raise ParseError("expected 'order k = <int>'", text, pos)
            k = _expect_int(text, body.split("=", 1)[1].strip(), pos)
        elif head == "metric":
            if None in (m, n, k):
                raise ProblemError("metric block before chart declarations")
            body = stmt[len("metric"):].strip()
            if not (body.startswith("{") and body.endswith("}")):
                raise ParseError("metric block must be '{ ... }'", text, pos)
            metric_entries = {}
            for part in body[1:-1].split(";"):
                part = part.strip()
                if not part:
                    continue
                lhs, _, rhs = part.partition("=")
                lhs = lhs.replace(" ", "")
                if not (lhs.startswith("g[") and lhs.endswith("]")):
                    raise ParseError("metric entries look like g[i][j] = expr", text, pos)
                try:
                    i_s, j_s = lhs[2:-1].split("][")
                    i, j = int(i_s), int(j_s)
                except ValueError:
                    raise ParseError("bad metric indices in %r" % lhs, text, pos)
                metric_entries[(i, j)] = parse_e(rhs.strip(), 0, pos=pos)
        elif head == "param":
            if None in (m, n, k):
                raise ProblemError("param before chart declarations")
            body = stmt[len("param"):].strip()
            name, _, rhs = body.partition("=")
            name = name.strip()
            if not name.isidentifier():
                raise ParseError("bad parameter name %r" % name, text, pos)
            params.append((name, parse_e(rhs.strip(), 0, pos=pos)))
        elif head == "operator":
            if None in (m, n, k):
                raise ProblemError("operator before chart declarations")
            body = stmt[len("operator"):].strip()
            lhs, _, rhs = body.partition("=")
            if lhs.strip() != "h":
                raise ParseError("operators are declared as 'operator h = ...'", text, pos)
            rhs = rhs.strip()
            if rhs.startswith("klein_gordon"):
                op_kind = "klein_gordon"
                inner = rhs[len("klein_gordon"):].strip()
                if not (inner.startswith("(") and inner.endswith(")")):
                    raise ParseError("klein_gordon takes (F1=..., F2=..., K=...)", text, pos)
                F1 = sx.ZERO
                F2 = sx.ZERO
                Kpoly = None
                for part in _split_top(inner[1:-1]):
                    key, _, val = part.partition("=")
                    key = key.strip()
                    val = val.strip()
                    if key == "F1":
                        F1 = parse_e(val, 0, pos=pos)
                    elif key == "F2":
                        F2 = parse_e(val, 0, pos=pos)
                    elif key == "K":
                        Kpoly = parse_e(val, 0, extra_params=("z",), pos=pos)
                    else:
                        raise ParseError("unknown klein_gordon field %r" % key, text, pos)
                if metric_entries is None:
                    raise ProblemError("klein_gordon requires a metric block")
                kg_fields = (F1, F2, Kpoly)
            else:
                op_kind = "expr"
                op_exprs = tuple(parse_e(p.strip(), k, pos=pos) for p in _split_top(rhs))
        elif head == "query":
            body = stmt[len("query"):].strip()
            name, _, rest = body.partition("(")
            name = name.strip()
            if not rest.endswith(")"):
                raise ParseError("queries look like 'query name(args);'", text, pos)
            if name not in ("prolong", "symbol", "spencer", "integrability", "solve", "tower", "codim"):
                raise ProblemError("unknown query %r" % name)
            args = []
            kwargs = []
            for part in _split_top(rest[:-1]):
                part = part.strip()
                if not part:
                    continue
                if "=" in part:
                    kname, _, val = part.partition("=")
                    kwargs.append((kname.strip(), _expect_int(text, val.strip(), pos)))
                else:
                    args.append(_expect_int(text, part, pos))
            queries.append(Query(name, tuple(args), tuple(kwargs)))
        else:
            raise ParseError("unknown declaration %r" % head, text, pos)

    if None in (m, n, k):
        raise ProblemError("a problem file must declare base, fiber, and order")
    if op_kind is None:
        raise ProblemError("a problem file must declare an operator")
    metric = None
    if metric_entries is not None:
        # one triangle suffices in a problem file; mirror the other
        for (i, j) in list(metric_entries):
            if (j, i) not in metric_entries:
                metric_entries[(j, i)] = metric_entries[(i, j)]
        metric = ig.MetricSpec(m, metric_entries)
    spec = ProblemSpec(
        m=m, n=n, k=k, metric=metric, params=tuple(params),
        operator_kind=op_kind,
        operator_exprs=op_exprs or (),
        kg_fields=kg_fields or (),
        queries=tuple(queries),
        float_literals=saw_decimal,
    )
    spec.build_operator()  # surfaces semantic errors early
    return spec


def _split_top(s):
    """Split on commas outside parentheses and brackets."""
    parts = []
    depth = 0
    buf = []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    tail = "".join(buf)
    if tail.strip():
        parts.append(tail)
    return parts


def format_problem(spec):
    """Canonical text form; parse(format_problem(parse(text))) is stable."""
    lines = ["base m = %d;" % spec.m, "fiber n = %d;" % spec.n, "order k = %d;" % spec.k]
    if spec.metric is not None:
        entries = []
        for i in range(spec.m):
            for j in range(i, spec.m):
                e = spec.metric.entries[i][j]
                if not e.is_zero():
                    entries.append("g[%d][%d] = %s;" % (i + 1, j + 1, sx.format_expr(e)))
        lines.append("metric { %s }" % " ".join(entries))
    for name, e in spec.params:
        lines.append("param %s = %s;" % (name, sx.format_expr(e)))
    if spec.operator_kind == "klein_gordon":
        F1, F2, Kpoly = spec.kg_fields
        fields = ["F1=%s" % sx.format_expr(F1), "F2=%s" % sx.format_expr(F2)]
        if Kpoly is not None:
            fields.append("K=%s" % sx.format_expr(Kpoly))
        lines.append("operator h = klein_gordon(%s);" % ", ".join(fields))
    else:
        lines.append("operator h = %s;" % ", ".join(sx.format_expr(e) for e in spec.operator_exprs))
    for q in spec.queries:
        parts = [str(a) for a in q.args] + ["%s=%d" % kv for kv in q.kwargs]
        lines.append("query %s(%s);" % (q.name, ", ".join(parts)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports


@dataclass
class QueryResult:
    query: str
    args: dict
    passed: bool
    provenance: str
    data: dict
    notes: list = field(default_factory=list)
    elapsed: float = 0.0


@dataclass
class Report:
    command: str
    source: str
    seed: int
    samples: int
    mode: str
    results: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def to_json_obj(self):
        return {
            "schema": SCHEMA,
            "command": self.command,
            "source": self.source,
            "seed": self.seed,
            "samples": self.samples,
            "mode": self.mode,
            "passed": self.passed,
            "results": [
                {
                    "query": r.query,
                    "args": _jsonable(r.args),
                    "passed": r.passed,
                    "provenance": r.provenance,
                    "data": _jsonable(r.data),
                    "notes": list(r.notes),
                }
                for r in self.results
            ],
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, MultiIndex):
        return list(v)
    if isinstance(v, Expr):
        return sx.format_expr(v)
    if isinstance(v, dict):
        return {_key_str(kk): _jsonable(vv) for kk, vv in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float):
        return repr(v)
    return v


def _key_str(kk):
    if isinstance(kk, (tuple, MultiIndex)):
        return ",".join(str(x) for x in kk)
    return str(kk)


def emit_report(report, fmt="text"):
    """Render a report; JSON bytes are canonical for fixed inputs."""
    if fmt == "json":
        return json.dumps(report.to_json_obj(), sort_keys=True, indent=2) + "\n"
    lines = []
    lines.append("jetforge report (schema %s)" % SCHEMA)
    lines.append("command: %s   source: %s" % (report.command, report.source))
    lines.append("mode: %s   seed: %d   samples: %d" % (report.mode, report.seed, report.samples))
    for r in report.results:
        status = "PASS" if r.passed else "FAIL"
        args = ", ".join("%s=%s" % (a, b) for a, b in sorted(r.args.items()))
        lines.append("[%s] %s(%s)   provenance: %s   (%.0f ms)" % (
            status, r.query, args, r.provenance, 1000 * r.elapsed))
        for note in r.notes:
            lines.append("    %s" % note)
    verdict = "PASS" if report.passed else "FAIL"
    lines.append("result: %s (%d quer%s)" % (
        verdict, len(report.results), "y" if len(report.results) == 1 else "ies"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# query execution


@dataclass
class CliFlags:
    order: int = 1
    samples: int = 8
    seed: int = 0
    mode: str = "exact"
    free_data: str = "zero"
    pmax: int = None
    qmax: int = None
    json_path: str = None


def _provenance(flags, sampled=False, tol=1e-9):
    if flags.mode == "float":
        return "float(%.0e)" % tol
    if sampled:
        return "sampled(%d, seed=%d)" % (flags.samples, flags.seed)
    return "exact"


def _random_jet_point(h, seed):
    rng = random.Random("chart:%s" % seed)
    chart = h.chart()
    base = tuple(sx.random_rational(rng, 4) for _ in range(h.m))
    jets = {}
    for alpha in range(1, h.n + 1):
        for I in chart.jet_indices():
            jets[(alpha, I)] = sx.random_rational(rng, 4)
    return jc.JetPoint(chart, base, jets)


def _run_prolong(spec, h, q, flags):
    l = q.args[0] if q.args else q.arg_dict().get("l", flags.order)
    P = jc.prolong_op(h, l)
    comps = []
    for (beta, I), e in zip(P.labels, P.components):
        comps.append({"beta": beta, "index": list(I), "expr": sx.format_expr(e)})
    data = {
        "order": l,
        "n_components": P.n_out,
        "components": comps,
    }
    return QueryResult("prolong", {"l": l}, True, _provenance(flags), data)


def _run_symbol(spec, h, q, flags):
    S = sy.symbol_of(h)
    entries = []
    for (alpha, beta, I), c in sorted(
            S.table.items(), key=lambda kv: (kv[0][1], kv[0][2].graded_lex_key(), kv[0][0])):
        if not c.is_zero():
            entries.append({
                "beta": beta, "alpha": alpha, "index": list(I),
                "coeff": sx.format_expr(c),
            })
    polys = {}
    if h.n == 1:
        for beta in range(1, h.n_out + 1):
            polys[str(beta)] = sx.format_expr(S.poly_expr(beta))
    data = {"order": h.order, "entries": entries, "polynomials": polys}
    return QueryResult("symbol", {}, not S.is_zero(), _provenance(flags), data,
                       notes=[] if not S.is_zero() else ["symbol vanishes identically"])


def _run_spencer(spec, h, q, flags):
    kw = q.arg_dict()
    pmax = flags.pmax or kw.get("pmax") or (q.args[0] if len(q.args) > 0 else h.m)
    qmax = flags.qmax or kw.get("qmax") or (q.args[1] if len(q.args) > 1 else h.order + 2)
    a = _random_jet_point(h, flags.seed)
    g = sp.symbolic_system_at(h, a)
    dims = {str(qq): g.dim_g(qq) for qq in range(0, qmax + 1)}
    coh = sp.cohomology_dims(g, pmax, qmax)
    table = {"%d,%d" % key: val for key, val in sorted(coh.items())}
    nonzero = sorted(key for key, val in coh.items() if val)
    data = {
        "pmax": pmax, "qmax": qmax,
        "dim_g": dims,
        "cohomology": table,
        "nonzero_positions": [list(key) for key in nonzero],
    }
    notes = ["base point sampled with seed %d; arithmetic exact" % flags.seed]
    return QueryResult("spencer", {"pmax": pmax, "qmax": qmax}, True,
                       "exact", data, notes=notes)


def _run_integrability(spec, h, q, flags):
    rep = ig.check_conditions(h, samples=flags.samples, seed=flags.seed, mode=flags.mode)
    conds = []
    for c in (rep.condition1, rep.condition2, rep.condition3):
        conds.append({
            "name": c.name, "passed": c.passed,
            "certified": c.certified, "detail": c.detail,
        })
    data = {"conditions": conds, "verdict": rep.verdict}
    notes = rep.lines()
    return QueryResult("integrability", {}, rep.passed,
                       _provenance(flags, sampled=not all(c.certified for c in
                                                          (rep.condition1, rep.condition2, rep.condition3))),
                       data, notes=notes)


def _run_codim(spec, h, q, flags):
    l = q.args[0] if q.args else q.arg_dict().get("l", flags.order)
    rep = ig.variety_codim(h, l, samples=min(flags.samples, 10), seed=flags.seed)
    data = {
        "level": l, "expected": rep.expected,
        "observed": sorted(set(rep.observed)), "all_match": rep.all_match,
    }
    return QueryResult("codim", {"l": l}, rep.all_match,
                       _provenance(flags, sampled=True), data, notes=[rep.summary()])


def _run_solve(spec, h, q, flags):
    N = q.args[0] if q.args else q.arg_dict().get("N", max(h.order + 2, flags.order))
    policy = flags.free_data
    free_table = None
    if policy.startswith("file:"):
        free_table = _load_free_data(policy[5:], h)
        policy = "explicit"
    seed_pt = ig.sample_prolonged_points(h, 0, 1, "solve:%d" % flags.seed)[0]
    sol = fm.formal_solve(h, seed_pt, N, policy=policy, free_table=free_table,
                          seed="cli:%d" % flags.seed)
    r = min(N - h.order, 2)
    res = fm.verify_residual(sol, r, mode=flags.mode)
    data = {
        "order": N,
        "base_point": [v for v in sol.base],
        "series": sol.series[0].serialize() if spec.n == 1 else [s.serialize() for s in sol.series],
        "free_counts": sol.free_counts,
        "residual_order": r,
        "residual_passed": res.passed,
    }
    notes = [res.summary(), "free parameters per level: %s" % (sol.free_counts,)]
    return QueryResult("solve", {"N": N}, res.passed,
                       _provenance(flags, sampled=True), data, notes=notes)


def _run_tower(spec, h, q, flags):
    levels = q.args[0] if q.args else q.arg_dict().get("levels", h.order + 2)
    E = pfd.equation_subtower(h, levels=levels + 1)
    dims = {str(i): E.dimension(i) for i in range(levels + 1)}
    pts = ig.sample_prolonged_points(h, 1, 1, "tower:%d" % flags.seed)
    member = E.membership(pts[0])
    n_surj = E.check_projection_surjectivity(1, samples=min(flags.samples, 4),
                                             seed=flags.seed)
    data = {
        "levels": levels,
        "dimensions": dims,
        "sampled_membership": member,
        "surjectivity_samples": n_surj,
    }
    notes = ["projection surjectivity witnessed at %d sampled points" % n_surj]
    return QueryResult("tower", {"levels": levels}, bool(member),
                       _provenance(flags, sampled=True), data, notes=notes)


def _load_free_data(path, h):
    """Free-data files hold lines 'u[(2,0)] = 1/3;' keyed by jet index."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    table = {}
    ctx = sx.ExprContext(h.m, n=h.n, order=64)
    for stmt, pos in _Lines(text).statements():
        lhs, _, rhs = stmt.partition("=")
        e = sx.parse_expr(lhs.strip(), ctx)
        terms = e.terms()
        if len(terms) != 1 or len(terms[0][0]) != 1 or not isinstance(terms[0][0][0][0], JetVar):
            raise ProblemError("free-data keys must be single jet variables")
        v = terms[0][0][0][0]
        val = sx.parse_expr(rhs.strip(), ctx)
        if not val.is_constant():
            raise ProblemError("free-data values must be rational constants")
        table[(v.alpha, v.index)] = val.constant_value()
    return table


_RUNNERS = {
    "prolong": _run_prolong,
    "symbol": _run_symbol,
    "spencer": _run_spencer,
    "integrability": _run_integrability,
    "codim": _run_codim,
    "solve": _run_solve,
    "tower": _run_tower,
}


def run_command(spec, command, flags, source="<memory>"):
    """Execute a command against a problem spec.

    Runs the file's queries of the command's kind; a file with no query
    section gets a single default query synthesized from the flags.  A
    file that declares queries, none matching, yields an empty report.
    """
    if command not in COMMANDS:
        raise ProblemError("unknown command %r" % command)
    kinds = _COMMAND_QUERIES[command]
    if spec.queries:
        queries = [q for q in spec.queries if q.name in kinds]
    else:
        queries = [Query(kinds[0])]
    h = spec.build_operator()
    results = []
    for q in queries:
        t0 = time.perf_counter()
        try:
            r = _RUNNERS[q.name](spec, h, q, flags)
        except (RuntimeError, ValueError, sx.ExprError) as err:
            r = QueryResult(q.name, q.arg_dict(), False, _provenance(flags),
                            {"error": str(err)}, notes=["error: %s" % err])
        r.elapsed = time.perf_counter() - t0
        results.append(r)
    return Report(command=command, source=source, seed=flags.seed,
                  samples=flags.samples, mode=flags.mode, results=results)


# ---------------------------------------------------------------------------
# entry point


def _build_argparser():
    ap = argparse.ArgumentParser(
        prog="jetforge",
        description="symbolic jet calculus: prolongation, symbols, Spencer "
                    "cohomology, integrability checks, formal solutions, towers",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file", help="problem file")
    ap.add_argument("--order", type=int, default=1, help="prolongation order / solve order fallback")
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", choices=("exact", "float"), default=None)
    ap.add_argument("--free-data", default="zero",
                    help="zero | random | file:PATH (formal solve free parameters)")
    ap.add_argument("--pmax", type=int, default=None)
    ap.add_argument("--qmax", type=int, default=None)
    ap.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                    help="emit canonical JSON (to PATH, or stdout)")
    return ap


def main(argv=None):
    ap = _build_argparser()
    ns = ap.parse_args(argv)
    try:
        with open(ns.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2
    try:
        spec = parse_problem_file(text)
    except ParseError as err:
        pos = err.pos or 0
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        print("error: %s (line %d, col %d)" % (err, line, col), file=sys.stderr)
        return 2
    except (ProblemError, ValueError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 2

    mode = ns.mode
    if spec.float_literals:
        if mode == "exact":
            print("error: file contains decimal literals; exact mode unavailable",
                  file=sys.stderr)
            return 2
        mode = "float"
    elif mode is None:
        mode = "exact"

    if ns.free_data not in ("zero", "random") and not ns.free_data.startswith("file:"):
        print("error: --free-data must be zero, random, or file:PATH", file=sys.stderr)
        return 2
    if ns.samples < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return 2
    if ns.order < 0:
        print("error: --order must be nonnegative", file=sys.stderr)
        return 2

    flags = CliFlags(order=ns.order, samples=ns.samples, seed=ns.seed, mode=mode,
                     free_data=ns.free_data, pmax=ns.pmax, qmax=ns.qmax,
                     json_path=ns.json)
    try:
        report = run_command(spec, ns.command, flags, source=ns.file)
    except (ProblemError, OSError) as err:
        print("error: %s" % err, file=sys.stderr)
        return 2

    if ns.json is not None:
        payload = emit_report(report, "json")
        if ns.json == "-":
            sys.stdout.write(payload)
        else:
            with open(ns.json, "w", encoding="utf-8") as fh:
                fh.write(payload)
            sys.stdout.write(emit_report(report, "text"))
    else:
        sys.stdout.write(emit_report(report, "text"))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
