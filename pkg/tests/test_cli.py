import json
from fractions import Fraction as Q

import pytest

from jetforge import cli
from jetforge import symexpr as sx

WAVE = """\
# scalar wave operator on the plane
base m = 2;
fiber n = 1;
order k = 2;
operator h = u[(2,0)] - u[(0,2)];
query integrability();
query spencer(pmax=2, qmax=4);
"""

KG = """\
base m = 2;
fiber n = 1;
order k = 2;
metric { g[1][1] = 1 - x2^2/4; g[2][2] = -1 - x1^2/4; }
operator h = klein_gordon(F1=1, F2=1, K=z^3);
query integrability();
query solve(5);
query codim(1);
"""

DEGENERATE = """\
base m = 2;
fiber n = 1;
order k = 2;
operator h = u[(1,0)] + u[(0,1)];
"""

PARAMS = """\
base m = 2;
fiber n = 1;
order k = 1;
param c = 3/2;
operator h = u[(1,0)] - c*u[(0,1)];
"""


def _flags(**kw):
    return cli.CliFlags(**kw)


def test_parse_minimal_file():
    spec = cli.parse_problem_file(WAVE)
    assert (spec.m, spec.n, spec.k) == (2, 1, 2)
    assert spec.operator_kind == "expr"
    assert len(spec.operator_exprs) == 1
    assert [q.name for q in spec.queries] == ["integrability", "spencer"]
    assert spec.queries[1].arg_dict() == {"pmax": 2, "qmax": 4}
    h = spec.build_operator()
    assert h.order == 2


def test_parse_metric_and_kg_operator():
    spec = cli.parse_problem_file(KG)
    assert spec.operator_kind == "klein_gordon"
    assert spec.metric is not None
    assert spec.metric.m == 2
    h = spec.build_operator()
    assert h.order == 2
    assert spec.queries[1].args == (5,)


def test_parse_param_macro_substitution():
    spec = cli.parse_problem_file(PARAMS)
    h = spec.build_operator()
    vals = {sx.BaseVar(1): Q(0), sx.BaseVar(2): Q(0),
            sx.JetVar(1, (0, 0)): Q(0),
            sx.JetVar(1, (1, 0)): Q(3), sx.JetVar(1, (0, 1)): Q(2)}
    got = sx.evaluate(h.components[0], vals, exact=True)
    assert got == Q(3) - Q(3, 2) * Q(2)


def test_parse_decimal_literals_set_float_flag():
    text = WAVE.replace("u[(0,2)]", "0.5*u[(0,2)]")
    spec = cli.parse_problem_file(text)
    assert spec.float_literals


def test_parse_errors():
    with pytest.raises(cli.ParseError):
        cli.parse_problem_file("base m = two;\nfiber n = 1;\norder k = 1;\noperator h = u[(1,0)];")
    with pytest.raises(cli.ProblemError):
        cli.parse_problem_file("base m = 2;\nfiber n = 1;\norder k = 2;\noperator h = u[(1,0)];\nquery bogus();")
    with pytest.raises(cli.ProblemError):
        cli.parse_problem_file("base m = 2;\nfiber n = 1;\norder k = 2;")
    # jet order beyond the declared k is a syntax-level rejection
    with pytest.raises((cli.ParseError, sx.ExprError)):
        cli.parse_problem_file("base m = 2;\nfiber n = 1;\norder k = 1;\noperator h = u[(2,0)];")


def test_query_filtering_and_empty_report():
    spec = cli.parse_problem_file(WAVE)
    rep = cli.run_command(spec, "spencer", _flags())
    assert [r.query for r in rep.results] == ["spencer"]
    rep2 = cli.run_command(spec, "solve", _flags())
    assert rep2.results == []
    assert rep2.passed


def test_default_query_synthesized_without_query_section():
    spec = cli.parse_problem_file(DEGENERATE.replace(
        "u[(1,0)] + u[(0,1)]", "u[(2,0)] - u[(0,2)]"))
    rep = cli.run_command(spec, "integrability", _flags())
    assert [r.query for r in rep.results] == ["integrability"]
    assert rep.passed


def test_run_command_failure_reported_not_raised():
    spec = cli.parse_problem_file(DEGENERATE)
    rep = cli.run_command(spec, "integrability", _flags())
    assert not rep.passed
    assert rep.results[0].data.get("error") or rep.results[0].notes


def test_json_reports_are_byte_identical():
    spec = cli.parse_problem_file(KG)
    flags = _flags(seed=3, samples=4)
    a = cli.emit_report(cli.run_command(spec, "integrability", flags), "json")
    b = cli.emit_report(cli.run_command(spec, "integrability", flags), "json")
    assert a == b
    obj = json.loads(a)
    assert obj["schema"] == cli.SCHEMA
    assert obj["passed"] is True


def test_jsonable_fractions_and_floats():
    assert cli._jsonable(Q(1, 3)) == "1/3"
    assert cli._jsonable(0.5) == repr(0.5)
    assert cli._jsonable({"a": (Q(2), 1)}) == {"a": ["2", 1]}


def test_text_report_rendering():
    spec = cli.parse_problem_file(WAVE)
    rep = cli.run_command(spec, "integrability", _flags())
    text = cli.emit_report(rep, "text")
    assert "[PASS]" in text
    assert "integrability" in text
    spec_bad = cli.parse_problem_file(DEGENERATE)
    bad = cli.emit_report(cli.run_command(spec_bad, "symbol", _flags()), "text")
    assert "[FAIL]" in bad


def test_format_problem_round_trip_fixed_point():
    for text in (WAVE, KG, PARAMS):
        spec = cli.parse_problem_file(text)
        printed = cli.format_problem(spec)
        spec2 = cli.parse_problem_file(printed)
        assert cli.format_problem(spec2) == printed


def test_load_free_data(tmp_path):
    p = tmp_path / "fd.txt"
    p.write_text("u[(3,0)] = 1/2;\nu[(2,1)] = -1;\n")
    spec = cli.parse_problem_file(WAVE)
    h = spec.build_operator()
    table = cli._load_free_data(str(p), h)
    keys = {(alpha, tuple(I)) for (alpha, I) in table}
    assert keys == {(1, (3, 0)), (1, (2, 1))}
    assert set(table.values()) == {Q(1, 2), Q(-1)}
    bad = tmp_path / "bad.txt"
    bad.write_text("u[(1,0)] + 1 = 2;\n")
    with pytest.raises((cli.ProblemError, cli.ParseError, sx.ExprError)):
        cli._load_free_data(str(bad), h)


def test_main_exit_codes(tmp_path, capsys):
    wave = tmp_path / "wave.jf"
    wave.write_text(WAVE)
    degen = tmp_path / "degen.jf"
    degen.write_text(DEGENERATE)
    broken = tmp_path / "broken.jf"
    broken.write_text("base m = ;\n")

    assert cli.main(["integrability", str(wave)]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out

    assert cli.main(["integrability", str(degen)]) == 1
    capsys.readouterr()

    assert cli.main(["integrability", str(broken)]) == 2
    err = capsys.readouterr().err
    assert "line" in err

    assert cli.main(["integrability", str(tmp_path / "missing.jf")]) == 2
    capsys.readouterr()

    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", str(wave)])
    assert exc.value.code == 2
    capsys.readouterr()


def test_main_decimal_exact_conflict(tmp_path, capsys):
    f = tmp_path / "dec.jf"
    f.write_text(WAVE.replace("u[(0,2)]", "0.5*u[(0,2)]"))
    assert cli.main(["symbol", str(f), "--mode", "exact"]) == 2
    err = capsys.readouterr().err
    assert "decimal" in err
    assert cli.main(["symbol", str(f)]) == 0
    capsys.readouterr()


def test_main_json_output(tmp_path, capsys):
    wave = tmp_path / "wave.jf"
    wave.write_text(WAVE)
    out_path = tmp_path / "rep.json"
    assert cli.main(["spencer", str(wave), "--json", str(out_path)]) == 0
    capsys.readouterr()
    obj = json.loads(out_path.read_text())
    assert obj["command"] == "spencer"
    assert obj["results"][0]["query"] == "spencer"

    assert cli.main(["spencer", str(wave), "--json"]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["schema"] == cli.SCHEMA


def test_main_solve_with_free_data_file(tmp_path, capsys):
    kg = tmp_path / "kg.jf"
    kg.write_text(KG)
    fd = tmp_path / "fd.txt"
    fd.write_text("u[(3,0)] = 1/2;\n")
    code = cli.main(["solve", str(kg), "--free-data", "file:%s" % fd])
    capsys.readouterr()
    assert code == 0
    assert cli.main(["solve", str(kg), "--free-data", "bogus"]) == 2
    capsys.readouterr()
