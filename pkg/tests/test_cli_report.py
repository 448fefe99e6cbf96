from __future__ import annotations

import csv
import textwrap

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracheat import cli, report
from fracheat.config import ConfigError, ScenarioConfig, parse_config, parse_config_text
from fracheat.suite import CheckResult, build_registry, derived_seed, known_checks, run_suite

MINIMAL = """
domain: {kind: torus, d: 1, period: 1.0}
alpha: 1.5
perturbation:
  drift: {family: zero}
  potential: {family: zero}
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


# ---------------------------------------------------------------- config

def test_minimal_config_parses(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert cfg.alpha == 1.5 and cfg.domain.kind == "torus"
    assert cfg.build_drift() is None and cfg.build_potential() is None
    assert cfg.report.checks is None


def test_full_config_builds():
    cfg = parse_config_text("""
domain: {kind: torus, d: 2, period: 2.0}
alpha: 1.6
perturbation:
  drift: {family: swirl, center: [1, 1], width: 0.2, strength: 2}
  potential:
    family: radial_power
    center: [1, 1]
    theta: 0.5
    cutoff: 0.5
    time: {exponent: 0.3, center: 0.5, windowed: true}
grid: {nodes_per_axis: 32, time_slices: 8}
solve: {t_max: 0.1, window: 0.05, source: [1.0, 1.0]}
kato: {gamma: 1, beta: 1.2, sign: plus, eps_levels: 8}
report: {checks: [laplace], seed: 4, out: results, sample_size: 64}
""")
    assert cfg.build_drift().strength == 2.0
    assert not cfg.build_potential().time.constant
    sc = cfg.solve_config()
    assert sc.grid.nodes_per_axis == 32 and sc.window == 0.05
    assert cfg.source_point() == [1.0, 1.0] and cfg.report.seed == 4


def test_alpha_out_of_range_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("domain: {kind: torus, d: 1}\nalpha: 2.5\n")
    assert exc.value.errors == ["line 2: alpha = 2.5 outside (0.0, 2.0)"]


def test_alpha_outside_perturbative_range_warns():
    with pytest.warns(UserWarning, match="outside"):
        parse_config_text("alpha: 0.8\n")


def test_unknown_family_names_valid_ones():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("perturbation:\n  potential: {family: gaussian}\n")
    msg = str(exc.value)
    assert "line 2" in msg and "gaussian" in msg
    for fam in ("zero", "constant", "bump", "radial_power"):
        assert fam in msg


def test_unknown_keys_are_errors():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("grid: {nodes: 4}\nsolver: {}\n")
    assert len(exc.value.errors) == 2
    assert exc.value.errors[0].startswith("line 1: unknown key 'nodes'")
    assert exc.value.errors[1].startswith("line 2: unknown key 'solver'")


def test_other_schema_errors():
    bad = {
        "domain: {kind: sphere}\n": "domain.kind",
        "domain: {kind: torus, d: 3}\n": "domain.d",
        "domain: {kind: box, period: 2}\n": "period applies",
        "perturbation:\n  drift: {family: bump, center: [0.5], width: 0.1}\n": "needs 'vector'",
        "perturbation:\n  drift: {family: swirl, center: [0.5], width: 0.1, strength: 1}\n": "d = 2",
        "report: {checks: [laplace, nonsense]}\n": "unknown check 'nonsense'",
        "kato: {gamma: 1.7}\n": "kato.gamma",
        "alpha: [1]\n": "must be a number",
        "domain: {kind: torus\n": "invalid YAML",
    }
    for text, needle in bad.items():
        with pytest.raises(ConfigError, match=needle):
            parse_config_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.yaml")


# ---------------------------------------------------------------- suite

def test_crashing_check_becomes_failure():
    def boom(seed):
        raise RuntimeError("kaboom")
    res = run_suite(["boom"], registry={"boom": boom})
    assert res[0].status == "fail" and "kaboom" in res[0].detail


def test_threads_keep_order():
    reg = {n: (lambda seed, n=n: CheckResult(n, "pass", {"seed": seed})) for n in "abcdef"}
    res = run_suite(list("fedcba"), seed=5, threads=3, registry=reg)
    assert [r.name for r in res] == list("fedcba")


def test_derived_seeds():
    assert derived_seed(1, "a") == derived_seed(1, "a")
    assert len({derived_seed(1, "a"), derived_seed(1, "b"), derived_seed(2, "a")}) == 3


def test_registry_complete():
    reg = build_registry(ScenarioConfig())
    assert set(reg) == set(known_checks())


# ---------------------------------------------------------------- emission

@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(report.fmt(x)) == x


def test_fmt_types():
    assert report.fmt(True) == "true" and report.fmt(np.int64(3)) == "3"
    assert report.fmt([0.5, 2]) == "0.5;2"


# ---------------------------------------------------------------- command line

def test_verify_minimal(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL + "report: {checks: [laplace, kato, scenario_kato]}\n")
    code = cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 0
    summary = (tmp_path / "o" / "summary.txt").read_text()
    assert "check.scenario_kato=vacuous" in summary and "checks=3" in summary


def test_theta_alpha_counterexample_fails(tmp_path, capsys):
    cfg = write(tmp_path, """
        domain: {kind: box, d: 2, half_width: 10}
        alpha: 1.5
        perturbation:
          potential: {family: radial_power, center: [0, 0], theta: 1.5, cutoff: 1.0}
        kato: {gamma: 0, beta: 0, assert_membership: true}
        report: {checks: [scenario_kato]}
    """)
    assert cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "failed: scenario_kato" in capsys.readouterr().out
    assert cli.main(["kato", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_empty_check_list(tmp_path):
    cfg = write(tmp_path, "report: {checks: []}\n")
    with pytest.warns(UserWarning, match="no checks"):
        assert cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "results.csv").read_text() == "check,status,kind,quantity,value\n"


def test_verify_is_byte_identical(tmp_path):
    cfg = write(tmp_path, MINIMAL + "report: {checks: [laplace, three_p, scenario_kernel], sample_size: 64}\n")
    for name in ("a", "b"):
        assert cli.main(["verify", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path / name)]) == 1
    for f in ("results.csv", "summary.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_field_export_rows(tmp_path):
    cfg = write(tmp_path, MINIMAL + "grid: {nodes_per_axis: 16, time_slices: 4}\nsolve: {t_max: 0.1}\n")
    assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    with (tmp_path / "o" / "field.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x0", "value", "grad0"]
    assert len(rows) - 1 == 4 * 16


def test_kato_table_rows(tmp_path):
    cfg = write(tmp_path, """
        domain: {kind: torus, d: 1, period: 1.0}
        alpha: 1.5
        perturbation:
          potential: {family: bump, center: [0.3], width: 0.1, height: 1.0}
        kato: {eps_levels: 8}
    """)
    assert cli.main(["kato", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "kato.csv").read_text().splitlines()
    assert lines[0] == "quantity,eps,value" and len(lines) - 1 == 8


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACHEAT_OUT", str(tmp_path / "env"))
    assert cli.main(["subcheck"]) == 0
    assert (tmp_path / "env" / "subordinator.csv").is_file()
    assert (tmp_path / "env" / "density.csv").is_file()


def test_other_subcommands(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL + "report: {sample_size: 32}\n")
    out = str(tmp_path / "o")
    assert cli.main(["kernel", "--config", str(cfg), "--out", out]) == 0
    assert (tmp_path / "o" / "kernel_profile.csv").is_file()
    assert cli.main(["bounds", "--config", str(cfg), "--out", out]) == 0
    assert "c_low" in (tmp_path / "o" / "bounds.txt").read_text()
    assert cli.main(["report", "--config", str(cfg), "--out", out]) == 2  # nothing verified yet
    cli.main(["verify", "--config", str(write(tmp_path, "report: {checks: [laplace]}\n", "v.yaml")), "--out", out])
    assert cli.main(["report", "--out", out]) == 0


def test_exit_codes(tmp_path, monkeypatch, capsys):
    bad = write(tmp_path, "alpha: 7\n")
    assert cli.main(["verify", "--config", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert cli.main(["verify", "--threads", "0"]) == 2
    assert cli.main(["nonsense"]) == 2
    box = write(tmp_path, "domain: {kind: box, d: 1}\n", "box.yaml")
    assert cli.main(["solve", "--config", str(box), "--out", str(tmp_path / "o")]) == 2

    def broken(*a, **k):
        raise RuntimeError("internal")
    monkeypatch.setattr(cli, "laplace_report", broken)
    assert cli.main(["subcheck", "--out", str(tmp_path / "o")]) == 3
