import json

import numpy as np
import pytest

from homobs.errors import ConfigError
from homobs.experiments import (
    REGISTRY,
    apply_overrides,
    compare_metrics,
    load_config,
    load_gainset,
    parse_config,
    read_metrics,
    reference_gains,
    resolve_gains,
    run_experiment,
    save_gainset,
    settling_ratio,
)

from conftest import HBAR_FINITE, HBAR_FIXED

SHORT = {"t_end": 0.5, "h": 1e-3}


def short(name, **extra):
    cfg = load_config(name)
    doc = cfg.to_dict()
    doc["sim"].update(t_end=0.5, tail_window=0.2, **extra)
    return parse_config(doc)


@pytest.mark.parametrize("name", REGISTRY)
def test_registry_round_trip(name):
    cfg = load_config(name)
    assert cfg.name == name
    again = parse_config(json.loads(cfg.dumps()))
    assert again.to_dict() == cfg.to_dict()
    assert again.dumps() == cfg.dumps()


def test_registry_contents():
    assert load_config("fig4").sim["scale_exponents"] == [-1, 0, 1, 2, 3]
    assert load_config("fig2").sim["h"] == 1e-3
    assert not load_config("fig2").sim["perturbed"]
    assert load_config("fig3").sim["perturbed"] and load_config("fig5").sim["perturbed"]
    frags = reference_gains()
    for key, ref in (("reference-finite", HBAR_FINITE), ("reference-fixed", HBAR_FIXED)):
        for got, want in zip(frags[key]["Hbar"], ref):
            np.testing.assert_array_equal(np.array(got, dtype=float).reshape(want.shape), want)
    assert all(f["unverified"] for f in frags.values())


def test_fig2_perturbed_is_fig3():
    a = apply_overrides(load_config("fig2"), {"perturbed": True}).to_dict()
    b = load_config("fig3").to_dict()
    a.pop("name"), b.pop("name")
    assert a == b


def test_h_override_doubles_steps():
    base = run_experiment(short("fig2"), {"mode": "finite"})
    half = run_experiment(short("fig2"), {"mode": "finite", "h": 5e-4})
    assert int(half.metrics["steps"]) == 2 * int(base.metrics["steps"]) == 1000


def test_outputs_and_determinism(tmp_path):
    r1 = run_experiment(short("fig3"), out_dir=tmp_path / "a")
    r2 = run_experiment(short("fig3"), out_dir=tmp_path / "b")
    names = sorted(p.name for p in r1.files)
    assert names == ["finite.csv", "linear.csv", "metrics.txt"]
    for p in r1.files:
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()
    lines = (tmp_path / "a" / "finite.csv").read_text(encoding="utf-8").split("\n")
    assert lines[0] == "t,e_norm,el_norm,e1,e2,e3"
    assert lines[-1] == "" and len(lines) == 503
    row = [float(v) for v in lines[1].split(",")]
    assert row[1] == row[2] == pytest.approx(np.sqrt(6.0))
    lin = (tmp_path / "a" / "linear.csv").read_text(encoding="utf-8").split("\n")[1].split(",")
    assert lin[0] == "0" and float(lin[1]) == pytest.approx(np.sqrt(6.0))
    metrics = read_metrics(tmp_path / "a" / "metrics.txt")
    assert metrics == r2.metrics
    assert float(metrics["stability.max_real_eig"]) < 0.0
    assert metrics["gains.verified"] == "false"


def test_parallel_jobs_match_serial():
    cfg = short("fig4", h=5e-4)
    serial = run_experiment(cfg, {"scale_exponents": [-1, 0]})
    par = run_experiment(cfg, {"scale_exponents": [-1, 0]}, jobs=2)
    assert serial.metrics == par.metrics
    for a, b in zip(serial.runs, par.runs):
        assert a.label == b.label and np.array_equal(a.trajectory.xhat, b.trajectory.xhat)
    assert [r.label for r in serial.runs] == ["fixed_m-1", "linear_m-1", "fixed_m0", "linear_m0"]
    assert "fixed.settling_ratio" in serial.metrics


def test_single_mode_run():
    res = run_experiment(short("fig3"), {"mode": "linear"})
    assert [r.label for r in res.runs] == ["linear"] and res.metrics["modes"] == "linear"


def test_synthesized_gains_path():
    doc = load_config("fig2").to_dict()
    doc["gains"].pop("injected")
    res = resolve_gains(parse_config(doc))
    assert res.verified and res.homogeneous.P_a is not None
    assert res.max_real_eig < 0.0
    assert np.allclose(res.linear.Hbar[0], res.homogeneous.Hbar[0])


def test_gainset_file_round_trip(tmp_path):
    gs = resolve_gains(load_config("fig5")).homogeneous
    path = tmp_path / "g.json"
    save_gainset(gs, path)
    back = load_gainset(path)
    assert back.to_dict() == gs.to_dict()
    path.write_text("{\n  \"schema\": 1,\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=r"g.json:3:1"):
        load_gainset(path)


def _doc():
    return load_config("fig2").to_dict()


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.update(schema="other"), "schema"),
        (lambda d: d["plant"].update(A=[[0, 1], [0, 0]]), "plant.B"),
        (lambda d: d["topology"].update(nodes=4), "topology.nodes"),
        (lambda d: d["topology"].update(edges=[[0, 0]]), "topology"),
        (lambda d: d["gains"].update(mode="sliding"), "gains.mode"),
        (lambda d: d["gains"].pop("mu"), "gains.mu"),
        (lambda d: d["gains"].update(injected="nope"), "unknown fragment"),
        (lambda d: d["sim"].update(h=0.3), "whole number"),
        (lambda d: d["sim"].update(x0=[1, 2]), "sim.x0"),
        (lambda d: d["sim"].update(tail_window=20.0), "tail_window"),
        (lambda d: d["plant"].update(gamma={"name": "cubic"}), "plant"),
    ],
)
def test_config_validation(mutate, match):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ConfigError, match=match):
        parse_config(doc)


def test_injected_gains_need_acknowledgement():
    doc = _doc()
    frag = dict(reference_gains()["reference-finite"])
    frag.pop("unverified")
    doc["gains"]["injected"] = frag
    with pytest.raises(ConfigError, match="unverified"):
        parse_config(doc)
    frag["unverified"] = True
    assert parse_config(doc).gains["injected"]["unverified"] is True


def test_json_errors_carry_line_context(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "schema": "homobs-config/1",\n  oops\n}\n', encoding="utf-8")
    with pytest.raises(ConfigError, match=r"bad.json:3:3"):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_unknown_override():
    with pytest.raises(ConfigError):
        apply_overrides(load_config("fig2"), {"gain": 3})


def test_settling_ratio():
    assert settling_ratio([1.0, 2.0, 4.0]) == 4.0
    assert settling_ratio([1.0, None]) == float("inf")


def test_compare_reports(tmp_path):
    m = run_experiment(short("fig3")).metrics
    tie = compare_metrics([m, m], ["a", "b"])
    assert any("tie" in line for line in tie.lines)
    assert any("tail_sup: finite < linear: PASS" in line for line in tie.lines)
    other = dict(m, **{"finite.tail_sup": "1e-9"})
    rep = compare_metrics([m, other], ["a", "b"])
    assert any(line.startswith("finite.tail_sup: b=1e-9 < a=") for line in rep.lines)
    with pytest.raises(ConfigError, match="at least two"):
        compare_metrics([m])
    with pytest.raises(ConfigError, match="incompatible"):
        compare_metrics([m, dict(m, h="0.0005")])


def test_compare_flags_failed_expectation():
    m = run_experiment(short("fig3")).metrics
    worse = dict(m, **{"finite.tail_sup": "10.0"})
    assert not compare_metrics([m, worse]).passed
