"""Experiment configs, gain resolution, runs and their output files.

A config is one JSON document with a ``schema`` field.  Built-in configs
``fig2`` .. ``fig5`` ship as package data together with the reference gain
fragments they inject.
"""

from __future__ import annotations

import copy
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import constants as K
from .errors import ConfigError, HomobsError, VerificationError
from .graph import Topology, decompose, laplacian, left_null_vector
from .observer import PlantModel, SensorModel, Signal, make_nonlinearity, make_signal
from .simulation import SimConfig, Trajectory, integrate, settling_time, tail_sup
from .synthesis import (
    MODES,
    GainSet,
    check_observability,
    closed_loop_matrix,
    max_real_eigenvalue,
    solve_structure_equation,
    synthesize_gains,
    verify_gain_set,
)

SCHEMA = "homobs-config/1"
GAINSET_SCHEMA = "homobs-gainset/1"
REGISTRY = ("fig2", "fig3", "fig4", "fig5")


# --------------------------------------------------------------------------
# config parsing


def _data_text(filename: str) -> str:
    return resources.files("homobs").joinpath("data", filename).read_text(encoding="utf-8")


def reference_gains() -> dict[str, dict]:
    return json.loads(_data_text("reference_gains.json"))


def _matrix(value, where: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a numeric matrix ({exc})") from None
    if m.ndim != 2:
        raise ConfigError(f"{where}: expected a list of rows, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ConfigError(f"{where}: non-finite entries")
    if rows is not None and m.shape[0] != rows:
        raise ConfigError(f"{where}: expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ConfigError(f"{where}: expected {cols} columns, got {m.shape[1]}")
    return m


def _vector(value, where: str, size: int) -> np.ndarray:
    try:
        v = np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a numeric vector ({exc})") from None
    if v.size != size or not np.all(np.isfinite(v)):
        raise ConfigError(f"{where}: expected {size} finite numbers")
    return v


def _get(d: Mapping, key: str, where: str):
    if not isinstance(d, Mapping) or key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    return d[key]


@dataclass(eq=False)
class ExperimentConfig:
    """Validated experiment description; ``raw`` is the normalized document."""

    raw: dict
    name: str
    plant: PlantModel
    sensors: SensorModel
    topology: Topology

    @property
    def gains(self) -> dict:
        return self.raw["gains"]

    @property
    def sim(self) -> dict:
        return self.raw["sim"]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def dumps(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"


def _model_error(where: str, exc: Exception) -> ConfigError:
    return ConfigError(f"{where}: {exc}")


def parse_config(doc: Mapping) -> ExperimentConfig:
    """Validate a config document; every cross-field dimension is checked here."""
    if not isinstance(doc, Mapping):
        raise ConfigError("config root must be an object")
    raw = copy.deepcopy(dict(doc))
    if raw.get("schema") != SCHEMA:
        raise ConfigError(f"schema must be {SCHEMA!r}, got {raw.get('schema')!r}")
    name = str(raw.get("name", "custom"))
    raw["name"] = name

    p = _get(raw, "plant", "config")
    a = _matrix(_get(p, "A", "plant"), "plant.A")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ConfigError(f"plant.A must be square, got {a.shape}")
    b = _matrix(p.get("B", [[0.0]] * n), "plant.B", rows=n)
    p.setdefault("B", b.tolist())
    p.setdefault("gamma", {"name": "zero"})
    p.setdefault("q_x", {"name": "zero"})
    p.setdefault("u", {"name": "zero"})
    try:
        plant = PlantModel(
            a,
            b,
            make_nonlinearity(p["gamma"], n),
            make_signal(p["q_x"], n),
            make_signal(p["u"], b.shape[1]),
        )
    except HomobsError as exc:
        raise _model_error("plant", exc) from None

    sensors_raw = _get(raw, "sensors", "config")
    if not isinstance(sensors_raw, list) or not sensors_raw:
        raise ConfigError("sensors: expected a non-empty list")
    cs, qs = [], []
    for i, s in enumerate(sensors_raw):
        c = _matrix(_get(s, "C", f"sensors[{i}]"), f"sensors[{i}].C", cols=n)
        s.setdefault("q_y", {"name": "zero"})
        try:
            qs.append(make_signal(s["q_y"], c.shape[0]))
        except HomobsError as exc:
            raise _model_error(f"sensors[{i}].q_y", exc) from None
        cs.append(c)
    sensors = SensorModel(tuple(cs), tuple(qs))

    t = _get(raw, "topology", "config")
    nodes = int(_get(t, "nodes", "topology"))
    if nodes != len(cs):
        raise ConfigError(f"topology.nodes = {nodes} but {len(cs)} sensors are given")
    try:
        topology = Topology.from_edges(nodes, [tuple(e) for e in _get(t, "edges", "topology")])
    except (HomobsError, TypeError, ValueError) as exc:
        raise _model_error("topology", exc) from None

    g = _get(raw, "gains", "config")
    mode = _get(g, "mode", "gains")
    if mode not in MODES:
        raise ConfigError(f"gains.mode must be one of {MODES}, got {mode!r}")
    g.setdefault("rho", 1.0)
    if float(g["rho"]) <= 0.0:
        raise ConfigError("gains.rho must be positive")
    nu = g.setdefault("nu", {"policy": "auto"})
    if nu.get("policy") not in ("fixed", "auto"):
        raise ConfigError("gains.nu.policy must be 'fixed' or 'auto'")
    if nu["policy"] == "fixed" and not float(nu.get("value", 0.0)) > 0.0:
        raise ConfigError("gains.nu.value must be positive for the fixed policy")
    if mode == "finite" and "mu" not in g:
        raise ConfigError("gains.mu is required in finite mode")
    if mode == "fixed" and ("mu0" not in g or "mu_inf" not in g):
        raise ConfigError("gains.mu0 and gains.mu_inf are required in fixed mode")
    injected = g.get("injected")
    if injected is not None:
        if isinstance(injected, str):
            frags = reference_gains()
            if injected not in frags:
                raise ConfigError(f"gains.injected: unknown fragment {injected!r}")
            frag = frags[injected]
        else:
            frag = injected
        _validate_injected(frag, cs, n)

    s = _get(raw, "sim", "config")
    h = float(s.setdefault("h", K.DEFAULT_STEP))
    t_end = float(_get(s, "t_end", "sim"))
    if h <= 0.0 or t_end <= 0.0:
        raise ConfigError("sim.h and sim.t_end must be positive")
    steps = round(t_end / h)
    if steps < 1 or abs(steps * h - t_end) > 1e-9 * t_end:
        raise ConfigError(f"sim.t_end = {t_end} is not a whole number of steps h = {h}")
    _vector(_get(s, "x0", "sim"), "sim.x0", n)
    xh0 = s.setdefault("xhat0", None)
    if xh0 is not None:
        if len(xh0) != nodes:
            raise ConfigError(f"sim.xhat0 needs {nodes} vectors")
        for i, v in enumerate(xh0):
            _vector(v, f"sim.xhat0[{i}]", n)
    if s.setdefault("method", "euler") not in ("euler", "rk4"):
        raise ConfigError("sim.method must be 'euler' or 'rk4'")
    s["perturbed"] = bool(s.setdefault("perturbed", False))
    if float(s.setdefault("threshold", K.FIGURE_THRESHOLD)) <= 0.0:
        raise ConfigError("sim.threshold must be positive")
    window = float(s.setdefault("tail_window", 2.0))
    if not 0.0 < window < t_end:
        raise ConfigError("sim.tail_window must lie in (0, t_end)")
    s.setdefault("scale_exponents", [0])
    s.setdefault("seed", 0)
    return ExperimentConfig(raw, name, plant, sensors, topology)


def _validate_injected(frag: Mapping, cs: Sequence[np.ndarray], n: int) -> None:
    hbar = _get(frag, "Hbar", "gains.injected")
    if len(hbar) != len(cs):
        raise ConfigError(f"gains.injected.Hbar needs {len(cs)} blocks")
    for i, (hb, c) in enumerate(zip(hbar, cs)):
        _matrix(hb, f"gains.injected.Hbar[{i}]", rows=n, cols=c.shape[0])
    _vector(_get(frag, "zeta", "gains.injected"), "gains.injected.zeta", len(cs))
    has_cert = frag.get("P_a") is not None and frag.get("Y") is not None
    if not has_cert and frag.get("unverified") is not True:
        raise ConfigError("gains.injected without P_a/Y needs 'unverified': true")


def load_config(target: str | os.PathLike) -> ExperimentConfig:
    """Parse a registry name (fig2..fig5) or a config file path."""
    if str(target) in REGISTRY:
        text = _data_text(f"{target}.json")
        where = f"<builtin {target}>"
    else:
        path = Path(target)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        where = str(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(doc)


def apply_overrides(cfg: ExperimentConfig, overrides: Mapping[str, Any] | None) -> ExperimentConfig:
    """Return a new config with sim-level overrides (h, t_end, perturbed, seed, scale_exponents)."""
    if not overrides:
        return cfg
    doc = cfg.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("h", "t_end", "perturbed", "seed", "scale_exponents", "method", "x0"):
            doc["sim"][key] = value
        elif key == "mode":
            continue
        else:
            raise ConfigError(f"unknown override {key!r}")
    return parse_config(doc)


# --------------------------------------------------------------------------
# gains


@dataclass
class ResolvedGains:
    homogeneous: GainSet | None
    linear: GainSet
    certificates: dict[str, float] = field(default_factory=dict)
    max_real_eig: float | None = None
    verified: bool = False


def _degrees(g: Mapping, mode: str) -> dict:
    if mode == "finite":
        return {"mu": float(g["mu"])}
    if mode == "fixed":
        return {"mu0": float(g["mu0"]), "mu_inf": float(g["mu_inf"])}
    return {}


def resolve_gains(cfg: ExperimentConfig, mode: str | None = None) -> ResolvedGains:
    """Injected gains are checked for closed-loop stability; synthesized ones are certified."""
    g = cfg.gains
    mode = mode or g["mode"]
    if mode != "linear" and mode != g["mode"]:
        needed = ("mu",) if mode == "finite" else ("mu0", "mu_inf")
        if any(k not in g for k in needed):
            raise ConfigError(f"mode {mode!r} needs gains.{' and gains.'.join(needed)}")
    A = cfg.plant.A
    cs = list(cfg.sensors.C)
    fixed_nu = float(g["nu"]["value"]) if g["nu"]["policy"] == "fixed" else None
    rho = float(g["rho"])
    structure = solve_structure_equation(A, np.vstack(cs))
    lap = laplacian(cfg.topology)
    hom_mode = g["mode"] if mode == "linear" else mode
    injected = g.get("injected")
    if injected is not None:
        frag = reference_gains()[injected] if isinstance(injected, str) else injected
        common = dict(
            Hbar=[np.array(h, dtype=float) for h in frag["Hbar"]],
            zeta=np.array(frag["zeta"], dtype=float),
            nu=fixed_nu if fixed_nu is not None else 1.0,
            rho=rho,
            G0=structure.G0,
            P_a=None if frag.get("P_a") is None else np.array(frag["P_a"], dtype=float),
            Y=None if frag.get("Y") is None else np.array(frag["Y"], dtype=float),
            unverified=frag.get("P_a") is None,
            source=str(frag.get("source", "injected")),
        )
        if fixed_nu is None:
            raise ConfigError("injected gains need the fixed nu policy")
        hom = GainSet(mode=hom_mode, **common, **_degrees(g, hom_mode))
        lin = GainSet(mode="linear", **common)
        out = ResolvedGains(hom, lin)
        out.max_real_eig = max_real_eigenvalue(closed_loop_matrix(A, cs, lin.H, lap, lin.nu))
        if not hom.unverified:
            dec = decompose(lap, left_null_vector(lap))
            rep = verify_gain_set(hom, dec.Delta, A, cs, L=lap, strict=False)
            out.certificates = rep.as_dict()
            out.verified = rep.passed
        return out
    hom = synthesize_gains(A, cs, cfg.topology, rho, hom_mode, nu=fixed_nu, **_degrees(g, hom_mode))
    lin = GainSet(
        mode="linear", Hbar=hom.Hbar, zeta=hom.zeta, nu=hom.nu, rho=hom.rho, G0=hom.G0,
        P_a=hom.P_a, Y=hom.Y, source=hom.source,
    )
    out = ResolvedGains(hom, lin, certificates=dict(hom.certificates), verified=True)
    out.max_real_eig = max_real_eigenvalue(closed_loop_matrix(A, cs, lin.H, lap, lin.nu))
    return out


def save_gainset(gs: GainSet, path: Path) -> None:
    doc = {"schema": GAINSET_SCHEMA, **gs.to_dict()}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_gainset(path: str | os.PathLike) -> GainSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if doc.get("schema") != GAINSET_SCHEMA:
        raise ConfigError(f"{path}: schema must be {GAINSET_SCHEMA!r}")
    try:
        return GainSet.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed gain set ({exc})") from None


# --------------------------------------------------------------------------
# runs


@dataclass
class RunResult:
    label: str
    mode: str
    scale_exponent: int
    trajectory: Trajectory
    settling: float | None
    tail: float


@dataclass
class ExperimentResult:
    name: str
    runs: list[RunResult]
    metrics: dict[str, str]
    files: list[Path] = field(default_factory=list)

    def run(self, label: str) -> RunResult:
        for r in self.runs:
            if r.label == label:
                return r
        raise KeyError(label)


def _models(cfg: ExperimentConfig) -> tuple[PlantModel, SensorModel]:
    if cfg.sim["perturbed"]:
        return cfg.plant, cfg.sensors
    return cfg.plant.without_perturbation(), cfg.sensors.without_perturbation()


def _job(args) -> Trajectory:
    cfg_doc, gs_doc, m = args
    cfg = parse_config(cfg_doc)
    gs = GainSet.from_dict(gs_doc)
    pm, sm = _models(cfg)
    s = cfg.sim
    sim = SimConfig(
        gains=gs,
        t_end=float(s["t_end"]),
        h=float(s["h"]),
        x0=10.0 ** m * np.asarray(s["x0"], dtype=float),
        xhat0=s["xhat0"],
        method=s["method"],
    )
    return integrate(sim, pm, sm, cfg.topology)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def settling_ratio(times: Sequence[float | None]) -> float:
    """max/min of settling times; inf when any run never settles."""
    if any(t is None for t in times):
        return math.inf
    lo = min(times)
    return math.inf if lo <= 0.0 else max(times) / lo


def run_experiment(
    target: str | os.PathLike | ExperimentConfig,
    overrides: Mapping[str, Any] | None = None,
    out_dir: str | os.PathLike | None = None,
    jobs: int = 1,
) -> ExperimentResult:
    """Run the homogeneous observer and its linear baseline for every scale exponent.

    ``overrides["mode"]`` restricts the run to one observer.  Runs are
    gathered in fixed order, so results do not depend on ``jobs``.
    """
    cfg = target if isinstance(target, ExperimentConfig) else load_config(target)
    overrides = dict(overrides or {})
    only = overrides.get("mode")
    cfg = apply_overrides(cfg, overrides)
    gains = resolve_gains(cfg, only)
    if only == "linear":
        plan = [gains.linear]
    elif only is not None:
        plan = [gains.homogeneous]
    else:
        plan = [gains.homogeneous, gains.linear]
    scales = [int(m) for m in cfg.sim["scale_exponents"]]
    multi = len(scales) > 1
    tasks = [(gs, m) for m in scales for gs in plan]
    args = [(cfg.raw, gs.to_dict(), m) for gs, m in tasks]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(_job, args))
    else:
        trajs = [_job(a) for a in args]

    s = cfg.sim
    threshold = float(s["threshold"])
    window = float(s["tail_window"])
    runs = []
    for (gs, m), tr in zip(tasks, trajs):
        label = f"{gs.mode}_m{m}" if multi else gs.mode
        runs.append(RunResult(label, gs.mode, m, tr, settling_time(tr, threshold), tail_sup(tr, window)))

    metrics: dict[str, str] = {
        "experiment": cfg.name,
        "schema": SCHEMA,
        "h": _fmt(float(s["h"])),
        "t_end": _fmt(float(s["t_end"])),
        "steps": str(int(round(float(s["t_end"]) / float(s["h"])))),
        "method": s["method"],
        "perturbed": _fmt(bool(s["perturbed"])),
        "threshold": _fmt(threshold),
        "tail_window": _fmt(window),
        "seed": str(s["seed"]),
        "scale_exponents": ",".join(str(m) for m in scales),
        "modes": ",".join(gs.mode for gs in plan),
        "gains.source": plan[0].source,
        "gains.verified": _fmt(gains.verified),
        "gains.nu": _fmt(float(plan[0].nu)),
    }
    if gains.max_real_eig is not None:
        metrics["stability.max_real_eig"] = _fmt(gains.max_real_eig)
    for k, v in gains.certificates.items():
        metrics[f"cert.{k}"] = _fmt(v)
    for r in runs:
        metrics[f"{r.label}.settling_time"] = _fmt(r.settling)
        metrics[f"{r.label}.tail_sup"] = _fmt(r.tail)
        metrics[f"{r.label}.e0_norm"] = _fmt(float(r.trajectory.e_norm[0]))
        metrics[f"{r.label}.e_final"] = _fmt(float(r.trajectory.e_norm[-1]))
    if multi:
        for gs in plan:
            ts = [r.settling for r in runs if r.mode == gs.mode]
            metrics[f"{gs.mode}.settling_ratio"] = _fmt(settling_ratio(ts))

    result = ExperimentResult(cfg.name, runs, metrics)
    if out_dir is not None:
        result.files = write_outputs(result, Path(out_dir))
    return result


# --------------------------------------------------------------------------
# output files


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, tr: Trajectory, baseline: Trajectory | None) -> None:
    """Columns t, e_norm, el_norm, e1..eN; el_norm is the paired linear run (nan if none)."""
    e = tr.e_norm
    el = baseline.e_norm if baseline is not None else np.full(e.size, np.nan)
    nodes = tr.node_norms
    header = ["t", "e_norm", "el_norm"] + [f"e{i + 1}" for i in range(nodes.shape[1])]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(e.size):
            row = [tr.times[k], e[k], el[k], *nodes[k]]
            fh.write(",".join(_g17(v) for v in row) + "\n")


def write_metrics(path: Path, metrics: Mapping[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in metrics.items():
            fh.write(f"{k}={v}\n")


def read_metrics(path: str | os.PathLike) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_outputs(result: ExperimentResult, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for r in result.runs:
        baseline = None
        for b in result.runs:
            if b.mode == "linear" and b.scale_exponent == r.scale_exponent:
                baseline = b.trajectory
        path = out_dir / f"{r.label}.csv"
        write_csv(path, r.trajectory, baseline)
        files.append(path)
    mpath = out_dir / "metrics.txt"
    write_metrics(mpath, result.metrics)
    files.append(mpath)
    return files


# --------------------------------------------------------------------------
# comparison


IDENTITY_KEYS = ("experiment", "h", "t_end", "perturbed", "scale_exponents")
RATIO_BOUND = 5.0


def _num(v: str) -> float:
    return math.inf if v == "none" else float(v)


@dataclass
class CompareReport:
    lines: list[str]
    passed: bool


def compare_metrics(metrics: Sequence[Mapping[str, str]], names: Sequence[str] | None = None) -> CompareReport:
    """Orderings across files plus the declared per-experiment expectations.

    Expectations: the homogeneous observer settles before the linear one;
    with perturbations its tail sup is smaller; with several scales its
    settling-time ratio is at most RATIO_BOUND and below the linear one.
    """
    if len(metrics) < 2:
        raise ConfigError("compare needs at least two metrics files")
    names = list(names or [f"#{i}" for i in range(len(metrics))])
    ident = [tuple(m.get(k) for k in IDENTITY_KEYS) for m in metrics]
    if any(i != ident[0] for i in ident):
        raise ConfigError(f"incompatible experiment identities: {ident}")
    lines: list[str] = []
    ok = True
    shared = [k for k in metrics[0] if k.endswith((".settling_time", ".tail_sup", ".settling_ratio"))]
    for key in shared:
        if not all(key in m for m in metrics):
            continue
        vals = [_num(m[key]) for m in metrics]
        if all(v == vals[0] for v in vals):
            lines.append(f"{key}: tie ({metrics[0][key]})")
        else:
            order = sorted(range(len(vals)), key=lambda i: vals[i])
            lines.append(f"{key}: " + " < ".join(f"{names[i]}={metrics[i][key]}" for i in order))
    for name, m in zip(names, metrics):
        modes = m.get("modes", "").split(",")
        hom = [x for x in modes if x != "linear"]
        if not hom or "linear" not in modes:
            continue
        hm = hom[0]
        scales = m.get("scale_exponents", "0").split(",")
        suffixes = [f"_m{s}" for s in scales] if len(scales) > 1 else [""]
        checks = []
        for sfx in suffixes:
            ts_h, ts_l = _num(m[f"{hm}{sfx}.settling_time"]), _num(m[f"linear{sfx}.settling_time"])
            checks.append((f"settling{sfx}: {hm} < linear", ts_h < ts_l, f"{ts_h!r} vs {ts_l!r}"))
            if m.get("perturbed") == "true":
                tl_h, tl_l = _num(m[f"{hm}{sfx}.tail_sup"]), _num(m[f"linear{sfx}.tail_sup"])
                checks.append((f"tail_sup{sfx}: {hm} < linear", tl_h < tl_l, f"{tl_h!r} vs {tl_l!r}"))
        if len(suffixes) > 1:
            rh, rl = _num(m[f"{hm}.settling_ratio"]), _num(m["linear.settling_ratio"])
            checks.append((f"settling_ratio: {hm} <= {RATIO_BOUND:g}", rh <= RATIO_BOUND, repr(rh)))
            checks.append((f"settling_ratio: {hm} < linear", rh < rl, f"{rh!r} vs {rl!r}"))
        for label, passed, detail in checks:
            ok = ok and passed
            lines.append(f"[{name}] {label}: {'PASS' if passed else 'FAIL'} ({detail})")
    return CompareReport(lines, ok)
