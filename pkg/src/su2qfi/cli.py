"""``qfi`` command line: compute, sweep, reparam and oracle-check jobs.

Every command reads one JSON job file (``--config``) and writes a JSON or CSV
document to ``--out`` (default stdout). Exit codes: 0 success, 2 invalid
config, 3 domain / branch failure, 4 oracle-check tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import oracle
from .engine import (
    MVectorSet,
    ProbeState,
    QfiMatrix,
    cramer_rao_bound,
    m_vectors,
    precision_limit,
    probe_from_density,
    qfi,
    qfi_matrix,
    singularity_report,
)
from .errors import DimensionError, DomainError, PreconditionError, SeriesConvergenceError, SingularFisherError
from .hamiltonian import HamiltonianSpec, ParamPoint, alpha_at
from .reparam import (
    CosetToCanonical,
    IdentityMap,
    LinearMap,
    coset_m_vectors,
    transfer_from_map,
    transform_m_vectors,
    transform_qfi,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_ORACLE = 4

M_ROUTES = ("closed", "wilcox", "fd", "series")
F_ROUTES = ("eigenbasis", "covariance")
ROUTES = M_ROUTES + F_ROUTES
# Pairwise tolerance is the larger of the two routes' values, times max(1, |value|).
ROUTE_TOL = {
    "closed": 1e-12,
    "wilcox": 1e-12,
    "fd": 1e-6,
    "series": 1e-10,
    "eigenbasis": 1e-10,
    "covariance": 1e-10,
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- config --------------------------------------------------------------


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int
    exclude_start: bool = False

    def values(self) -> np.ndarray:
        if self.exclude_start:
            return self.start + (self.stop - self.start) * np.arange(1, self.steps + 1) / self.steps
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class JobConfig:
    hamiltonian: HamiltonianSpec
    probe: ProbeState
    point: ParamPoint | None
    t: float
    sweep: Sweep | None = None
    repetitions: int = 1
    output_format: str = "json"
    output_path: str | None = None
    raw: dict | None = None


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _vector(value: Any, path: str, length: int | None = None) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(path, f"expected a list of numbers, got {value!r}")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(value)}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _parse_probe(data: Any) -> ProbeState:
    if not isinstance(data, dict):
        raise ConfigError("probe", "expected an object")
    has_bloch = "p0" in data or "bloch" in data
    has_density = "density" in data
    if has_bloch == has_density:
        raise ConfigError("probe", "give exactly one of {p0, bloch} or {density}")
    if has_density:
        rows = data["density"]
        if not (isinstance(rows, list) and len(rows) == 2):
            raise ConfigError("probe.density", "expected 2 rows of [re, im] pairs")
        rho = np.zeros((2, 2), dtype=complex)
        for i, row in enumerate(rows):
            if not (isinstance(row, list) and len(row) == 2):
                raise ConfigError(f"probe.density[{i}]", "expected 2 entries")
            for j, entry in enumerate(row):
                re, im = _vector(entry, f"probe.density[{i}][{j}]", 2)
                rho[i, j] = complex(re, im)
        try:
            return probe_from_density(rho)
        except ValueError as exc:
            raise ConfigError("probe.density", str(exc)) from None
    if "p0" not in data or "bloch" not in data:
        raise ConfigError("probe", "both p0 and bloch are required")
    p0 = _number(data["p0"], "probe.p0")
    if not 0 <= p0 <= 1:
        raise ConfigError("probe.p0", f"must lie in [0, 1], got {p0}")
    bloch = _vector(data["bloch"], "probe.bloch", 3)
    try:
        return ProbeState.from_bloch(p0, bloch)
    except ValueError as exc:
        raise ConfigError("probe.bloch", str(exc)) from None


def _parse_hamiltonian(data: Any) -> HamiltonianSpec:
    if not isinstance(data, dict):
        raise ConfigError("hamiltonian", "expected an object")
    if "kind" not in data:
        raise ConfigError("hamiltonian.kind", "required")
    try:
        return HamiltonianSpec.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise ConfigError("hamiltonian", str(exc)) from None


def parse_config(data: Any, output_format: str | None = None, output_path: str | None = None,
                 need_theta: bool = True) -> JobConfig:
    if not isinstance(data, dict):
        raise ConfigError("config", "expected a JSON object")
    spec = _parse_hamiltonian(data.get("hamiltonian"))
    probe = _parse_probe(data.get("probe"))
    point_data = data.get("point")
    if not isinstance(point_data, dict):
        raise ConfigError("point", "expected an object with theta and t")
    if "t" not in point_data:
        raise ConfigError("point.t", "required")
    t = _number(point_data["t"], "point.t")
    if t < 0:
        raise ConfigError("point.t", f"must be >= 0, got {t}")
    point = None
    if "theta" in point_data or need_theta:
        theta = _vector(point_data.get("theta"), "point.theta", spec.n)
        point = ParamPoint(theta, t)
    sweep = None
    if data.get("sweep") is not None:
        s = data["sweep"]
        if not isinstance(s, dict):
            raise ConfigError("sweep", "expected an object")
        var = s.get("variable")
        if var != "t" and var not in spec.params:
            raise ConfigError("sweep.variable", f"must be 't' or one of {list(spec.params)}, got {var!r}")
        steps = s.get("steps")
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError("sweep.steps", f"expected a positive integer, got {steps!r}")
        sweep = Sweep(var, _number(s.get("from"), "sweep.from"), _number(s.get("to"), "sweep.to"),
                      steps, bool(s.get("exclude_start", False)))
        if var == "t" and min(sweep.values()) < 0:
            raise ConfigError("sweep", "time values must be >= 0")
    reps = data.get("repetitions", 1)
    if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
        raise ConfigError("repetitions", f"expected a positive integer, got {reps!r}")
    out = data.get("output", {}) or {}
    fmt = output_format or out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError("output.format", f"must be json or csv, got {fmt!r}")
    return JobConfig(spec, probe, point, t, sweep, reps, fmt, output_path or out.get("path"), data)


# -- serialization -------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON writer with 17 significant digits for floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, np.number)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}" if math.isfinite(v) else "nan"
    return str(v)


def to_csv(columns: list[str], rows: list[list[Any]]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_csv_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------


def _probe_dict(probe: ProbeState) -> dict:
    return {"p0": probe.p0, "p1": probe.p1, "n_hat": list(probe.n_hat)}


def _precision(F: QfiMatrix, N: int) -> tuple[float | None, list[float] | None]:
    try:
        return precision_limit(F), cramer_rao_bound(F, N).tolist()
    except SingularFisherError:
        return None, None


def _f_columns(names: tuple[str, ...]) -> list[str]:
    return [f"F_{a}_{b}" for i, a in enumerate(names) for b in names[i:]]


def _f_entries(F: QfiMatrix) -> list[float]:
    n = F.n
    return [float(F.matrix[i, j]) for i in range(n) for j in range(i, n)]


def evaluate_point(spec: HamiltonianSpec, p: ParamPoint, probe: ProbeState, N: int = 1) -> dict:
    m = m_vectors(spec, p)
    F = qfi(spec, p, probe)
    trace_inv, bounds = _precision(F, N)
    return {
        "parameters": list(spec.params),
        "point": {"theta": list(p.theta), "t": p.t},
        "probe": _probe_dict(probe),
        "alpha": alpha_at(spec, p).tolist(),
        "m_vectors": {name: m.vectors[i].tolist() for i, name in enumerate(m.names)},
        "qfi": F.matrix.tolist(),
        "det_qfi": F.det,
        "trace_inverse_qfi": trace_inv,
        "cramer_rao": {
            "repetitions": N,
            "bounds": None if bounds is None else dict(zip(spec.params, bounds)),
        },
        "singularity": singularity_report(m, probe).to_dict(),
    }


def cmd_qfi(config: JobConfig) -> tuple[dict, int]:
    return evaluate_point(config.hamiltonian, config.point, config.probe, config.repetitions), EXIT_OK


def _row(value: float, F: QfiMatrix) -> list:
    trace_inv, _ = _precision(F, 1)
    return [value, *_f_entries(F), F.det, trace_inv]


def cmd_sweep(config: JobConfig) -> tuple[dict, int]:
    if config.sweep is None:
        raise ConfigError("sweep", "required for the sweep command")
    spec, probe, sweep = config.hamiltonian, config.probe, config.sweep
    base = config.point
    rows = []
    for value in sweep.values():
        value = float(value)
        if sweep.variable == "t":
            p = base.replace(t=value)
        else:
            theta = list(base.theta)
            theta[spec.params.index(sweep.variable)] = value
            p = base.replace(theta=theta)
        rows.append(_row(value, qfi(spec, p, probe)))
    columns = [sweep.variable, *_f_columns(spec.params), "det_F", "trace_inv_F"]
    return {"variable": sweep.variable, "parameters": list(spec.params), "probe": _probe_dict(probe),
            "columns": columns, "rows": rows}, EXIT_OK


def _parse_map(data: Any, spec: HamiltonianSpec, t: float):
    if not isinstance(data, dict):
        raise ConfigError("reparam", "expected an object")
    mdata = data.get("map")
    if not isinstance(mdata, dict) or "kind" not in mdata:
        raise ConfigError("reparam.map.kind", "required")
    kind = mdata["kind"]
    if kind == "identity":
        pmap = IdentityMap(spec.params)
    elif kind == "linear":
        A = mdata.get("matrix")
        if not isinstance(A, list) or not A:
            raise ConfigError("reparam.map.matrix", "expected a non-empty list of rows")
        rows = [_vector(r, f"reparam.map.matrix[{i}]") for i, r in enumerate(A)]
        if len({len(r) for r in rows}) != 1:
            raise ConfigError("reparam.map.matrix", "rows must have equal length")
        if len(rows) != spec.n:
            raise ConfigError("reparam.map.matrix", f"needs {spec.n} rows (one per {list(spec.params)}), got {len(rows)}")
        names = data.get("names") or [f"beta{l + 1}" for l in range(len(rows[0]))]
        if len(names) != len(rows[0]):
            raise ConfigError("reparam.names", f"expected {len(rows[0])} names, got {len(names)}")
        offset = mdata.get("offset")
        if offset is not None:
            offset = _vector(offset, "reparam.map.offset", spec.n)
        pmap = LinearMap(rows, spec.params, names, offset)
    elif kind == "coset-to-canonical":
        if spec.kind != "angle-axis" or spec.params != ("r", "theta", "phi"):
            raise ConfigError("hamiltonian", "coset-to-canonical needs an angle-axis spec with params [r, theta, phi]")
        if not t > 0:
            raise ConfigError("point.t", "coset-to-canonical needs t > 0")
        pmap = CosetToCanonical(t)
    else:
        raise ConfigError("reparam.map.kind", f"unknown map kind {kind!r}")
    beta = _vector(data.get("beta"), "reparam.beta", len(pmap.target_names))
    return pmap, kind, beta


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def cmd_reparam(config: JobConfig) -> tuple[dict, int]:
    spec, probe, t = config.hamiltonian, config.probe, config.t
    pmap, kind, beta = _parse_map((config.raw or {}).get("reparam"), spec, t)
    alpha_point = ParamPoint(pmap(np.array(beta)), t)
    S = transfer_from_map(pmap, beta)
    m_alpha = m_vectors(spec, alpha_point)
    F_alpha = qfi_matrix(m_alpha, probe)
    F_beta = transform_qfi(F_alpha, S)
    F_beta_m = qfi_matrix(transform_m_vectors(m_alpha, S), probe)
    report = {
        "map": kind,
        "source": {"parameters": list(S.source_names), "point": list(alpha_point.theta)},
        "target": {"parameters": list(S.target_names), "point": list(beta)},
        "t": t,
        "probe": _probe_dict(probe),
        "transfer_matrix": S.S.tolist(),
        "qfi_source": F_alpha.matrix.tolist(),
        "qfi_target": F_beta.matrix.tolist(),
        "qfi_target_m_route": F_beta_m.matrix.tolist(),
        "residual": _max_abs(F_beta.matrix, F_beta_m.matrix),
    }
    if kind == "coset-to-canonical":
        F_direct = qfi_matrix(coset_m_vectors(*beta), probe)
        report["qfi_target_direct"] = F_direct.matrix.tolist()
        report["residual_direct"] = _max_abs(F_beta.matrix, F_direct.matrix)
    return report, EXIT_OK


def _oracle_options(raw: dict) -> dict:
    opts = raw.get("oracle", {}) or {}
    if not isinstance(opts, dict):
        raise ConfigError("oracle", "expected an object")
    routes = opts.get("routes", list(ROUTES))
    if not isinstance(routes, list) or len(set(routes)) < 2:
        raise ConfigError("oracle.routes", "select at least two distinct routes")
    bad = [r for r in routes if r not in ROUTES]
    if bad:
        raise ConfigError("oracle.routes", f"unknown routes {bad}; choose from {list(ROUTES)}")
    n_terms = opts.get("series_terms", 30)
    order = opts.get("quadrature_order", oracle.QUADRATURE_ORDER)
    for key, val, low in (("series_terms", n_terms, 1), ("quadrature_order", order, 2)):
        if isinstance(val, bool) or not isinstance(val, int) or val < low:
            raise ConfigError(f"oracle.{key}", f"expected an integer >= {low}, got {val!r}")
    step = opts.get("fd_step")
    if step is not None:
        step = _number(step, "oracle.fd_step")
        if step <= 0:
            raise ConfigError("oracle.fd_step", "must be positive")
    return {"routes": list(dict.fromkeys(routes)), "series_terms": n_terms,
            "quadrature_order": order, "fd_step": step}


def cmd_oracle_check(config: JobConfig, routes: list[str] | None = None) -> tuple[dict, int]:
    raw = dict(config.raw or {})
    if routes is not None:
        raw["oracle"] = {**(raw.get("oracle") or {}), "routes": routes}
    opts = _oracle_options(raw)
    spec, p, probe = config.hamiltonian, config.point, config.probe
    n = spec.n

    m_route: dict[str, Callable[[int], np.ndarray]] = {
        "closed": lambda i, _m=m_vectors(spec, p): _m.vectors[i],
        "wilcox": lambda i: oracle.m_vector_wilcox(spec, p, i, opts["quadrature_order"]),
        "fd": lambda i: oracle.m_vector_fd(spec, p, i, opts["fd_step"]),
        "series": lambda i: oracle.h_series(spec, p, i, opts["series_terms"]).m,
    }
    m_values: dict[str, np.ndarray] = {}
    F_values: dict[str, np.ndarray] = {}
    errors: dict[str, str] = {}
    for r in opts["routes"]:
        try:
            if r in M_ROUTES:
                m_values[r] = np.array([m_route[r](i) for i in range(n)]).reshape(n, 3)
                F_values[r] = qfi_matrix(MVectorSet(m_values[r], spec.params), probe).matrix
            else:
                Ms = [oracle.m_matrix_wilcox(spec, p, i, opts["quadrature_order"]) for i in range(n)]
                if r == "eigenbasis":
                    F_values[r] = oracle.qfi_eigenbasis(Ms, probe, spec.params).matrix
                else:
                    F_values[r] = oracle.qfi_covariance([-M.matrix for M in Ms], probe, spec.params).matrix
        except SeriesConvergenceError as exc:
            errors[r] = str(exc)

    pairs = []
    for a, b in combinations(opts["routes"], 2):
        tol = max(ROUTE_TOL[a], ROUTE_TOL[b])
        quantities = []
        if a in m_values and b in m_values:
            quantities.append(("m", m_values[a], m_values[b]))
        if a in F_values and b in F_values:
            quantities.append(("F", F_values[a], F_values[b]))
        if a in errors or b in errors:
            pairs.append({"route_a": a, "route_b": b, "quantity": "all", "max_deviation": None,
                          "tolerance": tol, "pass": False})
            continue
        for q, va, vb in quantities:
            scale = max(1.0, float(np.max(np.abs(va), initial=0.0)), float(np.max(np.abs(vb), initial=0.0)))
            dev = _max_abs(va, vb)
            pairs.append({"route_a": a, "route_b": b, "quantity": q, "max_deviation": dev,
                          "tolerance": tol * scale, "pass": bool(dev <= tol * scale)})
    verdict = {}
    for r in opts["routes"]:
        mine = [pr for pr in pairs if r in (pr["route_a"], pr["route_b"])]
        failed = sum(not pr["pass"] for pr in mine)
        verdict[r] = "flagged" if r in errors or (mine and 2 * failed > len(mine)) else "ok"
    ok = all(pr["pass"] for pr in pairs)
    report = {
        "parameters": list(spec.params),
        "point": {"theta": list(p.theta), "t": p.t},
        "routes": verdict,
        "route_errors": errors,
        "pairs": pairs,
        "pass": ok,
    }
    return report, EXIT_OK if ok else EXIT_ORACLE


# -- entry point ---------------------------------------------------------


def _render(command: str, report: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(report) + "\n"
    if command == "sweep":
        return to_csv(report["columns"], report["rows"])
    if command == "compute":
        names = tuple(report["parameters"])
        F = QfiMatrix(np.array(report["qfi"]), names)
        cols = ["t", *names, *_f_columns(names), "det_F", "trace_inv_F"]
        row = [report["point"]["t"], *report["point"]["theta"], *_f_entries(F), report["det_qfi"],
               report["trace_inverse_qfi"]]
        return to_csv(cols, [row])
    if command == "reparam":
        src, tgt = report["source"]["parameters"], report["target"]["parameters"]
        cols = [f"S_{a}_{b}" for a in src for b in tgt]
        cols += [f"F_{a}_{b}" for i, a in enumerate(tgt) for b in tgt[i:]]
        cols += ["residual"] + (["residual_direct"] if "residual_direct" in report else [])
        S = np.array(report["transfer_matrix"])
        F = np.array(report["qfi_target"])
        row = [*S.ravel().tolist(), *[F[i, j] for i in range(len(tgt)) for j in range(i, len(tgt))],
               report["residual"]]
        if "residual_direct" in report:
            row.append(report["residual_direct"])
        return to_csv(cols, [row])
    cols = ["route_a", "route_b", "quantity", "max_deviation", "tolerance", "pass"]
    rows = [[pr[c] for c in cols] for pr in report["pairs"]]
    return to_csv(cols, rows)


COMMANDS = {
    "compute": cmd_qfi,
    "sweep": cmd_sweep,
    "reparam": cmd_reparam,
    "oracle-check": cmd_oracle_check,
}


def run(command: str, data: Any, output_format: str | None = None,
        routes: list[str] | None = None) -> tuple[str, int]:
    """Run a command on an already-loaded config; returns ``(text, exit_code)``."""
    config = parse_config(data, output_format, need_theta=command != "reparam")
    if command == "oracle-check":
        report, code = cmd_oracle_check(config, routes)
    else:
        report, code = COMMANDS[command](config)
    return _render(command, report, config.output_format), code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfi", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON job file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), help="overrides output.format")
    parser.add_argument("--routes", help="comma-separated oracle routes (oracle-check only)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = json.loads(Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: config: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    routes = args.routes.split(",") if args.routes else None
    try:
        text, code = run(args.command, data, args.format, routes)
    except ConfigError as exc:
        print(f"error: config.{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DimensionError, PreconditionError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        coord = getattr(exc, "coordinate", None)
        suffix = f" [coordinate: {coord}]" if coord else ""
        print(f"error: domain: {exc}{suffix}", file=sys.stderr)
        return EXIT_DOMAIN
    out = args.out or ((data.get("output") or {}).get("path") if isinstance(data, dict) else None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
