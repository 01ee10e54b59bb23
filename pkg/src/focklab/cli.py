"""Config-driven command line producing machine-readable reports.

Each subcommand runs one experiment from the library against a configured
measure, writes a JSON or CSV report, and exits 0 only if every tolerance
check passed (1 on a tolerance failure, 2 on a config problem).  Reports
carry the toolkit version and a hash of the effective config, and contain
no timestamps, so identical configs give byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .counterexample import CounterexampleParams, full_report
from .errors import ConfigError, FocklabError
from .fock import FockParams, default_degree, kernel_continuity_probe, norm_grid
from .lattice import convergence_study, rigidity_experiment
from .measure import (GaussianDensity, PointMasses, berezin_measure,
                      berezin_lr_norm, is_positive, support_radius_of,
                      total_mass, total_variation, uniform_disk)
from .numerics import polar_grid
from .toeplitz import (adjoint_isometry_check, build_from_measure,
                       build_hankel, identity_operator, schatten_norm,
                       singular_values, trace, trace_pairing,
                       trace_via_berezin, transform_l1_norm)

DEFAULT_R_VALUES = tuple(2.0 ** -n for n in range(7))

DEFAULT_TOLERANCES = {
    "mass_identity": 1e-7,        # | ||transform||_1 - |mu|(C) | / max(1, TV)
    "trace": 1e-9,                # |trace - (alpha/pi) mu(C)|
    "trace_transform": 1e-7,      # trace vs transform integral, relative
    "adjoint_isometry": 1e-10,    # S1 of T vs T*, relative
    "transform_bound": 1e-8,      # ||transform||_1 <= S1 + tol
    "nuclear_ceiling": 1e-9,      # bound <= (alpha/pi)|mu|(C) + tol
    "error_decrease": 1e-12,      # allowed rise between consecutive s1 errors
    "rigidity_slack": 0.05,       # upper <= lower * (1 + slack)
    "pairing": 1e-6,              # matrix vs quadrature pairing, relative
    "pairing_identity": 1e-10,    # lacunary pairing-term residual
    "continuity": 2.0,            # distance / (sqrt(alpha) * offset) cap
    "continuity_monotone": 1e-12, # allowed rise between shrinking offsets
}


# ---------------------------------------------------------------------------
# config parsing

def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}" if path else message)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _require_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    return obj


def _check_keys(obj: dict, path: str, allowed):
    for key in obj:
        if key not in allowed:
            _fail(_join(path, key), "unknown key")


def _real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, "expected a number")
    out = float(value)
    if not math.isfinite(out):
        _fail(path, "must be finite")
    return out


def _positive_real(value, path: str) -> float:
    out = _real(value, path)
    if not out > 0.0:
        _fail(path, "must be positive")
    return out


def _parse_measure(obj, path: str) -> dict:
    spec = _require_mapping(obj, path)
    kind = spec.get("type")
    if kind == "point_masses":
        _check_keys(spec, path, {"type", "points"})
        raw = spec.get("points")
        if not isinstance(raw, list):
            _fail(_join(path, "points"), "expected a list")
        points = []
        for i, entry in enumerate(raw):
            ppath = f"{path}.points[{i}]"
            point = _require_mapping(entry, ppath)
            _check_keys(point, ppath, {"x", "y", "w_re", "w_im"})
            if "x" not in point or "y" not in point:
                _fail(ppath, "needs x and y")
            points.append({
                "x": _real(point["x"], _join(ppath, "x")),
                "y": _real(point["y"], _join(ppath, "y")),
                "w_re": _real(point.get("w_re", 1.0), _join(ppath, "w_re")),
                "w_im": _real(point.get("w_im", 0.0), _join(ppath, "w_im")),
            })
        return {"type": kind, "points": points}
    if kind == "uniform_disk":
        _check_keys(spec, path, {"type", "radius", "amplitude"})
        if "radius" not in spec:
            _fail(_join(path, "radius"), "required")
        return {"type": kind,
                "radius": _positive_real(spec["radius"],
                                         _join(path, "radius")),
                "amplitude": _real(spec.get("amplitude", 1.0),
                                   _join(path, "amplitude"))}
    if kind == "gaussian":
        _check_keys(spec, path, {"type", "amplitude", "beta", "x", "y"})
        if "beta" not in spec:
            _fail(_join(path, "beta"), "required")
        return {"type": kind,
                "amplitude": _real(spec.get("amplitude", 1.0),
                                   _join(path, "amplitude")),
                "beta": _positive_real(spec["beta"], _join(path, "beta")),
                "x": _real(spec.get("x", 0.0), _join(path, "x")),
                "y": _real(spec.get("y", 0.0), _join(path, "y"))}
    _fail(_join(path, "type"),
          "expected one of point_masses, uniform_disk, gaussian")


class RunConfig:
    """Validated, fully defaulted run configuration."""

    def __init__(self, alpha, truncation, grid, measure, exponents, r_values,
                 tolerances, output_format, output_path):
        self.alpha = alpha
        self.truncation = truncation
        self.grid = grid
        self.measure = measure
        self.exponents = exponents
        self.r_values = r_values
        self.tolerances = tolerances
        self.output_format = output_format
        self.output_path = output_path

    def normalized(self) -> dict:
        return {
            "alpha": self.alpha,
            "truncation": self.truncation,
            "grid": None if self.grid is None else {
                "cutoff_radius": self.grid[0],
                "radial_nodes": self.grid[1],
                "angular_nodes": self.grid[2],
            },
            "measure": self.measure,
            "exponents": {"p": self.exponents[0], "q": self.exponents[1]},
            "r_values": list(self.r_values),
            "tolerances": {k: self.tolerances[k]
                           for k in sorted(self.tolerances)},
            "output": {"format": self.output_format,
                       "path": self.output_path},
        }

    def digest(self) -> str:
        # the output block says where to write, not what to compute, so it
        # stays out of the hash; otherwise --out would change the report body
        payload = self.normalized()
        del payload["output"]
        canonical = json.dumps(payload, sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def params(self) -> FockParams:
        try:
            return FockParams(alpha=self.alpha, p=self.exponents[0],
                              q=self.exponents[1])
        except ValueError as exc:
            raise ConfigError(str(exc))

    def polar(self):
        if self.grid is None:
            return None
        return polar_grid(self.grid[0], self.grid[1], self.grid[2])

    def require_measure(self):
        if self.measure is None:
            raise ConfigError("measure: required for this subcommand")
        return build_measure(self.measure)


_TOP_KEYS = {"alpha", "truncation", "grid", "measure", "exponents",
             "r_values", "tolerances", "output"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate config JSON; unknown keys name their dotted path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}")
    top = _require_mapping(raw, "")
    _check_keys(top, "", _TOP_KEYS)

    alpha = _positive_real(top.get("alpha", 1.0), "alpha")

    truncation = top.get("truncation", 64)
    if isinstance(truncation, bool) or not isinstance(truncation, int):
        _fail("truncation", "expected an integer")
    if truncation < 8:
        _fail("truncation", "must be at least 8")

    grid = None
    if top.get("grid") is not None:
        gobj = _require_mapping(top["grid"], "grid")
        _check_keys(gobj, "grid",
                    {"cutoff_radius", "radial_nodes", "angular_nodes"})
        for key in ("cutoff_radius", "radial_nodes", "angular_nodes"):
            if key not in gobj:
                _fail(_join("grid", key), "required")
        cutoff = _positive_real(gobj["cutoff_radius"], "grid.cutoff_radius")
        nodes = []
        for key in ("radial_nodes", "angular_nodes"):
            value = gobj[key]
            if isinstance(value, bool) or not isinstance(value, int):
                _fail(_join("grid", key), "expected an integer")
            nodes.append(value)
        try:
            polar_grid(cutoff, nodes[0], nodes[1])
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}")
        grid = (cutoff, nodes[0], nodes[1])

    measure = None
    if top.get("measure") is not None:
        measure = _parse_measure(top["measure"], "measure")

    p, q = 4.0 / 3.0, 4.0
    if top.get("exponents") is not None:
        eobj = _require_mapping(top["exponents"], "exponents")
        _check_keys(eobj, "exponents", {"p", "q"})
        p = _real(eobj.get("p", p), "exponents.p")
        q = _real(eobj.get("q", q), "exponents.q")
        for name, value in (("p", p), ("q", q)):
            if value < 1.0:
                _fail(_join("exponents", name), "must be at least 1")

    r_values = DEFAULT_R_VALUES
    if top.get("r_values") is not None:
        if not isinstance(top["r_values"], list) or not top["r_values"]:
            _fail("r_values", "expected a nonempty list")
        values = [_positive_real(v, f"r_values[{i}]")
                  for i, v in enumerate(top["r_values"])]
        if any(b >= a for a, b in zip(values, values[1:])):
            _fail("r_values", "must be strictly decreasing")
        r_values = tuple(values)

    tolerances = {}
    if top.get("tolerances") is not None:
        tobj = _require_mapping(top["tolerances"], "tolerances")
        for name, value in tobj.items():
            if name not in DEFAULT_TOLERANCES:
                _fail(_join("tolerances", name), "unknown tolerance name")
            tolerances[name] = _positive_real(value,
                                              _join("tolerances", name))

    output_format, output_path = "json", None
    if top.get("output") is not None:
        oobj = _require_mapping(top["output"], "output")
        _check_keys(oobj, "output", {"format", "path"})
        output_format = oobj.get("format", "json")
        if output_format not in ("json", "csv"):
            _fail("output.format", "expected json or csv")
        output_path = oobj.get("path")
        if output_path is not None and not isinstance(output_path, str):
            _fail("output.path", "expected a string")

    return RunConfig(alpha, truncation, grid, measure, (p, q), r_values,
                     tolerances, output_format, output_path)


def build_measure(spec: dict):
    """Turn a normalized measure spec into a measure object."""
    kind = spec["type"]
    if kind == "point_masses":
        points = tuple((complex(e["x"], e["y"]), complex(e["w_re"], e["w_im"]))
                       for e in spec["points"])
        return PointMasses(points)
    if kind == "uniform_disk":
        return uniform_disk(spec["amplitude"], spec["radius"])
    return GaussianDensity(amplitude=spec["amplitude"], beta=spec["beta"],
                           center=complex(spec["x"], spec["y"]))


# ---------------------------------------------------------------------------
# report assembly

def _check(name: str, value: float, tolerance: float, passed: bool) -> dict:
    return {"name": name, "value": float(value), "tolerance": float(tolerance),
            "passed": bool(passed)}


def _bounded(config: RunConfig, name: str, value: float) -> dict:
    tol = config.tolerance(name)
    return _check(name, value, tol, value <= tol)


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def render_csv(report: dict, header, rows) -> str:
    lines = [f"# focklab {report['version']} "
             f"config_sha256={report['config_sha256']}",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand runners; each returns (data, (csv_header, csv_rows), checks)

def run_berezin(config: RunConfig, seed):
    mu = config.require_measure()
    params = config.params()
    reach = support_radius_of(mu) + 2.0 / math.sqrt(config.alpha)
    sample_z = np.linspace(0.0, reach, 9)
    values = berezin_measure(mu, sample_z.astype(complex), params)
    l1 = berezin_lr_norm(mu, 1.0, params, config.polar())
    tv = total_variation(mu)
    data = {
        "samples": [{"z_re": float(z), "z_im": 0.0,
                     "re": float(v.real), "im": float(v.imag)}
                    for z, v in zip(sample_z, values)],
        "l1_norm": float(l1),
        "total_variation": float(tv),
    }
    checks = []
    if is_positive(mu):
        residual = abs(l1 - tv) / max(1.0, tv)
        checks.append(_bounded(config, "mass_identity", residual))
    rows = [(s["z_re"], s["z_im"], s["re"], s["im"]) for s in data["samples"]]
    return data, (("z_re", "z_im", "re", "im"), rows), checks


def _matrix_report(op):
    entries = op.entries
    return {
        "truncation": int(op.truncation),
        "trace_re": float(np.trace(entries).real),
        "trace_im": float(np.trace(entries).imag),
        "entries": [[[float(v.real), float(v.imag)] for v in row]
                    for row in entries],
    }


def _matrix_rows(entries):
    rows = []
    for m in range(entries.shape[0]):
        for n in range(entries.shape[1]):
            rows.append((m, n, float(entries[m, n].real),
                         float(entries[m, n].imag)))
    return ("m", "n", "re", "im"), rows


def run_toeplitz(config: RunConfig, seed):
    op = build_from_measure(config.require_measure(), config.truncation,
                            config.params())
    data = _matrix_report(op)
    data["provenance"] = op.provenance
    return data, _matrix_rows(op.entries), []


def run_hankel(config: RunConfig, seed):
    mat = build_hankel(config.require_measure(), config.truncation,
                       config.params())
    return _matrix_report(mat), _matrix_rows(mat.entries), []


def run_trace_check(config: RunConfig, seed):
    mu = config.require_measure()
    params = config.params()
    op = build_from_measure(mu, config.truncation, params)
    tr = trace(op)
    expected = (config.alpha / math.pi) * total_mass(mu)
    via_transform = trace_via_berezin(op, config.polar())
    mass_residual = abs(tr - expected)
    transform_residual = abs(tr - via_transform) / (1.0 + abs(tr))
    data = {
        "trace_re": float(tr.real), "trace_im": float(tr.imag),
        "expected_re": float(expected.real),
        "expected_im": float(expected.imag),
        "transform_trace_re": float(via_transform.real),
        "transform_trace_im": float(via_transform.imag),
        "mass_residual": float(mass_residual),
        "transform_residual": float(transform_residual),
    }
    checks = [_bounded(config, "trace", mass_residual),
              _bounded(config, "trace_transform", transform_residual)]
    rows = [(k, v) for k, v in data.items()]
    return data, (("name", "value"), rows), checks


def run_schatten(config: RunConfig, seed):
    op = build_from_measure(config.require_measure(), config.truncation,
                            config.params())
    sigma = singular_values(op)
    s1, s1_adjoint = adjoint_isometry_check(op)
    l1 = transform_l1_norm(op, config.polar())
    data = {
        "schatten_1": float(s1),
        "schatten_2": float(schatten_norm(op, 2.0)),
        "operator_norm": float(schatten_norm(op, math.inf)),
        "adjoint_schatten_1": float(s1_adjoint),
        "transform_l1": float(l1),
        "singular_values": [float(v) for v in sigma],
    }
    checks = [
        _bounded(config, "adjoint_isometry",
                 abs(s1 - s1_adjoint) / (1.0 + s1)),
        _bounded(config, "transform_bound", l1 - s1),
    ]
    rows = [(n, float(v)) for n, v in enumerate(sigma)]
    return data, (("n", "sigma"), rows), checks


def run_lattice_approx(config: RunConfig, seed):
    mu = config.require_measure()
    params = config.params()
    study = convergence_study(mu, config.r_values, config.truncation, params)
    ceiling = (config.alpha / math.pi) * total_variation(mu)
    data = {"rows": [{"r": float(row.r),
                      "s1_error": float(row.s1_error),
                      "op_error": float(row.op_error),
                      "nuclear_bound": float(row.nuclear_bound)}
                     for row in study],
            "nuclear_ceiling": float(ceiling)}
    worst_excess = max(row.nuclear_bound - ceiling for row in study)
    worst_rise = max((b.s1_error - a.s1_error
                      for a, b in zip(study, study[1:])), default=0.0)
    checks = [_bounded(config, "nuclear_ceiling", worst_excess),
              _bounded(config, "error_decrease", worst_rise)]
    rows = [(float(row.r), float(row.s1_error), float(row.op_error),
             float(row.nuclear_bound)) for row in study]
    return data, (("r", "s1_error", "op_error", "nuclear_bound"), rows), checks


def run_rigidity(config: RunConfig, seed):
    mu = config.require_measure()
    p, q = config.exponents
    # the experiment's convention wants the pair ordered with q <= p; the
    # bracket itself is exponent independent, so ordering loses nothing
    pq_grid = [(max(p, q), min(p, q))]
    slack = config.tolerance("rigidity_slack")
    report = rigidity_experiment(mu, pq_grid, config.params(), slack=slack)
    data = {
        "lower": float(report.lower),
        "upper": float(report.upper),
        "slack": float(report.slack),
        "within_slack": bool(report.within_slack),
        "rows": [{"p": float(row.p), "q": float(row.q),
                  "lower": float(row.lower), "upper": float(row.upper),
                  "kernel_norm_residual": float(row.kernel_norm_residual)}
                 for row in report.rows],
    }
    width = (report.upper - report.lower) / report.lower \
        if report.lower > 0.0 else 0.0
    checks = [_check("rigidity_slack", width, slack, report.within_slack)]
    rows = [(float(row.p), float(row.q), float(row.lower), float(row.upper),
             float(row.kernel_norm_residual)) for row in report.rows]
    return data, (("p", "q", "lower", "upper", "kernel_norm_residual"),
                  rows), checks


def run_trace_pairing(config: RunConfig, seed):
    mu = config.require_measure()
    params = config.params()
    op = identity_operator(config.truncation, params)
    matrix_side, quadrature_side = trace_pairing(mu, op, config.polar())
    residual = abs(matrix_side - quadrature_side) / (1.0 + abs(matrix_side))
    data = {
        "matrix_re": float(matrix_side.real),
        "matrix_im": float(matrix_side.imag),
        "quadrature_re": float(quadrature_side.real),
        "quadrature_im": float(quadrature_side.imag),
        "residual": float(residual),
    }
    checks = [_bounded(config, "pairing", residual)]
    rows = [(k, v) for k, v in data.items()]
    return data, (("name", "value"), rows), checks


def run_counterexample(config: RunConfig, seed):
    p, q = config.exponents
    try:
        params = CounterexampleParams(p=p, q=q, alpha=config.alpha)
    except ValueError as exc:
        raise ConfigError(f"exponents: {exc}")
    data = full_report(params)
    checks = []
    if params.terms:
        checks.append(_bounded(config, "pairing_identity",
                               max(data["pairing_identity_residuals"])))
    if params.terms > 1:
        ratios = (data["membership_f_terms"], data["membership_g_terms"])
        worst = max(b / a for terms in ratios
                    for a, b in zip(terms, terms[1:]))
        checks.append(_check("membership_convergent", worst, 1.0,
                             worst < 1.0))
        floor = params.b ** 2 / 3.0
        slowest = min(data["divergence_ratios"])
        checks.append(_check("divergence_floor", slowest, floor,
                             slowest >= floor))
    rows = []
    for i in range(params.terms):
        rows.append((i + 1, data["indices"][i],
                     data["membership_f_terms"][i],
                     data["membership_g_terms"][i],
                     data["divergence_partial_sums"][i],
                     data["pairing_identity_residuals"][i],
                     data["growth_ratios"][i]))
    header = ("k", "index", "membership_f", "membership_g",
              "divergence_partial", "pairing_residual", "growth_ratio")
    return data, (header, rows), checks


def run_kernel_continuity(config: RunConfig, seed):
    params = config.params()
    rng = np.random.default_rng(0 if seed is None else seed)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    z0 = complex(math.cos(angle), math.sin(angle)) / math.sqrt(config.alpha)
    deltas = config.r_values
    grid = config.polar()
    if grid is None:
        degree = default_degree(config.alpha, abs(z0) + max(deltas))
        grid = norm_grid(params, degree)
    distances = kernel_continuity_probe(z0, deltas, params.p, params, grid)
    scale = math.sqrt(config.alpha)
    data = {
        "z0_re": float(z0.real), "z0_im": float(z0.imag),
        "p": float(params.p),
        "offsets": [float(d) for d in deltas],
        "distances": [float(d) for d in distances],
    }
    worst_rate = max(d / (scale * off) for d, off in zip(distances, deltas))
    # offsets shrink along the list, so each distance should undershoot the
    # previous one; a positive difference is a monotonicity violation
    worst_rise = max((b - a for a, b in zip(distances, distances[1:])),
                     default=0.0)
    checks = [_bounded(config, "continuity", worst_rate),
              _bounded(config, "continuity_monotone", worst_rise)]
    rows = list(zip(data["offsets"], data["distances"]))
    return data, (("offset", "distance"), rows), checks


SUBCOMMANDS = {
    "berezin": run_berezin,
    "toeplitz": run_toeplitz,
    "hankel": run_hankel,
    "trace-check": run_trace_check,
    "schatten": run_schatten,
    "lattice-approx": run_lattice_approx,
    "rigidity": run_rigidity,
    "trace-pairing": run_trace_pairing,
    "counterexample": run_counterexample,
    "kernel-continuity": run_kernel_continuity,
}


def run_subcommand(name: str, config: RunConfig, seed=None) -> tuple[dict,
                                                                     str]:
    """Run one subcommand; returns (report dict, rendered text)."""
    data, (header, rows), checks = SUBCOMMANDS[name](config, seed)
    report = {
        "subcommand": name,
        "version": __version__,
        "config_sha256": config.digest(),
        "seed": seed,
        "data": data,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    if config.output_format == "csv":
        text = render_csv(report, header, rows)
    else:
        text = render_json(report)
    return report, text


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="focklab",
        description="Toeplitz and Hankel operator experiments on Fock spaces")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="path to a JSON config file")
        cmd.add_argument("--out", help="write the report here")
        cmd.add_argument("--format", choices=("json", "csv"),
                         help="overrides output.format")
        cmd.add_argument("--truncation", type=int,
                         help="overrides config truncation")
        cmd.add_argument("--seed", type=int,
                         help="seed for randomized probes")
    args = parser.parse_args(argv)

    try:
        if args.config:
            with open(args.config, "r", encoding="utf-8") as f:
                config = parse_config(f.read())
        else:
            config = parse_config("{}")
        if args.truncation is not None:
            if args.truncation < 8:
                raise ConfigError("truncation: must be at least 8")
            config.truncation = args.truncation
        if args.format is not None:
            config.output_format = args.format
        if args.out is not None:
            config.output_path = args.out
        report, text = run_subcommand(args.cmd, config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FocklabError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as f:
            f.write(text)
    print(text, end="")
    if not report["passed"]:
        failing = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"tolerance failure: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
