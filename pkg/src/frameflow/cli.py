"""Command-line interface to the frame-flow toolkit.

Subcommands integrate matrix and gradient flows, audit energy monotonicity,
list stratum trees, export the oriented word graph, and emit rest-point
certificates.  One --seed drives every random draw, so a fixed
configuration reproduces its output byte for byte.  Exit codes: 0 success,
1 bad input, 2 numerical failure, 3 size budget exceeded.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonPositiveEigenvalue,
    NumericalError,
    SizeLimitError,
    ValidationError,
)
from .flows import (
    FlowConfig,
    SpectralData,
    Weights,
    flow_path,
    gradient_path,
    lyapunov_audit,
    quad,
    quad_gradient,
    vector_field,
)
from .linalg import hs_norm
from .morse import critical_report, fixed_points, perfectness_certificate
from .skeleton import build_graph, index_h
from .strata import Tree, dimension, enumerate_irreducible, sample_stratum

__all__ = ["RunConfig", "generate_matrix", "main", "run"]

_COMMANDS = (
    "flow",
    "gradient-flow",
    "lyapunov",
    "strata",
    "skeleton",
    "morse",
    "certify",
)


def generate_matrix(spec, symplectic=False, n=None):
    """Diagonal-family spectral data from an eigenvalue list or a seed.

    Lists are sorted into rank-descending order.  A plain list is
    normalized to determinant one; a paired list supplies the leading
    block, gets each value flipped above one so the order holds, and is
    completed with reciprocals on the partner directions.  An integer is a
    seed: it draws a jittered geometric ladder (always a simple spectrum),
    and n says how many values to draw.
    """
    if isinstance(spec, bool):
        raise ValidationError("spec must be an eigenvalue list or an integer seed")
    if isinstance(spec, (int, np.integer)):
        if n is None:
            raise ValidationError("a seeded spectrum needs n")
        rng = np.random.default_rng(int(spec))
        jitter = rng.uniform(0.9, 1.1, size=n)
        if symplectic:
            lead = sorted(
                (2.0 ** (n - i) * jitter[i] for i in range(n)), reverse=True
            )
            evals = tuple(lead) + tuple(1.0 / v for v in lead)
            return SpectralData(evals, np.eye(2 * n))
        raw = sorted(
            (2.0 ** (n - 1 - 2 * i) * jitter[i] for i in range(n)), reverse=True
        )
        geo = float(np.prod(raw)) ** (1.0 / n)
        return SpectralData(tuple(v / geo for v in raw), np.eye(n))
    vals = [float(v) for v in spec]
    if not vals:
        raise ValidationError("need at least one eigenvalue")
    for v in vals:
        if not v > 0.0:
            raise NonPositiveEigenvalue(f"eigenvalues must be positive, got {v}")
    if symplectic:
        lead = sorted((max(v, 1.0 / v) for v in vals), reverse=True)
        evals = tuple(lead) + tuple(1.0 / v for v in lead)
        return SpectralData(evals, np.eye(2 * len(vals)))
    vals.sort(reverse=True)
    geo = float(np.prod(vals)) ** (1.0 / len(vals))
    return SpectralData(tuple(v / geo for v in vals), np.eye(len(vals)))


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved run; construction validates the combination."""

    command: str
    n: int
    k: int
    symplectic: bool = False
    seed: int = 0
    eigenvalues: tuple = None
    weights: tuple = None
    step: float = None  # resolved per command when omitted
    horizon: float = 10.0
    output: str = None
    format: str = None  # resolved per command when omitted
    max_vertices: int = 100000
    tolerance: float = 1e-6
    descend: bool = False

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        for name in ("n", "k"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(f"{self.command} needs an integer {name}")
        if self.step is None:
            object.__setattr__(
                self, "step", 1e-4 if self.command == "certify" else 1e-2
            )
        if self.format is None:
            object.__setattr__(
                self, "format", "json" if self.command == "certify" else "csv"
            )
        allowed = ("csv", "json", "dot") if self.command == "skeleton" else ("csv", "json")
        if self.format not in allowed:
            raise ValidationError(
                f"format must be one of {', '.join(allowed)} for {self.command}"
            )
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}")
        if not self.step > 0.0:
            raise ValidationError(f"step must be positive, got {self.step}")
        if not self.horizon > 0.0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}")
        if not self.tolerance > 0.0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if isinstance(self.max_vertices, bool) or not isinstance(self.max_vertices, int):
            raise ValidationError("max-vertices must be an integer")
        if self.max_vertices < 1:
            raise ValidationError("max-vertices must be at least 1")
        if self.eigenvalues is not None:
            object.__setattr__(self, "eigenvalues", tuple(self.eigenvalues))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(self.weights))


# --------------------------------------------------------------- flag parsing


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that through the
    # validation channel (exit 1) instead
    def error(self, message):
        raise ValidationError(message)


def _to_int(text):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ValidationError(f"expected an integer, got {text!r}")


def _to_float(text):
    try:
        return float(str(text).strip())
    except ValueError:
        raise ValidationError(f"expected a number, got {text!r}")


def _to_bool(text):
    low = str(text).strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValidationError(f"expected true or false, got {text!r}")


def _to_floats(text):
    if isinstance(text, bool):
        raise ValidationError(f"expected a number list, got {text!r}")
    items = [s for s in str(text).replace(",", " ").split() if s]
    if not items:
        raise ValidationError("expected at least one number")
    return tuple(_to_float(s) for s in items)


_CONVERTERS = {
    "n": _to_int,
    "k": _to_int,
    "seed": _to_int,
    "max_vertices": _to_int,
    "step": _to_float,
    "horizon": _to_float,
    "tolerance": _to_float,
    "symplectic": _to_bool,
    "descend": _to_bool,
    "eigenvalues": _to_floats,
    "weights": _to_floats,
    "output": str,
    "format": str,
}


def _read_config_file(path):
    """Key=value configuration, one pair per line, # comments allowed."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ValidationError(f"cannot read config file: {err}")
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, val = body.partition("=")
        if not sep:
            raise ValidationError(f"{path}:{lineno}: expected key=value")
        key = key.strip().replace("-", "_")
        if key not in _CONVERTERS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val.strip().strip("\"'")
    return values


def _add_flags(sp, descend=False):
    sp.add_argument("--config", help="key=value file; explicit flags win")
    sp.add_argument("--n")
    sp.add_argument("--k")
    sp.add_argument("--symplectic", nargs="?", const="true")
    sp.add_argument("--seed")
    sp.add_argument("--eigenvalues")
    sp.add_argument("--weights")
    sp.add_argument("--step")
    sp.add_argument("--horizon")
    sp.add_argument("--output")
    sp.add_argument("--format")
    sp.add_argument("--max-vertices", dest="max_vertices")
    sp.add_argument("--tolerance")
    if descend:
        sp.add_argument("--descend", nargs="?", const="true")


def _config_from_args(argv):
    parser = _Parser(prog="frameflow")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in _COMMANDS:
        _add_flags(sub.add_parser(name), descend=name == "gradient-flow")
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise ValidationError("choose a command: " + ", ".join(_COMMANDS))
    raw = {}
    if ns.config is not None:
        raw.update(_read_config_file(ns.config))
    for key in _CONVERTERS:
        flag = getattr(ns, key, None)
        if flag is not None:
            raw[key] = flag
    kwargs = {key: _CONVERTERS[key](val) for key, val in raw.items()}
    if "n" not in kwargs or "k" not in kwargs:
        raise ValidationError(f"{ns.command} needs --n and --k")
    return RunConfig(command=ns.command, **kwargs)


# ----------------------------------------------------------------- execution


def _fmt(v):
    return f"{v:.17g}"


def _csv(lines):
    return "\n".join(lines) + "\n"


def _word_label(word):
    return "(" + " ".join(str(v) for v in word) + ")"


def _spectral(cfg):
    if cfg.eigenvalues is not None:
        if len(cfg.eigenvalues) != cfg.n:
            raise ValidationError(
                f"n={cfg.n} needs {cfg.n} eigenvalues, got {len(cfg.eigenvalues)}"
            )
        return generate_matrix(cfg.eigenvalues, cfg.symplectic)
    return generate_matrix(cfg.seed, cfg.symplectic, n=cfg.n)


def _weight_ladder(cfg):
    if cfg.weights is not None:
        if len(cfg.weights) != cfg.k:
            raise ValidationError(
                f"k={cfg.k} needs {cfg.k} weights, got {len(cfg.weights)}"
            )
        return Weights(cfg.weights)
    return Weights(tuple((cfg.k - i) / cfg.k for i in range(cfg.k)))


def _start_frame(cfg, a):
    amb = 2 * cfg.n if cfg.symplectic else cfg.n
    full = set(range(1, amb + 1))
    tree = Tree(cfg.n, [full] * cfg.k, symplectic=cfg.symplectic)
    rng = np.random.default_rng(cfg.seed)
    return sample_stratum(tree, a, rng)


def _generator(a, symplectic):
    """Infinitesimal generator whose time-t exponential acts like the matrix
    family of a.  In the paired case the exponential must stay in the paired
    group, so the generator carries +/-log pairs instead of reciprocals."""
    if not symplectic:
        return a
    n = a.n // 2
    logs = tuple(math.log(v) for v in a.evals[:n])
    return SpectralData(logs + tuple(-v for v in logs), a.evecs)


def _path_text(cfg, a, samples, value_cols, meta):
    """Shared serialization for the two path commands.  samples is a list of
    (t, frame, extras-dict in value_cols order)."""
    amb = samples[0][1].n
    k = samples[0][1].k
    if cfg.format == "csv":
        header = (
            "t,"
            + ",".join(value_cols)
            + ",stationary,"
            + ",".join(f"x_{r}_{c}" for r in range(amb) for c in range(k))
        )
        lines = [header]
        for t, fr, extras in samples:
            cells = [_fmt(t)]
            cells.extend(_fmt(extras[c]) for c in value_cols)
            cells.append("true" if extras["_stationary"] else "false")
            cells.extend(_fmt(v) for v in fr.mat.ravel())
            lines.append(",".join(cells))
        return _csv(lines)
    doc = {
        "command": cfg.command,
        "n": cfg.n,
        "k": cfg.k,
        "symplectic": cfg.symplectic,
        "seed": cfg.seed,
        "eigenvalues": list(a.evals),
        "step": cfg.step,
        "horizon": cfg.horizon,
        "tolerance": cfg.tolerance,
        **meta,
        "settled": samples[-1][2]["_stationary"],
        "rows": [
            {
                "t": t,
                **{c: extras[c] for c in value_cols},
                "stationary": extras["_stationary"],
                "entries": fr.mat.tolist(),
            }
            for t, fr, extras in samples
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _cmd_flow(cfg):
    a = _spectral(cfg)
    gen = _generator(a, cfg.symplectic)
    x = _start_frame(cfg, a)
    gmat = gen.matrix()
    samples = []
    for t, fr in flow_path(gen, x, FlowConfig(step=cfg.step, horizon=cfg.horizon)):
        fn = hs_norm(vector_field(gmat, fr))
        samples.append((t, fr, {"field_norm": fn, "_stationary": fn < cfg.tolerance}))
    return _path_text(cfg, a, samples, ["field_norm"], {})


def _cmd_gradient_flow(cfg):
    a = _spectral(cfg)
    b = _weight_ladder(cfg)
    x = _start_frame(cfg, a)
    direction = -1 if cfg.descend else 1
    samples = []
    path = gradient_path(a, b, x, FlowConfig(step=cfg.step, horizon=cfg.horizon), direction)
    for t, fr in path:
        gn = hs_norm(quad_gradient(a, b, fr))
        samples.append(
            (
                t,
                fr,
                {
                    "value": quad(a, b, fr),
                    "grad_norm": gn,
                    "_stationary": gn < cfg.tolerance,
                },
            )
        )
    meta = {"weights": list(b.values), "direction": direction}
    return _path_text(cfg, a, samples, ["value", "grad_norm"], meta)


def _cmd_lyapunov(cfg):
    a = _spectral(cfg)
    b = _weight_ladder(cfg)
    x = _start_frame(cfg, a)
    gen = _generator(a, cfg.symplectic)
    report = lyapunov_audit(a, gen, b, x, FlowConfig(step=cfg.step, horizon=cfg.horizon))
    if cfg.format == "csv":
        return _csv(report.csv_lines())
    return report.to_json() + "\n"


def _cmd_strata(cfg):
    trees = enumerate_irreducible(cfg.n, cfg.k, cfg.symplectic)
    dims = [dimension(t) for t in trees]
    if cfg.format == "csv":
        lines = ["tree_id,dim,n_nodes,is_zero_dim"]
        for i, (t, d) in enumerate(zip(trees, dims)):
            flag = "true" if d == 0 else "false"
            lines.append(f"{i},{d},{t.k},{flag}")
        return _csv(lines)
    docs = [
        {
            "tree_id": i,
            "n": t.n,
            "k": t.k,
            "symplectic": t.symplectic,
            "nodes": [list(s) for s in t.sets],
            "dim": d,
        }
        for i, (t, d) in enumerate(zip(trees, dims))
    ]
    blob = {"n": cfg.n, "k": cfg.k, "symplectic": cfg.symplectic, "trees": docs}
    return json.dumps(blob, indent=2) + "\n"


def _cmd_skeleton(cfg):
    g = build_graph(cfg.n, cfg.k, cfg.symplectic, max_vertices=cfg.max_vertices)
    if cfg.format == "dot":
        return g.to_dot()
    if cfg.format == "json":
        return g.to_json()
    lines = ["tail,head"]
    for a, b in g.edges:
        lines.append(
            f"{_word_label(g.vertices[a].word)},{_word_label(g.vertices[b].word)}"
        )
    return _csv(lines)


def _cmd_morse(cfg):
    a = _spectral(cfg)
    b = _weight_ladder(cfg)
    pts = fixed_points(cfg.n, cfg.k, cfg.symplectic, max_points=cfg.max_vertices)
    reports = [critical_report(a, b, p) for p in pts]
    grades = [index_h(p) for p in pts]
    if cfg.format == "csv":
        lines = ["word,h,morse_index,jacobian_above_one"]
        for rep, h in zip(reports, grades):
            above = sum(1 for v in rep.jacobian_eigs if v > 1.0)
            lines.append(
                f"{_word_label(rep.perm.word)},{h},{rep.morse_index},{above}"
            )
        return _csv(lines)
    points = [
        {
            "word": list(rep.perm.word),
            "h": h,
            "morse_index": rep.morse_index,
            "jacobian_above_one": sum(1 for v in rep.jacobian_eigs if v > 1.0),
            "jacobian_eigs": list(rep.jacobian_eigs),
            "hessian_eigs": list(rep.hessian_eigs),
        }
        for rep, h in zip(reports, grades)
    ]
    blob = {
        "n": cfg.n,
        "k": cfg.k,
        "symplectic": cfg.symplectic,
        "eigenvalues": list(a.evals),
        "weights": list(b.values),
        "points": points,
    }
    return json.dumps(blob, indent=2) + "\n"


def _cmd_certify(cfg):
    cert = perfectness_certificate(
        cfg.n,
        cfg.k,
        cfg.symplectic,
        spectral=_spectral(cfg) if cfg.eigenvalues is not None else None,
        weights=_weight_ladder(cfg) if cfg.weights is not None else None,
        step=cfg.step,
        max_points=cfg.max_vertices,
    )
    if cfg.format == "csv":
        return _csv(cert.csv_lines())
    return cert.to_json()


_EXECUTORS = {
    "flow": _cmd_flow,
    "gradient-flow": _cmd_gradient_flow,
    "lyapunov": _cmd_lyapunov,
    "strata": _cmd_strata,
    "skeleton": _cmd_skeleton,
    "morse": _cmd_morse,
    "certify": _cmd_certify,
}


def run(cfg):
    """Execute one validated RunConfig, writing its report to cfg.output or
    standard output.  Returns 0; failures raise and main maps them."""
    text = _EXECUTORS[cfg.command](cfg)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    """Console entry point; returns the process exit code."""
    try:
        return run(_config_from_args(argv))
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except SizeLimitError as err:
        print(f"size limit: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
