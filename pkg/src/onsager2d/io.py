"""File formats: kernel files, run configs, solution snapshots and branch tables.

Every float is written with 17 significant digits so values round-trip
exactly and tolerances can be checked from the files alone.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .continuation import Branch
from .kernel import KernelError, KernelSpec, from_coefficients, from_samples, onsager_coefficients
from .spectral import SpectralField

OUTPUT_ENV = "ONSAGER2D_OUTPUT"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# --- kernel files ---------------------------------------------------------

def read_kernel(path) -> KernelSpec:
    """JSON with ``mean`` + ``coeffs``, or ``samples`` (uniform theta grid), optional ``label``/``tol``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("kernel.file", f"cannot read kernel file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("kernel.file", "kernel file must hold a JSON object")
    allowed = {"mean", "coeffs", "samples", "label", "tol"}
    extra = set(data) - allowed
    if extra:
        raise ConfigError("kernel.file", f"unknown keys {sorted(extra)}")
    label = str(data.get("label", Path(path).stem))
    try:
        if "samples" in data:
            if "coeffs" in data:
                raise ConfigError("kernel.file", "give either samples or coeffs, not both")
            return from_samples(data["samples"], tol=float(data.get("tol", 1e-10)), label=label)
        if "coeffs" not in data:
            raise ConfigError("kernel.file", "missing key 'coeffs' (or 'samples')")
        return from_coefficients(float(data.get("mean", 0.0)), data["coeffs"], label=label)
    except (KernelError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("kernel.file", str(exc)) from None


def write_kernel(k: KernelSpec, path) -> None:
    body = {"label": k.label, "mean": float(k.mean), "coeffs": [float(c) for c in k.coeffs]}
    Path(path).write_text(json.dumps(body, indent=2) + "\n")


# --- run configuration ----------------------------------------------------

@dataclass
class RunConfig:
    kernel: str = "onsager"
    kernel_file: str = ""
    P: int = 64
    M: int = 32
    N: int = 0
    lam: float = 1.0
    starts: int = 50
    radius: float = 5.0
    seed: int = 0
    tol: float = 1e-10
    cluster_radius: float = 1e-6
    lambda_max: float = 9.0
    branches: int = 2
    ds: float = 0.05
    t0: float = 0.02
    max_steps: int = 2000
    modes: int = 5
    trials: int = 100_000
    branch_file: str = ""
    output: str = ""

    @property
    def grid(self) -> int | None:
        return self.N or None

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV, "") or "onsager2d-out")


# (section, key) -> field name
SCHEMA = {
    ("kernel", "type"): "kernel",
    ("kernel", "file"): "kernel_file",
    ("kernel", "P"): "P",
    ("discretization", "M"): "M",
    ("discretization", "N"): "N",
    ("solve", "lambda"): "lam",
    ("solve", "starts"): "starts",
    ("solve", "radius"): "radius",
    ("solve", "seed"): "seed",
    ("solve", "tol"): "tol",
    ("solve", "cluster_radius"): "cluster_radius",
    ("diagram", "lambda_max"): "lambda_max",
    ("diagram", "branches"): "branches",
    ("diagram", "ds"): "ds",
    ("diagram", "t0"): "t0",
    ("diagram", "max_steps"): "max_steps",
    ("bifurcations", "modes"): "modes",
    ("verify", "trials"): "trials",
    ("energy", "branch_file"): "branch_file",
    ("output", "directory"): "output",
}
FIELD_KEY = {v: f"{s}.{k}" for (s, k), v in SCHEMA.items()}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _TYPES[name]
    key = FIELD_KEY[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            x = float(raw)
            if not math.isfinite(x):
                raise ValueError("not finite")
            return x
        return str(raw)
    except ValueError:
        raise ConfigError(key, f"expected {kind}, got {raw!r}") from None


def validate(cfg: RunConfig) -> RunConfig:
    def need(cond, name, msg):
        if not cond:
            raise ConfigError(FIELD_KEY[name], msg)

    need(cfg.kernel in ("onsager", "coefficients", "samples"), "kernel",
         "must be onsager, coefficients or samples")
    need(cfg.kernel == "onsager" or cfg.kernel_file, "kernel_file", "required for file kernels")
    need(cfg.P >= 1, "P", "must be >= 1")
    need(cfg.M >= 1, "M", "must be >= 1")
    need(cfg.N == 0 or (cfg.N % 2 == 0 and cfg.N >= 8 * cfg.M), "N", "must be 0 (auto) or even and >= 8*M")
    need(cfg.lam >= 0, "lam", "must be >= 0")
    need(cfg.starts >= 1, "starts", "must be >= 1")
    need(cfg.radius > 0, "radius", "must be > 0")
    need(cfg.tol > 0, "tol", "must be > 0")
    need(cfg.cluster_radius > 0, "cluster_radius", "must be > 0")
    need(cfg.lambda_max > 0, "lambda_max", "must be > 0")
    need(cfg.branches >= 0, "branches", "must be >= 0")
    need(cfg.ds > 0, "ds", "must be > 0")
    need(0 < cfg.t0 <= 0.1, "t0", "must lie in (0, 0.1]")
    need(cfg.max_steps >= 1, "max_steps", "must be >= 1")
    need(cfg.modes >= 1, "modes", "must be >= 1")
    need(cfg.trials >= 1, "trials", "must be >= 1")
    return cfg


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    cfg = base or RunConfig()
    sections = {s for s, _ in SCHEMA}
    for section in cp.sections():
        if section not in sections:
            raise ConfigError(section, "unknown section")
        for key, raw in cp.items(section):
            if (section, key) not in SCHEMA:
                raise ConfigError(f"{section}.{key}", "unknown key")
            name = SCHEMA[(section, key)]
            setattr(cfg, name, _coerce(name, raw))
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for (section, key), name in SCHEMA.items():
        if not cp.has_section(section):
            cp.add_section(section)
        val = getattr(cfg, name)
        cp.set(section, key, fmt(val) if isinstance(val, float) else str(val))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def kernel_from_config(cfg: RunConfig) -> KernelSpec:
    if cfg.kernel == "onsager":
        return onsager_coefficients(cfg.P)
    k = read_kernel(cfg.kernel_file)
    if cfg.kernel == "samples" and "samples" not in json.loads(Path(cfg.kernel_file).read_text()):
        raise ConfigError("kernel.file", "kernel type 'samples' needs a 'samples' array")
    return k


# --- solution snapshots ---------------------------------------------------

def snapshot(V: SpectralField, lam: float, residual_norm: float, **extra) -> dict:
    body = {"lambda": fmt(lam), "M": V.M, "coeffs": [fmt(c) for c in V.v],
            "residual_norm": fmt(residual_norm)}
    body.update(extra)
    return body


def read_snapshot(body: dict) -> tuple[SpectralField, float, float]:
    for key in ("lambda", "M", "coeffs", "residual_norm"):
        if key not in body:
            raise ConfigError(f"snapshot.{key}", "missing")
    v = np.array([float(c) for c in body["coeffs"]])
    if v.size != int(body["M"]):
        raise ConfigError("snapshot.M", "does not match the number of coefficients")
    return SpectralField(v), float(body["lambda"]), float(body["residual_norm"])


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


# --- branch tables --------------------------------------------------------

BRANCH_HEADER = ["branch_id", "mode", "lambda", "t", "min_eig", "stable"]


def branch_header(M: int) -> list[str]:
    return BRANCH_HEADER + [f"v_{m}" for m in range(1, M + 1)]


def write_branches(branches: list[Branch], path, M: int | None = None) -> None:
    if M is None:
        M = max((p.field.M for b in branches for p in b.points), default=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(branch_header(M))
        for b in branches:
            mode = "trivial" if b.mode is None else str(b.mode)
            for p in b.points:
                v = p.field.padded(M).v
                w.writerow([b.id, mode, fmt(p.lam), fmt(p.t), fmt(p.min_eig), int(p.stable)]
                           + [fmt(x) for x in v])


@dataclass
class BranchRow:
    branch_id: str
    mode: int | None
    lam: float
    t: float
    min_eig: float
    stable: bool
    field: SpectralField


def read_branches(path) -> list[BranchRow]:
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError("energy.branch_file", f"cannot read {path}: {exc}") from None
    with fh:
        r = csv.reader(fh)
        header = next(r, None)
        M = len(header) - len(BRANCH_HEADER) if header else -1
        if M < 0 or header != branch_header(M):
            raise ConfigError("energy.branch_file", "not a branch table (bad header)")
        for rec in r:
            if len(rec) != len(header):
                raise ConfigError("energy.branch_file", f"row {r.line_num} has {len(rec)} fields")
            mode = None if rec[1] == "trivial" else int(rec[1])
            rows.append(BranchRow(rec[0], mode, float(rec[2]), float(rec[3]), float(rec[4]),
                                  bool(int(rec[5])), SpectralField([float(x) for x in rec[6:]])))
    return rows
