"""Run configuration: flat key=value files, validation, initial conditions.

The file format is one ``key = value`` pair per line with ``#`` comments.
Unknown keys are rejected by name, parse errors carry line numbers, and
``emit_config`` round-trips every field bit-exactly through ``repr``.

Initial conditions are either an arithmetic expression over ``x`` and ``y``
(operators ``+ - * / ^``, functions ``sin cos tanh sqrt``, constant ``pi``)
or the named two-bubble profile ``kiss_bubble(...)`` with keyword parameters.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .linalg import RankPolicy
from .mesh import TensorGrid2D, build_tensor_grid, interpolate_initial

VARIANTS = ("classical", "rslm", "bblm")
SOLVERS = ("full", "dlr2", "dlr-lie")

_KEYS = ("variant", "domain", "epsilon", "degree", "elements", "tau", "final_time",
         "ic", "solver", "rank", "rank_max", "cadence", "snapshots", "output_dir",
         "seed", "tau_warn")


@dataclass(frozen=True)
class RunConfig:
    variant: str
    domain: tuple[float, float, float, float]
    epsilon: float
    degree: int
    elements: tuple[int, int]
    tau: float
    final_time: float
    ic: str
    solver: str = "full"
    rank: str | None = None
    rank_max: int | None = None
    cadence: int = 1
    snapshots: tuple[float, ...] = ()
    output_dir: str = "out"
    seed: int = 0
    tau_warn: float | None = None  # step-size advisory threshold; variant default if None

    def validate(self) -> "RunConfig":
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        a, b, c, d = self.domain
        if not (a < b and c < d):
            raise ConfigError(f"domain must satisfy a < b and c < d, got {self.domain}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if not 1 <= self.degree <= 4:
            raise ConfigError(f"degree must be in 1..4, got {self.degree}")
        if min(self.elements) < 1:
            raise ConfigError("elements must be >= 1 in both directions")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.final_time < 0:
            raise ConfigError("final_time must be >= 0")
        if self.final_time > 0 and self.tau > self.final_time * (1 + 1e-12):
            raise ConfigError("tau must not exceed final_time")
        if self.cadence < 1:
            raise ConfigError("cadence must be >= 1")
        for t in self.snapshots:
            if not 0.0 <= t <= self.final_time + 1e-12:
                raise ConfigError(f"snapshot time {t} outside [0, final_time]")
        if self.solver != "full" and self.rank is None:
            raise ConfigError("rank policy required for low-rank solvers")
        if self.rank is not None:
            self.rank_policy()  # syntax check
        compile_initial_condition(self.ic, self.epsilon)
        return self

    def build_grids(self) -> TensorGrid2D:
        return build_tensor_grid(self.degree, self.elements[0], self.elements[1], self.domain)

    def build_initial(self, grids: TensorGrid2D) -> np.ndarray:
        return interpolate_initial(grids, compile_initial_condition(self.ic, self.epsilon))

    def rank_policy(self) -> RankPolicy:
        if self.rank is None:
            raise ConfigError("no rank policy configured")
        kind, _, arg = self.rank.partition(":")
        kind = kind.strip()
        arg = arg.strip()
        try:
            if kind == "fixed":
                return RankPolicy.fixed(int(arg), r_max=self.rank_max)
            if kind == "adaptive-abs":
                return RankPolicy.adaptive_absolute(float(arg), r_max=self.rank_max)
            if kind == "adaptive-rel":
                return RankPolicy.adaptive_relative(float(arg), r_max=self.rank_max)
        except ValueError as exc:
            raise ConfigError(f"invalid rank policy argument {arg!r}: {exc}") from exc
        raise ConfigError(f"rank policy must be fixed:<r>, adaptive-abs:<eta> or "
                          f"adaptive-rel:<c>, got {self.rank!r}")

    def with_output_dir(self, path: str) -> "RunConfig":
        return replace(self, output_dir=path)


# -- initial conditions ------------------------------------------------------

_ALLOWED_FUNCS = {"sin": np.sin, "cos": np.cos, "tanh": np.tanh, "sqrt": np.sqrt}
_ALLOWED_NAMES = {"x", "y", "pi"}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name,
                  ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow,
                  ast.USub, ast.UAdd, ast.Load, ast.keyword)


def _parse_expression(text: str) -> ast.Expression:
    cleaned = text.replace("π", "pi").replace("^", "**")
    try:
        tree = ast.parse(cleaned, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse initial condition {text!r}: {exc.msg}") from exc
    return tree


def _validate_expression(tree: ast.Expression, text: str) -> None:
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(f"unsupported syntax {type(node).__name__!r} in initial condition {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_FUNCS:
                name = getattr(node.func, "id", "<expr>")
                raise ConfigError(f"unknown function {name!r} in initial condition {text!r}")
        elif isinstance(node, ast.Name) and node.id not in _ALLOWED_NAMES | set(_ALLOWED_FUNCS):
            raise ConfigError(f"unknown name {node.id!r} in initial condition {text!r}")
        elif isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"non-numeric constant {node.value!r} in initial condition {text!r}")


def kiss_bubble_field(radius: float = 0.19, x1: float = 0.0, y1: float = -0.2,
                      x2: float = 0.0, y2: float = 0.2, eps: float = 0.01):
    """Two tangent circular interfaces: +1 inside the bubbles, -1 outside."""
    width = np.sqrt(2.0) * eps

    def f(x, y):
        d1 = np.sqrt((x - x1) ** 2 + (y - y1) ** 2)
        d2 = np.sqrt((x - x2) ** 2 + (y - y2) ** 2)
        return 1.0 - np.tanh((d1 - radius) / width) - np.tanh((d2 - radius) / width)

    return f


def compile_initial_condition(text: str, epsilon: float):
    """Turn the ``ic`` config value into a vectorized field ``f(x, y)``."""
    stripped = text.strip()
    if stripped.startswith("kiss_bubble"):
        return _parse_kiss_bubble(stripped, epsilon)
    tree = _parse_expression(stripped)
    _validate_expression(tree, stripped)
    code = compile(tree, "<initial-condition>", "eval")
    env = {"__builtins__": {}}
    env.update(_ALLOWED_FUNCS)
    env["pi"] = np.pi

    def f(x, y):
        return eval(code, env, {"x": x, "y": y})

    return f


def _parse_kiss_bubble(text: str, epsilon: float):
    if text == "kiss_bubble":
        return kiss_bubble_field(eps=epsilon)
    try:
        call = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc.msg}") from exc
    if not isinstance(call, ast.Call) or call.args:
        raise ConfigError("kiss_bubble takes keyword parameters only, "
                          "e.g. kiss_bubble(radius=0.19, y1=-0.2, y2=0.2)")
    params = {"eps": epsilon}
    allowed = {"radius", "x1", "y1", "x2", "y2", "eps"}
    for kw in call.keywords:
        if kw.arg not in allowed:
            raise ConfigError(f"unknown kiss_bubble parameter {kw.arg!r}")
        try:
            params[kw.arg] = float(ast.literal_eval(kw.value))
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"invalid kiss_bubble parameter {kw.arg}: {exc}") from exc
    return kiss_bubble_field(**params)


# -- file format -------------------------------------------------------------

def _parse_floats(value: str, count: int, key: str, lineno: int) -> tuple[float, ...]:
    parts = [p for p in value.replace(",", " ").split() if p]
    if count and len(parts) != count:
        raise ConfigError(f"line {lineno}: {key} expects {count} numbers, got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {key}: {exc}") from exc


def parse_config_text(text: str) -> RunConfig:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)

    required = ("variant", "domain", "epsilon", "degree", "elements", "tau", "final_time", "ic")
    for key in required:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    def get(key, default=None):
        return raw[key][0] if key in raw else default

    def lineno_of(key):
        return raw[key][1]

    try:
        degree = int(get("degree"))
        cadence = int(get("cadence", "1"))
        seed = int(get("seed", "0"))
        rank_max = int(get("rank_max")) if "rank_max" in raw else None
        epsilon = float(get("epsilon"))
        tau = float(get("tau"))
        final_time = float(get("final_time"))
        tau_warn = float(get("tau_warn")) if "tau_warn" in raw else None
    except ValueError as exc:
        raise ConfigError(f"invalid numeric value: {exc}") from exc

    domain = _parse_floats(get("domain"), 4, "domain", lineno_of("domain"))
    elements_f = _parse_floats(get("elements"), 2, "elements", lineno_of("elements"))
    elements = (int(elements_f[0]), int(elements_f[1]))
    snapshots = ()
    if "snapshots" in raw and get("snapshots"):
        snapshots = _parse_floats(get("snapshots"), 0, "snapshots", lineno_of("snapshots"))

    cfg = RunConfig(
        variant=get("variant"),
        domain=domain,
        epsilon=epsilon,
        degree=degree,
        elements=elements,
        tau=tau,
        final_time=final_time,
        ic=get("ic"),
        solver=get("solver", "full"),
        rank=get("rank"),
        rank_max=rank_max,
        cadence=cadence,
        snapshots=snapshots,
        output_dir=get("output_dir", "out"),
        seed=seed,
        tau_warn=tau_warn,
    )
    return cfg.validate()


def parse_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def emit_config(cfg: RunConfig) -> str:
    lines = [
        f"variant = {cfg.variant}",
        "domain = " + ", ".join(repr(v) for v in cfg.domain),
        f"epsilon = {cfg.epsilon!r}",
        f"degree = {cfg.degree}",
        f"elements = {cfg.elements[0]}, {cfg.elements[1]}",
        f"tau = {cfg.tau!r}",
        f"final_time = {cfg.final_time!r}",
        f"ic = {cfg.ic}",
        f"solver = {cfg.solver}",
    ]
    if cfg.rank is not None:
        lines.append(f"rank = {cfg.rank}")
    if cfg.rank_max is not None:
        lines.append(f"rank_max = {cfg.rank_max}")
    lines.append(f"cadence = {cfg.cadence}")
    if cfg.snapshots:
        lines.append("snapshots = " + ", ".join(repr(t) for t in cfg.snapshots))
    lines.append(f"output_dir = {cfg.output_dir}")
    lines.append(f"seed = {cfg.seed}")
    if cfg.tau_warn is not None:
        lines.append(f"tau_warn = {cfg.tau_warn!r}")
    return "\n".join(lines) + "\n"
