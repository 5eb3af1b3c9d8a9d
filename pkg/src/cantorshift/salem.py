"""Singular monotone-type functions built from digit-weight systems.

A weight tuple p = (p_0, ..., p_{q-1}) with every |p_i| < 1, sum 1, and
all partial sums beta_i = p_0 + ... + p_{i-1} strictly inside (0, 1)
defines a function on [0, 1] through the base-q digits of the argument:
consuming digits in some order n_1, n_2, ... (the *reorder*), the value
is the series

    g(x) = sum_k beta_{d(n_k)} * prod_{j<k} p_{d(n_j)},

where d(n) is the n-th digit of x.  With the in-order reorder and all
p_i > 0 this is the classic strictly-increasing singular function with
g'(x) = 0 almost everywhere; signed weights give bounded non-monotone
variants.  The series is the unique bounded solution of the system of
self-similarity equations that peel off one digit per step.

Systems come in two flavours: a single fixed tuple used at every step,
or an explicit finite matrix of per-step columns (exploratory).  Columns
are consumed in order for matrix systems; fixed systems accept identity,
rule-based, or finite-list reorders.

Evaluation is exact (a closed finite sum, plus a geometric closure for
all-max tails) whenever the digit string terminates and the reorder is
injective; otherwise it truncates the series once the tail bound
derived from the largest |p_i| drops below the requested tolerance, and
reports that bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import sqrt
from typing import Optional, Union

import numpy as np

from .errors import DomainError, InsufficientDepthError, InvalidSystemError
from .numeral import (
    ONE,
    ZERO,
    DigitString,
    QSequence,
    expand_exact,
    format_rational,
    parse_rational,
)

__all__ = [
    "Reorder",
    "SalemSystem",
    "Violation",
    "ValidationReport",
    "validate_system",
    "ensure_valid",
    "EvalResult",
    "evaluate",
    "residual",
    "integral",
    "TableRow",
    "emit_table",
    "McMean",
    "mc_mean",
]


# ---------------------------------------------------------------------------
# Reorders
# ---------------------------------------------------------------------------

def _swap_pairs(k: int) -> int:
    return k + 1 if k % 2 == 1 else k - 1


_RULES = {"swap-pairs": _swap_pairs}


@dataclass(frozen=True)
class Reorder:
    """Order in which digit positions are consumed.

    kind "identity" reads positions 1, 2, 3, ...; kind "rule" applies a
    named bijection of the positive integers (currently "swap-pairs",
    which transposes 1<->2, 3<->4, ...); kind "list" reads an explicit
    finite schedule and refuses past its end.
    """

    kind: str = "identity"
    values: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("identity", "rule", "list"):
            raise DomainError(f"unknown reorder kind {self.kind!r}")
        if self.kind == "rule" and self.name not in _RULES:
            raise DomainError(f"unknown reorder rule {self.name!r}")
        object.__setattr__(self, "values",
                           tuple(int(v) for v in self.values))
        if self.kind == "list" and not self.values:
            raise DomainError("list reorder needs at least one entry")

    def position(self, k: int) -> int:
        """The digit position consumed at step k (both 1-indexed)."""
        if k < 1:
            raise DomainError(f"step index must be >= 1, got {k}")
        if self.kind == "identity":
            return k
        if self.kind == "rule":
            return _RULES[self.name](k)
        if k > len(self.values):
            raise InsufficientDepthError(
                f"reorder schedule has {len(self.values)} steps; step {k} undefined")
        return self.values[k - 1]

    def length(self) -> Optional[int]:
        """Number of steps, or None for the unbounded kinds."""
        return len(self.values) if self.kind == "list" else None

    def covers_positions(self) -> bool:
        """True when every position is consumed exactly once over all steps."""
        return self.kind in ("identity", "rule")

    def to_json(self) -> dict:
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "rule":
            return {"kind": "rule", "name": self.name}
        return {"kind": "list", "values": list(self.values)}

    @classmethod
    def from_json(cls, obj) -> "Reorder":
        if obj is None:
            return cls()
        kind = obj.get("kind", "identity")
        if kind == "identity":
            return cls()
        if kind == "rule":
            return cls("rule", name=obj.get("name", ""))
        if kind == "list":
            return cls("list", values=tuple(obj.get("values", [])))
        raise DomainError(f"unknown reorder kind {kind!r}")


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

def _coerce_weights(values) -> tuple[Fraction, ...]:
    return tuple(parse_rational(v) if not isinstance(v, Fraction) else v
                 for v in values)


@dataclass(frozen=True)
class SalemSystem:
    """A digit-weight system: fixed tuple or per-step column matrix.

    Exactly one of `weights` / `columns` is set.  `horizon` bounds how
    much of a list reorder the validator certifies as a permutation;
    `strict_reorder=False` turns off that certification for exploratory
    schedules with repeats (exact terminating-sum shortcuts are then
    disabled and everything runs through the tolerance path).
    """

    weights: Optional[tuple[Fraction, ...]] = None
    columns: Optional[tuple[tuple[Fraction, ...], ...]] = None
    reorder: Reorder = Reorder()
    horizon: int = 64
    strict_reorder: bool = True

    def __post_init__(self):
        if (self.weights is None) == (self.columns is None):
            raise DomainError("a system takes either a weight tuple or columns")
        if self.weights is not None:
            object.__setattr__(self, "weights", _coerce_weights(self.weights))
        else:
            object.__setattr__(
                self, "columns",
                tuple(_coerce_weights(col) for col in self.columns))
        if self.horizon < 1:
            raise DomainError("horizon must be >= 1")

    @classmethod
    def fixed(cls, weights, reorder: Reorder = Reorder(),
              horizon: int = 64, strict_reorder: bool = True) -> "SalemSystem":
        return cls(weights=tuple(weights), reorder=reorder,
                   horizon=horizon, strict_reorder=strict_reorder)

    @classmethod
    def matrix(cls, columns, horizon: int = 64) -> "SalemSystem":
        return cls(columns=tuple(tuple(c) for c in columns), horizon=horizon)

    @property
    def q(self) -> int:
        if self.weights is not None:
            return len(self.weights)
        return len(self.columns[0]) if self.columns else 0

    @property
    def is_fixed(self) -> bool:
        return self.weights is not None

    def stage_limit(self) -> Optional[int]:
        """Number of series terms the system defines, None if unbounded."""
        if self.columns is not None:
            return len(self.columns)
        return self.reorder.length()

    def p_row(self, n: int) -> tuple[Fraction, ...]:
        """Weight tuple applied to digit position n."""
        if self.weights is not None:
            return self.weights
        if n > len(self.columns):
            raise InsufficientDepthError(
                f"system has {len(self.columns)} columns; position {n} undefined")
        return self.columns[n - 1]

    def beta_row(self, n: int) -> tuple[Fraction, ...]:
        """Partial sums (beta_0 = 0, beta_1, ..., beta_{q-1}) for position n."""
        return _betas(self.p_row(n))

    @cached_property
    def global_max(self) -> Fraction:
        """Largest |p| across all columns; the truncation bound base."""
        cols = (self.weights,) if self.weights is not None else self.columns
        return max(abs(p) for col in cols for p in col)

    def to_json(self) -> dict:
        out: dict = {"q": self.q}
        if self.weights is not None:
            out["p"] = [format_rational(p) for p in self.weights]
        else:
            out["columns"] = [[format_rational(p) for p in col]
                              for col in self.columns]
        out["reorder"] = self.reorder.to_json()
        out["horizon"] = self.horizon
        if not self.strict_reorder:
            out["strict-reorder"] = False
        return out

    @classmethod
    def from_json(cls, obj) -> "SalemSystem":
        if not isinstance(obj, dict):
            raise DomainError("system JSON must be an object")
        reorder = Reorder.from_json(obj.get("reorder"))
        horizon = int(obj.get("horizon", 64))
        strict = bool(obj.get("strict-reorder", True))
        if "p" in obj:
            system = cls.fixed(_coerce_weights(obj["p"]), reorder=reorder,
                               horizon=horizon, strict_reorder=strict)
        elif "columns" in obj:
            system = cls(columns=tuple(_coerce_weights(c) for c in obj["columns"]),
                         reorder=reorder, horizon=horizon, strict_reorder=strict)
        else:
            raise DomainError("system JSON needs \"p\" or \"columns\"")
        declared = obj.get("q")
        if declared is not None and int(declared) != system.q:
            raise DomainError(
                f"declared q={declared} does not match {system.q} weights")
        return system


def _betas(col: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    out = [ZERO]
    for p in col[:-1]:
        out.append(out[-1] + p)
    return tuple(out)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: str   # semantic id of the violated requirement
    where: str       # column / entry locator
    detail: str

    def __str__(self):
        return f"{self.condition} at {self.where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: Optional[Violation] = None

    def __str__(self):
        return "ok" if self.ok else str(self.violation)


def validate_system(system: SalemSystem) -> ValidationReport:
    """Check a system's defining requirements; reports the first failure.

    Conditions, in the order tested: "alphabet" (uniform column length
    >= 2), "coefficient-range" (every |p| < 1), "column-sum" (each
    column sums to 1), "partial-sum-range" (each partial sum strictly
    inside (0, 1)), "reorder" (schedule shape: matrix systems consume
    columns in order; strict list reorders must be injective with a
    permutation prefix up to the horizon).
    """
    cols = ((system.weights,) if system.weights is not None
            else system.columns)
    q = len(cols[0]) if cols and cols[0] else 0

    def bad(condition, where, detail):
        return ValidationReport(False, Violation(condition, where, detail))

    if q < 2:
        return bad("alphabet", "column 1", f"needs >= 2 weights, got {q}")
    for n, col in enumerate(cols, start=1):
        if len(col) != q:
            return bad("alphabet", f"column {n}",
                       f"length {len(col)} != {q}")
    for n, col in enumerate(cols, start=1):
        for i, p in enumerate(col):
            if not -1 < p < 1:
                return bad("coefficient-range", f"column {n}, digit {i}",
                           f"|{p}| >= 1")
    for n, col in enumerate(cols, start=1):
        s = sum(col)
        if s != 1:
            return bad("column-sum", f"column {n}", f"sums to {s}, not 1")
    for n, col in enumerate(cols, start=1):
        betas = _betas(col)
        for i in range(1, q):
            if not 0 < betas[i] < 1:
                return bad("partial-sum-range", f"column {n}, partial sum {i}",
                           f"beta_{i} = {betas[i]} outside (0, 1)")

    r = system.reorder
    if system.columns is not None and r.kind != "identity":
        return bad("reorder", "schedule",
                   "matrix systems consume their columns in order")
    if r.kind == "list" and system.strict_reorder:
        if len(set(r.values)) != len(r.values):
            return bad("reorder", "schedule", "list reorder repeats a position")
        h = min(system.horizon, len(r.values))
        if set(r.values[:h]) != set(range(1, h + 1)):
            return bad("reorder", "schedule",
                       f"first {h} entries are not a permutation of 1..{h}")
    return ValidationReport(True)


def ensure_valid(system: SalemSystem) -> None:
    report = validate_system(system)
    if not report.ok:
        raise InvalidSystemError(f"invalid system: {report.violation}",
                                 report=report)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalResult:
    """Value of the series and a rigorous bound on the truncation error
    (zero when the sum was closed exactly)."""

    value: Fraction
    error_bound: Fraction
    terms: int


DEFAULT_TOL = Fraction(1, 10**9)


def _as_tol(tol) -> Fraction:
    t = tol if isinstance(tol, Fraction) else parse_rational(str(tol))
    if t <= 0:
        raise DomainError(f"tolerance must be > 0, got {tol}")
    return t


def _eval_stage(d: DigitString, system: SalemSystem, tol: Fraction,
                stage: int) -> EvalResult:
    """Sum the series terms after the first `stage` steps.

    Stage 0 is the function value itself; stage j is the renormalized
    remainder that the j-th self-similarity equation relates to stage
    j - 1 (for in-order consumption it coincides with the value at the
    j-fold shifted point).
    """
    dp = d.depth
    tail = d.tail.kind
    limit = system.stage_limit()

    exact_stop = (tail in ("zero", "max") and system.strict_reorder
                  and system.reorder.covers_positions() and limit is None)
    if exact_stop:
        consumed = sum(1 for t in range(1, stage + 1)
                       if system.reorder.position(t) <= dp)
        remaining = dp - consumed
        total = ZERO
        prod = ONE
        k = stage
        while remaining > 0:
            k += 1
            n = system.reorder.position(k)
            dig = d.digit(n)
            total += system.beta_row(n)[dig] * prod
            prod *= system.p_row(n)[dig]
            if n <= dp:
                remaining -= 1
        if tail == "max":
            # every later step reads a maximal digit: close the geometric tail
            p = system.weights
            betas = _betas(p)
            total += prod * betas[-1] / (1 - p[-1])
        return EvalResult(total, ZERO, k - stage)

    # tolerance path: stop once the remainder bound sinks below tol, or
    # the system runs out of steps (then the finite sum is exact)
    m = system.global_max
    target = tol * (1 - m)
    total = ZERO
    prod = ONE
    r = ONE
    k = stage
    while True:
        if limit is not None and k >= limit:
            return EvalResult(total, ZERO, k - stage)
        if r < target:
            return EvalResult(total, r / (1 - m), k - stage)
        k += 1
        n = system.reorder.position(k)
        dig = d.digit(n)
        total += system.beta_row(n)[dig] * prod
        prod *= system.p_row(n)[dig]
        r *= max(abs(p) for p in system.p_row(n)) if not system.is_fixed else m


def _prepare_point(x, q: int, system: SalemSystem) -> DigitString:
    if not isinstance(q, int) or q < 2:
        raise DomainError(f"alphabet size must be an integer >= 2, got {q!r}")
    if q != system.q:
        raise DomainError(f"system has {system.q} weights but q={q}")
    base = QSequence.constant(q)
    if isinstance(x, DigitString):
        if x.base != base:
            raise DomainError("digit string base does not match q")
        return x
    return expand_exact(x, base)


def evaluate(x, q: int, system: SalemSystem, tol=DEFAULT_TOL) -> EvalResult:
    """Value of the system's function at x, with a truncation-error bound.

    x may be a Fraction in [0, 1] or a DigitString over the constant
    base q.  Terminating and all-max expansions under injective
    covering reorders evaluate exactly (error bound 0); any other input
    is summed until the tail bound drops below `tol`.
    """
    ensure_valid(system)
    d = _prepare_point(x, q, system)
    return _eval_stage(d, system, _as_tol(tol), 0)


def residual(x, q: int, system: SalemSystem, k: int, tol=DEFAULT_TOL) -> Fraction:
    """Defect of the k-th self-similarity equation at x: left minus right.

    The left side is the stage k-1 remainder of the series at x, the
    right side is beta_{d} + p_{d} times the stage-k remainder, where d
    is the digit consumed at step k.  For the series solution this is 0
    up to the evaluation tolerances (|residual| <= 2 * tol); both sides
    go through the same evaluation engine used by `evaluate`.
    """
    if k < 1:
        raise DomainError(f"equation index must be >= 1, got {k}")
    ensure_valid(system)
    d = _prepare_point(x, q, system)
    t = _as_tol(tol)
    n = system.reorder.position(k)
    dig = d.digit(n)
    left = _eval_stage(d, system, t, k - 1)
    right_tail = _eval_stage(d, system, t, k)
    right = system.beta_row(n)[dig] + system.p_row(n)[dig] * right_tail.value
    return left.value - right


def integral(system: SalemSystem) -> Fraction:
    """Exact Lebesgue mean of the function over [0, 1].

    Digits are independent and uniform under Lebesgue measure, so each
    term factors; for an unbounded injective reorder the geometric sum
    collapses to (beta_1 + ... + beta_{q-1}) / (q - 1).  Finite systems
    (list reorders, matrices) get the corresponding finite sum.  Requires
    an injective schedule; repeats would correlate the factors.
    """
    ensure_valid(system)
    q = system.q
    limit = system.stage_limit()
    if limit is None:
        betas = _betas(system.weights)
        return sum(betas[1:], ZERO) / (q - 1)
    if not system.strict_reorder:
        raise DomainError(
            "exact mean needs an injective reorder; use the sampling estimate")
    total = ZERO
    scale = ONE
    for k in range(1, limit + 1):
        n = k if system.columns is not None else system.reorder.position(k)
        betas = system.beta_row(n)
        total += sum(betas[1:], ZERO) / q * scale
        scale /= q
    return total


# ---------------------------------------------------------------------------
# Tables and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    x: Fraction
    value: Fraction
    error_bound: Fraction


def emit_table(system: SalemSystem, grid, tol=DEFAULT_TOL) -> list[TableRow]:
    """Evaluate on a grid: an int n means n uniform points spanning [0, 1]
    inclusive; otherwise an iterable of rationals."""
    ensure_valid(system)
    if isinstance(grid, int):
        if grid < 2:
            raise DomainError("a uniform grid needs at least 2 points")
        xs = [Fraction(i, grid - 1) for i in range(grid)]
    else:
        xs = [x if isinstance(x, Fraction) else parse_rational(x)
              for x in grid]
    q = system.q
    rows = []
    t = _as_tol(tol)
    for x in xs:
        d = _prepare_point(x, q, system)
        res = _eval_stage(d, system, t, 0)
        rows.append(TableRow(x, res.value, res.error_bound))
    return rows


@dataclass(frozen=True)
class McMean:
    """Monte-Carlo estimate of the Lebesgue mean."""

    mean: float
    std_err: float
    samples: int
    seed: int
    terms: int


_MC_CAP = 20_000


def mc_mean(system: SalemSystem, samples: int, seed: int,
            chunk: int = 65536) -> McMean:
    """Sample the mean by drawing digit strings uniformly.

    Deterministic for a fixed (samples, seed): digits come from
    numpy's seeded generator in a fixed chunk order.  The series is cut
    at enough terms for a 1e-9 tail bound (capped); the remaining bias
    is far below the reported standard error at practical sample sizes.
    """
    ensure_valid(system)
    if samples < 2:
        raise DomainError("need at least 2 samples")
    q = system.q
    m = float(system.global_max)
    limit = system.stage_limit()
    k_tol = 1
    bound = m
    while bound >= 1e-9 * (1.0 - m) and k_tol < _MC_CAP:
        k_tol += 1
        bound *= m
    terms = k_tol if limit is None else min(k_tol, limit)
    positions = [system.reorder.position(t) for t in range(1, terms + 1)]
    maxpos = max(positions, default=1)

    if system.is_fixed:
        p_cols = [np.array([float(p) for p in system.weights])] * terms
        b_cols = [np.array([float(b) for b in _betas(system.weights)])] * terms
    else:
        p_cols = [np.array([float(p) for p in system.p_row(n)]) for n in positions]
        b_cols = [np.array([float(b) for b in system.beta_row(n)]) for n in positions]

    dtype = np.int8 if q <= 127 else np.int64
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        mrows = min(chunk, samples - done)
        digs = rng.integers(0, q, size=(mrows, maxpos), dtype=dtype)
        vals = np.zeros(mrows)
        prod = np.ones(mrows)
        for t, n in enumerate(positions):
            col = digs[:, n - 1]
            vals += b_cols[t][col] * prod
            prod *= p_cols[t][col]
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += mrows
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McMean(mean, sqrt(var / samples), samples, seed, terms)
