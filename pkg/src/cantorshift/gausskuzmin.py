"""Lebesgue measure of digit-defined sets, exactly and by sampling.

The sets under study compare a shift-program image of the argument with
a threshold:

    { z in [0, 1] : P(z) < R }

where P is a `ShiftProgram` and R is a constant, a second program of
the same z, or a program applied to a fixed point.  Such a set is (up
to a null boundary) a union of rank-d cylinders once d exceeds the
digits the programs consume, so its measure can be bracketed exactly:
classify every rank-d cylinder as inside, outside, or straddling by
comparing the two image intervals, and weight by the cylinder measure
1/(q_1 ... q_d).  The bracket width is exactly the straddling mass and
shrinks as d grows.

A program image over a rank-d cylinder is itself an interval with
rational endpoints: the digits surviving the program contribute a known
partial sum, the unseen tail contributes [0, 1/(product of surviving
bases)].  All comparisons below are integer arithmetic on the interval
endpoint numerators, so the bounds are exact, and cylinders whose
subtree is already decided are counted wholesale without enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, InsufficientDepthError
from .numeral import (
    QSequence,
    format_rational,
    parse_rational,
)
from .shifts import ShiftProgram, apply_program, required_depth

__all__ = [
    "ConstRhs",
    "ProgramOnZ",
    "ProgramOnX",
    "rhs_from_json",
    "GKSetSpec",
    "MeasureBounds",
    "measure_bounds",
    "McMeasure",
    "measure_mc",
    "ScanRow",
    "limit_scan",
    "sigma_family",
    "generator_family",
]


# ---------------------------------------------------------------------------
# Set specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstRhs:
    """Compare against a fixed rational threshold."""

    value: Fraction

    def to_json(self):
        return {"const": format_rational(self.value)}


@dataclass(frozen=True)
class ProgramOnZ:
    """Compare against a second program applied to the same argument."""

    program: ShiftProgram

    def to_json(self):
        return {"programOnZ": self.program.to_json()}


@dataclass(frozen=True)
class ProgramOnX:
    """Compare against a program applied to a fixed point (a constant
    that is specified operationally rather than numerically)."""

    program: ShiftProgram
    x: Fraction

    def to_json(self):
        return {"programOnX": {"program": self.program.to_json(),
                               "x": format_rational(self.x)}}


Rhs = Union[ConstRhs, ProgramOnZ, ProgramOnX]


def rhs_from_json(obj) -> Rhs:
    if not isinstance(obj, dict):
        raise DomainError("threshold JSON must be an object")
    if "const" in obj:
        return ConstRhs(parse_rational(obj["const"]))
    if "programOnZ" in obj:
        return ProgramOnZ(ShiftProgram.from_json(obj["programOnZ"]))
    if "programOnX" in obj:
        inner = obj["programOnX"]
        return ProgramOnX(ShiftProgram.from_json(inner["program"]),
                          parse_rational(inner["x"]))
    raise DomainError(f"unknown threshold form: {sorted(obj)}")


@dataclass(frozen=True)
class GKSetSpec:
    """A measurable set given by a program comparison.

    relation "lt" is the strict set {P(z) < R}; "ge" is its complement
    {P(z) >= R}.  Both have the same boundary (a null set), so the
    bounds machinery handles them symmetrically.
    """

    q: QSequence
    lhs: ShiftProgram
    rhs: Rhs
    relation: str = "lt"

    def __post_init__(self):
        if self.relation not in ("lt", "ge"):
            raise DomainError(f"relation must be \"lt\" or \"ge\", got {self.relation!r}")

    @property
    def required_depth(self) -> int:
        """Digits of z both sides consume before their tails are free."""
        need = self.lhs.required_depth
        if isinstance(self.rhs, ProgramOnZ):
            need = max(need, self.rhs.program.required_depth)
        return need

    def to_json(self) -> dict:
        return {"q": self.q.to_json(), "lhs": self.lhs.to_json(),
                "rhs": self.rhs.to_json(), "relation": self.relation}

    @classmethod
    def from_json(cls, obj) -> "GKSetSpec":
        if not isinstance(obj, dict):
            raise DomainError("set spec JSON must be an object")
        return cls(QSequence.from_json(obj["q"]),
                   ShiftProgram.from_json(obj["lhs"]),
                   rhs_from_json(obj["rhs"]),
                   obj.get("relation", "lt"))


# ---------------------------------------------------------------------------
# Image intervals of a program over a cylinder
# ---------------------------------------------------------------------------

def _surviving_positions(word, depth: int) -> list[int]:
    """Positions of 1..depth left after the program, in image order."""
    pos = list(range(1, depth + 1))
    for atom in word:
        if atom.kind == "sigma":
            if not pos:
                raise InsufficientDepthError(
                    "program consumes more digits than the chosen depth",
                    required=required_depth(word))
            pos.pop(0)
        else:
            if atom.index > len(pos):
                raise InsufficientDepthError(
                    f"deletion at {atom.index} exceeds the chosen depth",
                    required=required_depth(word))
            pos.pop(atom.index - 1)
    return pos


def _image_weights(word, q: QSequence, depth: int) -> tuple[list[int], int]:
    """Per-position numerator weights of the program image, plus its
    denominator.

    The image of digits (c_1, ..., c_depth) is
    [sum c_s * w_s, sum c_s * w_s + 1] / D with w_s = 0 for deleted
    positions; surviving position s_j has weight D / (b_1 ... b_j)
    over the image base values b_i.
    """
    surv = _surviving_positions(word, depth)
    weights = [0] * depth
    acc = 1
    for s in reversed(surv):
        weights[s - 1] = acc
        acc *= q.at(s)
    return weights, acc


# ---------------------------------------------------------------------------
# Exact bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureBounds:
    """Exact bracket: lower <= measure <= upper, both rationals; the gap
    is exactly the mass of straddling rank-`depth` cylinders."""

    lower: Fraction
    upper: Fraction
    depth: int
    decided_mass: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {"lower": format_rational(self.lower),
                "upper": format_rational(self.upper),
                "depth": self.depth,
                "decided_mass": format_rational(self.decided_mass)}


def _resolve_rhs(spec: GKSetSpec, depth: int):
    """(weights, denominator, tail) triple for the right side.

    A constant becomes a degenerate zero-width "image" (no free tail);
    a program of z gets real weights and a one-unit tail.
    """
    rhs = spec.rhs
    if isinstance(rhs, ProgramOnZ):
        w, d = _image_weights(rhs.program.word, spec.q, depth)
        return w, 0, d, 1
    if isinstance(rhs, ProgramOnX):
        val = apply_program(rhs.program, rhs.x, spec.q)
    else:
        val = rhs.value
    return [0] * depth, val.numerator, val.denominator, 0


def measure_bounds(spec: GKSetSpec, depth: int) -> MeasureBounds:
    """Exact lower/upper bounds on the measure at cylinder rank `depth`.

    Requires depth >= (digits consumed by the programs) + 1 so at least
    one free digit constrains the comparison.  Cost is bounded by the
    number of rank-`depth` cylinders but usually far smaller: subtrees
    whose comparison is already decided, and digit positions neither
    side reads, are counted without enumeration.
    """
    req = spec.required_depth
    if depth < req + 1:
        raise InsufficientDepthError(
            f"depth {depth} too shallow: programs consume {req} digits, "
            f"need depth >= {req + 1}", required=req + 1)
    q = spec.q
    qv = [q.at(i) for i in range(1, depth + 1)]
    wl, dl = _image_weights(spec.lhs.word, q, depth)
    wr, base_r, dr, tail_r = _resolve_rhs(spec, depth)

    # suffix sums: largest numerator the remaining digits can still add
    rem_l = [0] * (depth + 1)
    rem_r = [0] * (depth + 1)
    leaves = [0] * (depth + 1)
    leaves[depth] = 1
    for i in range(depth - 1, -1, -1):
        rem_l[i] = rem_l[i + 1] + (qv[i] - 1) * wl[i]
        rem_r[i] = rem_r[i + 1] + (qv[i] - 1) * wr[i]
        leaves[i] = leaves[i + 1] * qv[i]

    want_lt = spec.relation == "lt"
    inside = 0
    straddle = 0

    def classify(acc_l: int, r_l: int, acc_r: int, r_r: int) -> Optional[bool]:
        # left image range [acc_l, acc_l + r_l + 1] / dl;
        # right range [acc_r, acc_r + r_r + tail_r] / dr
        left_below = (acc_l + r_l + 1) * dr <= acc_r * dl
        left_above = acc_l * dr >= (acc_r + r_r + tail_r) * dl
        if left_below:
            return want_lt
        if left_above:
            return not want_lt
        return None

    def walk(i: int, acc_l: int, acc_r: int) -> None:
        nonlocal inside, straddle
        v = classify(acc_l, rem_l[i], acc_r, rem_r[i])
        if v is True:
            inside += leaves[i]
            return
        if v is False:
            return
        if i == depth:
            straddle += 1
            return
        if wl[i] == 0 and wr[i] == 0:
            # neither side reads this digit: all children are identical
            in0, st0 = inside, straddle
            walk(i + 1, acc_l, acc_r)
            inside += (inside - in0) * (qv[i] - 1)
            straddle += (straddle - st0) * (qv[i] - 1)
            return
        for c in range(qv[i]):
            walk(i + 1, acc_l + c * wl[i], acc_r + c * wr[i])

    walk(0, 0, base_r)
    total = leaves[0]
    return MeasureBounds(Fraction(inside, total),
                         Fraction(inside + straddle, total),
                         depth,
                         Fraction(total - straddle, total))


# ---------------------------------------------------------------------------
# Monte-Carlo estimate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McMeasure:
    """Sampling estimate of the set's measure, with binomial std error."""

    estimate: float
    std_err: float
    hits: int
    samples: int
    seed: int
    depth: int


_INT64_LIMIT = 2**62
_FLOAT_BAND = 1e-9


def _mc_depth(q: QSequence, req: int, extra: int) -> int:
    """Deepest digit count whose cylinder denominator stays in int64."""
    d = 0
    prod = 1
    while d < req + extra:
        nxt = prod * q.at(d + 1)
        if nxt > _INT64_LIMIT:
            break
        prod = nxt
        d += 1
    if d < req + 1:
        raise DomainError(
            "base values grow too quickly for a sampling depth beyond the "
            "program's digit consumption")
    return d


def measure_mc(spec: GKSetSpec, samples: int, seed: int,
               extra_depth: int = 32, chunk: int = 65536) -> McMeasure:
    """Estimate the measure by sampling digit strings uniformly.

    Each sample is a digit prefix deep enough that membership is decided
    up to a set of measure ~ the cylinder width; comparisons run in
    float arithmetic with an exact integer re-check for samples landing
    within 1e-9 of the threshold, so the hit decision matches the exact
    classifier except on cylinders the exact bracket also leaves open
    (counted as misses).  Deterministic for fixed (samples, seed).
    """
    if samples < 1:
        raise DomainError("need at least 1 sample")
    q = spec.q
    depth = _mc_depth(q, spec.required_depth, extra_depth)
    qv = [q.at(i) for i in range(1, depth + 1)]
    wl, dl = _image_weights(spec.lhs.word, q, depth)
    wr, base_r, dr, tail_r = _resolve_rhs(spec, depth)
    wl_vec = np.array(wl, dtype=np.int64)
    wr_vec = np.array(wr, dtype=np.int64)
    rhs_is_program = isinstance(spec.rhs, ProgramOnZ)
    want_lt = spec.relation == "lt"
    dl_f = float(dl)
    dr_f = float(dr)

    def exact_hit(lo_l: int, lo_r: int) -> bool:
        if want_lt:
            return (lo_l + 1) * dr <= lo_r * dl
        return lo_l * dr >= (lo_r + tail_r) * dl

    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        digs = np.empty((m, depth), dtype=np.int64)
        for i in range(depth):
            digs[:, i] = rng.integers(0, qv[i], size=m)
        lo_l = digs @ wl_vec
        if rhs_is_program:
            lo_r = digs @ wr_vec
        else:
            lo_r = np.full(m, base_r, dtype=np.int64)
        f_l = (lo_l + (1.0 if want_lt else 0.0)) / dl_f
        f_r = (lo_r + (0.0 if want_lt else float(tail_r))) / dr_f
        hit = f_l <= f_r if want_lt else f_l >= f_r
        near = np.abs(f_l - f_r) < _FLOAT_BAND
        for j in np.nonzero(near)[0]:
            hit[j] = exact_hit(int(lo_l[j]), int(lo_r[j]))
        hits += int(hit.sum())
        done += m
    est = hits / samples
    se = sqrt(max(est * (1.0 - est), 0.0) / samples)
    return McMeasure(est, se, hits, samples, seed, depth)


# ---------------------------------------------------------------------------
# Families and scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    param: int
    bounds: Optional[MeasureBounds]
    error: Optional[str] = None


def limit_scan(family: Callable[[int], GKSetSpec], params,
               depth_rule: Optional[Callable[[int], int]] = None) -> list[ScanRow]:
    """Bounds for a parameterized family of sets, one row per parameter.

    `family` maps the parameter to a set spec; parameters the family
    rejects (e.g. counts a congruence rule does not admit) produce a
    row carrying the error instead of aborting the scan.  The default
    depth is the digits consumed plus six, giving a bracket width of at
    most the corresponding cylinder measure.
    """
    rows = []
    for n in params:
        try:
            spec = family(int(n))
            depth = depth_rule(int(n)) if depth_rule else spec.required_depth + 6
            rows.append(ScanRow(int(n), measure_bounds(spec, depth)))
        except ValueError as exc:  # all package errors derive from ValueError
            rows.append(ScanRow(int(n), None, str(exc)))
    return rows


def sigma_family(q: QSequence, x, relation: str = "lt") -> Callable[[int], GKSetSpec]:
    """The family n -> { z : (n-fold shift of z) RELATION x }."""
    val = x if isinstance(x, Fraction) else parse_rational(x)
    return lambda n: GKSetSpec(q, ShiftProgram.sigma_power(n),
                               ConstRhs(val), relation)


def generator_family(q: QSequence, rule: dict, rhs: Rhs,
                     relation: str = "lt") -> Callable[[int], GKSetSpec]:
    """The family k -> { z : (rule word of length k)(z) RELATION rhs }."""
    return lambda k: GKSetSpec(q, ShiftProgram.from_generator(rule, k),
                               rhs, relation)
