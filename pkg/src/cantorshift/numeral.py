"""Exact digit arithmetic over Cantor-series and q-ary numeral systems.

A base sequence (q_1, q_2, ...) with every q_k >= 2 represents a number
x in [0, 1] as

    x = e_1/q_1 + e_2/(q_1 q_2) + e_3/(q_1 q_2 q_3) + ...

with the k-th digit e_k drawn from {0, ..., q_k - 1}.  The constant base
q_k = q is the ordinary base-q expansion.  Everything in this module is
exact: values are `fractions.Fraction`, digit strings carry a symbolic
tail descriptor instead of a float approximation, and cylinder endpoints
come out as reduced rationals.

Numbers whose expansion terminates (other than 0 and 1) have a second
representation ending in the maximal digits q_k - 1; the all-zero-tail
form is treated as canonical throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import DomainError, InsufficientDepthError

__all__ = [
    "QSequence",
    "Tail",
    "ZERO_TAIL",
    "MAX_TAIL",
    "periodic_tail",
    "truncated_tail",
    "DigitString",
    "Interval",
    "Cylinder",
    "ClassifyResult",
    "expand",
    "expand_exact",
    "eval_prefix",
    "classify_rationality",
    "cylinder_info",
    "parse_rational",
    "format_rational",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text: str) -> Fraction:
    """Parse "num/den", integer, or decimal notation into a Fraction."""
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    """Render a Fraction as "num/den" (always with a denominator)."""
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Base sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QSequence:
    """An infinite base sequence, stored as a finite prefix plus a cycle.

    The sequence is prefix[0], prefix[1], ..., then cycle repeated forever.
    Users build one of three declared kinds (see the classmethods); shift
    and digit-drop operations return derived sequences in the same closed
    form, so downstream arithmetic stays exact.
    """

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]
    kind: str = "derived"

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("base sequence needs a nonempty cycle")
        for v in self.prefix + self.cycle:
            if not isinstance(v, int) or v < 2:
                raise DomainError(f"base values must be integers >= 2, got {v!r}")

    @classmethod
    def constant(cls, q: int) -> "QSequence":
        """The constant sequence q, q, q, ... (ordinary base-q digits)."""
        return cls((), (int(q),), "constant")

    @classmethod
    def periodic(cls, values) -> "QSequence":
        """The purely periodic sequence repeating `values` forever."""
        return cls((), tuple(int(v) for v in values), "periodic")

    @classmethod
    def explicit(cls, values) -> "QSequence":
        """An explicitly listed head; continues by repeating the last value."""
        vals = tuple(int(v) for v in values)
        if not vals:
            raise DomainError("explicit base sequence needs at least one value")
        return cls(vals[:-1], (vals[-1],), "explicit")

    def at(self, k: int) -> int:
        """The k-th base value, 1-indexed."""
        if k < 1:
            raise DomainError(f"base index must be >= 1, got {k}")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.cycle[(k - len(self.prefix) - 1) % len(self.cycle)]

    def partial_product(self, m: int) -> int:
        """q_1 q_2 ... q_m as an exact integer; m = 0 gives 1."""
        out = 1
        for k in range(1, m + 1):
            out *= self.at(k)
        return out

    def shift(self, n: int) -> "QSequence":
        """The sequence with the first n values removed."""
        if n < 0:
            raise DomainError("shift count must be >= 0")
        if n <= len(self.prefix):
            return QSequence(self.prefix[n:], self.cycle)
        r = (n - len(self.prefix)) % len(self.cycle)
        return QSequence((), self.cycle[r:] + self.cycle[:r])

    def remove_at(self, m: int) -> "QSequence":
        """The sequence with the m-th value (1-indexed) deleted."""
        if m < 1:
            raise DomainError(f"removal index must be >= 1, got {m}")
        if m <= len(self.prefix):
            return QSequence(self.prefix[: m - 1] + self.prefix[m:], self.cycle)
        c = len(self.cycle)
        k = m - len(self.prefix)  # position within the cyclic part
        head = tuple(self.cycle[i % c] for i in range(k - 1))
        r = k % c
        return QSequence(self.prefix + head, self.cycle[r:] + self.cycle[:r])

    def canonical(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Normal form (prefix, primitive cycle) identifying the sequence."""
        cyc = list(self.cycle)
        n = len(cyc)
        for d in range(1, n + 1):
            if n % d == 0 and cyc == cyc[:d] * (n // d):
                cyc = cyc[:d]
                break
        pre = list(self.prefix)
        while pre and pre[-1] == cyc[-1]:
            pre.pop()
            cyc = [cyc[-1]] + cyc[:-1]
        return tuple(pre), tuple(cyc)

    def __eq__(self, other):
        if not isinstance(other, QSequence):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def to_json(self) -> dict:
        """JSON form {"kind": ..., "values": [...]}; raises if the sequence
        is pre-periodic with a nontrivial cycle (not expressible)."""
        pre, cyc = self.canonical()
        if not pre and len(cyc) == 1:
            return {"kind": "constant", "values": [cyc[0]]}
        if not pre:
            return {"kind": "periodic", "values": list(cyc)}
        if len(cyc) == 1:
            return {"kind": "explicit", "values": list(pre) + [cyc[0]]}
        raise ValueError("pre-periodic derived sequence has no declared JSON kind")

    @classmethod
    def from_json(cls, obj) -> "QSequence":
        if isinstance(obj, int):
            return cls.constant(obj)
        if isinstance(obj, (list, tuple)):
            return cls.explicit(obj)
        kind = obj.get("kind")
        values = obj.get("values", [])
        if kind == "constant":
            if len(values) != 1:
                raise DomainError("constant base takes exactly one value")
            return cls.constant(values[0])
        if kind == "periodic":
            return cls.periodic(values)
        if kind == "explicit":
            return cls.explicit(values)
        raise DomainError(f"unknown base kind {kind!r}")

    def __repr__(self):
        pre, cyc = self.canonical()
        if not pre and len(cyc) == 1:
            return f"QSequence.constant({cyc[0]})"
        return f"QSequence(prefix={pre}, cycle={cyc})"


# ---------------------------------------------------------------------------
# Digit strings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tail:
    """Tail descriptor: all zeros, all maximal digits, a repeating pattern,
    or unknown beyond the stored depth."""

    kind: str  # "zero" | "max" | "periodic" | "truncated"
    period: tuple[int, ...] = ()
    depth: int = 0

    def to_json(self):
        if self.kind == "zero":
            return "zero"
        if self.kind == "max":
            return "max"
        if self.kind == "periodic":
            return {"periodic": list(self.period)}
        return {"truncated": self.depth}

    @classmethod
    def from_json(cls, obj) -> "Tail":
        if obj == "zero":
            return ZERO_TAIL
        if obj == "max":
            return MAX_TAIL
        if isinstance(obj, dict) and "periodic" in obj:
            return periodic_tail(obj["periodic"])
        if isinstance(obj, dict) and "truncated" in obj:
            return truncated_tail(int(obj["truncated"]))
        raise DomainError(f"unknown tail form {obj!r}")


ZERO_TAIL = Tail("zero")
MAX_TAIL = Tail("max")


def periodic_tail(pattern) -> Tail:
    pattern = tuple(int(v) for v in pattern)
    if not pattern:
        raise DomainError("periodic tail needs a nonempty pattern")
    return Tail("periodic", period=pattern)


def truncated_tail(depth: int) -> Tail:
    if depth < 0:
        raise DomainError("truncation depth must be >= 0")
    return Tail("truncated", depth=depth)


@dataclass(frozen=True)
class Interval:
    """A closed rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class DigitString:
    """A digit representation: exact finite prefix plus a tail descriptor.

    The k-th digit must lie in {0, ..., q_k - 1}.  Note that 0 has only the
    all-zero representation; a max tail always denotes a strictly positive
    number.  Equality is structural -- use `eval_prefix` to compare values.
    """

    base: QSequence
    prefix: tuple[int, ...]
    tail: Tail = ZERO_TAIL

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(d) for d in self.prefix))
        for i, d in enumerate(self.prefix):
            qk = self.base.at(i + 1)
            if not 0 <= d < qk:
                raise DomainError(
                    f"digit {d} at position {i + 1} outside range 0..{qk - 1}")
        t = self.tail
        if t.kind == "truncated" and t.depth != len(self.prefix):
            raise DomainError(
                f"truncated tail depth {t.depth} != prefix length {len(self.prefix)}")
        if t.kind == "periodic":
            self._check_periodic_range()

    def _check_periodic_range(self):
        start = len(self.prefix)
        pat = self.tail.period
        L = len(pat)
        pre_b = len(self.base.prefix)
        c = len(self.base.cycle)
        steps = max(0, pre_b - start) + L * c
        for i in range(steps):
            qk = self.base.at(start + 1 + i)
            d = pat[i % L]
            if not 0 <= d < qk:
                raise DomainError(
                    f"periodic tail digit {d} outside range at position {start + 1 + i}")

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def digit(self, k: int) -> int:
        """The k-th digit, 1-indexed, materializing the tail if needed."""
        if k < 1:
            raise DomainError("digit index must be >= 1")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        t = self.tail
        if t.kind == "zero":
            return 0
        if t.kind == "max":
            return self.base.at(k) - 1
        if t.kind == "periodic":
            return t.period[(k - len(self.prefix) - 1) % len(t.period)]
        raise InsufficientDepthError(
            f"digit {k} unknown: string truncated at depth {t.depth}", required=k)

    def materialize(self, n: int) -> "DigitString":
        """An equal-valued string whose explicit prefix has length >= n."""
        d = len(self.prefix)
        if n <= d:
            return self
        t = self.tail
        if t.kind == "truncated":
            raise InsufficientDepthError(
                f"cannot materialize to depth {n}: truncated at {d}", required=n)
        ext = tuple(self.digit(k) for k in range(d + 1, n + 1))
        if t.kind == "periodic":
            L = len(t.period)
            r = (n - d) % L
            new_tail = periodic_tail(t.period[r:] + t.period[:r])
        else:
            new_tail = t
        return DigitString(self.base, self.prefix + ext, new_tail)

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "tail": self.tail.to_json()}

    @classmethod
    def from_json(cls, obj, base: QSequence) -> "DigitString":
        return cls(base, tuple(obj.get("prefix", [])), Tail.from_json(obj.get("tail", "zero")))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _prefix_sum(d: DigitString) -> tuple[Fraction, int]:
    """(sum of the explicit prefix terms, q_1...q_depth)."""
    total = ZERO
    denom = 1
    for i, dig in enumerate(d.prefix):
        denom *= d.base.at(i + 1)
        if dig:
            total += Fraction(dig, denom)
    return total, denom


def _periodic_tail_value(base: QSequence, pattern: tuple[int, ...]) -> Fraction:
    """Exact value of sum_{j>=1} pattern[(j-1) mod L] / (b_1 b_2 ... b_j)
    over the given base.

    Walks the joint (pattern phase, base phase) state machine until the
    state recurs, then closes the geometric tail in one step.  Always
    terminates: the state space is finite.
    """
    L = len(pattern)
    pre = len(base.prefix)
    c = len(base.cycle)
    seen = {}
    partials = [ZERO]
    denoms = [1]
    j = 0
    while True:
        if j >= pre:
            state = (j % L, (j - pre) % c)
            if state in seen:
                j0 = seen[state]
                break
            seen[state] = j
        b = base.at(j + 1)
        denoms.append(denoms[-1] * b)
        term = Fraction(pattern[j % L], denoms[-1])
        partials.append(partials[-1] + term)
        j += 1
    # tail after j0 repeats with ratio denoms[j0]/denoms[j]
    head = partials[j0]
    block = (partials[j] - partials[j0]) * denoms[j0]
    ratio = Fraction(denoms[j0], denoms[j])
    return head + Fraction(1, denoms[j0]) * (block / (1 - ratio))


def eval_prefix(d: DigitString) -> Union[Fraction, Interval]:
    """Exact value of a digit string.

    Zero, max, and periodic tails give an exact Fraction; a truncated tail
    gives the exact interval of all numbers sharing the known prefix.
    """
    total, denom = _prefix_sum(d)
    t = d.tail
    if t.kind == "zero":
        return total
    if t.kind == "max":
        return total + Fraction(1, denom)
    if t.kind == "periodic":
        tail = _periodic_tail_value(d.base.shift(len(d.prefix)), t.period)
        return total + tail / denom
    return Interval(total, total + Fraction(1, denom))


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------

def _scan(x: Fraction, q: QSequence, limit: int):
    """Greedy digit extraction with remainder-state tracking.

    Returns (digits, term, cyc): `digits` is the list produced so far,
    `term` the index where the remainder hit zero (expansion terminates),
    `cyc` a pair (entry, period) marking the first recurrence of a
    (remainder, base-phase) state.  At most one of term/cyc is set; both
    None means the probe limit was reached first.
    """
    pre = len(q.prefix)
    c = len(q.cycle)
    digits: list[int] = []
    r = x
    seen: dict = {}
    k = 0
    while k < limit:
        if r == 0:
            return digits, k, None
        if k >= pre:
            state = (r, (k - pre) % c)
            if state in seen:
                j0 = seen[state]
                return digits, None, (j0, k - j0)
            seen[state] = k
        qk = q.at(k + 1)
        d = (r.numerator * qk) // r.denominator
        r = r * qk - d
        digits.append(d)
        k += 1
    if r == 0:
        return digits, k, None
    return digits, None, None


def _decision_bound(x: Fraction, q: QSequence) -> int:
    # every remainder has denominator dividing x.denominator, so the state
    # machine must repeat or terminate within this many steps
    return len(q.prefix) + x.denominator * len(q.cycle) + 2


def _check_unit_interval(x: Fraction):
    if not isinstance(x, Fraction):
        raise DomainError(f"expected an exact Fraction, got {type(x).__name__}")
    if x < 0 or x > 1:
        raise DomainError(f"value {x} outside [0, 1]")


def _max_string(q: QSequence, depth: int) -> DigitString:
    return DigitString(q, tuple(q.at(k) - 1 for k in range(1, depth + 1)), MAX_TAIL)


_DEFAULT_PROBE_SLACK = 4096


def expand(x: Fraction, q: QSequence, depth: int,
           probe_limit: Optional[int] = None) -> DigitString:
    """Greedy expansion of x to exactly `depth` digits.

    The tail is ZERO when the expansion terminates within `depth` digits,
    PERIODIC when the digits from position depth+1 on are detected to
    repeat, and TRUNCATED otherwise.  Detection scans remainder states up
    to `probe_limit` steps (default: enough to always decide for small
    denominators, capped at depth + 4096).

    x = 1 is represented as the all-maximal-digit string.
    """
    _check_unit_interval(x)
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    if x == 1:
        return _max_string(q, depth)
    if probe_limit is None:
        probe_limit = min(_decision_bound(x, q),
                          max(depth, len(q.prefix)) + _DEFAULT_PROBE_SLACK)
    limit = max(probe_limit, depth)
    digits, term, cyc = _scan(x, q, limit)
    if term is not None and term <= depth:
        prefix = tuple(digits) + (0,) * (depth - term)
        return DigitString(q, prefix, ZERO_TAIL)
    if cyc is not None and cyc[0] <= depth:
        j0, L = cyc
        pat = digits[j0:j0 + L]
        prefix = tuple(digits[i] if i < len(digits) else pat[(i - j0) % L]
                       for i in range(depth))
        tail = periodic_tail(tuple(pat[(depth - j0 + i) % L] for i in range(L)))
        return DigitString(q, prefix, tail)
    return DigitString(q, tuple(digits[:depth]), truncated_tail(depth))


def expand_exact(x: Fraction, q: QSequence) -> DigitString:
    """Fully resolved expansion of a rational: ZERO, PERIODIC, or MAX tail.

    Unlike `expand` this never truncates; the scan bound is derived from
    the denominator of x, so large denominators cost proportionally.
    """
    _check_unit_interval(x)
    if x == 1:
        return DigitString(q, (), MAX_TAIL)
    digits, term, cyc = _scan(x, q, _decision_bound(x, q))
    if term is not None:
        return DigitString(q, tuple(digits), ZERO_TAIL)
    assert cyc is not None, "state scan must terminate or recur within bound"
    j0, L = cyc
    return DigitString(q, tuple(digits[:j0]), periodic_tail(tuple(digits[j0:j0 + L])))


@dataclass(frozen=True)
class ClassifyResult:
    """Outcome of rationality classification against a base sequence.

    kind is "q-rational" (terminating expansion; both tail forms included,
    except at the endpoints 0 and 1 which have a single representation),
    "q-irrational" (periodic, non-terminating; `certificate` holds the
    exact eventually-periodic string), or "undecided".
    """

    kind: str
    zero_form: Optional[DigitString] = None
    max_form: Optional[DigitString] = None
    certificate: Optional[DigitString] = None
    probe_depth: int = 0


def classify_rationality(x: Fraction, q: QSequence,
                         probe_depth: Optional[int] = None) -> ClassifyResult:
    """Decide whether x has a terminating expansion in base q.

    With the default probe depth the answer is always decided; an explicit
    smaller probe may return "undecided".
    """
    _check_unit_interval(x)
    if probe_depth is None:
        probe_depth = _decision_bound(x, q)
    if x == 1:
        return ClassifyResult("q-rational", zero_form=None,
                              max_form=DigitString(q, (), MAX_TAIL),
                              probe_depth=probe_depth)
    digits, term, cyc = _scan(x, q, probe_depth)
    if term is not None:
        zero_form = DigitString(q, tuple(digits), ZERO_TAIL)
        if term == 0:  # x == 0: unique representation
            return ClassifyResult("q-rational", zero_form=zero_form,
                                  probe_depth=probe_depth)
        max_form = DigitString(q, tuple(digits[:-1]) + (digits[-1] - 1,), MAX_TAIL)
        return ClassifyResult("q-rational", zero_form=zero_form,
                              max_form=max_form, probe_depth=probe_depth)
    if cyc is not None:
        j0, L = cyc
        cert = DigitString(q, tuple(digits[:j0]),
                           periodic_tail(tuple(digits[j0:j0 + L])))
        return ClassifyResult("q-irrational", certificate=cert,
                              probe_depth=probe_depth)
    return ClassifyResult("undecided", probe_depth=probe_depth)


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cylinder:
    """All numbers whose first m digits equal a fixed base tuple: a closed
    interval of width 1/(q_1 ... q_m)."""

    base_digits: tuple[int, ...]
    q: QSequence
    inf: Fraction
    sup: Fraction
    measure: Fraction

    @property
    def rank(self) -> int:
        return len(self.base_digits)

    def contains(self, x) -> bool:
        return self.inf <= x <= self.sup

    def interval(self) -> Interval:
        return Interval(self.inf, self.sup)


def cylinder_info(base_digits, q: QSequence) -> Cylinder:
    """Endpoints and exact measure of the cylinder over a digit tuple."""
    digits = tuple(int(d) for d in base_digits)
    total = ZERO
    denom = 1
    for i, d in enumerate(digits):
        qk = q.at(i + 1)
        if not 0 <= d < qk:
            raise DomainError(
                f"digit {d} at position {i + 1} outside range 0..{qk - 1}")
        denom *= qk
        if d:
            total += Fraction(d, denom)
    width = Fraction(1, denom)
    return Cylinder(digits, q, total, total + width, width)
