"""Shift and digit-deletion operators on Cantor-series expansions.

Two primitive moves act on a digit string:

* the left shift `sigma`, which discards the first digit and renumbers,
  so sigma(x) = sum_{k>=2} e_k / (q_2 ... q_k) over the shifted base; and
* the position-m deletion `sigma_m`, which removes the m-th digit (and
  the m-th base value) and closes the gap.

Both act on exact rationals (via full expansion) or directly on
`DigitString` objects.  A `ShiftProgram` is a word of such moves applied
left to right, each indexing into the *current* string, i.e. positions
are re-counted after every deletion.  Programs can be spelled out or
produced by a generator rule (constant repetition, an affine index
schedule, an explicit table, or a congruence-filtered repetition).

`normalize_program` rewrites a word into an equivalent one using the
identities that collapse deletion patterns into pure shift powers:

* deleting position 1 is the shift itself;
* m deletions at position 2 followed by one shift equal m + 1 shifts;
* a strictly increasing run of deletions at k_1 < ... < k_n followed by
  at least k_n - 1 shifts equals k_n + n - 1 shifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import DomainError, InsufficientDepthError
from .numeral import (
    DigitString,
    QSequence,
    _check_unit_interval,
    eval_prefix,
    expand,
    expand_exact,
    truncated_tail,
)

__all__ = [
    "Atom",
    "SIGMA",
    "GEN",
    "ShiftProgram",
    "shift_n",
    "gen_shift",
    "apply_program",
    "normalize_program",
    "reconstruct_identity",
    "ReconstructionCheck",
    "required_depth",
    "drop_positions",
]


# ---------------------------------------------------------------------------
# Atoms and programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """One move: kind "sigma" (drop the first digit) or "gen" (drop the
    digit at `index`, counted in the current string)."""

    kind: str
    index: int = 0

    def __post_init__(self):
        if self.kind not in ("sigma", "gen"):
            raise DomainError(f"unknown atom kind {self.kind!r}")
        if self.kind == "gen" and self.index < 1:
            raise DomainError(f"deletion index must be >= 1, got {self.index}")

    def to_json(self) -> dict:
        if self.kind == "sigma":
            return {"sigma": None}
        return {"gen": self.index}

    @classmethod
    def from_json(cls, obj) -> "Atom":
        if not isinstance(obj, dict):
            raise DomainError(f"atom must be an object, got {obj!r}")
        if "sigma" in obj:
            return SIGMA
        if "gen" in obj:
            return GEN(int(obj["gen"]))
        raise DomainError(f"unknown atom form {obj!r}")

    def __repr__(self):
        return "SIGMA" if self.kind == "sigma" else f"GEN({self.index})"


SIGMA = Atom("sigma")


def GEN(m: int) -> Atom:
    return Atom("gen", m)


def _psi_index(rule: dict, j: int) -> int:
    """Value of an index schedule at step j (1-indexed)."""
    kind = rule.get("kind")
    if kind == "affine":
        a, b = int(rule["a"]), int(rule["b"])
        if a < 0 or a + b < 1:
            raise DomainError(
                f"affine schedule a={a}, b={b} must keep indices >= 1")
        return a * j + b
    if kind == "table":
        values = rule.get("values", [])
        if j > len(values):
            raise DomainError(
                f"table schedule has {len(values)} entries; step {j} undefined")
        return int(values[j - 1])
    raise DomainError(f"schedule kind {kind!r} cannot produce indices")


def _rule_word(rule: dict, k: Optional[int]) -> tuple[Atom, ...]:
    """Expand a generator rule into a word of atoms.

    `k` is the family parameter (word length / repetition count); rules
    that carry their own count use it as a default.
    """
    if not isinstance(rule, dict):
        raise DomainError("generator rule must be an object")
    kind = rule.get("kind")
    if kind == "const-repeat":
        count = k if k is not None else rule.get("k")
        if count is None:
            raise DomainError("const-repeat rule needs a repetition count")
        count, m = int(count), int(rule["m"])
        if count < 0:
            raise DomainError("repetition count must be >= 0")
        return (GEN(m),) * count
    if kind == "mod-filter":
        m, c = int(rule["m"]), int(rule["c"])
        if c < 1:
            raise DomainError("mod-filter modulus must be >= 1")
        if k is None:
            raise DomainError("mod-filter rule needs a repetition count")
        k = int(k)
        if k % c != 1 % c:
            raise DomainError(
                f"count {k} not admitted by mod-filter: need k = 1 (mod {c})")
        return (GEN(m),) * k
    if kind == "affine":
        if k is None:
            raise DomainError("affine rule needs a word length")
        return tuple(GEN(_psi_index(rule, j)) for j in range(1, int(k) + 1))
    if kind == "table":
        values = rule.get("values", [])
        count = len(values) if k is None else int(k)
        if count > len(values):
            raise DomainError(
                f"table rule has {len(values)} entries, requested {count}")
        return tuple(GEN(_psi_index(rule, j)) for j in range(1, count + 1))
    if "psi" in rule and "phi" in rule:
        # composed family: the admission rule `phi` fixes the word length,
        # the schedule `psi` supplies the deletion indices
        inner = _rule_word(rule["phi"], k)
        return tuple(GEN(_psi_index(rule["psi"], j))
                     for j in range(1, len(inner) + 1))
    raise DomainError(f"unknown generator rule kind {kind!r}")


@dataclass(frozen=True)
class ShiftProgram:
    """A finite word of shift/deletion atoms, applied left to right.

    `generator`, when present, records the rule the word was expanded
    from (for round-tripping and scans); it does not affect evaluation.
    """

    word: tuple[Atom, ...]
    generator: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        for a in self.word:
            if not isinstance(a, Atom):
                raise DomainError(f"program word must contain atoms, got {a!r}")

    @classmethod
    def identity(cls) -> "ShiftProgram":
        return cls(())

    @classmethod
    def sigma_power(cls, n: int) -> "ShiftProgram":
        if n < 0:
            raise DomainError("shift power must be >= 0")
        return cls((SIGMA,) * n)

    @classmethod
    def from_generator(cls, rule: dict, k: Optional[int] = None) -> "ShiftProgram":
        return cls(_rule_word(rule, k), generator=dict(rule))

    @property
    def required_depth(self) -> int:
        return required_depth(self.word)

    def is_sigma_power(self) -> Optional[int]:
        """The exponent n if the word is exactly n shifts, else None."""
        if all(a.kind == "sigma" for a in self.word):
            return len(self.word)
        return None

    def to_json(self) -> dict:
        out = {"word": [a.to_json() for a in self.word]}
        if self.generator is not None:
            out["generator"] = self.generator
        return out

    @classmethod
    def from_json(cls, obj) -> "ShiftProgram":
        if not isinstance(obj, dict):
            raise DomainError("program JSON must be an object")
        if "word" in obj:
            word = tuple(Atom.from_json(a) for a in obj["word"])
            return cls(word, generator=obj.get("generator"))
        if "generator" in obj:
            return cls.from_generator(obj["generator"], obj.get("k"))
        raise DomainError("program JSON needs a \"word\" list or a \"generator\" rule")

    def __repr__(self):
        return f"ShiftProgram([{', '.join(map(repr, self.word))}])"


def required_depth(word) -> int:
    """Smallest known prefix length that lets the word run on a truncated
    string.  Computed right to left: a shift consumes one more digit than
    its continuation; a deletion at m needs at least m digits."""
    req = 0
    for atom in reversed(tuple(word)):
        if atom.kind == "sigma":
            req += 1
        else:
            req = max(atom.index, req + 1)
    return req


# ---------------------------------------------------------------------------
# Primitive operators
# ---------------------------------------------------------------------------

Value = Union[Fraction, DigitString]


def _drop_front(d: DigitString, n: int) -> DigitString:
    if n == 0:
        return d
    if d.tail.kind == "truncated":
        if n > d.depth:
            raise InsufficientDepthError(
                f"shift by {n} needs {n} digits, string truncated at {d.depth}",
                required=n)
        return DigitString(d.base.shift(n), d.prefix[n:],
                           truncated_tail(d.depth - n))
    dd = d.materialize(n)
    return DigitString(d.base.shift(n), dd.prefix[n:], dd.tail)


def _drop_at(d: DigitString, m: int) -> DigitString:
    if m < 1:
        raise DomainError(f"deletion index must be >= 1, got {m}")
    if d.tail.kind == "truncated":
        if m > d.depth:
            raise InsufficientDepthError(
                f"deleting digit {m} needs {m} digits, string truncated at {d.depth}",
                required=m)
        return DigitString(d.base.remove_at(m),
                           d.prefix[:m - 1] + d.prefix[m:],
                           truncated_tail(d.depth - 1))
    dd = d.materialize(m)
    return DigitString(d.base.remove_at(m),
                       dd.prefix[:m - 1] + dd.prefix[m:], dd.tail)


def shift_n(x: Value, q: QSequence, n: int) -> Value:
    """Apply the left shift n times.

    For a rational input the expansion is computed exactly and the first
    n digits are dropped; the result is the exact value of the remainder
    series over the shifted base.  DigitString inputs shift symbolically.
    """
    if n < 0:
        raise DomainError(f"shift count must be >= 0, got {n}")
    if isinstance(x, DigitString):
        return _drop_front(x, n)
    if n == 0:
        _check_unit_interval(x)
        return x
    return eval_prefix(_drop_front(expand_exact(x, q), n))


def gen_shift(x: Value, q: QSequence, m: int) -> Value:
    """Delete the m-th digit of x (1-indexed) and renumber.

    Rational inputs use the closed form
        sigma_m(x) = x q_m - e_m / (q_1...q_{m-1})
                       - (q_m - 1) sum_{i<m} e_i / (q_1...q_i),
    which only needs the first m greedy digits.
    """
    if m < 1:
        raise DomainError(f"deletion index must be >= 1, got {m}")
    if isinstance(x, DigitString):
        return _drop_at(x, m)
    digits = expand(x, q, m).prefix
    qm = q.at(m)
    out = x * qm - Fraction(digits[m - 1], q.partial_product(m - 1))
    head = Fraction(0)
    denom = 1
    for i in range(m - 1):
        denom *= q.at(i + 1)
        if digits[i]:
            head += Fraction(digits[i], denom)
    return out - (qm - 1) * head


def drop_positions(d: DigitString, positions) -> DigitString:
    """Delete a set of digit positions counted in the *original* string.

    Positions are removed from highest to lowest so earlier indices stay
    valid while later ones are deleted.
    """
    pos = sorted(set(int(p) for p in positions), reverse=True)
    if pos and pos[-1] < 1:
        raise DomainError("digit positions must be >= 1")
    out = d
    for p in pos:
        out = _drop_at(out, p)
    return out


def apply_program(program: ShiftProgram, x: Value, q: QSequence) -> Value:
    """Run a program left to right; every atom indexes the current string."""
    if isinstance(x, DigitString):
        cur = x
        for i, atom in enumerate(program.word):
            try:
                cur = _drop_front(cur, 1) if atom.kind == "sigma" else _drop_at(cur, atom.index)
            except InsufficientDepthError as exc:
                raise InsufficientDepthError(
                    f"atom {i + 1} ({atom!r}) of the program: {exc}",
                    required=required_depth(program.word)) from exc
        return cur
    val = x
    base = q
    for atom in program.word:
        if atom.kind == "sigma":
            val = shift_n(val, base, 1)
            base = base.shift(1)
        else:
            val = gen_shift(val, base, atom.index)
            base = base.remove_at(atom.index)
    return val


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

def _count_sigmas_from(word, start) -> int:
    n = 0
    while start + n < len(word) and word[start + n].kind == "sigma":
        n += 1
    return n


def normalize_program(program: ShiftProgram) -> ShiftProgram:
    """Rewrite a word to a normal form using the composition identities.

    Applies, to a fixed point: deletion at 1 -> shift; a run of r
    deletions at 2 followed by a shift -> r + 1 shifts; a strictly
    increasing deletion run k_1 < ... < k_n followed by k_n - 1 shifts
    -> k_n + n - 1 shifts.  Rewrites fire at the earliest position,
    longest run first.  A word consisting entirely of shifts is already
    normal.  The result evaluates identically on every input deep enough
    for both forms.
    """
    word = [SIGMA if (a.kind == "gen" and a.index == 1) else a
            for a in program.word]
    changed = True
    while changed:
        changed = False
        for i, atom in enumerate(word):
            if atom.kind != "gen":
                continue
            if atom.index == 2:
                # maximal run of deletions at position 2
                j = i
                while j < len(word) and word[j] == Atom("gen", 2):
                    j += 1
                run = j - i
                if _count_sigmas_from(word, j) >= 1:
                    word[i:j + 1] = [SIGMA] * (run + 1)
                    changed = True
                    break
            # maximal strictly increasing run starting here
            j = i
            last = 0
            while (j < len(word) and word[j].kind == "gen"
                   and word[j].index > last):
                last = word[j].index
                j += 1
            n = j - i
            need = last - 1
            if n >= 1 and _count_sigmas_from(word, j) >= need:
                word[i:j + need] = [SIGMA] * (last + n - 1)
                changed = True
                break
        # a lone GEN(1) can only appear transiently; the first pass
        # removed them, and rewrites only introduce SIGMA atoms
    return ShiftProgram(tuple(word), program.generator)


# ---------------------------------------------------------------------------
# Reconstruction identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReconstructionCheck:
    """Witness of x = (partial digit sum) + shifted value / (q_1...q_n)."""

    holds: bool
    lhs: Fraction
    rhs: Fraction
    shifted: Fraction


def reconstruct_identity(x: Fraction, q: QSequence, n: int) -> ReconstructionCheck:
    """Verify that dropping n digits and reassembling recovers x exactly.

    Both sides are computed through the digit machinery (not algebraic
    rearrangement), so this genuinely exercises the expansion and shift
    paths.
    """
    if n < 0:
        raise DomainError(f"shift count must be >= 0, got {n}")
    shifted = shift_n(x, q, n)
    partial = Fraction(0)
    denom = 1
    if n:
        digits = expand(x, q, n).prefix
        for i in range(n):
            denom *= q.at(i + 1)
            if digits[i]:
                partial += Fraction(digits[i], denom)
    rhs = partial + shifted / denom
    return ReconstructionCheck(x == rhs, x, rhs, shifted)
