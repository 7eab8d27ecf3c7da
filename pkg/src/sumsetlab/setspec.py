"""Integer sets on finite windows and densities along interval windows.

Three representations are supported:

* :class:`BitsetSet` -- an explicit set known on ``[0, N)``, stored as a
  Python ``int`` bitmask (bit ``n`` set iff ``n`` is a member);
* :class:`PeriodicSet` -- residues modulo ``m``, answerable for every
  ``n >= 0``;
* :class:`UnionSet` -- a finite union of the above.

All densities are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SpecError, WindowOverflowError

#: Nominal window of a periodic set when none is given. Membership is still
#: answered beyond it; search routines use it as their sum bound.
DEFAULT_PERIODIC_WINDOW = 10_000


class IntegerSet:
    """A subset of the non-negative integers known on a finite window."""

    window_size: int
    #: ``True`` when queries at or beyond ``window_size`` are rejected.
    bounded: bool = True

    def __contains__(self, n: int) -> bool:
        return self.contains(n)

    def contains(self, n: int) -> bool:
        raise NotImplementedError

    def _check(self, n: int) -> None:
        if n < 0:
            raise SpecError(f"membership query for negative integer {n}")
        if self.bounded and n >= self.window_size:
            raise WindowOverflowError(
                f"{n} is outside the window [0, {self.window_size})")

    def mask(self, lo: int, hi: int) -> int:
        """Bitmask of members in ``[lo, hi)``; bit ``j`` stands for ``lo + j``."""
        if lo < 0 or hi < lo:
            raise SpecError(f"bad range [{lo}, {hi})")
        if self.bounded and hi > self.window_size:
            raise WindowOverflowError(
                f"[{lo}, {hi}) exceeds the window [0, {self.window_size})")
        return self._mask(lo, hi)

    def _mask(self, lo: int, hi: int) -> int:
        out = 0
        for j, n in enumerate(range(lo, hi)):
            if self.contains(n):
                out |= 1 << j
        return out

    def count(self, lo: int, hi: int) -> int:
        """Number of members in ``[lo, hi)``."""
        return self.mask(lo, hi).bit_count()

    def members(self, lo: int = 0, hi: int | None = None) -> list[int]:
        hi = self.window_size if hi is None else hi
        m = self.mask(lo, hi)
        out = []
        while m:
            low = m & -m
            out.append(lo + low.bit_length() - 1)
            m ^= low
        return out


class BitsetSet(IntegerSet):
    """Explicit finite set on ``[0, window_size)``."""

    __slots__ = ("window_size", "bits")

    def __init__(self, window_size: int, bits: int = 0) -> None:
        if window_size < 1:
            raise SpecError("window_size must be >= 1")
        if bits < 0 or bits.bit_length() > window_size:
            raise SpecError("bitmask has members outside the window")
        self.window_size = window_size
        self.bits = bits

    @classmethod
    def from_members(cls, members: Iterable[int], window_size: int) -> BitsetSet:
        bits = 0
        for n in members:
            if n < 0:
                raise SpecError(f"negative member {n}")
            if n >= window_size:
                raise WindowOverflowError(
                    f"member {n} is outside the window [0, {window_size})")
            bits |= 1 << n
        return cls(window_size, bits)

    def contains(self, n: int) -> bool:
        self._check(n)
        return (self.bits >> n) & 1 == 1

    def _mask(self, lo: int, hi: int) -> int:
        return (self.bits >> lo) & ((1 << (hi - lo)) - 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitsetSet):
            return NotImplemented
        return self.window_size == other.window_size and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.window_size, self.bits))

    def __repr__(self) -> str:
        return f"BitsetSet({self.members()}, window_size={self.window_size})"


class PeriodicSet(IntegerSet):
    """``{n >= 0 : n mod modulus in residues}``."""

    bounded = False

    def __init__(self, modulus: int, residues: Iterable[int],
                 window_size: int = DEFAULT_PERIODIC_WINDOW) -> None:
        residues = tuple(residues)
        if modulus < 1:
            raise SpecError("modulus must be >= 1")
        if len(set(residues)) != len(residues):
            raise SpecError("residues must be distinct")
        if any(r < 0 or r >= modulus for r in residues):
            raise SpecError(f"residues must lie in [0, {modulus})")
        if window_size < 1:
            raise SpecError("window_size must be >= 1")
        self.modulus = modulus
        self.residues = tuple(sorted(residues))
        self.window_size = window_size
        self._residue_set = frozenset(self.residues)

    def contains(self, n: int) -> bool:
        self._check(n)
        return n % self.modulus in self._residue_set

    def count(self, lo: int, hi: int) -> int:
        if lo < 0 or hi < lo:
            raise SpecError(f"bad range [{lo}, {hi})")
        m = self.modulus
        return sum((hi - 1 - r) // m - (lo - 1 - r) // m for r in self.residues)

    def _mask(self, lo: int, hi: int) -> int:
        m = self.modulus
        period = 0
        for r in self.residues:
            period |= 1 << ((r - lo) % m)
        # doubling the pattern is much faster than setting bits one by one
        out, width = period, m
        while width < hi - lo:
            out |= out << width
            width *= 2
        return out & ((1 << (hi - lo)) - 1)

    def __repr__(self) -> str:
        return f"PeriodicSet({self.modulus}, {list(self.residues)})"


class UnionSet(IntegerSet):
    """Finite union of other integer sets."""

    def __init__(self, parts: Sequence[IntegerSet]) -> None:
        if not parts:
            raise SpecError("a union needs at least one part")
        self.parts = tuple(parts)
        bounded = [p.window_size for p in self.parts if p.bounded]
        self.bounded = bool(bounded)
        if bounded:
            self.window_size = min(bounded)
        else:
            self.window_size = max(p.window_size for p in self.parts)

    def contains(self, n: int) -> bool:
        self._check(n)
        return any(p.contains(n) for p in self.parts)

    def _mask(self, lo: int, hi: int) -> int:
        out = 0
        for p in self.parts:
            out |= p._mask(lo, hi)
        return out

    def __repr__(self) -> str:
        return f"UnionSet({list(self.parts)!r})"


def membership(set_: IntegerSet, n: int) -> bool:
    return set_.contains(n)


@dataclass(frozen=True)
class FolnerWindowFamily:
    """Finite prefix of a Følner sequence of intervals ``[L_j, M_j)``."""

    windows: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.windows:
            raise SpecError("at least one window is required")
        prev = 0
        for lo, hi in self.windows:
            if lo < 0:
                raise SpecError(f"window [{lo}, {hi}) starts below 0")
            if hi <= lo:
                raise SpecError(f"window [{lo}, {hi}) is empty")
            if hi - lo <= prev:
                raise SpecError("window lengths must be strictly increasing")
            prev = hi - lo

    def __iter__(self):
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class DensityReport:
    values: tuple[Fraction, ...]
    estimate: Fraction
    #: set when the per-window values are neither non-increasing nor
    #: non-decreasing
    non_monotone: bool


def density_along(set_: IntegerSet, windows: FolnerWindowFamily) -> DensityReport:
    values = tuple(Fraction(set_.count(lo, hi), hi - lo) for lo, hi in windows)
    diffs = [b - a for a, b in zip(values, values[1:])]
    monotone = all(d >= 0 for d in diffs) or all(d <= 0 for d in diffs)
    return DensityReport(values, values[-1], not monotone)


def folner_defect(windows: FolnerWindowFamily, t: int) -> list[Fraction]:
    """``|(Phi_j - t) ∩ Phi_j| / |Phi_j|`` for each interval window."""
    if t < 1:
        raise SpecError("shift t must be >= 1")
    out = []
    for lo, hi in windows:
        length = hi - lo
        # Phi - t = [lo - t, hi - t); overlap with [lo, hi) is [lo, hi - t)
        out.append(Fraction(max(length - t, 0), length))
    return out


# ---------------------------------------------------------------- DSL parsing

def _int(text: str, what: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise SpecError(f"bad {what}: {text!r}") from None


def _int_list(text: str, what: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [_int(tok, what) for tok in text.split(",")]


def _split_union(body: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise SpecError("unbalanced parentheses in union")
        elif ch == ";" and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    if depth:
        raise SpecError("unbalanced parentheses in union")
    parts.append(body[start:])
    return parts


def parse_set_spec(text: str) -> IntegerSet:
    """Parse the set DSL.

    ``periodic:<m>:<r1,r2,...>[@N]``, ``list:<n1,n2,...>@<N>``,
    ``file:<path>@<N>`` and ``union(<spec>;<spec>;...)``.
    """
    text = text.strip()
    if text.startswith("union(") and text.endswith(")"):
        return UnionSet([parse_set_spec(p) for p in _split_union(text[6:-1])])
    kind, sep, rest = text.partition(":")
    if not sep:
        raise SpecError(f"unrecognised set spec {text!r}")
    if kind == "periodic":
        body, at, window = rest.partition("@")
        m_text, sep2, residues = body.partition(":")
        if not sep2:
            raise SpecError(f"periodic spec needs <m>:<residues>: {text!r}")
        window_size = _int(window, "window") if at else DEFAULT_PERIODIC_WINDOW
        return PeriodicSet(_int(m_text, "modulus"), _int_list(residues, "residue"),
                           window_size)
    if kind in ("list", "file"):
        body, at, window = rest.rpartition("@")
        if not at:
            raise SpecError(f"{kind} spec needs a window suffix @<N>: {text!r}")
        window_size = _int(window, "window")
        if kind == "list":
            members = _int_list(body, "member")
        else:
            try:
                lines = Path(body).read_text(encoding="ascii").split()
            except OSError as exc:
                raise SpecError(f"cannot read {body}: {exc}") from None
            members = [_int(tok, "member") for tok in lines]
        if window_size < 1:
            raise SpecError("window must be >= 1")
        return BitsetSet.from_members(members, window_size)
    raise SpecError(f"unknown set kind {kind!r}")


def parse_window_spec(text: str) -> FolnerWindowFamily:
    """Parse ``intervals:<L1>-<M1>,<L2>-<M2>,...``."""
    kind, sep, rest = text.strip().partition(":")
    if kind != "intervals" or not sep or not rest.strip():
        raise SpecError(f"unrecognised window spec {text!r}")
    windows = []
    for tok in rest.split(","):
        lo, dash, hi = tok.strip().partition("-")
        if not dash:
            raise SpecError(f"bad interval {tok!r}")
        windows.append((_int(lo, "interval start"), _int(hi, "interval end")))
    return FolnerWindowFamily(tuple(windows))


def format_set_spec(set_: IntegerSet) -> str:
    if isinstance(set_, PeriodicSet):
        residues = ",".join(map(str, set_.residues))
        return f"periodic:{set_.modulus}:{residues}@{set_.window_size}"
    if isinstance(set_, BitsetSet):
        return f"list:{','.join(map(str, set_.members()))}@{set_.window_size}"
    if isinstance(set_, UnionSet):
        return "union(" + ";".join(format_set_spec(p) for p in set_.parts) + ")"
    raise SpecError(f"cannot format {set_!r}")

