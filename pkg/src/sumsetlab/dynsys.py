"""Concrete topological dynamical systems.

Torus coordinates are 64-bit fixed-point fractions: the integer ``a`` in
``[0, 2**64)`` stands for ``a / 2**64``. Addition modulo 1 is then exact
integer addition modulo ``2**64``, so orbits are reproducible bit for bit.
An irrational rotation number is represented by its 64-bit truncation.

Points are plain Python values:

=================  =========================================
FiniteRotation     ``int`` in ``[0, size)``
TorusRotation      ``tuple`` of ``d`` fixed-point ints
SkewProduct        ``(x, y)`` fixed-point ints
ProductPower       ``tuple`` of ``copies`` base points
=================  =========================================

Long orbit scans use numpy closed forms in ``uint64`` arithmetic, which
wraps modulo ``2**64`` exactly like the scalar code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import SpecError

FRAC_BITS = 64
ONE = 1 << FRAC_BITS
MASK = ONE - 1

#: Scan chunk length for vectorised orbit computations.
CHUNK = 1 << 16

_NAMED_CONSTANTS = {
    "golden": lambda: (math.isqrt(5 << (2 * FRAC_BITS)) - ONE) // 2,
    "sqrt2": lambda: math.isqrt(2 << (2 * FRAC_BITS)) - ONE,
}


def to_fixed(value: Any) -> int:
    """Truncate a number in ``[0, 1)`` (after reduction mod 1) to fixed point.

    Accepts ints, floats, :class:`Fraction`, and strings holding ``p/q``,
    a decimal, or one of the names ``golden`` ((sqrt 5 - 1)/2) and ``sqrt2``
    (sqrt 2 - 1).
    """
    if isinstance(value, str):
        text = value.strip()
        if text in _NAMED_CONSTANTS:
            return _NAMED_CONSTANTS[text]()
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"bad fixed-point value {value!r}") from None
    try:
        frac = Fraction(value)
    except (TypeError, ValueError):
        raise SpecError(f"bad fixed-point value {value!r}") from None
    return math.floor(frac * ONE) & MASK


def fixed_to_fraction(a: int) -> Fraction:
    return Fraction(a, ONE)


def fixed_to_float(a: int) -> float:
    return a / ONE


def format_fixed(a: int) -> str:
    """Exact reduced fraction string, e.g. ``'3/8'`` or ``'0'``."""
    return str(fixed_to_fraction(a))


def circle_gap(a: int, b: int) -> int:
    """Circular distance between two fixed-point values, in fixed point."""
    d = (a - b) & MASK
    return min(d, ONE - d)


def eps_threshold(eps: float) -> int:
    """Smallest integer ``th`` with ``gap < eps  <=>  gap < th`` for integer gaps."""
    if eps <= 0:
        raise SpecError("eps must be positive")
    scaled = Fraction(eps) * ONE
    th = math.ceil(scaled)
    return min(th, ONE)


# -------------------------------------------------------------------- systems

class SystemSpec:
    """Base class; subclasses are frozen dataclasses."""

    def validate(self, p: Any) -> Any:
        raise NotImplementedError

    def step(self, p: Any) -> Any:
        raise NotImplementedError

    def inverse(self, p: Any) -> Any:
        raise NotImplementedError

    def iterate(self, p: Any, n: int) -> Any:
        raise NotImplementedError

    def distance(self, p: Any, q: Any) -> float:
        raise NotImplementedError

    # vectorised interface: an orbit is an array of shape (len(times), ncoords)
    @property
    def ncoords(self) -> int:
        raise NotImplementedError

    @property
    def discrete(self) -> bool:
        """``True`` when coordinates are residues with the 0/1 metric."""
        raise NotImplementedError

    def flatten(self, p: Any) -> tuple[int, ...]:
        raise NotImplementedError

    def orbit_block(self, p: Any, times: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def phase_space_size(self) -> int | None:
        return None

    def spec(self) -> str:
        raise NotImplementedError

    def format_point(self, p: Any) -> Any:
        raise NotImplementedError

    def parse_point(self, raw: Any) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteRotation(SystemSpec):
    size: int
    shift: int = 1

    def __post_init__(self) -> None:
        if self.size < 1:
            raise SpecError("FiniteRotation size must be >= 1")
        object.__setattr__(self, "shift", self.shift % self.size)

    @property
    def ergodic(self) -> bool:
        return math.gcd(self.shift, self.size) == 1

    def validate(self, p: Any) -> int:
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
            raise SpecError(f"{p!r} is not a point of {self.spec()}")
        if not 0 <= p < self.size:
            raise SpecError(f"{p} is not in Z/{self.size}")
        return int(p)

    def step(self, p: int) -> int:
        return (self.validate(p) + self.shift) % self.size

    def inverse(self, p: int) -> int:
        return (self.validate(p) - self.shift) % self.size

    def iterate(self, p: int, n: int) -> int:
        return (self.validate(p) + n * self.shift) % self.size

    def distance(self, p: int, q: int) -> float:
        return 0.0 if self.validate(p) == self.validate(q) else 1.0

    ncoords = 1
    discrete = True

    def flatten(self, p: int) -> tuple[int, ...]:
        return (self.validate(p),)

    def orbit_block(self, p: int, times: np.ndarray) -> np.ndarray:
        n = (times % np.uint64(self.size)).astype(np.int64)
        return ((p + n * self.shift) % self.size).reshape(-1, 1)

    def phase_space_size(self) -> int:
        return self.size

    def points(self) -> range:
        return range(self.size)

    def spec(self) -> str:
        return f"finrot:{self.size}:{self.shift}"

    def format_point(self, p: int) -> int:
        return self.validate(p)

    def parse_point(self, raw: Any) -> int:
        if isinstance(raw, str):
            try:
                raw = int(raw.strip())
            except ValueError:
                raise SpecError(f"bad residue {raw!r}") from None
        return self.validate(raw)


def _fixed_tuple(p: Any, d: int, what: str) -> tuple[int, ...]:
    if not isinstance(p, tuple) or len(p) != d:
        raise SpecError(f"{p!r} is not a point of {what}")
    for a in p:
        if isinstance(a, bool) or not isinstance(a, int) or not 0 <= a < ONE:
            raise SpecError(f"coordinate {a!r} of {p!r} is not 64-bit fixed point")
    return p


def _parse_fixed_tuple(raw: Any, d: int) -> tuple[int, ...]:
    if isinstance(raw, str):
        raw = raw.split(",")
    if not isinstance(raw, (list, tuple)):
        raw = [raw]
    if len(raw) != d:
        raise SpecError(f"expected {d} coordinates, got {raw!r}")
    return tuple(to_fixed(v) for v in raw)


class _TorusLike(SystemSpec):
    discrete = False

    def distance(self, p: Any, q: Any) -> float:
        p, q = self.validate(p), self.validate(q)
        return max(circle_gap(a, b) for a, b in zip(p, q)) / ONE

    def flatten(self, p: Any) -> tuple[int, ...]:
        return self.validate(p)

    def format_point(self, p: Any) -> list[str]:
        return [format_fixed(a) for a in self.validate(p)]

    def parse_point(self, raw: Any) -> tuple[int, ...]:
        return _parse_fixed_tuple(raw, self.ncoords)


@dataclass(frozen=True)
class TorusRotation(_TorusLike):
    """``x -> x + alpha`` on the ``d``-torus; ``alpha`` in fixed point."""

    alpha: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.alpha:
            raise SpecError("TorusRotation needs dimension >= 1")
        object.__setattr__(self, "alpha", tuple(a & MASK for a in self.alpha))

    @property
    def dimension(self) -> int:
        return len(self.alpha)

    @property
    def ncoords(self) -> int:
        return len(self.alpha)

    def validate(self, p: Any) -> tuple[int, ...]:
        return _fixed_tuple(p, self.dimension, self.spec())

    def step(self, p):
        return tuple((a + b) & MASK for a, b in zip(self.validate(p), self.alpha))

    def inverse(self, p):
        return tuple((a - b) & MASK for a, b in zip(self.validate(p), self.alpha))

    def iterate(self, p, n: int):
        return tuple((a + n * b) & MASK for a, b in zip(self.validate(p), self.alpha))

    def orbit_block(self, p, times: np.ndarray) -> np.ndarray:
        out = np.empty((len(times), self.dimension), dtype=np.uint64)
        for j, (a, b) in enumerate(zip(self.validate(p), self.alpha)):
            out[:, j] = np.uint64(a) + times * np.uint64(b)
        return out

    def spec(self) -> str:
        return f"torus:{self.dimension}:" + ",".join(format_fixed(a) for a in self.alpha)


@dataclass(frozen=True)
class SkewProduct(_TorusLike):
    """``(x, y) -> (x + alpha, y + x)`` on the 2-torus."""

    alpha: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", self.alpha & MASK)

    ncoords = 2

    def validate(self, p: Any) -> tuple[int, int]:
        return _fixed_tuple(p, 2, self.spec())

    def step(self, p):
        x, y = self.validate(p)
        return ((x + self.alpha) & MASK, (y + x) & MASK)

    def inverse(self, p):
        x, y = self.validate(p)
        x0 = (x - self.alpha) & MASK
        return (x0, (y - x0) & MASK)

    def iterate(self, p, n: int):
        if n < 0:
            raise SpecError("iterate needs n >= 0; use inverse for backward steps")
        x, y = self.validate(p)
        return ((x + n * self.alpha) & MASK,
                (y + n * x + n * (n - 1) // 2 * self.alpha) & MASK)

    def orbit_block(self, p, times: np.ndarray) -> np.ndarray:
        x, y = self.validate(p)
        t = times.astype(np.uint64)
        one = np.uint64(1)
        # n(n-1)/2 mod 2**64 without overflowing the division
        even = (t & one) == 0
        tri = np.where(even, (t >> one) * (t - one), t * ((t - one) >> one))
        out = np.empty((len(t), 2), dtype=np.uint64)
        a = np.uint64(self.alpha)
        out[:, 0] = np.uint64(x) + t * a
        out[:, 1] = np.uint64(y) + t * np.uint64(x) + tri * a
        return out

    def spec(self) -> str:
        return f"skew:{format_fixed(self.alpha)}"


@dataclass(frozen=True)
class ProductPower(SystemSpec):
    """``copies`` coordinatewise copies of ``base``; ``copies`` a power of 2."""

    base: SystemSpec
    copies: int

    def __post_init__(self) -> None:
        if self.copies < 1 or self.copies & (self.copies - 1):
            raise SpecError("ProductPower copies must be a power of 2")

    @property
    def ncoords(self) -> int:
        return self.copies * self.base.ncoords

    @property
    def discrete(self) -> bool:
        return self.base.discrete

    def validate(self, p: Any) -> tuple:
        if not isinstance(p, tuple) or len(p) != self.copies:
            raise SpecError(f"{p!r} is not a point of {self.spec()}")
        return tuple(self.base.validate(q) for q in p)

    def step(self, p):
        return tuple(self.base.step(q) for q in self.validate(p))

    def inverse(self, p):
        return tuple(self.base.inverse(q) for q in self.validate(p))

    def iterate(self, p, n: int):
        return tuple(self.base.iterate(q, n) for q in self.validate(p))

    def distance(self, p, q) -> float:
        p, q = self.validate(p), self.validate(q)
        return max(self.base.distance(a, b) for a, b in zip(p, q))

    def flatten(self, p) -> tuple[int, ...]:
        return tuple(c for q in self.validate(p) for c in self.base.flatten(q))

    def orbit_block(self, p, times: np.ndarray) -> np.ndarray:
        return np.concatenate([self.base.orbit_block(q, times) for q in self.validate(p)],
                              axis=1)

    def phase_space_size(self) -> int | None:
        size = self.base.phase_space_size()
        return None if size is None else size ** self.copies

    def spec(self) -> str:
        return f"power:{self.base.spec()}^{self.copies}"

    def format_point(self, p):
        return [self.base.format_point(q) for q in self.validate(p)]

    def parse_point(self, raw: Any):
        if isinstance(raw, str):
            raise SpecError("ProductPower points must be given as JSON lists")
        if not isinstance(raw, (list, tuple)) or len(raw) != self.copies:
            raise SpecError(f"expected {self.copies} factor points, got {raw!r}")
        return tuple(self.base.parse_point(q) for q in raw)


def parse_system_spec(text: str) -> SystemSpec:
    """``finrot:<N>:<r>``, ``torus:<d>:<a1,...>``, ``skew:<alpha>``,
    ``power:<spec>^<copies>``."""
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if not sep:
        raise SpecError(f"unrecognised system spec {text!r}")
    try:
        if kind == "finrot":
            n, _, r = rest.partition(":")
            return FiniteRotation(int(n), int(r) if r else 1)
        if kind == "torus":
            d, _, alphas = rest.partition(":")
            alpha = tuple(to_fixed(a) for a in alphas.split(","))
            if len(alpha) != int(d):
                raise SpecError(f"torus dimension {d} but {len(alpha)} rotation numbers")
            return TorusRotation(alpha)
        if kind == "skew":
            return SkewProduct(to_fixed(rest))
        if kind == "power":
            base, caret, copies = rest.rpartition("^")
            if not caret:
                raise SpecError(f"power spec needs ^<copies>: {text!r}")
            return ProductPower(parse_system_spec(base), int(copies))
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad system spec {text!r}: {exc}") from None
    raise SpecError(f"unknown system kind {kind!r}")


# ------------------------------------------------------------ module functions

def step(system: SystemSpec, p: Any) -> Any:
    return system.step(p)


def iterate(system: SystemSpec, p: Any, n: int) -> Any:
    if n < 0:
        raise SpecError("n must be non-negative")
    return system.iterate(p, n)


def distance(system: SystemSpec, p: Any, q: Any) -> float:
    return system.distance(p, q)


def _hit_mask(system: SystemSpec, block: np.ndarray, target: np.ndarray,
              eps: float) -> np.ndarray:
    if system.discrete:
        if eps > 1:
            return np.ones(len(block), dtype=bool)
        return np.all(block == target, axis=1)
    th = np.uint64(eps_threshold(eps) - 1)
    diff = block - target
    gap = np.minimum(diff, np.uint64(0) - diff)
    # gap < ceil(eps * 2**64)  <=>  gap <= ceil(...) - 1
    return np.all(gap <= th, axis=1)


def iter_hits(system: SystemSpec, start: Any, target: Any, eps: float,
              horizon: int, first: int = 1) -> Iterator[int]:
    """Yield ``n`` in ``[first, horizon]`` with ``d(T^n start, target) < eps``."""
    if eps <= 0:
        raise SpecError("eps must be positive")
    system.validate(start)
    tgt = np.array(system.flatten(target),
                   dtype=np.int64 if system.discrete else np.uint64)
    lo = first
    while lo <= horizon:
        hi = min(horizon, lo + CHUNK - 1)
        times = np.arange(lo, hi + 1, dtype=np.uint64)
        block = system.orbit_block(start, times)
        for idx in np.flatnonzero(_hit_mask(system, block, tgt, eps)):
            yield lo + int(idx)
        lo = hi + 1


def orbit_hits(system: SystemSpec, start: Any, target: Any, eps: float,
               horizon: int) -> list[int]:
    if horizon < 1:
        raise SpecError("horizon must be >= 1")
    return list(iter_hits(system, start, target, eps, horizon))


@dataclass(frozen=True)
class OmegaVerdict:
    member: bool
    witnesses: tuple[int, ...]
    eps: float
    horizon: int
    min_hits: int

    def to_dict(self) -> dict:
        return {"member": self.member, "witnesses": list(self.witnesses),
                "eps": self.eps, "horizon": self.horizon, "min_hits": self.min_hits}


def omega_member_approx(system: SystemSpec, start: Any, target: Any, eps: float,
                        horizon: int, min_hits: int) -> OmegaVerdict:
    """Approximate test of ``target`` in the forward omega-limit set of ``start``.

    True iff at least ``min_hits`` times ``1 <= n <= horizon`` bring the orbit
    within ``eps`` of ``target``. The first ``min_hits`` such times are
    returned as witnesses; scanning stops once they are found. A ``False``
    verdict only certifies absence for this ``(eps, horizon)``.
    """
    if horizon < 1 or min_hits < 1:
        raise SpecError("horizon and min_hits must be >= 1")
    witnesses = []
    for n in iter_hits(system, start, target, eps, horizon):
        witnesses.append(n)
        if len(witnesses) == min_hits:
            break
    return OmegaVerdict(len(witnesses) >= min_hits, tuple(witnesses), eps, horizon,
                        min_hits)


def cycle_of(system: SystemSpec, p: Any) -> list:
    """The periodic orbit through ``p`` of a finite system, starting at ``p``."""
    size = system.phase_space_size()
    if size is None:
        raise SpecError(f"{system.spec()} is not a finite system")
    out = [system.validate(p)]
    q = system.step(p)
    while q != out[0]:
        out.append(q)
        q = system.step(q)
    return out

