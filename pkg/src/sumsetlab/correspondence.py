"""Finite-radius version of the Furstenberg correspondence.

A set ``A`` of non-negative integers becomes the 0/1 sequence ``a`` with
``a(n) = 1`` iff ``n in A`` (and ``a(n) = 0`` for ``n < 0``). Under the left
shift ``(Tx)(n) = x(n + 1)`` and the cylinder ``E = {x : x(0) = 1}`` one has
``A = {n : T^n a in E}``.

Only the bits on ``[-W, W]`` are stored. Shifting by ``n`` shrinks the
known radius by ``|n|``, so reading outside the stored window is always an
explicit :class:`WindowOverflowError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import SpecError, WindowOverflowError
from .setspec import BitsetSet, IntegerSet


@dataclass(frozen=True)
class SymbolicPoint:
    """Bits of a point of ``{0,1}^Z`` on ``[-radius, radius]``.

    ``bits`` is an int whose bit ``j`` holds the coordinate ``origin + j``.
    """

    radius: int
    bits: int

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise SpecError("radius must be >= 0")
        if self.bits < 0 or self.bits.bit_length() > self.length:
            raise SpecError("bits do not fit in the window")

    @property
    def origin(self) -> int:
        return -self.radius

    @property
    def length(self) -> int:
        return 2 * self.radius + 1

    def _check(self, lo: int, hi: int) -> None:
        if lo < -self.radius or hi > self.radius + 1:
            raise WindowOverflowError(
                f"[{lo}, {hi}) is outside the known window "
                f"[{-self.radius}, {self.radius}]")

    def __getitem__(self, n: int) -> int:
        self._check(n, n + 1)
        return (self.bits >> (n + self.radius)) & 1

    def window_bits(self, lo: int, hi: int) -> int:
        """Coordinates ``lo..hi-1`` as a bitmask (bit ``j`` is ``lo + j``)."""
        self._check(lo, hi)
        return (self.bits >> (lo + self.radius)) & ((1 << (hi - lo)) - 1)

    def to_string(self) -> str:
        digits = "".join(str(self[n]) for n in range(-self.radius, self.radius + 1))
        return f"bits:{digits}@origin={self.origin}"

    @classmethod
    def from_string(cls, text: str) -> SymbolicPoint:
        kind, _, rest = text.strip().partition(":")
        digits, at, origin = rest.partition("@origin=")
        if kind != "bits" or not at or not digits or set(digits) - {"0", "1"}:
            raise SpecError(f"bad bit-string {text!r}")
        if len(digits) % 2 == 0:
            raise SpecError("bit-string length must be odd (2W+1)")
        radius = len(digits) // 2
        try:
            if int(origin) != -radius:
                raise SpecError(f"origin must be {-radius} for {len(digits)} bits")
        except ValueError:
            raise SpecError(f"bad origin {origin!r}") from None
        bits = 0
        for j, ch in enumerate(digits):
            if ch == "1":
                bits |= 1 << j
        return cls(radius, bits)


@dataclass(frozen=True)
class CylinderSet:
    """``{x : x(coordinate) = bit}``."""

    coordinate: int = 0
    bit: int = 1

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise SpecError("cylinder bit must be 0 or 1")

    def contains(self, point: SymbolicPoint) -> bool:
        return point[self.coordinate] == self.bit

    def to_dict(self) -> dict:
        return {"coordinate": self.coordinate, "bit": self.bit}


def build_correspondence(set_: IntegerSet, radius: int) -> tuple[SymbolicPoint, CylinderSet]:
    if radius < 1:
        raise SpecError("radius must be >= 1")
    members = set_.mask(0, radius + 1)  # raises on window overflow
    return SymbolicPoint(radius, members << radius), CylinderSet(0, 1)


def shift(point: SymbolicPoint, n: int) -> SymbolicPoint:
    """``T^n point`` on the window ``[-(W - |n|), W - |n|]``."""
    new_radius = point.radius - abs(n)
    if new_radius < 0:
        raise WindowOverflowError(
            f"cannot shift a radius-{point.radius} point by {n}")
    # (T^n a)(m) = a(m + n) for |m| <= new_radius
    return SymbolicPoint(new_radius, point.window_bits(n - new_radius, n + new_radius + 1))


def _hits(point: SymbolicPoint, lo: int, hi: int, cylinder: CylinderSet) -> int:
    """Bitmask over ``[lo, hi)`` of the times ``n`` with ``T^n a in E``."""
    raw = point.window_bits(lo + cylinder.coordinate, hi + cylinder.coordinate)
    return raw if cylinder.bit else ~raw & ((1 << (hi - lo)) - 1)


def empirical_frequency(point: SymbolicPoint, window: tuple[int, int],
                        cylinder: CylinderSet) -> Fraction:
    lo, hi = window
    if hi <= lo:
        raise SpecError(f"empty window [{lo}, {hi})")
    return Fraction(_hits(point, lo, hi, cylinder).bit_count(), hi - lo)


def reconstruct(point: SymbolicPoint, cylinder: CylinderSet,
                window: tuple[int, int]) -> BitsetSet:
    """``{n in [lo, hi) : T^n a in E}`` as a bitset on ``[0, hi)``."""
    lo, hi = window
    if lo < 0 or hi <= lo:
        raise SpecError(f"window [{lo}, {hi}) must be a non-empty subset of N")
    return BitsetSet(hi, _hits(point, lo, hi, cylinder) << lo)


def export_json(point: SymbolicPoint, cylinder: CylinderSet,
                windows: list[tuple[int, int]]) -> str:
    return json.dumps({
        "schema_version": 1,
        "point": point.to_string(),
        "radius": point.radius,
        "cylinder": cylinder.to_dict(),
        "frequencies": [
            {"window": [lo, hi], "frequency": str(empirical_frequency(point, (lo, hi), cylinder))}
            for lo, hi in windows
        ],
    })
