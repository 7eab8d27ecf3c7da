"""Cube calculus on ``{0,1}^k`` and Erdős / dynamical cube tests.

Entries of a cube configuration are always stored in lexicographic order of
their index ``eps = eps_1 ... eps_k``, so the entry for ``eps`` sits at
position ``sum(eps_i * 2**(k - i))``. ``eps_1`` is the most significant bit.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .dynsys import (FiniteRotation, MASK, ONE, OmegaVerdict, ProductPower,
                     SkewProduct, SystemSpec, TorusRotation, circle_gap,
                     omega_member_approx, parse_system_spec)
from .errors import SpecError


def indices(k: int) -> list[tuple[int, ...]]:
    """All of ``{0,1}^k`` in lexicographic order."""
    return list(itertools.product((0, 1), repeat=k))


def rank(eps: Sequence[int]) -> int:
    r = 0
    for bit in eps:
        r = 2 * r + bit
    return r


def complement(eps: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - e for e in eps)


def dimension_of(n_entries: int) -> int:
    k = n_entries.bit_length() - 1
    if n_entries < 1 or 1 << k != n_entries:
        raise SpecError(f"{n_entries} entries is not a power of 2")
    return k


def _face(entries: Sequence, i: int, bit: int) -> tuple:
    k = dimension_of(len(entries))
    if not 1 <= i <= k:
        raise SpecError(f"axis {i} out of range [1, {k}]")
    return tuple(entries[rank(e)] for e in indices(k) if e[i - 1] == bit)


def check_permutation(phi: Sequence[int], k: int) -> tuple[int, ...]:
    phi = tuple(phi)
    if sorted(phi) != list(range(1, k + 1)):
        raise SpecError(f"{phi} is not a permutation of 1..{k}")
    return phi


def permute_entries(phi: Sequence[int], entries: Sequence) -> tuple:
    """``(phi x)_eps = x_{phi(eps)}`` with ``(phi eps)_i = eps_{phi(i)}``."""
    k = dimension_of(len(entries))
    phi = check_permutation(phi, k)
    return tuple(entries[rank(tuple(e[phi[i] - 1] for i in range(k)))]
                 for e in indices(k))


def transposition(i: int, k: int) -> tuple[int, ...]:
    """The permutation exchanging 1 and ``i``."""
    phi = list(range(1, k + 1))
    phi[0], phi[i - 1] = phi[i - 1], phi[0]
    return tuple(phi)


@dataclass(frozen=True)
class CubeConfig:
    system: SystemSpec
    entries: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.system.validate(p)
                                                  for p in self.entries))
        dimension_of(len(self.entries))

    @property
    def k(self) -> int:
        return dimension_of(len(self.entries))

    def __getitem__(self, eps: Sequence[int]):
        return self.entries[rank(eps)]

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "system": self.system.spec(),
                           "entries": [self.system.format_point(p) for p in self.entries]})

    @classmethod
    def from_json(cls, text: str, system: SystemSpec | None = None) -> CubeConfig:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed cube JSON: {exc}") from None
        if not isinstance(doc, dict) or "entries" not in doc:
            raise SpecError("cube JSON needs an 'entries' array")
        if system is None:
            if "system" not in doc:
                raise SpecError("cube JSON needs a 'system' field")
            system = parse_system_spec(doc["system"])
        elif "system" in doc and parse_system_spec(doc["system"]) != system:
            raise SpecError(f"cube JSON system {doc['system']!r} does not match "
                            f"{system.spec()!r}")
        entries = doc["entries"]
        if not isinstance(entries, list):
            raise SpecError("'entries' must be a list")
        cube = cls(system, tuple(system.parse_point(p) for p in entries))
        if "k" in doc and doc["k"] != cube.k:
            raise SpecError(f"k={doc['k']} but {len(entries)} entries")
        return cube


def lower_face(x: CubeConfig, i: int) -> CubeConfig:
    return CubeConfig(x.system, _face(x.entries, i, 0))


def upper_face(x: CubeConfig, i: int) -> CubeConfig:
    return CubeConfig(x.system, _face(x.entries, i, 1))


def forget_first(x: CubeConfig) -> tuple:
    if x.k < 1:
        raise SpecError("forget_first needs k >= 1")
    return x.entries[1:]


def digit_permutation(phi: Sequence[int], x: CubeConfig) -> CubeConfig:
    return CubeConfig(x.system, permute_entries(phi, x.entries))


# ------------------------------------------------------------- Erdős cubes

@dataclass(frozen=True)
class ErdosVerdict:
    is_erdos: bool
    axes: tuple[OmegaVerdict, ...]
    eps: float
    horizon: int
    min_hits: int

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "erdos": self.is_erdos,
            "eps": self.eps, "horizon": self.horizon, "min_hits": self.min_hits,
            "axes": [{"axis": i + 1, "passed": v.member, "witnesses": list(v.witnesses)}
                     for i, v in enumerate(self.axes)],
        }


def face_system(x: CubeConfig) -> ProductPower:
    return ProductPower(x.system, 2 ** (x.k - 1))


def verify_axis(x: CubeConfig, i: int, eps: float, horizon: int,
                min_hits: int) -> OmegaVerdict:
    """Approximate test of ``F^i x`` in the omega-limit set of ``F_i x``."""
    return omega_member_approx(face_system(x), _face(x.entries, i, 0),
                               _face(x.entries, i, 1), eps, horizon, min_hits)


def verify_erdos_cube(x: CubeConfig, eps: float, horizon: int,
                      min_hits: int) -> ErdosVerdict:
    if x.k < 1:
        raise SpecError("an Erdős cube needs k >= 1")
    axes = tuple(verify_axis(x, i, eps, horizon, min_hits) for i in range(1, x.k + 1))
    return ErdosVerdict(all(v.member for v in axes), axes, eps, horizon, min_hits)


# -------------------------------------------------------- dynamical cubes

def _fixed_tol(tol: float) -> int:
    if tol < 0:
        raise SpecError("tol must be >= 0")
    return min(math.floor(Fraction(tol) * ONE), ONE)


def q2_membership_skew(x: CubeConfig, tol: float) -> bool:
    """Dynamical 2-cube test for the skew product: ``x1 + x4 = x2 + x3``
    on first coordinates, up to ``tol`` in the circle metric."""
    if not isinstance(x.system, SkewProduct) or x.k != 2:
        raise SpecError("q2_membership_skew needs a 2-cube over a skew product")
    (x1, _), (x2, _), (x3, _), (x4, _) = x.entries
    return circle_gap((x1 + x4) & MASK, (x2 + x3) & MASK) <= _fixed_tol(tol)


def _two_faces(k: int) -> list[tuple[int, int, int, int]]:
    """Ranks ``(r00, r01, r10, r11)`` of every 2-dimensional sub-face."""
    out = []
    for i, j in itertools.combinations(range(k), 2):
        others = [a for a in range(k) if a not in (i, j)]
        for fixed in itertools.product((0, 1), repeat=len(others)):
            corners = []
            for bi, bj in ((0, 0), (0, 1), (1, 0), (1, 1)):
                eps = [0] * k
                for a, b in zip(others, fixed):
                    eps[a] = b
                eps[i], eps[j] = bi, bj
                corners.append(rank(eps))
            out.append(tuple(corners))
    return out


#: A fixed-point rotation number is treated as minimal when its orbit
#: spacing 2**(v2(a) - 64) is at most 2**-MIN_PRECISION_BITS.
MIN_PRECISION_BITS = 32


def _torus_minimal(alpha: Sequence[int]) -> bool:
    # Orbit closure of a fixed-point rotation is the subgroup generated by a;
    # independence between coordinates cannot be decided at finite precision.
    for a in alpha:
        if a == 0 or (a & -a).bit_length() - 1 > 64 - MIN_PRECISION_BITS:
            return False
    return True


def qk_membership_rotation(x: CubeConfig, tol: float = 0.0) -> bool:
    """Dynamical cube test for a minimal rotation, ``k`` in 1..3.

    Every 2-dimensional sub-face must be a parallelogram:
    ``x00 - x01 - x10 + x11 = 0`` (mod ``N``, or within ``tol`` on the torus).
    """
    system = x.system
    if not 1 <= x.k <= 3:
        raise SpecError(f"qk_membership_rotation supports k in 1..3, got {x.k}")
    if isinstance(system, FiniteRotation):
        if not system.ergodic:
            raise SpecError(f"{system.spec()} is not minimal")
        n = system.size
        return all((x.entries[a] - x.entries[b] - x.entries[c] + x.entries[d]) % n == 0
                   for a, b, c, d in _two_faces(x.k))
    if isinstance(system, TorusRotation):
        if not _torus_minimal(system.alpha):
            raise SpecError(f"{system.spec()} is not minimal at fixed-point precision")
        th = _fixed_tol(tol)
        for a, b, c, d in _two_faces(x.k):
            for coord in range(system.dimension):
                s = (x.entries[a][coord] - x.entries[b][coord]
                     - x.entries[c][coord] + x.entries[d][coord]) & MASK
                if circle_gap(s, 0) > th:
                    return False
        return True
    raise SpecError(f"no dynamical-cube criterion for {system.spec()}")


def classify_cube(x: CubeConfig, eps: float, horizon: int, min_hits: int,
                  tol: float = 0.0) -> dict[str, Any]:
    """Erdős, dynamical and nil-cube verdicts, ``None`` where not computable.

    Rotations and the skew product are their own pronilfactors at the levels
    supported here, so the nil-cube verdict coincides with the dynamical one.
    """
    erdos = verify_erdos_cube(x, eps, horizon, min_hits)
    if isinstance(x.system, SkewProduct) and x.k == 2:
        q = q2_membership_skew(x, tol)
    elif isinstance(x.system, (FiniteRotation, TorusRotation)) and x.k <= 3:
        q = qk_membership_rotation(x, tol)
    else:
        q = None
    return {"erdos": erdos.is_erdos, "dynamical": q, "nil": q,
            "verdict": erdos.to_dict()}


def diagonal_cube(system: SystemSpec, point: Any, steps: Sequence[int]) -> CubeConfig:
    """``(T^{eps . n} x : eps)`` for ``n = steps``."""
    k = len(steps)
    return CubeConfig(system, tuple(system.iterate(point, sum(e * n for e, n in zip(eps, steps)))
                                    for eps in indices(k)))

