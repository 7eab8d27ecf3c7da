"""Exact measure calculus on finite rotations, plus Birkhoff averages.

Everything on ``Z/N`` is done with :class:`fractions.Fraction` weights, so
the identities between cubic measures, their ergodic decompositions and the
first-coordinate kernels are checked by equality, never by tolerance.
Points of ``X^[k]`` are tuples of ``2**k`` residues in lexicographic cube
order; the product of two measures concatenates their points, which puts
the left factor on the lower face ``eps_1 = 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .cube import CubeConfig, permute_entries, qk_membership_rotation
from .dynsys import (CHUNK, ONE, FiniteRotation, ProductPower, SkewProduct,
                     SystemSpec, cycle_of, to_fixed)
from .errors import BoundExceededError, SpecError

#: Default guard on phase-space and support sizes.
DEFAULT_MAX_SIZE = 10**6


def _as_tuple(p: Any) -> tuple:
    return p if isinstance(p, tuple) else (p,)


class DiscreteMeasure:
    """Finitely supported probability measure with exact rational weights.

    Atoms are kept sorted by point, so two measures are equal exactly when
    their canonical atom lists agree.
    """

    __slots__ = ("_atoms", "_index")

    def __init__(self, weights: Mapping[Hashable, Any] | Iterable[tuple[Hashable, Any]]):
        items = weights.items() if isinstance(weights, Mapping) else weights
        merged: dict = {}
        for point, w in items:
            w = Fraction(w)
            if w < 0:
                raise SpecError(f"negative weight {w} at {point!r}")
            merged[point] = merged.get(point, 0) + w
        atoms = tuple(sorted((p, w) for p, w in merged.items() if w != 0))
        if not atoms:
            raise SpecError("a probability measure needs at least one atom")
        total = sum(w for _, w in atoms)
        if total != 1:
            raise SpecError(f"weights sum to {total}, not 1")
        self._atoms = atoms
        self._index = dict(atoms)

    @classmethod
    def uniform(cls, points: Iterable[Hashable]) -> DiscreteMeasure:
        points = set(points)
        w = Fraction(1, len(points)) if points else 0
        return cls((p, w) for p in points)

    @classmethod
    def dirac(cls, point: Hashable) -> DiscreteMeasure:
        return cls({point: 1})

    @classmethod
    def mix(cls, pairs: Iterable[tuple[Any, DiscreteMeasure]]) -> DiscreteMeasure:
        """``sum_i w_i nu_i`` for weights summing to 1."""
        acc: dict = {}
        for w, nu in pairs:
            w = Fraction(w)
            for p, v in nu._atoms:
                acc[p] = acc.get(p, 0) + w * v
        return cls(acc)

    @property
    def atoms(self) -> tuple[tuple[Hashable, Fraction], ...]:
        return self._atoms

    @property
    def support(self) -> tuple:
        return tuple(p for p, _ in self._atoms)

    def weight(self, point: Hashable) -> Fraction:
        return self._index.get(point, Fraction(0))

    def __len__(self) -> int:
        return len(self._atoms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self) -> int:
        return hash(self._atoms)

    def __repr__(self) -> str:
        head = ", ".join(f"{p!r}: {w}" for p, w in self._atoms[:4])
        more = ", ..." if len(self._atoms) > 4 else ""
        return f"DiscreteMeasure({{{head}{more}}})"

    def pushforward(self, f: Callable[[Any], Hashable]) -> DiscreteMeasure:
        return DiscreteMeasure((f(p), w) for p, w in self._atoms)

    def product(self, other: DiscreteMeasure) -> DiscreteMeasure:
        return DiscreteMeasure((_as_tuple(p) + _as_tuple(q), v * w)
                               for p, v in self._atoms for q, w in other._atoms)

    __mul__ = product

    def marginal(self, index: int) -> DiscreteMeasure:
        return self.pushforward(lambda p: p[index])

    def integrate(self, f: Callable[[Any], Any]) -> Fraction:
        return sum((w * Fraction(f(p)) for p, w in self._atoms), Fraction(0))

    def to_dict(self, format_point: Callable[[Any], Any] = lambda p: p) -> dict:
        return {"schema_version": 1,
                "atoms": [{"point": format_point(p), "weight": str(w)} for p, w in self._atoms]}

    @classmethod
    def from_dict(cls, doc: Mapping) -> DiscreteMeasure:
        def point(raw):
            return tuple(point(r) for r in raw) if isinstance(raw, list) else raw
        try:
            return cls((point(a["point"]), Fraction(a["weight"])) for a in doc["atoms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed measure JSON: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class MeasureKernel:
    """A total map ``point -> DiscreteMeasure`` on a described domain."""

    domain: str
    fn: Callable[[Any], DiscreteMeasure] = field(repr=False)

    def __call__(self, x: Any) -> DiscreteMeasure:
        return self.fn(x)

    def mix(self, measure: DiscreteMeasure) -> DiscreteMeasure:
        """``integral K(x) d measure(x)``."""
        return DiscreteMeasure.mix((w, self(x)) for x, w in measure.atoms)

    def is_invariant(self, points: Iterable[Any], transform: Callable[[Any], Any]) -> bool:
        """``K(transform(x)) == K(x)`` for every given point."""
        return all(self(transform(x)) == self(x) for x in points)


def _require_ergodic(system: SystemSpec) -> FiniteRotation:
    if not isinstance(system, FiniteRotation):
        raise SpecError(f"exact measures need a finite rotation, got {system.spec()}")
    if not system.ergodic:
        raise SpecError(f"{system.spec()} is not ergodic (gcd(step, N) != 1)")
    return system


def ergodic_decomposition_finite(system: SystemSpec,
                                 max_size: int = DEFAULT_MAX_SIZE) -> MeasureKernel:
    """Component of ``x`` = uniform measure on the periodic orbit through ``x``."""
    size = system.phase_space_size()
    if size is None or not isinstance(
            system.base if isinstance(system, ProductPower) else system, FiniteRotation):
        raise SpecError(f"{system.spec()} is not a finite rotation or power of one")
    if size > max_size:
        raise BoundExceededError(f"phase space of {system.spec()} has {size} points "
                                 f"(limit {max_size})")

    @lru_cache(maxsize=None)
    def component(x):
        return DiscreteMeasure.uniform(cycle_of(system, x))

    return MeasureKernel(f"ergodic decomposition of {system.spec()}",
                         lambda x: component(system.validate(x)))


def uniform_measure(system: FiniteRotation) -> DiscreteMeasure:
    return DiscreteMeasure.uniform(range(system.size))


def _check_support(system: FiniteRotation, k: int, max_atoms: int) -> None:
    if k < 1:
        raise SpecError("cube dimension k must be >= 1")
    predicted = system.size ** (k + 1)
    if predicted > max_atoms:
        raise BoundExceededError(f"cubic measure support {predicted} exceeds {max_atoms}")


def _cube_kernel(system: FiniteRotation, j: int, max_atoms: int) -> MeasureKernel:
    return ergodic_decomposition_finite(ProductPower(system, 2 ** j), max_atoms)


def cubic_measure(system: SystemSpec, k: int,
                  max_atoms: int = DEFAULT_MAX_SIZE) -> DiscreteMeasure:
    """Relative-square recursion ``mu[j+1] = int (mu[j])_x x (mu[j])_x d mu[j](x)``."""
    system = _require_ergodic(system)
    _check_support(system, k, max_atoms)
    mu = uniform_measure(system).pushforward(_as_tuple)
    for j in range(k):
        kernel = _cube_kernel(system, j, max_atoms)
        mu = DiscreteMeasure.mix((w, kernel(x) * kernel(x)) for x, w in mu.atoms)
    return mu


def cubic_measure_alt(system: SystemSpec, k: int,
                      max_atoms: int = DEFAULT_MAX_SIZE) -> DiscreteMeasure:
    """Same measure via ``mu[j+1] = int delta_x x (mu[j])_x d mu[j](x)``."""
    system = _require_ergodic(system)
    _check_support(system, k, max_atoms)
    mu = uniform_measure(system).pushforward(_as_tuple)
    for j in range(k):
        kernel = _cube_kernel(system, j, max_atoms)
        mu = DiscreteMeasure.mix((w, DiscreteMeasure.dirac(x) * kernel(x))
                                 for x, w in mu.atoms)
    return mu


def pushforward_permutation(measure: DiscreteMeasure, phi: Sequence[int]) -> DiscreteMeasure:
    return measure.pushforward(lambda x: permute_entries(phi, x))


def cube_map(system: FiniteRotation) -> Callable[[tuple], tuple]:
    """``T^[k]``: apply the rotation to every entry."""
    return lambda x: tuple(system.step(p) for p in x)


# ------------------------------------------------- continuous decompositions

def lambda1(system: SystemSpec, x0: int, x1: int) -> DiscreteMeasure:
    """``int_Z eta_{z + pi(x0)} x eta_{z + pi(x1)} dm(z)``.

    An ergodic ``Z/N`` rotation is its own Kronecker factor, so ``pi`` is the
    identity and each ``eta_z`` is the point mass at ``z``.
    """
    system = _require_ergodic(system)
    x0, x1 = system.validate(x0), system.validate(x1)
    n = system.size
    haar = Fraction(1, n)
    eta = DiscreteMeasure.dirac
    return DiscreteMeasure.mix((haar, eta((z + x0) % n) * eta((z + x1) % n))
                               for z in range(n))


def lambda_k_finite(system: SystemSpec, x: Sequence[int], k: int) -> DiscreteMeasure:
    """Ergodic component of a cube point: uniform on ``{(x_eps + t) : t}``."""
    system = _require_ergodic(system)
    x = tuple(x)
    if len(x) != 2 ** k:
        raise SpecError(f"expected {2 ** k} entries for k={k}, got {len(x)}")
    if not qk_membership_rotation(CubeConfig(system, x)):
        raise SpecError(f"{x} is not in the cube set of {system.spec()}")
    n = system.size
    return DiscreteMeasure.uniform(tuple((p + t) % n for p in x) for t in range(n))


def lambda_kernel(system: SystemSpec, k: int) -> MeasureKernel:
    cache: dict = {}

    def fn(x):
        x = tuple(x)
        if x not in cache:
            cache[x] = lambda_k_finite(system, x, k)
        return cache[x]

    return MeasureKernel(f"lambda^[{k}] on {system.spec()}", fn)


def sigma_k(system: SystemSpec, t: int, k: int) -> DiscreteMeasure:
    """Disintegration of the cubic measure over the first coordinate.

    ``sigma[1]_t = delta_t x mu`` and
    ``sigma[j+1]_t = int delta_x x lambda[j]_x d sigma[j]_t(x)``.
    """
    system = _require_ergodic(system)
    t = system.validate(t)
    if not 1 <= k <= 3:
        raise SpecError("sigma_k supports k in 1..3")
    sigma = DiscreteMeasure.dirac(t) * uniform_measure(system)
    for j in range(1, k):
        lam = lambda_kernel(system, j)
        sigma = DiscreteMeasure.mix((w, DiscreteMeasure.dirac(x) * lam(x))
                                    for x, w in sigma.atoms)
    return sigma


def sigma_kernel(system: SystemSpec, k: int) -> MeasureKernel:
    return MeasureKernel(f"sigma^[{k}] on {system.spec()}", lambda t: sigma_k(system, t, k))


# --------------------------------------------------------- Birkhoff averages

@dataclass(frozen=True)
class BoxObservable:
    """Weighted sum of indicators of axis-aligned boxes.

    Each box is a tuple of half-open ``(lo, hi)`` ranges, one per flattened
    coordinate, in raw units: residues for finite systems, 64-bit fixed point
    for torus coordinates (``hi`` may equal ``2**64``).
    """

    terms: tuple[tuple[float, tuple[tuple[int, int], ...]], ...]

    @classmethod
    def box(cls, system: SystemSpec, ranges: Sequence[tuple[Any, Any]],
            weight: float = 1.0) -> BoxObservable:
        return cls(((weight, _box_units(system, ranges)),))

    def __add__(self, other: BoxObservable) -> BoxObservable:
        return BoxObservable(self.terms + other.terms)


def _box_units(system: SystemSpec, ranges: Sequence[tuple[Any, Any]]) -> tuple:
    n = system.ncoords
    if len(ranges) > n:
        raise SpecError(f"box has {len(ranges)} ranges but the system has {n} coordinates")
    out = []
    for j in range(n):
        if system.discrete:
            size = _discrete_size(system)
            lo, hi = ranges[j] if j < len(ranges) else (0, size)
            lo, hi = int(lo), int(hi)
            if not 0 <= lo <= hi <= size:
                raise SpecError(f"bad residue range [{lo}, {hi})")
        else:
            lo, hi = ranges[j] if j < len(ranges) else (0, 1)
            lo_f, hi_f = Fraction(str(lo)), Fraction(str(hi))
            if not 0 <= lo_f <= hi_f <= 1:
                raise SpecError(f"bad torus range [{lo}, {hi})")
            lo, hi = to_fixed(lo_f), ONE if hi_f == 1 else to_fixed(hi_f)
        out.append((lo, hi))
    return tuple(out)


def _discrete_size(system: SystemSpec) -> int:
    base = system.base if isinstance(system, ProductPower) else system
    return base.size


@dataclass(frozen=True)
class BirkhoffResult:
    value: float
    n: int
    trace: tuple[tuple[int, float], ...]

    def to_csv(self) -> str:
        return "n,average\n" + "".join(f"{n},{v!r}\n" for n, v in self.trace)


def birkhoff_average(system: SystemSpec, start: Any, observable: BoxObservable,
                     n: int, trace_every: int | None = None) -> BirkhoffResult:
    """``(1/n) sum_{i=1..n} f(T^i start)``, accumulated sequentially in doubles."""
    if n < 1:
        raise SpecError("iteration count must be >= 1")
    system.validate(start)
    for _, box in observable.terms:
        if len(box) != system.ncoords:
            raise SpecError("observable does not match the system's coordinates")
    trace_every = trace_every or n
    total = 0.0
    trace = []
    lo = 1
    while lo <= n:
        hi = min(n, lo + CHUNK - 1)
        times = np.arange(lo, hi + 1, dtype=np.uint64)
        block = system.orbit_block(start, times)
        values = np.zeros(len(times), dtype=np.float64)
        for weight, box in observable.terms:
            inside = np.ones(len(times), dtype=bool)
            for j, (a, b) in enumerate(box):
                col = block[:, j]
                if system.discrete:
                    inside &= (col >= a) & (col < b)
                elif b == ONE:
                    inside &= col >= np.uint64(a)
                else:
                    inside &= (col >= np.uint64(a)) & (col < np.uint64(b))
            values += weight * inside
        partial = np.cumsum(values) + total
        first = -(-lo // trace_every) * trace_every
        for m in range(first, hi + 1, trace_every):
            trace.append((m, float(partial[m - lo]) / m))
        total = float(partial[-1])
        lo = hi + 1
    if not trace or trace[-1][0] != n:
        trace.append((n, total / n))
    return BirkhoffResult(total / n, n, tuple(trace))


def _arc_overlap(a: int, la: int, b: int, lb: int) -> int:
    return sum(max(0, min(a + la, b + lb + s * ONE) - max(a, b + s * ONE))
               for s in (-1, 0, 1))


def skew_lambda1_box_integral(system: SkewProduct, p: tuple[int, int], q: tuple[int, int],
                              box_p: Sequence[tuple[int, int]],
                              box_q: Sequence[tuple[int, int]]) -> Fraction:
    """``int 1_{box_p} (x) 1_{box_q} d lambda[1]_{(p, q)}`` for the skew product.

    Its Kronecker factor is the circle rotation via ``(x, y) -> x``, with
    fibre measures ``eta_z = delta_z x Lebesgue``. Boxes are in fixed point.
    """
    if not isinstance(system, SkewProduct):
        raise SpecError("skew_lambda1_box_integral needs a skew product")
    p, q = system.validate(p), system.validate(q)
    (ip, jp), (iq, jq) = box_p, box_q
    fibre = Fraction(jp[1] - jp[0], ONE) * Fraction(jq[1] - jq[0], ONE)
    # z ranges over {z : z + p_x in I_p} ∩ {z : z + q_x in I_q}
    overlap = _arc_overlap((ip[0] - p[0]) % ONE, ip[1] - ip[0],
                           (iq[0] - q[0]) % ONE, iq[1] - iq[0])
    return fibre * Fraction(overlap, ONE)
