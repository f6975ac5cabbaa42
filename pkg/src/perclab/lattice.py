"""Integer lattices and lazily evaluated bond-percolation configurations.

A lattice is Z^d with one of two translation-invariant edge rules:

* ``nearest_neighbor`` -- edges between sites at Euclidean distance 1
  (degree ``2d``);
* ``spread_out`` -- edges between every pair of sites within sup-norm
  distance ``L`` (degree ``(2L+1)^d - 1``).  The sup norm makes the
  neighborhood a box, so enumeration is a nested loop; any finite-range,
  genuinely d-dimensional rule lands in the same universality class.

A percolation configuration is never materialized.  ``edge_state`` is a pure
function of ``(seed, canonical edge)`` built on the keyed mixer in
:mod:`perclab.rng`, so a configuration on all of Z^d occupies O(1) memory,
answers repeated queries identically, and is safe to share across parallel
workers.  ``eager_box_config`` materializes a finite window as an explicit
table; it exists mostly as a test oracle for the lazy path.

Coordinates are confined to a declared working box so that packed vertex
keys used by the exploration kernels stay injective.  The default half-width
is 2^20 per axis, clamped for large d so 2d coordinates pack into 128 bits;
any exploration stepping outside raises :class:`BoxOverflowError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from . import rng

NEAREST_NEIGHBOR = "nearest_neighbor"
SPREAD_OUT = "spread_out"

DEFAULT_BOX_HALFWIDTH = 1 << 20
EAGER_EDGE_LIMIT = 10**7


class BoxOverflowError(RuntimeError):
    """A vertex left the declared working box."""


class ResourceLimitError(RuntimeError):
    """A request would exceed a declared resource guard."""


Vertex = tuple  # integer coordinate tuple of length spec.d


@lru_cache(maxsize=64)
def _sorted_offsets(d: int, edge_rule: str, L: int) -> tuple:
    if edge_rule == NEAREST_NEIGHBOR:
        offs = []
        for axis in range(d):
            for sign in (-1, 1):
                off = [0] * d
                off[axis] = sign
                offs.append(tuple(off))
    else:
        offs = [off for off in product(range(-L, L + 1), repeat=d)
                if any(c != 0 for c in off)]
    return tuple(sorted(offs))


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry oracle: dimension, edge rule, retention probability."""

    d: int
    edge_rule: str = NEAREST_NEIGHBOR
    L: int = 1
    p: float = 0.0
    box_halfwidth: int = DEFAULT_BOX_HALFWIDTH

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.edge_rule not in (NEAREST_NEIGHBOR, SPREAD_OUT):
            raise ValueError(f"unknown edge rule {self.edge_rule!r}")
        if self.edge_rule == SPREAD_OUT and self.L < 1:
            raise ValueError(f"spread-out range must be >= 1, got {self.L}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"retention probability must be in [0,1], got {self.p}")
        if self.box_halfwidth < 1:
            raise ValueError("box_halfwidth must be positive")

    @property
    def degree(self) -> int:
        if self.edge_rule == NEAREST_NEIGHBOR:
            return 2 * self.d
        return (2 * self.L + 1) ** self.d - 1

    @property
    def range_(self) -> int:
        """Maximal per-axis displacement of an edge."""
        return 1 if self.edge_rule == NEAREST_NEIGHBOR else self.L

    def offsets(self) -> tuple:
        """Neighbor offsets in fixed lexicographic order."""
        return _sorted_offsets(self.d, self.edge_rule,
                               self.L if self.edge_rule == SPREAD_OUT else 1)

    def offsets_array(self) -> np.ndarray:
        return np.array(self.offsets(), dtype=np.int64)

    @property
    def effective_halfwidth(self) -> int:
        """Working-box half-width, clamped so a vertex key packs into two
        64-bit limbs ((d+1)//2 axes per limb); mirrors the kernel packing."""
        axes_per_limb = (self.d + 1) // 2
        bits_per_axis = 62 // axes_per_limb
        limit = (1 << (bits_per_axis - 1)) - 1
        return min(self.box_halfwidth, limit)

    def in_box(self, v: Vertex) -> bool:
        hw = self.effective_halfwidth
        return all(-hw <= c <= hw for c in v)

    def with_p(self, p: float) -> "LatticeSpec":
        return LatticeSpec(self.d, self.edge_rule, self.L, p, self.box_halfwidth)


def neighbors(spec: LatticeSpec, v: Vertex) -> list:
    """All lattice neighbors of ``v`` under the spec's edge rule."""
    if len(v) != spec.d:
        raise ValueError(f"vertex has {len(v)} coordinates, lattice has d={spec.d}")
    return [tuple(c + o for c, o in zip(v, off)) for off in spec.offsets()]


def is_lattice_edge(spec: LatticeSpec, u: Vertex, v: Vertex) -> bool:
    if len(u) != spec.d or len(v) != spec.d:
        return False
    diff = [a - b for a, b in zip(u, v)]
    if all(c == 0 for c in diff):
        return False
    if spec.edge_rule == NEAREST_NEIGHBOR:
        return sum(abs(c) for c in diff) == 1
    return max(abs(c) for c in diff) <= spec.L


def canonical_edge(u: Vertex, v: Vertex) -> tuple:
    """Unordered edge in canonical form: lexicographically smaller endpoint first."""
    return (u, v) if u <= v else (v, u)


def edge_uniform(seed: int, u: Vertex, v: Vertex) -> float:
    """Uniform variate in [0,1) attached to the canonical edge under ``seed``."""
    a, b = canonical_edge(u, v)
    words = [c + rng.COORD_OFFSET for c in a] + [c + rng.COORD_OFFSET for c in b]
    return rng.uniform_from_state(rng.hash_words(seed ^ rng.EDGE_DOMAIN, words))


@dataclass(frozen=True)
class PercolationConfig:
    """A full percolation configuration, realized lazily from a 64-bit seed."""

    spec: LatticeSpec
    seed: int

    def edge_state(self, u: Vertex, v: Vertex) -> bool:
        """True iff the edge {u, v} is open.  Pure in (seed, canonical edge)."""
        if not is_lattice_edge(self.spec, u, v):
            raise ValueError(f"{u}-{v} is not an edge of this lattice")
        return edge_uniform(self.seed, u, v) < self.spec.p

    def open_neighbors(self, v: Vertex) -> list:
        return [w for w in neighbors(self.spec, v) if self.edge_state(v, w)]


def eager_box_config(cfg: PercolationConfig, box_radius: int) -> dict:
    """Materialize every edge inside ``[-box_radius, box_radius]^d`` as a table.

    Returns ``{canonical_edge: bool}`` agreeing with ``cfg.edge_state`` on
    every entry (consistency by construction: both sides call the same keyed
    function).  Guarded at ``EAGER_EDGE_LIMIT`` edges.
    """
    spec = cfg.spec
    sites = (2 * box_radius + 1) ** spec.d
    est_edges = sites * spec.degree // 2
    if est_edges > EAGER_EDGE_LIMIT:
        raise ResourceLimitError(
            f"box with ~{est_edges} edges exceeds the {EAGER_EDGE_LIMIT} edge guard")
    zero = tuple([0] * spec.d)
    forward = [off for off in spec.offsets() if off > zero]
    table = {}
    rng_span = range(-box_radius, box_radius + 1)
    for v in product(rng_span, repeat=spec.d):
        for off in forward:
            w = tuple(c + o for c, o in zip(v, off))
            if all(-box_radius <= c <= box_radius for c in w):
                table[canonical_edge(v, w)] = cfg.edge_state(v, w)
    return table
