"""Exact algebra on axis-aligned octagons.

An octagon is the planar region

    {(x, y) | xlo <= x <= xhi,  ylo <= y <= yhi,
              ulo <= y - x <= uhi,  vlo <= x + y <= vhi}

cut by axis bounds plus two 45-degree bands: the u-band constrains the
difference ``y - x`` and the v-band the sum ``x + y``.  Bounds are exact
extended rationals (see :mod:`octembed.bounds`); boundaries are closed.
Degenerate octagons (hexagons, boxes, segments, points) are first-class.

All values are immutable and every operation is a pure function, so octagons
can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bounds import (
    INF,
    NEG_INF,
    add,
    as_bound,
    format_bound,
    half,
    is_infinite,
    largest,
    neg,
    smallest,
    sub,
    twice,
)


class NotNormalizedError(ValueError):
    """An operation that requires normalized bounds got raw ones."""


class UnboundedOctagonError(ValueError):
    """Vertex extraction needs all eight bounds finite."""


class FixpointDivergence(RuntimeError):
    """Iterated self-composition did not stabilise within the allowed steps."""


class IdempotenceClass:
    """The five shapes closed under self-composition, plus the complement."""

    EMPTY = "empty"
    RECTANGLE = "rectangle"
    DIAGONAL = "diagonal"
    ULO_ZERO = "ulo-zero"
    UHI_ZERO = "uhi-zero"
    NOT_IDEMPOTENT = "not-idempotent"

    ALL = (EMPTY, RECTANGLE, DIAGONAL, ULO_ZERO, UHI_ZERO, NOT_IDEMPOTENT)


@dataclass(frozen=True)
class Octagon:
    xlo: object
    xhi: object
    ylo: object
    yhi: object
    ulo: object
    uhi: object
    vlo: object
    vhi: object

    def __post_init__(self):
        for name in ("xlo", "xhi", "ylo", "yhi", "ulo", "uhi", "vlo", "vhi"):
            object.__setattr__(self, name, as_bound(getattr(self, name)))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_bounds(cls, bounds) -> "Octagon":
        return cls(*bounds)

    @classmethod
    def point(cls, x, y) -> "Octagon":
        x, y = as_bound(x), as_bound(y)
        return cls(x, x, y, y, sub(y, x), sub(y, x), add(x, y), add(x, y))

    @classmethod
    def box(cls, xlo, xhi, ylo, yhi) -> "Octagon":
        return cls(xlo, xhi, ylo, yhi, NEG_INF, INF, NEG_INF, INF).normalize()

    @classmethod
    def whole_plane(cls) -> "Octagon":
        return cls(NEG_INF, INF, NEG_INF, INF, NEG_INF, INF, NEG_INF, INF)

    def bounds(self) -> tuple:
        return (self.xlo, self.xhi, self.ylo, self.yhi,
                self.ulo, self.uhi, self.vlo, self.vhi)

    # -- textual literal ------------------------------------------------------

    def literal(self) -> str:
        return "octa(%s)" % ",".join(format_bound(b) for b in self.bounds())

    @classmethod
    def parse(cls, text: str) -> "Octagon":
        body = text.strip()
        if not (body.startswith("octa(") and body.endswith(")")):
            raise ValueError(f"not an octagon literal: {text!r}")
        tokens = body[len("octa("):-1].split(",")
        if len(tokens) != 8:
            raise ValueError(f"octagon literal needs 8 bounds: {text!r}")
        return cls(*[as_bound(t) for t in tokens])

    # -- normalization --------------------------------------------------------

    def normalize(self) -> "Octagon":
        """Tighten all eight bounds so each one is attained by some point.

        One simultaneous pass suffices; if any tightened lower bound exceeds
        its upper bound the region is empty and the canonical EMPTY value is
        returned.  The denoted set never changes.
        """
        xlo, xhi, ylo, yhi, ulo, uhi, vlo, vhi = self.bounds()
        nxlo = largest(xlo, sub(vlo, yhi), sub(ylo, uhi), half(sub(vlo, uhi)))
        nxhi = smallest(xhi, sub(vhi, ylo), sub(yhi, ulo), half(sub(vhi, ulo)))
        nylo = largest(ylo, add(ulo, xlo), sub(vlo, xhi), half(add(ulo, vlo)))
        nyhi = smallest(yhi, add(uhi, xhi), sub(vhi, xlo), half(add(uhi, vhi)))
        nulo = largest(ulo, sub(ylo, xhi), sub(vlo, twice(xhi)), sub(twice(ylo), vhi))
        nuhi = smallest(uhi, sub(yhi, xlo), sub(vhi, twice(xlo)), sub(twice(yhi), vlo))
        nvlo = largest(vlo, add(xlo, ylo), add(ulo, twice(xlo)), sub(twice(ylo), uhi))
        nvhi = smallest(vhi, add(xhi, yhi), add(uhi, twice(xhi)), sub(twice(yhi), ulo))
        for lo, hi in ((nxlo, nxhi), (nylo, nyhi), (nulo, nuhi), (nvlo, nvhi)):
            if lo > hi or lo == INF or hi == NEG_INF:
                return EMPTY
        tightened = (nxlo, nxhi, nylo, nyhi, nulo, nuhi, nvlo, nvhi)
        if tightened == self.bounds():
            object.__setattr__(self, "_normalized", True)
            return self
        result = Octagon(*tightened)
        object.__setattr__(result, "_normalized", True)
        return result

    @property
    def is_normalized(self) -> bool:
        cached = getattr(self, "_normalized", None)
        if cached is None:
            cached = self.normalize() is self or self == EMPTY
            object.__setattr__(self, "_normalized", cached)
        return cached

    def _require_normalized(self, op: str) -> None:
        if not self.is_normalized:
            raise NotNormalizedError(f"{op} requires normalized bounds; "
                                     f"call normalize() first: {self.literal()}")

    def is_empty(self) -> bool:
        return self.normalize() == EMPTY

    # -- pointwise ------------------------------------------------------------

    def contains(self, x, y) -> bool:
        """Closed-boundary membership test for a rational point."""
        x, y = as_bound(x), as_bound(y)
        return (self.xlo <= x <= self.xhi
                and self.ylo <= y <= self.yhi
                and self.ulo <= y - x <= self.uhi
                and self.vlo <= x + y <= self.vhi)

    # -- set operations -------------------------------------------------------

    def intersect(self, other: "Octagon") -> "Octagon":
        return Octagon(
            largest(self.xlo, other.xlo), smallest(self.xhi, other.xhi),
            largest(self.ylo, other.ylo), smallest(self.yhi, other.yhi),
            largest(self.ulo, other.ulo), smallest(self.uhi, other.uhi),
            largest(self.vlo, other.vlo), smallest(self.vhi, other.vhi),
        ).normalize()

    def compose(self, other: "Octagon") -> "Octagon":
        """Relational composition {(x, z) | exists y: (x,y) in self, (y,z) in other}.

        Octagons are closed under composition; the result is returned
        normalized.  Both inputs must be normalized (composition with the
        empty octagon short-circuits to EMPTY).
        """
        if self == EMPTY or other == EMPTY:
            return EMPTY
        self._require_normalized("compose")
        other._require_normalized("compose")
        a, b = self, other
        # A midpoint y must lie in both a's y-range and b's x-range.  The
        # eight closed-form bounds below never compare those two intervals,
        # so without this guard a degenerate pair can yield a spurious
        # non-empty result (Fourier-Motzkin elimination of y produces the
        # eight bounds plus exactly these two constant conditions).
        if largest(a.ylo, b.xlo) > smallest(a.yhi, b.xhi):
            return EMPTY
        return Octagon(
            largest(a.xlo, sub(b.xlo, a.uhi), sub(a.vlo, b.xhi)),
            smallest(a.xhi, sub(b.xhi, a.ulo), sub(a.vhi, b.xlo)),
            largest(b.ylo, add(b.ulo, a.ylo), sub(b.vlo, a.yhi)),
            smallest(b.yhi, add(b.uhi, a.yhi), sub(b.vhi, a.ylo)),
            largest(sub(b.ylo, a.xhi), add(b.ulo, a.ulo), sub(b.vlo, a.vhi)),
            smallest(sub(b.yhi, a.xlo), add(b.uhi, a.uhi), sub(b.vhi, a.vlo)),
            largest(add(a.xlo, b.ylo), add(b.ulo, a.vlo), sub(b.vlo, a.uhi)),
            smallest(add(a.xhi, b.yhi), add(b.uhi, a.vhi), sub(b.vhi, a.ulo)),
        ).normalize()

    def inverse(self) -> "Octagon":
        """Swap the roles of x and y: (x, y) in self iff (y, x) in inverse."""
        return Octagon(self.ylo, self.yhi, self.xlo, self.xhi,
                       neg(self.uhi), neg(self.ulo), self.vlo, self.vhi)

    def issuperset(self, other: "Octagon") -> bool:
        """Exact containment, decided on normalized bounds."""
        b = other.normalize()
        if b == EMPTY:
            return True
        a = self.normalize()
        return (a.xlo <= b.xlo and a.xhi >= b.xhi
                and a.ylo <= b.ylo and a.yhi >= b.yhi
                and a.ulo <= b.ulo and a.uhi >= b.uhi
                and a.vlo <= b.vlo and a.vhi >= b.vhi)

    # -- vertices -------------------------------------------------------------

    def vertices(self) -> list:
        """The at most eight corner points, duplicates removed.

        Requires normalized, non-empty, fully bounded input: each corner is
        where two adjacent supporting lines meet, and for tight bounds every
        one of the eight candidate corners lies inside the region.
        """
        self._require_normalized("vertices")
        if self == EMPTY:
            raise ValueError("empty octagon has no vertices")
        if any(is_infinite(b) for b in self.bounds()):
            raise UnboundedOctagonError(f"unbounded octagon: {self.literal()}")
        xlo, xhi, ylo, yhi, ulo, uhi, vlo, vhi = self.bounds()
        candidates = [
            (xlo, vlo - xlo),
            (xlo, uhi + xlo),
            (yhi - uhi, yhi),
            (vhi - yhi, yhi),
            (xhi, vhi - xhi),
            (xhi, ulo + xhi),
            (ylo - ulo, ylo),
            (vlo - ylo, ylo),
        ]
        seen, out = set(), []
        for p in candidates:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out

    # -- relational properties ------------------------------------------------

    def is_symmetric(self) -> bool:
        self._require_normalized("is_symmetric")
        return (self.xlo == self.ylo and self.xhi == self.yhi
                and self.ulo == neg(self.uhi))

    def is_reflexive_on_domain(self) -> bool:
        """Does (x, x) belong to the region for every x in [xlo, xhi]?"""
        self._require_normalized("is_reflexive_on_domain")
        if self == EMPTY:
            return True
        return (self.ulo <= 0 <= self.uhi
                and self.vlo <= twice(self.xlo)
                and twice(self.xhi) <= self.vhi)

    def is_transitive(self) -> bool:
        """Whether compose(self, self) is contained in self.

        Decided on the exact composition.  The sufficient closed-form
        conditions on the u/v bounds (see :func:`transitivity_conditions`)
        miss degenerate regions whose self-composition collapses onto a
        contained sliver, so they are not used as the decision procedure.
        """
        self._require_normalized("is_transitive")
        return self.issuperset(self.compose(self))

    def classify_idempotent(self) -> str:
        """Which of the five self-composition-closed shapes this is, if any.

        The shapes are exhaustive for octagons satisfying O . O = O: the
        empty region, a full rectangle whose x- and y-ranges overlap, the
        diagonal segment, and the two families whose u-band touches zero from
        one side while the v-window covers both projected ranges.
        """
        self._require_normalized("classify_idempotent")
        if self == EMPTY:
            return IdempotenceClass.EMPTY
        xlo, xhi, ylo, yhi, ulo, uhi, vlo, vhi = self.bounds()
        if ulo == 0 == uhi:
            return IdempotenceClass.DIAGONAL
        if (ulo == sub(ylo, xhi) and uhi == sub(yhi, xlo)
                and vlo == add(xlo, ylo) and vhi == add(xhi, yhi)
                and xhi >= ylo and xlo <= yhi):
            return IdempotenceClass.RECTANGLE
        v_window = (sub(vlo, xhi) <= xlo and xhi <= sub(vhi, xlo)
                    and sub(vlo, yhi) <= ylo and yhi <= sub(vhi, ylo))
        if (ulo == 0 and uhi > 0 and vlo < vhi and v_window
                and uhi == smallest(sub(yhi, xlo), sub(vhi, vlo))):
            return IdempotenceClass.ULO_ZERO
        if (uhi == 0 and ulo < 0 and vlo < vhi and v_window
                and ulo == largest(sub(ylo, xhi), sub(vlo, vhi))):
            return IdempotenceClass.UHI_ZERO
        return IdempotenceClass.NOT_IDEMPOTENT

    # -- iterated self-composition ---------------------------------------------

    def self_power(self, m: int) -> "Octagon":
        if m < 1:
            raise ValueError("power must be positive")
        self._require_normalized("self_power")
        result = self
        for _ in range(m - 1):
            result = result.compose(self)
        return result

    def fixpoint(self, max_iter: int = 64) -> tuple:
        """Least m with self_power(m).compose(self) == self_power(m).

        Divergence is possible only for degenerate inputs whose v-band is a
        single line (vlo == vhi), where the iterates alternate between a
        diagonal and an anti-diagonal segment.
        """
        self._require_normalized("fixpoint")
        current = self
        for m in range(1, max_iter + 1):
            nxt = current.compose(self)
            if nxt == current:
                return m, current
            current = nxt
        raise FixpointDivergence(
            f"no self-composition fixpoint within {max_iter} steps")


EMPTY = Octagon(INF, NEG_INF, INF, NEG_INF, INF, NEG_INF, INF, NEG_INF)
object.__setattr__(EMPTY, "_normalized", True)


def transitivity_conditions(o: Octagon) -> bool:
    """Closed-form sufficient conditions for transitivity on normalized bounds.

    Each condition says one u/v bound of the raw self-composition stays inside
    the corresponding bound of ``o`` (the x/y bounds can only shrink).  They
    imply ``is_transitive`` but can reject degenerate transitive regions.
    """
    o._require_normalized("transitivity_conditions")
    if o == EMPTY:
        return True
    xlo, xhi, ylo, yhi, ulo, uhi, vlo, vhi = o.bounds()
    return (ulo <= largest(sub(ylo, xhi), twice(ulo), sub(vlo, vhi))
            and uhi >= smallest(sub(yhi, xlo), twice(uhi), sub(vhi, vlo))
            and vlo <= largest(add(xlo, ylo), add(ulo, vlo), sub(vlo, uhi))
            and vhi >= smallest(add(xhi, yhi), add(uhi, vhi), sub(vhi, ulo)))


def hull(octagons: Iterable[Octagon]) -> Octagon:
    """Smallest octagon containing all the inputs (empty inputs ignored)."""
    items = [o.normalize() for o in octagons]
    if not items:
        raise ValueError("hull of no octagons")
    items = [o for o in items if o != EMPTY]
    if not items:
        return EMPTY
    return Octagon(
        smallest(*[o.xlo for o in items]), largest(*[o.xhi for o in items]),
        smallest(*[o.ylo for o in items]), largest(*[o.yhi for o in items]),
        smallest(*[o.ulo for o in items]), largest(*[o.uhi for o in items]),
        smallest(*[o.vlo for o in items]), largest(*[o.vhi for o in items]),
    ).normalize()


def grid_axis(lo, hi, step) -> list:
    """The grid coordinates lo, lo+step, ... up to hi (exact rationals)."""
    lo, hi, step = as_bound(lo), as_bound(hi), as_bound(step)
    if is_infinite(lo) or is_infinite(hi) or is_infinite(step) or step <= 0:
        raise ValueError("grid needs finite bounds and a positive step")
    count = int((Fraction(hi) - Fraction(lo)) / Fraction(step)) + 1
    return [as_bound(Fraction(lo) + i * Fraction(step)) for i in range(count)]


def raster_mask(o: Octagon, axis: list) -> np.ndarray:
    """Boolean membership matrix mask[i, j] = contains(axis[i], axis[j]).

    Exact: the grid is scaled to integers and each bound is compared against
    its exact ceiling/floor, so no floating point enters the test.
    """
    scale = 1
    for value in axis:
        scale = math.lcm(scale, Fraction(value).denominator)
    xs = np.array([int(Fraction(v) * scale) for v in axis], dtype=np.int64)
    x = xs[:, None]
    y = xs[None, :]
    mask = np.ones((len(axis), len(axis)), dtype=bool)

    def clip_lower(values, bound):
        if bound == NEG_INF:
            return None
        if bound == INF:
            return np.zeros_like(mask)
        return values >= math.ceil(Fraction(bound) * scale)

    def clip_upper(values, bound):
        if bound == INF:
            return None
        if bound == NEG_INF:
            return np.zeros_like(mask)
        return values <= math.floor(Fraction(bound) * scale)

    for cond in (
        clip_lower(x, o.xlo), clip_upper(x, o.xhi),
        clip_lower(y, o.ylo), clip_upper(y, o.yhi),
        clip_lower(y - x, o.ulo), clip_upper(y - x, o.uhi),
        clip_lower(x + y, o.vlo), clip_upper(x + y, o.vhi),
    ):
        if cond is not None:
            mask &= cond
    return mask


def rasterize_oracle(o: Octagon, lo, hi, step) -> frozenset:
    """All lattice points of the grid that satisfy the eight inequalities.

    This is the independent oracle used to cross-check the closed-form
    operations: it never consults normalize/compose/hull, only the raw
    inequalities.
    """
    axis = grid_axis(lo, hi, step)
    mask = raster_mask(o, axis)
    return frozenset((axis[i], axis[j]) for i, j in np.argwhere(mask))
