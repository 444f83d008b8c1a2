"""The resonant set Lambda: construction, verification and Sobolev sums.

All geometry is exact integer arithmetic on points of Z^2. A nuclear family
is a rectangle whose parents (one diagonal) lie in generation j and whose
children (the other diagonal) lie in generation j+1.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np
from pydantic import BaseModel, Field

from cascade_lab.errors import PlacementExhausted
from cascade_lab.params import LambdaBuildParams
from cascade_lab.settings import SCHEMA_VERSION

logger = logging.getLogger(__name__)

Point = Tuple[int, int]


class Rectangle(NamedTuple):
    """Quadruple with ``n1 - n2 + n3 = n4``; ``(n1, n3)`` and ``(n2, n4)``
    are the diagonals."""

    n1: Point
    n2: Point
    n3: Point
    n4: Point

    @property
    def vertices(self) -> frozenset:
        return frozenset(self)


class Family(NamedTuple):
    generation: int
    parents: Tuple[Point, Point]
    children: Tuple[Point, Point]

    @property
    def rectangle(self) -> Rectangle:
        (a, b), (c, d) = self.parents, self.children
        return Rectangle(a, c, b, d)


class Links(NamedTuple):
    spouse: Optional[Point]
    children: Optional[Tuple[Point, Point]]
    sibling: Optional[Point]
    parents: Optional[Tuple[Point, Point]]


def _add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _dot(a: Point, b: Point) -> int:
    return a[0] * b[0] + a[1] * b[1]


def _norm2(a: Point) -> int:
    return a[0] * a[0] + a[1] * a[1]


def is_resonant_rectangle(n1: Point, n2: Point, n3: Point, n4: Point) -> bool:
    """Both resonance conditions, excluding the degenerate ``n1 = n2`` or
    ``n3 = n2`` cases."""
    if n1 == n2 or n3 == n2:
        return False
    return _sub(_add(n1, n3), n2) == n4 and (
        _norm2(n1) - _norm2(n2) + _norm2(n3) == _norm2(n4)
    )


def is_geometric_rectangle(n1: Point, n2: Point, n3: Point, n4: Point) -> bool:
    """Diagonals ``n1n3`` and ``n2n4`` share a midpoint and a length."""
    return (
        len({n1, n2, n3, n4}) == 4
        and _add(n1, n3) == _add(n2, n4)
        and _norm2(_sub(n1, n3)) == _norm2(_sub(n2, n4))
    )


def enumerate_resonant_rectangles(
    points: Iterable[Point], closure_points: Optional[Iterable[Point]] = None
) -> List[Rectangle]:
    """Every resonant rectangle with vertices in ``points`` (plus the wider
    ``closure_points`` if given), one representative per trivial permutation.

    The lexicographically smaller diagonal is reported as ``(n1, n3)``.
    """
    pool = sorted(set(points) | set(closure_points or ()))
    by_key: Dict[Tuple[Point, int], List[Tuple[Point, Point]]] = defaultdict(list)
    for i, a in enumerate(pool):
        for b in pool[i + 1 :]:
            by_key[(_add(a, b), _norm2(_sub(a, b)))].append((a, b))
    found = []
    for diagonals in by_key.values():
        for i, first in enumerate(diagonals):
            for second in diagonals[i + 1 :]:
                (a, b), (c, d) = sorted([first, second])
                found.append(Rectangle(a, c, b, d))
    return sorted(found)


def primitive_triples(max_hypotenuse: int) -> List[Tuple[int, int, int]]:
    """Primitive Pythagorean triples ``(m^2 - k^2, 2mk, m^2 + k^2)``."""
    triples = []
    m = 2
    while m * m + 1 <= max_hypotenuse:
        for k in range(1, m):
            if (m - k) % 2 == 1 and math.gcd(m, k) == 1:
                c = m * m + k * k
                if c <= max_hypotenuse:
                    triples.append((m * m - k * k, 2 * m * k, c))
        m += 1
    return sorted(triples, key=lambda t: (t[2], t[0]))


def pythagorean_rotations(d: Point) -> List[Point]:
    """Integer vectors of the same length as ``d`` other than ``+-d``.

    Each ``w`` meets ``d`` at a Pythagorean angle: ``(d.w, d x w, |d|^2)`` is
    a Pythagorean triple.
    """
    length2 = _norm2(d)
    bound = math.isqrt(length2)
    found = []
    for x in range(-bound, bound + 1):
        rest = length2 - x * x
        y = math.isqrt(rest)
        if y * y != rest:
            continue
        for w in {(x, y), (x, -y)}:
            if w != d and w != (-d[0], -d[1]):
                found.append(w)
    return sorted(found)


def convolution_closure(points: Iterable[Point]) -> Set[Point]:
    """``{n1 - n2 + n3}`` over all triples of ``points``."""
    pts = np.array(sorted(set(points)), dtype=np.int64).reshape(-1, 2)
    if not len(pts):
        return set()
    pair = (pts[:, None, :] - pts[None, :, :]).reshape(-1, 2)
    pair = np.unique(pair, axis=0)
    total = (pair[:, None, :] + pts[None, :, :]).reshape(-1, 2)
    return {(int(x), int(y)) for x, y in np.unique(total, axis=0)}


class LambdaDocument(BaseModel):
    schema_version: str = SCHEMA_VERSION
    generations: List[List[Tuple[int, int]]]
    families: List[Tuple[int, int, int, int, int]] = Field(
        default_factory=list,
        description="(generation, n1, n2, n3, n4) with indices into the "
        "concatenated generations",
    )


@dataclass
class LambdaSet:
    generations: List[List[Point]]
    families: List[Family] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.generations)

    @property
    def points(self) -> List[Point]:
        return [p for gen in self.generations for p in gen]

    @cached_property
    def point_set(self) -> Set[Point]:
        return set(self.points)

    @cached_property
    def generation_of(self) -> Dict[Point, int]:
        return {p: j + 1 for j, gen in enumerate(self.generations) for p in gen}

    @cached_property
    def _links(self) -> Dict[Point, Links]:
        table: Dict[Point, Dict[str, Any]] = defaultdict(dict)
        for fam in self.families:
            (a, b), (c, d) = fam.parents, fam.children
            table[a].setdefault("spouse", b)
            table[b].setdefault("spouse", a)
            table[a].setdefault("children", fam.children)
            table[b].setdefault("children", fam.children)
            table[c].setdefault("sibling", d)
            table[d].setdefault("sibling", c)
            table[c].setdefault("parents", fam.parents)
            table[d].setdefault("parents", fam.parents)
        return {
            p: Links(
                entry.get("spouse"),
                entry.get("children"),
                entry.get("sibling"),
                entry.get("parents"),
            )
            for p, entry in table.items()
        }

    def links(self, point: Point) -> Links:
        return self._links.get(point, Links(None, None, None, None))

    def is_linked(self, point: Point) -> bool:
        return point in self._links

    def scaled(self, factor: int) -> "LambdaSet":
        def s(p: Point) -> Point:
            return (p[0] * factor, p[1] * factor)

        return LambdaSet(
            [[s(p) for p in gen] for gen in self.generations],
            [
                Family(
                    f.generation,
                    (s(f.parents[0]), s(f.parents[1])),
                    (s(f.children[0]), s(f.children[1])),
                )
                for f in self.families
            ],
        )

    def to_json(self) -> str:
        index = {p: i for i, p in enumerate(self.points)}
        doc = LambdaDocument(
            generations=[list(gen) for gen in self.generations],
            families=[
                (f.generation, *(index[v] for v in f.rectangle)) for f in self.families
            ],
        )
        return doc.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LambdaSet":
        doc = LambdaDocument.model_validate_json(text)
        generations = [[(int(x), int(y)) for x, y in gen] for gen in doc.generations]
        flat = [p for gen in generations for p in gen]
        families = [
            Family(g, (flat[i1], flat[i3]), (flat[i2], flat[i4]))
            for g, i1, i2, i3, i4 in doc.families
        ]
        return cls(generations, families)


def square_family(side: Tuple[int, int] = (1, 1)) -> LambdaSet:
    """Two-generation set holding one axis-parallel ``w x h`` family."""
    w, h = side
    return LambdaSet(
        [[(0, 0), (w, h)], [(w, 0), (0, h)]],
        [Family(1, ((0, 0), (w, h)), ((w, 0), (0, h)))],
    )


# Verification


class VerificationVerdict(BaseModel):
    schema_version: str = SCHEMA_VERSION
    distinct: bool = True
    closure: bool = True
    spouse_children: bool = True
    sibling_parents: bool = True
    nondegeneracy: bool = True
    faithfulness: bool = True
    no_spreading: bool = True
    witnesses: Dict[str, List[Any]] = Field(default_factory=dict)

    @property
    def conditions(self) -> Dict[str, bool]:
        return {
            name: getattr(self, name)
            for name in (
                "distinct",
                "closure",
                "spouse_children",
                "sibling_parents",
                "nondegeneracy",
                "faithfulness",
                "no_spreading",
            )
        }

    @property
    def ok(self) -> bool:
        return all(self.conditions.values())

    def fail(self, condition: str, witness: Any) -> None:
        setattr(self, condition, False)
        self.witnesses.setdefault(condition, []).append(witness)


def _check_distinct(lam: LambdaSet, verdict: VerificationVerdict) -> None:
    seen: Dict[Point, int] = {}
    for j, gen in enumerate(lam.generations, start=1):
        for p in gen:
            if p in seen:
                verdict.fail(
                    "distinct", {"point": list(p), "generations": [seen[p], j]}
                )
            else:
                seen[p] = j


def _check_closure(points: Sequence[Point], verdict: VerificationVerdict) -> None:
    """Every right angle with its three vertices in Lambda closes in Lambda."""
    if len(points) < 3:
        return
    members = set(points)
    arr = np.array(points, dtype=np.int64)
    for v_idx, v in enumerate(points):
        rel = arr - arr[v_idx]
        gram = rel @ rel.T
        a_idx, b_idx = np.nonzero(np.triu(gram == 0, k=1))
        for a, b in zip(a_idx, b_idx):
            if a == v_idx or b == v_idx:
                continue
            fourth = _sub(_add(points[a], points[b]), v)
            if fourth not in members:
                verdict.fail(
                    "closure",
                    {"vertices": [list(points[a]), list(v), list(points[b])],
                     "missing": list(fourth)},
                )


def _check_families(lam: LambdaSet, verdict: VerificationVerdict) -> None:
    as_parent: Dict[Point, List[Family]] = defaultdict(list)
    as_child: Dict[Point, List[Family]] = defaultdict(list)
    for fam in lam.families:
        j = fam.generation
        valid = (
            1 <= j < lam.n
            and is_geometric_rectangle(*fam.rectangle)
            and all(lam.generation_of.get(p) == j for p in fam.parents)
            and all(lam.generation_of.get(c) == j + 1 for c in fam.children)
        )
        if not valid:
            witness = {"family": [list(v) for v in fam.rectangle]}
            verdict.fail("spouse_children", witness)
            continue
        for p in fam.parents:
            as_parent[p].append(fam)
        for c in fam.children:
            as_child[c].append(fam)

    for j, gen in enumerate(lam.generations, start=1):
        for p in set(gen):
            if j < lam.n and len(as_parent[p]) != 1:
                verdict.fail(
                    "spouse_children", {"point": list(p), "families": len(as_parent[p])}
                )
            if j > 1 and len(as_child[p]) != 1:
                verdict.fail(
                    "sibling_parents", {"point": list(p), "families": len(as_child[p])}
                )

    for p in lam.point_set:
        link = lam.links(p)
        if link.spouse is not None and link.spouse == link.sibling:
            witness = {"point": list(p), "relative": list(link.spouse)}
            verdict.fail("nondegeneracy", witness)


def _check_faithfulness(lam: LambdaSet, verdict: VerificationVerdict) -> None:
    family_sets = {fam.rectangle.vertices for fam in lam.families}
    for rect in enumerate_resonant_rectangles(lam.point_set):
        if rect.vertices not in family_sets:
            verdict.fail("faithfulness", [list(v) for v in rect])


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _extended_gcd(b, a % b)
    return g, y, x - (a // b) * y


class _Line(NamedTuple):
    """Integer line ``d . p = e`` with primitive, sign-normalised ``d``."""

    d: Point
    e: int


class _Circle(NamedTuple):
    """Thales circle ``|p|^2 - s . p + k = 0`` of a diameter ``ab``."""

    s: Point
    k: int


def _line_through(anchor: Point, direction: Point) -> _Line:
    g = math.gcd(direction[0], direction[1])
    d = (direction[0] // g, direction[1] // g)
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = (-d[0], -d[1])
    return _Line(d, _dot(d, anchor))


def _line_points(d: Point, e: int) -> Optional[Tuple[Point, Point]]:
    """A lattice point of ``d . p = e`` near the origin and the lattice step."""
    g, u, v = _extended_gcd(d[0], d[1])
    if g == 0 or e % g:
        return None
    base = (u * (e // g), v * (e // g))
    step = (-d[1] // g, d[0] // g)
    shift = round(_dot(base, step) / _norm2(step))
    return (base[0] - shift * step[0], base[1] - shift * step[1]), step


def _line_line(l1: _Line, l2: _Line) -> List[Point]:
    det = l1.d[0] * l2.d[1] - l1.d[1] * l2.d[0]
    if det == 0:
        return []
    x_num = l1.e * l2.d[1] - l1.d[1] * l2.e
    y_num = l1.d[0] * l2.e - l1.e * l2.d[0]
    if x_num % det or y_num % det:
        return []
    return [(x_num // det, y_num // det)]


def _line_circle(d: Point, e: int, circle: _Circle) -> List[Point]:
    located = _line_points(d, e)
    if located is None:
        return []
    p0, v = located
    a = _norm2(v)
    b = 2 * _dot(p0, v) - _dot(circle.s, v)
    c = _norm2(p0) - _dot(circle.s, p0) + circle.k
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    root = math.isqrt(disc)
    if root * root != disc:
        return []
    found = []
    for num in {-b + root, -b - root}:
        if num % (2 * a) == 0:
            t = num // (2 * a)
            found.append((p0[0] + t * v[0], p0[1] + t * v[1]))
    return found


def _circle_circle(c1: _Circle, c2: _Circle) -> List[Point]:
    d = _sub(c2.s, c1.s)
    if d == (0, 0):
        return []
    return _line_circle(d, c2.k - c1.k, c1)


def _circle_points(circle: _Circle, diameter2: int) -> List[Point]:
    """Lattice points of a Thales circle: ``(2x - sx)^2 + (2y - sy)^2 = |a-b|^2``."""
    sx, sy = circle.s
    bound = math.isqrt(diameter2)
    found = []
    for big_x in range(-bound, bound + 1):
        rest = diameter2 - big_x * big_x
        big_y = math.isqrt(rest)
        if big_y * big_y != rest or (big_x - sx) % 2:
            continue
        for y_val in {big_y, -big_y}:
            if (y_val - sy) % 2 == 0:
                found.append(((big_x + sx) // 2, (y_val + sy) // 2))
    return found


Incidences = List[Tuple[Point, Point]]


def _spreading_objects(
    points: Sequence[Point],
) -> Tuple[Dict[_Line, Incidences], Dict[_Circle, Incidences]]:
    """Lines and circles on which an outside vertex of a two-in-Lambda
    rectangle must lie, each with the ``(anchor, partner)`` pairs it serves.

    On a line through ``a`` perpendicular to ``ab`` the fourth vertex of the
    rectangle at ``n`` is ``n + b - a``; on the circle over ``ab`` it is
    ``a + b - n``.
    """
    lines: Dict[_Line, Incidences] = defaultdict(list)
    circles: Dict[_Circle, Incidences] = defaultdict(list)
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            ab = _sub(b, a)
            lines[_line_through(a, ab)].append((a, b))
            lines[_line_through(b, ab)].append((b, a))
            circles[_Circle(_add(a, b), _dot(a, b))].append((a, b))
    return lines, circles


def _check_no_spreading(
    points: Sequence[Point],
    verdict: VerificationVerdict,
    closure_radius: Optional[float] = None,
) -> None:
    """At most two rectangles with two vertices in Lambda meet at an outside
    point.

    Any outside point on three such rectangles lies on two of the lines or
    circles above, so candidates are their pairwise lattice intersections
    plus the lattice points of objects that alone serve three pairs.
    """
    members = set(points)
    lines, circles = _spreading_objects(sorted(members))
    line_list, circle_list = list(lines), list(circles)

    candidates: Set[Point] = set()
    for i, l1 in enumerate(line_list):
        for l2 in line_list[i + 1 :]:
            candidates.update(_line_line(l1, l2))
        for circle in circle_list:
            candidates.update(_line_circle(l1.d, l1.e, circle))
    for i, c1 in enumerate(circle_list):
        for c2 in circle_list[i + 1 :]:
            candidates.update(_circle_circle(c1, c2))

    window = 2 * len(members) + 3
    for line, pairs in lines.items():
        if len(pairs) >= 3:
            located = _line_points(line.d, line.e)
            if located is not None:
                (x0, y0), (vx, vy) = located
                reach = window * (len(pairs) + 1)
                candidates.update(
                    (x0 + t * vx, y0 + t * vy) for t in range(-reach, reach + 1)
                )
    for circle, pairs in circles.items():
        if len(pairs) >= 3:
            a, b = pairs[0]
            candidates.update(_circle_points(circle, _norm2(_sub(a, b))))

    for n in sorted(candidates - members):
        if closure_radius is not None and _norm2(n) > closure_radius**2:
            continue
        rects = []
        for line, pairs in lines.items():
            if _dot(line.d, n) != line.e:
                continue
            for a, b in pairs:
                m = _add(n, _sub(b, a))
                if m not in members:
                    rects.append([list(a), list(b), list(m)])
        for circle, pairs in circles.items():
            if _norm2(n) - _dot(circle.s, n) + circle.k != 0:
                continue
            for a, b in pairs:
                m = _sub(_add(a, b), n)
                if m not in members:
                    rects.append([list(a), list(b), list(m)])
        if len(rects) > 2:
            verdict.fail("no_spreading", {"point": list(n), "rectangles": rects})


def verify_lambda(
    lam: LambdaSet, closure_radius: Optional[float] = None
) -> VerificationVerdict:
    """Check the six structural conditions (plus disjointness) exhaustively.

    ``closure_radius`` optionally limits the outside points examined for the
    no-spreading condition; by default every lattice point is covered.
    """
    verdict = VerificationVerdict()
    points = sorted(lam.point_set)
    _check_distinct(lam, verdict)
    _check_closure(points, verdict)
    _check_families(lam, verdict)
    _check_faithfulness(lam, verdict)
    _check_no_spreading(points, verdict, closure_radius)
    failed = [name for name, ok in verdict.conditions.items() if not ok]
    logger.debug(f"Verified {len(points)} points, failed: {failed or 'none'}")
    return verdict


def _partial_ok(points: Set[Point], families: List[Family]) -> bool:
    verdict = VerificationVerdict()
    ordered = sorted(points)
    _check_closure(ordered, verdict)
    if not verdict.closure:
        return False
    family_sets = {f.rectangle.vertices for f in families}
    for rect in enumerate_resonant_rectangles(points):
        if rect.vertices not in family_sets:
            return False
    _check_no_spreading(ordered, verdict)
    return verdict.no_spreading


class _Restart(Exception):
    def __init__(self, generation: int):
        self.generation = generation


def _first_generation(
    params: LambdaBuildParams, rng: np.random.Generator
) -> List[Point]:
    half = max(1, min(params.radius // 4, 16 * params.gen_size))
    box = [
        (x, y)
        for x in range(-half, half + 1)
        for y in range(-half, half + 1)
        if x * x + y * y <= params.radius**2
    ]
    if len(box) < params.gen_size:
        raise _Restart(1)
    picks = rng.choice(len(box), size=params.gen_size, replace=False)
    return [box[int(i)] for i in picks]


def _place_children(
    parents: Tuple[Point, Point],
    placed: Set[Point],
    families: List[Family],
    generation: int,
    params: LambdaBuildParams,
    rng: np.random.Generator,
) -> Family:
    a, b = parents
    d = _sub(b, a)
    both = _add(a, b)
    options = [
        w
        for w in pythagorean_rotations(d)
        if (w[0] - d[0]) % 2 == 0 and (w[1] - d[1]) % 2 == 0 and _dot(w, d) != 0
    ]
    order = [options[int(k)] for k in rng.permutation(len(options))]
    if params.spread:
        # |c1|^2 - |c2|^2 = (a + b).w
        order.sort(key=lambda w: -abs(_dot(both, w)))
    for w in order:
        c1 = ((both[0] + w[0]) // 2, (both[1] + w[1]) // 2)
        c2 = ((both[0] - w[0]) // 2, (both[1] - w[1]) // 2)
        if c1 in placed or c2 in placed:
            continue
        if max(_norm2(c1), _norm2(c2)) > params.radius**2:
            continue
        fam = Family(generation, parents, (c1, c2))
        if _partial_ok(placed | {c1, c2}, families + [fam]):
            return fam
    raise _Restart(generation + 1)


def _pair_children(
    families: List[Family], rng: np.random.Generator, spread: bool = False
) -> List[Tuple[Point, Point]]:
    """Spouses for the next generation, never two siblings.

    With ``spread`` and an even number of families, the larger children of
    neighbouring families marry each other, as do the smaller ones.
    """
    if spread and len(families) % 2 == 0:
        ranked = sorted(
            (sorted(f.children, key=_norm2, reverse=True) for f in families),
            key=lambda kids: -_norm2(kids[0]),
        )
        pairs = []
        for one, two in zip(ranked[::2], ranked[1::2]):
            pairs += [(one[0], two[0]), (one[1], two[1])]
        return pairs
    order = [families[int(i)] for i in rng.permutation(len(families))]
    kids = [tuple(f.children[int(i)] for i in rng.permutation(2)) for f in order]
    count = len(kids)
    return [(kids[f][1], kids[(f + 1) % count][0]) for f in range(count)]


def _attempt(params: LambdaBuildParams, rng: np.random.Generator) -> LambdaSet:
    first = _first_generation(params, rng)
    generations = [first]
    placed = set(first)
    if not _partial_ok(placed, []):
        raise _Restart(1)
    pairs = [(first[i], first[i + 1]) for i in range(0, len(first), 2)]
    families: List[Family] = []
    for j in range(1, params.N):
        placed_gen = []
        new = []
        for parents in pairs:
            fam = _place_children(parents, placed, families, j, params, rng)
            families.append(fam)
            new.append(fam)
            placed.update(fam.children)
            placed_gen.extend(fam.children)
        generations.append(placed_gen)
        logger.debug(f"Placed generation {j + 1}: {placed_gen}")
        if j + 1 < params.N:
            pairs = _pair_children(new, rng, params.spread)
    return LambdaSet(generations, families)


def build_lambda(params: LambdaBuildParams) -> LambdaSet:
    """Place generations one family at a time and verify the result.

    Children of a parent pair sit at the ends of another diameter of the
    parents' circle, at a Pythagorean angle to the parents' diameter.
    Placements that create extra rectangles or spreading points are
    rejected; a dead end restarts from a fresh first generation. With
    ``growth_s`` set, verified sets whose ``S_{N-1} / S_3`` stays below
    :func:`growth_bound` are rejected too.
    """
    rng = np.random.default_rng(params.seed)
    stuck = 1
    for attempt in range(params.max_attempts):
        try:
            lam = _attempt(params, rng)
        except _Restart as e:
            stuck = max(stuck, e.generation)
            continue
        verdict = verify_lambda(lam)
        if verdict.ok and not _meets_growth(lam, params.growth_s):
            logger.debug(f"Attempt {attempt + 1} falls short of the growth bound")
            continue
        if verdict.ok:
            logger.info(
                f"Built Lambda with {params.N} generations of {params.gen_size} "
                f"points after {attempt + 1} attempts"
            )
            return lam
        logger.debug(f"Attempt {attempt + 1} failed verification: {verdict.witnesses}")
    raise PlacementExhausted(stuck)


# Sobolev accounting


def growth_bound(s: float, n: int) -> float:
    """Lower bound ``2^{(s-1)(N-4)} / 2`` on ``S_{N-1} / S_3``."""
    return 0.5 * 2.0 ** ((s - 1.0) * (n - 4))


def _generation_sum(gen: Sequence[Point], s: float) -> Union[int, float]:
    if float(s).is_integer():
        return sum(_norm2(p) ** int(s) for p in gen)
    return math.fsum(_norm2(p) ** s for p in gen)


def sobolev_sums(lam: LambdaSet, s: float) -> Tuple[List[float], Optional[float]]:
    """``S_j = sum |n|^{2s}`` over each generation and ``S_{N-1} / S_3``.

    Integer ``s`` is summed in integers and the ratio taken as a fraction,
    so both are correctly rounded.
    """
    exact = [_generation_sum(gen, s) for gen in lam.generations]
    ratio = None
    if lam.n >= 4 and exact[2] > 0:
        top, bottom = exact[lam.n - 2], exact[2]
        if isinstance(top, int) and isinstance(bottom, int):
            ratio = float(Fraction(top, bottom))
        else:
            ratio = top / bottom
    return [float(x) for x in exact], ratio


def _meets_growth(lam: LambdaSet, s: Optional[float]) -> bool:
    if s is None or lam.n < 4:
        return True
    _, ratio = sobolev_sums(lam, s)
    return ratio is not None and ratio >= growth_bound(s, lam.n)
