"""Group carriers: finite groups, truncated free groups, and integer windows.

Three carrier models share a small protocol (``size``, ``identity``, ``mul``,
``inv``).  Finite groups have a total multiplication table; free-group balls
and integer windows are *partial* carriers whose product is defined only when
it stays inside the carrier.  Functions on carriers are plain complex vectors
aligned with the carrier's element indexing.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Word = tuple[int, ...]


class Carrier:
    """Minimal protocol shared by all carrier models."""

    label: str = ""

    @property
    def size(self) -> int:
        raise NotImplementedError

    @property
    def identity(self) -> int:
        raise NotImplementedError

    def mul(self, i: int, j: int) -> int | None:
        """Product of elements ``i * j`` or None when undefined."""
        raise NotImplementedError

    def inv(self, i: int) -> int:
        raise NotImplementedError

    def elements(self) -> range:
        return range(self.size)

    def m2_index_set(self) -> list[int]:
        """Index set over which all pairwise products are defined."""
        raise NotImplementedError

    def is_total(self) -> bool:
        return False


# ---------------------------------------------------------------------------
# finite groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroup(Carrier):
    """A finite group given by its full multiplication table.

    Elements are dense indices ``0..order-1``.  The table is validated on
    construction: it must be a Latin square satisfying associativity with a
    two-sided identity and inverses.
    """

    order: int
    table: np.ndarray
    label: str = "group"
    _identity: int = field(init=False, default=0)
    _inv: np.ndarray = field(init=False, default=None)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.shape != (self.order, self.order):
            raise ValueError("invalid multiplication table")
        if t.min(initial=0) < 0 or t.max(initial=0) >= self.order:
            raise ValueError("invalid multiplication table")
        n = self.order
        ref = np.arange(n)
        rows_ok = (np.sort(t, axis=1) == ref[None, :]).all()
        cols_ok = (np.sort(t, axis=0) == ref[:, None]).all()
        if not (rows_ok and cols_ok):
            raise ValueError("invalid multiplication table")
        # associativity, vectorized: (xy)z == x(yz)
        if not np.array_equal(t[t, :], t[:, t]):
            raise ValueError("not a group")
        # two-sided identity
        ident = None
        for e in range(n):
            if np.array_equal(t[e], ref) and np.array_equal(t[:, e], ref):
                ident = e
                break
        if ident is None:
            raise ValueError("not a group")
        inv = np.empty(n, dtype=np.int64)
        for x in range(n):
            hits = np.nonzero(t[x] == ident)[0]
            if hits.size != 1 or t[hits[0], x] != ident:
                raise ValueError("not a group")
            inv[x] = hits[0]
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "_identity", ident)
        object.__setattr__(self, "_inv", inv)

    @property
    def size(self) -> int:
        return self.order

    @property
    def identity(self) -> int:
        return self._identity

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self._inv[i])

    def m2_index_set(self) -> list[int]:
        return list(range(self.order))

    def is_total(self) -> bool:
        return True

    def is_abelian(self) -> bool:
        return np.array_equal(self.table, self.table.T)

    def left_translation(self, g: int) -> np.ndarray:
        """Permutation matrix of x -> g x on the regular representation."""
        P = np.zeros((self.order, self.order))
        P[self.table[g, :], np.arange(self.order)] = 1.0
        return P

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteGroup)
            and self.order == other.order
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.order, self.table.tobytes()))


def _perm_compose(p: tuple, q: tuple) -> tuple:
    # (p*q)(x) = p(q(x))
    return tuple(p[q[i]] for i in range(len(p)))


def _perm_sign(p: tuple) -> int:
    seen = [False] * len(p)
    sign = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _group_from_elements(elems: list, compose, label: str) -> FiniteGroup:
    index = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for i, g in enumerate(elems):
        for j, h in enumerate(elems):
            table[i, j] = index[compose(g, h)]
    return FiniteGroup(n, table, label)


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic order must be >= 1")
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return FiniteGroup(n, table, f"cyclic:{n}")


def dihedral_group(n: int) -> FiniteGroup:
    """Dihedral group of order 2n: indices 0..n-1 rotations, n..2n-1 reflections."""
    if n < 1:
        raise ValueError("dihedral parameter must be >= 1")
    elems = [(r, s) for s in (0, 1) for r in range(n)]

    def compose(a, b):
        r1, s1 = a
        r2, s2 = b
        # (r1,s1)*(r2,s2): reflections conjugate rotations
        r = (r1 + (r2 if s1 == 0 else -r2)) % n
        return (r, s1 ^ s2)

    return _group_from_elements(elems, compose, f"dihedral:{n}")


def symmetric_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("symmetric parameter must be >= 1")
    elems = sorted(itertools.permutations(range(n)))
    return _group_from_elements(elems, _perm_compose, f"sym:{n}")


def alternating_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("alternating parameter must be >= 1")
    elems = [p for p in sorted(itertools.permutations(range(n))) if _perm_sign(p) == 1]
    return _group_from_elements(elems, _perm_compose, f"alt:{n}")


def build_group(spec: str | dict | Path) -> FiniteGroup:
    """Build a validated finite group from a preset name or a table file.

    Presets: ``cyclic:n``, ``dihedral:n``, ``sym:n``, ``alt:n`` (``cyclic4``
    style tokens also accepted).  A dict or JSON file must carry fields
    ``order`` and ``table`` (row-major).
    """
    if isinstance(spec, dict):
        return FiniteGroup(int(spec["order"]),
                           np.asarray(spec["table"], dtype=np.int64).reshape(
                               int(spec["order"]), int(spec["order"])),
                           spec.get("label", "group"))
    if isinstance(spec, Path) or (isinstance(spec, str) and spec.endswith(".json")):
        data = json.loads(Path(spec).read_text())
        return build_group(data)
    name, _, arg = str(spec).partition(":")
    if not arg:
        # allow "cyclic4" style tokens
        head = name.rstrip("0123456789")
        tail = name[len(head):]
        name, arg = head, tail
    makers = {
        "cyclic": cyclic_group,
        "dihedral": dihedral_group,
        "sym": symmetric_group,
        "symmetric": symmetric_group,
        "alt": alternating_group,
        "alternating": alternating_group,
    }
    if name not in makers or not arg:
        raise ValueError(f"unknown group preset {spec!r}")
    return makers[name](int(arg))


def subgroup_elements(group: FiniteGroup, generators: list[int]) -> list[int]:
    """Closure of ``generators`` in ``group``, as sorted element indices."""
    seen = {group.identity}
    frontier = [group.identity]
    gens = list(generators)
    for g in gens:
        if not (0 <= g < group.order):
            raise ValueError("generator index out of range")
    while frontier:
        x = frontier.pop()
        for g in gens:
            for y in (group.mul(x, g), group.mul(g, x)):
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
    return sorted(seen)


def subgroup(group: FiniteGroup, elements: list[int], label: str = "subgroup"
             ) -> tuple[FiniteGroup, list[int]]:
    """Subgroup of ``group`` on a closed subset; returns (group, embedding).

    ``embedding[i]`` is the parent index of the subgroup's element ``i``.
    """
    elems = sorted(set(int(e) for e in elements))
    pos = {g: i for i, g in enumerate(elems)}
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for i, g in enumerate(elems):
        for j, h in enumerate(elems):
            p = group.mul(g, h)
            if p not in pos:
                raise ValueError("subset is not closed under products")
            table[i, j] = pos[p]
    return FiniteGroup(n, table, label), elems


# ---------------------------------------------------------------------------
# truncated free group (Cayley-tree ball)
# ---------------------------------------------------------------------------


def reduce_word(w: Word) -> Word:
    out: list[int] = []
    for c in w:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def word_mul(w1: Word, w2: Word) -> Word:
    return reduce_word(w1 + w2)


def word_inv(w: Word) -> Word:
    return tuple(-c for c in reversed(w))


def word_distance(w1: Word, w2: Word) -> int:
    """Tree distance |w1^-1 w2| computed by prefix cancellation."""
    c = 0
    while c < len(w1) and c < len(w2) and w1[c] == w2[c]:
        c += 1
    return (len(w1) - c) + (len(w2) - c)


class FreeBall(Carrier):
    """Ball of radius ``R`` in the free group on ``k`` generators.

    Elements are reduced words over letters ``1..k`` (generators) and their
    negatives (inverses), enumerated by length then lexicographically.  The
    partial product ``x * y`` is defined iff the reduced concatenation stays
    inside the ball.  Vertices of the Cayley tree are identified with the
    elements; geodesic-ray bookkeeping lives in :meth:`ray_point`.
    """

    def __init__(self, generators: int, radius: int):
        if generators < 1:
            raise ValueError("need at least one generator")
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.generators = generators
        self.radius = radius
        self.label = f"freeball:{generators},{radius}"
        letters = sorted(
            [g for g in range(1, generators + 1)] + [-g for g in range(1, generators + 1)]
        )
        words: list[Word] = [()]
        frontier: list[Word] = [()]
        for _ in range(radius):
            new = []
            for w in frontier:
                for s in letters:
                    if w and w[-1] == -s:
                        continue
                    new.append(w + (s,))
            new.sort()
            words.extend(new)
            frontier = new
        self.words: list[Word] = words
        self.index: dict[Word, int] = {w: i for i, w in enumerate(words)}
        self.length = np.array([len(w) for w in words], dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def identity(self) -> int:
        return 0

    def mul(self, i: int, j: int) -> int | None:
        w = word_mul(self.words[i], self.words[j])
        return self.index.get(w)

    def inv(self, i: int) -> int:
        return self.index[word_inv(self.words[i])]

    def m2_index_set(self) -> list[int]:
        return self.ball_indices(self.radius // 2)

    def ball_indices(self, r: int) -> list[int]:
        return [i for i in range(self.size) if self.length[i] <= r]

    def sphere_indices(self, r: int) -> list[int]:
        return [i for i in range(self.size) if self.length[i] == r]

    def ray_point(self, v: int, n: int) -> int:
        """Point ``n`` steps along the geodesic ray from ``v`` toward the base ray.

        The base ray walks the nonnegative powers of the first generator.  The
        ray from ``v`` descends toward the identity until it reaches the
        longest prefix of ``v`` that is a power of the first generator, then
        ascends along the base ray; this is the unique geodesic ray from ``v``
        whose tail lies on the base ray.
        """
        if n < 0:
            raise ValueError("ray parameter must be nonnegative")
        w = self.words[v]
        m = 0
        while m < len(w) and w[m] == 1:
            m += 1
        descent = len(w) - m
        if n <= descent:
            target = w[: len(w) - n]
        else:
            target = (1,) * (m + n - descent)
        idx = self.index.get(target)
        if idx is None:
            raise ValueError("radius exhausted")
        return idx

    def word(self, i: int) -> Word:
        return self.words[i]


def free_ball(generators: int, radius: int) -> FreeBall:
    return FreeBall(generators, radius)


# ---------------------------------------------------------------------------
# integer window
# ---------------------------------------------------------------------------


class IntegerWindow(Carrier):
    """Integers ``-N..N`` with partial addition."""

    def __init__(self, halfwidth: int):
        if halfwidth < 1:
            raise ValueError("halfwidth must be positive")
        self.halfwidth = halfwidth
        self.label = f"window:{halfwidth}"

    @property
    def size(self) -> int:
        return 2 * self.halfwidth + 1

    @property
    def identity(self) -> int:
        return self.halfwidth

    def value(self, i: int) -> int:
        """Integer value of element index ``i``."""
        return i - self.halfwidth

    def index_of(self, m: int) -> int:
        if abs(m) > self.halfwidth:
            raise ValueError("integer outside window")
        return m + self.halfwidth

    def mul(self, i: int, j: int) -> int | None:
        s = self.value(i) + self.value(j)
        if abs(s) > self.halfwidth:
            return None
        return self.index_of(s)

    def inv(self, i: int) -> int:
        return self.index_of(-self.value(i))

    def m2_index_set(self) -> list[int]:
        h = self.halfwidth // 2
        return [self.index_of(m) for m in range(-h, h + 1)]


# ---------------------------------------------------------------------------
# functions on carriers
# ---------------------------------------------------------------------------


@dataclass
class GroupFunction:
    """Complex-valued function on a carrier, stored densely by element index."""

    carrier: Carrier
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.carrier.size,):
            raise ValueError("values must cover the whole carrier")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        self.values = v

    def __call__(self, i: int) -> complex:
        return complex(self.values[i])

    def norm_inf(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def norm_l1(self) -> float:
        return float(np.abs(self.values).sum())

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values) <= tol))


def delta(carrier: Carrier, element: int | None = None) -> GroupFunction:
    """Indicator of a single element (the identity by default)."""
    e = carrier.identity if element is None else element
    v = np.zeros(carrier.size, dtype=np.complex128)
    v[e] = 1.0
    return GroupFunction(carrier, v)


def constant(carrier: Carrier, value: complex = 1.0) -> GroupFunction:
    return GroupFunction(carrier, np.full(carrier.size, value, dtype=np.complex128))


def random_function(carrier: Carrier, rng: np.random.Generator,
                    real: bool = False) -> GroupFunction:
    """I.i.d. complex (or real) Gaussian values."""
    v = rng.standard_normal(carrier.size)
    if not real:
        v = v + 1j * rng.standard_normal(carrier.size)
    return GroupFunction(carrier, v)


def random_pd_function(group: FiniteGroup, rng: np.random.Generator,
                       rank: int | None = None) -> GroupFunction:
    """Random positive-definite function, normalized to value 1 at the identity.

    Gram-matrix construction: phi(g) = <lambda(g) u_k, u_k> summed over random
    vectors, which makes the kernel [phi(y^-1 x)] a Gram matrix.
    """
    n = group.order
    r = rank if rank is not None else max(2, n // 2)
    U = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    vals = np.zeros(n, dtype=np.complex128)
    # phi(g) = sum_k <lambda(g)u_k, u_k>
    for g in range(n):
        perm = group.table[g, :]  # lambda(g) delta_y = delta_{gy}
        lam_u = np.zeros_like(U)
        lam_u[perm, :] = U
        vals[g] = np.vdot(U, lam_u)  # sum_k <lam(g) u_k, u_k>
    vals = vals / vals[group.identity].real
    return GroupFunction(group, vals)
