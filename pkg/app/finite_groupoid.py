"""
Groupoid-dim 유한 groupoid 모듈

Finite groups and groupoids as numpy tables: orbits, isotropy, complex
irreducible degrees, spectrum, strata, composition series and the
multiplier map.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations as all_permutations
from typing import Optional, Sequence

import numpy as np

from . import config
from .errors import (
    InvalidActionError,
    InvalidGroupError,
    NotAUnitError,
    NumericalDegeneracyError,
    PreconditionError,
    VerificationError,
)


logger = logging.getLogger(__name__)


# ============================================================================
# 유한 군
# ============================================================================

@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: np.ndarray
    identity: int
    labels: tuple = ()
    permutations: Optional[tuple] = None   # set when built from permutations

    @classmethod
    def from_table(cls, table, labels: Optional[Sequence[str]] = None, permutations=None) -> "FiniteGroup":
        table = np.asarray(table, dtype=np.int64)
        n = table.shape[0] if table.ndim == 2 else 0
        if n == 0 or table.shape != (n, n):
            raise InvalidGroupError("multiplication table must be a non-empty square")
        if table.min() < 0 or table.max() >= n:
            raise InvalidGroupError("table entries out of range")
        if not np.array_equal(table[table], table[:, table]):
            raise InvalidGroupError("multiplication is not associative")
        arange = np.arange(n)
        identities = [e for e in range(n) if np.array_equal(table[e], arange) and np.array_equal(table[:, e], arange)]
        if not identities:
            raise InvalidGroupError("no identity element")
        identity = identities[0]
        for a in range(n):
            if identity not in table[a]:
                raise InvalidGroupError(f"element {a} has no inverse")
            if sorted(table[a]) != list(range(n)):
                raise InvalidGroupError(f"row {a} is not a permutation")
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise InvalidGroupError("one label per element required")
        return cls(table=table, identity=identity, labels=labels, permutations=permutations)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        if n < 1:
            raise InvalidGroupError("cyclic group order must be positive")
        idx = np.arange(n)
        return cls.from_table((idx[:, None] + idx[None, :]) % n)

    @classmethod
    def generated_by(cls, generators: Sequence[tuple]) -> "FiniteGroup":
        """Permutation group generated by tuples p with p[i] the image of i."""
        degree = len(generators[0])
        identity = tuple(range(degree))
        elements = [identity]
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for p in frontier:
                for q in generators:
                    pq = tuple(p[q[i]] for i in range(degree))
                    if pq not in seen:
                        seen.add(pq)
                        elements.append(pq)
                        nxt.append(pq)
            frontier = nxt
        return cls.from_permutations(elements)

    @classmethod
    def from_permutations(cls, perms: Sequence[tuple]) -> "FiniteGroup":
        perms = [tuple(p) for p in perms]
        index = {p: i for i, p in enumerate(perms)}
        degree = len(perms[0])
        table = np.empty((len(perms), len(perms)), dtype=np.int64)
        for i, p in enumerate(perms):
            for j, q in enumerate(perms):
                pq = tuple(p[q[k]] for k in range(degree))
                if pq not in index:
                    raise InvalidGroupError("permutations are not closed under composition")
                table[i, j] = index[pq]
        labels = ["".join(str(v) for v in p) for p in perms]
        return cls.from_table(table, labels, permutations=tuple(perms))

    @classmethod
    def direct_product(cls, a: "FiniteGroup", b: "FiniteGroup") -> "FiniteGroup":
        """(a1, b1) has index a1*|b| + b1."""
        nb = b.order
        blocks = a.table[:, None, :, None] * nb + b.table[None, :, None, :]
        labels = [f"({x},{y})" for x in a.labels for y in b.labels]
        return cls.from_table(blocks.reshape(a.order * nb, a.order * nb), labels)

    @classmethod
    def named(cls, name: str) -> "FiniteGroup":
        """ "S3", "S4", "A4", "Q8", "Klein4", "Z/n" or "D<n>" (dihedral, order 2n)."""
        key = name.strip()
        if key.startswith("Z/"):
            return cls.cyclic(int(key[2:]))
        if key == "S3":
            return cls.generated_by([(1, 0, 2), (1, 2, 0)])
        if key == "S4":
            return cls.generated_by([(1, 0, 2, 3), (1, 2, 3, 0)])
        if key == "A4":
            even = [p for p in all_permutations(range(4)) if _parity(p) == 0]
            return cls.from_permutations(even)
        if key == "Klein4":
            z2 = cls.cyclic(2)
            return cls.direct_product(z2, z2)
        if key == "Q8":
            return _quaternion_group()
        if key.startswith("D") and key[1:].isdigit():
            n = int(key[1:])
            if n < 3:
                raise InvalidGroupError("dihedral groups need n >= 3")
            rotation = tuple((i + 1) % n for i in range(n))
            reflection = tuple((-i) % n for i in range(n))
            return cls.generated_by([rotation, reflection])
        raise InvalidGroupError(f"unknown group name {name!r}")

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def inverses(self) -> np.ndarray:
        return np.argmax(self.table == self.identity, axis=1)

    def multiply(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def parity(self, a: int) -> int:
        if self.permutations is None:
            raise InvalidGroupError("parity needs a permutation representation")
        return _parity(self.permutations[a])

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = int(self.table[x, a])
            k += 1
        return k

    def cyclic_subgroup(self, a: int) -> frozenset:
        members, x = {self.identity}, a
        while x != self.identity:
            members.add(x)
            x = int(self.table[x, a])
        return frozenset(members)


def _parity(p: tuple) -> int:
    seen, parity = set(), 0
    for start in range(len(p)):
        if start in seen:
            continue
        length, i = 0, start
        while i not in seen:
            seen.add(i)
            i = p[i]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _quaternion_group() -> FiniteGroup:
    # element = (sign, unit) with units 1, i, j, k
    units = {(0, 0): (0, 0), (1, 1): (1, 0), (2, 2): (1, 0), (3, 3): (1, 0),
             (1, 2): (0, 3), (2, 3): (0, 1), (3, 1): (0, 2),
             (2, 1): (1, 3), (3, 2): (1, 1), (1, 3): (1, 2)}
    for u in range(4):
        units.setdefault((0, u), (0, u))
        units.setdefault((u, 0), (0, u))
    elements = [(s, u) for s in (0, 1) for u in range(4)]
    table = np.empty((8, 8), dtype=np.int64)
    for a, (sa, ua) in enumerate(elements):
        for b, (sb, ub) in enumerate(elements):
            sign, u = units[(ua, ub)]
            table[a, b] = elements.index(((sa + sb + sign) % 2, u))
    labels = [("-" if s else "") + "1ijk"[u] for s, u in elements]
    return FiniteGroup.from_table(table, labels)


def conjugacy_classes(H: FiniteGroup) -> list:
    """Classes as sorted tuples; the identity's class comes first."""
    inv = H.inverses
    conj = H.table[H.table, inv[:, None]]  # conj[g, x] = g x g^-1
    assigned = np.full(H.order, -1)
    classes = []
    for x in range(H.order):
        if assigned[x] >= 0:
            continue
        members = tuple(sorted(set(int(v) for v in conj[:, x])))
        assigned[list(members)] = len(classes)
        classes.append(members)
    classes.sort(key=lambda c: (H.identity not in c, c[0]))
    return classes


def irrep_degrees(H: FiniteGroup, seed: int = config.DEFAULT_SEED) -> list:
    """
    Degrees of the complex irreducible representations, sorted.

    Class-sum multiplication matrices share the central characters
    omega_j = |C_j| chi_j / d as eigenvectors; a random combination
    separates them, and d^2 = |H| / sum_j |omega_j|^2 / |C_j|.
    """
    classes = conjugacy_classes(H)
    k = len(classes)
    sizes = np.array([len(c) for c in classes], dtype=float)
    class_of = np.empty(H.order, dtype=np.int64)
    for i, members in enumerate(classes):
        class_of[list(members)] = i
    inv = H.inverses

    # a[i, j, l] = #{x in C_i : x^-1 g_l in C_j}
    a = np.zeros((k, k, k))
    for l, members in enumerate(classes):
        g_l = members[0]
        for i, ci in enumerate(classes):
            for x in ci:
                a[i, class_of[H.table[inv[x], g_l]], l] += 1

    rng = np.random.default_rng(seed)
    for attempt in range(config.NUMERIC_RETRIES):
        coeffs = rng.standard_normal(k)
        combined = np.tensordot(coeffs, a, axes=1)
        values, vectors = np.linalg.eig(combined)
        scale = max(1.0, float(np.max(np.abs(values))))
        gaps = np.abs(values[:, None] - values[None, :]) + np.eye(k) * scale
        if k > 1 and gaps.min() < config.EIGEN_CLUSTER_TOL * scale:
            logger.debug("eigenvalue cluster on attempt %d, resampling", attempt)
            continue
        if np.min(np.abs(vectors[0])) < config.EIGEN_CLUSTER_TOL:
            continue
        omega = vectors / vectors[0]
        squared = H.order / np.sum(np.abs(omega) ** 2 / sizes[:, None], axis=0)
        raw = np.sqrt(squared)
        degrees = np.rint(raw).astype(int)
        if np.max(np.abs(raw - degrees)) > config.INTEGER_ROUND_TOL:
            continue
        degrees = sorted(int(d) for d in degrees)
        if sum(d * d for d in degrees) != H.order:
            raise VerificationError("sum of squared degrees differs from the group order", witness=degrees)
        if any(H.order % d for d in degrees):
            raise VerificationError("a degree does not divide the group order", witness=degrees)
        return degrees
    raise NumericalDegeneracyError(
        f"class-sum diagonalization failed after {config.NUMERIC_RETRIES} attempts"
    )


def normal_core(H: FiniteGroup, subgroup) -> frozenset:
    """Intersection of all conjugates g S g^-1."""
    inv = H.inverses
    core = set(subgroup)
    for g in range(H.order):
        core &= {int(H.table[H.table[g, s], inv[g]]) for s in subgroup}
    return frozenset(core)


def abelian_normal_core(H: FiniteGroup) -> frozenset:
    """Normal core of a largest cyclic subgroup: an abelian normal subgroup of finite index."""
    generator = max(range(H.order), key=lambda a: (H.element_order(a), -a))
    return normal_core(H, H.cyclic_subgroup(generator))


# ============================================================================
# 유한 groupoid
# ============================================================================

@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """
    Elements 0..N-1; units are the elements u with r[u] == s[u] == u.
    table[g, h] is gh when s(g) == r(h), else -1.
    """

    labels: tuple
    r: np.ndarray
    s: np.ndarray
    table: np.ndarray
    inverse: np.ndarray = field(default=None)

    @classmethod
    def build(cls, labels, r, s, table) -> "FiniteGroupoid":
        r = np.asarray(r, dtype=np.int64)
        s = np.asarray(s, dtype=np.int64)
        table = np.asarray(table, dtype=np.int64)
        n = len(labels)
        if r.shape != (n,) or s.shape != (n,) or table.shape != (n, n):
            raise PreconditionError("groupoid arrays have inconsistent shapes")
        units = np.flatnonzero(r == np.arange(n))
        if not np.array_equal(units, np.flatnonzero(s == np.arange(n))):
            raise PreconditionError("range and source disagree on the unit space")
        if not (np.isin(r, units).all() and np.isin(s, units).all()):
            raise PreconditionError("range and source must land in the unit space")
        composable = s[:, None] == r[None, :]
        if not np.array_equal(composable, table >= 0):
            raise PreconditionError("composition must be defined exactly when s(g) = r(h)")
        ok = table >= 0
        rows, cols = np.nonzero(ok)
        if not (np.array_equal(r[table[ok]], r[rows]) and np.array_equal(s[table[ok]], s[cols])):
            raise PreconditionError("r(gh) = r(g) and s(gh) = s(h) must hold")
        ext = np.full((n + 1, n + 1), n, dtype=np.int64)
        ext[:n, :n] = np.where(ok, table, n)
        left = ext[ext[:n, :n]][:, :, :n]
        right = ext[np.arange(n)[:, None, None], ext[:n, :n][None, :, :]]
        if not np.array_equal(left, right):
            raise PreconditionError("composition is not associative")
        if not (np.array_equal(table[r, np.arange(n)], np.arange(n)) and np.array_equal(table[np.arange(n), s], np.arange(n))):
            raise PreconditionError("units must act as identities")
        inverse = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            candidates = np.flatnonzero(table[g] == r[g])
            candidates = [h for h in candidates if table[h, g] == s[g]]
            if not candidates:
                raise PreconditionError(f"element {labels[g]!r} has no inverse")
            inverse[g] = candidates[0]
        return cls(labels=tuple(labels), r=r, s=s, table=table, inverse=inverse)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def units(self) -> tuple:
        return tuple(int(u) for u in np.flatnonzero(self.r == np.arange(self.size)))

    def unit_labels(self, units) -> list:
        return [self.labels[u] for u in sorted(units)]

    def composable(self, g: int, h: int) -> bool:
        return self.table[g, h] >= 0

    def multiply(self, g: int, h: int) -> Optional[int]:
        gh = int(self.table[g, h])
        return gh if gh >= 0 else None

    def is_invariant(self, unit_set) -> bool:
        unit_set = set(unit_set)
        return all(
            (int(self.r[g]) in unit_set) == (int(self.s[g]) in unit_set) for g in range(self.size)
        )

    def fiber_sizes(self) -> dict:
        """|G_u| = #{g : s(g) = u}."""
        counts = Counter(int(u) for u in self.s)
        return {u: counts[u] for u in self.units}

    # --- constructors ---

    @classmethod
    def from_group(cls, H: FiniteGroup) -> "FiniteGroupoid":
        n = H.order
        r = np.full(n, H.identity)
        return cls.build(H.labels, r, r.copy(), H.table)

    @classmethod
    def unit_space(cls, labels) -> "FiniteGroupoid":
        n = len(labels)
        idx = np.arange(n)
        table = np.where(idx[:, None] == idx[None, :], idx[:, None], -1)
        return cls.build(list(labels), idx, idx.copy(), table)

    @classmethod
    def pair_groupoid(cls, labels) -> "FiniteGroupoid":
        """All (i, j) with (i, j)(j, k) = (i, k); transitive with trivial isotropy."""
        m = len(labels)
        index = lambda i, j: i * m + j
        names = [f"({labels[i]},{labels[j]})" if i != j else str(labels[i]) for i in range(m) for j in range(m)]
        r = [index(i, i) for i in range(m) for j in range(m)]
        s = [index(j, j) for i in range(m) for j in range(m)]
        table = np.full((m * m, m * m), -1, dtype=np.int64)
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    table[index(i, j), index(j, k)] = index(i, k)
        return cls.build(names, r, s, table)

    @classmethod
    def disjoint_union(cls, a: "FiniteGroupoid", b: "FiniteGroupoid") -> "FiniteGroupoid":
        na, nb = a.size, b.size
        table = np.full((na + nb, na + nb), -1, dtype=np.int64)
        table[:na, :na] = a.table
        table[na:, na:] = np.where(b.table >= 0, b.table + na, -1)
        labels = [f"0:{x}" for x in a.labels] + [f"1:{x}" for x in b.labels]
        return cls.build(labels, np.concatenate([a.r, b.r + na]), np.concatenate([a.s, b.s + na]), table)

    @classmethod
    def product(cls, a: "FiniteGroupoid", b: "FiniteGroupoid") -> "FiniteGroupoid":
        na, nb = a.size, b.size
        index = lambda g, h: g * nb + h
        labels = [f"({x},{y})" for x in a.labels for y in b.labels]
        r = [index(a.r[g], b.r[h]) for g in range(na) for h in range(nb)]
        s = [index(a.s[g], b.s[h]) for g in range(na) for h in range(nb)]
        blocks = np.where(
            (a.table[:, None, :, None] >= 0) & (b.table[None, :, None, :] >= 0),
            a.table[:, None, :, None] * nb + b.table[None, :, None, :],
            -1,
        )
        return cls.build(labels, r, s, blocks.reshape(na * nb, na * nb))

    def restrict(self, unit_set) -> "FiniteGroupoid":
        """G|_A = {g : r(g), s(g) in A}."""
        return self.restriction(unit_set)[0]

    def restriction(self, unit_set) -> tuple:
        """(G|_A, kept element indices of G in order)."""
        unit_set = set(unit_set)
        keep = [g for g in range(self.size) if int(self.r[g]) in unit_set and int(self.s[g]) in unit_set]
        position = {g: i for i, g in enumerate(keep)}
        sub = self.table[np.ix_(keep, keep)]
        table = np.vectorize(lambda v: position.get(int(v), -1))(sub) if keep else sub
        r = [position[int(self.r[g])] for g in keep]
        s = [position[int(self.s[g])] for g in keep]
        return FiniteGroupoid.build([self.labels[g] for g in keep], r, s, table), keep


def transformation_groupoid(H: FiniteGroup, X: Sequence[str], action) -> FiniteGroupoid:
    """
    X ⋊ H with elements (x, h) at index xi*|H| + h, r = x, s = h^-1 x,
    and (x, h)(h^-1 x, k) = (x, hk).  action[h, xi] is the index of h·x.
    """
    action = np.asarray(action, dtype=np.int64)
    nh, nx = H.order, len(X)
    if action.shape != (nh, nx) or action.min(initial=0) < 0 or action.max(initial=0) >= max(nx, 1):
        raise InvalidActionError("action table must map (group element, point) to a point index")
    if not np.array_equal(action[H.identity], np.arange(nx)):
        raise InvalidActionError("the identity must act trivially")
    # (hk)·x == h·(k·x)
    composed = action[H.table]  # composed[h, k, x] = (hk)·x
    stepwise = action[np.arange(nh)[:, None, None], action[None, :, :]]
    if not np.array_equal(composed, stepwise):
        h, k, x = (int(v[0]) for v in np.nonzero(composed != stepwise))
        raise InvalidActionError(
            "action is not compatible with the group law",
            witness=(H.labels[h], H.labels[k], X[x]),
        )
    inv = H.inverses
    n = nx * nh
    index = lambda xi, h: xi * nh + h
    labels, r, s = [], [], []
    for xi in range(nx):
        for h in range(nh):
            labels.append(X[xi] if h == H.identity else f"({X[xi]},{H.labels[h]})")
            r.append(index(xi, H.identity))
            s.append(index(int(action[inv[h], xi]), H.identity))
    table = np.full((n, n), -1, dtype=np.int64)
    for xi in range(nx):
        for h in range(nh):
            yi = int(action[inv[h], xi])
            for k in range(nh):
                table[index(xi, h), index(yi, k)] = index(xi, int(H.table[h, k]))
    return FiniteGroupoid.build(labels, r, s, table)


def sign_model(group_name: str, radius: int) -> FiniteGroupoid:
    """Permutation group acting on {-radius..radius}: even fixes, odd negates."""
    H = FiniteGroup.named(group_name)
    points = list(range(-radius, radius + 1))
    position = {p: i for i, p in enumerate(points)}
    action = np.empty((H.order, len(points)), dtype=np.int64)
    for h in range(H.order):
        odd = H.parity(h) if H.permutations is not None else (0 if h == H.identity else 1)
        for p in points:
            action[h, position[p]] = position[-p if odd else p]
    return transformation_groupoid(H, [str(p) for p in points], action)


def s3_sign_model(radius: int = 2) -> FiniteGroupoid:
    return sign_model("S3", radius)


def z2_sign_model(radius: int = 1) -> FiniteGroupoid:
    return sign_model("Z/2", radius)


def orbits(G: FiniteGroupoid) -> list:
    """Orbit partition of the units, each orbit a sorted tuple, ordered by least unit."""
    by_source = {}
    for g in range(G.size):
        by_source.setdefault(int(G.s[g]), set()).add(int(G.r[g]))
    seen, result = set(), []
    for u in G.units:
        if u in seen:
            continue
        members = tuple(sorted(by_source[u]))
        seen.update(members)
        result.append(members)
    return result


def isotropy_at(G: FiniteGroupoid, u: int) -> FiniteGroup:
    if u not in G.units:
        raise NotAUnitError(f"{u!r} is not a unit")
    members = [g for g in range(G.size) if G.r[g] == u and G.s[g] == u]
    position = {g: i for i, g in enumerate(members)}
    table = [[position[int(G.table[a, b])] for b in members] for a in members]
    return FiniteGroup.from_table(table, [G.labels[g] for g in members])


def max_isotropy_degree(G: FiniteGroupoid, seed: int = config.DEFAULT_SEED) -> int:
    return max(max(irrep_degrees(isotropy_at(G, orbit[0]), seed)) for orbit in orbits(G))


@dataclass(frozen=True)
class SpectrumEntry:
    orbit: tuple
    isotropy_degree: int
    induced_dimension: int
    multiplicity: int

    def to_dict(self, G: Optional[FiniteGroupoid] = None) -> dict:
        return {
            "orbit": G.unit_labels(self.orbit) if G is not None else list(self.orbit),
            "isotropy_degree": self.isotropy_degree,
            "induced_dimension": self.induced_dimension,
            "multiplicity": self.multiplicity,
        }


def spectrum(G: FiniteGroupoid, seed: int = config.DEFAULT_SEED) -> list:
    """One entry per (orbit, isotropy degree), taken at the orbit's least unit."""
    entries = []
    for orbit in orbits(G):
        degrees = Counter(irrep_degrees(isotropy_at(G, orbit[0]), seed))
        for d in sorted(degrees):
            entries.append(SpectrumEntry(orbit, d, len(orbit) * d, degrees[d]))
    return entries


def is_subhomogeneous(G: FiniteGroupoid, M: int, seed: int = config.DEFAULT_SEED) -> bool:
    entries = spectrum(G, seed)
    by_orbit_and_isotropy = all(
        len(e.orbit) <= M and e.isotropy_degree <= M for e in entries
    )
    by_dimension = max(e.induced_dimension for e in entries) <= M * M
    if by_orbit_and_isotropy and not by_dimension:
        raise VerificationError(
            "orbit/isotropy bound holds but the induced dimensions exceed M^2", M=M
        )
    return by_orbit_and_isotropy


@dataclass(frozen=True)
class AbelianCore:
    """Abelian normal subgroup of finite index in the isotropy at one orbit."""

    unit: int
    isotropy_order: int
    core_order: int
    max_degree: int

    @property
    def index(self) -> int:
        return self.isotropy_order // self.core_order

    def to_dict(self, G: FiniteGroupoid) -> dict:
        return {
            "unit": G.labels[self.unit],
            "isotropy_order": self.isotropy_order,
            "core_order": self.core_order,
            "index": self.index,
            "max_degree": self.max_degree,
        }


def abelian_cores(G: FiniteGroupoid, seed: int = config.DEFAULT_SEED) -> list:
    """
    Per orbit, the abelian normal core A of the isotropy H; irreducible
    degrees of H never exceed [H : A].
    """
    cores = []
    for orbit in orbits(G):
        H = isotropy_at(G, orbit[0])
        core = abelian_normal_core(H)
        if any(H.multiply(a, b) != H.multiply(b, a) for a in core for b in core):
            raise VerificationError("normal core is not abelian", witness=G.labels[orbit[0]])
        entry = AbelianCore(orbit[0], H.order, len(core), max(irrep_degrees(H, seed)))
        if entry.max_degree > entry.index:
            raise VerificationError(
                f"degree {entry.max_degree} exceeds the index {entry.index} of an abelian normal subgroup",
                witness=G.labels[orbit[0]],
            )
        cores.append(entry)
    return cores


@dataclass(frozen=True)
class Strata:
    equal: dict       # n -> frozenset of units with orbit size n

    def at_most(self, n: int) -> frozenset:
        return frozenset().union(*(v for k, v in self.equal.items() if k <= n))

    def at_least(self, n: int) -> frozenset:
        return frozenset().union(*(v for k, v in self.equal.items() if k >= n))


def strata(G: FiniteGroupoid) -> Strata:
    layers = {}
    for orbit in orbits(G):
        layers.setdefault(len(orbit), set()).update(orbit)
    result = Strata({n: frozenset(layers[n]) for n in sorted(layers)})
    for n, layer in result.equal.items():
        if not G.is_invariant(layer):
            raise VerificationError(f"stratum of orbit size {n} is not invariant")
    return result


@dataclass(frozen=True)
class CompositionSeries:
    applicable: bool
    thresholds: tuple = ()
    prim: dict = field(default_factory=dict)       # M -> list of SpectrumEntry
    support: dict = field(default_factory=dict)    # M -> X_{>=M}
    witness_unit: Optional[int] = None
    reason: str = ""

    def to_dict(self, G: FiniteGroupoid) -> dict:
        if not self.applicable:
            return {
                "applicable": False,
                "witness_unit": G.labels[self.witness_unit],
                "reason": self.reason,
            }
        return {
            "applicable": True,
            "thresholds": list(self.thresholds),
            "prim": {str(m): [e.to_dict(G) for e in self.prim[m]] for m in self.thresholds},
            "support": {str(m): G.unit_labels(self.support[m]) for m in self.thresholds},
        }


NON_ABELIAN_REASON = (
    "isotropy is non-abelian: the ideals of the dimension filtration need not "
    "come from restrictions to invariant unit sets"
)


def composition_series(G: FiniteGroupoid, seed: int = config.DEFAULT_SEED) -> CompositionSeries:
    for orbit in orbits(G):
        if not isotropy_at(G, orbit[0]).is_abelian():
            return CompositionSeries(applicable=False, witness_unit=orbit[0], reason=NON_ABELIAN_REASON)

    entries = spectrum(G, seed)
    layers = strata(G)
    thresholds = tuple(sorted({e.induced_dimension for e in entries}))
    prim = {m: [e for e in entries if e.induced_dimension == m] for m in thresholds}
    support = {m: layers.at_least(m) for m in thresholds}

    for lower, upper in zip(thresholds, thresholds[1:]):
        if not support[upper] <= support[lower]:
            raise VerificationError("supports of the series are not nested", thresholds=(lower, upper))

    for m in thresholds:
        # restricted spectrum, computed on G|_{X_{=m}} independently
        restricted, keep = G.restriction(layers.equal.get(m, frozenset()))
        independent = Counter(
            (tuple(keep[u] for u in e.orbit), e.induced_dimension)
            for e in spectrum(restricted, seed) for _ in range(e.multiplicity)
        )
        expected = Counter((e.orbit, e.induced_dimension) for e in prim[m] for _ in range(e.multiplicity))
        if independent != expected:
            raise VerificationError(f"restriction to X_={m} does not reproduce Prim_{m}")
    return CompositionSeries(applicable=True, thresholds=thresholds, prim=prim, support=support)


# ============================================================================
# 합성곱과 multiplier
# ============================================================================

def convolution_matrix(G: FiniteGroupoid, f, coefficients: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Left regular operator L_f on functions on G: (L_f xi)(ab) += f(a) c(a, b) xi(b),
    with c the cocycle values (all ones when omitted).
    """
    f = np.asarray(f, dtype=complex)
    n = G.size
    L = np.zeros((n, n), dtype=complex)
    rows, cols = np.nonzero(G.table >= 0)
    weights = f[rows] if coefficients is None else f[rows] * coefficients[rows, cols]
    np.add.at(L, (G.table[rows, cols], cols), weights)
    return L


def multiplier_diag(G: FiniteGroupoid, h, seed: int = config.DEFAULT_SEED) -> np.ndarray:
    """
    D = diag(h(r(gamma))), the regular-representation image of V(h).
    Checks L_{V(h)f} = D L_f and L_{f V(h)} = L_f D on a random f.
    h maps unit indices to numbers.
    """
    values = np.array([complex(h[int(u)]) for u in G.r])
    D = np.diag(values)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(G.size) + 1j * rng.standard_normal(G.size)
    left = convolution_matrix(G, values * f)
    right = convolution_matrix(G, f * np.array([complex(h[int(u)]) for u in G.s]))
    L = convolution_matrix(G, f)
    if not (np.allclose(left, D @ L, atol=config.STAR_IDENTITY_TOL)
            and np.allclose(right, L @ D, atol=config.STAR_IDENTITY_TOL)):
        raise VerificationError("multiplier identities fail")
    return D


def commutator_witness(G: FiniteGroupoid, D: np.ndarray) -> Optional[int]:
    """An element gamma with [D, L_gamma] != 0, or None when D is central."""
    for g in range(G.size):
        delta = np.zeros(G.size)
        delta[g] = 1.0
        L = convolution_matrix(G, delta)
        if np.linalg.norm(D @ L - L @ D) > config.STAR_IDENTITY_TOL:
            return g
    return None
