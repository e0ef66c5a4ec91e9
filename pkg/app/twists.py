"""
Groupoid-dim twist 모듈

Normalized circle-valued 2-cocycles on finite groupoids, the twisted
convolution algebra and its numerical Wedderburn decomposition.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np

from . import config
from .errors import (
    BoundViolatedError,
    InvalidCocycleError,
    NotABisectionError,
    NumericalDegeneracyError,
    PreconditionError,
    VerificationError,
)
from .finite_groupoid import FiniteGroupoid, convolution_matrix


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TwoCocycle:
    """
    values[a, b] = sigma(a, b) on composable pairs (1 elsewhere).
    Exact cocycles also keep integer angles: sigma = exp(2 pi i numerators / denominator).
    """

    groupoid: FiniteGroupoid
    values: np.ndarray
    numerators: Optional[np.ndarray] = None
    denominator: Optional[int] = None

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    @classmethod
    def trivial(cls, G: FiniteGroupoid) -> "TwoCocycle":
        return cls.from_fractions(G, {})

    @classmethod
    def from_fractions(cls, G: FiniteGroupoid, angles: dict) -> "TwoCocycle":
        """angles: {(a, b): Fraction} in turns; omitted pairs are 0."""
        denominator = lcm(1, *(Fraction(v).denominator for v in angles.values()))
        numerators = np.zeros((G.size, G.size), dtype=np.int64)
        for (a, b), angle in angles.items():
            if G.table[a, b] < 0:
                raise InvalidCocycleError(f"pair ({G.labels[a]}, {G.labels[b]}) is not composable")
            numerators[a, b] = (Fraction(angle) * denominator).numerator % denominator
        return cls._exact(G, numerators, denominator)

    @classmethod
    def _exact(cls, G: FiniteGroupoid, numerators: np.ndarray, denominator: int) -> "TwoCocycle":
        numerators = np.where(G.table >= 0, numerators % denominator, 0)
        values = np.exp(2j * np.pi * numerators / denominator)
        return cls(groupoid=G, values=values, numerators=numerators, denominator=denominator)

    @classmethod
    def from_values(cls, G: FiniteGroupoid, values) -> "TwoCocycle":
        values = np.asarray(values, dtype=complex)
        if values.shape != (G.size, G.size):
            raise InvalidCocycleError("cocycle values must be an N x N array")
        return cls(groupoid=G, values=np.where(G.table >= 0, values, 1.0))

    def coboundary(self, phases: dict) -> "TwoCocycle":
        """
        sigma'(a, b) = sigma(a, b) c(a) c(b) / c(ab) with c = exp(2 pi i phase);
        phases maps non-unit elements to Fractions, units keep c = 1.
        """
        G = self.groupoid
        units = set(G.units)
        if any(g in units and Fraction(p) != 0 for g, p in phases.items()):
            raise InvalidCocycleError("coboundary phases must vanish on units")
        if self.exact and all(isinstance(p, (int, Fraction)) for p in phases.values()):
            denominator = lcm(self.denominator, *(Fraction(p).denominator for p in phases.values()))
            phi = np.zeros(G.size, dtype=np.int64)
            for g, p in phases.items():
                phi[g] = (Fraction(p) * denominator).numerator
            scale = denominator // self.denominator
            product = np.where(G.table >= 0, G.table, 0)
            numerators = self.numerators * scale + phi[:, None] + phi[None, :] - phi[product]
            return TwoCocycle._exact(G, numerators, denominator)
        c = np.ones(G.size, dtype=complex)
        for g, p in phases.items():
            c[g] = np.exp(2j * np.pi * float(p))
        product = np.where(G.table >= 0, G.table, 0)
        return TwoCocycle.from_values(G, self.values * c[:, None] * c[None, :] / c[product])

    def angle_labels(self) -> list:
        if not self.exact:
            return []
        G = self.groupoid
        rows, cols = np.nonzero(self.numerators)
        return [
            [G.labels[a], G.labels[b], str(Fraction(int(self.numerators[a, b]), self.denominator))]
            for a, b in zip(rows, cols)
        ]


def klein4_cocycle(G: FiniteGroupoid) -> TwoCocycle:
    """sigma(a^i b^j, a^k b^l) = (-1)^{jk} on Klein4 indexed as 2i + j."""
    if G.size != 4 or len(G.units) != 1:
        raise InvalidCocycleError("expected the Klein four-group as a one-unit groupoid")
    angles = {}
    for x in range(4):
        for y in range(4):
            j, k = x % 2, y // 2
            if j * k:
                angles[(x, y)] = Fraction(1, 2)
    return TwoCocycle.from_fractions(G, angles)


def disjoint_union(a: TwoCocycle, b: TwoCocycle) -> TwoCocycle:
    G = FiniteGroupoid.disjoint_union(a.groupoid, b.groupoid)
    na = a.groupoid.size
    if a.exact and b.exact:
        denominator = lcm(a.denominator, b.denominator)
        numerators = np.zeros((G.size, G.size), dtype=np.int64)
        numerators[:na, :na] = a.numerators * (denominator // a.denominator)
        numerators[na:, na:] = b.numerators * (denominator // b.denominator)
        return TwoCocycle._exact(G, numerators, denominator)
    values = np.ones((G.size, G.size), dtype=complex)
    values[:na, :na] = a.values
    values[na:, na:] = b.values
    return TwoCocycle.from_values(G, values)


def find_cocycle_violation(sigma: TwoCocycle) -> Optional[tuple]:
    """First composable triple (or unit pair) breaking the cocycle law, else None."""
    G = sigma.groupoid
    n = G.size
    ok = G.table >= 0
    product = np.where(ok, G.table, 0)
    idx = np.arange(n)

    if sigma.exact:
        theta, den = sigma.numerators, sigma.denominator
        left_norm = theta[G.r, idx] % den
        right_norm = theta[idx, G.s] % den
    else:
        theta = sigma.values
        left_norm = np.abs(theta[G.r, idx] - 1) > config.FLOAT_COCYCLE_TOL
        right_norm = np.abs(theta[idx, G.s] - 1) > config.FLOAT_COCYCLE_TOL
        off_circle = ok & (np.abs(np.abs(theta) - 1) > config.FLOAT_COCYCLE_TOL)
        if off_circle.any():
            a, b = (int(v[0]) for v in np.nonzero(off_circle))
            return (G.labels[a], G.labels[b])
    for g in range(n):
        if left_norm[g]:
            return (G.labels[int(G.r[g])], G.labels[g])
        if right_norm[g]:
            return (G.labels[g], G.labels[int(G.s[g])])

    # sigma(a, b) sigma(ab, c) = sigma(b, c) sigma(a, bc)
    a, b, c = np.meshgrid(idx, idx, idx, indexing="ij")
    defined = ok[a, b] & ok[b, c]
    ab, bc = product[a, b], product[b, c]
    if sigma.exact:
        diff = (theta[a, b] + theta[ab, c] - theta[b, c] - theta[a, bc]) % den
        bad = defined & (diff != 0)
    else:
        diff = theta[a, b] * theta[ab, c] - theta[b, c] * theta[a, bc]
        bad = defined & (np.abs(diff) > config.FLOAT_COCYCLE_TOL)
    if bad.any():
        x, y, z = (int(v[0]) for v in np.nonzero(bad))
        return (G.labels[x], G.labels[y], G.labels[z])
    return None


def validate_cocycle(sigma: TwoCocycle) -> bool:
    return find_cocycle_violation(sigma) is None


@dataclass(frozen=True, eq=False)
class StructureAlgebra:
    """
    delta_a delta_b = product_coeff[a, b] delta_{product_index[a, b]}
    (zero when product_index is -1); delta_g* = star_coeff[g] delta_{star_index[g]}.
    """

    groupoid: FiniteGroupoid
    product_index: np.ndarray
    product_coeff: np.ndarray
    star_index: np.ndarray
    star_coeff: np.ndarray

    @property
    def dimension(self) -> int:
        return self.product_index.shape[0]

    def multiply(self, x, y) -> np.ndarray:
        return self.left_matrix(x) @ np.asarray(y, dtype=complex)

    def left_matrix(self, x) -> np.ndarray:
        return convolution_matrix(self.groupoid, x, self.product_coeff)

    def right_matrix(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        n = self.dimension
        R = np.zeros((n, n), dtype=complex)
        rows, cols = np.nonzero(self.product_index >= 0)
        np.add.at(R, (self.product_index[rows, cols], rows), y[cols] * self.product_coeff[rows, cols])
        return R

    def star(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        out = np.zeros(self.dimension, dtype=complex)
        out[self.star_index] = np.conj(x) * self.star_coeff
        return out


def twisted_algebra(G: FiniteGroupoid, sigma: TwoCocycle, seed: int = config.DEFAULT_SEED) -> StructureAlgebra:
    violation = find_cocycle_violation(sigma)
    if violation is not None:
        raise InvalidCocycleError("cocycle identity fails", witness=violation)
    ok = G.table >= 0
    idx = np.arange(G.size)
    algebra = StructureAlgebra(
        groupoid=G,
        product_index=G.table.copy(),
        product_coeff=np.where(ok, sigma.values, 0),
        star_index=G.inverse.copy(),
        star_coeff=np.conj(sigma.values[idx, G.inverse]),
    )
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(G.size) + 1j * rng.standard_normal(G.size)
    y = rng.standard_normal(G.size) + 1j * rng.standard_normal(G.size)
    lhs = algebra.star(algebra.multiply(x, y))
    rhs = algebra.multiply(algebra.star(y), algebra.star(x))
    if not np.allclose(lhs, rhs, atol=config.STAR_IDENTITY_TOL):
        raise VerificationError("(xy)* != y* x* in the twisted algebra")
    return algebra


def _center_basis(A: StructureAlgebra) -> np.ndarray:
    n = A.dimension
    blocks = []
    for b in range(n):
        delta = np.zeros(n)
        delta[b] = 1.0
        # z delta_b - delta_b z, as a map of z
        blocks.append(A.right_matrix(delta) - A.left_matrix(delta))
    stacked = np.vstack(blocks)
    _, singular, vh = np.linalg.svd(stacked)
    tol = config.EIGEN_CLUSTER_TOL * max(1.0, singular[0] if singular.size else 1.0)
    rank = int(np.sum(singular > tol))
    return vh[rank:].conj().T


def _clusters(values: np.ndarray, tol: float) -> list:
    ordered = np.sort(values)
    sizes, count = [], 1
    for prev, cur in zip(ordered, ordered[1:]):
        if cur - prev > tol:
            sizes.append(count)
            count = 1
        else:
            count += 1
    sizes.append(count)
    return sizes


def wedderburn_degrees(A: StructureAlgebra, seed: int = config.DEFAULT_SEED) -> list:
    """
    Block sizes of A ≅ ⊕ M_{d_i}.  A random self-adjoint central h acts on
    block i by a scalar; in the regular representation that eigenvalue
    has multiplicity d_i^2.
    """
    center = _center_basis(A)
    k = center.shape[1]
    rng = np.random.default_rng(seed)
    for attempt in range(config.NUMERIC_RETRIES):
        z = center @ (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        h = z + A.star(z)
        L = A.left_matrix(h)
        L = (L + L.conj().T) / 2
        values = np.linalg.eigvalsh(L)
        scale = max(1.0, float(np.max(np.abs(values))))
        multiplicities = _clusters(values, config.EIGEN_CLUSTER_TOL * scale)
        if len(multiplicities) != k:
            logger.debug("central element did not separate blocks on attempt %d", attempt)
            continue
        raw = np.sqrt(np.array(multiplicities, dtype=float))
        degrees = np.rint(raw).astype(int)
        if np.max(np.abs(raw - degrees)) > config.INTEGER_ROUND_TOL:
            continue
        degrees = sorted(int(d) for d in degrees)
        if sum(d * d for d in degrees) != A.dimension:
            raise VerificationError("block sizes do not fill the algebra", witness=degrees)
        return degrees
    raise NumericalDegeneracyError(
        f"could not separate the center after {config.NUMERIC_RETRIES} attempts"
    )


@dataclass(frozen=True)
class TwistBoundReport:
    M: int
    max_fiber: int
    degrees: tuple
    max_degree: int

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "max_fiber": self.max_fiber,
            "degrees": list(self.degrees),
            "max_degree": self.max_degree,
            "holds": self.max_degree <= self.M,
        }


def check_twist_bound(G: FiniteGroupoid, sigma: TwoCocycle, M: int, seed: int = config.DEFAULT_SEED) -> TwistBoundReport:
    fibers = G.fiber_sizes()
    worst = max(fibers, key=lambda u: (fibers[u], -u))
    if fibers[worst] > M:
        raise PreconditionError(
            f"|G_u| = {fibers[worst]} exceeds M = {M}", witness=G.labels[worst]
        )
    degrees = wedderburn_degrees(twisted_algebra(G, sigma, seed), seed)
    report = TwistBoundReport(M=M, max_fiber=fibers[worst], degrees=tuple(degrees), max_degree=max(degrees))
    if report.max_degree > M:
        raise BoundViolatedError(
            f"irreducible of degree {report.max_degree} exceeds M = {M}", witness=degrees
        )
    return report


@dataclass(frozen=True)
class CommutatorReport:
    lhs: float
    rhs: float
    sup_variation: float
    norm_f: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + config.INEQUALITY_SLACK

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "sup_variation": self.sup_variation,
            "norm_f": self.norm_f,
            "holds": self.holds,
        }


def commutator_estimate_check(G: FiniteGroupoid, sigma: TwoCocycle, h, f) -> CommutatorReport:
    """
    ||V(h) f - f V(h)|| <= sup_{gamma in supp f} |h(r gamma) - h(s gamma)| ||f||
    in the regular representation; h maps unit indices to reals.
    """
    f = np.asarray(f, dtype=complex)
    support = [int(g) for g in np.flatnonzero(np.abs(f) > 0)]
    ranges = [int(G.r[g]) for g in support]
    sources = [int(G.s[g]) for g in support]
    if len(set(ranges)) != len(ranges) or len(set(sources)) != len(sources):
        raise NotABisectionError("support of f meets some range or source fiber twice")

    A = twisted_algebra(G, sigma)
    L = A.left_matrix(f)
    D = np.diag([float(h[int(u)]) for u in G.r])
    lhs = float(np.linalg.norm(D @ L - L @ D, ord=2))
    norm_f = float(np.linalg.norm(L, ord=2))
    variation = max((abs(float(h[int(G.r[g])]) - float(h[int(G.s[g])])) for g in support), default=0.0)
    report = CommutatorReport(lhs=lhs, rhs=variation * norm_f, sup_variation=variation, norm_f=norm_f)
    if not report.holds:
        raise BoundViolatedError("commutator estimate fails", witness=report.to_dict())
    return report
