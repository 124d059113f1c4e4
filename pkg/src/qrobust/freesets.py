"""Free sets as finite unions of finitely generated convex subsets.

Each convex subset is a singleton, a hull of explicit states, or the set of
states diagonal in a fixed orthonormal basis (stored as the hull of the
basis projectors).  Unions of these cover every family the package ships
examples for; anything needing infinite generator sets is out of scope.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .operators import eigh_hermitian, require_density, trace_norm
from .simplex import maximize_on_simplex

MEMBERSHIP_TOL = 1e-8
SUPPORT_CUTOFF = 1e-10


class ConvexFreeSet:
    """One convex piece of a free set: singleton, hull, or incoherent basis."""

    def __init__(self, kind: str, generators: list[np.ndarray], label: str, basis: np.ndarray | None = None):
        if kind not in ("singleton", "hull", "incoherent_basis"):
            raise ValidationError(f"unknown free-set kind {kind!r}")
        if not generators:
            raise ValidationError("a convex free set needs at least one generator")
        self.kind = kind
        self.generators = [require_density(g) for g in generators]
        dims = {g.shape[0] for g in self.generators}
        if len(dims) != 1:
            raise ValidationError(f"generators have mixed dimensions {sorted(dims)}")
        self.label = label
        self.basis = basis

    @classmethod
    def singleton(cls, sigma, label: str = "singleton") -> "ConvexFreeSet":
        return cls("singleton", [sigma], label)

    @classmethod
    def hull(cls, states, label: str = "hull") -> "ConvexFreeSet":
        return cls("hull", list(states), label)

    @classmethod
    def incoherent_basis(cls, vectors, label: str = "incoherent", tol: float = 1e-10) -> "ConvexFreeSet":
        """States diagonal in the given orthonormal basis (columns of ``vectors``)."""
        u = np.asarray(vectors, dtype=np.complex128)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError("incoherent basis needs a square matrix of basis columns")
        gram = u.conj().T @ u
        if np.max(np.abs(gram - np.eye(u.shape[0]))) > tol:
            raise ValidationError("incoherent basis vectors are not orthonormal")
        projectors = [np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])]
        return cls("incoherent_basis", projectors, label, basis=u)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def __repr__(self) -> str:
        return f"ConvexFreeSet({self.kind}, dim={self.dim}, label={self.label!r})"


class FreeSetUnion:
    """A finite union of convex free subsets sharing one dimension."""

    def __init__(self, subsets: list[ConvexFreeSet]):
        if not subsets:
            raise ValidationError("a free-set union needs at least one subset")
        dims = {fs.dim for fs in subsets}
        if len(dims) != 1:
            raise ValidationError(f"subsets have mixed dimensions {sorted(dims)}")
        labels = [fs.label for fs in subsets]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"subset labels must be unique, got {labels}")
        self.subsets = list(subsets)

    @property
    def dim(self) -> int:
        return self.subsets[0].dim

    @property
    def labels(self) -> list[str]:
        return [fs.label for fs in self.subsets]

    def __iter__(self):
        return iter(self.subsets)


def qubit_axis_union(axes: str = "xyz") -> FreeSetUnion:
    """Union of single-qubit incoherent bases for the requested axes."""
    columns = {
        "x": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
        "y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
        "z": np.eye(2, dtype=complex),
    }
    subsets = []
    for axis in axes:
        if axis not in columns:
            raise ValidationError(f"unknown axis {axis!r}; expected letters from 'xyz'")
        subsets.append(ConvexFreeSet.incoherent_basis(columns[axis], label=axis))
    return FreeSetUnion(subsets)


def barycenter(fs: ConvexFreeSet) -> np.ndarray:
    """Uniform mixture of the generators."""
    return sum(fs.generators) / len(fs.generators)


def support_projector(m: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Orthogonal projector onto the range of a PSD operator."""
    w, v = eigh_hermitian(m)
    cols = v[:, w > cutoff]
    return cols @ cols.conj().T


def support_contains(fs: ConvexFreeSet, rho, leak_tol: float = 1e-9) -> bool:
    """True iff support(rho) lies inside the support of the barycenter."""
    r = require_density(rho)
    proj = support_projector(barycenter(fs))
    leak = np.trace(r - proj @ r @ proj).real
    return bool(leak <= leak_tol)


def membership(fs: ConvexFreeSet, eta, tol: float = MEMBERSHIP_TOL) -> bool:
    """Trace-norm membership test against the convex subset."""
    e = require_density(eta)
    if e.shape[0] != fs.dim:
        raise ValidationError("dimension mismatch in membership test")
    if fs.kind == "singleton":
        return trace_norm(e - fs.generators[0]) <= tol
    gens = fs.generators

    def distance_neg(p):
        mix = sum(pi * g for pi, g in zip(p, gens))
        return -trace_norm(mix - e)

    def supergrad(p):
        mix = sum(pi * g for pi, g in zip(p, gens))
        w, v = eigh_hermitian(mix - e)
        sign = v @ np.diag(np.sign(w)) @ v.conj().T
        return np.array([-np.trace(sign @ g).real for g in gens])

    _, best = maximize_on_simplex(distance_neg, supergrad, len(gens))
    return bool(-best <= tol)


def sample(fs: ConvexFreeSet, n: int, seed: int) -> list[np.ndarray]:
    """Deterministic samples from the subset.

    Singletons repeat their state.  Hulls return each generator, the
    barycenter, and n Dirichlet(1, ..., 1) mixtures.
    """
    if n < 1:
        raise ValidationError(f"sample count must be >= 1, got {n}")
    if fs.kind == "singleton":
        return [fs.generators[0]] * n
    rng = np.random.default_rng(seed)
    out = list(fs.generators)
    out.append(barycenter(fs))
    k = len(fs.generators)
    for _ in range(n):
        weights = rng.dirichlet(np.ones(k))
        out.append(sum(w * g for w, g in zip(weights, fs.generators)))
    return out


def segment_grid(fs: ConvexFreeSet, n: int) -> list[np.ndarray]:
    """Evenly spaced states along a two-generator hull (used for qubit bases)."""
    if len(fs.generators) != 2:
        raise ValidationError("segment grid needs exactly two generators")
    a, b = fs.generators
    return [(1.0 - t) * a + t * b for t in np.linspace(0.0, 1.0, n)]
