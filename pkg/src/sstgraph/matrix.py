"""Matrix views of a graph: adjacency, stepping operators, ranking and entropy.

Adjacency entries follow the usual convention ``A[i, j] = weight(i -> j)``.
Reverse-oriented links are folded into their forward reading first, so the
transpose ``A.T`` is always the operator that moves node values forward along
arrows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    ALL_TYPES,
    Graph,
    LinkFamily,
    MetaType,
    SignedLinkType,
    allowed_transition,
    forward_type,
    join_types,
)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000
SINGULAR_TOL = 1e-12
EXACT_DET_LIMIT = 12


class ZeroMatrix(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, result: SpectralResult) -> None:
        self.result = result
        super().__init__("; ".join(result.warnings) or "power iteration did not converge")


@dataclass
class AdjacencyView:
    node_order: list[int]
    entries: np.ndarray
    family_filter: LinkFamily | None = None
    signed: bool = True

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=float)
        n = len(self.node_order)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} does not match {n} nodes")

    @classmethod
    def from_array(cls, entries: Sequence[Sequence[float]] | np.ndarray) -> AdjacencyView:
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("adjacency must be square")
        return cls(list(range(arr.shape[0])), arr)

    @property
    def size(self) -> int:
        return len(self.node_order)

    @property
    def T(self) -> AdjacencyView:
        return AdjacencyView(list(self.node_order), self.entries.T.copy(), self.family_filter, self.signed)

    def index(self, nid: int) -> int:
        return self.node_order.index(nid)


@dataclass
class ValueVector:
    node_order: list[int]
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.node_order),):
            raise ValueError("value vector length does not match its node order")

    @classmethod
    def ones(cls, order: Sequence[int]) -> ValueVector:
        return cls(list(order), np.ones(len(order)))

    def as_dict(self) -> dict[int, float]:
        return {nid: float(x) for nid, x in zip(self.node_order, self.values)}


def adjacency(
    g: Graph,
    family: LinkFamily | None = None,
    *,
    signed: bool = True,
    order: Sequence[int] | None = None,
) -> AdjacencyView:
    """Weighted adjacency of ``g``, optionally restricted to one family.

    With ``signed`` (the default) each link lands at its forward reading and
    NEAR links fill both (i, j) and (j, i).  ``signed=False`` ignores direction
    entirely and every link fills both cells.
    """
    node_order = list(order) if order is not None else [n.id for n in g.ordered_nodes()]
    pos = {nid: i for i, nid in enumerate(node_order)}
    A = np.zeros((len(node_order), len(node_order)))
    for link in g.links:
        if family is not None and link.family is not family:
            continue
        fwd = link.canonical()
        i, j = pos[fwd.src], pos[fwd.dst]
        A[i, j] += link.weight
        if (link.family is LinkFamily.N or not signed) and i != j:
            A[j, i] += link.weight
    return AdjacencyView(node_order, A, family, signed)


def _check(A: AdjacencyView, v: ValueVector) -> None:
    if list(v.node_order) != list(A.node_order):
        raise ValueError("value vector does not conform to the adjacency node order")


def forward_step(A: AdjacencyView, v: ValueVector) -> ValueVector:
    """Move values one hop along the arrows: ``A.T @ v``."""
    _check(A, v)
    return ValueVector(list(A.node_order), A.entries.T @ v.values)


def backward_step(A: AdjacencyView, v: ValueVector) -> ValueVector:
    """Move values one hop against the arrows: ``A @ v``."""
    _check(A, v)
    return ValueVector(list(A.node_order), A.entries @ v.values)


def graph_gradient(v: ValueVector, g: Graph) -> list[tuple]:
    """``(link, v[src] - v[dst])`` for each link, read in its forward direction."""
    values = v.as_dict()
    out = []
    for link in g.links:
        fwd = link.canonical()
        out.append((link, values[fwd.src] - values[fwd.dst]))
    return out


# ---------------------------------------------------------------------------
# Spectral ranking
# ---------------------------------------------------------------------------

@dataclass
class SpectralResult:
    eigenvalue: float
    vector: ValueVector
    iterations: int
    residual: float
    damped: bool
    converged: bool = True
    degenerate: bool = False
    absorbing: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def principal_eigenvector(
    A: AdjacencyView,
    damping: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    strict: bool = False,
) -> SpectralResult:
    """Power iteration on the forward operator ``A.T``.

    Without damping this is plain iteration from the all-ones vector with
    1-norm renormalization.  With ``damping=d`` the operator becomes
    ``d * A.T + (1 - d) / N * ones``, which is strictly positive and so always
    has a unique positive principal eigenvector.  Absorbing nodes (zero rows
    of ``A``) make the undamped result degenerate; the result is flagged and,
    if ``strict``, NonConvergence is raised carrying it.
    """
    n = A.size
    if n == 0:
        raise ValueError("cannot rank an empty graph")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if damping is not None and not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if not np.any(A.entries):
        raise ZeroMatrix("adjacency matrix is all zero")

    M = A.entries.T
    if damping is not None:
        M = damping * M + (1.0 - damping) / n * np.ones((n, n))
    absorbing = [A.node_order[i] for i in np.flatnonzero(~A.entries.any(axis=1))]

    v = np.full(n, 1.0 / n)
    lam, residual, converged, collapsed = 0.0, math.inf, False, False
    it = 0
    for it in range(1, max_iter + 1):
        w = M @ v
        lam = float(w.sum())
        if lam <= 0.0:
            collapsed = True
            lam, residual = 0.0, float(np.max(np.abs(w)))
            break
        residual = float(np.max(np.abs(w - lam * v)))
        if residual < tol:
            converged = True
            break
        v = w / lam

    warnings = []
    degenerate = collapsed or (damping is None and bool(absorbing))
    if absorbing and damping is None:
        warnings.append("absorbing nodes detected; pass a damping factor to rank them")
    if collapsed:
        warnings.append("iteration collapsed to the zero vector")
        converged = False
    elif not converged:
        warnings.append(f"no convergence after {max_iter} iterations (residual {residual:.3g})")
    result = SpectralResult(
        eigenvalue=lam,
        vector=ValueVector(list(A.node_order), v),
        iterations=it,
        residual=residual,
        damped=damping is not None,
        converged=converged,
        degenerate=degenerate,
        absorbing=absorbing,
        warnings=warnings,
    )
    if strict and (degenerate or not converged):
        raise NonConvergence(result)
    return result


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def entropy(values: ValueVector | Sequence[float], base: int = 2) -> float:
    """Shannon entropy of the normalized values, in units of ``log base``."""
    if isinstance(base, bool) or int(base) != base or base < 2:
        raise ValueError("entropy base must be an integer >= 2")
    x = np.asarray(values.values if isinstance(values, ValueVector) else values, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("entropy needs finite non-negative values")
    total = x.sum()
    if total <= 0:
        raise ValueError("entropy of an all-zero vector is undefined")
    p = x[x > 0] / total
    return float(-(p * np.log(p)).sum() / math.log(base)) + 0.0


def flow_weights(g: Graph, node: int, family: LinkFamily) -> tuple[list[float], list[float]]:
    """Incoming and outgoing link weights at ``node`` for one family."""
    incoming, outgoing = [], []
    for link in g.links_of(family):
        fwd = link.canonical()
        ends = [(fwd.src, fwd.dst)]
        if family is LinkFamily.N:
            ends.append((fwd.dst, fwd.src))
        for s, d in ends:
            if d == node:
                incoming.append(link.weight)
            if s == node:
                outgoing.append(link.weight)
    return incoming, outgoing


def node_entropy_delta(g: Graph, node: int, family: LinkFamily) -> float:
    """Entropy of the outflow distribution minus that of the inflow."""
    g.node(node)
    incoming, outgoing = flow_weights(g, node, family)
    if not incoming and not outgoing:
        raise ValueError(f"node {node} has no {family.value} links")
    base = max(len(incoming), len(outgoing), 2)

    def side(ws: list[float]) -> float:
        return entropy(ws, base) if sum(ws) > 0 else 0.0

    return side(outgoing) - side(incoming)


# ---------------------------------------------------------------------------
# Singularity
# ---------------------------------------------------------------------------

@dataclass
class SingularityReport:
    determinant: float
    zero_rows: list[int]
    zero_cols: list[int]
    invertible: bool
    exact: bool


def exact_determinant(entries: np.ndarray) -> Fraction:
    """Fraction-free (Bareiss) elimination over the exact binary values."""
    m = [[Fraction(float(x)) for x in row] for row in entries]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def singularity_report(A: AdjacencyView | np.ndarray, tol: float = SINGULAR_TOL) -> SingularityReport:
    view = A if isinstance(A, AdjacencyView) else AdjacencyView.from_array(A)
    E = view.entries
    exact = view.size <= EXACT_DET_LIMIT
    det = float(exact_determinant(E)) if exact else float(np.linalg.det(E))
    zero_rows = [view.node_order[i] for i in np.flatnonzero(~E.any(axis=1))]
    zero_cols = [view.node_order[j] for j in np.flatnonzero(~E.any(axis=0))]
    return SingularityReport(det, zero_rows, zero_cols, abs(det) > tol, exact)


def inverse_3x3(M: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Inverse of a 3x3 matrix by the adjugate (transposed cofactor) formula."""
    (a, b, c), (d, e, f), (h, i, j) = np.asarray(M, dtype=float)
    det = a * (e * j - i * f) - b * (d * j - h * f) + c * (d * i - h * e)
    if det == 0:
        raise ZeroDivisionError("matrix is singular (determinant 0)")
    adj = np.array([
        [e * j - i * f, -(b * j - i * c), b * f - e * c],
        [-(d * j - h * f), a * j - h * c, -(a * f - d * c)],
        [d * i - h * e, -(a * i - h * b), a * e - d * b],
    ])
    return adj / det


# ---------------------------------------------------------------------------
# The gamma(3,4) skeleton
# ---------------------------------------------------------------------------

META_AXIS = (MetaType.EVENT, MetaType.THING, MetaType.CONCEPT)
INCIDENCE_AXIS = ("L", "C", "E", "N_e", "N_t", "N_c")
JOIN_AXIS = (LinkFamily.L, LinkFamily.C, LinkFamily.E, LinkFamily.N)

_P, _M = 1, -1
_PM = frozenset({1, -1})


def _types(*names: str) -> frozenset[SignedLinkType]:
    return frozenset(SignedLinkType.parse(n) for n in names)


@dataclass(frozen=True)
class SkeletonMatrices:
    I_plus: np.ndarray
    I_minus: np.ndarray
    A_meta: tuple[tuple[frozenset, ...], ...]
    generators: dict[LinkFamily, tuple[tuple[frozenset, ...], ...]]


def skeleton() -> SkeletonMatrices:
    """The offer/acceptance incidence matrices and meta-adjacency as printed.

    Generator cells hold the set of printed orientations: ``{+1, -1}`` for
    ``±1``, ``{0}`` for the NEAR diagonal, and the empty set for 0.
    """
    I_plus = np.array([
        [1, 1, 1, 1, 0, 0],
        [0, 1, 1, 0, 1, 0],
        [0, 0, 1, 0, 0, 1],
    ])
    I_minus = np.array([
        [1, 0, 0],
        [1, 1, 0],
        [1, 0, 1],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
    ])
    A_meta = (
        (_types("+L", "-L", "+C", "-C", "+E", "-E", "N"), _types("+C"), _types("+E")),
        (_types("-C"), _types("+C", "-C", "N"), _types("+E")),
        (_types("-E"), _types("-E"), _types("+E", "-E", "N")),
    )
    z: frozenset = frozenset()
    gens = {
        LinkFamily.L: ((_PM, z, z), (z, z, z), (z, z, z)),
        LinkFamily.C: ((_PM, frozenset({_P}), z), (frozenset({_M}), _PM, z), (z, z, z)),
        LinkFamily.E: (
            (_PM, z, frozenset({_M})),
            (z, z, frozenset({_P})),
            (frozenset({_M}), frozenset({_M}), _PM),
        ),
        LinkFamily.N: ((frozenset({0}), z, z), (z, frozenset({0}), z), (z, z, frozenset({0}))),
    }
    return SkeletonMatrices(I_plus, I_minus, A_meta, gens)


def derived_meta_adjacency() -> tuple[tuple[frozenset, ...], ...]:
    """Cell (i, j) = every signed type allowed from meta i to meta j."""
    return tuple(
        tuple(frozenset(t for t in ALL_TYPES if allowed_transition(a, t, b)) for b in META_AXIS)
        for a in META_AXIS
    )


def derived_generator(family: LinkFamily) -> tuple[tuple[frozenset, ...], ...]:
    return tuple(
        tuple(
            frozenset(t.orientation for t in ALL_TYPES if t.family is family and allowed_transition(a, t, b))
            for b in META_AXIS
        )
        for a in META_AXIS
    )


def forward_family_counts() -> np.ndarray:
    """Number of families with a legal forward arrow from meta i to meta j."""
    return np.array([
        [sum(allowed_transition(a, forward_type(f), b) for f in LinkFamily) for b in META_AXIS]
        for a in META_AXIS
    ])


def _fmt_types(cell: frozenset) -> str:
    return ",".join(str(t) for t in sorted(cell, key=lambda t: t.sort_key)) or "0"


def _fmt_signs(cell: frozenset) -> str:
    if not cell:
        return "0"
    if cell == _PM:
        return "±1"
    (o,) = cell
    return {1: "+1", -1: "-1", 0: "1"}[o]


@dataclass
class FactorizationReport:
    product: np.ndarray
    derived: np.ndarray
    cartan_diagonal: list[int]
    cartan_is_scalar: bool
    offdiag_mismatches: list[dict]
    adjacency_mismatches: list[dict]
    generator_mismatches: list[dict]

    @property
    def offdiag_agrees(self) -> bool:
        return not self.offdiag_mismatches

    def as_dict(self) -> dict:
        return {
            "product": self.product.tolist(),
            "derived_forward_counts": self.derived.tolist(),
            "cartan_diagonal": self.cartan_diagonal,
            "cartan_is_scalar": self.cartan_is_scalar,
            "offdiag_agrees": self.offdiag_agrees,
            "offdiag_mismatches": self.offdiag_mismatches,
            "adjacency_mismatches": self.adjacency_mismatches,
            "generator_mismatches": self.generator_mismatches,
        }


def check_factorization() -> FactorizationReport:
    """Multiply the printed incidence matrices and compare with the transition table.

    The derived meta-adjacency counts, per (i, j), the families with a legal
    forward arrow i -> j.  Off-diagonal cells of the product are compared with
    it; the diagonal difference is reported as the Cartan part.  Every cell of
    the printed meta-adjacency and generators is also compared with its
    transition-table counterpart.
    """
    sk = skeleton()
    product = sk.I_plus @ sk.I_minus
    derived = forward_family_counts()
    sym = [m.symbol for m in META_AXIS]
    offdiag = [
        {"row": sym[i], "col": sym[j], "product": int(product[i, j]), "derived": int(derived[i, j])}
        for i in range(3) for j in range(3)
        if i != j and product[i, j] != derived[i, j]
    ]
    cartan = [int(product[i, i] - derived[i, i]) for i in range(3)]
    adj = derived_meta_adjacency()
    adj_mis = [
        {"row": sym[i], "col": sym[j], "printed": _fmt_types(sk.A_meta[i][j]), "derived": _fmt_types(adj[i][j])}
        for i in range(3) for j in range(3)
        if sk.A_meta[i][j] != adj[i][j]
    ]
    gen_mis = []
    for fam, printed in sk.generators.items():
        der = derived_generator(fam)
        for i in range(3):
            for j in range(3):
                if printed[i][j] != der[i][j]:
                    gen_mis.append({
                        "generator": f"A_{fam.value}", "row": sym[i], "col": sym[j],
                        "printed": _fmt_signs(printed[i][j]), "derived": _fmt_signs(der[i][j]),
                    })
    return FactorizationReport(
        product=product,
        derived=derived,
        cartan_diagonal=cartan,
        cartan_is_scalar=len(set(cartan)) == 1,
        offdiag_mismatches=offdiag,
        adjacency_mismatches=adj_mis,
        generator_mismatches=gen_mis,
    )


#: The path join matrix as printed: rows are the incoming arrow family,
#: columns the outgoing one.
PRINTED_JOIN: dict[tuple[LinkFamily, LinkFamily], frozenset[MetaType]] = {}
_JOIN_ROWS = {
    LinkFamily.L: ("e", "e", "e", "e"),
    LinkFamily.C: ("e", "et", "et", "et"),
    LinkFamily.E: ("e", "et", "etc", "etc"),
    LinkFamily.N: ("e", "et", "etc", "etc"),
}
for _row, _cells in _JOIN_ROWS.items():
    for _col, _cell in zip(JOIN_AXIS, _cells):
        PRINTED_JOIN[(_row, _col)] = frozenset(MetaType.parse(s) for s in _cell)


def _fmt_metas(ms: frozenset[MetaType]) -> str:
    return ",".join(m.symbol for m in sorted(ms, key=lambda m: m.rank)) or "-"


def join_report() -> dict:
    """Derived join matrix next to the printed one, with every differing cell."""
    derived = {k: join_types(*k) for k in PRINTED_JOIN}
    return {
        "axis": [f.value for f in JOIN_AXIS],
        "derived": [[_fmt_metas(derived[(a, b)]) for b in JOIN_AXIS] for a in JOIN_AXIS],
        "printed": [[_fmt_metas(PRINTED_JOIN[(a, b)]) for b in JOIN_AXIS] for a in JOIN_AXIS],
        "differences": [
            {"first": a.value, "second": b.value,
             "derived": _fmt_metas(derived[(a, b)]), "printed": _fmt_metas(PRINTED_JOIN[(a, b)])}
            for a in JOIN_AXIS for b in JOIN_AXIS
            if derived[(a, b)] != PRINTED_JOIN[(a, b)]
        ],
    }

