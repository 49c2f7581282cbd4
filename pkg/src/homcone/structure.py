"""Block structures V = {V_lk} and the ambient space Z_V.

A block structure fixes a partition ``N = n_1 + ... + n_r`` and, for every
pair ``k < l``, a subspace ``V_lk`` of ``n_l x n_k`` matrices.  The space
``Z_V`` consists of symmetric ``N x N`` matrices whose diagonal blocks are
scalar multiples of the identity and whose ``(l, k)`` blocks lie in ``V_lk``.

Indices are 0-based in the Python API.  The JSON cone-spec format uses
1-based ``"l,k"`` keys.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NotHomogeneous, NotInZ, StructureError

TOL_STRUCT = 1e-9
_ORTHO_KEEP = 1e-13
_RANK_TOL = 1e-10
MAX_GRAPH_VERTICES = 12


def _block_inner(A, B, n_l):
    """(A|B) = tr(A B^T) / n_l."""
    return float(np.sum(A * B)) / n_l


def _orthonormalize(mats, n_l):
    """Modified Gram-Schmidt w.r.t. (.|.); input returned untouched if already orthonormal."""
    mats = [np.array(m, dtype=float) for m in mats]
    if not mats:
        return mats
    gram = np.array([[_block_inner(a, b, n_l) for b in mats] for a in mats])
    if np.max(np.abs(gram - np.eye(len(mats)))) <= _ORTHO_KEEP:
        return mats
    out = []
    for m in mats:
        v = m.copy()
        norm0 = np.sqrt(_block_inner(v, v, n_l))
        for q in out:
            v -= _block_inner(v, q, n_l) * q
        norm = np.sqrt(_block_inner(v, v, n_l))
        if norm0 == 0.0 or norm <= _RANK_TOL * norm0:
            raise StructureError("rank-deficient spanning set for a block subspace")
        out.append(v / norm)
    return out


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_structure`.

    ``residuals`` maps each condition (``"V1"``, ``"V2"``, ``"V3"``,
    ``"orthonormal"``) to the worst residual found; a condition passes when its
    residual is at most ``tol``.
    """

    residuals: dict
    tol: float
    witnesses: dict = field(default_factory=dict)

    @property
    def passed(self):
        return {name: res <= self.tol for name, res in self.residuals.items()}

    @property
    def ok(self):
        return all(self.passed.values())

    def __str__(self):
        lines = []
        for name, res in self.residuals.items():
            flag = "pass" if res <= self.tol else "FAIL"
            line = f"{name:<12s} {flag}  residual={res:.3e}  tol={self.tol:.1e}"
            if name in self.witnesses:
                line += f"  at {self.witnesses[name]}"
            lines.append(line)
        return "\n".join(lines)


class BlockStructure:
    """A system of block subspaces defining Z_V, P_V and Q_V.

    Parameters
    ----------
    sizes : sequence of int
        Block sizes ``n_1, ..., n_r``.
    blocks : dict, optional
        Maps ``(l, k)`` with ``l > k`` (0-based) to a list of ``n_l x n_k``
        matrices spanning ``V_lk``.  Missing pairs mean ``V_lk = {0}``.
        Spanning sets are orthonormalized with respect to
        ``(A|B) = tr(A B^T) / n_l``.
    labels : sequence, optional
        Names for the blocks (e.g. original graph vertices).

    Notes
    -----
    Instances are immutable.  Elements of ``Z_V`` are handled as full
    symmetric ``N x N`` arrays; ``coords`` and ``from_coords`` convert to and
    from the orthonormal basis ``z_basis`` (trace inner product).
    """

    def __init__(self, sizes, blocks=None, labels=None):
        sizes = tuple(int(n) for n in sizes)
        if not sizes or any(n <= 0 for n in sizes):
            raise StructureError("sizes must be a non-empty list of positive integers")
        self.sizes = sizes
        self.r = len(sizes)
        self.offsets = tuple(int(v) for v in np.concatenate([[0], np.cumsum(sizes)]))
        self.N = self.offsets[-1]
        self.labels = None if labels is None else tuple(labels)
        if self.labels is not None and len(self.labels) != self.r:
            raise StructureError("labels must have one entry per block")

        clean = {}
        for key, mats in (blocks or {}).items():
            l, k = (int(v) for v in key)
            if not (0 <= k < l < self.r):
                raise StructureError(f"block key {(l, k)} must satisfy 0 <= k < l < r")
            mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in mats]
            for m in mats:
                if m.shape != (sizes[l], sizes[k]):
                    raise StructureError(
                        f"V_{l + 1}{k + 1} basis matrix has shape {m.shape}, "
                        f"expected {(sizes[l], sizes[k])}")
            mats = _orthonormalize(mats, sizes[l])
            if mats:
                arr = np.stack(mats)
                arr.setflags(write=False)
                clean[(l, k)] = arr
        self.blocks = clean
        self._build_basis()

    # -- construction helpers -------------------------------------------

    def _build_basis(self):
        N, off = self.N, self.offsets
        basis, index = [], []
        for k in range(self.r):
            e = np.zeros((N, N))
            sl = slice(off[k], off[k + 1])
            e[sl, sl] = np.eye(self.sizes[k]) / np.sqrt(self.sizes[k])
            basis.append(e)
            index.append(("diag", k, k, 0))
            for l in range(k + 1, self.r):
                for c, A in enumerate(self.block_basis(l, k)):
                    e = np.zeros((N, N))
                    e[off[l]:off[l + 1], off[k]:off[k + 1]] = A
                    e[off[k]:off[k + 1], off[l]:off[l + 1]] = A.T
                    basis.append(e / np.sqrt(2.0 * self.sizes[l]))
                    index.append(("off", l, k, c))
        self.z_basis = np.stack(basis)
        self.z_basis.setflags(write=False)
        self.z_index = tuple(index)
        self.dim_z = len(basis)
        self._flat_basis = self.z_basis.reshape(self.dim_z, N * N)

    # -- basic accessors --------------------------------------------------

    def block_basis(self, l, k):
        """Orthonormal basis of V_lk as an array ``(dim, n_l, n_k)``."""
        if (l, k) in self.blocks:
            return self.blocks[(l, k)]
        return np.zeros((0, self.sizes[l], self.sizes[k]))

    def dim(self, l, k):
        return len(self.blocks.get((l, k), ()))

    def block(self, x, l, k):
        """The ``(l, k)`` block of an ``N x N`` matrix (a view)."""
        o = self.offsets
        return x[o[l]:o[l + 1], o[k]:o[k + 1]]

    def leading(self, k):
        """Size ``N_k = n_1 + ... + n_k`` of the k-th leading block (k = 1..r)."""
        return self.offsets[k]

    @property
    def n_vector(self):
        """The shape vector ``(n_1, ..., n_r)`` as floats."""
        return np.array(self.sizes, dtype=float)

    @cached_property
    def quadratic_domains(self):
        """Basis of each column space W_i, as arrays ``(m_i, N, n_i)``.

        The first vector is the identity in the ``(i, i)`` slot, followed by the
        orthonormal bases of ``V_{i+1,i}, ..., V_{r,i}``.
        """
        out = []
        off = self.offsets
        for i in range(self.r):
            ni = self.sizes[i]
            vecs = []
            w = np.zeros((self.N, ni))
            w[off[i]:off[i + 1], :] = np.eye(ni)
            vecs.append(w)
            for l in range(i + 1, self.r):
                for A in self.block_basis(l, i):
                    w = np.zeros((self.N, ni))
                    w[off[l]:off[l + 1], :] = A
                    vecs.append(w)
            arr = np.stack(vecs)
            arr.setflags(write=False)
            out.append(arr)
        return tuple(out)

    @property
    def m(self):
        """Dimensions ``m_i = dim W_i``."""
        return tuple(len(w) for w in self.quadratic_domains)

    # -- Z_V coordinates and the projection pi ---------------------------

    def _check_square(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.N, self.N):
            raise StructureError(f"expected an {self.N}x{self.N} matrix, got shape {x.shape}")
        return x

    def coords(self, x):
        """Coordinates ``tr(x e_a)`` of a symmetric matrix in ``z_basis``."""
        x = self._check_square(x)
        return self._flat_basis @ x.reshape(-1)

    def from_coords(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.dim_z,):
            raise StructureError(f"expected {self.dim_z} coordinates, got shape {c.shape}")
        return (c @ self._flat_basis).reshape(self.N, self.N)

    def project(self, x):
        """The projection pi: Sym(N) -> Z_V dual to the inclusion."""
        x = self._check_square(x)
        x = 0.5 * (x + x.T)
        return self.from_coords(self.coords(x))

    def z_residual(self, x):
        """Max-abs distance between ``x`` and ``pi(x)``, relative to ``max(1, |x|)``."""
        x = self._check_square(x)
        scale = max(1.0, float(np.max(np.abs(x))))
        sym = float(np.max(np.abs(x - x.T)))
        return max(sym, float(np.max(np.abs(x - self.project(x))))) / scale

    def in_z(self, x, tol=TOL_STRUCT):
        return self.z_residual(x) <= tol

    def require_z(self, x, what="point"):
        x = self._check_square(x)
        res = self.z_residual(x)
        if res > TOL_STRUCT:
            raise NotInZ(f"{what} is not in Z_V (residual {res:.2e})")
        return 0.5 * (x + x.T)

    def identity(self):
        return np.eye(self.N)

    # -- serialization ---------------------------------------------------

    def to_dict(self):
        d = {
            "sizes": list(self.sizes),
            "blocks": {
                f"{l + 1},{k + 1}": [A.tolist() for A in arr]
                for (l, k), arr in sorted(self.blocks.items())
            },
        }
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            sizes = d["sizes"]
            raw = d.get("blocks", {})
            blocks = {}
            for key, mats in raw.items():
                l, k = (int(v) - 1 for v in key.split(","))
                blocks[(l, k)] = mats
        except (KeyError, AttributeError, ValueError, TypeError) as exc:
            raise StructureError(f"malformed cone spec: {exc}") from exc
        return cls(sizes, blocks, labels=d.get("labels"))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def digest(self):
        """Short content hash, used in sample-file headers."""
        return hashlib.sha256(self.to_json(sort_keys=True).encode()).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, BlockStructure):
            return NotImplemented
        if self.sizes != other.sizes or self.blocks.keys() != other.blocks.keys():
            return False
        return all(np.array_equal(self.blocks[key], other.blocks[key]) for key in self.blocks)

    def __hash__(self):
        return hash((self.sizes, tuple(sorted(self.blocks))))

    def __repr__(self):
        dims = {f"{l + 1}{k + 1}": len(v) for (l, k), v in sorted(self.blocks.items())}
        return f"BlockStructure(sizes={self.sizes}, dims={dims})"


def project_pi(structure, x):
    """Project a symmetric ``N x N`` matrix onto Z_V (see :meth:`BlockStructure.project`)."""
    return structure.project(x)


# -- validation -------------------------------------------------------------

def _span_residual(M, basis, n_l):
    """Frobenius distance from M to span(basis) (basis orthonormal in (.|.))."""
    R = M.copy()
    for C in basis:
        R -= _block_inner(M, C, n_l) * C
    return float(np.linalg.norm(R))


def validate_structure(structure, tol=TOL_STRUCT):
    """Check conditions V1-V3 and orthonormality of ``z_basis``.

    Returns
    -------
    ValidationReport
        Worst residual per condition; the tolerance is ``tol`` times the
        largest basis-entry magnitude.
    """
    V = structure
    scale = max([1.0] + [float(np.max(np.abs(a))) for a in V.blocks.values()])
    tol = tol * scale
    res = {"V1": 0.0, "V2": 0.0, "V3": 0.0}
    wit = {}

    def record(name, value, where):
        if value > res[name]:
            res[name] = value
            if value > tol:
                wit[name] = where

    for i, k, l in itertools.combinations(range(V.r), 3):
        nl = V.sizes[l]
        for A in V.block_basis(l, k):
            for B in V.block_basis(k, i):
                record("V1", _span_residual(A @ B, V.block_basis(l, i), nl),
                       f"V_{l + 1}{k + 1} x V_{k + 1}{i + 1}")
        for A in V.block_basis(l, i):
            for B in V.block_basis(k, i):
                record("V2", _span_residual(A @ B.T, V.block_basis(l, k), nl),
                       f"V_{l + 1}{i + 1} x V_{k + 1}{i + 1}^T")
    for (l, k), arr in V.blocks.items():
        nl = V.sizes[l]
        for A, B in itertools.combinations_with_replacement(arr, 2):
            S = A @ B.T + B @ A.T
            record("V3", float(np.linalg.norm(S - np.trace(S) / nl * np.eye(nl))),
                   f"V_{l + 1}{k + 1}")
    flat = V.z_basis.reshape(V.dim_z, -1)
    res["orthonormal"] = float(np.max(np.abs(flat @ flat.T - np.eye(V.dim_z))))
    return ValidationReport(res, tol, wit)


# -- presets -------------------------------------------------------------------

def full_structure(n):
    """Sym(n): all n_i = 1 and every V_lk = R."""
    return BlockStructure([1] * n, {(l, k): [[[1.0]]] for l in range(n) for k in range(l)})


def vinberg():
    """Z_V with a zero at (1,2): P_V is the dual Vinberg cone, Q_V the Vinberg cone."""
    return BlockStructure([1, 1, 1], {(2, 0): [[[1.0]]], (2, 1): [[[1.0]]]})


def dual_vinberg():
    """4x4 realization (partition 2,1,1) whose P-cone is the Vinberg cone."""
    return BlockStructure([2, 1, 1], {(1, 0): [[[1.0, 0.0]]], (2, 0): [[[0.0, 1.0]]]})


def preset(name):
    """Named structures: ``"sym(n)"``, ``"vinberg"``, ``"dual_vinberg"``."""
    key = name.strip().lower().replace(" ", "")
    if key == "vinberg":
        return vinberg()
    if key in ("dual_vinberg", "dual-vinberg"):
        return dual_vinberg()
    if key.startswith("sym(") and key.endswith(")"):
        try:
            n = int(key[4:-1])
        except ValueError:
            pass
        else:
            if n >= 1:
                return full_structure(n)
    raise KeyError(f"unknown preset {name!r}")


# -- graphs ------------------------------------------------------------------

def _adjacency(vertices, edges):
    adj = {v: set() for v in vertices}
    for a, b in edges:
        if a == b:
            raise StructureError(f"self-loop at vertex {a}")
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _is_chordal(vertices, adj):
    """Maximum cardinality search followed by a perfect-elimination check."""
    weight = {v: 0 for v in vertices}
    unnumbered = set(vertices)
    order = []
    while unnumbered:
        v = max(sorted(unnumbered, key=repr), key=lambda u: weight[u])
        order.append(v)
        unnumbered.remove(v)
        for u in adj[v]:
            if u in unnumbered:
                weight[u] += 1
    # reverse of the MCS visiting order is a perfect elimination ordering iff chordal
    peo = order[::-1]
    pos = {v: i for i, v in enumerate(peo)}
    for v in peo:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        if not later:
            continue
        parent = min(later, key=lambda u: pos[u])
        if not set(later) - {parent} <= adj[parent]:
            return False
    return True


def _induced_cycle(vertices, adj):
    for size in range(4, len(vertices) + 1):
        for sub in itertools.combinations(vertices, size):
            s = set(sub)
            if any(len(adj[v] & s) != 2 for v in sub):
                continue
            # every vertex has degree 2: walk until the start is reached again
            cycle, prev = [sub[0]], None
            while True:
                nxt = sorted((u for u in adj[cycle[-1]] & s if u != prev), key=repr)[0]
                if nxt == cycle[0]:
                    break
                prev = cycle[-1]
                cycle.append(nxt)
            if len(cycle) == size:
                return tuple(cycle)
    return None


def _induced_a4(vertices, adj):
    for sub in itertools.combinations(vertices, 4):
        s = set(sub)
        degs = {v: len(adj[v] & s) for v in sub}
        if sum(degs.values()) != 6 or sorted(degs.values()) != [1, 1, 2, 2]:
            continue
        start = min((v for v in sub if degs[v] == 1), key=repr)
        path = [start]
        while len(path) < 4:
            nxt = [u for u in adj[path[-1]] & s if u not in path]
            if not nxt:
                break
            path.append(nxt[0])
        if len(path) == 4:
            return tuple(path)
    return None


def _find_ordering(vertices, adj):
    """Order vertices so that the 0/R pattern of V_lk satisfies V1 and V2."""
    r = len(vertices)
    cand = sorted(vertices, key=lambda v: (len(adj[v]), repr(v)))
    order = []
    used = set()

    def ok(v):
        p = len(order)
        for k in range(p):
            vk = order[k]
            for i in range(k):
                vi = order[i]
                # V1: (l,k), (k,i) edges => (l,i)
                if vk in adj[v] and vi in adj[vk] and vi not in adj[v]:
                    return False
                # V2: (l,i), (k,i) edges => (l,k)
                if vi in adj[v] and vi in adj[vk] and vk not in adj[v]:
                    return False
        return True

    def search():
        if len(order) == r:
            return True
        for v in cand:
            if v in used or not ok(v):
                continue
            order.append(v)
            used.add(v)
            if search():
                return True
            order.pop()
            used.remove(v)
        return False

    return tuple(order) if search() else None


def graph_to_structure(edges, vertices=None):
    """Build the graphical structure of a homogeneous decomposable graph.

    Parameters
    ----------
    edges : iterable of pairs
        Undirected edges between hashable vertex labels.
    vertices : iterable, optional
        Full vertex set (needed for isolated vertices).  Defaults to the
        vertices appearing in ``edges``, sorted.

    Returns
    -------
    BlockStructure
        All ``n_i = 1``; ``V_lk = R`` iff the vertices placed at positions
        ``k`` and ``l`` are adjacent.  ``labels`` records the vertex order.

    Raises
    ------
    NotHomogeneous
        With a chordless cycle or an induced 4-vertex path as witness.
    """
    edges = [tuple(e) for e in edges]
    if vertices is None:
        vertices = sorted({v for e in edges for v in e}, key=lambda v: (str(type(v)), v))
    vertices = list(vertices)
    if len(vertices) > MAX_GRAPH_VERTICES:
        raise StructureError(f"graphs with more than {MAX_GRAPH_VERTICES} vertices are unsupported")
    adj = _adjacency(vertices, edges)
    if not _is_chordal(vertices, adj):
        raise NotHomogeneous("chordless-cycle", _induced_cycle(vertices, adj))
    a4 = _induced_a4(vertices, adj)
    if a4 is not None:
        raise NotHomogeneous("induced-A4", a4)
    order = _find_ordering(vertices, adj)
    if order is None:  # pragma: no cover - excluded by the two checks above
        raise NotHomogeneous("no-ordering", ())
    pos = {v: i for i, v in enumerate(order)}
    blocks = {}
    for a, b in edges:
        l, k = max(pos[a], pos[b]), min(pos[a], pos[b])
        blocks[(l, k)] = [[[1.0]]]
    return BlockStructure([1] * len(order), blocks, labels=order)


def read_graph(path):
    """Read a whitespace-separated edge list (1-based labels, one pair per line).

    A line holding a single label declares an isolated vertex; ``#`` starts a
    comment.  Returns ``(vertices, edges)``.
    """
    vertices, edges = set(), []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels = [int(p) for p in parts]
            except ValueError as exc:
                raise StructureError(f"{path}:{lineno}: bad vertex label") from exc
            if len(labels) not in (1, 2) or min(labels) < 1:
                raise StructureError(f"{path}:{lineno}: expected 'i j' with 1-based labels")
            vertices.update(labels)
            if len(labels) == 2:
                edges.append(tuple(labels))
    return sorted(vertices), edges


def write_graph(path, edges, vertices=()):
    present = {v for e in edges for v in e}
    with open(path, "w", encoding="utf-8") as fh:
        for v in sorted(set(vertices) - present):
            fh.write(f"{v}\n")
        for a, b in edges:
            fh.write(f"{a} {b}\n")


def read_structure(path):
    with open(path, encoding="utf-8") as fh:
        return BlockStructure.from_json(fh.read())


def write_structure(path, structure):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(structure.to_json(indent=1))
        fh.write("\n")
