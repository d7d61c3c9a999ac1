"""Dense multipartite states: construction, validation, partial traces and
the small amount of linear algebra the rest of the package leans on."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
NORM_ATOL = 1e-12
# spectra drifting from unit trace by more than this are renormalized
RENORM_ATOL = 1e-12

Parties = Union[Sequence[Union[str, int]], str, int]


def default_labels(n: int) -> tuple[str, ...]:
    """``("A", "B1", ..., "B{n-1}")``."""
    return ("A",) + tuple(f"B{i}" for i in range(1, n))


def _check_dims(dims, labels, size):
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise ValueError(f"subsystem dimensions must all be >= 2, got {dims}")
    if int(np.prod(dims)) != size:
        raise ValueError(f"dims {dims} do not match total dimension {size}")
    labels = default_labels(len(dims)) if labels is None else tuple(str(s) for s in labels)
    if len(labels) != len(dims):
        raise ValueError("need exactly one label per subsystem")
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate party labels {labels}")
    return dims, labels


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


class _Parties:
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def indices(self, parties: Parties) -> list[int]:
        """Resolve labels and/or integer positions to sorted party indices."""
        if isinstance(parties, (str, int, np.integer)):
            parties = [parties]
        out = []
        for p in parties:
            if isinstance(p, (int, np.integer)):
                if not 0 <= p < self.n_parties:
                    raise ValueError(f"party index {p} out of range")
                out.append(int(p))
            elif p in self.labels:
                out.append(self.labels.index(p))
            else:
                raise ValueError(f"unknown party {p!r}; parties are {self.labels}")
        if len(set(out)) != len(out):
            raise ValueError(f"party listed twice in {parties}")
        return sorted(out)

    def complement(self, parties: Parties) -> list[int]:
        idx = set(self.indices(parties))
        return [i for i in range(self.n_parties) if i not in idx]


@dataclass(frozen=True, eq=False)
class MultipartiteState(_Parties):
    """Density matrix on ``prod(dims)`` with one label per subsystem.

    ``name`` records factory provenance (e.g. ``"ghz:4"``) and is dropped by
    every operation that derives a new state.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...] = None
    name: str | None = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        dims, labels = _check_dims(self.dims, self.labels, m.shape[0])
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian (deviation {dev:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1) > TRACE_ATOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        lmin = np.linalg.eigvalsh(m)[0]
        if lmin < -PSD_ATOL:
            raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lmin:.3g})")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    def density(self) -> "MultipartiteState":
        return self

    def marginal(self, keep: Parties) -> "MultipartiteState":
        return partial_trace(self, keep)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def relabel(self, labels: Sequence[str]) -> "MultipartiteState":
        return MultipartiteState(self.matrix, self.dims, tuple(labels), self.name)


@dataclass(frozen=True, eq=False)
class PureState(_Parties):
    """State vector on ``prod(dims)``."""

    vector: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...] = None
    name: str | None = None

    def __post_init__(self):
        v = _frozen(self.vector)
        if v.ndim != 1:
            raise ValueError("state vector must be one-dimensional")
        dims, labels = _check_dims(self.dims, self.labels, v.shape[0])
        nrm = np.vdot(v, v).real
        if abs(nrm - 1) > NORM_ATOL:
            raise ValueError(f"squared norm is {nrm!r}, expected 1")
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    def density(self) -> MultipartiteState:
        v = self.vector
        return MultipartiteState(np.outer(v, v.conj()), self.dims, self.labels, self.name)

    def marginal(self, keep: Parties) -> MultipartiteState:
        return partial_trace(self, keep)

    def relabel(self, labels: Sequence[str]) -> "PureState":
        return PureState(self.vector, self.dims, tuple(labels), self.name)


State = Union[MultipartiteState, PureState]


@dataclass(frozen=True, eq=False)
class PauliPair:
    dimension: int
    Z: np.ndarray
    X: np.ndarray
    omega: complex


def tensor(a: State, b: State) -> State:
    """Kronecker product; labels of ``b`` are suffixed if they clash with ``a``.

    Two pure states give a pure state, anything else a density matrix.
    """
    labels = list(a.labels)
    for lab in b.labels:
        new = lab
        while new in labels:
            new = new + "'"
        labels.append(new)
    dims = a.dims + b.dims
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.vector, b.vector), dims, labels)
    return MultipartiteState(np.kron(a.density().matrix, b.density().matrix), dims, labels)


def permute_matrix(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator on ``prod(dims)``."""
    n = len(dims)
    t = np.asarray(matrix).reshape(tuple(dims) * 2)
    t = t.transpose(list(order) + [n + i for i in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def split_matrix(s: State, b: Parties) -> tuple[np.ndarray, int, int]:
    """Density matrix reordered as ``rest (x) b`` together with both sizes."""
    rho = s.density()
    bi = rho.indices(b)
    ai = rho.complement(bi)
    if not ai or not bi:
        raise ValueError("bipartition needs parties on both sides")
    m = permute_matrix(rho.matrix, rho.dims, ai + bi)
    da = int(np.prod([rho.dims[i] for i in ai]))
    return m, da, m.shape[0] // da


def partial_trace(s: State, keep: Parties) -> MultipartiteState:
    """Reduced state on ``keep``; kept parties stay in their original order."""
    if isinstance(keep, (list, tuple)) and len(keep) == 0:
        raise ValueError("no parties kept")
    ki = s.indices(keep)
    ti = s.complement(ki)
    dims = tuple(s.dims[i] for i in ki)
    labels = tuple(s.labels[i] for i in ki)
    dk = int(np.prod(dims))
    dt = s.dim // dk
    if isinstance(s, PureState):
        psi = s.vector.reshape(s.dims).transpose(ki + ti).reshape(dk, dt)
        red = psi @ psi.conj().T
    else:
        m = permute_matrix(s.matrix, s.dims, ki + ti).reshape(dk, dt, dk, dt)
        red = np.einsum("ajbj->ab", m)
    red = 0.5 * (red + red.conj().T)
    return MultipartiteState(red, dims, labels)


def eig_hermitian(s, clip: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    With ``clip`` the eigenvalues are clipped to ``[0, 1]`` after checking
    that none is below ``-PSD_ATOL``.
    """
    m = s.density().matrix if isinstance(s, (MultipartiteState, PureState)) else np.asarray(s)
    dev = np.max(np.abs(m - m.conj().T))
    if dev > HERMITIAN_ATOL:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3g})")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w, v = w[::-1], v[:, ::-1]
    if clip:
        if w[-1] < -PSD_ATOL:
            raise ValueError(f"negative eigenvalue {w[-1]:.3g}")
        w = np.clip(w, 0.0, 1.0)
    return w, v


def state_spectrum(s) -> np.ndarray:
    """Clipped eigenvalues of a state, renormalized if the trace drifted."""
    w, _ = eig_hermitian(s)
    tot = w.sum()
    if abs(tot - 1) > RENORM_ATOL:
        w = w / tot
    return w


def canonical_eigenbasis(matrix: np.ndarray, atol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with a reproducible basis inside degenerate eigenspaces.

    Eigenvalues are descending. Each cluster of eigenvalues within ``atol`` is
    re-spanned by Gram-Schmidt on the projector applied to the standard basis
    vectors in index order, so the result depends only on the eigenspaces.
    Every vector is phased so its first non-negligible component is real
    and positive.
    """
    w, v = eig_hermitian(matrix, clip=False)
    d = len(w)
    out = np.zeros_like(v)
    i = 0
    while i < d:
        j = i + 1
        while j < d and abs(w[j] - w[i]) <= atol:
            j += 1
        block = v[:, i:j]
        if j - i == 1:
            vecs = [block[:, 0]]
        else:
            proj = block @ block.conj().T
            vecs = []
            for k in range(d):
                u = proj[:, k].copy()
                for b in vecs:
                    u -= np.vdot(b, u) * b
                nrm = np.linalg.norm(u)
                if nrm > 1e-6:
                    vecs.append(u / nrm)
                if len(vecs) == j - i:
                    break
        for k, u in enumerate(vecs):
            lead = u[np.argmax(np.abs(u) > 1e-9)]
            out[:, i + k] = u * (abs(lead) / lead)
        i = j
    return w, out


def purify(s: State) -> PureState:
    """Purification on ``s`` plus an environment ``"E"`` of dimension ``max(rank, 2)``."""
    if isinstance(s, PureState):
        s = s.density()
    w, v = eig_hermitian(s)
    keep = w > 1e-14
    w, v = w[keep] / w[keep].sum(), v[:, keep]
    r = len(w)
    de = max(r, 2)
    env = np.eye(de)[:, :r]
    vec = np.einsum("k,ik,jk->ij", np.sqrt(w), v, env).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    label = "E"
    while label in s.labels:
        label += "'"
    return PureState(vec, s.dims + (de,), s.labels + (label,))


def generalized_paulis(d: int, basis: np.ndarray | None = None) -> PauliPair:
    """Clock ``Z`` and shift ``X`` in the orthonormal ``basis`` (columns)."""
    if d < 2:
        raise ValueError("Pauli dimension must be >= 2")
    e = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if e.shape != (d, d):
        raise ValueError(f"basis must be {d}x{d} (one vector per column)")
    if np.max(np.abs(e.conj().T @ e - np.eye(d))) > 1e-10:
        raise ValueError("basis vectors are not orthonormal")
    omega = np.exp(2j * np.pi / d)
    z = (e * omega ** np.arange(d)) @ e.conj().T
    x = np.roll(e, -1, axis=1) @ e.conj().T
    return PauliPair(d, z, x, complex(omega))


# random states

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_isometry(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """``m x r`` matrix with orthonormal columns, Haar distributed."""
    return haar_unitary(m, rng)[:, :r]


def random_pure(dims: Sequence[int], rng: np.random.Generator, labels=None) -> PureState:
    d = int(np.prod(dims))
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(v / np.linalg.norm(v), tuple(dims), labels)


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None,
                   labels=None) -> MultipartiteState:
    """Induced-measure random state of the given rank (full rank by default)."""
    d = int(np.prod(dims))
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}]")
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return MultipartiteState(0.5 * (rho + rho.conj().T), tuple(dims), labels)


# named states

_QUBIT = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}

KNOWN_STATES = (
    "ghz:N",
    "w:N",
    "bell:+",
    "bell:-",
    "product:<qubits from 0,1,+,->",
    "haar:N[:seed=S]",
    "mixed:N[:seed=S][:rank=R]",
)


def _options(parts):
    opts = {}
    for p in parts:
        key, sep, val = p.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {p!r}")
        opts[key] = int(val)
    return opts


def make_named_state(spec: str) -> State:
    """Build a state from a short descriptor such as ``"ghz:4"`` or ``"haar:3:seed=7"``.

    Qubit counts include party ``A``; parties are labelled ``A, B1, B2, ...``.
    """
    head, *rest = spec.strip().split(":")
    try:
        if head in ("ghz", "w"):
            n = int(rest[0])
            if n < 2 or len(rest) != 1:
                raise ValueError
            v = np.zeros(2**n, dtype=complex)
            if head == "ghz":
                v[0] = v[-1] = 1 / np.sqrt(2)
            else:
                v[[2**k for k in range(n)]] = 1 / np.sqrt(n)
            return PureState(v, (2,) * n, name=spec)
        if head == "bell" and rest in (["+"], ["-"]):
            sign = 1 if rest[0] == "+" else -1
            return PureState(np.array([1, 0, 0, sign]) / np.sqrt(2), (2, 2), name=spec)
        if head == "product" and len(rest) == 1 and re.fullmatch(r"[01+\-]{2,}", rest[0]):
            v = reduce(np.kron, [_QUBIT[c] for c in rest[0]])
            return PureState(v, (2,) * len(rest[0]), name=spec)
        if head == "haar":
            n = int(rest[0])
            opts = _options(rest[1:])
            if set(opts) - {"seed"} or n < 2:
                raise ValueError
            rng = np.random.default_rng(opts.get("seed", 0))
            st = random_pure((2,) * n, rng)
            return PureState(st.vector, st.dims, name=spec)
        if head == "mixed":
            n = int(rest[0])
            opts = _options(rest[1:])
            if set(opts) - {"seed", "rank"} or n < 2:
                raise ValueError
            rng = np.random.default_rng(opts.get("seed", 0))
            st = random_density((2,) * n, rng, opts.get("rank"))
            return MultipartiteState(st.matrix, st.dims, name=spec)
    except (IndexError, ValueError):
        pass
    raise ValueError(f"unknown state spec {spec!r}; known specs: {', '.join(KNOWN_STATES)}")

