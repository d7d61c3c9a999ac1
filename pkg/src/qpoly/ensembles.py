"""Objects the optimizers search over: pure-state decompositions, rank-1
measurements and the ensembles they induce, plus the ccq construction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    MultipartiteState,
    Parties,
    PureState,
    State,
    canonical_eigenbasis,
    generalized_paulis,
    partial_trace,
    split_matrix,
)

WEIGHT_ATOL = 1e-10
RECONSTRUCTION_ATOL = 1e-10
# outcomes / members lighter than this are dropped
DROP_WEIGHT = 1e-12
RANK_ATOL = 1e-12

Member = Union[PureState, MultipartiteState]


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted states ``{p_i, rho_i}`` on a common system."""

    weights: np.ndarray
    members: tuple[Member, ...]
    parent: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        members = tuple(self.members)
        if len(w) != len(members) or not members:
            raise ValueError("need one weight per member and at least one member")
        if np.any(w < 0) or abs(w.sum() - 1) > WEIGHT_ATOL:
            raise ValueError("weights must be non-negative and sum to 1")
        if len({m.dims for m in members}) != 1:
            raise ValueError("ensemble members live on different systems")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", members)
        if self.parent is not None:
            p = np.array(self.parent, dtype=complex)
            p.setflags(write=False)
            object.__setattr__(self, "parent", p)

    def __len__(self):
        return len(self.members)

    @property
    def dims(self):
        return self.members[0].dims

    @property
    def labels(self):
        return self.members[0].labels

    def average(self) -> np.ndarray:
        return sum(p * m.density().matrix for p, m in zip(self.weights, self.members))

    def residual(self, parent=None) -> float:
        """Max-abs deviation of ``sum p_i rho_i`` from the parent state."""
        parent = self.parent if parent is None else parent
        if parent is None:
            raise ValueError("no parent state to compare against")
        if isinstance(parent, (MultipartiteState, PureState)):
            parent = parent.density().matrix
        return float(np.max(np.abs(self.average() - parent)))


@dataclass(frozen=True, eq=False)
class RankOneMeasurement:
    """Rank-1 operators ``M_x`` on the (joint) subsystem ``subsystem``."""

    subsystem: tuple[str, ...]
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        sub = (self.subsystem,) if isinstance(self.subsystem, str) else tuple(self.subsystem)
        ops = tuple(np.array(m, dtype=complex) for m in self.operators)
        if not ops:
            raise ValueError("measurement has no outcomes")
        d = ops[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for m in ops:
            if m.shape != (d, d):
                raise ValueError("measurement operators differ in shape")
            w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            if np.max(np.abs(m - m.conj().T)) > 1e-10 or w[0] < -1e-10:
                raise ValueError("measurement operator is not positive semidefinite")
            if d > 1 and w[-2] > 1e-10:
                raise ValueError("measurement operator has rank > 1")
            m.setflags(write=False)
            total += m
        if np.max(np.abs(total - np.eye(d))) > 1e-10:
            raise ValueError("measurement operators do not sum to the identity")
        object.__setattr__(self, "subsystem", sub)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def vectors(self) -> np.ndarray:
        """Rows ``m_x`` with ``M_x = |m_x><m_x|``."""
        out = []
        for m in self.operators:
            w, v = np.linalg.eigh(m)
            out.append(np.sqrt(max(w[-1], 0.0)) * v[:, -1])
        return np.array(out)


def _check_isometry(w, what):
    w = np.asarray(w, dtype=complex)
    if w.ndim != 2 or w.shape[0] < w.shape[1]:
        raise ValueError(f"{what} must be a tall matrix, got shape {w.shape}")
    dev = np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1])))
    if dev > 1e-10:
        raise ValueError(f"{what} columns are not orthonormal (deviation {dev:.3g})")
    return w


def support(s, atol: float = RANK_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Non-zero eigenvalues (descending) and eigenvectors, degenerate blocks canonicalized."""
    rho = s.density().matrix if isinstance(s, (MultipartiteState, PureState)) else s
    w, v = canonical_eigenbasis(rho)
    keep = w > atol
    return w[keep], v[:, keep]


def hjw_ensemble(s: State, mixer) -> Ensemble:
    """Pure-state decomposition ``psi_i ~ sum_j mixer[i, j] sqrt(l_j) e_j``."""
    rho = s.density()
    lam, vecs = support(rho)
    u = _check_isometry(mixer, "mixer")
    if u.shape[1] != len(lam):
        raise ValueError(f"mixer needs {len(lam)} columns (the rank), got {u.shape[1]}")
    tilde = (u * np.sqrt(lam)) @ vecs.T
    p = np.sum(np.abs(tilde) ** 2, axis=1)
    keep = p >= DROP_WEIGHT
    members = tuple(PureState(t / np.sqrt(pi), rho.dims, rho.labels)
                    for t, pi in zip(tilde[keep], p[keep]))
    return Ensemble(p[keep] / p[keep].sum(), members, rho.matrix)


def eigen_ensemble(s: State) -> Ensemble:
    lam, _ = support(s.density())
    return hjw_ensemble(s, np.eye(len(lam)))


def measurement_from_isometry(w, subsystem) -> RankOneMeasurement:
    """``M_x = w_x^dagger w_x`` for each row ``w_x`` of an ``n x d`` isometry."""
    w = _check_isometry(w, "isometry")
    return RankOneMeasurement(subsystem, tuple(np.outer(row.conj(), row) for row in w))


def _measured_split(s: State, m: RankOneMeasurement):
    bi = s.indices(list(m.subsystem))
    ai = s.complement(bi)
    db = int(np.prod([s.dims[i] for i in bi]))
    if db != m.dim:
        raise ValueError(f"measurement acts on dimension {m.dim}, subsystem has {db}")
    return ai, bi


def induced_ensemble(s: State, m: RankOneMeasurement) -> Ensemble:
    """Ensemble of the unmeasured parties conditioned on the outcomes of ``m``."""
    ai, _ = _measured_split(s, m)
    rho, da, db = split_matrix(s, list(m.subsystem))
    t = rho.reshape(da, db, da, db)
    dims = tuple(s.dims[i] for i in ai)
    labels = tuple(s.labels[i] for i in ai)
    sig = np.einsum("xbe,aecb->xac", np.array(m.operators), t)
    p = np.einsum("xaa->x", sig).real
    keep = p >= DROP_WEIGHT
    members = []
    for sx, px in zip(sig[keep], p[keep]):
        sx = sx / px
        members.append(MultipartiteState(0.5 * (sx + sx.conj().T), dims, labels))
    return Ensemble(p[keep] / p[keep].sum(), tuple(members), partial_trace(s, ai).matrix)


def post_measurement_pure_states(psi: PureState, m: RankOneMeasurement) -> Ensemble:
    """Pure conditional states of the unmeasured parties of a pure ``psi``."""
    if not isinstance(psi, PureState):
        raise TypeError("post_measurement_pure_states needs a pure state")
    ai, bi = _measured_split(psi, m)
    da = int(np.prod([psi.dims[i] for i in ai]))
    mat = psi.vector.reshape(psi.dims).transpose(ai + bi).reshape(da, -1)
    dims = tuple(psi.dims[i] for i in ai)
    labels = tuple(psi.labels[i] for i in ai)
    weights, members = [], []
    for op, vec in zip(m.operators, m.vectors()):
        phi = mat @ vec.conj()
        p = float(np.vdot(phi, phi).real)
        if p < DROP_WEIGHT:
            continue
        cond = mat @ op.T @ mat.conj().T / p
        purity = float(np.vdot(cond, cond).real)
        if purity < 1 - 1e-10:
            raise RuntimeError(f"conditional state is not pure (purity {purity:.12f})")
        weights.append(p)
        members.append(PureState(phi / np.sqrt(p), dims, labels))
    w = np.array(weights)
    parent = partial_trace(psi, ai).matrix
    return Ensemble(w / w.sum(), tuple(members), parent)


def ccq_blocks(s: State, b: Parties | None = None) -> np.ndarray:
    """Twirled copies ``(I (x) X^x Z^y) rho (I (x) Z^-y X^-x)`` indexed ``[x, y]``.

    The clock/shift pair is built on the canonical eigenbasis of ``rho_B``;
    ``b`` defaults to the last party and all other parties form ``A``.
    """
    rho = s.density()
    b = [rho.n_parties - 1] if b is None else b
    mat, da, d = split_matrix(rho, b)
    rho_b = np.einsum("ajak->jk", mat.reshape(da, d, da, d))
    _, basis = canonical_eigenbasis(0.5 * (rho_b + rho_b.conj().T))
    pauli = generalized_paulis(d, basis)
    eye = np.eye(da)
    blocks = np.empty((d, d, da * d, da * d), dtype=complex)
    xp = np.eye(d, dtype=complex)
    for x in range(d):
        zp = np.eye(d, dtype=complex)
        for y in range(d):
            u = np.kron(eye, xp @ zp)
            blocks[x, y] = u @ mat @ u.conj().T
            zp = zp @ pauli.Z
        xp = xp @ pauli.X
    return blocks


def build_ccq(s: State, b: Parties | None = None) -> MultipartiteState:
    """Four-party ccq state on ``(X, Y, A, B)`` with uniform classical registers."""
    blocks = ccq_blocks(s, b)
    d, _, n, _ = blocks.shape
    omega = np.zeros((d * d * n, d * d * n), dtype=complex)
    for x in range(d):
        for y in range(d):
            k = (x * d + y) * n
            omega[k:k + n, k:k + n] = blocks[x, y] / d**2
    return MultipartiteState(omega, (d, d, n // d, d), ("X", "Y", "A", "B"))

