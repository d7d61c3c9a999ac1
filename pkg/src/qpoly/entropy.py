"""Tsallis q-entropy and the quantities built from it."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg

from .core import MultipartiteState, Parties, PureState, State, state_spectrum

# |q - 1| below this switches to the von Neumann / ordinary-expectation forms
Q_ONE_ATOL = 1e-6
# eigenvalues within this of 0 (or 1) are snapped to 0 (or 1)
SPECTRUM_SNAP = 1e-14


def is_q_one(q: float) -> bool:
    return abs(q - 1.0) < Q_ONE_ATOL


def check_q(q: float, minimum: float = 0.0) -> float:
    q = float(q)
    if not np.isfinite(q) or q < minimum:
        raise ValueError(f"q must be >= {minimum:g}, got {q!r}")
    return q


def q_log(x, q: float):
    """q-logarithm ``(x**(1-q) - 1) / (1 - q)``; natural log as q -> 1."""
    check_q(q)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("q_log is only defined for x > 0")
    out = np.log(x) if is_q_one(q) else (x ** (1 - q) - 1) / (1 - q)
    return float(out) if out.ndim == 0 else out


def _snap(spectrum):
    lam = np.array(spectrum, dtype=float)
    lam[lam < SPECTRUM_SNAP] = 0.0
    lam[np.abs(lam - 1) < SPECTRUM_SNAP] = 1.0
    return lam[lam > 0]


def tsallis_from_spectrum(spectrum, q: float) -> float:
    """``-sum l**q ln_q(l)`` over a probability vector; zero entries contribute 0."""
    q = check_q(q)
    lam = _snap(spectrum)
    if is_q_one(q):
        return float(-np.sum(lam * np.log(lam)))
    return float(np.sum(lam - lam**q) / (q - 1))


def tsallis_entropy(s, q: float) -> float:
    """Tsallis q-entropy of a state (or of a raw density matrix)."""
    if isinstance(s, PureState):
        check_q(q)
        return 0.0
    return tsallis_from_spectrum(state_spectrum(s), q)


def tsallis_entropy_trace_form(s, q: float) -> float:
    """``-tr rho**q ln_q(rho)`` through matrix functions instead of the spectrum.

    ``rho**q ln_q(rho) = (rho - rho**q) / (1 - q)``, so only ``rho**q`` is
    needed away from q = 1. Used to cross-check :func:`tsallis_entropy`;
    requires a full-rank state at q = 1.
    """
    q = check_q(q)
    rho = s.density().matrix if isinstance(s, (MultipartiteState, PureState)) else np.asarray(s)
    if is_q_one(q):
        return float(-np.trace(rho @ linalg.logm(rho)).real)
    rq = linalg.fractional_matrix_power(rho, q)
    return float(np.trace(rho - rq).real / (q - 1))


def q_conditional_entropy(s: State, conditioning: Parties, q: float) -> float:
    """``S_q(rho) - S_q(rho_X)`` with ``X`` the conditioning parties of ``s``."""
    idx = s.indices(conditioning)
    if not idx or len(idx) == s.n_parties:
        raise ValueError("conditioning parties must be a proper non-empty subset")
    return tsallis_entropy(s, q) - tsallis_entropy(s.marginal(idx), q)


def q_mutual_entropy(s: State, a: Parties = 0, q: float = 1.0) -> float:
    """``S_q(A) + S_q(B) - S_q(AB)`` for the cut ``a`` : rest."""
    ai = s.indices(a)
    bi = s.complement(ai)
    if not ai or not bi:
        raise ValueError("mutual entropy needs parties on both sides of the cut")
    return (tsallis_entropy(s.marginal(ai), q) + tsallis_entropy(s.marginal(bi), q)
            - tsallis_entropy(s, q))


def q_expectation(weights, values, q: float) -> float:
    """``sum p_i**q f_i``."""
    w = np.asarray(weights, dtype=float)
    return float(np.sum(w**q * np.asarray(values, dtype=float)))


def q_difference(ensemble, q: float) -> float:
    """Tsallis q-difference ``S_q(sum p_i rho_i) - sum p_i**q S_q(rho_i)``.

    Non-negativity is only guaranteed for q >= 1; smaller q emits a
    ``RuntimeWarning``.
    """
    q = check_q(q)
    if q < 1 and not is_q_one(q):
        warnings.warn(f"q-difference may be negative for q = {q} < 1", RuntimeWarning, stacklevel=2)
    parent = ensemble.average()
    members = [tsallis_entropy(m, q) for m in ensemble.members]
    return tsallis_from_spectrum(state_spectrum(parent), q) - q_expectation(ensemble.weights, members, q)


def xi_q(q: float) -> float:
    """q-entropy of the maximally mixed qubit, ``(1 - 2**(1-q)) / (q - 1)``."""
    q = check_q(q, 1.0)
    if is_q_one(q):
        return float(np.log(2.0))
    return (1 - 2 ** (1 - q)) / (q - 1)
