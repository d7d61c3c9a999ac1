"""Multi-start estimators for the optimization-defined measures.

Every estimate is one-sided: a minimum found by local search is an upper
bound on the true minimum, a maximum is a lower bound on the true maximum.
Reports carry that direction together with the certificate that attains the
reported value.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .core import MultipartiteState, Parties, PureState, State, split_matrix
from .ensembles import (
    Ensemble,
    RankOneMeasurement,
    eigen_ensemble,
    hjw_ensemble,
    induced_ensemble,
    measurement_from_isometry,
    support,
)
from .entropy import check_q, q_difference, q_expectation, tsallis_entropy

UPPER = "upper-bound-of-min"
LOWER = "lower-bound-of-max"
EXACT = "exact"

MAX_CARDINALITY = 16
# restart values closer than this are treated as the same basin
BASIN_ATOL = 1e-7

MINIMIZE = {"qE": True, "qEOA": False, "qCC": False, "qUE": True}


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iterations: int = 2000
    step_tol: float = 1e-8
    value_tol: float = 1e-11
    seed: int = 0
    cardinality: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be positive")
        if not (self.step_tol > 0 and self.value_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.cardinality is not None and self.cardinality < 1:
            raise ValueError("cardinality override must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class OptimizationReport:
    measure: str
    q: float
    value: float
    bound_direction: str
    certificate: Union[Ensemble, RankOneMeasurement]
    restart_values: tuple[float, ...]
    converged: bool
    cardinality: int
    cut: tuple[str, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def gap(self) -> float:
        """Distance from the best restart value to the next-best basin (0 if only one)."""
        vals = np.array(self.restart_values, dtype=float)
        if vals.size < 2:
            return 0.0
        best = self.value
        others = vals[np.abs(vals - best) > BASIN_ATOL]
        if others.size == 0:
            return 0.0
        nxt = others.min() if MINIMIZE[self.measure] else others.max()
        return float(abs(nxt - best))


def _default_b(s: State) -> list[int]:
    return list(range(1, s.n_parties))


def _cardinality(r: int, cfg: OptimizerConfig) -> int:
    if cfg.cardinality is None:
        return max(r, min(r * r, MAX_CARDINALITY))
    if cfg.cardinality < r:
        raise ValueError(f"cardinality {cfg.cardinality} is below the rank {r}")
    return cfg.cardinality


def decomposition_value(ens: Ensemble, b: Parties, q: float) -> float:
    """``sum p_i**q S_q(tr_b psi_i)`` evaluated on an explicit decomposition."""
    vals = [tsallis_entropy(m.marginal(m.complement(b)), q) for m in ens.members]
    return q_expectation(ens.weights, vals, q)


def measurement_value(s: State, m: RankOneMeasurement, q: float) -> float:
    """Tsallis q-difference of the ensemble induced by ``m``."""
    return q_difference(induced_ensemble(s, m), q)


class _DecompositionProblem:
    def __init__(self, s: State, b: Parties, q: float, sign: float, cfg: OptimizerConfig):
        self.rho = s.density()
        self.b = self.rho.indices(b)
        self.lam, self.vecs = support(self.rho)
        self.r = len(self.lam)
        self.m = _cardinality(self.r, cfg)
        ai = self.rho.complement(self.b)
        da = int(np.prod([self.rho.dims[i] for i in ai]))
        order = ai + self.b
        cols = self.vecs.T.reshape((self.r,) + self.rho.dims).transpose([0] + [i + 1 for i in order])
        coef = np.ascontiguousarray((cols.reshape(self.r, -1).T * np.sqrt(self.lam)).T)
        self.data = (float(sign), self.m, self.r, coef, da, self.rho.dim // da, float(q))
        self.fun = _kernels.decomposition_objective
        self.nparams = self.m * self.m

    def certificate(self, params):
        u = _kernels.unitary_from_params(params, self.m)[:, : self.r]
        return hjw_ensemble(self.rho, u)

    def evaluate(self, cert, q):
        return decomposition_value(cert, self.b, q)

    def sample_values(self, isometries, q):
        coef = self.data[3]
        da, db = self.data[4], self.data[5]
        psi = (isometries @ coef).reshape(isometries.shape[:2] + (da, db))
        if da <= db:
            sig = psi @ np.swapaxes(psi.conj(), -1, -2)
        else:
            sig = np.swapaxes(psi.conj(), -1, -2) @ psi
        return _batch_weighted_entropy(np.linalg.eigvalsh(sig), q).sum(axis=1)

    def certificate_from_isometry(self, u):
        return hjw_ensemble(self.rho, u)


class _MeasurementProblem:
    def __init__(self, s: State, b: Parties, q: float, sign: float, cfg: OptimizerConfig):
        self.rho = s.density()
        self.b = self.rho.indices(b)
        self.labels = tuple(self.rho.labels[i] for i in self.b)
        mat, da, db = split_matrix(self.rho, self.b)
        t = mat.reshape(da, db, da, db)
        rho_a = np.einsum("ajbj->ab", t)
        rho_b = np.einsum("ajak->jk", t)
        _, self.f = support(0.5 * (rho_b + rho_b.conj().T))
        self.r = self.f.shape[1]
        self.m = _cardinality(self.r, cfg)
        _, full = np.linalg.eigh(np.eye(db) - self.f @ self.f.conj().T)
        self.kernel = full[:, self.r:]
        rhof = np.ascontiguousarray(np.einsum("bk,abcd,dl->akcl", self.f.conj(), t, self.f))
        self.s_a = tsallis_entropy(0.5 * (rho_a + rho_a.conj().T), q)
        self.data = (float(sign), self.m, self.r, rhof, da, float(q), float(self.s_a))
        self.fun = _kernels.measurement_objective
        self.nparams = self.m * self.m

    def certificate_from_isometry(self, w):
        rows = np.vstack([w @ self.f.conj().T, self.kernel.conj().T])
        return measurement_from_isometry(rows, self.labels)

    def certificate(self, params):
        w = _kernels.unitary_from_params(params, self.m)[:, : self.r]
        return self.certificate_from_isometry(w)

    def evaluate(self, cert, q):
        return measurement_value(self.rho, cert, q)

    def sample_values(self, isometries, q):
        rhof = self.data[3]
        sig = np.einsum("Nxk,Nxl,akcl->Nxac", isometries, isometries.conj(), rhof)
        return self.s_a - _batch_weighted_entropy(np.linalg.eigvalsh(sig), q).sum(axis=1)


def _batch_weighted_entropy(mu, q):
    """Vectorized ``p**q S_q(mu/p)`` over the last axis."""
    mu = np.where(mu > 0, mu, 0.0)
    p = mu.sum(axis=-1)
    if abs(q - 1) < _kernels.Q_ONE_ATOL:
        with np.errstate(divide="ignore", invalid="ignore"):
            s = -np.sum(np.where(mu > 0, mu * np.log(np.where(mu > 0, mu, 1.0)), 0.0), axis=-1)
            out = s + np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    else:
        out = (p**q - np.sum(mu**q, axis=-1)) / (q - 1)
    return np.where(p < _kernels.DROP_WEIGHT, 0.0, out)


def _is_pure(rho: MultipartiteState) -> bool:
    return np.linalg.eigvalsh(rho.matrix)[-1] >= 1 - 1e-12


def _run(measure: str, s: State, q: float, cfg: OptimizerConfig | None, b) -> OptimizationReport:
    q = check_q(q)
    cfg = OptimizerConfig() if cfg is None else cfg
    b = _default_b(s) if b is None else b
    minimize = MINIMIZE[measure]
    sign = 1.0 if minimize else -1.0
    direction = UPPER if minimize else LOWER
    rho = s.density()
    cut = tuple(rho.labels[i] for i in rho.indices(b))

    if measure in ("qE", "qEOA"):
        if isinstance(s, PureState) or _is_pure(rho):
            cert = eigen_ensemble(rho)
            val = decomposition_value(cert, b, q)
            return OptimizationReport(measure, q, val, EXACT, cert, (val,), True, 1, cut,
                                      ("pure input: unique decomposition",))
        prob = _DecompositionProblem(rho, b, q, sign, cfg)
        notes = (f"decompositions with {prob.m} members (rank {prob.r})",)
    else:
        prob = _MeasurementProblem(rho, b, q, sign, cfg)
        notes = (f"rank-1 measurements with {prob.m} outcomes on the rank-{prob.r} support of the measured party",)

    values, certs, conv = [], [], []
    for k in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, k])
        x0 = rng.normal(scale=np.pi, size=prob.nparams)
        x, _, ok, _ = _kernels.local_search(prob.fun, x0, prob.data, cfg.step_tol,
                                            cfg.value_tol, cfg.max_iterations)
        cert = prob.certificate(x)
        values.append(prob.evaluate(cert, q))
        certs.append(cert)
        conv.append(bool(ok))
    vals = np.array(values)
    best = int(np.argmin(vals) if minimize else np.argmax(vals))
    return OptimizationReport(measure, q, float(vals[best]), direction, certs[best],
                              tuple(float(v) for v in vals), conv[best], prob.m, cut, notes)


def estimate_qE(s: State, q: float, cfg: OptimizerConfig | None = None, b: Parties | None = None) -> OptimizationReport:
    """q-expected entanglement across ``rest : b`` (minimum over decompositions)."""
    return _run("qE", s, q, cfg, b)


def estimate_qEOA(s: State, q: float, cfg: OptimizerConfig | None = None, b: Parties | None = None) -> OptimizationReport:
    """q-expected entanglement of assistance (maximum over decompositions)."""
    return _run("qEOA", s, q, cfg, b)


def estimate_qCC(s: State, q: float, cfg: OptimizerConfig | None = None, b: Parties | None = None) -> OptimizationReport:
    """One-way classical q-correlation: max q-difference over rank-1 measurements on ``b``."""
    return _run("qCC", s, q, cfg, b)


def estimate_qUE(s: State, q: float, cfg: OptimizerConfig | None = None, b: Parties | None = None) -> OptimizationReport:
    """One-way unlocalizable q-entanglement: min q-difference over rank-1 measurements on ``b``."""
    return _run("qUE", s, q, cfg, b)


ESTIMATORS = {"qE": estimate_qE, "qEOA": estimate_qEOA, "qCC": estimate_qCC, "qUE": estimate_qUE}


def random_search_oracle(measure: str, s: State, q: float, samples: int = 100_000, seed: int = 0,
                         b: Parties | None = None, cardinality: int | None = None,
                         batch: int = 5000) -> OptimizationReport:
    """Best of ``samples`` Haar-random isometries, evaluated without the local search.

    ``cardinality`` defaults to the rank, the smallest family: it embeds in
    every larger one (zero rows) and is sampled far more densely.
    """
    q = check_q(q)
    b = _default_b(s) if b is None else b
    minimize = MINIMIZE[measure]
    rho = s.density()
    cls = _DecompositionProblem if measure in ("qE", "qEOA") else _MeasurementProblem
    prob = cls(rho, b, q, 1.0, OptimizerConfig(cardinality=cardinality))
    if cardinality is None and prob.m != prob.r:
        prob = cls(rho, b, q, 1.0, OptimizerConfig(cardinality=prob.r))
    rng = np.random.default_rng(seed)
    best_val, best_u = None, None
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        z = rng.normal(size=(k, prob.m, prob.r)) + 1j * rng.normal(size=(k, prob.m, prob.r))
        qmat, rmat = np.linalg.qr(z)
        d = np.diagonal(rmat, axis1=-2, axis2=-1)
        u = qmat * (d / np.abs(d))[:, None, :]
        vals = prob.sample_values(u, q)
        i = int(np.argmin(vals) if minimize else np.argmax(vals))
        if best_val is None or (vals[i] < best_val if minimize else vals[i] > best_val):
            best_val, best_u = vals[i], u[i]
        done += k
    cert = prob.certificate_from_isometry(best_u)
    val = prob.evaluate(cert, q)
    cut = tuple(rho.labels[i] for i in rho.indices(b))
    return OptimizationReport(measure, q, val, UPPER if minimize else LOWER, cert, (val,), True,
                              prob.m, cut, (f"random search over {samples} Haar isometries",))


def certificate_value(report: OptimizationReport, s: State) -> float:
    """Re-evaluate a report's objective on its certificate."""
    if isinstance(report.certificate, Ensemble):
        return decomposition_value(report.certificate, list(report.cut), report.q)
    return measurement_value(s, report.certificate, report.q)

