"""Discord-type measures and the three-party trade-off diagnostics.

Arrow convention: the measured party is always passed explicitly as
``measured`` (default: every party but the first).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Parties, PureState, State
from .entropy import check_q, q_mutual_entropy, tsallis_entropy
from .optimize import (
    LOWER,
    UPPER,
    OptimizationReport,
    OptimizerConfig,
    estimate_qCC,
    estimate_qE,
    estimate_qEOA,
    estimate_qUE,
)


@dataclass(frozen=True)
class TradeoffReport:
    """``residual = lhs - sum(rhs_terms.values())``."""

    name: str
    q: float
    lhs: float
    rhs_terms: dict[str, float]
    residual: float
    bounds: dict[str, str] = field(default_factory=dict)
    certificates: dict[str, OptimizationReport] = field(default_factory=dict)
    diagnostic: bool = False

    @classmethod
    def build(cls, name, q, lhs, terms, bounds, certificates):
        residual = lhs - sum(terms.values())
        return cls(name, q, lhs, dict(terms), residual, dict(bounds), dict(certificates),
                   diagnostic=q > 1 + 1e-6)


def _split(s: State, measured):
    idx = list(range(1, s.n_parties)) if measured is None else s.indices(measured)
    rest = s.complement(idx)
    if not rest:
        raise ValueError("at least one party must remain unmeasured")
    return rest, idx


def q_discord_report(s: State, q: float, cfg: OptimizerConfig | None = None,
                     measured: Parties | None = None) -> tuple[float, OptimizationReport]:
    rest, idx = _split(s, measured)
    cc = estimate_qCC(s, q, cfg, idx)
    return q_mutual_entropy(s, rest, q) - cc.value, cc


def q_unlocalizable_discord_report(s: State, q: float, cfg: OptimizerConfig | None = None,
                                   measured: Parties | None = None) -> tuple[float, OptimizationReport]:
    rest, idx = _split(s, measured)
    ue = estimate_qUE(s, q, cfg, idx)
    return q_mutual_entropy(s, rest, q) - ue.value, ue


def q_discord(s: State, q: float, cfg: OptimizerConfig | None = None, measured: Parties | None = None) -> float:
    """Quantum q-discord ``I_q - J_q``; an upper bound since ``J_q`` is estimated from below."""
    return q_discord_report(s, q, cfg, measured)[0]


def q_unlocalizable_discord(s: State, q: float, cfg: OptimizerConfig | None = None,
                            measured: Parties | None = None) -> float:
    """Unlocalizable q-discord ``I_q - uE_q``; a lower bound since ``uE_q`` is estimated from above."""
    return q_unlocalizable_discord_report(s, q, cfg, measured)[0]


def pure_qUD_shortcut(psi: PureState, q: float, measured: Parties | None = None) -> float:
    """Unlocalizable q-discord of a pure state: the q-entropy of the measured side."""
    if not isinstance(psi, PureState):
        raise TypeError("pure_qUD_shortcut needs a pure state")
    check_q(q)
    _, idx = _split(psi, measured)
    return tsallis_entropy(psi.marginal(idx), q)


def _three_party(psi):
    if not isinstance(psi, PureState) or psi.n_parties != 3:
        raise ValueError("trade-off checks need a three-party pure state")
    return psi.labels


def check_tradeoff_prop1(psi: PureState, q: float, cfg: OptimizerConfig | None = None
                         ) -> tuple[TradeoffReport, TradeoffReport]:
    """``S_q(A)`` against ``J_q(AB) + E_q(AC)`` and against ``uE_q(AB) + E^a_q(AC)``.

    Both measurements act on B. Residuals are recorded, never asserted.
    """
    a, b, c = _three_party(psi)
    q = check_q(q)
    s_a = tsallis_entropy(psi.marginal([a]), q)
    rho_ab, rho_ac = psi.marginal([a, b]), psi.marginal([a, c])
    cc = estimate_qCC(rho_ab, q, cfg, [b])
    e = estimate_qE(rho_ac, q, cfg, [c])
    ue = estimate_qUE(rho_ab, q, cfg, [b])
    ea = estimate_qEOA(rho_ac, q, cfg, [c])
    first = TradeoffReport.build(
        "S_q(A) = J_q(AB) + E_q(AC)", q, s_a,
        {"J_q(AB)": cc.value, "E_q(AC)": e.value},
        {"J_q(AB)": cc.bound_direction, "E_q(AC)": e.bound_direction},
        {"J_q(AB)": cc, "E_q(AC)": e})
    second = TradeoffReport.build(
        "S_q(A) = uE_q(AB) + Ea_q(AC)", q, s_a,
        {"uE_q(AB)": ue.value, "Ea_q(AC)": ea.value},
        {"uE_q(AB)": ue.bound_direction, "Ea_q(AC)": ea.bound_direction},
        {"uE_q(AB)": ue, "Ea_q(AC)": ea})
    return first, second


def check_tradeoff_prop2(psi: PureState, q: float, cfg: OptimizerConfig | None = None) -> TradeoffReport:
    """``S_q(A)`` against ``ud_q(BA) + uE_q(CA)``, both measuring A."""
    a, b, c = _three_party(psi)
    q = check_q(q)
    s_a = tsallis_entropy(psi.marginal([a]), q)
    ud, ud_rep = q_unlocalizable_discord_report(psi.marginal([a, b]), q, cfg, [a])
    ue = estimate_qUE(psi.marginal([a, c]), q, cfg, [a])
    return TradeoffReport.build(
        "S_q(A) = ud_q(BA) + uE_q(CA)", q, s_a,
        {"ud_q(BA)": ud, "uE_q(CA)": ue.value},
        {"ud_q(BA)": LOWER if ud_rep.bound_direction == UPPER else ud_rep.bound_direction,
         "uE_q(CA)": ue.bound_direction},
        {"ud_q(BA)": ud_rep, "uE_q(CA)": ue})
