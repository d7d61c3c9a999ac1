"""Strong-polygamy chains over all proper subsets of the B-parties."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Parties, PureState, State
from .correlations import pure_qUD_shortcut, q_unlocalizable_discord_report
from .ensembles import ccq_blocks
from .entropy import check_q, q_conditional_entropy, tsallis_entropy, tsallis_from_spectrum, xi_q
from .optimize import EXACT, LOWER, UPPER, OptimizationReport, OptimizerConfig, estimate_qEOA

VERDICT_ATOL = 1e-6
SUPERADDITIVITY_ATOL = 1e-9
COMPLEMENTARITY_ATOL = 1e-9
MAX_B_PARTIES = 5


@dataclass(frozen=True, order=True)
class SubsetMask:
    """Non-empty proper subset of ``n`` B-parties; bit ``i`` selects ``B_{i+1}``."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two B-parties")
        if not 1 <= self.bits <= 2**self.n - 2:
            raise ValueError(f"bits must lie in [1, {2**self.n - 2}], got {self.bits}")

    def complement(self) -> "SubsetMask":
        return SubsetMask(self.n, (2**self.n - 1) ^ self.bits)

    def members(self) -> list[int]:
        """Zero-based positions within the B-parties."""
        return [i for i in range(self.n) if self.bits >> i & 1]

    def parties(self) -> list[int]:
        """Party indices in a state ordered ``A, B_1, ..., B_n``."""
        return [i + 1 for i in self.members()]

    def size(self) -> int:
        return len(self.members())

    def name(self, labels) -> str:
        return "".join(labels[i] for i in self.parties())


def enumerate_proper_subsets(n: int) -> list[SubsetMask]:
    if n < 2:
        raise ValueError("need at least two B-parties")
    return [SubsetMask(n, bits) for bits in range(1, 2**n - 1)]


def _ccq_mutual(blocks, q):
    d, _, n, _ = blocks.shape
    ab = blocks.mean(axis=(0, 1))
    s_ab = tsallis_entropy(0.5 * (ab + ab.conj().T), q)

    def joint(bl):
        # spectrum of a block-diagonal state with uniform block weights
        lam = np.concatenate([np.linalg.eigvalsh(0.5 * (x + x.conj().T)) for x in bl]) / len(bl)
        return tsallis_from_spectrum(np.clip(lam, 0, None), q)

    def uniform(k):
        return tsallis_from_spectrum(np.full(k, 1.0 / k), q)

    i_xy = uniform(d * d) + s_ab - joint(blocks.reshape(d * d, n, n))
    i_x = uniform(d) + s_ab - joint(blocks.mean(axis=1))
    i_y = uniform(d) + s_ab - joint(blocks.mean(axis=0))
    return i_xy, i_x, i_y


def superadditivity_margin(s: State, q: float, b: Parties | None = None) -> float:
    """``I_q(XY:AB) - I_q(X:AB) - I_q(Y:AB)`` for the ccq state built from ``s``."""
    q = check_q(q)
    i_xy, i_x, i_y = _ccq_mutual(ccq_blocks(s, b), q)
    return i_xy - i_x - i_y


def superadditivity_check(s: State, q: float, b: Parties | None = None) -> tuple[bool, float]:
    margin = superadditivity_margin(s, q, b)
    return margin >= -SUPERADDITIVITY_ATOL, margin


@dataclass(frozen=True)
class Verdict:
    lhs: float
    rhs: float
    slack: float
    status: str

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.status in ("strict", "holds")


def verdict(lhs: float, rhs: float, slack: float) -> Verdict:
    """``strict`` beyond the slack, ``holds`` at or above zero margin,
    ``inconclusive`` within the slack below zero, ``optimizer-gap`` beyond it.

    Every right-hand side here is a lower bound of a maximum, so a negative
    margin can never certify a violation.
    """
    m = rhs - lhs
    if m > slack:
        status = "strict"
    elif m >= 0:
        status = "holds"
    elif m >= -slack:
        status = "inconclusive"
    else:
        status = "optimizer-gap"
    return Verdict(lhs, rhs, slack, status)


@dataclass(frozen=True)
class SubsetTerm:
    mask: SubsetMask
    name: str
    value: float
    bound: str
    gap: float
    report: OptimizationReport | None = None


@dataclass(frozen=True)
class PolygamyReport:
    kind: str
    q: float
    n: int
    left: float
    left_bound: str
    middle: float
    right: float
    subsets: tuple[SubsetTerm, ...]
    verdicts: dict[str, Verdict]
    conditions: dict[str, float] = field(default_factory=dict)

    @property
    def conditions_hold(self) -> bool:
        return all(v >= -SUPERADDITIVITY_ATOL for v in self.conditions.values())

    def middle_from_subsets(self) -> float:
        return sum(t.value for t in self.subsets) / (2 ** (self.n - 1) - 1)

    def terms(self) -> dict[str, float]:
        out = {"left": self.left, "middle": self.middle, "right": self.right}
        out.update({f"{self.kind_symbol}({t.name})": t.value for t in self.subsets})
        return out

    @property
    def kind_symbol(self) -> str:
        return "Ea" if self.kind == "entanglement" else "ud"

    def bounds(self) -> dict[str, str]:
        out = {"left": self.left_bound}
        out.update({f"{self.kind_symbol}({t.name})": t.bound for t in self.subsets})
        return out


def _b_count(s: State, allow_large: bool) -> int:
    n = s.n_parties - 1
    if n < 2:
        raise ValueError("need a party A and at least two B-parties")
    if n > MAX_B_PARTIES and not allow_large:
        raise ValueError(f"{n} B-parties exceeds the default limit of {MAX_B_PARTIES}; pass allow_large=True")
    return n


def _is_ghz(s: State) -> bool:
    return isinstance(s, PureState) and (s.name or "").startswith("ghz:")


def _chain(kind, q, n, left, left_bound, left_gap, terms, conditions):
    k = 2 ** (n - 1) - 1
    middle = sum(t.value for t in terms) / k
    singles = [t for t in terms if t.mask.size() == 1]
    right = sum(t.value for t in singles)
    gap_middle = sum(t.gap for t in terms) / k
    gap_right = sum(t.gap for t in singles)
    verdicts = {"left<=middle": verdict(left, middle, VERDICT_ATOL + left_gap + gap_middle)}
    if kind == "entanglement":
        verdicts["middle<=right"] = verdict(middle, right, VERDICT_ATOL + gap_middle + gap_right)
    return PolygamyReport(kind, q, n, left, left_bound, middle, right, tuple(terms), verdicts, conditions)


def verify_strong_polygamy_entanglement(s: State, q: float, cfg: OptimizerConfig | None = None,
                                        allow_large: bool = False) -> PolygamyReport:
    """Full-split q-EOA vs the subset average vs the sum over single B-parties.

    Party 0 is A, the rest are the B-parties. The ccq superadditivity margin
    is attached for every cut ``A : X`` that enters the chain.
    """
    q = check_q(q, 1.0)
    n = _b_count(s, allow_large)
    b_all = list(range(1, s.n_parties))
    if _is_ghz(s):
        left, left_bound, left_gap = xi_q(q), EXACT, 0.0
    elif isinstance(s, PureState):
        left, left_bound, left_gap = tsallis_entropy(s.marginal([0]), q), EXACT, 0.0
    else:
        rep = estimate_qEOA(s, q, cfg, b_all)
        left, left_bound, left_gap = rep.value, rep.bound_direction, rep.gap
    terms, conditions = [], {}
    for mask in enumerate_proper_subsets(n):
        x = mask.parties()
        rho = s.marginal([0] + x)
        rep = estimate_qEOA(rho, q, cfg, list(range(1, len(x) + 1)))
        name = mask.name(s.labels)
        terms.append(SubsetTerm(mask, name, rep.value, rep.bound_direction, rep.gap, rep))
        conditions[f"A:{name}"] = superadditivity_margin(rho, q, list(range(1, len(x) + 1)))
    return _chain("entanglement", q, n, left, left_bound, left_gap, terms, conditions)


def _ud_terms(psi, q, cfg, masks):
    terms = []
    for mask in masks:
        x = mask.parties()
        rho = psi.marginal([0] + x)
        val, rep = q_unlocalizable_discord_report(rho, q, cfg, list(range(1, len(x) + 1)))
        bound = LOWER if rep.bound_direction == UPPER else rep.bound_direction
        terms.append(SubsetTerm(mask, mask.name(psi.labels), val, bound, rep.gap, rep))
    return terms


def verify_strong_polygamy_discord(psi: PureState, q: float, cfg: OptimizerConfig | None = None,
                                   allow_large: bool = False) -> PolygamyReport:
    """Unlocalizable q-discord of ``A : B`` against its subset average."""
    if not isinstance(psi, PureState):
        raise TypeError("the discord chain is defined for pure states only")
    q = check_q(q, 1.0)
    n = _b_count(psi, allow_large)
    left = pure_qUD_shortcut(psi, q, list(range(1, psi.n_parties)))
    terms = _ud_terms(psi, q, cfg, enumerate_proper_subsets(n))
    return _chain("discord", q, n, left, EXACT, 0.0, terms, {})


@dataclass(frozen=True)
class EquivalenceReport:
    q: float
    conditional_sum: float
    conditional_pairs: dict[str, float]
    eoa_sum: float
    ud_sum: float
    sum_residual: float
    subset_residuals: dict[str, float]
    eoa_terms: tuple[SubsetTerm, ...]
    ud_terms: tuple[SubsetTerm, ...]

    @property
    def diagnostic(self) -> bool:
        return self.q > 1 + 1e-6


def verify_equivalence(psi: PureState, q: float, cfg: OptimizerConfig | None = None,
                       allow_large: bool = False) -> EquivalenceReport:
    """Subset sums of q-EOA against those of unlocalizable q-discord.

    Raises ``RuntimeError`` if the conditional entropies of complementary
    subsets fail to cancel, which would indicate a numerical fault.
    """
    if not isinstance(psi, PureState):
        raise TypeError("the equivalence check is defined for pure states only")
    q = check_q(q)
    n = _b_count(psi, allow_large)
    masks = enumerate_proper_subsets(n)

    cond = {}
    for mask in masks:
        x = mask.parties()
        cond[mask] = q_conditional_entropy(psi.marginal([0] + x), list(range(1, len(x) + 1)), q)
    conditional_sum = sum(cond.values())
    if abs(conditional_sum) > COMPLEMENTARITY_ATOL:
        raise RuntimeError(f"conditional entropies do not cancel (sum {conditional_sum:.3g})")
    pairs = {f"S_q(A|{m.name(psi.labels)})+S_q(A|{m.complement().name(psi.labels)})":
             cond[m] + cond[m.complement()] for m in masks if m.bits < m.complement().bits}

    eoa = []
    for mask in masks:
        x = mask.parties()
        rep = estimate_qEOA(psi.marginal([0] + x), q, cfg, list(range(1, len(x) + 1)))
        eoa.append(SubsetTerm(mask, mask.name(psi.labels), rep.value, rep.bound_direction, rep.gap, rep))
    ud = _ud_terms(psi, q, cfg, masks)
    ud_by_mask = {t.mask: t for t in ud}
    eoa_sum = sum(t.value for t in eoa)
    ud_sum = sum(t.value for t in ud)
    residuals = {}
    for t in eoa:
        comp = t.mask.complement()
        residuals[t.name] = t.value - ud_by_mask[comp].value - cond[comp]
    return EquivalenceReport(q, conditional_sum, pairs, eoa_sum, ud_sum, eoa_sum - ud_sum,
                             residuals, tuple(eoa), tuple(ud))


@dataclass(frozen=True)
class GhzAnalytic:
    n: int
    q: float
    xi_q: float
    xi_interval: tuple[float, float]
    left: float
    middle_interval: tuple[float, float]
    right_interval: tuple[float, float]
    middle_over_left_min: float
    strict_left_middle: bool
    strict_middle_right: bool


def ghz_analytic_report(n: int, q: float) -> GhzAnalytic:
    """Closed forms for the n-qubit GHZ state with A the first qubit.

    Every ``rho_AX`` is equivalent to the two-qubit GHZ marginal, so every
    subset carries the same assisted value ``xi`` in ``[2**(1-q) xi_q, xi_q]``.
    """
    if n < 3:
        raise ValueError("need n >= 3 qubits (at least two B-parties)")
    q = check_q(q, 1.0)
    k = n - 1
    xq = xi_q(q)
    lo, hi = 2 ** (1 - q) * xq, xq
    per = (2**k - 2) / (2 ** (k - 1) - 1)
    return GhzAnalytic(
        n, q, xq, (lo, hi), xq,
        (per * lo, per * hi), (k * lo, k * hi),
        2 ** (2 - q),
        q < 2,
        k > per,
    )
