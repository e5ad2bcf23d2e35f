"""Closed-form exponent algebra for doubly degenerate parabolic equations.

Everything here is a pure function of the parameter tuple (m, p, n, q, r)
and, where needed, the exponent of the homogeneous frozen-coefficient
theory ``alpha_hom``. Infinite integrability exponents are carried as
``math.inf`` and every formula has an explicit limit branch for them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

INF = math.inf


class ExponentError(ValueError):
    """Base class for invalid exponent computations."""


class InvalidParams(ExponentError):
    pass


class NonPositiveExponent(ExponentError):
    """Integrability of the source is below the threshold 1/r + n/(pq) < 1."""


class InvalidDomain(ExponentError):
    pass


class GoverningTerm(str, Enum):
    HOMOGENEOUS = "HomogeneousTheory"
    SOURCE = "SourceIntegrability"


class LiteratureModel(str, Enum):
    HEAT = "Heat"
    PME_AMU = "PME_AMU"
    PME_DIEHL = "PME_Diehl"
    PLAPLACIAN = "PLaplacian"
    DOUBLY_DEGENERATE = "DoublyDegenerate"


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


@dataclass(frozen=True)
class ProblemParams:
    m: float
    p: float
    n: int = 1
    q: float = INF
    r: float = INF

    def __post_init__(self):
        if not self.m >= 1:
            raise InvalidParams(f"m must be >= 1, got {self.m}")
        if not self.p >= 2:
            raise InvalidParams(f"p must be >= 2, got {self.p}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParams(f"n must be a positive integer, got {self.n}")
        if not self.q > 1:
            raise InvalidParams(f"q must be > 1, got {self.q}")
        if not self.r > 1:
            raise InvalidParams(f"r must be > 1, got {self.r}")

    def to_dict(self) -> dict:
        return {"m": self.m, "p": self.p, "n": int(self.n),
                "q": _encode_inf(self.q), "r": _encode_inf(self.r)}

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemParams":
        return cls(m=float(d["m"]), p=float(d["p"]), n=int(d.get("n", 1)),
                   q=_decode_inf(d.get("q", "inf")), r=_decode_inf(d.get("r", "inf")))


def _encode_inf(x: float):
    return "inf" if math.isinf(x) else x


def _decode_inf(x) -> float:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "+inf"):
            return INF
        return float(x)
    if x is None:
        return INF
    return float(x)


@dataclass(frozen=True)
class RegimeFlags:
    wcc: bool
    scc: bool
    corollary_regime: bool
    # True when a strict inequality failed by equality
    at_boundary: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ExponentReport:
    params: ProblemParams
    alpha: float
    alpha_is_open_sup: bool
    theta: float
    m_sharp: float
    alpha_hom: float
    source_exponent: float
    governing_term: GoverningTerm
    flags: RegimeFlags
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def usable_alpha(self, margin: float = 1e-3) -> float:
        """Numeric stand-in for an open supremum."""
        return self.alpha - margin if self.alpha_is_open_sup else self.alpha

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update(
            alpha=self.alpha,
            theta=self.theta,
            m_sharp=self.m_sharp,
            alpha_hom=self.alpha_hom,
            source_exponent=self.source_exponent,
            governing_term=self.governing_term.value,
            open_sup=self.alpha_is_open_sup,
            flags=self.flags.to_dict(),
            warnings=list(self.warnings),
        )
        return d


@dataclass(frozen=True)
class TrudingerParams:
    k: float
    p: float

    def __post_init__(self):
        if not (0 < self.k <= 1):
            raise InvalidParams(f"k must lie in (0, 1], got {self.k}")
        if not self.p > 2:
            raise InvalidParams(f"p must be > 2, got {self.p}")
        if self.k > min(self.p - 1, 1.0):
            raise InvalidParams("k must not exceed min(p - 1, 1)")


@dataclass(frozen=True)
class ImprovedRegion:
    member: bool
    item3_sufficient: bool
    item4_window: bool


def p_m(params: ProblemParams) -> float:
    """Time-Hölder denominator of the homogeneous theory: 2 if m == 1 else p."""
    return _p_m(params.m, params.p)


def _p_m(m: float, p: float) -> float:
    return 2.0 if m == 1 else float(p)


def alpha_hom_default(m: float, p: float) -> float:
    """Conjectured optimal exponent min{1, (p-1)/(m+p-3)}."""
    d = m + p - 3
    if d <= 0:
        return 1.0
    return min(1.0, (p - 1) / d)


def m_sharp(m: float, p: float, alpha_hom: float) -> float:
    if not (0 < alpha_hom <= 1):
        raise InvalidDomain(f"alpha_hom must lie in (0, 1], got {alpha_hom}")
    pm = _p_m(m, p)
    first = alpha_hom * p / (pm + alpha_hom * (m + p - 3))
    second = 2 * alpha_hom * (p - 1) / (pm * (m + p - 2))
    # both terms are <= 1 exactly; clip round-off (e.g. m = 1: p/p)
    return min(1.0, max(first, second))


def source_exponent(params: ProblemParams) -> float:
    """Exponent allowed by the integrability of the source term.

    Raises NonPositiveExponent below the threshold 1/r + n/(pq) < 1.
    """
    m, p, n, q, r = params.m, params.p, params.n, params.q, params.r
    if math.isinf(q) and math.isinf(r):
        val = p / (m + p - 2)
    elif math.isinf(q):
        val = p * (r - 1) / ((r - 1) * (m + p - 2) + 1)
    elif math.isinf(r):
        val = (p * q - n) / (q * (m + p - 2))
    else:
        val = ((p * q - n) * r - p * q) / (q * ((r - 1) * (m + p - 2) + 1))
    if val <= 0:
        raise NonPositiveExponent(
            f"source exponent {val:.6g} <= 0: need 1/r + n/(pq) < 1")
    return val


def check_compatibility(params: ProblemParams) -> RegimeFlags:
    m, p, n = params.m, params.p, params.n
    iq, ir = _inv(params.q), _inv(params.r)
    serrin = ir + n * iq / p
    upper = 2 * ir + n * iq
    scc_term = 3 * ir + m * (1 - ir) + n * iq
    wcc = serrin < 1 < upper
    scc = serrin < 1 and scc_term > 2
    corollary = serrin < 1 and scc_term <= 2
    at_boundary = serrin == 1 or upper == 1 or scc_term == 2
    return RegimeFlags(wcc=wcc, scc=scc, corollary_regime=corollary,
                       at_boundary=at_boundary)


def theta(alpha: float, m: float, p: float) -> float:
    """Intrinsic time scaling p - alpha (m + p - 3)."""
    if not (0 <= alpha <= 1):
        raise InvalidDomain(f"alpha must lie in [0, 1], got {alpha}")
    return p - alpha * (m + p - 3)


def theta_bounds(m: float, p: float) -> tuple[float, float]:
    return 1 + (p - 1) / (p + m - 2), float(p)


def _report(params, alpha_hom, ms, src, flags, warnings) -> ExponentReport:
    open_sup = ms <= src
    alpha = ms if open_sup else src
    return ExponentReport(
        params=params,
        alpha=alpha,
        alpha_is_open_sup=open_sup,
        theta=theta(alpha, params.m, params.p),
        m_sharp=ms,
        alpha_hom=alpha_hom,
        source_exponent=src,
        governing_term=GoverningTerm.HOMOGENEOUS if open_sup else GoverningTerm.SOURCE,
        flags=flags,
        warnings=tuple(warnings),
    )


def alpha_sharp(params: ProblemParams, alpha_hom: float | None = None) -> ExponentReport:
    if alpha_hom is None:
        alpha_hom = alpha_hom_default(params.m, params.p)
    flags = check_compatibility(params)
    warnings = [] if flags.wcc else ["weak compatibility conditions fail"]
    ms = m_sharp(params.m, params.p, alpha_hom)
    src = source_exponent(params)
    return _report(params, alpha_hom, ms, src, flags, warnings)


def improved_region_member(m: float, p: float, alpha_hom: float | None = None) -> ImprovedRegion:
    if not m > 1:
        raise InvalidDomain("the improved region is defined for m > 1 only")
    if alpha_hom is None:
        alpha_hom = alpha_hom_default(m, p)
    rhs = (m - 1) / (p - 1) * p / (p + m - 3)
    threshold = p * ((p - 1) * (1 - 3 / p) + 1)
    lower = max(2.0, (p - 1) ** 2 / p + 1)
    return ImprovedRegion(
        member=alpha_hom <= rhs,
        item3_sufficient=m >= threshold,
        item4_window=lower <= m < threshold,
    )


def literature_reduction(model: LiteratureModel | str, params: ProblemParams,
                         alpha_hom: float | None = None) -> float:
    """Exponent of one row of the literature comparison table.

    Open suprema (alpha_hom^-) are evaluated at their supremum value.
    """
    model = LiteratureModel(model)
    m, p, n = params.m, params.p, params.n
    iq, ir = _inv(params.q), _inv(params.r)
    if model is LiteratureModel.HEAT:
        return 2 - (2 * ir + n * iq)
    if model is LiteratureModel.PLAPLACIAN:
        if math.isinf(params.q) or math.isinf(params.r):
            return (p - n * iq - p * ir) / ((p - 1) - (p - 2) * ir)
        q, r = params.q, params.r
        return ((p * q - n) * r - p * q) / (q * ((p - 1) * r - (p - 2)))
    if alpha_hom is None:
        alpha_hom = alpha_hom_default(m, p)
    if model in (LiteratureModel.PME_AMU, LiteratureModel.PME_DIEHL):
        if math.isinf(params.q) or math.isinf(params.r):
            src = (2 - n * iq - 2 * ir) / (m - (m - 1) * ir)
        else:
            q, r = params.q, params.r
            src = ((2 * q - n) * r - 2 * q) / (q * (m * r - (m - 1)))
        if model is LiteratureModel.PME_AMU:
            return min(alpha_hom / m, src)
        return min(2 * alpha_hom / (2 + (m - 1) * alpha_hom), src)
    # earlier doubly degenerate row
    return min(alpha_hom * (p - 1) / (m + p - 2), source_exponent(params))


def trudinger_map(tp: TrudingerParams) -> tuple[float, float]:
    m = (1 - tp.k) * (tp.p - 1) / tp.k + 1
    return m, tp.p


def trudinger_exponents(tp: TrudingerParams, n: int, q: float, r: float,
                        alpha_hom: float | None = None) -> ExponentReport:
    """Exponents for d_t(u^k) - div(|Du|^{p-2} Du) = f written in k directly.

    Shares no arithmetic with alpha_sharp beyond the final min/max, so the
    two paths cross-check each other.
    """
    k, p = tp.k, tp.p
    m, _ = trudinger_map(tp)
    params = ProblemParams(m=m, p=p, n=n, q=q, r=r)
    if alpha_hom is None:
        alpha_hom = alpha_hom_default(m, p)
    pm = 2.0 if k == 1 else p
    a = alpha_hom
    ms = max(k * p * a / (k * pm + a * (p - 1 - k)), 2 * k * a / pm)
    iq, ir = _inv(q), _inv(r)
    if math.isinf(q) or math.isinf(r):
        src = k * (p - n * iq - p * ir) / ((1 - ir) * (p - 1) + k * ir)
    else:
        src = k * ((p * q - n) * r - p * q) / (q * ((r - 1) * (p - 1) + k))
    if src <= 0:
        raise NonPositiveExponent(f"source exponent {src:.6g} <= 0")
    open_sup = ms <= src
    alpha = ms if open_sup else src
    th = p - alpha * ((p - 1) / k) * (1 - k / (p - 1))
    flags = check_compatibility(params)
    return ExponentReport(
        params=params, alpha=alpha, alpha_is_open_sup=open_sup, theta=th,
        m_sharp=ms, alpha_hom=alpha_hom, source_exponent=src,
        governing_term=GoverningTerm.HOMOGENEOUS if open_sup else GoverningTerm.SOURCE,
        flags=flags,
        warnings=() if flags.wcc else ("weak compatibility conditions fail",),
    )


def psi(m: float, p: float, beta: float) -> float:
    """Diffusion constant m (1/(beta+1))^{p-1} of the near-heat reformulation."""
    return m * (1.0 / (beta + 1)) ** (p - 1)


def heat_proximity(eps: float) -> tuple[float, float]:
    """(M_sharp, Psi) at m = 1 + eps, p = 2 + eps; both tend to 1 as eps -> 0."""
    if eps < 0:
        raise InvalidDomain("eps must be non-negative")
    m, p = 1 + eps, 2 + eps
    beta = (m - 1) / (p - 1)
    return m_sharp(m, p, alpha_hom_default(m, p)), psi(m, p, beta)
