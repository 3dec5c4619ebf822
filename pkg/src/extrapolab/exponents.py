"""Exponent bookkeeping for multilinear extrapolation.

All exponents are handled through their reciprocals: a value ``a`` stands
for the exponent ``1/a`` and ``a == 0`` encodes infinity.  Functions here
accept floats or :class:`fractions.Fraction` and never coerce, so feeding
fractions gives exact rational answers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

__all__ = [
    "InadmissibleSetup",
    "InadmissiblePair",
    "ScaleSetup",
    "ValidationReport",
    "Path",
    "PowerLaw",
    "recip",
    "validate_setup",
    "symmetric_extension",
    "rescale",
    "translation_params",
    "translate",
    "extrapolation_exponent",
    "step2_path",
    "sparse_exponent",
    "central_exponents",
    "vector_valued_exponent",
    "constant_cpr",
    "phi_compose",
]


class InadmissibleSetup(ValueError):
    """Raised when an exponent tuple violates the admissibility predicate."""


class InadmissiblePair(ValueError):
    """Raised when a ratio has a zero denominator that is not sanctioned."""


def recip(x) -> Fraction | float:
    """Reciprocal of an exponent given as a number, a fraction string or ``inf``.

    >>> recip("4/3")
    Fraction(3, 4)
    >>> recip("inf")
    0
    """
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return Fraction(0)
        return 1 / Fraction(s)
    if isinstance(x, Fraction):
        return 1 / x
    if x == float("inf"):
        return 0.0
    return 1.0 / x


@dataclass(frozen=True)
class ScaleSetup:
    """An exponent configuration ``(m, r, s, p)`` in reciprocal form.

    ``r`` and ``p`` are tuples of length ``m``; ``s`` is a scalar.
    """

    r: tuple
    s: object
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(self.r))
        object.__setattr__(self, "p", tuple(self.p))
        if len(self.r) != len(self.p):
            raise ValueError("r and p must have the same length")

    @property
    def m(self) -> int:
        return len(self.r)

    @property
    def p_sum(self):
        return sum(self.p)

    @property
    def r_sum(self):
        return sum(self.r)


@dataclass
class ValidationReport:
    ok: bool
    index: int | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_setup(setup: ScaleSetup, mode: str = "le") -> ValidationReport:
    """Check ``(r, s) <= p`` (``mode='le'``) or ``(r, s) < p`` (``mode='lt'``).

    The first violated constraint is reported; index ``m`` (0-based) refers
    to the aggregate condition on ``p`` versus ``s``.
    """
    if mode not in ("le", "lt"):
        raise ValueError(f"unknown mode {mode!r}")
    strict = mode == "lt"
    for j, (rj, pj) in enumerate(zip(setup.r, setup.p)):
        if rj < 0 or pj < 0 or rj == 0:
            return ValidationReport(False, j, f"exponent {j} out of range")
        bad = pj >= rj if strict else pj > rj
        if bad:
            op = "<" if strict else "<="
            return ValidationReport(False, j, f"need 1/p_{j + 1} {op} 1/r_{j + 1}")
    ps, s = setup.p_sum, setup.s
    bad = ps <= s if strict else ps < s
    if bad:
        op = ">" if strict else ">="
        return ValidationReport(False, setup.m, f"need 1/p {op} 1/s")
    return ValidationReport(True)


def symmetric_extension(setup: ScaleSetup) -> tuple[tuple, tuple]:
    """Append the dual index: ``1/p_{m+1} = 1 - 1/p`` and ``1/r_{m+1} = 1 - 1/s``.

    Returns the ``(p, r)`` tuples of length ``m + 1``.  Only meaningful when
    ``1/p <= 1``.
    """
    one = 1 if _exact(setup.p + setup.r + (setup.s,)) else 1.0
    ps = setup.p_sum
    if ps > one:
        raise InadmissibleSetup("symmetric form needs 1/p <= 1")
    return setup.p + (one - ps,), setup.r + (one - setup.s,)


def rescale(setup: ScaleSetup, alpha) -> ScaleSetup:
    """Multiply every reciprocal by ``alpha`` (exponents divided by ``alpha``)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return ScaleSetup(
        tuple(alpha * x for x in setup.r), alpha * setup.s, tuple(alpha * x for x in setup.p)
    )


def translation_params(p: Sequence, s, q: Sequence | None = None, mode: str = "generic") -> tuple:
    """Reciprocals ``1/s_j`` with ``sum_j 1/s_j = 1/s``.

    ``generic`` splits ``1/s`` proportionally to ``1/p_j``.  ``step1`` uses
    the split that leaves the ratio ``(1/r_j - 1/q_j)/(1/r_j - 1/p_j)`` of
    the translated exponents unchanged for both ``p`` and ``q``; it needs
    ``1/p != 1/q``.
    """
    ps = sum(p)
    if mode == "generic":
        if ps == 0:
            if s != 0:
                raise InadmissibleSetup("1/p = 0 forces 1/s = 0")
            return tuple(0 * x for x in p)
        return tuple(pj / ps * s for pj in p)
    if mode == "step1":
        if q is None:
            raise ValueError("step1 mode needs q")
        qs = sum(q)
        den = ps - qs
        if den == 0:
            raise InadmissiblePair("step1 split needs 1/p != 1/q")
        return tuple(((ps - s) * qj - (qs - s) * pj) / den for pj, qj in zip(p, q))
    raise ValueError(f"unknown mode {mode!r}")


def translate(setup: ScaleSetup, s_parts: Sequence) -> ScaleSetup:
    """Subtract ``1/s_j`` from ``1/p_j`` and ``1/r_j``, landing at ``s = inf``."""
    zero = 0 if _exact(tuple(s_parts)) else 0.0
    return ScaleSetup(
        tuple(rj - sj for rj, sj in zip(setup.r, s_parts)),
        zero,
        tuple(pj - sj for pj, sj in zip(setup.p, s_parts)),
    )


def _exact(xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _ratio(num, den, what: str):
    # sanctioned 0/0 (matched equality) counts as 1
    if den == 0:
        if num == 0:
            return 1 if isinstance(num, (int, Fraction)) else 1.0
        raise InadmissiblePair(f"zero denominator in {what}")
    return num / den


def _ratios(p, q, r, s) -> list:
    out = [
        _ratio(rj - qj, rj - pj, f"index {j + 1}")
        for j, (pj, qj, rj) in enumerate(zip(p, q, r))
    ]
    out.append(_ratio(sum(q) - s, sum(p) - s, "the aggregate index"))
    return out


def extrapolation_exponent(p: Sequence, q: Sequence, r: Sequence, s) -> object:
    """Power to which ``[w]_p`` enters when extrapolating from ``q`` to ``p``.

    Maximum over the ``m`` index ratios and the aggregate ratio.
    """
    if not (len(p) == len(q) == len(r)):
        raise ValueError("length mismatch")
    return max(_ratios(p, q, r, s))


def sparse_exponent(p: Sequence, r: Sequence, s) -> object:
    """Exponent of ``[w]`` in the sharp bound for sparse forms / ``M_r``.

    Returns ``inf`` at a pole (``1/p_j = 1/r_j`` or ``1/p = 1/s``).
    """
    one = 1 if _exact(tuple(p) + tuple(r) + (s,)) else 1.0
    vals = []
    for rj, pj in zip(r, p):
        d = rj - pj
        vals.append(float("inf") if d == 0 else rj / d)
    d = sum(p) - s
    vals.append(float("inf") if d == 0 else (one - s) / d)
    return max(vals)


def central_exponents(r: Sequence, s) -> tuple:
    """The reciprocals ``1/q_j = tau/r_j`` with ``1/tau = 1 - 1/s + sum 1/r_j``.

    At these exponents every ratio inside :func:`sparse_exponent` equals
    ``1/(1 - tau)``.
    """
    one = 1 if _exact(tuple(r) + (s,)) else 1.0
    tau = one / (one - s + sum(r))
    return tuple(tau * rj for rj in r)


def vector_valued_exponent(p: Sequence, q: Sequence, r: Sequence, s) -> object:
    return sparse_exponent(q, r, s) * extrapolation_exponent(p, q, r, s)


def constant_cpr(p: Sequence, r: Sequence) -> float:
    """``prod_j ((1/r_j)/(1/r_j - 1/p_j))^(1/r_j)``; infinite at a pole."""
    out = 1.0
    for rj, pj in zip(r, p):
        d = rj - pj
        if d == 0:
            return float("inf")
        out *= float(rj / d) ** float(rj)
    return out


# --------------------------------------------------------------------------
# Step 2 path
# --------------------------------------------------------------------------


@dataclass
class Path:
    """Interpolating exponent tuples between ``q`` and ``p``.

    ``tuples[k]`` is ``q^k`` in the original index order, with
    ``tuples[0] == q`` and ``tuples[-1] == p``.  ``gammas[k-1]`` is the
    ratio incurred by the stage ``q^k -> q^(k-1)``; ``perm`` lists the
    original indices in sorted order.
    """

    perm: tuple
    j1: int
    thetas: tuple
    tuples: tuple
    gammas: tuple
    r: tuple = field(default=())

    @property
    def stages(self) -> int:
        return len(self.tuples) - 1

    def gamma_product(self):
        out = 1
        for g in self.gammas:
            out = out * g
        return out


def step2_path(p: Sequence, q: Sequence, r: Sequence) -> Path:
    """Build the chain ``q = q^0, ..., q^n = p`` of Step 2.

    Indices with ``1/p_j >= 1/q_j`` (they shrink towards ``q``) are put
    first via a stable sort; each stage moves exactly one of the remaining
    indices from ``p`` to ``q``.
    """
    p, q, r = tuple(p), tuple(q), tuple(r)
    n1 = len(p)
    if not (len(q) == len(r) == n1):
        raise ValueError("length mismatch")
    exact = _exact(p + q + r)
    one = 1 if exact else 1.0
    tol = 0 if exact else 1e-12
    if abs(sum(p) - one) > tol or abs(sum(q) - one) > tol:
        raise InadmissibleSetup("reciprocals must sum to 1")
    for j in range(n1):
        if not (p[j] < r[j]) or q[j] > r[j]:
            raise InadmissibleSetup(f"need 1/p_j < 1/r_j and 1/q_j <= 1/r_j at index {j + 1}")
    perm = tuple(sorted(range(n1), key=lambda j: -(p[j] - q[j])))
    pp = [p[j] for j in perm]
    qq = [q[j] for j in perm]
    rr = [r[j] for j in perm]
    j1 = sum(1 for j in range(n1) if pp[j] >= qq[j])
    n = n1 - j1
    zero = 0 if exact else 0.0
    total = sum(qq[j] - pp[j] for j in range(j1, n1))
    thetas = [zero]
    for k in range(1, n + 1):
        thetas.append(sum(qq[j] - pp[j] for j in range(n1 - k, n1)) / total)

    def tuple_k(k):
        th = thetas[k]
        t = []
        for j in range(n1):
            if j < j1:
                t.append(qq[j] + th * (pp[j] - qq[j]))
            elif j < n1 - k:
                t.append(qq[j])
            else:
                t.append(pp[j])
        return t

    sorted_tuples = [tuple_k(k) for k in range(n + 1)]
    if n:
        # pin the endpoint exactly to p
        sorted_tuples[n] = list(pp)
    gammas = []
    for k in range(1, n + 1):
        lo, hi = sorted_tuples[k - 1], sorted_tuples[k]
        g = one
        for j in range(j1):
            g = max(g, _ratio(rr[j] - lo[j], rr[j] - hi[j], f"stage {k}"))
        gammas.append(g)
    inv = [0] * n1
    for pos, j in enumerate(perm):
        inv[j] = pos
    tuples = tuple(tuple(t[inv[j]] for j in range(n1)) for t in sorted_tuples)
    return Path(perm, j1, tuple(thetas), tuples, tuple(gammas), r)


# --------------------------------------------------------------------------
# Quantitative bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLaw:
    """``t -> multiplier * coeff * t**alpha``.

    ``multiplier`` collects explicit dimensional factors; ``unknowns`` names
    factors whose value is only known up to a measured constant.
    """

    coeff: float
    alpha: float
    multiplier: float = 1.0
    unknowns: tuple = ()

    def __call__(self, t):
        return self.multiplier * self.coeff * t**self.alpha

    def scaled(self, factor: float) -> "PowerLaw":
        return PowerLaw(self.coeff, self.alpha, self.multiplier * factor, self.unknowns)


def phi_compose(phi: PowerLaw, p: Sequence, q: Sequence, r: Sequence, s) -> PowerLaw:
    """Bound at ``p`` implied by a power-law bound at ``q``.

    With ``1/rho = sum 1/r_j`` and ``E`` the extrapolation exponent, the
    result is ``2^(m^2 rho) * phi(C^rho t^E)`` where the construction
    constant ``C`` is not explicit and is recorded in ``unknowns``.
    """
    m = len(p)
    e = extrapolation_exponent(p, q, r, s)
    rho = 1.0 / float(sum(r))
    label = f"C^{float(phi.alpha) * rho:g}"
    return PowerLaw(
        phi.coeff,
        phi.alpha * e,
        phi.multiplier * 2.0 ** (m * m * rho),
        phi.unknowns + (label,),
    )
