"""Rubio de Francia iteration and the weight construction behind extrapolation.

``R f = sum_k N^k f / (2B)^k`` majorises ``f``, is at most twice as large in
norm, and is nearly constant on every cube in the multilinear sense.  Step 1
turns weights at exponents ``p`` into weights at ``q`` when one index moves;
Step 2 chains Step 1 along the path from exponent calculus; the pipeline
check runs the whole extrapolation argument on a concrete operator.

Exponent tuples of length ``m + 1`` are symmetric: reciprocals sum to 1 and
weights multiply to 1.  Tuples of length ``m`` are in the ``s = inf`` form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dyadic import StepFunction, grid_blocks, weighted_norm
from .exponents import PowerLaw, ScaleSetup, constant_cpr, extrapolation_exponent, sparse_exponent, step2_path, translation_params
from .maximal import cube_products, n_operator, n_operator_bound
from .weights import product, symmetric_constant, weight_constant

__all__ = [
    "RdfOperator",
    "RdfResult",
    "rdf_apply",
    "rdf_property3",
    "Step1Result",
    "build_weights_step1",
    "BuildResult",
    "build_weights",
    "PipelineReport",
    "extrapolation_pipeline_check",
    "ZeroDatum",
]


class ZeroDatum(ValueError):
    """An input function vanishes identically."""


# --------------------------------------------------------------------------
# Rubio de Francia iteration
# --------------------------------------------------------------------------


@dataclass
class RdfOperator:
    """``R_j`` for index ``j`` of the ``s = inf`` setup ``(p, r)`` with weights ``ws``."""

    p: tuple
    r: tuple
    ws: tuple
    j: int
    K: int = 30
    B: float | None = None
    max_doublings: int = 20

    def __post_init__(self):
        self.p = tuple(float(x) for x in self.p)
        self.r = tuple(float(x) for x in self.r)
        self.ws = tuple(self.ws)
        if self.B is None:
            self.B = n_operator_bound(self.p, self.r, self.j)

    def norm(self, f: StepFunction) -> float:
        return weighted_norm(f, self.ws[self.j], self.p[self.j])

    def N(self, f: StepFunction) -> StepFunction:
        return n_operator(self.p, self.r, self.ws, self.j, f)


@dataclass
class RdfResult:
    Rf: StepFunction
    B: float
    doublings: int
    tail: float  # 2^-K ||f||, the norm left out by truncation
    norm_f: float
    norm_Rf: float


def rdf_apply(op: RdfOperator, f: StepFunction) -> RdfResult:
    """Truncated series ``sum_{k<=K} N^k |f| / (2B)^k``.

    ``B`` starts at the a priori bound and doubles whenever an iterate
    shows ``||N h|| > B ||h||``; the series is then restarted.
    """
    f0 = StepFunction(f.level, np.abs(f.values))
    nf = op.norm(f0)
    B = op.B
    for doubling in range(op.max_doublings + 1):
        t, total, ok = f0, f0.values.copy(), True
        for _ in range(op.K):
            nt = op.N(t)
            if op.norm(nt) > B * op.norm(t):
                ok = False
                break
            t = nt * (1.0 / (2.0 * B))
            total += t.values
        if ok:
            Rf = StepFunction(f.level, total)
            return RdfResult(Rf, B, doubling, 2.0**-op.K * nf, nf, op.norm(Rf))
        B *= 2.0
    raise RuntimeError(f"no admissible B after {op.max_doublings} doublings")


def rdf_property3(rfs: Sequence[StepFunction], p: Sequence, r: Sequence, ws: Sequence) -> tuple[float, float]:
    """Measure the constant in ``prod <R f_j>_{r_j,Q} <= C 2^m c [w]^gamma inf_Q prod R f_j``.

    Returns ``(C, 2^m c [w]^gamma)`` for the ``s = inf`` setup ``(p, r)``.
    """
    m = len(rfs)
    L = rfs[0].level
    prod_vals = product(list(rfs)).values
    worst = 0.0
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(0, k, L)
        avg = cube_products(rfs, r, first, size, count)
        low = prod_vals.reshape(count, size).min(axis=1)
        worst = max(worst, float(np.max(avg / low)))
    const = weight_constant(ws, ScaleSetup(tuple(r), 0.0, tuple(p))).value
    gamma = float(sparse_exponent(p, r, 0.0))
    scale = 2.0**m * constant_cpr(p, r) * const**gamma
    return worst / scale, scale


# --------------------------------------------------------------------------
# Step 1: one increasing index
# --------------------------------------------------------------------------


@dataclass
class Step1Result:
    W: tuple
    lhs: float  # prod ||f_j||_{L^{q_j}(W_j^{q_j})}
    rhs: float  # prod ||f_j||_{L^{p_j}(w_j^{p_j})}
    s_parts: tuple
    rdf: list = field(default_factory=list)

    @property
    def transfer(self) -> float:
        return self.lhs / self.rhs


def _sym_norms(fs, ws, recips) -> float:
    out = 1.0
    for f, w, rc in zip(fs, ws, recips):
        out *= weighted_norm(f, w, float(rc))
    return out


def _check_symmetric(p, q, r, ws, fs):
    n1 = len(p)
    if not (len(q) == len(r) == len(ws) == len(fs) == n1):
        raise ValueError("length mismatch")
    if abs(sum(p) - 1) > 1e-12 or abs(sum(q) - 1) > 1e-12:
        raise ValueError("reciprocals of p and q must sum to 1")
    for j in range(n1):
        if not (p[j] < r[j] and q[j] <= r[j]):
            raise ValueError(f"need 1/p_j < 1/r_j and 1/q_j <= 1/r_j at index {j + 1}")
    for j, f in enumerate(fs):
        if not np.any(f.values > 0):
            raise ZeroDatum(f"f_{j + 1} vanishes identically")


def build_weights_step1(
    fs: Sequence, p: Sequence, q: Sequence, r: Sequence, ws: Sequence, K: int = 30
) -> Step1Result:
    """Weights ``W`` at ``q`` from weights ``w`` at ``p`` when only one index increases.

    Exactly one ``j0`` must have ``1/p_j0 < 1/q_j0``; the rest satisfy
    ``1/p_j >= 1/q_j``.  Guarantees, checked by the callers:
    ``prod ||f_j||_{L^{q_j}(W_j^{q_j})} <= 2^m prod ||f_j||_{L^{p_j}(w_j^{p_j})}``
    and ``prod W_j = 1``.
    """
    p = [float(x) for x in p]
    q = [float(x) for x in q]
    r = [float(x) for x in r]
    _check_symmetric(p, q, r, ws, fs)
    n1 = len(p)
    m = n1 - 1
    inc = [j for j in range(n1) if p[j] < q[j]]
    if len(inc) != 1:
        raise ValueError(f"step 1 needs exactly one increasing index, got {len(inc)}")
    j0 = inc[0]
    order = [j for j in range(n1) if j != j0] + [j0]
    P = [p[j] for j in order]
    Q = [q[j] for j in order]
    R = [r[j] for j in order]
    w_ = [ws[j] for j in order]
    f_ = [fs[j] for j in order]
    s, pa, qa = 1.0 - R[m], 1.0 - P[m], 1.0 - Q[m]
    sj = list(translation_params(P[:m], s, Q[:m], mode="step1"))
    for j in range(m):
        if P[j] == Q[j]:
            # the split gives exactly 1/p_j here; pin it against rounding
            sj[j] = P[j]
    Ps = [P[j] - sj[j] for j in range(m)]
    Rs = [R[j] - sj[j] for j in range(m)]
    ps, qs = pa - s, qa - s
    expo = -(ps - qs) / ps
    W = []
    reports = []
    for j in range(m):
        if P[j] == Q[j]:
            g = w_[j].pow(-1.0)
        else:
            g = f_[j].pow(Ps[j] / P[j]) * w_[j].pow(-sj[j] / P[j])
        op = RdfOperator(tuple(Ps), tuple(Rs), tuple(w_[:m]), j, K)
        res = rdf_apply(op, g)
        reports.append(res)
        W.append(res.Rf.pow(expo) * w_[j].pow(qs / ps))
    W.append(product(W).pow(-1.0))
    inv = [0] * n1
    for pos, j in enumerate(order):
        inv[j] = pos
    Wout = tuple(W[inv[j]] for j in range(n1))
    lhs = _sym_norms(fs, Wout, q)
    rhs = _sym_norms(fs, ws, p)
    return Step1Result(Wout, lhs, rhs, tuple(sj), reports)


# --------------------------------------------------------------------------
# Step 2: the full path
# --------------------------------------------------------------------------


@dataclass
class BuildResult:
    W: tuple
    path: object
    stages: list
    lhs: float
    rhs: float

    @property
    def transfer(self) -> float:
        return self.lhs / self.rhs


def build_weights(fs: Sequence, p: Sequence, q: Sequence, r: Sequence, ws: Sequence, K: int = 30) -> BuildResult:
    """Weights at ``q`` from weights at ``p`` by chaining Step 1 along the path.

    The norm transfer is at most ``2^m`` per stage, ``2^(m^2)`` in total, and
    ``[W]_q <= C [w]_p^E`` with ``E`` the extrapolation exponent.
    """
    path = step2_path(p, q, r)
    _check_symmetric([float(x) for x in p], [float(x) for x in q], [float(x) for x in r], ws, fs)
    W = tuple(ws)
    stages = []
    for k in range(path.stages, 0, -1):
        res = build_weights_step1(fs, path.tuples[k], path.tuples[k - 1], r, W, K)
        stages.append(res)
        W = res.W
    lhs = _sym_norms(fs, W, [float(x) for x in q])
    rhs = _sym_norms(fs, ws, [float(x) for x in p])
    return BuildResult(W, path, stages, lhs, rhs)


# --------------------------------------------------------------------------
# End-to-end extrapolation
# --------------------------------------------------------------------------


@dataclass
class PipelineReport:
    m: int
    p: tuple
    q: tuple
    exponent: float  # extrapolation exponent E
    wconst: float  # [w]_{p,(r,s)}
    lhs: float  # ||h||_{L^p(w^p)}
    norms: float  # prod ||f_j||_{L^{p_j}(w_j^{p_j})}
    phi: PowerLaw  # composed bound at p
    multiplier: float  # lhs / (c [w]^(alpha E) norms)
    chain_bound: float  # right side of the chained inequalities
    holder_ok: bool
    hypothesis_ok: bool
    transfer: float  # worst norm transfer over candidates
    transfer_bound: float
    wconst_ratio: float  # worst [W]_q / [w]_p^E in rescaled variables
    candidates: int

    @property
    def ok(self) -> bool:
        return (
            self.holder_ok
            and self.hypothesis_ok
            and self.transfer <= self.transfer_bound
            and self.lhs <= self.chain_bound * (1 + 1e-9)
        )


def _extremal_dual(H: StepFunction, W: StepFunction, recip: float) -> StepFunction:
    """``g >= 0`` with ``int H g = ||H W||_P`` and ``||g / W||_{P'} = 1``."""
    if recip == 0:
        c = int(np.argmax(H.values * W.values))
        vals = np.zeros(H.ncells)
        vals[c] = W.values[c] / H.h
        return StepFunction(H.level, vals)
    P = 1.0 / recip
    hw = H * W
    norm = weighted_norm(H, W, recip)
    if norm == 0:
        # every g norms the zero function; take one with ||g / W||_P' = 1
        return W * (1.0 / weighted_norm(StepFunction.constant(H.level), W.pow(-1.0), 1.0 - recip))
    return hw.pow(P - 1.0) * W * (1.0 / norm ** (P - 1.0))


def extrapolation_pipeline_check(
    fs: Sequence,
    ws: Sequence,
    r: Sequence,
    p: Sequence,
    q: Sequence,
    operator: Callable[[Sequence], StepFunction],
    phi_q: PowerLaw,
    rng: np.random.Generator,
    n_random: int = 2,
    K: int = 30,
) -> PipelineReport:
    """Run the extrapolation argument for ``h = operator(fs)`` from ``q`` to ``p``.

    All tuples have length ``m`` and ``s = inf``.  The exponents are rescaled
    so that ``sum 1/r_j = 1``, the data are completed by a dual function
    (the norming function of ``h`` and ``n_random`` random ones), weights at
    ``q`` are built, and every inequality of the chain is evaluated.
    """
    m = len(fs)
    r = [float(x) for x in r]
    p = [float(x) for x in p]
    q = [float(x) for x in q]
    alpha = 1.0 / sum(r)
    P = [alpha * x for x in p] + [1.0 - alpha * sum(p)]
    Q = [alpha * x for x in q] + [1.0 - alpha * sum(q)]
    R = [alpha * x for x in r] + [1.0]
    Ws = [w.pow(alpha) for w in ws]
    Ws.append(product(Ws).pow(-1.0))
    Fs = [f.pow(alpha) for f in fs]
    h = operator(fs)
    H = h.pow(alpha)
    w = product(list(ws))

    E = float(extrapolation_exponent(p, q, r, 0.0))
    wconst = weight_constant(list(ws), ScaleSetup(tuple(r), 0.0, tuple(p))).value
    wsym = symmetric_constant(Ws, P, R).value
    lhs = weighted_norm(h, w, sum(p))
    norms = _sym_norms(fs, ws, p)
    phi_p = PowerLaw(phi_q.coeff, phi_q.alpha * E, phi_q.multiplier * 2.0 ** (m * m / alpha), phi_q.unknowns + ("C",))
    multiplier = lhs / (phi_q.coeff * wconst ** (phi_q.alpha * E) * norms)

    cands = [_extremal_dual(H, Ws[m].pow(-1.0), sum(P[:m]))]
    for _ in range(n_random):
        cands.append(StepFunction(h.level, rng.lognormal(0.0, 1.0, h.ncells)))
    holder_ok = hyp_ok = True
    transfer, wratio, chain = 0.0, 0.0, math.inf
    for idx, g in enumerate(cands):
        built = build_weights(Fs + [g], P, Q, R, Ws, K)
        Wq = built.W
        transfer = max(transfer, built.transfer)
        wratio = max(wratio, symmetric_constant(Wq, Q, R).value / wsym**E)
        # Hoelder against the dual function
        Wprod = product(list(Wq[:m]))
        pair = float(np.sum(H.values * g.values) * H.h)
        h_q = weighted_norm(H, Wprod, sum(Q[:m]))
        g_q = weighted_norm(g, Wq[m], Q[m])
        holder_ok &= pair <= h_q * g_q * (1 + 1e-9)
        # hypothesis at q in the original scale
        V = [x.pow(1.0 / alpha) for x in Wq[:m]]
        vconst = weight_constant(V, ScaleSetup(tuple(r), 0.0, tuple(q))).value
        hyp_lhs = weighted_norm(h, product(V), sum(q))
        hyp_rhs = phi_q(vconst) * _sym_norms(fs, V, q)
        hyp_ok &= hyp_lhs <= hyp_rhs * (1 + 1e-9)
        if idx == 0:
            # the norming candidate turns the chain into a bound for ||h||
            chain = (2.0 ** (m * m) * built.rhs) ** (1 / alpha) * phi_q(vconst)
    return PipelineReport(
        m, tuple(p), tuple(q), E, wconst, lhs, norms, phi_p, multiplier, chain,
        bool(holder_ok), bool(hyp_ok), transfer, 2.0 ** (m * m), wratio, len(cands),
    )
