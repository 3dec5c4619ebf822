"""Verification suites shared by ``extrapolab verify`` and the acceptance tests.

Each check returns a list of :class:`Check` records, one per asserted
inequality, carrying the measured value, its bound and the verdict.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .dyadic import PowerFunction, StepFunction, weighted_norm
from .exponents import (
    PowerLaw,
    ScaleSetup,
    central_exponents,
    constant_cpr,
    extrapolation_exponent,
    rescale,
    sparse_exponent,
    step2_path,
    translate,
    translation_params,
)
from .maximal import maximal, power_sweep, weak_norm_experiment
from .rdf import RdfOperator, build_weights, extrapolation_pipeline_check, rdf_apply, rdf_property3
from .sparse import (
    cz_sparse,
    domination_ratio,
    lambda_form,
    lambda_weight_bound,
    random_sparse,
    stopping_violations,
    validate_sparse,
)
from .weights import (
    classical_ap,
    product,
    random_symmetric_weights,
    random_weights,
    rescale_weights,
    symmetric_constant,
    v_weights,
    weight_constant,
)

__all__ = ["Check", "SUITES", "CRITERIA", "run_suite"]


@dataclass
class Check:
    id: str
    measured: float
    bound: float
    passed: bool
    detail: str = ""
    op: str = "<="  # measured op bound is the assertion

    @property
    def margin(self) -> float:
        """Distance to the bound; non-negative exactly when the check passes."""
        return self.bound - self.measured if self.op == "<=" else self.measured - self.bound

    def as_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        return d


def _le(cid, measured, bound, detail=""):
    return Check(cid, float(measured), float(bound), bool(measured <= bound), detail)


def _ge(cid, measured, bound, detail=""):
    return Check(cid, float(measured), float(bound), bool(measured >= bound), detail, ">=")


# --------------------------------------------------------------------------
# Random exponent tuples
# --------------------------------------------------------------------------


def random_symmetric_exponents(
    n1: int, rng: np.random.Generator, strict_q: bool = True, rmax: float = 1.0, gap: float = 0.05
):
    """Reciprocal tuples ``(p, q, r)`` of length ``n1`` with ``sum p = sum q = 1``,
    ``1/p_j < 1/r_j - gap``, ``1/r_j <= rmax`` and ``1/q_j < 1/r_j`` (or ``<=``)."""
    while True:
        r = rng.uniform(max(1.2 / n1, 0.35), rmax, n1)
        p = rng.dirichlet(np.full(n1, 2.0))
        q = rng.dirichlet(np.full(n1, 2.0))
        okq = np.all(q < r - 0.02) if strict_q else np.all(q <= r)
        if np.all(p < r - gap) and okq:
            return [float(x) for x in p], [float(x) for x in q], [float(x) for x in r]


def random_m_exponents(m: int, rng: np.random.Generator, r: list | None = None):
    """Reciprocals ``p`` of length ``m`` with ``0 < 1/p_j < 1/r_j`` and ``1/p <= 1``."""
    r = r or [1.0] * m
    while True:
        p = rng.uniform(0.05, 1.0, m) * np.array(r)
        if p.sum() < 0.98 and np.all(p < np.array(r) * 0.95):
            return [float(x) for x in p]


def _positive_data(L, n, rng, sigma=1.0, sparse_frac=0.0):
    out = []
    for _ in range(n):
        v = rng.lognormal(0.0, sigma, 2**L)
        if sparse_frac:
            v = v * (rng.random(2**L) >= sparse_frac)
            if not np.any(v):
                v[0] = 1.0
        out.append(StepFunction(L, v))
    return out


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------


def crit_sharpness_sweep(level: int = 14, seed: int = 0) -> list[Check]:
    """Power-weight family at ``m = 2``, ``r = (1,1)``, ``p = (3,6)``."""
    t0 = time.perf_counter()
    eps = [2.0**-k for k in range(2, 10)]
    r, p = [1.0, 1.0], [1 / 3, 1 / 6]
    rows = power_sweep(eps, r, p, level)
    lw = np.log([row.wconst for row in rows])
    lr = np.log([row.ratio for row in rows])
    slope = float(np.polyfit(lw[-6:], lr[-6:], 1)[0])
    # the family saturates the ratio of index 1
    gamma = r[0] / (r[0] - p[0])
    norm_err = max(_rel(row.norms, row.eps ** -sum(p)) for row in rows)
    wslope = float(np.polyfit(np.log(eps), lw, 1)[0])
    target = p[0] - r[0]
    elapsed = time.perf_counter() - t0
    return [
        _ge("sweep.slope.lower", slope, 1.35, f"slope {slope:.4f}, target {gamma:.4f}"),
        _le("sweep.slope.upper", slope, 1.65, f"slope {slope:.4f}, target {gamma:.4f}"),
        _le("sweep.norms.exact", norm_err, 1e-12, "prod ||f_j|| = eps^(-1/p)"),
        _le("sweep.wconst.slope", abs(wslope - target) / abs(target), 0.10, f"slope {wslope:.4f} vs {target:.4f}"),
        _le("sweep.runtime", elapsed, 60.0, "seconds"),
    ]


def crit_weak_type(trials: int = 50, level: int = 10, seed: int = 0) -> list[Check]:
    """Dyadic weak-type norm of ``M_r`` equals ``[w]`` on symmetric tuples with ``m = 2``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_up, worst_low, worst_grid = 0.0, math.inf, 0.0
    for _ in range(trials):
        p, _, r = random_symmetric_exponents(3, rng)
        ws = random_symmetric_weights(level, 3, rng, 0.5)
        rep = weak_norm_experiment(ws, p, r, rng, trials=12)
        worst_up = max(worst_up, rep.upper_ratio / rep.constant)
        worst_grid = max(worst_grid, rep.lambda_grid_ratio / rep.constant)
        worst_low = min(worst_low, rep.lower_ratio / rep.constant)
    elapsed = time.perf_counter() - t0
    return [
        _le("weak.upper", worst_up, 1 + 1e-12, "max ratio / [w]"),
        _le("weak.lambda_grid", worst_grid, 1 + 1e-12, "max ratio on a lambda grid / [w]"),
        _ge("weak.lower", worst_low, 1 - 1e-9, "min over tuples of extremal ratio / [w]"),
        _le("weak.runtime", elapsed, 30.0, "seconds"),
    ]


def crit_gamma_product(trials: int = 1000, seed: int = 0) -> list[Check]:
    """``prod_k gamma_k`` along the Step 2 path equals the largest index ratio."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_prod, worst_sum = 0.0, 0.0
    for i in range(trials):
        n1 = 2 + i % 3
        p, q, r = random_symmetric_exponents(n1, rng, strict_q=False)
        path = step2_path(p, q, r)
        target = max(max((rj - qj) / (rj - pj) for pj, qj, rj in zip(p, q, r)), 1.0)
        worst_prod = max(worst_prod, _rel(float(path.gamma_product()), target))
        worst_sum = max(worst_sum, max(abs(sum(t) - 1.0) for t in path.tuples))
    elapsed = time.perf_counter() - t0
    return [
        _le("path.gamma_product", worst_prod, 1e-12, "relative error"),
        _le("path.sums", worst_sum, 1e-12, "|sum 1/q_j^k - 1|"),
        _le("path.runtime", elapsed, 1.0, "seconds"),
    ]


def crit_exponent_regression() -> list[Check]:
    """``m = 1``, ``r = 1``, ``s = inf``: exponent equals ``max(p'/q', p/q)`` exactly."""
    grid = ["4/3", "3/2", "2", "3", "4", "inf"]
    vals = {g: (None if g == "inf" else Fraction(g)) for g in grid}
    bad, count = 0, 0
    for gp in grid:
        for gq in grid:
            pv, qv = vals[gp], vals[gq]
            if pv is None and qv is not None:
                continue  # aggregate ratio (1/q)/0 is not sanctioned
            rp = Fraction(0) if pv is None else 1 / pv
            rq = Fraction(0) if qv is None else 1 / qv
            got = extrapolation_exponent((rp,), (rq,), (Fraction(1),), Fraction(0))
            # oracle in terms of the exponents themselves
            if pv is None:
                expect = Fraction(1)
            else:
                pd = pv / (pv - 1)
                qd = Fraction(1) if qv is None else qv / (qv - 1)
                expect = max(pd / qd, Fraction(0) if qv is None else pv / qv)
            count += 1
            bad += got != expect or not isinstance(got, Fraction)
    return [_le("exponent.regression", bad, 0, f"{count} admissible pairs, exact rationals")]


def crit_sparse_construction(trials: int = 100, level: int = 10, seed: int = 0) -> list[Check]:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    invalid, stop_bad, worst_dom = 0, 0, 0.0
    for i in range(trials):
        m = 1 + i % 2
        recips = list(rng.uniform(0.3, 1.0, m))
        fs = _positive_data(level, m, rng, sigma=1.5, sparse_frac=0.3 * (i % 3 == 0))
        S = cz_sparse(fs, recips)
        invalid += bool(validate_sparse(S))
        stop_bad += len(stopping_violations(S, fs, recips))
        worst_dom = max(worst_dom, domination_ratio(S, fs, recips) / 2.0 ** (2 * sum(recips)))
    elapsed = time.perf_counter() - t0
    return [
        _le("sparse.valid", invalid, 0, "collections failing the 1/2-sparse validator"),
        _le("sparse.stopping", stop_bad, 0, "non-top cubes breaking the stopping inequality"),
        _le("sparse.domination", worst_dom, 1 + 1e-12, "max M / (2^(2/r) A_S)"),
        _le("sparse.runtime", elapsed, 30.0, "seconds"),
    ]


def _sparse_configs(level):
    # weights and exponents are fixed; the seed only draws the functions
    rng = np.random.default_rng(20240611)
    cfgs = []
    for n1 in (2, 3):
        for _ in range(2):
            p, _, r = random_symmetric_exponents(n1, rng, gap=0.2)
            ws = random_symmetric_weights(level, n1, rng, 0.25)
            cfgs.append((p, r, ws, v_weights(ws, p, r)))
    return cfgs


def _weighted_sparse_constant(trials, level, seed):
    rng = np.random.default_rng(seed)
    cfgs = _sparse_configs(level)
    worst_form, worst_cube = 0.0, 0.0
    for i in range(trials):
        p, r, ws, vs = cfgs[i % len(cfgs)]
        if i % 2:
            fs = _positive_data(level, len(p), rng)
        else:
            # shaped like the extremal functions v_j^(1/r_j)
            fs = [v.pow(rj) * g for v, rj, g in zip(vs, r, _positive_data(level, len(p), rng, 0.5))]
        S = cz_sparse(fs, r)
        rep = lambda_weight_bound(S, fs, ws, p, r)
        worst_form = max(worst_form, rep.form_ratio)
        worst_cube = max(worst_cube, rep.cube_ratio / rep.cube_bound)
    return worst_form, worst_cube


def crit_sparse_forms(trials: int = 100, level: int = 10, seed: int = 0, seeds: int = 3) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_m, worst_l = 0.0, 0.0
    for i in range(trials):
        m = 1 + i % 2
        recips = list(rng.uniform(0.3, 1.0, m))
        fs = _positive_data(level, m, rng, sigma=1.5)
        mnorm = maximal(fs, recips).total()
        base = 2.0 ** (2 * sum(recips))
        worst_m = max(worst_m, mnorm / (base * lambda_form(cz_sparse(fs, recips), fs, recips)))
        for _ in range(3):
            S = random_sparse(level, rng)
            worst_l = max(worst_l, lambda_form(S, fs, recips) / (2 * mnorm))
    consts = []
    worst_cube = 0.0
    for k in range(seeds):
        c, wc = _weighted_sparse_constant(trials, level, seed + 1000 * (k + 1))
        consts.append(c)
        worst_cube = max(worst_cube, wc)
    med = float(np.median(consts))
    spread = max(abs(c - med) / med for c in consts)
    return [
        _le("forms.maximal_vs_lambda", worst_m, 1 + 1e-12, "||M||_1 / (2^(2/r) Lambda_S)"),
        _le("forms.lambda_vs_maximal", worst_l, 1 + 1e-12, "Lambda_S' / (2 ||M||_1)"),
        _le("forms.cube_bound", worst_cube, 1 + 1e-12, "cube estimate / 2^(1 - sum beta)"),
        _le("forms.weighted_constant", max(consts), 2.0**10, "C per seed " + ", ".join(f"{c:.4g}" for c in consts)),
        _le("forms.constant_stability", spread, 0.20, "max relative deviation from the median"),
    ]


def crit_rdf(trials: int = 100, level: int = 10, K: int = 30, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    viol_i, worst_ii, worst_C = 0, 0.0, 0.0
    records = []
    for i in range(trials):
        m = 1 + i % 2
        r = [float(x) for x in rng.uniform(0.5, 1.0, m)]
        p = random_m_exponents(m, rng, r)
        ws = random_weights(level, m, rng, 0.4)
        fs = _positive_data(level, m, rng, sparse_frac=0.2)
        rfs = []
        for j in range(m):
            res = rdf_apply(RdfOperator(p, r, ws, j, K), fs[j])
            viol_i += int(np.sum(res.Rf.values < fs[j].values))
            worst_ii = max(worst_ii, res.norm_Rf / (2 * res.norm_f))
            rfs.append(res.Rf)
        C, scale = rdf_property3(rfs, p, r, ws)
        records.append((C, scale))
        worst_C = max(worst_C, C)
    # (iii) with the corpus constant and the truncation slack
    slack = 1 + 2.0**-25
    viol_iii = sum(C * scale > slack * worst_C * scale for C, scale in records)
    return [
        _le("rdf.majorant", viol_i, 0, "cells with R f < |f|"),
        _le("rdf.norm", worst_ii, 1.0, "||R f|| / (2 ||f||)"),
        _le("rdf.property3", viol_iii, 0, "instances above (1 + 2^-25) C 2^m c [w]^gamma"),
        _le("rdf.constant", worst_C, 2.0**6, "corpus constant C"),
    ]


def _eps_family(eps, level):
    w1 = PowerFunction(level, (1 - eps) * 0.5).to_step()
    return (w1, StepFunction.constant(level), w1.pow(-1.0))


def crit_weight_construction(trials: int = 100, level: int = 8, K: int = 30, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_prod, worst_tr = 0.0, 0.0
    for i in range(trials):
        if i == 0:
            p, q, r = [0.5, 0.25, 0.25], [0.25, 0.25, 0.5], [1.0, 1.0, 1.0]
        else:
            p, q, r = random_symmetric_exponents(2 + i % 3, rng)
        n1 = len(p)
        ws = random_symmetric_weights(level, n1, rng, 0.4)
        fs = _positive_data(level, n1, rng)
        res = build_weights(fs, p, q, r, ws, K)
        worst_prod = max(worst_prod, float(np.max(np.abs(product(list(res.W)).values - 1.0))))
        worst_tr = max(worst_tr, res.transfer / 2.0 ** ((n1 - 1) ** 2))
    # degenerating family on the worked path
    p, q, r = [0.5, 0.25, 0.25], [0.25, 0.25, 0.5], [1.0, 1.0, 1.0]
    claimed = float(extrapolation_exponent(p[:2], q[:2], r[:2], 1 - r[2]))
    fs = [StepFunction.constant(level) for _ in range(3)]
    lw, lW = [], []
    for e in [2.0**-k for k in range(1, 7)]:
        ws = _eps_family(e, level)
        res = build_weights(fs, p, q, r, ws, K)
        lw.append(math.log(symmetric_constant(ws, p, r).value))
        lW.append(math.log(symmetric_constant(res.W, q, r).value))
    slope = float(np.polyfit(lw, lW, 1)[0])
    return [
        _le("build.product", worst_prod, 1e-10, "max |prod W_j - 1|"),
        _le("build.transfer", worst_tr, 1.0, "norm transfer / 2^(m^2)"),
        _le("build.constant_slope", slope, claimed * 1.05, f"slope of log[W] vs log[w], claimed {claimed}"),
    ]


def crit_structural(trials: int = 200, level: int = 8, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    perm_bad = 0
    worst = {"rescale": 0.0, "translate": 0.0, "duality": 0.0, "a1": 0.0}
    for i in range(trials):
        n1 = 2 + i % 3
        p, _, r = random_symmetric_exponents(n1, rng)
        ws = random_symmetric_weights(level, n1, rng, 0.5)
        perm = rng.permutation(n1)
        a = symmetric_constant(ws, p, r).value
        b = symmetric_constant([ws[j] for j in perm], [p[j] for j in perm], [r[j] for j in perm]).value
        perm_bad += a != b

        m = 1 + i % 3
        rr = [float(x) for x in rng.uniform(0.3, 1.0, m)]
        pp = [float(x) * 0.9 for x in rng.uniform(0.05, 1.0, m) * np.array(rr)]
        s = float(rng.uniform(0.0, 0.9)) * sum(pp)
        setup = ScaleSetup(tuple(rr), s, tuple(pp))
        wm = random_weights(level, m, rng, 0.5)
        alpha = float(rng.uniform(0.3, 3.0))
        lhs = weight_constant(wm, rescale(setup, alpha)).value ** (1 / alpha)
        rhs = weight_constant(rescale_weights(wm, alpha), setup).value
        worst["rescale"] = max(worst["rescale"], _rel(lhs, rhs))
        sj = translation_params(setup.p, setup.s)
        worst["translate"] = max(
            worst["translate"],
            _rel(weight_constant(wm, translate(setup, sj)).value, weight_constant(wm, setup).value),
        )
        w = wm[0]
        rp = float(rng.uniform(0.05, 0.95))
        lhs = weight_constant([w], ScaleSetup((1.0,), 0.0, (rp,))).value
        rhs = weight_constant([w.pow(-1.0)], ScaleSetup((1.0,), 0.0, (1 - rp,))).value
        worst["duality"] = max(worst["duality"], _rel(lhs, rhs))
        lhs = weight_constant([w], ScaleSetup((1.0,), 0.0, (0.0,))).value
        rhs = classical_ap(w.pow(-1.0), 1.0).value
        worst["a1"] = max(worst["a1"], _rel(lhs, rhs))
    one = StepFunction.constant(level)
    unit = [
        weight_constant([one, one], ScaleSetup((1.0, 0.5), 0.0, (0.5, 0.25))).value,
        symmetric_constant([one] * 3, [0.5, 0.25, 0.25], [1.0, 0.5, 0.5]).value,
        classical_ap(one, 0.5).value,
        classical_ap(one, 1.0).value,
    ]
    return [
        _le("identity.unit_weights", max(abs(c - 1.0) for c in unit), 1e-12, "constants of w = 1"),
        _le("identity.permutation", perm_bad, 0, "tuples where the permuted constant differs"),
        _le("identity.rescale", worst["rescale"], 1e-12, "relative error"),
        _le("identity.translation", worst["translate"], 1e-12, "relative error"),
        _le("identity.duality", worst["duality"], 1e-12, "[w]_p vs [w^-1]_p'"),
        _le("identity.a1", worst["a1"], 1e-12, "[w]_inf vs [w^-1]_A1"),
    ]


def _hypothesis(r):
    q = central_exponents(r, 0.0)
    # the dyadic constant of M_r at q is at most e^(sum 1/r_j) c_{q,r} [w]^gamma
    phi = PowerLaw(constant_cpr(q, r), float(sparse_exponent(q, r, 0.0)), math.exp(sum(r)))
    return q, phi


def crit_pipeline(trials: int = 10, level: int = 8, K: int = 30, seed: int = 0, weak_targets: int = 2) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_u, worst_tr, chain_bad, link_bad = 0.0, 0.0, 0, 0
    weak_u, weak_bad, weak_n = 0.0, 0, 0
    for i in range(trials):
        m = 1 + i % 2
        r = [1.0] * m if m == 2 else [float(rng.uniform(0.5, 1.0))]
        q, phi = _hypothesis(r)
        p = random_m_exponents(m, rng, r)
        ws = random_weights(level, m, rng, 0.4)
        fs = _positive_data(level, m, rng)
        rep = extrapolation_pipeline_check(fs, ws, r, p, q, lambda f: maximal(f, r), phi, rng, 2, K)
        worst_u = max(worst_u, rep.multiplier)
        worst_tr = max(worst_tr, rep.transfer / rep.transfer_bound)
        chain_bad += rep.lhs > rep.chain_bound * (1 + 1e-9)
        link_bad += not (rep.holder_ok and rep.hypothesis_ok)
        if i < weak_targets:
            h = maximal(fs, r)
            for lam in np.geomspace(np.quantile(h.values, 0.05), np.quantile(h.values, 0.95), 32):
                hl = StepFunction(level, lam * (h.values > lam))
                rl = extrapolation_pipeline_check(fs, ws, r, p, q, lambda f, hl=hl: hl, phi, rng, 0, K)
                weak_n += 1
                weak_u = max(weak_u, rl.multiplier)
                weak_bad += not rl.ok
    return [
        _le("pipeline.multiplier", worst_u, 2.0**12, "measured multiplier of the composed power law"),
        _le("pipeline.chain", chain_bad, 0, "targets where ||h|| exceeds the chained bound"),
        _le("pipeline.links", link_bad, 0, "targets with a failing Hoelder or hypothesis link"),
        _le("pipeline.transfer", worst_tr, 1.0, "norm transfer / 2^(m^2)"),
        _le("pipeline.weak.multiplier", weak_u, 2.0**12, f"{weak_n} level-set instances"),
        _le("pipeline.weak.chain", weak_bad, 0, "level-set instances with a failing link"),
    ]


CRITERIA: dict[str, Callable[..., list[Check]]] = {
    "sharpness_sweep": crit_sharpness_sweep,
    "weak_type_equality": crit_weak_type,
    "gamma_product": crit_gamma_product,
    "exponent_regression": crit_exponent_regression,
    "sparse_construction": crit_sparse_construction,
    "sparse_forms": crit_sparse_forms,
    "rubio_de_francia": crit_rdf,
    "weight_construction": crit_weight_construction,
    "structural_identities": crit_structural,
    "pipeline": crit_pipeline,
}

SUITES: dict[str, tuple[str, ...]] = {
    "exponents": ("gamma_product", "exponent_regression"),
    "weights": ("structural_identities",),
    "maximal": ("sharpness_sweep", "weak_type_equality"),
    "sparse": ("sparse_construction", "sparse_forms"),
    "rdf": ("rubio_de_francia", "weight_construction"),
    "pipeline": ("pipeline",),
}


def run_suite(name: str, seed: int = 0, trials: int | None = None) -> list[Check]:
    """Run every criterion of a suite; ``trials`` scales the corpus sizes down if given."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    out = []
    for crit in SUITES[name]:
        fn = CRITERIA[crit]
        kwargs = {}
        code = fn.__code__.co_varnames[: fn.__code__.co_argcount]
        if "seed" in code:
            kwargs["seed"] = seed
        if trials is not None and "trials" in code:
            kwargs["trials"] = trials
        out.extend(fn(**kwargs))
    return out
