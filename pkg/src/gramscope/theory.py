"""Self-checks of the structural facts the completion method relies on.

Each check draws random instances and verifies a closed-form statement
against an independent computation: the spectral bound on quantum Gram
matrices, the POVM Hilbert-Schmidt norm budget, the rank-function
conjugate, and the trace-vs-rank envelope inequality on the spectral box.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .gram import gram, numerical_rank, r_qm, realize
from .hermitian import clip_spectrum, herm_basis
from .solver import rank_conjugate
from .synth import sample_ensemble, sample_projective_measurement


def check_norm_bound(trials: int, rng: np.random.Generator, dims=(2, 3, 4)) -> dict:
    """||G|| <= W + V*d over random valid ensembles, plus ||G|| <= ||G||_F
    and the state-norm window [1/sqrt(d), 1]."""
    worst = -np.inf
    bases = {d: herm_basis(d) for d in dims}
    for t in range(trials):
        d = int(rng.choice(dims))
        w = int(rng.integers(1, 7))
        v = int(rng.integers(1, 5))
        mixed = bool(rng.integers(0, 2))
        ens = sample_ensemble(d, w, v, rng, mixed=mixed)
        g = gram(realize(ens, bases[d])).values
        opnorm = float(np.linalg.norm(g, 2))
        fro = float(np.linalg.norm(g))
        slack = opnorm - r_qm(w, v, d)
        worst = max(worst, slack)
        if slack > 1e-9 or opnorm > fro + 1e-9:
            return {
                "ok": False,
                "trial": t,
                "d": d,
                "w": w,
                "v": v,
                "opnorm": opnorm,
                "bound": r_qm(w, v, d),
            }
        for rho in ens.states:
            hs = float(np.linalg.norm(rho))
            if not (1.0 / np.sqrt(d) - 1e-9 <= hs <= 1.0 + 1e-9):
                return {"ok": False, "trial": t, "state_norm": hs, "d": d}
    return {"ok": True, "trials": trials, "worst_slack": worst}


def check_povm_norm_budget(trials: int, rng: np.random.Generator, dims=(2, 3, 4)) -> dict:
    """sum_k ||E_k||_F^2 <= d for POVMs, with equality exactly for
    projective non-degenerate ones. Non-projective samples are mixtures of
    projective measurements and degenerate projectors."""
    equalities = 0
    for t in range(trials):
        d = int(rng.choice(dims))
        kind = int(rng.integers(0, 3))
        if kind == 0:
            povm = sample_projective_measurement(d, rng)
            projective = True
        elif kind == 1 and d > 1:
            mults = [d - 1, 1] if d > 1 else [1]
            povm = sample_projective_measurement(d, rng, degeneracies=mults)
            projective = d == 2 and mults == [1, 1]
        else:
            lam = float(rng.uniform(0.1, 0.9))
            a = sample_projective_measurement(d, rng)
            b = sample_projective_measurement(d, rng)
            povm = [lam * ea + (1 - lam) * eb for ea, eb in zip(a, b)]
            projective = False
        budget = sum(float(np.linalg.norm(e)) ** 2 for e in povm)
        if budget > d + 1e-9:
            return {"ok": False, "trial": t, "d": d, "budget": budget}
        if projective:
            if abs(budget - d) > 1e-9:
                return {"ok": False, "trial": t, "d": d, "budget": budget, "expected": d}
            equalities += 1
    return {"ok": True, "trials": trials, "equality_cases": equalities}


def rank_conjugate_bruteforce(y: np.ndarray) -> float:
    """Independent oracle: maximize tr(YX) - |S| over X built from subsets S
    of the eigenprojectors of Y (the optimizer structure of the conjugate)."""
    y = 0.5 * (y + y.T)
    lam = np.linalg.eigvalsh(y)
    n = lam.size
    best = 0.0  # S empty: X = 0, rank 0
    for r in range(1, n + 1):
        for subset in combinations(range(n), r):
            best = max(best, float(sum(lam[j] for j in subset)) - r)
    return best


def feasible_sample_pool(
    n: int, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random X in {PSD, ||X|| <= 1} with known ranks, for Monte-Carlo
    upper-bound checks of the conjugate."""
    samples = np.zeros((count, n, n))
    ranks = rng.integers(0, n + 1, size=count)
    for idx, r in enumerate(ranks):
        if r == 0:
            continue
        a = rng.standard_normal((n, r))
        x = a @ a.T
        top = float(np.linalg.eigvalsh(x)[-1])
        samples[idx] = x * (rng.uniform(0.0, 1.0) / top)
    return samples, ranks


def check_rank_conjugate(
    trials: int, rng: np.random.Generator, n: int = 3, mc_samples: int = 100_000
) -> dict:
    """Closed-form conjugate vs brute-force subset oracle, plus Monte-Carlo
    feasible samples that must never beat it."""
    pool, ranks = feasible_sample_pool(n, mc_samples, rng)
    worst_gap = 0.0
    for t in range(trials):
        y = rng.standard_normal((n, n)) * rng.uniform(0.3, 3.0)
        y = 0.5 * (y + y.T)
        closed = rank_conjugate(y)
        brute = rank_conjugate_bruteforce(y)
        if abs(closed - brute) > 1e-9:
            return {"ok": False, "trial": t, "closed_form": closed, "bruteforce": brute}
        if np.all(np.linalg.eigvalsh(y) <= 1.0) and closed != 0.0:
            return {"ok": False, "trial": t, "closed_form": closed, "expected": 0.0}
        mc_best = float(np.max(np.einsum("kij,ij->k", pool, y) - ranks))
        if mc_best > closed + 1e-9:
            return {"ok": False, "trial": t, "closed_form": closed, "mc_best": mc_best}
        worst_gap = max(worst_gap, mc_best - closed)
    return {"ok": True, "trials": trials, "mc_samples": mc_samples}


def check_envelope(
    trials: int, rng: np.random.Generator, n: int = 6, radius: float = 5.0
) -> dict:
    """tr(X) <= R * rank(X) for X clipped into the spectral box [0, R]."""
    for t in range(trials):
        m = rng.standard_normal((n, n)) * rng.uniform(0.5, 2.0 * radius)
        x = clip_spectrum(0.5 * (m + m.T), 0.0, radius)
        tr = float(np.trace(x))
        if tr > radius * numerical_rank(x) + 1e-9:
            return {"ok": False, "trial": t, "trace": tr, "rank": numerical_rank(x)}
    return {"ok": True, "trials": trials}


def run_all_checks(n: int, trials: int, seed: int) -> dict:
    """Run every theory check with a shared seeded source; n bounds the
    brute-force matrix size."""
    if n > 6:
        raise ValueError(f"brute-force checks are limited to n <= 6, got {n}")
    rng = np.random.default_rng(seed)
    results = {
        "norm_bound": check_norm_bound(trials, rng),
        "povm_norm_budget": check_povm_norm_budget(trials, rng),
        "rank_conjugate": check_rank_conjugate(
            min(trials, 500), rng, n=n, mc_samples=min(100_000, 200 * trials)
        ),
        "envelope": check_envelope(trials, rng, n=n),
    }
    results["ok"] = all(r["ok"] for r in results.values())
    return results
