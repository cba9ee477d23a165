"""Gram-matrix model: realizations, a-priori knowledge, spectral bound, rank tools.

A realization stacks the vectorized states and effects as columns of
P = (P_st | P_m); the Gram matrix is G = P^T P and carries the data table
as its upper-right W x (V*K) block. Knowledge objects record which Gram
entries are pinned (exactly or to an interval) before completion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .hermitian import HermBasis, vectorize
from .synth import DataTable, Ensemble


@dataclass(frozen=True)
class Realization:
    """Vectorized ensemble: P_st is d^2 x W, P_m is d^2 x (V*K)."""

    p_states: np.ndarray
    p_effects: np.ndarray
    n_measurements: int
    n_outcomes: int

    @property
    def p(self) -> np.ndarray:
        return np.hstack([self.p_states, self.p_effects])

    @property
    def n_states(self) -> int:
        return self.p_states.shape[1]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric N x N Gram matrix with block sizes (W, V*K)."""

    values: np.ndarray
    n_states: int
    n_effects: int

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def data_block(self) -> np.ndarray:
        return self.values[: self.n_states, self.n_states :]


@dataclass(frozen=True)
class Constraint:
    """One pinned Gram entry at (i, j), i <= j; symmetric counterpart implied."""

    i: int
    j: int
    kind: str  # "exact" | "interval"
    value: float | None = None
    lo: float | None = None
    hi: float | None = None


@dataclass(frozen=True)
class Knowledge:
    """A-priori constraints on Gram entries, upper-triangle indices only.

    ``split`` records the state/effect block boundary W when known, which
    lets interval relaxation target the data block.
    """

    n: int
    constraints: list = field(default_factory=list)
    split: int | None = None

    def __post_init__(self):
        seen = set()
        for c in self.constraints:
            if not (0 <= c.i <= c.j < self.n):
                raise ValueError(f"constraint index ({c.i},{c.j}) out of range for n={self.n}")
            if (c.i, c.j) in seen:
                raise ValueError(f"duplicate constraint at ({c.i},{c.j})")
            seen.add((c.i, c.j))
            if c.kind == "exact":
                if c.value is None or not np.isfinite(c.value):
                    raise ValueError(f"exact constraint at ({c.i},{c.j}) needs a finite value")
            elif c.kind == "interval":
                if c.lo is None or c.hi is None or c.lo > c.hi:
                    raise ValueError(f"interval constraint at ({c.i},{c.j}) needs lo <= hi")
            else:
                raise ValueError(f"unknown constraint kind {c.kind!r}")

    def arrays(self) -> tuple[np.ndarray, ...]:
        """Index/value arrays (ei, ej, ev, ii, ij, ilo, ihi) for vectorized use."""
        ex = [(c.i, c.j, c.value) for c in self.constraints if c.kind == "exact"]
        iv = [(c.i, c.j, c.lo, c.hi) for c in self.constraints if c.kind == "interval"]
        ei, ej, ev = (np.array(x) for x in zip(*ex)) if ex else (np.array([], dtype=int),) * 3
        ii, ij, ilo, ihi = (
            (np.array(x) for x in zip(*iv)) if iv else (np.array([], dtype=int),) * 4
        )
        return (
            np.asarray(ei, dtype=int),
            np.asarray(ej, dtype=int),
            np.asarray(ev, dtype=float),
            np.asarray(ii, dtype=int),
            np.asarray(ij, dtype=int),
            np.asarray(ilo, dtype=float),
            np.asarray(ihi, dtype=float),
        )


def realize(ens: Ensemble, basis: HermBasis) -> Realization:
    """Vectorize an ensemble: column w of P_st is vec(rho_w), column v*K+k of
    P_m is vec(E_vk)."""
    if basis.dim != ens.dim:
        raise ValueError(f"basis dim {basis.dim} does not match ensemble dim {ens.dim}")
    p_states = np.column_stack([vectorize(rho, basis) for rho in ens.states])
    cols = [vectorize(e, basis) for povm in ens.povms for e in povm]
    p_effects = np.column_stack(cols)
    return Realization(
        p_states=p_states,
        p_effects=p_effects,
        n_measurements=ens.n_measurements,
        n_outcomes=ens.n_outcomes,
    )


def gram(real: Realization) -> GramMatrix:
    """Gram matrix G = P^T P of a realization."""
    p = real.p
    g = p.T @ p
    return GramMatrix(
        values=0.5 * (g + g.T),
        n_states=real.n_states,
        n_effects=real.p_effects.shape[1],
    )


def r_qm(n_states: int, n_measurements: int, d: int) -> float:
    """Operator-norm radius W + V*d of the ball containing all quantum Gram
    matrices with W states and V d-outcome POVMs."""
    if min(n_states, n_measurements, d) < 1:
        raise ValueError("W, V, d must all be >= 1")
    return float(n_states + n_measurements * d)


def knowledge_projective(
    table: DataTable,
    d: int,
    degeneracies: list[list[int]] | list[int] | None = None,
) -> Knowledge:
    """Knowledge for projective measurements with known degeneracy.

    Pins (a) every data-block entry G[w, W + v*K + k] to the observed
    frequency and (b) each within-measurement block of G_m to
    diag(multiplicities) (identity for non-degenerate). Cross-measurement
    blocks and G_st stay free.

    ``degeneracies`` may be one multiplicity list applied to every
    measurement or one list per measurement; default is non-degenerate,
    which requires K = d.
    """
    w_, v_, k_ = table.n_states, table.n_measurements, table.n_outcomes
    if degeneracies is None:
        if k_ != d:
            raise ValueError(
                f"non-degenerate projective knowledge needs K = d, got K={k_}, d={d}"
            )
        per_v = [[1] * d] * v_
    else:
        if degeneracies and isinstance(degeneracies[0], int):
            per_v = [list(degeneracies)] * v_
        else:
            per_v = [list(m) for m in degeneracies]
        if len(per_v) != v_:
            raise ValueError(f"expected {v_} degeneracy lists, got {len(per_v)}")
        for mults in per_v:
            if len(mults) != k_ or sum(mults) != d or any(m < 1 for m in mults):
                raise ValueError(f"degeneracy pattern {mults} inconsistent with K={k_}, d={d}")
    n = w_ + v_ * k_
    constraints = []
    for w in range(w_):
        for col in range(v_ * k_):
            constraints.append(
                Constraint(i=w, j=w_ + col, kind="exact", value=float(table.values[w, col]))
            )
    for v in range(v_):
        base = w_ + v * k_
        for k in range(k_):
            for q in range(k, k_):
                val = float(per_v[v][k]) if k == q else 0.0
                constraints.append(Constraint(i=base + k, j=base + q, kind="exact", value=val))
    return Knowledge(n=n, constraints=constraints, split=w_)


def knowledge_relax(kn: Knowledge, eps: float, scope: str = "data") -> Knowledge:
    """Widen exact constraints into intervals [value - eps, value + eps].

    ``scope`` is "data" (data-block entries only; needs ``kn.split``) or
    "all". eps = 0 returns the knowledge unchanged.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if scope not in ("data", "all"):
        raise ValueError(f"scope must be 'data' or 'all', got {scope!r}")
    if eps == 0:
        return kn
    if scope == "data" and kn.split is None:
        raise ValueError("data-block relaxation needs a knowledge object with a block split")
    out = []
    for c in kn.constraints:
        in_scope = scope == "all" or (c.i < kn.split <= c.j)
        if c.kind == "exact" and in_scope:
            out.append(
                Constraint(i=c.i, j=c.j, kind="interval", lo=c.value - eps, hi=c.value + eps)
            )
        else:
            out.append(c)
    return replace(kn, constraints=out)


def numerical_rank(m: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Number of singular values above rel_tol times the largest (0 for the
    zero matrix)."""
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be > 0, got {rel_tol}")
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def rank_tail(m: np.ndarray, rank: int) -> float:
    """l2 norm of the singular values beyond index ``rank``."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    return float(np.linalg.norm(s[rank:]))


def rank_certificate(g_hat: GramMatrix, target_rank: int, tau: float = 1e-4) -> bool:
    """True iff the singular-value tail of the estimate beyond ``target_rank``
    has l2 norm at most ``tau``."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if not 0 <= target_rank <= g_hat.n:
        raise ValueError(f"target rank {target_rank} out of range for n={g_hat.n}")
    return rank_tail(g_hat.values, target_rank) <= tau


# ---------------------------------------------------------------------------
# Serialization

def knowledge_to_json(kn: Knowledge) -> dict:
    constraints = []
    for c in kn.constraints:
        if c.kind == "exact":
            constraints.append({"i": c.i, "j": c.j, "kind": "exact", "value": c.value})
        else:
            constraints.append({"i": c.i, "j": c.j, "kind": "interval", "lo": c.lo, "hi": c.hi})
    obj = {"n": kn.n, "constraints": constraints}
    if kn.split is not None:
        obj["split"] = kn.split
    return obj


def knowledge_from_json(obj: dict) -> Knowledge:
    constraints = []
    for c in obj["constraints"]:
        if c["kind"] == "exact":
            constraints.append(Constraint(i=c["i"], j=c["j"], kind="exact", value=c["value"]))
        else:
            constraints.append(
                Constraint(i=c["i"], j=c["j"], kind="interval", lo=c["lo"], hi=c["hi"])
            )
    return Knowledge(n=int(obj["n"]), constraints=constraints, split=obj.get("split"))


def gram_to_json(g: GramMatrix) -> dict:
    return {
        "n_states": g.n_states,
        "n_effects": g.n_effects,
        "values": [[float(x) for x in row] for row in g.values],
    }


def gram_from_json(obj: dict) -> GramMatrix:
    return GramMatrix(
        values=np.array(obj["values"], dtype=float),
        n_states=int(obj["n_states"]),
        n_effects=int(obj["n_effects"]),
    )
