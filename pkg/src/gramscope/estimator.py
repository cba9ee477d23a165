"""End-to-end Gram estimation: solve, certify rank, augment until certified.

A trial samples a hidden ensemble, pins the projective knowledge on the
observed table, runs the trace-minimization completion, and checks the
singular-value tail of the estimate against the rank of the data table.
While the certificate fails and budget remains, one state or one
measurement is added (state first, alternating) and the enlarged problem
is re-solved from a padded warm start.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gram import (
    GramMatrix,
    gram,
    knowledge_projective,
    knowledge_relax,
    numerical_rank,
    r_qm,
    rank_certificate,
    rank_tail,
    realize,
)
from .hermitian import HermBasis, herm_basis, sym_eig
from .solver import SdpProblem, SolverOptions, SolverReport, solve_trace_min
from .synth import (
    DataTable,
    Ensemble,
    born_probabilities,
    sample_ensemble,
    sample_projective_measurement,
    sample_pure_state,
)


@dataclass(frozen=True)
class TrialConfig:
    """One synthetic estimation trial.

    ``shots`` None means asymptotic (exact Born probabilities); a finite
    value draws multinomial frequencies and ``epsilon`` widens the
    data-block constraints into intervals.
    """

    d: int
    n_states: int
    n_measurements: int
    n_outcomes: int | None = None  # defaults to d
    max_augmentations: int = 20
    tau: float = 1e-4
    failure_threshold: float = 1e-3
    epsilon: float = 0.0
    shots: int | None = None
    seed: int = 0
    state_first: bool = True
    mixed_states: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.d < 1 or self.n_states < 1 or self.n_measurements < 1:
            raise ValueError("d, n_states, n_measurements must be >= 1")
        if self.tau <= 0 or self.failure_threshold <= 0:
            raise ValueError("tau and failure_threshold must be > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1 when finite")

    @property
    def k(self) -> int:
        return self.d if self.n_outcomes is None else self.n_outcomes


@dataclass
class GramEstimate:
    """Solver output with rank certificate and optional gauge-fixed factor."""

    g_hat: GramMatrix
    certified: bool
    target_rank: int
    augmentations: int
    report: SolverReport
    factor_matrix: np.ndarray | None = None


def trial_config_from_json(obj: dict) -> TrialConfig:
    """Build a TrialConfig from a JSON dict; nested "solver" options allowed."""
    from .solver import solver_options_from_json

    obj = dict(obj)
    solver = obj.pop("solver", None)
    kwargs = {}
    for key in (
        "d",
        "n_states",
        "n_measurements",
        "n_outcomes",
        "max_augmentations",
        "tau",
        "failure_threshold",
        "epsilon",
        "shots",
        "seed",
        "state_first",
        "mixed_states",
    ):
        if key in obj:
            kwargs[key] = obj.pop(key)
    if obj:
        raise ValueError(f"unknown trial config key(s): {sorted(obj)}")
    if solver is not None:
        kwargs["solver"] = solver_options_from_json(solver)
    return TrialConfig(**kwargs)


def _table_values(ens: Ensemble, shots: int | None, rng: np.random.Generator) -> np.ndarray:
    k = ens.n_outcomes
    vals = np.empty((ens.n_states, ens.n_measurements * k))
    for w, rho in enumerate(ens.states):
        for v, povm in enumerate(ens.povms):
            vals[w, v * k : (v + 1) * k] = _block(rho, povm, shots, rng)
    return vals


def _block(rho, povm, shots: int | None, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(born_probabilities(rho, povm), 0.0, 1.0)
    if shots is None:
        return p
    return rng.multinomial(shots, p / p.sum()) / shots


def _add_state(
    ens: Ensemble, vals: np.ndarray, shots: int | None, rng: np.random.Generator
) -> tuple[Ensemble, np.ndarray]:
    rho = sample_pure_state(ens.dim, rng)
    row = np.concatenate([_block(rho, povm, shots, rng) for povm in ens.povms])
    ens = Ensemble(
        dim=ens.dim,
        states=list(ens.states) + [rho],
        povms=ens.povms,
        projective_nondegenerate=ens.projective_nondegenerate,
    )
    return ens, np.vstack([vals, row])


def _add_measurement(
    ens: Ensemble, vals: np.ndarray, shots: int | None, rng: np.random.Generator
) -> tuple[Ensemble, np.ndarray]:
    povm = sample_projective_measurement(ens.dim, rng)
    cols = np.vstack([_block(rho, povm, shots, rng) for rho in ens.states])
    ens = Ensemble(
        dim=ens.dim,
        states=ens.states,
        povms=list(ens.povms) + [povm],
        projective_nondegenerate=ens.projective_nondegenerate,
    )
    return ens, np.hstack([vals, cols])


def _pad_for_state(m: np.ndarray, w_old: int) -> np.ndarray:
    # New state column enters the Gram matrix at index w_old.
    m = np.insert(m, w_old, 0.0, axis=0)
    return np.insert(m, w_old, 0.0, axis=1)


def _pad_for_measurement(m: np.ndarray, k: int) -> np.ndarray:
    n = m.shape[0]
    out = np.zeros((n + k, n + k))
    out[:n, :n] = m
    return out


def estimate(
    cfg: TrialConfig, rng: np.random.Generator | None = None
) -> tuple[GramEstimate, Ensemble]:
    """Run one full estimation trial; returns the estimate and the hidden
    ground-truth ensemble for evaluation.

    An exhausted augmentation budget yields ``certified=False`` rather than
    an exception; solver non-convergence is visible in the report.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    if cfg.k != cfg.d:
        raise ValueError(
            f"projective non-degenerate trials need K = d, got K={cfg.k}, d={cfg.d}"
        )
    ens = sample_ensemble(
        cfg.d, cfg.n_states, cfg.n_measurements, rng, mixed=cfg.mixed_states
    )
    vals = _table_values(ens, cfg.shots, rng)

    warm_primal = warm_dual = None
    augmentations = 0
    add_state_next = cfg.state_first
    while True:
        table = DataTable(
            values=vals,
            n_states=ens.n_states,
            n_measurements=ens.n_measurements,
            n_outcomes=ens.n_outcomes,
            shots=cfg.shots,
        )
        kn = knowledge_projective(table, cfg.d)
        if cfg.shots is not None and cfg.epsilon > 0:
            kn = knowledge_relax(kn, cfg.epsilon, scope="data")
        target_rank = numerical_rank(vals)
        prob = SdpProblem(
            n=kn.n,
            knowledge=kn,
            radius=r_qm(ens.n_states, ens.n_measurements, cfg.d),
        )
        g_hat, report = solve_trace_min(prob, cfg.solver, warm_primal, warm_dual)
        certified = rank_certificate(g_hat, target_rank, cfg.tau)
        if certified or augmentations >= cfg.max_augmentations:
            break
        if add_state_next:
            w_old = ens.n_states
            ens, vals = _add_state(ens, vals, cfg.shots, rng)
            warm_primal = _pad_for_state(g_hat.values, w_old)
            warm_dual = np.zeros_like(warm_primal)
        else:
            ens, vals = _add_measurement(ens, vals, cfg.shots, rng)
            warm_primal = _pad_for_measurement(g_hat.values, ens.n_outcomes)
            warm_dual = np.zeros_like(warm_primal)
        add_state_next = not add_state_next
        augmentations += 1

    factor_matrix = factor(g_hat, target_rank) if certified else None
    est = GramEstimate(
        g_hat=g_hat,
        certified=certified,
        target_rank=target_rank,
        augmentations=augmentations,
        report=report,
        factor_matrix=factor_matrix,
    )
    return est, ens


@dataclass
class Metrics:
    """Comparison of an estimate against the hidden ground truth."""

    max_entry_error: float
    frobenius_error: float
    success: bool
    rank_tail: float
    data_block_error: float

    def to_json(self) -> dict:
        return {
            "max_entry_error": self.max_entry_error,
            "frobenius_error": self.frobenius_error,
            "success": self.success,
            "rank_tail": self.rank_tail,
            "data_block_error": self.data_block_error,
        }


def evaluate(
    est: GramEstimate,
    truth: Ensemble,
    basis: HermBasis | None = None,
    threshold: float = 1e-3,
) -> Metrics:
    """Entrywise and Frobenius error of the estimate against the true Gram
    matrix, plus rank tail and data-block reproduction error. ``success``
    is max-entry error below ``threshold``."""
    basis = herm_basis(truth.dim) if basis is None else basis
    g_true = gram(realize(truth, basis))
    if g_true.n != est.g_hat.n:
        raise ValueError(
            f"estimate is {est.g_hat.n} x {est.g_hat.n}, ground truth is {g_true.n} x {g_true.n}"
        )
    diff = est.g_hat.values - g_true.values
    max_err = float(np.max(np.abs(diff)))
    return Metrics(
        max_entry_error=max_err,
        frobenius_error=float(np.linalg.norm(diff)),
        success=max_err < threshold,
        rank_tail=rank_tail(est.g_hat.values, est.target_rank),
        data_block_error=float(np.max(np.abs(est.g_hat.data_block - g_true.data_block))),
    )


def factor(g_hat: GramMatrix, rank: int) -> np.ndarray:
    """Rank-r factor P with P^T P the best rank-r PSD approximation of the
    estimate, from its top-r eigenpairs. Any two valid factors differ by a
    left orthogonal transformation."""
    if not 1 <= rank <= g_hat.n:
        raise ValueError(f"rank must be in [1, {g_hat.n}], got {rank}")
    lam, u = sym_eig(g_hat.values)
    top = lam[:rank]
    if top.min() < -1e-8:
        raise ValueError(f"estimate is not PSD enough to factor (lambda={top.min():.3e})")
    return np.sqrt(np.clip(top, 0.0, None))[:, None] * u[:, :rank].T


def gauge_distance(p_a: np.ndarray, p_b: np.ndarray) -> float:
    """min over orthogonal O of ||O P_a - P_b||_F, via the orthogonal
    Procrustes solution. Zero iff the two factors share a Gram matrix."""
    if p_a.shape != p_b.shape:
        raise ValueError(f"shape mismatch: {p_a.shape} vs {p_b.shape}")
    u, _, vt = np.linalg.svd(p_b @ p_a.T)
    o = u @ vt
    return float(np.linalg.norm(o @ p_a - p_b))
