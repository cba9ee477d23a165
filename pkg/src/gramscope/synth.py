"""Synthetic experiments: random ensembles and Born-rule data tables.

States are drawn uniformly (Haar) from the pure states; measurements are
obtained by Haar-rotating a computational-basis projective measurement.
Data tables hold outcome probabilities (asymptotic) or multinomial
frequencies (finite shot count).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .hermitian import hermiticity_residual


@dataclass(frozen=True)
class Ensemble:
    """Ground truth of a synthetic experiment: W states and V POVMs of K outcomes.

    ``projective_nondegenerate`` marks ensembles whose measurements are
    rank-1 orthogonal projector POVMs (then K = dim).
    """

    dim: int
    states: list = field(default_factory=list)
    povms: list = field(default_factory=list)
    projective_nondegenerate: bool = False

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_measurements(self) -> int:
        return len(self.povms)

    @property
    def n_outcomes(self) -> int:
        return len(self.povms[0]) if self.povms else 0


@dataclass(frozen=True)
class DataTable:
    """W x (V*K) table of outcome probabilities or frequencies.

    ``shots`` is None for asymptotic (Born-rule) tables. Column (v, k) sits
    at index v*K + k.
    """

    values: np.ndarray
    n_states: int
    n_measurements: int
    n_outcomes: int
    shots: int | None = None


def validate_ensemble(ens: Ensemble, tol: float = 1e-10) -> None:
    """Check state/POVM invariants; raise ValueError on the first violation."""
    d = ens.dim
    for w, rho in enumerate(ens.states):
        if rho.shape != (d, d):
            raise ValueError(f"state {w} has shape {rho.shape}, expected ({d}, {d})")
        if hermiticity_residual(rho) > tol:
            raise ValueError(f"state {w} is not Hermitian")
        lam = np.linalg.eigvalsh(rho)
        if lam.min() < -tol:
            raise ValueError(f"state {w} is not PSD (lambda_min={lam.min():.3e})")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise ValueError(f"state {w} has trace {np.trace(rho).real}")
    for v, povm in enumerate(ens.povms):
        total = np.zeros((d, d), dtype=complex)
        for k, eff in enumerate(povm):
            if hermiticity_residual(eff) > tol:
                raise ValueError(f"effect ({v},{k}) is not Hermitian")
            if np.linalg.eigvalsh(eff).min() < -tol:
                raise ValueError(f"effect ({v},{k}) is not PSD")
            total += eff
        if np.max(np.abs(total - np.eye(d))) > tol:
            raise ValueError(f"POVM {v} does not sum to the identity")
    if ens.projective_nondegenerate:
        for v, povm in enumerate(ens.povms):
            if len(povm) != d:
                raise ValueError(f"projective non-degenerate POVM {v} must have {d} outcomes")
            for k, ek in enumerate(povm):
                for q, eq in enumerate(povm):
                    overlap = np.trace(ek @ eq).real
                    if abs(overlap - (1.0 if k == q else 0.0)) > 1e-9:
                        raise ValueError(f"POVM {v} effects ({k},{q}) are not orthogonal projectors")


def validate_table(table: DataTable, tol: float = 1e-9) -> None:
    """Check range and per-measurement row-sum invariants of a data table."""
    vals = table.values
    if vals.shape != (table.n_states, table.n_measurements * table.n_outcomes):
        raise ValueError(f"table shape {vals.shape} inconsistent with metadata")
    if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
        raise ValueError("table entries outside [0, 1]")
    blocks = vals.reshape(table.n_states, table.n_measurements, table.n_outcomes)
    sums = blocks.sum(axis=2)
    if np.max(np.abs(sums - 1.0)) > tol:
        raise ValueError("per-measurement outcome frequencies do not sum to 1")


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary via QR of a complex Ginibre matrix.

    The R diagonal is phase-fixed so the distribution is exactly Haar.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


def sample_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state |psi><psi| from a normalized complex Gaussian."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def sample_mixed_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full- or fixed-rank density matrix rho = A A^dag / tr(A A^dag)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    r = d if rank is None else rank
    if not 1 <= r <= d:
        raise ValueError(f"rank must be in [1, {d}], got {r}")
    a = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def sample_projective_measurement(
    d: int,
    rng: np.random.Generator,
    degeneracies: list[int] | None = None,
) -> list[np.ndarray]:
    """Haar-rotated projective measurement.

    With no ``degeneracies`` the effects are the d rank-1 projectors
    U |k><k| U^dag. A degeneracy pattern (multiplicities summing to d)
    groups consecutive basis vectors into higher-rank projectors.
    """
    if degeneracies is not None:
        if any(m < 1 for m in degeneracies) or sum(degeneracies) != d:
            raise ValueError(f"degeneracies {degeneracies} must be positive and sum to {d}")
    else:
        degeneracies = [1] * d
    u = haar_unitary(d, rng)
    effects = []
    start = 0
    for mult in degeneracies:
        block = u[:, start : start + mult]
        effects.append(block @ block.conj().T)
        start += mult
    return effects


def sample_ensemble(
    d: int,
    n_states: int,
    n_measurements: int,
    rng: np.random.Generator,
    mixed: bool = False,
    degeneracies: list[int] | None = None,
) -> Ensemble:
    """Sample a full ensemble of Haar states and Haar-rotated projective POVMs."""
    states = [
        sample_mixed_state(d, rng) if mixed else sample_pure_state(d, rng)
        for _ in range(n_states)
    ]
    povms = [sample_projective_measurement(d, rng, degeneracies) for _ in range(n_measurements)]
    return Ensemble(
        dim=d,
        states=states,
        povms=povms,
        projective_nondegenerate=degeneracies is None,
    )


def born_probabilities(rho: np.ndarray, povm: list[np.ndarray]) -> np.ndarray:
    """Outcome probabilities tr(rho E_k) for one state and one measurement."""
    return np.array([np.trace(rho @ e).real for e in povm])


def born_table(ens: Ensemble) -> DataTable:
    """Asymptotic data table: entry (w, (v,k)) = tr(rho_w E_vk)."""
    w_, v_, k_ = ens.n_states, ens.n_measurements, ens.n_outcomes
    vals = np.empty((w_, v_ * k_))
    for w, rho in enumerate(ens.states):
        if rho.shape[0] != ens.dim:
            raise ValueError("state dimension does not match ensemble")
        for v, povm in enumerate(ens.povms):
            vals[w, v * k_ : (v + 1) * k_] = born_probabilities(rho, povm)
    vals = np.clip(vals, 0.0, 1.0)
    return DataTable(values=vals, n_states=w_, n_measurements=v_, n_outcomes=k_, shots=None)


def finite_shot_table(ens: Ensemble, shots: int, rng: np.random.Generator) -> DataTable:
    """Finite-repetition table: each (state, measurement) block is an
    independent multinomial(shots, Born probabilities) / shots draw."""
    if shots < 1:
        raise ValueError(f"shot count must be >= 1, got {shots}")
    asym = born_table(ens)
    w_, v_, k_ = asym.n_states, asym.n_measurements, asym.n_outcomes
    vals = np.empty_like(asym.values)
    for w in range(w_):
        for v in range(v_):
            p = asym.values[w, v * k_ : (v + 1) * k_].copy()
            p /= p.sum()
            vals[w, v * k_ : (v + 1) * k_] = rng.multinomial(shots, p) / shots
    return DataTable(values=vals, n_states=w_, n_measurements=v_, n_outcomes=k_, shots=shots)


# ---------------------------------------------------------------------------
# Serialization: complex scalars as [re, im] pairs, matrices row-major.

def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "dim": ens.dim,
        "projective_nondegenerate": ens.projective_nondegenerate,
        "states": [_matrix_to_json(rho) for rho in ens.states],
        "povms": [[_matrix_to_json(e) for e in povm] for povm in ens.povms],
    }


def ensemble_from_json(obj: dict) -> Ensemble:
    return Ensemble(
        dim=int(obj["dim"]),
        states=[_matrix_from_json(s) for s in obj["states"]],
        povms=[[_matrix_from_json(e) for e in povm] for povm in obj["povms"]],
        projective_nondegenerate=bool(obj["projective_nondegenerate"]),
    )


def table_to_json(table: DataTable) -> dict:
    return {
        "n_states": table.n_states,
        "n_measurements": table.n_measurements,
        "n_outcomes": table.n_outcomes,
        "shots": table.shots,
        "values": [[float(x) for x in row] for row in table.values],
    }


def table_from_json(obj: dict) -> DataTable:
    return DataTable(
        values=np.array(obj["values"], dtype=float),
        n_states=int(obj["n_states"]),
        n_measurements=int(obj["n_measurements"]),
        n_outcomes=int(obj["n_outcomes"]),
        shots=None if obj["shots"] is None else int(obj["shots"]),
    )


def table_to_csv(table: DataTable) -> str:
    """Long-format CSV with header row "w, v, k, f"."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["w", "v", "k", "f"])
    k_ = table.n_outcomes
    for w in range(table.n_states):
        for v in range(table.n_measurements):
            for k in range(k_):
                writer.writerow([w, v, k, repr(float(table.values[w, v * k_ + k]))])
    return buf.getvalue()


def table_from_csv(text: str) -> tuple[np.ndarray, int, int, int]:
    """Parse the long-format CSV back into (values, W, V, K)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["w", "v", "k", "f"]:
        raise ValueError("missing 'w, v, k, f' header row")
    entries = [(int(w), int(v), int(k), float(f)) for w, v, k, f in rows[1:]]
    w_ = max(e[0] for e in entries) + 1
    v_ = max(e[1] for e in entries) + 1
    k_ = max(e[2] for e in entries) + 1
    vals = np.zeros((w_, v_ * k_))
    for w, v, k, f in entries:
        vals[w, v * k_ + k] = f
    return vals, w_, v_, k_


def dump_json(obj: dict, path) -> None:
    """Write JSON with a stable layout so identical content is byte-identical."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
