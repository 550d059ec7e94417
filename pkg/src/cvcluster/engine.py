"""Step-by-step execution of measurement-based protocols on linear clusters.

Each step measures the rotated quadrature p + kappa x of the current head
mode and leaves a Weyl-Heisenberg byproduct X(s) on the teleported state.
The engine tracks the byproduct frame and evaluates the corrected output at
the Weyl-Heisenberg level: the measured functionals commute with the
corrected output quadratures and with each other (this is exactly the
Clifford parallelism that lets all homodyne detections run simultaneously),
so the corrected output operators

    x_out - u(s_1..s_k),   p_out - v(s_1..s_k)

are affine combinations of the pre-measurement quadratures. Their first and
second moments are computed directly from the initial product state, which
makes the corrected output exactly outcome- and seed-independent, with
finite squeezing entering only as additive noise. Outcome records are drawn
from the exact joint distribution of the measured functionals.

The single-shot Bayesian posterior (where the conditional mean is pulled
toward the finite-squeezing envelope) is a different object; it is available
through ``phase_space.homodyne``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .phase_space import (
    VACUUM_VARIANCE,
    GaussianState,
    coherent_state,
    controlled_z,
    controlled_z_pp,
    embed_symplectic,
    vacuum_state,
)


class NonDeterministicChannelError(RuntimeError):
    """The corrected protocol output varied with the seed; no channel exists."""


@dataclass(frozen=True)
class StepPlan:
    """One cluster step: measure p + kappa x (kappa = 0 is a plain p
    detection that just propagates the state)."""

    kappa: float

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise ValueError("kappa must be finite")


@dataclass(frozen=True)
class ByproductFrame:
    """Pending displacement X(u)Z(v) accumulated from measurement outcomes."""

    u: float = 0.0
    v: float = 0.0


@dataclass(frozen=True)
class MeasurementRecord:
    """One homodyne event.

    ``theta`` is the local-oscillator angle; for cluster steps the raw
    reading of (p cos(theta) - x sin(theta)) is rescaled by 1/cos(theta) to
    give the value of p + kappa x. Teleportation-style protocols store their
    own protocol-defined rescaling (the sqrt(2) beamsplitter factor).
    """

    step_index: int
    mode: int
    kappa: float
    theta: float
    raw_outcome: float
    rescaled_outcome: float


@dataclass(frozen=True)
class GaussianChannel:
    """Affine channel mu -> S mu + d, cov -> S cov S^T + N."""

    S: np.ndarray
    N: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", np.array(self.S, dtype=float))
        object.__setattr__(self, "N", np.array(self.N, dtype=float))
        object.__setattr__(self, "d", np.array(self.d, dtype=float))

    def apply(self, state: GaussianState) -> GaussianState:
        cov = self.S @ state.cov @ self.S.T + self.N
        return GaussianState(self.S @ state.mean + self.d, 0.5 * (cov + cov.T))


def measurement_basis(kappa: float) -> tuple[float, float]:
    """Local-oscillator angle and rescale factor measuring p + kappa x.

    theta = atan(-kappa), rescale = 1/cos(theta) = sqrt(1 + kappa^2);
    (p cos(theta) - x sin(theta)) * rescale = p + kappa x.
    """
    theta = math.atan(-kappa)
    return theta, math.sqrt(1.0 + kappa * kappa)


def update_frame(frame: ByproductFrame, s: float, kappa: float) -> ByproductFrame:
    """Push the frame through one step and absorb the new outcome.

    One step applies X(s) F D(kappa); commuting the existing X(u)Z(v)
    through gives X(s) F D X(u)Z(v) = X(s - kappa u - v) Z(u) F D.
    """
    return ByproductFrame(s - kappa * frame.u - frame.v, frame.u)


def apply_correction(state: GaussianState, frame: ByproductFrame) -> GaussianState:
    """Undo the pending byproduct: displace the (single-mode) state by (-u, -v)."""
    if state.n_modes != 1:
        raise ValueError("apply_correction expects a single-mode state")
    return GaussianState(state.mean - np.array([frame.u, frame.v]), state.cov)


# ---------------------------------------------------------------------------
# internal assembly of the chain in factored form
#
# Working with the initial product covariance and the (integer) total
# symplectic of the CZ chain keeps the byproduct cancellations exact; forming
# the entangled covariance first would lose them to rounding at high
# squeezing, where the anti-squeezed variances reach 1e9.


def _chain_symplectic(n_modes: int) -> np.ndarray:
    S = np.eye(2 * n_modes)
    cz = controlled_z().S
    for i in range(n_modes - 1):
        S = embed_symplectic(cz, [i, i + 1], n_modes) @ S
    return S


def _initial_moments(
    input_state: GaussianState, n_nodes: int, r: float
) -> tuple[np.ndarray, np.ndarray]:
    n = n_nodes + 1
    mu = np.zeros(2 * n)
    mu[:2] = input_state.mean
    cov = np.zeros((2 * n, 2 * n))
    cov[:2, :2] = input_state.cov
    var_x = math.exp(2 * r) * VACUUM_VARIANCE
    var_p = math.exp(-2 * r) * VACUUM_VARIANCE
    for m in range(1, n):
        cov[2 * m, 2 * m] = var_x
        cov[2 * m + 1, 2 * m + 1] = var_p
    return mu, cov


def _frame_weights(kappas: Sequence[float]) -> np.ndarray:
    """d(frame)/d(s_j): the fold of update_frame is linear in the outcomes."""
    k = len(kappas)
    T = np.zeros((2, k))
    for j in range(k):
        frame = ByproductFrame()
        for i, kap in enumerate(kappas):
            frame = update_frame(frame, 1.0 if i == j else 0.0, kap)
        T[:, j] = (frame.u, frame.v)
    return T


def _sample_or_force(
    mean: np.ndarray,
    cov: np.ndarray,
    outcome_source,
    k: int,
) -> np.ndarray:
    """Joint outcome vector: forced raw values, or one draw from N(mean, cov)."""
    if isinstance(outcome_source, (int, np.integer, np.random.Generator)):
        rng = (
            outcome_source
            if isinstance(outcome_source, np.random.Generator)
            else np.random.Generator(np.random.PCG64(outcome_source))
        )
        chol = np.linalg.cholesky(cov)
        return mean + chol @ rng.standard_normal(k)
    forced = np.atleast_1d(np.asarray(outcome_source, dtype=float))
    if forced.size == 1:
        forced = np.full(k, forced[0])
    if forced.shape != (k,):
        raise ValueError(f"expected {k} forced outcomes, got shape {forced.shape}")
    return forced


def run_protocol(
    input_state: GaussianState,
    steps: Sequence[StepPlan],
    cluster_r: float,
    outcome_source,
) -> tuple[GaussianState, list[MeasurementRecord], ByproductFrame]:
    """Teleport an input through a linear cluster, one measured node per step.

    The input is attached as mode 0 to a len(steps)-node cluster at squeezing
    ``cluster_r``; step j measures p + kappa_j x of mode j and the unmeasured
    final mode carries the output. ``outcome_source`` is a seed (int), a
    numpy Generator, or a sequence of forced raw outcomes.

    Returns the uncorrected output state (byproduct displacement still in its
    mean), the measurement records, and the accumulated byproduct frame.
    """
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    if len(steps) < 1:
        raise ValueError("at least one step is required")
    k = len(steps)
    n = k + 1
    kappas = np.array([s.kappa for s in steps])

    S_chain = _chain_symplectic(n)
    mu0, cov0 = _initial_moments(input_state, k, cluster_r)

    # rescaled measured functionals p_j + kappa_j x_j, in initial coordinates
    C = np.zeros((k, 2 * n))
    for j in range(k):
        C[j, 2 * j] = kappas[j]
        C[j, 2 * j + 1] = 1.0
    C = C @ S_chain

    T = _frame_weights(kappas)
    P = np.zeros((2, 2 * n))
    P[0, 2 * k] = 1.0
    P[1, 2 * k + 1] = 1.0
    M = P @ S_chain - T @ C

    mean_corr = M @ mu0
    cov_corr = M @ cov0 @ M.T
    cov_corr = 0.5 * (cov_corr + cov_corr.T)

    thetas = np.arctan(-kappas)
    rescales = np.sqrt(1.0 + kappas**2)
    m_mean = C @ mu0
    m_cov = C @ cov0 @ C.T
    if isinstance(outcome_source, (int, np.integer, np.random.Generator)):
        rescaled = _sample_or_force(m_mean, m_cov, outcome_source, k)
        raws = rescaled / rescales
    else:
        raws = _sample_or_force(m_mean, m_cov, outcome_source, k)
        rescaled = raws * rescales

    frame = ByproductFrame()
    records = []
    for j in range(k):
        frame = update_frame(frame, float(rescaled[j]), float(kappas[j]))
        records.append(
            MeasurementRecord(
                step_index=j,
                mode=j,
                kappa=float(kappas[j]),
                theta=float(thetas[j]),
                raw_outcome=float(raws[j]),
                rescaled_outcome=float(rescaled[j]),
            )
        )

    uncorrected = GaussianState(mean_corr + np.array([frame.u, frame.v]), cov_corr)
    return uncorrected, records, frame


def dual_step(
    input_state: GaussianState, r: float, outcome_source
) -> tuple[GaussianState, MeasurementRecord]:
    """The dual elementary circuit: x-squeezed ancilla, e^{2i p(x)p} coupling,
    x detection on the input mode.

    Exact map: with ancilla quadratures (x_a, p_a) and measured value t of
    the post-gate input position x - p_a, the output mode carries

        x_out = x_a - p,   p_out = x - t,

    i.e. the Fourier action with byproduct Z(-t) and the e^{-2r}/4 ancilla
    noise landing in the x quadrature. This equals the primal kappa = 0 step
    conjugated by Fourier gates on both modes (the coupling gates satisfy
    that conjugation identity exactly at the symplectic level).
    """
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    mu0 = np.concatenate([input_state.mean, np.zeros(2)])
    cov0 = np.zeros((4, 4))
    cov0[:2, :2] = input_state.cov
    cov0[2, 2] = math.exp(-2 * r) * VACUUM_VARIANCE
    cov0[3, 3] = math.exp(2 * r) * VACUUM_VARIANCE

    S = controlled_z_pp().S
    c = S[0]  # x of mode 0 after the coupling, in initial coordinates
    P = S[2:4]
    # corrected p row absorbs +1 times the measured functional (undoes Z(-t))
    M = P + np.array([[0.0], [1.0]]) @ c[None, :]

    mean_corr = M @ mu0
    cov_corr = M @ cov0 @ M.T

    m_mean = np.array([c @ mu0])
    m_cov = np.array([[c @ cov0 @ c]])
    t = float(_sample_or_force(m_mean, m_cov, outcome_source, 1)[0])

    output = GaussianState(mean_corr + np.array([0.0, -t]), 0.5 * (cov_corr + cov_corr.T))
    record = MeasurementRecord(
        step_index=0,
        mode=0,
        kappa=0.0,
        theta=-math.pi / 2,
        raw_outcome=t,
        rescaled_outcome=t,
    )
    return output, record


# ---------------------------------------------------------------------------
# channel extraction

ProtocolRunner = Callable[[GaussianState, int], GaussianState]

_PROBE_SEEDS = (20_24, 97)
_DETERMINISM_TOL = 1e-6


def _state_distance(a: GaussianState, b: GaussianState) -> float:
    return max(
        float(np.max(np.abs(a.mean - b.mean))),
        float(np.max(np.abs(a.cov - b.cov))),
    )


def channel_tomography(protocol: ProtocolRunner) -> GaussianChannel:
    """Reconstruct (S, N, d) of a corrected single-mode protocol.

    Three mean probes (vacuum, coherent(1,0), coherent(0,1)) determine the
    affine mean map; the vacuum output covariance then gives
    N = cov_out - S (I/4) S^T. Refuses with NonDeterministicChannelError if
    two differently seeded runs disagree, since the channel is only defined
    for outcome-independent (corrected Clifford) protocols.
    """
    out_a = protocol(vacuum_state(1), _PROBE_SEEDS[0])
    out_b = protocol(vacuum_state(1), _PROBE_SEEDS[1])
    dev = _state_distance(out_a, out_b)
    if dev > _DETERMINISM_TOL:
        raise NonDeterministicChannelError(
            f"corrected outputs differ by {dev:.3e} across seeds"
        )
    d = out_a.mean
    out_x = protocol(coherent_state(1.0, 0.0), _PROBE_SEEDS[0])
    out_p = protocol(coherent_state(0.0, 1.0), _PROBE_SEEDS[0])
    S = np.column_stack([out_x.mean - d, out_p.mean - d])
    N = out_a.cov - VACUUM_VARIANCE * S @ S.T
    return GaussianChannel(S=S, N=0.5 * (N + N.T), d=d)


def outcome_independence_check(
    run: Callable[[int], GaussianState], seeds: Iterable[int]
) -> float:
    """Max distance between corrected outputs across seeds (means and covs)."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    reference = run(seeds[0])
    return max(_state_distance(run(s), reference) for s in seeds[1:]) if len(seeds) > 1 else 0.0
