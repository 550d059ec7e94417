"""Resource-state factory: linear cluster states and two-mode resources.

A linear cluster is a chain of momentum-squeezed modes coupled by
controlled-Z gates; the off-line teleportation schemes instead consume a
two-mode squeezed (EPR) state, optionally modified by a gate on its second
half.
"""

from __future__ import annotations

from dataclasses import dataclass

from .phase_space import (
    GaussianState,
    SymplecticGate,
    apply_gate,
    beamsplitter_5050,
    controlled_z,
    squeezed_vacuum,
    tensor,
)


@dataclass(frozen=True)
class ClusterSpec:
    """Chain length and the (uniform) squeezing of every node."""

    n_nodes: int
    squeezing_r: float

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if self.squeezing_r < 0:
            raise ValueError("squeezing_r must be >= 0")


def linear_cluster(spec: ClusterSpec) -> GaussianState:
    """p-squeezed vacua chained by CZ gates between adjacent nodes.

    The CZ gates all commute; they are applied left to right purely for
    reproducibility.
    """
    state = squeezed_vacuum(spec.squeezing_r, axis="p")
    for _ in range(spec.n_nodes - 1):
        state = tensor(state, squeezed_vacuum(spec.squeezing_r, axis="p"))
    cz = controlled_z()
    for i in range(spec.n_nodes - 1):
        state = apply_gate(state, cz, [i, i + 1])
    return state


def attach_input(input_state: GaussianState, cluster: GaussianState) -> GaussianState:
    """Couple an external input to the head of a cluster with a CZ gate.

    The input becomes mode 0, so step j of a protocol consumes mode j and
    the chain numbering matches the usual circuit picture shifted by one.
    """
    if input_state.n_modes != 1:
        raise ValueError("input must be a single-mode state")
    if cluster.n_modes < 1:
        raise ValueError("cluster must be nonempty")
    return apply_gate(tensor(input_state, cluster), controlled_z(), [0, 1])


def epr_resource(r: float) -> GaussianState:
    """Two-mode squeezed state: a 50:50 beamsplitter on p-squeezed (x)
    x-squeezed inputs. Satisfies Var(x1 - x2) = Var(p1 + p2) = e^{-2r}/2."""
    pair = tensor(squeezed_vacuum(r, axis="p"), squeezed_vacuum(r, axis="x"))
    return apply_gate(pair, beamsplitter_5050(), [0, 1])


def modified_resource(r: float, u_gate: SymplecticGate) -> GaussianState:
    """EPR resource with a single-mode gate applied to its second half,
    so that teleporting through it applies the gate to the input."""
    if u_gate.n_modes != 1:
        raise ValueError("u_gate must be a single-mode gate")
    return apply_gate(epr_resource(r), u_gate, [1])
