"""Exact brute-force finite-volume computations at desk scale.

Configurations on the first n levels of a k-ary tree are enumerated as bit
masks (bit i set means spin -1 at vertex i, so mask 0 is the all-plus
configuration).  The unnormalised weight of a configuration is

    exp( beta*J * sum over edges sigma(x) sigma(y)
         + sum over outer-level x of h_x sigma(x) )

with the boundary field h_x acting on the outer level only.  These
measures are deliberately independent of the recursion machinery they are
used to test: plain enumeration, no transfer-matrix shortcuts.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .kernels import Coupling, k_beta
from .tree import BoundaryAssignment, CapacityError, FiniteTree

MAX_CONFIGS = 2**24
_CHUNK_BITS = 16


@lru_cache(maxsize=8)
def _spin_table(num_sites: int, num_configs: int) -> np.ndarray:
    # (num_configs, num_sites) matrix of +-1 spins; only cached for volumes
    # small enough to enumerate unchunked.
    masks = np.arange(num_configs, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(num_sites, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def _log_weights(
    tree: FiniteTree,
    boundary_fields: np.ndarray,
    coupling: Coupling,
    n: int,
    root_parent_spin: Optional[int],
) -> np.ndarray:
    num_sites = tree.num_vertices_to_depth(n)
    num_configs = 1 << num_sites
    bj = coupling.beta_j
    parents = np.array([(v - 1) // tree.k for v in range(1, num_sites)], dtype=np.int64)
    children = np.arange(1, num_sites, dtype=np.int64)
    outer = np.arange(tree.level_offsets[n], num_sites, dtype=np.int64)
    out = np.empty(num_configs, dtype=float)
    chunk = min(num_configs, 1 << _CHUNK_BITS)
    for start in range(0, num_configs, chunk):
        stop = min(start + chunk, num_configs)
        if num_configs <= (1 << _CHUNK_BITS):
            spins = _spin_table(num_sites, num_configs)[start:stop].astype(np.float64)
        else:
            masks = np.arange(start, stop, dtype=np.int64)
            bits = (masks[:, None] >> np.arange(num_sites, dtype=np.int64)[None, :]) & 1
            spins = (1 - 2 * bits).astype(np.float64)
        logw = bj * (spins[:, parents] * spins[:, children]).sum(axis=1)
        logw += spins[:, outer] @ boundary_fields[outer]
        if root_parent_spin is not None:
            logw += bj * root_parent_spin * spins[:, 0]
        out[start:stop] = logw
    return out


@dataclass(frozen=True)
class FiniteVolumeMeasure:
    """Exactly enumerated Gibbs distribution on the first n levels.

    Weights are stored rescaled by exp(-log_scale) (the max log weight is
    subtracted before exponentiating) so the partition sum stays finite at
    large beta*J; probabilities are unaffected by the rescaling.
    """

    n: int
    num_sites: int
    weights: np.ndarray
    z: float
    log_scale: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def site_marginal(self, v: int) -> tuple[float, float]:
        """(P(sigma_v = +1), P(sigma_v = -1))."""
        if not (0 <= v < self.num_sites):
            raise KeyError(f"vertex {v} not in volume")
        probs = self.probabilities
        shaped = probs.reshape(1 << (self.num_sites - v - 1), 2, 1 << v)
        p_minus = float(shaped[:, 1, :].sum())
        return 1.0 - p_minus, p_minus


def config_weight(
    tree: FiniteTree,
    assignment: BoundaryAssignment,
    coupling: Coupling,
    sigma: Sequence[int],
    n: int,
) -> float:
    """Literal (unrescaled) weight of one configuration on the first n levels."""
    num_sites = tree.num_vertices_to_depth(n)
    if len(sigma) != num_sites:
        raise ValueError(f"configuration must cover {num_sites} vertices, got {len(sigma)}")
    spins = np.asarray(sigma, dtype=float)
    if not np.all(np.abs(spins) == 1.0):
        raise ValueError("spins must be +-1")
    bj = coupling.beta_j
    energy = 0.0
    for v in range(1, num_sites):
        energy += bj * spins[(v - 1) // tree.k] * spins[v]
    fields = assignment.numeric_fields()
    for v in tree.level(n):
        energy += fields[v] * spins[v]
    return math.exp(energy)


def finite_volume_measure(
    tree: FiniteTree,
    assignment: BoundaryAssignment,
    coupling: Coupling,
    n: int,
    root_parent_spin: Optional[int] = None,
    max_configs: int = MAX_CONFIGS,
) -> FiniteVolumeMeasure:
    """Exact enumeration of the level-n Gibbs distribution.

    ``root_parent_spin`` (+1 or -1) grafts a frozen parent spin above the
    root, adding beta*J*s*sigma(root) to the energy: the configuration a
    variation-distance comparison at the root needs.
    """
    if n > tree.depth:
        raise ValueError(f"depth {n} exceeds tree depth {tree.depth}")
    num_sites = tree.num_vertices_to_depth(n)
    if 1 << num_sites > max_configs:
        raise CapacityError(
            f"2^{num_sites} configurations exceed the cap of {max_configs}"
        )
    if root_parent_spin not in (None, 1, -1):
        raise ValueError(f"root_parent_spin must be +-1 or None, got {root_parent_spin!r}")
    logw = _log_weights(tree, assignment.numeric_fields(), coupling, n, root_parent_spin)
    log_scale = float(np.max(logw))
    weights = np.exp(logw - log_scale)
    z = float(weights.sum())
    return FiniteVolumeMeasure(
        n=n, num_sites=num_sites, weights=weights, z=z, log_scale=log_scale
    )


@dataclass(frozen=True)
class KolmogorovReport:
    max_discrepancy: float
    passed: bool
    tol: float


def check_kolmogorov(
    mu_n: FiniteVolumeMeasure,
    mu_prev: FiniteVolumeMeasure,
    tol: float = 1e-12,
) -> KolmogorovReport:
    """Compare the outer-level marginal of ``mu_n`` with ``mu_prev``.

    For every configuration on the first n-1 levels, sums ``mu_n`` over the
    outer level and takes the worst absolute difference from ``mu_prev``.
    The measures must come from the same tree, assignment and coupling.
    """
    if mu_n.n != mu_prev.n + 1:
        raise ValueError(f"depth mismatch: {mu_n.n} vs {mu_prev.n}")
    if mu_n.num_sites <= mu_prev.num_sites:
        raise ValueError("inconsistent volumes")
    outer_configs = 1 << (mu_n.num_sites - mu_prev.num_sites)
    marginal = mu_n.probabilities.reshape(outer_configs, 1 << mu_prev.num_sites).sum(axis=0)
    max_discrepancy = float(np.max(np.abs(marginal - mu_prev.probabilities)))
    return KolmogorovReport(
        max_discrepancy=max_discrepancy, passed=bool(max_discrepancy < tol), tol=tol
    )


def root_marginal_ratio(mu: FiniteVolumeMeasure) -> float:
    """P(sigma_root = -1) / P(sigma_root = +1).

    For an assignment whose field pair solves the reduced system this
    equals exp(-2 * h_root).  Returns +inf (with a warning) if the plus
    probability underflows to zero.
    """
    p_plus, p_minus = mu.site_marginal(0)
    if p_plus == 0.0:
        _warnings.warn("root plus-probability underflowed; ratio reported as +inf")
        return math.inf
    return p_minus / p_plus


def variation_distance(mu1: FiniteVolumeMeasure, mu2: FiniteVolumeMeasure, v: int) -> float:
    """Variation distance of the spin-at-v marginals of two measures."""
    a_plus, a_minus = mu1.site_marginal(v)
    b_plus, b_minus = mu2.site_marginal(v)
    return 0.5 * (abs(a_plus - b_plus) + abs(a_minus - b_minus))


def parent_disagreement_distance(
    tree: FiniteTree,
    assignment: BoundaryAssignment,
    coupling: Coupling,
    n: int,
) -> tuple[float, float]:
    """Variation distance at the root between the measures with the grafted
    parent spin frozen to +1 and to -1, paired with the kernel prediction
    k_beta(exp(-2 h_root)) evaluated from the parent-free measure."""
    mu_plus = finite_volume_measure(tree, assignment, coupling, n, root_parent_spin=1)
    mu_minus = finite_volume_measure(tree, assignment, coupling, n, root_parent_spin=-1)
    mu_free = finite_volume_measure(tree, assignment, coupling, n)
    observed = variation_distance(mu_plus, mu_minus, 0)
    predicted = k_beta(coupling, root_marginal_ratio(mu_free))
    return observed, predicted
