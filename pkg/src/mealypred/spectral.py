"""State-visit frequencies and the perfect-knowledge error floor.

The transition structure of a machine, with input bits uniform, is a Markov
chain whose transition matrix is the adjacency matrix scaled by 1/2. The
long-run fraction of time spent in each state is the time-averaged limit of
its powers; that average exists even for periodic chains, where the raw
powers oscillate forever.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .automaton import MealyMachine

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 10**6

# Residual slack factor when accepting a converged candidate as a fixed point.
_FIXED_POINT_SLACK = 10.0
_MIN_RESIDUAL = 1e-13


def adjacency(machine: MealyMachine) -> tuple[tuple[int, ...], ...]:
    """Counts of input bits taking state i to state j; every row sums to 2."""
    k = machine.num_states
    rows = []
    for s in range(k):
        row = [0] * k
        for b in (0, 1):
            row[machine.transition[s][b]] += 1
        rows.append(tuple(row))
    return tuple(rows)


def normalized_matrix(machine: MealyMachine) -> tuple[tuple[Fraction, ...], ...]:
    """The adjacency matrix scaled by 1/2, in exact rationals; rows sum to 1."""
    return tuple(tuple(Fraction(a, 2) for a in row) for row in adjacency(machine))


@dataclass(frozen=True)
class StationaryVector:
    """Per-state visit frequencies with the method that produced them.

    method is one of:
      * ``eigen``     -- the power sequence itself converged (aperiodic case);
      * ``cesaro``    -- a periodic orbit was detected and its window average
                         converged;
      * ``empirical`` -- neither converged within the iteration budget; the
                         running average so far is returned.
    residual is the max-norm of ``v @ N - v`` for the returned vector.
    """

    weights: tuple[float, ...]
    method: str
    residual: float
    iterations: int

    def __post_init__(self):
        if self.method not in ("eigen", "cesaro", "empirical"):
            raise ValueError(f"unknown method {self.method!r}")
        if any(w < -1e-12 for w in self.weights):
            raise ValueError("negative frequency")
        if abs(sum(self.weights) - 1.0) > 1e-6:
            raise ValueError("frequencies must sum to 1")


def stationary_frequencies(
    machine: MealyMachine,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> StationaryVector:
    """Time-averaged state-visit frequencies from the initial state.

    Iterates the distribution row vector and its running average. Two
    convergence routes are checked against ``tolerance`` in max-norm: the raw
    power sequence (which settles for aperiodic reachable structure), and a
    short-lag recurrence window whose average settles for periodic structure.
    Either candidate is only accepted if it is a fixed point of the chain.
    With ``tolerance=0`` the loop always runs ``max_iterations`` steps and
    returns the plain running average tagged ``empirical``.

    Unreachable states get weight 0 since the iteration starts at the
    initial state.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    k = machine.num_states
    n = np.zeros((k, k))
    for s in range(k):
        for b in (0, 1):
            n[s, machine.transition[s][b]] += 0.5

    x = np.zeros(k)
    x[machine.initial_state] = 1.0
    total = np.zeros(k)
    period_cap = min(64, max(16, 2 * k))
    recent: list[np.ndarray] = [x.copy()]  # recent[-1] is the latest iterate

    def residual_of(v: np.ndarray) -> float:
        return float(np.max(np.abs(v @ n - v)))

    accept = max(_FIXED_POINT_SLACK * tolerance, _MIN_RESIDUAL)
    for it in range(1, max_iterations + 1):
        x = x @ n
        total += x
        if tolerance > 0.0:
            candidate = None
            method = ""
            if np.max(np.abs(x - recent[-1])) < tolerance:
                candidate, method = x, "eigen"
            else:
                for p in range(2, min(len(recent), period_cap) + 1):
                    if np.max(np.abs(x - recent[-p])) < tolerance:
                        window = recent[len(recent) - p + 1 :] + [x]
                        candidate, method = np.mean(window, axis=0), "cesaro"
                        break
            if candidate is not None:
                res = residual_of(candidate)
                if res <= accept:
                    return StationaryVector(tuple(candidate.tolist()), method, res, it)
        recent.append(x.copy())
        if len(recent) > period_cap + 1:
            recent.pop(0)

    avg = total / max_iterations
    return StationaryVector(
        tuple(avg.tolist()), "empirical", residual_of(avg), max_iterations
    )


def perfect_knowledge_error_bound(
    machine: MealyMachine, frequencies: StationaryVector
) -> float:
    """Long-run error rate of the best predictor that always knows the state.

    In a biased state the next output is certain; in an unbiased state any
    fixed guess is wrong for exactly one of the two equally likely inputs, so
    each unbiased visit contributes an expected half error.
    """
    return 0.5 * sum(frequencies.weights[s] for s in machine.unbiased_states())
