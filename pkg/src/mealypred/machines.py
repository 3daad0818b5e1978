"""A small catalog of named machines used in docs, tests, and experiments."""

from __future__ import annotations

import random
from typing import Sequence

from .automaton import MealyMachine


def constant_machine(bit: int) -> MealyMachine:
    """One state that emits ``bit`` on every input."""
    return MealyMachine(1, ((0, 0),), ((bit, bit),))


def ring_machine(outputs: str | Sequence[int]) -> MealyMachine:
    """Both inputs advance around a ring; state i always emits ``outputs[i]``.

    Rings ignore their input entirely and produce a periodic output sequence.
    """
    outs = [int(o) for o in outputs]
    k = len(outs)
    transition = tuple((((i + 1) % k), ((i + 1) % k)) for i in range(k))
    output = tuple((outs[i], outs[i]) for i in range(k))
    return MealyMachine(k, transition, output)


def alternating_ring() -> MealyMachine:
    """Two-state ring emitting 0101... regardless of input."""
    return ring_machine("01")


def echo_machine() -> MealyMachine:
    """Two states remembering the last input; output equals the current input.

    Every output bit is an input bit the observer has not seen yet, making the
    stream unpredictable from its own past. Both states are unbiased.
    """
    return MealyMachine(2, ((0, 1), (0, 1)), ((0, 1), (0, 1)))


def delay_machine() -> MealyMachine:
    """Two-state shift register: output is the previous input bit.

    The state stores the last input; the first output is the initial stored 0,
    so a length-t input maps to the length-t output shifted right by one.
    Both states are biased: the stored bit fixes the next output.
    """
    return MealyMachine(2, ((0, 1), (0, 1)), ((0, 0), (1, 1)))


def biased_unbiased_ring() -> MealyMachine:
    """Two-state ring alternating a biased state and an unbiased one."""
    return MealyMachine(2, ((1, 1), (0, 0)), ((0, 0), (0, 1)))


def eight_state_example() -> MealyMachine:
    """Eight-state branching machine used as a fixed regression example.

    On input 001111 it visits states 0 1 4 5 7 0 2 and emits 000100. Entries
    not pinned by that trace are self-loops emitting 0.
    """
    transition = [[s, s] for s in range(8)]
    output = [[0, 0] for _ in range(8)]
    for s, b, n, o in [
        (0, 0, 1, 0),
        (0, 1, 2, 0),
        (1, 0, 4, 0),
        (4, 1, 5, 0),
        (5, 1, 7, 1),
        (7, 1, 0, 0),
    ]:
        transition[s][b] = n
        output[s][b] = o
    return MealyMachine(8, tuple(tuple(r) for r in transition), tuple(tuple(r) for r in output))


def random_machine(num_states: int, rng: random.Random) -> MealyMachine:
    """Uniformly random k-state machine with initial state 0."""
    transition = tuple(
        (rng.randrange(num_states), rng.randrange(num_states)) for _ in range(num_states)
    )
    output = tuple((rng.randrange(2), rng.randrange(2)) for _ in range(num_states))
    return MealyMachine(num_states, transition, output)
