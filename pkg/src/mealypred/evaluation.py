"""Error metrics for predictors, exact or sampled, plus batch-mode selection.

The exact evaluators average per-bit prediction error over every input
sequence of a given length. Three engines produce identical integer error
totals and are cross-checked in the test suite:

* a vectorized sweep that simulates all sequences in parallel (state-informed
  and automaton predictors);
* a class-tree walk that visits each realizable output prefix once, weighting
  it by how many input sequences produce it (any predictor that can snapshot
  its internal state — predictions depend only on the observed prefix, so all
  sequences sharing a prefix share predictions and errors);
* a plain per-sequence loop, the reference semantics and final fallback.

Predictors whose machine model is contradicted by an observation are scored
leniently here: a dead model keeps emitting the tie-rule 0. This makes
cross-machine scores and batch continuation scores well-defined.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .automaton import Bits, MealyMachine, machine_id
from .predictors import (
    AutomatonPredictor,
    ConsistencyPredictor,
    ConstantPredictor,
    EnsemblePredictor,
    KnownStatePredictor,
    OutputTransitionMatrices,
    Predictor,
    advance_counts,
)

EXHAUSTIVE_T_CAP = 24
PAIR_BUDGET_LOG2 = 26
_BLOCK = 1 << 20
_VEC_T_LIMIT = 62  # consistency counts fit in int64 up to here


class CapExceeded(RuntimeError):
    """A requested sweep is larger than the configured safety cap."""


class InconsistentTrainingData(ValueError):
    """No candidate machine can produce the given training sequence."""


@dataclass(frozen=True)
class ErrorReport:
    """Average and worst-case prediction error for one (machine, predictor) pair.

    Exhaustive reports carry exact rationals; Monte Carlo reports carry float
    estimates, record the sampler, and flag ``e_wc`` as only a lower bound on
    the true worst case.
    """

    machine_id: str
    predictor_id: str
    t: int
    e_ave: Fraction | float
    e_wc: Fraction | float
    method: str
    samples: int | None = None
    seed: int | None = None
    rng: str | None = None
    wc_is_lower_bound: bool = False
    per_step_errors: tuple | None = None

    def __post_init__(self):
        if not 0 <= self.e_ave <= self.e_wc <= 1:
            raise ValueError(
                f"error metrics out of order: e_ave={self.e_ave}, e_wc={self.e_wc}"
            )

    def to_dict(self) -> dict:
        d: dict = {
            "machine_id": self.machine_id,
            "predictor_id": self.predictor_id,
            "t": self.t,
            "e_ave": _rational_str(self.e_ave),
            "e_ave_float": float(self.e_ave),
            "e_wc": _rational_str(self.e_wc),
            "e_wc_float": float(self.e_wc),
            "method": self.method,
        }
        if self.method == "monte_carlo":
            d["samples"] = self.samples
            d["seed"] = self.seed
            d["rng"] = self.rng
            d["wc_is_lower_bound"] = self.wc_is_lower_bound
        if self.per_step_errors is not None:
            d["per_step_errors"] = [_rational_str(x) for x in self.per_step_errors]
        return d


def _rational_str(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


@contextmanager
def _lenient(predictor: Predictor):
    """Temporarily disable strict inconsistency errors on model-tracking predictors."""
    toggled = []
    for obj in (predictor,):
        if isinstance(obj, (ConsistencyPredictor, EnsemblePredictor)) and obj.strict:
            obj.strict = False
            toggled.append(obj)
    try:
        yield
    finally:
        for obj in toggled:
            obj.strict = True


# ---------------------------------------------------------------------------
# vectorized sweeps (exact integer error totals)

def _sweep_known_state(machine: MealyMachine, t: int, n: int, column) -> tuple[int, int, list[int]]:
    trans = np.asarray(machine.transition, dtype=np.int64)
    out = np.asarray(machine.output, dtype=np.int64)
    forced = np.where(out[:, 0] == out[:, 1], out[:, 0], 0)
    states = np.full(n, machine.initial_state, dtype=np.int64)
    seq_err = np.zeros(n, dtype=np.int64)
    step_totals = []
    for i in range(t):
        b = column(i)
        e = forced[states] != out[states, b]
        seq_err += e
        step_totals.append(int(e.sum()))
        states = trans[states, b]
    return int(seq_err.sum()), int(seq_err.max()), step_totals


def _sweep_automaton(machine: MealyMachine, pred_machine: MealyMachine, t: int, n: int, column) -> tuple[int, int, list[int]]:
    ttrans = np.asarray(machine.transition, dtype=np.int64)
    tout = np.asarray(machine.output, dtype=np.int64)
    ptrans = np.asarray(pred_machine.transition, dtype=np.int64)
    pout = np.asarray(pred_machine.output, dtype=np.int64)
    p0, pend0 = pred_machine.step(pred_machine.initial_state, 0)
    states = np.full(n, machine.initial_state, dtype=np.int64)
    pstates = np.full(n, p0, dtype=np.int64)
    pending = np.full(n, pend0, dtype=np.int64)
    seq_err = np.zeros(n, dtype=np.int64)
    step_totals = []
    for i in range(t):
        b = column(i)
        o = tout[states, b]
        e = pending != o
        seq_err += e
        step_totals.append(int(e.sum()))
        states = ttrans[states, b]
        pending = pout[pstates, o]
        pstates = ptrans[pstates, o]
    return int(seq_err.sum()), int(seq_err.max()), step_totals


def _sweep_consistency(machine: MealyMachine, pred_machine: MealyMachine, t: int, n: int, column) -> tuple[int, int, list[int]]:
    ttrans = np.asarray(machine.transition, dtype=np.int64)
    tout = np.asarray(machine.output, dtype=np.int64)
    mats = OutputTransitionMatrices.from_machine(pred_machine)
    m0 = np.asarray(mats.m0, dtype=np.int64)
    m1 = np.asarray(mats.m1, dtype=np.int64)
    deg0 = m0.sum(axis=1)
    deg1 = m1.sum(axis=1)
    kp = pred_machine.num_states
    counts = np.zeros((n, kp), dtype=np.int64)
    counts[:, pred_machine.initial_state] = 1
    states = np.full(n, machine.initial_state, dtype=np.int64)
    seq_err = np.zeros(n, dtype=np.int64)
    step_totals = []
    for i in range(t):
        b = column(i)
        pred = (counts @ deg0 < counts @ deg1).astype(np.int64)
        o = tout[states, b]
        e = pred != o
        seq_err += e
        step_totals.append(int(e.sum()))
        states = ttrans[states, b]
        counts = np.where((o == 1)[:, None], counts @ m1, counts @ m0)
    return int(seq_err.sum()), int(seq_err.max()), step_totals


def _sweep_constant(machine: MealyMachine, bit: int, t: int, n: int, column) -> tuple[int, int, list[int]]:
    trans = np.asarray(machine.transition, dtype=np.int64)
    out = np.asarray(machine.output, dtype=np.int64)
    states = np.full(n, machine.initial_state, dtype=np.int64)
    seq_err = np.zeros(n, dtype=np.int64)
    step_totals = []
    for i in range(t):
        b = column(i)
        e = out[states, b] != bit
        seq_err += e
        step_totals.append(int(e.sum()))
        states = trans[states, b]
    return int(seq_err.sum()), int(seq_err.max()), step_totals


def _range_columns(lo: int, hi: int):
    g = np.arange(lo, hi, dtype=np.int64)
    return hi - lo, lambda i: (g >> i) & 1


def _matrix_columns(bits: np.ndarray):
    return bits.shape[0], lambda i: bits[:, i].astype(np.int64)


_SWEEPS = {
    "known_state": _sweep_known_state,
    "constant": _sweep_constant,
    "automaton": _sweep_automaton,
    "consistency": _sweep_consistency,
}


def _sweep_range_chunk(args) -> tuple[int, int, list[int]]:
    """Worker body: run one vectorized sweep over a block-split g-range."""
    kind, params, t, lo, hi = args
    total, wc = 0, 0
    step = [0] * t
    sweep = _SWEEPS[kind]
    for blo in range(lo, hi, _BLOCK):
        bhi = min(blo + _BLOCK, hi)
        n, column = _range_columns(blo, bhi)
        bt, bw, bs = sweep(*params, t, n, column)
        total += bt
        wc = max(wc, bw)
        step = [a + b for a, b in zip(step, bs)]
    return total, wc, step


def _sweep_matrix_chunk(args) -> tuple[int, int, list[int]]:
    kind, params, t, bits = args
    n, column = _matrix_columns(bits)
    return _SWEEPS[kind](*params, t, n, column)


def _run_chunks(worker, chunks, workers: int, t: int) -> tuple[int, int, list[int]]:
    if workers <= 1 or len(chunks) <= 1:
        results = [worker(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, chunks))
    total, wc = 0, 0
    step = [0] * t
    for bt, bw, bs in results:
        total += bt
        wc = max(wc, bw)
        step = [a + b for a, b in zip(step, bs)]
    return total, wc, step


def _generic_range_chunk(args) -> tuple[int, int, list[int]]:
    machine, predictor, t, lo, hi = args
    with _lenient(predictor):
        return _generic_totals(machine, predictor, t, range(lo, hi))


def _generic_rows_chunk(args) -> tuple[int, int, list[int]]:
    machine, predictor, t, bits = args
    packed = (
        int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")
        for row in bits
    )
    with _lenient(predictor):
        return _generic_totals(machine, predictor, t, packed)


def _split_range(n: int, workers: int) -> list[tuple[int, int]]:
    pieces = max(1, workers)
    bounds = [n * i // pieces for i in range(pieces + 1)]
    return [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi]


# ---------------------------------------------------------------------------
# class-tree engine

def _tree_totals(
    machine: MealyMachine,
    predictor: Predictor,
    t: int,
    *,
    start_state: int | None = None,
    reset: bool = True,
) -> tuple[int, int, list[int]]:
    """Exact error totals by visiting each realizable output prefix once.

    The per-state vector carries how many input sequences of the current
    length produce the prefix and end in each state; predictions and errors
    are shared class-wide, so totals weight each branch by its class size.
    """
    if reset:
        predictor.reset()
    mats = OutputTransitionMatrices.from_machine(machine)
    rows = (mats.sparse_rows(0), mats.sparse_rows(1))
    root = [0] * machine.num_states
    root[machine.initial_state if start_state is None else start_state] = 1
    total = 0
    wc = 0
    step_totals = [0] * t

    def walk(vec, depth, errs):
        nonlocal total, wc
        pred = predictor.predict()
        c0 = advance_counts(vec, rows[0])
        c1 = advance_counts(vec, rows[1])
        n0 = sum(c0)
        n1 = sum(c1)
        wrong = n1 if pred == 0 else n0
        weight = 1 << (t - depth - 1)
        total += wrong * weight
        step_totals[depth] += wrong * weight
        for bit, counts, cnt in ((0, c0, n0), (1, c1, n1)):
            if not cnt:
                continue
            e = errs + (1 if pred != bit else 0)
            if depth + 1 == t:
                if e > wc:
                    wc = e
            else:
                snap = predictor.snapshot()
                predictor.observe(bit)
                walk(counts, depth + 1, e)
                predictor.restore(snap)

    walk(root, 0, 0)
    return total, wc, step_totals


# ---------------------------------------------------------------------------
# reference engine

def _generic_totals(
    machine: MealyMachine,
    predictor: Predictor,
    t: int,
    sequences: Iterable[int],
    *,
    rewind: Callable[[], None] | None = None,
    start_state: int | None = None,
) -> tuple[int, int, list[int]]:
    """Per-sequence reference loop; works for any predictor."""
    trans = machine.transition
    out = machine.output
    start = machine.initial_state if start_state is None else start_state
    rewind = rewind or predictor.reset
    total, wc = 0, 0
    step = [0] * t
    for g in sequences:
        rewind()
        s = start
        errs = 0
        for i in range(t):
            b = (g >> i) & 1
            predictor.inform_state(s)
            p = predictor.predict()
            o = out[s][b]
            if p != o:
                errs += 1
                step[i] += 1
            predictor.observe(o)
            s = trans[s][b]
        total += errs
        if errs > wc:
            wc = errs
    return total, wc, step


# ---------------------------------------------------------------------------
# dispatch

def _vector_plan(machine: MealyMachine, predictor: Predictor, t: int):
    """Return (sweep kind, sweep params) when a vectorized engine applies."""
    if isinstance(predictor, KnownStatePredictor) and predictor.machine == machine:
        return "known_state", (machine,)
    if isinstance(predictor, ConstantPredictor):
        return "constant", (machine, predictor.bit)
    if isinstance(predictor, AutomatonPredictor):
        return "automaton", (machine, predictor.machine)
    if isinstance(predictor, ConsistencyPredictor) and t <= _VEC_T_LIMIT:
        return "consistency", (machine, predictor.machine)
    return None


def _supports_snapshot(predictor: Predictor) -> bool:
    try:
        predictor.restore(predictor.snapshot())
    except NotImplementedError:
        return False
    return True


def _exact_totals(
    machine: MealyMachine, predictor: Predictor, t: int, workers: int
) -> tuple[int, int, list[int]]:
    with _lenient(predictor):
        plan = _vector_plan(machine, predictor, t)
        if plan is not None:
            kind, params = plan
            chunks = [(kind, params, t, lo, hi) for lo, hi in _split_range(1 << t, workers)]
            return _run_chunks(_sweep_range_chunk, chunks, workers, t)
        if _supports_snapshot(predictor):
            return _tree_totals(machine, predictor, t)
        # arbitrary predictors: each worker replays its own (pickled) instance
        chunks = [
            (machine, predictor, t, lo, hi) for lo, hi in _split_range(1 << t, workers)
        ]
        return _run_chunks(_generic_range_chunk, chunks, workers, t)


def evaluate_exhaustive(
    machine: MealyMachine,
    predictor: Predictor,
    t: int,
    *,
    cap: int = EXHAUSTIVE_T_CAP,
    workers: int = 1,
    per_step: bool = False,
) -> ErrorReport:
    """Exact average and worst-case error over all ``2**t`` input sequences.

    The predictor is reset before each sequence (equivalently, before each
    branch of the shared observation tree). Horizons above ``cap`` are
    refused; raise the cap deliberately or use :func:`evaluate_monte_carlo`.
    """
    if t < 1:
        raise ValueError("horizon must be at least 1")
    if t > cap:
        raise CapExceeded(
            f"horizon {t} exceeds the exhaustive cap of {cap} "
            f"(2**{t} sequences); raise the cap explicitly or use Monte Carlo"
        )
    total, wc, step = _exact_totals(machine, predictor, t, workers)
    n = 1 << t
    return ErrorReport(
        machine_id=machine_id(machine),
        predictor_id=predictor.label,
        t=t,
        e_ave=Fraction(total, t * n),
        e_wc=Fraction(wc, t),
        method="exhaustive",
        per_step_errors=tuple(Fraction(c, n) for c in step) if per_step else None,
    )


def evaluate_monte_carlo(
    machine: MealyMachine,
    predictor: Predictor,
    t: int,
    samples: int,
    seed: int = 0,
    *,
    workers: int = 1,
    per_step: bool = False,
) -> ErrorReport:
    """Estimate the average error from uniformly sampled input sequences.

    Sampling uses numpy's PCG64 generator seeded explicitly, so a report is
    reproducible from (machine, predictor, t, samples, seed) alone. The
    sampled worst case only bounds the true one from below.
    """
    if t < 1:
        raise ValueError("horizon must be at least 1")
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(samples, t), dtype=np.uint8)
    row_chunks = _split_range(samples, workers)
    with _lenient(predictor):
        plan = _vector_plan(machine, predictor, t)
        if plan is not None:
            kind, params = plan
            chunks = [(kind, params, t, bits[lo:hi]) for lo, hi in row_chunks]
            total, wc, step = _run_chunks(_sweep_matrix_chunk, chunks, workers, t)
        else:
            chunks = [(machine, predictor, t, bits[lo:hi]) for lo, hi in row_chunks]
            total, wc, step = _run_chunks(_generic_rows_chunk, chunks, workers, t)
    return ErrorReport(
        machine_id=machine_id(machine),
        predictor_id=predictor.label,
        t=t,
        e_ave=total / (t * samples),
        e_wc=wc / t,
        method="monte_carlo",
        samples=samples,
        seed=seed,
        rng="pcg64",
        wc_is_lower_bound=True,
        per_step_errors=tuple(c / samples for c in step) if per_step else None,
    )


def predictor_machine_error(
    predictor: Predictor,
    machine: MealyMachine,
    t: int,
    *,
    cap: int = EXHAUSTIVE_T_CAP,
) -> Fraction:
    """Exact average error of an arbitrary predictor against a machine.

    The machine need not be the one the predictor assumes; a predictor whose
    model is contradicted keeps scoring with tie-rule predictions.
    """
    if t < 1:
        raise ValueError("horizon must be at least 1")
    if t > cap:
        raise CapExceeded(f"horizon {t} exceeds the exhaustive cap of {cap}")
    total, _, _ = _exact_totals(machine, predictor, t, workers=1)
    return Fraction(total, t * (1 << t))


# ---------------------------------------------------------------------------
# batch setting

def consistency_profile(machine: MealyMachine, observed: Bits) -> tuple[int, ...]:
    """Per-state counts of input sequences consistent with an observed prefix."""
    mats = OutputTransitionMatrices.from_machine(machine)
    rows = (mats.sparse_rows(0), mats.sparse_rows(1))
    counts = [0] * machine.num_states
    counts[machine.initial_state] = 1
    for bit in observed:
        counts = advance_counts(counts, rows[bit])
        if not any(counts):
            break
    return tuple(counts)


@dataclass(frozen=True)
class BatchProblem:
    """Training data plus the candidate machines and predictors to choose among."""

    machines: tuple[MealyMachine, ...]
    training: Bits
    horizon: int
    predictors: tuple[Predictor, ...]

    def __post_init__(self):
        if not self.machines:
            raise ValueError("candidate machine list must be nonempty")
        if not self.predictors:
            raise ValueError("predictor list must be nonempty")
        if self.horizon <= len(self.training):
            raise ValueError("horizon must exceed the training length")


@dataclass(frozen=True)
class PredictorScore:
    label: str
    index: int
    score: Fraction
    training_errors: int
    model_died_in_training: bool

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "index": self.index,
            "score": _rational_str(self.score),
            "score_float": float(self.score),
            "training_errors": self.training_errors,
            "model_died_in_training": self.model_died_in_training,
        }


@dataclass(frozen=True)
class BatchSelection:
    best_index: int
    best_label: str
    scores: tuple[PredictorScore, ...]
    weighting: str
    pair_counts: tuple[int, ...]
    continuation: int

    def to_dict(self) -> dict:
        return {
            "best_index": self.best_index,
            "best_label": self.best_label,
            "weighting": self.weighting,
            "continuation": self.continuation,
            "pair_counts": list(self.pair_counts),
            "scores": [s.to_dict() for s in self.scores],
        }


def _train_predictor(predictor: Predictor, training: Bits) -> tuple[int, bool]:
    """Drive a predictor through the training bits; returns (errors, model died)."""
    predictor.reset()
    errors = 0
    for bit in training:
        errors += int(predictor.predict() != bit)
        predictor.observe(bit)
    died = isinstance(predictor, ConsistencyPredictor) and not predictor.consistent
    if isinstance(predictor, EnsemblePredictor):
        died = not predictor.alive()
    return errors, died


def _continuation_errors(
    predictor: Predictor, machine: MealyMachine, start_state: int, t: int
) -> int:
    """Total continuation errors from the predictor's current knowledge state."""
    if isinstance(predictor, KnownStatePredictor):
        raise TypeError("state-informed predictors cannot be scored in the batch setting")
    snap = predictor.snapshot()
    total, _, _ = _tree_totals(machine, predictor, t, start_state=start_state, reset=False)
    predictor.restore(snap)
    return total


def batch_select(
    problem: BatchProblem,
    *,
    weighting: str = "pairs",
    pair_budget_log2: int = PAIR_BUDGET_LOG2,
) -> BatchSelection:
    """Pick the predictor with the least expected error on continuations.

    Every (input sequence, machine) pair able to produce the training data is
    enumerated implicitly: per machine, the consistency profile of the
    training data gives the count of such sequences per end state, and that
    end state is where the machine resumes for the ``horizon - t``
    continuation steps. Each predictor is scored with its post-training
    knowledge; training errors are reported but play no part in the score.

    ``weighting="pairs"`` weights every consistent pair equally;
    ``weighting="machines"`` averages within each machine first, then across
    the machines that survive.
    """
    if weighting not in ("pairs", "machines"):
        raise ValueError(f"unknown weighting {weighting!r}")
    t = len(problem.training)
    delta = problem.horizon - t
    if len(problem.machines) * (1 << delta) > (1 << pair_budget_log2):
        raise CapExceeded(
            f"{len(problem.machines)} machines x 2**{delta} continuations "
            f"exceeds the pair budget of 2**{pair_budget_log2}"
        )
    profiles = [consistency_profile(m, problem.training) for m in problem.machines]
    pair_counts = tuple(sum(p) for p in profiles)
    if not any(pair_counts):
        raise InconsistentTrainingData(
            "no candidate machine can produce the training sequence"
        )

    denom = delta * (1 << delta)
    scores = []
    for idx, predictor in enumerate(problem.predictors):
        with _lenient(predictor):
            train_errors, died = _train_predictor(predictor, problem.training)
            per_machine: list[Fraction] = []
            for m, profile, pairs in zip(problem.machines, profiles, pair_counts):
                if not pairs:
                    continue
                total = Fraction(0)
                for s, cnt in enumerate(profile):
                    if cnt:
                        errs = _continuation_errors(predictor, m, s, delta)
                        total += cnt * Fraction(errs, denom)
                per_machine.append(total if weighting == "pairs" else total / pairs)
            predictor.reset()
        if weighting == "pairs":
            score = sum(per_machine, Fraction(0))
        else:
            score = sum(per_machine, Fraction(0)) / len(per_machine)
        scores.append(
            PredictorScore(predictor.label, idx, score, train_errors, died)
        )

    best = min(scores, key=lambda s: (s.score, s.index))
    return BatchSelection(
        best_index=best.index,
        best_label=best.label,
        scores=tuple(scores),
        weighting=weighting,
        pair_counts=pair_counts,
        continuation=delta,
    )


def default_batch_predictors(machines: Sequence[MealyMachine]) -> tuple[Predictor, ...]:
    """Constant predictors first (so score ties favor the simplest), then one
    consistency predictor per candidate machine."""
    preds: list[Predictor] = [ConstantPredictor(0), ConstantPredictor(1)]
    preds.extend(ConsistencyPredictor(m) for m in machines)
    return tuple(preds)


@dataclass(frozen=True)
class SelectionWitness:
    """A concrete instance where the best continuation predictor is not a
    training-error minimizer."""

    machines: tuple[MealyMachine, MealyMachine]
    training: Bits
    continuation: int
    selection: BatchSelection
    min_training_errors: int


def find_selection_witness(
    *,
    max_states: int = 2,
    max_training_len: int = 6,
    continuation: int = 4,
    max_pairs_per_prefix: int | None = None,
) -> SelectionWitness | None:
    """Scan small two-machine batch problems for a selection/training mismatch.

    Searches deterministically over training prefixes (shortest first) and
    ordered pairs of distinct canonical machines with at most ``max_states``
    states, using the default predictor set. A hit requires the selected
    predictor to beat every training-error minimizer strictly, so the
    mismatch cannot be an artifact of tie-breaking. Returns the first hit.
    """
    from .enumeration import enumerate_machines

    machines: list[MealyMachine] = []
    for k in range(1, max_states + 1):
        machines.extend(enumerate_machines(k, "canonical"))

    profile_cache: dict[tuple[int, Bits], tuple[int, ...]] = {}

    def profile(mi: int, training: Bits) -> tuple[int, ...]:
        key = (mi, training)
        if key not in profile_cache:
            profile_cache[key] = consistency_profile(machines[mi], training)
        return profile_cache[key]

    for ln in range(1, max_training_len + 1):
        for value in range(1 << ln):
            training = Bits(value, ln)
            consistent = [i for i in range(len(machines)) if any(profile(i, training))]
            if not consistent:
                continue
            candidates = set(consistent)
            checked = 0
            for i in range(len(machines)):
                for j in range(i + 1, len(machines)):
                    if i not in candidates and j not in candidates:
                        continue
                    checked += 1
                    if max_pairs_per_prefix and checked > max_pairs_per_prefix:
                        break
                    pair = (machines[i], machines[j])
                    problem = BatchProblem(
                        machines=pair,
                        training=training,
                        horizon=ln + continuation,
                        predictors=default_batch_predictors(pair),
                    )
                    selection = batch_select(problem)
                    chosen = selection.scores[selection.best_index]
                    min_train = min(s.training_errors for s in selection.scores)
                    if chosen.training_errors <= min_train:
                        continue
                    minimizers = [
                        s for s in selection.scores if s.training_errors == min_train
                    ]
                    if all(chosen.score < s.score for s in minimizers):
                        return SelectionWitness(
                            machines=pair,
                            training=training,
                            continuation=continuation,
                            selection=selection,
                            min_training_errors=min_train,
                        )
                else:
                    continue
                break
    return None
