"""Worker simulation and the end-to-end numeric decode path.

Trials advance event by event: worker i's k-th task completes at the
cumulative sum of its per-task durations, each duration being a raw speed
draw scaled by the cost weight of that task. After every completion the
master re-evaluates decodability and stops at the first decodable instant.

The numeric path maps each field coefficient c to the real number
1 / d where d is the canonical representative of c^-1 in GF(P). For
coefficients produced by the Cauchy construction d is exactly x_i - y_j,
so the real and field matrices share the same parameters and the same
generic rank profile; any disagreement between the two surfaces as a hard
decode failure rather than a silent wrong answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.linalg

from .core import (
    AssignmentPlan,
    Coded,
    Uncoded,
    decodability_checker,
    equations_decodable,
)
from .field import P


class NotDecodableError(ValueError):
    """The received equation set cannot determine every block product."""


class DecodeFailure(RuntimeError):
    """Every attempted row selection was numerically singular."""

    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(
            f"selected systems are numerically singular (condition estimate {cond:.3e})"
        )


# ---------------------------------------------------------------------------
# speed models


@dataclass(frozen=True)
class ShiftedExponential:
    """Per-task duration shift + Exp(rate * multiplier_i); multipliers > 1
    speed a worker up, < 1 slow it down (e.g. 0.2 for a straggler)."""

    shift: float = 1.0
    rate: float = 1.0
    multipliers: tuple | None = None

    def __post_init__(self):
        if self.shift < 0:
            raise ValueError("shift must be >= 0")
        if self.rate <= 0:
            raise ValueError("rate must be > 0")
        if self.multipliers is not None and any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive")


@dataclass(frozen=True)
class Deterministic:
    """Fixed per-task duration for every worker (scalar or one per worker)."""

    per_block: Union[float, tuple] = 1.0

    def __post_init__(self):
        values = (
            (self.per_block,) if isinstance(self.per_block, (int, float)) else self.per_block
        )
        if any(v <= 0 for v in values):
            raise ValueError("per-block times must be positive")


@dataclass(frozen=True)
class HaltAfter:
    """Workers in ``stragglers`` stop after ``blocks`` completed tasks; every
    completed task takes ``per_block`` seconds."""

    stragglers: tuple
    blocks: int = 0
    per_block: float = 1.0

    def __post_init__(self):
        if self.blocks < 0:
            raise ValueError("blocks must be >= 0")
        if self.per_block <= 0:
            raise ValueError("per_block must be positive")


SpeedModel = Union[ShiftedExponential, Deterministic, HaltAfter]


def raw_durations(speed: SpeedModel, n: int, ell: int, seed: int) -> np.ndarray:
    """(n, ell) per-task durations before cost weighting; inf marks tasks a
    halted worker never completes. Deterministic given (n, ell, seed) and
    independent of any plan, which is what makes paired trials comparable."""
    if isinstance(speed, ShiftedExponential):
        mult = np.ones(n) if speed.multipliers is None else np.asarray(speed.multipliers, dtype=float)
        if mult.shape != (n,):
            raise ValueError(f"need {n} multipliers, got {mult.shape}")
        rng = np.random.default_rng(seed)
        base = rng.exponential(scale=1.0, size=(n, ell))
        return speed.shift + base / (speed.rate * mult[:, None])
    if isinstance(speed, Deterministic):
        if isinstance(speed.per_block, (int, float)):
            per = np.full(n, float(speed.per_block))
        else:
            per = np.asarray(speed.per_block, dtype=float)
            if per.shape != (n,):
                raise ValueError(f"need {n} per-block times, got {per.shape}")
        return np.repeat(per[:, None], ell, axis=1)
    if isinstance(speed, HaltAfter):
        bad = [i for i in speed.stragglers if not 0 <= i < n]
        if bad:
            raise ValueError(f"straggler index {bad[0]} outside [0, {n})")
        dur = np.full((n, ell), speed.per_block)
        for i in speed.stragglers:
            dur[i, min(speed.blocks, ell) :] = np.inf
        return dur
    raise TypeError(f"unknown speed model {speed!r}")


# ---------------------------------------------------------------------------
# cost models


@dataclass(frozen=True)
class Uniform:
    """Every task costs the same."""


@dataclass(frozen=True)
class SparsityAware:
    """Per-block nonzero counts; an uncoded task costs the count of its
    block, a coded task the size of the union of the supports it combines.
    Blocks are disjoint row ranges, so that union is the sum of the counts
    of the combined blocks; coefficient cancellations earn no discount."""

    nnz: tuple

    def __post_init__(self):
        if any(v < 0 for v in self.nnz):
            raise ValueError("nonzero counts must be non-negative")


CostModel = Union[Uniform, SparsityAware]


def task_weight(cost: CostModel, task) -> float:
    if isinstance(cost, Uniform):
        return 1.0
    if isinstance(cost, SparsityAware):
        if isinstance(task, Uncoded):
            return float(cost.nnz[task.block])
        return float(sum(cost.nnz[b] for b in task.support))
    raise TypeError(f"unknown cost model {cost!r}")


# ---------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialResult:
    finish_time: float
    final_state: tuple
    blocks_processed_total: int
    decode_ok: bool


def run_trial(plan: AssignmentPlan, speed: SpeedModel, cost: CostModel, seed: int) -> TrialResult:
    """One simulated job; deterministic given the seed.

    The master decodes at the first completion event whose state is
    decodable. If even the final reachable state cannot decode, the result
    reports decode_ok = False with finish_time = inf.
    """
    n, ell = plan.n, plan.ell
    dur = raw_durations(speed, n, ell, seed)
    weights = np.array(
        [[task_weight(cost, t) for t in tasks] for tasks in plan.workers], dtype=float
    )
    weighted = np.where(np.isinf(dur), np.inf, dur * weights)
    times = np.cumsum(weighted, axis=1)
    events = sorted(
        (times[i, k], i, k)
        for i in range(n)
        for k in range(ell)
        if math.isfinite(times[i, k])
    )
    checker = decodability_checker(plan)
    state = [0] * n
    for t_ev, i, k in events:
        state[i] = k + 1
        if checker.decodable(tuple(state)):
            return TrialResult(
                finish_time=float(t_ev),
                final_state=tuple(state),
                blocks_processed_total=sum(state),
                decode_ok=True,
            )
    return TrialResult(
        finish_time=math.inf,
        final_state=tuple(state),
        blocks_processed_total=sum(state),
        decode_ok=False,
    )


@dataclass(frozen=True)
class TrialRow:
    plan_id: str
    trial: int
    finish_time: float
    blocks_total: int
    decode_ok: bool


@dataclass(frozen=True)
class PlanSummary:
    plan_id: str
    trials: int
    mean_finish: float
    median_finish: float
    p95_finish: float
    failure_rate: float


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed; deliberately independent of the plan so all plans in
    one experiment see identical raw duration draws."""
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial index must be non-negative")
    return int(np.random.SeedSequence((seed, trial)).generate_state(1)[0])


def run_experiment(
    plans: Sequence[AssignmentPlan],
    speed: SpeedModel,
    cost: CostModel,
    trials: int,
    seed: int,
    plan_ids: Sequence | None = None,
):
    """Paired trials over several plans.

    Returns (rows, summaries); row order is plan-major, trial-minor.
    Summary statistics are over successful trials (inf when none succeed).

    Raises:
        ValueError: trials < 1, or mismatched plan_ids.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if plan_ids is None:
        plan_ids = [f"plan_{i}" for i in range(len(plans))]
    if len(plan_ids) != len(plans):
        raise ValueError("plan_ids must match plans")
    seeds = [trial_seed(seed, t) for t in range(trials)]
    rows = []
    summaries = []
    for pid, plan in zip(plan_ids, plans):
        finishes = []
        failures = 0
        for t in range(trials):
            res = run_trial(plan, speed, cost, seeds[t])
            rows.append(
                TrialRow(
                    plan_id=pid,
                    trial=t,
                    finish_time=res.finish_time,
                    blocks_total=res.blocks_processed_total,
                    decode_ok=res.decode_ok,
                )
            )
            if res.decode_ok:
                finishes.append(res.finish_time)
            else:
                failures += 1
        if finishes:
            arr = np.array(finishes)
            summaries.append(
                PlanSummary(
                    plan_id=pid,
                    trials=trials,
                    mean_finish=float(arr.mean()),
                    median_finish=float(np.median(arr)),
                    p95_finish=float(np.percentile(arr, 95)),
                    failure_rate=failures / trials,
                )
            )
        else:
            summaries.append(
                PlanSummary(
                    plan_id=pid,
                    trials=trials,
                    mean_finish=math.inf,
                    median_finish=math.inf,
                    p95_finish=math.inf,
                    failure_rate=1.0,
                )
            )
    return rows, summaries


def rows_to_csv(rows: Iterable[TrialRow]) -> str:
    lines = ["plan_id,trial,finish_time,blocks_total,decode_ok"]
    for r in rows:
        ok = "true" if r.decode_ok else "false"
        lines.append(f"{r.plan_id},{r.trial},{r.finish_time!r},{r.blocks_total},{ok}")
    return "\n".join(lines) + "\n"


def summaries_to_csv(summaries: Iterable[PlanSummary]) -> str:
    lines = ["plan_id,trials,mean_finish,median_finish,p95_finish,failure_rate"]
    for s in summaries:
        lines.append(
            f"{s.plan_id},{s.trials},{s.mean_finish!r},{s.median_finish!r},"
            f"{s.p95_finish!r},{s.failure_rate!r}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# numeric decode


def split_matrix(rows: int, delta: int):
    """Balanced contiguous block-row ranges: the first rows % delta blocks
    take one extra row; ranges are disjoint and cover [0, rows).

    Raises:
        ValueError: rows < delta or delta < 1.
    """
    if delta < 1:
        raise ValueError("delta must be positive")
    if rows < delta:
        raise ValueError(f"need rows >= delta, got {rows} < {delta}")
    base, extra = divmod(rows, delta)
    out = []
    start = 0
    for b in range(delta):
        size = base + (1 if b < extra else 0)
        out.append(range(start, start + size))
        start += size
    return out


def real_coefficient(c: int) -> float:
    """Real image of a field coefficient: 1 / d for d = c^-1 mod P.

    Cauchy-built coefficients are stored as (x_i - y_j)^-1 with
    0 < x_i - y_j < P, so d recovers the original integer difference and
    the real matrix is the Cauchy matrix over the same parameters.
    """
    return 1.0 / pow(c % P, -1, P)


def _block_products(plan, A, x, pairs):
    """Products each completed task would transmit, keyed by (worker, pos)."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    ranges = split_matrix(A.shape[0], plan.params.delta)
    hmax = max(len(r) for r in ranges)
    cache = {}

    def block_product(b):
        if b not in cache:
            r = ranges[b]
            cache[b] = A[r.start : r.stop] @ x
        return cache[b]

    out = {}
    for i, k in pairs:
        t = plan.workers[i][k]
        if isinstance(t, Uncoded):
            out[(i, k)] = block_product(t.block)
        else:
            acc = np.zeros(hmax)
            for b, c in t.coeffs:
                p = block_product(b)
                acc[: len(p)] += real_coefficient(c) * p
            out[(i, k)] = acc
    return out


def task_products(plan: AssignmentPlan, A, x) -> list:
    """Every task's transmitted product, as nested per-worker lists."""
    pairs = [(i, k) for i in range(plan.n) for k in range(plan.ell)]
    prods = _block_products(plan, A, x, pairs)
    return [[prods[(i, k)] for k in range(plan.ell)] for i in range(plan.n)]


def _select_rows(mat: np.ndarray, need: int):
    """First `need` rows that are numerically independent, in given order."""
    sel = []
    for ridx in range(mat.shape[0]):
        trial = sel + [ridx]
        if np.linalg.matrix_rank(mat[trial]) == len(trial):
            sel.append(ridx)
            if len(sel) == need:
                return sel
    return None


def decode_from_products(plan: AssignmentPlan, nrows: int, received) -> np.ndarray:
    """Master-side reconstruction of the full product vector.

    ``received`` is an iterable of (worker, position, product_vector). The
    plan's coefficients and the received vectors are the only inputs; the
    matrix itself is never touched here.

    Known uncoded products are copied verbatim (duplicates must agree
    bitwise); the unknown blocks are solved from a square system of
    independent coded equations, chosen greedily in arrival order with a
    pivoted-QR retry if the greedy choice is ill-conditioned.

    Raises:
        NotDecodableError: the equation set has rank below delta.
        DecodeFailure: every usable row selection is numerically singular.
        ValueError: duplicated uncoded products disagree.
    """
    delta = plan.params.delta
    ranges = split_matrix(nrows, delta)
    hmax = max(len(r) for r in ranges)
    known = {}
    coded = []
    for i, k, vec in received:
        t = plan.workers[i][k]
        vec = np.asarray(vec, dtype=float)
        if isinstance(t, Uncoded):
            prev = known.get(t.block)
            if prev is not None and not np.array_equal(prev, vec):
                raise ValueError(
                    f"inconsistent duplicate products for block A_{t.block + 1}"
                )
            known[t.block] = vec
        else:
            coded.append((t, vec))
    if not equations_decodable(delta, frozenset(known), [t for t, _ in coded]):
        raise NotDecodableError(
            "received equations do not determine every block product"
        )
    unknown = [b for b in range(delta) if b not in known]
    solved = {}
    if unknown:
        m = len(coded)
        u = len(unknown)
        mat = np.zeros((m, u))
        rhs = np.zeros((m, hmax))
        for r, (t, vec) in enumerate(coded):
            cm = t.coeff_map()
            row_rhs = vec.astype(float).copy()
            for b, c in cm.items():
                if b in known:
                    p = known[b]
                    row_rhs[: len(p)] -= real_coefficient(c) * p
            for j, b in enumerate(unknown):
                if b in cm:
                    mat[r, j] = real_coefficient(cm[b])
            rhs[r] = row_rhs
        sel = _select_rows(mat, u)
        if sel is None:
            raise DecodeFailure(cond=math.inf)
        square = mat[sel]
        cond = np.linalg.cond(square)
        if cond > 1e12:
            # greedy pick is ill-conditioned; re-select rows by pivoted QR
            _, _, piv = scipy.linalg.qr(mat.T, pivoting=True)
            sel = list(piv[:u])
            square = mat[sel]
            cond = np.linalg.cond(square)
            if cond > 1e14 or not np.isfinite(cond):
                raise DecodeFailure(cond=float(cond))
        z = np.linalg.solve(square, rhs[sel])
        for j, b in enumerate(unknown):
            solved[b] = z[j]
    parts = []
    for b in range(delta):
        h = len(ranges[b])
        vec = known[b] if b in known else solved[b]
        parts.append(np.asarray(vec)[:h])
    return np.concatenate(parts)


def numeric_decode(plan: AssignmentPlan, A, x, received) -> np.ndarray:
    """End-to-end check: compute the products the completed tasks would
    transmit, then reconstruct A @ x from those products alone.

    ``received`` is an iterable of (worker, position) pairs.
    """
    A = np.asarray(A, dtype=float)
    pairs = []
    seen = set()
    for i, k in received:
        if not 0 <= i < plan.n or not 0 <= k < plan.ell:
            raise ValueError(f"received task ({i}, {k}) outside the plan")
        if (i, k) not in seen:
            seen.add((i, k))
            pairs.append((i, k))
    prods = _block_products(plan, A, x, pairs)
    return decode_from_products(
        plan, A.shape[0], [(i, k, prods[(i, k)]) for i, k in pairs]
    )


def state_received(plan: AssignmentPlan, state: Sequence) -> list:
    """(worker, position) pairs a prefix state corresponds to."""
    out = []
    for i, w in enumerate(state):
        out.extend((i, k) for k in range(int(w)))
    return out
