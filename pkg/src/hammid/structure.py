"""Structure identification: delays, nonlinearity degree, dynamic orders.

Delays come from a residual-loss scan: the numerator block of one input is
slid to later and later starting lags, and the delay is the largest start
that costs nothing — exactly the number of leading zero numerator taps the
data supports.  Degree p and the orders (n, m) are then chosen by recursive
column augmentation: growing one order appends columns to the regressor, so
each augmented solution is obtained from the previous one by a correction
that inverts only the small Schur complement of the new columns.  The sweep
stops where the loss J = ||y - H theta||^2 / rows no longer improves
noticeably (relative plateau threshold) or has reached the data's numerical
noise floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .estimate import (
    ChannelOrders,
    RegressionProblem,
    StructureOrders,
    build_regressor,
)
from .model import Dataset

DEFAULT_PLATEAU_THRESHOLD = 0.02
DEFAULT_CONVERGENCE_FLOOR = 3e-6
_EXACT_FIT_FLOOR = 1e-12  # relative to output power: treat as a perfect fit
_DELAY_JUMP_TOL = 0.2


class AugmentationError(ValueError):
    """Appended columns are (numerically) in the span of the existing ones."""


def loss_J(prob: RegressionProblem, theta) -> float:
    """Normalized residual power ||y - H theta||^2 / rows."""
    r = prob.y - prob.H @ np.asarray(theta, dtype=float)
    return float(r @ r) / prob.n_rows


def augment_columns(
    prob: RegressionProblem, theta_hat, new_cols
) -> tuple[np.ndarray, float]:
    """Least-squares solution after appending columns, via the partitioned update.

    Given the solution ``theta_hat`` of ``prob``, the augmented problem
    [H  H2] is solved by correcting theta_hat with the residual projected
    through the Schur complement S = H2'H2 - H2'H (H'H)^-1 H'H2, so only the
    small S is inverted.  Returns (theta_full, J_new); theta_full stacks the
    corrected old coefficients and the new-column coefficients.
    """
    H, y = prob.H, prob.y
    H2 = np.asarray(new_cols, dtype=float)
    if H2.ndim == 1:
        H2 = H2.reshape(-1, 1)
    if H2.shape[0] != H.shape[0]:
        raise ValueError(f"new columns have {H2.shape[0]} rows, expected {H.shape[0]}")
    theta_hat = np.asarray(theta_hat, dtype=float)
    Q, R = np.linalg.qr(H)
    r_diag = np.abs(np.diag(R))
    if r_diag.size and r_diag.min() <= 1e-12 * max(r_diag.max(), 1e-300):
        raise AugmentationError("base regressor is numerically rank deficient")
    G = Q.T @ H2
    gram2 = H2.T @ H2
    S = gram2 - G.T @ G
    S = 0.5 * (S + S.T)
    sv = np.linalg.svd(S, compute_uv=False)
    # singular relative to the appended columns' own scale, so that appending
    # a column already in the span (S ~ round-off) is caught
    scale2 = np.linalg.norm(gram2)
    if sv[-1] <= 1e-10 * max(scale2, 1e-300):
        raise AugmentationError(
            "Schur complement of the appended columns is numerically singular"
        )
    resid0 = y - H @ theta_hat
    theta2 = np.linalg.solve(S, H2.T @ resid0)
    theta1 = theta_hat - scipy.linalg.solve_triangular(R, G @ theta2)
    theta_full = np.concatenate([theta1, theta2])
    r = y - H @ theta1 - H2 @ theta2
    J_new = float(r @ r) / len(y)
    return theta_full, J_new


# ---------------------------------------------------------------------------
# Delay estimation

@dataclass(frozen=True)
class DelayEstimate:
    """Estimated delay with the loss profile behind it.

    ``low_confidence`` is set when even the best input/output correlation
    stays below the 2/sqrt(N) significance bound, i.e. the output shows no
    detectable response to this input.
    """

    delay: int
    losses: np.ndarray  # J at each candidate starting lag 0..max_lag
    peak_correlation: float
    significance_bound: float

    @property
    def low_confidence(self) -> bool:
        return self.peak_correlation < self.significance_bound

    def __int__(self) -> int:
        return self.delay


def _cross_correlation_peak(u: np.ndarray, y: np.ndarray, max_lag: int) -> float:
    u0 = u - u.mean()
    y0 = y - y.mean()
    denom = float(np.sqrt((u0 @ u0) * (y0 @ y0)))
    if denom == 0:
        raise ValueError("constant series: cross-correlation undefined")
    peak = 0.0
    for lag in range(max_lag + 1):
        c = float(u0[: len(u0) - lag] @ y0[lag:]) / denom
        peak = max(peak, abs(c))
    return peak


def _delay_scan_regressor(U, y, scan_input, d, n_fit, p_fit, span, start):
    N = len(y)
    cols = [-y[start - i:N - i] for i in range(1, n_fit + 1)]
    for j in range(U.shape[1]):
        first = d if j == scan_input else 0
        for power in range(1, p_fit + 1):
            up = U[:, j] ** power
            for lag in range(first, span + 1):
                cols.append(up[start - lag:N - lag])
    return np.column_stack(cols), y[start:N]


def estimate_delays(
    inputs,
    y,
    max_lag: int,
    n_fit: int = 8,
    p_fit: int = 4,
    pad: int = 8,
) -> list[DelayEstimate]:
    """Estimate the input-output delay of every input against one output.

    For each input, lagged-power blocks of all inputs plus lagged outputs
    are regressed on y while the scanned input's block starts at candidate
    lag d = 0, 1, ...; the loss stays at its minimum for every d up to the
    true delay (those leading taps are genuinely zero) and jumps beyond it.
    The estimate is the largest candidate before the jump.
    """
    U = np.asarray(inputs, dtype=float)
    if U.ndim == 1:
        U = U.reshape(-1, 1)
    y = np.asarray(y, dtype=float)
    if len(y) != U.shape[0]:
        raise ValueError(f"series lengths differ: {U.shape[0]} vs {len(y)}")
    if max_lag < 0 or max_lag >= len(y) // 4:
        raise ValueError(f"max_lag must lie in [0, N/4), got {max_lag}")
    if np.ptp(y) == 0:
        raise ValueError("constant output series")
    span = max_lag + pad
    start = max(n_fit, span)
    n_cols = n_fit + U.shape[1] * p_fit * (span + 1)
    if len(y) - start <= n_cols:
        raise ValueError(
            f"series of length {len(y)} too short for the delay scan "
            f"({n_cols} regressors from row {start})"
        )
    floor = _EXACT_FIT_FLOOR * float(np.mean(y[start:] ** 2))
    results = []
    for j in range(U.shape[1]):
        if np.ptp(U[:, j]) == 0:
            raise ValueError(f"constant input series {j}")
        losses = np.empty(max_lag + 1)
        for d in range(max_lag + 1):
            H, yv = _delay_scan_regressor(U, y, j, d, n_fit, p_fit, span, start)
            theta, *_ = np.linalg.lstsq(H, yv, rcond=None)
            r = yv - H @ theta
            losses[d] = float(r @ r) / len(yv)
        bound = max(losses[0] * (1.0 + _DELAY_JUMP_TOL), floor)
        delay = 0
        for d in range(max_lag + 1):
            if losses[d] <= bound:
                delay = d
            else:
                break
        peak = _cross_correlation_peak(U[:, j], y, max_lag)
        results.append(
            DelayEstimate(
                delay=delay,
                losses=losses,
                peak_correlation=peak,
                significance_bound=2.0 / np.sqrt(len(y)),
            )
        )
    return results


def estimate_delay(u, y, max_lag: int, **kwargs) -> DelayEstimate:
    """Single-input version of :func:`estimate_delays`."""
    return estimate_delays(np.asarray(u, dtype=float).reshape(-1, 1), y, max_lag, **kwargs)[0]


# ---------------------------------------------------------------------------
# Order selection

@dataclass(frozen=True)
class SearchBounds:
    n_max: int
    m_max: int
    p_max: int

    def __post_init__(self):
        if min(self.n_max, self.m_max, self.p_max) < 1:
            raise ValueError("all search bounds must be >= 1")


@dataclass(frozen=True)
class Candidate:
    """One evaluated order combination.

    ``theta`` is laid out in augmentation order (the base problem's columns
    followed by each appended block), not the canonical regressor order.
    """

    stage: str  # "p", "n" or "m"
    orders: StructureOrders
    loss: float
    theta: np.ndarray


@dataclass(frozen=True)
class StructureSearchResult:
    candidates: tuple[Candidate, ...]
    selected: StructureOrders
    plateau_threshold: float
    convergence_floor: float


class _Chain:
    """Augmentation chain: running LS solution along a nested column sequence.

    Falls back to a direct minimum-norm solve when an augmentation step is
    singular (the appended columns add nothing new, e.g. past an exact fit
    on noiseless data).
    """

    def __init__(self, H: np.ndarray, y: np.ndarray):
        self.H = H
        self.y = y
        self.theta, self.J = self._direct(H, y)

    @staticmethod
    def _direct(H, y):
        theta, *_ = np.linalg.lstsq(H, y, rcond=None)
        r = y - H @ theta
        return theta, float(r @ r) / len(y)

    def append(self, new_cols: np.ndarray):
        prob = RegressionProblem(H=self.H, y=self.y, column_map=())
        try:
            theta, J = augment_columns(prob, self.theta, new_cols)
        except AugmentationError:
            theta, J = None, np.inf
        self.H = np.hstack([self.H, new_cols])
        if theta is None or J > self.J * (1 + 1e-9) + 1e-300:
            theta, J = self._direct(self.H, self.y)
        self.theta, self.J = theta, J


def _uniform_orders(n: int, m: int, p: int, delays) -> StructureOrders:
    return StructureOrders(
        n=n, channels=tuple(ChannelOrders(p=p, m=m, d=d) for d in delays)
    )


def select_structure(
    data: Dataset,
    output: int,
    delays,
    bounds: SearchBounds,
    plateau_threshold: float = DEFAULT_PLATEAU_THRESHOLD,
    convergence_floor: float = DEFAULT_CONVERGENCE_FLOOR,
) -> StructureSearchResult:
    """Choose (n, m, p) for one output by recursive augmentation sweeps.

    All candidates share the row window implied by the search bounds so
    their losses are comparable.  Sweep order: degree p first (at the full
    dynamic orders), then n (at full m), then m.  Each sweep stops at the
    smallest order whose successor improves J by less than the plateau
    threshold, or whose J is already below the convergence floor (relative
    to output power) — the stopping rule for noise-free data, where J keeps
    shrinking by large factors all the way down to round-off.
    """
    delays = [int(d) for d in delays]
    if len(delays) != data.n_inputs:
        raise ValueError(f"need one delay per input, got {len(delays)}")
    start = max(bounds.n_max, max(delays) + bounds.m_max)
    max_cols = bounds.n_max + data.n_inputs * bounds.p_max * (bounds.m_max + 1)
    if data.n_samples - start <= max_cols:
        raise ValueError(
            f"dataset of length {data.n_samples} too short for bounds needing "
            f"{max_cols} regressors from row {start}"
        )
    floor = convergence_floor * float(np.mean(data.outputs[start:, output] ** 2))
    candidates: list[Candidate] = []
    y = data.outputs[:, output]
    N = data.n_samples

    def problem(n, m, p):
        return build_regressor(data, _uniform_orders(n, m, p, delays), output, start=start)

    def swept(stage, values, base, increment, orders_at):
        """Walk the order values along one chain; return the selected one."""
        chain = _Chain(base.H, base.y)
        selected = values[0]
        candidates.append(Candidate(stage, orders_at(selected), chain.J, chain.theta))
        prev = chain.J
        if prev <= floor:
            return selected
        for value in values[1:]:
            chain.append(increment(value))
            candidates.append(Candidate(stage, orders_at(value), chain.J, chain.theta))
            if prev > 0 and (prev - chain.J) / prev < plateau_threshold:
                return selected
            selected = value
            prev = chain.J
            if prev <= floor:
                return selected
        return selected

    def power_block(p):
        cols = []
        for j in range(data.n_inputs):
            up = data.inputs[:, j] ** p
            for l in range(bounds.m_max + 1):
                lag = delays[j] + l
                cols.append(up[start - lag:N - lag])
        return np.column_stack(cols)

    p_hat = swept(
        "p",
        list(range(1, bounds.p_max + 1)),
        problem(bounds.n_max, bounds.m_max, 1),
        power_block,
        lambda p: _uniform_orders(bounds.n_max, bounds.m_max, p, delays),
    )

    n_hat = swept(
        "n",
        list(range(1, bounds.n_max + 1)),
        problem(1, bounds.m_max, p_hat),
        lambda n: (-y[start - n:N - n]).reshape(-1, 1),
        lambda n: _uniform_orders(n, bounds.m_max, p_hat, delays),
    )

    def m_block(m):
        cols = []
        for j in range(data.n_inputs):
            for power in range(1, p_hat + 1):
                up = data.inputs[:, j] ** power
                lag = delays[j] + m
                cols.append(up[start - lag:N - lag])
        return np.column_stack(cols)

    m_hat = swept(
        "m",
        list(range(0, bounds.m_max + 1)),
        problem(n_hat, 0, p_hat),
        m_block,
        lambda m: _uniform_orders(n_hat, m, p_hat, delays),
    )

    return StructureSearchResult(
        candidates=tuple(candidates),
        selected=_uniform_orders(n_hat, m_hat, p_hat, delays),
        plateau_threshold=plateau_threshold,
        convergence_floor=convergence_floor,
    )


def format_search_report(result: StructureSearchResult, output_name: str = "") -> str:
    """Plain-text table of every candidate: orders, loss, relative improvement."""
    lines = []
    lines.append(f"structure search{f' for {output_name}' if output_name else ''}")
    lines.append(
        f"plateau threshold {result.plateau_threshold:g}, "
        f"convergence floor {result.convergence_floor:g} (relative)"
    )
    lines.append(f"{'stage':>5} {'n':>3} {'m':>3} {'p':>3} {'J':>14} {'improvement':>12}")
    prev_loss = None
    prev_stage = None
    for c in result.candidates:
        ch = c.orders.channels[0]
        same_stage = c.stage == prev_stage
        impr = (
            f"{(prev_loss - c.loss) / prev_loss:.4f}"
            if same_stage and prev_loss and prev_loss > 0
            else "-"
        )
        lines.append(
            f"{c.stage:>5} {c.orders.n:>3} {ch.m:>3} {ch.p:>3} {c.loss:>14.6e} {impr:>12}"
        )
        prev_loss, prev_stage = c.loss, c.stage
    sel = result.selected
    d_str = ",".join(str(ch.d) for ch in sel.channels)
    lines.append(
        f"selected: n={sel.n} m={sel.channels[0].m} p={sel.channels[0].p} (delays {d_str})"
    )
    return "\n".join(lines) + "\n"
