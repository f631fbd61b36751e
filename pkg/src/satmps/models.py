"""Classical statistical models of the entanglement barrier.

Everything here is closed-form or cheap stochastics: the Poisson model of
random combinatorial states, the degree-distribution Markov chain behind
the reservoir entropy curve, the per-row solution-count model with its
redundancy corrections, the critical clause densities, the grouped
violation entropy, and the Schmidt-value slope constants.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, lgamma, log

import numpy as np
from scipy import optimize

LN2 = math.log(2)


# -- Poisson model of random combinatorial states ----------------------------


@dataclass(frozen=True)
class DiagonalModelParams:
    """n sites at filling fraction f: the state has 2^(f n) unit amplitudes."""

    n: int
    f: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.f <= 1.0:
            raise ValueError("filling fraction must be in [0, 1]")

    @property
    def lam(self) -> float:
        """Expected ones per row of the half-cut amplitude matrix."""
        return 2.0 ** ((self.f - 0.5) * self.n)


def _poisson_mean_neg_log1p(lam: float) -> float:
    """E[-ln(X+1)] for X ~ Poisson(lam), to machine precision.

    Series summation while exp(-lam) is representable; Gauss-Hermite
    quadrature against the normal approximation for larger lam, where the
    integrand is smooth and the approximation error is O(1/lam^2).
    """
    if lam == 0.0:
        return 0.0
    if lam > 300.0:
        nodes, weights = np.polynomial.hermite_e.hermegauss(101)
        x = np.maximum(lam + math.sqrt(lam) * nodes, 0.0)
        return float(np.sum(weights * (-np.log1p(x))) / math.sqrt(2 * math.pi))
    total = 0.0
    pk = math.exp(-lam)
    k = 0
    limit = int(10 * lam + 80)
    while k <= limit:
        term = pk * (-math.log(k + 1))
        total += term
        k += 1
        pk *= lam / k
    return total


def diagonal_model_entropy(params: DiagonalModelParams) -> dict:
    """Mean and bounds of the half-chain entropy of a random combinatorial state.

    mean = ln F + E[-ln(X+1)], X ~ Poisson(2^((f-1/2)n)); the lower bound
    is Jensen's bound ln F - ln(1 + lam), the upper bound min(ln F, n/2 ln 2).
    Degenerate fillings (F <= 1) give exact zeros.
    """
    n, f = params.n, params.f
    log_f_count = f * n * LN2
    if log_f_count <= 0.0:
        return {"mean": 0.0, "lower": 0.0, "upper": 0.0}
    lam = params.lam
    mean = log_f_count + _poisson_mean_neg_log1p(lam)
    lower = max(0.0, log_f_count - math.log1p(lam))
    upper = min(log_f_count, n / 2 * LN2)
    return {"mean": mean, "lower": lower, "upper": upper}


def sample_combinatorial_entropy(
    n: int, f: float, num_samples: int, seed: int
) -> np.ndarray:
    """Half-chain entropies of sampled random combinatorial states (dense SVD)."""
    rng = np.random.default_rng(seed)
    count = max(int(round(2.0 ** (f * n))), 1)
    out = np.empty(num_samples)
    for i in range(num_samples):
        idx = rng.choice(1 << n, size=count, replace=False)
        state = np.zeros(1 << n)
        state[idx] = 1.0 / math.sqrt(count)
        svals = np.linalg.svd(state.reshape(1 << (n // 2), -1), compute_uv=False)
        p = svals[svals > 1e-14] ** 2
        out[i] = max(0.0, float(-(p * np.log(p)).sum()))
    return out


# -- entanglement reservoir --------------------------------------------------


def reservoir_dimension(n: int, m: int) -> float:
    """Effective half-system dimension after m clauses: (7/8)^(m/2) sqrt(2^n)."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    return (7 / 8) ** (m / 2) * 2.0 ** (n / 2)


def reservoir_log_dim(n: int, m: float) -> float:
    return 0.5 * (n * LN2 + m * math.log(7 / 8))


def alpha_sharp() -> float:
    """Clause density at which the reservoir reaches half filling."""
    return (LN2 / 2) / math.log(8 / 7)


# -- degree-distribution Markov chain -----------------------------------------


@dataclass
class DegreeDistribution:
    """Expected node counts per degree of the entanglement graph.

    2n nodes (a variable and its negation each get one), at most
    E = 2n - 2 edges per node. Counts are real-valued expected values.
    """

    n: int
    counts: np.ndarray

    @classmethod
    def initial(cls, n: int) -> "DegreeDistribution":
        counts = np.zeros(2 * n - 1)
        counts[0] = 2 * n
        return cls(n, counts)

    @property
    def max_degree(self) -> int:
        return 2 * self.n - 2

    def degree_sum(self) -> float:
        return float((np.arange(self.counts.size) * self.counts).sum())

    def active_edges(self) -> float:
        return self.degree_sum() / 2.0


def markov_degree_step(dist: DegreeDistribution) -> DegreeDistribution:
    """One clause's expected effect on the degree distribution.

    Each node is selected with probability 3/(2n). A selected node of
    degree d gains two new edges with weight dtilde (dtilde - 1), one with
    weight 2 d dtilde, none with weight d (d - 1), where dtilde = E - d is
    its count of still-absent edges. Fully saturated nodes stay put.
    """
    n = dist.n
    e_max = dist.max_degree
    d = np.arange(e_max + 1, dtype=float)
    dt = e_max - d
    gain0 = np.maximum(0.0, d * (d - 1))
    gain1 = np.maximum(0.0, 2 * d * dt)
    gain2 = np.maximum(0.0, dt * (dt - 1))
    total = gain0 + gain1 + gain2
    stuck = total == 0
    total[stuck] = 1.0
    p_gain = np.stack([gain0, gain1, gain2]) / total
    p_gain[0, stuck] = 1.0  # degenerate saturation: mass stays at d

    p_select = 3.0 / (2 * n)
    new = (1.0 - p_select) * dist.counts
    for gain in range(3):
        moved = p_select * p_gain[gain] * dist.counts
        if gain == 0:
            new += moved
        else:
            new[gain:] += moved[:-gain]
    return DegreeDistribution(n, new)


def triangle_correction(n: int, n_active: float, m: int) -> float:
    """Collision discount for clauses that cancel each other's entangling effect.

    n_active counts active edges; A = n_active / 3 is the number of drawn
    triangles, N = t_tot / 2 the number of collision slots among the
    8 C(n,3) possible clauses. Returns N! / ((N-A)! N^m) via log-gamma.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    slots = 8 * n * (n - 1) * (n - 2) / 6 / 2
    triangles = n_active / 3.0
    if triangles > slots:
        raise ValueError(f"{triangles} triangles exceed the {slots} available slots")
    log_f = lgamma(slots + 1) - lgamma(slots - triangles + 1) - m * math.log(slots)
    return math.exp(min(0.0, log_f))


@dataclass(frozen=True)
class ReservoirState:
    """One point of the model entropy curve."""

    m: int
    correlations: float
    log_dim: float
    entropy: float


def model_entropy_curve(n: int, m_max: int) -> list[ReservoirState]:
    """Predicted half-chain entropy after each clause, S_m = C_m ln dim L_m.

    C_m combines the chain's active-edge count (normalized per node), the
    fraction of node pairs crossing an even bipartition, and the triangle
    collision discount evaluated at the drawn-triangle count m. Feeding the
    chain's saturated edge count into the collision factor instead would
    make it collapse exponentially; see the model notes in the README.
    """
    if n % 2 != 0:
        raise ValueError("the bipartition model assumes even n")
    dist = DegreeDistribution.initial(n)
    out = [ReservoirState(0, 0.0, reservoir_log_dim(n, 0), 0.0)]
    for m in range(1, m_max + 1):
        dist = markov_degree_step(dist)
        collision = triangle_correction(n, 3.0 * m, m)
        # distinct entangling clauses still present in the graph: the chain
        # supplies saturation (degree sum / 6 <= m), the collision factor
        # removes polarity-cancelling duplicates
        effective_clauses = dist.degree_sum() / 6.0 * collision
        correlations = effective_clauses / (2 * n)
        log_dim = max(0.0, reservoir_log_dim(n, m))
        out.append(ReservoirState(m, correlations, log_dim, correlations * log_dim))
    return out


def refined_peak(grid: np.ndarray, values: np.ndarray, window: int = 3) -> tuple[float, float]:
    """Quadratic-refined (location, height) of a curve's maximum.

    Discrete argmax plus a parabola fit over +-window grid points;
    stabilizes peak locations of flat-topped curves.
    """
    i = int(np.argmax(values))
    lo, hi = max(0, i - window), min(len(grid), i + window + 1)
    x, y = np.asarray(grid[lo:hi], dtype=float), values[lo:hi]
    if x.size < 3:
        return float(grid[i]), float(values[i])
    coeffs = np.polyfit(x, y, 2)
    if coeffs[0] >= 0:
        return float(grid[i]), float(values[i])
    x_peak = -coeffs[1] / (2 * coeffs[0])
    x_peak = min(max(x_peak, x[0]), x[-1])
    return float(x_peak), float(np.polyval(coeffs, x_peak))


def model_entropy_peak(n: int, m_max: int | None = None) -> tuple[float, float]:
    """(alpha_hat, S_hat) of the model curve for one system size."""
    m_max = m_max or int(math.ceil(5.3 * n))
    curve = model_entropy_curve(n, m_max)
    grid = np.array([r.m for r in curve], dtype=float)
    values = np.array([r.entropy for r in curve])
    m_peak, height = refined_peak(grid, values)
    return m_peak / n, height


# -- per-row solution-count model (stochastic groups) -------------------------


@dataclass(frozen=True)
class RowModelConfig:
    """Monte-Carlo setup for the per-row solution-count process."""

    n: int
    m: int
    samples: int = 4000
    corrections: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n % 2 != 0:
            raise ValueError("the row model assumes even n")


@dataclass
class RowModelResult:
    """Per-sample log solution counts with vanish flags.

    log_omega carries the accumulated shrinking factors of each row
    regardless of vanishing; vanished marks rows whose count hit zero
    (a fully-in-row clause bound, or a redundancy correction). The
    unconditioned mean follows the accumulated process, the conditioned
    mean averages the survivors only.
    """

    log_omega: np.ndarray
    vanished: np.ndarray

    @property
    def mean_log(self) -> float:
        return float(self.log_omega.mean())

    @property
    def std_log(self) -> float:
        return float(self.log_omega.std(ddof=1))

    @property
    def mean_log_surviving(self) -> float:
        kept = self.log_omega[~self.vanished]
        return float(kept.mean()) if kept.size else math.nan

    @property
    def std_log_surviving(self) -> float:
        kept = self.log_omega[~self.vanished]
        return float(kept.std(ddof=1)) if kept.size > 1 else math.nan

    @property
    def survival_fraction(self) -> float:
        return float(1.0 - self.vanished.mean())


ROW_SHRINK = np.array([1 - 2.0 ** (i - 3) for i in range(4)])  # f_i, f_3 = 0
ROW_BIND = np.array([2.0 ** (-i) for i in range(4)])  # q_i


def row_model_simulate(config: RowModelConfig) -> RowModelResult:
    """Simulate the per-row surviving-solution process, clause by clause.

    Per clause, i of its three variables land in the row half
    (hypergeometric); with probability q_i = 2^-i the row fails to satisfy
    the clause through its own variables and the clause binds, shrinking
    the completions by f_i = 1 - 2^(i-3) (i = 3 annihilates the row).

    With corrections enabled, collisions with earlier clauses matching the
    same variable pattern are handled per case: a duplicate leaves the row
    unaffected, an opposite-polarity twin annihilates it, and previously
    seen column variables promote i upward. Each collision fires with
    probability 1 - (1 - n_case / N)^(c-1) at clause age c, with
    N = 2n (2n-2) (2n-4).
    """
    rng = np.random.default_rng(config.seed)
    n, m, k = config.n, config.m, config.samples
    half = n // 2
    log_omega = np.full(k, half * LN2)
    vanished = np.zeros(k, dtype=bool)
    big_n = 2 * n * (2 * n - 2) * (2 * n - 4)
    n_cases = {
        "row_pair": 3 * half * (half - 1),
        "col_pair": 6 * half,
        "col_single_of_two": 3 * half * 2 * (half - 1),
        "col_triple": 6,
        "col_two_of_three": 6 * 2 * (half - 1),
        "col_one_of_three": 3 * 2 * (half - 1) * 2 * (half - 2),
    }

    for age in range(1, m + 1):
        i = rng.hypergeometric(half, half, 3, size=k)
        binds = rng.random(k) < ROW_BIND[i]
        if config.corrections and age > 1:
            collide = {
                name: 1.0 - (1.0 - cnt / big_n) ** (age - 1)
                for name, cnt in n_cases.items()
            }
            # i = 2: same row pair seen before; duplicate or opposite twin
            sel = binds & (i == 2)
            dup = sel & (rng.random(k) < collide["row_pair"])
            twin = sel & ~dup & (rng.random(k) < collide["row_pair"])
            binds &= ~dup
            vanished |= twin
            binds &= ~twin
            # i = 1: both column variables seen, or one of them (roll twice)
            sel = binds & (i == 1)
            dup = sel & (rng.random(k) < collide["col_pair"])
            binds &= ~dup
            sel &= ~dup
            for _ in range(2):
                promote = sel & (rng.random(k) < collide["col_single_of_two"])
                i = i + promote
            # i = 0: full-column triple seen, two of three, or one of three
            sel = binds & (i == 0)
            dup = sel & (rng.random(k) < collide["col_triple"])
            binds &= ~dup
            sel &= ~dup
            for _ in range(3):
                promote = sel & (rng.random(k) < collide["col_two_of_three"])
                i = i + promote
            for _ in range(3):
                promote = sel & (rng.random(k) < collide["col_one_of_three"])
                i = i + 2 * promote
        i = np.minimum(i, 3)
        hit3 = binds & (i == 3)
        vanished |= hit3
        shrink = binds & (i < 3)
        log_omega = log_omega + np.where(shrink, np.log(ROW_SHRINK[np.minimum(i, 2)]), 0.0)
    return RowModelResult(log_omega, vanished)


def row_model_pi(n: int | None, k: int = 3) -> np.ndarray:
    """Probabilities that i of a clause's k variables land in the row half.

    Finite n gives the exact hypergeometric values; n = None the binomial
    large-n limit used by the closed forms.
    """
    if n is None:
        return np.array([comb(k, i) / 2.0**k for i in range(k + 1)])
    half = n // 2
    total = comb(n, k)
    return np.array([comb(half, i) * comb(half, k - i) / total for i in range(k + 1)])


def row_model_mean_log(n: int, m: int, p_mode: str = "binomial") -> float:
    """Closed-form unconditioned mean: (n/2) ln 2 + m sum_i q_i p_i ln f_i."""
    p = row_model_pi(None if p_mode == "binomial" else n)
    drift = sum(ROW_BIND[i] * p[i] * math.log(ROW_SHRINK[i]) for i in range(3))
    return n / 2 * LN2 + m * drift


def critical_alpha_star(k: int = 3) -> float:
    """Clause density where the typical per-row log count crosses zero."""
    if k < 2:
        raise ValueError("need k >= 2")
    p = [comb(k, i) / 2.0**k for i in range(k)]
    q = [2.0 ** (-i) for i in range(k)]
    f = [1 - 2.0 ** (i - k) for i in range(k)]
    drift = sum(q[i] * p[i] * math.log(f[i]) for i in range(k))
    return -LN2 / (2 * drift)


def empirical_row_stats(instance, prefix_m: int) -> dict:
    """Per-row solution statistics of a concrete instance prefix.

    Rows are assignments of the first n/2 variables; for each the number
    of satisfying completions is counted exactly. Returns the mean log
    count over non-empty rows, the log of the mean count over all rows,
    and the non-empty fraction.
    """
    from .cnf import satisfying_mask

    n = instance.n
    mask = satisfying_mask(instance.prefix(prefix_m))
    per_row = mask.reshape(1 << (n // 2), -1).sum(axis=1)
    nonzero = per_row[per_row > 0]
    return {
        "mean_log_surviving": float(np.log(nonzero).mean()) if nonzero.size else math.nan,
        "std_log_surviving": float(np.log(nonzero).std(ddof=1)) if nonzero.size > 1 else math.nan,
        "log_mean_count": float(math.log(per_row.mean())) if per_row.mean() > 0 else -math.inf,
        "survival_fraction": float((per_row > 0).mean()),
    }


# -- grouped violation entropy (imaginary-time bump location model) ----------


def grouped_violation_entropy(n: int, m: int, tau: float) -> float:
    """Entropy of violation-count groups under imaginary-time weighting.

    Groups of basis states with v violations carry weight proportional to
    Binomial(m, 1/8)(v) exp(-v tau); returns the Shannon entropy of the
    normalized weights. Independent of n, which is accepted for interface
    symmetry with the other models.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    del n
    v = np.arange(m + 1)
    log_pmf = (
        np.array([lgamma(m + 1) - lgamma(k + 1) - lgamma(m - k + 1) for k in v])
        + v * math.log(1 / 8)
        + (m - v) * math.log(7 / 8)
    )
    log_w = log_pmf - v * tau
    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    w = w[w > 0]
    return max(0.0, float(-(w * np.log(w)).sum()))


def find_tau_hat(n: int, m: int) -> float:
    """Location of the grouped-violation entropy maximum on [1e-3, 1e3].

    Coarse log-grid bracketing followed by golden-section refinement.
    Note: the weights are an exponential tilt of a binomial, whose entropy
    is monotone decreasing in tau, so the maximizer sits at the lower
    bracket edge for every m >= 1; see the model notes in the README.
    """
    grid = np.logspace(-3, 3, 121)
    values = np.array([grouped_violation_entropy(n, m, t) for t in grid])
    i = int(np.argmax(values))
    lo = grid[max(0, i - 1)]
    hi = grid[min(len(grid) - 1, i + 1)]
    phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc = grouped_violation_entropy(n, m, c)
    fd = grouped_violation_entropy(n, m, d)
    while b - a > 1e-6:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = grouped_violation_entropy(n, m, c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = grouped_violation_entropy(n, m, d)
    return float((a + b) / 2)


# -- Schmidt-value slope constants --------------------------------------------


def initial_schmidt_constants() -> dict:
    """Schmidt pair created by removing one basis state from a product state.

    The closed forms A = sqrt((7 - sqrt 37)/2), B = sqrt((7 + sqrt 37)/2)
    follow from the 2x2 singular value problem of the ansatz; the rotation
    angles are solved numerically and returned with the residual of the
    four coefficient equations.
    """
    root = math.sqrt(37.0)
    a_val = math.sqrt((7 - root) / 2)
    b_val = math.sqrt((7 + root) / 2)

    def equations(angles):
        theta, alpha = angles
        ct, st_ = math.cos(theta), math.sin(theta)
        ca, sa = math.cos(alpha), math.sin(alpha)
        return [
            a_val * ct * ca + b_val * st_ * sa - math.sqrt(3),
            a_val * st_ * ca - b_val * ct * sa - math.sqrt(3),
            a_val * ct * sa - b_val * st_ * ca,
            a_val * st_ * sa + b_val * ct * ca - 1,
        ]

    solution = optimize.least_squares(equations, x0=(0.8, -0.3), xtol=1e-15, ftol=1e-15)
    residual = float(np.max(np.abs(equations(solution.x))))
    return {
        "A": a_val,
        "B": b_val,
        "theta": float(solution.x[0]),
        "angle": float(solution.x[1]),
        "residual": residual,
    }


def initial_schmidt_slope(n: int, cut: int) -> float:
    """Early-protocol slope of the mean log squared Schmidt value.

    A clause entirely inside one half only rescales the norm by 7/8; a
    straddling clause creates a Schmidt pair with the weights above.
    """
    if not 1 <= cut <= n - 1:
        raise ValueError("cut must be an interior bond")
    left, right = cut, n - cut
    p_inside = (
        left * (left - 1) * (left - 2) + right * (right - 1) * (right - 2)
    ) / (n * (n - 1) * (n - 2))
    consts = initial_schmidt_constants()
    a_sq, b_sq = consts["A"] ** 2, consts["B"] ** 2
    return (
        p_inside * math.log(7 / 8)
        + (1 - p_inside) * (math.log(a_sq / 8) + math.log(b_sq / 8))
    ) / (p_inside + 2 * (1 - p_inside))


def late_slope(p: float, q: float) -> float:
    """Late-protocol slope of log Schmidt values: (1 - p) ln sqrt(q)."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    if not 0 < q <= 1:
        raise ValueError("q must be in (0, 1]")
    return (1 - p) * math.log(math.sqrt(q))


def violation_counts_estimate(n: int, m: int) -> dict:
    """Expected per-row counts of zero- and one-violation completions."""
    n0 = math.sqrt(2.0**n) * (7 / 8) ** m
    return {"n0": n0, "n1": m / 7 * n0}
