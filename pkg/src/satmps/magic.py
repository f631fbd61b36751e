"""Stabilizer Renyi entropies of real states, exact and sampled.

The Pauli expectation distribution Pi(P) = <P>^2 / 2^n is evaluated three
ways: full enumeration on dense states (n <= 8), perfect sequential
sampling on an MPS (order 1), and a Metropolis chain on Pauli strings
(order 2). Real states make every odd-Y string vanish, so Y enters all
transfer contractions through the real matrix [[0, -1], [1, 0]]; its
phase only matters for the sign of <P>, never for <P>^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mps import Mps

EXACT_LIMIT = 8

PAULI_SYMBOLS = "IXYZ"

# real site matrices; Y is replaced by -iY whose square matches Y's
_SITE_MATRICES = (
    np.eye(2),
    np.array([[0.0, 1.0], [1.0, 0.0]]),
    np.array([[0.0, -1.0], [1.0, 0.0]]),
    np.diag([1.0, -1.0]),
)


def check_pauli_string(pauli: str, n: int) -> str:
    if len(pauli) != n:
        raise ValueError(f"Pauli string length {len(pauli)} does not match n={n}")
    if any(c not in PAULI_SYMBOLS for c in pauli):
        raise ValueError(f"invalid Pauli string {pauli!r}")
    return pauli


@dataclass(frozen=True)
class MagicEstimate:
    """A stabilizer entropy value with its sampling uncertainty."""

    order: int
    value: float
    stderr: float
    samples: int


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    out = v.copy()
    h = 1
    while h < out.shape[0]:
        out = out.reshape(-1, 2 * h)
        left = out[:, :h].copy()
        right = out[:, h:].copy()
        out[:, :h] = left + right
        out[:, h:] = left - right
        out = out.reshape(-1)
        h *= 2
    return out


def pauli_expectations_all(state: np.ndarray) -> np.ndarray:
    """|<X^a Z^b>| magnitudes for all 4^n Pauli strings of a real state.

    Entry [a, b] is the expectation of the string with X-part a and Z-part
    b (Y where they overlap, up to phase). Uses one Walsh-Hadamard
    transform per flip mask: <X^a Z^b> = WHT_b(psi_(x xor a) psi_x).
    """
    n = int(round(math.log2(state.shape[0])))
    if n > EXACT_LIMIT:
        raise ValueError(f"exact enumeration limited to n <= {EXACT_LIMIT}")
    size = state.shape[0]
    idx = np.arange(size)
    out = np.empty((size, size))
    for a in range(size):
        correl = state[idx ^ a] * state
        out[a] = _walsh_hadamard(correl)
    return np.abs(out)


def exact_stabilizer_entropy(state: np.ndarray, order: int) -> float:
    """M_1 or M_2 by full Pauli enumeration (n <= 8).

    Order 2 is -ln(sum <P>^4 / 2^n); order 1 is the entropic limit,
    the Shannon entropy of Pi minus n ln 2.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    n = int(round(math.log2(state.shape[0])))
    values = pauli_expectations_all(state)
    pi = values.reshape(-1) ** 2 / 2.0**n
    if order == 2:
        xi = float((values.reshape(-1) ** 4).sum() / 2.0**n)
        return -math.log(xi)
    pi = pi[pi > 0]
    return float(-(pi * np.log(pi)).sum() - n * math.log(2))


# -- perfect sampling (order 1) ---------------------------------------------


def _prepare_right_canonical(mps: Mps) -> Mps:
    work = mps.copy()
    work.move_center(0)
    return work


def sample_pauli_strings(
    mps: Mps, num_samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw Pauli strings from Pi(P) by sequential conditional sampling.

    Returns integer symbol codes (num_samples, n) indexing IXYZ and the
    log-probability ln Pi(P) of each sampled string. Conditionals are
    evaluated with batched transfer contractions against a right-canonical
    copy of the state; suffix sums close exactly by isometry.
    """
    work = _prepare_right_canonical(mps)
    rng = np.random.default_rng(seed)
    k = num_samples
    n = work.n
    codes = np.zeros((k, n), dtype=np.int8)
    logprob = np.zeros(k)
    envs = np.ones((k, 1, 1))
    # prefix marginal is 2^-k ||L_k||_F^2; the score below is half the
    # squared Frobenius norm, so conditionals telescope as
    # p(sym | prefix) = score_k / (2 * score_{k-1}) with score_0 = 1/2
    prev_score = np.full(k, 0.5)
    for site in range(n):
        tensor = work.tensors[site]
        scores = np.empty((4, k))
        cands = []
        for sym, mat in enumerate(_SITE_MATRICES):
            mixed = np.tensordot(mat, tensor, axes=([1], [1]))  # (s, l', r')
            # new_env[k, r, r'] = env[k, l, l"] A[l, s, r] mixed[s, l", r']
            half = np.einsum("klm,lsr->ksmr", envs, tensor, optimize=True)
            new_env = np.einsum("ksmr,smq->krq", half, mixed, optimize=True)
            cands.append(new_env)
            scores[sym] = 0.5 * np.einsum("krq,krq->k", new_env, new_env)
        total = scores.sum(axis=0)
        probs = (scores / total).T  # (k, 4)
        u = rng.random(k)
        cum = np.cumsum(probs, axis=1)
        chosen = np.minimum((u[:, None] > cum).sum(axis=1), 3)
        codes[:, site] = chosen
        chosen_scores = scores[chosen, np.arange(k)]
        logprob += np.log(chosen_scores) - np.log(prev_score) - math.log(2)
        prev_score = chosen_scores
        stacked = np.stack(cands)  # (4, k, r, r')
        envs = stacked[chosen, np.arange(k)]
        # renormalize environments to keep scores in float range
        scale = np.sqrt(np.einsum("krq,krq->k", envs, envs))
        scale[scale == 0] = 1.0
        envs /= scale[:, None, None]
        prev_score = prev_score / scale**2
    return codes, logprob


def sample_m1(mps: Mps, num_samples: int, seed: int) -> MagicEstimate:
    """Order-1 stabilizer entropy from perfect Pauli sampling."""
    _, logprob = sample_pauli_strings(mps, num_samples, seed)
    samples = -logprob - mps.n * math.log(2)
    value = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else 0.0
    return MagicEstimate(order=1, value=value, stderr=stderr, samples=num_samples)


# -- Metropolis chain (order 2) ----------------------------------------------


def mps_pauli_expectation(mps: Mps, codes: np.ndarray) -> float:
    """<P> of an MPS for one Pauli string (codes index IXYZ), up to the
    i^(num Y) phase; exact in magnitude, which is all the chain needs."""
    env = np.ones((1, 1))
    for site, code in enumerate(codes):
        tensor = mps.tensors[site]
        mat = _SITE_MATRICES[code]
        mixed = np.tensordot(mat, tensor, axes=([1], [1]))  # (s, l', r')
        env = np.einsum("lm,lsr,smq->rq", env, tensor, mixed, optimize=True)
    return float(env[0, 0])


def _run_m2_chain(work: Mps, chain_length: int, burn_in: int, rng) -> float:
    """One Metropolis chain; returns its Xi_2 = E_Pi[<P>^2] estimate.

    Proposals mix single-site symbol resampling, two-site resampling and
    an occasional full-string redraw. Real states give every odd-Y string
    zero weight, so single-site moves alone would conserve Y-parity
    through an impassable zero barrier and never leave the Y-free sector;
    pair moves restore irreducibility on the even-Y support, and the full
    redraw lets the chain hop between well-separated modes of
    near-classical states.
    """
    n = work.n
    codes = np.zeros(n, dtype=np.int8)  # identity string, <I> = 1
    current = 1.0
    total = 0.0
    for step in range(burn_in + chain_length):
        u = rng.random()
        if u < 0.1:
            proposal = rng.integers(4, size=n).astype(np.int8)
        elif u < 0.55 and n >= 2:
            proposal = codes.copy()
            sites = rng.choice(n, size=2, replace=False)
            proposal[sites] = rng.integers(4, size=2)
        else:
            proposal = codes.copy()
            proposal[rng.integers(n)] = rng.integers(4)
        cand = mps_pauli_expectation(work, proposal)
        if cand != 0.0 and cand**2 >= current**2 * rng.random():
            codes = proposal
            current = cand
        if step >= burn_in:
            total += current**2
    return total / chain_length


def markov_m2(
    mps: Mps,
    chain_length: int = 20000,
    burn_in: int | None = None,
    seed: int = 0,
    chains: int = 4,
) -> MagicEstimate:
    """Order-2 stabilizer entropy from Metropolis chains on Pauli strings.

    Stationary law Pi(P); the acceptance ratio is <P'>^2 / <P>^2 and every
    chain starts at the identity string, whose expectation is 1 on any
    normalized state. ``chains`` independent chains with split seeds are
    merged by their mean, and the error bar comes from the between-chain
    scatter (robust against metastability), propagated through the
    final -ln.
    """
    work = _prepare_right_canonical(mps)
    if burn_in is None:
        burn_in = 10 * work.n
    seeds = np.random.SeedSequence(seed).spawn(chains)
    estimates = np.array([
        _run_m2_chain(work, chain_length, burn_in, np.random.default_rng(s))
        for s in seeds
    ])
    xi = float(estimates.mean())
    xi_err = float(estimates.std(ddof=1) / math.sqrt(chains)) if chains > 1 else 0.0
    return MagicEstimate(
        order=2, value=-math.log(xi), stderr=xi_err / xi, samples=chains * chain_length
    )
