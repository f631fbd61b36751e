"""Matrix product state engine with diagonal clause gates.

Tensors are real arrays of shape (left_bond, 2, right_bond); site i hosts
variable i+1 and the dense reconstruction uses the same big-endian layout
as the statevector oracle. The network is kept in mixed-canonical form
with unit Frobenius norm; the physical norm lives in a separate
``log_norm`` accumulator so the projector protocol can track arbitrarily
small counting norms exactly.

Clause operators are diagonal, which keeps their MPOs at bond dimension 2
(one flag thread that remembers "all involved literals false so far") and
makes the clause-by-clause splitting of the imaginary-time propagator
exact: truncation is the only approximation anywhere in this module.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .cnf import Clause, CnfInstance


class NormUnderflowError(RuntimeError):
    """The state was annihilated by a projector (UNSAT prefix)."""


def _svd(matrix: np.ndarray):
    """SVD with a gesvd fallback for the occasional gesdd failure."""
    try:
        return np.linalg.svd(matrix, full_matrices=False)
    except np.linalg.LinAlgError:
        from scipy.linalg import svd as scipy_svd

        return scipy_svd(matrix, full_matrices=False, lapack_driver="gesvd")


def _svdvals(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(matrix, compute_uv=False)
    except np.linalg.LinAlgError:
        from scipy.linalg import svd as scipy_svd

        return scipy_svd(matrix, compute_uv=False, lapack_driver="gesvd")


@dataclass(frozen=True)
class TruncationPolicy:
    """SVD truncation controls.

    chi is the bond-dimension cap (None = unbounded), eps discards
    singular values below ``eps * ||sigma||``, and renormalize resets the
    norm accumulator after each gate (the imaginary-time protocol does,
    the counting protocol must not).
    """

    chi: int | None = 256
    eps: float = 1e-10
    renormalize: bool = True

    def __post_init__(self) -> None:
        if self.chi is not None and self.chi < 1:
            raise ValueError("chi must be >= 1 or None")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @staticmethod
    def untruncated(renormalize: bool = False) -> "TruncationPolicy":
        """Numerically exact evolution: only float noise below 1e-14 is trimmed."""
        return TruncationPolicy(chi=None, eps=1e-14, renormalize=renormalize)


class Mps:
    """Finite real-valued MPS in mixed-canonical form with norm accumulator."""

    def __init__(self, tensors: list[np.ndarray], center: int = 0, log_norm: float = 0.0):
        if not tensors:
            raise ValueError("need at least one site")
        for t in tensors:
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError(f"site tensors must be (Dl, 2, Dr), got {t.shape}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        self.tensors = tensors
        self.center = center
        self.log_norm = log_norm
        self.last_discarded = 0.0

    # -- constructors ------------------------------------------------------

    @classmethod
    def product_plus(cls, n: int) -> "Mps":
        """|+...+>: every amplitude 2^(-n/2), all bonds trivial."""
        site = np.full((1, 2, 1), 1 / math.sqrt(2))
        return cls([site.copy() for _ in range(n)])

    @classmethod
    def from_dense(cls, state: np.ndarray, trim: float = 1e-14) -> "Mps":
        """Exact MPS of a dense state by successive SVDs (small n only)."""
        n = int(round(math.log2(state.shape[0])))
        if 1 << n != state.shape[0]:
            raise ValueError("state length must be a power of two")
        nrm = float(np.linalg.norm(state))
        if nrm == 0:
            raise ValueError("cannot build an MPS from the zero vector")
        rest = (state / nrm).reshape(1, -1)
        tensors = []
        for _ in range(n - 1):
            dl = rest.shape[0]
            mat = rest.reshape(dl * 2, -1)
            u, s, vt = _svd(mat)
            keep = s > trim * np.linalg.norm(s)
            u, s, vt = u[:, keep], s[keep], vt[keep]
            tensors.append(u.reshape(dl, 2, -1))
            rest = (s[:, None] * vt)
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        mps = cls(tensors, center=n - 1, log_norm=math.log(nrm))
        mps._normalize_center()
        return mps

    # -- basic views -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        """Interior bond dimensions, one per bond 1..n-1."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def copy(self) -> "Mps":
        out = Mps([t.copy() for t in self.tensors], self.center, self.log_norm)
        out.last_discarded = self.last_discarded
        return out

    def norm_sq(self) -> float:
        """Physical squared norm (exp of twice the accumulator)."""
        return math.exp(2 * self.log_norm) if np.isfinite(self.log_norm) else 0.0

    # -- canonical form ----------------------------------------------------

    def _shift_center_right(self) -> None:
        i = self.center
        t = self.tensors[i]
        dl, _, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl * 2, dr))
        self.tensors[i] = q.reshape(dl, 2, -1)
        nxt = self.tensors[i + 1]
        self.tensors[i + 1] = (r @ nxt.reshape(nxt.shape[0], -1)).reshape(
            -1, 2, nxt.shape[2]
        )
        self.center = i + 1

    def _shift_center_left(self) -> None:
        i = self.center
        t = self.tensors[i]
        dl, _, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl, 2 * dr).T)
        self.tensors[i] = q.T.reshape(-1, 2, dr)
        self.tensors[i - 1] = self.tensors[i - 1] @ r.T
        self.center = i - 1

    def move_center(self, site: int) -> None:
        while self.center < site:
            self._shift_center_right()
        while self.center > site:
            self._shift_center_left()

    # per-gate norm factors are >= 2^(-n/2) for any state with at least one
    # surviving assignment, so anything this small is annihilation noise
    UNDERFLOW_TOL = 1e-12

    def _normalize_center(self) -> float:
        nrm = float(np.linalg.norm(self.tensors[self.center]))
        if nrm < self.UNDERFLOW_TOL:
            self.log_norm = -math.inf
            raise NormUnderflowError("state annihilated (norm underflow)")
        self.tensors[self.center] = self.tensors[self.center] / nrm
        self.log_norm += math.log(nrm)
        return nrm

    def check_canonical(self, tol: float = 1e-10) -> bool:
        for i, t in enumerate(self.tensors):
            dl, _, dr = t.shape
            if i < self.center:
                g = t.reshape(dl * 2, dr)
                if not np.allclose(g.T @ g, np.eye(dr), atol=tol):
                    return False
            elif i > self.center:
                g = t.reshape(dl, 2 * dr)
                if not np.allclose(g @ g.T, np.eye(dl), atol=tol):
                    return False
        return True

    # -- measurements ------------------------------------------------------

    def schmidt_values(self, bond: int) -> np.ndarray:
        """Schmidt values at bond (1-based: sites 1..bond vs bond+1..n)."""
        if not 1 <= bond <= self.n - 1:
            raise ValueError(f"bond must be in 1..{self.n - 1}")
        self.move_center(bond - 1)
        t = self.tensors[bond - 1]
        dl, _, dr = t.shape
        s = _svdvals(t.reshape(dl * 2, dr))
        return s[s > 1e-15]

    def bond_entropies(self) -> np.ndarray:
        """Entanglement entropy at every interior bond, one canonical sweep."""
        self.move_center(0)
        out = np.zeros(self.n - 1)
        for bond in range(1, self.n):
            t = self.tensors[bond - 1]
            dl, _, dr = t.shape
            s = _svdvals(t.reshape(dl * 2, dr))
            p = s[s > 1e-15] ** 2
            out[bond - 1] = max(0.0, float(-(p * np.log(p)).sum())) if p.size else 0.0
            if bond <= self.n - 2:
                self._shift_center_right()
        return out

    def to_dense(self, include_norm: bool = False) -> np.ndarray:
        """Full contraction to a length-2^n vector (use only at desk scale)."""
        if self.n > 24:
            raise ValueError("dense reconstruction limited to n <= 24")
        vec = self.tensors[0].reshape(2, -1)
        for t in self.tensors[1:]:
            vec = np.tensordot(vec, t, axes=([1], [0]))
            vec = vec.reshape(-1, t.shape[2])
        out = vec.reshape(-1)
        if include_norm:
            out = out * math.exp(self.log_norm)
        return out

    def amplitude(self, bits, include_norm: bool = True) -> float:
        """Amplitude of one computational basis state."""
        if len(bits) != self.n:
            raise ValueError("bit string length mismatch")
        vec = np.ones((1,))
        for t, b in zip(self.tensors, bits):
            vec = vec @ t[:, int(b), :]
        value = float(vec[0])
        return value * math.exp(self.log_norm) if include_norm else value

    def amplitudes(self, indices: np.ndarray, include_norm: bool = True) -> np.ndarray:
        """Batched amplitudes for statevector indices (big-endian layout)."""
        k = indices.shape[0]
        vecs = np.ones((k, 1))
        for site, t in enumerate(self.tensors, start=1):
            bits = (indices >> (self.n - site)) & 1
            out = np.empty((k, t.shape[2]))
            for b in (0, 1):
                sel = bits == b
                if sel.any():
                    out[sel] = vecs[sel] @ t[:, b, :]
            vecs = out
        values = vecs[:, 0]
        return values * math.exp(self.log_norm) if include_norm else values

    # -- persistence -------------------------------------------------------

    MAGIC = b"SATMPS-SNAPSHOT-1\n"

    def save(self, path) -> None:
        """Self-describing snapshot; byte-identical for identical states."""
        header = {
            "n": self.n,
            "center": self.center,
            "log_norm": float(self.log_norm).hex(),
            "shapes": [list(t.shape) for t in self.tensors],
            "dtype": "<f8",
        }
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode())
            fh.write(b"\n")
            for t in self.tensors:
                fh.write(np.ascontiguousarray(t, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "Mps":
        with open(path, "rb") as fh:
            magic = fh.read(len(cls.MAGIC))
            if magic != cls.MAGIC:
                raise ValueError("not an MPS snapshot file")
            header = json.loads(fh.readline().decode())
            tensors = []
            for shape in header["shapes"]:
                count = int(np.prod(shape))
                buf = fh.read(count * 8)
                if len(buf) != count * 8:
                    raise ValueError("truncated snapshot payload")
                tensors.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
        return cls(tensors, header["center"], float.fromhex(header["log_norm"]))


def product_plus_state(n: int) -> Mps:
    return Mps.product_plus(n)


@dataclass(frozen=True)
class ClauseOperator:
    """Diagonal gate acting on a clause's three sites.

    ``diag8[b1, b2, b3]`` is the multiplier for the involved sites' joint
    configuration (in ascending site order); ``tensors`` realize the same
    operator as a diagonal MPO over the contiguous span lo..hi with flag
    bond dimension 2. The multiplier on the unique all-false configuration
    is ``gate_value``: 0 for the projector, exp(-dtau) for the
    imaginary-time gate, 1 - dtau for the deliberately perturbed
    first-order gate.
    """

    sites: tuple[int, int, int]
    gate_value: float
    diag8: np.ndarray
    tensors: tuple[np.ndarray, ...]

    @property
    def span(self) -> tuple[int, int]:
        return self.sites[0], self.sites[2]


def clause_gate(cl: Clause, gate_value: float) -> ClauseOperator:
    lits = sorted(cl, key=lambda l: l.variable)
    sites = tuple(l.variable for l in lits)
    false_bits = [l.false_bit for l in lits]

    diag8 = np.ones((2, 2, 2))
    diag8[false_bits[0], false_bits[1], false_bits[2]] = gate_value

    lo, hi = sites[0], sites[2]
    tensors: list[np.ndarray] = []
    seen = 0
    for site in range(lo, hi + 1):
        involved = site in sites
        first = involved and seen == 0
        last = site == hi
        if first:
            fb = false_bits[0]
            w = np.zeros((1, 2, 2))
            w[0, fb, 0] = 1.0   # literal false: stay on the "maybe violating" thread
            w[0, 1 - fb, 1] = 1.0
            seen += 1
        elif involved and not last:
            fb = false_bits[seen]
            w = np.zeros((2, 2, 2))
            w[0, fb, 0] = 1.0
            w[0, 1 - fb, 1] = 1.0
            w[1, :, 1] = 1.0
            seen += 1
        elif involved and last:
            fb = false_bits[2]
            w = np.zeros((2, 2, 1))
            w[0, fb, 0] = gate_value
            w[0, 1 - fb, 0] = 1.0
            w[1, :, 0] = 1.0
            seen += 1
        else:
            w = np.zeros((2, 2, 2))
            w[0, :, 0] = 1.0
            w[1, :, 1] = 1.0
        tensors.append(w)
    return ClauseOperator(sites, gate_value, diag8, tuple(tensors))


def clause_to_mpo(cl: Clause, dtau: float) -> ClauseOperator:
    """exp(-dtau h) for the clause projector h; dtau = inf gives 1 - h."""
    if dtau < 0:
        raise ValueError("dtau must be non-negative")
    value = 0.0 if np.isinf(dtau) else math.exp(-dtau)
    return clause_gate(cl, value)


def apply_clause(mps: Mps, op: ClauseOperator, policy: TruncationPolicy) -> Mps:
    """Contract a clause gate into the state and re-truncate the span.

    Mutates and returns ``mps``. The norm change (gate plus any discarded
    truncation weight) is folded into the accumulator exactly; with
    policy.renormalize the accumulator is reset afterwards.
    """
    lo, hi = op.span
    a, b = lo - 1, hi - 1
    mps.move_center(a)

    for offset, w in enumerate(op.tensors):
        i = a + offset
        t = mps.tensors[i]
        dl, _, dr = t.shape
        wl, _, wr = w.shape
        merged = np.empty((wl * dl, 2, wr * dr))
        for s in (0, 1):
            merged[:, s, :] = np.kron(w[:, s, :], t[:, s, :])
        mps.tensors[i] = merged

    # left-orthogonalize the span, then sweep back truncating
    for i in range(a, b):
        t = mps.tensors[i]
        dl, _, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl * 2, dr))
        mps.tensors[i] = q.reshape(dl, 2, -1)
        nxt = mps.tensors[i + 1]
        mps.tensors[i + 1] = (r @ nxt.reshape(nxt.shape[0], -1)).reshape(
            -1, 2, nxt.shape[2]
        )

    discarded_max = 0.0
    for i in range(b, a, -1):
        t = mps.tensors[i]
        dl, _, dr = t.shape
        u, s, vt = _svd(t.reshape(dl, 2 * dr))
        total = float(np.linalg.norm(s))
        if total == 0.0:
            mps.center = i
            mps.log_norm = -math.inf
            raise NormUnderflowError("projector annihilated the state (UNSAT prefix)")
        keep = s > policy.eps * total
        if policy.chi is not None and keep.sum() > policy.chi:
            order = np.argsort(s)[::-1][: policy.chi]
            mask = np.zeros_like(keep)
            mask[order] = True
            keep &= mask
        if not keep.any():
            keep[0] = True
        dropped = float((s[~keep] ** 2).sum()) / total**2
        discarded_max = max(discarded_max, dropped)
        u, s, vt = u[:, keep], s[keep], vt[keep]
        mps.tensors[i] = vt.reshape(-1, 2, dr)
        mps.tensors[i - 1] = mps.tensors[i - 1] @ (u * s)
    mps.center = a
    mps._normalize_center()
    mps.last_discarded = discarded_max
    if policy.renormalize:
        mps.log_norm = 0.0
    return mps


def mpo_expectation(mps: Mps, op: ClauseOperator) -> float:
    """<psi|O|psi> / <psi|psi> for a diagonal clause operator."""
    lo, hi = op.span
    env = np.ones((1, 1, 1))  # (mpo bond, bra bond, ket bond)
    for site in range(1, mps.n + 1):
        t = mps.tensors[site - 1]
        if lo <= site <= hi:
            w = op.tensors[site - lo]
            env = np.einsum("wlk,wsv,lsr,ksq->vrq", env, w, t, t, optimize=True)
        else:
            env = np.einsum("wlk,lsr,ksq->wrq", env, t, t, optimize=True)
    return float(env.reshape(-1)[0])
