"""Randomized product-formula compilation.

Implements the qDRIFT gate-sequence emitter: given H = sum_j h_j H_j, it
draws N gates i.i.d. with probability p_j = h_j / lam and assigns every
gate the identical angle tau = lam * t / N.  The gate count N comes from
either the quadratic bound ceil(2 (lam t)^2 / eps) ("approx" mode) or the
smallest N whose rigorous channel-error bound (2 lam^2 t^2 / N) e^{2 lam t / N}
falls below eps ("exact" mode, the default).

Reproducibility contract: sampling uses numpy's counter-based Philox
bit generator keyed directly with the 64-bit seed, and draws one uniform
per gate through ``Generator.random``.  Identical (Hamiltonian canonical
form, t, eps, seed, mode) produce bit-identical circuits on every
platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian

MAX_SEED = 2**64 - 1
# Counts are exact Python integers and may exceed int64 (reports serialize
# those as logarithms); the guard only stops pathological inputs.
_N_LIMIT = 2**512

_LOG_2 = math.log(2.0)


def _check_positive(**values: float) -> None:
    for name, v in values.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and > 0, got {v!r}")


def segment_error_bound(lam: float, t: float, n: int) -> float:
    """Rigorous channel distance bound for one step: (2 lam^2 t^2 / N^2) e^{2 lam t / N}."""
    x = 2.0 * lam * t / n
    return 0.5 * x * x * math.exp(x)


def total_error_bound(lam: float, t: float, n: int) -> float:
    """N-step bound (2 lam^2 t^2 / N) e^{2 lam t / N} (subadditivity over segments)."""
    return n * segment_error_bound(lam, t, n)


def _log_total_bound(lam: float, t: float, n: int) -> float:
    return _LOG_2 + 2.0 * math.log(lam * t) - math.log(n) + 2.0 * lam * t / n


def gate_count_approx(lam: float, t: float, eps: float) -> int:
    """Gate count from the quadratic bound: ceil(2 lam^2 t^2 / eps), at least 1."""
    _check_positive(lam=lam, t=t, eps=eps)
    return max(1, math.ceil(2.0 * (lam * t) ** 2 / eps))


def gate_count_exact(lam: float, t: float, eps: float) -> int:
    """Smallest N with (2 lam^2 t^2 / N) e^{2 lam t / N} <= eps.

    The bound is strictly decreasing in N, so the answer is unique; it is
    located by doubling then bisection, evaluated in log space so huge
    lam*t never overflows.
    """
    _check_positive(lam=lam, t=t, eps=eps)
    log_eps = math.log(eps)
    if _log_total_bound(lam, t, 1) <= log_eps:
        return 1
    lo, hi = 1, 2
    while _log_total_bound(lam, t, hi) > log_eps:
        lo, hi = hi, hi * 2
        if hi > _N_LIMIT:
            raise OverflowError(f"no gate count <= 2**512 reaches eps={eps}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _log_total_bound(lam, t, mid) <= log_eps:
            hi = mid
        else:
            lo = mid
    return hi


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator keyed with the 64-bit seed."""
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not (0 <= seed <= MAX_SEED):
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed)))


class AliasSampler:
    """Vose alias table over a positive weight vector: O(L) build, O(1) draw.

    A draw consumes a single uniform u in [0, 1): the integer part of u*L
    picks a column, the fractional part decides between the column and its
    alias.  Under an ideal uniform source the returned index j has
    probability exactly w_j / sum(w).
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and > 0")
        self._p = w / math.fsum(w.tolist())
        n = w.size
        scaled = self._p * n
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        prob = np.ones(n)
        alias = np.arange(n, dtype=np.int64)
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # Leftovers are 1 up to roundoff; both stacks keep prob = 1.
        self._prob = prob
        self._alias = alias

    @property
    def probabilities(self) -> np.ndarray:
        """Normalized target distribution w / sum(w)."""
        return self._p.copy()

    @property
    def size(self) -> int:
        return self._p.size

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.sample_many(rng, 1)[0])

    def sample_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        x = rng.random(count) * self.size
        idx = np.minimum(x.astype(np.int64), self.size - 1)
        frac = x - idx
        return np.where(frac < self._prob[idx], idx, self._alias[idx])


def sample_term(h: Hamiltonian, rng: np.random.Generator) -> int:
    """Draw one term index j with probability h_j / lam."""
    return AliasSampler(h.weights).sample(rng)


@dataclass(frozen=True)
class GateOp:
    """One rotation exp(i * tau * sign * Pauli) applied to the state."""

    term_index: int
    angle: float
    controlled: bool = False


@dataclass(frozen=True)
class CircuitMeta:
    seed: int
    N: int
    t: float
    eps: float
    lam: float
    mode: str
    controlled: bool = False


class Circuit:
    """Ordered gate list sharing one angle tau = lam * t / N."""

    __slots__ = ("_indices", "tau", "meta", "source")

    def __init__(self, term_indices: np.ndarray, tau: float, meta: CircuitMeta, source: Hamiltonian):
        self._indices = np.asarray(term_indices, dtype=np.int64)
        self.tau = tau
        self.meta = meta
        self.source = source

    def __len__(self) -> int:
        return self._indices.size

    @property
    def term_indices(self) -> np.ndarray:
        return self._indices.copy()

    @property
    def gates(self) -> tuple[GateOp, ...]:
        c = self.meta.controlled
        return tuple(GateOp(int(j), self.tau, c) for j in self._indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.meta == other.meta
            and self.tau == other.tau
            and np.array_equal(self._indices, other._indices)
        )

    def to_text(self) -> str:
        """Serialize as ``qdrift-circ v1``: header comments then one gate per line."""
        tau_text = format(self.tau, ".17g")
        lines = [
            "# qdrift-circ v1",
            f"# seed={self.meta.seed}",
            f"# N={self.meta.N}",
            f"# tau={tau_text}",
        ]
        op = "CROT" if self.meta.controlled else "ROT"
        terms = self.source.terms
        for j in self._indices:
            lines.append(f"{op} {j} {terms[j].op} {tau_text}")
        return "\n".join(lines) + "\n"


def _resolve_gate_count(lam: float, t: float, eps: float, mode: str) -> int:
    if mode == "exact":
        return gate_count_exact(lam, t, eps)
    if mode == "approx":
        return gate_count_approx(lam, t, eps)
    raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")


def compile_circuit(
    h: Hamiltonian,
    t: float,
    eps: float,
    seed: int,
    mode: str = "exact",
    controlled: bool = False,
) -> Circuit:
    """Emit the randomized gate sequence for exp(i t H) to target precision eps.

    N comes from the selected mode, every gate carries tau = lam * t / N,
    and indices are drawn i.i.d. with p_j = h_j / lam.  The Hamiltonian is
    canonicalized first (gate indices refer to the canonical term order),
    making the output a pure function of (canonical form, t, eps, seed,
    mode) regardless of input term order.
    """
    _check_positive(t=t, eps=eps)
    if h.L == 0:
        raise ValueError("cannot compile an empty Hamiltonian")
    h = h.canonical()
    rng = rng_from_seed(seed)
    n = _resolve_gate_count(h.lam, t, eps, mode)
    if n > 2**31:
        raise ValueError(
            f"circuit would need N={n} gates; materializing it is impractical, "
            "use the cost engine for this regime"
        )
    tau = h.lam * t / n
    indices = AliasSampler(h.weights).sample_many(rng, n)
    meta = CircuitMeta(seed=int(seed), N=n, t=t, eps=eps, lam=h.lam, mode=mode, controlled=controlled)
    return Circuit(indices, tau, meta, h)


def compile_controlled(
    h: Hamiltonian, t: float, eps: float, seed: int, mode: str = "exact"
) -> Circuit:
    """Controlled-evolution variant: identical N and sampling, gates flagged controlled.

    Each controlled Pauli rotation expands into two plain rotations and two
    control-X gates, so the elementary estimate is (2N, 2N).
    """
    return compile_circuit(h, t, eps, seed, mode, controlled=True)


def elementary_gate_estimate(circuit: Circuit) -> dict[str, int]:
    """Rotation / control-X footprint after expanding controlled rotations."""
    n = len(circuit)
    if circuit.meta.controlled:
        return {"rotations": 2 * n, "control_x": 2 * n}
    return {"rotations": n, "control_x": 0}
