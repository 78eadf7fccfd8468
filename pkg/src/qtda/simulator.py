"""Seeded statevector simulation of the NISQ subroutines.

Qubit ``q`` of an ``N``-qubit register is bit ``N - 1 - q`` of the basis
index, matching the vertex convention of :mod:`qtda.complex`. Gates act on
axis 0 of the amplitude array, so a batch of states can be evolved at once
by stacking them as columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .boundary import DENSE_MAX, apply_B
from .complex import N_MAX, Skeleton, popcounts, vertex_bit


class RngStream:
    """Counter-based (Philox) random stream with reproducible substreams."""

    def __init__(self, seed: int = 0, *path: int):
        self.seed = int(seed) & ((1 << 64) - 1)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence([self.seed, *self.path])
        self.generator = np.random.Generator(np.random.Philox(ss))

    def substream(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, *self.path, *keys)

    def integers(self, high: int) -> int:
        return int(self.generator.integers(0, high))

    def random(self) -> float:
        return float(self.generator.random())

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"


@dataclass
class StateVector:
    """Amplitudes plus the accumulated post-selection probability.

    ``amps`` may hold Python integers (``dtype=object``) for exact,
    unnormalized evolution; in that case the sampled projectors zero
    amplitudes but never rescale them.
    """

    n: int
    amps: np.ndarray
    norm_tracking: float = 1.0

    def __post_init__(self):
        if self.amps.shape[0] != 1 << self.n:
            raise ValueError("amplitude length does not match qubit count")

    @property
    def exact(self) -> bool:
        return self.amps.dtype == object

    def norm2(self):
        if self.exact:
            return sum(int(a) * int(a) for a in self.amps.ravel())
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy(), self.norm_tracking)


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def hadamard_signs(n: int, b: int) -> np.ndarray:
    """The +-1 entries of Hadamard column ``b``: ``(-1)**popcount(b & z)``."""
    idx = np.arange(1 << n, dtype=np.int64) & b
    par = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        par ^= (idx >> bit) & 1
    return 1 - 2 * par


def prepare_hadamard_probe(n: int, rng: Optional[RngStream] = None, b: Optional[int] = None,
                           exact: bool = False) -> tuple[StateVector, int]:
    """Random Hadamard column: X^b then H on every qubit, with b uniform in [0, 2^n).

    Returns the state and the drawn ``b``. With ``exact=True`` the state is
    the unnormalized +-1 integer vector (norm squared ``2**n``).
    """
    if not 1 <= n <= N_MAX:
        raise ValueError(f"n={n} outside 1..{N_MAX}")
    if b is None:
        if rng is None:
            raise ValueError("need an rng or an explicit column")
        b = rng.integers(1 << n)
    signs = hadamard_signs(n, b)
    if exact:
        return StateVector(n, signs.astype(object)), b
    return StateVector(n, signs.astype(complex) / 2 ** (n / 2)), b


# ---------------------------------------------------------------------------
# circuits

GATE_ARITY = {"H": 1, "X": 1, "RZ": 1, "CNOT": 2, "CCNOT": 3}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    param: Optional[float] = None

    def to_text(self) -> str:
        s = " ".join([self.name, *map(str, self.qubits)])
        return s if self.param is None else f"{s} {self.param!r}"


@dataclass
class Circuit:
    """Ordered gate list over ``n`` qubits.

    ``RZ q theta`` is ``exp(-i theta Z)``, so the rotation angle in a Trotter
    step equals the time step.
    """

    n: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, name: str, *qubits: int, param: Optional[float] = None) -> "Circuit":
        if name not in GATE_ARITY or len(qubits) != GATE_ARITY[name]:
            raise ValueError(f"bad gate {name}{qubits}")
        if any(not 0 <= q < self.n for q in qubits) or len(set(qubits)) != len(qubits):
            raise ValueError(f"qubit index out of range in {name}{qubits}")
        if (name == "RZ") != (param is not None):
            raise ValueError("RZ takes exactly one angle")
        self.gates.append(Gate(name, tuple(qubits), param))
        return self

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.name] = out.get(g.name, 0) + 1
        return out

    def _depth(self, names=None) -> int:
        level = [0] * self.n
        for g in self.gates:
            if names is not None and g.name not in names:
                continue
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    @property
    def depth(self) -> int:
        """Entangling depth: longest dependency chain of multi-qubit gates."""
        return self._depth({"CNOT", "CCNOT"})

    @property
    def total_depth(self) -> int:
        """Longest dependency chain counting every gate."""
        return self._depth()

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    def write(self, stream: TextIO) -> None:
        stream.write(f"QUBITS {self.n}\n")
        stream.write(self.to_text())

    @classmethod
    def from_text(cls, text: str, n: Optional[int] = None) -> "Circuit":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if lines and lines[0][0] == "QUBITS":
            n = int(lines.pop(0)[1])
        if n is None:
            n = 1 + max(int(q) for ln in lines for q in ln[1:1 + GATE_ARITY[ln[0]]])
        c = cls(n)
        for ln in lines:
            name, ar = ln[0], GATE_ARITY[ln[0]]
            qs = [int(q) for q in ln[1:1 + ar]]
            c.add(name, *qs, param=float(ln[1 + ar]) if name == "RZ" else None)
        return c


_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _apply_gate(amps: np.ndarray, g: Gate, N: int) -> np.ndarray:
    if g.name in ("H", "RZ"):
        q = g.qubits[0]
        view = amps.reshape((1 << q, 2, 1 << (N - q - 1)) + amps.shape[1:])
        a0, a1 = view[:, 0], view[:, 1]
        if g.name == "H":
            out = np.stack([(a0 + a1) * _H[0, 0], (a0 - a1) * _H[0, 0]], axis=1)
        else:
            ph = np.exp(-1j * g.param)
            out = np.stack([a0 * ph, a1 * np.conj(ph)], axis=1)
        return out.reshape(amps.shape)
    idx = np.arange(1 << N, dtype=np.int64)
    *ctrl, tgt = g.qubits
    cmask = 0
    for c in ctrl:
        cmask |= vertex_bit(c, N)
    flip = ((idx & cmask) == cmask) * vertex_bit(tgt, N)
    return amps[idx ^ flip]


def run_circuit(state: StateVector, c: Circuit) -> StateVector:
    """Evolve ``state`` gate by gate (exact amplitude arithmetic)."""
    if state.n != c.n:
        raise ValueError(f"circuit on {c.n} qubits, state on {state.n}")
    amps = state.amps
    if amps.dtype != object:
        amps = amps.astype(complex)
    for g in c.gates:
        if any(q >= c.n for q in g.qubits):
            raise IndexError(f"gate {g} outside register")
        amps = _apply_gate(amps, g, c.n)
    return StateVector(state.n, amps, state.norm_tracking)


def build_trotter_circuit(n: int, t: float) -> Circuit:
    """First-order Trotter step for exp(-iBt) after parity-sharing cancellations.

    Qubits 0..n-1 hold the simplex register, qubit n is an ancilla that keeps
    the running Z-parity of the vertices already processed. Term i conjugates
    its X by H, borrows the parity, rotates the ancilla and then folds vertex
    i into the parity; the parity is uncomputed at the end.
    Gate tally: 2(2n-1) CNOT, 2n H, n RZ.
    """
    if not 1 <= n <= N_MAX:
        raise ValueError(f"n={n} outside 1..{N_MAX}")
    anc = n
    c = Circuit(n + 1)
    for i in range(n):
        c.add("H", i)
        c.add("CNOT", i, anc)
        c.add("RZ", anc, param=t)
        c.add("CNOT", i, anc)
        c.add("H", i)
        if i < n - 1:
            c.add("CNOT", i, anc)
    for i in reversed(range(n - 1)):
        c.add("CNOT", i, anc)
    return c


def trotter_unitary(n: int, t: float) -> np.ndarray:
    """Data-register block (ancilla in and out in |0>) of the Trotter circuit."""
    if n > DENSE_MAX:
        raise ValueError(f"dense unitary limited to n <= {DENSE_MAX}")
    c = build_trotter_circuit(n, t)
    cols = np.zeros((1 << (n + 1), 1 << n), dtype=complex)
    cols[np.arange(1 << n) << 1, np.arange(1 << n)] = 1.0
    out = run_circuit(StateVector(n + 1, cols), c).amps
    return out[0::2]


def trotter_error(n: int, t: float) -> float:
    """Spectral-norm distance between the Trotter circuit and exp(-iBt)."""
    if n > 8:
        raise ValueError("dense oracle limited to n <= 8")
    from .boundary import dirac_operator
    from .oracle import dense_expm

    exact = dense_expm(dirac_operator(n), t)
    return float(np.linalg.norm(trotter_unitary(n, t) - exact, 2))


# ---------------------------------------------------------------------------
# projections by mid-circuit measurement


def round_robin_pairs(n: int) -> list[list[tuple[int, int]]]:
    """Circle-method 1-factorization of K_n: n-1 rounds of disjoint pairs.

    Odd ``n`` gets a pad vertex; pairs touching it are dropped, so one vertex
    idles per round. Pair slots are stable within a round: slot ``s`` of
    round ``r`` is ``rounds[r][s]`` (``None`` for an idle slot).
    """
    N = n + (n % 2)
    if N < 2:
        return []
    rounds = []
    for r in range(N - 1):
        pairs = [(r, N - 1)]
        for i in range(1, N // 2):
            pairs.append(((r + i) % (N - 1), (r - i) % (N - 1)))
        rounds.append([tuple(sorted(p)) if max(p) < n else None for p in pairs])
    return rounds


def flag_register_size(n: int) -> int:
    return (n + (n % 2)) // 2


def complex_projection_circuits(g: Skeleton) -> list[Circuit]:
    """Per-round Toffoli layers writing missing-pair indicators into the flags.

    Data qubits are 0..n-1, flag slot s is qubit n+s. Each round is followed
    by measuring and resetting the flag register.
    """
    n = g.n
    width = n + flag_register_size(n)
    out = []
    for rnd in round_robin_pairs(n):
        c = Circuit(width)
        for slot, pair in enumerate(rnd):
            if pair is not None and not g.adjacency[pair]:
                c.add("CCNOT", pair[0], pair[1], n + slot)
        out.append(c)
    return out


_FLAG_CACHE: dict = {}


def _round_flag_words(g: Skeleton) -> list[np.ndarray]:
    key = (g.n, g.adjacency.tobytes())
    words = _FLAG_CACHE.get(key)
    if words is None:
        n = g.n
        idx = np.arange(1 << n, dtype=np.int64)
        words = []
        for rnd in round_robin_pairs(n):
            w = np.zeros(1 << n, dtype=np.int64)
            for slot, pair in enumerate(rnd):
                if pair is None or g.adjacency[pair]:
                    continue
                pm = vertex_bit(pair[0], n) | vertex_bit(pair[1], n)
                w |= ((idx & pm) == pm).astype(np.int64) << slot
            words.append(w)
        if len(_FLAG_CACHE) > 256:
            _FLAG_CACHE.clear()
        _FLAG_CACHE[key] = words
    return words


def _weights(amps: np.ndarray) -> np.ndarray:
    """Float weights proportional to |amp|^2 summed over trailing axes."""
    if amps.dtype == object:
        sq = amps * amps
        if sq.ndim > 1:
            sq = sq.reshape(sq.shape[0], -1).sum(axis=1)
        top = max(int(v).bit_length() for v in sq)
        shift = max(0, top - 900)
        return np.array([float(int(v) >> shift) for v in sq])
    w = np.abs(amps) ** 2
    if w.ndim > 1:
        w = w.reshape(w.shape[0], -1).sum(axis=1)
    return w


def _measure(state: StateVector, outcome_of: np.ndarray, n_outcomes: int, rng: RngStream,
             renormalize: bool) -> tuple[StateVector, int, float]:
    w = _weights(state.amps)
    probs = np.bincount(outcome_of, weights=w, minlength=n_outcomes)
    total = probs.sum()
    if total <= 0:
        raise ValueError("cannot measure the zero vector")
    cdf = np.cumsum(probs) / total
    outcome = int(np.searchsorted(cdf, rng.random(), side="right"))
    outcome = min(outcome, n_outcomes - 1)
    while probs[outcome] == 0:  # guard against cdf plateaus at rounding level
        outcome -= 1
    p = probs[outcome] / total
    keep = outcome_of == outcome
    keep_b = keep if state.amps.ndim == 1 else keep.reshape((-1,) + (1,) * (state.amps.ndim - 1))
    if state.exact:
        amps = np.where(keep_b, state.amps, 0)
    else:
        amps = state.amps * keep_b
        if renormalize:
            amps = amps / math.sqrt(p)
    return StateVector(state.n, amps, state.norm_tracking * p), outcome, p


@dataclass
class ProjectionResult:
    state: StateVector
    success: bool
    outcomes: list[int]
    measured_k: Optional[int] = None


def project_complex_sampled(state: StateVector, g: Skeleton, rng: RngStream,
                            renormalize: bool = True) -> ProjectionResult:
    """Project onto the clique complex by n-1 rounds of flag measurements.

    Round r runs the Toffolis of ``complex_projection_circuits(g)[r]`` into
    the flag register, measures it and resets it. The run succeeds iff every
    round reads all zeros; on success the state equals the exact projection
    (renormalized unless ``renormalize`` is false) and ``norm_tracking`` has
    been multiplied by the success probability.
    """
    if state.n != g.n:
        raise ValueError("state and skeleton sizes differ")
    slots = 1 << flag_register_size(g.n)
    outcomes: list[int] = []
    for words in _round_flag_words(g):
        if not words.any():
            outcomes.append(0)
            continue
        state, out, _ = _measure(state, words, slots, rng, renormalize)
        outcomes.append(out)
        if out != 0:
            return ProjectionResult(state, False, outcomes)
    return ProjectionResult(state, True, outcomes)


def count_register_size(n: int) -> int:
    return max(1, math.ceil(math.log2(n + 1)))


def project_order_sampled(state: StateVector, rng: RngStream, want_k: Optional[int] = None,
                          renormalize: bool = True) -> ProjectionResult:
    """Measure the simplex order through a Hamming-weight count register.

    Each data qubit conditionally increments a ``ceil(log2(n+1))``-qubit
    counter; reading the counter collapses the state onto one weight ``w``
    and reports ``measured_k = w - 1``.
    """
    n = state.n
    weight = popcounts(n)
    state, w, _ = _measure(state, weight, n + 1, rng, renormalize)
    k = w - 1
    return ProjectionResult(state, want_k is None or k == want_k, [w], k)


def uniform_order_state(n: int, k: int) -> StateVector:
    """Uniform superposition over all weight-(k+1) basis states."""
    sel = popcounts(n) == k + 1
    amps = sel.astype(complex)
    return StateVector(n, amps / math.sqrt(sel.sum()))


def apply_B_state(state: StateVector, scale: float = 1.0) -> StateVector:
    amps = apply_B(state.amps, state.n)
    if scale != 1.0:
        amps = amps * scale
    return StateVector(state.n, amps, state.norm_tracking)
