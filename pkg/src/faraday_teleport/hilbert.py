"""
Dense state-vector algebra over labeled qubit registers.

Bit convention: register position k is bit (n - 1 - k) of the basis index,
so the leftmost qubit in a ket is the most significant bit. Photon
polarization is encoded L -> 0, R -> 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 18
NORM_TOL = 1e-10
STATE_EQ_TOL = 1e-9
ZERO_PROB = 1e-20


class QubitKind(enum.Enum):
    PHOTON = "photon"
    ATOM = "atom"


class Party(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True, order=True)
class QubitId:
    kind: QubitKind
    party: Party
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"qubit index must be nonnegative, got {self.index}")

    def __str__(self):
        if self.kind is QubitKind.PHOTON:
            return f"P{self.index}"
        return f"{self.party.value[0].upper()}{self.index}"


def photon(index: int) -> QubitId:
    """Photon qubits travel Bob -> Alice; they are labeled on Alice's side."""
    return QubitId(QubitKind.PHOTON, Party.ALICE, index)


def alice_atom(index: int) -> QubitId:
    return QubitId(QubitKind.ATOM, Party.ALICE, index)


def bob_atom(index: int) -> QubitId:
    return QubitId(QubitKind.ATOM, Party.BOB, index)


@dataclass(frozen=True)
class Register:
    qubits: tuple[QubitId, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("duplicate qubit in register")
        if len(self.qubits) > MAX_QUBITS:
            raise ValueError(f"register exceeds {MAX_QUBITS} qubits")

    def __len__(self):
        return len(self.qubits)

    def __iter__(self):
        return iter(self.qubits)

    def __contains__(self, q):
        return q in self.qubits

    def position(self, q: QubitId) -> int:
        try:
            return self.qubits.index(q)
        except ValueError:
            raise KeyError(f"qubit {q} not in register") from None


class PureState:
    """Immutable amplitude vector of length 2**n over a register.

    ``normalized`` is False for sub-normalized states produced by lossy
    (absorbing) gates; measurement then reports absolute branch weights.
    """

    __slots__ = ("register", "amps", "normalized")

    def __init__(self, register: Register | Sequence[QubitId], amps, normalized: bool = True):
        if not isinstance(register, Register):
            register = Register(tuple(register))
        amps = np.array(amps, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(register):
            raise ValueError(f"expected {2 ** len(register)} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if normalized and abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise ValueError("state flagged normalized but norm differs from 1")
        amps.setflags(write=False)
        self.register = register
        self.amps = amps
        self.normalized = normalized

    @property
    def n(self) -> int:
        return len(self.register)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n) if self.n else self.amps.reshape(())

    def _replace(self, amps, normalized=None) -> "PureState":
        return PureState(self.register, amps, self.normalized if normalized is None else normalized)

    def __repr__(self):
        labels = ",".join(str(q) for q in self.register)
        return f"PureState([{labels}], norm={self.norm_sq():.6g})"


def basis_state(register: Register | Sequence[QubitId], bits: Sequence[int]) -> PureState:
    if not isinstance(register, Register):
        register = Register(tuple(register))
    if len(bits) != len(register):
        raise ValueError("bit string length differs from register size")
    amps = np.zeros(2 ** len(register), dtype=complex)
    amps[int("".join(str(int(b)) for b in bits) or "0", 2)] = 1.0
    return PureState(register, amps)


def random_state(register: Register | Sequence[QubitId], rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    if not isinstance(register, Register):
        register = Register(tuple(register))
    dim = 2 ** len(register)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(register, v / np.linalg.norm(v))


# single-qubit gates; the QWP acts on polarization exactly as H does with L=0, R=1
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
QWP = H.copy()
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_ORDER = "IXYZ"
PHASES = (1 + 0j, 1j, -1 + 0j, -1j)
PHASE_LABELS = {1 + 0j: "", 1j: "i", -1 + 0j: "-", -1j: "-i"}


def tensor(states: Iterable[PureState]) -> PureState:
    states = list(states)
    if not states:
        raise ValueError("tensor of an empty list")
    qubits: list[QubitId] = []
    amps = np.ones(1, dtype=complex)
    normalized = True
    for s in states:
        qubits.extend(s.register.qubits)
        amps = np.kron(amps, s.amps)
        normalized = normalized and s.normalized
    # Register() rejects duplicates across factors
    return PureState(Register(tuple(qubits)), amps, normalized)


def apply_gate(state: PureState, gate: np.ndarray, target: QubitId, unitary: bool = True) -> PureState:
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError("single-qubit gate must be 2x2")
    k = state.register.position(target)
    psi = np.moveaxis(state.tensor_view(), k, 0)
    psi = np.tensordot(gate, psi, axes=([1], [0]))
    out = np.moveaxis(psi, 0, k).reshape(-1)
    return state._replace(out, normalized=state.normalized and unitary)


def apply_diagonal_pair_gate(state: PureState, phases: Sequence[complex], q1: QubitId, q2: QubitId) -> PureState:
    """Multiply each basis state by ``phases[2*b1 + b2]`` where (b1, b2) are the bits of (q1, q2)."""
    if q1 == q2:
        raise ValueError("coincident targets")
    phases = np.asarray(phases, dtype=complex).reshape(2, 2)
    k1, k2 = state.register.position(q1), state.register.position(q2)
    shape = [1] * state.n
    shape[k1] = 2
    shape[k2] = 2
    diag = phases if k1 < k2 else phases.T
    out = (state.tensor_view() * diag.reshape(shape)).reshape(-1)
    unit = bool(np.allclose(np.abs(phases), 1.0, atol=1e-12))
    return state._replace(out, normalized=state.normalized and unit)


def measure(
    state: PureState,
    target: QubitId,
    forced: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, float, PureState]:
    """Projective Z measurement of ``target``.

    Returns (bit, probability, collapsed state). For sub-normalized input the
    probability is the absolute branch weight, so absorption lowers it.
    """
    k = state.register.position(target)
    psi = np.moveaxis(state.tensor_view(), k, 0)
    weights = np.array([np.vdot(psi[b], psi[b]).real for b in (0, 1)])
    if forced is None:
        if rng is None:
            raise ValueError("rng required when outcome is not forced")
        total = weights.sum()
        if total <= 0:
            raise ValueError("state has zero norm")
        bit = int(rng.random() * total >= weights[0])
    else:
        bit = int(forced)
        if bit not in (0, 1):
            raise ValueError(f"forced outcome must be 0 or 1, got {forced}")
    prob = float(weights[bit])
    # rounding residue of an exactly-zero branch is ~1e-32
    if prob <= ZERO_PROB * weights.sum():
        raise ValueError(f"outcome {bit} on {target} has zero probability")
    collapsed = np.zeros_like(psi)
    collapsed[bit] = psi[bit] / np.sqrt(prob)
    out = np.moveaxis(collapsed, 0, k).reshape(-1)
    return bit, prob, PureState(state.register, out, normalized=True)


def project(state: PureState, targets: Sequence[QubitId], bits: Sequence[int]) -> PureState:
    """Unnormalized projection onto ``bits`` of ``targets``; the targets are removed."""
    if len(targets) != len(bits):
        raise ValueError("targets and bits differ in length")
    positions = [state.register.position(q) for q in targets]
    index = [slice(None)] * state.n
    for k, b in zip(positions, bits):
        index[k] = int(b)
    rest = [q for q in state.register if q not in targets]
    amps = state.tensor_view()[tuple(index)].reshape(-1)
    return PureState(Register(tuple(rest)), amps, normalized=False)


def normalize(state: PureState) -> PureState:
    nrm = np.sqrt(state.norm_sq())
    if nrm <= 1e-150:
        raise ValueError("cannot normalize a zero vector")
    return PureState(state.register, state.amps / nrm, normalized=True)


def overlap(a: PureState, b: PureState) -> complex:
    if a.register != b.register:
        raise ValueError("register mismatch")
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for normalized states; insensitive to global phase."""
    f = abs(overlap(a, b)) ** 2
    return float(min(max(f, 0.0), 1.0))


def reduced_density(state: PureState, partition: Sequence[QubitId]) -> np.ndarray:
    positions = [state.register.position(q) for q in partition]
    rest = [k for k in range(state.n) if k not in positions]
    psi = np.transpose(state.tensor_view(), positions + rest).reshape(2 ** len(positions), -1)
    return psi @ psi.conj().T


def entanglement_entropy(state: PureState, partition: Sequence[QubitId]) -> float:
    """Von Neumann entropy (bits) of the reduced state on ``partition``."""
    partition = list(partition)
    if not partition or len(set(partition)) >= state.n:
        raise ValueError("partition must be a nonempty proper subset")
    positions = [state.register.position(q) for q in partition]
    rest = [k for k in range(state.n) if k not in positions]
    psi = np.transpose(state.tensor_view(), positions + rest).reshape(2 ** len(positions), -1)
    s = np.linalg.svd(psi, compute_uv=False)
    p = s**2 / np.sum(s**2)
    p = p[p > 1e-300]
    return float(max(-np.sum(p * np.log2(p)), 0.0))


@dataclass(frozen=True)
class PauliString:
    """Tensor product of Pauli letters with a global phase in {1, i, -1, -i}."""

    letters: tuple[str, ...]
    phase: complex = 1 + 0j

    def __post_init__(self):
        letters = tuple(self.letters)
        if any(c not in PAULI for c in letters):
            raise ValueError(f"invalid Pauli letters {letters!r}")
        object.__setattr__(self, "letters", letters)
        phase = complex(self.phase)
        for ph in PHASES:
            if abs(phase - ph) < 1e-9:
                object.__setattr__(self, "phase", ph)
                break
        else:
            raise ValueError(f"phase must be one of 1, i, -1, -i; got {phase}")

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"X.Z"``, ``"-X.X"``, ``"iY.I"``, or compact ``"XZ"``."""
        text = text.strip()
        phase = 1 + 0j
        for prefix, ph in (("-i", -1j), ("+i", 1j), ("i", 1j), ("-", -1 + 0j), ("+", 1 + 0j)):
            if text.startswith(prefix) and text[len(prefix):][:1] in tuple("IXYZ"):
                phase, text = ph, text[len(prefix):]
                break
        letters = tuple(text.replace(".", ""))
        return cls(letters, phase)

    @property
    def label(self) -> str:
        return ".".join(self.letters)

    def __str__(self):
        return PHASE_LABELS[self.phase] + self.label

    def __len__(self):
        return len(self.letters)

    def sort_key(self) -> tuple:
        return tuple(PAULI_ORDER.index(c) for c in self.letters) + (PHASES.index(self.phase),)

    def matrix(self) -> np.ndarray:
        m = np.ones((1, 1), dtype=complex)
        for c in self.letters:
            m = np.kron(m, PAULI[c])
        return self.phase * m

    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)


def apply_pauli_string(state: PureState, pauli: PauliString, targets: Sequence[QubitId]) -> PureState:
    if len(targets) != len(pauli.letters):
        raise ValueError("Pauli string length differs from target count")
    out = state
    for c, q in zip(pauli.letters, targets):
        if c != "I":
            out = apply_gate(out, PAULI[c], q)
    return out._replace(out.amps * pauli.phase)


def pauli_on_vector(letters: Sequence[str], vec: np.ndarray) -> np.ndarray:
    """Apply Pauli letters to a bare 2**n amplitude vector (no phase)."""
    n = len(letters)
    psi = np.asarray(vec, dtype=complex).reshape((2,) * n) if n else np.asarray(vec, dtype=complex)
    for k, c in enumerate(letters):
        if c == "I":
            continue
        psi = np.moveaxis(np.tensordot(PAULI[c], np.moveaxis(psi, k, 0), axes=([1], [0])), 0, k)
    return psi.reshape(-1)


def permute(state: PureState, order: Sequence[QubitId]) -> PureState:
    """Reorder the register to ``order`` (same qubits, new positions)."""
    order = tuple(order)
    if set(order) != set(state.register.qubits) or len(order) != state.n:
        raise ValueError("permutation must list exactly the register's qubits")
    positions = [state.register.position(q) for q in order]
    amps = np.transpose(state.tensor_view(), positions).reshape(-1)
    return PureState(Register(order), amps, state.normalized)
