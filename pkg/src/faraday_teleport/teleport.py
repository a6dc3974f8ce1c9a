"""
N-qubit teleportation through photon-atom Faraday gates.

Register layout for the joint state: photons P1..PN, Alice's atoms A1..AN,
Bob's atoms B1..BN. The state to teleport lives on Alice's atoms; Bob's
atoms receive it.

Protocol
--------
1. Bob reflects photon i, prepared in (|L>+|R>)/sqrt2, off his cavity whose
   atom is in (|0>+|1>)/sqrt2. The Faraday gate entangles them.
2. The photon is reflected off Alice's cavity i (Faraday gate with her atom i),
   then passes a QWP; Alice applies H to her atom. All 2N Alice-side qubits
   are measured in the computational basis.
3. Bob applies a Pauli correction chosen from Alice's outcome.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hilbert as hb
from .cavity import CavityParams, GateMode, faraday_gate
from .hilbert import PauliString, PureState

MAX_N = 6
MAX_DERIVE_N = 4
FIDELITY_TOL = 1e-9

PHOTON_BITS = ("L", "R")


def photons(n: int) -> list[hb.QubitId]:
    return [hb.photon(i) for i in range(1, n + 1)]


def alice_atoms(n: int) -> list[hb.QubitId]:
    return [hb.alice_atom(i) for i in range(1, n + 1)]


def bob_atoms(n: int) -> list[hb.QubitId]:
    return [hb.bob_atom(i) for i in range(1, n + 1)]


def joint_register(n: int) -> hb.Register:
    return hb.Register(tuple(photons(n) + alice_atoms(n) + bob_atoms(n)))


@dataclass(frozen=True)
class InputState:
    """Unknown state on Alice's atoms; coefficient index follows the ket bit order."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if self.n < 1:
            raise ValueError("n must be positive")
        if c.size != 2**self.n:
            raise ValueError(f"expected {2 ** self.n} coefficients, got {c.size}")
        if abs(np.vdot(c, c).real - 1.0) > 1e-10:
            raise ValueError("input state is not normalized")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], normalize: bool = True) -> "InputState":
        c = np.asarray(amps, dtype=complex)
        n = int(round(np.log2(c.size))) if c.size else 0
        if c.size == 0 or 2**n != c.size:
            raise ValueError("amplitude count must be a power of two")
        if normalize:
            nrm = np.linalg.norm(c)
            if nrm == 0:
                raise ValueError("zero amplitude vector")
            c = c / nrm
        return cls(n, c)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "InputState":
        return cls(n, hb.random_state(alice_atoms(n), rng).amps)

    @classmethod
    def random_in_subspace(cls, n: int, kets: Sequence[str], rng: np.random.Generator) -> "InputState":
        c = np.zeros(2**n, dtype=complex)
        v = rng.normal(size=len(kets)) + 1j * rng.normal(size=len(kets))
        for k, amp in zip(kets, v / np.linalg.norm(v)):
            c[int(k, 2)] = amp
        return cls(n, c)

    @classmethod
    def ghz(cls, n: int = 3, alpha: complex = 1 / np.sqrt(2), delta: complex = 1 / np.sqrt(2)) -> "InputState":
        c = np.zeros(2**n, dtype=complex)
        c[0], c[-1] = alpha, delta
        return cls.from_amplitudes(c)

    def as_state(self, register: Sequence[hb.QubitId] | None = None) -> PureState:
        return PureState(register or alice_atoms(self.n), self.coeffs)


@dataclass(frozen=True)
class Outcome:
    """Alice's record: photon polarizations (L/R) and atom bits, one per qubit."""

    photon_bits: tuple[str, ...]
    atom_bits: tuple[int, ...]

    def __post_init__(self):
        pb = tuple(str(b).upper() for b in self.photon_bits)
        ab = tuple(int(b) for b in self.atom_bits)
        if len(pb) != len(ab):
            raise ValueError("photon and atom records differ in length")
        if any(b not in PHOTON_BITS for b in pb) or any(b not in (0, 1) for b in ab):
            raise ValueError(f"invalid outcome bits {pb}, {ab}")
        object.__setattr__(self, "photon_bits", pb)
        object.__setattr__(self, "atom_bits", ab)

    @classmethod
    def parse(cls, text: str) -> "Outcome":
        """``"LLR:010"`` -> photons L, L, R and atoms 0, 1, 0."""
        try:
            ph, at = text.strip().split(":")
        except ValueError:
            raise ValueError(f"outcome must look like 'LR:01', got {text!r}") from None
        return cls(tuple(ph), tuple(int(c) for c in at))

    @property
    def n(self) -> int:
        return len(self.atom_bits)

    @property
    def photon_ints(self) -> tuple[int, ...]:
        return tuple(PHOTON_BITS.index(b) for b in self.photon_bits)

    def __str__(self):
        return "".join(self.photon_bits) + ":" + "".join(map(str, self.atom_bits))


def all_outcomes(n: int) -> list[Outcome]:
    out = []
    for ph in itertools.product(PHOTON_BITS, repeat=n):
        for at in itertools.product((0, 1), repeat=n):
            out.append(Outcome(ph, at))
    return out


@dataclass
class TeleportReport:
    outcome: Outcome
    probability: float
    correction: PauliString
    fidelity: float
    bob_state: PureState
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "outcome": str(self.outcome),
            "probability": self.probability,
            "correction": self.correction.label,
            "correction_phase": hb.PHASE_LABELS[self.correction.phase] or "+",
            "fidelity": self.fidelity,
            "seed": self.seed,
        }


# --- channel and pipeline -------------------------------------------------


def make_channel(p: CavityParams, index: int = 1, mode: GateMode = GateMode.IDEAL) -> PureState:
    """Bob's atom-photon pair after one Faraday reflection, register (B_i, P_i)."""
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    atom = PureState([hb.bob_atom(index)], plus)
    pol = PureState([hb.photon(index)], plus)
    state = hb.tensor([atom, pol])
    return faraday_gate(p, mode).apply(state, hb.photon(index), hb.bob_atom(index))


def channel_branches(p: CavityParams, mode: GateMode = GateMode.IDEAL) -> tuple[np.ndarray, np.ndarray]:
    """Photon states (|Psi_out>_-, |Psi_out>_+) conditioned on Bob's atom 0 / 1."""
    amps = make_channel(p, mode=mode).amps.reshape(2, 2) * np.sqrt(2)
    return amps[0], amps[1]


def _check_n(n: int, limit: int = MAX_N):
    if not 1 <= n <= limit:
        raise ValueError(f"number of teleported qubits must be in 1..{limit}, got {n}")


def pipeline_state(
    inp: InputState, p: CavityParams, mode: GateMode = GateMode.IDEAL, stage: str = "final"
) -> PureState:
    """Joint state built gate by gate, over ``joint_register(n)``.

    ``stage="faraday"`` stops after Alice's Faraday gates; ``"final"`` also
    applies the QWP on every photon and H on every Alice atom.
    """
    n = inp.n
    _check_n(n)
    gate = faraday_gate(p, mode)
    factors = [inp.as_state()] + [make_channel(p, i, mode) for i in range(1, n + 1)]
    state = hb.permute(hb.tensor(factors), joint_register(n).qubits)
    for ph, a in zip(photons(n), alice_atoms(n)):
        state = gate.apply(state, ph, a)
    if stage == "faraday":
        return state
    if stage != "final":
        raise ValueError(f"unknown stage {stage!r}")
    for ph, a in zip(photons(n), alice_atoms(n)):
        state = hb.apply_gate(state, hb.QWP, ph)
        state = hb.apply_gate(state, hb.H, a)
    return state


def _per_qubit_kernel(p: CavityParams, mode: GateMode, stage: str) -> np.ndarray:
    """K[a, b, x, y]: amplitude for Alice input bit a, Bob bit b, photon x, Alice atom y."""
    gate = faraday_gate(p, mode)
    rc, re = gate.r_coupled, gate.r_empty
    # L couples to atom 0, R couples to atom 1
    t = np.array([[rc, re], [re, rc]])  # t[pol, atom]
    k = np.zeros((2, 2, 2, 2), dtype=complex)
    for a, b, x, y in itertools.product((0, 1), repeat=4):
        if stage == "faraday":
            k[a, b, x, y] = 0.5 * t[x, b] * t[x, a] * (y == a)
        else:
            s = sum(hb.QWP[x, pol] * t[pol, b] * t[pol, a] for pol in (0, 1))
            k[a, b, x, y] = 0.5 * s * hb.H[y, a]
    return k


def expand_joint_state(
    inp: InputState, p: CavityParams, mode: GateMode = GateMode.IDEAL, stage: str = "final"
) -> PureState:
    """Closed-form joint state: amp[x, y, b] = sum_a c[a] prod_i K[a_i, b_i, x_i, y_i].

    Independent of the gate-by-gate pipeline; the two must agree amplitude-wise.
    """
    n = inp.n
    _check_n(n)
    if stage not in ("final", "faraday"):
        raise ValueError(f"unknown stage {stage!r}")
    kern = _per_qubit_kernel(p, mode, stage)
    psi = inp.coeffs.reshape((2,) * n)
    # contract the leading a_i each time; appended axes are (b_i, x_i, y_i)
    for _ in range(n):
        psi = np.tensordot(psi, kern, axes=([0], [0]))
    # axes now: b1 x1 y1 b2 x2 y2 ...
    order = [3 * i + 1 for i in range(n)] + [3 * i + 2 for i in range(n)] + [3 * i for i in range(n)]
    amps = np.transpose(psi, order).reshape(-1)
    return PureState(joint_register(n), amps, normalized=(mode is GateMode.IDEAL))


def bob_conditional(state: PureState, outcome: Outcome) -> tuple[float, PureState | None]:
    """Probability of ``outcome`` and Bob's normalized conditional state."""
    n = outcome.n
    proj = hb.project(state, photons(n) + alice_atoms(n), outcome.photon_ints + outcome.atom_bits)
    prob = proj.norm_sq()
    if prob <= hb.ZERO_PROB * state.norm_sq():
        return 0.0, None
    return prob, hb.normalize(proj)


# --- corrections ------------------------------------------------------------

_RULE = {("L", 0): "X", ("L", 1): "Y", ("R", 0): "Z", ("R", 1): "I"}


def per_qubit_correction(photon_bit: str, atom_bit: int) -> str:
    return _RULE[(str(photon_bit).upper(), int(atom_bit))]


def correction_for(outcome: Outcome) -> PauliString:
    return PauliString(tuple(per_qubit_correction(x, y) for x, y in zip(outcome.photon_bits, outcome.atom_bits)))


def exact_phase(letters: Sequence[str], bob: np.ndarray, target: np.ndarray, tol: float = 1e-9) -> complex | None:
    """Power of i that maps P|bob> onto |target> exactly, if one exists."""
    ov = np.vdot(hb.pauli_on_vector(letters, bob), target)
    for ph in hb.PHASES:
        if abs(ov - ph) < tol:
            return ph
    return None


def derive_correction(
    outcome: Outcome,
    n: int,
    p: CavityParams,
    subspace: Sequence[str] | None = None,
    seed: int = 12345,
    mode: GateMode = GateMode.IDEAL,
) -> PauliString:
    """Brute-force the smallest Pauli string (I<X<Y<Z) that recovers the input.

    A candidate is accepted when it maps Bob's conditional state back to the
    input with fidelity >= 1 - 1e-9 for two independent random inputs (drawn
    from ``subspace`` when given). The returned phase is the power of i that
    makes the match exact, or +1 when no such power exists.
    """
    _check_n(n, MAX_DERIVE_N)
    if outcome.n != n:
        raise ValueError("outcome length differs from n")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(2):
        if subspace is None:
            inp = InputState.random(n, rng)
        else:
            inp = InputState.random_in_subspace(n, subspace, rng)
        prob, bob = bob_conditional(pipeline_state(inp, p, mode), outcome)
        if bob is None:
            raise ValueError(f"outcome {outcome} has zero probability")
        pairs.append((bob.amps, inp.coeffs))

    for letters in itertools.product(hb.PAULI_ORDER, repeat=n):
        ok = True
        for bob, target in pairs:
            f = abs(np.vdot(target, hb.pauli_on_vector(letters, bob))) ** 2
            if f < 1 - FIDELITY_TOL:
                ok = False
                break
        if ok:
            ph = exact_phase(letters, *pairs[0])
            if ph is not None and exact_phase(letters, *pairs[1]) != ph:
                ph = None
            return PauliString(letters, ph if ph is not None else 1)
    raise LookupError(f"no Pauli correction recovers the input for outcome {outcome}")


def subspace_basis(n: int, kets: Sequence[str] | None) -> np.ndarray:
    if kets is None:
        return np.eye(2**n, dtype=complex)
    b = np.zeros((2**n, len(kets)), dtype=complex)
    for j, k in enumerate(kets):
        b[int(k, 2), j] = 1
    return b


def equivalent_on_subspace(p: PauliString, q: PauliString, kets: Sequence[str] | None = None) -> bool:
    """True if corrections ``p`` and ``q`` give the same result up to global phase.

    Bob's pre-correction state is q^dagger|phi> with |phi> in the subspace, so the
    corrections agree iff p q^dagger acts as a scalar on the subspace.
    """
    if len(p) != len(q):
        return False
    n = len(p)
    basis = subspace_basis(n, kets)
    m = p.matrix() @ q.matrix().conj().T @ basis
    c = np.trace(basis.conj().T @ m) / basis.shape[1]
    return abs(abs(c) - 1) < 1e-9 and np.allclose(m, c * basis, atol=1e-9)


# --- protocol ---------------------------------------------------------------


def run_protocol(
    inp: InputState,
    p: CavityParams,
    forced: Outcome | None = None,
    seed: int = 0,
    mode: GateMode = GateMode.IDEAL,
    correction: PauliString | None = None,
) -> TeleportReport:
    """Run one teleportation: channels, Alice's gates, 2N measurements, correction."""
    n = inp.n
    _check_n(n)
    if forced is not None and forced.n != n:
        raise ValueError("forced outcome length differs from input size")
    rng = np.random.default_rng(seed)
    state = pipeline_state(inp, p, mode)

    prob = 1.0
    ph_bits, at_bits = [], []
    for i, q in enumerate(photons(n)):
        want = None if forced is None else forced.photon_ints[i]
        bit, pr, state = hb.measure(state, q, want, rng)
        prob *= pr
        ph_bits.append(PHOTON_BITS[bit])
    for i, q in enumerate(alice_atoms(n)):
        want = None if forced is None else forced.atom_bits[i]
        bit, pr, state = hb.measure(state, q, want, rng)
        prob *= pr
        at_bits.append(bit)
    outcome = Outcome(tuple(ph_bits), tuple(at_bits))

    _, bob = bob_conditional(state, outcome)
    corr = correction if correction is not None else correction_for(outcome)
    if len(corr) != n:
        raise ValueError("correction length differs from input size")
    fixed = hb.apply_pauli_string(bob, corr, bob_atoms(n))
    target = inp.as_state(bob_atoms(n))
    fid = hb.fidelity(fixed, target)
    ph = exact_phase(corr.letters, bob.amps, inp.coeffs)
    if ph is not None and correction is None:
        corr = PauliString(corr.letters, ph)
    return TeleportReport(outcome, prob, corr, fid, fixed, seed)


# --- parameter sweep ----------------------------------------------------------


@dataclass
class SweepPoint:
    params: CavityParams
    mean_fidelity: float
    success_probability: float
    fidelities: list[float] = field(default_factory=list, repr=False)


def fidelity_sweep(
    inp: InputState,
    grid: dict[str, Sequence[float]],
    samples: int = 64,
    seed: int = 0,
    base: CavityParams | None = None,
) -> list[SweepPoint]:
    """Lossy-mode protocol over the Cartesian product of ``grid`` values.

    ``grid`` maps CavityParams field names (e.g. ``omega_p``, ``g``, ``gamma``)
    to value lists. At each point ``samples`` outcomes are drawn from the
    heralded distribution and corrected with the ideal per-qubit rule; the
    success probability is the photon survival weight.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be nonempty")
    base = base or CavityParams.operating_point()
    names = list(grid)
    seeds = np.random.SeedSequence(seed).spawn(int(np.prod([len(grid[k]) for k in names])))
    n = inp.n
    target = inp.coeffs
    points = []
    for ss, values in zip(seeds, itertools.product(*(grid[k] for k in names))):
        params = base.with_(**dict(zip(names, map(float, values))))
        state = pipeline_state(inp, params, GateMode.LOSSY)
        survive = state.norm_sq()
        # Alice's 2N bits are the leading axes; sum Bob's axes for the distribution
        amps = state.amps.reshape(4**n, 2**n)
        weights = np.sum(np.abs(amps) ** 2, axis=1)
        rng = np.random.default_rng(ss)
        picks = rng.choice(4**n, size=samples, p=weights / weights.sum())
        fids = []
        for idx in picks:
            bits = [int(c) for c in format(idx, f"0{2 * n}b")]
            outcome = Outcome(tuple(PHOTON_BITS[b] for b in bits[:n]), tuple(bits[n:]))
            bob = amps[idx] / np.sqrt(weights[idx])
            fixed = hb.pauli_on_vector(correction_for(outcome).letters, bob)
            fids.append(float(abs(np.vdot(target, fixed)) ** 2))
        points.append(SweepPoint(params, float(np.mean(fids)), float(survive), fids))
    return points
