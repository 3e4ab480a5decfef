"""Open-quantum-system simulation of the spin-libration exchange.

The hybrid Hilbert space is a two-level spin tensored with a truncated
phonon Fock space. The spin factor of every matrix in this module is
written in the dressed basis {|+>, |->} with |+-> = (|0> +- |1>)/sqrt(2):
this is the basis in which the exchange Hamiltonian

    H / hbar = w S_z + w adag a + lam S_x (adag + a)

is block-structured (S_mu = sigma_mu / 2, so the spin splitting equals w
and the resonance condition is a drive Rabi frequency equal to w). With
the half-Pauli convention the coherent exchange |+,0> <-> |-,1> completes
at tau = pi / lam = 1/(2 lam_Hz), lam in rad/s.

Dissipation is a Lindblad master equation with collapse channels
  - spin dephasing at rate 2/T2* on S_z (coherences decay at 1/T2*),
  - spin decay at 1/T1 on sigma_-,
  - phonon heating at Gamma_gas*n_th on adag and damping at
    Gamma_gas*(n_th+1) on a,
integrated with fixed-step fourth-order Runge-Kutta. Trace, Hermiticity
and positivity are checked after every evolution.

Protocol helpers run in the interaction picture of w (S_z + adag a): the
frame operator commutes with the RWA exchange term, all collapse channels
are invariant under it, and populations in the dressed/Fock basis are
unchanged, so the slow exchange can be integrated without resolving the
carrier. The counter-rotating part of the full Hamiltonian appears there
as an explicitly time-dependent term oscillating at 2w.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import D_ZFS, GAMMA_NV

_TRACE_TOL = 1e-9
_HERMITICITY_TOL = 1e-12
_POSITIVITY_TOL = -1e-9

DEFAULT_FOCK_CUTOFF = 20

# Spin operators in the dressed basis (half-Pauli convention).
S_Z = np.diag([0.5, -0.5]).astype(complex)
S_X = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |-> -> |+>
SIGMA_MINUS = SIGMA_PLUS.conj().T
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

# Bare spin states expressed in dressed coordinates.
_BARE = {
    "0": np.array([1, 1], dtype=complex) / math.sqrt(2.0),
    "1": np.array([1, -1], dtype=complex) / math.sqrt(2.0),
    "+": np.array([1, 0], dtype=complex),
    "-": np.array([0, 1], dtype=complex),
}


class InvariantError(RuntimeError):
    """A density-matrix invariant was violated beyond tolerance."""


def destroy(cutoff: int) -> np.ndarray:
    """Phonon annihilation operator on a Fock space truncated at ``cutoff``."""
    return np.diag(np.sqrt(np.arange(1.0, cutoff + 1)), 1).astype(complex)


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1.0)).astype(complex)


def excitation_number(cutoff: int) -> np.ndarray:
    """sigma_+ sigma_- + adag a, conserved by the RWA Hamiltonian."""
    eye_f = np.eye(cutoff + 1, dtype=complex)
    return np.kron(SIGMA_PLUS @ SIGMA_MINUS, eye_f) + np.kron(
        np.eye(2, dtype=complex), number_operator(cutoff)
    )


@dataclass(frozen=True)
class DecoherenceParams:
    """Decoherence rates for the hybrid system.

    Defaults: T1 = 100 s (cryogenic NV), T2* = 460 us (isotopically purified
    bulk diamond), no gas heating, spin initialization fidelity 0.998.
    Use ``DecoherenceParams.none()`` to switch everything off.
    """

    t1: float = 100.0
    t2_star: float = 460e-6
    gamma_gas: float = 0.0
    n_th: float = 0.0
    init_fidelity: float = 0.998

    def __post_init__(self):
        if self.t1 <= 0 or self.t2_star <= 0:
            raise ValueError("T1 and T2* must be positive")
        if self.gamma_gas < 0 or self.n_th < 0:
            raise ValueError("gamma_gas and n_th must be non-negative")
        if not 0.0 <= self.init_fidelity <= 1.0:
            raise ValueError("init_fidelity must lie in [0, 1]")

    @classmethod
    def none(cls) -> "DecoherenceParams":
        return cls(t1=math.inf, t2_star=math.inf, gamma_gas=0.0, n_th=0.0,
                   init_fidelity=1.0)

    def collapse_operators(self, cutoff: int) -> list[np.ndarray]:
        eye_s = np.eye(2, dtype=complex)
        eye_f = np.eye(cutoff + 1, dtype=complex)
        a = destroy(cutoff)
        ops = []
        if math.isfinite(self.t2_star):
            ops.append(math.sqrt(2.0 / self.t2_star) * np.kron(S_Z, eye_f))
        if math.isfinite(self.t1):
            ops.append(math.sqrt(1.0 / self.t1) * np.kron(SIGMA_MINUS, eye_f))
        if self.gamma_gas > 0.0 and self.n_th > 0.0:
            ops.append(math.sqrt(self.gamma_gas * self.n_th) * np.kron(eye_s, a.conj().T))
        if self.gamma_gas > 0.0:
            ops.append(math.sqrt(self.gamma_gas * (self.n_th + 1.0)) * np.kron(eye_s, a))
        return ops


@dataclass(frozen=True)
class HybridQuantumState:
    """Density matrix on spin-1/2 (x) truncated Fock space.

    ``rho`` has dimension 2*(cutoff+1); the spin factor uses the dressed
    basis {|+>, |->}, the phonon factor the number basis.
    """

    cutoff: int
    rho: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * (self.cutoff + 1)

    def check(self) -> "HybridQuantumState":
        """Validate trace, Hermiticity and positivity; raise InvariantError."""
        tr = float(np.trace(self.rho).real)
        if abs(tr - 1.0) > _TRACE_TOL:
            raise InvariantError(f"trace invariant breached: tr rho = {tr!r}")
        herm = float(np.max(np.abs(self.rho - self.rho.conj().T)))
        if herm > _HERMITICITY_TOL:
            raise InvariantError(f"Hermiticity invariant breached: {herm:.3e}")
        min_eig = float(np.linalg.eigvalsh(self.rho)[0])
        if min_eig < _POSITIVITY_TOL:
            raise InvariantError(f"positivity invariant breached: {min_eig:.3e}")
        return self

    def phonon_marginal(self) -> np.ndarray:
        r = self.rho.reshape(2, self.cutoff + 1, 2, self.cutoff + 1)
        return np.einsum("aiaj->ij", r)

    def spin_marginal(self) -> np.ndarray:
        r = self.rho.reshape(2, self.cutoff + 1, 2, self.cutoff + 1)
        return np.einsum("aibi->ab", r)

    def phonon_populations(self) -> np.ndarray:
        return np.real(np.diag(self.phonon_marginal()))

    def mean_phonons(self) -> float:
        return float(np.dot(self.phonon_populations(), np.arange(self.cutoff + 1)))

    def fock_population(self, n: int) -> float:
        return float(self.phonon_marginal()[n, n].real)

    def spin_population(self, label: str) -> float:
        """Population of a spin state: '0'/'1' (bare) or '+'/'-' (dressed)."""
        v = _BARE[label]
        return float(np.real(v.conj() @ self.spin_marginal() @ v))

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


def product_state(spin: str, n: int, cutoff: int) -> HybridQuantumState:
    """Pure product state |spin> (x) |n>, spin one of '0', '1', '+', '-'."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if not 0 <= n <= cutoff:
        raise ValueError("Fock index outside cutoff")
    sv = _BARE[spin]
    fv = np.zeros(cutoff + 1, dtype=complex)
    fv[n] = 1.0
    psi = np.kron(sv, fv)
    return HybridQuantumState(cutoff=cutoff, rho=np.outer(psi, psi.conj()))


def thermal_product_state(spin: str, n_bar: float, cutoff: int) -> HybridQuantumState:
    """|spin><spin| (x) truncated, renormalized thermal phonon state."""
    if n_bar < 0:
        raise ValueError("n_bar must be non-negative")
    sv = _BARE[spin]
    if n_bar == 0.0:
        return product_state(spin, 0, cutoff)
    weights = (n_bar / (1.0 + n_bar)) ** np.arange(cutoff + 1)
    weights /= weights.sum()
    rho = np.kron(np.outer(sv, sv.conj()), np.diag(weights).astype(complex))
    return HybridQuantumState(cutoff=cutoff, rho=rho)


def build_hamiltonian(
    omega: float, coupling: float, cutoff: int, rwa: bool = True
) -> np.ndarray:
    """Spin-libration exchange Hamiltonian H/hbar in rad/s.

    w S_z + w adag a + lam S_x (adag + a); with ``rwa`` the counter-rotating
    part is dropped, leaving (lam/2)(sigma_+ a + sigma_- adag) plus the
    diagonal terms. Warns when lam > w/5 (RWA validity).
    """
    if cutoff < 1:
        raise ValueError("Fock cutoff must be >= 1")
    if rwa and coupling > omega / 5.0:
        warnings.warn(
            "coupling exceeds omega/5: rotating-wave approximation dubious",
            UserWarning,
            stacklevel=2,
        )
    a = destroy(cutoff)
    eye_f = np.eye(cutoff + 1, dtype=complex)
    h = omega * np.kron(S_Z, eye_f) + omega * np.kron(
        np.eye(2, dtype=complex), number_operator(cutoff)
    )
    if rwa:
        h += 0.5 * coupling * (
            np.kron(SIGMA_PLUS, a) + np.kron(SIGMA_MINUS, a.conj().T)
        )
    else:
        h += coupling * np.kron(S_X, a + a.conj().T)
    return h


def interaction_hamiltonian(omega: float, coupling: float, cutoff: int, rwa: bool):
    """Exchange Hamiltonian in the rotating frame of w (S_z + adag a).

    RWA: the constant operator (lam/2)(sigma_+ a + sigma_- adag). Full: a
    callable t -> H(t) that adds the counter-rotating term oscillating at 2w.
    """
    a = destroy(cutoff)
    h_jc = 0.5 * coupling * (np.kron(SIGMA_PLUS, a) + np.kron(SIGMA_MINUS, a.conj().T))
    if rwa:
        return h_jc
    h_cr = 0.5 * coupling * np.kron(SIGMA_PLUS, a.conj().T)

    def h_of_t(t: float) -> np.ndarray:
        ph = np.exp(2.0j * omega * t)
        cr = ph * h_cr
        return h_jc + cr + cr.conj().T

    return h_of_t


def _lindblad_rhs(h, collapse, rho):
    out = -1j * (h @ rho - rho @ h)
    for c, cdc in collapse:
        out += c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def evolve(
    state: HybridQuantumState,
    hamiltonian,
    decoherence: DecoherenceParams | None,
    duration: float,
    dt: float | None = None,
) -> HybridQuantumState:
    """Integrate the Lindblad master equation with fixed-step RK4.

    ``hamiltonian`` is H/hbar in rad/s, either a constant array or a
    callable t -> array. dt defaults to 0.05 / ||L|| estimated from the
    Hamiltonian norm and the collapse rates. The result is checked against
    the trace/Hermiticity/positivity invariants (InvariantError on breach).
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    cs = decoherence.collapse_operators(state.cutoff) if decoherence else []
    collapse = [(c, c.conj().T @ c) for c in cs]

    const = not callable(hamiltonian)
    h0 = hamiltonian if const else hamiltonian(0.0)
    if h0.shape != state.rho.shape:
        raise ValueError("Hamiltonian dimension does not match the state")
    if dt is None:
        lnorm = 2.0 * float(np.linalg.norm(h0, 2))
        for c in cs:
            lnorm += 2.0 * float(np.linalg.norm(c, 2)) ** 2
        dt = 0.05 / lnorm if lnorm > 0 else duration
    if duration == 0.0:
        return state.check()

    n = max(1, int(math.ceil(duration / dt)))
    step = duration / n
    rho = state.rho.copy()
    t = 0.0
    for _ in range(n):
        h1 = h0 if const else hamiltonian(t)
        h2 = h0 if const else hamiltonian(t + 0.5 * step)
        h4 = h0 if const else hamiltonian(t + step)
        k1 = _lindblad_rhs(h1, collapse, rho)
        k2 = _lindblad_rhs(h2, collapse, rho + 0.5 * step * k1)
        k3 = _lindblad_rhs(h2, collapse, rho + 0.5 * step * k2)
        k4 = _lindblad_rhs(h4, collapse, rho + step * k3)
        rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += step

    rho = 0.5 * (rho + rho.conj().T)  # shed roundoff asymmetry
    return HybridQuantumState(cutoff=state.cutoff, rho=rho).check()


def rotate_spin(state: HybridQuantumState, axis: str, angle: float) -> HybridQuantumState:
    """Instantaneous microwave rotation of the spin (hard-pulse limit).

    Axis labels follow the pulse polarization naming of the preparation
    sequence: an 'x' pulse of angle pi/2 takes the bare |0> to |+> (and
    -pi/2 takes |0> to |->); 'y' is the quadrature pulse. The phonon factor
    is untouched.
    """
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    # 'x' pulses rotate the bare Bloch vector about y so that |0> -> |+>.
    gen = (
        np.array([[0, -1j], [1j, 0]], dtype=complex)
        if axis == "x"
        else np.array([[0, 1], [1, 0]], dtype=complex)
    )
    u_bare = math.cos(0.5 * angle) * np.eye(2, dtype=complex) - 1j * math.sin(
        0.5 * angle
    ) * gen
    u = _HADAMARD @ u_bare @ _HADAMARD  # to dressed coordinates
    full = np.kron(u, np.eye(state.cutoff + 1, dtype=complex))
    return HybridQuantumState(
        cutoff=state.cutoff, rho=full @ state.rho @ full.conj().T
    )


def spin_init(state: HybridQuantumState, fidelity: float) -> HybridQuantumState:
    """Optically pump the spin to fidelity |0><0| + (1-fidelity) |1><1|.

    Pumping destroys spin coherence and spin-phonon correlations but leaves
    the phonon marginal untouched.
    """
    if not 0.5 <= fidelity <= 1.0:
        raise ValueError("fidelity must lie in [0.5, 1]")
    # f|0><0| + (1-f)|1><1| in dressed coordinates:
    s = 2.0 * fidelity - 1.0
    spin = 0.5 * np.array([[1.0, s], [s, 1.0]], dtype=complex)
    return HybridQuantumState(
        cutoff=state.cutoff, rho=np.kron(spin, state.phonon_marginal())
    )


@dataclass(frozen=True)
class FockPrepResult:
    state: HybridQuantumState
    phonon_fidelity: float
    spin_one_population: float


def fock_prep(
    omega: float,
    coupling: float,
    decoherence: DecoherenceParams | None = None,
    cutoff: int = DEFAULT_FOCK_CUTOFF,
    rwa: bool = True,
    dt: float | None = None,
) -> FockPrepResult:
    """Prepare a single-phonon Fock state from the motional ground state.

    Sequence: spin to |0>, pi/2 'x' pulse to |+>, coupled evolution for
    tau = pi/lam (one full exchange, 1/(2 lam) with lam in Hz), then the
    inverse pi/2 pulse, which maps the flipped spin onto |1>. Reports the
    phonon-marginal fidelity <1|rho_ph|1> and the final bare |1> population.
    """
    if coupling <= 0:
        targeted = product_state("0", 0, cutoff)
        return FockPrepResult(targeted, targeted.fock_population(1), 0.0)
    state = product_state("0", 0, cutoff)
    state = rotate_spin(state, "x", 0.5 * math.pi)
    h = interaction_hamiltonian(omega, coupling, cutoff, rwa)
    if dt is None and not rwa:
        dt = math.pi / omega / 40.0
    state = evolve(state, h, decoherence, math.pi / coupling, dt)
    state = rotate_spin(state, "x", -0.5 * math.pi)
    return FockPrepResult(
        state=state,
        phonon_fidelity=state.fock_population(1),
        spin_one_population=state.spin_population("1"),
    )


@dataclass(frozen=True)
class CoolingResult:
    nbar: np.ndarray  # mean phonon number after each cycle
    state: HybridQuantumState


def sideband_cool(
    omega: float,
    coupling: float,
    decoherence: DecoherenceParams,
    n_bar_start: float,
    n_cycles: int,
    cutoff: int = DEFAULT_FOCK_CUTOFF,
    rwa: bool = True,
) -> CoolingResult:
    """Pulsed sideband cooling from a thermal state.

    Each cycle: optical spin reset at the configured init fidelity, a -pi/2
    'x' pulse to |->, and one coupled-exchange pulse of duration
    tau_m = pi/(lam sqrt(m)) targeting a full swap of Fock level m. A fixed
    tau = pi/lam would leave the perfect-square levels untouched (the swap
    probability sin^2((pi/2) sqrt(n/m)) has zeros there), so the target
    level m cycles through a descending ladder m_max..1; every level then
    sees a near-resonant swap once per pass and nothing stays trapped. The
    mean phonon number after each cycle is returned; with perfect
    initialization and no other decoherence the floor is 1 - fidelity.
    """
    if n_bar_start >= cutoff / 3.0:
        raise ValueError(
            f"n_bar_start={n_bar_start} too close to the cutoff {cutoff}; "
            "need n_bar_start < cutoff/3 of headroom"
        )
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    state = thermal_product_state("0", n_bar_start, cutoff)
    h = interaction_hamiltonian(omega, coupling, cutoff, rwa)
    m_max = max(1, min(cutoff - 2, int(math.ceil(3.0 * n_bar_start))))
    ladder = list(range(m_max, 0, -1))
    dt = None
    if not rwa:
        dt = math.pi / omega / 40.0
    nbars = np.empty(n_cycles)
    for cycle in range(n_cycles):
        m = ladder[cycle % len(ladder)]
        state = spin_init(state, decoherence.init_fidelity)
        state = rotate_spin(state, "x", -0.5 * math.pi)
        tau = math.pi / (coupling * math.sqrt(m))
        state = evolve(state, h, decoherence, tau, dt)
        nbars[cycle] = state.mean_phonons()
    return CoolingResult(nbar=nbars, state=state)


# Spin-1 operators for the NV ground-state triplet (m_s = +1, 0, -1 basis).
_S1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)
_S1_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / math.sqrt(2.0)
_S1_Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / math.sqrt(2.0)


def nv_transitions(b_field, d_zfs: float = D_ZFS) -> tuple[float, float]:
    """NV ground-state transition frequencies |0> -> |-1>, |0> -> |+1| in Hz.

    Numerically diagonalizes D S_z'^2 + (gamma/2pi) B . S with the field
    given in the NV frame (z along the NV axis), tesla. Valid for |B| well
    below the ~0.1 T ground-state level-crossing scale.
    """
    b = np.asarray(b_field, dtype=float)
    if b.shape != (3,):
        raise ValueError("b_field must be a 3-vector in the NV frame")
    g_hz = GAMMA_NV / (2.0 * math.pi)
    h = d_zfs * (_S1_Z @ _S1_Z) + g_hz * (
        b[0] * _S1_X + b[1] * _S1_Y + b[2] * _S1_Z
    )
    energies = np.sort(np.linalg.eigvalsh(h))
    # For fields below the crossing the |0>-like level is the lowest.
    return float(energies[1] - energies[0]), float(energies[2] - energies[0])
