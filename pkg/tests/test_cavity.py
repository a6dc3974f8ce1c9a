import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from faraday_teleport import hilbert as hb
from faraday_teleport.cavity import (
    Branch,
    CavityParams,
    GateMode,
    Pulse,
    faraday_gate,
    faraday_phases,
    gaussian_pulse,
    reflect_coupled,
    reflect_empty,
    reflect_pulse,
)

OP = CavityParams.operating_point()


def langevin_steady_state(p: CavityParams, omega: float) -> complex:
    """Oracle: solve the linearized (sigma_z = -1) Langevin equations at steady state.

    0 = -[i(wc - w) + k/2] a - g s - sqrt(k) a_in
    0 = -[i(w0 - w) + gam/2] s + g a
    a_out = a_in + sqrt(k) a
    """
    m = np.array(
        [[-(1j * (p.omega_c - omega) + p.kappa / 2), -p.g], [p.g, -(1j * (p.omega_0 - omega) + p.gamma / 2)]]
    )
    rhs = np.array([math.sqrt(p.kappa), 0.0])
    a, _ = np.linalg.solve(m, rhs)
    return 1 + math.sqrt(p.kappa) * a


params = st.builds(
    CavityParams,
    omega_c=st.floats(-3, 3),
    omega_0=st.floats(-3, 3),
    omega_p=st.floats(-3, 3),
    kappa=st.floats(0.2, 5),
    gamma=st.floats(0, 2),
    g=st.floats(0.01, 3),
)


def test_operating_point_coupled():
    r = reflect_coupled(OP)
    assert r.r == -1
    assert r.phase == math.pi


def test_operating_point_empty():
    r = reflect_empty(OP)
    assert r.r == 1j
    assert abs(r.phase - math.pi / 2) < 1e-15


def test_empty_resonant_and_blue_detuned():
    assert abs(reflect_empty(OP.with_(omega_p=0.0)).r - (-1)) < 1e-15
    # (-i/2 - 1/2) / (-i/2 + 1/2) = -i
    assert abs(reflect_empty(OP.with_(omega_p=0.5)).r - (-1j)) < 1e-15


def test_far_detuned_coupled_near_unity():
    r = reflect_coupled(OP.with_(omega_p=1000.0))
    assert abs(r.r - 1) < 0.01
    ph = faraday_phases(OP.with_(omega_p=1000.0))
    assert abs(ph.theta_minus) < 0.01 and abs(ph.theta_plus) < 0.01


@given(params)
def test_coupled_matches_langevin_oracle(p):
    assert abs(reflect_coupled(p).r - langevin_steady_state(p, p.omega_p)) < 1e-10


@given(params)
def test_g_zero_reduces_to_empty(p):
    p0 = p.with_(g=0.0)
    assume(abs(complex(p0.gamma / 2, p0.omega_0 - p0.omega_p)) > 1e-6)
    assert abs(reflect_coupled(p0).r - reflect_empty(p0).r) < 1e-12
    ph = faraday_phases(p0)
    # phases may straddle the branch cut at pi
    assert abs(np.exp(2j * ph.theta_minus) - 1) < 1e-12


@given(params)
def test_magnitudes(p):
    assert abs(reflect_empty(p).magnitude - 1) < 1e-12
    assert reflect_coupled(p).magnitude <= 1 + 1e-9
    assert abs(reflect_coupled(p.with_(gamma=0.0)).magnitude - 1) < 1e-12


@given(params)
def test_theta_relations(p):
    ph = faraday_phases(p)
    assert abs(ph.theta_minus - (ph.phi0 - ph.phi) / 2) < 1e-15
    assert ph.theta_plus == -ph.theta_minus
    assert -math.pi < ph.phi <= math.pi and -math.pi < ph.phi0 <= math.pi


@pytest.mark.parametrize("gamma", [0.0, 0.01, 0.05, 0.1])
def test_weak_absorption_at_operating_point(gamma):
    p = CavityParams.operating_point(gamma)
    assert reflect_coupled(p).magnitude > 0.8
    assert reflect_empty(p).magnitude > 0.9
    if gamma <= 0.05:
        assert reflect_coupled(p).magnitude > 0.9


def test_operating_point_phases():
    ph = faraday_phases(OP)
    assert (ph.phi, ph.phi0) == (math.pi, math.pi / 2)
    assert abs(ph.theta_minus + math.pi / 4) < 1e-15
    assert abs(ph.theta_plus - math.pi / 4) < 1e-15


def test_ideal_gate_at_operating_point():
    assert faraday_gate(OP).phases == (-1, 1j, 1j, -1)


def test_gate_reproduces_output_pulses():
    photon, atom = hb.photon(1), hb.alice_atom(1)
    lin = hb.PureState([photon], [1 / math.sqrt(2)] * 2)
    gate = faraday_gate(OP)
    out0 = gate.apply(hb.tensor([lin, hb.basis_state([atom], [0])]), photon, atom)
    out1 = gate.apply(hb.tensor([lin, hb.basis_state([atom], [1])]), photon, atom)
    s = 1 / math.sqrt(2)
    # atom |0>: (e^{i phi} L + e^{i phi0} R)/sqrt2 = (-L + iR)/sqrt2
    assert np.allclose(out0.amps, [-s, 0, 1j * s, 0])
    # atom |1>: (e^{i phi0} L + e^{i phi} R)/sqrt2 = (iL - R)/sqrt2
    assert np.allclose(out1.amps, [0, 1j * s, 0, -s])


@given(params)
def test_gate_modes(p):
    ideal = faraday_gate(p, GateMode.IDEAL)
    lossy = faraday_gate(p, GateMode.LOSSY)
    assert np.allclose(np.abs(ideal.phases), 1, atol=1e-12)
    assert np.linalg.norm(lossy.matrix(), 2) <= 1 + 1e-9
    for g in (ideal, lossy):
        assert g.phases[0] == g.phases[3] and g.phases[1] == g.phases[2]
    lossless = faraday_gate(p.with_(gamma=0.0), GateMode.LOSSY)
    assert np.allclose(lossless.phases, faraday_gate(p.with_(gamma=0.0)).phases, atol=1e-12)


def test_degenerate_parameters():
    # denominator (i(-w) + 1/2)(i(-w)) + g^2 vanishes for w = 0, g = 0, gamma = 0, omega_0 = w
    with pytest.raises(ValueError):
        reflect_coupled(CavityParams(0.0, 0.0, 0.0, 1.0, 0.0, 0.0))


def test_invalid_params():
    with pytest.raises(ValueError):
        CavityParams(kappa=0)
    with pytest.raises(ValueError):
        CavityParams(gamma=-1)
    with pytest.raises(ValueError):
        CavityParams(g=-0.1)


def test_from_physical_normalizes():
    p = CavityParams.from_physical(10.0, 10.0, 10.0 - 2.0, 4.0, 0.4, 2.0)
    assert p == CavityParams(0.0, 0.0, -0.5, 1.0, 0.1, 0.5)


# --- pulses ----------------------------------------------------------------


def test_long_pulse_approaches_minus_one():
    pulse = gaussian_pulse(200.0)
    out = reflect_pulse(OP, pulse)
    ov = pulse.overlap(out)
    assert abs(ov) ** 2 > 0.99
    assert ov.real < -0.99
    assert abs(out.energy() - pulse.energy()) < 1e-9


def test_empty_far_detuned_passes_through():
    p = OP.with_(omega_p=1e7)
    pulse = gaussian_pulse(50.0)
    out = reflect_pulse(p, pulse, Branch.EMPTY)
    assert np.max(np.abs(out.samples - pulse.samples)) < 1e-6


def test_short_pulse_distorts_but_conserves_energy():
    pulse = gaussian_pulse(0.5)
    out = reflect_pulse(OP, pulse)
    assert abs(out.energy() - pulse.energy()) < 1e-9
    assert abs(pulse.overlap(out)) ** 2 < 0.99


def test_lossy_pulse_loses_energy():
    pulse = gaussian_pulse(20.0)
    out = reflect_pulse(CavityParams.operating_point(0.1), pulse)
    assert out.energy() < pulse.energy()


def test_pulse_requires_power_of_two():
    with pytest.raises(ValueError):
        reflect_pulse(OP, Pulse(np.ones(100), 0.1))


@settings(max_examples=25)
@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3), st.integers(0, 2**31))
def test_reflect_pulse_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    f = Pulse(rng.normal(size=256) + 1j * rng.normal(size=256), 0.1)
    h = Pulse(rng.normal(size=256) + 1j * rng.normal(size=256), 0.1)
    p = CavityParams.operating_point(0.05)
    lhs = reflect_pulse(p, Pulse(a * f.samples + b * h.samples, 0.1)).samples
    rhs = a * reflect_pulse(p, f).samples + b * reflect_pulse(p, h).samples
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1.0, np.max(np.abs(lhs)))


@pytest.mark.parametrize("gamma,omega_p", [(0.0, -0.5), (0.2, 0.3)])
def test_pulse_filter_matches_time_domain_langevin(gamma, omega_p):
    """Oracle: integrate the linearized Langevin equations directly in time."""
    p = CavityParams(0.0, 0.0, omega_p, 1.0, gamma, 0.5)
    fwhm, factor, n = 2.0, 96.0, 8192
    pulse = gaussian_pulse(fwhm, factor, n)
    window = fwhm * factor
    norm = pulse.samples[n // 2].real

    def f_in(t):
        return norm * np.exp(-2 * math.log(2) * ((t - window / 2) / fwhm) ** 2)

    dc = 1j * (p.omega_c - p.omega_p) + p.kappa / 2
    d0 = 1j * (p.omega_0 - p.omega_p) + p.gamma / 2

    def rhs(t, y):
        a, s = y
        return [-dc * a - p.g * s - math.sqrt(p.kappa) * f_in(t), -d0 * s + p.g * a]

    t = pulse.times
    sol = solve_ivp(rhs, (0, t[-1]), [0j, 0j], t_eval=t, rtol=1e-10, atol=1e-12, method="DOP853")
    a_out = f_in(t) + math.sqrt(p.kappa) * sol.y[0]
    filtered = reflect_pulse(p, pulse).samples
    assert np.max(np.abs(filtered - a_out)) < 1e-6
