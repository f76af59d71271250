import numpy as np
import pytest

from geomgates import fields, gates, pauli, phases

RNG_SEED = 20240509

P = fields.NmrParams(omega0=2.0, omega1=0.9, omega=1.1)


def _projector_form(chi, gamma):
    """Independent construction: e^{i gamma} P+ + e^{-i gamma} P-."""
    pair = phases.cyclic_pair(chi)
    pp = np.outer(pair.psi_plus, pair.psi_plus.conj())
    pm = np.outer(pair.psi_minus, pair.psi_minus.conj())
    return np.exp(1j * gamma) * pp + np.exp(-1j * gamma) * pm


def test_build_gate_matches_projector_construction():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(40):
        chi, gamma = rng.uniform(-np.pi, np.pi, 2)
        u = gates.build_gate(gates.GateSpec(chi, gamma))
        assert np.allclose(u, _projector_form(chi, gamma), atol=1e-13)
        assert pauli.unitarity_defect(u) < 1e-14


def test_build_gate_special_points():
    # gamma = pi flips every state's sign regardless of the cone
    for chi in (0.3, 1.2, 2.9):
        assert np.allclose(gates.build_gate(gates.GateSpec(chi, np.pi)), -np.eye(2), atol=1e-15)
    # equatorial cone with quarter phase: i sigma_x (a NOT up to phase)
    u = gates.build_gate(gates.GateSpec(np.pi / 2.0, np.pi / 2.0))
    assert np.allclose(u, 1j * pauli.SIGMA_X, atol=1e-15)
    # polar cone: pure z phase gate
    u = gates.build_gate(gates.GateSpec(0.0, 0.7))
    assert np.allclose(u, np.diag([np.exp(0.7j), np.exp(-0.7j)]), atol=1e-15)


def test_gate_eigenphases_on_pair():
    chi, gamma = 0.9, -1.3
    pair = phases.cyclic_pair(chi)
    u = gates.build_gate(gates.GateSpec(chi, gamma))
    assert np.max(np.abs(u @ pair.psi_plus - np.exp(1j * gamma) * pair.psi_plus)) < 1e-14
    assert np.max(np.abs(u @ pair.psi_minus - np.exp(-1j * gamma) * pair.psi_minus)) < 1e-14


def test_noncommutable_matches_commutator():
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(300):
        a = gates.GateSpec(*rng.uniform(-np.pi, np.pi, 2))
        b = gates.GateSpec(*rng.uniform(-np.pi, np.pi, 2))
        ua, ub = gates.build_gate(a), gates.build_gate(b)
        comm = float(np.max(np.abs(ua @ ub - ub @ ua)))
        assert gates.noncommutable(a, b) == (comm > 1e-9)
    # the zero set: equal cones, or either gamma a multiple of pi
    same = gates.GateSpec(0.4, 0.9)
    assert not gates.noncommutable(same, gates.GateSpec(0.4, -2.0))
    assert not gates.noncommutable(gates.GateSpec(0.1, np.pi), gates.GateSpec(1.0, 0.9))
    assert not gates.noncommutable(gates.GateSpec(0.1, 0.0), gates.GateSpec(1.0, 0.9))
    assert gates.noncommutable(gates.GateSpec(0.1, 0.5), gates.GateSpec(1.0, 0.9))


def test_commutator_magnitude_identity():
    # largest commutator entry = 2 |sin g1 sin g2 sin(chi2 - chi1)|
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(50):
        a = gates.GateSpec(*rng.uniform(-np.pi, np.pi, 2))
        b = gates.GateSpec(*rng.uniform(-np.pi, np.pi, 2))
        ua, ub = gates.build_gate(a), gates.build_gate(b)
        comm = float(np.max(np.abs(ua @ ub - ub @ ua)))
        crit = 2.0 * abs(np.sin(a.gamma) * np.sin(b.gamma) * np.sin(b.chi - a.chi))
        assert abs(comm - crit) < 1e-12


def test_build_two_qubit_block_structure():
    tq = gates.TwoQubitGateSpec(gates.GateSpec(0.4, 0.9), gates.GateSpec(1.1, -0.3))
    u4 = gates.build_two_qubit(tq)
    assert np.allclose(u4[:2, :2], gates.build_gate(tq.spec0))
    assert np.allclose(u4[2:, 2:], gates.build_gate(tq.spec1))
    assert np.max(np.abs(u4[:2, 2:])) == 0.0 and np.max(np.abs(u4[2:, :2])) == 0.0
    assert pauli.unitarity_defect(u4) < 1e-14


def test_nontrivial_vs_separability():
    distinct = gates.TwoQubitGateSpec(gates.GateSpec(0.4, 0.9), gates.GateSpec(1.1, -0.3))
    assert gates.nontrivial_two_qubit(distinct)
    assert not gates.block_phase_separable(gates.build_two_qubit(distinct))
    equal = gates.TwoQubitGateSpec(gates.GateSpec(0.4, 0.9), gates.GateSpec(0.4, 0.9))
    assert not gates.nontrivial_two_qubit(equal)
    assert gates.block_phase_separable(gates.build_two_qubit(equal))


def test_antipodal_gamma_branch_is_phase_separable():
    # equal cones with gamma offset pi: U1 = -U0, a local operation even
    # though the parameters differ -- the documented corner case where the
    # parameter criterion and strict separability part ways
    spec = gates.GateSpec(0.8, 0.6)
    anti = gates.GateSpec(0.8, 0.6 + np.pi)
    assert np.allclose(gates.build_gate(anti), -gates.build_gate(spec), atol=1e-14)
    tq = gates.TwoQubitGateSpec(spec, anti)
    assert gates.nontrivial_two_qubit(tq)
    assert gates.block_phase_separable(gates.build_two_qubit(tq))


def test_gate_fidelity_and_alignment():
    u = gates.build_gate(gates.GateSpec(0.7, 1.1))
    v = np.exp(0.9j) * u
    assert abs(gates.gate_fidelity(u, v) - 1.0) < 1e-14
    assert gates.max_aligned_deviation(u, v) < 1e-14
    ph = gates.align_phase(u, v)
    assert np.max(np.abs(ph * v - u)) < 1e-14
    w = gates.build_gate(gates.GateSpec(0.7, 1.3))
    assert gates.gate_fidelity(u, w) < 1.0 - 1e-4


def test_reconstruct_gate_from_runs_matches_cone_form(accurate):
    s = fields.nmr_schedule(P)
    pair = phases.cyclic_pair_nmr(P)
    u = gates.reconstruct_gate_from_runs(s, pair, accurate)
    gamma = gates.measured_loop_phase(s, pair, accurate)
    target = gates.build_gate(gates.GateSpec(pair.chi, gamma))
    assert gates.max_aligned_deviation(target, u) < 1e-8
    # the loop eigenphase is the full (dynamical + geometric) phase; the
    # rotating frame gives it in closed form
    omega_eff = np.hypot(P.omega0, P.omega1 + P.omega)
    expected = np.pi + np.pi * omega_eff / P.omega
    assert abs(pauli.wrap_pi(gamma - expected)) < 1e-8


def test_reconstruct_rejects_noncyclic_pair(accurate):
    s = fields.nmr_schedule(P)
    wrong = phases.cyclic_pair(phases.cyclic_pair_nmr(P).chi + 0.4)
    with pytest.raises(ValueError):
        gates.reconstruct_gate_from_runs(s, wrong, accurate)


def test_double_loop_echo_cancels_dynamical_phase(accurate):
    s = fields.nmr_schedule(P)
    pair = phases.cyclic_pair_nmr(P)
    rep = gates.synthesize_double_loop(s, pair, accurate)
    assert rep.flags["dynamical_cancelled"]
    assert rep.flags["cyclic"]
    assert rep.flags["identity_reached"]
    assert abs(rep.dynamical_sum) < 1e-8
    assert rep.deviation_identity < 1e-8
    assert abs(rep.loop2["dynamical"] + rep.loop1["dynamical"]) < 1e-8
    assert abs(rep.loop2["geometric"] + rep.loop1["geometric"]) < 1e-8


def test_double_loop_time_reversed_rule_does_not_cancel(accurate):
    # retracing without the sign flip reverses the geometry instead of the
    # energy: the dynamical phases add up
    s = fields.nmr_schedule(P)
    pair = phases.cyclic_pair_nmr(P)
    rep = gates.synthesize_double_loop(s, pair, accurate, reversal="time_reversed")
    assert not rep.flags["dynamical_cancelled"]
    assert abs(rep.dynamical_sum) > 0.1


def test_double_loop_unknown_rule_rejected(accurate):
    s = fields.nmr_schedule(P)
    pair = phases.cyclic_pair_nmr(P)
    with pytest.raises(KeyError):
        gates.synthesize_double_loop(s, pair, accurate, reversal="nope")


def test_gate_report_json_round_trip(tmp_path, accurate):
    import json

    s = fields.nmr_schedule(P)
    pair = phases.cyclic_pair_nmr(P)
    rep = gates.synthesize_double_loop(s, pair, accurate)
    path = tmp_path / "report.json"
    gates.gate_report_to_json(rep, path)
    doc = json.loads(path.read_text())
    m = np.array(doc["matrix_re"]) + 1j * np.array(doc["matrix_im"])
    assert np.allclose(m, rep.matrix)
    assert doc["flags"]["dynamical_cancelled"] is True
