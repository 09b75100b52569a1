"""End-to-end acceptance checks.

Each test prints a single pass/fail line (visible under pytest -s) so the
suite doubles as a quick report.  Tolerances are contractual: loosening
any of them needs a reason, not a nudge.
"""

from math import exp, log, pi, sqrt

import numpy as np
import pytest

from crosscav.analytic import (
    PreparedStateParams,
    prob_e_single_cavity_detuned,
    prob_e_single_cavity_resonant,
    prob_e_two_cavity,
    robust_coherent_state,
    robust_entangled_state,
    single_excitation_propagator,
    two_mode_space,
)
from crosscav.cli import main
from crosscav.integrator import EvolutionSpec, evolve_master
from crosscav.liouvillian import (
    EnvironmentSpec,
    SymmetricDecayParameters,
    build_general_liouvillian,
    build_symmetric_liouvillian,
    cross_rates_from_environment,
    decompose_symmetric,
    normal_mode_ops,
)
from crosscav.protocol import ProtocolConfig, run_single_cavity, run_two_cavity
from crosscav.tensor import basis_ket, density_from_ket, make_space, number_op
from crosscav.validate import (
    integrated_prob_two_cavity,
    single_excitation_block_propagator,
)

K = 1000.0


def report(name, passed, detail=""):
    tail = f" ({detail})" if detail else ""
    print(f"[{'pass' if passed else 'FAIL'}] {name}{tail}")
    assert passed, f"{name}{tail}"


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[1].split(",")
    rows = [dict(zip(header, l.split(","))) for l in lines[2:]]
    return rows


def test_acceptance_1_phi_sweep(tmp_path):
    """Detection probability vs phi: peak position, height, and visibility."""
    out = tmp_path / "phi.csv"
    assert main(["sweep-phi", "--out", str(out)]) == 0
    rows = read_csv(out)
    theta, gamma, T = pi / 4, pi / 2, 500e-6
    ok, details = True, []
    amplitudes = []
    for r in (500.0, 750.0, 1000.0):
        pts = [
            (float(row["phi_rad"]), float(row["p_e"]))
            for row in rows
            if float(row["r_per_s"]) == r
        ]
        phis = np.array([p for p, _ in pts])
        vals = np.array([v for _, v in pts])
        peak_phi = phis[np.argmax(vals)]
        peak_ok = abs(peak_phi - pi / 2) < 1e-12  # pi/2 lies on the grid
        height_ok = abs(vals.max() - exp(-2 * (K - r) * T)) <= 1e-9
        amplitudes.append(vals.max() - vals.min())
        ok = ok and peak_ok and height_ok
        details.append(f"r={r:.0f}: peak at {peak_phi:.4f}, height ok={height_ok}")
    monotone = amplitudes[0] < amplitudes[1] < amplitudes[2]
    report(
        "criterion 1: phi-sweep peaks at pi/2, heights e^{-2(k-r)T}, "
        "visibility grows with r",
        ok and monotone,
        "; ".join(details),
    )


def test_acceptance_2_time_sweep(tmp_path):
    """Discriminator D(T) closed form, ordering in r, endpoints."""
    out = tmp_path / "time.csv"
    assert main(["sweep-time", "--out", str(out)]) == 0
    rows = read_csv(out)
    r_list = (500.0, 900.0, 1000.0)
    curves = {}
    for r in r_list:
        pts = sorted(
            (float(row["T_s"]), float(row["D"]))
            for row in rows
            if float(row["r_per_s"]) == r
        )
        curves[r] = pts
    dev = max(
        abs(D - (exp(-2 * (K - r) * T) - exp(-2 * K * T)))
        for r, pts in curves.items()
        for T, D in pts
    )
    ordered = all(
        lo[1] <= hi[1] + 1e-12
        for a, b in zip(r_list, r_list[1:])
        for lo, hi in zip(curves[a], curves[b])
    )
    starts_zero = all(curves[r][0][1] == 0.0 for r in r_list)
    saturates = curves[1000.0][-1][1] > 0.98  # 1 - e^{-4} at T = 2 ms
    report(
        "criterion 2: D(T) = e^{-2(k-r)T} - e^{-2kT}, non-decreasing in r, "
        "D(0)=0, D->1 at r=k",
        dev <= 1e-9 and ordered and starts_zero and saturates,
        f"max deviation {dev:.2e}",
    )


def test_acceptance_3_oracle_equivalence():
    """Closed forms vs direct master-equation integration; cross-factor check."""
    rng = np.random.default_rng(20260824)
    dev = 0.0
    for _ in range(20):
        k = rng.uniform(200.0, 2000.0)
        r = rng.uniform(0.0, k)
        gamma = rng.uniform(0.0, 2 * pi)
        theta = rng.uniform(0.0, 2 * pi)
        phi = rng.uniform(0.0, 2 * pi)
        T = rng.uniform(0.0, 2.0 / k)
        p = PreparedStateParams(theta, phi)
        dev = max(
            dev,
            abs(
                prob_e_two_cavity(p, k, r, gamma, T)
                - integrated_prob_two_cavity(theta, phi, k, r, gamma, T)
            ),
            abs(
                prob_e_single_cavity_resonant(k, r, gamma, T)
                - integrated_prob_two_cavity(pi / 4, pi / 2, k, r, gamma, T)
            ),
            abs(
                prob_e_single_cavity_detuned(k, T)
                - integrated_prob_two_cavity(0.0, 0.0, k, 0.0, 0.0, T)
            ),
        )
    # the cross factor is e^{-i gamma}, not r e^{-i gamma}
    k, r, gamma, t = K, 750.0, pi / 2, 500e-6
    M_num = single_excitation_block_propagator(k, r, gamma, t)
    phase_dev = np.abs(
        single_excitation_propagator(k, r, gamma, t) - M_num
    ).max()
    scaled_dev = np.abs(
        single_excitation_propagator(k, r, gamma, t, cross_factor="scaled") - M_num
    ).max()
    report(
        "criterion 3: 20 random tuples agree with brute force; phase-only "
        "cross factor confirmed",
        dev <= 1e-6 and phase_dev <= 1e-6 and scaled_dev > 1e-2,
        f"oracle dev {dev:.2e}, phase dev {phase_dev:.2e}, "
        f"scaled dev {scaled_dev:.2e}",
    )


def test_acceptance_4_dfs_preservation():
    """r = k freezes slow-mode states; r = 0.9k decays them at 2(k - r)."""
    T = 1e-3
    worst_fid, worst_pur, worst_exc = 1.0, 1.0, 0.0
    for gamma in (0.0, pi / 2, 2.5):
        for psi in (
            robust_entangled_state(gamma),
            robust_coherent_state(gamma, 0.3, n_max=8),
        ):
            space = psi.space
            L = build_symmetric_liouvillian(
                SymmetricDecayParameters(K, K, gamma), space
            )
            n_tot = sum(number_op(space, i).matrix for i in range(2))
            rho0 = density_from_ket(psi)
            rho_T = evolve_master(rho0, L, EvolutionSpec(T))
            worst_fid = min(worst_fid, rho_T.fidelity_with_ket(psi))
            worst_pur = min(worst_pur, rho_T.purity())
            worst_exc = max(
                worst_exc,
                abs(
                    np.trace(n_tot @ rho_T.matrix).real
                    - np.trace(n_tot @ rho0.matrix).real
                ),
            )
    # leaky case: slow-mode population decays at 2(k - r)
    r, gamma, t = 0.9 * K, 1.2, 5e-4
    psi = robust_entangled_state(gamma)
    space = psi.space
    L = build_symmetric_liouvillian(SymmetricDecayParameters(K, r, gamma), space)
    A1, _ = normal_mode_ops(space, gamma)
    N1 = (A1.dag() @ A1).matrix
    rho_t = evolve_master(density_from_ket(psi), L, EvolutionSpec(t))
    n0 = np.trace(N1 @ density_from_ket(psi).matrix).real
    nt = np.trace(N1 @ rho_t.matrix).real
    rate = -log(nt / n0) / t
    rate_ok = abs(rate - 2 * (K - r)) <= 0.01 * 2 * (K - r)
    report(
        "criterion 4: decoherence-free states preserved at r=k; "
        "slow-mode rate 2(k-r) at r=0.9k",
        worst_fid >= 1 - 1e-6
        and worst_pur >= 1 - 1e-6
        and worst_exc <= 1e-6
        and rate_ok,
        f"min fidelity {worst_fid:.9f}, min purity {worst_pur:.9f}, "
        f"rate {rate:.1f} vs {2 * (K - r):.1f}",
    )


def test_acceptance_5_channel_invariants():
    """Trace/Hermiticity/positivity along trajectories; builder identities."""
    rng = np.random.default_rng(7)
    space = two_mode_space(1)
    traj_ok = True
    for _ in range(5):
        k = rng.uniform(200.0, 2000.0)
        r = rng.uniform(0.0, k)
        gamma = rng.uniform(0.0, 2 * pi)
        params = SymmetricDecayParameters(k, r, gamma)
        L = build_symmetric_liouvillian(params, space)
        A = rng.normal(size=(space.dim,) * 2) + 1j * rng.normal(
            size=(space.dim,) * 2
        )
        m = A @ A.conj().T
        rho = density_from_ket(basis_ket(space, (1, 0)))
        rho = type(rho)(m / np.trace(m).real, space)
        for t in np.linspace(0.0, 2.0 / k, 5):
            mt = evolve_master(rho, L, EvolutionSpec(t)).matrix
            traj_ok = traj_ok and abs(np.trace(mt) - 1) <= 1e-9
            traj_ok = traj_ok and np.abs(mt - mt.conj().T).max() <= 1e-9
            traj_ok = traj_ok and np.linalg.eigvalsh(mt).min() >= -1e-8
    params = SymmetricDecayParameters(800.0, 450.0, 1.7, omega=2e4)
    builder_dev = np.abs(
        (
            build_symmetric_liouvillian(params, space, "lab").matrix
            - build_general_liouvillian(params.to_general("lab"), space).matrix
        ).toarray()
    ).max()
    L = build_symmetric_liouvillian(params, space, "lab")
    L1, L2 = decompose_symmetric(params, space, "lab")
    split_dev = np.abs((L.matrix - (L1 + L2).matrix).toarray()).max()
    report(
        "criterion 5: channel invariants and builder identities",
        traj_ok and builder_dev <= 1e-12 and split_dev <= 1e-10,
        f"builder dev {builder_dev:.2e}, L1+L2 dev {split_dev:.2e}",
    )


def test_acceptance_6_protocol_fidelity():
    """Pulse sequences hit their target states; no environment means P_e = 1."""
    G = 2 * pi * 47e3
    decay = SymmetricDecayParameters(K, 750.0, pi / 2)
    cfg = ProtocolConfig(G=G, decay=decay, theta=2.1, phi=0.8, T=500e-6)
    two = run_two_cavity(cfg)
    single = run_single_cavity(cfg, "resonant")
    none = SymmetricDecayParameters(0.0, 0.0, 0.0)
    cfg0 = ProtocolConfig(G=G, decay=none, theta=2.1, phi=0.8, T=1e-3)
    p_two = run_two_cavity(cfg0).p_e
    p_res = run_single_cavity(cfg0, "resonant").p_e
    p_det = run_single_cavity(cfg0, "detuned").p_e
    report(
        "criterion 6: preparation fidelity and zero-dissipation unitarity",
        two.prep_fidelity >= 1 - 1e-9
        and single.prep_fidelity >= 1 - 1e-9
        and abs(p_two - 1) <= 1e-9
        and abs(p_res - 1) <= 1e-9
        and abs(p_det - 1) <= 1e-9,
        f"prep fidelities {two.prep_fidelity:.2e}, {single.prep_fidelity:.2e}; "
        f"P_e {p_two:.12f}/{p_res:.12f}/{p_det:.12f}",
    )


def test_acceptance_7_bath_spectrum():
    """Decay constants from a discrete bath spectrum."""
    Om, tau_c = 5e9, 1e-7
    rng = np.random.default_rng(11)
    # identical coupling lists: the cross rate equals the local rate exactly
    entries = [
        (
            rng.normal() + 1j * rng.normal(),
            0.0,
            Om + rng.normal(scale=1e6),
        )
        for _ in range(6)
    ]
    entries = [(a1, a1, w) for a1, _, w in entries]
    p = cross_rates_from_environment(EnvironmentSpec(tuple(entries), tau_c, Om, Om))
    identical_ok = (p.k12 == p.k11) and (p.d12 == p.d11)
    # mirror-symmetric spectrum: conjugate symmetry of the cross rates
    mirrored = []
    for _ in range(4):
        a1 = rng.normal() + 1j * rng.normal()
        a2 = rng.normal() + 1j * rng.normal()
        dw = rng.uniform(1e5, 1e7)
        mirrored += [(a1, a2, Om + dw), (a1, a2, Om - dw)]
    q = cross_rates_from_environment(EnvironmentSpec(tuple(mirrored), tau_c, Om, Om))
    conj_dev = abs((q.k12 + 1j * q.d12) - np.conj(q.k21 + 1j * q.d21))
    scale = abs(q.k12 + 1j * q.d12)
    # single resonant entry: k = |alpha|^2 tau_c
    alpha = 1.3 - 0.4j
    s = cross_rates_from_environment(
        EnvironmentSpec(((alpha, alpha, Om),), tau_c, Om, Om)
    )
    resonant_dev = abs(s.k11 - abs(alpha) ** 2 * tau_c)
    report(
        "criterion 7: bath-spectrum decay constants",
        identical_ok and conj_dev <= 1e-12 * max(scale, 1.0) and resonant_dev <= 1e-12,
        f"conjugate dev {conj_dev:.2e}, resonant dev {resonant_dev:.2e}",
    )
