"""Invariant self-test suites over randomized fixtures.

Each suite function returns a CheckSuite with per-case pass/fail counts.
These are the property tests behind the command-line selftest: measure
monotonicity, additivity, duality gaps, sandwich bounds, constructive
simulations, and the algebraic channel identities. Sample counts are sized
so the whole battery runs in a couple of minutes on a laptop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channel_measures, channels, matcore, sdpcore, state_measures, states

TOL_VALUE = 1e-5
TOL_GAP = 1e-6


@dataclass
class CheckSuite:
    name: str
    passed: int = 0
    total: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, label: str):
        self.total += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(label)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _phi_state(m: int) -> states.DensityMatrix:
    return states.DensityMatrix(matcore.max_entangled(m), m, m)


# ---------------------------------------------------------------------------
# State suites
# ---------------------------------------------------------------------------

def suite_state_normalization() -> CheckSuite:
    s = CheckSuite("state normalization")
    for m in (2, 3, 4):
        val = state_measures.e_kappa_primal(_phi_state(m)).value_bits
        s.record(abs(val - math.log2(m)) <= TOL_VALUE, f"phi{m}: {val}")
    return s


def suite_state_faithfulness() -> CheckSuite:
    s = CheckSuite("state faithfulness")
    for t in (0.1, 1.0 / 3.0, 0.6, 0.9):
        dm = states.make_isotropic(t, 3)
        val = state_measures.e_kappa_primal(dm).value_bits
        ppt = matcore.lambda_min(dm.partial_transpose()) >= -1e-7
        s.record((val <= 1e-6) == ppt, f"isotropic t={t}: {val}, ppt={ppt}")
    for p in (0.2, 0.5, 0.8):
        dm = states.make_werner(p, 2)
        val = state_measures.e_kappa_primal(dm).value_bits
        ppt = matcore.lambda_min(dm.partial_transpose()) >= -1e-7
        s.record((val <= 1e-6) == ppt, f"werner p={p}: {val}, ppt={ppt}")
    return s


def suite_state_ordering(trials: int = 6, seed: int = 11) -> CheckSuite:
    s = CheckSuite("ordering chain E_N <= E_kappa <= log2 Z")
    rng = np.random.default_rng(seed)
    samples = [states.random_density(2, 2, rng=rng) for _ in range(trials // 2)]
    samples += [states.random_density(2, 3, rng=rng) for _ in range(trials - trials // 2)]
    samples.append(states.rho_v())
    for i, dm in enumerate(samples):
        en = state_measures.log_negativity(dm)
        ek = state_measures.e_kappa_primal(dm).value_bits
        z = state_measures.z_upper(dm)
        ok = en <= ek + TOL_GAP and ek <= z + TOL_GAP
        s.record(ok, f"sample {i}: E_N={en:.6f} E={ek:.6f} Z={z:.6f}")
    return s


def suite_state_duality(trials: int = 8, seed: int = 12) -> CheckSuite:
    s = CheckSuite("state strong duality")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        dm = states.random_density(2, 2 if i % 2 == 0 else 3, rng=rng)
        p = state_measures.e_kappa_primal(dm).value_bits
        d = state_measures.e_kappa_dual(dm).value_bits
        s.record(abs(p - d) <= TOL_GAP, f"sample {i}: gap {abs(p - d):.2e}")
    return s


def suite_binegativity_collapse(trials: int = 6, seed: int = 13) -> CheckSuite:
    s = CheckSuite("binegativity collapse to log-negativity")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        dm = states.random_density(2, 2, rng=rng)
        bineg = state_measures.binegativity_holds(dm)
        if not bineg:
            s.record(False, f"two-qubit sample {i}: binegativity failed")
            continue
        en = state_measures.log_negativity(dm)
        ek = state_measures.e_kappa_primal(dm).value_bits
        s.record(abs(en - ek) <= TOL_GAP, f"sample {i}: |E - E_N| = {abs(en - ek):.2e}")
    return s


def suite_state_additivity(pairs: int = 3, seed: int = 14) -> CheckSuite:
    s = CheckSuite("state additivity under tensoring")
    rng = np.random.default_rng(seed)
    for i in range(pairs):
        a = states.random_density(2, 2, rng=rng)
        b = states.random_density(2, 2, rng=rng)
        joint = np.kron(a.mat, b.mat)
        joint = matcore.permute_subsystems(joint, [2, 2, 2, 2], [0, 2, 1, 3])
        dm = states.DensityMatrix(joint, 4, 4)
        ea = state_measures.e_kappa_primal(a).value_bits
        eb = state_measures.e_kappa_primal(b).value_bits
        ej = state_measures.e_kappa_primal(dm).value_bits
        s.record(abs(ej - ea - eb) <= 1e-4, f"pair {i}: defect {abs(ej - ea - eb):.2e}")
    return s


def _sample_cppt_action(rng) -> tuple:
    """Random completely-PPT-preserving action on a 2x2 state.

    Returns (label, function DensityMatrix -> DensityMatrix).
    """
    kind = rng.integers(0, 3)
    if kind == 0:
        n_a = channels.random_channel(2, 2, rng=rng)
        m_b = channels.random_channel(2, 2, rng=rng)
        prod = channels.local_tensor_channel(n_a, m_b)
        return "local product", lambda dm: states.DensityMatrix(
            channels.apply_matrix(prod, dm.mat), 2, 2
        )
    if kind == 1:
        tw = channels.isotropic_twirl_channel(2)
        return "isotropic twirl", lambda dm: states.DensityMatrix(
            channels.apply_matrix(tw, dm.mat), 2, 2
        )
    # measure in the product basis, prepare random product states: an
    # entanglement-binding channel, trivially completely PPT-preserving
    povm = [np.diag([1.0 if i == k else 0.0 for i in range(4)]).astype(complex) for k in range(4)]
    outputs = [
        np.kron(states.random_density(1, 2, rng=rng).mat, states.random_density(1, 2, rng=rng).mat)
        for _ in range(4)
    ]
    mp = channels.measure_prepare_channel(povm, outputs, 4, 4)
    return "measure-prepare binding", lambda dm: states.DensityMatrix(
        channels.apply_matrix(mp, dm.mat), 2, 2
    )


def suite_state_monotonicity(trials: int = 8, seed: int = 15) -> CheckSuite:
    s = CheckSuite("monotonicity under completely-PPT-preserving channels")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        dm = states.random_density(2, 2, rng=rng)
        label, act = _sample_cppt_action(rng)
        before = state_measures.e_kappa_primal(dm).value_bits
        after = state_measures.e_kappa_primal(act(dm)).value_bits
        s.record(after <= before + 1e-5, f"sample {i} ({label}): {before:.6f} -> {after:.6f}")
    return s


def suite_nonconvexity_nonmonogamy() -> CheckSuite:
    s = CheckSuite("non-convexity and non-monogamy witnesses")
    r1, r2, mix = states.nonconvex_mixture()
    e1 = state_measures.e_kappa_primal(r1).value_bits
    e2 = state_measures.e_kappa_primal(r2).value_bits
    em = state_measures.e_kappa_primal(mix).value_bits
    s.record(abs(e1 - 1.0) <= 1e-4, f"rho1: {e1}")
    s.record(e2 <= 1e-4, f"rho2: {e2}")
    s.record(abs(em - math.log2(1.5)) <= 1e-4, f"mixture: {em}")
    s.record(em > 0.5 * (e1 + e2) + 0.05, "strict convexity violation")
    cuts = states.monogamy_marginals()
    e_abc = state_measures.e_kappa_primal(cuts["A|BC"]).value_bits
    e_ab = state_measures.e_kappa_primal(cuts["AB"]).value_bits
    e_ac = state_measures.e_kappa_primal(cuts["AC"]).value_bits
    violation = e_ab + e_ac - e_abc
    s.record(
        abs(violation - (2.0 * math.log2(1.5) - 1.0)) <= 1e-4,
        f"monogamy violation {violation}",
    )
    return s


def suite_one_shot_states(trials: int = 4, seed: int = 16) -> CheckSuite:
    s = CheckSuite("one-shot state cost sandwich and dilution round trip")
    rng = np.random.default_rng(seed)
    samples = [states.random_density(2, 2, rng=rng) for _ in range(trials)]
    samples.append(_phi_state(2))
    for i, dm in enumerate(samples):
        res = state_measures.one_shot_ppt_cost(dm)
        lo, hi = res.sandwich
        ok = lo - 1e-4 <= res.cost_bits <= hi + 1e-4
        s.record(ok, f"sample {i}: cost {res.cost_bits:.6f} not in [{lo:.6f}, {hi:.6f}]")
        _, report = state_measures.build_dilution_channel(dm, res.m_integer, res.g_witness)
        good = report["cp"] and report["tp"] and report["cppt"] and report["reproduces"]
        s.record(good, f"sample {i} dilution report: {report}")
    return s


# ---------------------------------------------------------------------------
# Channel suites
# ---------------------------------------------------------------------------

def suite_channel_values() -> CheckSuite:
    s = CheckSuite("channel closed forms vs SDP")
    grids = [
        (channels.identity_channel(2), 1.0),
        (channels.identity_channel(3), math.log2(3)),
        (channels.erasure_channel(0.3, 2), math.log2(2 * 0.7 + 0.3)),
        (channels.depolarizing_channel(0.3, 2), math.log2(1.4)),
        (channels.depolarizing_channel(0.8, 2), 0.0),
        (channels.dephasing_channel(0.25), math.log2(1.5)),
        (channels.amplitude_damping_channel(0.0), 1.0),
        (channels.amplitude_damping_channel(1.0), 0.0),
    ]
    for ch, expect in grids:
        got = channel_measures.e_kappa_channel_primal(ch).value_bits
        s.record(abs(got - expect) <= TOL_VALUE, f"{ch.family}{ch.params}: {got} vs {expect}")
    return s


def suite_channel_duality(trials: int = 5, seed: int = 21) -> CheckSuite:
    s = CheckSuite("channel strong duality")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        ch = channels.random_channel(2, 2, rng=rng)
        p = channel_measures.e_kappa_channel_primal(ch).value_bits
        d = channel_measures.e_kappa_channel_dual(ch).value_bits
        s.record(abs(p - d) <= TOL_GAP, f"sample {i}: gap {abs(p - d):.2e}")
    return s


def suite_channel_faithfulness() -> CheckSuite:
    s = CheckSuite("channel faithfulness vs PPT binding")
    cases = [
        channels.dephasing_channel(0.5),
        channels.dephasing_channel(0.3),
        channels.erasure_channel(1.0, 2),
        channels.depolarizing_channel(0.9, 2),
        channels.identity_channel(2),
    ]
    for ch in cases:
        val = channel_measures.e_kappa_channel_primal(ch).value_bits
        binding = channels.channel_checks(ch)["ppt_binding"]
        s.record((val <= 1e-6) == binding, f"{ch.family}{ch.params}: {val}, binding={binding}")
    return s


def suite_channel_additivity(pairs: int = 2, seed: int = 22) -> CheckSuite:
    s = CheckSuite("channel additivity under tensoring")
    rng = np.random.default_rng(seed)
    for i in range(pairs):
        a = channels.random_channel(2, 2, rng=rng)
        b = channels.random_channel(2, 2, rng=rng)
        ea = channel_measures.e_kappa_channel_primal(a).value_bits
        eb = channel_measures.e_kappa_channel_primal(b).value_bits
        ej = channel_measures.e_kappa_channel_primal(channels.tensor(a, b)).value_bits
        s.record(abs(ej - ea - eb) <= 1e-4, f"pair {i}: defect {abs(ej - ea - eb):.2e}")
    return s


def _amortized_pair(ch, rho_full: np.ndarray):
    """Input cut (A'A | B') value and output cut (A' | B B') value for N on A."""
    dm_in = states.DensityMatrix(rho_full, 4, 2)
    e_in = state_measures.e_kappa_primal(dm_in).value_bits
    moved = matcore.permute_subsystems(rho_full, [2, 2, 2], [0, 2, 1])  # A' B' A
    out = channels.apply_matrix(ch, moved, d_spectator=4)  # A' B' B
    out = matcore.permute_subsystems(out, [2, 2, 2], [0, 2, 1])  # A' B B'
    e_out = state_measures.e_kappa_primal(states.DensityMatrix(out, 2, 4)).value_bits
    return e_in, e_out


def suite_amortization(trials: int = 3, seed: int = 23) -> CheckSuite:
    s = CheckSuite("amortization inequality and saturation")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        ch = channels.random_channel(2, 2, rng=rng)
        e_ch = channel_measures.e_kappa_channel_primal(ch).value_bits
        rho = states.random_density(4, 2, rng=rng).mat
        e_in, e_out = _amortized_pair(ch, rho)
        s.record(
            e_out - e_in <= e_ch + 1e-5,
            f"sample {i}: gain {e_out - e_in:.6f} > channel {e_ch:.6f}",
        )
    # saturation: feeding half of a fresh maximally entangled pair through the
    # channel gains exactly the channel value when the witness input is optimal
    ch = channels.dephasing_channel(0.25)
    e_ch = channel_measures.e_kappa_channel_primal(ch).value_bits
    phi = matcore.max_entangled(2)
    rho = np.kron(phi, np.eye(2) / 2.0)  # A' A (x) B', product with idle B'
    rho = matcore.permute_subsystems(rho, [2, 2, 2], [0, 1, 2])
    e_in, e_out = _amortized_pair(ch, rho)
    s.record(
        e_out - e_in >= e_ch - 1e-5,
        f"saturation: gain {e_out - e_in:.6f} < channel {e_ch:.6f}",
    )
    return s


def suite_superchannel_monotonicity(trials: int = 4, seed: int = 24) -> CheckSuite:
    s = CheckSuite("monotonicity under pre/post processing superchannels")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        ch = channels.random_channel(2, 2, rng=rng)
        pre = channels.random_channel(2, 2, rng=rng)
        post = channels.random_channel(2, 2, rng=rng)
        sandwiched = channels.compose(post, channels.compose(ch, pre))
        before = channel_measures.e_kappa_channel_primal(ch).value_bits
        after = channel_measures.e_kappa_channel_primal(sandwiched).value_bits
        s.record(after <= before + 1e-5, f"sample {i}: {before:.6f} -> {after:.6f}")
    return s


def suite_covariant_collapse() -> CheckSuite:
    s = CheckSuite("covariant channel value equals Choi-state value")
    cases = [
        channels.erasure_channel(0.2, 2),
        channels.erasure_channel(0.6, 2),
        channels.depolarizing_channel(0.25, 2),
        channels.depolarizing_channel(0.6, 2),
        channels.dephasing_channel(0.15),
    ]
    for ch in cases:
        e_ch = channel_measures.e_kappa_channel_primal(ch).value_bits
        e_state = state_measures.e_kappa_primal(ch.choi_state()).value_bits
        s.record(
            abs(e_ch - e_state) <= 1e-5,
            f"{ch.family}{ch.params}: {e_ch:.6f} vs {e_state:.6f}",
        )
    return s


def suite_q_theta(trials: int = 3, seed: int = 25) -> CheckSuite:
    s = CheckSuite("partial transposition bound")
    val = channel_measures.q_theta(channels.identity_channel(2))
    s.record(abs(val - 1.0) <= 1e-5, f"id2: {val}")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        ch = channels.random_channel(2, 2, rng=rng)
        qt = channel_measures.q_theta(ch)
        ek = channel_measures.e_kappa_channel_primal(ch).value_bits
        s.record(qt <= ek + 1e-5, f"sample {i}: Q {qt:.6f} > E {ek:.6f}")
        s.record(abs(qt - ek) <= 1e-4, f"sample {i} qubit equality: |{qt:.6f} - {ek:.6f}|")
    return s


def suite_one_shot_channels(trials: int = 2, seed: int = 26) -> CheckSuite:
    s = CheckSuite("one-shot channel cost sandwich and simulation round trip")
    rng = np.random.default_rng(seed)
    cases = [channels.random_channel(2, 2, rng=rng) for _ in range(trials)]
    cases.append(channels.dephasing_channel(0.25))
    for i, ch in enumerate(cases):
        rep = channel_measures.one_shot_channel_cost(ch)
        e = rep.parallel_asymptotic_bits
        lo = math.log2(2.0**e - 1.0) if e > 1e-9 else 0.0
        hi = math.log2(2.0**e + 1.0)
        ok = lo - 1e-4 <= rep.one_shot_bits <= hi + 1e-4
        s.record(ok, f"case {i}: cost {rep.one_shot_bits:.6f} not in [{lo:.6f}, {hi:.6f}]")
        _, report = channel_measures.build_parallel_simulation(
            ch, rep.m_integer, rep.q_choi_witness
        )
        good = report["cp"] and report["tp"] and report["cppt"] and report["reproduces"]
        s.record(good, f"case {i} simulation report: {report}")
    return s


def suite_teleportation_identity(trials: int = 10, seed: int = 27) -> CheckSuite:
    s = CheckSuite("Choi contraction equals Kraus application")
    rng = np.random.default_rng(seed)
    for i in range(trials):
        d_in = int(rng.integers(2, 4))
        d_out = int(rng.integers(2, 4))
        ch = channels.random_channel(d_in, d_out, rng=rng)
        w, v = np.linalg.eigh(ch.choi)
        kraus = [
            math.sqrt(max(float(wi), 0.0)) * v[:, k].reshape(d_in, d_out).T
            for k, wi in enumerate(w)
            if wi > 1e-12
        ]
        rho = states.random_density(1, d_in, rng=rng).mat
        a = channels.apply_matrix(ch, rho)
        b = channels.apply_kraus(kraus, rho)
        s.record(np.abs(a - b).max() <= 1e-12, f"pair {i}")
    return s


def suite_gaussian_forms() -> CheckSuite:
    s = CheckSuite("Gaussian closed-form evaluator")
    gc = channel_measures.gaussian_cost
    P = channels.GaussianChannelParams
    r = gc(P("thermal", eta=0.5, n_b=0.25))
    s.record(r.tag == "Value" and abs(r.value_bits - 1.0) <= 1e-12, f"thermal: {r}")
    r = gc(P("additive_noise", xi=0.5))
    s.record(r.tag == "Value" and abs(r.value_bits - 1.0) <= 1e-12, f"additive noise: {r}")
    r = gc(P("thermal", eta=1.0 / 3.0, n_b=1.0))
    s.record(r.tag == "Zero", f"entanglement-breaking thermal: {r}")
    r = gc(P("pure_loss", eta=0.5))
    s.record(r.tag == "Conjecture" and abs(r.value_bits - math.log2(3)) <= 1e-12, f"pure loss: {r}")
    r = gc(P("identity"))
    s.record(r.tag == "Infinite", f"bosonic identity: {r}")
    return s


STATE_SUITES = [
    suite_state_normalization,
    suite_state_faithfulness,
    suite_state_ordering,
    suite_state_duality,
    suite_binegativity_collapse,
    suite_state_additivity,
    suite_state_monotonicity,
    suite_nonconvexity_nonmonogamy,
    suite_one_shot_states,
]

CHANNEL_SUITES = [
    suite_channel_values,
    suite_channel_duality,
    suite_channel_faithfulness,
    suite_channel_additivity,
    suite_amortization,
    suite_superchannel_monotonicity,
    suite_covariant_collapse,
    suite_q_theta,
    suite_one_shot_channels,
    suite_teleportation_identity,
    suite_gaussian_forms,
]


def run_all() -> list[CheckSuite]:
    return [fn() for fn in STATE_SUITES + CHANNEL_SUITES]
