"""Formula-level checks: frozen hand-derived values and structural properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semoff import model
from semoff.model import (
    AgentProfile,
    InconsistencyError,
    ModelDomainError,
    SystemParams,
)

from helpers import TABLE_PARAMS, table_agent

REL = 1e-12


def test_snr_gate_examples():
    # gamma = p_max * gain / noise; threshold comparison is inclusive
    at_threshold = model.snr(TABLE_PARAMS, table_agent(4e-11))
    assert at_threshold.snr == pytest.approx(1.0, rel=REL)
    assert at_threshold.feasible

    below = model.snr(TABLE_PARAMS, table_agent(2e-11))
    assert below.snr == pytest.approx(0.5, rel=REL)
    assert not below.feasible


def test_compression_time_examples():
    agent = table_agent(1e-9)
    assert model.compression_time(agent, 1.0) == 0.0
    assert model.compression_time(agent, math.exp(-1.0)) == pytest.approx(0.1, rel=REL)
    # 10 * 1e7 * ln(10) / 1e9 = 0.1 * ln(10)
    assert model.compression_time(agent, 0.1) == pytest.approx(
        0.1 * math.log(10.0), rel=REL
    )


@pytest.mark.parametrize("bad_rho", [0.0, -0.5, 1.0000001, 2.0])
def test_compression_time_domain(bad_rho):
    with pytest.raises(ModelDomainError):
        model.compression_time(table_agent(1e-9), bad_rho)


def test_achievable_rate_examples():
    agent = table_agent(4e-11)  # gain/noise = 1, so snr equals power
    assert model.achievable_rate(TABLE_PARAMS, agent, 1.0) == pytest.approx(1e6, rel=REL)
    assert model.achievable_rate(TABLE_PARAMS, agent, 3.0) == pytest.approx(2e6, rel=REL)
    with pytest.raises(ModelDomainError):
        model.achievable_rate(TABLE_PARAMS, agent, 0.0)


def test_rate_monotone_and_concave_in_power():
    agent = table_agent(1e-10)
    powers = [0.01 * (i + 1) for i in range(100)]
    rates = [model.achievable_rate(TABLE_PARAMS, agent, p) for p in powers]
    diffs = [b - a for a, b in zip(rates, rates[1:])]
    assert all(d > 0.0 for d in diffs)
    assert all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))


def test_power_for_rate_inverts_rate():
    agent = table_agent(7e-10)
    for p in (1e-4, 0.03, 0.4, 1.0):
        rate = model.achievable_rate(TABLE_PARAMS, agent, p)
        assert model.power_for_rate(TABLE_PARAMS, agent, rate) == pytest.approx(p, rel=1e-12)


def test_comm_time_examples():
    agent = table_agent(1e-9)
    assert model.comm_time(agent, 0.1, 1e6) == pytest.approx(1.0, rel=REL)
    assert model.comm_time(agent, 0.5, 2e6) == pytest.approx(2.5, rel=REL)
    unit = AgentProfile(data_bits=1e6, complexity=10.0, cpu_hz=1e9, channel_gain=1e-9)
    assert model.comm_time(unit, 1.0, 1e6) == pytest.approx(1.0, rel=REL)
    with pytest.raises(ModelDomainError):
        model.comm_time(agent, 0.1, 0.0)


def test_local_time_examples():
    assert model.local_time(TABLE_PARAMS, table_agent(1e-9)) == pytest.approx(1.0, rel=REL)
    # the reference protocol's local processing exceeds its own deadline
    assert model.local_time(TABLE_PARAMS, table_agent(1e-9)) > TABLE_PARAMS.deadline_s
    half = AgentProfile(data_bits=5e6, complexity=10.0, cpu_hz=1e9, channel_gain=1e-9)
    assert model.local_time(TABLE_PARAMS, half) == pytest.approx(0.5, rel=REL)


def test_bs_energy_examples():
    agent = table_agent(4e-11)
    e_comp, _, _ = model.bs_energy(TABLE_PARAMS, agent, 1.0, 0.5)
    assert e_comp == 0.0

    e_comp, _, _ = model.bs_energy(TABLE_PARAMS, agent, math.exp(-1.0), 0.5)
    assert e_comp == pytest.approx(0.01, rel=REL)

    # rho*D = 5e5 bits at 1e6 bit/s (power 1 on a unit-snr link) is 0.5 s
    half = AgentProfile(data_bits=5e6, complexity=10.0, cpu_hz=1e9, channel_gain=4e-11)
    _, e_comm, e_total = model.bs_energy(TABLE_PARAMS, half, 0.1, 1.0)
    assert e_comm == pytest.approx(0.5, rel=REL)
    assert e_total == pytest.approx(0.5 + model.bs_energy(TABLE_PARAMS, half, 0.1, 1.0)[0], rel=REL)


def test_local_energy_examples():
    assert model.local_energy(TABLE_PARAMS, table_agent(1e-9)) == pytest.approx(0.1, rel=REL)
    double = AgentProfile(data_bits=2e7, complexity=10.0, cpu_hz=1e9, channel_gain=1e-9)
    assert model.local_energy(TABLE_PARAMS, double) == pytest.approx(0.2, rel=REL)


@given(
    beta=st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
    xi=st.floats(min_value=0.0, max_value=10.0),
)
def test_usl_gain_is_one_for_single_agent(beta, xi):
    params = SystemParams(
        bandwidth_hz=1e6,
        noise_w=4e-11,
        p_max_w=1.0,
        snr_threshold=1.0,
        deadline_s=0.7,
        rho_min=0.1,
        base_task_energy_j=0.1,
        usl_beta=beta,
        usl_xi=xi,
        switched_cap=1e-28,
        local_cycles_per_bit=100.0,
    )
    assert model.usl_gain(params, 1) == pytest.approx(1.0, abs=1e-15)


def test_usl_gain_reference_values():
    assert model.usl_gain(TABLE_PARAMS, 2) == pytest.approx(0.808, rel=REL)
    assert model.usl_gain(TABLE_PARAMS, 10) == pytest.approx(0.712, rel=REL)
    with pytest.raises(ModelDomainError):
        model.usl_gain(TABLE_PARAMS, 0)


def test_usl_gain_dips_then_rises():
    gains = [model.usl_gain(TABLE_PARAMS, k) for k in range(1, 60)]
    diffs = [b - a for a, b in zip(gains, gains[1:])]
    sign_changes = sum(
        1 for d1, d2 in zip(diffs, diffs[1:]) if (d1 < 0.0) != (d2 < 0.0)
    )
    assert sign_changes <= 1
    assert diffs[0] < 0.0  # the amortized share dominates early
    assert diffs[-1] > 0.0  # contention dominates late


def test_collaboration_saving_examples():
    assert model.collaboration_saving(TABLE_PARAMS, 1) == 0.0
    assert model.collaboration_saving(TABLE_PARAMS, 2) == pytest.approx(0.0384, rel=REL)
    # contention makes large clusters a net loss
    assert model.usl_gain(TABLE_PARAMS, 60) > 1.0
    assert model.collaboration_saving(TABLE_PARAMS, 60) < 0.0


def test_task_energy_examples():
    assert model.task_energy(TABLE_PARAMS, 0) == pytest.approx(0.1, rel=REL)
    assert model.task_energy(TABLE_PARAMS, 1, 2) == pytest.approx(0.0808, rel=REL)
    assert model.task_energy(TABLE_PARAMS, 1, 1) == pytest.approx(0.1, rel=REL)
    with pytest.raises(ModelDomainError):
        model.task_energy(TABLE_PARAMS, 2)


def test_evaluate_bs_structural_invariants():
    agent = table_agent(8e-10)
    ev = model.evaluate_bs(TABLE_PARAMS, agent, 0.3, 0.25)
    assert ev.mode == 1
    assert ev.t_bs == pytest.approx(ev.t_comp + ev.t_comm, rel=REL)
    assert ev.e_bs == pytest.approx(ev.e_comp + ev.e_comm, rel=REL)
    assert ev.compressed_bits == pytest.approx(0.3 * agent.data_bits, rel=REL)
    assert ev.delta_save == pytest.approx(ev.e_local - ev.e_bs, rel=REL)
    assert min(ev.t_comp, ev.t_comm, ev.e_comp, ev.e_comm) >= 0.0


def test_evaluate_local_is_all_zero_on_offload_path():
    ev = model.evaluate_local(TABLE_PARAMS, table_agent(1e-9))
    assert ev.mode == 0
    assert (ev.t_comp, ev.t_comm, ev.t_bs, ev.e_comp, ev.e_comm, ev.e_bs) == (0.0,) * 6
    assert ev.e_local == pytest.approx(0.1, rel=REL)
    assert ev.t_local == pytest.approx(1.0, rel=REL)


def test_network_energy_all_local():
    for n in (1, 7, 15):
        evals = [model.evaluate_local(TABLE_PARAMS, table_agent(1e-9)) for _ in range(n)]
        assert model.network_energy(TABLE_PARAMS, evals, 0) == pytest.approx(
            0.2 * n, rel=1e-9
        )
    assert model.network_energy(TABLE_PARAMS, [], 0) == 0.0


def test_network_energy_rejects_mismatched_k():
    evals = [model.evaluate_local(TABLE_PARAMS, table_agent(1e-9))]
    with pytest.raises(InconsistencyError):
        model.network_energy(TABLE_PARAMS, evals, 1)


@settings(deadline=None, max_examples=60)
@given(data=st.data())
def test_network_energy_matches_reformulated_objective(data):
    """Direct per-agent accounting equals baseline - cluster saving - savings sum."""
    n = data.draw(st.integers(min_value=1, max_value=8))
    gains = data.draw(
        st.lists(
            st.floats(min_value=1e-10, max_value=1e-7), min_size=n, max_size=n
        )
    )
    modes = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    rhos = data.draw(
        st.lists(st.floats(min_value=0.11, max_value=1.0), min_size=n, max_size=n)
    )
    powers = data.draw(
        st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=n, max_size=n)
    )

    agents = [table_agent(g) for g in gains]
    k = sum(modes)
    if 0 < k < 2:
        modes = [False] * n
        k = 0
    evals = [
        model.evaluate_bs(TABLE_PARAMS, a, r, p)
        if m
        else model.evaluate_local(TABLE_PARAMS, a)
        for a, m, r, p in zip(agents, modes, rhos, powers)
    ]
    direct = model.network_energy(TABLE_PARAMS, evals, k)

    baseline = sum(
        model.local_energy(TABLE_PARAMS, a) + TABLE_PARAMS.base_task_energy_j
        for a in agents
    )
    saving = model.collaboration_saving(TABLE_PARAMS, k) if k else 0.0
    transferred = sum(ev.delta_save for ev in evals if ev.mode == 1)
    assert direct == pytest.approx(baseline - saving - transferred, rel=1e-12)


def test_compression_monotone_decreasing_in_rho():
    agent = table_agent(1e-9)
    rhos = [0.05 + 0.01 * i for i in range(95)]
    times = [model.compression_time(agent, r) for r in rhos]
    assert all(b < a for a, b in zip(times, times[1:]))
    energies = [model.bs_energy(TABLE_PARAMS, agent, r, 0.5)[0] for r in rhos]
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_params_validation():
    with pytest.raises(ModelDomainError):
        SystemParams(
            bandwidth_hz=-1.0,
            noise_w=4e-11,
            p_max_w=1.0,
            snr_threshold=1.0,
            deadline_s=0.7,
            rho_min=0.1,
            base_task_energy_j=0.1,
            usl_beta=0.4,
            usl_xi=0.008,
            switched_cap=1e-28,
            local_cycles_per_bit=100.0,
        )
    with pytest.raises(ModelDomainError):
        AgentProfile(data_bits=0.0, complexity=10.0, cpu_hz=1e9, channel_gain=1e-9)
