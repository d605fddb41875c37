#!/usr/bin/env python3
"""Tests for the protocol, backend, estimation, metrics and reporting layers.

Everything here runs in-process on the simulators; no files are written
except where a test asks pytest for a temporary directory.
"""

import dataclasses
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.backends import (
    AnnealerSimulator,
    GateModelSimulator,
    QANoiseModel,
    QCNoiseModel,
    SampleRequest,
    get_backend,
    make_noise,
    qa_outcome_probabilities,
    qa_outcome_probability,
    qc_outcome_probabilities,
    qc_outcome_probability,
    statevector_probability,
    stream_generator,
)
from src.errors import ConsistencyError, InsufficientDataError, InvalidArgumentError
from src.estimation import (
    clamp_bound,
    curve_from_cells,
    curve_from_estimates,
    heff_from_counts,
    heff_from_mean,
    heff_from_probabilities,
)
from src.metrics import fit_response_bias, metrics_for_qubit, saturations
from src.models import (
    ComputeModel,
    FitWindow,
    HistogramSpec,
    MetricStat,
    NativeGate,
    NativeGateSequence,
    QubitMetrics,
    QubitProgram,
    ShotCounts,
)
from src.protocol import (
    SweepGrid,
    build_anneal_program,
    build_gate_program,
    build_sweep,
    equivalent_up_to_phase,
    normalize_to_native,
    phi_values,
    program_unitary,
    sequence_unitary,
    theta_from_hin,
)
from src.reporting import (
    histogram,
    render,
    summaries_from_csv,
    summaries_from_json,
    summarize_chip,
    summarize_chips,
    summarize_fleet,
)


def exact_curve(backend, hs, beta=10.0, phi=0.0):
    """Response curve from closed-form probabilities."""
    pairs = []
    for h in hs:
        if backend.compute_model is ComputeModel.GATE:
            program = build_gate_program(h, beta, phi)
        else:
            program = build_anneal_program(h)
        pairs.append((h, heff_from_probabilities(*backend.outcome_probabilities(program))))
    return curve_from_estimates(pairs, backend_id=backend.backend_id, beta=beta)


def sampled_curve(backend, hs, shots, seed, beta=10.0, phi=0.0, variant=0):
    cells = []
    for point, h in enumerate(hs):
        program = build_gate_program(h, beta, phi)
        request = SampleRequest(program=program, shots=shots, seed=seed, stream_key=(0, point), variant=variant)
        cells.append((h, backend.sample(request)))
    return curve_from_cells(cells, backend_id=backend.backend_id, beta=beta, shots=shots, seed=seed)


def grid(count, lo=-1.0, hi=1.0):
    return build_sweep(SweepGrid(lo, hi, count))


# ---------------------------------------------------------------- protocol


def test_theta_mapping():
    assert theta_from_hin(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert theta_from_hin(1.0, beta=10) == pytest.approx(math.acos(math.tanh(10.0)), rel=1e-6)
    assert 0.0 < theta_from_hin(1.0) < 1e-4
    assert math.pi - 1e-4 < theta_from_hin(-1.0) < math.pi
    # steep fields saturate instead of overflowing the exponential
    assert theta_from_hin(-1.0, beta=1000.0) == pytest.approx(math.pi, abs=1e-15)
    assert theta_from_hin(1.0, beta=1000.0) == 0.0
    assert theta_from_hin(-0.02, beta=10) == pytest.approx(math.pi - theta_from_hin(0.02, beta=10), abs=1e-15)
    # cos(theta) reproduces tanh(beta*h) across the range
    for h in (-0.3, -0.05, 0.0, 0.07, 0.4):
        assert math.cos(theta_from_hin(h, 10.0)) == pytest.approx(math.tanh(10.0 * h), abs=1e-14)


def test_theta_rejects_bad_inputs():
    with pytest.raises(InvalidArgumentError):
        theta_from_hin(float("nan"))
    with pytest.raises(InvalidArgumentError):
        theta_from_hin(0.1, beta=0.0)
    with pytest.raises(InvalidArgumentError):
        build_gate_program(1.5)
    with pytest.raises(InvalidArgumentError):
        build_anneal_program(-1.01)


def test_sweep_grid():
    hs = grid(900)
    assert len(hs) == 900
    assert hs[0] == -1.0 and hs[-1] == 1.0
    assert all(b > a for a, b in zip(hs, hs[1:]))
    assert grid(81)[40] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        SweepGrid(-1.0, 1.0, 1)
    with pytest.raises(InvalidArgumentError):
        SweepGrid(0.5, -0.5, 10)
    with pytest.raises(InvalidArgumentError):
        SweepGrid(-2.0, 1.0, 10)


def test_phi_values():
    phis = phi_values(10)
    assert len(phis) == 10
    assert phis[0] == 0.0
    assert phis[-1] == pytest.approx(2 * math.pi)


def test_program_types():
    gate = build_gate_program(0.2, 10.0)
    assert gate.model is ComputeModel.GATE and gate.phi == 0.0
    anneal = build_anneal_program(0.2)
    assert anneal.field == 0.2 and anneal.theta is None
    with pytest.raises(InvalidArgumentError):
        QubitProgram(model=ComputeModel.GATE, theta=4.0)
    with pytest.raises(InvalidArgumentError):
        QubitProgram(model=ComputeModel.ANNEAL, field=0.1, theta=0.3)


def test_native_sequence_for_identity_keeps_five_gates():
    program = QubitProgram(model=ComputeModel.GATE, theta=0.0, phi=0.0)
    sequence = normalize_to_native(program)
    assert len(sequence) == 5
    assert [g.name for g in sequence.gates] == ["rz", "sx", "rz", "sx", "rz"]
    assert equivalent_up_to_phase(sequence_unitary(sequence), np.eye(2))


def test_native_sequence_random_programs():
    rng = np.random.default_rng(20240601)
    for theta, phi in zip(rng.uniform(0, math.pi, 1000), rng.uniform(0, 2 * math.pi, 1000)):
        program = QubitProgram(model=ComputeModel.GATE, theta=float(theta), phi=float(phi))
        sequence = normalize_to_native(program)
        assert len(sequence) == 5
        assert equivalent_up_to_phase(sequence_unitary(sequence), program_unitary(program), tol=1e-10)
        assert all(-math.pi <= a <= math.pi for a in sequence.angles)


def test_native_sequence_rejects_other_patterns():
    with pytest.raises(InvalidArgumentError):
        NativeGateSequence(gates=(NativeGate("rz", 0.0), NativeGate("sx")))


def test_phase_oracle_detects_mismatch():
    u = program_unitary(build_gate_program(0.1))
    v = program_unitary(build_gate_program(0.2))
    assert equivalent_up_to_phase(u, 1j * u)
    assert not equivalent_up_to_phase(u, v)


def test_anneal_program_has_no_native_form():
    with pytest.raises(InvalidArgumentError):
        normalize_to_native(build_anneal_program(0.1))


def test_consistency_error_is_a_tool_error():
    assert ConsistencyError("x").exit_code == 1


# ---------------------------------------------------------------- backends


def test_ideal_gate_mean_is_tanh():
    backend = GateModelSimulator(QCNoiseModel())
    for h in (-0.5, -0.1, 0.0, 0.03, 0.25):
        assert backend.exact_mean(build_gate_program(h)) == pytest.approx(math.tanh(10 * h), abs=1e-14)
    assert backend.outcome_probability(build_gate_program(0.0)) == pytest.approx(0.5)


def test_readout_flips_mix_probabilities():
    noise = QCNoiseModel(flip_from_plus=0.1, flip_from_minus=0.2)
    p_plus, p_minus = qc_outcome_probabilities(QubitProgram(model=ComputeModel.GATE, theta=0.0), noise)
    assert p_plus == pytest.approx(0.9)
    assert p_minus == pytest.approx(0.1)
    p_plus, _ = qc_outcome_probabilities(QubitProgram(model=ComputeModel.GATE, theta=math.pi), noise)
    assert p_plus == pytest.approx(0.2)


def test_statevector_matches_closed_form_for_any_phi():
    backend = GateModelSimulator(QCNoiseModel())
    for h in (-0.2, 0.0, 0.15):
        expected = backend.outcome_probability(build_gate_program(h))
        for phi in phi_values(10):
            assert statevector_probability(build_gate_program(h, phi=phi)) == pytest.approx(expected, abs=1e-14)


def test_noise_validation():
    with pytest.raises(ValueError):
        QCNoiseModel(flip_from_plus=0.6)
    with pytest.raises(ValueError):
        QANoiseModel(beta_dev=-1.0)
    with pytest.raises(ValueError):
        QCNoiseModel(unknown=1.0)
    with pytest.raises(InvalidArgumentError):
        make_noise(ComputeModel.GATE, "dwave-like")
    with pytest.raises(InvalidArgumentError):
        make_noise(ComputeModel.GATE, "no-such-preset")
    with pytest.raises(InvalidArgumentError):
        GateModelSimulator(QANoiseModel())


def test_presets_with_overrides():
    noise = make_noise(ComputeModel.ANNEAL, "dwave-like", {"field_offset": 0.01})
    assert noise.flip == pytest.approx(5.55e-5)
    assert noise.field_offset == 0.01
    assert make_noise(ComputeModel.GATE) == QCNoiseModel()


def test_backend_rejects_program_of_other_model():
    with pytest.raises(InvalidArgumentError):
        get_backend(ComputeModel.GATE).outcome_probabilities(build_anneal_program(0.0))
    with pytest.raises(InvalidArgumentError):
        get_backend(ComputeModel.ANNEAL).sample(
            SampleRequest(program=build_gate_program(0.0), shots=10, seed=0, stream_key=(0, 0))
        )


def test_sample_request_batches():
    program = build_anneal_program(0.0)
    assert SampleRequest(program=program, shots=50_000, seed=0, stream_key=(0, 0), batch_size=10_000).batches() == [10_000] * 5
    assert SampleRequest(program=program, shots=25, seed=0, stream_key=(0, 0), batch_size=10).batches() == [10, 10, 5]
    with pytest.raises(InvalidArgumentError):
        SampleRequest(program=program, shots=0, seed=0, stream_key=(0, 0))


def test_sampling_is_seeded_and_order_independent():
    backend = GateModelSimulator(QCNoiseModel())
    requests = [
        SampleRequest(program=build_gate_program(h), shots=8192, seed=7, stream_key=(3, point))
        for point, h in enumerate((-0.1, 0.0, 0.1))
    ]
    forward = [backend.sample(r) for r in requests]
    backward = [backend.sample(r) for r in reversed(requests)][::-1]
    assert forward == backward
    assert all(c.shots == 8192 for c in forward)
    other_seed = backend.sample(SampleRequest(program=requests[1].program, shots=8192, seed=8, stream_key=(3, 1)))
    other_variant = backend.sample(
        SampleRequest(program=requests[1].program, shots=8192, seed=7, stream_key=(3, 1), variant=1)
    )
    assert {other_seed, other_variant} != {forward[1]}


def test_stream_generator_keys():
    a = stream_generator(1, 0, 0).random(4)
    assert np.array_equal(a, stream_generator(1, 0, 0).random(4))
    assert not np.array_equal(a, stream_generator(1, 0, 1).random(4))
    assert not np.array_equal(a, stream_generator(1, 0, 0, batch=1).random(4))


def test_annealer_jitter_sampling_matches_quadrature():
    backend = AnnealerSimulator(QANoiseModel(field_noise_std=0.05))
    program = build_anneal_program(0.05)
    p_plus, p_minus = backend.outcome_probabilities(program)
    assert p_plus + p_minus == pytest.approx(1.0, abs=1e-12)
    # jitter flattens the response
    assert p_plus < AnnealerSimulator(QANoiseModel()).outcome_probability(program)

    shots = 200_000
    counts = backend.sample(SampleRequest(program=program, shots=shots, seed=3, stream_key=(0, 0), batch_size=10_000))
    sigma = math.sqrt(p_plus * (1 - p_plus) / shots)
    assert abs(counts.n_plus / shots - p_plus) < 5 * sigma


def test_outcome_probability_examples():
    assert qa_outcome_probability(0.05, QANoiseModel()) == pytest.approx(0.73106, abs=1e-5)
    assert qc_outcome_probability(build_gate_program(0.05), QCNoiseModel()) == pytest.approx(0.73106, abs=1e-5)
    # h_eff = 5: one shot in e^10 lands against the field
    assert qa_outcome_probabilities(0.5, QANoiseModel())[1] == pytest.approx(1 / 22026, rel=1e-3)
    assert qc_outcome_probabilities(build_gate_program(0.5), QCNoiseModel())[1] == pytest.approx(1 / 22026, rel=1e-3)


def test_exact_mean_is_odd_for_symmetric_noise():
    backends = [
        GateModelSimulator(QCNoiseModel(flip_from_plus=0.02, flip_from_minus=0.02)),
        AnnealerSimulator(QANoiseModel(flip=0.01, field_noise_std=0.03)),
    ]
    for backend in backends:
        for h in grid(41):
            if backend.compute_model is ComputeModel.GATE:
                plus, minus = build_gate_program(h), build_gate_program(-h)
            else:
                plus, minus = build_anneal_program(h), build_anneal_program(-h)
            assert backend.exact_mean(plus) == pytest.approx(-backend.exact_mean(minus), abs=1e-12)


def test_binomial_sampling_matches_probability():
    backend = GateModelSimulator(QCNoiseModel())
    program = build_gate_program(0.03)
    p = backend.outcome_probability(program)
    shots = 10_000
    sigma = math.sqrt(p * (1 - p) / shots)
    fractions = np.array([
        backend.sample(SampleRequest(program=program, shots=shots, seed=11, stream_key=(0, point))).n_plus / shots
        for point in range(200)
    ])
    assert np.all(np.abs(fractions - p) < 5 * sigma)
    assert abs(fractions.mean() - p) < 4 * sigma / math.sqrt(len(fractions))


# ---------------------------------------------------------------- estimation


def test_heff_from_counts_examples():
    balanced = heff_from_counts(ShotCounts(500, 500))
    assert balanced.value == 0.0
    assert balanced.std_error == pytest.approx(1 / math.sqrt(1000))
    assert balanced.ci_lo == pytest.approx(-3 / math.sqrt(1000))
    assert not balanced.clamped

    e = heff_from_counts(ShotCounts(880, 120))
    assert e.value == pytest.approx(math.atanh(0.76), abs=1e-12)
    assert e.ci_lo < e.value < e.ci_hi


def test_heff_is_odd_in_counts():
    for n_plus, n_minus in ((900, 100), (8192, 0), (1, 8191), (37, 63)):
        a = heff_from_counts(ShotCounts(n_plus, n_minus))
        b = heff_from_counts(ShotCounts(n_minus, n_plus))
        assert a.value == -b.value
        assert a.std_error == b.std_error


def test_unanimous_counts_are_clamped():
    e = heff_from_counts(ShotCounts(8192, 0))
    assert e.clamped
    assert e.value == pytest.approx(0.5 * math.log(16383), abs=1e-12)
    assert e.ci_hi >= clamp_bound(8192)
    neg = heff_from_counts(ShotCounts(0, 8192))
    assert neg.clamped and neg.value == -e.value
    # clamp grows with the shot count
    assert heff_from_counts(ShotCounts(100, 0)).value < heff_from_counts(ShotCounts(1000, 0)).value


def test_heff_rejects_tiny_samples():
    with pytest.raises(InvalidArgumentError):
        heff_from_counts(ShotCounts(1, 0))
    with pytest.raises(InvalidArgumentError):
        ShotCounts(-1, 5)


def test_exact_estimates():
    assert heff_from_mean(0.0) == 0.0
    with pytest.raises(InvalidArgumentError):
        heff_from_mean(1.0)
    e = heff_from_probabilities(0.75, 0.25)
    assert e.value == pytest.approx(math.atanh(0.5))
    assert e.std_error == 0.0 and e.ci_lo == e.ci_hi == e.value
    with pytest.raises(InvalidArgumentError):
        heff_from_probabilities(1.0, 0.0)


def test_heff_inverts_tanh():
    for x in np.linspace(-5.0, 5.0, 101):
        assert heff_from_mean(math.tanh(x)) == pytest.approx(x, abs=1e-12)


def test_curve_rejects_duplicate_inputs():
    e = heff_from_counts(ShotCounts(5, 5))
    with pytest.raises(InvalidArgumentError):
        curve_from_estimates([(0.1, e), (0.1, e)])
    curve = curve_from_estimates([(0.2, e), (-0.2, e)])
    assert list(curve.h_in) == [-0.2, 0.2]


def test_confidence_interval_coverage():
    rng = np.random.default_rng(12345)
    shots, trials = 10_000, 1000
    for p in (0.5, 0.7, 0.9):
        truth = math.atanh(2 * p - 1)
        covered = 0
        for n_plus in rng.binomial(shots, p, size=trials):
            e = heff_from_counts(ShotCounts(int(n_plus), shots - int(n_plus)))
            covered += e.ci_lo <= truth <= e.ci_hi
        assert covered / trials >= 0.99, (p, covered)


# ---------------------------------------------------------------- metrics


def test_ideal_linearity_exact():
    curve = exact_curve(GateModelSimulator(QCNoiseModel()), grid(101))
    fit = fit_response_bias(curve)
    assert fit.response == pytest.approx(10.0, abs=1e-9)
    assert abs(fit.bias) < 1e-12
    assert fit.rms_residual < 1e-12


def test_model_equivalence_exact():
    hs = grid(101)
    gate = exact_curve(GateModelSimulator(QCNoiseModel()), hs)
    anneal = exact_curve(AnnealerSimulator(QANoiseModel()), hs)
    assert np.max(np.abs(gate.values - anneal.values)) < 1e-12


def test_gate_readout_fixture():
    backend = GateModelSimulator(make_noise(ComputeModel.GATE, "ibm-like"))
    curve = exact_curve(backend, grid(2001))
    neg, pos = saturations(curve)
    assert pos == pytest.approx(2.33, abs=0.01)
    assert neg == pytest.approx(-1.65, abs=0.01)
    # the asymmetric flips bend the curve, so the response is read off near zero
    fit = fit_response_bias(curve, FitWindow(-0.01, 0.01))
    assert fit.response == pytest.approx(9.56, abs=0.02)
    # the flip asymmetry leaves an offset of atanh(q- - q+) at zero field
    assert fit.bias == pytest.approx(math.atanh(0.0356 - 0.0094), abs=1e-3)
    assert fit.bias == pytest.approx(0.026, abs=1e-3)
    # closed form of the saturation plateau
    assert pos == pytest.approx(0.5 * math.log((1 - 0.0094) / 0.0094), abs=1e-6)


def test_annealer_readout_fixture():
    backend = AnnealerSimulator(make_noise(ComputeModel.ANNEAL, "dwave-like"))
    metrics = metrics_for_qubit(exact_curve(backend, grid(81)), chip_id="dwave")
    assert metrics.pos_saturation == pytest.approx(4.90, abs=0.01)
    assert metrics.neg_saturation == pytest.approx(-4.90, abs=0.01)
    assert metrics.response == pytest.approx(10.0, abs=0.01)
    assert metrics.clamped_points == 0


def test_annealer_plateau_beyond_half_field():
    backend = AnnealerSimulator(make_noise(ComputeModel.ANNEAL, "dwave-like"))
    curve = exact_curve(backend, grid(81))
    plateau = curve.values[curve.h_in >= 0.6]
    assert np.ptp(plateau) < 0.1


def test_sampled_recovery():
    curve = sampled_curve(GateModelSimulator(QCNoiseModel()), grid(900), shots=8192, seed=42)
    fit = fit_response_bias(curve)
    assert fit.response == pytest.approx(10.0, abs=0.3)
    assert abs(fit.bias) < 0.05
    assert fit.response_std_error > 0


def test_weighted_fit_agrees_with_plain_fit():
    curve = sampled_curve(GateModelSimulator(QCNoiseModel()), grid(900), shots=8192, seed=42)
    plain = fit_response_bias(curve)
    weighted = fit_response_bias(curve, weighted=True)
    assert weighted.response == pytest.approx(plain.response, abs=3 * plain.response_std_error)
    # exact curves have no sampling error and fall back to the plain fit
    exact = exact_curve(GateModelSimulator(QCNoiseModel()), grid(101))
    assert fit_response_bias(exact, weighted=True).response == pytest.approx(10.0, abs=1e-9)


def test_clamp_bound_at_full_field():
    backend = GateModelSimulator(QCNoiseModel())
    for seed in (0, 1, 2):
        counts = backend.sample(
            SampleRequest(program=build_gate_program(1.0), shots=8192, seed=seed, stream_key=(0, 0))
        )
        assert counts.unanimous
        e = heff_from_counts(counts)
        assert e.clamped
        assert e.value == pytest.approx(4.852, abs=0.001)


def test_phi_invariance():
    backend = GateModelSimulator(QCNoiseModel())
    hs = grid(101)
    reference = exact_curve(backend, hs).values
    for phi in phi_values(10):
        assert np.array_equal(exact_curve(backend, hs, phi=phi).values, reference)

    fits = [
        fit_response_bias(sampled_curve(backend, grid(900), 8192, seed=11, phi=phi, variant=i))
        for i, phi in enumerate(phi_values(10))
    ]
    base = fits[0]
    for fit in fits[1:]:
        spread = math.hypot(fit.response_std_error, base.response_std_error)
        assert abs(fit.response - base.response) < 3 * spread


def transformed(curve, scale=1.0, shift=0.0):
    """The same curve with every h_eff mapped to scale·h_eff + shift."""
    return curve_from_estimates(
        (
            p.h_in,
            dataclasses.replace(
                p.estimate,
                value=scale * p.estimate.value + shift,
                std_error=abs(scale) * p.estimate.std_error,
            ),
        )
        for p in curve.points
    )


def test_fit_is_shift_and_scale_equivariant():
    curve = sampled_curve(GateModelSimulator(QCNoiseModel()), grid(201), shots=4096, seed=1)
    base = fit_response_bias(curve, FitWindow(-0.3, 0.3))

    shifted = fit_response_bias(transformed(curve, shift=0.7), FitWindow(-0.3, 0.3))
    assert shifted.response == pytest.approx(base.response, abs=1e-9)
    assert shifted.bias == pytest.approx(base.bias + 0.7, abs=1e-9)

    scaled = fit_response_bias(transformed(curve, scale=-2.5), FitWindow(-0.3, 0.3))
    assert scaled.response == pytest.approx(-2.5 * base.response, abs=1e-9)
    assert scaled.bias == pytest.approx(-2.5 * base.bias, abs=1e-9)


def test_fit_needs_two_points_in_window():
    curve = exact_curve(GateModelSimulator(QCNoiseModel()), grid(5))
    with pytest.raises(InsufficientDataError) as info:
        fit_response_bias(curve, FitWindow(-0.1, 0.1))
    assert "[-0.1, 0.1]" in str(info.value)
    with pytest.raises(InvalidArgumentError):
        FitWindow(0.1, -0.1)


def test_two_point_fit_is_exact():
    e1, e2 = heff_from_probabilities(0.4, 0.6), heff_from_probabilities(0.6, 0.4)
    fit = fit_response_bias(curve_from_estimates([(-0.05, e1), (0.05, e2)]))
    assert fit.points == 2
    assert fit.response == pytest.approx(e2.value / 0.05)
    assert fit.bias == pytest.approx(0.0, abs=1e-15)


# ---------------------------------------------------------------- reporting


def make_metrics(chip, values, qubit_prefix="q"):
    """QubitMetrics rows from (response, bias, neg, pos) tuples."""
    return [
        QubitMetrics(
            qubit_id=f"{qubit_prefix}{i}",
            chip_id=chip,
            response=r,
            bias=b,
            neg_saturation=n,
            pos_saturation=p,
            fit_points=9,
            fit_rms_residual=0.0,
        )
        for i, (r, b, n, p) in enumerate(values)
    ]


def synthetic_metric(mean, std, count):
    """`count` values (odd) whose mean and population std are exactly the targets."""
    half = count // 2
    spread = std * math.sqrt(count / (count - 1))
    return [mean + spread] * half + [mean - spread] * half + [mean]


def dwave_fleet():
    n = 2031
    columns = [
        synthetic_metric(10.03, 0.26, n),
        synthetic_metric(0.02, 0.07, n),
        synthetic_metric(-4.92, 0.15, n),
        synthetic_metric(4.90, 0.16, n),
    ]
    return make_metrics("Advantage_system4.1", list(zip(*columns)))


def test_summary_statistics():
    rows = make_metrics("chip", [(9.0, 0.1, -2.0, 2.0), (11.0, -0.1, -3.0, 3.0)])
    summary = summarize_chip(rows)
    assert summary.qubit_count == 2
    assert summary.response == MetricStat(10.0, 1.0)
    assert summary.bias.mean == pytest.approx(0.0)
    with pytest.raises(InvalidArgumentError):
        summarize_chip(rows + make_metrics("other", [(1, 0, -1, 1)]))
    with pytest.raises(InvalidArgumentError):
        summarize_chip([])


def test_metric_stat_rendering():
    assert MetricStat(-4.92, 0.15).render() == "-4.92 ± 0.15"
    assert MetricStat(-0.001, 0.02).render() == "0.00 ± 0.02"
    assert MetricStat(8.23, 0.0).render() == "8.23 ± 0.00"


def test_report_golden_rows():
    single = make_metrics("ibmq_armonk", [(8.23, 0.01, -1.28, 1.41)])
    text = render(summarize_chips(dwave_fleet() + single))
    dwave_line = next(line for line in text.splitlines() if "Advantage_system4.1" in line)
    for cell in ("2031", "10.03 ± 0.26", "0.02 ± 0.07", "-4.92 ± 0.15", "4.90 ± 0.16"):
        assert cell in dwave_line
    armonk_line = next(line for line in text.splitlines() if "ibmq_armonk" in line)
    for cell in ("8.23 ± 0.00", "0.01 ± 0.00", "-1.28 ± 0.00", "1.41 ± 0.00"):
        assert cell in armonk_line
    # larger fleets first
    assert text.index("Advantage_system4.1") < text.index("ibmq_armonk")
    assert render(summarize_chips(dwave_fleet() + single)) == text


def test_report_machine_formats():
    rows = make_metrics("a", [(9.5, 0.01, -1.6, 2.3), (9.7, 0.03, -1.7, 2.4)]) + make_metrics("b", [(8.0, 0.0, -1.0, 1.0)])
    summaries = summarize_chips(rows)
    csv_text = render(summaries, "csv")
    assert csv_text.splitlines()[0].startswith("chip_id,qubit_count,response_mean,response_std")
    assert [s.chip_id for s in summaries] == ["a", "b"]
    assert summaries_from_csv(csv_text) == summaries
    json_text = render(summaries, "json")
    assert '"qubit_count": 2' in json_text
    assert summaries_from_json(json_text) == summaries
    with pytest.raises(InvalidArgumentError):
        render(summaries, "xml")


def test_fleet_row_pools_all_chips():
    rows = make_metrics("a", [(9.0, 0, -1, 1)]) + make_metrics("b", [(11.0, 0, -1, 1)])
    fleet = summarize_fleet(rows, "all backends")
    assert fleet.chip_id == "all backends"
    assert fleet.qubit_count == 2
    assert fleet.response == MetricStat(10.0, 1.0)


def test_histogram_counts_outliers():
    rows = make_metrics("c", [(r, 0, -1, 1) for r in (8.5, 9.1, 9.9, 10.2, 10.7, 12.5)])
    result = histogram(rows, HistogramSpec("response", 9.0, 11.0, 4))
    assert [c for _, c in result.bins] == [1, 1, 1, 1]
    assert result.bins[0][0] == pytest.approx(9.25)
    assert (result.below, result.above) == (1, 1)
    assert result.total == 6
    with pytest.raises(InvalidArgumentError):
        HistogramSpec("fidelity", 0, 1, 4)
    with pytest.raises(InvalidArgumentError):
        HistogramSpec("bias", 0, 1, 0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
