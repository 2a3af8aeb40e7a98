import json
import random

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from fuchsian.bignum import precision_context, to_mpc
from fuchsian.frobenius import ProblemSpec
from fuchsian.geometry import Moebius, normalize_domain
from fuchsian.solver import (
    SolverConfig,
    _apex_tau,
    _generator_list,
    _pipeline,
    _transform_residual,
    continuation_solve,
    residuals,
    result_from_json,
    result_to_json,
    solve_rho,
)

random.seed(123)


def test_residuals_vanish_at_anchor(anchor_result):
    res = anchor_result
    assert float(res.max_residual()) < float(res.certified_tolerance)
    for p in res.residuals:
        assert p.tau_star.imag > 0
        assert p.multiplier_sign == 1


def test_residuals_large_for_perturbed_rho():
    spec = ProblemSpec(2, mpfr("1.1"), N=100, precision_bits=256)
    probes = residuals(spec, branch={"z2_branch": -1, "bulge_sign": 1})
    assert max(abs(p.value) for p in probes) > mpfr("1e-4")


def test_residual_tau_star_independence(anchor_result):
    """Two distinct probes per generator vanish simultaneously at the
    accessory value (heights 1.0 and 0.8 of the certificate)."""
    per_gen = {}
    for p in anchor_result.residuals:
        per_gen.setdefault(p.generator_index, []).append(p)
    for idx, plist in per_gen.items():
        assert len(plist) >= 2
        taus = {complex(p.tau_star) for p in plist}
        assert len(taus) >= 2
        for p in plist:
            assert abs(p.value) < anchor_result.certified_tolerance


def test_solver_anchor_value(anchor_result):
    assert abs(anchor_result.rho_F - 1) < mpfr("1e-40")
    assert abs(anchor_result.rho_hat_F - mpfr("0.5")) < mpfr("1e-40")
    assert abs(anchor_result.r - 4) < mpfr("1e-40")


def test_degenerate_alpha_rejected():
    from fuchsian.geometry import GeometryError

    with pytest.raises(GeometryError):
        solve_rho(1, SolverConfig(precision_bits=192, N=48))


def test_result_json_round_trip_bit_exact(anchor_result):
    blob = json.dumps(result_to_json(anchor_result, hex_floats=True))
    back = result_from_json(json.loads(blob))
    assert back.rho_F == anchor_result.rho_F
    assert back.r == anchor_result.r
    assert back.group.D0 == anchor_result.group.D0
    assert all(
        back.t_series[k] == anchor_result.t_series[k] for k in range(anchor_result.t_series.order + 1)
    )
    assert back.multiplier_sign == anchor_result.multiplier_sign
    assert float(back.max_residual()) == float(anchor_result.max_residual())


def test_continuation_solve_constant_path(anchor_result):
    cfg = SolverConfig(precision_bits=192, N=64)
    results = continuation_solve([2, 2], cfg)
    assert abs(results[0].rho_F - results[1].rho_F) < mpfr(2) ** (-64)


def test_conjugation_symmetry():
    """rho(conj w) = conj rho(w) by independent double-solve."""
    cfg = SolverConfig(precision_bits=192, N=96)
    w = to_mpc(("0.52", "0.015"), 192)
    with precision_context(192):
        w_conj = mpc(w.real, -w.imag)
    a1, _ = normalize_domain(w, 192)
    a2, rec2 = normalize_domain(w_conj, 192)
    r1 = solve_rho(a1, cfg, seed=1)
    r2 = solve_rho(a2, cfg, seed=1)
    from fuchsian.convert import transport_rho

    v2 = transport_rho(rec2, r2.rho_F, 192)
    with precision_context(192):
        assert abs(v2 - mpc(r1.rho_F.real, -r1.rho_F.imag)) < 10 * max(
            r1.certified_tolerance, r2.certified_tolerance
        )


def _word_residual(result, word, tau, prec):
    M = word[0]
    for w in word[1:]:
        M = M * w
    sign = 1
    v, bound = _transform_residual(result.f_series, M, tau, sign, prec)
    vm, _ = _transform_residual(result.f_series, M, tau, -1, prec)
    if abs(vm) < abs(v):
        v = vm
    return v, bound, M


def test_word_transformation_residuals(anchor_result_full):
    """Weight-one transformation holds for short words in the generators,
    up to the global sign; tolerance adapts to the truncation floor of each
    word's evaluation point."""
    res = anchor_result_full
    prec = res.precision_bits
    g = res.group
    gens = [g.S0, g.Sc1, g.Sc2, g.T]
    random.seed(5)
    tested = 0
    with precision_context(prec):
        while tested < 10:
            length = random.randint(1, 3)
            word = [random.choice(gens) for _ in range(length)]
            M = word[0]
            for w in word[1:]:
                M = M * w
            c_entry = abs(M.m21)
            if c_entry == 0 or c_entry > 16:
                continue
            # apex of the isometric circle: both heights equal 1/|m21|
            tau = -M.m22 / M.m21 + mpc(0, 1) / c_entry
            if tau.imag <= 0 or M.apply(tau).imag <= 0:
                continue
            v, bound, _ = _word_residual(res, word, tau, prec)
            assert abs(v) < max(10 * res.certified_tolerance, 100 * bound)
            tested += 1


@pytest.mark.slow
def test_truncation_stability():
    """Doubling order and precision moves the accessory value by less than
    the certified tolerance."""
    base = solve_rho(2, SolverConfig(precision_bits=192, N=64))
    finer = solve_rho(2, SolverConfig(precision_bits=384, N=128))
    assert abs(base.rho_F - finer.rho_F) < base.certified_tolerance


def test_grid_fallback_from_bad_seed():
    """A hopeless explicit seed triggers the coarse-grid fallback."""
    cfg = SolverConfig(precision_bits=192, N=64, max_newton_iterations=12)
    res = solve_rho(2, cfg, seed=9)
    assert abs(res.rho_F - 1) < mpfr("1e-20")


def test_residuals_with_explicit_tau_star(anchor_result):
    spec = ProblemSpec(2, anchor_result.rho_F, N=120, precision_bits=320)
    probes = residuals(spec, tau_star=to_mpc(("0.1", "0.3"), 320), branch={"z2_branch": -1, "bulge_sign": 1})
    assert len(probes) == 3  # one probe per generator at the override point
    assert all(abs(complex(p.tau_star) - (0.1 + 0.3j)) < 1e-12 for p in probes)
    assert all(abs(p.value) < mpfr("1e-25") for p in probes)
