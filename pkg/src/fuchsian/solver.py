"""Modularity residuals and the accessory-parameter root finder.

A candidate accessory value rho yields, through the Frobenius/geometry
pipeline, a candidate group Gamma(rho) and a candidate weight-one Fourier
series F.  For each finite-cusp generator S the residual

    F(e^{2 pi i S(tau*)}) - sign * (s3 tau* + s4) * F(e^{2 pi i tau*})

vanishes exactly at the Fuchsian value.  Newton's method drives the
best-conditioned residual to zero; the other generators (and a second tau*
probe) are evaluated afterwards as an independent certificate.

tau* placement: for a parabolic S with lower-left entry D and fixed point c
the two heights Im(tau*) and Im(S tau*) are balanced on the isometric circle
of S; its apex c - 1/D + i/D maximizes the smaller height at 1/D, which
keeps both series evaluations safely inside |q| < 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import complex_from_json, complex_to_json, precision_context, to_mpc
from .frobenius import (
    FrobeniusError,
    ProblemSpec,
    Q_at,
    default_path,
    frobenius_coefficients,
    modular_series,
)
from .geometry import (
    GeometryError,
    GroupData,
    Moebius,
    build_generators,
    cusp_representatives,
    fixed_points,
    scale_factor,
)
from .series import PowerSeries, series_from_json, series_to_json


class SolverError(Exception):
    pass


class NoConvergence(SolverError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResidualCheckFailed(SolverError):
    pass


class ConvergenceDomainViolation(SolverError):
    pass


@dataclass
class SolverConfig:
    precision_bits: int = 512
    N: int = 150
    tol_exponent: int | None = None  # certified tolerance 2^-tol_exponent
    probe_heights: tuple = (1.0, 0.8)  # heights relative to the apex 1/D
    z2_branch: int | None = None  # +1, -1, or None for automatic selection
    bulge_sign: int = +1
    max_newton_iterations: int = 60
    search_taylor_order: int = 80
    search_step_frac: float = 0.25
    cert_guard_bits: int = 72
    max_cert_order: int = 6000
    tau_star: complex | None = None  # optional override for every generator

    @property
    def tolerance_bits(self) -> int:
        return self.tol_exponent if self.tol_exponent is not None else self.precision_bits // 2

    def tolerance(self) -> mpfr:
        with precision_context(self.precision_bits):
            return mpfr(2) ** (-self.tolerance_bits)


@dataclass
class ResidualProbe:
    generator_index: int  # 1 = S_c1, 2 = S_c2, 3 = S_0
    tau_star: mpc
    value: mpc
    truncation_bound: mpfr
    multiplier_sign: int


@dataclass
class UniformizationResult:
    alpha: mpc
    rho_F: mpc
    rho_hat_F: mpc
    r: mpc
    group: GroupData
    residuals: list
    precision_bits: int
    N: int
    t_series: PowerSeries
    f_series: PowerSeries
    multiplier_sign: dict
    branch_choices: dict
    certified_tolerance: mpfr
    newton_iterations: int = 0

    def max_residual(self) -> mpfr:
        return max(abs(p.value) for p in self.residuals)


# ---------------------------------------------------------------------------
# one evaluation of the pipeline at a candidate rho

@dataclass
class _Pipeline:
    spec: ProblemSpec
    geometry: dict
    group: GroupData
    r: mpc
    f_series: PowerSeries
    t_series: PowerSeries


def _geometry_at(spec: ProblemSpec, z2_branch: int, bulge_sign: int, order: int, step_frac):
    prec = spec.precision_bits
    # continuation start values burn ~1 bit of series tail per coefficient
    n_start = max(spec.N, prec + 48)
    spec_long = (
        spec if spec.N >= n_start else ProblemSpec(spec.alpha, spec.rho, N=n_start, precision_bits=prec)
    )
    a, b = frobenius_coefficients(spec_long)
    with precision_context(prec):
        z0, z1, z2 = fixed_points(spec.alpha, prec, z2_branch)
        Qs = []
        for z in (z0, z1, z2):
            path = default_path(spec, z, bulge_sign=bulge_sign)
            Qs.append(Q_at(spec, z, path=path, order=order, step_frac=step_frac, a=a, b=b))
        c1, c2, imag_parts, perm = cusp_representatives(Qs[0], Qs[1], Qs[2], prec)
        group = build_generators(c1, c2, prec=prec)
        r = scale_factor(Qs[0], group.D0, prec)
        im_pred = (
            1 / gmpy2.sqrt(group.D1) - 1 / gmpy2.sqrt(group.D0),
            1 / gmpy2.sqrt(group.D2) - 1 / gmpy2.sqrt(group.D0),
        )
        im_defect = max(abs(imag_parts[0] - im_pred[0]), abs(imag_parts[1] - im_pred[1]))
    return {
        "fixed_points": (z0, z1, z2),
        "Q": tuple(Qs),
        "c1": c1,
        "c2": c2,
        "imag_parts": imag_parts,
        "imag_defect": im_defect,
        "perm": perm,
        "group": group,
        "r": r,
    }


def _noise_margin(n_build: int) -> int:
    """Extra build precision absorbing the recurrence's noise growth."""
    return int(0.75 * n_build) + 64


def _pipeline(spec: ProblemSpec, branch: dict, order: int, step_frac, extra_bits: int = 0) -> _Pipeline:
    geo = _geometry_at(spec, branch["z2_branch"], branch["bulge_sign"], order, step_frac)
    t_series, f_series = modular_series(spec, geo["r"], extra_bits=extra_bits)
    return _Pipeline(
        spec=spec,
        geometry=geo,
        group=geo["group"],
        r=geo["r"],
        f_series=f_series,
        t_series=t_series,
    )


def _reround(series: PowerSeries, prec: int) -> PowerSeries:
    with precision_context(prec):
        return PowerSeries([mpc(c) for c in series.coeffs], series.var, prec)


def _grid_seed(alpha, branch, config: SolverConfig, order, real_rho):
    """Fallback initial guess: coarse grid of radius 2 around (alpha+1)/2,
    keeping the candidate with the smallest driver residual."""
    prec = config.precision_bits
    with precision_context(prec):
        center = (alpha + 1) / 2
        if real_rho:
            offsets = [mpfr(k) / 2 for k in range(-4, 5)]
            candidates = [center + d for d in offsets]
        else:
            candidates = [
                center + mpc(mpfr(kr) / 2, mpfr(ki) / 2)
                for kr in range(-4, 5, 2)
                for ki in range(-4, 5, 2)
            ]
        best = None
        for cand in candidates:
            try:
                f0, _, _, _ = _eval_driver(alpha, cand, branch, None, order, prec, config.N)
            except (GeometryError, FrobeniusError, ConvergenceDomainViolation):
                continue
            if gmpy2.is_finite(abs(f0)) and (best is None or abs(f0) < best[0]):
                best = (abs(f0), cand)
        return best[1] if best else None


def _generator_list(group: GroupData):
    """Order (index, matrix, cusp, D): 1 = S_c1, 2 = S_c2, 3 = S_0."""
    return [
        (1, group.Sc1, group.c1, group.D1),
        (2, group.Sc2, group.c2, group.D2),
        (3, group.S0, mpfr(0), group.D0),
    ]


def _apex_tau(c, D, height, prec):
    with precision_context(prec):
        return mpc(c - 1 / D, mpfr(height) / D)


def _transform_residual(f_series: PowerSeries, M: Moebius, tau, sign, prec):
    """F(q at M tau) - sign * J(M, tau) * F(q at tau) plus a truncation bound."""
    with precision_context(prec):
        two_pi_i = 2 * gmpy2.const_pi() * mpc(0, 1)
        j_factor = M.m21 * tau + M.m22
        tau_img = M.apply(tau)
        if tau.imag <= 0 or tau_img.imag <= 0:
            raise ConvergenceDomainViolation("probe left the upper half-plane")
        q1 = gmpy2.exp(two_pi_i * tau)
        q2 = gmpy2.exp(two_pi_i * tau_img)
        qmax = max(abs(q1), abs(q2))
        if qmax >= 1:
            raise ConvergenceDomainViolation("|q| >= 1 at a probe")
        v1, tail1 = f_series.eval_at(q1, radius=mpfr(1))
        v2, tail2 = f_series.eval_at(q2, radius=mpfr(1))
        value = v2 - sign * j_factor * v1
        coeff_scale = max(abs(c) for c in f_series.coeffs[-8:]) + 1
        bound = coeff_scale * qmax ** (f_series.order + 1) / (1 - qmax)
        return value, bound


def residuals(
    spec: ProblemSpec,
    tau_star=None,
    pipeline: _Pipeline | None = None,
    signs=(1, 1, 1),
    heights=(1.0,),
    branch=None,
):
    """The three modularity residuals (F1, F2, F3) as ResidualProbe lists."""
    if pipeline is None:
        branch = branch or {"z2_branch": -1, "bulge_sign": +1}
        order = max(32, int(0.347 * (spec.precision_bits + 40)) + 1)
        pipeline = _pipeline(spec, branch, order, None)
    prec = spec.precision_bits
    probes = []
    for (idx, M, c, D), sign in zip(_generator_list(pipeline.group), signs):
        for h in heights:
            tau = to_mpc(tau_star, prec) if tau_star is not None else _apex_tau(c, D, h, prec)
            value, bound = _transform_residual(pipeline.f_series, M, tau, sign, prec)
            probes.append(
                ResidualProbe(
                    generator_index=idx,
                    tau_star=tau,
                    value=value,
                    truncation_bound=bound,
                    multiplier_sign=sign,
                )
            )
            if tau_star is not None:
                break
    return probes


# ---------------------------------------------------------------------------
# Newton iteration

def _driver_residual(pipeline: _Pipeline, sign_map, prec, index=None):
    """Residual of the smallest-D generator (best evaluation conditioning).

    The index must stay pinned across the finite-difference evaluations of
    one Newton run: near symmetric configurations two stabilizer constants
    coincide and a per-evaluation argmin would hop between generators."""
    gens = _generator_list(pipeline.group)
    if index is None:
        idx, M, c, D = min(gens, key=lambda g: g[3].real)
    else:
        idx, M, c, D = next(g for g in gens if g[0] == index)
    tau = _apex_tau(c, D, 1.0, prec)
    value, bound = _transform_residual(pipeline.f_series, M, tau, sign_map[idx], prec)
    return idx, value, bound


def _resolve_branch(spec: ProblemSpec, config: SolverConfig):
    """Choose the z2 sign: the candidate whose cusp data has the smaller
    worst-case stabilizer constant evaluates best; consistency is re-checked
    by the certificate anyway."""
    if config.z2_branch in (+1, -1):
        return {"z2_branch": config.z2_branch, "bulge_sign": config.bulge_sign}
    best = None
    errors = []
    for sgn in (-1, +1):
        try:
            geo = _geometry_at(spec, sgn, config.bulge_sign, config.search_taylor_order, config.search_step_frac)
            dmax = max(geo["group"].D0.real, geo["group"].D1.real, geo["group"].D2.real)
            if best is None or dmax < best[0]:
                best = (dmax, sgn)
        except (GeometryError, FrobeniusError) as exc:
            errors.append((sgn, str(exc)))
    if best is None:
        raise NoConvergence("no usable z2 branch at the seed", {"errors": errors})
    return {"z2_branch": best[1], "bulge_sign": config.bulge_sign}


def _eval_driver(spec_args, rho, branch, sign_map, order, prec, N, driver_idx=None, step_frac=None, extra_bits=0):
    spec = ProblemSpec(spec_args, rho, N=N, precision_bits=prec)
    pipeline = _pipeline(spec, branch, order, step_frac, extra_bits=extra_bits)
    if sign_map is None:
        # the multiplier sign is locally constant in alpha and +1 at the
        # anchor; resolving it from residual magnitudes at a non-converged
        # rho locks in garbage, so the driver always starts from +1.
        sign_map = {1: +1, 2: +1, 3: +1}
    idx, value, bound = _driver_residual(pipeline, sign_map, prec, index=driver_idx)
    return value, idx, sign_map, pipeline


def _newton(
    alpha,
    rho0,
    branch,
    config: SolverConfig,
    N,
    order,
    tol,
    real_rho,
    max_iter,
    sign_map=None,
    stall_ok_bits=None,
    step_frac=None,
    extra_bits=0,
):
    """Damped Newton on the driver residual; returns (rho, sign_map, iterations).

    If no damped step decreases |F| any more (evaluation floor reached) the
    iteration stops; that is accepted when |F| is already below
    2^-stall_ok_bits, since the final certificate re-validates everything."""
    prec = config.precision_bits
    with precision_context(prec):
        rho = to_mpc(rho0, prec)
        if real_rho:
            rho = mpc(rho.real, 0)
        h = mpfr(2) ** (-(prec // 3))
        f0 = None
        driver_idx = None
        for it in range(max_iter):
            try:
                f0, driver_idx, sign_map, _ = _eval_driver(
                    alpha, rho, branch, sign_map, order, prec, N, driver_idx, step_frac, extra_bits
                )
            except (GeometryError, FrobeniusError, ConvergenceDomainViolation) as exc:
                raise NoConvergence(f"residual evaluation failed at rho={complex(rho)}", {"cause": str(exc)})
            if abs(f0) < tol:
                return rho, sign_map, it
            if real_rho:
                fp, _, _, _ = _eval_driver(alpha, rho + h, branch, sign_map, order, prec, N, driver_idx, step_frac, extra_bits)
                d = (fp - f0) / h
                denom = d.real ** 2 + d.imag ** 2
                if denom == 0:
                    raise NoConvergence("vanishing residual derivative")
                step = mpc((d.real * f0.real + d.imag * f0.imag) / denom, 0)
            else:
                fpr, _, _, _ = _eval_driver(alpha, rho + h, branch, sign_map, order, prec, N, driver_idx, step_frac, extra_bits)
                fpi, _, _, _ = _eval_driver(alpha, rho + mpc(0, 1) * h, branch, sign_map, order, prec, N, driver_idx, step_frac, extra_bits)
                dre = (fpr - f0) / h
                dim = (fpi - f0) / h
                det = dre.real * dim.imag - dim.real * dre.imag
                if det == 0:
                    raise NoConvergence("singular residual Jacobian")
                dx = (f0.real * dim.imag - f0.imag * dim.real) / det
                dy = (f0.imag * dre.real - f0.real * dre.imag) / det
                step = mpc(dx, dy)
            # clamp and damp
            cap = mpfr("0.25") * (1 + abs(rho))
            if abs(step) > cap:
                step = step * (cap / abs(step))
            scale = mpfr(1)
            accepted = False
            for _ in range(10):
                cand = rho - scale * step
                if real_rho:
                    cand = mpc(cand.real, 0)
                try:
                    fc, _, _, _ = _eval_driver(alpha, cand, branch, sign_map, order, prec, N, driver_idx, step_frac, extra_bits)
                    if abs(fc) < abs(f0):
                        rho = cand
                        accepted = True
                        break
                except (GeometryError, FrobeniusError, ConvergenceDomainViolation):
                    pass
                scale = scale / 2
            if not accepted:
                if stall_ok_bits is not None and abs(f0) < mpfr(2) ** (-stall_ok_bits):
                    return rho, sign_map, it + 1
                raise NoConvergence(
                    f"Newton stalled at rho={complex(rho)}, |F|={float(abs(f0)):.3g}",
                    {"rho": complex(rho), "residual": float(abs(f0))},
                )
            if abs(scale * step) < mpfr(2) ** (-(prec - 24)):
                return rho, sign_map, it + 1
        raise NoConvergence(
            f"no convergence in {max_iter} iterations; last |F|={float(abs(f0)) if f0 is not None else float('nan'):.3g}"
        )


def _needed_order(D_list, heights, target_bits, prec, cap):
    """Smallest series order making every probe's truncation < 2^-target_bits."""
    with precision_context(prec):
        hmin = min(mpfr(h) / mpfr(D) for D in D_list for h in heights)
        n = int(gmpy2.ceil(mpfr(target_bits) * gmpy2.log(2) / (2 * gmpy2.const_pi() * hmin))) + 8
        return min(n, cap)


def solve_rho(alpha, config: SolverConfig | None = None, seed=None) -> UniformizationResult:
    """Fuchsian value of the accessory parameter for the normalized alpha."""
    config = config or SolverConfig()
    prec = config.precision_bits
    if prec < 128:
        raise SolverError("solving needs at least 128 bits")
    if config.N < 32:
        raise SolverError("solving needs truncation order N >= 32")
    with precision_context(prec):
        alpha = to_mpc(alpha, prec)
        if alpha in (mpc(0), mpc(1)):
            raise GeometryError("degenerate puncture")
        real_rho = alpha.imag == 0 and alpha.real > 1
        if seed is None:
            seed = (alpha + 1) / 2
        seed = to_mpc(seed, prec)
        tol = config.tolerance()

        spec_seed = ProblemSpec(alpha, seed, N=config.N, precision_bits=prec)
        branch = _resolve_branch(spec_seed, config)

        # search phase: moderate continuation accuracy, configured N; its
        # convergence target sits just above the truncation floor of the
        # driver probe at this N.
        geo0 = _geometry_at(
            spec_seed,
            branch["z2_branch"],
            branch["bulge_sign"],
            config.search_taylor_order,
            config.search_step_frac,
        )
        d_min0 = min(geo0["group"].D0.real, geo0["group"].D1.real, geo0["group"].D2.real)
        floor_bits = 2 * gmpy2.const_pi() * (config.N + 1) / (d_min0 * gmpy2.log(2))
        search_bits = max(24, min(int(floor_bits) - 40, prec // 2))
        search_order = min(config.search_taylor_order, max(36, int((search_bits + 16) / 2.885) + 1))

        def run_search(seed_value):
            return _newton(
                alpha,
                seed_value,
                branch,
                config,
                N=config.N,
                order=search_order,
                tol=mpfr(2) ** (-search_bits),
                real_rho=real_rho,
                max_iter=config.max_newton_iterations,
                stall_ok_bits=24,
                step_frac=config.search_step_frac,
            )

        try:
            rho, sign_map, iters = run_search(seed)
        except NoConvergence:
            best = _grid_seed(alpha, branch, config, search_order, real_rho)
            if best is None:
                raise
            rho, sign_map, iters = run_search(best)

        # polish phase: certificate-grade continuation and series order
        pol_order = max(48, int(0.347 * (prec + 2 * config.cert_guard_bits)) + 1)
        spec_mid = ProblemSpec(alpha, rho, N=config.N, precision_bits=prec)
        geo = _geometry_at(spec_mid, branch["z2_branch"], branch["bulge_sign"], pol_order, None)
        target_bits = config.tolerance_bits + config.cert_guard_bits
        d_list = [geo["group"].D0.real, geo["group"].D1.real, geo["group"].D2.real]
        n_drive = _needed_order([min(d_list)], (1.0,), target_bits, prec, config.max_cert_order)
        n_polish = max(config.N, n_drive)
        rho, sign_map, iters2 = _newton(
            alpha,
            rho,
            branch,
            config,
            N=n_polish,
            order=pol_order,
            tol=tol / 4,
            real_rho=real_rho,
            max_iter=16,
            sign_map=sign_map,
            stall_ok_bits=max(24, config.tolerance_bits - 8),
            extra_bits=_noise_margin(n_polish),
        )

        # certificate: all generators at both probes, order sized per generator
        n_cert = max(config.N, _needed_order(d_list, config.probe_heights, target_bits, prec, config.max_cert_order))
        spec_cert = ProblemSpec(alpha, rho, N=n_cert, precision_bits=prec)
        pipeline = _pipeline(spec_cert, branch, pol_order, None, extra_bits=_noise_margin(n_cert))
        signs = (sign_map[1], sign_map[2], sign_map[3])
        probes = residuals(
            spec_cert,
            tau_star=config.tau_star,
            pipeline=pipeline,
            signs=signs,
            heights=config.probe_heights,
        )
        # a failing probe may certify with the opposite square-root multiplier
        for i, p in enumerate(probes):
            if abs(p.value) > tol:
                flipped, bound = _transform_residual(
                    pipeline.f_series,
                    dict((g[0], g[1]) for g in _generator_list(pipeline.group))[p.generator_index],
                    p.tau_star,
                    -p.multiplier_sign,
                    prec,
                )
                if abs(flipped) <= tol:
                    probes[i] = ResidualProbe(
                        generator_index=p.generator_index,
                        tau_star=p.tau_star,
                        value=flipped,
                        truncation_bound=bound,
                        multiplier_sign=-p.multiplier_sign,
                    )
                    sign_map[p.generator_index] = -p.multiplier_sign
        worst = max(abs(p.value) for p in probes)
        worst_bound = max(p.truncation_bound for p in probes)
        if worst > tol:
            raise ResidualCheckFailed(
                f"certificate failed: max residual {float(worst):.3g} > tol {float(tol):.3g}"
                + (f" (evaluation bound {float(worst_bound):.3g})" if worst_bound > tol else "")
            )

        # final data at the configured output order, at the nominal precision
        t_series = _reround(pipeline.t_series.truncate(config.N), prec)
        f_series = _reround(pipeline.f_series.truncate(config.N), prec)
        return UniformizationResult(
            alpha=alpha,
            rho_F=rho,
            rho_hat_F=rho / alpha,
            r=pipeline.r,
            group=pipeline.group,
            residuals=probes,
            precision_bits=prec,
            N=config.N,
            t_series=t_series,
            f_series=f_series,
            multiplier_sign={str(k): v for k, v in sign_map.items()},
            branch_choices={
                "z2_branch": branch["z2_branch"],
                "bulge_sign": branch["bulge_sign"],
                "cusp_permutation": list(pipeline.geometry["perm"]),
            },
            certified_tolerance=tol,
            newton_iterations=iters + iters2,
        )


def continuation_solve(alphas, config: SolverConfig | None = None, seed_rho=None):
    """Solve along a list of alpha values, warm-starting each step; the first
    entry uses seed_rho (or the default seed).  Steps that fail are retried
    once through a midpoint."""
    config = config or SolverConfig()
    results = []
    seed = seed_rho
    prev_alpha = None
    for a in alphas:
        try:
            res = solve_rho(a, config, seed=seed)
        except NoConvergence:
            if prev_alpha is None:
                raise
            with precision_context(config.precision_bits):
                mid = (to_mpc(prev_alpha, config.precision_bits) + to_mpc(a, config.precision_bits)) / 2
            mid_res = solve_rho(mid, config, seed=seed)
            res = solve_rho(a, config, seed=mid_res.rho_F)
        results.append(res)
        seed = res.rho_F
        prev_alpha = a
    return results


# ---------------------------------------------------------------------------
# JSON form of results

def result_to_json(res: UniformizationResult, hex_floats: bool = False) -> dict:
    g = res.group

    def mat(m: Moebius):
        return [complex_to_json(e, hex_floats) for e in m.entries()]

    ctx = precision_context(res.precision_bits)
    ctx.__enter__()
    try:
        return _result_payload(res, g, mat, hex_floats)
    finally:
        ctx.__exit__(None, None, None)


def _result_payload(res, g, mat, hex_floats):
    return {
        "alpha": complex_to_json(res.alpha, hex_floats),
        "rho_F": complex_to_json(res.rho_F, hex_floats),
        "rho_hat_F": complex_to_json(res.rho_hat_F, hex_floats),
        "r": complex_to_json(res.r, hex_floats),
        "c1": complex_to_json(mpc(g.c1), hex_floats),
        "c2": complex_to_json(mpc(g.c2), hex_floats),
        "D0": complex_to_json(mpc(g.D0), hex_floats),
        "D1": complex_to_json(mpc(g.D1), hex_floats),
        "D2": complex_to_json(mpc(g.D2), hex_floats),
        "generators": {"T": mat(g.T), "S0": mat(g.S0), "Sc1": mat(g.Sc1), "Sc2": mat(g.Sc2)},
        "residuals": [
            {
                "generator_index": p.generator_index,
                "tau_star": complex_to_json(p.tau_star, hex_floats),
                "value": complex_to_json(p.value, hex_floats),
                "truncation_bound": complex_to_json(mpc(p.truncation_bound), hex_floats),
                "multiplier_sign": p.multiplier_sign,
            }
            for p in res.residuals
        ],
        "precision_bits": res.precision_bits,
        "N": res.N,
        "t_series": series_to_json(res.t_series, hex_floats),
        "f_series": series_to_json(res.f_series, hex_floats),
        "multiplier_sign": res.multiplier_sign,
        "branch_choices": res.branch_choices,
        "certified_tolerance": complex_to_json(mpc(res.certified_tolerance), hex_floats),
        "newton_iterations": res.newton_iterations,
    }


def result_from_json(obj: dict) -> UniformizationResult:
    prec = int(obj["precision_bits"])

    def cx(key):
        return complex_from_json(obj[key], prec)

    def mat(entries):
        e = [complex_from_json(x, prec) for x in entries]
        return Moebius(*e)

    with precision_context(prec):
        group = GroupData(
            c1=cx("c1").real,
            c2=cx("c2").real,
            D0=cx("D0").real,
            D1=cx("D1").real,
            D2=cx("D2").real,
            T=mat(obj["generators"]["T"]),
            S0=mat(obj["generators"]["S0"]),
            Sc1=mat(obj["generators"]["Sc1"]),
            Sc2=mat(obj["generators"]["Sc2"]),
            relation_defect=mpfr(0),
        )
        probes = [
            ResidualProbe(
                generator_index=int(p["generator_index"]),
                tau_star=complex_from_json(p["tau_star"], prec),
                value=complex_from_json(p["value"], prec),
                truncation_bound=complex_from_json(p["truncation_bound"], prec).real,
                multiplier_sign=int(p["multiplier_sign"]),
            )
            for p in obj["residuals"]
        ]
        return UniformizationResult(
            alpha=cx("alpha"),
            rho_F=cx("rho_F"),
            rho_hat_F=cx("rho_hat_F"),
            r=cx("r"),
            group=group,
            residuals=probes,
            precision_bits=prec,
            N=int(obj["N"]),
            t_series=series_from_json(obj["t_series"]),
            f_series=series_from_json(obj["f_series"]),
            multiplier_sign=obj.get("multiplier_sign", {}),
            branch_choices=obj.get("branch_choices", {}),
            certified_tolerance=complex_from_json(obj["certified_tolerance"], prec).real,
            newton_iterations=int(obj.get("newton_iterations", 0)),
        )
