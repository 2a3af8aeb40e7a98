"""Frobenius solutions of the uniformizing equation at t=0 and their offspring.

For the sphere with punctures {infinity, 1, 0, 1/alpha} the equation in
self-adjoint form is P(t) y'' + P'(t) y' + (t - rho/alpha) y = 0 with
P(t) = t (t-1) (t - 1/alpha).  Multiplying by alpha clears denominators:

    A(t) y'' + A'(t) y' + (alpha t - rho) y = 0,
    A(t) = alpha t^3 - (alpha+1) t^2 + t.

t=0 carries the Frobenius basis {y, yhat = y log t + u} normalized by
y(0)=1, u(0)=0.  From it we build the local inverse Q = exp(yhat/y) of the
covering coordinate, its reversion T(Q), the weight-one series F = y(T(Q)),
and (given the scale factor r) the same two series in the modular variable
q = Q/r.  Fixed points of the sphere's involutions may lie outside the
convergence disk, so solutions are also continued along paths by Taylor
re-expansion at ordinary points.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import precision_context, to_mpc
from .series import PowerSeries


class FrobeniusError(Exception):
    pass


class PathTooCloseToSingularity(FrobeniusError):
    pass


class StepUnderflow(FrobeniusError):
    pass


class ZeroDenominator(FrobeniusError):
    pass


@dataclass
class ProblemSpec:
    """Puncture parameter alpha, accessory parameter rho=alpha*rho_hat, sizes."""

    alpha: mpc
    rho: mpc
    N: int = 150
    precision_bits: int = 512

    def __post_init__(self):
        self.alpha = to_mpc(self.alpha, self.precision_bits)
        self.rho = to_mpc(self.rho, self.precision_bits)
        if self.alpha == 0 or self.alpha == 1:
            raise FrobeniusError("alpha must avoid {0, 1}")
        if self.N < 2:
            raise FrobeniusError("truncation order too small")

    @property
    def rho_hat(self) -> mpc:
        with precision_context(self.precision_bits):
            return self.rho / self.alpha

    def singularities(self):
        with precision_context(self.precision_bits):
            return (mpc(0), mpc(1), 1 / self.alpha)

    def disk_radius(self) -> mpfr:
        with precision_context(self.precision_bits):
            return min(mpfr(1), abs(1 / self.alpha))


# ---------------------------------------------------------------------------
# power-series data at t = 0

def frobenius_coefficients(spec: ProblemSpec):
    """Coefficient lists (a_n, b_n) of y and of the holomorphic part of yhat.

    a: alpha n^2 a_{n-1} - ((alpha+1)(n^2+n) + rho) a_n + (n+1)^2 a_{n+1} = 0
    b: same left side on b with inhomogeneous terms
       2 alpha n a_{n-1} - (2n+1)(alpha+1) a_n + 2(n+1) a_{n+1}.
    """
    alpha, rho, N = spec.alpha, spec.rho, spec.N
    with precision_context(spec.precision_bits):
        a = [mpc(1), mpc(rho)]
        b = [mpc(0)]
        for n in range(0, N + 1):
            if n >= 1:
                a.append(
                    (((alpha + 1) * (n * n + n) + rho) * a[n] - alpha * n * n * a[n - 1])
                    / mpc((n + 1) ** 2)
                )
            am1 = a[n - 1] if n >= 1 else mpc(0)
            bm1 = b[n - 1] if n >= 1 else mpc(0)
            b.append(
                (
                    ((alpha + 1) * (n * n + n) + rho) * b[n]
                    - alpha * n * n * bm1
                    - 2 * alpha * n * am1
                    + (2 * n + 1) * (alpha + 1) * a[n]
                    - 2 * (n + 1) * a[n + 1]
                )
                / mpc((n + 1) ** 2)
            )
    return a[: N + 1], b[: N + 1]


def y_series(spec: ProblemSpec, a=None) -> PowerSeries:
    if a is None:
        a, _ = frobenius_coefficients(spec)
    return PowerSeries(a, "t", spec.precision_bits)


def build_Q(spec: ProblemSpec, a=None, b=None) -> PowerSeries:
    """Q(t) = t * exp(u/y) where u is the holomorphic part of yhat."""
    if a is None or b is None:
        a, b = frobenius_coefficients(spec)
    prec = spec.precision_bits
    with precision_context(prec):
        ys = PowerSeries(a, "t", prec)
        us = PowerSeries([mpc(0)] + list(b[1:]), "t", prec)
        e = (us / ys).exp()
        coeffs = [mpc(0)] + e.coeffs[: spec.N]
    return PowerSeries(coeffs, "t", prec)


def build_T_and_F(spec: ProblemSpec, a=None, Qmap: PowerSeries | None = None):
    """Reversion T(Q) of the Q-map, and F(Q) = y(T(Q)); reference route."""
    if a is None:
        a, b = frobenius_coefficients(spec)
        if Qmap is None:
            Qmap = build_Q(spec, a, b)
    elif Qmap is None:
        _, b = frobenius_coefficients(spec)
        Qmap = build_Q(spec, a, b)
    Tmap = Qmap.revert()
    Tmap = PowerSeries(Tmap.coeffs, "Q", Tmap.prec)
    Fmap = PowerSeries(a, "t", spec.precision_bits).compose(Tmap)
    return Tmap, Fmap


@dataclass
class FrobeniusArtifacts:
    a: list
    b: list
    Qmap: PowerSeries
    Tmap: PowerSeries
    Fmap: PowerSeries


def build_artifacts(spec: ProblemSpec) -> FrobeniusArtifacts:
    a, b = frobenius_coefficients(spec)
    Qmap = build_Q(spec, a, b)
    Tmap, Fmap = build_T_and_F(spec, a, Qmap)
    return FrobeniusArtifacts(a=a, b=b, Qmap=Qmap, Tmap=Tmap, Fmap=Fmap)


# ---------------------------------------------------------------------------
# q-variable Hauptmodul/weight-one series (production builder)

def _conv(A, B, n, amin=0, bmin=0):
    i0 = max(amin, n - len(B) + 1)
    i1 = min(n - bmin, len(A) - 1)
    if i1 < i0:
        return mpc(0)
    bs = B[n - i1 : n - i0 + 1]
    bs.reverse()
    return sum(map(operator.mul, A[i0 : i1 + 1], bs), mpc(0))


def modular_series(spec: ProblemSpec, r, extra_bits: int = 0) -> tuple[PowerSeries, PowerSeries]:
    """Series t(q) = r q + ... and F(q) = 1 + ... solving the coupled system

        kappa * (q d/dq) t = F^2 P(t),
        P(t) F_tt + P'(t) F_t + (t - rho_hat) F = 0,

    order by order in q.  This reproduces revert/compose of the Q-map at the
    substitution Q = r q but keeps every stored coefficient O(1)-scaled,
    which is what makes high-order evaluation near |q| -> 1 numerically safe.

    extra_bits: additional working precision for the recurrence.  Rounding
    noise injected at order n grows along the homogeneous directions of the
    linearized system (measured ~0.72 bits per order), so certificate-grade
    builds at large N inflate the working precision accordingly; the final
    truncation bound computed from the actual tail coefficients still guards
    the result independently.
    """
    N = spec.N
    prec = spec.precision_bits + max(0, extra_bits)
    with precision_context(prec):
        kappa = 1 / spec.alpha
        rh = spec.rho_hat
        r = to_mpc(r, prec)
        Z = mpc(0)
        T = [Z] * (N + 3)
        S = [Z] * (N + 3)
        T2 = [Z] * (N + 3)
        T3 = [Z] * (N + 3)
        S2 = [Z] * (N + 3)
        S3 = [Z] * (N + 3)
        PT = [Z] * (N + 3)
        Pp = [Z] * (N + 3)
        F = [Z] * (N + 1)
        F2 = [Z] * (N + 1)
        A = [Z] * (N + 3)
        W = [Z] * (N + 3)
        X = [Z] * (N + 1)
        T[1] = r
        S[1] = r
        PT[1] = kappa * r
        Pp[0] = kappa
        Pp[1] = -2 * (1 + kappa) * r
        F[0] = mpc(1)
        F2[0] = mpc(1)
        X[0] = -rh
        for n in range(1, N + 1):
            m = n + 2
            # A = theta2(F)*theta(T) - theta(F)*theta2(T), order n+1, f_n pending
            sA = mpc(0)
            for j in range(1, n):
                l = n + 1 - j
                if 1 <= l <= n:
                    sA += j * l * (j - l) * F[j] * T[l]
            A[n + 1] = sA
            # W = theta(F)*S^2 at order m, f_n pending
            if S2[n + 1] == Z:
                S2[n + 1] = _conv(S, S, n + 1, 1, 1)
            sW = mpc(0)
            for j in range(1, n):
                k = m - j
                if 2 <= k <= n + 1:
                    sW += j * F[j] * S2[k]
            W[m] = sW
            # X = (T - rho_hat)*F at order n-1 (final)
            if n - 1 >= 1:
                x = -rh * F[n - 1]
                for u2 in range(1, n):
                    x += T[u2] * F[n - 1 - u2]
                X[n - 1] = x
            S3[n + 1] = _conv(S2, S, n + 1, 2, 1)
            S3[n + 2] = _conv(S2, S, n + 2, 2, 1)
            rest = _conv(PT, A, m, 1, 2) + _conv(Pp, W, m, 0, 3) + _conv(S3, X, m, 3, 0)
            fn = -rest / (kappa * r * r * n * n)
            F[n] = fn
            F2[n] = _conv(F, F, n)
            A[n + 1] += n * (n - 1) * fn * T[1]
            W[m] += n * fn * S2[2]
            if n < N:
                m1 = n + 1
                T2[m1] = _conv(T, T, m1, 1, 1)
                T3[m1] = _conv(T2, T, m1, 2, 1)
                tail = T3[m1] - (1 + kappa) * T2[m1]
                et = tail
                for j in range(1, m1):
                    et += F2[j] * PT[m1 - j]
                tm1 = et / (kappa * n)
                T[m1] = tm1
                S[m1] = m1 * tm1
                S2[m1] = _conv(S, S, m1, 1, 1)
                S3[m1] = _conv(S2, S, m1, 2, 1)
                PT[m1] = kappa * tm1 + tail
                Pp[m1] = 3 * T2[m1] - 2 * (1 + kappa) * tm1
        t_series = PowerSeries(T[: N + 1], "q", prec)
        f_series = PowerSeries(F[: N + 1], "q", prec)
    return t_series, f_series


# ---------------------------------------------------------------------------
# analytic continuation by Taylor stepping

@dataclass
class ContinuationState:
    t_current: mpc
    vector: tuple  # (y, y', yhat, yhat')
    path: list = field(default_factory=list)


def _taylor_pair(alpha, rho, t0, v1, v1p, v2, v2p, K):
    """Taylor coefficients at an ordinary point t0 of two solutions at once
    (shared recurrence weights).  Uses the alpha-scaled cubic A(t)."""
    A3 = alpha
    A2 = 3 * alpha * t0 - (alpha + 1)
    A1 = 3 * alpha * t0 * t0 - 2 * (alpha + 1) * t0 + 1
    A0 = alpha * t0 ** 3 - (alpha + 1) * t0 * t0 + t0
    C0 = alpha * t0 - rho
    C1 = alpha
    a = [v1, v1p]
    b = [v2, v2p]
    zero = mpc(0)
    for k in range(0, K):
        w1 = A1 * ((k + 1) * (k + 1))
        w0 = A2 * (k * (k + 1)) + C0
        wm = A3 * ((k - 1) * (k + 1)) + C1
        d = -1 / (A0 * ((k + 2) * (k + 1)))
        akm1 = a[k - 1] if k >= 1 else zero
        bkm1 = b[k - 1] if k >= 1 else zero
        a.append((w1 * a[k + 1] + w0 * a[k] + wm * akm1) * d)
        b.append((w1 * b[k + 1] + w0 * b[k] + wm * bkm1) * d)
    return a, b


def default_path(spec: ProblemSpec, target, bulge_sign: int = +1, clearance=None):
    """Waypoints from the series disk to the target, bulging around punctures."""
    prec = spec.precision_bits
    with precision_context(prec):
        target = to_mpc(target, prec)
        radius = spec.disk_radius()
        clearance = mpfr(clearance) if clearance is not None else mpfr("0.15")
        start = mpfr("0.5") * radius * target / abs(target)
        sing = spec.singularities()
        for s in sing:
            if abs(target - s) < mpfr("1e-6"):
                raise PathTooCloseToSingularity("target coincides with a puncture")

        def seg_dist(p, q, x):
            v = q - p
            tt = ((x - p) * mpc(v.real, -v.imag)).real / abs(v) ** 2
            tt = max(mpfr(0), min(mpfr(1), tt))
            return abs(x - (p + tt * v))

        if any(seg_dist(start, target, s) < clearance for s in sing):
            mid = (start + target) / 2 + bulge_sign * mpc(0, 1) * mpfr("0.2") * abs(target)
            return [start, mid, target]
        return [start, target]


def continue_solution(
    spec: ProblemSpec,
    target,
    path=None,
    order: int | None = None,
    step_frac=None,
    a=None,
    b=None,
):
    """Values (y, y', yhat, yhat') at the target, by Taylor re-expansion along
    the path.  The log branch of yhat is fixed by the principal log at the
    path start and then carried implicitly by continuing values."""
    prec = spec.precision_bits
    # the path starts at half the disk radius, where the series tail loses
    # one bit per term: the start values need ~precision-many coefficients
    # regardless of the truncation order of the series artifacts.
    required = prec + 48
    if a is None or b is None or len(a) <= required:
        spec_long = (
            spec
            if spec.N >= required
            else ProblemSpec(spec.alpha, spec.rho, N=required, precision_bits=prec)
        )
        a, b = frobenius_coefficients(spec_long)
    if order is None:
        order = max(32, int(0.347 * (prec + 40)) + 1)
    with precision_context(prec):
        alpha, rho = spec.alpha, spec.rho
        if path is None:
            path = default_path(spec, target)
        step_frac = mpfr(step_frac) if step_frac is not None else gmpy2.exp(mpfr(-2))
        t = to_mpc(path[0], prec)
        # series start values
        ln = gmpy2.log(t)
        yv = _horner(a, t)
        ypv = _horner_d(a, t)
        uv = _horner(b, t)
        upv = _horner_d(b, t)
        hy = yv * ln + uv
        hyp = ypv * ln + yv / t + upv
        sing = spec.singularities()
        tiny = mpfr(2) ** (-prec + 8)
        for wp in path[1:]:
            wp = to_mpc(wp, prec)
            while True:
                d = abs(wp - t)
                if d == 0:
                    break
                dmin = min(abs(t - s) for s in sing)
                if dmin < mpfr("1e-8"):
                    raise PathTooCloseToSingularity(f"path point {complex(t)} near a puncture")
                step = min(step_frac * dmin, d)
                direction = (wp - t) / d
                cy, chy = _taylor_pair(alpha, rho, t, yv, ypv, hy, hyp, order)
                while True:
                    s = step * direction
                    scale = abs(yv) + abs(hy) + 1
                    tail = (abs(cy[order]) + abs(chy[order])) * abs(s) ** order
                    if tail <= tiny * scale:
                        break
                    step = step / 2
                    if step < mpfr(2) ** (-prec) * dmin:
                        raise StepUnderflow("Taylor step underflow while continuing")
                yv, ypv = _horner_pair(cy, s)
                hy, hyp = _horner_pair(chy, s)
                t = t + s
        return yv, ypv, hy, hyp


def _horner(c, z):
    s = mpc(0)
    for ck in reversed(c):
        s = s * z + ck
    return s


def _horner_d(c, z):
    s = mpc(0)
    for k in range(len(c) - 1, 0, -1):
        s = s * z + k * c[k]
    return s


def _horner_pair(c, z):
    return _horner(c, z), _horner_d(c, z)


def Q_at(spec: ProblemSpec, z, path=None, order=None, step_frac=None, a=None, b=None) -> mpc:
    """Value of Q = exp(yhat/y) at z, continued along the path."""
    yv, _, hy, _ = continue_solution(spec, z, path=path, order=order, step_frac=step_frac, a=a, b=b)
    with precision_context(spec.precision_bits):
        if abs(yv) < mpfr(2) ** (-spec.precision_bits // 2):
            raise ZeroDenominator("y vanishes near the evaluation point; reroute the path")
        return gmpy2.exp(hy / yv)


# ---------------------------------------------------------------------------
# substitution cross-checks (the ODE applied to the series solutions)

def ode_residual_series(spec: ProblemSpec, a=None, b=None):
    """Residual series of A y'' + A' y' + (alpha t - rho) y for y, and the
    non-log residual for yhat; both vanish to order N-2 when a, b are right."""
    if a is None or b is None:
        a, b = frobenius_coefficients(spec)
    prec = spec.precision_bits
    N = spec.N
    with precision_context(prec):
        alpha, rho = spec.alpha, spec.rho
        A = PowerSeries([mpc(0), mpc(1), -(alpha + 1), alpha] + [mpc(0)] * (N - 3), "t", prec)
        Ap = PowerSeries([mpc(1), -2 * (alpha + 1), 3 * alpha] + [mpc(0)] * (N - 2), "t", prec)
        Cl = PowerSeries([-rho, alpha] + [mpc(0)] * (N - 1), "t", prec)
        ys = PowerSeries(a, "t", prec)
        us = PowerSeries([mpc(0)] + list(b[1:]), "t", prec)

        def L(f: PowerSeries) -> PowerSeries:
            f1 = f.derive()
            f2 = f1.derive()
            return (A.truncate(f2.order) * f2) + (Ap.truncate(f1.order) * f1) + (Cl * f)

        res_y = L(ys)
        # yhat = y log t + u: the non-log part of L[yhat] is
        # 2 (A/t) y' + (A' - A/t)/t * y + L[u], both prefactors polynomial.
        A_over_t = PowerSeries([mpc(1), -(alpha + 1), alpha] + [mpc(0)] * (N - 2), "t", prec)
        lin = PowerSeries([-(alpha + 1), 2 * alpha] + [mpc(0)] * (N - 1), "t", prec)
        y1 = ys.derive()
        cross = 2 * (A_over_t.truncate(y1.order) * y1) + lin * ys
        res_hat = cross.truncate(res_y.order) + L(us)
    return res_y, res_hat


def wronskian_series(spec: ProblemSpec, a=None, b=None) -> PowerSeries:
    """P(t) * (y yhat' - y' yhat) as a t-series; constant kappa = 1/alpha."""
    if a is None or b is None:
        a, b = frobenius_coefficients(spec)
    prec = spec.precision_bits
    N = spec.N
    with precision_context(prec):
        alpha = spec.alpha
        kappa = 1 / alpha
        ys = PowerSeries(a, "t", prec)
        us = PowerSeries([mpc(0)] + list(b[1:]), "t", prec)
        y1 = ys.derive()
        u1 = us.derive()
        # y yhat' - y' yhat = y^2/t + y u' - y' u; multiply by P = t(t-1)(t-kappa):
        quad = PowerSeries([kappa, -(1 + kappa), mpc(1)] + [mpc(0)] * (N - 2), "t", prec)
        P = PowerSeries([mpc(0), kappa, -(1 + kappa), mpc(1)] + [mpc(0)] * (N - 3), "t", prec)
        main = quad * (ys * ys)
        rest = P.truncate(N - 1) * (ys.truncate(N - 1) * u1 - y1 * us.truncate(N - 1))
        return main.truncate(rest.order) + rest
