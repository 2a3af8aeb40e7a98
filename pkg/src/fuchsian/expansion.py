"""Local expansion of the accessory-value function around the symmetric point.

The accessory value as a function of the puncture w is real-analytic but not
holomorphic, so around w = 1/2 it has an expansion sum a_{j,k} z^j zbar^k
with real coefficients (z = w - 1/2).  Sampling along the pencil of lines
L_n: z = x (1 + i/n) with x real collapses the expansion to one real
variable per line,

    rho(1/2 + x(1+i/n)) = sum a_{j,k} (1+i/n)^j (1-i/n)^k x^{j+k},

and enough lines separate the coefficients by a linear solve.  The fit is
done to a higher internal degree than reported: truncation bias from the
first omitted order otherwise contaminates the low coefficients well above
the solver noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import precision_context, to_mpc
from .convert import transport_rho
from .geometry import GeometryError, normalize_domain
from .solver import NoConvergence, SolverConfig, SolverError, solve_rho


class ExpansionError(Exception):
    pass


class IllConditionedFit(ExpansionError):
    pass


@dataclass
class ExpandConfig:
    slopes: tuple = (1, 2, 3, 4, 6, 8, 12)
    x_magnitudes: tuple = (0.002, 0.004, 0.006, 0.008, 0.010, 0.012, 0.014, 0.016)
    degree: int = 2
    guard_degree: int = 4  # internal fit degree = degree + guard_degree
    sample_precision: int = 192
    sample_N: int = 200
    fit_precision: int = 320

    def solver_config(self) -> SolverConfig:
        return SolverConfig(precision_bits=self.sample_precision, N=self.sample_N)

    def signed_xs(self):
        return sorted([x for x in self.x_magnitudes] + [-x for x in self.x_magnitudes], key=abs)


@dataclass
class SampleSet:
    slope: int
    xs: list
    ws: list
    values: list  # accessory values at the original w
    dropped: list = field(default_factory=list)


def line_point(slope: int, x, prec: int) -> mpc:
    with precision_context(prec):
        x = mpfr(x)
        return mpc(mpfr("0.5") + x, x / slope)


def sample_line(slope: int, xs=None, config: ExpandConfig | None = None, cache=None) -> SampleSet:
    """Accessory values along L_slope, continued outward from x=0 where the
    value is exactly 1.  Samples whose solve fails are dropped and reported."""
    config = config or ExpandConfig()
    prec = config.sample_precision
    xs = list(xs) if xs is not None else config.signed_xs()
    scfg = config.solver_config()
    out = SampleSet(slope=slope, xs=[], ws=[], values=[])
    seeds = {1: None, -1: None}  # per direction, warm start at rho ~ 1
    for x in sorted(xs, key=abs):
        w = line_point(slope, x, prec)
        direction = 1 if x >= 0 else -1
        cached = cache.get("sample", _sample_key(w, prec, config.sample_N)) if cache else None
        if cached is not None:
            rho_w = to_mpc((cached["re"], cached["im"]), prec)
            out.xs.append(mpfr(x))
            out.ws.append(w)
            out.values.append(rho_w)
            continue
        try:
            alpha, record = normalize_domain(w, prec)
            seed = seeds[direction]
            res = solve_rho(alpha, scfg, seed=seed)
            seeds[direction] = res.rho_F
            rho_w = transport_rho(record, res.rho_F, prec)
        except (SolverError, GeometryError) as exc:  # failed samples are dropped, not fatal
            out.dropped.append({"x": float(x), "slope": slope, "error": str(exc)})
            continue
        out.xs.append(mpfr(x))
        out.ws.append(w)
        out.values.append(rho_w)
        if cache:
            cache.put(
                "sample",
                _sample_key(w, prec, config.sample_N),
                {"re": format(rho_w.real, ".80g"), "im": format(rho_w.imag, ".80g")},
            )
    return out


def _sample_key(w: mpc, prec: int, N: int) -> dict:
    return {"w_re": format(w.real, ".40g"), "w_im": format(w.imag, ".40g"), "prec": prec, "N": N}


# ---------------------------------------------------------------------------
# the linear fit

@dataclass
class ExpansionFit:
    degree: int
    a: dict  # (j, k) -> mpfr, j+k <= degree
    a_internal: dict  # all fitted coefficients
    residual_norm: mpfr
    max_imag: mpfr
    condition: mpfr

    def coeff(self, j: int, k: int) -> mpfr:
        return self.a_internal.get((j, k), mpfr(0))


def fit_coefficients(samples, degree: int, guard_degree: int = 4, prec: int = 320) -> ExpansionFit:
    """Least squares for the a_{j,k}; complex unknowns whose imaginary parts
    must come out at noise level (they are discarded after that check)."""
    deg_int = degree + guard_degree
    terms = [(j, k) for tot in range(deg_int + 1) for j in range(tot + 1) for k in [tot - j]]
    nsamples = sum(len(s.xs) for s in samples)
    if nsamples < len(terms):  # two real equations per sample, two unknowns per term
        raise ExpansionError(
            f"{nsamples} samples cannot determine {len(terms)} complex coefficients"
        )
    slopes = {s.slope for s in samples if s.xs}
    if len(slopes) < deg_int + 1:  # the deg_int+1 terms of top total degree
        raise ExpansionError(
            f"{len(slopes)} distinct slopes cannot separate degree-{deg_int} terms; "
            f"need at least {deg_int + 1}"
        )
    with precision_context(prec):
        rows = []
        rhs = []
        for s in samples:
            inv = 1 / mpfr(s.slope)
            base_p = mpc(1, inv)
            base_m = mpc(1, -inv)
            for x, val in zip(s.xs, s.values):
                x = mpfr(x)
                coeffs = []
                for (j, k) in terms:
                    coeffs.append(base_p**j * base_m**k * x ** (j + k))
                v = to_mpc(val, prec)
                # complex unknown a = u + iv_im: two real rows per sample
                row_re = []
                row_im = []
                for c in coeffs:
                    row_re.extend([c.real, -c.imag])
                    row_im.extend([c.imag, c.real])
                rows.append(row_re)
                rhs.append(v.real)
                rows.append(row_im)
                rhs.append(v.imag)
        ncols = 2 * len(terms)
        col_scale = [max(max(abs(r[c]) for r in rows), mpfr(2) ** (-prec)) for c in range(ncols)]
        for r in rows:
            for c in range(ncols):
                r[c] = r[c] / col_scale[c]
        sol, resid, cond = _lstsq_qr(rows, rhs, prec)
        if cond > mpfr(2) ** (prec // 2):
            raise IllConditionedFit(f"condition estimate {float(cond):.3g}")
        a_internal = {}
        max_imag = mpfr(0)
        for idx, (j, k) in enumerate(terms):
            u = sol[2 * idx] / col_scale[2 * idx]
            vii = sol[2 * idx + 1] / col_scale[2 * idx + 1]
            max_imag = max(max_imag, abs(vii))
            a_internal[(j, k)] = u
        a = {jk: v for jk, v in a_internal.items() if jk[0] + jk[1] <= degree}
    return ExpansionFit(
        degree=degree,
        a=a,
        a_internal=a_internal,
        residual_norm=resid,
        max_imag=max_imag,
        condition=cond,
    )


def _lstsq_qr(rows, rhs, prec: int):
    """Householder QR least squares; returns (solution, residual_norm, cond)."""
    m = len(rows)
    n = len(rows[0])
    with precision_context(prec):
        A = [row[:] for row in rows]
        b = list(rhs)
        diag = []
        for k in range(n):
            # Householder vector for column k
            sigma = gmpy2.sqrt(sum(A[i][k] ** 2 for i in range(k, m)))
            if sigma == 0:
                diag.append(mpfr(0))
                continue
            if A[k][k] > 0:
                sigma = -sigma
            v0 = A[k][k] - sigma
            vs = [v0] + [A[i][k] for i in range(k + 1, m)]
            beta = sigma * v0  # = -(v^T v)/2
            A[k][k] = sigma
            diag.append(abs(sigma))
            for j in range(k + 1, n):
                dot = vs[0] * A[k][j]
                for i in range(k + 1, m):
                    dot += vs[i - k] * A[i][j]
                fac = dot / beta
                A[k][j] += fac * vs[0]
                for i in range(k + 1, m):
                    A[i][j] += fac * vs[i - k]
            dot = vs[0] * b[k]
            for i in range(k + 1, m):
                dot += vs[i - k] * b[i]
            fac = dot / beta
            b[k] += fac * vs[0]
            for i in range(k + 1, m):
                b[i] += fac * vs[i - k]
        # back substitution
        x = [mpfr(0)] * n
        for k in range(n - 1, -1, -1):
            s = b[k]
            for j in range(k + 1, n):
                s -= A[k][j] * x[j]
            x[k] = s / A[k][k] if A[k][k] != 0 else mpfr(0)
        resid_sq = sum(b[i] ** 2 for i in range(n, m))
        resid = gmpy2.sqrt(resid_sq / max(1, m - n))
        nz = [d for d in diag if d > 0]
        cond = (max(nz) / min(nz)) if nz else mpfr("inf")
    return x, resid, cond


# ---------------------------------------------------------------------------
# relation families among the fitted coefficients

def verify_relations(fit: ExpansionFit) -> dict:
    """Deviations (normalized by max |a|) of the relation families:
    the reflection pair a_{2,0}+2a_{1,0}, a_{1,1}+2a_{0,1}; vanishing a_{0,2m};
    a_{i+1,j}+2a_{i,j} for odd i+j; and the conjugate-derivative family
    (j+1)a_{i,j+1} - 2j a_{i,j} = (i+1)a_{j,i+1} - 2i a_{j,i}."""
    if fit.degree < 2:
        raise ExpansionError("relations need a fit of degree >= 2")
    amax = max(abs(v) for v in fit.a.values())
    have = fit.a_internal

    def get(j, k):
        return have.get((j, k))

    report = {"normalizer": amax, "relations": []}

    def add(name, value):
        report["relations"].append({"name": name, "deviation": abs(value), "normalized": abs(value) / amax})

    if get(2, 0) is not None:
        add("a20+2a10", get(2, 0) + 2 * get(1, 0))
    if get(1, 1) is not None:
        add("a11+2a01", get(1, 1) + 2 * get(0, 1))
    for m in range(1, fit.degree // 2 + 1):
        if get(0, 2 * m) is not None:
            add(f"a0{2*m}", get(0, 2 * m))
    for (j, k) in sorted(fit.a):
        if (j + k) % 2 == 1 and get(j + 1, k) is not None and j + 1 + k <= fit.degree:
            add(f"a{j+1}{k}+2a{j}{k}", get(j + 1, k) + 2 * get(j, k))
    for (i, j) in sorted(fit.a):
        need = [(i, j + 1), (j, i + 1), (j, i)]
        if all(get(*p) is not None for p in need) and max(i + j + 1, j + i + 1) <= fit.degree:
            lhs = (j + 1) * get(i, j + 1) - 2 * j * get(i, j)
            rhs = (i + 1) * get(j, i + 1) - 2 * i * get(j, i)
            add(f"conj_deriv_{i}{j}", lhs - rhs)
    return report
