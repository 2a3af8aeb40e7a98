"""Arbitrary-precision complex scalars.

All numeric scalars in this package are gmpy2.mpc values.  Binary operations
in gmpy2 round to the precision of the *current context*, so every public
entry point wraps its work in ``precision_context(bits)``; when two operands
carry different precisions we compute at the larger one.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpc, mpfr

MIN_PRECISION = 64


def precision_context(bits: int):
    """Context manager running gmpy2 arithmetic at the given precision."""
    if bits < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {bits}")
    return gmpy2.context(precision=bits)


def to_mpc(value, bits: int) -> mpc:
    """Coerce value (number or decimal/hex string or (re, im) pair) to mpc."""
    with precision_context(bits):
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return mpc(_to_mpfr(value[0], bits), _to_mpfr(value[1], bits))
        if isinstance(value, mpc):
            return mpc(value)
        if isinstance(value, str):
            return _parse_complex_str(value, bits)
        if isinstance(value, complex):
            return mpc(value.real, value.imag)
        return mpc(_to_mpfr(value, bits))


def _to_mpfr(value, bits: int) -> mpfr:
    with precision_context(bits):
        if isinstance(value, str):
            s = value.strip()
            if s.startswith("@hex:"):
                return _mpfr_from_hex(s[5:], bits)
            return mpfr(s)
        return mpfr(value)


def _parse_complex_str(s: str, bits: int) -> mpc:
    """Parse 'a', 'a+bi', 'a-bi', 'bi' with decimal parts."""
    s = s.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s.endswith(("i", "j")):
        body = s[:-1]
        # split at the last +/- that is not part of an exponent
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                re_part, im_part = body[:k], body[k:]
                if im_part in ("+", "-"):
                    im_part += "1"
                return mpc(_to_mpfr(re_part, bits), _to_mpfr(im_part, bits))
        if body in ("", "+", "-"):
            body += "1"
        return mpc(mpfr(0), _to_mpfr(body, bits))
    return mpc(_to_mpfr(s, bits))


def prec_of(x) -> int:
    """Precision in bits carried by an mpfr/mpc value."""
    if isinstance(x, mpc):
        return max(x.real.precision, x.imag.precision)
    if isinstance(x, mpfr):
        return x.precision
    return MIN_PRECISION


# ---------------------------------------------------------------------------
# serialization: decimal strings (human-readable) and hex strings (bit exact)

def mpfr_to_decimal(x: mpfr) -> str:
    digits = max(2, int(x.precision * 0.30103) + 3)
    return format(x, f".{digits}g")


def mpfr_to_hex(x: mpfr) -> str:
    """Lossless textual form: sign, hex mantissa, binary exponent, precision."""
    if gmpy2.is_nan(x):
        return f"nan:{x.precision}"
    if gmpy2.is_infinite(x):
        return ("-inf" if x < 0 else "inf") + f":{x.precision}"
    m, e = x.as_mantissa_exp()
    return f"{m:#x}p{int(e)}:{x.precision}"


def _mpfr_from_hex(s: str, bits: int) -> mpfr:
    body, _, prec_s = s.rpartition(":")
    prec = int(prec_s) if prec_s else bits
    with precision_context(max(prec, MIN_PRECISION)):
        if body in ("nan", "inf", "-inf"):
            return mpfr(body)
        mant_s, _, exp_s = body.partition("p")
        return mpfr(gmpy2.mpz(mant_s, 16)) * mpfr(2) ** int(exp_s)


def complex_to_json(z: mpc, hex_floats: bool = False) -> dict:
    out = {"re": mpfr_to_decimal(z.real), "im": mpfr_to_decimal(z.imag)}
    if hex_floats:
        out["re"] = "@hex:" + mpfr_to_hex(z.real)
        out["im"] = "@hex:" + mpfr_to_hex(z.imag)
    return out


def complex_from_json(obj, bits: int) -> mpc:
    if isinstance(obj, dict):
        with precision_context(bits):
            return mpc(_to_mpfr(obj["re"], bits), _to_mpfr(obj["im"], bits))
    return to_mpc(obj, bits)
