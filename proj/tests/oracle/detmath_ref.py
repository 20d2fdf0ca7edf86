"""Reference port of the deterministic math kernels.

Written independently of the C++ engine. Every step is a single IEEE-754
binary64 operation in a fixed order; CPython floats never fuse or reassociate,
so the results here are the bit-level ground truth the engine must reproduce.

Internally exp carries an unevaluated double-double (hi + lo) so that softmax
and logit can normalise without compounding rounding errors.
"""
import math

LN2_HI = float.fromhex("0x1.62e42fee00000p-1")
LN2_LO = float.fromhex("0x1.a39ef35793c76p-33")
INV_LN2 = float.fromhex("0x1.71547652b82fep+0")
SQRT_HALF = float.fromhex("0x1.6a09e667f3bcdp-1")
ONE_MINUS_ULP = float.fromhex("0x1.fffffffffffffp-1")
SPLITTER = 134217729.0  # 2^27 + 1

# 1/n! for n = 13 .. 2, highest order first (Horner order).
EXP_COEFFS = [1.0 / math.factorial(n) for n in range(13, 1, -1)]
# 2/(2j+1) for j = 12 .. 1, highest order first.
LN_COEFFS = [2.0 / (2 * j + 1) for j in range(12, 0, -1)]


class NumericFault(Exception):
    pass


def _finite(x):
    if math.isnan(x) or math.isinf(x):
        raise NumericFault("non-finite value")
    return x


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(a, b):
    s, e = two_sum(a[0], b[0])
    e = e + (a[1] + b[1])
    return fast_two_sum(s, e)


def dd_div(a, b):
    if abs(b[0]) > 2.0 ** 995:
        a = (math.ldexp(a[0], -64), math.ldexp(a[1], -64))
        b = (math.ldexp(b[0], -64), math.ldexp(b[1], -64))
    q1 = a[0] / b[0]
    p, pe = two_prod(q1, b[0])
    r = ((a[0] - p) - pe + a[1]) - q1 * b[1]
    q2 = r / b[0]
    return q1 + q2


def exp_parts(x):
    """exp(x) = (hi + lo) * 2^k, or None when the result underflows to zero."""
    _finite(x)
    if x > 710.0:
        raise NumericFault("exp overflow")
    if x < -746.0:
        return None
    k = math.floor(x * INV_LN2 + 0.5)
    hi = x - k * LN2_HI
    lo = k * LN2_LO
    r = hi - lo
    r_err = (hi - r) - lo
    q = EXP_COEFFS[0]
    for c in EXP_COEFFS[1:]:
        q = q * r + c
    t_hi, t_lo = two_sum(r, r_err + r * (r * q))
    p_hi, p_lo = two_sum(1.0, t_hi)
    p_hi, p_lo = fast_two_sum(p_hi, p_lo + t_lo)
    return p_hi, p_lo, int(k)


def exp(x):
    parts = exp_parts(x)
    if parts is None:
        return 0.0
    return _finite(math.ldexp(parts[0], parts[2]))


def _exp_dd(x):
    parts = exp_parts(x)
    if parts is None:
        return (0.0, 0.0)
    hi = _finite(math.ldexp(parts[0], parts[2]))
    return (hi, math.ldexp(parts[1], parts[2]))


def ln(x):
    _finite(x)
    if not x > 0.0:
        raise NumericFault("ln domain")
    m, e = math.frexp(x)
    if m < SQRT_HALF:
        m = m * 2.0
        e -= 1
    f = m - 1.0
    s = f / (2.0 + f)
    z = s * s
    poly = LN_COEFFS[0]
    for c in LN_COEFFS[1:]:
        poly = poly * z + c
    big_r = z * poly
    hfsq = 0.5 * f * f
    fe = float(e)
    return fe * LN2_HI - ((hfsq - (s * (hfsq + big_r) + fe * LN2_LO)) - f)


def logit(x):
    _finite(x)
    den = dd_add((1.0, 0.0), _exp_dd(-x))
    r = dd_div((1.0, 0.0), den)
    if r >= 1.0:
        r = ONE_MINUS_ULP
    return r


def softmax(v):
    if not v:
        raise ValueError("empty")
    for x in v:
        _finite(x)
    m = v[0]
    for x in v[1:]:
        if x > m:
            m = x
    es = []
    for x in v:
        d, err = two_sum(x, -m)
        hi, lo = _exp_dd(_finite(d))
        es.append(fast_two_sum(hi, lo + hi * err))
    total = (0.0, 0.0)
    for e in es:
        total = dd_add(total, e)
    return [_finite(dd_div(e, total)) for e in es]


def argmax(v):
    if not v:
        raise ValueError("empty")
    best = 0
    for i, x in enumerate(v):
        if math.isnan(x):
            raise NumericFault("NaN")
        if x > v[best]:
            best = i
    return best


def dot(a, b):
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    acc = 0.0
    for x, y in zip(a, b):
        acc = _finite(acc + _finite(x * y))
    return acc
