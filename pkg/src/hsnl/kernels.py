"""Radial kernel families for half-space nonlocal operators.

A kernel is a nonnegative radial weight w(z) = profile(|z|) on R^d.  Every
family must satisfy the standing integrability conditions: the first moment
near the origin M1 = int_{|z|<=1} |z| w dz lies in (0, inf) and the tail
mass M2 = int_{|z|>1} w dz is finite.

Families:

  constant_ball        c * chi_{|z|<=1}, default c = 2d(d+1)/omega_{d-1}
                       so the full first moment equals 2d
  riesz_truncated      |z|^{-d-s} chi_{|z|<=1},  s in (0,1)
  fractional_vanishing 2 d delta |z|^{delta-d-1} on all of R^d
  log_regularized      c |log delta|^{-1} |z|^{-1} (|z|+delta)^{-d}
  log_truncated        (2d/omega_{d-1}) |log delta|^{-1} |z|^{-d-1}
                       on delta < |z| < 1
  min_level            min{n, w_base} pointwise
  rescaled             delta^{-d-1} w_base(z/delta)
  cutoff               w_base * chi_{|z|<=R}
  tabulated            samples interpolated linearly in log r; the sampled
                       range defines the support (no extrapolation)

The radial profiles are piecewise analytic (powers, linear-in-log-r
segments, or the log_regularized shape), so all moment integrals are done
with closed-form antiderivatives rather than quadrature.  Integrals that
diverge are reported as math.inf, which callers can tell apart from a
numerical failure.

Kernels are immutable; every operation is a pure function of its inputs.
"""

import functools
import math
from dataclasses import dataclass, replace

import numpy as np

_DELTA_LADDER = (0.2, 0.1, 0.05, 0.025)
_MOMENT_RADII = (0.25, 0.5, 1.0, 2.0, 4.0)


class AssumptionError(ValueError):
    """A kernel violates the standing integrability conditions."""


def surface_measure(d):
    """Surface measure of the unit sphere in R^d (2, 2 pi, 4 pi)."""
    if d == 1:
        return 2.0
    if d == 2:
        return 2.0 * math.pi
    if d == 3:
        return 4.0 * math.pi
    raise ValueError(f"dimension {d} not supported")


@dataclass(frozen=True)
class Kernel:
    family: str
    d: int
    params: tuple
    c_norm: float = 1.0
    base: "Kernel | None" = None

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params)
        tail = f", c_norm={self.c_norm}" if self.c_norm != 1.0 else ""
        if self.base is not None:
            inner = f"{inner}, base={self.base!r}" if inner else f"base={self.base!r}"
        return f"Kernel({self.family}, d={self.d}{', ' if inner else ''}{inner}{tail})"


def _p(kernel, name):
    for k, v in kernel.params:
        if k == name:
            return v
    raise KeyError(name)


def _check_d(d):
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2, or 3, got {d}")


def constant_ball(d=1, c=None):
    """Constant kernel on the unit ball.

    The default constant 2d(d+1)/omega_{d-1} makes the full first moment
    exactly 2d (it reduces to the profile 2*chi_{r<=1} when d=1).
    """
    _check_d(d)
    if c is None:
        c = 2.0 * d * (d + 1) / surface_measure(d)
    if c <= 0:
        raise ValueError("constant_ball needs a positive constant")
    return Kernel("constant_ball", d, (("c", float(c)),))


def riesz_truncated(d, s):
    if not 0.0 < s < 1.0:
        raise ValueError("riesz exponent s must lie in (0, 1)")
    _check_d(d)
    return Kernel("riesz_truncated", d, (("s", float(s)),))


def fractional_vanishing(d, delta, normalize=True):
    """Vanishing-horizon fractional kernel 2 d delta |z|^{delta-d-1}.

    With normalize=True the weight carries the factor 1/omega_{d-1}, which
    makes the delta->0 limit of int_{B_R} |z| w dz equal to 2d in every
    dimension; the raw form has limit 2d*omega_{d-1} instead.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    _check_d(d)
    cn = 1.0 / surface_measure(d) if normalize else 1.0
    return Kernel("fractional_vanishing", d, (("delta", float(delta)),), c_norm=cn)


def log_regularized(d, delta, normalize=True):
    """The borderline kernel |z|^{-1}(|z|+delta)^{-d}, log-normalized.

    The |log delta|^{-1} factor is always present; normalize=True adds the
    constant 2d/omega_{d-1} so the delta->0 first-moment limit over any
    fixed ball is 2d.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    _check_d(d)
    cn = 2.0 * d / surface_measure(d) if normalize else 1.0
    return Kernel("log_regularized", d, (("delta", float(delta)),), c_norm=cn)


def log_truncated(d, delta):
    """(2d/omega_{d-1}) |log delta|^{-1} |z|^{-d-1} on delta < |z| < 1.

    The stated constant already gives first moment exactly 2d for every
    delta, so no further normalization is applied.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    _check_d(d)
    return Kernel("log_truncated", d, (("delta", float(delta)),))


def min_level(base, level):
    """Pointwise truncation min{level, w_base}, keeping the base tail."""
    if level <= 0:
        raise ValueError("level must be positive")
    return Kernel("min_level", base.d, (("level", float(level)),), base=base)


def rescaled(base, delta):
    """Horizon rescaling delta^{-d-1} w_base(z/delta)."""
    if delta <= 0:
        raise ValueError("rescaling delta must be positive")
    return Kernel("rescaled", base.d, (("delta", float(delta)),), base=base)


def cutoff(base, radius):
    """Tail cutoff w_base * chi_{|z|<=radius}."""
    if radius <= 0:
        raise ValueError("cutoff radius must be positive")
    return Kernel("cutoff", base.d, (("radius", float(radius)),), base=base)


def tabulated(d, radii, values):
    """Kernel from samples (r_i, w_i), linear in log r between samples.

    The sampled range is the support; the profile is never extrapolated
    beyond it and evaluates to zero outside.
    """
    _check_d(d)
    radii = tuple(float(r) for r in radii)
    values = tuple(float(v) for v in values)
    if len(radii) != len(values) or len(radii) < 2:
        raise ValueError("need at least two matching (radius, value) samples")
    if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    return Kernel("tabulated", d, (("radii", radii), ("values", values)))


# ---------------------------------------------------------------------------
# Piecewise-analytic radial decomposition.
#
# Each piece is a tuple (kind, a, b, *data) describing the profile on (a, b):
#   ("pow", a, b, coeff, p)          coeff * r^p
#   ("loglin", a, b, u, v)           u + v * log(r)
#   ("logreg", a, b, coeff, dl, dd)  coeff * r^{-1} (r + dl)^{-dd}
# The c_norm factor of the kernel (and of every wrapped base) is folded in.
# ---------------------------------------------------------------------------

def _scale_piece(piece, factor):
    kind, a, b = piece[0], piece[1], piece[2]
    if kind == "pow":
        return ("pow", a, b, piece[3] * factor, piece[4])
    if kind == "loglin":
        return ("loglin", a, b, piece[3] * factor, piece[4] * factor)
    if kind == "logreg":
        return ("logreg", a, b, piece[3] * factor, piece[4], piece[5])
    raise ValueError(kind)


def _min_level_pieces(pieces, n):
    out = []
    for piece in pieces:
        kind, a, b = piece[0], piece[1], piece[2]
        if kind != "pow":
            raise ValueError("min_level supports piecewise-power bases only")
        c, p = piece[3], piece[4]
        if p == 0:
            out.append(("pow", a, b, min(c, n), 0.0))
            continue
        rstar = (n / c) ** (1.0 / p)
        if p < 0:
            # decreasing: capped at n left of rstar
            lo, hi = min(max(rstar, a), b), b
            if a < lo:
                out.append(("pow", a, lo, n, 0.0))
            if lo < hi:
                out.append(("pow", lo, hi, c, p))
        else:
            lo, hi = a, min(max(rstar, a), b)
            if lo < hi:
                out.append(("pow", lo, hi, c, p))
            if hi < b:
                out.append(("pow", hi, b, n, 0.0))
    return out


def _pieces(kernel):
    fam = kernel.family
    d = kernel.d
    cn = kernel.c_norm
    if fam == "constant_ball":
        return [("pow", 0.0, 1.0, cn * _p(kernel, "c"), 0.0)]
    if fam == "riesz_truncated":
        return [("pow", 0.0, 1.0, cn, -d - _p(kernel, "s"))]
    if fam == "fractional_vanishing":
        dl = _p(kernel, "delta")
        return [("pow", 0.0, math.inf, cn * 2.0 * d * dl, dl - d - 1.0)]
    if fam == "log_regularized":
        dl = _p(kernel, "delta")
        return [("logreg", 0.0, math.inf, cn / abs(math.log(dl)), dl, d)]
    if fam == "log_truncated":
        dl = _p(kernel, "delta")
        coeff = cn * (2.0 * d / surface_measure(d)) / abs(math.log(dl))
        return [("pow", dl, 1.0, coeff, -d - 1.0)]
    if fam == "tabulated":
        radii = _p(kernel, "radii")
        values = _p(kernel, "values")
        out = []
        for (r0, w0), (r1, w1) in zip(zip(radii, values), zip(radii[1:], values[1:])):
            v = (w1 - w0) / (math.log(r1) - math.log(r0))
            u = w0 - v * math.log(r0)
            out.append(("loglin", r0, r1, cn * u, cn * v))
        return out
    if fam == "min_level":
        return [_scale_piece(q, cn) for q in
                _min_level_pieces(_pieces(kernel.base), _p(kernel, "level"))]
    if fam == "rescaled":
        dl = _p(kernel, "delta")
        out = []
        for piece in _pieces(kernel.base):
            kind, a, b = piece[0], dl * piece[1], dl * piece[2]
            if kind == "pow":
                c, p = piece[3], piece[4]
                out.append(("pow", a, b, cn * c * dl ** (-kernel.d - 1 - p), p))
            elif kind == "loglin":
                u, v = piece[3], piece[4]
                s = dl ** (-kernel.d - 1)
                out.append(("loglin", a, b, cn * s * (u - v * math.log(dl)), cn * s * v))
            else:  # logreg keeps its shape with a shrunk delta
                c, d0, dd = piece[3], piece[4], piece[5]
                out.append(("logreg", a, b, cn * c, dl * d0, dd))
        return out
    if fam == "cutoff":
        radius = _p(kernel, "radius")
        out = []
        for piece in _pieces(kernel.base):
            a, b = piece[1], min(piece[2], radius)
            if a < b:
                out.append(_scale_piece((piece[0], a, b) + piece[3:], cn))
        return out
    raise ValueError(f"unknown family {fam}")


def support(kernel):
    """Radial support interval (lo, hi); hi may be math.inf."""
    ps = _pieces(kernel)
    return ps[0][1], ps[-1][2]


def breakpoints(kernel):
    """Interior radii where the profile changes its analytic form."""
    ps = _pieces(kernel)
    edges = {p[1] for p in ps} | {p[2] for p in ps}
    return sorted(e for e in edges if 0.0 < e < math.inf)


def origin_exponent(kernel):
    """p such that the profile behaves like r^p as r -> 0 inside the support."""
    piece = _pieces(kernel)[0]
    if piece[1] > 0:
        return 0.0
    if piece[0] == "pow":
        return piece[4]
    if piece[0] == "logreg":
        return -1.0
    return 0.0


def is_singular(kernel):
    """True when the profile is unbounded at the origin."""
    return _pieces(kernel)[0][1] == 0.0 and origin_exponent(kernel) < 0


def declared_monotone(kernel):
    """Whether the family guarantees a nonincreasing profile on (0, inf)."""
    fam = kernel.family
    if fam in ("constant_ball", "riesz_truncated", "fractional_vanishing",
               "log_regularized"):
        return True
    if fam in ("min_level", "rescaled", "cutoff"):
        return declared_monotone(kernel.base)
    if fam == "tabulated":
        values = _p(kernel, "values")
        return all(b <= a for a, b in zip(values, values[1:]))
    return False


def _eval_piece(piece, r):
    kind = piece[0]
    if kind == "pow":
        return piece[3] * r ** piece[4]
    if kind == "loglin":
        return piece[3] + piece[4] * np.log(r)
    c, dl, dd = piece[3], piece[4], piece[5]
    return c / r * (r + dl) ** (-float(dd))


def eval(kernel, r):
    """Radial profile value(s) at r > 0 (scalar or ndarray)."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("kernel profile is defined for r > 0 only")
    out = np.zeros_like(arr)
    for piece in _pieces(kernel):
        a, b = piece[1], piece[2]
        mask = (arr > a) & (arr <= b) if b < math.inf else (arr > a)
        if np.any(mask):
            out[mask] = _eval_piece(piece, arr[mask])
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Closed-form integrals int_a^b r^q * profile(r) dr.
# ---------------------------------------------------------------------------

def _pow_primitive(c, e, t):
    """Antiderivative of c * t^e at t (e is the combined exponent)."""
    if e == -1.0:
        return c * math.log(t)
    return c * t ** (e + 1.0) / (e + 1.0)


def _int_pow(c, p, q, a, b):
    e = p + q
    if (a == 0.0 and e + 1.0 <= 0.0) or (b == math.inf and e + 1.0 >= 0.0):
        if c == 0.0:
            return 0.0
        return math.inf if c > 0.0 else -math.inf
    hi = _pow_primitive(c, e, b) if b < math.inf else 0.0
    lo = _pow_primitive(c, e, a) if a > 0.0 else 0.0
    return hi - lo


def _loglin_primitive(u, v, q, t):
    # antiderivative of t^q (u + v log t), valid for q != -1
    s = t ** (q + 1.0) / (q + 1.0)
    return u * s + v * s * (math.log(t) - 1.0 / (q + 1.0))


def _int_loglin(u, v, q, a, b):
    if q == -1.0:
        lb, la = math.log(b), math.log(a)
        return u * (lb - la) + v * (lb * lb - la * la) / 2.0
    return _loglin_primitive(u, v, q, b) - _loglin_primitive(u, v, q, a)


def _logreg_primitive(m, dl, dd, t):
    """Antiderivative of t^m (t+dl)^{-dd} for integer m >= -1, t > 0."""
    if m >= 0:
        total = 0.0
        for j in range(m + 1):
            cj = math.comb(m, j) * (-dl) ** (m - j)
            e = j - dd + 1
            if e == 0:
                total += cj * math.log(t + dl)
            else:
                total += cj * (t + dl) ** e / e
        return total
    if dd == 1:
        return math.log(t / (t + dl)) / dl
    if dd == 2:
        return math.log(t / (t + dl)) / dl ** 2 + 1.0 / (dl * (t + dl))
    if dd == 3:
        return (math.log(t / (t + dl)) / dl ** 3 + 1.0 / (dl ** 2 * (t + dl))
                + 1.0 / (2.0 * dl * (t + dl) ** 2))
    raise ValueError("log_regularized antiderivative needs d in {1,2,3}")


def _logreg_series_int(m, dl, dd, a, b):
    """int_a^b t^m (t+dl)^{-dd} dt for b well below dl, via a series in t/dl.

    The binomial primitive in (t+dl) cancels catastrophically when the
    interval sits far inside (0, dl); expanding (1 + t/dl)^{-dd} instead
    keeps every term at the scale of the result.
    """
    pref = dl ** float(-dd)
    coeff = 1.0
    pb = b ** (m + 1.0)
    pa = a ** (m + 1.0) if a > 0.0 else 0.0
    xb = b / dl
    xa = a / dl
    total = 0.0
    for j in range(600):
        e = m + 1 + j
        if e == 0:
            term = pref * coeff * math.log(b / a)
        else:
            term = pref * coeff * (pb - pa) / e
        total += term
        if j > 3 and abs(term) <= 1e-17 * abs(total):
            break
        coeff *= -(dd + j) / (j + 1.0)
        pb *= xb
        pa *= xa
    return total


def _int_logreg(coeff, dl, dd, q, a, b):
    m = q - 1
    if abs(m - round(m)) > 1e-12:
        raise ValueError("log_regularized integrals need integer exponents")
    m = int(round(m))
    if a == 0.0 and m <= -1:
        return math.inf
    if b == math.inf and m - dd + 1 >= 0:
        return math.inf
    split = 0.9 * dl
    if a < split < b:
        return (_int_logreg(coeff, dl, dd, q, a, split)
                + _int_logreg(coeff, dl, dd, q, split, b))
    if b <= split:
        return coeff * _logreg_series_int(m, dl, dd, a, b)
    # for m >= 0 the primitive only involves powers and logs of (t + dl),
    # so it is continuous at t = 0 and vanishes as t -> inf when convergent
    a_val = _logreg_primitive(m, dl, dd, a)
    b_val = 0.0 if b == math.inf else _logreg_primitive(m, dl, dd, b)
    return coeff * (b_val - a_val)


@functools.lru_cache(maxsize=262144)
def radial_integral(kernel, a, b, q):
    """Closed-form int_a^b r^q * profile(r) dr (math.inf when divergent).

    Kernels are immutable and hashable, so results are memoized; symbol and
    moment scans hit the same integrals thousands of times.
    """
    if a < 0 or b < a:
        raise ValueError("need 0 <= a <= b")
    if a == b:
        return 0.0
    total = 0.0
    for piece in _pieces(kernel):
        lo, hi = max(a, piece[1]), min(b, piece[2])
        if lo >= hi:
            continue
        kind = piece[0]
        if kind == "pow":
            val = _int_pow(piece[3], piece[4], q, lo, hi)
        elif kind == "loglin":
            val = _int_loglin(piece[3], piece[4], q, lo, hi)
        else:
            val = _int_logreg(piece[3], piece[4], piece[5], q, lo, hi)
        if math.isinf(val):
            return math.inf
        total += val
    return total


def radial_antideriv(kernel, q):
    """Vectorized H with H(y) - H(x) = int_x^y r^q profile dr, plus H(inf).

    Returns (H, H_inf) where H maps an ndarray of radii to antiderivative
    values (up to an arbitrary global constant; only differences carry
    meaning) and H_inf is the value at infinity, or math.inf when the tail
    integral diverges.  H(0) is -inf when the integrand is not integrable
    at the origin.
    """
    pieces = _pieces(kernel)

    def piece_F(piece):
        kind = piece[0]
        if kind == "pow":
            c, p = piece[3], piece[4]
            e = p + q
            if e == -1.0:
                return lambda t: c * np.log(t)
            return lambda t: c * t ** (e + 1.0) / (e + 1.0)
        if kind == "loglin":
            u, v = piece[3], piece[4]
            if q == -1.0:
                return lambda t: u * np.log(t) + v * np.log(t) ** 2 / 2.0
            s = q + 1.0
            return lambda t: t ** s / s * (u + v * (np.log(t) - 1.0 / s))
        c, dl, dd = piece[3], piece[4], piece[5]
        m = int(round(q - 1))
        return lambda t: c * _logreg_primitive_vec(m, dl, dd, t)

    funcs = [piece_F(p) for p in pieces]
    starts = np.array([p[1] for p in pieces])
    last_b = pieces[-1][2]

    def f_at(i, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(funcs[i](np.asarray(t, dtype=float)))

    # continuity constants; anchor the global constant at an interior point
    # of the first piece when the integral diverges at the lower edge
    consts = [0.0] * len(pieces)
    a0, b0 = pieces[0][1], pieces[0][2]
    lim0 = _limit_at_zero(pieces[0], q) if a0 == 0.0 else f_at(0, a0)
    if lim0 == -math.inf:
        anchor = b0 if b0 < math.inf else max(2.0 * a0, 1.0)
        consts[0] = -f_at(0, anchor)
    else:
        consts[0] = -lim0
    for i in range(len(pieces) - 1):
        e = pieces[i][2]
        consts[i + 1] = consts[i] + f_at(i, e) - f_at(i + 1, e)
    if last_b == math.inf:
        tail_lim = _limit_at_inf(pieces[-1], q)
        h_inf = math.inf if tail_lim == math.inf else consts[-1] + tail_lim
        h_top = h_inf
    else:
        h_top = consts[-1] + f_at(len(pieces) - 1, last_b)
        h_inf = h_top

    def H(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        idx = np.clip(np.searchsorted(starts, x, side="right") - 1,
                      0, len(funcs) - 1)
        with np.errstate(divide="ignore"):
            for i, f in enumerate(funcs):
                m = idx == i
                if np.any(m):
                    out[m] = f(x[m]) + consts[i]
        if starts[0] > 0.0:
            out[x <= starts[0]] = 0.0
        if last_b < math.inf:
            out[x >= last_b] = h_top
        return out

    return H, h_inf


def _limit_at_zero(piece, q):
    """Limit of the piece antiderivative of t^q * profile at t -> 0+."""
    kind = piece[0]
    if kind == "pow":
        e = piece[4] + q
        return 0.0 if e + 1.0 > 0.0 else -math.inf
    if kind == "logreg":
        m = int(round(q - 1))
        if m <= -1:
            return -math.inf
        return piece[3] * _logreg_primitive(m, piece[4], piece[5], 0.0)
    return 0.0  # loglin pieces never start at 0


def _limit_at_inf(piece, q):
    """Limit of the piece antiderivative at t -> inf (math.inf if divergent)."""
    kind = piece[0]
    if kind == "pow":
        e = piece[4] + q
        return math.inf if e + 1.0 >= 0.0 else 0.0
    if kind == "logreg":
        m = int(round(q - 1))
        return math.inf if m - piece[5] + 1 >= 0 else 0.0
    raise ValueError("unbounded support requires a power or logreg tail")


def _logreg_primitive_vec(m, dl, dd, t):
    t = np.asarray(t, dtype=float)
    if m >= 0:
        total = np.zeros_like(t)
        for j in range(m + 1):
            cj = math.comb(m, j) * (-dl) ** (m - j)
            e = j - dd + 1
            if e == 0:
                total += cj * np.log(t + dl)
            else:
                total += cj * (t + dl) ** e / e
        return total
    if dd == 1:
        return np.log(t / (t + dl)) / dl
    if dd == 2:
        return np.log(t / (t + dl)) / dl ** 2 + 1.0 / (dl * (t + dl))
    return (np.log(t / (t + dl)) / dl ** 3 + 1.0 / (dl ** 2 * (t + dl))
            + 1.0 / (2.0 * dl * (t + dl) ** 2))


# ---------------------------------------------------------------------------
# Moments and validation.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    m1: float
    m2: float
    second_moment_ball: dict
    tail_mass: dict
    epsilon0: float


def partial_moments(kernel, a, b, order):
    """int_{a<|z|<b} |z|^order w(z) dz; math.inf signals a divergent mass."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if a < 0 or b <= a:
        if b == a:
            return 0.0
        raise ValueError("need 0 <= a < b")
    q = order + kernel.d - 1
    val = radial_integral(kernel, a, b, q)
    return val if math.isinf(val) else surface_measure(kernel.d) * val


def second_moment_ball(kernel, radius):
    """int_{|z|<=radius} |z|^2 w(z) dz."""
    val = radial_integral(kernel, 0.0, radius, kernel.d + 1)
    return val if math.isinf(val) else surface_measure(kernel.d) * val


def tail_mass(kernel, radius):
    """int_{|z|>radius} w(z) dz."""
    val = radial_integral(kernel, radius, math.inf, kernel.d - 1)
    return val if math.isinf(val) else surface_measure(kernel.d) * val


def _epsilon0(kernel):
    for k in range(1, 61):
        eps = 0.5 ** k
        mass = partial_moments(kernel, eps, 1.0, 0)
        if 0.0 < mass < math.inf:
            return eps
    raise AssumptionError("no dyadic radius with positive annulus mass")


def moments(kernel):
    """Standing-condition moments; raises AssumptionError when violated."""
    m1 = partial_moments(kernel, 0.0, 1.0, 1)
    m2 = tail_mass(kernel, 1.0)
    if not 0.0 < m1 < math.inf:
        raise AssumptionError(f"first moment M1 = {m1} is not in (0, inf)")
    if math.isinf(m2):
        raise AssumptionError("tail mass M2 is infinite")
    second = {r: second_moment_ball(kernel, r) for r in _MOMENT_RADII}
    tails = {r: tail_mass(kernel, r) for r in _MOMENT_RADII}
    return MomentReport(m1=m1, m2=m2, second_moment_ball=second,
                        tail_mass=tails, epsilon0=_epsilon0(kernel))


def _delta_limit_first_moment(kernel):
    """lim_{delta->0} int_{B_R} |z| w_delta dz when the family defines one."""
    if kernel.family == "fractional_vanishing":
        return kernel.c_norm * 2.0 * kernel.d * surface_measure(kernel.d)
    if kernel.family == "log_regularized":
        return kernel.c_norm * surface_measure(kernel.d)
    return None


def normalize_first_moment(kernel):
    """Scale the kernel so its full first moment equals 2d.

    For the vanishing-horizon families the full first moment diverges at
    fixed delta; there the delta->0 limit of int_{B_R} |z| w_delta dz is
    normalized to 2d instead (the limit does not depend on R).
    """
    full = partial_moments(kernel, 0.0, math.inf, 1)
    if math.isinf(full):
        limit = _delta_limit_first_moment(kernel)
        if limit is None:
            raise AssumptionError("infinite first moment and no known "
                                  "delta->0 normalization for this family")
        scale = 2.0 * kernel.d / limit
    else:
        if full <= 0.0:
            raise AssumptionError("first moment must be positive")
        scale = 2.0 * kernel.d / full
    return replace(kernel, c_norm=kernel.c_norm * scale)


def _rebuild_with_delta(kernel, delta):
    fam = kernel.family
    if fam == "fractional_vanishing":
        return Kernel(fam, kernel.d, (("delta", float(delta)),), kernel.c_norm)
    if fam in ("log_regularized", "log_truncated"):
        return Kernel(fam, kernel.d, (("delta", float(delta)),), kernel.c_norm)
    if fam == "rescaled":
        return Kernel(fam, kernel.d, (("delta", float(delta)),), kernel.c_norm,
                      kernel.base)
    return None


def validate_assumptions(kernel):
    """Report-only check of the standing conditions and delta-family limits.

    Returns a dict with entries:
      m1_ok, m2_ok     standing moment conditions
      nonnegative      profile >= 0 on a log-spaced sample
      monotone         nonincreasing sample check for families declared
                       monotone in d=1 (None when not applicable)
      delta_ladder     per-delta first moments over B_1 and tail masses
                       beyond 0.5, for families with a horizon parameter
    """
    report = {}
    m1 = partial_moments(kernel, 0.0, 1.0, 1)
    m2 = tail_mass(kernel, 1.0)
    report["m1"] = m1
    report["m2"] = m2
    report["m1_ok"] = bool(0.0 < m1 < math.inf)
    report["m2_ok"] = bool(m2 < math.inf)
    lo, hi = support(kernel)
    lo_s = 1e-8 if lo == 0.0 else lo * (1.0 + 1e-9)
    hi_eff = min(hi, max(8.0, 100.0 * lo_s))
    rs = np.geomspace(lo_s, hi_eff, 200)
    vals = eval(kernel, rs)
    report["nonnegative"] = bool(np.all(vals >= -1e-14))
    if kernel.d == 1 and declared_monotone(kernel):
        inside = vals[(rs > lo) & (rs <= hi_eff)]
        report["monotone"] = bool(np.all(np.diff(inside) <= 1e-12 * np.maximum(1.0, inside[:-1])))
    else:
        report["monotone"] = None
    ladder = {}
    for dl in _DELTA_LADDER:
        k2 = _rebuild_with_delta(kernel, dl)
        if k2 is None:
            break
        ladder[dl] = {
            "first_moment_ball1": partial_moments(k2, 0.0, 1.0, 1),
            "tail_beyond_half": tail_mass(k2, 0.5),
            "second_moment_ball1": second_moment_ball(k2, 1.0),
        }
    report["delta_ladder"] = ladder or None
    return report
