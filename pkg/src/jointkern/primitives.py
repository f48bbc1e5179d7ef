"""Built-in primitive distributions.

Each constructor returns a PrimitiveKernel: a density against the right base
measure (counting or Lebesgue), a monotone inverse-CDF pushforward from one
uniform, and an exact right-inverse (abduct). Discrete abduction returns the
midpoint of the CDF interval of the observed point, so round-trips do not sit
on floating-point boundaries.

Parameters are either constants (validated at construction) or callables of
the kernel input (validated per call, raising ParameterError on violation;
an out-of-range parameter produced upstream is a bug, not a zero-density
event). Discrete families also carry an exact rational pmf in which float
parameters are read as their shortest decimal literal, so finite enumeration
is exact; see marginal_pmf_finite.
"""

from __future__ import annotations

import math
from fractions import Fraction

from scipy.special import ndtr, ndtri

from .errors import ParameterError, ShapeError
from .kernels import NEG_INF, PrimitiveKernel
from .spaces import UNIT, Countable, Finite, Real, Space, membership

__all__ = [
    "bernoulli", "categorical", "uniform01", "uniform", "normal",
    "exponential", "poisson", "dirac_countable", "instantiate", "BUILTIN_NAMES",
]

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _as_param(value, what: str):
    """Normalize a constant-or-callable parameter to (getter, constant_or_None)."""
    if callable(value):
        return value, None
    v = float(value)
    if not math.isfinite(v):
        raise ParameterError(f"{what} must be finite, got {value!r}")
    return (lambda z, _v=v: _v), v


def _decimal_fraction(x: float) -> Fraction:
    # reads 0.7 as 7/10, i.e. what the decimal literal denotes
    return Fraction(repr(float(x)))


def _interval_midpoint(lo: float, hi: float) -> float:
    if not lo < hi:
        raise ShapeError("observed point has zero probability under its parameter")
    mid = (lo + hi) / 2.0
    if not lo <= mid < hi:
        mid = lo
    return mid


def _check_m_int(cod: Space, m, name: str):
    if not membership(cod, m):
        raise ShapeError(f"{name}: value {m!r} is not a point of {cod!r}")


def bernoulli(p=0.5, dom: Space = UNIT) -> PrimitiveKernel:
    """Coin flip on Finite(2); samples 1 iff u < p."""
    get_p, const = _as_param(p, "bernoulli p")
    if const is not None and not 0.0 <= const <= 1.0:
        raise ParameterError(f"bernoulli p must lie in [0,1], got {const}")

    def params(z) -> float:
        pv = float(get_p(z))
        if not 0.0 <= pv <= 1.0:
            raise ParameterError(f"bernoulli p must lie in [0,1], got {pv}")
        return pv

    cod = Finite(2)

    def log_density(z, m):
        _check_m_int(cod, m, "bernoulli")
        pv = params(z)
        if m == 1:
            return math.log(pv) if pv > 0.0 else NEG_INF
        return math.log1p(-pv) if pv < 1.0 else NEG_INF

    def pushforward(u, z):
        pv = params(z)
        return 1 if u[0] < pv else 0

    def abduct(z, m):
        _check_m_int(cod, m, "bernoulli")
        pv = params(z)
        if m == 1:
            return (_interval_midpoint(0.0, pv),)
        return (_interval_midpoint(pv, 1.0),)

    def pmf(z, m):
        _check_m_int(cod, m, "bernoulli")
        pe = _decimal_fraction(params(z))
        return pe if m == 1 else 1 - pe

    return PrimitiveKernel("bernoulli", dom, cod, 1, log_density, pushforward, abduct, pmf)


def categorical(probs, dom: Space = UNIT, size: int | None = None) -> PrimitiveKernel:
    """Finite distribution over {0..k-1}; probabilities normalized exactly.

    probs is a sequence whose entries are numbers or callables of the kernel
    input. The constructor checks the constant part sums to 1 within 1e-9 and
    then renormalizes by the exact rational sum, so enumeration masses always
    add to exactly 1.
    """
    entries = [_as_param(q, "categorical probability") for q in probs]
    k = len(entries)
    if size is not None and size != k:
        raise ParameterError(f"categorical size {size} != number of probabilities {k}")
    if k < 1:
        raise ParameterError("categorical needs at least one probability")
    if all(const is not None for _, const in entries):
        _exact_probs([const for _, const in entries])

    def exact_probs(z) -> list[Fraction]:
        return _exact_probs([float(get(z)) for get, _ in entries])

    def cumulative(z) -> list[float]:
        qs = exact_probs(z)
        acc = Fraction(0)
        out = []
        for q in qs:
            acc += q
            out.append(float(acc))
        return out

    cod = Finite(k)

    def log_density(z, m):
        _check_m_int(cod, m, "categorical")
        q = exact_probs(z)[m]
        return math.log(float(q)) if q > 0 else NEG_INF

    def pushforward(u, z):
        cum = cumulative(z)
        for i, c in enumerate(cum):
            if u[0] < c:
                return i
        # u == 1.0 (or float slack): last index with positive mass
        qs = exact_probs(z)
        for i in range(k - 1, -1, -1):
            if qs[i] > 0:
                return i
        raise ShapeError("categorical has no positive-probability index")

    def abduct(z, m):
        _check_m_int(cod, m, "categorical")
        cum = cumulative(z)
        lo = cum[m - 1] if m > 0 else 0.0
        return (_interval_midpoint(lo, cum[m]),)

    def pmf(z, m):
        _check_m_int(cod, m, "categorical")
        return exact_probs(z)[m]

    return PrimitiveKernel("categorical", dom, cod, 1, log_density, pushforward, abduct, pmf)


def _exact_probs(values: list[float]) -> list[Fraction]:
    qs = [_decimal_fraction(v) for v in values]
    for q in qs:
        if q < 0:
            raise ParameterError(f"categorical probability {float(q)} is negative")
    total = sum(qs)
    if abs(float(total) - 1.0) > 1e-9:
        raise ParameterError(f"categorical probabilities sum to {float(total)}, not 1")
    return [q / total for q in qs]


def uniform01() -> PrimitiveKernel:
    """The uniform distribution on [0, 1]."""
    return uniform(0.0, 1.0)


def uniform(a=0.0, b=1.0, dom: Space = UNIT) -> PrimitiveKernel:
    """Uniform on the interval [a, b], a < b."""
    get_a, const_a = _as_param(a, "uniform a")
    get_b, const_b = _as_param(b, "uniform b")
    if const_a is not None and const_b is not None and not const_a < const_b:
        raise ParameterError(f"uniform needs a < b, got a={const_a}, b={const_b}")

    def params(z):
        av, bv = float(get_a(z)), float(get_b(z))
        if not av < bv:
            raise ParameterError(f"uniform needs a < b, got a={av}, b={bv}")
        return av, bv

    def log_density(z, m):
        _check_m_int(Real(1), m, "uniform")
        av, bv = params(z)
        return -math.log(bv - av) if av <= m <= bv else NEG_INF

    def pushforward(u, z):
        av, bv = params(z)
        return av + u[0] * (bv - av)

    def abduct(z, m):
        _check_m_int(Real(1), m, "uniform")
        av, bv = params(z)
        if not av <= m <= bv:
            raise ShapeError(f"{m} outside the support [{av}, {bv}]")
        return (min(max((m - av) / (bv - av), 0.0), 1.0),)

    name = "uniform01" if (const_a, const_b) == (0.0, 1.0) else "uniform"
    return PrimitiveKernel(name, dom, Real(1), 1, log_density, pushforward, abduct)


def normal(mu=0.0, sigma=1.0, dom: Space = UNIT) -> PrimitiveKernel:
    """Gaussian with mean mu and standard deviation sigma > 0."""
    get_mu, _ = _as_param(mu, "normal mu")
    get_sigma, const_sigma = _as_param(sigma, "normal sigma")
    if const_sigma is not None and not const_sigma > 0:
        raise ParameterError(f"normal sigma must be positive, got {const_sigma}")

    def params(z):
        mv, sv = float(get_mu(z)), float(get_sigma(z))
        if not sv > 0:
            raise ParameterError(f"normal sigma must be positive, got {sv}")
        return mv, sv

    def log_density(z, m):
        _check_m_int(Real(1), m, "normal")
        mv, sv = params(z)
        r = (m - mv) / sv
        return -0.5 * r * r - math.log(sv) - _HALF_LOG_TWO_PI

    def pushforward(u, z):
        mv, sv = params(z)
        if not 0.0 < u[0] < 1.0:
            raise ShapeError(f"normal pushforward has no finite value at u={u[0]}")
        return mv + sv * float(ndtri(u[0]))

    def abduct(z, m):
        _check_m_int(Real(1), m, "normal")
        mv, sv = params(z)
        return (float(ndtr((m - mv) / sv)),)

    return PrimitiveKernel("normal", dom, Real(1), 1, log_density, pushforward, abduct)


def exponential(rate=1.0, dom: Space = UNIT) -> PrimitiveKernel:
    """Exponential with the given rate > 0, supported on [0, inf)."""
    get_rate, const = _as_param(rate, "exponential rate")
    if const is not None and not const > 0:
        raise ParameterError(f"exponential rate must be positive, got {const}")

    def params(z):
        rv = float(get_rate(z))
        if not rv > 0:
            raise ParameterError(f"exponential rate must be positive, got {rv}")
        return rv

    def log_density(z, m):
        _check_m_int(Real(1), m, "exponential")
        rv = params(z)
        return math.log(rv) - rv * m if m >= 0.0 else NEG_INF

    def pushforward(u, z):
        rv = params(z)
        if u[0] >= 1.0:
            raise ShapeError("exponential pushforward has no finite value at u=1")
        return -math.log1p(-u[0]) / rv

    def abduct(z, m):
        _check_m_int(Real(1), m, "exponential")
        rv = params(z)
        if m < 0.0:
            raise ShapeError(f"{m} outside the support [0, inf)")
        return (-math.expm1(-rv * m),)

    return PrimitiveKernel("exponential", dom, Real(1), 1, log_density, pushforward, abduct)


def poisson(rate=1.0, dom: Space = UNIT) -> PrimitiveKernel:
    """Poisson counts on the nonnegative integers; rate >= 0.

    rate 0 is the point mass at 0. The sampler walks the CDF with the same
    partial sums abduction uses, so discrete round-trips are exact.
    """
    get_rate, const = _as_param(rate, "poisson rate")
    if const is not None and const < 0:
        raise ParameterError(f"poisson rate must be nonnegative, got {const}")

    def params(z):
        rv = float(get_rate(z))
        if rv < 0:
            raise ParameterError(f"poisson rate must be nonnegative, got {rv}")
        return rv

    def _terms(rv):
        term = math.exp(-rv)
        j = 0
        while True:
            yield j, term
            j += 1
            term *= rv / j

    def _scan_cap(rv) -> int:
        return int(rv + 60.0 * math.sqrt(rv + 1.0)) + 200

    def log_density(z, m):
        _check_m_int(Countable(), m, "poisson")
        rv = params(z)
        if m < 0:
            return NEG_INF
        if rv == 0.0:
            return 0.0 if m == 0 else NEG_INF
        return m * math.log(rv) - rv - math.lgamma(m + 1)

    def pushforward(u, z):
        rv = params(z)
        if rv == 0.0:
            return 0
        if u[0] >= 1.0:
            raise ShapeError("poisson pushforward has no finite value at u=1")
        acc = 0.0
        cap = _scan_cap(rv)
        for j, term in _terms(rv):
            acc += term
            if u[0] < acc:
                return j
            if j >= cap:
                return j

    def abduct(z, m):
        _check_m_int(Countable(), m, "poisson")
        rv = params(z)
        if m < 0:
            raise ShapeError(f"{m} outside the support of poisson")
        if rv == 0.0:
            if m != 0:
                raise ShapeError(f"{m} outside the support of poisson(0)")
            return (0.5,)
        acc = 0.0
        lo = 0.0
        for j, term in _terms(rv):
            lo = acc
            acc += term
            if j == m:
                return (_interval_midpoint(lo, acc),)

    return PrimitiveKernel("poisson", dom, Countable(), 1, log_density, pushforward, abduct)


def dirac_countable(value=0, dom: Space = UNIT) -> PrimitiveKernel:
    """Point mass at an integer; density 1 at the point under counting measure."""
    if callable(value):
        get_v = value
    else:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParameterError(f"dirac_countable point must be an integer, got {value!r}")
        get_v = lambda z, _v=value: _v

    def params(z) -> int:
        v = get_v(z)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParameterError(f"dirac_countable point must be an integer, got {v!r}")
        return v

    cod = Countable()

    def log_density(z, m):
        _check_m_int(cod, m, "dirac_countable")
        return 0.0 if m == params(z) else NEG_INF

    def pushforward(u, z):
        return params(z)

    def abduct(z, m):
        _check_m_int(cod, m, "dirac_countable")
        if m != params(z):
            raise ShapeError(f"{m} outside the support of dirac_countable")
        return (0.5,)

    def pmf(z, m):
        _check_m_int(cod, m, "dirac_countable")
        return Fraction(1) if m == params(z) else Fraction(0)

    return PrimitiveKernel("dirac_countable", dom, cod, 1, log_density, pushforward, abduct, pmf)


BUILTIN_NAMES = (
    "bernoulli", "categorical", "uniform01", "uniform",
    "normal", "exponential", "poisson", "dirac_countable",
)


def instantiate(name: str, params: dict, dom: Space = UNIT) -> PrimitiveKernel:
    """Build a built-in by name from a parameter mapping (numbers or callables)."""
    if name == "bernoulli":
        return bernoulli(params.get("p", 0.5), dom=dom)
    if name == "categorical":
        if "probs" not in params:
            raise ParameterError("categorical needs a probs list")
        return categorical(params["probs"], dom=dom)
    if name == "uniform01":
        return uniform(0.0, 1.0, dom=dom)
    if name == "uniform":
        return uniform(params.get("a", 0.0), params.get("b", 1.0), dom=dom)
    if name == "normal":
        return normal(params.get("mu", 0.0), params.get("sigma", 1.0), dom=dom)
    if name == "exponential":
        return exponential(params.get("rate", 1.0), dom=dom)
    if name == "poisson":
        return poisson(params.get("rate", 1.0), dom=dom)
    if name == "dirac_countable":
        return dirac_countable(params.get("value", 0), dom=dom)
    raise ParameterError(f"unknown primitive {name!r}")
