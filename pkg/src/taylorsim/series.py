"""Truncated power series in ``X = -iH`` and the schedule built on them.

Every operator the algorithm touches (the segment exponential, its truncated
Taylor polynomial, the amplified segment, the correction) is a power series
in the single operator ``X = -iH``.  They all commute, so a univariate series
with scalar coefficients is an exact representation.  Because ``X^dagger =
-X``, taking an adjoint maps ``c_k`` to ``conj(c_k) (-1)^k``.

The functions in this module build those series, pick the schedule
parameters ``r``, ``K`` and ``Q``, and evaluate the absolute-coefficient
majorants used to certify the error bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .exceptions import ConsistencyError, InvalidInputError, PlanInfeasibleError

#: The majorant evaluation point used in the truncation argument.
MAJORANT_X = 2.0


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients ``c_0..c_cap``; ``c_k`` multiplies ``X^k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.coeffs)
        if raw.dtype == object:
            c = np.array(raw, dtype=object, copy=True).ravel()
            finite = all(mpmath.isfinite(x) for x in c)
        else:
            c = np.array(raw, dtype=np.complex128, copy=True).ravel()
            finite = bool(np.all(np.isfinite(c)))
        if c.size == 0:
            raise InvalidInputError("a series needs at least one coefficient")
        if not finite:
            raise InvalidInputError("series coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, cap: int, like: "PowerSeries | None" = None) -> "PowerSeries":
        return cls(_zeros(cap, like))

    @classmethod
    def one(cls, cap: int, like: "PowerSeries | None" = None) -> "PowerSeries":
        c = _zeros(cap, like)
        c[0] = 1
        return cls(c)

    @property
    def cap(self) -> int:
        return self.coeffs.size - 1

    @property
    def extended(self) -> bool:
        """True when the coefficients are mpmath numbers rather than float64."""
        return self.coeffs.dtype == object

    def to_complex(self) -> "PowerSeries":
        return PowerSeries(np.array([complex(x) for x in self.coeffs])) if self.extended else self

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return self.coeffs.size

    def lowest_order(self) -> int | None:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[0]) if nz.size else None

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, z):
        return scale(self, 1.0 / z)

    @property
    def H(self) -> "PowerSeries":
        return adjoint(self)

    def __repr__(self):
        return f"PowerSeries(cap={self.cap}, coeffs={np.array2string(self.coeffs, precision=4)})"


def _zeros(cap, like=None):
    if like is not None and like.extended:
        return np.array([mpmath.mpc(0)] * (cap + 1), dtype=object)
    return np.zeros(cap + 1, dtype=np.complex128)


def add(S1: PowerSeries, S2: PowerSeries) -> PowerSeries:
    cap = min(S1.cap, S2.cap)
    return PowerSeries(S1.coeffs[: cap + 1] + S2.coeffs[: cap + 1])


def scale(S: PowerSeries, z) -> PowerSeries:
    return PowerSeries(S.coeffs * (z if S.extended else complex(z)))


def mul(S1: PowerSeries, S2: PowerSeries, cap: int | None = None) -> PowerSeries:
    """Cauchy product, truncated at ``cap`` (default: the smaller cap)."""
    if cap is None:
        cap = min(S1.cap, S2.cap)
    a = S1.coeffs[: cap + 1]
    b = S2.coeffs[: cap + 1]
    return PowerSeries(np.convolve(a, b)[: cap + 1])


def power(S: PowerSeries, n: int, cap: int | None = None) -> PowerSeries:
    """``S**n`` by binary exponentiation, truncated at ``cap``."""
    if n < 0:
        raise InvalidInputError("negative powers are not supported")
    cap = S.cap if cap is None else cap
    result = PowerSeries.one(cap, like=S)
    base = extend(S, cap)
    while n:
        if n & 1:
            result = mul(result, base, cap)
        n >>= 1
        if n:
            base = mul(base, base, cap)
    return result


def extend(S: PowerSeries, cap: int) -> PowerSeries:
    """Zero-pad ``S`` to ``cap`` (or truncate if it is longer)."""
    c = _zeros(cap, S)
    n = min(cap, S.cap) + 1
    c[:n] = S.coeffs[:n]
    return PowerSeries(c)


def truncate(S: PowerSeries, K: int) -> PowerSeries:
    """Zero every coefficient above order ``K`` (the cap is kept)."""
    if K < 0:
        raise InvalidInputError("truncation order must be >= 0")
    c = S.coeffs.copy()
    c[K + 1:] = 0
    return PowerSeries(c)


def adjoint(S: PowerSeries) -> PowerSeries:
    signs = np.where(np.arange(S.cap + 1) % 2 == 0, 1.0, -1.0)
    return PowerSeries(np.conj(S.coeffs) * signs)


def exp_series(theta: float, cap: int, dps: int | None = None) -> PowerSeries:
    """``exp(theta X)``: ``c_k = theta^k / k!``.

    With ``dps`` the coefficients are mpmath numbers carrying that many
    decimal digits, and every series derived from them stays extended.
    """
    if cap < 0:
        raise InvalidInputError("cap must be >= 0")
    if dps is not None:
        with mpmath.workdps(dps):
            th = mpmath.mpf(theta)
            return PowerSeries(np.array(
                [mpmath.mpc(th**k / mpmath.factorial(k)) for k in range(cap + 1)], dtype=object))
    c = np.empty(cap + 1, dtype=np.complex128)
    term = 1.0
    for k in range(cap + 1):
        c[k] = term
        term *= theta / (k + 1)
    return PowerSeries(c)


def majorant(S: PowerSeries, y: float) -> float:
    """``sum_k |c_k| y^k`` with compensated summation.

    ``majorant(F, A)`` is the LCU normalisation of ``F``; ``majorant(F, A*x)``
    is the envelope ``F^+(x)``.
    """
    if y < 0:
        raise InvalidInputError("majorant point must be >= 0")
    mags = np.array([float(abs(x)) for x in S.coeffs]) if S.extended else np.abs(S.coeffs)
    terms = []
    yk = 1.0
    for m in mags:
        if m:
            terms.append(float(m) * yk)
        yk *= y
        if yk == math.inf:
            if np.any(mags[len(terms):] != 0):
                return math.inf
            break
    return math.fsum(terms)


def exp_tail(y: float, K: int) -> float:
    """``sum_{k>K} y^k/k!`` summed directly (no cancellation against e^y)."""
    if y == 0:
        return 0.0
    terms = []
    term = y ** (K + 1) / math.factorial(K + 1)
    k = K + 1
    while True:
        terms.append(term)
        k += 1
        term *= y / k
        if term < 1e-30 * terms[0] or term == 0.0:
            break
    return math.fsum(terms)


# --- the series that describe one run ------------------------------------

def delta_series(V: PowerSeries, Vt: PowerSeries) -> PowerSeries:
    """``V - Vt``; rejects a ``Vt`` that is not a truncation of ``V``."""
    D = V - Vt
    lo = D.lowest_order()
    if lo is not None and np.any(Vt.coeffs[lo:] != 0):
        raise InvalidInputError("Vt is not a truncation of V")
    return D


def v_delta_series(V: PowerSeries, Delta: PowerSeries, cap: int | None = None,
                   theta: float | None = None) -> PowerSeries:
    """``V^dagger Delta``; checks ``|b_k| <= (2 theta)^k / k!`` when ``theta`` is given."""
    VD = mul(adjoint(V), Delta, cap)
    if theta is not None:
        bound = exp_series(2.0 * abs(theta), VD.cap).coeffs.real
        mags = np.array([float(abs(x)) for x in VD.coeffs])
        bad = np.flatnonzero(mags > bound)
        if bad.size:
            k = int(bad[0])
            raise ConsistencyError(f"|b_{k}| exceeds (2 theta)^k/k!", "series",
                                   float(mags[k]), float(bound[k]))
    return VD


def w_series(VDelta: PowerSeries, cap: int | None = None) -> PowerSeries:
    """``W = Vd/2 - Vd^+/2 + Vd^+ Vd + Vd^2/2 - Vd^+ Vd^2 / 2`` with ``Vd = V^dagger Delta``."""
    cap = VDelta.cap if cap is None else cap
    Vd = extend(VDelta, cap)
    Vdh = adjoint(Vd)
    Vd2 = mul(Vd, Vd)
    return Vd / 2 - Vdh / 2 + mul(Vdh, Vd) + Vd2 / 2 - mul(Vdh, Vd2) / 2


def w_series_crosscheck(V: PowerSeries, Vt: PowerSeries, Delta: PowerSeries,
                        cap: int | None = None) -> tuple[PowerSeries, PowerSeries]:
    """Two independent constructions of ``W``.

    Returns ``(eight_term, definitional)``: the expansion in ``Vt`` and
    ``Delta``, and ``1 - (3/2 - Vt^dagger Vt / 2) Vt V^dagger``, which follows
    from ``(1 - W)^{-r} = U V_oaa^{-r}``.
    """
    cap = min(V.cap, Vt.cap, Delta.cap) if cap is None else cap
    V, Vt, D = extend(V, cap), extend(Vt, cap), extend(Delta, cap)
    Vth, Dh = adjoint(Vt), adjoint(D)
    D2 = mul(D, D)
    eight = (mul(Vth, D) - mul(Dh, Vt) + mul(Dh, D)
             + mul(mul(Vth, Vth), D2) + mul(mul(Dh, Dh), D2)
             + 2 * mul(mul(Vth, Dh), D2)
             + mul(mul(Vth, Vt), mul(D, Dh))
             + mul(mul(Vt, D), mul(Dh, Dh))) / 2
    one = PowerSeries.one(cap, like=V)
    definitional = one - mul(mul(1.5 * one - mul(Vth, Vt) / 2, Vt), adjoint(V))
    return eight, definitional


def correction_series(W: PowerSeries, r: int, Q: int) -> PowerSeries:
    """``sum_k C(r+k-1, k) W^k`` truncated at order ``Q``.

    ``W`` has no constant term, so only ``k <= Q / lowest_order(W)`` powers
    reach the kept orders.
    """
    if r < 1:
        raise InvalidInputError("r must be >= 1")
    Wq = extend(W, Q)
    result = PowerSeries.one(Q, like=W)
    lo = Wq.lowest_order()
    if lo is None:
        return result
    if lo == 0:
        raise InvalidInputError("W must have zero constant term")
    Wk = PowerSeries.one(Q, like=W)
    binom = 1.0
    for k in range(1, Q // lo + 1):
        # incremental ratio keeps the float path free of huge integers
        binom = mpmath.binomial(r + k - 1, k) if W.extended else binom * (r + k - 1) / k
        Wk = mul(Wk, Wq)
        result = result + binom * Wk
    return result


def v_oaa_series(Vt: PowerSeries, cap: int | None = None) -> PowerSeries:
    """``Vt (3/2 - Vt^dagger Vt / 2)``."""
    cap = Vt.cap if cap is None else cap
    Vt = extend(Vt, cap)
    one = PowerSeries.one(cap, like=Vt)
    return mul(Vt, 1.5 * one - mul(adjoint(Vt), Vt) / 2)


# --- schedule -------------------------------------------------------------

def choose_r(T: float) -> int:
    """Smallest integer strictly above ``4T`` (at least 1)."""
    if T < 0:
        raise InvalidInputError("T must be >= 0")
    return max(1, math.floor(4 * T) + 1)


def choose_K(theta: float, budget: float) -> int:
    """Smallest ``K >= 2`` whose exponential tail at ``theta`` is within ``budget``."""
    if not budget > 0:
        raise InvalidInputError("budget must be positive")
    if not 0 <= theta <= 1:
        raise InvalidInputError(f"theta must lie in [0, 1], got {theta}")
    K = 2
    while exp_tail(theta, K) > budget:
        K += 1
    return K


def choose_Q(r: int, epsilon: float, K: int = 0) -> int:
    """Smallest ``Q >= K`` with ``2^(r-Q-1) <= epsilon``."""
    if not 0 < epsilon < 1:
        raise InvalidInputError("epsilon must lie in (0, 1)")
    Q = max(r - 1, 0)
    while math.ldexp(1.0, r - Q - 1) > epsilon:
        Q += 1
    return max(Q, K)


@dataclass(frozen=True)
class SimulationPlan:
    t: float
    delta: float
    epsilon: float
    A: float
    T: float
    r: int
    theta: float
    K: int
    Q: int
    s: float
    s_C: float

    @property
    def truncation_bound(self) -> float:
        """``2^(r-Q-1)``, the proven bound on the correction truncation error."""
        return math.ldexp(1.0, self.r - self.Q - 1)

    def as_dict(self) -> dict:
        return {"r": self.r, "K": self.K, "Q": self.Q, "s": self.s, "s_C": self.s_C,
                "delta": self.delta, "epsilon": self.epsilon, "A": self.A, "T": self.T}


@dataclass(frozen=True, eq=False)
class SeriesSet:
    """All series of one plan.

    The segment series (``V`` through ``W``) and ``a_long`` run to order
    ``2Q`` so their majorants are not cut at the correction order; the
    correction ``a`` and ``Voaa`` are capped at ``Q``.
    """

    V: PowerSeries
    Vt: PowerSeries
    Delta: PowerSeries
    VDelta: PowerSeries
    W: PowerSeries
    a: PowerSeries
    a_long: PowerSeries
    Voaa: PowerSeries


def build_series(theta: float, K: int, r: int, Q: int, dps: int | None = None) -> SeriesSet:
    """Series of one plan.

    ``dps`` switches to mpmath coefficients with that many digits.  mpmath
    rounds to its ambient precision, so later arithmetic on the returned
    series should also run under ``mpmath.workdps(dps)``.
    """
    if dps is not None:
        with mpmath.workdps(dps):
            return _build(theta, K, r, Q, dps)
    return _build(theta, K, r, Q, None)


def _build(theta, K, r, Q, dps):
    cap = 2 * Q
    V = exp_series(theta, cap, dps)
    Vt = truncate(V, K)
    Delta = delta_series(V, Vt)
    VDelta = v_delta_series(V, Delta, theta=theta)
    W = w_series(VDelta)
    a_long = correction_series(W, r, cap)
    a = truncate(a_long, Q)
    return SeriesSet(
        V=V, Vt=Vt, Delta=Delta, VDelta=VDelta, W=W,
        a=extend(a, Q), a_long=a_long, Voaa=v_oaa_series(extend(Vt, Q)),
    )


def make_plan(t: float, A: float, epsilon: float, delta: float,
              Q: int | None = None, dps: int | None = None) -> tuple[SimulationPlan, SeriesSet]:
    """Schedule one run and compute its series.

    ``Q`` may be forced (for example to shrink a circuit-level check); by
    default it is the smallest order meeting ``epsilon``.  With ``dps`` the
    series carry mpmath coefficients, and ``t / r`` is formed in that
    precision rather than rounded to a double first.
    """
    if A <= 0:
        raise InvalidInputError("A must be positive")
    if t < 0:
        raise InvalidInputError("t must be >= 0")
    T = float(A * t)
    r = choose_r(T)
    theta = t / r
    K = choose_K(T / r, delta / r)
    if Q is None:
        Q = choose_Q(r, epsilon, K)
    elif Q < K:
        raise InvalidInputError(f"Q={Q} is below K={K}")
    if dps is None:
        series = build_series(theta, K, r, Q)
    else:
        with mpmath.workdps(dps):
            series = build_series(mpmath.mpf(t) / r, K, r, Q, dps)
    s = majorant(series.Vt, A)
    if s > 2:
        raise PlanInfeasibleError(f"segment normalisation s={s:.6f} exceeds 2")
    s_C = majorant(series.a, A)
    plan = SimulationPlan(t=float(t), delta=float(delta), epsilon=float(epsilon), A=float(A),
                          T=T, r=r, theta=theta, K=K, Q=Q, s=s, s_C=s_C)
    return plan, series


# --- bound certification ---------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: float
    bound: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured, "bound": self.bound,
                "pass": self.passed}


def check(name, measured, bound, tol=1e-12) -> BoundCheck:
    measured, bound = float(measured), float(bound)
    return BoundCheck(name, measured, bound, bool(measured <= bound + tol))


V_DELTA_PLUS_BOUND = math.e - 2.5
W_PLUS_BOUND = V_DELTA_PLUS_BOUND + 1.5 * V_DELTA_PLUS_BOUND**2 + 0.5 * V_DELTA_PLUS_BOUND**3


def lemma_bounds_report(plan: SimulationPlan, series: SeriesSet,
                        strict: bool = False) -> list[BoundCheck]:
    """Measure every series-level inequality the error analysis relies on.

    With ``strict=True`` a failing check raises :class:`ConsistencyError`.
    """
    A, r, Q, delta = plan.A, plan.r, plan.Q, plan.delta
    y = A * MAJORANT_X
    s_delta = majorant(series.Delta, A)
    s_w = majorant(series.W, A)
    vd_plus = majorant(series.VDelta, y)
    b_bound = exp_series(2 * plan.theta, series.VDelta.cap).coeffs.real
    b_mags = np.array([float(abs(x)) for x in series.VDelta.coeffs])
    b_excess = float(np.max(b_mags - b_bound))
    tail = PowerSeries(np.where(np.arange(series.a_long.cap + 1) > Q, series.a_long.coeffs, 0))
    checks = [
        check("s_A(Delta) <= delta/r", exp_tail(plan.T / r, plan.K), delta / r, 0.0),
        check("s_A(Delta) truncated <= delta/r", s_delta, delta / r, 0.0),
        check("|b_k| - (2t/r)^k/k! <= 0", b_excess, 0.0, 0.0),
        check("s_A(W) <= 2sD + 9sD^2 + 6sD^3 + sD^4", s_w,
              2 * s_delta + 9 * s_delta**2 + 6 * s_delta**3 + s_delta**4),
        check("V_Delta+(2) <= e - 2.5", vd_plus, V_DELTA_PLUS_BOUND),
        check("W+(2) <= V_Delta+ + 1.5 V_Delta+^2 + 0.5 V_Delta+^3", majorant(series.W, y),
              vd_plus + 1.5 * vd_plus**2 + 0.5 * vd_plus**3),
        check("W+(2) <= 0.29495", majorant(series.W, y), W_PLUS_BOUND),
        check("V_C+(2) <= 2^r", majorant(series.a_long, y), 2.0**r),
        check("s_A(V_C) <= (1 - s_A(W))^-r", majorant(series.a_long, A),
              (1 - s_w) ** (-r) if s_w < 1 else math.inf),
        check("s_C <= 1 + 2 delta + delta^2", plan.s_C, 1 + 2 * delta + delta**2),
        check("s_C <= 2", plan.s_C, 2.0),
        check("correction tail majorant <= 2^(r-Q-1)", majorant(tail, A), plan.truncation_bound),
    ]
    if strict:
        for c in checks:
            if not c.passed:
                raise ConsistencyError(f"bound failed: {c.name}", "bounds", c.measured, c.bound)
    return checks
