"""Weierstrass functions and lattice invariants on the torus C/(Z + Z*tau).

Everything is keyed off the normalized period pair (1, tau), Im tau > 0.
Invariants come from Eisenstein q-expansions,

    g2 = (4 pi^4 / 3) E4(q),   g3 = (8 pi^6 / 27) E6(q),   q = e^{2 pi i tau},

and point evaluation of P (= ℘), its derivatives and zeta uses two regimes:
a q-series in u = e^{2 pi i z} away from lattice points, and the Laurent
expansion at the origin once the reduced argument is within 35% of the
shortest lattice vector.  The switch matters: near a pole the q-series
computes the double pole through the cancellation 1-u -> 0 and loses
relative accuracy like eps/|2 pi z|, while the Laurent tail is perfectly
conditioned there.

The zero finder for invariant forms (g2, g3 and the two weighted cubic
combinations used by the census) runs double-precision Newton first and then
polishes with mpmath, because a double-rounded tau already shifts a weight-12
form by ~1e-7; callers that need |form| <= 1e-10 get an mpmath complex back.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import cmath
import math

import mpmath
import numpy as np

from .errors import EvaluationError, NearPoleError, StructuralError
from .polyring import WeightedPoly, weierstrass_laurent_symbolic

__all__ = [
    "LatticeTau",
    "EllipticContext",
    "compute_invariants",
    "eval_weierstrass",
    "find_form_zero",
    "form_value",
    "reduce_fundamental",
    "FORM_NAMES",
]

_TWO_PI_I = 2j * math.pi

# numerators N_n(u) of the rational part N_n/(1-u)^{n+2} of the n-th
# derivative of P in the variable u; ascending coefficients, N_0 = u.
# Lattice independent, so cached at module level.
_NPOLY = [np.array([0.0, 1.0])]


def _npoly(n):
    while len(_NPOLY) <= n:
        k = len(_NPOLY) - 1
        N = _NPOLY[-1]
        dN = N[1:] * np.arange(1, len(N))
        # (1-u) * N'
        a = np.zeros(len(N) + 1)
        a[: len(dN)] += dN
        a[1 : 1 + len(dN)] -= dN
        a[: len(N)] += (k + 2) * N
        out = np.zeros(len(N) + 2)
        out[1 : 1 + len(a)] = a  # multiply by u
        _NPOLY.append(out)
    return _NPOLY[n]


def _horner(coeffs, u):
    val = 0.0 + 0.0j
    for c in coeffs[::-1]:
        val = val * u + c
    return val


@dataclass(frozen=True)
class LatticeTau:
    """Normalized lattice Z + Z*tau with Im tau > 0."""

    tau: complex

    def __post_init__(self):
        t = complex(self.tau)
        if not (t.imag > 0):
            raise StructuralError("lattice parameter must have positive imaginary part")
        object.__setattr__(self, "tau", t)


@dataclass
class EllipticContext:
    """Precomputed data for one lattice: invariants, half-period values,
    the Laurent table (symbolic and numeric), and q-series workspace."""

    tau: complex
    g2: complex
    g3: complex
    e: tuple
    b_sym: tuple
    b_num: tuple
    eta1: complex
    eta2: complex
    tol: float
    order: int
    lam_min: float = field(repr=False, default=1.0)
    _bn_ext: np.ndarray = field(repr=False, default=None)
    _alpha: np.ndarray = field(repr=False, default=None)
    _marr: np.ndarray = field(repr=False, default=None)
    _mterms: dict = field(repr=False, default_factory=dict)

    @property
    def near_pole_radius(self):
        return math.sqrt(self.tol)

    # -- lattice reduction -------------------------------------------------

    def reduce_point(self, z):
        """Write z = z_red + m + n*tau with the lattice coordinates of z_red
        in [-1/2, 1/2).  Returns (z_red, m, n)."""
        z = complex(z)
        t = self.tau
        b = z.imag / t.imag
        a = z.real - b * t.real
        m = math.floor(a + 0.5)
        n = math.floor(b + 0.5)
        return z - m - n * t, m, n

    def distance_to_lattice(self, z):
        zr, _, _ = self.reduce_point(z)
        return abs(zr)

    # -- q-series workspace --------------------------------------------------

    def _terms_for(self, n):
        """Number of q-series terms so the m^{n+1}-weighted tail is < 1e-19."""
        if n in self._mterms:
            return self._mterms[n]
        d = math.pi * self.tau.imag
        M = max(8, int(math.ceil(44.0 / d)))
        while M < 4000 and (n + 1) * math.log(M) - d * M > -44.0:
            M = int(M * 1.4) + 4
        if M >= 4000:
            raise EvaluationError("q-series does not converge fast enough at this tau")
        if self._marr is None or len(self._marr) < M:
            q = cmath.exp(_TWO_PI_I * self.tau)
            # float exponents: m^{n+1} for n ~ 12 overflows int64
            marr = np.arange(1, M + 1, dtype=float)
            qm = q ** marr
            self._alpha = qm / (1.0 - qm)
            self._marr = marr
        self._mterms[n] = M
        return M

    # -- evaluation ----------------------------------------------------------

    def _guard(self, zr, order):
        r = abs(zr)
        if r <= self.near_pole_radius:
            raise NearPoleError(
                "argument within %.3g of a lattice point" % r,
                distance=r,
                order=order,
            )
        return r

    def wp(self, z, n=0):
        """n-th derivative of P at z (n = 0 is P itself)."""
        zr, _, _ = self.reduce_point(z)
        r = self._guard(zr, n + 2)
        if r <= 0.35 * self.lam_min:
            return self._wp_laurent(zr, n)
        return self._wp_qseries(zr, n)

    def zeta(self, z):
        """Weierstrass zeta at z (quasi-periodic: corrected by eta shifts)."""
        zr, m, n = self.reduce_point(z)
        r = self._guard(zr, 1)
        if r <= 0.35 * self.lam_min:
            val = self._zeta_laurent(zr)
        else:
            val = self._zeta_qseries(zr)
        return val + m * self.eta1 + n * self.eta2

    def wp_bundle(self, z):
        """(P, P', zeta) at z with one shared reduction/workspace pass.

        This is the transport hot path."""
        zr, m, n = self.reduce_point(z)
        r = self._guard(zr, 2)
        if r <= 0.35 * self.lam_min:
            p = self._wp_laurent(zr, 0)
            p1 = self._wp_laurent(zr, 1)
            zt = self._zeta_laurent(zr)
        else:
            M = self._terms_for(2)
            u = cmath.exp(_TWO_PI_I * zr)
            marr = self._marr[:M]
            am = self._alpha[:M]
            up = u ** marr
            un = (1.0 / u) ** marr
            one = 1.0 - u
            p = _TWO_PI_I ** 2 * (
                1.0 / 12.0 + u / one ** 2 + np.sum(marr * am * (up + un - 2.0))
            )
            p1 = _TWO_PI_I ** 3 * (
                u * (1.0 + u) / one ** 3 + np.sum(marr ** 2 * am * (up - un))
            )
            zt = (
                self.eta1 * zr
                + 1j * math.pi * (1.0 + u) / (u - 1.0)
                - _TWO_PI_I * np.sum(am * (up - un))
            )
        return p, p1, zt + m * self.eta1 + n * self.eta2

    def wp_derivs(self, z, nmax):
        """Array [P(z), P'(z), ..., P^{(nmax)}(z)]."""
        return np.array([self.wp(z, n) for n in range(nmax + 1)])

    # -- regime implementations ----------------------------------------------

    def _wp_laurent(self, zr, n):
        b = self._bn_ext
        # d^n/dz^n z^{-2}
        ff = 1.0
        for i in range(n):
            ff *= -2 - i
        val = ff * zr ** (-2 - n)
        for j in range(4, len(b), 2):
            if j - 2 - n >= 0:
                c = 1.0
                for i in range(n):
                    c *= j - 2 - i
                val += b[j] * c * zr ** (j - 2 - n)
        return val

    def _zeta_laurent(self, zr):
        b = self._bn_ext
        val = 1.0 / zr
        for j in range(4, len(b), 2):
            val -= b[j] / (j - 1) * zr ** (j - 1)
        return val

    def _wp_qseries(self, zr, n):
        M = self._terms_for(n)
        u = cmath.exp(_TWO_PI_I * zr)
        marr = self._marr[:M]
        am = self._alpha[:M]
        up = u ** marr
        un = (1.0 / u) ** marr
        if n == 0:
            s = np.sum(marr * am * (up + un - 2.0))
            return _TWO_PI_I ** 2 * (1.0 / 12.0 + u / (1.0 - u) ** 2 + s)
        s = np.sum(marr ** (n + 1) * am * (up + (-1) ** n * un))
        rat = _horner(_npoly(n), u) / (1.0 - u) ** (n + 2)
        return _TWO_PI_I ** (n + 2) * (rat + s)

    def _zeta_qseries(self, zr):
        M = self._terms_for(0)
        u = cmath.exp(_TWO_PI_I * zr)
        marr = self._marr[:M]
        am = self._alpha[:M]
        up = u ** marr
        un = (1.0 / u) ** marr
        return (
            self.eta1 * zr
            + 1j * math.pi * (1.0 + u) / (u - 1.0)
            - _TWO_PI_I * np.sum(am * (up - un))
        )

    def to_json_dict(self):
        return {
            "tau": [self.tau.real, self.tau.imag],
            "g2": [self.g2.real, self.g2.imag],
            "g3": [self.g3.real, self.g3.imag],
            "e": [[ek.real, ek.imag] for ek in self.e],
            "eta1": [self.eta1.real, self.eta1.imag],
            "order": self.order,
            "tol": self.tol,
            "b": [p.to_json_dict() for p in self.b_sym],
        }


def _eisenstein(tau):
    """E2, E4, E6 at q = e^{2 pi i tau}, double precision."""
    q = cmath.exp(_TWO_PI_I * tau)
    if abs(q) >= 0.995:
        raise EvaluationError("tau too close to the real axis")
    M = max(8, int(math.ceil(-46.0 / math.log(abs(q)))))
    if M > 4000:
        raise EvaluationError("Eisenstein series needs too many terms")
    m = np.arange(1, M + 1, dtype=float)
    qm = q ** m
    am = qm / (1.0 - qm)
    S1 = np.sum(m * am)
    S3 = np.sum(m ** 3 * am)
    S5 = np.sum(m ** 5 * am)
    return 1.0 - 24.0 * S1, 1.0 + 240.0 * S3, 1.0 - 504.0 * S5


def _laurent_b_numeric(g2, g3, order):
    c = np.zeros(order // 2 + 1, dtype=complex)
    if order >= 4:
        c[2] = g2 / 20.0
    if order >= 6:
        c[3] = g3 / 28.0
    for k in range(4, order // 2 + 1):
        acc = 0.0 + 0.0j
        for mm in range(2, k - 1):
            acc += c[mm] * c[k - mm]
        c[k] = 3.0 * acc / ((2 * k + 1) * (k - 3))
    b = np.zeros(order + 1, dtype=complex)
    b[0] = 1.0
    for j in range(4, order + 1, 2):
        b[j] = c[j // 2]
    return b


def compute_invariants(lattice, tol=1e-12, b_order=28):
    """Build the elliptic context for a lattice.

    Parameters
    ----------
    lattice : LatticeTau
    tol : float
        Accuracy target for downstream identity checks; also sets the
        near-pole refusal radius sqrt(tol).
    b_order : int
        Highest index of the exported Laurent table.  The internal numeric
        table used for evaluation is extended past this regardless.
    """
    if not isinstance(lattice, LatticeTau):
        lattice = LatticeTau(complex(lattice))
    tau = lattice.tau
    E2, E4, E6 = _eisenstein(tau)
    pi = math.pi
    g2 = (4.0 * pi ** 4 / 3.0) * E4
    g3 = (8.0 * pi ** 6 / 27.0) * E6
    eta1 = (pi ** 2 / 3.0) * E2
    eta2 = eta1 * tau - _TWO_PI_I

    lam_min = min(
        abs(m + n * tau)
        for m in range(-6, 7)
        for n in range(-6, 7)
        if (m, n) != (0, 0)
    )

    ctx = EllipticContext(
        tau=tau,
        g2=complex(g2),
        g3=complex(g3),
        e=(0j, 0j, 0j),
        b_sym=weierstrass_laurent_symbolic(b_order),
        b_num=tuple(_laurent_b_numeric(g2, g3, b_order)),
        eta1=complex(eta1),
        eta2=complex(eta2),
        tol=float(tol),
        order=int(b_order),
        lam_min=float(lam_min),
        _bn_ext=_laurent_b_numeric(g2, g3, max(b_order, 46)),
    )
    ctx.e = (
        ctx.wp(0.5),
        ctx.wp(tau / 2.0),
        ctx.wp((1.0 + tau) / 2.0),
    )
    return ctx


def eval_weierstrass(ctx, z, kind="P", n=1):
    """Evaluate P, a derivative of P, or zeta at z.

    kind is one of "P", "P_DERIV" (with derivative order n >= 1), "ZETA".
    Points within sqrt(ctx.tol) of a lattice point raise NearPoleError
    carrying the distance and the local pole order.
    """
    if kind == "P":
        return ctx.wp(z, 0)
    if kind == "P_DERIV":
        n = int(n)
        if n < 1:
            raise StructuralError("P_DERIV needs n >= 1; use kind='P' for n = 0")
        return ctx.wp(z, n)
    if kind == "ZETA":
        return ctx.zeta(z)
    raise StructuralError("unknown kind %r" % (kind,))


# ---- invariant forms and their zeros in tau ------------------------------

FORM_NAMES = ("g2", "g3", "g2^3-27g3^2", "343g2^3-6561g3^2")


def _form_and_derivative(tau, with_derivative=True):
    """g2, g3 and their tau-derivatives from the Ramanujan identities."""
    E2, E4, E6 = _eisenstein(tau)
    pi = math.pi
    g2 = (4.0 * pi ** 4 / 3.0) * E4
    g3 = (8.0 * pi ** 6 / 27.0) * E6
    if not with_derivative:
        return g2, g3, None, None
    dE4 = _TWO_PI_I * (E2 * E4 - E6) / 3.0
    dE6 = _TWO_PI_I * (E2 * E6 - E4 ** 2) / 2.0
    dg2 = (4.0 * pi ** 4 / 3.0) * dE4
    dg3 = (8.0 * pi ** 6 / 27.0) * dE6
    return g2, g3, dg2, dg3


def _apply_form(form, g2, g3, dg2=None, dg3=None):
    if form == "g2":
        f = g2
        fp = dg2
    elif form == "g3":
        f = g3
        fp = dg3
    elif form == "g2^3-27g3^2":
        f = g2 ** 3 - 27.0 * g3 ** 2
        fp = None if dg2 is None else 3.0 * g2 ** 2 * dg2 - 54.0 * g3 * dg3
    elif form == "343g2^3-6561g3^2":
        f = 343.0 * g2 ** 3 - 6561.0 * g3 ** 2
        fp = None if dg2 is None else 1029.0 * g2 ** 2 * dg2 - 13122.0 * g3 * dg3
    else:
        raise StructuralError(
            "unknown form %r; expected one of %s" % (form, ", ".join(FORM_NAMES))
        )
    return f, fp


def _form_scale(form, g2, g3):
    a2, a3 = abs(g2), abs(g3)
    if form == "g2":
        return 1.0 + a3 ** (2.0 / 3.0)
    if form == "g3":
        return 1.0 + a2 ** 1.5
    return 1.0 + a2 ** 3 + a3 ** 2


def reduce_fundamental(tau):
    """Reduce tau into the fundamental domain Re in (-1/2, 1/2], |tau| >= 1.

    Works on complex or mpmath.mpc and preserves the input type."""
    t = tau
    for _ in range(256):
        re = t.real if isinstance(t, complex) else mpmath.re(t)
        shift = int(math.ceil(float(re) - 0.5))
        t = t - shift
        # the slack stops boundary points (|tau| = 1 up to rounding) from
        # ping-ponging between the two corners forever
        if abs(t) < 1.0 - 1e-12:
            t = -1.0 / t
        else:
            break
    else:
        raise EvaluationError("fundamental-domain reduction did not terminate")
    return t


def _eisenstein_mp(tau):
    q = mpmath.exp(2j * mpmath.pi * tau)
    if abs(q) >= mpmath.mpf("0.999"):
        raise EvaluationError("tau too close to the real axis")
    S1 = mpmath.mpc(0)
    S3 = mpmath.mpc(0)
    S5 = mpmath.mpc(0)
    qm = mpmath.mpc(1)
    eps = mpmath.mpf(10) ** (-(mpmath.mp.dps + 8))
    for m in range(1, 3000):
        qm = qm * q
        a = qm / (1 - qm)
        S1 += m * a
        S3 += m ** 3 * a
        S5 += m ** 5 * a
        if abs(a) * m ** 6 < eps:
            break
    else:
        raise EvaluationError("Eisenstein series needs too many terms")
    return 1 - 24 * S1, 1 + 240 * S3, 1 - 504 * S5


def _g_invariants_mp(tau):
    E2, E4, E6 = _eisenstein_mp(tau)
    pi = mpmath.pi
    g2 = (4 * pi ** 4 / 3) * E4
    g3 = (8 * pi ** 6 / 27) * E6
    dE4 = 2j * pi * (E2 * E4 - E6) / 3
    dE6 = 2j * pi * (E2 * E6 - E4 ** 2) / 2
    dg2 = (4 * pi ** 4 / 3) * dE4
    dg3 = (8 * pi ** 6 / 27) * dE6
    return g2, g3, dg2, dg3


def form_value(form, tau, dps=None):
    """Value of a named invariant form at tau.

    With dps=None uses double precision; otherwise evaluates with mpmath at
    the given working precision (needed to certify |form| below the double
    rounding floor of weight-12 quantities, which is around 1e-7)."""
    if dps is None:
        g2, g3, _, _ = _form_and_derivative(complex(tau), with_derivative=False)
        f, _ = _apply_form(form, g2, g3)
        return f
    with mpmath.workdps(dps):
        g2, g3, _, _ = _g_invariants_mp(mpmath.mpc(tau))
        f, _ = _apply_form(form, g2, g3)
        return f


def find_form_zero(form, seed, tol=1e-12):
    """Newton zero of a named form in tau, polished in high precision.

    Returns an mpmath.mpc in the standard fundamental domain (it duck-types
    as a Python complex via .real/.imag/complex()).  Raises
    InconclusiveError-free: failures surface as EvaluationError since they
    are convergence failures of the series/iteration."""
    tau = complex(seed)
    if tau.imag <= 0:
        raise StructuralError("seed must be in the upper half plane")
    f_prev = None
    for _ in range(80):
        g2, g3, dg2, dg3 = _form_and_derivative(tau)
        f, fp = _apply_form(form, g2, g3, dg2, dg3)
        scale = _form_scale(form, g2, g3)
        if abs(f) <= 1e-9 * scale:
            break
        if fp == 0:
            raise EvaluationError("stationary point in form iteration")
        step = f / fp
        # damp: keep inside the upper half plane and demand progress
        s = 1.0
        for _ in range(10):
            cand = tau - s * step
            if cand.imag > 0.02:
                g2c, g3c, _, _ = _form_and_derivative(cand, with_derivative=False)
                fc, _ = _apply_form(form, g2c, g3c)
                if f_prev is None or abs(fc) < abs(f):
                    break
            s *= 0.5
        tau = tau - s * step
        f_prev = f
    else:
        raise EvaluationError("double-precision Newton stalled for %s" % form)

    with mpmath.workdps(40):
        t = mpmath.mpc(tau)
        for _ in range(60):
            g2, g3, dg2, dg3 = _g_invariants_mp(t)
            f, fp = _apply_form(form, g2, g3, dg2, dg3)
            if abs(f) < mpmath.mpf(10) ** (-30):
                break
            t = t - f / fp
        t = reduce_fundamental(t)
        g2, g3, _, _ = _g_invariants_mp(t)
        f, _ = _apply_form(form, g2, g3)
        scale = float(_form_scale(form, complex(g2), complex(g3)))
        if abs(f) > tol * scale:
            raise EvaluationError(
                "form zero did not certify: |%s| = %.3g" % (form, float(abs(f)))
            )
        return +t
