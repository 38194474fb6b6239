"""Monodromy validation and field reconstruction for census roots.

A root of the apparency system determines the third-order equation

    y''' + W2(z) y' + W3(z) y = 0

with doubly periodic coefficients.  This module transports fundamental
frames along planned paths (adaptive Dormand-Prince 5(4) on the companion
system), extracts the two period monodromies and the local loop matrices,
checks the scalar local condition and the commutator identity
N1 N2 N1^-1 N2^-1 = eps I, searches for an invariant Hermitian form
(unitarization), and reconstructs the two field profiles whose PDE residuals
certify the root end to end.

Conventions fixed here: a transport T along a path maps initial data
(y, y', y'') at the start to data at the end, composing as T(q after p) =
T(q) T(p); monodromy matrices act on the solution row basis, which makes
them the transposes of the data transports.  Local loops are positively
oriented 24-gons.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .apparency import ParamVec, ProblemSpec
from .elliptic import compute_invariants
from .errors import (
    EvaluationError,
    PathClearanceError,
    StructuralError,
)
from .jsonio import complex_pair, matrix_to_json

__all__ = [
    "MonodromyReport",
    "UnitarizeResult",
    "ode_coefficients",
    "plan_path",
    "transport",
    "monodromy_pair",
    "unitarize",
    "reconstruct_and_check",
    "verify_root",
]


# ---------------------------------------------------------------------------
# ODE coefficients


class _OdeCoeffs:
    """W2, W3 and their z-derivatives for fixed problem / parameters."""

    def __init__(self, problem, ctx, params):
        if not isinstance(params, ParamVec):
            params = ParamVec.from_vector(params)
        mp1 = len(problem.punctures)
        if not (len(params.A) == len(params.Bk) == len(params.Dk) == mp1):
            raise StructuralError("parameter arity does not match puncture count")
        self.ctx = ctx
        self.B = complex(params.B)
        self.D = complex(params.D)
        self.data = []
        for k, pk in enumerate(problem.punctures):
            self.data.append(
                (
                    complex(pk.p),
                    float(pk.alpha),
                    float(pk.beta),
                    complex(params.Bk[k]),
                    complex(params.Dk[k]),
                    complex(params.A[k]),
                )
            )

    def values(self, z):
        W2 = -self.B
        W3 = self.D
        for p, al, be, Bk, Dk, Ak in self.data:
            P, P1, Z = self.ctx.wp_bundle(z - p)
            W2 -= al * P + Bk * Z
            W3 += be * P1 + Dk * P + Ak * Z
        return W2, W3

    def derivs(self, z, n):
        """Lists (W2^(j))_{j=0..n}, (W3^(j))_{j=0..n}."""
        W2d = np.zeros(n + 1, complex)
        W3d = np.zeros(n + 1, complex)
        W2d[0] = -self.B
        W3d[0] = self.D
        for p, al, be, Bk, Dk, Ak in self.data:
            u = z - p
            wp = self.ctx.wp_derivs(u, n + 1)
            zv = self.ctx.zeta(u)
            W2d[0] -= al * wp[0] + Bk * zv
            W3d[0] += be * wp[1] + Dk * wp[0] + Ak * zv
            for j in range(1, n + 1):
                # zeta^(j) = -wp^(j-1)
                W2d[j] -= al * wp[j] - Bk * wp[j - 1]
                W3d[j] += be * wp[j + 1] + Dk * wp[j] - Ak * wp[j - 1]
        return W2d, W3d


def ode_coefficients(problem, ctx, params, z):
    """(W2(z), W3(z)) of the equation attached to the given parameters."""
    return _OdeCoeffs(problem, ctx, params).values(z)


# ---------------------------------------------------------------------------
# geometry helpers


def _singular_translates(problem, ctx, pad=2):
    """Lattice translates of all punctures covering the working region."""
    tau = ctx.tau
    out = []
    for pk in problem.punctures:
        for mm in range(-pad, pad + 1):
            for nn in range(-pad, pad + 1):
                out.append(pk.p + mm + nn * tau)
    return np.array(out, complex)


def _min_dist(z, sing):
    return float(np.min(np.abs(sing - z)))


def _worst_violation(a, b, sing, clearance):
    d = b - a
    L = abs(d)
    if L == 0:
        return None
    best = None
    best_dist = clearance
    for s in sing:
        t = ((s - a) * d.conjugate()).real / (L * L)
        t = min(max(t, 0.0), 1.0)
        dist = abs(s - (a + t * d))
        if dist < best_dist * (1.0 - 1e-12):
            best_dist = dist
            best = s
    if best is None:
        return None
    # deterministic detour: push the waypoint to the left of the direction
    n = 1j * d / L
    return best + 1.5 * clearance * n


def plan_path(a, b, sing, clearance):
    """Polyline from a to b keeping the requested clearance.

    Straight where possible; otherwise deterministic left-side waypoints are
    inserted next to each violating singularity until every segment clears.
    """
    a, b = complex(a), complex(b)
    sing = np.asarray(sing, complex)
    for ep in (a, b):
        if len(sing) and _min_dist(ep, sing) < clearance * (1.0 - 1e-9):
            raise PathClearanceError(
                "path endpoint sits closer than the clearance to a singularity"
            )
    verts = [a, b]
    for _ in range(64):
        out = [verts[0]]
        changed = False
        for va, vb in zip(verts, verts[1:]):
            w = _worst_violation(va, vb, sing, clearance)
            if w is not None:
                out.append(w)
                changed = True
            out.append(vb)
        verts = out
        if not changed:
            return verts
        if len(verts) > 200:
            break
    raise PathClearanceError("no clear path found within the detour budget")


def _polygon(center, radius, nsides=24):
    """Closed positively oriented polygon around center."""
    return [
        center + radius * cmath.exp(2j * math.pi * k / nsides)
        for k in range(nsides + 1)
    ]


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) transport

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _segment_transport(coeffs, za, zb, Y, sing, rtol, atol, max_steps=200000):
    """Continue dY/dz = A(z) Y along the straight segment za -> zb."""
    dz = zb - za
    L = abs(dz)
    if L == 0:
        return Y

    def g(t, U):
        W2, W3 = coeffs.values(za + t * dz)
        out = np.empty_like(U)
        out[0] = U[1]
        out[1] = U[2]
        out[2] = -W3 * U[0] - W2 * U[1]
        return dz * out

    t = 0.0
    have_sing = len(sing) > 0
    cap = (0.25 * _min_dist(za, sing) / L) if have_sing else 1.0
    h = min(0.1, cap, 1.0)
    k1 = g(t, Y)
    errold = 1.0
    for _ in range(max_steps):
        if t >= 1.0:
            return Y
        if have_sing:
            cap = 0.25 * _min_dist(za + t * dz, sing) / L
            h = min(h, cap)
        h = min(h, 1.0 - t)
        if h < 1e-14:
            raise EvaluationError("transport step size underflow")
        ks = [k1]
        for i in range(1, 7):
            acc = _A[i][0] * ks[0]
            for j in range(1, i):
                if _A[i][j] != 0.0:
                    acc = acc + _A[i][j] * ks[j]
            ks.append(g(t + _C[i] * h, Y + h * acc))
        Ynew = Y + h * (
            _B[0] * ks[0] + _B[2] * ks[2] + _B[3] * ks[3]
            + _B[4] * ks[4] + _B[5] * ks[5]
        )
        errv = h * (
            _E[0] * ks[0] + _E[2] * ks[2] + _E[3] * ks[3]
            + _E[4] * ks[4] + _E[5] * ks[5] + _E[6] * ks[6]
        )
        scale = atol + rtol * max(
            float(np.max(np.abs(Y))), float(np.max(np.abs(Ynew)))
        )
        err = float(np.max(np.abs(errv))) / scale
        if err <= 1.0:
            t += h
            Y = Ynew
            k1 = ks[6]
            fac = 0.9 * (err + 1e-30) ** (-0.14) * errold ** 0.08
            errold = max(err, 1e-4)
            h *= min(5.0, max(0.2, fac))
        else:
            h *= max(0.2, 0.9 * err ** (-0.2))
    raise EvaluationError("transport exceeded the step budget")


def transport(problem, ctx, params, vertices, rtol=1e-11, sing=None, Y0=None):
    """Fundamental transport along a polyline; columns carry initial data."""
    coeffs = params if isinstance(params, _OdeCoeffs) else _OdeCoeffs(problem, ctx, params)
    if sing is None:
        sing = _singular_translates(problem, ctx)
    Y = np.eye(3, dtype=complex) if Y0 is None else np.array(Y0, complex)
    atol = rtol * 1e-2
    for va, vb in zip(vertices, vertices[1:]):
        Y = _segment_transport(coeffs, complex(va), complex(vb), Y, sing, rtol, atol)
    return Y


# ---------------------------------------------------------------------------
# reports


@dataclass
class UnitarizeResult:
    ok: bool
    reason: str
    H: np.ndarray = None
    P: np.ndarray = None
    N1_normal: np.ndarray = None
    N2_normal: np.ndarray = None
    unitary_residual: float = None
    normal_residual: float = None

    def to_json_dict(self):
        return {
            "ok": self.ok,
            "reason": self.reason,
            "H": None if self.H is None else matrix_to_json(self.H),
            "P": None if self.P is None else matrix_to_json(self.P),
            "N1_normal": None if self.N1_normal is None else matrix_to_json(self.N1_normal),
            "N2_normal": None if self.N2_normal is None else matrix_to_json(self.N2_normal),
            "unitary_residual": self.unitary_residual,
            "normal_residual": self.normal_residual,
        }


@dataclass
class MonodromyReport:
    """Everything measured about one root's monodromy."""

    tau: complex
    epsilon: complex
    N1: np.ndarray
    N2: np.ndarray
    local: tuple
    local_scalars: tuple
    local_scalar_residuals: tuple
    eps_residual: float
    det_drift: float
    base_point: complex
    loop_radius: float
    rtol: float
    unitarizable: bool = None
    H: np.ndarray = None
    pde_residual: float = None
    even_residual: float = None
    notes: tuple = ()

    def to_json_dict(self):
        return {
            "tau": complex_pair(self.tau),
            "epsilon": complex_pair(self.epsilon),
            "N1": matrix_to_json(self.N1),
            "N2": matrix_to_json(self.N2),
            "local": [matrix_to_json(M) for M in self.local],
            "local_scalars": [complex_pair(s) for s in self.local_scalars],
            "local_scalar_residuals": list(self.local_scalar_residuals),
            "eps_residual": self.eps_residual,
            "det_drift": self.det_drift,
            "base_point": complex_pair(self.base_point),
            "loop_radius": self.loop_radius,
            "rtol": self.rtol,
            "unitarizable": self.unitarizable,
            "H": None if self.H is None else matrix_to_json(self.H),
            "pde_residual": self.pde_residual,
            "even_residual": self.even_residual,
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# monodromy extraction


def _geometry(problem, ctx):
    """Base point, loop clearance, local radius, singular translates."""
    tau = ctx.tau
    sing = _singular_translates(problem, ctx)
    min_sep = math.inf
    pts = [pk.p for pk in problem.punctures]
    # pairwise separation modulo the lattice
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = pts[i] - pts[j]
            b = d.imag / tau.imag
            a = d.real - b * tau.real
            dred = d - round(a) - round(b) * tau
            min_sep = min(min_sep, abs(dred))
    eps0 = 0.1 * min(1.0, ctx.lam_min, min_sep)
    # base the loops as far from every pole as the cell allows: transports
    # that hug a pole lose digits to the exponent spread of the solutions
    fracs = (0.5, 0.375, 0.625, 0.25, 0.75, 0.4375, 0.5625)
    q0, best = None, -1.0
    for a in fracs:
        for b in fracs:
            cand = a + b * tau
            d = _min_dist(cand, sing)
            if d > best:
                best, q0 = d, cand
    if best < eps0:
        raise PathClearanceError("could not place a base point")
    clearance = 0.8 * eps0 * min(1.0, tau.imag)
    return q0, clearance, 2.5 * eps0, sing


def monodromy_pair(problem, ctx, params, rtol=1e-11):
    """Period monodromies, local loop matrices, and their residuals."""
    coeffs = _OdeCoeffs(problem, ctx, params)
    tau = ctx.tau
    q0, clearance, r_loc, sing = _geometry(problem, ctx)

    T1 = transport(problem, ctx, coeffs, plan_path(q0, q0 + 1, sing, clearance),
                   rtol=rtol, sing=sing)
    T2 = transport(problem, ctx, coeffs, plan_path(q0, q0 + tau, sing, clearance),
                   rtol=rtol, sing=sing)
    # monodromy acts on the solution basis: transpose of the data transport
    N1 = T1.T.copy()
    N2 = T2.T.copy()
    eps = problem.epsilon
    comm = N1 @ N2 @ np.linalg.inv(N1) @ np.linalg.inv(N2)
    eps_residual = float(np.max(np.abs(comm - eps * np.eye(3))))

    local = []
    local_scalars = []
    local_res = []
    det_drift = max(abs(np.linalg.det(T1) - 1.0), abs(np.linalg.det(T2) - 1.0))
    for pk in problem.punctures:
        poly = _polygon(pk.p, r_loc)
        M = transport(problem, ctx, coeffs, poly, rtol=rtol, sing=sing).T
        s = cmath.exp(-2j * math.pi * float(pk.gamma1))
        local.append(M)
        local_scalars.append(s)
        local_res.append(float(np.max(np.abs(M - s * np.eye(3)))))
        det_drift = max(det_drift, abs(np.linalg.det(M) - 1.0))

    return MonodromyReport(
        tau=tau,
        epsilon=eps,
        N1=N1,
        N2=N2,
        local=tuple(local),
        local_scalars=tuple(local_scalars),
        local_scalar_residuals=tuple(local_res),
        eps_residual=eps_residual,
        det_drift=float(det_drift),
        base_point=q0,
        loop_radius=r_loc,
        rtol=rtol,
    )


# ---------------------------------------------------------------------------
# unitarization

_HERM_BASIS = None


def _herm_basis():
    global _HERM_BASIS
    if _HERM_BASIS is None:
        basis = []
        for i in range(3):
            E = np.zeros((3, 3), complex)
            E[i, i] = 1.0
            basis.append(E)
        s = 1.0 / math.sqrt(2.0)
        for i in range(3):
            for j in range(i + 1, 3):
                E = np.zeros((3, 3), complex)
                E[i, j] = s
                E[j, i] = s
                basis.append(E)
                E = np.zeros((3, 3), complex)
                E[i, j] = 1j * s
                E[j, i] = -1j * s
                basis.append(E)
        _HERM_BASIS = tuple(basis)
    return _HERM_BASIS


def unitarize(report, null_threshold=1e-8):
    """Invariant positive Hermitian form for the two period monodromies.

    Solves H = Nj^H H Nj over the real 9-dimensional space of Hermitian
    matrices by SVD; requires the report to satisfy the commutator identity
    first.  On success fills report.H / report.unitarizable and returns the
    transformed normal forms: N1 diagonal (1, eps, eps^2), N2 the cyclic
    permutation matrix.
    """
    if report.eps_residual > 1e-4:
        raise StructuralError(
            "commutator residual too large; unitarization is meaningless"
        )
    basis = _herm_basis()
    U, S, Vt = np.linalg.svd(_stack_operator(basis, report))
    null = S <= null_threshold * S[0]
    if not null.any():
        report.unitarizable = False
        return UnitarizeResult(ok=False, reason="no invariant Hermitian form")
    hvec = Vt[-1]
    H = sum(float(x) * Eb for x, Eb in zip(hvec, basis))
    H = 0.5 * (H + H.conj().T)
    lam = np.linalg.eigvalsh(H)
    if lam[0] * lam[-1] <= 0 or min(abs(lam)) <= 1e-8 * max(abs(lam)):
        report.unitarizable = False
        return UnitarizeResult(ok=False, reason="invariant form is not definite")
    if lam[0] < 0:
        H = -H
        lam = -lam[::-1]
    Lc = np.linalg.cholesky(H)
    P = Lc.conj().T
    Pinv = np.linalg.inv(P)
    U1 = P @ report.N1 @ Pinv
    U2 = P @ report.N2 @ Pinv
    unit_res = max(
        float(np.max(np.abs(U1.conj().T @ U1 - np.eye(3)))),
        float(np.max(np.abs(U2.conj().T @ U2 - np.eye(3)))),
    )

    eps = report.epsilon
    targets = (1.0 + 0j, eps, eps * eps)
    w, V = np.linalg.eig(U1)
    cols = []
    used = set()
    for tgt in targets:
        best, bi = None, None
        for i in range(3):
            if i in used:
                continue
            d = abs(w[i] - tgt)
            if best is None or d < best:
                best, bi = d, i
        used.add(bi)
        cols.append(V[:, bi] / np.linalg.norm(V[:, bi]))
    Q = np.stack(cols, axis=1)
    Q, _ = np.linalg.qr(Q)
    # keep the eigenvalue order: QR only re-phases/orthonormalizes here
    N1n = Q.conj().T @ U1 @ Q
    N2n = Q.conj().T @ U2 @ Q
    a, b, c = N2n[1, 0], N2n[2, 1], N2n[0, 2]
    if min(abs(a), abs(b), abs(c)) > 1e-8:
        Sdiag = np.diag([1.0, a, a * b])
        Sinv = np.diag([1.0, 1.0 / a, 1.0 / (a * b)])
        N2n = Sinv @ N2n @ Sdiag
        N1n = Sinv @ N1n @ Sdiag
    cyc = np.zeros((3, 3), complex)
    cyc[1, 0] = cyc[2, 1] = cyc[0, 2] = 1.0
    normal_res = max(
        float(np.max(np.abs(N1n - np.diag([1.0, eps, eps * eps])))),
        float(np.max(np.abs(N2n - cyc))),
    )
    report.unitarizable = True
    report.H = H
    return UnitarizeResult(
        ok=True,
        reason="",
        H=H,
        P=P,
        N1_normal=N1n,
        N2_normal=N2n,
        unitary_residual=unit_res,
        normal_residual=normal_res,
    )


def _stack_operator(basis, report):
    """Matrix of H -> (H - Nj^H H Nj)_j on Hermitian coordinates (18 x 9)."""
    cols = []
    for Eb in basis:
        img_rows = []
        for N in (report.N1, report.N2):
            img = Eb - N.conj().T @ Eb @ N
            img_rows.extend(
                float(np.real(np.trace(Fb.conj().T @ img))) for Fb in basis
            )
        cols.append(img_rows)
    return np.array(cols).T


# ---------------------------------------------------------------------------
# reconstruction


def _taylor_frame(coeffs, z, Y, order=12):
    """Derivative stack Y[k] (3,) for k = 0..order at z from frame data."""
    out = np.zeros((order + 1, 3), complex)
    out[0] = Y[0]
    out[1] = Y[1]
    out[2] = Y[2]
    W2d, W3d = coeffs.derivs(z, max(order - 2, 1))
    for k in range(order - 2):
        acc = np.zeros(3, complex)
        for j in range(k + 1):
            ckj = math.comb(k, j)
            acc += ckj * (W2d[j] * out[k - j + 1] + W3d[j] * out[k - j])
        out[k + 3] = -acc
    return out


def _eval_taylor(stack, delta):
    val = np.zeros(3, complex)
    der = np.zeros(3, complex)
    f = 1.0
    for k in range(stack.shape[0]):
        if k > 0:
            f *= k
        dk = delta ** k / f
        val += stack[k] * dk
        if k + 1 < stack.shape[0]:
            der += stack[k + 1] * dk
    return val, der


def _uv_from_frame(P, detP, Yval, Yder):
    yt = P @ Yval
    ytd = P @ Yder
    r1 = float(np.sum(np.abs(yt) ** 2))
    w01 = yt[0] * ytd[1] - ytd[0] * yt[1]
    w12 = yt[1] * ytd[2] - ytd[1] * yt[2]
    w20 = yt[2] * ytd[0] - ytd[2] * yt[0]
    r2 = float(abs(w01) ** 2 + abs(w12) ** 2 + abs(w20) ** 2)
    a = abs(detP)
    eU = 0.25 * a ** (-2.0 / 3.0) * r1
    eV = 0.25 * a ** (-4.0 / 3.0) * r2
    if not (eU > 0 and eV > 0):
        raise EvaluationError("degenerate frame during reconstruction")
    return -math.log(eU), -math.log(eV)


def reconstruct_and_check(problem, ctx, params, report=None, rtol=1e-11,
                          h=1e-3, exclusion=0.1, grid_n=8, taylor_order=12):
    """Reconstruct both field profiles on a grid and measure PDE residuals.

    Uses the invariant form of a successful unitarization (run here when the
    report lacks one).  Returns (pde_residual, even_residual); even_residual
    is None when the kept grid is not symmetric under z -> -z.
    """
    coeffs = _OdeCoeffs(problem, ctx, params)
    if report is None:
        report = monodromy_pair(problem, ctx, params, rtol=rtol)
    if report.H is None:
        res = unitarize(report)
        if not res.ok:
            raise StructuralError("root is not unitarizable: " + res.reason)
    Lc = np.linalg.cholesky(report.H)
    P = Lc.conj().T
    detP = complex(np.prod(np.diag(Lc)))

    tau = ctx.tau
    sing = _singular_translates(problem, ctx, pad=3)
    n2 = grid_n // 2

    pts = {}
    order_idx = []
    for j in range(-n2, n2):
        irange = range(-n2, n2)
        row = list(irange)
        if (j + n2) % 2 == 1:
            row = row[::-1]
        for i in row:
            z = ((i + 0.5) / grid_n) * 1.0 + ((j + 0.5) / grid_n) * tau
            if _min_dist(z, sing) < exclusion:
                continue
            pts[(i, j)] = z
            order_idx.append((i, j))
    if not pts:
        raise StructuralError("reconstruction grid is empty")

    q0 = report.base_point
    clearance = min(0.05, 0.8 * report.loop_radius)
    hop_rtol = rtol

    U = {}
    V = {}
    Y = np.eye(3, dtype=complex)
    prev = q0
    pde_res = 0.0
    offsets = [0.0, h, -h, 2 * h, -2 * h, 1j * h, -1j * h, 2j * h, -2j * h]
    for key in order_idx:
        z = pts[key]
        path = plan_path(prev, z, sing, clearance)
        Y = transport(problem, ctx, coeffs, path, rtol=hop_rtol, sing=sing, Y0=Y)
        prev = z
        stack = _taylor_frame(coeffs, z, Y, order=taylor_order)
        vals = {}
        for d in offsets:
            yv, yd = _eval_taylor(stack, d)
            vals[d] = _uv_from_frame(P, detP, yv, yd)
        u0, v0 = vals[0.0]
        U[key] = u0
        V[key] = v0
        lapU = (
            -vals[2 * h][0] + 16 * vals[h][0] - 30 * u0 + 16 * vals[-h][0] - vals[-2 * h][0]
            - vals[2j * h][0] + 16 * vals[1j * h][0] - 30 * u0 + 16 * vals[-1j * h][0] - vals[-2j * h][0]
        ) / (12 * h * h)
        lapV = (
            -vals[2 * h][1] + 16 * vals[h][1] - 30 * v0 + 16 * vals[-h][1] - vals[-2 * h][1]
            - vals[2j * h][1] + 16 * vals[1j * h][1] - 30 * v0 + 16 * vals[-1j * h][1] - vals[-2j * h][1]
        ) / (12 * h * h)
        pde_res = max(
            pde_res,
            abs(lapU + math.exp(2 * u0 - v0)),
            abs(lapV + math.exp(2 * v0 - u0)),
        )

    even_res = None
    sym = all((-1 - i, -1 - j) in pts for (i, j) in pts)
    if sym:
        even_res = 0.0
        for (i, j), u in U.items():
            even_res = max(even_res, abs(u - U[(-1 - i, -1 - j)]))
    if report is not None:
        report.pde_residual = float(pde_res)
        report.even_residual = None if even_res is None else float(even_res)
    return float(pde_res), (None if even_res is None else float(even_res))


def verify_root(problem, ctx, params, rtol=1e-11, reconstruct=True):
    """Full monodromy validation of one root; returns the filled report."""
    if ctx is None:
        ctx = compute_invariants(problem.lattice)
    report = monodromy_pair(problem, ctx, params, rtol=rtol)
    notes = list(report.notes)
    try:
        unitarize(report)
    except StructuralError as e:
        report.unitarizable = False
        notes.append(str(e))
    if reconstruct and report.unitarizable:
        try:
            reconstruct_and_check(problem, ctx, params, report=report, rtol=rtol)
        except (EvaluationError, StructuralError, PathClearanceError) as e:
            notes.append("reconstruction failed: " + str(e))
    report.notes = tuple(notes)
    return report
