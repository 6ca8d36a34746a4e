"""SU(2) sub-Riemannian geodesics, distance estimates and Euler-type sequences.

The SU(2) geometry uses the horizontal frame ``{X/2, Z/2}``.  Its geodesics
have unit-speed controls ``c(t) = (cos(beta t + phi0), sin(beta t + phi0))``
and the closed form

    C(t) = exp(i t/2 (cos(phi0) X + beta Y + sin(phi0) Z)) exp(-i t/2 beta Y).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import schur
from scipy.ndimage import minimum_filter
from scipy.optimize import least_squares

from .curves import ControlCurve, RotationSequence, RotationStep
from .exceptions import GeodesicSolverError, ReachabilityError, ValidationError
from .pauli import (
    GeneratorSet,
    LieBasisElement,
    LieHull,
    PauliTerm,
    commutator_chain,
    hs_decompose,
    hs_reconstruct,
    lie_hull,
    matrix_rep,
    pauli_product,
    pauli_rotation,
)

log = logging.getLogger(__name__)

_I2 = np.eye(2, dtype=complex)
_X = matrix_rep(PauliTerm("X"))
_Y = matrix_rep(PauliTerm("Y"))
_Z = matrix_rep(PauliTerm("Z"))

T_SCAN_MAX = 2 * math.pi + 0.5
BETA_POINTS = 401
T_POINTS = 600
SEED_THRESHOLD = 0.1
MAX_SEEDS = 200


def su2_frame() -> GeneratorSet:
    return GeneratorSet.parse("X,Z")


def _check_su2(U):
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValidationError("expected a 2x2 matrix")
    if np.max(np.abs(U.conj().T @ U - _I2)) > 1e-10 or abs(np.linalg.det(U) - 1) > 1e-10:
        raise ValidationError("target is not special unitary")
    return U


def _quaternion(U) -> np.ndarray:
    """Real ``(u0, ux, uy, uz)`` with ``U = u0 I + i (ux X + uy Y + uz Z)``."""
    return np.real(
        [np.trace(U) / 2, np.trace(_X @ U) / 2j, np.trace(_Y @ U) / 2j, np.trace(_Z @ U) / 2j]
    )


def _su2_exp(v) -> np.ndarray:
    """``exp(i/2 (vx X + vy Y + vz Z))``."""
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return _I2.copy()
    H = (v[0] * _X + v[1] * _Y + v[2] * _Z) / n
    return math.cos(n / 2) * _I2 + 1j * math.sin(n / 2) * H


@dataclass(frozen=True)
class Su2GeodesicParams:
    phi0: float
    beta: float
    duration: float

    def controls(self, t) -> np.ndarray:
        a = self.beta * np.asarray(t, dtype=float) + self.phi0
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    def point(self, t: float) -> np.ndarray:
        """Closed-form curve point ``C(t)``."""
        v = t * np.array([math.cos(self.phi0), self.beta, math.sin(self.phi0)])
        return _su2_exp(v) @ pauli_rotation(PauliTerm("Y"), -t * self.beta)

    def endpoint(self) -> np.ndarray:
        return self.point(self.duration)


def su2_geodesic_controls(params: Su2GeodesicParams) -> ControlCurve:
    return ControlCurve(su2_frame(), params.duration, params.controls)


def _residual_vector(p, U):
    phi0, beta, T = p
    return (Su2GeodesicParams(phi0, beta, T).endpoint() - U).view(float).ravel()


def _scan_functions(q, beta, T):
    """Endpoint conditions after eliminating ``phi0``.

    With ``V = U exp(i T beta Y / 2)`` the target is reached iff ``V`` equals
    ``exp(i T/2 (cos phi0, beta, sin phi0) . sigma)``; its scalar part and
    its Y component give two equations in ``(beta, T)``.
    """
    u0, ux, uy, uz = q
    c, s = np.cos(T * beta / 2), np.sin(T * beta / 2)
    v0 = u0 * c - uy * s
    vx = c * ux + uz * s
    vy = u0 * s + c * uy
    vz = c * uz - ux * s
    w = np.sqrt(1 + beta**2)
    a = T * w / 2
    f = v0 - np.cos(a)
    g = vy - np.sin(a) * beta / w
    return f, g, vx, vz, np.sin(a)


def _t_guess(U) -> float:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            d = _d_infty_su2(U)
    except ReachabilityError:
        d = 1.0
    if d == 0.0:
        # +-identity: only closed geodesics remain, none of them short
        d = 1.0
    return float(np.clip(d, 1e-6, 2.0))


def su2_geodesic_solve(target, t_max: float = T_SCAN_MAX) -> list[Su2GeodesicParams]:
    """All geodesics from the identity to ``target`` with duration in ``(0, t_max]``.

    Local minima of the reduced endpoint conditions on a ``(beta, T)`` grid
    seed a damped Gauss-Newton polish of the full residual
    ``C(T) - U``.  Converged solutions are deduplicated and returned sorted
    by duration, so the first entry is the shortest one found.
    """
    U = _check_su2(target)
    q = _quaternion(U)
    t_guess = _t_guess(U)
    b_max = max(4 * math.pi / t_guess, 8.0)
    betas = np.linspace(-b_max, b_max, BETA_POINTS)
    Ts = np.unique(
        np.concatenate(
            [
                np.linspace(0, t_max, T_POINTS + 1)[1:],
                np.geomspace(t_guess / 10, min(4 * t_guess, t_max), 200),
            ]
        )
    )
    B, T = np.meshgrid(betas, Ts, indexing="ij")
    f, g, _, _, _ = _scan_functions(q, B, T)
    r = np.hypot(f, g)
    # tangential roots (pure-Y targets) never change sign, so seed from local minima
    is_min = (minimum_filter(r, size=3, mode="nearest") == r) & (r < SEED_THRESHOLD)
    seeds = np.argwhere(is_min)
    seeds = seeds[np.argsort(r[is_min], kind="stable")][:MAX_SEEDS]
    found: list[Su2GeodesicParams] = []
    for i, j in seeds:
        b0, t0 = betas[i], Ts[j]
        _, _, x0, z0, s0 = _scan_functions(q, b0, t0)
        sign = 1.0 if s0 >= 0 else -1.0
        phi_start = math.atan2(sign * z0, sign * x0) if abs(s0) > 1e-12 else 0.0
        res = least_squares(
            _residual_vector, [phi_start, b0, t0], args=(U,), method="lm",
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
        )
        phi0, beta, dur = res.x
        # polishing can run off to degenerate T -> 0, |beta| -> inf endpoints
        if not (1e-9 < dur <= t_max + 1e-6) or abs(beta) > 2 * b_max:
            continue
        cand = Su2GeodesicParams(math.remainder(phi0, 2 * math.pi), float(beta), float(dur))
        if np.linalg.norm(cand.endpoint() - U) > 1e-10:
            continue
        if any(_same(cand, other) for other in found):
            continue
        found.append(cand)
    if not found:
        raise GeodesicSolverError(
            "no geodesic found in the scan range",
            {
                "min_abs_f": float(np.min(np.abs(f))),
                "min_abs_g": float(np.min(np.abs(g))),
                "min_combined": float(np.min(np.hypot(f, g))),
                "beta_range": (float(-b_max), float(b_max)),
                "t_max": t_max,
                "seeds": int(len(seeds)),
            },
        )
    found.sort(key=lambda p: (p.duration, p.beta, p.phi0))
    return found


def _same(a: Su2GeodesicParams, b: Su2GeodesicParams, tol: float = 1e-6) -> bool:
    dphi = abs(math.remainder(a.phi0 - b.phi0, 2 * math.pi))
    return dphi < tol and abs(a.beta - b.beta) < tol and abs(a.duration - b.duration) < tol


def d_cc_su2(target) -> float:
    """Carnot-Caratheodory distance from the identity to ``+-target``."""
    U = _check_su2(target)
    if min(np.linalg.norm(U - _I2), np.linalg.norm(U + _I2)) < 1e-12:
        return 0.0
    best = math.inf
    errors = []
    for lift in (U, -U):
        try:
            best = min(best, su2_geodesic_solve(lift)[0].duration)
        except GeodesicSolverError as exc:
            errors.append(exc)
    if math.isinf(best):
        raise errors[0]
    return best


def principal_log(U) -> np.ndarray:
    """Hermitian ``H`` with ``U = exp(i H)`` and eigenvalues in ``(-pi, pi]``.

    Eigenphases at exactly ``pi`` are pulled in by ``1e-9`` (with a warning)
    so the branch stays well defined.
    """
    U = np.asarray(U, dtype=complex)
    # unitary matrices are normal; the Schur form is diagonal
    Tm, Q = schur(U, output="complex")
    phases = np.angle(np.diag(Tm))
    at_pi = np.abs(np.abs(phases) - math.pi) < 1e-9
    if np.any(at_pi):
        warnings.warn("eigenphase at pi; perturbing by 1e-9 to fix the log branch", RuntimeWarning)
        phases = np.where(at_pi, math.pi - 1e-9, phases)
    H = (Q * phases) @ Q.conj().T
    return (H + H.conj().T) / 2


def _central_lifts(U):
    d = U.shape[0]
    return [np.exp(2j * math.pi * k / d) * U for k in range(d)]


def d_infty(target, hull: LieHull, tol: float = 1e-8) -> float:
    """Quasi-distance ``max_b |y_b|**(1/deg b)`` from log coordinates in the hull.

    The coordinates are taken from ``-i log(U)`` in the half-Pauli basis.
    Like the CC distance this is evaluated projectively: the minimum over
    central lifts ``exp(2 pi i k / d) U`` whose principal log is traceless
    and lies in the hull span.
    """
    U = np.asarray(target, dtype=complex)
    n = hull.frame.qubits
    if U.shape != (2**n, 2**n):
        raise ValidationError("target dimension does not match the hull")
    if np.max(np.abs(U.conj().T @ U - np.eye(2**n))) > 1e-10:
        raise ValidationError("target is not unitary")
    best = math.inf
    worst_residual = 0.0
    for lift in _central_lifts(U):
        H = principal_log(lift)
        if abs(np.trace(H)) > tol:
            continue
        coeffs = hs_decompose(H, atol=0.0)
        inside = {p: y for p, y in coeffs.items() if p in hull}
        residual = float(np.max(np.abs(H - hs_reconstruct(inside, n)), initial=0.0))
        if residual > tol:
            worst_residual = max(worst_residual, residual)
            continue
        value = max(
            (abs(y) ** (1.0 / hull.degree(p)) for p, y in inside.items()), default=0.0
        )
        best = min(best, value)
    if math.isinf(best):
        raise ReachabilityError(
            f"target outside reachable subgroup (log residual {worst_residual:.3g})"
        )
    return best


def _d_infty_su2(U) -> float:
    return d_infty(U, lie_hull(su2_frame()))


@dataclass(frozen=True)
class EulerSequence:
    """``V_1 ... V_{L-1} exp(i t P_L / 2) V_{L-1}^+ ... V_1^+`` with ``V_j = exp(i pi/4 P_j)``."""

    conjugators: tuple[PauliTerm, ...]
    core: PauliTerm
    core_angle: float

    @property
    def costed_length(self) -> float:
        return abs(self.core_angle) + math.pi * len(self.conjugators)

    @property
    def free_clifford_length(self) -> float:
        return abs(self.core_angle)

    def unitary(self) -> np.ndarray:
        U = pauli_rotation(self.core, self.core_angle)
        for p in reversed(self.conjugators):
            V = pauli_rotation(p, math.pi / 2)
            U = V @ U @ V.conj().T
        return U

    def to_rotation_sequence(self, frame: GeneratorSet) -> RotationSequence:
        def step(p, angle):
            sign = 1 if p.phase_power == 0 else -1
            return RotationStep(frame.index(p), sign * angle)

        steps = [step(p, math.pi / 2) for p in self.conjugators]
        steps.append(step(self.core, self.core_angle))
        steps += [step(p, -math.pi / 2) for p in reversed(self.conjugators)]
        return RotationSequence(frame, tuple(steps))


def euler_sequence(target_pauli, angle: float, hull: LieHull) -> EulerSequence:
    """Conjugation sequence realising ``exp(i angle P / 2)`` for a hull element ``P``.

    The commutator chain ``P ∝ [g_1, [g_2, ... [g_{L-1}, g_L]]]`` recorded by
    the hull search gives the conjugators ``g_1 .. g_{L-1}`` and the core
    generator ``g_L``; a quarter-turn conjugation by an anticommuting
    generator maps ``Q`` to ``+-[g, Q] / 2i``, and the accumulated sign is
    absorbed into the core angle.
    """
    if isinstance(target_pauli, LieBasisElement):
        target = target_pauli.pauli
    elif isinstance(target_pauli, PauliTerm):
        target = target_pauli
    else:
        target = PauliTerm.parse(target_pauli)
    if not target.is_hermitian:
        raise ValidationError("target Pauli must be Hermitian")
    if target not in hull:
        raise ReachabilityError(f"{target} is not in the Lie hull")
    chain = commutator_chain(hull, target)
    gens = [hull.frame[i].unsigned() for i in chain]
    q = gens[-1]
    for g in reversed(gens[:-1]):
        # V q V^+ = i g q for V = exp(i pi/4 g) and g, q anticommuting
        q = pauli_product(PauliTerm(g.letters, 1), q)
        if not q.is_hermitian:
            raise RuntimeError("conjugation chain left the Hermitian Paulis")
    if q.letters != target.letters:
        raise RuntimeError(f"commutator chain for {target} ends at {q}")
    sign = 1 if q.phase_power == target.phase_power else -1
    return EulerSequence(tuple(gens[:-1]), gens[-1], sign * angle)


@dataclass(frozen=True)
class BallBoxConstants:
    c_lower: float
    c_upper: float
    sample_count: int

    def brackets(self, dcc: float, dinf: float, rtol: float = 1e-12) -> bool:
        return self.c_lower * dinf * (1 - rtol) <= dcc <= self.c_upper * dinf * (1 + rtol)


def ball_box_fit(
    targets: Sequence[np.ndarray],
    hull: LieHull,
    dcc_values: Sequence[float] | None = None,
    min_samples: int = 10,
) -> BallBoxConstants:
    """Tightest ``C1 <= d_CC / d_inf <= C2`` over the given SU(2) targets."""
    if len(targets) < max(min_samples, 1):
        raise ValidationError(f"need at least {max(min_samples, 1)} targets, got {len(targets)}")
    if hull.frame.qubits != 1 or {g.letters for g in hull.frame.generators} != {"X", "Z"}:
        raise ValidationError("CC distances are only available for SU(2) with the {X, Z} frame")
    if dcc_values is not None and len(dcc_values) != len(targets):
        raise ValidationError("dcc_values must align with targets")
    ratios = []
    for k, U in enumerate(targets):
        dinf = d_infty(U, hull)
        if dinf <= 0:
            raise ValidationError("ball-box fit needs targets away from the identity")
        dcc = d_cc_su2(U) if dcc_values is None else float(dcc_values[k])
        ratios.append(dcc / dinf)
    return BallBoxConstants(float(min(ratios)), float(max(ratios)), len(ratios))


def geodesic_samples(params: Su2GeodesicParams, samples: int = 200) -> list[dict]:
    """Rows ``t, c_x, c_z`` and the entries of ``C(t)`` on an even grid."""
    rows = []
    for t in np.linspace(0.0, params.duration, samples):
        cx, cz = params.controls(t)
        rows.append({"t": float(t), "c_x": float(cx), "c_z": float(cz), "C": params.point(t)})
    return rows
