"""
TilingForge - Geometry

R-charge constraints, a-maximization, isoradial embeddings, torus periods,
modular reduction of tau and the Klein j-invariant.
"""

import cmath
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from sympy import Matrix, Rational, divisor_sigma

from .core import genus, homology_weights, GenusError
from .models import CombinatorialMap, HomologyWeights, TilingForgeError
from .utils import OptimizerConfig


logger = logging.getLogger(__name__)


class InfeasibleError(TilingForgeError):
    """Raised when the R-charge constraints have no solution."""
    pass


class ConvergenceError(TilingForgeError):
    """Raised when no optimizer run converges."""
    pass


class ConsistencyError(TilingForgeError):
    """Raised when an isoradial embedding does not close up."""
    pass


class PrecisionError(TilingForgeError):
    """Raised when a truncated q-series is not accurate enough."""
    pass


# =============================================================================
# Constraints
# =============================================================================

@dataclass
class RChargeConstraints:
    """Exact linear system A R = c with its solution space."""
    edges: List[str]
    A: Matrix
    c: Matrix
    row_labels: List[str]
    rank: int
    particular: List[Rational]
    nullspace: List[List[Rational]]

    @property
    def dimension(self) -> int:
        """Dimension of the affine solution space."""
        return len(self.nullspace)

    def residual(self, values: np.ndarray) -> float:
        A = np.array(self.A.tolist(), dtype=float)
        c = np.array(self.c.tolist(), dtype=float).ravel()
        return float(np.max(np.abs(A @ values - c))) if A.size else 0.0


def rcharge_constraints(m: CombinatorialMap) -> RChargeConstraints:
    """
    Node and face R-charge equations.

    Each node gives sum R = 2 over its edges and each face gives
    sum R = E_f - 2 over its boundary incidences, with multiplicity.
    The particular solution returned is the minimum-norm one.
    """
    g = genus(m)
    if g != 1:
        raise GenusError(f"Map has genus {g}, expected 1")

    col = {e: j for j, e in enumerate(m.edges)}
    n = m.n_edges
    rows: List[List[int]] = []
    rhs: List[int] = []
    labels: List[str] = []

    for i, cycle in enumerate(m.sigma_black):
        row = [0] * n
        for e in cycle:
            row[col[e]] += 1
        rows.append(row)
        rhs.append(2)
        labels.append(f"black {i}")
    for i, cycle in enumerate(m.sigma_white):
        row = [0] * n
        for e in cycle:
            row[col[e]] += 1
        rows.append(row)
        rhs.append(2)
        labels.append(f"white {i}")
    for i, face in enumerate(m.faces()):
        row = [0] * n
        boundary = m.face_boundary(face)
        for e in boundary:
            row[col[e]] += 1
        rows.append(row)
        rhs.append(len(boundary) - 2)
        labels.append(f"face {i}")

    A = Matrix(rows)
    c = Matrix(rhs)
    try:
        solution, params = A.gauss_jordan_solve(c)
    except ValueError as e:
        raise InfeasibleError("R-charge constraints are inconsistent") from e

    p0 = solution.subs({s: 0 for s in params})
    basis = A.nullspace()
    if basis:
        N = Matrix.hstack(*basis)
        p0 = p0 - N * (N.T * N).inv() * (N.T * p0)

    constraints = RChargeConstraints(
        edges=list(m.edges),
        A=A,
        c=c,
        row_labels=labels,
        rank=A.rank(),
        particular=[Rational(x) for x in p0],
        nullspace=[[Rational(x) for x in v] for v in basis],
    )
    logger.debug(f"R-charge system: {A.rows} rows, rank {constraints.rank}, dimension {constraints.dimension}")
    return constraints


# =============================================================================
# a-maximization
# =============================================================================

@dataclass
class RChargeAssignment:
    """Per-edge R-charges with the achieved value of sum (R - 1)^3."""
    edges: List[str]
    values: List[float]
    objective: float
    converged_runs: int = 0
    total_runs: int = 0
    unique: bool = True
    spread: float = 0.0

    def __getitem__(self, edge: str) -> float:
        return self.values[self.edges.index(edge)]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.edges, self.values))

    @property
    def theta(self) -> Dict[str, float]:
        """Rhombus half-angles pi * R / 2."""
        return {e: math.pi * r / 2 for e, r in zip(self.edges, self.values)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R": {e: r for e, r in zip(self.edges, self.values)},
            "objective": self.objective,
            "converged_runs": self.converged_runs,
            "total_runs": self.total_runs,
            "unique": self.unique,
            "spread": self.spread,
        }


def a_function(values: np.ndarray) -> float:
    """Trial a-function sum (R - 1)^3."""
    return float(np.sum((values - 1.0) ** 3))


class _FeasibleSet:
    """Affine solution space intersected with the box [eps, 2 - eps]."""

    def __init__(self, constraints: RChargeConstraints, eps: float):
        self.p = np.array([float(x) for x in constraints.particular])
        if constraints.nullspace:
            N = np.array([[float(x) for x in v] for v in constraints.nullspace]).T
            self.Q, _ = np.linalg.qr(N)
        else:
            self.Q = np.zeros((len(self.p), 0))
        self.lo, self.hi = eps, 2.0 - eps

    def affine(self, x: np.ndarray) -> np.ndarray:
        return self.p + self.Q @ (self.Q.T @ (x - self.p))

    def project(self, x: np.ndarray, max_rounds: int = 500) -> np.ndarray:
        """Dykstra alternating projection, ending on the affine set."""
        y = self.affine(x)
        box_incr = np.zeros_like(x)
        aff_incr = np.zeros_like(x)
        for _ in range(max_rounds):
            b = np.clip(y + box_incr, self.lo, self.hi)
            box_incr = y + box_incr - b
            y_new = self.affine(b + aff_incr)
            aff_incr = b + aff_incr - y_new
            if np.max(np.abs(y_new - y)) < 1e-15:
                return y_new
            y = y_new
        return y


def _polish(
    feasible: _FeasibleSet,
    x: np.ndarray,
    max_steps: int,
    tolerance: float,
) -> Tuple[np.ndarray, bool, int]:
    """
    Newton steps on the affine subspace while the iterate stays inside the box.

    Only a stationary point where the reduced Hessian is negative
    semidefinite counts as converged.
    """
    Q = feasible.Q
    for step in range(max_steps):
        g = Q.T @ (3.0 * (x - 1.0) ** 2)
        H = Q.T @ (6.0 * (x - 1.0)[:, None] * Q)
        if np.linalg.norm(g) < tolerance:
            # curvature left near a degenerate maximum is O(sqrt(tolerance))
            return x, bool(np.max(np.linalg.eigvalsh(H)) <= 6.0 * math.sqrt(tolerance)), step
        dy = np.linalg.lstsq(H, -g, rcond=None)[0]
        candidate = x + Q @ dy
        if np.any(candidate < feasible.lo) or np.any(candidate > feasible.hi):
            break
        x = candidate
    return x, False, max_steps


def _ascend(
    feasible: _FeasibleSet,
    start: np.ndarray,
    max_iterations: int,
    tolerance: float,
) -> Tuple[np.ndarray, bool, int]:
    """SLSQP in nullspace coordinates, then Newton polishing of the stationary point."""
    p, Q = feasible.p, feasible.Q
    x0 = feasible.project(start)
    if Q.shape[1] == 0:
        inside = bool(np.all(p >= feasible.lo) and np.all(p <= feasible.hi))
        return p.copy(), inside, 0

    def value(y: np.ndarray) -> float:
        return -a_function(p + Q @ y)

    def gradient(y: np.ndarray) -> np.ndarray:
        return -Q.T @ (3.0 * (p + Q @ y - 1.0) ** 2)

    box = [
        {"type": "ineq", "fun": lambda y: p + Q @ y - feasible.lo, "jac": lambda y: Q},
        {"type": "ineq", "fun": lambda y: feasible.hi - p - Q @ y, "jac": lambda y: -Q},
    ]
    result = minimize(
        value,
        Q.T @ (x0 - p),
        jac=gradient,
        method="SLSQP",
        constraints=box,
        options={"maxiter": max_iterations, "ftol": 1e-15},
    )
    x = p + Q @ result.x
    x, converged, steps = _polish(feasible, x, min(max_iterations, 100), tolerance)
    return x, converged, int(result.nit) + steps


def maximize_a(
    m: CombinatorialMap,
    options: Optional[OptimizerConfig] = None,
) -> RChargeAssignment:
    """
    Maximize sum (R - 1)^3 over the R-charge constraints.

    Runs SLSQP from several pseudo-random starts and polishes each run with
    Newton steps on the constraint subspace. The best stationary point is
    returned. If converged runs disagree by more than the uniqueness
    tolerance the result is flagged as not unique.
    """
    options = options or OptimizerConfig()
    constraints = rcharge_constraints(m)
    feasible = _FeasibleSet(constraints, options.box_epsilon)
    rng = np.random.default_rng(options.seed)

    runs: List[np.ndarray] = []
    for k in range(options.starts):
        start = rng.uniform(feasible.lo, feasible.hi, size=m.n_edges)
        x, converged, iterations = _ascend(feasible, start, options.max_iterations, options.gradient_tolerance)
        logger.debug(f"Start {k}: converged={converged} after {iterations} iterations, a={a_function(x):.12f}")
        if converged:
            runs.append(x)

    if not runs:
        raise ConvergenceError(
            f"No run out of {options.starts} reached gradient norm "
            f"{options.gradient_tolerance} within {options.max_iterations} iterations"
        )

    best_value = max(a_function(x) for x in runs)
    ties = [x for x in runs if a_function(x) >= best_value - 1e-12]
    best = min(ties, key=lambda x: tuple(x.tolist()))
    spread = max(float(np.max(np.abs(x - best))) for x in runs)
    unique = spread <= options.uniqueness_tolerance
    if not unique:
        logger.warning(f"a-maximization runs disagree by {spread:.3e}; maximum may not be unique")

    residual = constraints.residual(best)
    if residual > 1e-9:
        raise ConvergenceError(f"Constraint residual {residual:.3e} exceeds 1e-9")

    logger.info(f"a-maximization: a = {a_function(best):.10f} from {len(runs)}/{options.starts} converged runs")
    return RChargeAssignment(
        edges=list(m.edges),
        values=[float(v) for v in best],
        objective=a_function(best),
        converged_runs=len(runs),
        total_runs=options.starts,
        unique=unique,
        spread=spread,
    )


# =============================================================================
# Isoradial embedding
# =============================================================================

RCharges = Union[RChargeAssignment, Dict[str, float]]


def _as_dict(R: RCharges) -> Dict[str, float]:
    return R.as_dict() if isinstance(R, RChargeAssignment) else {k: float(v) for k, v in R.items()}


def angle_defects(m: CombinatorialMap, R: RCharges) -> Dict[str, float]:
    """Largest deviation from 2*pi of rhombus angle sums at nodes and face centres."""
    r = _as_dict(R)
    node_defect = 0.0
    for cycle in list(m.sigma_black) + list(m.sigma_white):
        node_defect = max(node_defect, abs(math.pi * sum(r[e] for e in cycle) - 2 * math.pi))
    face_defect = 0.0
    for face in m.faces():
        total = sum(math.pi - math.pi * r[e] for e in m.face_boundary(face))
        face_defect = max(face_defect, abs(total - 2 * math.pi))
    return {"nodes": node_defect, "faces": face_defect}


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def edge_directions(m: CombinatorialMap, R: RCharges, tolerance: float = 1e-6) -> Dict[str, float]:
    """
    Directions of edge vectors from black to white nodes.

    Rotating clockwise past the rhombi of e and of the next edge turns the
    direction by theta_e + theta_next, around both black and white nodes.
    """
    theta = {e: math.pi * v / 2 for e, v in _as_dict(R).items()}
    alpha: Dict[str, float] = {m.edges[0]: 0.0}
    queue = deque([m.edges[0]])
    while queue:
        e = queue.popleft()
        for nxt, value in (
            (m.sb(e), alpha[e] - theta[e] - theta[m.sb(e)]),
            (m.sw(e), alpha[e] - theta[e] - theta[m.sw(e)]),
            (m.sb_inv(e), alpha[e] + theta[e] + theta[m.sb_inv(e)]),
            (m.sw_inv(e), alpha[e] + theta[e] + theta[m.sw_inv(e)]),
        ):
            if nxt not in alpha:
                alpha[nxt] = value
                queue.append(nxt)
            elif abs(_wrap(alpha[nxt] - value)) > tolerance:
                raise ConsistencyError(
                    f"Angle propagation does not close at edge {nxt} "
                    f"(off by {abs(_wrap(alpha[nxt] - value)):.3e})"
                )
    return alpha


def isoradial_periods(
    m: CombinatorialMap,
    R: RCharges,
    weights: Optional[HomologyWeights] = None,
    tolerance: float = 1e-6,
) -> Tuple[complex, complex]:
    """
    Period vectors of the isoradial embedding along the homology basis.

    Edge vectors 2 cos(theta_e) exp(i alpha_e) are split into node
    position differences plus h_z * omega1 + h_w * omega2 by least squares.
    """
    defects = angle_defects(m, R)
    if max(defects.values()) > tolerance:
        raise ConsistencyError(f"R-charges violate the angle sums: {defects}")

    r = _as_dict(R)
    weights = weights or homology_weights(m)
    alpha = edge_directions(m, R, tolerance)

    n_black, n_white = m.n_black, m.n_white
    n_unknowns = n_black + n_white + 2
    A = np.zeros((m.n_edges + 1, n_unknowns))
    b = np.zeros(m.n_edges + 1, dtype=complex)
    for k, e in enumerate(m.edges):
        A[k, m.black_node(e)] -= 1.0
        A[k, n_black + m.white_node(e)] += 1.0
        A[k, -2], A[k, -1] = weights[e]
        b[k] = 2.0 * math.cos(math.pi * r[e] / 2) * cmath.exp(1j * alpha[e])
    A[-1, 0] = 1.0  # pin the first black node at the origin

    solution, *_ = np.linalg.lstsq(A.astype(complex), b, rcond=None)
    residual = float(np.max(np.abs(A @ solution - b)))
    if residual > tolerance:
        raise ConsistencyError(f"Embedding does not close up (residual {residual:.3e})")

    omega1, omega2 = complex(solution[-2]), complex(solution[-1])
    if abs(omega1) < tolerance or abs(omega2) < tolerance:
        raise ConsistencyError("Degenerate period lattice")
    if (omega2 / omega1).imag < 0:
        omega1, omega2 = omega2, omega1
    return omega1, omega2


# =============================================================================
# Modular data
# =============================================================================

def tau_reduce(tau: complex, max_steps: int = 10000) -> complex:
    """Move tau into the standard fundamental domain by T and S steps."""
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half-plane, got {tau}")
    for _ in range(max_steps):
        tau = tau - math.floor(tau.real + 0.5)
        if abs(tau) < 1 - 1e-12:
            tau = -1 / tau
        else:
            break
    return tau


@lru_cache(maxsize=None)
def _sigma_table(k: int, terms: int) -> Tuple[int, ...]:
    return tuple(int(divisor_sigma(n, k)) for n in range(1, terms + 1))


def eisenstein_e4_e6(tau: complex, terms: int = 64) -> Tuple[complex, complex]:
    """Truncated q-expansions of E4 and E6."""
    q = cmath.exp(2j * math.pi * tau)
    powers = q ** np.arange(1, terms + 1)
    e4 = 1 + 240 * complex(np.dot(_sigma_table(3, terms), powers))
    e6 = 1 - 504 * complex(np.dot(_sigma_table(5, terms), powers))
    return e4, e6


def _tail_bound(tau: complex, terms: int) -> float:
    """Bound on the neglected E6 terms (the larger of the two tails)."""
    aq = abs(cmath.exp(2j * math.pi * tau))
    n = terms + 1
    ratio = aq * ((n + 1) / n) ** 5
    if ratio >= 1:
        return math.inf
    # sigma_5(n) <= zeta(5) n^5 < 1.04 n^5
    return 504 * 1.04 * n ** 5 * aq ** n / (1 - ratio)


def klein_j(tau: complex, terms: int = 64) -> Tuple[complex, complex]:
    """
    Klein invariant j (j(i) = 1728) and J = j / 1728.

    tau is reduced to the fundamental domain before the q-series are summed.
    """
    reduced = tau_reduce(tau)
    bound = _tail_bound(reduced, terms)
    if bound > 1e-10:
        raise PrecisionError(f"q-series tail bound {bound:.3e} exceeds 1e-10")
    e4, e6 = eisenstein_e4_e6(reduced, terms)
    j = 1728 * e4 ** 3 / (e4 ** 3 - e6 ** 2)
    return j, j / 1728


@dataclass
class ModularData:
    """Periods, complex structure and j-invariant of the embedded torus."""
    omega1: complex
    omega2: complex
    tau: complex
    tau_reduced: complex
    j: complex
    J: complex

    def to_dict(self) -> Dict[str, Any]:
        def c(z: complex) -> List[float]:
            return [z.real, z.imag]
        return {
            "omega1": c(self.omega1),
            "omega2": c(self.omega2),
            "tau": c(self.tau),
            "tau_reduced": c(self.tau_reduced),
            "j": c(self.j),
            "J": c(self.J),
        }


def modular_data(
    m: CombinatorialMap,
    R: RCharges,
    weights: Optional[HomologyWeights] = None,
    terms: int = 64,
) -> ModularData:
    """Periods, tau and Klein invariants of the isoradial embedding."""
    omega1, omega2 = isoradial_periods(m, R, weights)
    tau = omega2 / omega1
    reduced = tau_reduce(tau)
    j, J = klein_j(reduced, terms)
    logger.info(f"tau = {reduced.real:.10g} + {reduced.imag:.10g}i, J = {J.real:.10g}")
    return ModularData(omega1=omega1, omega2=omega2, tau=tau, tau_reduced=reduced, j=j, J=J)
