"""
TilingForge - Amoeba Sampling

Samples the curve P(z, w) = 0 fiber by fiber and projects the points to
the amoeba (log|z|, log|w|) and the coamoeba (arg z, arg w).
"""

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .laurent import Exponent, LaurentPoly2
from .models import TilingForgeError


logger = logging.getLogger(__name__)

CSV_HEADER = ["rho_z", "rho_w", "phi_z", "phi_w", "residual"]
COAMOEBA_HEADER = ["phi_z", "phi_w", "residual"]

# Fiber coefficients below this fraction of the fiber's scale count as zero.
_ZERO_COEFF = 1e-12


class DegenerateError(TilingForgeError):
    """Raised when the curve is empty (P is a monomial)."""
    pass


@dataclass
class GridSpec:
    """Fiber grid z = exp(rho + i phi), rho in [-L, L], phi in [0, 2 pi)."""
    range: float = 4.0
    rho_points: int = 200
    phi_points: int = 200

    def z_values(self) -> np.ndarray:
        rho = np.linspace(-self.range, self.range, self.rho_points)
        phi = 2 * np.pi * np.arange(self.phi_points) / self.phi_points
        return np.exp(rho[:, None] + 1j * phi[None, :]).ravel()


@dataclass
class CurveSamples:
    """Sampled curve points, one row (rho_z, rho_w, phi_z, phi_w, residual) each."""
    records: np.ndarray = field(default_factory=lambda: np.zeros((0, 5)))
    fibers: int = 0
    skipped_fibers: int = 0
    dropped_points: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def amoeba(self) -> np.ndarray:
        return self.records[:, 0:2]

    @property
    def coamoeba(self) -> np.ndarray:
        return self.records[:, 2:4]

    @property
    def max_residual(self) -> float:
        return float(self.records[:, 4].max()) if len(self.records) else 0.0

    def canonical(self) -> "CurveSamples":
        """Copy with rows sorted by (rho_z, phi_z, rho_w, phi_w)."""
        r = self.records
        order = np.lexsort((r[:, 3], r[:, 1], r[:, 2], r[:, 0])) if len(r) else np.arange(0)
        return CurveSamples(r[order], self.fibers, self.skipped_fibers, self.dropped_points)

    def merged(self, other: "CurveSamples") -> "CurveSamples":
        return CurveSamples(
            records=np.vstack([self.records, other.records]),
            fibers=self.fibers + other.fibers,
            skipped_fibers=self.skipped_fibers + other.skipped_fibers,
            dropped_points=self.dropped_points + other.dropped_points,
        ).canonical()

    def swapped(self) -> "CurveSamples":
        """Exchange the roles of z and w in every record."""
        return CurveSamples(self.records[:, [1, 0, 3, 2, 4]], self.fibers, self.skipped_fibers, self.dropped_points)

    def write_csv(self, path: str) -> Path:
        """Write all records with the rho_z,rho_w,phi_z,phi_w,residual header."""
        return self._write(path, CSV_HEADER, self.records)

    def write_coamoeba_csv(self, path: str) -> Path:
        return self._write(path, COAMOEBA_HEADER, self.records[:, 2:5])

    @staticmethod
    def _write(path: str, header: List[str], rows: np.ndarray) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([f"{v:.12g}" for v in row])
        return out

    def to_dict(self) -> Dict[str, float]:
        return {
            "points": len(self),
            "fibers": self.fibers,
            "skipped_fibers": self.skipped_fibers,
            "dropped_points": self.dropped_points,
            "max_residual": self.max_residual,
        }


# =============================================================================
# Root finding
# =============================================================================

def _horner(coeffs: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of polynomials (highest degree first) at x, batched over rows."""
    p = np.broadcast_to(coeffs[:, :1], x.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(1, coeffs.shape[1]):
        dp = dp * x + p
        p = p * x + coeffs[:, k : k + 1]
    return p, dp


def batch_roots(coeffs: np.ndarray, iterations: int = 50, tolerance: float = 1e-12) -> np.ndarray:
    """
    All roots of a batch of polynomials of equal degree.

    coeffs has shape (k, n + 1), highest degree first, with nonzero leading
    and constant terms. Companion-matrix eigenvalues give the starting
    points and simultaneous Aberth steps polish them.
    """
    k, n1 = coeffs.shape
    n = n1 - 1
    monic = coeffs / coeffs[:, :1]
    companion = np.zeros((k, n, n), dtype=complex)
    companion[:, 0, :] = -monic[:, 1:]
    if n > 1:
        idx = np.arange(n - 1)
        companion[:, idx + 1, idx] = 1.0
    x = np.linalg.eigvals(companion)

    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(iterations):
            p, dp = _horner(monic, x)
            diff = x[:, :, None] - x[:, None, :]
            idx = np.arange(n)
            diff[:, idx, idx] = np.inf
            repulsion = np.sum(1.0 / diff, axis=2)
            delta = p / (dp - p * repulsion)
            delta = np.where(np.isfinite(delta), delta, 0.0)
            x = x - delta
            if np.all(np.abs(delta) <= tolerance * np.maximum(1.0, np.abs(x))):
                break
    return x


def _fiber_polynomial(P: LaurentPoly2, z: complex, overrides: Dict[Exponent, complex]) -> np.ndarray:
    """Coefficients in w (lowest degree first) of w^-bmin * P(z, w)."""
    bmin = min(b for _, b in P.support())
    bmax = max(b for _, b in P.support())
    coeffs = np.zeros(bmax - bmin + 1, dtype=complex)
    for (a, b), c in P.items():
        coeffs[b - bmin] += complex(overrides.get((a, b), c)) * z ** a
    return coeffs


def _relative_residual(
    P: LaurentPoly2,
    z: np.ndarray,
    w: np.ndarray,
    overrides: Dict[Exponent, complex],
) -> np.ndarray:
    total = np.zeros_like(z)
    scale = np.zeros(z.shape)
    for (a, b), c in P.items():
        term = complex(overrides.get((a, b), c)) * z ** a * w ** b
        total = total + term
        scale = np.maximum(scale, np.abs(term))
    return np.abs(total) / np.where(scale > 0, scale, 1.0)


def sample_fibers(
    P: LaurentPoly2,
    z_values: Sequence[complex],
    overrides: Optional[Dict[Exponent, complex]] = None,
    residual_tolerance: float = 1e-8,
) -> CurveSamples:
    """
    Solve P(z, w) = 0 for w over each given z.

    Fibers whose polynomial vanishes identically or reduces to a single
    monomial in w have no nonzero roots; they are skipped and counted.
    Roots w = 0 are discarded, as are points above the residual tolerance.
    """
    if P.is_zero() or P.is_monomial():
        raise DegenerateError("Curve of a monomial is empty")
    overrides = overrides or {}
    z_values = np.asarray(z_values, dtype=complex).ravel()

    groups: Dict[int, List[Tuple[complex, np.ndarray]]] = defaultdict(list)
    skipped = 0
    for z in z_values:
        coeffs = _fiber_polynomial(P, z, overrides)
        scale = max(abs(complex(overrides.get((a, b), c))) * abs(z) ** a for (a, b), c in P.items())
        nonzero = np.nonzero(np.abs(coeffs) > _ZERO_COEFF * scale)[0]
        if len(nonzero) == 0:
            skipped += 1
            logger.debug(f"Fiber z={z:.6g} vanishes identically; skipped")
            continue
        # dropping low-order zeros removes the roots w = 0
        trimmed = coeffs[nonzero[0] : nonzero[-1] + 1]
        if len(trimmed) < 2:
            skipped += 1
            logger.debug(f"Fiber z={z:.6g} is a single monomial in w; skipped")
            continue
        groups[len(trimmed) - 1].append((z, trimmed[::-1]))

    rows = []
    dropped = 0
    for degree in sorted(groups):
        zs = np.array([z for z, _ in groups[degree]])
        coeffs = np.array([c for _, c in groups[degree]])
        w = batch_roots(coeffs)
        z_grid = np.broadcast_to(zs[:, None], w.shape)
        keep = np.abs(w) > 0
        residual = _relative_residual(P, z_grid, w, overrides)
        good = keep & (residual < residual_tolerance)
        dropped += int(np.sum(keep & ~good))
        zg, wg, rg = z_grid[good], w[good], residual[good]
        rows.append(np.column_stack([
            np.log(np.abs(zg)),
            np.log(np.abs(wg)),
            np.mod(np.angle(zg), 2 * np.pi),
            np.mod(np.angle(wg), 2 * np.pi),
            rg,
        ]))

    if skipped:
        logger.warning(f"Skipped {skipped} fiber(s) without nonzero roots")
    if dropped:
        logger.warning(f"Dropped {dropped} root(s) above residual tolerance {residual_tolerance}")

    records = np.vstack(rows) if rows else np.zeros((0, 5))
    return CurveSamples(records, fibers=len(z_values), skipped_fibers=skipped, dropped_points=dropped).canonical()


def sample_curve(
    P: LaurentPoly2,
    grid: Optional[GridSpec] = None,
    overrides: Optional[Dict[Exponent, complex]] = None,
    residual_tolerance: float = 1e-8,
) -> CurveSamples:
    """Sample w-fibers over the z grid, then z-fibers over the same grid in w, and merge."""
    grid = grid or GridSpec()
    if P.is_zero() or P.is_monomial():
        raise DegenerateError("Curve of a monomial is empty")
    overrides = overrides or {}
    z_values = grid.z_values()

    forward = sample_fibers(P, z_values, overrides, residual_tolerance)
    swapped_overrides = {(b, a): c for (a, b), c in overrides.items()}
    backward = sample_fibers(P.swap_variables(), z_values, swapped_overrides, residual_tolerance).swapped()
    samples = forward.merged(backward)
    logger.info(
        f"Sampled {len(samples)} curve points from {samples.fibers} fibers "
        f"({samples.skipped_fibers} skipped)"
    )
    return samples


def parse_overrides(items: Sequence[str]) -> Dict[Exponent, complex]:
    """Parse "a,b=value" coefficient overrides, value in Python complex syntax."""
    result: Dict[Exponent, complex] = {}
    for item in items:
        try:
            key, value = item.split("=", 1)
            a, b = (int(x) for x in key.split(","))
            result[(a, b)] = complex(value.replace(" ", "").replace("i", "j"))
        except ValueError as e:
            raise ValueError(f"Invalid coefficient override {item!r}, expected a,b=value") from e
    return result


def unit_overrides(P: LaurentPoly2, seed: int = 0) -> Dict[Exponent, complex]:
    """Signed coefficients scaled onto the unit circle with seeded random phases."""
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * math.pi, size=len(P))
    return {key: complex(np.sign(c) * np.exp(1j * t)) for (key, c), t in zip(P.items(), phases)}
