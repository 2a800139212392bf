"""Counterfactual couplings of (Alice outcome, b, b') for one Alice setting.

A coupling is an 8-point pmf over (i, j, j') in {+1,-1}^3 with uniform
one-variable marginals and prescribed correlations E[ij] and E[ij'].  The
correlation between j and j' is not fixed by the box; its feasible range,
and hence the feasible range of Var(b +/- b'), is what the extremal-coupling
LP computes.  The LP is solved exactly: the feasible set is a polytope of
dimension two, so enumerating basic feasible solutions in rational
arithmetic is cheap and leaves no solver tolerance to argue about.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .boxes import A, A_PRIME, Party, Setting

CORR_TOL = 1e-9

# Flat cell order: index = 4*bi + 2*bj + bk with bit 0 meaning outcome +1,
# i.e. (i, j, j') runs lexicographically with +1 before -1.
I_VALUES = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float)
J_VALUES = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=float)
JP_VALUES = np.array([1, -1, 1, -1, 1, -1, 1, -1], dtype=float)
DISAGREE = (J_VALUES != JP_VALUES).astype(float)


class CouplingObjective(enum.Enum):
    MIN_DISAGREE = "min_disagree"
    MAX_DISAGREE = "max_disagree"


class Combination(enum.Enum):
    SUM = "sum"
    DIFFERENCE = "difference"


class CouplingInfeasibleError(ValueError):
    """No pmf satisfies the requested marginal/correlation constraints."""


class TripleCoupling:
    """Joint pmf over (i, j, j') as a (2, 2, 2) array; index 0 is outcome +1.

    Construction only fixes shape and finiteness so that defective couplings
    can be built and fed to `validate_coupling`.
    """

    __slots__ = ("alice_setting", "pmf")

    def __init__(self, alice_setting: Setting, pmf: np.ndarray) -> None:
        if alice_setting.party is not Party.ALICE:
            raise ValueError(f"coupling needs an Alice setting, got {alice_setting.label}")
        arr = np.asarray(pmf, dtype=float)
        if arr.shape != (2, 2, 2):
            raise ValueError(f"pmf must have shape (2, 2, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pmf entries must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "alice_setting", alice_setting)
        object.__setattr__(self, "pmf", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TripleCoupling is immutable")

    @property
    def flat(self) -> np.ndarray:
        return self.pmf.reshape(8)

    def expectation(self, values: np.ndarray) -> float:
        return float(self.flat @ values)

    def pair_marginal(self) -> np.ndarray:
        """The (j, j') marginal as a (2, 2) array (index 0 is +1)."""
        return self.pmf.sum(axis=0)


@dataclass(frozen=True)
class CouplingBounds:
    """Feasible extremes of P(b != b') and Var(b + b') for given targets."""

    min_disagree: float
    max_disagree: float
    min_var_sum: float
    max_var_sum: float


@dataclass(frozen=True)
class CouplingValidation:
    ok: bool
    tol: float
    residuals: dict[str, float]


# ---------------------------------------------------------------------------
# Exact LP over basic feasible solutions
# ---------------------------------------------------------------------------

# Constraint rows (all coefficients are +/-1 or 1): total mass, three uniform
# marginals, two target correlations.
_CONSTRAINT_ROWS = (
    np.ones(8),
    I_VALUES,
    J_VALUES,
    JP_VALUES,
    I_VALUES * J_VALUES,
    I_VALUES * JP_VALUES,
)
_CONSTRAINT_NAMES = (
    "normalization",
    "marginal_i",
    "marginal_j",
    "marginal_jp",
    "corr_ij",
    "corr_ijp",
)


def _solve_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gaussian elimination over the rationals; None for a singular system."""
    n = len(rhs)
    aug = [row[:] + [rhs[r]] for r, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1, 1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def _check_targets(c_xb: float, c_xbp: float) -> None:
    for name, c in (("c_xb", c_xb), ("c_xbp", c_xbp)):
        if not math.isfinite(c) or abs(c) > 1.0:
            raise ValueError(f"target correlation {name} must lie in [-1, 1], got {c!r}")


def _enumerate_optima(c_xb: float, c_xbp: float) -> tuple[
    tuple[Fraction, tuple[Fraction, ...]], tuple[Fraction, tuple[Fraction, ...]]
]:
    """Exact (min, max) of P(j != j') with the achieving basic solutions."""
    rhs_full = [
        Fraction(1),
        Fraction(0),
        Fraction(0),
        Fraction(0),
        Fraction(c_xb),
        Fraction(c_xbp),
    ]
    rows = [[Fraction(int(v)) for v in row] for row in _CONSTRAINT_ROWS]
    objective = [Fraction(int(v)) for v in DISAGREE]

    best_min = best_max = None
    for basis in combinations(range(8), 6):
        matrix = [[rows[r][c] for c in basis] for r in range(6)]
        solution = _solve_exact(matrix, rhs_full)
        if solution is None or any(v < 0 for v in solution):
            continue
        full = [Fraction(0)] * 8
        for c, v in zip(basis, solution):
            full[c] = v
        value = sum(o * v for o, v in zip(objective, full))
        if best_min is None or value < best_min[0]:
            best_min = (value, tuple(full))
        if best_max is None or value > best_max[0]:
            best_max = (value, tuple(full))
    if best_min is None:
        raise CouplingInfeasibleError(
            "no pmf satisfies "
            + ", ".join(f"{n}={float(v)}" for n, v in zip(_CONSTRAINT_NAMES, rhs_full))
        )
    return best_min, best_max


def extremal_coupling(
    c_xb: float,
    c_xbp: float,
    objective: CouplingObjective,
    alice_setting: Setting = A,
) -> TripleCoupling:
    """Coupling achieving the exact optimum of P(b != b') for the targets.

    Feasibility always holds for |targets| <= 1 because the product coupling
    (1 + ij*c_xb)(1 + ij'*c_xbp)/8 satisfies every constraint.
    """
    _check_targets(c_xb, c_xbp)
    best_min, best_max = _enumerate_optima(c_xb, c_xbp)
    chosen = best_min if objective is CouplingObjective.MIN_DISAGREE else best_max
    pmf = np.array([float(v) for v in chosen[1]]).reshape(2, 2, 2)
    return TripleCoupling(alice_setting, pmf)


def coupling_bounds(c_xb: float, c_xbp: float) -> CouplingBounds:
    """Closed-form extremes, cross-checked against the LP by the test suite.

    With uniform marginals, conditioning on i reduces the question to two
    Bernoulli pairs, giving P(b != b') in [|c1 - c2|/2, 1 - |c1 + c2|/2];
    Var(b + b') = 4 P(b = b') then maps the same interval.
    """
    _check_targets(c_xb, c_xbp)
    min_disagree = abs(c_xb - c_xbp) / 2.0
    max_disagree = 1.0 - abs(c_xb + c_xbp) / 2.0
    return CouplingBounds(
        min_disagree=min_disagree,
        max_disagree=max_disagree,
        min_var_sum=4.0 * (1.0 - max_disagree),
        max_var_sum=4.0 * (1.0 - min_disagree),
    )


def make_scalar_extremal_couplings(c: float) -> tuple[TripleCoupling, TripleCoupling]:
    """The coupling pair of the scalar-addition argument for the tilted family.

    Under a (targets C, C): maximal disagreement, so Var(b + b') is minimal;
    under a' (targets C, -C): maximal agreement, so Var(b + b') is maximal.
    If even these extremes cannot match the two variances, the strategies
    remain statistically distinguishable.
    """
    if not math.isfinite(c) or not 0.0 <= c <= 1.0:
        raise ValueError(f"correlation strength must lie in [0, 1], got {c!r}")
    under_a = extremal_coupling(c, c, CouplingObjective.MAX_DISAGREE, alice_setting=A)
    under_ap = extremal_coupling(c, -c, CouplingObjective.MIN_DISAGREE, alice_setting=A_PRIME)
    return under_a, under_ap


def validate_coupling(
    coupling: TripleCoupling, targets: tuple[float, float], tol: float = CORR_TOL
) -> CouplingValidation:
    """Check normalization, nonnegativity, uniform marginals and target correlations.

    Every constraint's absolute residual is reported; ok means all within tol.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    flat = coupling.flat
    residuals = {
        "normalization": abs(float(flat.sum()) - 1.0),
        "nonnegativity": max(0.0, float(-flat.min())),
        "marginal_i": abs(coupling.expectation(I_VALUES)) / 2.0,
        "marginal_j": abs(coupling.expectation(J_VALUES)) / 2.0,
        "marginal_jp": abs(coupling.expectation(JP_VALUES)) / 2.0,
        "corr_ij": abs(coupling.expectation(I_VALUES * J_VALUES) - targets[0]),
        "corr_ijp": abs(coupling.expectation(I_VALUES * JP_VALUES) - targets[1]),
    }
    return CouplingValidation(
        ok=all(r <= tol for r in residuals.values()), tol=tol, residuals=residuals
    )


def per_pair_variance(coupling: TripleCoupling, combination: Combination) -> float:
    """Var(b + b') or Var(b - b') under the coupling, with scalar +/-1 values."""
    sign = 1.0 if combination is Combination.SUM else -1.0
    values = J_VALUES + sign * JP_VALUES
    mean = coupling.expectation(values)
    return coupling.expectation(values**2) - mean**2


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_SETTING_LABELS = {"a": A, "a'": A_PRIME}


def coupling_to_json(coupling: TripleCoupling) -> dict:
    """JSON form: Alice setting label plus the 8 probabilities in cell order
    (i, j, j') lexicographic with +1 before -1."""
    return {
        "alice_setting": coupling.alice_setting.label,
        "pmf": coupling.flat.tolist(),
    }


def coupling_from_json(data: dict) -> TripleCoupling:
    label = data.get("alice_setting")
    if label not in _SETTING_LABELS:
        raise ValueError(f"alice_setting must be 'a' or \"a'\", got {label!r}")
    pmf = np.array(data["pmf"], dtype=float)
    if pmf.shape != (8,):
        raise ValueError(f"pmf must have 8 entries, got shape {pmf.shape}")
    return TripleCoupling(_SETTING_LABELS[label], pmf.reshape(2, 2, 2))


def pr_limit_couplings() -> tuple[TripleCoupling, TripleCoupling]:
    """Scalar extremal couplings at C = 1: b = b' = a under a, b = -b' = a' under a'."""
    return make_scalar_extremal_couplings(1.0)
