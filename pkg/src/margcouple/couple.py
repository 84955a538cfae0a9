"""Constructing a joint measure with prescribed marginals near a reference.

Given a reference probability coupling, a grid of disjoint product cells
and perturbed marginal probabilities, :func:`construct_preimage` assembles a
new coupling whose marginals are exactly the perturbed ones and whose mass
on every grid cell falls short of the reference by strictly less than the
admissible tolerance, provided the marginals were taken that close to the
reference marginals on the grid's columns and rows.

The construction is in two layers.  Inside each cell the reference mass is
rescaled through the column and row mass ratios; the smaller of the two
rescalings is kept and realized as a product of normalized restrictions, so
it has the right partial masses on both axes.  Whatever marginal mass the
cells did not absorb is coupled in one block by :func:`..measure.couple_mass`
and added on top; the final marginals then match by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import (
    HypothesisError,
    InternalConsistencyError,
    MassMismatchError,
    NegativeWeightError,
    ParameterError,
)
from .measure import Measure, couple_mass, linear_combine, tensor
from .refine import CellIndex, Grid
from .space import ProductSpace, as_rational


@dataclass(frozen=True)
class MarginalPair:
    mu: Measure
    nu: Measure

    def __post_init__(self):
        if self.mu.mass() != self.nu.mass():
            raise MassMismatchError(
                f"marginals carry masses {self.mu.mass()} and {self.nu.mass()}"
            )


def marginal_pair(joint: Measure) -> MarginalPair:
    """Both coordinate pushforwards of a product measure."""
    return MarginalPair(joint.push_proj(1), joint.push_proj(2))


def admissible_delta(eps) -> Fraction:
    """Half the target tolerance; safe for the per-cell shortfall bound."""
    eps = as_rational(eps)
    if eps <= 0:
        raise ParameterError("tolerance must be positive")
    return eps / 2


@dataclass(frozen=True)
class CellAlloc:
    """Mass granted to a cell: reference mass rescaled per axis, minimum kept."""

    col_scaled: Fraction
    row_scaled: Fraction
    kept: Fraction


@dataclass(frozen=True)
class PreimageReport:
    coupling: Measure
    grid_part: Measure
    remainder_coupling: Measure
    cell_allocs: dict  # CellIndex -> CellAlloc
    cell_drops: dict  # CellIndex -> new cell mass minus reference cell mass

    def __post_init__(self):
        if self.grid_part + self.remainder_coupling != self.coupling:
            raise InternalConsistencyError("coupling must split into grid part plus remainder")


def construct_preimage(
    reference: Measure,
    grid: Grid,
    mu: Measure,
    nu: Measure,
    *,
    alpha_rule: Callable[[Fraction, Fraction], Fraction] = min,
) -> PreimageReport:
    """Couple mu and nu while tracking the reference on every grid cell.

    All three measures must be probabilities.  ``alpha_rule`` combines the
    two per-axis rescalings of a cell's reference mass; the default ``min``
    is the only sound choice and the parameter exists so the certifier's
    detection power can be exercised against a deliberately broken rule.
    """
    if not isinstance(reference.space, ProductSpace):
        raise ParameterError("reference must be a product measure")
    for m, label in ((reference, "reference"), (mu, "mu"), (nu, "nu")):
        if m.mass() != 1:
            raise MassMismatchError(f"{label} must be a probability, has mass {m.mass()}")

    ref_cols = [reference.push_proj(1).eval(c) for c in grid.cols]
    ref_rows = [reference.push_proj(2).eval(r) for r in grid.rows]
    new_cols = [mu.eval(c) for c in grid.cols]
    new_rows = [nu.eval(r) for r in grid.rows]

    prod = ProductSpace(mu.space, nu.space)
    grid_part = Measure.zero(prod)
    allocs: dict[CellIndex, CellAlloc] = {}
    ref_cell_mass: dict[CellIndex, Fraction] = {}

    for (q, s), cell in grid.cells():
        ref_mass = reference.eval(cell)
        ref_cell_mass[(q, s)] = ref_mass
        if ref_mass == 0:
            allocs[(q, s)] = CellAlloc(Fraction(0), Fraction(0), Fraction(0))
            continue
        if ref_cols[q] == 0 or ref_rows[s] == 0:
            # impossible: a cell cannot outweigh its own column or row
            raise InternalConsistencyError(
                f"cell ({q}, {s}) has reference mass {ref_mass} on a massless column or row"
            )
        col_scaled = ref_mass * new_cols[q] / ref_cols[q]
        row_scaled = ref_mass * new_rows[s] / ref_rows[s]
        kept = alpha_rule(col_scaled, row_scaled)
        allocs[(q, s)] = CellAlloc(col_scaled, row_scaled, kept)
        if kept == 0:
            continue
        if new_cols[q] == 0 or new_rows[s] == 0:
            raise HypothesisError(
                f"cell ({q}, {s}) was granted mass {kept} from a massless column or row"
            )
        piece = tensor(
            mu.restrict(grid.cols[q]).scale(1 / new_cols[q]),
            nu.restrict(grid.rows[s]).scale(1 / new_rows[s]),
        ).scale(kept)
        grid_part = grid_part + piece

    try:
        mu_rest = linear_combine([(1, mu), (-1, grid_part.push_proj(1))]).to_measure()
        nu_rest = linear_combine([(1, nu), (-1, grid_part.push_proj(2))]).to_measure()
    except NegativeWeightError as exc:
        raise HypothesisError(
            f"cell couplings overdraw a marginal: {exc}"
        ) from exc

    remainder = couple_mass(mu_rest, nu_rest)
    coupling = grid_part + remainder
    drops = {
        ix: coupling.eval(grid.cell(*ix)) - ref_cell_mass[ix]
        for ix in sorted(ref_cell_mass)
    }
    return PreimageReport(coupling, grid_part, remainder, allocs, drops)
