"""Semigroup descriptions: generators, norm, pruning certificate, tail models."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Union

from ..exact import (
    ExactMatrix,
    MaxAbs,
    NormFunctional,
    abs2,
    dominating_permutation,
    is_zero,
    mat_mul,
    mat_sub_identity,
    norm_eval,
    scale_ge_one,
    simplify,
    sqrt_bounds,
)


class CertificateError(RuntimeError):
    """A pruning certificate failed to validate."""


class BudgetExceeded(RuntimeError):
    """The node budget ran out before the search finished."""


# --------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class PermutationDominance:
    """Each generator G has sigma with ``G[i, sigma(i)] * scale >= 1``.

    With nonnegative generators this gives ``||G M|| >= ||M||`` for every
    nonnegative M, so children never have smaller max norm.
    """

    perms: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class DominantEntry:
    """The entry at ``position`` carries the max norm of every element.

    ``margins`` records, per generator, a certified lower bound of
    ``(|G_ii| - sum_{k != i} |G_ik|) * scale``; each must be >= 1 so that
    the dominant entry never shrinks under left multiplication.
    """

    position: tuple[int, int]
    margins: tuple[Fraction, ...] = ()


@dataclass(frozen=True)
class RowMinBound:
    """2x2 nonnegative generators with determinant >= 1.

    Every semigroup element G = [[a, b], [c, d]] then has ``a d >= 1``, so
    ``||G M|| >= max(a ||M_1||, d ||M_2||) >= min(||M_1||, ||M_2||)`` where
    ``M_i`` are the rows of M.  A node whose smaller row norm reaches the
    threshold has no admitted descendants.
    """


@dataclass(frozen=True)
class Envelope:
    """Search with ``search_norm``; the target satisfies ``target >= c1 * search``."""

    search_norm: NormFunctional
    c1: Fraction
    inner: Union[PermutationDominance, DominantEntry]


Certificate = Union[PermutationDominance, DominantEntry, RowMinBound, Envelope]


# --------------------------------------------------------------------------
# tail models for the series along h t^k W


@dataclass(frozen=True)
class Unipotent2:
    """``(A_t - I)^2 = 0`` so ``A_t^k = I + k N`` exactly."""


@dataclass(frozen=True)
class Geometric:
    """Norms along ``h t^k W`` grow at least by ``lam`` per step."""

    lam: Fraction
    validated: bool = False


TailModel = Union[Unipotent2, Geometric]


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GasketSpec:
    """A finitely generated semigroup under study.

    ``action`` optionally lists the matrices used for the projective
    action (defaults to the generators); ``chart`` names the affine chart
    used for orbit clouds.
    """

    name: str
    generators: tuple[ExactMatrix, ...]
    norm: NormFunctional = MaxAbs()
    certificate: Certificate | None = None
    tails: Mapping[tuple[int, int], TailModel] = field(default_factory=dict)
    coefficient: Fraction | None = None
    action: tuple[ExactMatrix, ...] | None = None
    chart: Any = None
    row_dominance: int | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("need at least one generator")
        n = gens[0].n
        if any(g.n != n for g in gens):
            raise ValueError("generators must share a dimension")
        object.__setattr__(self, "generators", gens)
        cert = self.certificate
        if isinstance(cert, Envelope) and cert.c1 <= 0:
            raise ValueError("envelope constant must be positive")

    @property
    def m(self) -> int:
        return len(self.generators)

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def search_norm(self) -> NormFunctional:
        if isinstance(self.certificate, Envelope):
            return self.certificate.search_norm
        return self.norm

    @property
    def single_scale_base(self) -> bool:
        """True when every generator scale shares one base (or is trivial)."""
        bases = {g.scale.base for g in self.generators if not g.scale.is_identity}
        return len(bases) <= 1

    @property
    def unscaled(self) -> bool:
        return all(g.scale.is_identity for g in self.generators)

    def action_matrices(self) -> tuple[ExactMatrix, ...]:
        return self.action if self.action is not None else self.generators

    def word_matrix(self, word) -> ExactMatrix:
        out = ExactMatrix.identity(self.n)
        for j in word:
            out = mat_mul(out, self.generators[j - 1])
        return out


# --------------------------------------------------------------------------
# certificate construction and validation


def _abs_bounds(x) -> tuple[Fraction, Fraction]:
    return sqrt_bounds(abs2(x))


def row_margin(g: ExactMatrix, i: int) -> Fraction:
    """Certified lower bound of ``|g_ii| - sum_{k != i} |g_ik|``."""
    lo, _ = _abs_bounds(g[i, i])
    return lo - sum((_abs_bounds(g[i, k])[1] for k in range(g.n) if k != i), Fraction(0))


def permutation_certificate(gens) -> PermutationDominance | None:
    perms = []
    for g in gens:
        if not g.is_nonnegative():
            return None
        sigma = dominating_permutation(g)
        if sigma is None:
            return None
        low = min(Fraction(simplify(g[i, sigma[i]])) for i in range(g.n))
        if not scale_ge_one(low, g.scale):
            return None
        perms.append(sigma)
    return PermutationDominance(tuple(perms))


def dominant_entry_certificate(gens, position) -> DominantEntry | None:
    i, j = position
    margins = []
    for g in gens:
        mg = row_margin(g, i)
        if not scale_ge_one(mg, g.scale):
            return None
        margins.append(mg)
    return DominantEntry((i, j), tuple(margins))


def validate_certificate(spec: GasketSpec) -> None:
    """Check the generator-level conditions behind the certificate."""
    cert = spec.certificate
    if cert is None:
        raise CertificateError(f"{spec.name}: no pruning certificate")
    inner = cert.inner if isinstance(cert, Envelope) else cert
    search = spec.search_norm
    if not isinstance(search, MaxAbs):
        raise CertificateError("pruning certificates are stated for the max norm")
    if isinstance(inner, PermutationDominance):
        fresh = permutation_certificate(spec.generators)
        if fresh is None:
            raise CertificateError(f"{spec.name}: permutation dominance fails")
        for g, sigma in zip(spec.generators, inner.perms):
            if any(Fraction(simplify(g[i, sigma[i]])) < 1 for i in range(g.n)):
                raise CertificateError(f"{spec.name}: stored permutation is not dominant")
    elif isinstance(inner, DominantEntry):
        if dominant_entry_certificate(spec.generators, inner.position) is None:
            raise CertificateError(f"{spec.name}: dominant-entry margins below one")
        if inner.position[0] != inner.position[1]:
            # the margin argument uses the diagonal entry of the row
            raise CertificateError("dominant entry must sit on the diagonal")
    elif isinstance(inner, RowMinBound):
        if not rowmin_applies(spec.generators):
            raise CertificateError(f"{spec.name}: row-min bound needs 2x2 nonnegative det >= 1")
    else:
        raise CertificateError(f"unknown certificate {inner!r}")
    if isinstance(cert, Envelope):
        ident = ExactMatrix.identity(spec.n)
        if float(norm_eval(spec.norm, ident)) < float(cert.c1) * float(norm_eval(search, ident)):
            raise CertificateError("envelope fails at the identity")


def rowmin_applies(gens) -> bool:
    for g in gens:
        if g.n != 2 or not g.is_nonnegative():
            return False
        det = Fraction(simplify(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]))
        # det(scale * g) = scale^2 det(g)
        if not scale_ge_one(det, g.scale * g.scale):
            return False
    return True


def check_unipotent2(g: ExactMatrix) -> bool:
    """Exact test of ``(g - I)^2 == 0`` (scale must be trivial)."""
    if not g.scale.is_identity:
        return False
    nmat = mat_sub_identity(g)
    return not is_zero(nmat) and is_zero(mat_mul(nmat, nmat))
