"""Sufficient test that a system is patchworked.

For every generator ``zeta`` of the dual mixed cell cone of the
log-coefficient lifting, require

    <Log|C|, zeta>  >  ||zeta||_1 * ln|A|

where ``|A|`` is the number of points of the Cayley configuration.  When all
hold, real polyhedral homotopy paths from the real binomial roots reach
every real torus root of the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .binomial import count_binomial_real, generate_binomials
from .mixed_cells import (
    DEFAULT_SCALE,
    DualConeGenerator,
    dual_cone_generators,
    enumerate_mixed_cells,
    integerize,
)
from .poly_core import SparseSystem, log_lifting

# slack within this multiple of ||zeta||_1 counts as failure
SLACK_GUARD = 1e-9


@dataclass(frozen=True)
class Margin:
    pairing: float
    bound: float
    slack: float

    def to_list(self) -> list[float]:
        return [self.pairing, self.bound, self.slack]


@dataclass
class PatchworkCertificate:
    certified: bool
    margins: list[Margin] = field(default_factory=list)
    generators: list[DualConeGenerator] = field(default_factory=list)
    real_root_count: int | None = None

    def __iter__(self):
        # (flag,) or (flag, count), mirroring the printed form
        if self.real_root_count is None:
            return iter((int(self.certified),))
        return iter((int(self.certified), self.real_root_count))

    def to_dict(self) -> dict:
        out = {
            "certified": self.certified,
            "margins": [m.to_list() for m in self.margins],
        }
        if self.real_root_count is not None:
            out["real_root_count"] = self.real_root_count
        return out


def evaluate_margins(
    generators: Sequence[Sequence[int]], lifting_flat: Sequence[float], n_points: int
) -> list[Margin]:
    log_a = math.log(n_points)
    out = []
    for zeta in generators:
        pairing = math.fsum(z * v for z, v in zip(zeta, lifting_flat))
        bound = sum(abs(z) for z in zeta) * log_a
        out.append(Margin(pairing, bound, pairing - bound))
    return out


def margins_pass(margins: Sequence[Margin], generators: Sequence[Sequence[int]]) -> bool:
    return all(
        m.slack > SLACK_GUARD * sum(abs(z) for z in zeta)
        for m, zeta in zip(margins, generators)
    )


def certify_patchwork(
    F: SparseSystem, count_real: bool = False, scale: float = DEFAULT_SCALE
) -> PatchworkCertificate:
    w = log_lifting(F)
    w_int = integerize(w, scale)
    cells = enumerate_mixed_cells(F, w_int)
    gens = dual_cone_generators(F, cells, w_int)
    zetas = [g.zeta for g in gens]
    margins = evaluate_margins(zetas, w.flat(), F.n_terms)
    ok = margins_pass(margins, zetas)
    count = None
    if count_real and ok:
        count = sum(count_binomial_real(B) for B in generate_binomials(F, scale))
    return PatchworkCertificate(ok, margins, gens, count)
