"""Oracle-versus-spectral agreement checks shared by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .spectral import (
    RealField,
    commutator_force,
    frac_constant,
    frac_constant_quadrature,
    fractional_laplacian,
    make_grid,
)

DEFAULT_ALPHAS = (0.25, 0.5, 0.75, 1.0, 1.5)


@dataclass(frozen=True)
class CheckRow:
    name: str
    alpha: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tol)


def operator_checks(alphas=DEFAULT_ALPHAS, n: int = 256, tol: float = 1e-6) -> list[CheckRow]:
    grid = make_grid(n)
    x = grid.nodes
    f = RealField(np.exp(np.cos(x)), grid)
    rho = RealField(1.0 + 0.5 * np.cos(x), grid)
    u = RealField(np.sin(x), grid)
    rows = []
    for a in alphas:
        c = frac_constant(a)
        rows.append(CheckRow("C(alpha) closed form vs quadrature", a,
                             abs(frac_constant_quadrature(a) / c - 1.0), 1e-10))
        lap = np.max(np.abs(fractional_laplacian(f, a).samples - oracle.quad_fractional_laplacian(f, a)))
        rows.append(CheckRow("Lambda^alpha exp(cos x)", a, float(lap), tol))
        com = np.max(np.abs(commutator_force(rho, u, a).samples - oracle.quad_commutator(rho, u, a)))
        rows.append(CheckRow("T(1+0.5cos x, sin x)", a, float(com), tol))
    return rows


def format_table(rows) -> str:
    lines = [f"{'check':<36} {'alpha':>6} {'error':>10} {'tol':>8}  result"]
    for r in rows:
        lines.append(f"{r.name:<36} {r.alpha:>6.3g} {r.error:>10.3e} {r.tol:>8.1e}  "
                     f"{'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)
