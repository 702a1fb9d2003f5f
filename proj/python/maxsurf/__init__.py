"""Maximal graphs in Lorentz-Minkowski space.

Thin wrapper over the C++ core. Errors raise MaxsurfError with a ``kind``
attribute naming the failure (``invalid_boost``, ``inadmissible``, ...).
"""

from ._core import (
    BoostedRadial,
    Field,
    M_const,
    MaxsurfError,
    boost,
    cli,
    fit,
    fit_exact,
    m_const,
    residue,
    residue_exact,
    solve_annulus,
    solve_exterior,
    w_value,
)

__all__ = [
    "BoostedRadial",
    "Field",
    "M_const",
    "MaxsurfError",
    "boost",
    "cli",
    "fit",
    "fit_exact",
    "m_const",
    "residue",
    "residue_exact",
    "solve_annulus",
    "solve_exterior",
    "w_value",
]
