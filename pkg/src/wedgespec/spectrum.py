"""Result containers shared by the spectral solvers."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class SpectrumReport:
    """Ordered real eigenvalues plus whatever complex ones were found.

    ``count`` is N(theta), the number of real eigenvalues; ``pairs`` holds
    solver-specific eigenpair objects aligned with ``real`` then
    ``complex_pairs``.
    """

    real: list
    complex_pairs: list = field(default_factory=list)
    count: int = 0
    pairs: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def lowest(self, n, include_complex=False):
        vals = list(self.real)
        if include_complex:
            vals += list(self.complex_pairs)
            vals.sort(key=lambda z: (abs(z), getattr(z, "imag", 0.0)))
        return vals[:n]
