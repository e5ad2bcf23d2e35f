"""Sharp Hölder exponents for doubly degenerate parabolic equations, plus a 1D
solver and an empirical regularity meter to check them against."""

from .exponents import (ProblemParams, ExponentReport, alpha_sharp, m_sharp, source_exponent,
                        theta, check_compatibility, improved_region_member, literature_reduction)

__version__ = "0.1.0"

__all__ = ["ProblemParams", "ExponentReport", "alpha_sharp", "m_sharp", "source_exponent",
           "theta", "check_compatibility", "improved_region_member", "literature_reduction"]
