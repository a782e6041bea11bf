from .orders import DEGREVLEX, LEX, TermOrder
from .ring import Poly, PolyRing, RingMismatch
from .ideal import (Ideal, OpenLocus, RadicalBudgetExceeded, radical, unit_ideal,
                    zero_ideal, squarefree_part, poly_gcd, divide_exact)

__all__ = ["DEGREVLEX", "LEX", "TermOrder", "Poly", "PolyRing", "RingMismatch",
           "Ideal", "OpenLocus", "RadicalBudgetExceeded", "radical", "unit_ideal",
           "zero_ideal", "squarefree_part", "poly_gcd", "divide_exact"]
