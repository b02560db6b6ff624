"""CM-points on rational lines: class groups, Hilbert class polynomials and
the exhaustive checks around them."""

from .modular import HilbertPolynomial, eval_j, hilbert_class_polynomial, quadratic_subfields
from .orders import split_discriminant, weinberger_scan
from .qforms import Form, class_group, compose, enumerate_reduced, reduce

__version__ = "0.1.0"
