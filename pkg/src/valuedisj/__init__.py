"""Value-disjunction extended formulations, exact facet descriptions and
structure-driven branching for small bounded integer programs."""

__version__ = "0.1.0"
