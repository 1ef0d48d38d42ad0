"""Exact certification of Morita equivalences between reduced enveloping algebras and W-algebras."""

from .field import GF, FieldElement, get_field
from .liealg import NilpotentDatum, RestrictedLieAlgebra, build_algebra, build_gl, build_sl, datum_from_partition
from .penv import PBWElement, ReductionContext
from .ggg import FiniteModule, GGGModule, build_family_ggg, build_reduced_ggg
from .walg import WAlgebra, build_walgebra
from .report import CertReport, Entry
from .suites import RunConfig, describe, run

__version__ = "0.1.0"

__all__ = [
    "GF", "FieldElement", "get_field", "NilpotentDatum", "RestrictedLieAlgebra", "build_algebra", "build_gl",
    "build_sl", "datum_from_partition", "PBWElement", "ReductionContext", "FiniteModule", "GGGModule",
    "build_family_ggg", "build_reduced_ggg", "WAlgebra", "build_walgebra", "CertReport", "Entry", "RunConfig",
    "describe", "run", "__version__",
]
