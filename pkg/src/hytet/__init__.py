"""Volumes of hyperbolic tetrahedra via a dilogarithm potential in edge lengths or dihedral angles."""
from .dilog import clausen, clog, li2, li2_continued, lobachevsky
from .errors import (
    BranchIntegrityError,
    ConvergenceError,
    GeometryError,
    HytetError,
    NumericalError,
    RealizabilityError,
    ShapeError,
)
from .gram import Shape, angles_to_lengths, classify, gram_from_angles, gram_from_lengths, lengths_to_angles
from .oracle import QuadratureSpec, oracle_volume_from_lengths
from .volume import VolumeResult, schlafli_defect, volume_from_angles, volume_from_lengths

__all__ = [
    "BranchIntegrityError", "ConvergenceError", "GeometryError", "HytetError", "NumericalError",
    "QuadratureSpec", "RealizabilityError", "Shape", "ShapeError", "VolumeResult",
    "angles_to_lengths", "clausen", "classify", "clog", "gram_from_angles", "gram_from_lengths",
    "lengths_to_angles", "li2", "li2_continued", "lobachevsky", "oracle_volume_from_lengths",
    "schlafli_defect", "volume_from_angles", "volume_from_lengths",
]
