"""JSON-ready dictionaries for boxes and approximating sets."""

from typing import Any

import numpy as np

from ..exceptions import InvalidSetError
from .box import Box
from .sets import ApproximatingSet, NasSet, NormType, PasSet, PutinarCertificate


def set_to_dict(A: ApproximatingSet) -> dict[str, Any]:
    """
    Serialize a set.

    NasSet becomes {"type": "nas", "center", "shape" (row-major), "p"}; PasSet
    becomes {"type": "pas", "box", "degree", "monomials", "coefficients",
    "gram_blocks"}.
    """
    if isinstance(A, NasSet):
        return {
            "type": "nas",
            "center": A.center.tolist(),
            "shape": A.shape.tolist(),
            "p": A.norm.to_json(),
        }
    if isinstance(A, PasSet):
        blocks = [] if A.certificate is None else [
            g.tolist() for g in A.certificate.blocks
        ]
        return {
            "type": "pas",
            "box": A.box.to_dict(),
            "degree": A.degree,
            "monomials": A.basis.exponents.tolist(),
            "coefficients": A.coefficients.tolist(),
            "gram_blocks": blocks,
        }
    raise InvalidSetError(f"Cannot serialize {type(A).__name__}")


def set_from_dict(data: dict[str, Any]) -> ApproximatingSet:
    """Inverse of set_to_dict."""
    kind = data.get("type")
    if kind == "nas":
        return NasSet(
            center=np.asarray(data["center"], dtype=float),
            shape=np.asarray(data["shape"], dtype=float),
            norm=NormType.parse(data.get("p", 2)),
        )
    if kind == "pas":
        blocks = [np.asarray(g, dtype=float) for g in data.get("gram_blocks", [])]
        certificate = (
            PutinarCertificate(r0=blocks[0], faces=tuple(blocks[1:]))
            if blocks
            else None
        )
        return PasSet(
            box=Box.from_dict(data["box"]),
            degree=int(data["degree"]),
            coefficients=np.asarray(data["coefficients"], dtype=float),
            certificate=certificate,
        )
    raise InvalidSetError(f"Unknown set type {kind!r}")
