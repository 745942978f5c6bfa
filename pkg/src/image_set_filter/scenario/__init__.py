"""
Scenario layer.

Binomial violation tail, sample-size rules, design dimensions and certificates.
"""

from .bounds import (
    SetFamily,
    design_dimension,
    implied_epsilon,
    required_samples_exact,
    required_samples_explicit,
    violation_tail,
)
from .certificate import CertificateMethod, ScenarioCertificate, certify

__all__ = [
    "CertificateMethod",
    "ScenarioCertificate",
    "SetFamily",
    "certify",
    "design_dimension",
    "implied_epsilon",
    "required_samples_exact",
    "required_samples_explicit",
    "violation_tail",
]
