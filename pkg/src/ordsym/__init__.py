"""Exact-arithmetic ordinary-part modular symbol computations.

Subpackages and modules:

- ``exactlin``: integer and mod-p^k linear algebra (SNF, kernels, saturation,
  the isotropic-summand equivalence report).
- ``iwasawa``: finite-level Iwasawa algebras and module checks (freeness,
  control).
- ``modsym``: weight-2 Manin symbol spaces, boundary map, cuspidal lattice,
  intersection pairing.
- ``hecke``: Hecke and diamond operators, level trace/pullback, twisted
  pairing.
- ``ordinary``: ordinary projector, eigen packets, q-expansion duality, unit
  roots.
- ``harness``: verification pipelines, caching, reports; ``cli`` exposes them
  as the ``ordsym`` command.
"""

__version__ = "0.1.0"

from ._kernels import active_backend, available_backends  # noqa: F401
