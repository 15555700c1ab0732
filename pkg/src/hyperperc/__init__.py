"""Simulation and verification toolkit for Bernoulli hyperplane percolation.

Sites of the n-dimensional integer lattice are open exactly when their
orthogonal projections to all (n choose k) coordinate k-planes are open in
independent Bernoulli fields. The package samples this dependent field
reproducibly, measures connectivity decay, and mechanically audits the
constructive geometry behind its phase structure: crossing lifting,
inclined planes, and the renormalized wall of good boxes.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, FalsificationError, InvalidArgumentError,
                     InvalidCertificateError)
from .field import (FieldMode, FieldView, HyperplaneField, ParamVector,
                    box_all_open_probability, hyperplane_bit, site_open)
from .lattice import (Box, IndexSet, Lattice, Site, SurroundCertificate,
                      all_index_sets, l1_norm, linf_norm, neighbors,
                      on_boundary, project, verify_surround)

__all__ = [
    "Box", "ConfigError", "FalsificationError", "FieldMode", "FieldView",
    "HyperplaneField", "IndexSet", "InvalidArgumentError",
    "InvalidCertificateError", "Lattice", "ParamVector", "Site",
    "SurroundCertificate", "all_index_sets", "box_all_open_probability",
    "hyperplane_bit", "l1_norm", "linf_norm", "neighbors", "on_boundary",
    "project", "site_open", "verify_surround", "__version__",
]
