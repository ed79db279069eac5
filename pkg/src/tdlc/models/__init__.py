"""Model families and the registry that builds them from specification records."""

from __future__ import annotations

from ..core import InvalidParameter, UnsupportedFamily, UnsupportedQuotient
from .finite_level import FiniteLevel
from .padic import PAdicToral
from .shift import Shift
from .tree import TreeProduct

FAMILIES = {
    "PAdicToral": PAdicToral,
    "Shift": Shift,
    "FiniteLevel": FiniteLevel,
    "TreeProduct": TreeProduct,
}


def build_model(spec):
    """Build a model from {"family": name, "params": {...}} (or a flat record with "family")."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidParameter("family", "specification record needs a family")
    family = spec["family"]
    if family not in FAMILIES:
        raise UnsupportedFamily(f"unknown family {family!r}", family=family)
    params = spec.get("params")
    if params is None:
        params = {k: v for k, v in spec.items() if k != "family"}
    if not isinstance(params, dict):
        raise InvalidParameter("params", "parameters must be a record")
    if family == "FiniteLevel" and params.get("preset") == "badnub":
        return FiniteLevel.badnub(params.get("p", 2), params.get("depth", 4))
    return FAMILIES[family](params)


def quotient_model(M, K, N=None):
    """Model of N/K (N defaults to the whole model) with the projection attached as .projection."""
    if not hasattr(M, "quotient"):
        raise UnsupportedQuotient(f"{M.family} models have no quotients")
    if N is not None and not M.contains(N, K):
        raise InvalidParameter("N", "K must lie inside N")
    if N is not None and N.is_open is False:
        raise InvalidParameter("N", "N must be open")
    Q, proj = M.quotient(K)
    Q.projection = proj
    Q.parent_model = M
    Q.kernel = K
    return Q
