"""Team-semantics model checking, decision procedures and reductions."""

from .errors import FragmentError, ModelError, ParseError, ReductionError, ResourceError, TeamLogicError
from .models import KripkeModel, PropTeam
from .parser import parse_formula, parse_kripke, parse_team, render
from .syntax import Fragment, classify
from .teamcheck import check_modal, check_prop

__version__ = "0.1.0"

__all__ = [
    "FragmentError",
    "Fragment",
    "KripkeModel",
    "ModelError",
    "ParseError",
    "PropTeam",
    "ReductionError",
    "ResourceError",
    "TeamLogicError",
    "check_modal",
    "check_prop",
    "classify",
    "parse_formula",
    "parse_kripke",
    "parse_team",
    "render",
]
