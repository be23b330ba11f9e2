"""bincall: augmented call-site representations for stripped binary procedures."""

from .parser import ParseError, parse_listing, print_listing
from .reprbuild import AnalysisResult, analyze_procedure
from .metrics import aggregate_corpus, score_pair
from .tokens import subtokenize_name

__version__ = "0.1.0"

__all__ = [
    "ParseError",
    "parse_listing",
    "print_listing",
    "AnalysisResult",
    "analyze_procedure",
    "score_pair",
    "aggregate_corpus",
    "subtokenize_name",
    "__version__",
]
