"""Exception hierarchy for the swigc package.

Errors are grouped by the layer that raises them: graph construction,
spec parsing, node splitting, d-separation queries, and the enumeration
oracle.  Everything deliberate derives from :class:`SwigcError` so the
command line can keep user mistakes apart from genuine bugs.
"""

from __future__ import annotations

from typing import Sequence

__all__ = [
    "SwigcError",
    "GraphError",
    "CycleError",
    "DuplicateName",
    "UnknownEndpoint",
    "UnknownNode",
    "UnknownVariable",
    "LatentIntervention",
    "AlreadySplit",
    "OverlappingSets",
    "SpecError",
    "ParseError",
    "SemanticError",
    "ConflictingStrategies",
    "CompositeNonBinary",
    "OracleError",
    "SupportTooLarge",
    "EmptyStratum",
    "ZeroProbabilityCondition",
]


class SwigcError(Exception):
    """Base class for every error this package raises deliberately."""


class GraphError(SwigcError):
    """Invalid graph construction."""


class CycleError(GraphError):
    """The edge set contains a directed cycle; ``witness`` walks it once."""

    def __init__(self, witness: Sequence[str]):
        self.witness = list(witness)
        super().__init__("graph has a cycle: " + " -> ".join(self.witness))


class DuplicateName(GraphError):
    pass


class UnknownEndpoint(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class UnknownVariable(SwigcError):
    """An intervention names a variable the graph does not contain."""


class LatentIntervention(SwigcError):
    """An intervention targets an unobserved variable."""


class AlreadySplit(SwigcError):
    """Node splitting applies to plain DAGs, never to a graph that already has fixed halves."""


class OverlappingSets(SwigcError):
    """The x, y, z sets of a d-separation query must be pairwise disjoint."""


class SpecError(SwigcError):
    """Problem in a study spec text."""


class ParseError(SpecError):
    """Syntax error; ``line`` and ``column`` are 1-based and point at the offending token."""

    def __init__(self, line: int, column: int, message: str, expected: Sequence[str] = ()):
        self.line = line
        self.column = column
        self.message = message
        self.expected = list(expected)
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += " (expected " + " | ".join(self.expected) + ")"
        super().__init__(text)


class SemanticError(SpecError):
    """Well-formed syntax that violates a study invariant."""


class ConflictingStrategies(SemanticError):
    """The same intercurrent event is given more than one strategy."""


class CompositeNonBinary(SemanticError):
    """A composite failure value falls outside the outcome's declared values."""


class OracleError(SwigcError):
    """Problem while enumerating or evaluating a structural causal model."""


class SupportTooLarge(OracleError):
    """The joint noise support exceeds the enumeration row cap."""


class EmptyStratum(OracleError):
    """A principal-stratum event has probability zero (positivity failure)."""


class ZeroProbabilityCondition(OracleError):
    """A formula conditions on an event the observed distribution never produces."""
