"""Stage-structured Ricker model: simulation, extinction criteria,
eigensequences of periodic linear recurrences, and the semiconjugate
factorization of the autonomous scalar form."""

from .core import (
    DomainError,
    FoldedParams,
    NumericOverflow,
    PeriodicSeq,
    ReducedParams,
    RickerSystem,
    check_matching,
    fold_second_order,
    lcm_period,
    reduce,
)

__version__ = "0.1.0"
