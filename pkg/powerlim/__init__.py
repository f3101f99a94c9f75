"""Asymptotics of |A^n|^{1/n} and |e^{tA}|^{1/t} for complex square matrices."""

from powerlim.services.expflow import exp_iterate_limit, exp_limit_matrix, expm, realpart_flag
from powerlim.services.jordan import jordan_chevalley
from powerlim.services.yamamoto import iterate_limit, limit_matrix, modulus_flag

__all__ = [
    "exp_iterate_limit",
    "exp_limit_matrix",
    "expm",
    "iterate_limit",
    "jordan_chevalley",
    "limit_matrix",
    "modulus_flag",
    "realpart_flag",
]
