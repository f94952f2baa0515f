from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from tidlab.common.errors import DomainError, InvalidParameters
from tidlab.common.utils.common_utils import ArrayLike
from tidlab.model.params import Params


class EnvelopeKind(Enum):
    L = "L"
    L_RHO_ALPHA = "L_rho_alpha"
    L_RHO_ALPHA_BETA = "L_rho_alpha_beta"
    SCALED_L = "scaled_L"
    L_LOG = "L_log"


@dataclass(frozen=True)
class EnvelopeSpec:
    """Iterated-logarithm envelope times a constant

    Attributes:
        kind (EnvelopeKind): envelope function
        constant (float): multiplying constant

    """

    kind: EnvelopeKind
    constant: float = 1.0

    def to_dict(self) -> dict:
        return dict(kind=self.kind.value, constant=self.constant)

    def __str__(self) -> str:
        if self.constant == 1.0:
            return self.kind.value
        return f"{self.constant:.6g}*{self.kind.value}"


def c_rho_alpha(p: Params) -> float:
    return abs(p.alpha + 1.0) / (2.0 * abs(p.rho))


def c_rho_alpha_beta(p: Params) -> float:
    return abs(p.alpha + 1.0 - 2.0 * p.beta) / (2.0 * abs(p.rho))


def envelope_value(spec: EnvelopeSpec, p: Params, t: ArrayLike) -> ArrayLike:
    """Evaluate constant * envelope(t); accepts scalar or array t"""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 1.0):
        raise DomainError("envelopes need t > 1")
    log_t = np.log(t_arr)

    if spec.kind in (EnvelopeKind.L_RHO_ALPHA, EnvelopeKind.L_RHO_ALPHA_BETA):
        if p.rho == 0 or p.alpha == -1:
            raise InvalidParameters("rho-alpha envelopes need rho != 0 and alpha != -1")

    if spec.kind == EnvelopeKind.L_RHO_ALPHA_BETA:
        base = (c_rho_alpha_beta(p) * t_arr ** p.beta * log_t) ** (1.0 / (p.alpha + 1.0))
    else:
        log_log_t = np.log(log_t)
        if np.any(log_log_t <= 0):
            raise DomainError("ln ln t must be positive (t > e)")
        if spec.kind in (EnvelopeKind.L, EnvelopeKind.SCALED_L):
            base = np.sqrt(2.0 * t_arr * log_log_t)
        elif spec.kind == EnvelopeKind.L_RHO_ALPHA:
            base = np.sqrt(t_arr) * (c_rho_alpha(p) * log_log_t) ** (1.0 / (p.alpha + 1.0))
        else:
            log_log_log_t = np.log(log_log_t)
            if np.any(log_log_log_t <= 0):
                raise DomainError("ln ln ln t must be positive (t > e^e)")
            base = np.sqrt(2.0 * t_arr * log_t * log_log_log_t)

    value = spec.constant * base
    if np.ndim(value) == 0:
        return float(value)
    return value


def envelope_floor(spec: EnvelopeSpec) -> float:
    """Smallest t at which the envelope is defined"""
    if spec.kind == EnvelopeKind.L_RHO_ALPHA_BETA:
        return 1.0
    if spec.kind == EnvelopeKind.L_LOG:
        return math.exp(math.e)
    return math.e
