"""Phase classifier for dX_t = dB_t + rho sgn(X_t)|X_t|^alpha / t^beta dt.

`classify` is a pure table lookup over the position of 2*beta relative to
alpha + 1 (critical line, above, below) and the sign of rho. It returns
serializable descriptors only; laws are evaluated in `tidlab.laws`.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from tidlab.common.utils.common_utils import ArrayLike, compare, is_close
from tidlab.laws.descriptor import LimitLawDescriptor
from tidlab.laws.rates import linear_case_params, transient_rate
from tidlab.model.envelope import EnvelopeKind, EnvelopeSpec
from tidlab.model.params import Params, ValidityClass, require_valid


class Recurrence(Enum):
    RECURRENT_ON_R = "RecurrentOnR"
    RECURRENT_ON_CLOSED_HALF_LINE = "RecurrentOnClosedHalfLine"
    RECURRENT_ON_OPEN_HALF_LINE = "RecurrentOnOpenHalfLine"
    TRANSIENT = "Transient"
    CONVERGES_TO_ZERO_AS = "ConvergesToZeroAS"
    EXPLODES_AS = "ExplodesAS"
    EXPLODES_WITH_PARTIAL_PROBABILITY = "ExplodesWithPartialProbability"


class NormKind(Enum):
    SQRT_T = "sqrt_t"
    SQRT_ELAPSED = "sqrt_elapsed"
    T_POW = "t_pow"
    SQRT_T_LOG_T = "sqrt_t_log_t"
    EXP_POWER = "exp_power"
    NONE = "none"


@dataclass(frozen=True)
class NormalizationSpec:
    """Descriptor of the normalization t -> n(t)

    Attributes:
        kind (NormKind): normalization family
        exponent (float): power for t_pow, or 1 - beta for exp_power
        rho (float): rate for exp_power

    """

    kind: NormKind
    exponent: Optional[float] = None
    rho: Optional[float] = None

    def __call__(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        if self.kind == NormKind.SQRT_T:
            value = np.sqrt(t)
        elif self.kind == NormKind.SQRT_ELAPSED:
            value = np.sqrt(t - 1.0)
        elif self.kind == NormKind.T_POW:
            value = t ** self.exponent
        elif self.kind == NormKind.SQRT_T_LOG_T:
            value = np.sqrt(t * np.log(t))
        elif self.kind == NormKind.EXP_POWER:
            value = np.exp(self.rho * t ** self.exponent / self.exponent)
        else:
            value = np.ones_like(t)
        if np.ndim(value) == 0:
            return float(value)
        return value

    def to_dict(self) -> dict:
        info = dict(kind=self.kind.value)
        if self.exponent is not None:
            info["exponent"] = self.exponent
        if self.rho is not None:
            info["rho"] = self.rho
        return info

    def __str__(self) -> str:
        if self.kind == NormKind.T_POW:
            return f"t^{self.exponent:.6g}"
        if self.kind == NormKind.EXP_POWER:
            return f"exp({self.rho:.6g} t^{self.exponent:.6g} / {self.exponent:.6g})"
        return self.kind.value


SQRT_T = NormalizationSpec(NormKind.SQRT_T)
NO_NORMALIZATION = NormalizationSpec(NormKind.NONE)


class BlowupProfile(Enum):
    CRITICAL = "critical"
    UNDER_CRITICAL = "under-critical"


# Literature reference printed next to each rule.
RULE_REFERENCES = {
    "brownian": "Thm 4.5",
    "critical-line/attractive": "Thm 4.1",
    "critical-line/repulsive": "Thm 4.3 i",
    "critical-line/repulsive/singular": "Thm 4.3 ii",
    "critical-line/repulsive/explosive": "Thm 4.3 iii",
    "critical-line/repulsive/bessel": "Thm 4.3 iv",
    "critical-line/repulsive/linear": "Thm 4.3 v",
    "critical-line/repulsive/linear-boundary": "Thm 4.3 v",
    "critical-line/repulsive/linear-transient": "Thm 4.3 v",
    "above-critical/attractive": "Thm 4.5",
    "above-critical/repulsive": "Thm 4.6 i",
    "above-critical/repulsive/bessel": "Thm 4.6 ii",
    "above-critical/repulsive/singular": "Thm 4.6 ii",
    "above-critical/repulsive/partial-explosion": "Thm 4.6 iii",
    "above-critical/repulsive/non-explosive-part": "Thm 4.6 iii",
    "under-critical/attractive": "Thm 4.7",
    "under-critical/repulsive": "Thm 4.8",
    "under-critical/repulsive/linear": "Thm 4.8",
    "under-critical/repulsive/explosive": "Thm 4.8, Prop 3.6",
}


@dataclass(frozen=True)
class Regime:
    """Phase-diagram verdict for one parameter triple

    Attributes:
        validity (ValidityClass): region of the parameter space
        recurrence (Recurrence): recurrence/transience/explosion class
        normalization (NormalizationSpec): n(t) such that X_t / n(t) has a limit
        limit_law (LimitLawDescriptor): law of the limit, None when none exists
        limsup_envelope (EnvelopeSpec): almost-sure upper envelope, when asserted
        liminf_envelope (EnvelopeSpec): almost-sure lower envelope, when asserted
        notes (tuple): free-form tags
        rule (str): name of the classification rule that decided the verdict
        conditional (Regime): behaviour under the conditional probability of
            nonexplosion (partial explosion only)
        blowup_profile (BlowupProfile): profile followed on explosion
        almost_sure_limit (bool): the limit holds almost surely, not only in law

    """

    validity: ValidityClass
    recurrence: Recurrence
    normalization: NormalizationSpec
    limit_law: Optional[LimitLawDescriptor]
    rule: str
    limsup_envelope: Optional[EnvelopeSpec] = None
    liminf_envelope: Optional[EnvelopeSpec] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)
    conditional: Optional["Regime"] = None
    blowup_profile: Optional[BlowupProfile] = None
    almost_sure_limit: bool = False

    @property
    def reference(self) -> str:
        return RULE_REFERENCES[self.rule]

    def to_dict(self) -> dict:
        return dict(
            validity=self.validity.value,
            recurrence=self.recurrence.value,
            normalization=self.normalization.to_dict(),
            limit_law=None if self.limit_law is None else self.limit_law.to_dict(),
            limsup_envelope=_opt_dict(self.limsup_envelope),
            liminf_envelope=_opt_dict(self.liminf_envelope),
            notes=list(self.notes),
            rule=self.rule,
            reference=self.reference,
            conditional=None if self.conditional is None else self.conditional.to_dict(),
            blowup_profile=None if self.blowup_profile is None else self.blowup_profile.value,
            almost_sure_limit=self.almost_sure_limit,
        )


def _opt_dict(spec: Optional[EnvelopeSpec]) -> Optional[dict]:
    return None if spec is None else spec.to_dict()


ENVELOPE_L = EnvelopeSpec(EnvelopeKind.L)
GAUSSIAN_STANDARD = LimitLawDescriptor.gaussian(0.0, 1.0)


def classify(p: Params) -> Regime:
    """Classify a valid parameter triple into the phase diagram.

    Raises InvalidParameters when validate(p) is Invalid.
    """
    validity = require_valid(p)
    if validity == ValidityClass.BROWNIAN_BOUNDARY:
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            SQRT_T,
            GAUSSIAN_STANDARD,
            rule="brownian",
            limsup_envelope=ENVELOPE_L,
        )

    side = compare(2.0 * p.beta, p.alpha + 1.0)
    attractive = validity == ValidityClass.ATTRACTIVE_P_MINUS
    if side == 0:
        return _critical_attractive(p) if attractive else _critical_repulsive(p)
    if side > 0:
        return _above_attractive(p) if attractive else _above_repulsive(p)
    return _under_attractive(p) if attractive else _under_repulsive(p)


def _critical_attractive(p: Params) -> Regime:
    if is_close(p.alpha, 1.0):
        law = LimitLawDescriptor.gaussian(0.0, 1.0 / (1.0 - 2.0 * p.rho))
        envelope = EnvelopeSpec(EnvelopeKind.SCALED_L, (1.0 - 2.0 * p.rho) ** -0.5)
    else:
        law = LimitLawDescriptor.lambda_law(p.rho, p.alpha)
        envelope = ENVELOPE_L if p.alpha < 1 else EnvelopeSpec(EnvelopeKind.L_RHO_ALPHA)
    return Regime(
        ValidityClass.ATTRACTIVE_P_MINUS,
        Recurrence.RECURRENT_ON_R,
        SQRT_T,
        law,
        rule="critical-line/attractive",
        limsup_envelope=envelope,
    )


def _critical_repulsive(p: Params) -> Regime:
    validity = ValidityClass.REPULSIVE_P_PLUS
    if is_close(p.alpha, -1.0):
        return _bessel(p)
    if is_close(p.alpha, 1.0):
        return _critical_linear(p)
    if compare(p.alpha, 1.0) > 0:
        return Regime(
            validity,
            Recurrence.EXPLODES_AS,
            NO_NORMALIZATION,
            None,
            rule="critical-line/repulsive/explosive",
            notes=("finite-time-blow-up",),
            blowup_profile=BlowupProfile.CRITICAL,
        )
    law = LimitLawDescriptor.lambda_law(p.rho, p.alpha)
    if p.alpha > -1:
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            SQRT_T,
            law,
            rule="critical-line/repulsive",
            limsup_envelope=ENVELOPE_L,
        )
    return Regime(
        validity,
        Recurrence.TRANSIENT,
        SQRT_T,
        law,
        rule="critical-line/repulsive/singular",
        limsup_envelope=ENVELOPE_L,
        liminf_envelope=EnvelopeSpec(EnvelopeKind.L_RHO_ALPHA),
        notes=("entrance-boundary",),
    )


def _bessel(p: Params) -> Regime:
    if is_close(p.rho, 0.5):
        recurrence = Recurrence.RECURRENT_ON_OPEN_HALF_LINE
    elif p.rho < 0.5:
        recurrence = Recurrence.RECURRENT_ON_CLOSED_HALF_LINE
    else:
        recurrence = Recurrence.TRANSIENT
    notes = ("bessel", f"bessel-dimension={2.0 * p.rho + 1.0:.17g}")
    if recurrence == Recurrence.TRANSIENT:
        notes = notes + (f"log-rate-liminf={-1.0 / (2.0 * p.rho - 1.0):.17g}",)
    return Regime(
        ValidityClass.REPULSIVE_P_PLUS,
        recurrence,
        SQRT_T,
        LimitLawDescriptor.sqrt_gamma(p.rho + 0.5, 2.0),
        rule="critical-line/repulsive/bessel",
        limsup_envelope=ENVELOPE_L,
        notes=notes,
    )


def _critical_linear(p: Params) -> Regime:
    validity = ValidityClass.REPULSIVE_P_PLUS
    if is_close(p.rho, 0.5):
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            NormalizationSpec(NormKind.SQRT_T_LOG_T),
            GAUSSIAN_STANDARD,
            rule="critical-line/repulsive/linear-boundary",
            limsup_envelope=EnvelopeSpec(EnvelopeKind.L_LOG),
            notes=("friedman-linear",),
        )
    if p.rho < 0.5:
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            SQRT_T,
            LimitLawDescriptor.gaussian(0.0, 1.0 / (1.0 - 2.0 * p.rho)),
            rule="critical-line/repulsive/linear",
            limsup_envelope=EnvelopeSpec(EnvelopeKind.SCALED_L, (1.0 - 2.0 * p.rho) ** -0.5),
            notes=("friedman-linear",),
        )
    return Regime(
        validity,
        Recurrence.TRANSIENT,
        NormalizationSpec(NormKind.T_POW, exponent=p.rho),
        LimitLawDescriptor.gaussian(p.x0, 1.0 / (2.0 * p.rho - 1.0)),
        rule="critical-line/repulsive/linear-transient",
        notes=("friedman-linear",),
        almost_sure_limit=True,
    )


def _above_attractive(p: Params) -> Regime:
    return Regime(
        ValidityClass.ATTRACTIVE_P_MINUS,
        Recurrence.RECURRENT_ON_R,
        SQRT_T,
        GAUSSIAN_STANDARD,
        rule="above-critical/attractive",
        limsup_envelope=ENVELOPE_L,
    )


def _above_repulsive(p: Params) -> Regime:
    validity = ValidityClass.REPULSIVE_P_PLUS
    if compare(p.alpha, 1.0) > 0:
        conditional = Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            SQRT_T,
            GAUSSIAN_STANDARD,
            rule="above-critical/repulsive/non-explosive-part",
            limsup_envelope=ENVELOPE_L,
            notes=("conditional-on-nonexplosion",),
        )
        return Regime(
            validity,
            Recurrence.EXPLODES_WITH_PARTIAL_PROBABILITY,
            NO_NORMALIZATION,
            None,
            rule="above-critical/repulsive/partial-explosion",
            notes=("conditional-on-nonexplosion", "finite-time-blow-up"),
            conditional=conditional,
            blowup_profile=BlowupProfile.CRITICAL,
        )
    if compare(p.alpha, -1.0) > 0:
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_R,
            SQRT_T,
            GAUSSIAN_STANDARD,
            rule="above-critical/repulsive",
            limsup_envelope=ENVELOPE_L,
        )

    half_gaussian = LimitLawDescriptor.half_gaussian()
    if is_close(p.alpha, -1.0):
        return Regime(
            validity,
            Recurrence.RECURRENT_ON_CLOSED_HALF_LINE,
            SQRT_T,
            half_gaussian,
            rule="above-critical/repulsive/bessel",
            limsup_envelope=ENVELOPE_L,
            notes=("bessel",),
        )
    recurrence = Recurrence.RECURRENT_ON_OPEN_HALF_LINE if p.beta >= 0 else Recurrence.TRANSIENT
    return Regime(
        validity,
        recurrence,
        SQRT_T,
        half_gaussian,
        rule="above-critical/repulsive/singular",
        limsup_envelope=ENVELOPE_L,
        liminf_envelope=EnvelopeSpec(EnvelopeKind.L_RHO_ALPHA_BETA),
        notes=("entrance-boundary", "liminf-lower-bound"),
    )


def _under_attractive(p: Params) -> Regime:
    recurrence = Recurrence.RECURRENT_ON_R if p.beta >= 0 else Recurrence.CONVERGES_TO_ZERO_AS
    if is_close(p.alpha, 1.0):
        law = LimitLawDescriptor.gaussian(0.0, 1.0 / (2.0 * abs(p.rho)))
    else:
        law = LimitLawDescriptor.pi_law(p.rho, p.alpha)
    return Regime(
        ValidityClass.ATTRACTIVE_P_MINUS,
        recurrence,
        NormalizationSpec(NormKind.T_POW, exponent=p.beta / (p.alpha + 1.0)),
        law,
        rule="under-critical/attractive",
        limsup_envelope=EnvelopeSpec(EnvelopeKind.L_RHO_ALPHA_BETA),
    )


def _under_repulsive(p: Params) -> Regime:
    validity = ValidityClass.REPULSIVE_P_PLUS
    if compare(p.alpha, 1.0) > 0:
        return Regime(
            validity,
            Recurrence.EXPLODES_AS,
            NO_NORMALIZATION,
            None,
            rule="under-critical/repulsive/explosive",
            notes=("finite-time-blow-up",),
            blowup_profile=BlowupProfile.UNDER_CRITICAL,
        )
    if is_close(p.alpha, 1.0):
        m, sigma2 = linear_case_params(p)
        return Regime(
            validity,
            Recurrence.TRANSIENT,
            NormalizationSpec(NormKind.EXP_POWER, exponent=1.0 - p.beta, rho=p.rho),
            LimitLawDescriptor.gaussian(m, sigma2),
            rule="under-critical/repulsive/linear",
            notes=("friedman-linear",),
            almost_sure_limit=True,
        )
    ell, nu = transient_rate(p)
    return Regime(
        validity,
        Recurrence.TRANSIENT,
        NormalizationSpec(NormKind.T_POW, exponent=nu),
        LimitLawDescriptor.deterministic(ell),
        rule="under-critical/repulsive",
        notes=("deterministic-rate",),
        almost_sure_limit=True,
    )
