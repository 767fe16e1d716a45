"""
Random-code averages and the bound chain of the sequential decoder.

An ``AveragingContext`` holds, for one (ensemble, n, delta), the average
typical projector P and, in exact mode, every codeword j of length n with its
probability p_j, its state rho_j, its conditional projector P_j and
Qbar_j = P (I - P_j) P. Everything that averages over codes is expressed with
these families:

    Phi(T) = sum_j p_j Qbar_j T Qbar_j
    W_q    = sum_j p_j P_j rho_j^q P_j
    Q      = sum_j p_j Qbar_j = P (I - W_0) P
    f_z    = Tr[W_1 P Wbar_0^z]
    A      = Tr[W_1 P Q^(N-1)]

All exponentials 2^(+-n(...)) are formed from their log2 exponent in one step.
"""
from dataclasses import dataclass, field
from functools import cached_property
import itertools
import logging
import math

import numpy as np
from scipy.special import comb

from .coding import codeword_probability, codeword_state, enumerate_codes, make_rng, sample_code
from .conf import sim_settings
from .decoding import build_povm, code_error_probability
from .exceptions import BudgetExceeded, ConfigError, ExactModeRequired, InvariantViolation
from .models import Decoder, RateVerdict
from .operators import hermitize, psd_margin, tensor_power
from .typicality import TypicalProjectorCache, atypical_mass_average, atypical_mass_conditional


@dataclass(eq=False)
class AveragingContext:
    ensemble: object
    n: int
    delta: float
    cache: TypicalProjectorCache
    exact: bool = True
    codewords: tuple = ()
    probs: np.ndarray = field(default=None, repr=False)
    states: np.ndarray = field(default=None, repr=False)
    conditional: np.ndarray = field(default=None, repr=False)
    qbar: np.ndarray = field(default=None, repr=False)

    @classmethod
    def build(cls, e, n, delta, exact=True, cache=None):
        cache = cache or TypicalProjectorCache(e, n, delta)
        if not exact:
            return cls(ensemble=e, n=n, delta=delta, cache=cache, exact=False)

        count = e.alphabet_size ** n
        if count > sim_settings.EXACT_MAX_CODEWORDS:
            raise BudgetExceeded(
                f"Exact averaging needs all {count} codewords, limit is {sim_settings.EXACT_MAX_CODEWORDS}. "
                f"Use Monte Carlo mode or a smaller n."
            )
        logging.debug(f"Building exact averaging context over {count} codewords, n={n}, delta={delta}")
        codewords = tuple(itertools.product(range(e.alphabet_size), repeat=n))
        p = cache.average.matrix
        conditional = np.stack([cache.conditional(j).matrix for j in codewords])
        return cls(
            ensemble=e,
            n=n,
            delta=delta,
            cache=cache,
            exact=True,
            codewords=codewords,
            probs=np.array([codeword_probability(e, j) for j in codewords]),
            states=np.stack([codeword_state(e, j) for j in codewords]),
            conditional=conditional,
            qbar=hermitize(p @ (np.eye(cache.dim) - conditional) @ p),
        )

    def require_exact(self):
        if not self.exact:
            raise ExactModeRequired()

    @property
    def projector(self):
        return self.cache.average.matrix

    @property
    def dim(self):
        return self.cache.dim

    @property
    def chi_eff(self):
        return self.ensemble.chi - 2 * self.delta

    @property
    def vacuous(self):
        """The bound chain says nothing once delta >= chi / 2."""
        return self.chi_eff <= 0

    @cached_property
    def w0(self):
        return w_operator(self, 0)

    @cached_property
    def w1(self):
        return w_operator(self, 1)

    @cached_property
    def q(self):
        return q_operator(self)


def phi_apply(ctx, theta):
    """Phi applied to one operator or to a stack of operators along axis 0."""
    ctx.require_exact()
    theta = np.asarray(theta, dtype=complex)
    if theta.shape[-1] != ctx.dim:
        raise ConfigError(f"Operator of dimension {theta.shape[-1]} does not act on the block space {ctx.dim}.")
    out = np.zeros_like(theta)
    for weight, qbar in zip(ctx.probs, ctx.qbar):
        out += weight * (qbar @ theta @ qbar)
    return out


def average_error_exact(ctx, N):
    """<P_err> = 1 - (1/N) sum_j p_j sum_{l<N} Tr[P P_j P Phi^l(rho_j)].

    For l >= 1 Phi^l(rho_j) already lives inside P, so only the l = 0 term
    needs the outer P explicitly.
    """
    ctx.require_exact()
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}.")
    p = ctx.projector
    tested = hermitize(p @ ctx.conditional @ p)
    current = ctx.states
    success = 0.0
    for ell in range(N):
        success += float(np.einsum('k,kab,kba->', ctx.probs, tested, current).real)
        if ell < N - 1:
            current = phi_apply(ctx, current)
    return min(max(1.0 - success / N, 0.0), 1.0)


def average_error_bruteforce(e, n, delta, N, decoder=Decoder.SEQUENTIAL, cache=None, budget=None):
    """Sum over every ordered code C of P(C) times the error of C."""
    cache = cache or TypicalProjectorCache(e, n, delta)
    total = 0.0
    for code, weight in enumerate_codes(e.probs, n, N, budget):
        if weight.probability == 0.0:
            continue
        povm = build_povm(e, code, delta, decoder, cache)
        total += weight.probability * code_error_probability(povm, e, code)
    return min(max(total, 0.0), 1.0)


@dataclass(frozen=True)
class ErrorEstimate:
    mean: float
    stderr: float
    num_codes: int
    values: tuple = field(default=(), repr=False)


def average_error_mc(e, n, delta, N, num_codes, rng, decoder=Decoder.SEQUENTIAL, cache=None):
    """Sample ``num_codes`` codes, one child stream each, and score them."""
    if num_codes < 1:
        raise ConfigError(f"num_codes must be >= 1, got {num_codes}.")
    cache = cache or TypicalProjectorCache(e, n, delta)
    values = []
    for child in rng.spawn(num_codes):
        code = sample_code(e.probs, n, N, child)
        values.append(code_error_probability(build_povm(e, code, delta, decoder, cache), e, code))
    values = np.array(values)
    stderr = float(values.std(ddof=1) / math.sqrt(num_codes)) if num_codes > 1 else 0.0
    return ErrorEstimate(mean=float(values.mean()), stderr=stderr, num_codes=num_codes, values=tuple(values))


def w_operator(ctx, q):
    ctx.require_exact()
    if q < 0:
        raise ConfigError(f"W_q needs q >= 0, got {q}.")
    if q == 0:
        return hermitize(np.tensordot(ctx.probs, ctx.conditional, axes=1))
    powers = ctx.states if q == 1 else np.linalg.matrix_power(ctx.states, q)
    terms = ctx.conditional @ powers @ ctx.conditional
    return hermitize(np.tensordot(ctx.probs, terms, axes=1))


def q_operator(ctx):
    """Q = sum_j p_j Qbar_j, formed as P (I - W_0) P."""
    ctx.require_exact()
    p = ctx.projector
    return hermitize(p @ (np.eye(ctx.dim) - ctx.w0) @ p)


def f_sequence(ctx, zmax):
    ctx.require_exact()
    p = ctx.projector
    w0_bar = hermitize(p @ ctx.w0 @ p)
    values = []
    current = p
    for _ in range(zmax + 1):
        values.append(float(np.einsum('ab,ba->', ctx.w1, current).real))
        current = current @ w0_bar
    return values


def f_z(ctx, z):
    if z < 0:
        raise ConfigError(f"z must be >= 0, got {z}.")
    return f_sequence(ctx, z)[z]


def a_exact(ctx, N):
    """Tr[W_1 P Q^(N-1)]; P is the unit of the operators living on the typical subspace."""
    ctx.require_exact()
    power = ctx.projector @ np.linalg.matrix_power(ctx.q, N - 1)
    return float(np.einsum('ab,ba->', ctx.w1, power).real)


def expansion_A(f_values, N):
    """sum_z (-1)^z C(N-1, z) f_z; alternating sums lose precision quickly, so N is capped."""
    if N > sim_settings.EXPANSION_MAX_N:
        raise ConfigError(f"Binomial expansion of A is limited to N <= {sim_settings.EXPANSION_MAX_N}, got {N}.")
    if len(f_values) < N:
        raise ConfigError(f"Need f_0..f_{N - 1}, got {len(f_values)} values.")
    return float(sum((-1) ** z * comb(N - 1, z, exact=True) * f_values[z] for z in range(N)))


def _log1p_exp2(x):
    """ln(1 + 2^x) without overflow."""
    if x > 0:
        return x * math.log(2) + math.log1p(2.0 ** -x)
    return math.log1p(2.0 ** x)


def a_lower_bound(f0, n, chi_eff, N):
    """f_0 [2 - (1 + 2^{-n chi_eff})^(N-1)], evaluated through logs."""
    growth = (N - 1) * _log1p_exp2(-n * chi_eff)
    if growth > 700:
        return -math.inf if f0 > 0 else 0.0
    return f0 * (2.0 - math.exp(growth))


@dataclass(frozen=True)
class SuccessBound:
    f0: float
    A_lower: float
    certified: float
    A_exact: float | None = None
    vacuous: bool = False

    @property
    def exact_bound(self):
        return None if self.A_exact is None else self.A_exact ** 2


def sequential_success_lower_bound(ctx, N):
    """max(0, A_lower)^2 bounds 1 - <P_err> from below; A_exact^2 is the tighter intermediate."""
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}.")
    f0 = f_z(ctx, 0)
    a_low = a_lower_bound(f0, ctx.n, ctx.chi_eff, N)
    return SuccessBound(
        f0=f0,
        A_lower=a_low,
        certified=max(0.0, a_low) ** 2,
        A_exact=a_exact(ctx, N),
        vacuous=ctx.vacuous,
    )


def log_y_threshold(x, y, n):
    """Natural log of Y(x, y, n) = (1 + x^-n)^(y^n - 1)."""
    if x < 1 or y < 1:
        raise ConfigError(f"Y needs x, y >= 1, got x={x}, y={y}.")
    exponent = math.expm1(n * math.log(y)) if n * math.log(y) < 700 else math.inf
    base = math.log1p(math.exp(-n * math.log(x)))
    if exponent == math.inf:
        return math.inf if base > 0 else 0.0
    return exponent * base


def y_threshold(x, y, n):
    log_y = log_y_threshold(x, y, n)
    return math.inf if log_y > 700 else math.exp(log_y)


def rate_verdict(chi, delta, rate):
    return RateVerdict.BELOW if rate < chi - 2 * delta else RateVerdict.ABOVE


def rate_of(N, n):
    return math.log2(N) / n


def monotonicity_check(ctx, lmax, slack=None):
    """Tr[W_1 Q^l] for l = 0..lmax; raises if the sequence ever increases."""
    ctx.require_exact()
    slack = sim_settings.MONOTONICITY_SLACK if slack is None else slack
    values = []
    current = np.eye(ctx.dim, dtype=complex)
    for _ in range(lmax + 1):
        values.append(float(np.einsum('ab,ba->', ctx.w1, current).real))
        current = current @ ctx.q
    for ell in range(1, len(values)):
        if values[ell] > values[ell - 1] + slack:
            raise InvariantViolation(
                f"Tr[W_1 Q^l] increases from l={ell - 1} to l={ell}: {values[ell - 1]:.12g} -> {values[ell]:.12g}.",
                code='monotonicity',
            )
    return values


@dataclass(frozen=True)
class OrderingReport:
    w0_margin: float
    pw0p_margin: float
    q_margin: float
    tol: float

    @property
    def w0_holds(self):
        return self.w0_margin >= -self.tol

    @property
    def pw0p_holds(self):
        return self.pw0p_margin >= -self.tol

    @property
    def q_holds(self):
        return self.q_margin >= -self.tol

    @property
    def holds(self):
        return self.w0_holds and self.pw0p_holds and self.q_holds


def verify_appendix_b(ctx, w0=None, tol=None):
    """Margin eigenvalues of the three orderings

    (i)   W_0 <= 2^{n(S - chi + delta)} rho^(x)n
    (ii)  P W_0 P <= 2^{-n(chi - 2 delta)} P
    (iii) Q >= (1 - 2^{-n(chi - 2 delta)}) P

    ``w0`` replaces the context's W_0, with Q rebuilt from it.
    """
    ctx.require_exact()
    tol = sim_settings.TOL_PSD if tol is None else tol
    e = ctx.ensemble
    w0 = ctx.w0 if w0 is None else np.asarray(w0, dtype=complex)
    p = ctx.projector
    q = hermitize(p @ (np.eye(ctx.dim) - w0) @ p)
    scale = 2.0 ** (-ctx.n * ctx.chi_eff)
    return OrderingReport(
        w0_margin=psd_margin(w0, 2.0 ** (ctx.n * (e.entropy - e.chi + ctx.delta)) * tensor_power(e.average, ctx.n)),
        pw0p_margin=psd_margin(hermitize(p @ w0 @ p), scale * p),
        q_margin=psd_margin((1.0 - scale) * p, q),
        tol=tol,
    )


def pgm_reference_bound(epsilon, N, n, chi_eff):
    """4 epsilon + (N - 1) 2^{-n chi_eff}, the classic square-root measurement estimate."""
    return 4.0 * epsilon + (N - 1) * 2.0 ** (-n * chi_eff)


@dataclass(frozen=True)
class EpsilonReport:
    avg_atypical_mass: float
    conditional_atypical_mass: float
    conditional_stderr: float = 0.0
    f0_gap: float | None = None

    @property
    def epsilon(self):
        return max(self.avg_atypical_mass, self.conditional_atypical_mass)


def epsilon_report(e, n, delta, ctx=None, mode='exact', samples=1000, rng=None):
    conditional = atypical_mass_conditional(e, n, delta, mode=mode, samples=samples, rng=rng)
    f0_gap = None
    if ctx is not None and ctx.exact:
        f0_gap = min(max(1.0 - f_z(ctx, 0), 0.0), 1.0)
    return EpsilonReport(
        avg_atypical_mass=atypical_mass_average(e, n, delta),
        conditional_atypical_mass=conditional.value,
        conditional_stderr=conditional.stderr,
        f0_gap=f0_gap,
    )


@dataclass(frozen=True)
class BoundReport:
    n: int
    delta: float
    N: int
    rate: float
    chi_eff: float
    f: tuple
    A_exact: float
    A_expansion: float | None
    A_lower: float
    success_lower_bound: float
    log_Y: float
    verdict: str
    vacuous: bool
    ordering: OrderingReport
    monotonicity: tuple
    avg_err_exact: float | None = None
    avg_err_mc: ErrorEstimate | None = None


def build_bound_report(ctx, N, zmax=4, lmax=None, with_exact_error=True, mc_codes=0, seed=None):
    """Every quantity of the bound chain for one context and code size."""
    ctx.require_exact()
    e = ctx.ensemble
    expandable = N <= sim_settings.EXPANSION_MAX_N
    f_values = f_sequence(ctx, max(zmax, N - 1) if expandable else zmax)
    bound = sequential_success_lower_bound(ctx, N)
    rate = rate_of(N, ctx.n)
    expansion = expansion_A(f_values, N) if expandable else None
    log_y = log_y_threshold(2.0 ** max(ctx.chi_eff, 0.0), 2.0 ** rate, ctx.n)
    avg_mc = None
    if mc_codes:
        avg_mc = average_error_mc(e, ctx.n, ctx.delta, N, mc_codes, make_rng(seed), cache=ctx.cache)
    return BoundReport(
        n=ctx.n,
        delta=ctx.delta,
        N=N,
        rate=rate,
        chi_eff=ctx.chi_eff,
        f=tuple(f_values[:zmax + 1]),
        A_exact=bound.A_exact,
        A_expansion=expansion,
        A_lower=bound.A_lower,
        success_lower_bound=bound.certified,
        log_Y=log_y,
        verdict=rate_verdict(e.chi, ctx.delta, rate),
        vacuous=ctx.vacuous,
        ordering=verify_appendix_b(ctx),
        monotonicity=tuple(monotonicity_check(ctx, N - 1 if lmax is None else lmax)),
        avg_err_exact=average_error_exact(ctx, N) if with_exact_error else None,
        avg_err_mc=avg_mc,
    )
