"""Quantum Fisher information for twirled two-copy states.

Two routes are provided and cross-checked everywhere: the coefficient route
(a signed sum over swap-mask overlaps and their theta derivatives) and the
spectrum route (eigenvalue perturbation of the dense invariant state).  Both
exclude terms whose denominator vanishes; closed forms are available for
the GHZ and product probes and for one-site / m-site encodings on probes
that factorize between encoded and unencoded sites.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .states import IE, RE, EncodedPair
from .tensor import hamming
from .twirl import (
    LuiState,
    global_overlap,
    global_overlap_derivative,
    lui_coefficient_derivatives,
    lui_coefficients,
    overlap_coefficient,
    overlap_derivative,
)

DEFAULT_STEP = 1e-5
DENOM_FLOOR = 1e-10
EIGENVALUE_FLOOR = 1e-12
NEGATIVE_DENOM_ABORT = -1e-8


@dataclass(frozen=True)
class SpectrumEntry:
    """One eigenvalue family of the invariant state, labelled by the
    antisymmetric-site mask; `degeneracy` counts the repeated eigenvectors."""

    mask: int
    eigenvalue: float
    degeneracy: int


@dataclass(eq=False)
class FisherResult:
    theta: float
    value: float
    method: str
    derivative_step: float
    dropped: tuple = field(default_factory=tuple)


def walsh_transform(values) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform: out[b] = sum_a (-1)^(popcount(a&b)) v[a]."""
    out = np.array(values, dtype=float, copy=True)
    n = out.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        out = out.reshape(-1, 2 * h)
        left = out[:, :h].copy()
        right = out[:, h:].copy()
        out[:, :h] = left + right
        out[:, h:] = left - right
        out = out.reshape(n)
        h *= 2
    return out


def lui_spectrum(lui: LuiState) -> list[SpectrumEntry]:
    """Eigenvalues of the dense invariant state, indexed by the mask of
    antisymmetric sites, with combinatorial degeneracies."""
    n, d = lui.n_sites, lui.layout.local_dim
    signed = walsh_transform(lui.coeffs)
    sym_deg = d * (d + 1) // 2
    asym_deg = d * (d - 1) // 2
    base = 1.0 / (d * d - 1.0) ** n
    entries = []
    for b in range(1 << n):
        k = hamming(b)
        lam = base * ((d - 1.0) / d) ** (n - k) * ((d + 1.0) / d) ** k * signed[b]
        entries.append(SpectrumEntry(b, float(lam), sym_deg ** (n - k) * asym_deg**k))
    return entries


def _ratio_sum(den, num, *, denom_floor=DENOM_FLOOR, second_derivs=None):
    """Sum of num^2/den over mask families with the vanishing-denominator rule.

    A family whose denominator and numerator both sit under the floor is a
    0/0 limit: it is dropped (and reported) unless `second_derivs` supplies
    the second derivative of the denominator, in which case the limit value
    2 * den'' is used instead.
    """
    num_floor = math.sqrt(denom_floor)
    total = 0.0
    dropped = []
    for b in range(len(den)):
        db, nb = float(den[b]), float(num[b])
        if db < NEGATIVE_DENOM_ABORT:
            raise RuntimeError(f"denominator {db} at mask {b:#x} is negative: state is not PSD")
        if abs(db) < denom_floor:
            if abs(nb) >= num_floor:
                raise RuntimeError(
                    f"vanishing denominator with non-vanishing numerator {nb} at mask {b:#x}"
                )
            if second_derivs is not None:
                total += 2.0 * float(second_derivs[b])
            else:
                dropped.append(b)
        elif db < 0.0:
            raise RuntimeError(f"denominator {db} at mask {b:#x} is negative: state is not PSD")
        else:
            total += nb * nb / db
    return total, tuple(dropped)


def fisher_from_coefficients(coeffs, dcoeffs, *, denom_floor=DENOM_FLOOR, second_dcoeffs=None):
    """Information of the invariant state from overlap coefficients and their
    derivatives: (1/2^N) times the ratio sum over all signed coefficient sums."""
    den = walsh_transform(coeffs)
    num = walsh_transform(dcoeffs)
    second = None if second_dcoeffs is None else walsh_transform(second_dcoeffs)
    total, dropped = _ratio_sum(den, num, denom_floor=denom_floor, second_derivs=second)
    return total / len(den), dropped


def _coeffs_and_derivative(pair_fn, theta: float, step: float):
    pair = pair_fn(theta)
    coeffs = lui_coefficients(pair).coeffs
    if step == 0.0:
        dcoeffs = lui_coefficient_derivatives(pair)
    elif step > 0.0:
        cp = lui_coefficients(pair_fn(theta + step)).coeffs
        cm = lui_coefficients(pair_fn(theta - step)).coeffs
        dcoeffs = (cp - cm) / (2.0 * step)
    else:
        raise ValueError("step must be positive, or 0 for the exact derivative")
    return pair, coeffs, dcoeffs


def qfi_re_general(pair_fn, theta: float, step: float = DEFAULT_STEP) -> FisherResult:
    """Information of the locally twirled reversed-encoding state."""
    pair, coeffs, dcoeffs = _coeffs_and_derivative(pair_fn, theta, step)
    if pair.mode != RE:
        raise ValueError("qfi_re_general expects reversed-encoding pairs")
    value, dropped = fisher_from_coefficients(coeffs, dcoeffs)
    return FisherResult(theta, value, "re_general", step, dropped)


def qfi_ie_general(pair_fn, theta: float, step: float = DEFAULT_STEP) -> FisherResult:
    """Information of the locally twirled identical-encoding state (purity terms)."""
    pair, coeffs, dcoeffs = _coeffs_and_derivative(pair_fn, theta, step)
    if pair.mode != IE:
        raise ValueError("qfi_ie_general expects identical-encoding pairs")
    value, dropped = fisher_from_coefficients(coeffs, dcoeffs)
    return FisherResult(theta, value, "ie_general", step, dropped)


def qfi_from_spectrum(spectrum_fn, theta: float, step: float = DEFAULT_STEP,
                      eigenvalue_floor: float = EIGENVALUE_FLOOR) -> FisherResult:
    """Degeneracy-weighted sum of (d lambda)^2 / lambda over the spectrum,
    with central finite differences; families below the floor are excluded."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    here = spectrum_fn(theta)
    above = {e.mask: e.eigenvalue for e in spectrum_fn(theta + step)}
    below = {e.mask: e.eigenvalue for e in spectrum_fn(theta - step)}
    total = 0.0
    dropped = []
    for entry in here:
        dlam = (above[entry.mask] - below[entry.mask]) / (2.0 * step)
        if entry.eigenvalue < eigenvalue_floor:
            dropped.append(entry.mask)
            continue
        total += entry.degeneracy * dlam * dlam / entry.eigenvalue
    return FisherResult(theta, total, "from_spectrum", step, tuple(dropped))


def f0(psi0, h) -> float:
    """Information ceiling of the untwirled two-copy pure product:
    8 * variance of the generator in the probe."""
    mat = h.dense_matrix()
    amps = psi0.amplitudes
    h_psi = mat @ amps
    mean = np.vdot(amps, h_psi).real
    second = np.vdot(h_psi, h_psi).real
    return float(8.0 * (second - mean * mean))


def qfi_one_site_closed(tr_rho_sq: float, tr_zrz_rho: float, theta: float) -> float:
    """One-encoded-site closed form from the probe's purity terms.

    Exact when the probe factorizes between the encoded site and the rest.
    """
    t = tr_rho_sq - tr_zrz_rho
    c = math.cos(theta)
    s = math.sin(theta)
    return 4.0 * c * c * t / (2.0 - s * s * t)


def _submasks(support: int) -> list[int]:
    """Full-register masks for every subset of the support, subset-bit order."""
    bits = [i for i in range(support.bit_length()) if (support >> i) & 1]
    out = []
    for sub in range(1 << len(bits)):
        mask = 0
        for j, site in enumerate(bits):
            if (sub >> j) & 1:
                mask |= 1 << site
        out.append(mask)
    return out


def qfi_m_site_closed(pair: EncodedPair, step: float = DEFAULT_STEP) -> float:
    """Restricted sum over encoded-site masks only, prefactor 1/2^m.

    Exact when the probe factorizes between the encoded and unencoded sites;
    entanglement across that cut carries extra information this restricted
    sum does not see.
    """
    if pair.mode != RE:
        raise ValueError("the restricted sum is defined for reversed encoding")
    support = pair.hamiltonian.support
    if support == 0:
        raise ValueError("the generator has empty support")
    masks = _submasks(support)
    coeffs = np.array([overlap_coefficient(pair, m) for m in masks])
    if step == 0.0:
        dcoeffs = np.array([overlap_derivative(pair, m) for m in masks])
    else:
        up = pair.at(pair.theta + step)
        dn = pair.at(pair.theta - step)
        cu = np.array([overlap_coefficient(up, m) for m in masks])
        cd = np.array([overlap_coefficient(dn, m) for m in masks])
        dcoeffs = (cu - cd) / (2.0 * step)
    value, _ = fisher_from_coefficients(coeffs, dcoeffs)
    return float(value)


def qfi_product_closed(n: int, theta: float) -> float:
    """Closed form for the product-plus probe under the half-weight Z sum."""
    c = math.cos(theta) ** 2
    return 4.0 * n * c / (1.0 + c)


def qfi_ghz_closed(n: int, theta: float) -> float:
    """Closed form for the GHZ probe under the half-weight Z sum."""
    s = math.sin(n * theta) ** 2
    c = math.cos(n * theta) ** 2
    return 2.0 * n * n * (1.0 - s / (c + 2.0 ** (n - 1)))


def qfi_gui_ghz_closed(n: int, theta: float) -> float:
    """Globally twirled GHZ closed form: 4 n^2 cos^2(n t) / (1 + cos^2(n t))."""
    c = math.cos(n * theta) ** 2
    return 4.0 * n * n * c / (1.0 + c)


def qfi_gui_re(pair: EncodedPair, step: float = DEFAULT_STEP) -> float:
    """Information of the globally twirled reversed-encoding state:
    (ds)^2 / (1 - s^2) with the stationary point resolved to the untwirled
    ceiling."""
    if pair.mode != RE:
        raise ValueError("qfi_gui_re expects reversed-encoding pairs")
    s = global_overlap(pair)
    if step == 0.0:
        ds = global_overlap_derivative(pair)
    elif step > 0.0:
        ds = (global_overlap(pair.at(pair.theta + step))
              - global_overlap(pair.at(pair.theta - step))) / (2.0 * step)
    else:
        raise ValueError("step must be positive, or 0 for the exact derivative")
    denom = 1.0 - s * s
    if denom < EIGENVALUE_FLOOR:
        if abs(ds) >= math.sqrt(EIGENVALUE_FLOOR):
            raise RuntimeError("overlap pinned at 1 with non-vanishing derivative")
        return f0(pair.initial, pair.hamiltonian)
    return float(ds * ds / denom)
