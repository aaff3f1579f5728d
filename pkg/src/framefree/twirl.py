"""Two-copy twirling layer.

The sufficient statistic of a locally twirled two-copy product is the vector
of swap-mask overlaps ``c_a = Tr(rho_{+,a} rho_{-,a})`` over all 2^N site
masks, where ``rho_{.,a}`` is the reduction onto the sites selected by ``a``.
This module computes those coefficients (numerically for arbitrary pairs,
in closed form for GHZ and product probes), assembles the dense invariant
states they describe, and provides Monte-Carlo twirling plus collective
rotation as independent oracles.
"""

import math
from dataclasses import dataclass

import numpy as np

from .states import IE, RE, MODES, EncodedPair
from .tensor import (
    DensityOperator,
    QuditLayout,
    haar_unitary,
    hamming,
    is_unitary,
    kron,
    local_unitary,
    ptrace_matrix,
    swap_operator,
    trace_product,
)

IMAG_TOL = 1e-10
COEFF_RANGE_TOL = 1e-10


@dataclass(eq=False)
class LuiState:
    """Local-unitary-invariant state: 2^N real swap-mask overlap coefficients."""

    layout: QuditLayout
    coeffs: np.ndarray
    mode: str
    theta: float

    def __post_init__(self):
        if self.layout.copies != 1:
            raise ValueError("LuiState carries the single-copy layout")
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (1 << self.layout.n_sites,):
            raise ValueError(f"expected {1 << self.layout.n_sites} coefficients")
        self.coeffs = c

    @property
    def n_sites(self) -> int:
        return self.layout.n_sites


@dataclass(eq=False)
class GuiState:
    """Global-unitary-invariant state: a single swap expectation value."""

    layout: QuditLayout
    s_global: float
    theta: float

    def __post_init__(self):
        if not -COEFF_RANGE_TOL <= self.s_global <= 1.0 + COEFF_RANGE_TOL:
            raise ValueError(f"swap expectation {self.s_global} outside [0, 1]")


def _reduced(mat: np.ndarray, layout: QuditLayout, site_mask: int) -> np.ndarray:
    return ptrace_matrix(mat, layout.local_dim, layout.n_sites, site_mask)


def overlap_coefficient(pair: EncodedPair, site_mask: int) -> float:
    """Tr(rho_{+,a} rho_{-,a}) for the site mask a; the empty mask gives 1."""
    n = pair.layout.n_sites
    if site_mask < 0 or site_mask >= (1 << n):
        raise ValueError(f"site mask {site_mask:#x} out of range for {n} sites")
    if site_mask == 0:
        return 1.0
    rho_p = np.outer(pair.psi_plus.amplitudes, pair.psi_plus.amplitudes.conj())
    rho_m = np.outer(pair.psi_minus.amplitudes, pair.psi_minus.amplitudes.conj())
    val = trace_product(_reduced(rho_p, pair.layout, site_mask),
                        _reduced(rho_m, pair.layout, site_mask))
    if abs(val.imag) > IMAG_TOL:
        raise RuntimeError(f"overlap coefficient has imaginary part {val.imag}")
    return float(val.real)


def lui_coefficients(pair: EncodedPair) -> LuiState:
    """All 2^N overlap coefficients of the twirled two-copy product."""
    n = pair.layout.n_sites
    rho_p = np.outer(pair.psi_plus.amplitudes, pair.psi_plus.amplitudes.conj())
    rho_m = np.outer(pair.psi_minus.amplitudes, pair.psi_minus.amplitudes.conj())
    coeffs = np.empty(1 << n)
    coeffs[0] = 1.0
    for mask in range(1, 1 << n):
        val = trace_product(_reduced(rho_p, pair.layout, mask),
                            _reduced(rho_m, pair.layout, mask))
        if abs(val.imag) > IMAG_TOL:
            raise RuntimeError(f"coefficient {mask:#x} has imaginary part {val.imag}")
        if not -COEFF_RANGE_TOL <= val.real <= 1.0 + COEFF_RANGE_TOL:
            raise RuntimeError(f"coefficient {mask:#x} = {val.real} outside [0, 1]")
        coeffs[mask] = val.real
    return LuiState(pair.layout, coeffs, pair.mode, pair.theta)


def _pair_density_derivatives(pair: EncodedPair):
    """Densities of both copies and their exact theta derivatives."""
    h = pair.hamiltonian.dense_matrix()
    rho_p = np.outer(pair.psi_plus.amplitudes, pair.psi_plus.amplitudes.conj())
    rho_m = np.outer(pair.psi_minus.amplitudes, pair.psi_minus.amplitudes.conj())
    drho_p = -1j * (h @ rho_p - rho_p @ h)
    sign = 1.0 if pair.mode == IE else -1.0
    drho_m = sign * (-1j) * (h @ rho_m - rho_m @ h)
    return rho_p, rho_m, drho_p, drho_m


def overlap_derivative(pair: EncodedPair, site_mask: int) -> float:
    """Exact d/d(theta) of a single overlap coefficient."""
    if site_mask == 0:
        return 0.0
    rho_p, rho_m, drho_p, drho_m = _pair_density_derivatives(pair)
    lay = pair.layout
    val = trace_product(_reduced(drho_p, lay, site_mask), _reduced(rho_m, lay, site_mask))
    val += trace_product(_reduced(rho_p, lay, site_mask), _reduced(drho_m, lay, site_mask))
    if abs(val.imag) > IMAG_TOL:
        raise RuntimeError(f"overlap derivative has imaginary part {val.imag}")
    return float(val.real)


def lui_coefficient_derivatives(pair: EncodedPair) -> np.ndarray:
    """Exact theta derivatives of all 2^N overlap coefficients."""
    n = pair.layout.n_sites
    rho_p, rho_m, drho_p, drho_m = _pair_density_derivatives(pair)
    lay = pair.layout
    out = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        val = trace_product(_reduced(drho_p, lay, mask), _reduced(rho_m, lay, mask))
        val += trace_product(_reduced(rho_p, lay, mask), _reduced(drho_m, lay, mask))
        if abs(val.imag) > IMAG_TOL:
            raise RuntimeError(f"derivative {mask:#x} has imaginary part {val.imag}")
        out[mask] = val.real
    return out


# -- closed-form coefficient models (GHZ and product probes, 1/2-weight Z sum)


def ghz_coefficients(n: int, theta: float, mode: str = RE) -> np.ndarray:
    """GHZ-probe coefficients: 1 at the empty mask, 1/2 in between, and
    cos^2(n*theta) (reversed mode) at the full mask."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    c = np.full(1 << n, 0.5)
    c[0] = 1.0
    c[-1] = math.cos(n * theta) ** 2 if mode == RE else 1.0
    return c


def ghz_coefficient_derivatives(n: int, theta: float, mode: str = RE) -> np.ndarray:
    dc = np.zeros(1 << n)
    if mode == RE:
        dc[-1] = -n * math.sin(2.0 * n * theta)
    return dc


def ghz_coefficient_second_derivatives(n: int, theta: float, mode: str = RE) -> np.ndarray:
    ddc = np.zeros(1 << n)
    if mode == RE:
        ddc[-1] = -2.0 * n * n * math.cos(2.0 * n * theta)
    return ddc


def product_coefficients(n: int, theta: float, mode: str = RE) -> np.ndarray:
    """Product-plus-probe coefficients: cos(theta)^(2|a|) in reversed mode."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == IE:
        return np.ones(1 << n)
    ham = np.array([hamming(a) for a in range(1 << n)])
    return np.cos(theta) ** (2 * ham)


def product_coefficient_derivatives(n: int, theta: float, mode: str = RE) -> np.ndarray:
    if mode == IE:
        return np.zeros(1 << n)
    ham = np.array([hamming(a) for a in range(1 << n)])
    out = np.zeros(1 << n)
    nz = ham > 0
    out[nz] = -ham[nz] * math.sin(2.0 * theta) * np.cos(theta) ** (2 * ham[nz] - 2)
    return out


def product_coefficient_second_derivatives(n: int, theta: float, mode: str = RE) -> np.ndarray:
    if mode == IE:
        return np.zeros(1 << n)
    ham = np.array([hamming(a) for a in range(1 << n)])
    out = np.zeros(1 << n)
    nz = ham > 0
    k = ham[nz]
    out[nz] = -2.0 * k * math.cos(2.0 * theta) * np.cos(theta) ** (2 * k - 2)
    deep = ham > 1  # the second term carries a factor (2k - 2) and vanishes at k = 1
    k = ham[deep]
    out[deep] += (k * (2 * k - 2) * math.sin(2.0 * theta) * math.sin(theta)
                  * np.cos(theta) ** (2 * k - 3))
    return out


def ghz_lui(n: int, theta: float, mode: str = RE) -> LuiState:
    return LuiState(QuditLayout(n, 2, 1), ghz_coefficients(n, theta, mode), mode, theta)


def product_lui(n: int, theta: float, mode: str = RE) -> LuiState:
    return LuiState(QuditLayout(n, 2, 1), product_coefficients(n, theta, mode), mode, theta)


# -- dense assembly


def _lui_matrix(lui: LuiState) -> np.ndarray:
    """Dense two-copy matrix of the invariant state, without state validation."""
    lay2 = lui.layout.two_copy()
    n, d = lay2.n_sites, lay2.local_dim
    masks = np.arange(1 << n)
    pc = np.array([hamming(int(m)) for m in masks])
    xor_weight = pc[np.bitwise_xor.outer(masks, masks)]
    weights = ((-1.0 / d) ** xor_weight) @ lui.coeffs
    acc = np.zeros((lay2.dim, lay2.dim), dtype=complex)
    for m in masks:
        acc += weights[m] * swap_operator(int(m), lay2)
    return acc / (d * d - 1.0) ** n


def lui_density(lui: LuiState) -> DensityOperator:
    """Assemble the dense invariant state described by the coefficients."""
    return DensityOperator(lui.layout.two_copy(), _lui_matrix(lui))


def global_overlap(pair: EncodedPair) -> float:
    """Tr(rho_+ rho_-) = |<psi_+|psi_->|^2 for pure copies."""
    return float(abs(np.vdot(pair.psi_plus.amplitudes, pair.psi_minus.amplitudes)) ** 2)


def global_overlap_derivative(pair: EncodedPair) -> float:
    """Exact d/d(theta) of the full-state overlap."""
    if pair.mode == IE:
        return 0.0
    h = pair.hamiltonian.dense_matrix()
    g = np.vdot(pair.psi_plus.amplitudes, pair.psi_minus.amplitudes)
    dg = 2j * np.vdot(pair.psi_plus.amplitudes, h @ pair.psi_minus.amplitudes)
    return float(2.0 * (np.conj(g) * dg).real)


def gui_state(pair: EncodedPair) -> GuiState:
    """Globally twirled two-copy state: only the full swap expectation survives."""
    return GuiState(pair.layout, global_overlap(pair), pair.theta)


def gui_density(state: GuiState) -> DensityOperator:
    lay2 = state.layout.two_copy()
    dn = state.layout.single_copy_dim
    s = state.s_global
    swap_full = swap_operator((1 << state.layout.n_sites) - 1, lay2)
    mat = (1.0 - s / dn) * np.eye(lay2.dim) + (s - 1.0 / dn) * swap_full
    return DensityOperator(lay2, mat / (dn * dn - 1.0))


# -- Monte-Carlo and rotation oracles


def pair_product_density(pair: EncodedPair) -> DensityOperator:
    """Dense two-copy product state, copy A in the low slots."""
    lay2 = pair.layout.two_copy()
    rho_p = np.outer(pair.psi_plus.amplitudes, pair.psi_plus.amplitudes.conj())
    rho_m = np.outer(pair.psi_minus.amplitudes, pair.psi_minus.amplitudes.conj())
    return DensityOperator(lay2, kron(rho_m, rho_p))


def mc_local_twirl(pair: EncodedPair, samples: int, rng: np.random.Generator) -> DensityOperator:
    """Empirical local twirl: average per-site Haar rotations applied
    collectively to both copies.  Converges to lui_density(lui_coefficients)."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    lay = pair.layout
    lay2 = lay.two_copy()
    n, d = lay.n_sites, lay.local_dim
    acc = np.zeros((lay2.dim, lay2.dim), dtype=complex)
    for _ in range(samples):
        rot = local_unitary([haar_unitary(d, rng) for _ in range(n)])
        a = rot @ pair.psi_plus.amplitudes
        b = rot @ pair.psi_minus.amplitudes
        full = np.kron(b, a)
        acc += np.outer(full, full.conj())
    acc /= samples
    acc = (acc + acc.conj().T) / 2.0
    acc /= acc.trace().real
    return DensityOperator(lay2, acc)


def g_twirl_apply(rho: DensityOperator, rotations) -> DensityOperator:
    """One realization of collective frame misalignment: the same per-site
    rotation hits both copies of each site."""
    lay = rho.layout
    if lay.copies != 2:
        raise ValueError("collective rotations act on two-copy states")
    rotations = [np.asarray(u, dtype=complex) for u in rotations]
    if len(rotations) != lay.n_sites:
        raise ValueError("one rotation per site expected")
    for u in rotations:
        if u.shape != (lay.local_dim, lay.local_dim) or not is_unitary(u):
            raise ValueError("rotations must be local_dim x local_dim unitaries")
    single = local_unitary(rotations)
    w = np.kron(single, single)
    return DensityOperator(lay, w @ rho.matrix @ w.conj().T)
