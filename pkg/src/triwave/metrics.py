"""Figures of merit: overlaps, marginals, conversion rates, phase statistics.

Conventions used throughout:

* overlaps are amplitude-style, O = sqrt(<ref| rho_kept |ref>), so they live
  in [0, 1] alongside the conversion rates;
* the canonical phase distribution of a single-mode density matrix is
  p(phi) = (2 pi)^-1 sum_{n,m} exp(i (n - m) phi) rho_nm, and the phase
  sensitivity is the reciprocal peak likelihood delta_phi = 1 / max p.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .blocks import block_occupations
from .evolution import ThreeModeState

_MODE_AXIS = {"a": 0, "b": 1, "c": 2}


@dataclass
class ReducedDensityMatrix:
    """Single-mode (or mode-pair) marginal in the Fock basis."""

    mode: str
    matrix: np.ndarray

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10, eig_floor: float = -1e-10) -> None:
        """Check Hermiticity, unit trace, and positivity; raise on failure."""
        mat = self.matrix
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian, deviation {herm:.3e}")
        deficit = abs(self.trace() - 1.0)
        if deficit > trace_tol:
            raise ValueError(f"density matrix trace off by {deficit:.3e}")
        smallest = float(np.linalg.eigvalsh(mat)[0])
        if smallest < eig_floor:
            raise ValueError(f"density matrix has negative eigenvalue {smallest:.3e}")


def overlap_with_product(
    state: ThreeModeState,
    bra_a: np.ndarray | None = None,
    bra_b: np.ndarray | None = None,
    bra_c: np.ndarray | None = None,
    *,
    bra_ab: np.ndarray | None = None,
) -> float:
    """Overlap between a pure reference on the kept modes and the marginal.

    Each of bra_a, bra_b, bra_c is a 1-D amplitude vector, or None to sum
    that mode over its Fock basis (a partial trace).  bra_ab supplies a
    joint, possibly entangled, reference on the (a, b) pair instead of
    separate bra_a and bra_b; it is a 2-D array indexed [n_a, n_b].
    Returns sqrt(<ref| rho_kept |ref>) without materializing rho.
    Amplitudes beyond a bra's length contribute nothing.
    """
    if bra_ab is not None and (bra_a is not None or bra_b is not None):
        raise ValueError("bra_ab replaces bra_a and bra_b; do not pass both")
    if bra_ab is not None:
        bra_ab = np.asarray(bra_ab, dtype=complex)
        if bra_ab.ndim != 2:
            raise ValueError("bra_ab must be a 2-D array indexed [n_a, n_b]")

    na_max, nb_max, nc_max = state.mode_support()
    radix = (na_max + 1, nb_max + 1, nc_max + 1)

    keys_parts: list[np.ndarray] = []
    weight_parts: list[np.ndarray] = []
    for index, vec in state.blocks.items():
        n_a, n_b, n_c = block_occupations(index)
        w = np.asarray(vec, dtype=complex).copy()
        key = np.zeros(len(vec), dtype=np.int64)
        if bra_ab is not None:
            w *= _pair_bra_factor(bra_ab, n_a, n_b)
        else:
            if bra_a is None:
                key = key * radix[0] + n_a
            else:
                w *= _bra_factor(bra_a, n_a)
            if bra_b is None:
                key = key * radix[1] + n_b
            else:
                w *= _bra_factor(bra_b, n_b)
        if bra_c is None:
            key = key * radix[2] + n_c
        else:
            w *= _bra_factor(bra_c, n_c)
        keys_parts.append(key)
        weight_parts.append(w)

    keys = np.concatenate(keys_parts)
    weights = np.concatenate(weight_parts)
    uniq, inverse = np.unique(keys, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=complex)
    np.add.at(sums, inverse, weights)
    return float(np.sqrt(max(0.0, float(np.sum(np.abs(sums) ** 2)))))


def reduce_mode_c(state: ThreeModeState, cutoff: int | None = None) -> ReducedDensityMatrix:
    """Partial trace over modes a and b, returning the pump-mode marginal.

    cutoff defaults to the structural mode-c support of the state; a
    smaller value is refused rather than silently dropping population.
    """
    _, _, nc_max = state.mode_support()
    if cutoff is None:
        cutoff = nc_max
    elif cutoff < nc_max:
        raise ValueError(f"cutoff {cutoff} below mode-c support {nc_max}")
    pair = _mode_pair_matrix(state, cutoff + 1)
    rho = pair.T @ pair.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return ReducedDensityMatrix(mode="c", matrix=rho)


def mean_photon(state: ThreeModeState, mode: str) -> float:
    """Mean occupation of one mode, 'a', 'b', or 'c'."""
    axis = _MODE_AXIS.get(mode)
    if axis is None:
        raise ValueError(f"mode must be one of 'a', 'b', 'c', got {mode!r}")
    total = 0.0
    for index, vec in state.blocks.items():
        occ = block_occupations(index)[axis]
        total += float(np.sum(np.abs(vec) ** 2 * occ))
    return total


def conversion_rate_down(state_out: ThreeModeState, pump_energy: float) -> float:
    """Fraction of pump energy converted to signal and idler photons."""
    if pump_energy <= 0.0:
        raise ValueError("pump energy must be positive")
    pairs = 0.5 * (mean_photon(state_out, "a") + mean_photon(state_out, "b"))
    return pairs / pump_energy


def conversion_rate_up(state_out: ThreeModeState, twin_beam_energy: float) -> float:
    """Fraction of twin-beam energy recombined into the output mode."""
    if twin_beam_energy <= 0.0:
        raise ValueError("twin-beam energy must be positive")
    return 2.0 * mean_photon(state_out, "c") / twin_beam_energy


def purity(rho: ReducedDensityMatrix) -> float:
    """Tr rho^2 of a marginal."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def phase_distribution(rho: ReducedDensityMatrix, grid_points: int = 1024) -> np.ndarray:
    """Canonical phase distribution sampled on a uniform grid over [0, 2 pi).

    Needs at least 256 grid points; the Riemann sum over the grid equals
    the trace whenever the grid is finer than the matrix dimension.
    """
    if grid_points < 256:
        raise ValueError(f"phase grid needs at least 256 points, got {grid_points}")
    phis = _phase_grid(grid_points)
    sums = _diagonal_sums(rho.matrix)
    return _cosine_profile(sums, phis) / (2.0 * np.pi)


def reciprocal_peak_likelihood(rho: ReducedDensityMatrix, grid_points: int = 1024) -> float:
    """Phase sensitivity 1 / max p(phi).

    The grid maximum is refined by a local quadratic fit through the best
    point and its two neighbours (periodic).
    """
    p = phase_distribution(rho, grid_points)
    best = int(np.argmax(p))
    left = p[(best - 1) % len(p)]
    right = p[(best + 1) % len(p)]
    _, peak = _refine_peak(float(left), float(p[best]), float(right))
    if peak <= 0.0:
        raise ValueError("phase distribution has no positive peak")
    return 1.0 / peak


def matched_pcs_overlap(state: ThreeModeState, phase_grid: int = 1024) -> tuple[float, complex]:
    """Best overlap with a phase-coherent state matched to the output energy.

    The modulus of the reference parameter lam is fixed by the mean output
    photon number, |lam|^2 = N / (N + 1); its phase is taken at the maximum
    of the overlap over a uniform grid of phase_grid points, refined
    quadratically.  Returns (overlap, lam).  For a vacuum output mode the
    phase is undefined and lam = 0 is returned.
    """
    if phase_grid < 256:
        raise ValueError(f"phase grid needs at least 256 points, got {phase_grid}")
    n_bar = mean_photon(state, "c")
    if n_bar == 0.0:
        overlap = overlap_with_product(state, bra_c=np.ones(1, dtype=complex))
        return overlap, 0.0 + 0.0j
    mod = float(np.sqrt(n_bar / (1.0 + n_bar)))
    _, _, nc_max = state.mode_support()
    pair = _mode_pair_matrix(state, nc_max + 1)
    weights = np.sqrt(1.0 - mod**2) * mod ** np.arange(nc_max + 1)
    weighted = pair * weights[np.newaxis, :]
    sums = _row_autocorrelations(weighted)
    return _best_phase_overlap(sums, mod, phase_grid)


def matched_pcs_overlap_rho(rho: ReducedDensityMatrix, phase_grid: int = 1024) -> tuple[float, complex]:
    """matched_pcs_overlap for an output-mode density matrix.

    Used to score mixed outputs such as the chained two-stage pipeline.
    """
    if phase_grid < 256:
        raise ValueError(f"phase grid needs at least 256 points, got {phase_grid}")
    mat = rho.matrix
    occ = np.arange(mat.shape[0])
    n_bar = float(np.real(np.diag(mat)) @ occ)
    if n_bar == 0.0:
        return float(np.sqrt(max(0.0, mat[0, 0].real))), 0.0 + 0.0j
    mod = float(np.sqrt(n_bar / (1.0 + n_bar)))
    weights = np.sqrt(1.0 - mod**2) * mod**occ
    weighted = weights[:, np.newaxis] * mat * weights[np.newaxis, :]
    sums = _diagonal_sums(weighted)
    return _best_phase_overlap(sums, mod, phase_grid)


def _best_phase_overlap(sums: np.ndarray, mod: float, phase_grid: int) -> tuple[float, complex]:
    """Maximize t_0 + 2 Re sum_d t_d exp(-i d theta) over the phase grid."""
    thetas = _phase_grid(phase_grid)
    profile = _cosine_profile(sums, -thetas)
    best = int(np.argmax(profile))
    left = profile[(best - 1) % phase_grid]
    right = profile[(best + 1) % phase_grid]
    step = 2.0 * np.pi / phase_grid
    shift, _ = _refine_peak(float(left), float(profile[best]), float(right))
    theta = float(thetas[best] + shift * step)
    d = np.arange(1, len(sums))
    value = float(sums[0].real)
    if len(sums) > 1:
        value += float(2.0 * np.real(np.sum(sums[1:] * np.exp(-1j * d * theta))))
    overlap = float(np.sqrt(min(1.0, max(0.0, value))))
    return overlap, mod * complex(np.exp(1j * theta))


def _mode_pair_matrix(state: ThreeModeState, nc_dim: int) -> np.ndarray:
    """Amplitudes arranged as rows over distinct (n_a, n_b) pairs, columns n_c."""
    na_max, nb_max, _ = state.mode_support()
    keys_parts, col_parts, val_parts = [], [], []
    for index, vec in state.blocks.items():
        n_a, n_b, n_c = block_occupations(index)
        keys_parts.append(n_a * (nb_max + 1) + n_b)
        col_parts.append(n_c)
        val_parts.append(np.asarray(vec, dtype=complex))
    keys = np.concatenate(keys_parts)
    cols = np.concatenate(col_parts)
    vals = np.concatenate(val_parts)
    uniq, inverse = np.unique(keys, return_inverse=True)
    out = np.zeros((len(uniq), nc_dim), dtype=complex)
    out[inverse, cols] = vals  # each Fock triple occurs exactly once
    return out


def _row_autocorrelations(mat: np.ndarray) -> np.ndarray:
    """sum over rows of sum_m row[m + d] conj(row[m]), for lags d >= 0."""
    ncols = mat.shape[1]
    length = next_fast_len(2 * ncols - 1)
    spectra = np.fft.fft(mat, n=length, axis=1)
    power = np.sum(np.abs(spectra) ** 2, axis=0)
    corr = np.fft.ifft(power)
    return corr[:ncols]


def _diagonal_sums(matrix: np.ndarray) -> np.ndarray:
    """t_d = sum_m matrix[m + d, m] for d = 0 .. dim - 1."""
    dim = matrix.shape[0]
    return np.array([np.trace(matrix, offset=-d) for d in range(dim)])


def _cosine_profile(sums: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Evaluate t_0 + 2 Re sum_{d>=1} t_d exp(i d phi) on the given phases."""
    if len(sums) == 1:
        return np.full(len(phis), float(sums[0].real))
    d = np.arange(1, len(sums))
    osc = np.exp(1j * np.outer(d, phis))
    return sums[0].real + 2.0 * np.real(sums[1:] @ osc)


def _phase_grid(points: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(points) / points


def _refine_peak(left: float, centre: float, right: float) -> tuple[float, float]:
    """Parabolic peak through three equally spaced samples.

    Returns (offset, value) with the offset in units of the sample spacing,
    clamped to [-1/2, 1/2]; degenerate curvature falls back to the centre.
    """
    denom = left - 2.0 * centre + right
    if denom >= 0.0:
        return 0.0, centre
    shift = 0.5 * (left - right) / denom
    shift = float(np.clip(shift, -0.5, 0.5))
    value = centre - 0.25 * (left - right) * shift
    return shift, value


def _bra_factor(bra: np.ndarray, idx: np.ndarray) -> np.ndarray:
    bra = np.asarray(bra, dtype=complex)
    out = np.zeros(idx.shape, dtype=complex)
    mask = idx < len(bra)
    out[mask] = np.conj(bra[idx[mask]])
    return out


def _pair_bra_factor(bra_ab: np.ndarray, n_a: np.ndarray, n_b: np.ndarray) -> np.ndarray:
    out = np.zeros(n_a.shape, dtype=complex)
    mask = (n_a < bra_ab.shape[0]) & (n_b < bra_ab.shape[1])
    out[mask] = np.conj(bra_ab[n_a[mask], n_b[mask]])
    return out
