"""Block frame operators built from the 1-D transform designs.

A frame operator maps an M x M block to a coefficient vector.  Four families
are provided:

* ``dadcf`` -- the directional analytic frame: a cosine branch and a sine
  branch are applied separably, coefficients with k_v = 0 or k_h = 0 are kept
  per branch (scaled by 1/sqrt(2)) and the remaining (k_v, k_h) pairs are
  mixed by the butterfly (c +/- s)/2, producing two oriented coefficients per
  frequency pair.  The resulting 2M^2 x M^2 operator F satisfies F^T F = I.
* ``rdadcf`` -- same construction with the regularity-constrained sine
  transform; rows with k_v or k_h in {0, 1} are non-directional and kept
  scaled, pairs with k_v, k_h >= 2 are mixed.
* ``pyramid`` -- the block mean is split off as a separate lowpass
  coefficient and the ``dadcf`` operator is applied to the mean-removed
  block; synthesis is the exact left inverse.
* separable baselines -- plain 2-D DCT/DHT (orthonormal) and the unitary DFT
  realized as a real operator by stacking real and imaginary parts (the
  stack is Parseval as-is because the transform is unitary).

Coefficient ordering (two-branch families): scaled cosine coefficients in
raster (k_v, k_h) order, then scaled sine, then +1-oriented mixed outputs,
then -1-oriented, each raster ordered.  ``subbands`` records the mapping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import (
    DCT,
    DFT,
    DHT,
    build_dct,
    build_dft,
    build_dht,
    build_dst,
    build_rdst,
)

__all__ = [
    "Subband",
    "Atom2D",
    "SpectrumSample",
    "FrameOperator",
    "build_dadcf",
    "build_rdadcf",
    "build_pyramid",
    "build_separable",
    "build_frame",
    "FRAME_FAMILIES",
    "atom",
    "directional_cosine_atom",
    "row_spectrum",
    "analyticity_ratio",
]

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

FRAME_FAMILIES = ("dadcf", "rdadcf", "pyramid", "dct", "dft", "dht")


@dataclass(frozen=True)
class Subband:
    index: int
    branch: str               # "cos" | "sin" | "mixed" | "lowpass"
    k_v: int
    k_h: int
    orientation: int | None   # +1 | -1 for mixed outputs, else None

    def to_json_dict(self):
        return {
            "index": self.index,
            "branch": self.branch,
            "k_v": self.k_v,
            "k_h": self.k_h,
            "orientation": self.orientation,
        }


@dataclass(frozen=True)
class Atom2D:
    grid: np.ndarray
    branch: str
    k_v: int
    k_h: int
    orientation: int | None


@dataclass(frozen=True)
class SpectrumSample:
    omega: np.ndarray
    magnitude: np.ndarray


def _flat(M, k_v, k_h):
    # column-major index of coefficient (k_v, k_h) in a vectorized block
    return M * k_h + k_v


def _vec_blocks(mats):
    # (L, M, M) coefficient matrices -> (L, M*M) column-major vectors
    L, M = mats.shape[0], mats.shape[1]
    return mats.transpose(0, 2, 1).reshape(L, M * M)


def _unvec_blocks(vecs, M):
    L = vecs.shape[0]
    return vecs.reshape(L, M, M).transpose(0, 2, 1)


class FrameOperator:
    """Base interface: block analysis, true adjoint, and synthesis.

    ``analyze_blocks`` / ``adjoint_blocks`` accept (L, M, M) stacks or a
    single (M, M) block.  ``synthesize_blocks`` equals the adjoint for the
    Parseval families and the exact left inverse for the pyramid.
    """

    family = None

    def __init__(self, block_size, n_out, subbands):
        self.block_size = block_size
        self.n_out = n_out
        self.subbands = tuple(subbands)
        self._analysis = None

    # -- public API --------------------------------------------------------

    @property
    def analysis(self):
        """Dense analysis matrix (n_out x M^2), built on first use."""
        if self._analysis is None:
            a = self._build_dense()
            a.setflags(write=False)
            self._analysis = a
        return self._analysis

    def analyze_blocks(self, blocks):
        blocks, squeeze = self._as_stack(blocks)
        out = self._analyze(blocks)
        return out[0] if squeeze else out

    def adjoint_blocks(self, coeffs):
        coeffs, squeeze = self._as_coeffs(coeffs)
        out = self._adjoint(coeffs)
        return out[0] if squeeze else out

    def synthesize_blocks(self, coeffs):
        coeffs, squeeze = self._as_coeffs(coeffs)
        out = self._synthesize(coeffs)
        return out[0] if squeeze else out

    def parseval_residual(self):
        """max |A^T A - I| over the dense analysis matrix."""
        a = self.analysis
        g = a.T @ a
        return float(np.max(np.abs(g - np.eye(self.block_size**2))))

    def subbands_json_dict(self):
        return {
            "family": self.family,
            "block_size": self.block_size,
            "n_out": self.n_out,
            "subbands": [s.to_json_dict() for s in self.subbands],
        }

    # -- internals ---------------------------------------------------------

    def _as_stack(self, blocks):
        blocks = np.asarray(blocks, dtype=np.float64)
        M = self.block_size
        if blocks.ndim == 2:
            if blocks.shape != (M, M):
                raise ValueError(f"expected ({M}, {M}) block, got {blocks.shape}")
            return blocks[None], True
        if blocks.ndim != 3 or blocks.shape[1:] != (M, M):
            raise ValueError(f"expected (L, {M}, {M}) stack, got {blocks.shape}")
        return blocks, False

    def _as_coeffs(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.ndim == 1:
            if coeffs.shape != (self.n_out,):
                raise ValueError(f"expected {self.n_out} coefficients, got {coeffs.shape}")
            return coeffs[None], True
        if coeffs.ndim != 2 or coeffs.shape[1] != self.n_out:
            raise ValueError(f"expected (L, {self.n_out}) coefficients, got {coeffs.shape}")
        return coeffs, False

    def _synthesize(self, coeffs):
        return self._adjoint(coeffs)

    def _analyze(self, blocks):
        raise NotImplementedError

    def _adjoint(self, coeffs):
        raise NotImplementedError

    def _build_dense(self):
        raise NotImplementedError


class _TwoBranchFrame(FrameOperator):
    """Cosine branch + sine branch with scaled and butterfly-mixed outputs."""

    def __init__(self, family, cos_tm, sin_tm, min_paired_k):
        M = cos_tm.size
        self.cos_tm = cos_tm
        self.sin_tm = sin_tm
        self._Fc = cos_tm.entries
        self._Fs = sin_tm.entries
        scaled = [
            (kv, kh)
            for kv in range(M)
            for kh in range(M)
            if kv < min_paired_k or kh < min_paired_k
        ]
        paired = [
            (kv, kh)
            for kv in range(min_paired_k, M)
            for kh in range(min_paired_k, M)
        ]
        n_s, n_p = len(scaled), len(paired)
        assert 2 * n_s + 2 * n_p == 2 * M * M, "subband bookkeeping is off"
        self._n_s, self._n_p = n_s, n_p
        self._scaled_idx = np.array([_flat(M, kv, kh) for kv, kh in scaled])
        self._pair_idx = np.array([_flat(M, kv, kh) for kv, kh in paired])
        subbands = []
        for branch in ("cos", "sin"):
            for kv, kh in scaled:
                subbands.append(Subband(len(subbands), branch, kv, kh, None))
        for orient in (1, -1):
            for kv, kh in paired:
                subbands.append(Subband(len(subbands), "mixed", kv, kh, orient))
        super().__init__(M, 2 * M * M, subbands)
        self.family = family

    def _branch_coeffs(self, blocks):
        c = _vec_blocks(self._Fc @ blocks @ self._Fc.T)
        s = _vec_blocks(self._Fs @ blocks @ self._Fs.T)
        return c, s

    def _analyze(self, blocks):
        c, s = self._branch_coeffs(blocks)
        n_s, n_p = self._n_s, self._n_p
        out = np.empty((blocks.shape[0], self.n_out))
        out[:, :n_s] = c[:, self._scaled_idx] * _INV_SQRT2
        out[:, n_s : 2 * n_s] = s[:, self._scaled_idx] * _INV_SQRT2
        cp = c[:, self._pair_idx]
        sp = s[:, self._pair_idx]
        out[:, 2 * n_s : 2 * n_s + n_p] = 0.5 * (cp + sp)
        out[:, 2 * n_s + n_p :] = 0.5 * (cp - sp)
        return out

    def _adjoint(self, coeffs):
        M = self.block_size
        n_s, n_p = self._n_s, self._n_p
        L = coeffs.shape[0]
        c = np.zeros((L, M * M))
        s = np.zeros((L, M * M))
        c[:, self._scaled_idx] = coeffs[:, :n_s] * _INV_SQRT2
        s[:, self._scaled_idx] = coeffs[:, n_s : 2 * n_s] * _INV_SQRT2
        zp = coeffs[:, 2 * n_s : 2 * n_s + n_p]
        zm = coeffs[:, 2 * n_s + n_p :]
        c[:, self._pair_idx] = 0.5 * (zp + zm)
        s[:, self._pair_idx] = 0.5 * (zp - zm)
        C = _unvec_blocks(c, M)
        S = _unvec_blocks(s, M)
        return self._Fc.T @ C @ self._Fc + self._Fs.T @ S @ self._Fs

    def _build_dense(self):
        M = self.block_size
        n_s, n_p = self._n_s, self._n_p
        Kc = np.kron(self._Fc, self._Fc)
        Ks = np.kron(self._Fs, self._Fs)
        a = np.empty((self.n_out, M * M))
        a[:n_s] = Kc[self._scaled_idx] * _INV_SQRT2
        a[n_s : 2 * n_s] = Ks[self._scaled_idx] * _INV_SQRT2
        a[2 * n_s : 2 * n_s + n_p] = 0.5 * (Kc[self._pair_idx] + Ks[self._pair_idx])
        a[2 * n_s + n_p :] = 0.5 * (Kc[self._pair_idx] - Ks[self._pair_idx])
        return a


class _SeparableFrame(FrameOperator):
    """Plain separable orthonormal transform (DCT or DHT)."""

    def __init__(self, family, tm):
        M = tm.size
        self.tm = tm
        self._F = tm.entries
        subbands = [
            Subband(i, "cos", i % M, i // M, None) for i in range(M * M)
        ]
        super().__init__(M, M * M, subbands)
        self.family = family

    def _analyze(self, blocks):
        return _vec_blocks(self._F @ blocks @ self._F.T)

    def _adjoint(self, coeffs):
        C = _unvec_blocks(coeffs, self.block_size)
        return self._F.T @ C @ self._F

    def _build_dense(self):
        return np.kron(self._F, self._F)


class _ComplexSeparableFrame(FrameOperator):
    """Unitary DFT as a real operator: real rows stacked over imaginary rows."""

    def __init__(self, tm):
        M = tm.size
        self.tm = tm
        self._U = tm.entries + 1j * tm.entries_imag
        subbands = [Subband(i, "cos", i % M, i // M, None) for i in range(M * M)]
        subbands += [
            Subband(M * M + i, "sin", i % M, i // M, None) for i in range(M * M)
        ]
        super().__init__(M, 2 * M * M, subbands)
        self.family = "dft"

    def _analyze(self, blocks):
        Z = self._U @ blocks.astype(np.complex128) @ self._U.T
        return np.concatenate([_vec_blocks(Z.real), _vec_blocks(Z.imag)], axis=1)

    def _adjoint(self, coeffs):
        M = self.block_size
        w = coeffs[:, : M * M] + 1j * coeffs[:, M * M :]
        W = w.reshape(-1, M, M).transpose(0, 2, 1)
        X = self._U.conj().T @ W @ self._U.conj()
        return np.ascontiguousarray(X.real)

    def _build_dense(self):
        K = np.kron(self._U, self._U)
        return np.concatenate([K.real, K.imag], axis=0)


class _PyramidFrame(FrameOperator):
    """Lowpass block mean + directional analysis of the mean-removed block."""

    def __init__(self, inner):
        M = inner.block_size
        self.inner = inner
        subbands = [Subband(0, "lowpass", 0, 0, None)]
        for s in inner.subbands:
            subbands.append(Subband(s.index + 1, s.branch, s.k_v, s.k_h, s.orientation))
        super().__init__(M, inner.n_out + 1, subbands)
        self.family = "pyramid"

    def _analyze(self, blocks):
        mean = blocks.mean(axis=(1, 2))
        detail = self.inner._analyze(blocks - mean[:, None, None])
        return np.concatenate([mean[:, None], detail], axis=1)

    def _synthesize(self, coeffs):
        # exact left inverse: x = F^T c + mean * ones
        return self.inner._adjoint(coeffs[:, 1:]) + coeffs[:, 0][:, None, None]

    def _adjoint(self, coeffs):
        # true transpose; differs from synthesis because the analysis of the
        # detail part includes the mean-removal operator
        M = self.block_size
        w = self.inner._adjoint(coeffs[:, 1:])
        w -= w.mean(axis=(1, 2))[:, None, None]
        return w + coeffs[:, 0][:, None, None] / (M * M)

    def _build_dense(self):
        M = self.block_size
        center = np.eye(M * M) - np.full((M * M, M * M), 1.0 / (M * M))
        top = np.full((1, M * M), 1.0 / (M * M))
        return np.concatenate([top, self.inner.analysis @ center], axis=0)


def build_dadcf(M):
    """Directional analytic frame from the DCT and its sine companion."""
    return _TwoBranchFrame("dadcf", build_dct(M), build_dst(M), 1)


def build_rdadcf(M):
    """Directional frame using the regularity-constrained sine transform."""
    if M < 4:
        raise ValueError("rdadcf requires block size >= 4")
    return _TwoBranchFrame("rdadcf", build_dct(M), build_rdst(M), 2)


def build_pyramid(M):
    """Mean-separated variant of the dadcf frame with exact inversion."""
    return _PyramidFrame(build_dadcf(M))


def build_separable(kind, M):
    """Separable baseline frame for kind in {"dct", "dft", "dht"}."""
    if kind == DCT:
        return _SeparableFrame("dct", build_dct(M))
    if kind == DHT:
        return _SeparableFrame("dht", build_dht(M))
    if kind == DFT:
        return _ComplexSeparableFrame(build_dft(M))
    raise ValueError(f"unknown separable kind {kind!r}")


def build_frame(family, M):
    """Build any supported frame family by name."""
    if family == "dadcf":
        return build_dadcf(M)
    if family == "rdadcf":
        return build_rdadcf(M)
    if family == "pyramid":
        return build_pyramid(M)
    if family in (DCT, DFT, DHT):
        return build_separable(family, M)
    raise ValueError(f"unknown frame family {family!r}")


def atom(op, index):
    """Return the atom for one output coefficient as an M x M grid.

    Scaled (non-mixed) outputs of the two-branch families are returned at
    unit norm (analysis row times sqrt(2)); mixed outputs are returned as the
    plain branch-atom combination c +/- s (analysis row times 2, norm
    sqrt(2)), which for the dadcf family equals (2/M) cos(theta_v -/+
    theta_h) entrywise.  Separable-family atoms are the raw analysis rows.
    """
    if not 0 <= index < op.n_out:
        raise ValueError(f"index {index} out of range for {op.n_out} outputs")
    sub = op.subbands[index]
    row = np.array(op.analysis[index])
    if op.family in ("dadcf", "rdadcf", "pyramid"):
        if sub.branch == "mixed":
            row *= 2.0
        elif sub.branch == "lowpass":
            row *= op.block_size
        else:
            row *= np.sqrt(2.0)
    M = op.block_size
    grid = row.reshape(M, M, order="F")
    return Atom2D(grid, sub.branch, sub.k_v, sub.k_h, sub.orientation)


def directional_cosine_atom(M, k_v, k_h, orientation):
    """Closed form of a dadcf mixed atom: (2/M) cos(theta_v -/+ theta_h).

    theta_v = pi k_v (m + 1/2) / M down the rows, theta_h likewise across the
    columns; orientation +1 takes the difference of the angles (one diagonal
    direction), -1 their sum (the mirrored direction).
    """
    m = np.arange(M)[:, None]
    n = np.arange(M)[None, :]
    tv = np.pi * k_v * (m + 0.5) / M
    th = np.pi * k_h * (n + 0.5) / M
    return (2.0 / M) * np.cos(tv - orientation * th)


def row_spectrum(row, grid_size=1024):
    """Magnitude of the DTFT of a transform row on a uniform grid over [-pi, pi)."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("expected a 1-D row")
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    omega = -np.pi + 2.0 * np.pi * np.arange(grid_size) / grid_size
    n = np.arange(row.size)
    H = np.exp(-1j * omega[:, None] * n[None, :]) @ row
    return SpectrumSample(omega, np.abs(H))


def analyticity_ratio(cos_row, sin_row, grid_size=1024):
    """Fraction of the energy of H + jG living at negative frequencies.

    H and G are the DTFTs of the two rows.  Evaluated on a half-bin-offset
    uniform grid (no sample at omega = 0 or -pi), so a real pair (sin_row =
    0) gives exactly 0.5; a one-sided pair gives a small ratio.
    """
    h = np.asarray(cos_row, dtype=np.float64)
    g = np.asarray(sin_row, dtype=np.float64)
    if h.shape != g.shape or h.ndim != 1:
        raise ValueError("rows must be 1-D and the same length")
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    omega = -np.pi + 2.0 * np.pi * (np.arange(grid_size) + 0.5) / grid_size
    n = np.arange(h.size)
    U = np.exp(-1j * omega[:, None] * n[None, :]) @ (h + 1j * g)
    energy = np.abs(U) ** 2
    total = float(energy.sum())
    if total == 0.0:
        raise ValueError("zero-energy input")
    return float(energy[omega < 0].sum()) / total
