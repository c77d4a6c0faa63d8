"""Seeded compressive measurement operators and the observation container.

The default operator is a scrambled Hadamard ensemble: a seeded random sign
flip and permutation followed by the fast Walsh-Hadamard transform, row
subsampled without replacement.  A complex noiselet mode (Coifman butterfly
recursion) is available behind a flag; its conjugate-symmetric rows are
re-assembled into an exactly orthonormal real transform by stacking
sqrt(2) * real / imaginary parts of the first half of the output, so both
modes expose the same interface and invariants (orthonormal rows, exact
pseudo-inverse by the adjoint).

Randomness is counter-based (Philox) with one stream per purpose, keyed as
(seed, stream-id): permutation 1, sign flips 2, sampling mask 3, noise 4.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .backend import fwht, noiselet, noiselet_adjoint

__all__ = [
    "SCRAMBLED_HADAMARD",
    "COMPLEX_NOISELET",
    "MeasurementOperator",
    "Observation",
    "sense_image",
    "add_noise",
    "pseudo_inverse_estimate",
    "save_observation",
    "load_observation",
]

SCRAMBLED_HADAMARD = "scrambled-hadamard"
COMPLEX_NOISELET = "complex-noiselet"

_MODE_CODES = {SCRAMBLED_HADAMARD: 0, COMPLEX_NOISELET: 1}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}

_STREAM_PERM = 1
_STREAM_SIGN = 2
_STREAM_MASK = 3
_STREAM_NOISE = 4

_MAGIC = b"DFOBS001"
_HEADER = struct.Struct("<8sIIQdQQdB7xQ")


def _stream(seed, stream_id):
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream_id)]))


class MeasurementOperator:
    """Row-subsampled orthonormal fast transform, reproducible from a seed."""

    def __init__(self, n, rate, seed, mode=SCRAMBLED_HADAMARD):
        if n < 2 or n & (n - 1):
            raise ValueError(f"signal length must be a power of two, got {n}")
        if not 0.0 < rate <= 1.0:
            raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
        if mode not in _MODE_CODES:
            raise ValueError(f"unknown mode {mode!r}")
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must fit in uint64")
        self.n = int(n)
        self.rate = float(rate)
        self.seed = int(seed)
        self.mode = mode
        self.m = int(np.floor(rate * n + 0.5))
        self.sample_indices = np.sort(
            _stream(seed, _STREAM_MASK).permutation(self.n)[: self.m]
        )
        if mode == SCRAMBLED_HADAMARD:
            self._perm = _stream(seed, _STREAM_PERM).permutation(self.n)
            self._signs = np.where(
                _stream(seed, _STREAM_SIGN).random(self.n) < 0.5, -1.0, 1.0
            )
            self._scale = 1.0 / np.sqrt(self.n)

    def full_transform(self, x):
        """Apply the full n x n orthonormal transform."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got {x.shape}")
        if self.mode == SCRAMBLED_HADAMARD:
            return fwht((x * self._signs)[self._perm]) * self._scale
        z = noiselet(x)
        half = self.n // 2
        out = np.empty(self.n)
        out[0::2] = np.sqrt(2.0) * z[:half].real
        out[1::2] = np.sqrt(2.0) * z[:half].imag
        return out

    def full_inverse(self, z):
        """Inverse (= transpose) of :meth:`full_transform`."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.n,):
            raise ValueError(f"expected length-{self.n} vector, got {z.shape}")
        if self.mode == SCRAMBLED_HADAMARD:
            v = fwht(z) * self._scale
            out = np.empty(self.n)
            out[self._perm] = v
            return out * self._signs
        half = self.n // 2
        w = np.zeros(self.n, dtype=np.complex128)
        w[:half] = z[0::2] + 1j * z[1::2]
        return np.sqrt(2.0) * noiselet_adjoint(w).real

    def forward(self, x):
        """Subsampled measurements: transform then keep the masked rows."""
        return self.full_transform(x)[self.sample_indices]

    def adjoint(self, y):
        """Transpose of :meth:`forward`; equals the Moore-Penrose pseudo-inverse
        applied to y because the kept rows are orthonormal."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.m,):
            raise ValueError(f"expected length-{self.m} vector, got {y.shape}")
        z = np.zeros(self.n)
        z[self.sample_indices] = y
        return self.full_inverse(z)

    def dense_matrix(self):
        """Materialize the full transform (tests/verification; n <= 4096)."""
        if self.n > 4096:
            raise ValueError("dense matrix limited to n <= 4096")
        eye = np.eye(self.n)
        return np.stack([self.full_transform(eye[i]) for i in range(self.n)], axis=1)


@dataclass(frozen=True)
class Observation:
    """Measurements plus everything needed to rebuild the operator."""

    y: np.ndarray
    height: int
    width: int
    rate: float
    seed: int
    seed_noise: int
    sigma: float
    mode: str

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.height * self.width

    @property
    def measurement_count(self):
        return self.y.size

    def operator(self):
        return MeasurementOperator(self.n, self.rate, self.seed, self.mode)


def add_noise(y, sigma, seed, stream_id=_STREAM_NOISE):
    """Add white Gaussian noise; sigma = 0 returns the input unchanged."""
    y = np.asarray(y, dtype=np.float64)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return y.copy()
    return y + sigma * _stream(seed, stream_id).standard_normal(y.size)


def sense_image(img, rate, sigma, seed, mode=SCRAMBLED_HADAMARD, seed_noise=None):
    """Measure a [0,1] image: y = mask(transform(vec(img))) + noise."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image")
    H, W = img.shape
    n = H * W
    op = MeasurementOperator(n, rate, seed, mode)
    clean = op.forward(img.reshape(-1, order="F"))
    if seed_noise is None:
        seed_noise = seed
    y = add_noise(clean, sigma, seed_noise)
    return Observation(y, H, W, rate, int(seed), int(seed_noise), float(sigma), mode)


def pseudo_inverse_estimate(obs):
    """Least-norm estimate transform^T mask^T y, reshaped to the image grid."""
    op = obs.operator()
    x = op.adjoint(np.asarray(obs.y, dtype=np.float64))
    return x.reshape(obs.height, obs.width, order="F")


def save_observation(obs, path):
    """Binary container (fixed little-endian header + float64 payload) and a
    JSON sidecar at path + ".json"."""
    header = _HEADER.pack(
        _MAGIC,
        obs.height,
        obs.width,
        obs.n,
        obs.rate,
        obs.seed,
        obs.seed_noise,
        obs.sigma,
        _MODE_CODES[obs.mode],
        obs.measurement_count,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(obs.y, dtype="<f8").tobytes())
    sidecar = {
        "format": _MAGIC.decode("ascii"),
        "height": obs.height,
        "width": obs.width,
        "n": obs.n,
        "rate": obs.rate,
        "seed": obs.seed,
        "seed_noise": obs.seed_noise,
        "sigma": obs.sigma,
        "mode": obs.mode,
        "measurement_count": obs.measurement_count,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_observation(path):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"truncated observation header in {path}")
        magic, height, width, n, rate, seed, seed_noise, sigma, mode_code, m = (
            _HEADER.unpack(head)
        )
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        if mode_code not in _MODE_NAMES:
            raise ValueError(f"unknown mode code {mode_code} in {path}")
        if height * width != n:
            raise ValueError("inconsistent dimensions in header")
        payload = fh.read(8 * m)
        if len(payload) != 8 * m:
            raise ValueError(f"truncated payload in {path}")
    y = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return Observation(y, height, width, rate, seed, seed_noise, sigma, _MODE_NAMES[mode_code])
