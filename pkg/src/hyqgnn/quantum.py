"""Exact statevector simulation of the amplitude-encoded variational circuit.

States are complex numpy arrays of length ``2**n`` (optionally with leading
batch axes).  Basis index ``i`` is read big-endian: qubit 0 is the most
significant bit.  Gates act in place on reshaped views, never through dense
``2**n x 2**n`` matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IndexOutOfRange, LayoutMismatch, TooLong, ZeroVector

N_QUBITS = 5
DEFAULT_LAYERS = 2
_ZERO_NORM = 1e-12


# -- gates ----------------------------------------------------------------------------

def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def apply_single(psi: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply a 2x2 ``gate`` to ``qubit``; leading batch axes are preserved."""
    lead = psi.shape[:-1]
    view = psi.reshape(lead + (2**qubit, 2, 2 ** (n - qubit - 1)))
    out = np.einsum("ab,...xby->...xay", gate, view)
    return out.reshape(psi.shape)


@lru_cache(maxsize=None)
def _cnot_permutation(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    return psi[..., _cnot_permutation(control, target, n)]


# -- parameters -------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumParams:
    """Ansatz angles ``(L, n)``, readout angles ``(n, 3)`` as (RX, RY, RZ),
    and the affine map from mean <Z> to an energy."""

    ansatz_thetas: np.ndarray
    readout_angles: np.ndarray
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.ansatz_thetas, dtype=float))
        r = np.asarray(self.readout_angles, dtype=float).reshape(-1, 3)
        if t.shape[1] != r.shape[0]:
            raise LayoutMismatch("ansatz and readout disagree on the qubit count")
        object.__setattr__(self, "ansatz_thetas", t)
        object.__setattr__(self, "readout_angles", r)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n_qubits(self) -> int:
        return self.readout_angles.shape[0]

    @property
    def n_layers(self) -> int:
        return self.ansatz_thetas.shape[0]

    @staticmethod
    def size(n_qubits: int = N_QUBITS, layers: int = DEFAULT_LAYERS) -> int:
        return layers * n_qubits + 3 * n_qubits + 2

    @staticmethod
    def layout(n_qubits: int = N_QUBITS, layers: int = DEFAULT_LAYERS) -> list[tuple[str, int, int]]:
        a = layers * n_qubits
        r = 3 * n_qubits
        return [("ansatz_thetas", 0, a), ("readout_angles", a, r),
                ("scale", a + r, 1), ("offset", a + r + 1, 1)]

    @classmethod
    def from_flat(cls, vec, n_qubits: int = N_QUBITS, layers: int = DEFAULT_LAYERS) -> "QuantumParams":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.size != cls.size(n_qubits, layers):
            raise LayoutMismatch(
                f"expected {cls.size(n_qubits, layers)} quantum parameters, got {vec.size}"
            )
        a = layers * n_qubits
        r = 3 * n_qubits
        return cls(vec[:a].reshape(layers, n_qubits), vec[a:a + r].reshape(n_qubits, 3),
                   vec[a + r], vec[a + r + 1])

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.ansatz_thetas.reshape(-1), self.readout_angles.reshape(-1),
                               [self.scale, self.offset]])


# -- circuit stages -----------------------------------------------------------------------

def amplitude_encode(x, n: int = N_QUBITS) -> np.ndarray:
    """Normalised ``x`` zero-padded to ``2**n`` amplitudes.

    Accepts a batch ``(..., k)``; any vector with norm below 1e-12 raises
    :class:`ZeroVector`.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] > 2**n:
        raise TooLong(f"{x.shape[-1]} features do not fit in {n} qubits")
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(~(norm >= _ZERO_NORM)):
        raise ZeroVector("cannot amplitude-encode a (near) zero vector")
    psi = np.zeros(x.shape[:-1] + (2**n,), dtype=complex)
    psi[..., : x.shape[-1]] = x / norm
    return psi


def basis_state(index: int, n: int = N_QUBITS) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_ansatz(psi: np.ndarray, thetas, n: int | None = None) -> np.ndarray:
    """Layers of RY on every qubit followed by a CNOT ring q -> q+1 (mod n)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = n or thetas.shape[1]
    for layer in thetas:
        for q in range(n):
            psi = apply_single(psi, ry(layer[q]), q, n)
        if n > 1:
            for q in range(n):
                psi = apply_cnot(psi, q, (q + 1) % n, n)
    return psi


def apply_readout(psi: np.ndarray, angles, n: int | None = None) -> np.ndarray:
    """Per qubit: RZ, then RY, then RX (i.e. the product RX RY RZ)."""
    angles = np.asarray(angles, dtype=float).reshape(-1, 3)
    n = n or angles.shape[0]
    for q in range(n):
        a, b, c = angles[q]
        psi = apply_single(psi, rx(a) @ ry(b) @ rz(c), q, n)
    return psi


@lru_cache(maxsize=None)
def _z_signs(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.array([1 - 2 * ((idx >> (n - 1 - q)) & 1) for q in range(n)], dtype=float)


def pauli_z_expectation(psi: np.ndarray, q: int, n: int | None = None) -> float | np.ndarray:
    n = n or int(np.log2(psi.shape[-1]))
    if not 0 <= q < n:
        raise IndexOutOfRange(f"qubit {q} out of range for {n} qubits")
    probs = np.abs(psi) ** 2
    out = probs @ _z_signs(n)[q]
    return float(out) if np.ndim(out) == 0 else out


def z_expectations(psi: np.ndarray, n: int | None = None) -> np.ndarray:
    """All single-qubit <Z_q>, shape ``(..., n)``."""
    n = n or int(np.log2(psi.shape[-1]))
    return (np.abs(psi) ** 2) @ _z_signs(n).T


def circuit_predict(w, qp: QuantumParams) -> float | np.ndarray:
    """Energy prediction for one weight matrix ``(5, 5)`` or a batch ``(B, 5, 5)``."""
    w = np.asarray(w, dtype=float)
    n = qp.n_qubits
    flat = w.reshape(w.shape[:-2] + (-1,))
    psi = amplitude_encode(flat, n)
    psi = apply_ansatz(psi, qp.ansatz_thetas, n)
    psi = apply_readout(psi, qp.readout_angles, n)
    mean_z = z_expectations(psi, n).mean(axis=-1)
    out = qp.scale * mean_z + qp.offset
    return float(out) if np.ndim(out) == 0 else out


def circuit_text(qp: QuantumParams) -> str:
    """Gate list, one ``NAME qubits angle`` entry per line, in execution order."""
    n = qp.n_qubits
    lines = [f"INIT amplitude_encode {n}"]
    for layer in qp.ansatz_thetas:
        lines += [f"RY {q} {layer[q]:.17g}" for q in range(n)]
        if n > 1:
            lines += [f"CNOT {q},{(q + 1) % n}" for q in range(n)]
    for q in range(n):
        a, b, c = qp.readout_angles[q]
        lines += [f"RZ {q} {c:.17g}", f"RY {q} {b:.17g}", f"RX {q} {a:.17g}"]
    lines += [f"MEASURE Z {q}" for q in range(n)]
    return "\n".join(lines) + "\n"
