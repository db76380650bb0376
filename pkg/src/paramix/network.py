"""Multiport scattering algebra: standard elements, graph reduction, unitarity checks.

Conventions
-----------
All frequencies are cyclic and in GHz. A scattering matrix S maps incoming
wave amplitudes to outgoing ones, S[i, j] being the amplitude out of port i
per unit amplitude into port j. Port identity is carried by an ordered tuple
of unique string labels; the row/column index of a label is its position in
that tuple.

Element conventions (pinned jointly so that composed networks reproduce the
closed-form device responses elsewhere in the package):

* hybrid_90: through ports 1<->1' and 2<->2' carry 1/sqrt2, cross ports
  1<->2' and 2<->1' carry i/sqrt2. Two of them back to back with identity
  inner arms give S21 = S12 = i.
* lossy_coupler: the through path between the internal line ports carries
  -alpha, each branch to its external port carries +beta, and the path
  between the two external ports carries +alpha (unitary completion when
  alpha^2 + beta^2 = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonInvertibleNetworkError

SPEED_OF_LIGHT_M_PER_S = 299792458.0

# Largest acceptable condition number for the internal system in connect().
_MAX_INTERNAL_COND = 1e12


@dataclass(frozen=True)
class ScatteringMatrix:
    """Complex n-port scattering matrix at a single stimulus frequency."""

    freq_ghz: float
    ports: tuple[str, ...]
    s: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.s, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("scattering matrix must be square")
        if m.shape[0] != len(self.ports):
            raise ValueError("scattering matrix needs one row per port")
        if len(set(self.ports)) != len(self.ports):
            raise ValueError("port labels must be unique")
        object.__setattr__(self, "ports", tuple(str(p) for p in self.ports))
        object.__setattr__(self, "s", m)

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    def index(self, port: str) -> int:
        try:
            return self.ports.index(port)
        except ValueError:
            raise KeyError(f"no port named {port!r}; have {self.ports}") from None

    def entry(self, out_port: str, in_port: str) -> complex:
        """Amplitude out of out_port per unit drive into in_port."""
        return complex(self.s[self.index(out_port), self.index(in_port)])

    def renamed(self, ports: tuple[str, ...]) -> "ScatteringMatrix":
        return ScatteringMatrix(self.freq_ghz, ports, self.s)


def hybrid_90(phase_imbalance_rad: float = 0.0, freq_ghz: float = 0.0) -> ScatteringMatrix:
    """Ideal quadrature hybrid on ports (1, 2, 1p, 2p).

    Through paths 1<->1p and 2<->2p carry 1/sqrt2; cross paths 1<->2p and
    2<->1p carry i/sqrt2. The optional phase imbalance skews the two cross
    paths to i*e^{-i delta}/sqrt2 and i*e^{+i delta}/sqrt2 while keeping the
    matrix unitary and reciprocal; delta = 0 is the ideal part.
    """
    c = 1.0 / np.sqrt(2.0)
    d = float(phase_imbalance_rad)
    cross_12p = 1j * c * np.exp(-1j * d)
    cross_21p = 1j * c * np.exp(1j * d)
    s = np.array(
        [
            [0.0, 0.0, c, cross_12p],
            [0.0, 0.0, cross_21p, c],
            [c, cross_21p, 0.0, 0.0],
            [cross_12p, c, 0.0, 0.0],
        ],
        dtype=complex,
    )
    return ScatteringMatrix(freq_ghz, ("1", "2", "1p", "2p"), s)


def delay_line(length_um: float, eps_eff: float, freq_ghz: float) -> ScatteringMatrix:
    """Matched transmission line of physical length length_um.

    Both directions carry e^{i theta} with theta = 2 pi f sqrt(eps_eff) l / c,
    evaluated at the actual propagating frequency freq_ghz.
    """
    if length_um < 0:
        raise ValueError("length_um must be nonnegative")
    if eps_eff < 1.0:
        raise ValueError("eps_eff must be >= 1")
    theta = delay_phase_rad(length_um, eps_eff, freq_ghz)
    ph = np.exp(1j * theta)
    s = np.array([[0.0, ph], [ph, 0.0]], dtype=complex)
    return ScatteringMatrix(freq_ghz, ("1", "2"), s)


def delay_phase_rad(length_um: float, eps_eff: float, freq_ghz: float) -> float:
    """Electrical phase 2 pi f sqrt(eps_eff) l / c of a line, in radians."""
    return (
        2.0
        * np.pi
        * (freq_ghz * 1e9)
        * np.sqrt(eps_eff)
        * (length_um * 1e-6)
        / SPEED_OF_LIGHT_M_PER_S
    )


def lossy_coupler(
    alpha: float, beta: float, freq_ghz: float = 0.0, lossless: bool = True
) -> ScatteringMatrix:
    """Directional power tap on ports (b1, b2, 3, 4).

    b1 and b2 are the internal line ports, 3 and 4 the external taps. The
    through path b1<->b2 carries -alpha, the branches b1<->3 and b2<->4 carry
    +beta, and 3<->4 carries +alpha. Real, symmetric, and orthogonal when
    alpha^2 + beta^2 = 1 (enforced by default); pass lossless=False to allow
    alpha^2 + beta^2 < 1, modeling leakage loss.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValueError("alpha and beta must lie in [0, 1]")
    if lossless:
        if abs(alpha**2 + beta**2 - 1.0) > 1e-12:
            raise ValueError("alpha^2 + beta^2 must equal 1 for a lossless coupler")
    elif alpha**2 + beta**2 > 1.0 + 1e-12:
        raise ValueError("alpha^2 + beta^2 must not exceed 1")
    s = np.array(
        [
            [0.0, -alpha, beta, 0.0],
            [-alpha, 0.0, 0.0, beta],
            [beta, 0.0, 0.0, alpha],
            [0.0, beta, alpha, 0.0],
        ],
        dtype=complex,
    )
    return ScatteringMatrix(freq_ghz, ("b1", "b2", "3", "4"), s)


def termination(reflection: complex = 0.0, freq_ghz: float = 0.0) -> ScatteringMatrix:
    """One-port load with the given reflection coefficient (0 = matched)."""
    if abs(reflection) > 1.0 + 1e-9:
        raise ValueError("|reflection| must not exceed 1")
    return ScatteringMatrix(freq_ghz, ("1",), np.array([[reflection]], dtype=complex))


@dataclass(frozen=True)
class NetworkElement:
    """Named node of a connection graph.

    kind selects a standard builder (hybrid90, delay_line, lossy_coupler,
    termination) parameterized by params, or a fixed matrix for kinds
    mixer_2port and custom (params = {"matrix": ScatteringMatrix}).
    """

    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def matrix(self, freq_ghz: float) -> ScatteringMatrix:
        if self.kind == "hybrid90":
            return hybrid_90(self.params.get("phase_imbalance_rad", 0.0), freq_ghz)
        if self.kind == "delay_line":
            return delay_line(self.params["length_um"], self.params["eps_eff"], freq_ghz)
        if self.kind == "lossy_coupler":
            return lossy_coupler(self.params["alpha"], self.params["beta"], freq_ghz)
        if self.kind == "termination":
            return termination(self.params.get("reflection", 0.0), freq_ghz)
        if self.kind in ("mixer_2port", "custom"):
            fixed = self.params["matrix"]
            return ScatteringMatrix(freq_ghz, fixed.ports, fixed.s)
        raise ValueError(f"unknown element kind {self.kind!r}")


Joint = tuple[tuple[str, str], tuple[str, str]]


@dataclass(frozen=True)
class ConnectionGraph:
    """Elements plus internal joints; unjoined ports are the external ones.

    Each joint pairs (element_name, port_label) with another such pair. A
    port may appear in at most one joint. external, if given, fixes the
    order of the reduced matrix's ports; otherwise external ports keep
    element order. External labels are "element.port".
    """

    elements: tuple[NetworkElement, ...]
    joints: tuple[Joint, ...]
    external: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        names = [e.name for e in self.elements]
        if len(set(names)) != len(names):
            raise ValueError("element names must be unique")


def connect(graph: ConnectionGraph, freq_ghz: float) -> ScatteringMatrix:
    """Reduce a connection graph to the scattering matrix of its external ports.

    Builds the block-diagonal matrix of all element responses at freq_ghz,
    eliminates joined ports through the joint constraints, and returns the
    response seen from the unjoined ports. Raises
    NonInvertibleNetworkError("non-invertible internal network") when the
    internal system is singular instead of returning NaNs.
    """
    matrices = {e.name: e.matrix(freq_ghz) for e in graph.elements}

    index: dict[tuple[str, str], int] = {}
    n = 0
    for e in graph.elements:
        for p in matrices[e.name].ports:
            index[(e.name, p)] = n
            n += 1
    s_full = np.zeros((n, n), dtype=complex)
    row = 0
    for e in graph.elements:
        m = matrices[e.name].s
        k = m.shape[0]
        s_full[row : row + k, row : row + k] = m
        row += k

    internal: list[int] = []
    partner: dict[int, int] = {}
    for (a, b) in graph.joints:
        for ref in (a, b):
            if tuple(ref) not in index:
                raise ValueError(f"joint references unknown port {ref!r}")
        ia, ib = index[tuple(a)], index[tuple(b)]
        if ia in partner or ib in partner or ia == ib:
            raise ValueError("each port may appear in at most one joint")
        partner[ia] = ib
        partner[ib] = ia
        internal.extend([ia, ib])

    internal_sorted = sorted(internal)
    ext_refs = [ref for ref, i in index.items() if i not in partner]
    if graph.external:
        wanted = [tuple(r) for r in graph.external]
        if sorted(wanted) != sorted(ext_refs):
            raise ValueError("external list must name exactly the unjoined ports")
        ext_refs = wanted
    ext_idx = [index[r] for r in ext_refs]

    s_ee = s_full[np.ix_(ext_idx, ext_idx)]
    if internal_sorted:
        s_ei = s_full[np.ix_(ext_idx, internal_sorted)]
        s_ie = s_full[np.ix_(internal_sorted, ext_idx)]
        s_ii = s_full[np.ix_(internal_sorted, internal_sorted)]
        pos = {g: k for k, g in enumerate(internal_sorted)}
        perm = np.zeros((len(internal_sorted), len(internal_sorted)))
        for g in internal_sorted:
            perm[pos[g], pos[partner[g]]] = 1.0
        system = np.eye(len(internal_sorted)) - perm @ s_ii
        if np.linalg.cond(system) > _MAX_INTERNAL_COND:
            raise NonInvertibleNetworkError("non-invertible internal network")
        a_int = np.linalg.solve(system, perm @ s_ie)
        s_red = s_ee + s_ei @ a_int
    else:
        s_red = s_ee

    labels = tuple(f"{name}.{port}" for name, port in ext_refs)
    return ScatteringMatrix(freq_ghz, labels, s_red)


def check_unitarity(matrix: ScatteringMatrix, tol: float = 1e-9) -> tuple[bool, float]:
    """Return (is_unitary, max deviation of S^H S from the identity)."""
    s = matrix.s
    dev = float(np.max(np.abs(s.conj().T @ s - np.eye(s.shape[0]))))
    return dev <= tol, dev
