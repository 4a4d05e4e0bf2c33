"""Vertex scattering matrices and the unitary bond operators built from them.

Assembly convention: the bond scattering matrix carries one unitary block
per vertex, indexed by the directed bonds *arriving* at that vertex in local
edge order.  Left-multiplying by the direction flip then matches outgoing
row labels to incoming column labels, which makes the propagation matrix the
amplitude-transport operator: row mu draws from the columns nu that
terminate at mu's origin.  Any other pairing of conventions leaves the
squared-modulus transition matrix reducible (it never moves amplitude off a
vertex), so this one is forced by the ergodicity requirements downstream.
"""

import numpy as np

from .topology import Graph, DirectedBonds, directed_bonds

UNITARITY_TOL = 1e-12


def vertex_matrix(kind: str, degree: int) -> np.ndarray:
    """Unitary vertex scattering matrix of the given family.

    ``dft``: discrete Fourier matrix, entries exp(2*pi*i*j*k/v)/sqrt(v).
    ``neumann``: 2/v - delta_jk (Kirchhoff/Neumann conditions).
    """
    if degree < 1:
        raise ValueError("vertex degree must be >= 1")
    kind = kind.lower()
    if kind == "dft":
        j, k = np.meshgrid(np.arange(degree), np.arange(degree), indexing="ij")
        return np.exp(2j * np.pi * j * k / degree) / np.sqrt(degree)
    if kind == "neumann":
        return (2.0 / degree) * np.ones((degree, degree)) - np.eye(degree) + 0j
    raise ValueError(f"unknown vertex matrix kind: {kind!r}")


def assert_unitary(m: np.ndarray, tol: float = UNITARITY_TOL, what: str = "matrix"):
    dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    if dev > tol:
        raise ValueError(f"{what} not unitary: max deviation {dev:.3e}")


def assemble_bond_scattering(graph: Graph, vertex_matrices) -> np.ndarray:
    """2B x 2B unitary collecting all vertex matrices in arrival blocks.

    ``vertex_matrices`` maps vertex id to its unitary matrix (sequence or
    dict); dimensions must match vertex degrees.  Entry (mu, nu) is nonzero
    only when mu and nu terminate at the same vertex.
    """
    bonds = directed_bonds(graph)
    two_b = bonds.size
    sigma = np.zeros((two_b, two_b), dtype=np.complex128)
    for alpha in range(graph.vertex_count):
        vm = np.asarray(vertex_matrices[alpha])
        deg = graph.degree(alpha)
        if vm.shape != (deg, deg):
            raise ValueError(
                f"vertex {alpha}: matrix shape {vm.shape} does not match degree {deg}"
            )
        assert_unitary(vm, what=f"vertex matrix at {alpha}")
        # directed bonds arriving at alpha, one per incident edge, local order
        arriving = []
        for b in graph.adjacency[alpha]:
            u, v = graph.edges[b]
            direction = 0 if v == alpha else 1
            arriving.append(DirectedBonds.index(b, direction))
        for i, mu in enumerate(arriving):
            for j, nu in enumerate(arriving):
                sigma[mu, nu] = vm[i, j]
    assert_unitary(sigma, what="bond scattering matrix")
    return sigma


def propagation_matrix(sigma: np.ndarray) -> np.ndarray:
    """Direction-matched propagator: row mu equals row flip(mu) of sigma."""
    assert_unitary(sigma, what="bond scattering matrix")
    two_b = sigma.shape[0]
    flip = np.arange(two_b) ^ 1
    return sigma[flip, :]


def sample_magnetic_phases(two_b: int, seed: int) -> np.ndarray:
    """Independent uniform phases in [0, 2*pi), one per directed bond."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, size=two_b)


def quantum_map(
    bcal: np.ndarray,
    lengths: np.ndarray,
    phases: np.ndarray,
    k: float = 0.0,
) -> np.ndarray:
    """Phase-dressed unitary U = diag(exp(i(k L_b + phi_mu))) @ bcal."""
    two_b = bcal.shape[0]
    lengths = np.asarray(lengths, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if lengths.shape != (two_b // 2,):
        raise ValueError(f"expected {two_b // 2} bond lengths, got {lengths.shape}")
    if phases.shape != (two_b,):
        raise ValueError(f"expected {two_b} phases, got {phases.shape}")
    per_bond = np.repeat(lengths, 2)
    return np.exp(1j * (k * per_bond + phases))[:, None] * bcal
