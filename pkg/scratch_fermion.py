"""Scratch: independent fermionic-basis oracle vs the qubit Hubbard builder."""
import itertools
import math

import numpy as np

from vqakit import hamiltonian as ham
from vqakit.hamiltonian import HubbardSpec
from vqakit.vqe import exact_sector_solution


def fermionic_sector_matrix(spec):
    """Brute-force H in the occupation basis of the fixed sector.

    Completely independent of the qubit machinery: states are tuples of
    per-colour occupation bitmasks (bit i = site i occupied), fermionic
    signs from the canonical ordering (colour-major, site-ascending).
    """
    L, N = spec.sites, spec.colours
    alpha = 2 * math.pi * spec.flux / L
    rail_states = []
    for s in range(N):
        rail_states.append([
            sum(1 << site for site in occ)
            for occ in itertools.combinations(range(L), spec.particles[s])
        ])
    basis = list(itertools.product(*rail_states))
    index = {b: k for k, b in enumerate(basis)}
    dim = len(basis)
    H = np.zeros((dim, dim), dtype=complex)

    def occ_count_below(mask, site):
        return bin(mask & ((1 << site) - 1)).count("1")

    for k, state in enumerate(basis):
        # diagonal: U and V terms
        diag = 0.0
        for i in range(L):
            ns = [ (state[s] >> i) & 1 for s in range(N) ]
            tot_i = sum(ns)
            for s1 in range(N):
                for s2 in range(s1 + 1, N):
                    diag += spec.onsite * ns[s1] * ns[s2]
            for r, v_r in enumerate(spec.neighbour, start=1):
                j = (i + r) % L
                tot_j = sum((state[s] >> j) & 1 for s in range(N))
                diag += v_r * tot_i * tot_j
        H[k, k] += diag
        # hopping: -t_r (e^{i alpha} c^dag_i c_{i+r} + h.c.)
        for s in range(N):
            mask = state[s]
            for r, t_r in enumerate(spec.hopping, start=1):
                for i in range(L):
                    j = (i + r) % L
                    # c^dag_i c_j term (moves a fermion from j to i)
                    if (mask >> j) & 1 and not (mask >> i) & 1:
                        # apply c_j then c^dag_i with JW-free fermion signs
                        sign = (-1) ** occ_count_below(mask, j)
                        mask2 = mask & ~(1 << j)
                        sign *= (-1) ** occ_count_below(mask2, i)
                        mask3 = mask2 | (1 << i)
                        new_state = list(state)
                        new_state[s] = mask3
                        kk = index[tuple(new_state)]
                        # H term: -t_r e^{i alpha} c^dag_i c_{i+r}: here the
                        # hop (j -> i) realizes c^dag_i c_j; the phase is
                        # e^{+i alpha} when j = i + r (mod L).
                        H[kk, k] += -t_r * np.exp(1j * alpha) * sign
                        # h.c. handled when the loop visits the reverse move
        for s in range(N):
            mask = state[s]
            for r, t_r in enumerate(spec.hopping, start=1):
                for i in range(L):
                    j = (i + r) % L
                    # h.c.: -t_r e^{-i alpha} c^dag_j c_i (move i -> j)
                    if (mask >> i) & 1 and not (mask >> j) & 1:
                        sign = (-1) ** occ_count_below(mask, i)
                        mask2 = mask & ~(1 << i)
                        sign *= (-1) ** occ_count_below(mask2, j)
                        mask3 = mask2 | (1 << j)
                        new_state = list(state)
                        new_state[s] = mask3
                        kk = index[tuple(new_state)]
                        H[kk, k] += -t_r * np.exp(-1j * alpha) * sign
    return H


cases = [
    HubbardSpec(sites=3, colours=1, hopping=(1.0,), particles=(1,), flux=0.0),
    HubbardSpec(sites=3, colours=1, hopping=(1.0,), particles=(1,), flux=0.3),
    HubbardSpec(sites=3, colours=2, hopping=(1.0,), onsite=5.0, particles=(1, 1), flux=0.25),
    HubbardSpec(sites=3, colours=2, hopping=(1.0,), onsite=2.0, neighbour=(0.7,),
                particles=(2, 1), flux=0.1),
    HubbardSpec(sites=4, colours=1, hopping=(1.0,), particles=(2,), flux=0.15),
    HubbardSpec(sites=4, colours=2, hopping=(1.0, 0.4), onsite=1.5, neighbour=(0.5, 0.2),
                particles=(2, 1), flux=0.35),
    HubbardSpec(sites=2, colours=1, hopping=(1.0,), particles=(1,), flux=0.0),
    HubbardSpec(sites=3, colours=3, hopping=(1.0,), onsite=5.0, particles=(1, 1, 1), flux=0.25),
]

for spec in cases:
    ferm = np.linalg.eigvalsh(fermionic_sector_matrix(spec))
    qub = exact_sector_solution(spec).energies
    err = np.max(np.abs(ferm - qub))
    print(f"L={spec.sites} N={spec.colours} Ns={spec.particles} phi={spec.flux}: "
          f"dim={len(ferm)} max|dE|={err:.2e} E0_f={ferm[0]:+.6f} E0_q={qub[0]:+.6f}")

# tight-binding ring minimum check: L=3, N=1, one fermion, phi=0 -> -2t
spec = HubbardSpec(sites=3, colours=1, hopping=(1.0,), particles=(1,), flux=0.0)
print("ring ground:", exact_sector_solution(spec).ground_energy(), "(expect -2)")

# term count
spec = HubbardSpec(sites=3, colours=3, hopping=(1.0,), onsite=5.0, neighbour=(0.5,),
                   particles=(1, 1, 1), flux=0.25)
h = ham.build_hubbard(spec)
print("term count:", h.num_terms, "formula:", ham.hubbard_term_count(spec))
