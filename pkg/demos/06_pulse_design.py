"""From interaction to pulse sequence, automatically.

Given the Pauli span of an unwanted interaction, search for the
smallest conjugation group that averages it away, then read off the
physical pulses: the unitary kicks between consecutive toggling frames.

Run:
    python3 demos/06_pulse_design.py
"""

import itertools

import numpy as np

from decoupling import (
    boundary_pulses,
    interaction_space,
    minimal_group_search,
    pauli_word_operator,
    schedule_from_group,
)
from decoupling.groups import PAULI_LETTERS


def pulse_name(p):
    """Match a pulse to a Pauli word up to a global phase."""
    d = p.dim
    n = d.bit_length() - 1
    for letters in itertools.product(PAULI_LETTERS, repeat=n):
        w = "".join(letters)
        overlap = abs(np.trace(pauli_word_operator(w).matrix.conj().T @ p.matrix)) / d
        if abs(overlap - 1.0) < 1e-9:
            return w
    return "(non-Pauli)"


for description, words in (
    ("single-qubit dephasing", ["Z"]),
    ("single qubit, all three axes", ["X", "Y", "Z"]),
    ("two-qubit crosstalk ZZ plus local Z noise", ["ZI", "IZ", "ZZ"]),
):
    ops = [pauli_word_operator(w) for w in words]
    space = interaction_space(ops)
    hits = minimal_group_search(space, n_qubits=len(words[0]))
    print(f"\ninteraction: {description}  span {words}")
    if not hits:
        print("  no Pauli decoupling group within the search cap")
        continue
    print(f"  minimal group order: {hits[0].order} ({len(hits)} group(s) found)")
    for group in hits[:3]:
        sched = schedule_from_group(group, delta_t=1.0)
        pulses = [pulse_name(p) for p in boundary_pulses(sched)]
        cycle = " ".join(f"dt {w}" for w in pulses)
        print(f"  {list(group.labels)}  ->  cycle: {cycle}")

print("\nEach line reads left to right: free evolution for dt, then the "
      "pulse, repeated; after the last pulse the frame returns to the "
      "identity and the cycle restarts.")
