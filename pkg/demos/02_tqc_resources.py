# %% [markdown]
# # Two-qubit-measurement schedules
#
# A circuit is compiled into a schedule of two-qubit and single-qubit
# measurements. The full simulation teleports both wires before each CZ,
# while the pseudo simulation folds single-qubit gates into the measurement
# bases. Both are checked against direct state-vector evolution.

# %%
from __future__ import annotations

from onebit_mbqc.circuit import parse_circuit
from onebit_mbqc.tqc import compile_full, compile_pseudo, expected_full, expected_pseudo
from onebit_mbqc.verify import resource_circuit, verify_random

circuit = parse_circuit(
    """
    qubits 2
    h 0
    xrot 1 0.3
    cz 0 1
    zrot 0 -0.8
    cz 0 1
    """
)

# %% [markdown]
# ## The pseudo schedule in text form

# %%
print(compile_pseudo(circuit).dump())

# %% [markdown]
# ## Resource tallies against the closed forms
#
# Each triple is (ancillas, two-qubit measurements, single-qubit measurements).

# %%
for n, m in [(2, 1), (2, 3), (3, 4), (4, 5)]:
    c = resource_circuit(n, m)
    print(
        f"n={n} m={m}",
        "pseudo", compile_pseudo(c).resources.counts(), expected_pseudo(n, m),
        "full", compile_full(c).resources.counts(), expected_full(n, m),
    )

# %% [markdown]
# ## Seeded trials
#
# Random product inputs and sampled outcomes; the report is a deterministic
# function of the circuit, scheme and seed.

# %%
for scheme in ("tqc-full", "tqc-pseudo"):
    print(verify_random(circuit, scheme, trials=100, seed=7).to_text())
