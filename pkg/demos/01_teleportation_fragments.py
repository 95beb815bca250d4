# %% [markdown]
# # Teleportation fragments and their Pauli frames
#
# Every gadget in the library moves a qubit through a measurement and leaves a
# known Pauli byproduct behind. This notebook runs a few fragments branch by
# branch and checks that undoing the tracked frame recovers the ideal output.

# %%
from __future__ import annotations

import numpy as np

from onebit_mbqc.pauli import PauliFrame
from onebit_mbqc.primitives import fragment, fragment_names
from onebit_mbqc.statevec import random_state
from onebit_mbqc.verify import verify_branches

rng = np.random.default_rng(2026)
print(fragment_names())

# %% [markdown]
# ## Z-teleportation of a random qubit
#
# One measured bit, two branches. Each row shows the branch probability, the
# corrected fidelity and the frame left on the output wire.

# %%
psi = random_state(rng, 1)
print(verify_branches(fragment("zt"), [psi]).to_text())

# %% [markdown]
# ## A remote CZ built from two X-teleportations
#
# The frame on each wire picks up the partner's outcome in its Z part.

# %%
frag = fragment("xtcz4")
psi = random_state(rng, 2, entangled=True)
report = verify_branches(frag, [psi])
for row in report.branches:
    print(dict(row.outcomes), row.frame, f"{row.fidelity:.12f}")

# %% [markdown]
# ## Incoming byproducts
#
# Fragments accept a non-trivial input frame and push it through. The
# physical input is the frame applied to the logical state.

# %%
frames = [PauliFrame.from_bits([1, 0], [0, 1])]
report = verify_branches(frag, [psi], frames=frames)
print(report.min_fidelity, report.passed)
