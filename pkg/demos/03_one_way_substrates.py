# %% [markdown]
# # One-way substrates
#
# The same cycle form can be laid out on several graph-state substrates. This
# notebook compiles one random circuit for every substrate, draws the layouts
# and carves the remote-CZ substrates out of a square cluster.

# %%
from __future__ import annotations

import numpy as np

from onebit_mbqc.circuit import cycles_to_circuit, random_cycle_form
from onebit_mbqc.graph import emit_diagram
from onebit_mbqc.owqc import compile_universal, embed_in_cluster, to_diagram
from onebit_mbqc.verify import check_deletion, embedding_fidelity, verify_random

cf = random_cycle_form(np.random.default_rng(3), 2, 2)
circuit = cycles_to_circuit(cf)

# %% [markdown]
# ## Layouts
#
# Solid links are always present; dotted links only appear in cycles that
# carry a CZ.

# %%
for variant in ("TG", "RemoteCZ_I", "RemoteCZ_II", "Cancellation", "Routing"):
    sub, pattern = compile_universal(cf, variant)
    print(f"{variant}: {sub.physical_qubits} qubits, cost per cycle {sub.cost_per_cycle}")
    print(emit_diagram(to_diagram(pattern), "ascii"))

# %% [markdown]
# ## Equivalence with the circuit

# %%
for scheme in ("tg", "remote1", "remote2", "cancel", "route"):
    rep = verify_random(circuit, scheme, trials=50, seed=11)
    print(f"{scheme:8s} min fidelity {rep.min_fidelity:.12f}")

# %% [markdown]
# ## Carving from a cluster
#
# Deleting the unused lattice sites by Z measurements, and undoing the Z
# corrections on their neighbours, leaves exactly the substrate graph state.

# %%
sub, _ = compile_universal(random_cycle_form(np.random.default_rng(14), 2, 1), "RemoteCZ_II")
lattice, deletions = embed_in_cluster(sub)
print(f"{len(lattice)} lattice sites, {len(deletions)} deleted")
for variant in ("RemoteCZ_I", "RemoteCZ_II"):
    print(variant, embedding_fidelity(variant))

# %% [markdown]
# ## The deletion rule on every small graph

# %%
print(check_deletion(max_vertices=4).line())
