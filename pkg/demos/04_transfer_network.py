"""
Direct and indirect transfer networks
=====================================

Direct transfers come from classified overlaps; indirect ones link
consecutive hospitalisations separated by time at home.  We compare how the
indirect network thins out as the allowed time at home shrinks and export a
DOT file of the direct network.
"""

from pathlib import Path

from transfernet.records import parse_records, group_by_patient
from transfernet.pipeline import analyze
from transfernet.network import export_network
from transfernet.syngen import plant_all, generate

data, _ = generate(plant_all(40, seed=3, n_patients=4000, n_facilities=25))
index = group_by_patient(parse_records(data)[0])

for max_gap in (None, 365, 90, 30, 7, 0):
    a = analyze(index, max_gap=max_gap, same_facility=False)
    net = a.network(("indirect",))
    print(f"max gap {str(max_gap):>4s}: {len(net.edges):4d} edges, {net.total_weight():5d} transfers")

direct = analyze(index).network(("direct",))
top = sorted(direct.edges.items(), key=lambda kv: -kv[1])[:5]
print("\nbusiest direct routes")
for (a, b, _), c in top:
    print(f"  {a} -> {b}: {c}")

out = Path("direct_transfers.dot")
out.write_bytes(export_network(direct, "dot"))
print(f"\nwrote {out} ({len(direct.nodes)} nodes); render with: dot -Tsvg {out} > net.svg")
