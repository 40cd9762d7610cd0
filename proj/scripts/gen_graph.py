#!/usr/bin/env python3
"""Writes data/graph_default.json and prints its key distances."""
import json
import pathlib

import networkx as nx

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "graph_default.json"

NODES = [("E", "entry"), ("X1", "exit"), ("X2", "exit"), ("S1", "station"), ("S2", "station")] + [
    (f"W{i:02d}", "waypoint") for i in range(1, 13)
]
EDGES = [
    # outbound lanes
    ("E", "W01", 10), ("W01", "W02", 10), ("W02", "X1", 15), ("W01", "W03", 12), ("W03", "X2", 15),
    # return from X1, S1 sits beside it
    ("X1", "W04", 10), ("W04", "W05", 15), ("W05", "E", 10), ("W04", "S1", 8), ("S1", "W05", 8),
    # return from X2, with a service lane over to S1
    ("X2", "W06", 10), ("W06", "W07", 16), ("W07", "E", 10),
    ("W06", "W10", 20), ("W10", "W11", 20), ("W11", "S1", 15),
    # S2 on a spur reachable from both returns
    ("W05", "W12", 15), ("W07", "W12", 15), ("W12", "W08", 15), ("W08", "S2", 15),
    ("S2", "W09", 25), ("W09", "E", 25),
]


def main():
    doc = {
        "nodes": [{"id": i, "kind": k} for i, k in sorted(NODES)],
        "edges": [{"from": a, "to": b, "length_m": float(l)} for a, b, l in EDGES],
    }
    OUT.write_text(json.dumps(doc, indent=2) + "\n")
    g = nx.DiGraph()
    g.add_weighted_edges_from(EDGES)
    d = dict(nx.all_pairs_dijkstra_path_length(g))
    print("diameter", max(v for row in d.values() for v in row.values()))
    for x in ("X1", "X2"):
        print(x, "E->x", d["E"][x], "x->E", d[x]["E"], "x->S1", d[x]["S1"], "x->S2", d[x]["S2"],
              "S1->E", d["S1"]["E"], "S2->E", d["S2"]["E"])


if __name__ == "__main__":
    main()
