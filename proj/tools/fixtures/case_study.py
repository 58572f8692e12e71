"""Regenerates data/case_study.json."""
import json
import os
NAMES = ["Wushan Square", "Longxiang Mansion", "Hangzhou Theater", "Wulin Courtyard", "Zheyi Blood Station",
         "Yunhe Square", "Xiasha Wu Mart", "Blood Center", "Candidate Point"]
SH = dict(zip("WLTUZYXBP", NAMES))
DIST = [[0, 1.8, 3.4, 3, 2.1, 8.9, 19, 5.3, 13.5], [1.8, 0, 1.5, 1.2, 1.3, 7.1, 18.4, 7, 13.1],
        [3.4, 1.5, 0, .5, 2.2, 5.6, 18.2, 8.6, 13.3], [3, 1.2, .5, 0, 2.1, 5.9, 18.5, 8.2, 13.5],
        [2.1, 1.3, 2.2, 2.1, 0, 7.8, 17.1, 6.7, 11.8], [8.9, 7.1, 5.6, 5.9, 7.8, 0, 19.9, 14.2, 16.3],
        [19, 18.4, 18.2, 18.5, 17.1, 19.9, 0, 20.3, 5.9], [5.3, 7, 8.6, 8.2, 6.7, 14.2, 20.3, 0, 14.4],
        [13.5, 13.1, 13.3, 13.5, 11.8, 16.3, 5.9, 14.4, 0]]
PAIRS = "WLTUZYX"
SAMPLES = [[.4, 3.1, 4.6, 3.1, 1.3, 6.4, 1.5], [4.3, 4.2, 4.4, 4.93, 5.2, 9.9, 8.4], [1.3, 1.2, 1.4, 0, .8, 3.2, .5],
           [5.2, 9.9, 5.5, 5.9, .5, 12.3, 12.7], [1, 7, 4.2, 4.5, 10.7, 0, 0], [0, 4.8, 0, 5.1, 0, 5.4, 3.6],
           [0, 5.2, 0, 2.4, 0, 4.82, 5.5]]  # [pair][date]
DATES = ["2018/11/%d" % d for d in range(12, 19)]

# Unit costs per route (charged on the last arc into the blood center).
C_LO, C_HI = 10, 60      # collection points sharing the Longxiang trunk; direct fallback
CZ_LO, CZ_HI = 5, 52     # Zheyi direct; overflow via Wushan
CX_LO, CX_HI = 45, 51    # Xiasha via Zheyi-Wushan-Longxiang; overflow via Zheyi-Theater
CX_CP = 60               # Xiasha via the candidate point
FORBID = 1000
CAP = {"LB": 50, "ZB": 10, "ZW": 17}
ARCS = ["WL", "TL", "UL", "YL", "LB", "WB", "TB", "LW", "ZB", "ZW", "XZ", "ZT", "XP", "PB"]

routes = {
    "W": [("WLB", C_LO), ("WB", C_HI)], "T": [("TLB", C_LO), ("TB", C_HI)], "U": [("ULB", C_LO)],
    "Y": [("YLB", C_LO)], "L": [("LB", C_LO), ("LWB", C_HI)],
    "Z": [("ZB", CZ_LO), ("ZWB", CZ_HI)],
    "X": [("XZWLB", CX_LO), ("XZTB", CX_HI), ("XPB", CX_CP)],
}
cost = {a: [FORBID] * 7 for a in ARCS}
for k, p in enumerate(PAIRS):
    for path, c in routes[p]:
        hops = [path[i:i + 2] for i in range(len(path) - 1)]
        for h in hops:
            cost[h][k] = 0 if cost[h][k] == FORBID else cost[h][k]
        cost[hops[-1]][k] = c

nodes = []
for s in "WLTUZYXBP":
    nodes.append(dict(name=SH[s], airport_capacity=400, infrastructure_cost=1000, capacity_unit_cost=0.5))
arcs = []
for a in ARCS:
    arcs.append(dict(tail=SH[a[0]], head=SH[a[1]], transport_cost=cost[a],
                     channels=[dict(capacity=CAP.get(a, 300), cost=100, max_channels=1)]))
doc = dict(
    schema="uamn-instance/1", name="case-study",
    notes=("Blood delivery pilot, seven collection points to one blood center. Energy equals distance (km). "
           "Transport costs are per pair and per route: the Longxiang trunk (capacity 50) is cheap, direct fallbacks "
           "cost 60 per unit; Zheyi has a 10-unit direct channel and overflows via Wushan; Xiasha must transit "
           "Zheyi and shares the Zheyi-Wushan channel (capacity 17) with Zheyi's overflow. Arcs off a pair's "
           "routes cost 1000 per unit for that pair. Via the candidate point Xiasha would pay 60 per unit, "
           "more than its overflow route."),
    battery_boost=18, channel_types=["standard"], nodes=nodes,
    od_pairs=[dict(name=SH[p], origin=SH[p], destination=SH["B"]) for p in PAIRS],
    arcs=arcs,
    calibration=dict(transport_per_distance=1, energy_per_distance=1, distance=DIST),
    demand=dict(lower=[0] * 7, upper=[25] * 7,
                samples=[dict(label=d, values=[SAMPLES[k][j] for k in range(7)]) for j, d in enumerate(DATES)]),
    defaults=dict(theta=100, beta=50, battery_rhs="flow-weighted", y_max=1))
with open(os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", "data", "case_study.json"), "w") as f:
    json.dump(doc, f, indent=2)
    f.write("\n")
