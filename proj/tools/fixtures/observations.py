"""Regenerates the five-node fixtures in data/."""
import json, copy, os
D = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..', 'data')

def node(name, w, cf, cs): return dict(name=name, airport_capacity=w, infrastructure_cost=cf, capacity_unit_cost=cs)
def arc(t, h, l, cap, cd, ct, m=1): return dict(tail=t, head=h, energy=l, transport_cost=ct, channels=[dict(capacity=cap, cost=cd, max_channels=m)])
def pair(o, d): return dict(name=f"{o}-{d}", origin=o, destination=d)
def dump(name, doc):
    with open(os.path.join(D, name), 'w') as f:
        json.dump(doc, f, indent=2); f.write('\n')

def obs1(cf4, cs4, cd4, ct4, b12=None, lo=None, up=None, w3=400, name=None, notes=''):
    doc = dict(schema="uamn-instance/1", name=name, notes=notes, battery_boost=20,
      channel_types=["standard"],
      nodes=[node("1", 1000, 1000, 0.5), node("2", 1000, 1000, 0.5), node("3", w3, 10000, 1.5),
             node("4", 1400, cf4, cs4), node("5", 1000, 1000, 0.5)],
      od_pairs=[pair("1","2"), pair("5","2")],
      arcs=[arc("1","3",9,400,1500,11), arc("3","2",9,400,1500,10),
            arc("1","4",9,800,cd4,ct4), arc("4","2",9,800,1500,10),
            arc("5","2",12,200,1500,10)],
      demand=dict(lower=lo or [20,16], upper=up or [80,64],
                  samples=[dict(label="s1", values=[b12[0] if b12 else 54.85, 51.91]),
                           dict(label="s2", values=[b12[1] if b12 else 48.84, 42.48])]),
      defaults=dict(theta=100, beta=1000, battery_rhs="flow-weighted"))
    return doc

common = ("Reconstructed five-node example. Pair 1-2 needs a transfer airport at node 3 or node 4; "
          "pair 5-2 flies direct. Samples: censored Gaussian, N=2, gen-demand seed 11, rounded to 0.01.")
dump("obs1_left.json", obs1(15000, 2, 2000, 12, name="obs1-left", notes=common + " Node-4 costs: Cf=15000, Cs=2, Cd into 4 = 2000, Ct into 4 = 12."))
dump("obs1_right.json", obs1(8000, 1, 1200, 10, name="obs1-right", notes=common + " Node-4 costs: Cf=8000, Cs=1, Cd into 4 = 1200, Ct into 4 = 10."))

def obs2(cd=1200, ct=10, L=20, name=None, notes=''):
    tri = lambda t, h: arc(t, h, 17, 100, cd, ct)
    spoke = lambda t, h: arc(t, h, 9.81, 200, 1000, 5)
    doc = dict(schema="uamn-instance/1", name=name, notes=notes, battery_boost=L,
      channel_types=["standard"],
      nodes=[node("1", 1000, 1000, 0.5), node("2", 1000, 1000, 0.5), node("3", 600, 2000, 0.5),
             node("4", 600, 2000, 0.5), node("5", 1000, 1000, 0.5)],
      od_pairs=[pair("1","2"), pair("1","5"), pair("2","5")],
      arcs=[tri("1","2"), tri("1","5"), tri("2","5"),
            spoke("1","3"), spoke("2","3"), spoke("3","2"), spoke("3","5")],
      demand=dict(lower=[30,30,30], upper=[90,90,90],
                  samples=[dict(label="s1", values=[62.51, 65.58, 64.38]),
                           dict(label="s2", values=[51.83, 55.04, 72.57])]),
      defaults=dict(theta=100, beta=1000, battery_rhs="flow-weighted"))
    return doc

common2 = ("Reconstructed five-node example. Nodes 1, 2, 5 form an equilateral triangle of side 17 (energy units); "
           "node 3 sits at its centre, 9.81 from each corner; node 4 is an unused candidate. "
           "Samples: censored Gaussian, N=2, gen-demand seed 12, rounded to 0.01.")
dump("obs2_triangle.json", obs2(name="obs2-triangle", notes=common2 + " Base: Cd=1200, Ct=10, L=20 on the triangle arcs."))
dump("obs2_channel_cost.json", obs2(cd=7000, name="obs2-channel-cost", notes=common2 + " Triangle channel cost raised to 7000."))
dump("obs2_transport_cost.json", obs2(ct=30, name="obs2-transport-cost", notes=common2 + " Triangle transport cost raised to 30."))
dump("obs2_battery.json", obs2(L=10, name="obs2-battery", notes=common2 + " Battery boost lowered to 10."))

def obs3(row, high, samples12, lo12, up12):
    if row == 1:
        n3 = node("3", 800, 10000, 1.5); n4 = node("4", 800, 10000, 1.0); cd14, ct14 = 2050, 10
    else:
        n3 = node("3", 800, 10000, 1.5); n4 = node("4", 1400, 15000, 1.0); cd14, ct14 = 2000, 12
    doc = obs1(0, 0, 0, 0)
    doc["nodes"][2] = n3; doc["nodes"][3] = n4
    doc["arcs"][2] = arc("1", "4", 9, 800, cd14, ct14)
    doc["demand"]["lower"][0] = lo12; doc["demand"]["upper"][0] = up12
    for j in range(2): doc["demand"]["samples"][j]["values"][0] = samples12[j]
    return doc

n3 = ("Reconstructed five-node example for the mean/variance robustness check. {} "
      "Samples of pair 1-2: censored Gaussian, N=2, gen-demand seed 11, rounded to 0.01.")
d = obs3(1, False, [54.85, 48.84], 20, 80); d["name"] = "obs3-row1-low"
d["notes"] = n3.format("Mean-sweep calibration: node 3 has the lower fixed cost, node 4 the lower unit cost; b12 ~ N(50, 10^2).")
dump("obs3_row1_mean50.json", d)
d = obs3(1, True, [304.85, 298.84], 270, 330); d["name"] = "obs3-row1-high"
d["notes"] = n3.format("Mean-sweep calibration: node 3 has the lower fixed cost, node 4 the lower unit cost; b12 ~ N(300, 10^2).")
dump("obs3_row1_mean300.json", d)
d = obs3(2, False, [304.85, 298.84], 270, 330); d["name"] = "obs3-row2-narrow"
d["notes"] = n3.format("Spread-sweep calibration: node 3 is cheaper but its airport handles at most 800 units of throughput; b12 ~ N(300, 10^2).")
dump("obs3_row2_sd10.json", d)
d = obs3(2, True, [348.46, 288.37], 0, 600); d["name"] = "obs3-row2-wide"
d["notes"] = n3.format("Spread-sweep calibration: node 3 is cheaper but its airport handles at most 800 units of throughput; b12 ~ N(300, 100^2).")
dump("obs3_row2_sd100.json", d)

def obs4(up13):
    doc = obs1(8000, 1, 1200, 10)
    doc["od_pairs"].append(pair("1", "3"))
    for a in doc["arcs"]:
        c = a["transport_cost"]
        a["transport_cost"] = [c, c, 1100 if (a["tail"], a["head"]) == ("1", "3") else c]
    doc["demand"]["lower"].append(0); doc["demand"]["upper"].append(up13)
    for s in doc["demand"]["samples"]: s["values"].append(0)
    doc["name"] = f"obs4-upper{up13}"
    doc["notes"] = ("Reconstructed five-node example: the right-hand calibration of the transfer-airport case plus "
                    "pair 1-3, which has no recorded demand. Carrying a unit of 1-3 costs 1100, above beta. "
                    f"Upper bound of 1-3: {up13}.")
    return doc
dump("obs4_zero_bound.json", obs4(0))
dump("obs4_positive_bound.json", obs4(20))
