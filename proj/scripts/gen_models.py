#!/usr/bin/env python3
"""Writes the shipped rule bases under data/models/.

The grids are regular, so the rule tables are generated from a score per
term combination rather than typed out by hand. Re-run after editing.
"""
import itertools
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "models"


def tri(label, a, b, c):
    return {"label": label, "kind": "triangular", "params": [a, b, c]}


def trap(label, a, b, c, d):
    return {"label": label, "kind": "trapezoidal", "params": [a, b, c, d]}


def lmh(name, unit="fraction"):
    return {
        "name": name,
        "universe": [0.0, 1.0],
        "unit": unit,
        "terms": [tri("Low", 0.0, 0.0, 0.5), tri("Medium", 0.0, 0.5, 1.0), tri("High", 0.5, 1.0, 1.0)],
    }


def distance(name):
    # Breakpoints are fractions of the graph diameter; the loader multiplies
    # them by d_max.
    return {
        "name": name,
        "universe": [0.0, 1.0],
        "unit": "m",
        "scale_to": "d_max",
        "terms": [
            trap("Near", 0.0, 0.0, 0.15, 0.35),
            tri("Medium", 0.15, 0.35, 0.6),
            trap("Far", 0.35, 0.6, 1.0, 1.0),
        ],
    }


def ladder(name, lo, hi, n, unit):
    step = (hi - lo) / (n - 1)
    centers = [lo + i * step for i in range(n)]
    terms = []
    for i, c in enumerate(centers):
        a = max(lo, c - step)
        b = min(hi, c + step)
        terms.append(tri(f"C{i}", round(a, 6), round(c, 6), round(b, 6)))
    return {"name": name, "universe": [lo, hi], "unit": unit, "terms": terms}


def rule(clauses, out_var, out_term):
    return {"if": [{"var": v, "term": t} for v, t in clauses], "then": {"var": out_var, "term": out_term}}


def model(name, inputs, output, rules):
    return {"name": name, "resolution": 1001, "inputs": inputs, "output": output, "rules": rules}


def cost_sc4():
    # 0 = best level of each input: High availability, Near target, High energy.
    avail = {"High": 0, "Medium": 1, "Low": 2}
    dist = {"Near": 0, "Medium": 1, "Far": 2}
    energy = {"High": 0, "Medium": 1, "Low": 2}
    rules = [
        rule([("Availability", a), ("DistanceTarget", d), ("EnergyLevel", e)], "Cost", f"C{sa + sd + se}")
        for (a, sa), (d, sd), (e, se) in itertools.product(avail.items(), dist.items(), energy.items())
    ]
    return model(
        "cost_sc4",
        [lmh("Availability"), distance("DistanceTarget"), lmh("EnergyLevel")],
        ladder("Cost", 0.0, 100.0, 7, "cost"),
        rules,
    )


def recharge_sc5():
    energy = {
        "name": "EnergyLevel",
        "universe": [0.0, 1.0],
        "unit": "fraction",
        "terms": [
            trap("Low", 0.0, 0.0, 0.2, 0.4),
            tri("Medium", 0.2, 0.45, 0.7),
            trap("High", 0.5, 0.7, 1.0, 1.0),
        ],
    }
    out = {
        "name": "Recharge",
        "universe": [0.0, 1.0],
        "unit": "fraction",
        "terms": [tri("No", 0.0, 0.0, 0.5), tri("Maybe", 0.0, 0.5, 1.0), tri("Yes", 0.5, 1.0, 1.0)],
    }
    rules = [
        rule([("EnergyLevel", "Low")], "Recharge", "Yes"),
        rule([("EnergyLevel", "Medium"), ("DistanceStation", "Near")], "Recharge", "Yes"),
        rule([("EnergyLevel", "Medium"), ("DistanceStation", "Medium")], "Recharge", "Maybe"),
        rule([("EnergyLevel", "Medium"), ("DistanceStation", "Far")], "Recharge", "No"),
        rule([("EnergyLevel", "High")], "Recharge", "No"),
        rule([("EnergyLevel", "Medium"), ("Availability", "Low")], "Recharge", "No"),
    ]
    return model("cost_recharge_sc5", [energy, distance("DistanceStation"), lmh("Availability")], out, rules)


def station_sc6():
    dist = {"Near": 0, "Medium": 1, "Far": 2}
    avail = {"High": 0, "Medium": 1, "Low": 2}
    rules = [
        rule([("DistanceStation", d), ("AvailabilityStation", a)], "StationCost", f"C{sd + sa}")
        for (d, sd), (a, sa) in itertools.product(dist.items(), avail.items())
    ]
    return model(
        "station_sc6",
        [distance("DistanceStation"), lmh("AvailabilityStation")],
        ladder("StationCost", 0.0, 100.0, 5, "cost"),
        rules,
    )


def rate_sc7():
    out = {
        "name": "RechargeRate",
        "universe": [0.0, 1.0],
        "unit": "fraction",
        "terms": [trap("Partial", 0.0, 0.0, 0.7, 0.9), tri("Full", 0.8, 1.0, 1.0)],
    }
    rules = [
        rule([("Urgency", "Low")], "RechargeRate", "Full"),
        rule([("Urgency", "Medium"), ("EnergyLevel", "Low")], "RechargeRate", "Full"),
        rule([("Urgency", "Medium"), ("EnergyLevel", "Medium")], "RechargeRate", "Partial"),
        rule([("Urgency", "Medium"), ("EnergyLevel", "High")], "RechargeRate", "Partial"),
        rule([("Urgency", "High")], "RechargeRate", "Partial"),
    ]
    return model("rate_sc7", [lmh("Urgency"), lmh("EnergyLevel")], out, rules)


def speed_sc8():
    headway = {
        "name": "Headway",
        "universe": [0.0, 30.0],
        "unit": "m",
        "terms": [
            trap("Near", 0.0, 0.0, 3.0, 8.0),
            tri("Medium", 3.0, 8.0, 15.0),
            trap("Far", 8.0, 15.0, 30.0, 30.0),
        ],
    }
    out = {
        "name": "SpeedFactor",
        "universe": [0.75, 1.25],
        "unit": "factor",
        "terms": [tri("Slow", 0.75, 0.75, 1.0), tri("Normal", 0.75, 1.0, 1.25), tri("Fast", 1.0, 1.25, 1.25)],
    }
    rules = [
        rule([("Headway", "Near")], "SpeedFactor", "Slow"),
        rule([("Headway", "Medium")], "SpeedFactor", "Normal"),
        rule([("Headway", "Far"), ("Urgency", "Low")], "SpeedFactor", "Normal"),
        rule([("Headway", "Far"), ("Urgency", "Medium")], "SpeedFactor", "Fast"),
        rule([("Headway", "Far"), ("Urgency", "High")], "SpeedFactor", "Fast"),
    ]
    return model("speed_sc8", [lmh("Urgency"), headway], out, rules)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for m in (cost_sc4(), recharge_sc5(), station_sc6(), rate_sc7(), speed_sc8()):
        (OUT / f"{m['name']}.json").write_text(json.dumps(m, indent=2) + "\n")


if __name__ == "__main__":
    main()
