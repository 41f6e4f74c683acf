#!/usr/bin/env python3
"""Generate the bundled 5-bus desk system (data/desk5) deterministically.

Five buses, six lines and five generators: a flexible nuclear unit and a coal
unit at bus 1, a flexible CCGT at bus 2, a peaking CT in the bus-4 load pocket,
and a flexible oil unit at bus 5. Wind sits at bus 3 and solar at bus 5.
Buses 3-5 are storage candidates. Profiles are 365 days of hourly data.
"""

import argparse
import csv
import math
import os

import numpy as np

BUSES = [("1", 0), ("2", 0), ("3", 1), ("4", 1), ("5", 1)]
LINES = [
    ("L12", "1", "2", 0.020, 500),
    ("L13", "1", "3", 0.025, 500),
    ("L23", "2", "3", 0.030, 300),
    ("L24", "2", "4", 0.020, 200),
    ("L35", "3", "5", 0.025, 300),
    ("L45", "4", "5", 0.030, 200),
]
# id, bus, gmin, cmin, csu, emin, esu, minup, mindown, [(mw, $/MWh, t/MWh)]
GENERATORS = [
    ("G1_nuclear", "1", 0, 0, 0, 0, 0, 1, 1, [(300, 5.0, 0.0)]),
    ("G2_coal", "1", 160, 1600, 10000, 160, 0, 8, 8, [(240, 18.0, 1.0), (200, 22.0, 1.05)]),
    ("G3_ccgt", "2", 0, 0, 0, 0, 0, 1, 1, [(200, 35.0, 0.40), (200, 40.0, 0.45)]),
    ("G4_ct", "4", 40, 200, 400, 24, 4, 2, 2, [(160, 55.0, 0.60)]),
    ("G5_oil", "5", 0, 0, 0, 0, 0, 1, 1, [(200, 90.0, 0.80)]),
]
LOAD_SHARE = {"1": 0.10, "2": 0.25, "3": 0.15, "4": 0.30, "5": 0.20}
WIND_BUS, WIND_MW = "3", 600.0
SOLAR_BUS, SOLAR_MW = "5", 300.0


def profiles(seed):
    rng = np.random.default_rng(seed)
    days, hours = 365, 24
    h = np.arange(hours)
    # double-hump daily shape, morning and evening peaks
    shape = 0.72 + 0.16 * np.exp(-((h - 8) ** 2) / 8.0) + 0.28 * np.exp(-((h - 18.5) ** 2) / 10.0)
    shape -= 0.08 * np.exp(-((h - 3.5) ** 2) / 6.0)
    load = np.zeros((days, hours))
    wind = np.zeros((days, hours))
    solar = np.zeros((days, hours))
    w = 0.4
    for d in range(days):
        season = 1.0 + 0.12 * math.cos(2 * math.pi * (d - 200) / 365) + 0.06 * math.cos(4 * math.pi * (d - 20) / 365)
        weekend = 0.92 if d % 7 in (5, 6) else 1.0
        level = 1280.0 * season * weekend * (1.0 + 0.03 * rng.standard_normal())
        load[d] = level * shape * (1.0 + 0.015 * rng.standard_normal(hours))
        # wind: AR(1) in a latent variable, stronger at night and in winter
        winter = 1.0 + 0.25 * math.cos(2 * math.pi * (d - 15) / 365)
        for t in range(hours):
            w = 0.9 * w + 0.1 * rng.normal(0.38, 0.55)
            night = 1.0 + 0.25 * math.cos(2 * math.pi * (t - 2) / 24)
            wind[d, t] = WIND_MW * min(1.0, max(0.0, w * winter * night))
        sun = 1.0 - 0.25 * math.cos(2 * math.pi * (d - 172) / 365) - 0.75
        day_len = 12.0 + 3.0 * math.cos(2 * math.pi * (d - 172) / 365)
        clouds = min(1.0, max(0.15, rng.beta(4, 1.6)))
        for t in range(hours):
            x = (t + 0.5 - 12.5) / (day_len / 2)
            if abs(x) < 1:
                solar[d, t] = SOLAR_MW * clouds * (0.75 + sun) * math.cos(x * math.pi / 2) ** 1.5
    return load, wind, solar


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(header)
        out.writerows(rows)


def fmt(v):
    return f"{v:.3f}".rstrip("0").rstrip(".")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "desk5"))
    ap.add_argument("--seed", type=int, default=20190601)
    args = ap.parse_args()
    out = os.path.abspath(args.out)
    os.makedirs(os.path.join(out, "timeseries"), exist_ok=True)

    write(os.path.join(out, "buses.csv"), ["id", "candidate_storage"], BUSES)
    write(os.path.join(out, "lines.csv"), ["id", "from", "to", "reactance_ohm", "capacity_mw"], LINES)
    header = ["id", "bus", "gmin_mw", "gmax_mw", "cmin_usd_h", "csu_usd", "emin_t_h", "esu_t", "minup_h", "mindown_h"]
    for k in range(1, 5):
        header += [f"seg{k}_mw", f"seg{k}_usd_mwh", f"seg{k}_t_mwh"]
    rows = []
    for gid, bus, gmin, cmin, csu, emin, esu, up, down, segs in GENERATORS:
        gmax = gmin + sum(s[0] for s in segs)
        row = [gid, bus, gmin, gmax, cmin, csu, emin, esu, up, down]
        for k in range(4):
            row += list(segs[k]) if k < len(segs) else ["", "", ""]
        rows.append(row)
    write(os.path.join(out, "generators.csv"), header, rows)

    load, wind, solar = profiles(args.seed)
    days = load.shape[0]
    for bus, share in LOAD_SHARE.items():
        write(os.path.join(out, "timeseries", f"load_{bus}.csv"), ["day", "hour", "mw"],
              [(d + 1, t + 1, fmt(share * load[d, t])) for d in range(days) for t in range(24)])
    write(os.path.join(out, "timeseries", f"ren_{WIND_BUS}.csv"), ["day", "hour", "mw"],
          [(d + 1, t + 1, fmt(wind[d, t])) for d in range(days) for t in range(24)])
    write(os.path.join(out, "timeseries", f"ren_{SOLAR_BUS}.csv"), ["day", "hour", "mw"],
          [(d + 1, t + 1, fmt(solar[d, t])) for d in range(days) for t in range(24)])
    ren = wind.sum() + solar.sum()
    print(f"wrote {out}: mean load {load.mean():.1f} MW, peak {load.max():.1f} MW, "
          f"wind CF {wind.mean() / WIND_MW:.3f}, solar CF {solar.mean() / SOLAR_MW:.3f}, "
          f"penetration {ren / load.sum():.3f}")


if __name__ == "__main__":
    main()
