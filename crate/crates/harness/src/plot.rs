//! Plot script generation. The script only needs the CSV and matplotlib.

/// Python script that draws BER-vs-SNR panels for `x` and `s` from
/// `csv_path` and saves them next to it as PNG files.
pub fn plot_script(csv_path: &str) -> String {
    let quoted = format!("{csv_path:?}");
    SCRIPT.replace("@CSV@", &quoted)
}

const SCRIPT: &str = r#"#!/usr/bin/env python3
# Regenerate with `pbit emit-plots`.
import csv
import math
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV = @CSV@
Z = 1.959963984540054


def wilson(p, n):
    if n == 0:
        return 0.0
    k = Z * Z
    d = 1 + k / n
    return Z * math.sqrt(p * (1 - p) / n + k / (4 * n * n)) / d


curves = defaultdict(list)
with open(CSV, newline="") as f:
    for row in csv.DictReader(f):
        for sig, count in (("x", "bit_count_x"), ("s", "bit_count_s")):
            value = row["ber_" + sig]
            if value == "":
                continue
            key = (sig, row["scheme"], row["phase_mode"], row["rho"])
            n = int(row[count])
            p = float(value)
            curves[key].append((float(row["snr_db"]), p, wilson(p, n)))

base = os.path.splitext(CSV)[0]
for sig in ("x", "s"):
    keys = sorted(k for k in curves if k[0] == sig)
    if not keys:
        continue
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for key in keys:
        pts = sorted(p for p in curves[key] if math.isfinite(p[0]))
        if not pts:
            continue
        snr, ber, hw = zip(*pts)
        style = "-" if key[2] == "optimized" else ":"
        label = "%s %s rho=%s" % (key[1], key[2], key[3])
        ax.errorbar(snr, [max(b, 1e-7) for b in ber], yerr=hw, fmt=style + "o",
                    markersize=3, capsize=2, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER of " + sig)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig("%s_ber_%s.png" % (base, sig), dpi=150)
    print("wrote %s_ber_%s.png" % (base, sig))
"#;
