"""Build the benchmark CSV files in data/ from the KEEL copies of the UCI
datasets shipped in the `keel-ds` wheel (pip download --no-deps keel-ds).

usage: python3 scripts/prepare_data.py path/to/keel_ds-*.whl data/
"""
import collections
import sys
import zipfile


def read_dat(text):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        cells = [c.strip() for c in line.split(",")]
        rows.append((cells[:-1], cells[-1]))
    return rows


def write_csv(path, header, rows):
    with open(path, "w") as out:
        out.write(",".join(header) + "\n")
        for feats, label in rows:
            out.write(",".join(feats) + "," + label + "\n")


def drop_constant(rows):
    d = len(rows[0][0])
    keep = [j for j in range(d) if len({float(r[0][j]) for r in rows}) > 1]
    return keep, [([f[j] for j in keep], l) for f, l in rows]


def yeast(whl):
    """Reassemble the 10-class yeast data from KEEL's binarized variants."""

    def rd(name):
        raw = whl.read(f"keel_ds/data/imbalanced/raw/{name}.dat").decode()
        return [(tuple(round(float(x), 2) for x in f), l) for f, l in read_dat(raw)]

    base = rd("yeast1")
    labels = [None] * len(base)
    for name, cls in [("yeast1", "NUC"), ("yeast3", "ME3"), ("yeast4", "ME2"),
                      ("yeast5", "ME1"), ("yeast6", "EXC")]:
        rows = rd(name)
        assert sorted(k for k, _ in rows) == sorted(k for k, _ in base), name
        need = collections.Counter(k for k, l in rows if l == "positive")
        for i, (k, _) in enumerate(base):
            if need[k] > 0 and labels[i] is None:
                need[k] -= 1
                labels[i] = cls
        assert sum(need.values()) == 0, name
    pox = {k for k, l in rd("yeast-2_vs_8") if l == "positive"}
    # yeast-1_vs_7 omits the pox column
    vac = {k for k, l in rd("yeast-1_vs_7") if l == "positive"}
    cyt = {k for k, l in rd("yeast-2_vs_4") if l == "negative"}
    for i, (k, _) in enumerate(base):
        if labels[i] is not None:
            continue
        if k in pox:
            labels[i] = "POX"
        elif k[:5] + k[6:] in vac:
            labels[i] = "VAC"
        elif k in cyt:
            labels[i] = "CYT"
        elif k[4] == 1.0:
            labels[i] = "ERL"
        else:
            labels[i] = "MIT"
    counts = collections.Counter(labels)
    expected = {"CYT": 463, "NUC": 429, "MIT": 244, "ME3": 163, "ME2": 51,
                "ME1": 44, "EXC": 35, "VAC": 30, "POX": 20, "ERL": 5}
    assert counts == expected, counts
    return [(["%.2f" % x for x in k], c) for (k, _), c in zip(base, labels)]


def main():
    whl = zipfile.ZipFile(sys.argv[1])
    out = sys.argv[2].rstrip("/")

    def balanced(name):
        return read_dat(whl.read(f"keel_ds/data/balanced/raw/{name}.dat").decode())

    keep, rows = drop_constant(balanced("segment"))
    write_csv(f"{out}/statlog_image.csv", [f"f{j}" for j in keep] + ["class"], rows)

    rows = balanced("penbased")[:7494]
    write_csv(f"{out}/pendigits.csv", [f"f{j}" for j in range(16)] + ["class"], rows)

    keep, rows = drop_constant(balanced("optdigits")[:3823])
    write_csv(f"{out}/optical.csv", [f"f{j}" for j in keep] + ["class"], rows)

    write_csv(f"{out}/yeast.csv",
              ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc", "class"], yeast(whl))


if __name__ == "__main__":
    main()
