"""Generate an ILPD-shaped stand-in CSV.

The public ILPD file is not redistributed with this repository. This script
writes a synthetic file with the same schema, row count (583), class balance
(416 disease / 167 healthy), gender split (441 / 142) and 4 missing A/G cells,
drawn from class-conditional log-normal marginals matched to the published
summary statistics of the real columns. It is a fixture for exercising the
pipeline end to end; numbers measured on it are not the real-data numbers.
"""

import sys

import numpy as np

SEED = 20240101
N_DISEASE, N_HEALTHY = 416, 167
N_MALE = 441

# (median, mean) per class for the skewed lab values.
LOGNORMAL = {
    "TB": {1: (1.4, 4.16), 2: (0.8, 1.14)},
    "Alkphos": {1: (229.0, 319.0), 2: (186.0, 219.0)},
    "Sgpt": {1: (41.0, 99.6), 2: (27.0, 33.6)},
    "Sgot": {1: (52.0, 138.0), 2: (29.0, 40.7)},
}
CORR = np.array(
    [
        [1.00, 0.30, 0.30, 0.35],
        [0.30, 1.00, 0.25, 0.25],
        [0.30, 0.25, 1.00, 0.75],
        [0.35, 0.25, 0.75, 1.00],
    ]
)


def lognormal_params(median, mean):
    sigma = np.sqrt(2.0 * np.log(mean / median))
    return np.log(median), sigma


def draw_class(rng, label, n):
    z = rng.multivariate_normal(np.zeros(4), CORR, size=n)
    cols = {}
    for k, name in enumerate(["TB", "Alkphos", "Sgpt", "Sgot"]):
        mu, sigma = lognormal_params(*LOGNORMAL[name][label])
        cols[name] = np.exp(mu + sigma * z[:, k])
    age_mu, age_sd = (46.2, 15.7) if label == 1 else (41.2, 16.9)
    age = np.clip(np.rint(rng.normal(age_mu, age_sd, n)), 4, 90)
    tb = np.clip(np.round(cols["TB"], 1), 0.4, 75.0)
    ratio = rng.beta(4, 5, n) if label == 1 else rng.beta(3, 5, n)
    db = np.clip(np.round(tb * ratio, 1), 0.1, 19.7)
    alk = np.clip(np.rint(cols["Alkphos"]), 63, 2110)
    sgpt = np.clip(np.rint(cols["Sgpt"]), 10, 2000)
    sgot = np.clip(np.rint(cols["Sgot"]), 10, 4929)
    tp_mu, alb_mu = (6.46, 3.06) if label == 1 else (6.54, 3.34)
    zz = rng.multivariate_normal([0, 0], [[1, 0.78], [0.78, 1]], size=n)
    tp = np.clip(np.round(tp_mu + 1.08 * zz[:, 0], 1), 2.7, 9.6)
    alb = np.clip(np.round(alb_mu + 0.79 * zz[:, 1], 1), 0.9, 5.5)
    alb = np.minimum(alb, np.round(tp - 0.5, 1))
    alb = np.maximum(alb, 0.9)
    ag = np.clip(np.round(alb / np.maximum(tp - alb, 0.2), 2), 0.3, 2.8)
    target = np.full(n, label)
    return np.column_stack([age, tb, db, alk, sgpt, sgot, tp, alb, ag, target])


def main(path):
    rng = np.random.default_rng(SEED)
    rows = np.vstack([draw_class(rng, 1, N_DISEASE), draw_class(rng, 2, N_HEALTHY)])
    rows = rows[rng.permutation(len(rows))]
    # The real file carries a handful of exact duplicate records.
    for _ in range(13):
        src, dst = rng.choice(len(rows), 2, replace=False)
        if rows[src, -1] == rows[dst, -1]:
            rows[dst] = rows[src]
    gender = np.array(["Male"] * N_MALE + ["Female"] * (len(rows) - N_MALE))
    gender = gender[rng.permutation(len(rows))]
    missing = set(rng.choice(len(rows), 4, replace=False).tolist())

    fmt = ["{:.0f}", "{:.1f}", "{:.1f}", "{:.0f}", "{:.0f}", "{:.0f}", "{:.1f}", "{:.1f}", "{:.2f}", "{:.0f}"]
    with open(path, "w", newline="") as fh:
        fh.write("Age,Gender,TB,DB,Alkphos,Sgpt,Sgot,TP,ALB,A/G Ratio,Selector\n")
        for i, row in enumerate(rows):
            cells = [f.format(v) for f, v in zip(fmt, row)]
            if i in missing:
                cells[8] = ""
            cells.insert(1, gender[i])
            fh.write(",".join(cells) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ilpd_standin.csv")
