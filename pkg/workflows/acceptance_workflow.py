import filecmp
import json
import os
import sys

import toml

import holab as hl

# python workflows/acceptance_workflow.py [acceptance|quick]
# "acceptance" runs the desk-scale acceptance sizes. "quick" is a smoke profile
# with reduced paths and horizons, its verdicts do not count as acceptance.
profile = sys.argv[1] if len(sys.argv) > 1 else "acceptance"
if profile not in ("acceptance", "quick"):
    raise SystemExit(f"unknown profile '{profile}', use 'acceptance' or 'quick'")

seed = 20240601
out_root = os.path.join("output", "files", profile)


def rank1(k=1.0):
    return {"family": "rank1", "rank": 1, "k": k}


def b2(k=1.0):
    return {"family": "B", "rank": 2, "k": k}


# label, system, experiment
acceptance = [
    *[
        (f"wall_avoidance_{label}_k{k:g}", system(k), {"name": "simulate_radial", "paths": 10_000, "horizon": 100.0})
        for label, system in (("rank1", rank1), ("B2", b2))
        for k in (0.5, 1.0, 2.0)
    ],
    ("lln_B2", b2(), {"name": "lln", "paths": 1000, "horizon": 200.0}),
    ("couple_rank1", rank1(), {"name": "couple", "paths": 2000, "horizon": 500.0, "x0": [1.0], "y0": [3.0]}),
    ("couple_B2", b2(), {"name": "couple", "paths": 2000, "horizon": 500.0}),
    ("theorem1_rank1", rank1(), {"name": "theorem1", "paths": 2000, "horizon": 200.0, "x0": [1.0], "y0": [3.0]}),
    ("theorem1_B2", b2(), {"name": "theorem1", "paths": 2000, "horizon": 200.0}),
    ("equivalence_rank1", rank1(), {"name": "equivalence", "paths": 5000, "horizon": 30.0}),
    ("equivalence_B2", b2(), {"name": "equivalence", "paths": 5000, "horizon": 30.0}),
    ("jump_cessation_B2", b2(), {"name": "simulate_full", "paths": 1000, "horizon": 60.0}),
    ("hw_rank1", rank1(), {"name": "hw", "paths": 5000, "horizon": 20.0}),
    ("hw_B2", b2(), {"name": "hw", "paths": 5000, "horizon": 20.0}),
    ("martingale_rank1", rank1(), {"name": "martingale", "paths": 50_000, "t_values": [5.0, 20.0]}),
    ("oracle_rank1", rank1(), {"name": "oracle_eval"}),
    ("basis_rank1", rank1(), {"name": "basis", "paths": 5000, "horizon": 20.0}),
]

# Smoke sizes per experiment name, never below the estimators' minimum path counts
quick = {
    "simulate_radial": {"paths": 500, "horizon": 20.0},
    "lln": {"paths": 200, "horizon": 50.0},
    "couple": {"paths": 200, "horizon": 100.0},
    "theorem1": {"paths": 200, "horizon": 50.0},
    "equivalence": {"paths": 1000, "horizon": 5.0},
    "simulate_full": {"paths": 200},
    "hw": {"paths": 500},
    "martingale": {"paths": 2000},
    "basis": {"paths": 500},
}


def make_config(label, system, experiment, threads=1, out=None):
    if profile == "quick":
        experiment = {**experiment, **quick.get(experiment["name"], {})}
    document = {
        "system": system,
        "experiment": experiment,
        "run": {"seed": seed, "threads": threads, "out": out or os.path.join(out_root, label)},
    }
    return hl.parse_config(toml.dumps(document))


statuses = {}
with hl.LogBlock(f"acceptance workflow ({profile})"):
    for label, system, experiment in acceptance:
        try:
            statuses[label] = "passed" if hl.run(make_config(label, system, experiment)) == 0 else "FAILED"
        except RuntimeError as error:
            # wall contact and runaway clocks abort the run
            statuses[label] = f"ABORTED ({error})"

    # Same config and seed under two thread budgets must give byte-identical result files
    label, system, experiment = "determinism_B2", b2(), {"name": "simulate_full", "paths": 200, "horizon": 10.0}
    folders = [os.path.join(out_root, f"{label}_threads{threads}") for threads in (1, 4)]
    for threads, folder in zip((1, 4), folders):
        hl.run(make_config(label, system, experiment, threads=threads, out=folder))
    with open(os.path.join(folders[0], "manifest.json"), encoding="utf-8") as handle:
        files = json.load(handle)["files"]
    identical = all(filecmp.cmp(*(os.path.join(f, name) for f in folders), shallow=False) for name in files)
    statuses[label] = "passed" if identical else "FAILED"

# passed, FAILED (a check failed) or ABORTED
for key, status in statuses.items():
    print(f"{key}: {status}")
