"""The end-to-end file pipeline: generate, prune, evaluate, sweep.

Everything here is also reachable from the command line:

    lassoprune gen   --out demo_problem --seed 5 --units 3 --samples 64
    lassoprune prune demo_problem/manifest.json --parallel 4
    lassoprune eval  demo_problem/manifest.json
    lassoprune sweep demo_problem/manifest.json --out demo_sweep

Run:  python demos/05_file_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from lassoprune import eval_error, generate_problem, run_prune, sweep

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    manifest = generate_problem(
        tmp / "problem", seed=5, units=3, nodes_per_unit=2,
        rows=8, cols=8, samples=64, pattern="unstructured:0.5", warm="wanda",
    )
    print(f"generated problem under {manifest.parent.name}/ "
          f"({len(list(manifest.parent.glob('*.npy')))} arrays + manifest)")

    report = run_prune(manifest, parallelism=4, report_path=tmp / "report.json")
    print("\nper-node results:")
    for unit_name, unit in report["units"].items():
        for node_name, node in unit["nodes"].items():
            print(f"  {unit_name}/{node_name}: error {node['best_total_error']:.4f}, "
                  f"sparsity {node['achieved_sparsity']:.0%}, "
                  f"stopped by {node['stop_reason']}")

    held_out = eval_error(manifest)
    print("\nheld-out unit output errors (fresh activations):")
    for unit_name, entry in held_out["units"].items():
        print(f"  {unit_name}: {entry['output_error']:.4f}")

    summary = sweep(manifest, [0.1, 0.3, 0.5, 0.7], tmp / "sweep")
    print("\nerror vs sparsity (mean best error per node):")
    for rate in summary["rates"]:
        entry = summary["per_rate"][f"{rate:g}"]
        bar = "#" * int(40 * entry["mean_best_total_error"]
                        / summary["per_rate"]["0.7"]["mean_best_total_error"])
        print(f"  {rate:.0%}: {entry['mean_best_total_error']:.4f} {bar}")

    print("\nreports written:",
          json.loads((tmp / "sweep" / "sweep.json").read_text())["rates"])
