"""
A tour of the experiment catalog
================================

Every catalog entry is a plain dict, so it can be inspected, tweaked and run
from Python exactly as the command line would run it.
"""

import json
import tempfile

from enlargement import experiments as X

for e in X.catalog("smoke"):
    print(f"{e['name']:26s} {e['kind']}")

# run the small counterexample entry and look at its summary
entry = X.catalog_entry("pe_counterexample_t3", "smoke")
with tempfile.TemporaryDirectory() as tmp:
    res = X.run(entry, tmp)
    summary = json.loads(res.summary_path.read_text())
    print("\nspec hash:", res.spec_hash)
    for key in ("cut_size", "exact_matches_formula", "sweep_strictly_inside"):
        print(f"  {key}: {summary[key]}")
    print(res.csv_path.read_text().splitlines()[0])

# changing a parameter changes the hash, so outputs never get mixed up
entry["seed"] += 1
print("new hash:", X.spec_hash(entry))
