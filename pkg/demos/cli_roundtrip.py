"""End-to-end run of the hallforge command line.

Writes a category spec and two element files into a scratch directory,
multiplies them, tabulates structure constants twice to show the pair
cache warming up, and finishes with a verification suite. Everything the
CLI emits is deterministic JSON, so repeated runs produce identical bytes.
"""

import json
import os
import tempfile

from hallforge import cli
from hallforge.files import AlgebraHandle, CategorySpec, write_element
from hallforge.quiver import enumerate_reps

root = tempfile.mkdtemp(prefix="hallforge-demo-")
os.environ["HALLFORGE_CACHE_DIR"] = os.path.join(root, "cache")

spec = CategorySpec(q=2, vertices=2, arrows=[(1, 2)], backend="abelian")
spec_path = os.path.join(root, "spec.json")
with open(spec_path, "w") as fh:
    json.dump({"format_version": 1, **spec.to_dict()}, fh, indent=2, sort_keys=True)

# element files carry the spec hash so they cannot be replayed against
# the wrong category
handle = AlgebraHandle(spec, "hall")
registry = enumerate_reps(spec.quiver, spec.field_obj(), (1, 1),
                          handle.backend.caps, handle.backend.registry)
by_dims = {registry.object(i).dims: i for i in range(len(registry))}
x = handle.hall.basis(registry.object(by_dims[(1, 0)]))  # simple at vertex 1
y = handle.hall.basis(registry.object(by_dims[(0, 1)]))  # simple at vertex 2
x_path = os.path.join(root, "x.json")
y_path = os.path.join(root, "y.json")
write_element(x_path, handle, x)
write_element(y_path, handle, y)

prod_path = os.path.join(root, "product.json")
rc = cli.main(["product", "--spec", spec_path, x_path, y_path, "--out", prod_path])
print("product rc:", rc)
print(open(prod_path).read())

table_path = os.path.join(root, "table.json")
for attempt in ("cold", "warm"):
    rc = cli.main(["table", "--spec", spec_path, "--dim-cap", "1,1",
                   "--out", table_path])
    cache_file = next(
        os.path.join(os.environ["HALLFORGE_CACHE_DIR"], f)
        for f in os.listdir(os.environ["HALLFORGE_CACHE_DIR"])
    )
    lines = sum(1 for _ in open(cache_file))
    print(f"table rc ({attempt}): {rc}, cache lines: {lines}")

table = json.load(open(table_path))
print("classes:", len(table["classes"]), "products:", len(table["products"]))

report_path = os.path.join(root, "report.json")
rc = cli.main(["verify", "associativity", "--spec", spec_path,
               "--dim-cap", "1,1", "--out", report_path])
report = json.load(open(report_path))
print(f"verify rc: {rc}, status: {report['status']}, checks: {report['checks']}")
