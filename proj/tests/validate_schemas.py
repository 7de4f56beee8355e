#!/usr/bin/env python3
"""Validates every JSON document the tool emits against data/schemas.

usage: validate_schemas.py RVW_BINARY DATA_DIR
"""

import json
import os
import subprocess
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    rvw, data = sys.argv[1], sys.argv[2]
    schema_dir = os.path.join(data, "schemas")
    schemas = {}
    for name in sorted(os.listdir(schema_dir)):
        schemas[name] = load(os.path.join(schema_dir, name))
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items()
    )
    for s in schemas.values():
        Draft202012Validator.check_schema(s)

    def fx(name):
        return os.path.join(data, "fixtures", name)

    def run(*args):
        out = subprocess.run([rvw, *args, "--format", "json"], capture_output=True,
                             text=True, timeout=300)
        if out.returncode != 0:
            raise SystemExit(f"{args}: exit {out.returncode}: {out.stderr}")
        return json.loads(out.stdout)

    cases = [
        ("rvw.bound", run("bound", "--p-hat", "0.0449", "--bits", "426")),
        ("rvw.bound", run("bound", "--p-hat", "0", "--bits", "1", "--n", "1")),
        ("rvw.table", run("table", "--paper-preset", "option1")),
        ("rvw.table", run("table", "--doc", f"ResNet-152,0.0449,{fx('resnet152.rvw')}")),
        ("rvw.ledger", run("count", fx("batchnorm.graph.json"))),
        ("rvw.ledger", run("count", fx("resnet152.rvw"), "--inherit", fx("alexnet.rvw"))),
        ("rvw.ledger", run("count", fx("densenet264.rvw"), "--english", "word")),
        ("rvw.verify", run("verify", "all", "--trials", "2000")),
        ("rvw.doc", run("parse", fx("resnet152.rvw"))),
        ("rvw.doc", run("parse", fx("densenet264.rvw"))),
        ("rvw.graph", load(fx("batchnorm.graph.json"))),
        ("rvw.codebook", load(os.path.join(data, "codebook.json"))),
    ]
    for name in ("resnet152", "densenet264", "resnet152_forward"):
        cases.append(("rvw.ledger", load(os.path.join(data, "golden", f"{name}.ledger.json"))))

    failed = 0
    for schema, doc in cases:
        v = Draft202012Validator(schemas[f"{schema}.schema.json"], registry=registry)
        errors = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
        status = "ok" if not errors else "FAIL"
        print(f"{status:4} {schema}")
        for e in errors[:5]:
            print(f"     {list(e.path)}: {e.message}")
        failed += bool(errors)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
