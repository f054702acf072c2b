"""Validates CLI output against the shipped JSON schemas with the reference jsonschema package.

usage: schema_check.py <cli> <source dir> <work dir>
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema


def main() -> int:
    cli, src, work = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    store = work / "store"
    data = src / "data"

    def run(*args, ok=True):
        proc = subprocess.run([cli, "--store", str(store), "--threads", "2", *args], capture_output=True, text=True)
        if ok and proc.returncode != 0:
            raise SystemExit(f"{args[0]} failed ({proc.returncode}): {proc.stdout}{proc.stderr}")
        return proc.returncode, json.loads(proc.stdout.splitlines()[0])

    graph_schema = json.loads((src / "schemas" / "graph.schema.json").read_text())
    error_schema = json.loads((src / "schemas" / "error.schema.json").read_text())
    graph_validator = jsonschema.Draft202012Validator(graph_schema)
    error_validator = jsonschema.Draft202012Validator(error_schema)
    jsonschema.Draft202012Validator.check_schema(graph_schema)
    jsonschema.Draft202012Validator.check_schema(error_schema)

    run("import", str(data / "kitchen.obj"), "--labels", str(data / "kitchen.labels.json"))
    run("build", "--scene", "kitchen", "--params", str(data / "kitchen.params.json"), "--name", "k")
    run("viewshed", "--graph", "k", "--config", '{"ray_count": 64}')
    run("costs", "--graph", "k", "--config", '{"promote": [{"attr": "view_max", "mode": "reciprocal"}]}')
    out = work / "k.json"
    run("export", "--graph", "k", "--format", "json", "--out", str(out))
    doc = json.loads(out.read_text())

    failures = []
    for err in graph_validator.iter_errors(doc):
        failures.append(f"graph: {err.json_path}: {err.message}")
    if doc["vertex_count"] != len(doc["vertices"]) or doc["edge_count"] != len(doc["edges"]):
        failures.append("graph: counts disagree with array lengths")
    if not any("view_max" in e["extras"] for e in doc["edges"]):
        failures.append("graph: promoted attribute missing from edges")

    # The schema must actually reject malformed documents.
    broken = json.loads(json.dumps(doc))
    broken["edges"][0]["step"] = "INVALID"
    broken["vertices"][0]["key"] = [0, 0]
    if graph_validator.is_valid(broken):
        failures.append("graph: schema accepted a malformed document")

    errors = [
        run("frobnicate", ok=False),
        run("path", "--graph", "missing", "--start", "0,0", "--goal", "1,1", ok=False),
        run("build", "--scene", "kitchen", "--params", '{"tau": [99, 99, 0]}', ok=False),
        run("build", "--scene", "kitchen", "--params", '{"tau": [0, 0, 0], "zeta": 1}', ok=False),
    ]
    for rc, body in errors:
        if rc == 0:
            failures.append(f"error: command succeeded: {body}")
        for err in error_validator.iter_errors(body):
            failures.append(f"error: {body}: {err.message}")

    for line in failures:
        print("FAIL", line)
    print(f"schema check: {len(doc['vertices'])} vertices, {len(doc['edges'])} edges, "
          f"{len(errors)} error documents, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
