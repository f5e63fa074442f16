"""Runs the CLI on small inputs and validates every emitted JSON document.

usage: validate_schemas.py TOPO_GUARD SCHEMA_DIR DATA_DIR
"""

import copy
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    schemas, resources = {}, []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        schemas[path.name] = doc
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return schemas, Registry().with_resources(resources)


def main():
    binary, schema_dir, data_dir = (pathlib.Path(a) for a in sys.argv[1:4])
    schemas, registry = load_registry(schema_dir)

    def validator(name):
        cls = jsonschema.validators.validator_for(schemas[name])
        cls.check_schema(schemas[name])
        return cls(schemas[name], registry=registry)

    trace_v = validator("trace.schema.json")
    summary_v = validator("summary.schema.json")
    config_v = validator("run_config.schema.json")
    checked = 0

    def run(*args):
        return subprocess.run([str(binary), *map(str, args)], check=True, capture_output=True, text=True).stdout

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        (tmp / "in").mkdir()
        run("generate", "--shape", "circle", "-n", "40", "--out", tmp / "in" / "circle.csv")
        run("generate", "--shape", "signature_like", "-n", "40", "--out", tmp / "in" / "sig.csv")
        shutil.copy(data_dir / "two_clusters_bridge.csv", tmp / "in" / "bridge.csv")

        config = json.loads(run("run", "-i", tmp / "in" / "*.csv", "--max-iters", "2", "--print-config"))
        config_v.validate(config)
        checked += 1
        (tmp / "cfg.json").write_text(json.dumps(config))
        run("run", "--config", tmp / "cfg.json", "--out", tmp / "out")

        traces = sorted((tmp / "out").glob("*/trace.json"))
        assert len(traces) == 3, traces
        for path in traces:
            trace = json.loads(path.read_text())
            trace_v.validate(trace)
            checked += 1
            for it in trace["iterations"]:
                for k in range(3):
                    csv = path.parent / "diagrams" / f"t{it['t']}_dim{k}.csv"
                    assert csv.exists(), csv
        summary_v.validate(json.loads((tmp / "out" / "summary.json").read_text()))
        run("stats", tmp / "out" / "*" / "trace.json", "--out", tmp / "stats")
        summary_v.validate(json.loads((tmp / "stats" / "summary.json").read_text()))
        checked += 2

        # the schemas must actually constrain the documents
        bad = copy.deepcopy(json.loads(traces[0].read_text()))
        bad["iterations"][0]["decision"] = "MAYBE"
        assert not trace_v.is_valid(bad)
        bad_config = dict(config, gamma=0.7)
        assert not config_v.is_valid(bad_config)
        assert not config_v.is_valid(dict(config, extra=1))

    print(f"validated {checked} documents")


if __name__ == "__main__":
    main()
