#!/usr/bin/env python3
"""Validate CLI JSON outputs and shipped fixtures against the published schemas.

Usage: validate_schemas.py <cli-binary> <source-dir>
"""
import json
import pathlib
import subprocess
import sys
import tempfile

try:
    import jsonschema
except ImportError:
    print("SKIP: python jsonschema not available")
    sys.exit(0)


def main():
    cli = sys.argv[1]
    src = pathlib.Path(sys.argv[2])
    schemas = {
        name: json.loads((src / "schemas" / f"{name}.schema.json").read_text())
        for name in ("problem", "report", "mcsummary")
    }
    failures = 0

    def check(instance, schema_name, label):
        nonlocal failures
        try:
            jsonschema.validate(instance, schemas[schema_name])
            print(f"ok: {label} matches {schema_name}.schema.json")
        except jsonschema.ValidationError as e:
            failures += 1
            print(f"FAIL: {label}: {e.message}")

    # every shipped fixture validates as a problem file
    for path in sorted((src / "problems").glob("*.json")):
        check(json.loads(path.read_text()), "problem", f"problems/{path.name}")

    # a malformed problem must NOT validate
    bad = {"name": "x", "xi": 1, "drift": "x", "sigma": "1", "bogus": 1}
    try:
        jsonschema.validate(bad, schemas["problem"])
        failures += 1
        print("FAIL: schema accepted an unknown key")
    except jsonschema.ValidationError:
        print("ok: problem schema rejects unknown keys")

    def run(*args):
        return subprocess.run([cli, *args], capture_output=True, text=True, check=True).stdout

    example = str(src / "problems" / "example.json")
    semilinear = str(src / "problems" / "semilinear.json")
    gbm = str(src / "problems" / "gbm.json")

    # single-criterion report object
    report = json.loads(run("check", example, "--criterion", "feller", "--json"))
    check(report, "report", "check --criterion feller --json")

    # --criterion all emits an array of report objects
    reports = json.loads(run("check", semilinear, "--json"))
    assert isinstance(reports, list) and reports, "expected a non-empty report array"
    for rep in reports:
        check(rep, "report", f"check all --json [{rep.get('id')}]")

    # mc summary (stdout and --out agree)
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "mc.json"
        stdout = run("mc", gbm, "--paths", "16", "--seed", "7", "--out", str(out))
        assert stdout == "", "mc --out should not duplicate JSON on stdout"
        summary = json.loads(out.read_text())
    check(summary, "mcsummary", "mc --paths 16")

    if failures:
        print(f"{failures} schema validation failure(s)")
        sys.exit(1)
    print("all schema validations passed")


if __name__ == "__main__":
    main()
