"""Validate a run directory's report.json against docs/report.schema.json."""
import argparse
import json
import sys

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--schema", required=True)
    parser.add_argument("--report", required=True)
    args = parser.parse_args()
    with open(args.schema) as f:
        schema = json.load(f)
    with open(args.report) as f:
        report = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print(f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}", file=sys.stderr)
    if errors:
        return 1
    print(f"{args.report}: {len(report['rows'])} rows valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
