"""Every shipped configuration validates against the published schema."""
import glob
import json
import os
import sys

import jsonschema

schema_path, config_dir = sys.argv[1], sys.argv[2]
with open(schema_path) as f:
    schema = json.load(f)
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

bad = 0
files = sorted(glob.glob(os.path.join(config_dir, "*.json")))
for path in files:
    with open(path) as f:
        doc = json.load(f)
    errors = list(validator.iter_errors(doc))
    for e in errors:
        print(f"FAIL {os.path.basename(path)}: {'/'.join(map(str, e.path))}: {e.message}")
    if not errors:
        print(f"ok   {os.path.basename(path)}")
    bad += bool(errors)

# The schema must also reject what the loader rejects.
for doc in ({"system": {"type": "disc", "colour": 1}},
            {"integrator": {"steps": 0}},
            {"output": {"format": "yaml"}},
            {"path": {"type": "sampled"}}):
    if validator.is_valid(doc):
        print(f"FAIL schema accepts {json.dumps(doc)}")
        bad += 1

if not files:
    print("no configs found")
    bad += 1
sys.exit(1 if bad else 0)
