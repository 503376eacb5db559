"""Runs the CLI on a few configurations and validates every report against the schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

cli, schema_path = sys.argv[1], sys.argv[2]
schema = json.loads(Path(schema_path).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

runs = [
    (["--system", "kepler", "--fixture", "ellipse", "--relation", "translation-killing"], 0),
    (["--system", "flat-oscillator", "--relation", "homogeneous", "--mu", "2", "--nu", "2"], 0),
    (["--system", "sphere", "--t-end", "5"], 2),
    (["--system", "kepler", "--fixture", "ellipse", "--dt", "0.5", "--t-end", "50"], 1),
]

failures = 0
with tempfile.TemporaryDirectory() as tmp:
    # Radial infall from rest reaches the Kepler origin and trips the guard.
    infall = Path(tmp) / "infall.json"
    infall.write_text(json.dumps({"system": "kepler", "initial": {"q": [1, 0], "v": [0, 0]},
                                  "integrator": {"t_end": 5}}))
    runs.append((["--config", str(infall)], 1))
    for i, (args, expected_code) in enumerate(runs):
        out = Path(tmp) / str(i)
        proc = subprocess.run([cli, "run", *args, "--output", str(out)], capture_output=True, text=True)
        report = json.loads((out / "report.json").read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: e.path)
        ok = not errors and proc.returncode == expected_code
        print(f"{'ok  ' if ok else 'FAIL'} {' '.join(args)} exit={proc.returncode} status={report['status']}")
        for e in errors:
            print(f"     {list(e.path)}: {e.message}")
        failures += not ok

sys.exit(1 if failures else 0)
