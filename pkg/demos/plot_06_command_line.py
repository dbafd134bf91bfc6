"""
The vt command line
===================

The same checks run from the shell and write JSON reports::

    vt verify --check dual-route --p 2 --alpha 0.5 --seed 7 --out reports/
    vt regularity --config example1.json --out reports/

This script drives the entry point in-process.
"""

import json
import tempfile
from pathlib import Path

from padicvt.cli import main

out = Path(tempfile.mkdtemp())
code = main(["verify", "--check", "dual-route", "--p", "2", "--alpha", "0.5", "--seed", "7", "--out", str(out)])
report = json.loads((out / "verify_report.json").read_text())
print("exit", code, "max gap", report["lhs"], "anchor:", report["paper_ref"])

cfg = out / "example1.json"
cfg.write_text(json.dumps({"domain_family": "sphere-union", "alpha": 0.5, "lambda": {"ratio": 3, "count": 7}, "m_list": [730]}))
code = main(["regularity", "--config", str(cfg), "--out", str(out)])
print("exit", code)
print((out / "regularity.csv").read_text())
