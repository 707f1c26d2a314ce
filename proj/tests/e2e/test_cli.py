#!/usr/bin/env python3
import argparse
import csv
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

try:
    import jsonschema
except ImportError:
    jsonschema = None

FAILURES = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        FAILURES.append(what)


class Cli:
    def __init__(self, exe, cwd):
        self.exe = exe
        self.cwd = cwd

    def __call__(self, *args):
        return subprocess.run([self.exe, *args], cwd=self.cwd, capture_output=True, text=True)


def close(a, b, tol=1e-12):
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(close(a[k], b[k], tol) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(close(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        return math.isclose(a, b, rel_tol=0, abs_tol=tol)
    return a == b


def metric(report, name):
    return next(m for m in report["metrics"] if m["metric"] == name)


def load_truth(path):
    truth = {}
    for line in Path(path).read_text().splitlines():
        parts = line.split("#")[0].split()
        if len(parts) == 3:
            truth[(parts[0], parts[1])] = float(parts[2])
    return truth


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--data", required=True, type=Path)
    ap.add_argument("--schema", required=True, type=Path)
    ap.add_argument("--workdir", required=True, type=Path)
    args = ap.parse_args()

    work = args.workdir.resolve()
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    cli = Cli(str(Path(args.cli).resolve()), work)
    truth = load_truth(args.data / "scenario_truth.txt")
    schema = json.loads(args.schema.read_text())
    validator = jsonschema.Draft7Validator(schema) if jsonschema else None
    if validator is None:
        print("note: jsonschema not installed, schema validation skipped")

    def valid(report, what):
        if validator is None:
            return
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors[:5]:
            print("     ", list(e.path), e.message)
        check(not errors, f"{what} matches the report schema")

    visa_query = ["--sensitive", "Nationality=0,1", "--outcome", "Visa=1"]

    r = cli("generate", "--scenario", "visa", "--n", "50000", "--seed", "3", "--out", "visa.csv",
            "--emit-spec", "visa.spec")
    check(r.returncode == 0, "generate visa exits 0")
    with open(work / "visa.csv", newline="") as f:
        rows = list(csv.reader(f))
    check(sorted(rows[0]) == ["Age", "FamilyStatus", "Nationality", "Skill", "Visa"],
          "generated CSV header lists the visa nodes")
    check(len(rows) == 50001, "generated CSV has the requested rows")

    shutil.copy(args.data / "golden" / "visa.spec", work / "golden.spec")
    r = cli("audit", "--spec", "golden.spec", *visa_query)
    check(r.returncode == 0, "exact audit exits 0")
    exact = json.loads(r.stdout)
    golden = json.loads((args.data / "golden" / "visa_report.json").read_text())
    golden["config"]["spec"] = "golden.spec"
    exact_cmp = json.loads(r.stdout)
    exact_cmp["config"]["spec"] = "golden.spec"
    check(close(exact_cmp, golden), "exact visa audit matches the golden report")
    for name in ["tv", "te", "ate", "nde", "nie", "pse"]:
        got = metric(exact, name)["value"]
        check(abs(got - truth[("visa", name)]) < 1e-12, f"exact {name} equals the oracle value")
    valid(exact, "exact report")

    r = cli("audit", "--spec", "visa.spec", "--data", "visa.csv", "--backend", "plugin",
            "--bootstrap", "200", "--seed", "11", *visa_query)
    check(r.returncode == 0, "plug-in audit with bootstrap exits 0")
    plugin = json.loads(r.stdout)
    valid(plugin, "plug-in report")
    te = metric(plugin, "te")
    check(te["backend"] == "plugin", "plug-in TE reports the plug-in backend")
    check(abs(te["value"] - truth[("visa", "te")]) < 0.02, "plug-in TE is near the oracle value")
    check(te["ci"] is not None and te["ci"]["lower"] <= te["value"] <= te["ci"]["upper"],
          "plug-in TE interval brackets the estimate")
    again = cli("audit", "--spec", "visa.spec", "--data", "visa.csv", "--backend", "plugin",
                "--bootstrap", "200", "--seed", "11", *visa_query)
    check(again.stdout == r.stdout, "repeated runs with one seed are byte-identical")

    r = cli("audit", "--spec", "visa.spec", "--data", "visa.csv", "--backend", "plugin",
            "--format", "markdown", *visa_query)
    check(r.returncode == 0, "markdown audit exits 0")
    md = r.stdout
    check(md.startswith("# Causal fairness audit"), "markdown report has a title")
    for name, tag in [("tv", "eq1"), ("te", "eq2"), ("ate", "eq3"), ("nde", "eq4"),
                      ("nie", "eq5"), ("pse", "eq6")]:
        check(f"| {name} | {tag} |" in md, f"markdown lists {name} with its equation tag")
    check("Disparate Treatment" in md and "Business Necessity" in md,
          "markdown has the legal framework mapping")

    r = cli("effects", "--spec", "golden.spec", "--metrics", "tv,nde", *visa_query)
    check(r.returncode == 0, "effects with a metric subset exits 0")
    subset = json.loads(r.stdout)
    check([m["metric"] for m in subset["metrics"]] == ["tv", "nde"],
          "effects reports only the requested metrics")
    check(subset["assumptions"] == [], "effects skips assumption checks")
    valid(subset, "effects report")

    r = cli("check", "--spec", "visa.spec", "--data", "visa.csv", "--sensitive", "Nationality",
            "--outcome", "Visa")
    check(r.returncode == 0, "check exits 0")
    checks = json.loads(r.stdout)
    check(checks["metrics"] == [] and checks["legal_mapping"] is None,
          "check reports no metrics")
    check(len(checks["assumptions"]) > 0, "check reports assumption results")
    valid(checks, "check report")

    r = cli("generate", "--scenario", "hiring", "--n", "10", "--out", "hiring.csv",
            "--emit-spec", "hiring.spec")
    check(r.returncode == 0, "generate hiring exits 0")
    r = cli("paths", "--spec", "hiring.spec", "--sensitive", "Race", "--outcome", "Hired")
    check(r.returncode == 0, "paths exits 0")
    lines = [l for l in r.stdout.splitlines()[1:] if l.strip()]
    check(len(lines) == 3, "hiring has three paths from Race to Hired")
    check(any("LastName=proxy" in l for l in lines) and any("Skill=explaining" in l for l in lines),
          "paths shows mediator roles")
    check("\x1b[" not in r.stdout, "piped paths output has no colour codes")

    (work / "latent.spec").write_text(
        "node Age { observed: false }\n"
        "node Nationality { domain: [0, 1] }\n"
        "node Skill { domain: [0, 1] }\n"
        "node Visa { domain: [0, 1] }\n"
        "edge Age -> Nationality\n"
        "edge Age -> Visa\n"
        "edge Nationality -> Skill\n"
        "edge Nationality -> Visa\n"
        "edge Skill -> Visa\n")
    with open(work / "visa.csv", newline="") as f, \
            open(work / "no_age.csv", "w", newline="") as g:
        reader = csv.DictReader(f)
        keep = ["Nationality", "Skill", "Visa"]
        writer = csv.DictWriter(g, fieldnames=keep, lineterminator="\n")
        writer.writeheader()
        for row in reader:
            writer.writerow({k: row[k] for k in keep})
    r = cli("audit", "--spec", "latent.spec", "--data", "no_age.csv", *visa_query)
    check(r.returncode == 2, "unidentifiable metrics exit 2")
    latent = json.loads(r.stdout)
    check(metric(latent, "tv")["status"] == "ok", "TV is still reported with a latent confounder")
    check(metric(latent, "te")["status"] == "failed", "TE fails with a latent confounder")
    check(latent["exit_code"] == 2, "report records exit code 2")
    valid(latent, "unidentifiable report")

    r = cli("audit", "--spec", "golden.spec", "--metrics", "tv,bogus", *visa_query)
    check(r.returncode == 1 and "unknown metric" in r.stderr, "unknown metric exits 1")
    r = cli("audit", "--spec", "golden.spec", "--frobnicate", *visa_query)
    check(r.returncode == 1 and "usage" in (r.stderr + r.stdout).lower(),
          "unknown flag exits 1 with a usage synopsis")
    r = cli("audit", "--spec", "visa.spec", "--data", "visa.csv", "--backend", "plugin",
            "--bootstrap", "50", *visa_query)
    check(r.returncode == 1 and "100" in r.stderr, "fewer than 100 bootstrap replicates exits 1")
    r = cli("audit", "--spec", "missing.spec", *visa_query)
    check(r.returncode == 1 and r.stderr.strip() != "", "missing spec exits 1 with a message")

    (work / "bad.csv").write_text("Nationality,Skill,Visa\n0,1,1\n1,7,0\n")
    r = cli("audit", "--spec", "latent.spec", "--data", "bad.csv", *visa_query)
    check(r.returncode == 1 and "7" in r.stderr, "out-of-domain value exits 1")

    print(f"{len(FAILURES)} failure(s)")
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
