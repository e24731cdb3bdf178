#!/usr/bin/env python3
"""Validate every CLI output against the schemas in docs/schemas.

Runs each subcommand on small fixtures, then checks every JSON output against
its schema and every CSV output against its documented header. Exits 77 (the
ctest skip code) when the jsonschema package is unavailable.

Usage: validate_schemas.py <path-to-otcic-cli> <schema-dir>
"""

import json
import pathlib
import subprocess
import sys
import tempfile

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError as error:
    print(f"skipping schema validation: {error}")
    sys.exit(77)

PANEL_2D = """id,group,period,y1,y2
c1,control,pre,1.0,2.0
c2,control,pre,2.0,1.0
c3,control,pre,3.0,3.0
c4,control,pre,1.5,2.5
c1,control,post,2.0,2.5
c2,control,post,3.0,1.5
c3,control,post,4.0,3.5
c4,control,post,2.5,3.0
t1,treated,pre,1.5,2.5
t2,treated,pre,2.5,1.5
t3,treated,pre,2.0,2.0
t1,treated,post,4.0,3.0
t2,treated,post,5.0,2.0
t3,treated,post,4.5,2.5
"""

PANEL_1D = """id,group,period,y1
c1,control,pre,1.0
c2,control,pre,2.0
c3,control,pre,3.0
c1,control,post,11.0
c2,control,post,12.0
c3,control,post,13.0
t1,treated,pre,1.5
t2,treated,pre,2.5
t1,treated,post,14.0
t2,treated,post,15.0
"""

SURVEY = """SHEET,STATE,EMPFT,EMPPT,PCTAFF,NMGRS,INCTIME,PENTREE,PSODA,NREGS,OPEN,HRSOPEN,EMPFT2,EMPPT2,PCTAFF2,NMGRS2,INCTIME2,PENTREE2,PSODA2,NREGS2,OPEN2,HRSOPEN2
u1,PA,10,5,20,3,6,5.0,1.0,4,7,16,12,4,20,3,6,5.1,1.1,4,7,16
u2,PA,8,6,15,2,9,4.5,0.9,3,8,14,9,5,15,2,9,4.6,1.0,3,8,14
u3,NJ,7,9,10,4,12,6.0,1.2,5,6,18,9,7,10,4,12,6.1,1.2,5,6,18
u4,NJ,6,8,15,3,6,5.5,1.0,4,7,15,7,7,15,3,6,5.5,1.0,4,7,15
u5,NJ,11,3,12,4,6,5.2,1.1,3,10,12,12,2,12,4,6,5.2,1.1,3,10,12
u6,PA,9,7,25,3,9,4.8,0.8,4,6,15,10,6,25,3,9,4.9,0.9,4,6,15
u7,NJ,5,10,8,2,6,5.8,1.3,6,7,17,8,6,8,2,6,5.9,1.3,6,7,17
u8,NJ,13,2,30,5,9,6.5,1.4,4,8,16,14,3,30,5,9,6.4,1.4,4,8,16
"""

SCHEMA_FOR_JSON = {
    "report.json": "simulate_report.schema.json",
    "effects.json": "effects.schema.json",
    "plan.json": "plan.schema.json",
    "table2.json": "table2.schema.json",
    "sweep.json": "sweep.schema.json",
    "unit_drop.json": "unit_drop.schema.json",
    "manifest.json": "manifest.schema.json",
}

# Accepted header lines per CSV output. unit_effects.csv has one shape from
# `estimate` (per-coordinate effects) and one from `ck` (employment scatter).
HEADERS_FOR_CSV = {
    "per_run.csv": {"run,mad_ot,mad_cic"},
    "marginals.csv": {"coord,x,ecdf_true,ecdf_ot,ecdf_cic"},
    "kde.csv": {"surface,x,y,density"},
    "mesh_quantiles.csv": {"level,ecdf_true,ecdf_ot,ecdf_cic"},
    "qte.csv": {"q,effect_1", "q,effect_1,effect_2"},
    "counterfactuals.csv": {
        "unit,pre_1,matched_control,cf_1",
        "unit,pre_1,pre_2,matched_control,cf_1,cf_2",
    },
    "unit_effects.csv": {
        "unit,effect_1",
        "unit,effect_1,effect_2",
        "unit,pre_ft,pre_pt,post_ft,post_pt,cf_ft,cf_pt,effect_ft,effect_pt",
    },
    "coupling.csv": {"treated_post,counterfactual"},
    "quantile_curves.csv": {"coord,q,treated,counterfactual"},
    "conditional_bands.csv": {
        "fixed_coord,band,q,n_treated,n_counterfactual,treated,counterfactual"
    },
    "sweep_rows.csv": {"extras,dimension,n_control,n_treated,te_ft,te_pt"},
    "unit_drop.csv": {"rep,te_ft,te_pt"},
}


def load_schemas(schema_dir: pathlib.Path):
    schemas = {}
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(schema)
        schemas[schema["$id"]] = schema
        resources.append((schema["$id"], Resource.from_contents(schema)))
    registry = Registry().with_resources(resources)
    return schemas, registry


def main() -> int:
    if len(sys.argv) != 3:
        print(f"usage: {sys.argv[0]} <path-to-otcic-cli> <schema-dir>")
        return 2
    cli = pathlib.Path(sys.argv[1]).resolve()
    schemas, registry = load_schemas(pathlib.Path(sys.argv[2]))

    errors = []
    with tempfile.TemporaryDirectory(prefix="otcic_schemas_") as scratch_name:
        scratch = pathlib.Path(scratch_name)
        (scratch / "panel2.csv").write_text(PANEL_2D)
        (scratch / "panel1.csv").write_text(PANEL_1D)
        (scratch / "survey.csv").write_text(SURVEY)

        invocations = [
            ["simulate", "--n", "60", "--runs", "2", "--mesh-points", "150",
             "--kde-resolution", "8", "--marginal-resolution", "16", "--seed", "3",
             "--threads", "1"],
            ["estimate", "--data", str(scratch / "panel2.csv"), "--method", "did"],
            ["estimate", "--data", str(scratch / "panel1.csv"), "--method", "cic",
             "--dump-plan", "--qte-points", "7"],
            ["estimate", "--data", str(scratch / "panel2.csv"), "--method", "ot_cic",
             "--dump-plan", "--couple"],
            ["estimate", "--data", str(scratch / "panel2.csv"), "--method", "ot_cic",
             "--rounding", "barycentric"],
            ["ck", "--data", str(scratch / "survey.csv"), "--analysis", "table2"],
            ["ck", "--data", str(scratch / "survey.csv"), "--analysis", "sweep"],
            ["ck", "--data", str(scratch / "survey.csv"), "--analysis", "unit-drop",
             "--reps", "6", "--seed", "2"],
        ]

        for index, args in enumerate(invocations):
            out_dir = scratch / f"out{index}"
            run = subprocess.run(
                [str(cli), *args, "--quiet", "--out-dir", str(out_dir)],
                capture_output=True, text=True)
            if run.returncode != 0:
                errors.append(f"{' '.join(args)}: exit {run.returncode}: {run.stderr.strip()}")
                continue
            for path in sorted(out_dir.iterdir()):
                label = f"{args[0]}/{path.name}"
                if path.suffix == ".json":
                    schema_id = SCHEMA_FOR_JSON.get(path.name)
                    if schema_id is None:
                        errors.append(f"{label}: no schema documents this output")
                        continue
                    validator = jsonschema.Draft202012Validator(
                        schemas[schema_id], registry=registry)
                    for error in validator.iter_errors(json.loads(path.read_text())):
                        errors.append(f"{label}: {error.json_path}: {error.message}")
                elif path.suffix == ".csv":
                    allowed = HEADERS_FOR_CSV.get(path.name)
                    header = path.read_text().splitlines()[0]
                    if allowed is None:
                        errors.append(f"{label}: no documented header for this output")
                    elif header not in allowed:
                        errors.append(f"{label}: header '{header}' is undocumented")
                else:
                    errors.append(f"{label}: unexpected output kind")

    if errors:
        for error in errors:
            print(f"error: {error}")
        return 1
    print("all outputs match their documented schemas")
    return 0


if __name__ == "__main__":
    sys.exit(main())
