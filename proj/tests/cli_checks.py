"""Exit codes, determinism and flag handling of the momap command line tool."""
import json
import os
import subprocess
import sys
import tempfile

BIN = sys.argv[1]
CONFIGS = sys.argv[2]
failures = []


def run(*args, cwd=None):
    return subprocess.run([BIN, *args], capture_output=True, text=True, cwd=cwd, timeout=120)


def expect(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f" ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def cfg(name):
    return os.path.join(CONFIGS, name)


def expect_exit(name, proc, code):
    expect(name, proc.returncode == code, f"exit {proc.returncode}, stderr: {proc.stderr.strip()[:300]}")


expect_exit("disc holonomy passes", run("holonomy", cfg("disc.json")), 0)
expect_exit("wobble holonomy passes", run("holonomy", cfg("disc_wobble.json")), 0)
expect_exit("board verify passes", run("verify", cfg("board.json")), 0)
expect_exit("cat preset verify passes", run("verify"), 0)
expect_exit("describe passes", run("describe", "--system", "board"), 0)
expect_exit("tolerance below achievable accuracy fails", run("holonomy", cfg("disc.json"), "--tol", "1e-20"), 1)
expect_exit("collinear reference is singular", run("verify", cfg("collinear.json")), 3)

with tempfile.TemporaryDirectory() as tmp:
    def write(name, text):
        path = os.path.join(tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    unknown = run("verify", write("unknown.json", '{"system": {"type": "disc", "colour": 1}}'))
    expect_exit("unknown key is a config error", unknown, 2)
    expect("unknown key is named", "system.colour" in unknown.stderr, unknown.stderr)
    expect_exit("malformed json is a config error", run("verify", write("broken.json", '{"system":')), 2)
    expect_exit("zero steps is a config error",
                run("lift", write("steps.json", '{"system": {"type": "disc"}, "integrator": {"steps": 0}}')), 2)
    expect_exit("negative inertia is a config error",
                run("verify", write("inertia.json", '{"system": {"type": "disc", "inertia": -1}}')), 2)
    write("open.csv", "t,r,phi,theta\n0,1,0,0\n0.5,1.5,1,0\n1,2,2,0\n")
    opened = write("open.json", '{"system": {"type": "disc"}, "path": {"type": "sampled", "file": "open.csv"}}')
    expect_exit("open loop holonomy is rejected", run("holonomy", opened), 2)
    expect_exit("open path still lifts", run("lift", opened), 0)
    expect_exit("missing config file", run("verify", os.path.join(tmp, "absent.json")), 2)
    expect_exit("config file and preset together", run("verify", cfg("disc.json"), "--system", "disc"), 2)
    expect_exit("unknown format", run("verify", "--format", "yaml"), 2)
    expect_exit("unknown preset", run("verify", "--system", "pendulum"), 2)

    out = os.path.join(tmp, "lift.csv")
    proc = run("lift", cfg("board.json"), "--out", out)
    expect_exit("lift to file", proc, 0)
    expect("--out leaves stdout empty", proc.stdout == "", proc.stdout[:100])
    with open(out) as f:
        header = f.readline().strip().split(",")
    expect("lift csv header", header[0] == "t" and "pairing_residual" in header, ",".join(header))

first = run("holonomy", "--seed", "7")
second = run("holonomy", "--seed", "7")
expect("repeated runs are byte identical", first.returncode == 0 and first.stdout == second.stdout)
v1 = run("verify", cfg("euclidean.json"), "--seed", "3")
v2 = run("verify", cfg("euclidean.json"), "--seed", "3")
expect("seeded verify is byte identical", v1.stdout == v2.stdout and v1.returncode == 0)

rec = run("holonomy", cfg("disc.json"), "--steps", "512", "--format", "record")
if rec.returncode == 0:
    doc = json.loads(rec.stdout)
    expect("--steps overrides config", doc.get("steps") == 512, rec.stdout[:200])
else:
    expect("--steps overrides config", False, rec.stderr)

csv = run("verify", "--system", "disc", "--format", "csv")
expect("verify csv output", csv.returncode == 0 and csv.stdout.count("\n") > 5, csv.stdout[:200])

err = run("verify", cfg("collinear.json"))
try:
    body = json.loads(err.stderr)["error"]
    expect("singular error carries the gram matrix", len(body["gram"]) == 3, err.stderr[:200])
except (ValueError, KeyError) as e:
    expect("singular error carries the gram matrix", False, str(e))

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
