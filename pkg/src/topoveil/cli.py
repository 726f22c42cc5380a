"""Command-line surface: thin client over the core package.

Exit codes: 0 success, 1 domain error, 2 usage error. Every command is a
single process invocation; all randomness flows from ``--seed``, and
artifacts are written in canonical form so identical pipelines produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import attack as atk
from . import connectivity as conn
from . import netlist as nl
from . import obnocs
from . import potent
from . import reports
from . import sim
from . import topology as topo
from .errors import TopoveilError
from .sipo import load_package, reset


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _load_key_arg(args, design) -> str:
    if getattr(args, "key", None):
        return args.key
    if not getattr(args, "ap", None):
        raise TopoveilError("pass --key <bits> or --ap <file>")
    ap = obnocs.ap_from_file_text(_read(args.ap))
    if design is not None and len(ap.bits) != design.key_length:
        raise TopoveilError(
            f"key file has {len(ap.bits)} bits, design wants {design.key_length}")
    return ap.bits


def _parse_routers(args, t) -> set[str]:
    if args.all_routers:
        return set(obnocs.eligible_routers(t))
    if not args.routers:
        raise TopoveilError("pass --routers or --all")
    return {r.strip() for r in args.routers.split(",") if r.strip()}


def cmd_validate(args) -> int:
    t = topo.from_json(_read(args.topology))
    report = topo.validate(t)
    for f in report:
        print(str(f))
    print("functional" if report.ok else f"findings={len(report.findings)}")
    if args.out:
        _write(args.out, json.dumps(
            {"functional": report.ok,
             "findings": [{"kind": f.kind, "where": f.where} for f in report]},
            sort_keys=True, indent=2) + "\n")
    return 0


def cmd_obfuscate_obnocs(args) -> int:
    t = topo.from_json(_read(args.topology))
    extensions = None
    if args.extensions:
        raw = json.loads(_read(args.extensions))
        extensions = {r: [tuple(e) for e in eps] for r, eps in raw.items()}
    design, ap = obnocs.insert_switches(
        t, _parse_routers(args, t), stages=args.stages, seed=args.seed,
        extensions=extensions)
    _write(args.out, obnocs.design_to_json(design))
    _write(args.ap_out, obnocs.ap_to_file_text(ap))
    print(f"key_length={design.key_length} groups={len(design.groups)}")
    return 0


def cmd_obfuscate_potent(args) -> int:
    matrix = conn.ConnectivityMatrix.from_csv(args.router, _read(args.matrix))
    switch = potent.generate_switch(matrix, args.key_width)
    router_nl = nl.parse(_read(args.netlist))
    obf, updated = potent.integrate(router_nl, switch, args.correct_key)
    _write(args.out, nl.serialize(obf))
    _write(args.switch_out, potent.switch_to_json(switch, args.correct_key))
    if args.matrix_out:
        _write(args.matrix_out, updated.to_csv())
    print(f"signals={switch.n} key_width={switch.key_width} "
          f"zero_keys={switch.zero_keys}")
    return 0


def cmd_induce(args) -> int:
    design = obnocs.design_from_json(_read(args.design))
    key = _load_key_arg(args, design)
    induced = obnocs.induce_topology(design, key)
    text = topo.to_json(induced)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_enumerate(args) -> int:
    design = obnocs.design_from_json(_read(args.design))
    formula = 1
    for g in design.groups:
        formula *= math.factorial(len(g.lanes))
    if args.sample:
        records = obnocs.enumerate_keys(
            design, cap=args.cap, sample=args.sample, seed=args.seed)
        legal = len({
            r.digest for r in records
            if r.topo_class is not topo.TopologyClass.NON_FUNCTIONAL})
        print(f"legal>={legal} (sampled) formula={formula}")
        return 0
    legal, _ = obnocs.count_legal(design, cap=args.cap)
    print(f"legal={legal} formula={formula}")
    return 0


def cmd_load_ap(args) -> int:
    ap = obnocs.ap_from_file_text(_read(args.ap))
    width = len(ap.bits)
    if args.design:
        design = obnocs.design_from_json(_read(args.design))
        if design.key_length != width:
            raise TopoveilError(
                f"package width {width} != design key length {design.key_length}")
    reg, trace = load_package(reset(width), ap)
    _write(args.trace, trace.to_csv())
    print(f"state={obnocs.key_bits_to_hex(reg.state)}")
    return 0


def cmd_elaborate(args) -> int:
    design = obnocs.design_from_json(_read(args.design))
    fabric = nl.elaborate(design, bus_width=args.bus_width)
    _write(args.out, nl.serialize(fabric))
    print(f"cells={len(fabric.cells)} mux2={nl.count_cells(fabric, 'MUX2')} "
          f"key_bits={design.key_length}")
    return 0


def cmd_optimize(args) -> int:
    n = nl.parse(_read(args.netlist))
    opt = nl.synthesize_lite(n)
    _write(args.out, nl.serialize(opt))
    print(f"cells={len(n.cells)}->{len(opt.cells)}")
    return 0


def cmd_connectivity(args) -> int:
    n = nl.parse(_read(args.netlist))
    ins = [s.strip() for s in args.inputs.split(",") if s.strip()]
    outs = [s.strip() for s in args.outputs.split(",") if s.strip()]
    matrix = conn.extract_connectivity(n, args.router, ins, outs)
    if args.merge_with:
        other = conn.ConnectivityMatrix.from_csv(args.router, _read(args.merge_with))
        matrix = conn.merge_connectivity(matrix, other)
    _write(args.out, matrix.to_csv())
    print(f"preserved={len(matrix.preserved_rows())}")
    return 0


def _build_oracle(args, locked):
    if args.oracle == "exact":
        design = obnocs.design_from_json(_read(args.design)) if args.design else None
        bits = _load_key_arg(args, design)
        return atk.ExactOracle(locked, bits)
    design = obnocs.design_from_json(_read(args.design))
    return atk.behavioral_oracle_for_design(design, locked, seed=args.seed)


def _finish_attack(args, locked, result) -> int:
    if args.design and (args.ap or args.key):
        design = obnocs.design_from_json(_read(args.design))
        ap = obnocs.ActivationPackage(_load_key_arg(args, design))
        ground = atk.ground_truth_for_design(design, ap)
        result.verdict, result.phi_digest = atk.verdict(
            locked, result.recovered_key, ground)
    if args.report:
        _write(args.report, atk.attack_report_json(result))
    extra = f" verdict={result.verdict.value}" if result.verdict else ""
    print(f"recovered={obnocs.key_bits_to_hex(result.recovered_key)} "
          f"dips={result.dip_count}{extra}")
    return 0


def cmd_attack_sat(args) -> int:
    locked = nl.parse(_read(args.locked))
    oracle = _build_oracle(args, locked)
    result = atk.sat_attack(locked, oracle, budget=args.budget, seed=args.seed)
    return _finish_attack(args, locked, result)


def cmd_attack_brute(args) -> int:
    locked = nl.parse(_read(args.locked))
    oracle = _build_oracle(args, locked)
    result = atk.brute_force_attack(locked, oracle)
    print(f"consistent_keys={len(result.consistent_keys)}")
    return _finish_attack(args, locked, result)


def cmd_simulate(args) -> int:
    design = obnocs.design_from_json(_read(args.design))
    keys = [k.strip() for k in _read(args.keys).splitlines() if k.strip()]
    if not keys:
        raise TopoveilError("keys file is empty")
    alu = args.alu or (design.base.ips()[0] if design.base.ips() else "")
    workload = sim.workload_from_json(_read(args.workload), alu=alu)
    missing = sim.workload_coverage(design, workload)
    if missing:
        print(f"warning: workload misses {len(missing)} redacted link(s)",
              file=sys.stderr)
    runs = [sim.run_dut(design, k, workload) for k in keys]
    report = sim.compare_runs(runs[0], runs)
    payload = {
        "golden_key": keys[0],
        "coverage_missing": [
            {"src": list(l.src), "dst": list(l.dst)} for l in missing],
        "divergence": report.to_dict(),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report_overhead(args) -> int:
    t = topo.from_json(_read(args.topology))
    level = reports.ObfuscationLevel.named(args.level)
    capped = min(level.router_count, len(obnocs.eligible_routers(t)))
    if capped < level.router_count:
        print(f"note: level {args.level} capped to {capped} available routers",
              file=sys.stderr)
        level = reports.ObfuscationLevel(level=args.level, router_count=capped)
    report = reports.overhead_report(
        t, level, args.samples, args.seed,
        stages=args.stages, bus_width=args.bus_width)
    text = report.to_json()
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_export_dot(args) -> int:
    t = topo.from_json(_read(args.topology))
    text = topo.to_dot(t)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topoveil")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a topology for functionality")
    v.add_argument("--topology", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    ob = sub.add_parser("obfuscate", help="insert obfuscation structures")
    obsub = ob.add_subparsers(dest="flavor", required=True)
    oo = obsub.add_parser("obnocs")
    oo.add_argument("--topology", required=True)
    oo.add_argument("--routers", help="comma-separated router ids")
    oo.add_argument("--all", dest="all_routers", action="store_true")
    oo.add_argument("--stages", type=int, default=1, choices=(1, 2))
    oo.add_argument("--seed", type=int, default=0)
    oo.add_argument("--extensions", help="JSON file: router -> [[node, port], ...]")
    oo.add_argument("--out", required=True)
    oo.add_argument("--ap-out", required=True)
    oo.set_defaults(func=cmd_obfuscate_obnocs)
    op = obsub.add_parser("potent")
    op.add_argument("--matrix", required=True, help="merged connectivity CSV")
    op.add_argument("--router", default="router")
    op.add_argument("--netlist", required=True)
    op.add_argument("--correct-key", type=int, required=True)
    op.add_argument("--key-width", type=int)
    op.add_argument("--out", required=True)
    op.add_argument("--switch-out", required=True)
    op.add_argument("--matrix-out")
    op.set_defaults(func=cmd_obfuscate_potent)

    ind = sub.add_parser("induce", help="topology induced by a key")
    ind.add_argument("--design", required=True)
    ind.add_argument("--key", help="key as a bitstring")
    ind.add_argument("--ap", help="key as an activation-package file")
    ind.add_argument("--out")
    ind.set_defaults(func=cmd_induce)

    en = sub.add_parser("enumerate", help="count legal topologies")
    en.add_argument("--design", required=True)
    en.add_argument("--cap", type=int, default=obnocs.ENUM_CAP_BITS)
    en.add_argument("--sample", type=int)
    en.add_argument("--seed", type=int, default=1)
    en.set_defaults(func=cmd_enumerate)

    la = sub.add_parser("load-ap", help="simulate the SIPO package load")
    la.add_argument("--design")
    la.add_argument("--ap", required=True)
    la.add_argument("--trace", required=True)
    la.set_defaults(func=cmd_load_ap)

    el = sub.add_parser("elaborate", help="lower switches to a gate fabric")
    el.add_argument("--design", required=True)
    el.add_argument("--bus-width", type=int, default=1)
    el.add_argument("--out", required=True)
    el.set_defaults(func=cmd_elaborate)

    opt = sub.add_parser("optimize", help="synthesis-lite optimizer")
    opt.add_argument("--netlist", required=True)
    opt.add_argument("--out", required=True)
    opt.set_defaults(func=cmd_optimize)

    co = sub.add_parser("connectivity", help="extract / merge connectivity")
    co.add_argument("--netlist", required=True)
    co.add_argument("--router", required=True)
    co.add_argument("--inputs", required=True)
    co.add_argument("--outputs", required=True)
    co.add_argument("--merge-with")
    co.add_argument("--out", required=True)
    co.set_defaults(func=cmd_connectivity)

    at = sub.add_parser("attack", help="key-recovery attacks")
    atsub = at.add_subparsers(dest="flavor", required=True)
    for name, fn in (("sat", cmd_attack_sat), ("brute", cmd_attack_brute)):
        ap_ = atsub.add_parser(name)
        ap_.add_argument("--locked", required=True)
        ap_.add_argument("--oracle", choices=("exact", "behavioral"),
                         default="exact")
        ap_.add_argument("--design")
        ap_.add_argument("--ap")
        ap_.add_argument("--key")
        ap_.add_argument("--budget", type=int)
        ap_.add_argument("--seed", type=int, default=0)
        ap_.add_argument("--report")
        ap_.set_defaults(func=fn)

    si = sub.add_parser("simulate", help="multi-DUT workload comparison")
    si.add_argument("--design", required=True)
    si.add_argument("--keys", required=True, help="file with one key per line")
    si.add_argument("--workload", required=True)
    si.add_argument("--alu")
    si.add_argument("--out")
    si.set_defaults(func=cmd_simulate)

    re = sub.add_parser("report", help="analytic reports")
    resub = re.add_subparsers(dest="flavor", required=True)
    ro = resub.add_parser("overhead")
    ro.add_argument("--topology", required=True)
    ro.add_argument("--level", required=True, choices=reports.LEVEL_ORDER)
    ro.add_argument("--samples", type=int, default=10)
    ro.add_argument("--seed", type=int, default=0)
    ro.add_argument("--stages", type=int, default=1, choices=(1, 2))
    ro.add_argument("--bus-width", type=int, default=1)
    ro.add_argument("--out")
    ro.set_defaults(func=cmd_report_overhead)

    ex = sub.add_parser("export", help="exports")
    exsub = ex.add_subparsers(dest="flavor", required=True)
    ed = exsub.add_parser("dot")
    ed.add_argument("--topology", required=True)
    ed.add_argument("--out")
    ed.set_defaults(func=cmd_export_dot)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)

    return p


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (TopoveilError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
