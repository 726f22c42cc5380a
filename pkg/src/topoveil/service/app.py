"""FastAPI service wrapping the core package.

Stateless JSON-in/JSON-out endpoints, one per toolkit operation. Domain
errors map to HTTP 400 with the exception class name in the detail.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import attack as atk
from .. import connectivity as conn
from .. import netlist as nl
from .. import obnocs
from .. import potent
from .. import reports
from .. import sim
from .. import topology as topo
from ..errors import TopoveilError
from ..sipo import load_package, reset
from . import models as m


def _topo_in(model: m.TopologyModel) -> topo.Topology:
    return topo.from_dict(model.model_dump())


def _topo_out(t: topo.Topology) -> m.TopologyModel:
    return m.TopologyModel(**topo.to_dict(t))


def _design_in(model: m.DesignModel) -> obnocs.ObfuscatedDesign:
    return obnocs.design_from_dict(model.model_dump())


def _design_out(d: obnocs.ObfuscatedDesign) -> m.DesignModel:
    return m.DesignModel(**obnocs.design_to_dict(d))


def _netlist_in(model: m.NetlistModel) -> nl.Netlist:
    return nl.from_dict(model.model_dump())


def _netlist_out(n: nl.Netlist) -> m.NetlistModel:
    return m.NetlistModel(**nl.to_dict(n))


def _matrix_in(model: m.MatrixModel) -> conn.ConnectivityMatrix:
    return conn.ConnectivityMatrix.from_dict(model.model_dump())


def _matrix_out(x: conn.ConnectivityMatrix) -> m.MatrixModel:
    return m.MatrixModel(**x.to_dict())


def create_app() -> FastAPI:
    app = FastAPI(title="topoveil", version="0.1.0")

    @app.exception_handler(TopoveilError)
    async def _domain_error(_, exc: TopoveilError):
        raise HTTPException(
            status_code=400, detail=f"{type(exc).__name__}: {exc}")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/validate", response_model=m.ValidateResponse)
    def validate(req: m.ValidateRequest):
        report = topo.validate(_topo_in(req.topology))
        return m.ValidateResponse(
            functional=report.ok,
            findings=[m.FindingModel(kind=f.kind, where=f.where) for f in report],
        )

    @app.post("/obfuscate/obnocs", response_model=m.ObfuscateObnocsResponse)
    def obfuscate_obnocs(req: m.ObfuscateObnocsRequest):
        t = _topo_in(req.topology)
        routers = (set(obnocs.eligible_routers(t)) if req.all_routers
                   else set(req.routers))
        extensions = {r: [tuple(e) for e in eps]
                      for r, eps in req.extensions.items()} or None
        design, ap = obnocs.insert_switches(
            t, routers, stages=req.stages, seed=req.seed, extensions=extensions)
        return m.ObfuscateObnocsResponse(
            design=_design_out(design),
            activation_package=m.ActivationPackageModel(
                length=len(ap.bits), hex=ap.hex()),
        )

    @app.post("/induce", response_model=m.InduceResponse)
    def induce(req: m.InduceRequest):
        design = _design_in(req.design)
        induced = obnocs.induce_topology(design, req.key)
        klass = topo.classify(induced, design.intended_topology())
        return m.InduceResponse(
            topology=_topo_out(induced), topology_class=klass.value)

    @app.post("/enumerate", response_model=m.EnumerateResponse)
    def enumerate_(req: m.EnumerateRequest):
        design = _design_in(req.design)
        formula = 1
        for g in design.groups:
            formula *= math.factorial(len(g.lanes))
        if req.sample is not None and design.key_length > req.cap:
            records = obnocs.enumerate_keys(
                design, cap=req.cap, sample=req.sample, seed=req.seed)
            legal = len({
                r.digest for r in records
                if r.topo_class is not topo.TopologyClass.NON_FUNCTIONAL})
            return m.EnumerateResponse(legal=legal, formula=formula, sampled=True)
        legal, _ = obnocs.count_legal(design, cap=req.cap)
        return m.EnumerateResponse(legal=legal, formula=formula, sampled=False)

    @app.post("/load-ap", response_model=m.LoadApResponse)
    def load_ap(req: m.LoadApRequest):
        ap = obnocs.ActivationPackage(
            obnocs.key_hex_to_bits(req.package_hex, req.length))
        reg, trace = load_package(reset(req.length), ap)
        return m.LoadApResponse(
            state=reg.state,
            state_hex=obnocs.key_bits_to_hex(reg.state),
            trace=[
                m.TraceStepModel(
                    cycle=s.cycle, ap_in=s.ap_in, load_en=s.load_en,
                    state_hex=obnocs.key_bits_to_hex(s.state))
                for s in trace
            ],
        )

    @app.post("/elaborate", response_model=m.ElaborateResponse)
    def elaborate_(req: m.ElaborateRequest):
        fabric = nl.elaborate(_design_in(req.design), bus_width=req.bus_width)
        return m.ElaborateResponse(
            netlist=_netlist_out(fabric),
            mux2_cells=nl.count_cells(fabric, "MUX2"))

    @app.post("/optimize", response_model=m.OptimizeResponse)
    def optimize(req: m.OptimizeRequest):
        n = _netlist_in(req.netlist)
        opt = nl.synthesize_lite(n)
        return m.OptimizeResponse(
            netlist=_netlist_out(opt),
            cells_before=len(n.cells),
            cells_after=len(opt.cells))

    @app.post("/connectivity/extract", response_model=m.MatrixModel)
    def connectivity_extract(req: m.ConnectivityRequest):
        matrix = conn.extract_connectivity(
            _netlist_in(req.netlist), req.router, req.inputs, req.outputs)
        return _matrix_out(matrix)

    @app.post("/connectivity/merge", response_model=m.MatrixModel)
    def connectivity_merge(req: m.MergeRequest):
        return _matrix_out(
            conn.merge_connectivity(_matrix_in(req.pre), _matrix_in(req.post)))

    @app.post("/obfuscate/potent/generate", response_model=m.PotentGenerateResponse)
    def potent_generate(req: m.PotentGenerateRequest):
        s = potent.generate_switch(_matrix_in(req.matrix), req.key_width)
        return m.PotentGenerateResponse(
            switch=m.SwitchModel(signals=list(s.signals), key_width=s.key_width),
            valid_keys=s.valid_keys,
            zero_keys=s.zero_keys,
        )

    @app.post("/obfuscate/potent/integrate", response_model=m.PotentIntegrateResponse)
    def potent_integrate(req: m.PotentIntegrateRequest):
        s = potent.ObfSwitch(
            signals=tuple(req.switch.signals), key_width=req.switch.key_width)
        obf, matrix = potent.integrate(
            _netlist_in(req.netlist), s, req.correct_key)
        return m.PotentIntegrateResponse(
            netlist=_netlist_out(obf), matrix=_matrix_out(matrix))

    @app.post("/keyspace", response_model=m.KeyspaceResponse)
    def keyspace_(req: m.KeyspaceRequest):
        return m.KeyspaceResponse(
            keyspace=str(1 << (req.router_count * req.key_width)))

    @app.post("/attack/sat", response_model=m.AttackResponse)
    def attack_sat(req: m.AttackRequest):
        locked = _netlist_in(req.locked)
        oracle = _oracle(req.oracle, locked)
        result = atk.sat_attack(locked, oracle, budget=req.budget, seed=req.seed)
        return _attack_response(req, locked, result)

    @app.post("/attack/brute", response_model=m.AttackResponse)
    def attack_brute(req: m.AttackRequest):
        locked = _netlist_in(req.locked)
        oracle = _oracle(req.oracle, locked)
        result = atk.brute_force_attack(locked, oracle)
        return _attack_response(req, locked, result)

    def _oracle(spec: m.OracleSpec, locked: nl.Netlist):
        if spec.kind == "exact":
            if spec.correct_key is None:
                raise TopoveilError("exact oracle needs correct_key")
            return atk.ExactOracle(locked, spec.correct_key)
        if spec.design is None:
            raise TopoveilError("behavioral oracle needs the design")
        return atk.behavioral_oracle_for_design(
            _design_in(spec.design), locked, seed=spec.seed)

    def _attack_response(req: m.AttackRequest, locked, result) -> m.AttackResponse:
        if req.ground_truth_design is not None and req.ground_truth_key:
            ground = atk.ground_truth_for_design(
                _design_in(req.ground_truth_design),
                obnocs.ActivationPackage(req.ground_truth_key))
            result.verdict, result.phi_digest = atk.verdict(
                locked, result.recovered_key, ground)
        return m.AttackResponse(
            recovered_key=result.recovered_key,
            recovered_key_hex=obnocs.key_bits_to_hex(result.recovered_key),
            dip_count=result.dip_count,
            queries=result.queries,
            verdict=result.verdict.value if result.verdict else None,
            phi_digest=result.phi_digest,
            consistent_keys=(list(result.consistent_keys)
                             if result.consistent_keys else None),
        )

    @app.post("/simulate", response_model=m.SimulateResponse)
    def simulate(req: m.SimulateRequest):
        design = _design_in(req.design)
        if not req.keys:
            raise TopoveilError("at least one key (the golden one) is required")
        workload = sim.Workload(
            messages=tuple(sim.Message(**msg.model_dump()) for msg in req.workload),
            alu=req.alu,
        )
        missing = sim.workload_coverage(design, workload)
        runs = [sim.run_dut(design, k, workload) for k in req.keys]
        report = sim.compare_runs(runs[0], runs)
        return m.SimulateResponse(
            golden_key=req.keys[0],
            coverage_missing=[m.LinkModel(src=l.src, dst=l.dst) for l in missing],
            per_dut=[
                m.DutVerdictModel(
                    key=v.key, topo_class=v.topo_class.value, match=v.match)
                for v in report.per_dut
            ],
            tallies=dict(report.tallies),
        )

    @app.post("/report/overhead", response_model=m.OverheadResponse)
    def report_overhead(req: m.OverheadRequest):
        report = reports.overhead_report(
            _topo_in(req.topology),
            reports.ObfuscationLevel.named(req.level),
            req.samples,
            req.seed,
            stages=req.stages,
            bus_width=req.bus_width,
        )
        return m.OverheadResponse(rows=[
            m.LevelRowModel(
                level=r.level, router_count=r.router_count,
                mux2_cells=r.mux2_cells, key_bits=r.key_bits,
                added_register_bits=r.added_register_bits,
                added_depth=r.added_depth)
            for r in report.rows
        ])

    @app.post("/export/dot", response_model=m.DotResponse)
    def export_dot(req: m.ValidateRequest):
        return m.DotResponse(dot=topo.to_dot(_topo_in(req.topology)))

    return app
